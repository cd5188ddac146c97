use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("true regret is unavailable for this environment")]
    NoTrueRegret,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! invalid_input {
    ($($arg:tt)*) => {
        $crate::Error::InvalidInput(alloc::format!($($arg)*))
    };
}

macro_rules! invalid_config {
    ($($arg:tt)*) => {
        $crate::Error::InvalidConfig(alloc::format!($($arg)*))
    };
}

pub(crate) use invalid_config;
pub(crate) use invalid_input;
