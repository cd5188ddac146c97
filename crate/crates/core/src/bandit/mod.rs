//! Ground-truth bandit instances and the biased reward channel.

mod instance;
mod partition;
mod slate;

pub use instance::{BanditInstance, BiasSign, CoefficientLayout, SyntheticConfig};
pub use partition::GroupPartition;
pub use slate::Slate;
