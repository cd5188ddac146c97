use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_config, Result};

/// Assignment of arms to disjoint, nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct GroupPartition {
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
    sensitive: usize,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    groups: usize,
    assignment: Vec<usize>,
    sensitive_group: usize,
}

impl TryFrom<PartitionRepr> for GroupPartition {
    type Error = crate::Error;

    fn try_from(r: PartitionRepr) -> Result<Self> {
        Self::new(r.assignment, r.groups, r.sensitive_group)
    }
}

impl From<GroupPartition> for PartitionRepr {
    fn from(p: GroupPartition) -> Self {
        Self { groups: p.members.len(), assignment: p.assignment, sensitive_group: p.sensitive }
    }
}

impl GroupPartition {
    pub fn new(assignment: Vec<usize>, groups: usize, sensitive_group: usize) -> Result<Self> {
        if groups == 0 {
            return Err(invalid_config!("a partition needs at least one group"));
        }
        if sensitive_group >= groups {
            return Err(invalid_config!("sensitive group {sensitive_group} out of range for {groups} groups"));
        }
        let mut members = alloc::vec![Vec::new(); groups];
        for (arm, &g) in assignment.iter().enumerate() {
            if g >= groups {
                return Err(invalid_config!("arm {arm} assigned to group {g} but only {groups} groups exist"));
            }
            members[g].push(arm);
        }
        if let Some(g) = members.iter().position(Vec::is_empty) {
            return Err(invalid_config!("group {g} has no arms"));
        }
        Ok(Self { assignment, members, sensitive: sensitive_group })
    }

    /// Consecutive blocks of arms with the given sizes.
    pub fn contiguous(sizes: &[usize], sensitive_group: usize) -> Result<Self> {
        let assignment = sizes.iter().enumerate().flat_map(|(g, &s)| core::iter::repeat_n(g, s)).collect();
        Self::new(assignment, sizes.len(), sensitive_group)
    }

    /// Arms `0..sensitive` form the sensitive group, the rest the second group.
    pub fn two_group(arms: usize, sensitive: usize) -> Result<Self> {
        if sensitive == 0 || sensitive >= arms {
            return Err(invalid_config!("need 0 < sensitive ({sensitive}) < arms ({arms})"));
        }
        Self::contiguous(&[sensitive, arms - sensitive], 0)
    }

    pub fn arms(&self) -> usize {
        self.assignment.len()
    }

    pub fn groups(&self) -> usize {
        self.members.len()
    }

    pub fn group_of(&self, arm: usize) -> usize {
        self.assignment[arm]
    }

    pub fn members(&self, group: usize) -> &[usize] {
        &self.members[group]
    }

    pub fn size(&self, group: usize) -> usize {
        self.members[group].len()
    }

    pub fn sensitive_group(&self) -> usize {
        self.sensitive
    }

    pub fn is_sensitive(&self, arm: usize) -> bool {
        self.assignment[arm] == self.sensitive
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}
