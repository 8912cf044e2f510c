use std::ops::RangeInclusive;

use crate::error::{Error, Result};

/// A set S ⊆ [n − 1] of adjacent-transposition positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    n: usize,
    members: Vec<usize>,
    components: Vec<RangeInclusive<usize>>,
}

impl IndexSet {
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&i| i == 0 || i >= n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                max: n.saturating_sub(1),
            });
        }
        let mut components: Vec<RangeInclusive<usize>> = Vec::new();
        for &i in &members {
            match components.last_mut() {
                Some(c) if *c.end() + 1 == i => *c = *c.start()..=i,
                _ => components.push(i..=i),
            }
        }
        Ok(Self {
            n,
            members,
            components,
        })
    }

    /// Contiguous run `start..=end` (1-based, inclusive).
    pub fn interval(n: usize, start: usize, end: usize) -> Result<Self> {
        Self::new(n, start..=end)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }

    /// Maximal runs of consecutive members.
    pub fn components(&self) -> &[RangeInclusive<usize>] {
        &self.components
    }

    /// S̄ = {k ∈ [n] : k ∈ S or k − 1 ∈ S}.
    pub fn associated_indices(&self) -> Vec<usize> {
        self.components
            .iter()
            .flat_map(|c| *c.start()..=*c.end() + 1)
            .collect()
    }

    /// Sizes of the symmetric-group factors of the parabolic subgroup.
    pub fn factor_sizes(&self) -> Vec<usize> {
        self.components
            .iter()
            .map(|c| c.end() - c.start() + 2)
            .collect()
    }

    /// True when |i − j| > 1 for every i ∈ self, j ∈ other.
    pub fn is_separated_from(&self, other: &Self) -> bool {
        self.members
            .iter()
            .all(|&i| other.members.iter().all(|&j| i.abs_diff(j) > 1))
    }
}
