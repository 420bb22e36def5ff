//! Measurements over an (instance, matching) pair.

use std::cmp::Ordering;

use serde::Serialize;

use crate::model::{AgentId, Instance, Matching};
use crate::oracle::irving;

/// Whether `a` would rather be with `b` than with its partner in `m`
/// (unmatched agents prefer anyone acceptable).
#[inline]
pub fn prefers(inst: &Instance, m: &Matching, a: AgentId, b: AgentId) -> bool {
    let Some(r) = inst.rank_of(a, b) else {
        return false;
    };
    match m.partner(a) {
        None => true,
        Some(p) => r < inst.rank_of(a, p).expect("matched pairs are acceptable"),
    }
}

/// Unordered blocking pairs `(a, b)` with `a < b`, sorted.
pub fn blocking_pairs(inst: &Instance, m: &Matching) -> Vec<(AgentId, AgentId)> {
    inst.edges()
        .into_iter()
        .filter(|&(a, b)| prefers(inst, m, a, b) && prefers(inst, m, b, a))
        .collect()
}

pub fn blocking_count(inst: &Instance, m: &Matching) -> usize {
    inst.edges()
        .into_iter()
        .filter(|&(a, b)| prefers(inst, m, a, b) && prefers(inst, m, b, a))
        .count()
}

pub fn is_stable(inst: &Instance, m: &Matching) -> bool {
    inst.edges()
        .into_iter()
        .all(|(a, b)| !(prefers(inst, m, a, b) && prefers(inst, m, b, a)))
}

/// `A*`: the agents matched in every stable matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchedSet {
    members: Vec<bool>,
}

impl MatchedSet {
    pub fn from_matching(m: &Matching) -> Self {
        Self {
            members: (0..m.n()).map(|a| m.is_matched(AgentId(a))).collect(),
        }
    }

    #[inline]
    pub fn contains(&self, a: AgentId) -> bool {
        self.members[a.0]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&x| x).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn agents(&self) -> Vec<AgentId> {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(a, _)| AgentId(a))
            .collect()
    }
}

/// Returns `None` when the instance has no stable matching. The matched set
/// is the same for every stable matching, so one run of the two-phase
/// algorithm determines it.
pub fn matched_set(inst: &Instance) -> Option<MatchedSet> {
    irving::stable_matching(inst).map(|m| MatchedSet::from_matching(&m))
}

/// Which matched agents a profile counts.
#[derive(Debug, Clone, Copy)]
pub enum ProfileScope<'a> {
    /// Every matched agent; used for unstable matchings.
    AllMatched,
    /// Only members of `A*`.
    Within(&'a MatchedSet),
}

/// Per-rank counts: `counts[k - 1]` agents got their `k`-th choice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Profile {
    pub counts: Vec<u32>,
}

impl Profile {
    pub fn zeros(len: usize) -> Self {
        Self {
            counts: vec![0; len],
        }
    }

    /// Count at 1-based `rank`, 0 beyond the stored length.
    pub fn level(&self, rank: usize) -> u32 {
        rank.checked_sub(1)
            .and_then(|i| self.counts.get(i).copied())
            .unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn cost(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u64 + 1) * c as u64)
            .sum()
    }

    pub fn regret(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).map_or(0, |i| i + 1)
    }

    /// Lexicographic order on `counts[1..L]`; greater is better for
    /// rank-maximality.
    pub fn cmp_forward(&self, other: &Self) -> Ordering {
        let len = self.counts.len().max(other.counts.len());
        (1..=len)
            .map(|k| self.level(k).cmp(&other.level(k)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    /// Lexicographic order on `counts[L..1]`; smaller is more generous.
    pub fn cmp_reverse(&self, other: &Self) -> Ordering {
        let len = self.counts.len().max(other.counts.len());
        (1..=len)
            .rev()
            .map(|k| self.level(k).cmp(&other.level(k)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

/// Profile of length `L` over the agents selected by `scope`.
pub fn profile(inst: &Instance, m: &Matching, scope: ProfileScope<'_>) -> Profile {
    let mut p = Profile::zeros(inst.max_list_len());
    for a in inst.agents() {
        if let ProfileScope::Within(set) = scope {
            if !set.contains(a) {
                continue;
            }
        }
        if let Some(b) = m.partner(a) {
            let r = inst.rank_of(a, b).expect("matched pairs are acceptable");
            p.counts[r as usize - 1] += 1;
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostSummary {
    pub cost: u64,
    pub regret: u32,
    pub blocking_count: usize,
}

/// Cost and regret over the matched agents (for a stable matching these are
/// exactly the members of `A*`), plus the number of blocking pairs.
pub fn cost_summary(inst: &Instance, m: &Matching) -> CostSummary {
    let mut cost = 0u64;
    let mut regret = 0u32;
    for a in inst.agents() {
        if let Some(b) = m.partner(a) {
            let r = inst.rank_of(a, b).expect("matched pairs are acceptable");
            cost += r as u64;
            regret = regret.max(r);
        }
    }
    CostSummary {
        cost,
        regret,
        blocking_count: blocking_count(inst, m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn no_stable_four_blocking_pairs() {
        let inst = fixtures::no_stable_four();
        let m = Matching::from_one_based(4, &[(1, 2), (3, 4)]);
        assert_eq!(blocking_pairs(&inst, &m), vec![(AgentId(1), AgentId(2))]);
        let m = Matching::from_one_based(4, &[(1, 3), (2, 4)]);
        assert_eq!(blocking_pairs(&inst, &m), vec![(AgentId(0), AgentId(1))]);
        let m = Matching::from_one_based(4, &[(2, 3), (1, 4)]);
        assert_eq!(blocking_pairs(&inst, &m), vec![(AgentId(0), AgentId(2))]);
        assert_eq!(blocking_pairs(&inst, &Matching::empty(4)).len(), 6);
    }

    #[test]
    fn seven_stable_profiles_and_costs() {
        let inst = fixtures::seven_stable();
        let set = matched_set(&inst).unwrap();
        assert_eq!(set.len(), 10);
        let r = fixtures::seven_stable_matchings();
        assert_eq!(
            profile(&inst, &r[0], ProfileScope::Within(&set)).counts,
            vec![2, 1, 0, 1, 4, 1, 1, 0, 0]
        );
        assert_eq!(
            profile(&inst, &r[6], ProfileScope::Within(&set)).counts,
            vec![0, 2, 4, 2, 0, 0, 1, 1, 0]
        );
        assert_eq!(cost_summary(&inst, &r[2]).cost, 38);
        assert_eq!(cost_summary(&inst, &r[1]).cost, 43);
        assert_eq!(cost_summary(&inst, &r[3]).regret, 6);
        assert_eq!(profile(&inst, &Matching::empty(10), ProfileScope::AllMatched).total(), 0);
    }

    #[test]
    fn matched_set_edge_cases() {
        assert!(matched_set(&fixtures::no_stable_four()).is_none());
        let single = Instance::new(vec![vec![]]).unwrap();
        assert!(matched_set(&single).unwrap().is_empty());
    }

    #[test]
    fn profile_orders() {
        let a = Profile { counts: vec![2, 1, 1, 2] };
        let b = Profile { counts: vec![2, 1, 0, 3] };
        assert_eq!(a.cmp_forward(&b), Ordering::Greater);
        assert_eq!(a.cmp_reverse(&b), Ordering::Less);
        assert_eq!(a.regret(), 4);
        assert_eq!(a.cost(), 2 + 2 + 3 + 8);
        assert_eq!(Profile::zeros(3).regret(), 0);
    }

    #[test]
    fn empty_matching_summary() {
        let s = cost_summary(&fixtures::no_stable_four(), &Matching::empty(4));
        assert_eq!((s.cost, s.regret, s.blocking_count), (0, 0, 6));
    }
}
