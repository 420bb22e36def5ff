//! Ground truth for desk-scale instances.
//!
//! The enumerators here share no code with the search engine: they backtrack
//! directly over acceptable pairs and check blocking pairs between decided
//! agents, so they can be used to cross-check it.

pub mod irving;

use thiserror::Error;

use crate::model::{AgentId, Instance, Matching};

/// Default node budget for the enumerators.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
}

/// Every stable matching of an instance, sorted by pair list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSet {
    pub matchings: Vec<Matching>,
}

impl StableSet {
    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }
}

/// True iff the instance admits a stable matching.
pub fn exists_stable(inst: &Instance) -> bool {
    irving::stable_matching(inst).is_some()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Open,
    Single,
    With(AgentId),
}

struct Walker<'a> {
    inst: &'a Instance,
    slots: Vec<Slot>,
    nodes: u64,
    budget: u64,
}

impl<'a> Walker<'a> {
    fn new(inst: &'a Instance, budget: u64) -> Self {
        Self {
            inst,
            slots: vec![Slot::Open; inst.n()],
            nodes: 0,
            budget,
        }
    }

    fn tick(&mut self) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn matching(&self) -> Matching {
        let pairs = self.slots.iter().enumerate().filter_map(|(a, s)| match s {
            Slot::With(b) if b.0 > a => Some((AgentId(a), *b)),
            _ => None,
        });
        Matching::from_pairs(self.slots.len(), pairs).expect("walker keeps slots consistent")
    }

    /// Does decided `x` prefer decided `y` to its own outcome?
    fn wants(&self, x: AgentId, y: AgentId) -> bool {
        let Some(r) = self.inst.rank_of(x, y) else {
            return false;
        };
        match self.slots[x.0] {
            Slot::Open => false,
            Slot::Single => true,
            Slot::With(p) => r < self.inst.rank_of(x, p).expect("acceptable"),
        }
    }

    /// Number of blocking pairs between `x` and already decided agents.
    fn new_blocks(&self, x: AgentId, skip: Option<AgentId>) -> usize {
        self.inst
            .prefs(x)
            .iter()
            .filter(|&&y| Some(y) != skip && self.slots[y.0] != Slot::Open)
            .filter(|&&y| self.wants(x, y) && self.wants(y, x))
            .count()
    }

    fn options(&self, a: AgentId) -> Vec<Slot> {
        let mut opts: Vec<Slot> = self
            .inst
            .prefs(a)
            .iter()
            .filter(|b| self.slots[b.0] == Slot::Open)
            .map(|&b| Slot::With(b))
            .collect();
        opts.push(Slot::Single);
        opts
    }

    fn set(&mut self, a: AgentId, s: Slot) {
        self.slots[a.0] = s;
        if let Slot::With(b) = s {
            self.slots[b.0] = Slot::With(a);
        }
    }

    fn clear(&mut self, a: AgentId, s: Slot) {
        self.slots[a.0] = Slot::Open;
        if let Slot::With(b) = s {
            self.slots[b.0] = Slot::Open;
        }
    }

    /// Blocking pairs created by deciding `a` (and its partner, if any).
    fn blocks_after(&self, a: AgentId, s: Slot) -> usize {
        let mut count = self.new_blocks(a, None);
        if let Slot::With(b) = s {
            count += self.new_blocks(b, Some(a));
        }
        count
    }

    fn stable_rec(&mut self, from: usize, out: &mut Vec<Matching>) -> Result<(), OracleError> {
        self.tick()?;
        let Some(a) = (from..self.slots.len()).find(|&a| self.slots[a] == Slot::Open) else {
            out.push(self.matching());
            return Ok(());
        };
        let a = AgentId(a);
        for s in self.options(a) {
            self.set(a, s);
            if self.blocks_after(a, s) == 0 {
                self.stable_rec(a.0 + 1, out)?;
            }
            self.clear(a, s);
        }
        Ok(())
    }

    fn min_blocking_rec(
        &mut self,
        from: usize,
        blocks: usize,
        best: &mut (usize, Option<Matching>),
    ) -> Result<(), OracleError> {
        self.tick()?;
        let Some(a) = (from..self.slots.len()).find(|&a| self.slots[a] == Slot::Open) else {
            if best.1.is_none() || blocks < best.0 {
                *best = (blocks, Some(self.matching()));
            }
            return Ok(());
        };
        let a = AgentId(a);
        for s in self.options(a) {
            self.set(a, s);
            let total = blocks + self.blocks_after(a, s);
            if best.1.is_none() || total < best.0 {
                self.min_blocking_rec(a.0 + 1, total, best)?;
            }
            self.clear(a, s);
        }
        Ok(())
    }
}

/// All stable matchings, by backtracking over acceptable pairs and pruning
/// as soon as two decided agents block.
pub fn enumerate_stable(inst: &Instance) -> Result<StableSet, OracleError> {
    enumerate_stable_with_budget(inst, DEFAULT_NODE_BUDGET)
}

pub fn enumerate_stable_with_budget(inst: &Instance, budget: u64) -> Result<StableSet, OracleError> {
    let mut walker = Walker::new(inst, budget);
    let mut out = Vec::new();
    walker.stable_rec(0, &mut out)?;
    out.sort_by_key(Matching::pairs);
    out.dedup();
    Ok(StableSet { matchings: out })
}

/// A matching with the fewest blocking pairs over all matchings, found by
/// exhaustive search. Exponential; meant for about a dozen agents.
pub fn min_blocking_over_all_matchings(inst: &Instance) -> Result<(Matching, usize), OracleError> {
    min_blocking_with_budget(inst, DEFAULT_NODE_BUDGET)
}

pub fn min_blocking_with_budget(
    inst: &Instance,
    budget: u64,
) -> Result<(Matching, usize), OracleError> {
    let mut walker = Walker::new(inst, budget);
    let mut best = (usize::MAX, None);
    walker.min_blocking_rec(0, 0, &mut best)?;
    let (count, m) = best;
    Ok((m.expect("the empty matching is always reachable"), count))
}

/// Every matching of the instance (including the empty one). Exponential.
pub fn all_matchings(inst: &Instance) -> Vec<Matching> {
    fn rec(inst: &Instance, partner: &mut Vec<Option<AgentId>>, from: usize, out: &mut Vec<Matching>) {
        let n = partner.len();
        let Some(a) = (from..n).find(|&a| partner[a].is_none()) else {
            out.push(Matching::from_partner_unchecked(partner.clone()));
            return;
        };
        // leave a single
        rec(inst, partner, a + 1, out);
        for &b in inst.prefs(AgentId(a)) {
            if b.0 > a && partner[b.0].is_none() {
                partner[a] = Some(b);
                partner[b.0] = Some(AgentId(a));
                rec(inst, partner, a + 1, out);
                partner[a] = None;
                partner[b.0] = None;
            }
        }
    }
    let mut out = Vec::new();
    let mut partner = vec![None; inst.n()];
    rec(inst, &mut partner, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{blocking_count, is_stable as naive_stable, matched_set, MatchedSet};
    use crate::fixtures;
    use crate::model::{generate_random, RandomSpec};

    #[test]
    fn seven_stable_has_exactly_seven() {
        let inst = fixtures::seven_stable();
        let set = enumerate_stable(&inst).unwrap();
        let mut expected = fixtures::seven_stable_matchings();
        expected.sort_by_key(Matching::pairs);
        assert_eq!(set.matchings, expected);
    }

    #[test]
    fn no_stable_four_has_none() {
        assert!(enumerate_stable(&fixtures::no_stable_four()).unwrap().is_empty());
        assert!(!exists_stable(&fixtures::no_stable_four()));
    }

    #[test]
    fn mutual_pair() {
        let set = enumerate_stable(&fixtures::mutual_pair()).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.matchings[0].pairs(), vec![(AgentId(0), AgentId(1))]);
        assert!(exists_stable(&fixtures::mutual_pair()));
    }

    #[test]
    fn min_blocking_fixtures() {
        let (m, count) = min_blocking_over_all_matchings(&fixtures::no_stable_four()).unwrap();
        assert_eq!(count, 1);
        assert_eq!(blocking_count(&fixtures::no_stable_four(), &m), 1);
        let (_, count) = min_blocking_over_all_matchings(&fixtures::seven_stable()).unwrap();
        assert_eq!(count, 0);
        let single = Instance::new(vec![vec![]]).unwrap();
        let (m, count) = min_blocking_over_all_matchings(&single).unwrap();
        assert_eq!((m.size(), count), (0, 0));
    }

    #[test]
    fn budget_is_reported() {
        assert_eq!(
            enumerate_stable_with_budget(&fixtures::seven_stable(), 10).unwrap_err(),
            OracleError::BudgetExceeded(10)
        );
    }

    #[test]
    fn all_matchings_of_k4() {
        let inst = fixtures::no_stable_four();
        // 1 empty + 6 single edges + 3 perfect matchings
        assert_eq!(all_matchings(&inst).len(), 10);
    }

    #[test]
    fn randomized_agreement() {
        for p in [0.25, 0.5, 0.75, 1.0] {
            for seed in 0..500 {
                let n = 4 + (seed as usize % 9);
                let inst = generate_random(&RandomSpec::new(n, p, seed).unwrap());
                let set = enumerate_stable(&inst).unwrap();
                assert_eq!(exists_stable(&inst), !set.is_empty(), "n={n} p={p} seed={seed}");
                for m in &set.matchings {
                    assert!(naive_stable(&inst, m));
                }
                // stable set is exactly the stable members of all matchings
                if n <= 8 {
                    let brute: Vec<Matching> = all_matchings(&inst)
                        .into_iter()
                        .filter(|m| naive_stable(&inst, m))
                        .collect();
                    assert_eq!(brute.len(), set.len());
                }
                // matched set invariance
                if let Some(first) = set.matchings.first() {
                    let a_star = MatchedSet::from_matching(first);
                    assert!(set.matchings.iter().all(|m| MatchedSet::from_matching(m) == a_star));
                    assert_eq!(matched_set(&inst).unwrap(), a_star);
                }
                if n <= 10 {
                    let (_, min) = min_blocking_over_all_matchings(&inst).unwrap();
                    assert_eq!(min == 0, !set.is_empty());
                }
            }
        }
    }
}
