//! Two-phase proposal and rotation-elimination algorithm for SRI.
//!
//! Phase 1 is a sequence of proposals in which every agent that receives a
//! proposal deletes all agents it ranks below the proposer. Agents whose list
//! empties are unmatched in every stable matching. Phase 2 repeatedly exposes
//! and eliminates a rotation until every list has at most one entry; if a list
//! empties during phase 2 the instance has no stable matching.

use crate::model::{AgentId, Instance, Matching};

/// A reduced preference table with symmetric deletions.
struct Table<'a> {
    inst: &'a Instance,
    alive: Vec<Vec<bool>>,
    len: Vec<usize>,
    head: Vec<usize>,
    tail: Vec<usize>,
}

impl<'a> Table<'a> {
    fn new(inst: &'a Instance) -> Self {
        let n = inst.n();
        Self {
            inst,
            alive: (0..n).map(|a| vec![true; inst.list_len(AgentId(a))]).collect(),
            len: (0..n).map(|a| inst.list_len(AgentId(a))).collect(),
            head: vec![0; n],
            tail: (0..n).map(|a| inst.list_len(AgentId(a))).collect(),
        }
    }

    #[inline]
    fn pos(&self, a: usize, b: usize) -> usize {
        self.inst.rank_of(AgentId(a), AgentId(b)).expect("pair in table") as usize - 1
    }

    #[inline]
    fn contains(&self, a: usize, b: usize) -> bool {
        self.inst
            .rank_of(AgentId(a), AgentId(b))
            .is_some_and(|r| self.alive[a][r as usize - 1])
    }

    fn delete(&mut self, a: usize, b: usize) {
        let (pa, pb) = (self.pos(a, b), self.pos(b, a));
        if self.alive[a][pa] {
            self.alive[a][pa] = false;
            self.alive[b][pb] = false;
            self.len[a] -= 1;
            self.len[b] -= 1;
        }
    }

    fn first(&mut self, a: usize) -> Option<usize> {
        let row = &self.alive[a];
        while self.head[a] < row.len() && !row[self.head[a]] {
            self.head[a] += 1;
        }
        self.inst.prefs(AgentId(a)).get(self.head[a]).map(|b| b.0)
    }

    fn second(&mut self, a: usize) -> Option<usize> {
        self.first(a)?;
        let row = &self.alive[a];
        (self.head[a] + 1..row.len())
            .find(|&i| row[i])
            .map(|i| self.inst.prefs(AgentId(a))[i].0)
    }

    fn last(&mut self, a: usize) -> Option<usize> {
        let row = &self.alive[a];
        while self.tail[a] > 0 && !row[self.tail[a] - 1] {
            self.tail[a] -= 1;
        }
        if self.tail[a] == 0 {
            return None;
        }
        Some(self.inst.prefs(AgentId(a))[self.tail[a] - 1].0)
    }

    /// Deletes every pair `{a, c}` with `c` strictly after `b` in `a`'s list.
    /// Returns the agents that lost a pair.
    fn truncate_after(&mut self, a: usize, b: usize) -> Vec<usize> {
        let from = self.pos(a, b) + 1;
        let victims: Vec<usize> = (from..self.alive[a].len())
            .filter(|&i| self.alive[a][i])
            .map(|i| self.inst.prefs(AgentId(a))[i].0)
            .collect();
        for &c in &victims {
            self.delete(a, c);
        }
        victims
    }

    fn lists(&self) -> Vec<Vec<AgentId>> {
        (0..self.inst.n())
            .map(|a| {
                self.inst
                    .prefs(AgentId(a))
                    .iter()
                    .zip(&self.alive[a])
                    .filter(|(_, &alive)| alive)
                    .map(|(&b, _)| b)
                    .collect()
            })
            .collect()
    }
}

fn phase_one(table: &mut Table<'_>) {
    let n = table.inst.n();
    // proposed_to[y] = the agent currently holding y's proposal
    let mut proposed_to: Vec<Option<usize>> = vec![None; n];
    let mut free: Vec<usize> = (0..n).rev().collect();
    while let Some(y) = free.pop() {
        let Some(x) = table.first(y) else {
            continue;
        };
        proposed_to[y] = Some(x);
        for w in table.truncate_after(x, y) {
            if proposed_to[w] == Some(x) {
                proposed_to[w] = None;
                free.push(w);
            }
        }
    }
}

/// The phase-1 table of `inst`: no pair missing from it belongs to any
/// stable matching.
pub fn phase_one_table(inst: &Instance) -> Vec<Vec<AgentId>> {
    let mut table = Table::new(inst);
    phase_one(&mut table);
    table.lists()
}

/// A stable matching of `inst`, or `None` if none exists.
pub fn stable_matching(inst: &Instance) -> Option<Matching> {
    let n = inst.n();
    let mut table = Table::new(inst);
    phase_one(&mut table);
    let unmatched: Vec<bool> = (0..n).map(|a| table.len[a] == 0).collect();

    loop {
        if (0..n).any(|a| table.len[a] == 0 && !unmatched[a]) {
            return None;
        }
        let Some(start) = (0..n).find(|&a| table.len[a] >= 2) else {
            break;
        };
        // Walk p -> last(second(p)) until an agent repeats.
        let mut seen = vec![usize::MAX; n];
        let mut walk = Vec::new();
        let mut p = start;
        while seen[p] == usize::MAX {
            seen[p] = walk.len();
            walk.push(p);
            let q = table.second(p)?;
            p = table.last(q)?;
        }
        let cycle = &walk[seen[p]..];
        let moves: Vec<(usize, usize)> = cycle
            .iter()
            .map(|&x| table.second(x).map(|y| (x, y)))
            .collect::<Option<_>>()?;
        for (x, y) in moves {
            // y accepts x and rejects everyone it ranks below x.
            if table.contains(y, x) {
                table.truncate_after(y, x);
            }
        }
    }

    let mut partner = vec![None; n];
    for (a, slot) in partner.iter_mut().enumerate() {
        if table.len[a] == 1 {
            let b = table.first(a).expect("one entry left");
            if table.first(b) != Some(a) {
                return None;
            }
            *slot = Some(AgentId(b));
        }
    }
    Some(Matching::from_partner_unchecked(partner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::is_stable;
    use crate::fixtures;

    #[test]
    fn no_stable_four_has_no_stable_matching() {
        assert!(stable_matching(&fixtures::no_stable_four()).is_none());
    }

    #[test]
    fn seven_stable_finds_one_of_the_seven() {
        let inst = fixtures::seven_stable();
        let m = stable_matching(&inst).unwrap();
        assert!(is_stable(&inst, &m));
        assert!(fixtures::seven_stable_matchings().contains(&m));
    }

    #[test]
    fn trivial_instances() {
        let m = stable_matching(&fixtures::mutual_pair()).unwrap();
        assert_eq!(m.pairs(), vec![(AgentId(0), AgentId(1))]);
        let lonely = Instance::new(vec![vec![]]).unwrap();
        assert_eq!(stable_matching(&lonely).unwrap().size(), 0);
        let empty = Instance::new(vec![]).unwrap();
        assert!(stable_matching(&empty).is_some());
    }

    #[test]
    fn phase_one_keeps_every_stable_pair() {
        let inst = fixtures::seven_stable();
        let table = phase_one_table(&inst);
        for m in fixtures::seven_stable_matchings() {
            for (a, b) in m.pairs() {
                assert!(table[a.0].contains(&b));
                assert!(table[b.0].contains(&a));
            }
        }
    }
}
