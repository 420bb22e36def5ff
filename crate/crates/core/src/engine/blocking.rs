//! Minimum blocking pairs by iterative deepening over deleted pairs.
//!
//! If `M` is stable in `I - S` then every blocking pair of `M` in `I` lies in
//! `S`; conversely deleting the blocking pairs of any matching leaves it
//! stable. So the minimum number of blocking pairs is the smallest `|S|` for
//! which `I - S` admits a stable matching, and that matching attains it.
//!
//! Candidates are pruned with the phase-1 table: a pair outside the table of
//! `I - S'` can be deleted without changing solvability, so the last pair of
//! a minimal `S` always lies in the table of the instance without it.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::{SearchConfig, SearchStats, SolveOutcome, Status};
use crate::analysis;
use crate::model::{AgentId, Instance, Matching};
use crate::oracle::irving;

struct Deepening<'a> {
    inst: &'a Instance,
    edges: Vec<(AgentId, AgentId)>,
    cfg: &'a SearchConfig,
    nodes: AtomicU64,
    stopped: AtomicBool,
}

impl Deepening<'_> {
    fn reduced(&self, deleted: &[usize]) -> Instance {
        let pairs: Vec<_> = deleted.iter().map(|&i| self.edges[i]).collect();
        self.inst.without_pairs(&pairs)
    }

    /// Indices of edges still present in the phase-1 table of `inst`.
    fn table_edges(&self, inst: &Instance) -> Vec<usize> {
        let table = irving::phase_one_table(inst);
        let mut out: Vec<usize> = Vec::new();
        for (a, list) in table.iter().enumerate() {
            for b in list {
                if b.0 > a {
                    let e = (AgentId(a), *b);
                    out.push(self.edges.binary_search(&e).expect("table pairs are edges"));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn tick(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.cfg.node_limit || (n.is_multiple_of(256) && self.cfg.out_of_time()) {
            self.stopped.store(true, Ordering::Relaxed);
        }
        !self.stopped.load(Ordering::Relaxed)
    }

    /// Extends `deleted` by `left` more pairs with indices above the last one.
    /// Returns the first solvable extension in lexicographic order.
    fn extend(&self, deleted: &mut Vec<usize>, left: usize) -> Option<(Vec<usize>, Matching)> {
        let inst = self.reduced(deleted);
        if left == 0 {
            if !self.tick() {
                return None;
            }
            return irving::stable_matching(&inst).map(|m| (deleted.clone(), m));
        }
        let floor = deleted.last().map_or(0, |&i| i + 1);
        let candidates: Vec<usize> = if left == 1 {
            self.table_edges(&inst).into_iter().filter(|&i| i >= floor).collect()
        } else {
            (floor..self.edges.len()).collect()
        };
        for i in candidates {
            if self.stopped.load(Ordering::Relaxed) {
                return None;
            }
            deleted.push(i);
            let found = self.extend(deleted, left - 1);
            deleted.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn level(&self, k: usize) -> Option<(Vec<usize>, Matching)> {
        if k == 1 {
            return self.extend(&mut Vec::new(), 1);
        }
        (0..self.edges.len()).into_par_iter().find_map_first(|i| {
            let mut deleted = vec![i];
            self.extend(&mut deleted, k - 1)
        })
    }
}

pub(super) fn solve_by_pair_deletion(inst: &Instance, cfg: &SearchConfig) -> SolveOutcome {
    let started = Instant::now();
    let search = Deepening {
        inst,
        edges: inst.edges(),
        cfg,
        nodes: AtomicU64::new(1),
        stopped: AtomicBool::new(false),
    };
    let mut found = irving::stable_matching(inst);
    let mut k = 0;
    while found.is_none() && k < search.edges.len() {
        k += 1;
        found = search.level(k).map(|(_, m)| m);
        if search.stopped.load(Ordering::Relaxed) {
            break;
        }
    }
    let stats = SearchStats {
        nodes: search.nodes.load(Ordering::Relaxed),
        backtracks: 0,
        millis: started.elapsed().as_millis() as u64,
    };
    match found {
        Some(m) if !search.stopped.load(Ordering::Relaxed) => {
            let value = analysis::blocking_count(inst, &m) as i64;
            debug_assert_eq!(value as usize, k);
            SolveOutcome {
                status: Status::Optimal,
                matching: Some(m),
                objective_value: Some(value),
                stats,
            }
        }
        _ => SolveOutcome {
            status: Status::BudgetExceeded,
            matching: None,
            objective_value: None,
            stats,
        },
    }
}
