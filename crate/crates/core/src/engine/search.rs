//! Depth-first branch and bound with copied domains.

use super::domains::{Domains, Layout, Propagator};
use super::{objective_value, ObjectiveKind, SearchConfig, SearchProblem, SearchStats, SolveOutcome, Status, ValueOrder};
use crate::model::{AgentId, Matching};

struct Search<'p, 'a> {
    p: &'p SearchProblem<'a>,
    cfg: &'p SearchConfig,
    layout: &'p Layout,
    prop: Propagator<'p>,
    stats: SearchStats,
    /// Best (minimized) score and its matching.
    best: Option<(i64, Matching)>,
    stopped: bool,
}

/// Objective as a quantity to minimize.
fn score(p: &SearchProblem<'_>, m: &Matching) -> i64 {
    let v = objective_value(p.instance, &p.objective.kind, m);
    match p.objective.kind {
        ObjectiveKind::MaximizeLevel(_) => -v,
        _ => v,
    }
}

impl Search<'_, '_> {
    fn self_rank(&self, a: usize) -> u32 {
        self.layout.self_rank[a]
    }

    /// Optimistic score of any completion of `d`.
    fn bound(&self, d: &Domains) -> i64 {
        let n = self.p.instance.n();
        let in_domain = |a: usize, r: u32| r < self.self_rank(a) && d.contains(self.layout, a, r);
        match &self.p.objective.kind {
            ObjectiveKind::Feasibility => 0,
            ObjectiveKind::MinimizeCost => (0..n)
                .map(|a| {
                    if d.max(a) == self.self_rank(a) {
                        0
                    } else {
                        d.min(a) as i64
                    }
                })
                .sum(),
            ObjectiveKind::MaximizeLevel(r) => -((0..n).filter(|&a| in_domain(a, *r)).count() as i64),
            ObjectiveKind::MinimizeLevel(r) => {
                (0..n).filter(|&a| d.is_fixed(a) && in_domain(a, *r)).count() as i64
            }
            ObjectiveKind::MinimizeWeighted(w) => (0..n)
                .map(|a| {
                    d.values(self.layout, a)
                        .map(|v| if v == self.self_rank(a) { 0 } else { w[a][v as usize - 1] })
                        .min()
                        .unwrap_or(0)
                })
                .sum(),
            ObjectiveKind::MinimizeBlocking => self.definite_blocking(d),
        }
    }

    /// Pairs that block in every completion: both sides are already sure to
    /// end up worse than with each other.
    fn definite_blocking(&self, d: &Domains) -> i64 {
        let inst = self.p.instance;
        let mut count = 0;
        for (a, b) in inst.edges() {
            let ra = inst.rank_of(a, b).expect("edge");
            let rb = inst.rank_of(b, a).expect("edge");
            if d.min(a.0) > ra && d.min(b.0) > rb {
                count += 1;
            }
        }
        count
    }

    /// Floors need enough agents still able to reach the level; ceilings
    /// must not already be exceeded.
    fn profile_ok(&self, d: &Domains) -> bool {
        let n = self.p.instance.n();
        let obj = &self.p.objective;
        obj.profile_floor.iter().all(|(&r, &floor)| {
            let reach = (0..n)
                .filter(|&a| r < self.self_rank(a) && d.contains(self.layout, a, r))
                .count();
            reach as u32 >= floor
        }) && obj.profile_ceiling.iter().all(|(&r, &ceil)| {
            let fixed = (0..n)
                .filter(|&a| r < self.self_rank(a) && d.is_fixed(a) && d.min(a) == r)
                .count();
            fixed as u32 <= ceil
        })
    }

    fn leaf(&self, d: &Domains) -> Matching {
        let inst = self.p.instance;
        let partner = (0..inst.n())
            .map(|a| inst.choice(AgentId(a), d.min(a)))
            .collect();
        Matching::from_partner_unchecked(partner)
    }

    fn tick(&mut self) -> bool {
        self.stats.nodes += 1;
        if self.stats.nodes > self.cfg.node_limit
            || (self.stats.nodes.is_multiple_of(1024) && self.cfg.out_of_time())
        {
            self.stopped = true;
        }
        !self.stopped
    }

    fn dfs(&mut self, d: Domains) {
        if !self.tick() {
            return;
        }
        if !self.profile_ok(&d) {
            self.stats.backtracks += 1;
            return;
        }
        if let Some((best, _)) = &self.best {
            if self.bound(&d) >= *best {
                self.stats.backtracks += 1;
                return;
            }
        }
        let n = self.p.instance.n();
        let Some(a) = (0..n).filter(|&a| !d.is_fixed(a)).min_by_key(|&a| d.size(a)) else {
            let m = self.leaf(&d);
            let s = score(self.p, &m);
            if self.best.as_ref().is_none_or(|(b, _)| s < *b) {
                self.best = Some((s, m));
            }
            if self.p.objective.kind == ObjectiveKind::Feasibility {
                self.stopped = true;
            }
            return;
        };
        let mut values: Vec<u32> = d.values(self.layout, a).collect();
        let worst_first = match self.cfg.value_order {
            ValueOrder::Auto => matches!(self.p.objective.kind, ObjectiveKind::MinimizeLevel(_)),
            order => order == ValueOrder::WorstFirst,
        };
        if worst_first {
            values.reverse();
        }
        for v in values {
            let mut child = d.clone();
            let ok = self.prop.fix(&mut child, a, v).is_ok() && self.prop.propagate(&mut child).is_ok();
            if ok {
                self.dfs(child);
            } else {
                self.stats.backtracks += 1;
            }
            if self.stopped {
                return;
            }
        }
    }
}

pub(super) fn branch_and_bound(
    p: &SearchProblem<'_>,
    cfg: &SearchConfig,
    layout: &Layout,
    prop: Propagator<'_>,
    root: Domains,
) -> SolveOutcome {
    let mut s = Search {
        p,
        cfg,
        layout,
        prop,
        stats: SearchStats::default(),
        best: None,
        stopped: false,
    };
    s.dfs(root);
    let finished = !s.stopped || (p.objective.kind == ObjectiveKind::Feasibility && s.best.is_some());
    let status = match (&s.best, finished) {
        (_, false) => Status::BudgetExceeded,
        (Some(_), true) => Status::Optimal,
        (None, true) => Status::Unsat,
    };
    let (objective_value, matching) = match s.best {
        Some((v, m)) => {
            let v = if matches!(p.objective.kind, ObjectiveKind::MaximizeLevel(_)) { -v } else { v };
            (Some(v), Some(m))
        }
        None => (None, None),
    };
    SolveOutcome {
        status,
        matching,
        objective_value,
        stats: s.stats,
    }
}
