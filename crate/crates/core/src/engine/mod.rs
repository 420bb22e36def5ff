//! Branch-and-bound search over per-agent rank variables.
//!
//! A [`SearchProblem`] is an instance plus side constraints (forced pairs,
//! per-agent rank caps), a mode (strict stability or relaxed with blocking
//! slack) and an [`Objective`]. [`solve`] returns an optimal matching or a
//! proof that none exists.
//!
//! In strict mode the matched set `A*` is computed up front and fixed, and
//! pairs deleted by phase 1 of the two-phase algorithm are removed from the
//! domains; neither step loses a stable matching.

mod blocking;
mod domains;
mod search;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::analysis::{self, MatchedSet};
use crate::model::{AgentId, Instance, Matching};
use crate::oracle::irving;

use domains::{Domains, Layout, Propagator};

/// Default node budget per solve.
pub const DEFAULT_NODE_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectiveKind {
    Feasibility,
    MinimizeCost,
    /// Maximize the number of agents matched to their `r`-th choice.
    MaximizeLevel(u32),
    /// Minimize the number of agents matched to their `r`-th choice.
    MinimizeLevel(u32),
    /// Minimize `sum weights[a][rank - 1]` over matched agents.
    MinimizeWeighted(Vec<Vec<i64>>),
    MinimizeBlocking,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    /// `level -> minimum count`, used by the rank-maximal loop.
    pub profile_floor: BTreeMap<u32, u32>,
    /// `level -> maximum count`, used by the generous loop.
    pub profile_ceiling: BTreeMap<u32, u32>,
}

impl Objective {
    pub fn new(kind: ObjectiveKind) -> Self {
        Self {
            kind,
            profile_floor: BTreeMap::new(),
            profile_ceiling: BTreeMap::new(),
        }
    }
}

impl From<ObjectiveKind> for Objective {
    fn from(kind: ObjectiveKind) -> Self {
        Self::new(kind)
    }
}

#[derive(Debug, Clone)]
pub struct SearchProblem<'a> {
    pub instance: &'a Instance,
    /// Pairs that must be in the matching.
    pub forced_pairs: Vec<(AgentId, AgentId)>,
    /// Per-agent maximum partner rank; `None` leaves the agent free. A cap
    /// below `list_len + 1` also forbids staying unmatched.
    pub rank_cap: Vec<Option<u32>>,
    /// Accept any matching and count blocking pairs instead.
    pub relax_stability: bool,
    pub objective: Objective,
}

impl<'a> SearchProblem<'a> {
    pub fn new(instance: &'a Instance, objective: impl Into<Objective>) -> Self {
        Self {
            instance,
            forced_pairs: Vec::new(),
            rank_cap: vec![None; instance.n()],
            relax_stability: false,
            objective: objective.into(),
        }
    }

    pub fn relaxed(mut self) -> Self {
        self.relax_stability = true;
        self
    }

    pub fn with_forced(mut self, pairs: Vec<(AgentId, AgentId)>) -> Self {
        self.forced_pairs = pairs;
        self
    }

    pub fn with_caps(mut self, caps: Vec<Option<u32>>) -> Self {
        self.rank_cap = caps;
        self
    }

    /// The rank that encodes "unmatched" for `a`.
    pub fn self_rank(&self, a: AgentId) -> u32 {
        self.instance.list_len(a) as u32 + 1
    }
}

/// Order in which values of the branching variable are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueOrder {
    /// Worst-first when minimizing a profile level, best-first otherwise.
    #[default]
    Auto,
    BestFirst,
    WorstFirst,
}

/// How minimize-blocking problems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockingStrategy {
    /// Find the fewest acceptable pairs whose deletion leaves a solvable
    /// instance; a stable matching of the reduced instance blocks exactly on
    /// deleted pairs. Falls back to `Search` when side constraints are set.
    #[default]
    PairDeletion,
    /// Branch and bound over all matchings with blocking-pair counting.
    Search,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub node_limit: u64,
    pub deadline: Option<Instant>,
    pub value_order: ValueOrder,
    pub blocking: BlockingStrategy,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            node_limit: DEFAULT_NODE_LIMIT,
            deadline: None,
            value_order: ValueOrder::Auto,
            blocking: BlockingStrategy::PairDeletion,
        }
    }
}

impl SearchConfig {
    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.deadline = Some(Instant::now() + limit);
        self
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Unsat,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub millis: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, other: &SearchStats) {
        self.nodes += other.nodes;
        self.backtracks += other.backtracks;
        self.millis += other.millis;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: Status,
    /// The optimum, or the best incumbent when the budget ran out.
    pub matching: Option<Matching>,
    pub objective_value: Option<i64>,
    pub stats: SearchStats,
}

impl SolveOutcome {
    fn unsat(stats: SearchStats) -> Self {
        Self {
            status: Status::Unsat,
            matching: None,
            objective_value: None,
            stats,
        }
    }
}

/// Value of `kind` for a complete matching.
pub fn objective_value(inst: &Instance, kind: &ObjectiveKind, m: &Matching) -> i64 {
    let ranks = || {
        inst.agents()
            .filter_map(|a| m.partner(a).map(|b| (a, inst.rank_of(a, b).expect("acceptable"))))
    };
    match kind {
        ObjectiveKind::Feasibility => 0,
        ObjectiveKind::MinimizeCost => ranks().map(|(_, r)| r as i64).sum(),
        ObjectiveKind::MaximizeLevel(l) | ObjectiveKind::MinimizeLevel(l) => {
            ranks().filter(|&(_, r)| r == *l).count() as i64
        }
        ObjectiveKind::MinimizeWeighted(w) => ranks().map(|(a, r)| w[a.0][r as usize - 1]).sum(),
        ObjectiveKind::MinimizeBlocking => analysis::blocking_count(inst, m) as i64,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    UnacceptableForcedPair(AgentId, AgentId),
    OverlappingForcedPairs(AgentId),
    ForcedPairAboveCap { agent: AgentId, partner: AgentId, rank: u32, cap: u32 },
    InvalidCap { agent: AgentId, cap: u32 },
    CapLengthMismatch { expected: usize, found: usize },
    ProfileObjectiveInRelaxedMode,
    /// Propagation alone empties this agent's domain.
    DomainWipeout(AgentId),
}

fn structural_diagnostics(p: &SearchProblem<'_>) -> Vec<Diagnostic> {
    let inst = p.instance;
    let mut out = Vec::new();
    if p.rank_cap.len() != inst.n() {
        out.push(Diagnostic::CapLengthMismatch {
            expected: inst.n(),
            found: p.rank_cap.len(),
        });
        return out;
    }
    for (a, cap) in p.rank_cap.iter().enumerate() {
        if let Some(c) = *cap {
            if c == 0 || c > p.self_rank(AgentId(a)) {
                out.push(Diagnostic::InvalidCap { agent: AgentId(a), cap: c });
            }
        }
    }
    let mut seen = vec![None; inst.n()];
    for &(a, b) in &p.forced_pairs {
        if a.0 >= inst.n() || b.0 >= inst.n() || !inst.is_acceptable(a, b) {
            out.push(Diagnostic::UnacceptableForcedPair(a, b));
            continue;
        }
        for (x, y) in [(a, b), (b, a)] {
            match seen[x.0] {
                Some(z) if z != y => out.push(Diagnostic::OverlappingForcedPairs(x)),
                _ => seen[x.0] = Some(y),
            }
            let r = inst.rank_of(x, y).expect("checked above");
            if let Some(cap) = p.rank_cap[x.0] {
                if r > cap {
                    out.push(Diagnostic::ForcedPairAboveCap {
                        agent: x,
                        partner: y,
                        rank: r,
                        cap,
                    });
                }
            }
        }
    }
    if p.relax_stability
        && matches!(
            p.objective.kind,
            ObjectiveKind::MaximizeLevel(_) | ObjectiveKind::MinimizeLevel(_)
        )
    {
        out.push(Diagnostic::ProfileObjectiveInRelaxedMode);
    }
    out
}

/// Applies forced pairs and caps to fresh domains.
fn restrict(prop: &mut Propagator<'_>, d: &mut Domains, p: &SearchProblem<'_>) -> Result<(), domains::Wipeout> {
    for (a, cap) in p.rank_cap.iter().enumerate() {
        if let Some(c) = *cap {
            prop.cap(d, a, c)?;
        }
    }
    for &(a, b) in &p.forced_pairs {
        let ra = p.instance.rank_of(a, b).expect("forced pairs are acceptable");
        prop.fix(d, a.0, ra)?;
    }
    Ok(())
}

/// Contradictions visible without search: malformed side constraints, or
/// root propagation emptying a domain. Does not use the matched set.
pub fn check_consistency(p: &SearchProblem<'_>) -> Vec<Diagnostic> {
    let mut out = structural_diagnostics(p);
    if !out.is_empty() {
        return out;
    }
    let layout = Layout::new(p.instance);
    let mut d = Domains::full(&layout);
    let mut prop = Propagator::new(p.instance, &layout, !p.relax_stability);
    let mut result = restrict(&mut prop, &mut d, p);
    if result.is_ok() {
        prop.seed_root(&d);
        result = prop.propagate(&mut d);
    }
    if let Err(w) = result {
        out.push(Diagnostic::DomainWipeout(AgentId(w.0)));
    }
    out
}

/// Solves `p` to optimality, or reports unsat / budget exhaustion.
pub fn solve(p: &SearchProblem<'_>, cfg: &SearchConfig) -> SolveOutcome {
    let start = Instant::now();
    let finish = |mut out: SolveOutcome| {
        out.stats.millis = start.elapsed().as_millis() as u64;
        out
    };
    let diags = structural_diagnostics(p);
    if !diags.is_empty() {
        return finish(SolveOutcome::unsat(SearchStats::default()));
    }
    let inst = p.instance;

    if p.relax_stability
        && p.objective.kind == ObjectiveKind::MinimizeBlocking
        && cfg.blocking == BlockingStrategy::PairDeletion
        && p.forced_pairs.is_empty()
        && p.rank_cap.iter().all(Option::is_none)
    {
        return finish(blocking::solve_by_pair_deletion(inst, cfg));
    }

    let layout = Layout::new(inst);
    let mut d = Domains::full(&layout);
    let mut prop = Propagator::new(inst, &layout, !p.relax_stability);

    if !p.relax_stability {
        let Some(stable) = irving::stable_matching(inst) else {
            return finish(SolveOutcome::unsat(SearchStats::default()));
        };
        let a_star = MatchedSet::from_matching(&stable);
        if restrict_to_stable_region(&mut prop, &mut d, inst, &a_star).is_err() {
            return finish(SolveOutcome::unsat(SearchStats::default()));
        }
    }
    if restrict(&mut prop, &mut d, p).is_err() {
        return finish(SolveOutcome::unsat(SearchStats::default()));
    }
    prop.seed_root(&d);
    if prop.propagate(&mut d).is_err() {
        return finish(SolveOutcome::unsat(SearchStats::default()));
    }
    finish(search::branch_and_bound(p, cfg, &layout, prop, d))
}

/// Fixes agents outside `A*` as unmatched, forbids agents in `A*` from being
/// unmatched, and drops pairs deleted in phase 1.
fn restrict_to_stable_region(
    prop: &mut Propagator<'_>,
    d: &mut Domains,
    inst: &Instance,
    a_star: &MatchedSet,
) -> Result<(), domains::Wipeout> {
    let table = irving::phase_one_table(inst);
    for a in inst.agents() {
        let self_rank = inst.list_len(a) as u32 + 1;
        if !a_star.contains(a) {
            prop.fix(d, a.0, self_rank)?;
            continue;
        }
        prop.remove(d, a.0, self_rank)?;
        let mut keep = vec![false; self_rank as usize];
        for b in &table[a.0] {
            keep[inst.rank_of(a, *b).expect("acceptable") as usize - 1] = true;
        }
        for (i, k) in keep.iter().enumerate() {
            if !k {
                prop.remove(d, a.0, i as u32 + 1)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
