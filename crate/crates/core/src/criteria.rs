//! Optimality criteria as sequences of engine solves.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{self, CostSummary, MatchedSet, Profile, ProfileScope};
use crate::engine::{self, Objective, ObjectiveKind, SearchConfig, SearchProblem, SearchStats, SolveOutcome, Status};
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    AnyStable,
    Egalitarian,
    FcMax,
    RankMaximal,
    Generous,
    MinRegret,
    AlmostStable,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::AnyStable,
        Criterion::Egalitarian,
        Criterion::FcMax,
        Criterion::RankMaximal,
        Criterion::Generous,
        Criterion::MinRegret,
        Criterion::AlmostStable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::AnyStable => "any-stable",
            Criterion::Egalitarian => "egalitarian",
            Criterion::FcMax => "fc-max",
            Criterion::RankMaximal => "rank-maximal",
            Criterion::Generous => "generous",
            Criterion::MinRegret => "min-regret",
            Criterion::AlmostStable => "almost-stable",
        }
    }

    /// Whether the optimum is a whole profile rather than a single number.
    pub fn is_lexicographic(self) -> bool {
        matches!(self, Criterion::RankMaximal | Criterion::Generous)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown criterion `{0}`")]
pub struct UnknownCriterion(pub String);

impl FromStr for Criterion {
    type Err = UnknownCriterion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownCriterion(s.to_string()))
    }
}

/// Committed per-level values of a lexicographic loop.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexState {
    /// Level to committed optimum, in commit order.
    pub commits: Vec<(u32, u32)>,
    pub current_level: u32,
}

impl LexState {
    fn commit(&mut self, level: u32, value: u32) {
        self.commits.push((level, value));
    }

    fn bounds(&self) -> BTreeMap<u32, u32> {
        self.commits.iter().copied().collect()
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub criterion: Criterion,
    /// Outcome of the last solve, with stats summed over all solves. For
    /// lexicographic criteria `objective_value` is `None`; see `profile`.
    pub outcome: SolveOutcome,
    /// Over `A*` for stable criteria, over all matched agents otherwise.
    pub profile: Option<Profile>,
    pub summary: Option<CostSummary>,
    pub trace: Vec<(u32, u32)>,
}

impl CriterionResult {
    pub fn status(&self) -> Status {
        self.outcome.status
    }

    /// The optimum as text: a number, or the profile for lexicographic
    /// criteria (`;`-separated).
    pub fn objective_text(&self) -> String {
        if self.outcome.status != Status::Optimal {
            return String::new();
        }
        if self.criterion.is_lexicographic() {
            let p = self.profile.as_ref().expect("optimal results carry a profile");
            return p.counts.iter().map(u32::to_string).collect::<Vec<_>>().join(";");
        }
        self.outcome.objective_value.map(|v| v.to_string()).unwrap_or_default()
    }
}

struct Driver<'a> {
    inst: &'a Instance,
    cfg: &'a SearchConfig,
    stats: SearchStats,
}

impl<'a> Driver<'a> {
    fn run(&mut self, p: &SearchProblem<'_>) -> SolveOutcome {
        let out = engine::solve(p, self.cfg);
        self.stats.absorb(&out.stats);
        out
    }

    fn single(&mut self, kind: ObjectiveKind) -> SolveOutcome {
        self.run(&SearchProblem::new(self.inst, kind))
    }

    fn rank_maximal(&mut self, lex: &mut LexState) -> SolveOutcome {
        let levels = self.inst.max_list_len() as u32;
        let mut last = self.single(ObjectiveKind::Feasibility);
        for level in 1..=levels {
            if last.status != Status::Optimal {
                break;
            }
            lex.current_level = level;
            let mut objective = Objective::new(ObjectiveKind::MaximizeLevel(level));
            objective.profile_floor = lex.bounds();
            last = self.run(&SearchProblem::new(self.inst, objective));
            if let Some(v) = last.objective_value {
                if last.status == Status::Optimal {
                    lex.commit(level, v as u32);
                }
            }
        }
        last
    }

    fn generous(&mut self, lex: &mut LexState) -> SolveOutcome {
        let levels = self.inst.max_list_len() as u32;
        let mut last = self.single(ObjectiveKind::Feasibility);
        for level in (2..=levels).rev() {
            if last.status != Status::Optimal {
                break;
            }
            lex.current_level = level;
            let mut objective = Objective::new(ObjectiveKind::MinimizeLevel(level));
            objective.profile_ceiling = lex.bounds();
            last = self.run(&SearchProblem::new(self.inst, objective));
            if let Some(v) = last.objective_value {
                if last.status == Status::Optimal {
                    lex.commit(level, v as u32);
                }
            }
        }
        last
    }

    fn min_regret(&mut self, a_star: Option<&MatchedSet>) -> SolveOutcome {
        let Some(a_star) = a_star else {
            return self.single(ObjectiveKind::Feasibility);
        };
        if a_star.is_empty() {
            let mut out = self.single(ObjectiveKind::Feasibility);
            out.objective_value = out.matching.as_ref().map(|_| 0);
            return out;
        }
        let mut last = None;
        for cap in 1..=self.inst.max_list_len() as u32 {
            let caps = self
                .inst
                .agents()
                .map(|a| a_star.contains(a).then(|| cap.min(self.inst.list_len(a) as u32)))
                .collect();
            let p = SearchProblem::new(self.inst, ObjectiveKind::Feasibility).with_caps(caps);
            let mut out = self.run(&p);
            match out.status {
                Status::Unsat => last = Some(out),
                Status::BudgetExceeded => return out,
                Status::Optimal => {
                    out.objective_value = Some(cap as i64);
                    return out;
                }
            }
        }
        last.expect("a stable matching has regret at most L")
    }
}

/// Solves `inst` under criterion `c`.
pub fn solve_criterion(inst: &Instance, c: Criterion, cfg: &SearchConfig) -> CriterionResult {
    let mut driver = Driver {
        inst,
        cfg,
        stats: SearchStats::default(),
    };
    let a_star = analysis::matched_set(inst);
    let mut lex = LexState::default();
    let mut outcome = match c {
        Criterion::AnyStable => driver.single(ObjectiveKind::Feasibility),
        Criterion::Egalitarian => driver.single(ObjectiveKind::MinimizeCost),
        Criterion::FcMax => driver.single(ObjectiveKind::MaximizeLevel(1)),
        Criterion::RankMaximal => driver.rank_maximal(&mut lex),
        Criterion::Generous => driver.generous(&mut lex),
        Criterion::MinRegret => driver.min_regret(a_star.as_ref()),
        Criterion::AlmostStable => {
            driver.run(&SearchProblem::new(inst, ObjectiveKind::MinimizeBlocking).relaxed())
        }
    };
    outcome.stats = driver.stats;
    if c.is_lexicographic() {
        outcome.objective_value = None;
    }

    let (profile, summary) = match &outcome.matching {
        Some(m) if outcome.status == Status::Optimal => {
            let scope = match (&a_star, c) {
                (Some(set), c) if c != Criterion::AlmostStable => ProfileScope::Within(set),
                _ => ProfileScope::AllMatched,
            };
            let p = analysis::profile(inst, m, scope);
            (Some(p), Some(analysis::cost_summary(inst, m)))
        }
        _ => (None, None),
    };
    if c == Criterion::Generous {
        if let Some(p) = &profile {
            lex.commit(1, p.level(1));
        }
    }
    CriterionResult {
        criterion: c,
        outcome,
        profile,
        summary,
        trace: lex.commits,
    }
}

/// Committed `(level, value)` pairs of the lexicographic loop for `c`, in
/// commit order. Generous commits levels `L..2` and then reports level 1.
pub fn lex_trace(inst: &Instance, c: Criterion, cfg: &SearchConfig) -> Result<Vec<(u32, u32)>, Status> {
    assert!(c.is_lexicographic(), "lex_trace needs rank-maximal or generous");
    let r = solve_criterion(inst, c, cfg);
    match r.status() {
        Status::Optimal => Ok(r.trace),
        s => Err(s),
    }
}
