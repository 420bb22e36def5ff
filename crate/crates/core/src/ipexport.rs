//! 0/1 integer programming model of stable matchings, LP-format export, and
//! an exhaustive 0/1 scan for checking the model on small instances.
//!
//! Variables `x_u_v` exist for every ordered acceptable pair (`u` matched to
//! `v`); unacceptable pairs get no variable. Rows:
//!
//! * `cap_v`: `sum_u x_u_v <= 1`;
//! * `stab_u_v`: `u` has someone better than `v`, or `v` has someone better
//!   than `u`, or they are matched (`+ b_u_v` in almost-stable mode);
//! * `sym_u_v`: `x_u_v - x_v_u = 0`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{AgentId, Instance, Matching};
use crate::oracle::{self, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpObjective {
    None,
    /// Minimize the sum of partner ranks.
    Egalitarian,
    /// Maximize first choices.
    FirstChoice,
    MaximizeLevel(u32),
    MinimizeLevel(u32),
    /// Minimize the number of blocking pairs; adds `b_u_v` variables.
    AlmostStable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    /// `u` is matched to `v`.
    X(AgentId, AgentId),
    /// `{u, v}` (with `u < v`) may block.
    B(AgentId, AgentId),
}

impl Var {
    pub fn name(self) -> String {
        match self {
            Var::X(u, v) => format!("x_{u}_{v}"),
            Var::B(u, v) => format!("b_{u}_{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Capacity,
    Stability,
    Symmetry,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    /// `(coefficient, variable index)`.
    pub terms: Vec<(i64, usize)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpModel {
    pub n: usize,
    pub vars: Vec<Var>,
    pub constraints: Vec<Constraint>,
    pub maximize: bool,
    /// `(coefficient, variable index)`; empty for a pure feasibility model.
    pub objective: Vec<(i64, usize)>,
}

impl IpModel {
    /// The same model without one family of rows.
    pub fn without(&self, family: Family) -> IpModel {
        let mut m = self.clone();
        m.constraints.retain(|c| c.family != family);
        m
    }

    pub fn var_index(&self, v: Var) -> Option<usize> {
        self.vars.binary_search(&v).ok()
    }

    /// Objective value of an assignment.
    pub fn objective_value(&self, assignment: &[bool]) -> i64 {
        self.objective
            .iter()
            .filter(|&&(_, i)| assignment[i])
            .map(|&(c, _)| c)
            .sum()
    }

    /// The matching encoded by the `x` part of an assignment.
    pub fn matching_of(&self, assignment: &[bool]) -> Matching {
        let mut partner = vec![None; self.n];
        for (i, v) in self.vars.iter().enumerate() {
            if let (Var::X(u, w), true) = (v, assignment[i]) {
                partner[u.0] = Some(*w);
            }
        }
        Matching::from_partner_unchecked(partner)
    }
}

pub fn build_ip(inst: &Instance, objective: IpObjective) -> IpModel {
    let mut vars: Vec<Var> = Vec::new();
    for u in inst.agents() {
        for &v in inst.prefs(u) {
            vars.push(Var::X(u, v));
        }
    }
    let almost = objective == IpObjective::AlmostStable;
    if almost {
        vars.extend(inst.edges().into_iter().map(|(u, v)| Var::B(u, v)));
    }
    vars.sort_unstable();
    let idx = |v: Var| vars.binary_search(&v).expect("variable exists");

    let mut constraints = Vec::new();
    for v in inst.agents() {
        if inst.prefs(v).is_empty() {
            continue;
        }
        constraints.push(Constraint {
            name: format!("cap_{v}"),
            family: Family::Capacity,
            terms: inst.prefs(v).iter().map(|&u| (1, idx(Var::X(u, v)))).collect(),
            sense: Sense::Le,
            rhs: 1,
        });
    }
    for (u, v) in inst.edges() {
        let ru = inst.rank_of(u, v).expect("edge") as usize;
        let rv = inst.rank_of(v, u).expect("edge") as usize;
        let mut terms: Vec<(i64, usize)> = Vec::new();
        terms.extend(inst.prefs(u)[..ru - 1].iter().map(|&w| (1, idx(Var::X(u, w)))));
        terms.extend(inst.prefs(v)[..rv - 1].iter().map(|&w| (1, idx(Var::X(v, w)))));
        terms.push((1, idx(Var::X(u, v))));
        if almost {
            terms.push((1, idx(Var::B(u, v))));
        }
        constraints.push(Constraint {
            name: format!("stab_{u}_{v}"),
            family: Family::Stability,
            terms,
            sense: Sense::Ge,
            rhs: 1,
        });
    }
    for (u, v) in inst.edges() {
        constraints.push(Constraint {
            name: format!("sym_{u}_{v}"),
            family: Family::Symmetry,
            terms: vec![(1, idx(Var::X(u, v))), (-1, idx(Var::X(v, u)))],
            sense: Sense::Eq,
            rhs: 0,
        });
    }

    let level = |r: u32| -> Vec<(i64, usize)> {
        vars.iter()
            .enumerate()
            .filter(|(_, v)| matches!(v, Var::X(a, b) if inst.rank_of(*a, *b) == Some(r)))
            .map(|(i, _)| (1, i))
            .collect()
    };
    let (maximize, obj) = match objective {
        IpObjective::None => (false, Vec::new()),
        IpObjective::Egalitarian => (
            false,
            vars.iter()
                .enumerate()
                .filter_map(|(i, v)| match v {
                    Var::X(a, b) => Some((inst.rank_of(*a, *b).expect("acceptable") as i64, i)),
                    Var::B(..) => None,
                })
                .collect(),
        ),
        IpObjective::FirstChoice => (true, level(1)),
        IpObjective::MaximizeLevel(r) => (true, level(r)),
        IpObjective::MinimizeLevel(r) => (false, level(r)),
        IpObjective::AlmostStable => (
            false,
            vars.iter()
                .enumerate()
                .filter(|(_, v)| matches!(v, Var::B(..)))
                .map(|(i, _)| (1, i))
                .collect(),
        ),
    };
    IpModel {
        n: inst.n(),
        vars,
        constraints,
        maximize,
        objective: obj,
    }
}

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, terms: &[(i64, usize)], vars: &[Var]) {
    for (k, &(c, i)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0 { "-" } else if k == 0 { "" } else { "+" };
        let sep = if k == 0 && c >= 0 { "" } else { " " };
        let _ = write!(out, " {sign}{sep}{} {}", c.abs(), vars[i].name());
    }
}

/// LP-format text (objective, `Subject To`, `Binary`, `End`).
pub fn export_lp(model: &IpModel) -> String {
    let mut out = String::new();
    out.push_str(if model.maximize { "Maximize\n" } else { "Minimize\n" });
    out.push_str(" obj:");
    if model.objective.is_empty() {
        match model.vars.first() {
            Some(v) => {
                let _ = write!(out, " 0 {}", v.name());
            }
            None => out.push_str(" 0"),
        }
    } else {
        write_terms(&mut out, &model.objective, &model.vars);
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, &c.terms, &model.vars);
        let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
    }
    out.push_str("Binary\n");
    for v in &model.vars {
        let _ = writeln!(out, " {}", v.name());
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IpError {
    #[error("0/1 scan budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub const DEFAULT_SCAN_BUDGET: u64 = 50_000_000;

/// Backtracking over the variables in index order with interval pruning on
/// every row. Knows nothing about matchings.
struct Scan<'m> {
    model: &'m IpModel,
    /// Rows touching each variable.
    rows_of: Vec<Vec<(usize, i64)>>,
    /// Per row: sum of assigned terms, and min/max of the unassigned rest.
    fixed: Vec<i64>,
    rest_min: Vec<i64>,
    rest_max: Vec<i64>,
    assignment: Vec<bool>,
    nodes: u64,
    budget: u64,
}

impl<'m> Scan<'m> {
    fn new(model: &'m IpModel, budget: u64) -> Self {
        let mut rows_of = vec![Vec::new(); model.vars.len()];
        let mut rest_min = vec![0; model.constraints.len()];
        let mut rest_max = vec![0; model.constraints.len()];
        for (r, c) in model.constraints.iter().enumerate() {
            for &(coef, i) in &c.terms {
                rows_of[i].push((r, coef));
                if coef < 0 {
                    rest_min[r] += coef;
                } else {
                    rest_max[r] += coef;
                }
            }
        }
        Self {
            model,
            rows_of,
            fixed: vec![0; model.constraints.len()],
            rest_min,
            rest_max,
            assignment: vec![false; model.vars.len()],
            nodes: 0,
            budget,
        }
    }

    fn row_ok(&self, r: usize) -> bool {
        let c = &self.model.constraints[r];
        let (lo, hi) = (self.fixed[r] + self.rest_min[r], self.fixed[r] + self.rest_max[r]);
        match c.sense {
            Sense::Le => lo <= c.rhs,
            Sense::Ge => hi >= c.rhs,
            Sense::Eq => lo <= c.rhs && c.rhs <= hi,
        }
    }

    fn set(&mut self, i: usize, value: bool, sign: i64) {
        for k in 0..self.rows_of[i].len() {
            let (r, coef) = self.rows_of[i][k];
            if coef < 0 {
                self.rest_min[r] -= sign * coef;
            } else {
                self.rest_max[r] -= sign * coef;
            }
            if value {
                self.fixed[r] += sign * coef;
            }
        }
    }

    fn rec(&mut self, i: usize, visit: &mut dyn FnMut(&[bool])) -> Result<(), IpError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(IpError::BudgetExceeded(self.budget));
        }
        if i == self.assignment.len() {
            visit(&self.assignment);
            return Ok(());
        }
        for value in [false, true] {
            self.assignment[i] = value;
            self.set(i, value, 1);
            if self.rows_of[i].iter().all(|&(r, _)| self.row_ok(r)) {
                self.rec(i + 1, visit)?;
            }
            self.set(i, value, -1);
        }
        self.assignment[i] = false;
        Ok(())
    }
}

/// Calls `visit` on every 0/1 assignment satisfying all rows.
pub fn scan_feasible(model: &IpModel, budget: u64, mut visit: impl FnMut(&[bool])) -> Result<(), IpError> {
    let mut scan = Scan::new(model, budget);
    if (0..model.constraints.len()).all(|r| scan.row_ok(r)) {
        scan.rec(0, &mut visit)?;
    }
    Ok(())
}

/// Matchings induced by the feasible 0/1 points, deduplicated and sorted.
pub fn feasible_matchings(model: &IpModel, budget: u64) -> Result<Vec<Matching>, IpError> {
    let mut set = BTreeSet::new();
    scan_feasible(model, budget, |a| {
        set.insert(model.matching_of(a).pairs());
    })?;
    let n = model.n;
    Ok(set
        .into_iter()
        .map(|pairs| Matching::from_pairs(n, pairs).expect("pairs come from a matching"))
        .collect())
}

/// Whether the feasible set of `model` induces exactly the stable matchings
/// of `inst`.
pub fn model_matches_stable_set(inst: &Instance, model: &IpModel) -> Result<bool, IpError> {
    let mut feasible = feasible_matchings(model, DEFAULT_SCAN_BUDGET)?;
    feasible.sort_by_key(Matching::pairs);
    let stable = oracle::enumerate_stable(inst)?;
    Ok(feasible == stable.matchings)
}

pub fn feasible_set_equals_stable_set(inst: &Instance) -> Result<bool, IpError> {
    model_matches_stable_set(inst, &build_ip(inst, IpObjective::None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::blocking_count;
    use crate::fixtures;

    #[test]
    fn no_stable_four_counts_and_empty_feasible_set() {
        let inst = fixtures::no_stable_four();
        let m = build_ip(&inst, IpObjective::None);
        assert_eq!(m.constraints.len(), 4 + 6 + 6);
        assert!(feasible_matchings(&m, DEFAULT_SCAN_BUDGET).unwrap().is_empty());
        assert!(feasible_set_equals_stable_set(&inst).unwrap());
        assert!(!model_matches_stable_set(&inst, &m.without(Family::Stability)).unwrap());
    }

    #[test]
    fn seven_stable_has_seven_points() {
        let inst = fixtures::seven_stable();
        let m = build_ip(&inst, IpObjective::None);
        let mut count = 0;
        scan_feasible(&m, DEFAULT_SCAN_BUDGET, |_| count += 1).unwrap();
        assert_eq!(count, 7);
        assert!(feasible_set_equals_stable_set(&inst).unwrap());
    }

    #[test]
    fn mutual_pair_export() {
        let inst = fixtures::mutual_pair();
        let m = build_ip(&inst, IpObjective::Egalitarian);
        let mut points = Vec::new();
        scan_feasible(&m, DEFAULT_SCAN_BUDGET, |a| points.push(a.to_vec())).unwrap();
        assert_eq!(points, vec![vec![true, true]]);
        let text = export_lp(&m);
        assert_eq!(
            text,
            "Minimize\n obj: 1 x_1_2 + 1 x_2_1\nSubject To\n cap_1: 1 x_2_1 <= 1\n cap_2: 1 x_1_2 <= 1\n \
             stab_1_2: 1 x_1_2 >= 1\n sym_1_2: 1 x_1_2 - 1 x_2_1 = 0\nBinary\n x_1_2\n x_2_1\nEnd\n"
        );
        assert_eq!(export_lp(&m), export_lp(&build_ip(&inst, IpObjective::Egalitarian)));
    }

    #[test]
    fn egalitarian_objective_is_the_cost() {
        let inst = fixtures::seven_stable();
        let m = build_ip(&inst, IpObjective::Egalitarian);
        let mut values = Vec::new();
        scan_feasible(&m, DEFAULT_SCAN_BUDGET, |a| values.push((m.matching_of(a), m.objective_value(a)))).unwrap();
        values.sort_by_key(|(mm, _)| fixtures::seven_stable_matchings().iter().position(|r| r == mm));
        let costs: Vec<i64> = values.iter().map(|&(_, v)| v).collect();
        assert_eq!(costs, fixtures::SEVEN_STABLE_COSTS.iter().map(|&c| c as i64).collect::<Vec<_>>());
    }

    #[test]
    fn almost_stable_slack_counts_blocking_pairs() {
        let inst = fixtures::no_stable_four();
        let m = build_ip(&inst, IpObjective::AlmostStable);
        let mut best: Vec<(Vec<(AgentId, AgentId)>, i64)> = Vec::new();
        scan_feasible(&m, DEFAULT_SCAN_BUDGET, |a| {
            let pairs = m.matching_of(a).pairs();
            let v = m.objective_value(a);
            match best.iter_mut().find(|(p, _)| *p == pairs) {
                Some(e) => e.1 = e.1.min(v),
                None => best.push((pairs, v)),
            }
        })
        .unwrap();
        assert_eq!(best.len(), oracle::all_matchings(&inst).len());
        for (pairs, v) in best {
            let matching = Matching::from_pairs(4, pairs).unwrap();
            assert_eq!(v, blocking_count(&inst, &matching) as i64);
        }
    }

    #[test]
    fn long_rows_wrap() {
        let inst = Instance::from_one_based(&[
            &[2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
            &[1],
            &[1],
            &[1],
            &[1],
            &[1],
            &[1],
            &[1],
            &[1],
            &[1],
            &[1],
        ]);
        let text = export_lp(&build_ip(&inst, IpObjective::FirstChoice));
        assert!(text.lines().all(|l| l.len() < 255));
        assert!(text.contains("\n    + 1 x_9_1"));
    }
}
