//! Minimum-regret truncation with the "fewest worst choices" cost, and the
//! subset-forcing algorithm for maximizing first choices.

use itertools::Itertools;
use rayon::prelude::*;

use crate::analysis;
use crate::criteria::{self, Criterion};
use crate::engine::{self, ObjectiveKind, SearchConfig, SearchProblem, Status};
use crate::model::{AgentId, Instance, Matching};

/// `costs[a][i]` is the cost for `a` of its `(i + 1)`-th choice in the
/// instance the function was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    pub costs: Vec<Vec<f64>>,
}

impl CostFunction {
    /// Index of the first row that is not U-shaped, if any.
    pub fn first_violation(&self) -> Option<AgentId> {
        self.costs.iter().position(|row| !is_u_shaped(row)).map(AgentId)
    }
}

/// Non-increasing up to some pivot, non-decreasing after it.
pub fn is_u_shaped(row: &[f64]) -> bool {
    let mut rising = false;
    for w in row.windows(2) {
        if w[1] > w[0] {
            rising = true;
        } else if w[1] < w[0] && rising {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct TruncatedInstance {
    pub base: Instance,
    /// Minimum regret of the base instance.
    pub regret: u32,
    /// The base with every pair removed that either side ranks beyond `regret`.
    pub truncated: Instance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ApproxError {
    #[error("instance has no stable matching")]
    Unsat,
    #[error("search budget exceeded")]
    BudgetExceeded,
}

fn status_error(s: Status) -> ApproxError {
    match s {
        Status::BudgetExceeded => ApproxError::BudgetExceeded,
        _ => ApproxError::Unsat,
    }
}

pub fn truncate_at_min_regret(inst: &Instance, cfg: &SearchConfig) -> Result<TruncatedInstance, ApproxError> {
    let r = criteria::solve_criterion(inst, Criterion::MinRegret, cfg);
    if r.status() != Status::Optimal {
        return Err(status_error(r.status()));
    }
    let regret = r.outcome.objective_value.expect("optimal") as u32;
    let truncated = inst.filtered(|a, b| {
        inst.rank_of(a, b).is_some_and(|x| x <= regret) && inst.rank_of(b, a).is_some_and(|x| x <= regret)
    });
    Ok(TruncatedInstance {
        base: inst.clone(),
        regret,
        truncated,
    })
}

/// Cost 1 for a pair the agent ranks exactly `regret` in the base instance,
/// 0 otherwise, laid out along the truncated lists.
pub fn build_lc_cost(t: &TruncatedInstance) -> CostFunction {
    let costs = t
        .truncated
        .agents()
        .map(|a| {
            t.truncated
                .prefs(a)
                .iter()
                .map(|&b| if t.base.rank_of(a, b) == Some(t.regret) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    CostFunction { costs }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcSolution {
    pub matching: Matching,
    pub regret: u32,
    /// Agents matched to their `regret`-th choice.
    pub worst_count: u32,
}

/// A minimum-regret stable matching with the fewest agents at the regret
/// rank, solved exactly: the base instance with every agent of `A*` capped
/// at the minimum regret, minimizing the truncation cost.
pub fn solve_lc(inst: &Instance, cfg: &SearchConfig) -> Result<LcSolution, ApproxError> {
    let t = truncate_at_min_regret(inst, cfg)?;
    let cost = build_lc_cost(&t);
    debug_assert_eq!(cost.first_violation(), None);
    let a_star = analysis::matched_set(inst).ok_or(ApproxError::Unsat)?;
    let weights: Vec<Vec<i64>> = inst
        .agents()
        .map(|a| {
            (1..=inst.list_len(a) as u32)
                .map(|r| i64::from(r == t.regret))
                .collect()
        })
        .collect();
    let caps = inst
        .agents()
        .map(|a| a_star.contains(a).then(|| t.regret.min(inst.list_len(a) as u32)))
        .collect();
    let p = SearchProblem::new(inst, ObjectiveKind::MinimizeWeighted(weights)).with_caps(caps);
    let out = engine::solve(&p, cfg);
    if out.status != Status::Optimal {
        return Err(status_error(out.status));
    }
    Ok(LcSolution {
        matching: out.matching.expect("optimal"),
        regret: t.regret,
        worst_count: out.objective_value.expect("optimal") as u32,
    })
}

/// Whether `candidate` is within a factor 2 of the exact optimum. An
/// instance without a stable matching has no optimum and fails.
pub fn check_ratio(candidate: u32, inst: &Instance, cfg: &SearchConfig) -> bool {
    match solve_lc(inst, cfg) {
        Ok(best) => candidate <= 2 * best.worst_count,
        Err(_) => false,
    }
}

/// A stable matching in which some `k` agents all get their first choice,
/// found by forcing each `k`-subset of agents onto their first choices in
/// lexicographic order. Returns the first success.
pub fn fc_xp(inst: &Instance, k: usize, cfg: &SearchConfig) -> Option<Matching> {
    let first = |a: AgentId| inst.prefs(a).first().copied();
    let candidates: Vec<AgentId> = inst.agents().filter(|&a| first(a).is_some()).collect();
    let subsets: Vec<Vec<AgentId>> = candidates.into_iter().combinations(k).collect();
    subsets.par_iter().find_map_first(|u| {
        let mut forced: Vec<(AgentId, AgentId)> = Vec::with_capacity(k);
        for &a in u {
            let b = first(a).expect("filtered above");
            let pair = (a.min(b), a.max(b));
            if !forced.contains(&pair) {
                forced.push(pair);
            }
        }
        let mut seen = vec![false; inst.n()];
        for &(a, b) in &forced {
            if seen[a.0] || seen[b.0] {
                return None;
            }
            seen[a.0] = true;
            seen[b.0] = true;
        }
        let p = SearchProblem::new(inst, ObjectiveKind::Feasibility).with_forced(forced);
        let out = engine::solve(&p, cfg);
        (out.status == Status::Optimal).then(|| out.matching.expect("optimal"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{is_stable, profile, ProfileScope};
    use crate::fixtures;

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    #[test]
    fn u_shape() {
        assert!(is_u_shaped(&[1.0, 0.0, 1.0]));
        assert!(!is_u_shaped(&[0.0, 1.0, 0.0]));
        assert!(is_u_shaped(&[]));
        assert!(is_u_shaped(&[0.0, 0.0, 1.0]));
        assert!(is_u_shaped(&[3.0, 1.0, 1.0, 2.0, 2.0]));
    }

    #[test]
    fn seven_stable_truncation() {
        let t = truncate_at_min_regret(&fixtures::seven_stable(), &cfg()).unwrap();
        assert_eq!(t.regret, 6);
        assert!(t.truncated.max_list_len() <= 6);
        let c = build_lc_cost(&t);
        assert_eq!(c.first_violation(), None);
        // base rank-6 entries are the last survivors of a truncated list
        for row in &c.costs {
            let ones = row.iter().filter(|&&x| x == 1.0).count();
            assert!(ones == 0 || (ones == 1 && row.last() == Some(&1.0)));
        }
    }

    #[test]
    fn first_choice_instance_truncates_to_mutual_firsts() {
        let inst = Instance::from_one_based(&[&[2, 3], &[1, 3], &[4, 1, 2], &[3]]);
        let t = truncate_at_min_regret(&inst, &cfg()).unwrap();
        assert_eq!(t.regret, 1);
        assert_eq!(
            t.truncated,
            Instance::from_one_based(&[&[2], &[1], &[4], &[3]])
        );
        let c = build_lc_cost(&t);
        assert_eq!(c.costs, vec![vec![1.0]; 4]);
    }

    #[test]
    fn no_stable_four_is_unsat() {
        assert_eq!(truncate_at_min_regret(&fixtures::no_stable_four(), &cfg()).unwrap_err(), ApproxError::Unsat);
        assert_eq!(solve_lc(&fixtures::no_stable_four(), &cfg()).unwrap_err(), ApproxError::Unsat);
    }

    #[test]
    fn seven_stable_lc() {
        let inst = fixtures::seven_stable();
        let s = solve_lc(&inst, &cfg()).unwrap();
        assert_eq!((s.regret, s.worst_count), (6, 2));
        assert!(is_stable(&inst, &s.matching));
        let set = analysis::matched_set(&inst).unwrap();
        let p = profile(&inst, &fixtures::seven_stable_matchings()[4], ProfileScope::Within(&set));
        assert_eq!(p.level(6), 2);
        assert!(check_ratio(4, &inst, &cfg()));
        assert!(!check_ratio(5, &inst, &cfg()));
    }

    #[test]
    fn ratio_with_zero_optimum() {
        // A lone agent: minimum regret 0, nobody at rank 0.
        let lone = Instance::new(vec![vec![]]).unwrap();
        assert!(check_ratio(0, &lone, &cfg()));
        assert!(!check_ratio(1, &lone, &cfg()));
    }

    #[test]
    fn seven_stable_xp() {
        let inst = fixtures::seven_stable();
        let m = fc_xp(&inst, 2, &cfg()).unwrap();
        let set = analysis::matched_set(&inst).unwrap();
        assert!(profile(&inst, &m, ProfileScope::Within(&set)).level(1) >= 2);
        assert!(fc_xp(&inst, 3, &cfg()).is_none());
        assert!(is_stable(&inst, &fc_xp(&inst, 0, &cfg()).unwrap()));
        assert!(fc_xp(&fixtures::no_stable_four(), 0, &cfg()).is_none());
    }

    /// Truncation keeps a stable matching of the base but can add new ones
    /// that the base rejects, so the exact solve works on the base.
    #[test]
    fn truncated_instance_can_admit_unstable_matchings() {
        let inst = crate::model::generate_random(&crate::model::RandomSpec::new(9, 0.75, 482).unwrap());
        let t = truncate_at_min_regret(&inst, &cfg()).unwrap();
        let set = crate::oracle::enumerate_stable(&t.truncated).unwrap();
        assert!(set.matchings.iter().any(|m| !is_stable(&inst, m)));
        assert!(is_stable(&inst, &solve_lc(&inst, &cfg()).unwrap().matching));
    }
}
