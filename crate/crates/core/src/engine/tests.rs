use super::*;
use crate::analysis::{blocking_count, is_stable};
use crate::fixtures;
use crate::model::{generate_random, RandomSpec};
use crate::oracle::{self, irving::phase_one_table};

fn a(i: usize) -> AgentId {
    AgentId(i - 1)
}

fn run(p: &SearchProblem<'_>) -> SolveOutcome {
    solve(p, &SearchConfig::default())
}

#[test]
fn seven_stable_feasible() {
    let inst = fixtures::seven_stable();
    let out = run(&SearchProblem::new(&inst, ObjectiveKind::Feasibility));
    assert_eq!(out.status, Status::Optimal);
    assert!(is_stable(&inst, out.matching.as_ref().unwrap()));
}

#[test]
fn forced_pair_outside_every_stable_matching() {
    let inst = fixtures::seven_stable();
    let p = SearchProblem::new(&inst, ObjectiveKind::Feasibility).with_forced(vec![(a(1), a(10))]);
    assert_eq!(run(&p).status, Status::Unsat);
}

#[test]
fn seven_stable_min_cost() {
    let inst = fixtures::seven_stable();
    let out = run(&SearchProblem::new(&inst, ObjectiveKind::MinimizeCost));
    assert_eq!(out.status, Status::Optimal);
    assert_eq!(out.objective_value, Some(38));
    assert_eq!(out.matching.unwrap(), fixtures::seven_stable_matchings()[2]);
}

#[test]
fn no_stable_four_blocking() {
    let inst = fixtures::no_stable_four();
    assert_eq!(run(&SearchProblem::new(&inst, ObjectiveKind::Feasibility)).status, Status::Unsat);
    for strategy in [BlockingStrategy::PairDeletion, BlockingStrategy::Search] {
        let cfg = SearchConfig {
            blocking: strategy,
            ..SearchConfig::default()
        };
        let out = solve(&SearchProblem::new(&inst, ObjectiveKind::MinimizeBlocking).relaxed(), &cfg);
        assert_eq!(out.status, Status::Optimal);
        assert_eq!(out.objective_value, Some(1));
        assert_eq!(blocking_count(&inst, out.matching.as_ref().unwrap()), 1);
    }
}

#[test]
fn diagnostics() {
    let inst = fixtures::no_stable_four();
    // Root propagation alone does not see that this instance is unsolvable.
    assert!(check_consistency(&SearchProblem::new(&inst, ObjectiveKind::Feasibility)).is_empty());
    let p = SearchProblem::new(&inst, ObjectiveKind::Feasibility).with_forced(vec![(a(1), a(2)), (a(1), a(3))]);
    assert!(check_consistency(&p).contains(&Diagnostic::OverlappingForcedPairs(a(1))));
    let mut caps = vec![None; 4];
    caps[0] = Some(0);
    let p = SearchProblem::new(&inst, ObjectiveKind::Feasibility).with_caps(caps);
    assert!(matches!(check_consistency(&p)[0], Diagnostic::InvalidCap { .. }));
    let p = SearchProblem::new(&inst, ObjectiveKind::MaximizeLevel(1)).relaxed();
    assert_eq!(check_consistency(&p), vec![Diagnostic::ProfileObjectiveInRelaxedMode]);
}

#[test]
fn budget_reports_incumbent() {
    let inst = fixtures::seven_stable();
    let cfg = SearchConfig {
        node_limit: 3,
        ..SearchConfig::default()
    };
    let out = solve(&SearchProblem::new(&inst, ObjectiveKind::MinimizeCost), &cfg);
    assert_eq!(out.status, Status::BudgetExceeded);
}

#[test]
fn strict_search_matches_enumeration() {
    for seed in 0..300 {
        let n = 4 + seed as usize % 8;
        let p = [0.3, 0.6, 1.0][seed as usize % 3];
        let inst = generate_random(&RandomSpec::new(n, p, seed).unwrap());
        let set = oracle::enumerate_stable(&inst).unwrap();
        let out = run(&SearchProblem::new(&inst, ObjectiveKind::MinimizeCost));
        match set.matchings.iter().map(|m| objective_value(&inst, &ObjectiveKind::MinimizeCost, m)).min() {
            None => assert_eq!(out.status, Status::Unsat),
            Some(best) => {
                assert_eq!(out.objective_value, Some(best), "seed {seed}");
                assert!(is_stable(&inst, out.matching.as_ref().unwrap()));
            }
        }
    }
}

#[test]
fn blocking_strategies_agree_with_oracle() {
    for seed in 0..300 {
        let n = 4 + seed as usize % 6;
        let p = [0.4, 0.7, 1.0][seed as usize % 3];
        let inst = generate_random(&RandomSpec::new(n, p, seed).unwrap());
        let (_, best) = oracle::min_blocking_over_all_matchings(&inst).unwrap();
        for strategy in [BlockingStrategy::PairDeletion, BlockingStrategy::Search] {
            let cfg = SearchConfig {
                blocking: strategy,
                ..SearchConfig::default()
            };
            let out = solve(&SearchProblem::new(&inst, ObjectiveKind::MinimizeBlocking).relaxed(), &cfg);
            assert_eq!(out.objective_value, Some(best as i64), "seed {seed} {strategy:?}");
        }
    }
}

/// The pruning used by the pair-deletion search: deleting a pair that phase 1
/// already removed never makes an unsolvable instance solvable.
#[test]
fn deleting_a_pair_outside_the_table_keeps_unsolvability() {
    let mut checked = 0;
    for seed in 0..20000 {
        let n = 3 + seed as usize % 12;
        let p = [0.3, 0.5, 0.8, 1.0][seed as usize % 4];
        let inst = generate_random(&RandomSpec::new(n, p, seed).unwrap());
        if oracle::exists_stable(&inst) {
            continue;
        }
        let table = phase_one_table(&inst);
        for (x, y) in inst.edges() {
            if table[x.0].contains(&y) {
                continue;
            }
            checked += 1;
            let reduced = inst.without_pairs(&[(x, y)]);
            assert!(!oracle::exists_stable(&reduced), "seed {seed} pair {x},{y}");
        }
    }
    assert!(checked > 1000);
}
