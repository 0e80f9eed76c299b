mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toffa_core::ccf::{ccf_count, enumerate_ccfs, is_valid_ccf, Ccf};
use toffa_core::contribution::{cont_context, utility_table};
use toffa_core::optimizer::{
    build_ilp, count_feasible, count_feasible_exhaustive, solve_bb, solve_bb_top_k,
    solve_exhaustive, BbOptions, SolverError,
};
use toffa_core::prioritization::{ahp_consistency, ahp_ivalues, AhpMatrix};
use toffa_core::scenario::{scenario_weights, Scenario};
use toffa_core::tradeoff::{build_adaptation_model, run_weights, InitialPolicy, RunOptions};
use toffa_core::{parse_model, parse_scenario, serialize_model};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn consistent_matrices_return_their_weights(w in prop::collection::vec(0.05f64..20.0, 2..=9)) {
        let names: Vec<String> = (0..w.len()).map(|i| format!("s{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let a = AhpMatrix::from_weights(&refs, &w);
        let total: f64 = w.iter().sum();
        let iv = ahp_ivalues(&a).unwrap().values();
        for (got, wi) in iv.iter().zip(&w) {
            prop_assert!((got - wi / total).abs() < 1e-9);
        }
        prop_assert!(ahp_consistency(&a).unwrap().cr.abs() < 1e-6);
    }

    #[test]
    fn importance_values_sum_to_one(seed in any::<u64>(), n in 2usize..=9) {
        use rand::Rng;
        let mut r = rng(seed);
        let mut e = vec![vec![1.0; n]; n];
        for (i, j) in common::upper_pairs(n) {
            let v = r.gen_range(1..=9) as f64;
            e[i][j] = v;
            e[j][i] = 1.0 / v;
        }
        let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let a = AhpMatrix { subjects: names, entries: e };
        let s: f64 = ahp_ivalues(&a).unwrap().values().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branch_and_bound_matches_the_oracle(seed in any::<u64>(), n in 1usize..=14) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r, n);
        let u = common::random_utilities(&mut r, &m);
        let p = build_ilp(&m, &u);
        match (solve_bb(&p), solve_exhaustive(&p)) {
            (Ok(a), Ok(b)) => {
                prop_assert!(p.is_feasible(&a.bits()));
                prop_assert_eq!(a, b);
            }
            (Err(SolverError::Infeasible { conflict }), Err(SolverError::Infeasible { .. })) => {
                prop_assert!(!conflict.is_empty());
            }
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
        let opts = BbOptions::default();
        prop_assert_eq!(count_feasible(&p, &opts).unwrap(), count_feasible_exhaustive(&p).unwrap());
    }

    #[test]
    fn top_k_starts_with_the_optimum(seed in any::<u64>(), n in 1usize..=12, k in 1usize..5) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r, n);
        let p = build_ilp(&m, &common::random_utilities(&mut r, &m));
        if let Ok(best) = solve_bb(&p) {
            let top = solve_bb_top_k(&p, k, &BbOptions::default()).unwrap();
            prop_assert_eq!(&top[0], &best);
            prop_assert!(top.windows(2).all(|w| w[0].objective >= w[1].objective));
            let feasible = count_feasible(&p, &BbOptions::default()).unwrap() as usize;
            prop_assert_eq!(top.len(), k.min(feasible));
        }
    }

    #[test]
    fn scaling_the_objective_keeps_the_argmax(seed in any::<u64>(), n in 1usize..=14, k in 0.01f64..100.0) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r, n);
        let mut u = common::random_utilities(&mut r, &m);
        let a = solve_bb(&build_ilp(&m, &u));
        for row in &mut u.rows {
            row.utility *= k;
        }
        let b = solve_bb(&build_ilp(&m, &u));
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.assignment, b.assignment),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn large_utility_forces_an_optional_feature(seed in any::<u64>(), n in 2usize..=12) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r, n);
        let mut u = common::random_utilities(&mut r, &m);
        let Some(i) = m.features.iter().position(|f| f.relation == toffa_core::model::Relation::Optional) else {
            return Ok(());
        };
        let boost: f64 = u.rows.iter().map(|row| row.utility.abs()).sum::<f64>() + 1.0;
        u.rows[i].utility = boost;
        let p = build_ilp(&m, &u);
        let mut forced = p.clone();
        forced.constraints.push(toffa_core::optimizer::LinearConstraint::new(
            &[(1, i)], toffa_core::optimizer::Cmp::Eq, 1,
            toffa_core::optimizer::Origin::Other { label: "probe".into() },
        ));
        if solve_exhaustive(&forced).is_ok() {
            prop_assert!(solve_bb(&p).unwrap().bits()[i]);
        }
    }

    #[test]
    fn ccf_count_matches_the_power_set(seed in any::<u64>(), total in 1usize..=12) {
        let mut r = rng(seed);
        let m = common::random_context_model(&mut r, total);
        let ids: Vec<String> = m.contexts.iter().map(|c| c.id.clone()).collect();
        let brute = (0u32..1 << total)
            .filter(|mask| {
                let members: Vec<String> = ids.iter().enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1).map(|(_, c)| c.clone()).collect();
                is_valid_ccf(&m, &members).is_ok()
            })
            .count() as u128;
        prop_assert_eq!(ccf_count(&m), Some(brute));
        let listed = enumerate_ccfs(&m).unwrap();
        prop_assert_eq!(listed.len() as u128, brute);
        let distinct: std::collections::HashSet<_> = listed.iter().map(|c| c.members.clone()).collect();
        prop_assert_eq!(distinct.len(), listed.len());
    }

    #[test]
    fn random_models_round_trip(seed in any::<u64>(), n in 1usize..=20) {
        let mut r = rng(seed);
        let m = common::random_model(&mut r, n);
        let text = serialize_model(&m);
        let again = parse_model(&text).unwrap();
        prop_assert_eq!(&again, &m);
        prop_assert_eq!(serialize_model(&again), text);
    }
}

fn base() -> (toffa_core::Model, toffa_core::ScenarioWeights) {
    let m = common::model("gridstix.toffa");
    let s = parse_scenario(&common::fixture("base.scn")).unwrap();
    let w = scenario_weights(&m, &s).unwrap();
    (m, w)
}

#[test]
fn context_term_is_linear_in_group_weights() {
    let (m, w) = base();
    let mut doubled = w.clone();
    doubled.contexts = w.contexts.scaled(2.0);
    for f in &m.features {
        let a = cont_context(&m, &f.id, &w, None).unwrap();
        let b = cont_context(&m, &f.id, &doubled, None).unwrap();
        assert!((2.0 * a - b).abs() < 1e-12, "{}", f.id);
    }
}

#[test]
fn rule_signs_bound_the_context_term() {
    let m = common::model("gridstix-ccf.toffa");
    let (_, w) = base();
    for f in &m.features {
        let kinds: Vec<_> = m
            .rules
            .iter()
            .filter(|r| r.target == f.id)
            .map(|r| r.kind)
            .collect();
        let c = cont_context(&m, &f.id, &w, None).unwrap();
        if kinds
            .iter()
            .all(|k| *k == toffa_core::model::RuleKind::Require)
        {
            assert!(c >= 0.0);
        }
        if kinds
            .iter()
            .all(|k| *k == toffa_core::model::RuleKind::Exclude)
        {
            assert!(c <= 0.0);
        }
    }
}

#[test]
fn restricting_to_every_context_changes_nothing() {
    let (m, w) = base();
    let all = Ccf {
        id: "all".into(),
        members: m.contexts.iter().map(|c| c.id.clone()).collect(),
    };
    let a = utility_table(&m, &w, None).unwrap();
    let b = utility_table(&m, &w, Some(&all)).unwrap();
    assert_eq!(a.rows, b.rows);
    let empty = Ccf {
        id: "none".into(),
        members: vec![],
    };
    assert!(utility_table(&m, &w, Some(&empty))
        .unwrap()
        .rows
        .iter()
        .all(|r| r.cont_c == 0.0));
}

#[test]
fn tradeoff_results_are_stable_and_order_free() {
    let m = common::model("gridstix-ccf.toffa");
    let s = parse_scenario(&common::fixture("table9.scn")).unwrap();
    let w = scenario_weights(&m, &s).unwrap();
    let ccfs = toffa_core::ccf::analysis_ccfs(&m).unwrap();
    let opts = RunOptions::default();
    let a = run_weights(&m, &s.id, &w, &ccfs, &opts).unwrap();
    let b = run_weights(&m, &s.id, &w, &ccfs, &opts).unwrap();
    assert_eq!(a, b);

    // Reversing the processing order relabels but never changes a winner.
    let mut rev = ccfs.clone();
    rev.reverse();
    let c = run_weights(&m, &s.id, &w, &rev, &opts).unwrap();
    for e in &a.entries {
        let wa = a.configuration(a.label_of(&e.ccf).unwrap()).unwrap();
        let wc = c.configuration(c.label_of(&e.ccf).unwrap()).unwrap();
        assert_eq!(wa.assignment, wc.assignment);
    }

    let model = build_adaptation_model(&m, &a, &InitialPolicy::MostFrequent).unwrap();
    let cks = m.cks.as_ref().unwrap();
    assert_eq!(model.ccf_map.len(), cks.states.len());
    for (e, (x, y)) in model.edges.iter().zip(&cks.transitions) {
        assert_eq!(model.label_of(x), Some(e.from.as_str()));
        assert_eq!(model.label_of(y), Some(e.to.as_str()));
        assert_eq!(e.noop, e.from == e.to);
    }
    let freq = model.frequencies();
    let top = freq.iter().map(|(_, n)| *n).max().unwrap();
    let first = freq.iter().find(|(_, n)| *n == top).unwrap();
    assert_eq!(model.initial, first.0);
}

#[test]
fn equal_priorities_match_the_oracle_per_ccf() {
    let m = common::model("gridstix-ccf.toffa");
    let s = Scenario::equal("flat");
    let w = scenario_weights(&m, &s).unwrap();
    assert!(w.goals.values().iter().all(|v| *v == 1.0));
    let ccfs = toffa_core::ccf::analysis_ccfs(&m).unwrap();
    let r = run_weights(&m, "flat", &w, &ccfs, &RunOptions::default()).unwrap();
    for c in &ccfs {
        let u = utility_table(&m, &w, Some(c)).unwrap();
        let best = solve_exhaustive(&build_ilp(&m, &u)).unwrap();
        let got = r.configuration(r.label_of(&c.id).unwrap()).unwrap();
        assert_eq!(got.assignment, best.assignment, "{}", c.id);
    }
}

#[test]
fn model_without_contexts_has_one_empty_state() {
    let m = common::model("minimal.toffa");
    let s = parse_scenario("scenario s { }").unwrap();
    let r = toffa_core::tradeoff::run_scenario(&m, &s, &RunOptions::default()).unwrap();
    assert_eq!(r.entries.len(), 1);
    assert!(r.entries[0].members.is_empty());
    assert_eq!(r.configurations[0].active, vec!["f0"]);
}
