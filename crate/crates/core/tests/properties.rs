use proptest::prelude::*;

use profile_ugm::bayes_em::{e_step_exact, e_step_with, m_step_omega, EStepRule, Hyperparameters, OmegaSolverOptions, DEFAULT_Q_MAX};
use profile_ugm::evaluation::{auc, confusion, metrics};
use profile_ugm::markov::{gmp_statements, graph_implies, pairwise_statements};
use profile_ugm::{io, Dataset, LevelSet, Matrix, Params, ProfileGraph, StateSpace};

fn graph_strategy() -> impl Strategy<Value = ProfileGraph> {
    (2usize..=5, 1usize..=3).prop_flat_map(|(p, q)| {
        let pairs = p * (p - 1) / 2;
        prop::collection::vec(0u64..(1 << q), pairs).prop_map(move |labels| {
            let names: Vec<String> = (0..p).map(|i| format!("v{i}")).collect();
            let mut g = ProfileGraph::new(StateSpace::numbered(q).unwrap(), names).unwrap();
            let pairs: Vec<(usize, usize)> = g.pairs().collect();
            for ((a, b), bits) in pairs.into_iter().zip(labels) {
                g.set_label(a, b, LevelSet::from_indices((0..q).filter(|x| bits >> x & 1 == 1))).unwrap();
            }
            g
        })
    })
}

fn spd(p: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, p * p).prop_map(move |v| {
        let a = Matrix::from_fn(p, p, |i, j| v[i * p + j]);
        let mut m = a.matmul(&a.transpose());
        m.add_diagonal(0.3);
        m
    })
}

fn params_strategy() -> impl Strategy<Value = Params> {
    (2usize..=4, 2usize..=3).prop_flat_map(|(p, q)| {
        (
            prop::collection::vec(-2.0f64..2.0, p),
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, p), q),
            prop::collection::vec(spd(p), q),
        )
            .prop_map(move |(alpha, beta, omega)| {
                Params::new(
                    (0..q).map(|x| format!("L{x}")).collect(),
                    (0..p).map(|i| format!("y{i}")).collect(),
                    alpha,
                    beta,
                    omega,
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_json_round_trip(g in graph_strategy()) {
        prop_assert_eq!(ProfileGraph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn induced_edges_follow_labels(g in graph_strategy()) {
        let u = g.induced_multiple_graphs();
        for (a, b) in g.pairs() {
            for x in 0..g.q() {
                prop_assert_eq!(u.has_edge(x, a, b), !g.label(a, b).contains(x));
            }
        }
    }

    #[test]
    fn enumerated_statements_are_implied(g in graph_strategy()) {
        for s in gmp_statements(&g, 12).unwrap().iter().chain(&pairwise_statements(&g).unwrap()) {
            prop_assert!(graph_implies(&g, s));
        }
    }

    #[test]
    fn summaries_are_probabilities(params in params_strategy()) {
        let h = Hyperparameters::default();
        for s in [e_step_exact(&params, &h).unwrap(), e_step_with(&params, &h, EStepRule::Factorized, DEFAULT_Q_MAX).unwrap()] {
            prop_assert!(s.check().is_ok());
            prop_assert!(s.theta.iter().all(|t| (0.0..=1.0).contains(t)));
            for r in &s.r {
                prop_assert_eq!(r.asymmetry(), 0.0);
            }
        }
    }

    #[test]
    fn params_json_round_trip(params in params_strategy()) {
        prop_assert_eq!(Params::from_json(&params.to_json()).unwrap(), params);
    }

    #[test]
    fn precision_update_is_positive_definite(s in spd(4), r in prop::collection::vec(0.0f64..1.0, 16), n in 1usize..60) {
        let mut r = Matrix::from_fn(4, 4, |i, j| r[i * 4 + j]);
        r.symmetrize();
        let omega = m_step_omega(&s, n, &r, &Hyperparameters::default(), &OmegaSolverOptions::default()).unwrap();
        prop_assert!(omega.is_positive_definite());
        prop_assert_eq!(omega.asymmetry(), 0.0);
    }

    #[test]
    fn dataset_csv_round_trip(
        rows in prop::collection::vec(prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 3), 1..6),
        split in 0usize..6,
    ) {
        let split = split.min(rows.len() - 1).max(1).min(rows.len());
        let (a, b) = rows.split_at(split);
        let blocks: Vec<Matrix<f64>> = [a, b].iter().filter(|r| !r.is_empty()).map(|r| Matrix::from_rows(r).unwrap()).collect();
        let levels = (0..blocks.len()).map(|x| x.to_string()).collect();
        let data = Dataset::new(levels, vec!["a".into(), "b".into(), "c".into()], blocks).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("d.csv");
        io::save_dataset_csv(&data, &file).unwrap();
        prop_assert_eq!(io::load_dataset::<f64>(&file).unwrap(), data.clone());
        io::save_dataset_dir(&data, &dir.path().join("dir")).unwrap();
        prop_assert_eq!(io::load_dataset::<f64>(&dir.path().join("dir")).unwrap(), data);
    }

    #[test]
    fn metrics_and_auc_are_bounded(g in graph_strategy(), h in graph_strategy(), seed in any::<u64>()) {
        prop_assume!(g.p() == h.p() && g.q() == h.q());
        let (t, e) = (g.induced_multiple_graphs(), h.induced_multiple_graphs());
        let c = confusion(&t, &e).unwrap();
        let m = metrics(&c.pooled);
        for v in [m.accuracy, m.sensitivity, m.specificity, m.balanced_accuracy].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let p = g.p();
        let scores: Vec<Matrix<f64>> = (0..g.q())
            .map(|x| Matrix::from_fn(p, p, |i, j| ((seed ^ (x * 31 + i.min(j) * 7 + i.max(j)) as u64) % 97) as f64))
            .collect();
        if let Some(a) = auc(&scores, &t).unwrap() {
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
