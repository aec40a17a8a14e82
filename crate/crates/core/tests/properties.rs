use proptest::prelude::*;

use limset::criteria::{ClassifierConfig, Criteria, EigenSystem, NormalizerSeq, SeriesClass};
use limset::linalg::{symmetric_eigen, Mat};
use limset::models::{CoordinateLaw, Example8Model, GaussianModel, IndependentModel, MomentModel, Segment, StarSet};
use limset::reference::qp_tube_energy;
use limset::sim::process::Trajectory;
use limset::sim::{empirical_cluster, run_simulation, small_ball_sandwich, Checkpoint, RngStream, SimulationConfig};
use limset::strassen::{dirichlet_energy, k_sample, min_energy_in_ball, parseval_energy, vector_energy};
use limset::GridFn;

fn scalar() -> impl Strategy<Value = GridFn> {
    (4usize..=48).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, n).prop_map(|steps| {
            let mut v = vec![0.0];
            for s in steps {
                let last = v[v.len() - 1];
                v.push(last + s / 3.0);
            }
            GridFn::scalar(v).unwrap()
        })
    })
}

fn covariance(d: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-1.0f64..1.0, d * d).prop_map(move |a| {
        let mut m = Mat::zeros(d);
        for k in 0..d {
            let col: Vec<f64> = (0..d).map(|i| a[i * d + k]).collect();
            m.add_outer(1.0, &col);
        }
        m.add_outer(0.05, &vec![1.0; d]);
        m
    })
}

fn min_eigenvalue(m: &Mat) -> f64 {
    symmetric_eigen(m).unwrap().0.into_iter().fold(f64::INFINITY, f64::min)
}

fn disk_engine() -> Criteria {
    let m = MomentModel::Gaussian(GaussianModel::new(Mat::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.6]]).unwrap()).unwrap());
    Criteria::new(m, NormalizerSeq::Sqrt2nLoglog, ClassifierConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_scales_quadratically_and_is_even(g in scalar(), lambda in -5.0f64..5.0) {
        let e = dirichlet_energy(&g).unwrap().value;
        let s = dirichlet_energy(&g.scaled(lambda)).unwrap().value;
        prop_assert!((s - lambda * lambda * e).abs() <= 1e-12 * (1.0 + s.abs()));
        prop_assert_eq!(dirichlet_energy(&g.scaled(-1.0)).unwrap().value, e);
    }

    #[test]
    fn tube_energy_is_monotone_in_epsilon(g in scalar(), e1 in 0.01f64..0.5, de in 0.0f64..0.5) {
        let a = min_energy_in_ball(&g, e1).unwrap().value;
        let b = min_energy_in_ball(&g, e1 + de).unwrap().value;
        prop_assert!(b <= a + 1e-12);
        prop_assert!(a <= dirichlet_energy(&g).unwrap().value + 1e-12);
        prop_assert_eq!(min_energy_in_ball(&g, g.sup_norm().max(1e-9)).unwrap().value, 0.0);
    }

    #[test]
    fn unit_energy_functions_obey_cauchy_schwarz(g in scalar()) {
        let e = dirichlet_energy(&g).unwrap().value;
        let g = if e > 1.0 { g.scaled(1.0 / e.sqrt()) } else { g };
        let v = g.scalar_values().unwrap();
        prop_assert!(g.sup_norm() <= 1.0 + 1e-12);
        for s in 0..v.len() {
            for t in s + 1..v.len() {
                let dt = g.node(t) - g.node(s);
                prop_assert!((v[t] - v[s]).abs() <= dt.sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn parseval_ignores_the_basis(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let coords: Vec<GridFn> = (0..3)
            .map(|_| GridFn::scalar((0..=20).scan(0.0, |s, i| { if i > 0 { *s += rng.normal() } Some(*s) }).collect()).unwrap())
            .collect();
        let f = GridFn::from_coordinates(&coords).unwrap();
        let q = symmetric_eigen(&{
            let mut m = Mat::zeros(3);
            for _ in 0..3 {
                let v: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
                m.add_outer(1.0, &v);
            }
            m
        }).unwrap().1;
        let basis: Vec<Vec<f64>> = (0..3).map(|k| q.rows().iter().map(|r| r[k]).collect()).collect();
        let total = vector_energy(&f);
        prop_assert!((parseval_energy(&f, &basis).unwrap() - total).abs() <= 1e-9 * total);
    }

    #[test]
    fn trunc_cov_increases_in_t(cov in covariance(3), t1 in 0.1f64..6.0, dt in 0.0f64..6.0) {
        let m = MomentModel::Gaussian(GaussianModel::new(cov).unwrap());
        let d = m.trunc_cov(t1 + dt).sub(&m.trunc_cov(t1));
        prop_assert!(min_eigenvalue(&d) >= -1e-10);
    }

    #[test]
    fn independent_trunc_cov_increases_in_t(s in 0.1f64..2.0, r in 0.1f64..2.0, u in 0.1f64..2.0, t1 in 0.05f64..4.0, dt in 0.0f64..4.0) {
        let m = MomentModel::Independent(IndependentModel::new(vec![
            CoordinateLaw::Normal { sigma: s },
            CoordinateLaw::Rademacher { scale: r },
            CoordinateLaw::Uniform { half_width: u },
        ]).unwrap());
        let d = m.trunc_cov(t1 + dt).sub(&m.trunc_cov(t1));
        prop_assert!(min_eigenvalue(&d) >= -1e-10);
    }

    #[test]
    fn eigensystem_rebuilds_the_covariance(cov in covariance(4)) {
        let e = EigenSystem::from_cov(&cov).unwrap();
        prop_assert!(e.reconstruct().sub(&cov).frobenius() <= 1e-9 * cov.frobenius());
    }

    #[test]
    fn block_samples_are_dominated_by_z(seed in any::<u64>(), angle in 0.0f64..3.0, sigma in 0.71f64..1.0) {
        let star = StarSet::new(vec![
            Segment { sigma: 1.0, z: vec![1.0, 0.0] },
            Segment { sigma, z: vec![angle.cos(), angle.sin()] },
        ]).unwrap();
        let m = Example8Model::scaled(star, 8.0, 2).unwrap();
        let mut rng = RngStream::new(seed, 3);
        for _ in 0..200 {
            let (x, z) = m.sample_xz(&mut rng).unwrap();
            prop_assert!(x.iter().map(|v| v * v).sum::<f64>().sqrt() <= z.abs() * (1.0 + 1e-15));
        }
        let a = MomentModel::Example8(m.clone()).sample_x(&mut RngStream::new(seed, 4), 50).unwrap();
        let b = MomentModel::Example8(m).sample_x(&mut RngStream::new(seed, 4), 50).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn snapshot_endpoint_is_the_partial_sum(seed in any::<u64>(), n in 1u64..400, grid in 1usize..40) {
        let m = MomentModel::Gaussian(GaussianModel::new(Mat::identity(2)).unwrap());
        let traj = Trajectory::simulate(&m, n, &mut RngStream::new(seed, 0)).unwrap();
        let c = 1.7;
        let s = traj.snapshot(n, grid, c).unwrap();
        let end = s.point(grid);
        for (a, b) in end.iter().zip(traj.sum(n)) {
            prop_assert!((a * c - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn delta_net_commutes_with_reflection(seed in any::<u64>(), delta in 0.05f64..0.5) {
        let mut rng = RngStream::new(seed, 9);
        let pts: Vec<Checkpoint> = (1..300u64)
            .map(|n| Checkpoint { n, point: vec![rng.normal(), rng.normal()] })
            .collect();
        let neg: Vec<Checkpoint> = pts
            .iter()
            .map(|c| Checkpoint { n: c.n, point: c.point.iter().map(|v| -v).collect() })
            .collect();
        let a = empirical_cluster(&pts, delta, 0.3).unwrap();
        let b = empirical_cluster(&neg, delta, 0.3).unwrap();
        let mut reflected: Vec<Vec<f64>> = a.net.points.iter().map(|p| p.iter().map(|v| -v).collect()).collect();
        reflected.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut got = b.net.points.clone();
        got.sort_by(|p, q| p.partial_cmp(q).unwrap());
        prop_assert_eq!(reflected, got);
    }

    #[test]
    fn csv_round_trip(values in prop::collection::vec(-1e6f64..1e6, 2..40)) {
        let mut v = values;
        v[0] = 0.0;
        let g = GridFn::scalar(v).unwrap();
        prop_assert_eq!(GridFn::from_csv_str(&g.to_csv_string().unwrap()).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn taut_string_matches_reference(g in scalar(), eps in 0.02f64..0.4) {
        let a = min_energy_in_ball(&g, eps).unwrap().value;
        let b = qp_tube_energy(&g, eps).unwrap();
        prop_assert!((a - b).abs() <= 1e-6, "{} vs {}", a, b);
    }

    #[test]
    fn point_verdicts_are_even(x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let c = disk_engine();
        prop_assert_eq!(c.point_membership(&[x, y]).unwrap().overall, c.point_membership(&[-x, -y]).unwrap().overall);
    }

    #[test]
    fn function_verdicts_are_even_star_shaped_and_eps_monotone(
        x in -1.5f64..1.5, y in -1.5f64..1.5, i in 0usize..8, j in 0usize..8, lambda in 0.0f64..1.0,
    ) {
        let c = disk_engine();
        let ks = k_sample(32).unwrap();
        let f = GridFn::from_coordinates(&[ks[i].scaled(x), ks[j].scaled(y)]).unwrap();
        let v = c.function_membership(&f).unwrap();
        prop_assert_eq!(v.overall, c.function_membership(&f.scaled(-1.0)).unwrap().overall);
        let w = c.function_membership(&f.scaled(lambda)).unwrap();
        for (a, b) in v.verdicts.iter().zip(&w.verdicts) {
            prop_assert!(a.class != SeriesClass::Divergent || b.class == SeriesClass::Divergent);
        }
        // the ε grid decreases, so divergence may only stop, never resume
        let first_other = v.verdicts.iter().position(|e| e.class != SeriesClass::Divergent);
        if let Some(k) = first_other {
            prop_assert!(v.verdicts[k..].iter().all(|e| e.class != SeriesClass::Divergent));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn reports_do_not_depend_on_workers(seed in any::<u64>(), workers in 2usize..6) {
        let m = MomentModel::Gaussian(GaussianModel::new(Mat::identity(2)).unwrap());
        let cfg = SimulationConfig { n_max: 20_000, replicas: 5, snapshots: 2, ..Default::default() };
        let a = run_simulation(&m, &NormalizerSeq::Sqrt2nLoglog, &cfg, seed, 1).unwrap();
        let b = run_simulation(&m, &NormalizerSeq::Sqrt2nLoglog, &cfg, seed, workers).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn small_ball_sandwich_holds(slope in -1.0f64..1.0, eps in 0.3f64..0.8, seed in any::<u64>()) {
        let n = 10_000u64;
        let c_n = (2.0 * n as f64 * (n as f64).ln().ln()).sqrt();
        let f = GridFn::scalar_from_fn(100, |t| slope * t).unwrap();
        let s = small_ball_sandwich(&f, 1.0, c_n, n, eps, 20_000, &RngStream::new(seed, 5)).unwrap();
        if s.reliable {
            prop_assert!(s.holds(), "{:?}", s);
        }
    }
}
