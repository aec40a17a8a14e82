//! The heavy-tailed block model: symbolic identities and q-mass in the
//! exact log domain, then a simulation of the scaled surrogate.

use limset::criteria::{NormalizerSeq, PredictedSets};
use limset::models::{Example8Model, MomentModel, Segment, StarSet};
use limset::sim::{containment_check, run_simulation, SimulationConfig};

fn main() -> limset::Result<()> {
    let star = StarSet::new(vec![
        Segment { sigma: 1.0, z: vec![1.0, 0.0] },
        Segment { sigma: 0.8, z: vec![1.0, 1.0] },
    ])?;
    let exact = Example8Model::exact(star.clone());
    let ids = exact.verify_block_identities(3);
    println!("exact: {}/{} identities hold", ids.iter().filter(|c| c.pass).count(), ids.len());
    let q = exact.q_mass_bound(1000);
    println!("exact: total q-mass <= {:.3e}", q.total_upper);

    let scaled = Example8Model::scaled(star.clone(), 8.0, 2)?;
    let model = MomentModel::Example8(scaled);
    let cfg = SimulationConfig {
        n_max: 1_000_000,
        replicas: 4,
        ..Default::default()
    };
    let seq = NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 };
    let report = run_simulation(&model, &seq, &cfg, 2026, 4)?;
    let c = containment_check(&report, &PredictedSets::for_star(&star), cfg.tol)?;
    println!(
        "scaled: {} net points, max distance to the star {:.3}, upper violations {}",
        report.net.points.len(),
        c.max_point_distance,
        c.upper_violations.len()
    );
    for p in &report.net.points {
        println!("  ({:+.3}, {:+.3})", p[0], p[1]);
    }
    Ok(())
}
