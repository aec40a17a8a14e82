//! Built-in property suite behind `limset verify`. Every check runs with
//! fixed seeds and reports a one-line detail.

use std::time::Instant;

use serde::Serialize;

use crate::cli::commands::{self, Globals, SimulateArgs};
use crate::criteria::series::SeriesClass;
use crate::criteria::{series_classify, ClassifierConfig, Criteria, Membership, NormalizerSeq};
use crate::error::Result;
use crate::grid::GridFn;
use crate::linalg::{dot, Mat};
use crate::models::example8::{envelope_holds, envelope_probes};
use crate::models::{Example8Model, GaussianModel, MomentModel, StarSet};
use crate::reference::qp_tube_energy;
use crate::sim::cluster::sectors_visited;
use crate::sim::{run_simulation, small_ball_sandwich, RngStream, SimulationConfig};
use crate::strassen::{k_sample, min_energy_in_ball, parseval_energy, vector_energy};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub group: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Run = fn() -> Result<(bool, String)>;

pub struct Check {
    pub id: u32,
    pub group: &'static str,
    pub name: &'static str,
    pub run: Run,
}

pub fn suite() -> Vec<Check> {
    let c = |id, group, name, run: Run| Check { id, group, name, run };
    vec![
        c(1, "strassen", "taut string matches the QP oracle", taut_vs_oracle),
        c(2, "strassen", "line case I(g_eps) = 0.5625", line_case),
        c(3, "strassen", "Parseval invariance over random bases", parseval),
        c(4, "criteria", "classifier calibration", calibration),
        c(5, "criteria", "alpha0 recovery", alpha0_recovery),
        c(6, "criteria", "unit-disk membership sweep", disk_sweep),
        c(7, "models", "block-model identities, q-mass, envelope", block_model),
        c(8, "sim", "small-ball sandwich", sandwich),
        c(9, "sim", "desk-scale clustering surrogate", clustering),
        c(10, "criteria", "verdict symmetry and star-likeness", symmetry),
        c(11, "cli", "simulate reproducible across worker counts", reproducible),
    ]
}

/// Runs the checks whose group or name contains `filter`.
pub fn run(filter: Option<&str>) -> Vec<CheckResult> {
    suite()
        .into_iter()
        .filter(|c| filter.is_none_or(|f| c.group.contains(f) || c.name.contains(f)))
        .map(|c| {
            let t = Instant::now();
            let (passed, detail) = (c.run)().unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckResult {
                id: c.id,
                group: c.group,
                name: c.name,
                passed,
                detail,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn random_walk(rng: &mut RngStream, n: usize, scale: f64) -> Result<GridFn> {
    let mut v = vec![0.0];
    for _ in 0..n {
        let last = *v.last().expect("nonempty");
        v.push(last + scale * rng.normal() / (n as f64).sqrt());
    }
    GridFn::scalar(v)
}

fn taut_vs_oracle() -> Result<(bool, String)> {
    let mut rng = RngStream::new(2026, 1);
    let mut worst = 0.0f64;
    let mut secs = 0.0;
    for i in 0..50 {
        let n = [16, 64, 128][i % 3];
        let g = random_walk(&mut rng, n, 1.0)?;
        let eps = [0.05, 0.1, 0.3][(i / 3) % 3];
        let t = Instant::now();
        let a = min_energy_in_ball(&g, eps)?.value;
        secs += t.elapsed().as_secs_f64();
        let b = qp_tube_energy(&g, eps)?;
        worst = worst.max((a - b).abs());
    }
    Ok((worst <= 1e-6 && secs < 10.0, format!("max |diff| = {worst:.2e}, taut string {secs:.3} s")))
}

fn line_case() -> Result<(bool, String)> {
    let g = GridFn::scalar_from_fn(64, |t| t)?;
    let e = min_energy_in_ball(&g, 0.25)?.value;
    Ok(((e - 0.5625).abs() <= 1e-9, format!("I(g_eps) = {e}")))
}

/// Orthonormal basis from Gram-Schmidt on Gaussian vectors.
pub fn random_basis(rng: &mut RngStream, d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        for u in &out {
            let c = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            out.push(v.iter().map(|a| a / n).collect());
        }
    }
    out
}

fn parseval() -> Result<(bool, String)> {
    let mut rng = RngStream::new(2026, 3);
    let coords = (0..3).map(|_| random_walk(&mut rng, 64, 1.0)).collect::<Result<Vec<_>>>()?;
    let f = GridFn::from_coordinates(&coords)?;
    let total = vector_energy(&f);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let b = random_basis(&mut rng, 3);
        worst = worst.max((parseval_energy(&f, &b)? - total).abs() / total);
    }
    Ok((worst <= 1e-9, format!("max relative deviation {worst:.2e}")))
}

fn calibration() -> Result<(bool, String)> {
    let t = Instant::now();
    let cfg = ClassifierConfig::default();
    let class = |s: f64| -> Result<SeriesClass> {
        Ok(series_classify(|ln_n| Some(s * crate::criteria::normalizer::loglog(ln_n)), &cfg)?.class)
    };
    let got: Vec<(f64, SeriesClass)> = [0.5, 0.8, 1.3, 2.0, 0.95]
        .iter()
        .map(|s| Ok((*s, class(*s)?)))
        .collect::<Result<_>>()?;
    let ok = got[0].1 == SeriesClass::Divergent
        && got[1].1 == SeriesClass::Divergent
        && got[2].1 == SeriesClass::Convergent
        && got[3].1 == SeriesClass::Convergent
        && got[4].1 != SeriesClass::Convergent;
    let secs = t.elapsed().as_secs_f64();
    Ok((ok && secs < 5.0, format!("{got:?}, {secs:.2} s")))
}

fn alpha0_recovery() -> Result<(bool, String)> {
    let gauss = MomentModel::Gaussian(GaussianModel::new(Mat::identity(1))?);
    let cfg = ClassifierConfig::default();
    let a = Criteria::new(gauss.clone(), NormalizerSeq::Sqrt2nLoglog, cfg.clone())?.alpha0()?;
    let b = Criteria::new(gauss, NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 }, cfg.clone())?.alpha0()?;
    let m8 = MomentModel::Example8(Example8Model::exact(StarSet::single(vec![1.0])?));
    let c = Criteria::new(m8, NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 }, cfg)?.alpha0()?;
    let ok = a.contains(1.0)
        && a.half_width <= 0.15
        && b.contains(0.0)
        && b.half_width <= 0.15
        && c.contains(1.0)
        && c.half_width <= 0.15;
    Ok((
        ok,
        format!(
            "gaussian [{:.3}, {:.3}], faster c_n [{:.3}, {:.3}], block model [{:.3}, {:.3}]",
            a.lower, a.upper, b.lower, b.upper, c.lower, c.upper
        ),
    ))
}

fn disk() -> Result<Criteria> {
    let m = MomentModel::Gaussian(GaussianModel::new(Mat::identity(2))?);
    Criteria::new(m, NormalizerSeq::Sqrt2nLoglog, ClassifierConfig::default())
}

fn disk_sweep() -> Result<(bool, String)> {
    let c = disk()?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (r, want) in [
        (0.5, Membership::Member),
        (0.9, Membership::Member),
        (1.1, Membership::NonMember),
        (1.5, Membership::NonMember),
    ] {
        let got = c.point_membership(&[0.6 * r, 0.8 * r])?.overall;
        ok &= got == want;
        detail.push(format!("|x|={r}: {got:?}"));
    }
    let ks = k_sample(64)?;
    let f = GridFn::from_coordinates(&[ks[2].scaled(0.48), ks[5].scaled(0.64)])?;
    let got = c.function_membership(&f)?.overall;
    ok &= got == Membership::Member;
    detail.push(format!("(x1 g1, x2 g2): {got:?}"));
    let line = GridFn::from_fn(2, 64, |t| vec![1.2 * t, 0.0])?;
    let got = c.function_membership(&line)?.overall;
    ok &= got == Membership::NonMember;
    detail.push(format!("1.2(t,0): {got:?}"));
    Ok((ok, detail.join(", ")))
}

fn block_model() -> Result<(bool, String)> {
    let m = Example8Model::exact(StarSet::single(vec![1.0, 0.0])?);
    let checks = m.verify_block_identities(3);
    let failed = checks.iter().filter(|c| !c.pass).count();
    let q = m.q_mass_bound(commands::Q_ENUM);
    let probes = envelope_probes(3, 1000);
    let bad = probes.iter().filter(|p| !envelope_holds(p)).count();
    Ok((
        failed == 0 && q.below_half && bad == 0 && probes.len() == 1000,
        format!(
            "{}/{} identities, q-mass ≤ {:.6}, envelope {}/{} probes",
            checks.len() - failed,
            checks.len(),
            q.total_upper,
            probes.len() - bad,
            probes.len()
        ),
    ))
}

fn sandwich() -> Result<(bool, String)> {
    let t = Instant::now();
    let n = 10_000u64;
    let c_n = NormalizerSeq::Sqrt2nLoglog.c(n as f64);
    let rng = RngStream::new(2026, 8);
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, f) in [
        ("0", GridFn::zeros(1, 256)),
        ("t/2", GridFn::scalar_from_fn(256, |t| 0.5 * t)?),
    ] {
        let s = small_ball_sandwich(&f, 1.0, c_n, n, 0.5, 100_000, &rng)?;
        ok &= s.lower_ok && s.upper_ok && s.exact_lower_ok;
        detail.push(format!(
            "f={label}: {:.4} ≥ {:.4}, {:.4} ≤ {:.4}",
            s.outer.p_hat, s.bounds.lower, s.inner.p_hat, s.bounds.upper
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    detail.push(format!("{secs:.1} s"));
    Ok((ok && secs < 60.0, detail.join(", ")))
}

fn clustering() -> Result<(bool, String)> {
    let m = MomentModel::Gaussian(GaussianModel::new(Mat::identity(2))?);
    let cfg = SimulationConfig {
        snapshots: 0,
        ..Default::default()
    };
    let seq = NormalizerSeq::Sqrt2nLoglog;
    let a = run_simulation(&m, &seq, &cfg, 2026, 1)?;
    let b = run_simulation(&m, &seq, &cfg, 2026, 1)?;
    let r = a.net.max_norm();
    let s = sectors_visited(&a.net.points, 16, 0.5);
    Ok((
        r <= 1.3 && s >= 12 && a == b,
        format!("{} net points, max |p| = {r:.3}, {s}/16 sectors", a.net.points.len()),
    ))
}

fn symmetry() -> Result<(bool, String)> {
    let m = MomentModel::Gaussian(GaussianModel::new(Mat::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.5]])?)?);
    let c = Criteria::new(m, NormalizerSeq::Sqrt2nLoglog, ClassifierConfig::default())?;
    let ks = k_sample(32)?;
    let mut rng = RngStream::new(2026, 10);
    let mut bad = 0usize;
    for _ in 0..100 {
        let x = [1.6 * rng.symmetric_uniform(), 1.6 * rng.symmetric_uniform()];
        let nx = [-x[0], -x[1]];
        if c.point_membership(&x)?.overall != c.point_membership(&nx)?.overall {
            bad += 1;
        }
        let i = (rng.uniform() * 8.0) as usize % 8;
        let j = (rng.uniform() * 8.0) as usize % 8;
        let f = GridFn::from_coordinates(&[ks[i].scaled(x[0]), ks[j].scaled(x[1])])?;
        let vf = c.function_membership(&f)?;
        if vf.overall != c.function_membership(&f.scaled(-1.0))?.overall {
            bad += 1;
        }
        for lambda in [0.25, 0.5, 0.75] {
            let vl = c.function_membership(&f.scaled(lambda))?;
            for (a, b) in vf.verdicts.iter().zip(&vl.verdicts) {
                if a.class == SeriesClass::Divergent && b.class != SeriesClass::Divergent {
                    bad += 1;
                }
            }
        }
    }
    Ok((bad == 0, format!("{bad} violations over 100 queries")))
}

fn reproducible() -> Result<(bool, String)> {
    let root = std::env::temp_dir().join(format!(
        "limset-verify-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    ));
    std::fs::create_dir_all(&root)?;
    let cfg = root.join("config.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"kind": "gaussian", "cov": [[1, 0], [0, 1]]},
            "simulation": {"n_max": 100000, "replicas": 4, "snapshots": 4},
            "seed": 2026}"#,
    )?;
    let run = |workers: usize, dir: &str| -> Result<std::path::PathBuf> {
        let g = Globals {
            config: Some(cfg.clone()),
            out: Some(root.join(dir)),
            quiet: true,
            ..Default::default()
        };
        commands::simulate(
            &g,
            &SimulateArgs {
                streams: Some(workers),
                snapshot_csv: true,
                ..Default::default()
            },
        )?;
        Ok(root.join(dir))
    };
    let a = run(1, "w1")?;
    let b = run(4, "w4")?;
    let (same, files) = same_results(&a, &b)?;
    let _ = std::fs::remove_dir_all(&root);
    Ok((same, format!("{files} result files compared")))
}

/// Compares every file except the manifest, byte for byte.
pub fn same_results(a: &std::path::Path, b: &std::path::Path) -> Result<(bool, usize)> {
    fn walk(root: &std::path::Path, rel: &std::path::Path, out: &mut Vec<std::path::PathBuf>) -> Result<()> {
        for e in std::fs::read_dir(root.join(rel))? {
            let e = e?;
            let r = rel.join(e.file_name());
            if e.file_type()?.is_dir() {
                walk(root, &r, out)?;
            } else if r.as_os_str() != crate::cli::manifest::MANIFEST_FILE {
                out.push(r);
            }
        }
        Ok(())
    }
    let (mut fa, mut fb) = (Vec::new(), Vec::new());
    walk(a, std::path::Path::new(""), &mut fa)?;
    walk(b, std::path::Path::new(""), &mut fb)?;
    fa.sort();
    fb.sort();
    if fa != fb {
        return Ok((false, fa.len()));
    }
    for f in &fa {
        if std::fs::read(a.join(f))? != std::fs::read(b.join(f))? {
            return Ok((false, fa.len()));
        }
    }
    Ok((true, fa.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_groups() {
        let r = run(Some("strassen"));
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|c| c.passed), "{r:?}");
    }

    #[test]
    fn random_basis_is_orthonormal() {
        let b = random_basis(&mut RngStream::new(1, 1), 4);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&b[i], &b[j]) - want).abs() < 1e-12);
            }
        }
    }
}
