//! Point and function verdicts for a correlated planar Gaussian, with the
//! per-ε classifications and the flip point.

use limset::criteria::{ClassifierConfig, Criteria, MembershipVerdict, NormalizerSeq};
use limset::grid::GridFn;
use limset::linalg::Mat;
use limset::models::{GaussianModel, MomentModel};
use limset::strassen::k_sample;

fn show(label: &str, v: &MembershipVerdict) {
    let per: Vec<String> = v
        .verdicts
        .iter()
        .map(|e| format!("{}:{:?}", e.epsilon, e.class))
        .collect();
    println!("{label:28} {:?}  eps* = {:?}  [{}]", v.overall, v.epsilon_star, per.join(" "));
}

fn main() -> limset::Result<()> {
    let cov = Mat::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]])?;
    let c = Criteria::new(
        MomentModel::Gaussian(GaussianModel::new(cov)?),
        NormalizerSeq::Sqrt2nLoglog,
        ClassifierConfig::default(),
    )?;
    // the limit set is the ellipse x' cov^{-1} x <= 1
    for x in [[0.5, 0.5], [0.8, 0.8], [0.8, -0.8], [1.2, 0.0]] {
        show(&format!("x = {x:?}"), &c.point_membership(&x)?);
    }
    let ks = k_sample(64)?;
    let f = GridFn::from_coordinates(&[ks[1].scaled(0.6), ks[1].scaled(0.6)])?;
    show("f = 0.6 (g, g)", &c.function_membership(&f)?);
    let f = GridFn::from_coordinates(&[ks[1].scaled(0.6), ks[6].scaled(-0.6)])?;
    show("f = 0.6 (g, -h)", &c.function_membership(&f)?);
    Ok(())
}
