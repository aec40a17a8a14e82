//! `α₀` and coordinate constants for a few models and normalizers.

use limset::criteria::{ClassifierConfig, Criteria, NormalizerSeq};
use limset::linalg::Mat;
use limset::models::{CoordinateLaw, Example8Model, GaussianModel, IndependentModel, MomentModel, StarSet};

fn main() -> limset::Result<()> {
    let cases = [
        (
            "gaussian, cov diag(1, 1/4)",
            MomentModel::Gaussian(GaussianModel::new(Mat::diag(&[1.0, 0.25]))?),
            NormalizerSeq::Sqrt2nLoglog,
        ),
        (
            "gaussian, faster normalizer",
            MomentModel::Gaussian(GaussianModel::new(Mat::identity(1))?),
            NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 },
        ),
        (
            "independent normal(2) x rademacher(1)",
            MomentModel::Independent(IndependentModel::new(vec![
                CoordinateLaw::Normal { sigma: 2.0 },
                CoordinateLaw::Rademacher { scale: 1.0 },
            ])?),
            NormalizerSeq::Sqrt2nLoglog,
        ),
        (
            "block model, exact",
            MomentModel::Example8(Example8Model::exact(StarSet::single(vec![1.0, 0.0])?)),
            NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 },
        ),
    ];
    for (name, model, seq) in cases {
        let c = Criteria::new(model, seq, ClassifierConfig::default())?;
        let a = c.alpha0()?;
        let coords: Vec<String> = c
            .coordinate_alphas()?
            .iter()
            .map(|e| format!("{:.3}", e.estimate))
            .collect();
        println!(
            "{name:40} alpha0 = {:.3} in [{:.3}, {:.3}]  alpha_i = [{}]",
            a.estimate,
            a.lower,
            a.upper,
            coords.join(", ")
        );
    }
    Ok(())
}
