//! Distribution function of positive combinations of chi-square variables,
//! `P(Σ a_j χ²_{ν_j} ≤ y)`, by Ruben's mixture-of-chi-squares series.

use statrs::function::gamma::gamma_lr;

const MAX_TERMS: usize = 20_000;

/// `terms` holds `(a_j, ν_j)` with `a_j > 0`.
pub fn gen_chisq_cdf(terms: &[(f64, f64)], y: f64) -> f64 {
    let terms: Vec<(f64, f64)> = terms.iter().copied().filter(|(a, _)| *a > 0.0).collect();
    if y <= 0.0 {
        return 0.0;
    }
    if terms.is_empty() {
        return 1.0;
    }
    let beta = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
    let nu: f64 = terms.iter().map(|t| t.1).sum();
    let z = y / beta;
    let chi_cdf = |dof: f64| gamma_lr(dof / 2.0, z / 2.0);
    let c0 = terms
        .iter()
        .map(|(a, v)| 0.5 * v * (beta / a).ln())
        .sum::<f64>()
        .exp();
    let ratios: Vec<(f64, f64)> = terms.iter().map(|(a, v)| (1.0 - beta / a, *v)).collect();
    let g = |m: usize| -> f64 { ratios.iter().map(|(r, v)| v * r.powi(m as i32)).sum() };

    let mut cs = vec![c0];
    let mut gs = vec![0.0];
    let mut cum = c0;
    let mut total = c0 * chi_cdf(nu);
    for k in 1..MAX_TERMS {
        gs.push(g(k));
        let ck = (0..k).map(|r| gs[k - r] * cs[r]).sum::<f64>() / (2 * k) as f64;
        cs.push(ck);
        cum += ck;
        let f = chi_cdf(nu + 2.0 * k as f64);
        total += ck * f;
        // remaining mass times an upper bound of the remaining cdf factors
        if (1.0 - cum).max(0.0) * f < 1e-15 {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn single_term_is_plain_chi_square() {
        let d = ChiSquared::new(3.0).unwrap();
        for y in [0.5, 2.0, 7.0] {
            let p = gen_chisq_cdf(&[(2.0, 3.0)], y);
            assert!((p - d.cdf(y / 2.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn equal_weights_merge_degrees() {
        let d = ChiSquared::new(4.0).unwrap();
        let p = gen_chisq_cdf(&[(1.5, 1.0), (1.5, 3.0)], 5.0);
        assert!((p - d.cdf(5.0 / 1.5)).abs() < 1e-13);
    }

    #[test]
    fn unequal_weights_match_exponential_closed_form() {
        // a χ²_2 + b χ²_2 is a sum of exponentials with means 2a, 2b
        let (a, b, y): (f64, f64, f64) = (1.0, 3.0, 4.0);
        let (la, lb) = (1.0 / (2.0 * a), 1.0 / (2.0 * b));
        let exact = 1.0 - (lb * (-la * y).exp() - la * (-lb * y).exp()) / (lb - la);
        let p = gen_chisq_cdf(&[(a, 2.0), (b, 2.0)], y);
        assert!((p - exact).abs() < 1e-12, "{p} vs {exact}");
    }
}
