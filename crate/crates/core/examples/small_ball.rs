//! Small-ball frequencies of a scaled Brownian path against the
//! exponential bounds, for `f = 0` and `f = t/2`.

use limset::criteria::NormalizerSeq;
use limset::grid::GridFn;
use limset::sim::{small_ball_sandwich, RngStream};

fn main() -> limset::Result<()> {
    let n = 10_000u64;
    let c_n = NormalizerSeq::Sqrt2nLoglog.c(n as f64);
    let rng = RngStream::new(2026, 8);
    for (label, f) in [
        ("0", GridFn::zeros(1, 256)),
        ("t/2", GridFn::scalar_from_fn(256, |t| 0.5 * t)?),
    ] {
        let s = small_ball_sandwich(&f, 1.0, c_n, n, 0.5, 100_000, &rng)?;
        println!(
            "f = {label:4} I(f_eps) = {:.4}  P(<1.0) = {:.4} ± {:.4} >= {:.4} (exact {:.4})  P(<0.5) = {:.4} ± {:.4} <= {:.4}  {}",
            s.bounds.energy,
            s.outer.p_hat,
            s.outer.se,
            s.bounds.lower,
            s.bounds.exact_lower,
            s.inner.p_hat,
            s.inner.se,
            s.bounds.upper,
            if s.holds() { "ok" } else { "violated" }
        );
    }
    Ok(())
}
