//! Minimal-energy functions in shrinking sup-norm tubes around a random
//! walk, with the energy of the taut string and the distance to `αK`.

use limset::grid::GridFn;
use limset::sim::RngStream;
use limset::strassen::{dirichlet_energy, dist_to_scaled_strassen, taut_string};

fn main() -> limset::Result<()> {
    let n = 128;
    let mut rng = RngStream::new(2026, 1);
    let mut v = vec![0.0];
    for _ in 0..n {
        let last = v[v.len() - 1];
        v.push(last + rng.normal() / (n as f64).sqrt());
    }
    let g = GridFn::scalar(v)?;
    println!("I(g) = {:.6}, |g| = {:.4}", dirichlet_energy(&g)?.value, g.sup_norm());
    for eps in [0.3, 0.1, 0.05, 0.01] {
        let sol = taut_string(&g, eps)?;
        let kinks = sol
            .minimizer
            .scalar_values()?
            .windows(3)
            .filter(|w| ((w[2] - w[1]) - (w[1] - w[0])).abs() > 1e-12)
            .count();
        println!("eps = {eps:<5} I(g_eps) = {:.6}  kinks = {kinks}", sol.energy.value);
    }
    for alpha in [0.5, 1.0, 2.0] {
        println!("dist(g, {alpha}K) = {:.6}", dist_to_scaled_strassen(&g, alpha)?);
    }
    Ok(())
}
