//! Two-dimensional standard Gaussian walk: δ-net of `S_n / c_n` over the
//! tail window and the angular coverage of the unit circle.

use limset::criteria::NormalizerSeq;
use limset::linalg::Mat;
use limset::models::{GaussianModel, MomentModel};
use limset::sim::cluster::sectors_visited;
use limset::sim::{run_simulation, SimulationConfig};

fn main() -> limset::Result<()> {
    let model = MomentModel::Gaussian(GaussianModel::new(Mat::identity(2))?);
    let cfg = SimulationConfig {
        snapshots: 0,
        ..Default::default()
    };
    let t = std::time::Instant::now();
    let r = run_simulation(&model, &NormalizerSeq::Sqrt2nLoglog, &cfg, 2026, 1)?;
    println!("net points     {}", r.net.points.len());
    println!("max |point|    {:.4}", r.net.max_norm());
    println!("sectors (0.5)  {}/16", sectors_visited(&r.net.points, 16, 0.5));
    println!("elapsed        {:.2?}", t.elapsed());
    Ok(())
}
