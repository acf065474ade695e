//! Trading average gain against outage: two-beam ULA codebooks designed for
//! a range of coverage thresholds.
//!
//! cargo run --release --example coverage_design

use lloyd_beam::channel::{generate_training_set, seeded_rng};
use lloyd_beam::eval::{run_spatial_response_experiment, SpatialConfig};
use lloyd_beam::lloyd::lloyd_design;
use lloyd_beam::{ArrayGeometry, ChannelParams, LloydConfig, Metric};

fn main() -> lloyd_beam::Result<()> {
    let geom = ArrayGeometry::ula(8);
    let train = generate_training_set(
        &ChannelParams::single_ray(),
        &geom,
        2000,
        &mut seeded_rng(1),
    );
    let report_at = vec![1.0, 1.5, 2.0, 2.5, 3.0];

    println!("design       mean   J_out(1)  J_out(1.5)  J_out(2)  J_out(2.5)  J_out(3)");
    let mut designs = vec![("avg".to_string(), Metric::avg_gain())];
    for g in [1.0, 1.5, 2.0, 2.5, 3.0] {
        designs.push((format!("gamma={g}"), Metric::coverage(g, 8.0)?));
    }
    for (name, m) in designs {
        let mut cfg = LloydConfig::new(2).with_seed(7);
        cfg.step_size = 0.5;
        let cb = lloyd_design(&train, &m, &cfg)?.codebook;
        let mut sc = SpatialConfig::new(geom, cb);
        sc.trials = 50_000;
        sc.gammas = report_at.clone();
        let r = run_spatial_response_experiment(&sc)?;
        let cols: Vec<String> = r
            .outage
            .iter()
            .map(|t| format!("{:>8.1}%", 100.0 * t.fraction))
            .collect();
        println!("{name:<10} {:>6.3}  {}", r.mean_gain, cols.join("  "));
    }
    Ok(())
}
