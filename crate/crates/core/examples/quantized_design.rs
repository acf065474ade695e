//! Codebooks for B-bit phase shifters on 2x2 and 4x4 planar arrays, and the
//! average-gain loss relative to ideal phases.
//!
//! cargo run --release --example quantized_design

use lloyd_beam::channel::{generate_training_set, seeded_rng};
use lloyd_beam::eval::{run_spatial_response_experiment, SpatialConfig};
use lloyd_beam::lloyd::{lloyd_design, on_grid};
use lloyd_beam::{ArrayGeometry, ChannelParams, LloydConfig, Metric};

fn main() -> lloyd_beam::Result<()> {
    for (geom, k) in [(ArrayGeometry::upa(2, 2), 4), (ArrayGeometry::upa(4, 4), 8)] {
        let train = generate_training_set(
            &ChannelParams::single_ray(),
            &geom,
            2000,
            &mut seeded_rng(1),
        );
        let mut ideal = None;
        for bits in [None, Some(1), Some(2), Some(3), Some(5)] {
            let mut cfg = LloydConfig::new(k)
                .with_seed(7)
                .with_restarts(10)
                .with_bits(bits);
            cfg.step_size = 0.5;
            let cb = lloyd_design(&train, &Metric::avg_gain(), &cfg)?.codebook;
            if let Some(b) = bits {
                assert!(on_grid(&cb, b, 1e-9));
            }
            let mut sc = SpatialConfig::new(geom, cb);
            sc.trials = 50_000;
            let mean = run_spatial_response_experiment(&sc)?.mean_gain;
            let base = *ideal.get_or_insert(mean);
            let label = bits.map_or("ideal".to_string(), |b| format!("{b}-bit"));
            println!(
                "{}x{} K={k} {label:>6}: mean gain {mean:.3}, loss {:.1}%",
                geom.n_v(),
                geom.n_h(),
                100.0 * (1.0 - mean / base)
            );
        }
    }
    Ok(())
}
