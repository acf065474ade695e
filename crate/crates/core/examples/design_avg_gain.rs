//! Average-gain codebook for an 8-element ULA, compared with equispaced beam
//! steering on the same number of beams.
//!
//! cargo run --release --example design_avg_gain

use lloyd_beam::baselines::{beam_steering_codebook, equispaced_ula_directions};
use lloyd_beam::channel::{generate_training_set, seeded_rng};
use lloyd_beam::eval::{run_spatial_response_experiment, SpatialConfig};
use lloyd_beam::io::write_codebook;
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
    let res = lloyd_design(
        &train,
        &Metric::avg_gain(),
        &LloydConfig::new(4).with_seed(7),
    )?;
    println!(
        "objective {:.4} after {} iterations; restarts {:?}",
        res.objective(),
        res.objective_history.len(),
        res.restart_objectives
    );

    let steer = beam_steering_codebook(&geom, &equispaced_ula_directions(4)?)?;
    for (name, cb) in [("designed", res.codebook.clone()), ("steering", steer)] {
        let mut cfg = SpatialConfig::new(geom, cb);
        cfg.trials = 50_000;
        let r = run_spatial_response_experiment(&cfg)?;
        println!(
            "{name:>9}: mean {:.3} ({:.2} dB), min {:.3}",
            r.mean_gain, r.mean_gain_db, r.min_gain
        );
    }

    let path = std::env::temp_dir().join("lloyd_beam_avg_k4.txt");
    write_codebook(&res.codebook, &path)?;
    println!("codebook written to {}", path.display());
    Ok(())
}
