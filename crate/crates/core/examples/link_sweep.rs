//! Beam-swept link over an SNR grid: designed rate codebook against beam
//! steering, with noisy and noiseless beam selection.
//!
//! cargo run --release --example link_sweep

use lloyd_beam::baselines::{beam_steering_codebook, equispaced_ula_directions};
use lloyd_beam::channel::{generate_training_set, seeded_rng};
use lloyd_beam::eval::{link_summary_csv, run_link_experiment, LinkConfig};
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
    let lb = lloyd_design(&train, &Metric::rate(), &LloydConfig::new(4).with_seed(7))?.codebook;
    let steer = beam_steering_codebook(&geom, &equispaced_ula_directions(4)?)?;

    for (name, cb) in [("designed", lb), ("steering", steer)] {
        for noiseless in [false, true] {
            let mut cfg = LinkConfig::receive_only(geom, cb.clone());
            cfg.channel = ChannelParams::nlos();
            cfg.snr_db = vec![-20.0, -10.0, 0.0, 5.0, 10.0];
            cfg.trials = 20_000;
            cfg.gammas = vec![1.0];
            cfg.noiseless_selection = noiseless;
            let reports = run_link_experiment(&cfg)?;
            println!(
                "# {name}, {} selection",
                if noiseless { "noiseless" } else { "swept" }
            );
            print!("{}", link_summary_csv(&reports));
        }
    }
    Ok(())
}
