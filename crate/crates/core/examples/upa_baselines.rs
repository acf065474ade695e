//! 2x2 UPA: tabulated steering codebooks against designed ones, with CDF
//! reports written to disk.
//!
//! cargo run --release --example upa_baselines

use lloyd_beam::baselines::{beam_steering_codebook, upa2x2_steering_spec, PairOrder};
use lloyd_beam::channel::{generate_training_set, seeded_rng};
use lloyd_beam::eval::{run_spatial_response_experiment, write_report, SpatialConfig};
use lloyd_beam::lloyd::lloyd_design;
use lloyd_beam::{AngleRange, ArrayGeometry, ChannelParams, LloydConfig, Metric};

fn main() -> lloyd_beam::Result<()> {
    let geom = ArrayGeometry::upa(2, 2);
    let phi = AngleRange::upper_azimuth();
    let params = ChannelParams::single_ray().with_ranges(AngleRange::full_zenith(), phi);
    let train = generate_training_set(&params, &geom, 2000, &mut seeded_rng(1));
    let out = std::env::temp_dir().join("lloyd_beam_upa");

    for k in [3, 4] {
        let table = beam_steering_codebook(&geom, &upa2x2_steering_spec(k, PairOrder::ThetaPhi)?)?;
        let designed = lloyd_design(
            &train,
            &Metric::coverage(3.0, 8.0)?,
            &LloydConfig::new(k).with_seed(7),
        )?
        .codebook;
        for (name, cb) in [("table", table), ("designed", designed)] {
            let mut cfg = SpatialConfig::new(geom, cb);
            cfg.phi_range = phi;
            cfg.trials = 50_000;
            cfg.gammas = vec![2.0, 3.0];
            let r = run_spatial_response_experiment(&cfg)?;
            println!(
                "K={k} {name:>8}: mean {:.3}, 3dB-outage {:.1}%, 3/4-outage {:.1}%",
                r.mean_gain,
                100.0 * r.outage_at(2.0).unwrap(),
                100.0 * r.outage_at(3.0).unwrap()
            );
            write_report(&r, out.join(format!("k{k}_{name}")))?;
        }
    }
    println!("reports under {}", out.display());
    Ok(())
}
