//! Ricean channel samples for the LOS and NLOS presets, and a training set
//! written to disk.
//!
//! cargo run --release --example ricean_channel

use lloyd_beam::channel::{
    generate_training_set, sample_channel_matrix, sample_channel_vector, seeded_rng,
};
use lloyd_beam::io::{read_training_set, write_training_set};
use lloyd_beam::{ArrayGeometry, ChannelParams};

fn main() -> lloyd_beam::Result<()> {
    let geom = ArrayGeometry::ula(8);
    let mut rng = seeded_rng(3);
    for (name, p) in [
        ("LOS", ChannelParams::los()),
        ("NLOS", ChannelParams::nlos()),
        ("single-ray", ChannelParams::single_ray()),
    ] {
        let power: f64 = (0..20_000)
            .map(|_| {
                sample_channel_vector(&p, &geom, &mut rng)
                    .iter()
                    .map(|x| x.norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / 20_000.0;
        println!(
            "{name:>10}: kappa {}, {} NLOS paths, mean |h|^2 = {power:.3} (N = 8)",
            p.kappa, p.n_nlos
        );
    }

    let h = sample_channel_matrix(
        &ChannelParams::los(),
        &ArrayGeometry::ula(4),
        &ArrayGeometry::ula(2),
        &mut rng,
    );
    println!("4x2 channel matrix, |H|_F^2 = {:.3}", h.frobenius_sq());

    let train = generate_training_set(&ChannelParams::single_ray(), &geom, 1000, &mut rng);
    let path = std::env::temp_dir().join("lloyd_beam_training.txt");
    write_training_set(&train, &path)?;
    let back = read_training_set(&path)?;
    println!(
        "wrote {} training vectors to {}; reread {}",
        train.len(),
        path.display(),
        back.len()
    );
    Ok(())
}
