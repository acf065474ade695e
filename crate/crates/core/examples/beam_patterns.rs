//! Beam patterns of steering codewords and the effective response of the
//! DFT codebook on an 8-element ULA.
//!
//! cargo run --release --example beam_patterns

use lloyd_beam::array::{beam_pattern, effective_spatial_response};
use lloyd_beam::baselines::dft_codebook;
use lloyd_beam::{ArrayGeometry, Codeword, Direction};

fn main() -> lloyd_beam::Result<()> {
    let geom = ArrayGeometry::ula(8);
    let target = Direction::from_degrees(60.0, 0.0)?;
    let w = Codeword::matched(&geom.steering_vector(target))?;
    let dft = dft_codebook(8)?;

    println!("theta_deg  steer@60   dft_effective");
    for deg in (0..=180).step_by(10) {
        let d = Direction::from_degrees(deg as f64, 0.0)?;
        let (best, idx) = effective_spatial_response(&dft, &geom, d)?;
        println!(
            "{deg:>9}  {:>8.3}  {best:>8.3} (k={idx})",
            beam_pattern(&w, &geom, d)?
        );
    }

    // A planar array steers in both angles.
    let upa = ArrayGeometry::upa(4, 4);
    let d = Direction::from_degrees(70.0, 30.0)?;
    let w = Codeword::matched(&upa.steering_vector(d))?;
    println!(
        "4x4 UPA steered at (70, 30): peak gain {:.3}",
        beam_pattern(&w, &upa, d)?
    );
    Ok(())
}
