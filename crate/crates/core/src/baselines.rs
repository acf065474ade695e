//! Reference codebooks: beam steering, DFT, the hand-picked 2x2 UPA
//! steering sets, and the omni-directional reference level.

use crate::array::{ArrayGeometry, Codebook, Codeword, Direction};
use crate::error::{Error, Result};

/// Ordered steering directions, one per codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringSpec {
    directions: Vec<Direction>,
}

impl SteeringSpec {
    pub fn new(directions: Vec<Direction>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::domain("steering spec needs at least one direction"));
        }
        Ok(Self { directions })
    }

    /// From `(theta, phi)` pairs in degrees.
    pub fn from_degrees(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(t, p)| Direction::from_degrees(t, p))
                .collect::<Result<_>>()?,
        )
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }
}

/// Codeword `k` is `v(direction_k)/√N`.
pub fn beam_steering_codebook(geom: &ArrayGeometry, spec: &SteeringSpec) -> Result<Codebook> {
    Codebook::new(
        spec.directions
            .iter()
            .map(|&d| Codeword::matched(&geom.steering_vector(d)))
            .collect::<Result<_>>()?,
    )
}

/// `k` zenith angles with `cos θ_m = -1 + (2m - 1)/k`, `m = 1..=k`.
pub fn equispaced_ula_directions(k: usize) -> Result<SteeringSpec> {
    if k == 0 {
        return Err(Error::domain("need at least one direction"));
    }
    let dirs = (1..=k)
        .map(|m| {
            let c = (-1.0 + (2 * m - 1) as f64 / k as f64).clamp(-1.0, 1.0);
            Direction::zenith(c.acos())
        })
        .collect::<Result<_>>()?;
    SteeringSpec::new(dirs)
}

/// `n`-beam DFT codebook of a half-wavelength `n`-element ULA.
pub fn dft_codebook(n: usize) -> Result<Codebook> {
    beam_steering_codebook(&ArrayGeometry::ula(n), &equispaced_ula_directions(n)?)
}

/// How the printed 2x2 UPA angle pairs are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairOrder {
    /// First value is the zenith angle, as labelled.
    #[default]
    ThetaPhi,
    /// First value is the azimuth.
    PhiTheta,
}

const TABLE_3: [(f64, f64); 3] = [(90.0, 35.3), (120.0, 19.5), (60.0, 19.5)];
const TABLE_4: [(f64, f64); 4] = [(90.0, 0.0), (41.4, 40.9), (90.0, 60.0), (138.6, 40.9)];

/// Hand-picked steering directions (degrees) for a 2x2 UPA with 3 or 4 codewords.
pub fn upa2x2_steering_spec(k: usize, order: PairOrder) -> Result<SteeringSpec> {
    let table: &[(f64, f64)] = match k {
        3 => &TABLE_3,
        4 => &TABLE_4,
        _ => {
            return Err(Error::domain(format!(
                "no 2x2 steering table for {k} codewords"
            )))
        }
    };
    let pairs: Vec<(f64, f64)> = match order {
        PairOrder::ThetaPhi => table.to_vec(),
        PairOrder::PhiTheta => table.iter().map(|&(a, b)| (b, a)).collect(),
    };
    SteeringSpec::from_degrees(&pairs)
}

/// Spatial response of the ideal omni-directional reference: 1 everywhere.
pub fn omni_reference() -> f64 {
    1.0
}
