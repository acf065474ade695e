//! Ricean LOS + NLOS channel generation.
//!
//! A vector sample is
//!
//! ```text
//! h = sqrt(κ/(κ+1)) v(θ⁰, φ⁰) + sqrt(1/(I(κ+1))) Σᵢ αᵢ v(θⁱ, φⁱ),   αᵢ ~ CN(0, 1)
//! ```
//!
//! and a matrix sample replaces each `v` with the outer product `v_R v_Tᴴ`.
//! `κ = ∞` gives the single-ray channel used for training.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, Direction};
use crate::error::{Error, Result};

/// The generator threaded through every sampling routine.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Closed angle interval in radians; directions are drawn uniformly from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub lo: f64,
    pub hi: f64,
}

impl AngleRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::domain(format!("bad angle range [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn degrees(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo.to_radians(), hi.to_radians())
    }

    /// Zenith range `[0, π]`.
    pub fn full_zenith() -> Self {
        Self { lo: 0.0, hi: PI }
    }

    /// Azimuth range `[-π/2, π/2]`.
    pub fn front_azimuth() -> Self {
        Self {
            lo: -FRAC_PI_2,
            hi: FRAC_PI_2,
        }
    }

    /// Azimuth range `[0, π]`.
    pub fn upper_azimuth() -> Self {
        Self { lo: 0.0, hi: PI }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + (self.hi - self.lo) * rng.random::<f64>()
    }

    /// `n` evenly spaced points including both ends (just `lo` for `n == 1`).
    pub fn grid(&self, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![self.lo],
            _ => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Ricean K-factor; `f64::INFINITY` means LOS only.
    pub kappa: f64,
    /// Number of NLOS paths `I`.
    pub n_nlos: usize,
    pub theta_range: AngleRange,
    pub phi_range: AngleRange,
}

impl ChannelParams {
    pub fn new(
        kappa: f64,
        n_nlos: usize,
        theta_range: AngleRange,
        phi_range: AngleRange,
    ) -> Result<Self> {
        let p = Self {
            kappa,
            n_nlos,
            theta_range,
            phi_range,
        };
        p.validate()?;
        Ok(p)
    }

    /// Dominant-LOS scenario: κ = 100, five NLOS paths.
    pub fn los() -> Self {
        Self {
            kappa: 100.0,
            n_nlos: 5,
            theta_range: AngleRange::full_zenith(),
            phi_range: AngleRange::front_azimuth(),
        }
    }

    /// Rich-scattering scenario: κ = 1, five NLOS paths.
    pub fn nlos() -> Self {
        Self {
            kappa: 1.0,
            ..Self::los()
        }
    }

    /// Pure steering vectors with uniform arrival angles.
    pub fn single_ray() -> Self {
        Self {
            kappa: f64::INFINITY,
            n_nlos: 0,
            ..Self::los()
        }
    }

    pub fn with_ranges(mut self, theta_range: AngleRange, phi_range: AngleRange) -> Self {
        self.theta_range = theta_range;
        self.phi_range = phi_range;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa.is_nan() || self.kappa < 0.0 {
            return Err(Error::config(
                "kappa",
                format!("must be >= 0, got {}", self.kappa),
            ));
        }
        if self.kappa == 0.0 && self.n_nlos == 0 {
            return Err(Error::config(
                "nlos",
                "kappa = 0 needs at least one NLOS path",
            ));
        }
        let t = self.theta_range;
        if t.lo < 0.0 || t.hi > PI {
            return Err(Error::config(
                "theta-range",
                "theta must lie in [0, 180] degrees",
            ));
        }
        let p = self.phi_range;
        if p.lo < -PI || p.hi > PI {
            return Err(Error::config(
                "phi-range",
                "phi must lie in [-180, 180] degrees",
            ));
        }
        Ok(())
    }

    /// Amplitude weights `(LOS, per-NLOS-path)`.
    fn path_weights(&self) -> (f64, f64) {
        if self.kappa.is_infinite() {
            return (1.0, 0.0);
        }
        let los = (self.kappa / (self.kappa + 1.0)).sqrt();
        let nlos = if self.n_nlos == 0 {
            0.0
        } else {
            (1.0 / (self.n_nlos as f64 * (self.kappa + 1.0))).sqrt()
        };
        (los, nlos)
    }

    fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        Direction {
            theta: self.theta_range.sample(rng),
            phi: self.phi_range.sample(rng),
        }
    }
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Receive-side channel vector of length `N`.
pub fn sample_channel_vector<R: Rng + ?Sized>(
    params: &ChannelParams,
    geom: &ArrayGeometry,
    rng: &mut R,
) -> Vec<Complex64> {
    let (w_los, w_nlos) = params.path_weights();
    let mut h: Vec<Complex64> = geom
        .steering_vector(params.sample_direction(rng))
        .into_iter()
        .map(|z| z * w_los)
        .collect();
    for _ in 0..params.n_nlos {
        let alpha = complex_gaussian(rng) * w_nlos;
        let v = geom.steering_vector(params.sample_direction(rng));
        for (hn, vn) in h.iter_mut().zip(v) {
            *hn += alpha * vn;
        }
    }
    h
}

/// Dense row-major `rows x cols` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// `scale · a bᴴ`.
    pub fn outer(a: &[Complex64], b: &[Complex64], scale: Complex64) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        m.add_outer(a, b, scale);
        m
    }

    fn add_outer(&mut self, a: &[Complex64], b: &[Complex64], scale: Complex64) {
        for (r, ar) in a.iter().enumerate() {
            let s = scale * ar;
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (x, bc) in row.iter_mut().zip(b) {
                *x += s * bc.conj();
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `H x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `N_R x N_T` channel matrix with independent Rx and Tx angles per path.
pub fn sample_channel_matrix<R: Rng + ?Sized>(
    params: &ChannelParams,
    geom_rx: &ArrayGeometry,
    geom_tx: &ArrayGeometry,
    rng: &mut R,
) -> ChannelMatrix {
    let (w_los, w_nlos) = params.path_weights();
    let v_r = geom_rx.steering_vector(params.sample_direction(rng));
    let v_t = geom_tx.steering_vector(params.sample_direction(rng));
    let mut h = ChannelMatrix::outer(&v_r, &v_t, Complex64::new(w_los, 0.0));
    for _ in 0..params.n_nlos {
        let alpha = complex_gaussian(rng) * w_nlos;
        let v_r = geom_rx.steering_vector(params.sample_direction(rng));
        let v_t = geom_tx.steering_vector(params.sample_direction(rng));
        h.add_outer(&v_r, &v_t, alpha);
    }
    h
}

/// `count` i.i.d. vector samples.
pub fn generate_training_set<R: Rng + ?Sized>(
    params: &ChannelParams,
    geom: &ArrayGeometry,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    (0..count)
        .map(|_| sample_channel_vector(params, geom, rng))
        .collect()
}
