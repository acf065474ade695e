//! Array geometry, steering vectors and beam patterns.
//!
//! Elements sit on an `n_v x n_h` grid in the y-z plane. A direction is a
//! zenith angle `theta` and an azimuth `phi`; the phase offset of element
//! `(i_v, i_h)` (zero-based here) is
//!
//! ```text
//! 2π (i_v · d_v cosθ + i_h · d_h sinθ sinφ)
//! ```
//!
//! with spacings expressed in wavelengths. All vectors are flattened with the
//! vertical index running fastest, for steering vectors and codewords alike.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform linear (`n_h == 1`) or planar array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n_v: usize,
    n_h: usize,
    d_v: f64,
    d_h: f64,
}

impl ArrayGeometry {
    pub fn new(n_v: usize, n_h: usize, d_v_over_lambda: f64, d_h_over_lambda: f64) -> Result<Self> {
        if n_v == 0 || n_h == 0 {
            return Err(Error::config(
                "geometry",
                "element counts must be at least 1",
            ));
        }
        for (name, d) in [
            ("spacing.v", d_v_over_lambda),
            ("spacing.h", d_h_over_lambda),
        ] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::config(
                    name,
                    format!("spacing must be positive, got {d}"),
                ));
            }
        }
        Ok(Self {
            n_v,
            n_h,
            d_v: d_v_over_lambda,
            d_h: d_h_over_lambda,
        })
    }

    /// Half-wavelength ULA with `n` elements along the vertical axis.
    pub fn ula(n: usize) -> Self {
        Self::new(n, 1, 0.5, 0.5).expect("ula needs n >= 1")
    }

    /// Half-wavelength `n_v x n_h` UPA.
    pub fn upa(n_v: usize, n_h: usize) -> Self {
        Self::new(n_v, n_h, 0.5, 0.5).expect("upa needs nonzero dimensions")
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn d_v_over_lambda(&self) -> f64 {
        self.d_v
    }

    pub fn d_h_over_lambda(&self) -> f64 {
        self.d_h
    }

    /// Total element count `N`.
    pub fn len(&self) -> usize {
        self.n_v * self.n_h
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_linear(&self) -> bool {
        self.n_h == 1
    }

    /// Phase offset of element `(idx_v, idx_h)`, both 1-based.
    pub fn phase_offset(&self, dir: Direction, idx_v: usize, idx_h: usize) -> Result<Complex64> {
        if !(1..=self.n_v).contains(&idx_v) || !(1..=self.n_h).contains(&idx_h) {
            return Err(Error::domain(format!(
                "element index ({idx_v}, {idx_h}) outside 1..={} x 1..={}",
                self.n_v, self.n_h
            )));
        }
        let (cv, ch) = self.phase_rates(dir);
        Ok(Complex64::cis(
            (idx_v - 1) as f64 * cv + (idx_h - 1) as f64 * ch,
        ))
    }

    /// Phase increments per vertical and per horizontal step.
    fn phase_rates(&self, dir: Direction) -> (f64, f64) {
        (
            TAU * self.d_v * dir.theta.cos(),
            TAU * self.d_h * dir.theta.sin() * dir.phi.sin(),
        )
    }

    /// Steering vector `v(θ, φ)`: unit-modulus entries, vertical index fastest.
    pub fn steering_vector(&self, dir: Direction) -> Vec<Complex64> {
        let (cv, ch) = self.phase_rates(dir);
        let mut v = Vec::with_capacity(self.len());
        for ih in 0..self.n_h {
            for iv in 0..self.n_v {
                v.push(Complex64::cis(iv as f64 * cv + ih as f64 * ch));
            }
        }
        v
    }
}

/// Arrival direction: zenith angle `theta ∈ [0, π]` and azimuth `phi ∈ [-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::domain(format!("theta {theta} outside [0, π]")));
        }
        if !(-PI..=PI).contains(&phi) {
            return Err(Error::domain(format!("phi {phi} outside [-π, π]")));
        }
        Ok(Self { theta, phi })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// Zenith-only direction for linear arrays.
    pub fn zenith(theta: f64) -> Result<Self> {
        Self::new(theta, 0.0)
    }
}

/// A constant-modulus weight vector `w = e^{jθ}/√N`.
///
/// Phases are stored wrapped to `[0, 2π)` next to the complex weights they
/// imply, so inner products never recompute trig functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    phases: Vec<f64>,
    weights: Vec<Complex64>,
}

impl Codeword {
    pub fn from_phases(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::domain("codeword needs at least one element"));
        }
        if let Some(p) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::domain(format!("non-finite phase {p}")));
        }
        let phases: Vec<f64> = phases.into_iter().map(wrap_phase).collect();
        let amp = 1.0 / (phases.len() as f64).sqrt();
        let weights = phases
            .iter()
            .map(|&p| Complex64::from_polar(amp, p))
            .collect();
        Ok(Self { phases, weights })
    }

    /// Codeword whose phases follow those of `h`; maximizes `|wᴴh|²` over
    /// the constant-modulus set. Zero entries get phase 0.
    pub fn matched(h: &[Complex64]) -> Result<Self> {
        Self::from_phases(
            h.iter()
                .map(|z| if z.norm_sqr() > 0.0 { z.arg() } else { 0.0 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `wᴴh`. Callers guarantee `h.len() == self.len()`.
    #[inline]
    pub fn inner(&self, h: &[Complex64]) -> Complex64 {
        debug_assert_eq!(h.len(), self.weights.len());
        self.weights
            .iter()
            .zip(h)
            .fold(Complex64::new(0.0, 0.0), |acc, (w, x)| acc + w.conj() * x)
    }

    /// `|wᴴh|²`.
    #[inline]
    pub fn gain(&self, h: &[Complex64]) -> f64 {
        self.inner(h).norm_sqr()
    }
}

/// `K` codewords of equal length; column `k` of the codebook matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    codewords: Vec<Codeword>,
}

impl Codebook {
    pub fn new(codewords: Vec<Codeword>) -> Result<Self> {
        let Some(first) = codewords.first() else {
            return Err(Error::domain("codebook needs at least one codeword"));
        };
        let n = first.len();
        if let Some(bad) = codewords.iter().position(|c| c.len() != n) {
            return Err(Error::domain(format!(
                "codeword {bad} has length {} but codeword 0 has length {n}",
                codewords[bad].len()
            )));
        }
        Ok(Self { codewords })
    }

    /// Number of codewords `K`.
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Codeword length `N`.
    pub fn dim(&self) -> usize {
        self.codewords[0].len()
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn get(&self, k: usize) -> Option<&Codeword> {
        self.codewords.get(k)
    }

    pub fn into_codewords(self) -> Vec<Codeword> {
        self.codewords
    }

    /// Best codeword for `h`: `(max_k |W[k]ᴴh|², argmax)` with ties to the lowest index.
    pub fn best_gain(&self, h: &[Complex64]) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, w) in self.codewords.iter().enumerate() {
            let g = w.gain(h);
            if g > best.0 {
                best = (g, k);
            }
        }
        best
    }
}

/// Wraps a phase into `[0, 2π)`.
pub fn wrap_phase(p: f64) -> f64 {
    let r = p.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Beam pattern `B(w, θ, φ) = |wᴴ v(θ, φ)|²` for isotropic elements.
pub fn beam_pattern(w: &Codeword, geom: &ArrayGeometry, dir: Direction) -> Result<f64> {
    if w.len() != geom.len() {
        return Err(Error::domain(format!(
            "codeword length {} does not match array size {}",
            w.len(),
            geom.len()
        )));
    }
    Ok(w.gain(&geom.steering_vector(dir)))
}

/// Effective spatial response `max_k |W[k]ᴴ v|²` and the lowest attaining index.
pub fn effective_spatial_response(
    cb: &Codebook,
    geom: &ArrayGeometry,
    dir: Direction,
) -> Result<(f64, usize)> {
    if cb.dim() != geom.len() {
        return Err(Error::domain(format!(
            "codebook dimension {} does not match array size {}",
            cb.dim(),
            geom.len()
        )));
    }
    Ok(cb.best_gain(&geom.steering_vector(dir)))
}
