//! Ping-pong beam sweeping with noisy selection.
//!
//! The transmitter sweeps its codebook while the receiver listens on a
//! single element; the strongest index is fed back. The receiver then sweeps
//! its own codebook against the fixed transmit beam. Every observation gets
//! fresh noise of power `N_0`; the chosen pair is then scored noiselessly.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::array::Codebook;
use crate::channel::{complex_gaussian, ChannelMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub p_tot: f64,
    pub n0: f64,
}

impl SweepConfig {
    pub fn new(p_tot: f64, n0: f64) -> Result<Self> {
        if !(p_tot.is_finite() && p_tot > 0.0) {
            return Err(Error::config("p_tot", format!("must be > 0, got {p_tot}")));
        }
        if !(n0.is_finite() && n0 > 0.0) {
            return Err(Error::config("n0", format!("must be > 0, got {n0}")));
        }
        Ok(Self { p_tot, n0 })
    }

    /// Unit noise power and `P_tot` set from an SNR in dB.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(10f64.powf(snr_db / 10.0), 1.0)
    }

    /// Linear `P_tot / N_0`.
    pub fn snr(&self) -> f64 {
        self.p_tot / self.n0
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr().log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub tx_index: usize,
    pub rx_index: usize,
    /// `|w_Rᴴ H w_T|²` of the selected pair.
    pub bf_gain: f64,
    pub snr_eff: f64,
    pub rate: f64,
}

impl SweepOutcome {
    fn new(tx_index: usize, rx_index: usize, bf_gain: f64, snr: f64) -> Self {
        let snr_eff = snr * bf_gain;
        Self {
            tx_index,
            rx_index,
            bf_gain,
            snr_eff,
            rate: snr_eff.log2_1p(),
        }
    }
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

/// Receive weights used while the transmitter sweeps: the first element
/// alone with weight 1, which has unit gain toward every direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmniReceive {
    n_r: usize,
}

impl OmniReceive {
    pub fn len(&self) -> usize {
        self.n_r
    }

    pub fn is_empty(&self) -> bool {
        self.n_r == 0
    }

    pub fn weights(&self) -> Vec<Complex64> {
        let mut w = vec![Complex64::new(0.0, 0.0); self.n_r];
        w[0] = Complex64::new(1.0, 0.0);
        w
    }

    /// `wᴴx` for a length-`N_R` vector `x`.
    pub fn apply(&self, x: &[Complex64]) -> Complex64 {
        x[0]
    }
}

pub fn omni_receive_codeword(n_r: usize) -> Result<OmniReceive> {
    if n_r == 0 {
        return Err(Error::domain("receive array needs at least one element"));
    }
    Ok(OmniReceive { n_r })
}

fn check_dims(h: &ChannelMatrix, cb_tx: &Codebook, cb_rx: &Codebook) -> Result<()> {
    if cb_tx.dim() != h.cols() || cb_rx.dim() != h.rows() {
        return Err(Error::domain(format!(
            "channel is {}x{} but codebooks have Rx length {} and Tx length {}",
            h.rows(),
            h.cols(),
            cb_rx.dim(),
            cb_tx.dim()
        )));
    }
    Ok(())
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, v) in values.enumerate() {
        if v > best.0 {
            best = (v, i);
        }
    }
    best.1
}

/// Two-stage selection with noisy observations.
pub fn ping_pong_select<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    cb_tx: &Codebook,
    cb_rx: &Codebook,
    cfg: &SweepConfig,
    rng: &mut R,
) -> Result<SweepOutcome> {
    check_dims(h, cb_tx, cb_rx)?;
    Ok(select(h, cb_tx, cb_rx, cfg, Some(rng)))
}

/// Same two-stage order with noiseless observations.
pub fn ideal_select(
    h: &ChannelMatrix,
    cb_tx: &Codebook,
    cb_rx: &Codebook,
    cfg: &SweepConfig,
) -> Result<SweepOutcome> {
    check_dims(h, cb_tx, cb_rx)?;
    Ok(select::<rand_chacha::ChaCha8Rng>(
        h, cb_tx, cb_rx, cfg, None,
    ))
}

fn select<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    cb_tx: &Codebook,
    cb_rx: &Codebook,
    cfg: &SweepConfig,
    mut rng: Option<&mut R>,
) -> SweepOutcome {
    let amp = cfg.p_tot.sqrt();
    let noise_amp = cfg.n0.sqrt();
    let mut noisy = |clean: Complex64| -> f64 {
        let n = rng.as_deref_mut().map_or(Complex64::new(0.0, 0.0), |r| {
            complex_gaussian(r) * noise_amp
        });
        (amp * clean + n).norm_sqr()
    };

    let omni = OmniReceive { n_r: h.rows() };
    let tx_obs: Vec<f64> = cb_tx
        .codewords()
        .iter()
        .map(|w| noisy(omni.apply(&h.mul_vec(w.weights()))))
        .collect();
    let tx_index = argmax(tx_obs.into_iter());

    let hw = h.mul_vec(cb_tx.codewords()[tx_index].weights());
    let rx_obs: Vec<f64> = cb_rx
        .codewords()
        .iter()
        .map(|w| noisy(w.inner(&hw)))
        .collect();
    let rx_index = argmax(rx_obs.into_iter());

    let bf_gain = cb_rx.codewords()[rx_index].gain(&hw);
    SweepOutcome::new(tx_index, rx_index, bf_gain, cfg.snr())
}
