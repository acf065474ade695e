//! Monte Carlo evaluation: empirical CDFs, spatial-response and link
//! experiments, and report files.
//!
//! Trials are split into fixed-size chunks; chunk `c` draws from its own
//! ChaCha stream of the base seed, so results do not depend on the number
//! of worker threads.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::array::{ArrayGeometry, Codebook, Direction};
use crate::channel::{sample_channel_matrix, seeded_rng, AngleRange, ChannelParams, SimRng};
use crate::error::{Error, Result};
use crate::io::{cdf_to_csv, sig12, write_text};
use crate::metrics::{fraction_below, mean};
use crate::sweep::{ideal_select, ping_pong_select, SweepConfig};

const CHUNK: usize = 4096;

/// Right-continuous empirical CDF: distinct sorted values with `P(X <= value)`.
pub fn empirical_cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::domain("empirical CDF of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("empirical CDF of NaN values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = p,
            _ => out.push((*v, p)),
        }
    }
    Ok(out)
}

/// `P(X < x)` read off an empirical CDF.
pub fn cdf_below(cdf: &[(f64, f64)], x: f64) -> f64 {
    cdf.iter()
        .take_while(|(v, _)| *v < x)
        .last()
        .map_or(0.0, |(_, p)| *p)
}

/// Mean of the distribution described by an empirical CDF.
pub fn cdf_mean(cdf: &[(f64, f64)]) -> f64 {
    let mut prev = 0.0;
    let terms: Vec<f64> = cdf
        .iter()
        .map(|&(v, p)| {
            let t = v * (p - prev);
            prev = p;
            t
        })
        .collect();
    crate::metrics::pairwise_sum(&terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub threshold: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub trials: usize,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub mean_gain: f64,
    pub mean_gain_db: f64,
    pub min_gain: f64,
    pub max_gain: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rate: Option<f64>,
    /// `P(gain < γ)` per requested γ.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outage: Vec<Threshold>,
    /// `P(rate < r)` per requested rate threshold.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rate_outage: Vec<Threshold>,
    /// CDF of the gain samples.
    #[serde(skip)]
    pub cdf: Vec<(f64, f64)>,
    #[serde(skip)]
    pub gains: Vec<f64>,
    #[serde(skip)]
    pub rates: Vec<f64>,
}

impl EvalReport {
    fn build(
        metadata: Metadata,
        gains: Vec<f64>,
        rates: Vec<f64>,
        gammas: &[f64],
        rate_thresholds: &[f64],
    ) -> Result<Self> {
        let cdf = empirical_cdf(&gains)?;
        let mean_gain = mean(&gains);
        Ok(Self {
            metadata,
            snr_db: None,
            mean_gain,
            mean_gain_db: 10.0 * mean_gain.log10(),
            min_gain: cdf[0].0,
            max_gain: cdf[cdf.len() - 1].0,
            mean_rate: (!rates.is_empty()).then(|| mean(&rates)),
            outage: gammas
                .iter()
                .map(|&g| Threshold {
                    threshold: g,
                    fraction: fraction_below(&gains, g),
                })
                .collect(),
            rate_outage: rate_thresholds
                .iter()
                .map(|&r| Threshold {
                    threshold: r,
                    fraction: fraction_below(&rates, r),
                })
                .collect(),
            cdf,
            gains,
            rates,
        })
    }

    pub fn outage_at(&self, gamma: f64) -> Option<f64> {
        self.outage
            .iter()
            .find(|t| t.threshold == gamma)
            .map(|t| t.fraction)
    }

    pub fn rate_outage_at(&self, r: f64) -> Option<f64> {
        self.rate_outage
            .iter()
            .find(|t| t.threshold == r)
            .map(|t| t.fraction)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn chunk_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(stream);
    rng
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SpatialConfig {
    pub geometry: ArrayGeometry,
    pub codebook: Codebook,
    pub theta_range: AngleRange,
    pub phi_range: AngleRange,
    pub trials: usize,
    pub seed: u64,
    pub gammas: Vec<f64>,
    /// Deterministic dense grid instead of random draws.
    pub grid: bool,
}

impl SpatialConfig {
    pub fn new(geometry: ArrayGeometry, codebook: Codebook) -> Self {
        Self {
            geometry,
            codebook,
            theta_range: AngleRange::full_zenith(),
            phi_range: AngleRange::front_azimuth(),
            trials: 100_000,
            seed: 0,
            gammas: vec![],
            grid: false,
        }
    }

    /// Directions that will be evaluated, in order.
    pub fn directions(&self) -> Vec<Direction> {
        if self.grid {
            if self.geometry.is_linear() {
                return self
                    .theta_range
                    .grid(self.trials)
                    .into_iter()
                    .map(|t| Direction { theta: t, phi: 0.0 })
                    .collect();
            }
            let side = (self.trials as f64).sqrt().ceil() as usize;
            let phis = self.phi_range.grid(side);
            return self
                .theta_range
                .grid(side)
                .into_iter()
                .flat_map(|t| phis.iter().map(move |&p| Direction { theta: t, phi: p }))
                .collect();
        }
        let chunks = self.trials.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = chunk_rng(self.seed, c as u64);
                let len = CHUNK.min(self.trials - c * CHUNK);
                (0..len)
                    .map(|_| Direction {
                        theta: self.theta_range.sample(&mut rng),
                        phi: self.phi_range.sample(&mut rng),
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Effective spatial response `max_k |W[k]ᴴ v(θ, φ)|²` over sampled directions.
pub fn run_spatial_response_experiment(cfg: &SpatialConfig) -> Result<EvalReport> {
    check_trials(cfg.trials)?;
    if cfg.codebook.dim() != cfg.geometry.len() {
        return Err(Error::config(
            "codebook",
            format!(
                "codeword length {} does not match array size {}",
                cfg.codebook.dim(),
                cfg.geometry.len()
            ),
        ));
    }
    ChannelParams::single_ray()
        .with_ranges(cfg.theta_range, cfg.phi_range)
        .validate()?;
    let gains: Vec<f64> = cfg
        .directions()
        .par_iter()
        .map(|&d| cfg.codebook.best_gain(&cfg.geometry.steering_vector(d)).0)
        .collect();
    let metadata = Metadata {
        experiment: "spatial".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        trials: gains.len(),
        config: serde_json::json!({
            "geometry": geometry_json(&cfg.geometry),
            "codebook_size": cfg.codebook.len(),
            "theta_range_deg": [cfg.theta_range.lo.to_degrees(), cfg.theta_range.hi.to_degrees()],
            "phi_range_deg": [cfg.phi_range.lo.to_degrees(), cfg.phi_range.hi.to_degrees()],
            "grid": cfg.grid,
        }),
    };
    EvalReport::build(metadata, gains, vec![], &cfg.gammas, &[])
}

fn geometry_json(g: &ArrayGeometry) -> serde_json::Value {
    serde_json::json!({
        "n_v": g.n_v(),
        "n_h": g.n_h(),
        "d_v_over_lambda": g.d_v_over_lambda(),
        "d_h_over_lambda": g.d_h_over_lambda(),
    })
}

#[derive(Debug, Clone)]
pub struct LinkConfig {
    pub geom_rx: ArrayGeometry,
    pub geom_tx: ArrayGeometry,
    pub cb_rx: Codebook,
    pub cb_tx: Codebook,
    pub channel: ChannelParams,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Gain thresholds for outage.
    pub gammas: Vec<f64>,
    /// Rate thresholds (bit/s/Hz) for rate outage.
    pub rate_thresholds: Vec<f64>,
    /// Select beams from noiseless observations.
    pub noiseless_selection: bool,
}

impl LinkConfig {
    /// Receive-only link: single-antenna transmitter, `cb` at the receiver.
    pub fn receive_only(geom: ArrayGeometry, cb: Codebook) -> Self {
        Self {
            geom_rx: geom,
            geom_tx: ArrayGeometry::ula(1),
            cb_rx: cb,
            cb_tx: Codebook::new(vec![crate::array::Codeword::from_phases(vec![0.0]).unwrap()])
                .unwrap(),
            channel: ChannelParams::los(),
            snr_db: vec![5.0],
            trials: 100_000,
            seed: 0,
            gammas: vec![],
            rate_thresholds: vec![],
            noiseless_selection: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        if self.snr_db.is_empty() {
            return Err(Error::config("snr-db", "need at least one SNR point"));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::config("snr-db", format!("non-finite SNR {s}")));
        }
        if self.cb_rx.dim() != self.geom_rx.len() {
            return Err(Error::config(
                "rx-codebook",
                "codeword length does not match Rx array",
            ));
        }
        if self.cb_tx.dim() != self.geom_tx.len() {
            return Err(Error::config(
                "tx-codebook",
                "codeword length does not match Tx array",
            ));
        }
        self.channel.validate()
    }
}

/// Per SNR point: draw `H`, run the ping-pong sweep, and collect gain and rate.
///
/// Every SNR point (and both selection modes) sees the same channel draws;
/// noise comes from a separate stream.
pub fn run_link_experiment(cfg: &LinkConfig) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    let chunks = cfg.trials.div_ceil(CHUNK);
    cfg.snr_db
        .iter()
        .map(|&snr_db| {
            let sweep = SweepConfig::from_snr_db(snr_db)?;
            let outcomes: Vec<(f64, f64)> = (0..chunks)
                .into_par_iter()
                .flat_map_iter(|c| {
                    let mut ch_rng = chunk_rng(cfg.seed, 2 * c as u64);
                    let mut noise_rng = chunk_rng(cfg.seed, 2 * c as u64 + 1);
                    let len = CHUNK.min(cfg.trials - c * CHUNK);
                    (0..len)
                        .map(|_| {
                            let h = sample_channel_matrix(&cfg.channel, &cfg.geom_rx, &cfg.geom_tx, &mut ch_rng);
                            let out = if cfg.noiseless_selection {
                                ideal_select(&h, &cfg.cb_tx, &cfg.cb_rx, &sweep)
                            } else {
                                ping_pong_select(&h, &cfg.cb_tx, &cfg.cb_rx, &sweep, &mut noise_rng)
                            }
                            .expect("dimensions validated");
                            (out.bf_gain, out.rate)
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
            let (gains, rates): (Vec<f64>, Vec<f64>) = outcomes.into_iter().unzip();
            let metadata = Metadata {
                experiment: "link".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                seed: cfg.seed,
                trials: cfg.trials,
                config: serde_json::json!({
                    "geometry_rx": geometry_json(&cfg.geom_rx),
                    "geometry_tx": geometry_json(&cfg.geom_tx),
                    "codebook_size_rx": cfg.cb_rx.len(),
                    "codebook_size_tx": cfg.cb_tx.len(),
                    "kappa": if cfg.channel.kappa.is_finite() { serde_json::json!(cfg.channel.kappa) } else { serde_json::json!("inf") },
                    "n_nlos": cfg.channel.n_nlos,
                    "noiseless_selection": cfg.noiseless_selection,
                }),
            };
            let mut r = EvalReport::build(metadata, gains, rates, &cfg.gammas, &cfg.rate_thresholds)?;
            r.snr_db = Some(snr_db);
            Ok(r)
        })
        .collect()
}

/// Writes `report.json` and `cdf.csv` into `dir`.
pub fn write_report(report: &EvalReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    write_text(dir.join("report.json"), &(report.to_json() + "\n"))?;
    write_text(dir.join("cdf.csv"), &cdf_to_csv(&report.cdf))
}

/// `snr_db,mean_gain,mean_rate,outage@γ…` summary of a link sweep.
pub fn link_summary_csv(reports: &[EvalReport]) -> String {
    let mut header = String::from("snr_db,mean_gain,mean_rate");
    if let Some(first) = reports.first() {
        for t in &first.outage {
            header.push_str(&format!(",outage@{}", t.threshold));
        }
    }
    let mut s = header + "\n";
    for r in reports {
        let mut row = format!(
            "{},{},{}",
            r.snr_db.unwrap_or(f64::NAN),
            sig12(r.mean_gain),
            sig12(r.mean_rate.unwrap_or(f64::NAN))
        );
        for t in &r.outage {
            row.push(',');
            row.push_str(&sig12(t.fraction));
        }
        s.push_str(&row);
        s.push('\n');
    }
    s
}
