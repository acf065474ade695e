//! Generalized Lloyd codebook design.
//!
//! Each iteration partitions the training set by best codeword, then moves
//! every codeword by phase-only gradient ascent on the objective of its own
//! cell. Because the metric `f` is nondecreasing and every cell objective
//! can only go up, the overall objective is nondecreasing too; the update
//! guards make that hold exactly in floating point.
//!
//! The quantized designer keeps an unconstrained copy of each codeword,
//! updates it the same way, and replaces the on-grid incumbent with the
//! projected copy only when that improves the incumbent's cell objective.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::array::{wrap_phase, Codebook, Codeword};
use crate::channel::seeded_rng;
use crate::error::{Error, Result};
use crate::metrics::{estimate_objective, mean, Metric};

/// Maximum number of step halvings tried per ascent step.
pub const MAX_HALVINGS: usize = 10;

/// Consecutive non-improving iterations tolerated by the quantized designer
/// before it stops; its incumbent can stall while the unconstrained copy is
/// still drifting toward the next grid point.
pub const QUANT_PATIENCE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LloydConfig {
    /// Codebook size `K`.
    pub k: usize,
    /// Initial ascent step `ε` (radians per unit gradient).
    pub step_size: f64,
    pub grad_steps_per_iter: usize,
    pub max_iters: usize,
    /// Stop once the relative objective change of an iteration drops below this.
    pub rel_tol: f64,
    pub restarts: usize,
    /// Phase-shifter resolution in bits; `None` for ideal shifters.
    pub quant_bits: Option<u32>,
    pub seed: u64,
}

impl LloydConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            step_size: 0.05,
            grad_steps_per_iter: 20,
            max_iters: 200,
            rel_tol: 1e-4,
            restarts: 5,
            quant_bits: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_bits(mut self, bits: Option<u32>) -> Self {
        self.quant_bits = bits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k", "codebook size must be at least 1"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::config(
                "step",
                format!("must be > 0, got {}", self.step_size),
            ));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::config(
                "tol",
                format!("must be > 0, got {}", self.rel_tol),
            ));
        }
        if self.grad_steps_per_iter == 0 {
            return Err(Error::config("grad-steps", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("iters", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts", "must be at least 1"));
        }
        match self.quant_bits {
            Some(0) => Err(Error::config("bits", "must be at least 1")),
            Some(b) if b > 30 => Err(Error::config(
                "bits",
                format!("{b} bits is not a phase shifter"),
            )),
            _ => Ok(()),
        }
    }
}

/// Assignment of training samples to codewords (zero-based cell indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub cells: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct DesignResult {
    pub codebook: Codebook,
    /// Objective after initialization and after every accepted iteration of the winning restart.
    pub objective_history: Vec<f64>,
    pub restart_objectives: Vec<f64>,
    pub best_restart: usize,
}

impl DesignResult {
    pub fn objective(&self) -> f64 {
        *self
            .objective_history
            .last()
            .expect("history is never empty")
    }
}

/// `k` codewords with i.i.d. uniform phases.
pub fn init_codebook<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Codebook> {
    if n == 0 || k == 0 {
        return Err(Error::domain("codebook needs n >= 1 and k >= 1"));
    }
    let cws = (0..k)
        .map(|_| Codeword::from_phases((0..n).map(|_| rng.random::<f64>() * TAU).collect()))
        .collect::<Result<Vec<_>>>()?;
    Codebook::new(cws)
}

fn check_training<S: AsRef<[Complex64]>>(samples: &[S], n: Option<usize>) -> Result<usize> {
    let Some(first) = samples.first() else {
        return Err(Error::domain("training set is empty"));
    };
    let n = n.unwrap_or(first.as_ref().len());
    if n == 0 {
        return Err(Error::domain("training vectors are empty"));
    }
    if let Some(i) = samples.iter().position(|h| h.as_ref().len() != n) {
        return Err(Error::domain(format!(
            "training vector {i} has length {}, expected {n}",
            samples[i].as_ref().len()
        )));
    }
    Ok(n)
}

/// Assigns each sample to the codeword with the largest `|wᴴh|²`, ties to the lowest index.
pub fn partition<S: AsRef<[Complex64]> + Sync>(cb: &Codebook, samples: &[S]) -> Result<Partition> {
    if !samples.is_empty() {
        check_training(samples, Some(cb.dim()))?;
    }
    Ok(partition_unchecked(cb, samples))
}

fn partition_unchecked<S: AsRef<[Complex64]> + Sync>(cb: &Codebook, samples: &[S]) -> Partition {
    let assignment: Vec<usize> = samples
        .par_iter()
        .map(|h| cb.best_gain(h.as_ref()).1)
        .collect();
    let mut cells = vec![Vec::new(); cb.len()];
    for (i, &k) in assignment.iter().enumerate() {
        cells[k].push(i);
    }
    Partition { assignment, cells }
}

/// Cell objective `mean_h f(|wᴴh|²)`; 0 for an empty cell.
pub fn cell_objective(w: &Codeword, cell: &[&[Complex64]], m: &Metric) -> f64 {
    if cell.is_empty() {
        return 0.0;
    }
    let vals: Vec<f64> = cell.iter().map(|h| m.value(w.gain(h))).collect();
    mean(&vals)
}

/// Gradient of the cell objective with respect to the codeword phases.
///
/// With `w_n = e^{jθ_n}/√N` and `s = wᴴh`,
/// `∂|s|²/∂θ_n = 2 Re{ s · conj(h_n) · j · w_n }`, averaged over the cell
/// and weighted by `f'(|s|²)`.
pub fn objective_gradient(w: &Codeword, cell: &[&[Complex64]], m: &Metric) -> Result<Vec<f64>> {
    if cell.is_empty() {
        return Err(Error::domain("gradient of an empty cell"));
    }
    check_training(cell, Some(w.len()))?;
    Ok(gradient_unchecked(w, cell, m))
}

fn gradient_unchecked(w: &Codeword, cell: &[&[Complex64]], m: &Metric) -> Vec<f64> {
    let n = w.len();
    let jw: Vec<Complex64> = w.weights().iter().map(|x| Complex64::i() * x).collect();
    // per-element contributions kept per sample so the reduction is ordered
    let mut per_elem = vec![Vec::with_capacity(cell.len()); n];
    for h in cell {
        let s = w.inner(h);
        let scale = 2.0 * m.derivative(s.norm_sqr());
        for ((acc, hn), jwn) in per_elem.iter_mut().zip(h.iter()).zip(&jw) {
            acc.push(scale * (s * hn.conj() * jwn).re);
        }
    }
    per_elem.iter().map(|v| mean(v)).collect()
}

fn shifted(w: &Codeword, dir: &[f64], step: f64) -> Codeword {
    Codeword::from_phases(
        w.phases()
            .iter()
            .zip(dir)
            .map(|(p, g)| p + step * g)
            .collect(),
    )
    .expect("finite phases")
}

/// Up to `grad_steps_per_iter` backtracking ascent steps on the cell objective.
///
/// A step is accepted only if it strictly improves the cell objective, so
/// the result never scores below the input. An empty cell returns the input.
pub fn update_codeword(
    w: &Codeword,
    cell: &[&[Complex64]],
    m: &Metric,
    cfg: &LloydConfig,
) -> Codeword {
    if cell.is_empty() {
        return w.clone();
    }
    let mut cur = w.clone();
    let mut cur_obj = cell_objective(&cur, cell, m);
    for _ in 0..cfg.grad_steps_per_iter {
        let g = gradient_unchecked(&cur, cell, m);
        if g.iter().all(|x| *x == 0.0) {
            break;
        }
        let mut step = cfg.step_size;
        let mut moved = false;
        for _ in 0..=MAX_HALVINGS {
            let cand = shifted(&cur, &g, step);
            let obj = cell_objective(&cand, cell, m);
            if obj > cur_obj {
                cur = cand;
                cur_obj = obj;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    cur
}

/// Rounds every phase to the nearest multiple of `2π / 2^bits`, ties down.
///
/// Elementwise rounding is the Euclidean projection onto the quantized
/// constant-modulus set since all candidates share the same modulus.
pub fn project_to_grid(w: &Codeword, bits: u32) -> Codeword {
    project_rotated(w, bits, 0.0)
}

/// Projects `w` after rotating all phases by `offset` grid steps.
fn project_rotated(w: &Codeword, bits: u32, offset: f64) -> Codeword {
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let phases = w
        .phases()
        .iter()
        .map(|&p| {
            let idx = (p / step + offset - 0.5).ceil().rem_euclid(levels as f64);
            wrap_phase(idx * step)
        })
        .collect();
    Codeword::from_phases(phases).expect("finite phases")
}

/// Best on-grid representative of `w`'s global-phase class for this cell.
///
/// Rotating `w` changes no objective, but it does change which grid point
/// each element rounds to. As the rotation sweeps one grid step the rounding
/// pattern changes only where some element crosses a rounding boundary, so
/// one probe between each pair of adjacent boundaries covers every distinct
/// projection.
fn best_projection(w: &Codeword, bits: u32, cell: &[&[Complex64]], m: &Metric) -> (Codeword, f64) {
    let step = TAU / (1u64 << bits) as f64;
    let mut breaks: Vec<f64> = w
        .phases()
        .iter()
        .map(|&p| {
            let frac = p / step - (p / step).floor();
            (0.5 - frac).rem_euclid(1.0)
        })
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut best = project_to_grid(w, bits);
    let mut best_obj = cell_objective(&best, cell, m);
    for (i, &b) in breaks.iter().enumerate() {
        let next = breaks.get(i + 1).copied().unwrap_or(breaks[0] + 1.0);
        let cand = project_rotated(w, bits, 0.5 * (b + next));
        let obj = cell_objective(&cand, cell, m);
        if obj > best_obj {
            best = cand;
            best_obj = obj;
        }
    }
    (best, best_obj)
}

/// Sample of lowest effective gain under `codewords` (ties to the lowest index).
fn weakest_sample(codewords: &[Codeword], samples: &[&[Complex64]]) -> usize {
    let cb = Codebook::new(codewords.to_vec()).expect("nonempty codebook");
    let gains: Vec<f64> = samples.par_iter().map(|h| cb.best_gain(h).0).collect();
    let mut best = 0;
    for (i, g) in gains.iter().enumerate() {
        if *g < gains[best] {
            best = i;
        }
    }
    best
}

fn cell_slices<'a>(cell: &[usize], samples: &[&'a [Complex64]]) -> Vec<&'a [Complex64]> {
    cell.iter().map(|&i| samples[i]).collect()
}

fn converged(prev: f64, next: f64, tol: f64) -> bool {
    (next - prev).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE)
}

fn run_ideal(
    samples: &[&[Complex64]],
    m: &Metric,
    cfg: &LloydConfig,
    restart: usize,
) -> Result<(Codebook, Vec<f64>)> {
    let mut rng = seeded_rng(cfg.seed);
    rng.set_stream(restart as u64);
    let mut cb = init_codebook(samples[0].len(), cfg.k, &mut rng)?;
    let mut obj = estimate_objective(&cb, samples, m)?;
    let mut history = vec![obj];

    for _ in 0..cfg.max_iters {
        let part = partition_unchecked(&cb, samples);
        let mut next: Vec<Codeword> = part
            .cells
            .par_iter()
            .zip(cb.codewords())
            .map(|(cell, w)| update_codeword(w, &cell_slices(cell, samples), m, cfg))
            .collect();
        for (k, cell) in part.cells.iter().enumerate() {
            if cell.is_empty() {
                let i = weakest_sample(&next, samples);
                next[k] = Codeword::matched(samples[i])?;
            }
        }
        let cand = Codebook::new(next)?;
        let cand_obj = estimate_objective(&cand, samples, m)?;
        if cand_obj < obj || cand_obj.is_nan() {
            break;
        }
        let done = converged(obj, cand_obj, cfg.rel_tol);
        cb = cand;
        obj = cand_obj;
        history.push(obj);
        if done {
            break;
        }
    }
    Ok((cb, history))
}

fn run_quantized(
    samples: &[&[Complex64]],
    m: &Metric,
    cfg: &LloydConfig,
    bits: u32,
    restart: usize,
) -> Result<(Codebook, Vec<f64>)> {
    let mut rng = seeded_rng(cfg.seed);
    rng.set_stream(restart as u64);
    let mut shadow = init_codebook(samples[0].len(), cfg.k, &mut rng)?.into_codewords();
    let mut cb = Codebook::new(shadow.iter().map(|w| project_to_grid(w, bits)).collect())?;
    let mut obj = estimate_objective(&cb, samples, m)?;
    let mut history = vec![obj];
    let mut stalled = 0;

    for _ in 0..cfg.max_iters {
        let part = partition_unchecked(&cb, samples);
        let updated: Vec<(Codeword, Codeword)> = part
            .cells
            .par_iter()
            .zip(shadow.par_iter())
            .zip(cb.codewords().par_iter())
            .map(|((cell, s), q)| {
                if cell.is_empty() {
                    return (s.clone(), q.clone());
                }
                let cell = cell_slices(cell, samples);
                let s = update_codeword(s, &cell, m, cfg);
                let (cand, cand_obj) = best_projection(&s, bits, &cell, m);
                if cand_obj > cell_objective(q, &cell, m) {
                    (s, cand)
                } else {
                    (s, q.clone())
                }
            })
            .collect();
        let (next_shadow, mut next): (Vec<_>, Vec<_>) = updated.into_iter().unzip();
        shadow = next_shadow;
        for (k, cell) in part.cells.iter().enumerate() {
            if cell.is_empty() {
                let i = weakest_sample(&next, samples);
                shadow[k] = Codeword::matched(samples[i])?;
                next[k] = best_projection(&shadow[k], bits, &[samples[i]], m).0;
            }
        }
        let cand = Codebook::new(next)?;
        let cand_obj = estimate_objective(&cand, samples, m)?;
        if cand_obj < obj || cand_obj.is_nan() {
            // keep the incumbent; the unconstrained copies keep moving
            stalled += 1;
        } else {
            stalled = if converged(obj, cand_obj, cfg.rel_tol) {
                stalled + 1
            } else {
                0
            };
            cb = cand;
            obj = cand_obj;
            history.push(obj);
        }
        if stalled >= QUANT_PATIENCE {
            break;
        }
    }
    Ok((cb, history))
}

fn best_of(runs: Vec<(Codebook, Vec<f64>)>) -> DesignResult {
    let restart_objectives: Vec<f64> = runs.iter().map(|(_, h)| *h.last().unwrap()).collect();
    let mut best = 0;
    for (i, o) in restart_objectives.iter().enumerate() {
        if *o > restart_objectives[best] {
            best = i;
        }
    }
    let (codebook, objective_history) = runs.into_iter().nth(best).unwrap();
    DesignResult {
        codebook,
        objective_history,
        restart_objectives,
        best_restart: best,
    }
}

/// Generalized Lloyd design with ideal phase shifters.
///
/// Runs `cfg.restarts` independent restarts (in parallel) and keeps the one
/// with the best final objective, ties to the lowest restart index. If
/// `cfg.quant_bits` is set this delegates to [`quantized_lloyd_design`].
pub fn lloyd_design<S: AsRef<[Complex64]> + Sync>(
    samples: &[S],
    m: &Metric,
    cfg: &LloydConfig,
) -> Result<DesignResult> {
    if cfg.quant_bits.is_some() {
        return quantized_lloyd_design(samples, m, cfg);
    }
    cfg.validate()?;
    m.validate()?;
    check_training(samples, None)?;
    let slices: Vec<&[Complex64]> = samples.iter().map(|h| h.as_ref()).collect();
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_ideal(&slices, m, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_of(runs))
}

/// Generalized Lloyd design restricted to `cfg.quant_bits`-bit phase shifters.
pub fn quantized_lloyd_design<S: AsRef<[Complex64]> + Sync>(
    samples: &[S],
    m: &Metric,
    cfg: &LloydConfig,
) -> Result<DesignResult> {
    cfg.validate()?;
    m.validate()?;
    let Some(bits) = cfg.quant_bits else {
        return Err(Error::config("bits", "quantized design needs a bit count"));
    };
    check_training(samples, None)?;
    let slices: Vec<&[Complex64]> = samples.iter().map(|h| h.as_ref()).collect();
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_quantized(&slices, m, cfg, bits, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_of(runs))
}

/// True if every phase of every codeword is a multiple of `2π / 2^bits` (within `tol` radians).
pub fn on_grid(cb: &Codebook, bits: u32, tol: f64) -> bool {
    let step = TAU / (1u64 << bits) as f64;
    cb.codewords().iter().flat_map(|w| w.phases()).all(|&p| {
        let r = (p / step).round() * step - p;
        r.abs() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{ArrayGeometry, Direction};
    use crate::channel::{complex_gaussian, generate_training_set, ChannelParams};
    use crate::metrics::MetricKind;
    use std::f64::consts::PI;

    fn random_vec(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        (0..n).map(|_| complex_gaussian(rng)).collect()
    }

    fn random_codeword(n: usize, rng: &mut impl Rng) -> Codeword {
        Codeword::from_phases((0..n).map(|_| rng.random::<f64>() * TAU).collect()).unwrap()
    }

    #[test]
    fn init_is_seeded_and_constant_modulus() {
        let a = init_codebook(6, 3, &mut seeded_rng(11)).unwrap();
        let b = init_codebook(6, 3, &mut seeded_rng(11)).unwrap();
        assert_eq!(a, b);
        for w in a.codewords() {
            for z in w.weights() {
                assert!((z.norm() - 1.0 / 6f64.sqrt()).abs() < 1e-12);
            }
        }
        assert_eq!(init_codebook(4, 1, &mut seeded_rng(0)).unwrap().len(), 1);
        assert!(init_codebook(0, 1, &mut seeded_rng(0)).is_err());
    }

    #[test]
    fn partition_single_codeword_takes_everything() {
        let mut rng = seeded_rng(1);
        let samples: Vec<_> = (0..20).map(|_| random_vec(4, &mut rng)).collect();
        let cb = init_codebook(4, 1, &mut rng).unwrap();
        let p = partition(&cb, &samples).unwrap();
        assert_eq!(p.cells[0], (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn partition_picks_matched_codeword() {
        let g = ArrayGeometry::ula(4);
        let v0 = g.steering_vector(Direction::zenith(PI / 2.0).unwrap());
        let v1 = g.steering_vector(Direction::zenith(PI / 3.0).unwrap());
        let cb = Codebook::new(vec![
            Codeword::matched(&v0).unwrap(),
            Codeword::matched(&v1).unwrap(),
        ])
        .unwrap();
        let p = partition(&cb, &[v1]).unwrap();
        assert_eq!(p.assignment, vec![1]);
        assert!(p.cells[0].is_empty());
    }

    #[test]
    fn partition_matches_brute_force() {
        let mut rng = seeded_rng(2);
        let samples: Vec<_> = (0..300).map(|_| random_vec(5, &mut rng)).collect();
        let cb = init_codebook(5, 6, &mut rng).unwrap();
        let p = partition(&cb, &samples).unwrap();
        for (i, h) in samples.iter().enumerate() {
            let mut best = 0;
            let mut best_g = -1.0;
            for k in 0..6 {
                let s: Complex64 = cb.codewords()[k]
                    .phases()
                    .iter()
                    .zip(h)
                    .map(|(p, x)| Complex64::from_polar(1.0 / 5f64.sqrt(), -p) * x)
                    .sum();
                if s.norm_sqr() > best_g {
                    best_g = s.norm_sqr();
                    best = k;
                }
            }
            assert_eq!(p.assignment[i], best);
            assert!(p.cells[best].contains(&i));
        }
        let total: usize = p.cells.iter().map(Vec::len).sum();
        assert_eq!(total, samples.len());
    }

    #[test]
    fn gradient_vanishes_for_single_element_and_matched_filter() {
        let mut rng = seeded_rng(3);
        let h = random_vec(1, &mut rng);
        let w = random_codeword(1, &mut rng);
        for m in [
            Metric::avg_gain(),
            Metric::rate(),
            Metric::coverage(0.5, 8.0).unwrap(),
        ] {
            let g = objective_gradient(&w, &[&h], &m).unwrap();
            assert!(g[0].abs() < 1e-12);
        }

        let geom = ArrayGeometry::ula(8);
        let v = geom.steering_vector(Direction::zenith(1.0).unwrap());
        let w = Codeword::matched(&v).unwrap();
        let g = objective_gradient(&w, &[&v], &Metric::avg_gain()).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-9), "{g:?}");
    }

    #[test]
    fn gradient_rejects_empty_cell() {
        let w = Codeword::from_phases(vec![0.0; 2]).unwrap();
        assert!(objective_gradient(&w, &[], &Metric::avg_gain()).is_err());
    }

    /// Centered finite differences of the cell objective.
    fn fd_gradient(w: &Codeword, cell: &[&[Complex64]], m: &Metric, step: f64) -> Vec<f64> {
        (0..w.len())
            .map(|n| {
                let mut up = w.phases().to_vec();
                let mut dn = w.phases().to_vec();
                up[n] += step;
                dn[n] -= step;
                let fu = cell_objective(&Codeword::from_phases(up).unwrap(), cell, m);
                let fd = cell_objective(&Codeword::from_phases(dn).unwrap(), cell, m);
                (fu - fd) / (2.0 * step)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seeded_rng(4);
        for kind in [MetricKind::AvgGain, MetricKind::Rate, MetricKind::Coverage] {
            let m = match kind {
                MetricKind::AvgGain => Metric::avg_gain(),
                MetricKind::Rate => Metric::rate(),
                MetricKind::Coverage => Metric::coverage(1.0, 4.0).unwrap(),
            };
            let w = random_codeword(6, &mut rng);
            let cell_owned: Vec<_> = (0..5).map(|_| random_vec(6, &mut rng)).collect();
            let cell: Vec<&[Complex64]> = cell_owned.iter().map(|h| h.as_slice()).collect();
            let g = objective_gradient(&w, &cell, &m).unwrap();
            let fd = fd_gradient(&w, &cell, &m, 1e-6);
            for (a, b) in g.iter().zip(&fd) {
                assert!(
                    (a - b).abs() <= 1e-4 * b.abs().max(1e-3),
                    "{kind:?}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn update_reaches_matched_filter_gain() {
        let geom = ArrayGeometry::ula(8);
        let v = geom.steering_vector(Direction::zenith(0.9).unwrap());
        let mut rng = seeded_rng(5);
        let mut w = random_codeword(8, &mut rng);
        let cfg = LloydConfig::new(1);
        for _ in 0..50 {
            w = update_codeword(&w, &[&v], &Metric::avg_gain(), &cfg);
        }
        assert!(w.gain(&v) > 8.0 * 0.99, "{}", w.gain(&v));
    }

    #[test]
    fn update_is_identity_at_a_stationary_point() {
        let geom = ArrayGeometry::ula(4);
        let v = geom.steering_vector(Direction::zenith(PI / 2.0).unwrap());
        let w = Codeword::from_phases(vec![0.0; 4]).unwrap();
        let out = update_codeword(&w, &[&v], &Metric::avg_gain(), &LloydConfig::new(1));
        assert_eq!(out, w);
    }

    #[test]
    fn update_never_decreases_cell_objective() {
        let mut rng = seeded_rng(6);
        let cfg = LloydConfig::new(1);
        for m in [
            Metric::avg_gain(),
            Metric::rate(),
            Metric::coverage(2.0, 8.0).unwrap(),
        ] {
            for _ in 0..20 {
                let w = random_codeword(4, &mut rng);
                let cell_owned: Vec<_> = (0..7).map(|_| random_vec(4, &mut rng)).collect();
                let cell: Vec<&[Complex64]> = cell_owned.iter().map(|h| h.as_slice()).collect();
                let out = update_codeword(&w, &cell, &m, &cfg);
                assert!(cell_objective(&out, &cell, &m) >= cell_objective(&w, &cell, &m));
            }
        }
    }

    #[test]
    fn projection_examples() {
        let w = Codeword::from_phases(vec![0.3, 2.0]).unwrap();
        let q = project_to_grid(&w, 1);
        assert_eq!(q.phases(), &[0.0, PI]);

        let on = Codeword::from_phases(vec![0.0, PI / 2.0, PI, 1.5 * PI]).unwrap();
        assert_eq!(project_to_grid(&on, 2), on);

        // exact tie between 0 and π/2 rounds down
        let tie = Codeword::from_phases(vec![PI / 4.0]).unwrap();
        assert_eq!(project_to_grid(&tie, 2).phases(), &[0.0]);
        // phases just below 2π wrap to 0
        let wrap = Codeword::from_phases(vec![TAU - 0.01]).unwrap();
        assert_eq!(project_to_grid(&wrap, 3).phases(), &[0.0]);
    }

    #[test]
    fn projection_matches_per_element_brute_force() {
        let mut rng = seeded_rng(7);
        for bits in 1..=3u32 {
            let levels = 1 << bits;
            for n in 1..=4 {
                let w = random_codeword(n, &mut rng);
                let q = project_to_grid(&w, bits);
                for (p, qp) in w.phases().iter().zip(q.phases()) {
                    let best = (0..levels)
                        .map(|i| i as f64 * TAU / levels as f64)
                        .min_by(|a, b| {
                            let da = (Complex64::cis(*p) - Complex64::cis(*a)).norm();
                            let db = (Complex64::cis(*p) - Complex64::cis(*b)).norm();
                            da.total_cmp(&db)
                        })
                        .unwrap();
                    assert!((best - qp).abs() < 1e-12, "p={p} got {qp} want {best}");
                    let err = (Complex64::cis(*p) * Complex64::cis(-*qp)).arg().abs();
                    assert!(err <= PI / levels as f64 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn best_projection_never_worse_than_plain_rounding() {
        let mut rng = seeded_rng(8);
        let m = Metric::avg_gain();
        for _ in 0..50 {
            let w = random_codeword(4, &mut rng);
            let cell_owned: Vec<_> = (0..6).map(|_| random_vec(4, &mut rng)).collect();
            let cell: Vec<&[Complex64]> = cell_owned.iter().map(|h| h.as_slice()).collect();
            let (q, obj) = best_projection(&w, 2, &cell, &m);
            assert!(obj >= cell_objective(&project_to_grid(&w, 2), &cell, &m));
            let single = Codebook::new(vec![q]).unwrap();
            assert!(on_grid(&single, 2, 1e-12));
        }
    }

    #[test]
    fn single_codeword_design_converges_to_array_gain() {
        let geom = ArrayGeometry::ula(8);
        let v = geom.steering_vector(Direction::zenith(2.1).unwrap());
        let res = lloyd_design(&[v], &Metric::avg_gain(), &LloydConfig::new(1)).unwrap();
        assert!(res.objective() > 8.0 * 0.99);
        assert_eq!(res.restart_objectives.len(), 5);
    }

    #[test]
    fn design_is_seed_deterministic_and_monotone() {
        let geom = ArrayGeometry::ula(6);
        let train =
            generate_training_set(&ChannelParams::single_ray(), &geom, 200, &mut seeded_rng(1));
        let cfg = LloydConfig::new(3).with_seed(42).with_restarts(3);
        let a = lloyd_design(&train, &Metric::avg_gain(), &cfg).unwrap();
        let b = lloyd_design(&train, &Metric::avg_gain(), &cfg).unwrap();
        assert_eq!(a.codebook, b.codebook);
        assert_eq!(a.objective_history, b.objective_history);
        assert!(a.objective_history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_invalid_config() {
        let train = vec![vec![Complex64::new(1.0, 0.0); 2]];
        let m = Metric::avg_gain();
        let mut cfg = LloydConfig::new(0);
        assert!(matches!(
            lloyd_design(&train, &m, &cfg),
            Err(Error::Config { .. })
        ));
        cfg = LloydConfig::new(1);
        cfg.step_size = 0.0;
        assert!(lloyd_design(&train, &m, &cfg).is_err());
        cfg = LloydConfig::new(1).with_bits(Some(0));
        assert!(quantized_lloyd_design(&train, &m, &cfg).is_err());
        let empty: Vec<Vec<Complex64>> = vec![];
        assert!(lloyd_design(&empty, &m, &LloydConfig::new(1)).is_err());
    }

    #[test]
    fn quantized_design_stays_on_grid() {
        let geom = ArrayGeometry::upa(2, 2);
        let train =
            generate_training_set(&ChannelParams::single_ray(), &geom, 300, &mut seeded_rng(3));
        for bits in [1, 2, 3] {
            let cfg = LloydConfig::new(4).with_bits(Some(bits)).with_restarts(2);
            let res = quantized_lloyd_design(&train, &Metric::avg_gain(), &cfg).unwrap();
            assert!(on_grid(&res.codebook, bits, 1e-9));
            assert!(res.objective_history.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
