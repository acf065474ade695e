//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints a PASS/FAIL line; the process fails if any check fails.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use lloyd_beam::baselines::{beam_steering_codebook, dft_codebook, equispaced_ula_directions};
use lloyd_beam::channel::{
    complex_gaussian, generate_training_set, seeded_rng, AngleRange, ChannelParams,
};
use lloyd_beam::eval::{
    run_link_experiment, run_spatial_response_experiment, EvalReport, LinkConfig, SpatialConfig,
};
use lloyd_beam::lloyd::{lloyd_design, objective_gradient, quantized_lloyd_design};
use lloyd_beam::{ArrayGeometry, Codebook, Codeword, LloydConfig, Metric, MetricKind};

const TRAIN_SEED: u64 = 1;
const DESIGN_SEED: u64 = 7;
const EVAL_SEED: u64 = 99;
const TRIALS: usize = 100_000;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn main() -> ExitCode {
    let criteria: [Check; 11] = [
        ("DFT floor", dft_floor),
        ("LB spatial-response means", lb_means),
        ("zero-outage thresholds", zero_outage),
        ("outage-metric effectiveness", outage_metric),
        ("2x2 UPA 3/4-coverage", upa_coverage),
        ("quantization loss", quantization_loss),
        ("tiny-instance exhaustive match", tiny_exhaustive),
        ("gradient suite", gradient_suite),
        ("monotone ascent", monotone_ascent),
        ("baseline dominance", baseline_dominance),
        ("data-rate outage", rate_outage),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {} {name}: {} [{:.1?}]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

fn ula_training(n: usize, count: usize) -> Vec<Vec<Complex64>> {
    generate_training_set(
        &ChannelParams::single_ray(),
        &ArrayGeometry::ula(n),
        count,
        &mut seeded_rng(TRAIN_SEED),
    )
}

fn upa_training(geom: &ArrayGeometry, phi: AngleRange, count: usize) -> Vec<Vec<Complex64>> {
    let p = ChannelParams::single_ray().with_ranges(AngleRange::full_zenith(), phi);
    generate_training_set(&p, geom, count, &mut seeded_rng(TRAIN_SEED))
}

/// Design settings shared by the design-heavy criteria: the default schedule
/// with a larger gradient step, which converges far faster on coverage metrics.
fn design_cfg(k: usize) -> LloydConfig {
    let mut cfg = LloydConfig::new(k).with_seed(DESIGN_SEED);
    cfg.step_size = 0.5;
    cfg
}

fn design(samples: &[Vec<Complex64>], m: &Metric, cfg: &LloydConfig) -> Codebook {
    lloyd_design(samples, m, cfg).expect("design").codebook
}

fn spatial(geom: ArrayGeometry, cb: Codebook, phi: AngleRange, gammas: Vec<f64>) -> EvalReport {
    let mut cfg = SpatialConfig::new(geom, cb);
    cfg.phi_range = phi;
    cfg.trials = TRIALS;
    cfg.seed = EVAL_SEED;
    cfg.gammas = gammas;
    run_spatial_response_experiment(&cfg).expect("spatial experiment")
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

fn dft_floor() -> Outcome {
    let mut cfg = SpatialConfig::new(ArrayGeometry::ula(8), dft_codebook(8).unwrap());
    cfg.grid = true;
    cfg.trials = 10_000;
    let r = run_spatial_response_experiment(&cfg).unwrap();
    Outcome {
        pass: r.min_gain >= 3.1,
        detail: format!(
            "min over {} grid points {:.4} (need >= 3.1)",
            r.gains.len(),
            r.min_gain
        ),
    }
}

/// ULA-8 outage designs over a threshold family, each at two sigmoid slopes.
/// Returns (gamma, alpha, report) with outage evaluated at `eval_gammas`.
fn ula_outage_family(k: usize, gammas: &[f64], eval_gammas: &[f64]) -> Family {
    let train = ula_training(8, 2000);
    let mut out = Vec::new();
    for &g in gammas {
        for alpha in [1.0, 8.0] {
            let cb = design(&train, &Metric::coverage(g, alpha).unwrap(), &design_cfg(k));
            let r = spatial(
                ArrayGeometry::ula(8),
                cb,
                AngleRange::front_azimuth(),
                eval_gammas.to_vec(),
            );
            out.push((g, alpha, r));
        }
    }
    out
}

/// Per codebook size: threshold family, required best mean, zero-outage target.
const ULA_CASES: [(usize, &[f64], f64, f64); 3] = [
    (2, &[1.0, 1.5, 2.0, 2.5, 3.0], 2.85, 1.1),
    (4, &[1.5, 2.0, 2.5, 3.0, 3.5], 4.0, 1.6),
    (8, &[3.0, 3.5, 4.0, 4.5, 5.0], 5.9, 3.0),
];

type Family = Vec<(f64, f64, EvalReport)>;

/// Both ULA criteria read the same designs, so build them once.
fn ula_families() -> &'static [Family] {
    static FAMILIES: OnceLock<Vec<Family>> = OnceLock::new();
    FAMILIES.get_or_init(|| {
        ULA_CASES
            .iter()
            .map(|&(k, gammas, _, target)| ula_outage_family(k, gammas, &[target]))
            .collect()
    })
}

fn lb_means() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for ((k, _, need, _), fam) in ULA_CASES.iter().zip(ula_families()) {
        let (g, a, r) = fam
            .iter()
            .max_by(|x, y| x.2.mean_gain.total_cmp(&y.2.mean_gain))
            .unwrap();
        pass &= r.mean_gain >= *need;
        parts.push(format!(
            "K={k} best mean {:.3} (gamma {g}, alpha {a}; need >= {need})",
            r.mean_gain
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn zero_outage() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (&(k, _, _, target), fam) in ULA_CASES.iter().zip(ula_families()) {
        let (g, a, r) = fam
            .iter()
            .min_by(|x, y| {
                x.2.outage_at(target)
                    .unwrap()
                    .total_cmp(&y.2.outage_at(target).unwrap())
            })
            .unwrap();
        let out = r.outage_at(target).unwrap();
        pass &= out == 0.0;
        parts.push(format!(
            "K={k} J_out({target}) = {} (gamma {g}, alpha {a}, min gain {:.3})",
            pct(out),
            r.min_gain
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn outage_metric() -> Outcome {
    let geom = ArrayGeometry::upa(4, 4);
    let phi = AngleRange::upper_azimuth();
    let train = upa_training(&geom, phi, 8000);
    let cfg = design_cfg(8);
    let eval = |m: Metric| spatial(geom, design(&train, &m, &cfg), phi, vec![4.0, 8.0]);
    let avg = eval(Metric::avg_gain());
    let cov8 = eval(Metric::coverage(8.0, 1.0).unwrap());
    let cov4 = eval(Metric::coverage(4.0, 2.0).unwrap());
    let (a3, c3) = (avg.outage_at(8.0).unwrap(), cov8.outage_at(8.0).unwrap());
    let (a6, c6) = (avg.outage_at(4.0).unwrap(), cov4.outage_at(4.0).unwrap());
    let checks = [
        ("3dB gap", c3 <= a3 - 0.02),
        ("3dB avg ~19%", (a3 - 0.19).abs() <= 0.05),
        ("3dB cov ~15%", (c3 - 0.15).abs() <= 0.05),
        ("6dB cov <= 2%", c6 <= 0.02),
        ("6dB avg ~7%", (a6 - 0.07).abs() <= 0.04),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Outcome {
        pass: failed.is_empty(),
        detail: format!(
            "3dB-outage avg {} vs J_out(8) {}; 6dB-outage avg {} vs J_out(4) {}{}",
            pct(a3),
            pct(c3),
            pct(a6),
            pct(c6),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failed.join(", "))
            }
        ),
    }
}

fn upa_coverage() -> Outcome {
    let geom = ArrayGeometry::upa(2, 2);
    let phi = AngleRange::upper_azimuth();
    let train = upa_training(&geom, phi, 2000);
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, target) in [(3, 0.22), (4, 0.12)] {
        let cb = design(&train, &Metric::coverage(3.0, 8.0).unwrap(), &design_cfg(k));
        let r = spatial(geom, cb, phi, vec![3.0]);
        let out = r.outage_at(3.0).unwrap();
        pass &= (out - target).abs() <= 0.06;
        parts.push(format!(
            "K={k} 3/4-outage {} (target {} +- 6)",
            pct(out),
            pct(target)
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn quantization_loss() -> Outcome {
    let phi = AngleRange::front_azimuth();
    let mut pass = true;
    let mut parts = Vec::new();
    for (geom, k, count, target, tol) in [
        (ArrayGeometry::upa(2, 2), 4, 2000, 0.37, 0.10),
        (ArrayGeometry::upa(4, 4), 8, 4000, 0.12, 0.08),
    ] {
        let train = upa_training(&geom, phi, count);
        let mean = |bits: Option<u32>| {
            let cfg = design_cfg(k).with_restarts(20).with_bits(bits);
            spatial(geom, design(&train, &Metric::avg_gain(), &cfg), phi, vec![]).mean_gain
        };
        let ideal = mean(None);
        let loss1 = 1.0 - mean(Some(1)) / ideal;
        let loss5 = 1.0 - mean(Some(5)) / ideal;
        let ok1 = (loss1 - target).abs() <= tol;
        let ok5 = loss5 <= 0.02;
        pass &= ok1 && ok5;
        parts.push(format!(
            "{}x{} K={k}: 1-bit loss {} (target {} +- {:.0}{}), 5-bit loss {}{}",
            geom.n_v(),
            geom.n_h(),
            pct(loss1),
            pct(target),
            100.0 * tol,
            if ok1 { "" } else { " FAIL" },
            pct(loss5),
            if ok5 { "" } else { " FAIL" },
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn tiny_exhaustive() -> Outcome {
    let samples = ula_training(2, 50);
    let mut worst: f64 = 0.0;
    let metrics = [
        Metric::avg_gain(),
        Metric::rate(),
        Metric::coverage(1.2, 8.0).unwrap(),
    ];
    for m in &metrics {
        let cfg = LloydConfig::new(1)
            .with_seed(DESIGN_SEED)
            .with_bits(Some(2));
        let got = quantized_lloyd_design(&samples, m, &cfg)
            .unwrap()
            .objective();
        let mut best = f64::NEG_INFINITY;
        for code in 0..16usize {
            let phases = [code & 3, code >> 2].map(|q| q as f64 * std::f64::consts::FRAC_PI_2);
            best = best.max(direct_objective(
                &phases,
                &samples.iter().collect::<Vec<_>>(),
                m,
            ));
        }
        worst = worst.max((got - best).abs());
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("max |designed - exhaustive| over 3 metrics = {worst:.2e}"),
    }
}

/// Objective written out from the phases, independent of the library's codeword type.
fn direct_objective(phases: &[f64], cell: &[&Vec<Complex64>], m: &Metric) -> f64 {
    let n = phases.len() as f64;
    let total: f64 = cell
        .iter()
        .map(|h| {
            let s: Complex64 = phases
                .iter()
                .zip(h.iter())
                .map(|(&p, &x)| Complex64::from_polar(1.0, -p) * x)
                .sum();
            let x = s.norm_sqr() / n;
            match m.kind {
                MetricKind::AvgGain => x,
                MetricKind::Rate => (1.0 + x).log2(),
                MetricKind::Coverage => 1.0 / (1.0 + (-m.alpha * (x - m.gamma)).exp()),
            }
        })
        .sum();
    total / cell.len() as f64
}

fn gradient_suite() -> Outcome {
    let mut rng = seeded_rng(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=16);
        let phases: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        let cell: Vec<Vec<Complex64>> = (0..rng.random_range(1..=8))
            .map(|_| (0..n).map(|_| complex_gaussian(&mut rng)).collect())
            .collect();
        let m = match rng.random_range(0..3) {
            0 => Metric::avg_gain(),
            1 => Metric::rate(),
            _ => Metric::coverage(rng.random_range(0.2..2.0), rng.random_range(0.5..4.0)).unwrap(),
        };
        let w = Codeword::from_phases(phases.clone()).unwrap();
        let refs: Vec<&[Complex64]> = cell.iter().map(|h| h.as_slice()).collect();
        let g = objective_gradient(&w, &refs, &m).unwrap();
        let cell_refs: Vec<&Vec<Complex64>> = cell.iter().collect();
        let step = 1e-6;
        for i in 0..n {
            let mut up = phases.clone();
            let mut dn = phases.clone();
            up[i] += step;
            dn[i] -= step;
            let fd = (direct_objective(&up, &cell_refs, &m)
                - direct_objective(&dn, &cell_refs, &m))
                / (2.0 * step);
            // relative error, floored so components that vanish are compared absolutely
            worst = worst.max((g[i] - fd).abs() / fd.abs().max(1e-3));
        }
    }
    Outcome {
        pass: worst < 1e-4,
        detail: format!("100 instances, worst component relative error {worst:.2e} (need < 1e-4)"),
    }
}

fn monotone_ascent() -> Outcome {
    let mut rng = seeded_rng(77);
    let mut bad = Vec::new();
    for run in 0..20 {
        let geom = if rng.random_bool(0.5) {
            ArrayGeometry::ula(rng.random_range(2..=8))
        } else {
            ArrayGeometry::upa(2, rng.random_range(2..=3))
        };
        let params = if rng.random_bool(0.5) {
            ChannelParams::single_ray()
        } else {
            ChannelParams::nlos()
        };
        let samples = generate_training_set(&params, &geom, rng.random_range(50..300), &mut rng);
        let m = match run % 3 {
            0 => Metric::avg_gain(),
            1 => Metric::rate(),
            _ => Metric::coverage(rng.random_range(0.5..(geom.len() as f64)), 8.0).unwrap(),
        };
        let mut cfg = LloydConfig::new(rng.random_range(1..=5))
            .with_seed(run)
            .with_restarts(2)
            .with_bits(if run % 4 == 3 {
                Some(rng.random_range(1..=4))
            } else {
                None
            });
        cfg.step_size = [0.05, 0.5, 2.0][run as usize % 3];
        cfg.max_iters = 60;
        let res = lloyd_design(&samples, &m, &cfg).unwrap();
        if res.objective_history.windows(2).any(|w| w[1] < w[0]) {
            bad.push(run);
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "20 runs, every history non-decreasing".into()
        } else {
            format!("decreasing history in runs {bad:?}")
        },
    }
}

fn baseline_dominance() -> Outcome {
    let geom = ArrayGeometry::ula(8);
    let lb = design(
        &ula_training(8, 2000),
        &Metric::avg_gain(),
        &LloydConfig::new(4).with_seed(DESIGN_SEED),
    );
    let steer = beam_steering_codebook(&geom, &equispaced_ula_directions(4).unwrap()).unwrap();
    let phi = AngleRange::front_azimuth();
    let a = spatial(geom, lb, phi, vec![]).mean_gain_db;
    let b = spatial(geom, steer, phi, vec![]).mean_gain_db;
    Outcome {
        pass: a - b >= 1.0,
        detail: format!(
            "LB {a:.2} dB vs steering {b:.2} dB, advantage {:.2} dB (need >= 1)",
            a - b
        ),
    }
}

fn rate_outage() -> Outcome {
    let geom = ArrayGeometry::ula(8);
    let lb = design(
        &ula_training(8, 2000),
        &Metric::rate(),
        &LloydConfig::new(4).with_seed(DESIGN_SEED),
    );
    let steer = beam_steering_codebook(&geom, &equispaced_ula_directions(4).unwrap()).unwrap();
    let run = |cb: Codebook| {
        let mut cfg = LinkConfig::receive_only(geom, cb);
        cfg.snr_db = vec![5.0];
        cfg.trials = TRIALS;
        cfg.seed = EVAL_SEED;
        cfg.rate_thresholds = vec![1.0];
        run_link_experiment(&cfg).unwrap()[0]
            .rate_outage_at(1.0)
            .unwrap()
    };
    let (a, b) = (run(lb), run(steer));
    Outcome {
        pass: a <= 0.15 && b >= 0.30,
        detail: format!(
            "Pr(R<1): LB(rate) {} (need <= 15%), steering {} (need >= 30%)",
            pct(a),
            pct(b)
        ),
    }
}
