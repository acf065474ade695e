//! Command-line front end.
//!
//! Every flag can also be given in a `key=value` config file passed with
//! `--config`; flags on the command line take precedence over the file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::array::{ArrayGeometry, Codebook, Direction};
use crate::baselines::{
    beam_steering_codebook, dft_codebook, equispaced_ula_directions, upa2x2_steering_spec,
    PairOrder, SteeringSpec,
};
use crate::channel::{generate_training_set, seeded_rng, AngleRange, ChannelParams};
use crate::error::{Error, Result};
use crate::eval::{
    link_summary_csv, run_link_experiment, run_spatial_response_experiment, write_report,
    LinkConfig, SpatialConfig,
};
use crate::io::{objective_to_csv, read_codebook, read_training_set, write_codebook, write_text};
use crate::lloyd::{lloyd_design, LloydConfig};
use crate::metrics::{Metric, DEFAULT_ALPHA};

#[derive(Debug, Parser)]
#[command(
    name = "lloyd-beam",
    version,
    about = "Analog beamforming codebook design and evaluation"
)]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file mirroring the long flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    opts: Opts,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Design a codebook from training channels; writes codebook.txt and objective.csv.
    Design,
    /// Build a reference codebook (DFT, beam steering, tabulated 2x2 UPA); writes codebook.txt.
    Baseline,
    /// Effective spatial response over random or gridded directions; writes report.json and cdf.csv.
    Spatial,
    /// Beam-swept link over one or more SNR points; writes per-SNR reports and link.csv.
    Link,
    /// Ping-pong sweep between two codebook files; writes sweep.csv.
    Sweep,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Avg,
    Rate,
    Cov,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineArg {
    Dft,
    Steering,
    Table1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChannelArg {
    Los,
    Nlos,
    SingleRay,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    ThetaPhi,
    PhiTheta,
}

#[derive(Debug, Args)]
struct Opts {
    /// Array shape: `N` for a ULA or `NvxNh` for a UPA.
    #[arg(long, global = true, default_value = "8")]
    geometry: String,
    /// Element spacing in wavelengths, `dv,dh`.
    #[arg(long, global = true, default_value = "0.5,0.5")]
    spacing: String,
    /// Transmit array shape for link runs with a Tx codebook.
    #[arg(long, global = true, default_value = "1")]
    tx_geometry: String,
    /// Codebook size K.
    #[arg(long, global = true, default_value_t = 4)]
    k: usize,
    #[arg(long, global = true, value_enum, default_value = "avg")]
    metric: MetricArg,
    /// Coverage threshold on the absolute gain scale.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Coverage threshold relative to N (γ = γ̂·N).
    #[arg(long, global = true)]
    gamma_hat: Option<f64>,
    /// Sigmoid steepness for the coverage metric.
    #[arg(long, global = true, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Phase-shifter resolution; omit for ideal phases.
    #[arg(long, global = true)]
    bits: Option<u32>,
    /// Gradient step size.
    #[arg(long, global = true, default_value_t = 0.05)]
    step: f64,
    #[arg(long, global = true, default_value_t = 20)]
    grad_steps: usize,
    #[arg(long, global = true, default_value_t = 200)]
    iters: usize,
    #[arg(long, global = true, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 5)]
    restarts: usize,
    /// Training-set file; generated in-process when omitted.
    #[arg(long, global = true)]
    training: Option<PathBuf>,
    /// Number of generated training channels.
    #[arg(long, global = true, default_value_t = 2000)]
    train_count: usize,
    /// Channel preset. Training defaults to single-ray, links to LOS.
    #[arg(long, global = true, value_enum)]
    channel: Option<ChannelArg>,
    /// Ricean factor override (`inf` for single-ray).
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// NLOS path count override.
    #[arg(long, global = true)]
    n_nlos: Option<usize>,
    /// Zenith range in degrees, `lo,hi`.
    #[arg(
        long,
        global = true,
        default_value = "0,180",
        allow_hyphen_values = true
    )]
    theta_range: String,
    /// Azimuth range in degrees, `lo,hi`.
    #[arg(
        long,
        global = true,
        default_value = "-90,90",
        allow_hyphen_values = true
    )]
    phi_range: String,
    #[arg(long, global = true, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// SNR points in dB, comma separated.
    #[arg(long, global = true, default_value = "5", allow_hyphen_values = true)]
    snr_db: String,
    /// Outage thresholds on the gain, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    gammas: Option<String>,
    /// Outage thresholds on the rate in bit/s/Hz, comma separated.
    #[arg(long, global = true)]
    rate_thresholds: Option<String>,
    /// Evaluate on a dense deterministic grid instead of random draws.
    #[arg(long, global = true)]
    grid: bool,
    /// Select beams from noiseless observations.
    #[arg(long, global = true)]
    noiseless: bool,
    /// Receive-side (or only) codebook file.
    #[arg(long, global = true)]
    codebook: Option<PathBuf>,
    /// Transmit-side codebook file.
    #[arg(long, global = true)]
    tx_codebook: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    baseline: Option<BaselineArg>,
    /// Steering directions in degrees, `theta:phi;theta:phi;...`.
    #[arg(long, global = true)]
    directions: Option<String>,
    /// Reading of the tabulated angle pairs.
    #[arg(long, global = true, value_enum, default_value = "theta-phi")]
    pair_order: OrderArg,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_with_args(std::env::args_os())
}

/// Splices `--key value` pairs from the config file in front of the user's
/// arguments, so later (command-line) occurrences override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            match args.get(i + 1) {
                Some(p) => path = Some(PathBuf::from(p)),
                None => return Err(Error::config("config", "missing file name")),
            }
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut extra: Vec<OsString> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.clone(),
                line: n + 1,
                msg: format!("expected key=value, got `{line}`"),
            });
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            return Err(Error::config(
                "config",
                "config files cannot include other config files",
            ));
        }
        match value {
            "true" => extra.push(format!("--{key}").into()),
            "false" => {}
            _ => extra.push(format!("--{key}={value}").into()),
        }
    }
    let mut out = Vec::with_capacity(args.len() + extra.len());
    let mut it = args.into_iter();
    out.extend(it.next());
    out.extend(extra);
    out.extend(it);
    Ok(out)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let o = &cli.opts;
    match cli.cmd {
        Cmd::Design => design(o),
        Cmd::Baseline => {
            let geom = geometry(&o.geometry, &o.spacing)?;
            let cb = baseline(o, &geom)?;
            create_dir(&o.out)?;
            let path = o.out.join("codebook.txt");
            write_codebook(&cb, &path)?;
            println!(
                "wrote {} ({} codewords, N={})",
                path.display(),
                cb.len(),
                cb.dim()
            );
            Ok(())
        }
        Cmd::Spatial => spatial(o),
        Cmd::Link => link(o, true),
        Cmd::Sweep => link(o, false),
    }
}

fn design(o: &Opts) -> Result<()> {
    let geom = geometry(&o.geometry, &o.spacing)?;
    let metric = metric(o, geom.len())?;
    let mut cfg = LloydConfig::new(o.k)
        .with_seed(o.seed)
        .with_restarts(o.restarts)
        .with_bits(o.bits);
    cfg.step_size = o.step;
    cfg.grad_steps_per_iter = o.grad_steps;
    cfg.max_iters = o.iters;
    cfg.rel_tol = o.tol;
    cfg.validate()?;
    let samples = match &o.training {
        Some(p) => {
            let s = read_training_set(p)?;
            if s.first().is_some_and(|h| h.len() != geom.len()) {
                return Err(Error::config(
                    "training",
                    "sample length does not match the array",
                ));
            }
            s
        }
        None => {
            if o.train_count == 0 {
                return Err(Error::config("train-count", "must be at least 1"));
            }
            let params = channel(o, ChannelArg::SingleRay)?;
            // Training draws use a stream of their own so they never alias a design restart.
            let mut rng = seeded_rng(o.seed);
            rng.set_stream(u64::MAX);
            generate_training_set(&params, &geom, o.train_count, &mut rng)
        }
    };
    let res = lloyd_design(&samples, &metric, &cfg)?;
    create_dir(&o.out)?;
    write_codebook(&res.codebook, o.out.join("codebook.txt"))?;
    write_text(
        o.out.join("objective.csv"),
        &objective_to_csv(&res.objective_history),
    )?;
    println!(
        "objective {:.6} after {} iterations (best of {} restarts) -> {}",
        res.objective(),
        res.objective_history.len(),
        res.restart_objectives.len(),
        o.out.display()
    );
    Ok(())
}

fn spatial(o: &Opts) -> Result<()> {
    let geom = geometry(&o.geometry, &o.spacing)?;
    let cb = codebook_source(o, &geom)?;
    let mut cfg = SpatialConfig::new(geom, cb);
    cfg.theta_range = angle_range(&o.theta_range, "theta-range")?;
    cfg.phi_range = angle_range(&o.phi_range, "phi-range")?;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.gammas = list(o.gammas.as_deref(), "gammas")?;
    cfg.grid = o.grid;
    let report = run_spatial_response_experiment(&cfg)?;
    create_dir(&o.out)?;
    write_report(&report, &o.out)?;
    println!(
        "mean {:.4} ({:.2} dB), min {:.4}, max {:.4} -> {}",
        report.mean_gain,
        report.mean_gain_db,
        report.min_gain,
        report.max_gain,
        o.out.display()
    );
    Ok(())
}

/// `full` writes per-SNR report directories plus link.csv; otherwise only sweep.csv.
fn link(o: &Opts, full: bool) -> Result<()> {
    let geom_rx = geometry(&o.geometry, &o.spacing)?;
    let cb_rx = codebook_source(o, &geom_rx)?;
    let mut cfg = LinkConfig::receive_only(geom_rx, cb_rx);
    match &o.tx_codebook {
        Some(p) => {
            cfg.geom_tx = geometry(&o.tx_geometry, &o.spacing)?;
            cfg.cb_tx = read_codebook(p)?;
        }
        None if !full => {
            return Err(Error::config(
                "tx-codebook",
                "sweep needs both codebook files",
            ))
        }
        None => {
            cfg.geom_tx = geometry(&o.tx_geometry, &o.spacing)?;
            if cfg.geom_tx.len() != 1 {
                return Err(Error::config(
                    "tx-codebook",
                    "required when the Tx array has more than one element",
                ));
            }
        }
    }
    if !full && o.codebook.is_none() {
        return Err(Error::config("codebook", "sweep needs both codebook files"));
    }
    cfg.channel = channel(o, ChannelArg::Los)?;
    cfg.snr_db = list(Some(&o.snr_db), "snr-db")?;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.gammas = list(o.gammas.as_deref(), "gammas")?;
    cfg.rate_thresholds = list(o.rate_thresholds.as_deref(), "rate-thresholds")?;
    cfg.noiseless_selection = o.noiseless;
    let reports = run_link_experiment(&cfg)?;
    create_dir(&o.out)?;
    let summary = link_summary_csv(&reports);
    if full {
        for r in &reports {
            let dir = o.out.join(format!("snr_{}", r.snr_db.unwrap_or_default()));
            create_dir(&dir)?;
            write_report(r, &dir)?;
        }
        write_text(o.out.join("link.csv"), &summary)?;
    } else {
        write_text(o.out.join("sweep.csv"), &summary)?;
    }
    print!("{summary}");
    Ok(())
}

fn codebook_source(o: &Opts, geom: &ArrayGeometry) -> Result<Codebook> {
    let cb = match (&o.codebook, o.baseline) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "codebook",
                "give either --codebook or --baseline, not both",
            ))
        }
        (Some(p), None) => read_codebook(p)?,
        (None, Some(_)) => baseline(o, geom)?,
        (None, None) => {
            return Err(Error::config(
                "codebook",
                "need --codebook FILE or --baseline KIND",
            ))
        }
    };
    if cb.dim() != geom.len() {
        return Err(Error::config(
            "codebook",
            format!(
                "codeword length {} does not match the {}-element array",
                cb.dim(),
                geom.len()
            ),
        ));
    }
    Ok(cb)
}

fn baseline(o: &Opts, geom: &ArrayGeometry) -> Result<Codebook> {
    let kind = o
        .baseline
        .ok_or_else(|| Error::config("baseline", "missing baseline kind"))?;
    match kind {
        BaselineArg::Dft => {
            if !geom.is_linear() {
                return Err(Error::config(
                    "baseline",
                    "the DFT codebook is defined for linear arrays",
                ));
            }
            dft_codebook(geom.len())
        }
        BaselineArg::Steering => {
            let spec = match &o.directions {
                Some(d) => directions(d)?,
                None if geom.is_linear() => equispaced_ula_directions(o.k)?,
                None => {
                    return Err(Error::config(
                        "directions",
                        "planar steering needs explicit directions",
                    ))
                }
            };
            beam_steering_codebook(geom, &spec)
        }
        BaselineArg::Table1 => {
            if geom.n_v() != 2 || geom.n_h() != 2 {
                return Err(Error::config(
                    "geometry",
                    "tabulated steering angles are for a 2x2 array",
                ));
            }
            let order = match o.pair_order {
                OrderArg::ThetaPhi => PairOrder::ThetaPhi,
                OrderArg::PhiTheta => PairOrder::PhiTheta,
            };
            let spec = upa2x2_steering_spec(o.k, order)
                .map_err(|_| Error::config("k", "tabulated for k = 3 or 4"))?;
            beam_steering_codebook(geom, &spec)
        }
    }
}

fn metric(o: &Opts, n: usize) -> Result<Metric> {
    match o.metric {
        MetricArg::Avg => Ok(Metric::avg_gain()),
        MetricArg::Rate => Ok(Metric::rate()),
        MetricArg::Cov => {
            let gamma = match (o.gamma, o.gamma_hat) {
                (Some(_), Some(_)) => {
                    return Err(Error::config("gamma", "give either --gamma or --gamma-hat"))
                }
                (Some(g), None) => g,
                (None, Some(h)) => h * n as f64,
                (None, None) => {
                    return Err(Error::config("gamma", "coverage metric needs a threshold"))
                }
            };
            Metric::coverage(gamma, o.alpha)
        }
    }
}

fn channel(o: &Opts, default: ChannelArg) -> Result<ChannelParams> {
    let mut p = match o.channel.unwrap_or(default) {
        ChannelArg::Los => ChannelParams::los(),
        ChannelArg::Nlos => ChannelParams::nlos(),
        ChannelArg::SingleRay => ChannelParams::single_ray(),
    };
    if let Some(k) = o.kappa {
        p.kappa = k;
    }
    if let Some(i) = o.n_nlos {
        p.n_nlos = i;
    }
    p = p.with_ranges(
        angle_range(&o.theta_range, "theta-range")?,
        angle_range(&o.phi_range, "phi-range")?,
    );
    p.validate()?;
    Ok(p)
}

fn geometry(shape: &str, spacing: &str) -> Result<ArrayGeometry> {
    let bad = || Error::config("geometry", format!("expected N or NvxNh, got `{shape}`"));
    let (n_v, n_h) = match shape.split_once(['x', 'X']) {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => (shape.trim().parse().map_err(|_| bad())?, 1),
    };
    let d = pair(spacing, "spacing")?;
    ArrayGeometry::new(n_v, n_h, d.0, d.1).map_err(|e| Error::config("geometry", e.to_string()))
}

fn angle_range(s: &str, field: &str) -> Result<AngleRange> {
    let (lo, hi) = pair(s, field)?;
    AngleRange::degrees(lo, hi).map_err(|e| Error::config(field, e.to_string()))
}

fn pair(s: &str, field: &str) -> Result<(f64, f64)> {
    let v = list(Some(s), field)?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::config(
            field,
            format!("expected two comma-separated numbers, got `{s}`"),
        )),
    }
}

fn list(s: Option<&str>, field: &str) -> Result<Vec<f64>> {
    let Some(s) = s else { return Ok(vec![]) };
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(field, format!("`{t}` is not a number")))
        })
        .collect()
}

fn directions(s: &str) -> Result<SteeringSpec> {
    let pairs = s
        .split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (a, b) = t.split_once(':').unwrap_or((t, "0"));
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config("directions", format!("`{t}` is not theta:phi")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let dirs = pairs
        .iter()
        .map(|&(t, p)| {
            Direction::from_degrees(t, p).map_err(|e| Error::config("directions", e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    SteeringSpec::new(dirs).map_err(|e| Error::config("directions", e.to_string()))
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}
