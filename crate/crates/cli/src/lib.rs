//! Command-line frontend: builds specs from flags, runs the computations and
//! writes deterministic CSV or key-value reports.
//!
//! SNR is always `P / (2σn²)`. The noise variance per dimension defaults to
//! 0.5, so the SNR in dB equals the signal power in dB.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use polar_mi::channels::{ChannelSpec, Snr};
use polar_mi::decomp::{monte_carlo_mi, sweep};
use polar_mi::dirstats::{
    max_entropy_check, truncated_gaussian_sigma_for_mean_square, von_mises_kappa_for_resultant,
    CircularDistribution,
};
use polar_mi::numerics::QuadratureSpec;
use polar_mi::spectral::{
    coherent_power_fraction, count_local_maxima, dbm_to_watts, fiber_capacity_curve,
    optimal_launch_power, simulate_spectral_loss, watts_to_dbm, FiberModelSpec, SpectralLossConfig,
    DEMO_NOISE_VARIANCE_PER_DIM,
};

pub mod format;
pub mod select;

use format::{fmt_g, svg_chart, Series};

/// Failure classes, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Config(polar_mi::Error),
    #[error("{0}")]
    Numerical(polar_mi::Error),
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Config(_) => 3,
            Self::Numerical(_) => 4,
            Self::Io { .. } => 5,
        }
    }
}

impl From<polar_mi::Error> for CliError {
    fn from(e: polar_mi::Error) -> Self {
        let mut root = &e;
        while let polar_mi::Error::AtSnr { source, .. } = root {
            root = source;
        }
        match root {
            polar_mi::Error::Truncation(_) => Self::Numerical(e),
            _ => Self::Config(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "polar-mi",
    version,
    about = "Amplitude/phase decomposition of mutual information"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Four-term decomposition over an SNR grid, as CSV.
    Decompose(DecomposeArgs),
    /// Moments, entropy and maximum-entropy comparisons of a circular law.
    Dirstats(DirstatsArgs),
    /// Simulate spectral loss from white phase noise.
    SpectralSim(SpectralArgs),
    /// Ring-input capacity versus launch power under spectral loss, as CSV.
    Fiber(FiberArgs),
    /// Print a constellation as `re im prob` lines.
    Constellation(ConstellationArgs),
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    /// Gauss–Legendre points per amplitude window.
    #[arg(long, default_value_t = 512)]
    pub amp_points: usize,
    /// Phase grid size (power of two).
    #[arg(long, default_value_t = 4096)]
    pub phase_points: usize,
    /// Amplitude windows extend this many noise deviations.
    #[arg(long, default_value_t = 8.0)]
    pub trunc_sigmas: f64,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 2_000_000)]
    pub mc_samples: usize,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0x5EED)]
    pub seed: u64,
}

impl QuadArgs {
    fn spec(&self) -> Result<QuadratureSpec, CliError> {
        let q = QuadratureSpec {
            amp_points: self.amp_points,
            phase_points: self.phase_points,
            amp_truncation_sigmas: self.trunc_sigmas,
            mc_samples: self.mc_samples,
            seed: self.seed,
        };
        q.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(q)
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// gaussian | halfgauss | ook | psk:M | askpsk:A,M[,offset] | qam:M | rings:R
    #[arg(long)]
    pub input: String,
    /// SNR grid in dB as start:stop:step.
    #[arg(long, default_value = "0:20:5", allow_hyphen_values = true)]
    pub snr_db: String,
    /// Noise variance per real dimension.
    #[arg(long, default_value_t = 0.5)]
    pub noise_var: f64,
    /// wrapped-gaussian:SIGMA | von-mises:KAPPA | uniform | none
    #[arg(long, default_value = "none")]
    pub phase_noise: String,
    /// Phase-noise variance of fast (per-sample) phase noise removed as
    /// spectral loss.
    #[arg(long)]
    pub spectral_loss: Option<f64>,
    /// Leave the direct_bits column as nan instead of computing it.
    #[arg(long)]
    pub no_direct: bool,
    /// Append Monte Carlo mc_bits and mc_stderr columns.
    #[arg(long)]
    pub monte_carlo: bool,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// CSV destination; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write an SVG chart of the terms to this path.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DirstatsArgs {
    /// wrapped-gaussian:SIGMA | von-mises:KAPPA | truncated-gaussian:SIGMA | uniform
    #[arg(long)]
    pub dist: String,
    /// Grid size for the relative entropies.
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    /// Standard deviation of the per-sample phase noise, radians.
    #[arg(long)]
    pub sigma: f64,
    /// Samples per symbol.
    #[arg(long, default_value_t = 64)]
    pub oversample: usize,
    #[arg(long, default_value_t = 200_000)]
    pub symbols: usize,
    /// First seed; runs use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of runs to average.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
}

#[derive(Debug, Args)]
pub struct FiberArgs {
    /// Nonlinearity coefficient c in σ² = c P², W⁻².
    #[arg(long, default_value_t = 1.1e5)]
    pub c: f64,
    #[arg(long, default_value_t = 16)]
    pub rings: usize,
    /// Launch powers in dBm as start:stop:step.
    #[arg(long, default_value = "-10:10:0.25", allow_hyphen_values = true)]
    pub power_dbm: String,
    /// Additive noise variance per real dimension in watts (demo default).
    #[arg(long, default_value_t = DEMO_NOISE_VARIANCE_PER_DIM)]
    pub noise_var: f64,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstellationArgs {
    #[arg(long)]
    pub input: String,
    /// Average power.
    #[arg(long, default_value_t = 1.0)]
    pub power: f64,
}

/// Runs a parsed command. Tabular output goes to `--output` when given and
/// to `out` otherwise; short summaries go to `log`.
pub fn run(cli: &Cli, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Decompose(a) => {
            let text = decompose(a)?;
            emit(&text, a.output.as_deref(), out)
        }
        Command::Dirstats(a) => emit(&dirstats(a)?, None, out),
        Command::SpectralSim(a) => emit(&spectral(a)?, None, out),
        Command::Fiber(a) => {
            let (text, summary) = fiber(a)?;
            let _ = writeln!(log, "{summary}");
            emit(&text, a.output.as_deref(), out)
        }
        Command::Constellation(a) => {
            let input = select::parse_input(&a.input)?;
            let text = input.with_power(a.power)?.constellation_text()?;
            emit(&text, None, out)
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn positive(value: f64, flag: &str) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Usage(format!(
            "--{flag} must be positive, got {value}"
        )))
    }
}

fn decompose(a: &DecomposeArgs) -> Result<String, CliError> {
    let input = select::parse_input(&a.input)?;
    let phase_noise = select::parse_phase_noise(&a.phase_noise)?;
    let grid_db = select::parse_range(&a.snr_db)?;
    let quad = a.quad.spec()?;
    positive(a.noise_var, "noise-var")?;
    if let Some(s) = a.spectral_loss {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(CliError::Usage(format!(
                "--spectral-loss must be >= 0, got {s}"
            )));
        }
    }

    let mut channel = ChannelSpec::awgn(a.noise_var)?;
    if let Some(pn) = phase_noise {
        channel = channel.with_phase_noise(pn)?;
    }
    if let Some(s) = a.spectral_loss {
        channel = channel.with_spectral_loss(s)?;
    }
    let grid = grid_db
        .iter()
        .map(|&d| Snr::from_db(d))
        .collect::<polar_mi::Result<Vec<_>>>()?;
    let rows = sweep(&input, &channel, &grid, &quad, !a.no_direct)?;

    let mut csv =
        String::from("snr_db,amp_bits,phase_bits,mixed1_bits,mixed2_bits,sum_bits,direct_bits");
    if a.monte_carlo {
        csv.push_str(",mc_bits,mc_stderr");
    }
    csv.push('\n');
    for (r, &d) in rows.iter().zip(&grid_db) {
        let mut fields = vec![
            d,
            r.amplitude,
            r.phase,
            r.mixed1,
            r.mixed2,
            r.sum(),
            r.direct.unwrap_or(f64::NAN),
        ];
        if a.monte_carlo {
            let x = input.with_power(channel.power_for_snr(r.snr))?;
            let mc = monte_carlo_mi(&x, &channel, r.snr, &quad)?;
            fields.extend([mc.bits, mc.std_error]);
        }
        let line: Vec<String> = fields.into_iter().map(fmt_g).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }

    if let Some(path) = &a.plot {
        let col = |f: fn(&polar_mi::decomp::DecompositionResult) -> f64| {
            grid_db.iter().zip(&rows).map(|(&d, r)| (d, f(r))).collect()
        };
        let series = [
            Series {
                name: "amplitude",
                points: col(|r| r.amplitude),
            },
            Series {
                name: "phase",
                points: col(|r| r.phase),
            },
            Series {
                name: "mixed I",
                points: col(|r| r.mixed1),
            },
            Series {
                name: "mixed II",
                points: col(|r| r.mixed2),
            },
            Series {
                name: "sum",
                points: col(|r| r.sum()),
            },
        ];
        let title = format!("{} decomposition", a.input);
        write_file(path, &svg_chart(&title, "SNR (dB)", "bits/symbol", &series))?;
    }
    Ok(csv)
}

fn dirstats(a: &DirstatsArgs) -> Result<String, CliError> {
    let d = select::parse_distribution(&a.dist)?;
    if a.grid < 64 || !a.grid.is_power_of_two() {
        return Err(CliError::Usage(format!(
            "--grid must be a power of two >= 64, got {}",
            a.grid
        )));
    }
    let m = d.moments();
    let h = d.entropy();
    let msd = d.mean_square_deviation();
    let mut lines = vec![
        ("distribution", a.dist.clone()),
        ("mean_direction", fmt_g(m.mean_direction)),
        ("resultant_length", fmt_g(m.resultant_length)),
        ("circular_variance", fmt_g(m.circular_variance)),
        ("circular_std", fmt_g(m.circular_std)),
        ("mean_square_deviation", fmt_g(msd)),
        ("entropy_nats", fmt_g(h)),
        ("entropy_bits", fmt_g(h / std::f64::consts::LN_2)),
    ];
    if m.resultant_length > 0.0 && m.resultant_length < 1.0 {
        let kappa = von_mises_kappa_for_resultant(m.resultant_length)?;
        let vm = CircularDistribution::von_mises(m.mean_direction, kappa)?;
        lines.push(("von_mises_same_resultant_kappa", fmt_g(kappa)));
        lines.push(("von_mises_same_resultant_entropy_nats", fmt_g(vm.entropy())));
        lines.push((
            "kl_to_von_mises_nats",
            fmt_g(max_entropy_check(&d, &vm, a.grid)?),
        ));
    }
    if msd > 0.0 && msd < PI * PI / 3.0 {
        let sigma = truncated_gaussian_sigma_for_mean_square(msd)?;
        let tg = CircularDistribution::truncated_gaussian(0.0, sigma)?;
        lines.push(("truncated_gaussian_same_msd_sigma", fmt_g(sigma)));
        lines.push((
            "truncated_gaussian_same_msd_entropy_nats",
            fmt_g(tg.entropy()),
        ));
        lines.push((
            "kl_to_truncated_gaussian_nats",
            fmt_g(max_entropy_check(&d, &tg, a.grid)?),
        ));
    }
    Ok(lines
        .into_iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect())
}

fn spectral(a: &SpectralArgs) -> Result<String, CliError> {
    if !(a.sigma >= 0.0) || !a.sigma.is_finite() {
        return Err(CliError::Usage(format!(
            "--sigma must be >= 0, got {}",
            a.sigma
        )));
    }
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be >= 1".into()));
    }
    let n = a.runs as f64;
    let mut sums = [0.0; 5];
    let mut predicted = 0.0;
    for seed in a.seed..a.seed + a.runs {
        let r = simulate_spectral_loss(&SpectralLossConfig::new(
            a.sigma,
            a.oversample,
            a.symbols,
            seed,
        ))?;
        for (s, v) in sums.iter_mut().zip([
            r.measured_amp_attenuation,
            r.residual_phase_std,
            r.aliasing_floor,
            r.input_power,
            r.output_power,
        ]) {
            *s += v / n;
        }
        predicted = r.predicted_amp_attenuation;
    }
    let lines = [
        ("sigma", fmt_g(a.sigma)),
        ("oversample", a.oversample.to_string()),
        ("symbols", a.symbols.to_string()),
        ("runs", a.runs.to_string()),
        ("measured_amp_attenuation", fmt_g(sums[0])),
        ("predicted_amp_attenuation", fmt_g(predicted)),
        ("relative_error", fmt_g(sums[0] / predicted - 1.0)),
        (
            "coherent_power_fraction",
            fmt_g(coherent_power_fraction(a.sigma)),
        ),
        ("residual_phase_std", fmt_g(sums[1])),
        ("aliasing_floor_db", fmt_g(10.0 * sums[2].log10())),
        ("input_power", fmt_g(sums[3])),
        ("output_power", fmt_g(sums[4])),
    ];
    Ok(lines
        .into_iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect())
}

fn fiber(a: &FiberArgs) -> Result<(String, String), CliError> {
    let dbm = select::parse_range(&a.power_dbm)?;
    let quad = a.quad.spec()?;
    positive(a.c, "c")?;
    positive(a.noise_var, "noise-var")?;
    if a.rings == 0 {
        return Err(CliError::Usage("--rings must be >= 1".into()));
    }
    let spec = FiberModelSpec {
        c: a.c,
        noise_variance_per_dim: a.noise_var,
        rings: a.rings,
        power_w: dbm.iter().copied().map(dbm_to_watts).collect(),
    };
    let curve = fiber_capacity_curve(&spec, &quad)?;
    let mut csv = String::from("power_w,power_dbm,eff_snr_db,cap_bits\n");
    for (p, &d) in curve.iter().zip(&dbm) {
        let line = [p.power_w, d, p.eff_snr_db, p.cap_bits]
            .map(fmt_g)
            .join(",");
        csv.push_str(&line);
        csv.push('\n');
    }
    let best = curve
        .iter()
        .zip(&dbm)
        .max_by(|x, y| x.0.cap_bits.total_cmp(&y.0.cap_bits))
        .expect("nonempty grid");
    let caps: Vec<f64> = curve.iter().map(|p| p.cap_bits).collect();
    let summary = format!(
        "peak {} bits at {} dBm; 1/sqrt(2c) = {} dBm; local maxima: {}",
        fmt_g(best.0.cap_bits),
        fmt_g(*best.1),
        fmt_g(watts_to_dbm(optimal_launch_power(a.c))),
        count_local_maxima(&caps)
    );
    if let Some(path) = &a.plot {
        let series = [Series {
            name: "amplitude + phase",
            points: dbm.iter().copied().zip(caps.iter().copied()).collect(),
        }];
        let title = format!("{}-ring capacity, c = {}", a.rings, fmt_g(a.c));
        write_file(
            path,
            &svg_chart(&title, "launch power (dBm)", "bits/symbol", &series),
        )?;
    }
    Ok((csv, summary))
}
