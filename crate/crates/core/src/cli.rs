//! The `aglab` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a scientific check fails,
//! 2 for usage, configuration, or runtime errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::aug_graph::{DiskAugmentation, GraphBuilder};
use crate::config::{Config, DataSource};
use crate::distributions::{sample_gaussian_mixture, sample_uniform_square};
use crate::grid::Grid;
use crate::io::{spectrum_table, write_json, Provenance};
use crate::metrics::error_bound;
use crate::spectral::{zero_multiplicity, ZERO_EIGENVALUE_TOL};
use crate::studies::{run_study, write_outputs, write_timing, CheckStatus, STUDY_NAMES};
use crate::{seed, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "aglab", version, about = "Augmentation-graph spectra, error bounds and reproducible studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file; defaults apply to anything it omits.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set n_grid=[50,100]` or `--set graph.cell_size=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads (default: `AGLAB_WORKERS`, then the logical CPU count).
    #[arg(long, env = "AGLAB_WORKERS")]
    workers: Option<usize>,
    /// Also write one SVG line chart per study panel.
    #[arg(long)]
    svg: bool,
    /// Log level: error, warn, info, debug.
    #[arg(long)]
    log_level: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one of the studies and write `<name>.csv` and `<name>.summary.json`.
    Study {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(STUDY_NAMES))]
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the error bound 8a/l + 16a + 2(1-b)tv.
    Bound {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        tv: f64,
    },
    /// Build one augmentation graph and write its Laplacian spectrum.
    GraphSpectrum {
        #[command(flatten)]
        common: Common,
    },
}

/// Formats with 6 significant digits, trailing zeros trimmed.
pub fn format_significant(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        let s = format!("{v:.5e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa =
            if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        return format!("{mantissa}e{e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

struct Session {
    config: Config,
    out: PathBuf,
    svg: bool,
}

fn session(common: &Common) -> Result<Session> {
    let mut config = Config::load(common.config.as_deref(), &common.overrides)?;
    if let Some(w) = common.workers {
        config.output.workers = w;
    }
    if let Some(level) = &common.log_level {
        config.output.log_level = level.clone();
    }
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let svg = common.svg || config.output.svg;
    Ok(Session { config, out, svg })
}

fn init_logging(level: &str) {
    let _ = env_logger::Builder::new().parse_filters(level).format_timestamp(None).try_init();
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn cmd_study(name: &str, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let s = session(common)?;
    init_logging(&s.config.output.log_level);
    let started = Instant::now();
    let result = with_pool(s.config.output.workers, || run_study(name, &s.config))??;
    let seconds = started.elapsed().as_secs_f64();
    let mut written = write_outputs(&result, &s.config, &s.out, s.svg)?;
    written.push(write_timing(name, &s.out, seconds)?);
    for c in &result.checks {
        let status = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail if c.informational => "NOTE",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        writeln!(out, "{status} {}: {}", c.name, c.detail)?;
    }
    for p in &written {
        log::info!("wrote {}", p.display());
    }
    let verdict = if result.passed() { "passed" } else { "FAILED" };
    writeln!(out, "{name}: {verdict} ({} rows, {seconds:.2}s) -> {}", result.table.len(), s.out.display())?;
    Ok(if result.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct SpectrumMeta {
    tool_version: String,
    config_hash: String,
    master_seed: u64,
    points: usize,
    radius: f64,
    grid: Grid,
    n: usize,
    d_min: f64,
    dropped: usize,
    components: usize,
    zero_eigenvalues: usize,
    eigenvalues: Vec<f64>,
}

/// Builds the configured graph and writes `graph-spectrum.csv` and
/// `graph-spectrum.json`.
pub fn graph_spectrum(config: &Config, dir: &Path) -> Result<Vec<PathBuf>> {
    let d = &config.data;
    let r = config.augmentation.radius;
    let data_seed = seed::derive(config.study.seed, &[seed::tag("graph-spectrum")]);
    let cloud = match d.source {
        DataSource::GaussianMixture => sample_gaussian_mixture(&config.mixture()?, d.n, data_seed)?,
        DataSource::Uniform => sample_uniform_square(d.n, data_seed),
    };
    let grid = config.grid_for(cloud.points(), r)?;
    let builder = GraphBuilder::new(grid, DiskAugmentation::new(r)?)
        .with_labeler(config.labeler()?)
        .with_supersample(config.augmentation.supersample)
        .with_node_cap(config.graph.max_nodes);
    let kernel = builder.kernel(&cloud)?;
    let values = kernel.laplacian_spectrum()?;
    let provenance = Provenance::new(config.hash(), config.study.seed);
    std::fs::create_dir_all(dir)?;
    let csv = dir.join("graph-spectrum.csv");
    spectrum_table(&values).write_file(&csv, Some(&provenance))?;
    let meta = SpectrumMeta {
        tool_version: provenance.tool_version.clone(),
        config_hash: provenance.config_hash.clone(),
        master_seed: provenance.master_seed,
        points: cloud.len(),
        radius: r,
        grid,
        n: kernel.node_count(),
        d_min: kernel.d_min(),
        dropped: kernel.dropped(),
        components: kernel.component_count(),
        zero_eigenvalues: zero_multiplicity(&values, ZERO_EIGENVALUE_TOL),
        eigenvalues: values.iter().take(50).copied().collect(),
    };
    let json = dir.join("graph-spectrum.json");
    write_json(&json, &meta)?;
    Ok(vec![csv, json])
}

fn cmd_graph_spectrum(common: &Common, out: &mut dyn Write) -> Result<i32> {
    let s = session(common)?;
    init_logging(&s.config.output.log_level);
    let written = with_pool(s.config.output.workers, || graph_spectrum(&s.config, &s.out))??;
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(EXIT_OK)
}

fn cmd_bound(alpha: f64, lambda: f64, beta: f64, tv: f64, out: &mut dyn Write) -> Result<i32> {
    let value = error_bound(alpha, lambda, beta, tv)?;
    writeln!(out, "{}", format_significant(value))?;
    Ok(EXIT_OK)
}

/// Runs the command line with explicit arguments and streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Study { name, common } => cmd_study(name, common, out),
        Command::Bound { alpha, lambda, beta, tv } => cmd_bound(*alpha, *lambda, *beta, *tv, out),
        Command::GraphSpectrum { common } => cmd_graph_spectrum(common, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs with the process arguments and standard streams.
pub fn run() -> i32 {
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(1.6), "1.6");
        assert_eq!(format_significant(1.6000000000000003), "1.6");
        assert_eq!(format_significant(0.6), "0.6");
        assert_eq!(format_significant(123456.7), "123457");
        assert_eq!(format_significant(0.0012345678), "0.00123457");
        assert_eq!(format_significant(-2.5), "-2.5");
        assert_eq!(format_significant(1.0e20), "1e20");
    }

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(std::iter::once("aglab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bound_command() {
        assert_eq!(run_args(&["bound", "--alpha", "0", "--lambda", "0.5", "--beta", "1", "--tv", "0"]).1, "0\n");
        assert_eq!(run_args(&["bound", "--alpha", "0.05", "--lambda", "0.5", "--beta", "1", "--tv", "0.9"]).1, "1.6\n");
        assert_eq!(run_args(&["bound", "--alpha", "0", "--lambda", "1", "--beta", "0", "--tv", "0.3"]).1, "0.6\n");
        let (code, _, err) = run_args(&["bound", "--alpha", "0.1", "--lambda", "0", "--beta", "1", "--tv", "0"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("vacuous bound"), "{err}");
        assert_eq!(run_args(&["bound", "--alpha", "x", "--lambda", "1", "--beta", "1", "--tv", "0"]).0, EXIT_USAGE);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["study", "nope"]).0, EXIT_USAGE);
        assert_eq!(run_args(&[]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }
}
