//! Batch experiment driver.
//!
//! Subcommands build tables, run exact computations and Monte Carlo, and
//! compare exact quantities against their asymptotic evaluators across
//! n-grids. Output is CSV (with a `#`-comment metadata block) or JSON,
//! plot-ready: no figures are produced here.
//!
//! Exit codes: 2 for usage/parse problems, 3 for capacity gates, 4 for
//! numeric range problems, 1 otherwise.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::asymptotics::{
    self, dnk_asym, erdos_turan_standardize, erdos_turan_standardize_poly, h_asym_ge, h_asym_poly,
    llt_constants, mgf_asym_poly, mgf_trunc_asym, precise_dev, psi_explicit, RateFamily,
    ThetaScaling, ZeroExpansionKind, ZetaZeros,
};
use crate::error::{Error, Result};
use crate::numtheory::MangoldtTable;
use crate::permstat::{exact_distribution, Functional};
use crate::sampler::{self, MonteCarloOptions, PMF_DRIFT_WARN};
use crate::series::{self, LogWeightTable, Truncation};
use crate::stats::{ks_distance, normal_cdf};
use crate::weights::{parse_weight_spec, WeightModel};

/// Environment variable overriding the bundled zeta-zeros table.
pub const ZEROS_ENV_VAR: &str = "CYCLEMETER_ZEROS";

#[derive(Parser, Debug)]
#[command(
    name = "cyclemeter",
    version,
    about = "Exact and asymptotic statistics of the order of random permutations with cycle weights"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct WeightArg {
    /// Weight model: `uniform | ewens:<t> | poly:<g> |
    /// genewens:r=<r>,theta=<t>,eps=<none|power:a,b>[,K=<k>] | custom:<path>`
    #[arg(long)]
    pub weights: String,
}

impl WeightArg {
    fn model(&self) -> Result<WeightModel> {
        parse_weight_spec(&self.weights)
    }
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    /// Number of Monte Carlo samples
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Master seed; sample i is a pure function of (seed, i)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = available parallelism); results do not depend on it
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    /// Carry the vartheta factor the derivation produces
    Scaled,
    /// Reproduce the printed vartheta-free displays
    StrictPaper,
}

impl From<ScalingArg> for ThetaScaling {
    fn from(s: ScalingArg) -> ThetaScaling {
        match s {
            ScalingArg::Scaled => ThetaScaling::Scaled,
            ScalingArg::StrictPaper => ThetaScaling::StrictPaper,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Export the normalization table log h_0..log h_n as CSV
    HTable {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        /// Output path; `-` writes to stdout
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Draw samples of a functional; CSV rows index,value
    Sample {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        /// Functional: `logY | logO | delta | logY_t | logO_t | d_nk:<k>`
        #[arg(long, default_value = "logO")]
        stat: String,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value = "-")]
        out: String,
        /// Also write summary statistics as JSON
        #[arg(long)]
        stats_out: Option<PathBuf>,
    },
    /// Exact or Monte Carlo expectation of a functional
    Expect {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "logY")]
        stat: String,
        /// Exact coefficient-extraction route (default)
        #[arg(long, conflicts_with = "mc_route")]
        exact: bool,
        /// Monte Carlo route
        #[arg(long = "mc")]
        mc_route: bool,
        /// Truncation: `full | bn | <integer threshold>`
        #[arg(long, default_value = "full")]
        trunc: String,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Exact distribution of a functional (small n), CSV value,probability
    Dist {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "logY")]
        stat: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Exact vs asymptotic moment generating function
    Mgf {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        /// Exponent: class-F models read it as t (applied as t/log n to the
        /// truncated variable); polynomial models read it as s directly
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        /// Optional imaginary part of the exponent
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        imag: f64,
        #[arg(long, value_enum, default_value_t = ScalingArg::Scaled)]
        scaling: ScalingArg,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Divisor-class statistics: exact vs asymptotic main terms
    Dnk {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Truncation: `full | bn | <integer>`
        #[arg(long, default_value = "full")]
        trunc: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Central limit check: KS distance of standardized log O_n
    Clt {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Local limit check: binned sigma_n P(O-script in bin) vs 1/sqrt(2 pi)
    Llt {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        #[arg(long, default_value_t = 4)]
        bins: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Large deviations: scaled log-mgf vs the limit chi(t) across n
    Ldp {
        #[command(flatten)]
        weights: WeightArg,
        /// Ascending comma-separated n values
        #[arg(long, value_delimiter = ',')]
        n_grid: Vec<usize>,
        /// Comma-separated t values
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "-1,1",
            allow_hyphen_values = true
        )]
        t: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ScalingArg::Scaled)]
        scaling: ScalingArg,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Tail frequencies vs the precise deviations estimate
    Dev {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        mc: McArgs,
        /// Comma-separated x values (x > 0)
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5")]
        x: Vec<f64>,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Expected order: exact vs finite expansion vs zeta-zero expansion
    Elogo {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long, value_delimiter = ',')]
        n_grid: Vec<usize>,
        /// trunc compares the truncated order, full the untruncated one
        #[arg(long, default_value = "trunc")]
        which: String,
        /// Zeros file (falls back to $CYCLEMETER_ZEROS, then the bundled table)
        #[arg(long)]
        zeros: Option<PathBuf>,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Chebyshev psi: sieve vs explicit formula over zeta zeros
    Psi {
        /// Comma-separated evaluation points (x >= 2)
        #[arg(long, value_delimiter = ',')]
        x: Vec<u64>,
        #[arg(long)]
        zeros: Option<PathBuf>,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// n-grid sweep of one exact-vs-asymptotic pair, long format
    Compare {
        #[command(flatten)]
        weights: WeightArg,
        #[arg(long, value_enum)]
        pair: ComparePair,
        #[arg(long, value_delimiter = ',')]
        n_grid: Vec<usize>,
        /// Divisor class for the dnk pairs
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Exponent for the mgf pairs
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, value_enum, default_value_t = ScalingArg::Scaled)]
        scaling: ScalingArg,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComparePair {
    /// log h_n exact vs the logarithmic-singularity main term
    HGe,
    /// log h_n exact vs the saddle-point main term
    HPoly,
    /// `E[D_nk]` exact vs (vartheta/k) log(n/k)
    DnkE,
    /// P(D*_nk = 0) exact vs the Gamma-ratio main term
    DnkP0,
    /// truncated mgf exact vs the mod-Gaussian reference form
    MgfGe,
    /// full mgf exact vs the saddle-point main term
    MgfPoly,
    /// expected truncated log-order exact vs the finite expansion
    ElogoTrunc,
}

/// Run a parsed command; errors are mapped to exit codes by `main_entry`.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::HTable { weights, n, out } => cmd_h_table(&weights, n, &out),
        Command::Sample {
            weights,
            n,
            stat,
            mc,
            out,
            stats_out,
        } => cmd_sample(&weights, n, &stat, &mc, &out, stats_out.as_deref()),
        Command::Expect {
            weights,
            n,
            stat,
            exact,
            mc_route,
            trunc,
            mc,
            out,
        } => cmd_expect(
            &weights,
            n,
            &stat,
            exact,
            mc_route,
            &trunc,
            &mc,
            out.as_deref(),
        ),
        Command::Dist {
            weights,
            n,
            stat,
            out,
        } => cmd_dist(&weights, n, &stat, &out),
        Command::Mgf {
            weights,
            n,
            s,
            imag,
            scaling,
            out,
        } => cmd_mgf(&weights, n, s, imag, scaling.into(), &out),
        Command::Dnk {
            weights,
            n,
            k,
            trunc,
            out,
        } => cmd_dnk(&weights, n, k, &trunc, &out),
        Command::Clt {
            weights,
            n,
            mc,
            out,
        } => cmd_clt(&weights, n, &mc, &out),
        Command::Llt {
            weights,
            n,
            mc,
            lo,
            hi,
            bins,
            out,
        } => cmd_llt(&weights, n, &mc, lo, hi, bins, &out),
        Command::Ldp {
            weights,
            n_grid,
            t,
            scaling,
            out,
        } => cmd_ldp(&weights, &n_grid, &t, scaling.into(), &out),
        Command::Dev {
            weights,
            n,
            mc,
            x,
            out,
        } => cmd_dev(&weights, n, &mc, &x, &out),
        Command::Elogo {
            weights,
            n_grid,
            which,
            zeros,
            out,
        } => cmd_elogo(&weights, &n_grid, &which, zeros.as_deref(), &out),
        Command::Psi { x, zeros, out } => cmd_psi(&x, zeros.as_deref(), &out),
        Command::Compare {
            weights,
            pair,
            n_grid,
            k,
            s,
            scaling,
            out,
        } => cmd_compare(&weights, pair, &n_grid, k, s, scaling.into(), &out),
    }
}

/// Parse, run, and map errors to documented exit codes.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Definition(_) => 2,
        Error::Capacity(_) => 3,
        Error::NumericRange(_) | Error::Overflow(_) => 4,
        _ => 1,
    }
}

// ---------------------------------------------------------------------------
// output plumbing

/// Format a float with 17 significant digits (exact f64 round trip).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

/// Metadata block written at the top of every output file.
#[derive(Debug, Clone, Default)]
pub struct Meta {
    pairs: Vec<(String, String)>,
}

impl Meta {
    pub fn new(weight_spec: Option<&str>) -> Self {
        let mut m = Meta::default();
        m.push("version", env!("CARGO_PKG_VERSION"));
        if let Some(w) = weight_spec {
            m.push("weights", w);
        }
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.pairs.push((key.to_string(), value.to_string()));
    }

    fn csv_block(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.pairs {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}

fn write_output(path: &str, contents: &str) -> Result<()> {
    if path == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(contents.as_bytes())?;
        Ok(())
    } else {
        std::fs::write(path, contents)?;
        Ok(())
    }
}

fn write_csv(path: &str, meta: &Meta, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut s = meta.csv_block();
    s.push_str(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    write_output(path, &s)
}

fn write_json<T: Serialize>(path: &str, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("json encoding: {e}")))?;
    s.push('\n');
    write_output(path, &s)
}

/// A parsed CSV output of this tool: metadata pairs, header, string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number `{}`", r[idx])))
            })
            .collect()
    }
}

/// Re-read a CSV written by this tool.
pub fn parse_csv_table(text: &str) -> Result<CsvTable> {
    let mut meta = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.to_string()).collect();
        if header.is_none() {
            header = Some(cells);
        } else {
            rows.push(cells);
        }
    }
    Ok(CsvTable {
        meta,
        header: header.ok_or_else(|| Error::Parse("CSV has no header row".into()))?,
        rows,
    })
}

fn parse_trunc(s: &str) -> Result<Truncation> {
    match s {
        "full" | "none" => Ok(Truncation::Full),
        "bn" => Ok(Truncation::Bn),
        other => other.parse::<usize>().map(Truncation::At).map_err(|_| {
            Error::Parse(format!(
                "truncation must be full|bn|<integer>, got `{other}`"
            ))
        }),
    }
}

fn trunc_name(t: Truncation) -> String {
    match t {
        Truncation::Full => "full".into(),
        Truncation::Bn => "bn".into(),
        Truncation::At(b) => b.to_string(),
    }
}

/// Resolve the zeta-zeros table: explicit path, then $CYCLEMETER_ZEROS,
/// then the bundled 100-zero table.
pub fn load_zeros(explicit: Option<&Path>) -> Result<ZetaZeros> {
    if let Some(p) = explicit {
        return ZetaZeros::load(p);
    }
    if let Ok(p) = std::env::var(ZEROS_ENV_VAR) {
        return ZetaZeros::load(Path::new(&p));
    }
    Ok(ZetaZeros::bundled())
}

fn ascending(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Parse("empty n-grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parse("n-grid must be strictly ascending".into()));
    }
    Ok(())
}

fn build_table(model: &WeightModel, n: usize) -> Result<LogWeightTable> {
    LogWeightTable::build(model, n)
}

fn mangoldt_for(n: usize) -> Result<MangoldtTable> {
    MangoldtTable::build(n.max(2))
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_h_table(weights: &WeightArg, n: usize, out: &str) -> Result<()> {
    let model = weights.model()?;
    let table = build_table(&model, n)?;
    let rows: Vec<Vec<String>> = (0..=n)
        .map(|i| vec![i.to_string(), fmt_f64(table.log_h(i))])
        .collect();
    write_csv(out, &Meta::new(Some(&weights.weights)), "n,log_h", &rows)
}

fn mc_run(
    weights: &WeightArg,
    n: usize,
    stat: &str,
    mc: &McArgs,
    keep_raw: bool,
) -> Result<(Functional, sampler::SampleStats)> {
    let model = weights.model()?;
    let functional = Functional::parse(stat)?;
    let table = build_table(&model, n)?;
    let mang = if functional.needs_mangoldt() {
        Some(mangoldt_for(n)?)
    } else {
        None
    };
    let pmf = sampler::first_cycle_length_pmf(&table, n)?;
    if pmf.drift > PMF_DRIFT_WARN {
        eprintln!(
            "warning: first-cycle pmf renormalization drift {} at n={n}",
            pmf.drift
        );
    }
    let stats = sampler::monte_carlo(
        functional,
        &table,
        mang.as_ref(),
        n,
        mc.samples,
        &MonteCarloOptions {
            seed: mc.seed,
            workers: mc.workers,
            keep_raw,
            ..Default::default()
        },
    )?;
    Ok((functional, stats))
}

fn cmd_sample(
    weights: &WeightArg,
    n: usize,
    stat: &str,
    mc: &McArgs,
    out: &str,
    stats_out: Option<&Path>,
) -> Result<()> {
    let (functional, stats) = mc_run(weights, n, stat, mc, true)?;
    let raw = stats.raw.as_ref().expect("keep_raw was set");
    let rows: Vec<Vec<String>> = raw
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), fmt_f64(*v)])
        .collect();
    let mut meta = Meta::new(Some(&weights.weights));
    meta.push("n", n);
    meta.push("stat", functional.name());
    meta.push("seed", mc.seed);
    write_csv(out, &meta, "index,value", &rows)?;
    if let Some(p) = stats_out {
        let mut trimmed = stats.clone();
        trimmed.raw = None;
        write_json(p.to_str().unwrap_or("-"), &trimmed)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_expect(
    weights: &WeightArg,
    n: usize,
    stat: &str,
    _exact: bool,
    mc_route: bool,
    trunc: &str,
    mc: &McArgs,
    out: Option<&str>,
) -> Result<()> {
    let trunc = parse_trunc(trunc)?;
    let value = if mc_route {
        // the sampler evaluates truncated functionals at b_n; map the
        // truncation request onto the functional names it understands
        let stat_mc = match (trunc, stat) {
            (Truncation::Full, s) => s.to_string(),
            (Truncation::Bn, "logY") => "logY_t".to_string(),
            (Truncation::Bn, "logO") => "logO_t".to_string(),
            (Truncation::Bn, s @ ("logY_t" | "logO_t")) => s.to_string(),
            (Truncation::Bn, other) => {
                return Err(Error::Parse(format!(
                    "Monte Carlo route has no bn-truncated form of `{other}`; use --exact"
                )))
            }
            (Truncation::At(_), _) => {
                return Err(Error::Parse(
                    "Monte Carlo route supports --trunc full or bn only".into(),
                ))
            }
        };
        mc_run(weights, n, &stat_mc, mc, false)?.1.mean
    } else {
        let model = weights.model()?;
        let functional = Functional::parse(stat)?;
        let table = build_table(&model, n)?;
        match functional {
            Functional::LogY => series::expect_log_y(&table, n, trunc)?,
            Functional::LogYTrunc => series::expect_log_y(&table, n, Truncation::Bn)?,
            Functional::LogO => series::expect_log_o(&table, &mangoldt_for(n)?, n, trunc)?,
            Functional::LogOTrunc => {
                series::expect_log_o(&table, &mangoldt_for(n)?, n, Truncation::Bn)?
            }
            Functional::Delta => {
                series::expect_log_y(&table, n, trunc)?
                    - series::expect_log_o(&table, &mangoldt_for(n)?, n, trunc)?
            }
            Functional::DCount { k } => series::expect_dnk(&table, n, k, trunc)?,
        }
    };
    match out {
        None => {
            println!("{}", fmt_f64(value));
            Ok(())
        }
        Some(path) => {
            let mut meta = Meta::new(Some(&weights.weights));
            meta.push("stat", stat);
            meta.push("route", if mc_route { "mc" } else { "exact" });
            meta.push("trunc", trunc_name(trunc));
            if mc_route {
                meta.push("seed", mc.seed);
                meta.push("samples", mc.samples);
            }
            write_csv(
                path,
                &meta,
                "n,stat,value",
                &[vec![n.to_string(), stat.to_string(), fmt_f64(value)]],
            )
        }
    }
}

fn cmd_dist(weights: &WeightArg, n: usize, stat: &str, out: &str) -> Result<()> {
    let model = weights.model()?;
    let functional = Functional::parse(stat)?;
    let table = build_table(&model, n)?;
    let mang = if functional.needs_mangoldt() {
        Some(mangoldt_for(n)?)
    } else {
        None
    };
    let dist = exact_distribution(functional, n, &table, mang.as_ref())?;
    let rows: Vec<Vec<String>> = dist
        .iter()
        .map(|(v, p)| vec![fmt_f64(*v), fmt_f64(*p)])
        .collect();
    let mut meta = Meta::new(Some(&weights.weights));
    meta.push("n", n);
    meta.push("stat", functional.name());
    write_csv(out, &meta, "value,probability", &rows)
}

fn cmd_mgf(
    weights: &WeightArg,
    n: usize,
    s: f64,
    imag: f64,
    scaling: ThetaScaling,
    out: &str,
) -> Result<()> {
    let model = weights.model()?;
    let table = build_table(&model, n)?;
    let (exact, asym, regime) = match &model {
        WeightModel::Polynomial { gamma } => {
            let exact = series::mgf_log_y(&table, n, Complex64::new(s, imag), Truncation::Full)?;
            let asym = Complex64::new(mgf_asym_poly(s, n, *gamma)?.exp(), 0.0);
            (exact, asym, "poly")
        }
        _ => {
            let (_, theta, _) = model.singularity_params()?;
            let ln_n = (n as f64).ln();
            let exponent = Complex64::new(s / ln_n, imag / ln_n);
            let exact = series::mgf_log_y(&table, n, exponent, Truncation::Bn)?;
            let asym = mgf_trunc_asym(Complex64::new(s, imag), n, theta, scaling)?;
            (exact, asym, "class-F")
        }
    };
    let mut meta = Meta::new(Some(&weights.weights));
    meta.push("regime", regime);
    meta.push("scaling", scaling);
    write_csv(
        out,
        &meta,
        "n,s_re,s_im,exact_re,exact_im,asym_re,asym_im",
        &[vec![
            n.to_string(),
            fmt_f64(s),
            fmt_f64(imag),
            fmt_f64(exact.re),
            fmt_f64(exact.im),
            fmt_f64(asym.re),
            fmt_f64(asym.im),
        ]],
    )
}

fn cmd_dnk(weights: &WeightArg, n: usize, k: usize, trunc: &str, out: &str) -> Result<()> {
    let model = weights.model()?;
    let trunc = parse_trunc(trunc)?;
    let table = build_table(&model, n)?;
    let e_exact = series::expect_dnk(&table, n, k, trunc)?;
    let p_exact = series::p_dnk_zero(&table, n, k, trunc)?;
    let (_, theta, _) = model.singularity_params()?;
    let asym = dnk_asym(n, k, theta)?;
    if !asym.k_in_range {
        eprintln!("warning: k={k} outside the stated uniform range for n={n}");
    }
    let mut meta = Meta::new(Some(&weights.weights));
    meta.push("trunc", trunc_name(trunc));
    write_csv(
        out,
        &meta,
        "n,k,e_exact,e_asym,p0_exact,p0_asym,k_in_range",
        &[vec![
            n.to_string(),
            k.to_string(),
            fmt_f64(e_exact),
            fmt_f64(asym.expectation),
            fmt_f64(p_exact),
            fmt_f64(asym.p_zero),
            asym.k_in_range.to_string(),
        ]],
    )
}

#[derive(Serialize)]
struct CltReport {
    ks_distance: f64,
    n: usize,
    samples: u64,
    centering: f64,
    scale: f64,
    weights: String,
    seed: u64,
    version: &'static str,
}

type Standardizer = Box<dyn Fn(f64) -> f64>;

fn standardizer(model: &WeightModel, n: usize) -> Result<(f64, f64, Standardizer)> {
    match model {
        WeightModel::Polynomial { gamma } => {
            let gamma = *gamma;
            let lambda = asymptotics::poisson_parameter(n, gamma)?;
            let ln_n = (n as f64).ln();
            let c = (1.0 + gamma).powi(2);
            let centering = lambda * ln_n / c;
            let scale = lambda.sqrt() * ln_n / c;
            Ok((
                centering,
                scale,
                Box::new(move |l| erdos_turan_standardize_poly(l, n, gamma).unwrap()),
            ))
        }
        _ => {
            let (_, theta, _) = model.singularity_params()?;
            let ln_n = (n as f64).ln();
            let centering = 0.5 * theta * ln_n.powi(2);
            let scale = ((theta / 3.0) * ln_n.powi(3)).sqrt();
            Ok((
                centering,
                scale,
                Box::new(move |l| erdos_turan_standardize(l, n, theta).unwrap()),
            ))
        }
    }
}

fn cmd_clt(weights: &WeightArg, n: usize, mc: &McArgs, out: &str) -> Result<()> {
    let model = weights.model()?;
    let (centering, scale, standardize) = standardizer(&model, n)?;
    let (_, stats) = mc_run(weights, n, "logO", mc, true)?;
    let std: Vec<f64> = stats
        .raw
        .as_ref()
        .expect("keep_raw was set")
        .iter()
        .map(|&v| standardize(v))
        .collect();
    let ks = ks_distance(&std, normal_cdf);
    write_json(
        out,
        &CltReport {
            ks_distance: ks,
            n,
            samples: mc.samples,
            centering,
            scale,
            weights: weights.weights.clone(),
            seed: mc.seed,
            version: env!("CARGO_PKG_VERSION"),
        },
    )
}

fn cmd_llt(
    weights: &WeightArg,
    n: usize,
    mc: &McArgs,
    lo: f64,
    hi: f64,
    bins: usize,
    out: &str,
) -> Result<()> {
    if hi <= lo || bins == 0 {
        return Err(Error::Parse("llt needs hi > lo and bins >= 1".into()));
    }
    let model = weights.model()?;
    let (_, theta, _) = model.singularity_params()?;
    let consts = llt_constants(n, theta)?;
    let (_, stats) = mc_run(weights, n, "logO", mc, true)?;
    let raw = stats.raw.as_ref().expect("keep_raw was set");
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in raw {
        let o = (v - consts.centering) / consts.scale;
        if o >= lo && o < hi {
            let idx = (((o - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
    }
    let prediction = width / (2.0 * std::f64::consts::PI).sqrt();
    let rows: Vec<Vec<String>> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let est = consts.sigma_n * c as f64 / mc.samples as f64;
            vec![
                fmt_f64(lo + width * i as f64),
                fmt_f64(lo + width * (i + 1) as f64),
                fmt_f64(est),
                fmt_f64(prediction),
                fmt_f64(est - prediction),
            ]
        })
        .collect();
    let mut meta = Meta::new(Some(&weights.weights));
    meta.push("n", n);
    meta.push("sigma_n", fmt_f64(consts.sigma_n));
    meta.push("seed", mc.seed);
    write_csv(
        out,
        &meta,
        "bin_lo,bin_hi,sigma_p_hat,prediction,diff",
        &rows,
    )
}

fn cmd_ldp(
    weights: &WeightArg,
    n_grid: &[usize],
    ts: &[f64],
    scaling: ThetaScaling,
    out: &str,
) -> Result<()> {
    ascending(n_grid)?;
    let model = weights.model()?;
    let family = match &model {
        WeightModel::Polynomial { gamma } => RateFamily::Polynomial { gamma: *gamma },
        _ => {
            let (_, theta, _) = model.singularity_params()?;
            RateFamily::GeneralizedEwens { theta }
        }
    };
    let mut rows = Vec::new();
    for &n in n_grid {
        let table = build_table(&model, n)?;
        let ln_n = (n as f64).ln();
        for &t in ts {
            let (empirical, reference) = match family {
                RateFamily::GeneralizedEwens { .. } => {
                    let m = series::mgf_log_y_real(&table, n, t / ln_n, Truncation::Bn)?;
                    (m.ln() / ln_n, asymptotics::chi(family, t, scaling)?)
                }
                RateFamily::Polynomial { gamma } => {
                    let m = series::mgf_log_y_real(&table, n, t / ln_n, Truncation::Full)?;
                    (
                        m.ln() / (n as f64).powf(gamma / (1.0 + gamma)),
                        asymptotics::chi(family, t, scaling)?,
                    )
                }
            };
            rows.push(vec![
                n.to_string(),
                fmt_f64(t),
                fmt_f64(empirical),
                fmt_f64(reference),
                fmt_f64(empirical - reference),
            ]);
        }
    }
    let mut meta = Meta::new(Some(&weights.weights));
    meta.push("scaling", scaling);
    write_csv(out, &meta, "n,t,empirical,chi,diff", &rows)
}

fn cmd_dev(weights: &WeightArg, n: usize, mc: &McArgs, xs: &[f64], out: &str) -> Result<()> {
    let model = weights.model()?;
    let family = match &model {
        WeightModel::Polynomial { gamma } => RateFamily::Polynomial { gamma: *gamma },
        _ => {
            let (_, theta, _) = model.singularity_params()?;
            RateFamily::GeneralizedEwens { theta }
        }
    };
    let (_, stats) = mc_run(weights, n, "logO", mc, true)?;
    let raw = stats.raw.as_ref().expect("keep_raw was set");
    let ln_n = (n as f64).ln();
    let mut rows = Vec::new();
    for &x in xs {
        let dev = precise_dev(family, x, n)?;
        // threshold on log O_n implied by O-script >= x * scale_param
        let (threshold, scale_param) = match family {
            RateFamily::GeneralizedEwens { theta } => {
                let center = 0.5 * theta * ln_n.powi(2);
                (
                    center + x * dev.scale_param * ln_n.powf(4.0 / 3.0),
                    dev.scale_param,
                )
            }
            RateFamily::Polynomial { gamma } => {
                let lambda = dev.scale_param;
                let c = (1.0 + gamma).powi(2);
                (
                    (lambda * ln_n + x * lambda.cbrt() * lambda.cbrt() * ln_n) / c,
                    lambda,
                )
            }
        };
        let hits = raw.iter().filter(|&&v| v >= threshold).count();
        rows.push(vec![
            fmt_f64(x),
            fmt_f64(hits as f64 / mc.samples as f64),
            fmt_f64(dev.probability),
            fmt_f64(scale_param),
        ]);
    }
    let mut meta = Meta::new(Some(&weights.weights));
    meta.push("n", n);
    meta.push("seed", mc.seed);
    write_csv(out, &meta, "x,empirical,predicted,scale_param", &rows)
}

fn cmd_elogo(
    weights: &WeightArg,
    n_grid: &[usize],
    which: &str,
    zeros_path: Option<&Path>,
    out: &str,
) -> Result<()> {
    ascending(n_grid)?;
    let model = weights.model()?;
    let (_, theta, _) = model.singularity_params()?;
    let zeros = load_zeros(zeros_path)?;
    let n_max = *n_grid.last().unwrap();
    let mang = mangoldt_for(n_max)?;
    let mut rows = Vec::new();
    match which {
        "trunc" => {
            for &n in n_grid {
                let table = build_table(&model, n)?;
                let exact = series::expect_log_o(&table, &mang, n, Truncation::Bn)?;
                let expansion = asymptotics::expect_logo_trunc_expansion(&model, n, &mang)?;
                let zx = asymptotics::expect_logo_zeros(
                    ZeroExpansionKind::Truncated,
                    n,
                    theta,
                    &zeros,
                    None,
                )?;
                rows.push(vec![
                    n.to_string(),
                    fmt_f64(exact),
                    fmt_f64(expansion),
                    fmt_f64(zx.value),
                    fmt_f64(exact - expansion),
                    fmt_f64(exact - zx.value),
                    fmt_f64(zx.imag_residue),
                ]);
            }
            let mut meta = Meta::new(Some(&weights.weights));
            meta.push("which", "trunc");
            meta.push("zeros", zeros.count());
            write_csv(
                out,
                &meta,
                "n,exact,expansion,zeros_expansion,diff_expansion,diff_zeros,imag_residue",
                &rows,
            )
        }
        "full" => {
            for &n in n_grid {
                let table = build_table(&model, n)?;
                let exact = series::expect_log_o(&table, &mang, n, Truncation::Full)?;
                let e_log_y = series::expect_log_y(&table, n, Truncation::Full)?;
                let zx = asymptotics::expect_logo_zeros(
                    ZeroExpansionKind::Full,
                    n,
                    theta,
                    &zeros,
                    Some(e_log_y),
                )?;
                rows.push(vec![
                    n.to_string(),
                    fmt_f64(exact),
                    fmt_f64(zx.value),
                    fmt_f64(exact - zx.value),
                    fmt_f64(zx.imag_residue),
                ]);
            }
            let mut meta = Meta::new(Some(&weights.weights));
            meta.push("which", "full");
            meta.push("zeros", zeros.count());
            write_csv(
                out,
                &meta,
                "n,exact,zeros_expansion,diff,imag_residue",
                &rows,
            )
        }
        other => Err(Error::Parse(format!(
            "--which must be trunc|full, got `{other}`"
        ))),
    }
}

fn cmd_psi(xs: &[u64], zeros_path: Option<&Path>, out: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Parse("psi needs at least one x".into()));
    }
    let zeros = load_zeros(zeros_path)?;
    let max = *xs.iter().max().unwrap() as usize;
    let mang = MangoldtTable::build(max)?;
    let mut rows = Vec::new();
    for &x in xs {
        let sieve = mang.psi(x as usize)?;
        let ex = psi_explicit(x as f64, &zeros)?;
        rows.push(vec![
            x.to_string(),
            fmt_f64(sieve),
            fmt_f64(ex.value),
            fmt_f64(ex.value - sieve),
            fmt_f64(ex.imag_residue),
        ]);
    }
    let mut meta = Meta::new(None);
    meta.push("zeros", zeros.count());
    write_csv(out, &meta, "x,sieve,explicit,diff,imag_residue", &rows)
}

fn cmd_compare(
    weights: &WeightArg,
    pair: ComparePair,
    n_grid: &[usize],
    k: usize,
    s: f64,
    scaling: ThetaScaling,
    out: &str,
) -> Result<()> {
    ascending(n_grid)?;
    let model = weights.model()?;
    let mut rows = Vec::new();
    let quantity: &str;
    match pair {
        ComparePair::HGe => {
            quantity = "log_h";
            let (r, theta, kc) = model.singularity_params()?;
            for &n in n_grid {
                let table = build_table(&model, n)?;
                let exact = table.log_h(n);
                let asym = h_asym_ge(r, theta, kc, n)?;
                rows.push(compare_row(n, quantity, exact, asym));
            }
        }
        ComparePair::HPoly => {
            quantity = "log_h";
            let gamma = match &model {
                WeightModel::Polynomial { gamma } => *gamma,
                _ => {
                    return Err(Error::Classification(
                        "h-poly comparison needs polynomial weights".into(),
                    ))
                }
            };
            for &n in n_grid {
                let table = build_table(&model, n)?;
                rows.push(compare_row(
                    n,
                    quantity,
                    table.log_h(n),
                    h_asym_poly(gamma, n)?,
                ));
            }
        }
        ComparePair::DnkE | ComparePair::DnkP0 => {
            let (_, theta, _) = model.singularity_params()?;
            quantity = if pair == ComparePair::DnkE {
                "e_dnk"
            } else {
                "p_dnk_zero"
            };
            for &n in n_grid {
                let table = build_table(&model, n)?;
                let asym = dnk_asym(n, k, theta)?;
                let (exact, a) = if pair == ComparePair::DnkE {
                    (
                        series::expect_dnk(&table, n, k, Truncation::Full)?,
                        asym.expectation,
                    )
                } else {
                    (
                        series::p_dnk_zero(&table, n, k, Truncation::Full)?,
                        asym.p_zero,
                    )
                };
                rows.push(compare_row(n, quantity, exact, a));
            }
        }
        ComparePair::MgfGe => {
            quantity = "mgf_trunc";
            let (_, theta, _) = model.singularity_params()?;
            for &n in n_grid {
                let table = build_table(&model, n)?;
                let ln_n = (n as f64).ln();
                let exact = series::mgf_log_y_real(&table, n, s / ln_n, Truncation::Bn)?;
                let asym = mgf_trunc_asym(Complex64::new(s, 0.0), n, theta, scaling)?.re;
                rows.push(compare_row(n, quantity, exact, asym));
            }
        }
        ComparePair::MgfPoly => {
            quantity = "log_mgf";
            let gamma = match &model {
                WeightModel::Polynomial { gamma } => *gamma,
                _ => {
                    return Err(Error::Classification(
                        "mgf-poly comparison needs polynomial weights".into(),
                    ))
                }
            };
            for &n in n_grid {
                let table = build_table(&model, n)?;
                let exact = series::mgf_log_y_real(&table, n, s, Truncation::Full)?.ln();
                rows.push(compare_row(n, quantity, exact, mgf_asym_poly(s, n, gamma)?));
            }
        }
        ComparePair::ElogoTrunc => {
            quantity = "e_log_o_trunc";
            let n_max = *n_grid.last().unwrap();
            let mang = mangoldt_for(n_max)?;
            for &n in n_grid {
                let table = build_table(&model, n)?;
                let exact = series::expect_log_o(&table, &mang, n, Truncation::Bn)?;
                let asym = asymptotics::expect_logo_trunc_expansion(&model, n, &mang)?;
                rows.push(compare_row(n, quantity, exact, asym));
            }
        }
    }
    let mut meta = Meta::new(Some(&weights.weights));
    meta.push("pair", format!("{pair:?}"));
    meta.push("scaling", scaling);
    write_csv(out, &meta, "n,quantity,exact,asymptotic,diff", &rows)
}

fn compare_row(n: usize, quantity: &str, exact: f64, asym: f64) -> Vec<String> {
    vec![
        n.to_string(),
        quantity.to_string(),
        fmt_f64(exact),
        fmt_f64(asym),
        fmt_f64(exact - asym),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [
            0.0,
            1.5,
            -2.75,
            0.7127776865034344,
            1e-300,
            1e300,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut meta = Meta::new(Some("ewens:2"));
        meta.push("n", 3);
        let mut s = meta.csv_block();
        s.push_str("n,log_h\n");
        s.push_str(&format!("0,{}\n1,{}\n", fmt_f64(0.0), fmt_f64(2f64.ln())));
        let table = parse_csv_table(&s).unwrap();
        assert_eq!(table.header, vec!["n", "log_h"]);
        assert_eq!(
            table.meta[1],
            ("weights".to_string(), "ewens:2".to_string())
        );
        let col = table.column("log_h").unwrap();
        assert_eq!(col[1], 2f64.ln());
    }

    #[test]
    fn trunc_parsing() {
        assert_eq!(parse_trunc("full").unwrap(), Truncation::Full);
        assert_eq!(parse_trunc("bn").unwrap(), Truncation::Bn);
        assert_eq!(parse_trunc("17").unwrap(), Truncation::At(17));
        assert!(parse_trunc("x").is_err());
    }

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::Definition("x".into())), 2);
        assert_eq!(exit_code(&Error::Capacity("x".into())), 3);
        assert_eq!(exit_code(&Error::NumericRange("x".into())), 4);
        assert_eq!(exit_code(&Error::Overflow("x".into())), 4);
        assert_eq!(exit_code(&Error::Domain("x".into())), 1);
    }

    #[test]
    fn ascending_grid_validation() {
        assert!(ascending(&[1, 2, 3]).is_ok());
        assert!(ascending(&[]).is_err());
        assert!(ascending(&[2, 2]).is_err());
        assert!(ascending(&[3, 1]).is_err());
    }
}
