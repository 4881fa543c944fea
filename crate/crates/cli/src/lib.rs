//! Command-line front end: configuration, subcommands and CSV output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fou_sldp::energy::{
    classify_branch as energy_branch, rate_energy, saddle_solve, tail_energy, ExpansionScale,
};
use fou_sldp::mle::{classify_branch as mle_branch, rate_mle, tail_mle};
use fou_sldp::sim::{
    FbmOracle, MartingaleSampler, RngSpec, Scheme, SimPath, TerminalStats, TimeGrid,
};
use fou_sldp::special_fn::{r_h_coeffs, r_h_scaled};
use fou_sldp::tail::{TailApprox, TailSide};
use fou_sldp::validate::{
    clt_test_from_samples, gamma_contour_oracle, legendre_oracle, mc_tail_from_samples, KsReport,
    MCReport, OracleReport, Target, MIN_TAIL_REPLICATES,
};
use fou_sldp::{Error, ModelParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Horizon used to classify branches when no `--T` is given.
const RATE_HORIZON: f64 = 1e12;

#[derive(Debug, Parser)]
#[command(
    name = "fou-sldp",
    version,
    about = "Sharp large deviations for the fractional Ornstein-Uhlenbeck process"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with default values for the flags below
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// drift parameter (negative)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Hurst index in (1/2, 1)
    #[arg(long, global = true)]
    pub hurst: Option<f64>,
    /// time horizon
    #[arg(long = "T", global = true, value_name = "T")]
    pub horizon: Option<f64>,
    /// threshold or comma-separated list of thresholds
    #[arg(long, global = true, allow_hyphen_values = true, value_delimiter = ',')]
    pub c: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    pub target: Option<TargetArg>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// include the order-1 correction of the easy energy branch
    #[arg(long, global = true)]
    pub order1: bool,
    /// worker threads for Monte Carlo (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// output file (default: standard output)
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// directory receiving one CSV per simulated path
    #[arg(long = "dump-paths", global = true, value_name = "DIR")]
    pub dump_paths: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetArg {
    Energy,
    Mle,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Energy => Target::Energy,
            TargetArg::Mle => Target::Mle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// exact Gaussian transitions of the martingale representation
    Martingale,
    /// Cholesky fBM and the kernel transforms
    Fbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Exact,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    /// numerical Legendre transform against the closed-form rate
    Legendre,
    /// oscillatory quadrature against the Gamma-density series
    Contour,
    /// Bessel-product form of r_H against its large-argument expansion
    Bessel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// rate function over a c-grid
    Rate,
    /// tail approximations, tagged with their branch
    Tail,
    /// saddle point of the finite-horizon energy cumulant generating function
    Saddle,
    /// simulate paths and terminal statistics
    Simulate {
        #[arg(long, value_enum, default_value = "martingale")]
        route: Route,
        #[arg(long, value_enum, default_value = "exact")]
        scheme: SchemeArg,
    },
    /// Monte Carlo tail probabilities against the approximations
    Mc,
    /// Kolmogorov-Smirnov tests of the central limit theorems
    Clt,
    /// numerical cross-checks of closed forms
    Oracle {
        #[arg(long, value_enum)]
        kind: OracleKind,
        /// Gamma shape of the contour integral
        #[arg(long)]
        a: Option<f64>,
        /// arguments of r_H for the Bessel check
        #[arg(long, value_delimiter = ',')]
        z: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 0)]
        ell: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
    },
}

/// Values read from `--config`. Flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub theta: Option<f64>,
    pub hurst: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub c: Option<Thresholds>,
    pub target: Option<TargetArg>,
    pub replicates: Option<usize>,
    pub grid_n: Option<usize>,
    pub seed: Option<u64>,
    pub order1: Option<bool>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub dump_paths: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Thresholds {
    One(f64),
    Many(Vec<f64>),
}

/// Resolved and validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub horizon: Option<f64>,
    pub c: Vec<f64>,
    pub target: Target,
    pub replicates: usize,
    pub grid_n: usize,
    pub seed: u64,
    pub order1: bool,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub dump_paths: Option<PathBuf>,
}

pub const DEFAULT_REPLICATES: usize = 100_000;
pub const DEFAULT_GRID_N: usize = 2000;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Validation(format!("i/o: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Validation(format!("cannot read {}: {e}", path.display()))
                })?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let theta = args
            .theta
            .or(file.theta)
            .ok_or_else(|| CliError::Validation("--theta is required".into()))?;
        let hurst = args
            .hurst
            .or(file.hurst)
            .ok_or_else(|| CliError::Validation("--hurst is required".into()))?;
        let params = ModelParams::new(theta, hurst)?;
        let horizon = args.horizon.or(file.horizon);
        if let Some(t) = horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Validation(format!(
                    "--T must be positive, got {t}"
                )));
            }
        }
        let c = match (&args.c, file.c) {
            (Some(v), _) => v.clone(),
            (None, Some(Thresholds::One(x))) => vec![x],
            (None, Some(Thresholds::Many(v))) => v,
            (None, None) => Vec::new(),
        };
        if let Some(x) = c.iter().find(|x| !x.is_finite()) {
            return Err(CliError::Validation(format!(
                "threshold must be finite, got {x}"
            )));
        }
        let threads = args.threads.or(file.threads);
        if threads == Some(0) {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        Ok(Self {
            params,
            horizon,
            c,
            target: args
                .target
                .or(file.target)
                .unwrap_or(TargetArg::Energy)
                .into(),
            replicates: args
                .replicates
                .or(file.replicates)
                .unwrap_or(DEFAULT_REPLICATES),
            grid_n: args.grid_n.or(file.grid_n).unwrap_or(DEFAULT_GRID_N),
            seed: args.seed.or(file.seed).unwrap_or(0),
            order1: args.order1 || file.order1.unwrap_or(false),
            threads,
            out: args.out.clone().or(file.out),
            dump_paths: args.dump_paths.clone().or(file.dump_paths),
        })
    }

    fn horizon(&self) -> CliResult<f64> {
        self.horizon
            .ok_or_else(|| CliError::Validation("--T is required for this subcommand".into()))
    }

    fn thresholds(&self) -> CliResult<&[f64]> {
        if self.c.is_empty() {
            Err(CliError::Validation(
                "--c is required for this subcommand".into(),
            ))
        } else {
            Ok(&self.c)
        }
    }
}

/// Full-precision, locale-independent number formatting.
fn num(x: f64) -> String {
    format!("{x:.17e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV table accumulated in memory and written at the end.
struct Table {
    text: String,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }
}

fn side_name(side: TailSide) -> &'static str {
    match side {
        TailSide::Upper => "upper",
        TailSide::Lower => "lower",
    }
}

fn tail_fields<B>(t: &TailApprox<B>, branch: &str) -> Vec<String> {
    vec![
        branch.to_string(),
        side_name(t.side).to_string(),
        num(t.rate),
        num(t.log_prefactor),
        num(t.t_power),
        opt(t.order1),
        num(t.leading()),
        num(t.value()),
    ]
}

fn cmd_rate(cfg: &RunConfig) -> CliResult<Table> {
    let horizon = cfg.horizon.unwrap_or(RATE_HORIZON);
    let mut table = Table::new(&["target", "theta", "hurst", "c", "rate", "branch"]);
    for &c in cfg.thresholds()? {
        let (rate, branch) = match cfg.target {
            Target::Energy => (
                rate_energy(&cfg.params, c),
                energy_branch(&cfg.params, c, horizon)?.name(),
            ),
            Target::Mle => (
                rate_mle(&cfg.params, c),
                mle_branch(&cfg.params, c, horizon)?.name(),
            ),
        };
        table.row(&[
            cfg.target.to_string(),
            num(cfg.params.theta()),
            num(cfg.params.hurst()),
            num(c),
            num(rate),
            branch.to_string(),
        ]);
    }
    Ok(table)
}

fn cmd_tail(cfg: &RunConfig) -> CliResult<Table> {
    let horizon = cfg.horizon()?;
    let mut table = Table::new(&[
        "target",
        "theta",
        "hurst",
        "T",
        "c",
        "branch",
        "side",
        "rate",
        "log_prefactor",
        "t_power",
        "order1",
        "leading",
        "value",
    ]);
    for &c in cfg.thresholds()? {
        let fields = match cfg.target {
            Target::Energy => {
                let t = tail_energy(&cfg.params, c, horizon, cfg.order1)?;
                tail_fields(&t, t.branch.name())
            }
            Target::Mle => {
                let t = tail_mle(&cfg.params, c, horizon)?;
                tail_fields(&t, t.branch.name())
            }
        };
        let mut row = vec![
            cfg.target.to_string(),
            num(cfg.params.theta()),
            num(cfg.params.hurst()),
            num(horizon),
            num(c),
        ];
        row.extend(fields);
        table.row(&row);
    }
    Ok(table)
}

fn cmd_saddle(cfg: &RunConfig) -> CliResult<Table> {
    if cfg.target != Target::Energy {
        return Err(CliError::Validation(
            "saddle is defined for the energy target only".into(),
        ));
    }
    let horizon = cfg.horizon()?;
    let mut table = Table::new(&[
        "theta",
        "hurst",
        "T",
        "c",
        "a_T",
        "phi_T",
        "residual",
        "iterations",
        "scale",
        "a0",
        "a1",
        "a2",
        "phi0",
        "phi1",
        "phi2",
        "a_expansion",
        "phi_expansion",
    ]);
    for &c in cfg.thresholds()? {
        let s = saddle_solve(&cfg.params, c, horizon)?;
        let scale = match s.scale {
            ExpansionScale::InverseT => "inverse_t",
            ExpansionScale::InverseSqrtT => "inverse_sqrt_t",
        };
        table.row(&[
            num(cfg.params.theta()),
            num(cfg.params.hurst()),
            num(horizon),
            num(c),
            num(s.a_t),
            num(s.phi_t),
            num(s.residual),
            s.iterations.to_string(),
            scale.to_string(),
            num(s.a_coeffs[0]),
            num(s.a_coeffs[1]),
            num(s.a_coeffs[2]),
            num(s.phi_coeffs[0]),
            num(s.phi_coeffs[1]),
            num(s.phi_coeffs[2]),
            num(s.a_truncated(2)),
            num(s.phi_truncated(2)),
        ]);
    }
    Ok(table)
}

fn write_path(dir: &Path, index: usize, path: &SimPath) -> CliResult<()> {
    let file = fs::File::create(dir.join(format!("path_{index:06}.csv")))?;
    path.write_csv(io::BufWriter::new(file))?;
    Ok(())
}

fn simulate(cfg: &RunConfig, route: Route, scheme: Scheme) -> CliResult<Vec<TerminalStats>> {
    let horizon = cfg.horizon()?;
    let grid = TimeGrid::standard(horizon, cfg.grid_n)?;
    let n = cfg.replicates;
    if let Some(dir) = &cfg.dump_paths {
        fs::create_dir_all(dir)?;
    }
    match route {
        Route::Martingale => {
            let sampler = MartingaleSampler::new(&cfg.params, &grid, scheme)?;
            if let Some(dir) = &cfg.dump_paths {
                let mut stats = Vec::with_capacity(n);
                for i in 0..n {
                    let path = sampler.path(RngSpec::new(cfg.seed, i as u64));
                    write_path(dir, i, &path)?;
                    stats.push(path.terminal);
                }
                Ok(stats)
            } else {
                Ok(sampler.batch(cfg.seed, n))
            }
        }
        Route::Fbm => {
            if scheme != Scheme::Exact {
                return Err(CliError::Validation(
                    "the fBM route has no scheme choice".into(),
                ));
            }
            let oracle = FbmOracle::new(&cfg.params, &grid)?;
            if let Some(dir) = &cfg.dump_paths {
                let mut stats = Vec::with_capacity(n);
                for i in 0..n {
                    let path = oracle.path(RngSpec::new(cfg.seed, i as u64));
                    write_path(dir, i, &path)?;
                    stats.push(path.terminal);
                }
                Ok(stats)
            } else {
                Ok(oracle.batch(cfg.seed, n))
            }
        }
    }
}

fn cmd_simulate(cfg: &RunConfig, route: Route, scheme: SchemeArg) -> CliResult<Table> {
    let scheme = match scheme {
        SchemeArg::Exact => Scheme::Exact,
        SchemeArg::Euler => Scheme::Euler,
    };
    let stats = simulate(cfg, route, scheme)?;
    let mut table = Table::new(&["replicate", "seed", "S_T", "score", "theta_hat", "M_T"]);
    for (i, s) in stats.iter().enumerate() {
        table.row(&[
            i.to_string(),
            cfg.seed.to_string(),
            num(s.energy),
            num(s.score),
            num(s.theta_hat),
            num(s.m_t),
        ]);
    }
    Ok(table)
}

fn mc_row(table: &mut Table, cfg: &RunConfig, horizon: f64, c: f64, r: &MCReport) {
    table.row(&[
        cfg.target.to_string(),
        num(cfg.params.theta()),
        num(cfg.params.hurst()),
        num(horizon),
        num(c),
        r.label.clone(),
        r.replicates.to_string(),
        r.successes.to_string(),
        num(r.estimate),
        num(r.std_error),
        num(r.closed_form),
        opt(r.z_score),
        r.underpowered.to_string(),
        opt(r.upper_bound),
        r.invalid_approximation.to_string(),
        r.seed.seed.to_string(),
    ]);
}

fn cmd_mc(cfg: &RunConfig) -> CliResult<Table> {
    let horizon = cfg.horizon()?;
    let cs = cfg.thresholds()?;
    if cfg.replicates < MIN_TAIL_REPLICATES {
        return Err(CliError::Validation(format!(
            "mc needs at least {MIN_TAIL_REPLICATES} replicates, got {}",
            cfg.replicates
        )));
    }
    let stats = simulate(cfg, Route::Martingale, Scheme::Exact)?;
    let mut table = Table::new(&[
        "target",
        "theta",
        "hurst",
        "T",
        "c",
        "label",
        "replicates",
        "successes",
        "estimate",
        "std_error",
        "closed_form",
        "z_score",
        "underpowered",
        "upper_bound",
        "invalid_approximation",
        "seed",
    ]);
    for &c in cs {
        let r = mc_tail_from_samples(
            &cfg.params,
            cfg.target,
            c,
            horizon,
            &stats,
            RngSpec::new(cfg.seed, 0),
            cfg.order1,
        )?;
        mc_row(&mut table, cfg, horizon, c, &r);
    }
    Ok(table)
}

fn ks_row(table: &mut Table, r: &KsReport) {
    table.row(&[
        r.label.clone(),
        num(r.n_eff),
        num(r.statistic),
        num(r.critical_01),
        num(r.critical_05),
        num(r.p_value),
        num(r.sample_mean),
        num(r.sample_sd),
        r.passes_01().to_string(),
        r.pre_asymptotic.to_string(),
    ]);
}

fn cmd_clt(cfg: &RunConfig) -> CliResult<Table> {
    let horizon = cfg.horizon()?;
    let stats = simulate(cfg, Route::Martingale, Scheme::Exact)?;
    let (e, m) = clt_test_from_samples(&cfg.params, horizon, &stats)?;
    let mut table = Table::new(&[
        "statistic",
        "n",
        "ks",
        "critical_01",
        "critical_05",
        "p_value",
        "mean",
        "sd",
        "pass_01",
        "pre_asymptotic",
    ]);
    ks_row(&mut table, &e);
    ks_row(&mut table, &m);
    Ok(table)
}

const ORACLE_HEADER: [&str; 11] = [
    "kind",
    "target",
    "theta",
    "hurst",
    "point",
    "lhs",
    "rhs",
    "abs_err",
    "rel_err",
    "argmax",
    "at_boundary",
];

fn oracle_row(
    table: &mut Table,
    kind: &str,
    target: &str,
    cfg: &RunConfig,
    point: String,
    r: &OracleReport,
) {
    table.row(&[
        kind.to_string(),
        target.to_string(),
        num(cfg.params.theta()),
        num(cfg.params.hurst()),
        point,
        num(r.lhs),
        num(r.rhs),
        num(r.abs_err),
        opt(r.rel_err),
        opt(r.argmax),
        r.at_boundary.to_string(),
    ]);
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    cfg: &RunConfig,
    kind: OracleKind,
    a: Option<f64>,
    z: Option<Vec<f64>>,
    nu: f64,
    gamma: f64,
    sigma2: f64,
    ell: usize,
    p: usize,
) -> CliResult<Table> {
    match kind {
        OracleKind::Legendre => {
            let mut table = Table::new(&ORACLE_HEADER);
            for &c in cfg.thresholds()? {
                let r = legendre_oracle(&cfg.params, cfg.target, c)?;
                oracle_row(
                    &mut table,
                    "legendre",
                    &cfg.target.to_string(),
                    cfg,
                    format!("c={c}"),
                    &r,
                );
            }
            Ok(table)
        }
        OracleKind::Contour => {
            let shape =
                a.ok_or_else(|| CliError::Validation("--a (Gamma shape) is required".into()))?;
            let horizon = cfg.horizon()?;
            let r = gamma_contour_oracle(shape, nu, gamma, sigma2, horizon, ell, p)?;
            let mut table = Table::new(&[
                "kind",
                "a",
                "nu",
                "gamma",
                "sigma2",
                "T",
                "ell",
                "p",
                "lhs",
                "rhs",
                "abs_err",
                "rel_err",
                "symmetry_residual",
            ]);
            table.row(&[
                "contour".into(),
                num(shape),
                num(nu),
                num(gamma),
                num(sigma2),
                num(horizon),
                ell.to_string(),
                p.to_string(),
                num(r.lhs),
                num(r.rhs),
                num(r.abs_err),
                opt(r.rel_err),
                opt(r.symmetry_residual),
            ]);
            Ok(table)
        }
        OracleKind::Bessel => {
            let zs = z.ok_or_else(|| CliError::Validation("--z is required".into()))?;
            let h = cfg.params.hurst();
            let expansion = r_h_coeffs(h, 2)?;
            let s = cfg.params.sin_pi_h();
            let mut table = Table::new(&[
                "kind",
                "hurst",
                "z",
                "r_H_scaled",
                "expansion",
                "abs_err",
                "rel_err",
            ]);
            for z in zs {
                let lhs = r_h_scaled(h, z)?;
                let rhs = expansion.bracket(z) / s;
                let abs = (lhs - rhs).abs();
                table.row(&[
                    "bessel".into(),
                    num(h),
                    num(z),
                    num(lhs),
                    num(rhs),
                    num(abs),
                    num(abs / rhs.abs()),
                ]);
            }
            Ok(table)
        }
    }
}

fn execute(cli: &Cli) -> CliResult<String> {
    let cfg = RunConfig::resolve(&cli.common)?;
    let body = || -> CliResult<Table> {
        match &cli.command {
            Command::Rate => cmd_rate(&cfg),
            Command::Tail => cmd_tail(&cfg),
            Command::Saddle => cmd_saddle(&cfg),
            Command::Simulate { route, scheme } => cmd_simulate(&cfg, *route, *scheme),
            Command::Mc => cmd_mc(&cfg),
            Command::Clt => cmd_clt(&cfg),
            Command::Oracle {
                kind,
                a,
                z,
                nu,
                gamma,
                sigma2,
                ell,
                p,
            } => cmd_oracle(&cfg, *kind, *a, z.clone(), *nu, *gamma, *sigma2, *ell, *p),
        }
    };
    let table = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?
            .install(body)?,
        None => body()?,
    };
    match &cfg.out {
        Some(path) => {
            fs::write(path, &table.text)?;
            Ok(String::new())
        }
        None => Ok(table.text),
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
/// CSV goes to `stdout` unless `--out` is given; diagnostics go to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => match stdout.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "validation error: i/o: {e}");
                EXIT_VALIDATION
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
