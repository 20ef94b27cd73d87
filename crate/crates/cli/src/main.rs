//! `kpz` — command-line front end for the KPZ crossover-distribution library:
//! CDF tables, WASEP Monte Carlo, exact-vs-MC comparisons, the
//! identity/invariant validation suite, and tail-bound tables.
//!
//! Exit codes: 0 success, 1 numeric failure or failed assertion (diagnostic
//! JSON on stderr, reports still written), 2 usage error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kpz_core::distributions::{
    eq_sandwich, f_edge, f_edge_ktilde, f_edge_via_gamma, finite_eps_cdf, fit_tail_c1,
    sandwich_args, tail_bound_edge, DistKind, DistParams, DistTable, NumericConfig,
};
use kpz_core::kernels::{
    airy_laplace_tail, csc_closed_form, csc_integral_quadrature, cubic_pole_integral,
    prefactor_product,
};
use kpz_core::specialfn::{airy_ai, airy_ai_contour, decay_bound_rows, gamma_complex, q_gamma};
use kpz_core::{asep, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const CBRT2: f64 = kpz_core::kernels::CBRT2;

#[derive(Parser)]
#[command(
    name = "kpz",
    version,
    about = "KPZ crossover distributions: CDF tables, WASEP simulation, validation"
)]
struct Cli {
    /// Worker threads (default: KPZ_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// RNG seed (default: KPZ_SEED, else 1).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Numeric resolution preset.
    #[arg(long, global = true, value_enum, default_value_t = Preset::Default)]
    preset: Preset,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Preset {
    /// Full resolution (slowest; CDF values good to ~1e-6).
    Default,
    /// Intermediate resolution (~3x faster than default at ~1e-5).
    Mid,
    /// Smoke-test resolution; trustworthy for T up to ~4.
    Coarse,
}

impl Preset {
    fn config(self) -> NumericConfig {
        match self {
            Preset::Default => NumericConfig::default(),
            Preset::Coarse => NumericConfig::coarse(),
            Preset::Mid => NumericConfig {
                nodes_per_segment: 64,
                mu_nodes: 48,
                mu_x_max: 30.0,
                tail_height: 8.0,
                ..NumericConfig::coarse()
            },
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a distribution table and write it as CSV.
    Dist(DistArgs),
    /// Draw WASEP Monte Carlo samples and write them as CSV.
    Simulate(SimArgs),
    /// Compare WASEP Monte Carlo against the exact laws (JSON report).
    Compare(CompareArgs),
    /// Run the identity/invariant validation suite (JSON report).
    Validate(ValidateArgs),
    /// Tail-bound and equilibrium-sandwich tables (CSV).
    Tails(TailsArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum KindArg {
    Edge,
    Fan,
    A2bm,
    Gue,
    FiniteEps,
}

impl KindArg {
    fn kind(self) -> DistKind {
        match self {
            KindArg::Edge => DistKind::Edge,
            KindArg::Fan => DistKind::Fan,
            KindArg::A2bm => DistKind::A2bm,
            KindArg::Gue => DistKind::Gue,
            KindArg::FiniteEps => DistKind::FiniteEps,
        }
    }
}

/// Evaluation grid given as `min:max:n` (n = 1 collapses to the single
/// point `min`).
#[derive(Clone, Debug, Serialize)]
struct Grid {
    min: f64,
    max: f64,
    n: usize,
}

impl Grid {
    fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.min + h * i as f64).collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected min:max:n, got `{s}`"));
    }
    let min: f64 = parts[0].parse().map_err(|e| format!("bad min: {e}"))?;
    let max: f64 = parts[1].parse().map_err(|e| format!("bad max: {e}"))?;
    let n: usize = parts[2].parse().map_err(|e| format!("bad n: {e}"))?;
    if n == 0 {
        return Err("grid needs at least one point".into());
    }
    if n > 1 && max <= min {
        return Err(format!("empty grid: max {max} <= min {min} with n > 1"));
    }
    if !min.is_finite() || !max.is_finite() {
        return Err("grid endpoints must be finite".into());
    }
    Ok(Grid { min, max, n })
}

#[derive(Args)]
struct DistArgs {
    /// Which law to tabulate.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// KPZ time T (edge, fan).
    #[arg(long = "T")]
    big_t: Option<f64>,
    /// Scaled position X (edge, a2bm).
    #[arg(long = "X")]
    big_x: Option<f64>,
    /// CDF argument grid min:max:n (lattice sites for finite-eps).
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    s: Grid,
    /// WASEP asymmetry parameter ε (finite-eps).
    #[arg(long)]
    eps: Option<f64>,
    /// Bernoulli density right of the origin (finite-eps).
    #[arg(long)]
    rho_plus: Option<f64>,
    /// Transform time t; the particle system runs to t/ε^{1/2} (finite-eps).
    #[arg(long)]
    t: Option<f64>,
    /// Particle label m, leftmost = 1 (finite-eps).
    #[arg(long)]
    m: Option<u32>,
}

#[derive(Args)]
struct SimArgs {
    /// WASEP asymmetry parameter ε.
    #[arg(long)]
    eps: f64,
    /// Number of independent trials.
    #[arg(long)]
    trials: u64,
    /// KPZ time T (height-fluctuation mode).
    #[arg(long = "T")]
    big_t: Option<f64>,
    /// Scaled position X (height-fluctuation mode).
    #[arg(long = "X", default_value_t = 0.0)]
    big_x: f64,
    /// Bernoulli density left of the origin.
    #[arg(long, default_value_t = 0.0)]
    rho_minus: f64,
    /// Bernoulli density right of the origin.
    #[arg(long, default_value_t = 0.5)]
    rho_plus: f64,
    /// Particle label m: sample the m-th particle position instead of the
    /// height fluctuation (requires --t).
    #[arg(long)]
    m: Option<u32>,
    /// Transform time t for particle-position mode.
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    /// ε values for the KS comparison (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    /// KPZ time T.
    #[arg(long = "T", default_value_t = 1.0)]
    big_t: f64,
    /// Scaled position X.
    #[arg(long = "X", default_value_t = 0.0)]
    big_x: f64,
    /// s-grid for the reference CDF and the grid-KS statistic.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "-3:3:13")]
    s: Grid,
    /// Monte Carlo trials per ε.
    #[arg(long)]
    trials: u64,
    /// Skip the exact-vs-MC particle-position block.
    #[arg(long)]
    no_exact: bool,
    /// Exact block: ε.
    #[arg(long, default_value_t = 0.09)]
    exact_eps: f64,
    /// Exact block: transform time t.
    #[arg(long, default_value_t = 5.0)]
    exact_t: f64,
    /// Exact block: particle label m.
    #[arg(long, default_value_t = 2)]
    exact_m: u32,
    /// Exact block: position x.
    #[arg(long, default_value_t = 1)]
    exact_x: i64,
    /// Exact block: Monte Carlo trials (default: same as --trials).
    #[arg(long)]
    exact_trials: Option<u64>,
    /// Exact block: density right of the origin.
    #[arg(long, default_value_t = 0.5)]
    exact_rho_plus: f64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Skip the slow representation-triangle cross check.
    #[arg(long)]
    quick: bool,
    /// Random (μ̃, z̃) points for the cosecant-identity check.
    #[arg(long, default_value_t = 20)]
    csc_points: usize,
}

#[derive(Args)]
struct TailsArgs {
    /// KPZ time T.
    #[arg(long = "T", default_value_t = 1.0)]
    big_t: f64,
    /// y-grid min:max:n for the bound tables.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "0.5:3:6")]
    y: Grid,
    /// Tail-bound prefactor c₁ (default: fitted as the smallest value
    /// covering the requested grid — the constants are existential, so the
    /// content of the table is the decay shape, not the prefactor).
    #[arg(long)]
    c1: Option<f64>,
    /// Stretched-exponential decay rate c₂.
    #[arg(long, default_value_t = 0.25)]
    c2: f64,
    /// Exponential decay rate c₃.
    #[arg(long, default_value_t = 0.25)]
    c3: f64,
}

/// Failures after argument parsing: `Usage` exits 2, the rest exit 1 after
/// printing a diagnostic JSON object to stderr.
enum CliError {
    Usage(String),
    Numeric(String),
    /// Assertions failed but the report was written; no extra diagnostics.
    Failed(String),
}

type CliResult<T> = Result<T, CliError>;

/// Core errors on malformed parameters are usage errors; everything else is
/// a numeric failure.
fn core_err(e: kpz_core::Error) -> CliError {
    match &e {
        kpz_core::Error::Arg(_) | kpz_core::Error::Domain(_) => CliError::Usage(e.to_string()),
        _ => CliError::Numeric(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or_else(|| asep::seed_from_env(1));
    if let Some(n) = cli.threads.or_else(|| {
        std::env::var("KPZ_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    }) {
        // A second build_global (e.g. under tests) is harmless; ignore it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = cli.preset.config();
    let r = match &cli.cmd {
        Cmd::Dist(a) => cmd_dist(a, &cfg, cli.preset, &cli.out),
        Cmd::Simulate(a) => cmd_simulate(a, seed, &cli.out),
        Cmd::Compare(a) => cmd_compare(a, &cfg, seed, &cli.out),
        Cmd::Validate(a) => cmd_validate(a, &cfg, seed, &cli.out),
        Cmd::Tails(a) => cmd_tails(a, &cfg, &cli.out),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            let diag = serde_json::json!({
                "status": "numeric_failure",
                "error": msg,
                "version": env!("CARGO_PKG_VERSION"),
            });
            eprintln!("{diag}");
            ExitCode::from(1)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn write_output(out: &Option<PathBuf>, body: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Numeric(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Numeric(format!("writing stdout: {e}"))),
    }
}

/// One-line JSON header embedded as a CSV comment so every artifact carries
/// its exact provenance.
fn csv_header<M: Serialize>(command: &str, meta: &M) -> String {
    let mut obj = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let m = serde_json::to_value(meta).expect("meta serializes");
    obj.as_object_mut()
        .unwrap()
        .extend(m.as_object().cloned().unwrap_or_default());
    format!("# {obj}\n")
}

// ---------------------------------------------------------------------------
// dist
// ---------------------------------------------------------------------------

fn cmd_dist(
    a: &DistArgs,
    cfg: &NumericConfig,
    preset: Preset,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    let params = DistParams {
        big_t: a.big_t,
        big_x: a.big_x,
        eps: a.eps,
        rho_plus: a.rho_plus,
        t: a.t,
        m: a.m,
    };
    let table =
        DistTable::compute(a.kind.kind(), params, &a.s.values(), cfg).map_err(core_err)?;
    // Range/monotonicity violations mean the numerics are untrustworthy at
    // this resolution: refuse to emit the table.
    table.validate().map_err(|e| CliError::Numeric(e.to_string()))?;
    #[derive(Serialize)]
    struct Meta<'a> {
        kind: KindArg,
        params: &'a DistParams,
        preset: Preset,
        config: &'a NumericConfig,
        s: &'a Grid,
    }
    let mut body = csv_header(
        "dist",
        &Meta {
            kind: a.kind,
            params: &table.params,
            preset,
            config: cfg,
            s: &a.s,
        },
    );
    let mut csv = Vec::new();
    table
        .write_csv(&mut csv)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    body.push_str(&String::from_utf8(csv).expect("csv is utf-8"));
    write_output(out, &body)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(a: &SimArgs, seed: u64, out: &Option<PathBuf>) -> CliResult<()> {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    #[derive(Serialize)]
    struct Meta<'a> {
        mode: &'a str,
        eps: f64,
        trials: u64,
        seed: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        big_t: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        big_x: Option<f64>,
        rho_minus: f64,
        rho_plus: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        m: Option<u32>,
        #[serde(skip_serializing_if = "Option::is_none")]
        t: Option<f64>,
    }
    let mut body;
    if let Some(m) = a.m {
        let t = a
            .t
            .ok_or_else(|| CliError::Usage("--m requires --t (transform time)".into()))?;
        let samples = asep::particle_position_samples(a.eps, a.rho_plus, t, m, a.trials, seed)
            .map_err(core_err)?;
        body = csv_header(
            "simulate",
            &Meta {
                mode: "particle_position",
                eps: a.eps,
                trials: a.trials,
                seed,
                big_t: None,
                big_x: None,
                rho_minus: 0.0,
                rho_plus: a.rho_plus,
                m: Some(m),
                t: Some(t),
            },
        );
        body.push_str("trial,position\n");
        for (i, x) in samples.iter().enumerate() {
            writeln!(body, "{i},{x}").unwrap();
        }
    } else {
        let big_t = a.big_t.ok_or_else(|| {
            CliError::Usage("height-fluctuation mode requires --T (or pass --m for particle mode)".into())
        })?;
        let samples = asep::fluctuation_samples(
            a.eps, big_t, a.big_x, a.rho_minus, a.rho_plus, a.trials, seed,
        )
        .map_err(core_err)?;
        body = csv_header(
            "simulate",
            &Meta {
                mode: "height_fluctuation",
                eps: a.eps,
                trials: a.trials,
                seed,
                big_t: Some(big_t),
                big_x: Some(a.big_x),
                rho_minus: a.rho_minus,
                rho_plus: a.rho_plus,
                m: None,
                t: None,
            },
        );
        // u = X² − 2^{1/3}·h_fluc: the transform whose limit law is the edge
        // crossover CDF, so histograms of u are directly comparable to
        // `dist --kind edge`.
        body.push_str("trial,h_fluc,u\n");
        for (i, h) in samples.iter().enumerate() {
            writeln!(body, "{i},{h},{}", a.big_x * a.big_x - CBRT2 * h).unwrap();
        }
    }
    write_output(out, &body)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct KsRun {
    eps: f64,
    n_trials: u64,
    ks: f64,
}

#[derive(Serialize)]
struct ExactBlock {
    eps: f64,
    t: f64,
    m: u32,
    x: i64,
    rho_plus: f64,
    n_trials: u64,
    exact_cdf: f64,
    mc_estimate: f64,
    mc_se: f64,
    z_score: f64,
    within_3_sigma: bool,
}

#[derive(Serialize)]
struct CompareReport<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    big_t: f64,
    big_x: f64,
    config: &'a NumericConfig,
    s_grid: Vec<f64>,
    f_edge: Vec<f64>,
    runs: Vec<KsRun>,
    ks_decreasing_in_eps: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactBlock>,
    pass: bool,
}

fn cmd_compare(
    a: &CompareArgs,
    cfg: &NumericConfig,
    seed: u64,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if a.eps.iter().any(|&e| !(0.0 < e && e < 1.0)) {
        return Err(CliError::Usage("every --eps must lie in (0, 1)".into()));
    }
    let s_grid = a.s.values();
    let f_ref: Vec<f64> = s_grid
        .iter()
        .map(|&s| Ok(f_edge(a.big_t, a.big_x, s, cfg).map_err(core_err)?.f))
        .collect::<CliResult<_>>()?;

    // Grid-KS: the reference CDF is only evaluated on the fixed s-grid
    // (a per-jump evaluation would cost one Fredholm determinant per
    // sample), so the statistic is sup over grid points, a lower bound on
    // the true KS distance with the same convergence behavior.
    let mut runs = Vec::new();
    for &eps in &a.eps {
        let h = asep::fluctuation_samples(eps, a.big_t, a.big_x, 0.0, 0.5, a.trials, seed)
            .map_err(core_err)?;
        let u: Vec<f64> = h
            .iter()
            .map(|&h| a.big_x * a.big_x - CBRT2 * h)
            .collect();
        let ecdf = asep::EmpiricalCdf::new(u).map_err(core_err)?;
        let ks = s_grid
            .iter()
            .zip(&f_ref)
            .map(|(&s, &f)| (ecdf.cdf(s) - f).abs())
            .fold(0.0, f64::max);
        runs.push(KsRun {
            eps,
            n_trials: a.trials,
            ks,
        });
    }
    let mut sorted: Vec<&KsRun> = runs.iter().collect();
    sorted.sort_by(|x, y| y.eps.partial_cmp(&x.eps).unwrap());
    let ks_decreasing = sorted.windows(2).all(|w| w[1].ks < w[0].ks);

    let exact = if a.no_exact {
        None
    } else {
        let n = a.exact_trials.unwrap_or(a.trials);
        let exact_cdf = finite_eps_cdf(
            a.exact_eps,
            a.exact_rho_plus,
            a.exact_t,
            a.exact_m,
            a.exact_x,
            cfg,
        )
        .map_err(core_err)?
        .f;
        let positions = asep::particle_position_samples(
            a.exact_eps,
            a.exact_rho_plus,
            a.exact_t,
            a.exact_m,
            n,
            seed,
        )
        .map_err(core_err)?;
        let hits = positions.iter().filter(|&&p| p <= a.exact_x).count() as f64;
        let p_hat = hits / n as f64;
        let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt().max(1e-300);
        let z = (p_hat - exact_cdf) / se;
        Some(ExactBlock {
            eps: a.exact_eps,
            t: a.exact_t,
            m: a.exact_m,
            x: a.exact_x,
            rho_plus: a.exact_rho_plus,
            n_trials: n,
            exact_cdf,
            mc_estimate: p_hat,
            mc_se: se,
            z_score: z,
            within_3_sigma: z.abs() < 3.0,
        })
    };

    let pass = ks_decreasing && exact.as_ref().map_or(true, |e| e.within_3_sigma);
    let report = CompareReport {
        command: "compare",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        big_t: a.big_t,
        big_x: a.big_x,
        config: cfg,
        s_grid,
        f_edge: f_ref,
        runs,
        ks_decreasing_in_eps: ks_decreasing,
        exact,
        pass,
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_output(out, &body)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(
            "comparison assertions failed (report retained)".into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Check {
    name: &'static str,
    metric: f64,
    tol: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

impl Check {
    fn new(name: &'static str, metric: f64, tol: f64) -> Check {
        Check {
            name,
            metric,
            tol,
            pass: metric <= tol,
            detail: None,
        }
    }
    fn with_detail(mut self, d: String) -> Check {
        self.detail = Some(d);
        self
    }
}

fn cmd_validate(
    a: &ValidateArgs,
    cfg: &NumericConfig,
    seed: u64,
    out: &Option<PathBuf>,
) -> CliResult<()> {
    if a.csc_points == 0 {
        return Err(CliError::Usage("--csc-points must be at least 1".into()));
    }
    let mut checks = Vec::new();
    checks.push(check_csc(a.csc_points, seed).map_err(core_err)?);
    checks.push(check_pole_integral().map_err(core_err)?);
    checks.push(check_airy_contour().map_err(core_err)?);
    checks.push(check_gartner());
    checks.push(check_decay_bounds().map_err(core_err)?);
    checks.push(check_q_gamma().map_err(core_err)?);
    checks.push(check_prefactor().map_err(core_err)?);
    if !a.quick {
        checks.push(check_triangle(cfg).map_err(core_err)?);
    }
    for c in &checks {
        eprintln!(
            "{} {} (metric {:.3e}, tol {:.1e})",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.metric,
            c.tol
        );
    }
    let pass = checks.iter().all(|c| c.pass);
    #[derive(Serialize)]
    struct Report<'a> {
        command: &'a str,
        version: &'a str,
        seed: u64,
        quick: bool,
        config: &'a NumericConfig,
        checks: &'a [Check],
        pass: bool,
    }
    let body = serde_json::to_string_pretty(&Report {
        command: "validate",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        quick: a.quick,
        config: cfg,
        checks: &checks,
        pass,
    })
    .expect("report serializes")
        + "\n";
    write_output(out, &body)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(
            "validation checks failed (report retained)".into(),
        ))
    }
}

/// Cosecant integral: direct t-quadrature vs closed form at random
/// admissible points (z̃ inside the convergence strip, μ̃ off [0, ∞)).
fn check_csc(n: usize, seed: u64) -> kpz_core::Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6373_6349); // independent stream
    let mut worst = 0.0f64;
    for _ in 0..n {
        let z = C64::new(rng.gen_range(-1.7..-0.3), rng.gen_range(-2.5..2.5));
        let r = rng.gen_range(0.2..3.0);
        let th = rng.gen_range(0.15..1.85) * std::f64::consts::PI;
        let mu = C64::from_polar(r, th);
        let lhs = csc_integral_quadrature(mu, z)?;
        let rhs = csc_closed_form(mu, z)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(Check::new("cosecant-integral-closed-form", worst, 1e-8))
}

/// Cubic-exponential pole integral vs its Airy Laplace-transform form.
fn check_pole_integral() -> kpz_core::Result<Check> {
    let mut worst = 0.0f64;
    for &(b, c) in &[(0.0, 1.0), (1.0, 0.0), (1.0, -1.0), (2.0, 1.0)] {
        let lhs = cubic_pole_integral(b, c)?;
        let rhs = airy_laplace_tail(b, c)?;
        worst = worst.max((lhs.re - rhs).abs().max(lhs.im.abs()));
    }
    Ok(Check::new("cubic-pole-airy-laplace", worst, 1e-8))
}

/// Airy function: wedge-contour quadrature vs the power series; fixes the
/// implicit 1/(2πi) in every contour weight.
fn check_airy_contour() -> kpz_core::Result<Check> {
    let mut worst = 0.0f64;
    for &r in &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 1.0)] {
        worst = worst.max((airy_ai_contour(r)? - airy_ai(r)).norm());
    }
    Ok(Check::new("airy-contour-vs-series", worst, 1e-8))
}

/// Microscopic Hopf-Cole identity residual (exact; pure arithmetic).
fn check_gartner() -> Check {
    let worst = asep::gartner_identity_check(0.1).max(asep::gartner_identity_check(0.01));
    Check::new("gartner-identity", worst, 1e-12)
}

/// Deformed-Airy decay envelopes with fitted constants.
fn check_decay_bounds() -> kpz_core::Result<Check> {
    let rows = decay_bound_rows(&[0.5, 1.0, 2.0])?;
    let failures = rows.iter().filter(|r| !r.ok).count();
    Ok(
        Check::new("transform-decay-bounds", failures as f64, 0.5).with_detail(format!(
            "{} of {} rows within their fitted envelope",
            rows.len() - failures,
            rows.len()
        )),
    )
}

/// Γ_q → Γ as q ↑ 1, with the error shrinking alongside 1 − q.
fn check_q_gamma() -> kpz_core::Result<Check> {
    let xs = [
        C64::new(0.5, 0.0),
        C64::new(1.5, 0.0),
        C64::new(2.5, 0.5),
    ];
    let err_at = |q: f64| -> kpz_core::Result<f64> {
        let mut worst = 0.0f64;
        for &x in &xs {
            worst = worst.max((q_gamma(x, q)? - gamma_complex(x)?).norm());
        }
        Ok(worst)
    };
    let e_far = err_at(1.0 - 1e-2)?;
    let e_near = err_at(1.0 - 1e-4)?;
    let trend_ok = e_near < e_far;
    let metric = if trend_ok { e_near } else { f64::INFINITY };
    Ok(Check::new("q-gamma-limit", metric, 1e-3)
        .with_detail(format!("err(q=1-1e-2) = {e_far:.3e}, err(q=1-1e-4) = {e_near:.3e}")))
}

/// Finite-ε prefactor p_ε(μ̃) → e^{−μ̃/2} at rate ε^{1/2}: the constant is
/// fitted at ε = 1e-2 and must still dominate at ε = 1e-4.  The measured
/// deviation/√ε ratio still grows ~4% between those ε, so the fit carries
/// 25% headroom toward the asymptotic constant (the constant is
/// existential; the content of the check is the √ε rate).
fn check_prefactor() -> kpz_core::Result<Check> {
    let mut grid = vec![C64::new(0.0, 0.0)];
    for k in 0..12 {
        let th = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
        grid.push(C64::from_polar(2.0, th));
        grid.push(C64::from_polar(1.0, th));
    }
    let max_dev = |eps: f64| -> kpz_core::Result<f64> {
        let mut worst = 0.0f64;
        for &mu in &grid {
            worst = worst.max((prefactor_product(mu, eps)? - (-mu / 2.0).exp()).norm());
        }
        Ok(worst)
    };
    let c = 1.25 * max_dev(1e-2)? / 1e-2f64.sqrt();
    let dev4 = max_dev(1e-4)?;
    Ok(
        Check::new("prefactor-sqrt-eps-rate", dev4 / (c * 1e-4f64.sqrt()), 1.0)
            .with_detail(format!("C = {c:.4} fitted at eps = 1e-2")),
    )
}

/// The three routes to the edge CDF (contour kernel, csc/Γ parameterization,
/// real-line kernel) agree pointwise.
fn check_triangle(cfg: &NumericConfig) -> kpz_core::Result<Check> {
    // The real-line route is resolution-limited separately from the contour
    // routes; coarse settings already give ~1e-5 here for T ≤ 4.
    let coarse = NumericConfig::coarse();
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &t in &[1.0, 4.0] {
        for &s in &[-1.0, 0.0] {
            let e = f_edge(t, 0.0, s, cfg)?.f;
            let g = f_edge_via_gamma(t, 0.0, s, cfg)?.f;
            let k = f_edge_ktilde(t, s, &coarse)?.f;
            let d = (e - g).abs().max((e - k).abs()).max((g - k).abs());
            worst = worst.max(d);
            let _ = write!(detail, "(T={t}, s={s}): {d:.2e}; ");
        }
    }
    Ok(Check::new("edge-representation-triangle", worst, 1e-4).with_detail(detail))
}

// ---------------------------------------------------------------------------
// tails
// ---------------------------------------------------------------------------

fn cmd_tails(a: &TailsArgs, cfg: &NumericConfig, out: &Option<PathBuf>) -> CliResult<()> {
    if !(a.big_t > 0.0) {
        return Err(CliError::Usage("--T must be positive".into()));
    }
    if !(a.c2 > 0.0 && a.c3 > 0.0) {
        return Err(CliError::Usage("--c2 and --c3 must be positive".into()));
    }
    let edge_at = |s: f64| -> CliResult<f64> {
        Ok(f_edge(a.big_t, 0.0, s, cfg).map_err(core_err)?.f)
    };
    let ys = a.y.values();
    let tails: Vec<f64> = ys
        .iter()
        .map(|&y| Ok(1.0 - edge_at(sandwich_args(a.big_t, y).0)?))
        .collect::<CliResult<_>>()?;
    // Fit the prefactor so the bound is tight at the worst grid point,
    // unless the caller pins it.
    let c1 = match a.c1 {
        Some(c1) => c1,
        None => ys
            .iter()
            .zip(&tails)
            .map(|(&y, &t)| fit_tail_c1(a.big_t, y, t, a.c2, a.c3))
            .fold(0.0, f64::max),
    };
    #[derive(Serialize)]
    struct Meta<'a> {
        big_t: f64,
        y: &'a Grid,
        c1: f64,
        c2: f64,
        c3: f64,
        config: &'a NumericConfig,
    }
    let mut body = csv_header(
        "tails",
        &Meta {
            big_t: a.big_t,
            y: &a.y,
            c1,
            c2: a.c2,
            c3: a.c3,
            config: cfg,
        },
    );
    body.push_str(
        "y,s_plus,s_minus,F_plus,F_minus,tail,tail_bound,tail_ok,\
         left_lower,left_upper,right_lower,right_upper\n",
    );
    let mut all_ok = true;
    for (&y, &tail) in ys.iter().zip(&tails) {
        let (s_plus, s_minus) = sandwich_args(a.big_t, y);
        let f_plus = 1.0 - tail;
        let f_minus = edge_at(s_minus)?;
        let bound = tail_bound_edge(a.big_t, y, c1, a.c2, a.c3);
        // Tiny slack: the anchor point itself sits exactly on the bound.
        let ok = tail <= bound * (1.0 + 1e-12) + 1e-12;
        all_ok &= ok;
        let ((ll, lu), (rl, ru)) = eq_sandwich(f_plus, f_minus);
        writeln!(
            body,
            "{y},{s_plus},{s_minus},{f_plus},{f_minus},{tail},{bound},{ok},{ll},{lu},{rl},{ru}"
        )
        .unwrap();
    }
    write_output(out, &body)?;
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Failed(
            "tail bound violated on the requested grid (table retained)".into(),
        ))
    }
}
