//! Command-line front end.
//!
//! Every subcommand builds the full output in memory before anything is
//! written, so a failing run never leaves a partial file behind.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::chain::{build_tables, ChainTables, ZetaMode};
use crate::error::{Error, Result};
use crate::error_analysis::{backward_error_factors, forward_error_factors, mixed_error_factors};
use crate::metrics::{bias, input_error, metrics_report, truncated_metric_errors};
use crate::model::ModelConfig;
use crate::numeric::fmt_num;
use crate::passage::{boundary_functionals, PassageTables};
use crate::poisson::{
    crossover_m, default_frontier, default_report_max, solve_backward, solve_exact, solve_forward, solve_mixed, PoissonSolution, Scheme,
};
use crate::structure::{structure_report, structure_rows, DEFAULT_SLACK};

/// Exit status for bad arguments or configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERIC: i32 = 3;

/// Rows reported when `--nmax` is absent, fewer when the frontier cannot serve them.
pub const DEFAULT_NMAX: usize = 29;

const EXAMPLE_MODEL: &str = "mm1m(0.9,1,0.5)";

#[derive(Parser, Debug)]
#[command(name = "bdpoisson", version, about = "Poisson's equation for birth-death chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state tables.
    Steady(Common),
    /// First-passage times and costs.
    Passage(Common),
    /// Solve for the marginal relative cost and the bias.
    Solve(Common),
    /// Error amplification factors of a scheme.
    Errors(Common),
    /// Bias, asymptotic variance and their predicted errors.
    Metrics(Common),
    /// Rate/cost conditions, convexity and lemma diagnostics.
    Structure(StructureArgs),
    /// Regenerate the reference tables of the M/M/1+M example.
    Repro(ReproArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Config file or inline preset such as `mm1m(0.9,1,0.5)`; repeat for a sweep.
    #[arg(long, required = true)]
    model: Vec<String>,
    /// Last reported state.
    #[arg(long)]
    nmax: Option<usize>,
    /// Backward frontier.
    #[arg(long = "N")]
    frontier: Option<usize>,
    /// Backward seed, a number or `zero`.
    #[arg(long, default_value = "zero", value_parser = parse_seed)]
    phi_seed: f64,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// `analytic`, `summed` or `perturbed:±k`.
    #[arg(long, value_parser = parse_zeta_mode)]
    zeta_mode: Option<ZetaMode>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    b0: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Clone)]
struct StructureArgs {
    #[command(flatten)]
    common: Common,
    /// Emit the per-state table instead of the verdicts.
    #[arg(long)]
    table: bool,
    /// States inspected by the rate/cost checks.
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
}

#[derive(Args, Debug, Clone)]
struct ReproArgs {
    #[arg(value_enum)]
    target: ReproTarget,
    #[arg(long, default_value = EXAMPLE_MODEL)]
    model: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for multi-model sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Tsv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReproTarget {
    Table1,
    Table2,
    ExampleMetrics,
}

fn parse_seed(s: &str) -> std::result::Result<f64, String> {
    if s == "zero" {
        return Ok(0.0);
    }
    s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_zeta_mode(s: &str) -> std::result::Result<ZetaMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A header plus rows of already formatted fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn kv(&mut self, key: &str, value: String) {
        self.rows.push(vec![key.to_string(), value]);
    }
}

fn num(x: f64) -> String {
    fmt_num(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_CONFIG
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (table, output) = match cli.command {
        Command::Steady(c) => (sweep(&c, steady)?, c.output),
        Command::Passage(c) => (sweep(&c, passage)?, c.output),
        Command::Solve(c) => (sweep(&c, solve)?, c.output),
        Command::Errors(c) => (sweep(&c, errors)?, c.output),
        Command::Metrics(c) => (sweep(&c, metrics)?, c.output),
        Command::Structure(s) => {
            let t = sweep(&s.common, |c, ctx| structure(c, ctx, s.table, s.horizon))?;
            (t, s.common.output)
        }
        Command::Repro(r) => {
            let ctx = Context::load(&r.model)?;
            let t = match r.target {
                ReproTarget::Table1 => repro_table1(&ctx)?,
                ReproTarget::Table2 => repro_table2(&ctx)?,
                ReproTarget::ExampleMetrics => repro_metrics(&ctx)?,
            };
            (t, r.output)
        }
    };
    emit(&table, &output)
}

/// One loaded model with its tables.
struct Context {
    tables: ChainTables,
    passage: PassageTables,
}

impl Context {
    fn load(spec: &str) -> Result<Self> {
        let config = ModelConfig::load(spec)?;
        let tables = build_tables(&config.model, &config.truncation)?;
        let passage = PassageTables::new(&tables);
        Ok(Context { tables, passage })
    }

    fn zeta_input(&self, mode: Option<ZetaMode>) -> Result<f64> {
        let mode = mode.unwrap_or(if self.tables.model().analytic_zeta().is_some() {
            ZetaMode::Analytic
        } else {
            ZetaMode::Summed
        });
        self.tables.mean_cost(mode)
    }

    fn nmax(&self, c: &Common) -> Result<usize> {
        let n = match c.nmax {
            Some(n) => n,
            None => default_report_max(&self.tables, &self.passage, DEFAULT_NMAX)?,
        };
        if n > self.tables.n_star {
            return Err(Error::FrontierTooSmall {
                requested: n,
                available: self.tables.n_star,
            });
        }
        Ok(n)
    }

    fn solve(&self, c: &Common, scheme: Scheme) -> Result<PoissonSolution> {
        let nmax = self.nmax(c)?;
        let z = self.zeta_input(c.zeta_mode)?;
        let frontier = || match c.frontier {
            Some(n) if n < nmax => Err(Error::Config(format!("--N {n} is below --nmax {nmax}"))),
            Some(n) => Ok(n),
            None => default_frontier(&self.tables, &self.passage, nmax),
        };
        match scheme {
            Scheme::Exact => solve_exact(&self.tables, c.b0),
            Scheme::Forward => solve_forward(&self.tables, z, nmax, c.b0),
            Scheme::Backward => solve_backward(&self.tables, z, frontier()?, c.phi_seed, c.b0),
            Scheme::Mixed => solve_mixed(&self.tables, &self.passage, z, frontier()?, c.phi_seed, c.b0),
        }
    }
}

/// Runs `f` on every `--model`, on `--jobs` threads, and stacks the tables.
fn sweep<F>(c: &Common, f: F) -> Result<Table>
where
    F: Fn(&Common, &Context) -> Result<Table> + Sync,
{
    let one = |spec: &String| Context::load(spec).and_then(|ctx| f(c, &ctx));
    let results: Vec<Result<Table>> = if c.output.jobs > 1 && c.model.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(c.output.jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| c.model.par_iter().map(one).collect())
    } else {
        c.model.iter().map(one).collect()
    };
    let tables = results.into_iter().collect::<Result<Vec<_>>>()?;
    if tables.len() == 1 {
        return Ok(tables.into_iter().next().unwrap());
    }
    let mut out = Table::default();
    for (spec, t) in c.model.iter().zip(tables) {
        if out.header.is_empty() {
            out.header = std::iter::once("model".to_string()).chain(t.header).collect();
        }
        for row in t.rows {
            out.rows.push(std::iter::once(spec.clone()).chain(row).collect());
        }
    }
    Ok(out)
}

fn steady(c: &Common, ctx: &Context) -> Result<Table> {
    let t = &ctx.tables;
    let mut out = Table::new(&["n", "lambda", "mu", "cost", "p", "p_cum", "p_bar", "c_cum", "c_bar", "z"]);
    for n in 0..=ctx.nmax(c)? {
        out.push(vec![
            n.to_string(),
            num(t.lambda[n]),
            num(t.mu[n]),
            num(t.cost[n]),
            num(t.p[n]),
            num(t.p_cum[n]),
            num(t.p_bar[n]),
            num(t.c_cum[n]),
            num(t.c_bar[n]),
            num(t.z[n]),
        ]);
    }
    Ok(out)
}

fn passage(c: &Common, ctx: &Context) -> Result<Table> {
    let p = &ctx.passage;
    let mut out = Table::new(&["n", "t_up", "h_up", "t_down", "h_down", "t_0n", "h_0n", "t_n0", "h_n0"]);
    for n in 0..=ctx.nmax(c)? {
        out.push(vec![
            n.to_string(),
            num(p.t_up[n]),
            num(p.h_up[n]),
            num(p.t_down[n]),
            num(p.h_down[n]),
            num(p.t_0n[n]),
            num(p.h_0n[n]),
            num(p.t_n0[n]),
            num(p.h_n0[n]),
        ]);
    }
    Ok(out)
}

fn solve(c: &Common, ctx: &Context) -> Result<Table> {
    let s = ctx.solve(c, c.scheme.unwrap_or(Scheme::Mixed))?;
    let nmax = ctx.nmax(c)?;
    let mut out = Table::new(&["n", "phi", "b"]);
    for n in 0..=nmax {
        out.push(vec![n.to_string(), num(s.phi[n]), num(s.b[n])]);
    }
    Ok(out)
}

fn errors(c: &Common, ctx: &Context) -> Result<Table> {
    let scheme = c.scheme.unwrap_or(Scheme::Forward);
    let (t, p) = (&ctx.tables, &ctx.passage);
    let z = ctx.zeta_input(c.zeta_mode)?;
    let e = input_error(t, z);
    let mut report = match scheme {
        Scheme::Forward => forward_error_factors(t, p, e, c.b0)?,
        Scheme::Backward => backward_error_factors(t, p, e, c.b0)?,
        Scheme::Mixed => mixed_error_factors(t, p, e, c.b0)?,
        Scheme::Exact => return Err(Error::Config("errors needs an approximate scheme".into())),
    };
    let computed = ctx.solve(c, scheme)?;
    let exact = solve_exact(t, c.b0)?;
    report.attach_observed(&computed.phi, &exact.phi);
    let mut out = Table::new(&[
        "n",
        "abs_factor",
        "rel_factor",
        "b_abs_factor",
        "b_rel_factor",
        "predicted_abs_error",
        "observed_abs_error",
    ]);
    for r in &report.rows[..=ctx.nmax(c)?] {
        out.push(vec![
            r.n.to_string(),
            num(r.abs_factor),
            opt(r.rel_factor),
            num(r.b_abs_factor),
            opt(r.b_rel_factor),
            num(r.predicted_abs_error),
            opt(r.observed_abs_error),
        ]);
    }
    Ok(out)
}

fn metrics(c: &Common, ctx: &Context) -> Result<Table> {
    let scheme = c.scheme.unwrap_or(Scheme::Mixed);
    let (t, p) = (&ctx.tables, &ctx.passage);
    let s = ctx.solve(c, scheme)?;
    let r = metrics_report(t, p, &s)?;
    let exact = solve_exact(t, 0.0)?;
    let exact_bias = bias(&exact.phi, t);
    let exact_sigma2 = crate::metrics::asymptotic_variance(&exact.phi, t)?.sigma2;
    let mut out = Table::new(&["key", "value"]);
    out.kv("scheme", scheme.as_str().into());
    out.kv("N", r.n_used.to_string());
    out.kv("zeta", num(r.zeta));
    out.kv("z_input", num(s.z_input));
    out.kv("e_abs_input", num(r.e_abs_input));
    out.kv("beta0", num(r.beta0));
    out.kv("sigma2", num(r.sigma2));
    out.kv("sigma2_status", format!("{:?}", r.sigma2_status).to_lowercase());
    out.kv("predicted_beta0_error", num(r.predicted_beta0_error));
    out.kv("observed_beta0_error", num(r.beta0 - exact_bias.beta0));
    out.kv("predicted_sigma2_error", num(r.predicted_sigma2_error));
    out.kv("observed_sigma2_error", num(r.sigma2 - exact_sigma2));
    out.kv("beta0_remainder_bound", num(r.beta0_remainder_bound));
    out.kv("signed_costs", r.signed_costs.to_string());
    if scheme == Scheme::Mixed {
        let bf = boundary_functionals(t, p)?;
        if let Ok(tr) = truncated_metric_errors(t, p, &bf, r.e_abs_input, crossover_m(t)) {
            out.kv("limit_beta0_error", num(tr.mixed.beta0_error));
            out.kv("limit_sigma2_error", num(tr.mixed.sigma2_error));
        }
    }
    Ok(out)
}

fn structure(c: &Common, ctx: &Context, rows: bool, horizon: usize) -> Result<Table> {
    let exact = solve_exact(&ctx.tables, c.b0)?;
    let nmax = ctx.nmax(c)?;
    if rows {
        let mut out = Table::new(&["n", "d", "delta_d", "delta_c", "phi", "delta_phi", "ratio"]);
        for r in structure_rows(&ctx.tables, &ctx.passage, &exact.phi[..=nmax]) {
            out.push(vec![
                r.n.to_string(),
                num(r.d),
                num(r.delta_d),
                num(r.delta_c),
                num(r.phi),
                num(r.delta_phi),
                num(r.ratio),
            ]);
        }
        return Ok(out);
    }
    let s = structure_report(&ctx.tables, &ctx.passage, &exact.phi[..=nmax], horizon, DEFAULT_SLACK)?;
    let a = &s.assumption;
    let x = &s.appendix;
    let mut out = Table::new(&["check", "verdict"]);
    out.kv("i_a", a.i_a.to_string());
    out.kv("i_b", a.i_b.to_string());
    out.kv("ii_a", a.ii_a.to_string());
    out.kv("ii_b", a.ii_b.to_string());
    out.kv("assumption_horizon", a.horizon.to_string());
    out.kv("phi_nondecreasing", s.convexity.is_nondecreasing.to_string());
    out.kv(
        "phi_first_violation",
        s.convexity.first_violation.map(|n| n.to_string()).unwrap_or_default(),
    );
    out.kv("z_monotone", x.z_monotone.to_string());
    out.kv("delta_t_positive", x.delta_t_positive.to_string());
    out.kv("ratio_monotone", x.ratio_monotone.to_string());
    out.kv("ratio_below_zeta", x.ratio_below_zeta.to_string());
    out.kv("ratio_approaches_zeta", x.ratio_approaches_zeta.to_string());
    out.kv("mediant_sandwich", x.mediant_sandwich.to_string());
    Ok(out)
}

/// `n, p_n, φ̂_n, φ̃_n` for `n <= 29`: forward recurrence from `fl(ζ)` and from
/// `fl(ζ)` moved up one perturbation step.
pub fn table1(tables: &ChainTables) -> Result<Table> {
    let nmax = DEFAULT_NMAX;
    let z = tables.mean_cost(ZetaMode::Analytic)?;
    let zp = tables.mean_cost(ZetaMode::Perturbed(1))?;
    let hat = solve_forward(tables, z, nmax, 0.0)?;
    let tilde = solve_forward(tables, zp, nmax, 0.0)?;
    let mut out = Table::new(&["n", "p", "phi_hat", "phi_tilde"]);
    for n in 0..=nmax {
        out.push(vec![n.to_string(), num(tables.p[n]), num(hat.phi[n]), num(tilde.phi[n])]);
    }
    Ok(out)
}

/// `n, φ̃_n^N, ζA_n/φ_n, T_{n+1}^-, T_n^+` for `12 <= n <= 29`, mixed scheme
/// with `N = 42` and a zero seed.
pub fn table2(tables: &ChainTables, passage: &PassageTables) -> Result<Table> {
    let z = tables.mean_cost(ZetaMode::Analytic)?;
    let mixed = solve_mixed(tables, passage, z, 42, 0.0, 0.0)?;
    let factors = mixed_error_factors(tables, passage, input_error(tables, z), 0.0)?;
    let mut out = Table::new(&["n", "phi_mixed", "rel_factor", "t_down", "t_up"]);
    for n in 12..=DEFAULT_NMAX {
        out.push(vec![
            n.to_string(),
            num(mixed.phi[n]),
            opt(factors.rows[n].rel_factor),
            num(passage.t_down[n]),
            num(passage.t_up[n]),
        ]);
    }
    Ok(out)
}

fn repro_table1(ctx: &Context) -> Result<Table> {
    table1(&ctx.tables)
}

fn repro_table2(ctx: &Context) -> Result<Table> {
    table2(&ctx.tables, &ctx.passage)
}

fn repro_metrics(ctx: &Context) -> Result<Table> {
    let (t, p) = (&ctx.tables, &ctx.passage);
    let z = t.mean_cost(ZetaMode::Analytic)?;
    let n = default_frontier(t, p, DEFAULT_NMAX)?;
    let mixed = solve_mixed(t, p, z, n, 0.0, 0.0)?;
    let r = metrics_report(t, p, &mixed)?;
    let bf = boundary_functionals(t, p)?;
    let mut out = Table::new(&["key", "value"]);
    out.kv("N", n.to_string());
    out.kv("beta0", num(r.beta0));
    out.kv("sigma2", num(r.sigma2));
    out.kv("t_p0", num(bf.t_p0.value()));
    out.kv("t_10", num(p.t_n0[1]));
    out.kv("beta1", num(r.beta[1]));
    Ok(out)
}

fn write_table<W: Write>(table: &Table, format: Format, w: W) -> Result<()> {
    let delimiter = match format {
        Format::Csv => b',',
        Format::Tsv => b'\t',
    };
    let mut wtr = csv::WriterBuilder::new().delimiter(delimiter).from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wtr.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        wtr.write_record(row).map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

fn emit(table: &Table, output: &Output) -> Result<()> {
    let mut buf = Vec::new();
    write_table(table, output.format, &mut buf)?;
    match &output.out {
        Some(path) => File::create(path)?.write_all(&buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}
