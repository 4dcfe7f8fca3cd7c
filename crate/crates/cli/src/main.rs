//! `heatkern` — command-line front end for the heat-kernel expansion
//! toolkit.
//!
//! Exit codes are a stable contract: 0 on success, 1 when a verification
//! suite reports a failing check (or a well-posed computation breaks down),
//! 2 on usage or configuration errors. Output formats: CSV for numeric
//! tables (mandatory header, 17 significant digits, LF endings, `.`
//! decimal), JSON for structured reports. All output is byte-deterministic
//! for a fixed configuration.

mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use heatkern::basis_transform::{self, FormFactorSet};
use heatkern::form_factors::{self, FormFactorKind};
use heatkern::lattice_oracle::{exact_trace, LatticeSpec};
use heatkern::trace_evaluator::laplace_trace;
use heatkern::SpectralFunction;

use config::{eval_config, load_fields, require, usage, CliError, CliResult, Ctx};
use output::{parse_x_list, render_csv, resolve_grid, write_out};

#[derive(Parser)]
#[command(
    name = "heatkern",
    version,
    about = "Second-order heat-kernel expansion: form-factor tables, verification suites, lattice and spectral traces",
    after_help = "Any flag of the invoked subcommand may instead be given in a JSON config \
                  file (--config run.json) keyed by the flag name with '-' replaced by '_'; \
                  explicit flags override file values. HK_QUAD_TOL overrides the default \
                  quadrature tolerance."
)]
struct Cli {
    /// JSON file supplying default values for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate form factors on an x grid as CSV.
    FfTable(FfTableArgs),
    /// Emit (x, f(x)) CSV covering the basic profile into its asymptotic tail.
    PlotData(PlotDataArgs),
    /// Run a verification suite and write a JSON report; exits 1 on failure.
    Verify(VerifyArgs),
    /// Convert the closed-form factor set to another basis and tabulate it.
    BasisConvert(BasisConvertArgs),
    /// Exact dense-lattice heat traces for a field configuration.
    LatticeTrace(LatticeTraceArgs),
    /// Integrate a spectral function against the expanded heat trace.
    LaplaceTrace(LaplaceTraceArgs),
}

#[derive(Args)]
struct FfTableArgs {
    /// Comma-separated kinds: basic, ric, r, ru, u, omega, r2d, c, rbis,
    /// f1..f5, gu, gr (c and rbis need --d).
    #[arg(long)]
    kinds: Option<String>,
    /// Comma-separated explicit x values.
    #[arg(long)]
    x: Option<String>,
    /// Log-spaced grid a:b:n (n points from a to b inclusive).
    #[arg(long)]
    log_grid: Option<String>,
    /// Spacetime dimension for the dimension-dependent kinds.
    #[arg(long)]
    d: Option<u32>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotDataArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Projectors,
    Diagrams,
    Resolvent,
    Bases,
    Lattice,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(value_enum)]
    suite: SuiteName,
    /// Spacetime dimension (default 4).
    #[arg(long)]
    d: Option<u32>,
    /// Field-data JSON (required by the lattice suite).
    #[arg(long)]
    fields: Option<PathBuf>,
    /// Diffusion time for the lattice suite (default: window midpoint).
    #[arg(long)]
    s: Option<f64>,
    /// Field-scaling step for the second-order isolation (default 1e-3).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Declared tolerance of the lattice isolation check (default 0.05).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Report file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasisConvertArgs {
    /// Target basis: ricr, weyl or bv.
    #[arg(long)]
    to: Option<String>,
    /// Spacetime dimension (required for weyl).
    #[arg(long)]
    d: Option<u32>,
    /// Comma-separated explicit x values.
    #[arg(long)]
    x: Option<String>,
    /// Log-spaced grid a:b:n.
    #[arg(long)]
    log_grid: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LatticeTraceArgs {
    /// Field-data JSON (must carry n_sites).
    #[arg(long)]
    fields: Option<PathBuf>,
    /// Comma-separated diffusion times.
    #[arg(long)]
    s: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LaplaceTraceArgs {
    /// Field-data JSON.
    #[arg(long)]
    fields: Option<PathBuf>,
    /// Spectral family: heat-kernel or massive-resolvent.
    #[arg(long)]
    family: Option<String>,
    /// Diffusion time (heat-kernel family).
    #[arg(long)]
    t: Option<f64>,
    /// Mass squared (massive-resolvent family).
    #[arg(long)]
    m2: Option<f64>,
    /// Lower proper-time bound (default 0).
    #[arg(long)]
    s_min: Option<f64>,
    /// Upper proper-time bound (default: integrate the decaying tail).
    #[arg(long)]
    s_max: Option<f64>,
    /// Relative tolerance of the proper-time integration.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

/// Dispatches the subcommand; `Ok(false)` means a verification suite failed.
fn run(cli: Cli) -> CliResult<bool> {
    let ctx = Ctx::load(cli.config.as_deref())?;
    match cli.command {
        Command::FfTable(a) => cmd_ff_table(a, &ctx).map(|()| true),
        Command::PlotData(a) => cmd_plot_data(a, &ctx).map(|()| true),
        Command::Verify(a) => cmd_verify(a, &ctx),
        Command::BasisConvert(a) => cmd_basis_convert(a, &ctx).map(|()| true),
        Command::LatticeTrace(a) => cmd_lattice_trace(a, &ctx).map(|()| true),
        Command::LaplaceTrace(a) => cmd_laplace_trace(a, &ctx).map(|()| true),
    }
}

/// Parses one lowercase kind name; `d` feeds the dimension-dependent kinds.
fn parse_kind(name: &str, d: Option<u32>) -> CliResult<FormFactorKind> {
    let kind = match name {
        "basic" => FormFactorKind::Basic,
        "ric" => FormFactorKind::Ric,
        "r" => FormFactorKind::R,
        "ru" => FormFactorKind::RU,
        "u" => FormFactorKind::U,
        "omega" => FormFactorKind::Omega,
        "r2d" => FormFactorKind::R2d,
        "f1" => FormFactorKind::BV1,
        "f2" => FormFactorKind::BV2,
        "f3" => FormFactorKind::BV3,
        "f4" => FormFactorKind::BV4,
        "f5" => FormFactorKind::BV5,
        "gu" => FormFactorKind::GU,
        "gr" => FormFactorKind::GR,
        "c" => FormFactorKind::C {
            d: require(d, "--d (the 'c' kind is dimension-dependent)")?,
        },
        "rbis" => FormFactorKind::Rbis {
            d: require(d, "--d (the 'rbis' kind is dimension-dependent)")?,
        },
        other => {
            return Err(usage(format!(
                "unknown kind '{other}'; known: basic, ric, r, ru, u, omega, r2d, c, rbis, \
                 f1, f2, f3, f4, f5, gu, gr"
            )))
        }
    };
    Ok(kind)
}

fn cmd_ff_table(a: FfTableArgs, ctx: &Ctx) -> CliResult<()> {
    let cfg = eval_config()?;
    let kinds_raw = require(ctx.string(a.kinds, "kinds"), "--kinds")?;
    let d = ctx.u32(a.d, "d")?;
    let kinds: Vec<(String, FormFactorKind)> = kinds_raw
        .split(',')
        .map(|name| {
            let name = name.trim().to_lowercase();
            parse_kind(&name, d).map(|k| (name, k))
        })
        .collect::<CliResult<_>>()?;
    if kinds.is_empty() {
        return Err(usage("--kinds must list at least one kind"));
    }
    let grid = resolve_grid(ctx.string(a.x, "x"), ctx.string(a.log_grid, "log_grid"))?;

    let mut header = vec!["x"];
    header.extend(kinds.iter().map(|(n, _)| n.as_str()));
    let mut rows = Vec::with_capacity(grid.len());
    for &x in &grid {
        let mut row = vec![x];
        for (_, kind) in &kinds {
            row.push(form_factors::eval(*kind, x, &cfg)?);
        }
        rows.push(row);
    }
    write_out(
        ctx.path(a.out, "out").as_deref(),
        &render_csv(&header, &rows),
    )
}

fn cmd_plot_data(a: PlotDataArgs, ctx: &Ctx) -> CliResult<()> {
    let cfg = eval_config()?;
    // Start at the origin, then sweep a fixed log-spaced grid until the
    // two-term asymptote is accurate to one part in 10⁶ — far enough to show
    // that the exponentially small remainder has died off.
    let mut rows = vec![vec![0.0, form_factors::basic_f(0.0, &cfg)?]];
    let ratio = 10f64.powf(1.0 / 24.0);
    let mut x = 1e-2;
    loop {
        let f = form_factors::basic_f(x, &cfg)?;
        rows.push(vec![x, f]);
        if (f - 2.0 / x - 4.0 / (x * x)).abs() <= 1e-6 * f {
            break;
        }
        if x > 1e9 {
            return Err(CliError::Failure(
                "asymptotic stopping rule never satisfied".to_string(),
            ));
        }
        x *= ratio;
    }
    write_out(ctx.path(a.out, "out").as_deref(), &render_csv(&["x", "f"], &rows))
}

fn cmd_verify(a: VerifyArgs, ctx: &Ctx) -> CliResult<bool> {
    let cfg = eval_config()?;
    let fields = match ctx.path(a.fields, "fields") {
        Some(p) => Some(load_fields(&p)?),
        None => None,
    };
    let params = verify::SuiteParams {
        d: ctx.u32(a.d, "d")?,
        fields,
        s: ctx.f64(a.s, "s")?,
        epsilon: ctx.f64(a.epsilon, "epsilon")?,
        tolerance: ctx.f64(a.tolerance, "tolerance")?,
        cfg,
    };
    let report = match a.suite {
        SuiteName::Projectors => verify::projectors(&params)?,
        SuiteName::Diagrams => verify::diagrams(&params)?,
        SuiteName::Resolvent => verify::resolvent(&params)?,
        SuiteName::Bases => verify::bases(&params)?,
        SuiteName::Lattice => verify::lattice(&params)?,
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Failure(format!("report serialization failed: {e}")))?;
    text.push('\n');
    write_out(ctx.path(a.out, "out").as_deref(), &text)?;
    Ok(report.pass)
}

fn cmd_basis_convert(a: BasisConvertArgs, ctx: &Ctx) -> CliResult<()> {
    let cfg = eval_config()?;
    let target = require(ctx.string(a.to, "to"), "--to")?.to_lowercase();
    let set = FormFactorSet::closed_form_ricr(cfg);
    let converted = match target.as_str() {
        "ricr" => set,
        "weyl" => {
            let d = require(ctx.u32(a.d, "d")?, "--d (the Weyl map is dimension-dependent)")?;
            basis_transform::to_weyl(&set, d)?
        }
        "bv" => basis_transform::to_bv(&set)?,
        other => {
            return Err(usage(format!(
                "unknown target basis '{other}'; known: ricr, weyl, bv"
            )))
        }
    };
    let grid = resolve_grid(ctx.string(a.x, "x"), ctx.string(a.log_grid, "log_grid"))?;
    let slots = converted.basis().slots();
    let mut header = vec!["x"];
    header.extend_from_slice(slots);
    let mut rows = Vec::with_capacity(grid.len());
    for &x in &grid {
        let mut row = vec![x];
        for slot in slots {
            row.push(converted.eval_slot(slot, x)?);
        }
        rows.push(row);
    }
    write_out(
        ctx.path(a.out, "out").as_deref(),
        &render_csv(&header, &rows),
    )
}

fn cmd_lattice_trace(a: LatticeTraceArgs, ctx: &Ctx) -> CliResult<()> {
    let fields_path = require(ctx.path(a.fields, "fields"), "--fields")?;
    let (fields, n_sites) = load_fields(&fields_path)?;
    let n = require(n_sites, "n_sites in the fields file")?;
    let s_values = parse_x_list(&require(ctx.string(a.s, "s"), "--s")?)?;
    let spec = LatticeSpec::from_box(fields.d(), n, fields.box_length())?;

    let mut rows = Vec::with_capacity(s_values.len());
    for &s in &s_values {
        let r = exact_trace(&spec, &fields, s)?;
        rows.push(vec![s, r.trace, r.eigenvalue_range.0, r.eigenvalue_range.1]);
    }
    write_out(
        ctx.path(a.out, "out").as_deref(),
        &render_csv(&["s", "trace", "eig_min", "eig_max"], &rows),
    )
}

#[derive(serde::Serialize)]
struct LaplaceReport {
    family: String,
    parameter: f64,
    s_min: f64,
    s_max: Option<f64>,
    rel_tol: f64,
    value: f64,
}

fn cmd_laplace_trace(a: LaplaceTraceArgs, ctx: &Ctx) -> CliResult<()> {
    let fields_path = require(ctx.path(a.fields, "fields"), "--fields")?;
    let (fields, _) = load_fields(&fields_path)?;
    let family = require(ctx.string(a.family, "family"), "--family")?.to_lowercase();
    let mut h = match family.as_str() {
        "heat-kernel" => {
            let t = require(ctx.f64(a.t, "t")?, "--t (heat-kernel diffusion time)")?;
            SpectralFunction::heat_kernel(t)
        }
        "massive-resolvent" => {
            let m2 = require(ctx.f64(a.m2, "m2")?, "--m2 (resolvent mass squared)")?;
            SpectralFunction::massive_resolvent(m2)
        }
        other => {
            return Err(usage(format!(
                "unknown family '{other}'; known: heat-kernel, massive-resolvent"
            )))
        }
    };
    if let Some(s_min) = ctx.f64(a.s_min, "s_min")? {
        h.s_min = s_min;
    }
    if let Some(s_max) = ctx.f64(a.s_max, "s_max")? {
        h.s_max = Some(s_max);
    }
    if let Ok(raw) = std::env::var("HK_QUAD_TOL") {
        h.rel_tol = raw
            .parse()
            .map_err(|_| usage(format!("HK_QUAD_TOL is not a number: {raw:?}")))?;
    }
    if let Some(rel_tol) = ctx.f64(a.rel_tol, "rel_tol")? {
        h.rel_tol = rel_tol;
    }
    let parameter = match &h.family {
        heatkern::SpectralFamily::HeatKernel { t } => *t,
        heatkern::SpectralFamily::MassiveResolvent { m_squared } => *m_squared,
        heatkern::SpectralFamily::Custom { .. } => unreachable!("CLI never builds Custom"),
    };
    let value = laplace_trace(&fields, &h)?;
    let report = LaplaceReport {
        family,
        parameter,
        s_min: h.s_min,
        s_max: h.s_max,
        rel_tol: h.rel_tol,
        value,
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Failure(format!("report serialization failed: {e}")))?;
    text.push('\n');
    write_out(ctx.path(a.out, "out").as_deref(), &text)
}
