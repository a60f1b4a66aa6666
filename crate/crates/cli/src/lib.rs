//! Command-line front end. Each subcommand is a plain function returning
//! rendered text and an exit status, so it can be tested without spawning
//! a process; `main` only parses arguments and writes the result.

pub mod format;

use std::fs::File;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nmqem::channel::{predict_table, Gate, COMPUTATIONAL_LABELS};
use nmqem::expdata::{compare_published, estimate_re_k, fit_coupling, load_table};
use nmqem::gamma::{
    anticommutator, build_gamma_basis, metric_identity, reconstruct, GammaBasis, BASIS_SIZE,
};
use nmqem::kernel::{evaluate, re_k_approx, KernelMode, KernelParams};
use nmqem::numerics::{mat_mul, rank, SINGULAR_RTOL};
use nmqem::recovery::{cost, cost_from_decomposition, RecoveryOp, ALPHA_RECOVERY_MAX};
use nmqem::Error;

use crate::format::{csv, sig10, table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ALGEBRA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nmqem", version, about = "Non-Markovian noise channels, recovery costs and kernel estimates for two-qubit gates")]
pub struct Cli {
    /// Output format (each subcommand has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify the Clifford algebra of the built-in Gamma basis.
    GammaCheck,
    /// Tabulate k(u) over a grid of u = t / tau_s.
    Kernel(KernelArgs),
    /// Tabulate the mitigation cost over a grid of u.
    Cost(CostArgs),
    /// Predicted outcome probabilities for a gate at a given Re k.
    Predict(GateAlphaArgs),
    /// Estimate Re k from a device count table.
    Estimate(EstimateArgs),
    /// Gamma-basis expansion of the recovery operator.
    Decompose(GateAlphaArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Comma-separated coupling strengths Gamma0 * wc * tau_s.
    #[arg(long, value_delimiter = ',', default_values_t = [7e-4, 7e-3])]
    pub coupling: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub u_max: f64,
    /// Number of grid points, including both ends.
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Approx)]
    pub mode: ModeArg,
    /// Overrides Gamma0; by default it is coupling / wc_ts.
    #[arg(long)]
    pub gamma0: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub delta0: f64,
    #[arg(long, default_value_t = 10.0)]
    pub wc_ts: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Approx,
    Printed,
    Quadrature,
}

impl From<ModeArg> for KernelMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Approx => KernelMode::Approx,
            ModeArg::Printed => KernelMode::Printed,
            ModeArg::Quadrature => KernelMode::Quadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateArg {
    Swap,
    Identity,
}

impl From<GateArg> for Gate {
    fn from(g: GateArg) -> Self {
        match g {
            GateArg::Swap => Gate::Swap,
            GateArg::Identity => Gate::Identity,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[arg(long, value_enum)]
    pub gate: GateArg,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GateAlphaArgs {
    #[arg(long, value_enum)]
    pub gate: GateArg,
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// JSON count or probability table.
    #[arg(long)]
    pub counts: PathBuf,
    /// Must agree with the gate recorded in the file.
    #[arg(long, value_enum)]
    pub gate: Option<GateArg>,
}

/// Rendered output and exit status of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Self {
            stdout: String::new(),
            stderr,
            code,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::AlphaOutOfRange { .. } | Error::InvalidParameter(_) => EXIT_USAGE,
        Error::Parse { .. } | Error::Schema(_) | Error::EmptyRun(_) | Error::NotNormalized(_) => {
            EXIT_DATA
        }
        _ => EXIT_ALGEBRA,
    }
}

fn from_error(e: Error) -> Outcome {
    Outcome::fail(exit_code(&e), format!("error: {e}"))
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Output is returned, not written; see [`execute`].
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome::fail(EXIT_USAGE, text)
            } else {
                Outcome::ok(text)
            }
        }
    }
}

/// Runs and delivers the output to `--out` or standard output.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let out_path = Cli::try_parse_from(&args).ok().and_then(|c| c.out);
    let outcome = run(args);
    eprint!("{}", outcome.stderr);
    if outcome.code == EXIT_OK {
        if let Some(path) = out_path {
            if let Err(e) = std::fs::write(&path, &outcome.stdout) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_DATA;
            }
            return EXIT_OK;
        }
    }
    print!("{}", outcome.stdout);
    outcome.code
}

pub fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::GammaCheck => cmd_gamma_check(&build_gamma_basis(), cli.format.unwrap_or(Format::Table)),
        Command::Kernel(a) => cmd_kernel(a, cli.format.unwrap_or(Format::Csv)),
        Command::Cost(a) => cmd_cost(a, cli.format.unwrap_or(Format::Csv)),
        Command::Predict(a) => cmd_predict(a, cli.format.unwrap_or(Format::Table)),
        Command::Estimate(a) => cmd_estimate(a, cli.format.unwrap_or(Format::Table)),
        Command::Decompose(a) => cmd_decompose(a, cli.format.unwrap_or(Format::Table)),
    }
}

fn render(fmt: Format, headers: &[&str], rows: &[Vec<String>], json: Value) -> String {
    match fmt {
        Format::Csv => csv(headers, rows),
        Format::Table => table(headers, rows),
        Format::Json => pretty(&json),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Anticommutators for the ten index pairs mu <= nu, the rank of the
/// flattened basis, and `gamma5 = g0 g1 g2 g3`, all compared exactly.
pub fn gamma_checks(basis: &GammaBasis) -> Vec<Check> {
    let mut checks = Vec::new();
    for mu in 0..4 {
        for nu in mu..4 {
            let diff = anticommutator(basis, mu, nu).max_abs_diff(&metric_identity(mu, nu));
            checks.push(Check {
                name: format!("{{g{mu},g{nu}}} = 2 g_{mu}{nu} I"),
                pass: diff == 0.0,
                detail: format!("max deviation {}", sig10(diff)),
            });
        }
    }
    let r = rank(basis.flattened(), SINGULAR_RTOL);
    checks.push(Check {
        name: "linear independence".into(),
        pass: r == BASIS_SIZE,
        detail: format!("rank {r}/{BASIS_SIZE}"),
    });
    let product = [1, 2, 3].iter().fold(basis.gamma(0).clone(), |acc, &mu| {
        mat_mul(&acc, basis.gamma(mu)).expect("4x4 operands")
    });
    let diff = product.max_abs_diff(basis.gamma5());
    checks.push(Check {
        name: "g5 = g0 g1 g2 g3".into(),
        pass: diff == 0.0,
        detail: format!("max deviation {}", sig10(diff)),
    });
    checks
}

pub fn cmd_gamma_check(basis: &GammaBasis, fmt: Format) -> Outcome {
    let checks = gamma_checks(basis);
    let all = checks.iter().all(|c| c.pass);
    let status = |p: bool| if p { "PASS" } else { "FAIL" };
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| vec![c.name.clone(), status(c.pass).into(), c.detail.clone()])
        .collect();
    let text = match fmt {
        Format::Json => pretty(&json!({
            "pass": all,
            "checks": checks.iter().map(|c| json!({
                "check": c.name, "pass": c.pass, "detail": c.detail,
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => csv(&["check", "status", "detail"], &rows),
        Format::Table => {
            let mut s = String::new();
            for c in &checks {
                s.push_str(&format!("{}  {}  ({})\n", status(c.pass), c.name, c.detail));
            }
            s.push_str(if all { "all checks passed\n" } else { "ALGEBRA CHECK FAILED\n" });
            s
        }
    };
    Outcome {
        stdout: text,
        stderr: String::new(),
        code: if all { EXIT_OK } else { EXIT_ALGEBRA },
    }
}

fn grid(g: &GridArgs) -> Result<Vec<f64>, Outcome> {
    if !(g.u_max.is_finite() && g.u_max > 0.0) {
        return Err(Outcome::fail(EXIT_USAGE, format!("error: --u-max must be positive, got {}", g.u_max)));
    }
    if g.steps < 2 {
        return Err(Outcome::fail(EXIT_USAGE, format!("error: --steps must be at least 2, got {}", g.steps)));
    }
    if g.coupling.is_empty() {
        return Err(Outcome::fail(EXIT_USAGE, "error: --coupling needs at least one value"));
    }
    if let Some(c) = g.coupling.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Outcome::fail(EXIT_USAGE, format!("error: couplings must be nonnegative, got {c}")));
    }
    let n = g.steps - 1;
    Ok((0..=n).map(|i| g.u_max * i as f64 / n as f64).collect())
}

fn rows_to_json(headers: &[&str], rows: &[Vec<String>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                let obj = headers
                    .iter()
                    .zip(r)
                    .map(|(h, v)| {
                        let val = if v.is_empty() {
                            Value::Null
                        } else {
                            v.parse::<f64>().map(|x| json!(x)).unwrap_or_else(|_| json!(v))
                        };
                        (h.to_string(), val)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect(),
    )
}

pub fn cmd_kernel(a: &KernelArgs, fmt: Format) -> Outcome {
    let us = match grid(&a.grid) {
        Ok(us) => us,
        Err(o) => return o,
    };
    let mode = KernelMode::from(a.mode);
    let with_im = mode != KernelMode::Approx;
    let headers: &[&str] = if with_im {
        &["coupling", "u", "re_k", "im_k", "mode"]
    } else {
        &["coupling", "u", "re_k", "mode"]
    };
    let mut rows = Vec::new();
    for &c in &a.grid.coupling {
        let gamma0 = a.gamma0.unwrap_or(c / a.wc_ts);
        let params = match KernelParams::new(gamma0, a.delta0, a.wc_ts) {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        for &u in &us {
            let k = if mode == KernelMode::Approx {
                (re_k_approx(c, u), 0.0)
            } else {
                match evaluate(mode, &params, u) {
                    Ok(k) => (k.re, k.im),
                    Err(e) => return from_error(e),
                }
            };
            let mut row = vec![sig10(c), sig10(u), sig10(k.0)];
            if with_im {
                row.push(sig10(k.1));
            }
            row.push(mode.to_string());
            rows.push(row);
        }
    }
    let json = rows_to_json(headers, &rows);
    Outcome::ok(render(fmt, headers, &rows, json))
}

pub fn cmd_cost(a: &CostArgs, fmt: Format) -> Outcome {
    let us = match grid(&a.grid) {
        Ok(us) => us,
        Err(o) => return o,
    };
    let gate = Gate::from(a.gate);
    let headers = ["coupling", "u", "alpha", "cost"];
    let mut rows = Vec::new();
    for &c in &a.grid.coupling {
        for &u in &us {
            let alpha = re_k_approx(c, u);
            let cell = if alpha < ALPHA_RECOVERY_MAX {
                match cost(gate, alpha) {
                    Ok(v) => sig10(v),
                    Err(e) => return from_error(e),
                }
            } else {
                String::new()
            };
            rows.push(vec![sig10(c), sig10(u), sig10(alpha), cell]);
        }
    }
    let json = json!({ "gate": gate.to_string(), "rows": rows_to_json(&headers, &rows) });
    Outcome::ok(render(fmt, &headers, &rows, json))
}

pub fn cmd_predict(a: &GateAlphaArgs, fmt: Format) -> Outcome {
    let gate = Gate::from(a.gate);
    let t = match predict_table(gate, a.alpha) {
        Ok(t) => t,
        Err(e) => return from_error(e),
    };
    let inputs = gate.input_labels();
    let mut headers = vec!["output"];
    headers.extend(inputs);
    let rows: Vec<Vec<String>> = (0..4)
        .map(|i| {
            let mut r = vec![COMPUTATIONAL_LABELS[i].to_string()];
            r.extend(t[i].iter().map(|&p| sig10(p)));
            r
        })
        .collect();
    let json = json!({
        "gate": gate.to_string(),
        "alpha": a.alpha,
        "inputs": inputs,
        "outputs": COMPUTATIONAL_LABELS,
        "table": t,
    });
    Outcome::ok(render(fmt, &headers, &rows, json))
}

pub fn cmd_estimate(a: &EstimateArgs, fmt: Format) -> Outcome {
    let file = match File::open(&a.counts) {
        Ok(f) => f,
        Err(e) => return Outcome::fail(EXIT_DATA, format!("error: cannot open {}: {e}", a.counts.display())),
    };
    let pt = match load_table(file) {
        Ok(pt) => pt,
        Err(e) => return Outcome::fail(EXIT_DATA, format!("error: {}: {e}", a.counts.display())),
    };
    if let Some(g) = a.gate {
        let g = Gate::from(g);
        if g != pt.gate {
            return Outcome::fail(
                EXIT_DATA,
                format!("error: --gate {g} disagrees with gate {} recorded in {}", pt.gate, a.counts.display()),
            );
        }
    }
    let est = estimate_re_k(&pt);
    let fit = |x: f64| fit_coupling(x.max(0.0), 1.0).expect("u = 1 is valid");
    let comparison = compare_published(&pt, &est);

    let headers = ["input", "output", "role", "p", "estimate"];
    let rows: Vec<Vec<String>> = est
        .per_cell
        .iter()
        .map(|c| {
            vec![
                c.input.to_string(),
                c.output.to_string(),
                c.role.to_string(),
                sig10(c.p),
                sig10(c.estimate),
            ]
        })
        .collect();

    let text = match fmt {
        Format::Csv => csv(&headers, &rows),
        Format::Json => pretty(&json!({
            "gate": pt.gate.to_string(),
            "device": pt.device,
            "per_cell": est.per_cell,
            "min": est.min,
            "max": est.max,
            "lsq": est.lsq,
            "lsq_note": "least-squares fit over all cells (extension beyond the published min/max ranges)",
            "residual": est.residual,
            "fitted_coupling_u1": { "min": fit(est.min), "max": fit(est.max), "lsq": fit(est.lsq) },
            "published": comparison,
        })),
        Format::Table => {
            let mut s = format!("device {}  gate {}\n\n", pt.device, pt.gate);
            s.push_str(&table(&headers, &rows));
            s.push('\n');
            let summary = vec![
                vec!["ALPHA-cell min".into(), sig10(est.min), sig10(fit(est.min))],
                vec!["ALPHA-cell max".into(), sig10(est.max), sig10(fit(est.max))],
                vec!["least squares (extension)".into(), sig10(est.lsq), sig10(fit(est.lsq))],
            ];
            s.push_str(&table(&["estimate", "Re k", "coupling at u=1"], &summary));
            s.push_str(&format!("residual sum of squares {}\n", sig10(est.residual)));
            if let Some(c) = comparison {
                s.push_str(&format!(
                    "published range {} .. {}: min {}, max {}\n",
                    sig10(c.published_min),
                    sig10(c.published_max),
                    if c.min_matches { "matches" } else { "DIVERGES" },
                    if c.max_matches { "matches" } else { "DIVERGES" },
                ));
            }
            s
        }
    };
    Outcome::ok(text)
}

pub fn cmd_decompose(a: &GateAlphaArgs, fmt: Format) -> Outcome {
    let gate = Gate::from(a.gate);
    let basis = build_gamma_basis();
    let op = match RecoveryOp::with_basis(gate, a.alpha, &basis) {
        Ok(op) => op,
        Err(e) => return from_error(e),
    };
    let residual = reconstruct(&basis, &op.gamma).max_abs_diff(&op.to_cmat());
    let from_gamma = cost_from_decomposition(&op);
    let closed = match cost(gate, a.alpha) {
        Ok(c) => c,
        Err(e) => return from_error(e),
    };
    let agree = (from_gamma - closed).abs() <= 1e-10;
    let note = if agree {
        "costs agree".to_string()
    } else {
        format!(
            "costs differ by {}: the closed-form cost is not the sum of the expansion weights for this gate",
            sig10(from_gamma - closed)
        )
    };
    let headers = ["label", "set", "re", "im"];
    let rows: Vec<Vec<String>> = basis
        .elements()
        .iter()
        .zip(op.gamma.values())
        .map(|(e, z)| {
            vec![
                e.label.to_string(),
                format!("{:?}", e.set),
                sig10(z.re),
                sig10(z.im),
            ]
        })
        .collect();
    let text = match fmt {
        Format::Csv => csv(&headers, &rows),
        Format::Json => pretty(&json!({
            "gate": gate.to_string(),
            "alpha": a.alpha,
            "closed_form": op.coeffs,
            "coefficients": op.gamma,
            "reconstruction_residual": residual,
            "cost_from_decomposition": from_gamma,
            "cost_closed_form": closed,
            "costs_agree": agree,
        })),
        Format::Table => {
            let mut s = format!("recovery operator for {gate} at alpha = {}\n\n", sig10(a.alpha));
            s.push_str(&table(&headers, &rows));
            s.push_str(&format!(
                "\nreconstruction residual    {}\ncost from decomposition    {}\ncost (closed form)         {}\n{note}\n",
                sig10(residual),
                sig10(from_gamma),
                sig10(closed),
            ));
            s
        }
    };
    Outcome::ok(text)
}
