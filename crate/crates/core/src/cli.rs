//! `pqss` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or validation error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    bound_lipschitz_grid, k_functional_report, modulus_bound_grid, BoundReport, LipschitzForm, LipschitzSpec,
    DEFAULT_MEMBERSHIP_GRID,
};
use crate::catalog::{CatalogEntry, Rect, TestFunction};
use crate::convergence::{
    convergence_table, korovkin_orders, korovkin_suite, ConvergenceRow, Family, FixedParams, KorovkinRow, Order,
    SequenceSpec,
};
use crate::error::Error;
use crate::moments::{first_moment_ratio, moment_oracle, MomentReport, MomentSweep};
use crate::operator::{uniform_grid, AxisConfig, BivariateOperator, NodeExponent};
use crate::output::{config_hash, emit, fmt_num, fmt_opt, resolve_output, to_csv, to_sorted_json, OutputFormat};
use crate::pq_core::PqPair;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "pqss",
    version,
    about = "Bivariate (p,q)-Schurer-Stancu operators: evaluation, moment checks, error bounds, convergence tables"
)]
pub struct Cli {
    /// Plain-text key=value file of flag defaults; command-line flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the operator on a catalog function at one point
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Compare closed-form moments with brute-force summation
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Korovkin sup-error tables along a (p_n, q_n) sequence
    #[command(args_override_self = true)]
    Converge(ConvergeArgs),
    /// Pointwise error bounds on a grid
    #[command(args_override_self = true)]
    Bounds(BoundsArgs),
    /// List catalog functions and their metadata
    #[command(args_override_self = true)]
    Catalog(CatalogArgs),
}

#[derive(Args, Debug, Clone)]
struct DegreeArgs {
    #[arg(long, default_value_t = 10)]
    n1: u32,
    #[arg(long, default_value_t = 10)]
    n2: u32,
    #[arg(long, default_value_t = 0.9)]
    p1: f64,
    #[arg(long, default_value_t = 0.6)]
    q1: f64,
    #[arg(long, default_value_t = 0.9)]
    p2: f64,
    #[arg(long, default_value_t = 0.6)]
    q2: f64,
}

#[derive(Args, Debug, Clone)]
struct ShapeArgs {
    #[arg(long, default_value_t = 0)]
    l1: u32,
    #[arg(long, default_value_t = 0)]
    l2: u32,
    #[arg(long, default_value_t = 0.0)]
    alpha1: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha2: f64,
    #[arg(long, default_value_t = 0.0)]
    beta1: f64,
    #[arg(long, default_value_t = 0.0)]
    beta2: f64,
    /// canonical (p^{n+l-ν}) or paper-literal (p^{n-ν})
    #[arg(long, default_value = "canonical")]
    node_exponent: NodeExponent,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file, or an existing directory to receive `<command>-<hash>.<ext>`
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Catalog function name (see `pqss catalog`)
    #[arg(long = "f", default_value = "const1")]
    function: String,
    #[arg(long, default_value_t = 0.5)]
    x1: f64,
    #[arg(long, default_value_t = 0.5)]
    x2: f64,
    /// Also evaluate by compensated direct summation
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    degree: DegreeArgs,
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = crate::moments::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Check only the operator given by the axis flags instead of the full sweep
    #[arg(long)]
    single: bool,
    /// Points per axis on [0,1]
    #[arg(long, default_value_t = 11)]
    grid: usize,
    #[command(flatten)]
    degree: DegreeArgs,
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    /// one-minus-c-over-n or tabulated
    #[arg(long, default_value = "one-minus-c-over-n")]
    family: String,
    #[arg(long, default_value_t = 0.5)]
    cp: f64,
    #[arg(long, default_value_t = 1.0)]
    cq: f64,
    /// Declared limit of p_n^n (defaults to e^{-cp} for the 1-c/n family)
    #[arg(long)]
    a: Option<f64>,
    /// Declared limit of q_n^n (defaults to e^{-cq} for the 1-c/n family)
    #[arg(long)]
    b: Option<f64>,
    /// Table file for the tabulated family: lines `n p q`
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,
    /// Comma-separated, strictly increasing
    #[arg(long, default_value = "16,32,64,128,256,512")]
    n_list: String,
    /// Optional catalog function for the convergence table
    #[arg(long = "f")]
    function: Option<String>,
    #[arg(long, default_value_t = crate::convergence::DEFAULT_GRID)]
    grid: usize,
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long = "f", default_value = "sum")]
    function: String,
    /// modulus, lipschitz or k-functional
    #[arg(long, default_value = "modulus")]
    kind: String,
    /// Points per axis on [0,1]
    #[arg(long, default_value_t = 41)]
    grid: usize,
    #[arg(long, default_value_t = 1.0)]
    lip_m: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma1: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma2: f64,
    /// product or additive-experimental
    #[arg(long, default_value = "product")]
    lip_form: String,
    #[arg(long, default_value_t = DEFAULT_MEMBERSHIP_GRID)]
    membership_grid: usize,
    /// Comma-separated smooth candidates for the K-functional
    #[arg(long, default_value = "smooth_ramp:0.05,smooth_ramp:0.1,smooth_ramp:0.2")]
    candidates: String,
    /// Points per axis for the K-functional report
    #[arg(long, default_value_t = 5)]
    kf_points: usize,
    /// Grid resolution for moduli and sup norms in the K-functional report
    #[arg(long, default_value_t = 41)]
    modulus_grid: usize,
    #[command(flatten)]
    degree: DegreeArgs,
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CatalogArgs {
    #[arg(long, default_value_t = 0)]
    l1: u32,
    #[arg(long, default_value_t = 0)]
    l2: u32,
    #[command(flatten)]
    out: OutputArgs,
}

/// Failure carrying the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_USAGE,
            message: format!("i/o error: {e}"),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self {
            code: EXIT_USAGE,
            message: format!("serialization error: {e}"),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CmdResult = Result<i32, Failure>;

const SUBCOMMANDS: [&str; 5] = ["eval", "verify", "converge", "bounds", "catalog"];

fn parse_config_file(path: &Path) -> Result<Vec<String>, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_owned());
            }
        }
    }
    Ok(out)
}

/// Splices `--config` file entries in front of the explicit flags so the
/// latter win.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            config = Some(iter.next().ok_or_else(|| usage("--config needs a path"))?);
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(path.to_owned());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let extra = parse_config_file(Path::new(&path))?;
    let position = rest
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map(|i| i + 1)
        .unwrap_or(rest.len());
    rest.splice(position..position, extra);
    Ok(rest)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = expand_config(args).and_then(|args| match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli, stdout, stderr),
        Err(e) => {
            let _ = write!(stderr, "{e}");
            Ok(e.exit_code())
        }
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Eval(a) => cmd_eval(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
        Command::Converge(a) => cmd_converge(a, stdout, stderr),
        Command::Bounds(a) => cmd_bounds(a, stdout, stderr),
        Command::Catalog(a) => cmd_catalog(a, stdout),
    }
}

fn build_operator(degree: &DegreeArgs, shape: &ShapeArgs) -> Result<BivariateOperator, Error> {
    let axis1 = AxisConfig::new(
        degree.n1,
        shape.l1,
        PqPair::new(degree.p1, degree.q1)?,
        shape.alpha1,
        shape.beta1,
    )?;
    let axis2 = AxisConfig::new(
        degree.n2,
        shape.l2,
        PqPair::new(degree.p2, degree.q2)?,
        shape.alpha2,
        shape.beta2,
    )?;
    Ok(BivariateOperator::new(axis1, axis2).with_node_exponent(shape.node_exponent))
}

fn operator_columns(op: &BivariateOperator) -> Vec<String> {
    let mut out = Vec::with_capacity(13);
    for axis in [&op.axis1, &op.axis2] {
        out.push(axis.n().to_string());
        out.push(axis.l().to_string());
        out.push(fmt_num(axis.pq().p()));
        out.push(fmt_num(axis.pq().q()));
        out.push(fmt_num(axis.alpha()));
        out.push(fmt_num(axis.beta()));
    }
    out.push(op.axis1.node_exponent().to_string());
    out
}

const OPERATOR_HEADER: [&str; 13] = [
    "n1", "l1", "p1", "q1", "alpha1", "beta1", "n2", "l2", "p2", "q2", "alpha2", "beta2", "node_exponent",
];

fn write_table<T: Serialize>(
    out: &OutputArgs,
    stem: &str,
    hash: &str,
    json: &T,
    header: &[&str],
    rows: &[Vec<String>],
    stdout: &mut dyn Write,
) -> Result<Option<PathBuf>, Failure> {
    let content = match out.format {
        OutputFormat::Json => to_sorted_json(json)?,
        OutputFormat::Csv => to_csv(header, rows)?,
    };
    let target = resolve_output(out.output.as_deref(), stem, hash, out.format);
    emit(&content, target.as_deref(), stdout)?;
    Ok(target)
}

#[derive(Serialize)]
struct EvalOutput {
    config: BivariateOperator,
    function: String,
    point: (f64, f64),
    value: f64,
    oracle: Option<f64>,
    absdiff: Option<f64>,
}

fn cmd_eval(args: EvalArgs, stdout: &mut dyn Write) -> CmdResult {
    let op = build_operator(&args.degree, &args.shape)?;
    let f = TestFunction::by_name(&args.function)?;
    let value = op.apply(|a, b| f.eval(a, b), args.x1, args.x2)?;
    let oracle = if args.oracle {
        Some(moment_oracle(&op, |a, b| f.eval(a, b), args.x1, args.x2)?)
    } else {
        None
    };
    let absdiff = oracle.map(|o| (o - value).abs());
    writeln!(stdout, "value\t{}", fmt_num(value))?;
    if let (Some(o), Some(d)) = (oracle, absdiff) {
        writeln!(stdout, "oracle\t{}", fmt_num(o))?;
        writeln!(stdout, "absdiff\t{}", fmt_num(d))?;
    }
    if let Some(path) = &args.out.output {
        let record = EvalOutput {
            config: op,
            function: f.name().to_owned(),
            point: (args.x1, args.x2),
            value,
            oracle,
            absdiff,
        };
        let content = match args.out.format {
            OutputFormat::Json => to_sorted_json(&record)?,
            OutputFormat::Csv => {
                let mut header: Vec<&str> = OPERATOR_HEADER.to_vec();
                header.extend(["function", "x1", "x2", "value", "oracle", "absdiff"]);
                let mut row = operator_columns(&op);
                row.extend([
                    record.function.clone(),
                    fmt_num(args.x1),
                    fmt_num(args.x2),
                    fmt_num(value),
                    fmt_opt(oracle),
                    fmt_opt(absdiff),
                ]);
                to_csv(&header, &[row])?
            }
        };
        let target = resolve_output(Some(path), "eval", &config_hash(&record.config), args.out.format);
        emit(&content, target.as_deref(), stdout)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    if !(args.tolerance >= 0.0) {
        return Err(usage(format!("tolerance {} must be ≥ 0", args.tolerance)));
    }
    let sweep = MomentSweep {
        points_per_axis: args.grid,
        ..MomentSweep::default()
    };
    let operators: Vec<BivariateOperator> = if args.single {
        vec![build_operator(&args.degree, &args.shape)?]
    } else {
        sweep
            .operators()?
            .into_iter()
            .map(|op| op.with_node_exponent(args.shape.node_exponent))
            .collect()
    };
    let reports = sweep.run(&operators)?;

    let mut offenders = Vec::new();
    let mut worst: f64 = 0.0;
    let mut entries = 0usize;
    for report in &reports {
        entries += report.entries.len();
        if let Some(w) = report.worst() {
            worst = worst.max(w.scaled_diff());
        }
        for e in report.offenders(args.tolerance) {
            offenders.push((report, e));
        }
    }

    if args.out.output.is_some() {
        let mut header: Vec<&str> = OPERATOR_HEADER.to_vec();
        header.extend(["x1", "x2", "entry", "closed", "oracle", "absdiff"]);
        let rows: Vec<Vec<String>> = reports
            .iter()
            .flat_map(|r| {
                r.entries.iter().map(move |e| {
                    let mut row = operator_columns(&r.params);
                    row.extend([
                        fmt_num(r.point.0),
                        fmt_num(r.point.1),
                        e.name.clone(),
                        fmt_num(e.closed),
                        fmt_num(e.oracle),
                        fmt_num(e.absdiff),
                    ]);
                    row
                })
            })
            .collect();
        let hash = config_hash(&(&operators, args.grid));
        write_table(&args.out, "verify", &hash, &reports, &header, &rows, stdout)?;
    }

    writeln!(
        stdout,
        "checked {entries} entries over {} configurations; worst scaled difference {}; tolerance {}",
        operators.len(),
        fmt_num(worst),
        fmt_num(args.tolerance)
    )?;
    if offenders.is_empty() {
        writeln!(stdout, "all closed forms match the oracle")?;
        return Ok(EXIT_OK);
    }

    writeln!(stderr, "{} entries exceed tolerance", offenders.len())?;
    for (report, e) in offenders.iter().take(20) {
        let a = &report.params.axis1;
        writeln!(
            stderr,
            "  n={} l={} p={} q={} alpha={} beta={} x=({}, {}) {}: closed {} oracle {}",
            a.n(),
            a.l(),
            a.pq().p(),
            a.pq().q(),
            a.alpha(),
            a.beta(),
            report.point.0,
            report.point.1,
            e.name,
            fmt_num(e.closed),
            fmt_num(e.oracle)
        )?;
    }
    if args.shape.node_exponent == NodeExponent::PaperLiteral {
        report_literal_factor(&offenders, stderr)?;
    }
    Ok(EXIT_VERIFY_FAILED)
}

fn report_literal_factor(
    offenders: &[(&MomentReport, &crate::moments::MomentEntry)],
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let first = offenders
        .iter()
        .find(|(r, e)| e.name == "e10" && r.point.0 > 0.0 && r.params.axis1.l() > 0);
    if let Some((report, _)) = first {
        let axis = &report.params.axis1;
        if let Some(ratio) = first_moment_ratio(&report.params, 1, report.point.0)? {
            writeln!(
                stderr,
                "first-moment mismatch factor {} (p^l = {}) at n={} l={} p={}",
                fmt_num(ratio),
                fmt_num(axis.pq().p().powi(axis.l() as i32)),
                axis.n(),
                axis.l(),
                axis.pq().p()
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergeConfig {
    sequence: SequenceSpec,
    fixed: FixedParams,
    n_list: Vec<u32>,
    grid: usize,
    function: Option<String>,
}

#[derive(Serialize)]
struct ConvergeOutput<'a> {
    config: &'a ConvergeConfig,
    korovkin: &'a [KorovkinRow],
    convergence: Option<&'a [ConvergenceRow]>,
    orders: &'a BTreeMap<String, Option<Order>>,
    function_order: Option<Order>,
}

fn parse_n_list(raw: &str) -> Result<Vec<u32>, Failure> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("invalid n-list entry `{s}`")))
        })
        .collect()
}

fn parse_table(path: &Path) -> Result<BTreeMap<u32, (f64, f64)>, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read table {}: {e}", path.display())))?;
    let mut table = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let bad = || usage(format!("{}:{}: expected `n p q`", path.display(), lineno + 1));
        if fields.len() != 3 {
            return Err(bad());
        }
        let n = fields[0].parse::<u32>().map_err(|_| bad())?;
        let p = fields[1].parse::<f64>().map_err(|_| bad())?;
        let q = fields[2].parse::<f64>().map_err(|_| bad())?;
        table.insert(n, (p, q));
    }
    Ok(table)
}

fn sequence_from_args(args: &ConvergeArgs) -> Result<SequenceSpec, Failure> {
    match args.family.as_str() {
        "one-minus-c-over-n" => {
            let family = Family::OneMinusCOverN {
                c_p: args.cp,
                c_q: args.cq,
            };
            let a = args.a.unwrap_or((-args.cp).exp());
            let b = args.b.unwrap_or((-args.cq).exp());
            Ok(SequenceSpec::new(family, a, b)?)
        }
        "tabulated" => {
            let path = args
                .table
                .as_deref()
                .ok_or_else(|| usage("invalid sequence family: tabulated family requires --table"))?;
            let (Some(a), Some(b)) = (args.a, args.b) else {
                return Err(usage(
                    "invalid sequence family: tabulated family requires declared limits --a and --b",
                ));
            };
            Ok(SequenceSpec::new(
                Family::Tabulated {
                    table: parse_table(path)?,
                },
                a,
                b,
            )?)
        }
        other => Err(usage(format!(
            "invalid sequence family: unknown family `{other}` (expected one-minus-c-over-n or tabulated)"
        ))),
    }
}

fn cmd_converge(args: ConvergeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let sequence = sequence_from_args(&args)?;
    let n_list = parse_n_list(&args.n_list)?;
    let shape = &args.shape;
    let fixed = FixedParams {
        l1: shape.l1,
        l2: shape.l2,
        alpha1: shape.alpha1,
        beta1: shape.beta1,
        alpha2: shape.alpha2,
        beta2: shape.beta2,
        node_exponent: shape.node_exponent,
    };
    let function = args.function.as_deref().map(TestFunction::by_name).transpose()?;
    // validate every (n, p_n, q_n) before running
    for &n in &n_list {
        fixed.operator(n, sequence.pq_at(n)?)?;
    }

    let korovkin = korovkin_suite(&sequence, &fixed, &n_list, args.grid)?;
    let convergence = function
        .as_ref()
        .map(|f| convergence_table(&sequence, &fixed, f, &n_list, args.grid))
        .transpose()?;
    let orders = korovkin_orders(&korovkin);
    let function_order = convergence.as_ref().and_then(|rows| {
        crate::convergence::empirical_order(&rows.iter().map(|r| (r.n, r.sup_error)).collect::<Vec<_>>()).ok()
    });

    let config = ConvergeConfig {
        sequence,
        fixed,
        n_list,
        grid: args.grid,
        function: function.as_ref().map(|f| f.name().to_owned()),
    };
    let hash = config_hash(&config);

    let mut header = vec!["n", "p_n", "q_n", "e00", "e10", "e01", "e20+e02"];
    if convergence.is_some() {
        header.extend(["f_sup_error", "f_worst_x1", "f_worst_x2", "f_bound", "f_ratio"]);
    }
    let rows: Vec<Vec<String>> = korovkin
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = vec![
                r.n.to_string(),
                fmt_num(r.p_n),
                fmt_num(r.q_n),
                fmt_num(r.e00),
                fmt_num(r.e10),
                fmt_num(r.e01),
                fmt_num(r.e20_e02),
            ];
            if let Some(c) = convergence.as_ref().map(|rows| &rows[i]) {
                row.extend([
                    fmt_num(c.sup_error),
                    fmt_num(c.worst_point.0),
                    fmt_num(c.worst_point.1),
                    fmt_opt(c.bound),
                    fmt_opt(c.ratio),
                ]);
            }
            row
        })
        .collect();
    let json = ConvergeOutput {
        config: &config,
        korovkin: &korovkin,
        convergence: convergence.as_deref(),
        orders: &orders,
        function_order,
    };
    let target = write_table(&args.out, "converge", &hash, &json, &header, &rows, stdout)?;

    let summary: &mut dyn Write = if target.is_some() { stdout } else { stderr };
    if let Some(path) = &target {
        writeln!(summary, "wrote {}", path.display())?;
    }
    for (name, order) in &orders {
        let largest = korovkin.iter().map(|r| r.column(name)).fold(0.0, f64::max);
        let note = if largest > 0.0 && largest <= ROUNDING_LEVEL {
            " (errors at rounding level)"
        } else {
            ""
        };
        writeln!(summary, "empirical order {name}: {}{note}", describe_order(order))?;
    }
    if let Some(f) = &config.function {
        writeln!(summary, "empirical order {f}: {}", describe_order(&function_order))?;
    }
    Ok(EXIT_OK)
}

const ROUNDING_LEVEL: f64 = 1e-12;

fn describe_order(order: &Option<Order>) -> String {
    match order {
        Some(Order::Slope(s)) => format!("{s:.4}"),
        Some(Order::Exact) => "exact (all errors zero)".into(),
        None => "undetermined".into(),
    }
}

#[derive(Serialize)]
struct BoundsOutput<'a, T: Serialize> {
    config: &'a BivariateOperator,
    function: &'a str,
    kind: &'a str,
    rows: &'a [T],
}

fn bound_rows(hash: &str, rows: &[BoundReport]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                hash.to_owned(),
                fmt_num(r.x1),
                fmt_num(r.x2),
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                r.holds.to_string(),
            ]
        })
        .collect()
}

fn cmd_bounds(args: BoundsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let op = build_operator(&args.degree, &args.shape)?;
    let f = TestFunction::by_name(&args.function)?;
    let hash = config_hash(&(&op, &args.function, &args.kind));
    let header = ["config", "x1", "x2", "lhs", "rhs", "holds"];
    let rows: Vec<BoundReport> = match args.kind.as_str() {
        "modulus" => modulus_bound_grid(&op, &f, args.grid)?,
        "lipschitz" => {
            let form = match args.lip_form.as_str() {
                "product" => LipschitzForm::Product,
                "additive-experimental" => LipschitzForm::AdditiveExperimental,
                other => return Err(usage(format!("unknown Lipschitz form `{other}`"))),
            };
            let spec = LipschitzSpec::new(args.lip_m, args.gamma1, args.gamma2)?.with_form(form);
            let (a, b) = op.domain();
            if let Some(v) = spec.find_violation(&f, Rect::new(a, b), args.membership_grid)? {
                writeln!(
                    stderr,
                    "`{}` is not in the Lipschitz class: |f(t)-f(x)| = {} > {} at t=({}, {}), x=({}, {})",
                    f.name(),
                    fmt_num(v.lhs),
                    fmt_num(v.rhs),
                    v.t.0,
                    v.t.1,
                    v.x.0,
                    v.x.1
                )?;
                return Ok(EXIT_VERIFY_FAILED);
            }
            bound_lipschitz_grid(&op, &f, &spec, args.grid, args.membership_grid)?
        }
        "k-functional" => {
            let candidates: Vec<TestFunction> = args
                .candidates
                .split(',')
                .map(|s| TestFunction::by_name(s.trim()))
                .collect::<Result<_, _>>()?;
            let xs = uniform_grid(0.0, 1.0, args.kf_points)?;
            let mut reports = Vec::new();
            for &x1 in &xs {
                for &x2 in &xs {
                    reports.push(k_functional_report(&op, &f, &candidates, x1, x2, args.modulus_grid)?);
                }
            }
            let header = [
                "config", "x1", "x2", "lhs", "spread", "k_upper", "omega_literal", "omega_deviation",
                "first_stage_rhs", "omega2", "norm_term", "implied_m1",
            ];
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        hash.clone(),
                        fmt_num(r.x1),
                        fmt_num(r.x2),
                        fmt_num(r.lhs),
                        fmt_num(r.spread),
                        fmt_num(r.k_upper),
                        fmt_num(r.omega_literal.value),
                        fmt_num(r.omega_deviation.value),
                        fmt_num(r.first_stage_rhs),
                        fmt_num(r.omega2.value),
                        fmt_opt(r.norm_term),
                        fmt_opt(r.implied_m1),
                    ]
                })
                .collect();
            let json = BoundsOutput {
                config: &op,
                function: f.name(),
                kind: "k-functional",
                rows: &reports,
            };
            write_table(&args.out, "bounds", &hash, &json, &header, &rows, stdout)?;
            writeln!(
                stderr,
                "K-functional quantities reported; the constants M, M1 are unknown, nothing asserted"
            )?;
            return Ok(EXIT_OK);
        }
        other => {
            return Err(usage(format!(
                "unknown bound kind `{other}` (expected modulus, lipschitz or k-functional)"
            )))
        }
    };

    let json = BoundsOutput {
        config: &op,
        function: f.name(),
        kind: &args.kind,
        rows: &rows,
    };
    write_table(
        &args.out,
        "bounds",
        &hash,
        &json,
        &header,
        &bound_rows(&hash, &rows),
        stdout,
    )?;
    let violations = rows.iter().filter(|r| !r.holds).count();
    writeln!(stderr, "{} points, {violations} violations", rows.len())?;
    Ok(if violations == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_catalog(args: CatalogArgs, stdout: &mut dyn Write) -> CmdResult {
    let rect = Rect::new(f64::from(args.l1) + 1.0, f64::from(args.l2) + 1.0);
    let entries: Vec<CatalogEntry> = TestFunction::catalog()
        .iter()
        .map(|f| CatalogEntry::describe(f, rect))
        .collect();
    let header = [
        "name",
        "formula",
        "exact_total_modulus",
        "exact_euclidean_modulus",
        "lipschitz1",
        "lipschitz2",
        "partials",
        "sup_norm",
        "cb2_norm",
    ];
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.name.clone(),
                e.formula.clone(),
                e.exact_total_modulus.to_string(),
                e.exact_euclidean_modulus.to_string(),
                fmt_opt(e.lipschitz.map(|l| l.0)),
                fmt_opt(e.lipschitz.map(|l| l.1)),
                e.partials.to_string(),
                fmt_opt(e.sup_norm),
                fmt_opt(e.cb2_norm),
            ]
        })
        .collect();
    write_table(
        &args.out,
        "catalog",
        &config_hash(&rect),
        &entries,
        &header,
        &rows,
        stdout,
    )?;
    Ok(EXIT_OK)
}
