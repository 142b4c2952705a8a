//! Command-line driver: `compile`, `check` and `eval`.
//!
//! Exit codes: 0 success, 1 diagnostics, 2 usage error, 3 oracle limit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::backend::{emit_clp, emit_flat, lower_to_flat, ClpEmitOptions, FlatProgram};
use crate::diagnostics::{Diagnostic, SourceKind, Span};
use crate::frontend::{parse_bytes, parse_expression};
use crate::oracle::{compare_solutions, enumerate, Limits, OracleError};
use crate::passes::{fold_expression, run_pipeline, AlldiffMode, PassConfig, PassId};
use crate::pivot::{print_expr, print_pivot, Model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "pivotc", version, about = "Compile object-oriented constraint models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the pass pipeline and emit a target program.
    Compile(CompileArgs),
    /// Compare the solutions of a processed model with a reference lowering.
    Check(CheckArgs),
    /// Parse and fold a standalone expression.
    Eval {
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Clp,
    Flat,
    Pivot,
}

#[derive(clap::Args, Debug)]
struct Inputs {
    /// Model file.
    #[arg(short = 'm', long = "model")]
    model: PathBuf,
    /// Data file, read before the model.
    #[arg(short = 'd', long = "data")]
    data: Option<PathBuf>,
    /// Comma-separated pass list, run in order.
    #[arg(long, value_delimiter = ',')]
    passes: Option<Vec<PassId>>,
    #[arg(long, default_value_t = AlldiffMode::Disequalities)]
    alldiff: AlldiffMode,
}

#[derive(clap::Args, Debug)]
struct CompileArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_enum, default_value_t = Target::Clp)]
    target: Target,
    /// Run `loopUnroll` after the listed passes.
    #[arg(long)]
    unroll: bool,
    /// Omit the labeling goal from CLP output.
    #[arg(long)]
    no_label: bool,
    /// Output file; standard output when absent.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value_t = Limits::default().max_nodes)]
    max_nodes: u64,
    #[arg(long, default_value_t = Limits::default().max_solutions)]
    max_solutions: usize,
}

/// A failed run: exit code plus the messages to print.
struct Failure {
    code: i32,
    messages: Vec<String>,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            messages: vec![message.into()],
        }
    }
}

struct Files<'a> {
    model: &'a Path,
    data: Option<&'a Path>,
}

impl Files<'_> {
    fn render(&self, d: &Diagnostic) -> String {
        match (d.span.source, self.data) {
            (SourceKind::Data, Some(data)) => d.render(&data.display().to_string()),
            (SourceKind::Model, _) => d.render(&self.model.display().to_string()),
            _ => format!("{}: {}: {}", self.model.display(), d.severity, d.message),
        }
    }

    fn failure(&self, diags: &[Diagnostic]) -> Failure {
        let mut messages: Vec<String> = diags.iter().map(|d| self.render(d)).collect();
        if messages.is_empty() {
            messages.push(format!("{}: error: compilation failed", self.model.display()));
        }
        Failure {
            code: EXIT_DIAGNOSTICS,
            messages,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("{}: error: cannot read file: {}", path.display(), e)))
}

fn load(inputs: &Inputs) -> Result<Model, Failure> {
    let files = Files {
        model: &inputs.model,
        data: inputs.data.as_deref(),
    };
    let model = read(&inputs.model)?;
    let data = inputs.data.as_deref().map(read).transpose()?;
    parse_bytes(data.as_deref(), &model).map_err(|d| files.failure(&d))
}

fn pipeline(inputs: &Inputs, m: &Model, cfg: &PassConfig, err: &mut dyn Write) -> Result<Model, Failure> {
    let files = Files {
        model: &inputs.model,
        data: inputs.data.as_deref(),
    };
    match run_pipeline(m, cfg) {
        Ok((out, reports)) => {
            for r in reports {
                let _ = writeln!(err, "{}", r);
            }
            Ok(out)
        }
        Err(e) => {
            for r in &e.reports {
                let _ = writeln!(err, "{}", r);
            }
            Err(files.failure(&e.error.to_diagnostics()))
        }
    }
}

fn default_passes(target: Target) -> Vec<PassId> {
    let mut passes = vec![PassId::ObjectFlatten, PassId::EnumRemove, PassId::FoldConstants];
    if target == Target::Flat {
        passes.extend([PassId::AlldiffRewrite, PassId::LoopUnroll]);
    }
    passes
}

fn config(passes: Vec<PassId>, mode: AlldiffMode, unroll: bool) -> Result<PassConfig, Failure> {
    PassConfig::new(passes, mode, unroll).map_err(|e| Failure::new(EXIT_USAGE, format!("error: {}", e)))
}

fn lower(inputs: &Inputs, m: &Model) -> Result<FlatProgram, Failure> {
    let files = Files {
        model: &inputs.model,
        data: inputs.data.as_deref(),
    };
    lower_to_flat(m).map_err(|e| files.failure(&[e.to_diagnostic()]))
}

fn compile(args: &CompileArgs, err: &mut dyn Write) -> Result<String, Failure> {
    let inputs = &args.inputs;
    let passes = inputs.passes.clone().unwrap_or_else(|| default_passes(args.target));
    let cfg = config(passes, inputs.alldiff, args.unroll)?;
    if args.target == Target::Flat && !cfg.unrolls() {
        return Err(Failure::new(
            EXIT_USAGE,
            "error: the flat target requires loop unrolling (add --unroll or loopUnroll to --passes)",
        ));
    }
    let m = load(inputs)?;
    let m = pipeline(inputs, &m, &cfg, err)?;
    let files = Files {
        model: &inputs.model,
        data: inputs.data.as_deref(),
    };
    match args.target {
        Target::Clp => {
            let opts = ClpEmitOptions {
                predicate_name: None,
                labeling: !args.no_label,
            };
            emit_clp(&m, &opts).map_err(|e| files.failure(&[e.to_diagnostic()]))
        }
        Target::Flat => Ok(emit_flat(&lower(inputs, &m)?)),
        Target::Pivot => print_pivot(&m).map_err(|e| files.failure(&[Diagnostic::error(Span::generated(), e.to_string())])),
    }
}

/// Passes a flat lowering needs, appended when missing.
const FLAT_REQUIRED: [PassId; 4] = [PassId::ObjectFlatten, PassId::EnumRemove, PassId::AlldiffRewrite, PassId::LoopUnroll];

fn check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let inputs = &args.inputs;
    let baseline_cfg = config(FLAT_REQUIRED.to_vec(), AlldiffMode::Disequalities, false)?;
    let mut passes = inputs.passes.clone().unwrap_or_default();
    for p in FLAT_REQUIRED {
        if !passes.contains(&p) {
            passes.push(p);
        }
    }
    let candidate_cfg = config(passes, inputs.alldiff, false)?;
    let m = load(inputs)?;
    let _ = writeln!(err, "baseline:");
    let baseline = lower(inputs, &pipeline(inputs, &m, &baseline_cfg, err)?)?;
    let _ = writeln!(err, "candidate:");
    let candidate = lower(inputs, &pipeline(inputs, &m, &candidate_cfg, err)?)?;

    let limits = Limits {
        max_solutions: args.max_solutions,
        max_nodes: args.max_nodes,
    };
    let solve = |p: &FlatProgram| {
        enumerate(p, limits).map_err(|e| match e {
            OracleError::SearchSpaceTooLarge { .. } | OracleError::UniverseTooLarge { .. } => {
                Failure::new(EXIT_LIMIT, format!("error: {}", e))
            }
            other => Failure::new(EXIT_DIAGNOSTICS, format!("error: {}", other)),
        })
    };
    let a = solve(&candidate)?;
    let b = solve(&baseline)?;
    if !a.complete || !b.complete {
        return Err(Failure::new(EXIT_LIMIT, "error: oracle limit reached before the search finished"));
    }
    let cmp = compare_solutions(&a, &b, &b.variables).map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("error: {}", e)))?;
    let _ = writeln!(out, "{} baseline={} candidate={}", cmp, b.len(), a.project(&b.variables).map(|s| s.len()).unwrap_or(0));
    Ok(())
}

fn eval(text: &str) -> Result<String, Failure> {
    let render = |d: Diagnostic| Failure::new(EXIT_DIAGNOSTICS, d.render("<expr>"));
    let e = parse_expression(text).map_err(render)?;
    let folded = fold_expression(&e).map_err(|e| render(Diagnostic::error(e.span(), e.to_string())))?;
    print_expr(&folded).map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("<expr>: error: {}", e)))
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("{}: error: cannot write file: {}", p.display(), e))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("error: cannot write output: {}", e))),
    }
}

/// Runs the driver on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{}", text);
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let result = match &cli.command {
        Command::Compile(args) => compile(args, err).and_then(|text| write_output(args.output.as_deref(), &text, out)),
        Command::Check(args) => check(args, out, err),
        Command::Eval { expr } => eval(expr).and_then(|text| write_output(None, &format!("{}\n", text), out)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            for m in &f.messages {
                let _ = writeln!(err, "{}", m);
            }
            f.code
        }
    }
}
