//! `cvxrw analyze | canonicalize | solve FILE`.
//!
//! Exit codes: 0 success (optimal for `solve`), 1 parse or I/O error,
//! 2 problem is not DCP, 3 target rejected the problem, 4 infeasible,
//! 5 unbounded, 6 iteration limit, 7 solver error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use cvxrw::analyzer::{self, AnalysisReport, AnalyzerConfig, PipelineError, SolverChoice, TargetClass, Verdict};
use cvxrw::emit::{EmitDocument, StandardForm};
use cvxrw::solvers::SolverSettings;
use cvxrw::{parse_problem, Problem, Status};

const EXIT_PARSE: u8 = 1;
const EXIT_NOT_DCP: u8 = 2;
const EXIT_REJECTED: u8 = 3;
const EXIT_ERROR: u8 = 7;

#[derive(Parser)]
#[command(name = "cvxrw", version, about = "Analyze, canonicalize and solve convex problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check DCP rules and pick the most specific target.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        chain: ChainFlags,
        #[arg(long)]
        json: bool,
    },
    /// Emit standard-form data as JSON.
    Canonicalize {
        file: PathBuf,
        #[command(flatten)]
        chain: ChainFlags,
        /// Write the document here instead of stdout.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Canonicalize, solve and map the solution back.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        chain: ChainFlags,
        #[command(flatten)]
        solver: SolverFlags,
        /// Accepted for symmetry; output is always JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct ChainFlags {
    /// auto, lp, qp or cone.
    #[arg(long, default_value = "auto")]
    target: String,
    #[arg(long)]
    presolve: bool,
    #[arg(long)]
    decompose_soc: bool,
}

#[derive(Args)]
struct SolverFlags {
    /// simplex or admm; defaults to simplex for LPs.
    #[arg(long, default_value = "auto")]
    solver: String,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    eps_abs: Option<f64>,
    #[arg(long)]
    eps_rel: Option<f64>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load(path: &Path) -> Result<Problem, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| fail(EXIT_PARSE, format!("{}:{e}", path.display())))
}

fn config(flags: &ChainFlags) -> Result<AnalyzerConfig, ExitCode> {
    let forced = match flags.target.as_str() {
        "auto" => None,
        t => Some(t.parse::<TargetClass>().map_err(|e| fail(EXIT_PARSE, e))?),
    };
    Ok(AnalyzerConfig {
        forced,
        presolve: flags.presolve,
        decompose_soc: flags.decompose_soc,
        ..AnalyzerConfig::default()
    })
}

fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn report_json(r: &AnalysisReport) -> Value {
    let violations: Vec<Value> = r
        .dcp
        .violations
        .iter()
        .map(|v| json!({ "location": v.location.to_string(), "path": v.path, "message": v.message }))
        .collect();
    let verdicts: Map<String, Value> = r
        .verdicts
        .iter()
        .map(|(c, v)| {
            let text = match v {
                Verdict::Accepted => "accepted".to_string(),
                Verdict::Rejected(reason) => format!("rejected: {reason}"),
                Verdict::NotTried => "not tried".to_string(),
                Verdict::Disabled => "disabled".to_string(),
            };
            (c.as_str().to_string(), json!(text))
        })
        .collect();
    json!({
        "dcp": r.dcp.is_dcp(),
        "violations": violations,
        "target": r.target.map(|t| t.as_str()),
        "failure": r.failure,
        "chain": r.chain,
        "classes": verdicts,
    })
}

fn pipeline_failure(e: PipelineError, problem: &Problem) -> ExitCode {
    match e {
        PipelineError::NoTarget(reason) => {
            let code = if cvxrw::dcp::is_dcp(problem) { EXIT_REJECTED } else { EXIT_NOT_DCP };
            fail(code, reason)
        }
        PipelineError::Reduction(r) => fail(EXIT_REJECTED, r),
        PipelineError::Solver(s) => fail(EXIT_ERROR, s),
    }
}

fn analyze(file: &Path, flags: &ChainFlags, as_json: bool) -> Result<ExitCode, ExitCode> {
    let problem = load(file)?;
    let report = analyzer::select_target(&problem, &config(flags)?);
    if as_json {
        println!("{}", serde_json::to_string_pretty(&report_json(&report)).expect("serializable"));
    } else {
        print!("{report}");
    }
    Ok(match report.target {
        Some(_) => ExitCode::SUCCESS,
        None if !report.dcp.is_dcp() => ExitCode::from(EXIT_NOT_DCP),
        None => ExitCode::from(EXIT_REJECTED),
    })
}

fn canonicalize(file: &Path, flags: &ChainFlags, emit: Option<&Path>) -> Result<ExitCode, ExitCode> {
    let problem = load(file)?;
    let config = config(flags)?;
    let canon = analyzer::canonicalize(&problem, None, &config).map_err(|e| pipeline_failure(e, &problem))?;
    let data =
        StandardForm::from_stage(&canon.data).ok_or_else(|| fail(EXIT_ERROR, "chain did not end in standard form"))?;
    let doc = EmitDocument::new(canon.steps, data).to_json();
    match emit {
        Some(path) => fs::write(path, doc).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(doc.as_bytes()).map_err(|e| fail(EXIT_PARSE, e))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn solve(file: &Path, flags: &ChainFlags, sf: &SolverFlags) -> Result<ExitCode, ExitCode> {
    let problem = load(file)?;
    let mut config = config(flags)?;
    config.solver = sf.solver.parse::<SolverChoice>().map_err(|e| fail(EXIT_PARSE, e))?;
    let defaults = SolverSettings::default();
    config.settings = SolverSettings {
        max_iter: sf.max_iters.unwrap_or(defaults.max_iter),
        eps_abs: sf.eps_abs.unwrap_or(defaults.eps_abs),
        eps_rel: sf.eps_rel.unwrap_or(defaults.eps_rel),
        ..defaults
    };
    let out = analyzer::solve(&problem, None, &config).map_err(|e| pipeline_failure(e, &problem))?;
    let mut vars = Map::new();
    for v in problem.variables() {
        if let Some(x) = out.values.get(&v.name) {
            let value = if x.len() == 1 { number(x[0]) } else { Value::Array(x.iter().map(|e| number(*e)).collect()) };
            vars.insert(v.name.clone(), value);
        }
    }
    let body = json!({
        "status": out.status().as_str(),
        "target": out.target.tag(),
        "value": number(out.value()),
        "variables": vars,
    });
    println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
    Ok(ExitCode::from(match out.status() {
        Status::Optimal => 0,
        Status::Infeasible => 4,
        Status::Unbounded => 5,
        Status::IterationLimit => 6,
        Status::Error => EXIT_ERROR,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { file, chain, json } => analyze(file, chain, *json),
        Command::Canonicalize { file, chain, emit } => canonicalize(file, chain, emit.as_deref()),
        Command::Solve { file, chain, solver, json: _ } => solve(file, chain, solver),
    };
    result.unwrap_or_else(|code| code)
}
