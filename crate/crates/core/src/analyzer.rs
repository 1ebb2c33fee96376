//! Target selection and chain assembly.
//!
//! Targets are tried from most to least specific (LP, QP, cone); the first
//! whose complete chain accepts the problem wins. Analysis itself only
//! contributes objective flipping and, if enabled, presolve; everything
//! after that belongs to the back end.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::cone::ConeCanonicalization;
use crate::dcp::{check_dcp, DcpReport};
use crate::error::{ReductionError, SolverError};
use crate::expr::{Problem, Sense};
use crate::qp::{LpCanonicalization, QpCanonicalization};
use crate::reduction::{Chain, InverseRecord, Reduction, Solution, Stage, Status};
use crate::reductions::{FlipObjective, PresolveFixedPoint, DEFAULT_PRESOLVE_ROUNDS};
use crate::solvers::{solve_cone_admm, solve_lp_admm, solve_lp_simplex, solve_qp_admm, SolverSettings};
use crate::standard::RawSolution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetClass {
    Lp,
    Qp,
    Cone,
}

impl TargetClass {
    /// In order of decreasing specificity.
    pub const ALL: [TargetClass; 3] = [TargetClass::Lp, TargetClass::Qp, TargetClass::Cone];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetClass::Lp => "LP",
            TargetClass::Qp => "QP",
            TargetClass::Cone => "CONE",
        }
    }

    /// Lower-case tag used in emitted documents.
    pub fn tag(self) -> &'static str {
        match self {
            TargetClass::Lp => "lp",
            TargetClass::Qp => "qp",
            TargetClass::Cone => "cone",
        }
    }

    fn backend(self, decompose_soc: bool) -> Box<dyn Reduction> {
        match self {
            TargetClass::Lp => Box::new(LpCanonicalization),
            TargetClass::Qp => Box::new(QpCanonicalization),
            TargetClass::Cone => Box::new(ConeCanonicalization::new(decompose_soc)),
        }
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lp" => Ok(TargetClass::Lp),
            "qp" => Ok(TargetClass::Qp),
            "cone" | "socp" => Ok(TargetClass::Cone),
            _ => Err(format!("unknown target `{s}` (expected lp, qp or cone)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Simplex for LP data, splitting otherwise.
    #[default]
    Auto,
    Simplex,
    Admm,
}

impl FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(SolverChoice::Auto),
            "simplex" => Ok(SolverChoice::Simplex),
            "admm" => Ok(SolverChoice::Admm),
            _ => Err(format!("unknown solver `{s}` (expected simplex or admm)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzerConfig {
    pub enabled: Vec<TargetClass>,
    pub forced: Option<TargetClass>,
    pub presolve: bool,
    pub presolve_rounds: usize,
    pub decompose_soc: bool,
    pub solver: SolverChoice,
    pub settings: SolverSettings,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            enabled: TargetClass::ALL.to_vec(),
            forced: None,
            presolve: false,
            presolve_rounds: DEFAULT_PRESOLVE_ROUNDS,
            decompose_soc: false,
            solver: SolverChoice::Auto,
            settings: SolverSettings::default(),
        }
    }
}

impl AnalyzerConfig {
    pub fn forced(target: TargetClass) -> Self {
        AnalyzerConfig { forced: Some(target), ..AnalyzerConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Accepted,
    Rejected(String),
    NotTried,
    Disabled,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accepted => f.write_str("accepted"),
            Verdict::Rejected(r) => write!(f, "rejected: {r}"),
            Verdict::NotTried => f.write_str("not tried"),
            Verdict::Disabled => f.write_str("disabled"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    pub dcp: DcpReport,
    pub target: Option<TargetClass>,
    /// Set exactly when `target` is `None`.
    pub failure: Option<String>,
    /// Leaf reduction names of the winning chain.
    pub chain: Vec<String>,
    pub verdicts: Vec<(TargetClass, Verdict)>,
}

impl AnalysisReport {
    pub fn verdict(&self, class: TargetClass) -> &Verdict {
        self.verdicts.iter().find(|(c, _)| *c == class).map(|(_, v)| v).unwrap_or(&Verdict::Disabled)
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dcp: {}", if self.dcp.is_dcp() { "yes" } else { "no" })?;
        for v in &self.dcp.violations {
            writeln!(f, "  violation at {v}")?;
        }
        match (self.target, &self.failure) {
            (Some(t), _) => writeln!(f, "target: {t}")?,
            (None, Some(reason)) => writeln!(f, "target: none ({reason})")?,
            (None, None) => writeln!(f, "target: none")?,
        }
        if !self.chain.is_empty() {
            writeln!(f, "chain: {}", self.chain.join(" -> "))?;
        }
        for (c, v) in &self.verdicts {
            writeln!(f, "  {c}: {v}")?;
        }
        Ok(())
    }
}

fn rejection_text(e: &ReductionError) -> String {
    match e {
        ReductionError::NotAccepted { reduction, reason: Some(r), .. } => format!("{reduction}: {r}"),
        other => other.to_string(),
    }
}

/// `[flip_objective] + [presolve] + backend`.
pub fn build_chain(problem: &Problem, target: TargetClass, config: &AnalyzerConfig) -> Chain {
    let mut members: Vec<Box<dyn Reduction>> = Vec::new();
    if problem.sense() == Sense::Maximize {
        members.push(Box::new(FlipObjective));
    }
    if config.presolve {
        members.push(Box::new(PresolveFixedPoint { max_rounds: config.presolve_rounds }));
    }
    members.push(target.backend(config.decompose_soc));
    Chain::new(format!("{}_chain", target.tag()), members)
}

fn chain_steps(chain: &Chain) -> Vec<String> {
    chain.members().iter().flat_map(|m| m.steps()).collect()
}

pub fn select_target(problem: &Problem, config: &AnalyzerConfig) -> AnalysisReport {
    let dcp = check_dcp(problem);
    let mut verdicts = Vec::new();
    let mut target = None;
    let mut chain = Vec::new();
    for class in TargetClass::ALL {
        let tried = match config.forced {
            Some(f) => f == class,
            None => config.enabled.contains(&class),
        };
        if !tried {
            verdicts.push((class, Verdict::Disabled));
            continue;
        }
        if target.is_some() {
            verdicts.push((class, Verdict::NotTried));
            continue;
        }
        let c = build_chain(problem, class, config);
        match c.check(&Stage::Problem(problem.clone())) {
            Ok(()) => {
                target = Some(class);
                chain = chain_steps(&c);
                verdicts.push((class, Verdict::Accepted));
            }
            Err(e) => verdicts.push((class, Verdict::Rejected(rejection_text(&e)))),
        }
    }
    let failure = match target {
        Some(_) => None,
        None if !dcp.is_dcp() => Some(format!(
            "problem is not DCP: {}",
            dcp.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        )),
        None if verdicts.iter().all(|(_, v)| *v == Verdict::Disabled) => Some("no target class enabled".to_string()),
        None => Some("no enabled target accepts the problem".to_string()),
    };
    AnalysisReport { dcp, target, failure, chain, verdicts }
}

/// A problem pushed through a complete chain.
pub struct Canonicalized {
    pub target: TargetClass,
    pub chain: Chain,
    pub steps: Vec<String>,
    pub data: Stage,
    pub records: Vec<InverseRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("no target: {0}")]
    NoTarget(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Applies the chain for `target`, or for the analyzer's choice when
/// `target` is `None`.
pub fn canonicalize(
    problem: &Problem,
    target: Option<TargetClass>,
    config: &AnalyzerConfig,
) -> Result<Canonicalized, PipelineError> {
    let target = match target.or(config.forced) {
        Some(t) => t,
        None => {
            let report = select_target(problem, config);
            report.target.ok_or_else(|| PipelineError::NoTarget(report.failure.unwrap_or_default()))?
        }
    };
    let chain = build_chain(problem, target, config);
    let (data, records) = chain.apply_all(&Stage::Problem(problem.clone()))?;
    let steps = chain_steps(&chain);
    Ok(Canonicalized { target, chain, steps, data, records })
}

/// Runs the configured solver on standard-form data.
pub fn solve_stage(data: &Stage, solver: SolverChoice, settings: &SolverSettings) -> Result<Solution, SolverError> {
    let unsupported = |what: &str| SolverError::Unsupported { solver: "simplex", what: what.to_string() };
    match data {
        Stage::Lp(lp) => {
            let raw = match solver {
                SolverChoice::Auto | SolverChoice::Simplex => solve_lp_simplex(lp, settings)?,
                SolverChoice::Admm => solve_lp_admm(lp, settings)?,
            };
            Ok(lp.to_solution(&raw))
        }
        Stage::Qp(qp) => {
            let raw: RawSolution = match (solver, qp.to_lp()) {
                (SolverChoice::Simplex, Some(lp)) => solve_lp_simplex(&lp, settings)?,
                (SolverChoice::Simplex, None) => return Err(unsupported("quadratic objectives")),
                _ => solve_qp_admm(qp, settings)?,
            };
            Ok(qp.to_solution(&raw))
        }
        Stage::Cone(cone) => {
            if solver == SolverChoice::Simplex {
                return Err(unsupported("cone programs"));
            }
            Ok(cone.to_solution(&solve_cone_admm(cone, settings)?))
        }
        other => Err(SolverError::Unsupported { solver: "any", what: format!("{} input", other.kind()) }),
    }
}

/// A solution of the original problem, with values keyed by name.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub target: TargetClass,
    pub solution: Solution,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl SolveOutcome {
    pub fn status(&self) -> Status {
        self.solution.status
    }

    pub fn value(&self) -> f64 {
        self.solution.value
    }

    /// First component of the named variable.
    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.values.get(name).and_then(|v| v.first().copied())
    }
}

/// Canonicalize, solve, and retrieve.
pub fn solve(
    problem: &Problem,
    target: Option<TargetClass>,
    config: &AnalyzerConfig,
) -> Result<SolveOutcome, PipelineError> {
    let canon = canonicalize(problem, target, config)?;
    let raw = solve_stage(&canon.data, config.solver, &config.settings)?;
    let solution = canon.chain.retrieve_all(&raw, &canon.records)?;
    let values = problem
        .variables()
        .iter()
        .filter_map(|v| solution.primal.get(&v.id).map(|x| (v.name.clone(), x.clone())))
        .collect();
    Ok(SolveOutcome { target: canon.target, solution, values })
}
