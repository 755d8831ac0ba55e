//! End-to-end certification: guardedness, divergences of the syntactic
//! solution, solution checks, and a certificate recording all of them.
//!
//! A certificate is plain data: terms are stored as text, derived reports as
//! JSON values. [`replay`] re-runs every recorded premise against a model.

mod replay;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::divergence::{analyze_divergences, syntactic_criterion, Basis, DivergenceClass, DivergenceConfig};
use crate::equations::{check_guardedness, syntactic_solution, unfold, EquationError, EquationSystem, GuardReport};
use crate::equations::{GuardStatus, SyntacticSolution};
use crate::equiv::{decide, EquivResult, Relation, Verdict};
use crate::lts::{explore, StepError};
use crate::model::{CandidateSet, Env, Model};
use crate::term::Term;

pub use replay::{replay, ReplayItem, ReplayReport};

pub const SCHEMA: &str = "usol-cert/1";

pub const THM_DIVERGENCE_FREE: &str =
    "unique solution for weak bisimilarity: guarded system whose syntactic solution does not diverge";
pub const THM_INNOCUOUS: &str =
    "unique solution for weak bisimilarity: guarded system whose syntactic solution has only innocuous divergences";
pub const THM_TRACE: &str =
    "unique solution for trace equivalence: guarded system whose syntactic solution has only innocuous divergences";
pub const THM_MILNER: &str = "unique solution for weak bisimilarity: strongly guarded sequential system";
pub const THM_PREORDER_MAX: &str =
    "pre-equation X <= E: with guardedness and only innocuous divergences, every solution is below the syntactic solution";
pub const THM_PREORDER_MIN: &str = "pre-equation X >= E: the syntactic solution is below every solution";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// State bound for each exploration.
    pub max_states: usize,
    /// Deepest unfolding tried for guardedness and the syntactic criterion.
    pub max_unfold: usize,
    /// State bound for the cheap exploration run when the syntactic criterion
    /// already holds; a complete divergence-free result upgrades the route.
    pub probe_states: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { max_states: crate::lts::DEFAULT_MAX_STATES, max_unfold: 8, probe_states: 1_000 }
    }
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("no system named `{0}`")]
    UnknownSystem(String),
    #[error("no candidate set named `{0}`")]
    UnknownCandidates(String),
    #[error("candidate set `{candidates}` is declared for system `{declared}`, not `{system}`")]
    WrongSystem { candidates: String, declared: String, system: String },
    #[error("expected one or two candidate sets, got {0}")]
    CandidateCount(usize),
    #[error("relation {0} is not supported here: {1}")]
    Unsupported(Relation, &'static str),
    #[error("pre-equations need a single equation; system `{0}` has {1}")]
    NotSingleEquation(String, usize),
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Step(#[from] StepError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `X <= E`: solutions are below the syntactic solution.
    Max,
    /// `X >= E`: solutions are above the syntactic solution.
    Min,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Direction::Max),
            "min" => Ok(Direction::Min),
            other => Err(format!("unknown direction `{other}` (expected max or min)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GuardRoute {
    Syntactic,
    Unfolded { depth: usize },
    MilnerSequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceRoute {
    DivergenceFree,
    InnocuousOnly,
    SyntacticCriterion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardPremise {
    /// `None` when no unfolding up to `max_unfold` is guarded.
    pub route: Option<GuardRoute>,
    pub depth: Option<usize>,
    pub strongly_guarded: bool,
    pub sequential: bool,
    /// Strongly guarded and sequential: uniqueness for weak bisimilarity
    /// holds without looking at divergences.
    pub milner_applicable: bool,
    pub max_unfold: usize,
    /// The system the later premises are about: the input or its unfolding.
    pub analysed_system: String,
    pub analysed_equations: Vec<String>,
    /// Unguarded occurrences, listed when guardedness fails.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unguarded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergencePremise {
    pub route: Option<DivergenceRoute>,
    pub class: DivergenceClass,
    pub basis: Option<Basis>,
    pub criterion_satisfied: bool,
    /// State bound of the exploration behind `report`.
    pub max_states: usize,
    pub report: Value,
}

/// One decided pair of terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub lhs: String,
    pub rhs: String,
    pub relation: Relation,
    pub verdict: Verdict,
    pub lhs_states: usize,
    pub rhs_states: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    fn new(lhs: &Term, rhs: &Term, r: &EquivResult) -> Check {
        Check {
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            relation: r.relation,
            verdict: r.verdict,
            lhs_states: r.stats.lhs_states,
            rhs_states: r.stats.rhs_states,
            witness: r.witness.as_ref().map(ToString::to_string),
        }
    }
}

/// `P_i` against `E_i[P̃]` for one candidate tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCheck {
    pub candidates: String,
    pub equation: usize,
    pub variable: String,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub name: String,
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Premise {
    Guardedness,
    Divergence,
    Solution { candidates: String, equation: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CertVerdict {
    CertifiedEqual,
    CertifiedBelowSyntacticSolution,
    CertifiedAboveSyntacticSolution,
    Refused { premise: Premise, reason: String, witness: Value },
    Unknown { reason: String },
}

impl CertVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(
            self,
            CertVerdict::CertifiedEqual
                | CertVerdict::CertifiedBelowSyntacticSolution
                | CertVerdict::CertifiedAboveSyntacticSolution
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            CertVerdict::CertifiedEqual => "certified-equal",
            CertVerdict::CertifiedBelowSyntacticSolution => "certified-below-syntactic-solution",
            CertVerdict::CertifiedAboveSyntacticSolution => "certified-above-syntactic-solution",
            CertVerdict::Refused { .. } => "refused",
            CertVerdict::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conclusion {
    pub claim: String,
    pub theorem: String,
    /// The syntactic solution constants, which solve the system whenever it
    /// is guarded.
    pub syntactic_solution: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub system: String,
    pub equations: Vec<String>,
    pub relation: Relation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    pub config: CertifyConfig,
    pub candidates: Vec<CandidateRecord>,
    pub guard: GuardPremise,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergencePremise>,
    pub solution_checks: Vec<SolutionCheck>,
    /// Direct decisions of the certified claim, where the LTSs are finite
    /// within bounds. They validate the certificate and are not premises.
    pub cross_checks: Vec<Check>,
    pub verdict: CertVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<Conclusion>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialise")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Certificate> {
        serde_json::from_str(text)
    }
}

fn show_equations(s: &EquationSystem) -> Vec<String> {
    s.variables.iter().zip(&s.bodies).map(|(x, e)| format!("{x} = {e}")).collect()
}

fn record(c: &CandidateSet) -> CandidateRecord {
    CandidateRecord { name: c.name.clone(), terms: c.tuple.iter().map(ToString::to_string).collect() }
}

fn resolve<'m>(model: &'m Model, system: &str, names: &[&str]) -> Result<Vec<&'m CandidateSet>, CertifyError> {
    names
        .iter()
        .map(|n| {
            let c = model.candidate_set(n).ok_or_else(|| CertifyError::UnknownCandidates(n.to_string()))?;
            if c.system != system {
                return Err(CertifyError::WrongSystem {
                    candidates: c.name.clone(),
                    declared: c.system.clone(),
                    system: system.to_string(),
                });
            }
            Ok(c)
        })
        .collect()
}

/// The system later premises talk about, with its syntactic solution in scope.
pub(crate) struct Analysis {
    pub system: EquationSystem,
    pub solution: SyntacticSolution,
    pub env: Env,
}

pub(crate) fn analysis(s: &EquationSystem, depth: usize, env: &Env) -> Result<Analysis, CertifyError> {
    let system = if depth == 0 { s.clone() } else { unfold(s, depth) };
    let solution = syntactic_solution(&system, env)?;
    let env = env.extend(solution.defs.iter().cloned());
    Ok(Analysis { system, solution, env })
}

pub(crate) fn guard_premise(s: &EquationSystem, report: &GuardReport, analysed: &EquationSystem) -> GuardPremise {
    let route = report.depth.map(|d| if d == 0 { GuardRoute::Syntactic } else { GuardRoute::Unfolded { depth: d } });
    let unguarded = if report.guarded {
        Vec::new()
    } else {
        report
            .occurrences
            .iter()
            .filter(|o| o.status == GuardStatus::Unguarded)
            .map(|o| format!("{} in the equation for {}", o.variable, s.variables[o.equation]))
            .collect()
    };
    GuardPremise {
        route,
        depth: report.depth,
        strongly_guarded: report.strongly_guarded,
        sequential: report.sequential,
        milner_applicable: report.strongly_guarded && report.sequential,
        max_unfold: report.max_unfold,
        analysed_system: analysed.name.clone(),
        analysed_equations: show_equations(analysed),
        unguarded,
    }
}

/// Syntactic criterion first; when it holds, a small exploration may still
/// show the solution divergence-free. Otherwise the full analysis decides.
pub(crate) fn divergence_premise(a: &Analysis, config: &CertifyConfig) -> Result<DivergencePremise, CertifyError> {
    let criterion = syntactic_criterion(&a.system, &a.env, config.max_unfold);
    let bound = if criterion.satisfied { config.probe_states } else { config.max_states };
    let dconf = DivergenceConfig { max_states: bound, max_unfold: config.max_unfold };
    let mut report = analyze_divergences(&a.solution, &a.env, &dconf)?;
    if criterion.satisfied && report.criterion.is_none() {
        report.criterion = Some(criterion.clone());
    }
    let route = match (report.class, report.basis) {
        (DivergenceClass::DivergenceFree, _) => Some(DivergenceRoute::DivergenceFree),
        (DivergenceClass::AllInnocuous, Some(Basis::SyntacticCriterion)) => Some(DivergenceRoute::SyntacticCriterion),
        (DivergenceClass::AllInnocuous, _) => Some(DivergenceRoute::InnocuousOnly),
        _ => None,
    };
    Ok(DivergencePremise {
        route,
        class: report.class,
        basis: report.basis,
        criterion_satisfied: criterion.satisfied,
        max_states: bound,
        report: serde_json::to_value(&report).expect("reports serialise"),
    })
}

fn divergence_failure(d: &DivergencePremise) -> CertVerdict {
    let witness = d.report.get("witness").cloned().unwrap_or(Value::Null);
    CertVerdict::Refused {
        premise: Premise::Divergence,
        reason: "the syntactic solution has a non-innocuous divergence".to_string(),
        witness,
    }
}

fn guard_failure(g: &GuardPremise) -> CertVerdict {
    CertVerdict::Refused {
        premise: Premise::Guardedness,
        reason: format!("no unfolding up to depth {} is guarded", g.max_unfold),
        witness: serde_json::to_value(&g.unguarded).expect("strings serialise"),
    }
}

/// Runs `P_i` against `E_i[P̃]` for every equation; the first failing or
/// truncated check decides the verdict.
fn solution_checks(
    s: &EquationSystem,
    sets: &[&CandidateSet],
    relation: Relation,
    env: &Env,
    bound: usize,
) -> Result<(Vec<SolutionCheck>, Option<CertVerdict>), CertifyError> {
    let mut checks = Vec::new();
    let mut failed = None;
    let mut unknown = None;
    for c in sets {
        s.check_candidates(&c.tuple)?;
        let rhs = s.instantiate(&c.tuple)?;
        for (i, (p, e)) in c.tuple.iter().zip(&rhs).enumerate() {
            let r = decide(relation, p, e, env, bound)?;
            let check = SolutionCheck {
                candidates: c.name.clone(),
                equation: i,
                variable: s.variables[i].to_string(),
                check: Check::new(p, e, &r),
            };
            match r.verdict {
                Verdict::Fails if failed.is_none() => {
                    failed = Some(CertVerdict::Refused {
                        premise: Premise::Solution { candidates: c.name.clone(), equation: i },
                        reason: format!("{} is not a solution for {}", c.name, s.variables[i]),
                        witness: serde_json::to_value(&r.witness).expect("witnesses serialise"),
                    });
                }
                Verdict::UnknownTruncated if unknown.is_none() => {
                    unknown = Some(CertVerdict::Unknown {
                        reason: format!("solution check of {} for {} exceeded {bound} states", c.name, s.variables[i]),
                    });
                }
                _ => {}
            }
            checks.push(check);
        }
    }
    Ok((checks, failed.or(unknown)))
}

fn solution_names(sol: &SyntacticSolution) -> Vec<String> {
    sol.constants.iter().map(ToString::to_string).collect()
}

/// Certifies that the system has a unique solution and that the given
/// candidate tuples are solutions, hence equal: to each other if there are
/// two, to the syntactic solution if there is one.
pub fn certify_unique_solution(
    model: &Model,
    system: &str,
    candidates: &[&str],
    relation: Relation,
    config: &CertifyConfig,
) -> Result<Certificate, CertifyError> {
    if !matches!(relation, Relation::WeakBisim | Relation::TraceEq) {
        return Err(CertifyError::Unsupported(relation, "unique solutions are certified for bisim and trace-eq"));
    }
    let s = model.system(system).ok_or_else(|| CertifyError::UnknownSystem(system.to_string()))?;
    if candidates.is_empty() || candidates.len() > 2 {
        return Err(CertifyError::CandidateCount(candidates.len()));
    }
    let sets = resolve(model, system, candidates)?;
    for c in &sets {
        s.check_candidates(&c.tuple)?;
    }

    let report = check_guardedness(s, config.max_unfold);
    let depth = report.depth.unwrap_or(0);
    let a = analysis(s, depth, &model.env)?;
    let mut guard = guard_premise(s, &report, &a.system);
    let mut cert = Certificate {
        schema: SCHEMA.to_string(),
        system: s.name.clone(),
        equations: show_equations(s),
        relation,
        direction: None,
        config: *config,
        candidates: sets.iter().map(|c| record(c)).collect(),
        guard: guard.clone(),
        divergence: None,
        solution_checks: Vec::new(),
        cross_checks: Vec::new(),
        verdict: CertVerdict::Unknown { reason: String::new() },
        conclusion: None,
    };
    if !report.guarded {
        cert.verdict = guard_failure(&guard);
        return Ok(cert);
    }

    let d = divergence_premise(&a, config)?;
    let milner = guard.milner_applicable && relation == Relation::WeakBisim;
    let theorem = match (&d.route, relation) {
        (Some(_), Relation::TraceEq) => THM_TRACE,
        (Some(DivergenceRoute::DivergenceFree), _) => THM_DIVERGENCE_FREE,
        (Some(_), _) => THM_INNOCUOUS,
        (None, _) if d.class == DivergenceClass::NonInnocuous => {
            cert.verdict = divergence_failure(&d);
            cert.divergence = Some(d);
            return Ok(cert);
        }
        (None, _) if milner => {
            guard.route = Some(GuardRoute::MilnerSequential);
            cert.guard = guard.clone();
            THM_MILNER
        }
        (None, _) => {
            cert.verdict = CertVerdict::Unknown {
                reason: format!("divergences of the syntactic solution are unresolved within {} states", d.max_states),
            };
            cert.divergence = Some(d);
            return Ok(cert);
        }
    };
    cert.divergence = Some(d);

    let (checks, bad) = solution_checks(s, &sets, relation, &model.env, config.max_states)?;
    cert.solution_checks = checks;
    if let Some(v) = bad {
        cert.verdict = v;
        return Ok(cert);
    }

    let symbol = if relation == Relation::WeakBisim { "≈" } else { "≃tr" };
    let claim = match sets.as_slice() {
        [one] => format!("{} {symbol} {} componentwise", one.name, solution_names(&a.solution).join(", ")),
        [p, q] => {
            for (x, y) in p.tuple.iter().zip(&q.tuple) {
                let r = decide(relation, x, y, &model.env, config.max_states)?;
                if r.verdict != Verdict::UnknownTruncated {
                    cert.cross_checks.push(Check::new(x, y, &r));
                }
            }
            format!("{} {symbol} {} componentwise", p.name, q.name)
        }
        _ => unreachable!("one or two candidate sets"),
    };
    cert.verdict = CertVerdict::CertifiedEqual;
    cert.conclusion =
        Some(Conclusion { claim, theorem: theorem.to_string(), syntactic_solution: solution_names(&a.solution) });
    Ok(cert)
}

/// Certifies that a candidate of a single pre-equation lies below (`Max`)
/// or above (`Min`) the syntactic solution in the given preorder.
pub fn certify_preorder(
    model: &Model,
    system: &str,
    candidate: &str,
    direction: Direction,
    preorder: Relation,
    config: &CertifyConfig,
) -> Result<Certificate, CertifyError> {
    if !preorder.is_preorder() {
        return Err(CertifyError::Unsupported(preorder, "pre-equations are certified for sim and trace-incl"));
    }
    let s = model.system(system).ok_or_else(|| CertifyError::UnknownSystem(system.to_string()))?;
    if s.len() != 1 {
        return Err(CertifyError::NotSingleEquation(s.name.clone(), s.len()));
    }
    let sets = resolve(model, system, &[candidate])?;
    let c = sets[0];
    s.check_candidates(&c.tuple)?;

    // Even the min direction needs a guarded system: the syntactic solution
    // of an unguarded one has no transitions under the constant rule here.
    let report = check_guardedness(s, config.max_unfold);
    let depth = report.depth.unwrap_or(0);
    let a = analysis(s, depth, &model.env)?;
    let guard = guard_premise(s, &report, &a.system);
    let mut cert = Certificate {
        schema: SCHEMA.to_string(),
        system: s.name.clone(),
        equations: show_equations(s),
        relation: preorder,
        direction: Some(direction),
        config: *config,
        candidates: vec![record(c)],
        guard: guard.clone(),
        divergence: None,
        solution_checks: Vec::new(),
        cross_checks: Vec::new(),
        verdict: CertVerdict::Unknown { reason: String::new() },
        conclusion: None,
    };
    if !report.guarded {
        cert.verdict = guard_failure(&guard);
        return Ok(cert);
    }
    if direction == Direction::Max {
        let d = divergence_premise(&a, config)?;
        if d.route.is_none() {
            cert.verdict = if d.class == DivergenceClass::NonInnocuous {
                divergence_failure(&d)
            } else {
                CertVerdict::Unknown {
                    reason: format!(
                        "divergences of the syntactic solution are unresolved within {} states",
                        d.max_states
                    ),
                }
            };
            cert.divergence = Some(d);
            return Ok(cert);
        }
        cert.divergence = Some(d);
    }

    let p = &c.tuple[0];
    let e = &s.instantiate(&c.tuple)?[0];
    let (lhs, rhs) = match direction {
        Direction::Max => (p, e),
        Direction::Min => (e, p),
    };
    let r = decide(preorder, lhs, rhs, &model.env, config.max_states)?;
    cert.solution_checks.push(SolutionCheck {
        candidates: c.name.clone(),
        equation: 0,
        variable: s.variables[0].to_string(),
        check: Check::new(lhs, rhs, &r),
    });
    match r.verdict {
        Verdict::Fails => {
            cert.verdict = CertVerdict::Refused {
                premise: Premise::Solution { candidates: c.name.clone(), equation: 0 },
                reason: format!("{} does not satisfy the pre-equation", c.name),
                witness: serde_json::to_value(&r.witness).expect("witnesses serialise"),
            };
            return Ok(cert);
        }
        Verdict::UnknownTruncated => {
            cert.verdict =
                CertVerdict::Unknown { reason: format!("pre-equation check exceeded {} states", config.max_states) };
            return Ok(cert);
        }
        Verdict::Holds => {}
    }

    let k = a.solution.tuple().remove(0);
    let ksol = explore(&k, &a.env, config.max_states)?;
    if ksol.is_complete() {
        let (x, y) = match direction {
            Direction::Max => (p, &k),
            Direction::Min => (&k, p),
        };
        let r = decide(preorder, x, y, &a.env, config.max_states)?;
        if r.verdict != Verdict::UnknownTruncated {
            cert.cross_checks.push(Check::new(x, y, &r));
        }
    }
    let symbol = if preorder == Relation::WeakSim { "≤s" } else { "⊑tr" };
    let (claim, theorem, verdict) = match direction {
        Direction::Max => {
            (format!("{} {symbol} {k}", c.name), THM_PREORDER_MAX, CertVerdict::CertifiedBelowSyntacticSolution)
        }
        Direction::Min => {
            (format!("{k} {symbol} {}", c.name), THM_PREORDER_MIN, CertVerdict::CertifiedAboveSyntacticSolution)
        }
    };
    cert.verdict = verdict;
    cert.conclusion =
        Some(Conclusion { claim, theorem: theorem.to_string(), syntactic_solution: solution_names(&a.solution) });
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "
        system S { X = a.X; }
        const K = tau.a.a.K;
        const H = a.H;
        const G = b.G;
        candidates CK for S = (K);
        candidates CH for S = (H);
        candidates CG for S = (G);
        candidates Zero for S = (0);
        candidates Self for S = (#sol.S.X);
    ";

    fn model() -> Model {
        Model::from_source(SRC).unwrap()
    }

    #[test]
    fn two_tuples_certify_equal_through_the_divergence_free_route() {
        let c = certify_unique_solution(&model(), "S", &["CK", "CH"], Relation::WeakBisim, &CertifyConfig::default())
            .unwrap();
        assert_eq!(c.verdict, CertVerdict::CertifiedEqual);
        assert_eq!(c.guard.route, Some(GuardRoute::Syntactic));
        assert_eq!(c.divergence.as_ref().unwrap().route, Some(DivergenceRoute::DivergenceFree));
        assert_eq!(c.solution_checks.len(), 2);
        assert_eq!(c.cross_checks.len(), 1);
        assert_eq!(c.cross_checks[0].verdict, Verdict::Holds);
        assert_eq!(c.conclusion.unwrap().theorem, THM_DIVERGENCE_FREE);
    }

    #[test]
    fn a_wrong_candidate_is_refused_at_its_solution_check() {
        let c = certify_unique_solution(&model(), "S", &["CH", "CG"], Relation::WeakBisim, &CertifyConfig::default())
            .unwrap();
        let CertVerdict::Refused { premise, .. } = &c.verdict else { panic!("{:?}", c.verdict) };
        assert_eq!(*premise, Premise::Solution { candidates: "CG".into(), equation: 0 });
    }

    #[test]
    fn candidates_of_another_system_are_an_error() {
        let m = Model::from_source(&format!("{SRC} system T {{ Y = b.Y; }} candidates CT for T = (G);")).unwrap();
        let e = certify_unique_solution(&m, "S", &["CT"], Relation::WeakBisim, &CertifyConfig::default());
        assert!(matches!(e, Err(CertifyError::WrongSystem { .. })));
    }

    #[test]
    fn preorders_are_rejected_for_unique_solutions() {
        let e = certify_unique_solution(&model(), "S", &["CH"], Relation::WeakSim, &CertifyConfig::default());
        assert!(matches!(e, Err(CertifyError::Unsupported(..))));
    }

    #[test]
    fn preorder_directions() {
        let m = model();
        let cfg = CertifyConfig::default();
        let max = certify_preorder(&m, "S", "Zero", Direction::Max, Relation::WeakSim, &cfg).unwrap();
        assert_eq!(max.verdict, CertVerdict::CertifiedBelowSyntacticSolution);
        assert_eq!(max.conclusion.as_ref().unwrap().claim, "Zero ≤s #sol.S.X");
        assert!(max.cross_checks.iter().all(|c| c.verdict == Verdict::Holds) && !max.cross_checks.is_empty());
        let min = certify_preorder(&m, "S", "Self", Direction::Min, Relation::TraceIncl, &cfg).unwrap();
        assert_eq!(min.verdict, CertVerdict::CertifiedAboveSyntacticSolution);
        assert!(min.divergence.is_none());
        assert_eq!(min.cross_checks[0].verdict, Verdict::Holds);
    }

    #[test]
    fn certificates_round_trip_through_json() {
        let c = certify_unique_solution(&model(), "S", &["CK", "CH"], Relation::WeakBisim, &CertifyConfig::default())
            .unwrap();
        let back = Certificate::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
