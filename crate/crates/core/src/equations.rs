//! Equation systems: guardedness, unfoldings and syntactic solutions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::{ConstDef, ConstKind, Env};
use crate::syntax::{Diagnostic, DiagnosticKind};
use crate::term::{ConstName, Name, SubstError, Term, VarName};

/// Unfolding stops once a body grows past this many nodes; deeper unfoldings
/// are reported as not examined.
pub const MAX_UNFOLD_SIZE: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquationError {
    #[error("system `{system}` has {vars} variables but {bodies} bodies")]
    LengthMismatch { system: String, vars: usize, bodies: usize },
    #[error("variable `{0}` is declared twice")]
    DuplicateVariable(VarName),
    #[error("equation for `{equation}` mentions `{variable}`, which the system does not declare")]
    UndeclaredVariable { equation: VarName, variable: VarName },
    #[error("expected {expected} candidate(s), found {found}")]
    CandidateArity { expected: usize, found: usize },
    #[error("candidate {index} is not a process: it mentions variable `{variable}`")]
    OpenCandidate { index: usize, variable: VarName },
    #[error("no free name left for the syntactic solution of `{0}`")]
    NamesExhausted(String),
    #[error(transparent)]
    Subst(#[from] SubstError),
}

/// A finite system `{X_i = E_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    pub name: String,
    pub variables: Vec<VarName>,
    pub bodies: Vec<Term>,
}

impl EquationSystem {
    pub fn new(name: impl Into<String>, variables: Vec<VarName>, bodies: Vec<Term>) -> Self {
        EquationSystem { name: name.into(), variables, bodies }
    }

    /// Builds a system from `(variable, body)` pairs and validates it.
    pub fn from_equations(
        name: impl Into<String>,
        equations: impl IntoIterator<Item = (VarName, Term)>,
    ) -> Result<Self, EquationError> {
        let (variables, bodies) = equations.into_iter().unzip();
        let s = EquationSystem::new(name, variables, bodies);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), EquationError> {
        if self.variables.len() != self.bodies.len() {
            return Err(EquationError::LengthMismatch {
                system: self.name.clone(),
                vars: self.variables.len(),
                bodies: self.bodies.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for v in &self.variables {
            if !seen.insert(v) {
                return Err(EquationError::DuplicateVariable(v.clone()));
            }
        }
        for (x, e) in self.variables.iter().zip(&self.bodies) {
            if let Some(v) = e.free_variables().into_iter().find(|v| !seen.contains(v)) {
                return Err(EquationError::UndeclaredVariable { equation: x.clone(), variable: v });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, var: &VarName) -> Option<usize> {
        self.variables.iter().position(|v| v == var)
    }

    /// The binding `X_i ↦ terms[i]`.
    pub fn binding(&self, terms: &[Term]) -> Result<BTreeMap<VarName, Term>, EquationError> {
        if terms.len() != self.len() {
            return Err(EquationError::CandidateArity { expected: self.len(), found: terms.len() });
        }
        Ok(self.variables.iter().cloned().zip(terms.iter().cloned()).collect())
    }

    /// `E_i[P̃]` for every `i`.
    pub fn instantiate(&self, terms: &[Term]) -> Result<Vec<Term>, EquationError> {
        let binding = self.binding(terms)?;
        self.bodies.iter().map(|e| Ok(e.substitute(&binding)?)).collect()
    }

    /// Checks that `tuple` can be plugged into the system as processes.
    pub fn check_candidates(&self, tuple: &[Term]) -> Result<(), EquationError> {
        if tuple.len() != self.len() {
            return Err(EquationError::CandidateArity { expected: self.len(), found: tuple.len() });
        }
        for (index, p) in tuple.iter().enumerate() {
            if let Some(variable) = p.free_variables().into_iter().next() {
                return Err(EquationError::OpenCandidate { index, variable });
            }
        }
        Ok(())
    }
}

/// `Ẽ^n`, with `E^1 = E` and `E^{n+1} = E^n[Ẽ]`.
///
/// The result is named `S^n` for `n ≥ 2`. Panics if `n` is zero.
pub fn unfold(s: &EquationSystem, n: usize) -> EquationSystem {
    assert!(n >= 1, "unfolding depth starts at 1");
    let mut out = s.clone();
    for _ in 1..n {
        out = unfold_step(&out, s);
    }
    if n >= 2 {
        out.name = format!("{}^{}", s.name, n);
    }
    out
}

fn unfold_step(current: &EquationSystem, base: &EquationSystem) -> EquationSystem {
    let binding = base.variables.iter().cloned().zip(base.bodies.iter().cloned()).collect();
    let bodies = current.bodies.iter().map(|e| e.substitute(&binding).expect("system is closed")).collect();
    EquationSystem::new(current.name.clone(), current.variables.clone(), bodies)
}

/// A free name of a substituted term that lands under a restriction on the
/// same name. Restriction does not bind, so the name is captured as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Capture {
    pub equation: VarName,
    pub variable: VarName,
    pub name: Name,
}

impl Capture {
    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::unlocated(
            DiagnosticKind::Warning,
            format!(
                "substituting for `{}` in the equation for `{}` puts free name `{}` under `new {}`",
                self.variable, self.equation, self.name, self.name
            ),
        )
    }
}

impl EquationSystem {
    /// Every capture that `E_i[terms]` performs. Variables inside `terms`
    /// count as mentioning no name, so passing the bodies themselves checks
    /// an unfolding step.
    pub fn captures(&self, terms: &[Term], env: &Env) -> Vec<Capture> {
        let mut out = Vec::new();
        for (equation, body) in self.variables.iter().zip(&self.bodies) {
            let mut restricted = Vec::new();
            self.collect_captures(equation, body, terms, env, &mut restricted, &mut out);
        }
        out.dedup();
        out
    }

    fn collect_captures<'a>(
        &self,
        equation: &VarName,
        body: &'a Term,
        terms: &[Term],
        env: &Env,
        restricted: &mut Vec<&'a Name>,
        out: &mut Vec<Capture>,
    ) {
        match body {
            Term::Var(v) => {
                let Some(t) = self.index_of(v).and_then(|i| terms.get(i)) else { return };
                let mut seen = BTreeSet::new();
                for &a in restricted.iter() {
                    if seen.insert(a) && mentions(env, a, t) {
                        out.push(Capture { equation: equation.clone(), variable: v.clone(), name: a.clone() });
                    }
                }
            }
            Term::Nil | Term::Const(_) => {}
            Term::Prefix(_, p) => self.collect_captures(equation, p, terms, env, restricted, out),
            Term::Sum(ps) => ps.iter().for_each(|p| self.collect_captures(equation, p, terms, env, restricted, out)),
            Term::Par(p, q) => {
                self.collect_captures(equation, p, terms, env, restricted, out);
                self.collect_captures(equation, q, terms, env, restricted, out);
            }
            Term::Res(a, p) => {
                restricted.push(a);
                self.collect_captures(equation, p, terms, env, restricted, out);
                restricted.pop();
            }
        }
    }
}

fn mentions(env: &Env, name: &Name, t: &Term) -> bool {
    match t {
        Term::Nil | Term::Var(_) => false,
        Term::Const(_) => env.occurs_free(name, t),
        Term::Prefix(a, p) => a.name() == Some(name) || mentions(env, name, p),
        Term::Sum(ps) => ps.iter().any(|p| mentions(env, name, p)),
        Term::Par(p, q) => mentions(env, name, p) || mentions(env, name, q),
        Term::Res(a, p) => a != name && mentions(env, name, p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardStatus {
    Unguarded,
    /// Only `tau` prefixes above the occurrence.
    WeaklyGuarded,
    /// At least one visible prefix above the occurrence.
    StronglyGuarded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Occurrence {
    pub equation: usize,
    pub variable: VarName,
    pub status: GuardStatus,
    /// Only prefix and sum nodes lie on the path from the root.
    pub sequential: bool,
}

/// Variable occurrences of one body, in pre-order.
pub fn occurrences(equation: usize, body: &Term) -> Vec<Occurrence> {
    fn walk(t: &Term, equation: usize, status: GuardStatus, sequential: bool, out: &mut Vec<Occurrence>) {
        match t {
            Term::Var(v) => out.push(Occurrence { equation, variable: v.clone(), status, sequential }),
            Term::Nil | Term::Const(_) => {}
            Term::Prefix(a, p) => {
                let status =
                    if !a.is_tau() { GuardStatus::StronglyGuarded } else { status.max(GuardStatus::WeaklyGuarded) };
                walk(p, equation, status, sequential, out);
            }
            Term::Sum(ps) => ps.iter().for_each(|p| walk(p, equation, status, sequential, out)),
            Term::Par(p, q) => {
                walk(p, equation, status, false, out);
                walk(q, equation, status, false, out);
            }
            Term::Res(_, p) => walk(p, equation, status, false, out),
        }
    }
    let mut out = Vec::new();
    walk(body, equation, GuardStatus::Unguarded, true, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuardReport {
    /// Occurrences in `Ẽ` itself.
    pub occurrences: Vec<Occurrence>,
    /// Some unfolding `Ẽ^n` with `n ≤ max_unfold` is guarded.
    pub guarded: bool,
    /// `Ẽ` itself has every occurrence under a visible prefix.
    pub strongly_guarded: bool,
    /// `Ẽ` itself has every occurrence under prefixes and sums only.
    pub sequential: bool,
    /// `0` when `Ẽ` is guarded, otherwise the exponent `n` of the first
    /// guarded unfolding. `None` when none up to `max_unfold` is.
    pub depth: Option<usize>,
    /// First guarded depth of each equation, same convention as `depth`.
    pub equation_depths: Vec<Option<usize>>,
    pub max_unfold: usize,
    /// Unfolding stopped early because bodies outgrew [`MAX_UNFOLD_SIZE`].
    pub size_capped: bool,
}

fn body_guarded(equation: usize, body: &Term) -> bool {
    occurrences(equation, body).iter().all(|o| o.status != GuardStatus::Unguarded)
}

pub fn check_guardedness(s: &EquationSystem, max_unfold: usize) -> GuardReport {
    let occs: Vec<Occurrence> = s.bodies.iter().enumerate().flat_map(|(i, e)| occurrences(i, e)).collect();
    let strongly_guarded = occs.iter().all(|o| o.status == GuardStatus::StronglyGuarded);
    let sequential = occs.iter().all(|o| o.sequential);

    let mut equation_depths: Vec<Option<usize>> =
        s.bodies.iter().enumerate().map(|(i, e)| body_guarded(i, e).then_some(0)).collect();
    let mut current = s.clone();
    let mut size_capped = false;
    let mut n = 1;
    while equation_depths.iter().any(Option::is_none) && n < max_unfold {
        if current.bodies.iter().map(Term::size).sum::<usize>() > MAX_UNFOLD_SIZE {
            size_capped = true;
            break;
        }
        current = unfold_step(&current, s);
        n += 1;
        for (i, e) in current.bodies.iter().enumerate() {
            if equation_depths[i].is_none() && body_guarded(i, e) {
                equation_depths[i] = Some(n);
            }
        }
    }
    let depth = equation_depths.iter().try_fold(0, |acc, d| d.map(|d| acc.max(d)));
    GuardReport {
        occurrences: occs,
        guarded: depth.is_some(),
        strongly_guarded,
        sequential,
        depth,
        equation_depths,
        max_unfold,
        size_capped,
    }
}

/// The constants `K_i ≐ E_i[K̃]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntacticSolution {
    /// The system the constants solve.
    pub system: EquationSystem,
    pub constants: Vec<ConstName>,
    pub defs: Vec<ConstDef>,
}

impl SyntacticSolution {
    /// The tuple `K̃` as terms.
    pub fn tuple(&self) -> Vec<Term> {
        self.constants.iter().map(Term::constant).collect()
    }
}

const MAX_NAME_ATTEMPTS: usize = 64;

/// Generates the syntactic solution of `s`. Names are `#sol.S.X`; if `env`
/// already binds such a name to something else, a numeric suffix is added.
pub fn syntactic_solution(s: &EquationSystem, env: &Env) -> Result<SyntacticSolution, EquationError> {
    s.validate()?;
    let constants = solution_names(s);
    let tuple: Vec<Term> = constants.iter().map(Term::constant).collect();
    let bodies = s.instantiate(&tuple)?;
    let defs = constants
        .iter()
        .zip(bodies)
        .map(|(name, body)| ConstDef { name: name.clone(), body, kind: ConstKind::Solution })
        .collect::<Vec<_>>();
    // Same names and same definitions: reuse without renaming.
    for attempt in 0..MAX_NAME_ATTEMPTS {
        let names: Vec<ConstName> = if attempt == 0 {
            constants.clone()
        } else {
            constants.iter().map(|k| ConstName::generated(format!("{k}.{attempt}"))).collect()
        };
        let renamed = rename_defs(&defs, &constants, &names);
        let clash = renamed.iter().any(|d| env.get(&d.name).is_some_and(|old| old != d));
        if !clash {
            return Ok(SyntacticSolution { system: s.clone(), constants: names, defs: renamed });
        }
    }
    Err(EquationError::NamesExhausted(s.name.clone()))
}

fn solution_names(s: &EquationSystem) -> Vec<ConstName> {
    s.variables.iter().map(|x| ConstName::generated(format!("#sol.{}.{}", s.name, x))).collect()
}

fn rename_defs(defs: &[ConstDef], from: &[ConstName], to: &[ConstName]) -> Vec<ConstDef> {
    if from == to {
        return defs.to_vec();
    }
    let map: BTreeMap<&ConstName, &ConstName> = from.iter().zip(to).collect();
    defs.iter()
        .zip(to)
        .map(|(d, name)| ConstDef { name: name.clone(), body: rename_consts(&d.body, &map), kind: d.kind })
        .collect()
}

fn rename_consts(t: &Term, map: &BTreeMap<&ConstName, &ConstName>) -> Term {
    match t {
        Term::Const(k) => Term::Const(map.get(k).map_or_else(|| k.clone(), |n| (*n).clone())),
        Term::Nil | Term::Var(_) => t.clone(),
        Term::Prefix(a, p) => Term::prefix(a.clone(), rename_consts(p, map)),
        Term::Sum(ps) => Term::Sum(ps.iter().map(|p| rename_consts(p, map)).collect()),
        Term::Par(p, q) => Term::par(rename_consts(p, map), rename_consts(q, map)),
        Term::Res(a, p) => Term::res(a.clone(), rename_consts(p, map)),
    }
}
