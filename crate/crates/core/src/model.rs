//! Resolved programs: the constant environment and the lowering from surface
//! syntax to pure [`Term`]s.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::equations::{syntactic_solution, EquationSystem};
use crate::syntax::ast::{self, ProcKind};
use crate::syntax::{self, Diagnostic, DiagnosticKind, Diagnostics, Signatures, Span, ValueFamilies};
use crate::term::{Action, ConstName, Name, Term, VarName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstKind {
    User,
    /// Generated for the syntactic solution of an equation system; unfolding
    /// such a constant is what transition annotations count.
    Solution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstDef {
    pub name: ConstName,
    pub body: Term,
    pub kind: ConstKind,
}

/// Immutable table of constant definitions.
#[derive(Debug, Clone, Default)]
pub struct Env {
    defs: BTreeMap<ConstName, Arc<ConstDef>>,
    /// Names a constant can use, not counting those hidden under a
    /// restriction of the same name.
    free_names: BTreeMap<ConstName, Arc<BTreeSet<Name>>>,
}

impl Env {
    pub fn new(defs: impl IntoIterator<Item = ConstDef>) -> Self {
        let defs = defs.into_iter().map(|d| (d.name.clone(), Arc::new(d))).collect();
        let mut env = Env { defs, free_names: BTreeMap::new() };
        env.compute_free_names();
        env
    }

    /// A new environment with `defs` added (replacing same-named entries).
    pub fn extend(&self, defs: impl IntoIterator<Item = ConstDef>) -> Self {
        let mut all = self.defs.clone();
        for d in defs {
            all.insert(d.name.clone(), Arc::new(d));
        }
        let mut env = Env { defs: all, free_names: BTreeMap::new() };
        env.compute_free_names();
        env
    }

    pub fn get(&self, name: &ConstName) -> Option<&ConstDef> {
        self.defs.get(name).map(Arc::as_ref)
    }

    pub fn contains(&self, name: &ConstName) -> bool {
        self.defs.contains_key(name)
    }

    pub fn is_solution(&self, name: &ConstName) -> bool {
        self.get(name).is_some_and(|d| d.kind == ConstKind::Solution)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ConstDef> {
        self.defs.values().map(Arc::as_ref)
    }

    fn compute_free_names(&mut self) {
        let mut current: BTreeMap<ConstName, BTreeSet<Name>> =
            self.defs.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
        loop {
            let mut changed = false;
            for (k, def) in &self.defs {
                let mut names = BTreeSet::new();
                collect_free_names(&def.body, &current, &mut names);
                if names != current[k] {
                    current.insert(k.clone(), names);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.free_names = current.into_iter().map(|(k, v)| (k, Arc::new(v))).collect();
    }

    /// Names constant `k` can use; `None` for an unknown constant.
    pub(crate) fn const_free_names(&self, k: &ConstName) -> Option<&BTreeSet<Name>> {
        self.free_names.get(k).map(Arc::as_ref)
    }

    /// Whether `name` can appear on a transition of `term` (or of one of its
    /// derivatives). Variables are treated as mentioning every name.
    pub fn occurs_free(&self, name: &Name, term: &Term) -> bool {
        match term {
            Term::Nil => false,
            Term::Var(_) => true,
            Term::Const(k) => self.free_names.get(k).is_none_or(|s| s.contains(name)),
            Term::Prefix(a, p) => a.name() == Some(name) || self.occurs_free(name, p),
            Term::Sum(ps) => ps.iter().any(|p| self.occurs_free(name, p)),
            Term::Par(p, q) => self.occurs_free(name, p) || self.occurs_free(name, q),
            Term::Res(a, p) => a != name && self.occurs_free(name, p),
        }
    }

    /// Every action that may occur as a prefix in `term` or in the bodies of
    /// constants it reaches.
    pub fn reachable_prefixes(&self, term: &Term) -> BTreeSet<Action> {
        let mut out = term.prefixes();
        let mut seen = BTreeSet::new();
        let mut stack: Vec<ConstName> = term.constants().into_iter().collect();
        while let Some(k) = stack.pop() {
            if !seen.insert(k.clone()) {
                continue;
            }
            if let Some(def) = self.get(&k) {
                out.extend(def.body.prefixes());
                stack.extend(def.body.constants());
            }
        }
        out
    }

    /// Constants that can reach themselves without passing a prefix.
    pub fn unguarded_constants(&self) -> Vec<ConstName> {
        let edges: BTreeMap<&ConstName, BTreeSet<ConstName>> =
            self.defs.iter().map(|(k, d)| (k, unguarded_refs(&d.body))).collect();
        let mut bad = Vec::new();
        for start in self.defs.keys() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<ConstName> = edges[start].iter().cloned().collect();
            while let Some(k) = stack.pop() {
                if &k == start {
                    bad.push(start.clone());
                    break;
                }
                if seen.insert(k.clone()) {
                    if let Some(next) = edges.get(&k) {
                        stack.extend(next.iter().cloned());
                    }
                }
            }
        }
        bad
    }
}

fn collect_free_names(t: &Term, consts: &BTreeMap<ConstName, BTreeSet<Name>>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Nil | Term::Var(_) => {}
        Term::Const(k) => out.extend(consts.get(k).into_iter().flatten().cloned()),
        Term::Prefix(a, p) => {
            out.extend(a.name().cloned());
            collect_free_names(p, consts, out);
        }
        Term::Sum(ps) => ps.iter().for_each(|p| collect_free_names(p, consts, out)),
        Term::Par(p, q) => {
            collect_free_names(p, consts, out);
            collect_free_names(q, consts, out);
        }
        Term::Res(a, p) => {
            let mut inner = BTreeSet::new();
            collect_free_names(p, consts, &mut inner);
            inner.remove(a);
            out.extend(inner);
        }
    }
}

/// Constants occurring in `t` outside of any prefix.
pub(crate) fn unguarded_refs(t: &Term) -> BTreeSet<ConstName> {
    let mut out = BTreeSet::new();
    fn walk(t: &Term, out: &mut BTreeSet<ConstName>) {
        match t {
            Term::Const(k) => {
                out.insert(k.clone());
            }
            Term::Par(p, q) => {
                walk(p, out);
                walk(q, out);
            }
            Term::Res(_, p) => walk(p, out),
            Term::Nil | Term::Var(_) | Term::Prefix(..) | Term::Sum(_) => {}
        }
    }
    walk(t, &mut out);
    out
}

/// A named tuple of candidate solutions for a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub name: String,
    pub system: String,
    pub tuple: Vec<Term>,
}

/// A validated, desugared and lowered program.
#[derive(Debug, Clone)]
pub struct Model {
    /// User constants plus the syntactic solutions of every declared system.
    pub env: Env,
    pub systems: Vec<EquationSystem>,
    pub candidates: Vec<CandidateSet>,
    /// The program as written.
    pub source: ast::Program,
    /// The pure program after value desugaring.
    pub pure: ast::Program,
    sigs: Signatures,
    families: ValueFamilies,
}

impl Model {
    pub fn from_source(src: &str) -> Result<Model, Diagnostics> {
        Model::from_program(&syntax::parse_program(src)?)
    }

    pub fn from_program(program: &ast::Program) -> Result<Model, Diagnostics> {
        let (pure, families, sigs) = syntax::desugar_with_families(program)?;
        let mut errors = Vec::new();

        let mut user = Vec::new();
        for c in &pure.constants {
            let name =
                ConstName::new(&c.name).map_err(|e| Diagnostic::new(DiagnosticKind::Syntax, c.span, e.to_string()))?;
            let body = lower(&c.body, &mut errors);
            user.push(ConstDef { name, body, kind: ConstKind::User });
        }
        let user_env = Env::new(user);
        for k in user_env.unguarded_constants() {
            let span = pure.constants.iter().find(|c| c.name == k.as_str()).map(|c| c.span).unwrap_or_default();
            errors.push(Diagnostic::new(
                DiagnosticKind::UnguardedRecursion,
                span,
                format!("constant `{k}` reaches itself without passing a prefix"),
            ));
        }

        let mut systems = Vec::new();
        for s in &pure.systems {
            let variables = s.equations.iter().map(|e| VarName::new(&e.var)).collect::<Result<Vec<_>, _>>();
            let variables = variables.map_err(|e| Diagnostic::new(DiagnosticKind::Syntax, s.span, e.to_string()))?;
            let bodies = s.equations.iter().map(|e| lower(&e.body, &mut errors)).collect();
            systems.push(EquationSystem::new(&s.name, variables, bodies));
        }
        let mut solutions = Vec::new();
        for s in &systems {
            match syntactic_solution(s, &user_env) {
                Ok(sol) => solutions.extend(sol.defs),
                Err(e) => errors.push(Diagnostic::unlocated(DiagnosticKind::Duplicate, e.to_string())),
            }
        }
        let env = user_env.extend(solutions);

        let candidates = pure
            .candidates
            .iter()
            .map(|c| CandidateSet {
                name: c.name.clone(),
                system: c.system.clone(),
                tuple: c.tuple.iter().map(|p| lower(p, &mut errors)).collect(),
            })
            .collect();

        if !errors.is_empty() {
            return Err(Diagnostics(errors));
        }
        Ok(Model { env, systems, candidates, source: program.clone(), pure, sigs, families })
    }

    pub fn system(&self, name: &str) -> Option<&EquationSystem> {
        self.systems.iter().find(|s| s.name == name)
    }

    pub fn candidate_set(&self, name: &str) -> Option<&CandidateSet> {
        self.candidates.iter().find(|c| c.name == name)
    }

    /// Parses a closed process in the context of this program; value
    /// arguments and `#sol.S.X` references are resolved.
    pub fn parse_term(&self, text: &str) -> Result<Term, Diagnostics> {
        self.parse_in(text, None)
    }

    /// Parses an expression over the variables of `system`.
    pub fn parse_expression(&self, system: &str, text: &str) -> Result<Term, Diagnostics> {
        self.parse_in(text, Some(system))
    }

    fn parse_in(&self, text: &str, system: Option<&str>) -> Result<Term, Diagnostics> {
        let mut proc = syntax::parse_proc(text)?;
        let vars: BTreeSet<String> =
            system.and_then(|s| self.sigs.variables.get(s)).map(|vs| vs.keys().cloned().collect()).unwrap_or_default();
        mark_vars(&mut proc, &vars);
        let pure = syntax::desugar_term(&proc, &self.sigs, &self.families, system)?;
        let mut errors = Vec::new();
        pure.visit(&mut |p| {
            if let ProcKind::Ref { name, var: false, .. } = &p.kind {
                let known = ConstName::new(name).ok().or_else(|| Some(ConstName::generated(name.clone())));
                if !known.is_some_and(|k| self.env.contains(&k)) {
                    errors.push(Diagnostic::new(
                        DiagnosticKind::UnknownConstant,
                        p.span,
                        format!("unknown constant `{name}`"),
                    ));
                }
            }
        });
        let term = lower(&pure, &mut errors);
        if errors.is_empty() {
            Ok(term)
        } else {
            Err(Diagnostics(errors))
        }
    }
}

fn mark_vars(p: &mut ast::Proc, vars: &BTreeSet<String>) {
    match &mut p.kind {
        ProcKind::Ref { name, var, .. } => *var = vars.contains(name),
        ProcKind::Nil => {}
        ProcKind::Prefix(_, q) | ProcKind::Res(_, q) => mark_vars(q, vars),
        ProcKind::Sum(qs) => qs.iter_mut().for_each(|q| mark_vars(q, vars)),
        ProcKind::Par(a, b) => {
            mark_vars(a, vars);
            mark_vars(b, vars);
        }
    }
}

fn lower_name(name: &str, span: Span, errors: &mut Vec<Diagnostic>) -> Name {
    Name::new(name).unwrap_or_else(|e| {
        errors.push(Diagnostic::new(DiagnosticKind::Syntax, span, e.to_string()));
        Name::new("invalid").unwrap()
    })
}

/// Lowers a pure surface term.
fn lower(p: &ast::Proc, errors: &mut Vec<Diagnostic>) -> Term {
    match &p.kind {
        ProcKind::Nil => Term::Nil,
        ProcKind::Prefix(prefix, cont) => {
            let action = match prefix {
                ast::Prefix::Tau => Action::Tau,
                ast::Prefix::Input(c) => Action::Input(lower_name(&c.name, p.span, errors)),
                ast::Prefix::Output(c) => Action::Output(lower_name(&c.name, p.span, errors)),
                ast::Prefix::Receive { .. } => {
                    errors.push(Diagnostic::new(DiagnosticKind::Syntax, p.span, "value input left after desugaring"));
                    Action::Tau
                }
            };
            Term::prefix(action, lower(cont, errors))
        }
        ProcKind::Sum(ps) => Term::sum(ps.iter().map(|q| lower(q, errors))),
        ProcKind::Par(a, b) => Term::par(lower(a, errors), lower(b, errors)),
        ProcKind::Res(a, q) => Term::res(lower_name(a, p.span, errors), lower(q, errors)),
        ProcKind::Ref { name, var: true, .. } => match VarName::new(name) {
            Ok(v) => Term::Var(v),
            Err(e) => {
                errors.push(Diagnostic::new(DiagnosticKind::Syntax, p.span, e.to_string()));
                Term::Nil
            }
        },
        ProcKind::Ref { name, .. } => match ConstName::new(name) {
            Ok(k) => Term::Const(k),
            Err(_) if name.starts_with("#sol.") => Term::Const(ConstName::generated(name.clone())),
            Err(e) => {
                errors.push(Diagnostic::new(DiagnosticKind::Syntax, p.span, e.to_string()));
                Term::Nil
            }
        },
    }
}
