//! Compilation of finite value passing into pure CCS.
//!
//! * `c(z: 0..m).P` becomes `c_0.P{0/z} + ... + c_m.P{m/z}`;
//! * `'a<e>` becomes an output on `a_v` where `v` is the value of `e`;
//! * `A(n: 0..m) = P` becomes one constant `A_v` per value;
//! * `new a in P` restricts `a` together with every `a_v` produced above.
//!
//! Arithmetic over parameters wraps modulo the target domain (for constant and
//! variable arguments) or modulo the domain of the parameters involved (for
//! channel indices). Literal-only arguments must already lie in the domain.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::{Diagnostic, DiagnosticKind, Diagnostics, Span};

/// Name universe produced by desugaring: for each channel base used with
/// values, the indexed names that appeared.
#[derive(Debug, Clone, Default)]
pub struct ValueFamilies {
    families: BTreeMap<String, BTreeSet<String>>,
}

impl ValueFamilies {
    /// Names restricted by `new base in ...`.
    pub fn restricted(&self, base: &str) -> Vec<String> {
        match self.families.get(base) {
            None => vec![base.to_string()],
            Some(members) => {
                let mut out = vec![base.to_string()];
                out.extend(members.iter().filter(|m| m.as_str() != base).cloned());
                out
            }
        }
    }
}

/// Parameter domains of every constant and equation variable, used to
/// desugar references after the fact (e.g. terms typed on the command line).
#[derive(Debug, Clone, Default)]
pub struct Signatures {
    pub constants: HashMap<String, Vec<Domain>>,
    pub variables: HashMap<String, HashMap<String, Vec<Domain>>>,
}

impl Signatures {
    pub fn of(program: &Program) -> Self {
        let constants =
            program.constants.iter().map(|c| (c.name.clone(), c.params.iter().map(|p| p.domain).collect())).collect();
        let variables = program
            .systems
            .iter()
            .map(|s| {
                let vars =
                    s.equations.iter().map(|e| (e.var.clone(), e.params.iter().map(|p| p.domain).collect())).collect();
                (s.name.clone(), vars)
            })
            .collect();
        Signatures { constants, variables }
    }
}

/// Rewrites a validated program into pure CCS.
pub fn desugar_values(program: &Program) -> Result<Program, Diagnostics> {
    desugar_with_families(program).map(|(p, _, _)| p)
}

pub(crate) fn desugar_with_families(program: &Program) -> Result<(Program, ValueFamilies, Signatures), Diagnostics> {
    let sigs = Signatures::of(program);
    let mut d = Desugarer { sigs: &sigs, system: None, families: ValueFamilies::default(), errors: Vec::new() };
    let mut out = Program::default();
    let user_names: BTreeSet<&str> =
        program.constants.iter().filter(|c| c.params.is_empty()).map(|c| c.name.as_str()).collect();

    for c in &program.constants {
        for values in assignments(&c.params) {
            let name = mangle(&c.name, &values);
            if !c.params.is_empty() && user_names.contains(name.as_str()) {
                d.errors.push(Diagnostic::new(
                    DiagnosticKind::Duplicate,
                    c.span,
                    format!("instance `{name}` of `{}` clashes with a user constant", c.name),
                ));
            }
            let env = bind(&c.params, &values);
            let body = d.proc(&c.body, &env);
            out.constants.push(ConstDef { name, params: Vec::new(), body, span: c.span });
        }
    }
    for s in &program.systems {
        d.system = Some(s.name.clone());
        let mut equations = Vec::new();
        for e in &s.equations {
            for values in assignments(&e.params) {
                let env = bind(&e.params, &values);
                let body = d.proc(&e.body, &env);
                equations.push(EquationDef { var: mangle(&e.var, &values), params: Vec::new(), body, span: e.span });
            }
        }
        out.systems.push(SystemDef { name: s.name.clone(), equations, span: s.span });
    }
    d.system = None;
    for c in &program.candidates {
        let tuple = c.tuple.iter().map(|p| d.proc(p, &HashMap::new())).collect();
        out.candidates.push(CandidateDef { tuple, ..c.clone() });
    }
    if !d.errors.is_empty() {
        return Err(Diagnostics(d.errors));
    }
    let families = d.families;
    for c in &mut out.constants {
        expand_restrictions(&mut c.body, &families);
    }
    for e in out.systems.iter_mut().flat_map(|s| &mut s.equations) {
        expand_restrictions(&mut e.body, &families);
    }
    for p in out.candidates.iter_mut().flat_map(|c| &mut c.tuple) {
        expand_restrictions(p, &families);
    }
    Ok((out, families, sigs))
}

/// Desugars a stand-alone term against the signatures and families of an
/// already desugared program.
pub(crate) fn desugar_term(
    p: &Proc,
    sigs: &Signatures,
    families: &ValueFamilies,
    system: Option<&str>,
) -> Result<Proc, Diagnostics> {
    let mut d = Desugarer { sigs, system: system.map(str::to_string), families: families.clone(), errors: Vec::new() };
    let mut out = d.proc(p, &HashMap::new());
    if !d.errors.is_empty() {
        return Err(Diagnostics(d.errors));
    }
    expand_restrictions(&mut out, &d.families);
    Ok(out)
}

fn assignments(params: &[Param]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for p in params {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..p.domain.size).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

fn bind(params: &[Param], values: &[u32]) -> HashMap<String, (i64, u32)> {
    params.iter().zip(values).map(|(p, &v)| (p.name.clone(), (v as i64, p.domain.size))).collect()
}

fn mangle(base: &str, values: &[u32]) -> String {
    let mut s = base.to_string();
    for v in values {
        s.push('_');
        s.push_str(&v.to_string());
    }
    s
}

type Env = HashMap<String, (i64, u32)>;

struct Desugarer<'a> {
    sigs: &'a Signatures,
    system: Option<String>,
    families: ValueFamilies,
    errors: Vec<Diagnostic>,
}

impl Desugarer<'_> {
    /// Value of an expression and the modulus implied by its parameters.
    fn eval(&mut self, e: &ValueExpr, env: &Env) -> Option<(i64, Option<u32>)> {
        match &e.kind {
            ValueKind::Lit(n) => Some((*n, None)),
            ValueKind::Param(p) => match env.get(p) {
                Some(&(v, m)) => Some((v, Some(m))),
                None => {
                    self.errors.push(Diagnostic::new(
                        DiagnosticKind::UnknownValue,
                        e.span,
                        format!("unknown value parameter `{p}`"),
                    ));
                    None
                }
            },
            ValueKind::Add(a, b) | ValueKind::Sub(a, b) => {
                let (x, mx) = self.eval(a, env)?;
                let (y, my) = self.eval(b, env)?;
                let modulus = match (mx, my) {
                    (Some(p), Some(q)) if p != q => {
                        self.errors.push(Diagnostic::new(
                            DiagnosticKind::OutOfDomain,
                            e.span,
                            format!("expression mixes domains of size {p} and {q}"),
                        ));
                        return None;
                    }
                    (m, n) => m.or(n),
                };
                let v = if matches!(e.kind, ValueKind::Add(..)) { x + y } else { x - y };
                Some((v, modulus))
            }
        }
    }

    fn arg_into(&mut self, e: &ValueExpr, env: &Env, domain: Domain) -> Option<u32> {
        let (v, modulus) = self.eval(e, env)?;
        match modulus {
            Some(_) => Some(v.rem_euclid(domain.size as i64) as u32),
            None if (0..domain.size as i64).contains(&v) => Some(v as u32),
            None => {
                self.errors.push(Diagnostic::new(
                    DiagnosticKind::OutOfDomain,
                    e.span,
                    format!("literal {v} is outside the domain {domain}"),
                ));
                None
            }
        }
    }

    fn channel(&mut self, ch: &Channel, env: &Env, span: Span) -> Option<Channel> {
        if ch.index.is_empty() {
            return Some(ch.clone());
        }
        let mut values = Vec::new();
        for e in &ch.index {
            let (v, modulus) = self.eval(e, env)?;
            let v = match modulus {
                Some(m) => v.rem_euclid(m as i64),
                None if v >= 0 => v,
                None => {
                    self.errors.push(Diagnostic::new(
                        DiagnosticKind::OutOfDomain,
                        span,
                        format!("negative channel index {v}"),
                    ));
                    return None;
                }
            };
            values.push(v as u32);
        }
        let name = mangle(&ch.name, &values);
        self.families.families.entry(ch.name.clone()).or_default().insert(name.clone());
        Some(Channel { name, index: Vec::new() })
    }

    fn proc(&mut self, p: &Proc, env: &Env) -> Proc {
        let span = p.span;
        let kind = match &p.kind {
            ProcKind::Nil => ProcKind::Nil,
            ProcKind::Prefix(prefix, cont) => match prefix {
                Prefix::Receive { chan, binder, domain } => {
                    let mut summands = Vec::new();
                    for v in 0..domain.size {
                        let mut inner = env.clone();
                        inner.insert(binder.clone(), (v as i64, domain.size));
                        let name = mangle(chan, &[v]);
                        self.families.families.entry(chan.clone()).or_default().insert(name.clone());
                        let body = self.proc(cont, &inner);
                        summands.push(Proc::new(
                            ProcKind::Prefix(Prefix::Input(Channel { name, index: Vec::new() }), Box::new(body)),
                            span,
                        ));
                    }
                    return sum(summands, span);
                }
                Prefix::Tau => ProcKind::Prefix(Prefix::Tau, Box::new(self.proc(cont, env))),
                Prefix::Input(ch) | Prefix::Output(ch) => {
                    let ch = self.channel(ch, env, span).unwrap_or_else(|| ch.clone());
                    let body = Box::new(self.proc(cont, env));
                    if matches!(prefix, Prefix::Input(_)) {
                        ProcKind::Prefix(Prefix::Input(ch), body)
                    } else {
                        ProcKind::Prefix(Prefix::Output(ch), body)
                    }
                }
            },
            ProcKind::Sum(ps) => {
                let summands = ps.iter().map(|q| self.proc(q, env)).collect();
                return sum(summands, span);
            }
            ProcKind::Par(a, b) => ProcKind::Par(Box::new(self.proc(a, env)), Box::new(self.proc(b, env))),
            ProcKind::Res(a, q) => ProcKind::Res(a.clone(), Box::new(self.proc(q, env))),
            ProcKind::Ref { name, args, var } => {
                let domains = if *var {
                    self.system.as_ref().and_then(|s| self.sigs.variables.get(s)).and_then(|vs| vs.get(name)).cloned()
                } else {
                    self.sigs.constants.get(name).cloned()
                };
                let domains = domains.unwrap_or_default();
                if domains.len() != args.len() {
                    if !name.starts_with("#sol.") || !args.is_empty() {
                        self.errors.push(Diagnostic::new(
                            DiagnosticKind::ArityMismatch,
                            span,
                            format!("`{name}` expects {} argument(s), found {}", domains.len(), args.len()),
                        ));
                    }
                    return p.clone();
                }
                let mut values = Vec::new();
                for (e, d) in args.iter().zip(&domains) {
                    match self.arg_into(e, env, *d) {
                        Some(v) => values.push(v),
                        None => return p.clone(),
                    }
                }
                ProcKind::Ref { name: mangle(name, &values), args: Vec::new(), var: *var }
            }
        };
        Proc::new(kind, span)
    }
}

fn sum(summands: Vec<Proc>, span: Span) -> Proc {
    let mut flat = Vec::new();
    for s in summands {
        match s.kind {
            ProcKind::Nil => {}
            ProcKind::Sum(inner) => flat.extend(inner),
            _ => flat.push(s),
        }
    }
    match flat.len() {
        0 => Proc::new(ProcKind::Nil, span),
        1 => flat.pop().unwrap(),
        _ => Proc::new(ProcKind::Sum(flat), span),
    }
}

fn expand_restrictions(p: &mut Proc, families: &ValueFamilies) {
    match &mut p.kind {
        ProcKind::Nil | ProcKind::Ref { .. } => {}
        ProcKind::Prefix(_, q) => expand_restrictions(q, families),
        ProcKind::Sum(qs) => qs.iter_mut().for_each(|q| expand_restrictions(q, families)),
        ProcKind::Par(a, b) => {
            expand_restrictions(a, families);
            expand_restrictions(b, families);
        }
        ProcKind::Res(a, q) => {
            expand_restrictions(q, families);
            let names = families.restricted(a);
            if names.len() > 1 {
                let span = p.span;
                let mut body = std::mem::replace(q.as_mut(), Proc::new(ProcKind::Nil, span));
                for n in names.iter().rev() {
                    body = Proc::new(ProcKind::Res(n.clone(), Box::new(body)), span);
                }
                *p = body;
            }
        }
    }
}
