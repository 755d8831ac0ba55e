//! Surface syntax as written by the user, with source spans on every node.
//!
//! Value passing (`c(z: 0..3).P`, `'a<n>`, `A(n+1)`) only exists at this
//! level; [`desugar_values`](super::desugar_values) compiles it away.

use super::Span;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub constants: Vec<ConstDef>,
    pub systems: Vec<SystemDef>,
    pub candidates: Vec<CandidateDef>,
}

/// Values range over `0..size-1`; arithmetic wraps modulo `size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Domain {
    pub size: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub domain: Domain,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Proc,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemDef {
    pub name: String,
    pub equations: Vec<EquationDef>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationDef {
    pub var: String,
    pub params: Vec<Param>,
    pub body: Proc,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateDef {
    pub name: String,
    pub system: String,
    pub tuple: Vec<Proc>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proc {
    pub kind: ProcKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcKind {
    Nil,
    Prefix(Prefix, Box<Proc>),
    /// At least two summands, each a `Prefix`.
    Sum(Vec<Proc>),
    Par(Box<Proc>, Box<Proc>),
    Res(String, Box<Proc>),
    /// A constant or, inside a system, an equation variable.
    Ref {
        name: String,
        args: Vec<ValueExpr>,
        var: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prefix {
    Tau,
    Input(Channel),
    Output(Channel),
    /// `c(z: 0..m)`: input of a value bound to `z`.
    Receive {
        chan: String,
        binder: String,
        domain: Domain,
    },
}

/// A channel, optionally indexed by values: `a` or `a<n, z>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub index: Vec<ValueExpr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueExpr {
    pub kind: ValueKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValueKind {
    Lit(i64),
    Param(String),
    Add(Box<ValueExpr>, Box<ValueExpr>),
    Sub(Box<ValueExpr>, Box<ValueExpr>),
}

impl ValueExpr {
    pub fn params(&self, out: &mut Vec<String>) {
        match &self.kind {
            ValueKind::Lit(_) => {}
            ValueKind::Param(p) => out.push(p.clone()),
            ValueKind::Add(a, b) | ValueKind::Sub(a, b) => {
                a.params(out);
                b.params(out);
            }
        }
    }
}

impl Proc {
    pub fn new(kind: ProcKind, span: Span) -> Self {
        Proc { kind, span }
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Proc)) {
        f(self);
        match &self.kind {
            ProcKind::Nil | ProcKind::Ref { .. } => {}
            ProcKind::Prefix(_, p) | ProcKind::Res(_, p) => p.visit(f),
            ProcKind::Sum(ps) => ps.iter().for_each(|p| p.visit(f)),
            ProcKind::Par(p, q) => {
                p.visit(f);
                q.visit(f);
            }
        }
    }

    fn visit_mut(&mut self, f: &mut impl FnMut(&mut Proc)) {
        f(self);
        match &mut self.kind {
            ProcKind::Nil | ProcKind::Ref { .. } => {}
            ProcKind::Prefix(_, p) | ProcKind::Res(_, p) => p.visit_mut(f),
            ProcKind::Sum(ps) => ps.iter_mut().for_each(|p| p.visit_mut(f)),
            ProcKind::Par(p, q) => {
                p.visit_mut(f);
                q.visit_mut(f);
            }
        }
    }

    /// True when the term uses no value-passing construct.
    pub fn is_pure(&self) -> bool {
        let mut pure = true;
        self.visit(&mut |p| match &p.kind {
            ProcKind::Prefix(Prefix::Receive { .. }, _) => pure = false,
            ProcKind::Prefix(Prefix::Input(c) | Prefix::Output(c), _) if !c.index.is_empty() => pure = false,
            ProcKind::Ref { args, .. } if !args.is_empty() => pure = false,
            _ => {}
        });
        pure
    }

    pub(crate) fn erase_spans(&mut self) {
        self.visit_mut(&mut |p| {
            p.span = Span::default();
            let exprs: Vec<&mut ValueExpr> = match &mut p.kind {
                ProcKind::Prefix(Prefix::Input(c) | Prefix::Output(c), _) => c.index.iter_mut().collect(),
                ProcKind::Ref { args, .. } => args.iter_mut().collect(),
                _ => Vec::new(),
            };
            for e in exprs {
                e.erase_spans();
            }
        });
    }
}

impl ValueExpr {
    fn erase_spans(&mut self) {
        self.span = Span::default();
        if let ValueKind::Add(a, b) | ValueKind::Sub(a, b) = &mut self.kind {
            a.erase_spans();
            b.erase_spans();
        }
    }
}

impl Program {
    /// Resets every span so that two programs can be compared structurally.
    pub fn erase_spans(&mut self) {
        for c in &mut self.constants {
            c.span = Span::default();
            c.params.iter_mut().for_each(|p| p.span = Span::default());
            c.body.erase_spans();
        }
        for s in &mut self.systems {
            s.span = Span::default();
            for e in &mut s.equations {
                e.span = Span::default();
                e.params.iter_mut().for_each(|p| p.span = Span::default());
                e.body.erase_spans();
            }
        }
        for c in &mut self.candidates {
            c.span = Span::default();
            c.tuple.iter_mut().for_each(Proc::erase_spans);
        }
    }

    pub fn is_pure(&self) -> bool {
        self.constants.iter().all(|c| c.params.is_empty() && c.body.is_pure())
            && self.systems.iter().flat_map(|s| &s.equations).all(|e| e.params.is_empty() && e.body.is_pure())
            && self.candidates.iter().flat_map(|c| &c.tuple).all(Proc::is_pure)
    }
}
