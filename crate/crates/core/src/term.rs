//! Pure CCS terms.
//!
//! A [`Term`] is either a process (no equation variables) or an equation
//! expression (may contain [`Term::Var`]). Both share one representation so
//! that substitution and unfolding stay plain tree rewrites.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! ident_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

ident_newtype!(
    /// A channel name such as `a` or `c_3`.
    Name
);
ident_newtype!(
    /// The name of a constant, either user-defined (`K`) or generated
    /// for a syntactic solution (`#sol.S.X`).
    ConstName
);
ident_newtype!(
    /// An equation variable such as `X`.
    VarName
);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {kind} `{text}`")]
pub struct IdentError {
    pub kind: &'static str,
    pub text: String,
}

fn is_tail(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl Name {
    /// Channel names match `[a-z][A-Za-z0-9_]*` and are not keywords.
    pub fn new(text: &str) -> Result<Self, IdentError> {
        let mut chars = text.chars();
        let ok = matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
            && chars.all(is_tail)
            && !crate::syntax::is_keyword(text);
        if ok {
            Ok(Name(text.into()))
        } else {
            Err(IdentError { kind: "channel name", text: text.to_string() })
        }
    }
}

impl ConstName {
    pub fn new(text: &str) -> Result<Self, IdentError> {
        let mut chars = text.chars();
        if matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(is_tail) {
            Ok(ConstName(text.into()))
        } else {
            Err(IdentError { kind: "constant name", text: text.to_string() })
        }
    }

    /// Names reserved for generated syntactic-solution constants. They cannot
    /// clash with user constants, which always start with an uppercase letter.
    pub(crate) fn generated(text: String) -> Self {
        ConstName(text.into())
    }

    pub fn is_generated(&self) -> bool {
        self.0.starts_with('#')
    }
}

impl VarName {
    pub fn new(text: &str) -> Result<Self, IdentError> {
        let mut chars = text.chars();
        if matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(is_tail) {
            Ok(VarName(text.into()))
        } else {
            Err(IdentError { kind: "variable name", text: text.to_string() })
        }
    }
}

/// A transition label: input `a`, output `'a`, or the silent action.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Tau,
    Input(Name),
    Output(Name),
}

impl Action {
    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }

    pub fn name(&self) -> Option<&Name> {
        match self {
            Action::Tau => None,
            Action::Input(n) | Action::Output(n) => Some(n),
        }
    }

    /// `a` for `'a` and vice versa; `None` for tau.
    pub fn complement(&self) -> Option<Action> {
        match self {
            Action::Tau => None,
            Action::Input(n) => Some(Action::Output(n.clone())),
            Action::Output(n) => Some(Action::Input(n.clone())),
        }
    }

    /// Parses the rendering produced by `Display` (`a`, `'a`, `tau`).
    pub fn parse(text: &str) -> Result<Self, IdentError> {
        if text == "tau" {
            Ok(Action::Tau)
        } else if let Some(rest) = text.strip_prefix('\'') {
            Name::new(rest).map(Action::Output)
        } else {
            Name::new(text).map(Action::Input)
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => f.write_str("tau"),
            Action::Input(n) => write!(f, "{n}"),
            Action::Output(n) => write!(f, "'{n}"),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Action::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A CCS process or equation expression.
///
/// Every element of a `Sum` is a `Prefix`; the constructors in this module and
/// the parser maintain that invariant.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Nil,
    Prefix(Action, Box<Term>),
    Sum(Vec<Term>),
    Par(Box<Term>, Box<Term>),
    Res(Name, Box<Term>),
    Const(ConstName),
    Var(VarName),
}

/// A variable-free term.
pub type Process = Term;
/// A term that may mention equation variables.
pub type Expression = Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("variable `{0}` has no binding")]
    Unbound(VarName),
}

impl Term {
    pub fn prefix(action: Action, cont: Term) -> Term {
        Term::Prefix(action, Box::new(cont))
    }

    pub fn par(left: Term, right: Term) -> Term {
        Term::Par(Box::new(left), Box::new(right))
    }

    pub fn res(name: Name, body: Term) -> Term {
        Term::Res(name, Box::new(body))
    }

    /// Builds a guarded sum, flattening nested sums and dropping `0`.
    ///
    /// Panics if a summand is not a prefix, a sum or `0`.
    pub fn sum(summands: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for s in summands {
            match s {
                Term::Nil => {}
                Term::Sum(inner) => out.extend(inner),
                p @ Term::Prefix(..) => out.push(p),
                other => panic!("unguarded summand {other}"),
            }
        }
        match out.len() {
            0 => Term::Nil,
            1 => out.pop().unwrap(),
            _ => Term::Sum(out),
        }
    }

    pub fn constant(name: &ConstName) -> Term {
        Term::Const(name.clone())
    }

    pub fn var(name: &VarName) -> Term {
        Term::Var(name.clone())
    }

    /// Equation variables occurring in the term. Constants contribute none.
    pub fn free_variables(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn is_closed(&self) -> bool {
        let mut closed = true;
        self.visit(&mut |t| closed &= !matches!(t, Term::Var(_)));
        closed
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Nil | Term::Const(_) | Term::Var(_) => {}
            Term::Prefix(_, p) | Term::Res(_, p) => p.visit(f),
            Term::Sum(ps) => ps.iter().for_each(|p| p.visit(f)),
            Term::Par(p, q) => {
                p.visit(f);
                q.visit(f);
            }
        }
    }

    /// Constants referenced directly by the term.
    pub fn constants(&self) -> BTreeSet<ConstName> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Const(k) = t {
                out.insert(k.clone());
            }
        });
        out
    }

    /// Every action occurring as a prefix in the term (not through constants).
    pub fn prefixes(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Prefix(a, _) = t {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Simultaneous syntactic replacement of variables. Restriction is not a
    /// binder, so no renaming takes place.
    pub fn substitute(&self, binding: &BTreeMap<VarName, Term>) -> Result<Term, SubstError> {
        Ok(match self {
            Term::Var(v) => binding.get(v).cloned().ok_or_else(|| SubstError::Unbound(v.clone()))?,
            Term::Nil => Term::Nil,
            Term::Const(k) => Term::Const(k.clone()),
            Term::Prefix(a, p) => Term::prefix(a.clone(), p.substitute(binding)?),
            Term::Sum(ps) => Term::Sum(ps.iter().map(|p| p.substitute(binding)).collect::<Result<_, _>>()?),
            Term::Par(p, q) => Term::par(p.substitute(binding)?, q.substitute(binding)?),
            Term::Res(a, p) => Term::res(a.clone(), p.substitute(binding)?),
        })
    }

    /// Number of nodes; used to cap unfolding blow-up.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn precedence(&self) -> u8 {
        match self {
            Term::Sum(_) => 0,
            Term::Par(..) => 1,
            Term::Res(..) | Term::Prefix(..) => 2,
            Term::Nil | Term::Const(_) | Term::Var(_) => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Term::Nil => f.write_str("0"),
            Term::Const(k) => write!(f, "{k}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Prefix(a, p) => {
                write!(f, "{a}.")?;
                p.fmt_at(f, 2)
            }
            Term::Res(a, p) => {
                write!(f, "new {a} in ")?;
                p.fmt_at(f, 2)
            }
            Term::Par(p, q) => {
                p.fmt_at(f, 1)?;
                f.write_str(" | ")?;
                q.fmt_at(f, 2)
            }
            Term::Sum(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    p.fmt_at(f, 2)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::new(s).unwrap()
    }
    fn v(s: &str) -> VarName {
        VarName::new(s).unwrap()
    }

    #[test]
    fn name_lexical_rule() {
        assert!(Name::new("a").is_ok());
        assert!(Name::new("c_3").is_ok());
        assert!(Name::new("A").is_err());
        assert!(Name::new("").is_err());
        assert!(Name::new("tau").is_err());
        assert!(Name::new("a-b").is_err());
    }

    #[test]
    fn substitute_single() {
        let e = Term::prefix(Action::Input(n("a")), Term::var(&v("X")));
        let b = BTreeMap::from([(v("X"), Term::prefix(Action::Input(n("b")), Term::Nil))]);
        assert_eq!(e.substitute(&b).unwrap().to_string(), "a.b.0");
    }

    #[test]
    fn substitute_expression_into_itself() {
        let e = Term::prefix(Action::Input(n("a")), Term::var(&v("X")));
        let b = BTreeMap::from([(v("X"), e.clone())]);
        assert_eq!(e.substitute(&b).unwrap().to_string(), "a.a.X");
    }

    #[test]
    fn substitute_componentwise_and_unbound() {
        let e = Term::par(Term::var(&v("X")), Term::var(&v("Y")));
        let b = BTreeMap::from([(v("X"), Term::Nil), (v("Y"), Term::Nil)]);
        assert_eq!(e.substitute(&b).unwrap(), Term::par(Term::Nil, Term::Nil));
        let partial = BTreeMap::from([(v("X"), Term::Nil)]);
        assert_eq!(e.substitute(&partial), Err(SubstError::Unbound(v("Y"))));
    }

    #[test]
    fn free_variables_ignore_restriction() {
        let e = Term::res(
            n("a"),
            Term::par(
                Term::prefix(Action::Input(n("a")), Term::var(&v("X"))),
                Term::prefix(Action::Output(n("a")), Term::Nil),
            ),
        );
        assert_eq!(e.free_variables(), BTreeSet::from([v("X")]));
        assert!(Term::prefix(Action::Input(n("a")), Term::Nil).free_variables().is_empty());
    }

    #[test]
    fn display_parenthesises_by_precedence() {
        let t = Term::prefix(
            Action::Input(n("a")),
            Term::sum([Term::prefix(Action::Input(n("b")), Term::Nil), Term::prefix(Action::Input(n("c")), Term::Nil)]),
        );
        assert_eq!(t.to_string(), "a.(b.0 + c.0)");
        let p = Term::par(Term::Nil, Term::par(Term::Nil, Term::Nil));
        assert_eq!(p.to_string(), "0 | (0 | 0)");
        let r = Term::res(n("a"), Term::par(Term::Nil, Term::Nil));
        assert_eq!(r.to_string(), "new a in (0 | 0)");
    }
}
