use std::fmt::{self, Write};

use super::ast::*;

/// Renders a program in the concrete syntax accepted by
/// [`parse_program`](super::parse_program).
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for c in &program.constants {
        let _ = writeln!(out, "const {}{} = {};", c.name, Params(&c.params), c.body);
    }
    for s in &program.systems {
        let _ = writeln!(out, "system {} {{", s.name);
        for e in &s.equations {
            let _ = writeln!(out, "  {}{} = {};", e.var, Params(&e.params), e.body);
        }
        let _ = writeln!(out, "}}");
    }
    for c in &program.candidates {
        let parts: Vec<String> = c.tuple.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "candidates {} for {} = ({});", c.name, c.system, parts.join(", "));
    }
    out
}

struct Params<'a>(&'a [Param]);

impl fmt::Display for Params<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", p.name, p.domain)?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0..{}", self.size as i64 - 1)
    }
}

fn comma_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ValueKind::Lit(n) => write!(f, "{n}"),
            ValueKind::Param(p) => f.write_str(p),
            ValueKind::Add(a, b) => write!(f, "{a} + {}", Atomic(b)),
            ValueKind::Sub(a, b) => write!(f, "{a} - {}", Atomic(b)),
        }
    }
}

/// Right operands of `+`/`-` are parenthesised when compound.
struct Atomic<'a>(&'a ValueExpr);

impl fmt::Display for Atomic<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.kind {
            ValueKind::Lit(_) | ValueKind::Param(_) => write!(f, "{}", self.0),
            _ => write!(f, "({})", self.0),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.index.is_empty() {
            f.write_str("<")?;
            comma_list(f, &self.index)?;
            f.write_str(">")?;
        }
        Ok(())
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prefix::Tau => f.write_str("tau"),
            Prefix::Input(c) => write!(f, "{c}"),
            Prefix::Output(c) => write!(f, "'{c}"),
            Prefix::Receive { chan, binder, domain } => write!(f, "{chan}({binder}: {domain})"),
        }
    }
}

impl Proc {
    fn precedence(&self) -> u8 {
        match self.kind {
            ProcKind::Sum(_) => 0,
            ProcKind::Par(..) => 1,
            ProcKind::Res(..) | ProcKind::Prefix(..) => 2,
            ProcKind::Nil | ProcKind::Ref { .. } => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match &self.kind {
            ProcKind::Nil => f.write_str("0"),
            ProcKind::Ref { name, args, .. } => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    comma_list(f, args)?;
                    f.write_str(")")?;
                }
                Ok(())
            }
            ProcKind::Prefix(a, p) => {
                write!(f, "{a}.")?;
                p.fmt_at(f, 2)
            }
            ProcKind::Res(a, p) => {
                write!(f, "new {a} in ")?;
                p.fmt_at(f, 2)
            }
            ProcKind::Par(p, q) => {
                p.fmt_at(f, 1)?;
                f.write_str(" | ")?;
                q.fmt_at(f, 2)
            }
            ProcKind::Sum(ps) => {
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

impl fmt::Display for Proc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
