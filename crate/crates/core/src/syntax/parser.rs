//! Recursive-descent parser for the program text format.
//!
//! Precedence, loosest first: `+`, `|`, restriction, prefix.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{Diagnostic, DiagnosticKind, Diagnostics, Span};

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

/// Parses and validates a whole program.
pub fn parse_program(src: &str) -> Result<Program, Diagnostics> {
    let tokens = tokenize(src)?;
    let mut parser = Parser { tokens, pos: 0 };
    let program = parser.program()?;
    validate(&program)?;
    Ok(program)
}

/// Parses a single process term (no validation against a program).
pub fn parse_proc(src: &str) -> Result<Proc, Diagnostics> {
    let tokens = tokenize(src)?;
    let mut parser = Parser { tokens, pos: 0 };
    let p = parser.proc()?;
    parser.expect(Tok::Eof)?;
    Ok(p)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> Diagnostic {
        Diagnostic::new(
            DiagnosticKind::Syntax,
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek() == &tok {
            Ok(self.bump().span)
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn lower(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Lower(s) => Ok((s, self.bump().span)),
            _ => Err(self.error(what)),
        }
    }

    fn upper(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Upper(s) => Ok((s, self.bump().span)),
            _ => Err(self.error(what)),
        }
    }

    fn int(&mut self) -> PResult<(i64, Span)> {
        match self.peek().clone() {
            Tok::Int(n) => Ok((n, self.bump().span)),
            _ => Err(self.error("integer")),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut program = Program::default();
        loop {
            match self.peek() {
                Tok::Const => program.constants.push(self.const_def()?),
                Tok::System => program.systems.push(self.system_def()?),
                Tok::Candidates => program.candidates.push(self.candidate_def()?),
                Tok::Eof => return Ok(program),
                _ => return Err(self.error("`const`, `system` or `candidates`")),
            }
        }
    }

    fn const_def(&mut self) -> PResult<ConstDef> {
        let start = self.expect(Tok::Const)?;
        let (name, _) = self.upper("constant name")?;
        let params = self.params()?;
        self.expect(Tok::Eq)?;
        let body = self.proc()?;
        let end = self.expect(Tok::Semi)?;
        Ok(ConstDef { name, params, body, span: start.to(end) })
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                let (name, span) = self.lower("parameter name")?;
                self.expect(Tok::Colon)?;
                let domain = self.domain()?;
                params.push(Param { name, domain, span: span.to(self.prev_span()) });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(params)
    }

    fn domain(&mut self) -> PResult<Domain> {
        let (lo, lo_span) = self.int()?;
        self.expect(Tok::DotDot)?;
        let (hi, hi_span) = self.int()?;
        if lo != 0 || hi < 0 || hi >= u32::MAX as i64 {
            return Err(Diagnostic::new(
                DiagnosticKind::UnboundedDomain,
                lo_span.to(hi_span),
                format!("value domains must have the form `0..m` with m >= 0, found `{lo}..{hi}`"),
            ));
        }
        Ok(Domain { size: hi as u32 + 1 })
    }

    fn system_def(&mut self) -> PResult<SystemDef> {
        let start = self.expect(Tok::System)?;
        let (name, _) = self.upper("system name")?;
        self.expect(Tok::LBrace)?;
        let mut equations = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let (var, vspan) = self.upper("equation variable")?;
            let params = self.params()?;
            self.expect(Tok::Eq)?;
            let body = self.proc()?;
            let end = self.expect(Tok::Semi)?;
            equations.push(EquationDef { var, params, body, span: vspan.to(end) });
        }
        let vars: HashSet<String> = equations.iter().map(|e| e.var.clone()).collect();
        for eq in &mut equations {
            mark_vars(&mut eq.body, &vars);
        }
        Ok(SystemDef { name, equations, span: start.to(self.prev_span()) })
    }

    fn candidate_def(&mut self) -> PResult<CandidateDef> {
        let start = self.expect(Tok::Candidates)?;
        let (name, _) = self.upper("candidate set name")?;
        self.expect(Tok::For)?;
        let (system, _) = self.upper("system name")?;
        self.expect(Tok::Eq)?;
        self.expect(Tok::LParen)?;
        let mut tuple = vec![self.proc()?];
        while self.eat(&Tok::Comma) {
            tuple.push(self.proc()?);
        }
        self.expect(Tok::RParen)?;
        let end = self.expect(Tok::Semi)?;
        Ok(CandidateDef { name, system, tuple, span: start.to(end) })
    }

    pub(crate) fn proc(&mut self) -> PResult<Proc> {
        let first = self.par()?;
        if self.peek() != &Tok::Plus {
            return Ok(first);
        }
        let start = first.span;
        let mut summands = Vec::new();
        push_summand(&mut summands, first)?;
        while self.eat(&Tok::Plus) {
            let next = self.par()?;
            push_summand(&mut summands, next)?;
        }
        let span = start.to(self.prev_span());
        Ok(match summands.len() {
            0 => Proc::new(ProcKind::Nil, span),
            1 => summands.pop().unwrap(),
            _ => Proc::new(ProcKind::Sum(summands), span),
        })
    }

    fn par(&mut self) -> PResult<Proc> {
        let mut left = self.unary()?;
        while self.eat(&Tok::Bar) {
            let right = self.unary()?;
            let span = left.span.to(right.span);
            left = Proc::new(ProcKind::Par(Box::new(left), Box::new(right)), span);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Proc> {
        let start = self.span();
        match self.peek().clone() {
            Tok::New => {
                self.bump();
                let (name, _) = self.lower("channel name")?;
                self.expect(Tok::In)?;
                let body = self.unary()?;
                let span = start.to(body.span);
                Ok(Proc::new(ProcKind::Res(name, Box::new(body)), span))
            }
            Tok::LParen if self.peek_at(1) == &Tok::Caret => {
                self.bump();
                self.bump();
                let (name, _) = self.lower("channel name")?;
                self.expect(Tok::RParen)?;
                let body = self.unary()?;
                let span = start.to(body.span);
                Ok(Proc::new(ProcKind::Res(name, Box::new(body)), span))
            }
            Tok::Tau | Tok::Quote | Tok::Lower(_) => {
                let prefix = self.prefix()?;
                let cont = if self.eat(&Tok::Dot) { self.unary()? } else { Proc::new(ProcKind::Nil, self.prev_span()) };
                let span = start.to(cont.span);
                Ok(Proc::new(ProcKind::Prefix(prefix, Box::new(cont)), span))
            }
            _ => self.atom(),
        }
    }

    fn prefix(&mut self) -> PResult<Prefix> {
        match self.bump().tok {
            Tok::Tau => Ok(Prefix::Tau),
            Tok::Quote => {
                let (name, _) = self.lower("channel name after `'`")?;
                let index = self.index()?;
                Ok(Prefix::Output(Channel { name, index }))
            }
            Tok::Lower(name) => {
                if self.peek() == &Tok::LParen {
                    self.bump();
                    let (binder, bspan) = self.lower("value binder")?;
                    if !self.eat(&Tok::Colon) {
                        return Err(Diagnostic::new(
                            DiagnosticKind::UnboundedDomain,
                            bspan,
                            format!("input binder `{binder}` needs a finite domain, e.g. `{name}({binder}: 0..3)`"),
                        ));
                    }
                    let domain = self.domain()?;
                    self.expect(Tok::RParen)?;
                    Ok(Prefix::Receive { chan: name, binder, domain })
                } else {
                    let index = self.index()?;
                    Ok(Prefix::Input(Channel { name, index }))
                }
            }
            _ => unreachable!("prefix() called on a non-prefix token"),
        }
    }

    fn index(&mut self) -> PResult<Vec<ValueExpr>> {
        let mut out = Vec::new();
        if self.eat(&Tok::LAngle) {
            out.push(self.vexpr()?);
            while self.eat(&Tok::Comma) {
                out.push(self.vexpr()?);
            }
            self.expect(Tok::RAngle)?;
        }
        Ok(out)
    }

    fn atom(&mut self) -> PResult<Proc> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Proc::new(ProcKind::Nil, start))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.proc()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Proc { span: start.to(end), ..inner })
            }
            Tok::Upper(name) | Tok::Sol(name) => {
                self.bump();
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    args.push(self.vexpr()?);
                    while self.eat(&Tok::Comma) {
                        args.push(self.vexpr()?);
                    }
                    self.expect(Tok::RParen)?;
                }
                Ok(Proc::new(ProcKind::Ref { name, args, var: false }, start.to(self.prev_span())))
            }
            _ => Err(self.error("a process")),
        }
    }

    fn vexpr(&mut self) -> PResult<ValueExpr> {
        let mut left = self.vatom()?;
        loop {
            let add = match self.peek() {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.vatom()?;
            let span = left.span.to(right.span);
            let kind = if add {
                ValueKind::Add(Box::new(left), Box::new(right))
            } else {
                ValueKind::Sub(Box::new(left), Box::new(right))
            };
            left = ValueExpr { kind, span };
        }
    }

    fn vatom(&mut self) -> PResult<ValueExpr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(ValueExpr { kind: ValueKind::Lit(n), span })
            }
            Tok::Lower(p) => {
                self.bump();
                Ok(ValueExpr { kind: ValueKind::Param(p), span })
            }
            Tok::LParen => {
                self.bump();
                let e = self.vexpr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(ValueExpr { span: span.to(end), ..e })
            }
            _ => Err(self.error("a value expression")),
        }
    }
}

fn push_summand(out: &mut Vec<Proc>, p: Proc) -> PResult<()> {
    match p.kind {
        ProcKind::Nil => Ok(()),
        ProcKind::Sum(inner) => {
            out.extend(inner);
            Ok(())
        }
        ProcKind::Prefix(..) => {
            out.push(p);
            Ok(())
        }
        _ => Err(Diagnostic::new(
            DiagnosticKind::UnguardedSummand,
            p.span,
            "unguarded summand: every operand of `+` must start with a prefix",
        )),
    }
}

fn mark_vars(p: &mut Proc, vars: &HashSet<String>) {
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

/// Name resolution, arity and value-scope checks over a parsed program.
fn validate(program: &Program) -> Result<(), Diagnostics> {
    let mut errors = Vec::new();
    let mut consts: HashMap<&str, &ConstDef> = HashMap::new();
    for c in &program.constants {
        if consts.insert(&c.name, c).is_some() {
            errors.push(Diagnostic::new(
                DiagnosticKind::Duplicate,
                c.span,
                format!("constant `{}` defined twice", c.name),
            ));
        }
        check_params(&c.params, &mut errors);
    }
    let mut systems: HashMap<&str, &SystemDef> = HashMap::new();
    for s in &program.systems {
        if systems.insert(&s.name, s).is_some() {
            errors.push(Diagnostic::new(
                DiagnosticKind::Duplicate,
                s.span,
                format!("system `{}` defined twice", s.name),
            ));
        }
    }
    let mut candidate_names = HashSet::new();
    for c in &program.candidates {
        if !candidate_names.insert(&c.name) {
            errors.push(Diagnostic::new(
                DiagnosticKind::Duplicate,
                c.span,
                format!("candidate set `{}` defined twice", c.name),
            ));
        }
    }

    let const_arity = |name: &str| consts.get(name).map(|c| c.params.len());
    for c in &program.constants {
        let scope: Vec<String> = c.params.iter().map(|p| p.name.clone()).collect();
        check_proc(&c.body, &scope, &const_arity, &|_| None, &mut errors);
    }
    for s in &program.systems {
        let mut seen = HashSet::new();
        let var_arity: HashMap<&str, usize> = s.equations.iter().map(|e| (e.var.as_str(), e.params.len())).collect();
        if s.equations.is_empty() {
            errors.push(Diagnostic::new(
                DiagnosticKind::Syntax,
                s.span,
                format!("system `{}` has no equations", s.name),
            ));
        }
        for e in &s.equations {
            if !seen.insert(&e.var) {
                errors.push(Diagnostic::new(
                    DiagnosticKind::Duplicate,
                    e.span,
                    format!("variable `{}` has two equations", e.var),
                ));
            }
            if consts.contains_key(e.var.as_str()) {
                errors.push(Diagnostic::new(
                    DiagnosticKind::Duplicate,
                    e.span,
                    format!("variable `{}` shadows a constant of the same name", e.var),
                ));
            }
            check_params(&e.params, &mut errors);
            let scope: Vec<String> = e.params.iter().map(|p| p.name.clone()).collect();
            check_proc(&e.body, &scope, &const_arity, &|v| var_arity.get(v).copied(), &mut errors);
        }
    }
    for c in &program.candidates {
        match systems.get(c.system.as_str()) {
            None => errors.push(Diagnostic::new(
                DiagnosticKind::UnknownSystem,
                c.span,
                format!("unknown system `{}`", c.system),
            )),
            Some(s) => {
                let expected: usize = s
                    .equations
                    .iter()
                    .map(|e| e.params.iter().map(|p| p.domain.size as usize).product::<usize>())
                    .sum();
                if expected != c.tuple.len() {
                    errors.push(Diagnostic::new(
                        DiagnosticKind::ArityMismatch,
                        c.span,
                        format!(
                            "system `{}` has {expected} equations but candidate set `{}` has {} components",
                            s.name,
                            c.name,
                            c.tuple.len()
                        ),
                    ));
                }
            }
        }
        for p in &c.tuple {
            check_proc(p, &[], &const_arity, &|_| None, &mut errors);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Diagnostics(errors))
    }
}

fn check_params(params: &[Param], errors: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for p in params {
        if !seen.insert(&p.name) {
            errors.push(Diagnostic::new(
                DiagnosticKind::Duplicate,
                p.span,
                format!("parameter `{}` declared twice", p.name),
            ));
        }
    }
}

pub(crate) fn check_proc(
    p: &Proc,
    scope: &[String],
    const_arity: &dyn Fn(&str) -> Option<usize>,
    var_arity: &dyn Fn(&str) -> Option<usize>,
    errors: &mut Vec<Diagnostic>,
) {
    let check_values = |exprs: &[ValueExpr], scope: &[String], errors: &mut Vec<Diagnostic>| {
        for e in exprs {
            let mut used = Vec::new();
            e.params(&mut used);
            for u in used {
                if !scope.contains(&u) {
                    errors.push(Diagnostic::new(
                        DiagnosticKind::UnknownValue,
                        e.span,
                        format!("unknown value parameter `{u}`"),
                    ));
                }
            }
        }
    };
    match &p.kind {
        ProcKind::Nil => {}
        ProcKind::Prefix(prefix, cont) => match prefix {
            Prefix::Receive { binder, .. } => {
                let mut inner = scope.to_vec();
                inner.push(binder.clone());
                check_proc(cont, &inner, const_arity, var_arity, errors);
            }
            Prefix::Input(ch) | Prefix::Output(ch) => {
                check_values(&ch.index, scope, errors);
                check_proc(cont, scope, const_arity, var_arity, errors);
            }
            Prefix::Tau => check_proc(cont, scope, const_arity, var_arity, errors),
        },
        ProcKind::Sum(ps) => ps.iter().for_each(|q| check_proc(q, scope, const_arity, var_arity, errors)),
        ProcKind::Par(a, b) => {
            check_proc(a, scope, const_arity, var_arity, errors);
            check_proc(b, scope, const_arity, var_arity, errors);
        }
        ProcKind::Res(_, q) => check_proc(q, scope, const_arity, var_arity, errors),
        ProcKind::Ref { name, args, var } => {
            check_values(args, scope, errors);
            let (arity, what) = if *var {
                (var_arity(name), "variable")
            } else if name.starts_with("#sol.") {
                return;
            } else {
                (const_arity(name), "constant")
            };
            match arity {
                None => errors.push(Diagnostic::new(
                    DiagnosticKind::UnknownConstant,
                    p.span,
                    format!("unknown constant `{name}`"),
                )),
                Some(n) if n != args.len() => errors.push(Diagnostic::new(
                    DiagnosticKind::ArityMismatch,
                    p.span,
                    format!("{what} `{name}` expects {n} argument(s), found {}", args.len()),
                )),
                Some(_) => {}
            }
        }
    }
}
