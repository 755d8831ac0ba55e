use super::{Diagnostic, DiagnosticKind, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase identifier: channel, value parameter.
    Lower(String),
    /// Uppercase identifier: constant, variable, system, candidate set.
    Upper(String),
    /// Reference to a generated syntactic-solution constant, `#sol.S.X`.
    Sol(String),
    Int(i64),
    Const,
    System,
    Candidates,
    For,
    New,
    In,
    Tau,
    Dot,
    DotDot,
    Plus,
    Minus,
    Bar,
    Quote,
    Caret,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Lower(s) | Tok::Upper(s) | Tok::Sol(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Const => "const",
            Tok::System => "system",
            Tok::Candidates => "candidates",
            Tok::For => "for",
            Tok::New => "new",
            Tok::In => "in",
            Tok::Tau => "tau",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Bar => "|",
            Tok::Quote => "'",
            Tok::Caret => "^",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Eq => "=",
            _ => "?",
        }
    }
}

pub const KEYWORDS: &[&str] = &["const", "system", "candidates", "for", "new", "in", "tau"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1u32, 0usize);
    let span = |start: usize, end: usize, line: u32, line_start: usize| Span {
        start: start as u32,
        end: end as u32,
        line,
        col: (src[line_start..start].chars().count() + 1) as u32,
    };

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let ident_tail = |j: &mut usize| {
            while *j < bytes.len() && (bytes[*j].is_ascii_alphanumeric() || bytes[*j] == b'_') {
                *j += 1;
            }
        };
        let tok = if c.is_ascii_alphabetic() {
            i += 1;
            ident_tail(&mut i);
            let word = &src[start..i];
            match word {
                "const" => Tok::Const,
                "system" => Tok::System,
                "candidates" => Tok::Candidates,
                "for" => Tok::For,
                "new" => Tok::New,
                "in" => Tok::In,
                "tau" => Tok::Tau,
                w if c.is_ascii_uppercase() => Tok::Upper(w.to_string()),
                w => Tok::Lower(w.to_string()),
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            let n = text.parse::<i64>().map_err(|_| {
                Diagnostic::new(
                    DiagnosticKind::Lexical,
                    span(start, i, line, line_start),
                    format!("integer literal `{text}` out of range"),
                )
            })?;
            Tok::Int(n)
        } else if src[i..].starts_with("#sol.") {
            i += 5;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || b"_^.".contains(&bytes[i])) {
                i += 1;
            }
            Tok::Sol(src[start..i].to_string())
        } else {
            i += 1;
            match c {
                b'.' if bytes.get(i) == Some(&b'.') => {
                    i += 1;
                    Tok::DotDot
                }
                b'.' => Tok::Dot,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'|' => Tok::Bar,
                b'\'' => Tok::Quote,
                b'^' => Tok::Caret,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'<' => Tok::LAngle,
                b'>' => Tok::RAngle,
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b',' => Tok::Comma,
                b';' => Tok::Semi,
                b':' => Tok::Colon,
                b'=' => Tok::Eq,
                _ => {
                    let ch = src[start..].chars().next().unwrap();
                    return Err(Diagnostic::new(
                        DiagnosticKind::Lexical,
                        span(start, start + ch.len_utf8(), line, line_start),
                        format!("unexpected character `{ch}`"),
                    ));
                }
            }
        };
        out.push(Token { tok, span: span(start, i, line, line_start) });
    }
    out.push(Token { tok: Tok::Eof, span: span(i, i, line, line_start) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_prefixes_and_comments() {
        assert_eq!(
            toks("'a.0 -- trailing\n| tau.K"),
            vec![
                Tok::Quote,
                Tok::Lower("a".into()),
                Tok::Dot,
                Tok::Int(0),
                Tok::Bar,
                Tok::Tau,
                Tok::Dot,
                Tok::Upper("K".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn lexes_domains_and_solution_refs() {
        assert_eq!(toks("0..3")[..3], [Tok::Int(0), Tok::DotDot, Tok::Int(3)]);
        assert_eq!(toks("#sol.S^2.X")[0], Tok::Sol("#sol.S^2.X".into()));
    }

    #[test]
    fn reports_location_of_bad_character() {
        let err = tokenize("const K =\n  a.0 $").unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::Lexical);
        let span = err.span.unwrap();
        assert_eq!((span.line, span.col), (2, 7));
    }
}
