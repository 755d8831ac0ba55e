//! Concrete syntax: lexer, parser, pretty-printer and value desugaring.

pub mod ast;
mod desugar;
mod diag;
mod lexer;
mod parser;
mod pretty;

pub(crate) use desugar::{desugar_term, desugar_with_families};
pub use desugar::{desugar_values, Signatures, ValueFamilies};
pub use diag::{Diagnostic, DiagnosticKind, Diagnostics, Span};
pub use lexer::is_keyword;
pub use parser::{parse_proc, parse_program};
pub use pretty::pretty_print;
