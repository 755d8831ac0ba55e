use std::fmt::Write;

use serde::Serialize;

use super::{AnnotatedLts, StateId};

/// Graphviz rendering. States are labelled by their term, `tau` edges are
/// dashed and annotated edges carry a `[k]` suffix.
pub fn to_dot(l: &AnnotatedLts) -> String {
    let mut out = String::from("digraph lts {\n  node [shape=box];\n  start [shape=point];\n");
    for (id, term) in l.states().iter().enumerate() {
        let _ = writeln!(out, "  s{id} [label=\"{}\"];", escape(&term.to_string()));
    }
    let _ = writeln!(out, "  start -> s{};", l.initial());
    for t in l.transitions() {
        let mut label = t.label.to_string();
        if t.count > 0 {
            let _ = write!(label, " [{}]", t.count);
        }
        let style = if t.label.is_tau() { ", style=dashed" } else { "" };
        let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"{style}];", t.src, t.dst, escape(&label));
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Serialize)]
struct JsonLts {
    states: Vec<String>,
    transitions: Vec<JsonTransition>,
    initial: StateId,
    complete: bool,
}

#[derive(Serialize)]
struct JsonTransition {
    src: StateId,
    label: String,
    dst: StateId,
    count: u32,
}

pub fn to_json(l: &AnnotatedLts) -> String {
    let doc = JsonLts {
        states: l.states().iter().map(ToString::to_string).collect(),
        transitions: l
            .transitions()
            .map(|t| JsonTransition { src: t.src, label: t.label.to_string(), dst: t.dst, count: t.count })
            .collect(),
        initial: l.initial(),
        complete: l.is_complete(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serialises")
}
