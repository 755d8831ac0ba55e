//! Explicit labelled transition systems with constant-unfolding annotations.

mod canon;
mod export;
mod step;
mod weak;

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::model::Env;
use crate::term::{Action, ConstName, Term};

pub use canon::canonicalize;
pub use export::{to_dot, to_json};
pub use step::{step, Move, StepError};
pub use weak::{saturate, SaturateError, WeakLts};

pub type StateId = usize;

/// Default bound on explored states.
pub const DEFAULT_MAX_STATES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Transition {
    pub src: StateId,
    pub label: Action,
    pub dst: StateId,
    /// Uses of the constant rule on syntactic-solution constants.
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Completeness {
    Complete,
    /// Exploration stopped at `limit` states; transitions leading outside the
    /// explored fragment are missing.
    Truncated {
        limit: usize,
    },
}

/// The reachable fragment of a term's transition graph.
///
/// States are numbered in breadth-first discovery order, with successors
/// visited in sorted order, so numbering is reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedLts {
    states: Vec<Term>,
    out: Vec<Vec<Transition>>,
    initial: StateId,
    completeness: Completeness,
}

impl AnnotatedLts {
    /// An LTS given directly by its edges. States are named `#s0`, `#s1`, ...
    pub fn from_parts(
        num_states: usize,
        initial: StateId,
        transitions: impl IntoIterator<Item = Transition>,
        completeness: Completeness,
    ) -> Self {
        assert!(initial < num_states, "initial state out of range");
        let states = (0..num_states).map(|i| Term::Const(ConstName::generated(format!("#s{i}")))).collect();
        let mut out = vec![Vec::new(); num_states];
        for t in transitions {
            assert!(t.src < num_states && t.dst < num_states, "transition endpoint out of range");
            out[t.src].push(t);
        }
        for edges in &mut out {
            edges.sort();
            edges.dedup();
        }
        AnnotatedLts { states, out, initial, completeness }
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn state(&self, id: StateId) -> &Term {
        &self.states[id]
    }

    pub fn states(&self) -> &[Term] {
        &self.states
    }

    pub fn completeness(&self) -> Completeness {
        self.completeness
    }

    pub fn is_complete(&self) -> bool {
        self.completeness == Completeness::Complete
    }

    pub fn successors(&self, id: StateId) -> &[Transition] {
        &self.out[id]
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.out.iter().flatten()
    }

    /// Looks up the id of a canonical term.
    pub fn find(&self, term: &Term) -> Option<StateId> {
        self.states.iter().position(|s| s == term)
    }
}

/// Breadth-first exploration of the states reachable from `p`, up to `limit`
/// states. Reaching the limit yields a truncated LTS, not an error.
pub fn explore(p: &Term, env: &Env, limit: usize) -> Result<AnnotatedLts, StepError> {
    assert!(limit >= 1, "exploration limit must be positive");
    let root = canonicalize(p, env);
    let mut states = vec![root.clone()];
    let mut index: HashMap<Term, StateId> = HashMap::from([(root, 0)]);
    let mut out: Vec<Vec<Transition>> = Vec::new();
    let mut truncated = false;
    let mut queue = VecDeque::from([0]);

    while let Some(src) = queue.pop_front() {
        let mut succ: Vec<(Action, Term, u32)> = step::step_up_to_ac(&states[src], env)?
            .into_iter()
            .map(|m| (m.label, canon::canonicalize_owned(m.target, env), m.count))
            .collect();
        succ.sort();
        succ.dedup();
        let mut edges = Vec::with_capacity(succ.len());
        for (label, target, count) in succ {
            let dst = match index.get(&target) {
                Some(&id) => id,
                None if states.len() >= limit => {
                    truncated = true;
                    continue;
                }
                None => {
                    let id = states.len();
                    index.insert(target.clone(), id);
                    states.push(target);
                    queue.push_back(id);
                    id
                }
            };
            edges.push(Transition { src, label, dst, count });
        }
        edges.sort();
        edges.dedup();
        out.push(edges);
    }
    let completeness = if truncated { Completeness::Truncated { limit } } else { Completeness::Complete };
    Ok(AnnotatedLts { states, out, initial: 0, completeness })
}

/// Two LTSs side by side; the second one's ids are shifted by the returned
/// offset. The result's initial state is the first LTS's.
pub fn disjoint_union(a: &AnnotatedLts, b: &AnnotatedLts) -> (AnnotatedLts, StateId) {
    let offset = a.num_states();
    let mut states = a.states.clone();
    states.extend(b.states.iter().cloned());
    let mut out = a.out.clone();
    out.extend(b.out.iter().map(|edges| {
        edges.iter().map(|t| Transition { src: t.src + offset, dst: t.dst + offset, ..t.clone() }).collect()
    }));
    let completeness = match (a.completeness, b.completeness) {
        (Completeness::Complete, Completeness::Complete) => Completeness::Complete,
        (Completeness::Truncated { limit }, _) | (_, Completeness::Truncated { limit }) => {
            Completeness::Truncated { limit }
        }
    };
    (AnnotatedLts { states, out, initial: a.initial, completeness }, offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    #[test]
    fn linear_term() {
        let m = Model::from_source("").unwrap();
        let l = explore(&m.parse_term("a.b.0").unwrap(), &m.env, 100).unwrap();
        assert_eq!((l.num_states(), l.num_transitions(), l.is_complete()), (3, 2, true));
    }

    #[test]
    fn nil_is_one_state() {
        let m = Model::from_source("").unwrap();
        let l = explore(&Term::Nil, &m.env, 1).unwrap();
        assert_eq!((l.num_states(), l.num_transitions(), l.is_complete()), (1, 0, true));
    }

    #[test]
    fn solution_constant_is_a_self_loop() {
        let m = Model::from_source("system S { X = a.X; }").unwrap();
        let l = explore(&m.parse_term("#sol.S.X").unwrap(), &m.env, 100).unwrap();
        assert_eq!(l.num_states(), 1);
        let t: Vec<_> = l.transitions().collect();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].src, t[0].dst, t[0].count, t[0].label.to_string()), (0, 0, 1, "a".to_string()));
    }

    #[test]
    fn growing_parallel_copies_truncate() {
        let m = Model::from_source("system S { X = a.X + 'a.X + d.(X | X); }").unwrap();
        let l = explore(&m.parse_term("#sol.S.X").unwrap(), &m.env, 50).unwrap();
        assert_eq!(l.completeness(), Completeness::Truncated { limit: 50 });
        assert_eq!(l.num_states(), 50);
        assert_eq!(l.state(1).to_string(), "#sol.S.X | #sol.S.X");
    }

    #[test]
    fn exploration_is_deterministic() {
        let m = Model::from_source("const P = a.P + b.(P | c.0);").unwrap();
        let p = m.parse_term("P | 'a.0").unwrap();
        assert_eq!(explore(&p, &m.env, 200).unwrap(), explore(&p, &m.env, 200).unwrap());
    }

    #[test]
    fn union_shifts_ids() {
        let m = Model::from_source("").unwrap();
        let a = explore(&m.parse_term("a.0").unwrap(), &m.env, 10).unwrap();
        let b = explore(&m.parse_term("b.c.0").unwrap(), &m.env, 10).unwrap();
        let (u, off) = disjoint_union(&a, &b);
        assert_eq!((off, u.num_states(), u.num_transitions()), (2, 5, 3));
        assert_eq!(u.successors(off)[0].dst, off + 1);
    }
}
