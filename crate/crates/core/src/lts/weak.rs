use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use super::{AnnotatedLts, StateId};
use crate::term::Action;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SaturateError {
    #[error("cannot saturate an LTS truncated at {limit} states")]
    Truncated { limit: usize },
}

/// Weak transitions of a complete LTS.
///
/// Label `0` is `tau`. The stored edges are `⇒μ̂`: for a visible `μ` that is
/// `⇒ →μ ⇒`, for `tau` it is the reflexive-transitive closure `⇒`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakLts {
    labels: Vec<Action>,
    closure: Vec<Vec<StateId>>,
    tau_edges: Vec<Vec<StateId>>,
    weak: Vec<Vec<(u32, StateId)>>,
    initial: StateId,
}

impl WeakLts {
    pub fn num_states(&self) -> usize {
        self.closure.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// Interned labels; index 0 is `tau`.
    pub fn labels(&self) -> &[Action] {
        &self.labels
    }

    pub fn label_index(&self, a: &Action) -> Option<u32> {
        self.labels.iter().position(|l| l == a).map(|i| i as u32)
    }

    /// States reachable by zero or more `tau` steps, sorted, including `s`.
    pub fn tau_closure(&self, s: StateId) -> &[StateId] {
        &self.closure[s]
    }

    /// `⇒μ̂` edges from `s` as `(label index, target)`, sorted.
    pub fn weak_edges(&self, s: StateId) -> &[(u32, StateId)] {
        &self.weak[s]
    }

    /// All `⇒μ̂` edges, indexed by source.
    pub(crate) fn adjacency(&self) -> &[Vec<(u32, StateId)>] {
        &self.weak
    }

    /// Targets of `s ⇒μ̂`.
    pub fn hat_successors(&self, s: StateId, label: u32) -> impl Iterator<Item = StateId> + '_ {
        let edges = &self.weak[s];
        let start = edges.partition_point(|&(l, _)| l < label);
        edges[start..].iter().take_while(move |&&(l, _)| l == label).map(|&(_, t)| t)
    }

    /// Targets of `s ⇒μ s'`; differs from [`Self::hat_successors`] only for
    /// `tau`, where at least one step is required.
    pub fn strict_successors(&self, s: StateId, label: u32) -> Vec<StateId> {
        if label != 0 {
            return self.hat_successors(s, label).collect();
        }
        let mut out: Vec<StateId> = self.closure[s]
            .iter()
            .flat_map(|&s1| self.tau_edges[s1].iter())
            .flat_map(|&s2| self.closure[s2].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Builds the weak transition relation. Truncated input is refused, since
/// missing edges would make weak moves disappear.
pub fn saturate(l: &AnnotatedLts) -> Result<WeakLts, SaturateError> {
    if let super::Completeness::Truncated { limit } = l.completeness() {
        return Err(SaturateError::Truncated { limit });
    }
    let n = l.num_states();
    let mut label_ids: BTreeMap<Action, u32> = BTreeMap::new();
    for t in l.transitions().filter(|t| !t.label.is_tau()) {
        label_ids.entry(t.label.clone()).or_insert(0);
    }
    let mut labels = vec![Action::Tau];
    for (i, (a, id)) in label_ids.iter_mut().enumerate() {
        *id = i as u32 + 1;
        labels.push(a.clone());
    }

    let tau_edges: Vec<Vec<StateId>> = (0..n)
        .map(|s| {
            let mut v: Vec<StateId> = l.successors(s).iter().filter(|t| t.label.is_tau()).map(|t| t.dst).collect();
            v.dedup();
            v
        })
        .collect();

    let mut closure = Vec::with_capacity(n);
    let mut seen = vec![usize::MAX; n];
    for s in 0..n {
        let mut reach = vec![s];
        seen[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &tau_edges[u] {
                if seen[v] != s {
                    seen[v] = s;
                    reach.push(v);
                    queue.push_back(v);
                }
            }
        }
        reach.sort_unstable();
        closure.push(reach);
    }

    let mut weak = Vec::with_capacity(n);
    for s in 0..n {
        let mut edges: Vec<(u32, StateId)> = closure[s].iter().map(|&t| (0, t)).collect();
        for &s1 in &closure[s] {
            for t in l.successors(s1).iter().filter(|t| !t.label.is_tau()) {
                let id = label_ids[&t.label];
                edges.extend(closure[t.dst].iter().map(|&s3| (id, s3)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        weak.push(edges);
    }
    Ok(WeakLts { labels, closure, tau_edges, weak, initial: l.initial() })
}
