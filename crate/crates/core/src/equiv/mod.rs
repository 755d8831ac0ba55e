//! Decision procedures on finite LTSs: weak bisimilarity, weak simulation and
//! finite-trace inclusion, plus solution checking for equation systems.

mod hml;
mod partition;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equations::{EquationError, EquationSystem};
use crate::lts::{disjoint_union, explore, saturate, AnnotatedLts, StepError, WeakLts};
use crate::model::Env;
use crate::term::{Action, Term};

pub use hml::Hml;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    WeakBisim,
    WeakSim,
    TraceIncl,
    TraceEq,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::WeakBisim => "weak-bisim",
            Relation::WeakSim => "weak-sim",
            Relation::TraceIncl => "trace-incl",
            Relation::TraceEq => "trace-eq",
        }
    }

    pub fn is_preorder(self) -> bool {
        matches!(self, Relation::WeakSim | Relation::TraceIncl)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a relation name was not accepted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error(
        "infinitary trace relations are not supported: uniqueness of solutions fails for them even without \
         divergences (X = a.0 + a.X has a divergence-free syntactic solution with the infinite trace a a a ..., \
         while the sum over n > 0 of a^n solves it too and has no infinite trace)"
    )]
    Infinitary,
    #[error("unknown relation `{0}` (expected bisim, sim, trace-incl or trace-eq)")]
    Unknown(String),
}

impl FromStr for Relation {
    type Err = RelationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "bisim" | "weak-bisim" => Relation::WeakBisim,
            "sim" | "weak-sim" => Relation::WeakSim,
            "trace-incl" => Relation::TraceIncl,
            "trace-eq" => Relation::TraceEq,
            "inf-trace-incl" | "inf-trace-eq" | "infinitary-trace-incl" | "infinitary-trace-eq" => {
                return Err(RelationError::Infinitary)
            }
            other => return Err(RelationError::Unknown(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// One of the explorations hit its bound.
    UnknownTruncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Lhs,
    Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Witness {
    /// A formula satisfied by `satisfied_by` and not by the other side.
    Formula { formula: Hml, satisfied_by: Side },
    /// A visible trace of `performed_by` that the other side cannot perform.
    Trace { trace: Vec<Action>, performed_by: Side },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Formula { formula, satisfied_by } => {
                write!(f, "{formula} holds for the {} only", side_name(*satisfied_by))
            }
            Witness::Trace { trace, performed_by } => {
                let t: Vec<String> = trace.iter().map(ToString::to_string).collect();
                let t = if t.is_empty() { "(empty)".to_string() } else { t.join(" ") };
                write!(f, "trace `{t}` is performed by the {} only", side_name(*performed_by))
            }
        }
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Lhs => "left-hand side",
        Side::Rhs => "right-hand side",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub lhs_states: usize,
    pub rhs_states: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivResult {
    pub relation: Relation,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub stats: Stats,
}

impl EquivResult {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// Explores both terms with `bound` states each and decides `relation`.
pub fn decide(relation: Relation, p: &Term, q: &Term, env: &Env, bound: usize) -> Result<EquivResult, StepError> {
    let start = Instant::now();
    let a = explore(p, env, bound)?;
    let b = explore(q, env, bound)?;
    let mut r = decide_lts(relation, &a, &b);
    r.stats.elapsed = start.elapsed();
    Ok(r)
}

pub fn weak_bisim(p: &Term, q: &Term, env: &Env, bound: usize) -> Result<EquivResult, StepError> {
    decide(Relation::WeakBisim, p, q, env, bound)
}

pub fn weak_sim(p: &Term, q: &Term, env: &Env, bound: usize) -> Result<EquivResult, StepError> {
    decide(Relation::WeakSim, p, q, env, bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Incl,
    Eq,
}

pub fn trace_relation(p: &Term, q: &Term, mode: TraceMode, env: &Env, bound: usize) -> Result<EquivResult, StepError> {
    let relation = match mode {
        TraceMode::Incl => Relation::TraceIncl,
        TraceMode::Eq => Relation::TraceEq,
    };
    decide(relation, p, q, env, bound)
}

/// Decides `relation` between the initial states of two explored LTSs.
pub fn decide_lts(relation: Relation, a: &AnnotatedLts, b: &AnnotatedLts) -> EquivResult {
    let start = Instant::now();
    let stats = Stats { lhs_states: a.num_states(), rhs_states: b.num_states(), elapsed: Duration::ZERO };
    let (union, offset) = disjoint_union(a, b);
    let Ok(w) = saturate(&union) else {
        return EquivResult { relation, verdict: Verdict::UnknownTruncated, witness: None, stats };
    };
    let (s, t) = (a.initial(), b.initial() + offset);
    let witness = match relation {
        Relation::WeakBisim => bisim_witness(&w, s, t),
        Relation::WeakSim => sim_witness(&w, s, t, offset),
        Relation::TraceIncl => trace_witness(&w, s, t, Side::Lhs),
        Relation::TraceEq => trace_witness(&w, s, t, Side::Lhs).or_else(|| trace_witness(&w, t, s, Side::Rhs)),
    };
    let verdict = if witness.is_some() { Verdict::Fails } else { Verdict::Holds };
    EquivResult { relation, verdict, witness, stats: Stats { elapsed: start.elapsed(), ..stats } }
}

fn bisim_witness(w: &WeakLts, s: usize, t: usize) -> Option<Witness> {
    let history = partition::refine(w.adjacency());
    let blocks = history.stable();
    if blocks[s] == blocks[t] {
        return None;
    }
    let formula = hml::Distinguisher::new(w, &history).distinguish(s, t);
    Some(Witness::Formula { formula, satisfied_by: Side::Lhs })
}

/// Strong bisimilarity of the two initial states, on the transitions as they
/// are (no saturation). Truncated inputs are compared as given.
pub fn strong_bisim(a: &AnnotatedLts, b: &AnnotatedLts) -> bool {
    let (union, offset) = disjoint_union(a, b);
    let mut labels: HashMap<&Action, u32> = HashMap::new();
    let adj: Vec<Vec<(u32, usize)>> = (0..union.num_states())
        .map(|s| {
            union
                .successors(s)
                .iter()
                .map(|t| {
                    let fresh = labels.len() as u32;
                    (*labels.entry(&t.label).or_insert(fresh), t.dst)
                })
                .collect()
        })
        .collect();
    let blocks = partition::refine(&adj);
    let blocks = blocks.stable();
    blocks[a.initial()] == blocks[b.initial() + offset]
}

/// Greatest weak simulation on `lhs × rhs`, computed by removing pairs in
/// rounds; the round of removal drives witness construction.
fn sim_witness(w: &WeakLts, s0: usize, t0: usize, offset: usize) -> Option<Witness> {
    let n = w.num_states();
    let (lhs, rhs) = (0..offset, offset..n);
    let width = rhs.len();
    let idx = |s: usize, t: usize| s * width + (t - offset);
    // removed[idx] = round in which the pair left the relation (0 = still in).
    let mut removed = vec![0u32; lhs.len() * width];
    let mut round = 0;
    loop {
        round += 1;
        let mut changed = false;
        let snapshot = removed.clone();
        let alive = |s: usize, t: usize| snapshot[idx(s, t)] == 0;
        for s in lhs.clone() {
            for t in rhs.clone() {
                if !alive(s, t) {
                    continue;
                }
                let matched = w.weak_edges(s).iter().all(|&(l, s1)| w.hat_successors(t, l).any(|t1| alive(s1, t1)));
                if !matched {
                    removed[idx(s, t)] = round;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    if removed[idx(s0, t0)] == 0 {
        return None;
    }
    let mut memo = HashMap::new();
    let formula = sim_formula(w, &removed, &idx, s0, t0, &mut memo);
    Some(Witness::Formula { formula, satisfied_by: Side::Lhs })
}

/// Negation-free formula true at `s`, false at `t`, for a removed pair.
fn sim_formula(
    w: &WeakLts,
    removed: &[u32],
    idx: &dyn Fn(usize, usize) -> usize,
    s: usize,
    t: usize,
    memo: &mut HashMap<(usize, usize), Hml>,
) -> Hml {
    if let Some(f) = memo.get(&(s, t)) {
        return f.clone();
    }
    let k = removed[idx(s, t)];
    let earlier = |s1: usize, t1: usize| {
        let r = removed[idx(s1, t1)];
        r != 0 && r < k
    };
    let (label, s1) = w
        .weak_edges(s)
        .iter()
        .copied()
        .find(|&(l, s1)| w.hat_successors(t, l).all(|t1| earlier(s1, t1)))
        .expect("a removed pair has an unmatched move");
    let answers: Vec<usize> = w.hat_successors(t, label).collect();
    let parts: BTreeSet<Hml> = answers.into_iter().map(|t1| sim_formula(w, removed, idx, s1, t1, memo)).collect();
    let body = match parts.len() {
        0 => Hml::True,
        1 => parts.into_iter().next().unwrap(),
        _ => Hml::And(parts.into_iter().collect()),
    };
    let f = Hml::Diamond(w.labels()[label as usize].clone(), Box::new(body));
    memo.insert((s, t), f.clone());
    f
}

/// Shortest visible trace of `s` not performed by `t`, via subset
/// construction on `t`'s side with antichain pruning.
fn trace_witness(w: &WeakLts, s: usize, t: usize, performer: Side) -> Option<Witness> {
    let start: Vec<usize> = w.tau_closure(t).to_vec();
    let mut visited: HashMap<usize, Vec<Vec<usize>>> = HashMap::new();
    let mut nodes: Vec<(usize, Vec<usize>, Option<(usize, u32)>)> = vec![(s, start.clone(), None)];
    visited.entry(s).or_default().push(start);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (p, q) = (nodes[i].0, nodes[i].1.clone());
        let mut moves: Vec<(u32, usize)> = w.weak_edges(p).iter().copied().filter(|&(l, _)| l != 0).collect();
        moves.dedup();
        for (label, p1) in moves {
            let mut q1: Vec<usize> = q.iter().flat_map(|&x| w.hat_successors(x, label)).collect();
            q1.sort_unstable();
            q1.dedup();
            if q1.is_empty() {
                let mut trace = vec![w.labels()[label as usize].clone()];
                let mut cur = i;
                while let Some((parent, l)) = nodes[cur].2 {
                    trace.push(w.labels()[l as usize].clone());
                    cur = parent;
                }
                trace.reverse();
                return Some(Witness::Trace { trace, performed_by: performer });
            }
            let seen = visited.entry(p1).or_default();
            if seen.iter().any(|old| is_subset(old, &q1)) {
                continue;
            }
            seen.retain(|old| !is_subset(&q1, old));
            seen.push(q1.clone());
            nodes.push((p1, q1, Some((i, label))));
            queue.push_back(nodes.len() - 1);
        }
    }
    None
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// For each equation, decides `relation` between `P_i` and `E_i[P̃]`.
pub fn check_solution(
    s: &EquationSystem,
    candidates: &[Term],
    relation: Relation,
    env: &Env,
    bound: usize,
) -> Result<Vec<EquivResult>, SolutionError> {
    s.check_candidates(candidates)?;
    let rhs = s.instantiate(candidates)?;
    candidates.iter().zip(&rhs).map(|(p, e)| Ok(decide(relation, p, e, env, bound)?)).collect()
}
