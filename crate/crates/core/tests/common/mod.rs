//! Oracles and generators shared by the integration tests. The oracles work
//! from the explicit transition lists only and use none of the library's
//! saturation, partition refinement or SCC code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use usol::divergence::DivergenceClass;
use usol::lts::AnnotatedLts;
use usol::term::Action;

/// States reachable from `s` by zero or more `tau` edges.
pub fn tau_star(l: &AnnotatedLts, s: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([s]);
    let mut stack = vec![s];
    while let Some(u) = stack.pop() {
        for t in l.successors(u) {
            if t.label.is_tau() && seen.insert(t.dst) {
                stack.push(t.dst);
            }
        }
    }
    seen
}

/// All `(μ, s')` with `s ⇒μ̂ s'`, found by path search: `tau*` for `tau`
/// (including `s` itself), `tau* μ tau*` otherwise.
pub fn weak_moves(l: &AnnotatedLts, s: usize) -> BTreeSet<(Action, usize)> {
    let mut out = BTreeSet::new();
    let before = tau_star(l, s);
    for &u in &before {
        out.insert((Action::Tau, u));
        for t in l.successors(u) {
            if !t.label.is_tau() {
                for v in tau_star(l, t.dst) {
                    out.insert((t.label.clone(), v));
                }
            }
        }
    }
    out
}

fn greatest_fixpoint(
    na: usize,
    nb: usize,
    moves_a: &[BTreeSet<(Action, usize)>],
    moves_b: &[BTreeSet<(Action, usize)>],
) -> Vec<Vec<bool>> {
    let mut rel = vec![vec![true; nb]; na];
    loop {
        let mut changed = false;
        for s in 0..na {
            for t in 0..nb {
                if !rel[s][t] {
                    continue;
                }
                let fwd = moves_a[s].iter().all(|(m, s1)| moves_b[t].iter().any(|(n, t1)| m == n && rel[*s1][*t1]));
                let bwd = moves_b[t].iter().all(|(n, t1)| moves_a[s].iter().any(|(m, s1)| m == n && rel[*s1][*t1]));
                if !(fwd && bwd) {
                    rel[s][t] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

/// Weak bisimilarity of the initial states as the greatest fixed point over
/// all state pairs, on weak moves found by path search.
pub fn naive_weak_bisim(a: &AnnotatedLts, b: &AnnotatedLts) -> bool {
    let ma: Vec<_> = (0..a.num_states()).map(|s| weak_moves(a, s)).collect();
    let mb: Vec<_> = (0..b.num_states()).map(|s| weak_moves(b, s)).collect();
    greatest_fixpoint(a.num_states(), b.num_states(), &ma, &mb)[a.initial()][b.initial()]
}

/// Strong bisimilarity of the initial states, same fixed point on plain edges.
pub fn naive_strong_bisim(a: &AnnotatedLts, b: &AnnotatedLts) -> bool {
    let edges = |l: &AnnotatedLts| -> Vec<BTreeSet<(Action, usize)>> {
        (0..l.num_states()).map(|s| l.successors(s).iter().map(|t| (t.label.clone(), t.dst)).collect()).collect()
    };
    greatest_fixpoint(a.num_states(), b.num_states(), &edges(a), &edges(b))[a.initial()][b.initial()]
}

/// Visible traces of length at most `k`, by enumeration of weak moves.
pub fn traces_up_to(l: &AnnotatedLts, k: usize) -> BTreeSet<Vec<Action>> {
    let mut out = BTreeSet::new();
    let mut frontier: HashSet<(Vec<Action>, usize)> = HashSet::from([(Vec::new(), l.initial())]);
    out.insert(Vec::new());
    for _ in 0..k {
        let mut next = HashSet::new();
        for (trace, s) in &frontier {
            for (m, s1) in weak_moves(l, *s) {
                if !m.is_tau() {
                    let mut t = trace.clone();
                    t.push(m);
                    out.insert(t.clone());
                    next.insert((t, s1));
                }
            }
        }
        frontier = next;
    }
    out
}

/// Divergence class by brute force: a `tau` edge `u -> v` lies on a `tau`
/// cycle iff `u` is reachable from `v` by `tau` edges.
pub fn brute_force_class(l: &AnnotatedLts) -> DivergenceClass {
    let mut any_cycle = false;
    let mut annotated = false;
    let reachable = bfs_depths(l);
    for u in (0..l.num_states()).filter(|&u| reachable[u].is_some()) {
        for t in l.successors(u) {
            if t.label.is_tau() && tau_star(l, t.dst).contains(&u) {
                any_cycle = true;
                annotated |= t.count > 0;
            }
        }
    }
    match (annotated, any_cycle, l.is_complete()) {
        (true, _, _) => DivergenceClass::NonInnocuous,
        (false, _, false) => DivergenceClass::UnknownTruncated,
        (false, true, true) => DivergenceClass::AllInnocuous,
        (false, false, true) => DivergenceClass::DivergenceFree,
    }
}

/// Mutual `tau` reachability.
pub fn same_tau_component(l: &AnnotatedLts, u: usize, v: usize) -> bool {
    tau_star(l, u).contains(&v) && tau_star(l, v).contains(&u)
}

/// Shortest path lengths over all edges from the initial state.
pub fn bfs_depths(l: &AnnotatedLts) -> Vec<Option<usize>> {
    let mut d = vec![None; l.num_states()];
    d[l.initial()] = Some(0);
    let mut q = VecDeque::from([l.initial()]);
    while let Some(u) = q.pop_front() {
        for t in l.successors(u) {
            if d[t.dst].is_none() {
                d[t.dst] = Some(d[u].unwrap() + 1);
                q.push_back(t.dst);
            }
        }
    }
    d
}

pub const ACTIONS: [&str; 5] = ["a", "'a", "b", "'b", "tau"];

/// Constants available to generated terms.
pub const PRELUDE: &str = "const P = a.P;\nconst Q = tau.b.Q;\nconst W = tau.W;\nconst U = a.new b in ('b.0 | b.U);\n";

/// A random closed term over the names `a` and `b`, as program text.
pub fn random_proc(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 {
        return ["0", "0", "P", "Q", "W", "U"].choose(rng).unwrap().to_string();
    }
    match rng.gen_range(0..10) {
        0 => "0".into(),
        1..=3 => format!("{}.{}", ACTIONS.choose(rng).unwrap(), random_proc(rng, depth - 1)),
        4 | 5 => format!(
            "({}.{} + {}.{})",
            ACTIONS.choose(rng).unwrap(),
            random_proc(rng, depth - 1),
            ACTIONS.choose(rng).unwrap(),
            random_proc(rng, depth - 1)
        ),
        6 | 7 => format!("({} | {})", random_proc(rng, depth - 1), random_proc(rng, depth - 1)),
        8 => format!("new {} in ({})", ["a", "b"].choose(rng).unwrap(), random_proc(rng, depth - 1)),
        _ => ["P", "Q", "W", "U"].choose(rng).unwrap().to_string(),
    }
}

/// Every term with at most two prefixes built from `0` and `W` (a `tau`
/// loop) by prefixing with the actions over `a` and `b`, binary sum,
/// binary parallel composition and one restriction of `a` at the top.
pub fn enumerated_family() -> Vec<String> {
    let leaves = ["0", "W"];
    let one: Vec<String> = ACTIONS.iter().flat_map(|mu| leaves.iter().map(move |l| format!("{mu}.{l}"))).collect();
    let mut two: Vec<String> = Vec::new();
    for mu in ACTIONS {
        for x in &one {
            two.push(format!("{mu}.{x}"));
        }
    }
    for (i, x) in one.iter().enumerate() {
        for y in &one[i..] {
            if x != y {
                two.push(format!("{x} + {y}"));
            }
            two.push(format!("{x} | {y}"));
        }
    }
    let mut family: Vec<String> = leaves.iter().map(ToString::to_string).collect();
    family.extend(one.iter().cloned());
    family.extend(two.iter().cloned());
    for t in one.iter().chain(&two) {
        if t.replace("tau", "").contains('a') {
            family.push(format!("new a in ({t})"));
        }
    }
    family.sort();
    family.dedup();
    family
}

/// A random system over `X` and `Y`. Variable occurrences sit anywhere a
/// process can, except directly as summands.
pub fn random_system(rng: &mut ChaCha8Rng, depth: u32) -> String {
    format!("system S {{ X = {}; Y = {}; }}", random_body(rng, depth), random_body(rng, depth))
}

fn random_body(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 {
        return ["0", "X", "Y", "P"].choose(rng).unwrap().to_string();
    }
    match rng.gen_range(0..8) {
        0 => ["X", "Y"].choose(rng).unwrap().to_string(),
        1..=3 => format!("{}.{}", ACTIONS.choose(rng).unwrap(), random_body(rng, depth - 1)),
        4 => format!(
            "({}.{} + {}.{})",
            ACTIONS.choose(rng).unwrap(),
            random_body(rng, depth - 1),
            ACTIONS.choose(rng).unwrap(),
            random_body(rng, depth - 1)
        ),
        5 | 6 => format!("({} | {})", random_body(rng, depth - 1), random_body(rng, depth - 1)),
        _ => format!("new b in ({})", random_body(rng, depth - 1)),
    }
}

/// A random system in which every variable occurrence is directly under an
/// `a` or `b` prefix and neither `'a` nor `'b` occurs, so the syntactic
/// criterion holds at depth 1. `c` and `'c` may synchronise freely.
pub fn random_criterion_system(rng: &mut ChaCha8Rng, depth: u32) -> String {
    format!("system S {{ X = {}; Y = {}; }}", criterion_body(rng, depth, true), criterion_body(rng, depth, true))
}

fn criterion_body(rng: &mut ChaCha8Rng, depth: u32, top: bool) -> String {
    const FREE: [&str; 5] = ["tau", "c", "'c", "a", "b"];
    let guarded_var =
        |rng: &mut ChaCha8Rng| format!("{}.{}", ["a", "b"].choose(rng).unwrap(), ["X", "Y"].choose(rng).unwrap());
    if depth == 0 {
        return if rng.gen_bool(0.6) { guarded_var(rng) } else { "0".into() };
    }
    match rng.gen_range(0..7) {
        0 | 1 => guarded_var(rng),
        2 | 3 => format!("{}.{}", FREE.choose(rng).unwrap(), criterion_body(rng, depth - 1, false)),
        4 => format!(
            "({}.{} + {}.{})",
            FREE.choose(rng).unwrap(),
            criterion_body(rng, depth - 1, false),
            FREE.choose(rng).unwrap(),
            criterion_body(rng, depth - 1, false)
        ),
        5 => format!("({} | {})", criterion_body(rng, depth - 1, false), criterion_body(rng, depth - 1, false)),
        _ if top => format!("new c in ({})", criterion_body(rng, depth - 1, false)),
        _ => "0".into(),
    }
}

/// Exploration with the exact step relation and no normalisation: states
/// are terms as the rules produce them.
pub fn raw_explore(p: &usol::term::Term, env: &usol::model::Env, limit: usize) -> Option<AnnotatedLts> {
    use std::collections::HashMap;
    use usol::lts::{step, Completeness, Transition};
    let mut index: HashMap<usol::term::Term, usize> = HashMap::from([(p.clone(), 0)]);
    let mut states = vec![p.clone()];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < states.len() {
        for m in step(&states[i], env).ok()? {
            let dst = match index.get(&m.target) {
                Some(&d) => d,
                None => {
                    if states.len() >= limit {
                        return None;
                    }
                    index.insert(m.target.clone(), states.len());
                    states.push(m.target.clone());
                    states.len() - 1
                }
            };
            edges.push(Transition { src: i, label: m.label, dst, count: m.count });
        }
        i += 1;
    }
    Some(AnnotatedLts::from_parts(states.len(), 0, edges, Completeness::Complete))
}

/// A random complete LTS on `n` states: mostly `tau` edges, some annotated.
pub fn random_lts(rng: &mut ChaCha8Rng, n: usize) -> AnnotatedLts {
    use usol::lts::{Completeness, Transition};
    let labels = [Action::Tau, Action::Tau, Action::parse("a").unwrap()];
    let m = rng.gen_range(n / 2..=n + n / 2);
    let edges: Vec<Transition> = (0..m)
        .map(|_| Transition {
            src: rng.gen_range(0..n),
            label: labels.choose(rng).unwrap().clone(),
            dst: rng.gen_range(0..n),
            count: if rng.gen_bool(0.2) { rng.gen_range(1..3) } else { 0 },
        })
        .collect();
    AnnotatedLts::from_parts(n, 0, edges, Completeness::Complete)
}
