//! Divergences of syntactic solutions and whether they are innocuous.
//!
//! On a finite graph an infinite `tau` path that unfolds solution constants
//! infinitely often must go around a `tau` cycle containing an annotated edge,
//! so innocuousness reduces to a check on strongly connected components.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::equations::{unfold, EquationSystem, SyntacticSolution};
use crate::lts::{explore, AnnotatedLts, StateId, StepError};
use crate::model::Env;
use crate::term::{Action, Term, VarName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceClass {
    DivergenceFree,
    AllInnocuous,
    NonInnocuous,
    UnknownTruncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    CompleteExploration,
    WitnessFound,
    SyntacticCriterion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LassoStep {
    pub src: StateId,
    pub label: Action,
    pub dst: StateId,
    pub count: u32,
    /// Term of `src`.
    pub from: String,
    /// Term of `dst`.
    pub to: String,
}

/// A path from the initial state followed by a `tau` cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lasso {
    pub prefix: Vec<LassoStep>,
    pub cycle: Vec<LassoStep>,
}

impl Lasso {
    pub fn is_annotated(&self) -> bool {
        self.cycle.iter().any(|s| s.count > 0)
    }

    pub fn prefix_labels(&self) -> Vec<Action> {
        self.prefix.iter().map(|s| s.label.clone()).collect()
    }
}

/// Strongly connected components of the `tau` edges, by Tarjan's algorithm
/// (iterative). Returns the component of every state; component ids are in
/// reverse topological order.
pub fn tau_sccs(l: &AnnotatedLts) -> Vec<usize> {
    let n = l.num_states();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    let tau_succ = |s: StateId| l.successors(s).iter().filter(|t| t.label.is_tau()).map(|t| t.dst);

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (state, position in its successor list)
        let mut call: Vec<(StateId, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(w) = tau_succ(v).nth(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// States lying on some `tau` cycle, and annotated `tau` edges on a cycle.
struct CycleInfo {
    comp: Vec<usize>,
    cyclic: Vec<bool>,
    annotated: Vec<(StateId, StateId)>,
}

fn cycle_info(l: &AnnotatedLts) -> CycleInfo {
    let comp = tau_sccs(l);
    let n = l.num_states();
    let mut size = vec![0usize; n];
    for &c in &comp {
        size[c] += 1;
    }
    let mut comp_cyclic = vec![false; n];
    let mut annotated = Vec::new();
    for t in l.transitions().filter(|t| t.label.is_tau() && comp[t.src] == comp[t.dst]) {
        comp_cyclic[comp[t.src]] = true;
        if t.count > 0 {
            annotated.push((t.src, t.dst));
        }
    }
    let cyclic = (0..n).map(|s| comp_cyclic[comp[s]] || size[comp[s]] > 1).collect();
    CycleInfo { comp, cyclic, annotated }
}

/// Breadth-first distances and parent edges from the initial state.
fn bfs_tree(l: &AnnotatedLts) -> Vec<Option<(usize, Option<usize>)>> {
    // tree[s] = (distance, index of parent transition in the flattened order)
    let mut tree = vec![None; l.num_states()];
    tree[l.initial()] = Some((0, None));
    let edges: Vec<_> = l.transitions().collect();
    let mut first_edge = vec![0; l.num_states() + 1];
    for s in 0..l.num_states() {
        first_edge[s + 1] = first_edge[s] + l.successors(s).len();
    }
    let mut queue = VecDeque::from([l.initial()]);
    while let Some(s) = queue.pop_front() {
        let d = tree[s].unwrap().0;
        for e in first_edge[s]..first_edge[s + 1] {
            let dst = edges[e].dst;
            if tree[dst].is_none() {
                tree[dst] = Some((d + 1, Some(e)));
                queue.push_back(dst);
            }
        }
    }
    tree
}

fn step_of(l: &AnnotatedLts, t: &crate::lts::Transition) -> LassoStep {
    LassoStep {
        src: t.src,
        label: t.label.clone(),
        dst: t.dst,
        count: t.count,
        from: l.state(t.src).to_string(),
        to: l.state(t.dst).to_string(),
    }
}

/// Shortest path of `tau` edges inside component `c` from `from` to `to`;
/// at least one edge when `from == to`.
fn tau_path(l: &AnnotatedLts, comp: &[usize], from: StateId, to: StateId) -> Vec<crate::lts::Transition> {
    let c = comp[from];
    let mut parent: Vec<Option<crate::lts::Transition>> = vec![None; l.num_states()];
    let mut queue = VecDeque::from([from]);
    let mut visited = vec![false; l.num_states()];
    while let Some(s) = queue.pop_front() {
        for t in l.successors(s).iter().filter(|t| t.label.is_tau() && comp[t.dst] == c) {
            if t.dst == to {
                let mut path = vec![t.clone()];
                let mut cur = s;
                while cur != from {
                    let p = parent[cur].clone().expect("path recorded");
                    cur = p.src;
                    path.push(p);
                }
                path.reverse();
                return path;
            }
            if !visited[t.dst] && t.dst != from {
                visited[t.dst] = true;
                parent[t.dst] = Some(t.clone());
                queue.push_back(t.dst);
            }
        }
    }
    unreachable!("states of a cyclic component are mutually reachable")
}

/// A reachable divergence: shortest prefix to a state on a `tau` cycle, then
/// the cycle. Cycles through an annotated edge are preferred.
pub fn find_divergence_witness(l: &AnnotatedLts) -> Option<Lasso> {
    let info = cycle_info(l);
    let tree = bfs_tree(l);
    let dist = |s: StateId| tree[s].map(|(d, _)| d);

    // Closest component with an annotated edge, entered at its closest state.
    let comps: BTreeSet<usize> = info.annotated.iter().map(|&(u, _)| info.comp[u]).collect();
    let closest = |keep: &dyn Fn(StateId) -> bool| {
        (0..l.num_states()).filter(|&s| keep(s)).filter_map(|s| dist(s).map(|d| (d, s))).min().map(|(_, s)| s)
    };
    let (entry, cycle) = if let Some(entry) = closest(&|s| comps.contains(&info.comp[s])) {
        let c = info.comp[entry];
        let &(u, v) = info.annotated.iter().find(|&&(u, _)| info.comp[u] == c).unwrap();
        let edge = l
            .successors(u)
            .iter()
            .filter(|t| t.label.is_tau() && t.dst == v && t.count > 0)
            .max_by_key(|t| t.count)
            .unwrap()
            .clone();
        let mut cycle = if entry == u { Vec::new() } else { tau_path(l, &info.comp, entry, u) };
        cycle.push(edge);
        if v != entry {
            cycle.extend(tau_path(l, &info.comp, v, entry));
        }
        (entry, cycle)
    } else {
        let entry = closest(&|s| info.cyclic[s])?;
        (entry, tau_path(l, &info.comp, entry, entry))
    };

    let edges: Vec<_> = l.transitions().collect();
    let mut prefix = Vec::new();
    let mut cur = entry;
    while let Some((_, Some(e))) = tree[cur] {
        prefix.push(step_of(l, edges[e]));
        cur = edges[e].src;
    }
    prefix.reverse();
    Some(Lasso { prefix, cycle: cycle.iter().map(|t| step_of(l, t)).collect() })
}

/// Classification of a single explored LTS.
pub fn classify_lts(l: &AnnotatedLts) -> (DivergenceClass, Option<Lasso>) {
    let witness = find_divergence_witness(l);
    let class = match (&witness, l.is_complete()) {
        (Some(w), _) if w.is_annotated() => DivergenceClass::NonInnocuous,
        (Some(_), true) => DivergenceClass::AllInnocuous,
        (None, true) => DivergenceClass::DivergenceFree,
        (_, false) => DivergenceClass::UnknownTruncated,
    };
    (class, witness)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExploredConstant {
    pub constant: String,
    pub states: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivergenceReport {
    pub class: DivergenceClass,
    /// `None` for an unknown class.
    pub basis: Option<Basis>,
    /// Index of the equation whose solution constant the witness starts from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Lasso>,
    pub explored: Vec<ExploredConstant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivergenceConfig {
    pub max_states: usize,
    /// Unfolding depth tried by the syntactic criterion when exploration is
    /// inconclusive.
    pub max_unfold: usize,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        DivergenceConfig { max_states: crate::lts::DEFAULT_MAX_STATES, max_unfold: 8 }
    }
}

/// Explores every solution constant and classifies its divergences. When the
/// exploration is truncated and no annotated cycle turned up, the syntactic
/// criterion is consulted; if it holds, all divergences are innocuous.
pub fn analyze_divergences(
    sol: &SyntacticSolution,
    env: &Env,
    config: &DivergenceConfig,
) -> Result<DivergenceReport, StepError> {
    let mut explored = Vec::new();
    let mut results = Vec::new();
    for k in &sol.constants {
        let l = explore(&Term::constant(k), env, config.max_states)?;
        explored.push(ExploredConstant { constant: k.to_string(), states: l.num_states(), complete: l.is_complete() });
        results.push(classify_lts(&l));
    }
    let pick = |class: DivergenceClass| results.iter().position(|(c, _)| *c == class);
    let report = |class, basis, i: Option<usize>, criterion| DivergenceReport {
        class,
        basis,
        equation: i,
        witness: i.and_then(|i| results[i].1.clone()),
        explored: explored.clone(),
        criterion,
    };

    if let Some(i) = pick(DivergenceClass::NonInnocuous) {
        return Ok(report(DivergenceClass::NonInnocuous, Some(Basis::WitnessFound), Some(i), None));
    }
    if let Some(i) = pick(DivergenceClass::UnknownTruncated) {
        let criterion = syntactic_criterion(&sol.system, env, config.max_unfold);
        if criterion.satisfied {
            let with_cycle = results.iter().position(|(_, w)| w.is_some());
            return Ok(report(
                DivergenceClass::AllInnocuous,
                Some(Basis::SyntacticCriterion),
                with_cycle,
                Some(criterion),
            ));
        }
        return Ok(report(DivergenceClass::UnknownTruncated, None, Some(i), Some(criterion)));
    }
    if let Some(i) = pick(DivergenceClass::AllInnocuous) {
        return Ok(report(DivergenceClass::AllInnocuous, Some(Basis::CompleteExploration), Some(i), None));
    }
    Ok(report(DivergenceClass::DivergenceFree, Some(Basis::CompleteExploration), None, None))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuardEvidence {
    pub variable: VarName,
    /// Innermost qualifying prefix above the occurrence.
    pub guard: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationEvidence {
    pub equation: usize,
    /// Smallest `n ≤ max_unfold` such that `E_i^n` qualifies (`E^1 = E`).
    pub depth: Option<usize>,
    /// One entry per variable occurrence of `E_i^depth`.
    pub guards: Vec<GuardEvidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub satisfied: bool,
    /// Visible actions whose complement occurs in some body or in a constant
    /// the bodies can reach; these cannot serve as guards.
    pub unusable_guards: Vec<Action>,
    pub equations: Vec<EquationEvidence>,
    pub max_unfold: usize,
}

/// Checks that, for each equation, some unfolding puts every variable under a
/// visible prefix whose complement occurs nowhere in the system.
///
/// Constants mentioned by the bodies are searched for complements as well,
/// since their prefixes can synchronise with the guard just like the bodies'.
pub fn syntactic_criterion(s: &EquationSystem, env: &Env, max_unfold: usize) -> CriterionReport {
    let mut present = BTreeSet::new();
    for e in &s.bodies {
        present.extend(env.reachable_prefixes(e));
    }
    let usable = |a: &Action| a.complement().is_some_and(|co| !present.contains(&co));
    let unusable_guards: Vec<Action> = present
        .iter()
        .filter(|a| !a.is_tau())
        .filter_map(|a| a.complement())
        .filter(|a| !usable(a))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut evidence: Vec<EquationEvidence> =
        (0..s.len()).map(|equation| EquationEvidence { equation, depth: None, guards: Vec::new() }).collect();
    let mut current = s.clone();
    for n in 1..=max_unfold.max(1) {
        if n > 1 {
            current = unfold(s, n);
        }
        for (i, body) in current.bodies.iter().enumerate() {
            if evidence[i].depth.is_some() {
                continue;
            }
            if let Some(guards) = guarded_by(body, &usable) {
                evidence[i] = EquationEvidence { equation: i, depth: Some(n), guards };
            }
        }
        if evidence.iter().all(|e| e.depth.is_some())
            || current.bodies.iter().map(Term::size).sum::<usize>() > crate::equations::MAX_UNFOLD_SIZE
        {
            break;
        }
    }
    CriterionReport {
        satisfied: evidence.iter().all(|e| e.depth.is_some()),
        unusable_guards,
        equations: evidence,
        max_unfold,
    }
}

/// Guards of every variable occurrence, if each has a usable prefix above it.
fn guarded_by(body: &Term, usable: &dyn Fn(&Action) -> bool) -> Option<Vec<GuardEvidence>> {
    fn walk(t: &Term, guard: Option<&Action>, usable: &dyn Fn(&Action) -> bool, out: &mut Vec<GuardEvidence>) -> bool {
        match t {
            Term::Var(v) => match guard {
                Some(g) => {
                    out.push(GuardEvidence { variable: v.clone(), guard: g.clone() });
                    true
                }
                None => false,
            },
            Term::Nil | Term::Const(_) => true,
            Term::Prefix(a, p) => {
                let g = if usable(a) { Some(a) } else { guard };
                walk(p, g, usable, out)
            }
            Term::Sum(ps) => ps.iter().all(|p| walk(p, guard, usable, out)),
            Term::Par(p, q) => walk(p, guard, usable, out) && walk(q, guard, usable, out),
            Term::Res(_, p) => walk(p, guard, usable, out),
        }
    }
    let mut out = Vec::new();
    walk(body, None, usable, &mut out).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::syntactic_solution;
    use crate::lts::{Completeness, Transition};
    use crate::model::Model;

    fn analyze(src: &str, bound: usize) -> DivergenceReport {
        let m = Model::from_source(src).unwrap();
        let sol = syntactic_solution(&m.systems[0], &m.env).unwrap();
        analyze_divergences(&sol, &m.env, &DivergenceConfig { max_states: bound, max_unfold: 8 }).unwrap()
    }

    #[test]
    fn visible_loop_is_divergence_free() {
        let r = analyze("system S { X = a.X; }", 100);
        assert_eq!((r.class, r.basis), (DivergenceClass::DivergenceFree, Some(Basis::CompleteExploration)));
    }

    #[test]
    fn tau_loop_is_non_innocuous() {
        let r = analyze("system S { X = tau.X; }", 100);
        assert_eq!(r.class, DivergenceClass::NonInnocuous);
        let w = r.witness.unwrap();
        assert!(w.prefix.is_empty());
        assert_eq!(w.cycle.len(), 1);
        assert_eq!((w.cycle[0].src, w.cycle[0].dst, w.cycle[0].count), (0, 0, 1));
    }

    #[test]
    fn restriction_loop_is_non_innocuous() {
        let r = analyze("system S { X = new a in (a.X | 'a.0); }", 100);
        assert_eq!(r.class, DivergenceClass::NonInnocuous);
        assert!(r.witness.unwrap().is_annotated());
    }

    #[test]
    fn user_constant_divergence_is_innocuous() {
        let r = analyze("const K = tau.K;\nsystem S { X = a.X | K; }", 1000);
        assert_eq!((r.class, r.basis), (DivergenceClass::AllInnocuous, Some(Basis::SyntacticCriterion)));
        let w = r.witness.unwrap();
        assert!(!w.cycle.is_empty() && !w.is_annotated());
    }

    #[test]
    fn truncated_annotated_cycle_is_found() {
        let r = analyze("system S { X = a.X + 'a.X + d.(X | X); }", 1000);
        assert_eq!(r.class, DivergenceClass::NonInnocuous);
        assert!(!r.explored[0].complete);
        let w = r.witness.unwrap();
        assert_eq!(w.prefix_labels(), vec![Action::parse("d").unwrap()]);
        assert_eq!(w.cycle[0].from, "#sol.S.X | #sol.S.X");
    }

    #[test]
    fn lasso_for_restricted_self_call() {
        let m = Model::from_source("const L = a.new a in (L | 'a.0);").unwrap();
        let l = explore(&m.parse_term("L").unwrap(), &m.env, 100).unwrap();
        let w = find_divergence_witness(&l).unwrap();
        assert_eq!(w.prefix_labels(), vec![Action::parse("a").unwrap()]);
        assert_eq!(w.cycle.len(), 1);
        assert!(w.cycle[0].label.is_tau());
        assert_eq!(w.cycle[0].from, "new a in ('a.0 | L)");
    }

    #[test]
    fn no_lasso_without_cycle() {
        let m = Model::from_source("").unwrap();
        for t in ["a.b.0", "tau.0", "tau.tau.a.0"] {
            let l = explore(&m.parse_term(t).unwrap(), &m.env, 100).unwrap();
            assert!(find_divergence_witness(&l).is_none(), "{t}");
        }
    }

    #[test]
    fn annotated_cycle_preferred_over_closer_plain_one() {
        let tau = |src, dst, count| Transition { src, label: Action::Tau, dst, count };
        // 0 -> 1 (plain self-loop), 0 -> 2 -> 3 -> 2 with 3 -> 2 annotated.
        let l = AnnotatedLts::from_parts(
            4,
            0,
            [tau(0, 1, 0), tau(1, 1, 0), tau(0, 2, 0), tau(2, 3, 0), tau(3, 2, 1)],
            Completeness::Complete,
        );
        let w = find_divergence_witness(&l).unwrap();
        assert_eq!(w.prefix.len(), 1);
        assert_eq!(w.cycle.iter().map(|s| (s.src, s.dst)).collect::<Vec<_>>(), [(2, 3), (3, 2)]);
        assert_eq!(classify_lts(&l).0, DivergenceClass::NonInnocuous);
    }

    #[test]
    fn criterion_examples() {
        let m =
            Model::from_source("system S { X = a.X; }\nsystem T { X = tau.X; }\nsystem U { X = a.X + 'a.0; }").unwrap();
        let r = syntactic_criterion(m.system("S").unwrap(), &m.env, 8);
        assert!(r.satisfied);
        assert_eq!(r.equations[0].depth, Some(1));
        assert!(!syntactic_criterion(m.system("T").unwrap(), &m.env, 8).satisfied);
        assert!(!syntactic_criterion(m.system("U").unwrap(), &m.env, 8).satisfied);
    }

    #[test]
    fn criterion_sees_complements_in_constants() {
        let m = Model::from_source("const B = 'a.B;\nsystem S { X = a.X | B; }").unwrap();
        let r = syntactic_criterion(m.system("S").unwrap(), &m.env, 8);
        assert!(!r.satisfied);
        assert_eq!(r.unusable_guards, vec![Action::parse("a").unwrap(), Action::parse("'a").unwrap()]);
    }

    #[test]
    fn criterion_may_need_unfolding() {
        let m = Model::from_source("system S { X = tau.Y; Y = b.X; }").unwrap();
        let r = syntactic_criterion(m.system("S").unwrap(), &m.env, 8);
        assert!(r.satisfied);
        assert_eq!(r.equations[0].depth, Some(2));
        assert_eq!(r.equations[1].depth, Some(1));
    }
}
