mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use usol::divergence::{classify_lts, tau_sccs, DivergenceClass};
use usol::equations::{check_guardedness, unfold, EquationSystem};
use usol::equiv::{Side, Witness};
use usol::lts::{canonicalize, explore, saturate, step};
use usol::model::{Env, Model};
use usol::syntax::{parse_program, pretty_print};
use usol::term::{Action, ConstName, Term};

use common::*;

fn prelude() -> Model {
    Model::from_source(PRELUDE).unwrap()
}

fn action() -> impl Strategy<Value = &'static str> {
    prop::sample::select(ACTIONS.to_vec())
}

/// Closed process text over the prelude constants.
fn proc_text() -> impl Strategy<Value = String> {
    let leaf = prop::sample::select(vec!["0", "P", "Q", "W", "U"]).prop_map(String::from);
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (action(), inner.clone()).prop_map(|(a, p)| format!("{a}.{p}")),
            (action(), inner.clone(), action(), inner.clone()).prop_map(|(a, p, b, q)| format!("({a}.{p} + {b}.{q})")),
            (inner.clone(), inner.clone()).prop_map(|(p, q)| format!("({p} | {q})")),
            (prop::sample::select(vec!["a", "b"]), inner).prop_map(|(n, p)| format!("new {n} in ({p})")),
        ]
    })
}

fn seed() -> impl Strategy<Value = ChaCha8Rng> {
    any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
}

/// The transition rules applied literally to binary `|`, for comparison
/// with the library's flattened parallel step.
fn reference_step(t: &Term, env: &Env, unfolding: &mut Vec<ConstName>) -> BTreeSet<(Action, Term, u32)> {
    match t {
        Term::Nil => BTreeSet::new(),
        Term::Var(v) => panic!("open term: {v}"),
        Term::Prefix(a, p) => BTreeSet::from([(a.clone(), (**p).clone(), 0)]),
        Term::Sum(ps) => ps.iter().flat_map(|p| reference_step(p, env, unfolding)).collect(),
        Term::Par(p, q) => {
            let (left, right) = (reference_step(p, env, unfolding), reference_step(q, env, unfolding));
            let mut out = BTreeSet::new();
            for (a, p1, c) in &left {
                out.insert((a.clone(), Term::par(p1.clone(), (**q).clone()), *c));
                for (b, q1, d) in &right {
                    if a.complement().as_ref() == Some(b) {
                        out.insert((Action::Tau, Term::par(p1.clone(), q1.clone()), c + d));
                    }
                }
            }
            for (b, q1, d) in right {
                out.insert((b, Term::par((**p).clone(), q1), d));
            }
            out
        }
        Term::Res(n, p) => reference_step(p, env, unfolding)
            .into_iter()
            .filter(|(a, _, _)| a.name() != Some(n))
            .map(|(a, p1, c)| (a, Term::res(n.clone(), p1), c))
            .collect(),
        Term::Const(k) => {
            assert!(!unfolding.contains(k), "unguarded constant {k}");
            let def = env.get(k).expect("defined constant");
            let extra = u32::from(env.is_solution(k));
            unfolding.push(k.clone());
            let out = reference_step(&def.body, env, unfolding);
            unfolding.pop();
            out.into_iter().map(|(a, p1, c)| (a, p1, c + extra)).collect()
        }
    }
}

/// Whether every variable occurrence lies under some prefix.
fn under_prefixes(t: &Term) -> bool {
    match t {
        Term::Var(_) => false,
        Term::Nil | Term::Const(_) | Term::Prefix(..) => true,
        Term::Sum(ps) => ps.iter().all(under_prefixes),
        Term::Par(p, q) => under_prefixes(p) && under_prefixes(q),
        Term::Res(_, p) => under_prefixes(p),
    }
}

fn random_system_model(rng: &mut ChaCha8Rng) -> Option<Model> {
    Model::from_source(&format!("{PRELUDE}{}", random_system(rng, 3))).ok()
}

fn binding(s: &EquationSystem) -> BTreeMap<usol::term::VarName, Term> {
    s.variables.iter().cloned().zip(s.bodies.iter().cloned()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn terms_print_and_parse_back(text in proc_text()) {
        let m = prelude();
        let t = m.parse_term(&text).unwrap();
        prop_assert_eq!(m.parse_term(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn programs_pretty_print_and_parse_back(x in proc_text(), y in proc_text(), k in proc_text()) {
        let src = format!(
            "{PRELUDE}const K = a.({k});\nsystem S {{ X = a.({x}) + b.X; Y = tau.(X | Y) + 'a.0; }}\ncandidates C for S = (K, {y});\n"
        );
        let mut first = parse_program(&src).unwrap();
        let mut second = parse_program(&pretty_print(&first)).unwrap();
        first.erase_spans();
        second.erase_spans();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn unfoldings_compose(mut rng in seed(), m in 1usize..=3, n in 1usize..=3) {
        let Some(model) = random_system_model(&mut rng) else { return Ok(()) };
        let s = model.system("S").unwrap();
        let inner = binding(&unfold(s, n));
        let composed: Vec<Term> = unfold(s, m).bodies.iter().map(|e| e.substitute(&inner).unwrap()).collect();
        prop_assert_eq!(unfold(s, m + n).bodies, composed);
    }

    #[test]
    fn guard_depth_matches_brute_force(mut rng in seed(), max_unfold in 1usize..=5) {
        let Some(model) = random_system_model(&mut rng) else { return Ok(()) };
        let s = model.system("S").unwrap();
        let report = check_guardedness(s, max_unfold);
        prop_assume!(!report.size_capped);
        let expected: Vec<Option<usize>> = (0..s.len())
            .map(|i| {
                if under_prefixes(&s.bodies[i]) {
                    return Some(0);
                }
                (2..=max_unfold).find(|&n| under_prefixes(&unfold(s, n).bodies[i]))
            })
            .collect();
        prop_assert_eq!(&report.equation_depths, &expected);
        let overall = expected.iter().try_fold(0, |acc, d| d.map(|d| acc.max(d)));
        prop_assert_eq!(report.depth, overall);
    }

    #[test]
    fn step_agrees_with_binary_rules(text in proc_text()) {
        let m = prelude();
        let t = m.parse_term(&text).unwrap();
        let library: BTreeSet<(Action, Term, u32)> =
            step(&t, &m.env).unwrap().into_iter().map(|mv| (mv.label, mv.target, mv.count)).collect();
        prop_assert_eq!(library, reference_step(&t, &m.env, &mut Vec::new()));
    }

    #[test]
    fn step_counts_solution_unfoldings(mut rng in seed()) {
        let Some(model) = random_system_model(&mut rng) else { return Ok(()) };
        let s = model.system("S").unwrap();
        prop_assume!(check_guardedness(s, 1).depth == Some(0));
        let sol = usol::equations::syntactic_solution(s, &model.env).unwrap();
        let env = model.env.extend(sol.defs.clone());
        for k in sol.tuple() {
            let library: BTreeSet<(Action, Term, u32)> =
                step(&k, &env).unwrap().into_iter().map(|mv| (mv.label, mv.target, mv.count)).collect();
            prop_assert!(library.iter().all(|(_, _, c)| *c >= 1));
            prop_assert_eq!(library, reference_step(&k, &env, &mut Vec::new()));
        }
    }

    #[test]
    fn canonical_form_is_idempotent_and_ignores_par_layout(p in proc_text(), q in proc_text()) {
        let m = prelude();
        let (p, q) = (m.parse_term(&p).unwrap(), m.parse_term(&q).unwrap());
        let c = canonicalize(&p, &m.env);
        prop_assert_eq!(canonicalize(&c, &m.env), c.clone());
        prop_assert_eq!(canonicalize(&Term::par(p.clone(), Term::Nil), &m.env), c);
        prop_assert_eq!(
            canonicalize(&Term::par(p.clone(), q.clone()), &m.env),
            canonicalize(&Term::par(q, p), &m.env)
        );
    }

    #[test]
    fn exploration_is_deterministic(text in proc_text()) {
        let m = prelude();
        let t = m.parse_term(&text).unwrap();
        prop_assert_eq!(explore(&t, &m.env, 100).unwrap(), explore(&t, &m.env, 100).unwrap());
    }

    #[test]
    fn saturation_matches_path_search(mut rng in seed(), n in 1usize..40) {
        let l = random_lts(&mut rng, n);
        let w = saturate(&l).unwrap();
        for s in 0..n {
            let edges: BTreeSet<(Action, usize)> =
                w.weak_edges(s).iter().map(|&(a, t)| (w.labels()[a as usize].clone(), t)).collect();
            prop_assert_eq!(edges, weak_moves(&l, s));
        }
    }

    #[test]
    fn tau_sccs_are_mutual_reachability(mut rng in seed(), n in 1usize..60) {
        let l = random_lts(&mut rng, n);
        let comp = tau_sccs(&l);
        for u in 0..n {
            for v in 0..n {
                prop_assert_eq!(comp[u] == comp[v], same_tau_component(&l, u, v));
            }
        }
    }

    #[test]
    fn divergence_witness_replays(mut rng in seed(), n in 1usize..80) {
        let l = random_lts(&mut rng, n);
        let (class, witness) = classify_lts(&l);
        prop_assert_eq!(class, brute_force_class(&l));
        let Some(w) = witness else {
            prop_assert_eq!(class, DivergenceClass::DivergenceFree);
            return Ok(());
        };
        let path: Vec<_> = w.prefix.iter().chain(&w.cycle).collect();
        prop_assert_eq!(path[0].src, l.initial());
        for pair in path.windows(2) {
            prop_assert_eq!(pair[0].dst, pair[1].src);
        }
        for s in &path {
            prop_assert!(l.successors(s.src).iter().any(|t| t.label == s.label && t.dst == s.dst && t.count == s.count));
        }
        prop_assert!(!w.cycle.is_empty());
        prop_assert!(w.cycle.iter().all(|s| s.label.is_tau()));
        prop_assert_eq!(w.cycle.last().unwrap().dst, w.cycle[0].src);
        prop_assert_eq!(w.is_annotated(), class == DivergenceClass::NonInnocuous);
    }

    #[test]
    fn exploration_is_monotone_in_the_bound(text in proc_text(), small in 1usize..30, extra in 0usize..60) {
        let m = prelude();
        let t = m.parse_term(&text).unwrap();
        let (a, b) = (explore(&t, &m.env, small).unwrap(), explore(&t, &m.env, small + extra).unwrap());
        prop_assert_eq!(a.states(), &b.states()[..a.num_states()]);
        for s in 0..a.num_states() {
            for e in a.successors(s) {
                prop_assert!(b.successors(s).contains(e));
            }
        }
        if classify_lts(&a).0 == DivergenceClass::NonInnocuous {
            prop_assert_eq!(classify_lts(&b).0, DivergenceClass::NonInnocuous);
        }
        if a.is_complete() {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn weak_bisimilarity_matches_fixed_point(p in proc_text(), q in proc_text()) {
        let m = prelude();
        let (a, b) = (
            explore(&m.parse_term(&p).unwrap(), &m.env, 40).unwrap(),
            explore(&m.parse_term(&q).unwrap(), &m.env, 40).unwrap(),
        );
        prop_assume!(a.is_complete() && b.is_complete());
        let lib = usol::equiv::decide_lts(usol::equiv::Relation::WeakBisim, &a, &b).holds();
        prop_assert_eq!(lib, naive_weak_bisim(&a, &b));
        // Strong bisimilarity implies weak.
        prop_assert!(!usol::equiv::strong_bisim(&a, &b) || lib);
    }

    #[test]
    fn trace_inclusion_agrees_with_bounded_traces(p in proc_text(), q in proc_text()) {
        let m = prelude();
        let (a, b) = (
            explore(&m.parse_term(&p).unwrap(), &m.env, 40).unwrap(),
            explore(&m.parse_term(&q).unwrap(), &m.env, 40).unwrap(),
        );
        prop_assume!(a.is_complete() && b.is_complete());
        let r = usol::equiv::decide_lts(usol::equiv::Relation::TraceIncl, &a, &b);
        let holds = r.holds();
        match r.witness {
            None => {
                prop_assert!(holds);
                prop_assert!(traces_up_to(&a, 5).is_subset(&traces_up_to(&b, 5)));
            }
            Some(Witness::Trace { trace, performed_by: Side::Lhs }) => {
                prop_assert!(!holds);
                prop_assert!(traces_up_to(&a, trace.len()).contains(&trace));
                prop_assert!(!traces_up_to(&b, trace.len()).contains(&trace));
            }
            Some(w) => prop_assert!(false, "unexpected witness {w:?}"),
        }
    }
}
