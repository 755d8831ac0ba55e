use crate::model::Env;
use crate::term::{Name, Term};

/// Normal form modulo associativity, commutativity and unit of `|`,
/// commutativity of `+`, and removal of restrictions whose name cannot occur.
///
/// Constants are left folded; identical summands are kept.
pub fn canonicalize(p: &Term, env: &Env) -> Term {
    canonicalize_owned(p.clone(), env)
}

/// [`canonicalize`] reusing the nodes of `p`.
pub(crate) fn canonicalize_owned(p: Term, env: &Env) -> Term {
    canon(p, env).0
}

/// Names a term can use. `all` stands for terms whose names are not known,
/// such as variables and undefined constants. Terms use few names, so a
/// vector beats a set here.
#[derive(Default)]
struct Free {
    all: bool,
    names: Vec<Name>,
}

impl Free {
    fn insert(&mut self, a: &Name) {
        if !self.names.contains(a) {
            self.names.push(a.clone());
        }
    }

    fn add(&mut self, other: Free) {
        self.all |= other.all;
        if self.names.is_empty() {
            self.names = other.names;
        } else {
            other.names.iter().for_each(|a| self.insert(a));
        }
    }

    fn remove(&mut self, a: &Name) {
        self.names.retain(|b| b != a);
    }

    fn contains(&self, a: &Name) -> bool {
        self.all || self.names.contains(a)
    }
}

/// The canonical form together with its free names, computed in one pass so
/// nested restrictions do not rescan their bodies.
fn canon(p: Term, env: &Env) -> (Term, Free) {
    match p {
        Term::Nil => (p, Free::default()),
        Term::Var(_) => (p, Free { all: true, names: Vec::new() }),
        Term::Const(ref k) => {
            let free = match env.const_free_names(k) {
                Some(names) => Free { all: false, names: names.iter().cloned().collect() },
                None => Free { all: true, names: Vec::new() },
            };
            (p, free)
        }
        Term::Prefix(a, q) => {
            let (q, mut free) = canon(*q, env);
            if let Some(n) = a.name() {
                free.insert(n);
            }
            (Term::prefix(a, q), free)
        }
        Term::Sum(ps) => {
            let mut free = Free::default();
            let mut summands: Vec<Term> = ps
                .into_iter()
                .map(|q| {
                    let (q, f) = canon(q, env);
                    free.add(f);
                    q
                })
                .collect();
            summands.sort();
            let t = match summands.len() {
                0 => Term::Nil,
                1 => summands.pop().unwrap(),
                _ => Term::Sum(summands),
            };
            (t, free)
        }
        Term::Par(..) => {
            let mut parts = Vec::new();
            let mut free = Free::default();
            collect_par(p, env, &mut parts, &mut free);
            parts.sort();
            (build_par(parts), free)
        }
        Term::Res(a, q) => {
            let (body, mut free) = canon(*q, env);
            if free.contains(&a) {
                free.remove(&a);
                (Term::res(a, body), free)
            } else {
                (body, free)
            }
        }
    }
}

/// Canonical components of a parallel composition, flattened and without `0`.
fn collect_par(p: Term, env: &Env, out: &mut Vec<Term>, free: &mut Free) {
    match p {
        Term::Par(l, r) => {
            collect_par(*l, env, out, free);
            collect_par(*r, env, out, free);
        }
        _ => {
            let (q, f) = canon(p, env);
            free.add(f);
            push_components(q, out);
        }
    }
}

fn push_components(q: Term, out: &mut Vec<Term>) {
    match q {
        Term::Nil => {}
        Term::Par(l, r) => {
            push_components(*l, out);
            push_components(*r, out);
        }
        q => out.push(q),
    }
}

/// Left-nested composition of `parts`; `0` when empty.
fn build_par(parts: Vec<Term>) -> Term {
    parts.into_iter().reduce(Term::par).unwrap_or(Term::Nil)
}
