use thiserror::Error;

use crate::model::Env;
use crate::term::{Action, ConstName, Term, VarName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("constant `{0}` has no definition")]
    UnknownConstant(ConstName),
    #[error("constant `{0}` unfolds to itself without a prefix")]
    UnguardedRecursion(ConstName),
    #[error("variable `{0}` has no transitions; substitute it first")]
    OpenTerm(VarName),
}

/// One derivative: the label, the target term (not canonicalised) and how
/// many times the derivation unfolded a syntactic-solution constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Move {
    pub label: Action,
    pub target: Term,
    pub count: u32,
}

/// All transitions of `p`, sorted and without duplicates.
pub fn step(p: &Term, env: &Env) -> Result<Vec<Move>, StepError> {
    step_with(p, env, false)
}

/// Like [`step`], but of several syntactically identical parallel components
/// only the first one moves. The targets are the same up to reordering of
/// `|`, which is all exploration needs, and wide states with many copies of
/// a component stay cheap.
pub(crate) fn step_up_to_ac(p: &Term, env: &Env) -> Result<Vec<Move>, StepError> {
    step_with(p, env, true)
}

fn step_with(p: &Term, env: &Env, collapse: bool) -> Result<Vec<Move>, StepError> {
    let mut cx = Cx { env, unfolding: Vec::new(), collapse };
    let mut moves = cx.moves(p)?;
    moves.sort();
    moves.dedup();
    Ok(moves)
}

struct Cx<'a> {
    env: &'a Env,
    unfolding: Vec<ConstName>,
    collapse: bool,
}

impl Cx<'_> {
    fn moves(&mut self, p: &Term) -> Result<Vec<Move>, StepError> {
        Ok(match p {
            Term::Nil => Vec::new(),
            Term::Var(v) => return Err(StepError::OpenTerm(v.clone())),
            Term::Prefix(a, cont) => vec![Move { label: a.clone(), target: (**cont).clone(), count: 0 }],
            Term::Sum(ps) => {
                let mut out = Vec::new();
                for q in ps {
                    out.extend(self.moves(q)?);
                }
                out
            }
            Term::Par(..) => {
                // Flattening the nest gives the same derivatives as applying
                // parL/parR/comL/comR level by level, without rebuilding every
                // move at every level.
                let mut parts = Vec::new();
                flatten_par(p, &mut parts);
                // first[i]: position of the first component identical to parts[i]
                let first: Vec<usize> = if self.collapse {
                    let mut seen = std::collections::HashMap::new();
                    (0..parts.len()).map(|i| *seen.entry(parts[i]).or_insert(i)).collect()
                } else {
                    (0..parts.len()).collect()
                };
                let mut moves = Vec::with_capacity(parts.len());
                for (i, q) in parts.iter().enumerate() {
                    moves.push(if first[i] == i { self.moves(q)? } else { Vec::new() });
                }
                let mut second = vec![None; parts.len()];
                for j in (0..parts.len()).rev() {
                    if first[j] != j {
                        second[first[j]] = Some(j);
                    }
                }
                // A copy of an already stepped component talks through the first
                // copy's moves, once per distinct pair of components: partners
                // of `i` are the later distinct components and `i`'s own second
                // copy, which answers with `i`'s moves.
                let distinct: Vec<usize> = (0..parts.len()).filter(|&j| first[j] == j).collect();
                let partners = |i: usize| {
                    let later = distinct.iter().copied().filter(move |&j| j > i).map(|j| (j, j));
                    second[i].map(|j| (j, i)).into_iter().chain(later)
                };
                let mut out = Vec::new();
                for (i, ms) in moves.iter().enumerate() {
                    for m in ms {
                        let Some(co) = m.label.complement() else { continue };
                        for (j, src) in partners(i) {
                            for n in moves[src].iter().filter(|n| n.label == co) {
                                out.push(Move {
                                    label: Action::Tau,
                                    target: rebuild(p, vec![(i, m.target.clone()), (j, n.target.clone())]),
                                    count: m.count + n.count,
                                });
                            }
                        }
                    }
                }
                // Single-component moves last, so their targets are moved
                // rather than cloned; states nested deep under `|` stay cheap.
                for (i, ms) in moves.into_iter().enumerate() {
                    for m in ms {
                        out.push(Move { label: m.label, target: rebuild(p, vec![(i, m.target)]), count: m.count });
                    }
                }
                out
            }
            Term::Res(a, body) => self
                .moves(body)?
                .into_iter()
                .filter(|m| m.label.name() != Some(a))
                .map(|m| Move { target: Term::res(a.clone(), m.target), ..m })
                .collect(),
            Term::Const(k) => {
                if self.unfolding.contains(k) {
                    return Err(StepError::UnguardedRecursion(k.clone()));
                }
                let def = self.env.get(k).ok_or_else(|| StepError::UnknownConstant(k.clone()))?;
                let extra = u32::from(self.env.is_solution(k));
                self.unfolding.push(k.clone());
                let moves = self.moves(&def.body);
                self.unfolding.pop();
                moves?.into_iter().map(|m| Move { count: m.count + extra, ..m }).collect()
            }
        })
    }
}

fn flatten_par<'a>(p: &'a Term, out: &mut Vec<&'a Term>) {
    match p {
        Term::Par(l, r) => {
            flatten_par(l, out);
            flatten_par(r, out);
        }
        _ => out.push(p),
    }
}

/// `p` with its parallel components at the given positions replaced, keeping
/// the original nesting.
fn rebuild(p: &Term, replace: Vec<(usize, Term)>) -> Term {
    fn go(p: &Term, next: &mut usize, replace: &mut Vec<(usize, Term)>) -> Term {
        match p {
            Term::Par(l, r) => {
                let l = go(l, next, replace);
                let r = go(r, next, replace);
                Term::par(l, r)
            }
            _ => {
                let i = *next;
                *next += 1;
                match replace.iter().position(|(j, _)| *j == i) {
                    Some(k) => replace.swap_remove(k).1,
                    None => p.clone(),
                }
            }
        }
    }
    let mut replace = replace;
    go(p, &mut 0, &mut replace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn show(moves: &[Move]) -> Vec<String> {
        moves.iter().map(|m| format!("{} {} {}", m.label, m.target, m.count)).collect()
    }

    #[test]
    fn communication_and_interleaving() {
        let m = Model::from_source("").unwrap();
        let p = m.parse_term("a.0 | 'a.0").unwrap();
        assert_eq!(show(&step(&p, &m.env).unwrap()), ["tau 0 | 0 0", "a 0 | 'a.0 0", "'a a.0 | 0 0"]);
    }

    #[test]
    fn solution_constant_counts_once() {
        let m = Model::from_source("system S { X = a.X; }").unwrap();
        let k = m.parse_term("#sol.S.X").unwrap();
        assert_eq!(show(&step(&k, &m.env).unwrap()), ["a #sol.S.X 1"]);
    }

    #[test]
    fn synchronising_two_solution_constants_counts_two() {
        let m = Model::from_source("system S { X = a.X + 'a.X; }").unwrap();
        let k = m.parse_term("#sol.S.X | #sol.S.X").unwrap();
        let taus: Vec<_> = step(&k, &m.env).unwrap().into_iter().filter(|m| m.label.is_tau()).collect();
        assert!(!taus.is_empty() && taus.iter().all(|m| m.count == 2));
    }

    #[test]
    fn user_constants_are_not_counted() {
        let m = Model::from_source("const L = a.new a in (L | 'a.0);").unwrap();
        let l = m.parse_term("L").unwrap();
        assert_eq!(show(&step(&l, &m.env).unwrap()), ["a new a in (L | 'a.0) 0"]);
    }

    #[test]
    fn restriction_blocks_both_polarities() {
        let m = Model::from_source("").unwrap();
        let p = m.parse_term("new a in (a.0 | 'a.0 | b.0)").unwrap();
        let labels: Vec<String> = step(&p, &m.env).unwrap().iter().map(|m| m.label.to_string()).collect();
        assert_eq!(labels, ["tau", "b"]);
    }

    #[test]
    fn unguarded_solution_constant_is_an_error() {
        let m = Model::from_source("system S { X = X; }").unwrap();
        let k = m.parse_term("#sol.S.X").unwrap();
        assert!(matches!(step(&k, &m.env), Err(StepError::UnguardedRecursion(_))));
    }
}
