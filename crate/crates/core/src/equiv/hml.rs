use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

use super::partition::Refinement;
use crate::lts::WeakLts;
use crate::term::Action;

/// Modal formulas over weak moves.
///
/// `<μ>φ` holds at `s` if `s ⇒μ̂ s'` for some `s'` satisfying `φ`; for `tau`
/// this includes staying put.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hml {
    True,
    Not(Box<Hml>),
    And(Vec<Hml>),
    Diamond(Action, Box<Hml>),
}

impl Hml {
    fn and(parts: BTreeSet<Hml>) -> Hml {
        let mut parts: Vec<Hml> = parts.into_iter().filter(|p| *p != Hml::True).collect();
        match parts.len() {
            0 => Hml::True,
            1 => parts.pop().unwrap(),
            _ => Hml::And(parts),
        }
    }

    fn not(f: Hml) -> Hml {
        match f {
            Hml::Not(inner) => *inner,
            f => Hml::Not(Box::new(f)),
        }
    }

    /// Nesting depth of modalities.
    pub fn depth(&self) -> usize {
        match self {
            Hml::True => 0,
            Hml::Not(f) => f.depth(),
            Hml::And(fs) => fs.iter().map(Hml::depth).max().unwrap_or(0),
            Hml::Diamond(_, f) => 1 + f.depth(),
        }
    }

    /// Evaluates the formula at `s`.
    pub fn holds(&self, w: &WeakLts, s: usize) -> bool {
        match self {
            Hml::True => true,
            Hml::Not(f) => !f.holds(w, s),
            Hml::And(fs) => fs.iter().all(|f| f.holds(w, s)),
            Hml::Diamond(a, f) => match w.label_index(a) {
                Some(l) => w.hat_successors(s, l).any(|t| f.holds(w, t)),
                None => false,
            },
        }
    }

    fn fmt_atomic(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hml::And(_) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Hml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hml::True => f.write_str("tt"),
            Hml::Not(g) => {
                f.write_str("!")?;
                g.fmt_atomic(f)
            }
            Hml::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    g.fmt_atomic(f)?;
                }
                Ok(())
            }
            Hml::Diamond(a, g) => {
                write!(f, "<{a}>")?;
                g.fmt_atomic(f)
            }
        }
    }
}

impl Serialize for Hml {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Builds formulas separating states from the refinement history of the
/// weak transition graph `w`.
pub(crate) struct Distinguisher<'a> {
    w: &'a WeakLts,
    history: &'a Refinement,
    memo: HashMap<(usize, usize), Hml>,
}

impl<'a> Distinguisher<'a> {
    pub fn new(w: &'a WeakLts, history: &'a Refinement) -> Self {
        Distinguisher { w, history, memo: HashMap::new() }
    }

    /// A formula true at `s` and false at `t`. The states must be in
    /// different blocks of the stable partition.
    pub fn distinguish(&mut self, s: usize, t: usize) -> Hml {
        if let Some(f) = self.memo.get(&(s, t)) {
            return f.clone();
        }
        let k = self.history.split_round(s, t).expect("states are not bisimilar");
        let f = match self.positive(s, t, k) {
            Some(f) => f,
            None => {
                let g = self.positive(t, s, k).expect("a split has a cause on one side");
                Hml::not(g)
            }
        };
        self.memo.insert((s, t), f.clone());
        f
    }

    /// A diamond formula for a move of `s` that `t` cannot match up to the
    /// partition of round `k - 1`.
    fn positive(&mut self, s: usize, t: usize, k: usize) -> Option<Hml> {
        let prev = &self.history.rounds[k - 1];
        let (label, s1) = self
            .w
            .weak_edges(s)
            .iter()
            .copied()
            .find(|&(l, s1)| !self.w.hat_successors(t, l).any(|t1| prev[t1] == prev[s1]))?;
        let answers: Vec<usize> = self.w.hat_successors(t, label).collect();
        let parts = answers.into_iter().map(|t1| self.distinguish(s1, t1)).collect();
        Some(Hml::Diamond(self.w.labels()[label as usize].clone(), Box::new(Hml::and(parts))))
    }
}
