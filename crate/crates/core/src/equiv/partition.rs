use std::collections::HashMap;

/// Successive partitions produced by signature refinement.
///
/// `rounds[k][s]` is the block of `s` after `k` refinement rounds; two states
/// share a block in round `k` iff no modal formula of depth `k` separates them.
#[derive(Debug, Clone)]
pub(crate) struct Refinement {
    pub rounds: Vec<Vec<u32>>,
}

impl Refinement {
    pub fn stable(&self) -> &[u32] {
        self.rounds.last().expect("at least one round")
    }

    /// First round in which `s` and `t` are in different blocks.
    pub fn split_round(&self, s: usize, t: usize) -> Option<usize> {
        self.rounds.iter().position(|r| r[s] != r[t])
    }
}

/// Coarsest partition that is stable for the labelled graph `adj`
/// (`adj[s]` lists `(label, target)`); i.e. strong bisimilarity on `adj`.
pub(crate) fn refine(adj: &[Vec<(u32, usize)>]) -> Refinement {
    let n = adj.len();
    let mut rounds = vec![vec![0u32; n]];
    let mut count = usize::from(n > 0);
    loop {
        let prev = rounds.last().unwrap();
        let mut ids: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
        let mut next = Vec::with_capacity(n);
        for s in 0..n {
            let mut sig: Vec<(u32, u32)> = adj[s].iter().map(|&(l, t)| (l, prev[t])).collect();
            sig.sort_unstable();
            sig.dedup();
            let fresh = ids.len() as u32;
            next.push(*ids.entry((prev[s], sig)).or_insert(fresh));
        }
        if ids.len() == count {
            return Refinement { rounds };
        }
        count = ids.len();
        rounds.push(next);
    }
}
