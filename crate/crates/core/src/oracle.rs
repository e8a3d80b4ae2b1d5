//! Exhaustive ground truth. Nothing here goes through the reductions or the
//! solver backends: vertices come straight from the strings and conflicts
//! from the definitional position test.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{conflicts_oracle, v, ConflictGraph, Vid};
use crate::instance::Instance;

pub const BRUTE_FORCE_LIMIT: usize = 30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vertices} vertices exceed the brute-force limit of {limit}")]
    TooLarge { vertices: usize, limit: usize },
}

/// Every `v(i,j)` with matching duo content, found by scanning all pairs.
pub fn raw_vertices(inst: &Instance) -> Vec<Vid> {
    let n = inst.n();
    let mut out = Vec::new();
    for i in 1..n {
        for j in 1..n {
            if inst.a(i) == inst.b(j) && inst.a(i + 1) == inst.b(j + 1) {
                out.push(v(i, j));
            }
        }
    }
    out
}

/// Maximum independent set of the full conflict graph.
pub fn brute_force_opt(inst: &Instance) -> Result<BTreeSet<Vid>, OracleError> {
    brute_force_opt_avoiding(inst, &BTreeSet::new())
}

/// Largest independent set that uses none of `avoid`.
pub fn brute_force_opt_avoiding(
    inst: &Instance,
    avoid: &BTreeSet<Vid>,
) -> Result<BTreeSet<Vid>, OracleError> {
    let verts: Vec<Vid> = raw_vertices(inst)
        .into_iter()
        .filter(|u| !avoid.contains(u))
        .collect();
    if verts.len() > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            vertices: verts.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let adj: Vec<u64> = verts
        .iter()
        .map(|&u| {
            verts
                .iter()
                .enumerate()
                .filter(|&(_, &w)| w != u && conflicts_oracle(u, w))
                .fold(0u64, |m, (x, _)| m | 1 << x)
        })
        .collect();
    Ok(mis_bits(&adj).into_iter().map(|x| verts[x]).collect())
}

/// Maximum independent set of an arbitrary (possibly contracted) conflict
/// graph, by the same exhaustive search.
pub fn graph_mis(g: &ConflictGraph) -> Result<BTreeSet<Vid>, OracleError> {
    if g.len() > 64 {
        return Err(OracleError::TooLarge {
            vertices: g.len(),
            limit: 64,
        });
    }
    let ids: Vec<Vid> = g.vertices().collect();
    let adj: Vec<u64> = ids
        .iter()
        .map(|&u| {
            ids.iter()
                .enumerate()
                .filter(|&(_, &w)| g.has_edge(u, w))
                .fold(0u64, |m, (x, _)| m | 1 << x)
        })
        .collect();
    Ok(mis_bits(&adj).into_iter().map(|x| ids[x]).collect())
}

pub fn graph_opt(g: &ConflictGraph) -> Result<usize, OracleError> {
    graph_mis(g).map(|s| s.len())
}

/// All maximum independent sets of the full conflict graph.
pub fn all_maximum_sets(inst: &Instance) -> Result<Vec<BTreeSet<Vid>>, OracleError> {
    let verts = raw_vertices(inst);
    if verts.len() > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            vertices: verts.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let opt = brute_force_opt(inst)?.len();
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<Vid>)> = vec![(0, Vec::new())];
    while let Some((next, cur)) = stack.pop() {
        if cur.len() + (verts.len() - next) < opt {
            continue;
        }
        if next == verts.len() {
            out.push(cur.into_iter().collect());
            continue;
        }
        let u = verts[next];
        stack.push((next + 1, cur.clone()));
        if cur.iter().all(|&w| !conflicts_oracle(u, w)) {
            let mut with = cur;
            with.push(u);
            stack.push((next + 1, with));
        }
    }
    out.sort();
    Ok(out)
}

fn mis_bits(adj: &[u64]) -> Vec<usize> {
    let all = if adj.len() == 64 {
        u64::MAX
    } else {
        (1u64 << adj.len()) - 1
    };
    let mut best = 0u64;
    branch(adj, all, 0, &mut best);
    (0..adj.len()).filter(|&x| best >> x & 1 == 1).collect()
}

fn branch(adj: &[u64], cand: u64, cur: u64, best: &mut u64) {
    if cand == 0 {
        if cur.count_ones() > best.count_ones() {
            *best = cur;
        }
        return;
    }
    if cur.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    let x = cand.trailing_zeros() as usize;
    let bit = 1u64 << x;
    branch(adj, cand & !bit & !adj[x], cur | bit, best);
    if adj[x] & cand != 0 {
        branch(adj, cand & !bit, cur, best);
    }
}
