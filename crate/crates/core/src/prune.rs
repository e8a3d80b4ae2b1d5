//! Leaf pruning on the square-free graph.
//!
//! Degree-0 and degree-1 vertices are taken into the solution one at a time,
//! smallest label first, and deleted together with their neighbour. This is
//! repeated until every remaining vertex has degree at least 2.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{ConflictGraph, Vid};
use crate::squares::find_squares;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PruneRecord {
    /// Vertices committed to the solution, in the order they were taken.
    pub chosen: Vec<Vid>,
    /// Neighbours deleted along with a chosen vertex.
    pub removed_neighbors: Vec<Vid>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PruneError {
    #[error("graph still contains a square at {0}")]
    ContainsSquare(Vid),
}

pub fn prune(g1: &ConflictGraph) -> Result<(ConflictGraph, PruneRecord), PruneError> {
    if let Some(sq) = find_squares(g1).first() {
        return Err(PruneError::ContainsSquare(sq.members()[0]));
    }
    let mut g = g1.clone();
    let mut rec = PruneRecord::default();
    let mut low: BTreeSet<Vid> = g.vertices().filter(|&u| g.degree(u) <= 1).collect();
    while let Some(u) = low.pop_first() {
        if !g.contains(u) {
            continue;
        }
        rec.chosen.push(u);
        let nbrs = g.remove_vertex(u).unwrap();
        for w in nbrs {
            low.remove(&w);
            rec.removed_neighbors.push(w);
            for x in g.remove_vertex(w).unwrap() {
                if g.degree(x) <= 1 {
                    low.insert(x);
                }
            }
        }
    }
    Ok((g, rec))
}
