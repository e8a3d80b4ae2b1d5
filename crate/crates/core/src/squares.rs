//! Square detection, maximal series, and series contraction with lifting.
//!
//! With every letter occurring at most twice per string, a duo content that
//! appears twice in `A` (at `i < i'`) and twice in `B` (at `j < j'`) yields
//! the four vertices `v(i,j), v(i,j'), v(i',j), v(i',j')`: a square. A run of
//! squares each shifted by `+1` in all four indices is a series.
//!
//! Contracting a maximal series deletes its `4p` vertices. Each surviving
//! start anchor `v(x-1, y-1)` (with `x` in `{i, i'}`, `y` in `{j, j'}`) has
//! its second constraint moved from `(x, y)` to `(x+p, y+p)`, exactly as if
//! the four removed substrings had been cut out of the strings, and picks up
//! conflict edges to every anchor it now disagrees with. The result is
//! isomorphic to the conflict graph of the shrunken strings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{constraints_conflict, v, ConflictGraph, Constraint, Node, Vid};
use crate::instance::{Instance, Letter};

/// `S(i,i';j,j')`, canonicalised with `i < i'` and `j < j'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square {
    pub i: usize,
    pub i_prime: usize,
    pub j: usize,
    pub j_prime: usize,
    pub content: (Letter, Letter),
}

impl Square {
    /// `[v(i,j), v(i,j'), v(i',j), v(i',j')]`.
    pub fn members(&self) -> [Vid; 4] {
        [
            v(self.i, self.j),
            v(self.i, self.j_prime),
            v(self.i_prime, self.j),
            v(self.i_prime, self.j_prime),
        ]
    }

    pub fn key(&self) -> (usize, usize, usize, usize) {
        (self.i, self.i_prime, self.j, self.j_prime)
    }
}

/// A run of `p` consecutive squares starting at `S(i,i';j,j')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SquareSeries {
    pub i: usize,
    pub i_prime: usize,
    pub j: usize,
    pub j_prime: usize,
    pub p: usize,
}

impl fmt::Display for SquareSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S^{}({},{};{},{})",
            self.p, self.i, self.i_prime, self.j, self.j_prime
        )
    }
}

impl SquareSeries {
    pub fn new(i: usize, i_prime: usize, j: usize, j_prime: usize, p: usize) -> Self {
        SquareSeries {
            i,
            i_prime,
            j,
            j_prime,
            p,
        }
    }

    fn diagonal(&self, x: usize, y: usize) -> Vec<Vid> {
        (0..self.p).map(|q| v(x + q, y + q)).collect()
    }

    /// `{v(i+q, j+q)}`.
    pub fn main_a(&self) -> Vec<Vid> {
        self.diagonal(self.i, self.j)
    }

    /// `{v(i'+q, j'+q)}`.
    pub fn main_b(&self) -> Vec<Vid> {
        self.diagonal(self.i_prime, self.j_prime)
    }

    /// `{v(i'+q, j+q)}`.
    pub fn anti_1(&self) -> Vec<Vid> {
        self.diagonal(self.i_prime, self.j)
    }

    /// `{v(i+q, j'+q)}`.
    pub fn anti_2(&self) -> Vec<Vid> {
        self.diagonal(self.i, self.j_prime)
    }

    /// The two diagonal bases that make up the main pair and the anti pair.
    fn main_bases(&self) -> [(usize, usize); 2] {
        [(self.i, self.j), (self.i_prime, self.j_prime)]
    }

    fn anti_bases(&self) -> [(usize, usize); 2] {
        [(self.i_prime, self.j), (self.i, self.j_prime)]
    }

    pub fn vertices(&self) -> Vec<Vid> {
        let mut out = self.main_a();
        out.extend(self.main_b());
        out.extend(self.anti_1());
        out.extend(self.anti_2());
        out
    }

    fn square_at(&self, q: isize) -> [Vid; 4] {
        let s = |x: usize| x.wrapping_add_signed(q);
        [
            v(s(self.i), s(self.j)),
            v(s(self.i), s(self.j_prime)),
            v(s(self.i_prime), s(self.j)),
            v(s(self.i_prime), s(self.j_prime)),
        ]
    }
}

/// Every square in the current graph, sorted by `(i, i', j, j')`.
pub fn find_squares(g: &ConflictGraph) -> Vec<Square> {
    let mut groups: BTreeMap<(Letter, Letter), Vec<Vid>> = BTreeMap::new();
    for u in g.vertices() {
        groups.entry(g.content(u).unwrap()).or_default().push(u);
    }
    let mut out = Vec::new();
    for (content, members) in groups {
        if members.len() != 4 {
            continue;
        }
        let is: BTreeSet<usize> = members.iter().map(|u| u.i).collect();
        let js: BTreeSet<usize> = members.iter().map(|u| u.j).collect();
        if is.len() != 2 || js.len() != 2 {
            continue;
        }
        let (i, i_prime) = (*is.first().unwrap(), *is.last().unwrap());
        let (j, j_prime) = (*js.first().unwrap(), *js.last().unwrap());
        out.push(Square {
            i,
            i_prime,
            j,
            j_prime,
            content,
        });
    }
    out.sort();
    out
}

/// Partitions squares into maximal runs under the `+1` shift, ordered by
/// base square.
pub fn find_maximal_series(squares: &[Square]) -> Vec<SquareSeries> {
    let keys: BTreeSet<_> = squares.iter().map(Square::key).collect();
    let mut out = Vec::new();
    for &(i, ip, j, jp) in &keys {
        if i > 0 && j > 0 && keys.contains(&(i - 1, ip - 1, j - 1, jp - 1)) {
            continue;
        }
        let mut p = 1;
        while keys.contains(&(i + p, ip + p, j + p, jp + p)) {
            p += 1;
        }
        out.push(SquareSeries::new(i, ip, j, jp, p));
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContractError {
    #[error("series {0} is not maximal in the current graph")]
    NotMaximal(SquareSeries),
    #[error("series {0} is missing member vertex {1}")]
    MissingVertex(SquareSeries, Vid),
}

/// Reversible log of one series contraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionRecord {
    pub series: SquareSeries,
    pub main_a: Vec<Vid>,
    pub main_b: Vec<Vid>,
    pub anti_1: Vec<Vid>,
    pub anti_2: Vec<Vid>,
    /// Surviving anchors before the series, whose tail was re-targeted.
    pub start_anchors: Vec<Vid>,
    /// Surviving anchors right after the series.
    pub end_anchors: Vec<Vid>,
    /// Anchors whose presence in a solution forces the main diagonals.
    pub main_triggers: Vec<Vid>,
    /// Anchors whose presence in a solution forces the anti diagonals.
    pub anti_triggers: Vec<Vid>,
    pub anchor_edges: Vec<(Vid, Vid)>,
    retargeted: Vec<(Vid, Constraint, (Letter, Letter))>,
    removed: Vec<(Vid, Node)>,
}

impl ContractionRecord {
    pub fn deleted(&self) -> impl Iterator<Item = Vid> + '_ {
        self.main_a
            .iter()
            .chain(&self.main_b)
            .chain(&self.anti_1)
            .chain(&self.anti_2)
            .copied()
    }
}

fn square_present(g: &ConflictGraph, members: [Vid; 4]) -> bool {
    let mut contents = members.iter().map(|&u| g.content(u));
    let first = contents.next().flatten();
    first.is_some() && contents.all(|c| c == first)
}

/// Contracts a maximal series out of `g`. Surviving vertices keep their labels.
pub fn contract_series(
    g: &mut ConflictGraph,
    s: SquareSeries,
) -> Result<ContractionRecord, ContractError> {
    contract_series_impl(g, s, true)
}

pub(crate) fn contract_series_impl(
    g: &mut ConflictGraph,
    s: SquareSeries,
    add_anchor_edges: bool,
) -> Result<ContractionRecord, ContractError> {
    for u in s.vertices() {
        if !g.contains(u) {
            return Err(ContractError::MissingVertex(s, u));
        }
    }
    if square_present(g, s.square_at(-1)) || square_present(g, s.square_at(s.p as isize)) {
        return Err(ContractError::NotMaximal(s));
    }

    // For each diagonal base (x, y): the constraint that now follows the
    // anchor at (x-1, y-1) and the letter it lands on.
    let last = |(x, y): (usize, usize)| v(x + s.p - 1, y + s.p - 1);
    let resume = |base: (usize, usize)| {
        let n = g.node(last(base)).unwrap();
        (n.tail, n.content.1)
    };

    let mut start_anchors = Vec::new();
    let mut end_anchors = Vec::new();
    let mut main_triggers = Vec::new();
    let mut anti_triggers = Vec::new();
    let mut retarget = Vec::new();
    for (bases, triggers) in [
        (s.main_bases(), &mut main_triggers),
        (s.anti_bases(), &mut anti_triggers),
    ] {
        for base @ (x, y) in bases {
            if x > 1 && y > 1 {
                let a = v(x - 1, y - 1);
                if g.node(a).is_some_and(|n| n.tail == (x, y)) {
                    start_anchors.push(a);
                    triggers.push(a);
                    retarget.push((a, resume(base)));
                }
            }
            let (tail, _) = resume(base);
            let e = v(tail.0, tail.1);
            if g.contains(e) {
                end_anchors.push(e);
                triggers.push(e);
            }
        }
    }

    let removed: Vec<(Vid, Node)> = s
        .vertices()
        .into_iter()
        .map(|u| (u, g.node(u).unwrap().clone()))
        .collect();
    for (u, _) in &removed {
        g.remove_vertex(*u);
    }

    let mut retargeted = Vec::new();
    for &(a, (tail, letter)) in &retarget {
        let node = g.node_mut(a).unwrap();
        retargeted.push((a, node.tail, node.content));
        node.tail = tail;
        node.content.1 = letter;
    }

    let mut anchor_edges = Vec::new();
    if add_anchor_edges {
        let candidates: BTreeSet<Vid> = start_anchors.iter().chain(&end_anchors).copied().collect();
        for &a in &start_anchors {
            let ca = g.constraints(a).unwrap();
            for &c in &candidates {
                if c != a
                    && !g.has_edge(a, c)
                    && constraints_conflict(&ca, &g.constraints(c).unwrap())
                {
                    g.add_edge(a, c);
                    anchor_edges.push((a.min(c), a.max(c)));
                }
            }
        }
    }

    Ok(ContractionRecord {
        series: s,
        main_a: s.main_a(),
        main_b: s.main_b(),
        anti_1: s.anti_1(),
        anti_2: s.anti_2(),
        start_anchors,
        end_anchors,
        main_triggers,
        anti_triggers,
        anchor_edges,
        retargeted,
        removed,
    })
}

/// Undoes a contraction. Records must be restored in reverse order.
pub fn restore(g: &mut ConflictGraph, rec: &ContractionRecord) {
    for &(a, c) in &rec.anchor_edges {
        g.remove_edge(a, c);
    }
    for &(a, tail, content) in &rec.retargeted {
        if let Some(node) = g.node_mut(a) {
            node.tail = tail;
            node.content = content;
        }
    }
    for (u, node) in &rec.removed {
        g.insert_node(*u, node.clone());
    }
}

/// Repeatedly contracts the maximal series with the smallest base until no
/// square remains. Returns the square-free graph and the records in
/// application order.
pub fn eliminate_squares(g: &ConflictGraph) -> (ConflictGraph, Vec<ContractionRecord>) {
    eliminate_squares_impl(g, true)
}

pub(crate) fn eliminate_squares_impl(
    g: &ConflictGraph,
    add_anchor_edges: bool,
) -> (ConflictGraph, Vec<ContractionRecord>) {
    let mut g = g.clone();
    let mut records = Vec::new();
    loop {
        let squares = find_squares(&g);
        let Some(&s) = find_maximal_series(&squares).first() else {
            break;
        };
        let rec = contract_series_impl(&mut g, s, add_anchor_edges)
            .expect("series from find_maximal_series is maximal");
        records.push(rec);
    }
    (g, records)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LiftError {
    #[error("input is not independent in the contracted graph ({0} conflicts with {1:?})")]
    NotIndependent(Vid, Option<Vid>),
    #[error("solution for {0} contains both a main and an anti diagonal trigger")]
    BothDiagonals(SquareSeries),
}

/// Which diagonal pair was re-inserted by [`lift`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagonals {
    Main,
    Anti,
}

/// Extends an independent set of the contracted graph `g_post` by `2p`
/// series vertices. Main diagonals are the default when no anchor is chosen.
pub fn lift(
    g_post: &ConflictGraph,
    solution: &BTreeSet<Vid>,
    rec: &ContractionRecord,
) -> Result<(BTreeSet<Vid>, Diagonals), LiftError> {
    if let Some((u, w)) = g_post.independence_violation(solution) {
        return Err(LiftError::NotIndependent(u, w));
    }
    let main = rec.main_triggers.iter().any(|u| solution.contains(u));
    let anti = rec.anti_triggers.iter().any(|u| solution.contains(u));
    let (pick, added): (Diagonals, Vec<Vid>) = match (main, anti) {
        (true, true) => return Err(LiftError::BothDiagonals(rec.series)),
        (false, true) => (
            Diagonals::Anti,
            rec.anti_1.iter().chain(&rec.anti_2).copied().collect(),
        ),
        _ => (
            Diagonals::Main,
            rec.main_a.iter().chain(&rec.main_b).copied().collect(),
        ),
    };
    let mut out = solution.clone();
    out.extend(added);
    Ok((out, pick))
}

/// Map from original 1-based positions to positions in a shrunken instance;
/// index 0 is unused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionMap {
    pub a: Vec<Option<usize>>,
    pub b: Vec<Option<usize>>,
}

impl PositionMap {
    pub fn identity(n: usize) -> Self {
        let id: Vec<Option<usize>> = (0..=n).map(|x| (x > 0).then_some(x)).collect();
        PositionMap {
            a: id.clone(),
            b: id,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &PositionMap) -> PositionMap {
        let step = |m: &[Option<usize>], n: &[Option<usize>]| {
            m.iter().map(|x| x.and_then(|x| n[x])).collect()
        };
        PositionMap {
            a: step(&self.a, &next.a),
            b: step(&self.b, &next.b),
        }
    }

    pub fn map_vid(&self, u: Vid) -> Option<Vid> {
        Some(v(
            self.a.get(u.i).copied().flatten()?,
            self.b.get(u.j).copied().flatten()?,
        ))
    }
}

/// Cuts the four length-`p` substrings of a series out of the strings.
/// Positions are in the coordinates of `inst`.
pub fn shrink_strings(inst: &Instance, s: SquareSeries) -> (Instance, PositionMap) {
    let n = inst.n();
    let cut =
        |x: usize, lo: usize, hi: usize| (lo..lo + s.p).contains(&x) || (hi..hi + s.p).contains(&x);
    let keep_a: Vec<usize> = (1..=n).filter(|&x| !cut(x, s.i, s.i_prime)).collect();
    let keep_b: Vec<usize> = (1..=n).filter(|&y| !cut(y, s.j, s.j_prime)).collect();
    let mut map = PositionMap {
        a: vec![None; n + 1],
        b: vec![None; n + 1],
    };
    for (new, &old) in keep_a.iter().enumerate() {
        map.a[old] = Some(new + 1);
    }
    for (new, &old) in keep_b.iter().enumerate() {
        map.b[old] = Some(new + 1);
    }
    (inst.restrict(&keep_a, &keep_b), map)
}

/// Compares a label-preserving contracted graph with the conflict graph of
/// the shrunken strings under `map`. Returns a description of the first
/// difference.
pub fn isomorphism_mismatch(
    contracted: &ConflictGraph,
    shrunk: &Instance,
    map: &PositionMap,
) -> Option<String> {
    let target = ConflictGraph::build(shrunk);
    let mut image = BTreeMap::new();
    for u in contracted.vertices() {
        let Some(w) = map.map_vid(u) else {
            return Some(format!("{u} has a removed position"));
        };
        if !target.contains(w) {
            return Some(format!("{u} maps to {w}, absent from the shrunken graph"));
        }
        if target.content(w) != contracted.content(u) {
            return Some(format!("{u} and its image {w} differ in letter content"));
        }
        image.insert(u, w);
    }
    if image.len() != target.len() {
        let hit: BTreeSet<Vid> = image.values().copied().collect();
        let missed = target.vertices().find(|w| !hit.contains(w));
        return Some(format!(
            "vertex counts differ ({} vs {}), e.g. {:?} has no preimage",
            contracted.len(),
            target.len(),
            missed
        ));
    }
    for (u, w) in contracted.edges() {
        if !target.has_edge(image[&u], image[&w]) {
            return Some(format!("edge {u}-{w} has no image"));
        }
    }
    if contracted.edge_count() != target.edge_count() {
        return Some(format!(
            "edge counts differ ({} vs {})",
            contracted.edge_count(),
            target.edge_count()
        ));
    }
    None
}
