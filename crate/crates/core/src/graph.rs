//! The bipartite letter graph `H` and the conflict graph `G` of duo-vertices.
//!
//! A duo-vertex `v(i,j)` stands for the pair of parallel edges
//! `(a_i, b_j), (a_{i+1}, b_{j+1})`: mapping A-position `i` to B-position `j`
//! and `i+1` to `j+1`. Two duo-vertices conflict when some position would be
//! mapped to two different partners.
//!
//! Vertices keep their original `(i, j)` labels for their whole life. Square
//! contraction deletes vertices and re-targets the second constraint ("tail")
//! of anchor vertices, so each vertex carries its current pair of mapping
//! constraints explicitly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, Letter, Side};
use crate::mis::SimpleGraph;

/// Label of a duo-vertex: A-position `i` maps to B-position `j` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vid {
    pub i: usize,
    pub j: usize,
}

impl Vid {
    pub const fn new(i: usize, j: usize) -> Self {
        Vid { i, j }
    }
}

impl fmt::Display for Vid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v({},{})", self.i, self.j)
    }
}

/// Shorthand used heavily in tests and reductions.
pub const fn v(i: usize, j: usize) -> Vid {
    Vid { i, j }
}

/// A position constraint `A-position -> B-position`.
pub type Constraint = (usize, usize);

/// True iff the two constraint sets assign some A-position or some
/// B-position two different partners.
pub fn constraints_conflict(x: &[Constraint], y: &[Constraint]) -> bool {
    x.iter()
        .any(|&(a1, b1)| y.iter().any(|&(a2, b2)| (a1 == a2) != (b1 == b2)))
}

/// Definitional conflict test on original duo-vertices.
pub fn conflicts_oracle(u: Vid, w: Vid) -> bool {
    constraints_conflict(
        &[(u.i, u.j), (u.i + 1, u.j + 1)],
        &[(w.i, w.j), (w.i + 1, w.j + 1)],
    )
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} is not in the graph")]
    NoSuchVertex(Vid),
}

/// `H = (A, B, F)`: an edge `e(i,j)` for every same-letter pair.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    by_a: Vec<Vec<usize>>,
    by_b: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    #[allow(clippy::needless_range_loop)]
    pub fn build(inst: &Instance) -> Self {
        let n = inst.n();
        let mut edges = Vec::new();
        let mut by_a = vec![Vec::new(); n + 1];
        let mut by_b = vec![Vec::new(); n + 1];
        for i in 1..=n {
            for j in 1..=n {
                if inst.a(i) == inst.b(j) {
                    edges.push((i, j));
                    by_a[i].push(j);
                    by_b[j].push(i);
                }
            }
        }
        BipartiteGraph {
            n,
            edges,
            by_a,
            by_b,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(i, j)` sorted by `i`, then `j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.by_a.get(i).is_some_and(|js| js.contains(&j))
    }

    /// B-positions joined to A-position `i`.
    pub fn partners_of_a(&self, i: usize) -> &[usize] {
        &self.by_a[i]
    }

    /// A-positions joined to B-position `j`.
    pub fn partners_of_b(&self, j: usize) -> &[usize] {
        &self.by_b[j]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Node {
    pub(crate) content: (Letter, Letter),
    pub(crate) tail: Constraint,
    pub(crate) adj: BTreeSet<Vid>,
}

/// Conflict graph over duo-vertices, keyed by permanent `(i, j)` labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConflictGraph {
    nodes: BTreeMap<Vid, Node>,
    /// `(j, i)` for every present vertex, for column lookups.
    cols: BTreeSet<(usize, usize)>,
}

impl ConflictGraph {
    /// Builds `G` for any occurrence bound, with edges from the closed-form
    /// neighbourhood rule.
    pub fn build(inst: &Instance) -> Self {
        let mut by_content: HashMap<(Letter, Letter), Vec<usize>> = HashMap::new();
        for d in inst.duos(Side::A) {
            by_content.entry(d.content).or_default().push(d.position);
        }
        let mut g = ConflictGraph::default();
        for d in inst.duos(Side::B) {
            if let Some(is) = by_content.get(&d.content) {
                for &i in is {
                    g.insert_node(
                        Vid::new(i, d.position),
                        Node {
                            content: d.content,
                            tail: (i + 1, d.position + 1),
                            adj: BTreeSet::new(),
                        },
                    );
                }
            }
        }
        let ids: Vec<Vid> = g.nodes.keys().copied().collect();
        for u in ids {
            let nbrs = g.neighbors_by_formula(u).expect("vertex just inserted");
            g.nodes.get_mut(&u).unwrap().adj = nbrs;
        }
        g
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, u: Vid) -> bool {
        self.nodes.contains_key(&u)
    }

    /// Vertices in ascending `(i, j)` order.
    pub fn vertices(&self) -> impl Iterator<Item = Vid> + '_ {
        self.nodes.keys().copied()
    }

    pub fn neighbors(&self, u: Vid) -> Option<&BTreeSet<Vid>> {
        self.nodes.get(&u).map(|n| &n.adj)
    }

    pub fn degree(&self, u: Vid) -> usize {
        self.nodes.get(&u).map_or(0, |n| n.adj.len())
    }

    pub fn max_degree(&self) -> usize {
        self.nodes.values().map(|n| n.adj.len()).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: Vid, w: Vid) -> bool {
        self.nodes.get(&u).is_some_and(|n| n.adj.contains(&w))
    }

    /// Each undirected edge once, as `(u, w)` with `u < w`.
    pub fn edges(&self) -> impl Iterator<Item = (Vid, Vid)> + '_ {
        self.nodes
            .iter()
            .flat_map(|(&u, n)| n.adj.iter().filter(move |&&w| u < w).map(move |&w| (u, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.values().map(|n| n.adj.len()).sum::<usize>() / 2
    }

    /// Current letter content of `u`.
    pub fn content(&self, u: Vid) -> Option<(Letter, Letter)> {
        self.nodes.get(&u).map(|n| n.content)
    }

    /// Current mapping constraints of `u`: its head `(i, j)` and its tail,
    /// which is `(i+1, j+1)` until a contraction re-targets it.
    pub fn constraints(&self, u: Vid) -> Option<[Constraint; 2]> {
        self.nodes.get(&u).map(|n| [(u.i, u.j), n.tail])
    }

    /// Present vertices whose head is at A-position `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = Vid> + '_ {
        self.nodes
            .range(Vid::new(i, 0)..Vid::new(i + 1, 0))
            .map(|(&u, _)| u)
    }

    /// Present vertices whose head is at B-position `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = Vid> + '_ {
        self.cols
            .range((j, 0)..(j + 1, 0))
            .map(|&(j, i)| Vid::new(i, j))
    }

    /// Neighbourhood of `u` by the closed form: vertices sharing a B-side
    /// position inconsistently, union those sharing an A-side position
    /// inconsistently. Only meaningful on an uncontracted graph.
    pub fn neighbors_by_formula(&self, u: Vid) -> Result<BTreeSet<Vid>, GraphError> {
        if !self.contains(u) {
            return Err(GraphError::NoSuchVertex(u));
        }
        let mut out = BTreeSet::new();
        for p in [-1isize, 0, 1] {
            let (Some(ip), Some(jp)) = (u.i.checked_add_signed(p), u.j.checked_add_signed(p))
            else {
                continue;
            };
            out.extend(self.column(jp).filter(|w| w.i != ip));
            out.extend(self.row(ip).filter(|w| w.j != jp));
        }
        Ok(out)
    }

    /// First conflicting pair inside `set`, or a member missing from the graph.
    pub fn independence_violation<'a, I>(&self, set: I) -> Option<(Vid, Option<Vid>)>
    where
        I: IntoIterator<Item = &'a Vid>,
    {
        let members: BTreeSet<Vid> = set.into_iter().copied().collect();
        for &u in &members {
            match self.nodes.get(&u) {
                None => return Some((u, None)),
                Some(n) => {
                    if let Some(&w) = n.adj.iter().find(|w| members.contains(w)) {
                        return Some((u, Some(w)));
                    }
                }
            }
        }
        None
    }

    pub fn is_independent<'a, I>(&self, set: I) -> bool
    where
        I: IntoIterator<Item = &'a Vid>,
    {
        self.independence_violation(set).is_none()
    }

    /// Compact index form for the MIS backends; index order follows `(i, j)`.
    pub fn to_simple(&self) -> (SimpleGraph, Vec<Vid>) {
        let ids: Vec<Vid> = self.vertices().collect();
        let index: HashMap<Vid, usize> = ids.iter().enumerate().map(|(k, &u)| (u, k)).collect();
        let adj = ids
            .iter()
            .map(|u| self.nodes[u].adj.iter().map(|w| index[w]).collect())
            .collect();
        (SimpleGraph::from_adjacency(adj), ids)
    }

    /// Deletes `u` and its incident edges, returning its former neighbours.
    pub fn remove_vertex(&mut self, u: Vid) -> Option<BTreeSet<Vid>> {
        let node = self.nodes.remove(&u)?;
        self.cols.remove(&(u.j, u.i));
        for w in &node.adj {
            if let Some(nw) = self.nodes.get_mut(w) {
                nw.adj.remove(&u);
            }
        }
        Some(node.adj)
    }

    /// Inserts the edge `(u, w)`; returns false if it already existed or an
    /// endpoint is missing.
    pub fn add_edge(&mut self, u: Vid, w: Vid) -> bool {
        if u == w || !self.contains(u) || !self.contains(w) || self.has_edge(u, w) {
            return false;
        }
        self.nodes.get_mut(&u).unwrap().adj.insert(w);
        self.nodes.get_mut(&w).unwrap().adj.insert(u);
        true
    }

    pub(crate) fn remove_edge(&mut self, u: Vid, w: Vid) {
        if let Some(n) = self.nodes.get_mut(&u) {
            n.adj.remove(&w);
        }
        if let Some(n) = self.nodes.get_mut(&w) {
            n.adj.remove(&u);
        }
    }

    pub(crate) fn node(&self, u: Vid) -> Option<&Node> {
        self.nodes.get(&u)
    }

    pub(crate) fn node_mut(&mut self, u: Vid) -> Option<&mut Node> {
        self.nodes.get_mut(&u)
    }

    /// Inserts a node and the reverse halves of its edges to present vertices.
    pub(crate) fn insert_node(&mut self, u: Vid, node: Node) {
        for w in &node.adj {
            if let Some(nw) = self.nodes.get_mut(w) {
                nw.adj.insert(u);
            }
        }
        self.cols.insert((u.j, u.i));
        self.nodes.insert(u, node);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ParseMode;

    fn three_squares() -> Instance {
        Instance::parse("abcdefbcde\nfbcdeabcde", ParseMode::Char).unwrap()
    }

    /// All vertices by brute force over position pairs, edges by the
    /// definitional oracle.
    fn oracle_graph(inst: &Instance) -> (Vec<Vid>, BTreeSet<(Vid, Vid)>) {
        let n = inst.n();
        let mut vs = Vec::new();
        for i in 1..n {
            for j in 1..n {
                if inst.a(i) == inst.b(j) && inst.a(i + 1) == inst.b(j + 1) {
                    vs.push(Vid::new(i, j));
                }
            }
        }
        let mut es = BTreeSet::new();
        for (x, &u) in vs.iter().enumerate() {
            for &w in &vs[x + 1..] {
                if conflicts_oracle(u, w) {
                    es.insert((u, w));
                }
            }
        }
        (vs, es)
    }

    #[test]
    fn bipartite_edge_sets() {
        assert_eq!(BipartiteGraph::build(&three_squares()).edges().len(), 18);
        let same = Instance::from_strs("ab", "ab", ParseMode::Char).unwrap();
        assert_eq!(BipartiteGraph::build(&same).edges(), &[(1, 1), (2, 2)]);
        let swap = Instance::from_strs("ab", "ba", ParseMode::Char).unwrap();
        assert_eq!(BipartiteGraph::build(&swap).edges(), &[(1, 2), (2, 1)]);
    }

    #[test]
    fn three_squares_vertices_and_degree_six() {
        let inst = three_squares();
        let g = ConflictGraph::build(&inst);
        assert_eq!(g.len(), 14);
        let by_content = |s: &str| {
            g.vertices()
                .filter(|&u| inst.render_content(g.content(u).unwrap()) == s)
                .count()
        };
        assert_eq!(by_content("ab"), 1);
        assert_eq!(by_content("fb"), 1);
        for s in ["bc", "cd", "de"] {
            assert_eq!(by_content(s), 4);
        }
        assert!(g.contains(v(1, 6)) && g.contains(v(6, 1)));

        let deg6: BTreeSet<Vid> = g.vertices().filter(|&u| g.degree(u) == 6).collect();
        let expected: BTreeSet<Vid> = [v(2, 2), v(7, 7), v(3, 3), v(3, 8), v(8, 3), v(8, 8)]
            .into_iter()
            .collect();
        assert_eq!(deg6, expected);
        assert_eq!(g.max_degree(), 6);
    }

    #[test]
    fn three_squares_neighbourhoods() {
        let g = ConflictGraph::build(&three_squares());
        let n16: Vec<Vid> = g
            .neighbors_by_formula(v(1, 6))
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(n16, vec![v(2, 2), v(7, 7)]);
        for u in [v(4, 4), v(4, 9), v(9, 4), v(9, 9)] {
            assert_eq!(g.degree(u), 4, "{u}");
        }
        assert_eq!(
            g.neighbors_by_formula(v(5, 5)),
            Err(GraphError::NoSuchVertex(v(5, 5)))
        );

        let single =
            ConflictGraph::build(&Instance::from_strs("ab", "ab", ParseMode::Char).unwrap());
        assert_eq!(single.len(), 1);
        assert!(single.neighbors_by_formula(v(1, 1)).unwrap().is_empty());
    }

    #[test]
    fn oracle_examples() {
        assert!(!conflicts_oracle(v(1, 6), v(2, 7)));
        assert!(conflicts_oracle(v(1, 6), v(2, 2)));
        assert!(!conflicts_oracle(v(1, 1), v(5, 5)));
    }

    #[test]
    fn empty_conflict_graph() {
        let g = ConflictGraph::build(&Instance::from_strs("ab", "ba", ParseMode::Char).unwrap());
        assert!(g.is_empty());
    }

    #[test]
    fn build_matches_oracle_on_three_squares() {
        let inst = three_squares();
        let g = ConflictGraph::build(&inst);
        let (vs, es) = oracle_graph(&inst);
        assert_eq!(g.vertices().collect::<Vec<_>>(), vs);
        assert_eq!(g.edges().collect::<BTreeSet<_>>(), es);
    }

    #[test]
    fn mutation_keeps_degrees_consistent() {
        let mut g = ConflictGraph::build(&three_squares());
        let before = g.edge_count();
        let nbrs = g.remove_vertex(v(2, 2)).unwrap();
        assert_eq!(nbrs.len(), 6);
        assert_eq!(g.edge_count(), before - 6);
        assert!(!g.column(2).any(|u| u == v(2, 2)));
        assert!(g.add_edge(v(1, 6), v(6, 1)));
        assert!(!g.add_edge(v(1, 6), v(6, 1)));
        assert_eq!(g.degree(v(1, 6)), 2);
    }

    #[test]
    fn independence_check() {
        let g = ConflictGraph::build(&three_squares());
        let good = [
            v(1, 6),
            v(2, 7),
            v(3, 8),
            v(4, 9),
            v(6, 1),
            v(7, 2),
            v(8, 3),
            v(9, 4),
        ];
        assert!(g.is_independent(&good));
        assert!(!g.is_independent(&[v(1, 6), v(2, 2)]));
        assert_eq!(g.independence_violation(&[v(5, 5)]), Some((v(5, 5), None)));
    }
}
