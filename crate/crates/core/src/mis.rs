//! Maximum independent set backends for the pruned kernel.
//!
//! All backends work on [`SimpleGraph`], a plain adjacency-list graph, and
//! return vertex indices in ascending order.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
}

impl SimpleGraph {
    /// Adjacency lists are sorted and deduplicated.
    pub fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        SimpleGraph { adj }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        Self::from_adjacency(adj)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut inside = vec![false; self.len()];
        for &u in set {
            inside[u] = true;
        }
        set.iter().all(|&u| self.adj[u].iter().all(|&w| !inside[w]))
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Exact when the kernel fits `exact_vertex_limit`, local search otherwise.
    #[default]
    Auto,
    Exact,
    Greedy,
    #[serde(rename = "local")]
    LocalSearch,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Auto => "auto",
            Backend::Exact => "exact",
            Backend::Greedy => "greedy",
            Backend::LocalSearch => "local",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub backend: Backend,
    pub exact_vertex_limit: usize,
    /// Largest swap tried by local search: 2 for (1,2)-swaps only, 3 to add
    /// (2,3)-swaps.
    pub local_search_swap_size: usize,
    pub time_budget: Duration,
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Auto,
            exact_vertex_limit: 60,
            local_search_swap_size: 3,
            time_budget: Duration::from_secs(10),
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MisError {
    #[error("exact solver limit exceeded: {vertices} vertices > limit {limit}")]
    VertexBudget { vertices: usize, limit: usize },
    #[error("local search swap size must be 2 or 3, got {0}")]
    SwapSize(usize),
}

/// Runs the configured backend; `Auto` resolves by kernel size. Returns the
/// set and the backend actually used.
pub fn solve(g: &SimpleGraph, cfg: &SolverConfig) -> Result<(Vec<usize>, Backend), MisError> {
    let backend = match cfg.backend {
        Backend::Auto if g.len() <= cfg.exact_vertex_limit => Backend::Exact,
        Backend::Auto => Backend::LocalSearch,
        b => b,
    };
    let set = match backend {
        Backend::Exact => solve_exact(g, cfg.exact_vertex_limit)?,
        Backend::Greedy => solve_greedy(g),
        Backend::LocalSearch => solve_local_search(g, cfg)?,
        Backend::Auto => unreachable!(),
    };
    Ok((set, backend))
}

/// Fixed-width bitset over at most `len` vertices.
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn full(len: usize) -> Self {
        let mut b = Self::empty(len);
        for u in 0..len {
            b.insert(u);
        }
        b
    }

    fn insert(&mut self, u: usize) {
        self.0[u / 64] |= 1 << (u % 64);
    }

    fn remove(&mut self, u: usize) {
        self.0[u / 64] &= !(1 << (u % 64));
    }

    fn contains(&self, u: usize) -> bool {
        self.0[u / 64] >> (u % 64) & 1 == 1
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn and_count(&self, other: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn minus(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * 64 + w.trailing_zeros() as usize)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64)
                .filter(move |b| word >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

struct Exact {
    adj: Vec<Bits>,
    closed: Vec<Bits>,
}

impl Exact {
    fn new(g: &SimpleGraph) -> Self {
        let n = g.len();
        let mut adj = vec![Bits::empty(n); n];
        for (u, row) in adj.iter_mut().enumerate() {
            for &w in g.neighbors(u) {
                row.insert(w);
            }
        }
        let closed = adj
            .iter()
            .enumerate()
            .map(|(u, a)| {
                let mut c = a.clone();
                c.insert(u);
                c
            })
            .collect();
        Exact { adj, closed }
    }

    fn degree(&self, u: usize, alive: &Bits) -> usize {
        self.adj[u].and_count(alive)
    }

    /// Splits `alive` into connected components.
    fn components(&self, alive: &Bits) -> Vec<Bits> {
        let mut rest = alive.clone();
        let mut out = Vec::new();
        while let Some(start) = rest.first() {
            let mut comp = Bits::empty(self.adj.len());
            let mut stack = vec![start];
            rest.remove(start);
            comp.insert(start);
            while let Some(u) = stack.pop() {
                for w in self.adj[u]
                    .iter()
                    .filter(|&w| rest.contains(w))
                    .collect::<Vec<_>>()
                {
                    rest.remove(w);
                    comp.insert(w);
                    stack.push(w);
                }
            }
            out.push(comp);
        }
        out
    }

    /// A maximum independent set of the subgraph induced on `alive`, or
    /// `None` when its size cannot exceed `floor`.
    fn solve(&self, mut alive: Bits, floor: isize) -> Option<Vec<usize>> {
        let mut forced = Vec::new();
        // Degree <= 1 vertices always belong to some maximum independent set.
        loop {
            let Some(u) = alive.iter().find(|&u| self.degree(u, &alive) <= 1) else {
                break;
            };
            forced.push(u);
            alive.minus(&self.closed[u]);
        }
        let mut floor = floor - forced.len() as isize;
        if alive.count() as isize <= floor {
            return None;
        }
        let comps = self.components(&alive);
        if comps.len() > 1 {
            let mut rest = Vec::new();
            for c in comps {
                rest.extend(self.solve(c, -1).unwrap());
            }
            if rest.len() as isize <= floor {
                return None;
            }
            forced.extend(rest);
            return Some(forced);
        }
        let Some(u) = alive
            .iter()
            .max_by_key(|&u| (self.degree(u, &alive), std::cmp::Reverse(u)))
        else {
            return (floor < 0).then_some(forced);
        };

        let mut with = alive.clone();
        with.minus(&self.closed[u]);
        let mut best = self.solve(with, floor - 1).map(|mut r| {
            r.push(u);
            r
        });
        // A cycle component: some maximum set contains any given vertex.
        if self.degree(u, &alive) > 2 {
            if let Some(b) = &best {
                floor = floor.max(b.len() as isize);
            }
            let mut without = alive;
            without.remove(u);
            if let Some(r) = self.solve(without, floor) {
                best = Some(r);
            }
        }
        best.map(|b| {
            forced.extend(b);
            forced
        })
    }
}

/// Branch and bound with degree-one reduction and component splitting.
pub fn solve_exact(g: &SimpleGraph, vertex_limit: usize) -> Result<Vec<usize>, MisError> {
    if g.len() > vertex_limit {
        return Err(MisError::VertexBudget {
            vertices: g.len(),
            limit: vertex_limit,
        });
    }
    let ex = Exact::new(g);
    let mut set = ex.solve(Bits::full(g.len()), -1).unwrap();
    set.sort_unstable();
    Ok(set)
}

/// Repeatedly takes a minimum-degree vertex (lowest index on ties) and
/// deletes its closed neighbourhood.
pub fn solve_greedy(g: &SimpleGraph) -> Vec<usize> {
    let n = g.len();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|u| g.degree(u)).collect();
    let mut out = Vec::new();
    while let Some(u) = (0..n).filter(|&u| alive[u]).min_by_key(|&u| (deg[u], u)) {
        out.push(u);
        let mut gone = vec![u];
        gone.extend(g.neighbors(u).iter().copied().filter(|&w| alive[w]));
        for &x in &gone {
            alive[x] = false;
        }
        for &x in &gone {
            for &y in g.neighbors(x) {
                if alive[y] {
                    deg[y] -= 1;
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Greedy start followed by (1,2)- and optionally (2,3)-improvement swaps.
pub fn solve_local_search(g: &SimpleGraph, cfg: &SolverConfig) -> Result<Vec<usize>, MisError> {
    if !(2..=3).contains(&cfg.local_search_swap_size) {
        return Err(MisError::SwapSize(cfg.local_search_swap_size));
    }
    let mut ls = LocalSearch::new(g, &solve_greedy(g));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let deadline = Instant::now() + cfg.time_budget;
    while Instant::now() < deadline {
        if ls.one_two_swap(&mut rng) {
            continue;
        }
        if cfg.local_search_swap_size == 3 && ls.two_three_swap(&mut rng) {
            continue;
        }
        break;
    }
    let mut out: Vec<usize> = (0..g.len()).filter(|&u| ls.inside[u]).collect();
    out.sort_unstable();
    Ok(out)
}

struct LocalSearch<'a> {
    g: &'a SimpleGraph,
    inside: Vec<bool>,
    /// Number of solution neighbours of each vertex.
    tight: Vec<usize>,
}

impl<'a> LocalSearch<'a> {
    fn new(g: &'a SimpleGraph, start: &[usize]) -> Self {
        let mut ls = LocalSearch {
            g,
            inside: vec![false; g.len()],
            tight: vec![0; g.len()],
        };
        for &u in start {
            ls.add(u);
        }
        ls
    }

    fn add(&mut self, u: usize) {
        debug_assert!(!self.inside[u] && self.tight[u] == 0);
        self.inside[u] = true;
        for &w in self.g.neighbors(u) {
            self.tight[w] += 1;
        }
    }

    fn drop(&mut self, u: usize) {
        self.inside[u] = false;
        for &w in self.g.neighbors(u) {
            self.tight[w] -= 1;
        }
    }

    fn solution_neighbors(&self, u: usize) -> Vec<usize> {
        self.g
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&w| self.inside[w])
            .collect()
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.g.neighbors(a).binary_search(&b).is_ok()
    }

    /// Fills in any free vertex; the greedy start is already maximal, so this
    /// only matters after a swap.
    fn saturate(&mut self) {
        for u in 0..self.g.len() {
            if !self.inside[u] && self.tight[u] == 0 {
                self.add(u);
            }
        }
    }

    /// Removes one solution vertex and inserts two of its 1-tight neighbours.
    fn one_two_swap(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let mut order: Vec<usize> = (0..self.g.len()).filter(|&u| self.inside[u]).collect();
        order.shuffle(rng);
        for x in order {
            let cands: Vec<usize> = self
                .g
                .neighbors(x)
                .iter()
                .copied()
                .filter(|&w| !self.inside[w] && self.tight[w] == 1)
                .collect();
            for (k, &a) in cands.iter().enumerate() {
                if let Some(&b) = cands[k + 1..].iter().find(|&&b| !self.adjacent(a, b)) {
                    self.drop(x);
                    self.add(a);
                    self.add(b);
                    self.saturate();
                    return true;
                }
            }
        }
        false
    }

    /// Removes two solution vertices and inserts three vertices whose
    /// solution neighbours lie within the removed pair.
    fn two_three_swap(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let mut pairs = Vec::new();
        for w in 0..self.g.len() {
            if !self.inside[w] && self.tight[w] == 2 {
                let s = self.solution_neighbors(w);
                pairs.push((s[0].min(s[1]), s[0].max(s[1])));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs.shuffle(rng);
        for (x, y) in pairs {
            let mut cands: Vec<usize> = self
                .g
                .neighbors(x)
                .iter()
                .chain(self.g.neighbors(y))
                .copied()
                .filter(|&w| {
                    !self.inside[w] && self.solution_neighbors(w).iter().all(|&s| s == x || s == y)
                })
                .collect();
            cands.sort_unstable();
            cands.dedup();
            if let Some(triple) = self.independent_triple(&cands) {
                self.drop(x);
                self.drop(y);
                for u in triple {
                    self.add(u);
                }
                self.saturate();
                return true;
            }
        }
        false
    }

    fn independent_triple(&self, cands: &[usize]) -> Option<[usize; 3]> {
        for (ia, &a) in cands.iter().enumerate() {
            for (ib, &b) in cands.iter().enumerate().skip(ia + 1) {
                if self.adjacent(a, b) {
                    continue;
                }
                for &c in &cands[ib + 1..] {
                    if !self.adjacent(a, c) && !self.adjacent(b, c) {
                        return Some([a, b, c]);
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cycle(n: usize) -> SimpleGraph {
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        SimpleGraph::from_edges(n, &edges)
    }

    /// Exhaustive subset enumeration.
    fn naive_mis(g: &SimpleGraph) -> usize {
        let n = g.len();
        (0u32..1 << n)
            .filter(|&mask| {
                (0..n).all(|u| {
                    mask >> u & 1 == 0 || g.neighbors(u).iter().all(|&w| mask >> w & 1 == 0)
                })
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = SimpleGraph> {
        (0..=max_n).prop_flat_map(|n| {
            let pairs = n * n.saturating_sub(1) / 2;
            proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
                let mut edges = Vec::new();
                let mut k = 0;
                for a in 0..n {
                    for b in a + 1..n {
                        if bits[k] {
                            edges.push((a, b));
                        }
                        k += 1;
                    }
                }
                SimpleGraph::from_edges(n, &edges)
            })
        })
    }

    #[test]
    fn exact_small_cases() {
        assert!(solve_exact(&SimpleGraph::default(), 60).unwrap().is_empty());
        assert_eq!(
            solve_exact(&SimpleGraph::from_edges(2, &[(0, 1)]), 60)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(solve_exact(&cycle(5), 60).unwrap().len(), 2);
        assert_eq!(solve_exact(&cycle(8), 60).unwrap().len(), 4);
        assert_eq!(
            solve_exact(&cycle(70), 60),
            Err(MisError::VertexBudget {
                vertices: 70,
                limit: 60
            })
        );
    }

    #[test]
    fn greedy_small_cases() {
        assert!(solve_greedy(&SimpleGraph::default()).is_empty());
        let star = SimpleGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(solve_greedy(&star), [1, 2, 3, 4]);
    }

    #[test]
    fn local_search_small_cases() {
        let cfg = SolverConfig::default();
        assert!(solve_local_search(&SimpleGraph::default(), &cfg)
            .unwrap()
            .is_empty());
        assert_eq!(solve_local_search(&cycle(5), &cfg).unwrap().len(), 2);
        let bad = SolverConfig {
            local_search_swap_size: 4,
            ..cfg
        };
        assert_eq!(
            solve_local_search(&cycle(5), &bad),
            Err(MisError::SwapSize(4))
        );
    }

    #[test]
    fn swaps_improve_a_poor_start() {
        let star = SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ls = LocalSearch::new(&star, &[0]);
        assert!(ls.one_two_swap(&mut rng));
        assert_eq!(ls.inside, [false, true, true, true]);

        // Two adjacent hubs each blocking a pair of independent vertices that
        // are 2-tight: only a (2,3)-swap helps.
        let g = SimpleGraph::from_edges(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]);
        let mut ls = LocalSearch::new(&g, &[0, 1]);
        assert!(!ls.one_two_swap(&mut rng));
        assert!(ls.two_three_swap(&mut rng));
        assert_eq!(ls.inside, [false, false, true, true, true]);
    }

    #[test]
    fn auto_backend_resolution() {
        let cfg = SolverConfig {
            exact_vertex_limit: 4,
            ..Default::default()
        };
        assert_eq!(solve(&cycle(4), &cfg).unwrap().1, Backend::Exact);
        assert_eq!(solve(&cycle(5), &cfg).unwrap().1, Backend::LocalSearch);
    }

    fn is_maximal(g: &SimpleGraph, set: &[usize]) -> bool {
        (0..g.len()).all(|u| set.contains(&u) || g.neighbors(u).iter().any(|w| set.contains(w)))
    }

    proptest! {
        #[test]
        fn exact_agrees_with_enumeration(g in arb_graph(14)) {
            let set = solve_exact(&g, 60).unwrap();
            prop_assert!(g.is_independent(&set));
            prop_assert_eq!(set.len(), naive_mis(&g));
        }

        #[test]
        fn heuristics_are_maximal_and_monotone(g in arb_graph(16), seed in any::<u64>()) {
            let greedy = solve_greedy(&g);
            prop_assert!(g.is_independent(&greedy));
            prop_assert!(is_maximal(&g, &greedy));
            for swap in [2, 3] {
                let cfg = SolverConfig { local_search_swap_size: swap, rng_seed: seed, ..Default::default() };
                let ls = solve_local_search(&g, &cfg).unwrap();
                prop_assert!(g.is_independent(&ls));
                prop_assert!(is_maximal(&g, &ls));
                prop_assert!(ls.len() >= greedy.len());
                prop_assert_eq!(&ls, &solve_local_search(&g, &cfg).unwrap());
            }
        }
    }
}
