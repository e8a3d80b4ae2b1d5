//! End-to-end solve: build, eliminate squares, prune leaves, solve the
//! kernel, lift back, and cut the common partition.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{v, ConflictGraph, Vid};
use crate::instance::{Instance, Side, ValidationReport};
use crate::mis::{self, Backend, MisError, SolverConfig};
use crate::prune::{prune, PruneError};
use crate::squares::{eliminate_squares_impl, lift, restore, LiftError, SquareSeries};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservedDuo {
    pub i: usize,
    pub j: usize,
    pub content: [String; 2],
}

/// A block of `len` letters starting at 1-based `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

/// Blocks in `A` order; `blocks_b[k]` is where `blocks_a[k]` lands in `B`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CommonPartition {
    pub blocks_a: Vec<Block>,
    pub blocks_b: Vec<Block>,
}

impl CommonPartition {
    pub fn len(&self) -> usize {
        self.blocks_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks_a.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub v_g: usize,
    pub v_g1: usize,
    pub v_g2: usize,
    pub max_deg_g2: usize,
    /// Vertices committed by leaf pruning.
    pub chosen: usize,
    /// Size of the backend's independent set on the kernel.
    pub kernel_solution: usize,
    pub series: Vec<SquareSeries>,
    pub backend: Backend,
    pub seed: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub n: usize,
    pub k: usize,
    pub preserved: usize,
    pub vertices: Vec<PreservedDuo>,
    /// `mapping[i - 1]` is the B-position that A-position `i` maps to.
    pub mapping: Vec<usize>,
    #[serde(flatten)]
    pub partition: CommonPartition,
    pub stats: SolveStats,
    pub config: SolverConfig,
}

impl Solution {
    pub fn independent_set(&self) -> BTreeSet<Vid> {
        self.vertices.iter().map(|d| v(d.i, d.j)).collect()
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("instance is not a valid 2-bounded instance:\n{0}")]
    Validation(ValidationReport),
    #[error(transparent)]
    Budget(#[from] MisError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<LiftError> for PipelineError {
    fn from(e: LiftError) -> Self {
        PipelineError::Internal(e.to_string())
    }
}

impl From<PruneError> for PipelineError {
    fn from(e: PruneError) -> Self {
        PipelineError::Internal(e.to_string())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("{0} is not a duo-vertex of the instance")]
    NotAVertex(Vid),
    #[error("position constraints clash at {0} (set is not independent)")]
    Inconsistent(Vid),
    #[error("letter counts differ between the strings")]
    NotPermutation,
}

/// Runs the full reduction pipeline on a validated `k = 2` instance.
pub fn approx_solve(inst: &Instance, cfg: &SolverConfig) -> Result<Solution, PipelineError> {
    approx_solve_impl(inst, cfg, true)
}

pub(crate) fn approx_solve_impl(
    inst: &Instance,
    cfg: &SolverConfig,
    add_anchor_edges: bool,
) -> Result<Solution, PipelineError> {
    let started = Instant::now();
    let report = inst.validate(2);
    if !report.is_ok() {
        return Err(PipelineError::Validation(report));
    }

    let g = ConflictGraph::build(inst);
    let (g1, records) = eliminate_squares_impl(&g, add_anchor_edges);
    let (g2, pruned) = prune(&g1)?;
    let (kernel, ids) = g2.to_simple();
    let (kernel_set, backend) = mis::solve(&kernel, cfg)?;

    let mut solution: BTreeSet<Vid> = pruned.chosen.iter().copied().collect();
    solution.extend(kernel_set.iter().map(|&x| ids[x]));

    let mut current = g1.clone();
    for rec in records.iter().rev() {
        let (lifted, _) = lift(&current, &solution, rec)?;
        restore(&mut current, rec);
        if let Some((a, b)) = current.independence_violation(&lifted) {
            return Err(PipelineError::Internal(format!(
                "lifting {} produced dependent pair {a}, {b:?}",
                rec.series
            )));
        }
        solution = lifted;
    }

    let (mapping, partition) = reconstruct_partition(inst, &solution)
        .map_err(|e| PipelineError::Internal(e.to_string()))?;

    let vertices = solution
        .iter()
        .map(|u| PreservedDuo {
            i: u.i,
            j: u.j,
            content: [
                inst.token(inst.a(u.i)).to_owned(),
                inst.token(inst.a(u.i + 1)).to_owned(),
            ],
        })
        .collect();

    Ok(Solution {
        n: inst.n(),
        k: inst.k(),
        preserved: solution.len(),
        vertices,
        mapping,
        partition,
        stats: SolveStats {
            v_g: g.len(),
            v_g1: g1.len(),
            v_g2: g2.len(),
            max_deg_g2: g2.max_degree(),
            chosen: pruned.chosen.len(),
            kernel_solution: kernel_set.len(),
            series: records.iter().map(|r| r.series).collect(),
            backend,
            seed: cfg.rng_seed,
            elapsed_ms: started.elapsed().as_millis() as u64,
        },
        config: cfg.clone(),
    })
}

/// Fixes `i -> j` and `i+1 -> j+1` for every vertex, completes the mapping
/// by pairing the remaining same-letter positions in ascending order, and
/// cuts a block wherever the mapping stops advancing by one.
pub fn reconstruct_partition(
    inst: &Instance,
    set: &BTreeSet<Vid>,
) -> Result<(Vec<usize>, CommonPartition), PartitionError> {
    let n = inst.n();
    let mut fwd = vec![0usize; n + 1];
    let mut back = vec![0usize; n + 1];
    for &u in set {
        if u.i == 0 || u.j == 0 || u.i >= n || u.j >= n {
            return Err(PartitionError::NotAVertex(u));
        }
        if inst.a(u.i) != inst.b(u.j) || inst.a(u.i + 1) != inst.b(u.j + 1) {
            return Err(PartitionError::NotAVertex(u));
        }
        for (x, y) in [(u.i, u.j), (u.i + 1, u.j + 1)] {
            if (fwd[x] != 0 && fwd[x] != y) || (back[y] != 0 && back[y] != x) {
                return Err(PartitionError::Inconsistent(u));
            }
            fwd[x] = y;
            back[y] = x;
        }
    }

    let letters = inst.alphabet_size();
    let mut free_b: Vec<Vec<usize>> = vec![Vec::new(); letters];
    for y in (1..=n).rev().filter(|&y| back[y] == 0) {
        free_b[inst.b(y).0 as usize].push(y);
    }
    for x in 1..=n {
        if fwd[x] != 0 {
            continue;
        }
        let y = free_b[inst.a(x).0 as usize]
            .pop()
            .ok_or(PartitionError::NotPermutation)?;
        fwd[x] = y;
        back[y] = x;
    }
    if free_b.iter().any(|f| !f.is_empty()) {
        return Err(PartitionError::NotPermutation);
    }

    let mapping: Vec<usize> = fwd[1..].to_vec();
    let mut partition = CommonPartition::default();
    let mut start = 1;
    for x in 1..=n {
        if x == n || fwd[x + 1] != fwd[x] + 1 {
            let block = Block {
                start,
                len: x + 1 - start,
            };
            partition.blocks_a.push(block);
            partition.blocks_b.push(Block {
                start: fwd[start],
                len: block.len,
            });
            start = x + 1;
        }
    }
    Ok((mapping, partition))
}

/// Checks that `mapping` is a letter-preserving bijection and that the
/// partition tiles both strings consistently with it.
pub fn partition_violation(
    inst: &Instance,
    mapping: &[usize],
    partition: &CommonPartition,
) -> Option<String> {
    let n = inst.n();
    if mapping.len() != n {
        return Some(format!(
            "mapping has {} entries, expected {n}",
            mapping.len()
        ));
    }
    let mut seen = vec![false; n + 1];
    for (idx, &y) in mapping.iter().enumerate() {
        if y == 0 || y > n || std::mem::replace(&mut seen[y], true) {
            return Some(format!(
                "mapping is not a permutation at A-position {}",
                idx + 1
            ));
        }
        if inst.a(idx + 1) != inst.b(y) {
            return Some(format!("A-position {} maps to a different letter", idx + 1));
        }
    }
    if partition.blocks_a.len() != partition.blocks_b.len() {
        return Some("block lists differ in length".into());
    }
    let mut next = 1;
    for (ba, bb) in partition.blocks_a.iter().zip(&partition.blocks_b) {
        if ba.start != next || ba.len == 0 || ba.len != bb.len {
            return Some(format!(
                "A-block at {} does not continue the tiling",
                ba.start
            ));
        }
        next += ba.len;
        for off in 0..ba.len {
            if mapping[ba.start + off - 1] != bb.start + off {
                return Some(format!(
                    "block at A-position {} is not mapped contiguously",
                    ba.start
                ));
            }
        }
    }
    if next != n + 1 {
        return Some("A-blocks do not cover A".into());
    }
    let mut b_sorted = partition.blocks_b.clone();
    b_sorted.sort_by_key(|b| b.start);
    let mut next = 1;
    for bb in &b_sorted {
        if bb.start != next {
            return Some(format!("B-blocks do not tile B at position {next}"));
        }
        next += bb.len;
    }
    if next != n + 1 {
        return Some("B-blocks do not cover B".into());
    }
    None
}

/// Duos kept inside a block by `mapping`, as vertices.
pub fn preserved_by_mapping(mapping: &[usize]) -> BTreeSet<Vid> {
    (1..mapping.len())
        .filter(|&x| mapping[x] == mapping[x - 1] + 1)
        .map(|x| v(x, mapping[x - 1]))
        .collect()
}

/// Renders `A` cut into the partition's blocks, e.g. `abcde|fbcde`.
pub fn render_blocks(inst: &Instance, partition: &CommonPartition) -> Vec<String> {
    partition
        .blocks_a
        .iter()
        .map(|b| {
            let toks: Vec<&str> = (b.start..b.start + b.len)
                .map(|x| inst.token(inst.letter(Side::A, x)))
                .collect();
            toks.join(if inst.is_char_alphabet() { "" } else { " " })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Deterministic rendering of a solution; JSON parses back to an equal
/// [`Solution`].
pub fn report(sol: &Solution, fmt: Format) -> String {
    match fmt {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(sol).expect("solution is plain data");
            s.push('\n');
            s
        }
        Format::Text => report_text(sol),
    }
}

fn report_text(sol: &Solution) -> String {
    let st = &sol.stats;
    let mut s = String::new();
    let _ = writeln!(s, "n = {}, k = {}", sol.n, sol.k);
    let _ = writeln!(s, "preserved duos: {}", sol.preserved);
    for d in &sol.vertices {
        let _ = writeln!(s, "  {} {}{}", v(d.i, d.j), d.content[0], d.content[1]);
    }
    let blocks: Vec<String> = sol
        .partition
        .blocks_a
        .iter()
        .zip(&sol.partition.blocks_b)
        .map(|(a, b)| {
            format!(
                "A[{}..{}]->B[{}..{}]",
                a.start,
                a.start + a.len - 1,
                b.start,
                b.start + b.len - 1
            )
        })
        .collect();
    let _ = writeln!(s, "blocks: {}", sol.partition.len());
    let _ = writeln!(s, "  {}", blocks.join(" "));
    let mapping: Vec<String> = sol.mapping.iter().map(usize::to_string).collect();
    let _ = writeln!(s, "mapping: {}", mapping.join(" "));
    let _ = writeln!(
        s,
        "graphs: |V(G)| = {}, |V(G1)| = {}, |V(G2)| = {}, max degree of G2 = {}",
        st.v_g, st.v_g1, st.v_g2, st.max_deg_g2
    );
    let series: Vec<String> = st.series.iter().map(ToString::to_string).collect();
    let _ = writeln!(
        s,
        "series: {}",
        if series.is_empty() {
            "none".into()
        } else {
            series.join(" ")
        }
    );
    let _ = writeln!(
        s,
        "pruned: {}, kernel solution: {}, backend: {}, seed: {}, elapsed: {} ms",
        st.chosen,
        st.kernel_solution,
        st.backend.name(),
        st.seed,
        st.elapsed_ms
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ParseMode;

    fn inst(a: &str, b: &str) -> Instance {
        Instance::from_strs(a, b, ParseMode::Char).unwrap()
    }

    fn exact() -> SolverConfig {
        SolverConfig {
            backend: Backend::Exact,
            ..Default::default()
        }
    }

    #[test]
    fn three_squares_exact() {
        let three_squares = inst("abcdefbcde", "fbcdeabcde");
        let sol = approx_solve(&three_squares, &exact()).unwrap();
        assert_eq!(sol.preserved, 8);
        let expected: BTreeSet<Vid> = [
            v(1, 6),
            v(2, 7),
            v(3, 8),
            v(4, 9),
            v(6, 1),
            v(7, 2),
            v(8, 3),
            v(9, 4),
        ]
        .into();
        assert_eq!(sol.independent_set(), expected);
        assert_eq!(
            render_blocks(&three_squares, &sol.partition),
            ["abcde", "fbcde"]
        );
        assert_eq!(
            sol.partition.blocks_b,
            [Block { start: 6, len: 5 }, Block { start: 1, len: 5 }]
        );
        assert_eq!(sol.stats.series, [SquareSeries::new(2, 7, 2, 7, 3)]);
        assert_eq!((sol.stats.v_g, sol.stats.v_g1, sol.stats.v_g2), (14, 2, 0));
    }

    #[test]
    fn two_squares_exact() {
        let two_squares = inst("abcdefgbcdehyx", "gbcdehabcdxyef");
        let sol = approx_solve(&two_squares, &exact()).unwrap();
        assert_eq!(sol.preserved, 9);
        let mut contents: Vec<String> = sol.vertices.iter().map(|d| d.content.concat()).collect();
        contents.sort();
        let mut expected = vec!["ab", "bc", "cd", "ef", "gb", "bc", "cd", "de", "eh"];
        expected.sort();
        assert_eq!(contents, expected);
        assert_eq!(sol.partition.len(), 14 - 9);
    }

    #[test]
    fn no_common_duo() {
        let sol = approx_solve(&inst("ab", "ba"), &SolverConfig::default()).unwrap();
        assert_eq!(sol.preserved, 0);
        assert_eq!(sol.partition.len(), 2);
        assert_eq!(sol.mapping, [2, 1]);
    }

    #[test]
    fn rejects_invalid_instances() {
        assert!(matches!(
            approx_solve(&inst("aaa", "aaa"), &SolverConfig::default()),
            Err(PipelineError::Validation(_))
        ));
        assert!(matches!(
            approx_solve(&inst("ab", "aa"), &SolverConfig::default()),
            Err(PipelineError::Validation(_))
        ));
    }

    #[test]
    fn reconstruct_cases() {
        let three_squares = inst("abcdefbcde", "fbcdeabcde");
        let (mapping, part) = reconstruct_partition(&three_squares, &BTreeSet::new()).unwrap();
        // Ascending completion may keep duos that were never asked for.
        assert_eq!(part.len(), 10 - preserved_by_mapping(&mapping).len());
        assert_eq!(partition_violation(&three_squares, &mapping, &part), None);

        let ident = inst("abcd", "abcd");
        let diag: BTreeSet<Vid> = [v(1, 1), v(2, 2), v(3, 3)].into();
        let (mapping, part) = reconstruct_partition(&ident, &diag).unwrap();
        assert_eq!(mapping, [1, 2, 3, 4]);
        assert_eq!(part.blocks_a, [Block { start: 1, len: 4 }]);

        let clash: BTreeSet<Vid> = [v(1, 6), v(2, 2)].into();
        assert_eq!(
            reconstruct_partition(&three_squares, &clash),
            Err(PartitionError::Inconsistent(v(2, 2)))
        );
        let bogus: BTreeSet<Vid> = [v(1, 1)].into();
        assert_eq!(
            reconstruct_partition(&three_squares, &bogus),
            Err(PartitionError::NotAVertex(v(1, 1)))
        );
    }

    #[test]
    fn partition_checker_catches_breakage() {
        let three_squares = inst("abcdefbcde", "fbcdeabcde");
        let sol = approx_solve(&three_squares, &exact()).unwrap();
        let mut part = sol.partition.clone();
        part.blocks_b[0].start = 5;
        assert!(partition_violation(&three_squares, &sol.mapping, &part).is_some());
        let mut mapping = sol.mapping.clone();
        mapping.swap(0, 1);
        assert!(partition_violation(&three_squares, &mapping, &sol.partition).is_some());
        assert_eq!(preserved_by_mapping(&sol.mapping), sol.independent_set());
    }

    #[test]
    fn json_round_trip() {
        let three_squares = inst("abcdefbcde", "fbcdeabcde");
        let sol = approx_solve(&three_squares, &exact()).unwrap();
        let text = report(&sol, Format::Json);
        let back: Solution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sol);
        assert_eq!(report(&back, Format::Json), text);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["preserved"], 8);
        assert_eq!(value["vertices"].as_array().unwrap().len(), 8);
        assert_eq!(value["stats"]["series"][0]["i_prime"], 7);
        assert_eq!(value["blocks_a"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn text_report() {
        let three_squares = inst("abcdefbcde", "fbcdeabcde");
        let mut sol = approx_solve(&three_squares, &exact()).unwrap();
        sol.stats.elapsed_ms = 0;
        let text = report(&sol, Format::Text);
        assert!(text.contains("preserved duos: 8\n"));
        assert!(text.contains("  v(2,7) bc\n"));
        assert!(text.contains("A[1..5]->B[6..10] A[6..10]->B[1..5]"));
        assert!(text.contains("series: S^3(2,7;2,7)"));

        let empty = approx_solve(&inst("ab", "ba"), &SolverConfig::default()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&report(&empty, Format::Json)).unwrap();
        assert_eq!(json["preserved"], 0);
        assert_eq!(json["blocks_a"].as_array().unwrap().len(), 2);
    }
}
