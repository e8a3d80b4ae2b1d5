//! Graphviz output for the bipartite graph and each reduction stage.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{BipartiteGraph, ConflictGraph};
use crate::instance::{Instance, Side};
use crate::prune::prune;
use crate::squares::{contract_series, eliminate_squares, find_maximal_series, find_squares};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    H,
    G,
    G1,
    G2,
}

/// Letter graph `H`: one row of A-positions, one of B-positions.
pub fn bipartite_dot(inst: &Instance) -> String {
    let h = BipartiteGraph::build(inst);
    let mut s = String::from("graph H {\n");
    for (side, tag) in [(Side::A, 'a'), (Side::B, 'b')] {
        let _ = writeln!(s, "  {{ rank=same;");
        for x in 1..=inst.n() {
            let _ = writeln!(
                s,
                "    {tag}{x} [label=\"{}{x}:{}\"];",
                tag.to_ascii_uppercase(),
                inst.token(inst.letter(side, x))
            );
        }
        s.push_str("  }\n");
    }
    for &(i, j) in h.edges() {
        let _ = writeln!(s, "  a{i} -- b{j};");
    }
    s.push_str("}\n");
    s
}

/// Conflict graph (or any reduction of it), with each square drawn as a
/// cluster.
pub fn conflict_dot(g: &ConflictGraph, inst: &Instance, name: &str) -> String {
    let mut s = format!("graph {name} {{\n");
    let squares = find_squares(g);
    let clustered: Vec<_> = squares.iter().flat_map(|sq| sq.members()).collect();
    let node = |u: crate::graph::Vid| {
        let content = inst.render_content(g.content(u).unwrap());
        format!("\"{u}\" [label=\"{u}:{content}\"];")
    };
    for sq in &squares {
        let _ = writeln!(
            s,
            "  subgraph \"cluster_S({},{};{},{})\" {{\n    label=\"S({},{};{},{})\";",
            sq.i, sq.i_prime, sq.j, sq.j_prime, sq.i, sq.i_prime, sq.j, sq.j_prime
        );
        for u in sq.members() {
            let _ = writeln!(s, "    {}", node(u));
        }
        s.push_str("  }\n");
    }
    for u in g.vertices().filter(|u| !clustered.contains(u)) {
        let _ = writeln!(s, "  {}", node(u));
    }
    for (u, w) in g.edges() {
        let _ = writeln!(s, "  \"{u}\" -- \"{w}\";");
    }
    s.push_str("}\n");
    s
}

pub fn export_dot(inst: &Instance, stage: Stage) -> String {
    let g = ConflictGraph::build(inst);
    match stage {
        Stage::H => bipartite_dot(inst),
        Stage::G => conflict_dot(&g, inst, "G"),
        Stage::G1 => conflict_dot(&eliminate_squares(&g).0, inst, "G1"),
        Stage::G2 => {
            let g1 = eliminate_squares(&g).0;
            let g2 = prune(&g1).expect("G1 is square-free").0;
            conflict_dot(&g2, inst, "G2")
        }
    }
}

/// `G`, then the graph after each series contraction, named for files.
pub fn elimination_snapshots(inst: &Instance) -> Vec<(String, String)> {
    let mut g = ConflictGraph::build(inst);
    let mut out = vec![("00-G".to_owned(), conflict_dot(&g, inst, "G"))];
    while let Some(&s) = find_maximal_series(&find_squares(&g)).first() {
        contract_series(&mut g, s).expect("detected series is maximal");
        let name = format!(
            "{:02}-contract-{}-{}-{}-{}",
            out.len(),
            s.i,
            s.i_prime,
            s.j,
            s.j_prime
        );
        out.push((name, conflict_dot(&g, inst, "G")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ParseMode;

    fn three_squares() -> Instance {
        Instance::from_strs("abcdefbcde", "fbcdeabcde", ParseMode::Char).unwrap()
    }

    fn nodes(dot: &str) -> usize {
        dot.lines().filter(|l| l.contains("[label=")).count()
    }

    #[test]
    fn three_squares_stages() {
        let g = export_dot(&three_squares(), Stage::G);
        assert_eq!(nodes(&g), 14);
        assert_eq!(g.matches("subgraph \"cluster_").count(), 3);
        assert!(g.contains("\"v(2,7)\" [label=\"v(2,7):bc\"];"));
        assert_eq!(
            g.matches(" -- ").count(),
            ConflictGraph::build(&three_squares()).edge_count()
        );

        let g1 = export_dot(&three_squares(), Stage::G1);
        assert_eq!(nodes(&g1), 2);
        assert!(!g1.contains(" -- "));
        assert_eq!(export_dot(&three_squares(), Stage::G2), "graph G2 {\n}\n");
    }

    #[test]
    fn bipartite_rows() {
        let h = export_dot(&three_squares(), Stage::H);
        assert_eq!(h.matches("rank=same").count(), 2);
        assert_eq!(h.matches(" -- ").count(), 18);
        assert!(h.contains("a1 [label=\"A1:a\"];"));
    }

    #[test]
    fn single_letter_is_empty() {
        let one = Instance::from_strs("a", "a", ParseMode::Char).unwrap();
        assert_eq!(export_dot(&one, Stage::G), "graph G {\n}\n");
    }

    #[test]
    fn snapshots_follow_contractions() {
        let snaps = elimination_snapshots(&three_squares());
        let names: Vec<&str> = snaps.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["00-G", "01-contract-2-7-2-7"]);
        assert_eq!(nodes(&snaps[1].1), 2);
        assert_eq!(
            export_dot(&three_squares(), Stage::G),
            export_dot(&three_squares(), Stage::G)
        );
    }
}
