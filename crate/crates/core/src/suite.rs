//! Randomised property suite: every structural claim about the conflict
//! graph and the reductions, checked instance by instance against the
//! exhaustive oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{gen_random_instance, GenError, GeneratorConfig, Shuffle};
use crate::graph::{conflicts_oracle, v, ConflictGraph, Vid};
use crate::instance::{Instance, Side};
use crate::mis::{Backend, SolverConfig};
use crate::oracle::{brute_force_opt, graph_mis, raw_vertices};
use crate::pipeline::{approx_solve_impl, partition_violation, Solution};
use crate::prune::prune;
use crate::squares::{
    contract_series_impl, find_maximal_series, find_squares, isomorphism_mismatch, lift, restore,
    shrink_strings, PositionMap, Square, SquareSeries,
};

/// Deliberate bugs for checking that the suite notices them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    SkipAnchorEdges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub count: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub k: usize,
    pub duplication_bias: f64,
    pub seed: u64,
    /// Fixed shuffle for every instance; `None` reorders segments for two
    /// instances out of three and shuffles uniformly for the third.
    pub shuffle: Option<Shuffle>,
    #[doc(hidden)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            count: 1000,
            n_min: 4,
            n_max: 14,
            k: 2,
            duplication_bias: 0.9,
            seed: 1,
            shuffle: None,
            fault: None,
        }
    }
}

impl SuiteConfig {
    /// Generator settings for instance number `t`.
    pub fn generator(&self, t: usize) -> GeneratorConfig {
        let span = self.n_max - self.n_min + 1;
        let n = self.n_min + t % span;
        GeneratorConfig {
            n,
            k: self.k,
            alphabet_size: n,
            seed: self
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(t as u64),
            duplication_bias: self.duplication_bias,
            shuffle: self.shuffle.unwrap_or(if t % 3 == 2 {
                Shuffle::Uniform
            } else {
                Shuffle::Segments
            }),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SuiteError {
    #[error("suite needs at least one instance")]
    EmptyCount,
    #[error("n range {0}..={1} is empty")]
    EmptyRange(usize, usize),
    #[error(transparent)]
    Generator(#[from] GenError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCount {
    pub checked: usize,
    pub failed: usize,
}

/// `OPT / SOL` over the corpus for one heuristic backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub backend: Backend,
    pub samples: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub within_1_4: usize,
    pub over_2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub property: String,
    pub detail: String,
    pub generator: GeneratorConfig,
    /// Instance document, replayable with `maxduo solve`.
    pub instance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub instances: usize,
    pub with_squares: usize,
    /// Instances whose kernel `G2` still had vertices for the backend.
    pub nonempty_kernels: usize,
    pub properties: BTreeMap<String, PropertyCount>,
    pub ratios: Vec<RatioStats>,
    pub failures: usize,
    pub counterexamples: Vec<Counterexample>,
}

const MAX_COUNTEREXAMPLES: usize = 25;

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn property(&self, name: &str) -> PropertyCount {
        self.properties.get(name).copied().unwrap_or_default()
    }

    pub fn ratio(&self, backend: Backend) -> Option<&RatioStats> {
        self.ratios.iter().find(|r| r.backend == backend)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} instances (n {}..={}, k={}, seed {}), {} with squares, {} with a non-empty kernel",
            self.instances,
            self.config.n_min,
            self.config.n_max,
            self.config.k,
            self.config.seed,
            self.with_squares,
            self.nonempty_kernels
        )?;
        for (name, c) in &self.properties {
            let mark = if c.failed == 0 { "ok  " } else { "FAIL" };
            writeln!(
                f,
                "  {mark} {name:<26} {:>6} checked {:>4} failed",
                c.checked, c.failed
            )?;
        }
        for r in &self.ratios {
            writeln!(
                f,
                "  ratio {:<6} min {:.3} mean {:.3} max {:.3}  <=1.4: {}/{}  >2.0: {}",
                r.backend.name(),
                r.min,
                r.mean,
                r.max,
                r.within_1_4,
                r.samples,
                r.over_2
            )?;
        }
        write!(f, "{} failures", self.failures)
    }
}

pub fn run_property_suite(cfg: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    if cfg.count == 0 {
        return Err(SuiteError::EmptyCount);
    }
    if cfg.n_min > cfg.n_max {
        return Err(SuiteError::EmptyRange(cfg.n_min, cfg.n_max));
    }
    let outcomes: Vec<Outcome> = (0..cfg.count)
        .into_par_iter()
        .map(|t| evaluate(cfg, t))
        .collect::<Result<_, _>>()?;

    let mut report = SuiteReport {
        config: cfg.clone(),
        instances: cfg.count,
        with_squares: 0,
        nonempty_kernels: 0,
        properties: BTreeMap::new(),
        ratios: Vec::new(),
        failures: 0,
        counterexamples: Vec::new(),
    };
    let mut ratios: BTreeMap<Backend, Vec<f64>> = BTreeMap::new();
    for out in outcomes {
        report.with_squares += usize::from(out.has_square);
        report.nonempty_kernels += usize::from(out.kernel > 0);
        for (name, verdict) in out.checks {
            let c = report.properties.entry(name.to_owned()).or_default();
            c.checked += 1;
            if let Some(detail) = verdict {
                c.failed += 1;
                report.failures += 1;
                if report.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    report.counterexamples.push(Counterexample {
                        property: name.to_owned(),
                        detail,
                        generator: out.generator.clone(),
                        instance: out.instance.clone(),
                    });
                }
            }
        }
        for (b, r) in out.ratios {
            ratios.entry(b).or_default().push(r);
        }
    }
    report.ratios = ratios
        .into_iter()
        .map(|(backend, rs)| RatioStats {
            backend,
            samples: rs.len(),
            min: rs.iter().copied().fold(f64::INFINITY, f64::min),
            mean: rs.iter().sum::<f64>() / rs.len() as f64,
            max: rs.iter().copied().fold(0.0, f64::max),
            within_1_4: rs.iter().filter(|&&r| r <= 1.4).count(),
            over_2: rs.iter().filter(|&&r| r > 2.0).count(),
        })
        .collect();
    Ok(report)
}

struct Outcome {
    generator: GeneratorConfig,
    instance: String,
    checks: Vec<(&'static str, Option<String>)>,
    ratios: Vec<(Backend, f64)>,
    has_square: bool,
    kernel: usize,
}

impl Outcome {
    fn check(&mut self, name: &'static str, verdict: Option<String>) {
        self.checks.push((name, verdict));
    }
}

fn evaluate(cfg: &SuiteConfig, t: usize) -> Result<Outcome, SuiteError> {
    let generator = cfg.generator(t);
    let inst = gen_random_instance(&generator)?;
    let g = ConflictGraph::build(&inst);
    let squares = find_squares(&g);
    let mut out = Outcome {
        generator,
        instance: inst.to_document(),
        checks: Vec::new(),
        ratios: Vec::new(),
        has_square: !squares.is_empty(),
        kernel: 0,
    };

    out.check("formula_matches_oracle", formula_vs_oracle(&inst, &g));
    out.check("diagonal_gap_filled", diagonal_gap_filled(&g));
    out.check("shared_content_crosses", shared_content_crosses(&g));
    let bound = 6 * cfg.k.saturating_sub(1);
    out.check(
        "max_degree_bound",
        (g.max_degree() > bound).then(|| format!("max degree {} > {bound}", g.max_degree())),
    );
    if cfg.k != 2 {
        return Ok(out);
    }

    out.check("two_partners_per_row", two_partners_per_row(&g));
    out.check("size_bounds", size_bounds(&inst, &g));
    out.check("square_neighbourhoods", square_neighbourhoods(&g, &squares));
    out.check("degree_six_in_square", degree_six_in_square(&g, &squares));
    if squares.is_empty() {
        out.check("degree_five_has_leaf", degree_five_has_leaf(&g));
    }
    out.check("consecutive_squares", consecutive_squares(&squares));

    let anchors = cfg.fault != Some(Fault::SkipAnchorEdges);
    let g1 = match contraction_checks(&mut out, &inst, &g, anchors) {
        Ok(g1) => g1,
        Err(detail) => {
            out.check("contraction", Some(detail));
            return Ok(out);
        }
    };
    out.check("degree_five_has_leaf", degree_five_has_leaf(&g1));
    prune_checks(&mut out, &g, &g1);

    let opt = match brute_force_opt(&inst) {
        Ok(best) => best.len(),
        Err(e) => {
            out.check("oracle_equivalence", Some(e.to_string()));
            return Ok(out);
        }
    };
    for backend in [Backend::Exact, Backend::Greedy, Backend::LocalSearch] {
        let solver = SolverConfig {
            backend,
            rng_seed: out.generator.seed,
            ..Default::default()
        };
        let sol = match approx_solve_impl(&inst, &solver, anchors) {
            Ok(sol) => sol,
            Err(e) => {
                out.check("pipeline_runs", Some(format!("{}: {e}", backend.name())));
                continue;
            }
        };
        out.check("pipeline_runs", None);
        out.kernel = sol.stats.v_g2;
        solution_checks(&mut out, &inst, &sol, backend);
        if backend == Backend::Exact {
            out.check(
                "oracle_equivalence",
                (sol.preserved != opt)
                    .then(|| format!("pipeline {} vs oracle {opt}", sol.preserved)),
            );
        } else {
            let ratio = if sol.preserved == 0 {
                if opt == 0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                opt as f64 / sol.preserved as f64
            };
            out.ratios.push((backend, ratio));
        }
        if backend == Backend::LocalSearch {
            let again = approx_solve_impl(&inst, &solver, anchors).ok();
            out.check(
                "backend_determinism",
                (again.map(|s| s.vertices) != Some(sol.vertices)).then(|| "rerun differs".into()),
            );
        }
    }
    Ok(out)
}

fn formula_vs_oracle(inst: &Instance, g: &ConflictGraph) -> Option<String> {
    let raw = raw_vertices(inst);
    let built: Vec<Vid> = g.vertices().collect();
    if raw != built {
        return Some(format!(
            "vertex sets differ: {} vs {}",
            raw.len(),
            built.len()
        ));
    }
    for &u in &raw {
        let formula = g.neighbors_by_formula(u).ok()?;
        let oracle: BTreeSet<Vid> = raw
            .iter()
            .copied()
            .filter(|&w| w != u && conflicts_oracle(u, w))
            .collect();
        if formula != oracle {
            return Some(format!("{u}: formula {formula:?} vs oracle {oracle:?}"));
        }
        if g.neighbors(u) != Some(&oracle) {
            return Some(format!("{u}: stored adjacency differs from oracle"));
        }
    }
    None
}

fn diagonal_gap_filled(g: &ConflictGraph) -> Option<String> {
    g.vertices()
        .find(|&u| g.contains(v(u.i + 2, u.j + 2)) && !g.contains(v(u.i + 1, u.j + 1)))
        .map(|u| format!("{u} and v({},{}) present, middle missing", u.i + 2, u.j + 2))
}

fn shared_content_crosses(g: &ConflictGraph) -> Option<String> {
    for u in g.vertices() {
        for w in g.vertices() {
            if g.content(u) == g.content(w) && !(g.contains(v(w.i, u.j)) && g.contains(v(u.i, w.j)))
            {
                return Some(format!(
                    "{u} and {w} share content but a cross vertex is missing"
                ));
            }
        }
    }
    None
}

fn two_partners_per_row(g: &ConflictGraph) -> Option<String> {
    let n = g.vertices().map(|u| u.i.max(u.j) + 1).max().unwrap_or(0);
    for i in 1..=n {
        let js: Vec<usize> = g.row(i).map(|u| u.j).collect();
        if js.len() > 2 {
            return Some(format!("row {i} has {} vertices", js.len()));
        }
        if let [j, jp] = js[..] {
            let ok = |y: usize| y == j || y == jp;
            if let Some(w) = g.row(i + 1).find(|w| !ok(w.j - 1)) {
                return Some(format!("v({i},{j}), v({i},{jp}) but {w}"));
            }
            if let Some(w) = g.row(i.wrapping_sub(1)).find(|w| !ok(w.j + 1)) {
                return Some(format!("v({i},{j}), v({i},{jp}) but {w}"));
            }
        }
    }
    None
}

fn size_bounds(inst: &Instance, g: &ConflictGraph) -> Option<String> {
    let n = inst.n();
    let f = crate::graph::BipartiteGraph::build(inst).edges().len();
    let k = inst.k();
    if g.len() > k * n.saturating_sub(1) || f > k * n {
        return Some(format!("|V| = {}, |F| = {f}, n = {n}, k = {k}", g.len()));
    }
    None
}

fn square_neighbourhoods(g: &ConflictGraph, squares: &[Square]) -> Option<String> {
    for s in squares {
        let [ij, ijp, ipj, ipjp] = s.members();
        let n = |u| g.neighbors(u).cloned().unwrap_or_default();
        if n(ij) != n(ipjp) || n(ijp) != n(ipj) {
            return Some(format!("{s:?}: opposite corners differ"));
        }
        if !n(ij).is_disjoint(&n(ijp)) {
            return Some(format!("{s:?}: adjacent corners share a neighbour"));
        }
        let members = s.members();
        for w in g.vertices().filter(|w| !members.contains(w)) {
            let hits = members.iter().filter(|&&m| g.has_edge(m, w)).count();
            if hits != 0 && hits != 2 {
                return Some(format!("{w} touches {hits} members of {s:?}"));
            }
        }
    }
    None
}

fn degree_six_in_square(g: &ConflictGraph, squares: &[Square]) -> Option<String> {
    for u in g.vertices().filter(|&u| g.degree(u) == 6) {
        let Some(s) = squares.iter().find(|s| s.members().contains(&u)) else {
            return Some(format!("{u} has degree 6 outside every square"));
        };
        let opposite = v(
            if u.i == s.i { s.i_prime } else { s.i },
            if u.j == s.j { s.j_prime } else { s.j },
        );
        if g.neighbors(u) != g.neighbors(opposite) {
            return Some(format!("{u} and {opposite} differ in neighbourhood"));
        }
    }
    None
}

fn degree_five_has_leaf(g: &ConflictGraph) -> Option<String> {
    g.vertices()
        .filter(|&u| g.degree(u) == 5)
        .find(|&u| !g.neighbors(u).unwrap().iter().any(|&w| g.degree(w) == 1))
        .map(|u| format!("{u} has degree 5 and no leaf neighbour"))
}

fn consecutive_squares(squares: &[Square]) -> Option<String> {
    let owner = |u: Vid| squares.iter().find(|s| s.members().contains(&u));
    for s in squares {
        for u in s.members() {
            let Some(t) = owner(v(u.i + 1, u.j + 1)) else {
                continue;
            };
            let (a, b) = (s.key(), t.key());
            if s != t && b != (a.0 + 1, a.1 + 1, a.2 + 1, a.3 + 1) {
                return Some(format!("{u} in {a:?}, successor in non-consecutive {b:?}"));
            }
        }
    }
    None
}

fn series_substrings(inst: &Instance, s: SquareSeries) -> Option<String> {
    let take = |side, from: usize| -> Vec<_> {
        (from..=from + s.p).map(|x| inst.letter(side, x)).collect()
    };
    let pieces = [
        take(Side::A, s.i),
        take(Side::A, s.i_prime),
        take(Side::B, s.j),
        take(Side::B, s.j_prime),
    ];
    if pieces.iter().any(|p| *p != pieces[0]) {
        return Some(format!("{s}: substrings differ"));
    }
    if s.i + s.p >= s.i_prime || s.j + s.p >= s.j_prime {
        return Some(format!("{s}: substrings overlap"));
    }
    None
}

fn map_series(map: &PositionMap, s: SquareSeries) -> Option<SquareSeries> {
    Some(SquareSeries::new(
        map.a[s.i]?,
        map.a[s.i_prime]?,
        map.b[s.j]?,
        map.b[s.j_prime]?,
        s.p,
    ))
}

/// Square elimination one series at a time, with the optimality, lift,
/// restore, substring and shrinkage checks at every step. Returns `G1`.
fn contraction_checks(
    out: &mut Outcome,
    inst: &Instance,
    g: &ConflictGraph,
    anchors: bool,
) -> Result<ConflictGraph, String> {
    let mut cur = g.clone();
    let mut shrunk = inst.clone();
    let mut map = PositionMap::identity(inst.n());
    while let Some(&s) = find_maximal_series(&find_squares(&cur)).first() {
        let before = cur.clone();
        let rec = contract_series_impl(&mut cur, s, anchors).map_err(|e| e.to_string())?;

        let local = map_series(&map, s).ok_or_else(|| format!("{s} touches a removed position"))?;
        out.check("series_substrings", series_substrings(&shrunk, local));
        let (next, step) = shrink_strings(&shrunk, local);
        map = map.then(&step);
        shrunk = next;
        out.check(
            "shrink_isomorphism",
            isomorphism_mismatch(&cur, &shrunk, &map),
        );

        let opt_before = graph_mis(&before).map_err(|e| e.to_string())?;
        let opt_after = graph_mis(&cur).map_err(|e| e.to_string())?;
        out.check(
            "contraction_opt",
            (opt_before.len() != opt_after.len() + 2 * s.p).then(|| {
                format!(
                    "{s}: OPT {} before, {} after",
                    opt_before.len(),
                    opt_after.len()
                )
            }),
        );
        let lifted = match lift(&cur, &opt_after, &rec) {
            Ok((set, _)) if set.len() != opt_after.len() + 2 * s.p => {
                Some(format!("{s}: lift added {}", set.len() - opt_after.len()))
            }
            Ok((set, _)) => before
                .independence_violation(&set)
                .map(|(a, b)| format!("{s}: lifted set has {a} against {b:?}")),
            Err(e) => Some(e.to_string()),
        };
        out.check("lift", lifted);
        let mut back = cur.clone();
        restore(&mut back, &rec);
        out.check(
            "restore",
            (back != before).then(|| format!("{s}: restore differs")),
        );
    }
    Ok(cur)
}

fn prune_checks(out: &mut Outcome, g: &ConflictGraph, g1: &ConflictGraph) {
    let (g2, rec) = match prune(g1) {
        Ok(r) => r,
        Err(e) => return out.check("prune", Some(e.to_string())),
    };
    out.check(
        "kernel_max_degree",
        (g2.max_degree() > 4).then(|| format!("max degree of G2 is {}", g2.max_degree())),
    );
    out.check(
        "monotone_reduction",
        (g2.len() > g1.len() || g1.len() > g.len())
            .then(|| format!("|V| {} -> {} -> {}", g.len(), g1.len(), g2.len())),
    );
    let (Ok(m1), Ok(m2)) = (graph_mis(g1), graph_mis(&g2)) else {
        return out.check("prune_opt", Some("oracle limit".into()));
    };
    out.check(
        "prune_opt",
        (m1.len() != rec.chosen.len() + m2.len()).then(|| {
            format!(
                "OPT(G1) {} vs chosen {} + OPT(G2) {}",
                m1.len(),
                rec.chosen.len(),
                m2.len()
            )
        }),
    );
    let union: Vec<Vid> = rec.chosen.iter().chain(&m2).copied().collect();
    out.check(
        "prune_union_independent",
        g1.independence_violation(&union)
            .map(|(a, b)| format!("{a} against {b:?}")),
    );
}

fn solution_checks(out: &mut Outcome, inst: &Instance, sol: &Solution, backend: Backend) {
    let name = backend.name();
    let set: Vec<Vid> = sol.independent_set().into_iter().collect();
    let dependent = set.iter().enumerate().find_map(|(x, &u)| {
        set[x + 1..]
            .iter()
            .find(|&&w| conflicts_oracle(u, w))
            .map(|&w| (u, w))
    });
    out.check(
        "backend_independent",
        dependent.map(|(u, w)| format!("{name}: {u} conflicts with {w}")),
    );
    let raw = raw_vertices(inst);
    let stray = set.iter().find(|u| raw.binary_search(u).is_err());
    out.check(
        "backend_independent",
        stray.map(|u| format!("{name}: {u} is not a vertex")),
    );

    let mut partition = partition_violation(inst, &sol.mapping, &sol.partition);
    if partition.is_none() && sol.partition.len() != inst.n() - sol.preserved {
        partition = Some(format!(
            "{} blocks for n = {} and {} preserved",
            sol.partition.len(),
            inst.n(),
            sol.preserved
        ));
    }
    out.check("partition_valid", partition.map(|p| format!("{name}: {p}")));

    let series: usize = sol.stats.series.iter().map(|s| 2 * s.p).sum();
    let expected = sol.stats.kernel_solution + sol.stats.chosen + series;
    out.check(
        "lift_accounting",
        (sol.preserved != expected).then(|| {
            format!(
                "{name}: {} preserved, accounting gives {expected}",
                sol.preserved
            )
        }),
    );
}

/// Failing properties rendered one per line, for diagnostics.
pub fn describe_failures(report: &SuiteReport) -> String {
    let mut s = String::new();
    for c in &report.counterexamples {
        let _ = writeln!(
            s,
            "{} (seed {}, n {}): {}",
            c.property, c.generator.seed, c.generator.n, c.detail
        );
    }
    s
}
