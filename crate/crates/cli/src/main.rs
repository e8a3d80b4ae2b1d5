//! `maxduo`: solve, check, generate and inspect 2-bounded duo-preservation
//! instances.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage, 3 I/O, 4 invalid
//! instance or solution, 5 solver budget exceeded, 6 property suite failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use maxduo::dot::{elimination_snapshots, export_dot, Stage};
use maxduo::gen::{gen_random_instance, GeneratorConfig, Shuffle};
use maxduo::graph::{conflicts_oracle, Vid};
use maxduo::instance::{Instance, ParseMode};
use maxduo::mis::{Backend, SolverConfig};
use maxduo::oracle::raw_vertices;
use maxduo::pipeline::{
    approx_solve, partition_violation, report, Format, PipelineError, Solution,
};
use maxduo::suite::{run_property_suite, Fault, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "maxduo",
    version,
    about = "Maximum duo-preservation for strings with letters occurring at most twice"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance file and report the preserved duos and partition.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
        backend: BackendArg,
        /// Largest kernel the exact backend will accept.
        #[arg(long, default_value_t = 60)]
        exact_limit: usize,
        /// Largest swap tried by local search.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=3))]
        swap: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Wall-clock cap for local search, in milliseconds.
        #[arg(long, default_value_t = 10_000)]
        time_budget_ms: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Char)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report elapsed time as 0 so output is byte-identical across runs.
        #[arg(long)]
        no_timing: bool,
    },
    /// Check an instance against the occurrence bound, and optionally a
    /// JSON solution against the instance.
    Verify {
        path: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Char)]
        mode: ModeArg,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Alphabet size; defaults to n.
        #[arg(long)]
        alphabet: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        bias: f64,
        #[arg(long, value_enum, default_value_t = ShuffleArg::Uniform)]
        shuffle: ShuffleArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a Graphviz rendering of one stage of the reduction.
    ExportDot {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = StageArg::G)]
        stage: StageArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Char)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write G after every series contraction into this directory.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
    /// Run the randomised property suite against the exhaustive oracle.
    Suite {
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        #[arg(long, default_value_t = 14)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        bias: f64,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for counterexample instance files.
        #[arg(long, default_value = "counterexamples")]
        cex_dir: PathBuf,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Exact,
    Greedy,
    Local,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Char,
    Token,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShuffleArg {
    Uniform,
    Segments,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    #[value(name = "H")]
    H,
    #[value(name = "G")]
    G,
    #[value(name = "G1")]
    G1,
    #[value(name = "G2")]
    G2,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    SkipAnchorEdges,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Exact => Backend::Exact,
            BackendArg::Greedy => Backend::Greedy,
            BackendArg::Local => Backend::LocalSearch,
        }
    }
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        }
    }
}

impl From<ModeArg> for ParseMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Char => ParseMode::Char,
            ModeArg::Token => ParseMode::Token,
        }
    }
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::H => Stage::H,
            StageArg::G => Stage::G,
            StageArg::G1 => Stage::G1,
            StageArg::G2 => Stage::G2,
        }
    }
}

enum Failure {
    Internal(String),
    Io(PathBuf, io::Error),
    Invalid(String),
    Budget(String),
    Suite(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Io(..) => 3,
            Failure::Invalid(_) => 4,
            Failure::Budget(_) => 5,
            Failure::Suite(_) => 6,
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(p.to_owned(), e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io("<stdout>".into(), e)),
    }
}

fn load(path: &Path, mode: ModeArg) -> Result<Instance> {
    Instance::parse(&read(path)?, mode.into())
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Io(p, e) => eprintln!("error: {}: {e}", p.display()),
                Failure::Internal(m)
                | Failure::Invalid(m)
                | Failure::Budget(m)
                | Failure::Suite(m) => {
                    eprintln!("error: {m}")
                }
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Solve {
            path,
            backend,
            exact_limit,
            swap,
            seed,
            time_budget_ms,
            format,
            mode,
            out,
            no_timing,
        } => {
            let inst = load(&path, mode)?;
            let cfg = SolverConfig {
                backend: backend.into(),
                exact_vertex_limit: exact_limit,
                local_search_swap_size: swap.into(),
                time_budget: Duration::from_millis(time_budget_ms),
                rng_seed: seed,
            };
            let mut sol = approx_solve(&inst, &cfg).map_err(|e| match e {
                PipelineError::Validation(r) => {
                    Failure::Invalid(format!("{}:\n{}", path.display(), r.to_string().trim_end()))
                }
                PipelineError::Budget(b) => Failure::Budget(b.to_string()),
                PipelineError::Internal(m) => Failure::Internal(m),
            })?;
            if no_timing {
                sol.stats.elapsed_ms = 0;
            }
            write_out(out.as_deref(), &report(&sol, format.into()))
        }
        Cmd::Verify {
            path,
            k,
            mode,
            solution,
        } => {
            let inst = load(&path, mode)?;
            let r = inst.validate(k);
            if !r.is_ok() {
                return Err(Failure::Invalid(format!(
                    "{}:\n{}",
                    path.display(),
                    r.to_string().trim_end()
                )));
            }
            let mut msg = format!(
                "{}: valid, n = {}, k = {}\n",
                path.display(),
                inst.n(),
                inst.k()
            );
            if let Some(sp) = solution {
                let sol: Solution = serde_json::from_str(&read(&sp)?)
                    .map_err(|e| Failure::Invalid(format!("{}: {e}", sp.display())))?;
                if let Some(problem) = solution_problem(&inst, &sol) {
                    return Err(Failure::Invalid(format!("{}: {problem}", sp.display())));
                }
                msg.push_str(&format!(
                    "{}: consistent, {} preserved duos\n",
                    sp.display(),
                    sol.preserved
                ));
            }
            write_out(None, &msg)
        }
        Cmd::Gen {
            n,
            k,
            alphabet,
            seed,
            bias,
            shuffle,
            out,
        } => {
            let cfg = GeneratorConfig {
                n,
                k,
                alphabet_size: alphabet.unwrap_or(n),
                seed,
                duplication_bias: bias,
                shuffle: match shuffle {
                    ShuffleArg::Uniform => Shuffle::Uniform,
                    ShuffleArg::Segments => Shuffle::Segments,
                },
            };
            let inst = gen_random_instance(&cfg).map_err(|e| Failure::Invalid(e.to_string()))?;
            let header = format!(
                "# n={n} k={k} alphabet={} seed={seed} bias={bias}\n",
                cfg.alphabet_size
            );
            write_out(out.as_deref(), &(header + &inst.to_document()))
        }
        Cmd::ExportDot {
            path,
            stage,
            mode,
            out,
            snapshots,
        } => {
            let inst = load(&path, mode)?;
            if let Some(dir) = snapshots {
                fs::create_dir_all(&dir).map_err(|e| Failure::Io(dir.clone(), e))?;
                for (name, dot) in elimination_snapshots(&inst) {
                    let p = dir.join(format!("{name}.dot"));
                    fs::write(&p, dot).map_err(|e| Failure::Io(p, e))?;
                }
            }
            write_out(out.as_deref(), &export_dot(&inst, stage.into()))
        }
        Cmd::Suite {
            count,
            n_min,
            n_max,
            k,
            seed,
            bias,
            format,
            out,
            cex_dir,
            inject_fault,
        } => {
            let cfg = SuiteConfig {
                count: count as usize,
                n_min,
                n_max,
                k,
                duplication_bias: bias,
                seed,
                shuffle: None,
                fault: inject_fault.map(|FaultArg::SkipAnchorEdges| Fault::SkipAnchorEdges),
            };
            let rep = run_property_suite(&cfg).map_err(|e| Failure::Invalid(e.to_string()))?;
            let text = match format {
                FormatArg::Text => format!("{rep}\n"),
                FormatArg::Json => {
                    serde_json::to_string_pretty(&rep)
                        .map_err(|e| Failure::Internal(e.to_string()))?
                        + "\n"
                }
            };
            write_out(out.as_deref(), &text)?;
            if rep.passed() {
                return Ok(());
            }
            fs::create_dir_all(&cex_dir).map_err(|e| Failure::Io(cex_dir.clone(), e))?;
            for (x, c) in rep.counterexamples.iter().enumerate() {
                let p = cex_dir.join(format!("cex-{x:03}-{}.duo", c.property));
                let doc = format!(
                    "# property: {}\n# detail: {}\n# seed: {} n: {} shuffle: {:?}\n{}",
                    c.property,
                    c.detail.replace('\n', " "),
                    c.generator.seed,
                    c.generator.n,
                    c.generator.shuffle,
                    c.instance
                );
                fs::write(&p, doc).map_err(|e| Failure::Io(p.clone(), e))?;
                eprintln!("counterexample: {}", p.display());
            }
            Err(Failure::Suite(format!(
                "{} property violations",
                rep.failures
            )))
        }
    }
}

/// First reason `sol` is not a consistent solution of `inst`.
fn solution_problem(inst: &Instance, sol: &Solution) -> Option<String> {
    if sol.n != inst.n() {
        return Some(format!(
            "solution is for n = {}, instance has n = {}",
            sol.n,
            inst.n()
        ));
    }
    let set: Vec<Vid> = sol.independent_set().into_iter().collect();
    if set.len() != sol.preserved {
        return Some(format!(
            "{} vertices listed but {} preserved",
            set.len(),
            sol.preserved
        ));
    }
    let raw = raw_vertices(inst);
    if let Some(u) = set.iter().find(|u| raw.binary_search(u).is_err()) {
        return Some(format!("{u} is not a duo-vertex of the instance"));
    }
    for (x, &u) in set.iter().enumerate() {
        if let Some(w) = set[x + 1..].iter().find(|&&w| conflicts_oracle(u, w)) {
            return Some(format!("{u} conflicts with {w}"));
        }
    }
    if let Some(p) = partition_violation(inst, &sol.mapping, &sol.partition) {
        return Some(p);
    }
    if sol.partition.len() != inst.n() - sol.preserved {
        return Some(format!(
            "{} blocks, expected {}",
            sol.partition.len(),
            inst.n() - sol.preserved
        ));
    }
    None
}
