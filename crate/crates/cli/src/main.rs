use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mtdist::ensemble::{classical_mds, compute_matrix, export_heatmap, parse_labels, silhouette, Palette};
use mtdist::mergetree::{
    build_split_tree, epsilon_preprocess, parse_grid, parse_tree, serialize_tree, simplify_persistence, Connectivity,
    Threshold,
};
use mtdist::oracle::{brute_delta_e, OracleBudget};
use mtdist::synth::{clustered_ensemble, EnsembleParams, TreeParams};
use mtdist::{delta, DistanceMatrix, EngineOptions, Error, MergeTree, Solver};

#[derive(Debug, Parser, Serialize)]
#[command(name = "mtdist", version, about = "Edit distances between merge trees")]
struct Cli {
    /// Print the parsed configuration as JSON and exit.
    #[arg(long, global = true)]
    #[serde(skip)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Build the split tree of a scalar grid.
    TreeBuild(TreeBuildArgs),
    /// Remove low-persistence branches from a tree file.
    TreeSimplify(TreeSimplifyArgs),
    /// Distance between two tree files.
    Dist(DistArgs),
    /// Pairwise distance matrix over a directory or list of tree files.
    Matrix(MatrixArgs),
    /// Classical MDS coordinates for a distance matrix.
    Embed(EmbedArgs),
    /// Mean silhouette of a labelling under a distance matrix.
    Silhouette(SilhouetteArgs),
    /// Write a seeded ensemble of perturbed synthetic trees.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Conn {
    #[value(name = "4")]
    Four,
    #[value(name = "8")]
    Eight,
}

#[derive(Debug, Args, Serialize)]
struct TreeBuildArgs {
    grid: PathBuf,
    #[arg(long, value_enum, default_value = "4")]
    connectivity: Conn,
    /// Persistence threshold; a trailing % makes it relative to the scalar range.
    #[arg(long, value_parser = parse_threshold)]
    simplify: Option<ThresholdArg>,
    /// Contract inner edges shorter than this; % for relative.
    #[arg(long, value_parser = parse_threshold)]
    eps: Option<ThresholdArg>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TreeSimplifyArgs {
    tree: PathBuf,
    #[arg(long, value_parser = parse_threshold)]
    threshold: ThresholdArg,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EngineArgs {
    #[arg(long, short = 'H', default_value_t = 0)]
    lookahead: usize,
    #[arg(long, value_enum, default_value = "hungarian")]
    solver: SolverArg,
    #[arg(long)]
    no_leaf_drop: bool,
    #[arg(long)]
    no_memoize_collapse: bool,
    #[arg(long)]
    no_upper_bound_prune: bool,
}

impl EngineArgs {
    fn options(&self) -> EngineOptions {
        EngineOptions {
            lookahead: self.lookahead,
            solver: match self.solver {
                SolverArg::Hungarian => Solver::Hungarian,
                SolverArg::Auction => Solver::Auction,
            },
            leaf_drop: !self.no_leaf_drop,
            memoize_collapse: !self.no_memoize_collapse,
            upper_bound_prune: !self.no_upper_bound_prune,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SolverArg {
    Hungarian,
    Auction,
}

#[derive(Debug, Args, Serialize)]
struct DistArgs {
    a: PathBuf,
    b: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Compute the unconstrained edit distance by exhaustive search instead.
    #[arg(long)]
    exact: bool,
    /// Time limit in seconds for --exact.
    #[arg(long, default_value_t = 60.0)]
    budget_secs: f64,
}

#[derive(Debug, Args, Serialize)]
struct MatrixArgs {
    /// A directory of `.json` tree files or a file listing one tree path per line.
    input: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, env = "MTDIST_THREADS")]
    threads: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write a heatmap (.png or .ppm).
    #[arg(long)]
    heatmap: Option<PathBuf>,
    #[arg(long, default_value = "viridis")]
    palette: String,
    #[arg(long, default_value_t = 8)]
    cell: u32,
}

#[derive(Debug, Args, Serialize)]
struct EmbedArgs {
    matrix: PathBuf,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SilhouetteArgs {
    matrix: PathBuf,
    labels: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 30)]
    members: usize,
    #[arg(long, default_value_t = 1)]
    swaps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    jitter: f64,
    /// Target node count of each base tree.
    #[arg(long, default_value_t = 9)]
    nodes: usize,
    /// Number of base trees; members are generated per base tree.
    #[arg(long, default_value_t = 1)]
    clusters: usize,
    /// Output directory; also receives labels.csv when clusters > 1.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum ThresholdArg {
    Absolute(f64),
    Relative(f64),
}

impl From<ThresholdArg> for Threshold {
    fn from(t: ThresholdArg) -> Self {
        match t {
            ThresholdArg::Absolute(v) => Threshold::Absolute(v),
            ThresholdArg::Relative(v) => Threshold::Relative(v),
        }
    }
}

fn parse_threshold(s: &str) -> Result<ThresholdArg, String> {
    let (num, relative) = match s.strip_suffix('%') {
        Some(n) => (n, true),
        None => (s, false),
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("not a number: {s}"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("threshold must be a nonnegative number: {s}"));
    }
    Ok(if relative {
        ThresholdArg::Relative(v / 100.0)
    } else {
        ThresholdArg::Absolute(v)
    })
}

enum Failure {
    Validation(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(_) => Failure::Budget(e.to_string()),
            Error::Member { ref source, .. } if matches!(**source, Error::BudgetExceeded(_)) => {
                Failure::Budget(e.to_string())
            }
            e => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Validation(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_tree(path: &Path) -> Result<MergeTree, Failure> {
    parse_tree(&read(path)?).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

/// Fixed-point with twelve decimals; exact zero prints as `0`.
fn format_distance(d: f64) -> String {
    if d == 0.0 {
        "0".to_string()
    } else {
        format!("{d:.12}")
    }
}

fn tree_build(a: &TreeBuildArgs) -> Outcome {
    let grid = parse_grid(&read(&a.grid)?)?;
    let conn = match a.connectivity {
        Conn::Four => Connectivity::Four,
        Conn::Eight => Connectivity::Eight,
    };
    let mut tree = build_split_tree(&grid, conn)?;
    if let Some(t) = a.simplify {
        tree = simplify_persistence(&tree, t.into())?;
    }
    if let Some(e) = a.eps {
        tree = epsilon_preprocess(&tree, e.into())?;
    }
    write(a.out.as_deref(), &serialize_tree(&tree))
}

fn tree_simplify(a: &TreeSimplifyArgs) -> Outcome {
    let tree = simplify_persistence(&load_tree(&a.tree)?, a.threshold.into())?;
    write(a.out.as_deref(), &serialize_tree(&tree))
}

fn dist(a: &DistArgs) -> Outcome {
    let (t1, t2) = (load_tree(&a.a)?, load_tree(&a.b)?);
    let d = if a.exact {
        if !a.budget_secs.is_finite() || a.budget_secs <= 0.0 {
            return Err(Failure::Validation("--budget-secs must be positive".into()));
        }
        let budget = OracleBudget {
            time_cap: Duration::from_secs_f64(a.budget_secs),
            ..OracleBudget::default()
        };
        brute_delta_e(&t1, &t2, &budget)?
    } else {
        delta(&t1, &t2, &a.engine.options())?
    };
    println!("{}", format_distance(d));
    Ok(())
}

fn member_paths(input: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut paths = if input.is_dir() {
        let entries = fs::read_dir(input).map_err(|e| Failure::Validation(format!("{}: {e}", input.display())))?;
        let mut paths = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Failure::Validation(e.to_string()))?;
            let path = entry.path();
            if path.is_file() && path.extension().is_some_and(|e| e == "json") {
                paths.push(path);
            }
        }
        paths
    } else {
        let base = input.parent().unwrap_or(Path::new(""));
        read(input)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| base.join(l))
            .collect()
    };
    paths.sort_by(|x, y| x.file_name().cmp(&y.file_name()).then_with(|| x.cmp(y)));
    if paths.is_empty() {
        return Err(Failure::Validation(format!("no tree files in {}", input.display())));
    }
    Ok(paths)
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn matrix(a: &MatrixArgs) -> Outcome {
    let paths = member_paths(&a.input)?;
    let trees = paths.iter().map(|p| load_tree(p)).collect::<Result<Vec<_>, _>>()?;
    let names: Vec<String> = paths
        .iter()
        .map(|p| p.file_stem().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    let palette: Palette = a.palette.parse()?;
    let threads = a.threads.unwrap_or_else(default_threads);
    let m = compute_matrix(&trees, &names, &a.engine.options(), threads)?;
    write(a.out.as_deref(), &m.to_csv())?;
    if let Some(path) = &a.heatmap {
        export_heatmap(&m, path, palette, a.cell)?;
    }
    Ok(())
}

fn load_matrix(path: &Path) -> Result<DistanceMatrix, Failure> {
    DistanceMatrix::from_csv(&read(path)?).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn embed(a: &EmbedArgs) -> Outcome {
    let e = classical_mds(&load_matrix(&a.matrix)?, a.dims)?;
    write(a.out.as_deref(), &e.to_csv())
}

fn silhouette_cmd(a: &SilhouetteArgs) -> Outcome {
    let m = load_matrix(&a.matrix)?;
    let labels = parse_labels(&read(&a.labels)?)?;
    println!("{}", format_distance(silhouette(&m, &labels)?));
    Ok(())
}

fn synth(a: &SynthArgs) -> Outcome {
    if a.clusters == 0 || a.members == 0 {
        return Err(Failure::Validation("--members and --clusters must be positive".into()));
    }
    if !(a.jitter >= 0.0 && a.jitter < 1.0) {
        return Err(Failure::Validation("--jitter must be in [0, 1)".into()));
    }
    if a.nodes < 2 {
        return Err(Failure::Validation("--nodes must be at least 2".into()));
    }
    let params = EnsembleParams {
        members: a.members,
        swaps: a.swaps,
        jitter: a.jitter,
        seed: a.seed,
        base: TreeParams {
            nodes: a.nodes,
            max_depth: a.nodes,
            ..EnsembleParams::default().base
        },
    };
    let (trees, labels) = clustered_ensemble(a.clusters, &params);
    fs::create_dir_all(&a.out).map_err(|e| Failure::Validation(format!("{}: {e}", a.out.display())))?;
    let width = (trees.len() - 1).to_string().len();
    let mut label_rows = String::new();
    for (i, (t, l)) in trees.iter().zip(&labels).enumerate() {
        let name = format!("t{i:0width$}");
        write(Some(&a.out.join(format!("{name}.json"))), &serialize_tree(t))?;
        label_rows.push_str(&format!("{name},{l}\n"));
    }
    if a.clusters > 1 {
        write(Some(&a.out.join("labels.csv")), &label_rows)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::TreeBuild(a) => tree_build(a),
        Command::TreeSimplify(a) => tree_simplify(a),
        Command::Dist(a) => dist(a),
        Command::Matrix(a) => matrix(a),
        Command::Embed(a) => embed(a),
        Command::Silhouette(a) => silhouette_cmd(a),
        Command::Synth(a) => synth(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if cli.dry_run {
        println!("{}", serde_json::to_string_pretty(&cli.command).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
