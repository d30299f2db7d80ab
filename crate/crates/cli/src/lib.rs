//! Command-line front end: `register`, `generate`, `evaluate` and `bench`.
//!
//! Exit codes are 0 on success, 1 on usage errors, 2 on data errors and 3
//! when the partial set could not be located.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pfreg::evaluation::{
    generate_corpus, generate_ordered_corpus, neighbor_hit_ratio_from, recognition_sweep, score_matrices,
    speedup_benchmark, BenchConfig, EvalReport, OrderedCorpusConfig, SweepConfig, SyntheticConfig,
};
use pfreg::io::{self, IoError, Unit};
use pfreg::{pf_register, Backend, MatcherConfig, PointSet, VotingConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;

/// Settings file accepted by `--config`. Every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub voting: VotingConfig,
    pub matcher: MatcherConfig,
    pub synthetic: SyntheticConfig,
    pub ordered: OrderedCorpusConfig,
    pub sweep: SweepConfig,
    pub bench: BenchConfig,
}

#[derive(Debug, Parser)]
#[command(name = "pfreg", version, about = "Locate and align partial point sets inside full point sets")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Suppress the summary on stdout.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Register a partial point set against a full one.
    Register(RegisterArgs),
    /// Write a synthetic corpus of reference and test point sets.
    Generate(GenerateArgs),
    /// Run the identification sweep over reference and test directories.
    Evaluate(EvaluateArgs),
    /// Time two-step registration against direct matching.
    Bench(BenchArgs),
}

/// A threshold that is either a number or `auto`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Threshold(Option<f64>);

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threshold(None));
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Threshold(Some(v))),
            _ => Err(format!("expected a positive number or \"auto\", got {s:?}")),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("auto"),
        }
    }
}

/// Registration options shared by `register` and `evaluate`.
#[derive(Debug, Args)]
struct RegistrationArgs {
    #[arg(long, default_value_t = Backend::EditCost)]
    backend: Backend,
    /// Number of candidate centers kept.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Cost of leaving a point unmatched.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Cluster merge radius.
    #[arg(long, default_value_t = Threshold(None))]
    t_spatial: Threshold,
    /// Maximum feature distance of a vote.
    #[arg(long, default_value_t = 0.1)]
    t_feature: f64,
    /// Candidate region radius.
    #[arg(long, default_value_t = Threshold(None))]
    t_radius: Threshold,
    #[arg(long, default_value_t = 0.5)]
    w_feature: f64,
    #[arg(long, default_value_t = 0.5)]
    w_position: f64,
}

#[derive(Debug, Args)]
struct RegisterArgs {
    #[arg(long)]
    partial: PathBuf,
    #[arg(long)]
    full: PathBuf,
    #[command(flatten)]
    reg: RegistrationArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Result file; the result is printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Write the ordered scene corpus instead of the subject corpus.
    #[arg(long)]
    ordered: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    refs: PathBuf,
    #[arg(long)]
    tests: PathBuf,
    /// Patch radii, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1,1.25,1.5,1.75,2,2.25,2.5")]
    radii: Vec<f64>,
    /// Neighbors used for identification.
    #[arg(long, default_value_t = 3)]
    knn: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat tests as ready-made patches of an ordered sequence and report
    /// score matrices and the neighbor-hit ratio instead of a radius sweep.
    #[arg(long)]
    ordered: bool,
    #[command(flatten)]
    reg: RegistrationArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 800)]
    full_size: usize,
    #[arg(long, default_value_t = 50)]
    partial_size: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = Backend::Hungarian)]
    backend: Backend,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Data(String),
    NotFound(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Data(_) => EXIT_DATA,
            CliError::NotFound(_) => EXIT_NOT_FOUND,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Data(m) => f.write_str(m),
            CliError::NotFound(m) => write!(f, "partial set not found: {m}"),
        }
    }
}

impl From<pfreg::Error> for CliError {
    fn from(e: pfreg::Error) -> Self {
        match e {
            pfreg::Error::NoCandidates => CliError::NotFound(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Model(m) => m.into(),
            e => CliError::Data(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    let sub = matches.subcommand().map(|(_, m)| m.clone()).expect("subcommand is required");

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_DATA;
        }
    };
    let quiet = cli.quiet;
    let outcome = pool.install(|| match &cli.command {
        Command::Register(a) => register(a, &sub, quiet),
        Command::Generate(a) => generate(a, quiet),
        Command::Evaluate(a) => evaluate(a, &sub, quiet),
        Command::Bench(a) => bench(a, &sub, quiet),
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn given(m: &ArgMatches, id: &str) -> bool {
    m.value_source(id) == Some(ValueSource::CommandLine)
}

fn load_config(path: Option<&Path>) -> CliResult<ConfigFile> {
    match path {
        Some(p) => Ok(io::load_json(p)?),
        None => Ok(ConfigFile::default()),
    }
}

/// Applies explicitly given registration flags on top of the file settings.
fn apply_registration(reg: &RegistrationArgs, m: &ArgMatches, cfg: &mut ConfigFile) {
    let (v, mt) = (&mut cfg.voting, &mut cfg.matcher);
    if given(m, "backend") {
        mt.backend = reg.backend;
    }
    if given(m, "k") {
        v.k = reg.k;
    }
    if given(m, "epsilon") {
        mt.epsilon = reg.epsilon;
    }
    if given(m, "t_spatial") {
        v.t_spatial = reg.t_spatial.0;
    }
    if given(m, "t_feature") {
        v.t_feature = reg.t_feature;
    }
    if given(m, "t_radius") {
        v.t_radius = reg.t_radius.0;
    }
    if given(m, "w_feature") {
        mt.metric.w_feature = reg.w_feature;
    }
    if given(m, "w_position") {
        mt.metric.w_position = reg.w_position;
    }
}

fn register(a: &RegisterArgs, m: &ArgMatches, quiet: bool) -> CliResult<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    apply_registration(&a.reg, m, &mut cfg);
    let partial = io::load_point_set(&a.partial)?;
    let full = io::load_point_set(&a.full)?;
    let result = pf_register(&partial, &full, &cfg.voting, &cfg.matcher)?;
    match &a.out {
        Some(out) => {
            io::save_json(out, &result)?;
            if !quiet {
                let t = &result.transform;
                println!(
                    "distance {} with {} of {} points matched; rotation {:.3} deg, translation ({:.4}, {:.4})",
                    result.distance,
                    result.inliers,
                    partial.len(),
                    t.rotation.to_degrees(),
                    t.dx,
                    t.dy
                );
                println!("wrote {}", out.display());
            }
        }
        None => println!("{}", io::to_json(&result)?),
    }
    Ok(())
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_sets(dir: &Path, prefix: &str, sets: &[PointSet], unit: Unit) -> CliResult<()> {
    create_dir(dir)?;
    for (i, s) in sets.iter().enumerate() {
        io::save_point_set(&dir.join(format!("{prefix}-{i:04}.json")), s, unit)?;
    }
    Ok(())
}

fn generate(a: &GenerateArgs, quiet: bool) -> CliResult<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    let (refs, tests, unit) = if a.ordered {
        if let Some(seed) = a.seed {
            cfg.ordered.seed = seed;
        }
        let c = generate_ordered_corpus(&cfg.ordered)?;
        (c.refs, c.tests, Unit::Px)
    } else {
        if let Some(seed) = a.seed {
            cfg.synthetic.seed = seed;
        }
        let c = generate_corpus(&cfg.synthetic)?;
        (c.refs, c.tests, Unit::Cm)
    };
    create_dir(&a.out_dir)?;
    write_sets(&a.out_dir.join("refs"), "ref", &refs, unit)?;
    write_sets(&a.out_dir.join("tests"), "test", &tests, unit)?;
    io::save_json(&a.out_dir.join("config.json"), &cfg)?;
    if !quiet {
        println!("wrote {} references and {} tests to {}", refs.len(), tests.len(), a.out_dir.display());
    }
    Ok(())
}

/// Loads every `.json` file of a directory in file-name order.
fn load_dir(dir: &Path) -> CliResult<Vec<PointSet>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!("{}: no point set files", dir.display())));
    }
    paths.iter().map(|p| Ok(io::load_point_set(p)?)).collect()
}

fn evaluate(a: &EvaluateArgs, m: &ArgMatches, quiet: bool) -> CliResult<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    apply_registration(&a.reg, m, &mut cfg);
    if given(m, "radii") {
        cfg.sweep.radii = a.radii.clone();
    }
    if given(m, "knn") {
        cfg.sweep.knn = a.knn;
    }
    if given(m, "seed") {
        cfg.sweep.seed = a.seed;
    }
    let refs = load_dir(&a.refs)?;
    let tests = load_dir(&a.tests)?;
    create_dir(&a.out_dir)?;

    if a.ordered {
        let scores = score_matrices(&tests, &refs, &cfg.voting, &cfg.matcher)?;
        let hits = neighbor_hit_ratio_from(&scores.normalized, &tests, &refs)?;
        let label = |s: &PointSet, i: usize| s.label.clone().unwrap_or_else(|| format!("#{i}"));
        let report = EvalReport {
            backend: cfg.matcher.backend.to_string(),
            ref_labels: refs.iter().enumerate().map(|(i, s)| label(s, i)).collect(),
            test_labels: tests.iter().enumerate().map(|(i, s)| label(s, i)).collect(),
            radii: Vec::new(),
            neighbor_hit_ratio: Some(hits),
        };
        io::save_json(&a.out_dir.join("report.json"), &report)?;
        io::save_json(&a.out_dir.join("scores.json"), &scores)?;
        write_matrix(&a.out_dir.join("distance.tsv"), &scores.distance)?;
        write_matrix(&a.out_dir.join("normalized.tsv"), &scores.normalized)?;
        if !quiet {
            println!("neighbor-hit ratio {hits:.3} over {} tests", tests.len());
        }
        return Ok(());
    }

    let report = recognition_sweep(&refs, &tests, &cfg.sweep, &cfg.voting, &cfg.matcher)?;
    io::save_json(&a.out_dir.join("report.json"), &report)?;
    let mut ratio = String::from("radius\tratio\n");
    let mut runtime = String::from("radius\truntime_ms\tmean_patch_size\n");
    for r in &report.radii {
        ratio.push_str(&format!("{}\t{}\n", r.radius, r.ratio));
        runtime.push_str(&format!("{}\t{}\t{}\n", r.radius, r.runtime_ms, r.mean_patch_size));
    }
    io::write_file(&a.out_dir.join("ratio.tsv"), &ratio)?;
    io::write_file(&a.out_dir.join("runtime.tsv"), &runtime)?;
    if !quiet {
        print!("{}", report.to_tsv());
    }
    Ok(())
}

fn write_matrix(path: &Path, m: &[Vec<f64>]) -> CliResult<()> {
    let text: String = m
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\t") + "\n")
        .collect();
    Ok(io::write_file(path, &text)?)
}

fn bench(a: &BenchArgs, m: &ArgMatches, quiet: bool) -> CliResult<()> {
    let mut cfg = load_config(a.config.as_deref())?.bench;
    if given(m, "full_size") {
        cfg.full_size = a.full_size;
    }
    if given(m, "partial_size") {
        cfg.partial_size = a.partial_size;
    }
    if given(m, "k") {
        cfg.k = a.k;
    }
    if given(m, "backend") {
        cfg.backend = a.backend;
    }
    if given(m, "repeats") {
        cfg.repeats = a.repeats;
    }
    if given(m, "seed") {
        cfg.seed = a.seed;
    }
    let report = speedup_benchmark(&cfg)?;
    if let Some(out) = &a.out {
        io::save_json(out, &report)?;
    }
    if !quiet {
        print!("{}", report.to_tsv());
        println!("speedup {:.1}x", report.speedup);
    }
    Ok(())
}
