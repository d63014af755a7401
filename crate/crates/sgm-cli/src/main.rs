//! Command-line front end: match two graph files, or benchmark the matcher
//! on correlated random graph pairs and emit per-trial CSV.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use sgm::graph::{load_edge_list, load_seed_spec, write_edge_list, Graph, SeedSpec};
use sgm::sim::{run_sweep, run_trial, SimConfig, SimError, TrialOutput, TrialRecord};
use sgm::solver::{match_graphs, MatchResult, SolverConfig, SolverError};

#[derive(Parser)]
#[command(
    name = "sgm",
    version,
    about = "Seeded graph matching and correlated random-graph sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match two graphs of equal order, optionally anchored by seed pairs
    Match(MatchArgs),
    /// Sweep seed counts on correlated random graph pairs
    Simulate(SimulateArgs),
}

#[derive(Args)]
#[command(after_help = "\
Graph files are whitespace-separated edge lists: 'u v' or 'u v w' per line,
'#' comments, blank lines ignored, repeated pairs keep the last weight. The
seed file holds one 'u v' pair per line. With both preprocessing flags,
binarization runs before symmetrization.

Output CSV columns: kind,label1,label2,is_seed,objective,disagreements,
iterations,converged. One 'mapping' row per vertex pair, then one 'summary'
row carrying the numeric fields.")]
struct MatchArgs {
    /// First graph, as an edge-list file
    #[arg(long, value_name = "FILE")]
    g1: PathBuf,
    /// Second graph, as an edge-list file
    #[arg(long, value_name = "FILE")]
    g2: PathBuf,
    /// Seed pairs file; omit to match without seeds
    #[arg(long, value_name = "FILE")]
    seeds: Option<PathBuf>,
    /// Cap on solver iterations
    #[arg(long, default_value_t = 30)]
    max_iters: usize,
    /// Relative objective-improvement stopping tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Collapse weights to 0/1 and clear the diagonal in both graphs
    #[arg(long)]
    binarize: bool,
    /// Replace both adjacencies with the entrywise max of themselves and
    /// their transpose
    #[arg(long)]
    symmetrize: bool,
    /// Write the mapping CSV here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(after_help = "\
Output CSV columns: rho,m,trial,match_ratio,chance,disagreements,iterations,
runtime_millis, sorted by (rho, m, trial). Identical invocations reproduce
every column except runtime_millis. With --emit-graphs DIR, each trial also
writes rho<R>_m<M>_t<T>.{g1.edges,g2.edges,truth,seeds} into DIR.")]
struct SimulateArgs {
    /// Vertex count of each generated graph
    #[arg(long, default_value_t = 150)]
    c: usize,
    /// Edge probability
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Noise level in [0, 1]; repeat the flag to sweep several
    #[arg(long = "rho", value_name = "RHO")]
    rho: Vec<f64>,
    /// Seed counts: inclusive range "start:stop:step" or a comma list
    #[arg(long, value_name = "SPEC", default_value = "0:140:20")]
    m_values: String,
    /// Trials per (rho, m) cell
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Master RNG seed; every trial derives its own stream from it
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Write the per-trial CSV here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write each trial's graphs, planted truth, and seed pairs here
    #[arg(long, value_name = "DIR")]
    emit_graphs: Option<PathBuf>,
    /// Worker threads for trials (default: all cores)
    #[arg(long, env = "SGM_JOBS", value_name = "N")]
    jobs: Option<usize>,
}

enum CliError {
    /// Bad flags or unusable input files: exit 2.
    Input(String),
    /// Anything that indicates a bug or an environment failure: exit 1.
    Internal(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Match(args) => cmd_match(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_match(args: &MatchArgs) -> Result<(), CliError> {
    let mut g1 = load_graph(&args.g1)?;
    let mut g2 = load_graph(&args.g2)?;
    if args.binarize {
        g1 = g1.binarized();
        g2 = g2.binarized();
    }
    if args.symmetrize {
        g1 = g1.symmetrized();
        g2 = g2.symmetrized();
    }
    let seeds = match &args.seeds {
        Some(path) => {
            let file = File::open(path).map_err(|e| file_error(path, &e))?;
            load_seed_spec(BufReader::new(file)).map_err(|e| file_error(path, &e))?
        }
        None => SeedSpec::empty(),
    };
    let cfg = SolverConfig {
        max_iters: args.max_iters,
        tol_obj: args.tol,
        ..SolverConfig::default()
    };
    let result = match_graphs(&g1, &g2, &seeds, &cfg).map_err(|e| match e {
        SolverError::Graph(inner) => CliError::Input(inner.to_string()),
        SolverError::InvalidConfig(msg) => CliError::Input(msg),
        other => CliError::Internal(other.to_string()),
    })?;
    let sink = open_sink(args.out.as_deref())?;
    write_match_csv(&result, seeds.len(), sink)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let m_values = parse_m_values(&args.m_values).map_err(CliError::Input)?;
    let mut rhos = if args.rho.is_empty() {
        vec![0.1]
    } else {
        args.rho.clone()
    };
    if let Some(bad) = rhos.iter().find(|r| !r.is_finite()) {
        return Err(CliError::Input(format!("rho must be finite, got {bad}")));
    }
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::Input("jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    let configs: Vec<SimConfig> = rhos
        .iter()
        .map(|&rho| SimConfig {
            c: args.c,
            p: args.p,
            rho,
            m_values: m_values.clone(),
            trials: args.trials,
            rng_seed: args.rng_seed,
        })
        .collect();
    for cfg in &configs {
        cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    }
    if let Some(dir) = &args.emit_graphs {
        fs::create_dir_all(dir).map_err(|e| file_error(dir, &e))?;
    }
    let mut records: Vec<TrialRecord> = Vec::new();
    for cfg in &configs {
        let started = Instant::now();
        let sweep = match &args.emit_graphs {
            Some(dir) => run_sweep_emitting(cfg, dir)?,
            None => run_sweep(cfg).map_err(sim_error)?,
        };
        eprintln!(
            "rho={}: {} seed counts x {} trials in {:.1}s",
            cfg.rho,
            cfg.m_values.len(),
            cfg.trials,
            started.elapsed().as_secs_f64()
        );
        records.extend(sweep);
    }
    let sink = open_sink(args.out.as_deref())?;
    let mut writer = csv::Writer::from_writer(sink);
    for record in &records {
        writer
            .serialize(record)
            .map_err(|e| CliError::Internal(format!("writing output: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Internal(format!("writing output: {e}")))
}

/// Run one sweep sequentially, dumping every trial's artifacts into `dir`.
/// Records come out identical to `run_sweep`'s because each trial owns its
/// RNG stream.
fn run_sweep_emitting(cfg: &SimConfig, dir: &Path) -> Result<Vec<TrialRecord>, CliError> {
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let mut records = Vec::new();
    for &m in &cfg.m_values {
        for trial in 0..cfg.trials {
            let out = run_trial(cfg, m, trial).map_err(sim_error)?;
            emit_trial(dir, cfg.rho, m, trial, &out)
                .map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
            records.push(out.record);
        }
    }
    records.sort_by_key(|r| (r.m, r.trial));
    Ok(records)
}

fn emit_trial(
    dir: &Path,
    rho: f64,
    m: usize,
    trial: usize,
    out: &TrialOutput,
) -> io::Result<()> {
    let stem = format!("rho{rho}_m{m:03}_t{trial:03}");
    let write_graph = |suffix: &str, g: &Graph| -> io::Result<()> {
        let file = File::create(dir.join(format!("{stem}.{suffix}.edges")))?;
        let mut buf = BufWriter::new(file);
        write_edge_list(g, &mut buf)?;
        buf.flush()
    };
    write_graph("g1", &out.g1)?;
    write_graph("g2", &out.g2)?;
    let mut truth = BufWriter::new(File::create(dir.join(format!("{stem}.truth")))?);
    writeln!(truth, "# planted correspondence: g1 vertex -> g2 vertex")?;
    for label in out.g1.labels() {
        writeln!(truth, "{label} {}", out.truth[label])?;
    }
    truth.flush()?;
    let mut seeds = BufWriter::new(File::create(dir.join(format!("{stem}.seeds")))?);
    writeln!(seeds, "# revealed seed pairs")?;
    for (u, v) in out.seeds.pairs() {
        writeln!(seeds, "{u} {v}")?;
    }
    seeds.flush()
}

/// Expand "start:stop:step" (inclusive) or a comma list into sorted,
/// deduplicated seed counts.
fn parse_m_values(spec: &str) -> Result<Vec<usize>, String> {
    let spec = spec.trim();
    let mut values: Vec<usize> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("m-values range {spec:?} must be start:stop:step"));
        }
        let parse = |token: &str, what: &str| -> Result<usize, String> {
            token
                .trim()
                .parse()
                .map_err(|_| format!("m-values {what} {token:?} is not a nonnegative integer"))
        };
        let start = parse(parts[0], "start")?;
        let stop = parse(parts[1], "stop")?;
        let step = parse(parts[2], "step")?;
        if step == 0 {
            return Err("m-values step must be >= 1".into());
        }
        if stop < start {
            return Err(format!("m-values range {spec:?} has stop < start"));
        }
        (start..=stop).step_by(step).collect()
    } else {
        spec.split(',')
            .map(|token| {
                token
                    .trim()
                    .parse()
                    .map_err(|_| format!("seed count {token:?} is not a nonnegative integer"))
            })
            .collect::<Result<_, _>>()?
    };
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

fn write_match_csv<W: Write>(
    result: &MatchResult,
    seed_count: usize,
    sink: W,
) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Internal(format!("writing output: {e}"));
    let mut writer = csv::Writer::from_writer(sink);
    writer
        .write_record([
            "kind",
            "label1",
            "label2",
            "is_seed",
            "objective",
            "disagreements",
            "iterations",
            "converged",
        ])
        .map_err(fail)?;
    for (i, (u, v)) in result.mapping.iter().enumerate() {
        let is_seed = if i < seed_count { "true" } else { "false" };
        writer
            .write_record(["mapping", u, v, is_seed, "", "", "", ""])
            .map_err(fail)?;
    }
    writer
        .write_record([
            "summary",
            "",
            "",
            "",
            &result.objective_relaxed.to_string(),
            &result.disagreements.to_string(),
            &result.iterations.to_string(),
            &result.converged.to_string(),
        ])
        .map_err(fail)?;
    writer
        .flush()
        .map_err(|e| CliError::Internal(format!("writing output: {e}")))
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let file = File::open(path).map_err(|e| file_error(path, &e))?;
    load_edge_list(BufReader::new(file)).map_err(|e| file_error(path, &e))
}

fn file_error(path: &Path, err: &dyn std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {err}", path.display()))
}

fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|e| file_error(path, &e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout())),
    }
}

fn sim_error(err: SimError) -> CliError {
    match err {
        SimError::InvalidConfig(msg) => CliError::Input(msg),
        other => CliError::Internal(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::parse_m_values;

    #[test]
    fn m_value_ranges_are_inclusive_and_sorted() {
        assert_eq!(parse_m_values("0:150:50").unwrap(), [0, 50, 100, 150]);
        assert_eq!(parse_m_values("0:140:20").unwrap(), [0, 20, 40, 60, 80, 100, 120, 140]);
        assert_eq!(parse_m_values("5:5:1").unwrap(), [5]);
        assert_eq!(parse_m_values("0:7:3").unwrap(), [0, 3, 6]);
        assert_eq!(parse_m_values("40, 0,10").unwrap(), [0, 10, 40]);
        assert_eq!(parse_m_values("3,3,3").unwrap(), [3]);
        assert_eq!(parse_m_values("12").unwrap(), [12]);
    }

    #[test]
    fn bad_m_value_specs_are_rejected() {
        for bad in ["", "1:2", "1:2:3:4", "5:1:1", "0:10:0", "a,b", "-1", "1.5"] {
            assert!(parse_m_values(bad).is_err(), "{bad:?}");
        }
    }
}
