//! Correlated random-graph benchmarks: generate a graph, perturb an
//! independent copy of its edges, hide the correspondence behind fresh
//! labels, reveal a few seed pairs, and score how much of the rest the
//! solver recovers.
//!
//! Reproducibility discipline: every trial draws from its own ChaCha8
//! stream keyed by `(rng_seed, rho, m, trial)`, so a single trial can be
//! replayed in isolation and execution order (including parallel order)
//! never changes results.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use ndarray::Array2;

use crate::graph::{Graph, GraphError, SeedSpec};
use crate::solver::{match_graphs, MatchResult, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("perturbation needs a simple graph: {0}")]
    NotSimple(String),
    #[error("vertex {0:?} is missing from the planted correspondence")]
    MissingTruth(String),
    #[error("match ratio is undefined without nonseed vertices")]
    NoNonseeds,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// One sweep: fixed graph size, edge density, and noise level, across
/// several seed counts with `trials` repetitions each.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Vertex count of each generated graph.
    pub c: usize,
    /// Edge probability.
    pub p: f64,
    /// Probability that the perturbation flips a vertex pair.
    pub rho: f64,
    /// Seed counts to sweep, each below `c`.
    pub m_values: Vec<usize>,
    /// Trials per seed count.
    pub trials: usize,
    /// Master seed; trial substreams are derived from it.
    pub rng_seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.c == 0 {
            return Err(SimError::InvalidConfig("c must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(SimError::InvalidConfig(format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(SimError::InvalidConfig(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        if self.m_values.is_empty() {
            return Err(SimError::InvalidConfig("m_values is empty".into()));
        }
        for &m in &self.m_values {
            if m >= self.c {
                return Err(SimError::InvalidConfig(format!(
                    "m = {m} leaves no vertices to match in graphs of order {}",
                    self.c
                )));
            }
        }
        let mut sorted = self.m_values.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.m_values.len() {
            return Err(SimError::InvalidConfig("m_values repeat a value".into()));
        }
        if self.trials == 0 {
            return Err(SimError::InvalidConfig("trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// Flat result row for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub rho: f64,
    pub m: usize,
    pub trial: usize,
    /// Fraction of nonseed vertices mapped to their planted partner.
    pub match_ratio: f64,
    /// Expected ratio for a uniformly random bijection, `1 / (c - m)`.
    pub chance: f64,
    pub disagreements: usize,
    pub iterations: usize,
    /// Wall time of the match call alone.
    pub runtime_millis: f64,
}

/// Everything one trial produced, for callers that want more than the row.
#[derive(Debug)]
pub struct TrialOutput {
    pub record: TrialRecord,
    pub result: MatchResult,
    pub g1: Graph,
    pub g2: Graph,
    /// Planted correspondence on all vertices, g1 label to g2 label.
    pub truth: HashMap<String, String>,
    pub seeds: SeedSpec,
}

fn trial_rng(master: u64, rho: f64, m: usize, trial: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&rho.to_bits().to_le_bytes());
    key[16..24].copy_from_slice(&(m as u64).to_le_bytes());
    key[24..32].copy_from_slice(&(trial as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Sample a simple graph on `c` vertices where each unordered pair is an
/// edge independently with probability `p`. Labels are `v0..v{c-1}`; pairs
/// are drawn in row-major order of the upper triangle.
pub fn gen_er(c: usize, p: f64, rng: &mut impl Rng) -> Graph {
    assert!(c >= 1);
    assert!((0.0..=1.0).contains(&p));
    let mut adj = Array2::zeros((c, c));
    for i in 0..c {
        for j in (i + 1)..c {
            if rng.random_bool(p) {
                adj[[i, j]] = 1.0;
                adj[[j, i]] = 1.0;
            }
        }
    }
    let labels = (0..c).map(|i| format!("v{i}")).collect();
    Graph::new(labels, adj).expect("labels are distinct and adj is square")
}

/// Resample each unordered pair of a simple graph: an edge survives with
/// probability `1 - rho`, a non-edge appears with probability `rho`.
/// `rho = 0` copies the graph; `rho = 1` complements it. Labels carry over.
pub fn perturb(g: &Graph, rho: f64, rng: &mut impl Rng) -> Result<Graph, SimError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(SimError::InvalidConfig(format!(
            "rho must lie in [0, 1], got {rho}"
        )));
    }
    let c = g.order();
    let adj = g.adj();
    for i in 0..c {
        if adj[[i, i]] != 0.0 {
            return Err(SimError::NotSimple(format!(
                "self-loop at {:?}",
                g.labels()[i]
            )));
        }
        for j in 0..c {
            let w = adj[[i, j]];
            if w != 0.0 && w != 1.0 {
                return Err(SimError::NotSimple(format!(
                    "weight {w} between {:?} and {:?}",
                    g.labels()[i], g.labels()[j]
                )));
            }
            if adj[[j, i]] != w {
                return Err(SimError::NotSimple(format!(
                    "asymmetric pair {:?}, {:?}",
                    g.labels()[i], g.labels()[j]
                )));
            }
        }
    }
    let mut out = Array2::zeros((c, c));
    for i in 0..c {
        for j in (i + 1)..c {
            let keep = if adj[[i, j]] != 0.0 { 1.0 - rho } else { rho };
            if rng.random_bool(keep) {
                out[[i, j]] = 1.0;
                out[[j, i]] = 1.0;
            }
        }
    }
    Ok(Graph::new(g.labels().to_vec(), out).expect("same labels, square matrix"))
}

/// Hide `g` behind a uniformly random relabeling: returns the shuffled
/// graph with fresh labels `w0..` and the correspondence from `g`'s labels
/// to the new ones.
pub fn plant_correspondence(
    g: &Graph,
    rng: &mut impl Rng,
) -> (Graph, HashMap<String, String>) {
    let c = g.order();
    let mut position: Vec<usize> = (0..c).collect();
    position.shuffle(rng);
    let mut adj = Array2::zeros((c, c));
    for i in 0..c {
        for j in 0..c {
            adj[[position[i], position[j]]] = g.adj()[[i, j]];
        }
    }
    let labels: Vec<String> = (0..c).map(|k| format!("w{k}")).collect();
    let truth = g
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), format!("w{}", position[i])))
        .collect();
    let shuffled = Graph::new(labels, adj).expect("fresh labels, square matrix");
    (shuffled, truth)
}

/// Fraction of nonseed vertices whose matched partner is the planted one.
/// `truth` must cover every vertex in the result's mapping.
pub fn match_ratio(
    result: &MatchResult,
    truth: &HashMap<String, String>,
    seeds: &SeedSpec,
) -> Result<f64, SimError> {
    let seeded: std::collections::HashSet<&str> =
        seeds.pairs().iter().map(|(u, _)| u.as_str()).collect();
    let mut nonseeds = 0usize;
    let mut correct = 0usize;
    for (u, v) in &result.mapping {
        let planted = truth
            .get(u)
            .ok_or_else(|| SimError::MissingTruth(u.clone()))?;
        if seeded.contains(u.as_str()) {
            continue;
        }
        nonseeds += 1;
        if planted == v {
            correct += 1;
        }
    }
    if nonseeds == 0 {
        return Err(SimError::NoNonseeds);
    }
    Ok(correct as f64 / nonseeds as f64)
}

/// Run one trial of the sweep in `cfg` at seed count `m`: generate,
/// perturb, plant, reveal a uniform seed subset, match with default solver
/// settings, and score. Fully determined by `(cfg.rng_seed, cfg.rho, m,
/// trial)`.
pub fn run_trial(cfg: &SimConfig, m: usize, trial: usize) -> Result<TrialOutput, SimError> {
    let mut rng = trial_rng(cfg.rng_seed, cfg.rho, m, trial);
    let g1 = gen_er(cfg.c, cfg.p, &mut rng);
    let perturbed = perturb(&g1, cfg.rho, &mut rng)?;
    let (g2, truth) = plant_correspondence(&perturbed, &mut rng);
    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, cfg.c, m).into_vec();
    chosen.sort_unstable();
    let seed_pairs = chosen
        .iter()
        .map(|&i| {
            let u = g1.labels()[i].clone();
            let v = truth[&u].clone();
            (u, v)
        })
        .collect();
    let seeds = SeedSpec::new(seed_pairs)?;
    let started = Instant::now();
    let result = match_graphs(&g1, &g2, &seeds, &SolverConfig::default())?;
    let runtime_millis = started.elapsed().as_secs_f64() * 1e3;
    let ratio = match_ratio(&result, &truth, &seeds)?;
    let record = TrialRecord {
        rho: cfg.rho,
        m,
        trial,
        match_ratio: ratio,
        chance: 1.0 / (cfg.c - m) as f64,
        disagreements: result.disagreements,
        iterations: result.iterations,
        runtime_millis,
    };
    Ok(TrialOutput {
        record,
        result,
        g1,
        g2,
        truth,
        seeds,
    })
}

/// Run every `(m, trial)` cell of the sweep, in parallel, and return the
/// records sorted by `(m, trial)`. Apart from `runtime_millis`, the output
/// is a pure function of the config.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<TrialRecord>, SimError> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = cfg
        .m_values
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();
    let mut records = cells
        .into_par_iter()
        .map(|(m, t)| run_trial(cfg, m, t).map(|out| out.record))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| (r.m, r.trial));
    Ok(records)
}
