//! Seeded matching as relaxed quadratic assignment.
//!
//! With both adjacency matrices in canonical block order (seeds leading),
//! the solver climbs
//!
//! ```text
//! f(P) = tr(A11^T B11) + tr(P^T A21 B21^T) + tr(P^T A12^T B12)
//!        + tr(A22^T P B22 P^T)
//! ```
//!
//! over doubly stochastic `P`, starting from the flat matrix. Each step
//! linearizes `f` at the incumbent, solves the resulting assignment
//! problem for a permutation-matrix vertex `Q`, and moves to
//! `alpha * P + (1 - alpha) * Q` with `alpha` from an exact quadratic line
//! search. `alpha` weights the incumbent, so `alpha = 1` means "stand
//! still" and stops the loop. The final iterate is rounded to the nearest
//! permutation in entrywise l1 distance, which is itself an assignment
//! problem since `|Q - P|_1 = 2n - 2 tr(Q^T P)`.

use ndarray::{Array2, ArrayView2};
use thiserror::Error;

use crate::graph::{canonicalize, count_disagreements, Graph, GraphError, SeedSpec, SeededInstance};
use crate::lap::{solve_lap_max, LapError, Permutation};

/// Feasibility slack allowed on doubly stochastic iterates.
pub const DS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix is {rows}x{cols} but the instance has {expected} nonseed vertices")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
    #[error("numerical overflow: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lap(#[from] LapError),
}

/// A square matrix with nonnegative entries and unit row/column sums, up
/// to [`DS_TOLERANCE`]. Constructors other than [`new`](Self::new) build
/// feasible points directly and skip the check.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochasticMatrix {
    entries: Array2<f64>,
}

impl DoublyStochasticMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self, SolverError> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(SolverError::NotDoublyStochastic(format!(
                "shape is {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let candidate = DoublyStochasticMatrix { entries };
        let err = candidate.feasibility_error();
        if err > DS_TOLERANCE {
            return Err(SolverError::NotDoublyStochastic(format!(
                "feasibility error {err:.3e} exceeds {DS_TOLERANCE:.0e}"
            )));
        }
        Ok(candidate)
    }

    /// The flat matrix with every entry `1/n`, the polytope's barycenter.
    pub fn barycenter(n: usize) -> Self {
        assert!(n >= 1);
        DoublyStochasticMatrix {
            entries: Array2::from_elem((n, n), 1.0 / n as f64),
        }
    }

    pub fn from_permutation(p: &Permutation) -> Self {
        assert!(!p.is_empty());
        DoublyStochasticMatrix {
            entries: p.to_matrix(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Convex combination `alpha * self + (1 - alpha) * other`; feasible by
    /// convexity for `alpha` in [0, 1].
    pub fn blend(&self, other: &DoublyStochasticMatrix, alpha: f64) -> DoublyStochasticMatrix {
        debug_assert!((0.0..=1.0).contains(&alpha));
        debug_assert_eq!(self.dim(), other.dim());
        DoublyStochasticMatrix {
            entries: alpha * &self.entries + (1.0 - alpha) * &other.entries,
        }
    }

    /// Worst constraint violation: the most negative entry and the largest
    /// row/column sum deviation from 1. Non-finite entries count as
    /// infinitely infeasible.
    pub fn feasibility_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for &x in &self.entries {
            if !x.is_finite() {
                return f64::INFINITY;
            }
            worst = worst.max(-x);
        }
        for row in self.entries.rows() {
            worst = worst.max((row.sum() - 1.0).abs());
        }
        for col in self.entries.columns() {
            worst = worst.max((col.sum() - 1.0).abs());
        }
        worst
    }
}

/// Coefficients of the objective restricted to the segment
/// `alpha * P + (1 - alpha) * Q`:
///
/// ```text
/// g(alpha) = (c - d + e) alpha^2 + (d - 2e + u - v) alpha + (e + v)
/// ```
///
/// `c`, `d`, `e` come from the quadratic nonseed term at `P`, crossed, and
/// at `Q`; `u`, `v` are the seed-coupling linear term at `P` and `Q`. The
/// seed-to-seed constant is excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchCoefficients {
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub u: f64,
    pub v: f64,
}

impl LineSearchCoefficients {
    pub fn g(&self, alpha: f64) -> f64 {
        (self.c - self.d + self.e) * alpha * alpha
            + (self.d - 2.0 * self.e + self.u - self.v) * alpha
            + (self.e + self.v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Hard cap on Frank-Wolfe steps.
    pub max_iters: usize,
    /// Stop once the objective gain of a step falls to this fraction of
    /// `max(1, |objective|)`.
    pub tol_obj: f64,
    /// Reserved gradient-based stopping knob; not consulted yet.
    pub tol_grad: f64,
    /// Reserved for randomized starts; the start is always the flat matrix
    /// for now.
    pub rng_seed: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 30,
            tol_obj: 1e-9,
            tol_grad: 0.0,
            rng_seed: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolverError> {
        if self.max_iters == 0 {
            return Err(SolverError::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !self.tol_obj.is_finite() || self.tol_obj < 0.0 {
            return Err(SolverError::InvalidConfig(format!(
                "tol_obj must be finite and nonnegative, got {}",
                self.tol_obj
            )));
        }
        if !self.tol_grad.is_finite() || self.tol_grad < 0.0 {
            return Err(SolverError::InvalidConfig(format!(
                "tol_grad must be finite and nonnegative, got {}",
                self.tol_grad
            )));
        }
        Ok(())
    }
}

/// One Frank-Wolfe step as logged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStat {
    /// Objective at the iterate this step produced.
    pub objective: f64,
    /// Chosen step: the weight kept on the incumbent iterate.
    pub alpha: f64,
    /// Optimal value of the linearized subproblem.
    pub lap_value: f64,
    /// Constraint violation of the produced iterate.
    pub feasibility_error: f64,
}

/// Final relaxed iterate plus the per-step log.
#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    pub iterate: DoublyStochasticMatrix,
    pub trace: Vec<IterationStat>,
    /// True when the loop stopped on its own rather than on `max_iters`.
    pub converged: bool,
}

/// Full matching outcome, in original vertex labels.
#[derive(Debug, Clone)]
pub struct MatchResult {
    /// Bijection as (first-graph label, second-graph label) pairs, seed
    /// pairs first in seed order, then nonseeds in first-graph order.
    pub mapping: Vec<(String, String)>,
    /// Nonseed assignment in canonical instance indices.
    pub permutation: Permutation,
    /// Objective at the final doubly stochastic iterate, before rounding.
    pub objective_relaxed: f64,
    /// Ordered vertex pairs on which the matched graphs differ.
    pub disagreements: usize,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationStat>,
}

fn check_dims(inst: &SeededInstance, p: &Array2<f64>) -> Result<(), SolverError> {
    if p.nrows() != inst.n() || p.ncols() != inst.n() {
        return Err(SolverError::DimensionMismatch {
            rows: p.nrows(),
            cols: p.ncols(),
            expected: inst.n(),
        });
    }
    Ok(())
}

/// `sum_ij x[i,j] * y[i,j]`, i.e. `tr(X^T Y)`.
fn inner(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    debug_assert_eq!(x.dim(), y.dim());
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// The seed-coupling matrix `A21 B21^T + A12^T B12`; zero when `m = 0`.
fn seed_cross_term(inst: &SeededInstance) -> Array2<f64> {
    inst.a21().dot(&inst.b21().t()) + inst.a12().t().dot(&inst.b12())
}

/// Objective `f(P)`. `p` may be any `n x n` matrix, not necessarily
/// feasible, which keeps the function usable for derivative checks.
pub fn objective(inst: &SeededInstance, p: &Array2<f64>) -> Result<f64, SolverError> {
    check_dims(inst, p)?;
    let pbp = p.dot(&inst.b22()).dot(&p.t());
    Ok(inner(inst.a11(), inst.b11())
        + inner(seed_cross_term(inst).view(), p.view())
        + inner(inst.a22(), pbp.view()))
}

/// Gradient `A21 B21^T + A12^T B12 + A22 P B22^T + A22^T P B22`.
pub fn gradient(inst: &SeededInstance, p: &Array2<f64>) -> Result<Array2<f64>, SolverError> {
    check_dims(inst, p)?;
    let a22 = inst.a22();
    let b22 = inst.b22();
    Ok(seed_cross_term(inst) + a22.dot(p).dot(&b22.t()) + a22.t().dot(p).dot(&b22))
}

/// Maximize `g` over the segment from `q` (at 0) to `p` (at 1). Returns
/// the maximizing `alpha` and the coefficients; ties prefer the larger
/// `alpha`, so a flat segment yields 1 and stalls the caller.
pub fn line_search(
    inst: &SeededInstance,
    p: &Array2<f64>,
    q: &Array2<f64>,
) -> Result<(f64, LineSearchCoefficients), SolverError> {
    check_dims(inst, p)?;
    check_dims(inst, q)?;
    let a22 = inst.a22();
    let b22 = inst.b22();
    let xp = a22.t().dot(p).dot(&b22);
    let xq = a22.t().dot(q).dot(&b22);
    let cross = seed_cross_term(inst);
    let coeffs = LineSearchCoefficients {
        c: inner(xp.view(), p.view()),
        d: inner(xp.view(), q.view()) + inner(xq.view(), p.view()),
        e: inner(xq.view(), q.view()),
        u: inner(cross.view(), p.view()),
        v: inner(cross.view(), q.view()),
    };
    for coeff in [coeffs.c, coeffs.d, coeffs.e, coeffs.u, coeffs.v] {
        if !coeff.is_finite() {
            return Err(SolverError::NonFinite(
                "line search coefficients are not finite".into(),
            ));
        }
    }
    let quad = coeffs.c - coeffs.d + coeffs.e;
    let lin = coeffs.d - 2.0 * coeffs.e + coeffs.u - coeffs.v;
    let mut candidates = vec![0.0, 1.0];
    if quad != 0.0 {
        let stationary = -lin / (2.0 * quad);
        if stationary > 0.0 && stationary < 1.0 {
            candidates.push(stationary);
        }
    }
    let (_, alpha) = candidates
        .into_iter()
        .map(|alpha| (coeffs.g(alpha), alpha))
        .max_by(|a, b| a.partial_cmp(b).expect("finite coefficients"))
        .expect("candidates nonempty");
    Ok((alpha, coeffs))
}

/// Climb the relaxed objective from the flat start. Stops when the line
/// search keeps the incumbent, when a step's gain drops below `tol_obj`
/// relative to the objective scale, or after `max_iters` steps.
pub fn frank_wolfe_solve(
    inst: &SeededInstance,
    cfg: &SolverConfig,
) -> Result<RelaxedSolution, SolverError> {
    cfg.validate()?;
    let seed_term = inner(inst.a11(), inst.b11());
    let mut p = DoublyStochasticMatrix::barycenter(inst.n());
    let mut prev = objective(inst, p.entries())?;
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let grad = gradient(inst, p.entries())?;
        let (direction, lap_value) = solve_lap_max(&grad)?;
        let q = DoublyStochasticMatrix::from_permutation(&direction);
        let (alpha, coeffs) = line_search(inst, p.entries(), q.entries())?;
        if alpha == 1.0 {
            // The search kept the incumbent: no ascent along the best
            // direction, so further steps cannot move either.
            trace.push(IterationStat {
                objective: prev,
                alpha,
                lap_value,
                feasibility_error: p.feasibility_error(),
            });
            converged = true;
            break;
        }
        p = p.blend(&q, alpha);
        // g omits only the constant seed-to-seed term, so this equals the
        // objective at the new iterate without another pass over A and B.
        let current = coeffs.g(alpha) + seed_term;
        trace.push(IterationStat {
            objective: current,
            alpha,
            lap_value,
            feasibility_error: p.feasibility_error(),
        });
        let gain = current - prev;
        prev = current;
        if gain <= cfg.tol_obj * prev.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(RelaxedSolution {
        iterate: p,
        trace,
        converged,
    })
}

/// Nearest permutation to `p` in entrywise l1 distance, via one more
/// assignment solve on `p` itself.
pub fn project_to_permutation(p: &DoublyStochasticMatrix) -> Result<Permutation, SolverError> {
    let (perm, _) = solve_lap_max(p.entries())?;
    Ok(perm)
}

/// End-to-end matching: canonicalize, climb the relaxation, round, and
/// report the mapping in original labels.
pub fn match_graphs(
    g1: &Graph,
    g2: &Graph,
    seeds: &SeedSpec,
    cfg: &SolverConfig,
) -> Result<MatchResult, SolverError> {
    let inst = canonicalize(g1, g2, seeds)?;
    let relaxed = frank_wolfe_solve(&inst, cfg)?;
    let perm = project_to_permutation(&relaxed.iterate)?;
    let m = inst.m();
    let mut mapping = Vec::with_capacity(inst.total());
    for i in 0..m {
        mapping.push((inst.labels1()[i].clone(), inst.labels2()[i].clone()));
    }
    for i in 0..inst.n() {
        mapping.push((
            inst.labels1()[m + i].clone(),
            inst.labels2()[m + perm.apply(i)].clone(),
        ));
    }
    let objective_relaxed = objective(&inst, relaxed.iterate.entries())?;
    let disagreements = count_disagreements(g1, g2, &mapping)?;
    Ok(MatchResult {
        mapping,
        permutation: perm,
        objective_relaxed,
        disagreements,
        iterations: relaxed.trace.len(),
        converged: relaxed.converged,
        trace: relaxed.trace,
    })
}
