//! Linear assignment: pick one entry per row and column of a profit matrix
//! to maximize the total.
//!
//! The solver is the shortest-augmenting-path form of the Hungarian
//! algorithm with row/column potentials, O(n^3) overall. Profits are
//! negated internally so the core works as a minimizer. All dual updates
//! are additions and subtractions of input entries, so integer-valued
//! inputs stay exact.

use itertools::Itertools;
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LapError {
    #[error("assignment matrix is empty")]
    Empty,
    #[error("assignment matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is {0}x{0} but exhaustive search is capped at 9x9")]
    TooLarge(usize),
    #[error("image {0:?} is not a permutation")]
    NotPermutation(Vec<usize>),
}

/// A permutation of `{0, .., n-1}`, stored as its image: `image[i]` is
/// where `i` goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, LapError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &j in &image {
            if j >= n || seen[j] {
                return Err(LapError::NotPermutation(image));
            }
            seen[j] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// Where `i` maps to.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.len()];
        for (i, &j) in self.image.iter().enumerate() {
            image[j] = i;
        }
        Permutation { image }
    }

    /// The permutation matrix `Q` with `Q[i, apply(i)] = 1`.
    pub fn to_matrix(&self) -> Array2<f64> {
        let n = self.len();
        let mut q = Array2::zeros((n, n));
        for (i, &j) in self.image.iter().enumerate() {
            q[[i, j]] = 1.0;
        }
        q
    }
}

fn validate(profits: &Array2<f64>) -> Result<usize, LapError> {
    let (rows, cols) = profits.dim();
    if rows != cols {
        return Err(LapError::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(LapError::Empty);
    }
    for ((row, col), &w) in profits.indexed_iter() {
        if !w.is_finite() {
            return Err(LapError::NonFinite { row, col });
        }
    }
    Ok(rows)
}

/// Maximize `sum_i profits[i, pi(i)]` over permutations `pi`. Returns an
/// optimal permutation and its total. Deterministic: ties are resolved by
/// the fixed scan order of the algorithm.
pub fn solve_lap_max(profits: &Array2<f64>) -> Result<(Permutation, f64), LapError> {
    validate(profits)?;
    let image = hungarian_min_image(&profits.mapv(|w| -w));
    let total = image
        .iter()
        .enumerate()
        .map(|(i, &j)| profits[[i, j]])
        .sum();
    Ok((Permutation { image }, total))
}

/// Shortest-augmenting-path Hungarian minimizer. Returns the image of the
/// optimal row-to-column assignment. Column `n` is a virtual start column.
fn hungarian_min_image(cost: &Array2<f64>) -> Vec<usize> {
    const NONE: usize = usize::MAX;
    let n = cost.nrows();
    let virt = n;
    let mut u = vec![0.0; n]; // row potentials
    let mut v = vec![0.0; n + 1]; // column potentials
    let mut row_of = vec![NONE; n + 1]; // matched row per column
    let mut way = vec![virt; n + 1]; // predecessor column on the tree
    for row in 0..n {
        row_of[virt] = row;
        let mut j0 = virt;
        let mut minv = vec![f64::INFINITY; n]; // best reduced cost per free column
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = virt;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let reduced = cost[[i0, j]] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            // Every used column is matched (j0 stops before an unmatched
            // one), so row_of is defined where it is read.
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == NONE {
                break;
            }
        }
        while j0 != virt {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        }
    }
    let mut image = vec![NONE; n];
    for j in 0..n {
        image[row_of[j]] = j;
    }
    image
}

/// Exhaustive maximizer for cross-checking, capped at 9x9. Among optima it
/// returns the lexicographically smallest image.
pub fn brute_force_lap(profits: &Array2<f64>) -> Result<(Permutation, f64), LapError> {
    let n = validate(profits)?;
    if n > 9 {
        return Err(LapError::TooLarge(n));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for image in (0..n).permutations(n) {
        let total: f64 = image
            .iter()
            .enumerate()
            .map(|(i, &j)| profits[[i, j]])
            .sum();
        // permutations() yields in lexicographic order; strict improvement
        // keeps the first optimum, hence the lexicographically smallest.
        if best.as_ref().is_none_or(|(_, b)| total > *b) {
            best = Some((image, total));
        }
    }
    let (image, total) = best.expect("n >= 1");
    Ok((Permutation { image }, total))
}
