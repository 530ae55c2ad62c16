//! Euclidean projection onto the sparse probability simplex
//! `{ w >= 0, sum(w) = 1, ||w||_0 <= M }`.
//!
//! The projection keeps the `M` largest coordinates, projects them onto the
//! simplex and zeroes everything else. With the coordinates sorted
//! decreasingly, the simplex step uses
//!
//! ```text
//! beta = max { j <= M : w_j > (sum_{i<=j} w_i - 1) / j }
//! tau  = (sum_{i<=beta} w_i - 1) / beta
//! w_i  <- max(w_i - tau, 0)
//! ```

use crate::error::{Error, Result};

/// Maximum number of nonzero ensemble weights. Always at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparsityBudget(usize);

impl SparsityBudget {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("sparsity budget M must be at least 1"));
        }
        Ok(Self(m))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Result of a projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Projected weights at the input positions.
    pub weights: Vec<f64>,
    /// Input positions in decreasing order of the input value (stable: ties
    /// keep ascending position). Callers holding parallel arrays can reorder
    /// them with this permutation.
    pub order: Vec<usize>,
    /// The shift subtracted from the retained coordinates.
    pub tau: f64,
    /// Number of coordinates left strictly positive by the simplex step.
    pub support: usize,
}

impl Projection {
    /// The projected weights permuted into decreasing order.
    pub fn sorted_weights(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.weights[i]).collect()
    }
}

/// Stable decreasing order of `w`.
pub fn decreasing_order(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    order
}

pub fn project_sparse_simplex(w: &[f64], budget: SparsityBudget) -> Result<Projection> {
    if w.is_empty() {
        return Err(Error::domain("cannot project an empty vector"));
    }
    if let Some(i) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("non-finite weight at position {i}")));
    }
    let order = decreasing_order(w);
    let keep = budget.get().min(w.len());

    // Coordinates whose projected value would be within rounding noise of
    // zero are treated as inactive, so feasible inputs map to themselves.
    let scale = w[order[0]].abs().max(1.0);
    let margin = 4.0 * f64::EPSILON * scale;

    let mut prefix = 0.0;
    let mut beta = 1;
    let mut beta_sum = w[order[0]];
    for (j, &i) in order.iter().take(keep).enumerate() {
        prefix += w[i];
        let rank = (j + 1) as f64;
        if w[i] - (prefix - 1.0) / rank > margin {
            beta = j + 1;
            beta_sum = prefix;
        }
    }
    let tau = (beta_sum - 1.0) / beta as f64;

    let mut weights = vec![0.0; w.len()];
    for &i in order.iter().take(beta) {
        weights[i] = (w[i] - tau).max(0.0);
    }
    Ok(Projection {
        weights,
        order,
        tau,
        support: beta,
    })
}

/// Projection onto the full probability simplex.
pub fn simplex_project(v: &[f64]) -> Result<Vec<f64>> {
    let budget = SparsityBudget::new(v.len().max(1))?;
    project_sparse_simplex(v, budget).map(|p| p.weights)
}
