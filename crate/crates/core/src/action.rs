//! Finite action sets: path incidence vectors or arbitrary real vectors.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::PathSet;

/// Relative singular-value threshold used for numeric rank.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("action set is empty")]
    Empty,
    #[error("action {index} has length {actual}, expected {expected}")]
    RaggedVectors {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("action {0} has a non-finite entry")]
    NonFinite(usize),
}

/// A finite set of equal-length cost-coefficient vectors. The observed cost
/// of action `x` under cost vector `C` is `C · x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    vectors: Vec<Vec<f64>>,
    labels: Vec<String>,
    dimension: usize,
}

impl ActionSet {
    /// Builds an action set from explicit vectors; the dimension is the
    /// numeric rank of the set.
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self, ActionError> {
        let width = vectors.first().ok_or(ActionError::Empty)?.len();
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != width {
                return Err(ActionError::RaggedVectors {
                    index,
                    expected: width,
                    actual: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ActionError::NonFinite(index));
            }
        }
        let dimension = numeric_rank(&vectors);
        let labels = (0..vectors.len()).map(|i| format!("#{i}")).collect();
        Ok(Self {
            vectors,
            labels,
            dimension,
        })
    }

    /// Path incidence vectors, reusing the exact rank already computed.
    pub fn from_paths(paths: &PathSet) -> Self {
        Self {
            vectors: paths.vectors(),
            labels: paths.paths.iter().map(|p| p.to_string()).collect(),
            dimension: paths.dimension,
        }
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn get(&self, id: usize) -> &[f64] {
        &self.vectors[id]
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Length of each vector (number of cost coordinates).
    pub fn width(&self) -> usize {
        self.vectors[0].len()
    }

    /// Dimension of the span of the set.
    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rank by singular values relative to the largest one.
pub fn numeric_rank(vectors: &[Vec<f64>]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let width = first.len();
    if width == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(vectors.len(), width, |r, c| vectors[r][c]);
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > top * RANK_TOLERANCE).count()
}
