//! Barycentric spanners of finite vector sets.
//!
//! A spanner is a subset `B` of `d` set members such that every member of the
//! set is a linear combination of `B` with coefficients in `[-C, C]`
//! (`C = 1` for an exact spanner). Construction follows the determinant-swap
//! scheme: start from any independent subset, then keep replacing a basis
//! element by the set member that multiplies the basis volume by more than
//! `C`. At a fixed point Cramer's rule bounds every coefficient by `C`.
//!
//! Set vectors may live in a larger ambient space than their span (path
//! incidence vectors are length `m` but span only `d` dimensions), so volumes
//! are measured on a fixed set of `d` coordinates picked by pivoted
//! elimination of the initial basis. The projection is injective on the span,
//! so volume ratios are the same as in any basis of the subspace.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Accepted-swap margin above `approx_c`.
const SWAP_MARGIN: f64 = 1e-10;
/// Linear-independence threshold for the greedy initial scan.
const INDEPENDENCE_TOL: f64 = 1e-9;
/// Componentwise reconstruction tolerance, scaled by `max(1, |x|_inf)`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpannerError {
    #[error("set spans {found} dimensions, fewer than the requested {expected}")]
    RankDeficient { expected: usize, found: usize },
    #[error("set spans more than the requested {expected} dimensions")]
    RankExceeds { expected: usize },
    #[error("no convergence after {swaps} swaps")]
    NonConvergence { swaps: usize },
    #[error("approximation factor must be a finite value >= 1, got {0}")]
    InvalidApproximation(f64),
    #[error("vector has length {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("vector is outside the span of the basis (residual {residual:e})")]
    OutOfSpan { residual: f64 },
    #[error("the input set is empty")]
    EmptySet,
}

#[derive(Debug, Clone)]
pub struct BarycentricSpanner {
    basis: Vec<Vec<f64>>,
    basis_ids: Vec<usize>,
    coords: Vec<usize>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    approx_c: f64,
    volume_history: Vec<f64>,
}

impl BarycentricSpanner {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Indices of the basis vectors in the input set, by slot.
    pub fn basis_ids(&self) -> &[usize] {
        &self.basis_ids
    }

    /// Coordinates the volume is measured on.
    pub fn projection(&self) -> &[usize] {
        &self.coords
    }

    pub fn approx_c(&self) -> f64 {
        self.approx_c
    }

    /// Absolute projected determinant after initialization and after each
    /// accepted swap.
    pub fn volume_history(&self) -> &[f64] {
        &self.volume_history
    }

    /// Coefficients `a` with `x = Σ a_i · basis_i`.
    pub fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>, SpannerError> {
        let width = self.basis[0].len();
        if x.len() != width {
            return Err(SpannerError::DimensionMismatch {
                expected: width,
                actual: x.len(),
            });
        }
        let a = self.solve_projected(x);
        let scale = x.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let mut residual = 0.0f64;
        for (c, &xc) in x.iter().enumerate() {
            let recon: f64 = a.iter().zip(&self.basis).map(|(ai, b)| ai * b[c]).sum();
            residual = residual.max((recon - xc).abs());
        }
        if residual >= RESIDUAL_TOL * scale {
            return Err(SpannerError::OutOfSpan { residual });
        }
        Ok(a)
    }

    fn solve_projected(&self, x: &[f64]) -> Vec<f64> {
        let rhs = DVector::from_iterator(self.coords.len(), self.coords.iter().map(|&c| x[c]));
        self.lu
            .solve(&rhs)
            .expect("spanner basis is nonsingular on its projection")
            .iter()
            .copied()
            .collect()
    }
}

/// Builds a `C`-approximate barycentric spanner (`approx_c = 1` for exact)
/// of `set`, which must span exactly `d` dimensions.
pub fn build_spanner(
    set: &[Vec<f64>],
    d: usize,
    approx_c: f64,
) -> Result<BarycentricSpanner, SpannerError> {
    if !(approx_c.is_finite() && approx_c >= 1.0) {
        return Err(SpannerError::InvalidApproximation(approx_c));
    }
    let width = set.first().ok_or(SpannerError::EmptySet)?.len();
    if let Some(bad) = set.iter().find(|v| v.len() != width) {
        return Err(SpannerError::DimensionMismatch {
            expected: width,
            actual: bad.len(),
        });
    }
    if d == 0 {
        return Err(SpannerError::RankDeficient {
            expected: 0,
            found: 0,
        });
    }

    let mut basis_ids = greedy_independent(set, d)?;
    let coords = pivot_columns(set, &basis_ids);

    let project = |id: usize| -> Vec<f64> { coords.iter().map(|&c| set[id][c]).collect() };
    let projected: Vec<Vec<f64>> = (0..set.len()).map(project).collect();
    let factor = |ids: &[usize]| {
        DMatrix::from_fn(d, d, |r, i| projected[ids[i]][r]).lu()
    };

    let mut lu = factor(&basis_ids);
    let mut volume_history = vec![lu.determinant().abs()];
    let max_swaps = d * set.len() * 64;
    let mut swaps = 0usize;

    let solve_all = |lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>| -> Vec<Vec<f64>> {
        projected
            .iter()
            .map(|p| {
                lu.solve(&DVector::from_column_slice(p))
                    .expect("basis is nonsingular")
                    .iter()
                    .copied()
                    .collect()
            })
            .collect()
    };
    let mut coeffs = solve_all(&lu);

    loop {
        let mut swapped = false;
        for slot in 0..d {
            // det(basis with slot replaced by x) = det(basis) * a_slot(x)
            let mut best = (0usize, f64::NEG_INFINITY);
            for (id, a) in coeffs.iter().enumerate() {
                let ratio = a[slot].abs();
                if ratio > best.1 {
                    best = (id, ratio);
                }
            }
            if best.1 > approx_c + SWAP_MARGIN {
                basis_ids[slot] = best.0;
                swaps += 1;
                if swaps > max_swaps {
                    return Err(SpannerError::NonConvergence { swaps });
                }
                lu = factor(&basis_ids);
                volume_history.push(lu.determinant().abs());
                coeffs = solve_all(&lu);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }

    Ok(BarycentricSpanner {
        basis: basis_ids.iter().map(|&i| set[i].clone()).collect(),
        basis_ids,
        coords,
        lu,
        approx_c,
        volume_history,
    })
}

/// First `d` linearly independent members in set order (modified
/// Gram-Schmidt with reorthogonalization).
fn greedy_independent(set: &[Vec<f64>], d: usize) -> Result<Vec<usize>, SpannerError> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut ids = Vec::new();
    for (id, v) in set.iter().enumerate() {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for qk in &q {
                let proj: f64 = qk.iter().zip(&r).map(|(a, b)| a * b).sum();
                for (ri, qi) in r.iter_mut().zip(qk) {
                    *ri -= proj * qi;
                }
            }
        }
        let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if rn > INDEPENDENCE_TOL * norm {
            if ids.len() == d {
                return Err(SpannerError::RankExceeds { expected: d });
            }
            q.push(r.into_iter().map(|x| x / rn).collect());
            ids.push(id);
        }
    }
    if ids.len() < d {
        return Err(SpannerError::RankDeficient {
            expected: d,
            found: ids.len(),
        });
    }
    Ok(ids)
}

/// Columns chosen by complete pivoting on the `d × width` matrix of basis rows.
fn pivot_columns(set: &[Vec<f64>], ids: &[usize]) -> Vec<usize> {
    let mut rows: Vec<Vec<f64>> = ids.iter().map(|&i| set[i].clone()).collect();
    let width = rows[0].len();
    let d = rows.len();
    let mut used_cols = vec![false; width];
    let mut used_rows = vec![false; d];
    let mut cols = Vec::with_capacity(d);
    for _ in 0..d {
        let mut best = (0, 0, -1.0f64);
        for (r, row) in rows.iter().enumerate() {
            if used_rows[r] {
                continue;
            }
            for (c, &x) in row.iter().enumerate() {
                if !used_cols[c] && x.abs() > best.2 {
                    best = (r, c, x.abs());
                }
            }
        }
        let (pr, pc, _) = best;
        used_rows[pr] = true;
        used_cols[pc] = true;
        cols.push(pc);
        let pivot_row = rows[pr].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if used_rows[r] {
                continue;
            }
            let f = row[pc] / pivot_row[pc];
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
        }
    }
    cols.sort_unstable();
    cols
}
