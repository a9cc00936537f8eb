use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::perron::{self, Enclosure};
use crate::weights::WeightVector;

/// Default relative tolerance for spectral radius computations.
pub const DEFAULT_RTOL: f64 = 1e-9;

/// Operator norms exposed to the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    /// Maximum row sum (operator norm induced by the sup norm).
    RowSum,
    /// Maximum column sum (induced by the 1-norm).
    ColSum,
    /// Largest singular value (induced by the Euclidean norm).
    Spectral,
}

impl Norm {
    pub fn as_str(self) -> &'static str {
        match self {
            Norm::RowSum => "row-sum",
            Norm::ColSum => "col-sum",
            Norm::Spectral => "spectral",
        }
    }

    pub const ALL: [Norm; 3] = [Norm::RowSum, Norm::ColSum, Norm::Spectral];
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row-sum" => Ok(Norm::RowSum),
            "col-sum" => Ok(Norm::ColSum),
            "spectral" => Ok(Norm::Spectral),
            other => Err(Error::BadConfig {
                message: format!(
                    "unknown norm '{other}', expected 'row-sum', 'col-sum' or 'spectral'"
                ),
            }),
        }
    }
}

/// Dense matrix with finite non-negative entries, stored row-major.
///
/// The non-negativity invariant is established at construction and preserved
/// by every operation, so downstream code never re-validates.
#[derive(Debug, Clone, PartialEq)]
pub struct NonNegMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl NonNegMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyShape);
        }
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                len: entries.len(),
            });
        }
        for (idx, &value) in entries.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidEntry {
                    row: idx / cols,
                    col: idx % cols,
                    value,
                });
            }
        }
        Ok(NonNegMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from nested row slices; rows must be non-empty and
    /// of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyShape);
        }
        let cols = rows[0].len();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        NonNegMatrix::new(rows.len(), cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "shape must be positive");
        NonNegMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "shape must be positive");
        let mut m = NonNegMatrix::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, &v| acc.max(v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn transpose(&self) -> NonNegMatrix {
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        NonNegMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Multiplies every entry by `factor`, which must be positive and finite.
    pub fn scale(&self, factor: f64) -> Result<NonNegMatrix> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::BadScale { value: factor });
        }
        let entries = self.entries.iter().map(|&v| v * factor).collect();
        NonNegMatrix::new(self.rows, self.cols, entries)
    }

    /// Entrywise product; shapes must match.
    pub fn hadamard_product(&self, other: &NonNegMatrix) -> Result<NonNegMatrix> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a * b)
            .collect();
        NonNegMatrix::new(self.rows, self.cols, entries)
    }

    /// Entrywise power with exponent `alpha > 0`, using the convention
    /// `0^alpha = 0`.
    pub fn hadamard_power(&self, alpha: f64) -> Result<NonNegMatrix> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::BadExponent { value: alpha });
        }
        let entries = self.entries.iter().map(|&v| v.powf(alpha)).collect();
        NonNegMatrix::new(self.rows, self.cols, entries)
    }

    /// Matrix product. Summation runs over the inner index in ascending
    /// order, so results are bitwise deterministic.
    pub fn matmul(&self, other: &NonNegMatrix) -> Result<NonNegMatrix> {
        if self.cols != other.rows {
            return Err(Error::InnerDim {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut entries = vec![0.0; self.rows * other.cols];
        mat_mul_raw(
            &self.entries,
            &other.entries,
            self.rows,
            self.cols,
            other.cols,
            &mut entries,
        );
        NonNegMatrix::new(self.rows, other.cols, entries)
    }

    /// Operator norm. The spectral norm is computed as the square root of
    /// the certified upper end of the Perron enclosure of `A^T A`, so it is
    /// always a valid upper bound on the true norm.
    pub fn operator_norm(&self, norm: Norm) -> Result<f64> {
        match norm {
            Norm::RowSum => Ok(row_sum_norm(&self.entries, self.rows, self.cols)),
            Norm::ColSum => {
                let mut sums = vec![0.0; self.cols];
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        sums[j] += self.entries[i * self.cols + j];
                    }
                }
                Ok(sums.iter().fold(0.0, |acc: f64, &v| acc.max(v)))
            }
            Norm::Spectral => {
                let gram = self.transpose().matmul(self)?;
                let enc = perron::enclosure_raw(&gram.entries, gram.rows, perron::TIGHT_RTOL)?;
                Ok(enc.upper.sqrt())
            }
        }
    }

    /// Spectral radius of a square matrix, accurate to relative tolerance
    /// `rtol`. Returns the midpoint of a certified enclosure; see
    /// [`NonNegMatrix::spectral_radius_enclosure`] for the interval itself.
    pub fn spectral_radius(&self, rtol: f64) -> Result<f64> {
        Ok(self.spectral_radius_enclosure(rtol)?.midpoint())
    }

    /// Certified interval `[lower, upper]` containing the spectral radius,
    /// with `upper - lower <= rtol * upper`. Reducible matrices are split
    /// into strongly connected components first, so triangular and nilpotent
    /// cases come out exact.
    pub fn spectral_radius_enclosure(&self, rtol: f64) -> Result<Enclosure> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        perron::enclosure_raw(&self.entries, self.rows, rtol)
    }

    /// Checks `self <= other + tol * max(1, other)` entrywise.
    pub fn entrywise_leq(&self, other: &NonNegMatrix, tol: f64) -> Result<bool> {
        self.check_same_shape(other)?;
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::BadTolerance { value: tol });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .all(|(&a, &b)| a <= b + tol * b.max(1.0)))
    }

    fn check_same_shape(&self, other: &NonNegMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        Ok(())
    }
}

/// Weighted Hadamard geometric mean: entrywise product of `mats[k]^(w_k)`.
/// All matrices must share a shape, and there must be one weight per matrix.
pub fn weighted_hadamard_mean(
    mats: &[NonNegMatrix],
    weights: &WeightVector,
) -> Result<NonNegMatrix> {
    if mats.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            found: mats.len(),
        });
    }
    let first = &mats[0];
    let mut entries = vec![1.0; first.entries.len()];
    for (mat, &alpha) in mats.iter().zip(weights.weights()) {
        if mat.rows != first.rows || mat.cols != first.cols {
            return Err(Error::ShapeMismatch {
                left: (first.rows, first.cols),
                right: (mat.rows, mat.cols),
            });
        }
        for (e, &v) in entries.iter_mut().zip(&mat.entries) {
            *e *= v.powf(alpha);
        }
    }
    NonNegMatrix::new(first.rows, first.cols, entries)
}

/// `out = a * b` on raw row-major buffers; `a` is `m x k`, `b` is `k x n`.
/// The inner index ascends, which callers rely on for bitwise determinism.
pub(crate) fn mat_mul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    out.fill(0.0);
    for i in 0..m {
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += aip * brow[j];
            }
        }
    }
}

pub(crate) fn row_sum_norm(entries: &[f64], rows: usize, cols: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..rows {
        let sum: f64 = entries[i * cols..(i + 1) * cols].iter().sum();
        best = best.max(sum);
    }
    best
}
