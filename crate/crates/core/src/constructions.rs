//! Structured families: block-cyclic embeddings, truncated shift sets,
//! and discretized positive kernels.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::NonNegMatrix;
use crate::sets::OperatorSet;

fn validate_square_family(mats: &[NonNegMatrix]) -> Result<usize> {
    if mats.is_empty() {
        return Err(Error::EmptySet);
    }
    let dim = mats[0].rows();
    for m in mats {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: m.rows(),
            });
        }
    }
    Ok(dim)
}

/// Cyclic block companion of `k` matrices of equal dimension `d`: block
/// row `i` carries `mats[i]` in block column `i+1` (wrapping at the end),
/// all other blocks zero. For `k == 1` this is the matrix itself. The
/// `k`-th power of the result is block diagonal with all cyclic products
/// of the family, so its radius satisfies
/// `rho(T)^k = rho(mats[0] * ... * mats[k-1])`.
pub fn block_cyclic(mats: &[NonNegMatrix]) -> Result<NonNegMatrix> {
    let dim = validate_square_family(mats)?;
    let k = mats.len();
    if k == 1 {
        return Ok(mats[0].clone());
    }
    let n = k * dim;
    let mut entries = vec![0.0; n * n];
    for (i, mat) in mats.iter().enumerate() {
        let block_col = if i + 1 < k { i + 1 } else { 0 };
        for r in 0..dim {
            for c in 0..dim {
                entries[(i * dim + r) * n + block_col * dim + c] = mat.get(r, c);
            }
        }
    }
    NonNegMatrix::new(n, n, entries)
}

/// Diagonal blocks of the `k`-th power of [`block_cyclic`]`(mats)`,
/// computed directly: block `j` is the cyclic left-to-right product
/// starting at `mats[j]`.
pub fn block_cyclic_kth_power_blocks(mats: &[NonNegMatrix]) -> Result<Vec<NonNegMatrix>> {
    validate_square_family(mats)?;
    let k = mats.len();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut prod = mats[j].clone();
        for t in 1..k {
            prod = prod.matmul(&mats[(j + t) % k])?;
        }
        out.push(prod);
    }
    Ok(out)
}

/// Cyclically shifted component products of a word over `m` sets.
///
/// `picks[i][j][t]` selects a member of `sets[t]`, for `i` over the
/// blocks of the word and `j` over positions within a block. The `t`-th
/// returned matrix multiplies, block by block and position by position,
/// the member of set `(t + j) mod m` selected at that position, so the
/// `m` results cover every cyclic alignment of the sets along the word.
pub fn cyclic_word_products(
    sets: &[OperatorSet],
    picks: &[Vec<Vec<usize>>],
) -> Result<Vec<NonNegMatrix>> {
    if sets.is_empty() {
        return Err(Error::EmptySet);
    }
    let m = sets.len();
    let dim = sets[0].dim();
    for s in sets {
        if s.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
    }
    if picks.is_empty() {
        return Err(Error::BadConfig {
            message: "need at least one block of member picks".to_string(),
        });
    }
    for block in picks {
        if block.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                found: block.len(),
            });
        }
        for row in block {
            if row.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
        }
    }
    let mut out = Vec::with_capacity(m);
    for t in 0..m {
        let mut product: Option<NonNegMatrix> = None;
        for block in picks {
            for (j, row) in block.iter().enumerate() {
                let s = (t + j) % m;
                let index = row[s];
                if index >= sets[s].len() {
                    return Err(Error::WordIndex {
                        position: j,
                        index,
                        bound: sets[s].len(),
                    });
                }
                let letter = sets[s].member(index);
                product = Some(match product {
                    Some(acc) => acc.matmul(letter)?,
                    None => letter.clone(),
                });
            }
        }
        out.push(product.expect("picks are non-empty"));
    }
    Ok(out)
}

/// The family of `count` single-step shifts on dimension `n`: member `j`
/// maps basis vector `j` to basis vector `j+1` and kills the rest.
///
/// Every product of length `n` or more vanishes, so all finite products
/// are nilpotent, yet the descending chain of length `count` survives and
/// keeps every norm-based level bound at 1 up to depth `count`. The
/// certified bracket at depth `count` is therefore exactly `[0, 1]`.
pub fn truncated_shift_family(n: usize, count: usize) -> Result<OperatorSet> {
    if n < 2 {
        return Err(Error::BadConfig {
            message: format!("shift family needs dimension at least 2, got {n}"),
        });
    }
    if count == 0 || count > n - 1 {
        return Err(Error::BadConfig {
            message: format!("shift count must be between 1 and {}, got {count}", n - 1),
        });
    }
    let mut members = Vec::with_capacity(count);
    for j in 0..count {
        let mut entries = vec![0.0; n * n];
        entries[(j + 1) * n + j] = 1.0;
        members.push(NonNegMatrix::new(n, n, entries)?);
    }
    OperatorSet::with_label(members, format!("shift-{n}-{count}"))
}

/// A named non-negative kernel on the unit square.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl KernelSpec {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        KernelSpec {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    pub const BUILTIN_NAMES: [&'static str; 4] = ["constant", "gauss", "hilbert", "product"];

    pub fn builtin(name: &str) -> Result<KernelSpec> {
        match name {
            "constant" => Ok(KernelSpec::new("constant", |_, _| 1.0)),
            "gauss" => Ok(KernelSpec::new("gauss", |x: f64, y: f64| {
                (-(x - y) * (x - y)).exp()
            })),
            "hilbert" => Ok(KernelSpec::new("hilbert", |x, y| 1.0 / (x + y + 1.0))),
            "product" => Ok(KernelSpec::new("product", |x, y| x * y)),
            other => Err(Error::BadConfig {
                message: format!(
                    "unknown kernel '{other}', expected one of: {}",
                    KernelSpec::BUILTIN_NAMES.join(", ")
                ),
            }),
        }
    }
}

impl std::fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelSpec").field("name", &self.name).finish()
    }
}

/// Midpoint discretization of a kernel on an `n`-cell uniform grid:
/// `M[i][j] = kernel((i + 1/2)/n, (j + 1/2)/n) / n`. Row sums are then
/// Riemann sums of the kernel, and the radius of `M` approximates the
/// radius of the integral operator as `n` grows.
pub fn kernel_discretize(kernel: &KernelSpec, n: usize) -> Result<NonNegMatrix> {
    if n == 0 {
        return Err(Error::BadConfig {
            message: "discretization needs at least one cell".to_string(),
        });
    }
    let h = 1.0 / n as f64;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = (j as f64 + 0.5) * h;
            let value = kernel.eval(x, y);
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::KernelSample { x, y, value });
            }
            entries.push(value * h);
        }
    }
    NonNegMatrix::new(n, n, entries)
}
