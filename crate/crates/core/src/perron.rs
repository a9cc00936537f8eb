//! Certified spectral radius enclosures for non-negative matrices.
//!
//! The support digraph is split into strongly connected components first,
//! so triangular, nilpotent, and block-structured matrices come out with
//! zero-width enclosures. Each non-trivial component is handled by a
//! diagonally shifted power iteration whose Collatz quotients
//! `min_r (Bx)_r / x_r <= rho(B) <= max_r (Bx)_r / x_r` are valid for any
//! positive vector `x`, giving two-sided bounds at every step.

use crate::error::{Error, Result};

/// Relative tolerance used for internal radius computations that feed
/// other certified quantities (norm bounds, sweep values).
pub(crate) const TIGHT_RTOL: f64 = 1e-13;

const ITERATION_CAP: u64 = 1_000_000;
const STAGNATION_LIMIT: u32 = 256;
const SHIFT_ADAPT_PERIOD: u64 = 32;

/// Certified interval containing a spectral radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub lower: f64,
    pub upper: f64,
}

impl Enclosure {
    pub fn midpoint(self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(self) -> f64 {
        self.upper - self.lower
    }
}

/// Enclosure of the spectral radius of the `n x n` row-major buffer `a`.
/// Entries must be finite and non-negative; `rtol` is the relative width
/// target of the returned interval.
pub(crate) fn enclosure_raw(a: &[f64], n: usize, rtol: f64) -> Result<Enclosure> {
    if !(rtol.is_finite() && rtol > 0.0) {
        return Err(Error::BadTolerance { value: rtol });
    }
    debug_assert_eq!(a.len(), n * n);
    if n == 1 {
        return Ok(Enclosure {
            lower: a[0],
            upper: a[0],
        });
    }
    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    for comp in strongly_connected_components(a, n) {
        if comp.len() == 1 {
            // The radius of a trivial component is its diagonal entry
            // (zero when the vertex has no self-loop), known exactly.
            let v = comp[0];
            let d = a[v * n + v];
            lower = lower.max(d);
            upper = upper.max(d);
        } else {
            let enc = component_enclosure(a, n, &comp, rtol)?;
            lower = lower.max(enc.lower);
            upper = upper.max(enc.upper);
        }
    }
    Ok(Enclosure { lower, upper })
}

/// Kosaraju's algorithm on the support digraph (edge wherever an entry is
/// positive). Iterative, so deep graphs cannot overflow the call stack.
fn strongly_connected_components(a: &[f64], n: usize) -> Vec<Vec<usize>> {
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push((start, 0));
        while let Some(&(v, cursor)) = stack.last() {
            let mut advanced = false;
            let mut j = cursor;
            while j < n {
                let target = j;
                j += 1;
                if a[v * n + target] > 0.0 && !visited[target] {
                    stack.last_mut().unwrap().1 = j;
                    visited[target] = true;
                    stack.push((target, 0));
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &root in order.iter().rev() {
        if comp_of[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        comp_of[root] = id;
        let mut members = vec![root];
        let mut work = vec![root];
        while let Some(v) = work.pop() {
            for j in 0..n {
                if a[j * n + v] > 0.0 && comp_of[j] == usize::MAX {
                    comp_of[j] = id;
                    members.push(j);
                    work.push(j);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

/// Shifted power iteration on one irreducible component (size >= 2).
///
/// Iterating with `B + sigma*I` makes the matrix primitive, so the
/// iteration converges even for periodic components, while the Collatz
/// quotients are computed from `B*x` alone and bound `rho(B)` directly.
/// The shift is re-tightened periodically: a smaller shift both speeds up
/// convergence and lowers the attainable quotient noise floor.
fn component_enclosure(a: &[f64], n: usize, comp: &[usize], rtol: f64) -> Result<Enclosure> {
    let m = comp.len();
    debug_assert!(m >= 2);
    let mut b = vec![0.0f64; m * m];
    for (r, &i) in comp.iter().enumerate() {
        for (c, &j) in comp.iter().enumerate() {
            b[r * m + c] = a[i * n + j];
        }
    }

    let mut sigma = 0.0f64;
    for r in 0..m {
        let sum: f64 = b[r * m..(r + 1) * m].iter().sum();
        sigma = sigma.max(sum);
    }
    if !sigma.is_finite() {
        return Err(Error::NonConvergence {
            lower: 0.0,
            upper: f64::INFINITY,
            iterations: 0,
        });
    }
    debug_assert!(sigma > 0.0, "irreducible components have nonzero rows");

    let mut x = vec![1.0f64; m];
    let mut acc = vec![0.0f64; m];
    let mut lo_best = 0.0f64;
    let mut hi_best = sigma;
    let mut iterations: u64 = 0;
    let mut stagnant: u32 = 0;
    // Quotients cannot tighten past accumulated rounding in B*x; accept
    // a plateau at this width instead of erroring out.
    let noise_floor = 32.0 * m as f64 * f64::EPSILON;

    loop {
        let gap = hi_best - lo_best;
        if gap <= rtol * hi_best {
            break;
        }
        if iterations >= ITERATION_CAP || stagnant >= STAGNATION_LIMIT {
            if gap <= noise_floor * hi_best {
                break;
            }
            return Err(Error::NonConvergence {
                lower: lo_best.min(hi_best),
                upper: hi_best,
                iterations,
            });
        }
        iterations += 1;

        for r in 0..m {
            let row = &b[r * m..(r + 1) * m];
            let mut s = 0.0;
            for c in 0..m {
                s += row[c] * x[c];
            }
            acc[r] = s;
        }
        let mut qmin = f64::INFINITY;
        let mut qmax = 0.0f64;
        for r in 0..m {
            let q = acc[r] / x[r];
            qmin = qmin.min(q);
            qmax = qmax.max(q);
        }
        let prev_gap = hi_best - lo_best;
        lo_best = lo_best.max(qmin);
        hi_best = hi_best.min(qmax);
        if lo_best > hi_best {
            // Rounding pushed the endpoints past each other; keep the
            // conservative lower end.
            lo_best = hi_best;
        }
        if hi_best - lo_best >= prev_gap {
            stagnant += 1;
        } else {
            stagnant = 0;
        }

        // Step with the shifted matrix and renormalize to unit geometric
        // mean, which keeps entries centered without preferring a row.
        let mut logsum = 0.0f64;
        for r in 0..m {
            let y = acc[r] + sigma * x[r];
            x[r] = y;
            logsum += y.ln();
        }
        let scale = (-(logsum / m as f64)).exp();
        if scale.is_finite() && scale > 0.0 {
            for v in x.iter_mut() {
                *v *= scale;
            }
        }

        if iterations % SHIFT_ADAPT_PERIOD == 0 && hi_best < 0.5 * sigma {
            sigma = hi_best;
        }
    }

    Ok(Enclosure {
        lower: lo_best.min(hi_best),
        upper: hi_best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_cycle_is_exact() {
        // 0 -> 1 -> 2 -> 0; periodic but the uniform vector is exact
        let a = vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let enc = enclosure_raw(&a, 3, 1e-9).unwrap();
        assert_eq!(enc.lower, 1.0);
        assert_eq!(enc.upper, 1.0);
    }

    #[test]
    fn reducible_blocks_take_the_max() {
        // blocks: a 2-cycle scaled by 2 and a self-loop of 3
        let a = vec![
            0.0, 2.0, 0.0, //
            2.0, 0.0, 0.0, //
            1.0, 1.0, 3.0,
        ];
        let enc = enclosure_raw(&a, 3, 1e-12).unwrap();
        assert!(enc.lower <= 3.0 && 3.0 <= enc.upper);
        assert!(enc.width() <= 1e-12 * 3.0);
    }

    #[test]
    fn strictly_triangular_is_exactly_zero() {
        let a = vec![0.0, 7.0, 9.0, 0.0, 0.0, 8.0, 0.0, 0.0, 0.0];
        let enc = enclosure_raw(&a, 3, 1e-9).unwrap();
        assert_eq!(enc.lower, 0.0);
        assert_eq!(enc.upper, 0.0);
    }

    #[test]
    fn components_are_found_on_both_orientations() {
        // 0 <-> 1 strongly connected, 2 reachable only one way
        let a = vec![0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let comps = strongly_connected_components(&a, 3);
        let mut sizes: Vec<usize> = comps.iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2]);
    }

    #[test]
    fn overflowing_row_sums_report_non_convergence() {
        let big = 1e308;
        let a = vec![big, big, big, big];
        let err = enclosure_raw(&a, 2, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn tight_tolerance_converges_on_a_dense_matrix() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let enc = enclosure_raw(&a, 2, TIGHT_RTOL).unwrap();
        let expected = (5.0 + 33.0f64.sqrt()) / 2.0;
        assert!(enc.lower <= expected && expected <= enc.upper);
        assert!(enc.width() <= 1e-12 * expected);
    }
}
