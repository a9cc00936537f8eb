//! Finite-depth certified bounds for the spectral radii of matrix sets.
//!
//! `gsr_lower` maximizes `rho(W)^(1/l)` over all products `W` of length
//! `l <= depth`; every such value is a lower bound for the generalized
//! spectral radius, so the running maximum is certified and monotone in
//! depth by construction. `jsr_upper` minimizes the level bounds
//! `(max norm over length-l products)^(1/l)`, each of which bounds the
//! joint spectral radius from above by submultiplicativity.
//!
//! The sweep enumerates the full word tree (no pruning) with incremental
//! prefix products. Members are prescaled by an exact power of two so
//! products cannot overflow, and decaying prefixes are renormalized by
//! further powers of two tracked in an exact integer exponent, so deep
//! sweeps cannot silently underflow either. Power-of-two scaling commutes
//! with rounding, so the reported values are unchanged by it.

use crate::error::{Error, Result};
use crate::matrix::{mat_mul_raw, row_sum_norm, Norm};
use crate::perron;
use crate::sets::{OperatorSet, ProductWord};

/// Default cap on the number of evaluated words per sweep.
pub const DEFAULT_WORD_BUDGET: u64 = 1_000_000;

/// Relative slack applied to inexactly computed word values so that lower
/// values stay certified lower bounds and upper values stay certified
/// upper bounds across `powf`/`exp2` rounding. Exact paths (length-1
/// words, products with norm exactly 1 and no renormalization) skip it.
const VALUE_MARGIN: f64 = 1e-13;

/// Renormalization quantum; prefixes whose largest entry drops below
/// `2^-512` are scaled up by `2^512` (exactly) to stay in range.
const RENORM_EXP: i64 = 512;

/// Certified bracket on the spectral radii of a matrix set.
///
/// `lower <= gsr(set) <= jsr(set) <= upper`, with `depth_lower` the length
/// of the maximizing product and `depth_upper` the level whose norm bound
/// is smallest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    pub lower: f64,
    pub upper: f64,
    pub depth_lower: usize,
    pub depth_upper: usize,
    pub norm: Norm,
    pub argmax_word: ProductWord,
}

/// Number of words a depth-`depth` sweep over a set of `size` members
/// evaluates: `size + size^2 + ... + size^depth`. `None` on overflow.
pub fn sweep_word_count(size: usize, depth: usize) -> Option<u128> {
    let mut total: u128 = 0;
    let mut power: u128 = 1;
    for _ in 0..depth {
        power = power.checked_mul(size as u128)?;
        total = total.checked_add(power)?;
    }
    Some(total)
}

/// Best certified lower bound on the generalized spectral radius from
/// products of length at most `depth`, together with the first word (in
/// lexicographic order, prefixes first) attaining it.
pub fn gsr_lower(sigma: &OperatorSet, depth: usize, budget: u64) -> Result<(f64, ProductWord)> {
    let r = sweep(sigma, depth, Norm::RowSum, budget, true, false)?;
    Ok((r.lower, ProductWord::homogeneous(r.argmax)))
}

/// Best norm-based upper bound on the joint spectral radius over levels
/// `1..=depth`. Non-increasing in `depth` by construction.
pub fn jsr_upper(sigma: &OperatorSet, depth: usize, norm: Norm, budget: u64) -> Result<f64> {
    Ok(sweep(sigma, depth, norm, budget, false, true)?.upper)
}

/// Two-sided certified bracket; one sweep computes both ends.
pub fn estimate(
    sigma: &OperatorSet,
    depth: usize,
    norm: Norm,
    budget: u64,
) -> Result<SpectralEstimate> {
    let r = sweep(sigma, depth, norm, budget, true, true)?;
    debug_assert!(r.lower <= r.upper);
    Ok(SpectralEstimate {
        lower: r.lower,
        upper: r.upper,
        depth_lower: r.depth_lower,
        depth_upper: r.depth_upper,
        norm,
        argmax_word: ProductWord::homogeneous(r.argmax),
    })
}

/// Scales every member by `factor > 0`. Both spectral radii are
/// positively homogeneous, so estimates of the rescaled set are the
/// originals times `factor`.
pub fn rescale(sigma: &OperatorSet, factor: f64) -> Result<OperatorSet> {
    let members = sigma
        .members()
        .iter()
        .map(|m| m.scale(factor))
        .collect::<Result<Vec<_>>>()?;
    match sigma.label() {
        Some(label) => OperatorSet::with_label(members, label),
        None => OperatorSet::new(members),
    }
}

struct SweepResult {
    lower: f64,
    argmax: Vec<usize>,
    depth_lower: usize,
    upper: f64,
    depth_upper: usize,
}

#[derive(Clone, Copy)]
enum Dir {
    Down,
    Up,
}

/// Value of a word of length `l` whose stored (prescaled, renormalized)
/// product has norm or radius `x`: `x^(1/l) * 2^(e - kappa/l)`. The
/// exponent correction is split into an exact integer part and a proper
/// fraction so rounding stays at the few-ulp level even for large `kappa`.
fn word_value(x: f64, l: usize, kappa: i64, e: i64, dir: Dir) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let (root, mut inexact) = if l == 1 {
        (x, false)
    } else if x == 1.0 {
        (1.0, false)
    } else {
        (x.powf(1.0 / l as f64), true)
    };
    let li = l as i64;
    let q = kappa.div_euclid(li);
    let r = kappa.rem_euclid(li);
    let mut val = root * ((e - q) as f64).exp2();
    if r != 0 {
        val *= (-(r as f64) / l as f64).exp2();
        inexact = true;
    }
    if inexact {
        val *= match dir {
            Dir::Down => 1.0 - VALUE_MARGIN,
            Dir::Up => 1.0 + VALUE_MARGIN,
        };
    }
    if matches!(dir, Dir::Up) && val == 0.0 {
        // the true value underflowed; the smallest normal keeps the
        // bound valid without giving up certification
        val = f64::MIN_POSITIVE;
    }
    val
}

fn renormalize(buf: &mut [f64], kappa: &mut i64, threshold: f64, scale_up: f64) {
    loop {
        let mx = buf.iter().fold(0.0f64, |a, &v| a.max(v));
        if !(mx > 0.0 && mx < threshold) {
            return;
        }
        for v in buf.iter_mut() {
            *v *= scale_up;
        }
        *kappa += RENORM_EXP;
    }
}

fn gram_into(a: &[f64], n: usize, out: &mut [f64]) {
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[k * n + i] * a[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
}

fn stored_norm(stored: &[f64], n: usize, norm: Norm, gram: &mut [f64]) -> Result<f64> {
    match norm {
        Norm::RowSum => Ok(row_sum_norm(stored, n, n)),
        Norm::ColSum => {
            let mut best = 0.0f64;
            for j in 0..n {
                let mut sum = 0.0;
                for i in 0..n {
                    sum += stored[i * n + j];
                }
                best = best.max(sum);
            }
            Ok(best)
        }
        Norm::Spectral => {
            gram_into(stored, n, gram);
            let enc = perron::enclosure_raw(gram, n, perron::TIGHT_RTOL)?;
            Ok(enc.upper.sqrt())
        }
    }
}

fn sweep(
    sigma: &OperatorSet,
    depth: usize,
    norm: Norm,
    budget: u64,
    want_lower: bool,
    want_upper: bool,
) -> Result<SweepResult> {
    if depth == 0 {
        return Err(Error::BadConfig {
            message: "sweep depth must be at least 1".to_string(),
        });
    }
    let required = sweep_word_count(sigma.len(), depth).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }

    let n = sigma.dim();
    let size = sigma.len();

    let mut max_rowsum = 0.0f64;
    for m in sigma.members() {
        max_rowsum = max_rowsum.max(row_sum_norm(m.entries(), n, n));
    }
    let scale_exp: i64 = if max_rowsum == 0.0 {
        0
    } else if max_rowsum.is_finite() {
        max_rowsum.log2().ceil() as i64
    } else {
        // row sums overflowed; bound them through the largest entry
        let mut max_entry = 0.0f64;
        for m in sigma.members() {
            max_entry = max_entry.max(m.max_entry());
        }
        (max_entry.log2().ceil() + (n as f64).log2().ceil()) as i64 + 1
    };
    let member_scale = (-(scale_exp as f64)).exp2();
    let members: Vec<Vec<f64>> = sigma
        .members()
        .iter()
        .map(|m| m.entries().iter().map(|&v| v * member_scale).collect())
        .collect();

    let threshold = (-(RENORM_EXP as f64)).exp2();
    let scale_up = (RENORM_EXP as f64).exp2();

    let mut level_buf: Vec<Vec<f64>> = (0..depth).map(|_| vec![0.0f64; n * n]).collect();
    let mut level_kappa: Vec<i64> = vec![0; depth];
    let mut level_best = vec![0.0f64; depth + 1];
    let mut gram = vec![0.0f64; n * n];

    let mut best_lower = -1.0f64;
    let mut argmax: Vec<usize> = vec![0];
    let mut depth_lower = 1usize;

    let mut path: Vec<usize> = Vec::with_capacity(depth);
    let mut letter = 0usize;

    'outer: loop {
        // extend the current prefix with `letter`
        let level = path.len();
        if level == 0 {
            level_buf[0].copy_from_slice(&members[letter]);
            level_kappa[0] = 0;
        } else {
            let (done, rest) = level_buf.split_at_mut(level);
            mat_mul_raw(&done[level - 1], &members[letter], n, n, n, &mut rest[0]);
            level_kappa[level] = level_kappa[level - 1];
        }
        renormalize(&mut level_buf[level], &mut level_kappa[level], threshold, scale_up);
        path.push(letter);

        let l = level + 1;
        let stored = &level_buf[level];
        let kappa = level_kappa[level];

        if want_upper {
            let x = stored_norm(stored, n, norm, &mut gram)?;
            let val = word_value(x, l, kappa, scale_exp, Dir::Up);
            if val > level_best[l] {
                level_best[l] = val;
            }
        }
        if want_lower {
            let rs = row_sum_norm(stored, n, n);
            if rs == 0.0 {
                if best_lower < 0.0 {
                    best_lower = 0.0;
                    argmax = path.clone();
                    depth_lower = l;
                }
            } else {
                // the row-sum norm bounds the radius, so a word whose
                // bound cannot beat the incumbent never needs its radius
                let bound = word_value(rs, l, kappa, scale_exp, Dir::Up);
                if bound > best_lower {
                    let enc = perron::enclosure_raw(stored, n, perron::TIGHT_RTOL)?;
                    let val = word_value(enc.lower, l, kappa, scale_exp, Dir::Down);
                    if val > best_lower {
                        best_lower = val;
                        argmax = path.clone();
                        depth_lower = l;
                    }
                }
            }
        }

        if path.len() < depth {
            letter = 0;
            continue;
        }
        loop {
            match path.pop() {
                None => break 'outer,
                Some(last) if last + 1 < size => {
                    letter = last + 1;
                    continue 'outer;
                }
                Some(_) => {}
            }
        }
    }

    let mut upper = f64::INFINITY;
    let mut depth_upper = 1usize;
    for (l, &val) in level_best.iter().enumerate().skip(1) {
        if val < upper {
            upper = val;
            depth_upper = l;
        }
    }

    Ok(SweepResult {
        lower: best_lower.max(0.0),
        argmax,
        depth_lower,
        upper,
        depth_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::truncated_shift_family;
    use crate::matrix::NonNegMatrix;

    fn mat(dim: usize, entries: &[f64]) -> NonNegMatrix {
        NonNegMatrix::new(dim, dim, entries.to_vec()).unwrap()
    }

    fn singleton(m: NonNegMatrix) -> OperatorSet {
        OperatorSet::new(vec![m]).unwrap()
    }

    #[test]
    fn identity_set_brackets_one_exactly() {
        let est = estimate(&singleton(NonNegMatrix::identity(3)), 4, Norm::RowSum, 1000).unwrap();
        assert_eq!(est.lower, 1.0);
        assert_eq!(est.upper, 1.0);
        assert_eq!(est.depth_lower, 1);
        assert_eq!(est.depth_upper, 1);
        assert_eq!(est.argmax_word.indices, vec![0]);
    }

    #[test]
    fn scaled_identity_is_exact_for_non_power_of_two() {
        let est = estimate(
            &singleton(NonNegMatrix::identity(2).scale(3.0).unwrap()),
            3,
            Norm::RowSum,
            1000,
        )
        .unwrap();
        assert_eq!(est.lower, 3.0);
        assert_eq!(est.upper, 3.0);
    }

    #[test]
    fn up_down_shift_pair_closes_at_depth_two() {
        let up = mat(2, &[0.0, 1.0, 0.0, 0.0]);
        let down = mat(2, &[0.0, 0.0, 1.0, 0.0]);
        let set = OperatorSet::new(vec![up, down]).unwrap();
        let est = estimate(&set, 2, Norm::RowSum, 1000).unwrap();
        assert_eq!(est.lower, 1.0);
        assert_eq!(est.upper, 1.0);
        // lexicographically first maximizer: up then down
        assert_eq!(est.argmax_word.indices, vec![0, 1]);
        assert_eq!(est.depth_lower, 2);
    }

    #[test]
    fn truncated_shifts_keep_the_gap_open_until_their_length_runs_out() {
        let family = truncated_shift_family(4, 3).unwrap();
        let shallow = estimate(&family, 3, Norm::RowSum, 10_000).unwrap();
        assert_eq!(shallow.lower, 0.0);
        assert_eq!(shallow.upper, 1.0);
        // every product of length >= 4 vanishes, so the bound collapses
        let deep = estimate(&family, 4, Norm::RowSum, 10_000).unwrap();
        assert_eq!(deep.lower, 0.0);
        assert_eq!(deep.upper, 0.0);
    }

    #[test]
    fn budget_violation_is_reported_with_the_required_count() {
        let set = OperatorSet::new(vec![mat(1, &[1.0]); 3]).unwrap();
        let err = estimate(&set, 13, Norm::RowSum, 1_000_000).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExceeded {
                required: 2_391_483,
                budget: 1_000_000
            }
        );
        assert_eq!(sweep_word_count(3, 13), Some(2_391_483));
        assert_eq!(sweep_word_count(2, 3), Some(14));
        assert!(sweep_word_count(10, 50).is_none());
    }

    #[test]
    fn depth_zero_is_rejected() {
        let set = singleton(NonNegMatrix::identity(1));
        assert!(matches!(
            estimate(&set, 0, Norm::RowSum, 100),
            Err(Error::BadConfig { .. })
        ));
    }

    #[test]
    fn bounds_are_monotone_in_depth() {
        let a = mat(2, &[0.4, 1.3, 0.2, 0.0]);
        let b = mat(2, &[0.9, 0.0, 0.7, 0.3]);
        let set = OperatorSet::new(vec![a, b]).unwrap();
        let mut prev_lower = 0.0f64;
        let mut prev_upper = f64::INFINITY;
        for depth in 1..=8 {
            let est = estimate(&set, depth, Norm::RowSum, 1_000_000).unwrap();
            assert!(est.lower >= prev_lower);
            assert!(est.upper <= prev_upper);
            assert!(est.lower <= est.upper);
            prev_lower = est.lower;
            prev_upper = est.upper;
        }
    }

    #[test]
    fn power_of_two_rescaling_is_bitwise_exact() {
        let a = mat(2, &[0.3, 1.1, 0.8, 0.05]);
        let b = mat(2, &[0.6, 0.2, 0.0, 0.9]);
        let set = OperatorSet::new(vec![a, b]).unwrap();
        let base = estimate(&set, 4, Norm::RowSum, 10_000).unwrap();
        let doubled = estimate(&rescale(&set, 2.0).unwrap(), 4, Norm::RowSum, 10_000).unwrap();
        assert_eq!(doubled.lower, 2.0 * base.lower);
        assert_eq!(doubled.upper, 2.0 * base.upper);
        assert_eq!(doubled.argmax_word, base.argmax_word);
    }

    #[test]
    fn general_rescaling_is_homogeneous_to_tolerance() {
        let a = mat(3, &[0.3, 1.1, 0.0, 0.8, 0.05, 0.4, 0.0, 0.2, 0.7]);
        let set = singleton(a);
        let base = estimate(&set, 5, Norm::RowSum, 10_000).unwrap();
        for c in [1.7, 0.3, 5.0] {
            let scaled = estimate(&rescale(&set, c).unwrap(), 5, Norm::RowSum, 10_000).unwrap();
            assert!((scaled.lower - c * base.lower).abs() <= 1e-12 * (c * base.lower).max(1.0));
            assert!((scaled.upper - c * base.upper).abs() <= 1e-12 * (c * base.upper).max(1.0));
        }
    }

    #[test]
    fn singleton_lower_matches_radius_at_depth_one() {
        let a = mat(2, &[1.0, 2.0, 3.0, 4.0]);
        let expected = (5.0 + 33.0f64.sqrt()) / 2.0;
        let (lower, word) = gsr_lower(&singleton(a), 1, 10).unwrap();
        assert!((lower - expected).abs() <= 1e-11 * expected);
        assert!(lower <= expected);
        assert_eq!(word.indices, vec![0]);
    }

    #[test]
    fn deep_decay_does_not_underflow_to_a_wrong_zero() {
        // radius 1e-8; a depth-40 product sits near 1e-320 before scaling
        let a = mat(1, &[1e-8]);
        let est = estimate(&singleton(a), 40, Norm::RowSum, 100).unwrap();
        assert!((est.lower - 1e-8).abs() <= 1e-20);
        assert!((est.upper - 1e-8).abs() <= 1e-20);
        assert!(est.lower <= est.upper);
    }
}
