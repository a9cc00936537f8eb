//! Randomized verification of the product and mean inequalities.
//!
//! Every check compares a left-hand quantity against a right-hand bound and
//! records both, plus the normalized slack `(rhs - lhs) / max(1, |rhs|)`.
//! A check passes iff `lhs <= rhs + rtol * max(1, |rhs|)`.  Failing reports
//! carry a JSON witness that replays to bitwise-identical lhs/rhs values.
//!
//! Internal spectral radii are computed at a tolerance (1e-13) well below
//! any pass tolerance callers use, so enclosure width never masks a genuine
//! violation of comparable size.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constructions::{block_cyclic, block_cyclic_kth_power_blocks, cyclic_word_products};
use crate::error::{Error, Result};
use crate::estimators::{gsr_lower, jsr_upper, sweep_word_count};
use crate::io::{WitnessFile, WitnessSet, FORMAT_VERSION};
use crate::matrix::{weighted_hadamard_mean, NonNegMatrix, Norm};
use crate::sets::{set_hadamard_mean, set_power, set_product, split_combination, OperatorSet};
use crate::weights::{WeightMode, WeightVector};

/// Tolerance for spectral radii computed inside checks.
const CHECK_RTOL: f64 = 1e-13;

/// Cap on the number of words enumerated by the per-word check.
const PER_WORD_CAP: u64 = 8000;

/// Instances whose full word sweep would exceed this count are redrawn
/// with smaller set sizes.
const SOFT_WORD_CAP: u128 = 1_000_000;

const MAX_SIZE_REDRAWS: usize = 1000;

/// Random index tensors sampled per decomposition check.
pub const DECOMP_SAMPLES: usize = 60;

/// The check families the verifier knows how to draw and run.  The string
/// tokens are the stable command-line identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckFamily {
    /// Entrywise, norm, and spectral bounds for products of mean matrices.
    MixedProducts,
    /// Norm and spectral bounds for a single weighted mean.
    GeometricMeans,
    /// Per-word and bracket bounds for means of operator sets.
    SetMeans,
    /// Cyclic decomposition bounds for equal-weight set means.
    MeanDecomposition,
    /// The two-set case of the cyclic decomposition.
    PairDecomposition,
    /// Block-cyclic embedding spectral identity.
    BlockCyclic,
}

impl CheckFamily {
    pub const ALL: [CheckFamily; 6] = [
        CheckFamily::MixedProducts,
        CheckFamily::GeometricMeans,
        CheckFamily::SetMeans,
        CheckFamily::MeanDecomposition,
        CheckFamily::PairDecomposition,
        CheckFamily::BlockCyclic,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CheckFamily::MixedProducts => "thm2.1",
            CheckFamily::GeometricMeans => "thm2.2",
            CheckFamily::SetMeans => "thm3.2",
            CheckFamily::MeanDecomposition => "thm3.3",
            CheckFamily::PairDecomposition => "cor3.4",
            CheckFamily::BlockCyclic => "block-cyclic",
        }
    }

    fn lane(self) -> u64 {
        match self {
            CheckFamily::MixedProducts => 1,
            CheckFamily::GeometricMeans => 2,
            CheckFamily::SetMeans => 3,
            CheckFamily::MeanDecomposition => 4,
            CheckFamily::PairDecomposition => 5,
            CheckFamily::BlockCyclic => 6,
        }
    }
}

impl fmt::Display for CheckFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CheckFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm2.1" => Ok(CheckFamily::MixedProducts),
            "thm2.2" => Ok(CheckFamily::GeometricMeans),
            "thm3.2" => Ok(CheckFamily::SetMeans),
            "thm3.3" => Ok(CheckFamily::MeanDecomposition),
            "cor3.4" => Ok(CheckFamily::PairDecomposition),
            "block-cyclic" => Ok(CheckFamily::BlockCyclic),
            other => Err(Error::BadConfig {
                message: format!(
                    "unknown check family '{other}', expected one of \
                     thm2.1, thm2.2, thm3.2, thm3.3, cor3.4, block-cyclic"
                ),
            }),
        }
    }
}

/// Parameters controlling random instance generation.  Ranges are
/// inclusive on both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceConfig {
    pub dim_range: (usize, usize),
    pub set_size_range: (usize, usize),
    pub k_range: (usize, usize),
    pub m_range: (usize, usize),
    /// Probability that an entry is nonzero.
    pub density: f64,
    /// Nonzero entries are uniform in `(0, entry_scale]`.
    pub entry_scale: f64,
    pub weight_mode: WeightMode,
    pub seed: u64,
    pub trials: u64,
    pub depth: usize,
    pub rtol: f64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig {
            dim_range: (1, 5),
            set_size_range: (1, 3),
            k_range: (1, 3),
            m_range: (1, 3),
            density: 0.6,
            entry_scale: 1.0,
            weight_mode: WeightMode::ExactOne,
            seed: 0,
            trials: 100,
            depth: 4,
            rtol: 1e-9,
        }
    }
}

impl InstanceConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("dim_range", self.dim_range),
            ("set_size_range", self.set_size_range),
            ("k_range", self.k_range),
            ("m_range", self.m_range),
        ];
        for (name, (lo, hi)) in ranges {
            if lo < 1 || lo > hi {
                return Err(Error::BadConfig {
                    message: format!("{name} ({lo}, {hi}) must satisfy 1 <= lo <= hi"),
                });
            }
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::BadConfig {
                message: format!("density {} must lie in (0, 1]", self.density),
            });
        }
        if !(self.entry_scale > 0.0 && self.entry_scale.is_finite()) {
            return Err(Error::BadConfig {
                message: format!("entry_scale {} must be positive and finite", self.entry_scale),
            });
        }
        if self.trials == 0 {
            return Err(Error::BadConfig {
                message: "trials must be at least 1".to_string(),
            });
        }
        if self.depth == 0 {
            return Err(Error::BadConfig {
                message: "depth must be at least 1".to_string(),
            });
        }
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(Error::BadConfig {
                message: format!("rtol {} must be positive and finite", self.rtol),
            });
        }
        Ok(())
    }
}

/// Outcome of a single check on a single instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check_id: String,
    pub digest: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs - lhs) / max(1, |rhs|)`; negative means the bound was violated.
    pub slack: f64,
    pub passed: bool,
    /// JSON witness, attached when the check fails.
    pub witness: Option<String>,
}

impl CheckReport {
    fn build(check_id: &str, digest: String, lhs: f64, rhs: f64, rtol: f64) -> CheckReport {
        let scale = rhs.abs().max(1.0);
        CheckReport {
            check_id: check_id.to_string(),
            digest,
            lhs,
            rhs,
            slack: (rhs - lhs) / scale,
            passed: lhs <= rhs + rtol * scale,
            witness: None,
        }
    }
}

/// A fully drawn instance: the matrices are stored, so replaying does not
/// depend on the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub family: CheckFamily,
    pub seed: u64,
    pub trial: u64,
    pub dim: usize,
    pub k: usize,
    pub m: usize,
    pub depth: usize,
    pub rtol: f64,
    pub weights: WeightVector,
    pub sets: Vec<OperatorSet>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for (config seed, lane, trial).  Lanes keep the families and
/// the decomposition sampler statistically independent.
fn sub_seed(seed: u64, lane: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(seed ^ lane.wrapping_mul(0xA24B_AED4_963E_E407)).wrapping_add(trial))
}

fn draw_range(rng: &mut ChaCha8Rng, range: (usize, usize)) -> usize {
    rng.random_range(range.0..=range.1)
}

fn draw_matrix(rng: &mut ChaCha8Rng, dim: usize, density: f64, scale: f64) -> NonNegMatrix {
    let mut entries = vec![0.0; dim * dim];
    for e in entries.iter_mut() {
        if rng.random_bool(density) {
            // 1 - u keeps the value strictly positive.
            *e = (1.0 - rng.random::<f64>()) * scale;
        }
    }
    NonNegMatrix::new(dim, dim, entries).expect("drawn entries are finite and non-negative")
}

fn draw_weights(rng: &mut ChaCha8Rng, m: usize, mode: WeightMode) -> WeightVector {
    let raw: Vec<f64> = (0..m)
        .map(|_| (2.0 * rng.random::<f64>() - 1.0).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
    if mode == WeightMode::AtLeastOne {
        let stretch = 1.0 + 0.5 * rng.random::<f64>();
        for w in weights.iter_mut() {
            *w *= stretch;
        }
    }
    WeightVector::new(weights, mode).expect("normalized weights satisfy the mode")
}

fn draw_set(rng: &mut ChaCha8Rng, size: usize, dim: usize, cfg: &InstanceConfig) -> OperatorSet {
    let members: Vec<NonNegMatrix> = (0..size)
        .map(|_| draw_matrix(rng, dim, cfg.density, cfg.entry_scale))
        .collect();
    OperatorSet::new(members).expect("drawn sets are non-empty and square")
}

/// Draws set sizes whose full sweep at `depth` stays enumerable, retrying
/// with fresh sizes when the product blows past the cap.
fn draw_capped_sizes(
    rng: &mut ChaCha8Rng,
    m: usize,
    depth: usize,
    cfg: &InstanceConfig,
) -> Result<Vec<usize>> {
    for _ in 0..MAX_SIZE_REDRAWS {
        let sizes: Vec<usize> = (0..m)
            .map(|_| draw_range(rng, cfg.set_size_range))
            .collect();
        let product: u128 = sizes.iter().map(|&s| s as u128).product();
        if product <= usize::MAX as u128 {
            if let Some(count) = sweep_word_count(product as usize, depth) {
                if count <= SOFT_WORD_CAP {
                    return Ok(sizes);
                }
            }
        }
    }
    Err(Error::BadConfig {
        message: format!(
            "set_size_range {:?} with m={m} and depth={depth} cannot stay \
             within the {SOFT_WORD_CAP}-word sweep cap",
            cfg.set_size_range
        ),
    })
}

/// Draws the instance for (family, trial) under `cfg`.  The same arguments
/// always produce bitwise-identical matrices and weights.
pub fn random_instance(
    cfg: &InstanceConfig,
    family: CheckFamily,
    trial: u64,
) -> Result<RandomInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, family.lane(), trial));
    let dim = draw_range(&mut rng, cfg.dim_range);

    let (k, m, weights, sets) = match family {
        CheckFamily::MixedProducts => {
            let k = draw_range(&mut rng, cfg.k_range);
            let m = draw_range(&mut rng, cfg.m_range);
            let weights = draw_weights(&mut rng, m, cfg.weight_mode);
            // Set j holds the j-th factor column: k matrices multiplied
            // top to bottom.
            let sets: Vec<OperatorSet> =
                (0..m).map(|_| draw_set(&mut rng, k, dim, cfg)).collect();
            (k, m, weights, sets)
        }
        CheckFamily::GeometricMeans => {
            let m = draw_range(&mut rng, cfg.m_range);
            let weights = draw_weights(&mut rng, m, cfg.weight_mode);
            let sets: Vec<OperatorSet> =
                (0..m).map(|_| draw_set(&mut rng, 1, dim, cfg)).collect();
            (1, m, weights, sets)
        }
        CheckFamily::SetMeans => {
            let m = draw_range(&mut rng, cfg.m_range);
            let sizes = draw_capped_sizes(&mut rng, m, cfg.depth, cfg)?;
            let weights = draw_weights(&mut rng, m, cfg.weight_mode);
            let sets: Vec<OperatorSet> = sizes
                .iter()
                .map(|&s| draw_set(&mut rng, s, dim, cfg))
                .collect();
            (1, m, weights, sets)
        }
        CheckFamily::MeanDecomposition | CheckFamily::PairDecomposition => {
            let m = if family == CheckFamily::PairDecomposition {
                2
            } else {
                draw_range(&mut rng, cfg.m_range)
            };
            let sizes = draw_capped_sizes(&mut rng, m, cfg.depth, cfg)?;
            // The decomposition statement fixes uniform weights.
            let weights = WeightVector::equal(m);
            let sets: Vec<OperatorSet> = sizes
                .iter()
                .map(|&s| draw_set(&mut rng, s, dim, cfg))
                .collect();
            (1, m, weights, sets)
        }
        CheckFamily::BlockCyclic => {
            let k = draw_range(&mut rng, cfg.k_range);
            let sets = vec![draw_set(&mut rng, k, dim, cfg)];
            (k, 1, WeightVector::equal(1), sets)
        }
    };

    Ok(RandomInstance {
        family,
        seed: cfg.seed,
        trial,
        dim,
        k,
        m,
        depth: cfg.depth,
        rtol: cfg.rtol,
        weights,
        sets,
    })
}

fn instance_digest(inst: &RandomInstance) -> String {
    let sizes: Vec<usize> = inst.sets.iter().map(|s| s.len()).collect();
    format!(
        "family={};seed={};trial={};dim={};k={};m={};sizes={:?};depth={};weights={:?};mode={}",
        inst.family,
        inst.seed,
        inst.trial,
        inst.dim,
        inst.k,
        inst.m,
        sizes,
        inst.depth,
        inst.weights.weights(),
        inst.weights.mode()
    )
}

fn with_detail(prefix: &str, detail: &str) -> String {
    if detail.is_empty() {
        prefix.to_string()
    } else {
        format!("{prefix};{detail}")
    }
}

fn validate_rtol(rtol: f64) -> Result<()> {
    if !(rtol >= 0.0 && rtol.is_finite()) {
        return Err(Error::BadTolerance { value: rtol });
    }
    Ok(())
}

/// Weighted geometric product of `values`, factors in weight order.
fn geometric_product(values: &[f64], weights: &WeightVector) -> f64 {
    values
        .iter()
        .zip(weights.weights())
        .fold(1.0, |acc, (&v, &a)| acc * v.powf(a))
}

fn mth_root(value: f64, m: usize) -> f64 {
    if m == 1 {
        value
    } else {
        value.powf(1.0 / m as f64)
    }
}

/// Largest normalized excess of `a` over `b`; non-positive means
/// `a <= b` entrywise.
fn entrywise_excess(a: &NonNegMatrix, b: &NonNegMatrix) -> f64 {
    let mut excess = f64::NEG_INFINITY;
    for (x, y) in a.entries().iter().zip(b.entries()) {
        excess = excess.max((x - y) / y.abs().max(1.0));
    }
    excess
}

fn left_product(mats: &[&NonNegMatrix]) -> Result<NonNegMatrix> {
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = acc.matmul(m)?;
    }
    Ok(acc)
}

/// Checks that products of row means stay below the mean of column
/// products: entrywise, in each operator norm, and spectrally.
///
/// `columns[j]` holds the j-th factor column, k matrices multiplied top to
/// bottom; the weight vector spans the m columns.
pub fn check_mixed_product_inequalities(
    columns: &[OperatorSet],
    weights: &WeightVector,
    rtol: f64,
) -> Result<Vec<CheckReport>> {
    validate_rtol(rtol)?;
    if columns.is_empty() {
        return Err(Error::EmptySet);
    }
    if columns.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            found: columns.len(),
        });
    }
    let m = columns.len();
    let k = columns[0].len();
    let dim = columns[0].dim();
    for c in columns {
        if c.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                found: c.len(),
            });
        }
        if c.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: c.dim(),
            });
        }
    }

    // lhs matrix: product over rows of the weighted mean of each row.
    let mut row_means = Vec::with_capacity(k);
    for i in 0..k {
        let row: Vec<NonNegMatrix> = columns.iter().map(|c| c.member(i).clone()).collect();
        row_means.push(weighted_hadamard_mean(&row, weights)?);
    }
    let lhs_mat = left_product(&row_means.iter().collect::<Vec<_>>())?;

    // rhs matrix: weighted mean of the column products.
    let mut col_products = Vec::with_capacity(m);
    for c in columns {
        col_products.push(left_product(&c.members().iter().collect::<Vec<_>>())?);
    }
    let rhs_mat = weighted_hadamard_mean(&col_products, weights)?;

    let detail = format!("k={k};m={m};dim={dim}");
    let mut reports = Vec::with_capacity(5);

    reports.push(CheckReport::build(
        "thm2.1/entrywise",
        detail.clone(),
        entrywise_excess(&lhs_mat, &rhs_mat),
        0.0,
        rtol,
    ));

    for norm in Norm::ALL {
        let lhs = lhs_mat.operator_norm(norm)?;
        let mut norms = Vec::with_capacity(m);
        for p in &col_products {
            norms.push(p.operator_norm(norm)?);
        }
        reports.push(CheckReport::build(
            &format!("thm2.1/norm/{norm}"),
            detail.clone(),
            lhs,
            geometric_product(&norms, weights),
            rtol,
        ));
    }

    let lhs = lhs_mat.spectral_radius(CHECK_RTOL)?;
    let mut radii = Vec::with_capacity(m);
    for p in &col_products {
        radii.push(p.spectral_radius(CHECK_RTOL)?);
    }
    reports.push(CheckReport::build(
        "thm2.1/spectral",
        detail,
        lhs,
        geometric_product(&radii, weights),
        rtol,
    ));
    Ok(reports)
}

/// Checks that a single weighted mean stays below the weighted geometric
/// product of norms (each norm) and of spectral radii.
pub fn check_geometric_mean_inequalities(
    mats: &[NonNegMatrix],
    weights: &WeightVector,
    rtol: f64,
) -> Result<Vec<CheckReport>> {
    validate_rtol(rtol)?;
    if mats.is_empty() {
        return Err(Error::EmptySet);
    }
    if mats.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            found: mats.len(),
        });
    }
    let mean = weighted_hadamard_mean(mats, weights)?;
    let detail = format!("m={};dim={}", mats.len(), mean.rows());
    let mut reports = Vec::with_capacity(4);

    for norm in Norm::ALL {
        let lhs = mean.operator_norm(norm)?;
        let mut norms = Vec::with_capacity(mats.len());
        for m in mats {
            norms.push(m.operator_norm(norm)?);
        }
        reports.push(CheckReport::build(
            &format!("thm2.2/norm/{norm}"),
            detail.clone(),
            lhs,
            geometric_product(&norms, weights),
            rtol,
        ));
    }

    let lhs = mean.spectral_radius(CHECK_RTOL)?;
    let mut radii = Vec::with_capacity(mats.len());
    for m in mats {
        radii.push(m.spectral_radius(CHECK_RTOL)?);
    }
    reports.push(CheckReport::build(
        "thm2.2/spectral",
        detail,
        lhs,
        geometric_product(&radii, weights),
        rtol,
    ));
    Ok(reports)
}

/// Shared validation for checks over several operator sets.
fn validate_set_family(sets: &[OperatorSet], depth: usize) -> Result<usize> {
    if sets.is_empty() {
        return Err(Error::EmptySet);
    }
    let dim = sets[0].dim();
    for s in sets {
        if s.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
    }
    if depth == 0 {
        return Err(Error::BadConfig {
            message: "depth must be at least 1".to_string(),
        });
    }
    Ok(dim)
}

/// Reports on the sweep-upper-bound monotonicity in depth: the bound at
/// `depth` must not exceed the best bound from any shallower depth.  At
/// depth 1 the bound is compared against itself.
fn upper_monotone_report(
    check_id: &str,
    detail: &str,
    mean: &OperatorSet,
    depth: usize,
    budget: u64,
    rtol: f64,
) -> Result<CheckReport> {
    let final_upper = jsr_upper(mean, depth, Norm::RowSum, budget)?;
    let mut best_shallower = f64::INFINITY;
    for d in 1..depth {
        best_shallower = best_shallower.min(jsr_upper(mean, d, Norm::RowSum, budget)?);
    }
    let rhs = if depth == 1 { final_upper } else { best_shallower };
    Ok(CheckReport::build(
        check_id,
        format!("{detail};depth={depth}"),
        final_upper,
        rhs,
        rtol,
    ))
}

/// Checks the bounds on a weighted Hadamard mean of operator sets: every
/// short word of the mean set against the matching component products,
/// and the estimator bracket against the product of component sweep
/// bounds.
pub fn check_set_mean_inequalities(
    sets: &[OperatorSet],
    weights: &WeightVector,
    depth: usize,
    budget: u64,
    rtol: f64,
) -> Result<Vec<CheckReport>> {
    validate_rtol(rtol)?;
    let dim = validate_set_family(sets, depth)?;
    if sets.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            found: sets.len(),
        });
    }
    let mean = set_hadamard_mean(sets, weights)?;
    let sizes: Vec<usize> = sets.iter().map(|s| s.len()).collect();
    let detail = format!("m={};dim={dim};sizes={sizes:?}", sets.len());
    let mut reports = Vec::with_capacity(4);

    // Deepest sweep whose total word count fits the per-word cap.
    let per_word_budget = PER_WORD_CAP.min(budget);
    let mut per_word_depth = 0;
    for cand in 1..=depth {
        match sweep_word_count(mean.len(), cand) {
            Some(count) if count <= per_word_budget as u128 => per_word_depth = cand,
            _ => break,
        }
    }
    if per_word_depth == 0 {
        return Err(Error::BudgetExceeded {
            required: mean.len() as u128,
            budget: per_word_budget,
        });
    }

    let decomp: Vec<Vec<usize>> = (0..mean.len())
        .map(|c| split_combination(&sizes, c))
        .collect();
    // Track the word with the least slack.
    let mut worst: Option<(f64, f64, f64, Vec<usize>)> = None;
    for level in 1..=per_word_depth {
        for item in set_power(&mean, level, per_word_budget)? {
            let (word, wmat) = item?;
            let lhs = wmat.spectral_radius(CHECK_RTOL)?;
            let mut rhs = 1.0;
            for (t, &alpha) in weights.weights().iter().enumerate() {
                let letters: Vec<&NonNegMatrix> = word
                    .indices
                    .iter()
                    .map(|&c| sets[t].member(decomp[c][t]))
                    .collect();
                rhs *= left_product(&letters)?.spectral_radius(CHECK_RTOL)?.powf(alpha);
            }
            let slack = (rhs - lhs) / rhs.abs().max(1.0);
            if worst.as_ref().map_or(true, |w| slack < w.0) {
                worst = Some((slack, lhs, rhs, word.indices.clone()));
            }
        }
    }
    let (_, wl, wr, ww) = worst.expect("at least one word was enumerated");
    reports.push(CheckReport::build(
        "thm3.2/per-word",
        format!("{detail};max_len={per_word_depth};word={ww:?}"),
        wl,
        wr,
        rtol,
    ));

    // Estimator bracket: both the certified lower and the certified upper
    // value of the mean set sit below the product of component bounds.
    let (mean_lower, _) = gsr_lower(&mean, depth, budget)?;
    let mut component_bounds = Vec::with_capacity(sets.len());
    for s in sets {
        component_bounds.push(jsr_upper(s, depth, Norm::RowSum, budget)?);
    }
    let bracket_rhs = geometric_product(&component_bounds, weights);
    let bracket_detail = format!("{detail};depth={depth}");
    reports.push(CheckReport::build(
        "thm3.2/bracket-gsr",
        bracket_detail.clone(),
        mean_lower,
        bracket_rhs,
        rtol,
    ));
    reports.push(CheckReport::build(
        "thm3.2/bracket-jsr",
        bracket_detail,
        mean_lower,
        bracket_rhs,
        rtol,
    ));

    reports.push(upper_monotone_report(
        "thm3.2/upper-monotone",
        &detail,
        &mean,
        depth,
        budget,
        rtol,
    )?);
    Ok(reports)
}

/// Draws `samples` random index tensors and checks, for each, the cyclic
/// decomposition of a word of the equal-weight mean set: the word's
/// spectral radius against the geometric mean of the cyclic block
/// products, and the word matrix entrywise against their Hadamard mean.
/// Also checks the estimator bracket against the chained product set.
pub fn check_mean_decomposition(
    sets: &[OperatorSet],
    depth: usize,
    samples: usize,
    sample_seed: u64,
    budget: u64,
    rtol: f64,
) -> Result<Vec<CheckReport>> {
    validate_rtol(rtol)?;
    let dim = validate_set_family(sets, depth)?;
    if samples == 0 {
        return Err(Error::BadConfig {
            message: "samples must be at least 1".to_string(),
        });
    }
    let m = sets.len();
    let weights = WeightVector::equal(m);
    let mean = set_hadamard_mean(sets, &weights)?;
    let sizes: Vec<usize> = sets.iter().map(|s| s.len()).collect();
    let detail = format!("m={m};dim={dim};sizes={sizes:?}");
    let mut reports = Vec::with_capacity(4);

    // Bracket: lower estimate of the mean set against the m-th root of the
    // upper estimate of the ordered chain product set.
    let mut chain = sets[0].clone();
    for s in &sets[1..] {
        chain = set_product(&chain, s)?;
    }
    let (mean_lower, _) = gsr_lower(&mean, depth, budget)?;
    let chain_upper = jsr_upper(&chain, depth, Norm::RowSum, budget)?;
    reports.push(CheckReport::build(
        "thm3.3/bracket",
        format!("{detail};depth={depth}"),
        mean_lower,
        mth_root(chain_upper, m),
        rtol,
    ));

    reports.push(upper_monotone_report(
        "thm3.3/upper-monotone",
        &detail,
        &mean,
        depth,
        budget,
        rtol,
    )?);

    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let mut worst_spectral: Option<(f64, f64, f64, usize)> = None;
    let mut worst_entrywise: Option<(f64, usize)> = None;
    for sample in 0..samples {
        let blocks = rng.random_range(1..=2usize);
        let picks: Vec<Vec<Vec<usize>>> = (0..blocks)
            .map(|_| {
                (0..m)
                    .map(|_| (0..m).map(|t| rng.random_range(0..sets[t].len())).collect())
                    .collect()
            })
            .collect();

        // The word: for each block and position, the weighted mean of the
        // picked members, multiplied left to right.
        let mut word_mat: Option<NonNegMatrix> = None;
        for block in &picks {
            for row in block {
                let letters: Vec<NonNegMatrix> = row
                    .iter()
                    .enumerate()
                    .map(|(t, &idx)| sets[t].member(idx).clone())
                    .collect();
                let mean_letter = weighted_hadamard_mean(&letters, &weights)?;
                word_mat = Some(match word_mat {
                    Some(acc) => acc.matmul(&mean_letter)?,
                    None => mean_letter,
                });
            }
        }
        let word_mat = word_mat.expect("blocks >= 1");

        let parts = cyclic_word_products(sets, &picks)?;
        let lhs = word_mat.spectral_radius(CHECK_RTOL)?;
        let mut rhs = 1.0;
        for part in &parts {
            rhs *= mth_root(part.spectral_radius(CHECK_RTOL)?, m);
        }
        let slack = (rhs - lhs) / rhs.abs().max(1.0);
        if worst_spectral.as_ref().map_or(true, |w| slack < w.0) {
            worst_spectral = Some((slack, lhs, rhs, sample));
        }

        let parts_mean = weighted_hadamard_mean(&parts, &weights)?;
        let excess = entrywise_excess(&word_mat, &parts_mean);
        if worst_entrywise.as_ref().map_or(true, |w| excess > w.0) {
            worst_entrywise = Some((excess, sample));
        }
    }

    let (_, sl, sr, ss) = worst_spectral.expect("samples >= 1");
    reports.push(CheckReport::build(
        "thm3.3/split-spectral",
        format!("{detail};samples={samples};sample={ss}"),
        sl,
        sr,
        rtol,
    ));
    let (excess, es) = worst_entrywise.expect("samples >= 1");
    reports.push(CheckReport::build(
        "thm3.3/split-entrywise",
        format!("{detail};samples={samples};sample={es}"),
        excess,
        0.0,
        rtol,
    ));
    Ok(reports)
}

/// Checks the spectral identity of the block-cyclic embedding: the k-th
/// power of the embedding's radius equals the radius of the ordered
/// product.
pub fn check_block_cyclic_identity(mats: &[NonNegMatrix], rtol: f64) -> Result<CheckReport> {
    validate_rtol(rtol)?;
    if mats.is_empty() {
        return Err(Error::EmptySet);
    }
    let k = mats.len();
    let embedding = block_cyclic(mats)?;
    let lifted = embedding.spectral_radius(CHECK_RTOL)?.powi(k as i32);
    let product_radius = left_product(&mats.iter().collect::<Vec<_>>())?.spectral_radius(CHECK_RTOL)?;
    let lhs = (lifted - product_radius).abs() / product_radius.abs().max(1.0);
    Ok(CheckReport::build(
        "block-cyclic/identity",
        format!("k={k};dim={}", mats[0].rows()),
        lhs,
        0.0,
        rtol,
    ))
}

/// Checks that the k-th power of the embedding is block diagonal with the
/// cyclically rotated products on the diagonal.  Both sides evaluate the
/// same multiplications in the same order, so the expected excess is
/// exactly zero.
pub fn check_block_cyclic_blocks(mats: &[NonNegMatrix], rtol: f64) -> Result<CheckReport> {
    validate_rtol(rtol)?;
    if mats.is_empty() {
        return Err(Error::EmptySet);
    }
    let k = mats.len();
    let dim = mats[0].rows();
    let embedding = block_cyclic(mats)?;
    let mut power = embedding.clone();
    for _ in 1..k {
        power = power.matmul(&embedding)?;
    }
    let blocks = block_cyclic_kth_power_blocks(mats)?;
    let mut worst = f64::NEG_INFINITY;
    for (j, block) in blocks.iter().enumerate() {
        for r in 0..dim {
            for c in 0..dim {
                let expected = block.get(r, c);
                let found = power.get(j * dim + r, j * dim + c);
                worst = worst.max((found - expected).abs() / expected.abs().max(1.0));
            }
        }
    }
    Ok(CheckReport::build(
        "block-cyclic/blocks",
        format!("k={k};dim={dim}"),
        worst,
        0.0,
        rtol,
    ))
}

/// Runs every check in the instance's family and stamps each report with
/// the instance digest; failing reports get a replay witness.
pub fn run_checks(inst: &RandomInstance, budget: u64) -> Result<Vec<CheckReport>> {
    let digest = instance_digest(inst);
    let mut reports = match inst.family {
        CheckFamily::MixedProducts => {
            check_mixed_product_inequalities(&inst.sets, &inst.weights, inst.rtol)?
        }
        CheckFamily::GeometricMeans => {
            let mats: Vec<NonNegMatrix> =
                inst.sets.iter().map(|s| s.member(0).clone()).collect();
            check_geometric_mean_inequalities(&mats, &inst.weights, inst.rtol)?
        }
        CheckFamily::SetMeans => check_set_mean_inequalities(
            &inst.sets,
            &inst.weights,
            inst.depth,
            budget,
            inst.rtol,
        )?,
        CheckFamily::MeanDecomposition | CheckFamily::PairDecomposition => {
            let sample_seed = sub_seed(inst.seed, 0x40 + inst.family.lane(), inst.trial);
            let mut reports = check_mean_decomposition(
                &inst.sets,
                inst.depth,
                DECOMP_SAMPLES,
                sample_seed,
                budget,
                inst.rtol,
            )?;
            if inst.family == CheckFamily::PairDecomposition {
                for r in reports.iter_mut() {
                    r.check_id = r.check_id.replacen("thm3.3", "cor3.4", 1);
                }
            }
            reports
        }
        CheckFamily::BlockCyclic => {
            let mats = inst.sets[0].members();
            vec![
                check_block_cyclic_identity(mats, inst.rtol)?,
                check_block_cyclic_blocks(mats, inst.rtol)?,
            ]
        }
    };
    for r in reports.iter_mut() {
        r.digest = with_detail(&digest, &r.digest);
        if !r.passed && r.witness.is_none() {
            r.witness = Some(witness_json(inst)?);
        }
    }
    Ok(reports)
}

/// Per-check-id tallies across a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub check_id: String,
    pub passed: u64,
    pub failed: u64,
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub reports: Vec<CheckReport>,
    pub summaries: Vec<SuiteSummary>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> u64 {
        self.reports.iter().filter(|r| !r.passed).count() as u64
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<28} {:>8} {:>8} {:>14}",
            "check", "passed", "failed", "min slack"
        )?;
        for s in &self.summaries {
            writeln!(
                f,
                "{:<28} {:>8} {:>8} {:>14.6e}",
                s.check_id, s.passed, s.failed, s.min_slack
            )?;
        }
        write!(
            f,
            "total: {} checks, {} failed",
            self.reports.len(),
            self.failures()
        )
    }
}

/// Runs `cfg.trials` instances of each family.  Trials execute in
/// parallel; reports are ordered by (family, trial) regardless of thread
/// count, and same-seed runs reproduce bitwise-identical reports.
pub fn run_suite(
    cfg: &InstanceConfig,
    families: &[CheckFamily],
    budget: u64,
) -> Result<SuiteReport> {
    cfg.validate()?;
    if families.is_empty() {
        return Err(Error::BadConfig {
            message: "no check families selected".to_string(),
        });
    }
    let jobs: Vec<(CheckFamily, u64)> = families
        .iter()
        .flat_map(|&f| (0..cfg.trials).map(move |t| (f, t)))
        .collect();
    let results: Vec<Result<Vec<CheckReport>>> = jobs
        .par_iter()
        .map(|&(family, trial)| {
            let inst = random_instance(cfg, family, trial)?;
            run_checks(&inst, budget)
        })
        .collect();

    let mut reports = Vec::new();
    for r in results {
        reports.extend(r?);
    }

    let mut summaries: Vec<SuiteSummary> = Vec::new();
    for r in &reports {
        let entry = match summaries.iter_mut().find(|s| s.check_id == r.check_id) {
            Some(e) => e,
            None => {
                summaries.push(SuiteSummary {
                    check_id: r.check_id.clone(),
                    passed: 0,
                    failed: 0,
                    min_slack: f64::INFINITY,
                });
                summaries.last_mut().expect("just pushed")
            }
        };
        if r.passed {
            entry.passed += 1;
        } else {
            entry.failed += 1;
        }
        entry.min_slack = entry.min_slack.min(r.slack);
    }
    summaries.sort_by(|a, b| a.check_id.cmp(&b.check_id));

    Ok(SuiteReport { reports, summaries })
}

/// Serializes an instance so a failing check can be rerun elsewhere.
pub fn witness_json(inst: &RandomInstance) -> Result<String> {
    let file = WitnessFile {
        format_version: FORMAT_VERSION,
        family: inst.family.id().to_string(),
        seed: inst.seed,
        trial: inst.trial,
        dim: inst.dim,
        k: inst.k,
        m: inst.m,
        depth: inst.depth,
        rtol: inst.rtol,
        weight_mode: inst.weights.mode().as_str().to_string(),
        weights: inst.weights.weights().to_vec(),
        sets: inst
            .sets
            .iter()
            .map(|s| WitnessSet {
                dim: s.dim(),
                members: s.members().iter().map(|m| m.entries().to_vec()).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Parse {
        path: "<witness>".to_string(),
        message: e.to_string(),
    })
}

/// Rebuilds the instance stored in a witness, verbatim.
pub fn instance_from_witness(json: &str) -> Result<RandomInstance> {
    let file: WitnessFile = serde_json::from_str(json).map_err(|e| Error::Parse {
        path: "<witness>".to_string(),
        message: e.to_string(),
    })?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Parse {
            path: "<witness>".to_string(),
            message: format!(
                "unsupported format_version {}, expected {FORMAT_VERSION}",
                file.format_version
            ),
        });
    }
    let family: CheckFamily = file.family.parse()?;
    let mode: WeightMode = file.weight_mode.parse()?;
    let weights = WeightVector::new(file.weights, mode)?;
    let mut sets = Vec::with_capacity(file.sets.len());
    for s in &file.sets {
        let mut members = Vec::with_capacity(s.members.len());
        for entries in &s.members {
            members.push(NonNegMatrix::new(s.dim, s.dim, entries.clone())?);
        }
        sets.push(OperatorSet::new(members)?);
    }
    Ok(RandomInstance {
        family,
        seed: file.seed,
        trial: file.trial,
        dim: file.dim,
        k: file.k,
        m: file.m,
        depth: file.depth,
        rtol: file.rtol,
        weights,
        sets,
    })
}

/// Reruns every check for a witness; lhs/rhs reproduce bitwise because
/// the matrices are stored verbatim and the checks are deterministic.
pub fn replay_witness(json: &str, budget: u64) -> Result<Vec<CheckReport>> {
    let inst = instance_from_witness(json)?;
    run_checks(&inst, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::DEFAULT_WORD_BUDGET;

    fn small_cfg(seed: u64) -> InstanceConfig {
        InstanceConfig {
            dim_range: (1, 3),
            set_size_range: (1, 2),
            k_range: (1, 2),
            m_range: (1, 2),
            density: 0.7,
            entry_scale: 1.0,
            weight_mode: WeightMode::ExactOne,
            seed,
            trials: 4,
            depth: 3,
            rtol: 1e-9,
        }
    }

    #[test]
    fn family_tokens_round_trip() {
        for family in CheckFamily::ALL {
            let token = family.id();
            assert_eq!(token.parse::<CheckFamily>().unwrap(), family);
        }
        assert!("thm9.9".parse::<CheckFamily>().is_err());
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut cfg = InstanceConfig::default();
        cfg.dim_range = (0, 3);
        assert!(cfg.validate().is_err());
        cfg = InstanceConfig::default();
        cfg.dim_range = (4, 2);
        assert!(cfg.validate().is_err());
        cfg = InstanceConfig::default();
        cfg.density = 0.0;
        assert!(cfg.validate().is_err());
        cfg = InstanceConfig::default();
        cfg.entry_scale = f64::INFINITY;
        assert!(cfg.validate().is_err());
        cfg = InstanceConfig::default();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg = InstanceConfig::default();
        cfg.depth = 0;
        assert!(cfg.validate().is_err());
        cfg = InstanceConfig::default();
        cfg.rtol = -1.0;
        assert!(cfg.validate().is_err());
        assert!(InstanceConfig::default().validate().is_ok());
    }

    #[test]
    fn same_seed_reproduces_the_instance_bitwise() {
        let cfg = small_cfg(11);
        for family in CheckFamily::ALL {
            let a = random_instance(&cfg, family, 2).unwrap();
            let b = random_instance(&cfg, family, 2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn different_trials_draw_different_matrices() {
        let cfg = small_cfg(11);
        let a = random_instance(&cfg, CheckFamily::GeometricMeans, 0).unwrap();
        let b = random_instance(&cfg, CheckFamily::GeometricMeans, 1).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn pair_family_always_draws_two_sets() {
        let mut cfg = small_cfg(5);
        cfg.m_range = (1, 1);
        for trial in 0..6 {
            let inst = random_instance(&cfg, CheckFamily::PairDecomposition, trial).unwrap();
            assert_eq!(inst.sets.len(), 2);
        }
    }

    #[test]
    fn all_families_pass_on_random_instances() {
        let cfg = small_cfg(23);
        let suite = run_suite(&cfg, &CheckFamily::ALL, DEFAULT_WORD_BUDGET).unwrap();
        for r in &suite.reports {
            assert!(
                r.passed,
                "{} failed: lhs={} rhs={} slack={} digest={}",
                r.check_id, r.lhs, r.rhs, r.slack, r.digest
            );
            assert!(r.lhs.is_finite() && r.rhs.is_finite() && r.slack.is_finite());
        }
        assert!(suite.all_passed());
        assert_eq!(suite.failures(), 0);
    }

    #[test]
    fn suite_reruns_reproduce_reports_bitwise() {
        let cfg = small_cfg(31);
        let a = run_suite(&cfg, &CheckFamily::ALL, DEFAULT_WORD_BUDGET).unwrap();
        let b = run_suite(&cfg, &CheckFamily::ALL, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(a.reports, b.reports);
        assert_eq!(a.summaries, b.summaries);
    }

    #[test]
    fn scalar_instances_sit_on_the_equality_case() {
        let mut cfg = small_cfg(47);
        cfg.dim_range = (1, 1);
        cfg.trials = 6;
        let suite = run_suite(&cfg, &CheckFamily::ALL, DEFAULT_WORD_BUDGET).unwrap();
        for r in &suite.reports {
            assert!(r.passed, "{} failed on scalars: {}", r.check_id, r.digest);
            assert!(
                r.slack.abs() <= 1e-12,
                "{}: scalar slack {} exceeds 1e-12 ({})",
                r.check_id,
                r.slack,
                r.digest
            );
        }
    }

    #[test]
    fn singleton_set_mean_matches_the_plain_mean_checks() {
        let cfg = InstanceConfig {
            set_size_range: (1, 1),
            depth: 1,
            ..small_cfg(59)
        };
        for trial in 0..5 {
            let inst = random_instance(&cfg, CheckFamily::SetMeans, trial).unwrap();
            let mats: Vec<NonNegMatrix> =
                inst.sets.iter().map(|s| s.member(0).clone()).collect();
            let set_reports = check_set_mean_inequalities(
                &inst.sets,
                &inst.weights,
                1,
                DEFAULT_WORD_BUDGET,
                inst.rtol,
            )
            .unwrap();
            let mean_reports =
                check_geometric_mean_inequalities(&mats, &inst.weights, inst.rtol).unwrap();
            let per_word = set_reports
                .iter()
                .find(|r| r.check_id == "thm3.2/per-word")
                .unwrap();
            let spectral = mean_reports
                .iter()
                .find(|r| r.check_id == "thm2.2/spectral")
                .unwrap();
            // Singleton sets at depth 1 reduce the set check to the plain
            // mean check on the same matrices.
            assert!((per_word.lhs - spectral.lhs).abs() <= 1e-12 * spectral.lhs.abs().max(1.0));
            assert!((per_word.rhs - spectral.rhs).abs() <= 1e-12 * spectral.rhs.abs().max(1.0));
        }
    }

    #[test]
    fn witness_replay_reproduces_reports_bitwise() {
        let cfg = small_cfg(67);
        for family in CheckFamily::ALL {
            let inst = random_instance(&cfg, family, 1).unwrap();
            let direct = run_checks(&inst, DEFAULT_WORD_BUDGET).unwrap();
            let json = witness_json(&inst).unwrap();
            // The witness must rebuild the instance verbatim, not just
            // close enough for the checks to pass again.
            assert_eq!(instance_from_witness(&json).unwrap(), inst);
            let replayed = replay_witness(&json, DEFAULT_WORD_BUDGET).unwrap();
            assert_eq!(direct.len(), replayed.len());
            for (a, b) in direct.iter().zip(&replayed) {
                assert_eq!(a.check_id, b.check_id);
                assert_eq!(a.lhs.to_bits(), b.lhs.to_bits());
                assert_eq!(a.rhs.to_bits(), b.rhs.to_bits());
                assert_eq!(a.slack.to_bits(), b.slack.to_bits());
                assert_eq!(a.passed, b.passed);
            }
        }
    }

    #[test]
    fn pair_decomposition_reports_use_their_own_ids() {
        let cfg = small_cfg(71);
        let inst = random_instance(&cfg, CheckFamily::PairDecomposition, 0).unwrap();
        let reports = run_checks(&inst, DEFAULT_WORD_BUDGET).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(
                r.check_id.starts_with("cor3.4/"),
                "unexpected id {}",
                r.check_id
            );
        }
    }

    #[test]
    fn pass_predicate_boundary_and_slack_sign() {
        let failing = CheckReport::build("x/y", String::new(), 2.0, 1.0, 1e-9);
        assert!(!failing.passed);
        assert!(failing.slack < 0.0);
        let passing = CheckReport::build("x/y", String::new(), 1.0, 1.0, 1e-9);
        assert!(passing.passed);
        assert_eq!(passing.slack, 0.0);
        // lhs exceeding rhs by exactly rtol*max(1,|rhs|) still passes.
        let edge = CheckReport::build("x/y", String::new(), 1.0 + 1e-9, 1.0, 1e-9);
        assert!(edge.passed);
        let over = CheckReport::build("x/y", String::new(), 1.0 + 2.1e-9, 1.0, 1e-9);
        assert!(!over.passed);
    }

    #[test]
    fn failing_checks_carry_a_replayable_witness() {
        // The inequalities themselves cannot fail, so force failures by
        // running the block-cyclic identity at zero tolerance: any
        // rounding residue in the radius comparison then counts as one.
        let cfg = small_cfg(91);
        let mut found = false;
        for trial in 0..30 {
            let mut inst = random_instance(&cfg, CheckFamily::BlockCyclic, trial).unwrap();
            inst.rtol = 0.0;
            let reports = run_checks(&inst, DEFAULT_WORD_BUDGET).unwrap();
            for r in &reports {
                if r.passed {
                    continue;
                }
                found = true;
                let json = r.witness.as_ref().expect("failing report carries a witness");
                let replayed = replay_witness(json, DEFAULT_WORD_BUDGET).unwrap();
                let same = replayed
                    .iter()
                    .find(|x| x.check_id == r.check_id)
                    .expect("replay covers the failed check");
                assert_eq!(same.lhs.to_bits(), r.lhs.to_bits());
                assert_eq!(same.rhs.to_bits(), r.rhs.to_bits());
                assert!(!same.passed);
            }
            if found {
                break;
            }
        }
        assert!(found, "no rounding residue across 30 block-cyclic trials");
    }

    #[test]
    fn block_cyclic_identity_is_tight_on_a_known_pair() {
        let p = NonNegMatrix::new(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        let q = NonNegMatrix::new(2, 2, vec![1.0, 0.0, 3.0, 1.0]).unwrap();
        let report = check_block_cyclic_identity(&[p, q], 1e-9).unwrap();
        assert!(report.passed, "lhs={} digest={}", report.lhs, report.digest);
        assert!(report.lhs <= 1e-10);
        let blocks = check_block_cyclic_blocks(
            &[
                NonNegMatrix::new(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap(),
                NonNegMatrix::new(2, 2, vec![1.0, 0.0, 3.0, 1.0]).unwrap(),
            ],
            1e-9,
        )
        .unwrap();
        assert_eq!(blocks.lhs, 0.0);
    }

    #[test]
    fn at_least_one_weights_pass_the_mean_checks() {
        let cfg = InstanceConfig {
            weight_mode: WeightMode::AtLeastOne,
            trials: 6,
            ..small_cfg(83)
        };
        let families = [
            CheckFamily::MixedProducts,
            CheckFamily::GeometricMeans,
            CheckFamily::SetMeans,
        ];
        let suite = run_suite(&cfg, &families, DEFAULT_WORD_BUDGET).unwrap();
        for r in &suite.reports {
            assert!(
                r.passed,
                "{} failed with at-least-one weights: slack={} digest={}",
                r.check_id, r.slack, r.digest
            );
        }
        // The drawn weights must actually exceed one to exercise the mode.
        let inst = random_instance(&cfg, CheckFamily::GeometricMeans, 0).unwrap();
        assert!(inst.weights.sum() >= 1.0 - crate::weights::WEIGHT_SUM_TOL);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let a = OperatorSet::new(vec![NonNegMatrix::identity(2)]).unwrap();
        let b = OperatorSet::new(vec![NonNegMatrix::identity(3)]).unwrap();
        let w = WeightVector::equal(2);
        assert!(matches!(
            check_set_mean_inequalities(&[a.clone(), b], &w, 2, 1000, 1e-9),
            Err(Error::DimMismatch { .. })
        ));
        assert!(matches!(
            check_set_mean_inequalities(&[a.clone()], &w, 2, 1000, 1e-9),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            check_set_mean_inequalities(&[a.clone(), a.clone()], &w, 0, 1000, 1e-9),
            Err(Error::BadConfig { .. })
        ));
        assert!(matches!(
            check_mean_decomposition(&[a.clone()], 2, 0, 0, 1000, 1e-9),
            Err(Error::BadConfig { .. })
        ));
        assert!(matches!(
            check_mixed_product_inequalities(&[], &w, 1e-9),
            Err(Error::EmptySet)
        ));
        assert!(matches!(
            check_set_mean_inequalities(&[a.clone(), a], &w, 2, 1, 1e-9),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
