use crate::error::{Error, Result};
use crate::matrix::{weighted_hadamard_mean, NonNegMatrix};
use crate::weights::WeightVector;

/// Non-empty finite set of square matrices sharing one dimension.
///
/// Members are ordered and duplicates are kept; every enumeration below is
/// defined in terms of member indices, so ordering is part of the contract.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    dim: usize,
    members: Vec<NonNegMatrix>,
    label: Option<String>,
}

impl OperatorSet {
    pub fn new(members: Vec<NonNegMatrix>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptySet);
        }
        let dim = members[0].rows();
        for m in &members {
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
        Ok(OperatorSet {
            dim,
            members,
            label: None,
        })
    }

    pub fn with_label(members: Vec<NonNegMatrix>, label: impl Into<String>) -> Result<Self> {
        let mut set = OperatorSet::new(members)?;
        set.label = Some(label.into());
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn members(&self) -> &[NonNegMatrix] {
        &self.members
    }

    pub fn member(&self, index: usize) -> &NonNegMatrix {
        &self.members[index]
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// A finite product described by member indices, leftmost factor first.
/// `set_indices`, when present, names the set each letter is drawn from;
/// absent means every letter indexes the same set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductWord {
    pub indices: Vec<usize>,
    pub set_indices: Option<Vec<usize>>,
}

impl ProductWord {
    pub fn homogeneous(indices: Vec<usize>) -> Self {
        ProductWord {
            indices,
            set_indices: None,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// All pairwise products `a_i * b_j`, ordered lexicographically by
/// `(i, j)`. Duplicate matrices are kept; the product of sets with sizes
/// `p` and `q` always has exactly `p * q` members.
pub fn set_product(a: &OperatorSet, b: &OperatorSet) -> Result<OperatorSet> {
    if a.dim != b.dim {
        return Err(Error::DimMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let mut members = Vec::with_capacity(a.len() * b.len());
    for left in &a.members {
        for right in &b.members {
            members.push(left.matmul(right)?);
        }
    }
    OperatorSet::new(members)
}

/// Lazy enumeration of the `m`-fold product set `sigma^m` in
/// lexicographic word order, reusing prefix products across steps.
///
/// The full size `len(sigma)^m` is checked against `budget` up front;
/// a budget violation is an explicit error, never a silent truncation.
pub fn set_power(sigma: &OperatorSet, m: usize, budget: u64) -> Result<SetPower<'_>> {
    if m == 0 {
        return Err(Error::BadConfig {
            message: "set power needs an exponent of at least 1".to_string(),
        });
    }
    let required = (sigma.len() as u128)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(SetPower {
        set: sigma,
        m,
        word: vec![0; m],
        prefixes: Vec::with_capacity(m),
        started: false,
        done: false,
    })
}

#[derive(Debug)]
pub struct SetPower<'a> {
    set: &'a OperatorSet,
    m: usize,
    word: Vec<usize>,
    prefixes: Vec<NonNegMatrix>,
    started: bool,
    done: bool,
}

impl SetPower<'_> {
    /// Number of words the iterator will yield in total.
    pub fn total(&self) -> u128 {
        (self.set.len() as u128).pow(self.m as u32)
    }

    fn rebuild_from(&mut self, from: usize) -> Result<()> {
        self.prefixes.truncate(from);
        for pos in from..self.m {
            let letter = self.set.member(self.word[pos]);
            let next = match self.prefixes.last() {
                Some(prev) => prev.matmul(letter)?,
                None => letter.clone(),
            };
            self.prefixes.push(next);
        }
        Ok(())
    }
}

impl Iterator for SetPower<'_> {
    type Item = Result<(ProductWord, NonNegMatrix)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let dirty = if !self.started {
            self.started = true;
            0
        } else {
            // odometer step: bump the rightmost position that can move
            let size = self.set.len();
            let mut pos = self.m;
            loop {
                if pos == 0 {
                    self.done = true;
                    return None;
                }
                pos -= 1;
                if self.word[pos] + 1 < size {
                    self.word[pos] += 1;
                    for later in self.word[pos + 1..].iter_mut() {
                        *later = 0;
                    }
                    break pos;
                }
            }
        };
        if let Err(e) = self.rebuild_from(dirty) {
            self.done = true;
            return Some(Err(e));
        }
        let word = ProductWord::homogeneous(self.word.clone());
        Some(Ok((word, self.prefixes[self.m - 1].clone())))
    }
}

/// Weighted Hadamard geometric mean of `m` sets: one member per way of
/// picking a member from each set, combined with [`weighted_hadamard_mean`].
/// Combinations are ordered lexicographically with the first set most
/// significant; member `c` corresponds to [`split_combination`]`(sizes, c)`.
pub fn set_hadamard_mean(sets: &[OperatorSet], weights: &WeightVector) -> Result<OperatorSet> {
    if sets.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            found: sets.len(),
        });
    }
    let dim = sets[0].dim;
    let mut total: usize = 1;
    for set in sets {
        if set.dim != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: set.dim,
            });
        }
        total = total.checked_mul(set.len()).ok_or_else(|| Error::BadConfig {
            message: "Hadamard mean member count overflows".to_string(),
        })?;
    }
    let sizes: Vec<usize> = sets.iter().map(|s| s.len()).collect();
    let mut members = Vec::with_capacity(total);
    let mut picks: Vec<&NonNegMatrix> = Vec::with_capacity(sets.len());
    for c in 0..total {
        let combo = split_combination(&sizes, c);
        picks.clear();
        for (set, &idx) in sets.iter().zip(&combo) {
            picks.push(set.member(idx));
        }
        let owned: Vec<NonNegMatrix> = picks.iter().map(|&m| m.clone()).collect();
        members.push(weighted_hadamard_mean(&owned, weights)?);
    }
    OperatorSet::new(members)
}

/// Decomposes a combination index into per-set member indices, inverse to
/// the enumeration order of [`set_hadamard_mean`].
pub fn split_combination(sizes: &[usize], index: usize) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    let mut rest = index;
    for t in (0..sizes.len()).rev() {
        out[t] = rest % sizes[t];
        rest /= sizes[t];
    }
    debug_assert_eq!(rest, 0, "combination index out of range");
    out
}

/// Left-to-right product of the matrices a word selects.
pub fn word_matrix(sets: &[OperatorSet], word: &ProductWord) -> Result<NonNegMatrix> {
    if sets.is_empty() {
        return Err(Error::EmptySet);
    }
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    if let Some(set_indices) = &word.set_indices {
        if set_indices.len() != word.indices.len() {
            return Err(Error::LengthMismatch {
                expected: word.indices.len(),
                found: set_indices.len(),
            });
        }
    }
    let mut product: Option<NonNegMatrix> = None;
    for (position, &index) in word.indices.iter().enumerate() {
        let set = match &word.set_indices {
            Some(set_indices) => {
                let s = set_indices[position];
                if s >= sets.len() {
                    return Err(Error::WordIndex {
                        position,
                        index: s,
                        bound: sets.len(),
                    });
                }
                &sets[s]
            }
            None => &sets[0],
        };
        if index >= set.len() {
            return Err(Error::WordIndex {
                position,
                index,
                bound: set.len(),
            });
        }
        let letter = set.member(index);
        product = Some(match product {
            Some(acc) => acc.matmul(letter)?,
            None => letter.clone(),
        });
    }
    Ok(product.expect("word is non-empty"))
}
