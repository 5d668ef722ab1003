//! Disjoint parity constraints extracted from a parity-check matrix.
//!
//! A constraint is a row `h` of the row space of `H` together with its target
//! parity `h·v` on the hard decision `v`. Any error pattern `e` that leads to
//! a codeword must put an odd number of errors on `supp(h)` when the target
//! is 1 and an even number otherwise. With `p` pairwise disjoint supports the
//! admissible patterns are exactly `2^(n−p)` of the `2^n`.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::bitlin::{BitError, BitMatrix, BitVec};

/// Upper bound on `p`; parities are packed into one `u64`.
pub const MAX_CONSTRAINTS: usize = 64;

/// Largest `n` accepted by [`count_search_space`].
pub const MAX_ENUMERATION_LEN: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("requested {requested} disjoint constraints but only {achievable} are obtainable")]
    Insufficient { requested: usize, achievable: usize },
    #[error("constraint supports overlap at position {0}")]
    Overlap(usize),
    #[error("constraint row {0} is zero")]
    ZeroRow(usize),
    #[error("at most {MAX_CONSTRAINTS} constraints are supported, got {0}")]
    TooMany(usize),
    #[error("n = {0} too large for exhaustive enumeration (max {MAX_ENUMERATION_LEN})")]
    TooLong(usize),
    #[error(transparent)]
    Bit(#[from] BitError),
}

/// `p` disjoint constraint rows and the permutation `π₂` that packs each
/// support into a run of consecutive indices.
///
/// `π₂` places unconstrained positions first (ascending), then the support of
/// each constraint in order, each ascending. Constraint `j` occupies the
/// 1-based interval `[L_j, U_j]` of the permuted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintLayout {
    n: usize,
    rows: Vec<BitVec>,
    pi2: Vec<usize>,
    intervals: Vec<(usize, usize)>,
    position_masks: Vec<u64>,
}

impl ConstraintLayout {
    /// Layout with no constraints.
    pub fn empty(n: usize) -> Self {
        Self::from_rows(n, Vec::new()).expect("no rows cannot overlap")
    }

    /// Builds the layout from pairwise disjoint, nonzero rows of length `n`.
    pub fn from_rows(n: usize, rows: Vec<BitVec>) -> Result<Self, ConstraintError> {
        if rows.len() > MAX_CONSTRAINTS {
            return Err(ConstraintError::TooMany(rows.len()));
        }
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(BitError::LengthMismatch {
                    expected: n,
                    found: row.len(),
                }
                .into());
            }
            if row.is_zero() {
                return Err(ConstraintError::ZeroRow(j));
            }
            for i in row.iter_ones() {
                if owner[i].is_some() {
                    return Err(ConstraintError::Overlap(i));
                }
                owner[i] = Some(j);
            }
        }

        let mut pi2 = vec![0; n];
        let mut next = 1;
        for (i, slot) in pi2.iter_mut().enumerate() {
            if owner[i].is_none() {
                *slot = next;
                next += 1;
            }
        }
        let mut intervals = Vec::with_capacity(rows.len());
        for row in &rows {
            let lower = next;
            for i in row.iter_ones() {
                pi2[i] = next;
                next += 1;
            }
            intervals.push((lower, next - 1));
        }

        let position_masks = (0..n)
            .map(|i| {
                let slot = pi2[i];
                intervals
                    .iter()
                    .position(|&(l, u)| l <= slot && slot <= u)
                    .map_or(0, |j| 1u64 << j)
            })
            .collect();

        Ok(Self {
            n,
            rows,
            pi2,
            intervals,
            position_masks,
        })
    }

    /// Random layout of `p` disjoint nonempty sets over `n` positions, some
    /// positions possibly left unconstrained.
    pub fn random<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<Self, ConstraintError> {
        if p > n {
            return Err(ConstraintError::Insufficient {
                requested: p,
                achievable: n,
            });
        }
        let mut positions: Vec<usize> = (0..n).collect();
        positions.shuffle(rng);
        let covered = if p == 0 { 0 } else { rng.random_range(p..=n) };
        // p − 1 distinct cut points inside 1..covered split it into p nonempty runs.
        let mut cuts: Vec<usize> = rand::seq::index::sample(rng, covered.saturating_sub(1), p.saturating_sub(1))
            .into_iter()
            .map(|c| c + 1)
            .collect();
        cuts.sort_unstable();
        cuts.insert(0, 0);
        cuts.push(covered);
        let rows = cuts
            .windows(2)
            .take(p)
            .map(|w| BitVec::from_support(n, positions[w[0]..w[1]].iter().copied()))
            .collect();
        Self::from_rows(n, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    /// 0-based support of each constraint.
    pub fn sets(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(BitVec::support).collect()
    }

    /// `π₂` of 0-based position `pos`, as a 1-based slot.
    pub fn pi2(&self, pos: usize) -> usize {
        self.pi2[pos]
    }

    /// 1-based inclusive intervals `[L_j, U_j]`.
    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    /// Index of the constraint covering 0-based position `pos`, found by the
    /// interval test on `π₂(pos)`.
    pub fn constraint_of(&self, pos: usize) -> Option<usize> {
        let slot = self.pi2[pos];
        // Unconstrained positions occupy the leading slots.
        if self.intervals.first().is_none_or(|&(l, _)| slot < l) {
            return None;
        }
        self.intervals.iter().position(|&(l, u)| l <= slot && slot <= u)
    }

    /// Bit `j` set iff position `pos` belongs to constraint `j`.
    pub fn position_mask(&self, pos: usize) -> u64 {
        self.position_masks[pos]
    }

    /// Constraint indices ordered by interval length, shortest first.
    pub fn check_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.p()).collect();
        order.sort_by_key(|&j| self.intervals[j].1 - self.intervals[j].0);
        order
    }

    pub fn has_all_one_row(&self) -> bool {
        self.rows.iter().any(|r| r.weight() == self.n)
    }
}

/// Target parities `s_j(0) = h_j · v` for one received frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintTargets {
    bits: Vec<bool>,
}

impl ConstraintTargets {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, j: usize) -> bool {
        self.bits[j]
    }

    /// Targets packed as bit `j` of a word.
    pub fn mask(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0, |m, (j, _)| m | 1 << j)
    }
}

pub fn compute_targets(layout: &ConstraintLayout, v: &BitVec) -> Result<ConstraintTargets, ConstraintError> {
    let bits = layout.rows().iter().map(|r| r.dot(v)).collect::<Result<Vec<_>, _>>()?;
    Ok(ConstraintTargets { bits })
}

/// Derives `p` constraint rows with pairwise disjoint supports from `H`.
///
/// The all-one word is taken first when it lies in the row space; otherwise
/// the heaviest row of `H` starts the list. Each further constraint comes
/// from splitting the heaviest splittable row `r` with a candidate `c` whose
/// support is a proper subset of `supp(r)`: `r` becomes `r ⊕ c` and `c` is
/// appended. Candidates are the rows of `H` followed by XORs of row pairs;
/// the one whose weight is closest to `|r|/2` wins, earliest on ties. If no
/// candidate fits inside `r`, candidates XORed with chosen rows are tried.
/// When no row can be split, a candidate disjoint from every chosen support
/// is appended instead.
pub fn derive_constraints(h: &BitMatrix, p: usize) -> Result<ConstraintLayout, ConstraintError> {
    let n = h.ncols();
    if p > MAX_CONSTRAINTS {
        return Err(ConstraintError::TooMany(p));
    }
    if p == 0 {
        return Ok(ConstraintLayout::empty(n));
    }
    if h.nrows() == 0 {
        return Err(ConstraintError::Insufficient {
            requested: p,
            achievable: 0,
        });
    }

    let pool = candidate_pool(h);
    let ones = BitVec::ones(n);
    let mut chosen: Vec<BitVec> = Vec::with_capacity(p);
    if h.in_row_space(&ones)?.is_some() {
        chosen.push(ones);
    } else {
        let heaviest = h
            .rows()
            .iter()
            .enumerate()
            .max_by_key(|(j, r)| (r.weight(), std::cmp::Reverse(*j)))
            .map(|(_, r)| r.clone())
            .expect("H has rows");
        chosen.push(heaviest);
    }

    while chosen.len() < p {
        if !split_heaviest(&mut chosen, &pool) && !append_disjoint(&mut chosen, &pool, n) {
            break;
        }
    }
    if chosen.len() < p {
        return Err(ConstraintError::Insufficient {
            requested: p,
            achievable: chosen.len(),
        });
    }
    ConstraintLayout::from_rows(n, chosen)
}

/// Rows of `H`, then pairwise XORs, without zeros or repeats.
fn candidate_pool(h: &BitMatrix) -> Vec<BitVec> {
    let rows = h.rows();
    let mut pool: Vec<BitVec> = Vec::with_capacity(rows.len() * (rows.len() + 1) / 2);
    let mut seen = std::collections::HashSet::new();
    let mut push = |v: BitVec, pool: &mut Vec<BitVec>| {
        if !v.is_zero() && seen.insert(v.clone()) {
            pool.push(v);
        }
    };
    for r in rows {
        push(r.clone(), &mut pool);
    }
    for (a, ra) in rows.iter().enumerate() {
        for rb in &rows[a + 1..] {
            push(ra.xor(rb).expect("rows share length"), &mut pool);
        }
    }
    pool
}

fn split_heaviest(chosen: &mut Vec<BitVec>, pool: &[BitVec]) -> bool {
    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(chosen[j].weight()));
    for j in order {
        let target = &chosen[j];
        let w = target.weight();
        let proper_subset = |c: &BitVec| !c.is_zero() && c.weight() < w && c.is_subset_of(target).unwrap_or(false);
        let closest = |best: Option<BitVec>, c: BitVec| match best {
            Some(b) if (2 * b.weight()).abs_diff(w) <= (2 * c.weight()).abs_diff(w) => Some(b),
            _ => Some(c),
        };
        // Pool rows first, then pool rows combined with a chosen row.
        let mut best = pool.iter().filter(|c| proper_subset(c)).cloned().fold(None, closest);
        if best.is_none() {
            best = pool
                .iter()
                .flat_map(|c| chosen.iter().map(move |r| c.xor(r).expect("same length")))
                .filter(|c| proper_subset(c))
                .fold(None, closest);
        }
        if let Some(c) = best {
            chosen[j].xor_assign(&c).expect("same length");
            chosen.push(c);
            return true;
        }
    }
    false
}

fn append_disjoint(chosen: &mut Vec<BitVec>, pool: &[BitVec], n: usize) -> bool {
    let mut used = BitVec::zeros(n);
    for c in chosen.iter() {
        used.xor_assign(c).expect("same length");
    }
    let mut best: Option<&BitVec> = None;
    for c in pool.iter().filter(|c| c.is_disjoint(&used).unwrap_or(false)) {
        if best.is_none_or(|b| c.weight() > b.weight()) {
            best = Some(c);
        }
    }
    match best {
        Some(c) => {
            chosen.push(c.clone());
            true
        }
        None => false,
    }
}

/// Counts the `e ∈ F₂ⁿ` satisfying every constraint of `layout` by
/// enumerating all `2^n` vectors.
pub fn count_search_space(
    n: usize,
    layout: &ConstraintLayout,
    targets: &ConstraintTargets,
) -> Result<u64, ConstraintError> {
    if n > MAX_ENUMERATION_LEN {
        return Err(ConstraintError::TooLong(n));
    }
    if layout.n() != n {
        return Err(BitError::LengthMismatch {
            expected: n,
            found: layout.n(),
        }
        .into());
    }
    if targets.bits().len() != layout.p() {
        return Err(BitError::LengthMismatch {
            expected: layout.p(),
            found: targets.bits().len(),
        }
        .into());
    }
    let sets: Vec<(u32, u32)> = layout
        .rows()
        .iter()
        .zip(targets.bits())
        .map(|(r, &t)| (r.iter_ones().fold(0u32, |m, i| m | 1 << i), t as u32))
        .collect();
    let count = (0u32..1 << n)
        .filter(|e| sets.iter().all(|&(set, t)| (e & set).count_ones() & 1 == t))
        .count();
    Ok(count as u64)
}
