//! Error-pattern generation in logistic-weight order.
//!
//! A pattern is a set of distinct reliability ranks `{i₁ > i₂ > …}` with every
//! rank in `[1, n]`; its logistic weight is the sum of the ranks. Patterns of
//! weight `w` are the distinct-part partitions of `w` with no part above `n`.
//!
//! Within one weight the partitions form a tree rooted at `{w}`. A node's
//! children split its largest part `m` into `(m − d, d)` with `d` one more
//! than the second-largest part (phase 1); siblings are produced by moving
//! one unit from the larger of the two new parts to the smaller (phase 2).
//! The tree is walked depth first, children before siblings. Every
//! distinct-part partition has exactly one parent (merge its two largest
//! parts), so each is visited once.
//!
//! For constrained generation each node carries the parity of its parts
//! excluding the two largest. A split or an alternative only touches the two
//! largest parts, so the full parity is that cached value XOR the
//! membership of the two new parts.

use thiserror::Error;

use crate::constraints::{ConstraintLayout, ConstraintTargets};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("part {0} appears twice")]
    DuplicatePart(usize),
    #[error("part {part} outside [1, {n}]")]
    PartOutOfRange { part: usize, n: usize },
    #[error("expected one or two new parts, got {0}")]
    BadUpdateArity(usize),
}

/// Which parts are left out of a node's cached partial parities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Only the largest part is excluded; the next step splits it.
    Split,
    /// The two largest parts are excluded; the next step looks for an
    /// alternative pair.
    Alternatives,
}

/// A candidate pattern with its cached partial constraint parities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternNode {
    /// Ranks in strictly decreasing order.
    pub parts: Vec<usize>,
    pub weight: usize,
    /// Bit `j`: parity of constraint `j` over the retained parts.
    pub partial_parities: u64,
    pub phase: Phase,
}

impl PatternNode {
    /// Parts counted in `partial_parities`.
    pub fn retained_parts(&self) -> &[usize] {
        let skip = match self.phase {
            Phase::Split => 1,
            Phase::Alternatives => 2,
        };
        &self.parts[skip.min(self.parts.len())..]
    }
}

/// Rank-domain view of a constraint layout for one frame: bit `j` of
/// `rank_masks[i − 1]` is set iff `π₂(π₁(i)) ∈ [L_j, U_j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankFilter {
    rank_masks: Vec<u64>,
    target: u64,
}

impl RankFilter {
    /// `pi1[r]` is the 0-based bit position of the rank `r + 1` symbol.
    pub fn new(layout: &ConstraintLayout, targets: &ConstraintTargets, pi1: &[usize]) -> Self {
        assert_eq!(pi1.len(), layout.n(), "permutation length");
        assert_eq!(targets.bits().len(), layout.p(), "target count");
        Self {
            rank_masks: pi1.iter().map(|&pos| layout.position_mask(pos)).collect(),
            target: targets.mask(),
        }
    }

    #[inline]
    pub fn mask_of(&self, part: usize) -> u64 {
        self.rank_masks[part - 1]
    }

    pub fn target(&self) -> u64 {
        self.target
    }

    /// Constraint parities of a full pattern.
    pub fn parities(&self, parts: &[usize]) -> u64 {
        parts.iter().fold(0, |acc, &i| acc ^ self.mask_of(i))
    }
}

/// Applies the two-position update to `node.partial_parities`.
///
/// For each constraint `j` the cached parity is kept when both new parts land
/// in `[L_j, U_j]` or neither does, and flipped when exactly one does.
/// Membership is tested on `π₂(π₁(i))`.
pub fn progressive_update(
    node: &PatternNode,
    new_parts: &[usize],
    layout: &ConstraintLayout,
    pi1: &[usize],
) -> Result<u64, PatternError> {
    let n = layout.n();
    if new_parts.is_empty() || new_parts.len() > 2 {
        return Err(PatternError::BadUpdateArity(new_parts.len()));
    }
    let retained = node.retained_parts();
    for (k, &i) in new_parts.iter().enumerate() {
        if i == 0 || i > n {
            return Err(PatternError::PartOutOfRange { part: i, n });
        }
        if retained.contains(&i) || new_parts[..k].contains(&i) {
            return Err(PatternError::DuplicatePart(i));
        }
    }
    let inside = |i: usize, (lo, hi): (usize, usize)| {
        let slot = layout.pi2(pi1[i - 1]);
        lo <= slot && slot <= hi
    };
    let mut parities = node.partial_parities;
    for (j, &interval) in layout.intervals().iter().enumerate() {
        let a = inside(new_parts[0], interval);
        let b = new_parts.get(1).is_some_and(|&i| inside(i, interval));
        if a != b {
            parities ^= 1 << j;
        }
    }
    Ok(parities)
}

/// Whether the complete pattern `node.parts` satisfies every constraint.
/// Constraints with shorter intervals are tested first.
pub fn check_node(node: &PatternNode, layout: &ConstraintLayout, targets: &ConstraintTargets, pi1: &[usize]) -> bool {
    layout.check_order().into_iter().all(|j| {
        let (lo, hi) = layout.intervals()[j];
        let hits = node
            .parts
            .iter()
            .filter(|&&i| {
                let slot = layout.pi2(pi1[i - 1]);
                lo <= slot && slot <= hi
            })
            .count();
        (hits % 2 == 1) == targets.get(j)
    })
}

/// Counters kept by a [`PatternGenerator`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeneratorStats {
    /// Patterns with all parts `≤ n` that were considered, including ones the
    /// constraints discarded.
    pub generated: u64,
    /// Patterns returned to the caller.
    pub emitted: u64,
    /// Tree nodes with a part above `n`, walked through but never counted as
    /// candidates.
    pub oversized: u64,
}

/// Iterates error patterns in nondecreasing logistic weight.
///
/// The empty pattern comes first. With a [`RankFilter`] attached, patterns
/// violating a constraint are counted in [`GeneratorStats::generated`] but
/// not returned.
#[derive(Debug, Clone)]
pub struct PatternGenerator {
    n: usize,
    max_weight: usize,
    weight: usize,
    /// Current node, ascending: the largest part is last.
    parts: Vec<usize>,
    /// Parity of all but the two largest parts, one entry per tree depth.
    tails: Vec<u64>,
    started: bool,
    /// `parts` holds a node that has not been visited yet.
    pending: bool,
    exhausted: bool,
    limit: u64,
    filter: Option<RankFilter>,
    stats: GeneratorStats,
}

impl PatternGenerator {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "pattern length must be positive");
        Self {
            n,
            max_weight: n * (n + 1) / 2,
            weight: 0,
            parts: Vec::with_capacity(n),
            tails: Vec::with_capacity(n),
            started: false,
            pending: false,
            exhausted: false,
            limit: u64::MAX,
            filter: None,
            stats: GeneratorStats::default(),
        }
    }

    /// Generator that only emits patterns passing `filter`.
    pub fn constrained(n: usize, filter: RankFilter) -> Self {
        assert_eq!(filter.rank_masks.len(), n, "filter length");
        Self {
            filter: Some(filter),
            ..Self::new(n)
        }
    }

    /// Skips the empty pattern and all weights below `weight`.
    pub fn start_at_weight(mut self, weight: usize) -> Self {
        if weight == 0 {
            return self;
        }
        self.started = true;
        if weight > self.max_weight {
            self.exhausted = true;
        } else {
            self.set_root(weight);
        }
        self
    }

    /// Stops once `limit` candidates have been considered.
    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = limit;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stats(&self) -> GeneratorStats {
        self.stats
    }

    /// Logistic weight of the current node.
    pub fn current_weight(&self) -> usize {
        self.weight
    }

    /// True once every pattern up to weight `n(n+1)/2` has been considered.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn limit_reached(&self) -> bool {
        self.stats.generated >= self.limit
    }

    /// The most recently emitted pattern with its cached partial parities.
    pub fn current_node(&self) -> PatternNode {
        let parts: Vec<usize> = self.parts.iter().rev().copied().collect();
        let phase = if parts.len() >= 2 {
            Phase::Alternatives
        } else {
            Phase::Split
        };
        PatternNode {
            weight: parts.iter().sum(),
            partial_parities: self.tails.last().copied().unwrap_or(0),
            phase,
            parts,
        }
    }

    /// Next pattern as ascending 1-based ranks, or `None` once the generator
    /// is exhausted or the candidate limit is reached.
    pub fn next_pattern(&mut self) -> Option<&[usize]> {
        loop {
            if self.exhausted || self.limit_reached() {
                return None;
            }
            if !self.started {
                self.started = true;
                self.stats.generated += 1;
                self.set_root(1);
                if self.filter.as_ref().is_none_or(|f| f.target() == 0) {
                    self.stats.emitted += 1;
                    // `parts` now holds the pending root; report the empty set.
                    return Some(&[]);
                }
                continue;
            }
            if !self.pending {
                self.advance();
                continue;
            }
            self.pending = false;
            let len = self.parts.len();
            let largest = self.parts[len - 1];
            if largest > self.n {
                self.stats.oversized += 1;
                continue;
            }
            self.stats.generated += 1;
            if let Some(f) = &self.filter {
                let mut parity = self.tails[self.tails.len() - 1] ^ f.mask_of(largest);
                if len >= 2 {
                    parity ^= f.mask_of(self.parts[len - 2]);
                }
                if parity != f.target() {
                    continue;
                }
            }
            self.stats.emitted += 1;
            return Some(&self.parts);
        }
    }

    fn set_root(&mut self, weight: usize) {
        self.weight = weight;
        self.parts.clear();
        self.parts.push(weight);
        self.tails.clear();
        self.tails.push(0);
        self.pending = true;
    }

    #[inline]
    fn mask(&self, part: usize) -> u64 {
        self.filter.as_ref().map_or(0, |f| f.mask_of(part))
    }

    /// Whether `x` could still be written as distinct parts in `(floor, n]`.
    #[inline]
    fn splittable(&self, x: usize, floor: usize) -> bool {
        floor < self.n && x <= (self.n * (self.n + 1) - floor * (floor + 1)) / 2
    }

    /// Moves `parts` to the next tree node in traversal order.
    fn advance(&mut self) {
        let len = self.parts.len();
        let largest = self.parts[len - 1];
        let second = if len >= 2 { self.parts[len - 2] } else { 0 };

        // Phase 1: split the largest part.
        let d = second + 1;
        if largest > 2 * d && self.splittable(largest - d, d) {
            let tail = self.tails[self.tails.len() - 1] ^ if len >= 2 { self.mask(second) } else { 0 };
            self.parts.pop();
            self.parts.push(d);
            self.parts.push(largest - d);
            self.tails.push(tail);
            self.pending = true;
            return;
        }

        // Phase 2: next alternative pair, backtracking to ancestors when the
        // current pair has none left.
        loop {
            let len = self.parts.len();
            if len < 2 {
                if self.weight >= self.max_weight {
                    self.exhausted = true;
                } else {
                    self.set_root(self.weight + 1);
                }
                return;
            }
            let sum = self.parts[len - 1] + self.parts[len - 2];
            let d = self.parts[len - 2] + 1;
            if sum > 2 * d && self.splittable(sum - d, d) {
                self.parts[len - 2] = d;
                self.parts[len - 1] = sum - d;
                self.pending = true;
                return;
            }
            self.parts.truncate(len - 2);
            self.parts.push(sum);
            self.tails.pop();
        }
    }
}
