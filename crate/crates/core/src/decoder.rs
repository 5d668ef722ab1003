//! The GRAND query loop.
//!
//! Patterns come from [`PatternGenerator`] in logistic-weight order over the
//! reliability ranks of the frame. Each emitted pattern `ê` is tested
//! against the full parity-check matrix, `H·(v ⊕ ê) = 0`, using the relative
//! syndrome `s(ê) = s(0) ⊕ ⊕_{i ∈ supp(ê)} H[:, i]`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::bitlin::{BitMatrix, BitVec};
use crate::codes::LinearCode;
use crate::constraints::{compute_targets, ConstraintLayout, ConstraintTargets};
use crate::patterns::{PatternGenerator, RankFilter};

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("non-finite channel observation at index {0}")]
    NonFinite(usize),
    #[error("frame length {found} does not match code length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("empty frame")]
    Empty,
}

/// Channel observations with their hard decision and reliability order.
///
/// BPSK maps bit 0 to `+1` and bit 1 to `−1`, so `v_i = 1` iff `r_i < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    r: Vec<f64>,
    v: BitVec,
    pi1: Vec<usize>,
}

impl ReceivedFrame {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn observations(&self) -> &[f64] {
        &self.r
    }

    /// Hard decision `θ(r)`.
    pub fn hard_decision(&self) -> &BitVec {
        &self.v
    }

    /// `π₁`: entry `k` is the 0-based position of the `(k+1)`-th least
    /// reliable symbol.
    pub fn pi1(&self) -> &[usize] {
        &self.pi1
    }
}

/// Hard-decides `r` and orders positions by ascending `|r_i|`, ties broken
/// by lower index.
pub fn prepare_frame(r: Vec<f64>) -> Result<ReceivedFrame, DecodeError> {
    if r.is_empty() {
        return Err(DecodeError::Empty);
    }
    if let Some(i) = r.iter().position(|x| !x.is_finite()) {
        return Err(DecodeError::NonFinite(i));
    }
    let v = BitVec::from_bools(&r.iter().map(|&x| x < 0.0).collect::<Vec<_>>());
    let mut pi1: Vec<usize> = (0..r.len()).collect();
    pi1.sort_by(|&a, &b| {
        r[a].abs()
            .partial_cmp(&r[b].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(ReceivedFrame { r, v, pi1 })
}

/// Abandonment thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeBudget {
    /// `b`: maximum number of codebook checks.
    pub checked: u64,
    /// `b′`: maximum number of considered candidates, discarded ones included.
    pub considered: u64,
}

impl DecodeBudget {
    pub fn new(checked: u64, considered: u64) -> Self {
        Self { checked, considered }
    }

    /// `b = b′`.
    pub fn uniform(b: u64) -> Self {
        Self::new(b, b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeResult {
    Codeword(BitVec),
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub result: DecodeResult,
    /// Codebook checks performed, the all-zero pattern included.
    pub queries_checked: u64,
    pub candidates_generated: u64,
    /// Logistic weight of the successful pattern.
    pub found_at_weight: Option<usize>,
}

impl DecodeOutcome {
    pub fn codeword(&self) -> Option<&BitVec> {
        match &self.result {
            DecodeResult::Codeword(c) => Some(c),
            DecodeResult::Abandoned => None,
        }
    }

    pub fn is_abandoned(&self) -> bool {
        matches!(self.result, DecodeResult::Abandoned)
    }
}

/// Columns of `H` packed as words, for syndrome updates one column at a time.
#[derive(Debug, Clone)]
pub struct ColumnSyndromes {
    n: usize,
    rows: usize,
    words: usize,
    columns: Vec<u64>,
}

impl ColumnSyndromes {
    pub fn new(h: &BitMatrix) -> Self {
        let n = h.ncols();
        let rows = h.nrows();
        let words = rows.div_ceil(64).max(1);
        let mut columns = vec![0u64; n * words];
        for (j, row) in h.rows().iter().enumerate() {
            for i in row.iter_ones() {
                columns[i * words + j / 64] |= 1 << (j % 64);
            }
        }
        Self {
            n,
            rows,
            words,
            columns,
        }
    }

    pub fn words_per_syndrome(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn column(&self, pos: usize) -> &[u64] {
        &self.columns[pos * self.words..(pos + 1) * self.words]
    }

    /// `s(0) = H·v`.
    pub fn initial(&self, v: &BitVec) -> Vec<u64> {
        assert_eq!(v.len(), self.n, "word length");
        self.relative(&vec![0; self.words], v.iter_ones())
    }

    /// `s(ê) = s(0) ⊕ ⊕_{i ∈ supp(ê)} H[:, i]` for 0-based positions.
    pub fn relative(&self, s0: &[u64], support: impl IntoIterator<Item = usize>) -> Vec<u64> {
        let mut s = s0.to_vec();
        for pos in support {
            for (a, b) in s.iter_mut().zip(self.column(pos)) {
                *a ^= b;
            }
        }
        s
    }

    pub fn to_bitvec(&self, s: &[u64]) -> BitVec {
        BitVec::from_support(self.rows, (0..self.rows).filter(|&j| s[j / 64] >> (j % 64) & 1 == 1))
    }
}

/// ORBGRAND decoder for one code, optionally with a constraint layout.
#[derive(Debug, Clone)]
pub struct GrandDecoder {
    h: BitMatrix,
    syndromes: ColumnSyndromes,
    layout: Option<ConstraintLayout>,
}

impl GrandDecoder {
    pub fn new(code: &LinearCode, layout: Option<ConstraintLayout>) -> Self {
        if let Some(l) = &layout {
            assert_eq!(l.n(), code.n(), "layout length");
        }
        let h = code.parity_check().clone();
        Self {
            syndromes: ColumnSyndromes::new(&h),
            h,
            layout: layout.filter(|l| l.p() > 0),
        }
    }

    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    pub fn layout(&self) -> Option<&ConstraintLayout> {
        self.layout.as_ref()
    }

    pub fn decode(&self, frame: &ReceivedFrame, budget: DecodeBudget) -> Result<DecodeOutcome, DecodeError> {
        if frame.len() != self.n() {
            return Err(DecodeError::LengthMismatch {
                expected: self.n(),
                found: frame.len(),
            });
        }
        let targets = self
            .layout
            .as_ref()
            .map(|layout| compute_targets(layout, frame.hard_decision()).expect("lengths match"));
        self.decode_with_targets(frame, budget, targets.as_ref())
    }

    fn decode_with_targets(
        &self,
        frame: &ReceivedFrame,
        budget: DecodeBudget,
        targets: Option<&ConstraintTargets>,
    ) -> Result<DecodeOutcome, DecodeError> {
        let n = self.n();
        if frame.len() != n {
            return Err(DecodeError::LengthMismatch {
                expected: n,
                found: frame.len(),
            });
        }
        let pi1 = frame.pi1();
        let mut gen = match (&self.layout, targets) {
            (Some(layout), Some(t)) => PatternGenerator::constrained(n, RankFilter::new(layout, t, pi1)),
            _ => PatternGenerator::new(n),
        }
        .with_limit(budget.considered);

        let s0 = self.syndromes.initial(frame.hard_decision());
        let mut scratch = vec![0u64; s0.len()];
        let mut checked = 0u64;
        let outcome = |result, checked, gen: &PatternGenerator, w| DecodeOutcome {
            result,
            queries_checked: checked,
            candidates_generated: gen.stats().generated,
            found_at_weight: w,
        };
        loop {
            if checked >= budget.checked {
                return Ok(outcome(DecodeResult::Abandoned, checked, &gen, None));
            }
            let Some(ranks) = gen.next_pattern() else {
                return Ok(outcome(DecodeResult::Abandoned, checked, &gen, None));
            };
            checked += 1;
            scratch.copy_from_slice(&s0);
            for &rank in ranks {
                for (a, b) in scratch.iter_mut().zip(self.syndromes.column(pi1[rank - 1])) {
                    *a ^= b;
                }
            }
            if scratch.iter().all(|&w| w == 0) {
                let mut c = frame.hard_decision().clone();
                for &rank in ranks {
                    c.flip(pi1[rank - 1]);
                }
                let weight = ranks.iter().sum();
                assert!(
                    self.h.matvec(&c).expect("length").is_zero(),
                    "decoder returned a non-codeword"
                );
                return Ok(outcome(DecodeResult::Codeword(c), checked, &gen, Some(weight)));
            }
        }
    }
}

/// One-shot decode. `constraints`, when given, must hold the targets of
/// `frame`'s hard decision.
pub fn decode(
    code: &LinearCode,
    frame: &ReceivedFrame,
    budget: DecodeBudget,
    constraints: Option<(&ConstraintLayout, &ConstraintTargets)>,
) -> Result<DecodeOutcome, DecodeError> {
    let decoder = GrandDecoder::new(code, constraints.map(|(l, _)| l.clone()));
    decoder.decode_with_targets(frame, budget, constraints.map(|(_, t)| t))
}
