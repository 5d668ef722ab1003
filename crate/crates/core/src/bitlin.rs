//! Dense GF(2) vectors and matrices.
//!
//! Bits are packed into `u64` words so that row XOR and dot products run a
//! word at a time. Bit indices in the Rust API are 0-based; text formats and
//! console output use 1-based positions.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const WORD_BITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitError {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("empty matrix")]
    Empty,
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
}

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A fixed-length binary vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: vec![!0; words_for(len)],
        };
        v.clear_tail();
        v
    }

    /// Vector with a single one at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector of length `len` whose ones sit at the given 0-based
    /// indices.
    pub fn from_support(len: usize, support: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in support {
            v.set(i, true);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        (self.words[index / WORD_BITS] >> (index % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, index: usize) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        self.words[index / WORD_BITS] ^= 1u64 << (index % WORD_BITS);
    }

    /// Hamming weight, `|supp(v)|`.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// 0-based indices of the nonzero coordinates, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let tz = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn check_len(&self, other: &BitVec) -> Result<(), BitError> {
        if self.len != other.len {
            return Err(BitError::LengthMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    pub fn xor_assign(&mut self, other: &BitVec) -> Result<(), BitError> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn xor(&self, other: &BitVec) -> Result<BitVec, BitError> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &BitVec) -> Result<bool, BitError> {
        self.check_len(other)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones & 1 == 1)
    }

    /// `supp(self) ⊆ supp(other)`.
    pub fn is_subset_of(&self, other: &BitVec) -> Result<bool, BitError> {
        self.check_len(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    pub fn is_disjoint(&self, other: &BitVec) -> Result<bool, BitError> {
        self.check_len(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0))
    }

    /// Concatenates `self` with `other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn first_one(&self) -> Option<usize> {
        self.iter_ones().next()
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = BitError;

    /// Parses a string of `0`/`1` characters; spaces are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitError::InvalidChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitVec::from_bools(&bits))
    }
}

/// Result of Gauss-Jordan elimination over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowReduction {
    /// Reduced row-echelon form; zero rows are dropped.
    pub reduced: BitMatrix,
    pub rank: usize,
    /// 0-based pivot column of each row of `reduced`.
    pub pivots: Vec<usize>,
}

/// A dense binary matrix stored as a list of row vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BitMatrix {
    /// Builds a matrix from rows that must all have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self, BitError> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(BitError::LengthMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    pub fn empty(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVec::unit(n, i)).collect(),
        }
    }

    /// Parses rows of `0`/`1` characters, one row per string.
    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, BitError> {
        let parsed = rows
            .iter()
            .map(|r| r.as_ref().parse::<BitVec>())
            .collect::<Result<Vec<_>, _>>()?;
        let cols = parsed.first().map_or(0, BitVec::len);
        Self::from_rows(cols, parsed)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &BitVec {
        &self.rows[j]
    }

    pub fn get(&self, j: usize, i: usize) -> bool {
        self.rows[j].get(i)
    }

    pub fn into_rows(self) -> Vec<BitVec> {
        self.rows
    }

    /// `M · v`: bit `j` of the result is the parity of row `j` against `v`.
    pub fn matvec(&self, v: &BitVec) -> Result<BitVec, BitError> {
        if v.len() != self.cols {
            return Err(BitError::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut s = BitVec::zeros(self.rows.len());
        for (j, row) in self.rows.iter().enumerate() {
            if row.dot(v)? {
                s.set(j, true);
            }
        }
        Ok(s)
    }

    /// `vᵀ · M`, the combination of rows selected by `coeffs`.
    pub fn combine_rows(&self, coeffs: &BitVec) -> Result<BitVec, BitError> {
        if coeffs.len() != self.rows.len() {
            return Err(BitError::LengthMismatch {
                expected: self.rows.len(),
                found: coeffs.len(),
            });
        }
        let mut out = BitVec::zeros(self.cols);
        for j in coeffs.iter_ones() {
            out.xor_assign(&self.rows[j])?;
        }
        Ok(out)
    }

    /// `self · otherᵀ`; zero iff every row of `self` is orthogonal to every
    /// row of `other`.
    pub fn mul_transpose(&self, other: &BitMatrix) -> Result<BitMatrix, BitError> {
        if self.cols != other.cols {
            return Err(BitError::LengthMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| other.matvec(r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitMatrix {
            cols: other.nrows(),
            rows,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVec::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut rows = vec![BitVec::zeros(self.rows.len()); self.cols];
        for (j, row) in self.rows.iter().enumerate() {
            for i in row.iter_ones() {
                rows[i].set(j, true);
            }
        }
        BitMatrix {
            cols: self.rows.len(),
            rows,
        }
    }

    /// Gauss-Jordan elimination to reduced row-echelon form.
    pub fn row_reduce(&self) -> Result<RowReduction, BitError> {
        if self.rows.is_empty() || self.cols == 0 {
            return Err(BitError::Empty);
        }
        Ok(self.rref_unchecked())
    }

    fn rref_unchecked(&self) -> RowReduction {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..self.cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&j| rows[j].get(col)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot_row = rows[r].clone();
            for (j, row) in rows.iter_mut().enumerate() {
                if j != r && row.get(col) {
                    row.xor_assign(&pivot_row).expect("rows share length");
                }
            }
            pivots.push(col);
            r += 1;
        }
        rows.truncate(r);
        RowReduction {
            reduced: BitMatrix { cols: self.cols, rows },
            rank: r,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        if self.rows.is_empty() {
            0
        } else {
            self.rref_unchecked().rank
        }
    }

    /// Basis of `{x : M·x = 0}`, one basis vector per free column.
    pub fn nullspace(&self) -> BitMatrix {
        let (reduced, pivots) = if self.rows.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            let rr = self.rref_unchecked();
            (rr.reduced.rows, rr.pivots)
        };
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let basis = (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = BitVec::unit(self.cols, f);
                for (row, &p) in reduced.iter().zip(&pivots) {
                    if row.get(f) {
                        x.set(p, true);
                    }
                }
                x
            })
            .collect();
        BitMatrix {
            cols: self.cols,
            rows: basis,
        }
    }

    /// Finds coefficients `c` with `cᵀ·M = v`, if `v` lies in the row space.
    pub fn in_row_space(&self, v: &BitVec) -> Result<Option<BitVec>, BitError> {
        if v.len() != self.cols {
            return Err(BitError::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let m = self.rows.len();
        // Echelon form with each row tagged by the original rows it combines.
        let mut basis: Vec<(usize, BitVec, BitVec)> = Vec::new();
        for (j, row) in self.rows.iter().enumerate() {
            let mut row = row.clone();
            let mut tag = BitVec::unit(m, j);
            for (p, brow, btag) in &basis {
                if row.get(*p) {
                    row.xor_assign(brow)?;
                    tag.xor_assign(btag)?;
                }
            }
            if let Some(p) = row.first_one() {
                for (_, brow, btag) in basis.iter_mut() {
                    if brow.get(p) {
                        brow.xor_assign(&row)?;
                        btag.xor_assign(&tag)?;
                    }
                }
                basis.push((p, row, tag));
            }
        }
        let mut rest = v.clone();
        let mut coeffs = BitVec::zeros(m);
        for (p, brow, btag) in &basis {
            if rest.get(*p) {
                rest.xor_assign(brow)?;
                coeffs.xor_assign(btag)?;
            }
        }
        Ok(rest.is_zero().then_some(coeffs))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}
