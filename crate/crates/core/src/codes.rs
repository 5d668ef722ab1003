//! Binary linear codes: extended BCH and PAC construction, plus the
//! parity-check text format.
//!
//! Every code is exposed as `(n, k, G, H)` with `G·Hᵀ = 0`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use thiserror::Error;

use crate::bitlin::{BitError, BitMatrix, BitVec};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error("parity-check file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown code id {0:?} (expected ebch128, ebch8, pac64 or file:PATH)")]
    UnknownCode(String),
    #[error(transparent)]
    Bit(#[from] BitError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Primitive polynomials used for GF(2^m), indexed by `m`. Each is the
/// numerically smallest primitive polynomial of its degree, bit `i` holding
/// the coefficient of `x^i`.
pub const PRIMITIVE_POLYS: [(u32, u32); 6] = [
    (3, 0b1011),        // x^3 + x + 1
    (4, 0b1_0011),      // x^4 + x + 1
    (5, 0b10_0101),     // x^5 + x^2 + 1
    (6, 0b100_0011),    // x^6 + x + 1
    (7, 0b1000_0011),   // x^7 + x + 1
    (8, 0b1_0001_1101), // x^8 + x^4 + x^3 + x^2 + 1
];

/// GF(2^m) with log/antilog tables.
#[derive(Debug, Clone)]
pub struct Gf2m {
    m: u32,
    order: usize,
    exp: Vec<u32>,
    log: Vec<usize>,
}

impl Gf2m {
    pub fn new(m: u32) -> Result<Self, CodeError> {
        let poly = PRIMITIVE_POLYS
            .iter()
            .find(|(deg, _)| *deg == m)
            .map(|&(_, p)| p)
            .ok_or_else(|| CodeError::InvalidParams(format!("m = {m} outside 3..=8")))?;
        let order = (1usize << m) - 1;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![0usize; order + 1];
        let mut x = 1u32;
        for (i, e) in exp.iter_mut().enumerate().take(order) {
            *e = x;
            log[x as usize] = i;
            x <<= 1;
            if x >> m & 1 == 1 {
                x ^= poly;
            }
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { m, order, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Multiplicative group order, `2^m − 1`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `α^i`.
    pub fn alpha_pow(&self, i: usize) -> u32 {
        self.exp[i % self.order]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] + self.log[b as usize]]
        }
    }

    /// Cyclotomic coset of `i` modulo `2^m − 1`.
    pub fn cyclotomic_coset(&self, i: usize) -> Vec<usize> {
        let mut coset = vec![i % self.order];
        let mut j = (2 * i) % self.order;
        while j != coset[0] {
            coset.push(j);
            j = (2 * j) % self.order;
        }
        coset
    }

    /// Minimal polynomial of `α^i` over GF(2); entry `d` is the coefficient
    /// of `x^d`.
    pub fn minimal_poly(&self, i: usize) -> Vec<bool> {
        // Product of (x + α^j) over the coset, computed in GF(2^m).
        let mut poly: Vec<u32> = vec![1];
        for j in self.cyclotomic_coset(i) {
            let root = self.alpha_pow(j);
            let mut next = vec![0u32; poly.len() + 1];
            for (d, &c) in poly.iter().enumerate() {
                next[d + 1] ^= c;
                next[d] ^= self.mul(c, root);
            }
            poly = next;
        }
        poly.into_iter()
            .map(|c| {
                debug_assert!(c <= 1, "minimal polynomial must have binary coefficients");
                c == 1
            })
            .collect()
    }
}

fn gf2_poly_mul(a: &[bool], b: &[bool]) -> Vec<bool> {
    let mut out = vec![false; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= y;
            }
        }
    }
    out
}

/// A binary linear code described by both its generator and parity-check
/// matrices.
#[derive(Clone, PartialEq, Eq)]
pub struct LinearCode {
    name: String,
    generator: BitMatrix,
    parity_check: BitMatrix,
}

impl LinearCode {
    /// Builds a code from a full-rank generator matrix; `H` is its null space
    /// in reduced row-echelon form.
    pub fn from_generator(name: impl Into<String>, generator: BitMatrix) -> Result<Self, CodeError> {
        let k = generator.nrows();
        if k == 0 {
            return Err(CodeError::InvalidParams("empty generator matrix".into()));
        }
        if generator.rank() != k {
            return Err(CodeError::InvalidParams(format!(
                "generator matrix has rank {} < {k}",
                generator.rank()
            )));
        }
        let ns = generator.nullspace();
        let parity_check = if ns.nrows() == 0 { ns } else { ns.row_reduce()?.reduced };
        Ok(Self {
            name: name.into(),
            generator,
            parity_check,
        })
    }

    /// Builds a code from parity-check rows. Linearly dependent rows are
    /// dropped (first occurrence kept) with a warning; the surviving rows are
    /// kept verbatim.
    pub fn from_parity_check(name: impl Into<String>, h: BitMatrix) -> Result<Self, CodeError> {
        let name = name.into();
        let n = h.ncols();
        if n == 0 {
            return Err(CodeError::InvalidParams("zero-length code".into()));
        }
        let mut kept: Vec<BitVec> = Vec::with_capacity(h.nrows());
        for (j, row) in h.rows().iter().enumerate() {
            let basis = BitMatrix::from_rows(n, kept.clone())?;
            if row.is_zero() || basis.in_row_space(row)?.is_some() {
                warn!("{name}: parity-check row {} is linearly dependent; dropped", j + 1);
            } else {
                kept.push(row.clone());
            }
        }
        let parity_check = BitMatrix::from_rows(n, kept)?;
        let generator = parity_check.nullspace();
        if generator.nrows() == 0 {
            return Err(CodeError::InvalidParams(format!("{name}: code has dimension 0")));
        }
        Ok(Self {
            name,
            generator,
            parity_check,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.generator.ncols()
    }

    pub fn k(&self) -> usize {
        self.generator.nrows()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    /// `m·G`.
    pub fn encode(&self, message: &BitVec) -> Result<BitVec, CodeError> {
        Ok(self.generator.combine_rows(message)?)
    }

    pub fn syndrome(&self, word: &BitVec) -> Result<BitVec, CodeError> {
        Ok(self.parity_check.matvec(word)?)
    }

    pub fn is_codeword(&self, word: &BitVec) -> bool {
        self.syndrome(word).map(|s| s.is_zero()).unwrap_or(false)
    }
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearCode({}, n={}, k={})", self.name, self.n(), self.k())
    }
}

/// Extended primitive binary BCH code of length `2^m` correcting `t`
/// errors. The overall parity bit is the last coordinate.
pub fn build_ebch(m: u32, t: usize) -> Result<LinearCode, CodeError> {
    if t == 0 {
        return Err(CodeError::InvalidParams("t must be at least 1".into()));
    }
    let field = Gf2m::new(m)?;
    let len = field.order();
    let mut g = vec![true];
    let mut covered = vec![false; len];
    for i in (1..2 * t).step_by(2) {
        if covered[i % len] {
            continue;
        }
        for j in field.cyclotomic_coset(i) {
            covered[j] = true;
        }
        g = gf2_poly_mul(&g, &field.minimal_poly(i));
    }
    let deg = g.len() - 1;
    if deg >= len {
        return Err(CodeError::InvalidParams(format!(
            "BCH(m={m}, t={t}) has no information bits"
        )));
    }
    let k = len - deg;
    let n = len + 1;
    let rows = (0..k)
        .map(|shift| {
            let mut row = BitVec::zeros(n);
            for (d, &c) in g.iter().enumerate() {
                if c {
                    row.set(shift + d, true);
                }
            }
            if row.weight() % 2 == 1 {
                row.set(len, true);
            }
            row
        })
        .collect();
    LinearCode::from_generator(format!("eBCH({n},{k})"), BitMatrix::from_rows(n, rows)?)
}

/// Information positions of a polar/PAC code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateProfile {
    n: usize,
    info: Vec<usize>,
}

impl RateProfile {
    /// `info` holds 0-based positions; they are sorted and deduplicated.
    pub fn new(n: usize, mut info: Vec<usize>) -> Result<Self, CodeError> {
        info.sort_unstable();
        info.dedup();
        if let Some(&bad) = info.iter().find(|&&i| i >= n) {
            return Err(CodeError::InvalidParams(format!(
                "info position {} exceeds n = {n}",
                bad + 1
            )));
        }
        Ok(Self { n, info })
    }

    /// Parses whitespace-separated 1-based positions; `#` starts a comment.
    pub fn parse(n: usize, text: &str) -> Result<Self, CodeError> {
        let mut info = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            for tok in content.split_whitespace() {
                let pos: usize = tok.parse().map_err(|_| CodeError::Parse {
                    line: lineno + 1,
                    msg: format!("bad position {tok:?}"),
                })?;
                if pos == 0 {
                    return Err(CodeError::Parse {
                        line: lineno + 1,
                        msg: "positions are 1-based".into(),
                    });
                }
                info.push(pos - 1);
            }
        }
        Self::new(n, info)
    }

    /// Bundled PAC(64,44) profile.
    pub fn pac64_default() -> Self {
        Self::parse(64, include_str!("../data/pac64_44.profile")).expect("bundled profile is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info.len()
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info
    }
}

/// In-place polar transform `x = u·F^{⊗log₂ n}` with `F = [[1,0],[1,1]]`.
pub fn polar_transform(u: &mut [bool]) {
    let n = u.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for i in block..block + half {
                u[i] ^= u[i + half];
            }
        }
        half *= 2;
    }
}

/// PAC code: convolutional precoding by `poly` followed by the polar
/// transform, with information carried on `profile`.
pub fn build_pac(profile: &RateProfile, poly: &BitVec) -> Result<LinearCode, CodeError> {
    let n = profile.n();
    if n < 2 || !n.is_power_of_two() {
        return Err(CodeError::InvalidParams(format!("n = {n} is not a power of two")));
    }
    if profile.k() == 0 {
        return Err(CodeError::InvalidParams("empty information set".into()));
    }
    if poly.is_empty() || !poly.get(0) {
        return Err(CodeError::InvalidParams(
            "precoding polynomial must start with 1".into(),
        ));
    }
    let rows = profile
        .info_set()
        .iter()
        .map(|&i| {
            let mut u = vec![false; n];
            for d in poly.iter_ones() {
                if i + d < n {
                    u[i + d] = true;
                }
            }
            polar_transform(&mut u);
            BitVec::from_bools(&u)
        })
        .collect();
    LinearCode::from_generator(format!("PAC({n},{})", profile.k()), BitMatrix::from_rows(n, rows)?)
}

/// Precoding polynomial used for the PAC(64,44) code.
pub const PAC_POLY: &str = "1011011";

/// Serializes `H` as `"n k"` followed by one row of `0`/`1` per line.
pub fn save_parity_check(code: &LinearCode) -> String {
    let mut out = format!("{} {}\n", code.n(), code.k());
    for row in code.parity_check().rows() {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}

/// Parses the parity-check text format. If the rows are rank deficient the
/// dependent rows are dropped and `k` grows accordingly.
pub fn load_parity_check(name: &str, text: &str) -> Result<LinearCode, CodeError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(CodeError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| CodeError::Parse {
            line: hline,
            msg: format!("header must be \"n k\", got {header:?}"),
        })?;
    let [n, k] = nums[..] else {
        return Err(CodeError::Parse {
            line: hline,
            msg: format!("header must be \"n k\", got {header:?}"),
        });
    };
    if n == 0 || k == 0 || k > n {
        return Err(CodeError::Parse {
            line: hline,
            msg: format!("need 0 < k <= n, got n={n} k={k}"),
        });
    }
    let mut rows = Vec::with_capacity(n - k);
    for (line, text) in lines {
        let row: BitVec = text.parse().map_err(|e: BitError| CodeError::Parse {
            line,
            msg: e.to_string(),
        })?;
        if row.len() != n {
            return Err(CodeError::Parse {
                line,
                msg: format!("row has {} bits, expected {n}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.len() != n - k {
        return Err(CodeError::Parse {
            line: hline,
            msg: format!("expected {} parity rows, found {}", n - k, rows.len()),
        });
    }
    let code = LinearCode::from_parity_check(name, BitMatrix::from_rows(n, rows)?)?;
    if code.k() != k {
        warn!(
            "{name}: parity-check matrix has rank {}; dimension adjusted from {k} to {}",
            n - code.k(),
            code.k()
        );
    }
    Ok(code)
}

/// Named codes understood by the CLI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeId {
    /// eBCH(128,106): `m = 7`, `t = 3`.
    Ebch128,
    /// eBCH(8,4), the extended Hamming code.
    Ebch8,
    /// PAC(64,44) with the bundled profile and `[1 0 1 1 0 1 1]` precoding.
    Pac64,
    File(PathBuf),
}

impl CodeId {
    pub fn build(&self) -> Result<LinearCode, CodeError> {
        match self {
            CodeId::Ebch128 => build_ebch(7, 3),
            CodeId::Ebch8 => build_ebch(3, 1),
            CodeId::Pac64 => build_pac(&RateProfile::pac64_default(), &PAC_POLY.parse()?),
            CodeId::File(path) => load_parity_check_file(path),
        }
    }
}

impl FromStr for CodeId {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ebch128" => Ok(CodeId::Ebch128),
            "ebch8" => Ok(CodeId::Ebch8),
            "pac64" => Ok(CodeId::Pac64),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(CodeId::File(PathBuf::from(path))),
                _ => Err(CodeError::UnknownCode(s.to_string())),
            },
        }
    }
}

impl fmt::Display for CodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeId::Ebch128 => f.write_str("ebch128"),
            CodeId::Ebch8 => f.write_str("ebch8"),
            CodeId::Pac64 => f.write_str("pac64"),
            CodeId::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

pub fn load_parity_check_file(path: &Path) -> Result<LinearCode, CodeError> {
    let text = std::fs::read_to_string(path).map_err(|source| CodeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".into());
    load_parity_check(&name, &text)
}
