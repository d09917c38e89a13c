//! Bit-exact GF(2) linear algebra.
//!
//! This is the golden reference the analog pipeline is validated against:
//! `y_i = XOR_j (a_ij AND x_j)`. Vectors and matrices are packed LSB-first
//! into 64-bit words; bits at positions `>= len` are always zero, so derived
//! equality is well defined.
//!
//! The `BMV1` text format (see [`write_matrix`] / [`read_matrix`]) is the
//! interchange contract: `BMV1 <rows> <cols>` on line 1, then one row of
//! `0`/`1` characters per line. Vectors are stored as 1-row matrices.

use crate::error::{FormatError, SimError};
use rand::Rng;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const WORD_BITS: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask selecting the valid bits of the last word of a `len`-bit vector.
fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A packed bit vector over GF(2). Bit `i` lives at `words[i/64] >> (i%64)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    /// Builds a vector from explicit bits, index 0 first.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parses a string of `0`/`1` characters, leftmost character = bit 0.
    pub fn from_str01(s: &str) -> Result<Self, SimError> {
        let mut v = Self::zeros(s.chars().count());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                _ => return Err(SimError::invalid(format!("invalid bit character {ch:?}"))),
            }
        }
        Ok(v)
    }

    /// Uniformly random vector, one word at a time.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut words: Vec<u64> = (0..words_for(len)).map(|_| rng.random()).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn hamming_weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Parity of the Hamming weight: the XOR of all bits.
    pub fn parity(&self) -> bool {
        // XOR-folding the words preserves total bit parity.
        let folded = self.words.iter().fold(0u64, |acc, w| acc ^ w);
        folded.count_ones() % 2 == 1
    }

    /// Elementwise XOR (addition in GF(2)). Lengths must match.
    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "xor: length mismatch");
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Self {
            words,
            len: self.len,
        }
    }

    /// Copies bits `range.start..range.end` into a new vector.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len, "slice out of range");
        let mut out = Self::zeros(end - start);
        for i in start..end {
            out.set(i - start, self.get(i));
        }
        out
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({})", self)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter_bits() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// A packed bit matrix, row-major. Each row obeys the [`BitVector`] padding
/// invariant and occupies `cols.div_ceil(64)` words.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = words_for(cols);
        Self {
            rows,
            cols,
            words_per_row,
            words: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let mut m = Self::zeros(rows, cols);
        let mask = tail_mask(cols);
        for r in 0..rows {
            for w in 0..m.words_per_row {
                let mut word: u64 = rng.random();
                if w + 1 == m.words_per_row {
                    word &= mask;
                }
                m.words[r * m.words_per_row + w] = word;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "index out of range");
        let w = row * self.words_per_row + col / WORD_BITS;
        (self.words[w] >> (col % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.rows && col < self.cols, "index out of range");
        let w = row * self.words_per_row + col / WORD_BITS;
        let mask = 1u64 << (col % WORD_BITS);
        if value {
            self.words[w] |= mask;
        } else {
            self.words[w] &= !mask;
        }
    }

    pub fn row_words(&self, row: usize) -> &[u64] {
        assert!(row < self.rows, "row {row} out of range");
        &self.words[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    /// Copies row `row` into a standalone vector.
    pub fn row_vector(&self, row: usize) -> BitVector {
        BitVector {
            words: self.row_words(row).to_vec(),
            len: self.cols,
        }
    }

    /// Extracts columns `start..end` of every row into a new matrix.
    pub fn column_slice(&self, start: usize, end: usize) -> Self {
        assert!(
            start <= end && end <= self.cols,
            "column slice out of range"
        );
        let mut out = Self::zeros(self.rows, end - start);
        for r in 0..self.rows {
            for c in start..end {
                if self.get(r, c) {
                    out.set(r, c - start, true);
                }
            }
        }
        out
    }
}

// Avoids dumping megabytes of bits for large matrices.
impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{})", self.rows, self.cols)
    }
}

/// The exact BMVM oracle: `result[i] = XOR_j (a[i][j] AND x[j])`.
///
/// Kernel: per row, AND the packed words against `x` and take the popcount
/// parity of the result. Correctness is fixed by the elementwise definition;
/// the word kernel is checked against it in the tests.
pub fn bmvm_exact(a: &BitMatrix, x: &BitVector) -> Result<BitVector, SimError> {
    if x.len() != a.cols() {
        return Err(SimError::Dimension {
            context: "bmvm operand width",
            expected: a.cols(),
            got: x.len(),
        });
    }
    let mut y = BitVector::zeros(a.rows());
    for row in 0..a.rows() {
        let folded = a
            .row_words(row)
            .iter()
            .zip(x.words())
            .fold(0u64, |acc, (aw, xw)| acc ^ (aw & xw));
        y.set(row, folded.count_ones() % 2 == 1);
    }
    Ok(y)
}

/// Free-function form of [`BitVector::parity`].
pub fn parity(x: &BitVector) -> bool {
    x.parity()
}

pub fn write_matrix(m: &BitMatrix, w: &mut impl Write) -> Result<(), FormatError> {
    writeln!(w, "BMV1 {} {}", m.rows(), m.cols())?;
    let mut line = String::with_capacity(m.cols());
    for r in 0..m.rows() {
        line.clear();
        for c in 0..m.cols() {
            line.push(if m.get(r, c) { '1' } else { '0' });
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_matrix(r: impl Read) -> Result<BitMatrix, FormatError> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| FormatError::MalformedHeader(String::new()))??;
    let mut parts = header.split_whitespace();
    let (magic, rows, cols) = (parts.next(), parts.next(), parts.next());
    let bad_header = || FormatError::MalformedHeader(header.clone());
    if magic != Some("BMV1") || parts.next().is_some() {
        return Err(bad_header());
    }
    let rows: usize = rows
        .ok_or_else(bad_header)?
        .parse()
        .map_err(|_| bad_header())?;
    let cols: usize = cols
        .ok_or_else(bad_header)?
        .parse()
        .map_err(|_| bad_header())?;

    let mut m = BitMatrix::zeros(rows, cols);
    let mut row = 0;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() && row == rows {
            continue; // tolerate a trailing blank line
        }
        if row == rows {
            return Err(FormatError::RowCount {
                expected: rows,
                got: row + 1,
            });
        }
        let got = line.chars().count();
        if got != cols {
            return Err(FormatError::RowLength {
                line: lineno + 2,
                expected: cols,
                got,
            });
        }
        for (c, ch) in line.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => m.set(row, c, true),
                _ => {
                    return Err(FormatError::BadChar {
                        line: lineno + 2,
                        ch,
                    })
                }
            }
        }
        row += 1;
    }
    if row != rows {
        return Err(FormatError::RowCount {
            expected: rows,
            got: row,
        });
    }
    Ok(m)
}

pub fn store_matrix(m: &BitMatrix, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(m, &mut w)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<BitMatrix, FormatError> {
    read_matrix(File::open(path)?)
}

/// Stores a vector using the 1-row matrix convention.
pub fn store_vector(v: &BitVector, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let mut m = BitMatrix::zeros(1, v.len());
    for (i, b) in v.iter_bits().enumerate() {
        m.set(0, i, b);
    }
    store_matrix(&m, path)
}

/// Loads a vector stored as a 1-row matrix. A matrix with any other row
/// count is rejected rather than truncated.
pub fn load_vector(path: impl AsRef<Path>) -> Result<BitVector, FormatError> {
    let m = load_matrix(path)?;
    if m.rows() != 1 {
        return Err(FormatError::RowCount {
            expected: 1,
            got: m.rows(),
        });
    }
    Ok(m.row_vector(0))
}
