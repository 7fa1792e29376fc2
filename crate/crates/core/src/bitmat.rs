//! Square (0,1) matrices with bit-packed rows.
//!
//! Row `i` is stored as a word whose bit for column `j` has weight
//! `2^(n-1-j)`: the leftmost column is the most significant bit. With this
//! convention comparing row-word sequences is exactly the lexicographic
//! order on matrices, and the hex encoding of a row is the binary number read
//! left to right (`(3,5,6)` is `[[0,1,1],[1,0,1],[1,1,0]]`).

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Largest supported order; one machine word per row.
pub const MAX_ORDER: usize = 63;

#[inline]
pub(crate) fn row_mask(n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        u64::MAX >> (64 - n)
    }
}

#[inline]
pub(crate) fn col_bit(n: usize, j: usize) -> u64 {
    1u64 << (n - 1 - j)
}

/// A square (0,1) matrix of order `n <= 63`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMatrix {
    // Field order matters: the derived `Ord` compares the order first and then
    // the row words, which is the lexicographic order for equal orders.
    order: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    pub fn new(order: usize, rows: Vec<u64>) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::MalformedMatrix(format!(
                "order {order} exceeds the maximum {MAX_ORDER}"
            )));
        }
        if rows.len() != order {
            return Err(Error::Dimension {
                expected: order,
                found: rows.len(),
            });
        }
        let mask = row_mask(order);
        if let Some((i, w)) = rows.iter().enumerate().find(|(_, &w)| w & !mask != 0) {
            return Err(Error::MalformedMatrix(format!(
                "row {i} value {w:X} does not fit in {order} columns"
            )));
        }
        Ok(BitMatrix { order, rows })
    }

    pub(crate) fn from_rows_unchecked(order: usize, rows: Vec<u64>) -> Self {
        debug_assert!(rows.len() == order && rows.iter().all(|&w| w & !row_mask(order) == 0));
        BitMatrix { order, rows }
    }

    pub fn zero(order: usize) -> Self {
        BitMatrix {
            order,
            rows: vec![0; order],
        }
    }

    /// `J_n`, the all-ones matrix.
    pub fn ones(order: usize) -> Self {
        BitMatrix {
            order,
            rows: vec![row_mask(order); order],
        }
    }

    pub fn identity(order: usize) -> Self {
        BitMatrix {
            order,
            rows: (0..order).map(|i| col_bit(order, i)).collect(),
        }
    }

    /// Builds a matrix from nested 0/1 rows.
    pub fn from_bits<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut words = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            let mut w = 0u64;
            for (j, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => w |= col_bit(n, j),
                    other => {
                        return Err(Error::MalformedMatrix(format!(
                            "entry ({i},{j}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
            words.push(w);
        }
        BitMatrix::new(n, words)
    }

    /// Parses one hex word per row; the order is the number of rows.
    pub fn from_hex<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let n = rows.len();
        if n > MAX_ORDER {
            return Err(Error::MalformedMatrix(format!(
                "order {n} exceeds the maximum {MAX_ORDER}"
            )));
        }
        let words = rows
            .iter()
            .map(|s| {
                let s = s.as_ref().trim();
                u64::from_str_radix(s, 16)
                    .map_err(|_| Error::Parse(format!("invalid hex row word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        BitMatrix::new(n, words)
    }

    /// Parses the text form `3,5,6` (surrounding parentheses/brackets allowed).
    pub fn parse_hex_line(line: &str) -> Result<Self> {
        let body = line
            .trim()
            .trim_start_matches(['(', '['])
            .trim_end_matches([')', ']']);
        if body.trim().is_empty() {
            return BitMatrix::new(0, Vec::new());
        }
        let parts: Vec<&str> = body.split(',').collect();
        BitMatrix::from_hex(&parts)
    }

    pub fn to_hex(&self) -> Vec<String> {
        self.rows.iter().map(|w| format!("{w:X}")).collect()
    }

    /// Comma-separated uppercase hex, the interchange text format.
    pub fn to_hex_line(&self) -> String {
        self.to_hex().join(",")
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] & col_bit(self.order, j) != 0
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let bit = col_bit(self.order, j);
        if value {
            self.rows[i] |= bit;
        } else {
            self.rows[i] &= !bit;
        }
    }

    pub fn ones_count(&self) -> u32 {
        self.rows.iter().map(|w| w.count_ones()).sum()
    }

    /// Column `j` as a word in the row convention (row 0 is the top bit).
    pub fn column_word(&self, j: usize) -> u64 {
        let n = self.order;
        let bit = col_bit(n, j);
        self.rows.iter().enumerate().fold(0, |acc, (i, &w)| {
            if w & bit != 0 {
                acc | col_bit(n, i)
            } else {
                acc
            }
        })
    }

    pub fn transpose(&self) -> BitMatrix {
        BitMatrix {
            order: self.order,
            rows: (0..self.order).map(|j| self.column_word(j)).collect(),
        }
    }

    /// Lexicographic comparison: the first differing row decides, and within
    /// it the leftmost differing column.
    pub fn lex_compare(&self, other: &BitMatrix) -> Result<Ordering> {
        if self.order != other.order {
            return Err(Error::Dimension {
                expected: self.order,
                found: other.order,
            });
        }
        Ok(self.rows.cmp(&other.rows))
    }

    /// `P·A·Q`: row `k` of `A` moves to position `P(k)`, column `k` to `Q(k)`.
    pub fn apply_perms(&self, p: &Perm, q: &Perm) -> Result<BitMatrix> {
        let n = self.order;
        for perm in [p, q] {
            if perm.order() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: perm.order(),
                });
            }
        }
        let mut rows = vec![0u64; n];
        for (k, &w) in self.rows.iter().enumerate() {
            rows[p.image(k)] = permute_columns(w, n, q);
        }
        Ok(BitMatrix { order: n, rows })
    }

    /// The ±1 matrix of order `n+1`: zeros become −1, a row of −1's is added on
    /// top and a column of 1's on the right. `det Ψ(A) = (−1)^n 2^n det A`.
    pub fn psi_embed(&self) -> SignMatrix {
        let n = self.order;
        let m = n + 1;
        let mut entries = vec![1i8; m * m];
        entries[..n].fill(-1);
        for i in 0..n {
            for j in 0..n {
                entries[(i + 1) * m + j] = if self.get(i, j) { 1 } else { -1 };
            }
        }
        SignMatrix { order: m, entries }
    }

    /// `X_i A` for `1 <= i <= n` (1-based, as in the literature): every row
    /// other than row `i` is XORed with row `i`. `X_0` is the identity.
    pub fn xi_row(&self, i: usize) -> Result<BitMatrix> {
        let n = self.order;
        if i > n {
            return Err(Error::IndexOutOfRange { index: i, order: n });
        }
        if i == 0 {
            return Ok(self.clone());
        }
        let pivot = self.rows[i - 1];
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(k, &w)| if k == i - 1 { w } else { w ^ pivot })
            .collect();
        Ok(BitMatrix { order: n, rows })
    }

    /// `A X_j = (X_j Aᵀ)ᵀ`, computed directly on the row words.
    pub fn xi_col(&self, j: usize) -> Result<BitMatrix> {
        let n = self.order;
        if j > n {
            return Err(Error::IndexOutOfRange { index: j, order: n });
        }
        if j == 0 {
            return Ok(self.clone());
        }
        let bit = col_bit(n, j - 1);
        let others = row_mask(n) & !bit;
        let rows = self
            .rows
            .iter()
            .map(|&w| if w & bit != 0 { w ^ others } else { w })
            .collect();
        Ok(BitMatrix { order: n, rows })
    }

    /// The order-`n+1` matrix `[[A, y], [x, b]]` (new row at the bottom, new
    /// column at the right). `y` uses the row convention: its bit for row `i`
    /// has weight `2^(n-1-i)`.
    pub fn bordered(&self, x: u64, y: u64, b: bool) -> Result<BitMatrix> {
        let n = self.order;
        if n + 1 > MAX_ORDER {
            return Err(Error::MalformedMatrix(format!(
                "extension of order {} exceeds the maximum",
                n + 1
            )));
        }
        let mask = row_mask(n);
        if x & !mask != 0 || y & !mask != 0 {
            return Err(Error::MalformedMatrix(format!(
                "border words {x:X}/{y:X} do not fit order {n}"
            )));
        }
        let mut rows: Vec<u64> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, &w)| (w << 1) | ((y >> (n - 1 - i)) & 1))
            .collect();
        rows.push((x << 1) | b as u64);
        Ok(BitMatrix { order: n + 1, rows })
    }

    /// The upper-left `k × k` submatrix.
    pub fn leading_minor(&self, k: usize) -> Result<BitMatrix> {
        let n = self.order;
        if k > n {
            return Err(Error::IndexOutOfRange { index: k, order: n });
        }
        let rows = self.rows[..k].iter().map(|&w| w >> (n - k)).collect();
        Ok(BitMatrix { order: k, rows })
    }

    /// The matrix with row `r` and column `c` deleted.
    pub fn minor(&self, r: usize, c: usize) -> Result<BitMatrix> {
        let n = self.order;
        if r >= n || c >= n {
            return Err(Error::IndexOutOfRange {
                index: r.max(c),
                order: n,
            });
        }
        let shift = n - 1 - c;
        let low = (1u64 << shift) - 1;
        let rows = self
            .rows
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != r)
            .map(|(_, &w)| ((w >> (shift + 1)) << shift) | (w & low))
            .collect();
        Ok(BitMatrix { order: n - 1, rows })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({})", self.to_hex_line())
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.order {
            let line: Vec<&str> = (0..self.order)
                .map(|j| if self.get(i, j) { "1" } else { "0" })
                .collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Moves column `k` of the row word `w` to position `q(k)`.
pub(crate) fn permute_columns(w: u64, n: usize, q: &Perm) -> u64 {
    let mut out = 0;
    let mut rest = w;
    while rest != 0 {
        let bit = 63 - rest.leading_zeros() as usize;
        rest &= !(1u64 << bit);
        let k = n - 1 - bit;
        out |= col_bit(n, q.image(k));
    }
    out
}

/// A ±1 matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    order: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(order: usize, entries: Vec<i8>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::Dimension {
                expected: order * order,
                found: entries.len(),
            });
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::MalformedMatrix("entries must be ±1".into()));
        }
        Ok(SignMatrix { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.order + j]
    }
}

/// A permutation of `{0, …, n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &k in &images {
            if k >= n || std::mem::replace(&mut seen[k], true) {
                return Err(Error::MalformedMatrix(format!(
                    "{images:?} is not a permutation"
                )));
            }
        }
        Ok(Perm { images })
    }

    pub fn identity(n: usize) -> Self {
        Perm {
            images: (0..n).collect(),
        }
    }

    /// The permutation sending `order[pos]` to `pos`.
    pub(crate) fn from_positions(order: &[u8]) -> Self {
        let mut images = vec![0; order.len()];
        for (pos, &src) in order.iter().enumerate() {
            images[src as usize] = pos;
        }
        Perm { images }
    }

    /// Swaps `i` and `j` (the transposition behind `P_{i,j}`).
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                order: n,
            });
        }
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, j);
        Ok(Perm { images })
    }

    pub fn order(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn image(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (k, &v) in self.images.iter().enumerate() {
            images[v] = k;
        }
        Perm { images }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Perm) -> Perm {
        Perm {
            images: inner.images.iter().map(|&k| self.images[k]).collect(),
        }
    }

    /// All permutations of order `n` in lexicographic order of their image
    /// vectors. Intended for brute-force checks at small orders.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Perm {
                images: cur.clone(),
            });
            // next_permutation
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

/// Parses a list of matrices, one per line; blank lines and `#` comments are
/// skipped.
pub fn parse_matrix_list(text: &str) -> Result<Vec<BitMatrix>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(no, l)| {
            BitMatrix::parse_hex_line(l).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))
        })
        .collect()
}

/// True when `set` is strictly increasing and all orders agree.
pub fn is_sorted_set(set: &[BitMatrix]) -> bool {
    set.windows(2)
        .all(|w| w[0].order == w[1].order && w[0].rows < w[1].rows)
}

/// Reads a matrix-set file: one matrix per line, lex-sorted, no duplicates.
pub fn read_matrix_set(path: &Path) -> Result<Vec<BitMatrix>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    for line in std::io::BufReader::new(file).lines() {
        text.push_str(&line.map_err(|e| Error::io(path, e))?);
        text.push('\n');
    }
    let set = parse_matrix_list(&text)?;
    if !is_sorted_set(&set) {
        return Err(Error::Parse(format!(
            "{}: matrix set is not sorted and duplicate-free",
            path.display()
        )));
    }
    Ok(set)
}

pub fn write_matrix_list<W: Write + ?Sized>(
    out: &mut W,
    matrices: &[BitMatrix],
) -> std::io::Result<()> {
    for m in matrices {
        writeln!(out, "{}", m.to_hex_line())?;
    }
    Ok(())
}

pub fn write_matrix_set(path: &Path, set: &[BitMatrix]) -> Result<()> {
    if !is_sorted_set(set) {
        return Err(Error::Contract(
            "matrix set must be sorted and duplicate-free".into(),
        ));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_matrix_list(&mut w, set)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::determinant;
    use proptest::prelude::*;

    fn arb_matrix(max_n: usize) -> impl Strategy<Value = BitMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(0..=row_mask(n), n)
                .prop_map(move |rows| BitMatrix::new(n, rows).unwrap())
        })
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Perm> {
        Just((0..n).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Perm::new(v).unwrap())
    }

    #[test]
    fn hex_examples() {
        let m = BitMatrix::from_hex(&["3", "5", "6"]).unwrap();
        assert_eq!(
            m,
            BitMatrix::from_bits(&[[0, 1, 1], [1, 0, 1], [1, 1, 0]]).unwrap()
        );
        assert_eq!(
            BitMatrix::from_hex(&["0", "0", "0"]).unwrap(),
            BitMatrix::zero(3)
        );
        let t10 = BitMatrix::from_hex(&["7", "39", "5A", "9C", "E1", "149", "174", "193", "1AA"])
            .unwrap();
        assert_eq!(t10.order(), 9);
        assert_eq!(t10.to_hex_line(), "7,39,5A,9C,E1,149,174,193,1AA");
        // lower case accepted, upper case emitted
        assert_eq!(
            BitMatrix::parse_hex_line("1,6,a,c").unwrap().to_hex_line(),
            "1,6,A,C"
        );
    }

    #[test]
    fn hex_errors() {
        assert!(matches!(
            BitMatrix::from_hex(&["8", "0", "0"]),
            Err(Error::MalformedMatrix(_))
        ));
        assert!(matches!(
            BitMatrix::from_hex(&["g", "0"]),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn lex_examples() {
        let a = BitMatrix::from_bits(&[[1, 0], [1, 0]]).unwrap();
        let b = BitMatrix::from_bits(&[[1, 0], [1, 1]]).unwrap();
        assert_eq!(a.lex_compare(&b).unwrap(), Ordering::Less);
        assert_eq!(a.lex_compare(&a).unwrap(), Ordering::Equal);
        for n in 1..6 {
            assert_eq!(
                BitMatrix::zero(n).lex_compare(&BitMatrix::ones(n)).unwrap(),
                Ordering::Less
            );
        }
        assert!(BitMatrix::zero(2).lex_compare(&BitMatrix::zero(3)).is_err());
    }

    #[test]
    fn example_one_permutation() {
        // Swap first and last row, then first and last column.
        let a = BitMatrix::from_bits(&[[1, 0, 1], [1, 1, 0], [1, 0, 0]]).unwrap();
        let p = Perm::new(vec![2, 1, 0]).unwrap();
        let rep = a.apply_perms(&p, &p).unwrap();
        assert_eq!(
            rep,
            BitMatrix::from_bits(&[[0, 0, 1], [0, 1, 1], [1, 0, 1]]).unwrap()
        );
        assert_eq!(
            a.apply_perms(&Perm::identity(3), &Perm::identity(3))
                .unwrap(),
            a
        );
    }

    #[test]
    fn psi_small_cases() {
        let one = BitMatrix::from_bits(&[[1]]).unwrap();
        let b = one.psi_embed();
        assert_eq!(b, SignMatrix::new(2, vec![-1, 1, 1, 1]).unwrap());
        assert_eq!(determinant(&b).unwrap(), -2);
        assert_eq!(determinant(&BitMatrix::zero(2).psi_embed()).unwrap(), 0);
    }

    #[test]
    fn psi_determinant_law_exhaustive_small() {
        for n in 1..=3usize {
            for code in 0u64..(1 << (n * n)) {
                let rows = (0..n).map(|i| (code >> (i * n)) & row_mask(n)).collect();
                let a = BitMatrix::new(n, rows).unwrap();
                let da = determinant(&a).unwrap();
                let sign = if n % 2 == 0 { 1 } else { -1 };
                assert_eq!(
                    determinant(&a.psi_embed()).unwrap(),
                    sign * (1i128 << n) * da
                );
            }
        }
    }

    #[test]
    fn xi_identity_and_involution() {
        let a = BitMatrix::from_hex(&["3", "C", "15", "16", "19"]).unwrap();
        assert_eq!(a.xi_row(0).unwrap(), a);
        assert_eq!(a.xi_col(0).unwrap(), a);
        for i in 1..=5 {
            assert_eq!(a.xi_row(i).unwrap().xi_row(i).unwrap(), a);
            assert_eq!(a.xi_col(i).unwrap().xi_col(i).unwrap(), a);
        }
        assert!(a.xi_row(6).is_err());
        assert!(a.xi_col(6).is_err());
    }

    #[test]
    fn minors() {
        let a = BitMatrix::from_hex(&["3", "5", "9", "E"]).unwrap();
        assert_eq!(a.leading_minor(3).unwrap().to_hex_line(), "1,2,4");
        assert_eq!(a.minor(0, 0).unwrap().to_hex_line(), "5,1,6");
        assert_eq!(a.minor(3, 3).unwrap(), a.leading_minor(3).unwrap());
    }

    #[test]
    fn bordered_layout() {
        let b = BitMatrix::from_bits(&[[1, 0], [0, 1]]).unwrap();
        let a = b.bordered(0b10, 0b01, true).unwrap();
        assert_eq!(
            a,
            BitMatrix::from_bits(&[[1, 0, 0], [0, 1, 1], [1, 0, 1]]).unwrap()
        );
        assert_eq!(a.leading_minor(2).unwrap(), b);
    }

    #[test]
    fn matrix_set_text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.txt");
        let set = vec![
            BitMatrix::parse_hex_line("1,2,4").unwrap(),
            BitMatrix::parse_hex_line("3,5,6").unwrap(),
        ];
        write_matrix_set(&path, &set).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "1,2,4\n3,5,6\n");
        assert_eq!(read_matrix_set(&path).unwrap(), set);
        std::fs::write(&path, "3,5,6\n1,2,4\n").unwrap();
        assert!(read_matrix_set(&path).is_err());
    }

    #[test]
    fn perm_enumeration() {
        assert_eq!(Perm::all(0).len(), 1);
        assert_eq!(Perm::all(4).len(), 24);
    }

    proptest! {
        #[test]
        fn hex_round_trip(a in arb_matrix(12)) {
            prop_assert_eq!(BitMatrix::from_hex(&a.to_hex()).unwrap(), a.clone());
            prop_assert_eq!(BitMatrix::parse_hex_line(&a.to_hex_line()).unwrap(), a);
        }

        #[test]
        fn lex_is_total_order((a, b, c) in (1usize..=4).prop_flat_map(|n| {
            let m = move || proptest::collection::vec(0..=row_mask(n), n)
                .prop_map(move |r| BitMatrix::new(n, r).unwrap());
            (m(), m(), m())
        })) {
            let ab = a.lex_compare(&b).unwrap();
            prop_assert_eq!(ab.reverse(), b.lex_compare(&a).unwrap());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
            if ab != Ordering::Greater && b.lex_compare(&c).unwrap() != Ordering::Greater {
                prop_assert_ne!(a.lex_compare(&c).unwrap(), Ordering::Greater);
            }
        }

        #[test]
        fn perms_form_a_group_action(
            (a, p1, q1, p2, q2) in (1usize..=7).prop_flat_map(|n| (
                proptest::collection::vec(0..=row_mask(n), n)
                    .prop_map(move |r| BitMatrix::new(n, r).unwrap()),
                arb_perm(n), arb_perm(n), arb_perm(n), arb_perm(n)))
        ) {
            let step = a.apply_perms(&p1, &q1).unwrap().apply_perms(&p2, &q2).unwrap();
            let once = a.apply_perms(&p2.compose(&p1), &q2.compose(&q1)).unwrap();
            prop_assert_eq!(&step, &once);
            let back = step.apply_perms(&p2.compose(&p1).inverse(), &q2.compose(&q1).inverse()).unwrap();
            prop_assert_eq!(&back, &a);
            prop_assert_eq!(determinant(&a).unwrap().abs(), determinant(&step).unwrap().abs());
        }

        #[test]
        fn psi_law_random((a, _) in (4usize..=6).prop_flat_map(|n| (
            proptest::collection::vec(0..=row_mask(n), n)
                .prop_map(move |r| BitMatrix::new(n, r).unwrap()), Just(n)))) {
            let n = a.order();
            let sign = if n % 2 == 0 { 1 } else { -1 };
            prop_assert_eq!(
                determinant(&a.psi_embed()).unwrap(),
                sign * (1i128 << n) * determinant(&a).unwrap()
            );
        }

        #[test]
        fn xi_transforms_preserve_abs_det(a in arb_matrix(6), k in 0usize..=6) {
            let n = a.order();
            let i = k % (n + 1);
            let d = determinant(&a).unwrap().abs();
            let r = a.xi_row(i).unwrap();
            let c = a.xi_col(i).unwrap();
            prop_assert_eq!(determinant(&r).unwrap().abs(), d);
            prop_assert_eq!(determinant(&c).unwrap().abs(), d);
            prop_assert_eq!(c.clone(), a.transpose().xi_row(i).unwrap().transpose());
            // entries stay in {0,1} by construction; the words stay in range
            prop_assert!(BitMatrix::new(n, r.rows().to_vec()).is_ok());
        }

        #[test]
        fn xi_composition_law(a in arb_matrix(6), i in 1usize..=6, j in 1usize..=6) {
            let n = a.order();
            prop_assume!(i <= n && j <= n && i != j);
            let lhs = a.xi_row(j).unwrap().xi_row(i).unwrap();
            let swap = Perm::transposition(n, i - 1, j - 1).unwrap();
            let rhs = a.xi_row(i).unwrap().apply_perms(&swap, &Perm::identity(n)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
