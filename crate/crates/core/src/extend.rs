//! Borders of a fixed matrix: all `[[B, y], [x, b]]` with the new row at the
//! bottom and the new column at the right.
//!
//! `det [[B, y], [x, b]] = b·det B − x·adj(B)·y`. For a fixed `x` the row
//! vector `w = x·adj(B)` is formed once; `y` then walks a reflected Gray code,
//! so each step changes the determinant by a single `±w_j`.

use std::collections::BTreeSet;

use crate::bitmat::{row_mask, BitMatrix};
use crate::error::{Error, Result};
use crate::exact::{adjugate, determinant, hadamard_bound};
use crate::snf::{snf_decomposition, ExtensionSnf, SnfVector};

/// A set of nonnegative integers stored as a bitmap.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdvSet {
    words: Vec<u64>,
}

impl AdvSet {
    pub fn with_capacity(max_value: u64) -> Self {
        AdvSet {
            words: vec![0; (max_value / 64 + 1) as usize],
        }
    }

    #[inline]
    pub fn insert(&mut self, v: u64) {
        let i = (v / 64) as usize;
        if i >= self.words.len() {
            self.words.resize(i + 1, 0);
        }
        self.words[i] |= 1 << (v % 64);
    }

    #[inline]
    pub fn contains(&self, v: u64) -> bool {
        self.words
            .get((v / 64) as usize)
            .is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    /// Smallest nonnegative integer not in the set.
    pub fn first_missing(&self) -> u64 {
        self.first_missing_from(0)
    }

    /// Smallest integer `>= start` not in the set.
    pub fn first_missing_from(&self, start: u64) -> u64 {
        let mut i = (start / 64) as usize;
        let mut mask = !0u64 << (start % 64);
        while i < self.words.len() {
            let free = !self.words[i] & mask;
            if free != 0 {
                return i as u64 * 64 + free.trailing_zeros() as u64;
            }
            i += 1;
            mask = !0;
        }
        i as u64 * 64
    }

    pub fn max(&self) -> Option<u64> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i as u64 * 64 + 63 - w.leading_zeros() as u64)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &AdvSet) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let t = rest.trailing_zeros() as u64;
                rest &= rest - 1;
                Some(i as u64 * 64 + t)
            })
        })
    }
}

impl FromIterator<u64> for AdvSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut s = AdvSet::default();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

/// Determinant data of one base matrix, ready for border sweeps.
#[derive(Clone, Debug)]
pub struct BorderDets {
    order: usize,
    det: i64,
    /// `adj[i][j]` as `i64`.
    adj: Vec<Vec<i64>>,
}

impl BorderDets {
    pub fn new(base: &BitMatrix) -> Result<Self> {
        let m = base.order();
        let det = determinant(base)?;
        let adj = adjugate(base)?;
        let narrow = |v: i128| i64::try_from(v).map_err(|_| Error::Overflow("border determinant"));
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            rows.push(
                (0..m)
                    .map(|j| narrow(adj.get(i, j)))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        // Every border determinant is bounded by |det B| + Σ|adj|.
        let total = rows
            .iter()
            .flatten()
            .try_fold(det.unsigned_abs(), |acc, &v| {
                acc.checked_add(v.unsigned_abs() as u128)
            });
        match total {
            Some(t) if t <= i64::MAX as u128 => {}
            _ => return Err(Error::Overflow("border determinant")),
        }
        Ok(BorderDets {
            order: m,
            det: det as i64,
            adj: rows,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    /// `w = x·adj(B)`, indexed by the row of `y`.
    pub fn row_weights(&self, x: u64) -> Vec<i64> {
        let m = self.order;
        let mut w = vec![0i64; m];
        for i in 0..m {
            if x >> (m - 1 - i) & 1 == 1 {
                for (acc, &v) in w.iter_mut().zip(&self.adj[i]) {
                    *acc += v;
                }
            }
        }
        w
    }

    /// `adj(B)·y`, indexed by the column of `x`.
    pub fn col_weights(&self, y: u64) -> Vec<i64> {
        let m = self.order;
        let mut u = vec![0i64; m];
        for (i, acc) in u.iter_mut().enumerate() {
            for j in 0..m {
                if y >> (m - 1 - j) & 1 == 1 {
                    *acc += self.adj[i][j];
                }
            }
        }
        u
    }

    /// Calls `f(x, y, b, det)` for all `2^(2m+1)` borders. For each `x`, `y`
    /// runs through the reflected Gray code starting at 0.
    pub fn for_each(&self, mut f: impl FnMut(u64, u64, bool, i64)) {
        let m = self.order;
        for x in 0..1u64 << m {
            let w = self.row_weights(x);
            let mut y = 0u64;
            let mut d0 = 0i64;
            f(x, y, false, d0);
            f(x, y, true, d0 + self.det);
            for k in 1..1u64 << m {
                let t = k.trailing_zeros();
                y ^= 1 << t;
                let wj = w[m - 1 - t as usize];
                if y >> t & 1 == 1 {
                    d0 -= wj;
                } else {
                    d0 += wj;
                }
                f(x, y, false, d0);
                f(x, y, true, d0 + self.det);
            }
        }
    }

    /// Marks `|det|` of every border in `covered`.
    pub fn cover(&self, covered: &mut AdvSet) {
        self.for_each(|_, _, _, d| covered.insert(d.unsigned_abs()));
    }
}

/// Streams `(x, y, b, det)` for every border of `base`.
pub fn enumerate_extension_dets(
    base: &BitMatrix,
    f: impl FnMut(u64, u64, bool, i64),
) -> Result<()> {
    BorderDets::new(base)?.for_each(f);
    Ok(())
}

/// The set of `|det|` over all borders of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionSpectrum {
    pub base: BitMatrix,
    pub covered: AdvSet,
    pub first_missing: u64,
}

pub fn extension_spectrum(base: &BitMatrix) -> Result<ExtensionSpectrum> {
    let dets = BorderDets::new(base)?;
    let cap = hadamard_bound(base.order() + 1)
        .floor_u64()
        .unwrap_or(1 << 20);
    let mut covered = AdvSet::with_capacity(cap);
    dets.cover(&mut covered);
    Ok(ExtensionSpectrum {
        base: base.clone(),
        first_missing: covered.first_missing(),
        covered,
    })
}

/// SNFs of all borders, from one decomposition of the base.
pub fn extension_snf_set(base: &BitMatrix) -> Result<BTreeSet<SnfVector>> {
    let m = base.order();
    let ext = ExtensionSnf::new(&snf_decomposition(base)?)?;
    let mut out = BTreeSet::new();
    for x in 0..=row_mask(m) {
        for y in 0..=row_mask(m) {
            for b in [false, true] {
                out.insert(ext.snf(x, y, b)?);
            }
        }
    }
    Ok(out)
}

/// `f_1 = f_2 = 1`, `f_n = f_{n-1} + f_{n-2}`; `f_0 = 0`.
pub fn fibonacci(n: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

/// The order-`n` matrix with a 1 at `(i, j)` iff `j − i` is −1 or a
/// nonnegative even number; its determinant is `f_n`.
pub fn fibonacci_matrix(n: usize) -> BitMatrix {
    let mut a = BitMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            let d = j as i64 - i as i64;
            if d == -1 || (d >= 0 && d % 2 == 0) {
                a.set(i, j, true);
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rank;
    use crate::snf::smith_normal_form;
    use proptest::prelude::*;

    fn all_matrices(n: usize) -> impl Iterator<Item = BitMatrix> {
        (0u64..1 << (n * n)).map(move |code| {
            let rows = (0..n).map(|i| (code >> (i * n)) & row_mask(n)).collect();
            BitMatrix::new(n, rows).unwrap()
        })
    }

    fn check_stream(base: &BitMatrix) {
        let m = base.order();
        let mut seen = 0usize;
        let mut prev: Option<(u64, u64)> = None;
        enumerate_extension_dets(base, |x, y, b, d| {
            let full = base.bordered(x, y, b).unwrap();
            assert_eq!(
                d as i128,
                determinant(&full).unwrap(),
                "{base:?} x={x} y={y} b={b}"
            );
            if let Some((px, py)) = prev {
                if px == x && py != y {
                    assert_eq!((py ^ y).count_ones(), 1);
                }
            }
            prev = Some((x, y));
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, 1 << (2 * m + 1));
    }

    #[test]
    fn adv_set_basics() {
        let s: AdvSet = [0u64, 1, 2, 4, 70].into_iter().collect();
        assert_eq!(s.first_missing(), 3);
        assert_eq!(s.first_missing_from(4), 5);
        assert_eq!(s.max(), Some(70));
        assert_eq!(s.len(), 5);
        assert_eq!(s.iter().collect::<Vec<_>>(), [0, 1, 2, 4, 70]);
        let full: AdvSet = (0..64).collect();
        assert_eq!(full.first_missing(), 64);
        assert_eq!(AdvSet::default().max(), None);
    }

    #[test]
    fn one_by_one_borders() {
        let one = BitMatrix::parse_hex_line("1").unwrap();
        let mut found = None;
        enumerate_extension_dets(&one, |x, y, b, d| {
            if x == 1 && y == 1 && !b {
                found = Some(d);
            }
        })
        .unwrap();
        assert_eq!(found, Some(-1));
        let s = extension_spectrum(&one).unwrap();
        assert_eq!(s.covered.iter().collect::<Vec<_>>(), [0, 1]);
    }

    #[test]
    fn empty_and_zero_bases() {
        let empty = BitMatrix::zero(0);
        let s = extension_spectrum(&empty).unwrap();
        assert_eq!(s.covered.iter().collect::<Vec<_>>(), [0, 1]);
        // [[0,1],[1,0]] borders the order-1 zero matrix; from order 2 on a
        // zero block of order n in n+1 rows forces rank <= 2 < n+1.
        let s = extension_spectrum(&BitMatrix::zero(1)).unwrap();
        assert_eq!(s.first_missing, 2);
        for n in 2..6 {
            let s = extension_spectrum(&BitMatrix::zero(n)).unwrap();
            assert_eq!(s.covered.iter().collect::<Vec<_>>(), [0]);
            assert_eq!(s.first_missing, 1);
        }
    }

    #[test]
    fn stream_matches_direct_exhaustive() {
        for m in 1..=3 {
            for base in all_matrices(m) {
                check_stream(&base);
            }
        }
    }

    #[test]
    fn table_ten_seed() {
        let seed = BitMatrix::parse_hex_line("7,39,5A,9C,E1,149,174,193,1AA").unwrap();
        let s = extension_spectrum(&seed).unwrap();
        assert_eq!(s.first_missing, 257);
    }

    #[test]
    fn fibonacci_matrices() {
        assert_eq!(fibonacci_matrix(1), BitMatrix::parse_hex_line("1").unwrap());
        assert_eq!(fibonacci(3), 2);
        for n in 1..=12 {
            assert_eq!(
                determinant(&fibonacci_matrix(n)).unwrap(),
                fibonacci(n) as i128
            );
        }
        assert_eq!(fibonacci(12), 144);
        let s = extension_spectrum(&fibonacci_matrix(9)).unwrap();
        assert!(s.first_missing >= 2 * fibonacci(9));
    }

    #[test]
    fn snf_sets() {
        for base in all_matrices(3) {
            let fast = extension_snf_set(&base).unwrap();
            let mut direct = BTreeSet::new();
            for x in 0..8 {
                for y in 0..8 {
                    for b in [false, true] {
                        direct.insert(smith_normal_form(&base.bordered(x, y, b).unwrap()).unwrap());
                    }
                }
            }
            assert_eq!(fast, direct);
        }
        // A unimodular base only yields SNFs (1^m, d).
        let set = extension_snf_set(&BitMatrix::identity(4)).unwrap();
        assert!(set.iter().all(|s| s.diag()[..4].iter().all(|&d| d == 1)));
    }

    proptest! {
        #[test]
        fn stream_matches_direct_random(
            base in (4usize..=6).prop_flat_map(|n| proptest::collection::vec(0..=row_mask(n), n)
                .prop_map(move |r| BitMatrix::new(n, r).unwrap()))
        ) {
            let m = base.order();
            let dets = BorderDets::new(&base).unwrap();
            let mut bad = 0;
            let mut k = 0u64;
            dets.for_each(|x, y, b, d| {
                // Spot-check a stride of borders; the full sweep is exhaustive below order 4.
                k += 1;
                if k % 61 == 0 && determinant(&base.bordered(x, y, b).unwrap()).unwrap() != d as i128 {
                    bad += 1;
                }
            });
            prop_assert_eq!(bad, 0);
            prop_assert_eq!(k, 1u64 << (2 * m + 1));
        }

        #[test]
        fn rank_window_on_borders(
            base in (1usize..=5).prop_flat_map(|n| proptest::collection::vec(0..=row_mask(n), n)
                .prop_map(move |r| BitMatrix::new(n, r).unwrap())),
            x in any::<u64>(), y in any::<u64>(), b in any::<bool>()
        ) {
            let m = base.order();
            let (x, y) = (x & row_mask(m), y & row_mask(m));
            let r = rank(&base).unwrap();
            let ext = base.bordered(x, y, b).unwrap();
            let r2 = rank(&ext).unwrap();
            prop_assert!(r <= r2 && r2 <= r + 2);
        }
    }
}
