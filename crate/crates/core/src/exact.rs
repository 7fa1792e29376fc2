//! Exact integer linear algebra: Bareiss determinants, rank, adjugates and the
//! Hadamard bound for (0,1) matrices.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::bitmat::{BitMatrix, SignMatrix};
use crate::error::{Error, Result};

/// A square matrix with exact `i128` entries, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    order: usize,
    entries: Vec<i128>,
}

impl IntMatrix {
    pub fn new(order: usize, entries: Vec<i128>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::Dimension {
                expected: order * order,
                found: entries.len(),
            });
        }
        Ok(IntMatrix { order, entries })
    }

    pub fn zero(order: usize) -> Self {
        IntMatrix {
            order,
            entries: vec![0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = IntMatrix::zero(order);
        for i in 0..order {
            m.set(i, i, 1);
        }
        m
    }

    pub fn diagonal(diag: &[i128]) -> Self {
        let mut m = IntMatrix::zero(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.entries[i * self.order + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.entries[i * self.order + j] = v;
    }

    pub fn entries(&self) -> &[i128] {
        &self.entries
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.order;
        let mut t = IntMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Checked matrix product.
    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        let n = self.order;
        if other.order != n {
            return Err(Error::Dimension {
                expected: n,
                found: other.order,
            });
        }
        let mut out = IntMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    let term = self
                        .get(i, k)
                        .checked_mul(other.get(k, j))
                        .ok_or(Error::Overflow("matrix product"))?;
                    acc = acc
                        .checked_add(term)
                        .ok_or(Error::Overflow("matrix product"))?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            let n = self.order;
            for j in 0..n {
                self.entries.swap(a * n + j, b * n + j);
            }
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            let n = self.order;
            for i in 0..n {
                self.entries.swap(i * n + a, i * n + b);
            }
        }
    }
}

/// Anything viewable as a square integer matrix.
pub trait IntEntries {
    fn order(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> i128;

    fn to_int_matrix(&self) -> IntMatrix {
        let n = self.order();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.entry(i, j));
            }
        }
        IntMatrix { order: n, entries }
    }
}

impl IntEntries for BitMatrix {
    fn order(&self) -> usize {
        BitMatrix::order(self)
    }
    fn entry(&self, i: usize, j: usize) -> i128 {
        self.get(i, j) as i128
    }
}

impl IntEntries for SignMatrix {
    fn order(&self) -> usize {
        SignMatrix::order(self)
    }
    fn entry(&self, i: usize, j: usize) -> i128 {
        self.get(i, j) as i128
    }
}

impl IntEntries for IntMatrix {
    fn order(&self) -> usize {
        self.order
    }
    fn entry(&self, i: usize, j: usize) -> i128 {
        self.get(i, j)
    }
    fn to_int_matrix(&self) -> IntMatrix {
        self.clone()
    }
}

/// Fraction-free elimination in place. Returns the rank and, for a full-rank
/// square input, the determinant. Every intermediate is a minor of the input,
/// so all divisions are exact.
fn bareiss(a: &mut [i128], n: usize) -> Result<(usize, i128)> {
    let mut prev: i128 = 1;
    let mut sign: i128 = 1;
    let mut rank = 0;
    // Column-by-column; `rank` is the current pivot row.
    for col in 0..n {
        let Some(p) = (rank..n).find(|&r| a[r * n + col] != 0) else {
            continue;
        };
        if p != rank {
            for j in 0..n {
                a.swap(p * n + j, rank * n + j);
            }
            sign = -sign;
        }
        let pivot = a[rank * n + col];
        for r in rank + 1..n {
            let factor = a[r * n + col];
            for j in col + 1..n {
                let lhs = a[r * n + j]
                    .checked_mul(pivot)
                    .ok_or(Error::Overflow("determinant"))?;
                let rhs = factor
                    .checked_mul(a[rank * n + j])
                    .ok_or(Error::Overflow("determinant"))?;
                a[r * n + j] = lhs.checked_sub(rhs).ok_or(Error::Overflow("determinant"))? / prev;
            }
            a[r * n + col] = 0;
        }
        prev = pivot;
        rank += 1;
    }
    let det = if rank == n {
        if n == 0 {
            1
        } else {
            sign * a[(n - 1) * n + (n - 1)]
        }
    } else {
        0
    };
    Ok((rank, det))
}

/// Exact determinant; overflow of the 128-bit intermediates is reported.
pub fn determinant<M: IntEntries + ?Sized>(a: &M) -> Result<i128> {
    let mut m = a.to_int_matrix();
    let n = m.order;
    Ok(bareiss(&mut m.entries, n)?.1)
}

/// Rank over the rationals.
pub fn rank<M: IntEntries + ?Sized>(a: &M) -> Result<usize> {
    let mut m = a.to_int_matrix();
    let n = m.order;
    Ok(bareiss(&mut m.entries, n)?.0)
}

/// `adj(A)`: entry `(j, i)` is the cofactor of `(i, j)`, so `A·adj(A) = det(A)·I`.
/// Each cofactor is its own Bareiss determinant, which works for singular `A`.
pub fn adjugate<M: IntEntries + ?Sized>(a: &M) -> Result<IntMatrix> {
    let m = a.to_int_matrix();
    let n = m.order;
    let mut adj = IntMatrix::zero(n);
    if n == 0 {
        return Ok(adj);
    }
    if n == 1 {
        adj.set(0, 0, 1);
        return Ok(adj);
    }
    let mut minor = vec![0i128; (n - 1) * (n - 1)];
    for i in 0..n {
        for j in 0..n {
            let mut k = 0;
            for r in (0..n).filter(|&r| r != i) {
                for c in (0..n).filter(|&c| c != j) {
                    minor[k] = m.get(r, c);
                    k += 1;
                }
            }
            let (_, d) = bareiss(&mut minor, n - 1)?;
            adj.set(j, i, if (i + j) % 2 == 0 { d } else { -d });
        }
    }
    Ok(adj)
}

/// The Hadamard-derived bound `|det A| <= 2^-n sqrt((n+1)^(n+1))` for (0,1)
/// matrices of order `n`, kept exact as the rational square
/// `(n+1)^(n+1) / 4^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardBound {
    pub order: usize,
    pub squared_numerator: BigUint,
    pub squared_denominator: BigUint,
    pub floor: BigUint,
}

impl HadamardBound {
    /// The floor as a machine integer when it fits.
    pub fn floor_u64(&self) -> Option<u64> {
        self.floor.to_u64()
    }
}

pub fn hadamard_bound(n: usize) -> HadamardBound {
    let num = BigUint::from(n as u64 + 1).pow(n as u32 + 1);
    let den = BigUint::from(4u32).pow(n as u32);
    let floor = num.sqrt() >> n;
    HadamardBound {
        order: n,
        squared_numerator: num,
        squared_denominator: den,
        floor,
    }
}
