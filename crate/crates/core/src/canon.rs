//! Canonical representatives under row/column permutations (π) and under the
//! larger group generated by permutations and the `X_i` transforms (φ).
//!
//! The π-representative is the lexicographically smallest matrix of the orbit.
//! It is found by a branch and bound over row choices: after `i` rows are
//! fixed, the columns fall into blocks that are still interchangeable, and the
//! best any remaining row can do is to push its ones to the right end of each
//! block (its *form*). Only rows whose form equals the smallest form are
//! branched on, and a branch is cut as soon as its prefix exceeds the best one
//! found so far.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bitmat::{row_mask, BitMatrix, Perm};

/// Output of the π-canonicalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalCert {
    pub rep: BitMatrix,
    pub p: Perm,
    pub q: Perm,
    /// Number of pairs `(P, Q)` with `P·A·Q = rep`.
    pub count: BigUint,
    /// Number of row permutations `P` for which some `Q` gives `P·A·Q = rep`.
    pub row_count: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CanonOptions {
    /// Complete highly symmetric tails directly instead of branching on them.
    pub symmetry: bool,
}

impl Default for CanonOptions {
    fn default() -> Self {
        CanonOptions { symmetry: true }
    }
}

#[derive(Clone, Default)]
struct Node {
    /// Row words by source row, columns in the current order.
    words: Vec<u64>,
    /// Source column at each position.
    cols: Vec<u8>,
    /// Interchangeable column blocks as contiguous bit masks, left to right.
    blocks: Vec<u64>,
    /// Bit `k` set while source row `k` is unplaced.
    remaining: u64,
}

/// Compacts the bits of `v` selected by `mask` into the low bits.
#[inline]
fn extract(v: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut k = 0;
    let mut m = mask;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if v & low != 0 {
            out |= 1 << k;
        }
        k += 1;
        m ^= low;
    }
    out
}

#[inline]
fn form(w: u64, blocks: &[u64]) -> u64 {
    let mut f = 0;
    for &b in blocks {
        let c = (w & b).count_ones();
        f |= ((1u64 << c) - 1) << b.trailing_zeros();
    }
    f
}

fn factorial(l: usize) -> BigUint {
    (1..=l as u64).fold(BigUint::one(), |acc, k| acc * k)
}

impl Node {
    fn root(a: &BitMatrix) -> Node {
        let n = a.order();
        Node {
            words: a.rows().to_vec(),
            cols: (0..n as u8).collect(),
            blocks: if n == 0 { vec![] } else { vec![row_mask(n)] },
            remaining: if n == 0 { 0 } else { u64::MAX >> (64 - n) },
        }
    }

    /// Fills `child` with this node after placing row `r`: every block is
    /// split into the columns where row `r` has zeros, then those with ones.
    fn refine_into(&self, r: usize, n: usize, child: &mut Node) {
        let w = self.words[r];
        child.words.clone_from(&self.words);
        child.cols.clone_from(&self.cols);
        child.blocks.clear();
        child.remaining = self.remaining & !(1u64 << r);
        for &b in &self.blocks {
            let z = b & !w;
            let o = b & w;
            if z == 0 || o == 0 {
                child.blocks.push(b);
                continue;
            }
            let lo = b.trailing_zeros();
            let co = o.count_ones();
            child.blocks.push(b & !((1u64 << (lo + co)) - 1));
            child.blocks.push(((1u64 << co) - 1) << lo);
            let mut rest = child.remaining;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let v = child.words[k];
                child.words[k] = (v & !b) | (extract(v, z) << (lo + co)) | (extract(v, o) << lo);
            }
            // Positions run left to right, bits high to low.
            let mut order = Vec::with_capacity(b.count_ones() as usize);
            for part in [z, o] {
                let mut m = part;
                while m != 0 {
                    let bit = 63 - m.leading_zeros();
                    m ^= 1u64 << bit;
                    order.push(self.cols[n - 1 - bit as usize]);
                }
            }
            let start = n - 1 - (63 - b.leading_zeros()) as usize;
            child.cols[start..start + order.len()].copy_from_slice(&order);
        }
        child.words[r] = form(w, &self.blocks);
    }
}

struct Search {
    n: usize,
    mask: u64,
    symmetry: bool,
    record: bool,
    best: Vec<u64>,
    leaves: BigUint,
    levels: Vec<Node>,
    path: Vec<u8>,
    rec_rows: Vec<u8>,
    rec_cols: Vec<u8>,
    /// Source row whose earliest position over minimal leaves is tracked.
    tracked: Option<usize>,
    tracked_pos: usize,
}

impl Search {
    fn new(n: usize, symmetry: bool, record: bool) -> Search {
        Search {
            n,
            mask: row_mask(n),
            symmetry,
            record,
            best: vec![row_mask(n); n],
            leaves: BigUint::zero(),
            levels: vec![Node::default(); n + 1],
            path: vec![0; n],
            rec_rows: Vec::new(),
            rec_cols: Vec::new(),
            tracked: None,
            tracked_pos: usize::MAX,
        }
    }

    fn reset_from(&mut self, depth: usize) {
        for b in &mut self.best[depth..] {
            *b = self.mask;
        }
        self.leaves.set_zero();
        self.tracked_pos = usize::MAX;
    }

    fn visit(&mut self, depth: usize) {
        let n = self.n;
        if depth == n {
            if self.leaves.is_zero() && self.record {
                self.rec_rows.clone_from(&self.path);
                self.rec_cols.clone_from(&self.levels[n].cols);
            }
            self.leaves += 1u32;
            if let Some(t) = self.tracked {
                if let Some(pos) = self.path.iter().position(|&r| r as usize == t) {
                    self.tracked_pos = self.tracked_pos.min(pos);
                }
            }
            return;
        }
        if self.symmetry && n - depth >= 2 && self.shortcut(depth) {
            return;
        }
        let node = &self.levels[depth];
        let mut m = u64::MAX;
        let mut cand = 0u64;
        let mut rest = node.remaining;
        while rest != 0 {
            let k = rest.trailing_zeros();
            rest &= rest - 1;
            let f = form(node.words[k as usize], &node.blocks);
            if f < m {
                m = f;
                cand = 1 << k;
            } else if f == m {
                cand |= 1 << k;
            }
        }
        if m > self.best[depth] {
            return;
        }
        if m < self.best[depth] {
            self.reset_from(depth);
            self.best[depth] = m;
        }
        while cand != 0 {
            let r = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            let (cur, next) = self.levels.split_at_mut(depth + 1);
            cur[depth].refine_into(r, n, &mut next[0]);
            self.path[depth] = r as u8;
            self.visit(depth + 1);
        }
    }

    /// Symmetric tail: every column block is constant on the remaining rows
    /// except possibly one block of exactly `l` columns in which the remaining
    /// rows form a permutation matrix or its complement. All orders of the
    /// remaining rows are then equally good, so the tail is written down
    /// directly and accounts for `l!` leaves.
    fn shortcut(&mut self, depth: usize) -> bool {
        let n = self.n;
        let l = n - depth;
        let node = &self.levels[depth];
        let rows: Vec<usize> = (0..n).filter(|&k| node.remaining >> k & 1 == 1).collect();
        let first = node.words[rows[0]];
        let mut special = None;
        for &b in &node.blocks {
            let v0 = first & b;
            if (v0 == 0 || v0 == b) && rows.iter().all(|&k| node.words[k] & b == v0) {
                continue;
            }
            if special.is_some() || b.count_ones() as usize != l {
                return false;
            }
            special = Some(b);
        }
        let mut tail = vec![0u64; l];
        let mut moves: Vec<(u32, u32)> = Vec::new();
        match special {
            None => tail.fill(first),
            Some(b) => {
                let uniform = first & !b;
                let ones = rows.iter().all(|&k| (node.words[k] & b).count_ones() == 1)
                    && rows.iter().fold(0, |acc, &k| acc | node.words[k]) & b == b;
                let zeros = rows
                    .iter()
                    .all(|&k| (node.words[k] & b).count_ones() as usize == l - 1)
                    && rows.iter().fold(0, |acc, &k| acc | (!node.words[k] & b)) == b;
                let lo = b.trailing_zeros();
                let hi = 63 - b.leading_zeros();
                if ones {
                    for (k, &r) in rows.iter().enumerate() {
                        let target = lo + k as u32;
                        tail[k] = uniform | 1 << target;
                        moves.push(((node.words[r] & b).trailing_zeros(), target));
                    }
                } else if zeros {
                    for (k, &r) in rows.iter().enumerate() {
                        let target = hi - k as u32;
                        tail[k] = uniform | (b & !(1 << target));
                        moves.push(((!node.words[r] & b).trailing_zeros(), target));
                    }
                } else {
                    return false;
                }
            }
        }
        let remaining = node.remaining;
        match tail.as_slice().cmp(&self.best[depth..]) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => {
                self.reset_from(depth);
                self.best[depth..].copy_from_slice(&tail);
            }
            std::cmp::Ordering::Equal => {}
        }
        if self.leaves.is_zero() && self.record {
            let mut path = self.path.clone();
            for (k, &r) in rows.iter().enumerate() {
                path[depth + k] = r as u8;
            }
            let old = &self.levels[depth].cols;
            let mut cols = old.clone();
            for &(from, to) in &moves {
                cols[n - 1 - to as usize] = old[n - 1 - from as usize];
            }
            self.rec_rows = path;
            self.rec_cols = cols;
        }
        self.leaves += factorial(l);
        if let Some(t) = self.tracked {
            let pos = if remaining >> t & 1 == 1 {
                depth
            } else {
                self.path[..depth]
                    .iter()
                    .position(|&r| r as usize == t)
                    .unwrap_or(usize::MAX)
            };
            self.tracked_pos = self.tracked_pos.min(pos);
        }
        true
    }

    fn rep(&self) -> BitMatrix {
        BitMatrix::from_rows_unchecked(self.n, self.best.clone())
    }
}

/// Algorithm output with default options (symmetry shortcut on).
pub fn pi_representative(a: &BitMatrix) -> CanonicalCert {
    pi_representative_with(a, CanonOptions::default())
}

pub fn pi_representative_with(a: &BitMatrix, opts: CanonOptions) -> CanonicalCert {
    let n = a.order();
    let mut s = Search::new(n, opts.symmetry, true);
    s.levels[0] = Node::root(a);
    if n == 0 {
        return CanonicalCert {
            rep: a.clone(),
            p: Perm::identity(0),
            q: Perm::identity(0),
            count: BigUint::one(),
            row_count: BigUint::one(),
        };
    }
    s.visit(0);
    let rep = s.rep();
    let count = &s.leaves * column_multiplicity_factor(&rep);
    CanonicalCert {
        p: Perm::from_positions(&s.rec_rows),
        q: Perm::from_positions(&s.rec_cols),
        rep,
        count,
        row_count: s.leaves,
    }
}

/// Only the π-representative, without the permutations.
pub fn pi_rep(a: &BitMatrix) -> BitMatrix {
    pi_rep_with(a, CanonOptions::default())
}

pub fn pi_rep_with(a: &BitMatrix, opts: CanonOptions) -> BitMatrix {
    let n = a.order();
    if n == 0 {
        return a.clone();
    }
    let mut s = Search::new(n, opts.symmetry, false);
    s.levels[0] = Node::root(a);
    s.visit(0);
    s.rep()
}

/// `∏ (multiplicity)!` over groups of equal rows.
fn equal_row_factor(rows: &[u64]) -> BigUint {
    let mut sorted = rows.to_vec();
    sorted.sort_unstable();
    let mut f = BigUint::one();
    for g in sorted.chunk_by(|a, b| a == b) {
        f *= factorial(g.len());
    }
    f
}

fn column_multiplicity_factor(a: &BitMatrix) -> BigUint {
    equal_row_factor(a.transpose().rows())
}

/// Size of the π-orbit of `A`: `a·b` where `a` counts the distinct row
/// permutations of `A` and `b = n!/p`, with `p` the row count reported for
/// the transpose.
pub fn pi_class_size(a: &BitMatrix) -> BigUint {
    let n = a.order();
    let nf = factorial(n);
    let a_rows = &nf / equal_row_factor(a.rows());
    let p = pi_representative(&a.transpose()).row_count;
    a_rows * (nf / p)
}

/// The π-representatives of all `X_i A X_j`, sorted and deduplicated.
pub fn phi_orbit_pi_reps(a: &BitMatrix) -> Vec<BitMatrix> {
    let n = a.order();
    let mut out = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        let ai = a.xi_row(i).expect("index within order");
        for j in 0..=n {
            out.push(pi_rep(&ai.xi_col(j).expect("index within order")));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// The smallest π-representative over the φ-orbit.
pub fn phi_representative(a: &BitMatrix) -> BitMatrix {
    phi_orbit_pi_reps(a).swap_remove(0)
}

/// π-representatives of all borders `[[B, y], [x, b]]` of a fixed `B` for one
/// column `y`, with the new rows `[x b]` visited in increasing order.
///
/// With `warm_start`, the search for each new row resumes below the levels
/// that are already settled by the old rows: if `w` is `[x b]` with one 1
/// cleared, the new row never lands earlier in a minimal ordering than `w`
/// did, so the prefix computed from the old rows alone is reused.
pub struct BorderCanonicalizer {
    base: BitMatrix,
    warm_start: bool,
    symmetry: bool,
    node_cap: usize,
}

impl BorderCanonicalizer {
    pub fn new(base: &BitMatrix, warm_start: bool) -> Self {
        BorderCanonicalizer {
            base: base.clone(),
            warm_start,
            symmetry: true,
            node_cap: 4096,
        }
    }

    pub fn with_symmetry(mut self, on: bool) -> Self {
        self.symmetry = on;
        self
    }

    /// Calls `emit(r, rep)` for every new row word `r = (x << 1) | b`.
    pub fn for_each(&self, y: u64, mut emit: impl FnMut(u64, BitMatrix)) {
        let m = self.base.order();
        let n = m + 1;
        let old = self
            .base
            .bordered(0, y, false)
            .expect("border words fit the base order");
        let count = 1u64 << n;
        if !self.warm_start || m == 0 {
            for r in 0..count {
                let mut rows = old.rows().to_vec();
                rows[m] = r;
                emit(
                    r,
                    pi_rep_with(&BitMatrix::from_rows_unchecked(n, rows), self.opts()),
                );
            }
            return;
        }
        let cache = self.prefix_cache(&old);
        let mut pos = vec![0usize; count as usize];
        let mut s = Search::new(n, self.symmetry, false);
        s.tracked = Some(m);
        for r in 0..count {
            let mut bound = 0;
            let mut bits = r;
            while bits != 0 {
                let low = bits & bits.wrapping_neg();
                bits ^= low;
                bound = bound.max(pos[(r ^ low) as usize]);
            }
            let depth = bound.min(cache.len() - 1);
            let (prefix, nodes) = &cache[depth];
            s.best[..depth].copy_from_slice(prefix);
            s.reset_from(depth);
            for (node, path) in nodes {
                let mut start = node.clone();
                start.words[m] = permute_by_positions(r, n, &start.cols);
                start.remaining |= 1 << m;
                s.path[..depth].copy_from_slice(path);
                s.levels[depth] = start;
                s.visit(depth);
            }
            pos[r as usize] = s.tracked_pos;
            emit(r, s.rep());
        }
    }

    fn opts(&self) -> CanonOptions {
        CanonOptions {
            symmetry: self.symmetry,
        }
    }

    /// Level-by-level minimal nodes built from the old rows only, with the
    /// new row excluded from candidacy. Entry `d` holds the common prefix of
    /// length `d` and its nodes; stops when a level would exceed the cap.
    #[allow(clippy::type_complexity)]
    fn prefix_cache(&self, old: &BitMatrix) -> Vec<(Vec<u64>, Vec<(Node, Vec<u8>)>)> {
        let n = old.order();
        let m = n - 1;
        let mut root = Node::root(old);
        root.remaining &= !(1 << m);
        let mut out = vec![(Vec::new(), vec![(root, Vec::new())])];
        for depth in 0..m {
            let (prefix, nodes) = out.last().unwrap();
            let mut best = u64::MAX;
            let mut next = Vec::new();
            for (node, path) in nodes {
                let mut rest = node.remaining;
                while rest != 0 {
                    let k = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    let f = form(node.words[k], &node.blocks);
                    if f > best {
                        continue;
                    }
                    if f < best {
                        best = f;
                        next.clear();
                    }
                    if next.len() >= self.node_cap {
                        return out;
                    }
                    let mut child = Node::default();
                    node.refine_into(k, n, &mut child);
                    let mut p = path.clone();
                    p.push(k as u8);
                    next.push((child, p));
                }
            }
            debug_assert_eq!(prefix.len(), depth);
            let mut prefix = prefix.clone();
            prefix.push(best);
            out.push((prefix, next));
        }
        out
    }
}

fn permute_by_positions(w: u64, n: usize, cols: &[u8]) -> u64 {
    let mut out = 0;
    for (pos, &c) in cols.iter().enumerate() {
        if w >> (n - 1 - c as usize) & 1 == 1 {
            out |= 1 << (n - 1 - pos);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// Brute force over all `n!²` permutation pairs: (minimum, pair count).
    fn brute_min(a: &BitMatrix) -> (BitMatrix, usize) {
        let perms = Perm::all(a.order());
        let mut best: Option<BitMatrix> = None;
        let mut count = 0;
        for p in &perms {
            for q in &perms {
                let b = a.apply_perms(p, q).unwrap();
                match best.as_ref().map(|x| b.cmp(x)) {
                    None | Some(std::cmp::Ordering::Less) => {
                        best = Some(b);
                        count = 1;
                    }
                    Some(std::cmp::Ordering::Equal) => count += 1,
                    _ => {}
                }
            }
        }
        (best.unwrap(), count)
    }

    fn all_matrices(n: usize) -> impl Iterator<Item = BitMatrix> {
        (0u64..1 << (n * n)).map(move |code| {
            let rows = (0..n).map(|i| (code >> (i * n)) & row_mask(n)).collect();
            BitMatrix::new(n, rows).unwrap()
        })
    }

    fn arb_bits(lo: usize, hi: usize) -> impl Strategy<Value = BitMatrix> {
        (lo..=hi).prop_flat_map(|n| {
            proptest::collection::vec(0..=row_mask(n), n)
                .prop_map(move |r| BitMatrix::new(n, r).unwrap())
        })
    }

    fn hex(s: &str) -> BitMatrix {
        BitMatrix::parse_hex_line(s).unwrap()
    }

    #[test]
    fn example_one() {
        let a = BitMatrix::from_bits(&[[1, 0, 1], [1, 1, 0], [1, 0, 0]]).unwrap();
        let cert = pi_representative(&a);
        assert_eq!(cert.rep, hex("1,3,5"));
        assert_eq!(a.apply_perms(&cert.p, &cert.q).unwrap(), cert.rep);
        assert_eq!(cert.count, BigUint::from(2u32));
        assert_eq!(pi_class_size(&a.transpose()), BigUint::from(18u32));
        assert_eq!(pi_class_size(&a), BigUint::from(18u32));
    }

    #[test]
    fn zero_and_identity() {
        for n in 1..=7usize {
            let z = pi_representative(&BitMatrix::zero(n));
            assert_eq!(z.rep, BitMatrix::zero(n));
            assert_eq!(z.count, factorial(n) * factorial(n));
            assert_eq!(pi_class_size(&BitMatrix::zero(n)), BigUint::one());
        }
        let i3 = pi_representative(&BitMatrix::identity(3));
        assert_eq!(i3.rep, hex("1,2,4"));
        assert_eq!(i3.rep, brute_min(&BitMatrix::identity(3)).0);
        assert_eq!(i3.count, BigUint::from(6u32));
    }

    #[test]
    fn brute_force_exhaustive_small() {
        for n in 1..=3 {
            for a in all_matrices(n) {
                let (min, pairs) = brute_min(&a);
                for symmetry in [true, false] {
                    let cert = pi_representative_with(&a, CanonOptions { symmetry });
                    assert_eq!(cert.rep, min, "{a:?}");
                    assert_eq!(
                        cert.count,
                        BigUint::from(pairs),
                        "{a:?} symmetry={symmetry}"
                    );
                    assert_eq!(a.apply_perms(&cert.p, &cert.q).unwrap(), min);
                }
            }
        }
    }

    #[test]
    fn class_sizes_sum_to_all_matrices() {
        for n in 1..=4usize {
            let reps: BTreeSet<BitMatrix> = all_matrices(n).map(|a| pi_rep(&a)).collect();
            let total: BigUint = reps.iter().map(pi_class_size).sum();
            assert_eq!(total, BigUint::one() << (n * n));
            let expected = [2usize, 7, 36, 317][n - 1];
            assert_eq!(reps.len(), expected);
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_representative(&hex("1,3")), hex("1,2"));
        assert_eq!(phi_representative(&BitMatrix::zero(4)), BitMatrix::zero(4));
        assert_eq!(phi_orbit_pi_reps(&BitMatrix::zero(4)).len(), 1);
        let reps: BTreeSet<BitMatrix> = all_matrices(3).map(|a| phi_representative(&a)).collect();
        assert_eq!(reps.len(), 12);
        let mut sizes: Vec<usize> = all_matrices(2)
            .map(|a| phi_representative(&a))
            .collect::<BTreeSet<_>>()
            .iter()
            .map(|r| phi_orbit_pi_reps(r).len())
            .collect();
        sizes.sort();
        assert_eq!(sizes, [1, 2, 4]);
    }

    #[test]
    fn border_warm_start_matches_restart() {
        for m in 1..=4usize {
            let bases: Vec<BitMatrix> = if m <= 2 {
                all_matrices(m).collect()
            } else {
                use rand::{Rng, SeedableRng};
                let mut rng = rand::rngs::StdRng::seed_from_u64(m as u64);
                let mut v: Vec<BitMatrix> = (0..40)
                    .map(|_| {
                        BitMatrix::new(m, (0..m).map(|_| rng.gen_range(0..1u64 << m)).collect())
                            .unwrap()
                    })
                    .collect();
                v.push(BitMatrix::zero(m));
                v.push(BitMatrix::identity(m));
                v.push(BitMatrix::ones(m));
                v
            };
            for base in bases {
                let warm = BorderCanonicalizer::new(&base, true);
                for y in 0..1u64 << m {
                    let mut got = Vec::new();
                    warm.for_each(y, |r, rep| got.push((r, rep)));
                    assert_eq!(got.len(), 1 << (m + 1));
                    for (r, rep) in got {
                        let full = base.bordered(r >> 1, y, r & 1 == 1).unwrap();
                        assert_eq!(rep, pi_rep(&full), "base {base:?} y={y} r={r}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(a in arb_bits(4, 5)) {
            // Order 5 brute force is 14400 images; keep cases modest.
            let (min, pairs) = brute_min(&a);
            let cert = pi_representative(&a);
            prop_assert_eq!(&cert.rep, &min);
            prop_assert_eq!(cert.count, BigUint::from(pairs));
            prop_assert_eq!(a.apply_perms(&cert.p, &cert.q).unwrap(), min);
        }

        #[test]
        fn invariant_and_idempotent(
            (a, p, q) in (1usize..=8).prop_flat_map(|n| (
                proptest::collection::vec(0..=row_mask(n), n)
                    .prop_map(move |r| BitMatrix::new(n, r).unwrap()),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle()))
        ) {
            let rep = pi_rep(&a);
            let b = a.apply_perms(&Perm::new(p).unwrap(), &Perm::new(q).unwrap()).unwrap();
            prop_assert_eq!(&pi_rep(&b), &rep);
            prop_assert_eq!(&pi_rep(&rep), &rep);
            prop_assert_eq!(&pi_rep_with(&a, CanonOptions { symmetry: false }), &rep);
            let cert = pi_representative(&a);
            let n = a.order();
            prop_assert_eq!(pi_class_size(&a) * &cert.count, factorial(n) * factorial(n));
        }

        #[test]
        fn phi_invariance(a in arb_bits(1, 5), i in 0usize..=5, j in 0usize..=5,
                          seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = a.order();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut p: Vec<usize> = (0..n).collect();
            let mut q = p.clone();
            p.shuffle(&mut rng);
            q.shuffle(&mut rng);
            let b = a.xi_row(i % (n + 1)).unwrap().xi_col(j % (n + 1)).unwrap()
                .apply_perms(&Perm::new(p).unwrap(), &Perm::new(q).unwrap()).unwrap();
            prop_assert_eq!(phi_representative(&b), phi_representative(&a));
            let reps = phi_orbit_pi_reps(&a);
            prop_assert!(!reps.is_empty() && reps.len() <= (n + 1) * (n + 1));
        }
    }
}
