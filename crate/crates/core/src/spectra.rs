//! Determinant spectra, rank censuses, SNF incidence between consecutive
//! orders, and the singular order-10 matrix whose minors all miss its SNF.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::bitmat::BitMatrix;
use crate::canon::{phi_orbit_pi_reps, phi_representative, pi_class_size, pi_rep};
use crate::classify::LevelResult;
use crate::error::{Error, Result};
use crate::exact::{hadamard_bound, rank};
use crate::extend::{extension_snf_set, AdvSet, BorderDets};
use crate::snf::{smith_normal_form, SnfVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumReport {
    pub order: usize,
    /// `D_n`: every `|det|` attained at this order.
    pub dets: AdvSet,
    /// Smallest positive integer missing from `D_n`.
    pub a: u64,
    /// `max D_n`.
    pub d: u64,
    /// Matrices with `det = d`.
    pub c: Option<BigUint>,
    /// Regular matrices.
    pub m: Option<BigUint>,
    pub rank_census: Option<BTreeMap<usize, BigUint>>,
}

/// What a spectrum can be computed from. `prev_phi_reps` are the
/// φ-representatives of order `n−1`; `level` is a classification of order `n`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SpectrumInputs<'a> {
    pub prev_phi_reps: Option<&'a [BitMatrix]>,
    pub level: Option<&'a LevelResult>,
}

struct Sweep {
    dets: AdvSet,
    max: u64,
    /// Borders attaining `max`, as π-representatives.
    at_max: BTreeSet<BitMatrix>,
}

fn sweep_all(seeds: &[BitMatrix]) -> Result<Sweep> {
    let n = seeds.first().map_or(1, |s| s.order() + 1);
    let cap = hadamard_bound(n).floor_u64().unwrap_or(1 << 20);
    let per_seed: Vec<(AdvSet, u64)> = seeds
        .par_iter()
        .map(|s| {
            let mut covered = AdvSet::with_capacity(cap);
            BorderDets::new(s)?.cover(&mut covered);
            let max = covered.max().unwrap_or(0);
            Ok((covered, max))
        })
        .collect::<Result<_>>()?;
    let max = per_seed.iter().map(|p| p.1).max().unwrap_or(0);
    let mut dets = AdvSet::with_capacity(cap);
    for (covered, _) in &per_seed {
        dets.union_with(covered);
    }
    // Only seeds reaching the overall maximum contribute witnesses.
    let at_max: Vec<BTreeSet<BitMatrix>> = seeds
        .par_iter()
        .zip(&per_seed)
        .filter(|(_, p)| max > 0 && p.1 == max)
        .map(|(seed, _)| {
            let mut found = Vec::new();
            BorderDets::new(seed)?.for_each(|x, y, b, d| {
                if d.unsigned_abs() == max {
                    found.push((x, y, b));
                }
            });
            found
                .into_iter()
                .map(|(x, y, b)| Ok(pi_rep(&seed.bordered(x, y, b)?)))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(Sweep {
        dets,
        max,
        at_max: at_max.into_iter().flatten().collect(),
    })
}

/// Number of matrices in the φ-class of `a`.
pub fn phi_class_size(a: &BitMatrix) -> BigUint {
    phi_orbit_pi_reps(a).iter().map(pi_class_size).sum()
}

/// `c_n` from the borders of all order-`(n−1)` φ-representatives: half the
/// total size of the φ-classes that attain `d_n`. Returns `(d_n, c_n)`.
pub fn max_det_count_by_extension(prev_phi_reps: &[BitMatrix]) -> Result<(u64, BigUint)> {
    let sweep = sweep_all(prev_phi_reps)?;
    Ok((sweep.max, half_count_at_max(&sweep)))
}

fn half_count_at_max(sweep: &Sweep) -> BigUint {
    let classes: BTreeSet<BitMatrix> = sweep.at_max.iter().map(phi_representative).collect();
    let total: BigUint = classes.iter().map(phi_class_size).sum();
    let n = classes.first().map_or(1, |a| a.order());
    halve(total, n)
}

/// From order 2 on a row swap pairs `det = d` with `det = −d`; at order 1
/// only `[1]` attains the maximum.
fn halve(count_at_max: BigUint, n: usize) -> BigUint {
    if n >= 2 {
        count_at_max >> 1
    } else {
        count_at_max
    }
}

/// `D_n`, `a_n`, `d_n` and, given a classification of order `n`, `c_n`, `m_n`
/// and the rank census. With only the order-`(n−1)` φ-representatives,
/// `c_n` is taken from the φ-classes attaining `d_n`.
pub fn spectrum(n: usize, inputs: SpectrumInputs<'_>) -> Result<SpectrumReport> {
    if n == 0 {
        return Err(Error::Domain("spectra start at order 1".into()));
    }
    if let Some(level) = inputs.level {
        if level.order != n {
            return Err(Error::Dimension {
                expected: n,
                found: level.order,
            });
        }
    }
    let empty = [BitMatrix::zero(0)];
    let prev = match (inputs.prev_phi_reps, n) {
        (Some(p), _) => Some(p),
        (None, 1) => Some(&empty[..]),
        (None, _) => None,
    };
    if let Some(p) = prev {
        if let Some(bad) = p.iter().find(|s| s.order() + 1 != n) {
            return Err(Error::Dimension {
                expected: n - 1,
                found: bad.order(),
            });
        }
    }

    let (dets, d, c_ext) = match prev {
        Some(p) => {
            let sweep = sweep_all(p)?;
            let c = half_count_at_max(&sweep);
            (sweep.dets, sweep.max, Some(c))
        }
        None => {
            let Some(level) = inputs.level else {
                return Err(Error::Dependency {
                    order: n - 1,
                    what: format!(
                        "φ-representatives of order {} or a classification of order {n}",
                        n - 1
                    ),
                });
            };
            let dets: AdvSet = level.records.iter().map(|r| r.snf.adv() as u64).collect();
            let d = dets.max().unwrap_or(0);
            (dets, d, None)
        }
    };

    let (c, m, rank_census) = match inputs.level {
        Some(level) => {
            let mut census: BTreeMap<usize, BigUint> =
                (0..=n).map(|k| (k, BigUint::zero())).collect();
            let mut at_max = BigUint::zero();
            for r in &level.records {
                *census.get_mut(&r.snf.rank()).expect("rank at most n") += &r.matrices;
                if r.snf.adv() == d as u128 {
                    at_max += &r.matrices;
                }
            }
            let m = census[&n].clone();
            (Some(halve(at_max, n)), Some(m), Some(census))
        }
        None => (c_ext, None, None),
    };

    Ok(SpectrumReport {
        order: n,
        a: dets.first_missing_from(1),
        d,
        dets,
        c,
        m,
        rank_census,
    })
}

impl SpectrumReport {
    /// `D_n` in the compact form `{0-18,20,24,32}`.
    pub fn dets_compact(&self) -> String {
        let v: Vec<u64> = self.dets.iter().collect();
        let mut parts = Vec::new();
        let mut i = 0;
        while i < v.len() {
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[j] + 1 {
                j += 1;
            }
            parts.push(if j > i {
                format!("{}-{}", v[i], v[j])
            } else {
                v[i].to_string()
            });
            i = j + 1;
        }
        format!("{{{}}}", parts.join(","))
    }

    pub fn to_tsv(&self) -> String {
        let opt = |v: &Option<BigUint>| v.as_ref().map_or("-".to_string(), |x| x.to_string());
        let mut s = String::from("n\ta_n\td_n\t|D_n|\tc_n\tm_n\tD_n\n");
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.order,
            self.a,
            self.d,
            self.dets.len(),
            opt(&self.c),
            opt(&self.m),
            self.dets_compact()
        );
        if let Some(census) = &self.rank_census {
            s.push_str("rank\tmatrices\n");
            for (k, v) in census {
                let _ = writeln!(s, "{k}\t{v}");
            }
        }
        s
    }
}

// Incidence

/// Whether `s` (order `n`) and `s′` (order `n+1`) can be the SNFs of a matrix
/// and one of its borders: the partial products of `s′` divide those of `s`,
/// the rank grows by at most 2, and `d_1⋯d_{n−1}` divides `d′_1⋯d′_{n+1}`.
pub fn lemma_allows(s: &SnfVector, s_prime: &SnfVector) -> bool {
    let n = s.order();
    if s_prime.order() != n + 1 {
        return false;
    }
    let (d, e) = (s.diag(), s_prime.diag());
    let divides = |a: &BigUint, b: &BigUint| {
        if a.is_zero() {
            b.is_zero()
        } else {
            b.is_multiple_of(a)
        }
    };
    let mut pd = BigUint::one();
    let mut pe = BigUint::one();
    for i in 0..n {
        pd *= d[i];
        pe *= e[i];
        if !divides(&pe, &pd) {
            return false;
        }
    }
    let (r, r2) = (s.rank(), s_prime.rank());
    if r2 < r || r2 > r + 2 {
        return false;
    }
    let head: BigUint = d[..n.saturating_sub(1)]
        .iter()
        .map(|&v| BigUint::from(v))
        .product();
    let det = pe * e[n];
    divides(&head, &det)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    One,
    /// Forbidden by [`lemma_allows`].
    ZeroExplained,
    /// Allowed by [`lemma_allows`] but never realized.
    ZeroUnexplained,
}

impl Cell {
    pub fn glyph(self, ascii: bool) -> char {
        match (self, ascii) {
            (Cell::One, false) => '•',
            (Cell::ZeroExplained, false) => '⋆',
            (Cell::ZeroUnexplained, false) => '∘',
            (Cell::One, true) => '1',
            (Cell::ZeroExplained, true) => 'x',
            (Cell::ZeroUnexplained, true) => 'o',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub from_snfs: Vec<SnfVector>,
    pub to_snfs: Vec<SnfVector>,
    pub cells: Vec<Vec<Cell>>,
}

/// Which order-`n` matrices are extended.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IncidenceSweep {
    /// Every φ-representative. Complete, since the border SNFs of a matrix
    /// are shared by its whole φ-class.
    #[default]
    AllPhiReps,
    /// Only the lex-smallest φ-representative of each SNF class.
    Representatives,
}

impl IncidenceMatrix {
    /// Builds the matrix from the realized `(s, s′)` pairs.
    pub fn from_pairs(
        from_snfs: Vec<SnfVector>,
        to_snfs: Vec<SnfVector>,
        realized: &BTreeSet<(SnfVector, SnfVector)>,
    ) -> Result<Self> {
        for (s, t) in realized {
            if from_snfs.binary_search(s).is_err() || to_snfs.binary_search(t).is_err() {
                return Err(Error::Contract(format!(
                    "pair {} -> {} is outside the listed SNF classes",
                    s.shorthand(),
                    t.shorthand()
                )));
            }
        }
        let cells = from_snfs
            .iter()
            .map(|s| {
                to_snfs
                    .iter()
                    .map(|t| {
                        if realized.contains(&(s.clone(), t.clone())) {
                            Cell::One
                        } else if lemma_allows(s, t) {
                            Cell::ZeroUnexplained
                        } else {
                            Cell::ZeroExplained
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(IncidenceMatrix {
            from_snfs,
            to_snfs,
            cells,
        })
    }

    pub fn cell(&self, s: &SnfVector, t: &SnfVector) -> Option<Cell> {
        let i = self.from_snfs.binary_search(s).ok()?;
        let j = self.to_snfs.binary_search(t).ok()?;
        Some(self.cells[i][j])
    }

    /// Realized pairs.
    pub fn ones(&self) -> impl Iterator<Item = (&SnfVector, &SnfVector)> + '_ {
        self.cells.iter().enumerate().flat_map(move |(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| **c == Cell::One)
                .map(move |(j, _)| (&self.from_snfs[i], &self.to_snfs[j]))
        })
    }

    /// One line per order-`n` class, then the column legend.
    pub fn render(&self, ascii: bool) -> String {
        let width = self
            .from_snfs
            .iter()
            .map(|s| s.shorthand().chars().count())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for (s, row) in self.from_snfs.iter().zip(&self.cells) {
            let glyphs: String = row.iter().map(|c| c.glyph(ascii)).collect();
            let label = s.shorthand();
            let pad = width - label.chars().count();
            let _ = writeln!(out, "{label}{} {glyphs}", " ".repeat(pad));
        }
        out.push_str("# columns\n");
        for (j, t) in self.to_snfs.iter().enumerate() {
            let _ = writeln!(out, "# {:>3} {}", j + 1, t.shorthand());
        }
        out
    }
}

/// SNF incidence between the classes of `from` (order `n`) and the SNFs
/// `to_snfs` of order `n+1`.
pub fn incidence(
    from: &LevelResult,
    to_snfs: &[SnfVector],
    sweep: IncidenceSweep,
) -> Result<IncidenceMatrix> {
    let members: Vec<BitMatrix> = match sweep {
        IncidenceSweep::AllPhiReps => from.phi_reps.clone(),
        IncidenceSweep::Representatives => from
            .records
            .iter()
            .map(|r| r.representative.clone())
            .collect(),
    };
    let realized = realized_pairs(&members)?;
    let mut from_snfs: Vec<SnfVector> = from.records.iter().map(|r| r.snf.clone()).collect();
    from_snfs.sort();
    let mut to: Vec<SnfVector> = to_snfs.to_vec();
    to.sort();
    to.dedup();
    IncidenceMatrix::from_pairs(from_snfs, to, &realized)
}

/// `(SNF(A), SNF(B))` over the given matrices `A` and all their borders `B`.
pub fn realized_pairs(members: &[BitMatrix]) -> Result<BTreeSet<(SnfVector, SnfVector)>> {
    let per: Vec<BTreeSet<(SnfVector, SnfVector)>> = members
        .par_iter()
        .map(|a| {
            let s = smith_normal_form(a)?;
            Ok(extension_snf_set(a)?
                .into_iter()
                .map(|t| (s.clone(), t))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

// The singular order-10 example

/// A singular order-10 matrix with `SNF = (1⁹, 0)` none of whose order-9
/// minors has `SNF = (1⁹)`. Blocks split after row 4 and column 4.
pub fn counterexample_f() -> BitMatrix {
    const ROWS: [&str; 10] = [
        "0011101001",
        "0110010101",
        "1100011010",
        "1001100110",
        "0011000111",
        "1100001110",
        "1010011100",
        "0101111000",
        "0110110001",
        "1001100011",
    ];
    let words = ROWS
        .iter()
        .map(|r| u64::from_str_radix(r, 2).expect("binary row"))
        .collect();
    BitMatrix::new(10, words).expect("fixture rows are well formed")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterexampleReport {
    pub rank: usize,
    pub snf: SnfVector,
    pub minors_checked: usize,
    /// Minors whose SNF is all ones.
    pub unimodular_minors: usize,
    /// Row sums 2,3,2,3 and column sums 2,2,3,3 for blocks A, B, C, D.
    pub block_sums_ok: bool,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        let n = self.snf.order();
        let mut expected = vec![1u64; n.saturating_sub(1)];
        expected.push(0);
        self.rank + 1 == n
            && self.snf.diag() == expected
            && self.minors_checked == n * n
            && self.unimodular_minors == 0
            && self.block_sums_ok
    }
}

fn block_sums_ok(f: &BitMatrix) -> bool {
    if f.order() != 10 {
        return false;
    }
    let count = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>, by_row: bool| {
        let (outer, inner) = if by_row { (rows, cols) } else { (cols, rows) };
        outer
            .map(|o| {
                inner
                    .clone()
                    .filter(|&k| if by_row { f.get(o, k) } else { f.get(k, o) })
                    .count()
            })
            .collect::<Vec<_>>()
    };
    let blocks = [
        (0..4, 0..4, 2, 2),
        (0..4, 4..10, 3, 2),
        (4..10, 0..4, 2, 3),
        (4..10, 4..10, 3, 3),
    ];
    blocks.into_iter().all(|(r, c, row_sum, col_sum)| {
        count(r.clone(), c.clone(), true)
            .iter()
            .all(|&v| v == row_sum)
            && count(r, c, false).iter().all(|&v| v == col_sum)
    })
}

/// Checks rank, SNF, every order-`(n−1)` minor and the block structure.
pub fn verify_counterexample(f: &BitMatrix) -> Result<CounterexampleReport> {
    let n = f.order();
    let mut unimodular = 0;
    let mut checked = 0;
    for r in 0..n {
        for c in 0..n {
            let s = smith_normal_form(&f.minor(r, c)?)?;
            checked += 1;
            if s.diag().iter().all(|&v| v == 1) {
                unimodular += 1;
            }
        }
    }
    Ok(CounterexampleReport {
        rank: rank(f)?,
        snf: smith_normal_form(f)?,
        minors_checked: checked,
        unimodular_minors: unimodular,
        block_sums_ok: block_sums_ok(f),
    })
}
