//! Lower bounds for the smallest positive integer missing from the
//! determinant spectrum of the next order.
//!
//! A round borders a list of seeds and tracks `first0`, the smallest positive
//! value not yet covered. For a fixed new column `y` the border determinant
//! is linear in `(x, b)`, so if the positive (or negative) coefficients sum
//! to less than `first0` no choice of `(x, b)` can reach it and `y` is
//! skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bitmat::{parse_matrix_list, BitMatrix};
use crate::canon::pi_rep;
use crate::error::{Error, Result};
use crate::exact::{determinant, hadamard_bound};
use crate::extend::{fibonacci, AdvSet, BorderDets};

/// `2·f_{n−1}`: the borders of the order-`(n−1)` Fibonacci matrix cover
/// `[0, 2f_{n−1})`, so this is a lower bound for `a_n`.
pub fn paseman_bound(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::Domain("the bound needs n >= 2".into()));
    }
    Ok(2 * fibonacci(n - 1))
}

/// One border reaching a covered value: seed index and `(x, y, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub seed: usize,
    pub x: u64,
    pub y: u64,
    pub b: bool,
}

#[derive(Clone, Debug)]
pub struct BoundOptions {
    pub prune: bool,
    /// Maximum number of promising matrices kept for the next round.
    pub cap: usize,
    /// Seeds per synchronization step. Seeds in one step share the state
    /// left by the previous step, which keeps results independent of the
    /// thread count.
    pub chunk: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            prune: true,
            cap: 10_000,
            chunk: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundRun {
    /// Order of the bordered matrices.
    pub order: usize,
    pub seeds: Vec<BitMatrix>,
    /// Smallest positive value not covered; the round proves `a_order >= first0`.
    pub first0: u64,
    pub dmax: u64,
    pub covered: AdvSet,
    /// One witness for every value in `[1, first0)`.
    pub witnesses: BTreeMap<u64, Witness>,
    /// Lex-sorted π-representatives of borders that beat `0.9·dmax` when found.
    pub promising: Vec<BitMatrix>,
    /// Columns `y` skipped by the coefficient test.
    pub skipped: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    neg_det: i64,
    seed: usize,
    y: u64,
    x: u64,
    b: bool,
}

fn promising_rule(v: u64, dmax: u64) -> bool {
    10 * v as u128 > 9 * dmax as u128
}

/// Keeps the candidate list within `limit` entries, first by the current
/// rule and then by value.
fn trim(cands: &mut Vec<Candidate>, dmax: u64, limit: usize) {
    if cands.len() <= limit {
        return;
    }
    cands.retain(|c| promising_rule(c.neg_det.unsigned_abs(), dmax));
    if cands.len() > limit {
        cands.sort_unstable();
        cands.truncate(limit);
    }
}

struct SeedResult {
    covered: AdvSet,
    witnesses: Vec<(u64, Witness)>,
    dmax: u64,
    candidates: Vec<Candidate>,
    skipped: u64,
}

fn sweep_seed(
    index: usize,
    seed: &BitMatrix,
    start: &AdvSet,
    first0: u64,
    dmax: u64,
    opts: &BoundOptions,
) -> Result<SeedResult> {
    let m = seed.order();
    let bd = BorderDets::new(seed)?;
    let det = bd.det();
    let mut covered = start.clone();
    let mut first0 = first0;
    let mut dmax = dmax;
    let mut witnesses = Vec::new();
    let mut candidates = Vec::new();
    let mut skipped = 0;
    let limit = 4 * opts.cap.max(1);
    for y in 0..1u64 << m {
        // det(x, y, b) = b·det − Σ_i x_i u_i, with u indexed by the column of x.
        let u = bd.col_weights(y);
        if opts.prune {
            let (mut pos, mut neg) = (det.max(0), det.min(0));
            for &v in &u {
                pos += (-v).max(0);
                neg += (-v).min(0);
            }
            if pos.max(-neg).unsigned_abs() < first0 {
                skipped += 1;
                continue;
            }
        }
        // Gray code over m+1 bits: bit 0 is b, bit p+1 is bit p of x.
        let (mut x, mut b, mut d) = (0u64, false, 0i64);
        for k in 0..1u64 << (m + 1) {
            if k > 0 {
                let t = k.trailing_zeros() as usize;
                if t == 0 {
                    b = !b;
                    d += if b { det } else { -det };
                } else {
                    let p = t - 1;
                    x ^= 1 << p;
                    let w = u[m - 1 - p];
                    d += if x >> p & 1 == 1 { -w } else { w };
                }
            }
            let v = d.unsigned_abs();
            if !covered.contains(v) {
                covered.insert(v);
                witnesses.push((
                    v,
                    Witness {
                        seed: index,
                        x,
                        y,
                        b,
                    },
                ));
                if v == first0 {
                    first0 = covered.first_missing_from(first0);
                }
            }
            if v > dmax {
                dmax = v;
            }
            if promising_rule(v, dmax) {
                candidates.push(Candidate {
                    neg_det: -(v as i64),
                    seed: index,
                    y,
                    x,
                    b,
                });
                if candidates.len() > 2 * limit {
                    trim(&mut candidates, dmax, limit);
                }
            }
        }
    }
    Ok(SeedResult {
        covered,
        witnesses,
        dmax,
        candidates,
        skipped,
    })
}

/// Borders every seed and returns the bound `a_{n+1} >= first0` with
/// witnesses and the promising list for the next round.
pub fn heuristic_round(seeds: &[BitMatrix], opts: &BoundOptions) -> Result<BoundRun> {
    let Some(first) = seeds.first() else {
        return Err(Error::Config("a round needs at least one seed".into()));
    };
    let m = first.order();
    if seeds.iter().any(|s| s.order() != m) {
        return Err(Error::Contract("seeds must share one order".into()));
    }
    let cap_value = hadamard_bound(m + 1).floor_u64().unwrap_or(1 << 24);
    let mut covered = AdvSet::with_capacity(cap_value.min(1 << 24));
    covered.insert(0);
    let mut first0 = 1u64;
    let mut dmax = 1u64;
    let mut witnesses: BTreeMap<u64, Witness> = BTreeMap::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut skipped = 0;
    let limit = 4 * opts.cap.max(1);
    let chunk = opts.chunk.max(1);
    for (c, group) in seeds.chunks(chunk).enumerate() {
        let results: Vec<SeedResult> = group
            .par_iter()
            .enumerate()
            .map(|(k, s)| sweep_seed(c * chunk + k, s, &covered, first0, dmax, opts))
            .collect::<Result<_>>()?;
        for r in results {
            covered.union_with(&r.covered);
            for (v, w) in r.witnesses {
                witnesses.entry(v).or_insert(w);
            }
            dmax = dmax.max(r.dmax);
            candidates.extend(r.candidates);
            skipped += r.skipped;
        }
        first0 = covered.first_missing_from(first0);
        trim(&mut candidates, dmax, limit);
    }
    witnesses.retain(|&v, _| v >= 1 && v < first0);

    candidates.sort_unstable();
    let mut promising: Vec<BitMatrix> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for c in candidates {
        if promising.len() >= opts.cap {
            break;
        }
        let rep = pi_rep(&seeds[c.seed].bordered(c.x, c.y, c.b)?);
        if seen.insert(rep.clone()) {
            promising.push(rep);
        }
    }
    promising.sort();
    Ok(BoundRun {
        order: m + 1,
        seeds: seeds.to_vec(),
        first0,
        dmax,
        covered,
        witnesses,
        promising,
        skipped,
    })
}

/// Chains rounds, seeding each with the previous promising list. Stops
/// early when a round yields no promising matrices.
pub fn iterate_bounds(
    seeds: &[BitMatrix],
    rounds: usize,
    opts: &BoundOptions,
) -> Result<Vec<BoundRun>> {
    if rounds == 0 {
        return Err(Error::Config("at least one round is required".into()));
    }
    let mut out: Vec<BoundRun> = Vec::new();
    let mut current = seeds.to_vec();
    for _ in 0..rounds {
        let run = heuristic_round(&current, opts)?;
        current = run.promising.clone();
        out.push(run);
        if current.is_empty() {
            break;
        }
    }
    Ok(out)
}

impl BoundRun {
    /// The bordered matrix behind a witness.
    pub fn witness_matrix(&self, w: &Witness) -> Result<BitMatrix> {
        self.seeds
            .get(w.seed)
            .ok_or(Error::IndexOutOfRange {
                index: w.seed,
                order: self.seeds.len(),
            })?
            .bordered(w.x, w.y, w.b)
    }

    /// `value<TAB>matrix` per line, one line per value in `[1, first0)`.
    pub fn witness_file(&self) -> Result<String> {
        let mut s = String::new();
        for (v, w) in &self.witnesses {
            let _ = writeln!(s, "{v}\t{}", self.witness_matrix(w)?.to_hex_line());
        }
        Ok(s)
    }

    /// Recomputes every witness determinant exactly.
    pub fn verify_witnesses(&self) -> Result<bool> {
        for v in 1..self.first0 {
            let Some(w) = self.witnesses.get(&v) else {
                return Ok(false);
            };
            if determinant(&self.witness_matrix(w)?)?.unsigned_abs() != v as u128 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Checks a witness file and returns the largest `B` such that every value
/// in `[1, B)` has a line whose matrix has that `|det|`.
pub fn check_witness_file(text: &str) -> Result<u64> {
    let mut seen = AdvSet::default();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (v, m) = line.split_once('\t').ok_or_else(|| {
            Error::Parse(format!(
                "witness line {}: expected value<TAB>matrix",
                no + 1
            ))
        })?;
        let v: u64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("witness line {}: invalid value", no + 1)))?;
        let a = parse_matrix_list(m)?
            .pop()
            .ok_or_else(|| Error::Parse(format!("witness line {}: missing matrix", no + 1)))?;
        if determinant(&a)?.unsigned_abs() != v as u128 {
            return Err(Error::Contract(format!(
                "witness line {}: |det| is not {v}",
                no + 1
            )));
        }
        seen.insert(v);
    }
    Ok(seen.first_missing_from(1))
}
