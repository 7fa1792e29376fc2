//! Level-by-level classification.
//!
//! Every π-representative of order `n+1` is a π-representative of a border of
//! some φ-representative of order `n`. A level therefore extends the previous
//! φ-representatives, deduplicates the canonical borders in a sorted store,
//! reduces them to φ-representatives and aggregates the SNF classes.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::bitmat::{read_matrix_set, write_matrix_set, BitMatrix};
use crate::canon::{
    phi_orbit_pi_reps, phi_representative, pi_class_size, pi_rep, BorderCanonicalizer,
};
use crate::count::pi_class_count;
use crate::error::{Error, Result};
use crate::snf::{smith_normal_form, SnfVector};

/// Largest order whose matrices pack into a `u128` key.
pub const MAX_PACKED_ORDER: usize = 11;

/// Packs a matrix of order `n <= 11` into `n²` bits, row 0 most significant,
/// so that numeric order equals lexicographic order.
pub fn pack(a: &BitMatrix) -> u128 {
    let n = a.order();
    debug_assert!(n <= MAX_PACKED_ORDER);
    a.rows()
        .iter()
        .fold(0u128, |acc, &w| (acc << n) | w as u128)
}

pub fn unpack(key: u128, n: usize) -> BitMatrix {
    let mask = (1u128 << n) - 1;
    let rows = (0..n)
        .map(|i| ((key >> (n * (n - 1 - i))) & mask) as u64)
        .collect();
    BitMatrix::new(n, rows).expect("packed key holds an order-n matrix")
}

/// Pipeline settings.
#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub threads: usize,
    pub checkpoint_dir: Option<PathBuf>,
    /// Matrices held at once by the reduction batches and by the store
    /// before it merges (or spills) its runs.
    pub memory_budget: usize,
    pub warm_start: bool,
    pub symmetry: bool,
    /// Also write the compressed binary set (orders up to 8).
    pub binary: bool,
    /// Directory for spilled sorted runs; runs stay in memory when unset.
    pub spill_dir: Option<PathBuf>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            threads: 1,
            checkpoint_dir: None,
            memory_budget: 1 << 24,
            warm_start: true,
            symmetry: true,
            binary: false,
            spill_dir: None,
        }
    }
}

/// One SNF class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRecord {
    pub snf: SnfVector,
    pub matrices: BigUint,
    pub pi_classes: BigUint,
    pub phi_classes: BigUint,
    /// Lex-smallest φ-representative in the class.
    pub representative: BitMatrix,
}

/// One φ-class of a computed level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiClass {
    pub rep: BitMatrix,
    pub snf: SnfVector,
    /// Number of π-classes inside the φ-class.
    pub pi_orbits: usize,
    pub matrices: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelResult {
    pub order: usize,
    pub phi_reps: Vec<BitMatrix>,
    /// Sorted by SNF in report order.
    pub records: Vec<ClassRecord>,
    /// Per-φ-class detail; empty when the level was loaded from a checkpoint.
    pub phi_classes: Vec<PhiClass>,
}

impl LevelResult {
    pub fn total_matrices(&self) -> BigUint {
        self.records.iter().map(|r| &r.matrices).sum()
    }

    pub fn total_pi(&self) -> BigUint {
        self.records.iter().map(|r| &r.pi_classes).sum()
    }

    pub fn total_phi(&self) -> BigUint {
        self.records.iter().map(|r| &r.phi_classes).sum()
    }
}

// Sorted-run store

type RunIter = Box<dyn Iterator<Item = std::io::Result<u128>> + Send>;

/// k-way merge of sorted runs, dropping duplicates.
fn merge_runs(runs: Vec<RunIter>, mut sink: impl FnMut(u128) -> Result<()>) -> Result<()> {
    let mut iters = runs;
    let mut heap = BinaryHeap::new();
    let io = |e: std::io::Error| Error::io("<run>", e);
    for (k, it) in iters.iter_mut().enumerate() {
        if let Some(v) = it.next() {
            heap.push(Reverse((v.map_err(io)?, k)));
        }
    }
    let mut last = None;
    while let Some(Reverse((v, k))) = heap.pop() {
        if last != Some(v) {
            sink(v)?;
            last = Some(v);
        }
        if let Some(next) = iters[k].next() {
            heap.push(Reverse((next.map_err(io)?, k)));
        }
    }
    Ok(())
}

fn memory_run(v: Vec<u128>) -> RunIter {
    Box::new(v.into_iter().map(Ok))
}

fn file_run(path: &Path) -> Result<RunIter> {
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    Ok(Box::new(std::iter::from_fn(move || {
        let mut buf = [0u8; 16];
        match r.read_exact(&mut buf) {
            Ok(()) => Some(Ok(u128::from_le_bytes(buf))),
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => None,
            Err(e) => Some(Err(e)),
        }
    })))
}

/// Sorted duplicate-free runs that are merged once they exceed the budget,
/// and written to disk when a spill directory is configured.
pub struct RunStore {
    budget: usize,
    held: usize,
    runs: Vec<Vec<u128>>,
    spill_dir: Option<PathBuf>,
    files: Vec<PathBuf>,
}

impl RunStore {
    pub fn new(budget: usize, spill_dir: Option<PathBuf>) -> Self {
        RunStore {
            budget: budget.max(1),
            held: 0,
            runs: Vec::new(),
            spill_dir,
            files: Vec::new(),
        }
    }

    /// Adds a sorted, duplicate-free run.
    pub fn push(&mut self, run: Vec<u128>) -> Result<()> {
        debug_assert!(run.windows(2).all(|w| w[0] < w[1]));
        self.held += run.len();
        self.runs.push(run);
        if self.held <= self.budget {
            return Ok(());
        }
        let runs = std::mem::take(&mut self.runs)
            .into_iter()
            .map(memory_run)
            .collect();
        match self.spill_dir.clone() {
            Some(dir) => {
                let path = dir.join(format!("run{:05}.bin", self.files.len()));
                let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
                let mut w = BufWriter::new(file);
                merge_runs(runs, |v| {
                    w.write_all(&v.to_le_bytes())
                        .map_err(|e| Error::io(&path, e))
                })?;
                w.flush().map_err(|e| Error::io(&path, e))?;
                self.files.push(path);
                self.held = 0;
            }
            None => {
                let mut merged = Vec::with_capacity(self.held);
                merge_runs(runs, |v| {
                    merged.push(v);
                    Ok(())
                })?;
                self.held = merged.len();
                self.runs.push(merged);
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<u128>> {
        let mut runs: Vec<RunIter> = self.runs.into_iter().map(memory_run).collect();
        for f in &self.files {
            runs.push(file_run(f)?);
        }
        let mut out = Vec::new();
        merge_runs(runs, |v| {
            out.push(v);
            Ok(())
        })?;
        for f in &self.files {
            std::fs::remove_file(f).map_err(|e| Error::io(f, e))?;
        }
        Ok(out)
    }
}

// Extension

#[derive(Clone, Debug)]
pub struct ExtendOptions {
    pub warm_start: bool,
    pub symmetry: bool,
    pub memory_budget: usize,
    pub spill_dir: Option<PathBuf>,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            warm_start: true,
            symmetry: true,
            memory_budget: 1 << 24,
            spill_dir: None,
        }
    }
}

impl From<&ClassifyConfig> for ExtendOptions {
    fn from(c: &ClassifyConfig) -> Self {
        ExtendOptions {
            warm_start: c.warm_start,
            symmetry: c.symmetry,
            memory_budget: c.memory_budget,
            spill_dir: c.spill_dir.clone(),
        }
    }
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_PACKED_ORDER {
        return Err(Error::Config(format!(
            "classification supports orders up to {MAX_PACKED_ORDER}, got {n}"
        )));
    }
    Ok(())
}

/// π-representatives of all borders of one seed, sorted and deduplicated.
fn seed_run(seed: &BitMatrix, opts: &ExtendOptions) -> Vec<u128> {
    let m = seed.order();
    let canon = BorderCanonicalizer::new(seed, opts.warm_start).with_symmetry(opts.symmetry);
    let mut out = Vec::with_capacity(1 << (2 * m + 1));
    for y in 0..1u64 << m {
        canon.for_each(y, |_, rep| out.push(pack(&rep)));
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn extend_keys(seeds: &[BitMatrix], opts: &ExtendOptions) -> Result<Vec<u128>> {
    let Some(first) = seeds.first() else {
        return Ok(Vec::new());
    };
    let m = first.order();
    if seeds.iter().any(|s| s.order() != m) {
        return Err(Error::Contract("seeds must share one order".into()));
    }
    check_order(m + 1)?;
    let mut store = RunStore::new(opts.memory_budget, opts.spill_dir.clone());
    // Chunks bound the number of runs alive at once.
    for chunk in seeds.chunks(256) {
        let runs: Vec<Vec<u128>> = chunk.par_iter().map(|s| seed_run(s, opts)).collect();
        let mut merged = Vec::new();
        merge_runs(runs.into_iter().map(memory_run).collect(), |v| {
            merged.push(v);
            Ok(())
        })?;
        store.push(merged)?;
    }
    store.finish()
}

/// π-representatives of order `n+1` reached by bordering the given order-`n`
/// matrices. With all of `A_n^φ` as input this is all of `A_{n+1}^π`.
pub fn extend_level(phi_reps: &[BitMatrix], opts: &ExtendOptions) -> Result<Vec<BitMatrix>> {
    let n = phi_reps.first().map_or(0, |s| s.order() + 1);
    Ok(extend_keys(phi_reps, opts)?
        .into_iter()
        .map(|k| unpack(k, n))
        .collect())
}

// Reduction to φ-representatives

/// A φ-representative and the π-representatives of its class.
#[derive(Clone, Debug)]
struct PhiGroup {
    rep: u128,
    members: Vec<u128>,
}

/// Scans a sorted π-representative set in increasing order. Each matrix not
/// yet covered yields its φ-class: the class's π-representatives are queued,
/// and the queue is applied to the rest of the set whenever the budget would
/// be exceeded. The input need not be closed under φ.
fn reduce_shard(n: usize, keys: &[u128], budget: usize) -> Vec<PhiGroup> {
    let mut removed = vec![false; keys.len()];
    let mut pending: HashSet<u128> = HashSet::new();
    let mut out = Vec::new();
    for idx in 0..keys.len() {
        let key = keys[idx];
        if removed[idx] || pending.contains(&key) {
            continue;
        }
        let members: Vec<u128> = phi_orbit_pi_reps(&unpack(key, n))
            .iter()
            .map(pack)
            .collect();
        if pending.len() + members.len() > budget {
            let mut batch: Vec<u128> = pending.drain().collect();
            batch.sort_unstable();
            // Rescan the unprocessed tail; both sides are sorted.
            let mut j = 0;
            for (slot, &k) in removed[idx + 1..].iter_mut().zip(&keys[idx + 1..]) {
                while j < batch.len() && batch[j] < k {
                    j += 1;
                }
                if j < batch.len() && batch[j] == k {
                    *slot = true;
                }
            }
        }
        pending.extend(members.iter().copied());
        out.push(PhiGroup {
            rep: members[0],
            members,
        });
    }
    out
}

fn check_budget(n: usize, budget: usize) -> Result<()> {
    if budget < (n + 1) * (n + 1) {
        return Err(Error::Config(format!(
            "memory budget {budget} is below (n+1)^2 = {} matrices",
            (n + 1) * (n + 1)
        )));
    }
    Ok(())
}

fn reduce_keys(
    n: usize,
    keys: &[u128],
    shard_of: Option<&[u16]>,
    budget: usize,
) -> Result<Vec<PhiGroup>> {
    check_budget(n, budget)?;
    let mut groups = match shard_of {
        None => reduce_shard(n, keys, budget),
        Some(ids) => {
            let shards = ids.iter().copied().max().map_or(0, |m| m as usize + 1);
            let mut parts: Vec<Vec<u128>> = vec![Vec::new(); shards];
            for (&k, &s) in keys.iter().zip(ids) {
                parts[s as usize].push(k);
            }
            let results: Vec<Vec<PhiGroup>> = parts
                .par_iter()
                .map(|part| reduce_shard(n, part, budget))
                .collect();
            results.into_iter().flatten().collect()
        }
    };
    groups.sort_unstable_by_key(|g| g.rep);
    groups.dedup_by_key(|g| g.rep);
    Ok(groups)
}

/// The φ-representatives of the classes met by a sorted set of
/// π-representatives, using at most `budget` matrices of removal queue.
pub fn reduce_to_phi(l_pi: &[BitMatrix], budget: usize) -> Result<Vec<BitMatrix>> {
    let Some(first) = l_pi.first() else {
        return Ok(Vec::new());
    };
    let n = first.order();
    check_order(n)?;
    let keys: Vec<u128> = l_pi.iter().map(pack).collect();
    if keys.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract(
            "input set must be sorted and duplicate-free".into(),
        ));
    }
    Ok(reduce_keys(n, &keys, None, budget)?
        .into_iter()
        .map(|g| unpack(g.rep, n))
        .collect())
}

// Levels

/// Classifies one level from π-representatives that meet every φ-class.
fn build_level(n: usize, pi_keys: &[u128], config: &ClassifyConfig) -> Result<LevelResult> {
    let shard_ids: Option<Vec<u16>> = if n >= 7 {
        let snfs: Vec<SnfVector> = pi_keys
            .par_iter()
            .map(|&k| smith_normal_form(&unpack(k, n)))
            .collect::<Result<_>>()?;
        let mut ids: HashMap<SnfVector, u16> = HashMap::new();
        Some(
            snfs.into_iter()
                .map(|s| {
                    let next = ids.len() as u16;
                    *ids.entry(s).or_insert(next)
                })
                .collect(),
        )
    } else {
        None
    };
    let groups = reduce_keys(n, pi_keys, shard_ids.as_deref(), config.memory_budget)?;
    let phi_classes: Vec<PhiClass> = groups
        .par_iter()
        .map(|g| {
            let rep = unpack(g.rep, n);
            Ok(PhiClass {
                snf: smith_normal_form(&rep)?,
                pi_orbits: g.members.len(),
                matrices: g
                    .members
                    .iter()
                    .map(|&k| pi_class_size(&unpack(k, n)))
                    .sum(),
                rep,
            })
        })
        .collect::<Result<_>>()?;

    let mut by_snf: HashMap<&SnfVector, ClassRecord> = HashMap::new();
    // Classes are in increasing order, so the first one seen is the smallest.
    for c in &phi_classes {
        let r = by_snf.entry(&c.snf).or_insert_with(|| ClassRecord {
            snf: c.snf.clone(),
            matrices: BigUint::zero(),
            pi_classes: BigUint::zero(),
            phi_classes: BigUint::zero(),
            representative: c.rep.clone(),
        });
        r.matrices += &c.matrices;
        r.pi_classes += c.pi_orbits;
        r.phi_classes += 1u32;
    }
    let mut records: Vec<ClassRecord> = by_snf.into_values().collect();
    records.sort_by(|a, b| a.snf.cmp(&b.snf));
    Ok(LevelResult {
        order: n,
        phi_reps: phi_classes.iter().map(|c| c.rep.clone()).collect(),
        records,
        phi_classes,
    })
}

/// Classifies orders `1..=n_max` on a pool of `config.threads` threads,
/// writing checkpoints after each level when a directory is configured.
pub fn classify_up_to(n_max: usize, config: &ClassifyConfig) -> Result<Vec<LevelResult>> {
    classify_range(&[BitMatrix::zero(0)], n_max, config)
}

/// Continues from the φ-representatives of some order `k` up to `n_max`.
pub fn classify_from(
    phi_reps: &[BitMatrix],
    n_max: usize,
    config: &ClassifyConfig,
) -> Result<Vec<LevelResult>> {
    classify_range(phi_reps, n_max, config)
}

/// Classifies the φ-classes met by a sorted, duplicate-free slice of
/// order-`n` π-representatives, such as a shard of an extension. Counts cover
/// whole φ-classes, so they match a full run only when the slice meets every
/// class.
pub fn classify_shard(pi_reps: &[BitMatrix], config: &ClassifyConfig) -> Result<LevelResult> {
    let Some(first) = pi_reps.first() else {
        return Err(Error::Config("empty shard".into()));
    };
    let n = first.order();
    check_order(n)?;
    check_budget(n, config.memory_budget)?;
    if config.threads < 1 {
        return Err(Error::Config("thread count must be at least 1".into()));
    }
    if pi_reps.iter().any(|a| a.order() != n) {
        return Err(Error::Contract("shard mixes orders".into()));
    }
    let keys: Vec<u128> = pi_reps.iter().map(pack).collect();
    if keys.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract(
            "shard must be sorted and duplicate-free".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| build_level(n, &keys, config))
        .map_err(|e| e.at_level(n, None))
}

fn classify_range(
    start: &[BitMatrix],
    n_max: usize,
    config: &ClassifyConfig,
) -> Result<Vec<LevelResult>> {
    if n_max < 1 {
        return Err(Error::Config("the maximum order must be at least 1".into()));
    }
    if config.threads < 1 {
        return Err(Error::Config("thread count must be at least 1".into()));
    }
    check_order(n_max)?;
    check_budget(n_max, config.memory_budget)?;
    let first = start.first().map_or(0, |a| a.order()) + 1;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        let mut out = Vec::new();
        let mut seeds = start.to_vec();
        for n in first..=n_max {
            let keys = extend_keys(&seeds, &config.into()).map_err(|e| e.at_level(n, None))?;
            let level = build_level(n, &keys, config).map_err(|e| e.at_level(n, None))?;
            if let Some(dir) = &config.checkpoint_dir {
                write_checkpoint(dir, &level, config.binary).map_err(|e| e.at_level(n, None))?;
            }
            seeds = level.phi_reps.clone();
            out.push(level);
        }
        Ok(out)
    })
}

// Verification

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub order: usize,
    pub violations: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks a level: the SNF class sizes sum to `2^{n²}`, the π-class counts
/// sum to the closed-form count, and each record is internally consistent.
pub fn verify_level(result: &LevelResult) -> VerifyReport {
    let n = result.order;
    let mut v = Vec::new();
    let total = result.total_matrices();
    let expected = BigUint::one() << (n * n);
    if total != expected {
        v.push(format!(
            "matrix counts sum to {total}, expected 2^{} = {expected}",
            n * n
        ));
    }
    let pi = result.total_pi();
    let pi_expected = pi_class_count(n);
    if pi != pi_expected {
        v.push(format!(
            "π-class counts sum to {pi}, expected {pi_expected}"
        ));
    }
    v.extend(verify_structure(result).violations);
    VerifyReport {
        order: n,
        violations: v,
    }
}

/// The checks of [`verify_level`] that hold for any sub-run, whether or not
/// it started from a complete level: everything except the two totals.
pub fn verify_structure(result: &LevelResult) -> VerifyReport {
    let n = result.order;
    let mut v = Vec::new();
    let phi = result.total_phi();
    if phi != BigUint::from(result.phi_reps.len()) {
        v.push(format!(
            "φ-class counts sum to {phi} but {} φ-representatives are listed",
            result.phi_reps.len()
        ));
    }
    if result.phi_reps.windows(2).any(|w| w[0] >= w[1]) {
        v.push("φ-representatives are not sorted and duplicate-free".into());
    }
    if result.records.windows(2).any(|w| w[0].snf >= w[1].snf) {
        v.push("records are not in SNF report order".into());
    }
    for r in &result.records {
        let tag = r.snf.shorthand();
        if r.snf.order() != n {
            v.push(format!("{tag}: SNF has {} entries", r.snf.order()));
        }
        if !(r.matrices >= r.pi_classes
            && r.pi_classes >= r.phi_classes
            && r.phi_classes >= BigUint::one())
        {
            v.push(format!(
                "{tag}: counts {} / {} / {} are not decreasing and positive",
                r.matrices, r.pi_classes, r.phi_classes
            ));
        }
        if r.representative.order() != n {
            v.push(format!("{tag}: representative has the wrong order"));
            continue;
        }
        match smith_normal_form(&r.representative) {
            Ok(s) if s == r.snf => {}
            Ok(s) => v.push(format!("{tag}: representative has SNF {}", s.shorthand())),
            Err(e) => v.push(format!("{tag}: {e}")),
        }
        if phi_representative(&r.representative) != r.representative {
            v.push(format!("{tag}: representative is not a φ-representative"));
        }
        if result.phi_reps.binary_search(&r.representative).is_err() {
            v.push(format!(
                "{tag}: representative is not among the φ-representatives"
            ));
        }
    }
    VerifyReport {
        order: n,
        violations: v,
    }
}

// Checkpoints

pub fn phi_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("level{n}.phi.txt"))
}

pub fn summary_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("level{n}.summary.tsv"))
}

pub fn binary_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("level{n}.phi.bin"))
}

pub const SUMMARY_HEADER: &str = "snf\tmatrices\tpi_classes\tphi_classes\trepresentative";

pub fn write_summary<W: Write + ?Sized>(
    out: &mut W,
    records: &[ClassRecord],
) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.snf.shorthand(),
            r.matrices,
            r.pi_classes,
            r.phi_classes,
            r.representative.to_hex_line()
        )?;
    }
    Ok(())
}

pub fn parse_summary(text: &str) -> Result<Vec<ClassRecord>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if no == 0 && line.starts_with("snf") || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let bad = |what: &str| Error::Parse(format!("summary line {}: {what}", no + 1));
        if f.len() != 5 {
            return Err(bad("expected 5 tab-separated fields"));
        }
        let num = |s: &str| s.parse::<BigUint>().map_err(|_| bad("invalid count"));
        out.push(ClassRecord {
            snf: f[0].parse()?,
            matrices: num(f[1])?,
            pi_classes: num(f[2])?,
            phi_classes: num(f[3])?,
            representative: BitMatrix::parse_hex_line(f[4])?,
        });
    }
    Ok(out)
}

fn write_checkpoint(dir: &Path, level: &LevelResult, binary: bool) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let n = level.order;
    write_matrix_set(&phi_path(dir, n), &level.phi_reps)?;
    let path = summary_path(dir, n);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    write_summary(&mut w, &level.records)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&path, e))?;
    if binary && (2..=BINARY_MAX_ORDER).contains(&n) {
        write_binary_set(&binary_path(dir, n), &level.phi_reps)?;
    }
    Ok(())
}

/// Reads a level back from its checkpoint files.
pub fn load_level(dir: &Path, n: usize) -> Result<LevelResult> {
    let phi = phi_path(dir, n);
    if !phi.exists() {
        return Err(Error::Dependency {
            order: n,
            what: format!("{} not found", phi.display()),
        });
    }
    let phi_reps = read_matrix_set(&phi).map_err(|e| e.at_level(n, None))?;
    let path = summary_path(dir, n);
    let mut text = String::new();
    File::open(&path)
        .and_then(|f| BufReader::new(f).read_to_string(&mut text))
        .map_err(|e| Error::io(&path, e).at_level(n, None))?;
    Ok(LevelResult {
        order: n,
        phi_reps,
        records: parse_summary(&text)?,
        phi_classes: Vec::new(),
    })
}

/// φ-representatives of order `n` from a checkpoint directory.
pub fn load_phi_reps(dir: &Path, n: usize) -> Result<Vec<BitMatrix>> {
    let phi = phi_path(dir, n);
    if !phi.exists() {
        return Err(Error::Dependency {
            order: n,
            what: format!("φ-representatives ({} not found)", phi.display()),
        });
    }
    read_matrix_set(&phi).map_err(|e| e.at_level(n, None))
}

// Compressed binary sets

pub const BINARY_MAGIC: [u8; 4] = *b"ZMSB";
pub const BINARY_VERSION: u8 = 1;
pub const BINARY_MAX_ORDER: usize = 8;

/// Writes a sorted matrix set of order `2 <= n <= 8`, one byte per row.
///
/// Layout: magic `ZMSB`, version byte, order byte, then groups of
/// `[n−2 prefix rows][u8 count][count × 2 suffix rows]`, where all matrices of
/// a group share their first `n−2` rows. Prefixes with more than 255
/// suffixes are split into several groups.
pub fn write_binary_set(path: &Path, set: &[BitMatrix]) -> Result<()> {
    let n = set.first().map_or(2, |a| a.order());
    if !(2..=BINARY_MAX_ORDER).contains(&n) || set.iter().any(|a| a.order() != n) {
        return Err(Error::Config(format!(
            "binary sets need one order between 2 and {BINARY_MAX_ORDER}"
        )));
    }
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(&BINARY_MAGIC).map_err(io)?;
    w.write_all(&[BINARY_VERSION, n as u8]).map_err(io)?;
    let bytes = |a: &BitMatrix| a.rows().iter().map(|&r| r as u8).collect::<Vec<u8>>();
    let mut i = 0;
    while i < set.len() {
        let head = bytes(&set[i]);
        let prefix = &head[..n - 2];
        let mut j = i;
        while j < set.len() && j - i < 255 && bytes(&set[j])[..n - 2] == *prefix {
            j += 1;
        }
        w.write_all(prefix).map_err(io)?;
        w.write_all(&[(j - i) as u8]).map_err(io)?;
        for a in &set[i..j] {
            w.write_all(&bytes(a)[n - 2..]).map_err(io)?;
        }
        i = j;
    }
    w.flush().map_err(io)
}

pub fn read_binary_set(path: &Path) -> Result<Vec<BitMatrix>> {
    let mut data = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut data))
        .map_err(|e| Error::io(path, e))?;
    let bad = |what: &str| Error::Parse(format!("{}: {what}", path.display()));
    if data.len() < 6 || data[..4] != BINARY_MAGIC {
        return Err(bad("not a binary matrix set"));
    }
    if data[4] != BINARY_VERSION {
        return Err(bad(&format!("unsupported version {}", data[4])));
    }
    let n = data[5] as usize;
    if !(2..=BINARY_MAX_ORDER).contains(&n) {
        return Err(bad("invalid order"));
    }
    let mut out = Vec::new();
    let mut p = 6;
    while p < data.len() {
        if p + n - 1 > data.len() {
            return Err(bad("truncated group header"));
        }
        let prefix = &data[p..p + n - 2];
        let count = data[p + n - 2] as usize;
        p += n - 1;
        if p + 2 * count > data.len() {
            return Err(bad("truncated group"));
        }
        for k in 0..count {
            let rows: Vec<u64> = prefix
                .iter()
                .chain(&data[p + 2 * k..p + 2 * k + 2])
                .map(|&b| b as u64)
                .collect();
            out.push(BitMatrix::new(n, rows)?);
        }
        p += 2 * count;
    }
    Ok(out)
}

/// Reads a matrix list in either format, chosen by the magic bytes.
pub fn read_any_set(path: &Path) -> Result<Vec<BitMatrix>> {
    let mut head = [0u8; 4];
    let is_binary = File::open(path)
        .and_then(|mut f| f.read(&mut head))
        .map_err(|e| Error::io(path, e))?
        == 4
        && head == BINARY_MAGIC;
    if is_binary {
        read_binary_set(path)
    } else {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        for line in BufReader::new(file).lines() {
            text.push_str(&line.map_err(|e| Error::io(path, e))?);
            text.push('\n');
        }
        crate::bitmat::parse_matrix_list(&text)
    }
}

/// π-representatives that the pipeline would produce for one level, computed
/// directly (for tests and oracle comparisons).
pub fn pi_reps_brute_force(n: usize) -> Vec<BitMatrix> {
    let mut keys: Vec<u128> = (0u128..1 << (n * n))
        .into_par_iter()
        .map(|code| pack(&pi_rep(&unpack(code, n))))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter().map(|k| unpack(k, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn hex(s: &str) -> BitMatrix {
        BitMatrix::parse_hex_line(s).unwrap()
    }

    #[test]
    fn packing_preserves_order() {
        let a = hex("1,3,5");
        assert_eq!(unpack(pack(&a), 3), a);
        let b = hex("1,3,6");
        assert!(pack(&a) < pack(&b));
        assert_eq!(pack(&BitMatrix::zero(0)), 0);
    }

    #[test]
    fn store_merges_and_spills() {
        let dir = tempfile::tempdir().unwrap();
        for spill in [None, Some(dir.path().to_path_buf())] {
            let mut s = RunStore::new(4, spill);
            s.push(vec![1, 5, 9]).unwrap();
            s.push(vec![2, 5, 7]).unwrap();
            s.push(vec![0, 9]).unwrap();
            s.push(vec![3]).unwrap();
            assert_eq!(s.finish().unwrap(), [0, 1, 2, 3, 5, 7, 9]);
        }
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn first_levels() {
        let levels = classify_up_to(3, &ClassifyConfig::default()).unwrap();
        let l1 = &levels[0];
        assert_eq!(l1.phi_reps, [hex("0"), hex("1")]);
        let l2 = &levels[1];
        assert_eq!(l2.phi_reps.len(), 3);
        let l3 = &levels[2];
        assert_eq!(l3.phi_reps.len(), 12);
        let sizes: Vec<String> = l3.records.iter().map(|r| r.matrices.to_string()).collect();
        assert_eq!(sizes, ["1", "49", "288", "168", "6"]);
        for l in &levels {
            assert!(verify_level(l).passed(), "{:?}", verify_level(l));
        }
    }

    #[test]
    fn extend_and_reduce_small() {
        let a2 = classify_up_to(2, &ClassifyConfig::default()).unwrap()[1]
            .phi_reps
            .clone();
        let all = pi_reps_brute_force(3);
        assert_eq!(all.len(), 36);
        // Borders of the φ-representatives meet every φ-class but miss some π-classes.
        let ext = extend_level(&a2, &ExtendOptions::default()).unwrap();
        assert!(ext.len() < 36);
        assert!(ext.iter().all(|a| all.binary_search(a).is_ok()));
        let phi = reduce_to_phi(&all, 16).unwrap();
        assert_eq!(phi.len(), 12);
        assert_eq!(reduce_to_phi(&ext, 16).unwrap(), phi);
        assert!(matches!(reduce_to_phi(&all, 15), Err(Error::Config(_))));
        assert_eq!(
            reduce_to_phi(&[BitMatrix::zero(3)], 16).unwrap(),
            [BitMatrix::zero(3)]
        );
    }

    #[test]
    fn single_seed_extension_is_subset() {
        let seed = BitMatrix::zero(1);
        let got = extend_level(std::slice::from_ref(&seed), &ExtendOptions::default()).unwrap();
        let mut direct: Vec<BitMatrix> = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for b in [false, true] {
                    direct.push(pi_rep(&seed.bordered(x, y, b).unwrap()));
                }
            }
        }
        direct.sort();
        direct.dedup();
        assert_eq!(got, direct);
    }

    #[test]
    fn snf_is_phi_invariant() {
        for code in 0u128..1 << 9 {
            let a = unpack(code, 3);
            let s = smith_normal_form(&a).unwrap();
            for r in phi_orbit_pi_reps(&a) {
                assert_eq!(smith_normal_form(&r).unwrap(), s);
            }
        }
    }

    #[test]
    fn warm_and_cold_agree_and_thread_counts_agree() {
        let cold = ClassifyConfig {
            warm_start: false,
            ..ClassifyConfig::default()
        };
        let a = classify_up_to(4, &ClassifyConfig::default()).unwrap();
        let b = classify_up_to(4, &cold).unwrap();
        let c = classify_up_to(
            4,
            &ClassifyConfig {
                threads: 3,
                ..ClassifyConfig::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn sharded_reduction_matches() {
        let levels = classify_up_to(4, &ClassifyConfig::default()).unwrap();
        let _ = &levels;
        let a4 = pi_reps_brute_force(4);
        let keys: Vec<u128> = a4.iter().map(pack).collect();
        let ids: Vec<u16> = a4
            .iter()
            .map(|a| smith_normal_form(a).unwrap().adv() as u16)
            .collect();
        assert_eq!(a4.len(), 317);
        let plain = reduce_keys(4, &keys, None, 25).unwrap();
        let sharded = reduce_keys(4, &keys, Some(&ids), 25).unwrap();
        let reps = |g: &[PhiGroup]| g.iter().map(|x| x.rep).collect::<Vec<_>>();
        assert_eq!(reps(&plain), reps(&sharded));
        assert_eq!(plain.len(), 39);
    }

    #[test]
    fn tampered_record_fails_verification() {
        let mut level = classify_up_to(3, &ClassifyConfig::default())
            .unwrap()
            .pop()
            .unwrap();
        level.records[1].matrices += 1u32;
        let report = verify_level(&level);
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| v.contains("2^9")));
    }

    #[test]
    fn checkpoints_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let config = ClassifyConfig {
            checkpoint_dir: Some(dir.path().to_path_buf()),
            binary: true,
            ..ClassifyConfig::default()
        };
        let levels = classify_up_to(4, &config).unwrap();
        for l in &levels {
            let loaded = load_level(dir.path(), l.order).unwrap();
            assert_eq!(loaded.records, l.records);
            assert_eq!(loaded.phi_reps, l.phi_reps);
            if l.order >= 2 {
                assert_eq!(
                    read_binary_set(&binary_path(dir.path(), l.order)).unwrap(),
                    l.phi_reps
                );
                assert_eq!(
                    read_any_set(&binary_path(dir.path(), l.order)).unwrap(),
                    l.phi_reps
                );
            }
        }
        let resumed = classify_from(&levels[2].phi_reps, 4, &ClassifyConfig::default()).unwrap();
        assert_eq!(resumed[0], levels[3]);
        assert!(matches!(
            load_level(dir.path(), 7),
            Err(Error::Dependency { order: 7, .. })
        ));
    }

    #[test]
    fn binary_groups_split_past_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.bin");
        let mut set: Vec<BitMatrix> = (0..600u64)
            .map(|k| BitMatrix::new(4, vec![1, 2, k >> 4 & 0xF, k & 0xF]).unwrap())
            .collect();
        set.sort();
        set.dedup();
        write_binary_set(&path, &set).unwrap();
        assert_eq!(read_binary_set(&path).unwrap(), set);
    }

    #[test]
    fn pipeline_partition_matches_brute_force() {
        // Group every order-3 matrix by (SNF, π-rep, φ-rep) directly.
        let level = classify_up_to(3, &ClassifyConfig::default())
            .unwrap()
            .pop()
            .unwrap();
        let mut by_snf: BTreeMap<SnfVector, (u64, BTreeSet<BitMatrix>, BTreeSet<BitMatrix>)> =
            BTreeMap::new();
        for code in 0u128..1 << 9 {
            let a = unpack(code, 3);
            let e = by_snf.entry(smith_normal_form(&a).unwrap()).or_default();
            e.0 += 1;
            e.1.insert(pi_rep(&a));
            e.2.insert(phi_representative(&a));
        }
        assert_eq!(by_snf.len(), level.records.len());
        for (r, (snf, (m, pis, phis))) in level.records.iter().zip(&by_snf) {
            assert_eq!(&r.snf, snf);
            assert_eq!(r.matrices, BigUint::from(*m));
            assert_eq!(r.pi_classes, BigUint::from(pis.len()));
            assert_eq!(r.phi_classes, BigUint::from(phis.len()));
            assert_eq!(&r.representative, phis.iter().next().unwrap());
        }
    }

    use std::collections::BTreeSet;
}
