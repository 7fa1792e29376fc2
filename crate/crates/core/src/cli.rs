//! Command-line front end. [`run`] parses arguments, writes reports to the
//! given streams and returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bitmat::{write_matrix_list, BitMatrix};
use crate::bounds::{iterate_bounds, BoundOptions};
use crate::canon::{phi_orbit_pi_reps, phi_representative, pi_representative};
use crate::classify::{
    classify_up_to, load_level, load_phi_reps, phi_path, read_any_set, summary_path, verify_level,
    write_summary, ClassifyConfig, LevelResult,
};
use crate::count::{
    pi_class_count, pi_class_ratio, rank1_count, rank2_count, snf_count_upper_bound,
};
use crate::error::{Error, Result};
use crate::snf::smith_normal_form;
use crate::spectra::{incidence, spectrum, IncidenceSweep, SpectrumInputs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_OVERFLOW: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "zomat",
    version,
    about = "Classification and determinant spectra of square (0,1) matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify all matrices up to an order and print the SNF classes
    Classify(ClassifyArgs),
    /// Print the π- or φ-representative of a matrix
    Canon(CanonArgs),
    /// Print the Smith normal form of a matrix
    Snf(MatrixArg),
    /// Determinant spectrum of an order
    Spectrum(SpectrumArgs),
    /// SNF incidence between an order and the next
    Incidence(IncidenceArgs),
    /// Lower bounds from bordering seed matrices
    Bound(BoundArgs),
    /// Closed-form counts
    Count(CountArgs),
    /// Re-check checkpoint files
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub max_order: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
    /// Matrices held by reduction batches and the sorted-run store
    #[arg(long, default_value_t = 1 << 24)]
    pub memory_budget: usize,
    /// Directory for spilled sorted runs
    #[arg(long)]
    pub spill_dir: Option<PathBuf>,
    /// Also write compressed binary φ-representative sets
    #[arg(long)]
    pub binary: bool,
    #[arg(long)]
    pub no_warm_start: bool,
    #[arg(long)]
    pub no_symmetry: bool,
}

#[derive(Args, Debug)]
pub struct MatrixArg {
    /// Comma-separated hexadecimal rows, e.g. 3,5,6
    pub matrix: String,
}

#[derive(Args, Debug)]
pub struct CanonArgs {
    pub matrix: String,
    /// π-representative with minimizer count and class size (default)
    #[arg(long, conflicts_with = "phi")]
    pub pi: bool,
    /// φ-representative with the π-classes of its φ-class
    #[arg(long)]
    pub phi: bool,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub order: usize,
    /// φ-representatives of order n−1
    #[arg(long)]
    pub phi_reps: Option<PathBuf>,
    /// Checkpoint directory holding level n−1 and/or level n
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IncidenceArgs {
    #[arg(long)]
    pub order: usize,
    /// Checkpoint directory holding levels n and n+1
    #[arg(long)]
    pub checkpoint_dir: PathBuf,
    /// Print 1/x/o instead of •/⋆/∘
    #[arg(long)]
    pub ascii: bool,
    /// Extend only one representative per SNF class
    #[arg(long)]
    pub representatives: bool,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Order being bounded; the seeds must have order one less
    #[arg(long)]
    pub order: Option<usize>,
    /// Seed matrices (text or binary set)
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    #[arg(long, default_value_t = 10_000)]
    pub cap: usize,
    #[arg(long)]
    pub no_prune: bool,
    /// Witness file for the last round
    #[arg(long)]
    pub witnesses: Option<PathBuf>,
    /// Promising matrices of the last round
    #[arg(long)]
    pub promising: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub order: usize,
    /// Upper bound on the number of SNFs with this determinant
    #[arg(long)]
    pub snf_det: Option<u64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub checkpoint_dir: PathBuf,
    /// Only this level; by default every level present
    #[arg(long)]
    pub order: Option<usize>,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Dependency { .. } => EXIT_IO,
        Error::Overflow(_) => EXIT_OVERFLOW,
        Error::Contract(_) => EXIT_VERIFY,
        _ => EXIT_USAGE,
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn matrix(s: &str) -> Result<BitMatrix> {
    BitMatrix::parse_hex_line(s)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Classify(a) => classify_cmd(a, out),
        Command::Canon(a) => canon_cmd(a, out),
        Command::Snf(a) => {
            writeln!(out, "{}", smith_normal_form(&matrix(&a.matrix)?)?).map_err(io_out)?;
            Ok(EXIT_OK)
        }
        Command::Spectrum(a) => spectrum_cmd(a, out),
        Command::Incidence(a) => incidence_cmd(a, out),
        Command::Bound(a) => bound_cmd(a, out),
        Command::Count(a) => count_cmd(a, out),
        Command::Verify(a) => verify_cmd(a, out),
    }
}

fn write_level(out: &mut dyn Write, l: &LevelResult) -> Result<()> {
    writeln!(
        out,
        "# order {}: {} matrices, {} pi-classes, {} phi-classes",
        l.order,
        l.total_matrices(),
        l.total_pi(),
        l.total_phi()
    )
    .and_then(|_| write_summary(out, &l.records))
    .map_err(io_out)
}

fn classify_cmd(a: ClassifyArgs, out: &mut dyn Write) -> Result<i32> {
    let config = ClassifyConfig {
        threads: a.threads,
        checkpoint_dir: a.checkpoint_dir,
        memory_budget: a.memory_budget,
        warm_start: !a.no_warm_start,
        symmetry: !a.no_symmetry,
        binary: a.binary,
        spill_dir: a.spill_dir,
    };
    let levels = classify_up_to(a.max_order, &config)?;
    let mut failed = false;
    for l in &levels {
        write_level(out, l)?;
        let report = verify_level(l);
        for v in &report.violations {
            writeln!(out, "# violation: {v}").map_err(io_out)?;
        }
        failed |= !report.passed();
    }
    Ok(if failed { EXIT_VERIFY } else { EXIT_OK })
}

fn canon_cmd(a: CanonArgs, out: &mut dyn Write) -> Result<i32> {
    let m = matrix(&a.matrix)?;
    let text = if a.phi {
        let rep = phi_representative(&m);
        let members = phi_orbit_pi_reps(&m);
        let mut s = format!(
            "representative\t{}\npi_classes\t{}\n",
            rep.to_hex_line(),
            members.len()
        );
        for p in members {
            s.push_str(&format!("pi\t{}\n", p.to_hex_line()));
        }
        s
    } else {
        let cert = pi_representative(&m);
        let perm = |p: &crate::bitmat::Perm| {
            p.images()
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "representative\t{}\ncount\t{}\nclass_size\t{}\nrow_perm\t{}\ncol_perm\t{}\n",
            cert.rep.to_hex_line(),
            cert.count,
            crate::canon::pi_class_size(&m),
            perm(&cert.p),
            perm(&cert.q)
        )
    };
    out.write_all(text.as_bytes()).map_err(io_out)?;
    Ok(EXIT_OK)
}

fn optional_level(dir: &Path, n: usize) -> Result<Option<LevelResult>> {
    if n == 0 || !phi_path(dir, n).exists() || !summary_path(dir, n).exists() {
        return Ok(None);
    }
    load_level(dir, n).map(Some)
}

fn spectrum_cmd(a: SpectrumArgs, out: &mut dyn Write) -> Result<i32> {
    let n = a.order;
    let mut prev = match &a.phi_reps {
        Some(p) => Some(read_any_set(p)?),
        None => None,
    };
    let mut level = None;
    if let Some(dir) = &a.checkpoint_dir {
        if prev.is_none() && n >= 2 && phi_path(dir, n - 1).exists() {
            prev = Some(load_phi_reps(dir, n - 1)?);
        }
        level = optional_level(dir, n)?;
    }
    let report = spectrum(
        n,
        SpectrumInputs {
            prev_phi_reps: prev.as_deref(),
            level: level.as_ref(),
        },
    )?;
    out.write_all(report.to_tsv().as_bytes()).map_err(io_out)?;
    Ok(EXIT_OK)
}

fn incidence_cmd(a: IncidenceArgs, out: &mut dyn Write) -> Result<i32> {
    let from = load_level(&a.checkpoint_dir, a.order)?;
    let to = load_level(&a.checkpoint_dir, a.order + 1)?;
    let to_snfs: Vec<_> = to.records.iter().map(|r| r.snf.clone()).collect();
    let sweep = if a.representatives {
        IncidenceSweep::Representatives
    } else {
        IncidenceSweep::AllPhiReps
    };
    let m = incidence(&from, &to_snfs, sweep)?;
    out.write_all(m.render(a.ascii).as_bytes())
        .map_err(io_out)?;
    Ok(EXIT_OK)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn bound_cmd(a: BoundArgs, out: &mut dyn Write) -> Result<i32> {
    let seeds = read_any_set(&a.seeds)?;
    if let (Some(order), Some(s)) = (a.order, seeds.first()) {
        if s.order() + 1 != order {
            return Err(Error::Dimension {
                expected: order.saturating_sub(1),
                found: s.order(),
            });
        }
    }
    let opts = BoundOptions {
        prune: !a.no_prune,
        cap: a.cap,
        ..BoundOptions::default()
    };
    let runs = iterate_bounds(&seeds, a.rounds, &opts)?;
    writeln!(out, "order\tbound\tdmax\tseeds\tpromising").map_err(io_out)?;
    for r in &runs {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.order,
            r.first0,
            r.dmax,
            r.seeds.len(),
            r.promising.len()
        )
        .map_err(io_out)?;
    }
    let last = runs.last().expect("at least one round");
    if !last.verify_witnesses()? {
        return Err(Error::Contract(
            "a witness does not reproduce its determinant".into(),
        ));
    }
    if let Some(p) = &a.witnesses {
        write_file(p, &last.witness_file()?)?;
    }
    if let Some(p) = &a.promising {
        let mut buf = Vec::new();
        write_matrix_list(&mut buf, &last.promising).map_err(|e| Error::io(p, e))?;
        std::fs::write(p, buf).map_err(|e| Error::io(p, e))?;
    }
    Ok(EXIT_OK)
}

fn count_cmd(a: CountArgs, out: &mut dyn Write) -> Result<i32> {
    let n = a.order;
    if n == 0 {
        return Err(Error::Domain("order must be at least 1".into()));
    }
    let mut s = format!(
        "order\t{n}\npi_classes\t{}\nratio\t{}\nrank1\t{}\nrank2\t{}\n",
        pi_class_count(n),
        pi_class_ratio(n, 5),
        rank1_count(n),
        rank2_count(n)
    );
    if let Some(d) = a.snf_det {
        s.push_str(&format!(
            "snf_upper_bound\t{}\n",
            snf_count_upper_bound(n, d)?
        ));
    }
    out.write_all(s.as_bytes()).map_err(io_out)?;
    Ok(EXIT_OK)
}

fn verify_cmd(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let orders: Vec<usize> = match a.order {
        Some(n) => vec![n],
        None => (1..=crate::classify::MAX_PACKED_ORDER)
            .filter(|&n| phi_path(&a.checkpoint_dir, n).exists())
            .collect(),
    };
    if orders.is_empty() {
        return Err(Error::Dependency {
            order: 1,
            what: format!("no checkpoints in {}", a.checkpoint_dir.display()),
        });
    }
    let mut failed = false;
    for n in orders {
        let level = load_level(&a.checkpoint_dir, n)?;
        let mut report = verify_level(&level);
        // The φ-representatives themselves must be canonical.
        for rep in &level.phi_reps {
            if rep.order() != n || phi_representative(rep) != *rep {
                report
                    .violations
                    .push(format!("{} is not a φ-representative", rep.to_hex_line()));
            }
        }
        if report.passed() {
            writeln!(out, "order {n}: ok").map_err(io_out)?;
        } else {
            failed = true;
            writeln!(out, "order {n}: {} violation(s)", report.violations.len()).map_err(io_out)?;
            for v in &report.violations {
                writeln!(out, "  {v}").map_err(io_out)?;
            }
        }
    }
    Ok(if failed { EXIT_VERIFY } else { EXIT_OK })
}
