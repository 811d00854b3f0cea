//! `kmul` commands: build, verify, mul, bounds, bench.
//!
//! Every command writes its report to the supplied writers, so the binary
//! and the tests share one code path. Artifacts never contain timings.

pub mod format;
pub mod grid;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use kmul_core::bounds::{self, BoundReport, MuTable, RelationStatus};
use kmul_core::builder::{direct_product, CostReport, Flattened};
use kmul_core::relations::witness_relations;
use kmul_core::{BuildOptions, Builder, Costing, Error, Poly, SubMode, Verdict};
use serde::Deserialize;
use thiserror::Error as ThisError;

pub use format::DecompositionFile;
pub use grid::{parse_element, parse_q, Grid, DEFAULT_GRID};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Malformed(String),
    /// A decomposition or product disagrees with the field product.
    #[error("{0}")]
    Mismatch(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Malformed(_) => 2,
            CliError::Mismatch(_) => 1,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPrimePower(_)
            | Error::FieldTooLarge(_)
            | Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::OutOfCoverage { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Internal(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "kmul", version, about = "k-fold multiplication algorithms over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, flatten and verify an algorithm for F_{q^n}.
    Build(BuildArgs),
    /// Re-check every basis tuple of a decomposition file.
    Verify(VerifyArgs),
    /// Multiply field elements with a decomposition file.
    Mul(MulArgs),
    /// Render the tower bounds and witness relations.
    Bounds(BoundsArgs),
    /// Build every cell of a parameter grid and emit CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Field order, as an integer or `p^m`.
    #[arg(long, value_parser = parse_q)]
    pub q: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value = "recursive")]
    pub mode: SubMode,
    /// Seed for the randomized check used above the tuple budget.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; the JSON goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MulArgs {
    pub file: PathBuf,
    /// One operand per flag: comma-separated coordinate labels.
    #[arg(long = "inputs", required = true)]
    pub inputs: Vec<String>,
    #[arg(long, default_value = "mu")]
    pub costing: Costing,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, value_parser = parse_q)]
    pub q: u64,
    #[arg(long)]
    pub k: u64,
    #[arg(long)]
    pub n: u64,
    /// JSON `{"s": [...], "b": [...]}` replacing the built witness table.
    #[arg(long)]
    pub table_file: Option<PathBuf>,
    /// Extension degrees `(n, m)` for the witness relations.
    #[arg(long, default_value_t = 2)]
    pub lemma_n: usize,
    #[arg(long, default_value_t = 2)]
    pub lemma_m: usize,
    /// Tower steps listed at least.
    #[arg(long, default_value_t = 10)]
    pub steps: u32,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = DEFAULT_GRID)]
    pub grid: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` and runs the command; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Build(a) => cmd_build(&a, out, err).map(|_| ()),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Mul(a) => cmd_mul(&a, out).map(|_| ()),
        Command::Bounds(a) => cmd_bounds(&a, out),
        Command::Bench(a) => cmd_bench(&a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Result of a successful build.
#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub file: DecompositionFile,
    pub cost: CostReport,
    /// Genus-0 bound as `(num, den)`.
    pub bound: (u128, u128),
    pub within_bound: bool,
}

pub fn build(args: &BuildArgs) -> CliResult<BuildOutcome> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if args.k < 2 {
        return Err(CliError::Usage("--k must be at least 2".into()));
    }
    let opts = BuildOptions {
        mode: args.mode,
        seed: args.seed,
        ..BuildOptions::default()
    };
    let builder = Builder::for_order(args.q, opts)?;
    let alg = builder.build(args.n, args.k)?;
    let Flattened {
        decomposition,
        verification,
    } = alg.flatten()?;
    if decomposition.rank() != alg.cost().rank {
        return Err(CliError::Internal("flattened rank differs from cost report".into()));
    }
    let bound = alg.genus0_bound(&builder)?;
    Ok(BuildOutcome {
        file: DecompositionFile::from_algorithm(&alg, &decomposition, args.mode, &verification),
        cost: alg.cost().clone(),
        bound,
        within_bound: alg.within_genus0_bound(&builder)?,
    })
}

fn render_fraction((num, den): (u128, u128)) -> String {
    if den == 1 {
        num.to_string()
    } else {
        format!("{num}/{den}")
    }
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<BuildOutcome> {
    let outcome = build(args)?;
    let f = &outcome.file;
    let json = f.to_json();
    // the report goes to stdout unless stdout carries the file
    let mut report = String::new();
    let _ = writeln!(report, "field: F_{}^{}, Q = {:?}", args.q, args.n, f.ext_modulus);
    let _ = writeln!(report, "k: {}", args.k);
    let _ = writeln!(report, "mode: {}", args.mode);
    let _ = writeln!(report, "rank: {}", outcome.cost.rank);
    let _ = writeln!(report, "chained bilinear products: {}", outcome.cost.nu_count);
    for d in &outcome.cost.per_degree {
        let _ = writeln!(
            report,
            "  degree {}: {} place(s), s = {}, b = {}",
            d.degree, d.count, d.s, d.b
        );
    }
    let _ = writeln!(
        report,
        "genus-0 bound: {} {} {}",
        outcome.cost.rank,
        if outcome.within_bound { "<=" } else { ">" },
        render_fraction(outcome.bound)
    );
    let _ = writeln!(report, "verification: {}", f.provenance.verification);
    match &args.out {
        Some(path) => {
            std::fs::write(path, json).map_err(|e| io_err(path, e))?;
            let _ = writeln!(report, "wrote {}", path.display());
            out.write_all(report.as_bytes())
        }
        None => {
            let _ = err.write_all(report.as_bytes());
            out.write_all(json.as_bytes())
        }
    }
    .map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(outcome)
}

pub fn read_file(path: &Path) -> CliResult<DecompositionFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    DecompositionFile::from_json(&text).map_err(CliError::Malformed)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult<()> {
    let file = read_file(&args.file)?;
    let dec = file.decomposition().map_err(CliError::Malformed)?;
    let verdict = dec.verify_with_budget(u128::MAX)?;
    match verdict {
        Verdict::Verified => {
            let _ = writeln!(
                out,
                "PASS rank {} ({} basis tuples)",
                dec.rank(),
                dec.basis_tuples()
            );
            Ok(())
        }
        Verdict::Mismatch {
            tuple,
            expected,
            got,
        } => {
            let _ = writeln!(out, "FAIL at basis tuple {tuple:?}");
            Err(CliError::Mismatch(format!(
                "basis tuple {tuple:?}: expected {expected:?}, got {got:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulOutcome {
    pub product: Vec<u32>,
    /// Sub-multiplications under the requested costing.
    pub cost: usize,
    pub rank: usize,
}

pub fn cmd_mul(args: &MulArgs, out: &mut dyn Write) -> CliResult<MulOutcome> {
    let file = read_file(&args.file)?;
    let dec = file.decomposition().map_err(CliError::Malformed)?;
    let inputs = args
        .inputs
        .iter()
        .map(|s| parse_element(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Usage)?;
    if inputs.len() != file.k {
        return Err(CliError::Usage(format!(
            "{} operands given, the file multiplies k = {}",
            inputs.len(),
            file.k
        )));
    }
    for x in &inputs {
        dec.field().check(x).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let (product, cost) = match args.costing {
        Costing::Mu => (dec.apply(&inputs)?, dec.rank()),
        Costing::Nu => {
            // the chained evaluation lives in the algorithm, not in the flat file
            let opts = BuildOptions {
                mode: file.mode().map_err(CliError::Malformed)?,
                ..BuildOptions::default()
            };
            let builder = Builder::new(file.base_field().map_err(CliError::Malformed)?, opts);
            let q_place = Poly::new(file.ext_modulus.clone());
            let alg = builder.build_for_modulus(&q_place, file.k, usize::MAX)?;
            let places: Vec<Vec<u32>> = alg.plan().places.iter().map(|p| p.coeffs().to_vec()).collect();
            if places != file.provenance.places || alg.cost().rank != dec.rank() {
                return Err(CliError::Malformed(
                    "provenance does not match the rebuilt algorithm".into(),
                ));
            }
            (alg.run(&inputs, Costing::Nu)?, alg.cost().nu_count)
        }
    };
    let direct = direct_product(dec.field(), &inputs)?;
    let _ = writeln!(out, "product: {}", join(&product));
    let _ = writeln!(out, "mu-cost: {}", dec.rank());
    if args.costing == Costing::Nu {
        let _ = writeln!(out, "nu-cost: {cost}");
    }
    if direct != product {
        let _ = writeln!(out, "direct product: {} (MISMATCH)", join(&direct));
        return Err(CliError::Mismatch(format!(
            "decomposition gives {product:?}, direct product {direct:?}"
        )));
    }
    let _ = writeln!(out, "direct product: match");
    Ok(MulOutcome {
        product,
        cost,
        rank: dec.rank(),
    })
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Deserialize)]
struct TableFile {
    s: Vec<usize>,
    b: Vec<usize>,
}

fn load_table(path: &Path, k: usize) -> CliResult<MuTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    let t: TableFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    Ok(MuTable::user_supplied(k, &t.s, &t.b)?)
}

/// The full report, relations included.
pub fn bounds_report(args: &BoundsArgs) -> CliResult<BoundReport> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if args.lemma_n == 0 || args.lemma_m == 0 {
        return Err(CliError::Usage("--lemma-n and --lemma-m must be positive".into()));
    }
    let params = bounds::smallest_even_r(args.q, args.k)?;
    let builder = Builder::for_order(args.q, BuildOptions::default())?;
    let k = args.k as usize;
    let table = match &args.table_file {
        Some(path) => load_table(path, k)?,
        None => builder.mu_table(k, params.r as usize)?,
    };
    let mut report = bounds::bound_report(args.q, args.k, args.n, &table, args.steps)?;
    report.relations = witness_relations(&builder, k, args.lemma_n, args.lemma_m)?;
    Ok(report)
}

pub fn render_bounds(r: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "q = {}, k = {}, n = {}", r.q, r.k, r.n);
    let _ = writeln!(s, "r = {}, l = {}", r.params.r, r.params.l);
    let _ = writeln!(s, "\nwitness table (k = {}):", r.table.k);
    let _ = writeln!(s, "  {:>6} {:>6} {:>6}  provenance", "degree", "s", "b");
    for e in &r.table.entries {
        let _ = writeln!(
            s,
            "  {:>6} {:>6} {:>6}  {}",
            e.degree,
            e.s,
            e.b,
            serde_json::to_value(e.provenance).unwrap().as_str().unwrap_or("")
        );
    }
    match &r.location {
        Some(loc) => {
            let step = loc.step.map_or("none".to_string(), |i| i.to_string());
            let interval = loc
                .interval
                .map_or("none".to_string(), |(a, b)| format!("[{a}, {b}]"));
            let _ = writeln!(
                s,
                "\nstep: {step}, interval {interval}, estimate {:.4}",
                loc.estimate
            );
        }
        None => {
            let _ = writeln!(s, "\nstep: n below the covered range {}", 2 * r.params.r + 3);
        }
    }
    let _ = writeln!(s, "\ntower steps:");
    let _ = writeln!(
        s,
        "  {:>3} {:>12} {:>14} {:>14} {:>14} {:>12} {:>12} {:>9} {:>11} {:>12} {:>12}",
        "i", "genus", "genus lower", "genus upper", "tight upper", "m_i", "delta", "gamma", "gamma claim", "R exact", "(k+1)^i"
    );
    for st in &r.steps {
        let rx = st.r_exact.as_ref().map_or("-".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "  {:>3} {:>12} {:>14.3} {:>14.3} {:>14.3} {:>12} {:>12} {:>9} {:>11} {:>12} {:>12}",
            st.i,
            st.genus,
            st.genus_lower.approx,
            st.genus_upper.approx,
            st.genus_tight_upper.approx,
            st.m_i,
            st.delta,
            st.gamma_exact,
            st.gamma_claimed,
            rx,
            st.r_claimed_lower
        );
    }
    let _ = writeln!(s, "\nbounds:");
    let line = |s: &mut String, name: &str, v: &bounds::Exact| {
        let _ = writeln!(s, "  {name:<28} {} (~{:.3})", v.exact, v.approx);
    };
    if let (Some(mu), Some(nu)) = (&r.curve_mu, &r.curve_nu) {
        line(&mut s, "curve mu", mu);
        line(&mut s, "curve nu", nu);
    }
    if let Some(e) = r.existence {
        let _ = writeln!(s, "  {:<28} {e}", "degree-n place exists");
    }
    line(&mut s, "tower mu", &r.tower_mu);
    line(&mut s, "tower nu", &r.tower_nu);
    let _ = writeln!(s, "  {:<28} {}", "tower linear factor", r.tower_linear_factor);
    line(&mut s, "linear mu", &r.linear_mu);
    line(&mut s, "linear mu (simplified)", &r.linear_mu_simplified);
    line(&mut s, "linear nu", &r.linear_nu);
    line(&mut s, "linear nu (simplified)", &r.linear_nu_simplified);
    let _ = writeln!(s, "\nrelations:");
    for rel in &r.relations {
        let status = match rel.status {
            RelationStatus::Holds => "holds",
            RelationStatus::Violated => "VIOLATED",
            RelationStatus::NotCheckable => "not checkable",
        };
        let vals = match (rel.lhs, rel.rhs) {
            (Some(a), Some(b)) => format!("{a} <= {b}"),
            _ => "-".into(),
        };
        let _ = writeln!(s, "  {:<22} {:<40} {:<14} {status}", rel.name, rel.statement, vals);
    }
    s
}

pub fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> CliResult<()> {
    let report = bounds_report(args)?;
    let text = if args.json {
        let mut j = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        j.push('\n');
        j
    } else {
        render_bounds(&report)
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub const BENCH_HEADER: &str = "q,n,k,rank,nu,bound_mu,rank_le_bound,verification,status";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub q: u64,
    pub n: usize,
    pub k: usize,
    pub rank: Option<usize>,
    pub nu: Option<usize>,
    pub bound_mu: Option<String>,
    pub rank_le_bound: Option<bool>,
    pub verification: Option<String>,
    pub status: String,
}

impl BenchRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_csv(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or(String::new(), T::to_string)
        }
        let status = if self.status.contains([',', '"', '\n']) {
            format!("\"{}\"", self.status.replace('"', "\"\"").replace('\n', " "))
        } else {
            self.status.clone()
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.q,
            self.n,
            self.k,
            opt(&self.rank),
            opt(&self.nu),
            opt(&self.bound_mu),
            opt(&self.rank_le_bound),
            opt(&self.verification),
            status
        )
    }
}

struct BenchCache {
    builders: HashMap<u64, Builder>,
    tables: HashMap<(u64, usize), MuTable>,
    seed: u64,
}

impl BenchCache {
    fn builder(&mut self, q: u64) -> CliResult<&Builder> {
        if !self.builders.contains_key(&q) {
            let opts = BuildOptions {
                seed: self.seed,
                ..BuildOptions::default()
            };
            self.builders.insert(q, Builder::for_order(q, opts)?);
        }
        Ok(&self.builders[&q])
    }

    fn cell(&mut self, q: u64, n: usize, k: usize) -> CliResult<BenchRow> {
        if n == 0 || k < 2 {
            return Err(CliError::Usage(format!("cell needs n >= 1 and k >= 2, got n = {n}, k = {k}")));
        }
        let params = bounds::smallest_even_r(q, k as u64)?;
        let builder = self.builder(q)?;
        let alg = builder.build(n, k)?;
        let flat = alg.flatten()?;
        let table = match self.tables.get(&(q, k)) {
            Some(t) => t.clone(),
            None => {
                let t = self.builders[&q].mu_table(k, params.r as usize)?;
                self.tables.insert((q, k), t.clone());
                t
            }
        };
        let bound = bounds::tower_bounds(&params, n as u64, &table)?.mu;
        let rank = flat.decomposition.rank();
        Ok(BenchRow {
            q,
            n,
            k,
            rank: Some(rank),
            nu: Some(alg.cost().nu_count),
            bound_mu: Some(bounds::Exact::from_rational(&bound).exact),
            rank_le_bound: Some(bounds::witness_within(rank, &bound)),
            verification: Some(format::verification_label(&flat.verification)),
            status: "ok".into(),
        })
    }
}

/// Runs every cell in grid order; failures become rows, never aborts.
/// Per-cell times go to `err`.
pub fn bench(grid: &Grid, seed: u64, err: &mut dyn Write) -> Vec<BenchRow> {
    let mut cache = BenchCache {
        builders: HashMap::new(),
        tables: HashMap::new(),
        seed,
    };
    grid.cells()
        .into_iter()
        .map(|(q, n, k)| {
            let start = Instant::now();
            let row = cache.cell(q, n, k).unwrap_or_else(|e| BenchRow {
                q,
                n,
                k,
                rank: None,
                nu: None,
                bound_mu: None,
                rank_le_bound: None,
                verification: None,
                status: format!("error: {e}"),
            });
            let _ = writeln!(err, "q={q} n={n} k={k} {:.3?}", start.elapsed());
            row
        })
        .collect()
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(BENCH_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let grid = Grid::parse(&args.grid).map_err(CliError::Usage)?;
    let rows = bench(&grid, args.seed, err);
    let csv = render_csv(&rows);
    match &args.out {
        Some(path) => std::fs::write(path, &csv).map_err(|e| io_err(path, e))?,
        None => out
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string()))?,
    }
    let failed = rows.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        return Err(CliError::Mismatch(format!("{failed} cell(s) failed")));
    }
    Ok(())
}
