//! Command-line front end for the `cokernels` library.
//!
//! [`run`] parses arguments, dispatches to the library and renders the
//! result as JSON, CSV or plain text. Every JSON document deserializes back
//! into the output type in [`output`] that produced it.

pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cokernels::experiments::{
    enumerate_full, enumerate_lifts, matrix_rank_census, probe_conjecture, residue_rank_census, run_sweep,
    sample_joint_distribution, sampled_report, with_workers, Budget, ExperimentReport, JointClass, SamplerConfig,
    SweepConfig, Verdict, BUDGET_ENV,
};
use cokernels::formulas::{
    aut_count_formula, cl_limit, l1deg1_count, main2_factor, main3_count, main_limit, rank_count_formula,
    rational_text, ProblemInstance,
};
use cokernels::module::{brute_force_aut_count, prime_power_parts};
use cokernels::snf::{cokernel_class, cokernel_class_via_lee};
use cokernels::verify::{self, Scoreboard, VerifyOptions};
use cokernels::{smith_normal_form, ChainRing, Error, ModuleType, PolySpec, RingMatrix};
use num_bigint::BigUint;
use num_rational::BigRational;

use output::{
    AutOutput, CokOutput, CountOutput, EnumerateOutput, LimitOutput, RankCensusOutput, RankRow, Render, SampleOutput,
    SnfOutput,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cokernels", version, about = "Cokernels of random p-adic matrices: exact counts, limits and experiments")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Plain, global = true)]
    pub format: Format,

    /// Worker threads for parallel engines (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Cap on the number of matrices an enumeration may visit.
    #[arg(long, env = BUDGET_ENV, global = true)]
    pub budget: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Smith normal form of a matrix over Z/p^k or (Z/p^k)[t]/(P).
    Snf(SnfArgs),
    /// Cokernel of an integer matrix, or of P(X) as a module over Z_p[t]/(P).
    Cok(CokArgs),
    /// Automorphism count of a module type.
    Aut(AutArgs),
    /// Census of ranks (or joint residue coranks of P_j(X)) over a finite field.
    RankCensus(RankCensusArgs),
    /// Closed-form lift counts.
    Count(CountArgs),
    /// Limiting probabilities as n grows.
    Limit(LimitArgs),
    /// Exhaustive enumeration of lifts of one residue matrix, or of all matrices.
    Enumerate(EnumerateArgs),
    /// Monte Carlo estimate of the joint cokernel distribution.
    Sample(SampleArgs),
    /// Exact comparison with the conjectured count, for any degrees.
    ProbeConjecture(EnumerateArgs),
    /// Runs the acceptance suite and prints a scoreboard.
    Verify(VerifyArgs),
    /// Runs a JSON list of experiments.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct RingArgs {
    #[arg(long)]
    pub p: u64,
    /// Modulus exponent k of Z/p^k.
    #[arg(long = "mod-exp")]
    pub mod_exp: u32,
    /// Coefficients low to high including the leading 1, e.g. "1,1,1".
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    /// Rows separated by ';', entries by ',', or a JSON array of rows.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: String,
}

#[derive(Args, Debug)]
pub struct SnfArgs {
    #[command(flatten)]
    pub ring: RingArgs,
    /// Also report the transforms L, R with L X R diagonal.
    #[arg(long)]
    pub transforms: bool,
}

#[derive(Args, Debug)]
pub struct CokArgs {
    #[command(flatten)]
    pub ring: RingArgs,
}

#[derive(Args, Debug)]
pub struct AutArgs {
    /// Module type in the "e^r,..." grammar, "0" for trivial.
    #[arg(long = "type")]
    pub module: String,
    /// Residue field size, a prime power.
    #[arg(long)]
    pub q: u64,
    /// Also count by brute force (|G| <= 2^12).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug)]
pub struct RankCensusArgs {
    /// Field size for the plain rank census; defaults to --p.
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub n: usize,
    /// With polynomials, census of the coranks of P_j(X) over F_p instead.
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Vec<String>,
}

#[derive(Args, Debug)]
pub struct InstanceArgs {
    #[arg(long)]
    pub p: u64,
    /// Target modules are killed by p^N; matrices live over Z/p^(N+1).
    #[arg(long = "N")]
    pub big_n: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long, allow_hyphen_values = true, required = true)]
    pub poly: Vec<String>,
    /// One target per polynomial, over its residue field.
    #[arg(long, required = true)]
    pub target: Vec<String>,
}

impl InstanceArgs {
    fn instance(&self) -> cokernels::Result<ProblemInstance> {
        let polys: Vec<&str> = self.poly.iter().map(String::as_str).collect();
        let targets: Vec<&str> = self.target.iter().map(String::as_str).collect();
        ProblemInstance::parse(self.p, &polys, &targets, self.n, self.big_n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CountFormula {
    Main3,
    L1deg1,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = CountFormula::Main3)]
    pub formula: CountFormula,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LimitKind {
    Main,
    Cl,
}

#[derive(Args, Debug)]
pub struct LimitArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, allow_hyphen_values = true, required = true)]
    pub poly: Vec<String>,
    /// Target modules (kind main).
    #[arg(long)]
    pub target: Vec<String>,
    /// Residue ranks (kind cl).
    #[arg(long)]
    pub rank: Vec<u32>,
    #[arg(long, value_enum, default_value_t = LimitKind::Main)]
    pub kind: LimitKind,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Residue matrix over F_p whose lifts are enumerated; all matrices when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub residue: Option<String>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long = "N")]
    pub big_n: u32,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true, required = true)]
    pub poly: Vec<String>,
    /// Targets to judge against the limiting probability.
    #[arg(long)]
    pub target: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Lower bound on the acceptance half-width.
    #[arg(long, default_value_t = 0.0)]
    pub band_floor: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Criteria to run, e.g. "1,2,7"; all when absent.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u32>,
    #[arg(long, default_value_t = verify::SAMPLE_COUNT)]
    pub samples: u64,
    #[arg(long, default_value_t = verify::SAMPLE_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// JSON file with an `entries` list.
    #[arg(long)]
    pub config: PathBuf,
}

/// What a command produced, plus the exit code it asks for.
struct Outcome {
    body: Box<dyn Render + Send>,
    code: i32,
}

impl Outcome {
    fn ok(body: impl Render + Send + 'static) -> Self {
        Outcome {
            body: Box::new(body),
            code: EXIT_OK,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Input(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Lib(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
            _ => EXIT_INVALID,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Input(s) => f.write_str(s),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and writes its
/// output. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INVALID
                }
            };
        }
    };
    let workers = cli.workers.unwrap_or_else(cokernels::experiments::default_workers);
    let budget = cli.budget.filter(|&b| b > 0).map(Budget::uniform).unwrap_or_default();
    let format = cli.format;
    match with_workers(workers, || dispatch(cli.command, workers, budget)) {
        Ok(outcome) => match outcome.body.render(format) {
            Ok(text) => {
                let _ = out.write_all(text.as_bytes());
                outcome.code
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_INVALID
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(command: Command, workers: usize, budget: Budget) -> CliResult<Outcome> {
    match command {
        Command::Snf(a) => snf(a),
        Command::Cok(a) => cok(a),
        Command::Aut(a) => aut(a),
        Command::RankCensus(a) => rank_census(a, budget),
        Command::Count(a) => count(a),
        Command::Limit(a) => limit(a),
        Command::Enumerate(a) => enumerate(a, budget),
        Command::Sample(a) => sample(a, workers),
        Command::ProbeConjecture(a) => probe(a, budget),
        Command::Verify(a) => verify_cmd(a, workers, budget),
        Command::Sweep(a) => sweep(a, budget),
    }
}

fn ring_and_matrix(args: &RingArgs) -> CliResult<(ChainRing, Option<PolySpec>, RingMatrix)> {
    let poly = args.poly.as_deref().map(|s| PolySpec::parse(s, args.p)).transpose()?;
    let ring = ChainRing::integers(args.p, args.mod_exp)?;
    Ok((ring.clone(), poly, RingMatrix::parse(&ring, &args.matrix)?))
}

fn snf(args: SnfArgs) -> CliResult<Outcome> {
    let a = &args.ring;
    let poly = a.poly.as_deref().map(|s| PolySpec::parse(s, a.p)).transpose()?;
    let ring = match &poly {
        Some(poly) => ChainRing::extension(poly, a.mod_exp)?,
        None => ChainRing::integers(a.p, a.mod_exp)?,
    };
    let x = RingMatrix::parse(&ring, &a.matrix)?;
    let result = smith_normal_form(&x, args.transforms);
    let cokernel = x.is_square().then(|| cokernel_class(&x)).transpose()?;
    Ok(Outcome::ok(SnfOutput {
        ring: ring.to_string(),
        saturated: result.saturated(),
        exponents: result.exponents,
        k: result.k,
        cokernel,
        left: result.left.map(|m| m.to_text()),
        right: result.right.map(|m| m.to_text()),
    }))
}

fn cok(args: CokArgs) -> CliResult<Outcome> {
    let (_, poly, x) = ring_and_matrix(&args.ring)?;
    let (q, module, group) = match &poly {
        Some(poly) => {
            let module = cokernel_class_via_lee(&x, poly)?;
            let group = cokernel_class(&x.poly_eval(poly)?)?;
            (poly.residue_field_size(), module, group)
        }
        None => {
            let group = cokernel_class(&x)?;
            (args.ring.p, group.clone(), group)
        }
    };
    Ok(Outcome::ok(CokOutput {
        p: args.ring.p,
        mod_exp: args.ring.mod_exp,
        poly: poly.map(|p| p.to_string()),
        q,
        module,
        underlying_group: group,
    }))
}

fn aut(args: AutArgs) -> CliResult<Outcome> {
    let (_, f) = prime_power_parts(args.q)?;
    let g = ModuleType::parse(&args.module, f)?;
    let formula = aut_count_formula(&g, args.q);
    let oracle = if args.oracle {
        Some(brute_force_aut_count(&g, args.q)?)
    } else {
        None
    };
    let agree = oracle.as_ref().map(|o| *o == formula);
    let code = if agree == Some(false) { EXIT_MISMATCH } else { EXIT_OK };
    Ok(Outcome {
        body: Box::new(AutOutput {
            module: g,
            q: args.q,
            formula: formula.to_string(),
            oracle: oracle.map(|o| o.to_string()),
            agree,
        }),
        code,
    })
}

fn rank_census(args: RankCensusArgs, budget: Budget) -> CliResult<Outcome> {
    let n = args.n;
    if args.poly.is_empty() {
        let q = args
            .q
            .or(args.p)
            .ok_or_else(|| CliError::Input("rank-census needs --q or --p".into()))?;
        let census = matrix_rank_census(q, n, budget.full)?;
        let rows = census
            .iter()
            .enumerate()
            .map(|(r, &count)| {
                Ok(RankRow {
                    key: vec![r as u32],
                    count,
                    formula: Some(rank_count_formula(n as u32, r as u32, q)?.to_string()),
                })
            })
            .collect::<cokernels::Result<Vec<_>>>()?;
        return Ok(Outcome::ok(RankCensusOutput {
            q,
            n,
            polys: vec![],
            key: "rank".into(),
            rows,
        }));
    }
    let p = args
        .p
        .or(args.q)
        .ok_or_else(|| CliError::Input("rank-census with --poly needs --p".into()))?;
    let polys = args
        .poly
        .iter()
        .map(|s| PolySpec::parse(s, p))
        .collect::<cokernels::Result<Vec<_>>>()?;
    let census = residue_rank_census(p, n, &polys, budget.full)?;
    let rows = census
        .0
        .iter()
        .map(|(ranks, &count)| RankRow {
            key: ranks.clone(),
            count,
            formula: None,
        })
        .collect();
    Ok(Outcome::ok(RankCensusOutput {
        q: p,
        n,
        polys: polys.iter().map(|p| p.to_string()).collect(),
        key: "corank".into(),
        rows,
    }))
}

fn count(args: CountArgs) -> CliResult<Outcome> {
    let inst = args.instance.instance()?;
    let value = match args.formula {
        CountFormula::Main3 => main3_count(&inst),
        CountFormula::L1deg1 => {
            if inst.polys().len() != 1 || inst.polys()[0].degree() != 1 {
                return Err(CliError::Input("l1deg1 takes one polynomial of degree 1".into()));
            }
            l1deg1_count(&inst.targets()[0], inst.p(), inst.big_n(), inst.n())?
        }
    };
    Ok(Outcome::ok(CountOutput {
        formula: match args.formula {
            CountFormula::Main3 => "main3".into(),
            CountFormula::L1deg1 => "l1deg1".into(),
        },
        instance: inst.clone(),
        value: value.to_string(),
        warnings: inst.warnings().iter().map(|w| w.to_string()).collect(),
    }))
}

fn limit(args: LimitArgs) -> CliResult<Outcome> {
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return Err(CliError::Input(format!("tolerance {} must lie in (0, 1)", args.tol)));
    }
    let polys = args
        .poly
        .iter()
        .map(|s| PolySpec::parse(s, args.p))
        .collect::<cokernels::Result<Vec<_>>>()?;
    let (value, description) = match args.kind {
        LimitKind::Main => {
            let targets = polys
                .iter()
                .zip(&args.target)
                .map(|(poly, t)| ModuleType::parse(t, poly.degree() as u32))
                .collect::<cokernels::Result<Vec<_>>>()?;
            let big_n = targets.iter().map(ModuleType::exponent).max().unwrap_or(0).max(1);
            let inst = ProblemInstance::new(args.p, polys, targets, 1, big_n)?;
            (main_limit(&inst, args.tol), format!("targets {}", args.target.join(" ")))
        }
        LimitKind::Cl => {
            if args.rank.len() != polys.len() {
                return Err(CliError::Input(format!(
                    "{} polynomials but {} ranks",
                    polys.len(),
                    args.rank.len()
                )));
            }
            let degrees: Vec<u32> = polys.iter().map(|p| p.degree() as u32).collect();
            let ranks = args.rank.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
            (cl_limit(args.p, &degrees, &args.rank, args.tol)?, format!("ranks {ranks}"))
        }
    };
    Ok(Outcome::ok(LimitOutput {
        kind: match args.kind {
            LimitKind::Main => "main".into(),
            LimitKind::Cl => "cl".into(),
        },
        p: args.p,
        polys: args.poly.clone(),
        description,
        tol: args.tol,
        value: value.value,
        truncation_index: value.truncation_index,
    }))
}

fn enumerate(args: EnumerateArgs, budget: Budget) -> CliResult<Outcome> {
    let inst = args.instance.instance()?;
    let lifts_per_residue = BigUint::from(inst.p()).pow(inst.big_n() * inst.n() * inst.n());
    let output = match &args.residue {
        Some(text) => {
            let xbar = RingMatrix::parse(&ChainRing::integers(inst.p(), 1)?, text)?;
            let count = enumerate_lifts(&xbar, &inst, budget.lifts)?;
            let predicted = main3_count(&inst);
            EnumerateOutput {
                mode: "lifts".into(),
                residue: Some(xbar.to_text()),
                agree: predicted == BigUint::from(count),
                count: count.to_string(),
                total: lifts_per_residue.to_string(),
                residue_count: None,
                residue_total: None,
                predicted: predicted.to_string(),
                instance: inst,
            }
        }
        None => {
            let full = enumerate_full(&inst, budget.full)?;
            let predicted = main2_factor(&inst) * BigRational::from_integer((lifts_per_residue * full.residue_count).into());
            EnumerateOutput {
                mode: "full".into(),
                residue: None,
                agree: predicted == BigRational::from_integer(full.count.into()),
                count: full.count.to_string(),
                total: full.total.to_string(),
                residue_count: Some(full.residue_count),
                residue_total: Some(full.residue_total),
                predicted: rational_text(&predicted),
                instance: inst,
            }
        }
    };
    Ok(Outcome::ok(output))
}

fn sample(args: SampleArgs, workers: usize) -> CliResult<Outcome> {
    let polys = args
        .poly
        .iter()
        .map(|s| PolySpec::parse(s, args.p))
        .collect::<cokernels::Result<Vec<_>>>()?;
    let judged = if args.target.is_empty() {
        None
    } else {
        let polys: Vec<&str> = args.poly.iter().map(String::as_str).collect();
        let targets: Vec<&str> = args.target.iter().map(String::as_str).collect();
        Some(ProblemInstance::parse(args.p, &polys, &targets, args.n as u32, args.big_n)?)
    };
    let started = Instant::now();
    let cfg = SamplerConfig {
        seed: args.seed,
        samples: args.samples,
        workers,
    };
    let table = sample_joint_distribution(args.p, args.n, args.big_n, &polys, &cfg)?;
    let report = judged.map(|inst| {
        let class = JointClass::Modules(inst.targets().to_vec());
        sampled_report(&table, &class, main_limit(&inst, verify::LIMIT_TOL), args.band_floor, started)
    });
    Ok(Outcome::ok(SampleOutput { table, report }))
}

fn probe(args: EnumerateArgs, budget: Budget) -> CliResult<Outcome> {
    let inst = args.instance.instance()?;
    let xbar = args
        .residue
        .as_deref()
        .map(|text| RingMatrix::parse(&ChainRing::integers(inst.p(), 1)?, text))
        .transpose()?;
    let report = probe_conjecture(&inst, xbar.as_ref(), budget)?;
    Ok(Outcome::ok(vec![report]))
}

fn verify_cmd(args: VerifyArgs, workers: usize, budget: Budget) -> CliResult<Outcome> {
    let opts = VerifyOptions {
        workers,
        budget,
        samples: args.samples,
        seed: args.seed,
    };
    for &id in &args.criteria {
        if !verify::CRITERIA.iter().any(|&(c, _)| c == id) {
            return Err(CliError::Input(format!("unknown criterion {id}")));
        }
    }
    let board = if args.criteria.is_empty() {
        verify::run_all(&opts)
    } else {
        Scoreboard {
            outcomes: args.criteria.iter().map(|&id| verify::run_criterion(id, &opts)).collect(),
        }
    };
    let code = if board.passed() { EXIT_OK } else { EXIT_MISMATCH };
    Ok(Outcome {
        body: Box::new(board),
        code,
    })
}

fn sweep(args: SweepArgs, budget: Budget) -> CliResult<Outcome> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.config.display())))?;
    let config = SweepConfig::from_json(&text)?;
    let reports: Vec<ExperimentReport> = run_sweep(&config, budget)?;
    let code = if reports.iter().any(|r| r.verdict == Verdict::Mismatch) {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    };
    Ok(Outcome {
        body: Box::new(reports),
        code,
    })
}
