//! `snapvar` command-line front end.
//!
//! Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

pub mod matrix_file;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use snapvar_core::analytic::{self, FormulaId};
use snapvar_core::experiments::{
    adjudicate_particle_number, run_sweep, two_design_report, variance_decay_fit, CostTemplate, Regime, SweepConfig,
    SweepRow,
};
use snapvar_core::haar::{check_sampled_moments, oracle_agreement, random_moment_query, SeededRng, ORACLE_MAX_DIM};
use snapvar_core::ComplexMatrix;

use crate::matrix_file::read_matrix_file;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const ORACLE_TOL: f64 = 1e-12;
const MC_SIGMA: f64 = 3.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) | CliError::Io(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "snapvar", version, about = "Gradient-variance analysis for qudit SNAP-Displacement circuits")]
pub struct Cli {
    /// Worker threads for Monte Carlo estimation (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check Haar moment formulas and trace-integral closed forms.
    VerifyMoments(VerifyArgs),
    /// Monte Carlo gradient statistics over a (d, T) grid, written as CSV.
    VarianceSweep(SweepArgs),
    /// Frame potentials of the block ensembles next to Haar references.
    TwoDesign(TwoDesignArgs),
    /// Qudit variance against the multi-qubit 2^{-an} decay.
    CompareQubitBound(CompareArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Single dimension; overrides --d-min/--d-max.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub d_min: usize,
    #[arg(long, default_value_t = 4)]
    pub d_max: usize,
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
    /// Random index queries per dimension.
    #[arg(long, default_value_t = 20)]
    pub queries: usize,
    /// Random operator tuples per dimension for the oracle comparison.
    #[arg(long, default_value_t = 20)]
    pub tuples: usize,
    #[arg(long, env = "SNAPVAR_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// state | gate
    #[arg(long, default_value = "state")]
    pub cost: String,
    /// fock0 | number | file:<path> (state cost)
    #[arg(long)]
    pub observable: Option<String>,
    /// identity | file:<path> (gate cost)
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub d_min: usize,
    #[arg(long, default_value_t = 8)]
    pub d_max: usize,
    /// Comma-separated block counts T.
    #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
    pub blocks: Vec<usize>,
    /// Differentiated block (1-based).
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Differentiated phase (0-based).
    #[arg(long, default_value_t = 1)]
    pub nu: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, env = "SNAPVAR_SEED", default_value_t = 0)]
    pub seed: u64,
    /// uniform | haar-factors | haar-blocks
    #[arg(long, default_value = "uniform")]
    pub regime: String,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TwoDesignArgs {
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 20_000)]
    pub pairs: usize,
    /// Split point of the W_A / W_B ensembles (0-based).
    #[arg(long, default_value_t = 1)]
    pub nu: usize,
    #[arg(long, env = "SNAPVAR_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Comma-separated decay rates in (0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.67", allow_negative_numbers = true)]
    pub a: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub d_min: usize,
    #[arg(long, default_value_t = 64)]
    pub d_max: usize,
    /// fock0 | number | file:<path>
    #[arg(long, default_value = "number")]
    pub observable: String,
    /// Samples per dimension for the particle-number adjudication.
    #[arg(long, default_value_t = 20_000)]
    pub adjudication_samples: usize,
    #[arg(long, default_value_t = 1)]
    pub nu: usize,
    #[arg(long, env = "SNAPVAR_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(failure)?;
    pool.install(|| match &cli.command {
        Command::VerifyMoments(a) => cmd_verify_moments(a),
        Command::VarianceSweep(a) => cmd_variance_sweep(a),
        Command::TwoDesign(a) => cmd_two_design(a),
        Command::CompareQubitBound(a) => cmd_compare_qubit_bound(a),
    })
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Summary lines go to stdout when the CSV went to a file, else stderr.
fn summary(to_file: bool, text: &str) {
    if to_file {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

fn manifest(command: &str, started: Instant, out: Option<&Path>) {
    let dest = out.map(|p| p.display().to_string()).unwrap_or_else(|| "stdout".into());
    eprintln!(
        "# snapvar {VERSION} {command}: {:.2}s, output {dest}",
        started.elapsed().as_secs_f64()
    );
}

fn dim_range(d_min: usize, d_max: usize) -> Result<Vec<usize>, CliError> {
    if d_min < 2 {
        return Err(usage(format!("dimension {d_min} is below 2")));
    }
    if d_min > d_max {
        return Err(usage(format!("--d-min {d_min} exceeds --d-max {d_max}")));
    }
    Ok((d_min..=d_max).collect())
}

fn load_matrix(arg: &str) -> Result<Option<ComplexMatrix>, CliError> {
    match arg.strip_prefix("file:") {
        Some(path) => read_matrix_file(Path::new(path)).map(Some).map_err(|e| usage(e.to_string())),
        None => Ok(None),
    }
}

fn observable_template(arg: &str) -> Result<CostTemplate, CliError> {
    match arg {
        "fock0" => Ok(CostTemplate::StateFock0),
        "number" => Ok(CostTemplate::StateNumber),
        other => match load_matrix(other)? {
            Some(m) => {
                if !m.is_hermitian(snapvar_core::linalg::STRUCTURE_TOL) {
                    return Err(usage(format!("observable in {other} is not Hermitian")));
                }
                Ok(CostTemplate::StateMatrix(m))
            }
            None => Err(usage(format!("unknown observable '{other}' (fock0 | number | file:<path>)"))),
        },
    }
}

fn target_template(arg: &str) -> Result<CostTemplate, CliError> {
    match arg {
        "identity" => Ok(CostTemplate::GateIdentity),
        other => match load_matrix(other)? {
            Some(m) => {
                if !m.is_unitary(snapvar_core::linalg::STRUCTURE_TOL) {
                    return Err(usage(format!("target in {other} is not unitary")));
                }
                Ok(CostTemplate::GateMatrix(m))
            }
            None => Err(usage(format!("unknown target '{other}' (identity | file:<path>)"))),
        },
    }
}

pub fn cmd_verify_moments(args: &VerifyArgs) -> Result<(), CliError> {
    let dims = match args.d {
        Some(d) => dim_range(d, d)?,
        None => dim_range(args.d_min, args.d_max)?,
    };
    if args.mc_samples < 2 {
        return Err(usage("--mc-samples must be at least 2"));
    }
    let root = SeededRng::new(args.seed);
    let mut all_ok = true;

    println!("# oracle tier: closed form vs exhaustive Weingarten sum, tolerance {ORACLE_TOL:e}");
    println!("{:>3}  {:<30} {:>12}  status", "d", "lemma", "max_dev");
    for &d in &dims {
        if d > ORACLE_MAX_DIM {
            println!("{d:>3}  (skipped: summation oracle limited to d <= {ORACLE_MAX_DIM})");
            continue;
        }
        let mut rng = root.derive(d as u64).stream(0);
        for dev in oracle_agreement(d, args.tuples, &mut rng).map_err(failure)? {
            let status = if dev.reference_only {
                "reference"
            } else if dev.max_abs_dev <= ORACLE_TOL {
                "ok"
            } else {
                all_ok = false;
                "FAIL"
            };
            println!("{d:>3}  {:<30} {:>12.3e}  {status}", dev.lemma, dev.max_abs_dev);
        }
    }

    println!("# sampling tier: {} Haar draws, {} queries, {MC_SIGMA} standard errors", args.mc_samples, args.queries);
    println!("{:>3}  {:<8} {:>14}  status", "d", "moment", "max_sigma");
    for &d in &dims {
        let mut qrng = root.derive(1000 + d as u64).stream(0);
        let queries: Vec<_> = (0..args.queries).map(|_| random_moment_query(d, &mut qrng)).collect();
        let checks = check_sampled_moments(&queries, args.mc_samples, &root.derive(2000 + d as u64)).map_err(failure)?;
        for (name, worst) in [
            ("first", checks.iter().map(|c| c.first.sigma_distance()).fold(0.0, f64::max)),
            ("second", checks.iter().map(|c| c.second.sigma_distance()).fold(0.0, f64::max)),
        ] {
            let ok = worst <= MC_SIGMA;
            all_ok &= ok;
            println!("{d:>3}  {name:<8} {worst:>14.3}  {}", if ok { "ok" } else { "FAIL" });
        }
    }
    if all_ok {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::Failure("verification failed".into()))
    }
}

pub fn sweep_config(args: &SweepArgs) -> Result<SweepConfig, CliError> {
    let cost = match args.cost.as_str() {
        "state" => {
            if args.target.is_some() {
                return Err(usage("--target applies to --cost gate"));
            }
            observable_template(args.observable.as_deref().unwrap_or("fock0"))?
        }
        "gate" => {
            if args.observable.is_some() {
                return Err(usage("--observable applies to --cost state"));
            }
            target_template(args.target.as_deref().unwrap_or("identity"))?
        }
        other => return Err(usage(format!("unknown cost '{other}' (state | gate)"))),
    };
    let regime: Regime = args.regime.parse().map_err(|e: snapvar_core::Error| usage(e.to_string()))?;
    let mut cfg = SweepConfig::new(cost, dim_range(args.d_min, args.d_max)?, args.blocks.clone(), args.seed);
    cfg.k = args.k;
    cfg.nu = args.nu;
    cfg.n_samples = args.samples;
    cfg.regime = regime;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn cost_label(args: &SweepArgs) -> String {
    match args.cost.as_str() {
        "state" => format!("observable={}", args.observable.as_deref().unwrap_or("fock0")),
        _ => format!("target={}", args.target.as_deref().unwrap_or("identity")),
    }
}

pub const SWEEP_COLUMNS: &str =
    "cost,regime,d,T,k,nu,n_samples,mean,stderr_mean,variance,stderr_variance,analytic_variance,seed";

pub fn sweep_csv(cfg: &SweepConfig, cost_desc: &str, rows: &[SweepRow]) -> String {
    let blocks: Vec<String> = cfg.t_values.iter().map(|t| t.to_string()).collect();
    let d_lo = cfg.d_values.first().copied().unwrap_or(0);
    let d_hi = cfg.d_values.last().copied().unwrap_or(0);
    let formula = rows.first().map(|r| r.prediction.formula.as_str()).unwrap_or("none");
    let mut s = String::new();
    let _ = writeln!(s, "# snapvar {VERSION} variance-sweep");
    let _ = writeln!(
        s,
        "# cost={} {cost_desc} regime={} d={d_lo}..{d_hi} blocks={} k={} nu={} samples={} alpha=[{},{})",
        cfg.cost.kind(),
        cfg.regime.as_str(),
        blocks.join(","),
        cfg.k,
        cfg.nu,
        cfg.n_samples,
        cfg.alpha_range.0,
        cfg.alpha_range.1
    );
    let _ = writeln!(s, "# seed={}", cfg.seed);
    let _ = writeln!(s, "# analytic_variance={formula}");
    let _ = writeln!(s, "{SWEEP_COLUMNS}");
    for r in rows {
        let st = &r.stats;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.cost.kind(),
            cfg.regime.as_str(),
            r.d,
            r.t,
            cfg.k,
            cfg.nu,
            st.n_samples,
            float(st.mean),
            float(st.stderr_mean),
            float(st.variance),
            float(st.stderr_variance),
            float(r.prediction.value),
            st.master_seed
        );
    }
    s
}

pub fn cmd_variance_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = sweep_config(args)?;
    let rows = run_sweep(&cfg).map_err(failure)?;
    emit(args.out.as_deref(), &sweep_csv(&cfg, &cost_label(args), &rows))?;

    let mut text = String::new();
    for &t in &cfg.t_values {
        match variance_decay_fit(&rows, t) {
            Ok(fit) => {
                let _ = writeln!(
                    text,
                    "T={t}: log-log variance slope {:.4} +/- {:.4} over d={}..{}",
                    fit.slope,
                    fit.slope_stderr,
                    args.d_min,
                    args.d_max
                );
            }
            Err(e) => {
                let _ = writeln!(text, "T={t}: no slope ({e})");
            }
        }
    }
    summary(args.out.is_some(), &text);
    manifest("variance-sweep", started, args.out.as_deref());
    Ok(())
}

pub fn cmd_two_design(args: &TwoDesignArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if args.d < 2 {
        return Err(usage(format!("--d {} is below 2", args.d)));
    }
    if args.nu >= args.d {
        return Err(usage(format!("--nu {} exceeds d-1={}", args.nu, args.d - 1)));
    }
    if args.pairs < snapvar_core::haar::MIN_FRAME_PAIRS {
        return Err(usage(format!(
            "--pairs {} is below the minimum {}",
            args.pairs,
            snapvar_core::haar::MIN_FRAME_PAIRS
        )));
    }
    let report = two_design_report(args.d, args.nu, args.pairs, args.seed).map_err(failure)?;

    let mut table = String::new();
    let _ = writeln!(
        table,
        "# snapvar {VERSION} two-design d={} nu={} pairs={} seed={}",
        report.d, report.nu, report.n_pairs, report.seed
    );
    let _ = writeln!(table, "ensemble,t,frame_potential,stderr,haar_reference,haar_stderr,ratio,sigma");
    for r in &report.rows {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{}",
            r.ensemble.as_str(),
            r.t,
            float(r.value.value),
            float(r.value.stderr),
            float(r.haar_reference.value),
            float(r.haar_reference.stderr),
            float(r.ratio()),
            float(r.sigma_distance())
        );
    }
    emit(args.out.as_deref(), &table)?;

    let mut text = String::new();
    for r in &report.rows {
        let _ = writeln!(
            text,
            "{:<6} t={}  {:>12.6} +/- {:<10.3e} haar {:>12.6} +/- {:<10.3e} ratio {:.4}  ({:.2} sigma)",
            r.ensemble.as_str(),
            r.t,
            r.value.value,
            r.value.stderr,
            r.haar_reference.value,
            r.haar_reference.stderr,
            r.ratio(),
            r.sigma_distance()
        );
    }
    summary(args.out.is_some(), &text);
    manifest("two-design", started, args.out.as_deref());
    Ok(())
}

/// Smallest d in `ds` from which `above(d)` holds for every later d.
pub fn crossover(ds: &[usize], above: impl Fn(usize) -> bool) -> Option<usize> {
    let mut start = None;
    for &d in ds {
        if above(d) {
            start.get_or_insert(d);
        } else {
            start = None;
        }
    }
    start
}

fn mode_formula(picks: &[FormulaId]) -> Option<FormulaId> {
    let mut best: Option<(FormulaId, usize)> = None;
    for &f in picks {
        let n = picks.iter().filter(|&&g| g == f).count();
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((f, n));
        }
    }
    best.map(|(f, _)| f)
}

pub fn cmd_compare_qubit_bound(args: &CompareArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if args.a.is_empty() {
        return Err(usage("--a needs at least one decay rate"));
    }
    if let Some(bad) = args.a.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
        return Err(usage(format!("decay rate a={bad} must lie in (0, 1)")));
    }
    let dims = dim_range(args.d_min, args.d_max)?;
    let template = observable_template(&args.observable)?;
    if let Some(fixed) = template.fixed_dim() {
        if dims != [fixed] {
            return Err(usage(format!(
                "observable file has d={fixed}; use --d-min {fixed} --d-max {fixed}"
            )));
        }
    }
    let number = template == CostTemplate::StateNumber;
    let mut text = String::new();

    // Monte Carlo picks which particle-number closed form the protocol follows.
    let adjudicated = if number {
        if args.adjudication_samples < snapvar_core::experiments::MIN_SAMPLES {
            return Err(usage("--adjudication-samples must be at least 100"));
        }
        let mut picks = Vec::new();
        for d in 3..=6 {
            if args.nu >= d {
                return Err(usage(format!("--nu {} exceeds d-1={}", args.nu, d - 1)));
            }
            let v = adjudicate_particle_number(d, args.nu, args.adjudication_samples, args.seed).map_err(failure)?;
            let names: Vec<&str> = v
                .candidates
                .iter()
                .zip(v.consistent)
                .filter(|(_, ok)| *ok)
                .map(|(c, _)| c.formula.as_str())
                .collect();
            let _ = writeln!(
                text,
                "adjudication d={d}: variance {:.6} +/- {:.6}; consistent: {}",
                v.stats.variance,
                v.stats.stderr_variance,
                if names.is_empty() { "none".to_string() } else { names.join(" ") }
            );
            picks.extend(v.selected());
        }
        match mode_formula(&picks) {
            Some(f) => {
                let _ = writeln!(text, "adjudicated formula: {f}");
                Some(f)
            }
            None => {
                summary(args.out.is_some(), &text);
                return Err(CliError::Failure(
                    "no particle-number candidate is uniquely consistent with the Monte Carlo estimate".into(),
                ));
            }
        }
    } else {
        None
    };

    let adjudicated_value = |d: usize| -> Result<f64, snapvar_core::Error> {
        match adjudicated {
            Some(FormulaId::ParticleNumberStated) => analytic::particle_number_variance_stated(d),
            Some(FormulaId::ParticleNumberDerived) => analytic::particle_number_variance_derived(d),
            Some(_) => analytic::particle_number_variance_haar(d),
            None => Ok(f64::NAN),
        }
    };

    struct Row {
        d: usize,
        stated: f64,
        haar: f64,
        candidates: Option<[f64; 3]>,
        adjudicated: Option<f64>,
        bounds: Vec<f64>,
    }
    let mut rows = Vec::with_capacity(dims.len());
    for &d in &dims {
        let cost = template.instantiate(d).map_err(failure)?;
        let snapvar_core::cost::CostSpec::State(state) = &cost else {
            unreachable!("observable templates build state costs")
        };
        let o = state.observable();
        let candidates = if number {
            Some(analytic::particle_number_candidates(d).map_err(failure)?.map(|c| c.value))
        } else {
            None
        };
        rows.push(Row {
            d,
            stated: analytic::state_variance(o, d).map_err(failure)?,
            haar: analytic::state_variance_haar(o, d).map_err(failure)?,
            candidates,
            adjudicated: adjudicated.map(|_| adjudicated_value(d)).transpose().map_err(failure)?,
            bounds: args
                .a
                .iter()
                .map(|&a| analytic::qubit_bound_at_dim(d, a))
                .collect::<Result<_, _>>()
                .map_err(failure)?,
        });
    }

    let mut csv = String::new();
    let a_list: Vec<String> = args.a.iter().map(|a| a.to_string()).collect();
    let _ = writeln!(csv, "# snapvar {VERSION} compare-qubit-bound");
    let _ = writeln!(
        csv,
        "# observable={} d={}..{} a={} seed={} adjudication_samples={}",
        args.observable,
        args.d_min,
        args.d_max,
        a_list.join(","),
        args.seed,
        args.adjudication_samples
    );
    let _ = writeln!(csv, "# n_qubits = log2(d), interpolated when d is not a power of two");
    let mut header =
        "d,n_qubits,state_variance,state_variance_haar,particle_number_stated,particle_number_derived,particle_number_haar,adjudicated_variance"
            .to_string();
    for a in &a_list {
        let _ = write!(header, ",qubit_bound_a{a}");
    }
    let _ = writeln!(csv, "{header}");
    let opt = |x: Option<f64>| x.map(float).unwrap_or_default();
    for r in &rows {
        let mut line = format!(
            "{},{},{},{},{},{},{},{}",
            r.d,
            float((r.d as f64).log2()),
            float(r.stated),
            float(r.haar),
            opt(r.candidates.map(|c| c[0])),
            opt(r.candidates.map(|c| c[1])),
            opt(r.candidates.map(|c| c[2])),
            opt(r.adjudicated)
        );
        for b in &r.bounds {
            let _ = write!(line, ",{}", float(*b));
        }
        let _ = writeln!(csv, "{line}");
    }
    emit(args.out.as_deref(), &csv)?;

    type Curve<'a> = (&'a str, Box<dyn Fn(&Row) -> f64>);
    let mut curves: Vec<Curve> = vec![
        (FormulaId::StateCost.as_str(), Box::new(|r: &Row| r.stated)),
        (FormulaId::StateCostHaar.as_str(), Box::new(|r: &Row| r.haar)),
    ];
    if let Some(f) = adjudicated {
        curves.insert(0, (f.as_str(), Box::new(|r: &Row| r.adjudicated.unwrap_or(f64::NAN))));
    }
    for (i, a) in args.a.iter().enumerate() {
        for (name, value) in &curves {
            let c = crossover(&dims, |d| {
                let r = &rows[d - dims[0]];
                value(r) > r.bounds[i]
            });
            let _ = match c {
                Some(d) => writeln!(text, "crossover a={a} formula={name} d={d}"),
                None => writeln!(text, "crossover a={a} formula={name} none (d<={})", args.d_max),
            };
        }
    }
    summary(args.out.is_some(), &text);
    manifest("compare-qubit-bound", started, args.out.as_deref());
    Ok(())
}
