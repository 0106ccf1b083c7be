//! Seeded Monte Carlo estimates of gradient statistics.
//!
//! Sample `i` of a grid point always draws from stream `i` of that point's
//! seed, and samples are grouped into fixed-size chunks whose partial
//! moments are merged in chunk order. Results are therefore bit-identical
//! whatever the size of the rayon pool.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{self, FormulaId, VariancePrediction};
use crate::cost::{CostSpec, GateCost, GradientFactors, GradientRequest, StateCost};
use crate::error::{Error, Result};
use crate::gates::{block, partition_block, AnsatzParams, BlockParams};
use crate::haar::{frame_potential, haar_unitary, FramePotential, SeededRng};
use crate::linalg::ComplexMatrix;

pub const MIN_SAMPLES: usize = 100;
pub const DEFAULT_SAMPLES: usize = 10_000;
const CHUNK: usize = 256;

/// Single-pass central moments up to order four, mergeable
/// (Pébay's update and pairwise-combination formulas).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        self.mean += delta * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.n += other.n;
    }

    pub fn finish(&self, master_seed: u64) -> GradStats {
        let n = self.n as f64;
        let variance = if self.n > 1 { (self.m2 / (n - 1.0)).max(0.0) } else { 0.0 };
        let stderr_mean = if self.n > 0 { (variance / n).sqrt() } else { 0.0 };
        // Var(s²) ≈ (μ₄ − (n−3)/(n−1)·σ⁴)/n
        let stderr_variance = if self.n > 3 {
            let mu4 = self.m4 / n;
            ((mu4 - (n - 3.0) / (n - 1.0) * variance * variance) / n).max(0.0).sqrt()
        } else {
            0.0
        };
        GradStats {
            n_samples: self.n as usize,
            mean: self.mean,
            variance,
            stderr_mean,
            stderr_variance,
            master_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradStats {
    pub n_samples: usize,
    pub mean: f64,
    /// Unbiased (n−1 denominator).
    pub variance: f64,
    pub stderr_mean: f64,
    pub stderr_variance: f64,
    pub master_seed: u64,
}

/// Runs `sample` on streams 0..n of `point` and merges the moments in a
/// fixed order.
pub fn estimate_with<F>(n_samples: usize, point: SeededRng, master_seed: u64, sample: F) -> Result<GradStats>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let n_chunks = n_samples.div_ceil(CHUNK);
    let partials: Vec<MomentAccumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = MomentAccumulator::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let mut rng = point.stream(i as u64);
                acc.push(sample(&mut rng)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = MomentAccumulator::new();
    for p in &partials {
        total.merge(p);
    }
    Ok(total.finish(master_seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Uniform SNAP-Displacement parameters for every block.
    Uniform,
    /// W_A, W_B and every block of U_L, U_R independently Haar.
    HaarFactors,
    /// Block k keeps uniform parameters; all other blocks are Haar.
    HaarBlocks,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Uniform => "uniform",
            Regime::HaarFactors => "haar-factors",
            Regime::HaarBlocks => "haar-blocks",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Regime::Uniform),
            "haar-factors" => Ok(Regime::HaarFactors),
            "haar-blocks" => Ok(Regime::HaarBlocks),
            other => Err(Error::InvalidConfig(format!("unknown regime '{other}'"))),
        }
    }
}

/// Cost function family, instantiated per dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum CostTemplate {
    /// Ô = |0⟩⟨0|
    StateFock0,
    /// Ô = diag(d−1, …, 0)
    StateNumber,
    StateMatrix(ComplexMatrix),
    /// U_t = I
    GateIdentity,
    GateMatrix(ComplexMatrix),
}

impl CostTemplate {
    pub fn kind(&self) -> &'static str {
        match self {
            CostTemplate::StateFock0 | CostTemplate::StateNumber | CostTemplate::StateMatrix(_) => "state",
            CostTemplate::GateIdentity | CostTemplate::GateMatrix(_) => "gate",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CostTemplate::StateFock0 => "observable=fock0".into(),
            CostTemplate::StateNumber => "observable=number".into(),
            CostTemplate::StateMatrix(m) => format!("observable=matrix(d={})", m.dim()),
            CostTemplate::GateIdentity => "target=identity".into(),
            CostTemplate::GateMatrix(m) => format!("target=matrix(d={})", m.dim()),
        }
    }

    /// A file-backed matrix only fits its own dimension.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            CostTemplate::StateMatrix(m) | CostTemplate::GateMatrix(m) => Some(m.dim()),
            _ => None,
        }
    }

    pub fn instantiate(&self, d: usize) -> Result<CostSpec> {
        if let Some(fixed) = self.fixed_dim() {
            if fixed != d {
                return Err(Error::DimensionMismatch { expected: fixed, found: d });
            }
        }
        Ok(match self {
            CostTemplate::StateFock0 => CostSpec::State(StateCost::with_vacuum(ComplexMatrix::projector(d, 0))?),
            CostTemplate::StateNumber => CostSpec::State(StateCost::with_vacuum(analytic::particle_number_observable(d))?),
            CostTemplate::StateMatrix(m) => CostSpec::State(StateCost::with_vacuum(m.clone())?),
            CostTemplate::GateIdentity => CostSpec::Gate(GateCost::new(ComplexMatrix::identity(d))?),
            CostTemplate::GateMatrix(m) => CostSpec::Gate(GateCost::new(m.clone())?),
        })
    }
}

/// The published closed form matching a cost instance.
pub fn predict(cost: &CostSpec) -> Result<VariancePrediction> {
    match cost {
        CostSpec::State(s) => analytic::predict_state(s.observable(), s.dim()),
        CostSpec::Gate(g) => analytic::predict_gate(g.target()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub cost: CostTemplate,
    pub d_values: Vec<usize>,
    pub t_values: Vec<usize>,
    /// 1-based block index.
    pub k: usize,
    /// 0-based phase index.
    pub nu: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub regime: Regime,
    /// α is uniform on [lo, hi); lo == hi pins every α to lo.
    pub alpha_range: (f64, f64),
}

impl SweepConfig {
    pub fn new(cost: CostTemplate, d_values: Vec<usize>, t_values: Vec<usize>, seed: u64) -> Self {
        Self {
            cost,
            d_values,
            t_values,
            k: 3,
            nu: 1,
            n_samples: DEFAULT_SAMPLES,
            seed,
            regime: Regime::Uniform,
            alpha_range: (0.0, TAU),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "n_samples={} is below the minimum {MIN_SAMPLES}",
                self.n_samples
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("block index k is 1-based".into()));
        }
        if let Some(&t_min) = self.t_values.iter().min() {
            if self.k > t_min {
                return Err(Error::InvalidConfig(format!("k={} exceeds the smallest T={t_min}", self.k)));
            }
        }
        if let Some(&d_min) = self.d_values.iter().min() {
            if d_min < 2 {
                return Err(Error::InvalidConfig(format!("dimension {d_min} is below 2")));
            }
            if self.nu >= d_min {
                return Err(Error::InvalidConfig(format!(
                    "nu={} exceeds d-1={} for the smallest d",
                    self.nu,
                    d_min - 1
                )));
            }
        }
        if let Some(fixed) = self.cost.fixed_dim() {
            if let Some(&bad) = self.d_values.iter().find(|&&d| d != fixed) {
                return Err(Error::InvalidConfig(format!(
                    "matrix has dimension {fixed} but the sweep includes d={bad}"
                )));
            }
        }
        let (lo, hi) = self.alpha_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig(format!("invalid alpha range [{lo}, {hi})")));
        }
        Ok(())
    }

    /// Seed of the (d, T) grid point; independent of grid order.
    pub fn point_rng(&self, d: usize, t: usize) -> SeededRng {
        SeededRng::new(self.seed).derive(((d as u64) << 32) | t as u64)
    }
}

/// T blocks with θ uniform on [0, 2π) and α uniform on the configured range.
pub fn sample_params<R: Rng + ?Sized>(cfg: &SweepConfig, d: usize, t: usize, rng: &mut R) -> Result<AnsatzParams> {
    AnsatzParams::new((0..t).map(|_| sample_block(cfg.alpha_range, d, rng)).collect::<Result<_>>()?)
}

fn sample_block<R: Rng + ?Sized>(alpha_range: (f64, f64), d: usize, rng: &mut R) -> Result<BlockParams> {
    let (lo, hi) = alpha_range;
    let alpha = if lo == hi { lo } else { rng.random_range(lo..hi) };
    let thetas = (0..d).map(|_| rng.random_range(0.0..TAU)).collect();
    BlockParams::new(alpha, thetas)
}

fn haar_product<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(d);
    for _ in 0..count {
        acc = &haar_unitary(d, rng) * &acc;
    }
    acc
}

fn sample_gradient(cfg: &SweepConfig, cost: &CostSpec, d: usize, t: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let req = GradientRequest::new(cfg.k, cfg.nu);
    match cfg.regime {
        Regime::Uniform => {
            let p = sample_params(cfg, d, t, rng)?;
            cost.gradient(&p, req)
        }
        Regime::HaarFactors => {
            let u_l = haar_product(d, cfg.k - 1, rng);
            let w_b = haar_unitary(d, rng);
            let w_a = haar_unitary(d, rng);
            let u_r = haar_product(d, t - cfg.k, rng);
            cost.gradient_from_factors(&GradientFactors { u_r, w_a, w_b, u_l }, cfg.nu)
        }
        Regime::HaarBlocks => {
            let u_l = haar_product(d, cfg.k - 1, rng);
            let part = partition_block(&sample_block(cfg.alpha_range, d, rng)?, cfg.nu)?;
            let u_r = haar_product(d, t - cfg.k, rng);
            let f = GradientFactors {
                u_r,
                w_a: part.w_a,
                w_b: part.w_b,
                u_l,
            };
            cost.gradient_from_factors(&f, cfg.nu)
        }
    }
}

/// Gradient statistics at one (d, T) grid point.
pub fn estimate_gradient_stats(cfg: &SweepConfig, d: usize, t: usize) -> Result<GradStats> {
    cfg.validate()?;
    if cfg.k > t {
        return Err(Error::InvalidConfig(format!("k={} exceeds T={t}", cfg.k)));
    }
    if cfg.nu >= d {
        return Err(Error::InvalidConfig(format!("nu={} exceeds d-1={}", cfg.nu, d - 1)));
    }
    let cost = cfg.cost.instantiate(d)?;
    estimate_with(cfg.n_samples, cfg.point_rng(d, t), cfg.seed, |rng| {
        sample_gradient(cfg, &cost, d, t, rng)
    })
}

/// Gradient statistics with U_L, W_B, W_A, U_R each a single independent
/// Haar unitary (a product of Haar unitaries is itself Haar).
pub fn estimate_haar_factor_stats(cost: &CostSpec, nu: usize, n_samples: usize, seed: u64) -> Result<GradStats> {
    let d = cost.dim();
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "gradient statistics need d >= 2",
        });
    }
    if nu >= d {
        return Err(Error::IndexOutOfRange {
            what: "phase",
            index: nu,
            bound: d,
        });
    }
    let point = SeededRng::new(seed).derive(d as u64);
    estimate_with(n_samples, point, seed, |rng| {
        let u_l = haar_unitary(d, rng);
        let w_b = haar_unitary(d, rng);
        let w_a = haar_unitary(d, rng);
        let u_r = haar_unitary(d, rng);
        cost.gradient_from_factors(&GradientFactors { u_r, w_a, w_b, u_l }, nu)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub d: usize,
    pub t: usize,
    pub stats: GradStats,
    pub prediction: VariancePrediction,
}

/// One row per (d, T), d-major, in the order given by the config.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.d_values.len() * cfg.t_values.len());
    for &d in &cfg.d_values {
        if cfg.t_values.is_empty() {
            continue;
        }
        let prediction = predict(&cfg.cost.instantiate(d)?)?;
        for &t in &cfg.t_values {
            rows.push(SweepRow {
                d,
                t,
                stats: estimate_gradient_stats(cfg, d, t)?,
                prediction,
            });
        }
    }
    Ok(rows)
}

/// Log-log fit of variance against d over sweep rows with the given T.
pub fn variance_decay_fit(rows: &[SweepRow], t: usize) -> Result<analytic::LogLogFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.t == t)
        .map(|r| (r.d as f64, r.stats.variance))
        .unzip();
    analytic::log_log_fit(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    Haar,
    /// D†·(phases up to ν) of a uniform block
    WA,
    /// (phases after ν)·D of a uniform block
    WB,
    Block,
}

impl Ensemble {
    pub fn as_str(&self) -> &'static str {
        match self {
            Ensemble::Haar => "haar",
            Ensemble::WA => "w_a",
            Ensemble::WB => "w_b",
            Ensemble::Block => "block",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRow {
    pub ensemble: Ensemble,
    pub t: u32,
    pub value: FramePotential,
    pub haar_reference: FramePotential,
}

impl FrameRow {
    pub fn ratio(&self) -> f64 {
        self.value.value / self.haar_reference.value
    }

    /// |value − reference| in units of the combined standard error.
    pub fn sigma_distance(&self) -> f64 {
        let se = self.value.stderr.hypot(self.haar_reference.stderr);
        if se == 0.0 {
            if self.value.value == self.haar_reference.value { 0.0 } else { f64::INFINITY }
        } else {
            (self.value.value - self.haar_reference.value).abs() / se
        }
    }
}

type Sampler<'a> = dyn Fn(&mut ChaCha8Rng) -> ComplexMatrix + Sync + 'a;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoDesignReport {
    pub d: usize,
    pub nu: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub rows: Vec<FrameRow>,
}

/// Frame potentials at t = 1, 2 for Haar, W_A, W_B and full blocks with
/// uniform parameters, each next to an independently sampled Haar
/// reference.
pub fn two_design_report(d: usize, nu: usize, n_pairs: usize, seed: u64) -> Result<TwoDesignReport> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "frame potentials need d >= 2",
        });
    }
    if nu >= d {
        return Err(Error::IndexOutOfRange {
            what: "phase",
            index: nu,
            bound: d,
        });
    }
    let root = SeededRng::new(seed);
    let full = (0.0, TAU);
    let draw_block = |rng: &mut ChaCha8Rng| sample_block(full, d, rng).expect("uniform block parameters are valid");
    let haar = |rng: &mut ChaCha8Rng| haar_unitary(d, rng);
    let w_a = |rng: &mut ChaCha8Rng| partition_block(&draw_block(rng), nu).expect("nu checked").w_a;
    let w_b = |rng: &mut ChaCha8Rng| partition_block(&draw_block(rng), nu).expect("nu checked").w_b;
    let blk = |rng: &mut ChaCha8Rng| block(&draw_block(rng));

    let mut rows = Vec::with_capacity(8);
    for t in [1u32, 2] {
        let reference = frame_potential(haar, t, n_pairs, &root.derive(100 + t as u64))?;
        let ensembles: [(Ensemble, &Sampler); 4] = [
            (Ensemble::Haar, &haar),
            (Ensemble::WA, &w_a),
            (Ensemble::WB, &w_b),
            (Ensemble::Block, &blk),
        ];
        for (i, (ensemble, sampler)) in ensembles.into_iter().enumerate() {
            let value = frame_potential(sampler, t, n_pairs, &root.derive(10 * t as u64 + i as u64))?;
            rows.push(FrameRow {
                ensemble,
                t,
                value,
                haar_reference: reference,
            });
        }
    }
    Ok(TwoDesignReport {
        d,
        nu,
        n_pairs,
        seed,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleNumberVerdict {
    pub d: usize,
    pub stats: GradStats,
    pub candidates: [VariancePrediction; 3],
    /// Candidate within 3·stderr_variance of the estimate.
    pub consistent: [bool; 3],
}

impl ParticleNumberVerdict {
    /// The unique consistent candidate, if exactly one is.
    pub fn selected(&self) -> Option<FormulaId> {
        let mut hits = self.candidates.iter().zip(self.consistent).filter(|(_, ok)| *ok);
        match (hits.next(), hits.next()) {
            (Some((c, _)), None) => Some(c.formula),
            _ => None,
        }
    }

    pub fn is_consistent_with(&self, formula: FormulaId) -> bool {
        self.candidates
            .iter()
            .zip(self.consistent)
            .any(|(c, ok)| ok && c.formula == formula)
    }
}

/// Compares the HaarFactors variance for the particle-number observable
/// against each closed-form candidate.
pub fn adjudicate_particle_number(d: usize, nu: usize, n_samples: usize, seed: u64) -> Result<ParticleNumberVerdict> {
    let cost = CostTemplate::StateNumber.instantiate(d)?;
    let stats = estimate_haar_factor_stats(&cost, nu, n_samples, seed)?;
    let candidates = analytic::particle_number_candidates(d)?;
    let consistent = candidates.map(|c| (stats.variance - c.value).abs() <= 3.0 * stats.stderr_variance);
    Ok(ParticleNumberVerdict {
        d,
        stats,
        candidates,
        consistent,
    })
}
