//! Closed-form gradient-variance predictions.
//!
//! The `*_stated` / unsuffixed formulas are the published expressions,
//! reproduced verbatim. The `*_haar` formulas are the exact second moments
//! when the partition factors and surrounding blocks are Haar random; they
//! are what the `HaarFactors` Monte Carlo regime converges to.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{trace_of_product, ComplexMatrix, STRUCTURE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaId {
    StateCost,
    StateCostHaar,
    GateCost,
    GateCostHaar,
    ParticleNumberStated,
    ParticleNumberDerived,
    ParticleNumberHaar,
    QubitBound,
}

impl FormulaId {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaId::StateCost => "state_cost",
            FormulaId::StateCostHaar => "state_cost_haar",
            FormulaId::GateCost => "gate_cost",
            FormulaId::GateCostHaar => "gate_cost_haar",
            FormulaId::ParticleNumberStated => "particle_number_stated",
            FormulaId::ParticleNumberDerived => "particle_number_derived",
            FormulaId::ParticleNumberHaar => "particle_number_haar",
            FormulaId::QubitBound => "qubit_bound",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePrediction {
    pub d: usize,
    pub value: f64,
    pub formula: FormulaId,
}

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "variance formulas need d >= 2",
        });
    }
    Ok(())
}

/// tr(Ô²) − (tr Ô)²/d, the observable's spread that every state-cost
/// formula scales.
fn observable_spread(observable: &ComplexMatrix, d: usize) -> Result<f64> {
    require_dim(d)?;
    if observable.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: observable.dim(),
        });
    }
    let defect = observable.hermitian_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let tr = observable.trace().re;
    let tr_sq = trace_of_product(observable, observable)?.re;
    // Cauchy-Schwarz makes this nonnegative; clamp round-off for Ô ∝ I
    Ok((tr_sq - tr * tr / d as f64).max(0.0))
}

/// 2/((d−1)(d+1)²)·(tr Ô² − (tr Ô)²/d).
pub fn state_variance(observable: &ComplexMatrix, d: usize) -> Result<f64> {
    let spread = observable_spread(observable, d)?;
    let d = d as f64;
    Ok(2.0 / ((d - 1.0) * (d + 1.0).powi(2)) * spread)
}

/// 2/(d(d+1)²)·(tr Ô² − (tr Ô)²/d).
pub fn state_variance_haar(observable: &ComplexMatrix, d: usize) -> Result<f64> {
    let spread = observable_spread(observable, d)?;
    let d = d as f64;
    Ok(2.0 / (d * (d + 1.0).powi(2)) * spread)
}

/// diag(d−1, …, 1, 0).
pub fn particle_number_observable(d: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..d).rev().map(|n| n as f64).collect();
    ComplexMatrix::from_real_diag(&diag)
}

/// (2d−3)/(3d+3).
pub fn particle_number_variance_stated(d: usize) -> Result<f64> {
    require_dim(d)?;
    let d = d as f64;
    Ok((2.0 * d - 3.0) / (3.0 * d + 3.0))
}

/// state_variance evaluated on the particle-number observable: d/(6(d+1)).
pub fn particle_number_variance_derived(d: usize) -> Result<f64> {
    require_dim(d)?;
    let d = d as f64;
    Ok(d / (6.0 * (d + 1.0)))
}

/// state_variance_haar on the particle-number observable: (d−1)/(6(d+1)).
pub fn particle_number_variance_haar(d: usize) -> Result<f64> {
    require_dim(d)?;
    let d = d as f64;
    Ok((d - 1.0) / (6.0 * (d + 1.0)))
}

/// 2(d⁶+d⁵−4d⁴−3d³+5d²+2d−1 + τ⁴−2τ²)/(d⁴(d²−1)⁴) with τ = |tr U_t|.
pub fn gate_variance(tau: f64, d: usize) -> Result<f64> {
    require_dim(d)?;
    let df = d as f64;
    if !(0.0..=df + STRUCTURE_TOL).contains(&tau) {
        return Err(Error::InvalidConfig(format!(
            "target trace modulus {tau} outside [0, d={d}]"
        )));
    }
    let poly = df.powi(6) + df.powi(5) - 4.0 * df.powi(4) - 3.0 * df.powi(3) + 5.0 * df * df + 2.0 * df - 1.0;
    let denom = df.powi(4) * (df * df - 1.0).powi(4);
    Ok(2.0 * (poly + tau.powi(4) - 2.0 * tau * tau) / denom)
}

pub fn gate_variance_for_target(target: &ComplexMatrix) -> Result<f64> {
    let defect = target.unitarity_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let tau = target.trace().norm().min(target.dim() as f64);
    gate_variance(tau, target.dim())
}

/// 2/(d⁴(d+1)), independent of the target.
pub fn gate_variance_haar(d: usize) -> Result<f64> {
    require_dim(d)?;
    let d = d as f64;
    Ok(2.0 / (d.powi(4) * (d + 1.0)))
}

/// 2^{−a·n}, the multi-qubit reference decay.
pub fn qubit_bound(n_qubits: u32, a: f64) -> Result<f64> {
    if n_qubits == 0 {
        return Err(Error::InvalidConfig("qubit count must be at least 1".into()));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidConfig(format!("decay rate a={a} must lie in (0, 1)")));
    }
    Ok((-a * n_qubits as f64).exp2())
}

/// 2^{−a·n} with n = log₂ d, interpolating between qubit counts when d is
/// not a power of two.
pub fn qubit_bound_at_dim(d: usize, a: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "qubit comparison needs d >= 2",
        });
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidConfig(format!("decay rate a={a} must lie in (0, 1)")));
    }
    Ok((-a * (d as f64).log2()).exp2())
}

/// tr(Ô²) − 2^{−n}(tr Ô)² > 2^{(3−a)n+1} for a 2ⁿ-dimensional observable.
pub fn advantage_condition(observable: &ComplexMatrix, n_qubits: u32, a: f64) -> Result<bool> {
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::InvalidConfig(format!("decay rate a={a} must lie in (0.5, 1)")));
    }
    let d = observable.dim();
    if !d.is_power_of_two() || d.trailing_zeros() != n_qubits || n_qubits == 0 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "observable dimension must equal 2^n",
        });
    }
    let spread = observable_spread(observable, d)?;
    let n = n_qubits as f64;
    Ok(spread > ((3.0 - a) * n + 1.0).exp2())
}

pub fn predict_state(observable: &ComplexMatrix, d: usize) -> Result<VariancePrediction> {
    Ok(VariancePrediction {
        d,
        value: state_variance(observable, d)?,
        formula: FormulaId::StateCost,
    })
}

pub fn predict_gate(target: &ComplexMatrix) -> Result<VariancePrediction> {
    Ok(VariancePrediction {
        d: target.dim(),
        value: gate_variance_for_target(target)?,
        formula: FormulaId::GateCost,
    })
}

/// The three particle-number candidates side by side.
pub fn particle_number_candidates(d: usize) -> Result<[VariancePrediction; 3]> {
    Ok([
        VariancePrediction {
            d,
            value: particle_number_variance_stated(d)?,
            formula: FormulaId::ParticleNumberStated,
        },
        VariancePrediction {
            d,
            value: particle_number_variance_derived(d)?,
            formula: FormulaId::ParticleNumberDerived,
        },
        VariancePrediction {
            d,
            value: particle_number_variance_haar(d)?,
            formula: FormulaId::ParticleNumberHaar,
        },
    ])
}

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(log_log_fit(xs, ys)?.slope)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidConfig("log-log fit needs at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::InvalidConfig("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("log-log fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if lx.len() > 2 {
        let rss: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LogLogFit {
        slope,
        intercept,
        slope_stderr,
    })
}
