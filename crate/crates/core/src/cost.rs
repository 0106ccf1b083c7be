//! State/observable and gate cost functions with exact SNAP-phase gradients.
//!
//! Gradients are evaluated from the split U = U_R·W_A·W_B·U_L: a parameter
//! draw and a Haar substitution of the factors go through the same
//! trace expressions ([`state_gradient`], [`gate_gradient`]).

use crate::error::{Error, Result};
use crate::gates::{ansatz, partition_block, split_ansatz, AnsatzParams};
use crate::linalg::{hermitian_eig, trace_of_product, Complex, ComplexMatrix, I, STRUCTURE_TOL};

/// Largest imaginary part tolerated before projecting a trace onto the
/// reals (scaled by max(1, ‖O‖_F) for state costs).
pub const RESIDUE_TOL: f64 = 1e-10;
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct StateCost {
    observable: ComplexMatrix,
    rho0: ComplexMatrix,
}

impl StateCost {
    pub fn new(observable: ComplexMatrix, rho0: ComplexMatrix) -> Result<Self> {
        let defect = observable.hermitian_defect();
        if defect > STRUCTURE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        if rho0.dim() != observable.dim() {
            return Err(Error::DimensionMismatch {
                expected: observable.dim(),
                found: rho0.dim(),
            });
        }
        validate_density_matrix(&rho0)?;
        Ok(Self { observable, rho0 })
    }

    /// ρ₀ = |0⟩⟨0|.
    pub fn with_vacuum(observable: ComplexMatrix) -> Result<Self> {
        let d = observable.dim();
        Self::new(observable, ComplexMatrix::projector(d, 0))
    }

    pub fn observable(&self) -> &ComplexMatrix {
        &self.observable
    }

    pub fn rho0(&self) -> &ComplexMatrix {
        &self.rho0
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }

    fn residue_tol(&self) -> f64 {
        RESIDUE_TOL * self.observable.frobenius_norm().max(1.0)
    }
}

fn validate_density_matrix(rho: &ComplexMatrix) -> Result<()> {
    let defect = rho.hermitian_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::NotDensityMatrix(format!("not Hermitian (deviation {defect:.3e})")));
    }
    let tr = rho.trace();
    if (tr - Complex::new(1.0, 0.0)).norm() > STRUCTURE_TOL {
        return Err(Error::NotDensityMatrix(format!("trace {tr} is not 1")));
    }
    let eig = hermitian_eig(rho)?;
    if eig.eigenvalues[0] < -STRUCTURE_TOL {
        return Err(Error::NotDensityMatrix(format!(
            "negative eigenvalue {:.3e}",
            eig.eigenvalues[0]
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCost {
    target: ComplexMatrix,
}

impl GateCost {
    pub fn new(target: ComplexMatrix) -> Result<Self> {
        let defect = target.unitarity_defect();
        if defect > STRUCTURE_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { target })
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    State(StateCost),
    Gate(GateCost),
}

impl CostSpec {
    pub fn dim(&self) -> usize {
        match self {
            CostSpec::State(s) => s.dim(),
            CostSpec::Gate(g) => g.dim(),
        }
    }

    pub fn evaluate(&self, p: &AnsatzParams) -> Result<f64> {
        match self {
            CostSpec::State(s) => state_cost(s, p),
            CostSpec::Gate(g) => gate_cost(g, p),
        }
    }

    pub fn gradient(&self, p: &AnsatzParams, r: GradientRequest) -> Result<f64> {
        match self {
            CostSpec::State(s) => grad_state_cost(s, p, r),
            CostSpec::Gate(g) => grad_gate_cost(g, p, r),
        }
    }

    pub fn gradient_from_factors(&self, f: &GradientFactors, nu: usize) -> Result<f64> {
        match self {
            CostSpec::State(s) => state_gradient(s, f, nu),
            CostSpec::Gate(g) => gate_gradient(g, f, nu),
        }
    }
}

/// Which phase to differentiate: block `k` (1-based), phase `nu` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradientRequest {
    pub k: usize,
    pub nu: usize,
}

impl GradientRequest {
    pub fn new(k: usize, nu: usize) -> Self {
        Self { k, nu }
    }

    pub fn validate(&self, p: &AnsatzParams) -> Result<()> {
        if self.k == 0 || self.k > p.num_blocks() {
            return Err(Error::IndexOutOfRange {
                what: "block",
                index: self.k,
                bound: p.num_blocks(),
            });
        }
        if self.nu >= p.dim() {
            return Err(Error::IndexOutOfRange {
                what: "phase",
                index: self.nu,
                bound: p.dim(),
            });
        }
        Ok(())
    }
}

/// The four factors of U = U_R·W_A·W_B·U_L around one SNAP phase.
#[derive(Debug, Clone)]
pub struct GradientFactors {
    pub u_r: ComplexMatrix,
    pub w_a: ComplexMatrix,
    pub w_b: ComplexMatrix,
    pub u_l: ComplexMatrix,
}

impl GradientFactors {
    pub fn from_ansatz(p: &AnsatzParams, r: GradientRequest) -> Result<Self> {
        r.validate(p)?;
        let (u_r, b, u_l) = split_ansatz(p, r.k)?;
        let part = partition_block(&b, r.nu)?;
        Ok(Self {
            u_r,
            w_a: part.w_a,
            w_b: part.w_b,
            u_l,
        })
    }

    pub fn dim(&self) -> usize {
        self.u_r.dim()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        for m in [&self.u_r, &self.w_a, &self.w_b, &self.u_l] {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
        }
        Ok(())
    }
}

fn check_dim(expected: usize, p: &AnsatzParams) -> Result<()> {
    if p.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: p.dim(),
        });
    }
    Ok(())
}

fn real_part(z: Complex, tol: f64) -> Result<f64> {
    if z.im.abs() > tol {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// C_s = 1 − tr(O·U·ρ₀·U†).
pub fn state_cost(cost: &StateCost, p: &AnsatzParams) -> Result<f64> {
    check_dim(cost.dim(), p)?;
    let u = ansatz(p);
    let evolved = &(&u * &cost.rho0) * &u.adjoint();
    let overlap = trace_of_product(&cost.observable, &evolved)?;
    Ok(1.0 - real_part(overlap, cost.residue_tol())?)
}

/// C_g = 1 − |tr(U_t†·U)/d|².
pub fn gate_cost(cost: &GateCost, p: &AnsatzParams) -> Result<f64> {
    check_dim(cost.dim(), p)?;
    let u = ansatz(p);
    let overlap = trace_of_product(&cost.target.adjoint(), &u)? / cost.dim() as f64;
    Ok(1.0 - overlap.norm_sqr())
}

/// X = W_A†U_R†·O·U_R W_A and Y = W_B U_L·ρ₀·U_L†W_B†.
fn conjugated_pair(cost: &StateCost, f: &GradientFactors) -> (ComplexMatrix, ComplexMatrix) {
    let m = &f.u_r * &f.w_a;
    let x = &(&m.adjoint() * &cost.observable) * &m;
    let n = &f.w_b * &f.u_l;
    let y = &(&n * &cost.rho0) * &n.adjoint();
    (x, y)
}

/// ∂C_s = −i·tr(X·[ρ_ν, Y]).
pub fn state_gradient(cost: &StateCost, f: &GradientFactors, nu: usize) -> Result<f64> {
    let d = cost.dim();
    f.check_dim(d)?;
    if nu >= d {
        return Err(Error::IndexOutOfRange {
            what: "phase",
            index: nu,
            bound: d,
        });
    }
    let (x, y) = conjugated_pair(cost, f);
    // [ρ_ν, Y] keeps only row ν (from ρ_ν·Y) and column ν (from Y·ρ_ν).
    let comm = ComplexMatrix::from_fn(d, |r, c| {
        let left = if r == nu { y[(nu, c)] } else { Complex::new(0.0, 0.0) };
        let right = if c == nu { y[(r, nu)] } else { Complex::new(0.0, 0.0) };
        left - right
    });
    let value = -I * trace_of_product(&x, &comm)?;
    real_part(value, cost.residue_tol())
}

pub fn grad_state_cost(cost: &StateCost, p: &AnsatzParams, r: GradientRequest) -> Result<f64> {
    check_dim(cost.dim(), p)?;
    let f = GradientFactors::from_ansatz(p, r)?;
    state_gradient(cost, &f, r.nu)
}

/// Same derivative through the other ordering, −i·tr([X, ρ_ν]·Y), with
/// dense products throughout. Kept as an algebraic cross-check.
pub fn grad_state_cost_alt(cost: &StateCost, p: &AnsatzParams, r: GradientRequest) -> Result<f64> {
    check_dim(cost.dim(), p)?;
    let f = GradientFactors::from_ansatz(p, r)?;
    let (x, y) = conjugated_pair(cost, &f);
    let rho_nu = ComplexMatrix::projector(cost.dim(), r.nu);
    let comm = &(&x * &rho_nu) - &(&rho_nu * &x);
    let value = -I * (&comm * &y).trace();
    real_part(value, cost.residue_tol())
}

/// ∂C_g = −(i/d²)·(tr(U_t·U†)·tr(U_t†·U_R W_A ρ_ν W_B U_L) − c.c.), with the
/// conjugate term built from its own products so the imaginary residue
/// is a genuine consistency check.
pub fn gate_gradient(cost: &GateCost, f: &GradientFactors, nu: usize) -> Result<f64> {
    let d = cost.dim();
    f.check_dim(d)?;
    if nu >= d {
        return Err(Error::IndexOutOfRange {
            what: "phase",
            index: nu,
            bound: d,
        });
    }
    let target = &cost.target;
    let target_adj = target.adjoint();
    let right = &f.u_r * &f.w_a;
    let left = &f.w_b * &f.u_l;
    let u = &right * &left;

    let overlap_conj = trace_of_product(target, &u.adjoint())?;
    let overlap = trace_of_product(&target_adj, &u)?;
    // tr(U_t†·R·ρ_ν·L) = (L·U_t†·R)_νν
    let inner = (&(&left * &target_adj) * &right)[(nu, nu)];
    // tr(L†·ρ_ν·R†·U_t) = (R†·U_t·L†)_νν
    let inner_conj = (&(&right.adjoint() * target) * &left.adjoint())[(nu, nu)];

    let value = -I / (d * d) as f64 * (overlap_conj * inner - overlap * inner_conj);
    real_part(value, RESIDUE_TOL)
}

pub fn grad_gate_cost(cost: &GateCost, p: &AnsatzParams, r: GradientRequest) -> Result<f64> {
    check_dim(cost.dim(), p)?;
    let f = GradientFactors::from_ansatz(p, r)?;
    gate_gradient(cost, &f, r.nu)
}

/// Central difference (C(θ+h) − C(θ−h)) / 2h in the requested phase.
pub fn fd_gradient<F>(mut cost: F, p: &AnsatzParams, r: GradientRequest, h: f64) -> f64
where
    F: FnMut(&AnsatzParams) -> f64,
{
    let mut plus = p.clone();
    plus.blocks_mut()[r.k - 1].thetas[r.nu] += h;
    let mut minus = p.clone();
    minus.blocks_mut()[r.k - 1].thetas[r.nu] -= h;
    (cost(&plus) - cost(&minus)) / (2.0 * h)
}
