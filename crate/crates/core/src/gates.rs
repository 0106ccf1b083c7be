//! Truncated bosonic operators and the SNAP-Displacement block ansatz.
//!
//! A block is B(α, θ) = D†(α)·S(θ)·D(α) on a d-level truncation, and the
//! ansatz multiplies T blocks with block 1 acting first (rightmost).
//! Phases are indexed from 0 to match Fock labels |0⟩,…,|d−1⟩.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::linalg::{expm_antihermitian, hermitian_eig, Complex, ComplexMatrix, HermitianEigen, I, ONE};

/// One block's displacement amplitude and SNAP phases.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub alpha: f64,
    pub thetas: Vec<f64>,
}

impl BlockParams {
    pub fn new(alpha: f64, thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "a block needs at least one phase",
            });
        }
        if !alpha.is_finite() || thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { alpha, thetas })
    }

    /// α = 0 and all phases zero: the identity block.
    pub fn identity(d: usize) -> Self {
        Self {
            alpha: 0.0,
            thetas: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.thetas.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams {
    blocks: Vec<BlockParams>,
}

impl AnsatzParams {
    pub fn new(blocks: Vec<BlockParams>) -> Result<Self> {
        let first = blocks.first().ok_or(Error::InvalidDimension {
            dim: 0,
            reason: "an ansatz needs at least one block",
        })?;
        let d = first.dim();
        for b in &blocks {
            if b.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: b.dim(),
                });
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[BlockParams] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [BlockParams] {
        &mut self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].dim()
    }
}

/// B = w_a · w_b, split around the phase `nu`.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub w_a: ComplexMatrix,
    pub w_b: ComplexMatrix,
    pub nu: usize,
}

/// a|n⟩ = √n |n−1⟩ on the first d Fock states.
pub fn lowering(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |r, c| {
        if c >= 1 && r == c - 1 {
            Complex::new((c as f64).sqrt(), 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    })
}

/// Adjoint of [`lowering`]; the truncation sends |d−1⟩ to zero.
pub fn raising(d: usize) -> ComplexMatrix {
    lowering(d).adjoint()
}

/// Anti-Hermitian generator a − a† (the real-α displacement direction).
fn displacement_generator(d: usize) -> ComplexMatrix {
    &lowering(d) - &raising(d)
}

/// D(α) = exp(α(a − a†)) computed directly through the exponential map.
pub fn displacement(alpha: f64, d: usize) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "dimension must be at least 1",
        });
    }
    if !alpha.is_finite() {
        return Err(Error::NonFinite);
    }
    expm_antihermitian(&displacement_generator(d).scale(Complex::new(alpha, 0.0)))
}

/// Cached spectrum of −i(a − a†) for one dimension, so that
/// D(α) = V·diag(e^{iαλ})·V† costs a single product per call.
#[derive(Debug)]
pub struct Displacer {
    eig: HermitianEigen,
}

impl Displacer {
    pub fn new(d: usize) -> Self {
        let h = displacement_generator(d).scale(-I);
        let eig = hermitian_eig(&h).expect("−i(a − a†) is Hermitian by construction");
        Self { eig }
    }

    pub fn dim(&self) -> usize {
        self.eig.eigenvalues.len()
    }

    pub fn displacement(&self, alpha: f64) -> ComplexMatrix {
        if alpha == 0.0 {
            return ComplexMatrix::identity(self.dim());
        }
        self.eig.map_spectrum(|l| Complex::from_polar(1.0, alpha * l))
    }
}

thread_local! {
    static DISPLACERS: RefCell<HashMap<usize, Rc<Displacer>>> = RefCell::new(HashMap::new());
}

fn displacer(d: usize) -> Rc<Displacer> {
    DISPLACERS.with(|cache| {
        cache
            .borrow_mut()
            .entry(d)
            .or_insert_with(|| Rc::new(Displacer::new(d)))
            .clone()
    })
}

fn phases(thetas: &[f64]) -> Vec<Complex> {
    thetas.iter().map(|&t| Complex::from_polar(1.0, t)).collect()
}

/// S(θ) = Σ_n e^{iθ_n} |n⟩⟨n|.
pub fn snap(thetas: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diag(&phases(thetas))
}

pub fn block(p: &BlockParams) -> ComplexMatrix {
    let disp = displacer(p.dim()).displacement(p.alpha);
    // S·D is a row scaling of D.
    let sd = disp.scale_rows(&phases(&p.thetas));
    &disp.adjoint() * &sd
}

/// B_T ⋯ B_2 B_1.
pub fn ansatz(p: &AnsatzParams) -> ComplexMatrix {
    product_of_blocks(p.blocks())
}

fn product_of_blocks(blocks: &[BlockParams]) -> ComplexMatrix {
    let mut iter = blocks.iter();
    let Some(first) = iter.next() else {
        unreachable!("callers pass at least one block");
    };
    let mut u = block(first);
    for b in iter {
        u = &block(b) * &u;
    }
    u
}

fn check_nu(d: usize, nu: usize) -> Result<()> {
    if nu >= d {
        return Err(Error::IndexOutOfRange {
            what: "phase",
            index: nu,
            bound: d,
        });
    }
    Ok(())
}

/// W_A = D†·diag(e^{iθ_0},…,e^{iθ_ν},1,…,1),
/// W_B = diag(1,…,1,e^{iθ_{ν+1}},…,e^{iθ_{d−1}})·D.
pub fn partition_block(p: &BlockParams, nu: usize) -> Result<BlockPartition> {
    let d = p.dim();
    check_nu(d, nu)?;
    let disp = displacer(d).displacement(p.alpha);
    let all = phases(&p.thetas);
    let left: Vec<Complex> = (0..d).map(|j| if j <= nu { all[j] } else { ONE }).collect();
    let right: Vec<Complex> = (0..d).map(|j| if j > nu { all[j] } else { ONE }).collect();
    Ok(BlockPartition {
        w_a: disp.adjoint().scale_cols(&left),
        w_b: disp.scale_rows(&right),
        nu,
    })
}

/// Splits U = U_R · B_k · U_L for a 1-based block index k.
pub fn split_ansatz(p: &AnsatzParams, k: usize) -> Result<(ComplexMatrix, BlockParams, ComplexMatrix)> {
    let t = p.num_blocks();
    if k == 0 || k > t {
        return Err(Error::IndexOutOfRange {
            what: "block",
            index: k,
            bound: t,
        });
    }
    let d = p.dim();
    let blocks = p.blocks();
    let u_l = if k > 1 {
        product_of_blocks(&blocks[..k - 1])
    } else {
        ComplexMatrix::identity(d)
    };
    let u_r = if k < t {
        product_of_blocks(&blocks[k..])
    } else {
        ComplexMatrix::identity(d)
    };
    Ok((u_r, blocks[k - 1].clone(), u_l))
}

/// ∂B/∂θ_ν = i·W_A·|ν⟩⟨ν|·W_B.
pub fn block_gradient(p: &BlockParams, nu: usize) -> Result<ComplexMatrix> {
    let part = partition_block(p, nu)?;
    Ok(gradient_from_partition(&part))
}

pub fn gradient_from_partition(part: &BlockPartition) -> ComplexMatrix {
    let nu = part.nu;
    let col: Vec<Complex> = (0..part.w_a.dim()).map(|r| part.w_a[(r, nu)]).collect();
    let row = part.w_b.row(nu);
    ComplexMatrix::from_fn(part.w_a.dim(), |r, c| I * col[r] * row[c])
}
