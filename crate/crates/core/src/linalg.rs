//! Dense square complex matrices.
//!
//! Everything in this crate (states, gates, observables, Haar samples) is a
//! `ComplexMatrix`. Dimensions stay small (d ≲ 64), so storage is a flat
//! row-major `Vec` and products are the naive triple loop.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

/// Tolerance used by the structural predicates when a contract needs one.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Jacobi stops once the off-diagonal Frobenius norm drops below this
/// fraction of ‖h‖_F.
pub const EIG_REL_TOL: f64 = 1e-12;
pub const EIG_MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinalgConfig {
    pub structure_tol: f64,
    pub eig_rel_tol: f64,
    pub eig_max_sweeps: usize,
}

impl Default for LinalgConfig {
    fn default() -> Self {
        Self {
            structure_tol: STRUCTURE_TOL,
            eig_rel_tol: EIG_REL_TOL,
            eig_max_sweeps: EIG_MAX_SWEEPS,
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Rejects empty, ragged or
    /// non-finite input.
    pub fn from_row_major(dim: usize, data: Vec<Complex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "matrix dimension must be at least 1",
            });
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn from_diag(diag: &[Complex]) -> Self {
        Self::from_fn(diag.len(), |r, c| if r == c { diag[r] } else { ZERO })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |r, c| {
            if r == c {
                Complex::new(diag[r], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// |n⟩⟨n| in dimension `dim`.
    pub fn projector(dim: usize, n: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == n && c == n { ONE } else { ZERO })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn diag(&self) -> Vec<Complex> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |r, c| self.data[c * d + r].conj())
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies row `r` by `factors[r]`, i.e. `diag(factors) · self`.
    pub fn scale_rows(&self, factors: &[Complex]) -> Self {
        let d = self.dim;
        debug_assert_eq!(factors.len(), d);
        Self::from_fn(d, |r, c| factors[r] * self.data[r * d + c])
    }

    /// Multiplies column `c` by `factors[c]`, i.e. `self · diag(factors)`.
    pub fn scale_cols(&self, factors: &[Complex]) -> Self {
        let d = self.dim;
        debug_assert_eq!(factors.len(), d);
        Self::from_fn(d, |r, c| self.data[r * d + c] * factors[c])
    }

    /// Product without the dimension check; callers guarantee equal sizes.
    fn mul_unchecked(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            let lhs = &self.data[r * d..(r + 1) * d];
            let dst = &mut out[r * d..(r + 1) * d];
            for (k, a) in lhs.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs = &other.data[k * d..(k + 1) * d];
                for (o, b) in dst.iter_mut().zip(rhs) {
                    *o += a * b;
                }
            }
        }
        Self { dim: d, data: out }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖U†U − I‖_F.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul_unchecked(self);
        frobenius_distance_unchecked(&p, &Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Largest |h_rc − conj(h_cr)|.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    fn anti_hermitian_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] + self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim;
        (0..d).all(|r| (0..d).all(|c| r == c || self.data[r * d + c].norm() <= tol))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.data[r * self.dim + c]
    }
}

// The operator forms panic on a size mismatch; the free functions below
// report it as an error instead.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})[", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, " ")?;
            for z in self.row(r) {
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(())
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    Ok(a.mul_unchecked(b))
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn trace(a: &ComplexMatrix) -> Complex {
    a.trace()
}

/// tr(AB) in O(d²) without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex> {
    check_dims(a, b)?;
    let d = a.dim;
    let mut acc = ZERO;
    for r in 0..d {
        for c in 0..d {
            acc += a.data[r * d + c] * b.data[c * d + r];
        }
    }
    Ok(acc)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    Ok(&a.mul_unchecked(b) - &b.mul_unchecked(a))
}

fn frobenius_distance_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    check_dims(a, b)?;
    Ok(frobenius_distance_unchecked(a, b))
}

/// Spectral decomposition h = V·diag(λ)·V† of a Hermitian matrix, with λ
/// ascending and the columns of V the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// V·diag(f(λ))·V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex) -> ComplexMatrix {
        let phases: Vec<Complex> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        &v.scale_cols(&phases) * &v.adjoint()
    }
}

pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eig_with(h, &LinalgConfig::default())
}

/// Cyclic complex Jacobi rotations.
pub fn hermitian_eig_with(h: &ComplexMatrix, cfg: &LinalgConfig) -> Result<HermitianEigen> {
    let defect = h.hermitian_defect();
    if defect > cfg.structure_tol {
        return Err(Error::NotHermitian(defect));
    }
    let d = h.dim;
    let mut a = h.clone();
    // Symmetrize exactly so the rotations see a genuinely Hermitian matrix.
    for r in 0..d {
        a[(r, r)] = Complex::new(a[(r, r)].re, 0.0);
        for c in (r + 1)..d {
            let avg = (a[(r, c)] + a[(c, r)].conj()) * 0.5;
            a[(r, c)] = avg;
            a[(c, r)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(d);
    let threshold = cfg.eig_rel_tol * h.frobenius_norm();

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for r in 0..d {
            for c in 0..d {
                if r != c {
                    s += a[(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > threshold {
        if sweeps == cfg.eig_max_sweeps {
            return Err(Error::NoConvergence(sweeps));
        }
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Real 2x2 rotation on [[app, mag], [mag, aqq]] after the
                // phase of a_pq has been moved onto column q.
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = Φ·R with Φ = diag(1, conj(phase)) on (p, q).
                let j_pp = Complex::new(c, 0.0);
                let j_pq = Complex::new(s, 0.0);
                let j_qp = -phase.conj() * s;
                let j_qq = phase.conj() * c;

                // a ← a·J
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                // a ← J†·a
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex::new(a[(q, q)].re, 0.0);
                // v ← v·J
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(d, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// exp(g) for anti-Hermitian g, through the spectrum of the Hermitian −i·g:
/// g = i·h, exp(g) = V·diag(e^{iλ})·V†.
pub fn expm_antihermitian(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    expm_antihermitian_with(g, &LinalgConfig::default())
}

pub fn expm_antihermitian_with(g: &ComplexMatrix, cfg: &LinalgConfig) -> Result<ComplexMatrix> {
    let defect = g.anti_hermitian_defect();
    if defect > cfg.structure_tol {
        return Err(Error::NotAntiHermitian(defect));
    }
    let h = g.scale(-I);
    let eig = hermitian_eig_with(&h, cfg)?;
    Ok(eig.map_spectrum(|l| Complex::from_polar(1.0, l)))
}
