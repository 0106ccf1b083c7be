//! Haar-random unitaries, Weingarten element moments and closed forms for
//! the trace integrals used in the variance analysis.
//!
//! Every closed form has an exhaustive-summation counterpart
//! (`sum_oracle_*`) that expands the integral into matrix-element
//! monomials weighted by [`moment1`] / [`moment2`]. The oracles are slow
//! (d⁸ terms) and only accept d ≤ [`ORACLE_MAX_DIM`].

use crate::error::{Error, Result};
use crate::linalg::{trace_of_product, Complex, ComplexMatrix};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub const ORACLE_MAX_DIM: usize = 6;
pub const MIN_FRAME_PAIRS: usize = 1000;

/// Master seed from which per-sample ChaCha streams are cut.
///
/// `stream(i)` depends only on `(master_seed, i)`, so a sample drawn from
/// stream `i` is the same no matter which worker draws it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededRng {
    master_seed: u64,
}

impl SeededRng {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream(&self, i: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(i);
        rng
    }

    /// Independent child seed for a labelled sub-experiment.
    pub fn derive(&self, tag: u64) -> SeededRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(u64::MAX);
        rng.set_word_pos(u128::from(tag) * 2);
        SeededRng::new(rng.next_u64())
    }
}

fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix orthonormalised column by column.
///
/// Modified Gram-Schmidt is applied twice per column. Normalising by the
/// (positive) residual norm is the same as fixing the triangular factor's
/// diagonal to positive reals, which is what makes the result Haar.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1, "haar_unitary needs d >= 1");
    // columns stored contiguously while orthonormalising
    let mut cols: Vec<Vec<Complex>> = (0..d)
        .map(|_| (0..d).map(|_| standard_complex_normal(rng)).collect())
        .collect();
    for j in 0..d {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let proj: Complex = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, qa) in v.iter_mut().zip(q) {
                    *x -= proj * qa;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(d, |r, c| cols[c][r])
}

/// E[w_{i₁j₁}·conj(w_{i₂j₂})] over Haar W.
pub fn moment1(i1: usize, j1: usize, i2: usize, j2: usize, d: usize) -> Result<f64> {
    for idx in [i1, j1, i2, j2] {
        if idx >= d {
            return Err(Error::IndexOutOfRange {
                what: "moment",
                index: idx,
                bound: d,
            });
        }
    }
    Ok(if i1 == i2 && j1 == j2 { 1.0 / d as f64 } else { 0.0 })
}

/// Indices of E[w_{i₁j₁}·w_{i₂j₂}·conj(w_{p₁k₁})·conj(w_{p₂k₂})].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentQuery {
    pub d: usize,
    pub i1: usize,
    pub j1: usize,
    pub i2: usize,
    pub j2: usize,
    pub p1: usize,
    pub k1: usize,
    pub p2: usize,
    pub k2: usize,
}

impl MomentQuery {
    /// `idx` is (i₁, j₁, i₂, j₂, p₁, k₁, p₂, k₂).
    pub fn new(d: usize, idx: [usize; 8]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= d) {
            return Err(Error::IndexOutOfRange {
                what: "moment",
                index: bad,
                bound: d,
            });
        }
        let [i1, j1, i2, j2, p1, k1, p2, k2] = idx;
        Ok(Self {
            d,
            i1,
            j1,
            i2,
            j2,
            p1,
            k1,
            p2,
            k2,
        })
    }

    pub fn indices(&self) -> [usize; 8] {
        [self.i1, self.j1, self.i2, self.j2, self.p1, self.k1, self.p2, self.k2]
    }
}

fn require_second_moment(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "second-moment formulas need d >= 2",
        });
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct Weingarten2 {
    same: f64,
    swap: f64,
}

impl Weingarten2 {
    fn new(d: usize) -> Self {
        let d = d as f64;
        Self {
            same: 1.0 / (d * d - 1.0),
            swap: -1.0 / (d * (d * d - 1.0)),
        }
    }

    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn eval(&self, i1: usize, j1: usize, i2: usize, j2: usize, p1: usize, k1: usize, p2: usize, k2: usize) -> f64 {
        let rows_id = i1 == p1 && i2 == p2;
        let rows_sw = i1 == p2 && i2 == p1;
        let cols_id = j1 == k1 && j2 == k2;
        let cols_sw = j1 == k2 && j2 == k1;
        let mut v = 0.0;
        if rows_id && cols_id {
            v += self.same;
        }
        if rows_sw && cols_sw {
            v += self.same;
        }
        if rows_id && cols_sw {
            v += self.swap;
        }
        if rows_sw && cols_id {
            v += self.swap;
        }
        v
    }
}

pub fn moment2(q: &MomentQuery) -> Result<f64> {
    require_second_moment(q.d)?;
    let q = MomentQuery::new(q.d, q.indices())?;
    Ok(Weingarten2::new(q.d).eval(q.i1, q.j1, q.i2, q.j2, q.p1, q.k1, q.p2, q.k2))
}

fn common_dim(ms: &[&ComplexMatrix]) -> Result<usize> {
    let d = ms[0].dim();
    for m in &ms[1..] {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.dim(),
            });
        }
    }
    Ok(d)
}

fn tr2(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex {
    trace_of_product(a, b).expect("dimensions checked")
}

fn tr4(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> Complex {
    tr2(&(a * b), &(c * d))
}

/// ∫ tr[WC]·tr[W†D] dW = tr(CD)/d.
pub fn lemma_two_trace(c: &ComplexMatrix, d: &ComplexMatrix) -> Result<Complex> {
    let n = common_dim(&[c, d])?;
    Ok(tr2(c, d) / n as f64)
}

/// ∫ tr[WC]·tr[W†D]·tr[WE]·tr[W†F] dW.
pub fn lemma_four_trace(c: &ComplexMatrix, d: &ComplexMatrix, e: &ComplexMatrix, f: &ComplexMatrix) -> Result<Complex> {
    let n = common_dim(&[c, d, e, f])?;
    require_second_moment(n)?;
    let w = Weingarten2::new(n);
    let paired = tr2(c, d) * tr2(e, f) + tr2(c, f) * tr2(e, d);
    let chained = tr4(c, d, e, f) + tr4(c, f, e, d);
    Ok(paired * w.same + chained * w.swap)
}

/// ∫ (tr[WC]·tr[W†D])² dW, i.e. the four-trace integral with E=C, F=D:
/// 2·tr(CD)²/(d²−1) − 2·tr[(CD)²]/(d(d²−1)).
pub fn lemma_four_trace_repeated(c: &ComplexMatrix, d: &ComplexMatrix) -> Result<Complex> {
    let n = common_dim(&[c, d])?;
    require_second_moment(n)?;
    let w = Weingarten2::new(n);
    let cd = c * d;
    let t = cd.trace();
    Ok(2.0 * t * t * w.same + 2.0 * tr2(&cd, &cd) * w.swap)
}

/// The repeated-pair form as it is usually quoted, with the last trace
/// squared: 2·tr(CD)²/(d²−1) − 2·(tr[(CD)²])²/(d(d²−1)). It disagrees with
/// the summation oracle and is kept only so that the disagreement can be
/// demonstrated.
pub fn lemma_four_trace_repeated_as_quoted(c: &ComplexMatrix, d: &ComplexMatrix) -> Result<Complex> {
    let n = common_dim(&[c, d])?;
    require_second_moment(n)?;
    let w = Weingarten2::new(n);
    let cd = c * d;
    let t = cd.trace();
    let t2 = tr2(&cd, &cd);
    Ok(2.0 * t * t * w.same + 2.0 * t2 * t2 * w.swap)
}

/// ∫ tr[W A W† B] dW = tr A·tr B/d.
pub fn lemma_conjugation(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex> {
    let n = common_dim(&[a, b])?;
    Ok(a.trace() * b.trace() / n as f64)
}

/// ∫ tr[W A W† B W C W† D] dW.
pub fn lemma_conjugation4(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> Result<Complex> {
    let n = common_dim(&[a, b, c, d])?;
    require_second_moment(n)?;
    let w = Weingarten2::new(n);
    let (ta, tb, tc, td) = (a.trace(), b.trace(), c.trace(), d.trace());
    let (tac, tbd) = (tr2(a, c), tr2(b, d));
    Ok((ta * tc * tbd + tac * tb * td) * w.same + (tac * tbd + ta * tb * tc * td) * w.swap)
}

/// ∫ tr[W A W† B]·tr[W C W† D] dW.
pub fn lemma_product_conjugation(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> Result<Complex> {
    let n = common_dim(&[a, b, c, d])?;
    require_second_moment(n)?;
    let w = Weingarten2::new(n);
    let (ta, tb, tc, td) = (a.trace(), b.trace(), c.trace(), d.trace());
    let (tac, tbd) = (tr2(a, c), tr2(b, d));
    Ok((ta * tb * tc * td + tac * tbd) * w.same + (tac * tb * td + ta * tc * tbd) * w.swap)
}

/// ∫ (tr[W A W† B])² dW.
pub fn corollary_quadratic(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex> {
    let n = common_dim(&[a, b])?;
    require_second_moment(n)?;
    let nf = n as f64;
    let (ta, tb) = (a.trace(), b.trace());
    let (ta2, tb2) = (tr2(a, a), tr2(b, b));
    Ok((ta * ta * (tb * tb - tb2 / nf) + ta2 * (tb2 - tb * tb / nf)) / (nf * nf - 1.0))
}

fn oracle_dim(ms: &[&ComplexMatrix], second_moment: bool) -> Result<usize> {
    let d = common_dim(ms)?;
    if d > ORACLE_MAX_DIM {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "summation oracle is limited to d <= 6",
        });
    }
    if second_moment {
        require_second_moment(d)?;
    }
    Ok(d)
}

/// Σ c_{ji}·d_{mk}·E[w_{ij}·conj(w_{mk})].
pub fn sum_oracle_two_trace(c: &ComplexMatrix, dm: &ComplexMatrix) -> Result<Complex> {
    let d = oracle_dim(&[c, dm], false)?;
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            for m in 0..d {
                for k in 0..d {
                    let w = moment1(i, j, m, k, d)?;
                    if w != 0.0 {
                        acc += c[(j, i)] * dm[(m, k)] * w;
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Σ a_{ab}·b_{ci}·E[w_{ia}·conj(w_{cb})].
pub fn sum_oracle_conjugation(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex> {
    let d = oracle_dim(&[a, b], false)?;
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..d {
        for x in 0..d {
            for y in 0..d {
                for c in 0..d {
                    let w = moment1(i, x, c, y, d)?;
                    if w != 0.0 {
                        acc += a[(x, y)] * b[(c, i)] * w;
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Generic eight-index sum: Σ term(idx)·E[w_{i₁j₁} w_{i₂j₂} conj(w_{p₁k₁}) conj(w_{p₂k₂})].
fn eight_index_sum(d: usize, term: impl Fn([usize; 8]) -> Complex) -> Complex {
    let w = Weingarten2::new(d);
    let mut acc = Complex::new(0.0, 0.0);
    for i1 in 0..d {
        for j1 in 0..d {
            for i2 in 0..d {
                for j2 in 0..d {
                    for p1 in 0..d {
                        for k1 in 0..d {
                            for p2 in 0..d {
                                for k2 in 0..d {
                                    let m = w.eval(i1, j1, i2, j2, p1, k1, p2, k2);
                                    if m != 0.0 {
                                        acc += term([i1, j1, i2, j2, p1, k1, p2, k2]) * m;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    acc
}

/// tr[WC]·tr[WE]·tr[W†D]·tr[W†F] expanded as
/// w_{i₁j₁}c_{j₁i₁}·w_{i₂j₂}e_{j₂i₂}·conj(w_{p₁k₁})d_{p₁k₁}·conj(w_{p₂k₂})f_{p₂k₂}.
pub fn sum_oracle_four_trace(c: &ComplexMatrix, dm: &ComplexMatrix, e: &ComplexMatrix, f: &ComplexMatrix) -> Result<Complex> {
    let d = oracle_dim(&[c, dm, e, f], true)?;
    Ok(eight_index_sum(d, |[i1, j1, i2, j2, p1, k1, p2, k2]| {
        c[(j1, i1)] * e[(j2, i2)] * dm[(p1, k1)] * f[(p2, k2)]
    }))
}

/// tr[W A W† B W C W† D] = Σ w_{ia}A_{ab}conj(w_{cb})B_{ce}w_{ef}C_{fg}conj(w_{hg})D_{hi}.
pub fn sum_oracle_conjugation4(a: &ComplexMatrix, b: &ComplexMatrix, cm: &ComplexMatrix, dm: &ComplexMatrix) -> Result<Complex> {
    let d = oracle_dim(&[a, b, cm, dm], true)?;
    // (i₁,j₁,i₂,j₂,p₁,k₁,p₂,k₂) = (i,a,e,f,c,b,h,g)
    Ok(eight_index_sum(d, |[i, x, e, f, c, y, h, g]| {
        a[(x, y)] * b[(c, e)] * cm[(f, g)] * dm[(h, i)]
    }))
}

/// tr[W A W† B]·tr[W C W† D] = Σ w_{ia}A_{ab}conj(w_{cb})B_{ci}·w_{ef}C_{fg}conj(w_{hg})D_{he}.
pub fn sum_oracle_product(a: &ComplexMatrix, b: &ComplexMatrix, cm: &ComplexMatrix, dm: &ComplexMatrix) -> Result<Complex> {
    let d = oracle_dim(&[a, b, cm, dm], true)?;
    Ok(eight_index_sum(d, |[i, x, e, f, c, y, h, g]| {
        a[(x, y)] * b[(c, i)] * cm[(f, g)] * dm[(h, e)]
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePotential {
    pub t: u32,
    pub value: f64,
    pub stderr: f64,
    pub n_pairs: usize,
}

/// Monte Carlo estimate of E|tr(U†V)|^{2t} over independent pairs drawn
/// from `sampler`. Pair `i` uses stream `i` of `rng` for both draws.
pub fn frame_potential<F>(sampler: F, t: u32, n_pairs: usize, rng: &SeededRng) -> Result<FramePotential>
where
    F: Fn(&mut ChaCha8Rng) -> ComplexMatrix + Sync,
{
    if !(1..=2).contains(&t) {
        return Err(Error::InvalidConfig(format!("frame potential order t={t} must be 1 or 2")));
    }
    if n_pairs < MIN_FRAME_PAIRS {
        return Err(Error::InvalidConfig(format!(
            "frame potential needs at least {MIN_FRAME_PAIRS} pairs, got {n_pairs}"
        )));
    }
    let samples: Vec<f64> = (0..n_pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.stream(i);
            let u = sampler(&mut r);
            let v = sampler(&mut r);
            let overlap = trace_of_product(&u.adjoint(), &v).expect("sampler returns a fixed dimension");
            overlap.norm_sqr().powi(t as i32)
        })
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FramePotential {
        t,
        value: mean,
        stderr: (var / n).sqrt(),
        n_pairs,
    })
}

/// A random operator with entries uniform in the unit square, scaled by 1/d
/// so the Frobenius norm stays near one.
pub fn random_operator<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let s = 1.0 / d as f64;
    ComplexMatrix::from_fn(d, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaDeviation {
    pub lemma: &'static str,
    /// Largest |closed form − oracle| over the tuples.
    pub max_abs_dev: f64,
    /// True for the as-quoted repeated-pair form, which is expected to
    /// disagree and is shown for comparison only.
    pub reference_only: bool,
}

/// Closed form vs summation oracle for every lemma on `n_tuples` random
/// operator tuples at dimension `d`.
pub fn oracle_agreement<R: Rng + ?Sized>(d: usize, n_tuples: usize, rng: &mut R) -> Result<Vec<LemmaDeviation>> {
    require_second_moment(d)?;
    if d > ORACLE_MAX_DIM {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "summation oracle is limited to d <= 6",
        });
    }
    let names = [
        ("two_trace", false),
        ("four_trace", false),
        ("four_trace_repeated", false),
        ("conjugation", false),
        ("conjugation4", false),
        ("product_conjugation", false),
        ("corollary_quadratic", false),
        ("four_trace_repeated_as_quoted", true),
    ];
    let mut worst = [0.0f64; 8];
    for _ in 0..n_tuples {
        let ops: Vec<ComplexMatrix> = (0..4).map(|_| random_operator(d, rng)).collect();
        let [a, b, c, e] = [&ops[0], &ops[1], &ops[2], &ops[3]];
        let repeated_oracle = sum_oracle_four_trace(a, b, a, b)?;
        let devs = [
            (lemma_two_trace(a, b)? - sum_oracle_two_trace(a, b)?).norm(),
            (lemma_four_trace(a, b, c, e)? - sum_oracle_four_trace(a, b, c, e)?).norm(),
            (lemma_four_trace_repeated(a, b)? - repeated_oracle).norm(),
            (lemma_conjugation(a, b)? - sum_oracle_conjugation(a, b)?).norm(),
            (lemma_conjugation4(a, b, c, e)? - sum_oracle_conjugation4(a, b, c, e)?).norm(),
            (lemma_product_conjugation(a, b, c, e)? - sum_oracle_product(a, b, c, e)?).norm(),
            (corollary_quadratic(a, b)? - sum_oracle_product(a, b, a, b)?).norm(),
            (lemma_four_trace_repeated_as_quoted(a, b)? - repeated_oracle).norm(),
        ];
        for (w, v) in worst.iter_mut().zip(devs) {
            *w = w.max(v);
        }
    }
    Ok(names
        .iter()
        .zip(worst)
        .map(|(&(lemma, reference_only), max_abs_dev)| LemmaDeviation {
            lemma,
            max_abs_dev,
            reference_only,
        })
        .collect())
}

/// Random second-moment query. Half the queries take the conjugated
/// indices as a permutation of the plain ones so the moment is nonzero;
/// uniform indices almost always give zero.
pub fn random_moment_query<R: Rng + ?Sized>(d: usize, rng: &mut R) -> MomentQuery {
    let mut idx = [0usize; 8];
    for x in idx.iter_mut().take(4) {
        *x = rng.random_range(0..d);
    }
    if rng.random_bool(0.5) {
        let swap_rows = rng.random_bool(0.5);
        let swap_cols = rng.random_bool(0.5);
        idx[4] = if swap_rows { idx[2] } else { idx[0] };
        idx[6] = if swap_rows { idx[0] } else { idx[2] };
        idx[5] = if swap_cols { idx[3] } else { idx[1] };
        idx[7] = if swap_cols { idx[1] } else { idx[3] };
    } else {
        for x in idx.iter_mut().skip(4) {
            *x = rng.random_range(0..d);
        }
    }
    MomentQuery::new(d, idx).expect("indices drawn below d")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledMoment {
    pub exact: f64,
    pub estimate: Complex,
    pub stderr: f64,
}

impl SampledMoment {
    /// |estimate − exact| in standard errors.
    pub fn sigma_distance(&self) -> f64 {
        let dev = (self.estimate - Complex::new(self.exact, 0.0)).norm();
        if self.stderr > 0.0 {
            dev / self.stderr
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub query: MomentQuery,
    /// E[w_{i₁j₁}·conj(w_{i₂j₂})]
    pub first: SampledMoment,
    pub second: SampledMoment,
}

/// Monte Carlo estimates of moment1 / moment2 for each query from
/// `n_samples` Haar draws. Draw `i` uses stream `i` of `rng`.
pub fn check_sampled_moments(queries: &[MomentQuery], n_samples: usize, rng: &SeededRng) -> Result<Vec<MomentCheck>> {
    let Some(d) = queries.first().map(|q| q.d) else {
        return Ok(Vec::new());
    };
    if queries.iter().any(|q| q.d != d) {
        return Err(Error::InvalidConfig("moment queries must share one dimension".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidConfig("need at least two samples".into()));
    }
    let exact: Vec<(f64, f64)> = queries
        .iter()
        .map(|q| Ok((moment1(q.i1, q.j1, q.i2, q.j2, d)?, moment2(q)?)))
        .collect::<Result<_>>()?;
    // per query: Σx and Σ|x|² for both moments
    let zero = || vec![(Complex::new(0.0, 0.0), 0.0, Complex::new(0.0, 0.0), 0.0); queries.len()];
    const CHUNK: usize = 1024;
    let partials: Vec<_> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = zero();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let w = haar_unitary(d, &mut rng.stream(i as u64));
                for (a, q) in acc.iter_mut().zip(queries) {
                    let f = w[(q.i1, q.j1)] * w[(q.i2, q.j2)].conj();
                    let s = w[(q.i1, q.j1)] * w[(q.i2, q.j2)] * w[(q.p1, q.k1)].conj() * w[(q.p2, q.k2)].conj();
                    a.0 += f;
                    a.1 += f.norm_sqr();
                    a.2 += s;
                    a.3 += s.norm_sqr();
                }
            }
            acc
        })
        .collect();
    let mut total = zero();
    for p in &partials {
        for (t, x) in total.iter_mut().zip(p) {
            t.0 += x.0;
            t.1 += x.1;
            t.2 += x.2;
            t.3 += x.3;
        }
    }
    let n = n_samples as f64;
    let summarise = |sum: Complex, sum_sq: f64, exact: f64| {
        let mean = sum / n;
        let var = ((sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0);
        SampledMoment {
            exact,
            estimate: mean,
            stderr: (var / n).sqrt(),
        }
    };
    Ok(queries
        .iter()
        .zip(total)
        .zip(exact)
        .map(|((q, t), (e1, e2))| MomentCheck {
            query: *q,
            first: summarise(t.0, t.1, e1),
            second: summarise(t.2, t.3, e2),
        })
        .collect())
}
