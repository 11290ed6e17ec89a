//! Exact and baseline detectors: exhaustive ML, exhaustive MRF marginals,
//! matched filter and linear MMSE.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;

use crate::bp::MrfModel;
use crate::cda_stbc::AdjointGeneric;
use crate::error::{Error, Result};
use crate::scalar::{log_add_exp, Real};

/// Largest `K` accepted by [`ml_detect`].
pub const ML_MAX_K: usize = 24;
/// Largest `K` accepted by [`exact_marginals`] and [`mrf_map`].
pub const MARGINALS_MAX_K: usize = 16;

/// Detection instance `y = H·x + n`, `n ~ CN(0, σ²I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<T: Real> {
    pub y: DVector<Complex<T>>,
    pub h: DMatrix<Complex<T>>,
    pub sigma2: T,
}

impl<T: Real> LinearSystem<T> {
    pub fn new(y: DVector<Complex<T>>, h: DMatrix<Complex<T>>, sigma2: T) -> Result<Self> {
        if y.len() != h.nrows() {
            return Err(Error::Dimension {
                what: "received vector length",
                expected: h.nrows(),
                actual: y.len(),
            });
        }
        if !(sigma2 > T::zero()) {
            return Err(Error::NonPositiveNoise(sigma2.as_f64()));
        }
        Ok(Self { y, h, sigma2 })
    }

    /// Number of unknowns.
    pub fn k(&self) -> usize {
        self.h.ncols()
    }
}

/// Lexicographic order on `{±1}^K` with `+1` ranked first.
fn lex_precedes(a: &[i8], b: &[i8]) -> bool {
    for (&x, &y) in a.iter().zip(b) {
        if x != y {
            return x > y;
        }
    }
    false
}

/// `argmin_x ‖y − Hx‖²` over `{±1}^K` by Gray-code enumeration with an
/// incrementally updated residual. Near-equal metrics are resolved in
/// lexicographic order, `+1` first.
pub fn ml_detect<T: Real>(sys: &LinearSystem<T>) -> Result<Vec<i8>> {
    let k = sys.k();
    if k > ML_MAX_K {
        return Err(Error::EnumerationGuard {
            detector: "ML",
            limit: ML_MAX_K,
            k,
        });
    }
    let two = T::lit(2.0);
    let mut x = vec![1i8; k];
    let mut residual: Vec<Complex<T>> = sys.y.iter().copied().collect();
    for c in 0..k {
        for (r, &h) in residual.iter_mut().zip(sys.h.column(c).iter()) {
            *r -= h;
        }
    }
    let metric = |res: &[Complex<T>]| res.iter().map(|z| z.norm_sqr()).sum::<T>();
    let scale = sys.y.iter().map(|z| z.norm_sqr()).sum::<T>()
        + sys.h.iter().map(|z| z.norm_sqr()).sum::<T>();
    let tie_tol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3)) * (scale + T::one());

    let mut best = x.clone();
    let mut best_metric = metric(&residual);
    for step in 1u64..(1u64 << k) {
        let b = step.trailing_zeros() as usize;
        // x_b flips sign: residual changes by 2·x_b(old)·h_b.
        let s = if x[b] > 0 { two } else { -two };
        for (r, &h) in residual.iter_mut().zip(sys.h.column(b).iter()) {
            *r += h * s;
        }
        x[b] = -x[b];
        let m = metric(&residual);
        if m < best_metric - tie_tol
            || ((m - best_metric).abs() <= tie_tol && lex_precedes(&x, &best))
        {
            best_metric = best_metric.min(m);
            best.copy_from_slice(&x);
        }
    }
    Ok(best)
}

/// Visit every configuration of `{±1}^K` in Gray-code order together with its
/// unnormalized log weight under the pairwise MRF.
fn enumerate_mrf<T: Real>(model: &MrfModel<T>, mut visit: impl FnMut(&[i8], T)) -> Result<()> {
    let k = model.k();
    if k > MARGINALS_MAX_K {
        return Err(Error::EnumerationGuard {
            detector: "MRF marginal",
            limit: MARGINALS_MAX_K,
            k,
        });
    }
    let mut x = vec![1i8; k];
    let mut logw = T::zero();
    for i in 0..k {
        logw += model.log_phi(i)[0];
        for j in 0..i {
            logw += model.log_psi(i, j, 1, 1);
        }
    }
    visit(&x, logw);
    for step in 1u64..(1u64 << k) {
        let b = step.trailing_zeros() as usize;
        let (old, new) = (x[b], -x[b]);
        let st = |v: i8| if v > 0 { 0 } else { 1 };
        logw += model.log_phi(b)[st(new)] - model.log_phi(b)[st(old)];
        for j in (0..k).filter(|&j| j != b) {
            logw += model.log_psi(b, j, new, x[j]) - model.log_psi(b, j, old, x[j]);
        }
        x[b] = new;
        visit(&x, logw);
    }
    Ok(())
}

/// Marginals of `p(x) ∝ Π_{i<j} ψ_ij(x_i, x_j) Π_i φ_i(x_i)` by exhaustive
/// summation.
pub fn exact_marginals<T: Real>(model: &MrfModel<T>) -> Result<Vec<[T; 2]>> {
    let k = model.k();
    let mut acc = vec![[T::neg_infinity(); 2]; k];
    enumerate_mrf(model, |x, logw| {
        for (a, &xi) in acc.iter_mut().zip(x) {
            let s = if xi > 0 { 0 } else { 1 };
            a[s] = log_add_exp(a[s], logw);
        }
    })?;
    Ok(acc
        .into_iter()
        .map(|[p, m]| {
            let z = log_add_exp(p, m);
            [(p - z).exp(), (m - z).exp()]
        })
        .collect())
}

/// Most probable configuration of the MRF joint; ties go to the
/// lexicographically first (`+1` first) configuration.
pub fn mrf_map<T: Real>(model: &MrfModel<T>) -> Result<Vec<i8>> {
    let mut best = vec![1i8; model.k()];
    let mut best_w = T::neg_infinity();
    enumerate_mrf(model, |x, logw| {
        if logw > best_w || (logw == best_w && lex_precedes(x, &best)) {
            best_w = logw;
            best.copy_from_slice(x);
        }
    })?;
    Ok(best)
}

/// Sign of the matched-filter output, ties to `+1`.
pub fn mf_detect<T: Real>(model: &MrfModel<T>) -> Vec<i8> {
    model
        .z()
        .iter()
        .map(|z| if z.re >= T::zero() { 1 } else { -1 })
        .collect()
}

/// `sign(Re((HᴴH + σ²I)⁻¹Hᴴy))`, ties to `+1`.
pub fn mmse_detect<T: Real + RealField>(sys: &LinearSystem<T>) -> Result<Vec<i8>> {
    let hh = sys.h.adjoint_generic();
    mmse_from_statistics(&hh * &sys.h, &hh * &sys.y, sys.sigma2)
}

/// MMSE decision from precomputed `HᴴH` and `Hᴴy`.
pub fn mmse_from_statistics<T: Real + RealField>(
    gram: DMatrix<Complex<T>>,
    matched: DVector<Complex<T>>,
    sigma2: T,
) -> Result<Vec<i8>> {
    let k = gram.nrows();
    let mut reg = gram;
    for i in 0..k {
        reg[(i, i)] += Complex::new(sigma2, T::zero());
    }
    let chol = reg.cholesky().ok_or(Error::SingularSystem)?;
    let est = chol.solve(&matched);
    Ok(est
        .iter()
        .map(|z| if z.re >= T::zero() { 1 } else { -1 })
        .collect())
}
