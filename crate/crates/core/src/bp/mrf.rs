use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cda_stbc::AdjointGeneric;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower clamp applied to edge potentials.
pub const PSI_FLOOR: f64 = 1e-12;

/// How the edge potential treats the complex Gram entry `r_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiForm {
    /// `ψ = Re(exp(−x_i r_ij x_j)) = e^{−x_i x_j Re r_ij}·cos(Im r_ij)`, clamped
    /// below at [`PSI_FLOOR`].
    #[default]
    Printed,
    /// `ψ = exp(−Re(x_i r_ij x_j)) = e^{−x_i x_j Re r_ij}`.
    RealExponent,
}

impl fmt::Display for PsiForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsiForm::Printed => "printed",
            PsiForm::RealExponent => "real-exponent",
        })
    }
}

impl FromStr for PsiForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(PsiForm::Printed),
            "real-exponent" | "real" => Ok(PsiForm::RealExponent),
            _ => Err(Error::Config(format!(
                "unknown psi form `{s}` (expected printed|real-exponent)"
            ))),
        }
    }
}

/// Uniform prior `p(x_i = ±1) = 1/2` for `k` nodes.
pub fn uniform_prior<T: Real>(k: usize) -> Vec<[T; 2]> {
    vec![[T::lit(0.5), T::lit(0.5)]; k]
}

/// Pairwise MRF for BPSK detection. State index 0 is `x = +1`, index 1 is
/// `x = −1`. Potentials are stored as logarithms.
#[derive(Debug, Clone)]
pub struct MrfModel<T: Real> {
    k: usize,
    z: DVector<Complex<T>>,
    r_mat: DMatrix<Complex<T>>,
    prior: Vec<[T; 2]>,
    log_phi: Vec<[T; 2]>,
    /// Row-major `k × k`; `[ln ψ(a, a), ln ψ(a, −a)]`.
    log_psi: Vec<[T; 2]>,
    /// `ln ψ(a, a) − ln ψ(a, −a)`, row-major `k × k`.
    coupling: Vec<T>,
    psi_form: PsiForm,
    clamp_events: usize,
}

/// Build the MRF from `(y, H, σ²)`.
pub fn build_mrf<T: Real>(
    y: &DVector<Complex<T>>,
    h: &DMatrix<Complex<T>>,
    sigma2: T,
    prior: &[[T; 2]],
    psi_form: PsiForm,
) -> Result<MrfModel<T>> {
    if y.len() != h.nrows() {
        return Err(Error::Dimension {
            what: "received vector length",
            expected: h.nrows(),
            actual: y.len(),
        });
    }
    let hh = h.adjoint_generic();
    let matched = &hh * y;
    let gram = &hh * h;
    MrfModel::from_statistics(matched, gram, sigma2, prior, psi_form)
}

impl<T: Real> MrfModel<T> {
    /// Build from the unscaled sufficient statistics `Hᴴy` and `HᴴH`.
    pub fn from_statistics(
        matched: DVector<Complex<T>>,
        gram: DMatrix<Complex<T>>,
        sigma2: T,
        prior: &[[T; 2]],
        psi_form: PsiForm,
    ) -> Result<Self> {
        let k = matched.len();
        if gram.nrows() != k || gram.ncols() != k {
            return Err(Error::Dimension {
                what: "Gram matrix order",
                expected: k,
                actual: gram.nrows(),
            });
        }
        if prior.len() != k {
            return Err(Error::Dimension {
                what: "prior rows",
                expected: k,
                actual: prior.len(),
            });
        }
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::NonPositiveNoise(sigma2.as_f64()));
        }
        for (row, p) in prior.iter().enumerate() {
            let sum = (p[0] + p[1]).as_f64();
            if (sum - 1.0).abs() > 1e-9 || p[0] < T::zero() || p[1] < T::zero() {
                return Err(Error::PriorNotNormalized { row, sum });
            }
        }

        let inv = T::one() / sigma2;
        let z = matched * Complex::new(inv, T::zero());
        let r_mat = gram * Complex::new(inv, T::zero());
        debug_assert!(is_hermitian(&r_mat), "R must be Hermitian");

        let tiny = T::min_positive_value();
        let log_phi = z
            .iter()
            .zip(prior)
            .map(|(zi, p)| [zi.re + p[0].max(tiny).ln(), -zi.re + p[1].max(tiny).ln()])
            .collect();

        let floor = T::lit(PSI_FLOOR.ln());
        let mut log_psi = vec![[T::zero(); 2]; k * k];
        let mut coupling = vec![T::zero(); k * k];
        let mut clamp_events = 0;
        for i in 0..k {
            for j in 0..i {
                // Built from the lower triangle and mirrored so ψ_ij(a,b) = ψ_ji(b,a) exactly.
                let r = r_mat[(i, j)];
                let pair = match psi_form {
                    PsiForm::RealExponent => [-r.re, r.re],
                    PsiForm::Printed => {
                        let c = r.im.cos();
                        if c > T::zero() {
                            let lc = c.ln();
                            let raw = [-r.re + lc, r.re + lc];
                            if raw[0] < floor || raw[1] < floor {
                                clamp_events += 1;
                            }
                            [raw[0].max(floor), raw[1].max(floor)]
                        } else {
                            clamp_events += 1;
                            [floor, floor]
                        }
                    }
                };
                log_psi[i * k + j] = pair;
                log_psi[j * k + i] = pair;
                coupling[i * k + j] = pair[0] - pair[1];
                coupling[j * k + i] = pair[0] - pair[1];
            }
        }

        Ok(Self {
            k,
            z,
            r_mat,
            prior: prior.to_vec(),
            log_phi,
            log_psi,
            coupling,
            psi_form,
            clamp_events,
        })
    }

    /// Number of nodes.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn z(&self) -> &DVector<Complex<T>> {
        &self.z
    }

    pub fn r_mat(&self) -> &DMatrix<Complex<T>> {
        &self.r_mat
    }

    pub fn prior(&self) -> &[[T; 2]] {
        &self.prior
    }

    pub fn psi_form(&self) -> PsiForm {
        self.psi_form
    }

    /// Number of unordered edges whose potential hit [`PSI_FLOOR`].
    pub fn clamp_events(&self) -> usize {
        self.clamp_events
    }

    /// `ln φ_i(x)` indexed by state (0 ↔ +1, 1 ↔ −1).
    #[inline]
    pub fn log_phi(&self, i: usize) -> [T; 2] {
        self.log_phi[i]
    }

    /// `φ_i(x)` for `x ∈ {+1, −1}`.
    pub fn phi(&self, i: usize, x: i8) -> T {
        self.log_phi[i][state(x)].exp()
    }

    /// `ln ψ_ij(a, b)`, `i ≠ j`.
    #[inline]
    pub fn log_psi(&self, i: usize, j: usize, a: i8, b: i8) -> T {
        let pair = self.log_psi[i * self.k + j];
        if a == b {
            pair[0]
        } else {
            pair[1]
        }
    }

    /// `ψ_ij(a, b)`, `i ≠ j`.
    pub fn psi(&self, i: usize, j: usize, a: i8, b: i8) -> T {
        self.log_psi(i, j, a, b).exp()
    }

    /// Log-likelihood ratio of the node potential, `ln φ_i(+1) − ln φ_i(−1)`.
    #[inline]
    pub(crate) fn phi_llr(&self, i: usize) -> T {
        self.log_phi[i][0] - self.log_phi[i][1]
    }

    /// `ln ψ_ij(a, a) − ln ψ_ij(a, −a)`; row-major.
    #[inline]
    pub(crate) fn coupling(&self) -> &[T] {
        &self.coupling
    }

    /// Multiply every node potential by the positive constant `c`.
    pub fn scale_node_potentials(&mut self, c: T) {
        let lc = c.ln();
        for p in &mut self.log_phi {
            p[0] += lc;
            p[1] += lc;
        }
    }
}

#[inline]
fn state(x: i8) -> usize {
    if x > 0 {
        0
    } else {
        1
    }
}

fn is_hermitian<T: Real>(m: &DMatrix<Complex<T>>) -> bool {
    let scale = m.iter().fold(T::one(), |acc, z| acc.max(z.norm()));
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0)) * scale;
    (0..m.nrows()).all(|i| (0..=i).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_channel_gives_z_equal_y() {
        let y = DVector::from_vec(vec![c(1.0, 1.0), c(-1.0, 0.0)]);
        let h = DMatrix::identity(2, 2);
        let m = build_mrf(&y, &h, 1.0, &uniform_prior(2), PsiForm::Printed).unwrap();
        assert_eq!(m.z(), &y);
        assert_eq!(m.r_mat(), &DMatrix::identity(2, 2));
        for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            assert_eq!(m.psi(0, 1, a, b), 1.0);
        }
        assert_eq!(m.clamp_events(), 0);
    }

    #[test]
    fn node_potential_example() {
        let m = MrfModel::from_statistics(
            DVector::from_vec(vec![c(0.5, 0.9)]),
            DMatrix::from_element(1, 1, c(1.0, 0.0)),
            1.0,
            &uniform_prior(1),
            PsiForm::Printed,
        )
        .unwrap();
        assert!((m.phi(0, 1) - 0.5 * 0.5f64.exp()).abs() < 1e-12);
        assert!((m.phi(0, -1) - 0.5 * (-0.5f64).exp()).abs() < 1e-12);
        assert!((m.phi(0, 1) - 0.8244).abs() < 1e-4);
        assert!((m.phi(0, -1) - 0.3033).abs() < 1e-4);
    }

    #[test]
    fn edge_potential_example() {
        let r = c(0.2, 0.3);
        let gram = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), r.conj(), r, c(1.0, 0.0)]);
        let m = MrfModel::from_statistics(
            DVector::from_vec(vec![c(0.0, 0.0); 2]),
            gram,
            1.0,
            &uniform_prior(2),
            PsiForm::Printed,
        )
        .unwrap();
        let want = (-0.2f64).exp() * 0.3f64.cos();
        assert!((m.psi(1, 0, 1, 1) - want).abs() < 1e-12);
        assert!((m.psi(1, 0, 1, 1) - 0.7822).abs() < 1e-4);
        assert!((m.psi(1, 0, 1, -1) - 0.2f64.exp() * 0.3f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn printed_form_clamps_negative_potentials() {
        let r = c(0.1, 2.0);
        let gram = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), r.conj(), r, c(1.0, 0.0)]);
        let stats = DVector::from_vec(vec![c(0.0, 0.0); 2]);
        let m = MrfModel::from_statistics(
            stats.clone(),
            gram.clone(),
            1.0,
            &uniform_prior(2),
            PsiForm::Printed,
        )
        .unwrap();
        assert_eq!(m.clamp_events(), 1);
        assert!((m.psi(0, 1, 1, 1) - PSI_FLOOR).abs() < 1e-24);
        let alt =
            MrfModel::from_statistics(stats, gram, 1.0, &uniform_prior(2), PsiForm::RealExponent)
                .unwrap();
        assert_eq!(alt.clamp_events(), 0);
        assert!((alt.psi(0, 1, 1, 1) - (-0.1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn psi_is_swap_symmetric() {
        let h = DMatrix::from_fn(5, 4, |r, cc| {
            c((r * 3 + cc) as f64 * 0.1 - 0.4, (r + 2 * cc) as f64 * 0.07)
        });
        let y = DVector::from_fn(5, |r, _| c(r as f64 * 0.3, -0.2));
        let m = build_mrf(&y, &h, 0.5, &uniform_prior(4), PsiForm::Printed).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    assert!((m.psi(i, j, a, b) - m.psi(j, i, b, a)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn construction_errors() {
        let y = DVector::from_vec(vec![c(1.0, 0.0); 2]);
        let h: DMatrix<Complex<f64>> = DMatrix::identity(2, 2);
        assert!(matches!(
            build_mrf(&y, &h, 0.0, &uniform_prior(2), PsiForm::Printed),
            Err(Error::NonPositiveNoise(_))
        ));
        assert!(matches!(
            build_mrf(
                &DVector::from_vec(vec![c(1.0, 0.0); 3]),
                &h,
                1.0,
                &uniform_prior(2),
                PsiForm::Printed
            ),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            build_mrf(&y, &h, 1.0, &[[0.5, 0.5], [0.7, 0.7]], PsiForm::Printed),
            Err(Error::PriorNotNormalized { row: 1, .. })
        ));
    }

    #[test]
    fn psi_form_parses() {
        assert_eq!("printed".parse::<PsiForm>().unwrap(), PsiForm::Printed);
        assert_eq!(
            "real-exponent".parse::<PsiForm>().unwrap(),
            PsiForm::RealExponent
        );
        assert!("other".parse::<PsiForm>().is_err());
    }
}
