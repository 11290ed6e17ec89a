//! Quasi-static flat Rayleigh fading: i.i.d. or Kronecker-correlated channel
//! draws, SNR-to-noise mapping and the received-signal model `Y = H·X + N`.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Spatial structure of the fading matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelModel {
    Iid,
    /// Exponential correlation `[R]_ab = r^|a−b|` applied at both ends.
    #[serde(rename = "kron")]
    Kronecker {
        r: f64,
    },
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelModel::Iid => f.write_str("iid"),
            ChannelModel::Kronecker { r } => write!(f, "kron(r={r})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub n_t: usize,
    pub n_r: usize,
    /// Average received SNR per receive antenna, dB.
    pub snr_db: f64,
    /// Average transmitted symbol energy.
    pub es: f64,
    pub model: ChannelModel,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::Config("antenna counts must be at least 1".into()));
        }
        if !(self.es > 0.0) {
            return Err(Error::Config(format!(
                "symbol energy must be positive, got {}",
                self.es
            )));
        }
        if let ChannelModel::Kronecker { r } = self.model {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::Config(format!(
                    "correlation r must lie in [0, 1), got {r}"
                )));
            }
        }
        if self.snr_db.is_nan() {
            return Err(Error::Config("SNR is NaN".into()));
        }
        Ok(())
    }
}

/// One fading matrix together with the noise variance it is used with.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    pub h_c: DMatrix<Complex<T>>,
    pub sigma2: T,
}

/// `σ² = N_t·E_s / γ` with `γ = 10^(snr_db/10)`.
pub fn snr_to_sigma2(cfg: &ChannelConfig) -> f64 {
    cfg.n_t as f64 * cfg.es / 10f64.powf(cfg.snr_db / 10.0)
}

/// Exponential correlation matrix `[R]_ab = r^|a−b|`.
pub fn exponential_correlation(m: usize, r: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |a, b| r.powi(a.abs_diff(b) as i32))
}

/// Principal square root of a symmetric positive semi-definite matrix.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
#[inline]
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re * s), T::lit(im * s))
}

/// Channel generator with the correlation square roots precomputed.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    cfg: ChannelConfig,
    sigma2: f64,
    /// `(R_rx^{1/2}, R_tx^{1/2})`, absent for the i.i.d. model.
    shaping: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl ChannelSampler {
    pub fn new(cfg: ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        let shaping = match cfg.model {
            ChannelModel::Iid => None,
            ChannelModel::Kronecker { r } => Some((
                psd_sqrt(&exponential_correlation(cfg.n_r, r)),
                psd_sqrt(&exponential_correlation(cfg.n_t, r)),
            )),
        };
        Ok(Self {
            sigma2: snr_to_sigma2(&cfg),
            cfg,
            shaping,
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn draw<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization<T> {
        let (nr, nt) = (self.cfg.n_r, self.cfg.n_t);
        let w: DMatrix<Complex<f64>> = DMatrix::from_fn(nr, nt, |_, _| complex_gaussian(rng, 1.0));
        let h = match &self.shaping {
            None => w,
            Some((rx, tx)) => {
                let rx = rx.map(|v| Complex::new(v, 0.0));
                let tx = tx.map(|v| Complex::new(v, 0.0));
                rx * w * tx
            }
        };
        ChannelRealization {
            h_c: h.map(|z| Complex::new(T::lit(z.re), T::lit(z.im))),
            sigma2: T::lit(self.sigma2),
        }
    }
}

/// Draw one fading realization for `cfg`.
pub fn draw_channel<T: Real, R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    Ok(ChannelSampler::new(*cfg)?.draw(rng))
}

/// `H_c·X + N`, noise entries `CN(0, σ²)`.
pub fn apply_channel<T: Real, R: Rng + ?Sized>(
    real: &ChannelRealization<T>,
    x: &DMatrix<Complex<T>>,
    rng: &mut R,
) -> Result<DMatrix<Complex<T>>> {
    if x.nrows() != real.h_c.ncols() {
        return Err(Error::Dimension {
            what: "code matrix rows",
            expected: real.h_c.ncols(),
            actual: x.nrows(),
        });
    }
    let var = real.sigma2.as_f64();
    let mut y = &real.h_c * x;
    for v in y.iter_mut() {
        *v += complex_gaussian::<T, _>(rng, var);
    }
    Ok(y)
}
