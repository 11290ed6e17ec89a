use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CodeChoice, DetectorChoice, SimConfig};
use super::rng::frame_rng;
use crate::bp::{detect, uniform_prior, MrfModel};
use crate::cda_stbc::{AdjointGeneric, CodeSpec, SymbolVector};
use crate::channel::{apply_channel, ChannelConfig, ChannelSampler};
use crate::error::{Error, Result};
use crate::reference::{ml_detect, mmse_from_statistics, LinearSystem};

/// Noise variance handed to the detectors when the channel is noiseless.
pub const SIGMA2_FLOOR: f64 = 1e-9;

/// One measured point of a BER curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub wall_time_s: f64,
}

impl BerRecord {
    /// Binomial standard error of the BER estimate.
    pub fn std_error(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }
}

/// Everything a frame needs that does not change within an SNR point.
struct PointContext<'a> {
    cfg: &'a SimConfig,
    code: Option<CodeSpec<f64>>,
    sampler: ChannelSampler,
    snr_db: f64,
    /// `1/√n` for CDA codes so each transmitted entry has unit energy.
    power_scale: f64,
}

impl PointContext<'_> {
    /// Bit errors in frame `f`.
    fn run_frame(&self, f: u64) -> Result<u64> {
        let mut rng = frame_rng(self.cfg.seed, self.snr_db, f);
        let k = self.cfg.code.k();
        let bits: Vec<i8> = (0..k)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let symbols = SymbolVector::new(bits)?;

        let x = match &self.code {
            Some(code) => code.encode(&symbols)? * Complex::new(self.power_scale, 0.0),
            None => DMatrix::from_vec(k, 1, symbols.to_complex()),
        };
        let real = self.sampler.draw::<f64, _>(&mut rng);
        let y = apply_channel(&real, &x, &mut rng)?;
        let sigma2 = real.sigma2.max(SIGMA2_FLOOR);

        let decided = match self.cfg.detector {
            DetectorChoice::Ml => {
                let h = match &self.code {
                    Some(code) => code.linearize(&real.h_c)? * Complex::new(self.power_scale, 0.0),
                    None => real.h_c.clone(),
                };
                let yv = DVector::from_column_slice(y.as_slice());
                ml_detect(&LinearSystem::new(yv, h, sigma2)?)?
            }
            detector => {
                let (matched, gram) = match &self.code {
                    Some(code) => {
                        let a = self.power_scale;
                        (
                            code.linearized_matched(&real.h_c, &y)? * Complex::new(a, 0.0),
                            code.linearized_gram(&real.h_c)? * Complex::new(a * a, 0.0),
                        )
                    }
                    None => {
                        let hh = real.h_c.adjoint_generic();
                        let yv: DVector<Complex<f64>> = DVector::from_column_slice(y.as_slice());
                        (&hh * yv, &hh * &real.h_c)
                    }
                };
                match detector {
                    DetectorChoice::Mf => matched
                        .iter()
                        .map(|z| if z.re >= 0.0 { 1 } else { -1 })
                        .collect(),
                    DetectorChoice::Mmse => mmse_from_statistics(gram, matched, sigma2)?,
                    DetectorChoice::Bp { psi_form, .. } => {
                        let model = MrfModel::from_statistics(
                            matched,
                            gram,
                            sigma2,
                            &uniform_prior(k),
                            psi_form,
                        )?;
                        let bp = detector.bp_config().expect("BP detector");
                        detect(&model, &bp)?.hard
                    }
                    DetectorChoice::Ml => unreachable!(),
                }
            }
        };
        Ok(decided
            .iter()
            .zip(symbols.values())
            .filter(|(a, b)| a != b)
            .count() as u64)
    }
}

fn point_context(cfg: &SimConfig, snr_db: f64) -> Result<PointContext<'_>> {
    cfg.validate()?;
    let code = match cfg.code {
        CodeChoice::Cda { n, variant } => Some(CodeSpec::new(n, variant)?),
        CodeChoice::Vblast { .. } => None,
    };
    let sampler = ChannelSampler::new(ChannelConfig {
        n_t: cfg.code.n_t(),
        n_r: cfg.n_r,
        snr_db,
        es: 1.0,
        model: cfg.channel,
    })?;
    Ok(PointContext {
        cfg,
        code,
        sampler,
        snr_db,
        power_scale: match cfg.code {
            CodeChoice::Cda { n, .. } => 1.0 / (n as f64).sqrt(),
            CodeChoice::Vblast { .. } => 1.0,
        },
    })
}

/// Simulate frames at one SNR until `target_bit_errors` or `max_frames`,
/// whichever comes first. Frames run in parallel batches; the stop is
/// applied frame-exactly in frame order, so the record does not depend on
/// the number of workers.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<BerRecord> {
    let ctx = point_context(cfg, snr_db)?;
    let start = Instant::now();
    let k = cfg.code.k() as u64;
    let stop = cfg.stopping;
    let batch = 8 * rayon::current_num_threads() as u64;

    let (mut frames, mut errors) = (0u64, 0u64);
    'outer: while frames < stop.max_frames && errors < stop.target_bit_errors {
        let end = (frames + batch).min(stop.max_frames);
        let counts = (frames..end)
            .into_par_iter()
            .map(|f| ctx.run_frame(f))
            .collect::<Result<Vec<u64>>>()?;
        for e in counts {
            frames += 1;
            errors += e;
            if errors >= stop.target_bit_errors {
                break 'outer;
            }
        }
    }

    let bits = frames * k;
    Ok(BerRecord {
        snr_db,
        frames,
        bits,
        bit_errors: errors,
        ber: if bits == 0 {
            0.0
        } else {
            errors as f64 / bits as f64
        },
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// [`run_point`] over the SNR grid in ascending order; `on_record` sees each
/// record as soon as it is complete.
pub fn run_sweep(
    cfg: &SimConfig,
    mut on_record: impl FnMut(&BerRecord) -> Result<()>,
) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let pool = match cfg.threads {
        0 => None,
        t => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
        ),
    };
    let mut out = Vec::new();
    for snr in cfg.snr_sweep.grid() {
        let rec = match &pool {
            Some(p) => p.install(|| run_point(cfg, snr))?,
            None => run_point(cfg, snr)?,
        };
        on_record(&rec)?;
        out.push(rec);
    }
    Ok(out)
}
