use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bp::{BpConfig, PsiForm, Schedule};
use crate::cda_stbc::Variant;
use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::reference::ML_MAX_K;

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CodeChoice {
    /// `n × n` CDA code carrying `n²` symbols over `n` channel uses.
    Cda { n: usize, variant: Variant },
    /// Uncoded spatial multiplexing, one symbol per antenna.
    Vblast { n_t: usize },
}

impl CodeChoice {
    pub fn n_t(&self) -> usize {
        match *self {
            CodeChoice::Cda { n, .. } => n,
            CodeChoice::Vblast { n_t } => n_t,
        }
    }

    /// Symbols (= bits for BPSK) per frame.
    pub fn k(&self) -> usize {
        match *self {
            CodeChoice::Cda { n, .. } => n * n,
            CodeChoice::Vblast { n_t } => n_t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DetectorChoice {
    Bp {
        iters: usize,
        damping: f64,
        #[serde(default)]
        psi_form: PsiForm,
        #[serde(default)]
        schedule: Schedule,
    },
    Ml,
    Mmse,
    Mf,
}

impl DetectorChoice {
    /// Undamped BP with the default edge potential and schedule.
    pub fn bp(iters: usize) -> Self {
        DetectorChoice::Bp {
            iters,
            damping: 0.0,
            psi_form: PsiForm::default(),
            schedule: Schedule::default(),
        }
    }

    pub fn bp_config(&self) -> Option<BpConfig> {
        match *self {
            DetectorChoice::Bp {
                iters,
                damping,
                schedule,
                ..
            } => Some(BpConfig {
                iters,
                damping,
                schedule,
            }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DetectorChoice::Bp { .. } => "bp",
            DetectorChoice::Ml => "ml",
            DetectorChoice::Mmse => "mmse",
            DetectorChoice::Mf => "mf",
        }
    }
}

/// Inclusive SNR grid `start, start + step, …, ≤ stop` (dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrSweep {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrSweep {
    pub fn new(start_db: f64, step_db: f64, stop_db: f64) -> Self {
        Self {
            start_db,
            stop_db,
            step_db,
        }
    }

    /// Single-point grid.
    pub fn point(snr_db: f64) -> Self {
        Self::new(snr_db, 1.0, snr_db)
    }

    /// Grid values in ascending order; empty when `start > stop`.
    pub fn grid(&self) -> Vec<f64> {
        if !(self.step_db > 0.0) || self.start_db > self.stop_db {
            return Vec::new();
        }
        let tol = 1e-9 * self.step_db;
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let s = self.start_db + f64::from(i) * self.step_db;
            if s > self.stop_db + tol {
                break;
            }
            // Snap to the decimal grid so 0.1-step sweeps print cleanly.
            out.push((s * 1e9).round() / 1e9);
            i += 1;
        }
        out
    }
}

impl std::str::FromStr for SnrSweep {
    type Err = Error;

    /// `start:step:stop` or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad SNR value `{v}` in `{s}`")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [one] => Ok(Self::point(parse(one)?)),
            [a, b, c] => Ok(Self::new(parse(a)?, parse(b)?, parse(c)?)),
            _ => Err(Error::Config(format!(
                "SNR grid `{s}` must be start:step:stop"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stopping {
    pub max_frames: u64,
    pub target_bit_errors: u64,
}

impl Default for Stopping {
    fn default() -> Self {
        Self {
            max_frames: 100_000,
            target_bit_errors: 400,
        }
    }
}

/// Complete description of a Monte-Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub code: CodeChoice,
    pub n_r: usize,
    pub detector: DetectorChoice,
    pub channel: ChannelModel,
    pub snr_sweep: SnrSweep,
    pub stopping: Stopping,
    #[serde(serialize_with = "ser_u64", deserialize_with = "de_u64")]
    pub seed: u64,
    pub output: PathBuf,
    /// Worker threads, `0` = one per core. Does not affect results.
    #[serde(default)]
    pub threads: usize,
}

impl SimConfig {
    /// `n × n` FD-ILL code, `N_r = n`, BP with 5 iterations, i.i.d. fading.
    pub fn new(code: CodeChoice) -> Self {
        Self {
            n_r: code.n_t(),
            code,
            detector: DetectorChoice::bp(5),
            channel: ChannelModel::Iid,
            snr_sweep: SnrSweep::new(0.0, 2.0, 10.0),
            stopping: Stopping::default(),
            seed: 1,
            output: PathBuf::from("ber.csv"),
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.code.n_t() == 0 {
            return bad("code size must be at least 1".into());
        }
        if self.n_r == 0 {
            return bad("n_r must be at least 1".into());
        }
        if !(self.snr_sweep.step_db > 0.0) {
            return bad(format!(
                "SNR step must be positive, got {}",
                self.snr_sweep.step_db
            ));
        }
        if self.stopping.max_frames < 1 || self.stopping.target_bit_errors < 1 {
            return bad("max_frames and target_bit_errors must be at least 1".into());
        }
        if let ChannelModel::Kronecker { r } = self.channel {
            if !(0.0..1.0).contains(&r) {
                return bad(format!("correlation r must lie in [0, 1), got {r}"));
            }
        }
        match self.detector {
            DetectorChoice::Bp { iters, damping, .. } => {
                if iters < 1 {
                    return bad("BP needs at least one iteration".into());
                }
                if !(0.0..1.0).contains(&damping) {
                    return bad(format!("damping must lie in [0, 1), got {damping}"));
                }
            }
            DetectorChoice::Ml if self.code.k() > ML_MAX_K => {
                return Err(Error::EnumerationGuard {
                    detector: "ML",
                    limit: ML_MAX_K,
                    k: self.code.k(),
                });
            }
            _ => {}
        }
        Ok(())
    }
}

// TOML integers are signed; seeds above i64::MAX are written as strings.
fn ser_u64<S: Serializer>(v: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
    match i64::try_from(*v) {
        Ok(i) => s.serialize_i64(i),
        Err(_) => s.serialize_str(&v.to_string()),
    }
}

pub(crate) fn de_u64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(i) => u64::try_from(i).map_err(serde::de::Error::custom),
        Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
    }
}
