use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mrf::MrfModel;
use crate::error::{Error, Result};
use crate::scalar::{log_add_exp, sigmoid, softplus, Real};

/// Node count above which one flooding round is split across threads.
const PARALLEL_THRESHOLD: usize = 128;

/// Order in which messages are refreshed within one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Nodes `j = 0, 1, …, K−1` in turn send to every neighbour, each using
    /// the messages already refreshed earlier in the same sweep.
    #[default]
    Serial,
    /// Every message is recomputed from the previous iteration's snapshot.
    Flooding,
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Schedule::Serial => "serial",
            Schedule::Flooding => "flooding",
        })
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Schedule::Serial),
            "flooding" => Ok(Schedule::Flooding),
            _ => Err(Error::Config(format!(
                "unknown schedule `{s}` (expected serial|flooding)"
            ))),
        }
    }
}

/// Iteration count, schedule and damping for [`detect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub iters: usize,
    /// Weight of the previous message in `α·m_old + (1 − α)·m_new`.
    pub damping: f64,
    #[serde(default)]
    pub schedule: Schedule,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            iters: 5,
            damping: 0.0,
            schedule: Schedule::Serial,
        }
    }
}

/// All directed messages `m_{j→i}` of a `k`-node fully connected MRF.
///
/// Each normalized binary message is stored as its log-ratio
/// `λ = ln m(+1) − ln m(−1)`; [`MessageState::message`] returns the
/// probability pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState<T: Real> {
    k: usize,
    /// Row-major `k × k`, entry `j·k + i` is the message from `j` to `i`.
    llr: Vec<T>,
    iteration: usize,
}

impl<T: Real> MessageState<T> {
    /// Uniform messages `(1/2, 1/2)`.
    pub fn uniform(k: usize) -> Self {
        Self {
            k,
            llr: vec![T::zero(); k * k],
            iteration: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// `[m_{j→i}(+1), m_{j→i}(−1)]`.
    pub fn message(&self, j: usize, i: usize) -> [T; 2] {
        let l = self.llr[j * self.k + i];
        [sigmoid(l), sigmoid(-l)]
    }

    /// Log-ratio of the message from `j` to `i`.
    pub fn message_llr(&self, j: usize, i: usize) -> T {
        self.llr[j * self.k + i]
    }

    /// Sum of incoming log-ratios plus the node evidence, per node.
    fn node_totals(&self, model: &MrfModel<T>) -> Vec<T> {
        let k = self.k;
        let mut totals: Vec<T> = (0..k).map(|i| model.phi_llr(i)).collect();
        for j in 0..k {
            let row = &self.llr[j * k..(j + 1) * k];
            for (i, (t, &l)) in totals.iter_mut().zip(row).enumerate() {
                if i != j {
                    *t += l;
                }
            }
        }
        totals
    }
}

/// One iteration of
/// `m_{j→i}(x_i) ∝ Σ_{x_j} φ_j(x_j) ψ_{ji}(x_j, x_i) Π_{l≠i} m_{l→j}(x_j)`
/// over every directed edge, in the order given by `schedule`, each message
/// optionally blended with its previous value.
pub fn iterate<T: Real>(
    model: &MrfModel<T>,
    state: &MessageState<T>,
    schedule: Schedule,
    damping: f64,
) -> Result<MessageState<T>> {
    let k = model.k();
    if state.k != k {
        return Err(Error::Dimension {
            what: "message state nodes",
            expected: k,
            actual: state.k,
        });
    }
    if !(0.0..=1.0).contains(&damping) {
        return Err(Error::Config(format!(
            "damping must lie in [0, 1], got {damping}"
        )));
    }
    if damping == 1.0 {
        return Ok(MessageState {
            iteration: state.iteration + 1,
            ..state.clone()
        });
    }
    let blend = Blend::new(damping);
    let llr = match schedule {
        Schedule::Flooding => flooding_round(model, state, &blend),
        Schedule::Serial => serial_sweep(model, state, &blend),
    };
    Ok(MessageState {
        k,
        llr,
        iteration: state.iteration + 1,
    })
}

/// New message log-ratio from the evidence at the sender (excluding the
/// receiver's contribution) and the edge coupling.
#[inline]
fn edge_message<T: Real>(delta: T, coupling: T) -> T {
    softplus(delta + coupling) - log_add_exp(delta, coupling)
}

/// Damping in the probability domain, evaluated on log-ratios.
struct Blend<T> {
    weights: Option<(T, T)>,
}

impl<T: Real> Blend<T> {
    fn new(damping: f64) -> Self {
        let weights = (damping > 0.0).then(|| (T::lit(damping.ln()), T::lit((1.0 - damping).ln())));
        Self { weights }
    }

    #[inline]
    fn apply(&self, prev: T, new: T) -> T {
        match self.weights {
            None => new,
            Some((la, lb)) => {
                let plus = log_add_exp(la - softplus(-prev), lb - softplus(-new));
                let minus = log_add_exp(la - softplus(prev), lb - softplus(new));
                plus - minus
            }
        }
    }
}

fn flooding_round<T: Real>(
    model: &MrfModel<T>,
    state: &MessageState<T>,
    blend: &Blend<T>,
) -> Vec<T> {
    let k = model.k();
    let totals = state.node_totals(model);
    let coupling = model.coupling();
    let old = &state.llr;
    let update_row = |j: usize, row: &mut [T]| {
        let cpl = &coupling[j * k..(j + 1) * k];
        for (i, out) in row.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            let delta = totals[j] - old[i * k + j];
            *out = blend.apply(old[j * k + i], edge_message(delta, cpl[i]));
        }
    };
    let mut llr = vec![T::zero(); k * k];
    if k >= PARALLEL_THRESHOLD {
        llr.par_chunks_mut(k)
            .enumerate()
            .for_each(|(j, row)| update_row(j, row));
    } else {
        llr.chunks_mut(k)
            .enumerate()
            .for_each(|(j, row)| update_row(j, row));
    }
    llr
}

fn serial_sweep<T: Real>(model: &MrfModel<T>, state: &MessageState<T>, blend: &Blend<T>) -> Vec<T> {
    let k = model.k();
    let mut totals = state.node_totals(model);
    let coupling = model.coupling();
    let mut llr = state.llr.clone();
    for j in 0..k {
        for i in 0..k {
            if i == j {
                continue;
            }
            let delta = totals[j] - llr[i * k + j];
            let prev = llr[j * k + i];
            let new = blend.apply(prev, edge_message(delta, coupling[j * k + i]));
            totals[i] += new - prev;
            llr[j * k + i] = new;
        }
    }
    llr
}

/// `b_i(x_i) ∝ φ_i(x_i) Π_j m_{j→i}(x_i)`, rows normalized.
pub fn beliefs<T: Real>(model: &MrfModel<T>, state: &MessageState<T>) -> Vec<[T; 2]> {
    state
        .node_totals(model)
        .into_iter()
        .map(|l| [sigmoid(l), sigmoid(-l)])
        .collect()
}

/// Hard and soft output of the detector.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T: Real> {
    /// `argmax_x b_i(x)`, ties resolved to `+1`.
    pub hard: Vec<i8>,
    pub beliefs: Vec<[T; 2]>,
    /// `ln b_i(+1) − ln b_i(−1)`.
    pub llr: Vec<T>,
}

/// Run `cfg.iters` iterations from uniform messages and decide once at the end.
pub fn detect<T: Real>(model: &MrfModel<T>, cfg: &BpConfig) -> Result<Detection<T>> {
    if cfg.iters == 0 {
        return Err(Error::Config("BP needs at least one iteration".into()));
    }
    let mut state = MessageState::uniform(model.k());
    for _ in 0..cfg.iters {
        state = iterate(model, &state, cfg.schedule, cfg.damping)?;
    }
    let llr = state.node_totals(model);
    let hard = llr
        .iter()
        .map(|&l| if l >= T::zero() { 1 } else { -1 })
        .collect();
    let beliefs = llr.iter().map(|&l| [sigmoid(l), sigmoid(-l)]).collect();
    Ok(Detection { hard, beliefs, llr })
}
