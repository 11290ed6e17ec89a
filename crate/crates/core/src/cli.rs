//! Command-line front end: `simulate` and `references`.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::bp::{PsiForm, Schedule};
use crate::cda_stbc::Variant;
use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::sim::output::write_manifest;
use crate::sim::{
    run_sweep, siso_awgn_ref, siso_rayleigh_ref, CodeChoice, CsvWriter, DetectorChoice, SimConfig,
    SnrSweep, Stopping,
};

#[derive(Debug, Parser)]
#[command(
    name = "stbc-bp",
    version,
    about = "BER simulation of large CDA STBCs with BP detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo BER sweep; writes a CSV and a run manifest.
    Simulate(SimulateArgs),
    /// Analytical BPSK reference curves.
    References(ReferenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeArg {
    Ill,
    Fdill,
    Vblast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorArg {
    Bp,
    Ml,
    Mmse,
    Mf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelArg {
    Iid,
    Kron,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiFormArg {
    Printed,
    RealExponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleArg {
    Serial,
    Flooding,
}

/// Flags of `simulate`. Every key may also come from `--config`; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateArgs {
    /// Key-value (TOML) file with the same keys as the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub code: Option<CodeArg>,
    /// Transmit antennas (code size for ill/fdill).
    #[arg(long)]
    pub n: Option<usize>,
    /// Receive antennas; defaults to n.
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long, value_enum)]
    pub detector: Option<DetectorArg>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long, value_enum)]
    pub psi_form: Option<PsiFormArg>,
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleArg>,
    #[arg(long, value_enum)]
    pub channel: Option<ChannelArg>,
    #[arg(long)]
    pub corr_r: Option<f64>,
    /// `start:step:stop` in dB.
    #[arg(long)]
    pub snr: Option<String>,
    /// Frame cap per SNR point.
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub target_errors: Option<u64>,
    #[arg(long)]
    #[serde(default, deserialize_with = "de_opt_u64")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores); results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn de_opt_u64<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<u64>, D::Error> {
    crate::sim::config::de_u64(d).map(Some)
}

impl SimulateArgs {
    /// Fill unset flags from `other`.
    fn or(self, other: SimulateArgs) -> SimulateArgs {
        SimulateArgs {
            config: self.config,
            code: self.code.or(other.code),
            n: self.n.or(other.n),
            nr: self.nr.or(other.nr),
            detector: self.detector.or(other.detector),
            iters: self.iters.or(other.iters),
            damping: self.damping.or(other.damping),
            psi_form: self.psi_form.or(other.psi_form),
            schedule: self.schedule.or(other.schedule),
            channel: self.channel.or(other.channel),
            corr_r: self.corr_r.or(other.corr_r),
            snr: self.snr.or(other.snr),
            frames: self.frames.or(other.frames),
            target_errors: self.target_errors.or(other.target_errors),
            seed: self.seed.or(other.seed),
            out: self.out.or(other.out),
            threads: self.threads.or(other.threads),
        }
    }

    /// Merge with the config file (if any) and build a validated [`SimConfig`].
    pub fn resolve(self) -> Result<SimConfig> {
        let merged = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                let file: SimulateArgs = toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                self.or(file)
            }
            None => self,
        };

        let n = merged.n.unwrap_or(4);
        let code = match merged.code.unwrap_or(CodeArg::Fdill) {
            CodeArg::Ill => CodeChoice::Cda {
                n,
                variant: Variant::Ill,
            },
            CodeArg::Fdill => CodeChoice::Cda {
                n,
                variant: Variant::FdIll,
            },
            CodeArg::Vblast => CodeChoice::Vblast { n_t: n },
        };
        let detector = match merged.detector.unwrap_or(DetectorArg::Bp) {
            DetectorArg::Bp => DetectorChoice::Bp {
                iters: merged.iters.unwrap_or(5),
                damping: merged.damping.unwrap_or(0.0),
                psi_form: match merged.psi_form.unwrap_or(PsiFormArg::Printed) {
                    PsiFormArg::Printed => PsiForm::Printed,
                    PsiFormArg::RealExponent => PsiForm::RealExponent,
                },
                schedule: match merged.schedule.unwrap_or(ScheduleArg::Serial) {
                    ScheduleArg::Serial => Schedule::Serial,
                    ScheduleArg::Flooding => Schedule::Flooding,
                },
            },
            DetectorArg::Ml => DetectorChoice::Ml,
            DetectorArg::Mmse => DetectorChoice::Mmse,
            DetectorArg::Mf => DetectorChoice::Mf,
        };
        let channel = match merged.channel.unwrap_or(ChannelArg::Iid) {
            ChannelArg::Iid => {
                if merged.corr_r.is_some_and(|r| r != 0.0) {
                    return Err(Error::Config("corr-r requires channel kron".into()));
                }
                ChannelModel::Iid
            }
            ChannelArg::Kron => ChannelModel::Kronecker {
                r: merged.corr_r.unwrap_or(0.0),
            },
        };
        let defaults = Stopping::default();
        let cfg = SimConfig {
            code,
            n_r: merged.nr.unwrap_or(n),
            detector,
            channel,
            snr_sweep: merged
                .snr
                .as_deref()
                .unwrap_or("0:2:10")
                .parse::<SnrSweep>()?,
            stopping: Stopping {
                max_frames: merged.frames.unwrap_or(defaults.max_frames),
                target_bit_errors: merged.target_errors.unwrap_or(defaults.target_bit_errors),
            },
            seed: merged.seed.unwrap_or(1),
            output: merged.out.unwrap_or_else(|| PathBuf::from("ber.csv")),
            threads: merged.threads.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReferenceArgs {
    /// BPSK over AWGN.
    #[arg(
        long,
        conflicts_with = "rayleigh",
        required_unless_present = "rayleigh"
    )]
    pub awgn: bool,
    /// BPSK over flat Rayleigh fading.
    #[arg(long)]
    pub rayleigh: bool,
    /// `start:step:stop` in dB.
    #[arg(long)]
    pub snr: String,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `snr_db,ber` rows of the selected reference curve.
pub fn reference_csv(args: &ReferenceArgs) -> Result<String> {
    let curve: fn(f64) -> f64 = if args.rayleigh {
        siso_rayleigh_ref
    } else {
        siso_awgn_ref
    };
    let mut out = String::from("snr_db,ber\n");
    for s in args.snr.parse::<SnrSweep>()?.grid() {
        out.push_str(&format!("{s},{:e}\n", curve(s)));
    }
    Ok(out)
}

pub fn simulate(cfg: &SimConfig, mut progress: impl Write) -> Result<()> {
    write_manifest(cfg)?;
    let mut csv = CsvWriter::create(&cfg.output)?;
    run_sweep(cfg, |r| {
        let _ = writeln!(
            progress,
            "snr {:>6.2} dB  frames {:>9}  errors {:>7}  ber {:.3e}  ({:.1} s)",
            r.snr_db, r.frames, r.bit_errors, r.ber, r.wall_time_s
        );
        csv.append(r)
    })?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(&args.resolve()?, std::io::stderr()),
        Command::References(args) => {
            let text = reference_csv(&args)?;
            match &args.out {
                Some(path) => fs::write(path, text).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                }),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}
