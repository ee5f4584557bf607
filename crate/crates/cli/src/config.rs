use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use dseu_core::protocols::Protocol;
use dseu_core::symmetric::kappa;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MAX_QUBITS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolChoice {
    Incoherent,
    Coherent,
    Shadow,
    Distinguish,
    Validate,
}

/// Protocols that produce similarity estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Incoherent,
    Coherent,
    Shadow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitaryMode {
    SameHaar,
    IndependentHaar,
    Files,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Shots per round: a fixed count or `auto` for `ceil(sqrt(d))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shots {
    Fixed(usize),
    Auto,
}

impl Shots {
    pub fn resolve(self, dim: usize) -> usize {
        match self {
            Shots::Fixed(n) => n,
            Shots::Auto => (dim as f64).sqrt().ceil() as usize,
        }
    }
}

impl FromStr for Shots {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Shots::Auto);
        }
        s.parse()
            .map(Shots::Fixed)
            .map_err(|_| format!("expected a positive integer or 'auto', got '{s}'"))
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Fixed(n) => write!(f, "{n}"),
            Shots::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Qubits,
    Shots,
    Copies,
    Rounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<u64>,
}

impl FromStr for Sweep {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| format!("sweep must look like 'qubits=1,2,3', got '{s}'"))?;
        let parameter = SweepParameter::from_str(name.trim(), true)
            .map_err(|_| format!("unknown sweep parameter '{name}' (qubits, shots, copies, rounds)"))?;
        let values = list
            .split(',')
            .map(|v| v.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("bad sweep value in '{list}': {e}"))?;
        if values.is_empty() {
            return Err("sweep needs at least one value".into());
        }
        Ok(Sweep { parameter, values })
    }
}

/// Command-line surface. Parsed into a [`RunConfig`].
#[derive(Debug, Parser)]
#[command(name = "dseu", version, about = "Distributed similarity estimation of unitary channels")]
pub struct Cli {
    #[arg(long, value_enum)]
    pub protocol: ProtocolChoice,
    /// Number of qubits n; the dimension is d = 2^n.
    #[arg(long, default_value_t = 1)]
    pub qubits: u32,
    /// Protocol rounds per estimate.
    #[arg(long, default_value_t = 1000)]
    pub rounds: u64,
    /// Shots per device per round (incoherent), or 'auto' for ceil(sqrt(d)).
    #[arg(long, default_value = "2")]
    pub shots: Shots,
    /// Copies per collective measurement (coherent, shadow).
    #[arg(long, default_value_t = 2)]
    pub copies: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = UnitaryMode::IndependentHaar)]
    pub unitary_mode: UnitaryMode,
    /// Two unitary JSON files (device A, device B) for --unitary-mode files.
    #[arg(long, value_delimiter = ',')]
    pub unitary_files: Vec<PathBuf>,
    /// Sweep one parameter, e.g. 'qubits=1,2,3,4'.
    #[arg(long)]
    pub sweep: Option<Sweep>,
    #[arg(long = "format", value_enum, default_value_t = OutputFormat::Json)]
    pub output_format: OutputFormat,
    /// Output file; standard output when omitted.
    #[arg(long = "output")]
    pub output_path: Option<PathBuf>,
    /// Include per-round records in the output.
    #[arg(long)]
    pub records: bool,
    /// Distinguishing trials.
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    /// Declare "same" when the estimate reaches this value.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Estimator used inside distinguishing trials.
    #[arg(long, value_enum, default_value_t = EstimatorChoice::Incoherent)]
    pub trial_protocol: EstimatorChoice,
    /// Write the installed unitaries to this directory as a.json and b.json.
    #[arg(long)]
    pub dump_unitaries: Option<PathBuf>,
}

/// Effective configuration of one run, echoed verbatim into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub protocol: ProtocolChoice,
    pub qubits: u32,
    pub rounds: u64,
    pub shots: Shots,
    pub copies: usize,
    pub seed: u64,
    pub unitary_mode: UnitaryMode,
    pub unitary_files: Vec<PathBuf>,
    pub sweep: Option<Sweep>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub records: bool,
    pub trials: u64,
    pub threshold: f64,
    pub trial_protocol: EstimatorChoice,
    pub dump_unitaries: Option<PathBuf>,
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> Self {
        Self {
            protocol: c.protocol,
            qubits: c.qubits,
            rounds: c.rounds,
            shots: c.shots,
            copies: c.copies,
            seed: c.seed,
            unitary_mode: c.unitary_mode,
            unitary_files: c.unitary_files,
            sweep: c.sweep,
            output_format: c.output_format,
            output_path: c.output_path,
            records: c.records,
            trials: c.trials,
            threshold: c.threshold,
            trial_protocol: c.trial_protocol,
            dump_unitaries: c.dump_unitaries,
        }
    }
}

impl RunConfig {
    pub fn dim(&self) -> usize {
        1usize << self.qubits
    }

    /// The estimator protocol this run executes, if any.
    pub fn estimator(&self) -> Option<Protocol> {
        let kind = match self.protocol {
            ProtocolChoice::Incoherent => EstimatorChoice::Incoherent,
            ProtocolChoice::Coherent => EstimatorChoice::Coherent,
            ProtocolChoice::Shadow => EstimatorChoice::Shadow,
            ProtocolChoice::Distinguish => self.trial_protocol,
            ProtocolChoice::Validate => return None,
        };
        Some(match kind {
            EstimatorChoice::Incoherent => Protocol::Incoherent {
                shots: self.shots.resolve(self.dim()),
            },
            EstimatorChoice::Coherent => Protocol::Coherent {
                copies: self.copies,
            },
            EstimatorChoice::Shadow => Protocol::Shadow {
                copies: self.copies,
            },
        })
    }

    /// Checks every constraint, with messages that name the offending flag.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(1..=MAX_QUBITS).contains(&self.qubits) {
            return bad(format!("--qubits must be in 1..={MAX_QUBITS}, got {}", self.qubits));
        }
        if self.rounds < 2 && self.protocol != ProtocolChoice::Distinguish {
            return bad(format!("--rounds must be at least 2, got {}", self.rounds));
        }
        if self.rounds < 1 {
            return bad("--rounds must be at least 1".into());
        }
        if self.shots == Shots::Fixed(0) {
            return bad("--shots must be at least 1".into());
        }
        if self.copies == 0 {
            return bad("--copies must be at least 1".into());
        }
        if let Some(Protocol::Coherent { copies } | Protocol::Shadow { copies }) = self.estimator() {
            if kappa(self.dim(), copies).is_err() {
                return bad(format!(
                    "--copies {copies} is too large for {} qubits: the symmetric subspace dimension overflows 64 bits",
                    self.qubits
                ));
            }
        }
        if self.protocol == ProtocolChoice::Distinguish {
            if self.trials == 0 {
                return bad("--trials must be at least 1".into());
            }
            if !(self.threshold > 0.0 && self.threshold < 1.0) {
                return bad(format!("--threshold must lie in (0, 1), got {}", self.threshold));
            }
        }
        match self.unitary_mode {
            UnitaryMode::Files => {
                if self.protocol == ProtocolChoice::Distinguish {
                    return bad("distinguishing trials draw their own unitaries; drop --unitary-mode files".into());
                }
                if self.unitary_files.len() != 2 {
                    return bad(format!(
                        "--unitary-mode files needs exactly two --unitary-files (A,B), got {}",
                        self.unitary_files.len()
                    ));
                }
            }
            _ if !self.unitary_files.is_empty() => {
                return bad("--unitary-files is only used with --unitary-mode files".into());
            }
            _ => {}
        }
        if let Some(sweep) = &self.sweep {
            if matches!(self.protocol, ProtocolChoice::Distinguish | ProtocolChoice::Validate) {
                return bad("--sweep applies to incoherent, coherent and shadow runs".into());
            }
            for &v in &sweep.values {
                self.with_sweep_value(sweep.parameter, v).validate()?;
            }
        }
        Ok(())
    }

    /// Copy of this config with one parameter replaced and the sweep removed.
    pub fn with_sweep_value(&self, parameter: SweepParameter, value: u64) -> RunConfig {
        let mut c = self.clone();
        c.sweep = None;
        match parameter {
            SweepParameter::Qubits => c.qubits = value.min(u32::MAX as u64) as u32,
            SweepParameter::Shots => c.shots = Shots::Fixed(value as usize),
            SweepParameter::Copies => c.copies = value as usize,
            SweepParameter::Rounds => c.rounds = value,
        }
        c
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let mut full = vec!["dseu"];
        full.extend_from_slice(args);
        Cli::try_parse_from(full).unwrap().into()
    }

    #[test]
    fn defaults_are_valid() {
        let c = parse(&["--protocol", "incoherent"]);
        assert_eq!(c.qubits, 1);
        assert_eq!(c.threshold, 0.5);
        c.validate().unwrap();
    }

    #[test]
    fn sweep_parsing() {
        let s: Sweep = "qubits=1,2, 3".parse().unwrap();
        assert_eq!(s.parameter, SweepParameter::Qubits);
        assert_eq!(s.values, vec![1, 2, 3]);
        assert!("depth=1,2".parse::<Sweep>().is_err());
        assert!("qubits".parse::<Sweep>().is_err());
        assert!("shots=1,x".parse::<Sweep>().is_err());
    }

    #[test]
    fn shots_auto() {
        assert_eq!(Shots::Auto.resolve(16), 4);
        assert_eq!(Shots::Auto.resolve(8), 3);
        assert_eq!(Shots::Auto.resolve(2), 2);
        assert_eq!("auto".parse::<Shots>().unwrap(), Shots::Auto);
        assert!("-1".parse::<Shots>().is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        for args in [
            vec!["--protocol", "incoherent", "--qubits", "7"],
            vec!["--protocol", "incoherent", "--qubits", "0"],
            vec!["--protocol", "incoherent", "--rounds", "1"],
            vec!["--protocol", "incoherent", "--shots", "0"],
            vec!["--protocol", "coherent", "--copies", "0"],
            vec!["--protocol", "coherent", "--qubits", "6", "--copies", "200"],
            vec!["--protocol", "distinguish", "--threshold", "1.5"],
            vec!["--protocol", "incoherent", "--unitary-mode", "files"],
            vec!["--protocol", "incoherent", "--unitary-files", "a.json,b.json"],
            vec!["--protocol", "validate", "--sweep", "qubits=1,2"],
            vec!["--protocol", "incoherent", "--sweep", "qubits=1,9"],
        ] {
            let c = parse(&args);
            assert!(matches!(c.validate(), Err(CliError::Config(_))), "{args:?}");
        }
    }
}
