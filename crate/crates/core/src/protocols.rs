//! Two-device protocol simulation.
//!
//! Each [`Device`] owns a secret unitary and only exposes
//! prepare-query-measure operations. The protocol drivers here see nothing but
//! classical outcomes, which keeps the simulation within local operations and
//! classical communication.
//!
//! Randomness for round `t` of a protocol is drawn from the stream
//! `root / protocol-tag / t / role`, where the role is one of [`Role`]. A
//! shared-randomness level is purely a choice of which role streams the two
//! devices read their settings from.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_same_dim, Error, Result};
use crate::estimators::{aggregate, chi, collision_overlap, omega, EstimateReport};
use crate::qcore::{born_sample, haar_state, haar_unitary, PureState, SeedStream, UnitaryMatrix};
use crate::symmetric::{build_snapshot, sample_symmetric_povm, snapshot_inner, FactoredSnapshot, SymmetricPovmOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeviceLabel {
    A,
    B,
}

/// A simulated quantum device holding a secret unitary channel.
///
/// The secret cannot be read back:
///
/// ```compile_fail
/// use dseu_core::protocols::{Device, DeviceLabel};
/// use dseu_core::UnitaryMatrix;
/// let dev = Device::new(DeviceLabel::A, UnitaryMatrix::identity(2).unwrap());
/// let leaked = dev.secret;
/// ```
#[derive(Debug, Clone)]
pub struct Device {
    label: DeviceLabel,
    secret: UnitaryMatrix,
}

impl Device {
    pub fn new(label: DeviceLabel, secret: UnitaryMatrix) -> Self {
        Self { label, secret }
    }

    pub fn label(&self) -> DeviceLabel {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.secret.dim()
    }

    /// Prepares `psi` `shots` times, sends each copy through the channel once
    /// and measures it in the basis `{Q^dag |a><a| Q}`.
    pub fn measure_in_basis<R: Rng + ?Sized>(
        &self,
        psi: &PureState,
        basis: &UnitaryMatrix,
        shots: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        let out = self.secret.apply(psi)?;
        born_sample(&out, basis, shots, rng)
    }

    /// Prepares `psi^{(x) T}`, queries the channel on every copy and applies
    /// the symmetric collective measurement.
    pub fn measure_collective<R: Rng + ?Sized>(
        &self,
        psi: &PureState,
        copies: usize,
        rng: &mut R,
    ) -> Result<SymmetricPovmOutcome> {
        let out = self.secret.apply(psi)?;
        sample_symmetric_povm(&out, copies, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Incoherent,
    Coherent,
    Shadow,
}

impl ProtocolKind {
    fn tag(self) -> u64 {
        match self {
            ProtocolKind::Incoherent => 1,
            ProtocolKind::Coherent => 2,
            ProtocolKind::Shadow => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ProtocolKind::Incoherent => "incoherent",
            ProtocolKind::Coherent => "coherent",
            ProtocolKind::Shadow => "shadow",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A protocol together with its per-round query parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "lowercase")]
pub enum Protocol {
    /// Single-copy measurements in a shared random basis, `shots` per device.
    Incoherent { shots: usize },
    /// Symmetric collective measurement on `copies` channel outputs.
    Coherent { copies: usize },
    /// Independent classical snapshots, each from `copies` channel outputs.
    Shadow { copies: usize },
}

impl Protocol {
    pub fn kind(&self) -> ProtocolKind {
        match self {
            Protocol::Incoherent { .. } => ProtocolKind::Incoherent,
            Protocol::Coherent { .. } => ProtocolKind::Coherent,
            Protocol::Shadow { .. } => ProtocolKind::Shadow,
        }
    }

    /// Channel queries each device spends per round.
    pub fn queries_per_round(&self) -> usize {
        match *self {
            Protocol::Incoherent { shots } => shots,
            Protocol::Coherent { copies } | Protocol::Shadow { copies } => copies,
        }
    }

    /// The shared-randomness level the protocol is designed for.
    pub fn natural_level(&self) -> SharedRandomness {
        match self {
            Protocol::Incoherent { .. } => SharedRandomness::SpamShared,
            Protocol::Coherent { .. } => SharedRandomness::PrepShared,
            Protocol::Shadow { .. } => SharedRandomness::None,
        }
    }

    /// Rejects zero shots or copies.
    pub fn validate(&self) -> Result<()> {
        if self.queries_per_round() == 0 {
            return Err(Error::InvalidArgument(format!(
                "{} protocol needs at least one query per round",
                self.kind()
            )));
        }
        Ok(())
    }
}

/// Which SPAM settings the two devices draw from common randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharedRandomness {
    /// Input state and measurement setting are shared.
    SpamShared,
    /// Only the input state is shared.
    PrepShared,
    /// Nothing is shared.
    None,
}

impl SharedRandomness {
    fn name(self) -> &'static str {
        match self {
            SharedRandomness::SpamShared => "spam_shared",
            SharedRandomness::PrepShared => "prep_shared",
            SharedRandomness::None => "none",
        }
    }
}

/// Role tags, the last element of every per-round seed path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    SharedPrep = 0,
    SharedMeas = 1,
    DevALocal = 2,
    DevBLocal = 3,
    DevAMeasNoise = 4,
    DevBMeasNoise = 5,
}

/// Sub-tags under a device's local role stream.
const LOCAL_PREP: u64 = 0;
const LOCAL_MEAS: u64 = 1;

/// Seed streams one device reads during one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceStreams {
    /// Input state preparation.
    pub prep: SeedStream,
    /// Measurement setting (the random basis rotation).
    pub meas_setting: SeedStream,
    /// Intrinsic measurement randomness: outcome sampling. Never shared.
    pub meas_noise: SeedStream,
}

/// Stream of round `round_index` of `kind` under `root`.
pub fn round_stream(root: &SeedStream, kind: ProtocolKind, round_index: u64) -> SeedStream {
    root.derive(&[kind.tag(), round_index])
}

/// Per-device settings streams for one round at a given sharing level.
pub fn device_streams(level: SharedRandomness, round: &SeedStream) -> [DeviceStreams; 2] {
    let make = |local: Role, noise: Role| {
        let local = round.child(local as u64);
        let prep = match level {
            SharedRandomness::SpamShared | SharedRandomness::PrepShared => {
                round.child(Role::SharedPrep as u64)
            }
            SharedRandomness::None => local.child(LOCAL_PREP),
        };
        let meas_setting = match level {
            SharedRandomness::SpamShared => round.child(Role::SharedMeas as u64),
            _ => local.child(LOCAL_MEAS),
        };
        DeviceStreams {
            prep,
            meas_setting,
            meas_noise: round.child(noise as u64),
        }
    };
    [
        make(Role::DevALocal, Role::DevAMeasNoise),
        make(Role::DevBLocal, Role::DevBMeasNoise),
    ]
}

/// Input state and measurement rotation one device uses in a round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSettings {
    pub psi: PureState,
    pub basis: UnitaryMatrix,
}

/// Realizes both devices' SPAM settings for a round.
pub fn realize_settings(
    level: SharedRandomness,
    round: &SeedStream,
    dim: usize,
) -> Result<[RoundSettings; 2]> {
    let [a, b] = device_streams(level, round);
    let realize = |s: &DeviceStreams| -> Result<RoundSettings> {
        Ok(RoundSettings {
            psi: haar_state(dim, &mut s.prep.rng())?,
            basis: haar_unitary(dim, &mut s.meas_setting.rng())?,
        })
    };
    Ok([realize(&a)?, realize(&b)?])
}

/// Raw classical data produced by one round.
#[derive(Debug, Clone, PartialEq)]
pub enum RoundOutcome {
    Incoherent {
        outcomes_a: Vec<usize>,
        outcomes_b: Vec<usize>,
        collision: f64,
    },
    Coherent {
        overlap: f64,
        copies: usize,
    },
    Shadow {
        snapshot_a: FactoredSnapshot,
        snapshot_b: FactoredSnapshot,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round_index: u64,
    pub protocol: ProtocolKind,
    /// Stream the round's settings were derived from.
    pub setting_seed: SeedStream,
    pub raw: RoundOutcome,
    /// Unbiased single-round estimate of the similarity. For shadow rounds
    /// this is the same-round term `tr[X_t^dag Y_t] / d^2`.
    pub per_round_estimate: f64,
    pub queries_per_device: u64,
}

fn check_devices(a: &Device, b: &Device) -> Result<usize> {
    check_same_dim(a.dim(), b.dim())?;
    Ok(a.dim())
}

fn reject_level(level: SharedRandomness, protocol: ProtocolKind) -> Error {
    Error::InvalidSharedRandomness {
        level: level.name(),
        protocol: protocol.name(),
    }
}

/// One round of the incoherent protocol: shared random input and basis,
/// `shots` single-copy measurements per device, collision statistic and its
/// debiased affine transform.
pub fn run_incoherent_round(
    dev_a: &Device,
    dev_b: &Device,
    shots: usize,
    level: SharedRandomness,
    root: &SeedStream,
    round_index: u64,
) -> Result<RoundRecord> {
    let dim = check_devices(dev_a, dev_b)?;
    if level != SharedRandomness::SpamShared {
        return Err(reject_level(level, ProtocolKind::Incoherent));
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shot count must be at least 1".into()));
    }
    let round = round_stream(root, ProtocolKind::Incoherent, round_index);
    let [settings_a, settings_b] = realize_settings(level, &round, dim)?;
    let [streams_a, streams_b] = device_streams(level, &round);

    let outcomes_a = dev_a.measure_in_basis(
        &settings_a.psi,
        &settings_a.basis,
        shots,
        &mut streams_a.meas_noise.rng(),
    )?;
    let outcomes_b = dev_b.measure_in_basis(
        &settings_b.psi,
        &settings_b.basis,
        shots,
        &mut streams_b.meas_noise.rng(),
    )?;
    let collision = collision_overlap(&outcomes_a, &outcomes_b)?;
    let estimate = omega(collision, dim)?;
    Ok(RoundRecord {
        round_index,
        protocol: ProtocolKind::Incoherent,
        setting_seed: round,
        raw: RoundOutcome::Incoherent {
            outcomes_a,
            outcomes_b,
            collision,
        },
        per_round_estimate: estimate,
        queries_per_device: shots as u64,
    })
}

/// One round of the coherent protocol: shared random input, `copies` channel
/// queries per device feeding one symmetric collective measurement, overlap of
/// the two outcome states.
pub fn run_coherent_round(
    dev_a: &Device,
    dev_b: &Device,
    copies: usize,
    level: SharedRandomness,
    root: &SeedStream,
    round_index: u64,
) -> Result<RoundRecord> {
    let dim = check_devices(dev_a, dev_b)?;
    if level == SharedRandomness::None {
        return Err(reject_level(level, ProtocolKind::Coherent));
    }
    let round = round_stream(root, ProtocolKind::Coherent, round_index);
    let [streams_a, streams_b] = device_streams(level, &round);
    let psi_a = haar_state(dim, &mut streams_a.prep.rng())?;
    let psi_b = haar_state(dim, &mut streams_b.prep.rng())?;

    let phi_a = dev_a.measure_collective(&psi_a, copies, &mut streams_a.meas_noise.rng())?;
    let phi_b = dev_b.measure_collective(&psi_b, copies, &mut streams_b.meas_noise.rng())?;
    let overlap = phi_a.phi.overlap_sq(&phi_b.phi)?.clamp(0.0, 1.0);
    let estimate = chi(overlap, copies, dim)?;
    Ok(RoundRecord {
        round_index,
        protocol: ProtocolKind::Coherent,
        setting_seed: round,
        raw: RoundOutcome::Coherent { overlap, copies },
        per_round_estimate: estimate,
        queries_per_device: copies as u64,
    })
}

/// One round of the independent classical-shadow protocol: every device
/// prepares its own random input, queries its channel on `copies` copies and
/// records a factored snapshot.
pub fn run_shadow_round(
    dev_a: &Device,
    dev_b: &Device,
    copies: usize,
    root: &SeedStream,
    round_index: u64,
) -> Result<RoundRecord> {
    let dim = check_devices(dev_a, dev_b)?;
    let level = SharedRandomness::None;
    let round = round_stream(root, ProtocolKind::Shadow, round_index);
    let [streams_a, streams_b] = device_streams(level, &round);

    let snapshot = |dev: &Device, streams: &DeviceStreams| -> Result<FactoredSnapshot> {
        let psi = haar_state(dim, &mut streams.prep.rng())?;
        let outcome = dev.measure_collective(&psi, copies, &mut streams.meas_noise.rng())?;
        build_snapshot(outcome.phi, psi, copies)
    };
    let snapshot_a = snapshot(dev_a, &streams_a)?;
    let snapshot_b = snapshot(dev_b, &streams_b)?;
    let estimate = snapshot_inner(&snapshot_a, &snapshot_b)? / (dim * dim) as f64;
    Ok(RoundRecord {
        round_index,
        protocol: ProtocolKind::Shadow,
        setting_seed: round,
        raw: RoundOutcome::Shadow {
            snapshot_a,
            snapshot_b,
        },
        per_round_estimate: estimate,
        queries_per_device: copies as u64,
    })
}

/// Runs one round of `protocol` at its natural sharing level.
pub fn run_round(
    dev_a: &Device,
    dev_b: &Device,
    protocol: Protocol,
    root: &SeedStream,
    round_index: u64,
) -> Result<RoundRecord> {
    protocol.validate()?;
    let level = protocol.natural_level();
    match protocol {
        Protocol::Incoherent { shots } => {
            run_incoherent_round(dev_a, dev_b, shots, level, root, round_index)
        }
        Protocol::Coherent { copies } => {
            run_coherent_round(dev_a, dev_b, copies, level, root, round_index)
        }
        Protocol::Shadow { copies } => run_shadow_round(dev_a, dev_b, copies, root, round_index),
    }
}

/// Runs rounds `0..rounds` in parallel. The result is ordered by round index
/// and does not depend on the number of worker threads.
pub fn run_rounds(
    dev_a: &Device,
    dev_b: &Device,
    protocol: Protocol,
    rounds: u64,
    root: &SeedStream,
) -> Result<Vec<RoundRecord>> {
    protocol.validate()?;
    check_devices(dev_a, dev_b)?;
    (0..rounds)
        .into_par_iter()
        .map(|t| run_round(dev_a, dev_b, protocol, root, t))
        .collect()
}

/// Runs `rounds` rounds and aggregates them.
pub fn estimate(
    dev_a: &Device,
    dev_b: &Device,
    protocol: Protocol,
    rounds: u64,
    root: &SeedStream,
) -> Result<EstimateReport> {
    aggregate(&run_rounds(dev_a, dev_b, protocol, rounds, root)?)
}

/// Result of one hypothesis-testing trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Ground truth: both devices hold the same unitary.
    pub same: bool,
    pub declared_same: bool,
    pub estimate: f64,
}

impl TrialOutcome {
    pub fn correct(&self) -> bool {
        self.same == self.declared_same
    }
}

const TRIAL_COIN: u64 = 0;
const TRIAL_UNITARY_A: u64 = 1;
const TRIAL_UNITARY_B: u64 = 2;
const TRIAL_ROUNDS: u64 = 3;

/// Tells apart "both devices hold the same Haar unitary" from "the devices
/// hold independent Haar unitaries".
///
/// A fair coin picks the case, the chosen protocol runs for `budget` rounds,
/// and the devices declare "same" iff the estimate reaches `threshold`.
pub fn run_distinguishing_trial(
    dim: usize,
    protocol: Protocol,
    budget: u64,
    threshold: f64,
    stream: &SeedStream,
) -> Result<TrialOutcome> {
    protocol.validate()?;
    if budget == 0 {
        return Err(Error::InvalidArgument("round budget must be at least 1".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} must lie in (0, 1)"
        )));
    }
    let same = stream.child(TRIAL_COIN).rng().random::<bool>();
    let u = haar_unitary(dim, &mut stream.child(TRIAL_UNITARY_A).rng())?;
    let v = if same {
        u.clone()
    } else {
        haar_unitary(dim, &mut stream.child(TRIAL_UNITARY_B).rng())?
    };
    let dev_a = Device::new(DeviceLabel::A, u);
    let dev_b = Device::new(DeviceLabel::B, v);
    let records = run_rounds(&dev_a, &dev_b, protocol, budget, &stream.child(TRIAL_ROUNDS))?;
    let estimate = if records.len() >= 2 {
        aggregate(&records)?.mean
    } else {
        records[0].per_round_estimate
    };
    Ok(TrialOutcome {
        same,
        declared_same: estimate >= threshold,
        estimate,
    })
}

/// Runs `trials` independent distinguishing trials, trial `k` on stream
/// `root / k`.
pub fn run_distinguishing_trials(
    dim: usize,
    protocol: Protocol,
    budget: u64,
    threshold: f64,
    trials: u64,
    root: &SeedStream,
) -> Result<Vec<TrialOutcome>> {
    (0..trials)
        .into_par_iter()
        .map(|k| run_distinguishing_trial(dim, protocol, budget, threshold, &root.child(k)))
        .collect()
}
