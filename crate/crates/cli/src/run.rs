use std::path::PathBuf;

use dseu_core::estimators::aggregate;
use dseu_core::oracle::exact_similarity;
use dseu_core::protocols::{
    run_distinguishing_trials, run_rounds, Device, DeviceLabel, RoundOutcome, RoundRecord,
};
use dseu_core::qcore::haar_unitary;
use dseu_core::unitary_io::{read_unitary, write_unitary};
use dseu_core::{SeedStream, UnitaryMatrix};
use serde::Serialize;
use serde_json::json;

use crate::config::{OutputFormat, ProtocolChoice, RunConfig, UnitaryMode};
use crate::error::CliError;
use crate::output::{self, csv_field, EstimateRow};
use crate::validate::run_validation;

const STREAM_UNITARY_A: u64 = 0;
const STREAM_UNITARY_B: u64 = 1;
const STREAM_ROUNDS: u64 = 2;
const STREAM_TRIALS: u64 = 3;
pub(crate) const STREAM_VALIDATE: u64 = 4;

/// Rendered results of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Main output: goes to `--output` or standard output.
    pub primary: String,
    /// Additional files (per-round CSV records, dumped unitaries).
    pub extra_files: Vec<(PathBuf, String)>,
    /// Set when a validation run found failing checks; the output is still
    /// written before exiting with status 2.
    pub failure: Option<String>,
}

impl RunOutput {
    fn primary(primary: String) -> Self {
        Self {
            primary,
            extra_files: Vec::new(),
            failure: None,
        }
    }
}

/// Executes a validated configuration and renders its output.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    if config.records
        && config.output_format == OutputFormat::Csv
        && config.output_path.is_none()
    {
        return Err(CliError::Config(
            "--records with --format csv writes a second file and needs --output".into(),
        ));
    }
    match config.protocol {
        ProtocolChoice::Validate => run_validation(config),
        ProtocolChoice::Distinguish => run_distinguish(config),
        _ if config.sweep.is_some() => run_sweep(config),
        _ => run_estimate(config),
    }
}

fn install_unitaries(config: &RunConfig, root: &SeedStream) -> Result<(UnitaryMatrix, UnitaryMatrix), CliError> {
    let d = config.dim();
    let pair = match config.unitary_mode {
        UnitaryMode::SameHaar => {
            let u = haar_unitary(d, &mut root.child(STREAM_UNITARY_A).rng())?;
            (u.clone(), u)
        }
        UnitaryMode::IndependentHaar => (
            haar_unitary(d, &mut root.child(STREAM_UNITARY_A).rng())?,
            haar_unitary(d, &mut root.child(STREAM_UNITARY_B).rng())?,
        ),
        UnitaryMode::Files => {
            let u = read_unitary(&config.unitary_files[0])?;
            let v = read_unitary(&config.unitary_files[1])?;
            for w in [&u, &v] {
                if w.dim() != d {
                    return Err(CliError::Config(format!(
                        "unitary file has dimension {}, but --qubits {} needs {d}",
                        w.dim(),
                        config.qubits
                    )));
                }
            }
            (u, v)
        }
    };
    Ok(pair)
}

struct EstimateRun {
    row: EstimateRow,
    records: Vec<RoundRecord>,
    unitaries: (UnitaryMatrix, UnitaryMatrix),
}

fn estimate_once(config: &RunConfig) -> Result<EstimateRun, CliError> {
    let protocol = config.estimator().expect("estimate protocols have an estimator");
    let root = SeedStream::new(config.seed);
    let (u, v) = install_unitaries(config, &root)?;
    let exact = exact_similarity(&u, &v)?;
    let dev_a = Device::new(DeviceLabel::A, u.clone());
    let dev_b = Device::new(DeviceLabel::B, v.clone());
    let records = run_rounds(&dev_a, &dev_b, protocol, config.rounds, &root.child(STREAM_ROUNDS))?;
    let report = aggregate(&records)?;
    if !(report.mean.is_finite() && report.std_error.is_finite()) {
        return Err(CliError::Numerical(format!(
            "non-finite estimate: mean {} std_error {}",
            report.mean, report.std_error
        )));
    }
    let row = EstimateRow {
        protocol: report.protocol.to_string(),
        d: config.dim(),
        rounds: report.rounds,
        shots_or_copies: protocol.queries_per_round(),
        seed: report.seed,
        mean: report.mean,
        std_error: report.std_error,
        per_round_variance: report.per_round_variance,
        queries_per_device: report.queries_per_device,
        clipped_mean: report.clipped_mean(),
        exact_similarity: exact,
    };
    Ok(EstimateRun {
        row,
        records,
        unitaries: (u, v),
    })
}

#[derive(Serialize)]
struct RecordView {
    round_index: u64,
    per_round_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    collision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcomes_a: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcomes_b: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    overlap: Option<f64>,
    seed_path: Vec<u64>,
}

fn record_view(r: &RoundRecord) -> RecordView {
    let mut view = RecordView {
        round_index: r.round_index,
        per_round_estimate: r.per_round_estimate,
        collision: None,
        outcomes_a: None,
        outcomes_b: None,
        overlap: None,
        seed_path: r.setting_seed.path().to_vec(),
    };
    match &r.raw {
        RoundOutcome::Incoherent {
            outcomes_a,
            outcomes_b,
            collision,
        } => {
            view.collision = Some(*collision);
            view.outcomes_a = Some(outcomes_a.clone());
            view.outcomes_b = Some(outcomes_b.clone());
        }
        RoundOutcome::Coherent { overlap, .. } => view.overlap = Some(*overlap),
        RoundOutcome::Shadow { .. } => {}
    }
    view
}

fn records_csv(config: &RunConfig, records: &[RoundRecord]) -> String {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let raw = match &r.raw {
                RoundOutcome::Incoherent { collision, .. } => collision.to_string(),
                RoundOutcome::Coherent { overlap, .. } => overlap.to_string(),
                RoundOutcome::Shadow { .. } => String::new(),
            };
            vec![r.round_index.to_string(), r.per_round_estimate.to_string(), csv_field(&raw)]
        })
        .collect();
    output::table(config, &["round_index", "per_round_estimate", "raw"], &rows)
}

fn records_path(config: &RunConfig) -> PathBuf {
    let base = config.output_path.clone().expect("checked in run()");
    let mut name = base.file_stem().unwrap_or_default().to_os_string();
    name.push(".records.csv");
    base.with_file_name(name)
}

fn dumped_unitaries(config: &RunConfig, (u, v): &(UnitaryMatrix, UnitaryMatrix)) -> Result<(), CliError> {
    if let Some(dir) = &config.dump_unitaries {
        std::fs::create_dir_all(dir)?;
        write_unitary(dir.join("a.json"), u)?;
        write_unitary(dir.join("b.json"), v)?;
    }
    Ok(())
}

fn run_estimate(config: &RunConfig) -> Result<RunOutput, CliError> {
    let run = estimate_once(config)?;
    dumped_unitaries(config, &run.unitaries)?;
    let out = match config.output_format {
        OutputFormat::Json => {
            let mut doc = json!({
                "config": config.echo(),
                "report": run.row,
            });
            if config.records {
                let views: Vec<RecordView> = run.records.iter().map(record_view).collect();
                doc["records"] = serde_json::to_value(views).expect("json");
            }
            RunOutput::primary(output::json(&doc))
        }
        OutputFormat::Csv => {
            let mut out = RunOutput::primary(output::estimate_table(config, &[run.row]));
            if config.records {
                out.extra_files
                    .push((records_path(config), records_csv(config, &run.records)));
            }
            out
        }
    };
    Ok(out)
}

fn run_sweep(config: &RunConfig) -> Result<RunOutput, CliError> {
    let sweep = config.sweep.as_ref().expect("sweep run");
    let mut rows = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let point = config.with_sweep_value(sweep.parameter, value);
        rows.push(estimate_once(&point)?.row);
    }
    let primary = match config.output_format {
        OutputFormat::Json => output::json(&json!({
            "config": config.echo(),
            "rows": rows,
        })),
        OutputFormat::Csv => output::estimate_table(config, &rows),
    };
    Ok(RunOutput::primary(primary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinguishSummary {
    pub protocol: String,
    pub d: usize,
    pub rounds: u64,
    pub shots_or_copies: usize,
    pub seed: u64,
    pub threshold: f64,
    pub trials: u64,
    pub correct: u64,
    pub success_fraction: f64,
    pub std_error: f64,
    /// Trials where the unitaries differed but "same" was declared.
    pub false_same: u64,
    /// Trials where the unitaries matched but "different" was declared.
    pub false_different: u64,
}

fn run_distinguish(config: &RunConfig) -> Result<RunOutput, CliError> {
    let protocol = config.estimator().expect("distinguish has an estimator");
    let root = SeedStream::new(config.seed);
    let outcomes = run_distinguishing_trials(
        config.dim(),
        protocol,
        config.rounds,
        config.threshold,
        config.trials,
        &root.child(STREAM_TRIALS),
    )?;
    let correct = outcomes.iter().filter(|o| o.correct()).count() as u64;
    let false_same = outcomes.iter().filter(|o| !o.same && o.declared_same).count() as u64;
    let false_different = outcomes.iter().filter(|o| o.same && !o.declared_same).count() as u64;
    let n = config.trials as f64;
    let p = correct as f64 / n;
    let summary = DistinguishSummary {
        protocol: protocol.kind().to_string(),
        d: config.dim(),
        rounds: config.rounds,
        shots_or_copies: protocol.queries_per_round(),
        seed: config.seed,
        threshold: config.threshold,
        trials: config.trials,
        correct,
        success_fraction: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        false_same,
        false_different,
    };
    let primary = match config.output_format {
        OutputFormat::Json => output::json(&json!({
            "config": config.echo(),
            "summary": summary,
        })),
        OutputFormat::Csv => output::table(
            config,
            &[
                "protocol",
                "d",
                "rounds",
                "shots_or_copies",
                "seed",
                "threshold",
                "trials",
                "correct",
                "success_fraction",
                "std_error",
            ],
            &[vec![
                summary.protocol.clone(),
                summary.d.to_string(),
                summary.rounds.to_string(),
                summary.shots_or_copies.to_string(),
                summary.seed.to_string(),
                summary.threshold.to_string(),
                summary.trials.to_string(),
                summary.correct.to_string(),
                summary.success_fraction.to_string(),
                summary.std_error.to_string(),
            ]],
        ),
    };
    Ok(RunOutput::primary(primary))
}
