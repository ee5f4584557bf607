//! `--protocol validate`: closed-form identities and Monte Carlo moment checks
//! at the configured dimension.

use dseu_core::estimators::{chi, omega};
use dseu_core::oracle::{
    expected_f_psi, haar_twirl_check, identity_chain_deviation, sampled_f_psi, swap_operator,
};
use dseu_core::qcore::{born_probabilities, born_sample, haar_state, haar_unitary};
use dseu_core::stats::{chi_square_test, ks_test, summarize};
use dseu_core::symmetric::{
    build_snapshot, kappa, sample_symmetric_povm, snapshot_inner, symmetric_projector,
};
use dseu_core::unitary_io::{from_json, to_json};
use dseu_core::SeedStream;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;
use crate::output::{self, csv_field};
use crate::run::{RunOutput, STREAM_VALIDATE};

/// Bound on |z| for Monte Carlo moment checks.
const MAX_Z: f64 = 5.0;
/// Minimum p-value for goodness-of-fit checks.
const MIN_P: f64 = 1e-3;
/// |z| bound for the largest of `entries` simultaneous moment checks.
fn max_z_bound(entries: usize) -> f64 {
    MAX_Z.max((2.0 * (2.0 * entries as f64 / MIN_P).ln()).sqrt())
}

/// Tolerance of exact identities.
const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

/// Runs every check at `d`. Each check uses its own child stream of `root`.
pub fn validation_checks(d: usize, root: &SeedStream) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let stream = |k: u64| root.child(k).rng();

    // Exact identities.
    let mut rng = stream(0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let u = haar_unitary(d, &mut rng)?;
        let v = haar_unitary(d, &mut rng)?;
        worst = worst.max(identity_chain_deviation(&u, &v, &[1, 2, 4, 8])?);
    }
    checks.push(check(
        "estimator expectations equal exact similarity",
        worst <= IDENTITY_TOL,
        format!("max deviation {worst:e} over 50 pairs, T in {{1,2,4,8}}"),
    ));

    let examples = [
        (omega(2.0 / 3.0, 2)?, 1.0),
        (omega(4.0 / 9.0, 2)?, 0.0),
        (chi(5.0 / 8.0, 2, 2)?, 1.0),
    ];
    let dev = examples.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(check(
        "estimator reference values",
        dev <= IDENTITY_TOL,
        format!("max deviation {dev:e}"),
    ));

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for t in 1..=6usize {
        if let Ok(p) = symmetric_projector(d, t) {
            worst = worst.max((p.trace() - kappa(d, t)? as f64).abs());
            worst = worst.max((&p * &p - &p).abs().max());
            cases += 1;
        }
    }
    checks.push(check(
        "symmetric projector trace and idempotency",
        worst <= 1e-10,
        format!("{cases} copy counts, max deviation {worst:e}"),
    ));

    // Haar moments.
    if d <= dseu_core::oracle::TWIRL_MAX_DIM {
        let mut a = DMatrix::<Complex64>::zeros(d, d);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        let r = haar_twirl_check(1, &a, 20_000, &mut stream(1))?;
        let bound = max_z_bound(2 * d * d);
        checks.push(check("first-moment Haar twirl", r.passes(bound), format!("{r:?}")));
        let samples = if d <= 4 { 20_000 } else { 4_000 };
        let r = haar_twirl_check(2, &swap_operator(d), samples, &mut stream(2))?;
        let bound = max_z_bound(2 * d.pow(4));
        checks.push(check("second-moment Haar twirl", r.passes(bound), format!("{r:?}")));
    }

    let mut rng = stream(3);
    let u = haar_unitary(d, &mut rng)?;
    let v = haar_unitary(d, &mut rng)?;
    let s = sampled_f_psi(&u, &v, 20_000, &mut rng)?;
    let exact = expected_f_psi(&u, &v)?;
    let z = s.z_score(exact);
    checks.push(check(
        "state-averaged overlap",
        z.abs() <= MAX_Z,
        format!("empirical {} exact {exact} z {z:.3}", s.mean),
    ));

    // Measurement samplers.
    let mut rng = stream(4);
    let psi = haar_state(d, &mut rng)?;
    let q = haar_unitary(d, &mut rng)?;
    let probs = born_probabilities(&psi, &q)?;
    let mut counts = vec![0u64; d];
    for a in born_sample(&psi, &q, 20 * d.max(1000), &mut rng)? {
        counts[a] += 1;
    }
    let t = chi_square_test(&counts, &probs);
    checks.push(check(
        "Born-rule frequencies",
        t.p_value >= MIN_P,
        format!("chi-square {:.3} p {:.4}", t.statistic, t.p_value),
    ));

    let mut rng = stream(5);
    let input = haar_state(d, &mut rng)?;
    for copies in [1usize, 2, 4] {
        let overlaps: Vec<f64> = (0..20_000)
            .map(|_| sample_symmetric_povm(&input, copies, &mut rng).map(|o| o.overlap_sq))
            .collect::<Result<_, _>>()?;
        let law = Beta::new(copies as f64 + 1.0, d as f64 - 1.0).expect("valid parameters");
        let t = ks_test(&overlaps, |x| law.cdf(x.clamp(0.0, 1.0)));
        checks.push(check(
            format!("collective outcome overlap law, T={copies}"),
            t.p_value >= MIN_P,
            format!("KS {:.5} p {:.4}", t.statistic, t.p_value),
        ));
    }

    let copies = 2usize;
    let outcomes: Vec<_> = (0..20_000)
        .map(|_| sample_symmetric_povm(&input, copies, &mut rng).map(|o| o.phi))
        .collect::<Result<_, _>>()?;
    let rho = input.projector();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let id = if i == j { 1.0 } else { 0.0 };
            let want = (Complex64::new(id, 0.0) + rho[(i, j)] * copies as f64) / (d + copies) as f64;
            let entry = |k: usize| {
                let a = outcomes[k].amplitudes();
                a[i] * a[j].conj()
            };
            let re = summarize((0..outcomes.len()).map(|k| entry(k).re));
            let im = summarize((0..outcomes.len()).map(|k| entry(k).im));
            worst = worst.max(re.z_score(want.re).abs()).max(im.z_score(want.im).abs());
        }
    }
    let bound = max_z_bound(2 * d * d);
    checks.push(check(
        "collective outcome first moment",
        worst <= bound,
        format!("max |z| {worst:.3} over {} entries (bound {bound:.2})", 2 * d * d),
    ));

    // Snapshot identities against the dense form.
    let dense_d = if d <= 8 { d } else { 3 };
    let mut rng = stream(6);
    let mut trace_dev: f64 = 0.0;
    let mut inner_dev: f64 = 0.0;
    for s in 1..=4usize {
        let x = build_snapshot(haar_state(dense_d, &mut rng)?, haar_state(dense_d, &mut rng)?, s)?;
        let y = build_snapshot(haar_state(dense_d, &mut rng)?, haar_state(dense_d, &mut rng)?, s)?;
        let (dx, dy) = (x.densify()?, y.densify()?);
        trace_dev = trace_dev.max((dx.trace() - Complex64::new(dense_d as f64, 0.0)).norm());
        let dense = dx.dotc(&dy).re;
        inner_dev = inner_dev.max((snapshot_inner(&x, &y)? - dense).abs() / dense.abs().max(1.0));
    }
    checks.push(check(
        "snapshot trace equals dimension",
        trace_dev <= 1e-10,
        format!("d={dense_d}, max deviation {trace_dev:e}"),
    ));
    checks.push(check(
        "factored snapshot pairing matches dense",
        inner_dev <= 1e-8,
        format!("d={dense_d}, max relative deviation {inner_dev:e}"),
    ));

    let u = haar_unitary(d, &mut stream(7))?;
    let round_trip = from_json(&to_json(&u))?;
    checks.push(check(
        "unitary file round trip",
        round_trip == u,
        "bit-identical after JSON write and read".into(),
    ));

    Ok(checks)
}

pub fn run_validation(config: &RunConfig) -> Result<RunOutput, CliError> {
    let root = SeedStream::new(config.seed).child(STREAM_VALIDATE);
    let checks = validation_checks(config.dim(), &root)?;
    let passed = checks.iter().all(|c| c.passed);
    let primary = match config.output_format {
        OutputFormat::Json => output::json(&json!({
            "config": config.echo(),
            "d": config.dim(),
            "passed": passed,
            "checks": checks,
        })),
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| vec![csv_field(&c.name), c.passed.to_string(), csv_field(&c.detail)])
                .collect();
            output::table(config, &["check", "passed", "detail"], &rows)
        }
    };
    let failure = (!passed).then(|| {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        failed.join("; ")
    });
    Ok(RunOutput {
        primary,
        extra_files: Vec::new(),
        failure,
    })
}
