//! Sample statistics and goodness-of-fit tests used by the validation suites.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Mean, unbiased sample variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

/// Welford accumulation. Variance is 0 for fewer than 2 samples.
pub fn summarize<I: IntoIterator<Item = f64>>(xs: I) -> Summary {
    let mut n = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for x in xs {
        n += 1;
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }
    let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    let std_error = if n > 0 {
        (variance / n as f64).sqrt()
    } else {
        0.0
    };
    Summary {
        n,
        mean,
        variance,
        std_error,
    }
}

impl Summary {
    /// `(mean - exact) / std_error`; zero when both the deviation and the
    /// standard error vanish.
    pub fn z_score(&self, exact: f64) -> f64 {
        z_score(self.mean, exact, self.std_error)
    }
}

pub fn z_score(empirical: f64, exact: f64, std_error: f64) -> f64 {
    let dev = empirical - exact;
    if std_error > 0.0 {
        dev / std_error
    } else if dev.abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(dev)
    }
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS statistic `d` from `n` samples (Stephens'
/// small-sample correction applied to the Kolmogorov series).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> GoodnessOfFit {
    let statistic = ks_statistic(samples, cdf);
    GoodnessOfFit {
        statistic,
        p_value: ks_p_value(statistic, samples.len()),
    }
}

/// Pearson chi-square test of observed counts against expected probabilities.
/// Cells with zero expected probability must have zero counts; they are
/// dropped from the degrees of freedom.
pub fn chi_square_test(counts: &[u64], probs: &[f64]) -> GoodnessOfFit {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            if c > 0 {
                return GoodnessOfFit {
                    statistic: f64::INFINITY,
                    p_value: 0.0,
                };
            }
            continue;
        }
        let expected = p * total as f64;
        statistic += (c as f64 - expected).powi(2) / expected;
        cells += 1;
    }
    let p_value = if cells < 2 {
        1.0
    } else {
        let dist = ChiSquared::new((cells - 1) as f64).expect("positive degrees of freedom");
        1.0 - dist.cdf(statistic)
    };
    GoodnessOfFit { statistic, p_value }
}
