//! Estimates with intervals; nothing is reported as a bare point value.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A binomial-style estimate with its uncertainty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimate {
    pub count: u64,
    pub trials: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
}

impl Estimate {
    /// Normal-approximation interval with a continuity guard at the
    /// boundaries (0 or n successes use (k+½)/(n+1) for the spread).
    pub fn binomial(count: u64, trials: u64) -> Estimate {
        assert!(trials > 0, "no trials");
        let n = trials as f64;
        let p = count as f64 / n;
        let p_guard = if count == 0 || count == trials {
            (count as f64 + 0.5) / (n + 1.0)
        } else {
            p
        };
        let stderr = (p_guard * (1.0 - p_guard) / n).sqrt();
        Estimate {
            count,
            trials,
            estimate: p,
            stderr,
            ci95: (p - 1.96 * stderr, p + 1.96 * stderr),
        }
    }

    /// Mean/standard-error estimate from raw samples.
    pub fn mean_of(samples: &[f64]) -> Estimate {
        assert!(!samples.is_empty());
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let stderr = (var / n).sqrt();
        Estimate {
            count: samples.len() as u64,
            trials: samples.len() as u64,
            estimate: mean,
            stderr,
            ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
        }
    }

    /// |estimate − target| ≤ 4σ.
    pub fn within_4_sigma(&self, target: f64) -> bool {
        (self.estimate - target).abs() <= 4.0 * self.stderr
    }

    /// estimate ≤ bound + 4σ.
    pub fn below_with_4_sigma(&self, bound: f64) -> bool {
        self.estimate <= bound + 4.0 * self.stderr
    }
}

/// Named counts and estimates for one experiment.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    pub counts: BTreeMap<String, u64>,
    pub metrics: BTreeMap<String, Estimate>,
}

impl TrialStats {
    pub fn new(trials: u64) -> Self {
        TrialStats {
            trials,
            ..Default::default()
        }
    }

    pub fn bump(&mut self, key: &str) {
        *self.counts.entry(key.to_string()).or_insert(0) += 1;
    }

    pub fn add_count(&mut self, key: &str, amount: u64) {
        *self.counts.entry(key.to_string()).or_insert(0) += amount;
    }

    /// Turn a named count into a frequency estimate over all trials.
    pub fn finish_frequency(&mut self, key: &str) -> Estimate {
        let count = self.counts.get(key).copied().unwrap_or(0);
        let est = Estimate::binomial(count, self.trials);
        self.metrics.insert(key.to_string(), est.clone());
        est
    }

    pub fn insert_metric(&mut self, key: &str, est: Estimate) {
        self.metrics.insert(key.to_string(), est);
    }

    pub fn metric(&self, key: &str) -> Option<&Estimate> {
        self.metrics.get(key)
    }
}

/// Pearson chi-square statistic against expected counts.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Two-sample chi-square over shared bins (pooled-expectation form).
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> (f64, usize) {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let mut chi2 = 0.0;
    let mut dof = 0usize;
    for (&ca, &cb) in a.iter().zip(b) {
        let total = ca + cb;
        if total == 0 {
            continue;
        }
        let ea = total as f64 * na as f64 / (na + nb) as f64;
        let eb = total as f64 * nb as f64 / (na + nb) as f64;
        let da = ca as f64 - ea;
        let db = cb as f64 - eb;
        chi2 += da * da / ea + db * db / eb;
        dof += 1;
    }
    (chi2, dof.saturating_sub(1))
}

/// Upper chi-square quantile at the two-sided-4σ significance level
/// (α ≈ 6.33e-5).
pub fn chi_square_4_sigma_bound(dof: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let alpha = 2.0 * statrs::function::erf::erfc(4.0 / std::f64::consts::SQRT_2) / 2.0;
    ChiSquared::new(dof as f64)
        .expect("dof > 0")
        .inverse_cdf(1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_estimates_have_guarded_intervals() {
        let e = Estimate::binomial(0, 100);
        assert!(e.stderr > 0.0);
        let e = Estimate::binomial(50, 100);
        assert!((e.estimate - 0.5).abs() < 1e-12);
        assert!((e.stderr - 0.05).abs() < 1e-3);
        assert!(e.within_4_sigma(0.55));
        assert!(!e.within_4_sigma(0.8));
    }

    #[test]
    fn chi_square_quantile_is_sane() {
        // df = 7 at the 4σ level: between the 0.999 quantile (24.3) and 50
        let q = chi_square_4_sigma_bound(7);
        assert!(q > 24.0 && q < 50.0, "q = {q}");
    }
}
