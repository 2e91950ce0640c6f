//! Sample summaries and the 3σ agreement gate.

use serde::Serialize;

use crate::error::{Error, Result};

/// Number of standard errors tolerated by every agreement gate.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub n_reps: u64,
    pub mean: f64,
    /// Unbiased (n−1) variance; 0 for a single sample.
    pub variance: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
}

/// Welford mean/variance in a single sequential pass.
pub fn aggregate(samples: &[f64]) -> Result<SampleStats> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let n = samples.len() as u64;
    let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    Ok(SampleStats::from_moments(n, mean, variance))
}

impl SampleStats {
    pub fn from_moments(n_reps: u64, mean: f64, variance: f64) -> Self {
        let std_error = (variance / n_reps as f64).sqrt();
        let half = 1.96 * std_error;
        Self {
            n_reps,
            mean,
            variance,
            std_error,
            ci95: (mean - half, mean + half),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementTest {
    pub observed_mean: f64,
    pub reference: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// z-test of `stats.mean` against `reference`. A zero standard error gives
/// `z = 0` on exact agreement and `z = ±∞` (fail) otherwise.
pub fn z_test(stats: &SampleStats, reference: f64) -> Result<AgreementTest> {
    if stats.n_reps < 2 {
        return Err(Error::InvalidConfig(format!(
            "z-test needs at least 2 replications, got {}",
            stats.n_reps
        )));
    }
    Ok(agreement(stats.mean, reference, stats.std_error))
}

/// Same gate from raw numbers, used where the standard error is combined
/// from several sources.
pub fn agreement(observed_mean: f64, reference: f64, std_error: f64) -> AgreementTest {
    let diff = observed_mean - reference;
    let z_score = if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    AgreementTest {
        observed_mean,
        reference,
        std_error,
        z_score,
        pass: z_score.abs() <= Z_THRESHOLD,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn small_samples() {
        let s = aggregate(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((s.mean, s.variance), (1.0, 0.0));
        let s = aggregate(&[0.0, 2.0]).unwrap();
        assert_eq!((s.mean, s.variance), (1.0, 2.0));
        assert_eq!(s.std_error, 1.0);
        assert_eq!(s.ci95, (1.0 - 1.96, 1.0 + 1.96));

        let s = aggregate(&[3.5]).unwrap();
        assert_eq!((s.n_reps, s.mean, s.variance, s.std_error), (1, 3.5, 0.0, 0.0));
        assert!(matches!(aggregate(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn seeded_uniform_mean() {
        let mut rng = stream_rng(2024, 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
        let s = aggregate(&xs).unwrap();
        let sigma = (1.0f64 / 12.0 / 1e6).sqrt();
        assert!((s.mean - 0.5).abs() < 3.0 * sigma);
        assert!((s.variance - 1.0 / 12.0).abs() < 1e-3);
    }

    #[test]
    fn z_gate() {
        let s = SampleStats::from_moments(100, 2.0, 1.0);
        let t = z_test(&s, 2.0).unwrap();
        assert_eq!(t.z_score, 0.0);
        assert!(t.pass);

        let t = z_test(&s, 2.0 - 4.0 * s.std_error).unwrap();
        assert!((t.z_score - 4.0).abs() < 1e-12);
        assert!(!t.pass);

        let zero = SampleStats::from_moments(10, 1.0, 0.0);
        assert!(z_test(&zero, 1.0).unwrap().pass);
        let t = z_test(&zero, 0.5).unwrap();
        assert!(t.z_score.is_infinite() && !t.pass);

        assert!(z_test(&SampleStats::from_moments(1, 1.0, 0.0), 1.0).is_err());
    }

    proptest! {
        #[test]
        fn permutation_and_shift_invariance(
            xs in prop::collection::vec(-1e3f64..1e3, 2..200),
            shift in -1e4f64..1e4,
            seed in any::<u64>(),
        ) {
            let base = aggregate(&xs).unwrap();

            let mut perm = xs.clone();
            let mut rng = stream_rng(seed, 0);
            for i in (1..perm.len()).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let p = aggregate(&perm).unwrap();
            prop_assert!((p.mean - base.mean).abs() <= 1e-9 * (1.0 + base.mean.abs()));
            prop_assert!((p.variance - base.variance).abs() <= 1e-9 * (1.0 + base.variance));

            let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
            let s = aggregate(&shifted).unwrap();
            // Shifting by up to 1e4 costs up to ~1e4·ε of absolute precision per entry.
            let tol = 1e-12 * base.variance.max(1.0) * (1.0 + shift.abs());
            prop_assert!((s.variance - base.variance).abs() <= tol,
                "{} vs {}", s.variance, base.variance);
        }
    }
}
