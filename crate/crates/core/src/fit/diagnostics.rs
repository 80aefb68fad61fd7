use super::spectrum::{FitProblem, FitResult};
use crate::error::Result;
use crate::model::effective_resonance;
use statrs::distribution::{ContinuousCDF, Normal};

/// Wald–Wolfowitz runs test on residual signs.
#[derive(Debug, Clone, Copy)]
pub struct RunsTest {
    pub runs: usize,
    pub expected: f64,
    pub z: f64,
    /// Two-sided p-value under the null of independent signs.
    pub p_value: f64,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// Residuals divided by their RMS.
    pub standardized: Vec<f64>,
    pub runs: RunsTest,
    /// Mean standardized residual below and above the effective resonance.
    pub low_side_mean: f64,
    pub high_side_mean: f64,
    pub flags: Vec<String>,
}

impl Diagnostics {
    pub fn flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

pub(crate) fn runs_test(residuals: &[f64]) -> RunsTest {
    let signs: Vec<bool> = residuals.iter().map(|r| *r >= 0.0).collect();
    let n_pos = signs.iter().filter(|s| **s).count() as f64;
    let n_neg = signs.len() as f64 - n_pos;
    let n = n_pos + n_neg;
    let runs = if signs.is_empty() {
        0
    } else {
        1 + signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    if n_pos == 0.0 || n_neg == 0.0 {
        return RunsTest {
            runs,
            expected: 1.0,
            z: f64::NEG_INFINITY,
            p_value: 0.0,
        };
    }
    let expected = 2.0 * n_pos * n_neg / n + 1.0;
    let var = (expected - 1.0) * (expected - 2.0) / (n - 1.0);
    let z = (runs as f64 - expected) / var.sqrt();
    let normal = Normal::standard();
    RunsTest {
        runs,
        expected,
        z,
        p_value: 2.0 * normal.cdf(-z.abs()),
    }
}

/// Looks for structure left in the residuals of a spectrum fit: sign runs
/// that are too long, and a systematic excess on one side of the resonance.
pub fn residual_diagnostics(problem: &FitProblem, result: &FitResult) -> Result<Diagnostics> {
    let res = &result.residuals;
    let rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len().max(1) as f64).sqrt();
    let standardized: Vec<f64> = if rms > 0.0 {
        res.iter().map(|r| r / rms).collect()
    } else {
        vec![0.0; res.len()]
    };
    let runs = runs_test(&standardized);
    let center = effective_resonance(&result.params)?.frequency;
    let side = |low: bool| -> (f64, usize) {
        let v: Vec<f64> = problem
            .omega
            .iter()
            .zip(&standardized)
            .filter(|(w, _)| (**w < center) == low)
            .map(|(_, r)| *r)
            .collect();
        let n = v.len();
        (v.iter().sum::<f64>() / n.max(1) as f64, n)
    };
    let (low_side_mean, n_low) = side(true);
    let (high_side_mean, n_high) = side(false);
    let mut flags = Vec::new();
    if rms > 0.0 && runs.p_value < 0.05 {
        flags.push(format!(
            "residual signs are not random: {} runs, expected {:.1} (p = {:.2e})",
            runs.runs, runs.expected, runs.p_value
        ));
    }
    for (name, mean, n) in [("low", low_side_mean, n_low), ("high", high_side_mean, n_high)] {
        if n > 0 && mean.abs() > 3.0 / (n as f64).sqrt() {
            flags.push(format!("systematic {name}-frequency-side misfit: mean standardized residual {mean:+.3}"));
        }
    }
    Ok(Diagnostics {
        standardized,
        runs,
        low_side_mean,
        high_side_mean,
        flags,
    })
}
