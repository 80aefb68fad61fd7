use super::lm::{levenberg_marquardt, LmOptions, ParamSpace};
use crate::error::{Error, Result};
use crate::model::{self, SpectralPoint};
use crate::params::{normalize_theta, SystemParams};
use nalgebra::DMatrix;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitParameter {
    /// Probe coupling g, rad/s.
    Coupling,
    /// Homodyne angle θ, rad.
    Theta,
    /// Probe detuning Δ, rad/s.
    Detuning,
    /// Detection efficiency η_det.
    Efficiency,
}

impl FitParameter {
    pub fn name(self) -> &'static str {
        match self {
            FitParameter::Coupling => "g",
            FitParameter::Theta => "theta",
            FitParameter::Detuning => "detuning",
            FitParameter::Efficiency => "efficiency",
        }
    }

    fn space(self, sys: &SystemParams) -> ParamSpace {
        let kappa = sys.cavity.kappa();
        match self {
            FitParameter::Coupling => ParamSpace::Bounded {
                lower: 1e-12 * kappa,
                upper: f64::INFINITY,
            },
            FitParameter::Theta => ParamSpace::Periodic { period: PI },
            FitParameter::Detuning => ParamSpace::Bounded {
                lower: -(1.0 - 1e-9) * kappa,
                upper: (1.0 - 1e-9) * kappa,
            },
            FitParameter::Efficiency => ParamSpace::Bounded {
                lower: 1e-9,
                upper: 1.0,
            },
        }
    }

    fn scale(self, sys: &SystemParams, initial: f64) -> f64 {
        match self {
            FitParameter::Coupling => initial.abs().max(1e-12 * sys.cavity.kappa()),
            FitParameter::Theta | FitParameter::Efficiency => 1.0,
            FitParameter::Detuning => sys.cavity.kappa(),
        }
    }

    fn apply(self, sys: SystemParams, value: f64) -> Result<SystemParams> {
        match self {
            FitParameter::Coupling => sys.with_probe_coupling(value),
            FitParameter::Theta => sys.with_theta(value),
            FitParameter::Detuning => sys.with_probe_detuning(value),
            FitParameter::Efficiency => sys.with_efficiency(value),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FreeParameter {
    pub parameter: FitParameter,
    pub initial: f64,
}

/// A spectrum to be fitted. Parameters not listed in `free` are taken from
/// `baseline`; the homodyne angle of the model is `baseline.theta()` unless θ is free.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub omega: Vec<f64>,
    pub observed: Vec<f64>,
    pub baseline: SystemParams,
    pub free: Vec<FreeParameter>,
    pub options: LmOptions,
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub parameter: FitParameter,
    pub value: f64,
    pub sigma: f64,
    pub at_bound: bool,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub estimates: Vec<Estimate>,
    pub covariance: DMatrix<f64>,
    /// Mean squared log residual per degree of freedom.
    pub reduced_chi2: f64,
    pub cost: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// ln S_obs − ln S_model at the optimum.
    pub residuals: Vec<f64>,
    /// Baseline with the fitted values substituted.
    pub params: SystemParams,
}

impl FitResult {
    pub fn get(&self, parameter: FitParameter) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.parameter == parameter)
    }

    pub fn value(&self, parameter: FitParameter) -> Option<f64> {
        self.get(parameter).map(|e| e.value)
    }

    /// Correlation coefficient between two fitted parameters.
    pub fn correlation(&self, a: FitParameter, b: FitParameter) -> Option<f64> {
        let i = self.estimates.iter().position(|e| e.parameter == a)?;
        let j = self.estimates.iter().position(|e| e.parameter == b)?;
        let c = &self.covariance;
        Some(c[(i, j)] / (c[(i, i)] * c[(j, j)]).sqrt())
    }
}

fn substitute(baseline: SystemParams, free: &[FreeParameter], x: &[f64]) -> Result<SystemParams> {
    free.iter()
        .zip(x)
        .try_fold(baseline, |sys, (p, &v)| p.parameter.apply(sys, v))
}

fn log_residuals<M>(observed: &[f64], mut model: M, out: &mut [f64]) -> Result<()>
where
    M: FnMut(usize) -> Result<f64>,
{
    for (i, (o, r)) in observed.iter().zip(out.iter_mut()).enumerate() {
        let m = model(i)?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NonFinite(format!("model value {m} at point {i}")));
        }
        *r = o.ln() - m.ln();
    }
    Ok(())
}

fn finish(
    outcome: super::lm::LmOutcome,
    free: &[FreeParameter],
    baseline: SystemParams,
) -> Result<FitResult> {
    let n = outcome.residuals.len();
    let p = free.len();
    let dof = (n - p).max(1) as f64;
    let reduced_chi2 = outcome.cost / dof;
    let jtj = outcome.jacobian.transpose() * &outcome.jacobian;
    let inv = jtj
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("normal matrix at the optimum".into()))?;
    let covariance = inv * reduced_chi2;
    let params = substitute(baseline, free, &outcome.params)?;
    let estimates = free
        .iter()
        .enumerate()
        .map(|(k, fp)| {
            let space = fp.parameter.space(&baseline);
            let v = outcome.params[k];
            let at_bound = outcome.active[k]
                || matches!(space, ParamSpace::Bounded { lower, upper } if v <= lower || v >= upper);
            Estimate {
                parameter: fp.parameter,
                value: v,
                sigma: covariance[(k, k)].max(0.0).sqrt(),
                at_bound,
            }
        })
        .collect();
    Ok(FitResult {
        estimates,
        covariance,
        reduced_chi2,
        cost: outcome.cost,
        iterations: outcome.iterations,
        gradient_norm: outcome.gradient_norm,
        converged: outcome.converged,
        residuals: outcome.residuals,
        params,
    })
}

/// Fits the measured displacement spectrum model to `problem.observed` by
/// least squares on log residuals.
pub fn fit_spectrum(problem: &FitProblem) -> Result<FitResult> {
    let p = problem.free.len();
    let n = problem.omega.len();
    if p == 0 {
        return Err(Error::invalid("free parameters", "nothing to fit"));
    }
    if n != problem.observed.len() {
        return Err(Error::invalid("spectrum", "grid and values differ in length"));
    }
    if n < 10 * p {
        return Err(Error::invalid(
            "spectrum",
            format!("{n} points is fewer than ten per free parameter"),
        ));
    }
    if problem.observed.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("spectrum", "observed values must be finite and > 0"));
    }
    model::validate_grid(&problem.omega)?;
    let base = problem.baseline;
    let space: Vec<ParamSpace> = problem.free.iter().map(|f| f.parameter.space(&base)).collect();
    let scale: Vec<f64> = problem
        .free
        .iter()
        .map(|f| f.parameter.scale(&base, f.initial))
        .collect();
    for (f, s) in problem.free.iter().zip(&space) {
        if let ParamSpace::Bounded { lower, upper } = *s {
            if !(f.initial >= lower && f.initial <= upper) {
                return Err(Error::invalid(
                    "initial guess",
                    format!("{} = {} lies outside its bounds", f.parameter.name(), f.initial),
                ));
            }
        }
    }
    let x0: Vec<f64> = problem.free.iter().map(|f| f.initial).collect();
    let free = &problem.free;
    let outcome = levenberg_marquardt(
        |x, r| {
            let sys = substitute(base, free, x)?;
            model::check_stability(&sys)?;
            let theta = sys.theta();
            log_residuals(&problem.observed, |i| {
                Ok(SpectralPoint::new(&sys, problem.omega[i])?.total(theta))
            }, r)
        },
        &x0,
        n,
        &space,
        &scale,
        problem.options,
    )?;
    let mut result = finish(outcome, free, base)?;
    for e in result.estimates.iter_mut() {
        if e.parameter == FitParameter::Theta {
            e.value = normalize_theta(e.value);
        }
    }
    Ok(result)
}

/// Fits the detection efficiency to imprecision levels measured at several
/// homodyne angles, at analysis frequency `omega`. `shot_levels` holds
/// `(θ, S_imp)` pairs in rad and m²·s.
pub fn fit_detection_efficiency(
    shot_levels: &[(f64, f64)],
    sys: &SystemParams,
    omega: f64,
) -> Result<FitResult> {
    let mut angles: Vec<f64> = shot_levels.iter().map(|(t, _)| normalize_theta(*t)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let span = angles.last().unwrap_or(&0.0) - angles.first().unwrap_or(&0.0);
    if angles.len() < 5 || span < PI / 4.0 {
        return Err(Error::Degenerate(format!(
            "need at least 5 distinct angles spanning pi/4, got {} spanning {span:.3} rad",
            angles.len()
        )));
    }
    if shot_levels.iter().any(|(_, s)| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("shot levels", "imprecision levels must be finite and > 0"));
    }
    let observed: Vec<f64> = shot_levels.iter().map(|(_, s)| *s).collect();
    let free = [FreeParameter {
        parameter: FitParameter::Efficiency,
        initial: 0.5,
    }];
    let space = [FitParameter::Efficiency.space(sys)];
    let base = *sys;
    let outcome = levenberg_marquardt(
        |x, r| {
            let s = base.with_efficiency(x[0])?;
            log_residuals(&observed, |i| Ok(model::imprecision_spectrum(&s, shot_levels[i].0, omega)), r)
        },
        &[0.5],
        observed.len(),
        &space,
        &[1.0],
        LmOptions::default(),
    )?;
    finish(outcome, &free, base)
}
