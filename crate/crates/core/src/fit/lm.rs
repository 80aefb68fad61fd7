use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Domain of one fit parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSpace {
    /// Closed interval; steps are projected back onto it.
    Bounded { lower: f64, upper: f64 },
    /// Unconstrained during the iteration, reduced modulo `period` at the end.
    Periodic { period: f64 },
}

impl ParamSpace {
    fn project(&self, x: f64) -> f64 {
        match *self {
            ParamSpace::Bounded { lower, upper } => x.clamp(lower, upper),
            ParamSpace::Periodic { .. } => x,
        }
    }

    fn normalize(&self, x: f64) -> f64 {
        match *self {
            ParamSpace::Bounded { .. } => x,
            ParamSpace::Periodic { period } => {
                let r = x.rem_euclid(period);
                if r >= period {
                    0.0
                } else {
                    r
                }
            }
        }
    }

    fn at_lower(&self, x: f64) -> bool {
        matches!(*self, ParamSpace::Bounded { lower, .. } if x <= lower)
    }

    fn at_upper(&self, x: f64) -> bool {
        matches!(*self, ParamSpace::Bounded { upper, .. } if x >= upper)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative decrease of the cost falls below this.
    pub cost_tolerance: f64,
    /// Stop when the scaled gradient norm falls below this.
    pub gradient_tolerance: f64,
    /// Relative step of the central-difference Jacobian.
    pub diff_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cost_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            diff_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Σ r²
    pub cost: f64,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Parameters pinned at a bound by the final active set.
    pub active: Vec<bool>,
}

struct Problem<'a, F> {
    f: F,
    space: &'a [ParamSpace],
    scale: &'a [f64],
    n_res: usize,
    diff_step: f64,
}

impl<F: FnMut(&[f64], &mut [f64]) -> Result<()>> Problem<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut r = vec![0.0; self.n_res];
        (self.f)(x, &mut r)?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("residual".into()));
        }
        let cost = r.iter().map(|v| v * v).sum();
        Ok((r, cost))
    }

    fn jacobian(&mut self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut jac = DMatrix::zeros(self.n_res, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            let h = self.diff_step * x[j].abs().max(self.scale[j]);
            let (lo, hi) = match self.space[j] {
                ParamSpace::Bounded { lower, upper } => (lower, upper),
                ParamSpace::Periodic { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            };
            let (a, b) = if x[j] + h > hi {
                (x[j] - h, x[j])
            } else if x[j] - h < lo {
                (x[j], x[j] + h)
            } else {
                (x[j] - h, x[j] + h)
            };
            xp[j] = a;
            let (ra, _) = self.eval(&xp)?;
            xp[j] = b;
            let (rb, _) = self.eval(&xp)?;
            xp[j] = x[j];
            let inv = 1.0 / (b - a);
            for i in 0..self.n_res {
                jac[(i, j)] = (rb[i] - ra[i]) * inv;
            }
        }
        Ok(jac)
    }
}

/// Minimizes Σ rᵢ(x)² with a damped Gauss–Newton (Levenberg–Marquardt)
/// iteration, Marquardt diagonal scaling, numeric Jacobian and bound
/// projection with an active set.
///
/// `scale` gives a typical magnitude per parameter, used for difference
/// steps and to make the gradient test dimensionless. Residual evaluations
/// that fail are treated as rejected steps.
pub fn levenberg_marquardt<F>(
    f: F,
    x0: &[f64],
    n_residuals: usize,
    space: &[ParamSpace],
    scale: &[f64],
    options: LmOptions,
) -> Result<LmOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = x0.len();
    if n == 0 || space.len() != n || scale.len() != n {
        return Err(Error::invalid("fit", "parameter, domain and scale lists must match and be nonempty"));
    }
    if n_residuals < n {
        return Err(Error::invalid("fit", "fewer residuals than parameters"));
    }
    let mut prob = Problem {
        f,
        space,
        scale,
        n_res: n_residuals,
        diff_step: options.diff_step,
    };
    let mut x: Vec<f64> = x0.iter().zip(space).map(|(v, s)| s.project(*v)).collect();
    let (mut r, mut cost) = prob.eval(&x)?;
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut jac = prob.jacobian(&x)?;
    let mut active = vec![false; n];
    let mut grad_norm = f64::INFINITY;

    while iterations < options.max_iterations {
        iterations += 1;
        let rv = DVector::from_column_slice(&r);
        let grad = jac.transpose() * &rv;
        // a bound is active when the descent direction points out of the domain
        for j in 0..n {
            active[j] = (space[j].at_lower(x[j]) && grad[j] > 0.0)
                || (space[j].at_upper(x[j]) && grad[j] < 0.0);
        }
        grad_norm = (0..n)
            .filter(|&j| !active[j])
            .map(|j| (grad[j] * scale[j]).powi(2))
            .sum::<f64>()
            .sqrt();
        if grad_norm < options.gradient_tolerance || cost == 0.0 {
            converged = true;
            break;
        }
        let free: Vec<usize> = (0..n).filter(|&j| !active[j]).collect();
        if free.is_empty() {
            converged = true;
            break;
        }
        let jf = jac.select_columns(&free);
        let jtj = jf.transpose() * &jf;
        let g = DVector::from_iterator(free.len(), free.iter().map(|&j| grad[j]));
        let diag: Vec<f64> = (0..free.len()).map(|k| jtj[(k, k)]).collect();
        if diag.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Singular(
                "a free parameter has no influence on the residuals".into(),
            ));
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..free.len() {
                a[(k, k)] += lambda * diag[k];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut trial = x.clone();
            for (k, &j) in free.iter().enumerate() {
                trial[j] = space[j].project(x[j] + step[k]);
            }
            match prob.eval(&trial) {
                Ok((rt, ct)) if ct < cost => {
                    let rel = (cost - ct) / cost;
                    x = trial;
                    r = rt;
                    cost = ct;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    if rel < options.cost_tolerance {
                        converged = true;
                    }
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !improved {
            // no descent step at any damping: the cost is at its numerical floor
            converged = true;
        }
        jac = prob.jacobian(&x)?;
        if converged {
            break;
        }
    }
    let params = x.iter().zip(space).map(|(v, s)| s.normalize(*v)).collect();
    Ok(LmOutcome {
        params,
        residuals: r,
        cost,
        jacobian: jac,
        iterations,
        gradient_norm: grad_norm,
        converged,
        active,
    })
}
