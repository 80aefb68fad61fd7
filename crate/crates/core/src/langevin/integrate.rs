use super::state_space::{stationary_covariance, StateSpace};
use super::welch::{PsdEstimate, WelchAccumulator};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use nalgebra::{DMatrix, SMatrix, SVector, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Mat8x4 = SMatrix<f64, 8, 4>;
type Mat8 = SMatrix<f64, 8, 8>;

/// RNG stream identifiers, so every consumer of a seed draws independently.
const STREAM_DYNAMICS: u64 = 0;
const STREAM_INITIAL: u64 = 1;
const STREAM_VACUUM: u64 = 16;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Exact one-step propagator of the dimensionless model, augmented with the
/// step integrals of `X`, `Y` and of the port-2 input noises.
///
/// Augmented state: `(X, Y, x, p, ∫X, ∫Y, ∫X_in², ∫Y_in²)`; the four
/// integrals restart from zero every step, so only the first four columns of
/// the transition matrix are kept.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// Dimensionless step Ω_m·dt.
    pub step: f64,
    pub transition: Mat8x4,
    pub covariance: Mat8,
    noise_factor: Mat8,
}

impl Discretization {
    pub fn new(ss: &StateSpace, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("time step must be > 0, got {dt}")));
        }
        let h = dt * ss.mech_frequency();
        let mut a = Mat8::zeros();
        a.fixed_view_mut::<4, 4>(0, 0).copy_from(&ss.scaled_a);
        a[(4, 0)] = 1.0;
        a[(5, 1)] = 1.0;
        let mut b = SMatrix::<f64, 8, 5>::zeros();
        b.fixed_view_mut::<4, 5>(0, 0).copy_from(&ss.scaled_b);
        b[(6, 2)] = std::f64::consts::FRAC_1_SQRT_2;
        b[(7, 3)] = std::f64::consts::FRAC_1_SQRT_2;

        // Van Loan: exp([[-A, BBᵀ], [0, Aᵀ]] h) = [[·, F12], [0, Φᵀ]], Q = Φ F12
        let mut m = DMatrix::<f64>::zeros(16, 16);
        let c = b * b.transpose();
        for i in 0..8 {
            for j in 0..8 {
                m[(i, j)] = -a[(i, j)] * h;
                m[(i, 8 + j)] = c[(i, j)] * h;
                m[(8 + i, 8 + j)] = a[(j, i)] * h;
            }
        }
        let e = m.exp();
        let phi = Mat8::from_fn(|i, j| e[(8 + j, 8 + i)]);
        let f12 = Mat8::from_fn(|i, j| e[(i, 8 + j)]);
        let q = phi * f12;
        let q = 0.5 * (q + q.transpose());
        if q.iter().chain(phi.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("discrete propagator".into()));
        }
        let eig = q.symmetric_eigen();
        let mut factor = eig.eigenvectors;
        for (k, lambda) in eig.eigenvalues.iter().enumerate() {
            let s = lambda.max(0.0).sqrt();
            factor.column_mut(k).scale_mut(s);
        }
        Ok(Self {
            step: h,
            transition: phi.fixed_view::<8, 4>(0, 0).into_owned(),
            covariance: q,
            noise_factor: factor,
        })
    }

    /// Propagates `state` one step; returns the augmented vector.
    #[inline]
    pub fn advance<R: Rng>(&self, state: &Vector4<f64>, rng: &mut R) -> SVector<f64, 8> {
        let xi = SVector::<f64, 8>::from_fn(|_, _| rng.sample(StandardNormal));
        self.transition * state + self.noise_factor * xi
    }
}

/// One propagated step, in SI units.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    /// `(X, Y, x, p)` at the end of the step.
    pub state: [f64; 4],
    /// Averages of `X` and `Y` over the step.
    pub mean_x: f64,
    pub mean_y: f64,
    /// Averages of the port-2 input quadratures over the step (1/√s).
    pub input_x: f64,
    pub input_y: f64,
}

/// Stateful integrator; starts from a draw of the stationary distribution.
pub struct Simulator {
    disc: Discretization,
    state: Vector4<f64>,
    rng: ChaCha8Rng,
    zpf: f64,
    zpf_momentum: f64,
    dt: f64,
    sqrt_wm: f64,
}

impl Simulator {
    pub fn new(ss: &StateSpace, dt: f64, seed: u64) -> Result<Self> {
        let disc = Discretization::new(ss, dt)?;
        let cov = stationary_covariance(ss)?;
        let eig = cov.symmetric_eigen();
        let mut init_rng = rng(seed, STREAM_INITIAL);
        let xi = Vector4::from_fn(|_, _| init_rng.sample::<f64, _>(StandardNormal));
        let scaled = eig.eigenvalues.map(|l| l.max(0.0).sqrt()).component_mul(&(eig.eigenvectors.transpose() * xi));
        let state = eig.eigenvectors * scaled;
        Ok(Self::assemble(ss, disc, state, dt, seed))
    }

    /// Starts from a given dimensionless state instead of the stationary draw.
    pub fn from_state(ss: &StateSpace, dt: f64, seed: u64, state: [f64; 4]) -> Result<Self> {
        let disc = Discretization::new(ss, dt)?;
        Ok(Self::assemble(ss, disc, Vector4::from(state), dt, seed))
    }

    fn assemble(ss: &StateSpace, disc: Discretization, state: Vector4<f64>, dt: f64, seed: u64) -> Self {
        let osc = &ss.params.oscillator;
        Self {
            disc,
            state,
            rng: rng(seed, STREAM_DYNAMICS),
            zpf: osc.zpf(),
            zpf_momentum: osc.zpf_momentum(),
            dt,
            sqrt_wm: osc.frequency().sqrt(),
        }
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// Current dimensionless state.
    pub fn scaled_state(&self) -> [f64; 4] {
        self.state.into()
    }

    pub fn step(&mut self) -> Result<Step> {
        let z = self.disc.advance(&self.state, &mut self.rng);
        self.state = z.fixed_rows::<4>(0).into_owned();
        if !self.state.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("simulated state".into()));
        }
        let h = self.disc.step;
        // input integrals in dimensionless time → SI step averages
        let input_scale = self.sqrt_wm / h;
        Ok(Step {
            state: [
                z[0],
                z[1],
                z[2] * self.zpf,
                z[3] * self.zpf_momentum,
            ],
            mean_x: z[4] / h,
            mean_y: z[5] / h,
            input_x: z[6] * input_scale,
            input_y: z[7] * input_scale,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Homodyne photocurrent synthesis from simulated steps.
///
/// The detected quadrature is `cos θ·X_out − sin θ·Y_out` of the port-2
/// output `√κ₂·(X, Y) − (X_in², Y_in²)`, which matches the sign convention of
/// the analytic transduction. Optical loss mixes in fresh vacuum.
pub struct PhotocurrentSynth {
    cos: f64,
    sin: f64,
    sqrt_kappa2: f64,
    sqrt_eta: f64,
    vacuum_sigma: f64,
    rng: ChaCha8Rng,
}

impl PhotocurrentSynth {
    pub fn new(sys: &SystemParams, theta: f64, dt: f64, seed: u64, index: u64) -> Result<Self> {
        let eta = sys.port_efficiency();
        if eta > 1.0 + 1e-12 {
            return Err(Error::invalid(
                "efficiency",
                format!("detection efficiency exceeds the detected-port fraction (η·κ/κ₂ = {eta})"),
            ));
        }
        let eta = eta.min(1.0);
        Ok(Self {
            cos: theta.cos(),
            sin: theta.sin(),
            sqrt_kappa2: sys.cavity.kappa2().sqrt(),
            sqrt_eta: eta.sqrt(),
            vacuum_sigma: ((1.0 - eta) / (2.0 * dt)).sqrt(),
            rng: rng(seed, STREAM_VACUUM + index),
        })
    }

    #[inline]
    pub fn sample(&mut self, step: &Step) -> f64 {
        let out_x = self.sqrt_kappa2 * step.mean_x - step.input_x;
        let out_y = self.sqrt_kappa2 * step.mean_y - step.input_y;
        let signal = self.cos * out_x - self.sin * out_y;
        let vacuum: f64 = if self.vacuum_sigma > 0.0 {
            self.vacuum_sigma * self.rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        self.sqrt_eta * signal + vacuum
    }
}

/// Retained port-2 input noise, averaged per step.
#[derive(Debug, Clone, Default)]
pub struct PortInputs {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Stored simulation output. Column order for dumps: t, X, Y, x, p.
#[derive(Debug, Clone)]
pub struct TimeTrace {
    pub dt: f64,
    pub quad_x: Vec<f64>,
    pub quad_y: Vec<f64>,
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    pub inputs: Option<PortInputs>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl TimeTrace {
    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub retain_inputs: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { retain_inputs: true }
    }
}

/// Integrates for `duration` seconds with sample period `dt`.
pub fn integrate(
    ss: &StateSpace,
    duration: f64,
    dt: f64,
    seed: u64,
    options: IntegrationOptions,
) -> Result<TimeTrace> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("must be > 0, got {duration}")));
    }
    let n = (duration / dt).round() as usize;
    if n == 0 {
        return Err(Error::SeriesTooShort { len: 0, needed: 1 });
    }
    let mut warnings = Vec::new();
    let pole = crate::model::mechanical_pole(&ss.params)?;
    if duration < 10.0 / pole.damping() {
        warnings.push(format!(
            "duration {duration:.3e} s is shorter than ten mechanical decay times ({:.3e} s)",
            10.0 / pole.damping()
        ));
    }
    let mut sim = Simulator::new(ss, dt, seed)?;
    let mut trace = TimeTrace {
        dt,
        quad_x: Vec::with_capacity(n),
        quad_y: Vec::with_capacity(n),
        position: Vec::with_capacity(n),
        momentum: Vec::with_capacity(n),
        mean_x: Vec::with_capacity(n),
        mean_y: Vec::with_capacity(n),
        inputs: options.retain_inputs.then(|| PortInputs {
            x: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
        }),
        seed,
        warnings,
    };
    for _ in 0..n {
        let s = sim.step()?;
        trace.quad_x.push(s.state[0]);
        trace.quad_y.push(s.state[1]);
        trace.position.push(s.state[2]);
        trace.momentum.push(s.state[3]);
        trace.mean_x.push(s.mean_x);
        trace.mean_y.push(s.mean_y);
        if let Some(inp) = trace.inputs.as_mut() {
            inp.x.push(s.input_x);
            inp.y.push(s.input_y);
        }
    }
    Ok(trace)
}

/// Photocurrent at quadrature `theta` from a stored trace. The vacuum
/// admixture is drawn from an RNG stream derived from the trace seed.
pub fn synthesize_photocurrent(trace: &TimeTrace, sys: &SystemParams, theta: f64) -> Result<Vec<f64>> {
    let inputs = trace
        .inputs
        .as_ref()
        .ok_or_else(|| Error::MissingInput("trace was integrated without retaining port inputs".into()))?;
    let mut synth = PhotocurrentSynth::new(sys, theta, trace.dt, trace.seed, 0)?;
    Ok((0..trace.len())
        .map(|k| {
            synth.sample(&Step {
                state: [trace.quad_x[k], trace.quad_y[k], trace.position[k], trace.momentum[k]],
                mean_x: trace.mean_x[k],
                mean_y: trace.mean_y[k],
                input_x: inputs.x[k],
                input_y: inputs.y[k],
            })
        })
        .collect())
}

/// Settings for a streaming spectral run.
#[derive(Debug, Clone, Copy)]
pub struct StreamOptions {
    pub dt: f64,
    pub segment_length: usize,
    pub overlap: f64,
    pub segments: usize,
    pub seed: u64,
}

impl StreamOptions {
    /// Number of samples needed for the requested number of segments.
    pub fn samples(&self) -> usize {
        let hop = WelchAccumulator::hop_for(self.segment_length, self.overlap);
        self.segment_length + hop * self.segments.saturating_sub(1)
    }
}

/// Simulates once and estimates the photocurrent PSD for every quadrature
/// in `thetas`, without storing the time series.
pub fn simulate_photocurrent_psds(
    ss: &StateSpace,
    thetas: &[f64],
    options: StreamOptions,
) -> Result<Vec<PsdEstimate>> {
    let mut sim = Simulator::new(ss, options.dt, options.seed)?;
    let mut synths = thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| PhotocurrentSynth::new(&ss.params, t, options.dt, options.seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut accs = thetas
        .iter()
        .map(|_| WelchAccumulator::new(options.segment_length, options.overlap, options.dt))
        .collect::<Result<Vec<_>>>()?;
    for _ in 0..options.samples() {
        let s = sim.step()?;
        for (synth, acc) in synths.iter_mut().zip(accs.iter_mut()) {
            acc.push(synth.sample(&s));
        }
    }
    accs.into_iter().map(WelchAccumulator::finish).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::build_state_space;
    use crate::presets;

    fn desk() -> SystemParams {
        presets::desk_scale(17.3, 1e4).unwrap()
    }

    #[test]
    fn step_covariance_matches_quadrature_of_the_lyapunov_integrand() {
        let ss = build_state_space(&desk()).unwrap();
        let dt = 0.7 / ss.mech_frequency();
        let disc = Discretization::new(&ss, dt).unwrap();
        // midpoint quadrature of ∫ e^{As} B Bᵀ e^{Aᵀs} ds on the state block
        let h = disc.step;
        let n = 4000;
        let a = DMatrix::from_iterator(4, 4, ss.scaled_a.iter().copied());
        let b = DMatrix::from_iterator(4, 5, ss.scaled_b.iter().copied());
        let c = &b * b.transpose();
        let mut q = DMatrix::<f64>::zeros(4, 4);
        for k in 0..n {
            let s = (k as f64 + 0.5) * h / n as f64;
            let e = (&a * s).exp();
            q += &e * &c * e.transpose() * (h / n as f64);
        }
        for i in 0..4 {
            for j in 0..4 {
                let diff = (q[(i, j)] - disc.covariance[(i, j)]).abs();
                assert!(diff < 1e-6 * q[(i, i)].abs().max(q[(j, j)].abs()), "({i},{j})");
            }
        }
    }

    #[test]
    fn zero_noise_decays_to_rest() {
        let sys = desk();
        let mut ss = build_state_space(&sys).unwrap();
        ss.scaled_b = SMatrix::zeros();
        let dt = 1.0 / ss.mech_frequency();
        let mut sim = Simulator::from_state(&ss, dt, 1, [1.0, -1.0, 30.0, 5.0]).unwrap();
        for _ in 0..2_000_000 {
            sim.step().unwrap();
        }
        let z = sim.scaled_state();
        assert!(z.iter().all(|v| v.abs() < 1e-6), "{z:?}");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let ss = build_state_space(&desk()).unwrap();
        let dt = 1.0 / ss.mech_frequency();
        let opts = IntegrationOptions::default();
        let a = integrate(&ss, 2000.0 * dt, dt, 99, opts).unwrap();
        let b = integrate(&ss, 2000.0 * dt, dt, 99, opts).unwrap();
        assert_eq!(a.position, b.position);
        let pa = synthesize_photocurrent(&a, &ss.params, 0.5).unwrap();
        let pb = synthesize_photocurrent(&b, &ss.params, 0.5).unwrap();
        assert_eq!(pa, pb);
        let c = integrate(&ss, 2000.0 * dt, dt, 100, opts).unwrap();
        assert_ne!(a.position, c.position);
    }

    #[test]
    fn photocurrent_requires_retained_inputs() {
        let ss = build_state_space(&desk()).unwrap();
        let dt = 1.0 / ss.mech_frequency();
        let trace = integrate(&ss, 100.0 * dt, dt, 3, IntegrationOptions { retain_inputs: false }).unwrap();
        assert!(matches!(
            synthesize_photocurrent(&trace, &ss.params, 0.5),
            Err(Error::MissingInput(_))
        ));
    }
}
