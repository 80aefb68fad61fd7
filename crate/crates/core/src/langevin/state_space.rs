use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use nalgebra::{DMatrix, DVector, Matrix4, SMatrix};
use std::f64::consts::SQRT_2;

/// Linear stochastic model `dz/dt = A z + B ξ(t)` of the probe cavity mode
/// and the mechanical oscillator.
///
/// `z = (X, Y, x, p)` with `p = m·dx/dt`; `ξ` collects the five input
/// noises `(X_in¹, Y_in¹, X_in², Y_in², F_th)` whose symmetrized
/// intensities are stored in [`StateSpace::intensities`].
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub a: Matrix4<f64>,
    pub b: SMatrix<f64, 4, 5>,
    pub intensities: [f64; 5],
    /// Drift in units of Ω_m for the state `(X, Y, x/x_zpf, p/p_zpf)`.
    pub scaled_a: Matrix4<f64>,
    /// Noise input for unit-intensity channels in dimensionless time.
    pub scaled_b: SMatrix<f64, 4, 5>,
    pub params: SystemParams,
}

impl StateSpace {
    pub fn mech_frequency(&self) -> f64 {
        self.params.oscillator.frequency()
    }

    /// `(X, Y, x, p)` in SI from the dimensionless state.
    pub fn unscale(&self, z: &[f64; 4]) -> [f64; 4] {
        let osc = &self.params.oscillator;
        [z[0], z[1], z[2] * osc.zpf(), z[3] * osc.zpf_momentum()]
    }
}

/// Assembles the drift and noise matrices and checks that the dynamics decay.
pub fn build_state_space(sys: &SystemParams) -> Result<StateSpace> {
    if sys.auxiliary.is_some_and(|t| t.coupling() > 0.0) {
        return Err(Error::invalid(
            "auxiliary",
            "the time-domain model covers the probe mode only; fold the auxiliary beam into n_aux",
        ));
    }
    let osc = &sys.oscillator;
    let cav = &sys.cavity;
    let (m, wm, gm) = (osc.mass(), osc.frequency(), osc.damping());
    let (kappa, d) = (cav.kappa(), cav.detuning());
    let big_g = SQRT_2 * sys.coupling() / osc.zpf();

    #[rustfmt::skip]
    let a = Matrix4::new(
        -0.5 * kappa, -d,           0.0,          0.0,
        d,            -0.5 * kappa, big_g,        0.0,
        0.0,          0.0,          0.0,          1.0 / m,
        HBAR * big_g, 0.0,          -m * wm * wm, -gm,
    );
    let (s1, s2) = (cav.kappa1().sqrt(), cav.kappa2().sqrt());
    #[rustfmt::skip]
    let b = SMatrix::<f64, 4, 5>::from_row_slice(&[
        s1,  0.0, s2,  0.0, 0.0,
        0.0, s1,  0.0, s2,  0.0,
        0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, gm.sqrt(),
    ]);
    let n = sys.bath.occupancy();
    let intensities = [0.5, 0.5, 0.5, 0.5, 2.0 * m * HBAR * wm * (n + 0.5)];

    let scale = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        1.0,
        1.0,
        osc.zpf(),
        osc.zpf_momentum(),
    ));
    let inv_scale = scale.try_inverse().ok_or_else(|| Error::NonFinite("state scaling".into()))?;
    let scaled_a = inv_scale * a * scale / wm;
    let mut q = SMatrix::<f64, 5, 5>::zeros();
    for (i, v) in intensities.iter().enumerate() {
        q[(i, i)] = v.sqrt();
    }
    let scaled_b = inv_scale * b * q / wm.sqrt();

    let eig = DMatrix::from_iterator(4, 4, scaled_a.iter().copied()).complex_eigenvalues();
    if let Some(bad) = eig.iter().find(|l| !(l.re < 0.0)) {
        return Err(Error::Unstable(format!(
            "drift eigenvalue {:.6e}{:+.6e}i (units of the mechanical frequency) does not decay",
            bad.re, bad.im
        )));
    }
    Ok(StateSpace {
        a,
        b,
        intensities,
        scaled_a,
        scaled_b,
        params: *sys,
    })
}

/// Stationary covariance `P` of the dimensionless state, solving
/// `A P + P Aᵀ + B Bᵀ = 0` by vectorization.
pub fn stationary_covariance(ss: &StateSpace) -> Result<Matrix4<f64>> {
    let a = &ss.scaled_a;
    let c = ss.scaled_b * ss.scaled_b.transpose();
    let id = Matrix4::<f64>::identity();
    // vec(AP + PAᵀ) = (I⊗A + A⊗I) vec(P) with column-major vec
    let mut k = DMatrix::<f64>::zeros(16, 16);
    for i in 0..4 {
        for j in 0..4 {
            for r in 0..4 {
                for s in 0..4 {
                    k[(4 * j + r, 4 * i + s)] += id[(j, i)] * a[(r, s)] + a[(j, i)] * id[(r, s)];
                }
            }
        }
    }
    let rhs = DVector::from_iterator(16, c.iter().map(|v| -v));
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("stationary Lyapunov equation".into()))?;
    let p = Matrix4::from_iterator(sol.iter().copied());
    Ok(0.5 * (p + p.transpose()))
}
