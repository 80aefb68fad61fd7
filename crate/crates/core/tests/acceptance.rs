//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Derived reference values are computed here from independent closed forms
//! rather than through the library's own helpers wherever that is possible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};
use subsql::calibration::{self, AuxiliaryCooling, CalibrationRecord, CalibrationTone, CoolingPoint};
use subsql::constants::{HBAR, TWO_PI};
use subsql::fit::{self, FitParameter, FitProblem, FreeParameter, LmOptions};
use subsql::langevin::{self, ComparisonOptions, StreamOptions};
use subsql::limits::{self, Readout};
use subsql::model::{self, SpectralPoint};
use subsql::params::MechanicalOscillator;
use subsql::{presets, Complex64, SystemParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn khz(omega: f64) -> f64 {
    omega / TWO_PI / 1e3
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// |χ_m(Ω)| from the explicit modulus.
fn chi_m_abs(m: f64, wm: f64, gm: f64, w: f64) -> f64 {
    1.0 / (m * ((wm * wm - w * w).powi(2) + gm * gm * w * w).sqrt())
}

fn c1_sql_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut worst_split = 0.0f64;
    for _ in 0..1000 {
        let m = 10f64.powf(rng.random_range(-15.0..-6.0));
        let wm = 10f64.powf(rng.random_range(3.0..8.0));
        let q = 10f64.powf(rng.random_range(1.0..9.0));
        let w = wm * rng.random_range(0.0..3.0);
        let osc = MechanicalOscillator::from_quality(m, wm, q).unwrap();
        let sql = HBAR * chi_m_abs(m, wm, wm / q, w);
        // minimize over log Γ_meas without using the closed-form optimum
        let zpf2 = HBAR / (2.0 * m * wm);
        let guess = (zpf2 / (2.0 * sql)).ln();
        let ln_rate = golden(
            |l| limits::added_noise_uncorrelated(&osc, l.exp(), w),
            guess - 20.0,
            guess + 20.0,
            200,
        );
        let best = limits::added_noise_uncorrelated(&osc, ln_rate.exp(), w);
        worst = worst.max(rel(best, sql));
        let (imp, ba) = limits::added_noise_parts(&osc, limits::optimal_measurement_rate(&osc, w), w);
        worst_split = worst_split.max(rel(imp, ba));
    }
    outcome(
        worst < 1e-9 && worst_split < 1e-12,
        format!("max rel. deviation from hbar|chi_m| {worst:.2e}; imprecision/backaction mismatch {worst_split:.2e}"),
    )
}

fn resonant(sys: SystemParams) -> SystemParams {
    sys.with_probe_detuning(0.0).unwrap()
}

/// Maximum relative deviation of exact imprecision and backaction from the
/// bad-cavity forms at κ/Ω = `ratio`, and absolute correlation deviation in
/// units of ħ/2, over θ ∈ {0.1π … 0.9π}.
fn bad_cavity_deviation(sys: &SystemParams, ratio: f64) -> (f64, f64) {
    let w = sys.cavity.kappa() / ratio;
    let zpf = sys.oscillator.zpf();
    let g = sys.coupling();
    let kappa = sys.cavity.kappa();
    let eta = sys.efficiency();
    let mut dev = 0.0f64;
    let mut corr_dev = 0.0f64;
    for k in 1..=9 {
        let theta = 0.1 * PI * k as f64;
        let s = theta.sin();
        let imp_limit = zpf * zpf * kappa / (16.0 * g * g * eta * s * s);
        let qba_limit = HBAR * HBAR / (2.0 * zpf * zpf) * 8.0 * g * g / kappa;
        let corr_limit = -0.5 * HBAR / theta.tan();
        dev = dev
            .max(rel(model::imprecision_spectrum(sys, theta, w), imp_limit))
            .max(rel(model::qba_force_spectrum(sys, w), qba_limit));
        let c = model::correlation_spectrum(sys, theta, w).unwrap();
        corr_dev = corr_dev.max((c - Complex64::new(corr_limit, 0.0)).norm() / (0.5 * HBAR));
        // the library's closed forms must agree with the ones written here
        let lim = model::bad_cavity_limits(sys, theta);
        assert!(rel(lim.imprecision, imp_limit) < 1e-12 && rel(lim.qba_force, qba_limit) < 1e-12);
    }
    (dev, corr_dev)
}

fn c2_bad_cavity() -> Outcome {
    let sys = resonant(presets::reference_operating_point().unwrap());
    let (at_1000, corr) = bad_cavity_deviation(&sys, 1e3);
    let ratios = [1e3, 300.0, 100.0, 30.0, 10.0];
    let devs: Vec<f64> = ratios.iter().map(|&r| bad_cavity_deviation(&sys, r).0).collect();
    let monotone = devs.windows(2).all(|w| w[1] > w[0]);
    let breaks = devs[4] > 1e-3;
    outcome(
        at_1000 < 1e-4 && corr < 1e-4 && monotone && breaks,
        format!(
            "kappa/omega=1e3: max rel. dev {at_1000:.2e}, correlation dev {corr:.1e} (hbar/2 units); deviation vs kappa/omega {ratios:?}: {:?}",
            devs.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn c3_heisenberg() -> Outcome {
    let sys = resonant(presets::reference_operating_point().unwrap());
    let w = sys.cavity.kappa() / 1e4;
    let product = model::imprecision_spectrum(&sys, FRAC_PI_2, w) * model::qba_force_spectrum(&sys, w);
    let limit = HBAR * HBAR / (4.0 * sys.efficiency());
    let dev = rel(product, limit);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..10_000 {
        let wm = 10f64.powf(rng.random_range(4.0..8.0));
        let osc = MechanicalOscillator::from_quality(
            10f64.powf(rng.random_range(-15.0..-8.0)),
            wm,
            10f64.powf(rng.random_range(2.0..9.0)),
        )
        .unwrap();
        let kappa = wm * 10f64.powf(rng.random_range(-1.5..2.5));
        let cav = subsql::OpticalCavity::from_linewidth(
            kappa,
            rng.random_range(0.05..1.0),
            kappa * rng.random_range(-2.0..2.0),
        )
        .unwrap();
        let probe = subsql::DriveTone::from_coupling(
            1.0,
            kappa * 10f64.powf(rng.random_range(-5.0..-1.0)),
            cav.detuning(),
            subsql::ToneRole::Probe,
        )
        .unwrap();
        let s = SystemParams::new(
            osc,
            cav,
            probe,
            None,
            subsql::ThermalBath::from_occupancy(rng.random_range(0.0..1e3), 0.0).unwrap(),
            subsql::Detection::new(0.0, rng.random_range(0.01..=1.0)).unwrap(),
        )
        .unwrap();
        let theta = rng.random_range(0.0..PI);
        let w = wm * rng.random_range(0.0..3.0);
        let imp = model::imprecision_spectrum(&s, theta, w);
        if !imp.is_finite() {
            continue;
        }
        min_ratio = min_ratio.min(imp * model::qba_force_spectrum(&s, w) / (HBAR * HBAR / 4.0));
    }
    outcome(
        dev < 1e-6 && min_ratio >= 1.0,
        format!("bad-cavity product rel. dev {dev:.2e}; min product/(hbar^2/4) over 1e4 draws {min_ratio:.4}"),
    )
}

/// Minimum over θ by dense scan plus golden refinement, independent of the
/// library's optimizer.
fn brute_min_theta(p: &SpectralPoint) -> f64 {
    let n = 2000;
    let (mut best_t, mut best) = (0.0, f64::INFINITY);
    for i in 0..n {
        let t = PI * (i as f64 + 0.5) / n as f64;
        let v = p.total(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let h = PI / n as f64;
    let t = golden(|t| p.total(t), best_t - h, best_t + h, 80);
    p.total(t).min(best)
}

fn c4_operating_point() -> Outcome {
    let sys = presets::reference_operating_point().unwrap();
    let res = model::effective_resonance(&sys).unwrap();
    let ratio_at = |off: f64| {
        let p = SpectralPoint::new(&sys, res.frequency + off).unwrap();
        brute_min_theta(&p) / (HBAR * p.chi_eff.norm())
    };
    // grid scan of the envelope on both sides, then refine the upper minimum
    let offsets: Vec<f64> = (-150..=150).filter(|k| *k != 0).map(|k| TWO_PI * 100.0 * k as f64).collect();
    let plan = limits::variational_envelope(
        &sys,
        &offsets.iter().map(|o| res.frequency + o).collect::<Vec<_>>(),
    )
    .unwrap();
    let ratios = plan.ratio();
    let below_low = offsets.iter().zip(&ratios).any(|(o, r)| *o < 0.0 && *r < 1.0);
    let below_high = offsets.iter().zip(&ratios).any(|(o, r)| *o > 0.0 && *r < 1.0);
    // the two dips are nearly equal; refine the minimum on each side
    let side_min = |upper: bool| -> (f64, f64) {
        let (k, _) = offsets
            .iter()
            .zip(&ratios)
            .enumerate()
            .filter(|(_, (o, _))| (**o > 0.0) == upper)
            .min_by(|a, b| a.1 .1.total_cmp(b.1 .1))
            .unwrap();
        let step = TWO_PI * 100.0;
        let off = golden(|o| ratio_at(o), offsets[k] - step, offsets[k] + step, 60);
        (off, db(ratio_at(off)))
    };
    let (best_off, best_db) = side_min(true);
    let (low_off, low_db) = side_min(false);
    // library envelope agrees with the brute-force θ scan
    let envelope_dev = offsets
        .iter()
        .zip(&ratios)
        .step_by(10)
        .map(|(o, r)| rel(*r, ratio_at(*o)))
        .fold(0.0, f64::max);
    let bands = limits::sub_sql_band(&sys, Readout::Fixed(0.8 * PI)).unwrap();
    let width: f64 = bands.iter().map(|(a, b)| b - a).sum();
    let width_khz = khz(width);
    let pass = below_low
        && below_high
        && (-2.5..=-1.0).contains(&best_db)
        && (3.0..=9.0).contains(&khz(best_off))
        && (4.0..=16.0).contains(&width_khz)
        && (best_db - low_db).abs() < 0.1
        && envelope_dev < 1e-9;
    outcome(
        pass,
        format!(
            "envelope min above resonance {best_db:.3} dB at {:+.2} kHz (below: {low_db:.3} dB at {:+.2} kHz); sub-SQL both sides: {below_low}/{below_high}; fixed-theta (0.8 pi) sub-SQL width {width_khz:.2} kHz; envelope vs brute force {envelope_dev:.1e}",
            khz(best_off),
            khz(low_off)
        ),
    )
}

fn sub_sql_area(cq: f64) -> usize {
    let sys = presets::operating_point(cq).unwrap();
    let res = model::effective_resonance(&sys).unwrap();
    let thetas: Vec<f64> = (0..=80).map(|k| PI * (0.1 + 0.8 * k as f64 / 80.0)).collect();
    let grid: Vec<f64> = (0..=400)
        .map(|k| res.frequency + TWO_PI * (-20e3 + 100.0 * k as f64))
        .collect();
    limits::sql_ratio_map(&sys, &thetas, &grid).unwrap().sub_sql_cells()
}

fn c5_cooperativity_trend() -> Outcome {
    let areas: Vec<usize> = [4.6, 8.8, 17.3].iter().map(|&c| sub_sql_area(c)).collect();
    outcome(
        areas[0] < areas[1] && areas[1] < areas[2] && areas[0] > 0,
        format!("sub-SQL cells at C_q = 4.6, 8.8, 17.3: {areas:?}"),
    )
}

fn c6_ponderomotive_squeezing() -> Outcome {
    let sys = presets::reference_operating_point().unwrap();
    let res = model::effective_resonance(&sys).unwrap();
    let theta = 0.16 * PI;
    let offsets: Vec<f64> = (-3000..=3000).map(|k| TWO_PI * 10.0 * k as f64).collect();
    let s: Vec<f64> = offsets
        .iter()
        .map(|o| model::shot_normalized_spectrum(&sys, theta, res.frequency + o).unwrap())
        .collect();
    let (i_min, s_min) = s.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let (i_max, s_max) = s.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let slope_left = s[i_min] - s[i_min - 1];
    let slope_right = s[i_min + 1] - s[i_min];
    // Fano: the dip and the peak sit on opposite sides of the resonance and
    // the profile is not mirror-symmetric about the dip
    let opposite = offsets[i_min].signum() != offsets[i_max].signum();
    let mirror = |d: usize| (s[i_min + d] - s[i_min - d]).abs();
    let asym = (1..200).filter(|&d| i_min >= d && i_min + d < s.len()).map(mirror).fold(0.0, f64::max);
    outcome(
        s_min < 1.0 && slope_left < 0.0 && slope_right > 0.0 && opposite && asym > 0.1,
        format!(
            "min {s_min:.3} at {:+.2} kHz, max {s_max:.2} at {:+.2} kHz, mirror asymmetry {asym:.2}",
            khz(offsets[i_min]),
            khz(offsets[i_max])
        ),
    )
}

fn c7_oracle() -> Outcome {
    let sys = presets::desk_scale(presets::QUANTUM_COOPERATIVITY, presets::DESK_QUALITY).unwrap();
    let ss = langevin::build_state_space(&sys).unwrap();
    let thetas = [FRAC_PI_2, 0.16 * PI, 0.8 * PI];
    let opts = StreamOptions {
        dt: 1.0 / sys.oscillator.frequency(),
        segment_length: 1 << 17,
        overlap: 0.5,
        segments: 1000,
        seed: 7,
    };
    let start = Instant::now();
    let psds = langevin::simulate_photocurrent_psds(&ss, &thetas, opts).unwrap();
    let elapsed = start.elapsed();
    let window = ComparisonOptions::around_resonance(&sys, 3.0, 24).unwrap();
    let mut pass = elapsed < Duration::from_secs(300 * thetas.len() as u64);
    let mut parts = Vec::new();
    for (theta, psd) in thetas.iter().zip(&psds) {
        let report = langevin::compare_to_analytic(psd, &sys, *theta, window).unwrap();
        let rms = report.rms_relative();
        pass &= rms < 0.05 && psd.segments >= 1000;
        parts.push(format!("theta={:.2}pi rms {:.2}% (max {:.2}%)", theta / PI, 100.0 * rms, 100.0 * report.max_relative()));
    }
    outcome(
        pass,
        format!("{} segments; {}; simulation {:.0} s", psds[0].segments, parts.join(", "), elapsed.as_secs_f64()),
    )
}

fn c8_calibration() -> Outcome {
    let wm = presets::MECH_FREQUENCY;
    let g0_true = TWO_PI * 120.7;
    let tone = CalibrationTone::new(wm * 1.002, 0.013).unwrap();
    let aux_kappa = TWO_PI * 16.5e6;
    let cooling = AuxiliaryCooling::new(aux_kappa, -0.33 * aux_kappa).unwrap();
    // sideband-cooling limit written out independently
    let hk2 = aux_kappa * aux_kappa / 4.0;
    let d = -0.33 * aux_kappa;
    let a_anti = 1.0 / (hk2 + (d + wm).powi(2));
    let a_stokes = 1.0 / (hk2 + (d - wm).powi(2));
    let n_min = a_stokes / (a_anti - a_stokes);
    // forward model: phase variance of the mechanics 2g₀²(n+½)/Ω_m², gain K
    let (k_ref, k_meas) = (3.7e4, 0.21e4);
    let record = CalibrationRecord {
        tone,
        cooling,
        mech_variance_ref: k_ref * 2.0 * g0_true * g0_true * (n_min + 0.5) / (wm * wm),
        cal_variance_ref: k_ref * tone.depth * tone.depth / 2.0,
        cal_variance_meas: k_meas * tone.depth * tone.depth / 2.0,
    };
    let g0 = record.extract_g0(wm).unwrap();
    let noiseless = rel(g0, g0_true);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let points: Vec<CoolingPoint> = (0..20)
            .map(|i| {
                let n = n_min * (1.0 + 3.0 / (1.0 + i as f64));
                let noise = |r: &mut ChaCha8Rng| 1.0 + 0.01 * r.sample::<f64, _>(StandardNormal);
                CoolingPoint {
                    mech_variance: k_ref * 2.0 * g0_true * g0_true * (n + 0.5) / (wm * wm) * noise(&mut rng),
                    cal_variance: k_ref * tone.depth * tone.depth / 2.0 * noise(&mut rng),
                    occupancy: Some(n),
                }
            })
            .collect();
        let est = calibration::fit_g0(&points, &tone, &cooling, wm).unwrap();
        worst = worst.max(rel(est.g0, g0_true));
    }

    // mass invariance of the calibrated SQL ratio
    let sys = presets::reference_operating_point().unwrap();
    let res = model::effective_resonance(&sys).unwrap();
    let grid: Vec<f64> = (-200..=200).map(|k| res.frequency + TWO_PI * 50.0 * k as f64).collect();
    let unit_tone = CalibrationRecord {
        tone: CalibrationTone::new(wm, 0.013).unwrap(),
        ..record
    };
    let ratio_for_mass = |scale: f64| -> (Vec<f64>, Vec<f64>) {
        let osc = MechanicalOscillator::from_quality(
            sys.oscillator.mass() * scale,
            wm,
            sys.oscillator.quality(),
        )
        .unwrap();
        let s = sys.with_oscillator(osc);
        let spec = model::noise_spectrum(&s, 0.8 * PI, &grid).unwrap();
        let zpf2 = osc.zpf().powi(2);
        let s_vv: Vec<f64> = spec.total.iter().map(|x| k_meas * g0_true * g0_true / (zpf2 * wm * wm) * x).collect();
        let direct: Vec<f64> = spec
            .total
            .iter()
            .zip(&grid)
            .map(|(x, w)| x / (HBAR * chi_m_abs(osc.mass(), wm, osc.damping(), *w)))
            .collect();
        (unit_tone.sql_ratio(&osc, &grid, &s_vv).unwrap(), direct)
    };
    let (r1, direct) = ratio_for_mass(1.0);
    let (r10, _) = ratio_for_mass(10.0);
    let mass_dev = r1.iter().zip(&r10).map(|(a, b)| rel(*b, *a)).fold(0.0, f64::max);
    let direct_dev = r1.iter().zip(&direct).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    outcome(
        noiseless < 1e-12 && worst < 0.03 && mass_dev < 1e-10 && direct_dev < 1e-9,
        format!(
            "noiseless g0 rel. err {noiseless:.1e}; worst of 200 noisy 20-point series {:.2}%; mass x10 ratio change {mass_dev:.1e}; vs S_xx/hbar|chi_m| {direct_dev:.1e}",
            100.0 * worst
        ),
    )
}

fn c9_fit() -> Outcome {
    let truth = presets::reference_operating_point().unwrap().with_theta(0.8 * PI).unwrap();
    let kappa = truth.cavity.kappa();
    let res = model::effective_resonance(&truth).unwrap();
    let grid: Vec<f64> = (0..4096)
        .map(|k| res.frequency + TWO_PI * (-15e3 + 30e3 * k as f64 / 4095.0))
        .collect();
    let clean = model::noise_spectrum(&truth, truth.theta(), &grid).unwrap().total;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noisy: Vec<f64> = clean
        .iter()
        .map(|s| s * (1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let g = truth.coupling();
    let d = truth.cavity.detuning();
    let problem = FitProblem {
        omega: grid.clone(),
        observed: noisy,
        baseline: truth.with_probe_coupling(1.1 * g).unwrap().with_probe_detuning(0.9 * d).unwrap(),
        free: vec![
            FreeParameter { parameter: FitParameter::Coupling, initial: 1.1 * g },
            FreeParameter { parameter: FitParameter::Theta, initial: 0.8 * PI + 0.05 },
            FreeParameter { parameter: FitParameter::Detuning, initial: 0.9 * d },
        ],
        options: LmOptions::default(),
    };
    let fit3 = fit::fit_spectrum(&problem).unwrap();
    let g_err = rel(fit3.value(FitParameter::Coupling).unwrap(), g);
    let t_err = (fit3.value(FitParameter::Theta).unwrap() - 0.8 * PI).abs();
    let d_err = (fit3.value(FitParameter::Detuning).unwrap() - d).abs() / kappa;

    // g and Δ alone on a narrow near-resonant window
    let narrow: Vec<f64> = (0..400).map(|k| res.frequency + TWO_PI * (-2e3 + 10.0 * k as f64)).collect();
    let narrow_clean = model::noise_spectrum(&truth, truth.theta(), &narrow).unwrap().total;
    let narrow_noisy: Vec<f64> = narrow_clean
        .iter()
        .map(|s| s * (1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let fit2 = fit::fit_spectrum(&FitProblem {
        omega: narrow,
        observed: narrow_noisy,
        baseline: truth,
        free: vec![
            FreeParameter { parameter: FitParameter::Coupling, initial: 1.05 * g },
            FreeParameter { parameter: FitParameter::Detuning, initial: 0.95 * d },
        ],
        options: LmOptions::default(),
    })
    .unwrap();
    let rho = fit2.correlation(FitParameter::Coupling, FitParameter::Detuning).unwrap();

    // efficiency from imprecision levels versus θ
    let eta_true = 0.77;
    let base = truth.with_efficiency(eta_true).unwrap();
    let w_an = res.frequency + TWO_PI * 50e3;
    let angles: Vec<f64> = (0..9).map(|k| PI * (0.1 + 0.1 * k as f64)).collect();
    let mut worst_eta = 0.0f64;
    for _ in 0..1000 {
        let data: Vec<(f64, f64)> = angles
            .iter()
            .map(|&t| {
                let s = model::imprecision_spectrum(&base, t, w_an);
                (t, s * (1.0 + 0.02 * rng.sample::<f64, _>(StandardNormal)))
            })
            .collect();
        let f = fit::fit_detection_efficiency(&data, &base, w_an).unwrap();
        worst_eta = worst_eta.max(rel(f.value(FitParameter::Efficiency).unwrap(), eta_true));
    }
    outcome(
        g_err < 0.01 && t_err < 0.01 && d_err < 0.01 && rho.abs() > 0.5 && worst_eta < 0.03 && fit3.converged,
        format!(
            "g {:.3}%, theta {t_err:.1e} rad, detuning {:.1e} kappa; rho(g, detuning) {rho:+.3}; worst eta error over 1000 trials {:.2}%",
            100.0 * g_err,
            d_err,
            100.0 * worst_eta
        ),
    )
}

fn c10_force_snr() -> Outcome {
    let sys = presets::reference_operating_point().unwrap();
    let res = model::effective_resonance(&sys).unwrap();
    let w0 = res.frequency + TWO_PI * 8.2e3;
    let f0 = 1e-34;
    let phase = limits::snr_relative_to_sql(&sys, FRAC_PI_2, w0, f0).unwrap();
    let vari = limits::snr_relative_to_sql(&sys, 0.8 * PI, w0, f0).unwrap();
    // independent transduction magnitude |χ_c(Ω)e^{iθ} − χ_c(−Ω)*e^{−iθ}|²
    let kappa = sys.cavity.kappa();
    let d = sys.cavity.detuning();
    let chi = |w: f64| Complex64::new(kappa / 2.0, -(d + w)).inv();
    let tr = |t: f64| {
        let e = Complex64::from_polar(1.0, t);
        (chi(w0) * e - chi(-w0).conj() * e.conj()).norm_sqr()
    };
    let signal_drop = db(phase.signal_raw / vari.signal_raw);
    let signal_drop_oracle = db(tr(FRAC_PI_2) / tr(0.8 * PI));
    let noise_drop = db(phase.noise_raw / vari.noise_raw);
    let force_dev = rel(
        vari.calibrated_force(&sys).unwrap(),
        phase.calibrated_force(&sys).unwrap(),
    );
    // relative SNR > 1 over one contiguous band at the variational angle
    let offsets: Vec<f64> = (-400..=400).map(|k| TWO_PI * 50.0 * k as f64).collect();
    let above: Vec<bool> = offsets
        .iter()
        .map(|o| {
            limits::snr_relative_to_sql(&sys, 0.8 * PI, res.frequency + o, f0)
                .unwrap()
                .relative_snr()
                > 1.0
        })
        .collect();
    let transitions = above.windows(2).filter(|w| w[0] != w[1]).count();
    let band: Vec<f64> = offsets.iter().zip(&above).filter(|(_, a)| **a).map(|(o, _)| khz(*o)).collect();
    let contiguous = !band.is_empty() && transitions <= 2 && !above[0] && !above[above.len() - 1];
    let pass = (0.9..=2.9).contains(&signal_drop)
        && (3.7..=6.7).contains(&noise_drop)
        && force_dev < 1e-9
        && (signal_drop - signal_drop_oracle).abs() < 1e-9
        && contiguous;
    outcome(
        pass,
        format!(
            "signal drop {signal_drop:.2} dB, noise drop {noise_drop:.2} dB, force mismatch {force_dev:.1e}; relative SNR > 1 from {:+.2} to {:+.2} kHz",
            band.first().copied().unwrap_or(f64::NAN),
            band.last().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("1 SQL identity", c1_sql_identity, Duration::from_secs(1)),
        ("2 bad-cavity limits", c2_bad_cavity, Duration::from_secs(1)),
        ("3 Heisenberg product", c3_heisenberg, Duration::from_secs(5)),
        ("4 operating point", c4_operating_point, Duration::from_secs(10)),
        ("5 cooperativity trend", c5_cooperativity_trend, Duration::from_secs(30)),
        ("6 ponderomotive squeezing", c6_ponderomotive_squeezing, Duration::from_secs(1)),
        ("7 Langevin oracle", c7_oracle, Duration::from_secs(900)),
        ("8 calibration round-trip", c8_calibration, Duration::from_secs(10)),
        ("9 fit recovery", c9_fit, Duration::from_secs(60)),
        ("10 force SNR", c10_force_snr, Duration::from_secs(5)),
    ];
    let only: Option<String> = std::env::args().nth(1).filter(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if let Some(sel) = &only {
            if !name.starts_with(sel.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let ok = out.pass && elapsed <= budget;
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {name}: {} ({:.2} s of {} s)",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
