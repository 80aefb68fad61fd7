use crate::config::Config;
use crate::error::CliError;
use crate::output::{num, write_atomic, Table};
use crate::record::{load_record, Columns};
use std::f64::consts::PI;
use std::path::Path;
use subsql::calibration;
use subsql::constants::TWO_PI;
use subsql::fit::{self, FitParameter, FitProblem, FreeParameter, LmOptions};
use subsql::langevin::{self, ComparisonOptions, IntegrationOptions, StreamOptions};
use subsql::limits::{self, Readout};
use subsql::{model, SystemParams};

pub struct Context {
    pub config: Config,
    /// Configured system with any command-line angle applied.
    pub sys: SystemParams,
    pub seed: Option<u64>,
    pub single_sided: bool,
    pub quiet: bool,
}

impl Context {
    /// Factor applied to spectral densities on output.
    fn density(&self) -> f64 {
        if self.single_sided {
            2.0
        } else {
            1.0
        }
    }

    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// A finished table, plus an error to report after it has been written.
pub struct Report {
    pub table: Table,
    pub after: Option<CliError>,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Self { table, after: None }
    }
}

fn hz(omega: f64) -> f64 {
    omega / TWO_PI
}

fn khz_offset(omega: f64, center: f64) -> String {
    format!("{:+.3} kHz", (omega - center) / TWO_PI / 1e3)
}

fn band_summary(bands: &[(f64, f64)], center: f64) -> String {
    if bands.is_empty() {
        return "none".into();
    }
    bands
        .iter()
        .map(|(lo, hi)| {
            format!(
                "[{}, {}] (width {:.3} kHz)",
                khz_offset(*lo, center),
                khz_offset(*hi, center),
                (hi - lo) / TWO_PI / 1e3
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn spectrum(ctx: &Context) -> Result<Report, CliError> {
    let sys = &ctx.sys;
    let grid = ctx.config.grid(sys)?;
    let theta = sys.theta();
    let spec = model::noise_spectrum(sys, theta, &grid)?;
    let d = ctx.density();
    let mut t = Table::new(&[
        "f_Hz",
        "Sxx_total",
        "Sxx_imp",
        "Sxx_qba",
        "Sxx_th",
        "Sxx_corr_term",
        "Sxx_SQL",
        "ratio_dB",
    ]);
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..grid.len() {
        let ratio_db = limits::to_db(spec.total[i] / spec.sql[i]);
        if ratio_db < best.0 {
            best = (ratio_db, grid[i]);
        }
        t.push(vec![
            num(hz(grid[i])),
            num(d * spec.total[i]),
            num(d * spec.imprecision[i]),
            num(d * spec.backaction[i]),
            num(d * spec.thermal[i]),
            num(d * spec.correlation[i]),
            num(d * spec.sql[i]),
            num(ratio_db),
        ]);
    }
    let center = ctx.config.grid_center(sys)?;
    ctx.note(format!(
        "theta = {theta:.4} rad: minimum {:.3} dB relative to the SQL at {}",
        best.0,
        khz_offset(best.1, center)
    ));
    Ok(t.into())
}

pub fn heatmap(ctx: &Context) -> Result<Report, CliError> {
    let sys = &ctx.sys;
    let h = &ctx.config.heatmap;
    if h.theta_points < 2 || !(h.theta_max_rad > h.theta_min_rad) {
        return Err(CliError::Config(
            "heatmap needs theta_points >= 2 and theta_max_rad > theta_min_rad".into(),
        ));
    }
    let thetas: Vec<f64> = (0..h.theta_points)
        .map(|k| h.theta_min_rad + (h.theta_max_rad - h.theta_min_rad) * k as f64 / (h.theta_points - 1) as f64)
        .collect();
    let grid = ctx.config.grid(sys)?;
    let map = limits::sql_ratio_map(sys, &thetas, &grid)?;
    let mut t = Table::new(&["theta_rad", "f_Hz", "ratio", "sub_sql"]);
    for (i, theta) in thetas.iter().enumerate() {
        for (j, w) in grid.iter().enumerate() {
            let r = map.get(i, j);
            t.push(vec![num(*theta), num(hz(*w)), num(r), u8::from(r < 1.0).to_string()]);
        }
    }
    ctx.note(format!(
        "{} of {} cells below the SQL",
        map.sub_sql_cells(),
        map.ratio.len()
    ));
    Ok(t.into())
}

pub fn optimize(ctx: &Context) -> Result<Report, CliError> {
    let sys = &ctx.sys;
    let grid = ctx.config.grid(sys)?;
    let plan = limits::variational_envelope(sys, &grid)?;
    let d = ctx.density();
    let ratio_db = plan.ratio_db();
    let mut t = Table::new(&["f_Hz", "theta_opt_rad", "Sxx_min", "Sxx_SQL", "ratio_dB"]);
    for i in 0..grid.len() {
        t.push(vec![
            num(hz(plan.omega[i])),
            num(plan.theta_opt[i]),
            num(d * plan.envelope[i]),
            num(d * plan.sql[i]),
            num(ratio_db[i]),
        ]);
    }
    let center = ctx.config.grid_center(sys)?;
    if let Some((i, r)) = ratio_db.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
        ctx.note(format!(
            "optimal readout reaches {r:.3} dB relative to the SQL at {} (theta = {:.4} rad)",
            khz_offset(grid[i], center),
            plan.theta_opt[i]
        ));
    }
    let variational = limits::sub_sql_band(sys, Readout::Variational)?;
    let fixed = limits::sub_sql_band(sys, Readout::Fixed(sys.theta()))?;
    ctx.note(format!("sub-SQL bands, frequency-dependent angle: {}", band_summary(&variational, center)));
    ctx.note(format!(
        "sub-SQL bands, fixed angle {:.4} rad: {}",
        sys.theta(),
        band_summary(&fixed, center)
    ));
    Ok(t.into())
}

pub fn simulate(ctx: &Context) -> Result<Report, CliError> {
    let sys = &ctx.sys;
    let s = &ctx.config.simulate;
    let ss = langevin::build_state_space(sys)?;
    let dt = s.dt_s.unwrap_or(1.0 / sys.oscillator.frequency());
    let thetas = s.thetas_rad.clone().unwrap_or_else(|| vec![sys.theta()]);
    if thetas.is_empty() {
        return Err(CliError::Config("simulate.thetas_rad is empty".into()));
    }
    let seed = ctx.seed.unwrap_or(s.seed);
    let options = StreamOptions {
        dt,
        segment_length: s.segment_length,
        overlap: s.overlap,
        segments: s.segments,
        seed,
    };
    ctx.note(format!(
        "simulating {} samples (dt = {dt:.4e} s) for {} quadrature(s)",
        options.samples(),
        thetas.len()
    ));
    let psds = langevin::simulate_photocurrent_psds(&ss, &thetas, options)?;

    let grid = ctx.config.grid(sys)?;
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let d = ctx.density();
    let mut t = Table::new(&["theta_rad", "f_Hz", "S_I", "stderr", "Sxx_estimate", "Sxx_model"]);
    for (theta, psd) in thetas.iter().zip(&psds) {
        let estimate = langevin::displacement_estimate(psd, sys, *theta)?;
        let rel = psd.relative_uncertainty();
        for k in 0..psd.omega.len() {
            let w = psd.omega[k];
            if w < lo || w > hi {
                continue;
            }
            t.push(vec![
                num(*theta),
                num(hz(w)),
                num(d * psd.psd[k]),
                num(d * psd.psd[k] * rel),
                num(d * estimate[k]),
                num(d * model::measured_displacement_spectrum(sys, *theta, w)?),
            ]);
        }
        if let Ok(window) = ComparisonOptions::around_resonance(sys, 3.0, 24) {
            if let Ok(report) = langevin::compare_to_analytic(psd, sys, *theta, window) {
                ctx.note(format!(
                    "theta = {theta:.4} rad: {} segments, band-averaged deviation from the model {:.2}% rms",
                    psd.segments,
                    100.0 * report.rms_relative()
                ));
            }
        }
    }
    if let Some(path) = &s.trace_path {
        write_trace(ctx, &ss, dt, seed, thetas[0], &ctx.config.resolve(path))?;
    }
    Ok(t.into())
}

fn write_trace(
    ctx: &Context,
    ss: &langevin::StateSpace,
    dt: f64,
    seed: u64,
    theta: f64,
    path: &Path,
) -> Result<(), CliError> {
    let n = ctx.config.simulate.trace_samples;
    let trace = langevin::integrate(ss, n as f64 * dt, dt, seed, IntegrationOptions::default())?;
    let current = langevin::synthesize_photocurrent(&trace, &ctx.sys, theta)?;
    let mut t = Table::new(&["t", "X", "Y", "x", "p", "I"]);
    for k in 0..trace.len() {
        t.push(vec![
            num((k + 1) as f64 * dt),
            num(trace.quad_x[k]),
            num(trace.quad_y[k]),
            num(trace.position[k]),
            num(trace.momentum[k]),
            num(current[k]),
        ]);
    }
    for w in &trace.warnings {
        ctx.note(format!("warning: {w}"));
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&t.headers).map_err(|e| CliError::Config(e.to_string()))?;
        for r in &t.rows {
            w.write_record(r).map_err(|e| CliError::Config(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Config(e.to_string()))?;
    }
    write_atomic(path, &buf)
}

pub fn calibrate(ctx: &Context) -> Result<Report, CliError> {
    let section = ctx
        .config
        .calibrate
        .as_ref()
        .ok_or_else(|| CliError::Config("calibrate needs a [calibrate] section".into()))?;
    let loaded = load_record(&ctx.config.resolve(&section.record))?;
    let record = loaded.record;
    let osc = ctx.sys.oscillator;
    let wm = osc.frequency();
    let n_min = record.cooling.minimum_occupancy(wm)?;
    let (g0, sigma, points) = if loaded.cooling_points.is_empty() {
        (record.extract_g0(wm)?, f64::NAN, 1)
    } else {
        let e = calibration::fit_g0(&loaded.cooling_points, &record.tone, &record.cooling, wm)?;
        (e.g0, e.sigma, e.points)
    };
    ctx.note(format!(
        "g0 = 2pi x {:.4} Hz (n_min = {n_min:.4}, {points} reference point(s))",
        hz(g0)
    ));
    let Some(spectrum) = &section.spectrum else {
        let mut t = Table::new(&["g0_Hz", "g0_sigma_Hz", "n_min", "points"]);
        t.push(vec![num(hz(g0)), num(hz(sigma)), num(n_min), points.to_string()]);
        return Ok(t.into());
    };
    let cols = Columns::read(&ctx.config.resolve(spectrum))?;
    let omega: Vec<f64> = cols.get("f_Hz")?.iter().map(|f| TWO_PI * f).collect();
    let s_vv = cols.get(&section.spectrum_column)?;
    let s_xx = record.to_displacement(&osc, s_vv)?;
    let ratio = record.sql_ratio(&osc, &omega, s_vv)?;
    let d = ctx.density();
    let mut t = Table::new(&["f_Hz", "Sxx_m2_per_Hz", "ratio_to_SQL"]);
    for i in 0..omega.len() {
        t.push(vec![num(hz(omega[i])), num(d * s_xx[i]), num(ratio[i])]);
    }
    Ok(t.into())
}

fn parameter(name: &str) -> Result<FitParameter, CliError> {
    match name {
        "g" | "coupling" => Ok(FitParameter::Coupling),
        "theta" => Ok(FitParameter::Theta),
        "detuning" => Ok(FitParameter::Detuning),
        "efficiency" => Ok(FitParameter::Efficiency),
        other => Err(CliError::Config(format!(
            "unknown fit parameter {other:?} (expected g, theta, detuning or efficiency)"
        ))),
    }
}

/// Converts a fitted value back to external units.
fn external(p: FitParameter, v: f64) -> f64 {
    match p {
        FitParameter::Coupling | FitParameter::Detuning => hz(v),
        FitParameter::Theta | FitParameter::Efficiency => v,
    }
}

pub fn fit(ctx: &Context) -> Result<Report, CliError> {
    let section = ctx
        .config
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Config("fit needs a [fit] section".into()))?;
    if section.data.is_none() && section.efficiency.is_none() {
        return Err(CliError::Config("[fit] needs data, [fit.efficiency], or both".into()));
    }
    let sys = ctx.sys;
    let mut t = Table::new(&["parameter", "value", "sigma", "at_bound"]);
    let mut after = None;

    if let Some(data) = &section.data {
        let cols = Columns::read(&ctx.config.resolve(data))?;
        let f = cols.get("f_Hz")?;
        let values = cols.get(&section.column)?;
        let theta_col = if cols.has("theta_rad") { Some(cols.get("theta_rad")?) } else { None };
        if let (Some(tc), None) = (theta_col, section.select_theta_rad) {
            if tc.iter().any(|v| (v - tc[0]).abs() > 1e-12) {
                return Err(CliError::Config(
                    "data holds several theta_rad values; set fit.select_theta_rad".into(),
                ));
            }
        }
        let scale = if section.single_sided_input { 0.5 } else { 1.0 };
        let (mut omega, mut observed) = (Vec::new(), Vec::new());
        for i in 0..f.len() {
            if let (Some(tc), Some(sel)) = (theta_col, section.select_theta_rad) {
                if (tc[i] - sel).abs() > 1e-9 {
                    continue;
                }
            }
            if section.f_min_hz.is_some_and(|m| f[i] < m) || section.f_max_hz.is_some_and(|m| f[i] > m) {
                continue;
            }
            omega.push(TWO_PI * f[i]);
            observed.push(scale * values[i]);
        }
        let init = &section.initial;
        let free = section
            .free
            .iter()
            .map(|name| {
                let parameter = parameter(name)?;
                let initial = match parameter {
                    FitParameter::Coupling => init.coupling_hz.map_or(sys.coupling(), |v| TWO_PI * v),
                    FitParameter::Theta => init.theta_rad.unwrap_or(sys.theta()),
                    FitParameter::Detuning => init.detuning_hz.map_or(sys.cavity.detuning(), |v| TWO_PI * v),
                    FitParameter::Efficiency => init.efficiency.unwrap_or(sys.efficiency()),
                };
                Ok(FreeParameter { parameter, initial })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut options = LmOptions::default();
        if let Some(n) = section.max_iterations {
            options.max_iterations = n;
        }
        let problem = FitProblem {
            omega,
            observed,
            baseline: sys,
            free,
            options,
        };
        let result = fit::fit_spectrum(&problem)?;
        for e in &result.estimates {
            t.push(vec![
                e.parameter.name().to_string(),
                num(external(e.parameter, e.value)),
                num(external(e.parameter, e.sigma)),
                e.at_bound.to_string(),
            ]);
        }
        t.push(vec!["reduced_chi2".into(), num(result.reduced_chi2), String::new(), String::new()]);
        ctx.note(format!(
            "{} points, {} iterations, reduced chi2 = {:.4e}",
            problem.omega.len(),
            result.iterations,
            result.reduced_chi2
        ));
        let diag = fit::residual_diagnostics(&problem, &result)?;
        for flag in &diag.flags {
            ctx.note(format!("warning: {flag}"));
        }
        if !result.converged {
            after = Some(CliError::NotConverged(format!(
                "stopped after {} iterations with gradient norm {:.3e}",
                result.iterations, result.gradient_norm
            )));
        }
    }

    if let Some(eff) = &section.efficiency {
        let cols = Columns::read(&ctx.config.resolve(&eff.data))?;
        let pairs: Vec<(f64, f64)> = cols
            .get("theta_rad")?
            .iter()
            .copied()
            .zip(cols.get("S_imp")?.iter().copied())
            .collect();
        let result = fit::fit_detection_efficiency(&pairs, &sys, TWO_PI * eff.analysis_frequency_hz)?;
        let e = result.get(FitParameter::Efficiency).expect("efficiency is the fitted parameter");
        t.push(vec![e.parameter.name().to_string(), num(e.value), num(e.sigma), e.at_bound.to_string()]);
        if !result.converged && after.is_none() {
            after = Some(CliError::NotConverged("detection-efficiency fit".into()));
        }
    }
    Ok(Report { table: t, after })
}

pub fn snr(ctx: &Context) -> Result<Report, CliError> {
    let sys = &ctx.sys;
    let s = &ctx.config.snr;
    if s.thetas_rad.is_empty() {
        return Err(CliError::Config("snr.thetas_rad is empty".into()));
    }
    let grid = ctx.config.grid(sys)?;
    let center = ctx.config.grid_center(sys)?;
    let d = ctx.density();
    let mut t = Table::new(&[
        "theta_rad",
        "f_Hz",
        "relative_snr",
        "relative_snr_with_thermal",
        "signal_raw",
        "noise_raw",
        "force_noise_N2_per_Hz",
    ]);
    for &theta in &s.thetas_rad {
        let mut above = Vec::with_capacity(grid.len());
        for &w in &grid {
            let r = limits::snr_relative_to_sql(sys, theta, w, s.force_psd_n2_per_hz)?;
            above.push(r.relative_snr() > 1.0);
            t.push(vec![
                num(theta),
                num(hz(w)),
                num(r.relative_snr()),
                num(r.relative_snr_with_thermal()),
                num(d * r.signal_raw),
                num(d * r.noise_raw),
                num(d * r.noise * r.force_psd / r.signal),
            ]);
        }
        let mut bands = Vec::new();
        let mut start = None;
        for (i, a) in above.iter().enumerate() {
            match (a, start) {
                (true, None) => start = Some(grid[i]),
                (false, Some(lo)) => {
                    bands.push((lo, grid[i - 1]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(lo) = start {
            bands.push((lo, grid[grid.len() - 1]));
        }
        ctx.note(format!(
            "theta = {:.3} pi: relative SNR > 1 on {}",
            theta / PI,
            band_summary(&bands, center)
        ));
    }
    Ok(t.into())
}
