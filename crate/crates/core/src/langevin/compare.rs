use super::welch::PsdEstimate;
use crate::error::{Error, Result};
use crate::limits::broadened_linewidth;
use crate::model::{effective_resonance, SpectralPoint};
use crate::params::SystemParams;

/// Response of integrate-and-dump sampling, |sinc(Ω·dt/2)|².
fn sampling_response(omega: f64, dt: f64) -> f64 {
    let x = 0.5 * omega * dt;
    if x.abs() < 1e-8 {
        1.0
    } else {
        let s = x.sin() / x;
        s * s
    }
}

/// Expected Welch PSD of the simulated photocurrent (shot noise = 1/2).
///
/// The photocurrent is averaged over each sample period, which filters the
/// excess over shot noise by `sinc²(Ω·dt/2)`; the shot-noise part stays white.
pub fn expected_photocurrent_psd(sys: &SystemParams, theta: f64, omega: f64, dt: f64) -> Result<f64> {
    let point = SpectralPoint::new(sys, omega)?;
    let c = point.components(theta);
    let gain = sys.port_efficiency() * point.transduction(theta).norm_sqr();
    Ok(0.5 + sampling_response(omega, dt) * gain * (c.total() - c.imprecision))
}

/// Converts a photocurrent PSD into displacement units bin by bin, undoing
/// the transduction and the sampling filter.
pub fn displacement_estimate(psd: &PsdEstimate, sys: &SystemParams, theta: f64) -> Result<Vec<f64>> {
    psd.omega
        .iter()
        .zip(&psd.psd)
        .map(|(&w, &s)| {
            let point = SpectralPoint::new(sys, w)?;
            let gain = sys.port_efficiency() * point.transduction(theta).norm_sqr();
            if gain <= 0.0 {
                return Err(Error::BlindQuadrature { theta, omega: w });
            }
            let imp = point.imprecision(theta);
            Ok(imp + (s - 0.5) / (gain * sampling_response(w, psd.dt)))
        })
        .collect()
}

/// Frequency window and band width for [`compare_to_analytic`].
#[derive(Debug, Clone, Copy)]
pub struct ComparisonOptions {
    pub center: f64,
    pub half_span: f64,
    pub band_width: f64,
}

impl ComparisonOptions {
    /// `bands` equal bands covering ±`linewidths` broadened linewidths
    /// around the effective resonance.
    pub fn around_resonance(sys: &SystemParams, linewidths: f64, bands: usize) -> Result<Self> {
        let center = effective_resonance(sys)?.frequency;
        let half_span = linewidths * broadened_linewidth(sys)?;
        Ok(Self {
            center,
            half_span,
            band_width: 2.0 * half_span / bands.max(1) as f64,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BandComparison {
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub bins: usize,
    pub estimated: f64,
    pub analytic: f64,
}

impl BandComparison {
    pub fn relative_error(&self) -> f64 {
        self.estimated / self.analytic - 1.0
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub theta: f64,
    pub bands: Vec<BandComparison>,
    pub segments: usize,
}

impl ComparisonReport {
    /// Root-mean-square relative deviation across bands.
    pub fn rms_relative(&self) -> f64 {
        let n = self.bands.len().max(1) as f64;
        (self.bands.iter().map(|b| b.relative_error().powi(2)).sum::<f64>() / n).sqrt()
    }

    pub fn max_relative(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.relative_error().abs())
            .fold(0.0, f64::max)
    }
}

/// Band-averaged comparison of a simulated photocurrent PSD with the
/// analytic measured displacement spectrum.
pub fn compare_to_analytic(
    psd: &PsdEstimate,
    sys: &SystemParams,
    theta: f64,
    options: ComparisonOptions,
) -> Result<ComparisonReport> {
    if !(options.band_width > 0.0) || !(options.half_span > 0.0) {
        return Err(Error::invalid("comparison", "band width and span must be > 0"));
    }
    let lo = options.center - options.half_span;
    let n_bands = ((2.0 * options.half_span) / options.band_width).round().max(1.0) as usize;
    let estimate = displacement_estimate(psd, sys, theta)?;
    let mut bands = Vec::with_capacity(n_bands);
    for b in 0..n_bands {
        let b_lo = lo + b as f64 * options.band_width;
        let b_hi = b_lo + options.band_width;
        let mut est = 0.0;
        let mut ana = 0.0;
        let mut bins = 0;
        for (k, &w) in psd.omega.iter().enumerate() {
            if w < b_lo || w >= b_hi {
                continue;
            }
            est += estimate[k];
            ana += SpectralPoint::new(sys, w)?.total(theta);
            bins += 1;
        }
        if bins == 0 {
            continue;
        }
        bands.push(BandComparison {
            omega_lo: b_lo,
            omega_hi: b_hi,
            bins,
            estimated: est / bins as f64,
            analytic: ana / bins as f64,
        });
    }
    if bands.is_empty() {
        return Err(Error::invalid("comparison", "no PSD bins inside the comparison window"));
    }
    Ok(ComparisonReport {
        theta,
        bands,
        segments: psd.segments,
    })
}
