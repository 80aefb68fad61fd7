use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Hann => "hann",
        }
    }

    /// Periodic window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..n)
                .map(|k| 0.5 - 0.5 * (TWO_PI * k as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// Welch estimate of a double-sided PSD, stored for non-negative
/// frequencies `0 ..= Nyquist`.
#[derive(Debug, Clone)]
pub struct PsdEstimate {
    /// Angular frequencies of the bins, rad/s.
    pub omega: Vec<f64>,
    /// Double-sided PSD (units of signal² · s).
    pub psd: Vec<f64>,
    pub segments: usize,
    pub segment_length: usize,
    pub window: Window,
    pub dt: f64,
}

impl PsdEstimate {
    /// Bin spacing in rad/s.
    pub fn bin_width(&self) -> f64 {
        TWO_PI / (self.segment_length as f64 * self.dt)
    }

    /// Nominal relative standard error of a single bin.
    pub fn relative_uncertainty(&self) -> f64 {
        1.0 / (self.segments as f64).sqrt()
    }

    /// Weight of bin `k` when folding positive and negative frequencies.
    fn fold(&self, k: usize) -> f64 {
        if k == 0 || (self.segment_length % 2 == 0 && k == self.segment_length / 2) {
            1.0
        } else {
            2.0
        }
    }

    /// Variance contained in bins whose frequency lies in `[lo, hi]`
    /// (both signs of frequency), ∫S dΩ/2π.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        let df = self.bin_width() / TWO_PI;
        self.omega
            .iter()
            .zip(&self.psd)
            .enumerate()
            .filter(|(_, (w, _))| **w >= lo && **w <= hi)
            .map(|(k, (_, s))| self.fold(k) * s * df)
            .sum()
    }

    pub fn total_power(&self) -> f64 {
        self.band_power(0.0, f64::INFINITY)
    }

    /// Index of the bin nearest `omega`.
    pub fn nearest_bin(&self, omega: f64) -> usize {
        let k = (omega / self.bin_width()).round();
        (k.max(0.0) as usize).min(self.omega.len() - 1)
    }
}

/// Streaming Welch estimator: push samples, read the averaged PSD at the end.
pub struct WelchAccumulator {
    segment_length: usize,
    hop: usize,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<f64>,
    scratch: Vec<Complex<f64>>,
    fft_scratch: Vec<Complex<f64>>,
    sum: Vec<f64>,
    segments: usize,
    dt: f64,
}

impl WelchAccumulator {
    pub(crate) fn hop_for(segment_length: usize, overlap: f64) -> usize {
        (((1.0 - overlap) * segment_length as f64).round() as usize).max(1)
    }

    pub fn new(segment_length: usize, overlap: f64, dt: f64) -> Result<Self> {
        if segment_length < 2 {
            return Err(Error::invalid("segment_length", "must be at least 2"));
        }
        if !(0.0..=0.9).contains(&overlap) {
            return Err(Error::invalid("overlap", format!("must lie in [0, 0.9], got {overlap}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let window = Window::Hann.coefficients(segment_length);
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(segment_length);
        let fft_scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Ok(Self {
            segment_length,
            hop: Self::hop_for(segment_length, overlap),
            window,
            window_power,
            fft,
            buffer: Vec::with_capacity(segment_length),
            scratch: vec![Complex::default(); segment_length],
            fft_scratch,
            sum: vec![0.0; segment_length / 2 + 1],
            segments: 0,
            dt,
        })
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.buffer.push(x);
        if self.buffer.len() == self.segment_length {
            self.process();
            self.buffer.drain(..self.hop.min(self.segment_length));
        }
    }

    pub fn extend(&mut self, xs: &[f64]) {
        for &x in xs {
            self.push(x);
        }
    }

    fn process(&mut self) {
        for ((c, x), w) in self.scratch.iter_mut().zip(&self.buffer).zip(&self.window) {
            *c = Complex::new(x * w, 0.0);
        }
        self.fft.process_with_scratch(&mut self.scratch, &mut self.fft_scratch);
        for (s, c) in self.sum.iter_mut().zip(&self.scratch) {
            *s += c.norm_sqr();
        }
        self.segments += 1;
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn finish(self) -> Result<PsdEstimate> {
        if self.segments == 0 {
            return Err(Error::SeriesTooShort {
                len: self.buffer.len(),
                needed: self.segment_length,
            });
        }
        let norm = self.dt / (self.window_power * self.segments as f64);
        let dw = TWO_PI / (self.segment_length as f64 * self.dt);
        Ok(PsdEstimate {
            omega: (0..self.sum.len()).map(|k| k as f64 * dw).collect(),
            psd: self.sum.iter().map(|s| s * norm).collect(),
            segments: self.segments,
            segment_length: self.segment_length,
            window: Window::Hann,
            dt: self.dt,
        })
    }
}

/// Hann-windowed, overlap-averaged periodogram of `series`.
pub fn welch_psd(series: &[f64], dt: f64, segment_length: usize, overlap: f64) -> Result<PsdEstimate> {
    if series.len() < segment_length {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: segment_length,
        });
    }
    let mut acc = WelchAccumulator::new(segment_length, overlap, dt)?;
    acc.extend(series);
    acc.finish()
}
