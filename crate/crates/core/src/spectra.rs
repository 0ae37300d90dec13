//! Power spectra, peak detection and power-law slope fits.
//!
//! Drive frequencies are integer cycles per window and the window is
//! rectangular, so every tone sits exactly on a bin and leakage is absent by
//! construction. Spectra are one-sided and normalized so the bin powers of a
//! series sum to its mean square.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::TimeSeries;

/// A bin counts as a peak when its power exceeds the median bin power by this
/// factor...
pub const DEFAULT_PEAK_FACTOR: f64 = 1e6;
/// ...and also exceeds this absolute floor (mean-square units), the model's
/// stand-in for a real instrument's sensitivity.
pub const DEFAULT_SENSITIVITY_FLOOR: f64 = 1e-13;

/// Smallest observable a slope fit accepts before declaring the sweep lost to
/// rounding noise.
pub const DEGENERATE_SWEEP_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumConfig {
    pub peak_factor: f64,
    pub sensitivity_floor: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            peak_factor: DEFAULT_PEAK_FACTOR,
            sensitivity_floor: DEFAULT_SENSITIVITY_FLOOR,
        }
    }
}

/// One-sided spectral power of the quad and power channels at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinPower {
    pub freq: u32,
    pub q_power: f64,
    pub p_power: f64,
}

/// A detected or watched spectral line. `magnitude` is in tone-amplitude
/// units, not decibels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub freq: u32,
    pub magnitude: f64,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub param: String,
    pub exponent: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub bins: Vec<BinPower>,
    pub peaks: Vec<Peak>,
    pub slopes: Option<Vec<SlopeFit>>,
    /// The q-power threshold used for peak detection.
    pub threshold: f64,
}

fn one_sided_power(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mut buf: Vec<Complex64> = series.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let n2 = n as f64 * n as f64;
    (0..=n / 2)
        .map(|k| {
            let two_sided = buf[k].norm_sqr() / n2;
            if k == 0 || k == n / 2 {
                two_sided
            } else {
                2.0 * two_sided
            }
        })
        .collect()
}

/// One-sided magnitude-squared spectrum of both channels, with peak detection
/// on the quad channel.
pub fn power_spectrum(ts: &TimeSeries) -> SpectrumReport {
    power_spectrum_with(ts, &SpectrumConfig::default(), &[])
}

/// Like [`power_spectrum`], with explicit thresholds and a set of frequencies
/// to report whether or not they cleared the threshold.
pub fn power_spectrum_with(
    ts: &TimeSeries,
    config: &SpectrumConfig,
    watched: &[u32],
) -> SpectrumReport {
    let q_power = one_sided_power(&ts.q);
    let p_power = one_sided_power(&ts.p);
    let bins: Vec<BinPower> = q_power
        .iter()
        .zip(p_power.iter())
        .enumerate()
        .map(|(k, (&q, &p))| BinPower { freq: k as u32, q_power: q, p_power: p })
        .collect();

    // median over the non-DC bins
    let mut sorted: Vec<f64> = q_power[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() { 0.0 } else { sorted[sorted.len() / 2] };
    let threshold = (config.peak_factor * median).max(config.sensitivity_floor);

    let mut peaks: Vec<Peak> = Vec::new();
    for bin in bins.iter().skip(1) {
        let above = bin.q_power > threshold;
        if above || watched.contains(&bin.freq) {
            peaks.push(Peak {
                freq: bin.freq,
                magnitude: (2.0 * bin.q_power).sqrt(),
                above_threshold: above,
            });
        }
    }

    SpectrumReport { bins, peaks, slopes: None, threshold }
}

/// Magnitude of the exact discrete Fourier coefficient of the quad channel at
/// an integer frequency. A pure tone of amplitude a at its own bin reads
/// a * n_samples / 2.
pub fn single_bin(ts: &TimeSeries, freq: u32) -> Result<f64> {
    single_bin_of(&ts.q, freq)
}

/// Same, for any real series.
pub fn single_bin_of(series: &[f64], freq: u32) -> Result<f64> {
    let n = series.len();
    if freq < 1 || freq as usize >= n / 2 {
        return Err(Error::FreqOutOfRange { freq, nyquist: (n / 2) as u32 });
    }
    let step = std::f64::consts::TAU * freq as f64 / n as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for (j, &v) in series.iter().enumerate() {
        let angle = step * j as f64;
        re += v * angle.cos();
        im -= v * angle.sin();
    }
    Ok((re * re + im * im).sqrt())
}

/// Least-squares slope in log-log coordinates.
///
/// Returns (exponent, residual) where the residual is the largest relative
/// deviation of any point from the fitted law.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 4 {
        return Err(Error::InvalidConfig(format!(
            "slope fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    let mut min_y = f64::INFINITY;
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() || x <= 0.0 {
            return Err(Error::InvalidConfig(
                "slope fit needs finite points with x > 0".into(),
            ));
        }
        min_y = min_y.min(y);
    }
    if min_y <= DEGENERATE_SWEEP_FLOOR {
        return Err(Error::DegenerateSweep { min_value: min_y });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < 10.0 - 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "slope fit needs one decade of x span, got a factor of {span:.3}"
        )));
    }

    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    let residual = points
        .iter()
        .map(|&(x, y)| {
            let fitted = (intercept + slope * x.ln()).exp();
            (fitted / y - 1.0).abs()
        })
        .fold(0.0f64, f64::max);
    Ok((slope, residual))
}
