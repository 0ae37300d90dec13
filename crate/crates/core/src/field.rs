//! Transverse-mode time-domain simulation.
//!
//! Each path carries a unit-power Gaussian mode (waist = 1). A driven mirror
//! imprints a transverse phase ramp exp(i g x) and, through its lever arm, a
//! displacement d = g * lever at the detector plane. The field terms of all
//! paths are superposed coherently per time sample, so drive-induced leakage
//! through the inner recombiner emerges from the full complex sum rather than
//! from any linearization. Displacements are applied as band-limited shifts
//! in the spectral domain.
//!
//! Time is stroboscopic: one analysis window is one time unit, sampled at
//! t_k = k / n_samples, and the optics are quasi-static within a sample.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::optics::{
    dark_port_scalars, detector_scalars, mirrors_on_path, mirrors_to_dark_port, orientation,
    transfer_after, transfer_before, Amp, Mirror, NetworkSpec, Path, LEAK_MIRRORS,
    MIRROR_REFLECTION,
};

/// Maximum phase advance per grid step a ramp may have.
pub const MAX_RAMP_PER_STEP: f64 = 0.1;

/// Symmetric 1-D transverse grid in beam-waist units, sampled at cell
/// midpoints so no node sits on the quad-cell split at x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(n_points: usize, half_width: f64) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < 32 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 32, got {n_points}"
            )));
        }
        if !half_width.is_finite() || half_width < 6.0 {
            return Err(Error::InvalidGrid(format!(
                "half_width must be >= 6 beam waists, got {half_width}"
            )));
        }
        Ok(Grid { n_points, half_width })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn position(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Default resolution: meets every tolerance budget in seconds of runtime.
    pub fn default_grid() -> Grid {
        Grid { n_points: 2048, half_width: 8.0 }
    }
}

/// Sampled transverse complex field at one time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFrame {
    pub samples: Vec<Amp>,
    pub time_index: usize,
}

/// Unit-power Gaussian mode, (2/pi)^(1/4) exp(-x^2).
pub fn gaussian_mode(grid: &Grid) -> FieldFrame {
    let norm = (2.0 / std::f64::consts::PI).powf(0.25);
    let samples = (0..grid.n_points())
        .map(|i| {
            let x = grid.position(i);
            Amp::new(norm * (-x * x).exp(), 0.0)
        })
        .collect();
    FieldFrame { samples, time_index: 0 }
}

/// Discrete total power of a frame.
pub fn total_power(grid: &Grid, frame: &FieldFrame) -> f64 {
    let h = grid.spacing();
    frame.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * h
}

/// Quad-cell difference signal: power on x > 0 minus power on x < 0.
///
/// The signed midpoint sum carries an O(h^2) error from the split at x = 0;
/// the Euler-Maclaurin end correction -(h^2/12) I'(0) removes it, leaving
/// O(h^4).
pub fn quad_signal(grid: &Grid, frame: &FieldFrame) -> f64 {
    let h = grid.spacing();
    let n = grid.n_points();
    let mid = n / 2;
    let mut upper = 0.0;
    let mut lower = 0.0;
    for (i, a) in frame.samples.iter().enumerate() {
        if i >= mid {
            upper += a.norm_sqr();
        } else {
            lower += a.norm_sqr();
        }
    }
    let intensity = |i: usize| frame.samples[i].norm_sqr();
    let slope_at_zero = (27.0 * (intensity(mid) - intensity(mid - 1))
        - (intensity(mid + 1) - intensity(mid - 2)))
        / (24.0 * h);
    (upper - lower) * h - h * h / 12.0 * slope_at_zero
}

fn check_perturbation(grid: &Grid, g: f64, d: f64) -> Result<()> {
    if !g.is_finite() || !d.is_finite() {
        return Err(Error::RampUnresolved("non-finite perturbation".into()));
    }
    if g.abs() * grid.spacing() >= MAX_RAMP_PER_STEP {
        return Err(Error::RampUnresolved(format!(
            "ramp {g:.3e} advances {:.3} rad per grid step (limit {MAX_RAMP_PER_STEP})",
            g.abs() * grid.spacing()
        )));
    }
    if d.abs() >= grid.half_width() / 2.0 {
        return Err(Error::RampUnresolved(format!(
            "displacement {d:.3e} exceeds half_width/2 = {}",
            grid.half_width() / 2.0
        )));
    }
    Ok(())
}

/// FFT plans, grid tables and the cached Gaussian spectrum shared by every
/// frame of a run.
pub struct FieldPipeline {
    grid: Grid,
    xs: Vec<f64>,
    wavenumbers: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    gauss_spectrum: Vec<Amp>,
}

impl FieldPipeline {
    pub fn new(grid: &Grid) -> FieldPipeline {
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);

        let xs: Vec<f64> = (0..n).map(|i| grid.position(i)).collect();
        let dk = std::f64::consts::TAU / (n as f64 * grid.spacing());
        let wavenumbers: Vec<f64> = (0..n)
            .map(|j| {
                let jj = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                jj * dk
            })
            .collect();

        let mut gauss_spectrum: Vec<Amp> = gaussian_mode(grid).samples;
        fft.process(&mut gauss_spectrum);

        FieldPipeline { grid: *grid, xs, wavenumbers, fft, ifft, gauss_spectrum }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// samples(x) <- samples(x - d) * exp(i g x), from a precomputed spectrum.
    fn shift_and_ramp(&self, spectrum: &[Amp], g: f64, d: f64) -> Vec<Amp> {
        let n = spectrum.len();
        let mut buf: Vec<Amp> = spectrum
            .iter()
            .zip(self.wavenumbers.iter())
            .map(|(s, &k)| s * Amp::from_polar(1.0, -k * d))
            .collect();
        self.ifft.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (b, &x) in buf.iter_mut().zip(self.xs.iter()) {
            *b *= Amp::from_polar(scale, g * x);
        }
        buf
    }

    fn accumulate_terms(&self, terms: &[(Amp, f64, f64)], time_index: usize) -> FieldFrame {
        let n = self.grid.n_points();
        let mut samples = vec![Amp::new(0.0, 0.0); n];
        for &(scalar, g, d) in terms {
            if scalar == Amp::new(0.0, 0.0) {
                continue;
            }
            let mode = self.shift_and_ramp(&self.gauss_spectrum, g, d);
            for (acc, m) in samples.iter_mut().zip(mode.iter()) {
                *acc += scalar * m;
            }
        }
        FieldFrame { samples, time_index }
    }
}

/// Applies a ramp g and displacement d to an arbitrary frame.
pub fn perturb(grid: &Grid, frame: &FieldFrame, g: f64, d: f64) -> Result<FieldFrame> {
    if frame.samples.len() != grid.n_points() {
        return Err(Error::InvalidGrid("frame length does not match grid".into()));
    }
    check_perturbation(grid, g, d)?;
    let pipeline = FieldPipeline::new(grid);
    let mut spectrum = frame.samples.clone();
    pipeline.fft.process(&mut spectrum);
    let samples = pipeline.shift_and_ramp(&spectrum, g, d);
    Ok(FieldFrame { samples, time_index: frame.time_index })
}

/// Instantaneous ramp values per mirror, evaluated from the network's drives.
pub fn drives_at(net: &NetworkSpec, t: f64) -> Vec<(Mirror, f64)> {
    net.drives.iter().map(|d| (d.mirror, d.ramp_at(t))).collect()
}

/// Accumulated (ramp, displacement) over a set of crossed mirrors. A tilt
/// maps into the detector frame with the geometric sign of its arm.
fn accumulate(net: &NetworkSpec, ramps: &[(Mirror, f64)], crossed: &[Mirror]) -> (f64, f64) {
    let mut g_total = 0.0;
    let mut d_total = 0.0;
    for &(mirror, g) in ramps {
        if crossed.contains(&mirror) {
            let drive = net.drive(mirror).expect("ramp for undeclared drive");
            let signed = orientation(mirror) * g;
            g_total += signed;
            d_total += signed * drive.lever;
        }
    }
    (g_total, d_total)
}

fn check_terms(grid: &Grid, terms: &[(Amp, f64, f64)]) -> Result<()> {
    for &(_, g, d) in terms {
        check_perturbation(grid, g, d)?;
    }
    Ok(())
}

fn detector_terms(net: &NetworkSpec, ramps: &[(Mirror, f64)]) -> Vec<(Amp, f64, f64)> {
    let scalars = detector_scalars(net);
    let mut terms = Vec::with_capacity(4);
    for (scalar, path) in [
        (scalars.path_a, Path::A),
        (scalars.path_b, Path::B),
        (scalars.path_c, Path::C),
    ] {
        let (g, d) = accumulate(net, ramps, mirrors_on_path(path));
        terms.push((scalar, g, d));
    }
    let (g, d) = accumulate(net, ramps, LEAK_MIRRORS);
    terms.push((scalars.leak, g, d));
    terms
}

fn dark_port_terms(net: &NetworkSpec, ramps: &[(Mirror, f64)]) -> Vec<(Amp, f64, f64)> {
    let scalars = dark_port_scalars(net);
    let (ga, da) = accumulate(net, ramps, mirrors_to_dark_port(Path::A));
    let (gb, db) = accumulate(net, ramps, mirrors_to_dark_port(Path::B));
    vec![
        (scalars.path_a, ga, da),
        (scalars.path_b, gb, db),
        (scalars.leak, 0.0, 0.0),
    ]
}

/// Detector-plane field for one set of instantaneous mirror ramps.
pub fn detector_frame(
    net: &NetworkSpec,
    ramps: &[(Mirror, f64)],
    grid: &Grid,
) -> Result<FieldFrame> {
    let pipeline = FieldPipeline::new(grid);
    detector_frame_with(&pipeline, net, ramps, 0)
}

/// Same as [`detector_frame`] but reusing a pipeline across frames.
pub fn detector_frame_with(
    pipeline: &FieldPipeline,
    net: &NetworkSpec,
    ramps: &[(Mirror, f64)],
    time_index: usize,
) -> Result<FieldFrame> {
    let terms = detector_terms(net, ramps);
    check_terms(pipeline.grid(), &terms)?;
    Ok(pipeline.accumulate_terms(&terms, time_index))
}

/// Field at the inner output toward F (the nominally dark port).
pub fn dark_port_frame(
    net: &NetworkSpec,
    ramps: &[(Mirror, f64)],
    grid: &Grid,
) -> Result<FieldFrame> {
    let pipeline = FieldPipeline::new(grid);
    dark_port_frame_with(&pipeline, net, ramps, 0)
}

pub fn dark_port_frame_with(
    pipeline: &FieldPipeline,
    net: &NetworkSpec,
    ramps: &[(Mirror, f64)],
    time_index: usize,
) -> Result<FieldFrame> {
    let terms = dark_port_terms(net, ramps);
    check_terms(pipeline.grid(), &terms)?;
    Ok(pipeline.accumulate_terms(&terms, time_index))
}

/// The three terminal ports of the instrument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalPort {
    Detector,
    DetectorB,
    InnerExit,
}

/// Field at any terminal port; used for energy bookkeeping.
pub fn terminal_frame(
    net: &NetworkSpec,
    ramps: &[(Mirror, f64)],
    grid: &Grid,
    port: TerminalPort,
) -> Result<FieldFrame> {
    let pipeline = FieldPipeline::new(grid);
    let after = transfer_after(net);
    let before = transfer_before(net);
    let row = match port {
        TerminalPort::Detector => after[0],
        TerminalPort::DetectorB => after[1],
        TerminalPort::InnerExit => after[2],
    };
    let mut terms = Vec::with_capacity(4);
    for path in Path::ALL {
        let scalar = row[path as usize] * before[path as usize][0];
        let crossed = match port {
            TerminalPort::InnerExit => mirrors_to_dark_port(path),
            _ => mirrors_on_path(path),
        };
        let (g, d) = accumulate(net, ramps, crossed);
        terms.push((scalar, g, d));
    }
    if !matches!(port, TerminalPort::InnerExit) {
        let t4 = Amp::new(net.outer_t.sqrt(), 0.0);
        let r4 = Amp::new(0.0, (1.0 - net.outer_t).sqrt());
        let coeff = match port {
            TerminalPort::Detector => t4,
            TerminalPort::DetectorB => r4,
            TerminalPort::InnerExit => unreachable!(),
        };
        let leak = Amp::new(net.leak_eps, 0.0) * MIRROR_REFLECTION * coeff;
        let (g, d) = accumulate(net, ramps, LEAK_MIRRORS);
        terms.push((leak, g, d));
    }
    check_terms(grid, &terms)?;
    Ok(pipeline.accumulate_terms(&terms, 0))
}

/// Quad-cell difference and total power per time sample over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl TimeSeries {
    pub fn n_samples(&self) -> usize {
        self.q.len()
    }

    /// Seeded additive Gaussian noise on both channels. Off by default and
    /// excluded from every acceptance path; exists for detector-floor studies.
    pub fn with_additive_noise(&self, seed: u64, sigma: f64) -> TimeSeries {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut normal = || {
            // Box-Muller on two uniforms
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        TimeSeries {
            q: self.q.iter().map(|v| v + sigma * normal()).collect(),
            p: self.p.iter().map(|v| v + sigma * normal()).collect(),
        }
    }
}

fn check_n_samples(n_samples: usize) -> Result<()> {
    if !n_samples.is_power_of_two() || n_samples < 8 {
        return Err(Error::InvalidConfig(format!(
            "n_samples must be a power of two >= 8, got {n_samples}"
        )));
    }
    Ok(())
}

/// Evaluates the detector field over one analysis window. Frames at distinct
/// time samples are independent and evaluated in parallel; the output does
/// not depend on evaluation order.
pub fn run_timeseries(net: &NetworkSpec, grid: &Grid, n_samples: usize) -> Result<TimeSeries> {
    check_n_samples(n_samples)?;
    net.check_nyquist(n_samples)?;
    let pipeline = FieldPipeline::new(grid);
    let rows: Result<Vec<(f64, f64)>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 / n_samples as f64;
            let ramps = drives_at(net, t);
            let frame = detector_frame_with(&pipeline, net, &ramps, k)?;
            Ok((quad_signal(grid, &frame), total_power(grid, &frame)))
        })
        .collect();
    let rows = rows?;
    Ok(TimeSeries {
        q: rows.iter().map(|r| r.0).collect(),
        p: rows.iter().map(|r| r.1).collect(),
    })
}

/// Mean power leaking from the nominally dark inner output over one window.
pub fn dark_port_mean_power(net: &NetworkSpec, grid: &Grid, n_samples: usize) -> Result<f64> {
    check_n_samples(n_samples)?;
    net.check_nyquist(n_samples)?;
    let pipeline = FieldPipeline::new(grid);
    let powers: Result<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 / n_samples as f64;
            let ramps = drives_at(net, t);
            let frame = dark_port_frame_with(&pipeline, net, &ramps, k)?;
            Ok(total_power(grid, &frame))
        })
        .collect();
    Ok(powers?.iter().sum::<f64>() / n_samples as f64)
}
