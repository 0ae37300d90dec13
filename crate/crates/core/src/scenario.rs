//! Built-in experiment configurations, the runner that ties the engines
//! together, parameter sweeps, and the config / report / CSV formats.
//!
//! Three built-ins cover the configurations of interest:
//! - `danan-original`: all five mirrors vibrate at distinct frequencies;
//! - `antiphase-ab`: A and B share one frequency with opposite rotations,
//!   with C kept vibrating as an in-band positive control;
//! - `blocked-lower`: the lower path is blocked.
//!
//! Config documents are strict JSON: unknown keys are errors, so archived
//! configs stay unambiguous.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::FirstOrderModel;
use crate::error::{Error, Result};
use crate::field::{dark_port_mean_power, run_timeseries, Grid, TimeSeries};
use crate::optics::{build_network, Mirror, MirrorDrive, NetworkSpec};
use crate::spectra::{
    fit_slope, power_spectrum_with, single_bin_of, Peak, SlopeFit, SpectrumConfig, SpectrumReport,
};
use crate::state::{post_selection_overlap, weak_value};

pub const BUILTIN_NAMES: [&str; 3] = ["danan-original", "antiphase-ab", "blocked-lower"];

const DEFAULT_G0: f64 = 1e-3;
const DEFAULT_LEVER: f64 = 1.0;
const DEFAULT_N_SAMPLES: usize = 4096;

/// A fully-resolved experiment: network, grid, sampling, optional sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub net: NetworkSpec,
    pub grid: Grid,
    pub n_samples: usize,
    pub sweep: Option<(ParamPath, Vec<f64>)>,
}

/// Addressable scalar parameters for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamPath {
    DriveG0(Mirror),
    LeakEps,
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamPath::DriveG0(m) => write!(f, "drives.{m}.g0"),
            ParamPath::LeakEps => write!(f, "leak_eps"),
        }
    }
}

impl FromStr for ParamPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "leak_eps" {
            return Ok(ParamPath::LeakEps);
        }
        let parts: Vec<&str> = s.split('.').collect();
        if let ["drives", mirror, "g0"] = parts.as_slice() {
            let mirror =
                Mirror::from_str(mirror).map_err(|_| Error::InvalidParamPath(s.to_string()))?;
            return Ok(ParamPath::DriveG0(mirror));
        }
        Err(Error::InvalidParamPath(s.to_string()))
    }
}

/// Adjustments applied on top of a built-in scenario.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Set every drive's g0 before per-mirror values apply.
    pub g0_all: Option<f64>,
    /// Per-mirror g0.
    pub g0: Vec<(Mirror, f64)>,
    pub leak_eps: Option<f64>,
    pub block_c: Option<bool>,
    pub n_samples: Option<usize>,
    pub grid: Option<Grid>,
}

fn drive(mirror: Mirror, freq: u32) -> MirrorDrive {
    MirrorDrive { mirror, freq, g0: DEFAULT_G0, phase: 0.0, lever: DEFAULT_LEVER }
}

fn danan_drives() -> Vec<MirrorDrive> {
    vec![
        drive(Mirror::A, 30),
        drive(Mirror::B, 32),
        drive(Mirror::C, 34),
        drive(Mirror::E, 36),
        drive(Mirror::F, 38),
    ]
}

/// Constructs a built-in scenario with optional overrides.
pub fn build_scenario(name: &str, overrides: &Overrides) -> Result<Scenario> {
    let mut net = match name {
        "danan-original" => NetworkSpec { drives: danan_drives(), ..NetworkSpec::default() },
        "antiphase-ab" => {
            let mut drives = danan_drives();
            drives[0] = drive(Mirror::A, 30);
            drives[1] = MirrorDrive {
                phase: std::f64::consts::PI,
                ..drive(Mirror::B, 30)
            };
            NetworkSpec { drives, ..NetworkSpec::default() }
        }
        "blocked-lower" => NetworkSpec {
            drives: danan_drives(),
            block_c: true,
            ..NetworkSpec::default()
        },
        other => return Err(Error::UnknownScenario(other.to_string())),
    };

    if let Some(g0) = overrides.g0_all {
        if !g0.is_finite() || g0 < 0.0 {
            return Err(Error::InvalidOverride(format!("g0 must be >= 0, got {g0}")));
        }
        for d in &mut net.drives {
            d.g0 = g0;
        }
    }
    for &(mirror, g0) in &overrides.g0 {
        if !g0.is_finite() || g0 < 0.0 {
            return Err(Error::InvalidOverride(format!("g0 must be >= 0, got {g0}")));
        }
        match net.drives.iter_mut().find(|d| d.mirror == mirror) {
            Some(d) => d.g0 = g0,
            None => {
                return Err(Error::InvalidOverride(format!("no drive on mirror {mirror}")));
            }
        }
    }
    if let Some(leak) = overrides.leak_eps {
        net.leak_eps = leak;
    }
    if let Some(block) = overrides.block_c {
        net.block_c = block;
    }

    let net = build_network(net).map_err(|e| Error::InvalidOverride(e.to_string()))?;
    let grid = overrides.grid.unwrap_or_else(Grid::default_grid);
    let n_samples = overrides.n_samples.unwrap_or(DEFAULT_N_SAMPLES);
    net.check_nyquist(n_samples)?;

    Ok(Scenario { name: name.to_string(), net, grid, n_samples, sweep: None })
}

// ---------------------------------------------------------------------------
// config documents

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub network: NetworkConfig,
    pub drives: Vec<MirrorDrive>,
    pub grid: GridConfig,
    pub sampling: SamplingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub outer_t: f64,
    pub inner_t1: f64,
    pub inner_t2: f64,
    pub inner_phase: f64,
    pub outer_phase: f64,
    pub block_c: bool,
    pub leak_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: String,
    pub values: Vec<f64>,
}

impl Scenario {
    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            name: self.name.clone(),
            network: NetworkConfig {
                outer_t: self.net.outer_t,
                inner_t1: self.net.inner_t1,
                inner_t2: self.net.inner_t2,
                inner_phase: self.net.inner_phase,
                outer_phase: self.net.outer_phase,
                block_c: self.net.block_c,
                leak_eps: self.net.leak_eps,
            },
            drives: self.net.drives.clone(),
            grid: GridConfig {
                n_points: self.grid.n_points(),
                half_width: self.grid.half_width(),
            },
            sampling: SamplingConfig { n_samples: self.n_samples },
            sweep: self
                .sweep
                .as_ref()
                .map(|(param, values)| SweepConfig {
                    param: param.to_string(),
                    values: values.clone(),
                }),
        }
    }

    pub fn from_config(config: ScenarioConfig) -> Result<Scenario> {
        let net = build_network(NetworkSpec {
            outer_t: config.network.outer_t,
            inner_t1: config.network.inner_t1,
            inner_t2: config.network.inner_t2,
            inner_phase: config.network.inner_phase,
            outer_phase: config.network.outer_phase,
            block_c: config.network.block_c,
            leak_eps: config.network.leak_eps,
            drives: config.drives,
        })?;
        let grid = Grid::new(config.grid.n_points, config.grid.half_width)?;
        net.check_nyquist(config.sampling.n_samples)?;
        let sweep = match config.sweep {
            None => None,
            Some(s) => Some((ParamPath::from_str(&s.param)?, s.values)),
        };
        Ok(Scenario {
            name: config.name,
            net,
            grid,
            n_samples: config.sampling.n_samples,
            sweep,
        })
    }
}

/// Serializes a scenario as its archival config document.
pub fn emit_config(scenario: &Scenario) -> String {
    let mut doc = serde_json::to_string_pretty(&scenario.to_config())
        .expect("scenario config serializes");
    doc.push('\n');
    doc
}

/// Strict parse of a config document.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let config: ScenarioConfig =
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Scenario::from_config(config)
}

/// Loads a scenario by built-in name or from a config file on disk.
pub fn load_scenario(spec: &str) -> Result<Scenario> {
    if BUILTIN_NAMES.contains(&spec) {
        return build_scenario(spec, &Overrides::default());
    }
    let path = std::path::Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{spec}: {e}")))?;
        return parse_config(&text);
    }
    Err(Error::UnknownScenario(spec.to_string()))
}

// ---------------------------------------------------------------------------
// reports

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReIm {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub pass: bool,
    pub measured: String,
}

/// Machine-readable summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    /// None when the post-selection is singular and weak values are undefined.
    pub weak_values: Option<BTreeMap<String, ReIm>>,
    /// Magnitude of the static amplitude at the inner output toward F.
    pub dark_port_residual: f64,
    pub peaks: Vec<Peak>,
    pub slopes: Vec<SlopeFit>,
    pub verdicts: Vec<Verdict>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        let mut doc = serde_json::to_string_pretty(self).expect("report serializes");
        doc.push('\n');
        doc
    }
}

/// Everything a run produces: the report plus the raw spectrum and series.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: RunReport,
    pub spectrum: SpectrumReport,
    pub timeseries: TimeSeries,
    pub warnings: Vec<String>,
}

fn weak_value_map(net: &NetworkSpec) -> Option<BTreeMap<String, ReIm>> {
    let mut map = BTreeMap::new();
    for mirror in Mirror::ALL {
        match weak_value(net, mirror) {
            Ok(w) => {
                // + 0.0 folds negative zeros out of the archival record
                map.insert(mirror.to_string(), ReIm { re: w.re + 0.0, im: w.im + 0.0 });
            }
            Err(_) => return None,
        }
    }
    Some(map)
}

fn watched_freqs(net: &NetworkSpec) -> Vec<u32> {
    net.drives.iter().map(|d| d.freq).collect()
}

fn q_power_at(spectrum: &SpectrumReport, freq: u32) -> f64 {
    spectrum.bins[freq as usize].q_power
}

fn db_ratio(reference: f64, value: f64) -> f64 {
    10.0 * (reference / value.max(f64::MIN_POSITIVE)).log10()
}

/// Largest drive amplitude of a network; the small parameter of the
/// first-order comparison.
fn max_g0(net: &NetworkSpec) -> f64 {
    net.drives.iter().map(|d| d.g0).fold(0.0, f64::max)
}

fn first_order_agreement(scenario: &Scenario, ts: &TimeSeries) -> Result<Verdict> {
    let model = FirstOrderModel::from_network(&scenario.net)?;
    let predicted = model.predict_series(scenario.n_samples);
    let max_pred = predicted.q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_err = ts
        .q
        .iter()
        .zip(predicted.q.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let bound = 5.0 * max_g0(&scenario.net) * max_pred + 1e-9;
    Ok(Verdict {
        claim: "first-order-agreement".into(),
        pass: max_err <= bound,
        measured: format!("max|q_field - q_analytic| = {max_err:.3e} (bound {bound:.3e})"),
    })
}

fn danan_verdicts(
    scenario: &Scenario,
    ts: &TimeSeries,
    spectrum: &SpectrumReport,
) -> Result<Vec<Verdict>> {
    let mut verdicts = Vec::new();

    let driven = [30u32, 32, 34];
    let powers: Vec<f64> = driven.iter().map(|&f| q_power_at(spectrum, f)).collect();
    verdicts.push(Verdict {
        claim: "peaks-at-driven-paths-abc".into(),
        pass: powers.iter().all(|&p| p > spectrum.threshold),
        measured: format!(
            "q_power(30, 32, 34) = ({:.3e}, {:.3e}, {:.3e}), threshold {:.3e}",
            powers[0], powers[1], powers[2], spectrum.threshold
        ),
    });

    let quiet = [36u32, 38];
    let dbs: Vec<f64> = quiet
        .iter()
        .map(|&f| db_ratio(spectrum.threshold, q_power_at(spectrum, f)))
        .collect();
    verdicts.push(Verdict {
        claim: "no-peaks-at-inner-entry-exit".into(),
        pass: dbs.iter().all(|&db| db >= 40.0),
        measured: format!("bins 36, 38 sit ({:.1}, {:.1}) dB below threshold", dbs[0], dbs[1]),
    });

    let residual = scenario.net.dark_port_amplitude().norm();
    verdicts.push(Verdict {
        claim: "static-dark-port".into(),
        pass: residual <= 1e-12,
        measured: format!("|F amplitude| = {residual:.3e}"),
    });

    verdicts.push(first_order_agreement(scenario, ts)?);
    Ok(verdicts)
}

fn antiphase_verdicts(
    scenario: &Scenario,
    ts: &TimeSeries,
    spectrum: &SpectrumReport,
) -> Result<Vec<Verdict>> {
    let mut verdicts = Vec::new();

    // single-drive reference: only mirror A vibrating, same amplitude
    let mut reference = scenario.clone();
    for d in &mut reference.net.drives {
        if d.mirror != Mirror::A {
            d.g0 = 0.0;
        }
    }
    let ref_ts = run_timeseries(&reference.net, &reference.grid, reference.n_samples)?;
    let ref_spectrum =
        power_spectrum_with(&ref_ts, &SpectrumConfig::default(), &watched_freqs(&reference.net));

    let common = q_power_at(spectrum, 30);
    let ref_power = q_power_at(&ref_spectrum, 30);
    let db = db_ratio(ref_power, common);
    verdicts.push(Verdict {
        claim: "common-bin-suppressed-40db".into(),
        pass: db >= 40.0,
        measured: format!(
            "q_power(30) = {common:.3e} vs single-drive {ref_power:.3e}: {db:.1} dB down"
        ),
    });

    let control = q_power_at(spectrum, 34);
    verdicts.push(Verdict {
        claim: "control-peak-survives".into(),
        pass: control > spectrum.threshold,
        measured: format!("q_power(34) = {control:.3e}, threshold {:.3e}", spectrum.threshold),
    });

    let g0 = max_g0(&scenario.net);
    let dark = dark_port_mean_power(&scenario.net, &scenario.grid, scenario.n_samples)?;
    let bound = 1e-6 * g0 * g0;
    verdicts.push(Verdict {
        claim: "dark-port-undisturbed".into(),
        pass: dark <= bound,
        measured: format!("mean dark-port power {dark:.3e} (quadratic bound {bound:.3e})"),
    });

    verdicts.push(first_order_agreement(scenario, ts)?);
    Ok(verdicts)
}

fn blocked_verdicts(
    scenario: &Scenario,
    ts: &TimeSeries,
    spectrum: &SpectrumReport,
) -> Result<Vec<Verdict>> {
    let mut verdicts = Vec::new();

    let loudest = spectrum
        .bins
        .iter()
        .skip(1)
        .map(|b| b.q_power)
        .fold(0.0f64, f64::max);
    verdicts.push(Verdict {
        claim: "no-peaks-anywhere".into(),
        pass: loudest <= spectrum.threshold,
        measured: format!(
            "loudest bin {loudest:.3e} vs threshold {:.3e}",
            spectrum.threshold
        ),
    });

    let mean_power = ts.p.iter().sum::<f64>() / ts.p.len() as f64;
    verdicts.push(Verdict {
        claim: "detector-dark".into(),
        pass: mean_power <= 1e-4,
        measured: format!("mean detector power {mean_power:.3e} (open network: 1/9)"),
    });

    let overlap = post_selection_overlap(&scenario.net).norm();
    verdicts.push(Verdict {
        claim: "post-selection-singular".into(),
        pass: overlap <= 1e-12,
        measured: format!("|<post|pre>| = {overlap:.3e}"),
    });

    Ok(verdicts)
}

/// Runs a scenario: field time series, spectrum, weak values and verdicts.
/// Deterministic: identical inputs produce identical reports.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    let warnings = scenario.net.warnings();
    let ts = run_timeseries(&scenario.net, &scenario.grid, scenario.n_samples)?;
    let spectrum =
        power_spectrum_with(&ts, &SpectrumConfig::default(), &watched_freqs(&scenario.net));

    let verdicts = match scenario.name.as_str() {
        "danan-original" => danan_verdicts(scenario, &ts, &spectrum)?,
        "antiphase-ab" => antiphase_verdicts(scenario, &ts, &spectrum)?,
        "blocked-lower" => blocked_verdicts(scenario, &ts, &spectrum)?,
        _ => Vec::new(),
    };

    let report = RunReport {
        scenario: scenario.name.clone(),
        weak_values: weak_value_map(&scenario.net),
        dark_port_residual: scenario.net.dark_port_amplitude().norm(),
        peaks: spectrum.peaks.clone(),
        slopes: Vec::new(),
        verdicts,
    };
    Ok(RunOutput { report, spectrum, timeseries: ts, warnings })
}

/// Observable extracted per sweep value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMetric {
    /// |DFT| of the quad channel at the swept drive's frequency.
    QuadBinAtDriveFreq,
    /// Mean detector power over the window.
    MeanDetectorPower,
    /// |DFT| of the power channel at twice the swept drive's frequency, where
    /// a dark detector first responds.
    PowerBinAtTwiceDriveFreq,
    /// Mean power leaking from the inner dark port.
    DarkPortMeanPower,
}

impl SweepMetric {
    fn default_for(param: &ParamPath) -> SweepMetric {
        match param {
            ParamPath::DriveG0(_) => SweepMetric::QuadBinAtDriveFreq,
            ParamPath::LeakEps => SweepMetric::MeanDetectorPower,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SweepMetric::QuadBinAtDriveFreq => "quad-bin",
            SweepMetric::MeanDetectorPower => "mean-power",
            SweepMetric::PowerBinAtTwiceDriveFreq => "power-bin-2f",
            SweepMetric::DarkPortMeanPower => "dark-port-power",
        }
    }
}

fn set_param(net: &mut NetworkSpec, param: &ParamPath, value: f64) -> Result<()> {
    match param {
        ParamPath::DriveG0(mirror) => {
            match net.drives.iter_mut().find(|d| d.mirror == *mirror) {
                Some(d) => {
                    d.g0 = value;
                    Ok(())
                }
                None => Err(Error::InvalidParamPath(format!(
                    "scenario has no drive on mirror {mirror}"
                ))),
            }
        }
        ParamPath::LeakEps => {
            net.leak_eps = value;
            Ok(())
        }
    }
}

/// Runs the scenario once per value of the swept parameter, extracts the
/// metric, and fits the log-log slope.
pub fn sweep(
    scenario: &Scenario,
    param: &ParamPath,
    values: &[f64],
    metric: Option<SweepMetric>,
) -> Result<RunOutput> {
    if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::InvalidConfig("sweep values must be positive".into()));
    }
    let metric = metric.unwrap_or_else(|| SweepMetric::default_for(param));
    let drive_freq = match param {
        ParamPath::DriveG0(mirror) => match scenario.net.drive(*mirror) {
            Some(d) => Some(d.freq),
            None => {
                return Err(Error::InvalidParamPath(format!(
                    "scenario has no drive on mirror {mirror}"
                )))
            }
        },
        ParamPath::LeakEps => None,
    };
    if matches!(
        metric,
        SweepMetric::QuadBinAtDriveFreq | SweepMetric::PowerBinAtTwiceDriveFreq
    ) && drive_freq.is_none()
    {
        return Err(Error::InvalidConfig(format!(
            "metric {} needs a swept drive frequency",
            metric.label()
        )));
    }

    let mut points = Vec::with_capacity(values.len());
    let mut last: Option<(TimeSeries, SpectrumReport)> = None;
    for &value in values {
        let mut net = scenario.net.clone();
        set_param(&mut net, param, value)?;
        let net = build_network(net)?;
        let observed = match metric {
            SweepMetric::DarkPortMeanPower => {
                dark_port_mean_power(&net, &scenario.grid, scenario.n_samples)?
            }
            _ => {
                let ts = run_timeseries(&net, &scenario.grid, scenario.n_samples)?;
                let value = match metric {
                    SweepMetric::QuadBinAtDriveFreq => {
                        single_bin_of(&ts.q, drive_freq.unwrap())?
                    }
                    SweepMetric::MeanDetectorPower => {
                        ts.p.iter().sum::<f64>() / ts.p.len() as f64
                    }
                    SweepMetric::PowerBinAtTwiceDriveFreq => {
                        single_bin_of(&ts.p, 2 * drive_freq.unwrap())?
                    }
                    SweepMetric::DarkPortMeanPower => unreachable!(),
                };
                let spectrum = power_spectrum_with(
                    &ts,
                    &SpectrumConfig::default(),
                    &watched_freqs(&net),
                );
                last = Some((ts, spectrum));
                value
            }
        };
        points.push((value, observed));
    }

    let (exponent, residual) = fit_slope(&points)?;
    let slope = SlopeFit {
        param: format!("{param}->{}", metric.label()),
        exponent,
        residual,
    };

    let (timeseries, mut spectrum) = match last {
        Some(pair) => pair,
        None => {
            // dark-port sweeps never ran the detector series; do one run at
            // the last value so the output is still a complete record
            let mut net = scenario.net.clone();
            set_param(&mut net, param, *values.last().unwrap())?;
            let net = build_network(net)?;
            let ts = run_timeseries(&net, &scenario.grid, scenario.n_samples)?;
            let spectrum =
                power_spectrum_with(&ts, &SpectrumConfig::default(), &watched_freqs(&net));
            (ts, spectrum)
        }
    };
    spectrum.slopes = Some(vec![slope.clone()]);

    let report = RunReport {
        scenario: scenario.name.clone(),
        weak_values: weak_value_map(&scenario.net),
        dark_port_residual: scenario.net.dark_port_amplitude().norm(),
        peaks: spectrum.peaks.clone(),
        slopes: vec![slope],
        verdicts: Vec::new(),
    };
    Ok(RunOutput {
        report,
        spectrum,
        timeseries,
        warnings: scenario.net.warnings(),
    })
}

// ---------------------------------------------------------------------------
// file formats

/// `freq_cycles,q_power,p_power`, 17 significant digits so doubles round-trip.
pub fn spectrum_csv(spectrum: &SpectrumReport) -> String {
    let mut out = String::from("freq_cycles,q_power,p_power\n");
    for bin in &spectrum.bins {
        out.push_str(&format!(
            "{},{:.16e},{:.16e}\n",
            bin.freq, bin.q_power, bin.p_power
        ));
    }
    out
}

/// `t,q,p` per sample, 17 significant digits.
pub fn timeseries_csv(ts: &TimeSeries) -> String {
    let n = ts.n_samples();
    let mut out = String::from("t,q,p\n");
    for k in 0..n {
        let t = k as f64 / n as f64;
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t, ts.q[k], ts.p[k]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::forward_ports;

    fn small_overrides() -> Overrides {
        // keep unit tests fast; acceptance runs use the defaults
        Overrides {
            n_samples: Some(512),
            grid: Some(Grid::new(1024, 8.0).unwrap()),
            ..Overrides::default()
        }
    }

    #[test]
    fn builtins_build_and_satisfy_their_invariants() {
        for name in BUILTIN_NAMES {
            let s = build_scenario(name, &Overrides::default()).unwrap();
            assert_eq!(s.name, name);
            s.net.validate().unwrap();
            assert!(s.net.warnings().is_empty());
        }
        let anti = build_scenario("antiphase-ab", &Overrides::default()).unwrap();
        let a = anti.net.drive(Mirror::A).unwrap();
        let b = anti.net.drive(Mirror::B).unwrap();
        assert_eq!(a.freq, b.freq);
        assert!((b.phase - a.phase - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(a.lever, b.lever);

        let blocked = build_scenario("blocked-lower", &Overrides::default()).unwrap();
        assert!(blocked.net.block_c);

        assert!(matches!(
            build_scenario("no-such-thing", &Overrides::default()),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn g0_override_quiets_the_network() {
        let s = build_scenario(
            "danan-original",
            &Overrides { g0_all: Some(0.0), ..Overrides::default() },
        )
        .unwrap();
        assert!(s.net.drives.iter().all(|d| d.g0 == 0.0));
        let p = forward_ports(&s.net);
        assert!((p.detector.norm_sqr() - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn bad_overrides_are_rejected() {
        assert!(matches!(
            build_scenario(
                "danan-original",
                &Overrides { g0_all: Some(-1.0), ..Overrides::default() }
            ),
            Err(Error::InvalidOverride(_))
        ));
        assert!(matches!(
            build_scenario(
                "danan-original",
                &Overrides { g0: vec![(Mirror::A, f64::NAN)], ..Overrides::default() }
            ),
            Err(Error::InvalidOverride(_))
        ));
    }

    #[test]
    fn emit_then_parse_is_identity_on_builtins() {
        for name in BUILTIN_NAMES {
            let original = build_scenario(name, &Overrides::default()).unwrap();
            let parsed = parse_config(&emit_config(&original)).unwrap();
            assert_eq!(original, parsed);
        }
    }

    #[test]
    fn sweep_block_round_trips_too() {
        let mut s = build_scenario("danan-original", &Overrides::default()).unwrap();
        s.sweep = Some((ParamPath::DriveG0(Mirror::A), vec![1e-4, 2e-4, 5e-4, 1e-3]));
        let parsed = parse_config(&emit_config(&s)).unwrap();
        assert_eq!(s, parsed);
    }

    #[test]
    fn unknown_config_keys_are_errors() {
        let s = build_scenario("danan-original", &Overrides::default()).unwrap();
        let doc = emit_config(&s).replace("\"name\"", "\"name\": \"x\", \"unexpected\"");
        assert!(matches!(parse_config(&doc), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn param_paths_parse_and_print() {
        assert_eq!(
            ParamPath::from_str("drives.A.g0").unwrap(),
            ParamPath::DriveG0(Mirror::A)
        );
        assert_eq!(ParamPath::from_str("leak_eps").unwrap(), ParamPath::LeakEps);
        assert!(ParamPath::from_str("drives.Q.g0").is_err());
        assert!(ParamPath::from_str("drives.A.freq").is_err());
        assert_eq!(ParamPath::DriveG0(Mirror::B).to_string(), "drives.B.g0");
    }

    #[test]
    fn danan_run_passes_its_claims() {
        let s = build_scenario("danan-original", &small_overrides()).unwrap();
        let out = run(&s).unwrap();
        assert!(out.report.all_pass(), "verdicts: {:#?}", out.report.verdicts);
        let wv = out.report.weak_values.as_ref().unwrap();
        assert!((wv["A"].re - 1.0).abs() < 1e-12);
        assert!((wv["B"].re + 1.0).abs() < 1e-12);
        assert!((wv["C"].re - 1.0).abs() < 1e-12);
        assert!(wv["E"].re.abs() < 1e-12 && wv["F"].re.abs() < 1e-12);
        assert_eq!(out.report.verdicts.len(), 4);
    }

    #[test]
    fn antiphase_run_passes_its_claims() {
        let s = build_scenario("antiphase-ab", &small_overrides()).unwrap();
        let out = run(&s).unwrap();
        assert!(out.report.all_pass(), "verdicts: {:#?}", out.report.verdicts);
    }

    #[test]
    fn blocked_run_passes_its_claims_without_weak_values() {
        let s = build_scenario("blocked-lower", &small_overrides()).unwrap();
        let out = run(&s).unwrap();
        assert!(out.report.all_pass(), "verdicts: {:#?}", out.report.verdicts);
        assert!(out.report.weak_values.is_none());
    }

    #[test]
    fn reports_are_deterministic() {
        let s = build_scenario("danan-original", &small_overrides()).unwrap();
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert_eq!(spectrum_csv(&a.spectrum), spectrum_csv(&b.spectrum));
        assert_eq!(a.timeseries, b.timeseries);
    }

    #[test]
    fn csv_doubles_round_trip_losslessly() {
        let s = build_scenario("danan-original", &small_overrides()).unwrap();
        let out = run(&s).unwrap();
        let csv = spectrum_csv(&out.spectrum);
        for (line, bin) in csv.lines().skip(1).zip(out.spectrum.bins.iter()) {
            let fields: Vec<&str> = line.split(',').collect();
            let q: f64 = fields[1].parse().unwrap();
            let p: f64 = fields[2].parse().unwrap();
            assert_eq!(q.to_bits(), bin.q_power.to_bits());
            assert_eq!(p.to_bits(), bin.p_power.to_bits());
        }
    }

    #[test]
    fn leak_sweep_measures_a_clean_square_law() {
        let mut s = build_scenario(
            "blocked-lower",
            &Overrides {
                g0_all: Some(0.0),
                n_samples: Some(128),
                grid: Some(Grid::new(512, 8.0).unwrap()),
                ..Overrides::default()
            },
        )
        .unwrap();
        s.net.drives.clear();
        let out = sweep(
            &s,
            &ParamPath::LeakEps,
            &[1e-4, 2e-4, 5e-4, 1e-3],
            None,
        )
        .unwrap();
        let fit = &out.report.slopes[0];
        assert!((fit.exponent - 2.0).abs() < 0.01, "exponent {}", fit.exponent);
    }

    #[test]
    fn sweeping_an_undriven_mirror_is_an_error() {
        let mut s = build_scenario("danan-original", &small_overrides()).unwrap();
        s.net.drives.retain(|d| d.mirror != Mirror::E);
        assert!(matches!(
            sweep(&s, &ParamPath::DriveG0(Mirror::E), &[1e-4, 2e-4, 5e-4, 1e-3], None),
            Err(Error::InvalidParamPath(_))
        ));
    }
}
