//! First-order prediction of the quad-cell signal from weak values.
//!
//! For small drives the quad-cell difference is
//!
//! ```text
//! q(t) = P * kappa * sum_m Re(w_m) * d_m(t)
//! ```
//!
//! where P is the post-selection probability, kappa the quad-cell response
//! per unit displacement of a unit-power Gaussian, w_m the weak value of the
//! path projector at mirror m, and d_m(t) the displacement mirror m imprints
//! on the detector frame, geometric sign included. This is an independent
//! route to the same observable the field engine computes exactly, and the
//! two must agree to second order in the drive amplitudes.
//!
//! Only Re(w) enters: every scenario covered here has real weak values. The
//! ramp-coupled imaginary channel is out of scope.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::field::TimeSeries;
use crate::optics::{orientation, Amp, Mirror, MirrorDrive, NetworkSpec};
use crate::state::{post_selection_probability, weak_value};

/// Quad-cell response per unit displacement of a unit-power Gaussian:
/// d/dd erf(sqrt(2) d) at d = 0.
pub fn kappa() -> f64 {
    2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI.sqrt()
}

/// Weak values, drives and the detection probability of one network, frozen
/// for fast evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderModel {
    pub kappa: f64,
    pub weak_values: BTreeMap<Mirror, Amp>,
    pub post_selection_prob: f64,
    pub drives: Vec<MirrorDrive>,
}

impl FirstOrderModel {
    /// Fails with `PostSelectionSingular` when the pre- and post-selected
    /// states are orthogonal and weak values do not exist.
    pub fn from_network(net: &NetworkSpec) -> Result<FirstOrderModel> {
        let mut weak_values = BTreeMap::new();
        for mirror in Mirror::ALL {
            weak_values.insert(mirror, weak_value(net, mirror)?);
        }
        Ok(FirstOrderModel {
            kappa: kappa(),
            weak_values,
            post_selection_prob: post_selection_probability(net),
            drives: net.drives.clone(),
        })
    }

    /// First-order quad-cell difference at time `t`.
    pub fn predict_q(&self, t: f64) -> f64 {
        let mut shift = 0.0;
        for drive in &self.drives {
            let w = self.weak_values.get(&drive.mirror).copied().unwrap_or_default();
            let displacement = orientation(drive.mirror) * drive.ramp_at(t) * drive.lever;
            shift += w.re * displacement;
        }
        self.post_selection_prob * self.kappa * shift
    }

    /// Prediction sampled like [`crate::field::run_timeseries`]; the power
    /// channel is the zeroth-order constant.
    pub fn predict_series(&self, n_samples: usize) -> TimeSeries {
        let q = (0..n_samples)
            .map(|k| self.predict_q(k as f64 / n_samples as f64))
            .collect();
        TimeSeries {
            q,
            p: vec![self.post_selection_prob; n_samples],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gaussian_mode, perturb, quad_signal, Grid};
    use crate::optics::{build_network, NetworkSpec};

    fn drive(mirror: Mirror, freq: u32, g0: f64, phase: f64) -> MirrorDrive {
        MirrorDrive { mirror, freq, g0, phase, lever: 1.0 }
    }

    fn model_with(drives: Vec<MirrorDrive>) -> FirstOrderModel {
        let net = build_network(NetworkSpec { drives, ..NetworkSpec::default() }).unwrap();
        FirstOrderModel::from_network(&net).unwrap()
    }

    #[test]
    fn kappa_matches_a_numerical_derivative_of_the_quad_response() {
        let grid = Grid::default_grid();
        let mode = gaussian_mode(&grid);
        let h = 1e-5;
        let plus = quad_signal(&grid, &perturb(&grid, &mode, 0.0, h).unwrap());
        let minus = quad_signal(&grid, &perturb(&grid, &mode, 0.0, -h).unwrap());
        let derivative = (plus - minus) / (2.0 * h);
        assert!((derivative - kappa()).abs() < 1e-9);
        assert!((kappa() - 1.5958).abs() < 1e-4);
    }

    #[test]
    fn all_drives_quiet_means_no_signal() {
        let model = model_with(vec![]);
        for k in 0..16 {
            assert_eq!(model.predict_q(k as f64 / 16.0), 0.0);
        }
    }

    #[test]
    fn single_c_drive_is_a_pure_tone_of_the_expected_amplitude() {
        let g0 = 1e-3;
        let model = model_with(vec![drive(Mirror::C, 34, g0, 0.0)]);
        let expected = model.post_selection_prob * kappa() * g0;
        let series = model.predict_series(256);
        let peak = series.q.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - expected).abs() < 1e-6 * expected.abs().max(1e-300));
        let mag = crate::spectra::single_bin(&series, 34).unwrap();
        assert!((mag - expected * 256.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_rotations_cancel_and_equal_rotations_double() {
        let g0 = 1e-3;
        // opposite rotations: the -1 weak value at B meets a displacement of
        // the same detector-frame sign as A's, so the two terms cancel
        let anti = model_with(vec![
            drive(Mirror::A, 30, g0, 0.0),
            drive(Mirror::B, 30, g0, std::f64::consts::PI),
        ]);
        // equal rotations land on opposite sides and the terms add
        let inphase = model_with(vec![
            drive(Mirror::A, 30, g0, 0.0),
            drive(Mirror::B, 30, g0, 0.0),
        ]);
        let single = model_with(vec![drive(Mirror::A, 30, g0, 0.0)]);
        for k in 0..64 {
            let t = k as f64 / 64.0;
            // residue comes from rounding pi in the drive phase
            assert!(anti.predict_q(t).abs() < 1e-16);
            assert!((inphase.predict_q(t) - 2.0 * single.predict_q(t)).abs() < 1e-18);
        }
    }

    #[test]
    fn drives_on_e_and_f_contribute_nothing() {
        let model = model_with(vec![
            drive(Mirror::E, 36, 1e-3, 0.0),
            drive(Mirror::F, 38, 1e-3, 0.0),
        ]);
        for k in 0..32 {
            assert_eq!(model.predict_q(k as f64 / 32.0), 0.0);
        }
    }

    #[test]
    fn prediction_is_exactly_linear_in_each_drive_amplitude() {
        let base = model_with(vec![drive(Mirror::C, 34, 5e-4, 0.3)]);
        let doubled = model_with(vec![drive(Mirror::C, 34, 1e-3, 0.3)]);
        for k in 0..64 {
            let t = k as f64 / 64.0;
            assert_eq!(2.0 * base.predict_q(t), doubled.predict_q(t));
        }
    }

    #[test]
    fn blocked_network_has_no_first_order_model() {
        let net = build_network(NetworkSpec { block_c: true, ..NetworkSpec::default() }).unwrap();
        assert!(FirstOrderModel::from_network(&net).is_err());
    }
}
