//! Element algebra (beam splitters, mirrors, phases, block, leak) and the
//! fixed nested Mach-Zehnder topology.
//!
//! Layout: an outer splitter sends one branch through a fold mirror E into an
//! inner interferometer (splitter, arm mirrors A and B, recombiner), whose
//! output toward mirror F meets the other branch (mirror C) on a final
//! splitter; one output of that splitter is the quad-cell detector.
//!
//! Conventions, fixed once for the whole crate:
//! - beam splitter of transmissivity T: transmitted amplitude sqrt(T),
//!   reflected amplitude i*sqrt(1-T);
//! - every fold mirror reflects with a factor i;
//! - path amplitudes are quoted at the plane of incidence on the mirrors.
//!
//! With a 2/3 outer splitter and 50:50 inner splitters these choices make the
//! canonical forward state proportional to (1, i, 1)/sqrt(3) on (A, B, C) and
//! leave the inner output toward F perfectly dark, with no trim phases.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Complex path amplitude.
pub type Amp = Complex64;

/// Reflection factor of an ideal fold mirror.
pub const MIRROR_REFLECTION: Amp = Amp::new(0.0, 1.0);

/// Magnitude below which a post-selection overlap counts as singular.
pub const SINGULAR_OVERLAP: f64 = 1e-12;

/// Drive amplitudes above this leave the weak-coupling regime.
pub const WEAK_REGIME_LIMIT: f64 = 0.05;

/// The five fold mirrors of the nested layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mirror {
    A,
    B,
    C,
    E,
    F,
}

impl Mirror {
    pub const ALL: [Mirror; 5] = [Mirror::A, Mirror::B, Mirror::C, Mirror::E, Mirror::F];
}

impl fmt::Display for Mirror {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mirror::A => "A",
            Mirror::B => "B",
            Mirror::C => "C",
            Mirror::E => "E",
            Mirror::F => "F",
        };
        f.write_str(s)
    }
}

impl FromStr for Mirror {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Mirror::A),
            "B" => Ok(Mirror::B),
            "C" => Ok(Mirror::C),
            "E" => Ok(Mirror::E),
            "F" => Ok(Mirror::F),
            other => Err(Error::InvalidConfig(format!("unknown mirror '{other}'"))),
        }
    }
}

/// The three paths a photon can take between preparation and detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path {
    A,
    B,
    C,
}

impl Path {
    pub const ALL: [Path; 3] = [Path::A, Path::B, Path::C];

    pub fn mirror(self) -> Mirror {
        match self {
            Path::A => Mirror::A,
            Path::B => Mirror::B,
            Path::C => Mirror::C,
        }
    }
}

/// Sign with which a tilt at this mirror maps onto the transverse axis of the
/// detector frame. The arm reached by reflection at the inner splitter is the
/// mirror image of the transmitted arm, so a rotation of B by -dtheta lands on
/// the recombiner at the same spot as a rotation of A by +dtheta.
pub fn orientation(mirror: Mirror) -> f64 {
    match mirror {
        Mirror::B => -1.0,
        _ => 1.0,
    }
}

/// Lossless two-port splitter with a fixed symmetric phase convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    transmissivity: f64,
}

impl BeamSplitter {
    pub fn new(transmissivity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) || !transmissivity.is_finite() {
            return Err(Error::InvalidNetwork(format!(
                "transmissivity {transmissivity} outside [0, 1]"
            )));
        }
        Ok(Self { transmissivity })
    }

    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    pub fn transmitted(&self) -> Amp {
        Amp::new(self.transmissivity.sqrt(), 0.0)
    }

    pub fn reflected(&self) -> Amp {
        Amp::new(0.0, (1.0 - self.transmissivity).sqrt())
    }

    /// 2x2 transfer matrix in row-major order.
    pub fn matrix(&self) -> [[Amp; 2]; 2] {
        let t = self.transmitted();
        let r = self.reflected();
        [[t, r], [r, t]]
    }
}

/// Applies the splitter to a pair of input amplitudes.
pub fn apply_beamsplitter(bs: &BeamSplitter, in1: Amp, in2: Amp) -> (Amp, Amp) {
    let t = bs.transmitted();
    let r = bs.reflected();
    (t * in1 + r * in2, r * in1 + t * in2)
}

/// Vibration profile of one mirror.
///
/// `g0` is the dimensionless peak amplitude of the transverse phase ramp the
/// tilt imprints on the beam; `lever` converts an instantaneous ramp into a
/// displacement at the detector plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorDrive {
    pub mirror: Mirror,
    /// Integer cycles per analysis window.
    pub freq: u32,
    /// Peak phase-ramp amplitude, dimensionless.
    pub g0: f64,
    /// Phase offset in radians.
    pub phase: f64,
    /// Detector-plane displacement per unit ramp.
    pub lever: f64,
}

impl MirrorDrive {
    /// Instantaneous ramp at time `t` (one analysis window = one time unit).
    pub fn ramp_at(&self, t: f64) -> f64 {
        self.g0 * (std::f64::consts::TAU * self.freq as f64 * t + self.phase).sin()
    }

    fn validate(&self) -> Result<()> {
        if !self.g0.is_finite() || self.g0 < 0.0 {
            return Err(Error::InvalidNetwork(format!(
                "drive {}: g0 must be finite and >= 0, got {}",
                self.mirror, self.g0
            )));
        }
        if self.freq < 1 {
            return Err(Error::InvalidNetwork(format!(
                "drive {}: frequency must be >= 1 cycle/window",
                self.mirror
            )));
        }
        if !self.phase.is_finite() || !self.lever.is_finite() {
            return Err(Error::InvalidNetwork(format!(
                "drive {}: non-finite phase or lever",
                self.mirror
            )));
        }
        Ok(())
    }
}

/// Parametric description of the nested interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    /// Transmissivity of the first and last splitters.
    pub outer_t: f64,
    /// Transmissivity of the inner splitter feeding arms A and B.
    pub inner_t1: f64,
    /// Transmissivity of the inner recombiner.
    pub inner_t2: f64,
    /// Trim phase on arm B ahead of the recombiner; 0 keeps the F output dark
    /// for 50:50 inner splitters.
    pub inner_phase: f64,
    /// Trim phase on the C branch ahead of mirror C.
    pub outer_phase: f64,
    /// Opaque block on the C branch (both directions).
    pub block_c: bool,
    /// Static amplitude injected at the output toward F, detuning the dark port.
    pub leak_eps: f64,
    pub drives: Vec<MirrorDrive>,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec {
            outer_t: 2.0 / 3.0,
            inner_t1: 0.5,
            inner_t2: 0.5,
            inner_phase: 0.0,
            outer_phase: 0.0,
            block_c: false,
            leak_eps: 0.0,
            drives: Vec::new(),
        }
    }
}

/// Validates parameters and returns the network. The static dark-port
/// residual is available from [`NetworkSpec::dark_port_amplitude`].
pub fn build_network(spec: NetworkSpec) -> Result<NetworkSpec> {
    spec.validate()?;
    Ok(spec)
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("outer_t", self.outer_t),
            ("inner_t1", self.inner_t1),
            ("inner_t2", self.inner_t2),
        ] {
            if !(0.0..=1.0).contains(&t) || !t.is_finite() {
                return Err(Error::InvalidNetwork(format!("{name} = {t} outside [0, 1]")));
            }
        }
        if !self.inner_phase.is_finite() || !self.outer_phase.is_finite() {
            return Err(Error::InvalidNetwork("non-finite trim phase".into()));
        }
        if !self.leak_eps.is_finite() {
            return Err(Error::InvalidNetwork("non-finite leak_eps".into()));
        }
        let mut seen = Vec::new();
        for d in &self.drives {
            d.validate()?;
            if seen.contains(&d.mirror) {
                return Err(Error::InvalidNetwork(format!(
                    "mirror {} driven twice",
                    d.mirror
                )));
            }
            seen.push(d.mirror);
        }
        Ok(())
    }

    /// Non-fatal conditions worth surfacing: drives outside the weak regime.
    pub fn warnings(&self) -> Vec<String> {
        self.drives
            .iter()
            .filter(|d| d.g0 > WEAK_REGIME_LIMIT)
            .map(|d| {
                format!(
                    "drive {}: g0 = {} exceeds the weak-measurement regime (> {})",
                    d.mirror, d.g0, WEAK_REGIME_LIMIT
                )
            })
            .collect()
    }

    /// Checks every drive frequency against the Nyquist bin of a sampling run.
    pub fn check_nyquist(&self, n_samples: usize) -> Result<()> {
        let nyquist = (n_samples / 2) as u32;
        for d in &self.drives {
            if d.freq >= nyquist {
                return Err(Error::FreqOutOfRange {
                    freq: d.freq,
                    nyquist,
                });
            }
        }
        Ok(())
    }

    pub fn drive(&self, mirror: Mirror) -> Option<&MirrorDrive> {
        self.drives.iter().find(|d| d.mirror == mirror)
    }

    fn outer(&self) -> BeamSplitter {
        BeamSplitter { transmissivity: self.outer_t }
    }
    fn inner_1(&self) -> BeamSplitter {
        BeamSplitter { transmissivity: self.inner_t1 }
    }
    fn inner_2(&self) -> BeamSplitter {
        BeamSplitter { transmissivity: self.inner_t2 }
    }

    /// Static (undriven) amplitude at the inner output toward F, including the
    /// injected leak.
    pub fn dark_port_amplitude(&self) -> Amp {
        let d = dark_port_scalars(self);
        d.path_a + d.path_b + d.leak
    }
}

/// Forward amplitudes at each element boundary, for a unit source amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortAmplitudes {
    /// Incident on mirror E (entry of the inner interferometer).
    pub inner_entry: Amp,
    /// Incident on mirror A.
    pub arm_a: Amp,
    /// Incident on mirror B.
    pub arm_b: Amp,
    /// Incident on mirror C.
    pub c_arm: Amp,
    /// Incident on mirror F (inner output toward the final splitter).
    pub f_port: Amp,
    /// The inner interferometer's other output; leaves the instrument.
    pub inner_exit: Amp,
    /// Quad-cell detector port.
    pub detector: Amp,
    /// The final splitter's other output.
    pub detector_b: Amp,
}

/// Propagates a unit amplitude from the source through the whole network.
pub fn forward_ports(net: &NetworkSpec) -> PortAmplitudes {
    let (t1, r1) = (net.outer().transmitted(), net.outer().reflected());
    let (t2, r2) = (net.inner_1().transmitted(), net.inner_1().reflected());
    let (t3, r3) = (net.inner_2().transmitted(), net.inner_2().reflected());
    let (t4, r4) = (net.outer().transmitted(), net.outer().reflected());

    let inner_entry = t1;
    let mut c_arm = r1 * Amp::from_polar(1.0, net.outer_phase);
    if net.block_c {
        c_arm = Amp::new(0.0, 0.0);
    }

    let e_out = MIRROR_REFLECTION * inner_entry;
    let arm_a = t2 * e_out;
    let arm_b = r2 * e_out;

    let a_out = MIRROR_REFLECTION * arm_a;
    let b_out = MIRROR_REFLECTION * arm_b * Amp::from_polar(1.0, net.inner_phase);
    let f_port = t3 * a_out + r3 * b_out + Amp::new(net.leak_eps, 0.0);
    let inner_exit = r3 * a_out + t3 * b_out;

    let f_out = MIRROR_REFLECTION * f_port;
    let c_out = MIRROR_REFLECTION * c_arm;
    let detector = t4 * f_out + r4 * c_out;
    let detector_b = r4 * f_out + t4 * c_out;

    PortAmplitudes {
        inner_entry,
        arm_a,
        arm_b,
        c_arm,
        f_port,
        inner_exit,
        detector,
        detector_b,
    }
}

/// Transfer coefficients from the mirror planes (incident amplitudes on
/// A, B, C) to the three terminal ports (detector, detector_b, inner exit),
/// as rows of a 3x3 matrix. Unitary when the block and leak are off.
pub fn transfer_after(net: &NetworkSpec) -> [[Amp; 3]; 3] {
    let zero = Amp::new(0.0, 0.0);
    let one = Amp::new(1.0, 0.0);
    let mut m = [[zero; 3]; 3];
    for (col, basis) in [(0usize, [one, zero, zero]), (1, [zero, one, zero]), (2, [zero, zero, one])]
    {
        let (det, det_b, exit) = propagate_from_mirror_plane(net, basis[0], basis[1], basis[2]);
        m[0][col] = det;
        m[1][col] = det_b;
        m[2][col] = exit;
    }
    m
}

/// Transfer coefficients from the instrument inputs (source plus the two
/// vacuum ports of the splitters) to the mirror planes. Unitary.
pub fn transfer_before(net: &NetworkSpec) -> [[Amp; 3]; 3] {
    let (t1, r1) = (net.outer().transmitted(), net.outer().reflected());
    let (t2, r2) = (net.inner_1().transmitted(), net.inner_1().reflected());
    let c_phase = Amp::from_polar(1.0, net.outer_phase);
    let block = if net.block_c { Amp::new(0.0, 0.0) } else { Amp::new(1.0, 0.0) };
    let m = MIRROR_REFLECTION;
    // inputs: (source, outer splitter vacuum, inner splitter vacuum)
    [
        [t1 * m * t2, r1 * m * t2, r2],
        [t1 * m * r2, r1 * m * r2, t2],
        [r1 * c_phase * block, t1 * c_phase * block, Amp::new(0.0, 0.0)],
    ]
}

fn propagate_from_mirror_plane(
    net: &NetworkSpec,
    arm_a: Amp,
    arm_b: Amp,
    c_arm: Amp,
) -> (Amp, Amp, Amp) {
    let (t3, r3) = (net.inner_2().transmitted(), net.inner_2().reflected());
    let (t4, r4) = (net.outer().transmitted(), net.outer().reflected());

    let a_out = MIRROR_REFLECTION * arm_a;
    let b_out = MIRROR_REFLECTION * arm_b * Amp::from_polar(1.0, net.inner_phase);
    let f_port = t3 * a_out + r3 * b_out;
    let inner_exit = r3 * a_out + t3 * b_out;

    let c_out = if net.block_c {
        Amp::new(0.0, 0.0)
    } else {
        MIRROR_REFLECTION * c_arm
    };
    let f_out = MIRROR_REFLECTION * f_port;
    let detector = t4 * f_out + r4 * c_out;
    let detector_b = r4 * f_out + t4 * c_out;
    (detector, detector_b, inner_exit)
}

/// Scalar coefficients of the four field terms that superpose on the
/// detector: one per path plus the static leak injected at the F output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorScalars {
    pub path_a: Amp,
    pub path_b: Amp,
    pub path_c: Amp,
    pub leak: Amp,
}

impl DetectorScalars {
    pub fn total(&self) -> Amp {
        self.path_a + self.path_b + self.path_c + self.leak
    }
}

/// Source-to-detector amplitude per path term.
pub fn detector_scalars(net: &NetworkSpec) -> DetectorScalars {
    let after = transfer_after(net);
    let before = transfer_before(net);
    // source is input 0 of the instrument
    let (psi_a, psi_b, psi_c) = (before[0][0], before[1][0], before[2][0]);
    let t4 = net.outer().transmitted();
    DetectorScalars {
        path_a: after[0][0] * psi_a,
        path_b: after[0][1] * psi_b,
        path_c: after[0][2] * psi_c,
        leak: Amp::new(net.leak_eps, 0.0) * MIRROR_REFLECTION * t4,
    }
}

/// Scalar coefficients of the field terms arriving at the inner output
/// toward F (the nominally dark port), before mirror F.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkPortScalars {
    pub path_a: Amp,
    pub path_b: Amp,
    pub leak: Amp,
}

/// Source-to-dark-port amplitude per arm term.
pub fn dark_port_scalars(net: &NetworkSpec) -> DarkPortScalars {
    let before = transfer_before(net);
    let (t3, r3) = (net.inner_2().transmitted(), net.inner_2().reflected());
    let inner_phase = Amp::from_polar(1.0, net.inner_phase);
    DarkPortScalars {
        path_a: t3 * MIRROR_REFLECTION * before[0][0],
        path_b: r3 * MIRROR_REFLECTION * inner_phase * before[1][0],
        leak: Amp::new(net.leak_eps, 0.0),
    }
}

/// Mirrors crossed by each detector-plane field term, in path order.
pub fn mirrors_on_path(path: Path) -> &'static [Mirror] {
    match path {
        Path::A => &[Mirror::E, Mirror::A, Mirror::F],
        Path::B => &[Mirror::E, Mirror::B, Mirror::F],
        Path::C => &[Mirror::C],
    }
}

/// Mirrors crossed by the leak term (injected just before mirror F).
pub const LEAK_MIRRORS: &[Mirror] = &[Mirror::F];

/// Mirrors crossed by each arm term as it arrives at the dark port.
pub fn mirrors_to_dark_port(path: Path) -> &'static [Mirror] {
    match path {
        Path::A => &[Mirror::E, Mirror::A],
        Path::B => &[Mirror::E, Mirror::B],
        Path::C => &[],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn default_net() -> NetworkSpec {
        build_network(NetworkSpec::default()).unwrap()
    }

    #[test]
    fn balanced_splitter_splits_evenly() {
        let bs = BeamSplitter::new(0.5).unwrap();
        let (o1, o2) = apply_beamsplitter(&bs, Amp::new(1.0, 0.0), Amp::new(0.0, 0.0));
        assert!((o1.norm() - 1.0 / 2f64.sqrt()).abs() < TOL);
        assert!((o2.norm() - 1.0 / 2f64.sqrt()).abs() < TOL);
    }

    #[test]
    fn transparent_splitter_transmits_everything() {
        let bs = BeamSplitter::new(1.0).unwrap();
        let (o1, o2) = apply_beamsplitter(&bs, Amp::new(1.0, 0.0), Amp::new(0.0, 0.0));
        assert!((o1.norm() - 1.0).abs() < TOL);
        assert!(o2.norm() < TOL);
    }

    #[test]
    fn two_thirds_splitter_builds_the_outer_split() {
        // Direct evaluation of the transfer matrix at T = 2/3.
        let bs = BeamSplitter::new(2.0 / 3.0).unwrap();
        let (o1, o2) = apply_beamsplitter(&bs, Amp::new(1.0, 0.0), Amp::new(0.0, 0.0));
        assert!((o1.norm() - (2.0f64 / 3.0).sqrt()).abs() < TOL);
        assert!((o2.norm() - (1.0f64 / 3.0).sqrt()).abs() < TOL);
    }

    #[test]
    fn splitter_matrix_is_unitary_and_conserves_power() {
        for t in [0.0, 0.1, 0.5, 2.0 / 3.0, 0.9, 1.0] {
            let bs = BeamSplitter::new(t).unwrap();
            let tt = bs.transmitted();
            let rr = bs.reflected();
            assert!((tt.norm_sqr() + rr.norm_sqr() - 1.0).abs() < TOL);
            // off-diagonal phase relation of the symmetric convention
            assert!((tt * rr.conj() + rr * tt.conj()).norm() < TOL);

            let (o1, o2) =
                apply_beamsplitter(&bs, Amp::new(0.3, -0.4), Amp::new(-0.1, 0.7));
            let pin = Amp::new(0.3, -0.4).norm_sqr() + Amp::new(-0.1, 0.7).norm_sqr();
            assert!((o1.norm_sqr() + o2.norm_sqr() - pin).abs() < TOL);
        }
    }

    #[test]
    fn rejects_transmissivity_outside_unit_interval() {
        assert!(BeamSplitter::new(-0.01).is_err());
        assert!(BeamSplitter::new(1.01).is_err());
        assert!(build_network(NetworkSpec {
            outer_t: 1.5,
            ..NetworkSpec::default()
        })
        .is_err());
    }

    #[test]
    fn default_network_is_dark_toward_f() {
        let net = default_net();
        assert!(net.dark_port_amplitude().norm() <= 1e-12);
    }

    #[test]
    fn default_network_forward_amplitudes_match_the_canonical_state() {
        let net = default_net();
        let ports = forward_ports(&net);
        let expected = [
            Amp::new(1.0, 0.0),
            Amp::new(0.0, 1.0),
            Amp::new(1.0, 0.0),
        ]
        .map(|a| a / 3f64.sqrt());
        let actual = [ports.arm_a, ports.arm_b, ports.c_arm];
        // equality up to a global phase: fix it on the largest component
        let phase = actual[0] / expected[0];
        assert!((phase.norm() - 1.0).abs() < TOL);
        for (a, e) in actual.iter().zip(expected.iter()) {
            assert!((a - e * phase).norm() < TOL);
        }
    }

    #[test]
    fn leak_eps_appears_verbatim_at_the_dark_port() {
        let net = build_network(NetworkSpec {
            leak_eps: 0.01,
            ..NetworkSpec::default()
        })
        .unwrap();
        assert!((net.dark_port_amplitude().norm() - 0.01).abs() < TOL);
    }

    #[test]
    fn terminal_ports_conserve_probability() {
        let net = default_net();
        let p = forward_ports(&net);
        let total = p.detector.norm_sqr() + p.detector_b.norm_sqr() + p.inner_exit.norm_sqr();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((p.detector.norm_sqr() - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_matrices_are_unitary() {
        for net in [
            default_net(),
            build_network(NetworkSpec {
                outer_t: 0.3,
                inner_t1: 0.7,
                inner_t2: 0.45,
                inner_phase: 0.8,
                outer_phase: -1.1,
                ..NetworkSpec::default()
            })
            .unwrap(),
        ] {
            for m in [transfer_before(&net), transfer_after(&net)] {
                for i in 0..3 {
                    for j in 0..3 {
                        let dot: Amp = (0..3).map(|k| m[k][i].conj() * m[k][j]).sum();
                        let expected = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (dot - Amp::new(expected, 0.0)).norm() < 1e-12,
                            "columns {i},{j} not orthonormal"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn block_zeroes_exactly_the_c_path() {
        let open = forward_ports(&default_net());
        let blocked = forward_ports(
            &build_network(NetworkSpec {
                block_c: true,
                ..NetworkSpec::default()
            })
            .unwrap(),
        );
        assert_eq!(blocked.c_arm, Amp::new(0.0, 0.0));
        assert!((blocked.arm_a - open.arm_a).norm() < TOL);
        assert!((blocked.arm_b - open.arm_b).norm() < TOL);
        assert!((blocked.inner_entry - open.inner_entry).norm() < TOL);
    }

    #[test]
    fn fully_transmitting_outer_splitter_starves_the_c_arm() {
        let net = build_network(NetworkSpec {
            outer_t: 1.0,
            ..NetworkSpec::default()
        })
        .unwrap();
        let p = forward_ports(&net);
        assert!(p.c_arm.norm() < TOL);
        assert!((p.arm_a.norm_sqr() + p.arm_b.norm_sqr() - 1.0).abs() < TOL);
    }

    #[test]
    fn detector_scalars_sum_to_the_detector_amplitude() {
        for net in [
            default_net(),
            build_network(NetworkSpec {
                leak_eps: 0.02,
                inner_phase: 0.3,
                outer_phase: 0.9,
                ..NetworkSpec::default()
            })
            .unwrap(),
        ] {
            let s = detector_scalars(&net);
            let p = forward_ports(&net);
            assert!((s.total() - p.detector).norm() < 1e-12);
        }
    }

    #[test]
    fn dark_port_scalars_sum_to_the_f_port_amplitude() {
        for leak in [0.0, 0.01] {
            let net = build_network(NetworkSpec {
                leak_eps: leak,
                ..NetworkSpec::default()
            })
            .unwrap();
            let d = dark_port_scalars(&net);
            let p = forward_ports(&net);
            assert!((d.path_a + d.path_b + d.leak - p.f_port).norm() < 1e-12);
        }
    }

    #[test]
    fn duplicate_drives_are_rejected() {
        let drive = MirrorDrive {
            mirror: Mirror::A,
            freq: 30,
            g0: 1e-3,
            phase: 0.0,
            lever: 1.0,
        };
        let err = build_network(NetworkSpec {
            drives: vec![drive, drive],
            ..NetworkSpec::default()
        });
        assert!(err.is_err());
    }

    #[test]
    fn strong_drives_warn_but_still_build() {
        let net = build_network(NetworkSpec {
            drives: vec![MirrorDrive {
                mirror: Mirror::A,
                freq: 30,
                g0: 0.1,
                phase: 0.0,
                lever: 1.0,
            }],
            ..NetworkSpec::default()
        })
        .unwrap();
        assert_eq!(net.warnings().len(), 1);
    }

    #[test]
    fn nyquist_violations_are_rejected() {
        let net = build_network(NetworkSpec {
            drives: vec![MirrorDrive {
                mirror: Mirror::A,
                freq: 2048,
                g0: 1e-3,
                phase: 0.0,
                lever: 1.0,
            }],
            ..NetworkSpec::default()
        })
        .unwrap();
        assert!(matches!(
            net.check_nyquist(4096),
            Err(Error::FreqOutOfRange { .. })
        ));
        assert!(net.check_nyquist(8192).is_ok());
    }
}
