//! Forward- and backward-evolving path states and weak values of path
//! projectors.
//!
//! The forward state is prepared at the source; the backward state is defined
//! by which detector fired and propagates adjointly from there. A weak value
//! of a projector is the normalized overlap-weighted matrix element between
//! the two. For the canonical network the projector weak values on (A, B, C)
//! come out (+1, -1, +1), and they vanish on the extended ports E and F.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::optics::{
    forward_ports, transfer_after, Amp, Mirror, NetworkSpec, Path, MIRROR_REFLECTION,
    SINGULAR_OVERLAP,
};

/// Amplitudes of one evolving state on the three mirror-plane paths, plus the
/// post-selection overlap of the network it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    amps: [Amp; 3],
    overlap: Amp,
}

impl PathState {
    pub fn amp(&self, path: Path) -> Amp {
        self.amps[path as usize]
    }

    pub fn amps(&self) -> [Amp; 3] {
        self.amps
    }

    /// Overlap of the backward state with the forward state, `<post|pre>`.
    pub fn post_selection_overlap(&self) -> Amp {
        self.overlap
    }

    pub fn total_norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Which output of the final splitter plays the role of the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorPort {
    /// The quad-cell detector.
    Main,
    /// The final splitter's other output.
    Secondary,
}

fn forward_amps(net: &NetworkSpec) -> [Amp; 3] {
    let p = forward_ports(net);
    [p.arm_a, p.arm_b, p.c_arm]
}

fn backward_amps(net: &NetworkSpec, port: DetectorPort) -> [Amp; 3] {
    // Adjoint propagation from the detector: the dual amplitude on each path
    // is the conjugated transfer coefficient from that path to the detector.
    let after = transfer_after(net);
    let row = match port {
        DetectorPort::Main => after[0],
        DetectorPort::Secondary => after[1],
    };
    [row[0].conj(), row[1].conj(), row[2].conj()]
}

fn overlap_of(fwd: &[Amp; 3], bwd: &[Amp; 3]) -> Amp {
    fwd.iter().zip(bwd.iter()).map(|(f, b)| b.conj() * f).sum()
}

/// Forward-evolving state at the mirror plane.
pub fn forward_state(net: &NetworkSpec) -> PathState {
    let amps = forward_amps(net);
    let overlap = overlap_of(&amps, &backward_amps(net, DetectorPort::Main));
    PathState { amps, overlap }
}

/// Backward-evolving state at the mirror plane, from the main detector.
pub fn backward_state(net: &NetworkSpec) -> PathState {
    backward_state_from(net, DetectorPort::Main)
}

/// Backward-evolving state from either output of the final splitter.
pub fn backward_state_from(net: &NetworkSpec, port: DetectorPort) -> PathState {
    let amps = backward_amps(net, port);
    let overlap = overlap_of(&forward_amps(net), &amps);
    PathState { amps, overlap }
}

/// `<post|pre>` for the main detector.
pub fn post_selection_overlap(net: &NetworkSpec) -> Amp {
    forward_state(net).overlap
}

/// Probability that a launched photon fires the main detector, leak included.
pub fn post_selection_probability(net: &NetworkSpec) -> f64 {
    forward_ports(net).detector.norm_sqr()
}

fn guard_overlap(overlap: Amp) -> Result<Amp> {
    if overlap.norm() <= SINGULAR_OVERLAP {
        Err(Error::PostSelectionSingular {
            overlap_magnitude: overlap.norm(),
        })
    } else {
        Ok(overlap)
    }
}

/// Weak value of the projector onto one mirror's position.
///
/// On A, B, C this is the textbook quotient over the mirror-plane states. E
/// and F are evaluated on their own surfaces: the product of the forward
/// amplitude arriving there and the transfer coefficient onward to the
/// detector, over the same overlap.
pub fn weak_value(net: &NetworkSpec, mirror: Mirror) -> Result<Amp> {
    let fwd = forward_amps(net);
    let bwd = backward_amps(net, DetectorPort::Main);
    let overlap = guard_overlap(overlap_of(&fwd, &bwd))?;
    let numerator = match mirror {
        Mirror::A => bwd[0].conj() * fwd[0],
        Mirror::B => bwd[1].conj() * fwd[1],
        Mirror::C => bwd[2].conj() * fwd[2],
        Mirror::E => {
            let ports = forward_ports(net);
            e_to_detector(net) * ports.inner_entry
        }
        Mirror::F => {
            let ports = forward_ports(net);
            f_to_detector(net) * ports.f_port
        }
    };
    Ok(numerator / overlap)
}

/// Weak value of the product of two path projectors.
///
/// Distinct projectors multiply to zero, so any joint weak measurement over
/// two different paths reads exactly zero; the diagonal reduces to the single
/// projector.
pub fn joint_weak_value(net: &NetworkSpec, p1: Path, p2: Path) -> Result<Amp> {
    let fwd = forward_amps(net);
    let bwd = backward_amps(net, DetectorPort::Main);
    let overlap = guard_overlap(overlap_of(&fwd, &bwd))?;
    // literal matrix element of |p1><p1| |p2><p2|
    let product = if p1 == p2 {
        bwd[p1 as usize].conj() * fwd[p1 as usize]
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(product / overlap)
}

/// Transfer coefficient from the plane incident on mirror E to the detector.
fn e_to_detector(net: &NetworkSpec) -> Amp {
    let after = transfer_after(net);
    let t2 = Amp::new(net.inner_t1.sqrt(), 0.0);
    let r2 = Amp::new(0.0, (1.0 - net.inner_t1).sqrt());
    // crossing mirror E, then the inner splitter into both arms
    MIRROR_REFLECTION * (t2 * after[0][0] + r2 * after[0][1])
}

/// Transfer coefficient from the plane incident on mirror F to the detector.
fn f_to_detector(net: &NetworkSpec) -> Amp {
    let t4 = Amp::new(net.outer_t.sqrt(), 0.0);
    MIRROR_REFLECTION * t4
}
