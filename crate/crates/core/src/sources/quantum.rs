use core::f64::consts::FRAC_PI_4;

use libm::{cos, sin};

use crate::error::{Error, Result};
use crate::inequality::ProbabilityTable;
use crate::{AngleSet, SettingPair};

/// Pure two-qubit polarization state `cos r |HH⟩ + sin r |VV⟩`.
///
/// `r = π/4` is maximally entangled; `r → 0` approaches the product `|HH⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumState {
    r: f64,
}

impl QuantumState {
    pub fn new(r: f64) -> Result<Self> {
        if (0.0..=FRAC_PI_4).contains(&r) {
            Ok(Self { r })
        } else {
            Err(Error::domain("state parameter r", r, "[0, pi/4]"))
        }
    }

    pub fn maximal() -> Self {
        Self { r: FRAC_PI_4 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Distribution over single-channel outcomes `{detect, no-detect}²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointDistribution {
    pub both: f64,
    pub alice_only: f64,
    pub bob_only: f64,
    pub neither: f64,
}

impl JointDistribution {
    pub fn alice_marginal(&self) -> f64 {
        self.both + self.alice_only
    }

    pub fn bob_marginal(&self) -> f64 {
        self.both + self.bob_only
    }

    pub fn total(&self) -> f64 {
        self.both + self.alice_only + self.bob_only + self.neither
    }

    /// `P(B | A = alice_detect)`, zero when the conditioning event is impossible.
    pub fn bob_given_alice(&self, alice_detect: bool) -> f64 {
        let (num, den) = if alice_detect {
            (self.both, self.both + self.alice_only)
        } else {
            (self.bob_only, self.bob_only + self.neither)
        };
        if den > 0.0 {
            (num / den).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

/// Outcome probabilities for ideal polarizers at angles `a` (Alice) and `b`
/// (Bob), where "detect" means transmission.
///
/// Each entry is the squared amplitude of the state on the corresponding
/// product of transmitted / blocked polarization vectors, so all four are
/// non-negative and sum to one up to rounding. For the maximal state the
/// coincidence probability is `½cos²(a − b)`.
pub fn quantum_joint_probs(state: QuantumState, a: f64, b: f64) -> JointDistribution {
    let (c, s) = (cos(state.r), sin(state.r));
    let (ca, sa) = (cos(a), sin(a));
    let (cb, sb) = (cos(b), sin(b));
    // ⟨u ⊗ v|ψ⟩ = c·u_H·v_H + s·u_V·v_V; the blocked vector at angle θ is (−sin θ, cos θ).
    let amp = |uh: f64, uv: f64, vh: f64, vv: f64| c * uh * vh + s * uv * vv;
    let sq = |x: f64| x * x;
    JointDistribution {
        both: sq(amp(ca, sa, cb, sb)),
        alice_only: sq(amp(ca, sa, -sb, cb)),
        bob_only: sq(amp(-sa, ca, cb, sb)),
        neither: sq(amp(-sa, ca, -sb, cb)),
    }
}

/// Exact single-channel probability table for a quantum source seen through
/// detectors of efficiency `eta_alice`, `eta_bob`.
pub fn quantum_table(state: QuantumState, angles: &AngleSet, eta_alice: f64, eta_bob: f64) -> ProbabilityTable {
    let mut joint = [0.0; 4];
    let mut alice = [0.0; 2];
    let mut bob = [0.0; 2];
    for p in SettingPair::ALL {
        let d = quantum_joint_probs(state, angles.alice_angle(p.alice), angles.bob_angle(p.bob));
        joint[p.index()] = (eta_alice * eta_bob * d.both).clamp(0.0, 1.0);
        // marginals do not depend on the remote angle
        alice[p.alice.index()] = (eta_alice * d.alice_marginal()).clamp(0.0, 1.0);
        bob[p.bob.index()] = (eta_bob * d.bob_marginal()).clamp(0.0, 1.0);
    }
    ProbabilityTable::new(joint, alice, bob, 1e-12).expect("quantum probabilities are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_8};

    #[test]
    fn maximal_aligned_coincidence_is_half() {
        let d = quantum_joint_probs(QuantumState::maximal(), 0.3, 0.3);
        assert!((d.both - 0.5).abs() < 1e-15);
        assert!((d.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn maximal_crossed_coincidence_is_zero() {
        let d = quantum_joint_probs(QuantumState::maximal(), 0.1, 0.1 + FRAC_PI_2);
        assert!(d.both.abs() < 1e-15);
    }

    #[test]
    fn state_parameter_is_bounded() {
        assert!(QuantumState::new(-0.01).is_err());
        assert!(QuantumState::new(FRAC_PI_4 + 1e-9).is_err());
        assert!(QuantumState::new(FRAC_PI_8).is_ok());
    }

    #[test]
    fn conditional_handles_impossible_events() {
        // product state |HH⟩ with both polarizers at H: Alice always detects
        let d = quantum_joint_probs(QuantumState::new(0.0).unwrap(), 0.0, 0.0);
        assert_eq!(d.bob_given_alice(true), 1.0);
        assert_eq!(d.bob_given_alice(false), 0.0);
    }
}
