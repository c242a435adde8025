//! The closed-form quantum sampler against a state-vector computation with
//! explicit 4×4 tensor-product projectors.

use std::f64::consts::{FRAC_PI_4, PI};

use chlab_core::sources::{quantum_joint_probs, quantum_table, QuantumState};
use chlab_core::AngleSet;
use proptest::prelude::*;

type Mat4 = [[f64; 4]; 4];

/// Projector onto linear polarization at `theta` in the (H, V) basis.
fn projector(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c * c, c * s], [c * s, s * s]]
}

fn complement(p: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[1.0 - p[0][0], -p[0][1]], [-p[1][0], 1.0 - p[1][1]]]
}

fn kron(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

fn expectation(psi: [f64; 4], m: Mat4) -> f64 {
    (0..4)
        .map(|i| (0..4).map(|j| psi[i] * m[i][j] * psi[j]).sum::<f64>())
        .sum()
}

/// `[both, alice only, bob only, neither]`.
fn oracle(r: f64, a: f64, b: f64) -> [f64; 4] {
    // basis order HH, HV, VH, VV
    let psi = [r.cos(), 0.0, 0.0, r.sin()];
    let (pa, pb) = (projector(a), projector(b));
    [
        expectation(psi, kron(pa, pb)),
        expectation(psi, kron(pa, complement(pb))),
        expectation(psi, kron(complement(pa), pb)),
        expectation(psi, kron(complement(pa), complement(pb))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_matches_projectors(r in 0.0..=FRAC_PI_4, a in -PI..PI, b in -PI..PI) {
        let d = quantum_joint_probs(QuantumState::new(r).unwrap(), a, b);
        let o = oracle(r, a, b);
        let got = [d.both, d.alice_only, d.bob_only, d.neither];
        for i in 0..4 {
            prop_assert!((got[i] - o[i]).abs() < 1e-12, "entry {i}: {} vs {}", got[i], o[i]);
        }
        prop_assert!((d.total() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn maximal_coincidence_is_half_cos_squared() {
    for k in 0..=36 {
        let theta = k as f64 * PI / 36.0;
        let d = quantum_joint_probs(QuantumState::maximal(), 0.4, 0.4 + theta);
        assert!((d.both - 0.5 * theta.cos().powi(2)).abs() < 1e-15);
    }
}

#[test]
fn table_entries_follow_the_oracle() {
    let angles = AngleSet::new(1.1, 0.2, 0.7, 2.9);
    let (r, ea, eb) = (0.35, 0.8, 0.9);
    let t = quantum_table(QuantumState::new(r).unwrap(), &angles, ea, eb);
    for p in chlab_core::SettingPair::ALL {
        let o = oracle(r, angles.alice_angle(p.alice), angles.bob_angle(p.bob));
        assert!((t.joint(p) - ea * eb * o[0]).abs() < 1e-12);
        assert!((t.alice(p.alice) - ea * (o[0] + o[1])).abs() < 1e-12);
        assert!((t.bob(p.bob) - eb * (o[0] + o[2])).abs() < 1e-12);
    }
}

#[test]
fn ch_optimum_value() {
    let t = quantum_table(QuantumState::maximal(), &AngleSet::ch_optimal(), 1.0, 1.0);
    let v = chlab_core::inequality::ch_values(&t);
    assert!((v.value(0) - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
}
