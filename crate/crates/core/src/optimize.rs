//! Angle search for the quantum source: the setting angles that maximize CH
//! variant 0 for a given state and detector efficiency.

use core::f64::consts::PI;

use crate::inequality::CH_VARIANTS;
use crate::sources::{quantum_table, QuantumState};
use crate::AngleSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizedAngles {
    pub angles: AngleSet,
    /// Exact variant-0 value at `angles`.
    pub value: f64,
}

/// Exact variant-0 value for the quantum source with symmetric efficiency.
pub fn exact_variant0(state: QuantumState, eta: f64, angles: &AngleSet) -> f64 {
    CH_VARIANTS[0].evaluate(&quantum_table(state, angles, eta, eta))
}

/// Multi-start Nelder-Mead over the four angles. Deterministic.
pub fn ch_optimal_angles(state: QuantumState, eta: f64) -> OptimizedAngles {
    let objective = |x: &[f64; 4]| -exact_variant0(state, eta, &AngleSet::from_array(*x));

    let mut best = AngleSet::ch_optimal().to_array();
    let mut best_val = objective(&best);
    let mut consider = |start: [f64; 4]| {
        let (x, v) = nelder_mead(&objective, start, 0.3, 4000);
        if v < best_val {
            best_val = v;
            best = x;
        }
    };
    consider(AngleSet::ch_optimal().to_array());
    // quasi-random starts covering [0, π)^4
    const G: f64 = 0.618_033_988_749_894_9;
    for k in 1..=24u32 {
        let k = k as f64;
        let start = [
            (k * G) % 1.0,
            (k * G * G + 0.25) % 1.0,
            (k * G * G * G + 0.5) % 1.0,
            (k * 0.754_877_666_246_692_8 + 0.75) % 1.0,
        ]
        .map(|u| u * PI);
        consider(start);
    }
    OptimizedAngles {
        angles: AngleSet::from_array(best.map(reduce_angle)),
        value: -best_val,
    }
}

/// `a` reduced into `[0, π)`; polarizer angles are π-periodic.
fn reduce_angle(a: f64) -> f64 {
    let m = libm::fmod(a, PI);
    if m < 0.0 {
        m + PI
    } else {
        m
    }
}

/// Minimizes `f` starting from `start` with an initial simplex of edge `step`.
pub fn nelder_mead<F, const N: usize>(f: &F, start: [f64; N], step: f64, max_iter: usize) -> ([f64; N], f64)
where
    F: Fn(&[f64; N]) -> f64,
{
    // N + 1 vertices; N is small so fixed-size arrays would need generic_const_exprs
    let mut simplex: alloc::vec::Vec<([f64; N], f64)> = (0..=N)
        .map(|i| {
            let mut x = start;
            if i > 0 {
                x[i - 1] += step;
            }
            let v = f(&x);
            (x, v)
        })
        .collect();

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[N].1 - simplex[0].1;
        if spread.abs() < 1e-15 {
            break;
        }
        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for d in 0..N {
                centroid[d] += x[d] / N as f64;
            }
        }
        let worst = simplex[N];
        let along = |t: f64| {
            let mut x = [0.0; N];
            for d in 0..N {
                x[d] = centroid[d] + t * (worst.0[d] - centroid[d]);
            }
            x
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(-0.5);
                (x, f(&x))
            } else {
                let x = along(0.5);
                (x, f(&x))
            };
            if fc < worst.1.min(fr) {
                simplex[N] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    for d in 0..N {
                        v.0[d] = best[d] + 0.5 * (v.0[d] - best[d]);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}
