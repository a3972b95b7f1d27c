//! Deterministic pure target states.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::core_linalg::{c, eigh, CMatrix, CVector, DensityMatrix};
use crate::Error;

pub fn maximally_coherent(d: usize) -> DensityMatrix {
    DensityMatrix::from_trusted(CMatrix::from_element(d, d, c(1.0 / d as f64)))
}

fn pauli(k: usize) -> CMatrix {
    let i = Complex64::i();
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        1 => CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        _ => CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    }
}

/// `J Σ (XX + YY + ZZ)` on an open chain.
pub fn heisenberg_hamiltonian(n: usize, j: f64) -> CMatrix {
    let d = 1 << n;
    let mut h = CMatrix::zeros(d, d);
    for a in 0..n.saturating_sub(1) {
        for k in 0..3 {
            let p = pauli(k);
            h += site(&p, a, n) * site(&p, a + 1, n) * c(j);
        }
    }
    h
}

fn site(op: &CMatrix, q: usize, n: usize) -> CMatrix {
    let mut m = CMatrix::identity(1, 1);
    for k in 0..n {
        let f = if k == q { op.clone() } else { CMatrix::identity(2, 2) };
        m = m.kronecker(&f);
    }
    m
}

/// `e^{−iHt}` through the eigen-decomposition of the Hermitian `h`.
pub fn evolve(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let d = vals.len();
    let mut scaled = vecs.clone();
    for (k, &l) in vals.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -l * t);
        for i in 0..d {
            scaled[(i, k)] *= ph;
        }
    }
    scaled * vecs.adjoint()
}

/// `e^{−iHt}|+++⟩` for the 3-site Heisenberg chain.
pub fn heisenberg_evolved(t: f64, j: f64) -> DensityMatrix {
    let u = evolve(&heisenberg_hamiltonian(3, j), t);
    let plus = CVector::from_element(8, c(1.0 / 8f64.sqrt()));
    DensityMatrix::from_trusted(crate::core_linalg::pure_state(&(u * plus)))
}

/// Chebyshev polynomial `T_k(x)` by the three-term recurrence.
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    let (mut t0, mut t1) = (1.0, x);
    if k == 0 {
        return t0;
    }
    for _ in 1..k {
        (t0, t1) = (t1, 2.0 * x * t1 - t0);
    }
    t1
}

/// Amplitudes `(T₀(x), …, T_degree(x))`, normalized.
pub fn chebyshev_state(degree: usize, x: f64) -> Result<DensityMatrix, Error> {
    let v = CVector::from_fn(degree + 1, |k, _| c(chebyshev_t(k, x)));
    DensityMatrix::from_pure(&v)
}

/// `Σ c_k e^{iθ_k}|k⟩`, normalized.
pub fn phase_superposition(weights: &[f64], phases: &[f64]) -> Result<DensityMatrix, Error> {
    if weights.len() != phases.len() {
        return Err(Error::DimensionMismatch(weights.len(), phases.len()));
    }
    let v = CVector::from_fn(weights.len(), |k, _| Complex64::from_polar(weights[k], phases[k]));
    DensityMatrix::from_pure(&v)
}

/// Phase-estimation register for eigenphase `phi`: `c_k = (1/d) Σ_j e^{2πi j(φ − k/d)}`.
pub fn phase_estimation_state(d: usize, phi: f64) -> Result<DensityMatrix, Error> {
    let v = CVector::from_fn(d, |k, _| {
        (0..d)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 * (phi - k as f64 / d as f64)))
            .sum::<Complex64>()
            / c(d as f64)
    });
    DensityMatrix::from_pure(&v)
}

/// Discrete Gaussian centred at `d/2` with width `d/8` and linear phase `2π·k·s/d`.
pub fn discrete_gaussian_state(d: usize, s: usize) -> Result<DensityMatrix, Error> {
    let sigma = d as f64 / 8.0;
    let mid = d as f64 / 2.0;
    let w: Vec<f64> = (0..d)
        .map(|k| (-(k as f64 - mid).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let th: Vec<f64> = (0..d).map(|k| 2.0 * PI * (k * s % d) as f64 / d as f64).collect();
    phase_superposition(&w, &th)
}

pub struct LabeledTarget {
    pub label: &'static str,
    pub state: DensityMatrix,
}

pub const CHEBYSHEV_X: f64 = 0.5;
pub const HEISENBERG_T: f64 = 1.0;
pub const HEISENBERG_J: f64 = 1.0;
pub const QPE_PHASE: f64 = 0.3;
pub const GAUSSIAN_SHIFT: usize = 5;

/// The four algorithm-output stand-ins at d = 4, 8, 16, 64.
pub fn target_suite() -> Vec<LabeledTarget> {
    vec![
        LabeledTarget {
            label: "chebyshev_d4",
            state: chebyshev_state(3, CHEBYSHEV_X).expect("nonzero amplitudes"),
        },
        LabeledTarget {
            label: "heisenberg_d8",
            state: heisenberg_evolved(HEISENBERG_T, HEISENBERG_J),
        },
        LabeledTarget {
            label: "phase_estimation_d16",
            state: phase_estimation_state(16, QPE_PHASE).expect("nonzero"),
        },
        LabeledTarget {
            label: "discrete_gaussian_d64",
            state: discrete_gaussian_state(64, GAUSSIAN_SHIFT).expect("nonzero"),
        },
    ]
}
