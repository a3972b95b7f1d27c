//! Small gate-level density-matrix simulator with per-gate depolarizing noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core_linalg::{c, fidelity, CMatrix, DensityMatrix, EnergySpectrum};
use crate::estimators::{estimate_channel_inversion, estimate_coherence_max};
use crate::noise::{NoiseParams, SCALE_CAP};
use crate::recovery::recover;
use crate::Error;

pub const MAX_QUBITS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Gate {
    H(usize),
    X(usize),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot(usize, usize),
}

impl Gate {
    fn support(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cnot(a, b) => vec![a, b],
        }
    }

    fn single(&self) -> Option<CMatrix> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Some(match *self {
            Gate::H(_) => CMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]),
            Gate::X(_) => CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
            Gate::Ry(_, t) => {
                let (sn, cs) = (t / 2.0).sin_cos();
                CMatrix::from_row_slice(2, 2, &[c(cs), c(-sn), c(sn), c(cs)])
            }
            Gate::Rz(_, t) => CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::from_polar(1.0, -t / 2.0),
                    c(0.0),
                    c(0.0),
                    Complex64::from_polar(1.0, t / 2.0),
                ],
            ),
            Gate::Cnot(..) => return None,
        })
    }

    /// Full-register unitary; qubit 0 is the most significant bit.
    pub fn unitary(&self, n: usize) -> CMatrix {
        let d = 1 << n;
        match *self {
            Gate::Cnot(ctl, tgt) => {
                let mut m = CMatrix::zeros(d, d);
                for i in 0..d {
                    let cbit = (i >> (n - 1 - ctl)) & 1;
                    let j = if cbit == 1 { i ^ (1 << (n - 1 - tgt)) } else { i };
                    m[(j, i)] = c(1.0);
                }
                m
            }
            _ => {
                let u = self.single().expect("single-qubit gate");
                let q = self.support()[0];
                (0..n).fold(CMatrix::identity(1, 1), |acc, k| {
                    acc.kronecker(&if k == q { u.clone() } else { CMatrix::identity(2, 2) })
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseScope {
    /// Depolarize only the qubits the gate acts on.
    GateSupport,
    /// Depolarize the whole register after every gate.
    FullRegister,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self, Error> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "{n_qubits} qubits outside 1..={MAX_QUBITS}"
            )));
        }
        for g in &gates {
            let sup = g.support();
            if sup.iter().any(|&q| q >= n_qubits) || (sup.len() == 2 && sup[0] == sup[1]) {
                return Err(Error::InvalidParameter(format!("bad qubit indices in {g:?}")));
            }
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

fn pauli(k: usize) -> CMatrix {
    let i = Complex64::i();
    match k {
        0 => CMatrix::identity(2, 2),
        1 => CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        2 => CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        _ => CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    }
}

/// `(1 − p)ρ + p·Tr_S(ρ) ⊗ I_S/2^|S|`, computed as a Pauli twirl over `S`.
pub fn depolarize_qubits(rho: &CMatrix, qubits: &[usize], p: f64, n: usize) -> CMatrix {
    let k = qubits.len();
    let mut twirl = CMatrix::zeros(rho.nrows(), rho.ncols());
    for code in 0..(1usize << (2 * k)) {
        let op = (0..n).fold(CMatrix::identity(1, 1), |acc, q| {
            let f = match qubits.iter().position(|&s| s == q) {
                Some(pos) => pauli((code >> (2 * pos)) & 3),
                None => CMatrix::identity(2, 2),
            };
            acc.kronecker(&f)
        });
        twirl += &op * rho * op.adjoint();
    }
    rho * c(1.0 - p) + twirl * c(p / (1usize << (2 * k)) as f64)
}

pub fn run_noisy(circuit: &Circuit, p_gate: f64, scope: NoiseScope) -> Result<DensityMatrix, Error> {
    if !(0.0..=1.0).contains(&p_gate) {
        return Err(Error::InvalidParameter(format!("gate error {p_gate} outside [0, 1]")));
    }
    let n = circuit.n_qubits;
    let d = circuit.dim();
    let mut rho = CMatrix::zeros(d, d);
    rho[(0, 0)] = c(1.0);
    for g in &circuit.gates {
        let u = g.unitary(n);
        rho = &u * rho * u.adjoint();
        if p_gate > 0.0 {
            rho = match scope {
                NoiseScope::GateSupport => depolarize_qubits(&rho, &g.support(), p_gate, n),
                NoiseScope::FullRegister => rho * c(1.0 - p_gate) + CMatrix::identity(d, d) * c(p_gate / d as f64),
            };
        }
    }
    Ok(DensityMatrix::from_trusted(rho))
}

pub fn run_ideal(circuit: &Circuit) -> DensityMatrix {
    run_noisy(circuit, 0.0, NoiseScope::GateSupport).expect("noiseless run")
}

/// Solves `Tr(ρ_noisy ρ_ideal) = (1 − p) + p/d` for `p`, clamped to [0, 1].
pub fn estimate_p_eff(noisy: &DensityMatrix, ideal: &DensityMatrix) -> Result<f64, Error> {
    if noisy.dim() != ideal.dim() {
        return Err(Error::DimensionMismatch(noisy.dim(), ideal.dim()));
    }
    let d = noisy.dim() as f64;
    let overlap = (noisy.matrix() * ideal.matrix()).trace().re;
    Ok(((1.0 - overlap) / (1.0 - 1.0 / d)).clamp(0.0, 1.0))
}

pub fn ghz(n: usize) -> Circuit {
    let mut gates = vec![Gate::H(0)];
    gates.extend((0..n - 1).map(|q| Gate::Cnot(q, q + 1)));
    Circuit::new(n, gates).expect("valid ghz")
}

/// RY(2·acos(1/√2)) on qubit 0, CNOT, then X on qubit 1.
pub fn w_like() -> Circuit {
    let theta = 2.0 * std::f64::consts::FRAC_1_SQRT_2.acos();
    Circuit::new(2, vec![Gate::Ry(0, theta), Gate::Cnot(0, 1), Gate::X(1)]).expect("valid w-like")
}

/// Two layers of random RY/RZ on every qubit followed by a CNOT chain.
pub fn random_circuit(n: usize, rng: &mut impl Rng) -> Circuit {
    let mut gates = vec![];
    for _ in 0..2 {
        for q in 0..n {
            gates.push(Gate::Ry(q, rng.random_range(0.0..2.0 * PI)));
            gates.push(Gate::Rz(q, rng.random_range(0.0..2.0 * PI)));
        }
        gates.extend((0..n - 1).map(|q| Gate::Cnot(q, q + 1)));
    }
    Circuit::new(n, gates).expect("valid random circuit")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SanityRow {
    pub test: String,
    pub dim: usize,
    pub f_noisy: f64,
    pub f_coherence_max: f64,
    pub f_channel_inversion: f64,
    pub p_eff: f64,
}

/// Scores one circuit: noisy fidelity, blind recoveries, and the effective depolarizing rate.
pub fn sanity_row(name: &str, circuit: &Circuit, p_gate: f64, scope: NoiseScope) -> Result<SanityRow, Error> {
    let ideal = run_ideal(circuit);
    let noisy = run_noisy(circuit, p_gate, scope)?;
    let sp = EnergySpectrum::equally_spaced(circuit.dim());
    let p_eff = estimate_p_eff(&noisy, &ideal)?;
    let com = recover(&noisy, &estimate_coherence_max(&noisy)?.state, &sp)?;
    let inv_params = NoiseParams::depolarizing(p_eff.min(SCALE_CAP));
    let inv = recover(
        &noisy,
        &estimate_channel_inversion(&noisy, &inv_params, &sp)?.state,
        &sp,
    )?;
    Ok(SanityRow {
        test: name.to_string(),
        dim: circuit.dim(),
        f_noisy: fidelity(&noisy, &ideal)?,
        f_coherence_max: fidelity(&com, &ideal)?,
        f_channel_inversion: fidelity(&inv, &ideal)?,
        p_eff,
    })
}

pub const SANITY_TESTS: [&str; 5] = ["ghz_2q", "ghz_3q", "w_like_2q", "random_2q", "random_3q"];

pub fn sanity_circuits(seed: u64) -> Vec<(&'static str, Circuit)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = random_circuit(2, &mut rng);
    let r3 = random_circuit(3, &mut rng);
    SANITY_TESTS
        .iter()
        .copied()
        .zip([ghz(2), ghz(3), w_like(), r2, r3])
        .collect()
}

pub fn sanity_suite(seed: u64, p_gate: f64, scope: NoiseScope) -> Result<Vec<SanityRow>, Error> {
    sanity_circuits(seed)
        .iter()
        .map(|(name, circ)| sanity_row(name, circ, p_gate, scope))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_are_unitary() {
        let gates = [
            Gate::H(1),
            Gate::X(0),
            Gate::Ry(2, 0.7),
            Gate::Rz(0, -1.3),
            Gate::Cnot(2, 0),
        ];
        for g in gates {
            let u = g.unitary(3);
            assert!((&u * u.adjoint() - CMatrix::identity(8, 8)).norm() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn noiseless_ghz_is_exact() {
        let r = run_ideal(&ghz(2));
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((r.get(i, j).re - 0.5).abs() < 1e-12);
        }
        assert!((r.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn w_like_prepares_bell_state() {
        let r = run_ideal(&w_like());
        assert!((r.get(1, 2).re - 0.5).abs() < 1e-12);
        assert!((r.get(1, 1).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn local_twirl_is_partial_trace_channel() {
        let r = run_ideal(&ghz(2));
        let out = depolarize_qubits(r.matrix(), &[0, 1], 1.0, 2);
        assert!((out - CMatrix::identity(4, 4) / c(4.0)).norm() < 1e-12);
        let out = depolarize_qubits(r.matrix(), &[0], 0.3, 2);
        assert!((out.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn p_eff_limits() {
        let r = run_ideal(&ghz(2));
        assert!(estimate_p_eff(&r, &r).unwrap() < 1e-12);
        let m = DensityMatrix::maximally_mixed(4);
        assert!((estimate_p_eff(&m, &r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn global_noise_on_identity_circuit_lowers_purity() {
        let mut last = 1.0 + 1e-12;
        for k in 0..6 {
            let circ = Circuit::new(2, vec![Gate::X(0); 2 * k]).unwrap();
            let pur = run_noisy(&circ, 0.1, NoiseScope::FullRegister).unwrap().purity();
            assert!(pur < last || k == 0);
            last = pur;
        }
    }

    #[test]
    fn rejects_bad_circuits() {
        assert!(Circuit::new(4, vec![]).is_err());
        assert!(Circuit::new(2, vec![Gate::Cnot(1, 1)]).is_err());
        assert!(Circuit::new(2, vec![Gate::H(2)]).is_err());
    }
}
