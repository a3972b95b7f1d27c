//! Noisy VQE for a two-qubit H₂ Hamiltonian with blind correction.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::core_linalg::{c, eigvalsh, CMatrix, CVector, DensityMatrix, EnergySpectrum};
use crate::estimators::{estimate_channel_inversion, estimate_coherence_max};
use crate::noise::{apply_combined, NoiseParams};
use crate::recovery::recover;
use crate::Error;

const BUNDLED_H2: &str = include_str!("../data/h2_sto3g.txt");
const TERMS: [&str; 6] = ["I", "Z0", "Z1", "Z0Z1", "X0X1", "Y0Y1"];

/// Exact ground energy quoted for the STO-3G H₂ model.
pub const H2_REFERENCE_ENERGY: f64 = -1.851;

/// Coefficients of I, Z₀, Z₁, Z₀Z₁, X₀X₁, Y₀Y₁ in Hartree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hamiltonian2Q {
    pub coeffs: [f64; 6],
}

fn pauli2(a: usize, b: usize) -> CMatrix {
    let i = Complex64::i();
    let p = |k: usize| match k {
        0 => CMatrix::identity(2, 2),
        1 => CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        2 => CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        _ => CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    };
    p(a).kronecker(&p(b))
}

impl Hamiltonian2Q {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut coeffs = [f64::NAN; 6];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Config(format!("hamiltonian line {}: `{raw}`", lineno + 1));
            let (k, v) = line.split_once('=').ok_or_else(bad)?;
            let idx = TERMS.iter().position(|t| *t == k.trim()).ok_or_else(bad)?;
            coeffs[idx] = v.trim().parse().map_err(|_| bad())?;
        }
        if let Some(i) = coeffs.iter().position(|x| x.is_nan()) {
            return Err(Error::Config(format!("hamiltonian term {} missing", TERMS[i])));
        }
        Ok(Self { coeffs })
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn matrix(&self) -> CMatrix {
        let ops = [
            pauli2(0, 0),
            pauli2(3, 0),
            pauli2(0, 3),
            pauli2(3, 3),
            pauli2(1, 1),
            pauli2(2, 2),
        ];
        ops.iter()
            .zip(self.coeffs)
            .fold(CMatrix::zeros(4, 4), |acc, (op, g)| acc + op * c(g))
    }

    pub fn spectrum(&self) -> Vec<f64> {
        eigvalsh(&self.matrix())
    }

    pub fn ground_energy(&self) -> f64 {
        self.spectrum()[0]
    }

    /// `Tr(Hρ)`; the imaginary part is returned for diagnostics.
    pub fn energy(&self, rho: &DensityMatrix) -> Complex64 {
        (self.matrix() * rho.matrix()).trace()
    }
}

pub fn load_h2_hamiltonian() -> Result<Hamiltonian2Q, Error> {
    Hamiltonian2Q::parse(BUNDLED_H2)
}

fn ry(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(a, b)] = c(1.0);
    }
    m
}

/// `(RY(θ₂)⊗RY(θ₃)) · CNOT · (RY(θ₀)⊗RY(θ₁)) |00⟩`
pub fn ansatz_vector(theta: &[f64; 4]) -> CVector {
    let mut v = CVector::zeros(4);
    v[0] = c(1.0);
    let v = ry(theta[0]).kronecker(&ry(theta[1])) * v;
    let v = cnot() * v;
    ry(theta[2]).kronecker(&ry(theta[3])) * v
}

pub fn ansatz_state(theta: &[f64; 4]) -> DensityMatrix {
    DensityMatrix::from_pure(&ansatz_vector(theta)).expect("unitary image of a unit vector")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scenario {
    Noiseless,
    Noisy,
    BlindCoherenceMax,
    BlindChannelInversion,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Self::Noiseless,
        Self::Noisy,
        Self::BlindCoherenceMax,
        Self::BlindChannelInversion,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Noiseless => "noiseless",
            Self::Noisy => "noisy",
            Self::BlindCoherenceMax => "blind_coherence_max",
            Self::BlindChannelInversion => "blind_channel_inversion",
        }
    }
}

/// The state whose energy the optimizer sees under a scenario.
pub fn scenario_state(theta: &[f64; 4], scenario: Scenario, noise: &NoiseParams) -> Result<DensityMatrix, Error> {
    let sp = EnergySpectrum::equally_spaced(4);
    let ideal = ansatz_state(theta);
    if scenario == Scenario::Noiseless {
        return Ok(ideal);
    }
    let noisy = apply_combined(&ideal, noise, &sp)?;
    let est = match scenario {
        Scenario::Noisy => return Ok(noisy),
        Scenario::BlindCoherenceMax => estimate_coherence_max(&noisy)?.state,
        _ => estimate_channel_inversion(&noisy, noise, &sp)?.state,
    };
    recover(&noisy, &est, &sp)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after each simplex iteration.
    pub trace: Vec<f64>,
}

/// Nelder–Mead with standard coefficients (reflect 1, expand 2, contract ½, shrink ½).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    ftol: f64,
) -> SimplexResult {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
    let mut trace = vec![];
    let mut converged = false;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        trace.push(vals[0]);
        if vals[n] - vals[0] <= ftol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (pts[n][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            (pts[n], vals[n]) = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < vals[n - 1] {
            (pts[n], vals[n]) = (xr, fr);
        } else {
            let (xc, fc) = if fr < vals[n] {
                let x = along(-0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if fc < vals[n].min(fr) {
                (pts[n], vals[n]) = (xc, fc);
            } else {
                for i in 1..=n {
                    pts[i] = (0..n).map(|k| pts[0][k] + 0.5 * (pts[i][k] - pts[0][k])).collect();
                    vals[i] = eval(&pts[i], &mut evals);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    SimplexResult {
        x: pts[best].clone(),
        f: vals[best],
        evaluations: evals,
        converged,
        trace,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VqeConfig {
    pub noise: NoiseParams,
    pub budget: usize,
    pub restarts: usize,
    pub step: f64,
    pub ftol: f64,
    pub seed: u64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            noise: NoiseParams {
                gamma_dephasing: 0.5,
                p_depolarizing: 0.1,
                gamma_ad: 0.05,
            },
            budget: 200,
            restarts: 3,
            step: 0.5,
            ftol: 1e-10,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VqeRun {
    pub scenario: Scenario,
    pub theta: [f64; 4],
    pub energy: f64,
    pub error: f64,
    /// Best energy so far after each simplex iteration, across restarts.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Seeded multi-start simplex minimization of the scenario energy.
pub fn run_vqe(h: &Hamiltonian2Q, scenario: Scenario, cfg: &VqeConfig) -> Result<VqeRun, Error> {
    cfg.noise.validate()?;
    let e0 = h.ground_energy();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut failure: Option<Error> = None;
    let mut objective = |x: &[f64]| -> f64 {
        let th = [x[0], x[1], x[2], x[3]];
        match scenario_state(&th, scenario, &cfg.noise) {
            Ok(r) => h.energy(&r).re,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    };
    let mut best: Option<SimplexResult> = None;
    let mut trace = vec![];
    let mut converged = false;
    for _ in 0..cfg.restarts.max(1) {
        let x0: Vec<f64> = (0..4)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let r = nelder_mead(&mut objective, &x0, cfg.step, cfg.budget, cfg.ftol);
        let floor = best.as_ref().map_or(f64::INFINITY, |b| b.f);
        trace.extend(r.trace.iter().map(|&v| v.min(floor)));
        converged |= r.converged;
        if r.f < floor {
            best = Some(r);
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let b = best.ok_or(Error::Degenerate("no optimizer run"))?;
    let theta = [b.x[0], b.x[1], b.x[2], b.x[3]];
    Ok(VqeRun {
        scenario,
        theta,
        energy: b.f,
        error: b.f - e0,
        trace,
        converged,
    })
}

/// Helper for expressivity checks: a seeded random parameter vector.
pub fn random_theta(rng: &mut impl Rng) -> [f64; 4] {
    [0; 4].map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_hamiltonian_ground_energy() {
        let h = load_h2_hamiltonian().unwrap();
        let m = h.matrix();
        assert!((&m - m.adjoint()).norm() < 1e-15);
        assert!((h.ground_energy() - H2_REFERENCE_ENERGY).abs() < 0.005);
        assert_eq!(h.spectrum().len(), 4);
    }

    #[test]
    fn parse_errors() {
        assert!(Hamiltonian2Q::parse("I = 1\n").is_err());
        assert!(Hamiltonian2Q::parse("I = x\nZ0=0\nZ1=0\nZ0Z1=0\nX0X1=0\nY0Y1=0").is_err());
        assert!(Hamiltonian2Q::parse("Q = 1").is_err());
    }

    #[test]
    fn ansatz_at_zero_is_ground_ket() {
        let r = ansatz_state(&[0.0; 4]);
        assert!((r.get(0, 0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn simplex_minimizes_quadratic() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            0.5,
            1000,
            1e-14,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] + 2.0).abs() < 1e-4);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
