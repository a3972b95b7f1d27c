//! Blind target-state estimators.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::core_linalg::{
    c, eigh, fidelity, hermitize, project_decomposed, psd_project, trace_norm, CMatrix, DensityMatrix, EnergySpectrum,
    REL_ZERO_TOL,
};
use crate::noise::{dephase_matrix, no_jump_factors, NoiseParams};
use crate::recovery::recover;
use crate::Error;

/// Estimates with min eigenvalue below this are projected.
pub const PSD_TRIGGER: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    Naive,
    CoherenceMax,
    ChannelInversion,
    Iterative,
    MultiCopy,
    Hybrid,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::CoherenceMax => "coherence_max",
            Self::ChannelInversion => "channel_inversion",
            Self::Iterative => "iterative",
            Self::MultiCopy => "multicopy",
            Self::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub assumed_noise: Option<NoiseParams>,
    pub copies: usize,
    pub alpha: f64,
    pub max_iter: usize,
    pub conv_tol: f64,
    pub weight: f64,
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind) -> Self {
        Self {
            kind,
            assumed_noise: None,
            copies: 1,
            alpha: 0.5,
            max_iter: 20,
            conv_tol: 1e-4,
            weight: 0.5,
        }
    }

    pub fn with_noise(mut self, p: NoiseParams) -> Self {
        self.assumed_noise = Some(p);
        self
    }

    pub fn with_weight(mut self, w: f64) -> Self {
        self.weight = w;
        self
    }

    pub fn with_copies(mut self, n: usize) -> Self {
        self.copies = n;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if matches!(self.kind, EstimatorKind::ChannelInversion | EstimatorKind::Hybrid) && self.assumed_noise.is_none()
        {
            return Err(Error::InvalidParameter(format!(
                "{} needs assumed noise parameters",
                self.kind
            )));
        }
        if self.copies == 0 {
            return Err(Error::InvalidParameter("copies must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.weight) || !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(
                "weight must lie in [0,1] and alpha in [0,1)".into(),
            ));
        }
        if let Some(p) = &self.assumed_noise {
            p.validate()?;
        }
        Ok(())
    }

    /// Runs the strategy on one or more noisy copies. Single-copy strategies
    /// see the element-wise average of the copies.
    pub fn estimate(&self, copies: &[DensityMatrix], spectrum: &EnergySpectrum) -> Result<Estimate, Error> {
        self.validate()?;
        let avg = average(copies)?;
        let noise = || self.assumed_noise.expect("validated");
        match self.kind {
            EstimatorKind::Naive => Ok(Estimate::plain(estimate_naive(&avg))),
            EstimatorKind::CoherenceMax => estimate_coherence_max(&avg),
            EstimatorKind::ChannelInversion => estimate_channel_inversion(&avg, &noise(), spectrum),
            EstimatorKind::Iterative => {
                let rec = |est: &DensityMatrix| recover(&avg, est, spectrum);
                estimate_iterative(&avg, rec, self.alpha, self.max_iter, self.conv_tol)
            }
            EstimatorKind::MultiCopy => estimate_multicopy(copies),
            EstimatorKind::Hybrid => estimate_hybrid(&avg, &noise(), self.weight, spectrum),
        }
    }
}

/// An estimate together with the diagnostics gathered while producing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub state: DensityMatrix,
    /// The raw estimate needed a PSD projection.
    pub projected: bool,
    /// Depolarizing inversion in the regime where projection biases the estimate.
    pub bias: bool,
    pub converged: bool,
    pub iterations: usize,
}

impl Estimate {
    fn plain(state: DensityMatrix) -> Self {
        Self {
            state,
            projected: false,
            bias: false,
            converged: true,
            iterations: 0,
        }
    }

    /// Projects `m` if its spectrum dips below the trigger, otherwise keeps it.
    fn from_raw(m: CMatrix) -> Result<Self, Error> {
        let m = hermitize(&m);
        let (vals, vecs) = eigh(&m);
        let mut e = Self::plain(project_decomposed(&m, &vals, &vecs)?);
        e.projected = vals[0] < PSD_TRIGGER;
        Ok(e)
    }
}

pub fn average(copies: &[DensityMatrix]) -> Result<DensityMatrix, Error> {
    let first = copies
        .first()
        .ok_or(Error::InvalidParameter("no copies supplied".into()))?;
    let d = first.dim();
    let mut sum = CMatrix::zeros(d, d);
    for cp in copies {
        if cp.dim() != d {
            return Err(Error::DimensionMismatch(d, cp.dim()));
        }
        sum += cp.matrix();
    }
    Ok(DensityMatrix::from_trusted(sum / c(copies.len() as f64)))
}

pub fn estimate_naive(rho: &DensityMatrix) -> DensityMatrix {
    rho.clone()
}

/// Keeps the diagonal and sets `ρ_ij = √(p_i p_j) e^{iφ_ij}`, with `φ = 0` for vanished entries.
pub fn coherence_max_matrix(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let d = m.nrows();
    let thr = rel_tol * m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let p: Vec<f64> = (0..d).map(|i| m[(i, i)].re.max(0.0)).collect();
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            return c(m[(i, i)].re);
        }
        let z = m[(i, j)];
        let phase = if z.norm() > thr { z.arg() } else { 0.0 };
        num_complex::Complex64::from_polar((p[i] * p[j]).sqrt(), phase)
    })
}

pub fn estimate_coherence_max(rho: &DensityMatrix) -> Result<Estimate, Error> {
    Estimate::from_raw(coherence_max_matrix(rho.matrix(), REL_ZERO_TOL))
}

/// Level-wise amplitude-damping inverse: undo the no-jump scaling and fix the ground
/// population by the trace.
pub fn invert_amplitude_damping_matrix(m: &CMatrix, gamma_ad: f64) -> CMatrix {
    let d = m.nrows();
    let s = no_jump_factors(d, gamma_ad);
    let mut out = CMatrix::from_fn(d, d, |i, j| m[(i, j)] / (s[i] * s[j]));
    let excited: f64 = (1..d).map(|k| out[(k, k)].re).sum();
    out[(0, 0)] = c(m.trace().re - excited);
    out
}

pub fn invert_depolarizing_matrix(m: &CMatrix, p: f64) -> CMatrix {
    let d = m.nrows();
    (m - CMatrix::identity(d, d) * c(p / d as f64)) / c(1.0 - p)
}

/// Raw inverse in reverse application order, before any projection.
pub fn invert_channel_matrix(m: &CMatrix, params: &NoiseParams, spectrum: &EnergySpectrum) -> CMatrix {
    let x = invert_amplitude_damping_matrix(m, params.gamma_ad);
    let x = invert_depolarizing_matrix(&x, params.p_depolarizing);
    hermitize(&dephase_matrix(&x, -params.gamma_dephasing, spectrum))
}

pub fn estimate_channel_inversion(
    rho: &DensityMatrix,
    params: &NoiseParams,
    spectrum: &EnergySpectrum,
) -> Result<Estimate, Error> {
    params.validate()?;
    if spectrum.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), spectrum.dim()));
    }
    let d = rho.dim() as f64;
    let mut e = Estimate::from_raw(invert_channel_matrix(rho.matrix(), params, spectrum))?;
    e.bias = params.p_depolarizing >= 1.0 - 1.0 / d;
    Ok(e)
}

/// Damped fixed-point refinement starting from coherence maximization.
pub fn estimate_iterative<F>(
    rho: &DensityMatrix,
    recover_fn: F,
    alpha: f64,
    max_iter: usize,
    conv_tol: f64,
) -> Result<Estimate, Error>
where
    F: Fn(&DensityMatrix) -> Result<DensityMatrix, Error>,
{
    let mut est = estimate_coherence_max(rho)?.state;
    for k in 1..=max_iter {
        let rec = recover_fn(&est)?;
        let next = DensityMatrix::from_trusted(rec.matrix() * c(alpha) + est.matrix() * c(1.0 - alpha));
        let change = 1.0 - fidelity(&next, &est)?;
        est = next;
        if change.abs() < conv_tol {
            return Ok(Estimate {
                state: est,
                projected: false,
                bias: false,
                converged: true,
                iterations: k,
            });
        }
    }
    Ok(Estimate {
        state: est,
        projected: false,
        bias: false,
        converged: false,
        iterations: max_iter,
    })
}

pub fn estimate_multicopy(copies: &[DensityMatrix]) -> Result<Estimate, Error> {
    estimate_coherence_max(&average(copies)?)
}

pub fn estimate_hybrid(
    rho: &DensityMatrix,
    params: &NoiseParams,
    w: f64,
    spectrum: &EnergySpectrum,
) -> Result<Estimate, Error> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidParameter(format!("hybrid weight {w} outside [0, 1]")));
    }
    let inv = estimate_channel_inversion(rho, params, spectrum)?;
    let com = estimate_coherence_max(rho)?;
    let mut e = Estimate::from_raw(inv.state.matrix() * c(w) + com.state.matrix() * c(1.0 - w))?;
    e.bias = inv.bias;
    Ok(e)
}

/// A traceless Hermitian Gaussian matrix rescaled to trace norm `eps`.
pub fn traceless_perturbation<R: Rng + ?Sized>(d: usize, eps: f64, rng: &mut R) -> CMatrix {
    let mut g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        num_complex::Complex64::new(re, im)
    });
    g = hermitize(&g);
    let t = g.trace() / c(d as f64);
    for i in 0..d {
        g[(i, i)] -= t;
    }
    let n = trace_norm(&g);
    if n == 0.0 {
        return g;
    }
    g * c(eps / n)
}

/// One statistically fluctuating copy of `rho`.
pub fn perturbed_copy<R: Rng + ?Sized>(rho: &DensityMatrix, eps: f64, rng: &mut R) -> Result<DensityMatrix, Error> {
    psd_project(&(rho.matrix() + traceless_perturbation(rho.dim(), eps, rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_linalg::{fidelity, trace_distance};
    use crate::noise::{apply_combined, apply_dephasing, apply_depolarizing};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform(d: usize) -> DensityMatrix {
        DensityMatrix::new(CMatrix::from_element(d, d, c(1.0 / d as f64))).unwrap()
    }

    #[test]
    fn naive_is_identity() {
        let r = uniform(3);
        assert_eq!(estimate_naive(&r), r);
    }

    #[test]
    fn coherence_max_restores_dephased_qubit() {
        for g in [0.1, 1.0, 5.0] {
            let n = apply_dephasing(&uniform(2), g, &EnergySpectrum::equally_spaced(2)).unwrap();
            let e = estimate_coherence_max(&n).unwrap();
            assert!((fidelity(&e.state, &uniform(2)).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coherence_max_of_mixed_state_is_uniform() {
        let e = estimate_coherence_max(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!((e.state.matrix() - uniform(4).matrix()).norm() < 1e-12);
        let u = uniform(5);
        assert!((estimate_coherence_max(&u).unwrap().state.matrix() - u.matrix()).norm() < 1e-12);
    }

    #[test]
    fn coherence_max_keeps_phases() {
        let psi = crate::core_linalg::CVector::from_vec(vec![
            num_complex::Complex64::from_polar(0.6, 0.3),
            num_complex::Complex64::from_polar(0.8, -1.1),
        ]);
        let t = DensityMatrix::from_pure(&psi).unwrap();
        let n = apply_dephasing(&t, 0.7, &EnergySpectrum::equally_spaced(2)).unwrap();
        let e = estimate_coherence_max(&n).unwrap();
        assert!((fidelity(&e.state, &t).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn channel_inversion_exact_for_depolarizing() {
        let t = uniform(4);
        let n = apply_depolarizing(&t, 0.3).unwrap();
        let e = estimate_channel_inversion(&n, &NoiseParams::depolarizing(0.3), &EnergySpectrum::equally_spaced(4))
            .unwrap();
        assert!(trace_distance(&e.state, &t).unwrap() < 1e-10);
        assert!(!e.bias);
    }

    #[test]
    fn channel_inversion_bias_flag() {
        let n = DensityMatrix::maximally_mixed(2);
        let e = estimate_channel_inversion(&n, &NoiseParams::depolarizing(0.6), &EnergySpectrum::equally_spaced(2))
            .unwrap();
        assert!(e.bias);
    }

    #[test]
    fn channel_inversion_qubit_round_trip() {
        let t = uniform(2);
        let p = NoiseParams::default();
        let sp = EnergySpectrum::equally_spaced(2);
        let n = apply_combined(&t, &p, &sp).unwrap();
        let e = estimate_channel_inversion(&n, &p, &sp).unwrap();
        assert!(trace_distance(&e.state, &t).unwrap() < 1e-10);
    }

    #[test]
    fn iterative_with_zero_alpha_stops_at_start() {
        let n = apply_dephasing(&uniform(2), 1.0, &EnergySpectrum::equally_spaced(2)).unwrap();
        let e = estimate_iterative(&n, |x| Ok(x.clone()), 0.0, 20, 1e-4).unwrap();
        assert_eq!(e.iterations, 1);
        assert!(e.converged);
    }

    #[test]
    fn hybrid_endpoints() {
        let sp = EnergySpectrum::equally_spaced(4);
        let p = NoiseParams::default();
        let n = apply_combined(&uniform(4), &p, &sp).unwrap();
        let h0 = estimate_hybrid(&n, &p, 0.0, &sp).unwrap().state;
        let h1 = estimate_hybrid(&n, &p, 1.0, &sp).unwrap().state;
        assert!((h0.matrix() - estimate_coherence_max(&n).unwrap().state.matrix()).norm() < 1e-12);
        assert!((h1.matrix() - estimate_channel_inversion(&n, &p, &sp).unwrap().state.matrix()).norm() < 1e-12);
        assert!(estimate_hybrid(&n, &p, 1.5, &sp).is_err());
    }

    #[test]
    fn multicopy_of_identical_copies() {
        let sp = EnergySpectrum::equally_spaced(3);
        let n = apply_combined(&uniform(3), &NoiseParams::default(), &sp).unwrap();
        let single = estimate_coherence_max(&n).unwrap().state;
        let many = estimate_multicopy(&vec![n.clone(); 7]).unwrap().state;
        assert!((single.matrix() - many.matrix()).norm() < 1e-12);
    }

    #[test]
    fn spec_requires_noise_for_inversion() {
        let s = EstimatorSpec::new(EstimatorKind::ChannelInversion);
        assert!(s.validate().is_err());
        assert!(s.with_noise(NoiseParams::default()).validate().is_ok());
    }

    #[test]
    fn perturbation_is_traceless_with_given_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = traceless_perturbation(5, 0.05, &mut rng);
        assert!(g.trace().norm() < 1e-14);
        assert!((trace_norm(&g) - 0.05).abs() < 1e-12);
    }
}
