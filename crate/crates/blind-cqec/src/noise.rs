//! Dephasing, depolarizing and cascaded amplitude-damping channels.

use serde::{Deserialize, Serialize};

use crate::core_linalg::{c, CMatrix, DensityMatrix, EnergySpectrum};
use crate::Error;

/// Channel parameters, applied as dephasing → depolarizing → amplitude damping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub gamma_dephasing: f64,
    pub p_depolarizing: f64,
    pub gamma_ad: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            gamma_dephasing: 1.0,
            p_depolarizing: 0.15,
            gamma_ad: 0.1,
        }
    }
}

/// Cap used when scaling probabilities up for extrapolation.
pub const SCALE_CAP: f64 = 0.999;

impl NoiseParams {
    pub fn new(gamma_dephasing: f64, p_depolarizing: f64, gamma_ad: f64) -> Result<Self, Error> {
        let p = Self {
            gamma_dephasing,
            p_depolarizing,
            gamma_ad,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        Self {
            gamma_dephasing: 0.0,
            p_depolarizing: 0.0,
            gamma_ad: 0.0,
        }
    }

    pub fn dephasing(gamma: f64) -> Self {
        Self {
            gamma_dephasing: gamma,
            ..Self::zero()
        }
    }

    pub fn depolarizing(p: f64) -> Self {
        Self {
            p_depolarizing: p,
            ..Self::zero()
        }
    }

    pub fn amplitude_damping(gamma_ad: f64) -> Self {
        Self {
            gamma_ad,
            ..Self::zero()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        check_dephasing(self.gamma_dephasing)?;
        check_unit_interval("p_depolarizing", self.p_depolarizing)?;
        check_unit_interval("gamma_ad", self.gamma_ad)
    }

    /// Every parameter multiplied by `lambda`; probabilities capped below 1.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            gamma_dephasing: self.gamma_dephasing * lambda,
            p_depolarizing: (self.p_depolarizing * lambda).min(SCALE_CAP),
            gamma_ad: (self.gamma_ad * lambda).min(SCALE_CAP),
        }
    }

    /// Each parameter multiplied by its own factor (misspecification studies).
    pub fn perturbed(&self, f_deph: f64, f_depol: f64, f_ad: f64) -> Self {
        Self {
            gamma_dephasing: self.gamma_dephasing * f_deph,
            p_depolarizing: (self.p_depolarizing * f_depol).min(SCALE_CAP),
            gamma_ad: (self.gamma_ad * f_ad).min(SCALE_CAP),
        }
    }

    pub fn label(&self) -> String {
        format!(
            "deph={}/depol={}/ad={}",
            self.gamma_dephasing, self.p_depolarizing, self.gamma_ad
        )
    }
}

fn check_dephasing(g: f64) -> Result<(), Error> {
    if !(g >= 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dephasing rate {g} must be finite and >= 0"
        )));
    }
    Ok(())
}

fn check_unit_interval(name: &str, x: f64) -> Result<(), Error> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("{name} = {x} outside [0, 1)")));
    }
    Ok(())
}

/// Multiplies `ρ_ij` by `e^{-γ|Δ_ij|}`.
pub fn dephase_matrix(m: &CMatrix, gamma: f64, spectrum: &EnergySpectrum) -> CMatrix {
    let d = m.nrows();
    CMatrix::from_fn(d, d, |i, j| m[(i, j)] * (-gamma * spectrum.gap(i, j).abs()).exp())
}

/// `(1 − p)ρ + (p/d) I`
pub fn depolarize_matrix(m: &CMatrix, p: f64) -> CMatrix {
    let d = m.nrows();
    m * c(1.0 - p) + CMatrix::identity(d, d) * c(p / d as f64)
}

/// No-jump amplitudes of the cascade: 1 for the ground level, √(1−γ) above it.
pub fn no_jump_factors(d: usize, gamma_ad: f64) -> Vec<f64> {
    let s = (1.0 - gamma_ad).sqrt();
    (0..d).map(|k| if k == 0 { 1.0 } else { s }).collect()
}

/// Kraus channel with `K₀ = diag(1, √(1−γ), …)` and `K_k = √γ |k−1⟩⟨k|`.
pub fn amplitude_damp_matrix(m: &CMatrix, gamma_ad: f64) -> CMatrix {
    let d = m.nrows();
    let s = no_jump_factors(d, gamma_ad);
    let mut out = CMatrix::from_fn(d, d, |i, j| m[(i, j)] * s[i] * s[j]);
    for k in 1..d {
        out[(k - 1, k - 1)] += m[(k, k)] * gamma_ad;
    }
    out
}

pub fn apply_dephasing(rho: &DensityMatrix, gamma: f64, spectrum: &EnergySpectrum) -> Result<DensityMatrix, Error> {
    check_dephasing(gamma)?;
    if spectrum.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), spectrum.dim()));
    }
    Ok(DensityMatrix::from_trusted(dephase_matrix(
        rho.matrix(),
        gamma,
        spectrum,
    )))
}

pub fn apply_depolarizing(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix, Error> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p_depolarizing = {p} outside [0, 1]")));
    }
    Ok(DensityMatrix::from_trusted(depolarize_matrix(rho.matrix(), p)))
}

pub fn apply_amplitude_damping(rho: &DensityMatrix, gamma_ad: f64) -> Result<DensityMatrix, Error> {
    check_unit_interval("gamma_ad", gamma_ad)?;
    Ok(DensityMatrix::from_trusted(amplitude_damp_matrix(
        rho.matrix(),
        gamma_ad,
    )))
}

pub fn apply_combined(
    rho: &DensityMatrix,
    params: &NoiseParams,
    spectrum: &EnergySpectrum,
) -> Result<DensityMatrix, Error> {
    params.validate()?;
    let r = apply_dephasing(rho, params.gamma_dephasing, spectrum)?;
    let r = apply_depolarizing(&r, params.p_depolarizing)?;
    apply_amplitude_damping(&r, params.gamma_ad)
}
