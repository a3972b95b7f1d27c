//! Π-recovery with the mode-inclusion gate, oracle baseline and bound checks.

use serde::Serialize;

use crate::core_linalg::{
    c, fidelity, l1_coherence, mode_included, mode_lattice, psd_project, trace_distance, trace_norm, DensityMatrix,
    EnergySpectrum, EIG_FLOOR, REL_ZERO_TOL,
};
use crate::fitting::{fit_linear, LinearFit};
use crate::Error;

/// Slack allowed on the Lipschitz fidelity bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// Recovers toward `est`, keeping only the coherence modes the noisy state still carries.
pub fn recover(noisy: &DensityMatrix, est: &DensityMatrix, spectrum: &EnergySpectrum) -> Result<DensityMatrix, Error> {
    if noisy.dim() != est.dim() {
        return Err(Error::DimensionMismatch(noisy.dim(), est.dim()));
    }
    let noisy_lat = mode_lattice(noisy, spectrum, REL_ZERO_TOL)?;
    let est_lat = mode_lattice(est, spectrum, REL_ZERO_TOL)?;
    if mode_included(est_lat, noisy_lat) {
        // A valid state is a fixed point of Π.
        return Ok(est.clone());
    }
    let d = est.dim();
    let mut m = est.matrix().clone();
    for i in 0..d {
        for j in 0..d {
            let gap = spectrum.gap(i, j).abs() as u64;
            if i != j && !noisy_lat.contains(gap) {
                m[(i, j)] = c(0.0);
            }
        }
    }
    psd_project(&m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryRecord {
    pub strategy: String,
    pub dim: usize,
    pub noise: String,
    pub seed: u64,
    pub f_noisy: f64,
    pub f_est: f64,
    pub f_rec: f64,
    pub f_oracle: f64,
    /// Trace distance between the recovered state and the target.
    pub trace_dist: f64,
    /// ℓ₁ coherence of the recovered state over that of the target.
    pub coherence_ratio: f64,
    /// Unnormalized `‖ρ̂_est − ρ_target‖₁`.
    pub est_error: f64,
    pub mode_ok: bool,
    /// The noisy state is numerically rank deficient.
    pub rank_warning: bool,
}

impl RecoveryRecord {
    /// `F_rec ≥ 1 − 2‖ρ̂_est − ρ_target‖₁`
    pub fn bound_holds(&self) -> bool {
        self.f_rec >= 1.0 - 2.0 * self.est_error - BOUND_SLACK
    }
}

pub struct RecordLabels<'a> {
    pub strategy: &'a str,
    pub noise: &'a str,
    pub seed: u64,
}

/// Target-side quantities shared by every estimate of one noisy state.
pub struct NoisyContext<'a> {
    pub target: &'a DensityMatrix,
    pub noisy: &'a DensityMatrix,
    pub spectrum: &'a EnergySpectrum,
    pub f_noisy: f64,
    pub f_oracle: f64,
    pub mode_ok: bool,
    pub rank_warning: bool,
    coh_target: f64,
}

impl<'a> NoisyContext<'a> {
    pub fn new(
        target: &'a DensityMatrix,
        noisy: &'a DensityMatrix,
        spectrum: &'a EnergySpectrum,
    ) -> Result<Self, Error> {
        let oracle = recover(noisy, target, spectrum)?;
        let noisy_lat = mode_lattice(noisy, spectrum, REL_ZERO_TOL)?;
        let target_lat = mode_lattice(target, spectrum, REL_ZERO_TOL)?;
        Ok(Self {
            target,
            noisy,
            spectrum,
            f_noisy: fidelity(noisy, target)?,
            f_oracle: fidelity(&oracle, target)?,
            mode_ok: mode_included(target_lat, noisy_lat),
            rank_warning: noisy.min_eigenvalue() < EIG_FLOOR,
            coh_target: l1_coherence(target),
        })
    }

    /// Recovers toward `est` and scores the result against the target.
    pub fn evaluate(&self, est: &DensityMatrix, labels: RecordLabels<'_>) -> Result<RecoveryRecord, Error> {
        let rec = recover(self.noisy, est, self.spectrum)?;
        Ok(RecoveryRecord {
            strategy: labels.strategy.to_string(),
            dim: self.target.dim(),
            noise: labels.noise.to_string(),
            seed: labels.seed,
            f_noisy: self.f_noisy,
            f_est: fidelity(est, self.target)?,
            f_rec: fidelity(&rec, self.target)?,
            f_oracle: self.f_oracle,
            trace_dist: trace_distance(&rec, self.target)?,
            coherence_ratio: if self.coh_target > 0.0 {
                l1_coherence(&rec) / self.coh_target
            } else {
                0.0
            },
            est_error: trace_norm(&(est.matrix() - self.target.matrix())),
            mode_ok: self.mode_ok,
            rank_warning: self.rank_warning,
        })
    }

    /// Scores a state produced by some other pipeline, with no recovery step.
    pub fn score_output(&self, out: &DensityMatrix, labels: RecordLabels<'_>) -> Result<RecoveryRecord, Error> {
        let f = fidelity(out, self.target)?;
        Ok(RecoveryRecord {
            strategy: labels.strategy.to_string(),
            dim: self.target.dim(),
            noise: labels.noise.to_string(),
            seed: labels.seed,
            f_noisy: self.f_noisy,
            f_est: f,
            f_rec: f,
            f_oracle: self.f_oracle,
            trace_dist: trace_distance(out, self.target)?,
            coherence_ratio: if self.coh_target > 0.0 {
                l1_coherence(out) / self.coh_target
            } else {
                0.0
            },
            est_error: trace_norm(&(out.matrix() - self.target.matrix())),
            mode_ok: self.mode_ok,
            rank_warning: self.rank_warning,
        })
    }

    /// The uncorrected noisy state scored as if it were the output.
    pub fn baseline(&self, labels: RecordLabels<'_>) -> Result<RecoveryRecord, Error> {
        self.score_output(self.noisy, labels)
    }
}

/// Scores one estimate against the known target.
pub fn evaluate(
    target: &DensityMatrix,
    noisy: &DensityMatrix,
    est: &DensityMatrix,
    spectrum: &EnergySpectrum,
    labels: RecordLabels<'_>,
) -> Result<RecoveryRecord, Error> {
    NoisyContext::new(target, noisy, spectrum)?.evaluate(est, labels)
}

/// Record for recovery with the true target as the estimate.
pub fn oracle_recover(
    noisy: &DensityMatrix,
    target: &DensityMatrix,
    spectrum: &EnergySpectrum,
) -> Result<RecoveryRecord, Error> {
    evaluate(
        target,
        noisy,
        target,
        spectrum,
        RecordLabels {
            strategy: "oracle",
            noise: "",
            seed: 0,
        },
    )
}

pub fn verify_bound(record: &RecoveryRecord, est: &DensityMatrix, target: &DensityMatrix) -> bool {
    record.f_rec >= 1.0 - 2.0 * trace_norm(&(est.matrix() - target.matrix())) - BOUND_SLACK
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzFit {
    pub fit: LinearFit,
    /// All points sit at one location, so slope and r are meaningless.
    pub degenerate: bool,
}

/// Least-squares `F_rec = a·F_est + b` over a batch of records.
pub fn empirical_lipschitz(records: &[RecoveryRecord]) -> Result<LipschitzFit, Error> {
    let x: Vec<f64> = records.iter().map(|r| r.f_est).collect();
    let y: Vec<f64> = records.iter().map(|r| r.f_rec).collect();
    let spread = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    if x.len() < 2 || spread(&x) < 1e-9 {
        return Ok(LipschitzFit {
            fit: LinearFit {
                slope: f64::NAN,
                intercept: f64::NAN,
                pearson_r: f64::NAN,
                r_squared: f64::NAN,
            },
            degenerate: true,
        });
    }
    Ok(LipschitzFit {
        fit: fit_linear(&x, &y)?,
        degenerate: false,
    })
}
