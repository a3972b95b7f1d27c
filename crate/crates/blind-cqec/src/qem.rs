//! Error-mitigation baselines at the density-matrix level.

use serde::Serialize;

use crate::core_linalg::{c, psd_project, trace, CMatrix, DensityMatrix, EnergySpectrum};
use crate::estimators::{average, estimate_channel_inversion, Estimate};
use crate::noise::{apply_combined, NoiseParams};
use crate::Error;

pub const DEFAULT_SCALES: [f64; 3] = [1.0, 2.0, 3.0];

/// Least-squares straight line through `(λ_k, M_k)` for every matrix element,
/// evaluated at `λ = 0`. Exact when the elements are affine in `λ`.
pub fn richardson_linear(scales: &[f64], mats: &[CMatrix]) -> Result<CMatrix, Error> {
    if scales.len() < 2 || scales.len() != mats.len() {
        return Err(Error::InvalidParameter(
            "extrapolation needs at least 2 matching scale points".into(),
        ));
    }
    let n = scales.len() as f64;
    let ml = scales.iter().sum::<f64>() / n;
    let sll: f64 = scales.iter().map(|l| (l - ml).powi(2)).sum();
    if sll == 0.0 {
        return Err(Error::InvalidParameter("scale points must differ".into()));
    }
    // Intercept weights: 1/n − ml (λ_k − ml)/sll.
    let d = mats[0].nrows();
    let mut out = CMatrix::zeros(d, d);
    for (l, m) in scales.iter().zip(mats) {
        out += m * c(1.0 / n - ml * (l - ml) / sll);
    }
    Ok(out)
}

/// Runs the channel at each scale factor, extrapolates to zero noise and projects.
pub fn zne_recover<F>(target: &DensityMatrix, channel: F, scales: &[f64]) -> Result<DensityMatrix, Error>
where
    F: Fn(&DensityMatrix, f64) -> Result<DensityMatrix, Error>,
{
    let mats = scales
        .iter()
        .map(|&l| channel(target, l).map(|r| r.into_matrix()))
        .collect::<Result<Vec<_>, _>>()?;
    psd_project(&richardson_linear(scales, &mats)?)
}

/// ZNE with the combined channel and every parameter scaled by λ.
pub fn zne_combined(
    target: &DensityMatrix,
    params: &NoiseParams,
    spectrum: &EnergySpectrum,
    scales: &[f64],
) -> Result<DensityMatrix, Error> {
    zne_recover(target, |t, l| apply_combined(t, &params.scaled(l), spectrum), scales)
}

/// Probabilistic error cancellation in expectation is the inverse channel.
pub fn pec_recover(noisy: &DensityMatrix, params: &NoiseParams, spectrum: &EnergySpectrum) -> Result<Estimate, Error> {
    estimate_channel_inversion(noisy, params, spectrum)
}

/// `ρ^m / Tr ρ^m`
pub fn vd_recover(noisy: &DensityMatrix, m: u32) -> Result<DensityMatrix, Error> {
    if m == 0 {
        return Err(Error::InvalidParameter("distillation order must be positive".into()));
    }
    let mut p = noisy.matrix().clone();
    for _ in 1..m {
        p = &p * noisy.matrix();
    }
    let tr = trace(&p).re;
    Ok(DensityMatrix::from_trusted(p / c(tr)))
}

/// Copy average followed by projection, with no coherence step.
pub fn linear_inversion(copies: &[DensityMatrix]) -> Result<DensityMatrix, Error> {
    psd_project(average(copies)?.matrix())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: f64,
    pub tomographic: f64,
    pub statistical: f64,
}

/// Reference curves `c·d²/n` and `c′·n^{−1/2}`, both passing through `anchor` at the smallest `n`.
pub fn tomo_bound_curves(n_range: &[f64], anchor: f64) -> Vec<BoundRow> {
    let n0 = n_range.iter().copied().fold(f64::INFINITY, f64::min);
    n_range
        .iter()
        .map(|&n| BoundRow {
            n,
            tomographic: anchor * n0 / n,
            statistical: anchor * (n0 / n).sqrt(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_linalg::{fidelity, trace_distance};
    use crate::estimators::estimate_channel_inversion;
    use crate::targets::maximally_coherent;

    #[test]
    fn extrapolation_exact_on_affine_family() {
        let t = maximally_coherent(3);
        let mixed = DensityMatrix::maximally_mixed(3);
        let toy = |r: &DensityMatrix, l: f64| {
            let p = 0.1 * l;
            Ok(DensityMatrix::from_trusted(
                r.matrix() * c(1.0 - p) + mixed.matrix() * c(p),
            ))
        };
        let z = zne_recover(&t, toy, &DEFAULT_SCALES).unwrap();
        assert!(trace_distance(&z, &t).unwrap() < 1e-12);
        assert!(zne_recover(&t, toy, &[1.0]).is_err());
    }

    #[test]
    fn pec_matches_channel_inversion() {
        let sp = EnergySpectrum::equally_spaced(4);
        let p = NoiseParams::default();
        let n = apply_combined(&maximally_coherent(4), &p, &sp).unwrap();
        let a = pec_recover(&n, &p, &sp).unwrap().state;
        let b = estimate_channel_inversion(&n, &p, &sp).unwrap().state;
        assert_eq!(a, b);
        let zero = pec_recover(&n, &NoiseParams::zero(), &sp).unwrap().state;
        assert!(trace_distance(&zero, &n).unwrap() < 1e-12);
    }

    #[test]
    fn distillation_fixed_points() {
        let t = maximally_coherent(4);
        assert!(trace_distance(&vd_recover(&t, 2).unwrap(), &t).unwrap() < 1e-12);
        let m = DensityMatrix::maximally_mixed(4);
        assert!(trace_distance(&vd_recover(&m, 2).unwrap(), &m).unwrap() < 1e-12);
        let sp = EnergySpectrum::equally_spaced(4);
        let n = apply_combined(&t, &NoiseParams::default(), &sp).unwrap();
        let v = vd_recover(&n, 2).unwrap();
        assert!(v.purity() >= n.purity());
        assert!(fidelity(&v, &t).unwrap() > fidelity(&n, &t).unwrap());
    }

    #[test]
    fn bound_curve_scaling() {
        let rows = tomo_bound_curves(&[10.0, 20.0, 40.0], 0.2);
        assert!((rows[1].tomographic - rows[0].tomographic / 2.0).abs() < 1e-15);
        assert!((rows[0].statistical / rows[1].statistical - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(rows[0].tomographic, 0.2);
    }
}
