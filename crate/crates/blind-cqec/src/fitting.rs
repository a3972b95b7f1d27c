//! Power-law and linear least squares, and the crossover-dimension equation.

use serde::Serialize;

use crate::Error;

pub const MULTISTART_ALPHAS: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
const MAX_ITER: usize = 200;
const GRAD_TOL: f64 = 1e-10;
const STEP_DAMPING: f64 = 0.5;
const MAX_HALVINGS: usize = 60;

/// Fit of `F(n) = 1 − A n^{−α}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub a: f64,
    pub alpha: f64,
    /// Row-major 2×2 covariance of (A, α).
    pub cov: [[f64; 2]; 2],
    pub r_squared: f64,
    pub residual: f64,
    pub converged: bool,
    /// False when the data carry no information about α.
    pub identifiable: bool,
}

impl FitResult {
    pub fn alpha_stderr(&self) -> f64 {
        self.cov[1][1].max(0.0).sqrt()
    }

    pub fn a_stderr(&self) -> f64 {
        self.cov[0][0].max(0.0).sqrt()
    }
}

fn model(a: f64, alpha: f64, n: f64) -> f64 {
    1.0 - a * n.powf(-alpha)
}

fn ssr(n: &[f64], f: &[f64], a: f64, alpha: f64) -> f64 {
    n.iter()
        .zip(f)
        .map(|(&ni, &fi)| (model(a, alpha, ni) - fi).powi(2))
        .sum()
}

struct Normal {
    jtj: [[f64; 2]; 2],
    jtr: [f64; 2],
}

fn normal_equations(n: &[f64], f: &[f64], a: f64, alpha: f64) -> Normal {
    let mut jtj = [[0.0; 2]; 2];
    let mut jtr = [0.0; 2];
    for (&ni, &fi) in n.iter().zip(f) {
        let p = ni.powf(-alpha);
        let r = 1.0 - a * p - fi;
        let j = [-p, a * p * ni.ln()];
        for u in 0..2 {
            jtr[u] += j[u] * r;
            for v in 0..2 {
                jtj[u][v] += j[u] * j[v];
            }
        }
    }
    Normal { jtj, jtr }
}

fn invert2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

/// Linear least-squares amplitude for a fixed exponent.
fn amplitude_for(n: &[f64], f: &[f64], alpha: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (&ni, &fi) in n.iter().zip(f) {
        let x = ni.powf(-alpha);
        num += x * (1.0 - fi);
        den += x * x;
    }
    num / den
}

fn gauss_newton(n: &[f64], f: &[f64], alpha0: f64) -> (f64, f64, f64, bool) {
    let mut a = amplitude_for(n, f, alpha0);
    let mut alpha = alpha0;
    let mut cur = ssr(n, f, a, alpha);
    for _ in 0..MAX_ITER {
        let ne = normal_equations(n, f, a, alpha);
        if ne.jtr[0].hypot(ne.jtr[1]) < GRAD_TOL {
            return (a, alpha, cur, true);
        }
        let Some(inv) = invert2(ne.jtj) else {
            return (a, alpha, cur, false);
        };
        let step = [
            -(inv[0][0] * ne.jtr[0] + inv[0][1] * ne.jtr[1]),
            -(inv[1][0] * ne.jtr[0] + inv[1][1] * ne.jtr[1]),
        ];
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let (na, nal) = (a + t * step[0], alpha + t * step[1]);
            let trial = ssr(n, f, na, nal);
            if trial.is_finite() && trial <= cur {
                let gain = cur - trial;
                a = na;
                alpha = nal;
                cur = trial;
                accepted = true;
                if gain <= f64::EPSILON * cur.max(f64::MIN_POSITIVE) {
                    return (a, alpha, cur, true);
                }
                break;
            }
            t *= STEP_DAMPING;
        }
        if !accepted {
            return (a, alpha, cur, true);
        }
    }
    let ne = normal_equations(n, f, a, alpha);
    (a, alpha, cur, ne.jtr[0].hypot(ne.jtr[1]) < GRAD_TOL)
}

/// Damped Gauss–Newton with multi-start over α; ties go to the smaller α.
pub fn fit_power_law(n_values: &[f64], f_values: &[f64]) -> Result<FitResult, Error> {
    if n_values.len() != f_values.len() {
        return Err(Error::DimensionMismatch(n_values.len(), f_values.len()));
    }
    if n_values.len() < 3 {
        return Err(Error::InvalidParameter("power-law fit needs at least 3 points".into()));
    }
    if n_values.iter().any(|&n| n.is_nan() || n <= 0.0) || f_values.iter().any(|&f| f.is_nan() || f > 1.0 + 1e-12) {
        return Err(Error::InvalidParameter("power-law fit needs n > 0 and f <= 1".into()));
    }
    let m = n_values.len() as f64;
    let mean = f_values.iter().sum::<f64>() / m;
    let sst: f64 = f_values.iter().map(|f| (f - mean).powi(2)).sum();
    if f_values.iter().all(|&f| f >= 1.0 - 1e-12) {
        return Ok(FitResult {
            a: 0.0,
            alpha: 0.0,
            cov: [[0.0; 2]; 2],
            r_squared: 0.0,
            residual: ssr(n_values, f_values, 0.0, 0.0),
            converged: true,
            identifiable: false,
        });
    }
    let mut best: Option<(f64, f64, f64, bool)> = None;
    for &a0 in &MULTISTART_ALPHAS {
        let cand = gauss_newton(n_values, f_values, a0);
        if !cand.2.is_finite() {
            continue;
        }
        best = match best {
            None => Some(cand),
            Some(b) => {
                let tie = (cand.2 - b.2).abs() <= 1e-15 * b.2.max(1e-300);
                if cand.2 < b.2 && !tie || tie && cand.1 < b.1 {
                    Some(cand)
                } else {
                    Some(b)
                }
            }
        };
    }
    let (a, alpha, res, converged) = best.ok_or(Error::Degenerate("every fit start diverged"))?;
    let dof = (m - 2.0).max(1.0);
    let ne = normal_equations(n_values, f_values, a, alpha);
    let cov = invert2(ne.jtj)
        .map(|inv| inv.map(|row| row.map(|v| v * res / dof)))
        .unwrap_or([[f64::INFINITY; 2]; 2]);
    let r_squared = if sst > 0.0 {
        (1.0 - res / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(FitResult {
        a,
        alpha,
        cov,
        r_squared,
        residual: res,
        converged,
        identifiable: a.abs() > 1e-12,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<LinearFit, Error> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter("linear fit needs at least 2 points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        syy += (yi - my) * (yi - my);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let pearson_r = if syy > 0.0 { sxy / (sxx * syy).sqrt() } else { f64::NAN };
    let r_squared = if syy > 0.0 {
        let ssr: f64 = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| (yi - slope * xi - intercept).powi(2))
            .sum();
        1.0 - ssr / syy
    } else {
        f64::NAN
    };
    Ok(LinearFit {
        slope,
        intercept,
        pearson_r,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverRoot {
    pub d: f64,
    /// Positive and at least 1.
    pub physical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverResult {
    pub gamma: f64,
    pub gamma_ad: f64,
    pub roots: Vec<CrossoverRoot>,
    /// Set when every d > 0 solves the equation.
    pub identically_satisfied: bool,
    pub diagnostic: String,
}

/// Solves `d = 1 / (2(γ_AD + γ/d))`.
///
/// Multiplying both sides by `2(γ_AD + γ/d)` gives `2γ_AD·d + 2γ = 1`, which is
/// linear in `d`: `d = (1 − 2γ) / (2γ_AD)`. With `γ_AD = 0` the equation holds for
/// every `d` when `γ = 1/2` and for none otherwise.
pub fn crossover_fixed_point(gamma: f64, gamma_ad: f64) -> CrossoverResult {
    let base = CrossoverResult {
        gamma,
        gamma_ad,
        roots: vec![],
        identically_satisfied: false,
        diagnostic: String::new(),
    };
    if gamma_ad == 0.0 {
        if (2.0 * gamma - 1.0).abs() < 1e-15 {
            return CrossoverResult {
                identically_satisfied: true,
                diagnostic: "gamma_ad = 0 and gamma = 1/2: every d solves the equation".into(),
                ..base
            };
        }
        return CrossoverResult {
            diagnostic: "gamma_ad = 0 and gamma != 1/2: no solution".into(),
            ..base
        };
    }
    let d = (1.0 - 2.0 * gamma) / (2.0 * gamma_ad);
    let physical = d >= 1.0;
    let diagnostic = if physical {
        String::new()
    } else {
        format!("only root d = {d} is unphysical")
    };
    CrossoverResult {
        roots: vec![CrossoverRoot { d, physical }],
        diagnostic,
        ..base
    }
}
