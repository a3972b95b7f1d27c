//! Density matrices, state metrics, PSD projection and mode lattices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance used for the Hermitian, trace and PSD validity checks.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as zero before square roots.
pub const EIG_FLOOR: f64 = 1e-12;
/// Relative threshold under which an off-diagonal entry counts as vanished.
pub const REL_ZERO_TOL: f64 = 1e-12;
/// States with purity within this of 1 take the pure-state fidelity path.
pub const PURE_TOL: f64 = 1e-13;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(M + M†) / 2`
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigvalsh(m)[0]
}

/// `V diag(f(λ)) V†`
fn spectral_map(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let d = vals.len();
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let s = f(l);
        for i in 0..d {
            scaled[(i, j)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// Unnormalized trace norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|l| l.abs()).sum()
}

/// Square root of a PSD matrix, clipping tiny or negative eigenvalues.
pub fn sqrtm_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    spectral_map(&vals, &vecs, |l| if l > EIG_FLOOR { l.sqrt() } else { 0.0 })
}

pub fn pure_state(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity, then stores the Hermitian part.
    pub fn new(data: CMatrix) -> Result<Self, Error> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(Error::NotSquare(data.nrows(), data.ncols()));
        }
        let herm_err = (&data - data.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > STATE_TOL {
            return Err(Error::NotHermitian(herm_err));
        }
        let tr = trace(&data);
        if (tr - c(1.0)).norm() > STATE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let data = hermitize(&data);
        let lmin = min_eigenvalue(&data);
        if lmin < -STATE_TOL {
            return Err(Error::NotPsd(lmin));
        }
        Ok(Self { data })
    }

    /// Wraps a matrix already known to be a valid state (only Hermitized).
    pub(crate) fn from_trusted(data: CMatrix) -> Self {
        Self { data: hermitize(&data) }
    }

    pub fn from_pure(psi: &CVector) -> Result<Self, Error> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::Degenerate("zero state vector"));
        }
        Ok(Self::from_trusted(pure_state(&(psi / c(n)))))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_trusted(CMatrix::identity(d, d) / c(d as f64))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.data)
    }

    /// `max |ρ_ij|` over all entries.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn same_dim(a: usize, b: usize) -> Result<(), Error> {
    if a != b {
        return Err(Error::DimensionMismatch(a, b));
    }
    Ok(())
}

/// Squared (Uhlmann) fidelity `(Tr √(√a b √a))²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, Error> {
    same_dim(a.dim(), b.dim())?;
    // For a pure argument the fidelity reduces to Tr(ab).
    if a.purity() > 1.0 - PURE_TOL || b.purity() > 1.0 - PURE_TOL {
        let overlap: f64 = a
            .matrix()
            .iter()
            .zip(b.matrix().iter())
            .map(|(x, y)| (x.conj() * y).re)
            .sum();
        return Ok(overlap.clamp(0.0, 1.0));
    }
    let s = sqrtm_psd(a.matrix());
    let m = &s * b.matrix() * &s;
    let vals = eigvalsh(&m);
    // Eigenvalues under the solver's roundoff floor are zeros; their square roots would add O(1e-8) noise.
    let floor = vals.last().copied().unwrap_or(0.0).max(0.0) * f64::EPSILON * m.nrows() as f64;
    let root: f64 = vals.iter().map(|&l| if l > floor { l.sqrt() } else { 0.0 }).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
pub fn fidelity_pure(psi: &CVector, rho: &DensityMatrix) -> f64 {
    let v = rho.matrix() * psi;
    psi.dotc(&v).re.clamp(0.0, 1.0)
}

pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, Error> {
    same_dim(a.dim(), b.dim())?;
    Ok(0.5 * trace_norm(&(a.matrix() - b.matrix())))
}

/// Sum of absolute off-diagonal entries.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += rho.get(i, j).norm();
            }
        }
    }
    s
}

/// Π(X) = X₊ / Tr X₊. PSD inputs come back unchanged up to renormalization.
pub fn psd_project(x: &CMatrix) -> Result<DensityMatrix, Error> {
    let d = x.nrows();
    if d != x.ncols() {
        return Err(Error::NotSquare(d, x.ncols()));
    }
    let h = hermitize(x);
    let (vals, vecs) = eigh(&h);
    project_decomposed(&h, &vals, &vecs)
}

/// Π applied to a Hermitian `h` whose ascending decomposition is already known.
pub fn project_decomposed(h: &CMatrix, vals: &[f64], vecs: &CMatrix) -> Result<DensityMatrix, Error> {
    if vals[0] >= 0.0 {
        let tr = trace(h).re;
        if tr <= 0.0 {
            return Err(Error::Degenerate("projection of a zero matrix"));
        }
        return Ok(DensityMatrix::from_trusted(h / c(tr)));
    }
    let pos_sum: f64 = vals.iter().filter(|&&l| l > 0.0).sum();
    if pos_sum <= 0.0 {
        return Err(Error::Degenerate("no positive eigenvalue to keep"));
    }
    let xp = spectral_map(vals, vecs, |l| l.max(0.0) / pos_sum);
    Ok(DensityMatrix::from_trusted(xp))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    /// Equally spaced `E_i = i`.
    pub fn equally_spaced(d: usize) -> Self {
        Self {
            levels: (0..d).map(|i| i as f64).collect(),
        }
    }

    pub fn new(levels: Vec<f64>) -> Result<Self, Error> {
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("energy levels must be nondecreasing".into()));
        }
        Ok(Self { levels })
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn gap(&self, i: usize, j: usize) -> f64 {
        self.levels[i] - self.levels[j]
    }

    pub fn is_integer(&self) -> bool {
        self.levels.iter().all(|e| e.fract() == 0.0)
    }
}

/// The lattice `g·ℤ` generated by the occupied coherence gaps. `g = 0` means empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeLattice {
    pub generator: u64,
}

impl ModeLattice {
    pub fn is_empty(&self) -> bool {
        self.generator == 0
    }

    pub fn contains(&self, gap: u64) -> bool {
        if gap == 0 {
            return true;
        }
        self.generator != 0 && gap.is_multiple_of(self.generator)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Mode lattice with an absolute threshold on |ρ_ij|.
pub fn mode_lattice_abs(m: &CMatrix, spectrum: &EnergySpectrum, tol: f64) -> Result<ModeLattice, Error> {
    if !spectrum.is_integer() {
        return Err(Error::Unsupported("mode lattices need an integer spectrum"));
    }
    same_dim(m.nrows(), spectrum.dim())?;
    let d = m.nrows();
    let mut g = 0;
    for i in 0..d {
        for j in (i + 1)..d {
            if m[(i, j)].norm() > tol || m[(j, i)].norm() > tol {
                g = gcd(g, spectrum.gap(i, j).abs() as u64);
            }
        }
    }
    Ok(ModeLattice { generator: g })
}

/// Mode lattice using the relative tolerance `tol · max|ρ_ij|`.
pub fn mode_lattice(rho: &DensityMatrix, spectrum: &EnergySpectrum, rel_tol: f64) -> Result<ModeLattice, Error> {
    mode_lattice_abs(rho.matrix(), spectrum, rel_tol * rho.max_abs())
}

/// True iff the target lattice is a sublattice of the noisy one.
pub fn mode_included(target: ModeLattice, noisy: ModeLattice) -> bool {
    noisy.contains(target.generator)
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    CVector::from_fn(d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

pub fn haar_random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = random_complex_gaussian(d, rng);
    let n = v.norm();
    v / c(n)
}

pub fn haar_random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_trusted(pure_state(&haar_random_vector(d, rng)))
}

/// `v|ψ⟩⟨ψ| + (1 − v) I/d`
pub fn werner_state(v: f64, psi: &CVector) -> Result<DensityMatrix, Error> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("werner weight {v} outside [0, 1]")));
    }
    let d = psi.len();
    let psi = psi / c(psi.norm());
    let m = pure_state(&psi) * c(v) + CMatrix::identity(d, d) * c((1.0 - v) / d as f64);
    Ok(DensityMatrix::from_trusted(m))
}
