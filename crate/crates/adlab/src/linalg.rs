//! Self-contained dense complex linear algebra: Hermitian eigendecomposition
//! by cyclic Jacobi rotations, unitary matrix exponentials, and the norms and
//! consistency checks used throughout the crate.
//!
//! Matrices here are small (N ≲ 32, N = 2 in every bundled model), so a
//! dependency-free Jacobi sweep is both simple and accurate: each rotation is
//! exactly unitary, and convergence is quadratic once the off-diagonal mass
//! is small.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex vector of unit-normalized amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.data[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩ = Σ conj(self_i)·other_i`.
    pub fn dot(&self, other: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.data[i]
    }
}

/// Dense square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major slice of entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count must be dim^2");
        Self { dim, data: entries.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.len());
        let n = self.dim;
        let mut out = ComplexVector::zeros(n);
        for r in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..n {
                acc += self[(r, c)] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        Self { dim: self.dim, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        Self { dim: self.dim, data }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Entrywise max-abs norm (the ∞-norm used by every tolerance contract).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Column `c` as a vector.
    pub fn column(&self, c: usize) -> ComplexVector {
        let mut v = ComplexVector::zeros(self.dim);
        for r in 0..self.dim {
            v[r] = self[(r, c)];
        }
        v
    }

    pub fn set_column(&mut self, c: usize, v: &ComplexVector) {
        for r in 0..self.dim {
            self[(r, c)] = v[r];
        }
    }

    /// Multiply column `c` by a phase/scalar in place.
    pub fn scale_column(&mut self, c: usize, f: Complex64) {
        for r in 0..self.dim {
            let z = self[(r, c)] * f;
            self[(r, c)] = z;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Deviation from Hermiticity, `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                let e = (self[(r, c)] - self[(c, r)].conj()).norm();
                d = d.max(e);
            }
        }
        // the (r,c) and (c,r) defects coincide up to conjugation
        d
    }

    /// `(A + A†)/2`; removes roundoff-level asymmetry.
    pub fn hermitize(&self) -> Self {
        let adj = self.adjoint();
        self.add(&adj).scale(Complex64::new(0.5, 0.0))
    }

    /// `max |U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.adjoint().mul(self);
        prod.sub(&Self::identity(self.dim)).max_abs()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Eigenvalues ascending, eigenvectors as orthonormal columns in matching
/// order, phases fixed so each column's largest-magnitude entry is real
/// positive (ties broken toward the lowest row index).
#[derive(Debug, Clone)]
pub struct HermitianEigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenDecomposition {
    /// `max_n ‖H v_n - E_n v_n‖∞` for an externally supplied `H`.
    pub fn residual(&self, h: &ComplexMatrix) -> f64 {
        let n = h.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            let v = self.eigenvectors.column(k);
            let hv = h.mul_vec(&v);
            for r in 0..n {
                worst = worst.max((hv[r] - v[r] * self.eigenvalues[k]).norm());
            }
        }
        worst
    }

    /// `max |V†V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        self.eigenvectors.unitarity_defect()
    }

    /// Smallest gap between consecutive (ascending) eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

const HERMITICITY_RTOL: f64 = 1e-12;
/// Relative floor separating a true degeneracy from roundoff.
pub const DEFAULT_GAP_FLOOR_REL: f64 = 1e-9;

fn check_hermitian(h: &ComplexMatrix, who: &str) -> Result<()> {
    if !h.all_finite() {
        return Err(Error::NotHermitian(format!("{who}: non-finite entries")));
    }
    let scale = h.max_abs().max(1e-300);
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_RTOL * scale {
        return Err(Error::NotHermitian(format!(
            "{who}: |H - H^dagger| = {defect:.3e} exceeds {:.3e}",
            HERMITICITY_RTOL * scale
        )));
    }
    Ok(())
}

/// Hermitian eigendecomposition by cyclic Jacobi.
///
/// With `assert_nondegenerate`, consecutive eigenvalue gaps must exceed
/// `gap_floor` (default `1e-9·max|H|`); a smaller gap signals that the
/// non-degeneracy assumption underlying the spectral-path machinery is
/// violated.
pub fn hermitian_eigh(
    h: &ComplexMatrix,
    assert_nondegenerate: bool,
    gap_floor: Option<f64>,
) -> Result<HermitianEigenDecomposition> {
    check_hermitian(h, "hermitian_eigh")?;
    let n = h.dim();
    let scale = h.max_abs();

    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);

    // Cyclic sweeps over the strict upper triangle. Quadratic convergence
    // makes 30 sweeps a generous cap even at N = 32.
    let tol = 1e-30_f64.max(scale * 1e-16);
    for _sweep in 0..40 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= tol * 1e-2 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag; // e^{i φ}
                let zeta = (aqq - app) / (2.0 * mag);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cp = phase * c;
                let sp = phase * s;

                // A <- J† A J with J = I except J[p,p]=c·e^{iφ}, J[p,q]=s·e^{iφ},
                // J[q,p]=-s, J[q,q]=c. Columns first, then rows.
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * cp - arq * s;
                    a[(r, q)] = arp * sp + arq * c;
                }
                let cpc = cp.conj();
                let spc = sp.conj();
                for col in 0..n {
                    let apc = a[(p, col)];
                    let aqc = a[(q, col)];
                    a[(p, col)] = apc * cpc - aqc * s;
                    a[(q, col)] = apc * spc + aqc * c;
                }
                // exact zeros on the eliminated pair keep the sweep clean
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);

                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * cp - vrq * s;
                    v[(r, q)] = vrp * sp + vrq * c;
                }
            }
        }
    }

    // Sort ascending and canonicalize phases.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(a[(src, src)].re);
        let col = v.column(src);
        eigenvectors.set_column(dst, &col);
        canonicalize_column(&mut eigenvectors, dst);
    }

    let decomp = HermitianEigenDecomposition { eigenvalues, eigenvectors };

    if assert_nondegenerate {
        let floor = gap_floor.unwrap_or(DEFAULT_GAP_FLOOR_REL * scale);
        let gap = decomp.min_gap();
        if n > 1 && gap <= floor {
            return Err(Error::DegenerateSpectrum(format!(
                "minimum eigenvalue gap {gap:.3e} at/below floor {floor:.3e}"
            )));
        }
    }
    Ok(decomp)
}

/// Rotate column `c` so its largest-magnitude entry is real positive.
pub(crate) fn canonicalize_column(m: &mut ComplexMatrix, c: usize) {
    let n = m.dim();
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for r in 0..n {
        let mag = m[(r, c)].norm();
        if mag > best_mag + 1e-14 * best_mag.max(1.0) {
            best_mag = mag;
            best = r;
        }
    }
    if best_mag > 0.0 {
        let z = m[(best, c)];
        m.scale_column(c, z.conj() / best_mag);
    }
}

/// `exp(-i·H·dt)` for Hermitian `H`, computed through the eigendecomposition
/// `V·diag(e^{-i E dt})·V†` so the result is unitary up to orthonormality
/// error with no series truncation to tune.
pub fn unitary_step(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    check_hermitian(h, "unitary_step")?;
    let decomp = hermitian_eigh(h, false, None)?;
    let n = h.dim();
    let v = &decomp.eigenvectors;
    // V · diag(e^{-iE dt}) · V†
    let mut out = ComplexMatrix::zeros(n);
    for k in 0..n {
        let phase = Complex64::from_polar(1.0, -decomp.eigenvalues[k] * dt);
        for r in 0..n {
            let vr = v[(r, k)] * phase;
            for c in 0..n {
                out[(r, c)] += vr * v[(c, k)].conj();
            }
        }
    }
    Ok(out)
}

/// `exp(G)` for anti-Hermitian `G = -i·K` (K Hermitian); used by the
/// commutator-corrected Magnus step in `evolve`.
pub fn expm_antihermitian(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    // K = i·G must be Hermitian; exp(G) = exp(-i·K·1).
    let k = g.scale(Complex64::new(0.0, 1.0));
    unitary_step(&k, 1.0)
}
