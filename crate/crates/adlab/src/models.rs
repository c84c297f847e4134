//! Hamiltonian models: the driven-Hamiltonian abstraction, the rotating and
//! chirped spin-half fields, the exact dual construction
//! `H_b(s) = -U_a(s)† H_a(s) U_a(s)`, a first-order analytic dual, tabulated
//! (grid) Hamiltonians, and a numerical probe for total-time dependence.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigh, ComplexMatrix};

const TAU: f64 = std::f64::consts::TAU;

/// Ascending normalized-time grid on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    /// `n_points` equally spaced points covering `[0, 1]` inclusive.
    pub fn uniform(n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::Validation(format!(
                "grid needs at least 3 points, got {n_points}"
            )));
        }
        let m = (n_points - 1) as f64;
        Ok(Self { points: (0..n_points).map(|j| j as f64 / m).collect() })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation("grid needs at least 2 points".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("grid points must ascend strictly".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Uniform step size; errors when spacing varies beyond roundoff.
    pub fn step(&self) -> Result<f64> {
        let h = (self.points[self.points.len() - 1] - self.points[0])
            / (self.points.len() - 1) as f64;
        for w in self.points.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-12 * h.max(1.0) {
                return Err(Error::Validation("grid is not uniform".into()));
            }
        }
        Ok(h)
    }

    pub fn matches(&self, other: &Grid) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(other.points.iter())
                .all(|(a, b)| (a - b).abs() <= 1e-12)
    }

    /// Index of the grid point closest to `s`.
    pub fn nearest(&self, s: f64) -> usize {
        match self
            .points
            .binary_search_by(|p| p.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => {
                if i == 0 {
                    0
                } else if i >= self.points.len() {
                    self.points.len() - 1
                } else if (self.points[i] - s).abs() < (s - self.points[i - 1]).abs() {
                    i
                } else {
                    i - 1
                }
            }
        }
    }
}

type EvalFn = dyn Fn(f64, f64) -> ComplexMatrix + Send + Sync;

/// A Hamiltonian-valued function of normalized time `s ∈ [0,1]` and total
/// evolution time `T`, with an optional analytic `∂H/∂s`.
#[derive(Clone)]
pub struct DrivenHamiltonian {
    dim: usize,
    label: String,
    eval: Arc<EvalFn>,
    deriv: Option<Arc<EvalFn>>,
}

impl fmt::Debug for DrivenHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DrivenHamiltonian")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("has_deriv", &self.deriv.is_some())
            .finish()
    }
}

impl DrivenHamiltonian {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        eval: impl Fn(f64, f64) -> ComplexMatrix + Send + Sync + 'static,
        deriv: Option<Arc<EvalFn>>,
    ) -> Self {
        Self { dim, label: label.into(), eval: Arc::new(eval), deriv }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, s: f64, t_total: f64) -> ComplexMatrix {
        (self.eval)(s, t_total)
    }

    pub fn deriv(&self, s: f64, t_total: f64) -> Option<ComplexMatrix> {
        self.deriv.as_ref().map(|d| d(s, t_total))
    }

    pub fn has_deriv(&self) -> bool {
        self.deriv.is_some()
    }
}

/// Parameters of the rotating-field spin-half models: coupling `omega0` and
/// total time `T`. The field's angular velocity is identified as
/// `omega = 2π/T` (one full revolution over the run); other ratios of
/// revolutions are representable by choosing T freely.
#[derive(Debug, Clone, Copy)]
pub struct RotatingSpinParams {
    pub omega0: f64,
    pub t_total: f64,
}

impl RotatingSpinParams {
    pub fn new(omega0: f64, t_total: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::Validation(format!("omega0 must be > 0, got {omega0}")));
        }
        if !(t_total > 0.0) || !t_total.is_finite() {
            return Err(Error::Validation(format!("T must be > 0, got {t_total}")));
        }
        Ok(Self { omega0, t_total })
    }

    pub fn omega(&self) -> f64 {
        TAU / self.t_total
    }

    /// True when `omega/omega0 ≪ 1`, the regime where the rotating field is
    /// slow against the level splitting.
    pub fn is_adiabatic_regime(&self) -> bool {
        self.omega() / self.omega0 < 0.1
    }
}

fn spin_field_matrix(omega0: f64, phase: f64) -> ComplexMatrix {
    // -(omega0/2) [[0, e^{-i phase}], [e^{+i phase}, 0]]
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = Complex64::from_polar(-omega0 / 2.0, -phase);
    m[(1, 0)] = Complex64::from_polar(-omega0 / 2.0, phase);
    m
}

fn spin_field_deriv(omega0: f64, phase: f64, phase_rate: f64) -> ComplexMatrix {
    // d/ds of the above: the off-diagonals pick up ∓ i·phase_rate
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 1)] = Complex64::from_polar(-omega0 / 2.0, -phase) * Complex64::new(0.0, -phase_rate);
    m[(1, 0)] = Complex64::from_polar(-omega0 / 2.0, phase) * Complex64::new(0.0, phase_rate);
    m
}

/// Spin-half in a constant-magnitude field rotating uniformly in a plane:
/// `H(s) = -(omega0/2) [[0, e^{-i 2π s}], [e^{+i 2π s}, 0]]` (the field angle
/// `ω t` becomes `2π s` in normalized time). T-independent by construction.
pub fn rotating_spin(params: &RotatingSpinParams) -> DrivenHamiltonian {
    let omega0 = params.omega0;
    DrivenHamiltonian::new(
        2,
        format!("rotating_spin(omega0={omega0})"),
        move |s, _t| spin_field_matrix(omega0, TAU * s),
        Some(Arc::new(move |s, _t| spin_field_deriv(omega0, TAU * s, TAU))),
    )
}

/// Rotating field with accelerating angle `θ(s) = π·s^p` (field phase
/// `2π·θ(s)`), giving a coupling whose magnitude grows in s. `p = 2` is the
/// quadratic chirp used by the decay probes.
pub fn chirped_spin(params: &RotatingSpinParams, theta_exponent: f64) -> Result<DrivenHamiltonian> {
    if !(theta_exponent >= 1.0) || !theta_exponent.is_finite() {
        return Err(Error::Validation(format!(
            "theta_exponent must be >= 1, got {theta_exponent}"
        )));
    }
    let omega0 = params.omega0;
    let p = theta_exponent;
    Ok(DrivenHamiltonian::new(
        2,
        format!("chirped_spin(omega0={omega0},p={p})"),
        move |s, _t| spin_field_matrix(omega0, TAU * std::f64::consts::PI * s.powf(p)),
        Some(Arc::new(move |s, _t| {
            let phase = TAU * std::f64::consts::PI * s.powf(p);
            let rate = TAU * std::f64::consts::PI * p * s.powf(p - 1.0);
            spin_field_deriv(omega0, phase, rate)
        })),
    ))
}

/// Constant Hamiltonian, mostly for tests and trivial scenarios.
pub fn constant(label: impl Into<String>, h: ComplexMatrix) -> DrivenHamiltonian {
    let dim = h.dim();
    DrivenHamiltonian::new(
        dim,
        label,
        move |_s, _t| h.clone(),
        Some(Arc::new(move |_s, _t| ComplexMatrix::zeros(dim))),
    )
}

/// First-order analytic dual of the rotating spin:
/// `H(s,T) = ω/2 + (ω0/2)σz - (ω/2)[[cos(ω0 T s), i sin(ω0 T s)], [-i sin(ω0 T s), -cos(ω0 T s)]]`
/// with `ω = 2π/T` re-derived from the evaluation-time `T`, so the same model
/// evaluated at two different `T` exhibits its irremovable T-dependence.
/// Valid only well inside the slow-drive regime.
pub fn dual_first_order(params: &RotatingSpinParams) -> Result<DrivenHamiltonian> {
    if !params.is_adiabatic_regime() {
        return Err(Error::RegimeViolation(format!(
            "omega/omega0 = {:.3e} >= 0.1; first-order dual is out of its validity regime",
            params.omega() / params.omega0
        )));
    }
    let omega0 = params.omega0;
    Ok(DrivenHamiltonian::new(
        2,
        format!("dual_first_order(omega0={omega0})"),
        move |s, t_total| {
            let w = TAU / t_total;
            let (sin, cos) = (omega0 * t_total * s).sin_cos();
            let mut m = ComplexMatrix::zeros(2);
            m[(0, 0)] = Complex64::new(w / 2.0 + omega0 / 2.0 - (w / 2.0) * cos, 0.0);
            m[(1, 1)] = Complex64::new(w / 2.0 - omega0 / 2.0 + (w / 2.0) * cos, 0.0);
            m[(0, 1)] = Complex64::new(0.0, -(w / 2.0) * sin);
            m[(1, 0)] = Complex64::new(0.0, (w / 2.0) * sin);
            m
        },
        Some(Arc::new(move |s, t_total| {
            let w = TAU / t_total;
            let k = omega0 * t_total;
            let (sin, cos) = (k * s).sin_cos();
            let mut m = ComplexMatrix::zeros(2);
            m[(0, 0)] = Complex64::new((w / 2.0) * k * sin, 0.0);
            m[(1, 1)] = Complex64::new(-(w / 2.0) * k * sin, 0.0);
            m[(0, 1)] = Complex64::new(0.0, -(w / 2.0) * k * cos);
            m[(1, 0)] = Complex64::new(0.0, (w / 2.0) * k * cos);
            m
        })),
    ))
}

/// Hamiltonian tabulated on a grid, the numerical carrier for dual systems
/// whose defining unitary is only known pointwise. Off-grid queries snap to
/// the nearest grid point (the cell width bounds the lookup error).
#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    grid: Grid,
    matrices: Vec<ComplexMatrix>,
    derivs: Option<Vec<ComplexMatrix>>,
    t_tag: f64,
    label: String,
}

impl GridHamiltonian {
    pub fn new(
        grid: Grid,
        matrices: Vec<ComplexMatrix>,
        derivs: Option<Vec<ComplexMatrix>>,
        t_tag: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if matrices.len() != grid.len() {
            return Err(Error::Validation(format!(
                "{} matrices for {} grid points",
                matrices.len(),
                grid.len()
            )));
        }
        let dim = matrices[0].dim();
        for (j, m) in matrices.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::Validation("mixed matrix dimensions".into()));
            }
            let scale = m.max_abs().max(1e-300);
            if m.hermiticity_defect() > 1e-12 * scale {
                return Err(Error::NotHermitian(format!("grid matrix {j}")));
            }
        }
        if let Some(d) = &derivs {
            if d.len() != matrices.len() {
                return Err(Error::Validation("derivative count mismatch".into()));
            }
        }
        Ok(Self { grid, matrices, derivs, t_tag, label: label.into() })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn deriv_matrices(&self) -> Option<&[ComplexMatrix]> {
        self.derivs.as_deref()
    }

    pub fn t_tag(&self) -> f64 {
        self.t_tag
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn at_index(&self, j: usize) -> &ComplexMatrix {
        &self.matrices[j]
    }

    pub fn eval_nearest(&self, s: f64) -> &ComplexMatrix {
        &self.matrices[self.grid.nearest(s)]
    }

    /// Serialize to the scenario JSON matrix format:
    /// `{"grid": [s...], "matrices": [[[ [re,im], ...N ], ...N ], ...], "T": number}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "grid": self.grid.points(),
            "matrices": self.matrices.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "T": self.t_tag,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let grid_vals = v
            .get("grid")
            .and_then(|g| g.as_array())
            .ok_or_else(|| Error::Parse("grid hamiltonian: missing 'grid' array".into()))?;
        let points: Option<Vec<f64>> = grid_vals.iter().map(|x| x.as_f64()).collect();
        let points = points.ok_or_else(|| Error::Parse("grid values must be numbers".into()))?;
        let t_tag = v
            .get("T")
            .and_then(|t| t.as_f64())
            .ok_or_else(|| Error::Parse("grid hamiltonian: missing 'T'".into()))?;
        let mats_val = v
            .get("matrices")
            .and_then(|m| m.as_array())
            .ok_or_else(|| Error::Parse("grid hamiltonian: missing 'matrices'".into()))?;
        let matrices: Result<Vec<ComplexMatrix>> =
            mats_val.iter().map(matrix_from_json).collect();
        Self::new(Grid::from_points(points)?, matrices?, None, t_tag, "grid_file")
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> serde_json::Value {
    let n = m.dim();
    let rows: Vec<Vec<[f64; 2]>> = (0..n)
        .map(|r| (0..n).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    json!(rows)
}

pub fn matrix_from_json(v: &serde_json::Value) -> Result<ComplexMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let n = rows.len();
    let mut m = ComplexMatrix::zeros(n);
    for (r, row) in rows.iter().enumerate() {
        let cols = row
            .as_array()
            .filter(|c| c.len() == n)
            .ok_or_else(|| Error::Parse("matrix rows must have N [re,im] pairs".into()))?;
        for (c, z) in cols.iter().enumerate() {
            let pair = z
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse("matrix entries must be [re, im]".into()))?;
            let re = pair[0].as_f64().ok_or_else(|| Error::Parse("re not a number".into()))?;
            let im = pair[1].as_f64().ok_or_else(|| Error::Parse("im not a number".into()))?;
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

/// Either a closed-form driven Hamiltonian or a tabulated one; the common
/// currency of the propagation and spectral machinery.
#[derive(Debug, Clone)]
pub enum Hamiltonian {
    Driven(DrivenHamiltonian),
    Grid(GridHamiltonian),
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Driven(d) => d.dim(),
            Hamiltonian::Grid(g) => g.dim(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Hamiltonian::Driven(d) => d.label().to_string(),
            Hamiltonian::Grid(g) => g.label().to_string(),
        }
    }

    /// Evaluate at `(s, T)`; grid-backed Hamiltonians answer with the nearest
    /// tabulated point.
    pub fn eval(&self, s: f64, t_total: f64) -> ComplexMatrix {
        match self {
            Hamiltonian::Driven(d) => d.eval(s, t_total),
            Hamiltonian::Grid(g) => g.eval_nearest(s).clone(),
        }
    }

    pub fn deriv_at_index(&self, grid: &Grid, j: usize, t_total: f64) -> Option<ComplexMatrix> {
        match self {
            Hamiltonian::Driven(d) => d.deriv(grid.points()[j], t_total),
            Hamiltonian::Grid(g) => g.deriv_matrices().map(|d| d[j].clone()),
        }
    }

    pub fn has_deriv(&self) -> bool {
        match self {
            Hamiltonian::Driven(d) => d.has_deriv(),
            Hamiltonian::Grid(g) => g.deriv_matrices().is_some(),
        }
    }

    pub fn at_grid_index(&self, grid: &Grid, j: usize, t_total: f64) -> ComplexMatrix {
        match self {
            Hamiltonian::Driven(d) => d.eval(grid.points()[j], t_total),
            Hamiltonian::Grid(g) => g.at_index(j).clone(),
        }
    }

    /// Largest entry magnitude over a coarse s-sample, used by step control.
    pub fn max_abs_estimate(&self, t_total: f64) -> f64 {
        match self {
            Hamiltonian::Driven(d) => (0..=32)
                .map(|j| d.eval(j as f64 / 32.0, t_total).max_abs())
                .fold(0.0, f64::max),
            Hamiltonian::Grid(g) => g.matrices().iter().map(|m| m.max_abs()).fold(0.0, f64::max),
        }
    }
}

impl From<DrivenHamiltonian> for Hamiltonian {
    fn from(d: DrivenHamiltonian) -> Self {
        Hamiltonian::Driven(d)
    }
}

impl From<GridHamiltonian> for Hamiltonian {
    fn from(g: GridHamiltonian) -> Self {
        Hamiltonian::Grid(g)
    }
}

/// Materialize the dual system `H_b(s) = -U_a(s)† H_a(s) U_a(s)` on `grid`.
///
/// The base Hamiltonian is propagated once (see `evolve::propagator_trace`)
/// and the conjugation is applied per grid point; the analytic derivative,
/// when available, is carried along as `∂H_b/∂s = -U_a† (∂H_a/∂s) U_a`
/// (the commutator terms cancel exactly). The spectrum of each `H_b(s_j)` is
/// the negated base spectrum by construction; non-degeneracy of the base is
/// checked pointwise.
pub fn build_dual(base: &Hamiltonian, t_total: f64, grid: &Grid) -> Result<GridHamiltonian> {
    let trace = crate::evolve::propagator_trace(base, t_total, grid)
        .map_err(|e| Error::PropagationFailed(format!("dual construction: {e}")))?;
    let mut matrices = Vec::with_capacity(grid.len());
    let mut derivs: Option<Vec<ComplexMatrix>> = if base.has_deriv() {
        Some(Vec::with_capacity(grid.len()))
    } else {
        None
    };
    for j in 0..grid.len() {
        let h = base.at_grid_index(grid, j, t_total);
        hermitian_eigh(&h, true, None)?;
        let u = &trace.unitaries()[j];
        let ua = u.adjoint();
        let hb = ua.mul(&h).mul(u).scale(Complex64::new(-1.0, 0.0)).hermitize();
        matrices.push(hb);
        if let Some(dv) = derivs.as_mut() {
            let dh = base
                .deriv_at_index(grid, j, t_total)
                .expect("has_deriv checked above");
            dv.push(ua.mul(&dh).mul(u).scale(Complex64::new(-1.0, 0.0)).hermitize());
        }
    }
    GridHamiltonian::new(
        grid.clone(),
        matrices,
        derivs,
        t_total,
        format!("dual_of({})", base.label()),
    )
}

/// Max over `s_samples` and all pairs of T values of `|H(s,T_i) - H(s,T_j)|`.
///
/// A value at roundoff certifies T-independence at the sampled points; a
/// large value witnesses genuine T-dependence (the signature of materialized
/// dual systems).
pub fn probe_t_dependence(
    family: &HamiltonianFamily,
    s_samples: &[f64],
    t_samples: &[f64],
) -> Result<f64> {
    if s_samples.is_empty() {
        return Err(Error::InsufficientSamples("no s samples".into()));
    }
    match family {
        HamiltonianFamily::Driven(h) => {
            let mut distinct = t_samples.to_vec();
            distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
            distinct.dedup();
            if distinct.len() < 2 {
                return Err(Error::InsufficientSamples(
                    "need at least 2 distinct T values".into(),
                ));
            }
            let mut worst = 0.0f64;
            for &s in s_samples {
                for i in 0..distinct.len() {
                    for j in (i + 1)..distinct.len() {
                        let d = h.eval(s, distinct[i]).sub(&h.eval(s, distinct[j])).max_abs();
                        worst = worst.max(d);
                    }
                }
            }
            Ok(worst)
        }
        HamiltonianFamily::Grids(grids) => {
            if grids.len() < 2 {
                return Err(Error::InsufficientSamples(
                    "need at least 2 grids (one per T)".into(),
                ));
            }
            let mut worst = 0.0f64;
            for &s in s_samples {
                for i in 0..grids.len() {
                    for j in (i + 1)..grids.len() {
                        if (grids[i].t_tag() - grids[j].t_tag()).abs() < 1e-12 {
                            return Err(Error::InsufficientSamples(
                                "grid family contains duplicate T tags".into(),
                            ));
                        }
                        let d = grids[i]
                            .eval_nearest(s)
                            .sub(grids[j].eval_nearest(s))
                            .max_abs();
                        worst = worst.max(d);
                    }
                }
            }
            Ok(worst)
        }
    }
}

/// Input family for `probe_t_dependence`: a closed-form model probed at
/// several T values, or one materialized grid per T.
pub enum HamiltonianFamily<'a> {
    Driven(&'a DrivenHamiltonian),
    Grids(&'a [GridHamiltonian]),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotating_spin_endpoints() {
        let p = RotatingSpinParams::new(1.0, 100.0).unwrap();
        let h = rotating_spin(&p);
        // s = 0: phase e^0 = 1 forces -(omega0/2) sigma_x
        let h0 = h.eval(0.0, p.t_total);
        assert!((h0[(0, 1)] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((h0[(1, 0)] - c(-0.5, 0.0)).norm() < 1e-15);
        // s = 1/2: e^{-i pi} = -1 flips the sign
        let h_half = h.eval(0.5, p.t_total);
        assert!((h_half[(0, 1)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((h_half[(1, 0)] - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rotating_spin_spectrum_is_constant() {
        let p = RotatingSpinParams::new(1.0, 200.0 * std::f64::consts::PI).unwrap();
        let h = rotating_spin(&p);
        for j in 0..=16 {
            let s = j as f64 / 16.0;
            let d = hermitian_eigh(&h.eval(s, p.t_total), true, None).unwrap();
            assert!((d.eigenvalues[0] + 0.5).abs() < 1e-14);
            assert!((d.eigenvalues[1] - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn dual_first_order_trivia() {
        let p = RotatingSpinParams::new(1.0, 200.0 * std::f64::consts::PI).unwrap();
        let w = p.omega();
        let h = dual_first_order(&p).unwrap();
        // s = 0: omega/2 + (omega0/2 - omega/2) sigma_z
        let h0 = h.eval(0.0, p.t_total);
        assert!((h0[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((h0[(1, 1)].re - (w - 0.5)).abs() < 1e-14);
        assert!(h0[(0, 1)].norm() < 1e-15);
        // omega -> 0 limit recovers (omega0/2) sigma_z
        let slow = RotatingSpinParams::new(1.0, 1e9).unwrap();
        let h_slow = dual_first_order(&slow).unwrap().eval(0.3, 1e9);
        assert!((h_slow[(0, 0)].re - 0.5).abs() < 1e-8);
        assert!((h_slow[(1, 1)].re + 0.5).abs() < 1e-8);
    }

    #[test]
    fn dual_first_order_regime_guard() {
        let fast = RotatingSpinParams::new(1.0, 10.0).unwrap();
        assert!(matches!(
            dual_first_order(&fast),
            Err(Error::RegimeViolation(_))
        ));
    }

    #[test]
    fn probe_trivia() {
        let p = RotatingSpinParams::new(1.0, 100.0).unwrap();
        let h = rotating_spin(&p);
        let s: Vec<f64> = (0..64).map(|j| j as f64 / 63.0).collect();
        let v = probe_t_dependence(&HamiltonianFamily::Driven(&h), &s, &[100.0, 200.0]).unwrap();
        assert_eq!(v, 0.0);

        let cst = constant("sz", crate::linalg::ComplexMatrix::from_rows(
            2,
            &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        ));
        let v = probe_t_dependence(&HamiltonianFamily::Driven(&cst), &s, &[1.0, 2.0]).unwrap();
        assert_eq!(v, 0.0);

        assert!(matches!(
            probe_t_dependence(&HamiltonianFamily::Driven(&h), &s, &[5.0]),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn grid_hamiltonian_json_roundtrip() {
        let g = Grid::uniform(5).unwrap();
        let mats: Vec<ComplexMatrix> = g
            .points()
            .iter()
            .map(|&s| spin_field_matrix(1.0, TAU * s))
            .collect();
        let gh = GridHamiltonian::new(g, mats, None, 7.5, "test").unwrap();
        let v = gh.to_json();
        let back = GridHamiltonian::from_json(&v).unwrap();
        assert_eq!(back.t_tag(), 7.5);
        assert_eq!(back.grid().len(), 5);
        for j in 0..5 {
            assert!(back.at_index(j).sub(gh.at_index(j)).max_abs() < 1e-15);
        }
    }
}
