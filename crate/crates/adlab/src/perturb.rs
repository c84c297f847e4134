//! First-order perturbative machinery: the P/Q split of the first-order
//! amplitudes, the simplified dual-system evolution built from the base
//! system's couplings, the large-T approximation of Q, the analytic
//! `∂A_b/∂s`, and the Q/P dominance diagnostic.
//!
//! For an initial eigenstate `n`, the first-order amplitude on level `k ≠ n`
//! is `φ_k = (i/T)(P_nk + Q_nk)` with
//! `P_nk(s) = A_nk(0) - A_nk(s)·e^{-iT∫g_nk}` and
//! `Q_nk(s) = ∫₀^s e^{-iT∫g_nk}·(∂A_nk/∂s') ds'`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    adiabatic_ratios, cumtrapz, cumtrapz_c, fmt_g17, DerivativeStencils, GaugeTag, SpectralPath,
    DEFAULT_FD_WINDOW,
};

/// Resolution guard for the oscillatory phase `e^{-iT∫g}`: error when
/// `T·|g|·ds` exceeds this.
const OSCILLATION_GUARD: f64 = 0.5;

/// One `(n, k)` channel of the first-order solution.
#[derive(Debug, Clone)]
pub struct FirstOrderChannel {
    /// target level k (0-based)
    pub target: usize,
    pub p: Vec<Complex64>,
    pub q: Vec<Complex64>,
    pub phi: Vec<Complex64>,
}

/// First-order perturbative amplitudes for one initial level, with their
/// P/Q constituents.
#[derive(Debug, Clone)]
pub struct FirstOrderSolution {
    pub init_level: usize,
    pub t_total: f64,
    pub channels: Vec<FirstOrderChannel>,
}

impl FirstOrderSolution {
    pub fn channel(&self, target: usize) -> Option<&FirstOrderChannel> {
        self.channels.iter().find(|c| c.target == target)
    }
}

fn require_ratios(path: &SpectralPath) -> Result<()> {
    if path.gauge() != GaugeTag::Parallel {
        return Err(Error::Validation(
            "perturbative machinery requires the parallel gauge".into(),
        ));
    }
    if !path.has_tau() {
        return Err(Error::Validation("tau not computed on this path".into()));
    }
    Ok(())
}

fn oscillation_check(path: &SpectralPath, t_total: f64) -> Result<f64> {
    let ds = path.grid().step()?;
    let dim = path.dim();
    let mut worst = 0.0f64;
    for f in path.frames() {
        for n in 0..dim {
            for k in 0..dim {
                if n != k {
                    worst = worst.max((t_total * f.gap(n, k)).abs() * ds);
                }
            }
        }
    }
    if worst > OSCILLATION_GUARD {
        return Err(Error::GridTooCoarse(format!(
            "T·|g|·ds = {worst:.3} > {OSCILLATION_GUARD}; the phase e^(-iT∫g) is under-resolved"
        )));
    }
    Ok(ds)
}

/// The exact first-order solution (per channel `k ≠ n`) on `path`, using the
/// path's own τ, gaps, and ratios: trapezoid quadrature for the oscillatory
/// Q integral, stencil differentiation for `∂A/∂s`.
pub fn first_order(path: &SpectralPath, t_total: f64, init_level: usize) -> Result<FirstOrderSolution> {
    require_ratios(path)?;
    let ds = oscillation_check(path, t_total)?;
    let ratios = adiabatic_ratios(path)?;
    let n_points = path.grid().len();
    let sten = DerivativeStencils::new(n_points, ds, DEFAULT_FD_WINDOW);
    let inv_t = Complex64::new(0.0, 1.0 / t_total);

    let mut channels = Vec::new();
    for k in 0..path.dim() {
        if k == init_level {
            continue;
        }
        let a = ratios.series(init_level, k);
        let gap = path.gap_series(init_level, k);
        let phase = cumtrapz(&gap, ds);
        let da = sten.apply(&a);
        let mut p = Vec::with_capacity(n_points);
        let mut integrand = Vec::with_capacity(n_points);
        for j in 0..n_points {
            let osc = Complex64::from_polar(1.0, -t_total * phase[j]);
            p.push(a[0] - a[j] * osc);
            integrand.push(osc * da[j]);
        }
        let q = cumtrapz_c(&integrand, ds);
        let phi: Vec<Complex64> = p
            .iter()
            .zip(q.iter())
            .map(|(pj, qj)| inv_t * (pj + qj))
            .collect();
        channels.push(FirstOrderChannel { target: k, p, q, phi });
    }
    Ok(FirstOrderSolution { init_level, t_total, channels })
}

/// First-order amplitudes of the dual system driven by the *base* path's
/// couplings: `φ_k(s) = δ_nk - ∫₀^s τ_nk(s') ds'`. Exact first order of the
/// dual evolution equation, whose coupling kernel is the base `τ^∥` with the
/// oscillatory phases cancelled identically.
///
/// Levels are the base path's labels; the dual level paired with base level
/// `l` is the one whose eigenvalue is `-E_l` (ascending duals reverse the
/// order).
pub fn simplified_b_first_order(
    path_a: &SpectralPath,
    init_level: usize,
) -> Result<Vec<Vec<Complex64>>> {
    require_ratios(path_a)?;
    let ds = path_a.grid().step()?;
    let n_points = path_a.grid().len();
    let mut out = Vec::with_capacity(path_a.dim());
    for k in 0..path_a.dim() {
        if k == init_level {
            out.push(vec![Complex64::new(1.0, 0.0); n_points]);
        } else {
            let tau = path_a.tau_series(init_level, k)?;
            let integral = cumtrapz_c(&tau, ds);
            out.push(integral.into_iter().map(|z| -z).collect());
        }
    }
    Ok(out)
}

/// Large-T approximation of the dual system's Q term from base-path data:
/// `Q_nk ≈ iT·∫₀^s τ_nk(s') ds'`.
#[derive(Debug, Clone)]
pub struct QApprox {
    pub series: Vec<Complex64>,
    /// Set when the sufficient conditions (traditional condition satisfied,
    /// |τ| bounded away from zero) do not hold; the value is still computed —
    /// the conditions are sufficient, not necessary.
    pub warning: Option<String>,
}

pub fn q_approx_dual(
    path_a: &SpectralPath,
    t_total: f64,
    n: usize,
    k: usize,
) -> Result<QApprox> {
    require_ratios(path_a)?;
    let ds = path_a.grid().step()?;
    let tau = path_a.tau_series(n, k)?;
    let ratios = adiabatic_ratios(path_a)?;
    // the sufficient conditions constrain the base system as a whole
    let a_max = ratios.max_abs().0;
    let tau_min = tau.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let tau_max = tau.iter().map(|z| z.norm()).fold(0.0f64, f64::max);

    let mut warnings = Vec::new();
    if a_max / t_total > 0.05 {
        warnings.push(format!(
            "traditional condition not met on the base path (max|A|/T = {:.3e})",
            a_max / t_total
        ));
    }
    if tau_min <= 1e-12 * tau_max.max(1.0) {
        warnings.push(format!("|tau_{}{}| reaches {:.3e}", n + 1, k + 1, tau_min));
    }

    let series = cumtrapz_c(&tau, ds)
        .into_iter()
        .map(|z| z * Complex64::new(0.0, t_total))
        .collect();
    Ok(QApprox {
        series,
        warning: if warnings.is_empty() { None } else { Some(warnings.join("; ")) },
    })
}

/// Q/P dominance diagnostic for the dual system, evaluated through the
/// closed form `|Q/P| = |1 - T/(A_nk(0)+A_nk(s)) · i∫₀^s τ_nk|` on the base
/// path. Dominance is flagged when the ratio exceeds 10.
#[derive(Debug, Clone)]
pub struct PqRatio {
    pub series: Vec<f64>,
    pub q_dominant: bool,
}

pub fn pq_ratio(path_a: &SpectralPath, t_total: f64, n: usize, k: usize) -> Result<PqRatio> {
    require_ratios(path_a)?;
    let ds = path_a.grid().step()?;
    let ratios = adiabatic_ratios(path_a)?;
    let a = ratios.series(n, k);
    let tau = path_a.tau_series(n, k)?;
    let integral = cumtrapz_c(&tau, ds);
    let mut series = Vec::with_capacity(a.len());
    for j in 0..a.len() {
        let denom = a[0] + a[j];
        if denom.norm() < 1e-12 {
            return Err(Error::DivisionGuard(format!(
                "|A_{}{}(0) + A_{}{}(s)| = {:.3e} at s index {j}",
                n + 1,
                k + 1,
                n + 1,
                k + 1,
                denom.norm()
            )));
        }
        let val = Complex64::new(1.0, 0.0)
            - integral[j] * Complex64::new(0.0, t_total) / denom;
        series.push(val.norm());
    }
    let q_dominant = series.iter().any(|&r| r > 10.0);
    Ok(PqRatio { series, q_dominant })
}

/// Analytic rate of change of the dual system's ratio,
/// `∂A_b/∂s = e^{-iT∫g_nk}·(iT·τ_nk - ∂(τ_nk/g_nk)/∂s)`, assembled from
/// base-path quantities (valid when the base Hamiltonian is T-independent).
pub fn da_dual_ds(
    path_a: &SpectralPath,
    t_total: f64,
    n: usize,
    k: usize,
) -> Result<Vec<Complex64>> {
    require_ratios(path_a)?;
    let ds = oscillation_check(path_a, t_total)?;
    let n_points = path_a.grid().len();
    let tau = path_a.tau_series(n, k)?;
    let ratios = adiabatic_ratios(path_a)?;
    let a = ratios.series(n, k);
    let gap = path_a.gap_series(n, k);
    let phase = cumtrapz(&gap, ds);
    let sten = DerivativeStencils::new(n_points, ds, DEFAULT_FD_WINDOW);
    let da = sten.apply(&a);
    Ok((0..n_points)
        .map(|j| {
            Complex64::from_polar(1.0, -t_total * phase[j])
                * (tau[j] * Complex64::new(0.0, t_total) - da[j])
        })
        .collect())
}

/// CSV per channel: `s,P_re,P_im,Q_re,Q_im,phi_re,phi_im,ratio`.
pub fn write_channel_csv<W: Write>(
    grid: &crate::models::Grid,
    channel: &FirstOrderChannel,
    ratio: Option<&[f64]>,
    out: &mut W,
) -> Result<()> {
    writeln!(out, "s,P_re,P_im,Q_re,Q_im,phi_re,phi_im,ratio")?;
    for (j, &s) in grid.points().iter().enumerate() {
        let r = ratio.map(|r| fmt_g17(r[j])).unwrap_or_else(|| "nan".into());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_g17(s),
            fmt_g17(channel.p[j].re),
            fmt_g17(channel.p[j].im),
            fmt_g17(channel.q[j].re),
            fmt_g17(channel.q[j].im),
            fmt_g17(channel.phi[j].re),
            fmt_g17(channel.phi[j].im),
            r
        )?;
    }
    Ok(())
}
