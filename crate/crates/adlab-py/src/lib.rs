//! Python bindings for the adlab quantum dynamics laboratory: model
//! construction, dual materialization, spectral tables, fidelity traces,
//! condition verdicts, and the scenario runner.

use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use adlab::conditions::{
    traditional_condition, ye_condition, ye_condition_dual_form, ConditionReport,
};
use adlab::evolve::{amplitudes, dual_propagator, fidelity_trace, propagator_trace};
use adlab::models::{
    build_dual, chirped_spin, rotating_spin, Grid, Hamiltonian, RotatingSpinParams,
};
use adlab::perturb::first_order;
use adlab::spectral::{adiabatic_ratios, decompose_path, to_parallel_gauge, SpectralPath};

fn to_py_err(e: adlab::Error) -> PyErr {
    if e.is_physics() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parallel_path(h: &Hamiltonian, t_total: f64, n_points: usize) -> PyResult<SpectralPath> {
    let grid = Grid::uniform(n_points).map_err(to_py_err)?;
    let raw = decompose_path(h, t_total, &grid).map_err(to_py_err)?;
    to_parallel_gauge(&raw).map_err(to_py_err)
}

fn report_dict<'py>(py: Python<'py>, rep: &ConditionReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("condition", &rep.condition)?;
    d.set_item("margin", rep.margin)?;
    d.set_item("threshold", rep.threshold)?;
    d.set_item("verdict", format!("{:?}", rep.verdict).to_lowercase())?;
    d.set_item("worst", (rep.worst.n, rep.worst.k, rep.worst.s))?;
    d.set_item("notes", &rep.notes)?;
    Ok(d)
}

/// A driven Hamiltonian, or a dual materialized from one.
#[pyclass]
struct Model {
    inner: Hamiltonian,
    base: Option<Hamiltonian>,
}

#[pymethods]
impl Model {
    /// Spin-half in a uniformly rotating field.
    #[staticmethod]
    #[pyo3(signature = (omega0 = 1.0))]
    fn rotating_spin(omega0: f64) -> PyResult<Self> {
        let params = RotatingSpinParams::new(omega0, 1.0).map_err(to_py_err)?;
        Ok(Self { inner: Hamiltonian::Driven(rotating_spin(&params)), base: None })
    }

    /// Spin-half with an accelerating field angle `θ(s) = π·s^p`.
    #[staticmethod]
    #[pyo3(signature = (omega0 = 1.0, theta_exponent = 2.0))]
    fn chirped_spin(omega0: f64, theta_exponent: f64) -> PyResult<Self> {
        let params = RotatingSpinParams::new(omega0, 1.0).map_err(to_py_err)?;
        Ok(Self {
            inner: Hamiltonian::Driven(chirped_spin(&params, theta_exponent).map_err(to_py_err)?),
            base: None,
        })
    }

    /// Materialize the inverse-evolving dual `-U† H U` on a uniform grid.
    fn dual(&self, t_total: f64, grid_points: usize) -> PyResult<Self> {
        let grid = Grid::uniform(grid_points).map_err(to_py_err)?;
        let dual = build_dual(&self.inner, t_total, &grid).map_err(to_py_err)?;
        Ok(Self { inner: Hamiltonian::Grid(dual), base: Some(self.inner.clone()) })
    }

    fn label(&self) -> String {
        self.inner.label()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn is_dual(&self) -> bool {
        self.base.is_some()
    }

    /// Instantaneous eigenvalues at normalized time `s`.
    fn eigenvalues(&self, s: f64, t_total: f64) -> PyResult<Vec<f64>> {
        adlab::runner::eigenvalues_at(&self.inner, s, t_total).map_err(to_py_err)
    }

    /// Spectral data along the grid: `s`, per-level energies, the coupling
    /// matrix `tau[n][k]` as re/im series, and `|A_nk|` series.
    fn spectral_table<'py>(
        &self,
        py: Python<'py>,
        t_total: f64,
        grid_points: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let path = parallel_path(&self.inner, t_total, grid_points)?;
        let ratios = adiabatic_ratios(&path).map_err(to_py_err)?;
        let dim = path.dim();
        let out = PyDict::new_bound(py);
        out.set_item("s", path.grid().points().to_vec())?;
        let energies: Vec<Vec<f64>> = (0..dim).map(|l| path.energy_series(l)).collect();
        out.set_item("energies", energies)?;
        let mut tau_re = Vec::new();
        let mut tau_im = Vec::new();
        let mut a_abs = Vec::new();
        for n in 0..dim {
            let mut re_row = Vec::new();
            let mut im_row = Vec::new();
            let mut a_row = Vec::new();
            for k in 0..dim {
                let series = path.tau_series(n, k).map_err(to_py_err)?;
                re_row.push(series.iter().map(|z| z.re).collect::<Vec<_>>());
                im_row.push(series.iter().map(|z| z.im).collect::<Vec<_>>());
                if n != k {
                    a_row.push(ratios.series(n, k).iter().map(|z| z.norm()).collect::<Vec<_>>());
                } else {
                    a_row.push(vec![0.0; grid_points]);
                }
            }
            tau_re.push(re_row);
            tau_im.push(im_row);
            a_abs.push(a_row);
        }
        out.set_item("tau_re", tau_re)?;
        out.set_item("tau_im", tau_im)?;
        out.set_item("a_abs", a_abs)?;
        Ok(out)
    }

    /// Propagate from the instantaneous eigenstate `level` (0-based) and
    /// project back: returns `s`, the fidelity series, and `|phi_n|` series
    /// per level. Duals evolve through the adjoint of their base propagator.
    fn fidelity_trace<'py>(
        &self,
        py: Python<'py>,
        t_total: f64,
        grid_points: usize,
        level: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let grid = Grid::uniform(grid_points).map_err(to_py_err)?;
        let path = parallel_path(&self.inner, t_total, grid_points)?;
        if level >= path.dim() {
            return Err(PyValueError::new_err(format!(
                "level {level} out of range for dimension {}",
                path.dim()
            )));
        }
        let trace = match &self.base {
            Some(base) => {
                dual_propagator(&propagator_trace(base, t_total, &grid).map_err(to_py_err)?)
            }
            None => propagator_trace(&self.inner, t_total, &grid).map_err(to_py_err)?,
        };
        let states = trace.apply(&path.frame(0).vector(level));
        let fid = fidelity_trace(&states, &path, level).map_err(to_py_err)?;
        let amps = amplitudes(&states, &path, t_total).map_err(to_py_err)?;
        let out = PyDict::new_bound(py);
        out.set_item("s", grid.points().to_vec())?;
        out.set_item("fidelity", fid)?;
        let phi_abs: Vec<Vec<f64>> = (0..path.dim())
            .map(|l| amps.series(l).iter().map(|z| z.norm()).collect())
            .collect();
        out.set_item("phi_abs", phi_abs)?;
        Ok(out)
    }

    /// First-order P/Q split for the channel `init -> target` (0-based):
    /// returns `s`, `p_abs`, `q_abs`, `phi_abs`, and `q_over_t` (re, im).
    fn first_order_channel<'py>(
        &self,
        py: Python<'py>,
        t_total: f64,
        grid_points: usize,
        init: usize,
        target: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let path = parallel_path(&self.inner, t_total, grid_points)?;
        let fo = first_order(&path, t_total, init).map_err(to_py_err)?;
        let ch = fo
            .channel(target)
            .ok_or_else(|| PyValueError::new_err(format!("no channel to level {target}")))?;
        let out = PyDict::new_bound(py);
        out.set_item("s", path.grid().points().to_vec())?;
        out.set_item("p_abs", ch.p.iter().map(|z| z.norm()).collect::<Vec<_>>())?;
        out.set_item("q_abs", ch.q.iter().map(|z| z.norm()).collect::<Vec<_>>())?;
        out.set_item("phi_abs", ch.phi.iter().map(|z| z.norm()).collect::<Vec<_>>())?;
        let q_end = ch.q[grid_points - 1] / t_total;
        out.set_item("q_end_over_t", (q_end.re, q_end.im))?;
        Ok(out)
    }

    /// Condition verdicts on this model's path (plus the dual-form report
    /// evaluated from the base path when the model is a dual).
    #[pyo3(signature = (t_total, grid_points, threshold = 0.05))]
    fn conditions<'py>(
        &self,
        py: Python<'py>,
        t_total: f64,
        grid_points: usize,
        threshold: f64,
    ) -> PyResult<Bound<'py, PyList>> {
        let path = parallel_path(&self.inner, t_total, grid_points)?;
        let mut reports = vec![
            traditional_condition(&path, threshold).map_err(to_py_err)?,
            ye_condition(&path, threshold, None).map_err(to_py_err)?,
        ];
        if let Some(base) = &self.base {
            let base_path = parallel_path(base, t_total, grid_points)?;
            let mut rep = ye_condition_dual_form(&base_path, threshold).map_err(to_py_err)?;
            rep.notes = format!("dual-form via base path; {}", rep.notes);
            reports.push(rep);
        }
        let list = PyList::empty_bound(py);
        for rep in &reports {
            list.append(report_dict(py, rep)?)?;
        }
        Ok(list)
    }
}

/// Execute a scenario JSON document and return the summary as a JSON string.
/// Artifacts are written under `out_dir`.
#[pyfunction]
fn run_scenario(scenario_json: &str, out_dir: &str) -> PyResult<String> {
    let sc = adlab::scenario::Scenario::from_json(scenario_json).map_err(to_py_err)?;
    let report = adlab::runner::run_scenario(&sc, Path::new("."), Path::new(out_dir))
        .map_err(to_py_err)?;
    serde_json::to_string_pretty(&report.summary)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn adlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
