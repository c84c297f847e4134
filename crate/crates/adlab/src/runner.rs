//! Batch orchestration: executes a scenario end to end, writes CSV/JSON
//! artifacts, and aggregates parameter sweeps. All numeric work inside one
//! run is single-threaded so reruns are bit-identical; sweeps fan out one
//! worker per scenario.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::conditions::{
    self, rl_decay_probe, traditional_condition, ye_condition, ye_condition_dual_form,
    ConditionReport,
};
use crate::error::{Error, Result};
use crate::evolve::{self, dual_propagator, propagator_trace, PropagatorTrace};
use crate::linalg::hermitian_eigh;
use crate::models::{
    build_dual, chirped_spin, rotating_spin, Grid, GridHamiltonian, Hamiltonian,
    HamiltonianFamily, RotatingSpinParams,
};
use crate::perturb::{self, first_order, pq_ratio};
use crate::scenario::{Analysis, ModelSpec, Scenario, SweepParam};
use crate::spectral::{
    adiabatic_ratios, coupling_matrix, decompose_path, fmt_g17, to_parallel_gauge, CouplingMethod,
    RatioTable, SpectralPath,
};

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub model: String,
    pub t_total: f64,
    pub omega0: f64,
    pub theta_exponent: f64,
    pub grid_points: usize,
    pub initial_eigenstate: usize,
    pub analyses: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Scalars {
    pub tau21_re: Option<f64>,
    pub tau21_im: Option<f64>,
    pub tau_fd_hf_max_dev: Option<f64>,
    pub traditional_margin: Option<f64>,
    pub ye_margin: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub min_fidelity_s: Option<f64>,
    pub max_q_over_t: Option<f64>,
    pub max_q_a: Option<f64>,
    pub q_end_over_t_re: Option<f64>,
    pub q_end_over_t_im: Option<f64>,
    pub q_over_t_sign: Option<i32>,
    pub t_dependence_probe: Option<f64>,
    pub rl_loglog_slope: Option<f64>,
    pub rl_decayed: Option<bool>,
    pub unitarity_drift: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: ScenarioEcho,
    pub conditions: Vec<ConditionReport>,
    pub scalars: Scalars,
    pub errors: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug)]
pub struct RunReport {
    pub summary: Summary,
    pub out_dir: PathBuf,
}

impl RunReport {
    /// 0 = clean, 2 = at least one physics-contract violation was recorded.
    pub fn exit_code(&self) -> i32 {
        if self.summary.errors.is_empty() {
            0
        } else {
            2
        }
    }
}

fn analysis_name(a: Analysis) -> &'static str {
    match a {
        Analysis::Propagate => "propagate",
        Analysis::Amplitudes => "amplitudes",
        Analysis::Fidelity => "fidelity",
        Analysis::Perturbation => "perturbation",
        Analysis::Conditions => "conditions",
        Analysis::DualCheck => "dual_check",
        Analysis::TDependence => "t_dependence",
        Analysis::RlProbe => "rl_probe",
    }
}

/// The scenario's model resolved into concrete Hamiltonians.
struct ResolvedModel {
    model: Hamiltonian,
    /// immediate base system when the model is a dual
    base: Option<Hamiltonian>,
}

fn build_leaf(spec: &ModelSpec, sc: &Scenario, scenario_dir: &Path) -> Result<Hamiltonian> {
    let params = RotatingSpinParams::new(sc.omega0(), sc.t_total())?;
    match spec {
        ModelSpec::RotatingSpin => Ok(Hamiltonian::Driven(rotating_spin(&params))),
        ModelSpec::ChirpedSpin => Ok(Hamiltonian::Driven(chirped_spin(
            &params,
            sc.theta_exponent(),
        )?)),
        ModelSpec::GridFile { path } => {
            let full = if Path::new(path).is_absolute() {
                PathBuf::from(path)
            } else {
                scenario_dir.join(path)
            };
            let text = fs::read_to_string(&full)?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("grid file {}: {e}", full.display())))?;
            let gh = GridHamiltonian::from_json(&value)?;
            if gh.grid().len() != sc.grid_points {
                return Err(Error::Validation(format!(
                    "grid file has {} points but the scenario requests {}",
                    gh.grid().len(),
                    sc.grid_points
                )));
            }
            Ok(Hamiltonian::Grid(gh))
        }
        ModelSpec::DualOf { .. } => unreachable!("handled by resolve_model"),
    }
}

fn resolve_model(
    sc: &Scenario,
    grid: &Grid,
    scenario_dir: &Path,
) -> Result<ResolvedModel> {
    let t_total = sc.t_total();
    match &sc.model {
        ModelSpec::DualOf { inner } => {
            let base = match inner.as_ref() {
                ModelSpec::DualOf { inner: inner2 } => {
                    let root = build_leaf(inner2, sc, scenario_dir)?;
                    Hamiltonian::Grid(build_dual(&root, t_total, grid)?)
                }
                leaf => build_leaf(leaf, sc, scenario_dir)?,
            };
            let model = Hamiltonian::Grid(build_dual(&base, t_total, grid)?);
            Ok(ResolvedModel { model, base: Some(base) })
        }
        leaf => Ok(ResolvedModel { model: build_leaf(leaf, sc, scenario_dir)?, base: None }),
    }
}

/// Evolution operator of the scenario's model: duals take the adjoint of
/// their base system's propagator (the exact route); leaves integrate
/// directly.
fn propagator_for(
    spec: &ModelSpec,
    resolved: &ResolvedModel,
    sc: &Scenario,
    grid: &Grid,
    scenario_dir: &Path,
) -> Result<PropagatorTrace> {
    let t_total = sc.t_total();
    match spec {
        ModelSpec::DualOf { inner } => {
            let base = resolved
                .base
                .as_ref()
                .expect("dual models carry their base");
            let base_trace = match inner.as_ref() {
                ModelSpec::DualOf { .. } => {
                    // base is itself a materialized dual: its exact propagator
                    // is the adjoint of the root's
                    let root_spec = match inner.as_ref() {
                        ModelSpec::DualOf { inner: r } => r,
                        _ => unreachable!(),
                    };
                    let root = build_leaf(root_spec, sc, scenario_dir)?;
                    dual_propagator(&propagator_trace(&root, t_total, grid)?)
                }
                _ => propagator_trace(base, t_total, grid)?,
            };
            Ok(dual_propagator(&base_trace))
        }
        _ => propagator_trace(&resolved.model, t_total, grid),
    }
}

struct RunCtx {
    out: PathBuf,
    errors: Vec<String>,
    notes: Vec<String>,
}

impl RunCtx {
    fn record_err(&mut self, stage: &str, e: &Error) {
        self.errors.push(format!("{stage}: {e}"));
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn write_file(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents)?;
        Ok(())
    }
}

/// Execute a scenario, writing artifacts into `out_dir`. Configuration and
/// I/O failures return `Err`; physics-contract violations are recorded in
/// the summary's `errors` array (the run continues with whatever remains
/// feasible) and reflected in [`RunReport::exit_code`].
pub fn run_scenario(sc: &Scenario, scenario_dir: &Path, out_dir: &Path) -> Result<RunReport> {
    sc.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut ctx = RunCtx { out: out_dir.to_path_buf(), errors: Vec::new(), notes: Vec::new() };
    let mut scalars = Scalars::default();
    let mut reports: Vec<ConditionReport> = Vec::new();

    let t_total = sc.t_total();
    let grid = Grid::uniform(sc.grid_points)?;
    let wants = |a: Analysis| sc.analyses.contains(&a);

    let resolved = match resolve_model(sc, &grid, scenario_dir) {
        Ok(r) => Some(r),
        Err(e) => {
            if e.is_physics() {
                ctx.record_err("model", &e);
                None
            } else {
                return Err(e);
            }
        }
    };

    let needs_path = wants(Analysis::Amplitudes)
        || wants(Analysis::Fidelity)
        || wants(Analysis::Perturbation)
        || wants(Analysis::Conditions)
        || wants(Analysis::DualCheck);

    // --- spectral path of the model -------------------------------------
    let mut path: Option<SpectralPath> = None;
    let mut ratios: Option<RatioTable> = None;
    if let (Some(res), true) = (&resolved, needs_path) {
        match decompose_path(&res.model, t_total, &grid).and_then(|p| to_parallel_gauge(&p)) {
            Ok(p) => {
                if p.dim() >= 2 {
                    if let Some(t) = p.frame(0).tau.as_ref() {
                        scalars.tau21_re = Some(t[(1, 0)].re);
                        scalars.tau21_im = Some(t[(1, 0)].im);
                    }
                }
                if res.model.has_deriv() {
                    match coupling_matrix(&p, CouplingMethod::HellmannFeynman) {
                        Ok(hf) => {
                            let mut dev = 0.0f64;
                            for j in 0..grid.len() {
                                dev = dev.max(
                                    hf.frame(j)
                                        .tau
                                        .as_ref()
                                        .unwrap()
                                        .sub(p.frame(j).tau.as_ref().unwrap())
                                        .max_abs(),
                                );
                            }
                            scalars.tau_fd_hf_max_dev = Some(dev);
                        }
                        Err(e) => ctx.note(format!("hellmann-feynman cross-check skipped: {e}")),
                    }
                }
                match adiabatic_ratios(&p) {
                    Ok(r) => ratios = Some(r),
                    Err(e) => {
                        if e.is_physics() {
                            ctx.record_err("ratios", &e);
                        } else {
                            return Err(e);
                        }
                    }
                }
                let mut buf = Vec::new();
                p.write_csv(ratios.as_ref(), &mut buf)?;
                ctx.write_file("spectral.csv", &buf)?;
                path = Some(p);
            }
            Err(e) => {
                if e.is_physics() {
                    ctx.record_err("spectral", &e);
                } else {
                    return Err(e);
                }
            }
        }
    }

    // --- base path (dual diagnostics) -----------------------------------
    let mut base_path: Option<SpectralPath> = None;
    let needs_base = resolved.as_ref().map(|r| r.base.is_some()).unwrap_or(false)
        && (wants(Analysis::Perturbation) || wants(Analysis::Conditions) || wants(Analysis::DualCheck));
    if needs_base {
        let base = resolved.as_ref().unwrap().base.as_ref().unwrap();
        match decompose_path(base, t_total, &grid).and_then(|p| to_parallel_gauge(&p)) {
            Ok(p) => base_path = Some(p),
            Err(e) => {
                if e.is_physics() {
                    ctx.record_err("base spectral", &e);
                } else {
                    return Err(e);
                }
            }
        }
    }

    // --- propagation ------------------------------------------------------
    let needs_propagation =
        wants(Analysis::Propagate) || wants(Analysis::Amplitudes) || wants(Analysis::Fidelity);
    let mut trace: Option<PropagatorTrace> = None;
    if let (Some(res), true) = (&resolved, needs_propagation) {
        match propagator_for(&sc.model, res, sc, &grid, scenario_dir) {
            Ok(t) => {
                scalars.unitarity_drift = Some(t.unitarity_drift());
                if wants(Analysis::Propagate) {
                    let text = serde_json::to_string(&t.to_json())
                        .expect("propagator serialization is infallible");
                    ctx.write_file("propagator.json", text.as_bytes())?;
                }
                trace = Some(t);
            }
            Err(e) => {
                if e.is_physics() {
                    ctx.record_err("propagate", &e);
                } else {
                    return Err(e);
                }
            }
        }
    }

    // --- amplitudes & fidelity ---------------------------------------------
    if wants(Analysis::Amplitudes) || wants(Analysis::Fidelity) {
        if let (Some(p), Some(t)) = (&path, &trace) {
            let init = sc.initial_eigenstate - 1;
            if init >= p.dim() {
                ctx.record_err(
                    "trace",
                    &Error::Validation(format!(
                        "initial_eigenstate {} exceeds dimension {}",
                        sc.initial_eigenstate,
                        p.dim()
                    )),
                );
            } else {
                let psi0 = p.frame(0).vector(init);
                let states = t.apply(&psi0);
                match (evolve::amplitudes(&states, p, t_total), evolve::fidelity_trace(&states, p, init)) {
                    (Ok(amps), Ok(fid)) => {
                        let (mut fmin, mut smin) = (f64::INFINITY, 0.0);
                        for (j, &f) in fid.iter().enumerate() {
                            if f < fmin {
                                fmin = f;
                                smin = grid.points()[j];
                            }
                        }
                        scalars.min_fidelity = Some(fmin);
                        scalars.min_fidelity_s = Some(smin);
                        let mut buf = Vec::new();
                        evolve::write_trace_csv(&grid, &fid, &amps, &mut buf)?;
                        ctx.write_file("trace.csv", &buf)?;
                    }
                    (Err(e), _) | (_, Err(e)) => ctx.record_err("trace", &e),
                }
            }
        } else if !ctx
            .errors
            .iter()
            .any(|e| e.starts_with("spectral") || e.starts_with("propagate") || e.starts_with("model"))
        {
            ctx.note("trace skipped: spectral path or propagator unavailable");
        }
    }

    // --- first-order machinery ---------------------------------------------
    if wants(Analysis::Perturbation) {
        if let Some(p) = &path {
            let init = sc.initial_eigenstate - 1;
            match first_order(p, t_total, init) {
                Ok(fo) => {
                    let ratio_source = base_path.as_ref().unwrap_or(p);
                    let mut max_q_over_t = 0.0f64;
                    for ch in &fo.channels {
                        let ratio = match pq_ratio(ratio_source, t_total, init, ch.target) {
                            Ok(r) => Some(r.series),
                            Err(Error::DivisionGuard(msg)) => {
                                ctx.note(format!(
                                    "pq ratio undefined for channel ({}, {}): {msg}",
                                    init + 1,
                                    ch.target + 1
                                ));
                                None
                            }
                            Err(e) => {
                                ctx.record_err("pq_ratio", &e);
                                None
                            }
                        };
                        let mut buf = Vec::new();
                        perturb::write_channel_csv(&grid, ch, ratio.as_deref(), &mut buf)?;
                        ctx.write_file(
                            &format!("perturbation_n{}_k{}.csv", init + 1, ch.target + 1),
                            &buf,
                        )?;
                        let ch_max =
                            ch.q.iter().map(|z| z.norm()).fold(0.0, f64::max) / t_total;
                        if ch_max >= max_q_over_t {
                            max_q_over_t = ch_max;
                            let q_end = ch.q[grid.len() - 1] / t_total;
                            scalars.q_end_over_t_re = Some(q_end.re);
                            scalars.q_end_over_t_im = Some(q_end.im);
                            scalars.q_over_t_sign = Some(if q_end.re.abs() >= 10.0 * q_end.im.abs()
                            {
                                if q_end.re > 0.0 {
                                    1
                                } else {
                                    -1
                                }
                            } else {
                                0
                            });
                        }
                    }
                    scalars.max_q_over_t = Some(max_q_over_t);
                }
                Err(e) => {
                    if e.is_physics() {
                        ctx.record_err("perturbation", &e)
                    } else {
                        return Err(e);
                    }
                }
            }
            // base-system Q magnitude for dual scenarios (paired labels
            // reverse an ascending two-level ordering)
            let q_source = base_path.as_ref().unwrap_or(p);
            let paired_init = q_source.dim() - 1 - init;
            match first_order(q_source, t_total, paired_init) {
                Ok(fo_a) => {
                    let max_q = fo_a
                        .channels
                        .iter()
                        .flat_map(|ch| ch.q.iter().map(|z| z.norm()))
                        .fold(0.0, f64::max);
                    scalars.max_q_a = Some(max_q);
                }
                Err(e) => ctx.note(format!("base-path Q aggregate unavailable: {e}")),
            }
        }
    }

    // --- condition reports ---------------------------------------------------
    if wants(Analysis::Conditions) {
        if let Some(p) = &path {
            let threshold = sc.tolerances.condition_threshold;
            match traditional_condition(p, threshold) {
                Ok(rep) => {
                    scalars.traditional_margin = Some(rep.margin);
                    reports.push(rep);
                }
                Err(e) => ctx.record_err("traditional_condition", &e),
            }
            match ye_condition(p, threshold, sc.tolerances.denom_floor) {
                Ok(rep) => {
                    scalars.ye_margin = Some(rep.margin);
                    reports.push(rep);
                }
                Err(e) => ctx.record_err("ye_condition", &e),
            }
            if let Some(bp) = &base_path {
                match ye_condition_dual_form(bp, threshold) {
                    Ok(mut rep) => {
                        rep.notes = format!("dual-form via base path; {}", rep.notes);
                        reports.push(rep);
                    }
                    Err(e) => ctx.record_err("ye_condition_dual_form", &e),
                }
            }
            let text = serde_json::to_string_pretty(
                &reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            )
            .expect("report serialization is infallible");
            ctx.write_file("conditions.json", text.as_bytes())?;
        }
    }

    // --- dual self-checks -----------------------------------------------------
    if wants(Analysis::DualCheck) {
        match (&resolved, &path, &base_path) {
            (Some(res), Some(p), Some(bp)) if res.base.is_some() => {
                match run_dual_check(sc, res, p, bp, &grid, &mut ctx) {
                    Ok(json) => {
                        let text = serde_json::to_string_pretty(&json)
                            .expect("dual check serialization is infallible");
                        ctx.write_file("dual_check.json", text.as_bytes())?;
                    }
                    Err(e) => {
                        if e.is_physics() {
                            ctx.record_err("dual_check", &e)
                        } else {
                            return Err(e);
                        }
                    }
                }
            }
            (Some(res), _, _) if res.base.is_none() => {
                ctx.note("dual_check skipped: model is not a dual");
            }
            _ => {}
        }
    }

    // --- T-dependence probe ------------------------------------------------
    if wants(Analysis::TDependence) {
        if let Some(res) = &resolved {
            let s_samples: Vec<f64> = (0..64).map(|j| j as f64 / 64.0).collect();
            let t2 = 2.0 * t_total;
            let probe = match (&res.model, &res.base) {
                (Hamiltonian::Grid(g1), Some(base)) => build_dual(base, t2, &grid)
                    .and_then(|g2| {
                        let family = [g1.clone(), g2];
                        crate::models::probe_t_dependence(
                            &HamiltonianFamily::Grids(&family),
                            &s_samples,
                            &[],
                        )
                    }),
                (Hamiltonian::Driven(d), _) => crate::models::probe_t_dependence(
                    &HamiltonianFamily::Driven(d),
                    &s_samples,
                    &[t_total, t2],
                ),
                (Hamiltonian::Grid(_), None) => Err(Error::InsufficientSamples(
                    "a single tabulated grid carries one T only".into(),
                )),
            };
            match probe {
                Ok(v) => {
                    scalars.t_dependence_probe = Some(v);
                    let text = serde_json::to_string_pretty(&serde_json::json!({
                        "probe": v,
                        "t_values": [t_total, t2],
                        "s_samples": 64,
                    }))
                    .expect("probe serialization is infallible");
                    ctx.write_file("t_dependence.json", text.as_bytes())?;
                }
                Err(e) => {
                    if e.is_physics() {
                        ctx.record_err("t_dependence", &e)
                    } else {
                        return Err(e);
                    }
                }
            }
        }
    }

    // --- oscillatory decay probe ---------------------------------------------
    if wants(Analysis::RlProbe) {
        if let Some(res) = &resolved {
            let init = sc.initial_eigenstate - 1;
            let outcome = match (&res.model, &res.base) {
                (Hamiltonian::Driven(d), _) => {
                    run_rl_probe_driven(d, init, &sc.rl_t_values, &grid)
                }
                (Hamiltonian::Grid(g1), Some(base)) => build_dual(base, 2.0 * t_total, &grid)
                    .and_then(|g2| {
                        let family = [g1.clone(), g2];
                        rl_decay_probe(
                            &HamiltonianFamily::Grids(&family),
                            init,
                            if init == 0 { 1 } else { 0 },
                            &[t_total, 2.0 * t_total],
                            &grid,
                        )
                    })
                    .map(|t| (t, 0usize)),
                (Hamiltonian::Grid(_), None) => Err(Error::TIndependenceViolated(
                    "tabulated grids carry a single T tag".into(),
                )),
            };
            match outcome {
                Ok((table, _)) => {
                    scalars.rl_loglog_slope = Some(table.loglog_slope);
                    scalars.rl_decayed = Some(table.decayed);
                    let mut buf = Vec::new();
                    writeln!(buf, "T,max_q,end_q")?;
                    for j in 0..table.t_values.len() {
                        writeln!(
                            buf,
                            "{},{},{}",
                            fmt_g17(table.t_values[j]),
                            fmt_g17(table.max_q[j]),
                            fmt_g17(table.end_q[j])
                        )?;
                    }
                    ctx.write_file("rl_probe.csv", &buf)?;
                }
                Err(e) => {
                    if e.is_physics() {
                        ctx.record_err("rl_probe", &e)
                    } else {
                        return Err(e);
                    }
                }
            }
        }
    }

    let summary = Summary {
        scenario: ScenarioEcho {
            model: sc.model.label(),
            t_total,
            omega0: sc.omega0(),
            theta_exponent: sc.theta_exponent(),
            grid_points: sc.grid_points,
            initial_eigenstate: sc.initial_eigenstate,
            analyses: sc.analyses.iter().map(|a| analysis_name(*a).to_string()).collect(),
        },
        conditions: reports,
        scalars,
        errors: ctx.errors.clone(),
        notes: ctx.notes.clone(),
    };
    let text =
        serde_json::to_string_pretty(&summary).expect("summary serialization is infallible");
    fs::write(out_dir.join("summary.json"), text)?;
    Ok(RunReport { summary, out_dir: out_dir.to_path_buf() })
}

fn run_rl_probe_driven(
    d: &crate::models::DrivenHamiltonian,
    init: usize,
    ladder: &[f64],
    grid: &Grid,
) -> Result<(conditions::DecayTable, usize)> {
    // worst decaying channel over all targets
    let mut best: Option<(conditions::DecayTable, usize)> = None;
    for k in 0..d.dim() {
        if k == init {
            continue;
        }
        let table = rl_decay_probe(&HamiltonianFamily::Driven(d), init, k, ladder, grid)?;
        let replace = match &best {
            None => true,
            Some((t, _)) => table.max_q[0] > t.max_q[0],
        };
        if replace {
            best = Some((table, k));
        }
    }
    best.ok_or_else(|| Error::Validation("no coupling channel to probe".into()))
}

fn run_dual_check(
    sc: &Scenario,
    res: &ResolvedModel,
    path: &SpectralPath,
    base_path: &SpectralPath,
    grid: &Grid,
    ctx: &mut RunCtx,
) -> Result<serde_json::Value> {
    let t_total = sc.t_total();
    let base = res.base.as_ref().unwrap();
    let model_grid = match &res.model {
        Hamiltonian::Grid(g) => g,
        _ => unreachable!("dual models are materialized grids"),
    };
    let dim = path.dim();

    // spectrum negation with reversed ascending labels
    let mut negation_dev = 0.0f64;
    for j in 0..grid.len() {
        for l in 0..dim {
            let e_model = path.frame(j).eigenvalues[l];
            let e_base = base_path.frame(j).eigenvalues[dim - 1 - l];
            negation_dev = negation_dev.max((e_model + e_base).abs());
        }
    }

    // defining conjugation and adjoint identity need the base propagator
    let base_trace = propagator_trace(base, t_total, grid)?;
    let mut definition_residual = 0.0f64;
    for j in 0..grid.len() {
        let u = &base_trace.unitaries()[j];
        let conj = u.adjoint().mul(&base.at_grid_index(grid, j, t_total)).mul(u);
        definition_residual = definition_residual.max(
            model_grid.at_index(j).add(&conj).max_abs(),
        );
    }
    let dual_trace = dual_propagator(&base_trace);
    let mut adjoint_dev = 0.0f64;
    for j in 0..grid.len() {
        let prod = dual_trace.unitaries()[j].mul(&base_trace.unitaries()[j]);
        adjoint_dev = adjoint_dev.max(
            prod.sub(&crate::linalg::ComplexMatrix::identity(dim)).max_abs(),
        );
    }

    // direct (stiff) integration of the materialized dual, where feasible;
    // the stated budget is pinned at a 65536-step reference and scales with
    // the square of the step
    let steps = (grid.len() - 1) as f64;
    let effective_budget =
        (sc.tolerances.direct_budget * (65536.0 / steps).powi(2)).max(sc.tolerances.direct_budget);
    let mut direct_dev: Option<f64> = None;
    let mut direct_ok: Option<bool> = None;
    let mut involution_dev: Option<f64> = None;
    let mut involution_ok: Option<bool> = None;
    match propagator_trace(&res.model, t_total, grid) {
        Ok(direct) => {
            let mut dev = 0.0f64;
            for j in 0..grid.len() {
                dev = dev.max(
                    direct.unitaries()[j]
                        .sub(&dual_trace.unitaries()[j])
                        .max_abs(),
                );
            }
            direct_dev = Some(dev);
            direct_ok = Some(dev <= effective_budget);

            match build_dual(&res.model, t_total, grid) {
                Ok(ddual) => {
                    let mut dev = 0.0f64;
                    for j in 0..grid.len() {
                        dev = dev.max(
                            ddual
                                .at_index(j)
                                .sub(&base.at_grid_index(grid, j, t_total))
                                .max_abs(),
                        );
                    }
                    involution_dev = Some(dev);
                    involution_ok = Some(dev <= 2.0 * effective_budget);
                }
                Err(e) => ctx.note(format!("involution check skipped: {e}")),
            }
        }
        Err(e) => ctx.note(format!("direct dual integration skipped: {e}")),
    }

    Ok(serde_json::json!({
        "spectrum_negation_max_dev": negation_dev,
        "definition_residual_max": definition_residual,
        "adjoint_identity_max_dev": adjoint_dev,
        "direct_vs_adjoint_max_dev": direct_dev,
        "direct_budget_effective": effective_budget,
        "direct_within_budget": direct_ok,
        "involution_max_dev": involution_dev,
        "involution_within_budget": involution_ok,
    }))
}

/// Run a scenario file. `out_override` and `grid_override` mirror the CLI
/// flags.
pub fn run_file(
    scenario_path: &Path,
    out_override: Option<&Path>,
    grid_override: Option<usize>,
) -> Result<RunReport> {
    let mut sc = Scenario::from_file(scenario_path)?;
    if let Some(n) = grid_override {
        sc.grid_points = n;
        sc.validate()?;
    }
    let scenario_dir = scenario_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .or_else(|| sc.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    run_scenario(&sc, &scenario_dir, &out_dir)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub traditional_margin: Option<f64>,
    pub ye_margin: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub max_q_over_t: Option<f64>,
    pub max_q_a: Option<f64>,
    pub errors: usize,
}

#[derive(Debug)]
pub struct SweepReport {
    pub out_dir: PathBuf,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().all(|r| r.errors == 0) {
            0
        } else {
            2
        }
    }
}

fn sweep_threads() -> usize {
    std::env::var("ADLAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// One isolated run per value, fanned out across `ADLAB_THREADS` workers,
/// plus an aggregate `sweep.csv`. Individual failures are recorded and do
/// not stop the sweep.
pub fn sweep_file(
    scenario_path: &Path,
    param: SweepParam,
    values: &[f64],
    out_override: Option<&Path>,
) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::Validation("sweep needs a non-empty values list".into()));
    }
    let sc = Scenario::from_file(scenario_path)?;
    let scenario_dir = scenario_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out_base = out_override
        .map(|p| p.to_path_buf())
        .or_else(|| sc.out_dir.as_ref().map(|d| PathBuf::from(d)))
        .unwrap_or_else(|| PathBuf::from("out"))
        .join("sweep");
    fs::create_dir_all(&out_base)?;

    let jobs: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
    let results: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; jobs.len()]);
    let cursor = AtomicUsize::new(0);
    let workers = sweep_threads().min(jobs.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let (idx, value) = jobs[i];
                let sub = out_base.join(format!("{}_{idx:03}", param.name()));
                let row = match param
                    .apply(&sc, value)
                    .and_then(|sub_sc| run_scenario(&sub_sc, &scenario_dir, &sub))
                {
                    Ok(report) => SweepRow {
                        value,
                        traditional_margin: report.summary.scalars.traditional_margin,
                        ye_margin: report.summary.scalars.ye_margin,
                        min_fidelity: report.summary.scalars.min_fidelity,
                        max_q_over_t: report.summary.scalars.max_q_over_t,
                        max_q_a: report.summary.scalars.max_q_a,
                        errors: report.summary.errors.len(),
                    },
                    Err(e) => {
                        let _ = fs::create_dir_all(&sub);
                        let _ = fs::write(sub.join("error.txt"), e.to_string());
                        SweepRow {
                            value,
                            traditional_margin: None,
                            ye_margin: None,
                            min_fidelity: None,
                            max_q_over_t: None,
                            max_q_a: None,
                            errors: 1,
                        }
                    }
                };
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });

    let rows: Vec<SweepRow> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job produces a row"))
        .collect();

    let mut buf = Vec::new();
    writeln!(buf, "value,traditional_margin,ye_margin,min_fidelity,maxQ_over_T,maxQ_a")?;
    let opt = |v: Option<f64>| v.map(fmt_g17).unwrap_or_else(|| "nan".into());
    for row in &rows {
        writeln!(
            buf,
            "{},{},{},{},{},{}",
            fmt_g17(row.value),
            opt(row.traditional_margin),
            opt(row.ye_margin),
            opt(row.min_fidelity),
            opt(row.max_q_over_t),
            opt(row.max_q_a)
        )?;
    }
    fs::write(out_base.join("sweep.csv"), buf)?;
    Ok(SweepReport { out_dir: out_base, rows })
}

/// Re-export the eigensolver entry point for binding layers that only pull
/// in the runner.
pub fn eigenvalues_at(h: &Hamiltonian, s: f64, t_total: f64) -> Result<Vec<f64>> {
    Ok(hermitian_eigh(&h.eval(s, t_total), false, None)?.eigenvalues)
}
