//! Propagation against closed-form oracles, amplitude extraction, fidelity
//! traces, and the adjoint route to dual evolution.

use num_complex::Complex64;

use adlab::evolve::{
    amplitudes, dual_propagator, fidelity_trace, propagate, propagator_trace, StateTrace,
};
use adlab::linalg::{ComplexMatrix, ComplexVector};
use adlab::models::{build_dual, rotating_spin, Grid, Hamiltonian, RotatingSpinParams};
use adlab::spectral::{cumtrapz, decompose_path, to_parallel_gauge};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `cos(θ)·I - i·sin(θ)·(n̂·σ)` — closed-form SU(2) exponential
/// `exp(-iθ n̂·σ)`; the oracle's own matrix exponential.
fn su2_exp(theta: f64, nx: f64, ny: f64, nz: f64) -> ComplexMatrix {
    let (s, co) = theta.sin_cos();
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = c(co, -s * nz);
    m[(0, 1)] = c(-s * ny, -s * nx);
    m[(1, 0)] = c(s * ny, -s * nx);
    m[(1, 1)] = c(co, s * nz);
    m
}

/// Rotating-frame closed form for the rotating spin:
/// `U(t) = e^{-iωtσz/2} · exp(-it·[-(ω0/2)σx - (ω/2)σz])` with `t = sT`.
fn rotating_oracle(s: f64, omega0: f64, t_total: f64) -> ComplexMatrix {
    let w = TAU / t_total;
    let t = s * t_total;
    let lab = su2_exp(w * t / 2.0, 0.0, 0.0, 1.0);
    let big = (omega0 * omega0 + w * w).sqrt();
    // K = -(Ω/2) n̂·σ with n̂ = (ω0, 0, ω)/Ω, so exp(-itK) = exp(+i(Ωt/2)n̂·σ)
    let rot = su2_exp(-big * t / 2.0, omega0 / big, 0.0, w / big);
    lab.mul(&rot)
}

#[test]
fn rotating_spin_matches_closed_form() {
    let t_total = 200.0 * PI;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let h = Hamiltonian::Driven(rotating_spin(&params));
    let grid = Grid::uniform(8193).unwrap();
    let trace = propagator_trace(&h, t_total, &grid).unwrap();
    let mut worst = 0.0f64;
    for (j, &s) in grid.points().iter().enumerate() {
        let want = rotating_oracle(s, 1.0, t_total);
        worst = worst.max(trace.unitaries()[j].sub(&want).max_abs());
    }
    assert!(worst <= 1e-8, "closed-form deviation {worst:.3e}");
    assert!(trace.unitarity_drift() <= 1e-10);
}

#[test]
fn integrator_halving_convergence() {
    // halving ds must shrink the endpoint error by at least 3.5x
    let t_total = 200.0 * PI;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let h = Hamiltonian::Driven(rotating_spin(&params));
    let want = rotating_oracle(1.0, 1.0, t_total);
    let mut prev: Option<f64> = None;
    for n in [4097usize, 8193, 16385] {
        let grid = Grid::uniform(n).unwrap();
        let trace = propagator_trace(&h, t_total, &grid).unwrap();
        let err = trace.unitaries()[n - 1].sub(&want).max_abs();
        if let Some(p) = prev {
            assert!(
                p / err >= 3.5,
                "halving factor {:.2} below 3.5 at n={n}",
                p / err
            );
        }
        prev = Some(err);
    }
}

#[test]
fn dual_propagator_is_the_adjoint() {
    let t_total = 200.0 * PI;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let h = Hamiltonian::Driven(rotating_spin(&params));
    let grid = Grid::uniform(4097).unwrap();
    let ua = propagator_trace(&h, t_total, &grid).unwrap();
    let ub = dual_propagator(&ua);
    assert!(ub.unitaries()[0].sub(&ComplexMatrix::identity(2)).max_abs() < 1e-14);
    let mut worst = 0.0f64;
    for j in 0..grid.len() {
        let prod = ub.unitaries()[j].mul(&ua.unitaries()[j]);
        worst = worst.max(prod.sub(&ComplexMatrix::identity(2)).max_abs());
    }
    assert!(worst <= 1e-10);
}

#[test]
fn eigenstate_round_trip_amplitudes() {
    // a state held exactly in |E_1(s)> e^{-iT∫E_1} has phi = (1, 0)
    let t_total = 50.0;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let h = Hamiltonian::Driven(rotating_spin(&params));
    let grid = Grid::uniform(513).unwrap();
    let path = to_parallel_gauge(&decompose_path(&h, t_total, &grid).unwrap()).unwrap();
    let ds = grid.step().unwrap();
    let phase = cumtrapz(&path.energy_series(0), ds);
    let states: Vec<ComplexVector> = (0..grid.len())
        .map(|j| {
            path.frame(j)
                .vector(0)
                .scale(Complex64::from_polar(1.0, -t_total * phase[j]))
        })
        .collect();
    let trace = StateTrace::new(grid.clone(), states).unwrap();
    let amps = amplitudes(&trace, &path, t_total).unwrap();
    for j in 0..grid.len() {
        assert!((amps.at(j, 0) - c(1., 0.)).norm() < 1e-9);
        assert!(amps.at(j, 1).norm() < 1e-9);
    }
}

#[test]
fn dual_system_exact_fidelity_and_amplitude() {
    // b-system started in |E_1^b(0)>: |phi_2^b| = |sin(pi s)|,
    // F = 1 - sin^2(pi s), collapsing to 0 at s = 1/2 — while the drive is
    // slow by every traditional measure.
    let t_total = 200.0 * PI; // omega/omega0 = 0.01
    let n_points = 8192;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let ha = Hamiltonian::Driven(rotating_spin(&params));
    let grid = Grid::uniform(n_points).unwrap();

    let hb = Hamiltonian::Grid(build_dual(&ha, t_total, &grid).unwrap());
    let path_b = to_parallel_gauge(&decompose_path(&hb, t_total, &grid).unwrap()).unwrap();

    let ua = propagator_trace(&ha, t_total, &grid).unwrap();
    let ub = dual_propagator(&ua);
    let psi0 = path_b.frame(0).vector(0);
    let states = ub.apply(&psi0);
    assert!(states.max_norm_defect() <= 1e-10);

    let amps = amplitudes(&states, &path_b, t_total).unwrap();
    assert!(amps.total_probability_defect() <= 1e-9);
    let fid = fidelity_trace(&states, &path_b, 0).unwrap();

    let mut worst_amp = 0.0f64;
    let mut worst_fid = 0.0f64;
    let mut worst_complete = 0.0f64;
    for (j, &s) in grid.points().iter().enumerate() {
        let sin = (PI * s).sin();
        worst_amp = worst_amp.max((amps.at(j, 1).norm() - sin.abs()).abs());
        worst_fid = worst_fid.max((fid[j] - (1.0 - sin * sin)).abs());
        // two-level completeness
        worst_complete = worst_complete.max((fid[j] + amps.at(j, 1).norm_sqr() - 1.0).abs());
        // first-order envelope: F stays above 1 - (pi s)^2 (with headroom)
        assert!(fid[j] >= 1.0 - (PI * s) * (PI * s) * (1.0 + 1e-3) - 1e-9);
    }
    assert!(worst_amp <= 1e-6, "|phi_2| defect {worst_amp:.3e}");
    assert!(worst_fid <= 1e-6, "fidelity defect {worst_fid:.3e}");
    assert!(worst_complete <= 1e-9, "completeness defect {worst_complete:.3e}");

    // fidelity collapse at s = 1/2
    let j_half = grid.nearest(0.5);
    assert!(fid[j_half] <= 1e-6, "F(0.5) = {:.3e}", fid[j_half]);

    // the exact amplitude carries phase i relative to sin(pi s): record it
    let j_probe = grid.nearest(0.25);
    let phi = amps.at(j_probe, 1);
    assert!(
        (phi - c(0.0, (PI * 0.25).sin())).norm() < 1e-4,
        "phase convention drifted: {phi}"
    );
}

#[test]
fn driven_system_stays_adiabatic() {
    // a-system started in the ground state: transitions stay below the
    // first-order bound 2|A|/T (with 10% headroom)
    let t_total = 200.0 * PI;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let h = Hamiltonian::Driven(rotating_spin(&params));
    let grid = Grid::uniform(4097).unwrap();
    let path = to_parallel_gauge(&decompose_path(&h, t_total, &grid).unwrap()).unwrap();
    let psi0 = path.frame(0).vector(0);
    let (_, states) = propagate(&h, t_total, &grid, &psi0).unwrap();
    let amps = amplitudes(&states, &path, t_total).unwrap();
    let bound = 2.0 * PI / t_total * 1.1;
    for j in 0..grid.len() {
        assert!(
            amps.at(j, 1).norm() <= bound,
            "|phi_2| = {:.3e} above {bound:.3e} at s = {}",
            amps.at(j, 1).norm(),
            grid.points()[j]
        );
    }
}

#[test]
fn direct_grid_propagation_validates_the_adjoint_route() {
    // stiff direct integration of the materialized dual agrees with
    // U_b = U_a^† within the relaxed budget
    let t_total = 200.0 * PI;
    let n_points = 65537;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let ha = Hamiltonian::Driven(rotating_spin(&params));
    let grid = Grid::uniform(n_points).unwrap();
    let hb_grid = build_dual(&ha, t_total, &grid).unwrap();

    let ua = propagator_trace(&ha, t_total, &grid).unwrap();
    let ub_adjoint = dual_propagator(&ua);
    let ub_direct = propagator_trace(&Hamiltonian::Grid(hb_grid), t_total, &grid).unwrap();

    let mut worst = 0.0f64;
    for j in 0..n_points {
        worst = worst.max(
            ub_direct.unitaries()[j]
                .sub(&ub_adjoint.unitaries()[j])
                .max_abs(),
        );
    }
    assert!(worst <= 1e-4, "direct-vs-adjoint deviation {worst:.3e}");

    // the fidelity traces of the two routes agree inside the same budget
    let hb_for_path = build_dual(&ha, t_total, &grid).unwrap();
    let path_b =
        to_parallel_gauge(&decompose_path(&Hamiltonian::Grid(hb_for_path), t_total, &grid).unwrap())
            .unwrap();
    let psi0 = path_b.frame(0).vector(0);
    let fid_adjoint = fidelity_trace(&ub_adjoint.apply(&psi0), &path_b, 0).unwrap();
    let fid_direct = fidelity_trace(&ub_direct.apply(&psi0), &path_b, 0).unwrap();
    let worst_f = fid_adjoint
        .iter()
        .zip(fid_direct.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst_f <= 2.0 * 1e-4, "fidelity route disagreement {worst_f:.3e}");
}

#[test]
fn dual_involution_recovers_the_base() {
    // dual(dual(H_a)) = H_a up to twice the direct-propagation error
    let t_total = 200.0 * PI;
    let n_points = 65537;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let ha = Hamiltonian::Driven(rotating_spin(&params));
    let grid = Grid::uniform(n_points).unwrap();
    let hb = build_dual(&ha, t_total, &grid).unwrap();
    let hc = build_dual(&Hamiltonian::Grid(hb.clone()), t_total, &grid).unwrap();

    // measured direct-propagation error on the stiff grid
    let ua = propagator_trace(&ha, t_total, &grid).unwrap();
    let ub_adjoint = dual_propagator(&ua);
    let ub_direct = propagator_trace(&Hamiltonian::Grid(hb), t_total, &grid).unwrap();
    let mut eps_prop = 0.0f64;
    for j in 0..n_points {
        eps_prop = eps_prop.max(
            ub_direct.unitaries()[j]
                .sub(&ub_adjoint.unitaries()[j])
                .max_abs(),
        );
    }

    let mut worst = 0.0f64;
    for j in 0..n_points {
        let h_here = ha.at_grid_index(&grid, j, t_total);
        worst = worst.max(hc.at_index(j).sub(&h_here).max_abs());
    }
    let budget = 2.0 * eps_prop.max(1e-12);
    assert!(
        worst <= budget,
        "involution defect {worst:.3e} above 2x propagation error {budget:.3e}"
    );
}

#[test]
fn dual_spectrum_negates() {
    let t_total = 200.0 * PI;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let ha = Hamiltonian::Driven(rotating_spin(&params));
    let grid = Grid::uniform(4097).unwrap();
    let hb = build_dual(&ha, t_total, &grid).unwrap();
    let ua = propagator_trace(&ha, t_total, &grid).unwrap();
    for j in 0..grid.len() {
        let d = adlab::linalg::hermitian_eigh(hb.at_index(j), true, None).unwrap();
        assert!((d.eigenvalues[0] + 0.5).abs() <= 1e-8);
        assert!((d.eigenvalues[1] - 0.5).abs() <= 1e-8);
        // definition residual: H_b + U† H_a U = 0 up to roundoff
        let u = &ua.unitaries()[j];
        let conj = u.adjoint().mul(&ha.at_grid_index(&grid, j, t_total)).mul(u);
        assert!(hb.at_index(j).add(&conj).max_abs() <= 1e-10 * 0.5);
    }
}

#[test]
fn grid_mismatch_is_rejected() {
    let t_total = 50.0;
    let params = RotatingSpinParams::new(1.0, t_total).unwrap();
    let h = Hamiltonian::Driven(rotating_spin(&params));
    let g1 = Grid::uniform(257).unwrap();
    let g2 = Grid::uniform(513).unwrap();
    let path = to_parallel_gauge(&decompose_path(&h, t_total, &g1).unwrap()).unwrap();
    let psi0 = path.frame(0).vector(0);
    let (_, states) = propagate(&h, t_total, &g2, &psi0).unwrap();
    assert!(matches!(
        amplitudes(&states, &path, t_total),
        Err(adlab::Error::GridMismatch(_))
    ));
    assert!(matches!(
        fidelity_trace(&states, &path, 0),
        Err(adlab::Error::GridMismatch(_))
    ));
}
