//! Eigensolver and exponential contracts on random matrices, checked against
//! a Taylor scaling-and-squaring oracle and direct residual evaluation.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use adlab::linalg::{hermitian_eigh, unitary_step, ComplexMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = ComplexMatrix::zeros(dim);
    for r in 0..dim {
        for col in 0..dim {
            m[(r, col)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    m.hermitize()
}

/// Test-only matrix exponential: scale down until the norm is small, run a
/// plain Taylor series, square back up. Independent of the eigendecomposition
/// route used by the library.
fn expm_taylor(m: &ComplexMatrix) -> ComplexMatrix {
    let dim = m.dim();
    let norm = m.max_abs() * dim as f64;
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.scale(c(1.0 / 2.0f64.powi(squarings as i32), 0.0));
    let mut term = ComplexMatrix::identity(dim);
    let mut acc = ComplexMatrix::identity(dim);
    for j in 1..=24 {
        term = term.mul(&scaled).scale(c(1.0 / j as f64, 0.0));
        acc = acc.add(&term);
    }
    for _ in 0..squarings {
        acc = acc.mul(&acc);
    }
    acc
}

#[test]
fn random_hermitian_eigh_residuals() {
    let h = random_hermitian(4, 0x5eed);
    let d = hermitian_eigh(&h, false, None).unwrap();
    let scale = h.max_abs();
    assert!(d.residual(&h) <= 1e-10 * scale, "residual {:.3e}", d.residual(&h));
    assert!(d.orthonormality_defect() <= 1e-10);

    // reconstruction: V diag(E) V† = H
    let n = h.dim();
    let mut rebuilt = ComplexMatrix::zeros(n);
    for k in 0..n {
        let v = d.eigenvectors.column(k);
        for r in 0..n {
            for col in 0..n {
                rebuilt[(r, col)] += v[r] * v[col].conj() * d.eigenvalues[k];
            }
        }
    }
    assert!(rebuilt.sub(&h).max_abs() <= 1e-9 * scale);
}

#[test]
fn unitary_step_matches_taylor_oracle() {
    let h = random_hermitian(3, 0xbeef);
    let dt = 0.37;
    let u = unitary_step(&h, dt).unwrap();
    let oracle = expm_taylor(&h.scale(c(0.0, -dt)));
    assert!(
        u.sub(&oracle).max_abs() <= 1e-12,
        "deviation {:.3e}",
        u.sub(&oracle).max_abs()
    );
    assert!(u.unitarity_defect() <= 1e-12);
}

#[test]
fn eigh_scales_to_the_intended_sizes() {
    // the sweep sizes the crate is meant for: well past the bundled 2x2s
    for (dim, seed) in [(8usize, 11u64), (16, 12), (32, 13)] {
        let h = random_hermitian(dim, seed);
        let d = hermitian_eigh(&h, false, None).unwrap();
        let scale = h.max_abs();
        assert!(
            d.residual(&h) <= 1e-10 * scale,
            "dim {dim}: residual {:.3e}",
            d.residual(&h)
        );
        assert!(d.orthonormality_defect() <= 1e-10, "dim {dim}");
        for w in d.eigenvalues.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigh_invariants_hold(seed in 0u64..1_000_000, dim in 2usize..6) {
        let h = random_hermitian(dim, seed);
        let d = hermitian_eigh(&h, false, None).unwrap();
        let scale = h.max_abs().max(1e-12);
        prop_assert!(d.residual(&h) <= 1e-10 * scale);
        prop_assert!(d.orthonormality_defect() <= 1e-10);
        // ascending order
        for w in d.eigenvalues.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn unitary_steps_compose(seed in 0u64..1_000_000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let h = random_hermitian(3, seed);
        let ua = unitary_step(&h, a).unwrap();
        let ub = unitary_step(&h, b).unwrap();
        let uab = unitary_step(&h, a + b).unwrap();
        prop_assert!(ua.mul(&ub).sub(&uab).max_abs() <= 1e-11);
    }
}
