//! Small worked systems used throughout the tests, benches and CLI fixtures.

use num_complex::Complex64 as C64;

use crate::linalg::CMatrix;
use crate::perturbation::RankOneSystem;
use crate::structured::{make_structured_system, StructureContext};

fn re(xs: &[f64]) -> Vec<C64> {
    xs.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn unit(n: usize, i: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); n];
    e[i] = C64::new(1.0, 0.0);
    e
}

fn build(n: usize, a: &[f64], u: Vec<C64>, v: Vec<C64>) -> RankOneSystem {
    RankOneSystem::new(CMatrix::from_real(n, a).unwrap(), u, v).unwrap()
}

/// `A = [[0,1],[-1,-1]]`, `u = (0,1)`, `v = (1,1)`: `Q = (x+1)/(x^2+x+1)`,
/// critical points 0 and -2.
pub fn ray_example() -> RankOneSystem {
    build(2, &[0.0, 1.0, -1.0, -1.0], re(&[0.0, 1.0]), re(&[1.0, 1.0]))
}

/// Companion matrix with last row `(1,-1,1)`, `u = e_3`, `v = (1,-1,1)`;
/// collapses to a triple eigenvalue at zero for `tau = -1`.
pub fn angular_example() -> RankOneSystem {
    build(
        3,
        &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, -1.0, 1.0],
        unit(3, 2),
        re(&[1.0, -1.0, 1.0]),
    )
}

/// `A = J_2(1) (+) 2`, `u = v = e_1`: both eigenvalues accidentally frozen,
/// spectrum `{1, 2, tau + 1}`.
pub fn frozen_example() -> RankOneSystem {
    build(
        3,
        &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0],
        unit(3, 0),
        unit(3, 0),
    )
}

/// `A = J_n(0)`, `u = e_n`, `v = e_1`: eigenvalues are the n-th roots of tau.
pub fn jordan_example(n: usize) -> RankOneSystem {
    let mut a = vec![0.0; n * n];
    for i in 0..n.saturating_sub(1) {
        a[i * n + i + 1] = 1.0;
    }
    build(n, &a, unit(n, n - 1), unit(n, 0))
}

/// `A = ones(2)`, `u = e_1`, `v = e_2`: eigenvalues `1 +- sqrt(1 + tau)`.
pub fn nonneg_example() -> RankOneSystem {
    build(2, &[1.0, 1.0, 1.0, 1.0], unit(2, 0), unit(2, 1))
}

pub fn hamiltonian_j() -> CMatrix {
    CMatrix::from_real(
        4,
        &[
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            -1.0, 0.0, 0.0, 0.0,
        ],
    )
    .unwrap()
}

/// J-Hamiltonian `J_2(1) (+) J_2(-1)` with `u = (0,1,1,1)` and `v = -Ju`;
/// `p_uv` is the constant -4 and four eigenvalues diverge.
pub fn hamiltonian_example() -> RankOneSystem {
    let a = CMatrix::from_real(
        4,
        &[
            1.0, 1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, -1.0, 1.0, //
            0.0, 0.0, 0.0, -1.0,
        ],
    )
    .unwrap();
    let ctx = StructureContext::j_hamiltonian(hamiltonian_j()).unwrap();
    make_structured_system(a, re(&[0.0, 1.0, 1.0, 1.0]), ctx).unwrap()
}

/// `diag(-2, 0, J_2(4))` with complex `u`, `v`; minimal polynomial of degree 4.
pub fn figure1_example() -> RankOneSystem {
    let a = CMatrix::from_real(
        4,
        &[
            -2.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 4.0, 1.0, //
            0.0, 0.0, 0.0, 4.0,
        ],
    )
    .unwrap();
    let c = C64::new;
    let u = vec![c(-0.2, 0.7), c(1.5, -1.2), c(1.5, 0.5), c(1.5, 1.5)];
    let v = vec![c(0.5, 0.3), c(1.0, -0.8), c(0.8, 0.9), c(-0.3, -1.2)];
    RankOneSystem::new(a, u, v).unwrap()
}
