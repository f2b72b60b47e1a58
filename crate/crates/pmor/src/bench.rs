//! Synthetic benchmark systems.
//!
//! Three structural families drive the tests and examples: an RLC ladder
//! with a wide frequency range (modified nodal analysis), a gridded thermal
//! model with up to three Robin-boundary film coefficients, and an undamped
//! second-order filter whose operator is affine in s^2 with two ports.
//! All generators are deterministic functions of their spec.

use crate::error::{Error, Result};
use crate::linalg::CooMatrix;
use crate::system::{AffineParametricSystem, AffineTerm, Coefficient, ParamSpec};
use serde::{Deserialize, Serialize};

/// RLC transmission-line ladder: `sections` identical RL series branches
/// between grounded-capacitor nodes, current injection and voltage
/// measurement at the first node, conductive load at the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderSpec {
    pub sections: usize,
    pub resistance: f64,
    pub inductance: f64,
    pub capacitance: f64,
    pub load_conductance: f64,
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec {
            sections: 100,
            resistance: 1.0,
            inductance: 1e-8,
            capacitance: 1e-12,
            load_conductance: 1.0,
        }
    }
}

/// Modified nodal analysis of the ladder. States are the `sections + 1`
/// node voltages followed by the `sections` inductor currents, so the order
/// is `2 * sections + 1`.
pub fn gen_rlc_ladder(spec: &LadderSpec) -> Result<AffineParametricSystem> {
    let k = spec.sections;
    if k == 0 {
        return Err(Error::InvalidArgument("ladder needs at least one section".into()));
    }
    for (name, v) in [
        ("resistance", spec.resistance),
        ("inductance", spec.inductance),
        ("capacitance", spec.capacitance),
        ("load conductance", spec.load_conductance),
    ] {
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("ladder {name} must be positive")));
        }
    }
    let n = 2 * k + 1;
    let cur = |j: usize| k + 1 + j;

    let mut e = CooMatrix::new(n, n);
    for node in 0..=k {
        e.push_real(node, node, spec.capacitance);
    }
    for j in 0..k {
        e.push_real(cur(j), cur(j), spec.inductance);
    }

    let mut a = CooMatrix::new(n, n);
    // Node balances: C v' = sum of branch currents into the node.
    a.push_real(0, cur(0), -1.0);
    for node in 1..k {
        a.push_real(node, cur(node - 1), 1.0);
        a.push_real(node, cur(node), -1.0);
    }
    a.push_real(k, cur(k - 1), 1.0);
    a.push_real(k, k, -spec.load_conductance);
    // Branch equations: L i' = v_left - v_right - R i.
    for j in 0..k {
        a.push_real(cur(j), j, 1.0);
        a.push_real(cur(j), j + 1, -1.0);
        a.push_real(cur(j), cur(j), -spec.resistance);
    }

    let mut b = CooMatrix::new(n, 1);
    b.push_real(0, 0, 1.0);
    let mut c = CooMatrix::new(1, n);
    c.push_real(0, 0, 1.0);

    AffineParametricSystem::new(
        e.to_csc(),
        vec![AffineTerm::constant(1.0, a.to_csc())],
        vec![AffineTerm::constant(1.0, b.to_csc())],
        vec![AffineTerm::constant(1.0, c.to_csc())],
        vec![],
    )
}

/// Gridded diffusion model with Robin-type boundary parameters: the
/// operator is `s E - (A0 - sum_i h_i A_i)` with a symmetric finite
/// difference Laplacian `A0` and nonnegative diagonal edge masks `A_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalSpec {
    pub nx: usize,
    pub ny: usize,
    pub diffusivity: f64,
    /// Parameterized boundary edges, in the order left, right, bottom.
    pub n_params: usize,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for ThermalSpec {
    fn default() -> Self {
        ThermalSpec {
            nx: 17,
            ny: 18,
            diffusivity: 1.0,
            n_params: 3,
            h_min: 1.0,
            h_max: 1e4,
        }
    }
}

pub fn gen_thermal(spec: &ThermalSpec) -> Result<AffineParametricSystem> {
    if spec.nx < 2 || spec.ny < 2 {
        return Err(Error::InvalidArgument("thermal grid needs at least 2 nodes per axis".into()));
    }
    if spec.n_params > 3 {
        return Err(Error::InvalidArgument("at most 3 boundary parameters are supported".into()));
    }
    if !(spec.diffusivity > 0.0) {
        return Err(Error::InvalidArgument("diffusivity must be positive".into()));
    }
    if !(spec.h_min > 0.0 && spec.h_max > spec.h_min) {
        return Err(Error::InvalidArgument("boundary coefficient range must satisfy 0 < min < max".into()));
    }
    let (nx, ny) = (spec.nx, spec.ny);
    let n = nx * ny;
    let idx = |ix: usize, iy: usize| ix * ny + iy;

    // Graph Laplacian of the grid, negated: symmetric negative semidefinite.
    let mut a0 = CooMatrix::new(n, n);
    for ix in 0..nx {
        for iy in 0..ny {
            let i = idx(ix, iy);
            let mut degree = 0.0;
            let mut neighbor = |j: usize| {
                a0.push_real(i, j, spec.diffusivity);
            };
            if ix > 0 {
                neighbor(idx(ix - 1, iy));
                degree += 1.0;
            }
            if ix + 1 < nx {
                neighbor(idx(ix + 1, iy));
                degree += 1.0;
            }
            if iy > 0 {
                neighbor(idx(ix, iy - 1));
                degree += 1.0;
            }
            if iy + 1 < ny {
                neighbor(idx(ix, iy + 1));
                degree += 1.0;
            }
            a0.push_real(i, i, -degree * spec.diffusivity);
        }
    }

    let mut a_terms = vec![AffineTerm::constant(1.0, a0.to_csc())];
    let mut params = Vec::new();
    for p in 0..spec.n_params {
        let mut mask = CooMatrix::new(n, n);
        match p {
            0 => (0..ny).for_each(|iy| mask.push_real(idx(0, iy), idx(0, iy), 1.0)),
            1 => (0..ny).for_each(|iy| mask.push_real(idx(nx - 1, iy), idx(nx - 1, iy), 1.0)),
            _ => (0..nx).for_each(|ix| mask.push_real(idx(ix, 0), idx(ix, 0), 1.0)),
        }
        // The film coefficient enters the operator as + h_p * mask, so the
        // stored pencil term carries the negated mask.
        a_terms.push(AffineTerm::new(
            Coefficient::Param { index: p },
            mask.to_csc().scaled(num_complex::Complex64::new(-1.0, 0.0)),
        ));
        params.push(ParamSpec {
            name: format!("h{}", p + 1),
            min: spec.h_min,
            max: spec.h_max,
        });
    }

    let mut b = CooMatrix::new(n, 1);
    b.push_real(idx(nx / 2, ny / 2), 0, 1.0);
    let mut c = CooMatrix::new(1, n);
    c.push_real(0, idx(0, 0), 1.0);

    AffineParametricSystem::new(
        crate::linalg::CscMatrix::identity(n),
        a_terms,
        vec![AffineTerm::constant(1.0, b.to_csc())],
        vec![AffineTerm::constant(1.0, c.to_csc())],
        params,
    )
}

/// Undamped two-port filter: operator `S + s^2 T` with tridiagonal
/// stiffness and diagonal mass, inputs `s Q` and outputs `Q^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecondOrderSpec {
    pub dimension: usize,
    pub stiffness: f64,
    pub mass: f64,
}

impl Default for SecondOrderSpec {
    fn default() -> Self {
        SecondOrderSpec {
            dimension: 400,
            stiffness: 1e4,
            mass: 1.0,
        }
    }
}

pub fn gen_second_order(spec: &SecondOrderSpec) -> Result<AffineParametricSystem> {
    let n = spec.dimension;
    if n < 4 {
        return Err(Error::InvalidArgument("filter needs dimension at least 4".into()));
    }
    if !(spec.stiffness > 0.0 && spec.mass > 0.0) {
        return Err(Error::InvalidArgument("stiffness and mass must be positive".into()));
    }
    let mut s_mat = CooMatrix::new(n, n);
    for i in 0..n {
        s_mat.push_real(i, i, 2.0 * spec.stiffness);
        if i + 1 < n {
            s_mat.push_real(i, i + 1, -spec.stiffness);
            s_mat.push_real(i + 1, i, -spec.stiffness);
        }
    }
    let mut t_mat = CooMatrix::new(n, n);
    for i in 0..n {
        t_mat.push_real(i, i, spec.mass);
    }
    let (p1, p2) = (n / 4, 3 * n / 4);
    let mut q = CooMatrix::new(n, 2);
    q.push_real(p1, 0, 1.0);
    q.push_real(p2, 1, 1.0);
    let mut qt = CooMatrix::new(2, n);
    qt.push_real(0, p1, 1.0);
    qt.push_real(1, p2, 1.0);

    // s E - sum theta_j A_j = S + s^2 T with E = 0.
    let minus_one = num_complex::Complex64::new(-1.0, 0.0);
    AffineParametricSystem::new(
        crate::linalg::CscMatrix::zeros(n, n),
        vec![
            AffineTerm::constant(1.0, s_mat.to_csc().scaled(minus_one)),
            AffineTerm::new(Coefficient::SSquared, t_mat.to_csc().scaled(minus_one)),
        ],
        vec![AffineTerm::new(Coefficient::S, q.to_csc())],
        vec![AffineTerm::constant(1.0, qt.to_csc())],
        vec![],
    )
}

/// Resonant frequencies of the undamped filter in hertz, ascending: the
/// operator `S + s^2 T` is singular at `s = j omega_i` with
/// `omega_i^2 = (stiffness/mass) * 2 (1 - cos(i pi / (n+1)))`.
pub fn second_order_resonances_hz(spec: &SecondOrderSpec) -> Vec<f64> {
    let n = spec.dimension;
    let ratio = spec.stiffness / spec.mass;
    (1..=n)
        .map(|i| {
            let lambda = 2.0 * ratio * (1.0 - (i as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos());
            lambda.sqrt() / (2.0 * std::f64::consts::PI)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::ParameterPoint;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    #[test]
    fn single_section_ladder_matches_hand_assembly() {
        let spec = LadderSpec {
            sections: 1,
            resistance: 2.0,
            inductance: 3.0,
            capacitance: 5.0,
            load_conductance: 7.0,
        };
        let sys = gen_rlc_ladder(&spec).unwrap();
        assert_eq!(sys.n(), 3);
        let e = sys.e_matrix().to_dense();
        let want_e = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, 5.0, 3.0]));
        let a = sys.a_terms()[0].matrix.to_dense();
        #[rustfmt::skip]
        let want_a = DMatrix::from_row_slice(3, 3, &[
            0.0,  0.0, -1.0,
            0.0, -7.0,  1.0,
            1.0, -1.0, -2.0,
        ]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(e[(i, j)], Complex64::new(want_e[(i, j)], 0.0));
                assert_eq!(a[(i, j)], Complex64::new(want_a[(i, j)], 0.0));
            }
        }
        let pt = ParameterPoint::new(Complex64::ZERO, vec![]);
        let b = sys.eval_b(&pt).unwrap();
        let c = sys.eval_c(&pt).unwrap();
        assert_eq!(b[(0, 0)], Complex64::ONE);
        assert_eq!(c[(0, 0)], Complex64::ONE);
    }

    #[test]
    fn ladder_pencil_is_stable() {
        // Generalized eigenvalues of (A, E) stay in the closed left half
        // plane; checked densely through inv(E) * A since E is diagonal.
        let sys = gen_rlc_ladder(&LadderSpec {
            sections: 40,
            ..LadderSpec::default()
        })
        .unwrap();
        let e = sys.e_matrix().to_dense().map(|v| v.re);
        let a = sys.a_terms()[0].matrix.to_dense().map(|v| v.re);
        let mut scaled = a.clone();
        for i in 0..sys.n() {
            for j in 0..sys.n() {
                scaled[(i, j)] = a[(i, j)] / e[(i, i)];
            }
        }
        let eigs = scaled.complex_eigenvalues();
        for lam in eigs.iter() {
            assert!(lam.re <= 1e-6, "unstable mode {lam}");
        }
    }

    #[test]
    fn ladder_is_sparse_with_linear_nonzero_count() {
        let sys = gen_rlc_ladder(&LadderSpec::default()).unwrap();
        assert_eq!(sys.n(), 201);
        let nnz_e = sys.e_matrix().triplets().len();
        let nnz_a = sys.a_terms()[0].matrix.triplets().len();
        assert_eq!(nnz_e, 201);
        assert!(nnz_a <= 6 * 100 + 2);
    }

    #[test]
    fn tiny_thermal_grid_matches_hand_assembly() {
        let spec = ThermalSpec {
            nx: 2,
            ny: 2,
            diffusivity: 1.0,
            n_params: 1,
            h_min: 1.0,
            h_max: 10.0,
        };
        let sys = gen_thermal(&spec).unwrap();
        assert_eq!(sys.n(), 4);
        let a0 = sys.a_terms()[0].matrix.to_dense().map(|v| v.re);
        // Node order (ix, iy): (0,0), (0,1), (1,0), (1,1).
        #[rustfmt::skip]
        let want = DMatrix::from_row_slice(4, 4, &[
            -2.0,  1.0,  1.0,  0.0,
             1.0, -2.0,  0.0,  1.0,
             1.0,  0.0, -2.0,  1.0,
             0.0,  1.0,  1.0, -2.0,
        ]);
        assert_eq!(a0, want);
        // Left-edge mask covers the two ix = 0 nodes, negated in the pencil.
        let mask = sys.a_terms()[1].matrix.to_dense().map(|v| v.re);
        let want_mask =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0, 0.0, 0.0]));
        assert_eq!(mask, want_mask);
    }

    #[test]
    fn thermal_masks_are_nonnegative_diagonals() {
        let sys = gen_thermal(&ThermalSpec::default()).unwrap();
        assert_eq!(sys.n(), 306);
        assert_eq!(sys.d(), 3);
        for term in &sys.a_terms()[1..] {
            for (i, j, v) in term.matrix.triplets() {
                assert_eq!(i, j, "boundary masks must be diagonal");
                // Stored negated; the physical mask entry is -v.
                assert!(-v.re >= 0.0 && v.im == 0.0);
            }
        }
    }

    #[test]
    fn zero_film_coefficients_reduce_to_the_laplacian_pencil() {
        let sys = gen_thermal(&ThermalSpec {
            nx: 3,
            ny: 3,
            ..ThermalSpec::default()
        })
        .unwrap();
        let s = Complex64::new(0.0, 2.0);
        let pt = ParameterPoint::new(s, vec![0.0, 0.0, 0.0]);
        let op = sys.assemble(&pt).unwrap().to_dense();
        let want = DMatrix::<Complex64>::identity(9, 9) * s
            - sys.a_terms()[0].matrix.to_dense();
        assert_eq!(op, want);
    }

    #[test]
    fn thermal_laplacian_is_symmetric() {
        let sys = gen_thermal(&ThermalSpec::default()).unwrap();
        let a0 = sys.a_terms()[0].matrix.to_dense();
        assert_eq!(a0, a0.transpose());
    }

    #[test]
    fn second_order_blocks_are_symmetric_and_ports_disjoint() {
        let sys = gen_second_order(&SecondOrderSpec {
            dimension: 50,
            ..SecondOrderSpec::default()
        })
        .unwrap();
        assert_eq!((sys.m(), sys.p()), (2, 2));
        for term in sys.a_terms() {
            let m = term.matrix.to_dense();
            assert_eq!(m, m.transpose());
        }
        let pt = ParameterPoint::new(Complex64::new(0.0, 1.0), vec![]);
        let b = sys.eval_b(&pt).unwrap();
        let rows: Vec<usize> = (0..50).filter(|&i| b[(i, 0)] != Complex64::ZERO || b[(i, 1)] != Complex64::ZERO).collect();
        assert_eq!(rows, vec![12, 37]);
    }

    #[test]
    fn second_order_transfer_is_reciprocal() {
        let sys = gen_second_order(&SecondOrderSpec {
            dimension: 24,
            stiffness: 100.0,
            mass: 1.0,
        })
        .unwrap();
        let pt = ParameterPoint::new(Complex64::new(0.0, 3.7), vec![]);
        let h = sys.transfer_function(&pt).unwrap();
        assert!((h[(0, 1)] - h[(1, 0)]).norm() <= 1e-12 * h[(0, 1)].norm().max(1e-30));

        // Independent dense route: Q^T (S + s^2 T)^{-1} s Q.
        let s_mat = sys.a_terms()[0].matrix.to_dense() * Complex64::new(-1.0, 0.0);
        let t_mat = sys.a_terms()[1].matrix.to_dense() * Complex64::new(-1.0, 0.0);
        let op = &s_mat + &t_mat * (pt.s * pt.s);
        let b = sys.eval_b(&pt).unwrap();
        let c = sys.eval_c(&pt).unwrap();
        let x = op.lu().solve(&b).unwrap();
        let want = c * x;
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[(i, j)] - want[(i, j)]).norm() <= 1e-9 * want[(i, j)].norm().max(1.0));
            }
        }
    }

    #[test]
    fn resonance_formula_matches_dense_eigenvalues() {
        let spec = SecondOrderSpec {
            dimension: 12,
            stiffness: 50.0,
            mass: 2.0,
        };
        let sys = gen_second_order(&spec).unwrap();
        let s_mat = sys.a_terms()[0].matrix.to_dense().map(|v| -v.re);
        let t_mat = sys.a_terms()[1].matrix.to_dense().map(|v| -v.re);
        // T is a scalar multiple of the identity, so the pencil reduces to
        // a standard symmetric eigenproblem.
        let scaled = s_mat / t_mat[(0, 0)];
        let mut eigs: Vec<f64> = scaled.symmetric_eigen().eigenvalues.iter().copied().collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let hz = second_order_resonances_hz(&spec);
        assert_eq!(hz.len(), 12);
        for (f, lam) in hz.iter().zip(&eigs) {
            let want = lam.sqrt() / (2.0 * std::f64::consts::PI);
            assert!((f - want).abs() <= 1e-9 * want);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(gen_rlc_ladder(&LadderSpec { sections: 0, ..LadderSpec::default() }).is_err());
        assert!(gen_thermal(&ThermalSpec { nx: 1, ..ThermalSpec::default() }).is_err());
        assert!(gen_thermal(&ThermalSpec { n_params: 4, ..ThermalSpec::default() }).is_err());
        assert!(gen_second_order(&SecondOrderSpec { dimension: 2, ..SecondOrderSpec::default() }).is_err());
    }
}
