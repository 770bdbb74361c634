mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::small_grid;
use proptest::prelude::*;
use tdsusy::chain::free_particle_chain;
use tdsusy::fields::{psi_basis, u_transform, ClosedFormField, Field, FieldRef, FreeParticleModel};
use tdsusy::numerics::{
    fd_check, field_difference, gram_matrix, identity_deviation, inner_product, inner_product_certified, nodelessness,
    schrodinger_residual, FdOrders, Grid, QuadratureRule,
};
use tdsusy::ops::Applied;
use tdsusy::{Error, C64};

fn gaussian(a: f64) -> FieldRef {
    ClosedFormField::new("gauss", move |x, _| (*x * *x * -a).exp()).into_ref()
}

#[test]
fn grid_invariants() {
    let g = Grid::default();
    assert_eq!(g.n_x(), 1025);
    assert_eq!(g.z_max(), 10.0);
    assert_eq!(g.t_samples(), &[0.0, 0.5, -0.5, 2.0, -2.0]);
    for &t in g.t_samples() {
        let xs: Vec<f64> = g.x_nodes(t).collect();
        assert_eq!(xs.len(), 1025);
        let s = (1.0 + t * t).sqrt();
        assert!((xs[0] + 10.0 * s).abs() < 1e-12 && (xs[1024] - 10.0 * s).abs() < 1e-12);
        assert!(xs[512].abs() < 1e-15);
        assert!(((xs[1] - xs[0]) - g.h_x(t)).abs() < 1e-12);
    }
    assert_eq!(g.points().count(), 5 * 1025);
    assert!(Grid::new(7.9, 1025, vec![0.0]).is_err());
    assert!(Grid::new(10.0, 1024, vec![0.0]).is_err());
    assert!(Grid::new(10.0, 129, vec![0.0]).is_err());
    assert!(Grid::new(10.0, 1025, vec![]).is_err());
    assert!(Grid::new(10.0, 1025, vec![f64::NAN]).is_err());
}

#[test]
fn gaussian_inner_products() {
    let g = small_grid();
    let rule = QuadratureRule::default();
    let f = gaussian(0.5);
    let ip = inner_product(f.as_ref(), f.as_ref(), 0.0, &g, &rule).unwrap();
    assert!((ip - PI.sqrt()).norm() < 1e-12, "{ip}");
    let h = gaussian(0.25);
    // ∫ e^{−3x²/4} dx = 2√(π/3)
    let ip = inner_product(f.as_ref(), h.as_ref(), 0.0, &g, &rule).unwrap();
    assert!((ip - 2.0 * (PI / 3.0).sqrt()).norm() < 1e-12, "{ip}");
}

#[test]
fn inner_product_is_conjugate_linear_in_the_first_slot() {
    let g = small_grid();
    let rule = QuadratureRule::default();
    let p0 = psi_basis(0).unwrap();
    let ip0 = ClosedFormField::new("i psi0", {
        let p0 = p0.clone();
        move |x, t| p0.eval(x.value().re, t.value().re, x.tower()).unwrap().scale(C64::i())
    })
    .into_ref();
    let v = inner_product(ip0.as_ref(), p0.as_ref(), 0.5, &g, &rule).unwrap();
    assert!((v - C64::new(0.0, -1.0)).norm() < 1e-10, "{v}");
}

#[test]
fn norm_identity_for_the_first_step() {
    let g = Grid::default();
    let rule = QuadratureRule::default();
    for m in [0, 2] {
        let mut chain = free_particle_chain(m, m + 1).unwrap();
        chain.certify_complete_reducibility(&g).unwrap();
        let l01 = Arc::new(chain.operator(0, 1).unwrap());
        for n in 0..=5 {
            let psi = psi_basis(n).unwrap();
            let lpsi = Applied::new(l01.clone(), psi.clone());
            for t in [0.0, 2.0] {
                let lhs = inner_product_certified(lpsi.as_ref(), lpsi.as_ref(), t, &g, &rule).unwrap();
                let rhs = inner_product_certified(psi.as_ref(), psi.as_ref(), t, &g, &rule).unwrap();
                assert!(lhs.discrepancy() <= 1e-8 && rhs.discrepancy() <= 1e-8);
                let want = (n + m + 1) as f64 * rhs.value.re;
                assert!((lhs.value.re - want).abs() <= 1e-6 * want, "m={m}, n={n}, t={t}");
            }
        }
    }
}

#[test]
fn non_decaying_integrand_is_refused() {
    let g = small_grid();
    let u = u_transform(0).unwrap();
    let psi = psi_basis(0).unwrap();
    let r = inner_product(u.as_ref(), psi.as_ref(), 0.0, &g, &QuadratureRule::default());
    assert!(matches!(r, Err(Error::NonDecaying { .. })), "{r:?}");
}

#[test]
fn doubling_the_grid_confirms_convergence() {
    let rule = QuadratureRule::default();
    let coarse = Grid::new(10.0, 513, vec![0.0, 2.0]).unwrap();
    let fine = coarse.with_nodes(1025);
    let model = FreeParticleModel::new(0, 3).unwrap();
    for f in [model.psi(4), model.phi(2), model.chi(0), model.chi(3)] {
        for &t in coarse.t_samples() {
            let a = inner_product_certified(f.as_ref(), f.as_ref(), t, &coarse, &rule).unwrap();
            let b = inner_product_certified(f.as_ref(), f.as_ref(), t, &fine, &rule).unwrap();
            assert!(a.discrepancy() <= 1e-8, "{}: {}", f.label(), a.discrepancy());
            assert!((a.value - b.value).norm() <= 1e-8, "{}: {} vs {}", f.label(), a.value, b.value);
            assert!((b.value.re - 1.0).abs() <= 1e-8);
        }
    }
}

#[test]
fn residual_examples() {
    let g = small_grid();
    let psi = psi_basis(2).unwrap();
    let r = schrodinger_residual("psi_2", psi.as_ref(), None, &g, 1e-9).unwrap();
    assert!(r.passed && r.max_norm <= 1e-9 && r.l2_norm <= 1e-9);

    let v1 = FreeParticleModel::new(0, 1).unwrap().v1();
    let r = schrodinger_residual("psi_2 at V1", psi.as_ref(), Some(v1.as_ref()), &g, 1e-8).unwrap();
    assert!(!r.passed && r.max_norm > 1e-3, "{}", r.max_norm);

    let model = FreeParticleModel::new(2, 3).unwrap();
    let v1 = model.v1();
    let r = schrodinger_residual("phi_1", model.phi(1).as_ref(), Some(v1.as_ref()), &g, 1e-8).unwrap();
    assert!(r.passed, "{}", r.max_norm);

    // a static Gaussian is not a free solution
    let r = schrodinger_residual("gauss", gaussian(0.5).as_ref(), None, &g, 1e-8).unwrap();
    assert!(!r.passed);
}

#[test]
fn gram_matrices() {
    let g = Grid::default().with_times(vec![0.0, -2.0]);
    let rule = QuadratureRule::default();
    let psis: Vec<FieldRef> = (0..=5).map(|n| psi_basis(n).unwrap()).collect();
    let chis: Vec<FieldRef> = {
        let model = FreeParticleModel::new(2, 5).unwrap();
        (0..=3).map(|n| model.chi(n)).collect()
    };
    for &t in g.t_samples() {
        let refs: Vec<&dyn Field> = psis.iter().map(|f| f.as_ref()).collect();
        let gm = gram_matrix(&refs, t, &g, &rule).unwrap();
        assert!(identity_deviation(&gm) <= 1e-7, "psi t={t}");
        for (j, row) in gm.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                assert_eq!(*v, gm[k][j].conj());
            }
        }
        let refs: Vec<&dyn Field> = chis.iter().map(|f| f.as_ref()).collect();
        assert!(identity_deviation(&gram_matrix(&refs, t, &g, &rule).unwrap()) <= 1e-6, "chi t={t}");
        let single = gram_matrix(&refs[..1], t, &g, &rule).unwrap();
        assert_eq!(single.len(), 1);
        assert!((single[0][0] - 1.0).norm() <= 1e-8);
    }
}

#[test]
fn finite_difference_oracle() {
    let g = small_grid();
    let r = fd_check("psi_3", psi_basis(3).unwrap().as_ref(), &g, FdOrders::ALL).unwrap();
    assert!(r.passed && r.observed_order.unwrap() > 1.9, "{r:?}");
    assert!(r.max_norm <= r.tolerance && r.tolerance > 1e-10);

    let c = ClosedFormField::new("1", |x, _| tdsusy::jet::Jet::constant(1.0, x.tower())).into_ref();
    let r = fd_check("1", c.as_ref(), &g, FdOrders::ALL).unwrap();
    assert!(r.passed && r.max_norm == 0.0);

    let r = fd_check("u_2", u_transform(2).unwrap().as_ref(), &g, FdOrders { x1: false, x2: false, t1: true }).unwrap();
    assert!(r.passed, "{r:?}");

    // a deliberately wrong derivative: value of sin x, derivative claimed zero
    let bad = ClosedFormField::new("bad", |x, _| {
        let v = x.value().re.sin();
        tdsusy::jet::Jet::constant(v, x.tower())
    })
    .into_ref();
    let r = fd_check("bad", bad.as_ref(), &g, FdOrders::ALL).unwrap();
    assert!(!r.passed, "{r:?}");
    assert!(r.max_norm > r.tolerance);
}

#[test]
fn nodelessness_screen() {
    let g = small_grid();
    let r = nodelessness(u_transform(2).unwrap().as_ref(), &g).unwrap();
    assert!(r.passed, "{r:?}");
    let r = nodelessness(psi_basis(1).unwrap().as_ref(), &g).unwrap();
    assert!(!r.passed && r.worst_point.0.abs() < 1e-6, "{r:?}");
    // a zero strictly between nodes
    let off = ClosedFormField::new("x-0.0123", |x, _| *x - 0.0123).into_ref();
    assert!(!nodelessness(off.as_ref(), &g).unwrap().passed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn field_difference_passes_exactly_below_tolerance(eps in 1e-9f64..1e-3, tol in 1e-9f64..1e-3) {
        let g = Grid::new(8.0, 257, vec![0.0, 1.0]).unwrap();
        let psi = psi_basis(1).unwrap();
        let scaled = ClosedFormField::new("scaled", {
            let psi = psi.clone();
            move |x, t| psi.eval(x.value().re, t.value().re, x.tower()).unwrap() * (1.0 + eps)
        }).into_ref();
        let r = field_difference("d", scaled.as_ref(), Some(psi.as_ref()), psi.as_ref(), &g, tol).unwrap();
        prop_assert_eq!(r.passed, r.max_norm <= tol);
        prop_assert!((r.max_norm - eps).abs() <= 1e-12);
    }
}
