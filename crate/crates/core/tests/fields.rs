mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{max_rel_diff, ratio_spread, small_grid};
use tdsusy::chain::free_particle_chain;
use tdsusy::darboux::{check_reality, PotentialDifference};
use tdsusy::fields::{
    apply_symmetry, growing_solution, potential_v1, potential_v2, psi_basis, u_transform, ClosedFormField, Field,
    FieldRef, FreeParticleModel, Potential, SymmetryOp,
};
use tdsusy::numerics::{
    fd_check, gram_matrix, identity_deviation, inner_product, schrodinger_residual, FdOrders, QuadratureRule,
};
use tdsusy::ops::Applied;
use tdsusy::specfun::hermite_eval;
use tdsusy::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[test]
fn psi_0_at_origin() {
    let v = (psi_basis(0).unwrap().as_ref() as &dyn Field).value(0.0, 0.0).unwrap();
    assert!((v - C64::new((2.0 * PI).powf(-0.25), 0.0)).norm() < 1e-15);
}

#[test]
fn psi_n_are_normalized() {
    let grid = small_grid();
    for n in 0..6 {
        let psi = psi_basis(n).unwrap();
        for t in [0.0, 1.5] {
            let ip = inner_product(psi.as_ref(), psi.as_ref(), t, &grid, &QuadratureRule::default()).unwrap();
            assert!((ip - 1.0).norm() <= 1e-8, "psi_{n} at t={t}: {ip}");
        }
    }
}

#[test]
fn psi_n_solve_the_free_equation() {
    let grid = small_grid();
    for n in 0..10 {
        let psi = psi_basis(n).unwrap();
        let r = schrodinger_residual("psi", psi.as_ref(), None, &grid, 1e-9).unwrap();
        assert!(r.passed, "psi_{n}: {}", r.max_norm);
    }
}

#[test]
fn u_0_at_t_zero_is_a_growing_gaussian() {
    let u = u_transform(0).unwrap();
    for x in [-3.0, -0.5, 0.0, 1.2, 4.0] {
        let v = (u.as_ref() as &dyn Field).value(x, 0.0).unwrap();
        let want = (x * x / 4.0f64).exp();
        assert!((v - want).norm() <= 1e-13 * want, "x={x}");
    }
}

#[test]
fn odd_m_is_rejected() {
    assert!(u_transform(1).is_err());
    assert!(u_transform(3).is_err());
    assert!(potential_v1(1).is_err());
    assert!(FreeParticleModel::new(1, 2).is_err());
}

#[test]
fn u_m_are_eigenfunctions_of_g0() {
    let grid = small_grid();
    let g0 = SymmetryOp::free_particle();
    for m in [0, 2, 4] {
        let u = u_transform(m).unwrap();
        let want = I * (m as f64 + 0.5);
        let d = max_rel_diff(
            &grid,
            |x, t| apply_symmetry(&g0, u.as_ref(), x, t),
            |x, t| Ok(want * (u.as_ref() as &dyn Field).value(x, t)?),
        );
        assert!(d <= 1e-9, "u_{m}: {d}");
    }
}

#[test]
fn u_m_satisfy_the_reality_condition() {
    let grid = small_grid();
    for m in [0, 2, 4] {
        let r = check_reality(u_transform(m).unwrap().as_ref(), &grid, 1e-10).unwrap();
        assert!(r.passed, "u_{m}: {}", r.max_spread);
    }
}

#[test]
fn symmetry_eigenvalues() {
    let grid = small_grid();
    let model = FreeParticleModel::new(2, 3).unwrap();
    let eigen = |level: usize, f: FieldRef, mu: C64| {
        let g = model.symmetry(level);
        max_rel_diff(
            &grid,
            |x, t| apply_symmetry(&g, f.as_ref(), x, t),
            |x, t| Ok(mu * (f.as_ref() as &dyn Field).value(x, t)?),
        )
    };
    assert!(eigen(0, model.psi(0), -I * 0.5) <= 1e-9);
    assert!(eigen(1, model.phi(0), I * 2.5) <= 1e-9);
    for n in 0..4 {
        assert!(eigen(2, model.chi(n + 2), -I * (n as f64 + 0.5)) <= 1e-9, "chi_{}", n + 2);
    }
}

fn potential_at(v: &dyn Potential, x: f64, t: f64) -> f64 {
    v.value(x, t).unwrap()
}

#[test]
fn v1_examples() {
    let v = potential_v1(0).unwrap();
    for (x, t) in [(0.0, 0.0), (1.7, 0.5), (-3.0, -2.0)] {
        assert!((potential_at(&v, x, t) + 1.0 / (1.0 + t * t)).abs() < 1e-14);
    }
    assert!((potential_at(&potential_v1(2).unwrap(), 0.0, 0.0) + 5.0).abs() < 1e-13);
}

#[test]
fn v1_is_minus_dxx_log_u_squared() {
    let grid = small_grid();
    for m in [0, 2, 4] {
        let v = potential_v1(m).unwrap();
        let a = PotentialDifference::new(u_transform(m).unwrap());
        let d =
            max_rel_diff(&grid, |x, t| Ok(C64::from(a_value(&a, x, t))), |x, t| Ok(C64::from(potential_at(&v, x, t))));
        assert!(d <= 1e-8, "m={m}: {d}");
    }
}

fn a_value(a: &dyn Potential, x: f64, t: f64) -> f64 {
    a.value(x, t).unwrap()
}

#[test]
fn v2_examples() {
    let v = potential_v2(0, 1).unwrap();
    for (x, t) in [(0.0, 0.0), (2.5, 0.5), (-1.0, 2.0)] {
        assert!((potential_at(&v, x, t) + 2.0 / (1.0 + t * t)).abs() < 1e-14);
    }
    // f = −3i(z²+1): f''/f = 2 and f'/f = 0 at z = 0, so V2 = −2(1 + 2)
    assert!((potential_at(&potential_v2(0, 3).unwrap(), 0.0, 0.0) + 6.0).abs() < 1e-13);
}

#[test]
fn v2_minus_v1_is_minus_dxx_log_v_squared() {
    let grid = small_grid();
    for (m, l) in [(0, 1), (0, 3), (2, 3), (2, 5)] {
        let model = FreeParticleModel::new(m, l).unwrap();
        let (v1, v2) = (model.v1(), model.v2());
        let a = PotentialDifference::new(model.v_l());
        let d = max_rel_diff(
            &grid,
            |x, t| Ok(C64::from(a_value(&a, x, t))),
            |x, t| Ok(C64::from(potential_at(v2.as_ref(), x, t) - potential_at(v1.as_ref(), x, t))),
        );
        assert!(d <= 1e-8, "({m},{l}): {d}");
    }
}

fn gram_deviation(basis: &[FieldRef], t: f64) -> f64 {
    let refs: Vec<&dyn Field> = basis.iter().map(|f| f.as_ref()).collect();
    identity_deviation(&gram_matrix(&refs, t, &small_grid(), &QuadratureRule::default()).unwrap())
}

#[test]
fn phi_basis_is_orthonormal() {
    for m in [0, 2] {
        let model = FreeParticleModel::new(m, m + 1).unwrap();
        let basis: Vec<FieldRef> = (0..=6).map(|k| model.phi(k)).collect();
        for t in [0.0, 2.0] {
            let d = gram_deviation(&basis, t);
            assert!(d <= 1e-7, "m={m}, t={t}: {d}");
        }
    }
}

#[test]
fn chi_basis_is_orthonormal() {
    for (m, l) in [(0, 1), (0, 3), (2, 3)] {
        let model = FreeParticleModel::new(m, l).unwrap();
        let basis: Vec<FieldRef> = (0..=6).map(|k| model.chi(k)).collect();
        for t in [0.0, 2.0] {
            let d = gram_deviation(&basis, t);
            assert!(d <= 1e-7, "({m},{l}), t={t}: {d}");
        }
    }
}

#[test]
fn phi_follows_from_l01_up_to_a_unit_phase() {
    let grid = small_grid();
    for m in [0, 2] {
        let mut chain = free_particle_chain(m, m + 1).unwrap();
        chain.certify_complete_reducibility(&grid).unwrap();
        let l01 = Arc::new(chain.operator(0, 1).unwrap());
        let model = FreeParticleModel::new(m, m + 1).unwrap();
        for n in 0..5 {
            let lpsi = Applied::new(l01.clone(), model.psi(n));
            let (c, spread) = ratio_spread(&grid, lpsi.as_ref(), model.phi(n + 1).as_ref());
            assert!(spread <= 1e-8, "m={m}, n={n}: spread {spread}");
            let want = ((n + m + 1) as f64).sqrt();
            assert!((c.norm() - want).abs() <= 1e-8 * want, "m={m}, n={n}: |c| = {}", c.norm());
        }
    }
}

#[test]
fn level_states_solve_their_equations() {
    let grid = small_grid();
    for (m, l) in [(0, 1), (2, 5)] {
        let model = FreeParticleModel::new(m, l).unwrap();
        for k in 0..5 {
            for (level, f) in [(1, model.phi(k)), (2, model.chi(k))] {
                let v = model.potential(level);
                let r = schrodinger_residual("", f.as_ref(), Some(v.as_ref()), &grid, 1e-8).unwrap();
                assert!(r.passed, "({m},{l}) {}: {}", f.label(), r.max_norm);
            }
        }
        let v1 = model.v1();
        let r = schrodinger_residual("", model.v_l().as_ref(), Some(v1.as_ref()), &grid, 1e-8).unwrap();
        assert!(r.passed, "v_{l}: {}", r.max_norm);
    }
}

#[test]
fn inverse_v_l_is_square_integrable() {
    let grid = small_grid();
    for (m, l) in [(0, 1), (2, 3)] {
        let v = FreeParticleModel::new(m, l).unwrap().v_l();
        let inv: FieldRef = ClosedFormField::new("1/|v|", {
            let v = v.clone();
            move |x, t| {
                let j = v.eval(x.value().re, t.value().re, x.tower()).unwrap();
                (j * j.conj()).sqrt().recip()
            }
        })
        .into_ref();
        for t in [0.0, 2.0] {
            let n = inner_product(inv.as_ref(), inv.as_ref(), t, &grid, &QuadratureRule::default()).unwrap();
            assert!(n.re.is_finite() && n.re > 0.0, "({m},{l}) t={t}: {n}");
        }
    }
}

#[test]
fn v_l_is_l01_applied_to_the_growing_solution() {
    let grid = small_grid();
    for (m, l) in [(0, 1), (0, 3), (2, 3)] {
        let mut chain = free_particle_chain(m, l).unwrap();
        chain.certify_complete_reducibility(&grid).unwrap();
        let direct = Applied::new(Arc::new(chain.operator(0, 1).unwrap()), growing_solution(l).unwrap());
        let v = FreeParticleModel::new(m, l).unwrap().v_l();
        let d = max_rel_diff(&grid, |x, t| direct.value(x, t), |x, t| v.value(x, t));
        assert!(d <= 1e-8, "({m},{l}): {d}");
    }
}

#[test]
fn chi_0_is_inverse_of_l1_v_conjugate() {
    let grid = small_grid();
    for (m, l) in [(0, 1), (2, 5)] {
        let model = FreeParticleModel::new(m, l).unwrap();
        let v = model.v_l();
        let inv: FieldRef = ClosedFormField::new("1/(L1 v*)", move |x, t| {
            let vj = v.eval(x.value().re, t.value().re, x.tower()).unwrap();
            (vj.conj() * (*t * *t + 1.0).sqrt()).recip()
        })
        .into_ref();
        let (_, spread) = ratio_spread(&grid, model.chi(0).as_ref(), inv.as_ref());
        assert!(spread <= 1e-8, "({m},{l}): {spread}");
    }
}

#[test]
fn analytic_derivatives_match_finite_differences() {
    let grid = small_grid();
    let model = FreeParticleModel::new(2, 3).unwrap();
    for f in [model.psi(3), model.u_m(), model.phi(2), model.chi(1), model.chi(3), model.v_l()] {
        let r = fd_check(f.label(), f.as_ref(), &grid, FdOrders::ALL).unwrap();
        assert!(r.passed, "{}: order {:?}, error {}", f.label(), r.observed_order, r.max_norm);
    }
}

#[test]
fn closed_form_l01_matches_generic_operator() {
    // L01 = √(1+t²)∂x − (x/2)e^{i arctan t} − i m He_{m−1}(iz)/He_m(iz)
    let grid = small_grid();
    for m in [0, 2, 4] {
        let mut chain = free_particle_chain(m, m + 1).unwrap();
        chain.certify_complete_reducibility(&grid).unwrap();
        let l01 = Arc::new(chain.operator(0, 1).unwrap());
        let f = psi_basis(3).unwrap();
        let generic = Applied::new(l01, f.clone());
        let closed = |x: f64, t: f64| -> tdsusy::Result<C64> {
            let s = (1.0 + t * t).sqrt();
            let iz = I * (x / s);
            let mut w = C64::new(x / 2.0, 0.0) * C64::from_polar(1.0, t.atan());
            if m > 0 {
                w += I * m as f64 * hermite_eval(m - 1, iz) / hermite_eval(m, iz);
            }
            let d = f.derivs(x, t)?;
            Ok(d.dx * s - w * d.value)
        };
        let d = max_rel_diff(&grid, |x, t| generic.value(x, t), closed);
        assert!(d <= 1e-9, "m={m}: {d}");
    }
}
