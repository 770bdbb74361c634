//! Closed forms of the two-step free-particle model: the `g^(0)` eigenbasis
//! `ψ_n`, the growing solutions used as transformation functions, the
//! transformed bases `φ_k`, `χ_k`, and the potentials `V1`, `V2`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{ClosedFormField, FieldRef, PotentialField, PotentialRef, ShiftTerm, SymmetryOp};
use crate::darboux::TimeFactor;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::specfun::{f_ml, hermite_all, validate_pair, MAX_DEGREE};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Recurring `t`-dependent pieces of every closed form.
struct Frame {
    /// `1 + t²`
    s: Jet,
    /// `x/√(1+t²)`
    z: Jet,
    atan: Jet,
    one_plus_it: Jet,
    one_minus_it: Jet,
}

impl Frame {
    fn new(x: &Jet, t: &Jet) -> Self {
        let s = *t * *t + 1.0;
        let z = *x * s.powf(-0.5);
        Self { s, z, atan: t.atan(), one_plus_it: t.scale(I) + 1.0, one_minus_it: t.scale(-I) + 1.0 }
    }

    /// `exp[i x² t/(4+4t²)]`
    fn lens_phase(&self, x: &Jet, t: &Jet) -> Jet {
        (*x * *x * *t * self.s.recip()).scale(I * 0.25)
    }
}

fn check_degree(n: usize, what: &str) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!("{what} = {n} exceeds {MAX_DEGREE}")));
    }
    Ok(())
}

fn check_even(m: usize) -> Result<()> {
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must be even (odd m gives a transformation function vanishing at x = 0)"
        )));
    }
    check_degree(m + 1, "m+1")
}

fn psi_expr(n: usize, x: &Jet, t: &Jet) -> Jet {
    let fr = Frame::new(x, t);
    let norm = (2.0 * PI).powf(-0.25) / factorial(n).sqrt();
    let lambda = -(n as f64) - 0.5;
    let expo = fr.lens_phase(x, t) + fr.atan.scale(I * lambda) - (fr.z * fr.z).scale(0.25);
    fr.s.powf(-0.25) * expo.exp() * hermite_all(n, fr.z)[n].scale(C64::new(norm, 0.0))
}

fn growing_expr(k: usize, x: &Jet, t: &Jet) -> Jet {
    let fr = Frame::new(x, t);
    let lambda = k as f64 + 0.5;
    let expo = fr.lens_phase(x, t) + fr.atan.scale(I * lambda) + (fr.z * fr.z).scale(0.25);
    fr.s.powf(-0.25) * expo.exp() * hermite_all(k, fr.z.scale(I))[k]
}

/// Normalized `ψ_n`, eigenfunction of `g^(0)` with `λ_n = −n − 1/2`.
pub fn psi_basis(n: usize) -> Result<FieldRef> {
    check_degree(n, "n")?;
    Ok(ClosedFormField::new(format!("psi_{n}"), move |x, t| psi_expr(n, x, t)).into_ref())
}

/// `ψ_λ` at `λ = k + 1/2`: the growing solution `e^{z²/4} He_k(iz)` dressed by
/// the lens phase. Nodeless only for even `k`.
pub fn growing_solution(k: usize) -> Result<FieldRef> {
    check_degree(k + 1, "k+1")?;
    Ok(ClosedFormField::new(format!("u_{k}"), move |x, t| growing_expr(k, x, t)).into_ref())
}

/// Transformation function `u_m` (even `m`).
pub fn u_transform(m: usize) -> Result<FieldRef> {
    check_even(m)?;
    growing_solution(m)
}

/// `V1 = (1+t²)⁻¹[2m(m−1)He_{m−2}/He_m − 2m² He²_{m−1}/He²_m − 1]` at `iz`.
pub fn potential_v1(m: usize) -> Result<PotentialField> {
    check_even(m)?;
    Ok(PotentialField::new(format!("V1(m={m})"), 1, (m, None), move |x, t| {
        let fr = Frame::new(x, t);
        let he = hermite_all(m, fr.z.scale(I));
        let inv = he[m].recip();
        let mut bracket = Jet::constant(-1.0, x.tower());
        if m >= 2 {
            let mf = m as f64;
            bracket += he[m - 2] * inv * (2.0 * mf * (mf - 1.0));
            let r = he[m - 1] * inv;
            bracket = bracket - r * r * (2.0 * mf * mf);
        }
        bracket * fr.s.recip()
    }))
}

/// `V2 = −2(1+t²)⁻¹[1 + f''/f − (f'/f)²]` with `f = f_{ml}(z)`.
pub fn potential_v2(m: usize, l: usize) -> Result<PotentialField> {
    validate_pair(m, l)?;
    Ok(PotentialField::new(format!("V2(m={m},l={l})"), 2, (m, Some(l)), move |x, t| {
        let fr = Frame::new(x, t);
        let f = f_ml(m, l, fr.z).expect("validated");
        let inv = f.value.recip();
        let r1 = f.d1 * inv;
        let bracket = f.d2 * inv - r1 * r1 + 1.0;
        bracket * fr.s.recip() * -2.0
    }))
}

/// `φ_0` (index 0) or `φ_{n+1}` (index `n+1`), the orthonormal `g^(1)` basis.
pub fn phi_state(index: usize, m: usize) -> Result<FieldRef> {
    check_even(m)?;
    check_degree(index, "index")?;
    if index == 0 {
        let c = factorial(m).sqrt() * (2.0 * PI).powf(-0.25);
        return Ok(ClosedFormField::new("phi_0", move |x, t| {
            let s = *t * *t + 1.0;
            (s.sqrt() * growing_expr(m, x, t).conj()).recip() * c
        })
        .into_ref());
    }
    let n = index - 1;
    let c = (factorial(n) * (n + m + 1) as f64 * (2.0 * PI).sqrt()).powf(-0.5);
    Ok(ClosedFormField::new(format!("phi_{index}"), move |x, t| {
        let fr = Frame::new(x, t);
        let he = hermite_all(n + 1, fr.z);
        let mut poly = he[n + 1];
        if m >= 2 {
            let hi = hermite_all(m, fr.z.scale(I));
            poly += he[n] * hi[m - 1] * hi[m].recip() * (I * m as f64);
        }
        let expo = (*x * *x * fr.one_plus_it.recip()).scale(-0.25) + fr.atan.scale(-I * n as f64);
        fr.one_plus_it.powf(-0.5) * expo.exp() * poly * c
    })
    .into_ref())
}

/// Second transformation function `v_l = L_{0,1} ψ_{λ_l}` in closed form.
pub fn v_partner(m: usize, l: usize) -> Result<FieldRef> {
    validate_pair(m, l)?;
    Ok(ClosedFormField::new(format!("v_{l}"), move |x, t| {
        let fr = Frame::new(x, t);
        let f = f_ml(m, l, fr.z).expect("validated");
        let he_m = hermite_all(m, fr.z.scale(I))[m];
        let expo = (*x * *x * fr.one_minus_it.recip()).scale(0.25) + fr.atan.scale(I * l as f64);
        fr.one_minus_it.powf(-0.5) * expo.exp() * f.value * he_m.recip()
    })
    .into_ref())
}

/// `W(u_m, u_l) = ((1−it)√(1+t²))⁻¹ f_{ml}(z) exp[x²/(2−2it) + i(m+l) arctan t]`.
pub fn wronskian_um_ul(m: usize, l: usize) -> Result<FieldRef> {
    validate_pair(m, l)?;
    Ok(ClosedFormField::new(format!("W(u_{m},u_{l})"), move |x, t| wum_ul_expr(m, l, x, t)).into_ref())
}

fn wum_ul_expr(m: usize, l: usize, x: &Jet, t: &Jet) -> Jet {
    let fr = Frame::new(x, t);
    let f = f_ml(m, l, fr.z).expect("validated");
    let expo = (*x * *x * fr.one_minus_it.recip()).scale(0.5) + fr.atan.scale(I * (m + l) as f64);
    (fr.one_minus_it * fr.s.sqrt()).recip() * f.value * expo.exp()
}

/// `W(ψ_n, u_l) = ψ_n ∂x u_l − u_l ∂x ψ_n` in closed form.
pub fn wronskian_psi_ul(n: usize, l: usize) -> Result<FieldRef> {
    check_degree(l + 1, "l+1")?;
    check_degree(n, "n")?;
    Ok(ClosedFormField::new(format!("W(psi_{n},u_{l})"), move |x, t| wpsi_ul_expr(n, l, x, t)).into_ref())
}

fn wpsi_ul_expr(n: usize, l: usize, x: &Jet, t: &Jet) -> Jet {
    let fr = Frame::new(x, t);
    let c = (factorial(n) * (2.0 * PI).sqrt()).powf(-0.5);
    let he = hermite_all(n, fr.z);
    let hi = hermite_all(l + 1, fr.z.scale(I));
    let mut poly = he[n] * hi[l + 1] * I;
    if n >= 1 {
        poly += he[n - 1] * hi[l] * n as f64;
    }
    let expo = (*x * *x * *t * fr.s.recip()).scale(I * 0.5) + fr.atan.scale(I * (l as f64 - n as f64));
    fr.s.recip() * expo.exp() * poly * -c
}

/// `χ_0`, `χ_1`, or `χ_{n+2}` (index `n+2`), the orthonormal `g^(2)` basis.
pub fn chi_state(index: usize, m: usize, l: usize) -> Result<FieldRef> {
    validate_pair(m, l)?;
    check_degree(index, "index")?;
    let (mf, lf) = (m as f64, l as f64);
    match index {
        0 | 1 => {
            let (deg, top) = if index == 0 { (m, l) } else { (l, m) };
            let c = ((2.0 * PI).powf(-0.5) * factorial(top) * (lf - mf)).sqrt();
            Ok(ClosedFormField::new(format!("chi_{index}"), move |x, t| {
                let fr = Frame::new(x, t);
                let f = f_ml(m, l, fr.z).expect("validated");
                let he = hermite_all(deg, fr.z.scale(I))[deg];
                let expo = (*x * *x * fr.one_plus_it.recip()).scale(-0.25) + fr.atan.scale(I * top as f64);
                fr.one_minus_it.powf(-0.5) * expo.exp() * he * f.value.recip() * c
            })
            .into_ref())
        }
        _ => {
            let n = index - 2;
            let nf = n as f64;
            let c = ((nf + lf + 1.0) * (nf + mf + 1.0)).powf(-0.5);
            Ok(ClosedFormField::new(format!("chi_{index}"), move |x, t| {
                let psi = psi_expr(n, x, t);
                let ratio = wpsi_ul_expr(n, l, x, t) * wum_ul_expr(m, l, x, t).recip();
                (psi * -(lf + nf + 1.0) + growing_expr(m, x, t) * ratio * (lf - mf)) * c
            })
            .into_ref())
        }
    }
}

/// The two-step free-particle model for a fixed admissible `(m, l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeParticleModel {
    pub m: usize,
    pub l: usize,
}

impl FreeParticleModel {
    pub fn new(m: usize, l: usize) -> Result<Self> {
        validate_pair(m, l)?;
        Ok(Self { m, l })
    }

    /// `α_1 = −(m+1/2)`, `α_2 = −(l+1/2)`: eigenvalues of `ig^(0)` on `u_m`, `u_l`.
    pub fn alphas(&self) -> [f64; 2] {
        [-(self.m as f64) - 0.5, -(self.l as f64) - 0.5]
    }

    pub fn psi(&self, n: usize) -> FieldRef {
        psi_basis(n).expect("degree checked by caller")
    }

    pub fn u_m(&self) -> FieldRef {
        growing_solution(self.m).expect("validated")
    }

    pub fn u_l(&self) -> FieldRef {
        growing_solution(self.l).expect("validated")
    }

    pub fn phi(&self, k: usize) -> FieldRef {
        phi_state(k, self.m).expect("validated")
    }

    pub fn v_l(&self) -> FieldRef {
        v_partner(self.m, self.l).expect("validated")
    }

    pub fn chi(&self, k: usize) -> FieldRef {
        chi_state(k, self.m, self.l).expect("validated")
    }

    pub fn v1(&self) -> PotentialRef {
        Arc::new(potential_v1(self.m).expect("validated"))
    }

    pub fn v2(&self) -> PotentialRef {
        Arc::new(potential_v2(self.m, self.l).expect("validated"))
    }

    /// `V_p` for `p ∈ {0, 1, 2}`.
    pub fn potential(&self, level: usize) -> PotentialRef {
        match level {
            0 => Arc::new(super::ZeroPotential),
            1 => self.v1(),
            _ => self.v2(),
        }
    }

    /// `L_1(t) = √(1+t²)`, shared by both steps.
    pub fn time_factor(&self) -> TimeFactor {
        TimeFactor::closed("sqrt(1+t^2)", |t| (*t * *t + 1.0).sqrt())
    }

    /// `g^(p) = g^(0) − i(1+t²)V_p`.
    pub fn symmetry(&self, level: usize) -> SymmetryOp {
        if level == 0 {
            return SymmetryOp::free_particle();
        }
        let shift = ShiftTerm { time_factor: self.time_factor(), potential: self.potential(level) };
        SymmetryOp::with_shifts(level, vec![shift])
    }
}
