//! Probabilists' Hermite polynomials of complex argument and the bilinear
//! combination `f_{ml}(z)` built from them.
//!
//! Everything here is generic over [`Ring`], so the same recurrences run on
//! plain complex numbers and on derivative towers ([`Jet`]).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Degrees above this are rejected by the model constructors.
pub const MAX_DEGREE: usize = 64;

/// Minimal commutative ring interface shared by `C64` and [`Jet`].
pub trait Ring: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn scale(self, c: C64) -> Self;
    /// The constant `c` with the same shape as `self`.
    fn constant_like(self, c: C64) -> Self;
}

impl Ring for C64 {
    fn scale(self, c: C64) -> Self {
        self * c
    }
    fn constant_like(self, c: C64) -> Self {
        c
    }
}

impl Ring for Jet {
    fn scale(self, c: C64) -> Self {
        Jet::scale(&self, c)
    }
    fn constant_like(self, c: C64) -> Self {
        Jet::constant(c, self.tower())
    }
}

/// `He_0 … He_n` at `w` by the upward three-term recurrence.
pub fn hermite_all<R: Ring>(n: usize, w: R) -> Vec<R> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(w.constant_like(C64::new(1.0, 0.0)));
    if n >= 1 {
        out.push(w);
    }
    for k in 1..n {
        let next = w * out[k] - out[k - 1].scale(C64::new(k as f64, 0.0));
        out.push(next);
    }
    out
}

/// `He_m(w)`.
pub fn hermite_eval<R: Ring>(m: usize, w: R) -> R {
    hermite_all(m, w)[m]
}

/// `He_m'(w) = m He_{m-1}(w)`.
pub fn hermite_derivative<R: Ring>(m: usize, w: R) -> R {
    if m == 0 {
        return w.constant_like(C64::new(0.0, 0.0));
    }
    hermite_eval(m - 1, w).scale(C64::new(m as f64, 0.0))
}

/// `f_{ml}(z)` and its first two `z`-derivatives.
#[derive(Clone, Copy, Debug)]
pub struct FmlValue<R> {
    pub m: usize,
    pub l: usize,
    pub value: R,
    pub d1: R,
    pub d2: R,
}

/// Checks `m` even and `l ∈ {m+1, m+3, …}` within the supported degree range.
pub fn validate_pair(m: usize, l: usize) -> Result<()> {
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must be even (odd m gives a transformation function vanishing at x = 0)"
        )));
    }
    if l <= m || (l - m) % 2 != 1 {
        return Err(Error::InvalidParameter(format!("l = {l} must be one of m+1, m+3, … (m = {m})")));
    }
    if l + 1 > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "degree l+1 = {} exceeds the supported maximum {MAX_DEGREE}",
            l + 1
        )));
    }
    Ok(())
}

/// `f_{ml}(z) = i[He_l(iz) He_{m+1}(iz) − He_m(iz) He_{l+1}(iz)]` with
/// `z`-derivatives from `d/dz He_k(iz) = i k He_{k−1}(iz)`.
pub fn f_ml<R: Ring>(m: usize, l: usize, z: R) -> Result<FmlValue<R>> {
    validate_pair(m, l)?;
    let i = C64::i();
    let he = hermite_all(l + 1, z.scale(i));
    let zero = z.constant_like(C64::new(0.0, 0.0));
    let h = |k: isize| if k < 0 { zero } else { he[k as usize] };
    // n-th z-derivative of He_k(iz) is i^n k(k-1)…(k-n+1) He_{k-n}(iz)
    let dh = |k: usize, n: usize| {
        let falling: f64 = (0..n).map(|j| (k as f64) - j as f64).product();
        h(k as isize - n as isize).scale(i.powi(n as i32) * falling)
    };
    let (m1, l1) = (m + 1, l + 1);
    let prod = |a: usize, b: usize, na: usize, nb: usize| dh(a, na) * dh(b, nb);
    let value = (prod(l, m1, 0, 0) - prod(m, l1, 0, 0)).scale(i);
    let d1 = (prod(l, m1, 1, 0) + prod(l, m1, 0, 1) - prod(m, l1, 1, 0) - prod(m, l1, 0, 1)).scale(i);
    let d2 = (prod(l, m1, 2, 0) + prod(l, m1, 1, 1).scale(C64::new(2.0, 0.0)) + prod(l, m1, 0, 2)
        - prod(m, l1, 2, 0)
        - prod(m, l1, 1, 1).scale(C64::new(2.0, 0.0))
        - prod(m, l1, 0, 2))
    .scale(i);
    Ok(FmlValue { m, l, value, d1, d2 })
}
