//! Truncated Taylor towers in `(x, t)`.
//!
//! A [`Jet`] holds the Taylor coefficients of a complex function of two real
//! variables around a point, up to order `x_order` in `x` and up to first
//! order in `t`. Arithmetic on jets is exact for every coefficient inside the
//! truncation rectangle, so derivatives obtained from a jet are analytic (up
//! to rounding), never finite differences.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

/// Highest `x` order a jet can carry.
pub const MAX_X_ORDER: usize = 10;

const LEN: usize = MAX_X_ORDER + 1;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Requested depth of a derivative tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tower {
    pub x: usize,
    /// Whether the first `t` derivative is carried.
    pub t: bool,
}

impl Tower {
    pub const VALUE: Tower = Tower { x: 0, t: false };

    pub fn new(x: usize, t: bool) -> Self {
        Self { x, t }
    }

    /// Tower deep enough for a Schrödinger residual: `f_xx` and `f_t`.
    pub fn schrodinger() -> Self {
        Self { x: 2, t: true }
    }

    pub fn deeper(self, by: usize) -> Self {
        Self { x: self.x + by, t: self.t }
    }

    pub fn min(self, other: Tower) -> Self {
        Self { x: self.x.min(other.x), t: self.t && other.t }
    }
}

/// Bivariate truncated Taylor series with complex coefficients.
///
/// `v[i]` is the coefficient of `dx^i`, `d[i]` the coefficient of `dx^i dt`.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    v: [C64; LEN],
    d: [C64; LEN],
    tower: Tower,
}

impl Jet {
    pub fn constant(c: impl Into<C64>, tower: Tower) -> Self {
        let mut j = Self::zero(tower);
        j.v[0] = c.into();
        j
    }

    pub fn zero(tower: Tower) -> Self {
        debug_assert!(tower.x <= MAX_X_ORDER);
        Self { v: [ZERO; LEN], d: [ZERO; LEN], tower }
    }

    /// The coordinate `x` seeded at `x0`.
    pub fn var_x(x0: f64, tower: Tower) -> Self {
        let mut j = Self::constant(x0, tower);
        if tower.x >= 1 {
            j.v[1] = C64::new(1.0, 0.0);
        }
        j
    }

    /// The coordinate `t` seeded at `t0`.
    pub fn var_t(t0: f64, tower: Tower) -> Self {
        let mut j = Self::constant(t0, tower);
        if tower.t {
            j.d[0] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn tower(&self) -> Tower {
        self.tower
    }

    pub fn value(&self) -> C64 {
        self.v[0]
    }

    /// `∂x^k f` at the expansion point. `None` if the tower is too shallow.
    pub fn dx_n(&self, k: usize) -> Option<C64> {
        (k <= self.tower.x).then(|| self.v[k] * factorial(k))
    }

    /// `∂t f` at the expansion point.
    pub fn dt(&self) -> Option<C64> {
        self.tower.t.then_some(self.d[0])
    }

    /// Partial derivative in `x`; the result carries one `x` order less.
    ///
    /// Panics when the tower has no `x` order left. Callers size their
    /// requests so this never happens for valid input.
    pub fn dx(&self) -> Jet {
        assert!(self.tower.x >= 1, "x-derivative of an order-0 jet");
        let ox = self.tower.x - 1;
        let mut r = Self::zero(Tower { x: ox, t: self.tower.t });
        for i in 0..=ox {
            let k = (i + 1) as f64;
            r.v[i] = self.v[i + 1] * k;
            r.d[i] = self.d[i + 1] * k;
        }
        r
    }

    /// Drops coefficients beyond `tower`.
    pub fn truncate(&self, tower: Tower) -> Jet {
        let tower = self.tower.min(tower);
        let mut r = Self::zero(tower);
        r.v[..=tower.x].copy_from_slice(&self.v[..=tower.x]);
        if tower.t {
            r.d[..=tower.x].copy_from_slice(&self.d[..=tower.x]);
        }
        r
    }

    pub fn conj(&self) -> Jet {
        let mut r = *self;
        for i in 0..=self.tower.x {
            r.v[i] = r.v[i].conj();
            r.d[i] = r.d[i].conj();
        }
        r
    }

    /// Real part of the underlying function (imaginary coefficients dropped).
    pub fn re(&self) -> Jet {
        let mut r = *self;
        for i in 0..=self.tower.x {
            r.v[i] = C64::new(r.v[i].re, 0.0);
            r.d[i] = C64::new(r.d[i].re, 0.0);
        }
        r
    }

    /// Imaginary part of the underlying function, as a real-valued jet.
    pub fn im(&self) -> Jet {
        let mut r = *self;
        for i in 0..=self.tower.x {
            r.v[i] = C64::new(r.v[i].im, 0.0);
            r.d[i] = C64::new(r.d[i].im, 0.0);
        }
        r
    }

    pub fn scale(&self, c: impl Into<C64>) -> Jet {
        let c = c.into();
        let mut r = *self;
        for i in 0..=self.tower.x {
            r.v[i] *= c;
            r.d[i] *= c;
        }
        r
    }

    /// Largest coefficient modulus; zero iff the jet is identically zero.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..=self.tower.x {
            m = m.max(self.v[i].norm());
            if self.tower.t {
                m = m.max(self.d[i].norm());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        (0..=self.tower.x).all(|i| self.v[i].is_finite() && self.d[i].is_finite())
    }

    /// `f(self)` from the series `b = f(v)` and `b' = f'(v)` in `x`; the
    /// `t` part follows from `f(v + ε d) = f(v) + ε f'(v) d`.
    fn lift(&self, series: impl FnOnce(&[C64], usize) -> ([C64; LEN], [C64; LEN])) -> Jet {
        let n = self.tower.x;
        let (b, bp) = series(&self.v, n);
        let mut r = Jet::zero(self.tower);
        r.v[..=n].copy_from_slice(&b[..=n]);
        if self.tower.t {
            r.d = series_mul(&bp, &self.d, n);
        }
        r
    }

    pub fn exp(&self) -> Jet {
        self.lift(|a, n| {
            let b = series_exp(a, n);
            (b, b)
        })
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Jet {
        self.lift(|a, n| {
            let inv = series_recip(a, n);
            let mut b = series_integral(&series_mul(&series_deriv(a, n), &inv, n), n);
            b[0] = a[0].ln();
            (b, inv)
        })
    }

    pub fn recip(&self) -> Jet {
        self.lift(|a, n| {
            let b = series_recip(a, n);
            let bp = series_mul(&b, &b, n).map(|c| -c);
            (b, bp)
        })
    }

    /// Principal branch of `g^a` for real `a`.
    pub fn powf(&self, p: f64) -> Jet {
        self.lift(|a, n| {
            let b = series_pow(a, p, n);
            let bp = series_mul(&b, &series_recip(a, n), n).map(|c| c * p);
            (b, bp)
        })
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn atan(&self) -> Jet {
        self.lift(|a, n| {
            let mut one_plus = series_mul(a, a, n);
            one_plus[0] += 1.0;
            let q = series_recip(&one_plus, n);
            let mut b = series_integral(&series_mul(&series_deriv(a, n), &q, n), n);
            let g0 = a[0];
            b[0] = if g0.im == 0.0 { C64::new(g0.re.atan(), 0.0) } else { g0.atan() };
            (b, q)
        })
    }
}

fn series_mul(a: &[C64], b: &[C64], n: usize) -> [C64; LEN] {
    let mut r = [ZERO; LEN];
    for i in 0..=n {
        let mut acc = ZERO;
        for k in 0..=i {
            acc += a[k] * b[i - k];
        }
        r[i] = acc;
    }
    r
}

/// Coefficients of `a'` (one order lower, padded with zero).
fn series_deriv(a: &[C64], n: usize) -> [C64; LEN] {
    let mut r = [ZERO; LEN];
    for k in 0..n {
        r[k] = a[k + 1] * (k + 1) as f64;
    }
    r
}

/// Antiderivative with zero constant term.
fn series_integral(a: &[C64], n: usize) -> [C64; LEN] {
    let mut r = [ZERO; LEN];
    for k in 1..=n {
        r[k] = a[k - 1] / k as f64;
    }
    r
}

fn series_exp(a: &[C64], n: usize) -> [C64; LEN] {
    let mut b = [ZERO; LEN];
    b[0] = a[0].exp();
    for k in 1..=n {
        let mut acc = ZERO;
        for j in 1..=k {
            acc += a[j] * b[k - j] * j as f64;
        }
        b[k] = acc / k as f64;
    }
    b
}

fn series_recip(a: &[C64], n: usize) -> [C64; LEN] {
    let mut b = [ZERO; LEN];
    let inv = a[0].inv();
    b[0] = inv;
    for k in 1..=n {
        let mut acc = ZERO;
        for j in 1..=k {
            acc += a[j] * b[k - j];
        }
        b[k] = -acc * inv;
    }
    b
}

fn series_pow(a: &[C64], p: f64, n: usize) -> [C64; LEN] {
    let mut b = [ZERO; LEN];
    b[0] = a[0].powf(p);
    let inv = a[0].inv();
    for k in 1..=n {
        let mut acc = ZERO;
        for j in 1..=k {
            acc += a[j] * b[k - j] * (p * j as f64 - (k - j) as f64);
        }
        b[k] = acc * inv / k as f64;
    }
    b
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let tower = self.tower.min(rhs.tower);
        let mut r = Jet::zero(tower);
        for i in 0..=tower.x {
            r.v[i] = self.v[i] + rhs.v[i];
            if tower.t {
                r.d[i] = self.d[i] + rhs.d[i];
            }
        }
        r
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let tower = self.tower.min(rhs.tower);
        let mut r = Jet::zero(tower);
        for i in 0..=tower.x {
            let mut v = ZERO;
            let mut d = ZERO;
            for k in 0..=i {
                let (a, b) = (self.v[k], rhs.v[i - k]);
                v += a * b;
                if tower.t {
                    d += a * rhs.d[i - k] + self.d[k] * b;
                }
            }
            r.v[i] = v;
            r.d[i] = d;
        }
        r
    }
}

impl Add<C64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: C64) -> Jet {
        self.v[0] += rhs;
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self + C64::new(rhs, 0.0)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + C64::new(-rhs, 0.0)
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: C64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl std::ops::Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}
