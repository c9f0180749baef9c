//! Binary quadratic forms `a x^2 + b x y + c y^2`, their reduction and Gauss
//! composition.
//!
//! A form `(a, b, c)` of discriminant `D` stands for the lattice
//! `[|a|, (-b + √D)/2]`, an ideal of the maximal order when `D` is
//! fundamental. Reduction and composition can report, through a
//! [`Tracker`], the exact element relating the input ideal to the output one.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{isqrt, sqrt_mod_prime};
use crate::linalg::ext_gcd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// Receives the multipliers produced while a form is transformed, so that
/// `ideal(input) = beta * ideal(output)` for the accumulated `beta`.
pub trait Tracker {
    /// Multiply by the rational integer `k`.
    fn mul_int(&mut self, k: i128);
    /// Multiply by `((-b + √D)/2) / c`.
    fn mul_tau_over(&mut self, b: i128, c: i128);
}

/// Tracker that records nothing.
pub struct NoTrack;

impl Tracker for NoTrack {
    #[inline]
    fn mul_int(&mut self, _k: i128) {}
    #[inline]
    fn mul_tau_over(&mut self, _b: i128, _c: i128) {}
}

impl QuadForm {
    pub fn new(a: i128, b: i128, c: i128) -> Self {
        QuadForm { a, b, c }
    }

    /// The form `(a, b, (b^2 - D)/(4a))`; `None` unless `4a | b^2 - D`.
    pub fn from_ab(a: i128, b: i128, d: i128) -> Option<Self> {
        let n = b * b - d;
        (a != 0 && n % (4 * a) == 0).then(|| QuadForm { a, b, c: n / (4 * a) })
    }

    pub fn discriminant(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The principal form of discriminant `d`.
    pub fn principal(d: i128) -> Self {
        let b = d.rem_euclid(2);
        QuadForm { a: 1, b, c: (b * b - d) / 4 }
    }

    pub fn inverse(&self) -> Self {
        QuadForm { a: self.a, b: -self.b, c: self.c }
    }

    pub fn is_primitive(&self) -> bool {
        num_integer::gcd(num_integer::gcd(self.a, self.b), self.c) == 1
    }

    /// Reduced in the definite sense: `|b| <= a <= c`, `b >= 0` on the boundary.
    pub fn is_reduced_definite(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// Reduced in the indefinite sense: `0 < b < √D`, `√D - b < 2|a| < √D + b`.
    pub fn is_reduced_indefinite(&self, sqrt_floor: i128) -> bool {
        let (a, b) = (self.a.abs(), self.b);
        b > 0 && b <= sqrt_floor && 2 * a + b > sqrt_floor && 2 * a - b <= sqrt_floor
    }

    /// The prime form `(l, b, c)` with `0 <= b <= l`, when `l` is a prime
    /// not inert in the order of discriminant `d`.
    pub fn prime_form(l: u128, d: i128) -> Option<Self> {
        let li = l as i128;
        if l == 2 {
            let r = d.rem_euclid(8);
            let b = match r {
                0 => 0,
                1 => 1,
                4 => 2,
                _ => return None,
            };
            return QuadForm::from_ab(2, b, d);
        }
        let r = sqrt_mod_prime(d.rem_euclid(li) as u128, l)? as i128;
        let b = if (r - d).rem_euclid(2) == 0 { r } else { li - r };
        QuadForm::from_ab(li, b, d)
    }
}

/// Swap `(a, b, c) -> (c, -b, a)`: a proper equivalence.
#[inline]
fn swap<T: Tracker>(f: QuadForm, t: &mut T) -> QuadForm {
    t.mul_tau_over(f.b, f.c);
    QuadForm { a: f.c, b: -f.b, c: f.a }
}

/// Replace `b` by the representative of `b mod 2|a|` in `(-|a|, |a|]`.
#[inline]
fn normalize(f: QuadForm) -> QuadForm {
    let a2 = 2 * f.a.abs();
    let mut b = f.b.rem_euclid(a2);
    if b > f.a.abs() {
        b -= a2;
    }
    if b == f.b {
        return f;
    }
    // x -> x + k y: b' = b + 2 k a, c' = c + k(b + k a)
    let k = (b - f.b) / (2 * f.a);
    let c = f.c + k * (f.b + k * f.a);
    QuadForm { a: f.a, b, c }
}

/// Reduction of a positive definite form (`D < 0`, `a > 0`).
pub fn reduce_definite_tracked<T: Tracker>(f: QuadForm, t: &mut T) -> QuadForm {
    let mut f = normalize(f);
    loop {
        if f.a > f.c || (f.a == f.c && f.b < 0) {
            f = normalize(swap(f, t));
        } else {
            return f;
        }
    }
}

pub fn reduce_definite(f: QuadForm) -> QuadForm {
    reduce_definite_tracked(f, &mut NoTrack)
}

/// One step of the indefinite reduction operator: swap, then choose the new
/// `b ≡ -b (mod 2|c|)` in `(√D - 2|c|, √D)` when `|c| < √D`, otherwise in
/// `(-|c|, |c|]`.
pub fn rho_tracked<T: Tracker>(f: QuadForm, sqrt_floor: i128, t: &mut T) -> QuadForm {
    let g = swap(f, t);
    let a = g.a.abs();
    let b = if a <= sqrt_floor {
        sqrt_floor - (sqrt_floor - g.b).rem_euclid(2 * a)
    } else {
        let mut b = g.b.rem_euclid(2 * a);
        if b > a {
            b -= 2 * a;
        }
        b
    };
    let k = (b - g.b) / (2 * g.a);
    QuadForm { a: g.a, b, c: g.c + k * (g.b + k * g.a) }
}

pub fn rho(f: QuadForm, sqrt_floor: i128) -> QuadForm {
    rho_tracked(f, sqrt_floor, &mut NoTrack)
}

/// Reduction of an indefinite form (`D > 0`, not a square) to a reduced form
/// on its cycle.
pub fn reduce_indefinite_tracked<T: Tracker>(f: QuadForm, sqrt_floor: i128, t: &mut T) -> QuadForm {
    let mut f = f;
    let mut steps = 0u32;
    while !f.is_reduced_indefinite(sqrt_floor) {
        f = rho_tracked(f, sqrt_floor, t);
        steps += 1;
        assert!(steps < 100_000, "indefinite reduction failed to terminate at {f}");
    }
    f
}

pub fn reduce_indefinite(f: QuadForm, sqrt_floor: i128) -> QuadForm {
    reduce_indefinite_tracked(f, sqrt_floor, &mut NoTrack)
}

/// Reduce according to the sign of the discriminant.
pub fn reduce(f: QuadForm) -> QuadForm {
    let d = f.discriminant();
    if d < 0 {
        reduce_definite(f)
    } else {
        reduce_indefinite(f, isqrt(d as u128) as i128)
    }
}

/// Product of the ideals of two forms with positive leading coefficients:
/// returns `(g, k)` with `ideal(f1) * ideal(f2) = k * ideal(g)`; `g` is not
/// reduced but has `a > 0` and `|b| <= a`.
pub fn compose_ideals(f1: QuadForm, f2: QuadForm, d: i128) -> (QuadForm, i128) {
    debug_assert!(f1.a > 0 && f2.a > 0);
    let (f1, f2) = if f1.a > f2.a { (f2, f1) } else { (f1, f2) };
    let s = (f1.b + f2.b) / 2;
    let n = f2.b - s;
    let (y1, dd) = if f2.a % f1.a == 0 {
        (0, f1.a)
    } else {
        let (g, u, _v) = ext_gcd(f2.a, f1.a);
        (u, g)
    };
    let (x2, y2, d1) = if s % dd == 0 {
        (0, -1, dd)
    } else {
        let (g, x2, y2) = ext_gcd(s, dd);
        (x2, -y2, g)
    };
    let v1 = f1.a / d1;
    let v2 = f2.a / d1;
    let r = (y1 * y2 % v1 * n - x2 * f2.c).rem_euclid(v1);
    let a3 = v1 * v2;
    let b3 = f2.b + 2 * v2 * r;
    let g = normalize(QuadForm { a: a3, b: b3, c: (b3 * b3 - d) / (4 * a3) });
    (g, d1)
}

/// Gauss composition followed by definite reduction.
pub fn compose_definite(f1: &QuadForm, f2: &QuadForm) -> QuadForm {
    let d = f1.discriminant();
    let (g, _) = compose_ideals(*f1, *f2, d);
    reduce_definite(g)
}

/// Composition of narrow classes for indefinite forms of either sign:
/// `(a, b, c)` with `a < 0` is the ideal `[|a|, τ]` twisted by an element
/// of negative norm.
pub fn compose_indefinite(f1: &QuadForm, f2: &QuadForm, sqrt_floor: i128) -> QuadForm {
    let d = f1.discriminant();
    let pos = |f: &QuadForm| if f.a < 0 { QuadForm { a: -f.a, b: f.b, c: -f.c } } else { *f };
    let (mut g, _) = compose_ideals(pos(f1), pos(f2), d);
    if (f1.a < 0) != (f2.a < 0) {
        g = QuadForm { a: -g.a, b: g.b, c: -g.c };
    }
    reduce_indefinite(g, sqrt_floor)
}

/// `f^e` for a definite form, by square and multiply.
pub fn pow_definite(f: &QuadForm, e: u128) -> QuadForm {
    let d = f.discriminant();
    let mut result = QuadForm::principal(d);
    let mut base = reduce_definite(*f);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = compose_definite(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = compose_definite(&base, &base);
        }
    }
    result
}
