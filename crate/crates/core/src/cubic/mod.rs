//! Cyclic cubic fields by conductor, genus-theoretic counts, and parsing and
//! validation of printed class group tables for cyclic fields of prime
//! degree.

pub mod fixture;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factor, isqrt, valuation, SpfSieve};
use crate::error::{Error, Result};

pub use fixture::{
    delta_from_fixture, parse_fixture_file, parse_fixture_line, validate_file, validate_fixture, Fixture, FixtureCheck,
    FixtureFile, ValidationReport,
};

/// A cyclic cubic field of conductor `f`, given by `4f = a^2 + 27 b^2` and
/// its period polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicField {
    pub f: u128,
    /// `v_3(f)`, either 0 or 2.
    pub e: u32,
    pub a: i128,
    pub b: i128,
    /// Coefficients of the monic cubic, constant term first.
    pub poly: Vec<i128>,
}

impl CubicField {
    /// The defining polynomial in the usual `x^3+x^2-2*x-1` notation.
    pub fn poly_string(&self) -> String {
        format_poly(&self.poly)
    }
}

/// Formats a polynomial given with the constant term first.
pub fn format_poly(coeffs: &[i128]) -> String {
    let mut out = String::new();
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        if c < 0 {
            out.push('-');
        } else if !out.is_empty() {
            out.push('+');
        }
        let mag = c.unsigned_abs();
        match (k, mag) {
            (0, _) => out.push_str(&mag.to_string()),
            (1, 1) => out.push('x'),
            (1, _) => out.push_str(&format!("{mag}*x")),
            (_, 1) => out.push_str(&format!("x^{k}")),
            _ => out.push_str(&format!("{mag}*x^{k}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Whether `f` is the conductor of some cyclic cubic field.
pub fn is_cubic_conductor(f: u128) -> bool {
    if f < 7 {
        return false;
    }
    let e = valuation(f, 3);
    if e != 0 && e != 2 {
        return false;
    }
    let Ok(fac) = factor(f / 3u128.pow(e)) else {
        return false;
    };
    if !fac.is_squarefree() || fac.primes().any(|q| q % 3 != 1) {
        return false;
    }
    representations(f).next().is_some()
}

/// Conductors `7 <= f <= max_f` of cyclic cubic fields, ascending.
pub fn cubic_conductors_up_to(max_f: u64) -> Vec<u128> {
    if max_f < 7 {
        return Vec::new();
    }
    let sieve = SpfSieve::new(max_f as usize);
    (7..=max_f)
        .filter(|&f| {
            let e = valuation(f as u128, 3);
            if e != 0 && e != 2 {
                return false;
            }
            let rest = f / 3u64.pow(e);
            rest == 1 || sieve.factor(rest).iter().all(|&(q, k)| k == 1 && q % 3 == 1)
        })
        .map(u128::from)
        .filter(|&f| representations(f).next().is_some())
        .collect()
}

/// Pairs `(|a|, b)` with `4f = a^2 + 27 b^2`, `b >= 1`, skipping `3 | b` when `9 | f`.
fn representations(f: u128) -> impl Iterator<Item = (i128, i128)> {
    let e2 = f % 9 == 0;
    let bmax = isqrt(4 * f / 27);
    (1..=bmax).filter_map(move |b| {
        if e2 && b % 3 == 0 {
            return None;
        }
        let big_a = 4 * f - 27 * b * b;
        let a = isqrt(big_a);
        (a * a == big_a).then_some((a as i128, b as i128))
    })
}

/// The `2^{N-1}` cyclic cubic fields of conductor `f`, by increasing `b`.
pub fn cubic_polynomials(f: u128) -> Result<Vec<CubicField>> {
    if !is_cubic_conductor(f) {
        return Err(Error::InvalidInput(format!("{f} is not a cyclic cubic conductor")));
    }
    let e = valuation(f, 3);
    let fi = i128::try_from(f).map_err(|_| Error::InvalidInput(format!("conductor {f} too large")))?;
    let overflow = || Error::Budget(format!("constant term for f={f} overflows"));
    let mut out = Vec::new();
    for (a0, b) in representations(f) {
        let (a, poly) = if e == 0 {
            let a = if a0 % 3 == 1 { -a0 } else { a0 };
            let num = fi.checked_mul(a - 3).map(|v| v + 1).ok_or_else(overflow)?;
            if num % 27 != 0 || (1 - fi) % 3 != 0 {
                return Err(Error::Inconsistent(format!("non-integral period polynomial for f={f}, a={a}")));
            }
            (a, vec![num / 27, (1 - fi) / 3, 1, 1])
        } else {
            let a = if a0 % 9 == 3 { -a0 } else { a0 };
            let num = fi.checked_mul(a).ok_or_else(overflow)?;
            if num % 27 != 0 {
                return Err(Error::Inconsistent(format!("non-integral period polynomial for f={f}, a={a}")));
            }
            (a, vec![-num / 27, -fi / 3, 0, 1])
        };
        out.push(CubicField { f, e, a, b, poly });
    }
    if out.is_empty() {
        return Err(Error::Inconsistent(format!("no representation 4f = a^2 + 27b^2 for conductor {f}")));
    }
    Ok(out)
}

/// Discriminant of the monic cubic `x^3 + c2 x^2 + c1 x + c0`.
pub fn cubic_discriminant(poly: &[i128]) -> Result<BigInt> {
    if poly.len() != 4 || poly[3] != 1 {
        return Err(Error::InvalidInput(format!("{} is not a monic cubic", format_poly(poly))));
    }
    let (d, c, b) = (BigInt::from(poly[0]), BigInt::from(poly[1]), BigInt::from(poly[2]));
    let disc = BigInt::from(18) * &b * &c * &d - BigInt::from(4) * b.pow(3) * &d + b.pow(2) * c.pow(2)
        - BigInt::from(4) * c.pow(3)
        - BigInt::from(27) * d.pow(2);
    Ok(disc)
}

fn eval_big(poly: &[i128], x: &BigInt) -> BigInt {
    poly.iter().rev().fold(BigInt::zero(), |acc, &c| acc * x + BigInt::from(c))
}

/// Integer roots of a monic cubic, located numerically and confirmed exactly.
pub fn integer_roots(poly: &[i128]) -> Vec<i128> {
    let bound = 1.0 + poly[..3].iter().map(|c| c.unsigned_abs() as f64).fold(0.0, f64::max);
    let val = |x: f64| ((x + poly[2] as f64) * x + poly[1] as f64) * x + poly[0] as f64;
    let (p2, p1) = (poly[2] as f64, poly[1] as f64);
    let disc = 4.0 * p2 * p2 - 12.0 * p1;
    let mut cuts = vec![-bound];
    if disc > 0.0 {
        let r = disc.sqrt();
        cuts.push((-2.0 * p2 - r) / 6.0);
        cuts.push((-2.0 * p2 + r) / 6.0);
    }
    cuts.push(bound);
    let mut cands = Vec::new();
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (val(lo), val(hi));
        if flo.signum() == fhi.signum() {
            cands.push(lo);
            cands.push(hi);
            continue;
        }
        let rising = flo < fhi;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (val(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        cands.push(lo);
    }
    let mut roots = Vec::new();
    for c in cands {
        let r0 = c.round();
        if !r0.is_finite() || r0.abs() > 1.0e36 {
            continue;
        }
        for dr in -2..=2 {
            let r = r0 as i128 + dr;
            if !roots.contains(&r) && eval_big(poly, &BigInt::from(r)).is_zero() {
                roots.push(r);
            }
        }
    }
    roots.sort_unstable();
    roots
}

/// Whether the polynomial of `field` has discriminant `f^2 s^2` for an
/// integer `s`; for polynomials from [`cubic_polynomials`] this is the
/// condition that the field discriminant is `f^2`.
pub fn discriminant_filter(field: &CubicField) -> Result<bool> {
    let disc = cubic_discriminant(&field.poly)?;
    if !integer_roots(&field.poly).is_empty() {
        return Err(Error::InvalidInput(format!("{} is reducible", format_poly(&field.poly))));
    }
    let f2 = BigInt::from(field.f) * BigInt::from(field.f);
    if disc.is_negative() || f2.is_zero() || !(&disc % &f2).is_zero() {
        return Ok(false);
    }
    let q = (disc / f2).magnitude().clone();
    let s = q.sqrt();
    Ok(&s * &s == q)
}

/// Number of ambiguous classes `p^{N-1}` of a cyclic field of degree `p`
/// and conductor `f` with `N` ramified primes.
pub fn ambiguous_number(f: u128, p: u64) -> Result<u128> {
    let n = factor(f)?.omega();
    if n == 0 {
        return Ok(1);
    }
    (p as u128).checked_pow(n as u32 - 1).ok_or_else(|| Error::Budget(format!("{p}^{} overflows", n - 1)))
}

/// Range `[N-1, (p-1)(N-1)]` of possible `p`-ranks.
pub fn rank_window(n: usize, p: u64) -> (usize, usize) {
    let lo = n.saturating_sub(1);
    (lo, (p as usize - 1) * lo)
}
