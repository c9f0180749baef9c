//! Completions of a quadratic field at `p`: embeddings of global elements
//! with exact valuations, and discrete logarithms in the principal units of
//! `O / p^n O`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::arith::{mul_mod, valuation};
use crate::error::{Error, Result};
use crate::linalg::{ext_gcd, LocalRing};
use crate::quadclass::form::Tracker;

/// Decomposition of `p` in the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

/// The algebra `O ⊗ Z_p` with `O = Z[ω]`, `ω = (δ + √D)/2`.
///
/// In the split case elements are pairs of `p`-adic integers (one per
/// prime above `p`). Otherwise `O ⊗ Z_p = Z_p[θ]` with `θ^2 = tθ - s`,
/// where `θ = ω` when `p` is inert and `θ = ω - c0` is a uniformizer when
/// `p` ramifies.
#[derive(Debug, Clone)]
pub struct LocalAlgebra {
    pub p: u128,
    pub kind: SplittingType,
    pub d: i128,
    delta: i128,
    /// Unit precision: units are known modulo `p^q`.
    pub q: u32,
    modq: u128,
    /// Split case: `√D` modulo `p^r_prec`.
    sqrt_d: u128,
    r_prec: u32,
    mod_r: u128,
    t: i128,
    s: i128,
    c0: i128,
    /// Ramified case: inverse of `s / p` modulo `p^q`.
    s_unit_inv: u128,
}

/// An element of `(O ⊗ Q_p)^×`: valuations at the primes above `p` (in `π`
/// when ramified) and a unit known modulo `p^q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalElem {
    pub v: [i64; 2],
    /// Split: the two components. Otherwise `u[0] + u[1] θ`.
    pub u: [u128; 2],
}

fn vp_i128(x: i128, p: u128) -> u32 {
    valuation(x.unsigned_abs(), p)
}

fn red(x: i128, m: u128) -> u128 {
    x.rem_euclid(m as i128) as u128
}

fn hensel_sqrt(d: i128, p: u128, prec: u32) -> Result<u128> {
    // square root of d in Z_p (d a p-adic unit square), modulo p^prec
    let m = p.pow(prec);
    if p == 2 {
        // lift x^2 ≡ d mod 2^k one bit at a time, keeping x odd
        if d.rem_euclid(8) != 1 {
            return Err(Error::InvalidInput(format!("{d} is not a 2-adic square")));
        }
        let mut x: u128 = 1;
        for k in 3..prec + 1 {
            // invariant: x^2 ≡ d mod 2^k
            let mk = 1u128 << (k + 1);
            let sq = mul_mod(x, x, mk);
            if sq != red(d, mk) {
                x += 1u128 << (k - 1);
            }
        }
        return Ok(x % m);
    }
    let r = crate::arith::sqrt_mod_prime(red(d, p), p)
        .ok_or_else(|| Error::InvalidInput(format!("{d} is not a square mod {p}")))?;
    let mut x = r;
    let mut k = 1;
    while k < prec {
        k = (2 * k).min(prec);
        let mk = p.pow(k);
        let fx = (mul_mod(x, x, mk) + mk - red(d, mk)) % mk;
        let inv = LocalRing { p, m: k, modulus: mk }.inv(mul_mod(2, x, mk)).expect("2x is a unit");
        x = (x + mk - mul_mod(fx, inv, mk)) % mk;
    }
    Ok(x % m)
}

impl LocalAlgebra {
    /// Builds the completion at `p` of the field of fundamental discriminant
    /// `d`, with units tracked modulo `p^q`.
    pub fn new(d: i128, p: u128, q: u32) -> Result<Self> {
        let kind = splitting_type_of(d, p);
        let delta = d.rem_euclid(2);
        let modq = p
            .checked_pow(q)
            .filter(|&m| m < (1u128 << 100))
            .ok_or_else(|| Error::Budget(format!("unit precision {p}^{q} too large")))?;
        // ω^2 = tr ω - nm with tr = δ, nm = (δ - D)/4
        let tr = delta;
        let nm = (delta * delta - d) / 4;
        let mut alg = LocalAlgebra {
            p,
            kind,
            d,
            delta,
            q,
            modq,
            sqrt_d: 0,
            r_prec: 0,
            mod_r: 1,
            t: tr,
            s: nm,
            c0: 0,
            s_unit_inv: 0,
        };
        match kind {
            SplittingType::Split => {
                let mut r_prec = 1;
                while p.checked_pow(r_prec + 1).map_or(false, |m| m < (1u128 << 120)) {
                    r_prec += 1;
                }
                let r_prec = r_prec.max(q + 2);
                let mod_r = p.checked_pow(r_prec).ok_or_else(|| Error::Budget("split precision too large".into()))?;
                alg.sqrt_d = hensel_sqrt(d, p, r_prec)?;
                alg.r_prec = r_prec;
                alg.mod_r = mod_r;
            }
            SplittingType::Inert => {}
            SplittingType::Ramified => {
                let pi = p as i128;
                let c0 = (0..pi)
                    .find(|&c| (c * c - tr * c + nm).rem_euclid(pi) == 0)
                    .ok_or_else(|| Error::Inconsistent(format!("no double root mod {p} for D={d}")))?;
                let t = tr - 2 * c0;
                let s = c0 * c0 - tr * c0 + nm;
                if vp_i128(s, p) != 1 || t.rem_euclid(pi) != 0 {
                    return Err(Error::Inconsistent(format!("ω - {c0} is not a uniformizer at {p} for D={d}")));
                }
                alg.t = t;
                alg.s = s;
                alg.c0 = c0;
                let s_unit = red(s / pi, modq);
                alg.s_unit_inv = inv_mod(s_unit, modq)?;
            }
        }
        Ok(alg)
    }

    pub fn one(&self) -> LocalElem {
        match self.kind {
            SplittingType::Split => LocalElem { v: [0, 0], u: [1 % self.modq, 1 % self.modq] },
            _ => LocalElem { v: [0, 0], u: [1 % self.modq, 0] },
        }
    }

    fn unit_mul(&self, a: &[u128; 2], b: &[u128; 2], m: u128) -> [u128; 2] {
        match self.kind {
            SplittingType::Split => [mul_mod(a[0], b[0], m), mul_mod(a[1], b[1], m)],
            _ => {
                let t = red(self.t, m);
                let s = red(self.s, m);
                let yy = mul_mod(a[1], b[1], m);
                let x = (mul_mod(a[0], b[0], m) + m - mul_mod(s, yy, m)) % m;
                let y = (mul_mod(a[0], b[1], m) + mul_mod(a[1], b[0], m) + mul_mod(t, yy, m)) % m;
                [x, y]
            }
        }
    }

    fn unit_inv(&self, a: &[u128; 2], m: u128) -> Result<[u128; 2]> {
        match self.kind {
            SplittingType::Split => Ok([inv_mod(a[0], m)?, inv_mod(a[1], m)?]),
            _ => {
                // (x + yθ)(x + y t - yθ) = x^2 + t x y + s y^2
                let t = red(self.t, m);
                let s = red(self.s, m);
                let (x, y) = (a[0], a[1]);
                let n = (mul_mod(x, x, m) + mul_mod(t, mul_mod(x, y, m), m) + mul_mod(s, mul_mod(y, y, m), m)) % m;
                let ni = inv_mod(n, m)?;
                let cx = (x + mul_mod(y, t, m)) % m;
                let cy = (m - y % m) % m;
                Ok([mul_mod(cx, ni, m), mul_mod(cy, ni, m)])
            }
        }
    }

    /// Ramified elements are stored as `p^⌊v/2⌋ π^(v mod 2) u`, so a product
    /// of two odd valuations picks up the unit `π^2 / p = (tπ - s)/p`.
    pub fn mul(&self, a: &LocalElem, b: &LocalElem) -> LocalElem {
        let mut u = self.unit_mul(&a.u, &b.u, self.modq);
        if self.kind == SplittingType::Ramified && a.v[0].rem_euclid(2) == 1 && b.v[0].rem_euclid(2) == 1 {
            let pi = self.p as i128;
            let m = self.modq;
            u = self.unit_mul(&u, &[red(-self.s / pi, m), red(self.t / pi, m)], m);
        }
        LocalElem { v: [a.v[0] + b.v[0], a.v[1] + b.v[1]], u }
    }

    /// The rational integer `k != 0`.
    pub fn embed_int(&self, k: i128) -> Result<LocalElem> {
        if k == 0 {
            return Err(Error::InvalidInput("zero has no valuation".into()));
        }
        let e = vp_i128(k, self.p) as i64;
        let unit = red(k / (self.p as i128).pow(e as u32), self.modq);
        Ok(match self.kind {
            SplittingType::Split => LocalElem { v: [e, e], u: [unit, unit] },
            SplittingType::Inert => LocalElem { v: [e, 0], u: [unit, 0] },
            SplittingType::Ramified => LocalElem { v: [2 * e, 0], u: [unit, 0] },
        })
    }

    /// The nonzero element `(x + y √D)/2` with `x ≡ y D (mod 2)`.
    pub fn embed(&self, x: i128, y: i128) -> Result<LocalElem> {
        if x == 0 && y == 0 {
            return Err(Error::InvalidInput("zero has no valuation".into()));
        }
        if (x - y * self.d).rem_euclid(2) != 0 {
            return Err(Error::InvalidInput(format!("({x} + {y}√D)/2 is not integral")));
        }
        let p = self.p;
        match self.kind {
            SplittingType::Split => {
                let m = self.mod_r;
                let ys = mul_mod(red(y, m), self.sqrt_d, m);
                let xr = red(x, m);
                let mut v = [0i64; 2];
                let mut u = [0u128; 2];
                for (i, c) in [(xr + ys) % m, (xr + m - ys) % m].into_iter().enumerate() {
                    // c / 2 in Z_p, known modulo p^prec
                    let (c, prec) = if p == 2 {
                        (c >> 1, self.r_prec - 1)
                    } else {
                        let inv2 = (m + 1) / 2;
                        (mul_mod(c, inv2, m), self.r_prec)
                    };
                    if c == 0 {
                        return Err(Error::Budget("p-adic precision exhausted in split embedding".into()));
                    }
                    let w = valuation(c, p);
                    if prec < w + self.q {
                        return Err(Error::Budget(format!("valuation {w} exceeds the split embedding precision")));
                    }
                    v[i] = w as i64;
                    u[i] = (c / p.pow(w)) % self.modq;
                }
                Ok(LocalElem { v, u })
            }
            SplittingType::Inert => {
                let big_x = (x - y * self.delta) / 2;
                let w = vp_i128(big_x, p).min(vp_i128(y, p));
                let pw = (p as i128).pow(w);
                Ok(LocalElem { v: [w as i64, 0], u: [red(big_x / pw, self.modq), red(y / pw, self.modq)] })
            }
            SplittingType::Ramified => {
                let big_x = (x - y * self.delta) / 2 + y * self.c0;
                let (a, b) = (
                    if big_x == 0 { u32::MAX / 4 } else { vp_i128(big_x, p) },
                    if y == 0 { u32::MAX / 4 } else { vp_i128(y, p) },
                );
                let val = (2 * a).min(2 * b + 1);
                let k = val / 2;
                let pk = (p as i128).pow(k);
                let (xx, yy) = (big_x / pk, y / pk);
                let m = self.modq;
                let u = if val % 2 == 0 {
                    [red(xx, m), red(yy, m)]
                } else {
                    // (xx + yy π)/π with p | xx: xx/π = (xx/p)(t - π)/(s/p)
                    let xp = red(xx / p as i128, m);
                    let f = mul_mod(xp, self.s_unit_inv, m);
                    [(mul_mod(f, red(self.t, m), m) + red(yy, m)) % m, (m - f) % m]
                };
                Ok(LocalElem { v: [val as i64, 0], u })
            }
        }
    }

    /// A global unit `(x + y√D)/2` given by big integers.
    pub fn embed_unit_big(&self, x: &BigInt, y: &BigInt) -> Result<LocalElem> {
        let l = BigInt::from(2u8) * BigInt::from(self.p).pow(self.q + 1);
        let xr = x.mod_floor(&l).to_i128().expect("reduced residue fits");
        let yr = y.mod_floor(&l).to_i128().expect("reduced residue fits");
        let e = self.embed(xr, yr)?;
        if e.v != [0, 0] {
            return Err(Error::Inconsistent("global unit has nonzero valuation at p".into()));
        }
        Ok(e)
    }

    /// `a / b` for a nonzero rational integer `b`.
    pub fn div_int(&self, a: &LocalElem, b: i128) -> Result<LocalElem> {
        let e = self.embed_int(b)?;
        let ui = self.unit_inv(&e.u, self.modq)?;
        Ok(LocalElem { v: [a.v[0] - e.v[0], a.v[1] - e.v[1]], u: self.unit_mul(&a.u, &ui, self.modq) })
    }

    /// Order of `(O/J)^×`, `J` the radical of `O/pO`.
    pub fn residue_unit_order(&self) -> u128 {
        let p = self.p;
        match self.kind {
            SplittingType::Split => (p - 1) * (p - 1),
            SplittingType::Inert => p * p - 1,
            SplittingType::Ramified => p - 1,
        }
    }
}

fn inv_mod(a: u128, m: u128) -> Result<u128> {
    if m == 1 {
        return Ok(0);
    }
    let (g, x, _) = ext_gcd((a % m) as i128, m as i128);
    if g != 1 {
        return Err(Error::Inconsistent(format!("{a} is not invertible modulo {m}")));
    }
    Ok(red(x, m))
}

/// Splitting type of `p` in the field of fundamental discriminant `d`.
pub fn splitting_type_of(d: i128, p: u128) -> SplittingType {
    match crate::arith::kronecker(d, p as i128) {
        1 => SplittingType::Split,
        -1 => SplittingType::Inert,
        _ => SplittingType::Ramified,
    }
}

/// Accumulates reduction multipliers as a local element.
pub struct LocalTracker<'a> {
    pub alg: &'a LocalAlgebra,
    pub value: LocalElem,
    pub error: Option<Error>,
}

impl<'a> LocalTracker<'a> {
    pub fn new(alg: &'a LocalAlgebra) -> Self {
        LocalTracker { alg, value: alg.one(), error: None }
    }

    pub fn mul_elem(&mut self, e: &LocalElem) {
        self.value = self.alg.mul(&self.value, e);
    }

    fn absorb(&mut self, r: Result<LocalElem>) {
        match r {
            Ok(e) => self.value = self.alg.mul(&self.value, &e),
            Err(e) => {
                if self.error.is_none() {
                    self.error = Some(e);
                }
            }
        }
    }
}

impl Tracker for LocalTracker<'_> {
    fn mul_int(&mut self, k: i128) {
        let r = self.alg.embed_int(k);
        self.absorb(r);
    }

    fn mul_tau_over(&mut self, b: i128, c: i128) {
        let r = self.alg.embed(-b, 1);
        self.absorb(r);
        let r = self.alg.div_int(&self.value, c);
        match r {
            Ok(v) => self.value = v,
            Err(e) => {
                if self.error.is_none() {
                    self.error = Some(e);
                }
            }
        }
    }
}

/// The principal units `U = 1 + J` of `O / p^n O` with the generators
/// `1 + b`, `b` running over bases of the layers `J^i / J^{i+1}`; every
/// element is a unique ordered product with exponents in `[0, p)`.
#[derive(Debug, Clone)]
pub struct PrincipalUnits<'a> {
    pub alg: &'a LocalAlgebra,
    pub n: u32,
    pub modn: u128,
    /// `(layer, generator, inverse)`.
    gens: Vec<(u32, [u128; 2], [u128; 2])>,
}

impl<'a> PrincipalUnits<'a> {
    pub fn new(alg: &'a LocalAlgebra, n: u32) -> Result<Self> {
        if n > alg.q {
            return Err(Error::Budget(format!("level {n} exceeds the unit precision {}", alg.q)));
        }
        let p = alg.p;
        let modn = p.pow(n);
        let mut gens = Vec::new();
        let layers = match alg.kind {
            SplittingType::Ramified => 2 * n,
            _ => n,
        };
        for i in 1..layers {
            let basis: Vec<[u128; 2]> = match alg.kind {
                SplittingType::Split => {
                    let b = (1 + p.pow(i)) % modn;
                    vec![[b, 1 % modn], [1 % modn, b]]
                }
                SplittingType::Inert => vec![[(1 + p.pow(i)) % modn, 0], [1 % modn, p.pow(i) % modn]],
                SplittingType::Ramified => {
                    let k = i / 2;
                    if i % 2 == 0 {
                        vec![[(1 + p.pow(k)) % modn, 0]]
                    } else {
                        vec![[1 % modn, p.pow(k) % modn]]
                    }
                }
            };
            for g in basis {
                let gi = alg.unit_inv(&g, modn)?;
                gens.push((i, g, gi));
            }
        }
        Ok(PrincipalUnits { alg, n, modn, gens })
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    fn digits(&self, u: &[u128; 2], layer: u32) -> Vec<u128> {
        let p = self.alg.p;
        let m = self.modn;
        let x1 = (u[0] + m - 1 % m) % m;
        match self.alg.kind {
            SplittingType::Split => {
                let y1 = (u[1] + m - 1 % m) % m;
                vec![(x1 / p.pow(layer)) % p, (y1 / p.pow(layer)) % p]
            }
            SplittingType::Inert => vec![(x1 / p.pow(layer)) % p, (u[1] / p.pow(layer)) % p],
            SplittingType::Ramified => {
                let k = layer / 2;
                if layer % 2 == 0 {
                    vec![(x1 / p.pow(k)) % p]
                } else {
                    vec![(u[1] / p.pow(k)) % p]
                }
            }
        }
    }

    /// Exponent vector of a principal unit.
    pub fn dlog(&self, u: &[u128; 2]) -> Result<Vec<u128>> {
        let m = self.modn;
        let mut x = [u[0] % m, u[1] % m];
        let mut out = vec![0u128; self.gens.len()];
        let mut idx = 0;
        while idx < self.gens.len() {
            let layer = self.gens[idx].0;
            let d = self.digits(&x, layer);
            for (k, &dk) in d.iter().enumerate() {
                out[idx + k] = dk;
                for _ in 0..dk {
                    x = self.alg.unit_mul(&x, &self.gens[idx + k].2, m);
                }
            }
            idx += d.len();
        }
        let one = self.alg.one().u.map(|c| c % m);
        if x != one {
            return Err(Error::Inconsistent("element is not a principal unit".into()));
        }
        Ok(out)
    }

    /// Relations `p e_g - dlog(g^p)`, one column per generator.
    pub fn relations(&self) -> Result<Vec<Vec<i128>>> {
        let p = self.alg.p;
        let mut cols = Vec::with_capacity(self.gens.len());
        for (j, (_, g, _)) in self.gens.iter().enumerate() {
            let mut gp = self.alg.one().u.map(|c| c % self.modn);
            for _ in 0..p {
                gp = self.alg.unit_mul(&gp, g, self.modn);
            }
            let mut col: Vec<i128> = self.dlog(&gp)?.into_iter().map(|x| -(x as i128)).collect();
            col[j] += p as i128;
            cols.push(col);
        }
        Ok(cols)
    }

    /// Projection of a unit of `O/p^n` onto its principal-unit component.
    pub fn project(&self, u: &[u128; 2]) -> Result<[u128; 2]> {
        let m = self.modn;
        let q = self.alg.residue_unit_order();
        // the exponent of U divides p^(n+1)
        let order_u =
            self.alg.p.checked_pow(self.n + 2).ok_or_else(|| Error::Budget("unit group exponent overflows".into()))?;
        let qi = inv_mod(q % order_u, order_u)?;
        let e = q * qi;
        let mut base = [u[0] % m, u[1] % m];
        let mut r = self.alg.one().u.map(|c| c % m);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = self.alg.unit_mul(&r, &base, m);
            }
            base = self.alg.unit_mul(&base, &base, m);
            e >>= 1;
        }
        Ok(r)
    }

    /// All residues of `O/p^n` as unit pairs, for brute-force checks.
    pub fn all_units(&self) -> Vec<[u128; 2]> {
        let m = self.modn;
        let p = self.alg.p;
        let mut out = Vec::new();
        for x in 0..m {
            for y in 0..m {
                let u = [x, y];
                let ok = match self.alg.kind {
                    SplittingType::Split => x % p != 0 && y % p != 0,
                    _ => self.alg.unit_inv(&u, m).is_ok(),
                };
                if ok {
                    out.push(u);
                }
            }
        }
        out
    }

    /// Product in `O/p^n`.
    pub fn mul(&self, a: &[u128; 2], b: &[u128; 2]) -> [u128; 2] {
        self.alg.unit_mul(a, b, self.modn)
    }
}
