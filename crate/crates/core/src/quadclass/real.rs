//! Real quadratic class groups from cycles of reduced indefinite forms.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::arith::{isqrt, primes_up_to, SpfSieve};
use crate::error::{Error, Result};
use crate::group::{AbelianGroupStructure, FiniteGroup, GroupLaw, SubgroupBuilder};

use super::form::{compose_indefinite, reduce_indefinite, rho, rho_tracked, QuadForm, Tracker};
use super::{ClassGroupConfig, Discriminant};

/// All reduced indefinite forms of discriminant `d > 0` (not a square).
/// Divisors come from `sieve` when it covers `(d - b^2)/4`, otherwise from
/// a scan of the admissible window.
pub fn reduced_forms_indefinite(d: i128, sieve: Option<&SpfSieve>) -> Vec<QuadForm> {
    let s = isqrt(d as u128) as i128;
    let mut out = Vec::new();
    let mut b = if (s - d).rem_euclid(2) == 0 { s } else { s - 1 };
    while b > 0 {
        let n = (d - b * b) / 4;
        // |a| in ((s - b)/2, (s + b)/2]
        let lo = (s - b) / 2 + 1;
        let hi = (s + b) / 2;
        let mut push = |t: i128| {
            out.push(QuadForm { a: t, b, c: -n / t });
            out.push(QuadForm { a: -t, b, c: n / t });
        };
        match sieve {
            Some(sv) if (n as u64) <= sv.limit() => {
                let mut divs = vec![1i128];
                for (q, e) in sv.factor(n as u64) {
                    let len = divs.len();
                    let mut pk = 1i128;
                    for _ in 0..e {
                        pk *= q as i128;
                        for i in 0..len {
                            divs.push(divs[i] * pk);
                        }
                    }
                }
                for t in divs {
                    if t >= lo && t <= hi {
                        push(t);
                    }
                }
            }
            _ => {
                for t in lo.max(1)..=hi {
                    if n % t == 0 {
                        push(t);
                    }
                }
            }
        }
        b -= 2;
    }
    out
}

/// The partition of the reduced forms of `d` into rho-cycles; each cycle is
/// one narrow ideal class.
#[derive(Debug, Clone)]
pub struct Cycles {
    pub d: i128,
    pub sqrt_floor: i128,
    id: HashMap<QuadForm, u32>,
    reps: Vec<QuadForm>,
    lens: Vec<u32>,
}

impl Cycles {
    pub fn new(d: i128, sieve: Option<&SpfSieve>) -> Self {
        let s = isqrt(d as u128) as i128;
        let forms = reduced_forms_indefinite(d, sieve);
        let mut id: HashMap<QuadForm, u32> = HashMap::with_capacity(forms.len());
        let mut reps = Vec::new();
        let mut lens = Vec::new();
        for f in forms {
            if id.contains_key(&f) {
                continue;
            }
            let k = reps.len() as u32;
            let mut g = f;
            let mut len = 0u32;
            loop {
                id.insert(g, k);
                len += 1;
                g = rho(g, s);
                if g == f {
                    break;
                }
            }
            reps.push(f);
            lens.push(len);
        }
        Cycles { d, sqrt_floor: s, id, reps, lens }
    }

    pub fn count(&self) -> usize {
        self.reps.len()
    }

    pub fn rep(&self, k: u32) -> QuadForm {
        self.reps[k as usize]
    }

    pub fn cycle_len(&self, k: u32) -> u32 {
        self.lens[k as usize]
    }

    /// Narrow class of a primitive form of discriminant `d`.
    pub fn class_of(&self, f: &QuadForm) -> u32 {
        let g = reduce_indefinite(*f, self.sqrt_floor);
        self.id[&g]
    }

    pub fn principal(&self) -> u32 {
        self.class_of(&QuadForm::principal(self.d))
    }

    /// The class `J` of `(-1, b, -c)`, principal with a generator of negative norm.
    pub fn negative_class(&self) -> u32 {
        let p = QuadForm::principal(self.d);
        self.class_of(&QuadForm { a: -1, b: p.b, c: -p.c })
    }

    /// The inverse class: `(a, b, c)` reduced has inverse `(c, b, a)`, also reduced.
    pub fn inverse(&self, k: u32) -> u32 {
        let f = self.reps[k as usize];
        self.id[&QuadForm { a: f.c, b: f.b, c: f.a }]
    }

    /// Number of classes of order dividing 2.
    pub fn ambiguous_count(&self) -> usize {
        (0..self.reps.len() as u32).filter(|&k| self.inverse(k) == k).count()
    }
}

/// Narrow class group law on cycle indices.
pub struct NarrowLaw<'a> {
    pub cycles: &'a Cycles,
}

impl GroupLaw for NarrowLaw<'_> {
    type Elem = u32;

    fn identity(&self) -> u32 {
        self.cycles.principal()
    }

    fn op(&self, x: &u32, y: &u32) -> u32 {
        let f = compose_indefinite(&self.cycles.rep(*x), &self.cycles.rep(*y), self.cycles.sqrt_floor);
        self.cycles.id[&f]
    }
}

/// Narrow and ordinary class groups of a real quadratic field.
pub struct RealClassGroup {
    pub disc: Discriminant,
    pub cycles: Cycles,
    pub group: FiniteGroup<u32>,
    pub narrow: AbelianGroupStructure,
    pub ordinary: AbelianGroupStructure,
    /// Norm of the fundamental unit: `-1` exactly when `J` is trivial.
    pub unit_norm: i32,
}

pub fn class_group_real_full(disc: &Discriminant, cfg: &ClassGroupConfig) -> Result<RealClassGroup> {
    if disc.is_imaginary() {
        return Err(Error::InvalidInput(format!("D={} is not positive", disc.value)));
    }
    if disc.abs() > cfg.real_cap {
        return Err(Error::CapExceeded { what: "D", value: disc.abs().to_string(), cap: cfg.real_cap.to_string() });
    }
    let cycles = Cycles::new(disc.value, None);
    let group = {
        let law = NarrowLaw { cycles: &cycles };
        let mut builder = SubgroupBuilder::with_limit(&law, cfg.group_cap);
        let j = cycles.negative_class();
        builder.add(&j)?;
        let bound = (isqrt(disc.abs()) / 2 + 1) as u64;
        for l in primes_up_to(bound) {
            if builder.order() == cycles.count() {
                break;
            }
            if let Some(f) = QuadForm::prime_form(l as u128, disc.value) {
                builder.add(&cycles.class_of(&f))?;
            }
        }
        if builder.order() != cycles.count() {
            return Err(Error::Inconsistent(format!(
                "prime forms generate {} of {} narrow classes for D={}",
                builder.order(),
                cycles.count(),
                disc.value
            )));
        }
        builder.finish()?
    };
    let j = cycles.negative_class();
    let ordinary = group.quotient(&[j])?;
    let unit_norm = if j == cycles.principal() { -1 } else { 1 };
    Ok(RealClassGroup { disc: *disc, narrow: group.structure.clone(), ordinary, unit_norm, group, cycles })
}

/// Narrow (restricted) class group.
pub fn narrow_class_group_real(disc: &Discriminant) -> Result<AbelianGroupStructure> {
    Ok(class_group_real_full(disc, &ClassGroupConfig::from_env())?.narrow)
}

/// Ordinary class group: the narrow group modulo the class `J`.
pub fn ordinary_class_group_real(disc: &Discriminant) -> Result<AbelianGroupStructure> {
    Ok(class_group_real_full(disc, &ClassGroupConfig::from_env())?.ordinary)
}

/// Walks the cycle of a reduced form until a form with `|a| = 1` appears,
/// feeding every step to `t`; `None` when the class is not principal in the
/// ordinary sense (no such form within `max_steps`).
pub fn walk_to_principal<T: Tracker>(f: QuadForm, sqrt_floor: i128, t: &mut T, max_steps: usize) -> Option<QuadForm> {
    let mut g = f;
    for _ in 0..max_steps {
        if g.a.abs() == 1 {
            return Some(g);
        }
        g = rho_tracked(g, sqrt_floor, t);
        if g == f {
            return None;
        }
    }
    None
}

/// Walks from the reduced principal form to the next form with `|a| = 1`;
/// the accumulated multiplier is `±ε^{±1}` for the fundamental unit `ε`.
pub fn walk_unit<T: Tracker>(d: i128, t: &mut T, max_steps: usize) -> Result<QuadForm> {
    let s = isqrt(d as u128) as i128;
    let b = if (s - d).rem_euclid(2) == 0 { s } else { s - 1 };
    let start = QuadForm { a: 1, b, c: (b * b - d) / 4 };
    let mut g = rho_tracked(start, s, t);
    for _ in 0..max_steps {
        if g.a.abs() == 1 {
            return Ok(g);
        }
        g = rho_tracked(g, s, t);
    }
    Err(Error::Budget(format!("regulator walk for D={d} exceeded {max_steps} steps")))
}

/// Exact element `(x + y √D) / (2 q)` of the field.
#[derive(Debug, Clone)]
pub struct ExactTracker {
    pub d: BigInt,
    pub x: BigInt,
    pub y: BigInt,
    pub q: BigInt,
}

impl ExactTracker {
    pub fn one(d: i128) -> Self {
        ExactTracker { d: BigInt::from(d), x: BigInt::from(2), y: BigInt::zero(), q: BigInt::from(1) }
    }

    fn normalize(&mut self) {
        let g = self.x.gcd(&self.y).gcd(&self.q);
        if !g.is_zero() && g != BigInt::from(1) {
            self.x /= &g;
            self.y /= &g;
            self.q /= &g;
        }
        if self.q.is_negative() {
            self.x = -&self.x;
            self.y = -&self.y;
            self.q = -&self.q;
        }
    }
}

impl Tracker for ExactTracker {
    fn mul_int(&mut self, k: i128) {
        let k = BigInt::from(k);
        self.x *= &k;
        self.y *= &k;
    }

    fn mul_tau_over(&mut self, b: i128, c: i128) {
        let b = BigInt::from(b);
        let x = -&b * &self.x + &self.d * &self.y;
        let y = &self.x - &b * &self.y;
        self.x = x;
        self.y = y;
        self.q *= BigInt::from(2 * c);
        self.normalize();
    }
}

/// Fundamental unit `ε = (x + y √D)/2 > 1` with its norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalUnit {
    pub x: BigInt,
    pub y: BigInt,
    pub norm: i32,
}

/// Fundamental unit of `Q(√m)`, `m > 1` squarefree, from the principal cycle.
pub fn fundamental_unit(m: i128, max_steps: usize) -> Result<FundamentalUnit> {
    if m <= 1 {
        return Err(Error::InvalidInput(format!("radicand {m} must exceed 1")));
    }
    let disc = super::fundamental_discriminant(m)?;
    let mut t = ExactTracker::one(disc.value);
    walk_unit(disc.value, &mut t, max_steps)?;
    t.normalize();
    let (x, rx) = t.x.div_rem(&t.q);
    let (y, ry) = t.y.div_rem(&t.q);
    if !rx.is_zero() || !ry.is_zero() {
        return Err(Error::Inconsistent(format!("regulator walk for m={m} ended on a non-integral element")));
    }
    let (x, y) = (x.abs(), y.abs());
    let n4 = &x * &x - BigInt::from(disc.value) * &y * &y;
    let norm = if n4 == BigInt::from(4) {
        1
    } else if n4 == BigInt::from(-4) {
        -1
    } else {
        return Err(Error::Inconsistent(format!("element of norm {n4}/4 returned as a unit for m={m}")));
    };
    Ok(FundamentalUnit { x, y, norm })
}
