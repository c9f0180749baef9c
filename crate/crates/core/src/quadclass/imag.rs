//! Imaginary quadratic class groups.

use crate::arith::{isqrt, kronecker, primes_up_to};
use crate::error::{Error, Result};
use crate::group::{AbelianGroupStructure, FiniteGroup, GroupLaw, SubgroupBuilder};

use super::form::{compose_definite, QuadForm};
use super::{ClassGroupConfig, Discriminant};

/// The class group law on reduced definite forms of one discriminant.
#[derive(Debug, Clone, Copy)]
pub struct DefiniteLaw {
    pub d: i128,
}

impl GroupLaw for DefiniteLaw {
    type Elem = QuadForm;

    fn identity(&self) -> QuadForm {
        QuadForm::principal(self.d)
    }

    fn op(&self, a: &QuadForm, b: &QuadForm) -> QuadForm {
        compose_definite(a, b)
    }
}

/// All reduced forms of discriminant `d < 0` (primitive or not).
pub fn reduced_forms_definite(d: i128) -> Vec<QuadForm> {
    let n = d.unsigned_abs();
    let amax = isqrt(n / 3) as i128;
    let mut out = Vec::new();
    for a in 1..=amax {
        for b in -a + 1..=a {
            if (b - d) % 2 != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            out.push(QuadForm { a, b, c });
        }
    }
    out
}

/// Number of reduced primitive forms of discriminant `d < 0`.
pub fn class_number_enum(d: i128) -> u64 {
    reduced_forms_definite(d).into_iter().filter(QuadForm::is_primitive).count() as u64
}

/// Prime forms `(l, b, c)` for primes `l <= bound` that are not inert,
/// skipping `exclude`.
pub fn prime_forms(d: i128, bound: u64, exclude: Option<u128>) -> Vec<(u128, QuadForm)> {
    primes_up_to(bound)
        .into_iter()
        .map(u128::from)
        .filter(|&l| Some(l) != exclude)
        .filter_map(|l| QuadForm::prime_form(l, d).map(|f| (l, f)))
        .collect()
}

/// `h` predicted by the Euler product of `L(1, χ_D)` over primes below `bound`.
pub fn euler_estimate(d: i128, bound: u64) -> f64 {
    let mut l1 = 1.0f64;
    for l in primes_up_to(bound) {
        let chi = kronecker(d, l as i128) as f64;
        l1 /= 1.0 - chi / l as f64;
    }
    let w = match d {
        -3 => 6.0,
        -4 => 4.0,
        _ => 2.0,
    };
    w * (d.unsigned_abs() as f64).sqrt() * l1 / (2.0 * std::f64::consts::PI)
}

/// A computed imaginary class group.
pub struct ImagClassGroup {
    pub disc: Discriminant,
    pub structure: AbelianGroupStructure,
    /// True when the generator bound relies on the Riemann hypothesis for `L(s, χ_D)`.
    pub grh_conditional: bool,
    pub euler_estimate: f64,
    pub group: FiniteGroup<QuadForm>,
}

impl ImagClassGroup {
    pub fn h(&self) -> u128 {
        self.structure.order()
    }
}

/// Bound on the norms of prime ideals generating the class group: the
/// reduced-form bound `√(|D|/3)` up to the enumeration cap, Bach's bound
/// `6 log^2 |D|` above it.
pub fn generator_bound(d_abs: u128, cfg: &ClassGroupConfig) -> (u64, bool) {
    if d_abs <= cfg.enum_cap {
        (isqrt(d_abs / 3).max(2) as u64, false)
    } else {
        let l = (d_abs as f64).ln();
        ((6.0 * l * l).ceil() as u64, true)
    }
}

/// Class group with discrete logarithms.
pub fn class_group_imaginary_full(disc: &Discriminant, cfg: &ClassGroupConfig) -> Result<ImagClassGroup> {
    if !disc.is_imaginary() {
        return Err(Error::InvalidInput(format!("D={} is not negative", disc.value)));
    }
    let d_abs = disc.abs();
    if d_abs > cfg.bsgs_cap {
        return Err(Error::CapExceeded { what: "|D|", value: d_abs.to_string(), cap: cfg.bsgs_cap.to_string() });
    }
    let law = DefiniteLaw { d: disc.value };
    let (bound, grh) = generator_bound(d_abs, cfg);
    let mut builder = SubgroupBuilder::with_limit(&law, cfg.group_cap);
    for (_, f) in prime_forms(disc.value, bound, None) {
        let g = super::form::reduce_definite(f);
        builder.add(&g)?;
    }
    let group = builder.finish()?;
    let estimate = if grh { euler_estimate(disc.value, cfg.euler_bound) } else { f64::NAN };
    if grh {
        let ratio = group.order() as f64 / estimate;
        if !(0.5..=2.0).contains(&ratio) {
            return Err(Error::Inconsistent(format!(
                "class number {} far from the Euler-product estimate {estimate:.1} for D={}",
                group.order(),
                disc.value
            )));
        }
    }
    Ok(ImagClassGroup {
        disc: *disc,
        structure: group.structure.clone(),
        grh_conditional: grh,
        euler_estimate: estimate,
        group,
    })
}

/// Structure of the class group of an imaginary quadratic field.
pub fn class_group_imaginary(disc: &Discriminant) -> Result<AbelianGroupStructure> {
    Ok(class_group_imaginary_full(disc, &ClassGroupConfig::from_env())?.structure)
}

/// Reduced-form counts for every `|D|` in a window, from one sweep over
/// `(a, b, c)`.
#[derive(Debug, Clone)]
pub struct BatchCounts {
    pub start: u64,
    /// Number of reduced forms of discriminant `-(start + i)`.
    pub forms: Vec<u32>,
    /// How many of them are ambiguous (`b = 0`, `b = a` or `a = c`).
    pub ambiguous: Vec<u16>,
}

impl BatchCounts {
    /// Counts for `start <= |D| <= end`; for fundamental `D` every form is
    /// primitive, so the entries are class numbers and `#Cl[2]`.
    pub fn new(start: u64, end: u64) -> Self {
        let len = (end - start + 1) as usize;
        let mut forms = vec![0u32; len];
        let mut ambiguous = vec![0u16; len];
        let mut a: i64 = 1;
        while 3 * a * a <= end as i64 {
            for b in -a + 1..=a {
                let b2 = b * b;
                let four_a = 4 * a;
                let lo = ((start as i64 + b2) + four_a - 1) / four_a;
                let mut c = lo.max(a);
                if b < 0 && c == a {
                    c += 1;
                }
                let mut n = four_a * c - b2;
                while n <= end as i64 {
                    let i = (n - start as i64) as usize;
                    forms[i] += 1;
                    if b == 0 || b == a || c == a {
                        ambiguous[i] += 1;
                    }
                    n += four_a;
                    c += 1;
                }
            }
            a += 1;
        }
        BatchCounts { start, forms, ambiguous }
    }

    pub fn forms_of(&self, d_abs: u64) -> u32 {
        self.forms[(d_abs - self.start) as usize]
    }

    pub fn ambiguous_of(&self, d_abs: u64) -> u16 {
        self.ambiguous[(d_abs - self.start) as usize]
    }
}
