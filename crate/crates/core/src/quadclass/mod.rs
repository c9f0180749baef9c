//! Class groups of quadratic fields through binary quadratic forms.
//!
//! Imaginary fields use reduced definite forms; real fields use cycles of
//! reduced indefinite forms, which give the narrow (restricted) class group.

pub mod form;
pub mod imag;
pub mod real;
pub mod scan;

use serde::{Deserialize, Serialize};

use crate::arith::{factor, squarefree_core};
use crate::error::{Error, Result};
use crate::group::AbelianGroupStructure;

pub use form::QuadForm;

/// A fundamental discriminant with its radicand and number of prime divisors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Discriminant {
    pub value: i128,
    pub radicand: i128,
    pub ramified_count: usize,
}

impl Discriminant {
    pub fn is_imaginary(&self) -> bool {
        self.value < 0
    }

    pub fn abs(&self) -> u128 {
        self.value.unsigned_abs()
    }

    /// `log √|D|`.
    pub fn log_sqrt(&self) -> f64 {
        0.5 * (self.abs() as f64).ln()
    }
}

/// Discriminant of `Q(√m)`: `m` when `m ≡ 1 (mod 4)`, else `4m`.
pub fn fundamental_discriminant(m: i128) -> Result<Discriminant> {
    if m == 0 || m == 1 {
        return Err(Error::InvalidInput(format!("radicand {m} does not define a quadratic field")));
    }
    let (core, cof) = squarefree_core(m)?;
    if cof != 1 || core != m {
        return Err(Error::InvalidInput(format!("radicand {m} is not squarefree")));
    }
    let value = if m.rem_euclid(4) == 1 { m } else { 4 * m };
    let ramified_count = factor(value.unsigned_abs())?.omega();
    Ok(Discriminant { value, radicand: m, ramified_count })
}

/// Interprets `d` as a fundamental discriminant, rejecting anything else.
pub fn discriminant_from_value(d: i128) -> Result<Discriminant> {
    let m = match d.rem_euclid(4) {
        1 => d,
        0 => {
            let m = d / 4;
            if m.rem_euclid(4) == 1 {
                return Err(Error::InvalidInput(format!("{d} is not fundamental")));
            }
            m
        }
        _ => return Err(Error::InvalidInput(format!("{d} is not a discriminant"))),
    };
    let disc = fundamental_discriminant(m)?;
    if disc.value != d {
        return Err(Error::InvalidInput(format!("{d} is not fundamental")));
    }
    Ok(disc)
}

/// Fast fundamental-discriminant test from a smallest-prime-factor sieve
/// covering `|d|`.
pub fn is_fundamental_with(d: i64, sieve: &crate::arith::SpfSieve) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let odd = if d.rem_euclid(4) == 1 {
        d.unsigned_abs()
    } else if d % 4 == 0 {
        let m = d / 4;
        match m.rem_euclid(4) {
            2 => m.unsigned_abs() / 2,
            3 => m.unsigned_abs(),
            _ => return false,
        }
    } else {
        return false;
    };
    sieve.factor(odd).iter().all(|&(_, e)| e == 1)
}

/// `(N, Δ)` with `N` the number of ramified primes and
/// `Δ = v_2(h) - (N - 1)` for the restricted class group; errors if the
/// 2-rank differs from `N - 1`.
pub fn genus_delta(disc: &Discriminant) -> Result<(usize, u32)> {
    let g = if disc.is_imaginary() { imag::class_group_imaginary(disc)? } else { real::narrow_class_group_real(disc)? };
    genus_delta_from(disc, &g)
}

/// [`genus_delta`] with an already computed restricted class group.
pub fn genus_delta_from(disc: &Discriminant, g: &AbelianGroupStructure) -> Result<(usize, u32)> {
    let n = disc.ramified_count;
    let rank = g.p_rank(2);
    if rank + 1 != n {
        return Err(Error::Inconsistent(format!(
            "2-rank {rank} of the class group of D={} differs from N-1={}",
            disc.value,
            n - 1
        )));
    }
    Ok((n, g.v_p_order(2) - (n as u32 - 1)))
}

/// `log(h_p) / log √|D|`.
pub fn c_kp(h_p: u128, d_abs: f64) -> f64 {
    if h_p <= 1 {
        return 0.0;
    }
    (h_p as f64).ln() / (0.5 * d_abs.ln())
}

/// The `p`-Sylow subgroup of `g`.
pub fn p_part(g: &AbelianGroupStructure, p: u128) -> AbelianGroupStructure {
    g.p_part(p)
}

/// Size limits for class group computations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassGroupConfig {
    /// Largest `|D|` handled with unconditional generator bounds.
    pub enum_cap: u128,
    /// Largest `|D|` handled at all (generator bound conditional on GRH).
    pub bsgs_cap: u128,
    /// Largest real discriminant whose reduced forms are enumerated.
    pub real_cap: u128,
    /// Primes below this bound enter the Euler-product estimate of `h`.
    pub euler_bound: u64,
    /// Largest class group built element by element.
    pub group_cap: usize,
}

impl Default for ClassGroupConfig {
    fn default() -> Self {
        ClassGroupConfig {
            enum_cap: 10_000_000,
            bsgs_cap: 10_000_000_000_000,
            real_cap: 1_000_000_000,
            euler_bound: 1 << 16,
            group_cap: 1 << 24,
        }
    }
}

impl ClassGroupConfig {
    /// Defaults overridden by `EPSCLASS_ENUM_CAP`, `EPSCLASS_BSGS_CAP` and
    /// `EPSCLASS_GROUP_CAP` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(v) = std::env::var("EPSCLASS_ENUM_CAP").ok().and_then(|s| s.parse().ok()) {
            cfg.enum_cap = v;
        }
        if let Some(v) = std::env::var("EPSCLASS_BSGS_CAP").ok().and_then(|s| s.parse().ok()) {
            cfg.bsgs_cap = v;
        }
        if let Some(v) = std::env::var("EPSCLASS_GROUP_CAP").ok().and_then(|s| s.parse().ok()) {
            cfg.group_cap = v;
        }
        cfg
    }
}
