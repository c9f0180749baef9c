//! Successive-maxima scans over imaginary quadratic fields and the normic
//! search for large `p`-class groups.

use serde::{Deserialize, Serialize};

use crate::arith::{isqrt, primes_up_to, squarefree_core, valuation, SegmentInfo};
use crate::error::{Error, Result};
use crate::group::AbelianGroupStructure;

use super::imag::{class_group_imaginary_full, BatchCounts};
use super::{c_kp, fundamental_discriminant, ClassGroupConfig};

/// One emitted row of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    /// The (signed) discriminant.
    pub d: i128,
    pub h: u128,
    /// Number of prime divisors of `D`.
    pub n: usize,
    pub stat: f64,
    pub is_prime_disc: bool,
    pub structure: Option<AbelianGroupStructure>,
    /// Set when the row could not be computed; the other fields are then zero.
    pub error: Option<String>,
}

/// The statistic tracked by [`scan_local_maxima`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Statistic {
    /// `h / (2^{N-1} (√|D|)^ε)`.
    GenusNormalized { eps: f64 },
    /// `h / (√|D|)^ε`.
    Raw { eps: f64 },
    /// `log(h_p) / log √|D|`, emitted when `h_p` reaches a new maximum.
    PExponent { p: u64 },
}

const CHUNK: u64 = 1 << 20;

/// Fundamental imaginary discriminants `-max_abs <= D <= -min_abs` in
/// order of increasing `|D|`, with `(|D|, h, ω(|D|), |D| prime)`.
pub fn for_each_imaginary<F: FnMut(u64, u32, u8, bool)>(min_abs: u64, max_abs: u64, mut f: F) {
    let primes = primes_up_to(isqrt(max_abs as u128) as u64 + 1);
    let mut lo = min_abs.max(3);
    while lo <= max_abs {
        let hi = (lo + CHUNK - 1).min(max_abs);
        let info = SegmentInfo::new(lo, hi, &primes);
        let counts = BatchCounts::new(lo, hi);
        for n in lo..=hi {
            if info.is_neg_fundamental(n) {
                f(n, counts.forms_of(n), info.omega_of(n), info.is_prime(n));
            }
        }
        lo = hi + 1;
    }
}

/// Records where the statistic strictly exceeds the running maximum, over
/// fundamental `D < 0` with `min_abs <= |D| <= max_abs`.
pub fn scan_local_maxima(min_abs: u64, max_abs: u64, stat: Statistic) -> Vec<ScanRecord> {
    let mut out = Vec::new();
    // running maximum: statistic value, or the largest p-power seen
    let mut best = match stat {
        Statistic::PExponent { .. } => 1.0,
        _ => 0.0,
    };
    for_each_imaginary(min_abs, max_abs, |n, h, omega, prime| {
        let sqrt_d = (n as f64).sqrt();
        let (key, value) = match stat {
            Statistic::GenusNormalized { eps } => {
                let c = h as f64 / (2f64.powi(omega as i32 - 1) * sqrt_d.powf(eps));
                (c, c)
            }
            Statistic::Raw { eps } => {
                let c = h as f64 / sqrt_d.powf(eps);
                (c, c)
            }
            Statistic::PExponent { p } => {
                let hp = (p as u128).pow(valuation(h as u128, p as u128));
                (hp as f64, c_kp(hp, n as f64))
            }
        };
        if key > best {
            best = key;
            out.push(ScanRecord {
                d: -(n as i128),
                h: h as u128,
                n: omega as usize,
                stat: value,
                is_prime_disc: prime,
                structure: None,
                error: None,
            });
        }
    });
    out
}

/// Outcome of [`prime_disc_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeDiscReport {
    pub all_prime: bool,
    pub checked: usize,
    pub violations: Vec<i128>,
}

/// Whether every recorded `|D|` is prime.
pub fn prime_disc_report(records: &[ScanRecord]) -> PrimeDiscReport {
    let violations: Vec<i128> = records.iter().filter(|r| !r.is_prime_disc).map(|r| r.d).collect();
    PrimeDiscReport { all_prime: violations.is_empty(), checked: records.len(), violations }
}

/// A row of the normic search `a^2 + m b^2 = 4 q^{p^ρ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormicRecord {
    pub a: u128,
    pub b: u128,
    /// The squarefree `m`; the field is `Q(√-m)`.
    pub m: u128,
    pub record: ScanRecord,
}

/// For each `a` in `[a_min, a_max]` with `B = 4 q^{p^ρ} - a^2 > 0`, writes
/// `B = m b^2` with `m` squarefree, keeps `gcd(a, b) <= 2`, and emits the
/// rows where the `p`-part of the class number of `Q(√-m)` exceeds every
/// previous one (starting from 1). Rows whose class group is out of budget
/// are emitted with their error and do not move the maximum.
pub fn normic_search(
    p: u64,
    rho: u32,
    q: u64,
    a_min: u128,
    a_max: u128,
    cfg: &ClassGroupConfig,
) -> Result<Vec<NormicRecord>> {
    let exp = (p as u32).checked_pow(rho).ok_or_else(|| Error::Budget("p^rho overflows".into()))?;
    let y = (q as u128)
        .checked_pow(exp)
        .and_then(|v| v.checked_mul(4))
        .filter(|&v| v < (1u128 << 100))
        .ok_or_else(|| Error::Budget(format!("4*{q}^({p}^{rho}) exceeds the integer budget")))?;
    let mut best: u128 = 1;
    let mut out = Vec::new();
    let mut a = a_min.max(1);
    while a <= a_max && a * a < y {
        let big_b = y - a * a;
        let (m, b) = squarefree_core(big_b as i128)?;
        let m = m as u128;
        if num_integer::gcd(a, b) > 2 {
            a += 1;
            continue;
        }
        let disc = fundamental_discriminant(-(m as i128))?;
        let d_abs = disc.abs();
        match class_group_imaginary_full(&disc, cfg) {
            Ok(cg) => {
                let hp_struct = cg.structure.p_part(p as u128);
                let hp = hp_struct.order();
                if hp > best {
                    best = hp;
                    out.push(NormicRecord {
                        a,
                        b,
                        m,
                        record: ScanRecord {
                            d: disc.value,
                            h: cg.h(),
                            n: disc.ramified_count,
                            stat: c_kp(hp, d_abs as f64),
                            is_prime_disc: crate::arith::is_prime(d_abs),
                            structure: Some(hp_struct),
                            error: None,
                        },
                    });
                }
            }
            Err(e) if e.is_budget() => out.push(NormicRecord {
                a,
                b,
                m,
                record: ScanRecord {
                    d: disc.value,
                    h: 0,
                    n: disc.ramified_count,
                    stat: 0.0,
                    is_prime_disc: false,
                    structure: None,
                    error: Some(e.to_string()),
                },
            }),
            Err(e) => return Err(e),
        }
        a += 1;
    }
    Ok(out)
}
