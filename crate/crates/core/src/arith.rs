//! Integer utilities: primality, factorization, squarefree decomposition,
//! Kronecker symbols and primes in the residue class 1 mod p.
//!
//! Primality is deterministic below 2^64 (fixed Miller-Rabin witness set).
//! Above 2^64 it runs [`MR_ROUNDS_LARGE`] rounds with bases drawn from a
//! ChaCha stream seeded by `n`, so answers are reproducible; the error
//! probability of a composite passing is below 4^-64.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Miller-Rabin rounds used above 2^64.
pub const MR_ROUNDS_LARGE: usize = 64;

const WITNESSES_64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// `a * b mod m` for any modulus below 2^127.
#[inline]
pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    let (mut a, mut b) = (a % m, b % m);
    let mut r = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            r = add_mod(r, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    r
}

#[inline]
fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let (s, over) = a.overflowing_add(b);
    if over || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

/// `b^e mod m`.
pub fn pow_mod(b: u128, mut e: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut base = b % m;
    let mut r = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    r
}

fn mr_witness(n: u128, d: u128, s: u32, a: u128) -> bool {
    // true when `a` proves n composite
    let a = a % n;
    if a == 0 {
        return false;
    }
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return false;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return false;
        }
    }
    true
}

/// Primality test, deterministic for `n < 2^64`.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &WITNESSES_64 {
        let q = q as u128;
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    if n <= u64::MAX as u128 {
        return !WITNESSES_64.iter().any(|&a| mr_witness(n, d, s, a as u128));
    }
    let mut rng = ChaCha8Rng::seed_from_u64((n as u64) ^ ((n >> 64) as u64));
    (0..MR_ROUNDS_LARGE).all(|_| {
        let a = rng.gen_range(2..n - 1);
        !mr_witness(n, d, s, a)
    })
}

/// Primality test on arbitrary-precision integers.
pub fn is_prime_big(n: &BigUint) -> bool {
    if let Some(v) = n.to_u128() {
        if v < (1u128 << 127) {
            return is_prime(v);
        }
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    let mut rng = ChaCha8Rng::seed_from_u64(n.iter_u64_digits().fold(0u64, |h, w| h.rotate_left(7) ^ w));
    for _ in 0..MR_ROUNDS_LARGE {
        let a = BigUint::from(rng.gen::<u64>() | 2) % &nm1;
        if a < BigUint::from(2u32) {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        let mut composite = true;
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == nm1 {
                composite = false;
                break;
            }
        }
        if composite {
            return false;
        }
    }
    true
}

/// Complete factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub value: u128,
    /// `(prime, exponent)` pairs, primes ascending.
    pub factors: Vec<(u128, u32)>,
}

impl Factorization {
    /// Number of distinct prime divisors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// All positive divisors, unsorted.
    pub fn divisors(&self) -> Vec<u128> {
        let mut out = vec![1u128];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u128;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out
    }

    pub fn product(&self) -> u128 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }
}

/// Effort schedule for [`factor_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorConfig {
    /// Trial division bound.
    pub trial_bound: u64,
    /// Iteration cap for a single Pollard-rho run.
    pub rho_iterations: u64,
    /// Number of rho restarts (different polynomial constants).
    pub rho_restarts: u32,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig { trial_bound: 1_000_000, rho_iterations: 1 << 26, rho_restarts: 16 }
    }
}

/// Factor `n` with the default effort schedule.
pub fn factor(n: u128) -> Result<Factorization> {
    factor_with(n, &FactorConfig::default())
}

/// Factor `n`: trial division, then Brent's variant of Pollard rho.
pub fn factor_with(n: u128, cfg: &FactorConfig) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::InvalidInput("cannot factor 0".into()));
    }
    let mut rest = n;
    let mut primes: Vec<u128> = Vec::new();
    let mut push = |p: u128, rest: &mut u128| {
        while *rest % p == 0 {
            *rest /= p;
            primes.push(p);
        }
    };
    push(2, &mut rest);
    push(3, &mut rest);
    let mut q: u128 = 5;
    let bound = cfg.trial_bound as u128;
    while q <= bound && q * q <= rest {
        push(q, &mut rest);
        push(q + 2, &mut rest);
        q += 6;
    }
    if rest > 1 && q * q > rest {
        primes.push(rest);
        rest = 1;
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        if let Some(r) = perfect_square_root(m) {
            stack.push(r);
            stack.push(r);
            continue;
        }
        let d = (1..=cfg.rho_restarts as u128)
            .find_map(|c| brent_rho(m, c, cfg.rho_iterations))
            .ok_or_else(|| Error::Budget(format!("Pollard rho exhausted on cofactor {m} of {n}")))?;
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    let mut factors: Vec<(u128, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(Factorization { value: n, factors })
}

fn perfect_square_root(n: u128) -> Option<u128> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Floor of the square root.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |s| s <= n) {
        x += 1;
    }
    x
}

fn brent_rho(n: u128, c: u128, max_iter: u64) -> Option<u128> {
    let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
    let (mut y, mut r, mut q) = (2u128, 1u64, 1u128);
    let (mut x, mut ys) = (0u128, 0u128);
    let m = 128u64;
    let mut g = 1u128;
    let mut iters = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
        iters += r;
        if iters > max_iter {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: u128, p: u128) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Decompose `n = core * cofactor^2` with `core` squarefree and of the sign of `n`.
pub fn squarefree_core(n: i128) -> Result<(i128, u128)> {
    if n == 0 {
        return Err(Error::InvalidInput("squarefree core of 0".into()));
    }
    let f = factor(n.unsigned_abs())?;
    let mut core: i128 = n.signum();
    let mut cof: u128 = 1;
    for &(p, e) in &f.factors {
        if e % 2 == 1 {
            core *= p as i128;
        }
        cof *= p.pow(e / 2);
    }
    Ok((core, cof))
}

/// Kronecker symbol `(a | n)`.
pub fn kronecker(a: i128, n: i128) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a;
    let mut n = n;
    let mut k = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                k = -k;
            }
        }
        n >>= v;
    }
    // n odd positive: Jacobi symbol
    a = a.rem_euclid(n);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t % 2 == 1 {
            let r = n % 8;
            if r == 3 || r == 5 {
                k = -k;
            }
        }
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        let r = n % a;
        n = a;
        a = r;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Sieve of Eratosthenes returning all primes `<= n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor table for fast factoring of small integers.
#[derive(Debug, Clone)]
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SpfSieve { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// `(prime, exponent)` list of `n`, which must not exceed the limit.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }
}

/// Ascending primes congruent to 1 mod `p` (all odd primes when `p = 2`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeClassSequence {
    pub p: u64,
    pub primes: Vec<u64>,
}

/// First `count` primes `l ≡ 1 (mod p)`; for `p = 2` the odd primes from 3.
pub fn primes_in_class(p: u64, count: usize) -> PrimeClassSequence {
    let mut primes = Vec::with_capacity(count);
    let (mut c, step) = if p == 2 { (3u64, 2u64) } else { (2 * p + 1, 2 * p) };
    while primes.len() < count {
        if is_prime(c as u128) {
            primes.push(c);
        }
        c += step;
    }
    PrimeClassSequence { p, primes }
}

/// `π(x; 1, p)`: number of primes `l <= x` with `l ≡ 1 (mod p)`, by sieve.
pub fn pi_class_count(x: u64, p: u64) -> u64 {
    primes_up_to(x).into_iter().filter(|&l| if p == 2 { l > 2 } else { l % p == 1 }).count() as u64
}

/// Which of the two analytic inequalities failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MvViolation {
    /// `l_k <= ((p-1)/2) k log(l_k/p)`.
    LowerBound { k: usize, l_k: u64, rhs: f64 },
    /// `pi(l_k;1,p) > 2 l_k / ((p-1) log(l_k/p))`.
    CountBound { k: usize, l_k: u64, rhs: f64 },
}

/// Outcome of [`mv_bounds_hold`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvReport {
    pub p: u64,
    pub k_max: usize,
    pub holds: bool,
    pub first_violation: Option<MvViolation>,
    /// The largest prime examined, `l_{k_max}`.
    pub last_prime: u64,
}

/// Check `l_k > ((p-1)/2) k log(l_k/p)` and `π(l_k;1,p) <= 2 l_k/((p-1) log(l_k/p))`
/// for every `k <= k_max`.
pub fn mv_bounds_hold(k_max: usize, p: u64) -> MvReport {
    let seq = primes_in_class(p, k_max);
    let half = (p as f64 - 1.0) / 2.0;
    let mut first_violation = None;
    for (i, &l) in seq.primes.iter().enumerate() {
        let k = i + 1;
        let lg = (l as f64 / p as f64).ln();
        let rhs = half * k as f64 * lg;
        if (l as f64) <= rhs {
            first_violation = Some(MvViolation::LowerBound { k, l_k: l, rhs });
            break;
        }
        let bound = 2.0 * l as f64 / ((p as f64 - 1.0) * lg);
        if k as f64 > bound {
            first_violation = Some(MvViolation::CountBound { k, l_k: l, rhs: bound });
            break;
        }
    }
    MvReport {
        p,
        k_max,
        holds: first_violation.is_none(),
        first_violation,
        last_prime: seq.primes.last().copied().unwrap_or(0),
    }
}

/// Multiplicative order of `a` modulo the prime `p` (`gcd(a, p) = 1`).
pub fn multiplicative_order(a: u64, p: u64) -> u64 {
    let n = p - 1;
    let f = factor(n as u128).expect("small factorization");
    let mut ord = n;
    for (q, _) in f.factors {
        let q = q as u64;
        while ord % q == 0 && pow_mod(a as u128, (ord / q) as u128, p as u128) == 1 {
            ord /= q;
        }
    }
    ord
}

/// Integer square root for big integers.
pub fn isqrt_big(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    n.sqrt()
}

/// A square root of `a` modulo the prime `p` (Tonelli-Shanks), if one exists.
pub fn sqrt_mod_prime(a: u128, p: u128) -> Option<u128> {
    let a = a % p;
    if a == 0 || p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2u128;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1u128 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Per-integer factorization summary over a window `[lo, hi]`, from a
/// segmented sieve by the primes up to `√hi`.
#[derive(Debug, Clone)]
pub struct SegmentInfo {
    pub lo: u64,
    /// `v_2(n)`.
    pub v2: Vec<u8>,
    /// Number of distinct prime divisors.
    pub omega: Vec<u8>,
    /// Whether the odd part of `n` is squarefree.
    pub odd_squarefree: Vec<bool>,
}

impl SegmentInfo {
    /// `primes` must contain every prime up to `√hi`.
    pub fn new(lo: u64, hi: u64, primes: &[u64]) -> Self {
        let lo = lo.max(1);
        let len = (hi - lo + 1) as usize;
        let mut rest: Vec<u64> = (lo..=hi).collect();
        let mut v2 = vec![0u8; len];
        let mut omega = vec![0u8; len];
        let mut odd_squarefree = vec![true; len];
        for &q in primes {
            if q * q > hi {
                break;
            }
            let first = lo.div_ceil(q) * q;
            let mut m = first;
            while m <= hi {
                let i = (m - lo) as usize;
                let mut e = 0u8;
                while rest[i] % q == 0 {
                    rest[i] /= q;
                    e += 1;
                }
                omega[i] += 1;
                if q == 2 {
                    v2[i] = e;
                } else if e > 1 {
                    odd_squarefree[i] = false;
                }
                m += q;
            }
        }
        for i in 0..len {
            if rest[i] > 1 {
                omega[i] += 1;
                if rest[i] == 2 {
                    v2[i] = 1;
                }
            }
        }
        SegmentInfo { lo, v2, omega, odd_squarefree }
    }

    pub fn omega_of(&self, n: u64) -> u8 {
        self.omega[(n - self.lo) as usize]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        let i = (n - self.lo) as usize;
        n > 1 && self.omega[i] == 1 && self.odd_squarefree[i] && self.v2[i] <= 1 && (self.v2[i] == 0 || n == 2)
    }

    /// Whether `-n` is a fundamental discriminant.
    pub fn is_neg_fundamental(&self, n: u64) -> bool {
        let i = (n - self.lo) as usize;
        if !self.odd_squarefree[i] {
            return false;
        }
        let odd = n >> self.v2[i];
        match self.v2[i] {
            0 => odd % 4 == 3,
            2 => odd % 4 == 1,
            3 => true,
            _ => false,
        }
    }

    /// Whether `n` is a positive fundamental discriminant.
    pub fn is_pos_fundamental(&self, n: u64) -> bool {
        let i = (n - self.lo) as usize;
        if n == 1 || !self.odd_squarefree[i] {
            return false;
        }
        let odd = n >> self.v2[i];
        match self.v2[i] {
            0 => odd % 4 == 1,
            2 => odd % 4 == 3,
            3 => true,
            _ => false,
        }
    }
}
