//! Finite abelian `p`-groups with an automorphism `σ` of order dividing `p`,
//! and the filtration by the kernels `M_i = ker (1 - σ)^i`.
//!
//! The quotient orders `#(M_{i+1}/M_i) = p^{N-1-t_i}` define the sequence
//! `t_0 = 0 <= t_1 <= ... <= t_m = N - 1`, from which the `p^r`-ranks of `M`
//! follow when `M` is a module over `Z_p[ζ_p]`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::valuation;
use crate::error::{Error, Result};
use crate::group::AbelianGroupStructure;
use crate::linalg::{smith_int, IntMatrix};
use crate::quadclass::{imag::class_group_imaginary, real::narrow_class_group_real, Discriminant};

/// A finite `p`-group `Z^g / (columns of relations)` with the action of a
/// generator `σ` of a cyclic group of order `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitePModule {
    pub p: u64,
    pub gens: Vec<String>,
    /// `g x r` matrix whose columns are relations.
    pub relations: IntMatrix,
    /// `g x g` matrix; column `j` is the image of generator `j`.
    pub sigma: IntMatrix,
    /// Number of ramified primes when the module comes from a field.
    pub declared_n: Option<usize>,
}

/// A subgroup given by generators in the original coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    pub order: u128,
    pub generators: Vec<Vec<i128>>,
}

/// Output of [`filtration`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiltrationResult {
    pub p: u64,
    /// `#M_0 = 1, #M_1, ..., #M_m = #M`.
    pub chain: Vec<u128>,
    pub m: usize,
    /// `t_0, ..., t_m`.
    pub t: Vec<u32>,
    pub n: usize,
}

impl FiltrationResult {
    /// `log_p #M - (N - 1)`.
    pub fn big_delta(&self) -> u32 {
        let v: u32 = self.t.iter().take(self.m).map(|&t| self.n as u32 - 1 - t).sum();
        v - (self.n as u32 - 1)
    }
}

/// The module in Smith coordinates `⊕ Z/d_i` (all `d_i > 1`).
#[derive(Debug, Clone)]
struct Normal {
    p: u64,
    d: Vec<i128>,
    /// Action of `σ` on Smith coordinates, row `i` reduced mod `d_i`.
    sigma: IntMatrix,
    /// Columns express Smith generators in the original generators.
    to_orig: IntMatrix,
}

fn mat_mul_mod(a: &IntMatrix, b: &IntMatrix, d: &[i128]) -> Result<IntMatrix> {
    let k = d.len();
    let mut out = vec![vec![0i128; k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut acc = 0i128;
            for (l, bl) in b.iter().enumerate() {
                let term =
                    a[i][l].checked_mul(bl[j]).ok_or_else(|| Error::Budget("overflow in module arithmetic".into()))?;
                acc = (acc + term.rem_euclid(d[i])).rem_euclid(d[i]);
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}

impl FinitePModule {
    /// Builds and validates a module.
    pub fn new(p: u64, relations: IntMatrix, sigma: IntMatrix) -> Result<Self> {
        let g = sigma.len();
        let gens = (0..g).map(|i| format!("g{i}")).collect();
        let m = FinitePModule { p, gens, relations, sigma, declared_n: None };
        m.normal()?;
        Ok(m)
    }

    /// `Z/p^{e_1} x ...` with `σ` acting as `x -> x^s` on every generator.
    pub fn diagonal(p: u64, exponents: &[u32], s: i128) -> Result<Self> {
        let g = exponents.len();
        let mut rel = vec![vec![0i128; g]; g];
        let mut sigma = vec![vec![0i128; g]; g];
        for (i, &e) in exponents.iter().enumerate() {
            rel[i][i] = (p as i128).pow(e);
            sigma[i][i] = s;
        }
        Self::new(p, rel, sigma)
    }

    /// Direct sum.
    pub fn direct_sum(&self, other: &FinitePModule) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::InvalidInput("direct sum of modules for different primes".into()));
        }
        let (g1, g2) = (self.sigma.len(), other.sigma.len());
        let (r1, r2) = (self.relations.first().map_or(0, Vec::len), other.relations.first().map_or(0, Vec::len));
        let mut rel = vec![vec![0i128; r1 + r2]; g1 + g2];
        let mut sigma = vec![vec![0i128; g1 + g2]; g1 + g2];
        for i in 0..g1 {
            rel[i][..r1].copy_from_slice(&self.relations[i]);
            sigma[i][..g1].copy_from_slice(&self.sigma[i]);
        }
        for i in 0..g2 {
            rel[g1 + i][r1..].copy_from_slice(&other.relations[i]);
            sigma[g1 + i][g1..].copy_from_slice(&other.sigma[i]);
        }
        Self::new(self.p, rel, sigma)
    }

    fn normal(&self) -> Result<Normal> {
        let g = self.sigma.len();
        if self.relations.len() != g || self.sigma.iter().any(|r| r.len() != g) {
            return Err(Error::InvalidInput("relation and action matrices must have one row per generator".into()));
        }
        if g == 0 {
            return Ok(Normal { p: self.p, d: Vec::new(), sigma: Vec::new(), to_orig: Vec::new() });
        }
        let rel: IntMatrix = if self.relations[0].is_empty() { vec![vec![0]; g] } else { self.relations.clone() };
        let snf = smith_int(&rel, g)?;
        let pp = self.p as i128;
        let mut keep = Vec::new();
        for (i, &d) in snf.diag.iter().enumerate() {
            if d == 0 {
                return Err(Error::Infinite("relations do not have full rank".into()));
            }
            if d > 1 {
                if (d as u128) != (self.p as u128).pow(valuation(d as u128, self.p as u128)) {
                    return Err(Error::InvalidInput(format!("elementary divisor {d} is not a power of {pp}")));
                }
                keep.push(i);
            }
        }
        let d: Vec<i128> = keep.iter().map(|&i| snf.diag[i]).collect();
        // σ' = P σ P^{-1} restricted to the kept coordinates
        let mut sp = vec![vec![0i128; g]; g];
        for i in 0..g {
            for j in 0..g {
                let mut acc = 0i128;
                for l in 0..g {
                    acc = acc
                        .checked_add(
                            snf.p[i][l]
                                .checked_mul(self.sigma[l][j])
                                .ok_or_else(|| Error::Budget("overflow in module arithmetic".into()))?,
                        )
                        .ok_or_else(|| Error::Budget("overflow in module arithmetic".into()))?;
                }
                sp[i][j] = acc;
            }
        }
        let k = keep.len();
        // rows of σ' for kept coordinates, all columns
        let mut full = vec![vec![0i128; g]; k];
        for (a, &i) in keep.iter().enumerate() {
            for j in 0..g {
                let mut acc = 0i128;
                for l in 0..g {
                    let term = sp[i][l]
                        .rem_euclid(d[a])
                        .checked_mul(snf.p_inv[l][j].rem_euclid(d[a]))
                        .ok_or_else(|| Error::Budget("overflow in module arithmetic".into()))?;
                    acc = (acc + term.rem_euclid(d[a])).rem_euclid(d[a]);
                }
                full[a][j] = acc;
            }
        }
        for (j, &dj) in snf.diag.iter().enumerate() {
            for (a, &da) in d.iter().enumerate() {
                if full[a][j].checked_mul(dj).map(|v| v % da) != Some(0) {
                    return Err(Error::InvalidInput("sigma does not preserve the relations".into()));
                }
            }
        }
        let sigma: IntMatrix = full.iter().map(|row| keep.iter().map(|&j| row[j]).collect()).collect();
        let to_orig: IntMatrix = (0..g).map(|l| keep.iter().map(|&j| snf.p_inv[l][j]).collect()).collect();
        let nm = Normal { p: self.p, d, sigma, to_orig };
        // σ^p = 1
        let mut pw = identity(k);
        for _ in 0..self.p {
            pw = mat_mul_mod(&nm.sigma, &pw, &nm.d)?;
        }
        if pw != identity_mod(k, &nm.d) {
            return Err(Error::InvalidInput(format!("sigma^{} is not the identity", self.p)));
        }
        Ok(nm)
    }

    /// An isomorphic module with diagonal relations `p^{e_1}, p^{e_2}, ...`
    /// (increasing) and `σ` written in the new generators.
    pub fn smith_form(&self) -> Result<FinitePModule> {
        let nm = self.normal()?;
        let k = nm.d.len();
        let rel: IntMatrix = (0..k).map(|i| (0..k).map(|j| if i == j { nm.d[i] } else { 0 }).collect()).collect();
        let mut m = FinitePModule::new(self.p, rel, nm.sigma)?;
        m.declared_n = self.declared_n;
        Ok(m)
    }

    /// `#M`.
    pub fn order(&self) -> Result<u128> {
        Ok(self.normal()?.d.iter().map(|&x| x as u128).product())
    }

    /// Group structure of `M`.
    pub fn structure(&self) -> Result<AbelianGroupStructure> {
        let d: Vec<u128> = self.normal()?.d.iter().map(|&x| x as u128).collect();
        AbelianGroupStructure::from_cyclic_orders(&d)
    }
}

/// `#M`, the product of the elementary divisors of the presentation.
pub fn module_order(m: &FinitePModule) -> Result<u128> {
    m.order()
}

fn identity(k: usize) -> IntMatrix {
    (0..k).map(|i| (0..k).map(|j| i128::from(i == j)).collect()).collect()
}

fn identity_mod(k: usize, d: &[i128]) -> IntMatrix {
    (0..k).map(|i| (0..k).map(|j| i128::from(i == j).rem_euclid(d[i])).collect()).collect()
}

/// A full-rank lattice `L` with `D Z^k ⊂ L ⊂ Z^k`, stored by `k` vectors
/// that generate `L` together with `D Z^k`.
#[derive(Debug, Clone)]
struct Lattice {
    basis: IntMatrix,
    /// `[L : D Z^k]`, the order of `L / D Z^k` in `M`.
    order: u128,
}

fn lattice_from(gens: &[Vec<i128>], d: &[i128]) -> Result<Lattice> {
    let k = d.len();
    if k == 0 {
        return Ok(Lattice { basis: Vec::new(), order: 1 });
    }
    // columns: the generators reduced mod d, then d_i e_i
    let mut a = vec![Vec::with_capacity(gens.len() + k); k];
    for g in gens {
        for i in 0..k {
            a[i].push(g[i].rem_euclid(d[i]));
        }
    }
    for i in 0..k {
        for j in 0..k {
            a[i].push(if i == j { d[i] } else { 0 });
        }
    }
    let snf = smith_int(&a, k)?;
    let mut basis = vec![vec![0i128; k]; k];
    let mut det: u128 = 1;
    for j in 0..k {
        let s = snf.diag[j];
        det *= s as u128;
        for i in 0..k {
            basis[i][j] = (snf.p_inv[i][j].checked_mul(s))
                .ok_or_else(|| Error::Budget("overflow in lattice basis".into()))?
                .rem_euclid(d[i]);
        }
    }
    let full: u128 = d.iter().map(|&x| x as u128).product();
    Ok(Lattice { basis, order: full / det })
}

fn columns(m: &IntMatrix) -> Vec<Vec<i128>> {
    let k = m.len();
    let c = m.first().map_or(0, Vec::len);
    (0..c).map(|j| (0..k).map(|i| m[i][j]).collect()).collect()
}

/// `{x : φ x ∈ L}` for an endomorphism `φ` of `M`.
fn preimage(phi: &IntMatrix, target: &Lattice, d: &[i128]) -> Result<Lattice> {
    let k = d.len();
    if k == 0 {
        return Ok(Lattice { basis: Vec::new(), order: 1 });
    }
    // integer kernel of [φ | B | D]: rows of the row transform of its transpose
    let n = 3 * k;
    let mut at = vec![vec![0i128; k]; n];
    for i in 0..k {
        for j in 0..k {
            at[j][i] = phi[i][j];
            at[k + j][i] = target.basis[i][j];
        }
        at[2 * k + i][i] = d[i];
    }
    let snf = smith_int(&at, n)?;
    let mut gens = Vec::new();
    for (j, &s) in snf.diag.iter().enumerate() {
        if s == 0 {
            gens.push(snf.p[j][..k].to_vec());
        }
    }
    lattice_from(&gens, d)
}

fn one_minus_sigma(nm: &Normal) -> IntMatrix {
    let k = nm.d.len();
    (0..k).map(|i| (0..k).map(|j| (i128::from(i == j) - nm.sigma[i][j]).rem_euclid(nm.d[i])).collect()).collect()
}

fn to_subgroup(nm: &Normal, l: &Lattice) -> Subgroup {
    let generators = columns(&l.basis)
        .into_iter()
        .filter(|c| c.iter().zip(&nm.d).any(|(x, d)| x % d != 0))
        .map(|c| nm.to_orig.iter().map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum()).collect())
        .collect();
    Subgroup { order: l.order, generators }
}

/// `M^G = ker(σ - 1)`.
pub fn fixed_subgroup(m: &FinitePModule) -> Result<Subgroup> {
    let nm = m.normal()?;
    let zero = lattice_from(&[], &nm.d)?;
    let l = preimage(&one_minus_sigma(&nm), &zero, &nm.d)?;
    Ok(to_subgroup(&nm, &l))
}

fn chain_to_result(p: u64, chain: Vec<u128>, n: usize) -> Result<FiltrationResult> {
    let pp = p as u128;
    let m = chain.len() - 1;
    let mut t = Vec::with_capacity(m + 1);
    for w in chain.windows(2) {
        let q = w[1] / w[0];
        let v = valuation(q, pp);
        if w[1] % w[0] != 0 || pp.pow(v) != q || v as usize + 1 > n {
            return Err(Error::Inconsistent(format!(
                "quotient of order {q} is not a power of {p} at most {p}^{}",
                n - 1
            )));
        }
        t.push((n - 1) as u32 - v);
    }
    t.push(n as u32 - 1);
    if t[0] != 0 {
        return Err(Error::Inconsistent(format!(
            "#M^G = {} contradicts the declared N = {n}",
            chain.get(1).copied().unwrap_or(1)
        )));
    }
    Ok(FiltrationResult { p, chain, m, t, n })
}

fn step_limit(nm: &Normal) -> usize {
    let e: u32 = nm.d.iter().map(|&d| valuation(d as u128, nm.p as u128)).sum();
    (e as usize + 1) * nm.p as usize + 2
}

/// The filtration by direct kernels `M_i = ker (1 - σ)^i`, until `M_m = M`.
/// `n` is the declared number of ramified primes; an error is returned when
/// `#M_1 != p^{n-1}` or a quotient exceeds `p^{n-1}`.
pub fn filtration(m: &FinitePModule, n: usize) -> Result<FiltrationResult> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let nm = m.normal()?;
    let total: u128 = nm.d.iter().map(|&x| x as u128).product();
    let phi = one_minus_sigma(&nm);
    let zero = lattice_from(&[], &nm.d)?;
    let mut chain = vec![1u128];
    let mut pw = identity_mod(nm.d.len(), &nm.d);
    while *chain.last().unwrap() != total {
        if chain.len() > step_limit(&nm) {
            return Err(Error::Inconsistent("1 - sigma is not nilpotent".into()));
        }
        pw = mat_mul_mod(&phi, &pw, &nm.d)?;
        chain.push(preimage(&pw, &zero, &nm.d)?.order);
    }
    chain_to_result(m.p, chain, n)
}

/// The same filtration computed as `M_{i+1}/M_i = (M/M_i)^G`, i.e. as
/// successive preimages of `M_i` under `1 - σ`.
pub fn filtration_iterated(m: &FinitePModule, n: usize) -> Result<FiltrationResult> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let nm = m.normal()?;
    let total: u128 = nm.d.iter().map(|&x| x as u128).product();
    let phi = one_minus_sigma(&nm);
    let mut cur = lattice_from(&[], &nm.d)?;
    let mut chain = vec![1u128];
    while cur.order != total {
        if chain.len() > step_limit(&nm) {
            return Err(Error::Inconsistent("1 - sigma is not nilpotent".into()));
        }
        cur = preimage(&phi, &cur, &nm.d)?;
        chain.push(cur.order);
    }
    chain_to_result(m.p, chain, n)
}

/// `N` read off the module: `#M^G = p^{N-1}`.
pub fn inferred_n(m: &FinitePModule) -> Result<usize> {
    let fixed = fixed_subgroup(m)?;
    Ok(valuation(fixed.order, m.p as u128) as usize + 1)
}

fn t_at(t: &[u32], i: usize, n: usize) -> u32 {
    t.get(i).copied().unwrap_or(n as u32 - 1)
}

/// `(rank, δ)` with `rank = (p-1)(N-1) - Σ_{i=1}^{p-2} t_i` and
/// `δ = rank - (N-1)`; entries of `t` beyond its length count as `N - 1`.
pub fn rank_from_t(p: u64, n: usize, t: &[u32]) -> (u32, u32) {
    let base = n as u32 - 1;
    let s: u32 = (1..=(p as usize).saturating_sub(2)).map(|i| t_at(t, i, n)).sum();
    let rank = (p as u32 - 1) * base - s;
    (rank, rank - base)
}

/// `p^r`-ranks for `r = 1, 2, ...` up to the last nonzero one.
pub fn pr_ranks(p: u64, n: usize, t: &[u32]) -> Vec<u32> {
    let w = p as usize - 1;
    let mut out = Vec::new();
    for r in 1.. {
        let s: u32 = ((r - 1) * w..r * w).map(|i| n as u32 - 1 - t_at(t, i, n)).sum();
        if s == 0 {
            break;
        }
        out.push(s);
    }
    out
}

/// `#M = p^{Σ_{i=0}^{m-1} (N-1-t_i)}`.
pub fn order_identity_check(r: &FiltrationResult) -> bool {
    let e: u32 = r.t.iter().take(r.m).map(|&t| r.n as u32 - 1 - t).sum();
    let total = *r.chain.last().unwrap_or(&1);
    (r.p as u128).checked_pow(e) == Some(total)
}

/// Sequences `t_0..t_{m}` consistent with given `p^r`-ranks: `t` is
/// nondecreasing from `t_0 = 0` to `N - 1` and the blocks of `p - 1`
/// consecutive values of `N - 1 - t_i` sum to the ranks. At most `limit`
/// solutions are returned.
pub fn solve_t(p: u64, n: usize, ranks: &[u32], limit: usize) -> Vec<Vec<u32>> {
    let w = p as usize - 1;
    let top = n as u32 - 1;
    let len = ranks.len() * w;
    let mut out = Vec::new();
    let mut u = Vec::with_capacity(len);
    fn go(u: &mut Vec<u32>, w: usize, top: u32, ranks: &[u32], len: usize, limit: usize, out: &mut Vec<Vec<u32>>) {
        if out.len() >= limit {
            return;
        }
        let i = u.len();
        if i == len {
            let t: Vec<u32> = u.iter().map(|&x| top - x).take_while(|&t| t < top).chain([top]).collect();
            out.push(t);
            return;
        }
        let hi = if i == 0 { top } else { u[i - 1] };
        let lo = if i == 0 { top } else { 0 };
        let block = i / w;
        let used: u32 = u[block * w..].iter().sum();
        let remaining_slots = (block + 1) * w - i - 1;
        for x in (lo..=hi).rev() {
            if used + x > ranks[block] {
                continue;
            }
            let need = ranks[block] - used - x;
            if need > x * remaining_slots as u32 {
                continue;
            }
            if remaining_slots == 0 && need != 0 {
                continue;
            }
            u.push(x);
            go(u, w, top, ranks, len, limit, out);
            u.pop();
        }
    }
    if n == 0 {
        return out;
    }
    if ranks.is_empty() {
        if top == 0 {
            out.push(vec![0]);
        }
        return out;
    }
    go(&mut u, w, top, ranks, len, limit, &mut out);
    out
}

/// The 2-part of the restricted class group of a quadratic field, on which
/// the Galois group acts by inversion; `N` is the number of ramified primes.
pub fn from_quadratic(disc: &Discriminant) -> Result<FinitePModule> {
    let g = if disc.is_imaginary() { class_group_imaginary(disc)? } else { narrow_class_group_real(disc)? };
    from_structure(&g, disc.ramified_count)
}

/// The 2-part of `g` with `σ = -1`.
pub fn from_structure(g: &AbelianGroupStructure, n: usize) -> Result<FinitePModule> {
    let exps = g.p_exponents(2);
    if exps.is_empty() {
        let mut m = FinitePModule::new(2, Vec::new(), Vec::new())?;
        m.declared_n = Some(n);
        return Ok(m);
    }
    let mut m = FinitePModule::diagonal(2, &exps, -1)?;
    m.declared_n = Some(n);
    Ok(m)
}

/// One summand `Z[x]/(x^p - 1, p^a, (x - 1)^b)` with `σ = x`.
pub fn group_ring_quotient(p: u64, a: u32, b: u32) -> Result<FinitePModule> {
    let pu = p as usize;
    let pa = (p as i128).checked_pow(a).ok_or_else(|| Error::Budget(format!("{p}^{a} overflows")))?;
    // (x - 1)^b reduced mod x^p - 1, coefficients mod p^a
    let mut y = vec![0i128; pu];
    y[0] = 1;
    for _ in 0..b {
        let mut next = vec![0i128; pu];
        for k in 0..pu {
            next[(k + 1) % pu] = (next[(k + 1) % pu] + y[k]).rem_euclid(pa);
            next[k] = (next[k] - y[k]).rem_euclid(pa);
        }
        y = next;
    }
    let mut rel = vec![vec![0i128; 2 * pu]; pu];
    for j in 0..pu {
        rel[j][j] = pa;
        for k in 0..pu {
            rel[(k + j) % pu][pu + j] = y[k];
        }
    }
    let sigma: IntMatrix = (0..pu).map(|i| (0..pu).map(|j| i128::from(i == (j + 1) % pu)).collect()).collect();
    FinitePModule::new(p, rel, sigma)
}

/// Parameters of [`synthesize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthProfile {
    pub max_summands: usize,
    /// Largest `a` in `(p^a, (x-1)^b)`.
    pub max_a: u32,
    /// Largest `b`.
    pub max_b: u32,
    /// Upper bound on `log_p #M`.
    pub max_log_order: u32,
    pub attempts: usize,
}

impl Default for SynthProfile {
    fn default() -> Self {
        SynthProfile { max_summands: 4, max_a: 2, max_b: 4, max_log_order: 8, attempts: 10_000 }
    }
}

/// A random direct sum of group-ring quotients with `#M^G = p^{N-1}` and
/// `#M <= p^{max_log_order}`, deterministic in `seed`.
pub fn synthesize(p: u64, n: usize, seed: u64, profile: &SynthProfile) -> Result<FinitePModule> {
    if n < 2 {
        return Err(Error::InvalidInput("N must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..profile.attempts {
        let s = rng.gen_range(1..=profile.max_summands.max(1));
        let mut m: Option<FinitePModule> = None;
        for _ in 0..s {
            let a = rng.gen_range(1..=profile.max_a.max(1));
            let b = rng.gen_range(1..=profile.max_b.max(1));
            let q = group_ring_quotient(p, a, b)?;
            m = Some(match m {
                None => q,
                Some(prev) => prev.direct_sum(&q)?,
            });
        }
        let mut m = m.expect("at least one summand");
        let ord = m.order()?;
        if valuation(ord, p as u128) > profile.max_log_order {
            continue;
        }
        if inferred_n(&m)? == n {
            m.declared_n = Some(n);
            return Ok(m);
        }
    }
    Err(Error::Budget(format!("no module with #M^G = {p}^{} after {} attempts", n - 1, profile.attempts)))
}

/// Histogram of `Δ` over synthesized modules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub samples: usize,
    pub histogram: BTreeMap<u32, u64>,
    /// Seeds for which no module was found within the attempt budget.
    pub failures: usize,
}

/// Runs [`synthesize`] for seeds `seed0 .. seed0 + samples` on all cores
/// and tallies `Δ = log_p #M - (N - 1)`.
pub fn monte_carlo(p: u64, n: usize, samples: usize, seed0: u64, profile: &SynthProfile) -> Result<MonteCarloReport> {
    let workers = std::thread::available_parallelism().map_or(1, |v| v.get()).min(samples.max(1));
    let results: Vec<Result<(BTreeMap<u32, u64>, usize)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || -> Result<(BTreeMap<u32, u64>, usize)> {
                    let mut hist = BTreeMap::new();
                    let mut failures = 0;
                    for i in (w..samples).step_by(workers) {
                        match synthesize(p, n, seed0 + i as u64, profile) {
                            Ok(m) => {
                                let r = filtration(&m, n)?;
                                *hist.entry(r.big_delta()).or_insert(0) += 1;
                            }
                            Err(e) if e.is_budget() => failures += 1,
                            Err(e) => return Err(e),
                        }
                    }
                    Ok((hist, failures))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut histogram = BTreeMap::new();
    let mut failures = 0;
    for r in results {
        let (h, f) = r?;
        failures += f;
        for (k, v) in h {
            *histogram.entry(k).or_insert(0) += v;
        }
    }
    Ok(MonteCarloReport { p, n, samples, histogram, failures })
}
