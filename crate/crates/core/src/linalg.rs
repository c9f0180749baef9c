//! Smith normal form over the integers and over the local rings `Z/p^M`.

use crate::arith::mul_mod;
use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
pub type IntMatrix = Vec<Vec<i128>>;

/// Output of [`smith_int`].
#[derive(Debug, Clone)]
pub struct IntSnf {
    /// Diagonal entries `d_0 | d_1 | ...`, one per row; `0` marks a free summand.
    pub diag: Vec<i128>,
    /// Unimodular row transform with `P * A * Q = diag`.
    pub p: IntMatrix,
    /// Inverse of `p`; its columns express the Smith generators in the original generators.
    pub p_inv: IntMatrix,
}

fn ck(x: Option<i128>) -> Result<i128> {
    x.ok_or_else(|| Error::Budget("integer overflow in Smith normal form".into()))
}

fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

/// Smith normal form of a `k x r` integer matrix whose columns are relations
/// on `k` generators.
pub fn smith_int(a: &[Vec<i128>], k: usize) -> Result<IntSnf> {
    let mut m: IntMatrix = a.to_vec();
    let r = m.first().map_or(0, |row| row.len());
    debug_assert!(m.len() == k);
    let mut p = identity(k);
    let mut p_inv = identity(k);

    // row_i -= q * row_t, tracked
    let row_sub =
        |m: &mut IntMatrix, p: &mut IntMatrix, p_inv: &mut IntMatrix, i: usize, t: usize, q: i128| -> Result<()> {
            if q == 0 {
                return Ok(());
            }
            for j in 0..m[i].len() {
                m[i][j] = ck(m[i][j].checked_sub(ck(q.checked_mul(m[t][j]))?))?;
            }
            for j in 0..p[i].len() {
                p[i][j] = ck(p[i][j].checked_sub(ck(q.checked_mul(p[t][j]))?))?;
            }
            for row in p_inv.iter_mut() {
                row[t] = ck(row[t].checked_add(ck(q.checked_mul(row[i]))?))?;
            }
            Ok(())
        };
    let row_swap = |m: &mut IntMatrix, p: &mut IntMatrix, p_inv: &mut IntMatrix, i: usize, t: usize| {
        m.swap(i, t);
        p.swap(i, t);
        for row in p_inv.iter_mut() {
            row.swap(i, t);
        }
    };

    let steps = k.min(r);
    for t in 0..steps {
        loop {
            // pivot: smallest nonzero absolute value in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..k {
                for j in t..r {
                    if m[i][j] != 0 && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            row_swap(&mut m, &mut p, &mut p_inv, bi, t);
            for row in m.iter_mut() {
                row.swap(bj, t);
            }
            let mut done = true;
            for i in t + 1..k {
                let q = m[i][t].div_euclid(m[t][t]);
                row_sub(&mut m, &mut p, &mut p_inv, i, t, q)?;
                if m[i][t] != 0 {
                    done = false;
                }
            }
            for j in t + 1..r {
                let q = m[t][j].div_euclid(m[t][t]);
                if q != 0 {
                    for row in m.iter_mut() {
                        row[j] = ck(row[j].checked_sub(ck(q.checked_mul(row[t]))?))?;
                    }
                }
                if m[t][j] != 0 {
                    done = false;
                }
            }
            if !done {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let piv = m[t][t];
            let bad = (t + 1..k).find(|&i| (t + 1..r).any(|j| m[i][j] % piv != 0));
            match bad {
                Some(i) => row_sub(&mut m, &mut p, &mut p_inv, t, i, -1)?,
                None => break,
            }
        }
        if m[t][t] < 0 {
            for j in 0..r {
                m[t][j] = -m[t][j];
            }
            for j in 0..k {
                p[t][j] = -p[t][j];
            }
            for row in p_inv.iter_mut() {
                row[t] = -row[t];
            }
        }
    }
    let diag = (0..k).map(|i| if i < r { m[i][i] } else { 0 }).collect();
    Ok(IntSnf { diag, p, p_inv })
}

/// Elementary divisors of the finite abelian group `Z^k / (columns of a)`.
/// Errors when the group is infinite.
pub fn group_invariants(a: &[Vec<i128>], k: usize) -> Result<Vec<u128>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let snf = smith_int(a, k)?;
    let mut out = Vec::new();
    for d in snf.diag {
        if d == 0 {
            return Err(Error::Infinite("relation matrix has deficient rank".into()));
        }
        if d.abs() > 1 {
            out.push(d.unsigned_abs());
        }
    }
    Ok(out)
}

/// The local ring `Z/p^M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalRing {
    pub p: u128,
    pub m: u32,
    pub modulus: u128,
}

impl LocalRing {
    pub fn new(p: u128, m: u32) -> Result<Self> {
        let modulus = p
            .checked_pow(m)
            .filter(|&q| q < (1u128 << 126))
            .ok_or_else(|| Error::Budget(format!("modulus {p}^{m} too large")))?;
        Ok(LocalRing { p, m, modulus })
    }

    #[inline]
    pub fn reduce(&self, x: i128) -> u128 {
        x.rem_euclid(self.modulus as i128) as u128
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        mul_mod(a, b, self.modulus)
    }

    /// Valuation of `a` (returns `m` for zero).
    pub fn val(&self, mut a: u128) -> u32 {
        if a == 0 {
            return self.m;
        }
        let mut v = 0;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u128) -> Option<u128> {
        let (g, x, _) = ext_gcd(a as i128, self.modulus as i128);
        (g == 1).then(|| self.reduce(x))
    }

    pub fn pow(&self, a: u128, e: u128) -> u128 {
        crate::arith::pow_mod(a, e, self.modulus)
    }
}

/// Extended Euclid: `(g, x, y)` with `a x + b y = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Output of [`smith_local`].
#[derive(Debug, Clone)]
pub struct LocalSnf {
    /// Valuations of the diagonal entries, one per row (`m` marks zero).
    pub vals: Vec<u32>,
    /// Invertible row transform `P` with `P * A * Q = diag`.
    pub p: Vec<Vec<u128>>,
    /// Inverse of `p`.
    pub p_inv: Vec<Vec<u128>>,
    /// Invertible column transform `Q`.
    pub q: Vec<Vec<u128>>,
    /// Inverse of `q`.
    pub q_inv: Vec<Vec<u128>>,
}

/// Smith normal form of a `k x r` matrix over `Z/p^M`; the pivot is the entry
/// of least valuation, so no coefficient growth occurs.
pub fn smith_local(ring: &LocalRing, a: &[Vec<u128>], k: usize, r: usize) -> LocalSnf {
    let mut m: Vec<Vec<u128>> = a.iter().map(|row| row.iter().map(|&x| x % ring.modulus).collect()).collect();
    let ident = |n: usize| -> Vec<Vec<u128>> { (0..n).map(|i| (0..n).map(|j| u128::from(i == j)).collect()).collect() };
    let mut p = ident(k);
    let mut p_inv = ident(k);
    let mut q = ident(r);
    let mut q_inv = ident(r);
    let steps = k.min(r);
    let mut vals = vec![ring.m; k];
    for t in 0..steps {
        let mut best: Option<(usize, usize, u32)> = None;
        for i in t..k {
            for j in t..r {
                if m[i][j] != 0 {
                    let v = ring.val(m[i][j]);
                    if best.map_or(true, |(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((bi, bj, v)) = best else { break };
        // swap rows t, bi
        m.swap(t, bi);
        p.swap(t, bi);
        for row in p_inv.iter_mut() {
            row.swap(t, bi);
        }
        // swap columns t, bj
        for row in m.iter_mut() {
            row.swap(t, bj);
        }
        for row in q.iter_mut() {
            row.swap(t, bj);
        }
        q_inv.swap(t, bj);
        // scale row t so the pivot becomes p^v
        let pv = ring.p.pow(v);
        let unit = m[t][t] / pv;
        let uinv = ring.inv(unit).expect("pivot unit part is invertible");
        for j in 0..r {
            m[t][j] = ring.mul(m[t][j], uinv);
        }
        for j in 0..k {
            p[t][j] = ring.mul(p[t][j], uinv);
        }
        for row in p_inv.iter_mut() {
            row[t] = ring.mul(row[t], unit % ring.modulus);
        }
        // clear column t
        for i in 0..k {
            if i == t || m[i][t] == 0 {
                continue;
            }
            let f = m[i][t] / pv;
            for j in 0..r {
                let s = ring.mul(f, m[t][j]);
                m[i][j] = ring.sub(m[i][j], s);
            }
            for j in 0..k {
                let s = ring.mul(f, p[t][j]);
                p[i][j] = ring.sub(p[i][j], s);
            }
            for row in p_inv.iter_mut() {
                let s = ring.mul(f, row[i]);
                row[t] = ring.add(row[t], s);
            }
        }
        // clear row t
        for j in 0..r {
            if j == t || m[t][j] == 0 {
                continue;
            }
            let f = m[t][j] / pv;
            for row in m.iter_mut() {
                let s = ring.mul(f, row[t]);
                row[j] = ring.sub(row[j], s);
            }
            for row in q.iter_mut() {
                let s = ring.mul(f, row[t]);
                row[j] = ring.sub(row[j], s);
            }
            // q_inv: row t += f * row j
            let rj = q_inv[j].clone();
            for (x, y) in q_inv[t].iter_mut().zip(rj) {
                *x = ring.add(*x, ring.mul(f, y));
            }
        }
        vals[t] = v;
    }
    LocalSnf { vals, p, p_inv, q, q_inv }
}

/// Exponents `e_i` with `Z^k / (columns of a) ⊗ Z_p ≅ ⊕ Z/p^{e_i}`, computed
/// modulo `p^M`; errors when some factor reaches `p^M`.
pub fn local_invariants(ring: &LocalRing, a: &[Vec<u128>], k: usize) -> Result<Vec<u32>> {
    let r = a.first().map_or(0, |row| row.len());
    let snf = smith_local(ring, a, k, r);
    let mut out: Vec<u32> = Vec::new();
    for v in snf.vals {
        if v >= ring.m {
            return Err(Error::Budget(format!(
                "working precision {}^{} too small for the presented p-group",
                ring.p, ring.m
            )));
        }
        if v > 0 {
            out.push(v);
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    Ok(out)
}
