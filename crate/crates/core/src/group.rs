//! Finite abelian groups: elementary-divisor presentations and a generic
//! subgroup builder driven by a group law.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{factor, valuation};
use crate::error::{Error, Result};
use crate::linalg::{smith_int, IntSnf};

/// A finite abelian group written as `Z/d_1 x Z/d_2 x ...` with `d_{i+1} | d_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AbelianGroupStructure {
    divisors: Vec<u128>,
}

impl AbelianGroupStructure {
    /// The trivial group.
    pub fn trivial() -> Self {
        Self::default()
    }

    /// Builds a structure from a decreasing divisibility chain, rejecting
    /// entries below 2 and broken chains.
    pub fn from_chain(divisors: Vec<u128>) -> Result<Self> {
        for (i, &d) in divisors.iter().enumerate() {
            if d < 2 {
                return Err(Error::InvalidInput(format!("divisor {d} < 2 in chain")));
            }
            if i > 0 && divisors[i - 1] % d != 0 {
                return Err(Error::InvalidInput(format!("{d} does not divide {}", divisors[i - 1])));
            }
        }
        Ok(Self { divisors })
    }

    /// Normalizes an arbitrary list of cyclic orders (ones are dropped) into
    /// the invariant-factor chain.
    pub fn from_cyclic_orders(orders: &[u128]) -> Result<Self> {
        let mut by_prime: HashMap<u128, Vec<u32>> = HashMap::new();
        for &o in orders {
            if o == 0 {
                return Err(Error::Infinite("cyclic factor of order 0".into()));
            }
            for (q, e) in factor(o)?.factors {
                by_prime.entry(q).or_default().push(e);
            }
        }
        let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut divisors = vec![1u128; len];
        for (q, mut es) in by_prime {
            es.sort_unstable_by(|a, b| b.cmp(a));
            for (i, e) in es.into_iter().enumerate() {
                divisors[i] *= q.pow(e);
            }
        }
        Ok(Self { divisors })
    }

    /// Structure of a `p`-group given by exponents of its cyclic factors.
    pub fn from_p_exponents(p: u128, exps: &[u32]) -> Self {
        let mut es: Vec<u32> = exps.iter().copied().filter(|&e| e > 0).collect();
        es.sort_unstable_by(|a, b| b.cmp(a));
        Self { divisors: es.into_iter().map(|e| p.pow(e)).collect() }
    }

    pub fn divisors(&self) -> &[u128] {
        &self.divisors
    }

    pub fn order(&self) -> u128 {
        self.divisors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.divisors.is_empty()
    }

    /// Number of cyclic factors in the invariant-factor decomposition.
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    /// The `p`-Sylow subgroup.
    pub fn p_part(&self, p: u128) -> Self {
        let divisors = self.divisors.iter().map(|&d| p.pow(valuation(d, p))).filter(|&d| d > 1).collect();
        Self { divisors }
    }

    /// Dimension of `G/pG` over `F_p`.
    pub fn p_rank(&self, p: u128) -> usize {
        self.divisors.iter().filter(|&&d| d % p == 0).count()
    }

    /// `v_p` of the group order.
    pub fn v_p_order(&self, p: u128) -> u32 {
        self.divisors.iter().map(|&d| valuation(d, p)).sum()
    }

    /// Exponents `e_i` of the `p`-part, decreasing.
    pub fn p_exponents(&self, p: u128) -> Vec<u32> {
        self.divisors.iter().map(|&d| valuation(d, p)).filter(|&e| e > 0).collect()
    }

    /// Rank of `p^{r-1}G / p^r G`.
    pub fn pr_rank(&self, p: u128, r: u32) -> usize {
        self.p_exponents(p).into_iter().filter(|&e| e >= r).count()
    }

    /// The subgroup `G^k` (image of multiplication by `k`).
    pub fn power(&self, k: u128) -> Self {
        let orders: Vec<u128> = self.divisors.iter().map(|&d| d / num_integer::gcd(d, k)).collect();
        Self::from_cyclic_orders(&orders).expect("orders are small and nonzero")
    }
}

impl fmt::Display for AbelianGroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.divisors.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for AbelianGroupStructure {
    type Err = Error;

    /// Parses `[d1,d2,...]` (whitespace tolerated).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse { column: 0, message: format!("expected [..], got {t:?}") })?;
        if inner.trim().is_empty() {
            return Ok(Self::trivial());
        }
        let mut divs = Vec::new();
        for part in inner.split(',') {
            let v: u128 = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse { column: 0, message: format!("bad divisor {part:?}") })?;
            divs.push(v);
        }
        Self::from_chain(divs)
    }
}

/// A group law on canonical element representatives.
pub trait GroupLaw {
    type Elem: Clone + Eq + Hash;
    fn identity(&self) -> Self::Elem;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, mut e: u128) -> Self::Elem {
        let mut result = self.identity();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = self.op(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.op(&base, &base);
            }
        }
        result
    }
}

/// Grows a subgroup one generator at a time, keeping every element with its
/// position; coordinates in the generator basis are recovered from the
/// position by a mixed-radix decoding.
pub struct SubgroupBuilder<'a, G: GroupLaw> {
    law: &'a G,
    index: HashMap<G::Elem, usize>,
    elems: Vec<G::Elem>,
    gens: Vec<G::Elem>,
    rel_orders: Vec<usize>,
    relations: Vec<Vec<i128>>,
    max_size: usize,
}

impl<'a, G: GroupLaw> SubgroupBuilder<'a, G> {
    pub fn new(law: &'a G) -> Self {
        Self::with_limit(law, usize::MAX)
    }

    /// Builder refusing to grow beyond `max_size` elements.
    pub fn with_limit(law: &'a G, max_size: usize) -> Self {
        let id = law.identity();
        let mut index = HashMap::new();
        index.insert(id.clone(), 0);
        SubgroupBuilder {
            law,
            index,
            elems: vec![id],
            gens: Vec::new(),
            rel_orders: Vec::new(),
            relations: Vec::new(),
            max_size,
        }
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn contains(&self, x: &G::Elem) -> bool {
        self.index.contains_key(x)
    }

    pub fn generators(&self) -> &[G::Elem] {
        &self.gens
    }

    /// Coordinates of a member in the basis of added generators.
    pub fn coords(&self, x: &G::Elem) -> Option<Vec<i128>> {
        let mut pos = *self.index.get(x)?;
        let mut out = vec![0i128; self.gens.len()];
        for k in (0..self.gens.len()).rev() {
            let block: usize = self.rel_orders[..k].iter().product();
            out[k] = (pos / block) as i128;
            pos %= block;
        }
        Some(out)
    }

    /// Adds `g`; returns the relative order `[H<g> : H]` (1 when `g` is
    /// already a member).
    pub fn add(&mut self, g: &G::Elem) -> Result<usize> {
        if self.contains(g) {
            return Ok(1);
        }
        let base = self.elems.len();
        let mut x = g.clone();
        let mut e = 1usize;
        while !self.index.contains_key(&x) {
            e += 1;
            if base.saturating_mul(e) > self.max_size {
                return Err(Error::Budget(format!("subgroup exceeds {} elements", self.max_size)));
            }
            x = self.law.op(&x, g);
        }
        let tail = self.coords(&x).expect("member");
        let mut col = vec![0i128; self.gens.len() + 1];
        for (k, t) in tail.iter().enumerate() {
            col[k] = -t;
        }
        col[self.gens.len()] = e as i128;
        self.elems.reserve(base * (e - 1));
        let mut gj = g.clone();
        for j in 1..e {
            for i in 0..base {
                let y = self.law.op(&self.elems[i], &gj);
                self.index.insert(y.clone(), j * base + i);
                self.elems.push(y);
            }
            if j + 1 < e {
                gj = self.law.op(&gj, g);
            }
        }
        self.gens.push(g.clone());
        self.rel_orders.push(e);
        for row in self.relations.iter_mut() {
            row.push(0);
        }
        self.relations.push(vec![0; self.gens.len()]);
        for (k, v) in col.into_iter().enumerate() {
            self.relations[k][self.gens.len() - 1] = v;
        }
        Ok(e)
    }

    /// Smith form of the relation matrix; the group is `⊕ Z/diag_i`.
    pub fn smith(&self) -> Result<IntSnf> {
        smith_int(&self.relations, self.gens.len())
    }

    pub fn structure(&self) -> Result<AbelianGroupStructure> {
        let snf = self.smith()?;
        let orders: Vec<u128> = snf.diag.iter().map(|d| d.unsigned_abs()).collect();
        AbelianGroupStructure::from_cyclic_orders(&orders)
    }

    /// Consumes the builder, returning a frozen group with Smith generators.
    pub fn finish(self) -> Result<FiniteGroup<G::Elem>> {
        let snf = self.smith()?;
        let structure =
            AbelianGroupStructure::from_cyclic_orders(&snf.diag.iter().map(|d| d.unsigned_abs()).collect::<Vec<_>>())?;
        let mut cyclic = Vec::new();
        for (t, d) in snf.diag.iter().enumerate() {
            if d.unsigned_abs() > 1 {
                let word: Vec<i128> = (0..self.gens.len()).map(|j| snf.p_inv[j][t]).collect();
                cyclic.push(CyclicFactor { order: d.unsigned_abs(), row: t, word });
            }
        }
        Ok(FiniteGroup {
            relations: self.relations,
            index: self.index,
            rel_orders: self.rel_orders,
            gens: self.gens,
            snf,
            cyclic,
            structure,
        })
    }
}

/// One cyclic factor of the Smith decomposition.
#[derive(Debug, Clone)]
pub struct CyclicFactor {
    pub order: u128,
    /// Row of the Smith transform giving this coordinate.
    pub row: usize,
    /// Exponents of the builder generators forming the Smith generator.
    pub word: Vec<i128>,
}

/// A fully enumerated finite abelian group with discrete logarithms.
pub struct FiniteGroup<E> {
    relations: Vec<Vec<i128>>,
    index: HashMap<E, usize>,
    rel_orders: Vec<usize>,
    pub gens: Vec<E>,
    pub snf: IntSnf,
    /// Nontrivial cyclic factors in the order produced by the Smith form
    /// (increasing divisibility).
    pub cyclic: Vec<CyclicFactor>,
    pub structure: AbelianGroupStructure,
}

impl<E: Clone + Eq + Hash> FiniteGroup<E> {
    pub fn order(&self) -> usize {
        self.index.len()
    }

    pub fn contains(&self, x: &E) -> bool {
        self.index.contains_key(x)
    }

    /// Coordinates in the builder generators.
    pub fn coords(&self, x: &E) -> Option<Vec<i128>> {
        let mut pos = *self.index.get(x)?;
        let mut out = vec![0i128; self.gens.len()];
        for k in (0..self.gens.len()).rev() {
            let block: usize = self.rel_orders[..k].iter().product();
            out[k] = (pos / block) as i128;
            pos %= block;
        }
        Some(out)
    }

    /// Structure of the quotient by the subgroup generated by `elems`.
    pub fn quotient(&self, elems: &[E]) -> Result<AbelianGroupStructure> {
        let k = self.gens.len();
        let mut m = self.relations.clone();
        for e in elems {
            let c =
                self.coords(e).ok_or_else(|| Error::InvalidInput("quotient by an element outside the group".into()))?;
            for (row, v) in m.iter_mut().zip(c) {
                row.push(v);
            }
        }
        let snf = smith_int(&m, k)?;
        AbelianGroupStructure::from_cyclic_orders(&snf.diag.iter().map(|d| d.unsigned_abs()).collect::<Vec<_>>())
    }

    /// Discrete logarithm with respect to the cyclic factors in `self.cyclic`.
    pub fn dlog(&self, x: &E) -> Option<Vec<i128>> {
        let c = self.coords(x)?;
        Some(
            self.cyclic
                .iter()
                .map(|f| {
                    let s: i128 = self.snf.p[f.row].iter().zip(&c).map(|(a, b)| a * b).sum();
                    s.rem_euclid(f.order as i128)
                })
                .collect(),
        )
    }
}
