//! Abelian `p`-ramification over quadratic fields.
//!
//! The ray class groups modulo `p^n` are presented over `Z_p` from three
//! pieces: the principal units of `O/p^n`, the images of the global units,
//! and one generator per cyclic factor of the `p`-class group together with
//! the principal generator of each relation, tracked `p`-adically through
//! form reduction. The torsion group `T` is read off once the ray class
//! groups grow by exactly `r_2 + 1` lines per level.

pub mod local;
pub mod scan;

use serde::{Deserialize, Serialize};

use crate::arith::{primes_up_to, valuation};
use crate::error::{Error, Result};
use crate::group::{AbelianGroupStructure, GroupLaw, SubgroupBuilder};
use crate::linalg::{ext_gcd, local_invariants, LocalRing};
use crate::quadclass::form::{
    compose_ideals, pow_definite, reduce_definite, reduce_definite_tracked, reduce_indefinite_tracked, QuadForm,
};
use crate::quadclass::imag::{class_group_imaginary_full, generator_bound, DefiniteLaw};
use crate::quadclass::real::{class_group_real_full, fundamental_unit, walk_to_principal, NarrowLaw, RealClassGroup};
use crate::quadclass::{ClassGroupConfig, Discriminant};

pub use local::{splitting_type_of, LocalAlgebra, LocalElem, LocalTracker, PrincipalUnits, SplittingType};

/// Largest number of continued-fraction steps spent looking for a unit or a
/// principal generator.
const WALK_STEPS: usize = 50_000_000;

pub fn splitting_type(disc: &Discriminant, p: u128) -> SplittingType {
    splitting_type_of(disc.value, p)
}

fn pos(f: QuadForm) -> QuadForm {
    if f.a < 0 {
        QuadForm { a: -f.a, b: f.b, c: -f.c }
    } else {
        f
    }
}

/// A form whose ideal is coprime to `p` and lies in the same ordinary class
/// as the ideal of `f`.
fn coprime_rep(f: QuadForm, p: u128) -> Result<QuadForm> {
    let pi = p as i128;
    let mut g = pos(f);
    for _ in 0..2 * p + 4 {
        if g.a % pi != 0 {
            return Ok(g);
        }
        if g.c % pi != 0 {
            return Ok(pos(QuadForm { a: g.c, b: -g.b, c: g.a }));
        }
        // x -> x, y -> x + y
        g = pos(QuadForm { a: g.a + g.b + g.c, b: g.b + 2 * g.c, c: g.c });
    }
    Err(Error::Inconsistent(format!("no representative of {f} prime to {p}")))
}

/// The `p`-part of the ordinary class group as ideals prime to `p` with a
/// generating set of relations.
#[derive(Debug, Clone)]
pub struct ClassPart {
    pub disc: Discriminant,
    pub p: u128,
    /// Ordinary class number.
    pub h: u128,
    /// Narrow class number (equal to `h` for imaginary fields).
    pub h_restricted: u128,
    /// `p`-part of the ordinary class group.
    pub structure: AbelianGroupStructure,
    pub ideals: Vec<QuadForm>,
    /// Relation columns among `ideals`.
    pub relations: Vec<Vec<i128>>,
    /// Real fields: the fundamental unit `(x + y √D)/2`.
    pub unit: Option<(num_bigint::BigInt, num_bigint::BigInt)>,
}

fn sylow_imaginary(disc: &Discriminant, p: u128, h: u128, cfg: &ClassGroupConfig) -> Result<ClassPart> {
    let v = valuation(h, p);
    let pv = p.pow(v);
    let mut part = ClassPart {
        disc: *disc,
        p,
        h,
        h_restricted: h,
        structure: AbelianGroupStructure::trivial(),
        ideals: Vec::new(),
        relations: Vec::new(),
        unit: None,
    };
    if v == 0 {
        return Ok(part);
    }
    let law = DefiniteLaw { d: disc.value };
    let mut builder = SubgroupBuilder::new(&law);
    let (bound, _) = generator_bound(disc.abs(), cfg);
    for l in primes_up_to(bound.max(3)) {
        if builder.order() as u128 == pv {
            break;
        }
        if let Some(f) = QuadForm::prime_form(l as u128, disc.value) {
            builder.add(&pow_definite(&f, h / pv))?;
        }
    }
    if builder.order() as u128 != pv {
        return Err(Error::Inconsistent(format!(
            "prime forms generate {} of the {pv} elements of the {p}-class group of D={}",
            builder.order(),
            disc.value
        )));
    }
    let group = builder.finish()?;
    let mut orders = Vec::new();
    for cf in &group.cyclic {
        let mut g = law.identity();
        for (gen, &w) in group.gens.iter().zip(&cf.word) {
            g = law.op(&g, &law.pow(gen, w.rem_euclid(pv as i128) as u128));
        }
        part.ideals.push(coprime_rep(g, p)?);
        orders.push(cf.order);
    }
    part.relations = diag_columns(&orders);
    part.structure = group.structure.clone();
    Ok(part)
}

fn diag_columns(orders: &[u128]) -> Vec<Vec<i128>> {
    (0..orders.len())
        .map(|j| {
            let mut col = vec![0i128; orders.len()];
            col[j] = orders[j] as i128;
            col
        })
        .collect()
}

fn inv_mod_i(a: i128, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    debug_assert_eq!(g, 1);
    x.rem_euclid(m)
}

fn sylow_real(disc: &Discriminant, p: u128, rc: &RealClassGroup) -> Result<ClassPart> {
    let law = NarrowLaw { cycles: &rc.cycles };
    let group = &rc.group;
    let h_restricted = group.order() as u128;
    let h = rc.ordinary.order();
    let mut ideals = Vec::new();
    let mut orders = Vec::new();
    let mut units = Vec::new();
    let mut factor_idx = Vec::new();
    for (i, cf) in group.cyclic.iter().enumerate() {
        let v = valuation(cf.order, p);
        if v == 0 {
            continue;
        }
        let u = cf.order / p.pow(v);
        let mut g = law.identity();
        for (gen, &w) in group.gens.iter().zip(&cf.word) {
            g = law.op(&g, &law.pow(gen, w.rem_euclid(h_restricted as i128) as u128));
        }
        g = law.pow(&g, u);
        ideals.push(coprime_rep(rc.cycles.rep(g), p)?);
        orders.push(p.pow(v));
        units.push(u);
        factor_idx.push(i);
    }
    let mut relations = diag_columns(&orders);
    if rc.unit_norm == 1 && p == 2 {
        let j = rc.cycles.negative_class();
        let x = group
            .dlog(&j)
            .ok_or_else(|| Error::Inconsistent("the class J is outside the narrow class group".into()))?;
        let col: Vec<i128> = factor_idx
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let o = orders[k] as i128;
                (x[i] * inv_mod_i(units[k] as i128, o)).rem_euclid(o)
            })
            .collect();
        relations.push(col);
    }
    let fu = fundamental_unit(disc.radicand, WALK_STEPS)?;
    Ok(ClassPart {
        disc: *disc,
        p,
        h,
        h_restricted,
        structure: rc.ordinary.p_part(p),
        ideals,
        relations,
        unit: Some((fu.x, fu.y)),
    })
}

/// The `p`-class group data of the field, using `h` when the caller already
/// knows the class number of an imaginary field.
pub fn class_part(disc: &Discriminant, p: u128, h: Option<u128>, cfg: &ClassGroupConfig) -> Result<ClassPart> {
    if disc.is_imaginary() {
        let h = match h {
            Some(h) => h,
            None => class_group_imaginary_full(disc, cfg)?.h(),
        };
        sylow_imaginary(disc, p, h, cfg)
    } else {
        let rc = class_group_real_full(disc, cfg)?;
        sylow_real(disc, p, &rc)
    }
}

struct Tracked<'a> {
    form: QuadForm,
    t: LocalTracker<'a>,
}

fn tracked_mul<'a>(
    alg: &'a LocalAlgebra,
    disc: &Discriminant,
    x: &Tracked<'a>,
    y: &Tracked<'a>,
) -> Result<Tracked<'a>> {
    let (g, k) = compose_ideals(pos(x.form), pos(y.form), disc.value);
    let mut t = LocalTracker::new(alg);
    t.mul_elem(&alg.mul(&x.t.value, &y.t.value));
    crate::quadclass::form::Tracker::mul_int(&mut t, k);
    let form = if disc.is_imaginary() {
        reduce_definite_tracked(g, &mut t)
    } else {
        let s = crate::arith::isqrt(disc.abs()) as i128;
        reduce_indefinite_tracked(g, s, &mut t)
    };
    if let Some(e) = x.t.error.clone().or_else(|| y.t.error.clone()).or(t.error.take()) {
        return Err(e);
    }
    Ok(Tracked { form, t })
}

/// A generator of the principal ideal `∏ ideals[j]^{r_j}`, embedded at `p`.
fn principal_generator(alg: &LocalAlgebra, part: &ClassPart, r: &[i128]) -> Result<LocalElem> {
    let disc = &part.disc;
    let one = || Tracked { form: QuadForm::principal(disc.value), t: LocalTracker::new(alg) };
    let mut acc = one();
    for (f, &e) in part.ideals.iter().zip(r) {
        if e < 0 {
            return Err(Error::InvalidInput("relation exponents must be nonnegative".into()));
        }
        let mut e = e as u128;
        let mut base = Tracked { form: *f, t: LocalTracker::new(alg) };
        while e > 0 {
            if e & 1 == 1 {
                acc = tracked_mul(alg, disc, &acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = tracked_mul(alg, disc, &base, &base)?;
            }
        }
    }
    let mut t = acc.t;
    let end = if disc.is_imaginary() {
        (acc.form.a == 1).then_some(acc.form)
    } else {
        let s = crate::arith::isqrt(disc.abs()) as i128;
        walk_to_principal(acc.form, s, &mut t, WALK_STEPS)
    };
    if end.is_none() {
        return Err(Error::Inconsistent(format!(
            "relation {r:?} does not give a principal ideal for D={} (reached {})",
            disc.value, acc.form
        )));
    }
    if let Some(e) = t.error {
        return Err(e);
    }
    if t.value.v != [0, 0] {
        return Err(Error::Inconsistent(format!("principal generator for {r:?} is not a unit at {}", alg.p)));
    }
    Ok(t.value)
}

/// Global units: `-1`, the extra roots of unity of `Q(i)` and `Q(√-3)`, and
/// the fundamental unit of a real field.
fn global_units(alg: &LocalAlgebra, part: &ClassPart) -> Result<Vec<LocalElem>> {
    let mut out = vec![alg.embed_int(-1)?];
    match part.disc.value {
        -4 => out.push(alg.embed(0, 1)?),
        -3 => out.push(alg.embed(1, 1)?),
        _ => {}
    }
    if let Some((x, y)) = &part.unit {
        out.push(alg.embed_unit_big(x, y)?);
    }
    Ok(out)
}

/// Precomputed data for ray class groups of one field at increasing levels.
pub struct RayContext {
    pub part: ClassPart,
    pub alg: LocalAlgebra,
    units: Vec<LocalElem>,
    gammas: Vec<LocalElem>,
}

impl RayContext {
    /// Units are tracked modulo `p^max_level`.
    pub fn new(part: ClassPart, max_level: u32) -> Result<Self> {
        let alg = LocalAlgebra::new(part.disc.value, part.p, max_level.max(2))?;
        let units = global_units(&alg, &part)?;
        let gammas = part.relations.iter().map(|r| principal_generator(&alg, &part, r)).collect::<Result<Vec<_>>>()?;
        Ok(RayContext { part, alg, units, gammas })
    }

    fn ring(&self, n: u32) -> Result<LocalRing> {
        let extra = valuation(self.part.h_restricted, self.part.p) + 6;
        LocalRing::new(self.part.p, n + extra)
    }

    /// `p`-exponents of the ray class group and of `U / (image of units)`.
    pub fn invariants(&self, n: u32) -> Result<(Vec<u32>, Vec<u32>)> {
        let pu = PrincipalUnits::new(&self.alg, n)?;
        let g = pu.rank();
        let s = self.part.ideals.len();
        let ring = self.ring(n)?;
        let mut cols: Vec<Vec<i128>> = pu.relations()?;
        for u in &self.units {
            cols.push(pu.dlog(&pu.project(&u.u)?)?.into_iter().map(|x| x as i128).collect());
        }
        let unit_cols = cols.len();
        for c in cols.iter_mut() {
            c.resize(g + s, 0);
        }
        for (r, gamma) in self.part.relations.iter().zip(&self.gammas) {
            let d = pu.dlog(&pu.project(&gamma.u)?)?;
            let mut col: Vec<i128> = d.into_iter().map(|x| -(x as i128)).collect();
            col.extend_from_slice(r);
            cols.push(col);
        }
        let to_rows = |cols: &[Vec<i128>], k: usize| -> Vec<Vec<u128>> {
            (0..k).map(|i| cols.iter().map(|c| ring.reduce(c[i])).collect()).collect()
        };
        let ray = local_invariants(&ring, &to_rows(&cols, g + s), g + s)?;
        let ui = local_invariants(&ring, &to_rows(&cols[..unit_cols], g), g)?;
        Ok((ray, ui))
    }

    /// Order of the subgroup of `(O/p)^×` generated by the global units,
    /// with its `p`-part removed.
    fn unit_image_prime_to_p(&self) -> u128 {
        let p = self.part.p;
        let pu = PrincipalUnits::new(&self.alg, 1).expect("level 1");
        let mut seen = std::collections::HashSet::new();
        let start = self.alg.one().u.map(|c| c % p);
        let mut frontier = vec![start];
        seen.insert(start);
        while let Some(x) = frontier.pop() {
            for u in &self.units {
                let y = pu.mul(&x, &u.u.map(|c| c % p));
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        let mut n = seen.len() as u128;
        while n % p == 0 {
            n /= p;
        }
        n
    }

    pub fn ray_class_group(&self, n: u32) -> Result<RayClassGroup> {
        let p = self.part.p;
        let disc = self.part.disc;
        if n == 0 {
            return Ok(RayClassGroup {
                d: disc.value,
                p,
                n,
                structure: self.part.structure.clone(),
                order: self.part.h,
                unit_group_order: 1,
                unit_image_order: 1,
            });
        }
        let (ray, ui) = self.invariants(n)?;
        let g = PrincipalUnits::new(&self.alg, n)?.rank() as u32;
        let vi: u32 = ui.iter().sum();
        let unit_group_order = self.alg.residue_unit_order() * p.pow(g);
        let unit_image_order = p.pow(g - vi) * self.unit_image_prime_to_p();
        let order = self.part.h * unit_group_order / unit_image_order;
        let structure = AbelianGroupStructure::from_p_exponents(p, &ray);
        if structure.order() != p.pow(valuation(order, p)) {
            return Err(Error::Inconsistent(format!(
                "ray class order identity fails for D={} p={p} n={n}: {} vs {order}",
                disc.value,
                structure.order()
            )));
        }
        Ok(RayClassGroup { d: disc.value, p, n, structure, order, unit_group_order, unit_image_order })
    }
}

/// A ray class group modulo `p^n`, reduced to its `p`-primary part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayClassGroup {
    pub d: i128,
    pub p: u128,
    pub n: u32,
    /// Structure of the `p`-Sylow subgroup.
    pub structure: AbelianGroupStructure,
    /// Order of the full ray class group.
    pub order: u128,
    /// `#(O/p^n)^×`.
    pub unit_group_order: u128,
    /// Order of the image of the global units in `(O/p^n)^×`.
    pub unit_image_order: u128,
}

pub fn ray_class_group(disc: &Discriminant, p: u128, n: u32, cfg: &ClassGroupConfig) -> Result<RayClassGroup> {
    let part = class_part(disc, p, None, cfg)?;
    RayContext::new(part, n + 2)?.ray_class_group(n)
}

/// Structure of `(O/p^n)^×`.
pub fn residue_units(disc: &Discriminant, p: u128, n: u32) -> Result<AbelianGroupStructure> {
    if n == 0 {
        return Err(Error::InvalidInput("level must be at least 1".into()));
    }
    let alg = LocalAlgebra::new(disc.value, p, n + 2)?;
    let pu = PrincipalUnits::new(&alg, n)?;
    let g = pu.rank();
    let ring = LocalRing::new(p, n + 4)?;
    let cols = pu.relations()?;
    let rows: Vec<Vec<u128>> = (0..g).map(|i| cols.iter().map(|c| ring.reduce(c[i])).collect()).collect();
    let exps = local_invariants(&ring, &rows, g)?;
    let mut orders: Vec<u128> = exps.iter().map(|&e| p.pow(e)).collect();
    match alg.kind {
        SplittingType::Split => orders.extend([p - 1, p - 1]),
        SplittingType::Inert => orders.push(p * p - 1),
        SplittingType::Ramified => orders.push(p - 1),
    }
    AbelianGroupStructure::from_cyclic_orders(&orders)
}

/// Order of `W = tor(U) / μ`: the `p`-power roots of unity of the
/// completions above `p` modulo the global ones.
pub fn w_group(disc: &Discriminant, p: u128) -> u128 {
    let m = disc.radicand;
    match p {
        2 => {
            if m != -1 && (m.rem_euclid(8) == 1 || m.rem_euclid(8) == 7) {
                2
            } else {
                1
            }
        }
        3 => {
            if m != -3 && m.rem_euclid(9) == 6 {
                3
            } else {
                1
            }
        }
        _ => 1,
    }
}

/// The torsion group `T` of the Galois group of the maximal abelian
/// `p`-ramified pro-`p` extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub d: i128,
    pub m: i128,
    pub p: u128,
    pub splitting: SplittingType,
    /// Level `n` at which the structure was read off.
    pub n_stable: u32,
    pub structure: AbelianGroupStructure,
    pub vp: u32,
    pub w: u128,
    pub c_tilde: f64,
    /// `p`-part of the ordinary class group.
    pub class_p: AbelianGroupStructure,
    /// Ordinary class number.
    pub h: u128,
}

fn default_n_max(p: u128) -> u32 {
    match p {
        2 => 32,
        3 => 16,
        _ => 8,
    }
}

fn free_rank(disc: &Discriminant) -> usize {
    if disc.is_imaginary() {
        2
    } else {
        1
    }
}

/// Whether going from `a` to `b` adds one to each of the `r` largest
/// exponents, keeps the others and keeps them all below the `r` largest.
fn free_step(a: &[u32], b: &[u32], r: usize) -> bool {
    if a.len() < r || a.len() != b.len() || a[r..] != b[r..] {
        return false;
    }
    let top_ok = (0..r).all(|i| b[i] == a[i] + 1);
    let separated = r == 0 || a.get(r).map_or(true, |&t| a[r - 1] > t);
    top_ok && separated
}

fn try_stabilize(part: &ClassPart, n_max: u32) -> Result<Option<(u32, Vec<u32>)>> {
    let r = free_rank(&part.disc);
    let ctx = RayContext::new(part.clone(), n_max + 2)?;
    let mut history: Vec<Vec<u32>> = Vec::new();
    for n in 2..=n_max + 2 {
        history.push(ctx.invariants(n)?.0);
        if let [.., a, b, c] = history.as_slice() {
            if free_step(a, b, r) && free_step(b, c, r) {
                return Ok(Some((n - 2, a.clone())));
            }
        }
    }
    Ok(None)
}

/// The first level `n` from which the `r_2 + 1` largest exponents of the
/// ray class group grow by one per level while the others stay fixed, with
/// the exponents at that level. The defaults `n_max` (32 for `p = 2`, 16 for
/// `p = 3`, 8 otherwise) are doubled once before giving up.
pub fn stable_invariants(part: &ClassPart) -> Result<(u32, Vec<u32>)> {
    let n0 = default_n_max(part.p);
    match try_stabilize(part, n0)? {
        Some(x) => Ok(x),
        None => try_stabilize(part, 2 * n0)?.ok_or_else(|| {
            Error::Budget(format!("ray class groups of D={} did not stabilize by level {}", part.disc.value, 2 * n0))
        }),
    }
}

/// `T`, read off the ray class groups modulo `p^n` once they stabilize.
pub fn tor_report(disc: &Discriminant, p: u128, cfg: &ClassGroupConfig) -> Result<TorsionReport> {
    tor_report_with(disc, p, None, cfg)
}

/// As [`tor_report`], with the class number of an imaginary field supplied.
pub fn tor_report_with(disc: &Discriminant, p: u128, h: Option<u128>, cfg: &ClassGroupConfig) -> Result<TorsionReport> {
    let part = class_part(disc, p, h, cfg)?;
    tor_report_from(&part)
}

pub fn tor_report_from(part: &ClassPart) -> Result<TorsionReport> {
    let disc = part.disc;
    let p = part.p;
    let (n_stable, exps) = stable_invariants(part)?;
    let t = exps[free_rank(&disc)..].to_vec();
    let structure = AbelianGroupStructure::from_p_exponents(p, &t);
    let vp: u32 = t.iter().sum();
    Ok(TorsionReport {
        d: disc.value,
        m: disc.radicand,
        p,
        splitting: splitting_type(&disc, p),
        n_stable,
        vp,
        w: w_group(&disc, p),
        c_tilde: vp as f64 * (p as f64).ln() / disc.log_sqrt(),
        structure,
        class_p: part.structure.clone(),
        h: part.h,
    })
}

/// `[K̃ ∩ H : K] = #Cl_p · #W / #T` for an imaginary field.
pub fn ktilde_index(disc: &Discriminant, p: u128, cfg: &ClassGroupConfig) -> Result<u128> {
    if !disc.is_imaginary() {
        return Err(Error::InvalidInput(format!("D={} must be negative", disc.value)));
    }
    let rep = tor_report(disc, p, cfg)?;
    ktilde_from(&rep)
}

pub fn ktilde_from(rep: &TorsionReport) -> Result<u128> {
    let num = rep.class_p.order() * rep.w;
    let t = rep.structure.order();
    if num % t != 0 {
        return Err(Error::Inconsistent(format!("#Cl_p #W = {num} is not divisible by #T = {t} for D={}", rep.d)));
    }
    Ok(num / t)
}

/// The restricted class group modulo the classes of the primes above `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SClassGroup {
    pub d: i128,
    pub p: u128,
    pub structure: AbelianGroupStructure,
    pub s_count: usize,
}

pub fn s_class_group(disc: &Discriminant, p: u128, cfg: &ClassGroupConfig) -> Result<SClassGroup> {
    let kind = splitting_type(disc, p);
    let s_count = if kind == SplittingType::Split { 2 } else { 1 };
    let prime = QuadForm::prime_form(p, disc.value)
        .ok_or_else(|| Error::Inconsistent(format!("no prime form of norm {p} for D={}", disc.value)));
    let structure = if disc.is_imaginary() {
        let cg = class_group_imaginary_full(disc, cfg)?;
        if kind == SplittingType::Inert {
            cg.structure
        } else {
            cg.group.quotient(&[reduce_definite(prime?)])?
        }
    } else {
        let rc = class_group_real_full(disc, cfg)?;
        if kind == SplittingType::Inert {
            rc.narrow
        } else {
            rc.group.quotient(&[rc.cycles.class_of(&prime?)])?
        }
    };
    Ok(SClassGroup { d: disc.value, p, structure, s_count })
}

/// Both sides of the 2-rank identity between `T` and the `S`-class group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub d: i128,
    pub rk_t: usize,
    pub rk_s: usize,
    pub s_count: usize,
    pub holds: bool,
}

pub fn reflection_check(disc: &Discriminant, cfg: &ClassGroupConfig) -> Result<ReflectionReport> {
    let t = tor_report(disc, 2, cfg)?;
    let s = s_class_group(disc, 2, cfg)?;
    Ok(reflection_from(&t, &s))
}

pub fn reflection_from(t: &TorsionReport, s: &SClassGroup) -> ReflectionReport {
    let rk_t = t.structure.p_rank(2);
    let rk_s = s.structure.p_rank(2);
    ReflectionReport { d: t.d, rk_t, rk_s, s_count: s.s_count, holds: rk_t + 1 == rk_s + s.s_count }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankInequalities {
    pub d: i128,
    pub p: u128,
    pub rk_t: usize,
    pub rk_cl: usize,
    pub r1: usize,
    pub r2: usize,
    pub s_count: usize,
    /// `rk(T) <= rk(Cl) + r1 + r2 - 1 + #S`.
    pub upper_t: bool,
    /// `rk(Cl) <= rk(T) + r2 + 1`.
    pub upper_cl: bool,
}

pub fn rank_inequalities(disc: &Discriminant, p: u128, cfg: &ClassGroupConfig) -> Result<RankInequalities> {
    let t = tor_report(disc, p, cfg)?;
    Ok(rank_inequalities_from(&t))
}

pub fn rank_inequalities_from(t: &TorsionReport) -> RankInequalities {
    let (r1, r2) = if t.d < 0 { (0, 1) } else { (2, 0) };
    let s_count = if t.splitting == SplittingType::Split { 2 } else { 1 };
    let rk_t = t.structure.p_rank(t.p);
    let rk_cl = t.class_p.p_rank(t.p);
    RankInequalities {
        d: t.d,
        p: t.p,
        rk_t,
        rk_cl,
        r1,
        r2,
        s_count,
        upper_t: rk_t + 1 <= rk_cl + r1 + r2 + s_count,
        upper_cl: rk_cl <= rk_t + r2 + 1,
    }
}
