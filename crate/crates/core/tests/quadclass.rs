use epsclass::arith::{factor, valuation};
use epsclass::quadclass::form::*;
use epsclass::quadclass::imag::*;
use epsclass::quadclass::real::*;
use epsclass::quadclass::scan::*;
use epsclass::quadclass::*;
use proptest::prelude::*;

fn cfg() -> ClassGroupConfig {
    ClassGroupConfig::default()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Reduced primitive forms counted straight from the definition.
fn brute_class_number(d: i128) -> u64 {
    let mut h = 0;
    let mut a = 1i128;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) || gcd(gcd(a, b), c) != 1 {
                continue;
            }
            h += 1;
        }
        a += 1;
    }
    h
}

fn is_fundamental_brute(d: i128) -> bool {
    let f = factor(d.unsigned_abs()).unwrap();
    let odd_sqfree = f.factors.iter().all(|&(p, e)| p == 2 || e == 1);
    match d.rem_euclid(4) {
        1 => odd_sqfree,
        0 => {
            let m = (d / 4).rem_euclid(4);
            odd_sqfree && (m == 2 || m == 3) && valuation(d.unsigned_abs(), 2) <= 3
        }
        _ => false,
    }
}

/// Whether the positive definite form `f` takes the value `n`: for each
/// admissible `y`, solve the quadratic in `x`.
fn represents(f: &QuadForm, n: i128) -> bool {
    let d = f.discriminant();
    let mut y = 0i128;
    while y * y * -d <= 4 * f.a * n {
        // a x^2 + b y x + (c y^2 - n) = 0
        let disc = f.b * f.b * y * y - 4 * f.a * (f.c * y * y - n);
        if let Some(r) = isqrt_exact(disc) {
            for s in [r, -r] {
                let num = -f.b * y + s;
                if num % (2 * f.a) == 0 {
                    return true;
                }
            }
        }
        y += 1;
    }
    false
}

fn isqrt_exact(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = epsclass::arith::isqrt(n as u128) as i128;
    (r * r == n).then_some(r)
}

#[test]
fn discriminant_examples() {
    let d = fundamental_discriminant(-15).unwrap();
    assert_eq!((d.value, d.ramified_count), (-15, 2));
    let d = fundamental_discriminant(105).unwrap();
    assert_eq!((d.value, d.ramified_count), (105, 3));
    let d = fundamental_discriminant(-5).unwrap();
    assert_eq!((d.value, d.ramified_count), (-20, 2));
    assert!(fundamental_discriminant(12).is_err());
    assert!(fundamental_discriminant(1).is_err());
    assert_eq!(discriminant_from_value(-20).unwrap().radicand, -5);
    assert!(discriminant_from_value(-16).is_err());
}

#[test]
fn reduction_examples() {
    assert_eq!(reduce(QuadForm::new(1, 1, 6)), QuadForm::new(1, 1, 6));
    assert_eq!(reduce(QuadForm::new(6, 1, 1)), QuadForm::new(1, 1, 6));
    let g = reduce(QuadForm::new(3, 7, -2));
    let s = epsclass::arith::isqrt(73) as i128;
    assert!(g.is_reduced_indefinite(s));
    assert_eq!(g.discriminant(), 73);
    // walking the cycle of g returns to g
    let mut f = rho(g, s);
    let mut steps = 0;
    while f != g {
        f = rho(f, s);
        steps += 1;
        assert!(steps < 100);
    }
}

#[test]
fn reduction_matches_brute_force() {
    // a reduced form is the unique one in its class: compare with the
    // reduced form reached by all small unimodular substitutions
    for d in [-23i128, -47, -71, -84, -260, -1155] {
        let reduced = reduced_forms_definite(d);
        for f in &reduced {
            for (p, q, r, s) in
                [(1i128, 1i128, 0i128, 1i128), (2, 1, 1, 1), (1, -3, 1, -2), (3, 2, 4, 3), (5, -2, -2, 1)]
            {
                assert_eq!(p * s - q * r, 1);
                let a = f.a * p * p + f.b * p * r + f.c * r * r;
                let b = 2 * f.a * p * q + f.b * (p * s + q * r) + 2 * f.c * r * s;
                let c = f.a * q * q + f.b * q * s + f.c * s * s;
                assert_eq!(reduce(QuadForm::new(a, b, c)), *f, "D={d}");
            }
        }
    }
}

#[test]
fn composition_examples() {
    let d = -23;
    let f = QuadForm::new(2, 1, 3);
    assert_eq!(compose_definite(&f, &f), QuadForm::new(2, -1, 3));
    assert_eq!(compose_definite(&QuadForm::principal(d), &f), f);
    assert_eq!(compose_definite(&f, &f.inverse()), QuadForm::principal(d));
    assert_eq!(pow_definite(&f, 3), QuadForm::principal(d));
}

#[test]
fn composition_represents_products() {
    for d in [-23i128, -47, -56, -71, -104, -231, -1155, -4199] {
        let forms: Vec<QuadForm> = reduced_forms_definite(d).into_iter().filter(QuadForm::is_primitive).collect();
        for f in &forms {
            for g in &forms {
                if gcd(f.a, g.a) != 1 {
                    continue;
                }
                let h = compose_definite(f, g);
                assert!(represents(&h, f.a * g.a), "D={d} {f:?} {g:?}");
            }
        }
    }
}

#[test]
fn group_laws_up_to_1e4() {
    for n in 3..=10_000i128 {
        let d = -n;
        if !is_fundamental_brute(d) {
            continue;
        }
        let forms: Vec<QuadForm> = reduced_forms_definite(d).into_iter().filter(QuadForm::is_primitive).collect();
        let e = QuadForm::principal(d);
        for f in &forms {
            assert_eq!(compose_definite(&e, f), *f);
            assert_eq!(compose_definite(f, &reduce(f.inverse())), e);
        }
        for (i, f) in forms.iter().enumerate() {
            for g in &forms[i..] {
                let fg = compose_definite(f, g);
                assert!(forms.contains(&fg), "D={d}");
                assert_eq!(fg, compose_definite(g, f));
            }
        }
        let k = forms.len();
        for t in 0..k.min(6) {
            let (a, b, c) = (&forms[t], &forms[(3 * t + 1) % k], &forms[(7 * t + 2) % k]);
            assert_eq!(compose_definite(&compose_definite(a, b), c), compose_definite(a, &compose_definite(b, c)));
        }
    }
}

#[test]
fn imaginary_examples() {
    let c = cfg();
    let cl =
        |m: i128| class_group_imaginary_full(&fundamental_discriminant(m).unwrap(), &c).unwrap().structure.to_string();
    assert_eq!(cl(-23), "[3]");
    assert_eq!(cl(-3), "[]");
    assert_eq!(cl(-47), "[5]");
    assert_eq!(cl(-15), "[2]");
    assert_eq!(cl(-1155), "[2,2,2]");
    assert_eq!(cl(-15015), "[12,2,2,2]");
    assert_eq!(cl(-255255), "[16,2,2,2,2]");
    assert!(class_group_imaginary_full(&fundamental_discriminant(7).unwrap(), &c).is_err());
}

#[test]
fn class_numbers_match_brute_force_to_1e5() {
    let c = cfg();
    let mut count = 0;
    for n in 3..100_000i128 {
        let d = -n;
        if !is_fundamental_brute(d) {
            continue;
        }
        let disc = discriminant_from_value(d).unwrap();
        let g = class_group_imaginary_full(&disc, &c).unwrap();
        assert_eq!(g.h() as u64, brute_class_number(d), "D={d}");
        assert_eq!(g.structure.p_rank(2) + 1, disc.ramified_count, "D={d}");
        count += 1;
    }
    let mut expected = 0;
    for_each_imaginary(3, 99_999, |_, _, _, _| expected += 1);
    assert_eq!(count, expected);
}

#[test]
fn conditional_bound_agrees_with_enumeration() {
    let c = ClassGroupConfig { enum_cap: 100_000, ..cfg() };
    for n in (100_003..1_000_000i128).step_by(997) {
        let d = -n;
        let Ok(disc) = discriminant_from_value(d) else { continue };
        let g = class_group_imaginary_full(&disc, &c).unwrap();
        assert!(g.grh_conditional);
        assert_eq!(g.h() as u64, class_number_enum(d), "D={d}");
    }
}

#[test]
fn real_examples() {
    let c = cfg();
    let real = |m: i128| class_group_real_full(&fundamental_discriminant(m).unwrap(), &c).unwrap();
    let g = real(105);
    assert_eq!((g.narrow.to_string(), g.ordinary.to_string()), ("[2,2]".into(), "[2]".into()));
    let g = real(221);
    assert_eq!((g.narrow.to_string(), g.ordinary.to_string()), ("[4]".into(), "[2]".into()));
    let g = real(5);
    assert!(g.narrow.is_trivial() && g.ordinary.is_trivial());
    assert_eq!(g.unit_norm, -1);
    assert_eq!(real(4849845).narrow.to_string(), "[4,2,2,2,2,2]");
}

#[test]
fn narrow_and_ordinary_match_unit_norm() {
    let c = cfg();
    for m in 2..3000i128 {
        let Ok(disc) = fundamental_discriminant(m) else { continue };
        let g = class_group_real_full(&disc, &c).unwrap();
        let u = fundamental_unit(m, 1_000_000).unwrap();
        assert_eq!(g.unit_norm, u.norm, "m={m}");
        let ratio = g.narrow.order() / g.ordinary.order();
        assert_eq!(ratio, if u.norm == -1 { 1 } else { 2 }, "m={m}");
        assert_eq!(g.narrow.p_rank(2) + 1, disc.ramified_count, "m={m}");
    }
}

#[test]
fn p_part_examples() {
    let g = epsclass::group::AbelianGroupStructure::from_chain(vec![39, 3, 3, 3, 3]).unwrap();
    assert_eq!(p_part(&g, 3).to_string(), "[3,3,3,3,3]");
    let g = epsclass::group::AbelianGroupStructure::from_chain(vec![12, 2, 2, 2]).unwrap();
    assert_eq!(p_part(&g, 2).to_string(), "[4,2,2,2]");
    assert!(p_part(&g, 5).is_trivial());
}

#[test]
fn genus_examples() {
    let gd = |m: i128| genus_delta(&fundamental_discriminant(m).unwrap()).unwrap();
    assert_eq!(gd(-255255), (6, 3));
    assert_eq!(gd(-15), (2, 0));
    assert_eq!(gd(4849845), (7, 1));
}

#[test]
fn delta_is_valuation_of_squares() {
    let c = cfg();
    for n in (3..20_000i128).step_by(7) {
        let Ok(disc) = discriminant_from_value(-n) else { continue };
        let g = class_group_imaginary_full(&disc, &c).unwrap().structure;
        let (_, delta) = genus_delta_from(&disc, &g).unwrap();
        assert_eq!(delta, g.power(2).v_p_order(2), "D={}", -n);
    }
}

#[test]
fn scan_examples() {
    let rows = scan_local_maxima(1, 100, Statistic::GenusNormalized { eps: 0.05 });
    let first: Vec<(i128, u128)> = rows.iter().take(3).map(|r| (r.d, r.h)).collect();
    assert_eq!(first, vec![(-3, 1), (-23, 3), (-47, 5)]);
    for (r, c) in rows.iter().zip([0.9729084349, 2.7738186179, 4.5411678851]) {
        assert!((r.stat - c).abs() < 1e-9, "{r:?}");
    }
    let rows = scan_local_maxima(1, 4000, Statistic::PExponent { p: 3 });
    let got: Vec<(i128, u128)> = rows.iter().map(|r| (r.d, r.h)).collect();
    assert_eq!(got, vec![(-23, 3), (-199, 9), (-983, 27), (-3671, 81)]);
    for (r, c) in rows.iter().zip([0.70075861, 0.83019008, 0.95661699, 1.07074359]) {
        assert!((r.stat - c).abs() < 1e-8);
    }
    let rows = scan_local_maxima(1, 100, Statistic::PExponent { p: 2 });
    let got: Vec<(i128, f64)> = rows.iter().map(|r| (r.d, r.stat)).collect();
    for ((d, s), (de, se)) in got.iter().zip([(-15i128, 0.51191605), (-39, 0.75680144), (-95, 0.91326208)]) {
        assert_eq!(*d, de);
        assert!((s - se).abs() < 1e-8);
    }
}

#[test]
fn prime_discriminant_reports() {
    let rows = scan_local_maxima(1, 100_000, Statistic::GenusNormalized { eps: 0.05 });
    let rep = prime_disc_report(&rows);
    assert!(rep.all_prime, "{:?}", rep.violations);
    let raw = scan_local_maxima(1, 100_000, Statistic::Raw { eps: 0.05 });
    let rep = prime_disc_report(&raw);
    assert!(!rep.all_prime);
    assert!(rep.violations.contains(&-15));
    assert!(prime_disc_report(&[]).all_prime);
}

#[test]
fn normic_searches() {
    let c = cfg();
    let rows = normic_search(2, 3, 2, 1, 1024, &c).unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        let hp = r.record.structure.as_ref().unwrap().order();
        assert_eq!(r.record.h % hp, 0);
        assert_eq!(r.a * r.a + r.m * r.b * r.b, 1024);
    }
    let rows = normic_search(3, 2, 2, 1, 2048, &c).unwrap();
    assert!(rows.iter().any(|r| r.record.structure.as_ref().unwrap().order() >= 3));
    for r in &rows {
        assert_eq!(r.record.h as u64, class_number_enum(r.record.d));
        assert_eq!(r.a * r.a + r.m * r.b * r.b, 2048);
    }
}

#[test]
fn c_kp_examples() {
    assert_eq!(c_kp(1, 1000.0), 0.0);
    assert!((c_kp(81, 3671.0) - 1.07074359).abs() < 1e-8);
    let cp = c_kp(1u128 << 32, 73786976290585731943u128 as f64);
    assert!((cp - 0.969696).abs() < 1e-6, "{cp}");
}

proptest! {
    #[test]
    fn composition_is_associative(n in 3i128..2_000_000, i in any::<usize>(), j in any::<usize>(), k in any::<usize>()) {
        let Ok(disc) = discriminant_from_value(-n) else { return Ok(()) };
        let forms: Vec<QuadForm> = reduced_forms_definite(disc.value).into_iter().filter(QuadForm::is_primitive).collect();
        let (a, b, c) = (&forms[i % forms.len()], &forms[j % forms.len()], &forms[k % forms.len()]);
        prop_assert_eq!(compose_definite(&compose_definite(a, b), c), compose_definite(a, &compose_definite(b, c)));
    }

    #[test]
    fn restricted_two_rank_is_genus_rank(m in -3_000_000i128..3_000_000) {
        let Ok(disc) = fundamental_discriminant(m) else { return Ok(()) };
        if !disc.is_imaginary() && disc.abs() > 200_000 {
            return Ok(());
        }
        let (n, _) = genus_delta(&disc).unwrap();
        prop_assert_eq!(n, disc.ramified_count);
    }
}

#[test]
fn group_cap_is_a_budget_error() {
    // h(-3299) = 27
    let disc = discriminant_from_value(-3299).unwrap();
    assert_eq!(class_group_imaginary_full(&disc, &cfg()).unwrap().h(), 27);
    let tight = ClassGroupConfig { group_cap: 10, ..cfg() };
    assert!(class_group_imaginary_full(&disc, &tight).err().unwrap().is_budget());
    let real = discriminant_from_value(4849845).unwrap();
    assert!(class_group_real_full(&real, &tight).err().unwrap().is_budget());
}
