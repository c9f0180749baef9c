//! Acceptance criteria 1 to 12, one line of output each.
//!
//! The report goes to standard error and shows up in a plain `cargo test` run.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use epsclass::arith::{factor, mv_bounds_hold, SpfSieve};
use epsclass::cubic::{cubic_conductors_up_to, cubic_polynomials, integer_roots, parse_fixture_file, validate_file};
use epsclass::epsanalysis::{find_n0, golden_max_x0, x_of_n_forms, BoundParams};
use epsclass::filtration::{
    filtration, filtration_iterated, from_quadratic, order_identity_check, rank_from_t, synthesize, SynthProfile,
};
use epsclass::pram::scan::{parse_tor_scan_fixture, tor_scan_imaginary};
use epsclass::pram::{ktilde_from, ktilde_index, reflection_check, tor_report};
use epsclass::quadclass::imag::{class_group_imaginary_full, BatchCounts};
use epsclass::quadclass::real::{class_group_real_full, Cycles};
use epsclass::quadclass::scan::{for_each_imaginary, prime_disc_report, scan_local_maxima, Statistic};
use epsclass::quadclass::{discriminant_from_value, fundamental_discriminant, is_fundamental_with, ClassGroupConfig};
use num_integer::Integer;
use rand::{Rng, SeedableRng};

/// What a criterion reports when it holds.
enum Verdict {
    Pass(String),
    /// Holds except for a part that is out of budget; the substitute check passed.
    Stretch(String),
}

type Outcome = Result<Verdict, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn cfg() -> ClassGroupConfig {
    ClassGroupConfig::default()
}

fn fixture_text(path: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{path}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

/// Reduced primitive forms of discriminant `d < 0`, counted directly.
fn brute_class_number(d: i128) -> u128 {
    let mut h = 0;
    let mut a = 1i128;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) || a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            h += 1;
        }
        a += 1;
    }
    h
}

fn criterion_1() -> Outcome {
    let c = cfg();
    let mut fields = 0;
    for n in 3..100_000u64 {
        let d = -(n as i128);
        let Ok(disc) = discriminant_from_value(d) else { continue };
        let h = class_group_imaginary_full(&disc, &c).map_err(|e| format!("D={d}: {e}"))?.h();
        ensure!(h == brute_class_number(d), "D={d}: h={h}, enumeration {}", brute_class_number(d));
        fields += 1;
    }
    let mut expected = 0;
    for_each_imaginary(3, 99_999, |_, _, _, _| expected += 1);
    ensure!(fields == expected, "{fields} fields, the sieve finds {expected}");
    for (d, h) in [(-23i128, 3u128), (-3, 1), (-47, 5)] {
        let got = class_group_imaginary_full(&discriminant_from_value(d).unwrap(), &c).unwrap().h();
        ensure!(got == h, "h({d}) = {got}");
    }
    let structures =
        [(-15i128, "[2]"), (105, "[2,2]"), (-1155, "[2,2,2]"), (-15015, "[12,2,2,2]"), (-255255, "[16,2,2,2,2]")];
    let real_restricted = [(4849845i128, "[4,2,2,2,2,2]")];
    for (m, want) in structures.iter().chain(&real_restricted) {
        let disc = fundamental_discriminant(*m).unwrap();
        let got = if disc.is_imaginary() {
            class_group_imaginary_full(&disc, &c).unwrap().structure
        } else {
            class_group_real_full(&disc, &c).unwrap().narrow
        };
        ensure!(got.to_string() == *want, "m={m}: {got}");
    }
    Ok(Verdict::Pass(format!("{fields} discriminants, 9 printed values")))
}

fn criterion_2() -> Outcome {
    const MAX: u64 = 1_000_000;
    let sieve = SpfSieve::new(MAX as usize + 1);
    let omega = |d: u64| sieve.factor(d).len() as u32;
    let counts = BatchCounts::new(3, MAX);
    let mut imaginary = 0;
    for d in 3..=MAX {
        if !is_fundamental_with(-(d as i64), &sieve) {
            continue;
        }
        let two_torsion = counts.ambiguous_of(d) as u64;
        ensure!(two_torsion == 1 << (omega(d) - 1), "D=-{d}: #Cl[2] = {two_torsion}");
        imaginary += 1;
    }
    let mut real = 0;
    for d in 5..=MAX {
        if !is_fundamental_with(d as i64, &sieve) {
            continue;
        }
        let two_torsion = Cycles::new(d as i128, Some(&sieve)).ambiguous_count() as u64;
        ensure!(two_torsion == 1 << (omega(d) - 1), "D={d}: #Cl+[2] = {two_torsion}");
        real += 1;
    }
    Ok(Verdict::Pass(format!("{imaginary} imaginary and {real} real discriminants")))
}

fn criterion_3() -> Outcome {
    let genus = scan_local_maxima(1, 1_000_000, Statistic::GenusNormalized { eps: 0.05 });
    let printed: [(i128, u128, f64); 10] = [
        (-3, 1, 0.972908434869468710702241668941166407),
        (-23, 3, 2.773818617890694606606085132125197163),
        (-47, 5, 4.541167885124564220325740509229014479),
        (-71, 7, 6.292403751297605635733619062872115785),
        (-167, 11, 9.678872599268429560299054329160821597),
        (-191, 13, 11.400332501352005304200415816510168367),
        (-239, 15, 13.080709822134822456679612679136456819),
        (-311, 19, 16.460180420909375330798097085967676763),
        (-431, 21, 18.045019802162182082161592477498679286),
        (-479, 25, 21.425532320359474690178248184779886979),
    ];
    ensure!(genus.len() >= 10, "{} genus rows", genus.len());
    for (r, (d, h, c)) in genus.iter().zip(printed) {
        ensure!((r.d, r.h) == (d, h), "row ({}, {}) where ({d}, {h}) is printed", r.d, r.h);
        ensure!(rel_close(r.stat, c, 1e-10), "D={d}: C={} vs {c}", r.stat);
    }
    let printed_3: [(i128, u128, f64); 6] = [
        (-23, 3, 0.70075861284442195481324),
        (-199, 9, 0.83019007976763598642971),
        (-983, 27, 0.95661698654993161545339),
        (-3671, 81, 1.07074359233325762042197),
        (-29399, 243, 1.06778367209896382287404),
        (-178559, 729, 1.09019287826209803280171),
    ];
    let printed_2: [(i128, u128, f64); 10] = [
        (-15, 2, 0.511916049619630978775355357),
        (-39, 4, 0.756801438067480149325544162),
        (-95, 8, 0.913262080279460212705801846),
        (-399, 16, 0.925899677503555682939700450),
        (-791, 32, 1.038687593312750474942887870),
        (-2519, 64, 1.062075159346033035976072133),
        (-10295, 128, 1.050289653382181398975491576),
        (-39431, 256, 1.048009122470377471769618833),
        (-132599, 512, 1.057783767181715434360601717),
        (-328319, 1024, 1.091420745999194423260975917),
    ];
    for (p, printed) in [(3u64, &printed_3[..]), (2, &printed_2[..])] {
        let rows = scan_local_maxima(1, 1_000_000, Statistic::PExponent { p });
        ensure!(rows.len() == printed.len(), "p={p}: {} rows, {} printed up to 10^6", rows.len(), printed.len());
        for (r, &(d, hp, c)) in rows.iter().zip(printed) {
            ensure!(r.d == d, "p={p}: D={} where {d} is printed", r.d);
            ensure!(r.h % hp == 0 && (r.h / hp) % p as u128 != 0, "p={p} D={d}: h={} vs h_p={hp}", r.h);
            ensure!(rel_close(r.stat, c, 1e-10), "p={p} D={d}: C={} vs {c}", r.stat);
        }
    }
    Ok(Verdict::Pass("10 genus rows, 6 rows for p=3, 10 rows for p=2 at |D| <= 10^6".into()))
}

fn criterion_4() -> Outcome {
    let mut total = 0;
    for eps in [0.05, 0.1] {
        let rows = scan_local_maxima(1, 1_000_000, Statistic::GenusNormalized { eps });
        let report = prime_disc_report(&rows);
        ensure!(report.all_prime, "eps={eps}: composite |D| at {:?}", report.violations);
        ensure!(rows.iter().all(|r| r.error.is_none()), "eps={eps}: failed rows");
        total += report.checked;
    }
    Ok(Verdict::Pass(format!("{total} local maxima, all with prime |D|")))
}

/// Discriminant of `x^3 + a x^2 + b x + c` from the coefficient formula.
fn disc3(poly: &[i128]) -> i128 {
    let (c, b, a) = (poly[0], poly[1], poly[2]);
    a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c
}

fn criterion_5() -> Outcome {
    let n = cubic_polynomials(1983163).map_err(|e| e.to_string())?.len();
    ensure!(n == 16, "f=1983163 gives {n} fields");
    let n = cubic_polynomials(3895721091).map_err(|e| e.to_string())?.len();
    ensure!(n == 8, "f=3895721091 gives {n} fields");
    let conductors = cubic_conductors_up_to(100_000);
    let mut fields = 0;
    for &f in &conductors {
        let list = cubic_polynomials(f).map_err(|e| e.to_string())?;
        let omega = factor(f).unwrap().omega();
        ensure!(list.len() == 1 << (omega - 1), "f={f}: {} fields", list.len());
        let ff = (f * f) as i128;
        for x in &list {
            let d = disc3(&x.poly);
            ensure!(d % ff == 0, "f={f}: f^2 does not divide {d}");
            let s = d / ff;
            let r = (s as f64).sqrt().round() as i128;
            ensure!(r * r == s, "f={f}: {} has non-square cofactor {s}", x.poly_string());
            ensure!(integer_roots(&x.poly).is_empty(), "f={f}: {} is reducible", x.poly_string());
        }
        fields += list.len();
    }
    Ok(Verdict::Pass(format!("{} conductors, {fields} fields up to 10^5", conductors.len())))
}

const TABLE_FIXTURES: [&str; 13] = [
    "p3/conductor_tables.txt",
    "p3/exceptional_classes.txt",
    "p3/exceptional_search.txt",
    "p3/maximal_rank.txt",
    "p3/tor_conductor_1983163.txt",
    "p3/tor_large.txt",
    "p5/conductor_13981.txt",
    "p5/exceptional_classes.txt",
    "p7/exceptional_classes.txt",
    "p11/exceptional_classes.txt",
    "p2/family.txt",
    "p2/tor_family.txt",
    "p2/tor_large.txt",
];

fn criterion_6() -> Outcome {
    let (mut rows, mut cp_rows) = (0, 0);
    for path in TABLE_FIXTURES {
        let file = parse_fixture_file(&fixture_text(path)).map_err(|e| format!("{path}: {e}"))?;
        for r in validate_file(&file) {
            let failed: Vec<_> = r.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
            ensure!(failed.is_empty(), "{path}:{} {}: {failed:?}", r.line, r.label);
            for name in ["rank-window", "chevalley", "zp-dimension"] {
                ensure!(r.checks.iter().any(|c| c.name == name), "{path}:{} has no {name} check", r.line);
            }
            rows += 1;
        }
        for fix in &file.rows {
            let (Some(order), Some(cp)) = (fix.tor_order, fix.cp) else { continue };
            let base = match file.cp_base {
                Some(f) => epsclass::epsanalysis::log_sqrt_disc(f, file.p.unwrap_or(3)),
                None => fix.log_sqrt_disc(),
            };
            let computed = (order as f64).ln() / base;
            ensure!(rel_close(computed, cp, 5e-6), "{path}:{}: Cp {cp} vs {computed}", fix.line);
            cp_rows += 1;
        }
    }
    ensure!(cp_rows > 0, "no printed Cp values");
    Ok(Verdict::Pass(format!("{rows} rows in {} files, {cp_rows} Cp values", TABLE_FIXTURES.len())))
}

fn criterion_7() -> Outcome {
    let profile = SynthProfile { max_log_order: 8, ..SynthProfile::default() };
    let mut modules = 0;
    let mut seed = 0u64;
    while modules < 1000 {
        let n = 2 + (seed % 3) as usize;
        seed += 1;
        let m = match synthesize(3, n, seed, &profile) {
            Ok(m) => m,
            Err(e) if e.is_budget() => continue,
            Err(e) => return Err(format!("seed {seed}: {e}")),
        };
        let order = m.order().map_err(|e| e.to_string())?;
        ensure!(order <= 3u128.pow(8), "seed {seed}: #M = {order}");
        let direct = filtration(&m, n).map_err(|e| format!("seed {seed}: {e}"))?;
        let iterated = filtration_iterated(&m, n).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(direct == iterated, "seed {seed}: the two filtrations differ");
        ensure!(order_identity_check(&direct), "seed {seed}: order identity fails");
        modules += 1;
    }
    let c = cfg();
    let mut fields = 0;
    let mut failure = None;
    for_each_imaginary(3, 100_000, |d_abs, h, _, _| {
        if failure.is_some() {
            return;
        }
        let run = || -> Result<(), String> {
            let disc = discriminant_from_value(-(d_abs as i128)).map_err(|e| e.to_string())?;
            let n = disc.ramified_count;
            let module = from_quadratic(&disc).map_err(|e| e.to_string())?;
            let r = filtration(&module, n).map_err(|e| e.to_string())?;
            ensure!(rank_from_t(2, n, &r.t).0 as usize == n - 1, "rank from t is not N-1");
            let class = class_group_imaginary_full(&disc, &c).map_err(|e| e.to_string())?;
            ensure!(class.h() == h as u128, "h differs from the batch count");
            let delta = class.structure.v_p_order(2) - (n as u32 - 1);
            ensure!(r.big_delta() == delta, "Delta {} vs v_2(h) - (N-1) = {delta}", r.big_delta());
            Ok(())
        };
        match run() {
            Ok(()) => fields += 1,
            Err(e) => failure = Some(format!("D=-{d_abs}: {e}")),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Verdict::Pass(format!("{modules} modules (last seed {seed}), {fields} imaginary fields")))
}

fn criterion_8() -> Outcome {
    let params = BoundParams::new(7, 0.1).map_err(|e| e.to_string())?;
    let (n0, x0) = find_n0(&params);
    ensure!(rel_close(n0, 2.935394e16, 2e-3), "N0 = {n0}");
    ensure!(rel_close(x0, 8.8e15, 5e-3), "X0 = {x0}");
    let (n_max, x_max) = golden_max_x0(&params, 0.0, 2.0 * n0.ln(), 1e-10);
    ensure!(rel_close(n_max, n0, 1e-6) && rel_close(x_max, x0, 1e-9), "golden section gives ({n_max}, {x_max})");
    Ok(Verdict::Pass(format!("N0 = {n0:.6e}, X0 = {x0:.6e}")))
}

fn criterion_9() -> Outcome {
    let c = cfg();
    let printed: [(i128, &str, f64); 5] = [
        (-15, "[2]", 0.51191604961963097877535535772960454081),
        (105, "[2,2]", 0.59574824743531323067786608868687642325),
        (-1155, "[2,2,2]", 0.58975726471501581115878339498474155345),
        (-15015, "[2,2,2,2]", 0.57661327808675875001115538902772596330),
        (221, "[16]", 1.0272342185833848333397010211662592994),
    ];
    for (m, t, cp) in printed {
        let r = tor_report(&fundamental_discriminant(m).unwrap(), 2, &c).map_err(|e| format!("m={m}: {e}"))?;
        ensure!(r.structure.to_string() == t, "m={m}: T = {}", r.structure);
        ensure!(rel_close(r.c_tilde, cp, 1e-10), "m={m}: Cp = {} vs {cp}", r.c_tilde);
    }
    let big = discriminant_from_value(-101091716).unwrap();
    let r = tor_report(&big, 2, &c).map_err(|e| e.to_string())?;
    ensure!(r.structure.to_string() == "[1024,4,2]", "D=-101091716: T = {}", r.structure);
    ensure!(rel_close(r.c_tilde, 0.97777114254342282551717, 1e-10), "D=-101091716: Cp = {}", r.c_tilde);
    ensure!(ktilde_from(&r) == Ok(2), "D=-101091716: index {:?}", ktilde_from(&r));
    ensure!(ktilde_index(&fundamental_discriminant(-15).unwrap(), 2, &c) == Ok(2), "m=-15: index is not 2");

    // the index identity on every field in budget
    let mut checked = 0;
    for d_abs in 3..=10_000i128 {
        let Ok(disc) = discriminant_from_value(-d_abs) else { continue };
        for p in [2u128, 3] {
            let rep = tor_report(&disc, p, &c).map_err(|e| format!("D=-{d_abs} p={p}: {e}"))?;
            let k = ktilde_from(&rep).map_err(|e| format!("D=-{d_abs} p={p}: {e}"))?;
            let cl = rep.class_p.order();
            ensure!(k * rep.structure.order() == cl * rep.w, "D=-{d_abs} p={p}: #T #index != #Cl_p #W");
            ensure!(cl % k == 0 && k == p.pow(k.ilog(p)), "D=-{d_abs} p={p}: index {k} for #Cl_p = {cl}");
            checked += 1;
        }
    }
    let large = discriminant_from_value(-73786976290585731943).unwrap();
    match ktilde_index(&large, 2, &c) {
        Ok(k) => {
            ensure!(k == 1 << 25, "D=-73786976290585731943: index {k}");
            Ok(Verdict::Pass(format!("6 printed fields, index 2^25 for the large field, {checked} identity checks")))
        }
        Err(e) if e.is_budget() => Ok(Verdict::Stretch(format!(
            "6 printed fields, {checked} identity checks; index for D=-73786976290585731943 out of budget ({e})"
        ))),
        Err(e) => Err(format!("D=-73786976290585731943: {e}")),
    }
}

fn criterion_10() -> Outcome {
    let c = cfg();
    let mut fields = 0;
    for d_abs in 3..=10_000i128 {
        let Ok(disc) = discriminant_from_value(-d_abs) else { continue };
        let r = reflection_check(&disc, &c).map_err(|e| format!("D=-{d_abs}: {e}"))?;
        ensure!(r.holds, "D=-{d_abs}: rk T = {}, rk Cl^S = {}, #S = {}", r.rk_t, r.rk_s, r.s_count);
        fields += 1;
    }
    Ok(Verdict::Pass(format!("{fields} imaginary fields")))
}

fn criterion_11() -> Outcome {
    let blocks = parse_tor_scan_fixture(&fixture_text("tor_scan/p2.txt")).map_err(|e| e.to_string())?;
    let block = blocks.iter().find(|b| b.p == 2 && b.interval == "[10^6, 2*10^6]").ok_or("no [10^6, 2*10^6] block")?;
    let rows = tor_scan_imaginary(2, 1_000_000, 2_000_000, 1, &cfg());
    ensure!(rows.iter().all(|r| r.error.is_none()), "failed rows in the scan");
    for printed in &block.rows {
        let r = rows.iter().find(|r| r.d == printed.d).ok_or(format!("D={} is not emitted", printed.d))?;
        ensure!(r.m == printed.m && r.vptor == printed.vptor, "D={}: m={} vptor={}", r.d, r.m, r.vptor);
        ensure!(rel_close(r.cp, printed.cp, 1e-10), "D={}: Cp={} vs {}", r.d, r.cp, printed.cp);
    }
    let last = rows.last().unwrap();
    ensure!((last.d, last.vptor) == (-1347524, 10), "last emitted row is D={} vptor={}", last.d, last.vptor);
    Ok(Verdict::Pass(format!("{} printed rows among {} emitted", block.rows.len(), rows.len())))
}

fn criterion_12() -> Outcome {
    for p in [3u64, 5, 7, 11] {
        let r = mv_bounds_hold(100_000, p);
        ensure!(r.holds, "p={p}: {:?}", r.first_violation);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    let primes = [3u64, 5, 7, 11, 13];
    for _ in 0..10_000 {
        let p = primes[rng.gen_range(0..primes.len())];
        let n = 10f64.powf(rng.gen_range(0.31..12.0));
        let eps = 10f64.powf(rng.gen_range(-3.0..0.0));
        let delta = (rng.gen_range(0.0..=1.0) * (p as f64 - 2.0) * (n - 1.0)).floor();
        let params = BoundParams::new(p, eps).unwrap().with_o1(rng.gen_range(-5.0..5.0));
        let (a, b) = x_of_n_forms(n, &params, delta);
        let scale = n * (1.0 + n.ln()) * p as f64 * (1.0 + params.o1.abs());
        ensure!((a - b).abs() <= 1e-12 * a.abs().max(1e-3 * scale), "p={p} N={n} eps={eps}: {a} vs {b}");
    }
    Ok(Verdict::Pass("k <= 10^5 for p = 3, 5, 7, 11; 10^4 dual-form samples".into()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("class numbers and structures", criterion_1),
        ("2-rank equals N-1 for |D| <= 10^6", criterion_2),
        ("successive maxima tables", criterion_3),
        ("local maxima have prime |D|", criterion_4),
        ("cyclic cubic enumeration", criterion_5),
        ("fixture validation", criterion_6),
        ("filtration engine", criterion_7),
        ("N0 bound", criterion_8),
        ("torsion groups", criterion_9),
        ("reflection identity", criterion_10),
        ("torsion scan p=2 on [10^6, 2*10^6]", criterion_11),
        ("analytic bounds", criterion_12),
    ];
    let mut failed = Vec::new();
    for (i, (title, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(Verdict::Pass(d)) => ("PASS", d),
            Ok(Verdict::Stretch(d)) => ("PASS (stretch)", d),
            Err(e) => {
                failed.push(i + 1);
                ("FAIL", e)
            }
        };
        // written to the stderr handle directly so the report survives output capture
        let line = format!("criterion {:>2}: {status}: {title}: {detail} [{secs:.1}s]\n", i + 1);
        std::io::stderr().write_all(line.as_bytes()).unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
