use epsclass::arith::factor;
use epsclass::cubic::*;
use proptest::prelude::*;

/// Discriminant of the monic cubic `x^3 + a x^2 + b x + c`.
fn disc3(poly: &[i128]) -> i128 {
    let (c, b, a) = (poly[0], poly[1], poly[2]);
    a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c
}

fn isqrt_exact(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt() as i128;
    (r.saturating_sub(2)..=r + 2).find(|x| x * x == n)
}

fn fixture_text(path: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{path}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn conductor_examples() {
    assert!(is_cubic_conductor(7));
    assert!(is_cubic_conductor(657));
    assert!(!is_cubic_conductor(15));
    assert!(!is_cubic_conductor(49));
}

#[test]
fn polynomial_examples() {
    let f7 = cubic_polynomials(7).unwrap();
    assert_eq!(f7.len(), 1);
    assert_eq!(f7[0].poly_string(), "x^3+x^2-2*x-1");
    assert_eq!(disc3(&f7[0].poly), 49);
    let f9 = cubic_polynomials(9).unwrap();
    assert_eq!(f9[0].poly_string(), "x^3-3*x+1");
    assert_eq!(disc3(&f9[0].poly), 81);
    let big = cubic_polynomials(1983163).unwrap();
    assert_eq!(big.len(), 16);
    // the printed table lists the same 16 polynomials in another order
    let printed = parse_fixture_file(&fixture_text("p3/conductor_tables.txt")).unwrap();
    let mut want: Vec<Vec<i128>> =
        printed.rows.iter().filter(|r| r.f == 1983163).map(|r| r.poly.clone().unwrap()).collect();
    let mut got: Vec<Vec<i128>> = big.iter().map(|x| x.poly.clone()).collect();
    want.sort();
    got.sort();
    assert_eq!(got, want);
    assert!(big.iter().any(|x| x.poly_string() == "x^3+x^2-661054*x+49725976"));
    assert_eq!(cubic_polynomials(3895721091).unwrap().len(), 8);
}

#[test]
fn discriminant_filter_examples() {
    for f in [7u128, 9] {
        for field in cubic_polynomials(f).unwrap() {
            assert!(discriminant_filter(&field).unwrap());
        }
    }
    let pure = CubicField { f: 7, e: 0, a: 0, b: 0, poly: vec![-2, 0, 0, 1] };
    assert_eq!(disc3(&pure.poly), -108);
    assert!(!discriminant_filter(&pure).unwrap());
    let reducible = CubicField { f: 7, e: 0, a: 0, b: 0, poly: vec![0, -1, 0, 1] };
    assert!(discriminant_filter(&reducible).is_err());
}

#[test]
fn count_is_two_to_n_minus_one_up_to_1e5() {
    let conductors = cubic_conductors_up_to(100_000);
    for f in 7..=100_000u128 {
        assert_eq!(conductors.binary_search(&f).is_ok(), is_cubic_conductor(f), "f={f}");
    }
    for &f in &conductors {
        let fields = cubic_polynomials(f).unwrap();
        let n = factor(f).unwrap().omega();
        assert_eq!(fields.len(), 1 << (n - 1), "f={f}");
        for field in &fields {
            let d = disc3(&field.poly);
            let s = d / (f as i128 * f as i128);
            assert_eq!(d % (f as i128 * f as i128), 0, "f={f}");
            assert!(isqrt_exact(s).is_some(), "f={f} {}", field.poly_string());
            assert!(integer_roots(&field.poly).is_empty());
            assert!(discriminant_filter(field).unwrap());
            assert_eq!(cubic_discriminant(&field.poly).unwrap(), d.into());
        }
        let mut polys: Vec<_> = fields.iter().map(|x| x.poly.clone()).collect();
        polys.dedup();
        assert_eq!(polys.len(), fields.len());
    }
}

#[test]
fn genus_helpers() {
    assert_eq!(ambiguous_number(7, 3).unwrap(), 1);
    assert_eq!(ambiguous_number(1983163, 3).unwrap(), 81);
    assert_eq!(ambiguous_number(13981, 5).unwrap(), 25);
    assert_eq!(rank_window(4, 3), (3, 6));
    assert_eq!(rank_window(1, 7), (0, 0));
    assert_eq!(rank_window(5, 3), (4, 8));
}

#[test]
fn fixture_line_examples() {
    let fix = parse_fixture_line("f=657 N=2 P=x^3-219*x-1241 Cl=[3,3]").unwrap();
    assert_eq!((fix.f, fix.n, fix.cl.to_string()), (657, 2, "[3,3]".to_string()));
    assert_eq!(delta_from_fixture(&fix).unwrap(), (1, 1));
    let fix = parse_fixture_line("f=15561 N=4 P=x^3-5187*x+141778 Cl=[9,3,3,3]").unwrap();
    assert_eq!(delta_from_fixture(&fix).unwrap(), (1, 2));
    assert!(parse_fixture_line("f=7 P=x^3+x^2-2*x-1 Cl=[]").unwrap().cl.is_trivial());
    assert!(parse_fixture_line("Cl=[]").is_err());
    let fix = parse_fixture_line("f=85276009 P=x^3-x^2-28425336*x-53436473936 Cl=[3,3,3,3,3]").unwrap();
    assert_eq!(delta_from_fixture(&fix).unwrap(), (0, 0));
    match parse_fixture_line("f=657 P=x^3-2?9*x Cl=[3,3]") {
        Err(epsclass::Error::Parse { column, .. }) => assert!(column > 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn validation_examples() {
    let fix = parse_fixture_line("f=1983163  P=x^3+x^2-661054*x+97321888 Cl=[39,3,3,3,3]=[13]x[3,3,3,3,3]*").unwrap();
    let r = validate_fixture(&fix);
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let fix = parse_fixture_line("f=85276009 P=x^3-x^2-28425336*x-53436473936 Cl=[6,6,3,3,3,3]=[2,2]x[3,3,3,3,3,3]*")
        .unwrap();
    assert!(validate_fixture(&fix).passed());
    let fix = parse_fixture_line("f=7 P=x^3+x^2-2*x-1 Cl=[]").unwrap();
    assert!(validate_fixture(&fix).passed());
    // a 2-part of odd dimension cannot occur for p = 3
    let bad = parse_fixture_line("f=1983163  P=x^3+x^2-661054*x+97321888 Cl=[6,3,3,3,3]").unwrap();
    assert!(!validate_fixture(&bad).passed());
}

#[test]
fn every_fixture_file_validates() {
    let files = [
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
    let mut rows = 0;
    for path in files {
        let file = parse_fixture_file(&fixture_text(path)).unwrap();
        assert!(!file.rows.is_empty(), "{path}");
        for r in validate_file(&file) {
            assert!(r.passed(), "{path}:{} {}: {:?}", r.line, r.label, r.failures().collect::<Vec<_>>());
            rows += 1;
        }
    }
    assert!(rows > 50);
}

#[test]
fn printed_torsion_constants() {
    let file = parse_fixture_file(&fixture_text("p3/tor_conductor_1983163.txt")).unwrap();
    assert_eq!(file.rows.len(), 16);
    for fix in &file.rows {
        let (order, cp) = (fix.tor_order.unwrap(), fix.cp.unwrap());
        assert_eq!(order, fix.tor.as_ref().unwrap().order());
        let computed = (order as f64).ln() / (1983163f64).ln();
        assert!((computed - cp).abs() <= 1e-6 * cp);
    }
}

proptest! {
    #[test]
    fn enumerated_fields_are_cyclic(start in 7u128..3_000_000) {
        let f = (start..).find(|&f| is_cubic_conductor(f)).unwrap();
        let fields = cubic_polynomials(f).unwrap();
        prop_assert_eq!(fields.len(), 1usize << (factor(f).unwrap().omega() - 1));
        for field in &fields {
            let d = disc3(&field.poly);
            prop_assert_eq!(d % (f * f) as i128, 0);
            prop_assert!(isqrt_exact(d / (f * f) as i128).is_some());
            prop_assert_eq!(field.a * field.a + 27 * field.b * field.b, 4 * f as i128);
        }
    }
}
