use std::time::Instant;

use nct_core::ncsymbol::parse_expr;
use nct_core::parametrix::{compute_parametrix, operator_symbol, Half};

/// Each line of the data files is one `coeff*monomial*word` term carrying the
/// full coefficient of that (word, monomial) pair in b2.
fn check(file: &str, half: Half) {
    let start = Instant::now();
    let b2 = compute_parametrix(&operator_symbol(half)).b2;
    let txt = std::fs::read_to_string(format!("{}/data/{}", env!("CARGO_MANIFEST_DIR"), file))
        .expect("golden data");
    let mut n = 0;
    for line in txt.lines().filter(|l| !l.trim().is_empty()) {
        let e = parse_expr(line).expect("golden line parses");
        assert_eq!(e.monomial_count(), 1, "{}", line);
        let (w, p) = e.iter().next().unwrap();
        let (m, c) = p.iter().next().unwrap();
        assert_eq!(&b2.coeff_at(w, m), c, "{}", line);
        n += 1;
    }
    assert!(n >= 12);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn b2_functions_half() {
    check("b2_functions.txt", Half::Functions);
}

#[test]
fn b2_forms_half() {
    check("b2_forms.txt", Half::Forms);
}
