mod common;

#[test]
fn closed_forms_match_high_precision_grid() {
    let (checked, bad) = common::formula_grid_mismatches(1e-9);
    assert!(checked >= 100);
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
