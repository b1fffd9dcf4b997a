//! The acceptance gate: eleven criteria, one test and one printed
//! pass/fail line each, run at full sample counts and stated tolerances.
//!
//! Every criterion delegates to the library's own verification suites
//! (`ccbox::verify`), so the gate measures exactly what `ccbox verify`
//! reports, at the documented defaults. Failures print every failing
//! check with its measured value before panicking.

use ccbox::verify::{
    self, family_completeness_checks, monotonicity_checks, oracle_agreement_checks,
    preorder_structure_checks, sensitivity_checks, Check,
};

fn gate(criterion: &str, checks: Vec<Check>) {
    let passed = checks.iter().all(|c| c.passed);
    println!(
        "criterion {criterion}: {}",
        if passed { "PASS" } else { "FAIL" }
    );
    if !passed {
        for check in checks.iter().filter(|c| !c.passed) {
            eprintln!("  {}: {}", check.name, check.detail);
        }
        panic!("criterion {criterion} failed");
    }
}

#[test]
fn criterion_01_group_structure() {
    gate("01 group-structure", verify::group_checks().unwrap());
}

#[test]
fn criterion_02_operation_counts() {
    gate("02 operation-counts", verify::counts_checks().unwrap());
}

#[test]
fn criterion_03_catalog_values() {
    let mut checks = verify::table2_checks().unwrap();
    checks.extend(verify::table3_checks().unwrap());
    gate("03 catalog-values", checks);
}

#[test]
fn criterion_04_mixture_ordering() {
    gate(
        "04 mixture-ordering",
        verify::table3_ordering_checks().unwrap(),
    );
}

#[test]
fn criterion_05_closed_forms_vs_oracles() {
    gate(
        "05 closed-form-vs-oracle",
        oracle_agreement_checks(500, 200).unwrap(),
    );
}

#[test]
fn criterion_06_monotonicity() {
    gate("06 monotonicity", monotonicity_checks(300).unwrap());
}

#[test]
fn criterion_07_quantum_catalog() {
    gate("07 quantum-catalog", verify::table4_checks().unwrap());
}

#[test]
fn criterion_08_symmetrization_projection() {
    gate(
        "08 symmetrization-projection",
        verify::reynolds_checks().unwrap(),
    );
}

#[test]
fn criterion_09_sensitivity_and_classes() {
    gate(
        "09 sensitivity-and-classes",
        sensitivity_checks(100, 20).unwrap(),
    );
}

#[test]
fn criterion_10_preorder_structure() {
    gate("10 preorder-structure", preorder_structure_checks().unwrap());
}

#[test]
fn criterion_11_family_completeness() {
    gate(
        "11 family-completeness",
        family_completeness_checks(30).unwrap(),
    );
}
