use edusim_validation as support;

#[test]
fn derived_values_match_independent_oracles() {
    support::assert_all(&support::derived_checks());
}

#[test]
fn source_constants_are_verbatim() {
    support::assert_all(&support::calibration_constants());
}
