mod common;

#[test]
fn baseline_samplers_and_estimators() {
    let r = common::check_baselines();
    assert!(r.is_ok(), "{r:?}");
}
