mod common;

#[test]
fn analytic_gradients_match_finite_differences() {
    let r = common::check_gradients();
    assert!(r.is_ok(), "{r:?}");
}

#[test]
fn straight_through_copies_decoder_input_gradient() {
    let r = common::check_straight_through();
    assert!(r.is_ok(), "{r:?}");
}
