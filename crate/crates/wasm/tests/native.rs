use dunkl_wasm::{cone_radii_values, free_wave_values, kernel_curve_values};

#[test]
fn kernel_curve_is_cosine_plus_i_sine_at_k0() {
    let v = kernel_curve_values(0.0, 1.5, 4.0, 41).unwrap();
    assert_eq!(v.len(), 123);
    for p in v.chunks(3) {
        assert!((p[1] - (1.5 * p[0]).cos()).abs() < 1e-12);
        assert!((p[2] - (1.5 * p[0]).sin()).abs() < 1e-12);
    }
}

#[test]
fn kernel_curve_rejects_bad_input() {
    assert!(kernel_curve_values(-1.0, 1.0, 4.0, 10).is_err());
    assert!(kernel_curve_values(0.5, 1.0, 4.0, 1).is_err());
}

#[test]
fn free_wave_splits_into_two_pulses_at_k0() {
    let t = 3.0;
    let v = free_wave_values(0.0, 0.0, t).unwrap();
    for p in v.chunks(2) {
        let x = p[0];
        let exact = 0.5 * ((-0.5 * (x - t).powi(2)).exp() + (-0.5 * (x + t).powi(2)).exp());
        assert!((p[1] - exact).abs() < 1e-6, "x = {x}: {} vs {exact}", p[1]);
    }
    let start = free_wave_values(0.7, 1.0, 0.0).unwrap();
    assert!(start.chunks(2).all(|p| (p[1] - (-0.5 * (p[0] - 1.0).powi(2)).exp()).abs() < 1e-6));
}

#[test]
fn cone_radii_stay_inside_the_cone() {
    let v = cone_radii_values(0.7, 1.0).unwrap();
    assert_eq!(v.len(), 33);
    for r in v.chunks(3) {
        assert!(r[1] <= r[2] + 0.6, "{r:?}");
    }
    assert!(cone_radii_values(0.7, 5.0).is_err());
}
