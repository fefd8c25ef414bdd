use twinhalo_web::{bell_bound, bragg_transfer, fringes};

#[test]
fn fringe_rows() {
    let rows = fringes(1.48, 0.6, 0.0, 9).unwrap();
    assert_eq!(rows.len(), 36);
    // E at Φ = 0 is the amplitude
    let [e0, envelope, s] = bell_bound(1.48, 0.6, 0.0).unwrap()[..] else { panic!() };
    assert!((rows[3] - e0).abs() < 1e-12);
    assert!((e0 - 0.347).abs() < 0.005);
    assert!(e0 < envelope);
    assert!(s < 2.0);
    assert!(fringes(1.48, 0.6, 0.0, 1).is_err());
    assert!(fringes(1.48, -0.6, 0.0, 9).is_err());
}

#[test]
fn mirror_pulse_spectrum() {
    let out = bragg_transfer(0.405, 3.162, -1.5, -0.5, 5).unwrap();
    assert_eq!(out.len(), 4 * 5 + 2);
    // middle row is κ = −1
    assert!((out[8] + 1.0).abs() < 1e-12);
    assert!(out[11] > 0.98);
    assert!(out[20] > 0.98 && out[21] > 0.98);
}
