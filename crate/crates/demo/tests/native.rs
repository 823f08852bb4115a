use irregular_wls_demo::{fit, mask, samples};

#[test]
fn hypercube_mask_is_full() {
    let m = mask("hypercube", 5).unwrap();
    assert_eq!(m.len(), 25);
    assert!(m.iter().all(|&v| v == 1));
}

#[test]
fn annulus_mask_has_a_hole() {
    let m = mask("annulus", 11).unwrap();
    // centre cell (0, 0)
    assert_eq!(m[5 * 11 + 5], 0);
    // (0.5, 0) lies in the ring
    assert_eq!(m[5 * 11 + 7 + 1], 1);
    assert!(mask("torus", 11).is_err());
    assert!(mask("annulus", 1).is_err());
}

#[test]
fn samples_are_reproducible_and_inside() {
    let a = samples("swiss_cheese", 50, 3).unwrap();
    assert_eq!(a, samples("swiss_cheese", 50, 3).unwrap());
    assert_eq!(a.len(), 100);
    let cheese = irregular_wls::domains::make_swiss_cheese();
    for p in a.chunks(2) {
        assert!(cheese.contains(p));
    }
}

#[test]
fn fit_report_on_the_cheese() {
    let r = fit(
        "swiss_cheese",
        "cheese",
        "total_degree",
        4,
        50.0,
        "adapt",
        1,
        16,
    )
    .unwrap();
    assert_eq!(r.status(), "ok");
    assert_eq!(r.n(), 15);
    assert!(r.kappa() <= 10.0);
    assert!(r.cv_error() < 1e-3);
    let e = r.errors();
    assert_eq!(e.len(), 256);
    let m = mask("swiss_cheese", 16).unwrap();
    for (v, inside) in e.iter().zip(m) {
        assert_eq!(v.is_nan(), inside == 0);
    }
    assert!(fit(
        "swiss_cheese",
        "runge",
        "total_degree",
        4,
        50.0,
        "adapt",
        1,
        16
    )
    .is_err());
}
