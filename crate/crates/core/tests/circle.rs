use zerolab::averaging::CirclePoints;
use zerolab::circle::{attractor_iterate, circle_zeros, d_operator, min_gap_trend, CirclePolynomial, PolynomialSpec};

fn jittered_polynomial(seed: u64, n: usize, jitter: f64) -> CirclePolynomial {
    let points = CirclePoints::jittered(seed, 0, n, jitter).unwrap();
    CirclePolynomial::from_angles(points.angles()).unwrap()
}

#[test]
fn operator_keeps_zeros_on_the_circle_and_interlacing() {
    for seed in 0..5 {
        let f = jittered_polynomial(seed, 10, 0.4);
        let z = circle_zeros(&f).unwrap();
        let dz = circle_zeros(&d_operator(&f).unwrap()).unwrap();
        assert_eq!(dz.angles.len(), 10);
        assert!(dz.interlaces(&z), "seed {seed}");
    }
}

#[test]
fn min_gap_trend_is_reported() {
    let mut decreases = 0;
    let mut total = 0;
    for seed in 0..10 {
        let gaps = min_gap_trend(&jittered_polynomial(seed, 12, 0.4), 6).unwrap();
        assert_eq!(gaps.len(), 7);
        assert!(gaps.iter().all(|g| g.is_finite() && *g > 0.0));
        decreases += gaps.windows(2).filter(|w| w[1] < w[0] - 1e-12).count();
        total += gaps.len() - 1;
    }
    println!("circle min-gap decreases: {decreases} of {total} steps");
}

#[test]
fn attractor_from_a_config_polynomial() {
    let spec: PolynomialSpec =
        serde_json::from_str(r#"{"zeros": [[2.0, 0.0], [0.0, 0.5], [-1.0, -1.0], [0.3, 1.2]]}"#).unwrap();
    let f = spec.build().unwrap();
    let report = attractor_iterate(&f, 80).unwrap();
    let a0 = f.coeffs()[0].norm() / f.coeffs()[4].norm();
    assert!((report.radius - a0.powf(0.25)).abs() < 1e-12);
    assert!(report.max_distance < 1e-6, "{}", report.max_distance);
}
