use hyperbn::bnsolver::{
    certify_solution, nonexistence_scan, rayleigh_quotient, shoot_k1, shoot_k2, solve_bn, transform_u_v, Direction,
    ScanBox,
};
use hyperbn::constants::sobolev_constant;
use hyperbn::{Error, GeodesicBall, ProblemDims};

fn ball(r: f64) -> GeodesicBall {
    GeodesicBall::from_euclidean(r).unwrap()
}

#[test]
fn bubble_profile_is_reproduced() {
    // v = A(1+r²)^{−(n−2)/2} solves −Δv = v^{q−1} when A^{4/(n−2)} = n(n−2)
    for n in [3u32, 5, 6] {
        let d = ProblemDims::new(n, 1).unwrap();
        let nf = n as f64;
        let amp = (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0);
        let shot = shoot_k1(0.0, d, ball(0.9), amp).unwrap();
        let want = amp * (1.0f64 + 0.81).powf(-(nf - 2.0) / 2.0);
        assert!((shot.v_end - want).abs() / want < 1e-8, "n {n}: {} vs {want}", shot.v_end);
    }
}

#[test]
fn no_second_order_solution_without_the_linear_term() {
    let d = ProblemDims::new(5, 1).unwrap();
    let bx = ScanBox { a_lo: 0.1, a_hi: 1e3, a_count: 120, ..ScanBox::default() };
    let report = nonexistence_scan(0.0, d, ball(0.5), &bx).unwrap();
    assert_eq!(report.certified, 0);
}

#[test]
fn boundary_value_is_continuous_in_the_amplitude() {
    let d = ProblemDims::new(5, 1).unwrap();
    let a: Vec<f64> = (0..200).map(|i| 0.1 * 1.03f64.powi(i)).collect();
    let v: Vec<f64> = a.iter().map(|&x| shoot_k1(0.0, d, ball(0.5), x).unwrap().v_end).collect();
    for i in 1..v.len() - 1 {
        let local = (v[i + 1] - v[i - 1]).abs().max(1e-12);
        assert!((v[i] - v[i - 1]).abs() <= 10.0 * local, "jump at a = {}", a[i]);
    }
}

#[test]
fn biharmonic_solution_certifies_and_stays_below_sobolev_level() {
    let d = ProblemDims::new(5, 2).unwrap();
    let b = ball(0.5);
    let s = sobolev_constant(d).value;
    let mut levels = Vec::new();
    for lambda in [350.0, 450.0, 520.0] {
        let sol = solve_bn(lambda, d, b).unwrap();
        let cert = certify_solution(&sol);
        assert!(cert.passed, "lambda {lambda}: {cert:?}");
        let q = rayleigh_quotient(&sol);
        assert!(q < s, "lambda {lambda}: quotient {q} vs {s}");
        levels.push(sol.nehari_level());
    }
    assert!(levels.windows(2).all(|w| w[1] < w[0]), "{levels:?}");
}

#[test]
fn no_biharmonic_solution_below_the_branch() {
    let d = ProblemDims::new(5, 2).unwrap();
    assert!(matches!(solve_bn(100.0, d, ball(0.5)), Err(Error::NotFound(_))));
}

#[test]
fn biharmonic_shot_blows_up_for_large_data() {
    let d = ProblemDims::new(5, 2).unwrap();
    assert!(matches!(shoot_k2(0.0, d, ball(0.5), 1e3, 1e3), Err(Error::BlowUp { .. })));
}

#[test]
fn transplantation_is_an_involution() {
    let d = ProblemDims::new(5, 2).unwrap();
    let r: Vec<f64> = (0..50).map(|i| 0.9 * i as f64 / 49.0).collect();
    let v: Vec<f64> = r.iter().map(|x| (1.0 - x * x).powi(2)).collect();
    let (rho, u) = transform_u_v(&r, &v, d, Direction::EuclideanToHyperbolic);
    let (back_r, back_v) = transform_u_v(&rho, &u, d, Direction::HyperbolicToEuclidean);
    for i in 0..r.len() {
        assert!((back_r[i] - r[i]).abs() < 1e-14);
        assert!((back_v[i] - v[i]).abs() < 1e-14);
    }
}
