use hyperbn::constants::pk_symbol;
use hyperbn::greens::{
    certify_kernel, geometric_grid, heat_kernel_any, heat_kernel_mass, p1_inverse_closed, p1_inverse_kernel,
    resolvent_kernel_p1, resolvent_kernel_pk, resolvent_kernel_transform, Construction, KernelProfile,
};
use hyperbn::helgason::{plancherel_check, radial_inverse_values, radial_transform_fn, SpectralProfile, TransformGrid};
use hyperbn::{ProblemDims, RadialProfile};

fn dims(n: u32, k: u32) -> ProblemDims {
    ProblemDims::new(n, k).unwrap()
}

#[test]
fn heat_kernel_mass_in_four_dimensions() {
    assert!((heat_kernel_mass(4, 0.5).unwrap() - 1.0).abs() < 1e-5);
}

#[test]
fn heat_kernel_decreases_in_distance() {
    for n in 3..=6 {
        for t in [0.1, 1.0, 5.0] {
            let vals: Vec<f64> = (0..200).map(|i| heat_kernel_any(0.05 * i as f64, t, n).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0]), "n {n} t {t}");
        }
    }
}

#[test]
fn heat_kernel_profile_settles_for_large_time() {
    for n in [3, 5] {
        let shape = |t: f64| {
            let h0 = heat_kernel_any(0.0, t, n).unwrap();
            [0.25, 0.5, 1.0].map(|r| heat_kernel_any(r, t, n).unwrap() / h0)
        };
        let (a, b) = (shape(20.0), shape(40.0));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() / y < 1e-2, "n {n}");
        }
    }
}

#[test]
fn heat_kernel_transform_is_the_semigroup_symbol() {
    let d = dims(5, 2);
    let t = 0.5;
    let spec = radial_transform_fn(|r| heat_kernel_any(r, t, 5).unwrap(), d, 20.0, &TransformGrid::default()).unwrap();
    for (&tau, &v) in spec.tau().iter().zip(&spec.values) {
        let want = (-(16.0 + tau * tau) * t / 4.0).exp();
        assert!((v - want).abs() < 1e-4, "tau {tau}");
    }
}

#[test]
fn p1_resolvent_transform_is_the_inverse_symbol() {
    let d = dims(5, 1);
    let lambda = 0.1;
    let kernel = resolvent_kernel_p1(lambda, d, &geometric_grid(1e-2, 8.0, 16)).unwrap();
    let grid = TransformGrid::new(10.0, 0.5, 8).unwrap();
    let spec = radial_transform_fn(|r| kernel.evaluate(r), d, 100.0, &grid).unwrap();
    for (&tau, &v) in spec.tau().iter().zip(&spec.values) {
        let want = 1.0 / (pk_symbol(tau, 1) - lambda);
        assert!((v - want).abs() / want < 1e-4, "tau {tau}");
    }
}

#[test]
fn p1_resolvent_decay_rate_grows_with_spectral_parameter() {
    let d = dims(5, 1);
    let slope = |lambda: f64| {
        let k = resolvent_kernel_p1(lambda, d, &[3.0, 4.0, 5.0, 6.0]).unwrap();
        (k.values()[3].ln() - k.values()[1].ln()) / 2.0
    };
    let s: Vec<f64> = [0.0, 0.1, 0.2].iter().map(|&l| slope(l)).collect();
    assert!(s[0] < s[1] && s[1] < s[2], "{s:?}");
    for (&l, &v) in [0.0, 0.1, 0.2].iter().zip(&s) {
        // −((n−1)/2 + √(1/4 − λ)) up to the algebraic correction
        let rate = -(2.0 + (0.25f64 - l).sqrt());
        assert!((v - rate).abs() < 0.1, "lambda {l}: {v} vs {rate}");
    }
}

#[test]
fn closed_form_matches_quadrature_at_unit_distance() {
    let d = dims(5, 1);
    let k = resolvent_kernel_p1(0.0, d, &[0.5, 1.0, 1.5, 2.0]).unwrap();
    assert!((k.values()[1] - p1_inverse_closed(1.0, d)).abs() / p1_inverse_closed(1.0, d) < 1e-6);
}

#[test]
fn closed_form_inverse_certifies() {
    let d = dims(5, 1);
    let cert = certify_kernel(&p1_inverse_kernel(d, &geometric_grid(1e-2, 8.0, 96)).unwrap());
    assert!(cert.positive && cert.monotone && cert.decay_constant.is_finite());
    assert!(cert.max_delta_error < 1e-3, "{}", cert.max_delta_error);
}

#[test]
fn perturbed_kernel_fails_monotonicity() {
    let d = dims(5, 1);
    let grid = geometric_grid(1e-2, 8.0, 96);
    let values: Vec<f64> = grid.iter().map(|&r| p1_inverse_closed(r, d) + 0.01 * r.sin()).collect();
    let profile = RadialProfile::new(grid, values, d).unwrap();
    let kernel = KernelProfile::tabulated(0.0, profile, Construction::ClosedForm).unwrap();
    assert!(!certify_kernel(&kernel).monotone);
}

#[test]
fn biharmonic_resolvent_certifies() {
    let d = dims(5, 2);
    let kernel = resolvent_kernel_pk(0.3, d, &geometric_grid(1e-2, 8.0, 96)).unwrap();
    let cert = certify_kernel(&kernel);
    assert!(cert.positive && cert.monotone && cert.decay_constant.is_finite());
    assert!(cert.max_delta_error < 1e-2, "{}", cert.max_delta_error);
    // G·sinh(ρ/2)^{n−4} bounded on [0.5, 5]
    let bounded = kernel
        .grid()
        .iter()
        .zip(kernel.values())
        .filter(|(r, _)| (0.5..=5.0).contains(*r))
        .map(|(r, g)| g * (0.5 * r).sinh())
        .fold(0.0f64, f64::max);
    assert!(bounded <= cert.decay_constant * (1.0 + 1e-12));
}

#[test]
fn transform_inversion_recovers_the_p1_inverse() {
    let d = dims(5, 1);
    let grid = geometric_grid(0.3, 3.0, 20);
    let kernel = resolvent_kernel_transform(0.0, d, &grid, &TransformGrid::default()).unwrap();
    for (&r, &g) in grid.iter().zip(kernel.values()) {
        let c = p1_inverse_closed(r, d);
        assert!((g - c).abs() / c < 1e-4, "rho {r}");
    }
}

#[test]
fn transform_is_linear() {
    let d = dims(5, 2);
    let grid = TransformGrid::default();
    let f = |r: f64| (-r * r).exp();
    let g = |r: f64| (-0.5 * r * r).exp() * r.cos();
    let tf = radial_transform_fn(f, d, 12.0, &grid).unwrap();
    let tg = radial_transform_fn(g, d, 12.0, &grid).unwrap();
    let tc = radial_transform_fn(|r| 2.0 * f(r) - 3.0 * g(r), d, 12.0, &grid).unwrap();
    // rounding is relative to the size of the integrals, not of their tails
    let scale = (0..grid.len()).map(|i| tf.values[i].abs() + tg.values[i].abs()).fold(0.0, f64::max);
    for i in 0..grid.len() {
        let want = 2.0 * tf.values[i] - 3.0 * tg.values[i];
        assert!((tc.values[i] - want).abs() <= 1e-13 * scale);
    }
}

#[test]
fn zero_spectrum_inverts_to_zero() {
    let spec = SpectralProfile::from_fn(dims(5, 2), TransformGrid::default(), |_| 0.0);
    assert!(radial_inverse_values(&spec, &[0.0, 0.5, 2.0]).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn gaussian_plancherel_in_three_dimensions() {
    let d = dims(3, 1);
    let grid: Vec<f64> = (0..=1600).map(|i| 8.0 * i as f64 / 1600.0).collect();
    let profile = RadialProfile::from_fn(grid, d, |r| (-r * r).exp()).unwrap();
    assert!(plancherel_check(&profile, &TransformGrid::default()).unwrap().gap < 1e-4);
}
