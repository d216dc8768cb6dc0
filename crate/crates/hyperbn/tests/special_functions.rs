use hyperbn::specfun::hyper::{hyp2f1, HypergeometricParams};
use hyperbn::specfun::legendre::{legendre_p, legendre_p_deriv, legendre_p_kappa, legendre_p_lower_deriv, LegendreParams};
use hyperbn::specfun::spherical::{plancherel_density, spherical_fn, spherical_fn_profile};
use hyperbn::specfun::{gamma, ln_gamma};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Compensated power series `Σ t_j` with `t_{j+1} = t_j · ratio(j)`.
fn series(ratio: impl Fn(f64) -> f64, terms: usize) -> f64 {
    let (mut sum, mut comp, mut t) = (1.0f64, 0.0f64, 1.0f64);
    for j in 0..terms {
        t *= ratio(j as f64);
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + comp
}

/// Shift up by 30 and use the Stirling series there.
fn ln_gamma_stirling(x: f64) -> f64 {
    let shift = 30;
    let y = x + shift as f64;
    let mut s = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * std::f64::consts::PI).ln();
    let bernoulli = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0];
    for (i, b) in bernoulli.iter().enumerate() {
        s += b / y.powi(2 * i as i32 + 1);
    }
    s - (0..shift).map(|j| (x + j as f64).ln()).sum::<f64>()
}

#[test]
fn ln_gamma_against_shifted_stirling() {
    for x in [0.3, 1.7, 7.3, 42.5] {
        let (v, sign) = ln_gamma(x).unwrap();
        assert_eq!(sign, 1.0);
        let want = ln_gamma_stirling(x);
        // near the minimum of Γ the value is small against the shifted sum
        assert!((v - want).abs() < 1e-13 * want.abs().max(1.0), "x = {x}");
    }
}

#[test]
fn hypergeometric_beyond_unit_disc_via_pfaff_series() {
    let (a, b, c, z) = (0.7, 2.1, 1.5, -3.2);
    let got = hyp2f1(HypergeometricParams { a, b, c }, z).unwrap();
    // F(a,b;c;z) = (1−z)^{−a} F(a, c−b; c; z/(z−1)), and z/(z−1) ≈ 0.76
    let w = z / (z - 1.0);
    let f = series(|j| (a + j) * (c - b + j) / ((c + j) * (j + 1.0)) * w, 10_000);
    assert!(rel(got, (1.0 - z).powf(-a) * f) < 1e-12);
}

#[test]
fn legendre_against_direct_series() {
    let (nu, mu, rho) = (1.37, -1.5, 0.8);
    let z = -(0.5f64 * rho).sinh().powi(2);
    let f = series(|j| (-nu + j) * (nu + 1.0 + j) / ((1.0 - mu + j) * (j + 1.0)) * z, 200);
    let want = (1.0 / (0.5f64 * rho).tanh()).powf(mu) * f / gamma(1.0 - mu).unwrap();
    assert!(rel(legendre_p(LegendreParams::new(nu, mu), rho).unwrap(), want) < 1e-13);
}

#[test]
fn raising_derivative_against_central_difference() {
    let p = LegendreParams::new(1.37, -1.5);
    let (rho, h) = (0.8, 1e-5);
    let fd = (legendre_p(p, rho + h).unwrap() - legendre_p(p, rho - h).unwrap()) / (2.0 * h);
    assert!(rel(legendre_p_deriv(p, rho).unwrap(), fd) < 1e-7);
}

#[test]
fn lowering_and_raising_give_the_same_derivative() {
    for nu in [-2.5, -0.3, 0.0, 1.37, 2.9] {
        for mu in [-3.0, -2.5, -1.5, -0.5, 0.0] {
            for rho in [0.1, 0.5, 1.3, 3.0] {
                let kappa = nu * (nu + 1.0);
                let lower = legendre_p_lower_deriv(kappa, mu, rho).unwrap();
                let raise = legendre_p_deriv(LegendreParams::new(nu, mu + 1.0), rho).unwrap();
                let scale = raise.abs().max(legendre_p_kappa(kappa, mu + 1.0, rho).unwrap().abs());
                assert!((lower - raise).abs() <= 1e-8 * scale, "nu {nu} mu {mu} rho {rho}");
            }
        }
    }
}

/// RK4 on `φ″ + (n−1) coth ρ φ′ + c φ = 0`, `c = ((n−1)² + τ²)/4`, started
/// from the Taylor jet at a small radius.
fn spherical_by_shooting(tau: f64, n: u32, rho: f64) -> f64 {
    let m = n as f64 - 1.0;
    let c = (m * m + tau * tau) / 4.0;
    let r0 = 1e-4;
    let mut y = [1.0 - c * r0 * r0 / (2.0 * n as f64), -c * r0 / n as f64];
    let f = |r: f64, y: [f64; 2]| [y[1], -m / r.tanh() * y[1] - c * y[0]];
    let steps = 20_000;
    let h = (rho - r0) / steps as f64;
    let mut r = r0;
    for _ in 0..steps {
        let k1 = f(r, y);
        let k2 = f(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
    }
    y[0]
}

#[test]
fn spherical_function_against_ode_shooting() {
    for n in [3, 5, 7] {
        for tau in [0.0, 2.0, 7.5] {
            for rho in [0.4, 1.0, 3.0] {
                let got = spherical_fn(tau, n, rho).unwrap();
                let want = spherical_by_shooting(tau, n, rho);
                assert!((got - want).abs() < 1e-8, "n {n} tau {tau} rho {rho}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn spherical_function_eigen_residual() {
    let h = 1e-3;
    for n in [3, 5, 7] {
        let m = n as f64 - 1.0;
        for tau in [0.0, 1.0, 4.0, 10.0] {
            let c = (m * m + tau * tau) / 4.0;
            let rhos: Vec<f64> = (0..=3900).map(|i| 0.1 - 2.0 * h + i as f64 * h).collect();
            let phi = spherical_fn_profile(tau, n, &rhos).unwrap();
            for i in (2..rhos.len() - 2).step_by(50) {
                let d1 = (phi[i - 2] - 8.0 * phi[i - 1] + 8.0 * phi[i + 1] - phi[i + 2]) / (12.0 * h);
                let d2 = (-phi[i - 2] + 16.0 * phi[i - 1] - 30.0 * phi[i] + 16.0 * phi[i + 1] - phi[i + 2]) / (12.0 * h * h);
                let res = d2 + m / rhos[i].tanh() * d1 + c * phi[i];
                assert!(res.abs() < 1e-8 * (1.0 + c), "n {n} tau {tau} rho {}: {res}", rhos[i]);
            }
        }
    }
}

#[test]
fn plancherel_density_is_even_and_vanishes_at_zero() {
    for n in [3, 5, 6] {
        for tau in [0.5, 1.0, 3.0] {
            assert_eq!(plancherel_density(tau, n), plancherel_density(-tau, n));
        }
        assert!(plancherel_density(1e-6, n) < 1e-9);
    }
}
