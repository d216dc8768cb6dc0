//! Elementary spherical functions of H^n and the Plancherel density.
//!
//! `φ_τ(ρ) = ₂F₁(a, b; n/2; −sinh²(ρ/2))` with `a + b = n − 1` and
//! `ab = ((n−1)² + τ²)/4`. The series is used near the origin; elsewhere the
//! Liouville form `ψ = sinh^{(n−1)/2}ρ · φ`,
//! `ψ″ = ((n−1)(n−3)/(4 sinh²ρ) − τ²/4) ψ`, is integrated outward, and past
//! `ρ = 20` the potential is negligible so `ψ` is continued as an exact
//! sinusoid.

use num_complex::Complex64;

use super::gamma::{ln_abs_gamma_imag, ln_gamma, ln_gamma_complex};
use super::hyper::{hyp2f1_sp, hyp2f1_sp_deriv};
use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions};

const FAR: f64 = 20.0;

fn params(tau: f64, n: u32) -> (f64, f64, f64) {
    let nm1 = n as f64 - 1.0;
    (nm1, 0.25 * (nm1 * nm1 + tau * tau), 0.5 * n as f64)
}

fn gamma_half_n(n: u32) -> f64 {
    ln_gamma(0.5 * n as f64).unwrap().0.exp()
}

fn in_series_region(tau: f64, rho: f64) -> bool {
    let sh = (0.5 * rho).sinh();
    sh <= 1.0 && tau.abs() * sh <= 4.0
}

fn series_value(tau: f64, n: u32, rho: f64) -> Result<(f64, f64)> {
    let (s, p, c) = params(tau, n);
    let g = gamma_half_n(n);
    let sh = (0.5 * rho).sinh();
    let z = -sh * sh;
    let f = g * hyp2f1_sp(s, p, c, z)?;
    let df = g * hyp2f1_sp_deriv(s, p, c, z)? * (-0.5 * rho.sinh());
    Ok((f, df))
}

fn ln_sinh(rho: f64) -> f64 {
    if rho > 20.0 {
        rho - std::f64::consts::LN_2 + (-(-2.0 * rho).exp()).ln_1p()
    } else {
        rho.sinh().ln()
    }
}

/// `φ_τ(ρ)` on an ascending grid of radii, sharing one outward integration.
pub fn spherical_fn_profile(tau: f64, n: u32, rhos: &[f64]) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if rhos.windows(2).any(|w| w[1] < w[0]) || rhos.first().is_some_and(|r| *r < 0.0) {
        return Err(Error::ProfileMismatch("radii must be ascending and non-negative".into()));
    }
    let tau = tau.abs();
    let mut out = vec![0.0; rhos.len()];
    let split = rhos.partition_point(|&r| in_series_region(tau, r));
    for (o, &r) in out.iter_mut().zip(rhos).take(split) {
        *o = if r == 0.0 { 1.0 } else { series_value(tau, n, r)?.0 };
    }
    if split == rhos.len() {
        return Ok(out);
    }

    let half = 0.5 * (n as f64 - 1.0);
    let pot = 0.25 * (n as f64 - 1.0) * (n as f64 - 3.0);
    let rho0 = 2.0 * (if tau > 4.0 { 4.0 / tau } else { 1.0 }).asinh();
    let (f0, df0) = series_value(tau, n, rho0)?;
    let (s0, c0) = (rho0.sinh(), rho0.cosh());
    let sa = s0.powf(half);
    let psi0 = [sa * f0, half * sa / s0 * c0 * f0 + sa * df0];

    let rest = &rhos[split..];
    let near: Vec<f64> = rest.iter().copied().filter(|&r| r <= FAR).collect();
    let end = rest.last().copied().unwrap().min(FAR).max(rho0);
    let rhs = |r: f64, y: &[f64; 2]| {
        let s = r.sinh();
        [y[1], (pot / (s * s) - 0.25 * tau * tau) * y[0]]
    };
    let mut stops = near.clone();
    stops.push(FAR.min(end));
    let opts = OdeOptions { dense_record: false, ..OdeOptions::with_tol(1e-12) };
    let sol = integrate(rhs, psi0, rho0, end, &stops, &opts);
    if !sol.is_complete() {
        return Err(Error::NotFound(format!("spherical function integration stopped at rho = {}", sol.last().0)));
    }
    let lookup = |r: f64| -> [f64; 2] {
        let i = sol.t.partition_point(|&t| t < r);
        if i < sol.t.len() && sol.t[i] == r {
            sol.y[i]
        } else {
            // only reachable when r == rho0 was not recorded separately
            psi0
        }
    };
    let (t_far, y_far) = sol.last();
    let w = 0.5 * tau;
    for (o, &r) in out[split..].iter_mut().zip(rest) {
        let psi = if r <= FAR {
            if r <= rho0 { series_value(tau, n, r)?.0 * r.sinh().powf(half) } else { lookup(r)[0] }
        } else if w == 0.0 {
            y_far[0] + y_far[1] * (r - t_far)
        } else {
            let d = r - t_far;
            y_far[0] * (w * d).cos() + y_far[1] / w * (w * d).sin()
        };
        *o = psi * (-half * ln_sinh(r)).exp();
    }
    Ok(out)
}

/// `φ_τ(ρ)`, normalized by `φ_τ(0) = 1`.
pub fn spherical_fn(tau: f64, n: u32, rho: f64) -> Result<f64> {
    Ok(spherical_fn_profile(tau, n, &[rho])?[0])
}

/// `|𝔠(τ)|^{−2}` with
/// `𝔠(τ) = 2^{n−1−iτ} Γ(n/2) Γ(iτ) / (Γ((n−1+iτ)/2) Γ((1+iτ)/2))`.
pub fn plancherel_density(tau: f64, n: u32) -> f64 {
    let t = tau.abs();
    if t == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let ln_c = (nf - 1.0) * std::f64::consts::LN_2 + ln_gamma(0.5 * nf).unwrap().0 + ln_abs_gamma_imag(t)
        - ln_gamma_complex(Complex64::new(0.5 * (nf - 1.0), 0.5 * t)).re
        - ln_gamma_complex(Complex64::new(0.5, 0.5 * t)).re;
    (-2.0 * ln_c).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_references() {
        assert_eq!(spherical_fn(3.0, 5, 0.0).unwrap(), 1.0);
        let cases = [
            (2.0, 3, 1.0, 0.716_022_915_360_433_9),
            (7.0, 5, 3.0, 5.029_839_880_365_195e-4),
            (30.0, 5, 6.0, 1.656_263_345_909_905_7e-7),
            (0.0, 7, 25.0, 3.776_878_116_149_39e-30),
        ];
        for (t, n, r, v) in cases {
            let got = spherical_fn(t, n, r).unwrap();
            assert!((got / v - 1.0).abs() < 1e-8, "tau={t} n={n} rho={r}: {got} vs {v}");
        }
    }

    #[test]
    fn n3_closed_form() {
        // φ_τ(ρ) = sin(τρ/2) / ((τ/2) sinh ρ) for n = 3
        let rhos: Vec<f64> = (1..200).map(|i| i as f64 * 0.2).collect();
        let tau = 3.3;
        let got = spherical_fn_profile(tau, 3, &rhos).unwrap();
        for (r, g) in rhos.iter().zip(got) {
            let exact = (0.5 * tau * r).sin() / (0.5 * tau * r.sinh());
            assert!((g - exact).abs() < 1e-9 * (1.0 + exact.abs()) + 1e-13, "rho={r}");
        }
    }

    #[test]
    fn plancherel_values() {
        assert!((plancherel_density(2.0, 3) - 1.0).abs() < 1e-13);
        assert!((plancherel_density(2.0, 5) - 0.055_555_555_555_555_55).abs() < 1e-14);
        assert!((plancherel_density(1.5, 6) - 0.005_164_450_068_327_807).abs() < 1e-15);
        assert_eq!(plancherel_density(0.0, 5), 0.0);
        assert_eq!(plancherel_density(-1.2, 5), plancherel_density(1.2, 5));
    }
}
