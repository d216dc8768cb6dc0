//! Log-gamma by the Lanczos approximation (g = 607/128, 15 terms).

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_274e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162_4e-6,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

fn lanczos_real(x: f64) -> f64 {
    // ln Γ(x) for x ≥ 1/2
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let base = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * base.ln() - base + sum.ln()
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `(ln|Γ(x)|, sign Γ(x))`.
pub fn ln_gamma(x: f64) -> Result<(f64, f64)> {
    if is_pole(x) {
        return Err(Error::PoleAtNonPositiveInteger(x));
    }
    if x >= 0.5 {
        return Ok((lanczos_real(x), 1.0));
    }
    // reflection: Γ(x)Γ(1−x) = π / sin(πx)
    let s = (PI * x).sin();
    Ok((PI.ln() - s.abs().ln() - lanczos_real(1.0 - x), s.signum()))
}

pub fn gamma(x: f64) -> Result<f64> {
    let (l, s) = ln_gamma(x)?;
    Ok(s * l.exp())
}

/// `1/Γ(x)`, zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    match ln_gamma(x) {
        Ok((l, s)) => s * (-l).exp(),
        Err(_) => 0.0,
    }
}

/// Principal-branch-free complex log-gamma: the real part is `ln|Γ(z)|`
/// exactly; the imaginary part is an argument of Γ(z) (not necessarily the
/// continuous branch).
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let zm = z - 1.0;
    let mut sum = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += *c / (zm + i as f64);
    }
    let base = zm + (LANCZOS_G + 0.5);
    (zm + 0.5) * base.ln() - base + sum.ln() + HALF_LN_2PI
}

/// `ln|Γ(iτ)|` for τ ≠ 0, computed as `ln|Γ(1+iτ)| − ln|τ|`.
pub fn ln_abs_gamma_imag(tau: f64) -> f64 {
    ln_gamma_complex(Complex64::new(1.0, tau)).re - tau.abs().ln()
}
