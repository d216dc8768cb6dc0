//! Gauss hypergeometric function for non-positive argument.
//!
//! The workhorse is the regularized function `F̃(a,b;c;z) = ₂F₁(a,b;c;z)/Γ(c)`
//! written in terms of `s = a+b` and `p = ab`. Conical Legendre and spherical
//! functions have complex-conjugate `a, b` but real `s, p`, so the direct
//! series stays real; only the Pfaff branch needs complex arithmetic.

use num_complex::Complex64;

use super::gamma::{ln_gamma, recip_gamma};
use crate::error::{Error, Result};

pub const SERIES_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Neumaier-compensated accumulator.
#[derive(Default, Clone, Copy)]
struct Acc {
    sum: f64,
    comp: f64,
}

impl Acc {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn non_positive_int(c: f64) -> Option<usize> {
    (c <= 0.0 && c == c.floor()).then(|| (-c) as usize)
}

/// Direct series for `F̃` in sum/product form; valid for |z| < 1.
pub fn series_sp(s: f64, p: f64, c: f64, z: f64) -> Result<f64> {
    let poch = |j: f64| j * j + s * j + p;
    let (mut j, mut term) = match non_positive_int(c) {
        Some(m) => {
            // terms below j = m+1 vanish; Γ(c+m+1) = 1
            let j0 = m + 1;
            let mut t = 1.0;
            for i in 0..j0 {
                t *= poch(i as f64) * z / (i as f64 + 1.0);
            }
            (j0, t)
        }
        None => (0, recip_gamma(c)),
    };
    let mut acc = Acc::default();
    let mut quiet = 0;
    while j < SERIES_BUDGET {
        acc.add(term);
        if term == 0.0 {
            return Ok(acc.value());
        }
        let jf = j as f64;
        let ratio = poch(jf) * z / ((jf + 1.0) * (c + jf));
        term *= ratio;
        j += 1;
        if term.abs() <= 1e-17 * acc.value().abs() && ratio.abs() < 1.0 {
            quiet += 1;
            if quiet >= 2 {
                return Ok(acc.value());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::SeriesNonConvergence { terms: SERIES_BUDGET })
}

fn series_complex(a: Complex64, b: Complex64, c: f64, w: f64) -> Result<Complex64> {
    let (mut j, mut term) = match non_positive_int(c) {
        Some(m) => {
            let mut t = Complex64::new(1.0, 0.0);
            for i in 0..=m {
                let fi = i as f64;
                t *= (a + fi) * (b + fi) * w / (fi + 1.0);
            }
            (m + 1, t)
        }
        None => (0, Complex64::new(recip_gamma(c), 0.0)),
    };
    let (mut re, mut im) = (Acc::default(), Acc::default());
    let mut quiet = 0;
    while j < SERIES_BUDGET {
        re.add(term.re);
        im.add(term.im);
        if term.norm() == 0.0 {
            break;
        }
        let jf = j as f64;
        let ratio = (a + jf) * (b + jf) * w / ((jf + 1.0) * (c + jf));
        term *= ratio;
        j += 1;
        let total = Complex64::new(re.value(), im.value()).norm();
        if term.norm() <= 1e-17 * total && ratio.norm() < 1.0 {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if j >= SERIES_BUDGET {
        return Err(Error::SeriesNonConvergence { terms: SERIES_BUDGET });
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Pfaff branch: `F̃(a,b;c;z) = (1−z)^{−a} F̃(a, c−b; c; z/(z−1))`.
pub fn pfaff_sp(s: f64, p: f64, c: f64, z: f64) -> Result<f64> {
    let w = z / (z - 1.0);
    let disc = s * s - 4.0 * p;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // either root works; take the one with the smaller prefactor
        let (a, b) = ((s - r) / 2.0, (s + r) / 2.0);
        let cb = c - b;
        let f = series_sp(a + cb, a * cb, c, w)?;
        Ok((1.0 - z).powf(-a) * f)
    } else {
        let a = Complex64::new(s / 2.0, (-disc).sqrt() / 2.0);
        let b = a.conj();
        let f = series_complex(a, Complex64::new(c, 0.0) - b, c, w)?;
        let pre = (-a * (1.0 - z).ln()).exp();
        Ok((pre * f).re)
    }
}

/// `F̃` in sum/product form for `z ≤ 1/2`: direct series on [−1/2, 1/2],
/// Pfaff transformation below −1/2.
pub fn hyp2f1_sp(s: f64, p: f64, c: f64, z: f64) -> Result<f64> {
    if !z.is_finite() || z > 0.5 {
        return Err(Error::ArgumentOutOfDomain(z));
    }
    if z >= -0.5 {
        series_sp(s, p, c, z)
    } else {
        pfaff_sp(s, p, c, z)
    }
}

/// `d/dz F̃(s,p;c;z) = p·F̃(s+2, p+s+1; c+1; z)`.
pub fn hyp2f1_sp_deriv(s: f64, p: f64, c: f64, z: f64) -> Result<f64> {
    Ok(p * hyp2f1_sp(s + 2.0, p + s + 1.0, c + 1.0, z)?)
}

/// Regularized `₂F₁(a,b;c;z)/Γ(c)`; defined for every real `c`.
pub fn hyp2f1_regularized(params: HypergeometricParams, z: f64) -> Result<f64> {
    let HypergeometricParams { a, b, c } = params;
    hyp2f1_sp(a + b, a * b, c, z)
}

/// `₂F₁(a,b;c;z)` for `z ≤ 0` (and `z ≤ 1/2`).
pub fn hyp2f1(params: HypergeometricParams, z: f64) -> Result<f64> {
    if non_positive_int(params.c).is_some() {
        return Err(Error::InvalidHypergeometric(params.c));
    }
    let (lg, sg) = ln_gamma(params.c)?;
    Ok(sg * lg.exp() * hyp2f1_regularized(params, z)?)
}

/// Both evaluation paths, exposed for cross-checking on their overlap.
pub fn hyp2f1_both_paths(params: HypergeometricParams, z: f64) -> Result<(f64, f64)> {
    let HypergeometricParams { a, b, c } = params;
    let (lg, sg) = ln_gamma(c)?;
    let g = sg * lg.exp();
    Ok((g * series_sp(a + b, a * b, c, z)?, g * pfaff_sp(a + b, a * b, c, z)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(a: f64, b: f64, c: f64) -> HypergeometricParams {
        HypergeometricParams { a, b, c }
    }

    #[test]
    fn identities() {
        assert_eq!(hyp2f1(hp(0.3, 1.2, 2.5), 0.0).unwrap(), 1.0);
        assert!((hyp2f1(hp(1.0, 1.0, 2.0), -1.0).unwrap() - 2f64.ln()).abs() < 1e-14);
        // (1−z)^{−a}
        let z = -4.0;
        assert!((hyp2f1(hp(0.6, 2.0, 2.0), z).unwrap() - (1.0 - z).powf(-0.6)).abs() < 1e-13);
    }

    #[test]
    fn reference_values() {
        let v = hyp2f1(hp(0.7, 2.1, 1.5), -3.2).unwrap();
        assert!((v - 0.276_156_566_480_173_5).abs() < 1e-13);
        let (d, p) = hyp2f1_both_paths(hp(0.7, 2.1, 1.5), -0.7).unwrap();
        assert!((d - 0.604_925_951_998_106_2).abs() < 1e-13 && (p - d).abs() < 1e-13);
    }

    #[test]
    fn regularized_at_non_positive_c() {
        // F̃(a,b;0;z) = ab z ₂F₁(a+1,b+1;2;z)
        let (a, b, z) = (0.4, 1.3, -0.3);
        let lhs = hyp2f1_regularized(hp(a, b, 0.0), z).unwrap();
        let rhs = a * b * z * hyp2f1(hp(a + 1.0, b + 1.0, 2.0), z).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn complex_conjugate_parameters() {
        // F(1/2+it, 1/2−it; 1; z) through both branches
        let (s, p) = (1.0, 0.25 + 4.0);
        let d = series_sp(s, p, 1.0, -0.8).unwrap();
        let q = pfaff_sp(s, p, 1.0, -0.8).unwrap();
        assert!((d - q).abs() < 1e-12 * d.abs().max(1.0), "{d} {q}");
    }
}
