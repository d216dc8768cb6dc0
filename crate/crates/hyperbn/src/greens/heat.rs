//! Heat kernels of `Δ_H` on H^n and the radial operator `L = −(1/sinh r)∂_r`.
//!
//! `L^m` applied to `e^{−r²/4t}` or `e^{−sr}` is expanded symbolically into
//! terms `c · r^i cosh^j r · sinh^{−k} r · t^{−l}` times the base, and the
//! terms are summed in log space. Near `r = 0` the expansion cancels badly,
//! so the Gaussian case switches to `L^m f = (−1)^m g^{(m)}(y)` with
//! `y = cosh r − 1` and `g(y) = exp(−acosh²(1+y)/4t)`, differentiated with
//! truncated Taylor arithmetic.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::geometry::sphere_area;
use crate::numerics::quad::integrate_adaptive_rel;

/// Factor by which the printed odd-dimensional prefactor `2^{−m−2}` has to be
/// multiplied for the kernel to carry unit mass.
pub const ODD_PREFACTOR_CORRECTION: f64 = 2.0;

/// Below this radius the Gaussian base uses the Taylor-jet path.
const JET_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Base {
    /// `e^{−r²/4t}`.
    Gaussian,
    /// `e^{−s r}`.
    Exponential(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    c: f64,
    i: i32,
    j: i32,
    k: i32,
    l: i32,
}

/// Symbolic expansion of `L^m` applied to a base function.
#[derive(Debug, Clone)]
pub struct LPower {
    pub m: u32,
    pub base: Base,
    terms: Vec<Term>,
}

impl LPower {
    pub fn new(m: u32, base: Base) -> Self {
        let mut terms = vec![Term { c: 1.0, i: 0, j: 0, k: 0, l: 0 }];
        for _ in 0..m {
            terms = apply_l(&terms, base);
        }
        Self { m, base, terms }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// `(L^m base)(r) · e^{ln_scale}`; `t` is ignored for the exponential base.
    pub fn eval(&self, r: f64, t: f64, ln_scale: f64) -> f64 {
        if ln_scale == f64::NEG_INFINITY {
            return 0.0;
        }
        if self.base == Base::Gaussian && r <= JET_RADIUS {
            return gaussian_jet(self.m, r, t, ln_scale);
        }
        let ln_base = match self.base {
            Base::Gaussian => -r * r / (4.0 * t),
            Base::Exponential(s) => -s * r,
        };
        let (lr, lc, ls, lt) = (r.ln(), ln_cosh(r), ln_sinh(r), t.ln());
        let mut logs = [0.0f64; 64];
        let mut big = Vec::new();
        let logs: &mut [f64] = if self.terms.len() <= 64 {
            &mut logs[..self.terms.len()]
        } else {
            big.resize(self.terms.len(), 0.0);
            &mut big
        };
        let mut top = f64::NEG_INFINITY;
        for (slot, term) in logs.iter_mut().zip(&self.terms) {
            let mut v = term.c.abs().ln() + ln_base + ln_scale;
            if term.i != 0 {
                v += term.i as f64 * lr;
            }
            if term.j != 0 {
                v += term.j as f64 * lc;
            }
            if term.k != 0 {
                v -= term.k as f64 * ls;
            }
            if term.l != 0 {
                v -= term.l as f64 * lt;
            }
            *slot = v;
            top = top.max(v);
        }
        if top == f64::NEG_INFINITY {
            return 0.0;
        }
        let sum: f64 = logs.iter().zip(&self.terms).map(|(v, term)| term.c.signum() * (v - top).exp()).sum();
        sum * top.exp()
    }
}

fn apply_l(terms: &[Term], base: Base) -> Vec<Term> {
    let mut acc: BTreeMap<(i32, i32, i32, i32), f64> = BTreeMap::new();
    let mut push = |c: f64, i: i32, j: i32, k: i32, l: i32| {
        if c != 0.0 {
            // the trailing −1/sinh of L
            *acc.entry((i, j, k + 1, l)).or_insert(0.0) -= c;
        }
    };
    for t in terms {
        push(t.c * t.i as f64, t.i - 1, t.j, t.k, t.l);
        push(t.c * t.j as f64, t.i, t.j - 1, t.k - 1, t.l);
        push(-t.c * t.k as f64, t.i, t.j + 1, t.k + 1, t.l);
        match base {
            Base::Gaussian => push(-0.5 * t.c, t.i + 1, t.j, t.k, t.l + 1),
            Base::Exponential(s) => push(-s * t.c, t.i, t.j, t.k, t.l),
        }
    }
    acc.into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|((i, j, k, l), c)| Term { c, i, j, k, l })
        .collect()
}

pub(crate) fn ln_sinh(r: f64) -> f64 {
    if r > 20.0 {
        r - LN_2 + (-(-2.0 * r).exp()).ln_1p()
    } else {
        r.sinh().ln()
    }
}

pub(crate) fn ln_cosh(r: f64) -> f64 {
    r.abs() - LN_2 + (-2.0 * r.abs()).exp().ln_1p()
}

/// Taylor coefficients `A^{(d)}(y)/d!`, `d ≤ order`, of `A(y) = acosh²(1+y)`
/// from `A = 2 Σ_{k≥1} (−1)^{k−1} (2y)^k / (k² C(2k,k))`.
fn acosh_sq_jet(y: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    let mut binom_center = 2.0; // C(2k, k) at k = 1
    let mut two_pow = 2.0;
    for k in 1..200usize {
        if k > 1 {
            let kf = k as f64;
            binom_center *= (2.0 * kf) * (2.0 * kf - 1.0) / (kf * kf);
            two_pow *= 2.0;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let a = 2.0 * sign * two_pow / ((k * k) as f64 * binom_center);
        let mut largest: f64 = 0.0;
        // coefficient of ε^d in (y + ε)^k is C(k, d) y^{k−d}
        let mut binom = 1.0;
        for (d, slot) in out.iter_mut().enumerate() {
            if d > k {
                break;
            }
            if d > 0 {
                binom *= (k + 1 - d) as f64 / d as f64;
            }
            let term = a * binom * y.powi((k - d) as i32);
            *slot += term;
            largest = largest.max(term.abs());
        }
        let scale = out.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        if k > order && largest < 1e-18 * scale {
            break;
        }
        if y == 0.0 && k > order {
            break;
        }
    }
    out
}

fn gaussian_jet(m: u32, r: f64, t: f64, ln_scale: f64) -> f64 {
    let m = m as usize;
    let y = 2.0 * (0.5 * r).sinh().powi(2);
    let a = acosh_sq_jet(y, m);
    let x: Vec<f64> = a.iter().map(|v| -v / (4.0 * t)).collect();
    let mut e = vec![0.0; m + 1];
    e[0] = (x[0] + ln_scale).exp();
    for n in 1..=m {
        let mut s = 0.0;
        for j in 1..=n {
            s += j as f64 * x[j] * e[n - j];
        }
        e[n] = s / n as f64;
    }
    let fact: f64 = (1..=m).map(|v| v as f64).product();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * fact * e[m]
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::ArgumentOutOfDomain(t));
    }
    Ok(())
}

/// Precomputed heat kernel evaluator for one dimension.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    pub n: u32,
    lpow: LPower,
}

impl HeatKernel {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        Ok(Self { n, lpow: LPower::new(n / 2, Base::Gaussian) })
    }

    /// `h_t(ρ) · e^{ln_scale}`.
    pub fn eval_scaled(&self, rho: f64, t: f64, ln_scale: f64) -> f64 {
        if self.n % 2 == 1 {
            self.odd(rho, t, ln_scale)
        } else {
            self.even(rho, t, ln_scale)
        }
    }

    pub fn eval(&self, rho: f64, t: f64) -> f64 {
        self.eval_scaled(rho, t, 0.0)
    }

    fn odd(&self, rho: f64, t: f64, ln_scale: f64) -> f64 {
        let m = self.lpow.m as f64;
        let nf = self.n as f64;
        let ln_pref = ODD_PREFACTOR_CORRECTION.ln() - (m + 2.0) * LN_2 - (m + 0.5) * PI.ln() - 0.5 * t.ln()
            - (nf - 1.0) * (nf - 1.0) * t / 4.0;
        self.lpow.eval(rho.abs(), t, ln_pref + ln_scale)
    }

    fn even(&self, rho: f64, t: f64, ln_scale: f64) -> f64 {
        let rho = rho.abs();
        let nf = self.n as f64;
        let ln_pref = -0.5 * (nf + 1.0) * (2.0 * PI).ln() - 0.5 * t.ln() - (nf - 1.0) * (nf - 1.0) * t / 4.0 + ln_scale;
        if ln_pref == f64::NEG_INFINITY {
            return 0.0;
        }
        let half_sq = (0.5 * rho).sinh().powi(2);
        // near part: cosh r = cosh ρ + s², so the measure becomes 2 ds
        let s_max = (2.0 * (rho + 0.5).sinh() * 0.5f64.sinh()).sqrt();
        let near = |s: f64| {
            let r = 2.0 * ((half_sq + 0.5 * s * s).sqrt()).asinh();
            2.0 * self.lpow.eval(r, t, ln_pref)
        };
        let a = integrate_adaptive_rel(near, 0.0, s_max, f64::MIN_POSITIVE, 1e-11);
        let far_end = rho + 1.0 + 20.0 * t.sqrt() + 20.0;
        let far = |r: f64| {
            let ln_w = ln_sinh(r) - 0.5 * (LN_2 + ln_sinh(0.5 * (r + rho)) + ln_sinh(0.5 * (r - rho)));
            self.lpow.eval(r, t, ln_pref + ln_w)
        };
        let b = integrate_adaptive_rel(far, rho + 1.0, far_end, f64::MIN_POSITIVE, 1e-11);
        a.value + b.value
    }

    /// `∫_{H^n} h_t dV`.
    pub fn mass(&self, t: f64) -> f64 {
        let nf = self.n as f64;
        let area = sphere_area(self.n - 1);
        let density = |rho: f64| {
            if rho <= 0.0 {
                return 0.0;
            }
            self.eval_scaled(rho, t, (nf - 1.0) * ln_sinh(rho))
        };
        let peak = (nf - 1.0) * t;
        let end = peak + 30.0 * t.sqrt() + 10.0;
        let mut breaks = vec![0.0];
        let spread = (2.0 * t).sqrt();
        for c in [peak - 4.0 * spread, peak, peak + 4.0 * spread] {
            if c > *breaks.last().unwrap() + 1e-3 && c < end {
                breaks.push(c);
            }
        }
        breaks.push(end);
        let total: f64 = breaks
            .windows(2)
            .map(|w| integrate_adaptive_rel(density, w[0], w[1], f64::MIN_POSITIVE, 1e-10).value)
            .sum();
        area * total
    }
}

/// Heat kernel `e^{tΔ}` on H^n for odd `n`.
pub fn heat_kernel(rho: f64, t: f64, n: u32) -> Result<f64> {
    if n.is_multiple_of(2) || n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    check_time(t)?;
    Ok(HeatKernel::new(n)?.eval(rho, t))
}

/// Heat kernel for even `n`, through the subordination integral over `r ≥ ρ`.
pub fn heat_kernel_even(rho: f64, t: f64, n: u32) -> Result<f64> {
    if n % 2 == 1 || n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    check_time(t)?;
    Ok(HeatKernel::new(n)?.eval(rho, t))
}

/// Heat kernel for any `n ≥ 2`.
pub fn heat_kernel_any(rho: f64, t: f64, n: u32) -> Result<f64> {
    check_time(t)?;
    Ok(HeatKernel::new(n)?.eval(rho, t))
}

/// `∫_{H^n} h_t dV` by radial quadrature.
pub fn heat_kernel_mass(n: u32, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(HeatKernel::new(n)?.mass(t))
}

/// Resolvent of `P1 − λ` for odd `n` in closed form:
/// `(2π)^{−m} L^m [e^{−sρ}/(2s)]`, `s = √(1/4 − λ)`.
#[derive(Debug, Clone)]
pub struct OddResolvent {
    pub n: u32,
    pub lambda: f64,
    s: f64,
    lpow: LPower,
}

impl OddResolvent {
    pub fn new(n: u32, lambda: f64) -> Result<Self> {
        if n.is_multiple_of(2) || n < 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(lambda < 0.25) {
            return Err(Error::SpectralBottomViolation(lambda));
        }
        let s = (0.25 - lambda).sqrt();
        Ok(Self { n, lambda, s, lpow: LPower::new(n / 2, Base::Exponential(s)) })
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let m = self.lpow.m as f64;
        let ln_pref = -m * (2.0 * PI).ln() - (2.0 * self.s).ln();
        self.lpow.eval(rho, 1.0, ln_pref)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_kernel_is_explicit() {
        for (rho, t) in [(0.3, 0.2), (1.5, 1.0), (4.0, 3.0), (0.7, 0.05)] {
            let exact = (4.0 * PI * t).powf(-1.5) * rho / f64::sinh(rho) * (-t - rho * rho / (4.0 * t)).exp();
            let got = heat_kernel(rho, t, 3).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-12, "{rho} {t} {got} {exact}");
        }
    }

    #[test]
    fn jet_and_symbolic_paths_agree_at_switch() {
        for m in 1..=3 {
            let lp = LPower::new(m, Base::Gaussian);
            for t in [0.05, 0.3, 2.0] {
                let r = JET_RADIUS;
                let jet = gaussian_jet(m, r, t, 0.0);
                let (lr, lc, ls, lt) = (r.ln(), ln_cosh(r), ln_sinh(r), t.ln());
                let sym: f64 = lp
                    .terms
                    .iter()
                    .map(|tm| {
                        tm.c * (tm.i as f64 * lr + tm.j as f64 * lc - tm.k as f64 * ls - tm.l as f64 * lt
                            - r * r / (4.0 * t))
                            .exp()
                    })
                    .sum();
                assert!((jet / sym - 1.0).abs() < 1e-11, "m={m} t={t} {jet} {sym}");
            }
        }
    }

    #[test]
    fn acosh_square_series() {
        for y in [0.0, 0.01, 0.12] {
            let jet = acosh_sq_jet(y, 2);
            let a = (1.0 + y).acosh();
            assert!((jet[0] - a * a).abs() < 1e-15);
            if y > 0.0 {
                let d = 2.0 * a / (y * (y + 2.0)).sqrt();
                assert!((jet[1] - d).abs() < 1e-13);
            } else {
                assert!((jet[1] - 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn odd_resolvent_at_zero_matches_three_dimensional_formula() {
        let g = OddResolvent::new(3, 0.0).unwrap();
        for rho in [0.1f64, 1.0, 5.0] {
            let exact = (-0.5 * rho).exp() / (4.0 * PI * rho.sinh());
            assert!((g.eval(rho) / exact - 1.0).abs() < 1e-13);
        }
    }
}
