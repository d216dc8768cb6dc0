//! Bracketed root finding (Brent) and sign-change scans.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) || !(f_lo * f_hi <= 0.0) {
            return Err(Error::InvalidBracket { lo, hi, f_lo, f_hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    /// Evaluate `f` at both ends and validate.
    pub fn evaluate<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, f(lo), f(hi))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Brent's method (bisection/secant/inverse quadratic hybrid). The result
/// always lies inside the bracket and the final bracket width is at most `tol`.
pub fn find_root<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    let Bracket { lo, hi, f_lo, f_hi } = Bracket::new(bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f_lo, f_hi);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b.clamp(lo, hi));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b.clamp(lo, hi))
}

/// Sample `f` at `n_points` uniform nodes on `[lo, hi]` and return one bracket
/// per sign change, in increasing order.
pub fn scan_sign_changes<F: Fn(f64) -> f64 + Sync + Send>(f: F, lo: f64, hi: f64, n_points: usize) -> Vec<Bracket> {
    scan_sign_changes_with(Exec::default(), f, lo, hi, n_points)
}

/// [`scan_sign_changes`] with an explicit execution mode.
pub fn scan_sign_changes_with<F: Fn(f64) -> f64 + Sync + Send>(
    exec: Exec,
    f: F,
    lo: f64,
    hi: f64,
    n_points: usize,
) -> Vec<Bracket> {
    let n = n_points.max(2);
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ys = par::map(exec, &xs, |&x| f(x));
    brackets_from_samples(&xs, &ys)
}

pub(crate) fn brackets_from_samples(xs: &[f64], ys: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        let (y0, y1) = (ys[i], ys[i + 1]);
        if !y0.is_finite() || !y1.is_finite() {
            continue;
        }
        // an exact zero at a node is reported once, as the right end of a cell
        let change = (y0 < 0.0 && y1 >= 0.0) || (y0 > 0.0 && y1 <= 0.0) || (i == 0 && y0 == 0.0 && y1 != 0.0);
        if change {
            out.push(Bracket { lo: xs[i], hi: xs[i + 1], f_lo: y0, f_hi: y1 });
        }
    }
    out
}
