//! Adaptive quadrature: global Gauss–Kronrod (7, 15) bisection with a
//! tanh–sinh fallback for endpoint singularities the bisection cannot tame.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// False when the error estimate still exceeds the tolerance after the
    /// evaluation budget; `value` is then the best estimate available.
    pub converged: bool,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadratureResult {
    let (v, e) = gk15(f, a, b);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    // pieces too small to split (roundoff) keep their error here
    let mut frozen_err = 0.0;
    while heap.len() < MAX_INTERVALS {
        let target = abs_tol.max(rel_tol * total.abs());
        if total_err + frozen_err <= target {
            break;
        }
        let Some(p) = heap.pop() else { break };
        if p.err == 0.0 {
            heap.push(p);
            break;
        }
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) || (p.b - p.a) <= 8.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) {
            frozen_err += p.err;
            total_err -= p.err;
            heap.push(Piece { err: 0.0, ..p });
            continue;
        }
        let (v1, e1) = gk15(f, p.a, m);
        let (v2, e2) = gk15(f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, err: e2 });
    }
    // resum to shed accumulated update error
    let mut value = 0.0;
    let mut err = frozen_err;
    for p in heap.iter() {
        value += p.value;
        err += p.err;
    }
    let target = abs_tol.max(rel_tol * value.abs());
    QuadratureResult { value, error_estimate: err, evaluations: evals, converged: err <= target && value.is_finite() }
}

/// Tanh–sinh quadrature on [a, b]; the error estimate is the change between
/// the last two levels.
fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadratureResult {
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let eval = |t: f64| -> f64 {
        // distance from the nearer endpoint is computed without cancellation
        let u = pi2 * t.sinh();
        let w = pi2 * t.cosh() / (u.cosh() * u.cosh());
        let e = (-2.0 * u.abs()).exp();
        let delta = 2.0 * half * e / (1.0 + e);
        let x = if t < 0.0 { a + delta } else { b - delta };
        if delta <= 0.0 || !(x > a && x < b) {
            return 0.0;
        }
        let fx = f(x);
        if fx.is_finite() {
            fx * w
        } else {
            0.0
        }
    };
    let tmax = 6.5;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut evals = 1;
    let mut k = 1;
    while (k as f64) * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        evals += 2;
        k += 1;
    }
    let mut prev = sum * h * half;
    let mut err = f64::INFINITY;
    let mut value = prev;
    for _level in 0..12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            let t = k as f64 * h;
            add += eval(t) + eval(-t);
            evals += 2;
            k += 2;
        }
        sum += add;
        value = sum * h * half;
        err = (value - prev).abs();
        prev = value;
        if err <= abs_tol.max(rel_tol * value.abs()) * 0.1 {
            break;
        }
    }
    let target = abs_tol.max(rel_tol * value.abs());
    QuadratureResult { value, error_estimate: err, evaluations: evals, converged: err <= target }
}

/// Adaptive quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> QuadratureResult {
    integrate_adaptive_rel(f, a, b, tol, 0.0)
}

/// Adaptive quadrature with a mixed tolerance `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive_rel<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadratureResult {
    if a == b {
        return QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 1, converged: true };
    }
    if a > b {
        let r = integrate_adaptive_rel(f, b, a, abs_tol, rel_tol);
        return QuadratureResult { value: -r.value, ..r };
    }
    let gk = gk_adaptive(&f, a, b, abs_tol, rel_tol);
    if gk.converged {
        return gk;
    }
    // the estimator stalled, typically at an endpoint singularity
    let ts = tanh_sinh(&f, a, b, abs_tol, rel_tol);
    let evaluations = gk.evaluations + ts.evaluations;
    if ts.value.is_finite() && (ts.error_estimate < gk.error_estimate || !gk.value.is_finite()) {
        QuadratureResult { evaluations, ..ts }
    } else {
        QuadratureResult { evaluations, ..gk }
    }
}

/// Integral over `[0, ∞)` of a function with `|f(t)| ≤ C e^{-rate t}` for
/// large `t`, to absolute tolerance `tol`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, decay_rate: f64, tol: f64) -> Result<QuadratureResult> {
    integrate_semi_infinite_rel(f, decay_rate, tol, 0.0)
}

/// Semi-infinite integral with a mixed tolerance. The truncation point is
/// chosen from the envelope constant sampled at `t ∈ {5, 10, 20}/rate`.
pub fn integrate_semi_infinite_rel<F: Fn(f64) -> f64>(
    f: F,
    decay_rate: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    if !(decay_rate > 0.0) {
        return Err(Error::NonPositiveDecay(decay_rate));
    }
    let mut c: f64 = 0.0;
    for s in [5.0, 10.0, 20.0] {
        let t = s / decay_rate;
        let v = f(t).abs() * (decay_rate * t).exp();
        if v.is_finite() {
            c = c.max(v);
        }
    }
    // a rough scale for the relative part of the tolerance
    let head = gk15(&f, 0.0, 5.0 / decay_rate).0.abs();
    let tol = abs_tol.max(rel_tol * head).max(f64::MIN_POSITIVE);
    let mut t_end = 20.0 / decay_rate;
    if c > 0.0 {
        let needed = (10.0 * c / (decay_rate * tol)).ln() / decay_rate;
        if needed.is_finite() {
            t_end = t_end.max(needed);
        }
    }
    let tail = c * (-decay_rate * t_end).exp() / decay_rate;
    let r = integrate_adaptive_rel(&f, 0.0, t_end, abs_tol, rel_tol);
    let err = r.error_estimate + tail;
    let target = abs_tol.max(rel_tol * r.value.abs());
    Ok(QuadratureResult { value: r.value, error_estimate: err, evaluations: r.evaluations + 4, converged: r.converged && err <= target * 1.1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_sqrt_singularity() {
        let r = integrate_adaptive(|x| x * x, 0.0, 1.0, 1e-10);
        assert!((r.value - 1.0 / 3.0).abs() < 1e-10 && r.converged);
        let r = integrate_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-8);
        assert!((r.value - 2.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn semi_infinite_examples() {
        let r = integrate_semi_infinite(|t| (-t).exp(), 1.0, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_semi_infinite(|t| (-t).exp() / t.sqrt(), 1.0, 1e-8).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-8, "{r:?}");
        assert!(matches!(integrate_semi_infinite(|t| t, 0.0, 1e-8), Err(Error::NonPositiveDecay(_))));
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate_adaptive(|x| x.cos(), 1.0, 0.0, 1e-12);
        assert!((r.value + 1f64.sin()).abs() < 1e-12);
    }
}
