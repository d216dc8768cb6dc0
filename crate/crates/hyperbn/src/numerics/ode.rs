//! Explicit adaptive Runge–Kutta integration (Dormand–Prince 5(4)).

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
    /// Record every accepted step, not only the requested output points.
    pub dense_record: bool,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, h0: None, max_steps: 200_000, dense_record: true }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OdeStatus {
    Complete,
    /// The step size collapsed or the state became non-finite; the
    /// trajectory stops at the last good point.
    StepUnderflow,
    MaxStepsExceeded,
}

#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub status: OdeStatus,
    pub steps: usize,
    pub rejected: usize,
}

impl<const N: usize> OdeSolution<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }

    pub fn is_complete(&self) -> bool {
        self.status == OdeStatus::Complete
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..N {
            out[i] += ch * k[i];
        }
    }
    out
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1` (either direction), landing
/// exactly on every time in `stops` that lies strictly between them. Stops
/// must be ordered in the direction of integration.
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    stops: &[f64],
    opts: &OdeOptions,
) -> OdeSolution<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut sol = OdeSolution { t: vec![t0], y: vec![y0], status: OdeStatus::Complete, steps: 0, rejected: 0 };
    if t1 == t0 {
        return sol;
    }
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let scale = |y: &[f64; N], i: usize| opts.atol + opts.rtol * y[i].abs();
    let mut h = match opts.h0 {
        Some(h) => h.abs(),
        None => {
            let mut d0: f64 = 0.0;
            let mut d1: f64 = 0.0;
            for i in 0..N {
                d0 = d0.max((y[i] / scale(&y, i)).abs());
                d1 = d1.max((k1[i] / scale(&y, i)).abs());
            }
            let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
            h.min(span).max(1e-12 * span)
        }
    };
    let mut stop_idx = 0;
    let mut last_ratio: f64 = 1e-4;
    let tiny = 16.0 * f64::EPSILON;
    while (t1 - t) * dir > 0.0 {
        if sol.steps + sol.rejected >= opts.max_steps {
            sol.status = OdeStatus::MaxStepsExceeded;
            break;
        }
        while stop_idx < stops.len() && (stops[stop_idx] - t) * dir <= 0.0 {
            stop_idx += 1;
        }
        let target = if stop_idx < stops.len() && (t1 - stops[stop_idx]) * dir > 0.0 { stops[stop_idx] } else { t1 };
        let mut hit = false;
        if h >= (target - t).abs() * (1.0 - 1e-12) {
            h = (target - t).abs();
            hit = true;
        }
        if h <= tiny * t.abs().max(span) {
            sol.status = OdeStatus::StepUnderflow;
            break;
        }
        let hs = h * dir;
        let k2 = rhs(t + C2 * hs, &lin(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &lin(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hs, &lin(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * hs, &lin(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(t + hs, &lin(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let yn = lin(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let tn = if hit { target } else { t + hs };
        let k7 = rhs(tn, &yn);
        let mut err: f64 = 0.0;
        let mut finite = true;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(yn[i].abs());
            let r = e / sc;
            err += r * r;
            finite &= yn[i].is_finite() && k7[i].is_finite();
        }
        let err = (err / N as f64).sqrt();
        if !finite || !err.is_finite() {
            sol.rejected += 1;
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t = tn;
            y = yn;
            k1 = k7;
            sol.steps += 1;
            if opts.dense_record || hit {
                sol.t.push(t);
                sol.y.push(y);
            }
            // PI step control
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.7 / 5.0) * last_ratio.powf(0.4 / 5.0)).clamp(0.2, 5.0) };
            last_ratio = err.max(1e-4);
            h *= fac;
        } else {
            sol.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    if sol.status == OdeStatus::Complete && (t1 - t) * dir > 0.0 {
        sol.status = OdeStatus::StepUnderflow;
    }
    if !opts.dense_record && *sol.t.last().unwrap() != t {
        sol.t.push(t);
        sol.y.push(y);
    }
    sol
}

/// Integrate from `t0` to `t1` with local error tolerance `tol` (relative and
/// absolute), returning every accepted step.
pub fn ode_integrate<const N: usize, F>(rhs: F, state0: [f64; N], t0: f64, t1: f64, tol: f64) -> OdeSolution<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    integrate(rhs, state0, t0, t1, &[], &OdeOptions::with_tol(tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let s = ode_integrate(|_, y: &[f64; 1]| [y[0]], [1.0], 0.0, 1.0, 1e-12);
        assert!(s.is_complete());
        assert!((s.last().1[0] - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let s = ode_integrate(|_, y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], 0.0, 2.0 * std::f64::consts::PI, 1e-12);
        let (_, y) = s.last();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
    }

    #[test]
    fn lands_on_stops_backwards() {
        let stops = [0.75, 0.5, 0.25];
        let s = integrate(|_, y: &[f64; 1]| [y[0]], [1.0], 1.0, 0.0, &stops, &OdeOptions { dense_record: false, ..OdeOptions::with_tol(1e-12) });
        assert_eq!(s.t, vec![1.0, 0.75, 0.5, 0.25, 0.0]);
        assert!((s.y[4][0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn blow_up_is_flagged() {
        let s = ode_integrate(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], 0.0, 2.0, 1e-10);
        assert_ne!(s.status, OdeStatus::Complete);
        assert!(s.last().0 < 1.0 + 1e-6);
    }
}
