//! Whole-space kernels: heat kernels, resolvents of `P1 − λ`, the `P2 − λ`
//! kernel from the factorization `P2 − λ = (P1 − λ₁)(P1 − λ₂)`, and their
//! certification.

pub mod heat;
pub mod probe;

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::pk_symbol;
use crate::error::{Error, Result};
use crate::geometry::{euclidean_unit_ball_volume, sphere_area, ProblemDims, RadialProfile};
use crate::helgason::{radial_inverse_values, SpectralProfile, TransformGrid};
use crate::numerics::interp::cubic_interpolate;
use crate::numerics::quad::{integrate_adaptive_rel, integrate_semi_infinite_rel};
use crate::par::{map, map_range, Exec};
use crate::thresholds::factor_roots;

pub use heat::{heat_kernel, heat_kernel_any, heat_kernel_even, heat_kernel_mass, HeatKernel, OddResolvent};
use probe::Probe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Construction {
    ClosedForm,
    HeatTimeIntegral,
    TransformInversion,
    Composition,
}

/// How a kernel can be re-evaluated away from its grid.
#[derive(Debug, Clone)]
enum Source {
    P1InverseClosed,
    OddClosed(OddResolvent),
    HeatTime(HeatKernel),
    PartialFraction { roots: (f64, f64), parts: Box<(Source, Source)> },
    Tabulated,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelProfile {
    pub lambda: f64,
    pub dims: ProblemDims,
    pub profile: RadialProfile,
    pub construction: Construction,
    #[serde(skip)]
    source: Source,
}

/// Geometric grid on `[lo, hi]`, clustered near the origin.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { hi } else { lo * (ratio * i as f64).exp() }).collect()
}

/// The default kernel grid: 96 points on `[10⁻², 8]`.
pub fn default_kernel_grid() -> Vec<f64> {
    geometric_grid(1e-2, 8.0, 96)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.first().is_none_or(|&r| r <= 0.0) {
        return Err(Error::ProfileMismatch("kernel grids must exclude the origin".into()));
    }
    Ok(())
}

/// `P1^{−1}(ρ) = [(2 sinh ρ/2)^{2−n} − (2 cosh ρ/2)^{2−n}] / (n(n−2)α(n))`
/// with `α(n)` the Euclidean unit-ball volume.
pub fn p1_inverse_closed(rho: f64, dims: ProblemDims) -> f64 {
    let n = dims.nf();
    let alpha = euclidean_unit_ball_volume(dims.n);
    let e = 2.0 - n;
    ((2.0 * (0.5 * rho).sinh()).powf(e) - (2.0 * (0.5 * rho).cosh()).powf(e)) / (n * (n - 2.0) * alpha)
}

/// `∫₀^∞ e^{t(n(n−2)/4 + λ)} h_t(ρ) dt`.
fn heat_time_value(hk: &HeatKernel, lambda: f64, rho: f64) -> f64 {
    let nf = hk.n as f64;
    let shift = 0.25 * nf * (nf - 2.0) + lambda;
    let f = |t: f64| if t <= 0.0 { 0.0 } else { hk.eval_scaled(rho, t, shift * t) };
    let split = (rho * rho).max(0.05);
    let head = integrate_adaptive_rel(f, 0.0, split, f64::MIN_POSITIVE, 1e-11);
    let tail = integrate_semi_infinite_rel(|u| f(split + u), 0.25 - lambda, f64::MIN_POSITIVE, 1e-11)
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    head.value + tail
}

fn p1_resolvent_source(n: u32, lambda: f64) -> Result<Source> {
    if n % 2 == 1 {
        Ok(Source::OddClosed(OddResolvent::new(n, lambda)?))
    } else {
        Ok(Source::HeatTime(HeatKernel::new(n)?))
    }
}

impl Source {
    fn eval(&self, dims: ProblemDims, lambda: f64, rho: f64) -> f64 {
        match self {
            Source::P1InverseClosed => p1_inverse_closed(rho, dims),
            Source::OddClosed(g) => g.eval(rho),
            Source::HeatTime(hk) => heat_time_value(hk, lambda, rho),
            Source::PartialFraction { roots, parts } => {
                let (a, b) = (parts.0.eval(dims, roots.0, rho), parts.1.eval(dims, roots.1, rho));
                (a - b) / (roots.0 - roots.1)
            }
            Source::Tabulated => f64::NAN,
        }
    }

    fn is_fast(&self) -> bool {
        match self {
            Source::P1InverseClosed | Source::OddClosed(_) => true,
            Source::PartialFraction { parts, .. } => parts.0.is_fast() && parts.1.is_fast(),
            _ => false,
        }
    }
}

impl KernelProfile {
    fn build(lambda: f64, dims: ProblemDims, grid: &[f64], construction: Construction, source: Source) -> Result<Self> {
        check_grid(grid)?;
        let values = map(Exec::default(), grid, |&r| source.eval(dims, lambda, r));
        let profile = RadialProfile::new(grid.to_vec(), values, dims)?;
        Ok(Self { lambda, dims, profile, construction, source })
    }

    /// A kernel known only through its tabulated values.
    pub fn tabulated(lambda: f64, profile: RadialProfile, construction: Construction) -> Result<Self> {
        check_grid(&profile.grid)?;
        Ok(Self { lambda, dims: profile.dims, profile, construction, source: Source::Tabulated })
    }

    /// Kernel value at any `ρ > 0`, from the construction when it is
    /// re-evaluable and by interpolation otherwise.
    pub fn evaluate(&self, rho: f64) -> f64 {
        match self.source {
            Source::Tabulated => self.interpolate(rho),
            ref s => s.eval(self.dims, self.lambda, rho),
        }
    }

    /// Cheap evaluation: exact for closed forms, interpolated otherwise.
    pub fn evaluate_fast(&self, rho: f64) -> f64 {
        if self.source.is_fast() {
            self.evaluate(rho)
        } else {
            self.interpolate(rho)
        }
    }

    /// Interpolation in `log ρ`, with the `ρ^{2k−n}` singularity below the
    /// grid and exponential decay beyond it.
    pub fn interpolate(&self, rho: f64) -> f64 {
        let g = &self.profile.grid;
        let v = &self.profile.values;
        let last = g.len() - 1;
        if rho <= g[0] {
            let p = 2.0 * self.dims.k as f64 - self.dims.nf();
            return v[0] * (rho / g[0]).powf(p);
        }
        if rho >= g[last] {
            let slope = if v[last] > 0.0 && v[last - 1] > 0.0 {
                (v[last] / v[last - 1]).ln() / (g[last] - g[last - 1])
            } else {
                f64::NEG_INFINITY
            };
            return v[last] * (slope * (rho - g[last])).exp();
        }
        let lg: Vec<f64> = g.iter().map(|r| r.ln()).collect();
        cubic_interpolate(&lg, v, rho.ln())
    }

    pub fn values(&self) -> &[f64] {
        &self.profile.values
    }

    pub fn grid(&self) -> &[f64] {
        &self.profile.grid
    }
}

/// `P1^{−1}` as a kernel profile.
pub fn p1_inverse_kernel(dims: ProblemDims, grid: &[f64]) -> Result<KernelProfile> {
    KernelProfile::build(0.0, with_order(dims, 1)?, grid, Construction::ClosedForm, Source::P1InverseClosed)
}

fn with_order(dims: ProblemDims, k: u32) -> Result<ProblemDims> {
    if dims.k == k { Ok(dims) } else { ProblemDims::new(dims.n, k) }
}

/// Kernel of `(P1 − λ)^{−1}` by integrating the heat kernel in time.
pub fn resolvent_kernel_p1(lambda: f64, dims: ProblemDims, grid: &[f64]) -> Result<KernelProfile> {
    if !(lambda < 0.25) {
        return Err(Error::SpectralBottomViolation(lambda));
    }
    let dims = with_order(dims, 1)?;
    KernelProfile::build(lambda, dims, grid, Construction::HeatTimeIntegral, Source::HeatTime(HeatKernel::new(dims.n)?))
}

/// Kernel of `(P1 − λ)^{−1}` in closed form, odd `n` only.
pub fn resolvent_kernel_p1_closed(lambda: f64, dims: ProblemDims, grid: &[f64]) -> Result<KernelProfile> {
    let dims = with_order(dims, 1)?;
    let src = Source::OddClosed(OddResolvent::new(dims.n, lambda)?);
    KernelProfile::build(lambda, dims, grid, Construction::ClosedForm, src)
}

/// Kernel of `(P_k − λ)^{−1}` for `k = 2`, as
/// `[(P1−λ₁)^{−1} − (P1−λ₂)^{−1}] / (λ₁ − λ₂)`, the transform-space product
/// of the two factor resolvents.
pub fn resolvent_kernel_pk(lambda: f64, dims: ProblemDims, grid: &[f64]) -> Result<KernelProfile> {
    match dims.k {
        1 => return resolvent_kernel_p1(lambda, dims, grid),
        2 => {}
        k => return Err(Error::ComplexRootsUnsupported(k)),
    }
    if !(lambda > -1.0 && lambda < 9.0 / 16.0) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let roots = factor_roots(lambda)?;
    let parts = Box::new((p1_resolvent_source(dims.n, roots.0)?, p1_resolvent_source(dims.n, roots.1)?));
    KernelProfile::build(lambda, dims, grid, Construction::Composition, Source::PartialFraction { roots, parts })
}

/// Coefficients `c_1..c_J` of `1/(P_k(σ) − λ) = Σ c_m σ^{−m}`.
fn inverse_symbol_expansion(k: u32, lambda: f64, terms: usize) -> Vec<f64> {
    // with x = 1/σ: 1/(P_k − λ) = x^k / (∏_{j≤k}(1 + j(j−1)x) − λ x^k)
    let len = terms + 1;
    let mut den = vec![0.0; len];
    den[0] = 1.0;
    for j in 1..=k as usize {
        let c = (j * (j - 1)) as f64;
        for i in (1..len).rev() {
            den[i] += c * den[i - 1];
        }
    }
    if (k as usize) < len {
        den[k as usize] -= lambda;
    }
    let mut inv = vec![0.0; len];
    inv[0] = 1.0;
    for i in 1..len {
        inv[i] = -(1..=i).map(|j| den[j] * inv[i - j]).sum::<f64>();
    }
    (1..=terms).map(|m| if m >= k as usize { inv[m - k as usize] } else { 0.0 }).collect()
}

/// Kernel of `(P_k − λ)^{−1}` by inverting its symbol. Reference resolvents
/// `(P1 + j)^{−1}`, `j = 1, 2, …`, are subtracted in transform space so that
/// the remainder decays fast enough for a finite spectral grid, and added
/// back in closed form.
pub fn resolvent_kernel_transform(
    lambda: f64,
    dims: ProblemDims,
    grid: &[f64],
    tgrid: &TransformGrid,
) -> Result<KernelProfile> {
    check_grid(grid)?;
    let k = dims.k;
    let bottom = pk_symbol(0.0, k);
    if !(lambda < bottom) {
        return Err(Error::DenominatorNonPositive { lambda, bound: bottom });
    }
    // |𝔠|^{−2} grows like τ^{n−1}; the remainder must beat it comfortably
    let terms = (k as usize + 4).max((dims.n as usize + 5) / 2);
    let c = inverse_symbol_expansion(k, lambda, terms);
    let poles: Vec<f64> = (1..=terms).map(|j| -(j as f64)).collect();
    let vander = nalgebra::DMatrix::from_fn(terms, terms, |m, j| poles[j].powi(m as i32));
    let amps = vander
        .lu()
        .solve(&nalgebra::DVector::from_vec(c))
        .ok_or_else(|| Error::NotFound("reference amplitudes".into()))?;
    let amps: Vec<f64> = amps.iter().copied().collect();
    let remainder = SpectralProfile::from_fn(dims, tgrid.clone(), |t| {
        let sigma = pk_symbol(t, 1);
        let refs: f64 = amps.iter().zip(&poles).map(|(a, p)| a / (sigma - p)).sum();
        1.0 / (pk_symbol(t, k) - lambda) - refs
    });
    let mut values = radial_inverse_values(&remainder, grid)?;
    for (a, p) in amps.iter().zip(&poles) {
        let src = p1_resolvent_source(dims.n, *p)?;
        let refs = map(Exec::default(), grid, |&r| src.eval(dims, *p, r));
        for (v, g) in values.iter_mut().zip(refs) {
            *v += a * g;
        }
    }
    let profile = RadialProfile::new(grid.to_vec(), values, dims)?;
    KernelProfile::tabulated(lambda, profile, Construction::TransformInversion)
}

/// Largest relative gap between two kernels on the radii of `a` inside
/// `[lo, hi]`.
pub fn kernel_gap(a: &KernelProfile, b: &KernelProfile, lo: f64, hi: f64) -> f64 {
    a.grid()
        .iter()
        .zip(a.values())
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .map(|(&r, &v)| ((v - b.evaluate_fast(r)) / v).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaProbe {
    pub support: f64,
    pub x_rho: f64,
    pub value: f64,
    pub expected: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCertificate {
    pub positive: bool,
    pub monotone: bool,
    /// `sup G(ρ)·sinh(ρ/2)^{n−2k}` over the grid.
    pub decay_constant: f64,
    pub decay_argmax: f64,
    pub delta: Vec<DeltaProbe>,
    pub max_delta_error: f64,
}

pub const PROBE_SUPPORTS: [f64; 3] = [1.0, 1.5, 2.0];
pub const PROBE_POINTS: [f64; 5] = [0.1, 0.3, 0.5, 0.8, 1.2];

/// `∫ G(d(x,y)) ((P_k − λ)φ)(y) dV_y` at `|x| = a`, in polar coordinates
/// around the origin with the polar axis through `x`.
fn delta_value(kernel: &KernelProfile, probe: Probe, a: f64) -> f64 {
    let n = kernel.dims.n;
    let k = kernel.dims.k;
    let nm2 = n as i32 - 2;
    let sa = a.sinh();
    let sphere = sphere_area(n - 2);
    let inner = |b: f64| {
        let sb = b.sinh();
        let base = 2.0 * (0.5 * (a - b)).sinh().powi(2);
        let f = |theta: f64| {
            let x = base + 2.0 * sa * sb * (0.5 * theta).sin().powi(2);
            let d = 2.0 * (0.5 * x).sqrt().asinh();
            kernel.evaluate_fast(d) * theta.sin().powi(nm2)
        };
        integrate_adaptive_rel(f, 0.0, PI, 1e-14, 1e-9).value
    };
    let outer = |b: f64| {
        if b <= 0.0 {
            return 0.0;
        }
        let psi = probe.apply_shifted_pk(b, n, k, kernel.lambda);
        sphere * psi * b.sinh().powi(n as i32 - 1) * inner(b)
    };
    let l = probe.support;
    let mut breaks = vec![0.0];
    if a < l {
        breaks.push(a);
    }
    breaks.push(l);
    breaks.windows(2).map(|w| integrate_adaptive_rel(outer, w[0], w[1], 1e-11, 1e-8).value).sum()
}

/// Positivity, monotone decrease, the decay constant and the delta identity
/// `G ∗ (P_k − λ)φ = φ` for three probes at five points.
pub fn certify_kernel(kernel: &KernelProfile) -> KernelCertificate {
    certify_kernel_with(Exec::default(), kernel)
}

pub fn certify_kernel_with(exec: Exec, kernel: &KernelProfile) -> KernelCertificate {
    let v = kernel.values();
    let g = kernel.grid();
    let positive = v.iter().all(|x| x.is_finite() && *x > 0.0);
    let monotone = v.windows(2).all(|w| w[1] - w[0] <= 0.0);
    let p = kernel.dims.nf() - 2.0 * kernel.dims.k as f64;
    let (mut decay_constant, mut decay_argmax) = (f64::NEG_INFINITY, f64::NAN);
    for (&r, &x) in g.iter().zip(v) {
        let w = x * (0.5 * r).sinh().powf(p);
        if w > decay_constant {
            decay_constant = w;
            decay_argmax = r;
        }
    }
    let cases: Vec<(f64, f64)> =
        PROBE_SUPPORTS.iter().flat_map(|&l| PROBE_POINTS.iter().map(move |&a| (l, a))).collect();
    let delta: Vec<DeltaProbe> = map_range(exec, cases.len(), |i| {
        let (l, a) = cases[i];
        let probe = Probe { support: l };
        let value = delta_value(kernel, probe, a);
        let expected = probe.value(a);
        DeltaProbe { support: l, x_rho: a, value, expected, error: (value - expected).abs() }
    });
    let max_delta_error = delta.iter().map(|d| d.error).fold(0.0, f64::max);
    KernelCertificate { positive, monotone, decay_constant, decay_argmax, delta, max_delta_error }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_of_inverse_symbol() {
        // 1/(σ(σ+2) − λ) = σ^{−2} − 2σ^{−3} + (4 + λ)σ^{−4} + …
        let c = inverse_symbol_expansion(2, 0.3, 4);
        assert_eq!(c[0], 0.0);
        assert!((c[1] - 1.0).abs() < 1e-15);
        assert!((c[2] + 2.0).abs() < 1e-15);
        assert!((c[3] - 4.3).abs() < 1e-14);
        let c1 = inverse_symbol_expansion(1, 0.2, 3);
        assert!((c1[0] - 1.0).abs() < 1e-15 && (c1[1] - 0.2).abs() < 1e-15 && (c1[2] - 0.04).abs() < 1e-15);
    }

    #[test]
    fn closed_form_leading_singularity() {
        let dims = ProblemDims::new(5, 1).unwrap();
        let rho: f64 = 1e-4;
        let lead = 1.0 / (15.0 * euclidean_unit_ball_volume(5));
        assert!((p1_inverse_closed(rho, dims) * rho.powi(3) / lead - 1.0).abs() < 1e-6);
    }

    #[test]
    fn odd_resolvent_at_zero_is_p1_inverse() {
        for n in [3, 5, 7] {
            let dims = ProblemDims::new(n, 1).unwrap();
            let g = OddResolvent::new(n, 0.0).unwrap();
            for rho in [0.05, 0.5, 2.0, 6.0] {
                let a = g.eval(rho);
                let b = p1_inverse_closed(rho, dims);
                assert!((a / b - 1.0).abs() < 1e-12, "n={n} rho={rho} {a} {b}");
            }
        }
    }
}
