//! Radial spherical transform on H^n and its inverse.
//!
//! Forward: `f̂(τ) = |S^{n−1}| ∫₀^∞ f(ρ) φ_τ(ρ) sinh^{n−1}ρ dρ`.
//! Inverse: `f(ρ) = D_n ∫₀^∞ f̂(τ) φ_τ(ρ) |𝔠(τ)|^{−2} dτ` with
//! `D_n = 1/(2^{3−n} π |S^{n−1}|)`. Under this pairing `−Δ` acts on the
//! transform side as multiplication by `((n−1)² + τ²)/4`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sphere_area, ProblemDims, RadialProfile};
use crate::numerics::gauss::composite_rule;
use crate::numerics::interp::cubic_interpolate;
use crate::par::{map_range, Exec};
use crate::specfun::{plancherel_density, spherical_fn_profile};

pub const DEFAULT_TAU_MAX: f64 = 40.0;
const TAU_PANEL: f64 = 0.5;
const TAU_ORDER: usize = 8;
const RHO_PANEL: f64 = 0.5;
const RHO_ORDER: usize = 12;
/// Relative size of the outer tenth of the radial integral that is tolerated.
const RHO_TAIL_LIMIT: f64 = 1e-8;
/// Relative size of the spectral integrand on the last panel that is tolerated.
const TAU_TAIL_LIMIT: f64 = 1e-6;

/// Quadrature in the spectral variable: Gauss–Legendre panels on `[0, τ_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub tau_max: f64,
}

impl TransformGrid {
    pub fn new(tau_max: f64, panel: f64, order: usize) -> Result<Self> {
        if !(tau_max > 0.0) || !(panel > 0.0) || order == 0 {
            return Err(Error::ArgumentOutOfDomain(tau_max));
        }
        let panels = (tau_max / panel).ceil().max(1.0) as usize;
        let breaks: Vec<f64> = (0..=panels).map(|i| tau_max * i as f64 / panels as f64).collect();
        let (nodes, weights) = composite_rule(&breaks, order);
        Ok(Self { nodes, weights, tau_max })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl Default for TransformGrid {
    fn default() -> Self {
        Self::new(DEFAULT_TAU_MAX, TAU_PANEL, TAU_ORDER).unwrap()
    }
}

/// Transform values on the nodes of a [`TransformGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralProfile {
    pub dims: ProblemDims,
    pub grid: TransformGrid,
    pub values: Vec<f64>,
}

impl SpectralProfile {
    pub fn from_fn(dims: ProblemDims, grid: TransformGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&t| f(t)).collect();
        Self { dims, grid, values }
    }

    pub fn tau(&self) -> &[f64] {
        &self.grid.nodes
    }
}

/// `D_n = 1/(2^{3−n} π |S^{n−1}|)`.
pub fn inversion_constant(n: u32) -> f64 {
    1.0 / (2f64.powi(3 - n as i32) * PI * sphere_area(n - 1))
}

/// Radial quadrature rule on `[0, rho_max]`, refined near the origin.
fn rho_rule(rho_max: f64) -> (Vec<f64>, Vec<f64>) {
    let mut breaks = vec![0.0];
    for b in [1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.35] {
        if b < rho_max {
            breaks.push(b);
        }
    }
    let mut x = RHO_PANEL;
    while x < rho_max - 1e-12 {
        if x > *breaks.last().unwrap() {
            breaks.push(x);
        }
        x += RHO_PANEL;
    }
    breaks.push(rho_max);
    composite_rule(&breaks, RHO_ORDER)
}

fn transform_weighted(
    exec: Exec,
    dims: ProblemDims,
    nodes: &[f64],
    weighted: &[f64],
    grid: &TransformGrid,
) -> Result<SpectralProfile> {
    // tail test on the τ = 0 integral, the one with the slowest decay
    let cut = 0.9 * nodes[nodes.len() - 1];
    let phi0 = spherical_fn_profile(0.0, dims.n, nodes)?;
    let (mut total, mut tail) = (0.0f64, 0.0f64);
    for ((r, w), p) in nodes.iter().zip(weighted).zip(&phi0) {
        let v = (w * p).abs();
        total += v;
        if *r > cut {
            tail += v;
        }
    }
    if total > 0.0 && tail > RHO_TAIL_LIMIT * total {
        return Err(Error::TailTooHeavy(tail / total));
    }
    let rows: Vec<Result<f64>> = map_range(exec, grid.len(), |i| {
        let phi = spherical_fn_profile(grid.nodes[i], dims.n, nodes)?;
        Ok(phi.iter().zip(weighted).map(|(p, w)| p * w).sum())
    });
    let values = rows.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(SpectralProfile { dims, grid: grid.clone(), values })
}

/// Transform of a function given in closed form, integrated over `[0, rho_max]`.
pub fn radial_transform_fn_with<F>(
    exec: Exec,
    f: F,
    dims: ProblemDims,
    rho_max: f64,
    grid: &TransformGrid,
) -> Result<SpectralProfile>
where
    F: Fn(f64) -> f64 + Sync,
{
    let (nodes, weights) = rho_rule(rho_max);
    let area = sphere_area(dims.n - 1);
    let nm1 = dims.n as i32 - 1;
    let values: Vec<f64> = map_range(exec, nodes.len(), |i| f(nodes[i]));
    let weighted: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .zip(&values)
        .map(|((r, w), v)| area * w * v * r.sinh().powi(nm1))
        .collect();
    transform_weighted(exec, dims, &nodes, &weighted, grid)
}

pub fn radial_transform_fn<F>(f: F, dims: ProblemDims, rho_max: f64, grid: &TransformGrid) -> Result<SpectralProfile>
where
    F: Fn(f64) -> f64 + Sync,
{
    radial_transform_fn_with(Exec::default(), f, dims, rho_max, grid)
}

/// Transform of a tabulated profile; cubic interpolation between nodes, the
/// first value held towards the origin and zero beyond the last node.
pub fn radial_transform(f: &RadialProfile, grid: &TransformGrid) -> Result<SpectralProfile> {
    let rho_max = f.grid[f.len() - 1];
    radial_transform_fn(|r| cubic_interpolate(&f.grid, &f.values, r), f.dims, rho_max, grid)
}

/// Inverse transform evaluated at arbitrary ascending radii.
pub fn radial_inverse_values_with(exec: Exec, spec: &SpectralProfile, rhos: &[f64]) -> Result<Vec<f64>> {
    let n = spec.dims.n;
    let grid = &spec.grid;
    let dens: Vec<f64> = grid.nodes.iter().map(|&t| plancherel_density(t, n)).collect();
    let integrand: Vec<f64> = spec.values.iter().zip(&dens).map(|(v, d)| v * d).collect();
    let peak = integrand.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let last_panel = grid.nodes.len().saturating_sub(TAU_ORDER);
        let tail = integrand[last_panel..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if tail > TAU_TAIL_LIMIT * peak {
            return Err(Error::TailTooHeavy(tail / peak));
        }
    } else {
        return Ok(vec![0.0; rhos.len()]);
    }
    let dn = inversion_constant(n);
    let rows: Vec<Result<Vec<f64>>> = map_range(exec, grid.len(), |i| {
        let c = dn * grid.weights[i] * integrand[i];
        Ok(spherical_fn_profile(grid.nodes[i], n, rhos)?.into_iter().map(|p| c * p).collect())
    });
    let mut out = vec![0.0; rhos.len()];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row?) {
            *o += v;
        }
    }
    Ok(out)
}

pub fn radial_inverse_values(spec: &SpectralProfile, rhos: &[f64]) -> Result<Vec<f64>> {
    radial_inverse_values_with(Exec::default(), spec, rhos)
}

/// Inverse transform on an ascending radial grid.
pub fn radial_inverse(spec: &SpectralProfile, rho_grid: &[f64]) -> Result<RadialProfile> {
    let values = radial_inverse_values(spec, rho_grid)?;
    RadialProfile::new(rho_grid.to_vec(), values, spec.dims)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlancherelCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `∫|f|² dV` against `D_n ∫ |f̂|² |𝔠|^{−2} dτ`.
pub fn plancherel_check(f: &RadialProfile, grid: &TransformGrid) -> Result<PlancherelCheck> {
    let n = f.dims.n;
    let rho_max = f.grid[f.len() - 1];
    let (nodes, weights) = rho_rule(rho_max);
    let area = sphere_area(n - 1);
    let lhs: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&r, w)| {
            let v = cubic_interpolate(&f.grid, &f.values, r);
            area * w * v * v * r.sinh().powi(n as i32 - 1)
        })
        .sum();
    let spec = radial_transform(f, grid)?;
    let rhs: f64 = inversion_constant(n)
        * spec
            .values
            .iter()
            .zip(&grid.nodes)
            .zip(&grid.weights)
            .map(|((v, &t), w)| w * v * v * plancherel_density(t, n))
            .sum::<f64>();
    let gap = if lhs == 0.0 { if rhs == 0.0 { 0.0 } else { f64::INFINITY } } else { (lhs - rhs).abs() / lhs };
    Ok(PlancherelCheck { lhs, rhs, gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_constant() {
        assert!((inversion_constant(3) - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_round_trip_three_dims() {
        let dims = ProblemDims::new(3, 1).unwrap();
        let grid = TransformGrid::default();
        let spec = radial_transform_fn(|r| (-r * r).exp(), dims, 8.0, &grid).unwrap();
        let rhos = [0.0, 0.5, 1.0, 2.0];
        let back = radial_inverse_values(&spec, &rhos).unwrap();
        for (r, v) in rhos.iter().zip(back) {
            assert!((v - (-r * r).exp()).abs() < 1e-8, "{r} {v}");
        }
    }
}
