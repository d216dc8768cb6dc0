//! Poincaré ball bookkeeping and radial operators on tabulated profiles.
//!
//! Radii: `r` is the Euclidean radius in the ball model, `ρ = 2 artanh r`
//! the geodesic one. The radial Laplacian is `Δ u = u″ + (n−1) coth ρ u′`
//! (negative semi-definite), `P1 = −Δ − n(n−2)/4` and
//! `P_k = ∏_{j=1}^k (P1 + j(j−1))`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::fd::fornberg_weights;
use crate::numerics::quad::integrate_adaptive_rel;
use crate::specfun::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemDims {
    pub n: u32,
    pub k: u32,
    /// Critical exponent `2n/(n−2k)`.
    pub q: f64,
}

impl ProblemDims {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if k == 0 || n <= 2 * k {
            return Err(Error::InvalidDims { n, k });
        }
        Ok(Self { n, k, q: 2.0 * n as f64 / (n - 2 * k) as f64 })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `n(n−2)/4`, the constant removed from `−Δ` in `P1`.
    pub fn conformal_shift(&self) -> f64 {
        let n = self.nf();
        n * (n - 2.0) / 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicBall {
    /// Euclidean radius in the ball model.
    pub radius: f64,
    /// Geodesic radius `log((1+R)/(1−R))`.
    pub rho_bar: f64,
}

impl GeodesicBall {
    pub fn from_euclidean(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::InvalidBall(radius));
        }
        Ok(Self { radius, rho_bar: euclid_to_geodesic(radius) })
    }

    pub fn from_geodesic(rho_bar: f64) -> Result<Self> {
        if !(rho_bar > 0.0 && rho_bar.is_finite()) {
            return Err(Error::InvalidBall(rho_bar));
        }
        Ok(Self { radius: geodesic_to_euclid(rho_bar), rho_bar })
    }
}

pub fn euclid_to_geodesic(r: f64) -> f64 {
    2.0 * r.atanh()
}

pub fn geodesic_to_euclid(rho: f64) -> f64 {
    (0.5 * rho).tanh()
}

/// Conformal factor `p = 2/(1−r²)` of the ball model.
pub fn conformal_factor(r: f64) -> f64 {
    2.0 / (1.0 - r * r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    /// Strictly increasing geodesic radii.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub dims: ProblemDims,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, dims: ProblemDims) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::ProfileMismatch(format!("{} radii, {} values", grid.len(), values.len())));
        }
        if grid.len() < 4 {
            return Err(Error::GridTooCoarse { needed: 4, got: grid.len() });
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
            return Err(Error::ProfileMismatch("grid must be non-negative and strictly increasing".into()));
        }
        Ok(Self { grid, values, dims })
    }

    pub fn from_fn(grid: Vec<f64>, dims: ProblemDims, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&r| f(r)).collect();
        Self::new(grid, values, dims)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Common spacing if the grid is uniform.
    pub fn uniform_step(&self) -> Option<f64> {
        let h = (self.grid[self.len() - 1] - self.grid[0]) / (self.len() - 1) as f64;
        let ok = self.grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        ok.then_some(h)
    }
}

/// `|S^m| = 2π^{(m+1)/2} / Γ((m+1)/2)`.
pub fn sphere_area(m: u32) -> f64 {
    let a = 0.5 * (m as f64 + 1.0);
    2.0 * (a * PI.ln() - ln_gamma(a).unwrap().0).exp()
}

/// Volume of the Euclidean unit ball in R^n.
pub fn euclidean_unit_ball_volume(n: u32) -> f64 {
    sphere_area(n - 1) / n as f64
}

/// Geodesic distance in the ball model:
/// `cosh d = 1 + 2|x−y|² / ((1−|x|²)(1−|y|²))`.
pub fn geodesic_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    assert_eq!(x.len(), y.len(), "points of different dimension");
    let nx: f64 = x.iter().map(|v| v * v).sum();
    let ny: f64 = y.iter().map(|v| v * v).sum();
    if nx >= 1.0 || ny >= 1.0 {
        return Err(Error::PointOutsideModel);
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    // acosh(1 + 2s) = 2 asinh(√s), accurate for small s
    let s = d2 / ((1.0 - nx) * (1.0 - ny));
    Ok(2.0 * s.sqrt().asinh())
}

/// `|S^{n−1}| ∫_0^{ρ̄} sinh^{n−1} t dt`.
pub fn ball_volume(rho_bar: f64, n: u32) -> f64 {
    let m = (n - 1) as i32;
    let r = integrate_adaptive_rel(|t: f64| t.sinh().powi(m), 0.0, rho_bar, 0.0, 1e-14);
    sphere_area(n - 1) * r.value
}

/// Five-point derivative weights at node `i` of a uniform grid with `len`
/// nodes: centered in the interior, shifted near the ends.
fn five_point(i: usize, len: usize, h: f64) -> (usize, [[f64; 5]; 3]) {
    let start = i.saturating_sub(2).min(len - 5);
    let nodes: Vec<f64> = (0..5).map(|j| (start + j) as f64 - i as f64).collect();
    let w = fornberg_weights(0.0, &nodes, 2);
    let mut out = [[0.0; 5]; 3];
    for d in 0..3 {
        for j in 0..5 {
            out[d][j] = w[d][j] / h.powi(d as i32);
        }
    }
    (start, out)
}

/// `(P1 + shift) u` on a uniform grid. At `ρ = 0` the smooth limit
/// `Δu(0) = n u″(0)` replaces the singular drift term.
pub fn apply_radial_p1_shifted(u: &RadialProfile, shift: f64) -> Result<RadialProfile> {
    let needed = 2 * u.dims.k as usize + 4;
    if u.len() < needed {
        return Err(Error::GridTooCoarse { needed, got: u.len() });
    }
    let h = u.uniform_step().ok_or(Error::NonUniformGrid)?;
    let n = u.dims.nf();
    let c = u.dims.conformal_shift();
    let len = u.len();
    let values = (0..len)
        .map(|i| {
            let (start, w) = five_point(i, len, h);
            let vals = &u.values[start..start + 5];
            let d1: f64 = w[1].iter().zip(vals).map(|(a, b)| a * b).sum();
            let d2: f64 = w[2].iter().zip(vals).map(|(a, b)| a * b).sum();
            let rho = u.grid[i];
            let lap = if rho == 0.0 { n * d2 } else { d2 + (n - 1.0) / rho.tanh() * d1 };
            -lap - c * u.values[i] + shift * u.values[i]
        })
        .collect();
    RadialProfile::new(u.grid.clone(), values, u.dims)
}

pub fn apply_radial_p1(u: &RadialProfile) -> Result<RadialProfile> {
    apply_radial_p1_shifted(u, 0.0)
}

/// `P_k u`, one factor `P1 + j(j−1)` at a time.
pub fn apply_radial_pk(u: &RadialProfile) -> Result<RadialProfile> {
    let mut cur = u.clone();
    for j in 1..=u.dims.k {
        cur = apply_radial_p1_shifted(&cur, (j * (j - 1)) as f64)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_ball() {
        let d = ProblemDims::new(5, 2).unwrap();
        assert_eq!(d.q, 10.0);
        assert!(ProblemDims::new(4, 2).is_err());
        let b = GeodesicBall::from_euclidean(0.5).unwrap();
        assert!((b.rho_bar - 3f64.ln()).abs() < 1e-15);
        assert!((GeodesicBall::from_geodesic(b.rho_bar).unwrap().radius - 0.5).abs() < 1e-15);
        assert!(GeodesicBall::from_euclidean(1.0).is_err());
    }

    #[test]
    fn spheres() {
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(5) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn distance_from_origin() {
        let r: f64 = 0.5;
        let d = geodesic_distance(&[0.0, 0.0, 0.0], &[0.0, r, 0.0]).unwrap();
        assert!((d - ((1.0 + r) / (1.0 - r)).ln()).abs() < 1e-15);
        assert!(geodesic_distance(&[1.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn volume_n3() {
        let v = ball_volume(1.0, 3);
        assert!((v - PI * (2f64.sinh() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn p1_on_constants() {
        let dims = ProblemDims::new(5, 1).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.05).collect();
        let u = RadialProfile::from_fn(grid, dims, |_| 1.0).unwrap();
        let p = apply_radial_p1(&u).unwrap();
        assert!(p.values.iter().all(|v| (v + 15.0 / 4.0).abs() < 1e-9));
    }
}
