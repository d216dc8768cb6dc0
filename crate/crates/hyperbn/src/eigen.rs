//! First Dirichlet eigenvalues of `P1` and `P2` on geodesic balls.
//!
//! Finite volumes on the uniform grid `ρ_i = i h`, `i = 0..=N`, `h = ρ̄/N`,
//! with flux weights `sinh^{n−1}` at cell midpoints and lumped cell masses
//! `m_i = ∫_{cell} sinh^{n−1}`. The symmetric `P1` form is `S = K − cM`.
//! For `P2 = P1(P1 + 2)` the form is `‖P1 u‖² + 2⟨P1 u, u⟩`, where `P1 u` is
//! `M⁻¹S u` at interior nodes and, at the clamped end, the ghost value
//! `u_{N+1} = u_{N−1}` gives `(P1 u)_N = −2u_{N−1}/h²`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{GeodesicBall, ProblemDims, RadialProfile};
use crate::numerics::eig::{smallest_generalized_eigenvalue, DenseSymmetricPair};
use crate::numerics::gauss::gauss_legendre;

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    /// Richardson-extrapolated eigenvalue.
    pub value: f64,
    /// Ground state on the fine grid, positive, max-normalized; vanishes at ρ̄.
    pub profile: RadialProfile,
    pub grid_size: usize,
    /// Normwise backward error of the fine-grid eigenpair.
    pub residual: f64,
    /// Unextrapolated values on the coarse (N/2) and fine (N) grids.
    pub coarse_value: f64,
    pub fine_value: f64,
}

struct Assembly {
    h: f64,
    /// Diagonal and super-diagonal of S on unknowns `0..N`.
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Lumped masses of nodes `0..N` and the half cell at ρ̄.
    mass: Vec<f64>,
    end_mass: f64,
}

fn cell_integral(m: i32, a: f64, b: f64, gx: &[f64], gw: &[f64]) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    gx.iter().zip(gw).map(|(x, w)| w * half * (mid + half * x).sinh().powi(m)).sum()
}

fn assemble(dims: ProblemDims, rho_bar: f64, nodes: usize) -> Assembly {
    let h = rho_bar / nodes as f64;
    let m = dims.n as i32 - 1;
    let c = dims.conformal_shift();
    let (gx, gw) = gauss_legendre(8);
    let flux: Vec<f64> = (0..nodes).map(|i| ((i as f64 + 0.5) * h).sinh().powi(m) / h).collect();
    let mass: Vec<f64> = (0..nodes)
        .map(|i| {
            let rho = i as f64 * h;
            cell_integral(m, (rho - 0.5 * h).max(0.0), rho + 0.5 * h, &gx, &gw)
        })
        .collect();
    let end_mass = cell_integral(m, rho_bar - 0.5 * h, rho_bar, &gx, &gw);
    let mut diag = vec![0.0; nodes];
    let mut off = vec![0.0; nodes.saturating_sub(1)];
    for i in 0..nodes {
        // flux to the right always present (u_N = 0); to the left for i > 0
        diag[i] = flux[i] + if i > 0 { flux[i - 1] } else { 0.0 } - c * mass[i];
        if i + 1 < nodes {
            off[i] = -flux[i];
        }
    }
    Assembly { h, diag, off, mass, end_mass }
}

fn s_matrix(a: &Assembly) -> DMatrix<f64> {
    let n = a.diag.len();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = a.diag[i];
        if i + 1 < n {
            s[(i, i + 1)] = a.off[i];
            s[(i + 1, i)] = a.off[i];
        }
    }
    s
}

fn p2_matrix(a: &Assembly) -> DMatrix<f64> {
    let n = a.diag.len();
    let mut out = s_matrix(a) * 2.0;
    // rows of D = M⁻¹S: row i has entries at i−1, i, i+1
    let row = |i: usize| -> [(usize, f64); 3] {
        let mi = a.mass[i];
        [
            (i.wrapping_sub(1), if i > 0 { a.off[i - 1] / mi } else { 0.0 }),
            (i, a.diag[i] / mi),
            (i + 1, if i + 1 < n { a.off[i] / mi } else { 0.0 }),
        ]
    };
    for k in 0..n {
        let r = row(k);
        let q = a.mass[k];
        for &(i, di) in &r {
            if di == 0.0 || i >= n {
                continue;
            }
            for &(j, dj) in &r {
                if dj == 0.0 || j >= n {
                    continue;
                }
                out[(i, j)] += q * di * dj;
            }
        }
    }
    let g = -2.0 / (a.h * a.h);
    out[(n - 1, n - 1)] += a.end_mass * g * g;
    out
}

fn mass_matrix(a: &Assembly) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(a.mass.clone()))
}

fn solve(dims: ProblemDims, ball: GeodesicBall, nodes: usize, order: u32) -> Result<(f64, Vec<f64>, f64)> {
    let a = assemble(dims, ball.rho_bar, nodes);
    let lhs = if order == 1 { s_matrix(&a) } else { p2_matrix(&a) };
    let pair = DenseSymmetricPair::new(lhs, mass_matrix(&a))?;
    let e = smallest_generalized_eigenvalue(&pair)?;
    let mut v: Vec<f64> = e.vector.iter().copied().collect();
    v.push(0.0);
    let vmax = v.iter().fold(0.0f64, |m, x| if x.abs() > m.abs() { *x } else { m });
    v.iter_mut().for_each(|x| *x /= vmax);
    Ok((e.value, v, e.backward_error))
}

fn first_eigenvalue(dims: ProblemDims, ball: GeodesicBall, grid: usize, order: u32, min_grid: usize) -> Result<EigenResult> {
    if grid < min_grid {
        return Err(Error::GridTooCoarse { needed: min_grid, got: grid });
    }
    let fine = grid + grid % 2;
    let (coarse_value, _, _) = solve(dims, ball, fine / 2, order)?;
    let (fine_value, vec, residual) = solve(dims, ball, fine, order)?;
    let value = (4.0 * fine_value - coarse_value) / 3.0;
    let h = ball.rho_bar / fine as f64;
    let grid_pts: Vec<f64> = (0..=fine).map(|i| i as f64 * h).collect();
    let profile = RadialProfile::new(grid_pts, vec, dims)?;
    Ok(EigenResult { value, profile, grid_size: fine, residual, coarse_value, fine_value })
}

/// `Λ₁(P1, B)`: Dirichlet condition `u(ρ̄) = 0`.
pub fn first_eigenvalue_p1(dims: ProblemDims, ball: GeodesicBall, grid: usize) -> Result<EigenResult> {
    first_eigenvalue(dims, ball, grid, 1, 100)
}

/// `Λ₁(P2, B)`: clamped conditions `u(ρ̄) = u′(ρ̄) = 0`.
pub fn first_eigenvalue_p2(dims: ProblemDims, ball: GeodesicBall, grid: usize) -> Result<EigenResult> {
    first_eigenvalue(dims, ball, grid, 2, 200)
}

/// Discrete Rayleigh quotient of a probe on the same assembly (fine grid of
/// `grid` cells); used to test that Λ₁ bounds every admissible probe.
pub fn discrete_rayleigh_quotient(
    dims: ProblemDims,
    ball: GeodesicBall,
    grid: usize,
    order: u32,
    probe: impl Fn(f64) -> f64,
) -> f64 {
    let a = assemble(dims, ball.rho_bar, grid);
    let lhs = if order == 1 { s_matrix(&a) } else { p2_matrix(&a) };
    let v = nalgebra::DVector::from_fn(grid, |i, _| probe(i as f64 * a.h));
    let num = v.dot(&(&lhs * &v));
    let den: f64 = v.iter().zip(&a.mass).map(|(x, m)| x * x * m).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_above_quarter() {
        let d = ProblemDims::new(5, 1).unwrap();
        let b = GeodesicBall::from_euclidean(0.5).unwrap();
        let e = first_eigenvalue_p1(d, b, 200).unwrap();
        assert!(e.value > 0.25);
        assert!(e.profile.values.iter().all(|v| *v >= 0.0));
    }
}
