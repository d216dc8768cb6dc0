//! Associated Legendre functions `P_ν^μ(cosh ρ)` on the cut `cosh ρ > 1`.
//!
//! Evaluated as `coth^μ(ρ/2) F̃(−ν, ν+1; 1−μ; −sinh²(ρ/2))`. The degree
//! only enters through `κ = ν(ν+1)`, so the `*_kappa` variants accept any
//! real κ, including the conical range κ < −1/4 where ν is complex. With this
//! normalization the functions solve
//! `u″ + coth ρ u′ − (κ + μ²/sinh²ρ) u = 0`.

use super::hyper::{hyp2f1_sp, hyp2f1_sp_deriv};
use super::gamma::recip_gamma;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreParams {
    pub degree: f64,
    pub order: f64,
}

impl LegendreParams {
    pub fn new(degree: f64, order: f64) -> Self {
        Self { degree, order }
    }

    pub fn kappa(&self) -> f64 {
        self.degree * (self.degree + 1.0)
    }
}

const SMALL_RHO: f64 = 1e-3;

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::ArgumentOutOfDomain(rho))
    }
}

fn coth_half_pow(mu: f64, rho: f64) -> f64 {
    (mu * (1.0 / (0.5 * rho).tanh()).ln()).exp()
}

/// `P(κ, μ; ρ)`.
pub fn legendre_p_kappa(kappa: f64, mu: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let c = 1.0 - mu;
    let z = -(0.5 * rho).sinh().powi(2);
    let f = if rho < SMALL_RHO && !(c <= 0.0 && c == c.floor()) {
        // three-term expansion; the remainder is O(ρ⁶)
        let (s, p) = (1.0, -kappa);
        let t0 = recip_gamma(c);
        let t1 = t0 * p / c;
        let t2 = t1 * (1.0 + s + p) / (2.0 * (c + 1.0));
        t0 + z * (t1 + z * t2)
    } else {
        hyp2f1_sp(1.0, -kappa, c, z)?
    };
    Ok(coth_half_pow(mu, rho) * f)
}

pub fn legendre_p(params: LegendreParams, rho: f64) -> Result<f64> {
    legendre_p_kappa(params.kappa(), params.order, rho)
}

/// `d/dρ P^μ = P^{μ+1} + μ coth ρ · P^μ` (raising relation).
pub fn legendre_p_kappa_deriv(kappa: f64, mu: f64, rho: f64) -> Result<f64> {
    let up = legendre_p_kappa(kappa, mu + 1.0, rho)?;
    let here = legendre_p_kappa(kappa, mu, rho)?;
    Ok(up + mu * here / rho.tanh())
}

pub fn legendre_p_deriv(params: LegendreParams, rho: f64) -> Result<f64> {
    legendre_p_kappa_deriv(params.kappa(), params.order, rho)
}

/// `d/dρ P^{μ+1} = (κ − μ(μ+1)) P^μ − (μ+1) coth ρ · P^{μ+1}` (lowering
/// relation).
pub fn legendre_p_lower_deriv(kappa: f64, mu: f64, rho: f64) -> Result<f64> {
    let up = legendre_p_kappa(kappa, mu + 1.0, rho)?;
    let here = legendre_p_kappa(kappa, mu, rho)?;
    Ok((kappa - mu * (mu + 1.0)) * here - (mu + 1.0) * up / rho.tanh())
}

/// `d/dρ P^μ` by differentiating the hypergeometric series term by term;
/// independent of the raising relation.
pub fn legendre_p_series_deriv(kappa: f64, mu: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let c = 1.0 - mu;
    let sh = (0.5 * rho).sinh();
    let z = -sh * sh;
    let f = hyp2f1_sp(1.0, -kappa, c, z)?;
    let df = hyp2f1_sp_deriv(1.0, -kappa, c, z)?;
    let coth = 1.0 / (0.5 * rho).tanh();
    let pow = coth_half_pow(mu, rho);
    // d/dρ coth^μ(ρ/2) = −μ coth^{μ−1}(ρ/2) / (2 sinh²(ρ/2))
    let dpow = -mu * pow / coth / (2.0 * sh * sh);
    Ok(dpow * f + pow * df * (-0.5 * rho.sinh()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_for_zero_degree_and_order() {
        for rho in [1e-4, 0.3, 2.0, 5.0] {
            assert!((legendre_p(LegendreParams::new(0.0, 0.0), rho).unwrap() - 1.0).abs() < 1e-14);
            assert!(legendre_p_deriv(LegendreParams::new(0.0, 0.0), rho).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn reference_values() {
        let p = LegendreParams::new(1.37, -1.5);
        assert!((legendre_p(p, 0.8).unwrap() - 0.215_905_502_514_740_94).abs() < 1e-14);
        assert!((legendre_p_deriv(p, 0.8).unwrap() - 0.472_084_226_392_457).abs() < 1e-13);
        assert!((legendre_p_series_deriv(p.kappa(), -1.5, 0.8).unwrap() - 0.472_084_226_392_457).abs() < 1e-13);
        let far = legendre_p(LegendreParams::new(2.2, -1.5), 3.5).unwrap();
        assert!((far / 124.640_334_832_229_04 - 1.0).abs() < 1e-12);
        // conical: ν = −1/2 + 2i, κ = −1/4 − 4
        let con = legendre_p_kappa(-4.25, -0.5, 2.3).unwrap();
        assert!((con - -0.178_415_072_226_154_26).abs() < 1e-12);
    }

    #[test]
    fn small_rho_expansion_matches_series() {
        let (k, mu) = (0.7, -1.5);
        for rho in [1e-5, 3e-4, 9e-4] {
            let short = legendre_p_kappa(k, mu, rho).unwrap();
            let z = -(0.5 * rho).sinh().powi(2);
            let full = coth_half_pow(mu, rho) * hyp2f1_sp(1.0, -k, 1.0 - mu, z).unwrap();
            assert!((short / full - 1.0).abs() < 1e-14);
        }
    }
}
