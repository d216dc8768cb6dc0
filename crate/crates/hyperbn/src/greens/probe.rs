//! Truncated Taylor jets in the radial variable, used to apply `P_k − λ`
//! exactly to polynomial test functions.

/// Taylor coefficients `f^{(d)}(ρ₀)/d!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    fn truncated(&self, order: usize) -> Jet {
        Jet(self.0[..=order].to_vec())
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let ord = self.order().min(other.order());
        let mut out = vec![0.0; ord + 1];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..=i).map(|j| self.0[j] * other.0[i - j]).sum();
        }
        Jet(out)
    }

    pub fn div(&self, other: &Jet) -> Jet {
        let ord = self.order().min(other.order());
        let mut out = vec![0.0; ord + 1];
        for i in 0..=ord {
            let s: f64 = (1..=i).map(|j| other.0[j] * out[i - j]).sum();
            out[i] = (self.0[i] - s) / other.0[0];
        }
        Jet(out)
    }

    /// Derivative; the order drops by one.
    pub fn deriv(&self) -> Jet {
        Jet((1..self.0.len()).map(|i| i as f64 * self.0[i]).collect())
    }

    pub fn scale_add(&self, a: f64, other: &Jet, b: f64) -> Jet {
        let ord = self.order().min(other.order());
        Jet((0..=ord).map(|i| a * self.0[i] + b * other.0[i]).collect())
    }

    pub fn powi(&self, p: u32) -> Jet {
        let mut out = Jet(std::iter::once(1.0).chain(std::iter::repeat(0.0)).take(self.0.len()).collect());
        for _ in 0..p {
            out = out.mul(self);
        }
        out
    }
}

fn coth_jet(rho: f64, order: usize) -> Jet {
    let (s, c) = (rho.sinh(), rho.cosh());
    let mut fact = 1.0;
    let mut sh = Vec::with_capacity(order + 1);
    let mut ch = Vec::with_capacity(order + 1);
    for d in 0..=order {
        if d > 0 {
            fact *= d as f64;
        }
        let (a, b) = if d % 2 == 0 { (s, c) } else { (c, s) };
        sh.push(a / fact);
        ch.push(b / fact);
    }
    Jet(ch).div(&Jet(sh))
}

/// `P1 f = −f″ − (n−1) coth ρ f′ − n(n−2)/4 f` on a jet at `rho`.
pub fn p1_jet(f: &Jet, rho: f64, n: u32) -> Jet {
    let nf = n as f64;
    let ord = f.order() - 2;
    let d1 = f.deriv();
    let d2 = d1.deriv();
    let coth = coth_jet(rho, ord);
    let drift = coth.mul(&d1.truncated(ord));
    let base = f.truncated(ord);
    d2.scale_add(-1.0, &drift, -(nf - 1.0)).scale_add(1.0, &base, -0.25 * nf * (nf - 2.0))
}

/// Smooth compactly supported radial probe `(1 − (ρ/L)²)^8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub support: f64,
}

pub const PROBE_POWER: u32 = 8;

impl Probe {
    pub fn value(&self, rho: f64) -> f64 {
        let u = 1.0 - (rho / self.support).powi(2);
        if u <= 0.0 { 0.0 } else { u.powi(PROBE_POWER as i32) }
    }

    pub fn jet(&self, rho: f64, order: usize) -> Jet {
        if rho >= self.support {
            return Jet(vec![0.0; order + 1]);
        }
        let l2 = self.support * self.support;
        let mut u = vec![0.0; order + 1];
        u[0] = 1.0 - rho * rho / l2;
        if order >= 1 {
            u[1] = -2.0 * rho / l2;
        }
        if order >= 2 {
            u[2] = -1.0 / l2;
        }
        Jet(u).powi(PROBE_POWER)
    }

    /// `(P_k − λ) φ` at `rho` with `P_k = ∏_{j=1}^k (P1 + j(j−1))`.
    pub fn apply_shifted_pk(&self, rho: f64, n: u32, k: u32, lambda: f64) -> f64 {
        // coth ρ · f′ loses digits as ρ → 0; the probe is flat there
        let rho = rho.max(1e-3);
        let phi = self.jet(rho, 2 * k as usize);
        let mut acc = phi.clone();
        for j in (1..=k).rev() {
            let shift = (j * (j - 1)) as f64;
            acc = p1_jet(&acc, rho, n).scale_add(1.0, &acc, shift);
        }
        acc.0[0] - lambda * phi.0[0]
    }
}
