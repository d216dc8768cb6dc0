//! Finite-difference weights on arbitrary nodes (Fornberg's recursion).

/// Weights `w[d][j]` such that `f^{(d)}(x0) ≈ Σ_j w[d][j] f(nodes[j])`
/// for every derivative order `d ≤ max_deriv`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    if n == 0 {
        return c;
    }
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights for derivative `deriv` at offset `at` (in units of h) on the
/// integer stencil `lo..=hi`, scaled by `h^{-deriv}`.
pub fn stencil_weights(lo: i32, hi: i32, at: f64, deriv: usize, h: f64) -> Vec<f64> {
    let nodes: Vec<f64> = (lo..=hi).map(f64::from).collect();
    let w = fornberg_weights(at, &nodes, deriv);
    let s = h.powi(-(deriv as i32));
    w[deriv].iter().map(|x| x * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_second_derivative() {
        let w = stencil_weights(-1, 1, 0.0, 2, 1.0);
        for (a, b) in w.iter().zip([1.0, -2.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn fourth_order_first_derivative_is_exact_on_quartics() {
        let h = 0.1;
        let w = stencil_weights(-2, 2, 0.0, 1, h);
        let f = |x: f64| 3.0 * x.powi(4) - x.powi(3) + 2.0 * x;
        let x0 = 0.4;
        let d: f64 = (-2..=2).zip(&w).map(|(j, wj)| wj * f(x0 + j as f64 * h)).sum();
        let exact = 12.0 * x0.powi(3) - 3.0 * x0 * x0 + 2.0;
        assert!((d - exact).abs() < 1e-10);
    }
}
