//! Local polynomial interpolation on non-uniform grids.

/// Four-point Lagrange interpolation of tabulated data at `x`.
///
/// Left of the grid the first value is held constant; right of the grid the
/// result is zero. Inside, the stencil is the four nodes closest to `x`.
pub fn cubic_interpolate(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    assert_eq!(n, values.len());
    if n == 0 || x > grid[n - 1] {
        return 0.0;
    }
    if x <= grid[0] {
        return values[0];
    }
    if n < 4 {
        let i = grid.partition_point(|&g| g < x).clamp(1, n - 1);
        let t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
        return values[i - 1] * (1.0 - t) + values[i] * t;
    }
    let i = grid.partition_point(|&g| g < x);
    let start = i.saturating_sub(2).min(n - 4);
    let mut acc = 0.0;
    for a in start..start + 4 {
        let mut l = 1.0;
        for b in start..start + 4 {
            if a != b {
                l *= (x - grid[b]) / (grid[a] - grid[b]);
            }
        }
        acc += l * values[a];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics() {
        let grid: Vec<f64> = (0..20).map(|i| (i as f64 * 0.13).powf(1.3)).collect();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        for x in [0.01, 0.3, 1.7, grid[19] - 1e-9] {
            assert!((cubic_interpolate(&grid, &vals, x) - f(x)).abs() < 1e-10);
        }
        assert_eq!(cubic_interpolate(&grid, &vals, grid[19] + 1.0), 0.0);
        assert_eq!(cubic_interpolate(&grid, &vals, -1.0), vals[0]);
    }
}
