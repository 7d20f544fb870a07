//! Uniform one-dimensional grids and discrete norms.
//!
//! Grid fields are stored flat and node-major: component `c` of node `i`
//! lives at `field[i * n + c]`. Discrete Sobolev norms use centered
//! differences in the interior and one-sided differences at the ends.

use serde::{Deserialize, Serialize};

/// Uniform grid on `[x_left, x_left + (m-1) dx]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Grid {
    pub x_left: f64,
    pub dx: f64,
    pub m: usize,
}

impl Grid {
    pub fn symmetric(half_length: f64, m: usize) -> Self {
        assert!(m >= 3, "grid needs at least three nodes");
        Grid {
            x_left: -half_length,
            dx: 2.0 * half_length / (m - 1) as f64,
            m,
        }
    }

    pub fn from_interval(x_left: f64, x_right: f64, m: usize) -> Self {
        assert!(x_right > x_left && m >= 3);
        Grid {
            x_left,
            dx: (x_right - x_left) / (m - 1) as f64,
            m,
        }
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.dx
    }

    pub fn x_right(&self) -> f64 {
        self.node(self.m - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.node(i)).collect()
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let raw = ((x - self.x_left) / self.dx).round();
        (raw.max(0.0) as usize).min(self.m - 1)
    }
}

/// Pointwise Euclidean norm of node `i` in a flat field with `n` components.
#[inline]
pub fn node_norm(field: &[f64], n: usize, i: usize) -> f64 {
    field[i * n..(i + 1) * n]
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// `L^1` norm: trapezoid-weighted sum of pointwise Euclidean norms.
pub fn norm_l1(field: &[f64], n: usize, dx: f64) -> f64 {
    let m = field.len() / n;
    let mut s = 0.0;
    for i in 0..m {
        let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
        s += w * node_norm(field, n, i);
    }
    s * dx
}

/// `L^2` norm.
pub fn norm_l2(field: &[f64], n: usize, dx: f64) -> f64 {
    let m = field.len() / n;
    let mut s = 0.0;
    for i in 0..m {
        let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
        let r = node_norm(field, n, i);
        s += w * r * r;
    }
    (s * dx).sqrt()
}

/// `L^inf` norm.
pub fn norm_linf(field: &[f64], n: usize) -> f64 {
    let m = field.len() / n;
    (0..m).fold(0.0_f64, |acc, i| acc.max(node_norm(field, n, i)))
}

/// Spatial derivative of every component: centered in the interior,
/// one-sided second-order at the boundary nodes.
pub fn derivative(field: &[f64], n: usize, dx: f64) -> Vec<f64> {
    let m = field.len() / n;
    let mut out = vec![0.0; field.len()];
    for c in 0..n {
        for i in 0..m {
            let v = |k: usize| field[k * n + c];
            out[i * n + c] = if i == 0 {
                (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * dx)
            } else if i == m - 1 {
                (3.0 * v(m - 1) - 4.0 * v(m - 2) + v(m - 3)) / (2.0 * dx)
            } else {
                (v(i + 1) - v(i - 1)) / (2.0 * dx)
            };
        }
    }
    out
}

/// Discrete `H^k` norm: `sqrt(sum_{q<=k} |D^q u|_{L^2}^2)`.
pub fn norm_hk(field: &[f64], n: usize, dx: f64, k: usize) -> f64 {
    let mut total = norm_l2(field, n, dx).powi(2);
    let mut current = field.to_vec();
    for _ in 1..=k {
        current = derivative(&current, n, dx);
        total += norm_l2(&current, n, dx).powi(2);
    }
    total.sqrt()
}

/// Discrete `W^{k,inf}` norm: `max_{q<=k} |D^q u|_{L^inf}`.
pub fn norm_wk_inf(field: &[f64], n: usize, dx: f64, k: usize) -> f64 {
    let mut total = norm_linf(field, n);
    let mut current = field.to_vec();
    for _ in 1..=k {
        current = derivative(&current, n, dx);
        total = total.max(norm_linf(&current, n));
    }
    total
}

/// Extract a component block `[c0, c0+len)` of every node.
pub fn component_block(field: &[f64], n: usize, c0: usize, len: usize) -> Vec<f64> {
    let m = field.len() / n;
    let mut out = vec![0.0; m * len];
    for i in 0..m {
        out[i * len..(i + 1) * len].copy_from_slice(&field[i * n + c0..i * n + c0 + len]);
    }
    out
}

/// Componentwise trapezoid integral of a vector field.
pub fn integrate(field: &[f64], n: usize, dx: f64) -> Vec<f64> {
    let m = field.len() / n;
    let mut out = vec![0.0; n];
    for i in 0..m {
        let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
        for c in 0..n {
            out[c] += w * field[i * n + c];
        }
    }
    for v in &mut out {
        *v *= dx;
    }
    out
}

/// Cubic (4-point Lagrange) interpolation of a field at `x`, clamped to the
/// grid range.
pub fn interp_cubic(grid: &Grid, field: &[f64], n: usize, x: f64, out: &mut [f64]) {
    let m = grid.m;
    let s = (x - grid.x_left) / grid.dx;
    if s <= 0.0 {
        out.copy_from_slice(&field[0..n]);
        return;
    }
    if s >= (m - 1) as f64 {
        out.copy_from_slice(&field[(m - 1) * n..m * n]);
        return;
    }
    let i1 = (s.floor() as usize).clamp(1, m - 3);
    let t = s - i1 as f64;
    // Lagrange weights on nodes i1-1, i1, i1+1, i1+2 at offset t in [0,1].
    let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    for c in 0..n {
        out[c] = w0 * field[(i1 - 1) * n + c]
            + w1 * field[i1 * n + c]
            + w2 * field[(i1 + 1) * n + c]
            + w3 * field[(i1 + 2) * n + c];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn norms_of_constant_field() {
        let g = Grid::symmetric(1.0, 11);
        let f = vec![3.0; 11];
        assert_relative_eq!(norm_linf(&f, 1), 3.0);
        assert_relative_eq!(norm_l1(&f, 1, g.dx), 6.0, epsilon = 1e-12);
        assert_relative_eq!(norm_l2(&f, 1, g.dx), 3.0 * 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn derivative_is_second_order() {
        let g = Grid::symmetric(1.0, 201);
        let f: Vec<f64> = g.nodes().iter().map(|&x| (2.0 * x).sin()).collect();
        let d = derivative(&f, 1, g.dx);
        for (i, &x) in g.nodes().iter().enumerate() {
            let exact = 2.0 * (2.0 * x).cos();
            assert!((d[i] - exact).abs() < 4e-4, "node {i}: {} vs {exact}", d[i]);
        }
    }

    #[test]
    fn cubic_interpolation_exact_on_cubics() {
        let g = Grid::symmetric(2.0, 41);
        let f: Vec<f64> = g.nodes().iter().map(|&x| x * x * x - 2.0 * x).collect();
        let mut out = [0.0];
        interp_cubic(&g, &f, 1, 0.777, &mut out);
        assert_relative_eq!(out[0], 0.777_f64.powi(3) - 2.0 * 0.777, epsilon = 1e-12);
    }
}
