//! Interpolation of grid fields at off-grid points.

use ndarray::Array2;

use super::diff::{reflect, Parity};
use super::grid::GridQ;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Bilinear,
    Bicubic,
}

/// Cubic Lagrange weights for nodes `0..4` at position `s` (in node units).
#[inline]
fn lagrange4(s: f64) -> [f64; 4] {
    [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ]
}

/// Cell index and local coordinate of `x` on a uniform grid starting at `x0`.
#[inline]
fn locate(x: f64, x0: f64, h: f64, n: usize) -> (usize, f64) {
    let t = ((x - x0) / h).clamp(0.0, (n - 1) as f64);
    let k = (t.floor() as usize).min(n - 2);
    (k, t - k as f64)
}

/// Cubic stencil start in a bounded direction: shifted inward at the ends.
#[inline]
fn bounded_base(k: usize, n: usize) -> usize {
    k.saturating_sub(1).min(n - 4)
}

/// 1D cubic interpolation on uniform nodes over `[-1, 1]` with wall reflection.
pub fn cubic_y2(values: &[f64], h: f64, x: f64, parity: Parity) -> f64 {
    let n = values.len();
    let (k, t) = locate(x, -1.0, h, n);
    let w = lagrange4(t + 1.0);
    (0..4).map(|m| w[m] * reflect(values, k as isize - 1 + m as isize, parity)).sum()
}

/// 1D cubic interpolation on `[-1, 1]` with one-sided stencils at the walls.
pub fn cubic_bounded(values: &[f64], h: f64, x: f64) -> f64 {
    let n = values.len();
    let (k, t) = locate(x, -1.0, h, n);
    let b = bounded_base(k, n);
    let w = lagrange4(k as f64 + t - b as f64);
    (0..4).map(|m| w[m] * values[b + m]).sum()
}

pub fn bilinear(f: &Array2<f64>, grid: &GridQ, y1: f64, y2: f64) -> f64 {
    let (i, s) = locate(y1, grid.ls, grid.h1, grid.n1);
    let (j, t) = locate(y2, -1.0, grid.h2, grid.n2);
    (1.0 - s) * ((1.0 - t) * f[[i, j]] + t * f[[i, j + 1]]) + s * ((1.0 - t) * f[[i + 1, j]] + t * f[[i + 1, j + 1]])
}

pub fn bicubic(f: &Array2<f64>, grid: &GridQ, y1: f64, y2: f64, parity: Parity) -> f64 {
    let (i, s) = locate(y1, grid.ls, grid.h1, grid.n1);
    let (j, t) = locate(y2, -1.0, grid.h2, grid.n2);
    let ib = bounded_base(i, grid.n1);
    let wi = lagrange4(i as f64 + s - ib as f64);
    let wj = lagrange4(t + 1.0);
    let mut acc = 0.0;
    for (a, wa) in wi.iter().enumerate() {
        let row = f.row(ib + a);
        let row = row.as_slice().expect("row-major field");
        let mut r = 0.0;
        for (b, wb) in wj.iter().enumerate() {
            r += wb * reflect(row, j as isize - 1 + b as isize, parity);
        }
        acc += wa * r;
    }
    acc
}

pub fn sample(f: &Array2<f64>, grid: &GridQ, y1: f64, y2: f64, parity: Parity, method: Interpolation) -> f64 {
    match method {
        Interpolation::Bilinear => bilinear(f, grid, y1, y2),
        Interpolation::Bicubic => bicubic(f, grid, y1, y2, parity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_at_nodes() {
        let g = GridQ::new(0.5, 1.0, 9, 13).unwrap();
        let f = g.from_fn(|a, b| (3.0 * a).sin() * (2.0 * b).cos());
        for i in 0..9 {
            for j in 0..13 {
                assert!((bilinear(&f, &g, g.y1[i], g.y2[j]) - f[[i, j]]).abs() < 1e-15);
                assert!((bicubic(&f, &g, g.y1[i], g.y2[j], Parity::Even) - f[[i, j]]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bicubic_reproduces_cubics() {
        let g = GridQ::new(0.0, 1.0, 9, 9).unwrap();
        let f = g.from_fn(|a, b| a * a * a - 2.0 * a * b + b * b * b * a);
        for &(a, b) in &[(0.03, 0.4), (0.51, 0.2), (0.97, -0.3)] {
            let exact = a * a * a - 2.0 * a * b + b * b * b * a;
            assert!((bicubic(&f, &g, a, b, Parity::Even) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_y2_uses_reflection() {
        let n = 17;
        let h = 2.0 / (n - 1) as f64;
        let pi = std::f64::consts::PI;
        let v: Vec<f64> = (0..n).map(|j| (pi * (j as f64 * h)).cos()).collect();
        let x = -1.0 + 0.3 * h;
        assert!((cubic_y2(&v, h, x, Parity::Even) - (pi * (x + 1.0)).cos()).abs() < 1e-3);
        assert_eq!(cubic_y2(&v, h, 1.0, Parity::Even), v[n - 1]);
    }
}
