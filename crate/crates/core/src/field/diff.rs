//! Finite differences, quadrature and wall-compatibility checks on uniform grids.
//!
//! In `y2` the walls are symmetry lines: fields are extended across them as
//! even or odd functions. In `y1` ends use one-sided stencils of matching order.

use ndarray::{Array2, Axis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Value at index `k` (possibly outside `0..n`) using wall reflection.
#[inline]
pub(crate) fn reflect(v: &[f64], k: isize, parity: Parity) -> f64 {
    let n = v.len() as isize;
    if k < 0 {
        parity.sign() * v[(-k) as usize]
    } else if k >= n {
        parity.sign() * v[(2 * (n - 1) - k) as usize]
    } else {
        v[k as usize]
    }
}

/// Second-order first derivative with one-sided ends.
pub fn d1(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    out
}

/// Fourth-order first derivative with one-sided ends.
pub fn d1_4th(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    let c = 12.0 * h;
    out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / c;
    out[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / c;
    out[n - 1] = (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4] + 3.0 * v[n - 5]) / c;
    out[n - 2] = (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5]) / c;
    for i in 2..n - 2 {
        out[i] = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / c;
    }
    out
}

/// Second-order second derivative with one-sided ends.
pub fn d2(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let h2 = h * h;
    let mut out = vec![0.0; n];
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    out[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    out
}

/// Second-order first derivative using wall reflection of the given parity.
pub fn d1_reflect(v: &[f64], h: f64, parity: Parity) -> Vec<f64> {
    (0..v.len() as isize)
        .map(|k| (reflect(v, k + 1, parity) - reflect(v, k - 1, parity)) / (2.0 * h))
        .collect()
}

/// Fourth-order first derivative using wall reflection of the given parity.
pub fn d1_4th_reflect(v: &[f64], h: f64, parity: Parity) -> Vec<f64> {
    (0..v.len() as isize)
        .map(|k| {
            let r = |o: isize| reflect(v, k + o, parity);
            (-r(2) + 8.0 * r(1) - 8.0 * r(-1) + r(-2)) / (12.0 * h)
        })
        .collect()
}

/// Second-order second derivative using wall reflection of the given parity.
pub fn d2_reflect(v: &[f64], h: f64, parity: Parity) -> Vec<f64> {
    (0..v.len() as isize)
        .map(|k| (reflect(v, k + 1, parity) - 2.0 * v[k as usize] + reflect(v, k - 1, parity)) / (h * h))
        .collect()
}

/// Cumulative integral from the first node: composite Simpson at even
/// offsets, a three-point single-interval rule at odd offsets.
pub fn cumulative_integral(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            out[1] = 0.5 * h * (v[0] + v[1]);
        }
        return out;
    }
    for k in (2..n).step_by(2) {
        out[k] = out[k - 2] + h / 3.0 * (v[k - 2] + 4.0 * v[k - 1] + v[k]);
    }
    for k in (1..n).step_by(2) {
        out[k] = if k + 1 < n {
            out[k - 1] + h / 12.0 * (5.0 * v[k - 1] + 8.0 * v[k] - v[k + 1])
        } else {
            out[k - 1] + h / 12.0 * (-v[k - 2] + 8.0 * v[k - 1] + 5.0 * v[k])
        };
    }
    out
}

fn along_y1(f: &Array2<f64>, op: impl Fn(&[f64]) -> Vec<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(f.raw_dim());
    for (src, mut dst) in f.axis_iter(Axis(1)).zip(out.axis_iter_mut(Axis(1))) {
        let col = src.to_vec();
        for (d, v) in dst.iter_mut().zip(op(&col)) {
            *d = v;
        }
    }
    out
}

fn along_y2(f: &Array2<f64>, op: impl Fn(&[f64]) -> Vec<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(f.raw_dim());
    for (src, mut dst) in f.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
        let row = src.to_vec();
        for (d, v) in dst.iter_mut().zip(op(&row)) {
            *d = v;
        }
    }
    out
}

pub fn dy1(f: &Array2<f64>, h1: f64) -> Array2<f64> {
    along_y1(f, |c| d1(c, h1))
}

pub fn dy1_4th(f: &Array2<f64>, h1: f64) -> Array2<f64> {
    along_y1(f, |c| d1_4th(c, h1))
}

pub fn dy1y1(f: &Array2<f64>, h1: f64) -> Array2<f64> {
    along_y1(f, |c| d2(c, h1))
}

pub fn dy2(f: &Array2<f64>, h2: f64, parity: Parity) -> Array2<f64> {
    along_y2(f, |r| d1_reflect(r, h2, parity))
}

pub fn dy2_4th(f: &Array2<f64>, h2: f64, parity: Parity) -> Array2<f64> {
    along_y2(f, |r| d1_4th_reflect(r, h2, parity))
}

pub fn dy2y2(f: &Array2<f64>, h2: f64, parity: Parity) -> Array2<f64> {
    along_y2(f, |r| d2_reflect(r, h2, parity))
}

/// `int_{-1}^{y2} f(y1, t) dt` for every row.
pub fn integral_y2(f: &Array2<f64>, h2: f64) -> Array2<f64> {
    along_y2(f, |r| cumulative_integral(r, h2))
}

/// One-sided wall derivative of order `k` (1, 2 or 3) at both ends of `v`,
/// together with a truncation bound `C h^2 max|v^(k+2)|` estimated from
/// undivided differences, plus a floating-point allowance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallCheck {
    pub left: f64,
    pub right: f64,
    pub bound: f64,
}

impl WallCheck {
    pub fn holds(&self) -> bool {
        self.left.abs() <= self.bound && self.right.abs() <= self.bound
    }

    pub fn worst(&self) -> f64 {
        self.left.abs().max(self.right.abs())
    }
}

fn max_difference(v: &[f64], order: usize) -> f64 {
    let mut d = v.to_vec();
    for _ in 0..order {
        d = d.windows(2).map(|w| w[1] - w[0]).collect();
    }
    d.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn wall_check(v: &[f64], h: f64, k: usize) -> WallCheck {
    let n = v.len();
    let (left, right, c, m) = match k {
        1 => (
            (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
            (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h),
            1.0 / 3.0,
            3,
        ),
        2 => (
            (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h),
            (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h),
            11.0 / 12.0,
            4,
        ),
        3 => {
            let s = |a: f64, b: f64, c: f64, d: f64, e: f64| (-5.0 * a + 18.0 * b - 24.0 * c + 14.0 * d - 3.0 * e) / (2.0 * h * h * h);
            (
                s(v[0], v[1], v[2], v[3], v[4]),
                -s(v[n - 1], v[n - 2], v[n - 3], v[n - 4], v[n - 5]),
                7.0 / 4.0,
                5,
            )
        }
        _ => panic!("wall_check supports derivative orders 1..=3"),
    };
    let scale = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let higher = max_difference(v, m) / h.powi(m as i32);
    let fp = 1e-9 * (1.0 + scale) / h.powi(k as i32 - 1);
    WallCheck { left, right, bound: 2.0 * c * h * h * higher + fp }
}
