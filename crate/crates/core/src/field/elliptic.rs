//! Second-order elliptic problem with a non-local zeroth-order term and a free constant.
//!
//! Unknowns are `phi` on every node of `Q` plus the scalar `kappa`:
//!
//! ```text
//! phi_11 + a2 phi_22 + a1 phi_1 - a0 (kappa + phi(Ls, y2)) = s      in Q
//! phi_1 - a3 (kappa + phi) = g1                                     at y1 = Ls
//! phi_1 = g2                                                        at y1 = L1
//! phi_2 = 0 at y2 = +-1,   phi(Ls, -1) = 0
//! ```
//!
//! Walls are handled by even reflection, the `y1` ends by second-order
//! one-sided differences, and the pinning condition is the extra row paired
//! with the extra unknown `kappa`.

use std::io::Write;

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diff::{dy1, wall_check};
use super::grid::GridQ;
use crate::coefficients::LinearCoefficients;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSolution {
    pub phi: Array2<f64>,
    pub kappa: f64,
    /// Max-norm residual of the assembled system, relative to `|A| |x| + |b|`.
    pub residual: f64,
}

/// Elliptic coefficient profiles on the `y1` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticCoefficients {
    pub a0: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub a3: f64,
}

impl From<&LinearCoefficients> for EllipticCoefficients {
    fn from(c: &LinearCoefficients) -> Self {
        EllipticCoefficients { a0: c.a0.clone(), a1: c.a1.clone(), a2: c.a2.clone(), a3: c.a3 }
    }
}

type Row = Vec<(usize, f64)>;

pub struct EllipticSolver {
    grid: GridQ,
    coeffs: EllipticCoefficients,
    rows: Vec<Row>,
    row_norm: f64,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for EllipticSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticSolver").field("n1", &self.grid.n1).field("n2", &self.grid.n2).finish()
    }
}

fn push(row: &mut Row, col: usize, v: f64) {
    match row.iter_mut().find(|(c, _)| *c == col) {
        Some(e) => e.1 += v,
        None => row.push((col, v)),
    }
}

impl EllipticSolver {
    pub fn new(grid: &GridQ, coeffs: EllipticCoefficients) -> Result<Self> {
        let n1 = grid.n1;
        for (name, v) in [("a0", &coeffs.a0), ("a1", &coeffs.a1), ("a2", &coeffs.a2)] {
            if v.len() != n1 {
                return Err(Error::Domain(format!("coefficient {name} has {} samples, grid has {n1}", v.len())));
            }
            if let Some((i, &x)) = v.iter().enumerate().find(|(_, x)| !(**x > 0.0 && x.is_finite())) {
                return Err(Error::CoefficientDegeneracy { name, value: x, y1: grid.y1[i] });
            }
        }
        if !(coeffs.a3 > 0.0) {
            return Err(Error::CoefficientDegeneracy { name: "a3", value: coeffs.a3, y1: grid.ls });
        }
        let rows = assemble(grid, &coeffs);
        let n = grid.len() + 1;
        let triplets: Vec<Triplet<usize, usize, f64>> = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| Triplet::new(r, c, v)))
            .collect();
        let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Solver(format!("sparse assembly failed: {e:?}")))?;
        let lu = matrix.sp_lu().map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
        let row_norm = rows.iter().map(|r| r.iter().map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        Ok(EllipticSolver { grid: grid.clone(), coeffs, rows, row_norm, lu })
    }

    pub fn from_linear(grid: &GridQ, coeffs: &LinearCoefficients) -> Result<Self> {
        if coeffs.y1.len() != grid.n1 || coeffs.y1.iter().zip(&grid.y1).any(|(a, b)| (a - b).abs() > 1e-14) {
            return Err(Error::Domain("coefficients were sampled on a different y1 grid".into()));
        }
        Self::new(grid, EllipticCoefficients::from(coeffs))
    }

    pub fn grid(&self) -> &GridQ {
        &self.grid
    }

    pub fn coefficients(&self) -> &EllipticCoefficients {
        &self.coeffs
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * self.grid.n2 + j
    }

    fn rhs(&self, source: &Array2<f64>, g1: &[f64], g2: &[f64]) -> Result<Vec<f64>> {
        let (n1, n2) = (self.grid.n1, self.grid.n2);
        if source.dim() != (n1, n2) || g1.len() != n2 || g2.len() != n2 {
            return Err(Error::Domain("elliptic data does not match the grid".into()));
        }
        let mut b = vec![0.0; n1 * n2 + 1];
        for j in 0..n2 {
            b[self.index(0, j)] = g1[j];
            b[self.index(n1 - 1, j)] = g2[j];
            for i in 1..n1 - 1 {
                b[self.index(i, j)] = source[[i, j]];
            }
        }
        Ok(b)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.par_iter().map(|row| row.iter().map(|&(c, v)| v * x[c]).sum()).collect()
    }

    /// Wall compatibility of the data: `g1' = g2' = 0` and `d_y2 s = 0` at `y2 = +-1`.
    pub fn check_compatibility(&self, source: &Array2<f64>, g1: &[f64], g2: &[f64]) -> Result<()> {
        let h2 = self.grid.h2;
        for (name, g) in [("g1", g1), ("g2", g2)] {
            let c = wall_check(g, h2, 1);
            if !c.holds() {
                return Err(Error::Compatibility(format!(
                    "{name}'(+-1) = ({:e}, {:e}) exceeds the truncation bound {:e}",
                    c.left, c.right, c.bound
                )));
            }
        }
        for i in 1..self.grid.n1 - 1 {
            let row = source.row(i).to_vec();
            let c = wall_check(&row, h2, 1);
            if !c.holds() {
                return Err(Error::Compatibility(format!(
                    "d_y2 of the source at y1 = {} is ({:e}, {:e}) on the walls, bound {:e}",
                    self.grid.y1[i], c.left, c.right, c.bound
                )));
            }
        }
        Ok(())
    }

    /// Solves with a pointwise source after checking wall compatibility.
    pub fn solve(&self, source: &Array2<f64>, g1: &[f64], g2: &[f64]) -> Result<PotentialSolution> {
        self.check_compatibility(source, g1, g2)?;
        self.solve_unchecked(source, g1, g2)
    }

    /// Solves with the source given in divergence form `s = d_y1 flux`.
    pub fn solve_flux(&self, flux: &Array2<f64>, g1: &[f64], g2: &[f64]) -> Result<PotentialSolution> {
        self.solve(&dy1(flux, self.grid.h1), g1, g2)
    }

    pub fn solve_unchecked(&self, source: &Array2<f64>, g1: &[f64], g2: &[f64]) -> Result<PotentialSolution> {
        let b = self.rhs(source, g1, g2)?;
        let n = b.len();
        let rhs = Col::<f64>::from_fn(n, |k| b[k]);
        let sol = self.lu.solve(&rhs);
        let mut x: Vec<f64> = (0..n).map(|k| sol[k]).collect();
        // one step of iterative refinement
        let ax = self.apply(&x);
        let r = Col::<f64>::from_fn(n, |k| b[k] - ax[k]);
        let d = self.lu.solve(&r);
        for (k, xk) in x.iter_mut().enumerate() {
            *xk += d[k];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("elliptic solve produced non-finite values".into()));
        }
        let residual = self.relative_residual(&x, &b);
        if !(residual <= 1e-11) {
            return Err(Error::Solver(format!("elliptic residual {residual:e} above 1e-11")));
        }
        let (n1, n2) = (self.grid.n1, self.grid.n2);
        let phi = Array2::from_shape_fn((n1, n2), |(i, j)| x[i * n2 + j]);
        Ok(PotentialSolution { phi, kappa: x[n1 * n2], residual })
    }

    fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.apply(x);
        let r = ax.iter().zip(b).fold(0.0_f64, |m, (a, bb)| m.max((a - bb).abs()));
        let xn = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let scale = self.row_norm * xn + bn;
        if scale == 0.0 {
            0.0
        } else {
            r / scale
        }
    }

    /// Residual of a candidate solution against the assembled system.
    pub fn residual(&self, sol: &PotentialSolution, source: &Array2<f64>, g1: &[f64], g2: &[f64]) -> Result<f64> {
        let b = self.rhs(source, g1, g2)?;
        let mut x: Vec<f64> = sol.phi.iter().copied().collect();
        x.push(sol.kappa);
        Ok(self.relative_residual(&x, &b))
    }

    /// Writes the assembled matrix as `row col value` lines.
    pub fn write_matrix(&self, mut out: impl Write) -> std::io::Result<()> {
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                writeln!(out, "{r} {c} {v:.16e}")?;
            }
        }
        Ok(())
    }
}

fn assemble(grid: &GridQ, a: &EllipticCoefficients) -> Vec<Row> {
    let (n1, n2, h1, h2) = (grid.n1, grid.n2, grid.h1, grid.h2);
    let kappa = n1 * n2;
    let idx = |i: usize, j: usize| i * n2 + j;
    let mut rows: Vec<Row> = (0..n1 * n2)
        .into_par_iter()
        .map(|r| {
            let (i, j) = (r / n2, r % n2);
            let mut row = Row::with_capacity(8);
            if i == 0 {
                push(&mut row, idx(0, j), -3.0 / (2.0 * h1) - a.a3);
                push(&mut row, idx(1, j), 4.0 / (2.0 * h1));
                push(&mut row, idx(2, j), -1.0 / (2.0 * h1));
                push(&mut row, kappa, -a.a3);
            } else if i == n1 - 1 {
                push(&mut row, idx(n1 - 1, j), 3.0 / (2.0 * h1));
                push(&mut row, idx(n1 - 2, j), -4.0 / (2.0 * h1));
                push(&mut row, idx(n1 - 3, j), 1.0 / (2.0 * h1));
            } else {
                let cy = a.a2[i] / (h2 * h2);
                let jm = if j == 0 { 1 } else { j - 1 };
                let jp = if j == n2 - 1 { n2 - 2 } else { j + 1 };
                push(&mut row, idx(i - 1, j), 1.0 / (h1 * h1) - a.a1[i] / (2.0 * h1));
                push(&mut row, idx(i + 1, j), 1.0 / (h1 * h1) + a.a1[i] / (2.0 * h1));
                push(&mut row, idx(i, j), -2.0 / (h1 * h1) - 2.0 * cy);
                push(&mut row, idx(i, jm), cy);
                push(&mut row, idx(i, jp), cy);
                push(&mut row, idx(0, j), -a.a0[i]);
                push(&mut row, kappa, -a.a0[i]);
            }
            row
        })
        .collect();
    rows.push(vec![(idx(0, 0), 1.0)]);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn coeffs(grid: &GridQ) -> EllipticCoefficients {
        let y = &grid.y1;
        EllipticCoefficients {
            a0: y.iter().map(|t| 0.4 + 0.1 * t).collect(),
            a1: y.iter().map(|t| 0.2 + t * t).collect(),
            a2: y.iter().map(|t| 1.5 + 0.3 * t).collect(),
            a3: 0.7,
        }
    }

    /// Data generated by substituting `phi*`, `kappa*` into the continuous problem.
    fn manufactured(grid: &GridQ, a: &EllipticCoefficients) -> (Array2<f64>, Vec<f64>, Vec<f64>, f64) {
        let ls = grid.ls;
        let kappa = 0.3;
        let src = Array2::from_shape_fn((grid.n1, grid.n2), |(i, j)| {
            let (y1, y2) = (grid.y1[i], grid.y2[j]);
            let c = (PI * (y2 + 1.0)).cos();
            let d = y1 - ls;
            2.0 * c - a.a2[i] * PI * PI * d * d * c + a.a1[i] * 2.0 * d * c - a.a0[i] * kappa
        });
        let g1: Vec<f64> = grid.y2.iter().map(|_| -a.a3 * kappa).collect();
        let g2: Vec<f64> = grid.y2.iter().map(|y2| 2.0 * (grid.l1 - ls) * (PI * (y2 + 1.0)).cos()).collect();
        (src, g1, g2, kappa)
    }

    fn error(n: usize) -> (f64, f64) {
        let grid = GridQ::new(0.5, 1.0, n, n).unwrap();
        let a = coeffs(&grid);
        let (s, g1, g2, kappa) = manufactured(&grid, &a);
        let solver = EllipticSolver::new(&grid, a).unwrap();
        let sol = solver.solve(&s, &g1, &g2).unwrap();
        let exact = grid.from_fn(|y1, y2| (y1 - 0.5).powi(2) * (PI * (y2 + 1.0)).cos());
        let e = (&sol.phi - &exact).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        (e, (sol.kappa - kappa).abs())
    }

    #[test]
    fn zero_data_zero_solution() {
        let grid = GridQ::new(0.5, 1.0, 9, 9).unwrap();
        let solver = EllipticSolver::new(&grid, coeffs(&grid)).unwrap();
        let sol = solver.solve(&grid.zeros(), &[0.0; 9], &[0.0; 9]).unwrap();
        assert!(sol.phi.iter().all(|v| *v == 0.0));
        assert_eq!(sol.kappa, 0.0);
    }

    #[test]
    fn manufactured_second_order() {
        let (e1, k1) = error(17);
        let (e2, k2) = error(33);
        let r = e1 / e2;
        let rk = k1 / k2;
        assert!((3.5..=4.5).contains(&r), "phi ratio {r}");
        assert!((3.5..=4.5).contains(&rk), "kappa ratio {rk}");
    }

    #[test]
    fn pinning_and_walls() {
        let grid = GridQ::new(0.5, 1.0, 17, 17).unwrap();
        let a = coeffs(&grid);
        let (s, g1, g2, _) = manufactured(&grid, &a);
        let sol = EllipticSolver::new(&grid, a).unwrap().solve(&s, &g1, &g2).unwrap();
        assert!(sol.phi[[0, 0]].abs() < 1e-14);
        assert!(sol.residual <= 1e-11);
    }

    #[test]
    fn non_local_coupling() {
        let grid = GridQ::new(0.5, 1.0, 17, 17).unwrap();
        let solver = EllipticSolver::new(&grid, coeffs(&grid)).unwrap();
        let mut g1 = vec![0.0; 17];
        g1[8] = -1.0;
        let sol = solver.solve_unchecked(&grid.zeros(), &g1, &[0.0; 17]).unwrap();
        assert!(sol.phi[[16, 0]].abs() > 1e-8);
        assert!(sol.kappa.abs() > 1e-8);
        // negative Robin data yields a nontrivial kappa + phi(Ls, .)
        let trace: f64 = (0..17).map(|j| (sol.kappa + sol.phi[[0, j]]).abs()).sum();
        assert!(trace > 1e-8);
    }

    #[test]
    fn incompatible_data_rejected() {
        let grid = GridQ::new(0.5, 1.0, 33, 33).unwrap();
        let solver = EllipticSolver::new(&grid, coeffs(&grid)).unwrap();
        let g1: Vec<f64> = grid.y2.clone();
        assert!(matches!(solver.solve(&grid.zeros(), &g1, &[0.0; 33]), Err(Error::Compatibility(_))));
    }

    #[test]
    fn matrix_dump_lists_every_row() {
        let grid = GridQ::new(0.5, 1.0, 9, 9).unwrap();
        let solver = EllipticSolver::new(&grid, coeffs(&grid)).unwrap();
        let mut buf = Vec::new();
        solver.write_matrix(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        assert!(last.starts_with("81 0 "));
    }
}
