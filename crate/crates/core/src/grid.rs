//! Radial collocation grids on (0, 1].
//!
//! The default scheme places the nodes of the Gauss–Radau rule for the disk
//! measure `r dr` on `[0, 1]`: the fixed node sits at `r = 1` and the `n - 1`
//! free nodes are the zeros of the Jacobi polynomial `P^(1,1)_{n-1}` mapped
//! from `[-1, 1]`. The origin is never a node; regularity there is imposed by
//! explicit rows built from [`RadialGrid::origin_row`].
//!
//! Quadrature: `sum_i w_i f(r_i) = int_0^1 f(r) r dr` exactly for every
//! polynomial `f` of degree `<= 2n - 2` (see [`RadialGrid::exactness_degree`]).
//! Differentiation: the barycentric matrices are exact on polynomials of
//! degree `<= n - 1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 8;

/// Node family of a [`RadialGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Gauss–Radau nodes for the weight `r` on `[0, 1]`, `r = 1` included.
    #[default]
    GaussRadau,
}

impl Scheme {
    pub fn id(&self) -> &'static str {
        match self {
            Scheme::GaussRadau => "gauss-radau",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gauss-radau" | "default" => Ok(Scheme::GaussRadau),
            other => Err(Error::UnknownScheme(other.to_string())),
        }
    }
}

/// Collocation nodes, quadrature weights and differentiation matrices.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    n: usize,
    scheme: Scheme,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.scheme == other.scheme && self.nodes == other.nodes
    }
}

/// Builds the grid for `n` nodes of the given scheme.
pub fn build_grid(n: usize, scheme: Scheme) -> Result<RadialGrid> {
    RadialGrid::new(n, scheme)
}

/// Differentiation matrix of order 1 or 2 acting on nodal values.
pub fn diff_op(grid: &RadialGrid, order: usize) -> Result<&DMatrix<f64>> {
    match order {
        1 => Ok(&grid.d1),
        2 => Ok(&grid.d2),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Disk integral `2π Σ w_i s_i` of a radial function sampled at the nodes.
pub fn quad(grid: &RadialGrid, samples: &[f64]) -> Result<f64> {
    grid.check_len(samples.len())?;
    Ok(grid.disk_integral(samples))
}

impl RadialGrid {
    pub fn new(n: usize, scheme: Scheme) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::GridTooSmall(n));
        }
        let nodes = match scheme {
            Scheme::GaussRadau => radau_nodes(n),
        };
        let bary = barycentric_weights(&nodes);
        let (d1, d2) = differentiation_matrices(&nodes, &bary);
        let mut grid = RadialGrid {
            n,
            scheme,
            nodes,
            weights: Vec::new(),
            bary,
            d1,
            d2,
        };
        grid.weights = grid.interpolatory_weights();
        Ok(grid)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights of the rule for `∫_0^1 f(r) r dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest polynomial degree of `f` for which `∫_0^1 f r dr` is exact.
    pub fn exactness_degree(&self) -> usize {
        2 * self.n - 2
    }

    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }

    /// Index of the boundary node `r = 1`.
    pub fn boundary(&self) -> usize {
        self.n - 1
    }

    /// `∫_0^1 f r dr` by the grid rule.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        self.weights.iter().zip(samples).map(|(w, s)| w * s).sum()
    }

    pub(crate) fn disk_integral(&self, samples: &[f64]) -> f64 {
        2.0 * PI * self.integrate(samples)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    /// Applies the first-derivative matrix.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        mat_vec(&self.d1, values)
    }

    pub fn second_derivative(&self, values: &[f64]) -> Vec<f64> {
        mat_vec(&self.d2, values)
    }

    /// `u'(1)` from the last row of the differentiation matrix.
    pub fn boundary_slope(&self, values: &[f64]) -> f64 {
        let last = self.boundary();
        self.d1.row(last).iter().zip(values).map(|(d, v)| d * v).sum()
    }

    /// Row functionals `(value, first derivative)` of the interpolant at `x`.
    pub fn eval_rows(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        if let Some(k) = self.nodes.iter().position(|&r| r == x) {
            let mut value = vec![0.0; self.n];
            value[k] = 1.0;
            let slope = self.d1.row(k).iter().copied().collect();
            return (value, slope);
        }
        // s(x) = Σ λ_k/(x - x_k); ℓ_j = (λ_j/(x - x_j)) / s
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.bary)
            .map(|(&r, &l)| l / (x - r))
            .collect();
        let s: f64 = terms.iter().sum();
        let ds: f64 = -self
            .nodes
            .iter()
            .zip(&terms)
            .map(|(&r, &t)| t / (x - r))
            .sum::<f64>();
        let value = terms.iter().map(|t| t / s).collect();
        let slope = self
            .nodes
            .iter()
            .zip(&terms)
            .map(|(&r, &t)| (-t / (x - r) * s - t * ds) / (s * s))
            .collect();
        (value, slope)
    }

    /// Row functional for `u(0)` (order 0) or `u'(0)` (order 1).
    pub fn origin_row(&self, order: usize) -> Vec<f64> {
        let (value, slope) = self.eval_rows(0.0);
        if order == 0 {
            value
        } else {
            slope
        }
    }

    /// Interpolation matrix from nodal values to `points`.
    pub fn interpolation_matrix(&self, points: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.n);
        for (q, &x) in points.iter().enumerate() {
            let (value, _) = self.eval_rows(x);
            for (j, v) in value.into_iter().enumerate() {
                m[(q, j)] = v;
            }
        }
        m
    }

    fn interpolatory_weights(&self) -> Vec<f64> {
        let (points, gl) = gauss_legendre_unit(self.n + 1);
        let interp = self.interpolation_matrix(&points);
        (0..self.n)
            .map(|j| {
                points
                    .iter()
                    .zip(&gl)
                    .enumerate()
                    .map(|(q, (&y, &w))| w * y * interp[(q, j)])
                    .sum()
            })
            .collect()
    }
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Free Radau nodes are the zeros of the Gegenbauer polynomial `C^(3/2)_{n-1}`
/// (proportional to `P^(1,1)_{n-1}`), mapped to `r = (1 + x)/2`.
fn radau_nodes(n: usize) -> Vec<f64> {
    let m = n - 1;
    // monic recurrence: β_k = k(k+2) / ((2k+1)(2k+3))
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let beta = kf * (kf + 2.0) / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0));
        jacobi[(k, k - 1)] = beta.sqrt();
        jacobi[(k - 1, k)] = beta.sqrt();
    }
    let mut xs: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    for x in xs.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = gegenbauer_three_halves(m, *x);
            *x -= p / dp;
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut nodes: Vec<f64> = xs.into_iter().map(|x| 0.5 * (1.0 + x)).collect();
    nodes.push(1.0);
    nodes
}

fn gegenbauer_three_halves(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, 3.0 * x);
    let (mut d0, mut d1) = (0.0, 3.0);
    if m == 0 {
        return (p0, d0);
    }
    for k in 1..m {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 3.0) * x * p1 - (kf + 2.0) * p0) / (kf + 1.0);
        let d2 = ((2.0 * kf + 3.0) * (p1 + x * d1) - (kf + 2.0) * d0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        // Tricomi initial guess, then Newton
        let mut x = -((PI * (i as f64 + 0.75)) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                let (_, d) = legendre(m, x);
                dp = d;
                break;
            }
        }
        nodes.push(0.5 * (1.0 + x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..m {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    // log-magnitudes; the factor 4 is the inverse capacity of [0, 1]
    let logs: Vec<(f64, f64)> = nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let mut log = 0.0;
            let mut sign = 1.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j {
                    let d = 4.0 * (xj - xk);
                    log -= d.abs().ln();
                    if d < 0.0 {
                        sign = -sign;
                    }
                }
            }
            (log, sign)
        })
        .collect();
    let max = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
    logs.into_iter().map(|(l, s)| s * (l - max).exp()).collect()
}

fn differentiation_matrices(nodes: &[f64], bary: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = nodes.len();
    let mut d1 = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d1[(i, j)] = v;
                diag -= v;
            }
        }
        d1[(i, i)] = diag;
    }
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = 2.0 * d1[(i, j)] * (d1[(i, i)] - 1.0 / (nodes[i] - nodes[j]));
                d2[(i, j)] = v;
                diag -= v;
            }
        }
        d2[(i, i)] = diag;
    }
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_small_grids_and_unknown_schemes() {
        assert!(matches!(build_grid(7, Scheme::GaussRadau), Err(Error::GridTooSmall(7))));
        assert!(matches!("chebyshev".parse::<Scheme>(), Err(Error::UnknownScheme(_))));
        assert_eq!("default".parse::<Scheme>().unwrap(), Scheme::GaussRadau);
    }

    #[test]
    fn boundary_node_is_exactly_one() {
        let g = build_grid(8, Scheme::GaussRadau).unwrap();
        assert_eq!(g.nodes()[7], 1.0);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes()[0] > 0.0);
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn disk_area_and_monomials() {
        let g = build_grid(64, Scheme::GaussRadau).unwrap();
        let one = vec![1.0; 64];
        assert!((quad(&g, &one).unwrap() - PI).abs() < 1e-12);
        let r3 = g.sample(|r| r.powi(3));
        assert!((g.integrate(&r3) - 0.2).abs() < 1e-12);
        let bowl = g.sample(|r| 1.0 - r * r);
        assert!((quad(&g, &bowl).unwrap() - PI / 2.0).abs() < 1e-12);
        assert_eq!(quad(&g, &vec![0.0; 64]).unwrap(), 0.0);
        assert!(matches!(quad(&g, &[1.0; 3]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn derivative_examples() {
        // rounding in the rows nearest the origin grows quickly with n; the
        // exactness examples are checked at a moderate size
        let g = build_grid(16, Scheme::GaussRadau).unwrap();
        let d = g.derivative(&g.sample(|r| r * r));
        assert!(max_err(&d, &g.sample(|r| 2.0 * r)) < 1e-12);
        let c = g.derivative(&[3.5; 16]);
        assert!(c.iter().all(|v| v.abs() < 1e-10));
        let d2 = g.second_derivative(&g.sample(|r| r.powi(4)));
        assert!(max_err(&d2, &g.sample(|r| 12.0 * r * r)) < 1e-10);
        assert!(matches!(diff_op(&g, 3), Err(Error::UnsupportedOrder(3))));
        assert!(diff_op(&g, 1).is_ok() && diff_op(&g, 2).is_ok());
    }

    #[test]
    fn first_derivative_twice_matches_second() {
        for n in [8, 16, 24] {
            let g = build_grid(n, Scheme::GaussRadau).unwrap();
            for k in 0..n as i32 {
                let u = g.sample(|r| r.powi(k));
                let dd = g.derivative(&g.derivative(&u));
                assert!(max_err(&dd, &g.second_derivative(&u)) < 1e-9, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn quadrature_exact_to_documented_degree() {
        for n in [8, 32, 64] {
            let g = build_grid(n, Scheme::GaussRadau).unwrap();
            for k in 0..=g.exactness_degree() as i32 {
                let got = g.integrate(&g.sample(|r| r.powi(k)));
                assert!((got - 1.0 / (k as f64 + 2.0)).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn origin_rows_evaluate_interpolant() {
        let g = build_grid(24, Scheme::GaussRadau).unwrap();
        let u = g.sample(|r| 2.0 + 3.0 * r - r * r * r);
        let (value, slope) = g.eval_rows(0.0);
        let at0: f64 = value.iter().zip(&u).map(|(a, b)| a * b).sum();
        let d0: f64 = slope.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!((at0 - 2.0).abs() < 1e-12);
        assert!((d0 - 3.0).abs() < 1e-10);
    }

    #[test]
    fn deterministic_construction() {
        let a = build_grid(40, Scheme::GaussRadau).unwrap();
        let b = build_grid(40, Scheme::GaussRadau).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.weights(), b.weights());
        assert_eq!(a.d2(), b.d2());
    }
}
