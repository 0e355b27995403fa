//! Radial fields, weight profiles, the `H_σ` form and the mixed
//! biharmonic–Steklov system.
//!
//! Mode-`ℓ` fields are handled through the factorisation `u = r^ℓ v`, for
//! which `Δ_ℓ(r^ℓ v) = r^ℓ (v'' + (2ℓ + 1) v'/r)`. The fourth-order problem is
//! assembled in mixed form, `Δ_ℓ u = w`, `Δ_ℓ w = f`, so that the system is
//! conditioned like a second-order operator rather than its square.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::eigen;
use crate::error::{Error, Result};
use crate::grid::{mat_vec, RadialGrid};

/// Condition estimate above which a system is refused.
pub const CONDITION_GUARD: f64 = 1e13;

/// Distance to `σ*` below which a Steklov system is refused.
pub const SIGMA_GUARD: f64 = 1e-6;

/// Samples of a mode-`ℓ` radial function on a grid.
///
/// A field may carry its Laplacian as a companion (the second unknown of the
/// mixed solves). When present it is used wherever `Δu` is needed, which
/// avoids re-differentiating nodal data.
#[derive(Clone, Debug)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    mode: usize,
    values: Vec<f64>,
    laplacian: Option<Vec<f64>>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, mode: usize, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field values must be finite".into()));
        }
        Ok(RadialField {
            grid,
            mode,
            values,
            laplacian: None,
        })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, mode: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.sample(f);
        RadialField {
            grid,
            mode,
            values,
            laplacian: None,
        }
    }

    pub fn zeros(grid: Arc<RadialGrid>, mode: usize) -> Self {
        let n = grid.n();
        RadialField {
            grid,
            mode,
            values: vec![0.0; n],
            laplacian: Some(vec![0.0; n]),
        }
    }

    /// Attaches `Δ_ℓ u` sampled at the nodes.
    pub fn with_laplacian(mut self, laplacian: Vec<f64>) -> Result<Self> {
        self.grid.check_len(laplacian.len())?;
        self.laplacian = Some(laplacian);
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn has_laplacian(&self) -> bool {
        self.laplacian.is_some()
    }

    /// `Δ_ℓ u` at the nodes: the companion if attached, else by collocation.
    pub fn laplacian(&self) -> Vec<f64> {
        match &self.laplacian {
            Some(w) => w.clone(),
            None => mat_vec(&laplacian_matrix(&self.grid, self.mode), &self.values),
        }
    }

    pub fn derivative(&self) -> Vec<f64> {
        self.grid.derivative(&self.values)
    }

    /// `u'(1)` from the last row of the first-derivative matrix.
    pub fn boundary_slope(&self) -> f64 {
        self.grid.boundary_slope(&self.values)
    }

    pub fn boundary_value(&self) -> f64 {
        self.values[self.grid.boundary()]
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `α u`, scaling the companion as well.
    pub fn scaled(&self, alpha: f64) -> Self {
        RadialField {
            grid: self.grid.clone(),
            mode: self.mode,
            values: self.values.iter().map(|v| alpha * v).collect(),
            laplacian: self
                .laplacian
                .as_ref()
                .map(|w| w.iter().map(|x| alpha * x).collect()),
        }
    }

    pub fn same_space(&self, other: &RadialField) -> bool {
        self.mode == other.mode
            && (Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid)
    }

    pub(crate) fn require_same_space(&self, other: &RadialField) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Checks `u(1) = 0` up to `1e-12 · max(1, ‖u‖∞)`.
    pub(crate) fn require_boundary_zero(&self) -> Result<()> {
        let b = self.boundary_value();
        if b.abs() > 1e-12 * self.linf().max(1.0) {
            return Err(Error::BoundaryValue(b));
        }
        Ok(())
    }

    pub(crate) fn require_mode_zero(&self) -> Result<()> {
        if self.mode != 0 {
            return Err(Error::InvalidParameter(format!(
                "expected a mode-0 field, got mode {}",
                self.mode
            )));
        }
        Ok(())
    }
}

/// Mode-`ℓ` Laplacian `d²/dr² + (1/r) d/dr − ℓ²/r²` on the nodes.
pub fn laplacian_l(grid: &RadialGrid, mode: i64) -> Result<DMatrix<f64>> {
    if mode < 0 {
        return Err(Error::NegativeMode(mode));
    }
    Ok(laplacian_matrix(grid, mode as usize))
}

pub(crate) fn laplacian_matrix(grid: &RadialGrid, mode: usize) -> DMatrix<f64> {
    let l2 = (mode * mode) as f64;
    let mut m = grid.d2().clone();
    for (i, &r) in grid.nodes().iter().enumerate() {
        for j in 0..grid.n() {
            m[(i, j)] += grid.d1()[(i, j)] / r;
        }
        m[(i, i)] -= l2 / (r * r);
    }
    m
}

/// `Λ_ℓ = D2 + (2ℓ + 1) diag(1/r) D`, the Laplacian acting on `v` in `u = r^ℓ v`.
fn reduced_laplacian(grid: &RadialGrid, mode: usize) -> DMatrix<f64> {
    let c = (2 * mode + 1) as f64;
    let mut m = grid.d2().clone();
    for (i, &r) in grid.nodes().iter().enumerate() {
        for j in 0..grid.n() {
            m[(i, j)] += c * grid.d1()[(i, j)] / r;
        }
    }
    m
}

/// The quadratic form `(u, v)_σ = 2π∫Δu Δv r dr − 2π(1 − σ) u'(1) v'(1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HsigmaForm {
    pub sigma: f64,
}

pub fn hsigma_form(sigma: f64) -> HsigmaForm {
    HsigmaForm { sigma }
}

impl HsigmaForm {
    pub fn inner(&self, u: &RadialField, v: &RadialField) -> Result<f64> {
        u.require_same_space(v)?;
        u.require_boundary_zero()?;
        v.require_boundary_zero()?;
        let grid = u.grid();
        let lu = u.laplacian();
        let lv = v.laplacian();
        let prod: Vec<f64> = lu.iter().zip(&lv).map(|(a, b)| a * b).collect();
        Ok(grid.disk_integral(&prod)
            - 2.0 * PI * (1.0 - self.sigma) * u.boundary_slope() * v.boundary_slope())
    }

    pub fn norm_sq(&self, u: &RadialField) -> Result<f64> {
        self.inner(u, u)
    }
}

/// Full-Hessian seminorm `2π∫(u''² + (u'/r)²) r dr` of a mode-0 field.
pub fn hessian_seminorm(u: &RadialField) -> Result<f64> {
    u.require_mode_zero()?;
    let grid = u.grid();
    let du = u.derivative();
    let lap = u.laplacian();
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(du.iter().zip(&lap))
        .map(|(&r, (&d, &w))| {
            let radial = d / r;
            let second = w - radial;
            second * second + radial * radial
        })
        .collect();
    Ok(grid.disk_integral(&integrand))
}

/// Cubic Hermite table with Fritsch–Carlson monotone slopes.
///
/// Outside the tabulated range the end values are held constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    source: Option<String>,
    r: Vec<f64>,
    g: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    pub fn new(r: Vec<f64>, g: Vec<f64>, source: Option<String>) -> Result<Self> {
        if r.len() != g.len() || r.len() < 2 {
            return Err(Error::InvalidParameter(
                "a g table needs at least two (r, g) rows".into(),
            ));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) || r[0] < 0.0 || r[r.len() - 1] > 1.0 {
            return Err(Error::InvalidParameter(
                "g table radii must be strictly ascending in [0, 1]".into(),
            ));
        }
        let slopes = pchip_slopes(&r, &g);
        Ok(Table { source, r, g, slopes })
    }

    /// Parses whitespace-separated `r g` rows; `#` starts a comment.
    pub fn parse(text: &str, source: Option<String>) -> Result<Self> {
        let mut r = Vec::new();
        let mut g = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("g table line {}: bad number `{s}`", lineno + 1))
                })
            };
            if cols.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "g table line {}: expected two columns",
                    lineno + 1
                )));
            }
            r.push(parse(cols[0])?);
            g.push(parse(cols[1])?);
        }
        Table::new(r, g, source)
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return self.g[0];
        }
        if x >= self.r[n - 1] {
            return self.g[n - 1];
        }
        let k = self.r.partition_point(|&t| t <= x) - 1;
        let h = self.r[k + 1] - self.r[k];
        let t = (x - self.r[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.g[k] + h10 * h * self.slopes[k] + h01 * self.g[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    m[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn pchip_end(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// A radial coefficient function: the weight `g` or the linear source `d`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Const(f64),
    /// Coefficients `c0 + c1 r + c2 r² + …`.
    Poly(Vec<f64>),
    Table(Table),
}

impl Profile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Profile::Const(c) => *c,
            Profile::Poly(c) => c.iter().rev().fold(0.0, |acc, &a| acc * r + a),
            Profile::Table(t) => t.eval(r),
        }
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.sample(|r| self.eval(r))
    }

    /// The value when the profile is constant in `r`.
    pub fn constant(&self) -> Option<f64> {
        match self {
            Profile::Const(c) => Some(*c),
            Profile::Poly(c) if c.iter().skip(1).all(|&a| a == 0.0) => {
                Some(c.first().copied().unwrap_or(0.0))
            }
            _ => None,
        }
    }

    /// Checks `g > 0` on `(0, 1)` by dense sampling plus the grid nodes.
    pub fn check_positive(&self, grid: Option<&RadialGrid>) -> Result<()> {
        let dense = (1..1000).map(|k| k as f64 / 1000.0);
        let nodes = grid.map(|g| g.nodes().to_vec()).unwrap_or_default();
        for r in dense.chain(nodes) {
            let v = self.eval(r);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "g must be positive on (0, 1); g({r}) = {v}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Const(c) => write!(f, "const {c:.16e}"),
            Profile::Poly(cs) => {
                f.write_str("poly")?;
                for c in cs {
                    write!(f, " {c:.16e}")?;
                }
                Ok(())
            }
            Profile::Table(t) => write!(f, "table {}", t.source().unwrap_or("<inline>")),
        }
    }
}

/// Instance description for a nonlinear solve.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemParams {
    pub sigma: f64,
    pub p: f64,
    pub g: Profile,
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Optional linear source `d` (sublinear runs only): `F = g|u|^{p+1}/(p+1) + d u`.
    pub source: Option<Profile>,
}

impl ProblemParams {
    /// Defaults: `g ≡ 1`, `n = 96`, 200 iterations, and `tol` = 1e-10 for
    /// `p > 1` or 1e-8 for `p < 1` (where `|u|^{p+1}` is not smooth at `r = 1`
    /// and the discrete Nehari identity holds only to quadrature accuracy).
    pub fn new(sigma: f64, p: f64) -> Self {
        ProblemParams {
            sigma,
            p,
            g: Profile::Const(1.0),
            n: 96,
            tol: if p > 1.0 { 1e-10 } else { 1e-8 },
            max_iter: 200,
            source: None,
        }
    }

    pub fn with_g(mut self, g: Profile) -> Self {
        self.g = g;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_source(mut self, d: Profile) -> Self {
        self.source = Some(d);
        self
    }

    pub fn is_superlinear(&self) -> bool {
        self.p > 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() {
            return Err(Error::InvalidParameter("sigma must be finite".into()));
        }
        if !(self.p.is_finite() && self.p > 0.0 && self.p != 1.0) {
            return Err(Error::OutOfRange {
                name: "p",
                value: self.p,
                range: "(0, 1) ∪ (1, ∞)",
            });
        }
        if self.n < crate::grid::MIN_NODES {
            return Err(Error::GridTooSmall(self.n));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::OutOfRange {
                name: "tol",
                value: self.tol,
                range: "(0, ∞)",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if self.source.is_some() && self.is_superlinear() {
            return Err(Error::InvalidParameter(
                "the linear source term is only supported for p < 1".into(),
            ));
        }
        self.g.check_positive(None)
    }
}

/// Boundary conditions at `r = 1` (all with `u(1) = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// `Δu(1) = (1 − σ) u'(1)`.
    Steklov(f64),
    /// `Δu(1) = 0`, the Steklov condition at `σ = 1`.
    Navier,
    /// `u'(1) = 0`.
    Dirichlet,
}

impl Boundary {
    /// Parses `steklov`, `navier` or `dirichlet`; `sigma` is used by `steklov`.
    pub fn from_kind(kind: &str, sigma: f64) -> Result<Self> {
        match kind.trim() {
            "steklov" => Ok(Boundary::Steklov(sigma)),
            "navier" => Ok(Boundary::Navier),
            "dirichlet" => Ok(Boundary::Dirichlet),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary condition `{other}` (steklov|navier|dirichlet)"
            ))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Boundary::Steklov(_) => "steklov",
            Boundary::Navier => "navier",
            Boundary::Dirichlet => "dirichlet",
        }
    }

    /// The equivalent Steklov parameter, if any.
    pub fn sigma(&self) -> Option<f64> {
        match self {
            Boundary::Steklov(s) => Some(*s),
            Boundary::Navier => Some(1.0),
            Boundary::Dirichlet => None,
        }
    }
}

/// Residuals of a mixed pair `(u, w)` against the assembled rows.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SystemResiduals {
    /// `max |Δ_ℓ w − f|` over the interior collocation nodes.
    pub pde: f64,
    /// Same, relative to `max(1, ‖f‖∞)`.
    pub pde_relative: f64,
    /// `max |Δ_ℓ u − w|` over the interior collocation nodes.
    pub coupling: f64,
    /// Largest violation among the boundary and origin rows.
    pub bc: f64,
    /// Componentwise backward error of the interior rows,
    /// `max |r_i| / (Σ_j |Λ_ij x_j| + |b_i|)`.
    pub backward: f64,
}

/// Factorised mixed system for `Δ_ℓ² u = f` with a boundary condition.
///
/// Unknowns are `(v, z)` with `u = r^ℓ v`, `Δ_ℓ u = r^ℓ z`. Rows: `Λ_ℓ v = z`
/// and `Λ_ℓ z = f / r^ℓ` at the nodes strictly inside `(r_0, 1)`,
/// `v'(0) = z'(0) = 0` at the origin, `v(1) = 0`, and the boundary row.
#[derive(Debug)]
pub struct SteklovSystem {
    grid: Arc<RadialGrid>,
    mode: usize,
    boundary: Boundary,
    reduced: DMatrix<f64>,
    origin: Vec<f64>,
    row_scale: Vec<f64>,
    lu: LU<f64, Dyn, Dyn>,
    condition: f64,
    r_pow: Vec<f64>,
}

/// Factorised Steklov system `Δu(1) = (1 − σ) u'(1)` for mode `ℓ`.
pub fn steklov_system(grid: &Arc<RadialGrid>, sigma: f64, mode: usize) -> Result<SteklovSystem> {
    SteklovSystem::new(grid.clone(), mode, Boundary::Steklov(sigma))
}

impl SteklovSystem {
    pub fn new(grid: Arc<RadialGrid>, mode: usize, boundary: Boundary) -> Result<Self> {
        if let Boundary::Steklov(sigma) = boundary {
            check_definite(&grid, sigma, mode)?;
        }
        let n = grid.n();
        let reduced = reduced_laplacian(&grid, mode);
        let origin = grid.origin_row(1);
        let last = grid.boundary();
        let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for j in 0..n {
            a[(0, j)] = origin[j];
            a[(n, n + j)] = origin[j];
        }
        for i in 1..last {
            for j in 0..n {
                a[(i, j)] = reduced[(i, j)];
                a[(n + i, n + j)] = reduced[(i, j)];
            }
            a[(i, n + i)] = -1.0;
        }
        a[(last, last)] = 1.0;
        let bc = 2 * n - 1;
        match boundary {
            Boundary::Dirichlet => {
                for j in 0..n {
                    a[(bc, j)] = grid.d1()[(last, j)];
                }
            }
            Boundary::Steklov(_) | Boundary::Navier => {
                let sigma = boundary.sigma().unwrap_or(1.0);
                a[(bc, 2 * n - 1)] = 1.0;
                for j in 0..n {
                    a[(bc, j)] -= (1.0 - sigma) * grid.d1()[(last, j)];
                }
            }
        }
        let row_scale: Vec<f64> = (0..2 * n)
            .map(|i| 1.0 / a.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect();
        for (i, s) in row_scale.iter().enumerate() {
            a.row_mut(i).scale_mut(*s);
        }
        let sv = a.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smin.is_nan() || smin <= 0.0 {
            return Err(Error::Singular);
        }
        let condition = smax / smin;
        if condition > CONDITION_GUARD {
            return Err(Error::IllConditioned(condition));
        }
        let r_pow = grid.nodes().iter().map(|r| r.powi(mode as i32)).collect();
        Ok(SteklovSystem {
            grid,
            mode,
            boundary,
            reduced,
            origin,
            row_scale,
            lu: a.lu(),
            condition,
            r_pow,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// 2-norm condition number of the row-equilibrated matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Solves with homogeneous boundary data.
    pub fn solve(&self, rhs: &RadialField) -> Result<RadialField> {
        if rhs.mode() != self.mode || *rhs.grid().as_ref() != *self.grid {
            return Err(Error::GridMismatch);
        }
        self.solve_values(rhs.values(), 0.0)
    }

    /// Solves with right side `f` at the nodes and inhomogeneous boundary row
    /// value `beta` (`Δu(1) − (1 − σ)u'(1) = β`, or `u'(1) = β` for Dirichlet).
    pub fn solve_values(&self, rhs: &[f64], beta: f64) -> Result<RadialField> {
        self.grid.check_len(rhs.len())?;
        let n = self.grid.n();
        let mut b = DVector::<f64>::zeros(2 * n);
        for i in 1..self.grid.boundary() {
            b[n + i] = rhs[i] / self.r_pow[i];
        }
        b[2 * n - 1] = beta;
        for i in 0..2 * n {
            b[i] *= self.row_scale[i];
        }
        let x = self.lu.solve(&b).ok_or(Error::Singular)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        let u: Vec<f64> = (0..n).map(|i| self.r_pow[i] * x[i]).collect();
        let w: Vec<f64> = (0..n).map(|i| self.r_pow[i] * x[n + i]).collect();
        RadialField::new(self.grid.clone(), self.mode, u)?.with_laplacian(w)
    }

    /// Residuals of `u` (with its Laplacian) against right side `f`.
    pub fn residuals(&self, u: &RadialField, rhs: &[f64]) -> Result<SystemResiduals> {
        if u.mode() != self.mode || *u.grid().as_ref() != *self.grid {
            return Err(Error::GridMismatch);
        }
        self.grid.check_len(rhs.len())?;
        let last = self.grid.boundary();
        let v: Vec<f64> = u.values().iter().zip(&self.r_pow).map(|(a, p)| a / p).collect();
        let z: Vec<f64> = u.laplacian().iter().zip(&self.r_pow).map(|(a, p)| a / p).collect();
        let lv = mat_vec(&self.reduced, &v);
        let lz = mat_vec(&self.reduced, &z);
        let mut res = SystemResiduals::default();
        let fmax = rhs.iter().fold(0.0f64, |m, f| m.max(f.abs()));
        let magnitude = |i: usize, x: &[f64]| {
            self.reduced
                .row(i)
                .iter()
                .zip(x)
                .map(|(a, b)| (a * b).abs())
                .sum::<f64>()
        };
        for i in 1..last {
            let p = self.r_pow[i];
            let pde = (p * lz[i] - rhs[i]).abs();
            let coupling = (p * (lv[i] - z[i])).abs();
            res.pde = res.pde.max(pde);
            res.coupling = res.coupling.max(coupling);
            let scale_z = p * magnitude(i, &z) + rhs[i].abs();
            let scale_v = p * (magnitude(i, &v) + z[i].abs());
            for (r, s) in [(pde, scale_z), (coupling, scale_v)] {
                if s > 0.0 {
                    res.backward = res.backward.max(r / s);
                }
            }
        }
        res.pde_relative = res.pde / fmax.max(1.0);
        let dot = |row: &[f64], x: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let slope = dot(self.grid.d1().row(last).iter().copied().collect::<Vec<_>>().as_slice(), &v);
        let boundary_row = match self.boundary {
            Boundary::Dirichlet => slope,
            other => z[last] - (1.0 - other.sigma().unwrap_or(1.0)) * slope,
        };
        res.bc = [
            v[last],
            boundary_row,
            dot(&self.origin, &v),
            dot(&self.origin, &z),
        ]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
        Ok(res)
    }
}

/// Refuses `σ ≤ σ*_ℓ` and `σ` within [`SIGMA_GUARD`] of the threshold.
pub fn check_definite(grid: &RadialGrid, sigma: f64, mode: usize) -> Result<()> {
    let sigma_star = 1.0 - eigen::mode_eigenvalue(grid, mode)?;
    if (sigma - sigma_star).abs() < SIGMA_GUARD {
        return Err(Error::DegenerateSigma {
            sigma,
            sigma_star,
            guard: SIGMA_GUARD,
        });
    }
    if sigma <= sigma_star {
        return Err(Error::Indefinite {
            sigma,
            sigma_star,
            mode,
        });
    }
    Ok(())
}
