//! Linear solves and ground states.
//!
//! Superlinear exponents use the Nehari fixed point `u ← t*(v) v` with
//! `v = A⁻¹(g|u|^{p−1}u)`, where `A` is the factorised mixed system for the
//! chosen boundary condition. The map is homogeneous of degree zero, so the
//! ray direction is all that evolves. Sublinear exponents minimise `J_σ` by
//! gradient descent in the `H_σ` metric with Armijo backtracking; the gradient
//! is `u − A⁻¹(g|u|^{p−1}u + d)`.
//!
//! Both report as `pde_residual` the relative `H²` norm of that gradient,
//! `‖u − A⁻¹ f(u)‖_{H²} / ‖u‖_{H²}`, which vanishes exactly at discrete
//! critical points.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::energy::{energy, t_star_from, EnergyReport};
use crate::error::{Error, Result};
use crate::grid::{build_grid, RadialGrid, Scheme};
use crate::operators::{hsigma_form, Boundary, ProblemParams, RadialField, SteklovSystem};
use crate::verify::{self, Certificates};

/// Default seed for the random restart profile.
pub const DEFAULT_SEED: u64 = 20_240_611;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1.0 / 64.0;

/// Solves `Δ²u = rhs`, `u(1) = 0`, with the given boundary condition.
pub fn solve_linear(rhs: &RadialField, boundary: Boundary) -> Result<RadialField> {
    rhs.require_mode_zero()?;
    SteklovSystem::new(rhs.grid().clone(), 0, boundary)?.solve(rhs)
}

/// `ũ` with `−Δũ = |Δu|` and `ũ(1) = 0`.
pub fn superharmonic_companion(u: &RadialField) -> Result<RadialField> {
    u.require_mode_zero()?;
    u.require_boundary_zero()?;
    let grid = u.grid();
    let n = grid.n();
    let last = grid.boundary();
    let source: Vec<f64> = u.laplacian().iter().map(|w| -w.abs()).collect();
    let lap = crate::operators::laplacian_matrix(grid, 0);
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    for (j, x) in grid.origin_row(1).into_iter().enumerate() {
        a[(0, j)] = x;
    }
    for i in 1..last {
        a.row_mut(i).copy_from(&lap.row(i));
        b[i] = source[i];
    }
    a[(last, last)] = 1.0;
    for i in 0..n {
        let s = 1.0 / a.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        a.row_mut(i).scale_mut(s);
        b[i] *= s;
    }
    let x = a.lu().solve(&b).ok_or(Error::Singular)?;
    RadialField::new(grid.clone(), 0, x.iter().copied().collect())?.with_laplacian(source)
}

/// `‖u‖_{H²}² = 2π∫(u² + u'² + u''² + (u'/r)²) r dr`.
pub fn h2_norm(u: &RadialField) -> Result<f64> {
    u.require_mode_zero()?;
    let grid = u.grid();
    let du = u.derivative();
    let lap = u.laplacian();
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let radial = du[i] / r;
            let second = lap[i] - radial;
            u.values()[i].powi(2) + du[i].powi(2) + second * second + radial * radial
        })
        .collect();
    Ok(grid.disk_integral(&integrand).max(0.0).sqrt())
}

/// `‖u − v‖_{H²}` for fields on the same grid.
pub fn h2_distance(u: &RadialField, v: &RadialField) -> Result<f64> {
    u.require_same_space(v)?;
    h2_norm(&combine(1.0, u, -1.0, v))
}

/// `a u + b v`, companions included.
fn combine(a: f64, u: &RadialField, b: f64, v: &RadialField) -> RadialField {
    let values = u.values().iter().zip(v.values()).map(|(x, y)| a * x + b * y).collect();
    let lap = u
        .laplacian()
        .iter()
        .zip(v.laplacian())
        .map(|(x, y)| a * x + b * y)
        .collect();
    RadialField::new(u.grid().clone(), u.mode(), values)
        .and_then(|f| f.with_laplacian(lap))
        .expect("combination of finite fields on one grid")
}

/// Starting profile of a ground-state run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartProfile {
    Given,
    /// `(1 − r²)/4`, the first Steklov eigenfunction.
    Bowl,
    /// `1 − r⁴`.
    Quartic,
    /// `(1 − r²)(a₀ + a₁r² + a₂r⁴ + a₃r⁶)` with seeded `a_k ∈ [0.1, 1]`.
    Random,
}

impl fmt::Display for StartProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StartProfile::Given => "given",
            StartProfile::Bowl => "bowl",
            StartProfile::Quartic => "quartic",
            StartProfile::Random => "random",
        })
    }
}

/// Restart and seeding policy.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub seed: u64,
    /// Run the full restart set; otherwise only the first start.
    pub restarts: bool,
    pub init: Option<RadialField>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: DEFAULT_SEED,
            restarts: true,
            init: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub u: RadialField,
    pub report: EnergyReport,
    pub t_star_final: f64,
    /// Relative `H²` norm of `u − A⁻¹ f(u)`.
    pub pde_residual: f64,
    /// `max |Δ²u − f|` over interior nodes by direct collocation.
    pub collocation_residual: f64,
    pub bc_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub certificates: Certificates,
    pub h2_norm: f64,
    pub boundary: Boundary,
    pub start: StartProfile,
    pub seed: u64,
    /// Per-iteration relative `H²` increments.
    pub history: Vec<f64>,
}

/// Ground state for the Steklov condition with `params.sigma`.
pub fn ground_state(params: &ProblemParams, init: Option<&RadialField>) -> Result<GroundStateResult> {
    let options = SolveOptions {
        init: init.cloned(),
        ..SolveOptions::default()
    };
    ground_state_with(params, Boundary::Steklov(params.sigma), &options)
}

/// Ground state for an arbitrary boundary condition; `params.sigma` is
/// ignored unless `boundary` is Steklov.
pub fn ground_state_with(
    params: &ProblemParams,
    boundary: Boundary,
    options: &SolveOptions,
) -> Result<GroundStateResult> {
    params.validate()?;
    let grid = match &options.init {
        Some(u) => {
            u.require_mode_zero()?;
            if u.grid().n() != params.n {
                return Err(Error::GridMismatch);
            }
            u.grid().clone()
        }
        None => Arc::new(build_grid(params.n, Scheme::default())?),
    };
    params.g.check_positive(Some(&grid))?;
    let system = SteklovSystem::new(grid.clone(), 0, boundary)?;

    let mut starts = Vec::new();
    if let Some(u) = &options.init {
        starts.push((StartProfile::Given, u.clone()));
    }
    if options.init.is_none() || options.restarts {
        starts.push((
            StartProfile::Bowl,
            RadialField::from_fn(grid.clone(), 0, |r| (1.0 - r * r) / 4.0),
        ));
    }
    if options.restarts {
        starts.push((
            StartProfile::Quartic,
            RadialField::from_fn(grid.clone(), 0, |r| 1.0 - r.powi(4)),
        ));
        starts.push((StartProfile::Random, random_profile(&grid, options.seed)));
    }

    let runs: Vec<Result<GroundStateResult>> = starts
        .into_par_iter()
        .map(|(label, u0)| {
            let mut run = Run::new(params, boundary, &system)?.iterate(u0)?;
            run.start = label;
            run.seed = options.seed;
            Ok(run)
        })
        .collect();

    let mut best: Option<GroundStateResult> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (r.converged && !b.converged)
                            || (r.converged == b.converged && r.report.j_value < b.report.j_value)
                    }
                };
                if better {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::Singular))
}

fn random_profile(grid: &Arc<RadialGrid>, seed: u64) -> RadialField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
    RadialField::from_fn(grid.clone(), 0, move |r| {
        let s = r * r;
        (1.0 - s) * coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    })
}

struct Run<'a> {
    params: &'a ProblemParams,
    boundary: Boundary,
    system: &'a SteklovSystem,
    /// `σ` used in the energy; the Dirichlet and Navier forms coincide at 1.
    energy_params: ProblemParams,
    g: Vec<f64>,
    d: Option<Vec<f64>>,
}

impl<'a> Run<'a> {
    fn new(params: &'a ProblemParams, boundary: Boundary, system: &'a SteklovSystem) -> Result<Self> {
        let grid = system.grid();
        let mut energy_params = params.clone();
        energy_params.sigma = boundary.sigma().unwrap_or(1.0);
        Ok(Run {
            params,
            boundary,
            system,
            energy_params,
            g: params.g.sample(grid),
            d: params.source.as_ref().map(|d| d.sample(grid)),
        })
    }

    fn forcing(&self, u: &RadialField) -> Vec<f64> {
        let p = self.params.p;
        let mut f: Vec<f64> = u
            .values()
            .iter()
            .zip(&self.g)
            .map(|(&v, &g)| g * v.signum() * v.abs().powf(p))
            .collect();
        if let Some(d) = &self.d {
            for (f, d) in f.iter_mut().zip(d) {
                *f += d;
            }
        }
        f
    }

    fn respond(&self, u: &RadialField) -> Result<RadialField> {
        self.system.solve_values(&self.forcing(u), 0.0)
    }

    fn energy(&self, u: &RadialField) -> Result<EnergyReport> {
        energy(u, &self.energy_params)
    }

    fn project(&self, v: RadialField) -> Result<RadialField> {
        if self.d.is_some() {
            return Ok(v);
        }
        let t = t_star_from(&self.energy(&v)?, self.params.p)?;
        Ok(v.scaled(t))
    }

    fn iterate(self, start: RadialField) -> Result<GroundStateResult> {
        if start.is_zero() {
            return Err(Error::ZeroField);
        }
        let mut u = self.project(self.respond(&start)?)?;
        let mut history = Vec::new();
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.params.max_iter {
            let y = self.respond(&u)?;
            let norm = h2_norm(&u)?;
            if norm == 0.0 {
                return Err(Error::ZeroField);
            }
            residual = h2_distance(&u, &y)? / norm;
            if residual < self.params.tol {
                converged = true;
                break;
            }
            iterations += 1;
            let next = if self.params.is_superlinear() {
                self.project(y)?
            } else {
                self.descend(&u, &y)?
            };
            history.push(h2_distance(&next, &u)? / h2_norm(&next)?.max(f64::MIN_POSITIVE));
            u = next;
        }
        self.finish(u, residual, iterations, converged, history)
    }

    /// One Armijo step along `−(u − y)`.
    ///
    /// The quadrature energy and the collocation gradient agree only up to
    /// discretisation error, so close to the discrete critical point no step
    /// may pass the Armijo test; the full step (the fixed-point map, a
    /// contraction with rate about `p`) is then taken.
    fn descend(&self, u: &RadialField, y: &RadialField) -> Result<RadialField> {
        let grad = combine(1.0, u, -1.0, y);
        let slope = hsigma_form(self.energy_params.sigma).norm_sq(&grad)?;
        let j0 = self.energy(u)?.j_value;
        let mut alpha = 1.0;
        while alpha >= MIN_STEP {
            let candidate = combine(1.0, u, -alpha, &grad);
            let j = self.energy(&candidate)?.j_value;
            if j <= j0 - ARMIJO_C * alpha * slope {
                return Ok(candidate);
            }
            alpha *= 0.5;
        }
        Ok(y.clone())
    }

    fn finish(
        self,
        u: RadialField,
        pde_residual: f64,
        iterations: usize,
        converged: bool,
        history: Vec<f64>,
    ) -> Result<GroundStateResult> {
        let report = self.energy(&u)?;
        let t_star_final = if self.d.is_none() {
            t_star_from(&report, self.params.p)?
        } else {
            1.0
        };
        let sys_res = self.system.residuals(&u, &self.forcing(&u))?;
        let nehari_ok = report.nehari_residual.abs() <= self.params.tol * report.hsigma_sq.abs();
        let certificates = certify(&u, self.boundary, self.params)?;
        Ok(GroundStateResult {
            h2_norm: h2_norm(&u)?,
            report,
            t_star_final,
            pde_residual,
            collocation_residual: sys_res.pde,
            bc_residual: sys_res.bc,
            iterations,
            converged: converged && nehari_ok,
            certificates,
            boundary: self.boundary,
            start: StartProfile::Given,
            seed: 0,
            history,
            u,
        })
    }
}

/// `‖u − A⁻¹f(u)‖_{H²} / ‖u‖_{H²}` for a mode-0 field under `boundary`.
pub fn gradient_residual(u: &RadialField, params: &ProblemParams, boundary: Boundary) -> Result<f64> {
    u.require_mode_zero()?;
    let system = SteklovSystem::new(u.grid().clone(), 0, boundary)?;
    let run = Run::new(params, boundary, &system)?;
    let y = run.respond(u)?;
    let norm = h2_norm(u)?;
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(h2_distance(u, &y)? / norm)
}

/// Certificate battery for a state computed under `boundary`.
pub fn certify(u: &RadialField, boundary: Boundary, params: &ProblemParams) -> Result<Certificates> {
    match boundary {
        Boundary::Dirichlet => {
            // the Steklov form of the Pohozaev identity degenerates; use its
            // σ → ∞ limit, −Δu(1)² = −((p+3)/(p+1))(1/π)∫ g|u|^{p+1}
            let mut c = verify::certify(u, 1.0, params.p, &params.g)?;
            c.lowerbound_margin = None;
            if let Some(k) = params.g.constant() {
                let grid = u.grid();
                let w1 = u.laplacian()[grid.boundary()];
                let powers: Vec<f64> = u.values().iter().map(|v| v.abs().powf(params.p + 1.0)).collect();
                let rhs = -((params.p + 3.0) / (params.p + 1.0)) * k * grid.disk_integral(&powers) / PI;
                c.pohozaev_residual = Some(-w1 * w1 - rhs);
            }
            Ok(c)
        }
        other => verify::certify(u, other.sigma().unwrap_or(1.0), params.p, &params.g),
    }
}

/// Optional reference states for distance columns.
#[derive(Clone, Debug, Default)]
pub struct References {
    pub navier: Option<RadialField>,
    pub dirichlet: Option<RadialField>,
}

/// One row of a σ sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub sigma: f64,
    pub p: f64,
    pub n: usize,
    pub energy: f64,
    pub hsigma_sq: f64,
    pub h2_norm: f64,
    pub linf_norm: f64,
    pub uprime1: f64,
    pub nehari_res: f64,
    pub pde_res: f64,
    pub pohozaev_res: f64,
    pub positive: bool,
    pub decreasing: bool,
    pub iters: usize,
    pub converged: bool,
    pub dist_navier: Option<f64>,
    pub dist_dirichlet: Option<f64>,
    /// Failure description for rows whose solve errored.
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(sigma: f64, params: &ProblemParams, err: &Error) -> Self {
        SweepRecord {
            sigma,
            p: params.p,
            n: params.n,
            energy: f64::NAN,
            hsigma_sq: f64::NAN,
            h2_norm: f64::NAN,
            linf_norm: f64::NAN,
            uprime1: f64::NAN,
            nehari_res: f64::NAN,
            pde_res: f64::NAN,
            pohozaev_res: f64::NAN,
            positive: false,
            decreasing: false,
            iters: 0,
            converged: false,
            dist_navier: None,
            dist_dirichlet: None,
            error: Some(err.to_string()),
        }
    }

    fn from_result(sigma: f64, params: &ProblemParams, r: &GroundStateResult, refs: &References) -> Self {
        let dist = |reference: &Option<RadialField>| {
            reference.as_ref().and_then(|v| h2_distance(&r.u, v).ok())
        };
        SweepRecord {
            sigma,
            p: params.p,
            n: params.n,
            energy: r.report.j_value,
            hsigma_sq: r.report.hsigma_sq,
            h2_norm: r.h2_norm,
            linf_norm: r.u.linf(),
            uprime1: r.u.boundary_slope(),
            nehari_res: r.report.nehari_residual,
            pde_res: r.pde_residual,
            pohozaev_res: r.certificates.pohozaev_residual.unwrap_or(f64::NAN),
            positive: r.certificates.positive(),
            decreasing: r.certificates.decreasing(),
            iters: r.iterations,
            converged: r.converged,
            dist_navier: dist(&refs.navier),
            dist_dirichlet: dist(&refs.dirichlet),
            error: None,
        }
    }
}

/// Ground states along `sigmas`; rows keep the input order.
pub fn sweep(
    sigmas: &[f64],
    template: &ProblemParams,
    refs: &References,
    options: &SolveOptions,
) -> Vec<SweepRecord> {
    sweep_states(sigmas, template, refs, options)
        .into_iter()
        .map(|(rec, _)| rec)
        .collect()
}

/// Like [`sweep`], also returning the computed states.
pub fn sweep_states(
    sigmas: &[f64],
    template: &ProblemParams,
    refs: &References,
    options: &SolveOptions,
) -> Vec<(SweepRecord, Option<GroundStateResult>)> {
    sigmas
        .par_iter()
        .map(|&sigma| {
            let mut params = template.clone();
            params.sigma = sigma;
            match ground_state_with(&params, Boundary::Steklov(sigma), options) {
                Ok(r) => (SweepRecord::from_result(sigma, &params, &r, refs), Some(r)),
                Err(e) => (SweepRecord::failed(sigma, &params, &e), None),
            }
        })
        .collect()
}
