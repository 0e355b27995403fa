//! The functional `J_σ`, its Nehari projection and the radial
//! determinant identity.
//!
//! For a mode-0 field with `u(1) = 0`:
//!
//! ```text
//! J_σ(u) = ½‖u‖²_σ − (2π/(p+1)) ∫ g|u|^{p+1} r dr − 2π ∫ d u r dr
//! ```
//!
//! where the last term is present only when a linear source `d` is configured.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::{hsigma_form, ProblemParams, RadialField};

/// Energy pieces of a field. All integrals are over the unit disk.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    pub j_value: f64,
    pub hsigma_sq: f64,
    /// `∫ g|u|^{p+1}`.
    pub nonlinear_term: f64,
    /// `2π u'(1)²`.
    pub boundary_term: f64,
    /// `J'_σ(u)[u]`.
    pub nehari_residual: f64,
    /// `‖u‖²_σ / (∫ g|u|^{p+1})^{2/(p+1)}`; zero for the zero field.
    pub rayleigh: f64,
    /// `∫ d u`, zero without a linear source.
    pub source_term: f64,
}

impl EnergyReport {
    /// `J_σ(t u)` from the pieces of `u` (pure power nonlinearity).
    pub fn ray_energy(&self, t: f64, p: f64) -> f64 {
        0.5 * t * t * self.hsigma_sq - t.powf(p + 1.0) * self.nonlinear_term / (p + 1.0)
            - t * self.source_term
    }
}

fn nonlinear_integral(u: &RadialField, params: &ProblemParams) -> f64 {
    let grid = u.grid();
    let g = params.g.sample(grid);
    let integrand: Vec<f64> = u
        .values()
        .iter()
        .zip(&g)
        .map(|(v, g)| g * v.abs().powf(params.p + 1.0))
        .collect();
    grid.disk_integral(&integrand)
}

fn source_integral(u: &RadialField, params: &ProblemParams) -> f64 {
    match &params.source {
        None => 0.0,
        Some(d) => {
            let grid = u.grid();
            let integrand: Vec<f64> = d
                .sample(grid)
                .iter()
                .zip(u.values())
                .map(|(d, v)| d * v)
                .collect();
            grid.disk_integral(&integrand)
        }
    }
}

pub fn energy(u: &RadialField, params: &ProblemParams) -> Result<EnergyReport> {
    u.require_mode_zero()?;
    u.require_boundary_zero()?;
    let hsigma_sq = hsigma_form(params.sigma).norm_sq(u)?;
    let nonlinear_term = nonlinear_integral(u, params);
    let source_term = source_integral(u, params);
    let slope = u.boundary_slope();
    let rayleigh = if nonlinear_term > 0.0 {
        hsigma_sq / nonlinear_term.powf(2.0 / (params.p + 1.0))
    } else {
        0.0
    };
    Ok(EnergyReport {
        j_value: 0.5 * hsigma_sq - nonlinear_term / (params.p + 1.0) - source_term,
        hsigma_sq,
        nonlinear_term,
        boundary_term: 2.0 * PI * slope * slope,
        nehari_residual: hsigma_sq - nonlinear_term - source_term,
        rayleigh,
        source_term,
    })
}

/// The scale `t* = (‖u‖²_σ / ∫g|u|^{p+1})^{1/(p−1)}` putting `t* u` on the
/// Nehari manifold.
pub fn t_star(u: &RadialField, params: &ProblemParams) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let report = energy(u, params)?;
    t_star_from(&report, params.p)
}

pub(crate) fn t_star_from(report: &EnergyReport, p: f64) -> Result<f64> {
    if report.hsigma_sq.is_nan() || report.hsigma_sq <= 0.0 {
        return Err(Error::NonPositiveForm(report.hsigma_sq));
    }
    if report.nonlinear_term.is_nan() || report.nonlinear_term <= 0.0 {
        return Err(Error::NonPositiveNonlinear(report.nonlinear_term));
    }
    Ok((report.hsigma_sq / report.nonlinear_term).powf(1.0 / (p - 1.0)))
}

/// Scale-invariant Rayleigh quotient.
pub fn rayleigh(u: &RadialField, params: &ProblemParams) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let report = energy(u, params)?;
    if report.nonlinear_term.is_nan() || report.nonlinear_term <= 0.0 {
        return Err(Error::NonPositiveNonlinear(report.nonlinear_term));
    }
    Ok(report.rayleigh)
}

/// Both sides of `∫_B det ∇²u = π u'(1)²` for a radial field, where
/// `det ∇²u = u'' u'/r`.
pub fn det_identity_check(u: &RadialField) -> Result<(f64, f64)> {
    u.require_mode_zero()?;
    u.require_boundary_zero()?;
    let grid = u.grid();
    let du = u.derivative();
    let lap = u.laplacian();
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(du.iter().zip(&lap))
        .map(|(&r, (&d, &w))| {
            let radial = d / r;
            (w - radial) * radial
        })
        .collect();
    let slope = u.boundary_slope();
    Ok((grid.disk_integral(&integrand), PI * slope * slope))
}
