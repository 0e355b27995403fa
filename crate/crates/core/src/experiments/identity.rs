//! Identity suite: grid-level checks of the determinant identity, the
//! `maxpr` identity, quadrature exactness and manufactured linear solves.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::energy::det_identity_check;
use crate::error::Result;
use crate::grid::{build_grid, RadialGrid, Scheme};
use crate::operators::{Boundary, RadialField};
use crate::solve::solve_linear;
use crate::verify::maxpr_identity;

/// Grids at least this fine use the tight tolerances.
pub const FINE_GRID: usize = 32;

/// Per-family tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityTolerances {
    pub det: f64,
    pub maxpr: f64,
    pub quadrature: f64,
    pub linear: f64,
}

impl IdentityTolerances {
    pub fn for_grid(n: usize) -> Self {
        if n >= FINE_GRID {
            IdentityTolerances {
                det: 1e-9,
                maxpr: 1e-9,
                quadrature: 1e-12,
                linear: 1e-9,
            }
        } else {
            // smooth non-polynomial fields are only resolved to a few digits
            IdentityTolerances {
                det: 1e-4,
                maxpr: 1e-4,
                quadrature: 1e-12,
                linear: 1e-9,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub n: usize,
    pub tolerances: IdentityTolerances,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }
}

type Smooth = (&'static str, fn(f64) -> f64);

/// Fields with `u(1) = 0` for the determinant identity.
const DET_FIELDS: [Smooth; 4] = [
    ("(1-r^2)/4", |r| (1.0 - r * r) / 4.0),
    ("(1-r^2)^2", |r| (1.0 - r * r).powi(2)),
    ("r^2(1-r^2)", |r| r * r * (1.0 - r * r)),
    ("exp(-r^2)-exp(-1)", |r| (-r * r).exp() - (-1.0f64).exp()),
];

const MAXPR_FIELDS: [Smooth; 4] = [
    ("r^2", |r| r * r),
    ("1-r^2", |r| 1.0 - r * r),
    ("cos(r)", f64::cos),
    ("const", |_| 3.0),
];

pub fn identity_suite(n: usize) -> Result<IdentityReport> {
    let grid = Arc::new(build_grid(n, Scheme::default())?);
    let tolerances = IdentityTolerances::for_grid(n);
    let mut checks = Vec::new();
    let mut push = |name: String, residual: f64, tolerance: f64| {
        checks.push(IdentityCheck {
            name,
            residual,
            tolerance,
        })
    };

    for (name, f) in DET_FIELDS {
        let u = RadialField::from_fn(grid.clone(), 0, f);
        let (lhs, rhs) = det_identity_check(&u)?;
        push(format!("det-hessian {name}"), (lhs - rhs).abs(), tolerances.det);
    }

    for (name, f) in MAXPR_FIELDS {
        for t in [0.5, 1.0] {
            let h = RadialField::from_fn(grid.clone(), 0, f);
            let (lhs, rhs) = maxpr_identity(&h, t)?;
            push(format!("maxpr {name} t={t}"), (lhs - rhs).abs(), tolerances.maxpr);
        }
    }

    push(
        format!("quadrature r^k, k <= {}", grid.exactness_degree()),
        quadrature_error(&grid),
        tolerances.quadrature,
    );

    let one = RadialField::from_fn(grid.clone(), 0, |_| 1.0);
    for sigma in [-0.5, 0.0, 0.5, 1.0, 5.0] {
        let u = solve_linear(&one, Boundary::Steklov(sigma))?;
        let b = -(3.0 + sigma) / (32.0 * (1.0 + sigma));
        let c = -1.0 / 64.0 - b;
        let exact = grid.sample(|r| r.powi(4) / 64.0 + b * r * r + c);
        push(
            format!("linear rhs=1 sigma={sigma}"),
            max_dev(u.values(), &exact),
            tolerances.linear,
        );
    }
    let u = solve_linear(&RadialField::from_fn(grid.clone(), 0, |_| 64.0), Boundary::Dirichlet)?;
    let exact = grid.sample(|r| (1.0 - r * r).powi(2));
    push(
        "linear rhs=64 dirichlet".into(),
        max_dev(u.values(), &exact),
        tolerances.linear,
    );

    Ok(IdentityReport {
        n,
        tolerances,
        checks,
    })
}

/// `max_k |2π Σ wᵢ rᵢ^k − 2π/(k+2)|` up to the exactness degree.
fn quadrature_error(grid: &RadialGrid) -> f64 {
    (0..=grid.exactness_degree())
        .map(|k| {
            let s = grid.sample(|r| r.powi(k as i32));
            (grid.disk_integral(&s) - 2.0 * PI / (k as f64 + 2.0)).abs()
        })
        .fold(0.0, f64::max)
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
