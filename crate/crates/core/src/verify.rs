//! Certificates for computed states: sign, superharmonicity, radial decay,
//! the radial Pohozaev identity, the `maxpr` identity and the lower bound
//! `‖u‖_{p+1}^{p+1} ≥ K(σ, p) ‖Δ²u‖₁²`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::gauss_legendre_unit;
use crate::operators::{Profile, RadialField};

/// Relative positivity tolerance: `u > POSITIVITY_REL · ‖u‖∞`.
pub const POSITIVITY_REL: f64 = 1e-10;
/// Relative tolerance for the derivative-based certificates.
pub const DERIVATIVE_REL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Positivity {
    pub positive: bool,
    pub min_interior: f64,
    pub witness: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Superharmonicity {
    pub superharmonic: bool,
    /// `min(−Δu)` over all nodes.
    pub min_neg_laplacian: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decay {
    pub decreasing: bool,
    /// `max u'` over the nodes.
    pub max_slope: f64,
}

/// Tolerances a certificate block was computed with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub positivity: f64,
    pub superharmonic: f64,
    pub decay: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificates {
    pub positivity: Positivity,
    pub superharmonicity: Superharmonicity,
    pub decay: Decay,
    /// Present when `g` is constant.
    pub pohozaev_residual: Option<f64>,
    /// Present when `g ≡ 1` and `σ ∈ (−1, 1)`.
    pub lowerbound_margin: Option<f64>,
    pub linf: f64,
    pub tolerances: Tolerances,
}

impl Certificates {
    pub fn positive(&self) -> bool {
        self.positivity.positive
    }

    pub fn superharmonic(&self) -> bool {
        self.superharmonicity.superharmonic
    }

    pub fn decreasing(&self) -> bool {
        self.decay.decreasing
    }
}

/// `u > tol` at every node except `r = 1`; the witness is the arg-min.
pub fn positivity(u: &RadialField, tol: f64) -> Positivity {
    let interior = &u.values()[..u.grid().boundary()];
    let (witness, min_interior) = interior
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    Positivity {
        positive: min_interior > tol,
        min_interior,
        witness,
    }
}

/// `−Δu ≥ −tol` at every node.
pub fn superharmonicity(u: &RadialField, tol: f64) -> Superharmonicity {
    let min_neg_laplacian = u.laplacian().iter().fold(f64::INFINITY, |m, w| m.min(-w));
    Superharmonicity {
        superharmonic: min_neg_laplacian >= -tol,
        min_neg_laplacian,
    }
}

/// `u'(r_0) < tol` at the node nearest the origin and `u' < −tol` beyond it.
pub fn radial_decay(u: &RadialField, tol: f64) -> Decay {
    let du = u.derivative();
    let max_slope = du.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d));
    let decreasing = u.mode() == 0 && du[0] < tol && du[1..].iter().all(|&d| d < -tol);
    Decay {
        decreasing,
        max_slope,
    }
}

/// `lhs − rhs` of
/// `2(Δu)'(1)u'(1) + (1 − σ)(1 + σ)u'(1)² = −((p+3)/(p+1)) (1/π) ∫_B g|u|^{p+1}`
/// for a constant weight `g`.
pub fn pohozaev_residual(u: &RadialField, sigma: f64, p: f64, g: &Profile) -> Result<f64> {
    let c = g.constant().ok_or(Error::NonConstantWeight)?;
    u.require_mode_zero()?;
    u.require_boundary_zero()?;
    let grid = u.grid();
    let slope = u.boundary_slope();
    let w_slope = grid.boundary_slope(&u.laplacian());
    let powers: Vec<f64> = u.values().iter().map(|v| v.abs().powf(p + 1.0)).collect();
    let integral = c * grid.disk_integral(&powers);
    let lhs = 2.0 * w_slope * slope + (1.0 - sigma) * (1.0 + sigma) * slope * slope;
    let rhs = -((p + 3.0) / (p + 1.0)) * integral / PI;
    Ok(lhs - rhs)
}

/// Both sides of `t h'(t) = ∫_0^t s Δh(s) ds` for a mode-0 field.
pub fn maxpr_identity(h: &RadialField, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "(0, 1]",
        });
    }
    h.require_mode_zero()?;
    let grid = h.grid();
    let (_, slope_row) = grid.eval_rows(t);
    let slope: f64 = slope_row.iter().zip(h.values()).map(|(a, b)| a * b).sum();
    let lap = h.laplacian();
    let (y, w) = gauss_legendre_unit(grid.n());
    let points: Vec<f64> = y.iter().map(|y| t * y).collect();
    let interp = grid.interpolation_matrix(&points);
    let mut integral = 0.0;
    for (q, (&s, &wq)) in points.iter().zip(&w).enumerate() {
        let value: f64 = interp.row(q).iter().zip(&lap).map(|(a, b)| a * b).sum();
        integral += wq * t * s * value;
    }
    Ok((t * slope, integral))
}

/// `‖u‖_{p+1}^{p+1} − K ‖Δ²u‖₁²` with
/// `K = (3/64)(1 − (3/64)(1 − σ)) (1/(π(1 + σ))) (p+1)/(p+3)` and
/// `‖Δ²u‖₁ = ∫_B u^p` (the equation, `g ≡ 1`).
pub fn lowerbound_check(u: &RadialField, sigma: f64, p: f64) -> Result<f64> {
    if !(sigma > -1.0 && sigma < 1.0) {
        return Err(Error::OutOfRange {
            name: "sigma",
            value: sigma,
            range: "(-1, 1)",
        });
    }
    u.require_mode_zero()?;
    let grid = u.grid();
    let lp1: Vec<f64> = u.values().iter().map(|v| v.abs().powf(p + 1.0)).collect();
    let lp: Vec<f64> = u.values().iter().map(|v| v.abs().powf(p)).collect();
    let lhs = grid.disk_integral(&lp1);
    let a = grid.disk_integral(&lp);
    let k = (3.0 / 64.0) * (1.0 - (3.0 / 64.0) * (1.0 - sigma)) / (PI * (1.0 + sigma))
        * (p + 1.0)
        / (p + 3.0);
    Ok(lhs - k * a * a)
}

/// Runs the full battery with the default relative tolerances.
pub fn certify(u: &RadialField, sigma: f64, p: f64, g: &Profile) -> Result<Certificates> {
    let linf = u.linf();
    let lap_inf = u.laplacian().iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let slope_inf = u.derivative().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let tolerances = Tolerances {
        positivity: POSITIVITY_REL * linf,
        superharmonic: DERIVATIVE_REL * lap_inf,
        decay: DERIVATIVE_REL * slope_inf,
    };
    let pohozaev_residual = match g.constant() {
        Some(_) => Some(pohozaev_residual(u, sigma, p, g)?),
        None => None,
    };
    let lowerbound_margin = if g.constant() == Some(1.0) && sigma > -1.0 && sigma < 1.0 {
        Some(lowerbound_check(u, sigma, p)?)
    } else {
        None
    };
    Ok(Certificates {
        positivity: positivity(u, tolerances.positivity),
        superharmonicity: superharmonicity(u, tolerances.superharmonic),
        decay: radial_decay(u, tolerances.decay),
        pohozaev_residual,
        lowerbound_margin,
        linf,
        tolerances,
    })
}
