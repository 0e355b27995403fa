//! Steklov eigenvalues of the biharmonic operator on the disk.
//!
//! Each angular mode carries exactly one eigenvalue with `u'(1) ≠ 0`:
//!
//! ```text
//! δ_ℓ = min { ∫(Δ_ℓ u)² r dr : u(1) = 0, u'(1) = −1 }.
//! ```
//!
//! The minimisation is done over the grid interpolants `u = r^ℓ v`, with the
//! stiffness integral evaluated by an oversampled Gauss–Legendre rule (exact
//! for the polynomial integrand) and the constraints eliminated through an
//! orthonormal null-space basis.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{gauss_legendre_unit, mat_vec, RadialGrid};
use crate::operators::{Boundary, RadialField, SteklovSystem};

/// Highest mode scanned by [`sigma_star`].
pub const DEFAULT_MAX_MODE: usize = 8;

/// One Steklov eigenpair of a fixed angular mode.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub mode: usize,
    pub eigenvalue: f64,
    /// Normalised so that `u'(1) = −1`.
    pub eigenfunction: RadialField,
    /// `max(|δ − δ_DtN|, ‖u − u_DtN‖∞)` against an independent mixed solve of
    /// `Δ²u = 0`, `u(1) = 0`, `u'(1) = −1`, with `δ_DtN = Δu(1)/u'(1)`.
    pub residual: f64,
}

/// Eigenpairs of modes `mode, mode + 1, …, mode + count − 1`.
pub fn steklov_eigs(grid: &Arc<RadialGrid>, mode: usize, count: usize) -> Result<Vec<EigenResult>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    (mode..mode + count).map(|l| eigenpair(grid, l)).collect()
}

/// Mode-0 eigenpair; its eigenfunction is positive in the interior.
pub fn first_eigenfunction(grid: &Arc<RadialGrid>) -> Result<EigenResult> {
    eigenpair(grid, 0)
}

/// `1 − min_ℓ δ_ℓ` over `ℓ = 0..=DEFAULT_MAX_MODE`.
pub fn sigma_star(grid: &RadialGrid) -> Result<f64> {
    sigma_star_modes(grid, 0..=DEFAULT_MAX_MODE)
}

/// `1 − min δ_ℓ` over the given modes.
pub fn sigma_star_modes(
    grid: &RadialGrid,
    modes: impl IntoIterator<Item = usize>,
) -> Result<f64> {
    let mut best = f64::INFINITY;
    for l in modes {
        best = best.min(mode_eigenvalue(grid, l)?);
    }
    if !best.is_finite() {
        return Err(Error::InvalidParameter("no modes given".into()));
    }
    Ok(1.0 - best)
}

/// The mode-`ℓ` eigenvalue alone.
pub fn mode_eigenvalue(grid: &RadialGrid, mode: usize) -> Result<f64> {
    Ok(minimise(grid, mode)?.0)
}

fn eigenpair(grid: &Arc<RadialGrid>, mode: usize) -> Result<EigenResult> {
    let (eigenvalue, v) = minimise(grid, mode)?;
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&v)
        .map(|(r, v)| r.powi(mode as i32) * v)
        .collect();
    let eigenfunction = RadialField::new(grid.clone(), mode, values)?;
    let check = SteklovSystem::new(grid.clone(), mode, Boundary::Dirichlet)?
        .solve_values(&vec![0.0; grid.n()], -1.0)?;
    let dtn = check.laplacian()[grid.boundary()] / -1.0;
    let deviation = eigenfunction
        .values()
        .iter()
        .zip(check.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let eigenfunction = eigenfunction.with_laplacian(check.laplacian())?;
    Ok(EigenResult {
        mode,
        eigenvalue,
        eigenfunction,
        residual: deviation.max((eigenvalue - dtn).abs()),
    })
}

/// Returns `(δ_ℓ, v)` with `v` the nodal values of the minimiser `u / r^ℓ`.
fn minimise(grid: &RadialGrid, mode: usize) -> Result<(f64, Vec<f64>)> {
    let n = grid.n();
    let last = grid.boundary();

    // Δ_ℓ(r^ℓ v) at the quadrature points, weighted by sqrt(W y)
    let (y, wq) = gauss_legendre_unit(n + mode + 2);
    let e0 = grid.interpolation_matrix(&y);
    let e1 = &e0 * grid.d1();
    let e2 = &e0 * grid.d2();
    let c = (2 * mode + 1) as f64;
    let mut a = DMatrix::<f64>::zeros(y.len(), n);
    for (q, (&yq, &w)) in y.iter().zip(&wq).enumerate() {
        let s = (w * yq).sqrt();
        let pl = yq.powi(mode as i32);
        let pl1 = pl / yq;
        for j in 0..n {
            a[(q, j)] = s * (pl * e2[(q, j)] + c * pl1 * e1[(q, j)]);
        }
    }

    // constraints: v(1) = 0, v'(1) = −1, v'(0) = 0
    let mut cons = DMatrix::<f64>::zeros(3, n);
    cons[(0, last)] = 1.0;
    for j in 0..n {
        cons[(1, j)] = grid.d1()[(last, j)];
    }
    for (j, x) in grid.origin_row(1).into_iter().enumerate() {
        cons[(2, j)] = x;
    }
    let target = DVector::from_vec(vec![0.0, -1.0, 0.0]);

    // full orthogonal Q of consᵀ: the first k columns span the row space
    let k = cons.nrows();
    let qr = cons.transpose().qr();
    let mut qt = DMatrix::<f64>::identity(n, n);
    qr.q_tr_mul(&mut qt);
    let q = qt.transpose();
    let basis = q.columns(0, k).into_owned();
    let null = q.columns(k, n - k).into_owned();
    let small = (&cons * &basis)
        .lu()
        .solve(&target)
        .ok_or(Error::Singular)?;
    let particular = &basis * small;

    let an = &a * &null;
    let rhs = -(&a * &particular);
    let t = an
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::Singular)?;
    let v = particular + &null * t;
    let residual = &a * &v;
    let eigenvalue = residual.norm_squared();
    if !(eigenvalue > 0.0 && eigenvalue.is_finite()) {
        return Err(Error::Singular);
    }
    Ok((eigenvalue, v.iter().copied().collect()))
}

/// `‖Δ_ℓ² u‖∞` at interior nodes by repeated collocation.
pub fn biharmonic_residual(u: &RadialField) -> f64 {
    let grid = u.grid();
    let w = u.laplacian();
    let l = crate::operators::laplacian_matrix(grid, u.mode());
    let b = mat_vec(&l, &w);
    b[1..grid.boundary()].iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Scheme};

    fn grid(n: usize) -> Arc<RadialGrid> {
        Arc::new(build_grid(n, Scheme::GaussRadau).unwrap())
    }

    #[test]
    fn mode_eigenvalues_are_two_l_plus_two() {
        let g = grid(64);
        let eigs = steklov_eigs(&g, 0, 5).unwrap();
        for e in &eigs {
            let exact = 2.0 * (e.mode as f64 + 1.0);
            assert!((e.eigenvalue - exact).abs() < 1e-8, "mode {} got {}", e.mode, e.eigenvalue);
            assert!(e.residual < 1e-8, "residual {}", e.residual);
        }
    }

    #[test]
    fn first_eigenfunction_is_the_bowl() {
        let g = grid(64);
        let e = first_eigenfunction(&g).unwrap();
        let exact = g.sample(|r| (1.0 - r * r) / 2.0);
        let dev = e
            .eigenfunction
            .values()
            .iter()
            .zip(&exact)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev < 1e-8);
        assert!(e.eigenfunction.values()[..63].iter().all(|&v| v > 0.0));
        assert!(biharmonic_residual(&e.eigenfunction) < 1e-7);
    }

    #[test]
    fn sigma_star_values() {
        let g = grid(32);
        assert!((sigma_star(&g).unwrap() + 1.0).abs() < 1e-8);
        assert!((sigma_star_modes(&g, [1]).unwrap() + 3.0).abs() < 1e-8);
        let d0 = mode_eigenvalue(&g, 0).unwrap();
        assert_eq!(sigma_star(&g).unwrap(), 1.0 - d0);
        assert!(steklov_eigs(&g, 0, 0).is_err());
    }
}
