//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use steklov_core::{build_grid, ProblemParams, RadialField, RadialGrid, Scheme};

/// Grid sizes exercised by the scaling benchmarks.
pub const SIZES: [usize; 3] = [32, 64, 96];

pub fn grid(n: usize) -> Arc<RadialGrid> {
    Arc::new(build_grid(n, Scheme::GaussRadau).expect("benchmark sizes are valid"))
}

/// Constant forcing on `grid`.
pub fn unit_rhs(grid: &Arc<RadialGrid>) -> RadialField {
    RadialField::from_fn(grid.clone(), 0, |_| 1.0)
}

/// The cubic problem at Poisson ratio `sigma` on an `n`-point grid.
pub fn cubic(sigma: f64, n: usize) -> ProblemParams {
    ProblemParams::new(sigma, 3.0).with_n(n)
}
