//! Canned sweep configurations for the three limits of the Poisson ratio.

pub const SIGMA_TO_MINUS_ONE: &str = "paper-suite-sigma-to-minus-one";
pub const SIGMA_TO_ONE: &str = "paper-suite-sigma-to-one";
pub const SIGMA_TO_INFINITY: &str = "paper-suite-sigma-to-infinity";

pub const NAMES: [&str; 3] = [SIGMA_TO_MINUS_ONE, SIGMA_TO_ONE, SIGMA_TO_INFINITY];

/// The sweep config of a canned suite.
///
/// The σ → −1 suite runs at `tol = 1e-8`: the mixed system's condition number
/// grows like `1/(1 + σ)`, which puts the attainable relative residual near
/// `σ = −0.999` at about 1e-9.
pub fn canned(name: &str) -> Option<&'static str> {
    match name {
        SIGMA_TO_MINUS_ONE => Some(
            "name = paper-suite-sigma-to-minus-one\n\
             p = 3\n\
             g = const 1\n\
             n = 96\n\
             tol = 1e-8\n\
             sigmas = -0.5, -0.9, -0.99, -0.999\n",
        ),
        SIGMA_TO_ONE => Some(
            "name = paper-suite-sigma-to-one\n\
             p = 3\n\
             g = const 1\n\
             n = 96\n\
             sigmas = 0.5, 0.9, 0.99, 0.999, 1.5, 1.1, 1.01, 1.001\n\
             references = navier\n",
        ),
        SIGMA_TO_INFINITY => Some(
            "name = paper-suite-sigma-to-infinity\n\
             p = 3\n\
             g = const 1\n\
             n = 96\n\
             sigmas = 10, 100, 1000\n\
             references = dirichlet\n",
        ),
        _ => None,
    }
}
