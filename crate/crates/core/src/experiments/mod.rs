//! Run plumbing behind the command-line front end: configuration, manifests,
//! sweep tables and the canned suites.
//!
//! Every runner returns an [`Outcome`]: the lines to print, the files written
//! and, for completed runs that did not meet their numerical targets, a
//! failure note (the caller maps it to exit code 2).

pub mod config;
pub mod identity;
pub mod manifest;
pub mod suites;

use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use config::{Purpose, RunConfig};
pub use identity::{identity_suite, IdentityReport};
pub use manifest::{load_field, read_manifest, write_atomic, Manifest};

use crate::eigen::steklov_eigs;
use crate::energy::energy;
use crate::error::{Error, Result};
use crate::grid::{build_grid, Scheme};
use crate::operators::{Boundary, Profile, RadialField, SteklovSystem};
use crate::solve::{
    certify, gradient_residual, ground_state_with, sweep_states, GroundStateResult, References,
    SolveOptions, SweepRecord,
};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "STEKLOV_OUT_DIR";

/// Sweep CSV header, in column order.
pub const SWEEP_COLUMNS: [&str; 15] = [
    "sigma",
    "p",
    "n",
    "energy",
    "hsigma_sq",
    "h2_norm",
    "linf_norm",
    "uprime1",
    "nehari_res",
    "pde_res",
    "pohozaev_res",
    "positive",
    "decreasing",
    "iters",
    "converged",
];

/// Distance companion CSV header.
pub const DISTANCE_COLUMNS: [&str; 3] = ["sigma", "dist_navier", "dist_dirichlet"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    /// Set when the run completed but missed a numerical target.
    pub failure: Option<String>,
}

impl Outcome {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

/// Output directory: explicit flag, then `STEKLOV_OUT_DIR`, then the config's
/// `out_dir`, then `./steklov-out`.
pub fn resolve_out_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("steklov-out"))
}

/// Reads a config file (or manifest); relative paths resolve against its
/// directory.
pub fn load_config(path: &Path, purpose: Purpose, overrides: &[(String, String)]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
    RunConfig::parse(&text, path.parent(), purpose, overrides)
}

/// Eigenvalue table for modes `mode..mode+count`.
pub fn run_eig(n: usize, mode: usize, count: usize, save: Option<&Path>) -> Result<Outcome> {
    let grid = Arc::new(build_grid(n, Scheme::default())?);
    let eigs = steklov_eigs(&grid, mode, count)?;
    let mut out = Outcome::default();
    out.line(format!("{:>4}  {:>12}  {:>9}", "mode", "eigenvalue", "residual"));
    for e in &eigs {
        out.line(format!("{:>4}  {:>12.6}  {:>9.1e}", e.mode, e.eigenvalue, e.residual));
    }
    if let Some(dir) = save {
        let mut m = Manifest::new("eig");
        m.grid(&grid).section("eigenvalues");
        for e in &eigs {
            m.float(&format!("mode_{}", e.mode), e.eigenvalue);
            m.float(&format!("residual_{}", e.mode), e.residual);
        }
        let path = dir.join(format!("eig_n{n}_mode{mode}.manifest"));
        m.write(&path)?;
        out.files.push(path);
    }
    Ok(out)
}

/// `Δ²u = rhs` on an `n`-point grid.
pub fn run_solve_linear(n: usize, boundary: Boundary, rhs: &Profile, save: Option<&Path>) -> Result<Outcome> {
    let grid = Arc::new(build_grid(n, Scheme::default())?);
    let f = RadialField::new(grid.clone(), 0, rhs.sample(&grid))?;
    let system = SteklovSystem::new(grid.clone(), 0, boundary)?;
    let u = system.solve(&f)?;
    let res = system.residuals(&u, f.values())?;
    let origin: f64 = grid.origin_row(0).iter().zip(u.values()).map(|(a, b)| a * b).sum();
    let lap = u.laplacian();
    let mut out = Outcome::default();
    out.line(format!("boundary = {}", describe(boundary)));
    out.line(format!("u(0)     = {origin:.6e}"));
    out.line(format!("u'(1)    = {:.6e}", u.boundary_slope()));
    out.line(format!("lap u(1) = {:.6e}", lap[grid.boundary()]));
    out.line(format!(
        "residuals: pde {:.1e}  bc {:.1e}  backward {:.1e}  condition {:.1e}",
        res.pde,
        res.bc,
        res.backward,
        system.condition()
    ));
    if let Some(dir) = save {
        let mut m = Manifest::new("solve-linear");
        m.section("problem");
        m.put("boundary", boundary.kind());
        if let Some(s) = boundary.sigma() {
            m.float("sigma", s);
        }
        m.put("rhs", rhs);
        m.grid(&grid);
        m.section("residuals");
        m.float("pde", res.pde)
            .float("bc", res.bc)
            .float("backward", res.backward)
            .float("condition", system.condition());
        m.field(&u);
        let path = dir.join(format!("linear_{}_n{n}.manifest", boundary.kind()));
        m.write(&path)?;
        out.files.push(path);
    }
    Ok(out)
}

fn describe(b: Boundary) -> String {
    match b {
        Boundary::Steklov(s) => format!("steklov (sigma = {s})"),
        other => other.kind().to_string(),
    }
}

fn initial_field(cfg: &RunConfig) -> Result<Option<RadialField>> {
    let Some(path) = &cfg.init else {
        return Ok(None);
    };
    let u = load_field(&read_manifest(path)?).map_err(|e| Error::config("init", e.to_string()))?;
    if u.grid().n() != cfg.n {
        return Err(Error::config(
            "init",
            format!("stored field has n = {}, config has n = {}", u.grid().n(), cfg.n),
        ));
    }
    Ok(Some(u))
}

/// A ground-state run; writes `<out>/<name>.manifest`.
pub fn run_ground(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let params = cfg.params(cfg.sigma.unwrap_or(1.0));
    let boundary = cfg.boundary();
    let options = SolveOptions {
        init: initial_field(cfg)?,
        ..cfg.options()
    };
    let r = ground_state_with(&params, boundary, &options)?;
    let path = out_dir.join(format!("{}.manifest", cfg.name));
    ground_manifest(cfg, &r).write(&path)?;

    let mut out = Outcome::default();
    out.line(ground_summary(cfg, &r));
    out.files.push(path);
    if !r.converged {
        out.failure = Some(format!(
            "not converged after {} iterations (residual {:.1e}, tol {:.1e})",
            r.iterations, r.pde_residual, cfg.tol
        ));
    }
    Ok(out)
}

fn ground_summary(cfg: &RunConfig, r: &GroundStateResult) -> String {
    let c = &r.certificates;
    format!(
        "ground name={} boundary={} sigma={} p={:.6} n={} J={:.6e} h2={:.6e} linf={:.6e} uprime1={:.6e} \
         iters={} converged={} positive={} superharmonic={} decreasing={} pde_res={:.1e} pohozaev={:.1e}",
        cfg.name,
        r.boundary.kind(),
        r.boundary.sigma().map_or("inf".to_string(), |s| format!("{s:.6}")),
        cfg.p,
        cfg.n,
        r.report.j_value,
        r.h2_norm,
        r.u.linf(),
        r.u.boundary_slope(),
        r.iterations,
        u8::from(r.converged),
        u8::from(c.positive()),
        u8::from(c.superharmonic()),
        u8::from(c.decreasing()),
        r.pde_residual,
        c.pohozaev_residual.unwrap_or(f64::NAN),
    )
}

/// Manifest of a ground-state result with its embedded config.
pub fn ground_manifest(cfg: &RunConfig, r: &GroundStateResult) -> Manifest {
    let mut m = Manifest::new("ground");
    m.section("config").raw(&cfg.render());
    m.grid(r.u.grid());
    let e = &r.report;
    m.section("energy");
    m.float("j_value", e.j_value)
        .float("hsigma_sq", e.hsigma_sq)
        .float("nonlinear_term", e.nonlinear_term)
        .float("boundary_term", e.boundary_term)
        .float("nehari_residual", e.nehari_residual)
        .float("rayleigh", e.rayleigh)
        .float("source_term", e.source_term)
        .float("t_star_final", r.t_star_final)
        .float("h2_norm", r.h2_norm);
    m.section("residuals");
    m.float("pde_residual", r.pde_residual)
        .float("collocation_residual", r.collocation_residual)
        .float("bc_residual", r.bc_residual)
        .put("iterations", r.iterations)
        .flag("converged", r.converged)
        .put("start", r.start)
        .put("seed", r.seed);
    m.certificates(&r.certificates);
    m.section("history");
    for (k, inc) in r.history.iter().enumerate() {
        m.raw(&format!("{} {}", k + 1, config::fmt_f64(*inc)));
    }
    m.field(&r.u);
    m
}

/// Navier and Dirichlet reference states requested by a sweep config.
fn references(cfg: &RunConfig, out: &mut Outcome) -> Result<References> {
    let mut refs = References::default();
    let spec = &cfg.references;
    let params = cfg.params(1.0);
    let load = |path: &PathBuf, key: &str| -> Result<RadialField> {
        let u = load_field(&read_manifest(path)?).map_err(|e| Error::config(key, e.to_string()))?;
        if u.grid().n() != cfg.n {
            return Err(Error::config(key, "reference grid size differs from n"));
        }
        Ok(u)
    };
    for (wanted, path, key, boundary) in [
        (spec.navier, &spec.navier_path, "navier_ref", Boundary::Navier),
        (spec.dirichlet, &spec.dirichlet_path, "dirichlet_ref", Boundary::Dirichlet),
    ] {
        if !wanted {
            continue;
        }
        let u = match path {
            Some(p) => load(p, key)?,
            None => {
                let r = ground_state_with(&params, boundary, &cfg.options())?;
                out.line(format!(
                    "reference {}: J={:.6e} converged={} iters={}",
                    boundary.kind(),
                    r.report.j_value,
                    u8::from(r.converged),
                    r.iterations
                ));
                if !r.converged {
                    out.failure = Some(format!("{} reference did not converge", boundary.kind()));
                }
                r.u
            }
        };
        match boundary {
            Boundary::Navier => refs.navier = Some(u),
            _ => refs.dirichlet = Some(u),
        }
    }
    Ok(refs)
}

/// A σ sweep; writes `<name>.csv`, `<name>_distances.csv` and
/// `<name>.manifest` under `out_dir`.
pub fn run_sweep(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let mut out = Outcome::default();
    let refs = references(cfg, &mut out)?;
    let template = cfg.params(cfg.sigmas[0]);
    let rows: Vec<SweepRecord> = sweep_states(&cfg.sigmas, &template, &refs, &cfg.options())
        .into_iter()
        .map(|(rec, _)| rec)
        .collect();

    let csv_path = out_dir.join(format!("{}.csv", cfg.name));
    write_atomic(&csv_path, &sweep_csv(&rows)?)?;
    let dist_path = out_dir.join(format!("{}_distances.csv", cfg.name));
    write_atomic(&dist_path, &distance_csv(&rows)?)?;

    let mut m = Manifest::new("sweep");
    m.section("config").raw(&cfg.render());
    let grid = build_grid(cfg.n, Scheme::default())?;
    m.grid(&grid);
    m.section("outputs");
    m.put("csv", csv_path.display()).put("distances", dist_path.display());
    m.section("rows");
    m.raw("# sigma converged error");
    for r in &rows {
        m.raw(&format!(
            "{} {} {}",
            config::fmt_f64(r.sigma),
            u8::from(r.converged),
            r.error.as_deref().unwrap_or("-")
        ));
    }
    let manifest_path = out_dir.join(format!("{}.manifest", cfg.name));
    m.write(&manifest_path)?;

    out.line(format!(
        "{:>10} {:>13} {:>13} {:>13} {:>13} {:>5} {:>4} {:>3} {:>3}",
        "sigma", "energy", "h2_norm", "linf_norm", "uprime1", "iters", "conv", "pos", "dec"
    ));
    for r in &rows {
        out.line(format!(
            "{:>10.6} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>5} {:>4} {:>3} {:>3}{}",
            r.sigma,
            r.energy,
            r.h2_norm,
            r.linf_norm,
            r.uprime1,
            r.iters,
            u8::from(r.converged),
            u8::from(r.positive),
            u8::from(r.decreasing),
            r.error.as_deref().map(|e| format!("  error: {e}")).unwrap_or_default()
        ));
    }
    out.files.extend([csv_path, dist_path, manifest_path]);
    let bad = rows.iter().filter(|r| !r.converged).count();
    if bad > 0 {
        out.failure = Some(format!("{bad} of {} sweep points did not converge", rows.len()));
    }
    Ok(out)
}

fn bits(b: bool) -> String {
    u8::from(b).to_string()
}

/// The 15-column sweep table.
pub fn sweep_csv(rows: &[SweepRecord]) -> Result<Vec<u8>> {
    let f = config::fmt_f64;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            f(r.sigma),
            f(r.p),
            r.n.to_string(),
            f(r.energy),
            f(r.hsigma_sq),
            f(r.h2_norm),
            f(r.linf_norm),
            f(r.uprime1),
            f(r.nehari_res),
            f(r.pde_res),
            f(r.pohozaev_res),
            bits(r.positive),
            bits(r.decreasing),
            r.iters.to_string(),
            bits(r.converged),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// `sigma,dist_navier,dist_dirichlet`; empty cells where no reference was
/// given.
pub fn distance_csv(rows: &[SweepRecord]) -> Result<Vec<u8>> {
    let opt = |x: Option<f64>| x.map(config::fmt_f64).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DISTANCE_COLUMNS)?;
    for r in rows {
        w.write_record([config::fmt_f64(r.sigma), opt(r.dist_navier), opt(r.dist_dirichlet)])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Recomputes residuals and certificates of a stored ground state.
pub fn run_verify(path: &Path) -> Result<Outcome> {
    let sections = read_manifest(path)?;
    let kind = sections
        .iter()
        .find(|s| s.name == "run")
        .and_then(|s| s.get("kind"))
        .unwrap_or("");
    if kind != "ground" {
        return Err(Error::Manifest(format!(
            "{} is not a ground manifest (kind `{kind}`)",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(path)?;
    let cfg = RunConfig::parse(&text, path.parent(), Purpose::Ground, &[])?;
    let u = load_field(&sections)?;
    let boundary = cfg.boundary();
    let params = cfg.params(cfg.sigma.unwrap_or(1.0));
    let mut energy_params = params.clone();
    energy_params.sigma = boundary.sigma().unwrap_or(1.0);
    let report = energy(&u, &energy_params)?;
    let residual = gradient_residual(&u, &params, boundary)?;
    let c = certify(&u, boundary, &params)?;

    let mut out = Outcome::default();
    out.line(format!("manifest      {}", path.display()));
    out.line(format!("boundary      {}", describe(boundary)));
    out.line(format!("J             {:.6e}", report.j_value));
    out.line(format!(
        "nehari        {:.1e} (relative {:.1e})",
        report.nehari_residual,
        report.nehari_residual / report.hsigma_sq
    ));
    out.line(format!("pde_residual  {residual:.1e}"));
    out.line(format!(
        "positive      {} (min interior {:.6e} at node {})",
        u8::from(c.positive()),
        c.positivity.min_interior,
        c.positivity.witness
    ));
    out.line(format!(
        "superharmonic {} (min -lap u {:.6e})",
        u8::from(c.superharmonic()),
        c.superharmonicity.min_neg_laplacian
    ));
    out.line(format!(
        "decreasing    {} (max u' {:.6e})",
        u8::from(c.decreasing()),
        c.decay.max_slope
    ));
    if let Some(p) = c.pohozaev_residual {
        out.line(format!("pohozaev      {p:.1e}"));
    }
    if let Some(m) = c.lowerbound_margin {
        out.line(format!("lowerbound    {m:.6e}"));
    }
    // superharmonicity and decay are only expected for σ ≤ 1
    let strict = matches!(boundary.sigma(), Some(s) if s <= 1.0);
    let mut failed = Vec::new();
    if !c.positive() {
        failed.push("positivity");
    }
    if strict && !c.superharmonic() {
        failed.push("superharmonicity");
    }
    if strict && !c.decreasing() {
        failed.push("radial decay");
    }
    if !failed.is_empty() {
        out.failure = Some(format!("certificates failed: {}", failed.join(", ")));
    }
    Ok(out)
}

/// Identity suite on an `n`-point grid.
pub fn run_identity_suite(n: usize) -> Result<Outcome> {
    let report = identity_suite(n)?;
    let mut out = Outcome::default();
    for c in &report.checks {
        out.line(format!(
            "{} {:<32} residual {:.1e}  tol {:.0e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        ));
    }
    let failed = report.checks.iter().filter(|c| !c.passed()).count();
    out.line(format!(
        "identity suite n={n}: {} of {} checks passed",
        report.checks.len() - failed,
        report.checks.len()
    ));
    if failed > 0 {
        out.failure = Some(format!("{failed} identity checks failed"));
    }
    Ok(out)
}
