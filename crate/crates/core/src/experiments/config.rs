//! Plain-text `key = value` run configuration.
//!
//! Grammar (one entry per line):
//!
//! ```text
//! # comment                 (also after a value)
//! [section]                 (only [config] is read; other sections are skipped)
//! key = value
//! ```
//!
//! Manifests embed the resolved configuration in a `[config]` section, so a
//! manifest is itself a valid configuration file.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::operators::{Boundary, ProblemParams, Profile, Table};
use crate::solve::{SolveOptions, DEFAULT_SEED};

/// One `[name]` block of a key-value document. Lines that are not
/// `identifier = value` are kept as raw rows (field and history tables in manifests).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
    pub rows: Vec<String>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Splits a document into sections; entries before any header go to a
/// section named `""`.
pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections = vec![Section::default()];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                Error::Manifest(format!("line {}: unterminated section header", lineno + 1))
            })?;
            sections.push(Section {
                name: name.trim().to_string(),
                ..Section::default()
            });
            continue;
        }
        let current = sections.last_mut().expect("at least the root section");
        match line.split_once('=') {
            Some((k, v)) if is_key(k.trim()) => {
                current.entries.push((k.trim().to_string(), v.trim().to_string()))
            }
            _ => current.rows.push(line.to_string()),
        }
    }
    Ok(sections)
}

fn is_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Which subcommand a configuration is read for; decides required keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Ground,
    Sweep,
}

/// Reference states for sweep distance columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReferenceSpec {
    pub navier: bool,
    pub dirichlet: bool,
    /// Ground manifests to load instead of computing.
    pub navier_path: Option<PathBuf>,
    pub dirichlet_path: Option<PathBuf>,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub sigma: Option<f64>,
    pub p: f64,
    pub g: Profile,
    pub source: Option<Profile>,
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// `steklov`, `navier` or `dirichlet`.
    pub boundary: String,
    pub seed: u64,
    pub restarts: bool,
    pub sigmas: Vec<f64>,
    pub references: ReferenceSpec,
    /// Ground manifest whose field seeds the iteration.
    pub init: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "name",
    "sigma",
    "p",
    "g",
    "source",
    "n",
    "tol",
    "max_iter",
    "boundary",
    "seed",
    "restarts",
    "sigmas",
    "references",
    "navier_ref",
    "dirichlet_ref",
    "init",
    "out_dir",
];

impl RunConfig {
    /// Parses `text`, applying `overrides` on top; relative paths resolve
    /// against `base`.
    pub fn parse(
        text: &str,
        base: Option<&Path>,
        purpose: Purpose,
        overrides: &[(String, String)],
    ) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for section in parse_sections(text)? {
            if !(section.name.is_empty() || section.name == "config") {
                continue;
            }
            if let Some(row) = section.rows.first() {
                return Err(Error::config(row.clone(), "expected `key = value`"));
            }
            for (k, v) in section.entries {
                if entries.iter().any(|(e, _)| *e == k) {
                    return Err(Error::config(k, "given more than once"));
                }
                entries.push((k, v));
            }
        }
        for (k, v) in overrides {
            match entries.iter_mut().find(|(e, _)| e == k) {
                Some(slot) => slot.1 = v.clone(),
                None => entries.push((k.clone(), v.clone())),
            }
        }
        if let Some((k, _)) = entries.iter().find(|(k, _)| !KEYS.contains(&k.as_str())) {
            return Err(Error::config(k.clone(), "unknown key"));
        }
        let get = |key: &str| entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let resolve = |v: &str| -> PathBuf {
            let path = PathBuf::from(v);
            match base {
                Some(b) if path.is_relative() => b.join(path),
                _ => path,
            }
        };

        let boundary = get("boundary").unwrap_or("steklov").to_string();
        Boundary::from_kind(&boundary, 0.0).map_err(|e| Error::config("boundary", e.to_string()))?;
        let sigma = get("sigma").map(|v| parse_f64("sigma", v)).transpose()?;
        let p = parse_f64("p", get("p").ok_or_else(|| Error::config("p", "missing"))?)?;
        let g = parse_profile(
            "g",
            get("g").ok_or_else(|| Error::config("g", "missing weight spec (const c | poly c0 c1 … | table path)"))?,
            &resolve,
        )?;
        let source = get("source").map(|v| parse_profile("source", v, &resolve)).transpose()?;
        let n = get("n").map(|v| parse_usize("n", v)).transpose()?.unwrap_or(96);
        let tol = match get("tol") {
            Some(v) => parse_f64("tol", v)?,
            None => ProblemParams::new(0.0, p).tol,
        };
        let max_iter = get("max_iter")
            .map(|v| parse_usize("max_iter", v))
            .transpose()?
            .unwrap_or(200);
        let seed = match get("seed") {
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| Error::config("seed", format!("`{v}` is not an unsigned integer")))?,
            None => DEFAULT_SEED,
        };
        let restarts = get("restarts").map(|v| parse_bool("restarts", v)).transpose()?.unwrap_or(true);
        let sigmas = match get("sigmas") {
            Some(v) => parse_list("sigmas", v)?,
            None => Vec::new(),
        };
        let mut references = ReferenceSpec::default();
        if let Some(v) = get("references") {
            for item in v.split([',', ' ']).filter(|s| !s.is_empty()) {
                match item {
                    "navier" => references.navier = true,
                    "dirichlet" => references.dirichlet = true,
                    "none" => {}
                    other => {
                        return Err(Error::config(
                            "references",
                            format!("unknown reference `{other}` (navier, dirichlet, none)"),
                        ))
                    }
                }
            }
        }
        references.navier_path = get("navier_ref").map(resolve);
        references.dirichlet_path = get("dirichlet_ref").map(resolve);
        references.navier |= references.navier_path.is_some();
        references.dirichlet |= references.dirichlet_path.is_some();

        let config = RunConfig {
            name: get("name").unwrap_or("run").to_string(),
            sigma,
            p,
            g,
            source,
            n,
            tol,
            max_iter,
            boundary,
            seed,
            restarts,
            sigmas,
            references,
            init: get("init").map(resolve),
            out_dir: get("out_dir").map(resolve),
        };
        config.check(purpose)?;
        Ok(config)
    }

    fn check(&self, purpose: Purpose) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config("name", "must be a non-empty file stem"));
        }
        match purpose {
            Purpose::Ground => {
                if self.boundary == "steklov" && self.sigma.is_none() {
                    return Err(Error::config("sigma", "missing (required for boundary = steklov)"));
                }
            }
            Purpose::Sweep => {
                if self.sigmas.is_empty() {
                    return Err(Error::config("sigmas", "missing or empty"));
                }
                if self.boundary != "steklov" {
                    return Err(Error::config("boundary", "sweeps vary sigma and need `steklov`"));
                }
            }
        }
        self.params(self.sigma.unwrap_or(0.0))
            .validate()
            .map_err(|e| Error::config(key_of(&e), e.to_string()))
    }

    /// Problem parameters at a given σ.
    pub fn params(&self, sigma: f64) -> ProblemParams {
        let mut params = ProblemParams::new(sigma, self.p)
            .with_g(self.g.clone())
            .with_n(self.n)
            .with_tol(self.tol)
            .with_max_iter(self.max_iter);
        params.source = self.source.clone();
        params
    }

    pub fn boundary(&self) -> Boundary {
        Boundary::from_kind(&self.boundary, self.sigma.unwrap_or(0.0))
            .expect("boundary kind validated at parse time")
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            seed: self.seed,
            restarts: self.restarts,
            init: None,
        }
    }

    pub fn wants_references(&self) -> bool {
        self.references.navier || self.references.dirichlet
    }

    /// The resolved configuration as `key = value` lines; floats at 17
    /// significant digits so that parsing it back is lossless.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("name", self.name.clone());
        if let Some(s) = self.sigma {
            put("sigma", fmt_f64(s));
        }
        put("p", fmt_f64(self.p));
        put("g", render_profile(&self.g));
        if let Some(d) = &self.source {
            put("source", render_profile(d));
        }
        put("n", self.n.to_string());
        put("tol", fmt_f64(self.tol));
        put("max_iter", self.max_iter.to_string());
        put("boundary", self.boundary.clone());
        put("seed", self.seed.to_string());
        put("restarts", self.restarts.to_string());
        if !self.sigmas.is_empty() {
            let list: Vec<String> = self.sigmas.iter().map(|&s| fmt_f64(s)).collect();
            put("sigmas", list.join(", "));
        }
        let refs = &self.references;
        let mut kinds = Vec::new();
        if refs.navier && refs.navier_path.is_none() {
            kinds.push("navier");
        }
        if refs.dirichlet && refs.dirichlet_path.is_none() {
            kinds.push("dirichlet");
        }
        if !kinds.is_empty() {
            put("references", kinds.join(", "));
        }
        if let Some(p) = &refs.navier_path {
            put("navier_ref", absolute(p));
        }
        if let Some(p) = &refs.dirichlet_path {
            put("dirichlet_ref", absolute(p));
        }
        if let Some(p) = &self.init {
            put("init", absolute(p));
        }
        if let Some(p) = &self.out_dir {
            put("out_dir", absolute(p));
        }
        out
    }
}

fn key_of(e: &Error) -> &'static str {
    match e {
        Error::OutOfRange { name, .. } => name,
        Error::GridTooSmall(_) => "n",
        Error::InvalidParameter(m) if m.contains("max_iter") => "max_iter",
        Error::InvalidParameter(m) if m.contains("source") => "source",
        Error::InvalidParameter(m) if m.contains("sigma") => "sigma",
        _ => "g",
    }
}

fn absolute(p: &Path) -> String {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf()).display().to_string()
}

/// `{:.16e}`: 17 significant digits, exact round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn render_profile(p: &Profile) -> String {
    match p {
        Profile::Table(t) => format!(
            "table {}",
            t.source().map(|s| absolute(Path::new(s))).unwrap_or_default()
        ),
        other => other.to_string(),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x = v
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::config(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::config(key, "must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| Error::config(key, format!("`{v}` is not a non-negative integer")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::config(key, format!("`{other}` is not a boolean"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split([',', ' ', '\t'])
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

/// `const c`, `poly c0 c1 …` or `table path`.
pub fn parse_profile(key: &str, v: &str, resolve: &dyn Fn(&str) -> PathBuf) -> Result<Profile> {
    let mut words = v.split_whitespace();
    let kind = words.next().ok_or_else(|| Error::config(key, "empty profile spec"))?;
    let rest: Vec<&str> = words.collect();
    match kind {
        "const" => match rest.as_slice() {
            [c] => Ok(Profile::Const(parse_f64(key, c)?)),
            _ => Err(Error::config(key, "`const` takes exactly one value")),
        },
        "poly" => {
            if rest.is_empty() {
                return Err(Error::config(key, "`poly` needs at least one coefficient"));
            }
            let cs = rest.iter().map(|c| parse_f64(key, c)).collect::<Result<Vec<_>>>()?;
            Ok(Profile::Poly(cs))
        }
        "table" => {
            let path = match rest.as_slice() {
                [p] => resolve(p),
                _ => return Err(Error::config(key, "`table` takes one path")),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::config(key, format!("cannot read {}: {e}", path.display())))?;
            Table::parse(&text, Some(path.display().to_string()))
                .map(Profile::Table)
                .map_err(|e| Error::config(key, e.to_string()))
        }
        other => Err(Error::config(
            key,
            format!("unknown profile kind `{other}` (const | poly | table)"),
        )),
    }
}
