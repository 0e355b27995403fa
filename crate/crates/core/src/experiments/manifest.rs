//! Run manifests: sectioned key-value text, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use super::config::{fmt_f64, parse_sections, Section};
use crate::error::{Error, Result};
use crate::grid::{build_grid, RadialGrid, Scheme};
use crate::operators::RadialField;
use crate::verify::Certificates;

/// Incrementally built manifest document.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    text: String,
}

impl Manifest {
    pub fn new(kind: &str) -> Self {
        let mut m = Manifest::default();
        m.section("run");
        m.put("kind", kind);
        m.put("version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        if !self.text.is_empty() {
            self.text.push('\n');
        }
        let _ = writeln!(self.text, "[{name}]");
        self
    }

    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {value}");
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.put(key, fmt_f64(value))
    }

    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.put(key, u8::from(value))
    }

    /// Raw text, e.g. a rendered config, appended verbatim.
    pub fn raw(&mut self, text: &str) -> &mut Self {
        self.text.push_str(text);
        if !text.ends_with('\n') {
            self.text.push('\n');
        }
        self
    }

    pub fn grid(&mut self, grid: &RadialGrid) -> &mut Self {
        self.section("grid");
        self.put("scheme", grid.scheme());
        self.put("n", grid.n());
        self.put("exactness_degree", grid.exactness_degree());
        self.float("first_node", grid.nodes()[0]);
        self.float("last_node", grid.nodes()[grid.boundary()])
    }

    pub fn certificates(&mut self, c: &Certificates) -> &mut Self {
        self.section("certificates");
        self.flag("positive", c.positive());
        self.float("min_interior", c.positivity.min_interior);
        self.put("witness", c.positivity.witness);
        self.flag("superharmonic", c.superharmonic());
        self.float("min_neg_laplacian", c.superharmonicity.min_neg_laplacian);
        self.flag("decreasing", c.decreasing());
        self.float("max_slope", c.decay.max_slope);
        self.float("pohozaev_residual", c.pohozaev_residual.unwrap_or(f64::NAN));
        self.float("lowerbound_margin", c.lowerbound_margin.unwrap_or(f64::NAN));
        self.float("linf", c.linf);
        self.float("tol_positivity", c.tolerances.positivity);
        self.float("tol_superharmonic", c.tolerances.superharmonic);
        self.float("tol_decay", c.tolerances.decay)
    }

    /// `[field]` rows `r u Δu` at full precision.
    pub fn field(&mut self, u: &RadialField) -> &mut Self {
        self.section("field");
        self.put("mode", u.mode());
        let _ = writeln!(self.text, "# r u laplacian");
        let lap = u.laplacian();
        for ((r, v), w) in u.grid().nodes().iter().zip(u.values()).zip(&lap) {
            let _ = writeln!(self.text, "{} {} {}", fmt_f64(*r), fmt_f64(*v), fmt_f64(*w));
        }
        self
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Writes through a temporary file in the target directory, then renames.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.text.as_bytes())
    }
}

/// Temp file + rename in the destination directory, creating it if needed.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Reads a manifest back into sections.
pub fn read_manifest(path: &Path) -> Result<Vec<Section>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Manifest(format!("cannot read {}: {e}", path.display())))?;
    parse_sections(&text)
}

fn find<'a>(sections: &'a [Section], name: &str) -> Result<&'a Section> {
    sections
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Manifest(format!("missing [{name}] section")))
}

/// The field stored in a ground manifest, on a freshly built grid whose
/// nodes must match the stored radii exactly.
pub fn load_field(sections: &[Section]) -> Result<RadialField> {
    let grid_sec = find(sections, "grid")?;
    let n: usize = grid_sec
        .get("n")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Manifest("[grid] n missing or malformed".into()))?;
    let scheme: Scheme = grid_sec.get("scheme").unwrap_or("gauss-radau").parse()?;
    let grid = Arc::new(build_grid(n, scheme)?);
    let field = find(sections, "field")?;
    let mode: usize = field.get("mode").and_then(|v| v.parse().ok()).unwrap_or(0);
    if field.rows.len() != n {
        return Err(Error::Manifest(format!(
            "[field] has {} rows, grid has {n} nodes",
            field.rows.len()
        )));
    }
    let mut values = Vec::with_capacity(n);
    let mut lap = Vec::with_capacity(n);
    for (row, &node) in field.rows.iter().zip(grid.nodes()) {
        let cols: Vec<f64> = row
            .split_whitespace()
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Manifest(format!("bad field row `{row}`")))?;
        if cols.len() != 3 {
            return Err(Error::Manifest(format!("field row `{row}` needs three columns")));
        }
        if cols[0] != node {
            return Err(Error::Manifest(format!(
                "stored node {} does not match grid node {node}",
                cols[0]
            )));
        }
        values.push(cols[1]);
        lap.push(cols[2]);
    }
    RadialField::new(grid, mode, values)?.with_laplacian(lap)
}
