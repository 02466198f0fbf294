//! Report assembly: deterministic JSON summaries, RFC-4180 CSV tables,
//! minimal SVG figures, all written atomically (temp + rename).

use serde_json::{json, Map, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{EmitKind, ExperimentConfig};

/// 17 significant digits, fixed format: byte-stable across runs.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// JSON value for a float; non-finite values become strings.
pub fn jf(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(fmt_f64(v))
    }
}

/// One paper-anchored inequality check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    /// The inequality being verified, as a bare formula string.
    pub anchor: String,
    pub passed: bool,
    pub detail: Map<String, Value>,
}

impl Check {
    pub fn new(name: &str, anchor: &str, passed: bool) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            passed,
            detail: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.detail.insert(key.into(), jf(v));
        self
    }
}

#[derive(Clone, Debug)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        CsvTable {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SvgFigure {
    pub name: String,
    pub content: String,
}

/// Per-experiment result container.
#[derive(Clone, Debug, Default)]
pub struct ReportBundle {
    pub experiment: String,
    /// Per-item execution status: (label, Ok or error text).
    pub items: Vec<(String, Result<(), String>)>,
    pub checks: Vec<Check>,
    pub constants: Map<String, Value>,
    pub tables: Vec<CsvTable>,
    pub figures: Vec<SvgFigure>,
}

impl ReportBundle {
    pub fn new(experiment: &str) -> Self {
        ReportBundle {
            experiment: experiment.into(),
            ..Default::default()
        }
    }

    pub fn item_ok(&mut self, label: &str) {
        self.items.push((label.into(), Ok(())));
    }

    pub fn item_err(&mut self, label: &str, err: String) {
        self.items.push((label.into(), Err(err)));
    }

    pub fn constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.into(), jf(v));
    }

    pub fn all_ran(&self) -> bool {
        self.items.iter().all(|(_, r)| r.is_ok())
    }

    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn summary_json(&self, cfg: &ExperimentConfig) -> Value {
        let mut root = Map::new();
        root.insert("artifact_version".into(), json!(env!("CARGO_PKG_VERSION")));
        root.insert("experiment".into(), json!(self.experiment));
        let mut config = Map::new();
        config.insert("k".into(), json!(cfg.ks));
        config.insert("eta".into(), jf(cfg.eta));
        config.insert("a".into(), jf(cfg.a));
        config.insert("n".into(), json!(cfg.n));
        config.insert(
            "dt".into(),
            cfg.dt.map(jf).unwrap_or(Value::Null),
        );
        config.insert("T".into(), jf(cfg.t_end));
        config.insert("p".into(), jf(cfg.p));
        config.insert("q".into(), jf(cfg.q));
        config.insert("exponent".into(), jf(cfg.exponent));
        config.insert("seed".into(), json!(cfg.seed));
        root.insert("config".into(), Value::Object(config));
        root.insert(
            "items".into(),
            Value::Array(
                self.items
                    .iter()
                    .map(|(label, r)| {
                        let mut m = Map::new();
                        m.insert("label".into(), json!(label));
                        m.insert(
                            "status".into(),
                            json!(if r.is_ok() { "ok" } else { "error" }),
                        );
                        if let Err(e) = r {
                            m.insert("error".into(), json!(e));
                        }
                        Value::Object(m)
                    })
                    .collect(),
            ),
        );
        root.insert(
            "checks".into(),
            Value::Array(
                self.checks
                    .iter()
                    .map(|c| {
                        let mut m = Map::new();
                        m.insert("name".into(), json!(c.name));
                        m.insert("anchor".into(), json!(c.anchor));
                        m.insert("passed".into(), json!(c.passed));
                        m.insert("detail".into(), Value::Object(c.detail.clone()));
                        Value::Object(m)
                    })
                    .collect(),
            ),
        );
        root.insert("constants".into(), Value::Object(self.constants.clone()));
        Value::Object(root)
    }

    /// Write summary/tables/figures per the emit flags. Returns the paths.
    pub fn write(&self, cfg: &ExperimentConfig, wall_time_s: f64) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(&cfg.out_dir)?;
        let mut written = Vec::new();
        if cfg.emit.contains(&EmitKind::Json) {
            let path = cfg.out_dir.join(format!("{}_summary.json", self.experiment));
            let body = serde_json::to_string_pretty(&self.summary_json(cfg)).unwrap();
            atomic_write(&path, body.as_bytes())?;
            written.push(path);
            // wall time lives outside the deterministic summary
            let meta = cfg.out_dir.join(format!("{}_run_meta.json", self.experiment));
            let meta_body = serde_json::to_string_pretty(&json!({
                "experiment": self.experiment,
                "wall_time_s": wall_time_s,
            }))
            .unwrap();
            atomic_write(&meta, meta_body.as_bytes())?;
        }
        if cfg.emit.contains(&EmitKind::Csv) {
            for table in &self.tables {
                let path = cfg
                    .out_dir
                    .join(format!("{}_{}.csv", self.experiment, table.name));
                atomic_write(&path, table.render().as_bytes())?;
                written.push(path);
            }
        }
        if cfg.emit.contains(&EmitKind::Svg) {
            for fig in &self.figures {
                let path = cfg
                    .out_dir
                    .join(format!("{}_{}.svg", self.experiment, fig.name));
                atomic_write(&path, fig.content.as_bytes())?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
