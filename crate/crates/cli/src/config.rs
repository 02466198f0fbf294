//! Experiment configuration: built-in defaults, overridden by a JSON config
//! file, overridden by CLI flags.

use serde::Deserialize;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitKind {
    Csv,
    Json,
    Svg,
    /// Binary trajectory frames (pde only).
    Frames,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub ks: Vec<u32>,
    pub eta: f64,
    pub a: f64,
    pub n: usize,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub p: f64,
    pub q: f64,
    pub exponent: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub emit: Vec<EmitKind>,
    pub strict: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ks: Vec::new(), // per-experiment defaults fill this
            eta: 0.1,
            a: 2.05,
            n: 128,
            dt: None,
            t_end: 0.5,
            p: f64::INFINITY,
            q: 1.0,
            exponent: critwave_core::FOUR_PI,
            seed: 42,
            out_dir: PathBuf::from("critwave_out"),
            emit: vec![EmitKind::Csv, EmitKind::Json],
            strict: false,
        }
    }
}

/// JSON file shape; every field optional.
#[derive(Debug, Default, Deserialize)]
pub struct FileConfig {
    pub k: Option<Vec<u32>>,
    pub eta: Option<f64>,
    pub a: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    #[serde(rename = "T")]
    pub t_end: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub exponent: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub emit: Option<Vec<String>>,
}

pub fn parse_emit(s: &str) -> Result<Vec<EmitKind>, String> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| match t.trim() {
            "csv" => Ok(EmitKind::Csv),
            "json" => Ok(EmitKind::Json),
            "svg" => Ok(EmitKind::Svg),
            "frames" => Ok(EmitKind::Frames),
            other => Err(format!("unknown emit kind '{other}' (csv|json|svg|frames)")),
        })
        .collect()
}

impl ExperimentConfig {
    /// Layer a file config under the current values (current wins when set
    /// by the CLI; this is called before CLI overrides are applied, so file
    /// values replace defaults).
    pub fn apply_file(&mut self, f: FileConfig) -> Result<(), String> {
        if let Some(k) = f.k {
            self.ks = k;
        }
        if let Some(v) = f.eta {
            self.eta = v;
        }
        if let Some(v) = f.a {
            self.a = v;
        }
        if let Some(v) = f.n {
            self.n = v;
        }
        if f.dt.is_some() {
            self.dt = f.dt;
        }
        if let Some(v) = f.t_end {
            self.t_end = v;
        }
        if let Some(v) = f.p {
            self.p = v;
        }
        if let Some(v) = f.q {
            self.q = v;
        }
        if let Some(v) = f.exponent {
            self.exponent = v;
        }
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if let Some(v) = f.out {
            self.out_dir = PathBuf::from(v);
        }
        if let Some(v) = f.emit {
            self.emit = parse_emit(&v.join(","))?;
        }
        Ok(())
    }
}
