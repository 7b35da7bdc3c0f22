//! Flat `key = value` run configuration. Unknown keys are errors: a typo in
//! a tolerance must not silently fall back to a default.

use crate::error::{Error, Result};
use crate::solver::PicardOptions;
use std::path::PathBuf;

#[derive(Clone, Debug)]
pub struct CaseConfig {
    pub case_name: String,
    /// Mollifier width for the dipole case; ignored elsewhere.
    pub case_eps: f64,
    /// Velocity integrability exponent p > 2 used in estimate right-hand sides.
    pub case_p: f64,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// Number of refinement levels; level k runs at (nx·2^k) × (ny·2^k).
    pub levels: usize,
    pub quad_subdiv: usize,
    pub picard: PicardOptions<f64>,
    pub out_dir: PathBuf,
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            case_name: String::new(),
            case_eps: 0.05,
            case_p: 4.0,
            nx: 8,
            ny: 8,
            lx: 1.0,
            ly: 1.0,
            levels: 4,
            quad_subdiv: 4,
            picard: PicardOptions::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl CaseConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut saw_name = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::Config(format!("line {}: {key} = {value}: {what}", lineno + 1))
            };
            macro_rules! num {
                ($ty:ty) => {
                    value.parse::<$ty>().map_err(|_| bad("unparsable number"))?
                };
            }
            match key {
                "case.name" => {
                    cfg.case_name = value.to_string();
                    saw_name = true;
                }
                "case.eps" => cfg.case_eps = num!(f64),
                "case.p" => cfg.case_p = num!(f64),
                "mesh.nx" => cfg.nx = num!(usize),
                "mesh.ny" => cfg.ny = num!(usize),
                "mesh.lx" => cfg.lx = num!(f64),
                "mesh.ly" => cfg.ly = num!(f64),
                "mesh.levels" => cfg.levels = num!(usize),
                "quad.subdiv" => cfg.quad_subdiv = num!(usize),
                "picard.tol" => cfg.picard.tol = num!(f64),
                "picard.max_iter" => cfg.picard.max_iter = num!(usize),
                "picard.damping" => cfg.picard.damping = num!(f64),
                "out.dir" => cfg.out_dir = PathBuf::from(value),
                _ => return Err(Error::Config(format!("line {}: unknown key '{key}'", lineno + 1))),
            }
        }
        if !saw_name {
            return Err(Error::Config("missing required key 'case.name'".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Config("mesh.nx and mesh.ny must be >= 1".into()));
        }
        if !(self.lx > 0.0) || !(self.ly > 0.0) {
            return Err(Error::Config("mesh.lx and mesh.ly must be > 0".into()));
        }
        if self.levels == 0 {
            return Err(Error::Config("mesh.levels must be >= 1".into()));
        }
        if self.quad_subdiv == 0 {
            return Err(Error::Config("quad.subdiv must be >= 1".into()));
        }
        if !(self.case_p > 2.0) {
            return Err(Error::Config(format!("case.p = {} must exceed 2", self.case_p)));
        }
        self.picard.validate()
    }

    /// Mesh resolution at refinement level k.
    pub fn resolution(&self, level: usize) -> (usize, usize) {
        (self.nx << level, self.ny << level)
    }
}
