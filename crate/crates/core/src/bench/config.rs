use crate::error::{Error, Result};
use crate::material::MaterialSet;
use crate::mesh::{benchmark_inclusions, Inclusion};
use crate::operators::{Strategy, Traction};
use crate::solver::PreconditionerKind;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialPreset {
    /// Soft matrix with two inclusions 100 times stiffer.
    Benchmark,
    /// Matrix material everywhere.
    Homogeneous,
}

impl MaterialPreset {
    pub fn as_str(self) -> &'static str {
        match self {
            MaterialPreset::Benchmark => "benchmark",
            MaterialPreset::Homogeneous => "homogeneous",
        }
    }

    pub fn materials(self) -> MaterialSet {
        match self {
            MaterialPreset::Benchmark => MaterialSet::benchmark(),
            MaterialPreset::Homogeneous => MaterialSet::homogeneous(MaterialSet::benchmark().matrix),
        }
    }

    pub fn inclusions(self, dim: usize) -> Vec<Inclusion> {
        match self {
            MaterialPreset::Benchmark => benchmark_inclusions(dim),
            MaterialPreset::Homogeneous => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadPreset {
    /// `12.5e3` along (1,0) in 2D, `12.5√2e3` along (1,1,0) in 3D.
    Benchmark,
    /// Benchmark magnitude, normal to the top face.
    Uniaxial,
    Zero,
}

impl LoadPreset {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadPreset::Benchmark => "benchmark",
            LoadPreset::Uniaxial => "uniaxial",
            LoadPreset::Zero => "zero",
        }
    }

    /// Full traction; the solver applies it in increments.
    pub fn traction(self, dim: usize) -> Traction {
        match self {
            LoadPreset::Benchmark => Traction::benchmark(dim),
            LoadPreset::Uniaxial => Traction::new(12.5e3, [0.0, 1.0, 0.0]),
            LoadPreset::Zero => Traction::zero(),
        }
    }
}

macro_rules! str_enum {
    ($t:ty, $($name:literal => $v:expr),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($v),)+
                    other => Err(Error::Config(format!("unknown {} '{other}'", stringify!($t)))),
                }
            }
        }
    };
}

str_enum!(MaterialPreset, "benchmark" => MaterialPreset::Benchmark, "homogeneous" => MaterialPreset::Homogeneous);
str_enum!(LoadPreset, "benchmark" => LoadPreset::Benchmark, "uniaxial" => LoadPreset::Uniaxial, "zero" => LoadPreset::Zero);

/// One benchmark run. Every field can come from a JSON file, a named preset,
/// or a command-line flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Label copied into the results.
    pub name: String,
    pub dim: usize,
    pub p: usize,
    /// Gauss points per direction; `None` means `p + 1`.
    pub q: Option<usize>,
    /// Permit `q < p + 1`.
    pub allow_underintegration: bool,
    /// Cells per side of the coarse mesh.
    pub coarse_cells: usize,
    pub n_global_refinements: usize,
    pub strategy: Strategy,
    pub preconditioner: PreconditionerKind,
    pub material: MaterialPreset,
    pub load: LoadPreset,
    /// Multiplier on the preset traction.
    pub load_scale: f64,
    pub seed: u64,
    /// Worker threads for element loops; 1 is the sequential reference path.
    pub threads: usize,
    /// Write measured times; when false every timing column is 0 so that
    /// output is reproducible byte for byte.
    pub timings: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            name: "custom".into(),
            dim: 2,
            p: 2,
            q: None,
            allow_underintegration: false,
            coarse_cells: 4,
            n_global_refinements: 1,
            strategy: Strategy::Tensor2,
            preconditioner: PreconditionerKind::Gmg,
            material: MaterialPreset::Benchmark,
            load: LoadPreset::Benchmark,
            load_scale: 1.0,
            seed: 1,
            threads: 1,
            timings: true,
            output: None,
        }
    }
}

/// Degree and refinement pairs of the reference tables, with the refinement
/// count reduced for a workstation. 2D uses a 4 × 4 coarse grid and two
/// refinements fewer; 3D a 2 × 2 × 2 grid and one fewer.
const TABLE_2D: [(usize, usize); 8] = [(1, 7), (2, 6), (3, 5), (4, 5), (5, 5), (6, 4), (7, 4), (8, 4)];
const TABLE_3D: [(usize, usize); 4] = [(1, 4), (2, 3), (3, 2), (4, 2)];

impl RunConfig {
    /// Names accepted by [`preset`](Self::preset).
    pub fn preset_names() -> Vec<String> {
        let mut names = vec!["smoke".to_string(), "desk2d".to_string()];
        names.extend(TABLE_2D.iter().map(|(p, _)| format!("table2d-p{p}")));
        names.extend(TABLE_3D.iter().map(|(p, _)| format!("table3d-p{p}")));
        names
    }

    pub fn preset(name: &str) -> Result<Self> {
        let base = RunConfig {
            name: name.to_string(),
            ..RunConfig::default()
        };
        let table = |dim: usize, rows: &[(usize, usize)], coarse: usize, fewer: usize, p_str: &str| {
            let p: usize = p_str.parse().ok()?;
            rows.iter().find(|r| r.0 == p).map(|&(p, gref)| RunConfig {
                dim,
                p,
                coarse_cells: coarse,
                n_global_refinements: gref - fewer,
                ..base.clone()
            })
        };
        let found = match name {
            "smoke" => Some(RunConfig {
                coarse_cells: 2,
                n_global_refinements: 1,
                ..base.clone()
            }),
            "desk2d" => Some(RunConfig {
                coarse_cells: 2,
                n_global_refinements: 2,
                ..base.clone()
            }),
            _ => {
                if let Some(p) = name.strip_prefix("table2d-p") {
                    table(2, &TABLE_2D, 4, 2, p)
                } else if let Some(p) = name.strip_prefix("table3d-p") {
                    table(3, &TABLE_3D, 2, 1, p)
                } else {
                    None
                }
            }
        };
        found.ok_or_else(|| {
            Error::Config(format!(
                "unknown preset '{name}' (available: {})",
                Self::preset_names().join(", ")
            ))
        })
    }

    /// Parse and validate a JSON configuration. Missing fields take their
    /// defaults; unknown fields are rejected.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Effective Gauss points per direction.
    /// Full traction of the run.
    pub fn traction(&self) -> Traction {
        self.load.traction(self.dim).scaled(self.load_scale)
    }

    pub fn n_q(&self) -> usize {
        self.q.unwrap_or(self.p + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.dim != 2 && self.dim != 3 {
            return fail(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if !(1..=8).contains(&self.p) {
            return fail(format!("p must lie in 1..=8, got {}", self.p));
        }
        let q = self.n_q();
        if !(1..=16).contains(&q) {
            return fail(format!("q must lie in 1..=16, got {q}"));
        }
        if q < self.p + 1 && !self.allow_underintegration {
            return fail(format!(
                "q = {q} < p + 1 = {}; set allow_underintegration to override",
                self.p + 1
            ));
        }
        if self.coarse_cells < 2 || self.coarse_cells > 64 {
            return fail(format!("coarse_cells must lie in 2..=64, got {}", self.coarse_cells));
        }
        if self.n_global_refinements > 10 {
            return fail(format!("at most 10 global refinements, got {}", self.n_global_refinements));
        }
        if !self.load_scale.is_finite() {
            return fail(format!("load_scale must be finite, got {}", self.load_scale));
        }
        if self.threads == 0 {
            return fail("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Closed-form element and DoF counts of the finest level.
    pub fn expected_sizes(&self) -> (usize, usize) {
        let m = self.coarse_cells << self.n_global_refinements;
        let d = self.dim as u32;
        (m.pow(d), (m * self.p + 1).pow(d) * self.dim)
    }
}
