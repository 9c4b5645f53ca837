use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use courant_core::fem::MAX_LEVEL;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sl1dVerify,
    GelfandVerify,
    TriangleTables,
    FemTables,
    Inequalities,
    RhombusNeumannCounterexample,
    RhombusNeumannSweep,
    RhombusDirichletSweep,
    ProductLift,
    SphereBounds,
    ReproduceAll,
}

impl Command {
    /// Every command that `reproduce-all` runs, in report order.
    pub const SUITE: [Command; 10] = [
        Command::TriangleTables,
        Command::FemTables,
        Command::Inequalities,
        Command::RhombusNeumannCounterexample,
        Command::RhombusNeumannSweep,
        Command::RhombusDirichletSweep,
        Command::ProductLift,
        Command::Sl1dVerify,
        Command::GelfandVerify,
        Command::SphereBounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Sl1dVerify => "sl1d-verify",
            Command::GelfandVerify => "gelfand-verify",
            Command::TriangleTables => "triangle-tables",
            Command::FemTables => "fem-tables",
            Command::Inequalities => "inequalities",
            Command::RhombusNeumannCounterexample => "rhombus-neumann-counterexample",
            Command::RhombusNeumannSweep => "rhombus-neumann-sweep",
            Command::RhombusDirichletSweep => "rhombus-dirichlet-sweep",
            Command::ProductLift => "product-lift",
            Command::SphereBounds => "sphere-bounds",
            Command::ReproduceAll => "reproduce-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config file {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0} must be positive and finite, got {1}")]
    NotPositive(&'static str, f64),
    #[error("grid needs at least 11 points, got {0}")]
    Grid(usize),
    #[error("mesh level must lie in 1..={MAX_LEVEL}, got {0}")]
    Level(usize),
    #[error("{0} must be at least {1}")]
    TooSmall(&'static str, usize),
    #[error("sphere dimension must be at least 1")]
    Dimension,
    #[error("unknown potential preset {0:?} (expected sine, mathieu:A or custom:K;Q;G)")]
    Preset(String),
}

/// Parameters of one run. Every field has a default, so a config file may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Samples along x for nodal counting.
    pub grid: usize,
    /// Mesh level of the triangle eigenvalue tables.
    pub mesh_level: usize,
    /// Mesh level of the rhombus eigenbases used by the nodal commands.
    pub sweep_level: usize,
    /// Relative tolerance under which two eigenvalues count as equal.
    pub tol: f64,
    pub seed: u64,
    /// Random combinations per Sturm-Liouville problem.
    pub samples: usize,
    pub sweep_points: usize,
    /// Fiber scale of the collapsing product.
    pub epsilon: f64,
    pub d: Option<u64>,
    pub k: Option<u64>,
    pub potentials: Vec<String>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: 801,
            mesh_level: 7,
            sweep_level: 6,
            tol: 1e-4,
            seed: 0,
            samples: 500,
            sweep_points: 101,
            epsilon: 0.1,
            d: None,
            k: None,
            potentials: vec!["sine".into(), "mathieu:10".into()],
            out: PathBuf::from("reports"),
            formats: vec![Format::Json, Format::Csv, Format::Svg],
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("tol", self.tol), ("epsilon", self.epsilon)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::NotPositive(name, v));
            }
        }
        if self.grid < 11 {
            return Err(ConfigError::Grid(self.grid));
        }
        for level in [self.mesh_level, self.sweep_level] {
            if !(1..=MAX_LEVEL).contains(&level) {
                return Err(ConfigError::Level(level));
            }
        }
        if self.samples == 0 {
            return Err(ConfigError::TooSmall("samples", 1));
        }
        if self.sweep_points < 2 {
            return Err(ConfigError::TooSmall("sweep_points", 2));
        }
        if self.d == Some(0) {
            return Err(ConfigError::Dimension);
        }
        for p in &self.potentials {
            crate::commands::parse_potential(p)?;
        }
        Ok(())
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}
