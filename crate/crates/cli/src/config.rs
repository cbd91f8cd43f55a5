//! Experiment configuration: everything needed to reproduce a report.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use ym_helix::geometry::{
    build_annulus, build_box, build_flat_torus, build_solid_torus, MeshJson, MetricData, SimplicialComplex,
};
use ym_helix::solver::SolverConfig;
use ym_helix::{Dec, Error, Result};

/// A named standard mesh at a resolution, or a mesh file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub name: String,
    pub res: usize,
}

pub const MESH_NAMES: [&str; 5] = ["box2", "box3", "annulus", "solid-torus", "torus3"];

impl MeshSpec {
    pub fn new(name: &str, res: Option<usize>) -> Result<Self> {
        let default = match name {
            "box2" => 8,
            "box3" => 4,
            "annulus" => 3,
            "solid-torus" => 2,
            "torus3" => 4,
            _ if name.ends_with(".json") => 0,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown mesh '{name}' (expected one of {} or a .json mesh file)",
                    MESH_NAMES.join(", ")
                )))
            }
        };
        Ok(Self { name: name.to_string(), res: res.unwrap_or(default) })
    }

    /// Annulus: `res` radial layers and 6·res sectors. Solid torus: `res`
    /// cross-section cells per side and 4·res sectors (at least 6).
    pub fn build(&self) -> Result<(SimplicialComplex, MetricData)> {
        let r = self.res;
        if r == 0 && !self.name.ends_with(".json") {
            return Err(Error::InvalidParameter("resolution must be positive".into()));
        }
        match self.name.as_str() {
            "box2" => build_box(2, &[r, r], &[1.0, 1.0]),
            "box3" => build_box(3, &[r, r, r], &[1.0; 3]),
            "annulus" => build_annulus(r, 6 * r),
            "solid-torus" => build_solid_torus((4 * r).max(6), r),
            "torus3" => build_flat_torus(3, &[r, r, r], &[2.0 * PI; 3]),
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidParameter(format!("cannot read {path}: {e}")))?;
                MeshJson::from_json(&text)?.to_mesh()
            }
        }
    }

    pub fn dec(&self) -> Result<Dec> {
        let (c, m) = self.build()?;
        Ok(Dec::new(c, m))
    }

    pub fn is_box(&self) -> bool {
        self.name == "box2" || self.name == "box3"
    }
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.res)
    }
}

/// Pass/fail thresholds of the checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Interior residual max |Kφ| of a solve.
    pub residual: f64,
    /// Seconds per solve.
    pub solve_seconds: f64,
    /// Relative spread of the pairing across homologous cuts.
    pub conservation: f64,
    /// Relative change under interior gauge transformations.
    pub gauge: f64,
    pub hamilton: f64,
    /// Bracket against the directional derivative.
    pub bracket: f64,
    /// Reconstruction and orthogonality of the decomposition.
    pub decomposition: f64,
    /// Relative error of the Aharonov–Bohm difference against the holonomy oracle.
    pub aharonov_bohm: f64,
    /// Minimal fitted order of the coordinate current discrepancy.
    pub current_order: f64,
    /// Interface trace agreement when gluing solutions.
    pub trace: f64,
    /// Lorentz-gauge residual.
    pub lorentz: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            solve_seconds: 10.0,
            conservation: 1e-10,
            gauge: 1e-10,
            hamilton: 1e-11,
            bracket: 1e-12,
            decomposition: 1e-8,
            aharonov_bohm: 0.05,
            current_order: 0.8,
            trace: 1e-9,
            lorentz: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// η and η shifted by a harmonic Dirichlet field.
    AharonovBohm,
    /// η and an interior gauge transform of it.
    Gauge,
    /// Two independent random solutions.
    Random,
}

impl FromStr for PairKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aharonov-bohm" | "ab" => Ok(Self::AharonovBohm),
            "gauge" => Ok(Self::Gauge),
            "random" => Ok(Self::Random),
            _ => Err(Error::InvalidParameter(format!("unknown pair '{s}' (aharonov-bohm, gauge, random)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GluePair {
    /// Two unit squares side by side.
    Squares,
    /// Two unit cubes side by side.
    Cubes,
    /// A box glued to itself end to end.
    Ring,
}

impl FromStr for GluePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squares" => Ok(Self::Squares),
            "cubes" => Ok(Self::Cubes),
            "ring" => Ok(Self::Ring),
            _ => Err(Error::InvalidParameter(format!("unknown gluing pair '{s}' (squares, cubes, ring)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    /// Helicity of cos z dx + sin z dy on the periodic 3-box against −(2π)³.
    Helicity,
    /// Coordinate current against the flux pairing on the unit cube.
    Current,
    /// Spread of the pairing over deformed cuts.
    Conservation,
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "helicity" => Ok(Self::Helicity),
            "current" | "flux" => Ok(Self::Current),
            "conservation" => Ok(Self::Conservation),
            _ => Err(Error::InvalidParameter(format!("unknown study '{s}' (helicity, current, conservation)"))),
        }
    }
}

/// The experiment and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Mesh,
    Solve { data: String },
    GaugeFix { flavor: String },
    Decompose { samples: usize },
    Harmonic,
    BoundaryMap,
    Observe { generator: String, cut: String, connection: Option<PathBuf> },
    Bracket { gen1: String, gen2: String, cut: String },
    Hamilton { generator: String, cut: String, trials: usize },
    Separate { pair: Option<PairKind>, connection: Option<PathBuf>, other: Option<PathBuf> },
    Glue { pair: Option<GluePair>, first: Option<PathBuf>, second: Option<PathBuf>, map: Option<PathBuf> },
    /// Per-mesh suite when a mesh is given, the standard suite otherwise.
    Verify,
    Study { study: StudyKind, resolutions: Vec<usize> },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Mesh => "mesh",
            Self::Solve { .. } => "solve",
            Self::GaugeFix { .. } => "gauge-fix",
            Self::Decompose { .. } => "decompose",
            Self::Harmonic => "harmonic",
            Self::BoundaryMap => "boundary-map",
            Self::Observe { .. } => "observe",
            Self::Bracket { .. } => "bracket",
            Self::Hamilton { .. } => "hamilton",
            Self::Separate { .. } => "separate",
            Self::Glue { .. } => "glue",
            Self::Verify => "verify",
            Self::Study { .. } => "study",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub mesh: Option<MeshSpec>,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Worker threads for independent experiments; 1 runs everything in order.
    #[serde(default = "one")]
    pub threads: usize,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, mesh: Option<MeshSpec>, seed: u64) -> Self {
        Self { experiment, mesh, seed, tolerances: Tolerances::default(), solver: SolverConfig::default(), threads: 1 }
    }

    pub fn mesh(&self) -> Result<&MeshSpec> {
        self.mesh.as_ref().ok_or_else(|| Error::InvalidParameter(format!("{} needs --mesh", self.experiment.name())))
    }
}

/// Independent random stream for the `stream`-th input of an experiment.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
