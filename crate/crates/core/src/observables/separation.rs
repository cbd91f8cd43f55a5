use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{helicity_observable, Hypersurface};
use crate::dec::{Cochain, Dec};
use crate::error::{Error, Result};
use crate::solver::SolverConfig;
use crate::ym::{dirichlet_trace, gauge_equivalent, harmonic_basis, solve_ym, Connection, Flavor, GaugeGroup};

/// Candidate generator in the canonical search order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateGenerator {
    /// i-th basis field of H¹_N.
    HarmonicNeumann(usize),
    /// i-th basis field of H¹_D.
    HarmonicDirichlet(usize),
    /// Solution with the Dirichlet data of the constant form dx_i.
    Coordinate(usize),
    /// Solution with the Dirichlet data of x_j dx_i.
    Linear(usize, usize),
}

impl fmt::Display for CandidateGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HarmonicNeumann(i) => write!(f, "harmonic{i}"),
            Self::HarmonicDirichlet(i) => write!(f, "dirichlet{i}"),
            Self::Coordinate(i) => write!(f, "dx{i}"),
            Self::Linear(i, j) => write!(f, "x{j}dx{i}"),
        }
    }
}

impl FromStr for CandidateGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown generator '{s}'"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        if let Some(r) = s.strip_prefix("harmonic") {
            Ok(Self::HarmonicNeumann(num(r)?))
        } else if let Some(r) = s.strip_prefix("dirichlet") {
            Ok(Self::HarmonicDirichlet(num(r)?))
        } else if let Some(r) = s.strip_prefix("dx") {
            Ok(Self::Coordinate(num(r)?))
        } else if let Some((j, i)) = s.strip_prefix('x').and_then(|r| r.split_once("dx")) {
            Ok(Self::Linear(num(i)?, num(j)?))
        } else {
            Err(bad())
        }
    }
}

impl CandidateGenerator {
    /// Canonical list for a mesh of dimension n with the given harmonic dimensions.
    pub fn canonical(n: usize, h1_neumann: usize, h1_dirichlet: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (0..h1_neumann).map(Self::HarmonicNeumann).collect();
        out.extend((0..h1_dirichlet).map(Self::HarmonicDirichlet));
        out.extend((0..n).map(Self::Coordinate));
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                out.push(Self::Linear(i, j));
            }
        }
        out
    }

    /// The generating solution.
    pub fn build(&self, dec: &Dec, cfg: &SolverConfig) -> Result<Cochain> {
        let n = dec.dim();
        let from_form = |coef: &dyn Fn(&[f64]) -> Vec<f64>| -> Result<Cochain> {
            let sampled = dec.sample_one_form(coef);
            let trace = dirichlet_trace(dec, &sampled)?;
            Ok(solve_ym(dec, &trace, cfg)?.0.eta())
        };
        let pick = |flavor: Flavor, i: usize| -> Result<Cochain> {
            harmonic_basis(dec, flavor, cfg)?
                .into_iter()
                .nth(i)
                .ok_or_else(|| Error::InvalidParameter(format!("no generator {self}")))
        };
        match *self {
            Self::HarmonicNeumann(i) => pick(Flavor::Neumann, i),
            Self::HarmonicDirichlet(i) => pick(Flavor::Dirichlet, i),
            Self::Coordinate(i) if i < n => from_form(&|_| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()),
            Self::Linear(i, j) if i < n && j < n => {
                from_form(&|x| (0..n).map(|k| if k == i { x[j] } else { 0.0 }).collect())
            }
            _ => Err(Error::InvalidParameter(format!("generator {self} needs a higher dimension"))),
        }
    }
}

/// Candidate cut, described by the level set that induces it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CandidateCut {
    /// Cells with barycentric x_axis < level.
    Level { axis: usize, level: f64 },
    /// Cells with barycentric distance from the z-axis < radius.
    Radial { radius: f64 },
    /// The half-plane at angle θ around the z-axis.
    Angle { theta: f64 },
}

impl fmt::Display for CandidateCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const AXES: [&str; 4] = ["x", "y", "z", "w"];
        match self {
            Self::Level { axis, level } => write!(f, "{}:{level}", AXES.get(*axis).copied().unwrap_or("?")),
            Self::Radial { radius } => write!(f, "radial:{radius}"),
            Self::Angle { theta } => write!(f, "angle:{theta}"),
        }
    }
}

impl FromStr for CandidateCut {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cut must look like x:0.5, radial:1.5 or angle:0, got '{s}'"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.parse().map_err(|_| bad())?;
        match kind {
            "x" => Ok(Self::Level { axis: 0, level: value }),
            "y" => Ok(Self::Level { axis: 1, level: value }),
            "z" => Ok(Self::Level { axis: 2, level: value }),
            "w" => Ok(Self::Level { axis: 3, level: value }),
            "radial" => Ok(Self::Radial { radius: value }),
            "angle" => Ok(Self::Angle { theta: value }),
            _ => Err(bad()),
        }
    }
}

impl CandidateCut {
    pub fn build(&self, dec: &Dec) -> Result<Hypersurface> {
        let xs = dec.metric().vertex_coords();
        match *self {
            Self::Level { axis, level } => {
                if axis >= dec.dim() {
                    return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
                }
                let field: Vec<f64> = xs.iter().map(|x| x[axis]).collect();
                Hypersurface::cut_from_level(dec.complex(), &field, level)
            }
            Self::Radial { radius } => {
                let field: Vec<f64> = xs.iter().map(|x| x[0].hypot(x[1])).collect();
                Hypersurface::cut_from_level(dec.complex(), &field, radius)
            }
            Self::Angle { theta } => Hypersurface::angle_cut(dec.complex(), dec.metric(), theta),
        }
    }

    /// Canonical list: coordinate levels at 1/8, 1/4, 1/2, 3/4, 7/8 of the
    /// bounding box, radial mid-levels and four angle cuts. Candidates that do not
    /// produce an admissible cut on a given mesh are skipped by the search.
    pub fn canonical(dec: &Dec) -> Vec<Self> {
        let xs = dec.metric().vertex_coords();
        let n = dec.dim();
        let mut out = Vec::new();
        let fractions = [0.5, 0.25, 0.75, 0.125, 0.875];
        for axis in 0..n {
            let lo = xs.iter().map(|x| x[axis]).fold(f64::INFINITY, f64::min);
            let hi = xs.iter().map(|x| x[axis]).fold(f64::NEG_INFINITY, f64::max);
            for f in fractions {
                out.push(Self::Level { axis, level: lo + f * (hi - lo) });
            }
        }
        let r: Vec<f64> = xs.iter().map(|x| x[0].hypot(x[1])).collect();
        let (rlo, rhi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        for f in fractions {
            out.push(Self::Radial { radius: rlo + f * (rhi - rlo) });
        }
        for k in 0..4 {
            out.push(Self::Angle { theta: k as f64 * PI / 2.0 });
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationOptions {
    /// Defaults to [`separation_threshold`].
    pub threshold: Option<f64>,
    pub gauge_group: GaugeGroup,
    pub gauge_tol: f64,
    pub generators: Option<Vec<CandidateGenerator>>,
    pub cuts: Option<Vec<CandidateCut>>,
    pub solver: SolverConfig,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        Self {
            threshold: None,
            gauge_group: GaugeGroup::Interior,
            gauge_tol: 1e-8,
            generators: None,
            cuts: None,
            solver: SolverConfig::default(),
        }
    }
}

/// Outcome of the separation search.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Separation {
    GaugeWitness {
        witness: Cochain,
        residual: f64,
    },
    Separated {
        generator: CandidateGenerator,
        cut: CandidateCut,
        value: f64,
        value_other: f64,
        difference: f64,
        threshold: f64,
    },
    Undecided {
        threshold: f64,
        pairs_tried: usize,
        max_difference: f64,
    },
}

/// 1e−6 · (‖η‖ + ‖η′‖ + 1) in the mass norm.
pub fn separation_threshold(dec: &Dec, eta: &Connection, eta2: &Connection) -> Result<f64> {
    Ok(1e-6 * (dec.norm(&eta.eta())? + dec.norm(&eta2.eta())? + 1.0))
}

/// Gauge witness if one exists; otherwise the first (generator, cut) pair in
/// canonical order whose observable tells η and η′ apart.
pub fn separation_certificate(dec: &Dec, eta: &Connection, eta2: &Connection, opts: &SeparationOptions) -> Result<Separation> {
    let verdict = gauge_equivalent(dec, eta, eta2, opts.gauge_group, opts.gauge_tol, &opts.solver)?;
    if let Some(witness) = verdict.witness {
        return Ok(Separation::GaugeWitness { witness, residual: verdict.residual });
    }
    let threshold = match opts.threshold {
        Some(t) => t,
        None => separation_threshold(dec, eta, eta2)?,
    };
    let generators = match &opts.generators {
        Some(g) => g.clone(),
        None => {
            let hn = harmonic_basis(dec, Flavor::Neumann, &opts.solver)?.len();
            let hd = harmonic_basis(dec, Flavor::Dirichlet, &opts.solver)?.len();
            CandidateGenerator::canonical(dec.dim(), hn, hd)
        }
    };
    let cut_specs = opts.cuts.clone().unwrap_or_else(|| CandidateCut::canonical(dec));
    let cuts: Vec<(CandidateCut, Hypersurface)> =
        cut_specs.into_iter().filter_map(|c| c.build(dec).ok().map(|s| (c, s))).collect();

    let mut tried = 0;
    let mut max_difference = 0.0f64;
    for g in generators {
        let phi = g.build(dec, &opts.solver)?;
        for (c, sigma) in &cuts {
            let value = helicity_observable(dec, &phi, sigma, eta)?;
            let value_other = helicity_observable(dec, &phi, sigma, eta2)?;
            let difference = (value - value_other).abs();
            tried += 1;
            max_difference = max_difference.max(difference);
            if difference > threshold {
                return Ok(Separation::Separated { generator: g, cut: *c, value, value_other, difference, threshold });
            }
        }
    }
    Ok(Separation::Undecided { threshold, pairs_tried: tried, max_difference })
}
