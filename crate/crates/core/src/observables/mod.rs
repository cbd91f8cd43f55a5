//! Admissible cuts, helicity observables, the presymplectic pairing and the
//! Poisson bracket, Hamilton checks and the separation certificate.
//!
//! Everything rests on the one-sided flux
//! `Flux_Σ(v; w) = Σ_{e touching Σ} w(e) · (K_side v)(e)`, the discrete Green
//! identity for ∫_Σ w ∧ ⋆dv. On a bipartition cut it equals
//! `⟨dw, dv⟩_{S⁻} − Σ_{e ∈ E⁻} w(e) (Kv)(e)`.

mod coordinate;
mod hypersurface;
mod separation;

use serde::{Deserialize, Serialize};

pub use coordinate::{commutator_field, helicity_current_coordinate, CommutatorReport, CoordinateCurrent};
pub use hypersurface::{Hypersurface, MixedEdge};
pub use separation::{separation_certificate, separation_threshold, CandidateCut, CandidateGenerator, Separation, SeparationOptions};

use crate::dec::{Cochain, Dec};
use crate::error::{Error, Result};
use crate::ym::{interior_residual, Connection};

fn solution_residual(dec: &Dec, x: &Cochain) -> Result<f64> {
    Ok(interior_residual(dec, &dec.apply_stiffness(x)?))
}

fn check_cut(dec: &Dec, sigma: &Hypersurface) -> Result<()> {
    if sigma.fingerprint() != dec.complex().fingerprint() {
        return Err(Error::ComplexMismatch);
    }
    Ok(())
}

/// One-sided flux Flux_Σ(v; w), the discrete ∫_Σ w ∧ ⋆dv.
pub fn flux_pairing(dec: &Dec, sigma: &Hypersurface, v: &Cochain, w: &Cochain) -> Result<f64> {
    check_cut(dec, sigma)?;
    v.check(dec.complex(), 1)?;
    w.check(dec.complex(), 1)?;
    let mut total = 0.0;
    for m in sigma.mixed_edges() {
        let kv = if m.in_minus {
            -dec.partial_stiffness_at(&m.plus_cells, &v.values, m.edge)
        } else {
            dec.partial_stiffness_at(&m.minus_cells, &v.values, m.edge)
        };
        total += w.values[m.edge] * kv;
    }
    Ok(total)
}

/// ω_Σ(v, w) = ½(Flux_Σ(v; w) − Flux_Σ(w; v)).
pub fn symplectic_pairing(dec: &Dec, sigma: &Hypersurface, v: &Cochain, w: &Cochain) -> Result<f64> {
    Ok(0.5 * (flux_pairing(dec, sigma, v, w)? - flux_pairing(dec, sigma, w, v)?))
}

/// θ_Σ[η](v) = −Flux_Σ(v; η).
pub fn presymplectic_potential(dec: &Dec, sigma: &Hypersurface, eta: &Connection, v: &Cochain) -> Result<f64> {
    Ok(-flux_pairing(dec, sigma, v, &eta.eta())?)
}

/// |ω(v, w) − ½(D_v θ(w) − D_w θ(v))|, with D the exact affine directional
/// derivative in η taken from `eta`.
pub fn theta_identity_residual(dec: &Dec, sigma: &Hypersurface, eta: &Connection, v: &Cochain, w: &Cochain) -> Result<f64> {
    let th = |e: &Connection, x: &Cochain| presymplectic_potential(dec, sigma, e, x);
    let dv_theta_w = th(&eta.shifted(1.0, v)?, w)? - th(eta, w)?;
    let dw_theta_v = th(&eta.shifted(1.0, w)?, v)? - th(eta, v)?;
    let omega = symplectic_pairing(dec, sigma, v, w)?;
    Ok((omega - 0.5 * (dv_theta_w - dw_theta_v)).abs())
}

/// f^φ_Σ(η) = ω_Σ(φ, η) for the full η = η₀ + φ′.
pub fn helicity_observable(dec: &Dec, phi: &Cochain, sigma: &Hypersurface, eta: &Connection) -> Result<f64> {
    symplectic_pairing(dec, sigma, phi, &eta.eta())
}

/// Affine observable `constant + ω_Σ(φ, η)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Observable {
    pub generator: Cochain,
    pub sigma: Hypersurface,
    pub constant: f64,
    pub generator_id: String,
    pub cut_id: String,
    /// max interior |Kφ| at construction.
    pub generator_residual: f64,
}

/// Value of an observable together with residual diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub generator_residual: f64,
    pub connection_residual: f64,
    pub warnings: Vec<String>,
}

impl Observable {
    pub fn new(dec: &Dec, phi: Cochain, sigma: Hypersurface) -> Result<Self> {
        Self::with_ids(dec, phi, sigma, "phi", "sigma")
    }

    pub fn with_ids(dec: &Dec, phi: Cochain, sigma: Hypersurface, generator_id: &str, cut_id: &str) -> Result<Self> {
        check_cut(dec, &sigma)?;
        phi.check(dec.complex(), 1)?;
        let generator_residual = solution_residual(dec, &phi)?;
        Ok(Self {
            generator: phi,
            sigma,
            constant: 0.0,
            generator_id: generator_id.into(),
            cut_id: cut_id.into(),
            generator_residual,
        })
    }

    /// Constant observable on Σ (no generator).
    pub fn constant(dec: &Dec, sigma: Hypersurface, value: f64) -> Result<Self> {
        let mut o = Self::with_ids(dec, dec.zeros(1), sigma, "const", "sigma")?;
        o.constant = value;
        Ok(o)
    }

    pub fn evaluate(&self, dec: &Dec, eta: &Connection) -> Result<f64> {
        Ok(self.constant + helicity_observable(dec, &self.generator, &self.sigma, eta)?)
    }

    /// Evaluation with residual checks; failing residuals produce warnings, not errors.
    pub fn evaluate_checked(&self, dec: &Dec, eta: &Connection, tol: f64) -> Result<Evaluation> {
        let value = self.evaluate(dec, eta)?;
        let connection_residual = solution_residual(dec, &eta.eta())?;
        let mut warnings = Vec::new();
        if self.generator_residual > tol {
            warnings.push(format!("generator is not a solution (residual {:.3e})", self.generator_residual));
        }
        if connection_residual > tol {
            warnings.push(format!("connection is not a solution (residual {connection_residual:.3e})"));
        }
        Ok(Evaluation { value, generator_residual: self.generator_residual, connection_residual, warnings })
    }

    /// Hamiltonian vector field v_φ = −φ, fixed by L_w f + ω(v_φ, w) = 0.
    pub fn hamiltonian_field(&self) -> Cochain {
        self.generator.scale(-1.0)
    }

    /// Exact affine directional derivative f(η + w) − f(η).
    pub fn lie_derivative(&self, dec: &Dec, eta: &Connection, w: &Cochain) -> Result<f64> {
        Ok(self.evaluate(dec, &eta.shifted(1.0, w)?)? - self.evaluate(dec, eta)?)
    }

    /// Central difference (f(η + εw) − f(η − εw)) / 2ε.
    pub fn lie_derivative_fd(&self, dec: &Dec, eta: &Connection, w: &Cochain, eps: f64) -> Result<f64> {
        let fp = self.evaluate(dec, &eta.shifted(eps, w)?)?;
        let fm = self.evaluate(dec, &eta.shifted(-eps, w)?)?;
        Ok((fp - fm) / (2.0 * eps))
    }
}

fn same_cut(a: &Observable, b: &Observable) -> Result<()> {
    if a.sigma != b.sigma {
        return Err(Error::InvalidHypersurface("observables live on different cuts".into()));
    }
    Ok(())
}

/// {f^φ, f^φ′}_Σ = ω_Σ(v_φ, v_φ′), a constant.
pub fn poisson_bracket(dec: &Dec, a: &Observable, b: &Observable) -> Result<f64> {
    same_cut(a, b)?;
    symplectic_pairing(dec, &a.sigma, &a.hamiltonian_field(), &b.hamiltonian_field())
}

/// The bracket as a (constant) observable.
pub fn bracket_observable(dec: &Dec, a: &Observable, b: &Observable) -> Result<Observable> {
    let value = poisson_bracket(dec, a, b)?;
    let mut o = Observable::constant(dec, a.sigma.clone(), value)?;
    o.generator_id = format!("{{{},{}}}", a.generator_id, b.generator_id);
    o.cut_id = a.cut_id.clone();
    Ok(o)
}

/// |L_w f(η) + ω(v_φ, w)|.
pub fn hamilton_check(dec: &Dec, obs: &Observable, eta: &Connection, w: &Cochain) -> Result<f64> {
    let lie = obs.lie_derivative(dec, eta, w)?;
    let omega = symplectic_pairing(dec, &obs.sigma, &obs.hamiltonian_field(), w)?;
    Ok((lie + omega).abs())
}

/// Exported evaluation record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub generator_id: String,
    pub cut_id: String,
    pub connection_id: String,
    pub value: f64,
    pub residuals: Residuals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub generator: f64,
    pub connection: f64,
}

impl ObservableRecord {
    pub fn new(obs: &Observable, connection_id: &str, eval: &Evaluation) -> Self {
        Self {
            generator_id: obs.generator_id.clone(),
            cut_id: obs.cut_id.clone(),
            connection_id: connection_id.into(),
            value: eval.value,
            residuals: Residuals { generator: eval.generator_residual, connection: eval.connection_residual },
        }
    }

    pub const CSV_HEADER: &'static str = "generator_id,cut_id,connection_id,value,generator_residual,connection_residual";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e}",
            self.generator_id, self.cut_id, self.connection_id, self.value, self.residuals.generator, self.residuals.connection
        )
    }
}
