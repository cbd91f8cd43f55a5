//! Discrete abelian Yang–Mills: solutions with prescribed boundary values, gauge
//! transformations and Lorentz gauge fixing, harmonic fields, the
//! Hodge–Morrey–Friedrichs splitting and the boundary-conditions map.

mod harmonic;

use serde::{Deserialize, Serialize};

pub use harmonic::{boundary_map, harmonic_basis, hmf_decompose, hmf_decompose_with, moduli_report, BoundaryMap, HmfDecomposition, ModuliReport};

use crate::dec::{Cochain, Dec};
use crate::error::{Error, Result};
use crate::geometry::betti_numbers;
use crate::solver::{solve_spsd, SolveReport, SolverConfig};

/// Boundary conditions for gauge fixing and harmonic fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Relative conditions: ψ = 0 on ∂U, tangential trace zero.
    Dirichlet,
    /// Absolute conditions: natural (normal) boundary conditions.
    Neumann,
}

/// Which gauge group a comparison is taken modulo.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeGroup {
    /// Vertex functions vanishing on ∂U.
    #[default]
    Interior,
    /// All vertex functions.
    Free,
}

/// η = η₀ + φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub eta0: Cochain,
    pub phi: Cochain,
}

impl Connection {
    pub fn new(eta0: Cochain, phi: Cochain) -> Result<Self> {
        if eta0.degree != 1 || phi.degree != 1 {
            return Err(Error::DegreeMismatch { expected: 1, found: if eta0.degree != 1 { eta0.degree } else { phi.degree } });
        }
        if eta0.fingerprint() != phi.fingerprint() || eta0.len() != phi.len() {
            return Err(Error::ComplexMismatch);
        }
        Ok(Self { eta0, phi })
    }

    /// Connection with zero base.
    pub fn from_phi(phi: Cochain) -> Self {
        let eta0 = phi.scale(0.0);
        Self { eta0, phi }
    }

    pub fn zero(dec: &Dec) -> Self {
        Self::from_phi(dec.zeros(1))
    }

    pub fn eta(&self) -> Cochain {
        self.eta0.add(&self.phi).expect("same complex by construction")
    }

    /// Same η written over a different base η₀′.
    pub fn rebase(&self, eta0: Cochain) -> Result<Self> {
        let phi = self.eta().sub(&eta0)?;
        Self::new(eta0, phi)
    }

    /// η + t·w, keeping the base.
    pub fn shifted(&self, t: f64, w: &Cochain) -> Result<Self> {
        Ok(Self { eta0: self.eta0.clone(), phi: self.phi.axpy(t, w)? })
    }
}

/// Gauge transformation η ↦ η + df.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeTransformation {
    pub f: Cochain,
}

impl GaugeTransformation {
    pub fn new(dec: &Dec, f: Cochain) -> Result<Self> {
        f.check(dec.complex(), 0)?;
        Ok(Self { f })
    }

    /// Interior transformation obtained by zeroing `f` on boundary vertices.
    pub fn interior(dec: &Dec, mut f: Cochain) -> Result<Self> {
        f.check(dec.complex(), 0)?;
        for v in dec.complex().boundary_indices(0) {
            f.values[v] = 0.0;
        }
        Ok(Self { f })
    }

    /// Whether f vanishes on every boundary vertex (an element of the interior group).
    pub fn is_interior(&self, dec: &Dec) -> bool {
        dec.complex().boundary_indices(0).iter().all(|&v| self.f.values[v] == 0.0)
    }

    pub fn apply(&self, dec: &Dec, eta: &Connection) -> Result<Connection> {
        let df = dec.d(&self.f)?;
        eta.shifted(1.0, &df)
    }
}

/// Dirichlet trace (values on boundary edges) and Neumann trace ((Kη)(e) on
/// boundary edges), both in the order of `boundary_indices(1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub degree: usize,
    pub dirichlet: Vec<f64>,
    pub neumann: Vec<f64>,
}

impl BoundaryData {
    pub fn of(dec: &Dec, eta: &Cochain) -> Result<Self> {
        eta.check(dec.complex(), 1)?;
        let bdry = dec.complex().boundary_indices(1);
        let k = dec.apply_stiffness(eta)?;
        Ok(Self {
            degree: 1,
            dirichlet: bdry.iter().map(|&e| eta.values[e]).collect(),
            neumann: bdry.iter().map(|&e| k.values[e]).collect(),
        })
    }

    pub fn validate(&self, dec: &Dec) -> Result<()> {
        let nb = dec.complex().boundary_indices(1).len();
        for part in [&self.dirichlet, &self.neumann] {
            if part.len() != nb {
                return Err(Error::LengthMismatch { expected: nb, found: part.len() });
            }
        }
        Ok(())
    }

    /// Largest entrywise difference of the Dirichlet and Neumann parts.
    pub fn max_difference(&self, other: &Self) -> (f64, f64) {
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        (diff(&self.dirichlet, &other.dirichlet), diff(&self.neumann, &other.neumann))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(dec: &Dec, s: &str) -> Result<Self> {
        let b: Self = serde_json::from_str(s)?;
        b.validate(dec)?;
        Ok(b)
    }
}

/// Dirichlet trace of a 1-cochain.
pub fn dirichlet_trace(dec: &Dec, eta: &Cochain) -> Result<Vec<f64>> {
    eta.check(dec.complex(), 1)?;
    Ok(dec.complex().boundary_indices(1).iter().map(|&e| eta.values[e]).collect())
}

/// Solve (Kφ)(e) = 0 on interior edges with φ = `dirichlet` on boundary edges,
/// then fix the interior gauge by the Dirichlet Lorentz condition. The report's
/// `kernel_dim` is dim H¹_D = b₁(U, ∂U), the remaining non-uniqueness.
pub fn solve_ym(dec: &Dec, dirichlet: &[f64], cfg: &SolverConfig) -> Result<(Connection, SolveReport)> {
    let bdry = dec.complex().boundary_indices(1);
    if dirichlet.len() != bdry.len() {
        return Err(Error::LengthMismatch { expected: bdry.len(), found: dirichlet.len() });
    }
    let fixed: Vec<(usize, f64)> = bdry.iter().copied().zip(dirichlet.iter().copied()).collect();
    let zero = vec![0.0; dec.complex().count(1)];
    let (phi, mut report) = solve_spsd(dec.stiffness(), &zero, &fixed, cfg)?;
    let phi = dec.cochain(1, phi);
    let (phi, _psi, gauge_report) = lorentz_gauge_fix(dec, &phi, Flavor::Dirichlet, cfg)?;
    report.iterations += gauge_report.iterations;
    report.wall_time_s += gauge_report.wall_time_s;
    report.kernel_dim = Some(betti_numbers(dec.complex(), true)[1]);
    Ok((Connection::from_phi(phi), report))
}

/// Largest |(Kη)(e)| over interior edges, and whether it is within `tol`.
pub fn is_solution(dec: &Dec, eta: &Connection, tol: f64) -> Result<(bool, f64)> {
    let k = dec.apply_stiffness(&eta.eta())?;
    let r = interior_residual(dec, &k);
    Ok((r <= tol, r))
}

pub(crate) fn interior_residual(dec: &Dec, k_eta: &Cochain) -> f64 {
    dec.complex().interior_indices(1).iter().fold(0.0f64, |m, &e| m.max(k_eta.values[e].abs()))
}

/// Lorentz gauge fixing: solve dᵀ⋆₁dψ = dᵀ⋆₁φ (at interior vertices with ψ|∂U = 0,
/// or at all vertices with mean-zero ψ) and return (φ − dψ, ψ).
pub fn lorentz_gauge_fix(dec: &Dec, phi: &Cochain, flavor: Flavor, cfg: &SolverConfig) -> Result<(Cochain, Cochain, SolveReport)> {
    phi.check(dec.complex(), 1)?;
    let rhs = dec.weak_divergence(phi)?;
    if flavor == Flavor::Neumann {
        // compatibility: the right-hand side must be orthogonal to constants
        let total: f64 = rhs.iter().sum();
        let scale = 2.0 * dec.star(1).apply(&phi.values).iter().map(|v| v.abs()).sum::<f64>();
        if total.abs() > 1e-8 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!("Neumann data not mean-zero ({total:e})")));
        }
    }
    let (psi, report) = solve_vertex_laplacian(dec, &rhs, flavor, cfg)?;
    let fixed_phi = phi.sub(&dec.d(&psi)?)?;
    Ok((fixed_phi, psi, report))
}

/// Solve dᵀ⋆₁dψ = rhs with ψ = 0 on ∂U (Dirichlet) or free (Neumann). On
/// components without fixed vertices the right-hand side is projected onto
/// mean zero first and ψ is returned with mean zero.
pub(crate) fn solve_vertex_laplacian(dec: &Dec, rhs: &[f64], flavor: Flavor, cfg: &SolverConfig) -> Result<(Cochain, SolveReport)> {
    let c = dec.complex();
    let fixed_flags: Vec<bool> = match flavor {
        Flavor::Dirichlet => c.boundary_flags(0).to_vec(),
        Flavor::Neumann => vec![false; c.num_vertices()],
    };
    let fixed: Vec<(usize, f64)> = (0..c.num_vertices()).filter(|&v| fixed_flags[v]).map(|v| (v, 0.0)).collect();
    let comps = vertex_components(dec);
    let ncomp = comps.iter().copied().max().map_or(0, |m| m + 1);
    let mut anchored = vec![false; ncomp];
    let mut sums = vec![0.0; ncomp];
    let mut counts = vec![0usize; ncomp];
    for v in 0..c.num_vertices() {
        anchored[comps[v]] |= fixed_flags[v];
        sums[comps[v]] += rhs[v];
        counts[comps[v]] += 1;
    }
    let b: Vec<f64> = (0..rhs.len())
        .map(|v| if anchored[comps[v]] { rhs[v] } else { rhs[v] - sums[comps[v]] / counts[comps[v]] as f64 })
        .collect();
    let (mut psi, report) = solve_spsd(&dec.laplacian0(), &b, &fixed, cfg)?;
    let mut means = vec![0.0; ncomp];
    for v in 0..psi.len() {
        means[comps[v]] += psi[v] / counts[comps[v]] as f64;
    }
    for v in 0..psi.len() {
        if !anchored[comps[v]] {
            psi[v] -= means[comps[v]];
        }
    }
    Ok((dec.cochain(0, psi), report))
}

/// Connected-component label of each vertex.
pub(crate) fn vertex_components(dec: &Dec) -> Vec<usize> {
    let c = dec.complex();
    let mut parent: Vec<usize> = (0..c.num_vertices()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in c.simplices(1) {
        let (a, b) = (root(&mut parent, e[0]), root(&mut parent, e[1]));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut label = vec![usize::MAX; parent.len()];
    let mut next = 0;
    (0..parent.len())
        .map(|v| {
            let r = root(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            label[r]
        })
        .collect()
}

/// Result of [`gauge_equivalent`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugeVerdict {
    pub equivalent: bool,
    /// f with η′ − η ≈ df when equivalent.
    pub witness: Option<Cochain>,
    /// max |df − (η′ − η)|.
    pub residual: f64,
}

/// Whether η′ − η = df for some f in the chosen gauge group, found by the
/// least-squares problem dᵀ⋆₁(df − (η′ − η)) = 0.
pub fn gauge_equivalent(
    dec: &Dec,
    eta: &Connection,
    eta2: &Connection,
    group: GaugeGroup,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<GaugeVerdict> {
    let diff = eta2.eta().sub(&eta.eta())?;
    let rhs = dec.weak_divergence(&diff)?;
    let flavor = match group {
        GaugeGroup::Interior => Flavor::Dirichlet,
        GaugeGroup::Free => Flavor::Neumann,
    };
    let (f, _) = solve_vertex_laplacian(dec, &rhs, flavor, cfg)?;
    let residual = dec.d(&f)?.sub(&diff)?.norm_inf();
    let equivalent = residual <= tol * (1.0 + diff.norm_inf());
    Ok(GaugeVerdict { equivalent, witness: equivalent.then_some(f), residual })
}

/// The radial (Euler) variation along η: the fibre coordinates of η itself.
pub fn radial_variation(eta: &Connection) -> Cochain {
    eta.eta()
}

/// Interior-vertex residual max |(δφ)(v)| of the Lorentz condition.
pub fn lorentz_residual(dec: &Dec, phi: &Cochain, flavor: Flavor) -> Result<f64> {
    let div = dec.weak_divergence(phi)?;
    let m0 = dec.star(0).weights().expect("diagonal vertex star");
    let flags = dec.complex().boundary_flags(0);
    Ok((0..div.len())
        .filter(|&v| flavor == Flavor::Neumann || !flags[v])
        .fold(0.0f64, |m, v| m.max((div[v] / m0[v]).abs())))
}

/// ‖dφ‖ in the Hodge norm.
pub fn curvature_norm(dec: &Dec, phi: &Cochain) -> Result<f64> {
    dec.norm(&dec.d(phi)?)
}
