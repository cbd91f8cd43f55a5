//! Refinement studies: one error per resolution plus a fitted order.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use ym_helix::geometry::{build_box, build_flat_torus};
use ym_helix::observables::{helicity_current_coordinate, symplectic_pairing};
use ym_helix::solver::SolverConfig;
use ym_helix::ym::Connection;
use ym_helix::{Cochain, Dec, Error, Result};

use crate::blocks::{default_cut, deformed_cuts, random_solution};
use crate::config::{stream, StudyKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub resolution: usize,
    pub h: f64,
    pub value: f64,
    pub reference: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub kind: StudyKind,
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of log(error) against log(h); None when an error is zero.
    pub order: Option<f64>,
    pub decreasing: bool,
}

impl Study {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut text = String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        text.push_str(&format!("# fitted order,{}\n", self.order.map_or("nan".to_string(), |o| o.to_string())));
        Ok(text)
    }
}

pub fn fitted_order(h: &[f64], err: &[f64]) -> Option<f64> {
    if h.len() < 2 || err.iter().any(|&e| e <= 0.0) {
        return None;
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

/// φ and A used by the current study: smooth, non-closed, not solutions.
pub fn smooth_pair(dec: &Dec) -> (Cochain, Connection) {
    let phi = dec.sample_one_form(|x| vec![(PI * x[1]).sin(), x[0] * (PI * x[2]).cos(), x[0] * x[1]]);
    let a = dec.sample_one_form(|x| vec![x[1] * x[1], x[2], (PI * x[0]).sin() * x[2]]);
    (phi, Connection::from_phi(a))
}

fn row(kind: StudyKind, r: usize, seed: u64, cfg: &SolverConfig) -> Result<StudyRow> {
    let h = 1.0 / r as f64;
    match kind {
        StudyKind::Helicity => {
            let (c, m) = build_flat_torus(3, &[r, r, r], &[2.0 * PI; 3])?;
            let dec = Dec::new(c, m);
            let a = dec.sample_one_form(|x| vec![x[2].cos(), x[2].sin(), 0.0]);
            let value = dec.integrate_top(&dec.cup(&a, &dec.d(&a)?)?)?;
            let reference = -(2.0 * PI).powi(3);
            Ok(StudyRow { resolution: r, h, value, reference, error: (value - reference).abs() })
        }
        StudyKind::Current => {
            if r % 2 != 0 {
                return Err(Error::InvalidParameter("current study needs even resolutions".into()));
            }
            let (c, m) = build_box(3, &[r, r, r], &[1.0; 3])?;
            let dec = Dec::new(c, m);
            let (phi, a) = smooth_pair(&dec);
            let cur = helicity_current_coordinate(&dec, &phi, &a, 0, r / 2)?;
            Ok(StudyRow { resolution: r, h, value: cur.integral, reference: cur.pairing, error: cur.discrepancy })
        }
        StudyKind::Conservation => {
            let (c, m) = build_box(3, &[r, r, r], &[1.0; 3])?;
            let dec = Dec::new(c, m);
            let (_, base) = default_cut(&dec)?;
            let mut rng = stream(seed, 2000 + r as u64);
            let cuts = deformed_cuts(&dec, &base, &mut rng, 4);
            if cuts.len() < 3 {
                return Err(Error::InvalidParameter(format!("resolution {r} leaves no room to deform the cut")));
            }
            let v = random_solution(&dec, &mut rng, cfg)?;
            let w = random_solution(&dec, &mut rng, cfg)?;
            let vals: Vec<f64> = cuts.iter().map(|s| symplectic_pairing(&dec, s, &v, &w)).collect::<Result<_>>()?;
            let spread = vals.iter().map(|x| (x - vals[0]).abs()).fold(0.0, f64::max) / vals[0].abs().max(f64::MIN_POSITIVE);
            Ok(StudyRow { resolution: r, h, value: vals[0], reference: vals[0], error: spread })
        }
    }
}

pub fn refinement_study(kind: StudyKind, resolutions: &[usize], seed: u64, cfg: &SolverConfig) -> Result<Study> {
    if resolutions.len() < 3 {
        return Err(Error::InvalidParameter("a refinement study needs at least three resolutions".into()));
    }
    let rows = resolutions.iter().map(|&r| row(kind, r, seed, cfg)).collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let decreasing = err.windows(2).all(|w| w[1] < w[0]);
    Ok(Study { kind, order: fitted_order(&h, &err), decreasing, rows })
}
