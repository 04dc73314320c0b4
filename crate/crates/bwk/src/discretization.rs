//! Price meshes and discretization-error accounting.
//!
//! Arm `x` eps-covers arm `y` when, on every resource both arms touch,
//! `x` consumes at least as much as `y` and its reward-per-unit ratio is
//! at most `eps` worse. Restricting the benchmark LP to a subset that
//! covers every arm loses at most `eps * d * B` of LP value, so a mesh
//! whose covering radius is `eps` caps the price of discretizing a
//! continuum of prices.
//!
//! The time resource is skipped in cover checks: its column is the same
//! constant for every arm, so the dominance condition holds with equality
//! and the ratio condition is never the binding one for arms that consume
//! anything else.

use crate::error::{Error, Result};
use crate::lp::solve_primal;
use crate::model::LatentStructure;

/// Comparison slack for the cover conditions.
const COVER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Multiples of `eps` inside [0, 1].
    Additive,
    /// Points `1 / (1 + eps * l)` down to a floor price.
    Hyperbolic,
    /// Caller-supplied points.
    Explicit,
}

/// A finite, ascending set of prices in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    kind: MeshKind,
    points: Vec<f64>,
}

impl Mesh {
    /// `{0, eps, 2*eps, ...}` up to 1. Size `floor(1/eps) + 1`.
    pub fn additive(eps: f64) -> Result<Mesh> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid("additive mesh needs eps in (0,1]"));
        }
        let steps = (1.0 / eps + 1e-9).floor() as usize;
        let points = (0..=steps).map(|l| (l as f64 * eps).min(1.0)).collect();
        Ok(Mesh { kind: MeshKind::Additive, points })
    }

    /// `{1 / (1 + eps * l) : l = 0, 1, ...}` kept while at least `floor`,
    /// ascending. Size at most `1 / (eps * floor) + 1`.
    pub fn hyperbolic(eps: f64, floor: f64) -> Result<Mesh> {
        if !(eps > 0.0) || !(floor > 0.0 && floor <= 1.0) {
            return Err(Error::invalid("hyperbolic mesh needs eps > 0 and floor in (0,1]"));
        }
        let mut points = Vec::new();
        let mut l = 0u64;
        loop {
            let p = 1.0 / (1.0 + eps * l as f64);
            if p < floor - COVER_TOL {
                break;
            }
            points.push(p);
            l += 1;
        }
        points.reverse();
        Ok(Mesh { kind: MeshKind::Hyperbolic, points })
    }

    pub fn explicit(mut points: Vec<f64>) -> Result<Mesh> {
        if points.is_empty() {
            return Err(Error::invalid("explicit mesh needs at least one point"));
        }
        if !points.iter().all(|p| p.is_finite() && (0.0..=1.0).contains(p)) {
            return Err(Error::invalid("mesh points must lie in [0,1]"));
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        Ok(Mesh { kind: MeshKind::Explicit, points })
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Does arm `x` eps-cover arm `y`? For each resource (optionally skipping
/// the constant time column) that either arm consumes:
///
/// 1. ratio: `r(x) / c_i(x) >= r(y) / c_i(y) - eps`,
/// 2. dominance: `c_i(x) >= c_i(y)`.
///
/// When `c_i(y) = 0 < c_i(x)` the ratio on `y`'s side is infinite unless
/// `r(y) = 0`, so the condition holds only for zero-reward `y`.
pub fn covers(
    latent: &LatentStructure,
    x: usize,
    y: usize,
    eps: f64,
    time_resource: Option<usize>,
) -> bool {
    let rx = latent.reward(x);
    let ry = latent.reward(y);
    for i in 0..latent.resources() {
        if Some(i) == time_resource {
            continue;
        }
        let cx = latent.consumption(x, i);
        let cy = latent.consumption(y, i);
        if cx + cy <= 0.0 {
            continue;
        }
        if cx < cy - COVER_TOL {
            return false;
        }
        if cy > 0.0 {
            if cx <= 0.0 {
                return false;
            }
            if rx / cx < ry / cy - eps - COVER_TOL {
                return false;
            }
        } else if ry > COVER_TOL {
            return false;
        }
    }
    true
}

/// Is `subset` an eps-discretization of the whole arm set, i.e. is every
/// arm covered by some subset member?
pub fn is_discretization(
    subset: &[usize],
    latent: &LatentStructure,
    eps: f64,
    time_resource: Option<usize>,
) -> bool {
    (0..latent.arms()).all(|y| subset.iter().any(|x| covers(latent, *x, y, eps, time_resource)))
}

/// Benchmark LP value over a subset of the arms.
pub fn restricted_lp_value(
    arms: &[usize],
    latent: &LatentStructure,
    budgets: &[f64],
) -> Result<f64> {
    if arms.is_empty() {
        return Err(Error::invalid("arm subset must be non-empty"));
    }
    if arms.iter().any(|x| *x >= latent.arms()) {
        return Err(Error::invalid("arm subset index out of range"));
    }
    let rewards = arms.iter().map(|x| latent.reward(*x)).collect();
    let cons = arms.iter().map(|x| latent.consumption_row(*x).to_vec()).collect();
    Ok(solve_primal(&LatentStructure::new(rewards, cons)?, budgets)?.value)
}

/// LP value lost by restricting the arm set `full` to `subset`:
/// `LPOPT(full) - LPOPT(subset)`. Non-negative up to solver tolerance.
pub fn discretization_error(
    subset: &[usize],
    full: &[usize],
    latent: &LatentStructure,
    budgets: &[f64],
) -> Result<f64> {
    if subset.iter().any(|x| !full.contains(x)) {
        return Err(Error::invalid("subset must be contained in the full arm set"));
    }
    let full_value = restricted_lp_value(full, latent, budgets)?;
    let subset_value = restricted_lp_value(subset, latent, budgets)?;
    Ok(full_value - subset_value)
}
