//! Second-order (dispersion) rate regions.
//!
//! For a boundary point `(R1*, R2*)` and an achieving distribution `P`, the
//! local second-order set is one of three shapes depending on which
//! first-order constraints are active at `P`:
//!
//! * only the `R1` constraint: a half-plane in `L1`;
//! * only the sum constraint: a half-plane in `L1 + L2`;
//! * both: the union over `beta >= 0` of tangent-shifted copies of the
//!   Gaussian quantile region, with the left (right) family omitted when
//!   `R1* = 0` (`R2* = 0`).
//!
//! The full region is the union over achieving distributions.  Membership
//! queries are exact: a shifted-copy query solves for the best shift by
//! one-dimensional search (the orthant probability is log-concave along a
//! line, so the search is unimodal); the stored beta grid only seeds the
//! search and the exported polyline.

use crate::capacity::{self, CapacityError, PiSet, TangentPair};
use crate::channel::{Channel, JointInput};
use crate::infogeom::{dispersion_matrix, mean_vector, InfoGeomError};
use crate::mvnorm::{self, phi_inv, psi_inverse, MvnError, QuantileRegion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default classification tolerance, nats.
pub const DEFAULT_ETA: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SecondOrderError {
    #[error("distribution is not in the achieving set: slacks ({slack1}, {slack2}) below -eta = {minus_eta}")]
    NotInPi { slack1: f64, slack2: f64, minus_eta: f64 },
    #[error("point is interior to this distribution's trapezoid (slacks {slack1}, {slack2} both exceed eta {eta}); no constraint is active")]
    InteriorForDistribution { slack1: f64, slack2: f64, eta: f64 },
    #[error("tangent side required for the both-active case is missing (r1* = {r1}, r2* = {r2})")]
    MissingTangent { r1: f64, r2: f64 },
    #[error("first sender alphabet must be degenerate (|X1| = 1), got {0}")]
    NotSingleUser(usize),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    InfoGeom(#[from] InfoGeomError),
    #[error(transparent)]
    Mvn(#[from] MvnError),
}

/// Which first-order constraints are active at `(R1*, R2*)` under a given
/// distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    /// `R1* = I1(P)`, sum constraint slack.
    I1Active,
    /// `R1* + R2* = I12(P)`, first constraint slack.
    SumActive,
    /// Both constraints tight.
    BothActive,
}

/// Case classification with the raw slacks `(I1 - R1*, I12 - R1* - R2*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseTag {
    pub kind: CaseKind,
    pub slack1: f64,
    pub slack2: f64,
}

/// Classifies the active constraints of `p` at the boundary point, with
/// tolerance `eta` absorbing optimizer noise.
pub fn classify(
    p: &JointInput,
    ch: &Channel,
    r1_star: f64,
    r2_star: f64,
    eta: f64,
) -> Result<CaseTag, SecondOrderError> {
    let iv = mean_vector(p, ch)?;
    let slack1 = iv.i1 - r1_star;
    let slack2 = iv.i12 - (r1_star + r2_star);
    if slack1 < -eta || slack2 < -eta {
        return Err(SecondOrderError::NotInPi { slack1, slack2, minus_eta: -eta });
    }
    let kind = match (slack1.abs() <= eta, slack2.abs() <= eta) {
        (true, true) => CaseKind::BothActive,
        (true, false) => CaseKind::I1Active,
        (false, true) => CaseKind::SumActive,
        (false, false) => {
            return Err(SecondOrderError::InteriorForDistribution { slack1, slack2, eta })
        }
    };
    Ok(CaseTag { kind, slack1, slack2 })
}

/// One generator of the second-order region.
#[derive(Debug, Clone)]
pub enum PieceShape {
    /// `L1 <= bound`.
    HalfPlaneL1 { bound: f64 },
    /// `L1 + L2 <= bound`.
    HalfPlaneSum { bound: f64 },
    /// Union over `beta >= 0` of `beta * tangent + quantile region`, in the
    /// transformed `(L1, L1 + L2)` coordinates.
    ShiftedPsi { tangent: [f64; 2], quantile: QuantileRegion, beta_grid: Vec<f64> },
}

/// A region piece together with the distribution and case that produced it.
#[derive(Debug, Clone)]
pub struct RegionPiece {
    pub shape: PieceShape,
    pub achiever: JointInput,
    pub case: CaseTag,
}

/// Down-closed second-order region in `(L1, L2)`-space, represented by its
/// generating pieces; membership is the union of piece memberships.
#[derive(Debug, Clone)]
pub struct SecondOrderRegion {
    pub pieces: Vec<RegionPiece>,
    pub epsilon: f64,
    pub r1_star: f64,
    pub r2_star: f64,
    pub tangents: Option<TangentPair>,
}

/// Exact membership of a shifted-quantile piece: searches for the best
/// shift, exploiting unimodality of the orthant probability along the line.
fn shifted_contains(q: &QuantileRegion, t: [f64; 2], beta_max: f64, l: [f64; 2]) -> bool {
    let v = &q.covariance;
    let scale_tol = 1e-14 * (1.0 + v.trace().abs());
    // Degenerate coordinates impose exact linear constraints on beta.
    let mut lo = 0.0f64;
    let mut hi = beta_max.max(0.0);
    let diag = [v.v1, v.v12];
    for i in 0..2 {
        if diag[i] <= scale_tol {
            let (li, ti) = (l[i], t[i]);
            if ti.abs() < 1e-15 {
                if li > 0.0 {
                    return false;
                }
            } else if ti > 0.0 {
                lo = lo.max(li / ti);
            } else {
                hi = hi.min(li / ti);
            }
        }
    }
    if lo > hi {
        return false;
    }
    let member = |beta: f64| q.contains(l[0] - beta * t[0], l[1] - beta * t[1]);
    if member(lo) || member(hi) {
        return true;
    }
    // Coarse scan, then golden-section refinement around the best value of
    // the underlying orthant probability.
    let value = |beta: f64| {
        mvnorm::psi(-(l[0] - beta * t[0]), -(l[1] - beta * t[1]), v).unwrap_or(0.0)
    };
    let scans = 33;
    let mut best = (lo, value(lo));
    for k in 1..=scans {
        let beta = lo + (hi - lo) * k as f64 / scans as f64;
        let val = value(beta);
        if val >= 1.0 - q.epsilon {
            return true;
        }
        if val > best.1 {
            best = (beta, val);
        }
    }
    let width = (hi - lo) / scans as f64;
    let mut a = (best.0 - width).max(lo);
    let mut b = (best.0 + width).min(hi);
    let golden = 0.5 * (3.0 - 5.0f64.sqrt());
    for _ in 0..60 {
        let m1 = a + golden * (b - a);
        let m2 = b - golden * (b - a);
        let v1 = value(m1);
        let v2 = value(m2);
        if v1.max(v2) >= 1.0 - q.epsilon {
            return true;
        }
        if v1 < v2 {
            a = m1;
        } else {
            b = m2;
        }
        if b - a < 1e-12 * (1.0 + beta_max) {
            break;
        }
    }
    false
}

impl RegionPiece {
    fn contains(&self, l1: f64, l2: f64) -> bool {
        let l = [l1, l1 + l2];
        match &self.shape {
            PieceShape::HalfPlaneL1 { bound } => l[0] <= *bound,
            PieceShape::HalfPlaneSum { bound } => l[1] <= *bound,
            PieceShape::ShiftedPsi { tangent, quantile, beta_grid } => {
                let beta_max = beta_grid.last().copied().unwrap_or(0.0);
                shifted_contains(quantile, *tangent, beta_max, l)
            }
        }
    }
}

impl SecondOrderRegion {
    /// Membership of `(L1, L2)`: union over pieces.
    pub fn contains(&self, l1: f64, l2: f64) -> bool {
        self.pieces.iter().any(|p| p.contains(l1, l2))
    }

    /// A scale for bracketing searches, from the piece payloads.
    fn scale(&self) -> f64 {
        let mut s = 1.0f64;
        for p in &self.pieces {
            match &p.shape {
                PieceShape::HalfPlaneL1 { bound } | PieceShape::HalfPlaneSum { bound } => {
                    s = s.max(bound.abs())
                }
                PieceShape::ShiftedPsi { quantile, beta_grid, .. } => {
                    s = s.max(quantile.covariance.trace().sqrt() * 8.0);
                    s = s.max(beta_grid.last().copied().unwrap_or(0.0));
                }
            }
        }
        s
    }

    /// Supremum of `L2` over the vertical slice at `l1`; `None` when the
    /// slice is empty, infinite when the slice is unbounded above.
    pub fn sup_l2_at(&self, l1: f64) -> Option<f64> {
        let scale = self.scale();
        let mut hi = scale;
        let mut lo = -scale;
        let mut expand = 0;
        while self.contains(l1, hi) {
            hi *= 2.0;
            expand += 1;
            if expand > 40 {
                return Some(f64::INFINITY);
            }
        }
        expand = 0;
        while !self.contains(l1, lo) {
            lo *= 2.0;
            expand += 1;
            if expand > 40 {
                return None;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.contains(l1, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-9 {
                break;
            }
        }
        Some(lo)
    }

    /// Boundary polyline over a bounded window, for export: one point per
    /// sweep column, clipped to the window.
    pub fn boundary_polyline(
        &self,
        l1_range: (f64, f64),
        l2_range: (f64, f64),
        resolution: usize,
    ) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(resolution);
        if resolution < 2 {
            return out;
        }
        for k in 0..resolution {
            let l1 = l1_range.0 + (l1_range.1 - l1_range.0) * k as f64 / (resolution - 1) as f64;
            if let Some(sup) = self.sup_l2_at(l1) {
                let clipped = sup.min(l2_range.1);
                if clipped >= l2_range.0 {
                    out.push((l1, clipped));
                }
            }
        }
        out
    }
}

/// Log-spaced shift grid: zero plus `points` values up to
/// `cap_sds * sqrt(lambda_max)`.
pub fn default_beta_grid(v: &crate::infogeom::DispersionMatrix, points: usize, cap_sds: f64) -> Vec<f64> {
    let profile = crate::infogeom::rank_profile(v, crate::infogeom::RANK_TOL);
    let lambda_max = profile.d[0].max(0.0);
    let cap = cap_sds * lambda_max.sqrt();
    let mut grid = vec![0.0];
    if cap > 0.0 && points > 0 {
        let lo = cap * 1e-4;
        for k in 0..points {
            let t = k as f64 / (points.max(2) - 1) as f64;
            grid.push(lo * (cap / lo).powf(t));
        }
    }
    grid
}

/// Configuration for assembling the second-order region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Config {
    /// Classification tolerance, nats.
    pub eta: f64,
    /// Achieving-set slack.
    pub pi_tol: f64,
    /// Multi-start count for the achieving-set search.
    pub pi_resolution: usize,
    /// Scalarization sweep size for the first-order boundary.
    pub boundary_resolution: usize,
    /// Number of nonzero entries in the shift grid.
    pub beta_points: usize,
    /// Shift grid cap, in standard deviations of the largest eigenvalue.
    pub beta_cap_sds: f64,
    /// Quantile-region export window, standard deviations.
    pub quantile_extent: f64,
    /// Quantile-region sweep resolution.
    pub quantile_resolution: usize,
    /// Tangent secant arclength, nats.
    pub tangent_h: f64,
    /// Queries within this distance of the computed boundary polyline are
    /// projected onto it before classification.
    pub boundary_snap: f64,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            pi_tol: capacity::DEFAULT_PI_TOL,
            pi_resolution: capacity::DEFAULT_STARTS,
            boundary_resolution: 64,
            beta_points: 64,
            beta_cap_sds: 20.0,
            quantile_extent: mvnorm::DEFAULT_EXTENT,
            quantile_resolution: mvnorm::DEFAULT_RESOLUTION,
            tangent_h: capacity::DEFAULT_TANGENT_H,
            boundary_snap: 1e-4,
        }
    }
}

/// Builds the single-distribution region piece(s) for `p` at the boundary
/// point, given its tangents and shift grid.
pub fn l0_region(
    p: &JointInput,
    ch: &Channel,
    r1_star: f64,
    r2_star: f64,
    eps: f64,
    tangents: &TangentPair,
    beta_grid: &[f64],
    config: &Theorem1Config,
) -> Result<SecondOrderRegion, SecondOrderError> {
    let case = classify(p, ch, r1_star, r2_star, config.eta)?;
    let v = dispersion_matrix(p, ch)?;
    let quantile_for = |pieces: &mut Vec<RegionPiece>| -> Result<(), SecondOrderError> {
        let q = psi_inverse(&v, eps, config.quantile_extent, config.quantile_resolution)?;
        let mut sides: Vec<[f64; 2]> = Vec::new();
        if r1_star > config.eta {
            match tangents.t_minus_transformed {
                Some(t) => sides.push(t),
                None => {
                    return Err(SecondOrderError::MissingTangent { r1: r1_star, r2: r2_star })
                }
            }
        }
        if r2_star > config.eta {
            match tangents.t_plus_transformed {
                Some(t) => sides.push(t),
                None => {
                    return Err(SecondOrderError::MissingTangent { r1: r1_star, r2: r2_star })
                }
            }
        }
        for t in sides {
            pieces.push(RegionPiece {
                shape: PieceShape::ShiftedPsi {
                    tangent: t,
                    quantile: q.clone(),
                    beta_grid: beta_grid.to_vec(),
                },
                achiever: p.clone(),
                case,
            });
        }
        Ok(())
    };

    let quantile_arg = phi_inv(eps)?;
    let mut pieces = Vec::new();
    match case.kind {
        CaseKind::I1Active => pieces.push(RegionPiece {
            shape: PieceShape::HalfPlaneL1 { bound: v.v1.max(0.0).sqrt() * quantile_arg },
            achiever: p.clone(),
            case,
        }),
        CaseKind::SumActive => pieces.push(RegionPiece {
            shape: PieceShape::HalfPlaneSum { bound: v.v12.max(0.0).sqrt() * quantile_arg },
            achiever: p.clone(),
            case,
        }),
        CaseKind::BothActive => quantile_for(&mut pieces)?,
    }
    Ok(SecondOrderRegion {
        pieces,
        epsilon: eps,
        r1_star,
        r2_star,
        tangents: Some(*tangents),
    })
}

/// Output of the full second-order assembly: the region plus the first-order
/// artifacts it was built from.
#[derive(Debug, Clone)]
pub struct Theorem1Region {
    pub region: SecondOrderRegion,
    pub pi: PiSet,
    pub boundary: capacity::RegionBoundary,
}

/// Assembles the second-order region at a boundary point: the union over
/// achieving-set representatives of their per-distribution pieces.
pub fn theorem1_region(
    ch: &Channel,
    r1_star: f64,
    r2_star: f64,
    eps: f64,
    config: &Theorem1Config,
) -> Result<Theorem1Region, SecondOrderError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SecondOrderError::Mvn(MvnError::BadEpsilon(eps)));
    }
    let boundary = capacity::boundary(ch, config.boundary_resolution)?;
    // Snap the query onto the computed polyline, absorbing sweep-resolution
    // noise; beyond the snap distance the point is rejected as off-boundary.
    let (snapped, dist) = boundary.project_onto_curve(r1_star, r2_star);
    if dist > config.boundary_snap {
        return Err(SecondOrderError::Capacity(CapacityError::NotOnBoundary {
            r1: r1_star,
            r2: r2_star,
            tol: config.boundary_snap,
        }));
    }
    let (r1_star, r2_star) = snapped;
    let tangents = capacity::tangents(&boundary, r1_star, r2_star, config.tangent_h)?;
    let pi = capacity::pi_set(ch, r1_star, r2_star, config.pi_tol, config.pi_resolution)?;
    let mut pieces = Vec::new();
    for p in &pi.representatives {
        let v = dispersion_matrix(p, ch)?;
        let grid = default_beta_grid(&v, config.beta_points, config.beta_cap_sds);
        let sub = l0_region(p, ch, r1_star, r2_star, eps, &tangents, &grid, config)?;
        pieces.extend(sub.pieces);
    }
    Ok(Theorem1Region {
        region: SecondOrderRegion {
            pieces,
            epsilon: eps,
            r1_star,
            r2_star,
            tangents: Some(tangents),
        },
        pi,
        boundary,
    })
}

/// Second-order coding rate of the single-user channel embedded as user 2
/// (`|X1| = 1`): the extremal `sqrt(V) * quantile` over capacity-achieving
/// inputs (minimum variance below `eps = 1/2`, maximum above).
pub fn single_user_rate(ch: &Channel, eps: f64) -> Result<f64, SecondOrderError> {
    if ch.x1_size() != 1 {
        return Err(SecondOrderError::NotSingleUser(ch.x1_size()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SecondOrderError::Mvn(MvnError::BadEpsilon(eps)));
    }
    let b = capacity::boundary(ch, 17)?;
    let capacity_value = b.sum_capacity;
    let pi = capacity::pi_set(
        ch,
        0.0,
        capacity_value,
        capacity::DEFAULT_PI_TOL,
        capacity::DEFAULT_STARTS,
    )?;
    let q = phi_inv(eps)?;
    let mut best = f64::NEG_INFINITY;
    for p in &pi.representatives {
        let v = dispersion_matrix(p, ch)?;
        best = best.max(v.v12.max(0.0).sqrt() * q);
    }
    Ok(best)
}
