//! First-order machinery: the capacity region boundary, the set of achieving
//! input distributions for a boundary point, tangent vectors along the
//! boundary, and the feasible-direction set.
//!
//! The capacity region is the union over joint inputs `P` of the trapezoids
//! `{R1 <= I1(P), R1 + R2 <= I12(P)}`.  Both mutual informations are concave
//! in `P`, so the union is convex and its outer boundary is recovered by a
//! scalarization sweep: for each weight `lambda` the support function in
//! direction `(lambda, 1 - lambda)` is maximized over the simplex by
//! multi-start projected gradient ascent with numerical gradients, and the
//! boundary polyline is assembled from the maximizers' trapezoid corners.
//!
//! No certified global optimizer is attempted; acceptance is against an
//! exhaustive simplex grid at small alphabet sizes.

use crate::channel::{Channel, JointInput};
use crate::infogeom::MiScratch;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of deterministic optimizer starts.
pub const DEFAULT_STARTS: usize = 50;
/// Projected-ascent iteration cap per start.
pub const DEFAULT_ITERS: usize = 500;
/// Central-difference step for numerical gradients.
pub const GRAD_STEP: f64 = 1e-6;
/// Default slack for membership in the achieving set.
pub const DEFAULT_PI_TOL: f64 = 1e-6;
/// Representatives closer than this in L-infinity are merged.
pub const DEDUPE_LINF: f64 = 1e-3;
/// Default arclength step for tangent secants, in nats.
pub const DEFAULT_TANGENT_H: f64 = 1e-3;
/// Angle (radians) beyond which left/right tangents count as a corner.
pub const CORNER_ANGLE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error("resolution must be at least 2, got {0}")]
    BadResolution(usize),
    #[error("point ({r1}, {r2}) lies outside the capacity region (best slack {slack})")]
    PointOutsideRegion { r1: f64, r2: f64, slack: f64 },
    #[error("point ({r1}, {r2}) is not on the region boundary within {tol}")]
    NotOnBoundary { r1: f64, r2: f64, tol: f64 },
    #[error("no achieving distribution found for boundary point ({r1}, {r2}): internal search failure")]
    EmptyPiSet { r1: f64, r2: f64 },
    #[error("{0}")]
    BadArgument(String),
}

// ---------------------------------------------------------------------------
// Simplex search
// ---------------------------------------------------------------------------

/// Euclidean projection onto the probability simplex (sort-based).
fn project_to_simplex(v: &mut [f64]) {
    let n = v.len();
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    let mut k = 0;
    for (i, &s) in sorted.iter().enumerate() {
        acc += s;
        let t = (acc - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
            k = i + 1;
        }
    }
    debug_assert!(k > 0);
    let _ = k;
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        for x in v.iter_mut() {
            *x /= sum;
        }
    } else {
        let u = 1.0 / n as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
}

/// Deterministic low-discrepancy starting points on the simplex: an additive
/// recurrence in the unit cube pushed through the exponential spacing map.
fn simplex_starts(cells: usize, count: usize) -> Vec<Vec<f64>> {
    // Generalized golden ratio for dimension `cells`.
    let mut gamma = 1.5f64;
    for _ in 0..64 {
        gamma = (1.0 + gamma).powf(1.0 / (cells as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=cells).map(|j| (1.0 / gamma.powi(j as i32)).fract()).collect();
    let mut starts = Vec::with_capacity(count);
    starts.push(vec![1.0 / cells as f64; cells]); // always include uniform
    for k in 1..count {
        let mut p: Vec<f64> = alphas
            .iter()
            .map(|a| {
                let u = (0.5 + k as f64 * a).fract();
                -(1.0 - u).max(1e-12).ln()
            })
            .collect();
        let sum: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= sum);
        starts.push(p);
    }
    starts
}

/// One projected-gradient ascent run with step halving and a deterministic
/// pairwise-exchange polish.
fn ascend<F>(cells: usize, start: &[f64], iters: usize, mut f: F) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let mut x = start.to_vec();
    project_to_simplex(&mut x);
    let mut fx = f(&x);
    let mut step = 0.1;
    let mut grad = vec![0.0; cells];
    let mut trial = vec![0.0; cells];
    for _ in 0..iters {
        if step < 1e-12 {
            break;
        }
        for i in 0..cells {
            let h = GRAD_STEP;
            let orig = x[i];
            if orig >= h {
                x[i] = orig + h;
                let up = f(&x);
                x[i] = orig - h;
                let down = f(&x);
                grad[i] = (up - down) / (2.0 * h);
            } else {
                x[i] = orig + h;
                let up = f(&x);
                grad[i] = (up - fx) / h;
            }
            x[i] = orig;
        }
        trial.copy_from_slice(&x);
        for i in 0..cells {
            trial[i] += step * grad[i];
        }
        project_to_simplex(&mut trial);
        let ft = f(&trial);
        if ft > fx {
            x.copy_from_slice(&trial);
            fx = ft;
            step *= 1.2;
        } else {
            step *= 0.5;
        }
    }
    // Pairwise-exchange polish: move mass between cells at shrinking scales.
    // Exchanges span the simplex tangent space and never leave it.
    let mut delta: f64 = 1e-2;
    while delta >= 1e-7 {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..cells {
                for j in 0..cells {
                    if i == j || x[i] <= 0.0 {
                        continue;
                    }
                    let shift = delta.min(x[i]);
                    trial.copy_from_slice(&x);
                    trial[i] -= shift;
                    trial[j] += shift;
                    let ft = f(&trial);
                    if ft > fx + 1e-15 {
                        x.copy_from_slice(&trial);
                        fx = ft;
                        improved = true;
                    }
                }
            }
        }
        delta *= 0.1;
    }
    (x, fx)
}

/// Multi-start maximization; deterministic regardless of parallelism (ties
/// break toward the lowest start index).
fn multi_start_maximize<F>(ch: &Channel, starts: usize, iters: usize, objective: F) -> (Vec<f64>, f64)
where
    F: Fn(&mut MiScratch, &Channel, &[f64]) -> f64 + Sync,
{
    let cells = ch.x1_size() * ch.x2_size();
    let start_points = simplex_starts(cells, starts);
    let results: Vec<(Vec<f64>, f64)> = start_points
        .par_iter()
        .map(|s| {
            let mut scratch = MiScratch::new(ch);
            ascend(cells, s, iters, |p| objective(&mut scratch, ch, p))
        })
        .collect();
    let mut best = 0;
    for (k, r) in results.iter().enumerate() {
        if r.1 > results[best].1 {
            best = k;
        }
    }
    results.into_iter().nth(best).unwrap()
}

/// All multi-start endpoints (for representative collection).
fn multi_start_all<F>(ch: &Channel, starts: usize, iters: usize, objective: F) -> Vec<(Vec<f64>, f64)>
where
    F: Fn(&mut MiScratch, &Channel, &[f64], usize) -> f64 + Sync,
{
    let cells = ch.x1_size() * ch.x2_size();
    let start_points = simplex_starts(cells, starts);
    start_points
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let mut scratch = MiScratch::new(ch);
            ascend(cells, s, iters, |p| objective(&mut scratch, ch, p, k))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Region boundary
// ---------------------------------------------------------------------------

/// A point on the capacity region boundary, nats per use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

/// Outer boundary of the capacity region: a Pareto polyline (strictly
/// increasing `r1`, non-increasing `r2`) with one achieving distribution per
/// vertex, plus the two capacity scalars.
#[derive(Debug, Clone)]
pub struct RegionBoundary {
    pub points: Vec<RatePoint>,
    pub achievers: Vec<JointInput>,
    pub sum_capacity: f64,
    pub r1_capacity: f64,
}

impl RegionBoundary {
    /// Upper envelope `max { r2 : (r1, r2) in region }`, or `None` outside
    /// `[0, r1_capacity]`.
    pub fn r2_env(&self, r1: f64) -> Option<f64> {
        if r1 < -1e-12 || r1 > self.r1_capacity + 1e-12 {
            return None;
        }
        let pts = &self.points;
        if pts.is_empty() {
            return None;
        }
        if r1 <= pts[0].r1 {
            return Some(pts[0].r2);
        }
        for w in pts.windows(2) {
            if r1 <= w[1].r1 {
                let t = (r1 - w[0].r1) / (w[1].r1 - w[0].r1);
                return Some(w[0].r2 + t * (w[1].r2 - w[0].r2));
            }
        }
        Some(pts.last().unwrap().r2)
    }

    /// Membership in the region with closure slack.
    pub fn contains(&self, r1: f64, r2: f64, slack: f64) -> bool {
        if r1 < -slack || r2 < -slack || r1 > self.r1_capacity + slack {
            return false;
        }
        match self.r2_env(r1.clamp(0.0, self.r1_capacity)) {
            Some(env) => r2 <= env + slack,
            None => false,
        }
    }

    /// The boundary curve walked for tangents: the Pareto polyline followed
    /// by the vertical facet down to `(r1_capacity, 0)`.
    pub fn curve(&self) -> Vec<(f64, f64)> {
        let mut c: Vec<(f64, f64)> = self.points.iter().map(|p| (p.r1, p.r2)).collect();
        if let Some(last) = c.last().copied() {
            if last.1 > 1e-12 {
                c.push((last.0, 0.0));
            }
        }
        c
    }

    /// Whether the point lies on the outer boundary curve within `tol`
    /// (Euclidean distance to the polyline).
    pub fn on_outer_boundary(&self, r1: f64, r2: f64, tol: f64) -> bool {
        distance_to_polyline(&self.curve(), (r1, r2)) <= tol
    }

    /// Nearest point on the outer boundary curve and its distance.
    pub fn project_onto_curve(&self, r1: f64, r2: f64) -> ((f64, f64), f64) {
        let curve = self.curve();
        if curve.len() == 1 {
            let d = ((r1 - curve[0].0).powi(2) + (r2 - curve[0].1).powi(2)).sqrt();
            return (curve[0], d);
        }
        let s = arclength_of_projection(&curve, (r1, r2));
        let q = point_at_arclength(&curve, s);
        let d = ((r1 - q.0).powi(2) + (r2 - q.1).powi(2)).sqrt();
        (q, d)
    }
}

fn distance_to_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

pub(crate) fn distance_to_polyline(curve: &[(f64, f64)], p: (f64, f64)) -> f64 {
    if curve.len() == 1 {
        return ((p.0 - curve[0].0).powi(2) + (p.1 - curve[0].1).powi(2)).sqrt();
    }
    curve
        .windows(2)
        .map(|w| distance_to_segment(w[0], w[1], p))
        .fold(f64::INFINITY, f64::min)
}

/// Support objective in direction `(lambda, 1 - lambda)`: the trapezoid of
/// `P` contributes `(1 - lambda) I12 + max(2 lambda - 1, 0) I1`.
fn support_objective(lambda: f64, i1: f64, i12: f64) -> f64 {
    (1.0 - lambda) * i12 + (2.0 * lambda - 1.0).max(0.0) * i1
}

/// Computes the capacity region boundary by a `resolution`-point scalarization
/// sweep over `lambda` in `[0, 1]`.
pub fn boundary(ch: &Channel, resolution: usize) -> Result<RegionBoundary, CapacityError> {
    if resolution < 2 {
        return Err(CapacityError::BadResolution(resolution));
    }
    let lambdas: Vec<f64> = (0..resolution)
        .map(|k| k as f64 / (resolution - 1) as f64)
        .collect();
    let solves: Vec<(Vec<f64>, f64, f64)> = lambdas
        .par_iter()
        .map(|&lambda| {
            let (p, _) = {
                let obj = move |s: &mut MiScratch, ch: &Channel, raw: &[f64]| {
                    let (i1, i12) = s.info_pair(ch, raw);
                    support_objective(lambda, i1, i12)
                };
                multi_start_maximize(ch, DEFAULT_STARTS, DEFAULT_ITERS, obj)
            };
            let mut scratch = MiScratch::new(ch);
            let (i1, i12) = scratch.info_pair(ch, &p);
            (p, i1, i12)
        })
        .collect();

    let sum_capacity = solves.iter().map(|s| s.2).fold(0.0, f64::max);
    let r1_capacity = solves.iter().map(|s| s.1).fold(0.0, f64::max);

    // Candidate vertices: each maximizer's trapezoid corner, plus the
    // top-left anchor of the sum-rate facet.
    let mut cands: Vec<(f64, f64, JointInput)> = Vec::with_capacity(solves.len() + 1);
    let best_sum = solves
        .iter()
        .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .unwrap();
    cands.push((
        0.0,
        sum_capacity,
        JointInput::new(ch.x1_size(), ch.x2_size(), best_sum.0.clone()).expect("simplex point"),
    ));
    for (p, i1, i12) in &solves {
        cands.push((
            *i1,
            (i12 - i1).max(0.0),
            JointInput::new(ch.x1_size(), ch.x2_size(), p.clone()).expect("simplex point"),
        ));
    }

    // Pareto filter: sort by r1 ascending, keep strictly decreasing r2 from
    // the right; merge near-duplicate r1 values.
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    let mut keep: Vec<(f64, f64, JointInput)> = Vec::with_capacity(cands.len());
    for c in cands.into_iter() {
        if let Some(last) = keep.last() {
            if c.0 - last.0 < 1e-9 {
                continue; // same r1 (sorted so the higher r2 came first)
            }
        }
        // Drop candidates dominated by anything already kept or to come:
        // enforce r2 strictly below the previous kept vertex.
        while let Some(last) = keep.last() {
            if last.1 <= c.1 + 1e-12 && last.0 >= 1e-15 {
                // previous vertex dominated by this one
                keep.pop();
            } else {
                break;
            }
        }
        if keep.last().map_or(true, |last| c.1 < last.1 - 1e-12 || c.0 > last.0) {
            keep.push(c);
        }
    }
    // Final monotonicity sweep.
    let mut points = Vec::with_capacity(keep.len());
    let mut achievers = Vec::with_capacity(keep.len());
    let mut prev_r2 = f64::INFINITY;
    for (r1, r2, p) in keep.into_iter() {
        let r2c = r2.min(prev_r2);
        points.push(RatePoint { r1, r2: r2c });
        achievers.push(p);
        prev_r2 = r2c;
    }
    Ok(RegionBoundary { points, achievers, sum_capacity, r1_capacity })
}

// ---------------------------------------------------------------------------
// Achieving distributions
// ---------------------------------------------------------------------------

/// Finite representatives of the achieving set plus its membership test.
#[derive(Debug, Clone)]
pub struct PiSet {
    pub representatives: Vec<JointInput>,
    pub r1_star: f64,
    pub r2_star: f64,
    pub tol: f64,
}

impl PiSet {
    /// Membership: the mutual-information vector dominates the target within
    /// the slack.
    pub fn contains(&self, p: &JointInput, ch: &Channel) -> bool {
        let mut scratch = MiScratch::new(ch);
        let (i1, i12) = scratch.info_pair(ch, p.p_flat());
        i1 >= self.r1_star - self.tol && i12 >= self.r1_star + self.r2_star - self.tol
    }
}

/// Searches for representative distributions whose mutual-information vector
/// dominates `(R1*, R1* + R2*)`, by multi-start feasibility ascent followed
/// by a directional spread pass, deduplicated at L-infinity `1e-3`.
pub fn pi_set(
    ch: &Channel,
    r1_star: f64,
    r2_star: f64,
    tol: f64,
    resolution: usize,
) -> Result<PiSet, CapacityError> {
    if tol <= 0.0 {
        return Err(CapacityError::BadArgument(format!("tol must be positive, got {tol}")));
    }
    if resolution < 1 {
        return Err(CapacityError::BadResolution(resolution));
    }
    let r12_star = r1_star + r2_star;
    let slack = move |i1: f64, i12: f64| (i1 - r1_star).min(i12 - r12_star);

    // Spread directions in (I1, I12)-space cycled by start index; the
    // feasibility penalty keeps endpoints inside the achieving set.
    let dirs: [[f64; 2]; 8] = [
        [1.0, 0.0],
        [0.0, 1.0],
        [-1.0, 0.0],
        [0.0, -1.0],
        [1.0, 1.0],
        [-1.0, 1.0],
        [1.0, -1.0],
        [-1.0, -1.0],
    ];
    let kappa = 1e3;
    let results = multi_start_all(
        ch,
        resolution,
        DEFAULT_ITERS,
        move |s: &mut MiScratch, ch: &Channel, raw: &[f64], k: usize| {
            let (i1, i12) = s.info_pair(ch, raw);
            let g = slack(i1, i12);
            if k == 0 {
                // pure feasibility ascent
                g
            } else {
                let d = dirs[k % dirs.len()];
                d[0] * i1 + d[1] * i12 - kappa * (tol - g).max(0.0)
            }
        },
    );

    // Re-verify every endpoint against the plain slack criterion.
    let mut scratch = MiScratch::new(ch);
    let mut best_slack = f64::NEG_INFINITY;
    let mut reps: Vec<JointInput> = Vec::new();
    for (p, _) in &results {
        let (i1, i12) = scratch.info_pair(ch, p);
        let g = slack(i1, i12);
        best_slack = best_slack.max(g);
        if g >= -tol {
            let cand = JointInput::new(ch.x1_size(), ch.x2_size(), p.clone()).expect("simplex");
            if reps.iter().all(|r| r.linf_distance(&cand) > DEDUPE_LINF) {
                reps.push(cand);
            }
        }
    }
    if reps.is_empty() {
        if best_slack < -tol {
            return Err(CapacityError::PointOutsideRegion { r1: r1_star, r2: r2_star, slack: best_slack });
        }
        return Err(CapacityError::EmptyPiSet { r1: r1_star, r2: r2_star });
    }
    Ok(PiSet { representatives: reps, r1_star, r2_star, tol })
}

// ---------------------------------------------------------------------------
// Tangents and feasible directions
// ---------------------------------------------------------------------------

/// Left/right unit tangent vectors at a boundary point, in `(R1, R2)`-space,
/// plus their transformed `(v1, v1 + v2)` forms.  A side is absent exactly
/// when the corresponding rate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentPair {
    pub t_minus: Option<[f64; 2]>,
    pub t_plus: Option<[f64; 2]>,
    pub t_minus_transformed: Option<[f64; 2]>,
    pub t_plus_transformed: Option<[f64; 2]>,
    /// Left and right tangents disagree by more than the corner angle.
    pub corner: bool,
}

fn transform(v: [f64; 2]) -> [f64; 2] {
    [v[0], v[0] + v[1]]
}

fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

/// Point at arclength `s` along a polyline.
fn point_at_arclength(curve: &[(f64, f64)], s: f64) -> (f64, f64) {
    let mut remaining = s.max(0.0);
    for w in curve.windows(2) {
        let len = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
        if remaining <= len {
            let t = if len == 0.0 { 0.0 } else { remaining / len };
            return (w[0].0 + t * (w[1].0 - w[0].0), w[0].1 + t * (w[1].1 - w[0].1));
        }
        remaining -= len;
    }
    *curve.last().unwrap()
}

/// Arclength of the projection of `p` onto the polyline.
fn arclength_of_projection(curve: &[(f64, f64)], p: (f64, f64)) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let mut acc = 0.0;
    for w in curve.windows(2) {
        let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let len2 = dx * dx + dy * dy;
        let len = len2.sqrt();
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p.0 - w[0].0) * dx + (p.1 - w[0].1) * dy) / len2).clamp(0.0, 1.0)
        };
        let (cx, cy) = (w[0].0 + t * dx, w[0].1 + t * dy);
        let d = ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt();
        if d < best.0 {
            best = (d, acc + t * len);
        }
        acc += len;
    }
    best.1
}

/// Estimates left/right unit tangents by secants to boundary points at
/// arclength `h` on either side of `(R1*, R2*)`.
pub fn tangents(
    region: &RegionBoundary,
    r1_star: f64,
    r2_star: f64,
    h: f64,
) -> Result<TangentPair, CapacityError> {
    if h <= 0.0 {
        return Err(CapacityError::BadArgument(format!("arclength step must be positive, got {h}")));
    }
    let tol = 1e-6;
    let curve = region.curve();
    if curve.len() < 2 {
        return Err(CapacityError::NotOnBoundary { r1: r1_star, r2: r2_star, tol });
    }
    if !region.on_outer_boundary(r1_star, r2_star, tol) {
        return Err(CapacityError::NotOnBoundary { r1: r1_star, r2: r2_star, tol });
    }
    let total: f64 = curve
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .sum();
    let s = arclength_of_projection(&curve, (r1_star, r2_star));
    let q = point_at_arclength(&curve, s);

    let t_minus = if r1_star > tol {
        let back = point_at_arclength(&curve, (s - h).max(0.0));
        Some(normalize([back.0 - q.0, back.1 - q.1]))
    } else {
        None
    };
    let t_plus = if r2_star > tol {
        let fwd = point_at_arclength(&curve, (s + h).min(total));
        Some(normalize([fwd.0 - q.0, fwd.1 - q.1]))
    } else {
        None
    };
    let corner = match (t_minus, t_plus) {
        (Some(a), Some(b)) => {
            let dot = (-a[0]) * b[0] + (-a[1]) * b[1];
            dot.clamp(-1.0, 1.0).acos() > CORNER_ANGLE
        }
        _ => false,
    };
    Ok(TangentPair {
        t_minus,
        t_plus,
        t_minus_transformed: t_minus.map(transform),
        t_plus_transformed: t_plus.map(transform),
        corner,
    })
}

/// Membership predicate over direction vectors at a boundary point: a
/// direction is feasible when some step along it stays inside the region
/// (boundary touches accepted within `1e-9`).
#[derive(Debug, Clone)]
pub struct FeasibleDirections {
    region: RegionBoundary,
    origin: (f64, f64),
    alphas: Vec<f64>,
}

impl FeasibleDirections {
    /// Membership for a direction in `(R1, R2)`-space.
    pub fn contains_rate_direction(&self, v: [f64; 2]) -> bool {
        self.alphas.iter().any(|&a| {
            self.region
                .contains(self.origin.0 + a * v[0], self.origin.1 + a * v[1], 1e-9)
        })
    }

    /// Membership in the transformed `(v1, v1 + v2)` coordinates.
    pub fn contains_transformed(&self, t: [f64; 2]) -> bool {
        self.contains_rate_direction([t[0], t[1] - t[0]])
    }
}

/// Builds the feasible-direction predicate with a decreasing grid of
/// `samples` step sizes.
pub fn feasible_directions(
    region: &RegionBoundary,
    r1_star: f64,
    r2_star: f64,
    samples: usize,
) -> Result<FeasibleDirections, CapacityError> {
    if samples < 1 {
        return Err(CapacityError::BadArgument("samples must be at least 1".into()));
    }
    let tol = 1e-6;
    if !region.on_outer_boundary(r1_star, r2_star, tol) {
        return Err(CapacityError::NotOnBoundary { r1: r1_star, r2: r2_star, tol });
    }
    let scale = region.r1_capacity.max(region.sum_capacity).max(1e-6);
    let alphas = (0..samples).map(|k| 0.25 * scale * 0.5f64.powi(k as i32)).collect();
    Ok(FeasibleDirections { region: region.clone(), origin: (r1_star, r2_star), alphas })
}
