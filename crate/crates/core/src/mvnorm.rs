//! Univariate and bivariate Gaussian CDF machinery.
//!
//! `psi(z1, z2, V)` is the lower-orthant probability of a zero-mean bivariate
//! Gaussian with covariance `V`, defined for every positive semi-definite
//! `V` including the degenerate ranks:
//!
//! * rank 2: one-dimensional adaptive quadrature of the conditional Gaussian
//!   CDF against the first marginal, refined to 1e-10 absolute error, with
//!   closed forms once the correlation passes `1 - 1e-12` where the
//!   quadrature is ill-conditioned;
//! * rank 1: the Gaussian lives on the line spanned by the leading
//!   eigenvector, so the orthant probability is a one-dimensional interval
//!   (or indicator) computed exactly from `phi`;
//! * rank 0: the point mass at the origin, an indicator.
//!
//! `psi_inverse(V, eps)` is the down-closed set `{z : psi(-z1, -z2; V) >=
//! 1 - eps}`.  Membership queries go through `psi` directly; the exported
//! boundary polyline is produced by sweeping the first coordinate over a
//! window and bisecting the second, and exists for plotting and region
//! intersection only.

use crate::infogeom::{rank_profile, DispersionMatrix, RankProfile, RANK_TOL};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default boundary export window, in standard deviations.  Covers every
/// epsilon in `[1e-6, 1 - 1e-6]`.
pub const DEFAULT_EXTENT: f64 = 6.0;
/// Default number of sweep points for boundary export.
pub const DEFAULT_RESOLUTION: usize = 512;
/// Bisection tolerance for boundary points, absolute in z.
pub const BOUNDARY_BISECT_TOL: f64 = 1e-9;
/// Correlations beyond `1 - RHO_DEGENERATE` use the closed forms.
pub const RHO_DEGENERATE: f64 = 1e-12;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.3989422804014327;

#[derive(Debug, Error)]
pub enum MvnError {
    #[error("covariance is not positive semi-definite: {0:?}")]
    NotPsd(DispersionMatrix),
    #[error("epsilon must lie strictly inside (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("quantile argument must lie strictly inside (0, 1), got {0}")]
    BadQuantileArg(f64),
    #[error("{0}")]
    BadArgument(String),
}

/// Standard Gaussian CDF.
#[inline]
pub fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Standard Gaussian density.
#[inline]
pub fn phi_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Inverse standard Gaussian CDF.
///
/// Rational initial guess (Acklam) polished by one Halley step against `phi`,
/// which brings the round trip `|phi(phi_inv(p)) - p|` to machine precision.
pub fn phi_inv(p: f64) -> Result<f64, MvnError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MvnError::BadQuantileArg(p));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    };

    // Halley refinement.
    let e = phi(x) - p;
    let u = e / phi_pdf(x);
    Ok(x - u / (1.0 + x * u / 2.0))
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature (G7, K15)
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (k, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let fsum = f(mid - dx) + f(mid + dx);
        kronrod += WGK[k] * fsum;
        if k % 2 == 1 {
            gauss += WG[k / 2] * fsum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Adaptive refinement to absolute tolerance `tol`.
fn adaptive_quadrature<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    let mut splits = 0usize;
    while let Some((lo, hi, budget)) = stack.pop() {
        let (value, err) = gk15(f, lo, hi);
        if err <= budget || hi - lo < 1e-14 || splits > 20_000 {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            splits += 1;
            stack.push((lo, mid, budget / 2.0));
            stack.push((mid, hi, budget / 2.0));
        }
    }
    total
}

// ---------------------------------------------------------------------------
// Bivariate orthant probability
// ---------------------------------------------------------------------------

/// Standardized bivariate normal CDF `P(Z1 <= a, Z2 <= b)` with correlation
/// `rho` strictly inside (-1, 1): integrate the conditional CDF against the
/// first marginal.
fn bvn_cdf(a: f64, b: f64, rho: f64) -> f64 {
    let upper = a.min(9.0);
    if upper <= -9.0 {
        return 0.0;
    }
    let s = (1.0 - rho * rho).sqrt();
    let integrand = |t: f64| phi_pdf(t) * phi((b - rho * t) / s);
    adaptive_quadrature(&integrand, -9.0, upper, 5e-12).clamp(0.0, 1.0)
}

/// Lower-orthant probability `P(Z1 <= z1, Z2 <= z2)` for a zero-mean
/// Gaussian with covariance `v`, valid for all ranks.
pub fn psi(z1: f64, z2: f64, v: &DispersionMatrix) -> Result<f64, MvnError> {
    if !v.is_psd(1e-10) {
        return Err(MvnError::NotPsd(*v));
    }
    let profile = rank_profile(v, RANK_TOL);
    Ok(psi_with_profile(z1, z2, v, &profile))
}

fn psi_with_profile(z1: f64, z2: f64, v: &DispersionMatrix, profile: &RankProfile) -> f64 {
    match profile.rank {
        0 => {
            if z1 >= 0.0 && z2 >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        1 => {
            // Z = sqrt(d1) * u1 * G for scalar standard G.
            let scale = profile.d[0].max(0.0).sqrt();
            let coeffs = [scale * profile.u[0][0], scale * profile.u[0][1]];
            let zs = [z1, z2];
            let mut lower = f64::NEG_INFINITY;
            let mut upper = f64::INFINITY;
            for (c, z) in coeffs.iter().zip(zs.iter()) {
                if c.abs() <= 1e-12 * (1.0 + scale) {
                    if *z < 0.0 {
                        return 0.0;
                    }
                } else if *c > 0.0 {
                    upper = upper.min(z / c);
                } else {
                    lower = lower.max(z / c);
                }
            }
            let hi = if upper.is_infinite() { 1.0 } else { phi(upper) };
            let lo = if lower.is_infinite() { 0.0 } else { phi(lower) };
            (hi - lo).clamp(0.0, 1.0)
        }
        _ => {
            let s1 = v.v1.max(0.0).sqrt();
            let s2 = v.v12.max(0.0).sqrt();
            let a = z1 / s1;
            let b = z2 / s2;
            let rho = (v.v1_12 / (s1 * s2)).clamp(-1.0, 1.0);
            if rho >= 1.0 - RHO_DEGENERATE {
                phi(a.min(b))
            } else if rho <= -1.0 + RHO_DEGENERATE {
                (phi(a) + phi(b) - 1.0).max(0.0)
            } else {
                bvn_cdf(a, b, rho)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Inverse quantile region
// ---------------------------------------------------------------------------

/// Shape classification of a quantile region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionShape {
    /// Full-rank covariance, smooth boundary curve.
    Rank2,
    /// Rank-one covariance: the boundary degenerates to half-plane /
    /// quadrant-corner edges.
    Rank1,
    /// Zero covariance: the region is exactly the quadrant `{z <= 0}`
    /// (flag only, the polyline is empty).
    Rank0Quadrant,
}

/// Down-closed set `{z : psi(-z1, -z2; V) >= 1 - eps}` with an exported
/// boundary polyline over a bounded window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantileRegion {
    pub covariance: DispersionMatrix,
    pub epsilon: f64,
    /// Ordered boundary points: first coordinate strictly increasing, second
    /// non-increasing; the region lies weakly below-left.
    pub boundary: Vec<(f64, f64)>,
    pub shape: RegionShape,
    profile: RankProfile,
}

impl QuantileRegion {
    /// Exact membership query through `psi`.
    pub fn contains(&self, z1: f64, z2: f64) -> bool {
        psi_with_profile(-z1, -z2, &self.covariance, &self.profile) >= 1.0 - self.epsilon
    }

    /// Largest first coordinate with a nonempty fiber.
    pub fn z1_sup(&self) -> f64 {
        z1_sup(&self.covariance, self.epsilon)
    }
}

fn z1_sup(v: &DispersionMatrix, eps: f64) -> f64 {
    if v.v1 > 0.0 {
        v.v1.sqrt() * phi_inv(eps).expect("validated epsilon")
    } else {
        0.0
    }
}

/// Constructs the inverse region with its boundary sampled over a window of
/// `extent` standard deviations at `resolution` sweep points.
pub fn psi_inverse(
    v: &DispersionMatrix,
    eps: f64,
    extent: f64,
    resolution: usize,
) -> Result<QuantileRegion, MvnError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(MvnError::BadEpsilon(eps));
    }
    if extent <= 0.0 {
        return Err(MvnError::BadArgument(format!("extent must be positive, got {extent}")));
    }
    if resolution < 2 {
        return Err(MvnError::BadArgument(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    if !v.is_psd(1e-10) {
        return Err(MvnError::NotPsd(*v));
    }
    let profile = rank_profile(v, RANK_TOL);
    if profile.rank == 0 {
        return Ok(QuantileRegion {
            covariance: *v,
            epsilon: eps,
            boundary: Vec::new(),
            shape: RegionShape::Rank0Quadrant,
            profile,
        });
    }

    let s1 = v.v1.max(0.0).sqrt();
    let s2 = v.v12.max(0.0).sqrt();
    let sweep_scale = if s1 > 0.0 { s1 } else { s2 };
    let z2_scale = if s2 > 0.0 { s2 } else { s1 };
    let z1_hi = z1_sup(v, eps);
    let z1_lo = z1_hi - extent * sweep_scale;
    let z2_cap = if v.v12 > 0.0 {
        s2 * phi_inv(eps).expect("validated epsilon")
    } else {
        0.0
    };
    let z2_floor = z2_cap - extent * z2_scale;
    let z2_ceil = z2_cap + 1e-6 * (1.0 + z2_scale);

    let member =
        |z1: f64, z2: f64| psi_with_profile(-z1, -z2, v, &profile) >= 1.0 - eps;

    let mut boundary: Vec<(f64, f64)> = Vec::with_capacity(resolution);
    for k in 0..resolution {
        let frac = k as f64 / (resolution - 1) as f64;
        let z1 = z1_lo + frac * (z1_hi - z1_lo);
        if !member(z1, z2_floor) {
            continue; // fiber empty or below the window
        }
        let mut lo = z2_floor;
        let mut hi = z2_ceil;
        if member(z1, hi) {
            // Closed-boundary knife edge; emit the cap directly.
            boundary.push((z1, hi));
            continue;
        }
        while hi - lo > BOUNDARY_BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if member(z1, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        boundary.push((z1, lo));
    }

    // Down-closedness can be blurred by bisection noise at the last digit;
    // clamp so the exported polyline is exactly monotone.
    for k in 1..boundary.len() {
        if boundary[k].1 > boundary[k - 1].1 {
            boundary[k].1 = boundary[k - 1].1;
        }
    }
    boundary.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);

    let shape = if profile.rank == 2 { RegionShape::Rank2 } else { RegionShape::Rank1 };
    Ok(QuantileRegion { covariance: *v, epsilon: eps, boundary, shape, profile })
}

/// Largest `t` with `(t, t)` in the inverse region: the symmetric boundary
/// point, by bisection on the exact membership predicate (valid at every
/// rank; the zero-covariance quadrant gives 0).
pub fn symmetric_boundary_point(v: &DispersionMatrix, eps: f64) -> Result<f64, MvnError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(MvnError::BadEpsilon(eps));
    }
    if !v.is_psd(1e-10) {
        return Err(MvnError::NotPsd(*v));
    }
    let profile = rank_profile(v, RANK_TOL);
    let member = |t: f64| psi_with_profile(-t, -t, v, &profile) >= 1.0 - eps;
    let scale = v.trace().max(0.0).sqrt();
    let mut lo = -12.0 * scale - 1.0;
    let mut hi = 12.0 * scale + 1.0;
    debug_assert!(member(lo) && !member(hi));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if member(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Boundary samples for gap evaluation; synthesizes quadrant edges when the
/// polyline is empty (rank 0).
fn gap_samples(region: &QuantileRegion, scale: f64) -> Vec<(f64, f64)> {
    if !region.boundary.is_empty() {
        return region.boundary.clone();
    }
    let mut pts = vec![(0.0, 0.0)];
    for k in 1..=32 {
        let t = scale * k as f64 / 32.0;
        pts.push((-t, 0.0));
        pts.push((0.0, -t));
    }
    pts
}

/// Smallest shift along the all-ones direction taking `point` into the
/// region; the region is down-closed, so membership is monotone in the shift.
fn min_shift_into(region: &QuantileRegion, point: (f64, f64)) -> f64 {
    if region.contains(point.0, point.1) {
        return 0.0;
    }
    let mut hi = 1e-3;
    while !region.contains(point.0 - hi, point.1 - hi) {
        hi *= 2.0;
        if hi > 1e9 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if region.contains(point.0 - mid, point.1 - mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Smallest `delta >= 0` such that the boundary of `psi_inverse(v_prime, eps)`
/// shifted by `-delta * 1` lies inside `psi_inverse(v, eps)` and shifted by
/// `+delta * 1` contains it, evaluated on the sampled boundaries.
pub fn region_continuity_gap(
    v: &DispersionMatrix,
    v_prime: &DispersionMatrix,
    eps: f64,
) -> Result<f64, MvnError> {
    let region_a = psi_inverse(v, eps, DEFAULT_EXTENT, 129)?;
    let region_b = psi_inverse(v_prime, eps, DEFAULT_EXTENT, 129)?;
    let scale = v
        .trace()
        .max(v_prime.trace())
        .max(1e-12)
        .sqrt();
    let mut delta: f64 = 0.0;
    for pt in gap_samples(&region_b, scale) {
        delta = delta.max(min_shift_into(&region_a, pt));
    }
    for pt in gap_samples(&region_a, scale) {
        delta = delta.max(min_shift_into(&region_b, pt));
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phi_at_zero_is_half() {
        assert_eq!(phi(0.0), 0.5);
    }

    #[test]
    fn phi_inv_at_half_is_zero() {
        assert!(phi_inv(0.5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn phi_inv_rejects_out_of_range() {
        assert!(phi_inv(0.0).is_err());
        assert!(phi_inv(1.0).is_err());
        assert!(phi_inv(-0.3).is_err());
    }

    /// Bisection oracle for the quantile, independent of phi_inv.
    fn bisect_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-20.0, 20.0);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn phi_inv_quarter_matches_bisection() {
        let got = phi_inv(0.25).unwrap();
        let oracle = bisect_quantile(0.25);
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        // Frozen reference value.
        assert!((got - (-0.6744897501960817)).abs() < 1e-12);
    }

    #[test]
    fn phi_round_trip_to_1e12() {
        for k in 1..2000 {
            let p = k as f64 / 2000.0;
            let z = phi_inv(p).unwrap();
            assert!((phi(z) - p).abs() <= 1e-12, "p = {p}");
        }
        for &p in &[1e-10, 1e-8, 1e-4, 1.0 - 1e-4, 1.0 - 1e-8, 1.0 - 1e-10] {
            let z = phi_inv(p).unwrap();
            assert!((phi(z) - p).abs() <= 1e-12, "tail p = {p}");
        }
    }

    #[test]
    fn psi_identity_origin() {
        let v = DispersionMatrix::identity();
        assert!((psi(0.0, 0.0, &v).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn psi_perfect_correlation_min_form() {
        let v = DispersionMatrix::new(1.0, 1.0, 1.0);
        assert!((psi(0.0, 10.0, &v).unwrap() - 0.5).abs() < 1e-12);
        assert!((psi(1.3, -0.4, &v).unwrap() - phi(-0.4)).abs() < 1e-12);
    }

    #[test]
    fn psi_independent_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let s1: f64 = rng.gen_range(0.2..3.0);
            let s2: f64 = rng.gen_range(0.2..3.0);
            let z1: f64 = rng.gen_range(-4.0..4.0);
            let z2: f64 = rng.gen_range(-4.0..4.0);
            let v = DispersionMatrix::diagonal(s1 * s1, s2 * s2);
            let got = psi(z1, z2, &v).unwrap();
            let want = phi(z1 / s1) * phi(z2 / s2);
            assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
        }
    }

    #[test]
    fn psi_rank1_axis_aligned_exact() {
        let v = DispersionMatrix::diagonal(1.0, 0.0);
        assert!((psi(0.7, 0.1, &v).unwrap() - phi(0.7)).abs() < 1e-14);
        assert_eq!(psi(0.7, -0.1, &v).unwrap(), 0.0);
    }

    #[test]
    fn psi_rank0_is_indicator() {
        let v = DispersionMatrix::zero();
        assert_eq!(psi(0.0, 0.0, &v).unwrap(), 1.0);
        assert_eq!(psi(-1e-12, 5.0, &v).unwrap(), 0.0);
    }

    #[test]
    fn psi_rejects_non_psd() {
        let v = DispersionMatrix::new(1.0, 1.0, 1.5);
        assert!(matches!(psi(0.0, 0.0, &v), Err(MvnError::NotPsd(_))));
    }

    /// Monte Carlo oracle with explicit two-variable sampling: z1 = s1*g1,
    /// z2 = s2*(rho*g1 + sqrt(1-rho^2)*g2), Box-Muller normals.
    fn mc_orthant(z1: f64, z2: f64, rho: f64, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0u64;
        let comp = (1.0 - rho * rho).sqrt();
        for _ in 0..samples {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let g1 = r * (2.0 * std::f64::consts::PI * u2).cos();
            let g2 = r * (2.0 * std::f64::consts::PI * u2).sin();
            let a = g1;
            let b = rho * g1 + comp * g2;
            if a <= z1 && b <= z2 {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        (p, se)
    }

    #[test]
    fn psi_matches_monte_carlo() {
        let v = DispersionMatrix::new(1.0, 1.0, 0.5);
        let got = psi(-1.0, 0.5, &v).unwrap();
        let (mc, se) = mc_orthant(-1.0, 0.5, 0.5, 2_000_000, 99);
        assert!(
            (got - mc).abs() < 4.0 * se,
            "psi {got} vs MC {mc} (se {se})"
        );
    }

    #[test]
    fn psi_monotone_and_limits() {
        let v = DispersionMatrix::new(1.0, 2.0, -0.7);
        let mut prev = 0.0;
        for k in 0..40 {
            let z = -6.0 + 0.3 * k as f64;
            let cur = psi(z, 1.0, &v).unwrap();
            assert!(cur + 1e-12 >= prev, "not monotone in z1 at {z}");
            prev = cur;
        }
        assert!(psi(8.5, 8.5 * 2f64.sqrt(), &v).unwrap() > 1.0 - 1e-10);
        assert!(psi(-9.5, 50.0, &v).unwrap() < 1e-10);
    }

    #[test]
    fn psi_inverse_zero_covariance_is_quadrant() {
        let r = psi_inverse(&DispersionMatrix::zero(), 0.3, 6.0, 64).unwrap();
        assert_eq!(r.shape, RegionShape::Rank0Quadrant);
        assert!(r.boundary.is_empty());
        assert!(r.contains(0.0, 0.0));
        assert!(r.contains(-3.0, -0.1));
        assert!(!r.contains(1e-9, -1.0));
    }

    #[test]
    fn psi_inverse_rank1_product_of_gaussian_and_point_mass() {
        let eps = 0.2;
        let r = psi_inverse(&DispersionMatrix::diagonal(1.0, 0.0), eps, 6.0, 64).unwrap();
        assert_eq!(r.shape, RegionShape::Rank1);
        let c = phi_inv(eps).unwrap();
        assert!(r.contains(c - 1e-6, -0.5));
        assert!(!r.contains(c + 1e-6, -0.5));
        assert!(r.contains(c - 0.2, 0.0));
        assert!(!r.contains(c - 0.2, 1e-9));
    }

    #[test]
    fn psi_inverse_identity_boundary_tends_to_marginal_quantile() {
        let eps = 0.25;
        let r = psi_inverse(&DispersionMatrix::identity(), eps, 6.0, 128).unwrap();
        let q = phi_inv(eps).unwrap();
        // As z2 -> -inf the fiber cap in z1 approaches the marginal quantile.
        assert!(r.contains(q - 1e-3, -30.0));
        assert!(!r.contains(q + 1e-3, -30.0));
        // And the analytic sup matches.
        assert!((r.z1_sup() - q).abs() < 1e-12);
    }

    #[test]
    fn psi_inverse_boundary_points_sit_on_level_set() {
        let v = DispersionMatrix::new(1.0, 1.5, 0.6);
        let eps = 0.1;
        let r = psi_inverse(&v, eps, 6.0, 64).unwrap();
        assert!(!r.boundary.is_empty());
        for &(z1, z2) in &r.boundary {
            let val = psi(-z1, -z2, &v).unwrap();
            assert!(
                (val - (1.0 - eps)).abs() < 1e-6,
                "boundary point ({z1}, {z2}) has psi {val}"
            );
        }
        // Ordered: z1 strictly increasing, z2 non-increasing.
        for w in r.boundary.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(w[1].1 <= w[0].1);
        }
    }

    #[test]
    fn psi_inverse_down_closed_on_random_points() {
        let v = DispersionMatrix::new(0.8, 1.2, -0.3);
        let r = psi_inverse(&v, 0.35, 6.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let z1: f64 = rng.gen_range(-4.0..2.0);
            let z2: f64 = rng.gen_range(-4.0..2.0);
            if r.contains(z1, z2) {
                let d1: f64 = rng.gen_range(0.0..2.0);
                let d2: f64 = rng.gen_range(0.0..2.0);
                assert!(r.contains(z1 - d1, z2 - d2));
            }
        }
    }

    #[test]
    fn psi_inverse_epsilon_monotone() {
        let v = DispersionMatrix::new(1.0, 1.0, 0.4);
        let small = psi_inverse(&v, 0.1, 6.0, 64).unwrap();
        let large = psi_inverse(&v, 0.3, 6.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let z1: f64 = rng.gen_range(-4.0..2.0);
            let z2: f64 = rng.gen_range(-4.0..2.0);
            if small.contains(z1, z2) {
                assert!(large.contains(z1, z2), "({z1}, {z2})");
            }
        }
    }

    #[test]
    fn psi_inverse_scaling_law() {
        // psi_inverse(c^2 V, eps) = c * psi_inverse(V, eps).
        let v = DispersionMatrix::new(1.0, 2.0, 0.8);
        let c = 1.7;
        let eps = 0.15;
        let base = psi_inverse(&v, eps, 6.0, 64).unwrap();
        let scaled = psi_inverse(&v.scaled(c), eps, 6.0, 64).unwrap();
        for &(z1, z2) in &base.boundary {
            // A scaled boundary point must sit on the scaled region boundary.
            assert!(scaled.contains(c * (z1 - 1e-7), c * (z2 - 1e-7)));
            assert!(!scaled.contains(c * (z1 + 1e-5), c * (z2 + 1e-5)));
        }
    }

    #[test]
    fn continuity_gap_zero_for_identical() {
        let v = DispersionMatrix::new(1.0, 1.3, 0.2);
        let d = region_continuity_gap(&v, &v, 0.2).unwrap();
        assert!(d < 1e-6, "gap {d}");
    }

    #[test]
    fn continuity_gap_shrinks_as_covariances_converge() {
        let v = DispersionMatrix::identity();
        let eps = 0.1;
        let mut prev = f64::INFINITY;
        for &scale in &[1.1f64, 1.05, 1.02, 1.01] {
            let vp = v.scaled(scale.sqrt());
            let d = region_continuity_gap(&v, &vp, eps).unwrap();
            assert!(d > 0.0, "expected positive gap at scale {scale}");
            assert!(d < prev + 1e-9, "gap did not shrink: {d} vs {prev}");
            prev = d;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn continuity_gap_near_rank1_limit() {
        // A nearly singular covariance behaves like its rank-1 limit.
        let v = DispersionMatrix::diagonal(1.0, 1e-8);
        let limit = DispersionMatrix::diagonal(1.0, 0.0);
        let d = region_continuity_gap(&limit, &v, 0.2).unwrap();
        assert!(d < 5e-4, "gap to rank-1 limit too large: {d}");
    }

    #[test]
    fn symmetric_point_basics() {
        // Independent case: phi(-t)^2 = 1 - eps.
        let v = DispersionMatrix::identity();
        let eps = 0.1;
        let t = symmetric_boundary_point(&v, eps).unwrap();
        let want = -phi_inv((1.0f64 - eps).sqrt()).unwrap();
        assert!((t - want).abs() < 1e-9, "{t} vs {want}");
        // Zero covariance: the quadrant corner.
        let t0 = symmetric_boundary_point(&DispersionMatrix::zero(), 0.3).unwrap();
        assert!(t0.abs() < 1e-12);
    }

    #[test]
    fn marginal_weakenings_hold_on_boundary() {
        // Every member z satisfies z1 <= sqrt(v1) * quantile and
        // z2 <= sqrt(v12) * quantile (the transformed sum coordinate).
        for &eps in &[0.1, 0.5, 0.9] {
            let v = DispersionMatrix::new(1.0, 1.0, 0.999);
            let r = psi_inverse(&v, eps, 6.0, 64).unwrap();
            let q = phi_inv(eps).unwrap();
            for &(z1, z2) in &r.boundary {
                assert!(z1 <= v.v1.sqrt() * q + 1e-8, "eps {eps}: z1 {z1}");
                assert!(z2 <= v.v12.sqrt() * q + 1e-8, "eps {eps}: z2 {z2}");
            }
        }
    }
}
