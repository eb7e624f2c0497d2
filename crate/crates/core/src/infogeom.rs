//! Information geometry of a channel/input pair.
//!
//! For a joint input `P` and channel `W`, the per-letter information density
//! vector has entries
//!
//! ```text
//!   j1(x1, x2, y)  = ln W(y|x1,x2) - ln P(y|x2)
//!   j12(x1, x2, y) = ln W(y|x1,x2) - ln P(y)
//! ```
//!
//! with marginals induced by `P x W`.  Its mean is the mutual-information
//! vector `(I(X1;Y|X2), I(X1,X2;Y))`; its conditional covariance given
//! `(X1, X2)` is the 2x2 dispersion matrix that drives the square-root-of-n
//! backoff from the capacity region.  Zero-probability transitions carry
//! density minus infinity and are excluded from every expectation by their
//! zero weight (the usual `0 ln 0 = 0` convention).

use crate::channel::{Channel, JointInput};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance for counting an eigenvalue as zero.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum InfoGeomError {
    #[error("input distribution is {px1}x{px2} but channel expects {cx1}x{cx2}")]
    DimensionMismatch { px1: usize, px2: usize, cx1: usize, cx2: usize },
    #[error("information density undefined at (x1={x1}, x2={x2}, y={y}): positive transition with zero induced marginal")]
    UndefinedDensity { x1: usize, x2: usize, y: usize },
    #[error("symbol out of range: (x1={x1}, x2={x2}, y={y})")]
    SymbolRange { x1: usize, x2: usize, y: usize },
    #[error("dispersion matrix is not positive semi-definite (eigenvalues {d1}, {d2})")]
    NotPsd { d1: f64, d2: f64 },
}

/// Mutual-information vector `(I1, I12)` in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoVector {
    /// `I(X1; Y | X2)`.
    pub i1: f64,
    /// `I(X1, X2; Y)`.
    pub i12: f64,
}

/// Symmetric 2x2 conditional covariance of the information density vector,
/// entries in nats squared.  The matrix is `[[v1, v1_12], [v1_12, v12]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionMatrix {
    /// Variance of the first coordinate.
    pub v1: f64,
    /// Variance of the second (sum-rate) coordinate.
    pub v12: f64,
    /// Covariance between the coordinates.
    pub v1_12: f64,
}

impl DispersionMatrix {
    pub fn new(v1: f64, v12: f64, v1_12: f64) -> Self {
        Self { v1, v12, v1_12 }
    }

    pub fn zero() -> Self {
        Self { v1: 0.0, v12: 0.0, v1_12: 0.0 }
    }

    pub fn diagonal(v1: f64, v12: f64) -> Self {
        Self { v1, v12, v1_12: 0.0 }
    }

    pub fn identity() -> Self {
        Self { v1: 1.0, v12: 1.0, v1_12: 0.0 }
    }

    pub fn trace(&self) -> f64 {
        self.v1 + self.v12
    }

    /// Scales the covariance by `c*c` (the law of `c Z`).
    pub fn scaled(&self, c: f64) -> Self {
        Self { v1: c * c * self.v1, v12: c * c * self.v12, v1_12: c * c * self.v1_12 }
    }

    /// Checks positive semi-definiteness within the stated slack.
    pub fn is_psd(&self, slack: f64) -> bool {
        let (d1, d2) = eigenvalues(self);
        self.v1 >= -slack && self.v12 >= -slack && d1 >= -slack && d2 >= -slack
    }
}

/// Eigenstructure of a dispersion matrix with a rank decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    /// Number of eigenvalues above the rank threshold.
    pub rank: usize,
    /// Orthonormal eigenvector columns `u[0]`, `u[1]`, ordered by descending
    /// eigenvalue, each with its first nonzero component positive.
    pub u: [[f64; 2]; 2],
    /// Eigenvalues, descending.
    pub d: [f64; 2],
}

impl RankProfile {
    /// Reconstructs `u diag(d) u^T`.
    pub fn reconstruct(&self) -> DispersionMatrix {
        let [u1, u2] = self.u;
        let [d1, d2] = self.d;
        DispersionMatrix {
            v1: d1 * u1[0] * u1[0] + d2 * u2[0] * u2[0],
            v12: d1 * u1[1] * u1[1] + d2 * u2[1] * u2[1],
            v1_12: d1 * u1[0] * u1[1] + d2 * u2[0] * u2[1],
        }
    }
}

/// Closed-form eigenvalues of the symmetric 2x2 matrix, descending.
fn eigenvalues(v: &DispersionMatrix) -> (f64, f64) {
    let tr = v.v1 + v.v12;
    let diff = v.v1 - v.v12;
    let disc = (diff * diff + 4.0 * v.v1_12 * v.v1_12).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

/// Closed-form symmetric eigendecomposition with a deterministic sign
/// convention: columns ordered by descending eigenvalue, first nonzero
/// component of each column positive.  Eigenvalues below `tol * (1 + trace)`
/// count as zero for the rank.
pub fn rank_profile(v: &DispersionMatrix, tol: f64) -> RankProfile {
    assert!(tol > 0.0, "rank tolerance must be positive");
    let (d1, d2) = eigenvalues(v);
    let threshold = tol * (1.0 + v.trace().abs());

    let b = v.v1_12;
    let u1 = if b.abs() > threshold.max(f64::MIN_POSITIVE) {
        // Two candidate eigenvector formulas; take the better-conditioned one.
        let cand_a = [b, d1 - v.v1];
        let cand_b = [d1 - v.v12, b];
        let na = (cand_a[0] * cand_a[0] + cand_a[1] * cand_a[1]).sqrt();
        let nb = (cand_b[0] * cand_b[0] + cand_b[1] * cand_b[1]).sqrt();
        let (c, n) = if na >= nb { (cand_a, na) } else { (cand_b, nb) };
        [c[0] / n, c[1] / n]
    } else if v.v1 >= v.v12 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let mut u1 = u1;
    normalize_sign(&mut u1);
    let mut u2 = [-u1[1], u1[0]];
    normalize_sign(&mut u2);

    let rank = [d1, d2].iter().filter(|&&e| e > threshold).count();
    RankProfile { rank, u: [u1, u2], d: [d1, d2] }
}

fn normalize_sign(u: &mut [f64; 2]) {
    let lead = if u[0].abs() > 1e-300 { u[0] } else { u[1] };
    if lead < 0.0 {
        u[0] = -u[0];
        u[1] = -u[1];
    }
}

/// Reusable buffers for repeated mutual-information evaluations on one
/// channel, used by the simplex optimizers where allocation would dominate.
pub(crate) struct MiScratch {
    py: Vec<f64>,
    qx2y: Vec<f64>,
    px2: Vec<f64>,
    norm: Vec<f64>,
}

impl MiScratch {
    pub(crate) fn new(ch: &Channel) -> Self {
        Self {
            py: vec![0.0; ch.y_size()],
            qx2y: vec![0.0; ch.x2_size() * ch.y_size()],
            px2: vec![0.0; ch.x2_size()],
            norm: vec![0.0; ch.x1_size() * ch.x2_size()],
        }
    }

    /// `(I1, I12)` for a nonnegative weight vector over the joint alphabet,
    /// normalized internally.  Weight vectors with zero total are rejected by
    /// the callers before they get here.
    pub(crate) fn info_pair(&mut self, ch: &Channel, raw: &[f64]) -> (f64, f64) {
        let (nx1, nx2, ny) = (ch.x1_size(), ch.x2_size(), ch.y_size());
        let total: f64 = raw.iter().sum();
        for (n, r) in self.norm.iter_mut().zip(raw.iter()) {
            *n = r.max(0.0) / total;
        }
        self.py.iter_mut().for_each(|v| *v = 0.0);
        self.qx2y.iter_mut().for_each(|v| *v = 0.0);
        self.px2.iter_mut().for_each(|v| *v = 0.0);
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                let w = self.norm[x1 * nx2 + x2];
                if w == 0.0 {
                    continue;
                }
                self.px2[x2] += w;
                for y in 0..ny {
                    let t = w * ch.w(x1, x2, y);
                    self.py[y] += t;
                    self.qx2y[x2 * ny + y] += t;
                }
            }
        }
        let mut i1 = 0.0;
        let mut i12 = 0.0;
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                let px = self.norm[x1 * nx2 + x2];
                if px == 0.0 {
                    continue;
                }
                for y in 0..ny {
                    let w = ch.w(x1, x2, y);
                    if w == 0.0 {
                        continue;
                    }
                    let weight = px * w;
                    let cond = self.qx2y[x2 * ny + y] / self.px2[x2];
                    i1 += weight * (w.ln() - cond.ln());
                    i12 += weight * (w.ln() - self.py[y].ln());
                }
            }
        }
        (i1, i12)
    }
}

fn check_dims(p: &JointInput, ch: &Channel) -> Result<(), InfoGeomError> {
    if p.x1_size() != ch.x1_size() || p.x2_size() != ch.x2_size() {
        return Err(InfoGeomError::DimensionMismatch {
            px1: p.x1_size(),
            px2: p.x2_size(),
            cx1: ch.x1_size(),
            cx2: ch.x2_size(),
        });
    }
    Ok(())
}

/// Marginals `P_Y` and the joint `P(x2, y)` induced by `P x W`.
struct InducedMarginals {
    /// `P_Y(y)`.
    py: Vec<f64>,
    /// `sum_{x1} P(x1, x2) W(y | x1, x2)`, indexed `[x2][y]`.
    qx2y: Vec<f64>,
    /// `P(x2)`.
    px2: Vec<f64>,
}

fn induced_marginals(p: &JointInput, ch: &Channel) -> InducedMarginals {
    let (nx1, nx2, ny) = (ch.x1_size(), ch.x2_size(), ch.y_size());
    let mut py = vec![0.0; ny];
    let mut qx2y = vec![0.0; nx2 * ny];
    let px2 = p.marginal_x2();
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            let w = p.p(x1, x2);
            if w == 0.0 {
                continue;
            }
            for y in 0..ny {
                let t = w * ch.w(x1, x2, y);
                py[y] += t;
                qx2y[x2 * ny + y] += t;
            }
        }
    }
    InducedMarginals { py, qx2y, px2 }
}

/// Dense `(j1, j12)` lookup tables over `(x1, x2, y)`, indexed like the
/// channel's transition array.  Zero transitions hold minus infinity; cells
/// whose densities are undefined (zero induced marginal) hold NaN and are
/// never reachable from sequences that respect the input's support.
pub(crate) fn density_tables(p: &JointInput, ch: &Channel) -> Result<(Vec<f64>, Vec<f64>), InfoGeomError> {
    check_dims(p, ch)?;
    let m = induced_marginals(p, ch);
    let (nx1, nx2, ny) = (ch.x1_size(), ch.x2_size(), ch.y_size());
    let mut j1 = vec![f64::NAN; nx1 * nx2 * ny];
    let mut j12 = vec![f64::NAN; nx1 * nx2 * ny];
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            for y in 0..ny {
                let idx = (x1 * nx2 + x2) * ny + y;
                let w = ch.w(x1, x2, y);
                let py = m.py[y];
                let qx2y = m.qx2y[x2 * ny + y];
                let px2 = m.px2[x2];
                if py <= 0.0 || qx2y <= 0.0 || px2 <= 0.0 {
                    continue; // NaN: unreachable under this input
                }
                if w == 0.0 {
                    j1[idx] = f64::NEG_INFINITY;
                    j12[idx] = f64::NEG_INFINITY;
                } else {
                    let cond = qx2y / px2;
                    j1[idx] = w.ln() - cond.ln();
                    j12[idx] = w.ln() - py.ln();
                }
            }
        }
    }
    Ok((j1, j12))
}

/// Per-letter information density pair `(j1, j12)` in nats.
///
/// Symbols of `P`-probability zero are legal arguments as long as the induced
/// denominators are positive; a positive transition over a zero denominator is
/// an undefined-density error, and a zero transition over positive
/// denominators yields minus infinity in both coordinates.
pub fn info_density(
    p: &JointInput,
    ch: &Channel,
    x1: usize,
    x2: usize,
    y: usize,
) -> Result<(f64, f64), InfoGeomError> {
    check_dims(p, ch)?;
    if x1 >= ch.x1_size() || x2 >= ch.x2_size() || y >= ch.y_size() {
        return Err(InfoGeomError::SymbolRange { x1, x2, y });
    }
    let m = induced_marginals(p, ch);
    density_from_marginals(&m, p, ch, x1, x2, y)
}

fn density_from_marginals(
    m: &InducedMarginals,
    _p: &JointInput,
    ch: &Channel,
    x1: usize,
    x2: usize,
    y: usize,
) -> Result<(f64, f64), InfoGeomError> {
    let ny = ch.y_size();
    let w = ch.w(x1, x2, y);
    let py = m.py[y];
    let px2 = m.px2[x2];
    let py_given_x2 = if px2 > 0.0 { m.qx2y[x2 * ny + y] / px2 } else { 0.0 };
    if py <= 0.0 || py_given_x2 <= 0.0 {
        if w > 0.0 {
            return Err(InfoGeomError::UndefinedDensity { x1, x2, y });
        }
        // 0/0: the transition never occurs and the marginal carries no mass.
        return Err(InfoGeomError::UndefinedDensity { x1, x2, y });
    }
    if w == 0.0 {
        return Ok((f64::NEG_INFINITY, f64::NEG_INFINITY));
    }
    Ok((w.ln() - py_given_x2.ln(), w.ln() - py.ln()))
}

/// Mean of the information density vector: the mutual informations
/// `(I(X1;Y|X2), I(X1,X2;Y))`, by exact finite summation.
pub fn mean_vector(p: &JointInput, ch: &Channel) -> Result<InfoVector, InfoGeomError> {
    check_dims(p, ch)?;
    let m = induced_marginals(p, ch);
    let ny = ch.y_size();
    let mut i1 = 0.0;
    let mut i12 = 0.0;
    for x1 in 0..ch.x1_size() {
        for x2 in 0..ch.x2_size() {
            let px = p.p(x1, x2);
            if px == 0.0 {
                continue;
            }
            for y in 0..ny {
                let w = ch.w(x1, x2, y);
                if w == 0.0 {
                    continue;
                }
                let weight = px * w;
                let py_given_x2 = m.qx2y[x2 * ny + y] / m.px2[x2];
                i1 += weight * (w.ln() - py_given_x2.ln());
                i12 += weight * (w.ln() - m.py[y].ln());
            }
        }
    }
    Ok(InfoVector { i1, i12 })
}

/// Conditional dispersion matrix: the mixture over `(x1, x2)` of the
/// per-input covariance of the density vector under `W(.|x1,x2)`, mirroring
/// the defining formula term for term.
pub fn dispersion_matrix(p: &JointInput, ch: &Channel) -> Result<DispersionMatrix, InfoGeomError> {
    check_dims(p, ch)?;
    let m = induced_marginals(p, ch);
    let ny = ch.y_size();
    let mut v1 = 0.0;
    let mut v12 = 0.0;
    let mut v1_12 = 0.0;
    for x1 in 0..ch.x1_size() {
        for x2 in 0..ch.x2_size() {
            let px = p.p(x1, x2);
            if px == 0.0 {
                continue;
            }
            // Conditional means of (j1, j12) given this input pair.
            let mut m1 = 0.0;
            let mut m12 = 0.0;
            for y in 0..ny {
                let w = ch.w(x1, x2, y);
                if w == 0.0 {
                    continue;
                }
                let py_given_x2 = m.qx2y[x2 * ny + y] / m.px2[x2];
                m1 += w * (w.ln() - py_given_x2.ln());
                m12 += w * (w.ln() - m.py[y].ln());
            }
            let mut c11 = 0.0;
            let mut c22 = 0.0;
            let mut c12 = 0.0;
            for y in 0..ny {
                let w = ch.w(x1, x2, y);
                if w == 0.0 {
                    continue;
                }
                let py_given_x2 = m.qx2y[x2 * ny + y] / m.px2[x2];
                let a = (w.ln() - py_given_x2.ln()) - m1;
                let b = (w.ln() - m.py[y].ln()) - m12;
                c11 += w * a * a;
                c22 += w * b * b;
                c12 += w * a * b;
            }
            v1 += px * c11;
            v12 += px * c22;
            v1_12 += px * c12;
        }
    }
    Ok(DispersionMatrix { v1, v12, v1_12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LN2: f64 = std::f64::consts::LN_2;

    pub(crate) fn noiseless_product() -> Channel {
        let mut w = vec![0.0; 2 * 2 * 4];
        for x1 in 0..2 {
            for x2 in 0..2 {
                w[(x1 * 2 + x2) * 4 + (x1 * 2 + x2)] = 1.0;
            }
        }
        Channel::new(2, 2, 4, w).unwrap()
    }

    fn x1_independent_channel() -> Channel {
        // W(y | x1, x2) = W(y | x2): user 1 has no effect.
        let w = vec![
            0.8, 0.2, // x1=0 x2=0
            0.3, 0.7, // x1=0 x2=1
            0.8, 0.2, // x1=1 x2=0
            0.3, 0.7, // x1=1 x2=1
        ];
        Channel::new(2, 2, 2, w).unwrap()
    }

    pub(crate) fn fixture_2x2x2() -> Channel {
        // Rows (0.9,0.1), (0.1,0.9), (0.8,0.2), (0.2,0.8).
        let w = vec![0.9, 0.1, 0.1, 0.9, 0.8, 0.2, 0.2, 0.8];
        Channel::new(2, 2, 2, w).unwrap()
    }

    pub(crate) fn random_channel(rng: &mut ChaCha8Rng, nx1: usize, nx2: usize, ny: usize) -> Channel {
        let mut w = Vec::with_capacity(nx1 * nx2 * ny);
        for _ in 0..nx1 * nx2 {
            let raw: Vec<f64> = (0..ny).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = raw.iter().sum();
            w.extend(raw.iter().map(|v| v / s));
        }
        Channel::new(nx1, nx2, ny, w).unwrap()
    }

    pub(crate) fn random_input(rng: &mut ChaCha8Rng, nx1: usize, nx2: usize) -> JointInput {
        let raw: Vec<f64> = (0..nx1 * nx2).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        JointInput::new(nx1, nx2, raw.iter().map(|v| v / s).collect()).unwrap()
    }

    /// Brute-force oracle: explicitly re-sum the marginals and both
    /// log-ratios, independently of the library path.
    fn oracle_density(
        p: &JointInput,
        ch: &Channel,
        x1: usize,
        x2: usize,
        y: usize,
    ) -> (f64, f64) {
        let mut py = 0.0;
        for a in 0..ch.x1_size() {
            for b in 0..ch.x2_size() {
                py += p.p(a, b) * ch.w(a, b, y);
            }
        }
        let mut px2 = 0.0;
        let mut pyx2 = 0.0;
        for a in 0..ch.x1_size() {
            px2 += p.p(a, x2);
            pyx2 += p.p(a, x2) * ch.w(a, x2, y);
        }
        let cond = pyx2 / px2;
        ((ch.w(x1, x2, y) / cond).ln(), (ch.w(x1, x2, y) / py).ln())
    }

    #[test]
    fn density_noiseless_uniform() {
        let ch = noiseless_product();
        let p = JointInput::uniform(2, 2);
        for x1 in 0..2 {
            for x2 in 0..2 {
                let y = x1 * 2 + x2;
                let (j1, j12) = info_density(&p, &ch, x1, x2, y).unwrap();
                assert!((j1 - LN2).abs() < 1e-14, "j1 = {j1}");
                assert!((j12 - 2.0 * LN2).abs() < 1e-14, "j12 = {j12}");
            }
        }
    }

    #[test]
    fn density_zero_when_x1_irrelevant() {
        let ch = x1_independent_channel();
        let p = JointInput::uniform(2, 2);
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y in 0..2 {
                    let (j1, _) = info_density(&p, &ch, x1, x2, y).unwrap();
                    assert!(j1.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn density_matches_resummation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let ch = random_channel(&mut rng, 2, 2, 2);
            let p = random_input(&mut rng, 2, 2);
            for x1 in 0..2 {
                for x2 in 0..2 {
                    for y in 0..2 {
                        let (j1, j12) = info_density(&p, &ch, x1, x2, y).unwrap();
                        let (o1, o12) = oracle_density(&p, &ch, x1, x2, y);
                        assert!((j1 - o1).abs() < 1e-12);
                        assert!((j12 - o12).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn density_minus_infinity_on_zero_transition() {
        // Z-like channel: W(1 | 0, 0) = 0 but y=1 is reachable from x1=1.
        let w = vec![1.0, 0.0, 1.0, 0.0, 0.5, 0.5, 0.5, 0.5];
        let ch = Channel::new(2, 2, 2, w).unwrap();
        let p = JointInput::uniform(2, 2);
        let (j1, j12) = info_density(&p, &ch, 0, 0, 1).unwrap();
        assert!(j1.is_infinite() && j1 < 0.0);
        assert!(j12.is_infinite() && j12 < 0.0);
    }

    #[test]
    fn density_undefined_when_marginal_zero() {
        // Input never uses x2=1, so P(y|x2=1) has a zero denominator; the
        // transition is positive, so the density is undefined.
        let ch = fixture_2x2x2();
        let p = JointInput::new(2, 2, vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        assert!(matches!(
            info_density(&p, &ch, 0, 1, 0),
            Err(InfoGeomError::UndefinedDensity { .. })
        ));
    }

    #[test]
    fn mean_vector_noiseless_uniform() {
        let ch = noiseless_product();
        let p = JointInput::uniform(2, 2);
        let iv = mean_vector(&p, &ch).unwrap();
        assert!((iv.i1 - LN2).abs() < 1e-14);
        assert!((iv.i12 - 2.0 * LN2).abs() < 1e-14);
    }

    #[test]
    fn mean_vector_degraded_to_user2() {
        let ch = x1_independent_channel();
        let p = JointInput::uniform(2, 2);
        let iv = mean_vector(&p, &ch).unwrap();
        assert!(iv.i1.abs() < 1e-14);
        // i12 = I(X2;Y) for this channel: computed by hand below.
        let py0 = 0.5 * 0.8 + 0.5 * 0.3;
        let py1 = 1.0 - py0;
        let expect = 0.5 * (0.8 * (0.8f64 / py0).ln() + 0.2 * (0.2f64 / py1).ln())
            + 0.5 * (0.3 * (0.3f64 / py0).ln() + 0.7 * (0.7f64 / py1).ln());
        assert!((iv.i12 - expect).abs() < 1e-14);
    }

    /// Independent triple-sum oracle for the mean vector.
    pub(crate) fn oracle_mean(p: &JointInput, ch: &Channel) -> (f64, f64) {
        let mut i1 = 0.0;
        let mut i12 = 0.0;
        for x1 in 0..ch.x1_size() {
            for x2 in 0..ch.x2_size() {
                for y in 0..ch.y_size() {
                    let weight = p.p(x1, x2) * ch.w(x1, x2, y);
                    if weight > 0.0 {
                        let (j1, j12) = oracle_density(p, ch, x1, x2, y);
                        i1 += weight * j1;
                        i12 += weight * j12;
                    }
                }
            }
        }
        (i1, i12)
    }

    /// Independent conditional-covariance oracle.
    pub(crate) fn oracle_dispersion(p: &JointInput, ch: &Channel) -> (f64, f64, f64) {
        let (mut v1, mut v12, mut v1_12) = (0.0, 0.0, 0.0);
        for x1 in 0..ch.x1_size() {
            for x2 in 0..ch.x2_size() {
                if p.p(x1, x2) == 0.0 {
                    continue;
                }
                let (mut m1, mut m12) = (0.0, 0.0);
                for y in 0..ch.y_size() {
                    if ch.w(x1, x2, y) > 0.0 {
                        let (j1, j12) = oracle_density(p, ch, x1, x2, y);
                        m1 += ch.w(x1, x2, y) * j1;
                        m12 += ch.w(x1, x2, y) * j12;
                    }
                }
                for y in 0..ch.y_size() {
                    if ch.w(x1, x2, y) > 0.0 {
                        let (j1, j12) = oracle_density(p, ch, x1, x2, y);
                        v1 += p.p(x1, x2) * ch.w(x1, x2, y) * (j1 - m1) * (j1 - m1);
                        v12 += p.p(x1, x2) * ch.w(x1, x2, y) * (j12 - m12) * (j12 - m12);
                        v1_12 += p.p(x1, x2) * ch.w(x1, x2, y) * (j1 - m1) * (j12 - m12);
                    }
                }
            }
        }
        (v1, v12, v1_12)
    }

    #[test]
    fn mean_vector_fixture_matches_oracle() {
        let ch = fixture_2x2x2();
        let p = JointInput::uniform(2, 2);
        let iv = mean_vector(&p, &ch).unwrap();
        let (o1, o12) = oracle_mean(&p, &ch);
        assert!((iv.i1 - o1).abs() < 1e-12);
        assert!((iv.i12 - o12).abs() < 1e-12);
    }

    #[test]
    fn dispersion_zero_for_deterministic_channel() {
        let ch = noiseless_product();
        let p = JointInput::uniform(2, 2);
        let v = dispersion_matrix(&p, &ch).unwrap();
        assert!(v.v1.abs() < 1e-14 && v.v12.abs() < 1e-14 && v.v1_12.abs() < 1e-14);
    }

    #[test]
    fn dispersion_first_row_zero_when_x1_irrelevant() {
        let ch = x1_independent_channel();
        let p = JointInput::uniform(2, 2);
        let v = dispersion_matrix(&p, &ch).unwrap();
        assert!(v.v1.abs() < 1e-14);
        assert!(v.v1_12.abs() < 1e-14);
        assert!(v.v12 > 0.0);
    }

    #[test]
    fn dispersion_fixture_matches_oracle() {
        let ch = fixture_2x2x2();
        let p = JointInput::uniform(2, 2);
        let v = dispersion_matrix(&p, &ch).unwrap();
        let (o1, o12, o112) = oracle_dispersion(&p, &ch);
        assert!((v.v1 - o1).abs() < 1e-12);
        assert!((v.v12 - o12).abs() < 1e-12);
        assert!((v.v1_12 - o112).abs() < 1e-12);
    }

    #[test]
    fn dispersion_psd_and_chain_rule_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let ch = random_channel(&mut rng, 2, 2, 2);
            let p = random_input(&mut rng, 2, 2);
            let v = dispersion_matrix(&p, &ch).unwrap();
            assert!(v.is_psd(1e-10), "not PSD: {v:?}");
            let iv = mean_vector(&p, &ch).unwrap();
            // i12 - i1 = I(X2;Y) >= 0, computed independently from marginals.
            let mut i2 = 0.0;
            let px2 = p.marginal_x2();
            let mut py = [0.0; 2];
            let mut pyx2 = [[0.0; 2]; 2];
            for x1 in 0..2 {
                for x2 in 0..2 {
                    for y in 0..2 {
                        let t = p.p(x1, x2) * ch.w(x1, x2, y);
                        py[y] += t;
                        pyx2[x2][y] += t;
                    }
                }
            }
            for x2 in 0..2 {
                for y in 0..2 {
                    if pyx2[x2][y] > 0.0 {
                        i2 += pyx2[x2][y] * ((pyx2[x2][y] / px2[x2] / py[y]).ln());
                    }
                }
            }
            assert!((iv.i12 - iv.i1 - i2).abs() < 1e-10);
            assert!(i2 >= -1e-12);
            assert!(iv.i1 >= -1e-12);
        }
    }

    #[test]
    fn rank_profile_zero_matrix() {
        let r = rank_profile(&DispersionMatrix::zero(), RANK_TOL);
        assert_eq!(r.rank, 0);
    }

    #[test]
    fn rank_profile_diag_one_zero() {
        let r = rank_profile(&DispersionMatrix::diagonal(1.0, 0.0), RANK_TOL);
        assert_eq!(r.rank, 1);
        assert_eq!(r.u[0], [1.0, 0.0]);
        assert!((r.d[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_profile_known_two_one_matrix() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1 (characteristic polynomial
        // x^2 - 4x + 3).
        let v = DispersionMatrix::new(2.0, 2.0, 1.0);
        let r = rank_profile(&v, RANK_TOL);
        assert_eq!(r.rank, 2);
        assert!((r.d[0] - 3.0).abs() < 1e-12);
        assert!((r.d[1] - 1.0).abs() < 1e-12);
        // Orthonormality.
        let dot = r.u[0][0] * r.u[1][0] + r.u[0][1] * r.u[1][1];
        assert!(dot.abs() < 1e-12);
        for col in r.u {
            let norm = (col[0] * col[0] + col[1] * col[1]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        // Sign convention: leading components positive.
        assert!(r.u[0][0] > 0.0 && r.u[1][0] > 0.0 || r.u[1][0].abs() < 1e-15);
    }

    #[test]
    fn rank_profile_reconstructs_randoms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let a: f64 = rng.gen_range(0.0..2.0);
            let c: f64 = rng.gen_range(0.0..2.0);
            let bmax = (a * c).sqrt();
            let b = rng.gen_range(-bmax..=bmax);
            let v = DispersionMatrix::new(a, c, b);
            let r = rank_profile(&v, RANK_TOL);
            let back = r.reconstruct();
            let err = (back.v1 - v.v1)
                .abs()
                .max((back.v12 - v.v12).abs())
                .max((back.v1_12 - v.v1_12).abs());
            assert!(err < 1e-10, "reconstruction error {err} for {v:?}");
        }
    }

    #[test]
    fn mean_matches_monte_carlo_expectation() {
        // Sample (x1,x2,y) from P x W and average the density vector; the
        // empirical mean must sit within 4 standard errors of mean_vector.
        let ch = fixture_2x2x2();
        let p = random_input(&mut ChaCha8Rng::seed_from_u64(17), 2, 2);
        let iv = mean_vector(&p, &ch).unwrap();
        let trials = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let (mut s1, mut s12, mut q1, mut q12) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..trials {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut cell = (0, 0);
            'outer: for x1 in 0..2 {
                for x2 in 0..2 {
                    acc += p.p(x1, x2);
                    if u <= acc {
                        cell = (x1, x2);
                        break 'outer;
                    }
                }
            }
            let (x1, x2) = cell;
            let uy: f64 = rng.gen();
            let y = if uy <= ch.w(x1, x2, 0) { 0 } else { 1 };
            let (j1, j12) = info_density(&p, &ch, x1, x2, y).unwrap();
            s1 += j1;
            s12 += j12;
            q1 += j1 * j1;
            q12 += j12 * j12;
        }
        let n = trials as f64;
        let mean1 = s1 / n;
        let mean12 = s12 / n;
        let se1 = ((q1 / n - mean1 * mean1) / n).sqrt();
        let se12 = ((q12 / n - mean12 * mean12) / n).sqrt();
        assert!((mean1 - iv.i1).abs() < 4.0 * se1, "{mean1} vs {}", iv.i1);
        assert!((mean12 - iv.i12).abs() < 4.0 * se12, "{mean12} vs {}", iv.i12);
    }

    #[test]
    fn scratch_evaluator_agrees_with_mean_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let ch = random_channel(&mut rng, 2, 3, 2);
            let p = random_input(&mut rng, 2, 3);
            let iv = mean_vector(&p, &ch).unwrap();
            let mut scratch = MiScratch::new(&ch);
            let (i1, i12) = scratch.info_pair(&ch, p.p_flat());
            assert!((i1 - iv.i1).abs() < 1e-13);
            assert!((i12 - iv.i12).abs() < 1e-13);
        }
    }

    #[test]
    fn mean_vector_is_lipschitz_on_fixture() {
        // Regression pin: on the fixture channel, |I(P) - I(P')|_inf stays
        // below K * |P - P'|_inf for nearby full-support inputs.  Empirically
        // the ratio peaks near 3.4 on this channel; pin K = 6 with headroom.
        const K: f64 = 6.0;
        let ch = fixture_2x2x2();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let p = random_input(&mut rng, 2, 2);
            let delta: f64 = rng.gen_range(1e-5..1e-3);
            let mut q: Vec<f64> = p.p_flat().to_vec();
            // Move mass delta between two cells, keeping normalization.
            let i = rng.gen_range(0..4);
            let mut j = rng.gen_range(0..4);
            if j == i {
                j = (j + 1) % 4;
            }
            let shift = delta.min(q[i] - 1e-6);
            q[i] -= shift;
            q[j] += shift;
            let q = JointInput::new(2, 2, q).unwrap();
            let d = q.linf_distance(&p);
            let a = mean_vector(&p, &ch).unwrap();
            let b = mean_vector(&q, &ch).unwrap();
            let gap = (a.i1 - b.i1).abs().max((a.i12 - b.i12).abs());
            assert!(gap <= K * d + 1e-12, "gap {gap} exceeds {K} * {d}");
        }
    }
}
