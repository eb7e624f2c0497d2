//! Channel and input-distribution primitives.
//!
//! A two-sender multiple-access channel is a finite conditional law
//! `W(y | x1, x2)`.  Everything downstream (information densities, dispersion
//! matrices, rate regions, simulated codes) is evaluated against a validated
//! [`Channel`] plus a [`JointInput`] distribution over the sender alphabets.
//!
//! Validation is strict: a channel whose rows do not sum to one is an error,
//! never silently renormalized, because silent correction masks experiment
//! bugs.  Two tolerances are used: `1e-12` for values constructed in code and
//! `1e-9` for values parsed from files, which are typically human-edited
//! decimals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row-sum / probability tolerance for analytic (in-code) constructions.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Row-sum / probability tolerance for file input.
pub const FILE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("malformed channel document: {0}")]
    Parse(String),
    #[error("alphabet sizes must be at least 1 (got x1={x1}, x2={x2}, y={y})")]
    EmptyAlphabet { x1: usize, x2: usize, y: usize },
    #[error("dimension mismatch: w has {got} entries, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("negative or non-finite entry {value} at (x1={x1}, x2={x2}, y={y})")]
    BadEntry { x1: usize, x2: usize, y: usize, value: f64 },
    #[error("row (x1={x1}, x2={x2}) sums to {sum}, deviating from 1 by more than {tol}")]
    RowSum { x1: usize, x2: usize, sum: f64, tol: f64 },
    #[error("distribution entries sum to {sum}, deviating from 1 by more than {tol}")]
    DistSum { sum: f64, tol: f64 },
    #[error("negative or non-finite probability {value} at (x1={x1}, x2={x2})")]
    BadProbability { x1: usize, x2: usize, value: f64 },
    #[error("entry {value} at (x1={x1}, x2={x2}) times {n} is not an integer")]
    NotAnNType { x1: usize, x2: usize, value: f64, n: u64 },
}

/// Finite-alphabet memoryless transition law `W(y | x1, x2)`.
///
/// Stored densely, indexed `[x1][x2][y]`.  Immutable after construction and
/// safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    x1_size: usize,
    x2_size: usize,
    y_size: usize,
    w: Vec<f64>,
}

/// Serialized form of [`Channel`]; see the channel JSON format in the README.
#[derive(Debug, Serialize, Deserialize)]
struct ChannelDoc {
    x1_size: usize,
    x2_size: usize,
    y_size: usize,
    w: Vec<Vec<Vec<f64>>>,
}

impl Channel {
    /// Builds a channel from a dense `[x1][x2][y]`-indexed flat slice,
    /// validating at the analytic tolerance `1e-12`.
    pub fn new(x1_size: usize, x2_size: usize, y_size: usize, w: Vec<f64>) -> Result<Self, ChannelError> {
        Self::with_tolerance(x1_size, x2_size, y_size, w, ANALYTIC_TOL)
    }

    fn with_tolerance(
        x1_size: usize,
        x2_size: usize,
        y_size: usize,
        w: Vec<f64>,
        tol: f64,
    ) -> Result<Self, ChannelError> {
        if x1_size == 0 || x2_size == 0 || y_size == 0 {
            return Err(ChannelError::EmptyAlphabet { x1: x1_size, x2: x2_size, y: y_size });
        }
        let expected = x1_size * x2_size * y_size;
        if w.len() != expected {
            return Err(ChannelError::Dimension { got: w.len(), expected });
        }
        for x1 in 0..x1_size {
            for x2 in 0..x2_size {
                let mut sum = 0.0;
                for y in 0..y_size {
                    let v = w[(x1 * x2_size + x2) * y_size + y];
                    if !v.is_finite() || v < 0.0 || v > 1.0 + tol {
                        return Err(ChannelError::BadEntry { x1, x2, y, value: v });
                    }
                    sum += v;
                }
                if (sum - 1.0).abs() > tol {
                    return Err(ChannelError::RowSum { x1, x2, sum, tol });
                }
            }
        }
        Ok(Self { x1_size, x2_size, y_size, w })
    }

    /// Parses and validates the JSON channel format at the file tolerance `1e-9`.
    pub fn from_json(source: &str) -> Result<Self, ChannelError> {
        let doc: ChannelDoc =
            serde_json::from_str(source).map_err(|e| ChannelError::Parse(e.to_string()))?;
        if doc.w.len() != doc.x1_size {
            return Err(ChannelError::Parse(format!(
                "w has {} x1-slices, expected {}",
                doc.w.len(),
                doc.x1_size
            )));
        }
        let mut flat = Vec::with_capacity(doc.x1_size * doc.x2_size * doc.y_size);
        for (x1, slice) in doc.w.iter().enumerate() {
            if slice.len() != doc.x2_size {
                return Err(ChannelError::Parse(format!(
                    "w[{x1}] has {} x2-rows, expected {}",
                    slice.len(),
                    doc.x2_size
                )));
            }
            for (x2, row) in slice.iter().enumerate() {
                if row.len() != doc.y_size {
                    return Err(ChannelError::Parse(format!(
                        "w[{x1}][{x2}] has {} entries, expected {}",
                        row.len(),
                        doc.y_size
                    )));
                }
                flat.extend_from_slice(row);
            }
        }
        Self::with_tolerance(doc.x1_size, doc.x2_size, doc.y_size, flat, FILE_TOL)
    }

    /// Serializes to the JSON channel format.  Round-trips bit-exactly:
    /// parsing the output reproduces identical probability entries.
    pub fn to_json(&self) -> String {
        let mut w = Vec::with_capacity(self.x1_size);
        for x1 in 0..self.x1_size {
            let mut slice = Vec::with_capacity(self.x2_size);
            for x2 in 0..self.x2_size {
                let mut row = Vec::with_capacity(self.y_size);
                for y in 0..self.y_size {
                    row.push(self.w(x1, x2, y));
                }
                slice.push(row);
            }
            w.push(slice);
        }
        let doc = ChannelDoc {
            x1_size: self.x1_size,
            x2_size: self.x2_size,
            y_size: self.y_size,
            w,
        };
        serde_json::to_string_pretty(&doc).expect("channel serialization cannot fail")
    }

    #[inline]
    pub fn x1_size(&self) -> usize {
        self.x1_size
    }

    #[inline]
    pub fn x2_size(&self) -> usize {
        self.x2_size
    }

    #[inline]
    pub fn y_size(&self) -> usize {
        self.y_size
    }

    /// `W(y | x1, x2)`.
    #[inline]
    pub fn w(&self, x1: usize, x2: usize, y: usize) -> f64 {
        self.w[(x1 * self.x2_size + x2) * self.y_size + y]
    }

    /// Flat `[x1][x2][y]`-indexed view of the transition law.
    #[inline]
    pub fn w_flat(&self) -> &[f64] {
        &self.w
    }
}

/// Loads a channel from a byte stream holding the JSON channel format.
pub fn load_channel<R: std::io::Read>(mut source: R) -> Result<Channel, ChannelError> {
    let mut buf = String::new();
    source
        .read_to_string(&mut buf)
        .map_err(|e| ChannelError::Parse(e.to_string()))?;
    Channel::from_json(&buf)
}

/// Probability distribution over the joint sender alphabet, optionally an
/// n-type (every entry an integer multiple of `1/n`).
#[derive(Debug, Clone, PartialEq)]
pub struct JointInput {
    x1_size: usize,
    x2_size: usize,
    p: Vec<f64>,
    denominator: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JointInputDoc {
    x1_size: usize,
    x2_size: usize,
    p: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
}

impl JointInput {
    /// Builds a distribution from a `[x1][x2]`-indexed flat slice.
    pub fn new(x1_size: usize, x2_size: usize, p: Vec<f64>) -> Result<Self, ChannelError> {
        Self::build(x1_size, x2_size, p, None)
    }

    /// Builds an n-type; every entry times `n` must be an integer within `1e-9`.
    pub fn n_type(x1_size: usize, x2_size: usize, p: Vec<f64>, n: u64) -> Result<Self, ChannelError> {
        Self::build(x1_size, x2_size, p, Some(n))
    }

    /// Uniform distribution on the joint alphabet.
    pub fn uniform(x1_size: usize, x2_size: usize) -> Self {
        let cells = x1_size * x2_size;
        Self {
            x1_size,
            x2_size,
            p: vec![1.0 / cells as f64; cells],
            denominator: None,
        }
    }

    fn build(
        x1_size: usize,
        x2_size: usize,
        p: Vec<f64>,
        denominator: Option<u64>,
    ) -> Result<Self, ChannelError> {
        if x1_size == 0 || x2_size == 0 {
            return Err(ChannelError::EmptyAlphabet { x1: x1_size, x2: x2_size, y: 1 });
        }
        let expected = x1_size * x2_size;
        if p.len() != expected {
            return Err(ChannelError::Dimension { got: p.len(), expected });
        }
        let mut sum = 0.0;
        for x1 in 0..x1_size {
            for x2 in 0..x2_size {
                let v = p[x1 * x2_size + x2];
                if !v.is_finite() || v < 0.0 {
                    return Err(ChannelError::BadProbability { x1, x2, value: v });
                }
                if let Some(n) = denominator {
                    let scaled = v * n as f64;
                    if (scaled - scaled.round()).abs() > 1e-9 {
                        return Err(ChannelError::NotAnNType { x1, x2, value: v, n });
                    }
                }
                sum += v;
            }
        }
        if (sum - 1.0).abs() > ANALYTIC_TOL {
            return Err(ChannelError::DistSum { sum, tol: ANALYTIC_TOL });
        }
        Ok(Self { x1_size, x2_size, p, denominator })
    }

    pub fn from_json(source: &str) -> Result<Self, ChannelError> {
        let doc: JointInputDoc =
            serde_json::from_str(source).map_err(|e| ChannelError::Parse(e.to_string()))?;
        if doc.p.len() != doc.x1_size || doc.p.iter().any(|r| r.len() != doc.x2_size) {
            return Err(ChannelError::Parse("p rows do not match alphabet sizes".into()));
        }
        let flat: Vec<f64> = doc.p.into_iter().flatten().collect();
        Self::build(doc.x1_size, doc.x2_size, flat, doc.n)
    }

    pub fn to_json(&self) -> String {
        let p = (0..self.x1_size)
            .map(|x1| (0..self.x2_size).map(|x2| self.p(x1, x2)).collect())
            .collect();
        let doc = JointInputDoc {
            x1_size: self.x1_size,
            x2_size: self.x2_size,
            p,
            n: self.denominator,
        };
        serde_json::to_string_pretty(&doc).expect("distribution serialization cannot fail")
    }

    #[inline]
    pub fn x1_size(&self) -> usize {
        self.x1_size
    }

    #[inline]
    pub fn x2_size(&self) -> usize {
        self.x2_size
    }

    /// `P(x1, x2)`.
    #[inline]
    pub fn p(&self, x1: usize, x2: usize) -> f64 {
        self.p[x1 * self.x2_size + x2]
    }

    #[inline]
    pub fn p_flat(&self) -> &[f64] {
        &self.p
    }

    /// The n-type denominator, when this distribution is a type.
    #[inline]
    pub fn denominator(&self) -> Option<u64> {
        self.denominator
    }

    /// Marginal `P(x2)`.
    pub fn marginal_x2(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.x2_size];
        for x1 in 0..self.x1_size {
            for x2 in 0..self.x2_size {
                m[x2] += self.p(x1, x2);
            }
        }
        m
    }

    /// L-infinity distance between two distributions on the same grid.
    pub fn linf_distance(&self, other: &JointInput) -> f64 {
        self.p
            .iter()
            .zip(other.p.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Rate pair in the transformed convention `(R1, R1 + R2)` used throughout:
/// the first coordinate tracks user 1 alone, the second the sum rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateVec {
    /// `R1` in nats per channel use.
    pub r1: f64,
    /// `R1 + R2` in nats per channel use.
    pub r12: f64,
}

impl RateVec {
    /// Builds from an ordinary nonnegative rate pair `(R1, R2)`.
    pub fn from_rates(r1: f64, r2: f64) -> Self {
        Self { r1, r12: r1 + r2 }
    }

    /// Recovers `(R1, R2)`.
    pub fn rates(&self) -> (f64, f64) {
        (self.r1, self.r12 - self.r1)
    }
}

/// Largest-remainder rounding of a probability vector to an n-type.
///
/// Floors every cell to a multiple of `1/n`, then hands the remaining mass to
/// the cells with the largest fractional parts, breaking ties by index order.
/// Each cell moves by at most one quantization step, so the result is within
/// `1/n` of the input in L-infinity distance, which is optimal.
pub(crate) fn largest_remainder_counts(p: &[f64], n: u64) -> Vec<u64> {
    let mut counts: Vec<u64> = Vec::with_capacity(p.len());
    let mut fracs: Vec<(f64, usize)> = Vec::with_capacity(p.len());
    let mut assigned: u64 = 0;
    for (i, &v) in p.iter().enumerate() {
        let scaled = v * n as f64;
        let mut floor = scaled.floor();
        // Guard against 2.9999999999999996-style representations of exact types.
        if scaled - floor > 1.0 - 1e-9 {
            floor += 1.0;
        }
        let c = floor as u64;
        counts.push(c);
        assigned += c;
        fracs.push((scaled - floor, i));
    }
    let remaining = n - assigned.min(n);
    // Largest fractional part first; ties go to the lower index.
    fracs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for k in 0..remaining as usize {
        counts[fracs[k].1] += 1;
    }
    counts
}

/// Projects `p` onto the closest joint n-type in L-infinity distance.
pub fn joint_type_project(p: &JointInput, n: u64) -> Result<JointInput, ChannelError> {
    assert!(n >= 1, "type denominator must be at least 1");
    let counts = largest_remainder_counts(p.p_flat(), n);
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    JointInput::n_type(p.x1_size(), p.x2_size(), probs, n)
}
