//! Finite-blocklength validation by simulation.
//!
//! Codes are constant-composition superposition codes with coded time
//! sharing: a deterministic two-symbol sequence `u` splits the blocklength,
//! user 2's codewords are uniform on the conditional type class given `u`,
//! and user 1's codewords are conditionally uniform given `(u, x2)`.  Every
//! draw places the exact multiset of required symbols via a seeded shuffle,
//! so compositions are exact counts rather than approximations.
//!
//! Decoding is the two-threshold information-density rule matching the
//! Feinstein-type achievability bound: declare the unique message pair whose
//! accumulated `(j1, j12)` clear `ln M1 + gamma_a` and `ln M1 M2 + gamma_a`;
//! none, ties, or multiple passes are errors.  Maximum-likelihood decoding is
//! available as an optional mode for comparison; it can only lower the error
//! rate and costs the same scan.
//!
//! The converse side samples the information-spectrum bound
//! `1 - Pr((1/n) sum j >= R - gamma 1) - 2 exp(-n gamma)` at a fixed
//! codeword pair from the type class.
//!
//! Trials draw their randomness from per-trial derived streams, so results
//! are identical regardless of execution order or degree of parallelism.

use crate::channel::{largest_remainder_counts, Channel, JointInput};
use crate::infogeom::{self, dispersion_matrix, mean_vector, InfoGeomError};
use crate::mvnorm::{symmetric_boundary_point, MvnError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid codebook spec: {0}")]
    InvalidSpec(String),
    #[error("unrealizable conditional type at this blocklength: {0}")]
    UnrealizableType(String),
    #[error("distribution is not an n-type for n = {n}: cell ({x1}, {x2}) has probability {value}")]
    NotAnNType { n: u64, x1: usize, x2: usize, value: f64 },
    #[error(transparent)]
    InfoGeom(#[from] InfoGeomError),
    #[error(transparent)]
    Mvn(#[from] MvnError),
}

/// Specification of a constant-composition superposition codebook.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodebookSpec {
    /// Blocklength.
    pub n: usize,
    /// Message counts for user 1 and user 2.
    pub m1: usize,
    pub m2: usize,
    /// Joint distribution over `U x X1 x X2` with `|U| = 2`, flat-indexed
    /// `[u][x1][x2]`.
    pub q: Vec<f64>,
    /// Time-sharing weight: `Q_U(2) = beta / sqrt(n)`.
    pub beta: f64,
    /// Root seed for codebook generation and per-trial streams.
    pub seed: u64,
    pub x1_size: usize,
    pub x2_size: usize,
}

impl CodebookSpec {
    /// Builds the spec for time sharing between an operating distribution
    /// `p` (on section 1) and an alternative `p_prime` (on section 2) with
    /// weight `Q_U(2) = beta / sqrt(n)`.
    pub fn with_time_sharing(
        n: usize,
        m1: usize,
        m2: usize,
        p: &JointInput,
        p_prime: &JointInput,
        beta: f64,
        seed: u64,
    ) -> Result<Self, SimError> {
        if n == 0 || m1 == 0 || m2 == 0 {
            return Err(SimError::InvalidSpec(format!(
                "need n, M1, M2 >= 1 (got n={n}, M1={m1}, M2={m2})"
            )));
        }
        if beta < 0.0 {
            return Err(SimError::InvalidSpec(format!("beta must be nonnegative, got {beta}")));
        }
        let share = beta / (n as f64).sqrt();
        if share > 1.0 {
            return Err(SimError::UnrealizableType(format!(
                "time-sharing weight beta/sqrt(n) = {share} exceeds 1 (marginal on U)"
            )));
        }
        if p.x1_size() != p_prime.x1_size() || p.x2_size() != p_prime.x2_size() {
            return Err(SimError::InvalidSpec("p and p_prime have mismatched alphabets".into()));
        }
        let cells = p.x1_size() * p.x2_size();
        let mut q = Vec::with_capacity(2 * cells);
        for v in p.p_flat() {
            q.push((1.0 - share) * v);
        }
        for v in p_prime.p_flat() {
            q.push(share * v);
        }
        Ok(Self {
            n,
            m1,
            m2,
            q,
            beta,
            seed,
            x1_size: p.x1_size(),
            x2_size: p.x2_size(),
        })
    }
}

/// A realized codebook: the time-sharing sequence, user 2's codewords, and
/// user 1's per-cloud codewords, all with exact compositions.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub spec: CodebookSpec,
    /// Time-sharing sequence, `0` for section 1 and `1` for section 2; the
    /// first `n Q_U,n(1)` positions are section 1.
    u_seq: Vec<u8>,
    /// User-2 codewords, `[m2][i]`.
    x2: Vec<u16>,
    /// User-1 codewords, `[m2][m1][i]`.
    x1: Vec<u16>,
    /// Projected joint type of `(X1, X2)` pairs (aggregated over `u`).
    joint_type: JointInput,
    /// Per-position channel-table offsets `x1 * (|X2| |Y|)`, same layout as
    /// `x1`, kept alongside the symbols for the decoder's inner loop.
    x1_offsets: Vec<u32>,
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn u(&self, i: usize) -> u8 {
        self.u_seq[i]
    }

    pub fn x2_symbol(&self, m2: usize, i: usize) -> u16 {
        self.x2[m2 * self.spec.n + i]
    }

    pub fn x1_symbol(&self, m2: usize, m1: usize, i: usize) -> u16 {
        self.x1[(m2 * self.spec.m1 + m1) * self.spec.n + i]
    }

    /// The exact joint `(x1, x2)` type shared by every codeword pair.
    pub fn joint_type(&self) -> &JointInput {
        &self.joint_type
    }
}

/// Generates the codebook deterministically from the spec's seed.
pub fn build_codebook(spec: &CodebookSpec, ch: &Channel) -> Result<Codebook, SimError> {
    let (nx1, nx2) = (spec.x1_size, spec.x2_size);
    if nx1 != ch.x1_size() || nx2 != ch.x2_size() {
        return Err(SimError::InvalidSpec(format!(
            "spec alphabets {nx1}x{nx2} do not match channel {}x{}",
            ch.x1_size(),
            ch.x2_size()
        )));
    }
    if spec.q.len() != 2 * nx1 * nx2 {
        return Err(SimError::InvalidSpec(format!(
            "q has {} entries, expected {}",
            spec.q.len(),
            2 * nx1 * nx2
        )));
    }
    let qsum: f64 = spec.q.iter().sum();
    if spec.q.iter().any(|&v| !(v >= 0.0)) || (qsum - 1.0).abs() > 1e-9 {
        return Err(SimError::InvalidSpec(format!("q is not a distribution (sum {qsum})")));
    }
    if spec.n == 0 || spec.m1 == 0 || spec.m2 == 0 {
        return Err(SimError::InvalidSpec("need n, M1, M2 >= 1".into()));
    }
    // The codebook is materialized in full; refuse sizes that cannot be.
    const MAX_SYMBOLS: u128 = 100_000_000;
    let total = spec.m1 as u128 * spec.m2 as u128 * spec.n as u128;
    if total > MAX_SYMBOLS {
        return Err(SimError::InvalidSpec(format!(
            "codebook holds M1 * M2 * n = {total} symbols, beyond the {MAX_SYMBOLS} cap; \
             lower the rates or the blocklength"
        )));
    }
    let n = spec.n;

    // Closest joint n-type over (U, X1, X2).
    let counts = largest_remainder_counts(&spec.q, n as u64);
    let cell = |u: usize, x1: usize, x2: usize| counts[(u * nx1 + x1) * nx2 + x2] as usize;

    // Section lengths and the deterministic time-sharing sequence.
    let n1: usize = (0..nx1).map(|a| (0..nx2).map(|b| cell(0, a, b)).sum::<usize>()).sum();
    let mut u_seq = vec![0u8; n];
    for slot in u_seq.iter_mut().skip(n1) {
        *slot = 1;
    }
    let sections: [(usize, usize); 2] = [(0, n1), (n1, n)];

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // User 2: per section, the exact multiset of x2 symbols, shuffled.
    let mut x2 = Vec::with_capacity(spec.m2 * n);
    for _m2 in 0..spec.m2 {
        for (u, &(lo, hi)) in sections.iter().enumerate() {
            let mut symbols: Vec<u16> = Vec::with_capacity(hi - lo);
            for b in 0..nx2 {
                let c: usize = (0..nx1).map(|a| cell(u, a, b)).sum();
                symbols.extend(std::iter::repeat(b as u16).take(c));
            }
            if symbols.len() != hi - lo {
                return Err(SimError::UnrealizableType(format!(
                    "x2 marginal in section {u} fills {} of {} positions",
                    symbols.len(),
                    hi - lo
                )));
            }
            symbols.shuffle(&mut rng);
            x2.extend_from_slice(&symbols);
        }
    }

    // User 1: per cloud and per (u, x2)-class, the exact conditional
    // multiset of x1 symbols, shuffled into the class positions.
    let mut x1 = vec![0u16; spec.m2 * spec.m1 * n];
    let mut class_positions: Vec<Vec<usize>> = vec![Vec::new(); 2 * nx2];
    for m2 in 0..spec.m2 {
        for v in class_positions.iter_mut() {
            v.clear();
        }
        for i in 0..n {
            let u = u_seq[i] as usize;
            let b = x2[m2 * n + i] as usize;
            class_positions[u * nx2 + b].push(i);
        }
        for m1 in 0..spec.m1 {
            let base = (m2 * spec.m1 + m1) * n;
            for u in 0..2 {
                for b in 0..nx2 {
                    let positions = &class_positions[u * nx2 + b];
                    if positions.is_empty() {
                        continue;
                    }
                    let mut symbols: Vec<u16> = Vec::with_capacity(positions.len());
                    for a in 0..nx1 {
                        symbols.extend(std::iter::repeat(a as u16).take(cell(u, a, b)));
                    }
                    if symbols.len() != positions.len() {
                        return Err(SimError::UnrealizableType(format!(
                            "x1 conditional class (u={u}, x2={b}) fills {} of {} positions",
                            symbols.len(),
                            positions.len()
                        )));
                    }
                    symbols.shuffle(&mut rng);
                    for (&i, &a) in positions.iter().zip(symbols.iter()) {
                        x1[base + i] = a;
                    }
                }
            }
        }
    }

    // Joint (x1, x2) type aggregated over u.
    let mut jt = vec![0.0; nx1 * nx2];
    for a in 0..nx1 {
        for b in 0..nx2 {
            jt[a * nx2 + b] = (cell(0, a, b) + cell(1, a, b)) as f64 / n as f64;
        }
    }
    let joint_type = JointInput::n_type(nx1, nx2, jt, n as u64)
        .map_err(|e| SimError::UnrealizableType(e.to_string()))?;

    let stride = (nx2 * ch.y_size()) as u32;
    let x1_offsets = x1.iter().map(|&a| a as u32 * stride).collect();

    Ok(Codebook { spec: spec.clone(), u_seq, x2, x1, joint_type, x1_offsets })
}

/// Decoder selection for the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoderMode {
    /// Two-threshold information-density rule.
    Threshold,
    /// Maximum likelihood over all message pairs (comparison mode).
    MaxLikelihood,
}

/// Simulation options; `gamma_a` defaults to `ln(n) / (2 sqrt(n))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimOptions {
    pub gamma_a: Option<f64>,
    pub decoder: DecoderMode,
    pub collect_trials: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { gamma_a: None, decoder: DecoderMode::Threshold, collect_trials: false }
    }
}

/// Outcome of one decoded trial (kept only when requested).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrialRecord {
    pub m1: usize,
    pub m2: usize,
    pub decoded: Option<(usize, usize)>,
    pub error: bool,
}

/// Aggregate simulation outcome with a 95% Wilson interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub gamma_a: f64,
    pub decoder: DecoderMode,
    pub wall_clock_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_trial: Option<Vec<TrialRecord>>,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959963984540054_f64;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // Clamp against rounding so the interval always contains the estimate.
    (((center - half).max(0.0)).min(p), ((center + half).min(1.0)).max(p))
}

/// Cumulative transition table for output sampling, laid out like the
/// channel array.
fn output_cdf(ch: &Channel) -> Vec<f64> {
    let ny = ch.y_size();
    let mut cdf = vec![0.0; ch.x1_size() * ch.x2_size() * ny];
    for x1 in 0..ch.x1_size() {
        for x2 in 0..ch.x2_size() {
            let base = (x1 * ch.x2_size() + x2) * ny;
            let mut acc = 0.0;
            for y in 0..ny {
                acc += ch.w(x1, x2, y);
                cdf[base + y] = acc;
            }
            cdf[base + ny - 1] = 1.0; // close the row against rounding
        }
    }
    cdf
}

#[inline]
fn sample_from_cdf(cdf: &[f64], base: usize, ny: usize, u: f64) -> usize {
    let row = &cdf[base..base + ny];
    row.partition_point(|&c| c < u).min(ny - 1)
}

/// Monte Carlo estimate of the average error probability of the realized
/// codebook under the selected decoder.
pub fn simulate_error(
    codebook: &Codebook,
    ch: &Channel,
    trials: usize,
    opts: &SimOptions,
) -> Result<SimulationReport, SimError> {
    if trials == 0 {
        return Err(SimError::InvalidSpec("need at least one trial".into()));
    }
    let started = std::time::Instant::now();
    let n = codebook.spec.n;
    let (m1_count, m2_count) = (codebook.spec.m1, codebook.spec.m2);
    let ny = ch.y_size();
    let nx2 = ch.x2_size();
    let gamma_a = opts
        .gamma_a
        .unwrap_or_else(|| (n as f64).ln() / (2.0 * (n as f64).sqrt()));

    // Densities under the codebook's joint type.
    let (j1t, j12t) = infogeom::density_tables(codebook.joint_type(), ch)?;
    let lnw: Option<Vec<f64>> = match opts.decoder {
        DecoderMode::MaxLikelihood => {
            Some(ch.w_flat().iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect())
        }
        DecoderMode::Threshold => None,
    };
    let cdf = output_cdf(ch);
    let t1 = (m1_count as f64).ln() + gamma_a;
    let t12 = (m1_count as f64 * m2_count as f64).ln() + gamma_a;

    let outcomes: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(codebook.spec.seed);
            rng.set_stream(trial as u64 + 1);
            let m1 = rng.gen_range(0..m1_count);
            let m2 = rng.gen_range(0..m2_count);

            // Transmit and push the output through the memoryless law.
            let mut y = vec![0u16; n];
            let mut y_off = vec![0u32; n];
            for i in 0..n {
                let a = codebook.x1_symbol(m2, m1, i) as usize;
                let b = codebook.x2_symbol(m2, i) as usize;
                let base = (a * nx2 + b) * ny;
                let yy = sample_from_cdf(&cdf, base, ny, rng.gen::<f64>());
                y[i] = yy as u16;
                y_off[i] = yy as u32;
            }

            let decoded = match opts.decoder {
                DecoderMode::Threshold => {
                    let mut pass: Option<(usize, usize)> = None;
                    let mut multiple = false;
                    'clouds: for c2 in 0..m2_count {
                        // Per-position offset of the (x2, y) pair into the
                        // density tables; candidates add their x1 offset.
                        for (i, off) in y_off.iter_mut().enumerate() {
                            let b = codebook.x2[c2 * n + i] as u32;
                            *off = b * ny as u32 + y[i] as u32;
                        }
                        for c1 in 0..m1_count {
                            let base = (c2 * m1_count + c1) * n;
                            let offs = &codebook.x1_offsets[base..base + n];
                            let mut s1 = 0.0f64;
                            let mut s12 = 0.0f64;
                            for (o1, oy) in offs.iter().zip(y_off.iter()) {
                                let idx = (o1 + oy) as usize;
                                s1 += j1t[idx];
                                s12 += j12t[idx];
                            }
                            if s1 > t1 && s12 > t12 {
                                if pass.is_some() {
                                    multiple = true;
                                    break 'clouds;
                                }
                                pass = Some((c1, c2));
                            }
                        }
                    }
                    if multiple {
                        None
                    } else {
                        pass
                    }
                }
                DecoderMode::MaxLikelihood => {
                    let lnw = lnw.as_ref().unwrap();
                    let mut best = f64::NEG_INFINITY;
                    let mut arg: Option<(usize, usize)> = None;
                    let mut tie = false;
                    for c2 in 0..m2_count {
                        for (i, off) in y_off.iter_mut().enumerate() {
                            let b = codebook.x2[c2 * n + i] as u32;
                            *off = b * ny as u32 + y[i] as u32;
                        }
                        for c1 in 0..m1_count {
                            let base = (c2 * m1_count + c1) * n;
                            let offs = &codebook.x1_offsets[base..base + n];
                            let mut s = 0.0f64;
                            for (o1, oy) in offs.iter().zip(y_off.iter()) {
                                s += lnw[(o1 + oy) as usize];
                            }
                            if s > best {
                                best = s;
                                arg = Some((c1, c2));
                                tie = false;
                            } else if s == best {
                                tie = true;
                            }
                        }
                    }
                    if tie {
                        None
                    } else {
                        arg
                    }
                }
            };
            let error = decoded != Some((m1, m2));
            TrialRecord { m1, m2, decoded, error }
        })
        .collect();

    let errors = outcomes.iter().filter(|t| t.error).count();
    let (lo, hi) = wilson_interval(errors, trials);
    Ok(SimulationReport {
        trials,
        errors,
        error_rate: errors as f64 / trials as f64,
        wilson_low: lo,
        wilson_high: hi,
        gamma_a,
        decoder: opts.decoder,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        per_trial: if opts.collect_trials { Some(outcomes) } else { None },
    })
}

/// Sampled information-spectrum converse bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConverseBound {
    /// Bound value, clamped to `[0, 1]`.
    pub value: f64,
    /// Monte Carlo estimate of the orthant probability term.
    pub prob_estimate: f64,
    /// Standard error of the probability estimate.
    pub std_error: f64,
    pub gamma: f64,
    pub samples: usize,
}

/// Evaluates `1 - Pr((1/n) sum j >= R_n - gamma 1) - 2 exp(-n gamma)` by
/// Monte Carlo over outputs at a fixed codeword pair from the type class of
/// `p_n`.  `gamma` defaults to `ln(n) / n`.
pub fn verdu_han_bound(
    p_n: &JointInput,
    ch: &Channel,
    n: usize,
    r1n: f64,
    r2n: f64,
    gamma: Option<f64>,
    samples: usize,
    seed: u64,
) -> Result<ConverseBound, SimError> {
    if n == 0 || samples == 0 {
        return Err(SimError::InvalidSpec("need n >= 1 and samples >= 1".into()));
    }
    let gamma = gamma.unwrap_or_else(|| (n as f64).ln() / n as f64);
    if gamma <= 0.0 {
        return Err(SimError::InvalidSpec(format!("gamma must be positive, got {gamma}")));
    }

    // The representative pair: lexicographic fill of the exact counts.
    let (nx1, nx2, ny) = (ch.x1_size(), ch.x2_size(), ch.y_size());
    if p_n.x1_size() != nx1 || p_n.x2_size() != nx2 {
        return Err(SimError::InvalidSpec("input distribution does not match channel".into()));
    }
    let mut x1_seq = Vec::with_capacity(n);
    let mut x2_seq = Vec::with_capacity(n);
    for a in 0..nx1 {
        for b in 0..nx2 {
            let scaled = p_n.p(a, b) * n as f64;
            let count = scaled.round();
            if (scaled - count).abs() > 1e-9 {
                return Err(SimError::NotAnNType { n: n as u64, x1: a, x2: b, value: p_n.p(a, b) });
            }
            for _ in 0..count as usize {
                x1_seq.push(a);
                x2_seq.push(b);
            }
        }
    }
    if x1_seq.len() != n {
        return Err(SimError::NotAnNType { n: n as u64, x1: 0, x2: 0, value: f64::NAN });
    }

    let (j1t, j12t) = infogeom::density_tables(p_n, ch)?;
    let cdf = output_cdf(ch);
    let thr1 = r1n - gamma;
    let thr12 = r1n + r2n - gamma;

    let hits: u64 = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64 + 1);
            let mut s1 = 0.0f64;
            let mut s12 = 0.0f64;
            for i in 0..n {
                let base = (x1_seq[i] * nx2 + x2_seq[i]) * ny;
                let y = sample_from_cdf(&cdf, base, ny, rng.gen::<f64>());
                let idx = base + y;
                s1 += j1t[idx];
                s12 += j12t[idx];
            }
            let nf = n as f64;
            u64::from(s1 / nf >= thr1 && s12 / nf >= thr12)
        })
        .sum();

    let p_hat = hits as f64 / samples as f64;
    let se = (p_hat * (1.0 - p_hat) / samples as f64).sqrt();
    Ok(ConverseBound {
        value: (1.0 - p_hat - 2.0 * (-(n as f64) * gamma).exp()).clamp(0.0, 1.0),
        prob_estimate: p_hat,
        std_error: se,
        gamma,
        samples,
    })
}

/// Representative rate pairs from the Gaussian approximation, at the
/// symmetric boundary point of the quantile region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianApproxRates {
    /// Achievable-side rates `(R1, R2)` including the time-sharing tilt.
    pub achievable: (f64, f64),
    /// Converse-side (outer form) rates `(R1, R2)`.
    pub converse: (f64, f64),
    /// The quantile-region boundary point used, in transformed coordinates.
    pub z: (f64, f64),
    /// The sub-square-root correction term is omitted; these rates are
    /// asymptotic representatives for plotting and validation overlays.
    pub asymptotic_only: bool,
}

/// Computes `I + (beta (I' - I) + z) / sqrt(n)` with `z` the symmetric
/// boundary point of the quantile region of `V(p)`, and the `beta = 0` outer
/// form alongside.
pub fn gaussian_approx_rates(
    ch: &Channel,
    p: &JointInput,
    n: usize,
    eps: f64,
    beta: f64,
    p_prime: &JointInput,
) -> Result<GaussianApproxRates, SimError> {
    if n == 0 {
        return Err(SimError::InvalidSpec("need n >= 1".into()));
    }
    if beta < 0.0 {
        return Err(SimError::InvalidSpec(format!("beta must be nonnegative, got {beta}")));
    }
    let iv = mean_vector(p, ch)?;
    let iv_prime = mean_vector(p_prime, ch)?;
    let v = dispersion_matrix(p, ch)?;
    let t = symmetric_boundary_point(&v, eps)?;
    let root = (n as f64).sqrt();

    let ach_r1 = iv.i1 + (beta * (iv_prime.i1 - iv.i1) + t) / root;
    let ach_r12 = iv.i12 + (beta * (iv_prime.i12 - iv.i12) + t) / root;
    let conv_r1 = iv.i1 + t / root;
    let conv_r12 = iv.i12 + t / root;
    Ok(GaussianApproxRates {
        achievable: (ach_r1, ach_r12 - ach_r1),
        converse: (conv_r1, conv_r12 - conv_r1),
        z: (t, t),
        asymptotic_only: true,
    })
}

/// Message counts realizing the rate pair at blocklength `n`:
/// `M = max(1, round(exp(n R)))` per user.
pub fn message_counts(n: usize, rates: (f64, f64)) -> (usize, usize) {
    let m = |r: f64| ((n as f64 * r).exp().round() as i64).max(1) as usize;
    (m(rates.0), m(rates.1))
}
