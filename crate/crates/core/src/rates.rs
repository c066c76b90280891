//! Mutual-information rates of BPSK over Gaussian single-input and
//! multiple-access channels, in nats.
//!
//! Each input bit `A` is sent as `X = (-1)^A`, every input shares the real
//! coefficient `h`, and the receiver observes `Y = h·ΣX + Z`. Because `h` is
//! real and the noise is circularly symmetric, the quadrature path works on
//! the real part of `Y` only: a one-dimensional Gaussian mixture whose
//! components sit at `h·s` for the possible signal sums `s`.
//!
//! The Monte-Carlo oracle samples the full complex channel (with a rotated
//! coefficient) so it checks that reduction instead of sharing it.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Noise power convention for `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseConvention {
    /// Unit variance in each real dimension. The three-source PLNC schemes
    /// overtake 3S-SNC-MAC near h = 1.7 under this convention.
    #[default]
    UnitPerDimension,
    /// Complex noise with E|Z|² = 1, i.e. variance 1/2 per real dimension.
    UnitComplex,
}

impl NoiseConvention {
    /// Variance of each real component of `Z`.
    pub fn real_variance(&self) -> f64 {
        match self {
            NoiseConvention::UnitPerDimension => 1.0,
            NoiseConvention::UnitComplex => 0.5,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseConvention::UnitPerDimension => "unit-real",
            NoiseConvention::UnitComplex => "unit-complex",
        }
    }
}

impl FromStr for NoiseConvention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unit-real" | "real" | "per-dimension" => Ok(NoiseConvention::UnitPerDimension),
            "unit-complex" | "complex" => Ok(NoiseConvention::UnitComplex),
            other => Err(format!(
                "unknown noise convention '{other}' (use unit-real or unit-complex)"
            )),
        }
    }
}

impl fmt::Display for NoiseConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RateKind {
    /// I(Y; A) on the single-input channel.
    Single,
    /// I(Y; A1 + A2) on the two-input MAC.
    MacSum2,
    /// I(Y; A1, A2).
    MacJoint2,
    /// I(Y; A1, A2, A3) on the three-input MAC.
    MacJoint3,
    /// 2·I(Y; A1 + A2) − I(Y; A1, A2).
    SecureCF,
    /// I(Y; A2 | A1).
    CondSym2,
}

impl RateKind {
    pub const ALL: [RateKind; 6] = [
        RateKind::Single,
        RateKind::MacSum2,
        RateKind::MacJoint2,
        RateKind::MacJoint3,
        RateKind::SecureCF,
        RateKind::CondSym2,
    ];

    fn inputs(&self) -> usize {
        match self {
            RateKind::Single => 1,
            RateKind::MacJoint3 => 3,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RateKind::Single => "single",
            RateKind::MacSum2 => "mac_sum2",
            RateKind::MacJoint2 => "mac_joint2",
            RateKind::MacJoint3 => "mac_joint3",
            RateKind::SecureCF => "secure_cf",
            RateKind::CondSym2 => "cond_sym2",
        }
    }
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == t)
            .ok_or_else(|| format!("unknown rate kind '{s}'"))
    }
}

/// All rates at one coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub h: f64,
    pub single: f64,
    pub mac_sum2: f64,
    pub mac_joint2: f64,
    pub mac_joint3: f64,
    pub cond_sym2: f64,
    /// Stored as computed, possibly negative.
    pub secure_cf: f64,
    pub secure_cf_feasible: bool,
}

impl RatePoint {
    pub fn get(&self, kind: RateKind) -> f64 {
        match kind {
            RateKind::Single => self.single,
            RateKind::MacSum2 => self.mac_sum2,
            RateKind::MacJoint2 => self.mac_joint2,
            RateKind::MacJoint3 => self.mac_joint3,
            RateKind::SecureCF => self.secure_cf,
            RateKind::CondSym2 => self.cond_sym2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// |value − mean| in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.mean).abs() / self.std_error.max(f64::MIN_POSITIVE)
    }
}

pub const MIN_ORACLE_SAMPLES: u64 = 10_000;
const QUAD_TOL: f64 = 1e-8;
const WINDOW_SIGMAS: f64 = 10.0;
/// Phase of the coefficient used by the oracle; the rates depend on |h| only.
const ORACLE_PHASE: f64 = 0.7;
const THRESHOLD_SCAN_MAX: f64 = 10.0;
const THRESHOLD_SCAN_STEP: f64 = 0.05;

/// Rate evaluator for one noise convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rates {
    noise: NoiseConvention,
}

impl Rates {
    pub fn new(noise: NoiseConvention) -> Self {
        Self { noise }
    }

    pub fn noise(&self) -> NoiseConvention {
        self.noise
    }

    fn variance(&self) -> f64 {
        self.noise.real_variance()
    }

    /// Deterministic quadrature value of `kind` at `h`.
    pub fn mi(&self, kind: RateKind, h: f64) -> Result<f64> {
        check_h(h)?;
        if h == 0.0 {
            return Ok(0.0);
        }
        let v = self.variance();
        Ok(match kind {
            RateKind::Single => mixture_mi(&single_hypotheses(h), v),
            RateKind::MacSum2 => mixture_mi(&mac2_hypotheses(h, |a1, a2| a1 ^ a2), v),
            RateKind::MacJoint2 => mixture_mi(&mac2_hypotheses(h, |a1, a2| 2 * a1 + a2), v),
            RateKind::MacJoint3 => mixture_mi(&mac3_hypotheses(h), v),
            RateKind::SecureCF => 2.0 * self.mi(RateKind::MacSum2, h)? - self.mi(RateKind::MacJoint2, h)?,
            RateKind::CondSym2 => self.conditional_mi(h, 1)?,
        })
    }

    /// I(Y; A_other | A_given) on the two-input MAC, `given` ∈ {1, 2}.
    pub fn conditional_mi(&self, h: f64, given: usize) -> Result<f64> {
        check_h(h)?;
        assert!(given == 1 || given == 2, "input index must be 1 or 2");
        if h == 0.0 {
            return Ok(0.0);
        }
        let v = self.variance();
        let mut total = 0.0;
        for fixed in 0..2u32 {
            let pts: Vec<(u32, f64)> = (0..2u32)
                .map(|free| {
                    let (a1, a2) = if given == 1 { (fixed, free) } else { (free, fixed) };
                    (free, h * (bpsk(a1) + bpsk(a2)))
                })
                .collect();
            total += 0.5 * mixture_mi(&pts, v);
        }
        Ok(total)
    }

    /// I(Y; A1) on the two-input MAC with A2 treated as noise.
    pub fn mac_marginal_mi(&self, h: f64) -> Result<f64> {
        check_h(h)?;
        if h == 0.0 {
            return Ok(0.0);
        }
        Ok(mixture_mi(&mac2_hypotheses(h, |a1, _| a1), self.variance()))
    }

    /// (2·I(Y; A1+A2) − I(Y; A1,A2), value > 0).
    pub fn secure_cf_rate(&self, h: f64) -> Result<(f64, bool)> {
        let r = self.mi(RateKind::SecureCF, h)?;
        Ok((r, r > 0.0))
    }

    pub fn rate_point(&self, h: f64) -> Result<RatePoint> {
        let mac_sum2 = self.mi(RateKind::MacSum2, h)?;
        let mac_joint2 = self.mi(RateKind::MacJoint2, h)?;
        let secure_cf = 2.0 * mac_sum2 - mac_joint2;
        Ok(RatePoint {
            h,
            single: self.mi(RateKind::Single, h)?,
            mac_sum2,
            mac_joint2,
            mac_joint3: self.mi(RateKind::MacJoint3, h)?,
            cond_sym2: self.mi(RateKind::CondSym2, h)?,
            secure_cf,
            secure_cf_feasible: secure_cf > 0.0,
        })
    }

    /// Rate points over a grid, evaluated in parallel, returned in grid order.
    pub fn rate_points(&self, grid: &[f64]) -> Result<Vec<RatePoint>> {
        grid.par_iter().map(|&h| self.rate_point(h)).collect()
    }

    /// Smallest h in (0, 10] where the secure computation rate turns positive.
    ///
    /// The sign change is bracketed on a 0.05 grid and then bisected until the
    /// bracket is narrower than 1e-10.
    pub fn feasibility_threshold(&self) -> Result<f64> {
        let f = |h: f64| self.mi(RateKind::SecureCF, h);
        let steps = (THRESHOLD_SCAN_MAX / THRESHOLD_SCAN_STEP).round() as usize;
        let mut lo = THRESHOLD_SCAN_STEP;
        let mut f_lo = f(lo)?;
        let mut bracket = None;
        for i in 2..=steps {
            let hi = i as f64 * THRESHOLD_SCAN_STEP;
            let f_hi = f(hi)?;
            if f_lo <= 0.0 && f_hi > 0.0 {
                bracket = Some((lo, hi));
                break;
            }
            (lo, f_lo) = (hi, f_hi);
        }
        let (mut lo, mut hi) = bracket.ok_or(Error::BracketFailure(THRESHOLD_SCAN_MAX))?;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Monte-Carlo estimate of `kind` at `h` from `n` samples of the complex
    /// channel, reproducible from `seed`.
    pub fn mi_oracle(&self, kind: RateKind, h: f64, n: u64, seed: u64) -> Result<McEstimate> {
        check_h(h)?;
        if n < MIN_ORACLE_SAMPLES {
            return Err(Error::TooFewSamples(n));
        }
        if h == 0.0 {
            // the output carries no trace of the inputs
            return Ok(McEstimate {
                mean: 0.0,
                std_error: 0.0,
                samples: n,
                seed,
            });
        }
        let v = self.variance();
        let noise = Normal::new(0.0, v.sqrt()).expect("positive variance");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeff = (h * ORACLE_PHASE.cos(), h * ORACLE_PHASE.sin());
        let k = kind.inputs();
        let hyps = 1usize << k;
        // received points for every input pattern, bit i of the index is A_{i+1}
        let centres: Vec<(f64, f64)> = (0..hyps)
            .map(|idx| {
                let s: f64 = (0..k).map(|i| bpsk(((idx >> i) & 1) as u32)).sum();
                (coeff.0 * s, coeff.1 * s)
            })
            .collect();
        let mut ll = vec![0.0; hyps];
        let (mut mean, mut m2) = (0.0f64, 0.0f64);
        for i in 0..n {
            let idx = rng.random_range(0..hyps);
            let y = (
                centres[idx].0 + noise.sample(&mut rng),
                centres[idx].1 + noise.sample(&mut rng),
            );
            for (l, c) in ll.iter_mut().zip(&centres) {
                *l = -((y.0 - c.0).powi(2) + (y.1 - c.1).powi(2)) / (2.0 * v);
            }
            let x = information_density(kind, idx, &ll);
            let delta = x - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (x - mean);
        }
        let var = m2 / (n - 1) as f64;
        Ok(McEstimate {
            mean,
            std_error: (var / n as f64).sqrt(),
            samples: n,
            seed,
        })
    }
}

fn check_h(h: f64) -> Result<()> {
    if h >= 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeCoefficient(h))
    }
}

fn bpsk(a: u32) -> f64 {
    if a == 0 {
        1.0
    } else {
        -1.0
    }
}

fn single_hypotheses(h: f64) -> Vec<(u32, f64)> {
    (0..2).map(|a| (a, h * bpsk(a))).collect()
}

fn mac2_hypotheses(h: f64, label: impl Fn(u32, u32) -> u32) -> Vec<(u32, f64)> {
    let mut pts = Vec::with_capacity(4);
    for a1 in 0..2 {
        for a2 in 0..2 {
            pts.push((label(a1, a2), h * (bpsk(a1) + bpsk(a2))));
        }
    }
    pts
}

fn mac3_hypotheses(h: f64) -> Vec<(u32, f64)> {
    (0..8u32)
        .map(|idx| (idx, h * (0..3).map(|i| bpsk((idx >> i) & 1)).sum::<f64>()))
        .collect()
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln p(y|hypotheses in `members`) − ln p(y) from per-hypothesis
/// log-likelihoods (shared constants dropped).
fn log_ratio(ll: &[f64], members: impl Iterator<Item = usize> + Clone) -> f64 {
    let count = members.clone().count() as f64;
    let part = log_sum_exp(members.map(|i| ll[i])) - count.ln();
    let all = log_sum_exp(ll.iter().copied()) - (ll.len() as f64).ln();
    part - all
}

/// Per-sample information density for `kind` given the true input pattern.
fn information_density(kind: RateKind, idx: usize, ll: &[f64]) -> f64 {
    let bit = |i: usize, j: usize| (j >> i) & 1;
    let xor_class = |j: usize| bit(0, j) ^ bit(1, j);
    let sum_density = || log_ratio(ll, (0..4).filter(|&j| xor_class(j) == xor_class(idx)));
    let joint_density = |ll: &[f64]| log_ratio(ll, std::iter::once(idx));
    match kind {
        RateKind::Single | RateKind::MacJoint2 | RateKind::MacJoint3 => joint_density(ll),
        RateKind::MacSum2 => sum_density(),
        RateKind::SecureCF => 2.0 * sum_density() - joint_density(ll),
        RateKind::CondSym2 => {
            // ln p(y|a1,a2) − ln p(y|a1)
            let same_a1: Vec<usize> = (0..4).filter(|&j| bit(0, j) == bit(0, idx)).collect();
            ll[idx] - (log_sum_exp(same_a1.iter().map(|&j| ll[j])) - 2f64.ln())
        }
    }
}

/// I(Y; U) for equiprobable hypotheses `(u, mean)` on Y = mean + N(0, var),
/// integrating Σ_u P(u)·p(y|u)·ln(p(y|u)/p(y)) adaptively.
fn mixture_mi(points: &[(u32, f64)], var: f64) -> f64 {
    let mut labels: Vec<u32> = points.iter().map(|p| p.0).collect();
    labels.sort_unstable();
    labels.dedup();
    let groups: Vec<Vec<f64>> = labels
        .iter()
        .map(|&u| points.iter().filter(|p| p.0 == u).map(|p| p.1).collect())
        .collect();
    let n = points.len() as f64;
    let log_norm = -0.5 * (2.0 * std::f64::consts::PI * var).ln();
    let integrand = |y: f64| {
        let lq = |m: f64| -(y - m) * (y - m) / (2.0 * var);
        let ln_p = log_sum_exp(points.iter().map(|p| lq(p.1))) - n.ln();
        groups
            .iter()
            .map(|g| {
                let ln_pu = log_sum_exp(g.iter().map(|&m| lq(m))) - (g.len() as f64).ln();
                let weight = g.len() as f64 / n;
                weight * (ln_pu + log_norm).exp() * (ln_pu - ln_p)
            })
            .sum::<f64>()
    };
    let mut cuts: Vec<f64> = points.iter().map(|p| p.1).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let half_width = WINDOW_SIGMAS * var.sqrt();
    let lo = cuts[0] - half_width;
    let hi = cuts[cuts.len() - 1] + half_width;
    let mut edges = vec![lo];
    edges.extend(cuts);
    edges.push(hi);
    edges.dedup();
    let span = hi - lo;
    edges
        .windows(2)
        .map(|w| adaptive_gk15(&integrand, w[0], w[1], QUAD_TOL * (w[1] - w[0]) / span, 0))
        .sum()
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss 7-point weights for nodes 1, 3, 5, 7 above.
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut kronrod = K15_WEIGHTS[7] * f(c);
    let mut gauss = G7_WEIGHTS[3] * f(c);
    for i in 0..7 {
        let pair = f(c - r * GK_NODES[i]) + f(c + r * GK_NODES[i]);
        kronrod += K15_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * r, (kronrod - gauss).abs() * r)
}

pub(crate) fn adaptive_gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= 40 {
        return value;
    }
    let m = 0.5 * (a + b);
    adaptive_gk15(f, a, m, 0.5 * tol, depth + 1) + adaptive_gk15(f, m, b, 0.5 * tol, depth + 1)
}

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::EmptyGrid);
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    if !(max > min) {
        return Err(Error::InvalidGrid);
    }
    let dh = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                round12(min + i as f64 * dh)
            }
        })
        .collect())
}

/// Drops representation noise such as 0.8999999999999999.
fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

pub const RATES_CSV_HEADER: &str = "h,single,mac_sum2,mac_joint2,mac_joint3,secure_cf,secure_cf_feasible";

pub fn rates_csv(points: &[RatePoint]) -> String {
    let mut out = String::from(RATES_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.h, p.single, p.mac_sum2, p.mac_joint2, p.mac_joint3, p.secure_cf, p.secure_cf_feasible
        ));
    }
    out
}

/// Large-h limits in nats, from the multiplicities of the noiseless signal sums.
pub fn high_snr_limit(kind: RateKind) -> f64 {
    match kind {
        RateKind::Single | RateKind::MacSum2 | RateKind::CondSym2 => LN_2,
        RateKind::MacJoint2 => 1.5 * LN_2,
        RateKind::MacJoint3 => 3.0 * LN_2 - 0.75 * 3f64.ln(),
        RateKind::SecureCF => 0.5 * LN_2,
    }
}

/// [`Rates::mi`] under the default noise convention.
pub fn mi(kind: RateKind, h: f64) -> Result<f64> {
    Rates::default().mi(kind, h)
}

pub fn secure_cf_rate(h: f64) -> Result<(f64, bool)> {
    Rates::default().secure_cf_rate(h)
}

pub fn feasibility_threshold() -> Result<f64> {
    Rates::default().feasibility_threshold()
}

pub fn mi_oracle(kind: RateKind, h: f64, n: u64, seed: u64) -> Result<McEstimate> {
    Rates::default().mi_oracle(kind, h, n, seed)
}
