//! Transmission times of the eight schemes, curves and crossovers.
//!
//! A message of size e^R nats sent at `rate` nats per signal of period T
//! takes RT/rate seconds; every time below is a sum of such terms.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::netmodel::{builtin_schedule, ChannelUse, Schedule};
use crate::rates::{NoiseConvention, RatePoint, Rates};

pub use crate::netmodel::SchemeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeQuery {
    pub scheme: SchemeId,
    pub h: f64,
    /// Message size R in nats times the signal period T in seconds.
    pub rt: f64,
}

impl TimeQuery {
    pub fn new(scheme: SchemeId, h: f64, rt: f64) -> Self {
        Self { scheme, h, rt }
    }

    fn validate(&self) -> Result<()> {
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(Error::NegativeCoefficient(self.h));
        }
        check_rt(self.rt)
    }
}

fn check_rt(rt: f64) -> Result<()> {
    if rt > 0.0 && rt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRt(rt))
    }
}

/// Seconds, or `Infeasible` when some rate the scheme relies on is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransmissionTime {
    Seconds(f64),
    Infeasible,
}

impl TransmissionTime {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            TransmissionTime::Seconds(s) => Some(*s),
            TransmissionTime::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, TransmissionTime::Seconds(_))
    }
}

impl fmt::Display for TransmissionTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransmissionTime::Seconds(s) => write!(f, "{s}"),
            TransmissionTime::Infeasible => f.write_str("inf"),
        }
    }
}

impl Serialize for TransmissionTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TransmissionTime::Seconds(v) => s.serialize_f64(*v),
            TransmissionTime::Infeasible => s.serialize_str("inf"),
        }
    }
}

/// Sum of `coeff · RT / rate` terms, infeasible if any rate is not positive.
fn time_sum(terms: &[(f64, f64)], rt: f64) -> TransmissionTime {
    if terms.iter().any(|&(_, rate)| !(rate > 0.0)) {
        return TransmissionTime::Infeasible;
    }
    TransmissionTime::Seconds(terms.iter().map(|&(c, rate)| c * rt / rate).sum())
}

/// Closed-form time of `scheme` from precomputed rates.
pub fn closed_form_time(scheme: SchemeId, r: &RatePoint, rt: f64) -> TransmissionTime {
    let (i, s, j, k, c) = (r.single, r.mac_sum2, r.mac_joint2, r.mac_joint3, r.secure_cf);
    let terms: &[(f64, f64)] = match scheme {
        SchemeId::BfSncNoMac => &[(4.0, i)],
        SchemeId::BfSncMac => &[(2.0, i), (2.0, j)],
        SchemeId::BfPlncScf => &[(2.0, c), (1.0, i)],
        SchemeId::BfPlncSimple => &[(2.0, s), (1.0, i)],
        SchemeId::TsSncNoMac => &[(8.0, i)],
        SchemeId::TsSncMac => &[(6.0, k), (2.0, j)],
        SchemeId::TsPlncScf => &[(3.0, k), (1.0, c)],
        SchemeId::TsPlncCf => &[(3.0, s), (2.0, j)],
    };
    time_sum(terms, rt)
}

/// Per-message rate an activation achieves on its channel.
fn activation_rate(mode: ChannelUse, inputs: usize, r: &RatePoint) -> f64 {
    match mode {
        ChannelUse::PointToPoint => r.single,
        ChannelUse::JointDecode => match inputs {
            2 => r.mac_joint2 / 2.0,
            3 => r.mac_joint3 / 3.0,
            n => panic!("no joint rate for a {n}-input channel"),
        },
        ChannelUse::ComputeForward => r.mac_sum2,
        ChannelUse::SecureComputeForward => r.secure_cf,
    }
}

/// Time of a slot schedule: each slot lasts as long as its slowest
/// activation, and slots run one after another.
pub fn schedule_time(schedule: &Schedule, r: &RatePoint, rt: f64) -> TransmissionTime {
    let mut total = 0.0;
    for slot in &schedule.slots {
        let mut longest = 0.0f64;
        for act in slot {
            let rate = activation_rate(act.mode, act.edges.len(), r);
            if !(rate > 0.0) {
                return TransmissionTime::Infeasible;
            }
            longest = longest.max(act.symbols as f64 * rt / rate);
        }
        total += longest;
    }
    TransmissionTime::Seconds(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonCurve {
    pub scheme: SchemeId,
    /// (h, time) in increasing h.
    pub points: Vec<(f64, TransmissionTime)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverResult {
    pub a: SchemeId,
    pub b: SchemeId,
    pub h: f64,
    pub bracket: (f64, f64),
    /// |t_a(h) − t_b(h)| at the returned h.
    pub residual: f64,
}

/// Bisection stops once the bracket is this narrow in h.
pub const CROSSOVER_TOL: f64 = 1e-6;
const CROSSOVER_SCAN: usize = 64;

/// Transmission-time calculator under a noise convention.
#[derive(Debug, Clone, Copy, Default)]
pub struct Comparison {
    rates: Rates,
}

impl Comparison {
    pub fn new(noise: NoiseConvention) -> Self {
        Self {
            rates: Rates::new(noise),
        }
    }

    pub fn rates(&self) -> &Rates {
        &self.rates
    }

    pub fn transmission_time(&self, q: &TimeQuery) -> Result<TransmissionTime> {
        q.validate()?;
        Ok(closed_form_time(q.scheme, &self.rates.rate_point(q.h)?, q.rt))
    }

    pub fn time_from_schedule(&self, q: &TimeQuery) -> Result<TransmissionTime> {
        q.validate()?;
        let schedule = builtin_schedule(q.scheme);
        Ok(schedule_time(&schedule, &self.rates.rate_point(q.h)?, q.rt))
    }

    /// One curve per scheme over `grid`, which must be positive and strictly
    /// increasing. Rates are computed once per grid point.
    pub fn curves(&self, schemes: &[SchemeId], grid: &[f64], rt: f64) -> Result<Vec<ComparisonCurve>> {
        check_grid(grid)?;
        check_rt(rt)?;
        let points = self.rates.rate_points(grid)?;
        Ok(schemes
            .iter()
            .map(|&scheme| ComparisonCurve {
                scheme,
                points: points.iter().map(|p| (p.h, closed_form_time(scheme, p, rt))).collect(),
            })
            .collect())
    }

    /// h where t_a and t_b meet inside `bracket`.
    ///
    /// The bracket is scanned on a uniform grid for the first sign change of
    /// t_a − t_b between two feasible points, which is then bisected. Points
    /// where either scheme is infeasible are skipped; if no crossing is found
    /// and such points exist the result is `InfeasibleRegion`.
    pub fn find_crossover(&self, a: SchemeId, b: SchemeId, bracket: (f64, f64), rt: f64) -> Result<CrossoverResult> {
        let (lo, hi) = bracket;
        check_grid(&[lo, hi])?;
        check_rt(rt)?;
        let diff = |h: f64| -> Result<Option<f64>> {
            let p = self.rates.rate_point(h)?;
            Ok(match (closed_form_time(a, &p, rt), closed_form_time(b, &p, rt)) {
                (TransmissionTime::Seconds(x), TransmissionTime::Seconds(y)) => Some(x - y),
                _ => None,
            })
        };
        let scan: Vec<f64> = (0..=CROSSOVER_SCAN)
            .map(|i| lo + (hi - lo) * i as f64 / CROSSOVER_SCAN as f64)
            .collect();
        let values = scan.par_iter().map(|&h| diff(h)).collect::<Result<Vec<_>>>()?;
        let first = values.windows(2).position(|w| match (w[0], w[1]) {
            (Some(x), Some(y)) => x == 0.0 || x.signum() != y.signum(),
            _ => false,
        });
        let Some(first) = first else {
            return Err(match values.iter().position(Option::is_none) {
                Some(i) => Error::InfeasibleRegion(scan[i]),
                None => Error::NoSignChange { lo, hi },
            });
        };
        let (mut x0, mut x1) = (scan[first], scan[first + 1]);
        let f0 = values[first].expect("feasible scan point");
        if f0 == 0.0 {
            x1 = x0;
        }
        while x1 - x0 > CROSSOVER_TOL {
            let mid = 0.5 * (x0 + x1);
            let fm = diff(mid)?.ok_or(Error::InfeasibleRegion(mid))?;
            if fm == 0.0 {
                (x0, x1) = (mid, mid);
            } else if fm.signum() == f0.signum() {
                x0 = mid;
            } else {
                x1 = mid;
            }
        }
        let h = 0.5 * (x0 + x1);
        let residual = diff(h)?.ok_or(Error::InfeasibleRegion(h))?.abs();
        Ok(CrossoverResult {
            a,
            b,
            h,
            bracket,
            residual,
        })
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let positive = grid.iter().all(|h| *h > 0.0 && h.is_finite());
    if !positive || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// CSV with header `h,<scheme names>`, `inf` marking infeasible entries.
/// All curves must share one grid.
pub fn curves_csv(curves: &[ComparisonCurve]) -> String {
    let mut out = String::from("h");
    for c in curves {
        out.push(',');
        out.push_str(c.scheme.name());
    }
    out.push('\n');
    let rows = curves.first().map_or(0, |c| c.points.len());
    for i in 0..rows {
        out.push_str(&curves[0].points[i].0.to_string());
        for c in curves {
            out.push(',');
            out.push_str(&c.points[i].1.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn transmission_time(q: &TimeQuery) -> Result<TransmissionTime> {
    Comparison::default().transmission_time(q)
}

pub fn time_from_schedule(q: &TimeQuery) -> Result<TransmissionTime> {
    Comparison::default().time_from_schedule(q)
}

pub fn curves(schemes: &[SchemeId], grid: &[f64], rt: f64) -> Result<Vec<ComparisonCurve>> {
    Comparison::default().curves(schemes, grid, rt)
}

pub fn find_crossover(a: SchemeId, b: SchemeId, bracket: (f64, f64), rt: f64) -> Result<CrossoverResult> {
    Comparison::default().find_crossover(a, b, bracket, rt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::NetworkName;
    use std::f64::consts::LN_2;

    fn secs(scheme: SchemeId, h: f64, rt: f64) -> f64 {
        transmission_time(&TimeQuery::new(scheme, h, rt))
            .unwrap()
            .seconds()
            .unwrap()
    }

    #[test]
    fn examples() {
        let t = secs(SchemeId::BfSncNoMac, 10.0, 1.0);
        assert!((t - 4.0 / LN_2).abs() < 1e-3, "{t}");
        let scf = transmission_time(&TimeQuery::new(SchemeId::BfPlncScf, 0.1, 1.0)).unwrap();
        assert_eq!(scf, TransmissionTime::Infeasible);
        assert_eq!(scf.to_string(), "inf");
    }

    #[test]
    fn zero_coefficient_is_infeasible() {
        for scheme in SchemeId::ALL {
            let q = TimeQuery::new(scheme, 0.0, 1.0);
            assert_eq!(transmission_time(&q).unwrap(), TransmissionTime::Infeasible);
            assert_eq!(time_from_schedule(&q).unwrap(), TransmissionTime::Infeasible);
        }
    }

    #[test]
    fn bad_queries() {
        let q = TimeQuery::new(SchemeId::BfSncMac, -1.0, 1.0);
        assert_eq!(transmission_time(&q), Err(Error::NegativeCoefficient(-1.0)));
        let q = TimeQuery::new(SchemeId::BfSncMac, 1.0, 0.0);
        assert_eq!(transmission_time(&q), Err(Error::InvalidRt(0.0)));
    }

    #[test]
    fn linear_in_rt() {
        let c = Comparison::default();
        for scheme in SchemeId::ALL {
            let p = c.rates().rate_point(1.7).unwrap();
            let base = closed_form_time(scheme, &p, 1.0).seconds().unwrap();
            for k in [2.0, 4.0, 0.5, 1024.0] {
                assert_eq!(closed_form_time(scheme, &p, k).seconds().unwrap(), k * base);
            }
        }
    }

    #[test]
    fn schedule_matches_formula() {
        for scheme in SchemeId::ALL {
            for h in [0.5, 1.0, 2.0, 4.0] {
                let q = TimeQuery::new(scheme, h, 1.0);
                let a = transmission_time(&q).unwrap();
                let b = time_from_schedule(&q).unwrap();
                match (a, b) {
                    (TransmissionTime::Seconds(x), TransmissionTime::Seconds(y)) => {
                        assert!(((x - y) / x).abs() <= 1e-12, "{scheme} h={h}: {x} vs {y}")
                    }
                    _ => assert_eq!(a, b, "{scheme} h={h}"),
                }
            }
        }
    }

    #[test]
    fn butterfly_ordering() {
        let t = |s| secs(s, 3.0, 1.0);
        assert!(t(SchemeId::BfPlncSimple) < t(SchemeId::BfSncMac));
        assert!(t(SchemeId::BfSncMac) < t(SchemeId::BfSncNoMac));
        assert!(t(SchemeId::BfSncNoMac) < t(SchemeId::BfPlncScf));
        for h in [2.0, 3.0] {
            let ratio = secs(SchemeId::BfPlncScf, h, 1.0) / secs(SchemeId::BfSncMac, h, 1.0);
            assert!(ratio <= 2.0, "h={h} ratio {ratio}");
        }
    }

    #[test]
    fn three_source_large_h() {
        let best = SchemeId::for_network(NetworkName::ThreeSource)
            .into_iter()
            .min_by(|a, b| secs(*a, 5.0, 1.0).total_cmp(&secs(*b, 5.0, 1.0)))
            .unwrap();
        assert_eq!(best, SchemeId::TsPlncScf);
        for h in [2.2, 2.5, 3.0, 4.0] {
            let mac = secs(SchemeId::TsSncMac, h, 1.0);
            assert!(secs(SchemeId::TsPlncScf, h, 1.0) < mac);
            assert!(secs(SchemeId::TsPlncCf, h, 1.0) < mac);
        }
    }

    #[test]
    fn crossovers() {
        for other in [SchemeId::TsPlncScf, SchemeId::TsPlncCf] {
            let r = find_crossover(other, SchemeId::TsSncMac, (1.0, 2.5), 1.0).unwrap();
            assert!((1.3..=2.1).contains(&r.h), "{other}: {}", r.h);
            assert!(r.residual < 1e-4);
        }
        let err = find_crossover(SchemeId::BfSncMac, SchemeId::BfSncNoMac, (0.5, 3.0), 1.0);
        assert_eq!(err, Err(Error::NoSignChange { lo: 0.5, hi: 3.0 }));
        let err = find_crossover(SchemeId::BfPlncScf, SchemeId::BfSncMac, (0.1, 3.0), 1.0);
        assert!(matches!(err, Err(Error::InfeasibleRegion(_))));
    }

    #[test]
    fn curve_grids() {
        assert_eq!(curves(&[SchemeId::BfSncMac], &[], 1.0).unwrap_err(), Error::EmptyGrid);
        assert_eq!(
            curves(&[SchemeId::BfSncMac], &[1.0, 1.0], 1.0).unwrap_err(),
            Error::InvalidGrid
        );
        let one = curves(&SchemeId::ALL, &[1.0], 1.0).unwrap();
        assert!(one.iter().all(|c| c.points.len() == 1));
        let cs = curves(&SchemeId::for_network(NetworkName::Butterfly), &[0.1, 1.0], 1.0).unwrap();
        let csv = curves_csv(&cs);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "h,BF-SNC-NoMAC,BF-SNC-MAC,BF-PLNC-SCF,BF-PLNC-Simple");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').nth(3), Some("inf"));
    }
}
