//! Curvature of a fitted boundary, curvature-extremum endpoints and the
//! averaged parametric segment between them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::descriptors::FourierDescriptor;
use crate::error::{Error, Result};

pub const MIN_PROFILE_SAMPLES: usize = 64;
const DEGENERATE_SPEED: f64 = 1e-6;
const ARC_RATIO_WARNING: f64 = 10.0;
/// Dense samples per unit of boundary parameter used for arc-length tables.
const ARC_TABLE_DENSITY: f64 = 8.0;

/// Signed curvature sampled uniformly over one period of the boundary parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    pub params: Vec<f64>,
    pub kappa: Vec<f64>,
    pub period: f64,
    /// Samples whose speed fell below the degeneracy cut and borrowed a neighbor's value.
    pub degenerate: usize,
}

impl CurvatureProfile {
    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }
}

/// `K = (x' y'' - y' x'') / (x'^2 + y'^2)^(3/2)` from analytic derivatives.
pub fn curvature_at(desc: &FourierDescriptor, t: f64) -> (f64, f64) {
    let [_, d1, d2] = desc.eval_with_derivatives(t);
    let speed = d1.norm();
    let k = (d1.re * d2.im - d1.im * d2.re) / speed.powi(3);
    (k, speed)
}

pub fn curvature_profile(desc: &FourierDescriptor, samples: usize) -> Result<CurvatureProfile> {
    if samples < MIN_PROFILE_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "curvature profile needs at least {MIN_PROFILE_SAMPLES} samples, got {samples}"
        )));
    }
    let period = desc.period();
    let params: Vec<f64> = (0..samples).map(|i| period * i as f64 / samples as f64).collect();
    let raw: Vec<Option<f64>> = params
        .iter()
        .map(|&t| {
            let (k, speed) = curvature_at(desc, t);
            (speed >= DEGENERATE_SPEED && k.is_finite()).then_some(k)
        })
        .collect();
    let degenerate = raw.iter().filter(|k| k.is_none()).count();
    if degenerate == samples {
        return Err(Error::DegenerateCurve);
    }
    if degenerate > 0 {
        log::debug!("{degenerate} of {samples} curvature samples are degenerate");
    }
    let kappa = (0..samples)
        .map(|i| {
            raw[i].unwrap_or_else(|| {
                // nearest usable sample, earlier one first on ties
                (1..samples)
                    .find_map(|d| raw[(i + samples - d) % samples].or(raw[(i + d) % samples]))
                    .expect("at least one usable sample")
            })
        })
        .collect();
    Ok(CurvatureProfile { params, kappa, period, degenerate })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Parameters of `|K|` maxima that delimit curve segments.
///
/// A sample survives if it beats every sample up to `M/16` before it, is not
/// beaten by any up to `M/16` after it, and reaches twice the median `|K|`.
/// Survivors are refined by a parabola through their neighbors. With fewer
/// than two survivors the two largest `|K|` samples at least a quarter period
/// apart are returned instead.
pub fn find_endpoints(profile: &CurvatureProfile) -> Vec<f64> {
    let m = profile.len();
    let mag: Vec<f64> = profile.kappa.iter().map(|k| k.abs()).collect();
    let window = (m / 16).max(1);
    let floor = 2.0 * median(&mag);
    let step = profile.period / m as f64;
    let at = |i: isize| mag[i.rem_euclid(m as isize) as usize];

    let mut found: Vec<f64> = (0..m as isize)
        .filter(|&i| {
            let v = mag[i as usize];
            v >= floor && (1..=window as isize).all(|d| v > at(i - d) && v >= at(i + d))
        })
        .map(|i| {
            let (a, b, c) = (at(i - 1), at(i), at(i + 1));
            let denom = a - 2.0 * b + c;
            let shift = if denom < 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            let t = (profile.params[i as usize] + shift * step).rem_euclid(profile.period);
            // a tiny negative value rounds up to the period itself
            if t >= profile.period {
                0.0
            } else {
                t
            }
        })
        .collect();

    if found.len() < 2 {
        let first = argmax(&mag, |_| true);
        let min_gap = m / 4;
        let second = argmax(&mag, |i| {
            let d = i.abs_diff(first);
            d.min(m - d) >= min_gap
        });
        found = vec![profile.params[first], profile.params[second]];
    }
    found.sort_by(f64::total_cmp);
    found
}

fn argmax(values: &[f64], keep: impl Fn(usize) -> bool) -> usize {
    let mut best = None;
    for (i, &v) in values.iter().enumerate() {
        if keep(i) && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.expect("non-empty candidate set").0
}

/// A parametric curve segment `s(k)`, `k = 0..L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSegment {
    pub points: Vec<(f64, f64)>,
    pub source_label: u32,
    /// Lengths of the two boundary arcs that were averaged.
    pub arc_lengths: (f64, f64),
    pub warnings: Vec<String>,
}

impl CurveSegment {
    pub fn endpoints(&self) -> ((f64, f64), (f64, f64)) {
        (self.points[0], self.points[self.points.len() - 1])
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.points)
    }
}

fn polyline_length(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).sum()
}

/// Densely sampled piece of the boundary between two parameter values.
struct Arc {
    points: Vec<Complex64>,
    /// Cumulative length at each point.
    cumulative: Vec<f64>,
}

impl Arc {
    fn along(desc: &FourierDescriptor, from: f64, span: f64) -> Arc {
        let n = ((span.abs() * ARC_TABLE_DENSITY).ceil() as usize).max(64);
        let points: Vec<Complex64> =
            (0..=n).map(|i| desc.evaluate(from + span * i as f64 / n as f64)).collect();
        Arc::from_points(points)
    }

    fn chord(a: Complex64, b: Complex64) -> Arc {
        Arc::from_points(vec![a, b])
    }

    fn from_points(points: Vec<Complex64>) -> Arc {
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += (w[1] - w[0]).norm();
            cumulative.push(acc);
        }
        Arc { points, cumulative }
    }

    fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// `count` points equally spaced by arc length, first and last exact.
    fn resample(&self, count: usize) -> Vec<Complex64> {
        let total = self.length();
        let last = self.points.len() - 1;
        let mut j = 0;
        (0..count)
            .map(|k| {
                if k == 0 {
                    return self.points[0];
                }
                if k == count - 1 {
                    return self.points[last];
                }
                let s = total * k as f64 / (count - 1) as f64;
                while j + 1 < last && self.cumulative[j + 1] < s {
                    j += 1;
                }
                let (s0, s1) = (self.cumulative[j], self.cumulative[j + 1]);
                let f = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
                self.points[j] + (self.points[j + 1] - self.points[j]) * f
            })
            .collect()
    }
}

/// Default sample count: `max(16, round(longer arc length))`.
pub fn default_segment_samples(a: f64, b: f64) -> usize {
    (a.max(b).round() as usize).max(16)
}

fn average(upper: &Arc, lower: &Arc, samples: Option<usize>, label: u32) -> CurveSegment {
    let (la, lb) = (upper.length(), lower.length());
    let count = samples.unwrap_or_else(|| default_segment_samples(la, lb)).max(2);
    let pa = upper.resample(count);
    let pb = lower.resample(count);
    let points = pa.iter().zip(&pb).map(|(a, b)| {
        let m = (a + b) * 0.5;
        (m.re, m.im)
    });
    let mut warnings = Vec::new();
    let ratio = la.max(lb) / la.min(lb).max(f64::MIN_POSITIVE);
    if ratio > ARC_RATIO_WARNING {
        log::warn!("region {label}: averaged arcs differ in length by {ratio:.1}x");
        warnings.push(format!("arc length ratio {ratio:.1} exceeds {ARC_RATIO_WARNING}"));
    }
    CurveSegment { points: points.collect(), source_label: label, arc_lengths: (la, lb), warnings }
}

fn wrapped_gap(from: f64, to: f64, period: f64) -> f64 {
    (to - from).rem_euclid(period)
}

/// Splits the boundary at `p1` and `p2` and averages the two arcs, both run
/// from `p1` to `p2` and resampled by arc length to `samples` points
/// (default per [`default_segment_samples`]).
pub fn extract_segment(
    desc: &FourierDescriptor,
    p1: f64,
    p2: f64,
    samples: Option<usize>,
    label: u32,
) -> Result<CurveSegment> {
    let period = desc.period();
    let forward = wrapped_gap(p1, p2, period);
    if forward < 1e-9 || period - forward < 1e-9 {
        return Err(Error::InvalidParameter("segment endpoints coincide".into()));
    }
    let upper = Arc::along(desc, p1, forward);
    let lower = Arc::along(desc, p1, -(period - forward));
    Ok(average(&upper, &lower, samples, label))
}

/// How a boundary carrying more than two curvature extrema is split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiMode {
    /// One segment per pair of circularly adjacent extrema: the boundary arc
    /// between them averaged with the chord that closes it.
    #[default]
    Consecutive,
    /// One segment per extremum, paired with the centroid as the second
    /// endpoint: the two boundary arcs leaving the extremum, each cut where the
    /// boundary comes closest to the centroid before the neighboring extremum.
    CentroidAnchored,
}

/// Segments for a boundary with any number (>= 2) of endpoint parameters,
/// which must be sorted. Two endpoints reduce to [`extract_segment`].
pub fn extract_multi(
    desc: &FourierDescriptor,
    endpoints: &[f64],
    centroid: (f64, f64),
    samples: Option<usize>,
    label: u32,
    mode: MultiMode,
) -> Result<Vec<CurveSegment>> {
    match endpoints.len() {
        0 | 1 => return Err(Error::InvalidParameter("need at least two endpoints".into())),
        2 => return Ok(vec![extract_segment(desc, endpoints[0], endpoints[1], samples, label)?]),
        _ => {}
    }
    let period = desc.period();
    let m = endpoints.len();
    let next = |i: usize| endpoints[(i + 1) % m];
    match mode {
        MultiMode::Consecutive => (0..m)
            .map(|i| {
                let span = wrapped_gap(endpoints[i], next(i), period);
                let arc = Arc::along(desc, endpoints[i], span);
                let chord = Arc::chord(arc.points[0], *arc.points.last().unwrap());
                Ok(average(&arc, &chord, samples, label))
            })
            .collect(),
        MultiMode::CentroidAnchored => {
            let c = Complex64::new(centroid.0, centroid.1);
            // boundary parameter closest to the centroid strictly between two extrema
            let anchor = |from: f64, span: f64| -> f64 {
                let n = ((span * ARC_TABLE_DENSITY).ceil() as usize).max(16);
                (1..n)
                    .map(|k| from + span * k as f64 / n as f64)
                    .min_by(|&a, &b| (desc.evaluate(a) - c).norm().total_cmp(&(desc.evaluate(b) - c).norm()))
                    .unwrap_or(from + 0.5 * span)
            };
            let anchors: Vec<f64> =
                (0..m).map(|i| anchor(endpoints[i], wrapped_gap(endpoints[i], next(i), period))).collect();
            (0..m)
                .map(|i| {
                    let tip = endpoints[i];
                    let fwd = wrapped_gap(tip, anchors[i], period);
                    let back = wrapped_gap(anchors[(i + m - 1) % m], tip, period);
                    let upper = Arc::along(desc, tip, fwd);
                    let lower = Arc::along(desc, tip, -back);
                    Ok(average(&upper, &lower, samples, label))
                })
                .collect()
        }
    }
}
