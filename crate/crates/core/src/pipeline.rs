//! End-to-end extraction: response, support regions, boundary fit and
//! per-region segments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::descriptors::{fit_fourier, FourierDescriptor, MIN_CONTOUR_LEN};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::export::OutputFormat;
use crate::filtering::{respond_with, ResponseMap};
use crate::image::GrayImage;
use crate::regions::{label_components, relabel, threshold, trace_boundary, BBox, Polarity, SupportRegion};
use crate::segmentation::{
    curvature_profile, extract_multi, find_endpoints, CurveSegment, MultiMode, MIN_PROFILE_SAMPLES,
};

/// A count that is either fixed or derived per region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Count {
    #[default]
    Auto,
    Fixed(usize),
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Auto => f.write_str("auto"),
            Count::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Count {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Count::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Count::Fixed(n)),
            _ => Err(Error::InvalidParameter(format!("expected a positive integer or \"auto\", got {s:?}"))),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Auto => s.serialize_str("auto"),
            Count::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(0) => Err(serde::de::Error::custom("count must be positive")),
            Raw::N(n) => Ok(Count::Fixed(n)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Splitting rule for boundaries with more than two curvature extrema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiSelect {
    /// Per region, whichever of the two fixed rules keeps its segments closer
    /// to the region's pixels; ties go to `Consecutive`.
    #[default]
    Auto,
    Consecutive,
    CentroidAnchored,
}

impl FromStr for MultiSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MultiSelect::Auto),
            "consecutive" => Ok(MultiSelect::Consecutive),
            "centroid-anchored" | "centroid" => Ok(MultiSelect::CentroidAnchored),
            _ => Err(Error::InvalidParameter(format!(
                "multi mode must be auto, consecutive or centroid-anchored, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// LoG scale in pixels.
    pub sigma: f64,
    /// Threshold as a fraction of the peak response of each sign, in (0, 1).
    pub tau_frac: f64,
    /// Smallest region kept, in pixels.
    pub min_area: usize,
    /// Fourier harmonics kept per boundary.
    pub harmonics: Count,
    pub polarity: Polarity,
    /// Curvature samples per boundary, at least 64.
    pub samples: usize,
    /// Points per output segment.
    pub segment_points: Count,
    pub multi_mode: MultiSelect,
    pub format: OutputFormat,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            tau_frac: 0.5,
            min_area: 10,
            harmonics: Count::Auto,
            polarity: Polarity::Positive,
            samples: 256,
            segment_points: Count::Auto,
            multi_mode: MultiSelect::Auto,
            format: OutputFormat::Json,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.sigma.is_finite() && self.sigma >= 0.5) {
            return bad(format!("sigma must be a finite value >= 0.5, got {}", self.sigma));
        }
        if !(self.tau_frac > 0.0 && self.tau_frac < 1.0) {
            return bad(format!("threshold fraction must lie in (0, 1), got {}", self.tau_frac));
        }
        if self.samples < MIN_PROFILE_SAMPLES {
            return bad(format!("samples must be at least {MIN_PROFILE_SAMPLES}, got {}", self.samples));
        }
        if let Count::Fixed(n) = self.segment_points {
            if n < 2 {
                return bad(format!("segments need at least 2 points, got {n}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub width: usize,
    pub height: usize,
    pub path: Option<String>,
}

/// What happened to one support region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDiagnostic {
    pub label: u32,
    pub polarity: Polarity,
    pub area: usize,
    pub bbox: BBox,
    pub centroid: (f64, f64),
    pub contour_len: usize,
    pub harmonics: usize,
    pub endpoint_count: usize,
    pub segment_ids: Vec<usize>,
    pub warnings: Vec<String>,
    /// Set when the region produced no segments.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    pub image: ImageMeta,
    pub config: PipelineConfig,
    pub segments: Vec<CurveSegment>,
    pub diagnostics: Vec<RegionDiagnostic>,
}

impl SegmentSet {
    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        self.image.path = Some(path.into());
        self
    }
}

/// Intermediate products, exposed for debugging and tests.
#[derive(Debug, Clone)]
pub struct Stages {
    pub response: ResponseMap,
    pub regions: Vec<SupportRegion>,
}

pub fn run(image: &GrayImage, config: &PipelineConfig) -> Result<SegmentSet> {
    run_with(image, config, Execution::default())
}

pub fn run_with(image: &GrayImage, config: &PipelineConfig, exec: Execution) -> Result<SegmentSet> {
    let stages = support_regions(image, config, exec)?;
    let outcomes = exec.map_slice(&stages.regions, |r| process_region(r, config));
    let mut segments = Vec::new();
    let mut diagnostics = Vec::with_capacity(outcomes.len());
    for (mut diag, segs) in outcomes {
        for s in segs {
            diag.segment_ids.push(segments.len());
            segments.push(s);
        }
        diagnostics.push(diag);
    }
    Ok(SegmentSet {
        image: ImageMeta { width: image.width(), height: image.height(), path: None },
        config: config.clone(),
        segments,
        diagnostics,
    })
}

/// Response and labeled support regions for `config`.
pub fn support_regions(image: &GrayImage, config: &PipelineConfig, exec: Execution) -> Result<Stages> {
    config.validate()?;
    let px = image.pixels();
    if px.iter().all(|&v| v == px[0]) {
        return Err(Error::NoSignal("flat image"));
    }
    let response = respond_with(image, config.sigma, exec)?;
    let mut regions = Vec::new();
    let mut silent = Vec::new();
    for &sign in config.polarity.signs() {
        match threshold(&response, config.tau_frac, sign) {
            Ok(mask) => regions.extend(label_components(&mask, config.min_area)),
            Err(Error::NoSignal(name)) => silent.push(name),
            Err(e) => return Err(e),
        }
    }
    if silent.len() == config.polarity.signs().len() {
        return Err(Error::NoSignal(silent[0]));
    }
    if regions.is_empty() {
        return Err(Error::NoRegions(config.min_area));
    }
    Ok(Stages { response, regions: relabel(regions) })
}

/// Pixel-extent box of `bbox` grown by `margin` pixels, as `(x0, y0, x1, y1)`.
pub fn dilated_extent(bbox: &BBox, margin: f64) -> (f64, f64, f64, f64) {
    (
        bbox.min_col as f64 - margin,
        bbox.min_row as f64 - margin,
        bbox.max_col as f64 + 1.0 + margin,
        bbox.max_row as f64 + 1.0 + margin,
    )
}

fn process_region(region: &SupportRegion, config: &PipelineConfig) -> (RegionDiagnostic, Vec<CurveSegment>) {
    let mut diag = RegionDiagnostic {
        label: region.label,
        polarity: region.polarity,
        area: region.area,
        bbox: region.bbox,
        centroid: region.centroid_xy(),
        contour_len: 0,
        harmonics: 0,
        endpoint_count: 0,
        segment_ids: Vec::new(),
        warnings: Vec::new(),
        skipped: None,
    };
    match segment_region(region, config, &mut diag) {
        Ok(segs) => (diag, segs),
        Err(e) => {
            log::debug!("region {} skipped: {e}", region.label);
            diag.skipped = Some(e.to_string());
            (diag, Vec::new())
        }
    }
}

fn segment_region(
    region: &SupportRegion,
    config: &PipelineConfig,
    diag: &mut RegionDiagnostic,
) -> Result<Vec<CurveSegment>> {
    let contour = trace_boundary(region)?;
    diag.contour_len = contour.len();
    if contour.len() < MIN_CONTOUR_LEN {
        return Err(Error::ContourTooShort { got: contour.len(), need: MIN_CONTOUR_LEN });
    }
    let mut desc: FourierDescriptor = fit_fourier(&contour)?;
    if let Count::Fixed(h) = config.harmonics {
        let cap = contour.len() / 2;
        if h > cap {
            diag.warnings.push(format!("harmonics {h} capped at {cap}"));
        }
        desc = desc.with_harmonics(h.min(cap))?;
    }
    diag.harmonics = desc.harmonics();
    let profile = curvature_profile(&desc, config.samples)?;
    if profile.degenerate > 0 {
        diag.warnings.push(format!("{} degenerate curvature samples", profile.degenerate));
    }
    let endpoints = find_endpoints(&profile);
    diag.endpoint_count = endpoints.len();
    let points = match config.segment_points {
        Count::Auto => None,
        Count::Fixed(n) => Some(n),
    };
    let centroid = region.centroid_xy();
    let extract = |mode| extract_multi(&desc, &endpoints, centroid, points, region.label, mode);
    let segs = match config.multi_mode {
        MultiSelect::Consecutive => extract(MultiMode::Consecutive)?,
        MultiSelect::CentroidAnchored => extract(MultiMode::CentroidAnchored)?,
        MultiSelect::Auto if endpoints.len() == 2 => extract(MultiMode::Consecutive)?,
        MultiSelect::Auto => {
            let a = extract(MultiMode::Consecutive)?;
            let b = extract(MultiMode::CentroidAnchored)?;
            let (da, db) = (support_distance(region, &a), support_distance(region, &b));
            log::debug!("region {}: consecutive {da:.3}, centroid-anchored {db:.3}", region.label);
            if db < da {
                b
            } else {
                a
            }
        }
    };
    let (x0, y0, x1, y1) = dilated_extent(&region.bbox, 2.0);
    for (i, s) in segs.iter().enumerate() {
        diag.warnings.extend(s.warnings.iter().cloned());
        if s.points.iter().any(|&(x, y)| x < x0 || x > x1 || y < y0 || y > y1) {
            diag.warnings.push(format!("segment {i} leaves the dilated region box"));
        }
    }
    Ok(segs)
}

/// Mean distance from segment points to the nearest region pixel center.
fn support_distance(region: &SupportRegion, segments: &[CurveSegment]) -> f64 {
    let centers: Vec<(f64, f64)> =
        region.pixels.iter().map(|&(r, c)| (c as f64 + 0.5, r as f64 + 0.5)).collect();
    let (sum, n) = segments.iter().flat_map(|s| &s.points).fold((0.0, 0usize), |(sum, n), &(x, y)| {
        let d2 = centers
            .iter()
            .map(|&(cx, cy)| (x - cx) * (x - cx) + (y - cy) * (y - cy))
            .fold(f64::INFINITY, f64::min);
        (sum + d2.sqrt(), n + 1)
    });
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
