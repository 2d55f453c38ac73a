//! JSON, SVG and CSV output of a [`SegmentSet`], plus debug rasters.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::ResponseMap;
use crate::image::{encode_png_gray, encode_png_indexed, GrayImage};
use crate::pipeline::{ImageMeta, PipelineConfig, RegionDiagnostic, SegmentSet};
use crate::regions::{BBox, Polarity, SupportRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Svg,
    Csv,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Svg => "svg",
            OutputFormat::Csv => "csv",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// The JSON document written for a [`SegmentSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub image: ImageMeta,
    pub config: PipelineConfig,
    pub segments: Vec<SegmentRecord>,
    pub diagnostics: Vec<RegionDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub id: usize,
    pub region_label: u32,
    pub endpoints: [(f64, f64); 2],
    pub points: Vec<(f64, f64)>,
}

impl Report {
    pub fn from_set(set: &SegmentSet) -> Report {
        let segments = set
            .segments
            .iter()
            .enumerate()
            .map(|(id, s)| {
                let (a, b) = s.endpoints();
                SegmentRecord {
                    id,
                    region_label: s.source_label,
                    endpoints: [a, b],
                    points: s.points.clone(),
                }
            })
            .collect();
        Report {
            image: set.image.clone(),
            config: set.config.clone(),
            segments,
            diagnostics: set.diagnostics.clone(),
        }
    }

    pub fn parse(bytes: &[u8]) -> Result<Report> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

pub fn to_json(set: &SegmentSet) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&Report::from_set(set))?;
    out.push(b'\n');
    Ok(out)
}

/// `segment_id,k,x,y`, one row per sample point.
pub fn to_csv(set: &SegmentSet) -> Vec<u8> {
    let mut out = String::from("segment_id,k,x,y\n");
    for (id, s) in set.segments.iter().enumerate() {
        for (k, (x, y)) in s.points.iter().enumerate() {
            let _ = writeln!(out, "{id},{k},{x},{y}");
        }
    }
    out.into_bytes()
}

const STROKES: [&str; 8] =
    ["#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#bfef45"];

/// Each segment as a polyline with dots at its endpoints, optionally over the source raster.
pub fn to_svg(set: &SegmentSet, background: Option<&GrayImage>) -> Result<Vec<u8>> {
    let (w, h) = (set.image.width, set.image.height);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    match background {
        Some(img) => {
            let data = base64::engine::general_purpose::STANDARD.encode(img.encode_png()?);
            let _ = writeln!(
                out,
                r#"<image x="0" y="0" width="{w}" height="{h}" style="image-rendering:pixelated" href="data:image/png;base64,{data}"/>"#
            );
        }
        None => {
            let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        }
    }
    for (id, s) in set.segments.iter().enumerate() {
        let color = STROKES[id % STROKES.len()];
        let pts: Vec<String> = s.points.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(
            out,
            r#"<polyline id="segment-{id}" fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            pts.join(" ")
        );
        let (a, b) = s.endpoints();
        for (x, y) in [a, b] {
            let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="1.5" fill="{color}"/>"#);
        }
    }
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}

pub fn export(set: &SegmentSet, format: OutputFormat, background: Option<&GrayImage>) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Json => to_json(set),
        OutputFormat::Svg => to_svg(set, background),
        OutputFormat::Csv => Ok(to_csv(set)),
    }
}

/// Response as 8-bit gray with min mapped to 0 and max to 255, plus the
/// sidecar text holding both bounds.
pub fn response_pgm(resp: &ResponseMap) -> (Vec<u8>, String) {
    let bytes = response_bytes(resp);
    let (lo, hi) = (resp.min(), resp.max());
    let pgm = GrayImage::from_u8(resp.width(), resp.height(), &bytes)
        .expect("byte raster matches map size")
        .encode_pgm();
    (pgm, format!("min {lo:?}\nmax {hi:?}\n"))
}

/// Reads the `(min, max)` pair written by [`response_pgm`].
pub fn parse_response_sidecar(text: &str) -> Result<(f64, f64)> {
    let mut lo = None;
    let mut hi = None;
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        let (Some(key), Some(val)) = (parts.next(), parts.next()) else { continue };
        let v: f64 = val.parse().map_err(|_| Error::Decode(format!("bad sidecar value {val:?}")))?;
        match key {
            "min" => lo = Some(v),
            "max" => hi = Some(v),
            _ => {}
        }
    }
    lo.zip(hi).ok_or_else(|| Error::Decode("sidecar needs min and max".into()))
}

/// Summary written next to the region raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub label: u32,
    pub polarity: Polarity,
    pub area: usize,
    pub centroid: (f64, f64),
    pub bbox: BBox,
}

/// Label raster as a palette PNG: 0 is background, labels cycle through 255 colors.
pub fn regions_png(width: usize, height: usize, regions: &[SupportRegion]) -> Result<Vec<u8>> {
    let mut indices = vec![0u8; width * height];
    for r in regions {
        let idx = ((r.label - 1) % 255 + 1) as u8;
        for &(row, col) in &r.pixels {
            indices[row * width + col] = idx;
        }
    }
    let mut palette = vec![0u8; 3];
    for i in 1..256u32 {
        // golden-angle hues, fully saturated
        let hue = (i as f64 * 137.507_764) % 360.0;
        palette.extend(hsv_to_rgb(hue));
    }
    encode_png_indexed(width, height, &indices, &palette)
}

fn hsv_to_rgb(hue: f64) -> [u8; 3] {
    let x = 1.0 - ((hue / 60.0) % 2.0 - 1.0).abs();
    let (r, g, b) = match (hue / 60.0) as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8]
}

pub fn regions_json(regions: &[SupportRegion]) -> Result<Vec<u8>> {
    let rows: Vec<RegionSummary> = regions
        .iter()
        .map(|r| RegionSummary {
            label: r.label,
            polarity: r.polarity,
            area: r.area,
            centroid: r.centroid_xy(),
            bbox: r.bbox,
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&rows)?;
    out.push(b'\n');
    Ok(out)
}

/// Grayscale PNG of the response map, same mapping as [`response_pgm`].
pub fn response_png(resp: &ResponseMap) -> Result<Vec<u8>> {
    let bytes = response_bytes(resp);
    encode_png_gray(resp.width(), resp.height(), &bytes)
}

fn response_bytes(resp: &ResponseMap) -> Vec<u8> {
    let (lo, hi) = (resp.min(), resp.max());
    let span = hi - lo;
    resp.values()
        .iter()
        .map(|&v| if span > 0.0 { (255.0 * (v - lo) / span).round() as u8 } else { 0 })
        .collect()
}
