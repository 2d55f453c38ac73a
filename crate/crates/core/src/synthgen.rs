//! Synthetic fixtures: the rotated sinusoidal step edge B(x, y) with its
//! analytic inflection points, a rectangle, an S-shaped stroke, and
//! affine resampling for the rotation / shear robustness experiments.
//!
//! Pixel `(col, row)` samples the continuous image point
//! `(col + 0.5, row + 0.5)`. Curve coordinates have their origin at
//! [`SinusoidSpec::origin`], x to the right and y *up*, one curve unit being
//! [`SinusoidSpec::scale`] pixels.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI, TAU};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Rotated sinusoidal step edge `y_r - sin(x_r) + rho = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidSpec {
    /// Rotation angle in radians.
    pub theta: f64,
    /// Vertical offset of the curve, in curve units.
    pub rho: f64,
    /// Background brightness (where the step argument is negative).
    pub b1: f64,
    /// Contrast added on the positive side of the step.
    pub delta_b: f64,
    /// Pixels per curve unit.
    pub scale: f64,
    pub width: usize,
    pub height: usize,
    /// Image-plane location of the curve-coordinate origin.
    pub origin: (f64, f64),
}

impl SinusoidSpec {
    /// 20 px per curve unit, `b1 = 0.25`, `delta_b = 0.5`, origin at the image center.
    pub fn new(theta: f64, rho: f64, width: usize, height: usize) -> Self {
        Self {
            theta,
            rho,
            b1: 0.25,
            delta_b: 0.5,
            scale: 20.0,
            width,
            height,
            origin: (width as f64 / 2.0, height as f64 / 2.0),
        }
    }

    /// Checks the invariants and returns a copy with `theta` folded into `[0, 2pi)`.
    pub fn validated(&self) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.delta_b.is_nan() || self.delta_b <= 0.0 {
            return bad("delta_b must be positive");
        }
        if self.scale.is_nan() || self.scale <= 0.0 {
            return bad("scale must be positive");
        }
        if self.width < 16 || self.height < 16 {
            return bad("sinusoid fixture needs at least 16x16 pixels");
        }
        if !(self.b1 >= 0.0 && self.b1 + self.delta_b <= 1.0) {
            return bad("b1 and b1 + delta_b must lie in [0, 1]");
        }
        if !self.theta.is_finite() || !self.rho.is_finite() {
            return bad("theta and rho must be finite");
        }
        let mut spec = *self;
        spec.theta = self.theta.rem_euclid(TAU);
        if spec.theta >= TAU {
            spec.theta = 0.0;
        }
        Ok(spec)
    }

    pub fn image_to_curve(&self, px: f64, py: f64) -> (f64, f64) {
        ((px - self.origin.0) / self.scale, (self.origin.1 - py) / self.scale)
    }

    pub fn curve_to_image(&self, x: f64, y: f64) -> (f64, f64) {
        (self.origin.0 + x * self.scale, self.origin.1 - y * self.scale)
    }

    /// `(x_r, y_r)` of a curve-frame point: `y_r = a*y - b*x`, `x_r = b*y + a*x`
    /// with `a = cos(theta)`, `b = sin(theta)`.
    pub fn rotate(&self, x: f64, y: f64) -> (f64, f64) {
        let (b, a) = self.theta.sin_cos();
        (b * y + a * x, a * y - b * x)
    }

    /// Inverse of [`SinusoidSpec::rotate`].
    pub fn unrotate(&self, xr: f64, yr: f64) -> (f64, f64) {
        let (b, a) = self.theta.sin_cos();
        (a * xr - b * yr, a * yr + b * xr)
    }

    /// Argument of the unit step at a curve-frame point.
    pub fn step_argument(&self, x: f64, y: f64) -> f64 {
        let (xr, yr) = self.rotate(x, y);
        yr - xr.sin() + self.rho
    }
}

/// Renders `B(x, y) = b1 + delta_b * u(y_r - sin(x_r) + rho)` with `u(0) = 0`.
pub fn render_sinusoid(spec: &SinusoidSpec) -> Result<GrayImage> {
    let spec = spec.validated()?;
    let (mut lo, mut hi) = (false, false);
    let img = GrayImage::from_fn(spec.width, spec.height, |col, row| {
        let (x, y) = spec.image_to_curve(col as f64 + 0.5, row as f64 + 0.5);
        if spec.step_argument(x, y) > 0.0 {
            hi = true;
            spec.b1 + spec.delta_b
        } else {
            lo = true;
            spec.b1
        }
    })?;
    if lo && hi {
        Ok(img)
    } else {
        Err(Error::CurveOutsideWindow)
    }
}

/// Inflection points `(n*pi, -rho)` for `n` in `n_min..=n_max`, in curve coordinates.
pub fn inflection_points_curve(spec: &SinusoidSpec, n_min: i64, n_max: i64) -> Result<Vec<(f64, f64)>> {
    let spec = spec.validated()?;
    if n_min > n_max {
        return Err(Error::InvalidParameter("n_min must not exceed n_max".into()));
    }
    Ok((n_min..=n_max).map(|n| spec.unrotate(n as f64 * PI, -spec.rho)).collect())
}

/// Inflection points mapped to image pixel coordinates; points outside the
/// `[0, width] x [0, height]` window are dropped.
pub fn analytic_inflection_points(spec: &SinusoidSpec, n_min: i64, n_max: i64) -> Result<Vec<(f64, f64)>> {
    let (w, h) = (spec.width as f64, spec.height as f64);
    Ok(inflection_points_curve(spec, n_min, n_max)?
        .into_iter()
        .map(|(x, y)| spec.curve_to_image(x, y))
        .filter(|&(px, py)| (0.0..=w).contains(&px) && (0.0..=h).contains(&py))
        .collect())
}

/// Axis-aligned rectangle in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x0 && x < self.x1 && y > self.y0 && y < self.y1
    }

    /// The four sides as `(start, end)` pairs: top, right, bottom, left.
    pub fn sides(&self) -> [((f64, f64), (f64, f64)); 4] {
        let Rect { x0, y0, x1, y1 } = *self;
        [((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)), ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))]
    }
}

const RECT_MARGIN: f64 = 8.0;

/// `b1 + delta_b` inside `rect`, `b1` elsewhere.
pub fn render_rectangle(width: usize, height: usize, rect: Rect, b1: f64, delta_b: f64) -> Result<GrayImage> {
    if !(rect.x1 > rect.x0 && rect.y1 > rect.y0) {
        return Err(Error::InvalidParameter("rectangle has zero area".into()));
    }
    if rect.x0 < RECT_MARGIN
        || rect.y0 < RECT_MARGIN
        || rect.x1 > width as f64 - RECT_MARGIN
        || rect.y1 > height as f64 - RECT_MARGIN
    {
        return Err(Error::InvalidParameter(format!(
            "rectangle must keep a {RECT_MARGIN}-pixel margin from the border"
        )));
    }
    check_levels(b1, delta_b)?;
    GrayImage::from_fn(width, height, |col, row| {
        if rect.contains(col as f64 + 0.5, row as f64 + 0.5) {
            b1 + delta_b
        } else {
            b1
        }
    })
}

fn check_levels(b1: f64, delta_b: f64) -> Result<()> {
    if delta_b > 0.0 && b1 >= 0.0 && b1 + delta_b <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("brightness levels must satisfy 0 <= b1 < b1 + delta_b <= 1".into()))
    }
}

/// S-shaped stroke built from two half-annuli, point-symmetric about `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SShape {
    pub center: (f64, f64),
    /// Radius of the stroke centerline of each loop.
    pub radius: f64,
    /// Half the stroke thickness.
    pub half_width: f64,
}

impl SShape {
    /// Screen angle (y down) range of the upper loop that carries ink; the
    /// lower loop is its point reflection.
    fn in_upper_arc(angle: f64) -> bool {
        angle >= FRAC_PI_2 || angle <= -FRAC_PI_6
    }

    fn in_upper_loop(&self, x: f64, y: f64) -> bool {
        let (cx, cy) = (self.center.0, self.center.1 - self.radius);
        let (dx, dy) = (x - cx, y - cy);
        let r = dx.hypot(dy);
        (r - self.radius).abs() < self.half_width && Self::in_upper_arc(dy.atan2(dx))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (rx, ry) = (2.0 * self.center.0 - x, 2.0 * self.center.1 - y);
        self.in_upper_loop(x, y) || self.in_upper_loop(rx, ry)
    }

    /// Dense samples of the outline, spacing at most `step` pixels.
    pub fn outline(&self, step: f64) -> Vec<(f64, f64)> {
        let mut upper = Vec::new();
        let (cx, cy) = (self.center.0, self.center.1 - self.radius);
        // ink spans screen angles [pi/2, 11pi/6] going through pi
        let (a0, a1) = (FRAC_PI_2, TAU - FRAC_PI_6);
        for r in [self.radius - self.half_width, self.radius + self.half_width] {
            let n = ((a1 - a0) * r / step).ceil().max(2.0) as usize;
            for i in 0..=n {
                let a = a0 + (a1 - a0) * i as f64 / n as f64;
                upper.push((cx + r * a.cos(), cy + r * a.sin()));
            }
        }
        // flat end caps
        for a in [a0, a1] {
            let n = (2.0 * self.half_width / step).ceil().max(2.0) as usize;
            for i in 0..=n {
                let r = self.radius - self.half_width + 2.0 * self.half_width * i as f64 / n as f64;
                upper.push((cx + r * a.cos(), cy + r * a.sin()));
            }
        }
        let lower: Vec<_> =
            upper.iter().map(|&(x, y)| (2.0 * self.center.0 - x, 2.0 * self.center.1 - y)).collect();
        // the two loops share the cap at the center; drop cap samples buried in ink
        upper
            .into_iter()
            .chain(lower)
            .filter(|&(x, y)| {
                let probe = 0.5 * step.min(0.5);
                let inside = [(probe, 0.0), (-probe, 0.0), (0.0, probe), (0.0, -probe)]
                    .iter()
                    .filter(|(dx, dy)| self.contains(x + dx, y + dy))
                    .count();
                inside < 4
            })
            .collect()
    }
}

pub fn render_s_shape(
    width: usize,
    height: usize,
    shape: &SShape,
    b1: f64,
    delta_b: f64,
) -> Result<GrayImage> {
    check_levels(b1, delta_b)?;
    let reach = 2.0 * shape.radius + shape.half_width + RECT_MARGIN;
    let (cx, cy) = shape.center;
    if cx - reach < 0.0 || cy - reach < 0.0 || cx + reach > width as f64 || cy + reach > height as f64 {
        return Err(Error::InvalidParameter("S shape does not fit with margin".into()));
    }
    GrayImage::from_fn(width, height, |col, row| {
        if shape.contains(col as f64 + 0.5, row as f64 + 0.5) {
            b1 + delta_b
        } else {
            b1
        }
    })
}

/// `dst = matrix * src + translation`, in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub matrix: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { matrix: [[1.0, 0.0], [0.0, 1.0]], translation: [0.0, 0.0] };

    /// Applies `matrix` about a fixed point `center`.
    pub fn about(center: (f64, f64), matrix: [[f64; 2]; 2]) -> Self {
        let (cx, cy) = center;
        let tx = cx - (matrix[0][0] * cx + matrix[0][1] * cy);
        let ty = cy - (matrix[1][0] * cx + matrix[1][1] * cy);
        Self { matrix, translation: [tx, ty] }
    }

    /// Rotation by `angle` radians about `center` (counterclockwise on screen
    /// for positive angles).
    pub fn rotation_about(center: (f64, f64), angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        // y points down, so a screen-counterclockwise turn uses -angle in the math frame
        Self::about(center, [[c, s], [-s, c]])
    }

    /// `x' = x + k*y`, `y' = y` about `center`; `k = 0.5` is the robustness shear.
    pub fn shear_about(center: (f64, f64), k: f64) -> Self {
        Self::about(center, [[1.0, k], [0.0, 1.0]])
    }

    pub fn determinant(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    pub fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let m = &self.matrix;
        (m[0][0] * x + m[0][1] * y + self.translation[0], m[1][0] * x + m[1][1] * y + self.translation[1])
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let det = self.determinant();
        if det.abs() < 1e-12 || !det.is_finite() {
            return Err(Error::SingularMap(det));
        }
        if *self == Self::IDENTITY {
            return Ok(Self::IDENTITY);
        }
        let m = &self.matrix;
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let [tx, ty] = self.translation;
        Ok(AffineMap {
            matrix: inv,
            translation: [-(inv[0][0] * tx + inv[0][1] * ty), -(inv[1][0] * tx + inv[1][1] * ty)],
        })
    }
}

/// Inverse-mapped bilinear resampling onto a same-size canvas; samples that
/// fall outside the source take `background`.
pub fn warp(image: &GrayImage, map: &AffineMap, background: f64) -> Result<GrayImage> {
    let inv = map.inverse()?;
    let (w, h) = (image.width(), image.height());
    let (wmax, hmax) = ((w - 1) as f64, (h - 1) as f64);
    GrayImage::from_fn(w, h, |col, row| {
        let (sx, sy) = inv.apply((col as f64 + 0.5, row as f64 + 0.5));
        let (fx, fy) = (sx - 0.5, sy - 0.5);
        if !(fx >= 0.0 && fy >= 0.0 && fx <= wmax && fy <= hmax) {
            return background;
        }
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
        let (ax, ay) = (fx - x0 as f64, fy - y0 as f64);
        let top = image.get(x0, y0) + ax * (image.get(x1, y0) - image.get(x0, y0));
        let bot = image.get(x0, y1) + ax * (image.get(x1, y1) - image.get(x0, y1));
        (top + ay * (bot - top)).clamp(0.0, 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(theta: f64, rho: f64) -> SinusoidSpec {
        SinusoidSpec::new(theta, rho, 64, 64)
    }

    #[test]
    fn step_argument_examples() {
        let s = spec(0.0, 0.0);
        assert_eq!(s.step_argument(0.0, 1.0), 1.0);
        assert_eq!(s.step_argument(0.0, -1.0), -1.0);
    }

    #[test]
    fn rendered_brightness_follows_step_sign() {
        let s = spec(0.0, 0.0);
        let img = render_sinusoid(&s).unwrap();
        // curve point (0, 1) sits 20 px above the origin at (32, 32)
        let (px, py) = s.curve_to_image(0.0, 1.0);
        assert_eq!(img.get(px as usize, py as usize), 0.75);
        let (px, py) = s.curve_to_image(0.0, -1.0);
        assert_eq!(img.get(px as usize, py as usize), 0.25);
    }

    #[test]
    fn rendering_is_two_level() {
        let s = SinusoidSpec::new(PI / 3.0, 0.2, 256, 256);
        let img = render_sinusoid(&s).unwrap();
        assert!(img.pixels().iter().all(|&v| v == 0.25 || v == 0.75));
        let bright = img.pixels().iter().filter(|&&v| v == 0.75).count();
        assert!(bright > 20_000 && bright < 45_000, "{bright}");
    }

    #[test]
    fn curve_outside_window_is_rejected() {
        let mut s = spec(0.0, 0.0);
        s.rho = 50.0;
        assert!(matches!(render_sinusoid(&s), Err(Error::CurveOutsideWindow)));
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(0.0, 0.0);
        s.delta_b = 0.0;
        assert!(s.validated().is_err());
        let s = SinusoidSpec::new(0.0, 0.0, 8, 64);
        assert!(s.validated().is_err());
        assert_eq!(spec(-PI, 0.0).validated().unwrap().theta, PI);
    }

    #[test]
    fn inflection_examples() {
        let p = inflection_points_curve(&spec(0.0, 0.0), 0, 0).unwrap();
        assert_eq!(p, vec![(0.0, 0.0)]);

        let p = inflection_points_curve(&spec(0.0, 0.2), 1, 1).unwrap();
        assert!((p[0].0 - PI).abs() < 1e-12 && (p[0].1 + 0.2).abs() < 1e-12);

        // theta = pi/2: y_r = -x, x_r = y, so (x_r, y_r) = (pi, 0) is the frame point (0, pi)
        let s = spec(FRAC_PI_2, 0.0);
        let p = inflection_points_curve(&s, -1, 1).unwrap();
        assert!(p[2].0.abs() < 1e-12 && (p[2].1 - PI).abs() < 1e-12);
        assert!(p[0].0.abs() < 1e-12 && (p[0].1 + PI).abs() < 1e-12);
        for (x, y) in p {
            assert!(s.step_argument(x, y).abs() < 1e-12);
        }
        assert!(inflection_points_curve(&s, 2, 1).is_err());
    }

    #[test]
    fn inflection_points_lie_on_curve_and_window() {
        let s = SinusoidSpec::new(PI / 3.0, 0.2, 256, 256);
        let pts = analytic_inflection_points(&s, -20, 20).unwrap();
        assert_eq!(pts.len(), 5);
        for (px, py) in pts {
            let (x, y) = s.image_to_curve(px, py);
            assert!(s.step_argument(x, y).abs() < 1e-9);
        }
    }

    #[test]
    fn inflection_points_periodic_in_theta() {
        let a = SinusoidSpec::new(0.7, 0.3, 128, 128);
        let mut b = a;
        b.theta += TAU;
        let pa = analytic_inflection_points(&a, -5, 5).unwrap();
        let pb = analytic_inflection_points(&b, -5, 5).unwrap();
        assert_eq!(pa.len(), pb.len());
        for (p, q) in pa.iter().zip(&pb) {
            assert!((p.0 - q.0).abs() < 1e-9 && (p.1 - q.1).abs() < 1e-9);
        }
    }

    #[test]
    fn rectangle_fixture() {
        let img = render_rectangle(128, 128, Rect::new(32.0, 32.0, 96.0, 80.0), 0.0, 1.0).unwrap();
        let ones = img.pixels().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(ones, 64 * 48);
        assert!(img.pixels().iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(img.get(32, 32), 1.0);
        assert_eq!(img.get(31, 32), 0.0);
        assert_eq!(img.get(95, 79), 1.0);
        assert_eq!(img.get(96, 79), 0.0);
    }

    #[test]
    fn rectangle_preconditions() {
        assert!(render_rectangle(128, 128, Rect::new(40.0, 40.0, 40.0, 90.0), 0.0, 1.0).is_err());
        assert!(render_rectangle(128, 128, Rect::new(0.0, 32.0, 96.0, 80.0), 0.0, 1.0).is_err());
        assert!(render_rectangle(128, 128, Rect::new(32.0, 32.0, 124.0, 80.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn s_shape_is_point_symmetric() {
        let s = SShape { center: (64.0, 64.0), radius: 20.0, half_width: 5.0 };
        let img = render_s_shape(128, 128, &s, 0.0, 1.0).unwrap();
        for row in 0..128 {
            for col in 0..128 {
                assert_eq!(img.get(col, row), img.get(127 - col, 127 - row));
            }
        }
        // centerline at the top of the upper loop is ink, the hole is not
        assert_eq!(img.get(64, 24), 1.0);
        assert_eq!(img.get(64, 44), 0.0);
        for (x, y) in s.outline(0.5) {
            let near_ink = (-1..=1)
                .any(|d: i32| (-1..=1).any(|e: i32| s.contains(x + d as f64 * 0.6, y + e as f64 * 0.6)));
            assert!(near_ink);
        }
    }

    #[test]
    fn warp_identity_is_bit_exact() {
        let img = render_sinusoid(&SinusoidSpec::new(0.4, 0.1, 64, 64)).unwrap();
        assert_eq!(warp(&img, &AffineMap::IDENTITY, 0.25).unwrap(), img);
    }

    #[test]
    fn warp_rotation_roundtrip_on_smooth_image() {
        let img = GrayImage::from_fn(96, 96, |c, r| {
            let (x, y) = (c as f64 - 48.0, r as f64 - 48.0);
            0.5 + 0.4 * (-(x * x + y * y) / 800.0).exp() * (x / 9.0).cos()
        })
        .unwrap();
        let c = (48.0, 48.0);
        let there = warp(&img, &AffineMap::rotation_about(c, FRAC_PI_6), 0.5).unwrap();
        let back = warp(&there, &AffineMap::rotation_about(c, -FRAC_PI_6), 0.5).unwrap();
        let mut worst: f64 = 0.0;
        for r in 2..94 {
            for col in 2..94 {
                worst = worst.max((back.get(col, r) - img.get(col, r)).abs());
            }
        }
        assert!(worst < 0.05, "{worst}");
    }

    #[test]
    fn shear_makes_parallelogram() {
        let img = render_rectangle(128, 128, Rect::new(32.0, 32.0, 96.0, 80.0), 0.0, 1.0).unwrap();
        let map = AffineMap::shear_about((64.0, 64.0), 0.5);
        let out = warp(&img, &map, 0.0).unwrap();
        // rows are shifted by 0.5 * (y - 64): leftmost ink column moves right with y
        let left_edge = |row: usize| (0..128).find(|&c| out.get(c, row) > 0.5).unwrap();
        assert_eq!(left_edge(40) + 1, left_edge(42));
        assert!(left_edge(76) > left_edge(36) + 15);
        assert!(
            warp(&img, &AffineMap { matrix: [[1.0, 2.0], [0.5, 1.0]], translation: [0.0; 2] }, 0.0).is_err()
        );
    }

    #[test]
    fn affine_inverse_roundtrip() {
        let m = AffineMap::rotation_about((10.0, 20.0), 0.3);
        let inv = m.inverse().unwrap();
        let p = inv.apply(m.apply((3.0, -7.0)));
        assert!((p.0 - 3.0).abs() < 1e-12 && (p.1 + 7.0).abs() < 1e-12);
        assert_eq!(m.apply((10.0, 20.0)), (10.0, 20.0));
    }
}
