//! Laplacian-of-Gaussian kernel and same-size correlation with replicate
//! borders.
//!
//! The kernel samples `f(x, y) = 1/(pi s^4) [ (x^2+y^2)/(2 s^2) - 1 ] exp(-(x^2+y^2)/(2 s^2))`
//! at integer offsets within `radius = ceil(4 s)` and subtracts the tap mean
//! so constant images respond with exactly zero. A step edge responds
//! positively on its dark side.
//!
//! The direct path groups taps into orbits of the square's symmetry group
//! and sums each orbit's pixels in sorted order, which makes the response to
//! a 90-degree-rotated (or mirrored) image the exactly rotated response.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::image::GrayImage;

/// Raw kernel value before DC correction.
pub fn log_value(x: f64, y: f64, sigma: f64) -> f64 {
    let q = (x * x + y * y) / (2.0 * sigma * sigma);
    (q - 1.0) * (-q).exp() / (PI * sigma.powi(4))
}

#[derive(Debug, Clone)]
struct Orbit {
    tap: f64,
    offsets: Vec<(isize, isize)>,
}

/// DC-corrected, dihedrally symmetric LoG kernel.
#[derive(Debug, Clone)]
pub struct LogKernel {
    sigma: f64,
    radius: usize,
    taps: Vec<f64>,
    mean: f64,
    orbits: Vec<Orbit>,
}

impl LogKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.5 {
            return Err(Error::InvalidParameter(format!("LoG sigma must be at least 0.5, got {sigma}")));
        }
        let radius = (4.0 * sigma).ceil() as usize;
        let r = radius as isize;
        let side = 2 * radius + 1;

        // one raw value per canonical offset (a >= b >= 0) keeps orbit taps identical
        let mut orbits = Vec::new();
        let mut raw_sum = 0.0;
        for a in 0..=r {
            for b in 0..=a {
                let mut offsets: Vec<(isize, isize)> = Vec::with_capacity(8);
                for (x, y) in [(a, b), (b, a)] {
                    for (sx, sy) in [(1, 1), (-1, 1), (1, -1), (-1, -1)] {
                        let p = (sx * x, sy * y);
                        if !offsets.contains(&p) {
                            offsets.push(p);
                        }
                    }
                }
                let tap = log_value(a as f64, b as f64, sigma);
                raw_sum += tap * offsets.len() as f64;
                orbits.push(Orbit { tap, offsets });
            }
        }
        let mean = raw_sum / (side * side) as f64;
        let mut taps = vec![0.0; side * side];
        for orbit in &mut orbits {
            orbit.tap -= mean;
            for &(dx, dy) in &orbit.offsets {
                taps[((dy + r) as usize) * side + (dx + r) as usize] = orbit.tap;
            }
        }
        Ok(Self { sigma, radius, taps, mean, orbits })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Row-major `(2 radius + 1)^2` taps after DC correction.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at offset `(dx, dy)` from the center.
    pub fn tap(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        self.taps[((dy + r) as usize) * self.side() + (dx + r) as usize]
    }

    /// The mean that was subtracted from the raw samples.
    pub fn dc_offset(&self) -> f64 {
        self.mean
    }
}

pub fn log_kernel(sigma: f64) -> Result<LogKernel> {
    LogKernel::new(sigma)
}

/// Signed filter response with the geometry of its source image.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ResponseMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidParameter("response size mismatch".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("response contains non-finite values".into()));
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Response with the sign flipped, for selecting the negative polarity.
    pub fn negated(&self) -> ResponseMap {
        ResponseMap {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Same screen rotation as [`GrayImage::rotate90`].
    pub fn rotate90(&self) -> ResponseMap {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0.0; w * h];
        for row in 0..h {
            for col in 0..w {
                out[col * h + (h - 1 - row)] = self.values[row * w + col];
            }
        }
        ResponseMap { width: h, height: w, values: out }
    }
}

fn check_size(image: &GrayImage, kernel: &LogKernel) -> Result<()> {
    let min = kernel.side();
    if image.width() < min || image.height() < min {
        return Err(Error::ImageTooSmall { width: image.width(), height: image.height(), min });
    }
    Ok(())
}

/// Direct same-size correlation with clamp-to-edge borders.
pub fn convolve(image: &GrayImage, kernel: &LogKernel) -> Result<ResponseMap> {
    convolve_with(image, kernel, Execution::default())
}

pub fn convolve_with(image: &GrayImage, kernel: &LogKernel, exec: Execution) -> Result<ResponseMap> {
    check_size(image, kernel)?;
    let (w, h) = (image.width(), image.height());
    let r = kernel.radius as isize;
    let mut values = vec![0.0; w * h];
    exec.for_each_chunk(&mut values, w, |row, out| {
        let row = row as isize;
        let interior_rows = row >= r && row + r < h as isize;
        let mut buf = [0.0f64; 8];
        for (col, slot) in out.iter_mut().enumerate() {
            let col = col as isize;
            let interior = interior_rows && col >= r && col + r < w as isize;
            let mut acc = 0.0;
            for orbit in &kernel.orbits {
                let n = orbit.offsets.len();
                for (k, &(dx, dy)) in orbit.offsets.iter().enumerate() {
                    buf[k] = if interior {
                        image.get((col + dx) as usize, (row + dy) as usize)
                    } else {
                        image.get_clamped(col + dx, row + dy)
                    };
                }
                acc += orbit.tap * sorted_sum(&mut buf[..n]);
            }
            *slot = acc;
        }
    });
    ResponseMap::new(w, h, values)
}

/// Order-independent sum of at most eight values.
#[inline]
fn sorted_sum(v: &mut [f64]) -> f64 {
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    v.iter().sum()
}

/// Separable evaluation of the same kernel: the LoG splits into
/// `A(x) g(y) + g(x) A(y) - c g(x) g(y)`, and the DC correction is a
/// constant (rank one) term. Agrees with [`convolve`] to rounding error.
pub fn convolve_separable(image: &GrayImage, kernel: &LogKernel, exec: Execution) -> Result<ResponseMap> {
    check_size(image, kernel)?;
    let (w, h) = (image.width(), image.height());
    let r = kernel.radius as isize;
    let s2 = 2.0 * kernel.sigma * kernel.sigma;
    let c = 1.0 / (PI * kernel.sigma.powi(4));
    let offs: Vec<f64> = (-r..=r).map(|d| d as f64).collect();
    let g: Vec<f64> = offs.iter().map(|d| (-d * d / s2).exp()).collect();
    let a: Vec<f64> = offs.iter().zip(&g).map(|(d, g)| c * d * d / s2 * g).collect();
    let ones = vec![1.0; offs.len()];

    let pass_rows = |taps: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; w * h];
        exec.for_each_chunk(&mut out, w, |row, dst| {
            for (col, slot) in dst.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    acc += t * image.get_clamped(col as isize + k as isize - r, row as isize);
                }
                *slot = acc;
            }
        });
        out
    };
    let pass_cols = |src: &[f64], taps: &[f64], dst: &mut [f64], scale: f64| {
        exec.for_each_chunk(dst, w, |row, out| {
            for (col, slot) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    let rr = (row as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                    acc += t * src[rr * w + col];
                }
                *slot += scale * acc;
            }
        });
    };

    let rows_a = pass_rows(&a);
    let rows_g = pass_rows(&g);
    let rows_1 = pass_rows(&ones);
    let mut values = vec![0.0; w * h];
    pass_cols(&rows_a, &g, &mut values, 1.0);
    pass_cols(&rows_g, &a, &mut values, 1.0);
    pass_cols(&rows_g, &g, &mut values, -c);
    pass_cols(&rows_1, &ones, &mut values, -kernel.mean);
    ResponseMap::new(w, h, values)
}

/// `convolve(image, log_kernel(sigma))`.
pub fn respond(image: &GrayImage, sigma: f64) -> Result<ResponseMap> {
    respond_with(image, sigma, Execution::default())
}

pub fn respond_with(image: &GrayImage, sigma: f64, exec: Execution) -> Result<ResponseMap> {
    convolve_with(image, &log_kernel(sigma)?, exec)
}
