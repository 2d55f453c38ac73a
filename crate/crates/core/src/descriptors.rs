//! Fourier series of a closed contour `u(t) = x(t) + j y(t)`, `t = 0..T`.
//!
//! `U_n = 1/T sum_t u(t) exp(-j 2 pi n t / T)` is computed by direct
//! summation. Evaluation keeps harmonics `0`, `1..=H` and `T-H..T` and uses
//! the signed index (`n > T/2` becomes `n - T`), so the evaluated curve is
//! the band-limited interpolant and its derivatives are exact term by term.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regions::Contour;

pub const MIN_CONTOUR_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierDescriptor {
    coeffs: Vec<Complex64>,
    harmonics: usize,
    /// Active `(signed index, coefficient)` pairs, rebuilt when `harmonics` changes.
    active: Vec<(f64, Complex64)>,
}

/// Band limit used when none is configured: `max(4, round(T/16))`, at most `T/2`.
pub fn default_harmonics(len: usize) -> usize {
    (((len as f64) / 16.0).round() as usize).max(4).min(len / 2)
}

impl FourierDescriptor {
    /// Fits the series to `points` taken as `x + j y`.
    pub fn fit(points: &[(f64, f64)]) -> Result<Self> {
        let t_len = points.len();
        if t_len < MIN_CONTOUR_LEN {
            return Err(Error::ContourTooShort { got: t_len, need: MIN_CONTOUR_LEN });
        }
        let twiddle: Vec<Complex64> =
            (0..t_len).map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / t_len as f64)).collect();
        let scale = 1.0 / t_len as f64;
        let coeffs = (0..t_len)
            .map(|n| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, &(x, y)) in points.iter().enumerate() {
                    acc += Complex64::new(x, y) * twiddle[(n * t) % t_len];
                }
                acc * scale
            })
            .collect();
        Self::from_coeffs(coeffs, default_harmonics(t_len))
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>, harmonics: usize) -> Result<Self> {
        let mut d = Self { coeffs, harmonics: 0, active: Vec::new() };
        d.set_harmonics(harmonics)?;
        Ok(d)
    }

    pub fn with_harmonics(mut self, harmonics: usize) -> Result<Self> {
        self.set_harmonics(harmonics)?;
        Ok(self)
    }

    fn set_harmonics(&mut self, harmonics: usize) -> Result<()> {
        let t_len = self.coeffs.len();
        if harmonics < 1 || harmonics > t_len / 2 {
            return Err(Error::InvalidParameter(format!(
                "harmonic count {harmonics} outside 1..={}",
                t_len / 2
            )));
        }
        self.harmonics = harmonics;
        self.active = self
            .active_indices()
            .into_iter()
            .map(|n| (self.signed_index(n) as f64, self.coeffs[n]))
            .collect();
        Ok(())
    }

    /// Number of contour points `T` the series was fitted to.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Parameter period, equal to `T`.
    pub fn period(&self) -> f64 {
        self.coeffs.len() as f64
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn signed_index(&self, n: usize) -> isize {
        let t_len = self.coeffs.len();
        if 2 * n > t_len {
            n as isize - t_len as isize
        } else {
            n as isize
        }
    }

    /// `{0} U {1..=H} U {T-H..T}` in increasing order, without duplicates.
    pub fn active_indices(&self) -> Vec<usize> {
        let t_len = self.coeffs.len();
        let mut v: Vec<usize> = (0..=self.harmonics).collect();
        v.extend((t_len - self.harmonics).max(self.harmonics + 1)..t_len);
        v
    }

    /// Energy `sum |U_n|^2` over the active band.
    pub fn energy(&self) -> f64 {
        self.active.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        let omega = TAU * t / self.period();
        self.active.iter().map(|&(k, c)| c * Complex64::from_polar(1.0, k * omega)).sum()
    }

    /// `u(t)`, `u'(t)` and `u''(t)` in one pass.
    pub fn eval_with_derivatives(&self, t: f64) -> [Complex64; 3] {
        let base = TAU / self.period();
        let omega = base * t;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for &(k, c) in &self.active {
            let term = c * Complex64::from_polar(1.0, k * omega);
            let w = k * base;
            out[0] += term;
            out[1] += term * Complex64::new(0.0, w);
            out[2] += term * (-w * w);
        }
        out
    }

    /// Term-by-term derivative of order 1 or 2.
    pub fn derivative(&self, t: f64, order: u32) -> Result<Complex64> {
        match order {
            1 => Ok(self.eval_with_derivatives(t)[1]),
            2 => Ok(self.eval_with_derivatives(t)[2]),
            _ => Err(Error::InvalidParameter(format!("derivative order {order} not in {{1, 2}}"))),
        }
    }

    /// Evaluates the series at `samples` parameters spaced `T / samples` apart from 0.
    pub fn reconstruct(&self, samples: usize) -> Vec<(f64, f64)> {
        let step = self.period() / samples as f64;
        (0..samples)
            .map(|k| {
                let z = self.evaluate(k as f64 * step);
                (z.re, z.im)
            })
            .collect()
    }

    pub fn to_json(&self) -> DescriptorJson {
        DescriptorJson {
            t: self.len(),
            h: self.harmonics,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_json(json: &DescriptorJson) -> Result<Self> {
        if json.coeffs.len() != json.t {
            return Err(Error::InvalidParameter("coefficient count does not match T".into()));
        }
        Self::from_coeffs(json.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect(), json.h)
    }
}

/// Debug / golden-file form of a descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorJson {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "H")]
    pub h: usize,
    pub coeffs: Vec<[f64; 2]>,
}

/// Fits a traced contour using pixel-center coordinates.
pub fn fit_fourier(contour: &Contour) -> Result<FourierDescriptor> {
    FourierDescriptor::fit(&contour.points())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn circle(t_len: usize, c: (f64, f64), r: f64) -> Vec<(f64, f64)> {
        (0..t_len)
            .map(|t| {
                let a = TAU * t as f64 / t_len as f64;
                (c.0 + r * a.cos(), c.1 + r * a.sin())
            })
            .collect()
    }

    fn random_contour(rng: &mut ChaCha8Rng, t_len: usize) -> Vec<(f64, f64)> {
        (0..t_len).map(|_| (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0))).collect()
    }

    /// O(T^2) transform with angles evaluated directly.
    fn dft_oracle(points: &[(f64, f64)]) -> Vec<Complex64> {
        let t_len = points.len() as f64;
        (0..points.len())
            .map(|n| {
                points
                    .iter()
                    .enumerate()
                    .map(|(t, &(x, y))| {
                        let a = -TAU * (n as f64) * (t as f64) / t_len;
                        Complex64::new(x, y) * Complex64::new(a.cos(), a.sin())
                    })
                    .sum::<Complex64>()
                    / t_len
            })
            .collect()
    }

    #[test]
    fn constant_contour() {
        let d = FourierDescriptor::fit(&[(3.0, -2.0); 12]).unwrap();
        assert!((d.coeffs()[0] - Complex64::new(3.0, -2.0)).norm() < 1e-12);
        assert!(d.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
        for order in [1, 2] {
            assert!(d.derivative(1.3, order).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn circle_is_single_harmonic() {
        let d = FourierDescriptor::fit(&circle(32, (5.0, 7.0), 3.0)).unwrap();
        assert!((d.coeffs()[0] - Complex64::new(5.0, 7.0)).norm() < 1e-12);
        assert!((d.coeffs()[1] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!(d.coeffs()[2..].iter().all(|c| c.norm() < 1e-12));

        let d1 = d.clone().with_harmonics(1).unwrap();
        for (i, (x, y)) in d1.reconstruct(100).into_iter().enumerate() {
            let a = TAU * i as f64 / 100.0;
            assert!((x - 5.0 - 3.0 * a.cos()).abs() < 1e-12 && (y - 7.0 - 3.0 * a.sin()).abs() < 1e-12);
        }
        let speed = TAU * 3.0 / 32.0;
        for t in [0.0, 0.37, 11.0, 31.9] {
            assert!((d.derivative(t, 1).unwrap().norm() - speed).abs() < 1e-12);
        }
        assert!(d.derivative(0.0, 3).is_err());
    }

    #[test]
    fn matches_brute_force_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = random_contour(&mut rng, 64);
        let d = FourierDescriptor::fit(&pts).unwrap();
        for (a, b) in d.coeffs().iter().zip(dft_oracle(&pts)) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            FourierDescriptor::fit(&[(0.0, 0.0); 7]),
            Err(Error::ContourTooShort { got: 7, need: 8 })
        ));
    }

    #[test]
    fn default_band_limit() {
        assert_eq!(default_harmonics(8), 4);
        assert_eq!(default_harmonics(100), 6);
        assert_eq!(default_harmonics(1000), 63);
        let d = FourierDescriptor::fit(&[(0.0, 0.0); 10]).unwrap();
        assert_eq!(d.harmonics(), 4);
        assert!(d.clone().with_harmonics(6).is_err());
        assert!(d.with_harmonics(0).is_err());
    }

    #[test]
    fn active_band() {
        let d = FourierDescriptor::fit(&[(0.0, 0.0); 10]).unwrap();
        assert_eq!(d.clone().with_harmonics(2).unwrap().active_indices(), vec![0, 1, 2, 8, 9]);
        assert_eq!(d.with_harmonics(5).unwrap().active_indices(), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn full_band_reconstruction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t_len in [8, 9, 33, 64] {
            let pts = random_contour(&mut rng, t_len);
            let d = FourierDescriptor::fit(&pts).unwrap().with_harmonics(t_len / 2).unwrap();
            for (a, b) in d.reconstruct(t_len).iter().zip(&pts) {
                assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn square_band_capped_at_half_length() {
        let pts: Vec<(f64, f64)> = [(1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2)]
            .iter()
            .map(|&(x, y)| (x as f64, y as f64))
            .collect();
        // T = 8 caps the band at 4 = T/2, which already interpolates every point
        let d = FourierDescriptor::fit(&pts).unwrap().with_harmonics(4).unwrap();
        let worst =
            d.reconstruct(8).iter().zip(&pts).map(|(a, b)| (a.0 - b.0).hypot(a.1 - b.1)).fold(0.0, f64::max);
        assert!(worst < 1e-12);
        // between samples the interpolant rounds the corners but stays near the square
        let between = d.reconstruct(64);
        assert!(between.iter().all(|&(x, y)| (0.5..=3.5).contains(&x) && (0.5..=3.5).contains(&y)));
    }

    #[test]
    fn first_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = random_contour(&mut rng, 40);
        let d = FourierDescriptor::fit(&pts).unwrap().with_harmonics(6).unwrap();
        let h = 1e-4;
        for i in 0..40 {
            let t = i as f64 + 0.25;
            let fd = (d.evaluate(t + h) - d.evaluate(t - h)) / (2.0 * h);
            let an = d.derivative(t, 1).unwrap();
            assert!((fd - an).norm() <= 1e-6 * an.norm().max(1.0), "t={t}");
        }
    }

    #[test]
    fn json_roundtrip() {
        let d = FourierDescriptor::fit(&circle(16, (1.0, 2.0), 4.0)).unwrap();
        let s = serde_json::to_string(&d.to_json()).unwrap();
        assert!(s.starts_with("{\"T\":16,\"H\":4,\"coeffs\":[["));
        let back: DescriptorJson = serde_json::from_str(&s).unwrap();
        assert_eq!(FourierDescriptor::from_json(&back).unwrap(), d);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn contour() -> impl Strategy<Value = Vec<(f64, f64)>> {
            prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 8..80)
        }

        proptest! {
            #[test]
            fn parseval(pts in contour()) {
                let d = FourierDescriptor::fit(&pts).unwrap();
                let t_len = pts.len() as f64;
                let lhs: f64 = pts.iter().map(|(x, y)| x * x + y * y).sum::<f64>() / t_len;
                let rhs: f64 = d.coeffs().iter().map(|c| c.norm_sqr()).sum();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
            }

            #[test]
            fn translation_moves_dc_only(pts in contour(), a in -50.0..50.0f64, b in -50.0..50.0f64) {
                let d = FourierDescriptor::fit(&pts).unwrap();
                let moved: Vec<_> = pts.iter().map(|&(x, y)| (x + a, y + b)).collect();
                let e = FourierDescriptor::fit(&moved).unwrap();
                prop_assert!((e.coeffs()[0] - d.coeffs()[0] - Complex64::new(a, b)).norm() < 1e-9);
                for (p, q) in d.coeffs()[1..].iter().zip(&e.coeffs()[1..]) {
                    prop_assert!((p - q).norm() < 1e-9);
                }
            }

            #[test]
            fn rotation_scales_every_coefficient(pts in contour(), phi in -3.2..3.2f64) {
                let rot = Complex64::from_polar(1.0, phi);
                let d = FourierDescriptor::fit(&pts).unwrap();
                let turned: Vec<_> = pts.iter().map(|&(x, y)| {
                    let z = Complex64::new(x, y) * rot;
                    (z.re, z.im)
                }).collect();
                let e = FourierDescriptor::fit(&turned).unwrap();
                for (p, q) in d.coeffs().iter().zip(e.coeffs()) {
                    prop_assert!((p * rot - q).norm() < 1e-9);
                }
            }

            #[test]
            fn energy_shrinks_with_band(pts in contour()) {
                let d = FourierDescriptor::fit(&pts).unwrap();
                let mut last = f64::INFINITY;
                for h in (1..=pts.len() / 2).rev() {
                    let e = d.clone().with_harmonics(h).unwrap().energy();
                    prop_assert!(e <= last);
                    last = e;
                }
            }
        }
    }
}
