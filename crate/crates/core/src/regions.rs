//! Curve support regions: thresholded LoG response, 8-connected components
//! and outer-boundary tracing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::ResponseMap;

/// Which sign of the filter response forms support regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    #[default]
    Positive,
    Negative,
    /// Positive and negative regions, thresholded and labeled separately.
    Both,
}

impl Polarity {
    /// The single-sign passes this polarity expands to.
    pub fn signs(self) -> &'static [Polarity] {
        match self {
            Polarity::Positive => &[Polarity::Positive],
            Polarity::Negative => &[Polarity::Negative],
            Polarity::Both => &[Polarity::Positive, Polarity::Negative],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
    polarity: Polarity,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidParameter("mask size mismatch".into()));
        }
        Ok(Self { width, height, bits, polarity: Polarity::Positive })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                bits.push(f(col, row));
            }
        }
        Self { width, height, bits, polarity: Polarity::Positive }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Sets the pixels whose response exceeds `tau_frac` times the largest
/// positive response.
pub fn threshold_positive(resp: &ResponseMap, tau_frac: f64) -> Result<BinaryMask> {
    threshold(resp, tau_frac, Polarity::Positive)
}

/// Thresholds one sign of the response; `Polarity::Negative` works on the
/// negated response. `Polarity::Both` is not a single mask and is rejected.
pub fn threshold(resp: &ResponseMap, tau_frac: f64, polarity: Polarity) -> Result<BinaryMask> {
    if !(tau_frac > 0.0 && tau_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold fraction must lie in (0, 1), got {tau_frac}"
        )));
    }
    let sign = match polarity {
        Polarity::Positive => 1.0,
        Polarity::Negative => -1.0,
        Polarity::Both => return Err(Error::InvalidParameter("threshold one polarity at a time".into())),
    };
    let peak = resp.values().iter().map(|v| sign * v).fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::NoSignal(polarity.name()));
    }
    let cut = tau_frac * peak;
    let bits = resp.values().iter().map(|v| sign * v > cut).collect();
    Ok(BinaryMask { width: resp.width(), height: resp.height(), bits, polarity })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub min_row: usize,
    pub max_row: usize,
    pub min_col: usize,
    pub max_col: usize,
}

/// One curve support region.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportRegion {
    pub label: u32,
    /// `(row, col)` in raster order.
    pub pixels: Vec<(usize, usize)>,
    /// Mean `(row, col)` of the pixels.
    pub centroid: (f64, f64),
    pub area: usize,
    pub bbox: BBox,
    pub polarity: Polarity,
}

impl SupportRegion {
    fn from_pixels(pixels: Vec<(usize, usize)>, polarity: Polarity) -> Self {
        let n = pixels.len() as f64;
        let (mut sr, mut sc) = (0.0, 0.0);
        let mut bbox = BBox { min_row: usize::MAX, max_row: 0, min_col: usize::MAX, max_col: 0 };
        for &(r, c) in &pixels {
            sr += r as f64;
            sc += c as f64;
            bbox.min_row = bbox.min_row.min(r);
            bbox.max_row = bbox.max_row.max(r);
            bbox.min_col = bbox.min_col.min(c);
            bbox.max_col = bbox.max_col.max(c);
        }
        Self { label: 0, area: pixels.len(), pixels, centroid: (sr / n, sc / n), bbox, polarity }
    }

    /// Centroid as an image point `(x, y)` at pixel-center convention.
    pub fn centroid_xy(&self) -> (f64, f64) {
        (self.centroid.1 + 0.5, self.centroid.0 + 0.5)
    }

    fn sort_key(&self) -> (std::cmp::Reverse<usize>, usize, usize, (usize, usize)) {
        (std::cmp::Reverse(self.area), self.bbox.min_row, self.bbox.min_col, self.pixels[0])
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 is the background label
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let root = ra.min(rb);
        self.parent[ra.max(rb) as usize] = root;
        root
    }
}

/// Two-pass 8-connected labeling. Regions smaller than `min_area` are
/// dropped; labels run from 1 in order of descending area, ties broken by
/// the bounding box's top row, then its left column, then the first pixel.
pub fn label_components(mask: &BinaryMask, min_area: usize) -> Vec<SupportRegion> {
    let (w, h) = (mask.width, mask.height);
    let mut labels = vec![0u32; w * h];
    let mut sets = DisjointSet::new();
    for row in 0..h {
        for col in 0..w {
            if !mask.get(col, row) {
                continue;
            }
            // already-visited neighbors: W, NW, N, NE
            let mut current = 0u32;
            let visit = |l: u32, current: &mut u32, sets: &mut DisjointSet| {
                if l != 0 {
                    *current = if *current == 0 { sets.find(l) } else { sets.union(*current, l) };
                }
            };
            if col > 0 {
                visit(labels[row * w + col - 1], &mut current, &mut sets);
            }
            if row > 0 {
                let up = (row - 1) * w;
                if col > 0 {
                    visit(labels[up + col - 1], &mut current, &mut sets);
                }
                visit(labels[up + col], &mut current, &mut sets);
                if col + 1 < w {
                    visit(labels[up + col + 1], &mut current, &mut sets);
                }
            }
            labels[row * w + col] = if current == 0 { sets.make() } else { current };
        }
    }

    let mut slot = vec![usize::MAX; sets.parent.len()];
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    for row in 0..h {
        for col in 0..w {
            let l = labels[row * w + col];
            if l == 0 {
                continue;
            }
            let root = sets.find(l) as usize;
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push((row, col));
        }
    }
    let regions = groups
        .into_iter()
        .filter(|g| g.len() >= min_area.max(1))
        .map(|g| SupportRegion::from_pixels(g, mask.polarity))
        .collect();
    relabel(regions)
}

/// Orders regions (possibly gathered from several masks) and assigns labels 1..
pub fn relabel(mut regions: Vec<SupportRegion>) -> Vec<SupportRegion> {
    regions.sort_by_key(|r| r.sort_key());
    for (i, r) in regions.iter_mut().enumerate() {
        r.label = i as u32 + 1;
    }
    regions
}

/// Closed outer boundary of a region, as pixel `(col, row)` positions.
///
/// Consecutive points are 8-neighbors and the last point is followed by the
/// first. Traversal runs with the region on the left in raw `(x, y)`
/// coordinates (y down), i.e. positive shoelace area, clockwise on screen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub pixels: Vec<(usize, usize)>,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Pixel-center positions `(col + 0.5, row + 0.5)`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.pixels.iter().map(|&(c, r)| (c as f64 + 0.5, r as f64 + 0.5)).collect()
    }

    /// Twice the signed area enclosed by the pixel-center polygon.
    pub fn doubled_area(&self) -> f64 {
        let p = self.points();
        (0..p.len())
            .map(|i| {
                let (a, b) = (p[i], p[(i + 1) % p.len()]);
                a.0 * b.1 - b.0 * a.1
            })
            .sum()
    }
}

/// Clockwise-on-screen Moore neighborhood, starting west.
const MOORE: [(isize, isize); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn moore_index(d: (isize, isize)) -> usize {
    MOORE.iter().position(|&m| m == d).expect("not an 8-neighbor offset")
}

/// Moore-neighbor tracing with Jacob's stopping criterion, starting from the
/// region's first pixel in raster order. Holes are not traced.
pub fn trace_boundary(region: &SupportRegion) -> Result<Contour> {
    let unusable = |reason: &str| Error::UnusableRegion { label: region.label, reason: reason.into() };
    if region.pixels.is_empty() {
        return Err(unusable("empty region"));
    }
    // local grid with a one-pixel background frame
    let b = region.bbox;
    let (gw, gh) = (b.max_col - b.min_col + 3, b.max_row - b.min_row + 3);
    let mut grid = vec![false; gw * gh];
    for &(r, c) in &region.pixels {
        grid[(r - b.min_row + 1) * gw + (c - b.min_col + 1)] = true;
    }
    let inside = |x: isize, y: isize| grid[y as usize * gw + x as usize];

    let (r0, c0) = region.pixels[0];
    let start = ((c0 - b.min_col + 1) as isize, (r0 - b.min_row + 1) as isize);

    // from pixel p with backtrack direction k, find the next boundary pixel and its backtrack
    let step = |p: (isize, isize), back: usize| -> Option<((isize, isize), usize)> {
        for i in 1..=8 {
            let k = (back + i) % 8;
            let q = (p.0 + MOORE[k].0, p.1 + MOORE[k].1);
            if inside(q.0, q.1) {
                let prev = (back + i - 1) % 8;
                let bpos = (p.0 + MOORE[prev].0, p.1 + MOORE[prev].1);
                return Some((q, moore_index((bpos.0 - q.0, bpos.1 - q.1))));
            }
        }
        None
    };

    let first = step(start, 0).ok_or_else(|| unusable("isolated pixel"))?;
    let mut path = vec![start];
    let mut state = first;
    let limit = 8 * region.area + 16;
    loop {
        let (p, back) = state;
        let next = step(p, back).expect("traced pixel lost its neighbors");
        if p == start && next == first {
            break;
        }
        path.push(p);
        state = next;
        if path.len() > limit {
            return Err(unusable("boundary trace did not close"));
        }
    }
    if path.len() < 4 {
        return Err(unusable("boundary shorter than 4 points"));
    }
    let pixels =
        path.into_iter().map(|(x, y)| ((x - 1) as usize + b.min_col, (y - 1) as usize + b.min_row)).collect();
    Ok(Contour { pixels })
}
