use std::collections::BTreeSet;

use curveseg::regions::{label_components, trace_boundary, BinaryMask, Contour, Polarity, SupportRegion};
use proptest::prelude::*;

fn mask(w: usize, h: usize) -> impl Strategy<Value = BinaryMask> {
    (prop::collection::vec(any::<bool>(), w * h), 0u8..4).prop_map(move |(bits, thin)| {
        // thinning varies density without biasing toward any pattern
        let bits = bits.iter().enumerate().map(|(i, &b)| b && (i % 4) as u8 >= thin).collect();
        BinaryMask::new(w, h, bits).unwrap()
    })
}

/// Recursive flood fill, one sorted pixel list per 8-connected component.
fn oracle(m: &BinaryMask) -> BTreeSet<Vec<(usize, usize)>> {
    fn fill(m: &BinaryMask, seen: &mut [bool], r: isize, c: isize, out: &mut Vec<(usize, usize)>) {
        let (w, h) = (m.width() as isize, m.height() as isize);
        if r < 0 || c < 0 || r >= h || c >= w {
            return;
        }
        let i = (r * w + c) as usize;
        if seen[i] || !m.bits()[i] {
            return;
        }
        seen[i] = true;
        out.push((r as usize, c as usize));
        for dr in -1..=1 {
            for dc in -1..=1 {
                fill(m, seen, r + dr, c + dc, out);
            }
        }
    }
    let mut seen = vec![false; m.bits().len()];
    let mut comps = BTreeSet::new();
    for r in 0..m.height() {
        for c in 0..m.width() {
            let mut out = Vec::new();
            fill(m, &mut seen, r as isize, c as isize, &mut out);
            if !out.is_empty() {
                out.sort_unstable();
                comps.insert(out);
            }
        }
    }
    comps
}

fn region_mask(region: &SupportRegion, w: usize, h: usize) -> BinaryMask {
    let set: BTreeSet<_> = region.pixels.iter().copied().collect();
    BinaryMask::from_fn(w, h, |c, r| set.contains(&(r, c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn labeling_matches_flood_fill(m in mask(32, 32)) {
        let ours: BTreeSet<Vec<(usize, usize)>> = label_components(&m, 1)
            .into_iter()
            .map(|r| { let mut p = r.pixels; p.sort_unstable(); p })
            .collect();
        prop_assert_eq!(ours, oracle(&m));
    }

    #[test]
    fn regions_partition_kept_pixels(m in mask(20, 16), min_area in 1usize..6) {
        let regions = label_components(&m, min_area);
        let mut seen = BTreeSet::new();
        for (i, r) in regions.iter().enumerate() {
            prop_assert_eq!(r.label as usize, i + 1);
            prop_assert!(r.area >= min_area);
            for &(row, col) in &r.pixels {
                prop_assert!(m.get(col, row));
                prop_assert!(seen.insert((row, col)));
            }
            // centroid by direct summation, same order of operations
            let n = r.pixels.len() as f64;
            let sr: f64 = r.pixels.iter().map(|p| p.0 as f64).sum();
            let sc: f64 = r.pixels.iter().map(|p| p.1 as f64).sum();
            prop_assert_eq!(r.centroid, (sr / n, sc / n));
        }
        for pair in regions.windows(2) {
            prop_assert!(pair[0].area >= pair[1].area);
        }
    }

    #[test]
    fn contours_are_closed_eight_connected_and_on_the_border(m in mask(18, 14)) {
        for region in label_components(&m, 2) {
            let Ok(contour) = trace_boundary(&region) else { continue };
            let own = region_mask(&region, 18, 14);
            let n = contour.len();
            for i in 0..n {
                let (a, b) = (contour.pixels[i], contour.pixels[(i + 1) % n]);
                prop_assert!(a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1 && a != b);
                prop_assert!(own.get(a.0, a.1));
            }
        }
    }

    #[test]
    fn mirroring_reverses_orientation(m in mask(16, 12)) {
        let mirrored = BinaryMask::from_fn(16, 12, |c, r| m.get(15 - c, r));
        let a = label_components(&m, 3);
        let b = label_components(&mirrored, 3);
        for region in &a {
            let Ok(ca) = trace_boundary(region) else { continue };
            let mut flipped: Vec<(usize, usize)> = region.pixels.iter().map(|&(r, c)| (r, 15 - c)).collect();
            flipped.sort_unstable();
            let twin = b.iter().find(|r| { let mut p = r.pixels.clone(); p.sort_unstable(); p == flipped }).unwrap();
            let cb = trace_boundary(twin).unwrap();
            // mapped back through the mirror, the twin's walk runs the other way
            let back = Contour { pixels: cb.pixels.iter().map(|&(c, r)| (15 - c, r)).collect() };
            prop_assert!(ca.doubled_area() >= 0.0);
            prop_assert_eq!(back.doubled_area(), -ca.doubled_area());
            // the mirrored walk, read backwards, covers the same pixels
            let fa: BTreeSet<_> = ca.pixels.iter().map(|&(c, r)| (15 - c, r)).collect();
            let fb: BTreeSet<_> = cb.pixels.iter().copied().collect();
            prop_assert_eq!(fa, fb);
        }
    }
}

/// Hole-free blobs: every pixel with a 4-neighbor outside the region is on the contour.
#[test]
fn contour_visits_every_border_pixel_of_solid_blobs() {
    for (w, h) in [(5usize, 3usize), (9, 9), (12, 4)] {
        let disk = BinaryMask::from_fn(w + 4, h + 4, |c, r| {
            let (x, y) = (c as f64 - (w as f64 + 3.0) / 2.0, r as f64 - (h as f64 + 3.0) / 2.0);
            (x / (w as f64 / 2.0)).powi(2) + (y / (h as f64 / 2.0)).powi(2) <= 1.0
        });
        let regions = label_components(&disk, 1);
        assert_eq!(regions.len(), 1);
        let contour = trace_boundary(&regions[0]).unwrap();
        let on: BTreeSet<_> = contour.pixels.iter().copied().collect();
        for &(r, c) in &regions[0].pixels {
            let border = [(0isize, 1isize), (0, -1), (1, 0), (-1, 0)].iter().any(|&(dr, dc)| {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                nr < 0 || nc < 0 || !disk.get(nc as usize, nr as usize)
            });
            if border {
                assert!(on.contains(&(c, r)), "({c}, {r}) missing");
            }
        }
        assert_eq!(regions[0].polarity, Polarity::Positive);
    }
}
