use serde::{Deserialize, Serialize};

use crate::raster::BinaryMask;

use super::contours::Chain;

/// Convex polygon in pixel-corner coordinates: pixel `(x, y)` spans the
/// square `[x, x+1] × [y, y+1]`. Vertices are counter-clockwise in the
/// `x`-right, `y`-up sense (positive shoelace sum), without repeats or
/// collinear points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        n >= 3
            && (0..n).all(|i| {
                let (a, b, c) = (
                    self.vertices[i],
                    self.vertices[(i + 1) % n],
                    self.vertices[(i + 2) % n],
                );
                cross(a, b, c) >= 0.0
            })
    }

    /// Point test with a small tolerance, boundary inclusive.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= -1e-9)
    }

    /// True when the whole square of pixel `(x, y)` lies inside.
    pub fn covers_pixel(&self, x: usize, y: usize) -> bool {
        let (x, y) = (x as f64, y as f64);
        [[x, y], [x + 1.0, y], [x, y + 1.0], [x + 1.0, y + 1.0]]
            .into_iter()
            .all(|p| self.contains(p))
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::MAX; 2];
        let mut hi = [f64::MIN; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; collinear points are discarded.
pub fn monotone_chain(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Convex hull of each chain's pixel squares; hulls with area below
/// `min_area_px` are dropped, as are chains whose pixel centers are
/// collinear.
pub fn convex_hulls(chains: &[Chain], min_area_px: f64) -> Vec<Polygon> {
    convex_hulls_with_margin(chains, 0, None, min_area_px)
}

/// As [`convex_hulls`], with every pixel square grown by `margin` pixels on
/// each side and the corners clamped to `[0, W] × [0, H]` when `bounds` is
/// given.
pub fn convex_hulls_with_margin(
    chains: &[Chain],
    margin: usize,
    bounds: Option<(usize, usize)>,
    min_area_px: f64,
) -> Vec<Polygon> {
    let m = margin as f64;
    let clamp = |p: [f64; 2]| match bounds {
        Some((w, h)) => [p[0].clamp(0.0, w as f64), p[1].clamp(0.0, h as f64)],
        None => p,
    };
    chains
        .iter()
        .filter(|chain| {
            let centers: Vec<[f64; 2]> = chain.iter().map(|&(x, y)| [x as f64, y as f64]).collect();
            monotone_chain(&centers).len() >= 3
        })
        .filter_map(|chain| {
            let corners: Vec<[f64; 2]> = chain
                .iter()
                .flat_map(|&(x, y)| {
                    let (x, y) = (x as f64, y as f64);
                    [
                        [x - m, y - m],
                        [x + 1.0 + m, y - m],
                        [x - m, y + 1.0 + m],
                        [x + 1.0 + m, y + 1.0 + m],
                    ]
                })
                .map(clamp)
                .collect();
            let poly = Polygon {
                vertices: monotone_chain(&corners),
            };
            (poly.vertices.len() >= 3 && poly.area() >= min_area_px).then_some(poly)
        })
        .collect()
}

/// Union of the pixels fully covered by any polygon.
pub fn fill_polygons(polygons: &[Polygon], width: usize, height: usize) -> BinaryMask {
    let mut mask = BinaryMask::filled(width, height, false);
    for poly in polygons {
        let (lo, hi) = poly.bounds();
        let x0 = lo[0].floor().max(0.0) as usize;
        let y0 = lo[1].floor().max(0.0) as usize;
        let x1 = (hi[0].ceil().max(0.0) as usize).min(width);
        let y1 = (hi[1].ceil().max(0.0) as usize).min(height);
        for y in y0..y1 {
            for x in x0..x1 {
                if !mask.get(x, y) && poly.covers_pixel(x, y) {
                    mask.set(x, y, true);
                }
            }
        }
    }
    mask
}
