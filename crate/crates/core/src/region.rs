//! Planar regions: polygonal regions with holes and several components,
//! pixel sets on a grid, and the interval-union slices cut out by lines.

use crate::convex_body::SymmetricBody;
use crate::error::{geometry, param, Error, Result};
use crate::frac1d::IntervalUnion;
use crate::geom::{first_moment, signed_area, Vec2};
use serde::{Deserialize, Serialize};

/// Minimum admissible edge length.
pub const EDGE_EPS: f64 = 1e-12;

/// A region bounded by finitely many simple, pairwise non-crossing loops.
///
/// Loops are stored in canonical orientation: material on the left, so
/// outer boundaries run counterclockwise and holes clockwise. Membership is
/// even-odd, which makes the orientation a function of nesting depth.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonRegion {
    loops: Vec<Vec<Vec2>>,
    diameter: f64,
}

impl PolygonRegion {
    pub fn new(loops: Vec<Vec<Vec2>>) -> Result<Self> {
        let mut cleaned: Vec<Vec<Vec2>> = Vec::with_capacity(loops.len());
        for lp in loops {
            if lp.iter().any(|p| !p.is_finite()) {
                return Err(geometry("non-finite vertex"));
            }
            let mut v: Vec<Vec2> = Vec::with_capacity(lp.len());
            for p in lp {
                if v.last().is_none_or(|q: &Vec2| (*q - p).norm() > EDGE_EPS) {
                    v.push(p);
                }
            }
            while v.len() > 1 && (v[0] - *v.last().unwrap()).norm() <= EDGE_EPS {
                v.pop();
            }
            if v.len() < 3 {
                return Err(geometry("loop with fewer than three distinct vertices"));
            }
            if signed_area(&v).abs() <= 0.0 {
                return Err(geometry("loop with zero area"));
            }
            cleaned.push(v);
        }
        if cleaned.is_empty() {
            return Err(geometry("region without loops"));
        }
        check_simple(&cleaned)?;
        // Orientation from nesting depth.
        let probes: Vec<Vec2> = cleaned.iter().map(|l| (l[0] + l[1]) * 0.5).collect();
        for (k, probe) in probes.iter().enumerate() {
            let depth = cleaned
                .iter()
                .enumerate()
                .filter(|&(j, l)| j != k && crossing_parity(l, *probe))
                .count();
            let want_ccw = depth % 2 == 0;
            if (signed_area(&cleaned[k]) > 0.0) != want_ccw {
                cleaned[k].reverse();
            }
        }
        let total: f64 = cleaned.iter().map(|l| signed_area(l)).sum();
        if total <= 0.0 {
            return Err(geometry("region has non-positive area"));
        }
        let all: Vec<Vec2> = cleaned.iter().flatten().copied().collect();
        let mut diameter: f64 = 0.0;
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                diameter = diameter.max((all[i] - all[j]).norm());
            }
        }
        Ok(Self {
            loops: cleaned,
            diameter,
        })
    }

    /// Single simple loop.
    pub fn simple(vertices: Vec<Vec2>) -> Result<Self> {
        Self::new(vec![vertices])
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::simple(vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    /// The region occupied by a polygonal body.
    pub fn from_body(k: &SymmetricBody) -> Result<Self> {
        match k.polygon_vertices() {
            Some(v) => Self::simple(v.to_vec()),
            None => Err(Error::UnsupportedVariant(
                "ball has no polygonal region; use a regular polygon",
            )),
        }
    }

    pub fn loops(&self) -> &[Vec<Vec2>] {
        &self.loops
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.loops.iter().flatten().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.loops.iter().map(Vec::len).sum()
    }

    /// Directed boundary edges with material on the left.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        self.loops
            .iter()
            .flat_map(|l| (0..l.len()).map(move |i| (l[i], l[(i + 1) % l.len()])))
    }

    pub fn area(&self) -> f64 {
        self.loops.iter().map(|l| signed_area(l)).sum()
    }

    /// Euclidean perimeter.
    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(p, q)| (q - p).norm()).sum()
    }

    pub fn centroid(&self) -> Vec2 {
        let m = self.loops.iter().fold(Vec2::ZERO, |acc, l| acc + first_moment(l));
        m / self.area()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `(min, max)` corners of the bounding box.
    pub fn bbox(&self) -> (Vec2, Vec2) {
        self.vertices().fold(
            (
                Vec2::new(f64::INFINITY, f64::INFINITY),
                Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            ),
            |(lo, hi), p| {
                (
                    Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
                    Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
                )
            },
        )
    }

    /// Even-odd membership.
    pub fn contains(&self, p: Vec2) -> bool {
        self.loops.iter().filter(|l| crossing_parity(l, p)).count() % 2 == 1
    }

    /// Euclidean distance from `p` to the boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    fn map_vertices(&self, f: impl Fn(Vec2) -> Vec2) -> Result<Self> {
        Self::new(self.loops.iter().map(|l| l.iter().map(|&p| f(p)).collect()).collect())
    }

    pub fn translated(&self, t: Vec2) -> Self {
        self.map_vertices(|p| p + t).expect("translation preserves validity")
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0);
        self.map_vertices(|p| p * lambda).expect("scaling preserves validity")
    }

    /// Image under the linear map `[[a, b], [c, d]]`.
    pub fn linear_image(&self, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if (a * d - b * c).abs() < 1e-15 {
            return Err(param("singular linear map"));
        }
        self.map_vertices(|p| Vec2::new(a * p.x + b * p.y, c * p.x + d * p.y))
    }

    /// Point reflection through the origin.
    pub fn reflected(&self) -> Self {
        self.map_vertices(|p| -p).expect("reflection preserves validity")
    }

    /// `P(E, L) = Σ_edges |e| · h_L(ν_e)`.
    pub fn anisotropic_perimeter(&self, l: &SymmetricBody) -> f64 {
        self.edges()
            .map(|(p, q)| {
                let d = q - p;
                let len = d.norm();
                len * l.support(Vec2::new(d.y, -d.x) / len)
            })
            .sum()
    }

    /// `P(E, L)` with an explicit support function, e.g. an exact moment body.
    pub fn perimeter_with_support(&self, support: impl Fn(Vec2) -> f64) -> f64 {
        self.edges()
            .map(|(p, q)| {
                let d = q - p;
                let len = d.norm();
                len * support(Vec2::new(d.y, -d.x) / len)
            })
            .sum()
    }

    /// Slice by a line; see [`LineSlice`].
    pub fn line_intersection(&self, line: &Line) -> LineSlice {
        let n = line.normal();
        let scale = self.diameter.max(1.0);
        let grazes = |y: f64| self.vertices().any(|p| (n.dot(p) - y).abs() <= 1e-12 * scale);
        let mut y = line.offset;
        let mut perturbed = false;
        let mut k = 1.0;
        while grazes(y) {
            y = line.offset + k * 1e-9 * scale;
            k += 1.0;
            perturbed = true;
        }
        let mut ts: Vec<f64> = Vec::new();
        for (p, q) in self.edges() {
            let dp = n.dot(p) - y;
            let dq = n.dot(q) - y;
            if (dp < 0.0) != (dq < 0.0) {
                ts.push(line.direction.dot(p) + line.direction.dot(q - p) * (dp / (dp - dq)));
            }
        }
        ts.sort_by(f64::total_cmp);
        let pairs: Vec<(f64, f64)> = ts
            .chunks_exact(2)
            .filter(|c| c[1] > c[0])
            .map(|c| (c[0], c[1]))
            .collect();
        LineSlice {
            intervals: IntervalUnion::new(pairs).expect("slice intervals are ordered"),
            offset: y,
            perturbed,
        }
    }

    /// Parameter intervals of `{x + r u : r > 0}` lying outside the region.
    /// The last interval is unbounded.
    pub fn ray_complement_segments(&self, x: Vec2, u: Vec2) -> Result<Vec<(f64, f64)>> {
        if !self.contains(x) || self.boundary_distance(x) <= 1e-12 {
            return Err(Error::Precondition(
                "ray origin must lie strictly inside the region".into(),
            ));
        }
        let mut rs = Vec::new();
        ray_crossings(self.edges(), x, u, &mut rs);
        Ok(complement_from_crossings(&rs))
    }

    /// Both sides of `∫_{∂E} |u·ν| dH¹ = ∫_{E|u^⊥} card(∂E ∩ (y + ℝu)) dy`.
    ///
    /// The right side is integrated exactly: between consecutive vertex
    /// projections the crossing count is constant.
    pub fn directional_variation(&self, u: Vec2) -> (f64, f64) {
        let lhs: f64 = self
            .edges()
            .map(|(p, q)| {
                let d = q - p;
                (u.dot(Vec2::new(d.y, -d.x))).abs()
            })
            .sum();
        let n = u.perp();
        let mut events: Vec<f64> = self.vertices().map(|p| n.dot(p)).collect();
        events.sort_by(f64::total_cmp);
        events.dedup();
        let spans: Vec<(f64, f64)> = self
            .edges()
            .map(|(p, q)| {
                let (a, b) = (n.dot(p), n.dot(q));
                (a.min(b), a.max(b))
            })
            .collect();
        let mut rhs = 0.0;
        for w in events.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let count = spans.iter().filter(|(lo, hi)| *lo < mid && mid < *hi).count();
            rhs += count as f64 * (w[1] - w[0]);
        }
        (lhs, rhs)
    }
}

/// Crossing distances `r > 0` of the ray `x + r u` with the given edges.
/// Uses the half-open rule on the side of the ray's supporting line, so a ray
/// through a vertex is counted consistently.
pub(crate) fn ray_crossings(edges: impl Iterator<Item = (Vec2, Vec2)>, x: Vec2, u: Vec2, out: &mut Vec<f64>) {
    out.clear();
    for (p, q) in edges {
        let sp = u.cross(p - x);
        let sq = u.cross(q - x);
        if (sp > 0.0) != (sq > 0.0) {
            let w = sp / (sp - sq);
            let hit = p + (q - p) * w;
            let r = u.dot(hit - x);
            if r > 0.0 {
                out.push(r);
            }
        }
    }
    out.sort_by(f64::total_cmp);
}

/// Turn the sorted crossings of a ray starting inside the region into
/// complement segments `(a_k, b_k)`, the last with `b = ∞`.
pub(crate) fn complement_from_crossings(rs: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(rs.len() / 2 + 1);
    let mut k = 0;
    while k < rs.len() {
        let a = rs[k];
        let b = rs.get(k + 1).copied().unwrap_or(f64::INFINITY);
        out.push((a, b));
        k += 2;
    }
    out
}

fn crossing_parity(lp: &[Vec2], p: Vec2) -> bool {
    let n = lp.len();
    let mut inside = false;
    for i in 0..n {
        let a = lp[i];
        let b = lp[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// Rejects proper crossings and collinear overlaps between edges. Touching
/// at shared vertices is allowed (pixel traces produce it).
fn check_simple(loops: &[Vec<Vec2>]) -> Result<()> {
    let edges: Vec<(Vec2, Vec2)> = loops
        .iter()
        .flat_map(|l| (0..l.len()).map(move |i| (l[i], l[(i + 1) % l.len()])))
        .collect();
    for i in 0..edges.len() {
        let (a, b) = edges[i];
        let scale = (b - a).norm();
        for &(c, d) in &edges[i + 1..] {
            let o1 = orient(a, b, c);
            let o2 = orient(a, b, d);
            let o3 = orient(c, d, a);
            let o4 = orient(c, d, b);
            let tol = 1e-14 * scale * scale.max((d - c).norm());
            if o1.abs() > tol && o2.abs() > tol && o3.abs() > tol && o4.abs() > tol {
                if (o1 > 0.0) != (o2 > 0.0) && (o3 > 0.0) != (o4 > 0.0) {
                    return Err(geometry("boundary edges cross"));
                }
            } else if o1.abs() <= tol && o2.abs() <= tol {
                // Collinear: overlapping in more than a point is invalid.
                let dir = (b - a) / scale;
                let (t0, t1) = (0.0, scale);
                let (mut s0, mut s1) = (dir.dot(c - a), dir.dot(d - a));
                if s0 > s1 {
                    std::mem::swap(&mut s0, &mut s1);
                }
                if s0.max(t0) < s1.min(t1) - EDGE_EPS {
                    return Err(geometry("boundary edges overlap"));
                }
            }
        }
    }
    Ok(())
}

/// A line `{y n + t u : t ∈ ℝ}` with unit direction `u` and `n = u^⊥`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub direction: Vec2,
    pub offset: f64,
}

impl Line {
    pub fn new(direction: Vec2, offset: f64) -> Result<Self> {
        if (direction.norm() - 1.0).abs() > 1e-12 {
            return Err(param("line direction must be a unit vector"));
        }
        Ok(Self { direction, offset })
    }

    /// The unit normal `u^⊥` along which the offset is measured.
    pub fn normal(&self) -> Vec2 {
        self.direction.perp()
    }
}

/// Intersection of a region with a line, parametrized along the line.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSlice {
    pub intervals: IntervalUnion,
    /// Offset actually used.
    pub offset: f64,
    /// Whether the offset was nudged off a vertex.
    pub perturbed: bool,
}

/// A set of closed grid cells. Cell `(i, j)` is
/// `origin + h·([i, i+1] × [j, j+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelSet {
    origin: Vec2,
    h: f64,
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
}

impl PixelSet {
    pub fn new(origin: Vec2, h: f64, nx: usize, ny: usize, mask: Vec<bool>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(geometry("cell size must be positive"));
        }
        if nx == 0 || ny == 0 || mask.len() != nx * ny {
            return Err(geometry("pixel grid dimensions do not match the mask"));
        }
        if !mask.iter().any(|&b| b) {
            return Err(geometry("pixel set has no cells"));
        }
        Ok(Self {
            origin,
            h,
            nx,
            ny,
            mask,
        })
    }

    /// Build from rows of `'0'`/`'1'`, listed top row first.
    pub fn from_rows(origin: Vec2, h: f64, rows: &[String]) -> Result<Self> {
        let ny = rows.len();
        let nx = rows.first().map_or(0, |r| r.len());
        let mut mask = vec![false; nx * ny];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != nx {
                return Err(geometry("pixel rows have different lengths"));
            }
            let j = ny - 1 - r;
            for (i, ch) in row.chars().enumerate() {
                mask[j * nx + i] = match ch {
                    '1' => true,
                    '0' => false,
                    _ => return Err(geometry("pixel rows may only contain '0' and '1'")),
                };
            }
        }
        Self::new(origin, h, nx, ny, mask)
    }

    pub fn to_rows(&self) -> Vec<String> {
        (0..self.ny)
            .rev()
            .map(|j| (0..self.nx).map(|i| if self.get(i, j) { '1' } else { '0' }).collect())
            .collect()
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.nx + i]
    }

    /// Raw toggle; may produce an empty set, which callers must prevent.
    pub(crate) fn toggle(&mut self, i: usize, j: usize) {
        let k = j * self.nx + i;
        self.mask[k] = !self.mask[k];
    }

    /// Flip one cell, refusing to empty the set.
    pub fn flip(&mut self, i: usize, j: usize) -> Result<()> {
        if self.get(i, j) && self.count() == 1 {
            return Err(param("flip would leave the pixel set empty"));
        }
        self.toggle(i, j);
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Occupied cells in row-major order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn area(&self) -> f64 {
        self.h * self.h * self.count() as f64
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 + 0.5, j as f64 + 0.5) * self.h
    }

    pub fn centroid(&self) -> Vec2 {
        let cells = self.cells();
        let sum = cells
            .iter()
            .fold(Vec2::ZERO, |acc, &(i, j)| acc + self.cell_center(i, j));
        sum / cells.len() as f64
    }

    /// Trace the boundary of the cell complex into loops.
    ///
    /// At a vertex shared by two diagonal cells the trace turns left, so
    /// diagonal neighbours become separate loops touching at a point.
    pub fn to_polygon(&self) -> PolygonRegion {
        // Directions: 0 = +x, 1 = +y, 2 = −x, 3 = −y.
        const STEP: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
        let w = self.nx as i64 + 1;
        let filled = |i: i64, j: i64| {
            i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny && self.get(i as usize, j as usize)
        };
        let mut edges: Vec<((i64, i64), usize)> = Vec::new();
        for (i, j) in self.cells() {
            let (i, j) = (i as i64, j as i64);
            if !filled(i, j - 1) {
                edges.push(((i, j), 0));
            }
            if !filled(i + 1, j) {
                edges.push(((i + 1, j), 1));
            }
            if !filled(i, j + 1) {
                edges.push(((i + 1, j + 1), 2));
            }
            if !filled(i - 1, j) {
                edges.push(((i, j + 1), 3));
            }
        }
        let mut out_of: std::collections::HashMap<i64, Vec<usize>> = std::collections::HashMap::new();
        for (k, &((x, y), _)) in edges.iter().enumerate() {
            out_of.entry(y * w + x).or_default().push(k);
        }
        let mut used = vec![false; edges.len()];
        let mut loops = Vec::new();
        for start in 0..edges.len() {
            if used[start] {
                continue;
            }
            let mut lp: Vec<(i64, i64)> = Vec::new();
            let mut cur = start;
            loop {
                used[cur] = true;
                let ((x, y), d) = edges[cur];
                lp.push((x, y));
                let nx = x + STEP[d].0;
                let ny = y + STEP[d].1;
                let cands = &out_of[&(ny * w + nx)];
                let next = [(d + 1) % 4, d, (d + 3) % 4]
                    .iter()
                    .find_map(|&want| cands.iter().copied().find(|&c| !used[c] && edges[c].1 == want));
                match next {
                    Some(n) => cur = n,
                    None => break,
                }
            }
            // Drop collinear vertices.
            let m = lp.len();
            let simplified: Vec<Vec2> = (0..m)
                .filter(|&k| {
                    let a = lp[(k + m - 1) % m];
                    let b = lp[k];
                    let c = lp[(k + 1) % m];
                    (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0) != 0
                })
                .map(|k| self.origin + Vec2::new(lp[k].0 as f64, lp[k].1 as f64) * self.h)
                .collect();
            loops.push(simplified);
        }
        PolygonRegion::new(loops).expect("traced pixel boundary is a valid region")
    }
}

/// Any region accepted by the library.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionRepr", into = "RegionRepr")]
pub enum Region {
    Intervals(IntervalUnion),
    Polygon(PolygonRegion),
    Pixels(PixelSet),
}

impl Region {
    pub fn area(&self) -> f64 {
        match self {
            Region::Intervals(u) => u.measure(),
            Region::Polygon(p) => p.area(),
            Region::Pixels(p) => p.area(),
        }
    }

    /// Planar regions as polygons (pixel sets are traced).
    pub fn to_polygon(&self) -> Result<PolygonRegion> {
        match self {
            Region::Polygon(p) => Ok(p.clone()),
            Region::Pixels(p) => Ok(p.to_polygon()),
            Region::Intervals(_) => Err(param("an interval union is not a planar region")),
        }
    }
}

/// JSON form of a region.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RegionRepr {
    Intervals { items: Vec<(f64, f64)> },
    Polygon { loops: Vec<Vec<Vec2>> },
    Pixels { origin: Vec2, h: f64, rows: Vec<String> },
}

impl TryFrom<RegionRepr> for Region {
    type Error = Error;
    fn try_from(r: RegionRepr) -> Result<Self> {
        Ok(match r {
            RegionRepr::Intervals { items } => Region::Intervals(IntervalUnion::new(items)?),
            RegionRepr::Polygon { loops } => Region::Polygon(PolygonRegion::new(loops)?),
            RegionRepr::Pixels { origin, h, rows } => Region::Pixels(PixelSet::from_rows(origin, h, &rows)?),
        })
    }
}

impl From<Region> for RegionRepr {
    fn from(r: Region) -> Self {
        match r {
            Region::Intervals(u) => RegionRepr::Intervals { items: u.into() },
            Region::Polygon(p) => RegionRepr::Polygon { loops: p.loops },
            Region::Pixels(p) => RegionRepr::Pixels {
                origin: p.origin,
                h: p.h,
                rows: p.to_rows(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn square() -> PolygonRegion {
        PolygonRegion::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap()
    }

    fn square_with_hole() -> PolygonRegion {
        PolygonRegion::new(vec![
            square().loops()[0].clone(),
            PolygonRegion::rectangle(-0.5, -0.5, 0.5, 0.5).unwrap().loops()[0].clone(),
        ])
        .unwrap()
    }

    #[test]
    fn areas() {
        assert_eq!(square().area(), 4.0);
        assert_eq!(square_with_hole().area(), 3.0);
        let px = PixelSet::from_rows(Vec2::ZERO, 0.5, &["111".into(), "111".into(), "111".into()]).unwrap();
        assert_eq!(px.area(), 2.25);
    }

    #[test]
    fn hole_orientation_is_canonical() {
        let r = square_with_hole();
        assert!(signed_area(&r.loops()[0]) > 0.0);
        assert!(signed_area(&r.loops()[1]) < 0.0);
        assert!(!r.contains(Vec2::ZERO));
        assert!(r.contains(Vec2::new(0.75, 0.0)));
    }

    #[test]
    fn anisotropic_perimeter_examples() {
        let sq = square();
        assert!((sq.anisotropic_perimeter(&SymmetricBody::square(1.0)) - 8.0).abs() < 1e-14);
        assert!((sq.anisotropic_perimeter(&SymmetricBody::ball(1.0).unwrap()) - 8.0).abs() < 1e-14);
        assert!((sq.anisotropic_perimeter(&SymmetricBody::ball(2.0).unwrap()) - 16.0).abs() < 1e-14);
    }

    #[test]
    fn line_intersection_examples() {
        let e1 = Vec2::new(1.0, 0.0);
        let s = square().line_intersection(&Line::new(e1, 0.0).unwrap());
        assert_eq!(s.intervals.len(), 1);
        assert!((s.intervals.measure() - 2.0).abs() < 1e-14);
        assert!(!s.perturbed);
        let h = square_with_hole().line_intersection(&Line::new(e1, 0.0).unwrap());
        assert_eq!(h.intervals.len(), 2);
        for &(a, b) in h.intervals.intervals() {
            assert!((b - a - 0.5).abs() < 1e-14);
        }
        let far = square().line_intersection(&Line::new(e1, 2.0).unwrap());
        assert!(far.intervals.is_empty());
    }

    #[test]
    fn grazing_line_is_perturbed() {
        let s = square().line_intersection(&Line::new(Vec2::new(1.0, 0.0), 1.0).unwrap());
        assert!(s.perturbed);
        assert!(s.intervals.measure() <= 2.0);
        let d = square().line_intersection(&Line::new(Vec2::new(1.0, 1.0) / SQRT_2, 0.0).unwrap());
        assert!(d.perturbed);
        assert!((d.intervals.measure() - 2.0 * SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn ray_examples() {
        let sq = square();
        let segs = sq.ray_complement_segments(Vec2::ZERO, Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(segs.len(), 1);
        assert!((segs[0].0 - 1.0).abs() < 1e-15 && segs[0].1.is_infinite());
        let diag = sq
            .ray_complement_segments(Vec2::ZERO, Vec2::new(1.0, 1.0) / SQRT_2)
            .unwrap();
        assert!((diag[0].0 - SQRT_2).abs() < 1e-12 && diag[0].1.is_infinite());
        let h = square_with_hole();
        let segs = h
            .ray_complement_segments(Vec2::new(-0.75, 0.0), Vec2::new(1.0, 0.0))
            .unwrap();
        assert_eq!(segs.len(), 2);
        assert!((segs[0].0 - 0.25).abs() < 1e-14 && (segs[0].1 - 1.25).abs() < 1e-14);
        assert!((segs[1].0 - 1.75).abs() < 1e-14 && segs[1].1.is_infinite());
        assert!(matches!(
            sq.ray_complement_segments(Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn directional_variation_examples() {
        let (l, r) = square().directional_variation(Vec2::new(1.0, 0.0));
        assert!((l - 4.0).abs() < 1e-14 && (r - 4.0).abs() < 1e-14);
        let (l, r) = square().directional_variation(Vec2::new(1.0, 1.0) / SQRT_2);
        assert!((l - 4.0 * SQRT_2).abs() < 1e-12 && (r - 4.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn pixel_tracing() {
        let one = PixelSet::from_rows(Vec2::ZERO, 1.0, &["1".into()])
            .unwrap()
            .to_polygon();
        assert_eq!(one.loops().len(), 1);
        assert_eq!(one.vertex_count(), 4);
        assert_eq!(one.area(), 1.0);
        let block = PixelSet::from_rows(Vec2::ZERO, 0.25, &["11".into(), "11".into()])
            .unwrap()
            .to_polygon();
        assert_eq!(block.vertex_count(), 4);
        assert!((block.perimeter() - 2.0).abs() < 1e-15);
        let checker = PixelSet::from_rows(Vec2::ZERO, 1.0, &["10".into(), "01".into()])
            .unwrap()
            .to_polygon();
        assert_eq!(checker.loops().len(), 2);
        assert_eq!(checker.area(), 2.0);
        let ring = PixelSet::from_rows(Vec2::ZERO, 1.0, &["111".into(), "101".into(), "111".into()]).unwrap();
        let poly = ring.to_polygon();
        assert_eq!(poly.loops().len(), 2);
        assert_eq!(poly.area(), ring.area());
    }

    #[test]
    fn crossing_loops_rejected() {
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(PolygonRegion::simple(bowtie).is_err());
    }

    #[test]
    fn region_json_round_trip() {
        let regions = [
            Region::Polygon(square_with_hole()),
            Region::Intervals(IntervalUnion::new(vec![(0.0, 1.0), (2.0, 3.5)]).unwrap()),
            Region::Pixels(PixelSet::from_rows(Vec2::new(-1.0, 0.5), 0.5, &["010".into(), "111".into()]).unwrap()),
        ];
        for r in regions {
            let s = serde_json::to_string(&r).unwrap();
            let back: Region = serde_json::from_str(&s).unwrap();
            assert_eq!(back, r);
        }
    }
}
