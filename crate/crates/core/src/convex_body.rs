//! Origin-symmetric convex bodies in the plane: gauges, support functions,
//! polars, volumes, and the moment and centroid bodies.
//!
//! Three representations are supported. Polygons and balls are exact. A
//! support-backed body stores its support function at sample directions and
//! is identified with the polygon cut out by the supporting half-planes
//! `u_i · x <= h_i`; its gauge is exact for that polygon, which differs from a
//! smooth body by `O(m⁻²)` for `m` samples.

use crate::error::{geometry, param, Error, Result};
use crate::geom::{clip_halfplane, convex_hull, equispaced_directions, first_moment, signed_area, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Vertices closer than this are merged during canonicalization.
pub const VERTEX_EPS: f64 = 1e-12;

/// Default number of sample directions for support-backed bodies.
pub const DEFAULT_DIRECTIONS: usize = 720;

/// Smallest admissible direction count for [`SymmetricBody::moment_body`].
pub const MIN_DIRECTIONS: usize = 16;

/// Exact origin-symmetric convex polygon in canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonBody {
    vertices: Vec<Vec2>,
    normals: Vec<Vec2>,
    offsets: Vec<f64>,
}

impl PolygonBody {
    /// Symmetrize, take the convex hull, merge duplicates and orient CCW.
    pub fn new(vertices: &[Vec2]) -> Result<Self> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(geometry("non-finite polygon vertex"));
        }
        let mut pts: Vec<Vec2> = Vec::with_capacity(2 * vertices.len());
        pts.extend_from_slice(vertices);
        pts.extend(vertices.iter().map(|&v| -v));
        let hull = convex_hull(&pts, VERTEX_EPS);
        if hull.len() < 3 {
            return Err(geometry("polygon body is degenerate (fewer than three hull vertices)"));
        }
        let area = signed_area(&hull);
        let scale = hull.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if area <= 1e-14 * scale * scale {
            return Err(geometry("polygon body has zero area"));
        }
        Ok(Self::from_hull(hull))
    }

    fn from_hull(vertices: Vec<Vec2>) -> Self {
        let n = vertices.len();
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for i in 0..n {
            let d = vertices[(i + 1) % n] - vertices[i];
            let nrm = Vec2::new(d.y, -d.x).normalized();
            normals.push(nrm);
            offsets.push(nrm.dot(vertices[i]));
        }
        Self {
            vertices,
            normals,
            offsets,
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Outward unit normal of the edge from vertex `i` to `i + 1`.
    pub fn normals(&self) -> &[Vec2] {
        &self.normals
    }

    /// Distance from the origin to the supporting line of each edge.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    fn gauge(&self, x: Vec2) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .fold(0.0, |m, (n, h)| f64::max(m, n.dot(x) / h))
    }

    fn support(&self, v: Vec2) -> f64 {
        self.vertices
            .iter()
            .fold(f64::NEG_INFINITY, |m, x| f64::max(m, v.dot(*x)))
    }
}

/// Body given by support values at sample directions.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportBody {
    directions: Vec<Vec2>,
    values: Vec<f64>,
    provenance: Option<String>,
    // Derived data, deterministic functions of the two vectors above.
    angles: Vec<f64>,
    order: Vec<usize>,
    hull: Vec<Vec2>,
}

impl SupportBody {
    pub fn new(directions: Vec<Vec2>, values: Vec<f64>, provenance: Option<String>) -> Result<Self> {
        let m = directions.len();
        if m < 3 || values.len() != m {
            return Err(geometry(
                "support body needs at least three directions and one value per direction",
            ));
        }
        for (u, &h) in directions.iter().zip(&values) {
            if !u.is_finite() || (u.norm() - 1.0).abs() > 1e-9 {
                return Err(geometry("support directions must be unit vectors"));
            }
            if !(h.is_finite() && h > 0.0) {
                return Err(geometry("support values must be positive and finite"));
            }
        }
        let angles: Vec<f64> = directions.iter().map(|u| u.angle().rem_euclid(2.0 * PI)).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
        for w in order.windows(2) {
            if angles[w[1]] - angles[w[0]] < 1e-12 {
                return Err(geometry("duplicate support direction"));
            }
        }
        let max_gap = order
            .windows(2)
            .map(|w| angles[w[1]] - angles[w[0]])
            .fold(angles[order[0]] + 2.0 * PI - angles[order[m - 1]], f64::max);
        if max_gap >= PI - 1e-12 {
            return Err(geometry(
                "support directions leave an angular gap of at least π; body would be unbounded",
            ));
        }
        let hmax = values.iter().cloned().fold(0.0, f64::max);
        let big = 1e6 * hmax;
        let mut hull = vec![
            Vec2::new(-big, -big),
            Vec2::new(big, -big),
            Vec2::new(big, big),
            Vec2::new(-big, big),
        ];
        for &i in &order {
            hull = clip_halfplane(&hull, directions[i], values[i]);
        }
        let hull = convex_hull(&hull, VERTEX_EPS);
        let body = Self {
            directions,
            values,
            provenance,
            angles,
            order,
            hull,
        };
        body.check_symmetry()?;
        body.check_subadditivity()?;
        Ok(body)
    }

    pub fn directions(&self) -> &[Vec2] {
        &self.directions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    /// Vertices of the outer polygonal hull `∩ {u_i · x <= h_i}`, CCW.
    pub fn hull(&self) -> &[Vec2] {
        &self.hull
    }

    fn gauge(&self, x: Vec2) -> f64 {
        self.directions
            .iter()
            .zip(&self.values)
            .fold(0.0, |m, (u, h)| f64::max(m, u.dot(x) / h))
    }

    /// Piecewise-linear interpolation of `h` in the angle, scaled by `|v|`.
    fn support(&self, v: Vec2) -> f64 {
        let r = v.norm();
        if r == 0.0 {
            return 0.0;
        }
        let theta = v.angle().rem_euclid(2.0 * PI);
        r * self.unit_support(theta)
    }

    fn unit_support(&self, theta: f64) -> f64 {
        let m = self.order.len();
        let pos = self.order.partition_point(|&i| self.angles[i] <= theta);
        let (lo, hi, a_lo, a_hi) = if pos == 0 {
            let lo = self.order[m - 1];
            (
                lo,
                self.order[0],
                self.angles[lo] - 2.0 * PI,
                self.angles[self.order[0]],
            )
        } else if pos == m {
            let hi = self.order[0];
            (
                self.order[m - 1],
                hi,
                self.angles[self.order[m - 1]],
                self.angles[hi] + 2.0 * PI,
            )
        } else {
            let lo = self.order[pos - 1];
            let hi = self.order[pos];
            (lo, hi, self.angles[lo], self.angles[hi])
        };
        if theta == a_lo {
            return self.values[lo];
        }
        let w = (theta - a_lo) / (a_hi - a_lo);
        (1.0 - w) * self.values[lo] + w * self.values[hi]
    }

    fn check_symmetry(&self) -> Result<()> {
        for (u, &h) in self.directions.iter().zip(&self.values) {
            let hm = self.support(-*u);
            if (hm - h).abs() > 1e-9 * (1.0 + h) {
                return Err(geometry(format!(
                    "support values are not origin-symmetric: h(u) = {h}, h(-u) = {hm}"
                )));
            }
        }
        Ok(())
    }

    /// Checks `h(u + v) <= h(u) + h(v)` whenever the direction of `u + v`
    /// is itself a sample direction.
    fn check_subadditivity(&self) -> Result<()> {
        let m = self.directions.len();
        let sorted: Vec<f64> = self.order.iter().map(|&i| self.angles[i]).collect();
        let find = |theta: f64| -> Option<usize> {
            let p = sorted.partition_point(|&a| a < theta - 1e-9);
            for cand in [p, p % m] {
                if cand < m && (sorted[cand] - theta).abs() <= 1e-9 {
                    return Some(self.order[cand]);
                }
            }
            if (sorted[0] + 2.0 * PI - theta).abs() <= 1e-9 {
                return Some(self.order[0]);
            }
            None
        };
        for i in 0..m {
            for j in (i + 1)..m {
                let w = self.directions[i] + self.directions[j];
                let r = w.norm();
                if r < 1e-9 {
                    continue;
                }
                if let Some(k) = find(w.angle().rem_euclid(2.0 * PI)) {
                    let lhs = r * self.values[k];
                    let rhs = self.values[i] + self.values[j];
                    if lhs > rhs + 1e-9 * (1.0 + rhs) {
                        return Err(geometry(format!(
                            "support values violate subadditivity at directions {i}, {j}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// An origin-symmetric convex body in the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyRepr", into = "BodyRepr")]
pub enum SymmetricBody {
    Polygon(PolygonBody),
    Ball { radius: f64 },
    Support(SupportBody),
}

impl SymmetricBody {
    pub fn polygon(vertices: &[Vec2]) -> Result<Self> {
        PolygonBody::new(vertices).map(SymmetricBody::Polygon)
    }

    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(geometry("ball radius must be positive"));
        }
        Ok(SymmetricBody::Ball { radius })
    }

    pub fn support_backed(directions: Vec<Vec2>, values: Vec<f64>, provenance: Option<String>) -> Result<Self> {
        SupportBody::new(directions, values, provenance).map(SymmetricBody::Support)
    }

    /// The square `[−a, a]²`.
    pub fn square(a: f64) -> Self {
        SymmetricBody::polygon(&[Vec2::new(a, a), Vec2::new(-a, a)]).expect("square")
    }

    /// The diamond `conv{±a e₁, ±a e₂}`.
    pub fn diamond(a: f64) -> Self {
        SymmetricBody::polygon(&[Vec2::new(a, 0.0), Vec2::new(0.0, a)]).expect("diamond")
    }

    /// Regular `m`-gon (`m` even) inscribed in the circle of radius `r`.
    pub fn regular(m: usize, r: f64) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(2) {
            return Err(param("regular body needs an even vertex count >= 4"));
        }
        SymmetricBody::polygon(&crate::geom::regular_polygon(m, r, Vec2::ZERO))
    }

    /// `‖x‖_K = inf{λ > 0 : x ∈ λK}`.
    pub fn gauge(&self, x: Vec2) -> f64 {
        match self {
            SymmetricBody::Polygon(p) => p.gauge(x),
            SymmetricBody::Ball { radius } => x.norm() / radius,
            SymmetricBody::Support(b) => b.gauge(x),
        }
    }

    /// `h_K(v) = max{v · x : x ∈ K}`.
    pub fn support(&self, v: Vec2) -> f64 {
        match self {
            SymmetricBody::Polygon(p) => p.support(v),
            SymmetricBody::Ball { radius } => radius * v.norm(),
            SymmetricBody::Support(b) => b.support(v),
        }
    }

    /// The polar body `K* = {v : v · x <= 1 for all x ∈ K}`.
    pub fn polar(&self) -> Result<SymmetricBody> {
        match self {
            SymmetricBody::Polygon(p) => {
                let verts: Vec<Vec2> = p.normals.iter().zip(&p.offsets).map(|(n, h)| *n / *h).collect();
                SymmetricBody::polygon(&verts)
            }
            SymmetricBody::Ball { radius } => SymmetricBody::ball(1.0 / radius),
            SymmetricBody::Support(_) => Err(Error::UnsupportedVariant(
                "polar of a support-backed body is not implemented",
            )),
        }
    }

    /// Area of the body (of the outer hull for support-backed bodies).
    pub fn volume(&self) -> f64 {
        match self {
            SymmetricBody::Polygon(p) => signed_area(&p.vertices),
            SymmetricBody::Ball { radius } => PI * radius * radius,
            SymmetricBody::Support(b) => signed_area(&b.hull),
        }
    }

    /// Vertices of the body when it is polygonal (the hull for support-backed
    /// bodies), `None` for balls.
    pub fn polygon_vertices(&self) -> Option<&[Vec2]> {
        match self {
            SymmetricBody::Polygon(p) => Some(&p.vertices),
            SymmetricBody::Ball { .. } => None,
            SymmetricBody::Support(b) => Some(&b.hull),
        }
    }

    /// `∫_K |v · x| dx`, exact for polygons and balls.
    ///
    /// The polygon is split by the line `v · x = 0` and the linear function
    /// `v · x` is integrated over each half through its first moment.
    pub fn abs_moment_integral(&self, v: Vec2) -> f64 {
        match self {
            SymmetricBody::Ball { radius } => 4.0 / 3.0 * radius.powi(3) * v.norm(),
            _ => {
                let verts = self.polygon_vertices().expect("polygonal");
                let pos = clip_halfplane(verts, -v, 0.0);
                let neg = clip_halfplane(verts, v, 0.0);
                let mp = if pos.len() >= 3 { v.dot(first_moment(&pos)) } else { 0.0 };
                let mn = if neg.len() >= 3 { v.dot(first_moment(&neg)) } else { 0.0 };
                mp - mn
            }
        }
    }

    /// Support function of the moment body: `h_{MK}(v) = (3/2) ∫_K |v · x| dx`.
    pub fn moment_support(&self, v: Vec2) -> f64 {
        1.5 * self.abs_moment_integral(v)
    }

    /// The moment body `MK`, sampled at `m` equispaced directions.
    pub fn moment_body(&self, m: usize) -> Result<SymmetricBody> {
        if m < MIN_DIRECTIONS {
            return Err(param(format!(
                "moment body needs at least {MIN_DIRECTIONS} directions, got {m}"
            )));
        }
        let dirs = equispaced_directions(m);
        let values = dirs.iter().map(|&u| self.moment_support(u)).collect();
        SymmetricBody::support_backed(dirs, values, Some("moment".into()))
    }

    /// The centroid body `2 / (3 Vol K) · MK`, sampled at `m` directions.
    pub fn centroid_body(&self, m: usize) -> Result<SymmetricBody> {
        if m < MIN_DIRECTIONS {
            return Err(param(format!(
                "centroid body needs at least {MIN_DIRECTIONS} directions, got {m}"
            )));
        }
        let scale = 2.0 / (3.0 * self.volume());
        let dirs = equispaced_directions(m);
        let values = dirs.iter().map(|&u| scale * self.moment_support(u)).collect();
        SymmetricBody::support_backed(dirs, values, Some("centroid".into()))
    }

    /// Directions (angles in `[0, 2π)`) where the gauge is not smooth.
    pub fn kink_angles(&self) -> Vec<f64> {
        match self.polygon_vertices() {
            Some(v) => v.iter().map(|p| p.angle().rem_euclid(2.0 * PI)).collect(),
            None => Vec::new(),
        }
    }

    /// `(c₁, c₂)` with `c₁ <= ‖u‖_K <= c₂` on the unit circle, evaluated on
    /// a grid of `grid` directions plus the body's own extremal directions.
    pub fn gauge_extrema(&self, grid: usize) -> (f64, f64) {
        let mut dirs = equispaced_directions(grid);
        match self {
            SymmetricBody::Polygon(p) => {
                dirs.extend(p.vertices.iter().map(|v| v.normalized()));
                dirs.extend(p.normals.iter().copied());
            }
            SymmetricBody::Support(b) => {
                dirs.extend(b.hull.iter().map(|v| v.normalized()));
                dirs.extend(b.directions.iter().copied());
            }
            SymmetricBody::Ball { .. } => {}
        }
        dirs.iter().fold((f64::INFINITY, 0.0), |(lo, hi), &u| {
            let g = self.gauge(u);
            (lo.min(g), hi.max(g))
        })
    }

    /// Euclidean diameter of the body.
    pub fn diameter(&self) -> f64 {
        match self {
            SymmetricBody::Ball { radius } => 2.0 * radius,
            _ => {
                2.0 * self
                    .polygon_vertices()
                    .unwrap()
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// JSON form of a body.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodyRepr {
    Polygon {
        vertices: Vec<Vec2>,
    },
    Ball {
        radius: f64,
    },
    Support {
        directions: Vec<Vec2>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        provenance: Option<String>,
    },
}

impl TryFrom<BodyRepr> for SymmetricBody {
    type Error = Error;
    fn try_from(r: BodyRepr) -> Result<Self> {
        match r {
            BodyRepr::Polygon { vertices } => SymmetricBody::polygon(&vertices),
            BodyRepr::Ball { radius } => SymmetricBody::ball(radius),
            BodyRepr::Support {
                directions,
                values,
                provenance,
            } => SymmetricBody::support_backed(directions, values, provenance),
        }
    }
}

impl From<SymmetricBody> for BodyRepr {
    fn from(b: SymmetricBody) -> Self {
        match b {
            SymmetricBody::Polygon(p) => BodyRepr::Polygon { vertices: p.vertices },
            SymmetricBody::Ball { radius } => BodyRepr::Ball { radius },
            SymmetricBody::Support(s) => BodyRepr::Support {
                directions: s.directions,
                values: s.values,
                provenance: s.provenance,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn gauge_examples() {
        let sq = SymmetricBody::square(1.0);
        assert_eq!(sq.gauge(Vec2::new(2.0, 0.0)), 2.0);
        assert_eq!(sq.gauge(Vec2::new(1.0, 1.0)), 1.0);
        assert_eq!(sq.gauge(Vec2::ZERO), 0.0);
        let b = SymmetricBody::ball(1.0).unwrap();
        assert_eq!(b.gauge(Vec2::new(3.0, 4.0)), 5.0);
    }

    #[test]
    fn support_examples() {
        assert_eq!(SymmetricBody::square(1.0).support(Vec2::new(1.0, 1.0)), 2.0);
        assert_eq!(SymmetricBody::ball(2.0).unwrap().support(Vec2::new(0.0, 1.0)), 2.0);
        assert_eq!(SymmetricBody::diamond(1.0).support(Vec2::new(1.0, 1.0)), 1.0);
    }

    #[test]
    fn polar_examples() {
        let sq = SymmetricBody::square(1.0);
        let di = SymmetricBody::diamond(1.0);
        assert_eq!(sq.polar().unwrap(), di);
        assert_eq!(di.polar().unwrap(), sq);
        assert_eq!(
            SymmetricBody::ball(1.0).unwrap().polar().unwrap(),
            SymmetricBody::ball(1.0).unwrap()
        );
        let mk = sq.moment_body(16).unwrap();
        assert!(matches!(mk.polar(), Err(Error::UnsupportedVariant(_))));
    }

    #[test]
    fn volume_examples() {
        assert_eq!(SymmetricBody::square(1.0).volume(), 4.0);
        assert_eq!(SymmetricBody::diamond(1.0).volume(), 2.0);
        assert!(close(SymmetricBody::ball(1.0).unwrap().volume(), PI, 1e-15));
    }

    #[test]
    fn abs_moment_examples() {
        let sq = SymmetricBody::square(1.0);
        assert!(close(sq.abs_moment_integral(Vec2::new(1.0, 0.0)), 2.0, 1e-14));
        let d = Vec2::new(1.0, 1.0) / SQRT2;
        assert!(close(sq.abs_moment_integral(d), 8.0 / 3.0 / SQRT2, 1e-14));
        let b = SymmetricBody::ball(1.0).unwrap();
        assert!(close(b.abs_moment_integral(Vec2::new(1.0, 0.0)), 4.0 / 3.0, 1e-15));
    }

    #[test]
    fn moment_and_centroid_examples() {
        let sq = SymmetricBody::square(1.0);
        let mk = sq.moment_body(720).unwrap();
        assert!(close(mk.support(Vec2::new(1.0, 0.0)), 3.0, 1e-13));
        assert!(close(mk.support(Vec2::new(1.0, 1.0) / SQRT2), 4.0 / SQRT2, 1e-13));
        let mb = SymmetricBody::ball(1.0).unwrap().moment_body(64).unwrap();
        if let SymmetricBody::Support(s) = &mb {
            assert!(s.values().iter().all(|&h| (h - 2.0).abs() < 1e-12));
        } else {
            panic!("expected support-backed");
        }
        let gk = sq.centroid_body(720).unwrap();
        assert!(close(gk.support(Vec2::new(1.0, 0.0)), 0.5, 1e-13));
        let gb = SymmetricBody::ball(1.0).unwrap().centroid_body(16).unwrap();
        assert!(close(gb.support(Vec2::new(0.0, 1.0)), 4.0 / (3.0 * PI), 1e-13));
        if let SymmetricBody::Support(s) = gb {
            assert_eq!(s.values().len(), 16);
        }
    }

    #[test]
    fn too_few_directions_rejected() {
        assert!(matches!(
            SymmetricBody::square(1.0).moment_body(15),
            Err(Error::InvalidParameter(_))
        ));
        assert!(SymmetricBody::square(1.0).centroid_body(8).is_err());
    }

    #[test]
    fn canonicalization_symmetrizes_and_orders() {
        let b = SymmetricBody::polygon(&[
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 0.5),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(b, SymmetricBody::diamond(1.0));
        let verts = b.polygon_vertices().unwrap();
        for i in 0..verts.len() {
            let a = verts[i];
            let c = verts[(i + 1) % verts.len()];
            let d = verts[(i + 2) % verts.len()];
            assert!((c - a).cross(d - c) > 0.0);
        }
    }

    #[test]
    fn invalid_bodies_rejected() {
        assert!(SymmetricBody::ball(0.0).is_err());
        assert!(SymmetricBody::polygon(&[Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)]).is_err());
        let dirs = equispaced_directions(8);
        let mut vals = vec![1.0; 8];
        vals[0] = 2.0;
        assert!(SymmetricBody::support_backed(dirs.clone(), vals, None).is_err());
        // Non-convex support data: a spike at one antipodal pair.
        let mut vals = vec![1.0; 8];
        vals[1] = 2.0;
        vals[5] = 2.0;
        assert!(SymmetricBody::support_backed(dirs, vals, None).is_err());
    }

    #[test]
    fn support_backed_gauge_of_sampled_square() {
        let sq = SymmetricBody::square(1.0);
        let dirs = equispaced_directions(8);
        let vals = dirs.iter().map(|&u| sq.support(u)).collect();
        let sb = SymmetricBody::support_backed(dirs, vals, None).unwrap();
        assert!(close(sb.volume(), 4.0, 1e-12));
        assert!(close(
            sb.gauge(Vec2::new(0.3, -0.7)),
            sq.gauge(Vec2::new(0.3, -0.7)),
            1e-12
        ));
    }

    #[test]
    fn json_round_trip() {
        for b in [
            SymmetricBody::square(1.0),
            SymmetricBody::ball(0.75).unwrap(),
            SymmetricBody::regular(10, 1.3).unwrap().moment_body(32).unwrap(),
        ] {
            let s = serde_json::to_string(&b).unwrap();
            let back: SymmetricBody = serde_json::from_str(&s).unwrap();
            assert_eq!(back, b);
            assert_eq!(serde_json::to_string(&back).unwrap(), s);
        }
    }
}
