//! `P_s(E, K)` for planar regions by three independent routes (line
//! integrals, ray casting, Monte Carlo) and a pixel-grid discretization with
//! cheap single-cell updates.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex_body::SymmetricBody;
use crate::error::{param, Error, Result};
use crate::frac1d::{check_s, energy_sorted, Antiderivative};
use crate::geom::Vec2;
use crate::quadrature::Rule;
use crate::region::{complement_from_crossings, ray_crossings, PixelSet, PolygonRegion};

/// Angular rule of the line-integral method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularRule {
    /// `n_theta` equispaced directions.
    Trapezoid,
    /// Composite graded Gauss between edge directions of `E` and kink
    /// directions of `K`, with about `n_theta / 2` nodes on `[0, π)`.
    KinkAligned,
}

/// Resolution parameters shared by the quadrature methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub offsets_per_segment: usize,
    pub grading_exponent: f64,
    /// Gauss nodes per geometric layer of the area rule (ray casting).
    pub area_refinement: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub angular: AngularRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_theta: 512,
            offsets_per_segment: 16,
            grading_exponent: 2.0,
            area_refinement: 6,
            rel_tol: 1e-3,
            seed: 0,
            angular: AngularRule::Trapezoid,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 32 || !self.n_theta.is_multiple_of(2) {
            return Err(param(format!(
                "n_theta must be even and at least 32, got {}",
                self.n_theta
            )));
        }
        if self.offsets_per_segment < 2 {
            return Err(param("offsets_per_segment must be at least 2"));
        }
        if !(self.grading_exponent >= 1.0 && self.grading_exponent.is_finite()) {
            return Err(param("grading_exponent must be at least 1"));
        }
        if self.area_refinement < 2 {
            return Err(param("area_refinement must be at least 2"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 0.1) {
            return Err(param("rel_tol must lie in (0, 0.1]"));
        }
        Ok(())
    }

    /// The coarser settings used for the a posteriori error estimate.
    pub fn halved(&self) -> QuadratureSpec {
        QuadratureSpec {
            n_theta: (self.n_theta / 2).max(16) & !1,
            offsets_per_segment: (self.offsets_per_segment / 2).max(2),
            area_refinement: (self.area_refinement / 2).max(2),
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bp,
    Ray,
    Mc,
    Pixel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub value: f64,
    pub method: Method,
    /// Half-resolution difference for quadratures, standard error for
    /// Monte Carlo, zero for the pixel energy.
    pub error_estimate: f64,
    /// Integrand evaluations (or samples) at full resolution.
    pub nodes: usize,
}

fn check_inputs(e: &PolygonRegion, s: f64) -> Result<()> {
    check_s(s)?;
    if e.area() <= 0.0 {
        return Err(param("region is empty"));
    }
    Ok(())
}

/// Kernel factor `‖u‖_K^{−(2+s)}`.
#[inline]
fn kernel(k: &SymmetricBody, u: Vec2, s: f64) -> f64 {
    k.gauge(u).powf(-(2.0 + s))
}

// ---------------------------------------------------------------------------
// Line integrals

/// `P_s(E, K)` through the line decomposition
/// `½ ∫_{S¹} ‖u‖_K^{−(2+s)} ∫_{u^⊥} P_s(E ∩ (y + ℝu)) dy du`.
pub fn frac_perimeter_bp(e: &PolygonRegion, k: &SymmetricBody, s: f64, q: &QuadratureSpec) -> Result<EnergyBreakdown> {
    check_inputs(e, s)?;
    q.validate()?;
    let (value, nodes) = bp_value(e, k, s, q);
    let (coarse, _) = bp_value(e, k, s, &q.halved());
    Ok(EnergyBreakdown {
        value,
        method: Method::Bp,
        error_estimate: (value - coarse).abs(),
        nodes,
    })
}

/// Directions and weights on `[0, π)`; the weights already include the
/// factor 2 from `u ↔ −u` and the ½ from the line measure.
fn bp_directions(e: &PolygonRegion, k: &SymmetricBody, q: &QuadratureSpec) -> Vec<(f64, f64)> {
    match q.angular {
        AngularRule::Trapezoid => {
            let h = 2.0 * PI / q.n_theta as f64;
            (0..q.n_theta / 2).map(|i| (i as f64 * h, h)).collect()
        }
        AngularRule::KinkAligned => {
            let mut cuts: Vec<f64> = e.edges().map(|(p, r)| (r - p).angle().rem_euclid(PI)).collect();
            cuts.extend(k.kink_angles().iter().map(|a| a.rem_euclid(PI)));
            let cuts = sorted_cycle(cuts, PI);
            let per = ((q.n_theta / 2) / cuts.len()).max(4);
            let rule = Rule::graded(per, q.grading_exponent);
            let mut out = Vec::new();
            for w in 0..cuts.len() {
                let a = cuts[w];
                let b = if w + 1 < cuts.len() { cuts[w + 1] } else { cuts[0] + PI };
                for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                    out.push((a + (b - a) * t, wt * (b - a)));
                }
            }
            out
        }
    }
}

/// Sorted, deduplicated angles in `[0, period)`; never empty.
fn sorted_cycle(mut a: Vec<f64>, period: f64) -> Vec<f64> {
    for x in a.iter_mut() {
        *x = x.rem_euclid(period);
        if *x >= period {
            *x = 0.0;
        }
    }
    a.sort_by(f64::total_cmp);
    a.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    if a.len() > 1 && (a[0] + period - a[a.len() - 1]) < 1e-12 {
        a.pop();
    }
    if a.is_empty() {
        a.push(0.0);
    }
    a
}

fn bp_value(e: &PolygonRegion, k: &SymmetricBody, s: f64, q: &QuadratureSpec) -> (f64, usize) {
    let edges: Vec<(Vec2, Vec2)> = e.edges().collect();
    let verts: Vec<Vec2> = e.vertices().collect();
    let rule = Rule::graded(q.offsets_per_segment, q.grading_exponent);
    let g = Antiderivative::new(s);
    let dirs = bp_directions(e, k, q);
    let scale = e.diameter().max(1e-300);
    let per_dir: Vec<(f64, usize)> = dirs
        .par_iter()
        .map(|&(theta, w)| {
            let u = Vec2::from_angle(theta);
            let (j, n) = line_integral(&edges, &verts, u, &rule, &g, scale);
            (w * kernel(k, u, s) * j, n)
        })
        .collect();
    let value = per_dir.iter().map(|p| p.0).sum();
    let nodes = per_dir.iter().map(|p| p.1).sum();
    (value, nodes)
}

/// `∫_{u^⊥} P_s(E ∩ (y + ℝu)) dy` with Gauss nodes between vertex events.
fn line_integral(
    edges: &[(Vec2, Vec2)],
    verts: &[Vec2],
    u: Vec2,
    rule: &Rule,
    g: &Antiderivative,
    scale: f64,
) -> (f64, usize) {
    let n = u.perp();
    let mut events: Vec<f64> = verts.iter().map(|&p| n.dot(p)).collect();
    events.sort_by(f64::total_cmp);
    events.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * scale);
    let spans: Vec<(f64, f64)> = edges
        .iter()
        .map(|&(p, q)| {
            let (a, b) = (n.dot(p), n.dot(q));
            (a.min(b), a.max(b))
        })
        .collect();
    let mut active: Vec<usize> = Vec::new();
    let mut ts: Vec<f64> = Vec::new();
    let mut iv: Vec<(f64, f64)> = Vec::new();
    let mut total = 0.0;
    let mut count = 0;
    for win in events.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let len = hi - lo;
        if len <= 1e-14 * scale {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        active.clear();
        active.extend((0..edges.len()).filter(|&i| spans[i].0 < mid && mid < spans[i].1));
        let mut seg = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let y = lo + len * t;
            ts.clear();
            for &i in &active {
                let (p, q) = edges[i];
                let (dp, dq) = (n.dot(p) - y, n.dot(q) - y);
                let lam = dp / (dp - dq);
                ts.push(u.dot(p) + u.dot(q - p) * lam);
            }
            ts.sort_by(f64::total_cmp);
            iv.clear();
            iv.extend(ts.chunks_exact(2).map(|c| (c[0], c[1])));
            seg += w * energy_sorted(&iv, g);
        }
        total += seg * len;
        count += rule.len();
    }
    (total, count)
}

// ---------------------------------------------------------------------------
// Ray casting

/// `R_s(x, u) = Σ_k (a_k^{−s} − b_k^{−s}) / s` over the complement segments
/// of the ray `x + r u`, `r > 0`. `x` must lie strictly inside `E`.
pub fn ray_energy_density(e: &PolygonRegion, x: Vec2, u: Vec2, s: f64) -> Result<f64> {
    check_s(s)?;
    let segs = e.ray_complement_segments(x, u.normalized())?;
    Ok(segments_energy(&segs, s))
}

#[inline]
fn segments_energy(segs: &[(f64, f64)], s: f64) -> f64 {
    let mut r = 0.0;
    for &(a, b) in segs {
        r += a.powf(-s);
        if b.is_finite() {
            r -= b.powf(-s);
        }
    }
    r / s
}

/// A quadrilateral `{(x, y) : x₀ ≤ x ≤ x₁, bot(x) ≤ y ≤ top(x)}` with
/// affine `bot` and `top`.
#[derive(Clone, Copy, Debug)]
struct Trapezoid {
    x0: f64,
    x1: f64,
    b0: f64,
    b1: f64,
    t0: f64,
    t1: f64,
}

/// Vertical-slab decomposition. Trapezoids are further cut along lines of
/// constant relative height through every vertex lying inside one of their
/// vertical sides, so boundary points only ever sit at trapezoid corners or
/// along the bottom and top sides.
fn trapezoids(e: &PolygonRegion) -> Vec<Trapezoid> {
    let scale = e.diameter();
    let tol = 1e-12 * scale;
    let verts: Vec<Vec2> = e.vertices().collect();
    let mut xs: Vec<f64> = verts.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let edges: Vec<(Vec2, Vec2)> = e.edges().collect();
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let xm = 0.5 * (x0 + x1);
        let at = |p: Vec2, q: Vec2, x: f64| p.y + (x - p.x) * (q.y - p.y) / (q.x - p.x);
        let mut cross: Vec<(f64, f64, f64)> = edges
            .iter()
            .filter(|(p, q)| (p.x < xm) != (q.x < xm))
            .map(|&(p, q)| (at(p, q, xm), at(p, q, x0), at(p, q, x1)))
            .collect();
        cross.sort_by(|a, b| a.0.total_cmp(&b.0));
        for c in cross.chunks_exact(2) {
            let (lo, hi) = (c[0], c[1]);
            let mut etas = vec![0.0, 1.0];
            for p in &verts {
                for (x, b, t) in [(x0, lo.1, hi.1), (x1, lo.2, hi.2)] {
                    if (p.x - x).abs() <= tol && p.y > b + tol && p.y < t - tol {
                        etas.push((p.y - b) / (t - b));
                    }
                }
            }
            etas.sort_by(f64::total_cmp);
            etas.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
            for h in etas.windows(2) {
                let mix = |b: f64, t: f64, eta: f64| b + eta * (t - b);
                out.push(Trapezoid {
                    x0,
                    x1,
                    b0: mix(lo.1, hi.1, h[0]),
                    b1: mix(lo.2, hi.2, h[0]),
                    t0: mix(lo.1, hi.1, h[1]),
                    t1: mix(lo.2, hi.2, h[1]),
                });
            }
        }
    }
    out
}

const LAYER_RATIO: f64 = 0.1;
const LAYERS: usize = 9;
/// Bodies with more kinks than this are treated as smooth by the ray
/// method's angular rule.
const MAX_ANGULAR_KINKS: usize = 64;

/// `P_s(E, K) = ∫_E ∫_{S¹} ‖u‖_K^{−(2+s)} R_s(x, u) du dx`.
pub fn frac_perimeter_ray(e: &PolygonRegion, k: &SymmetricBody, s: f64, q: &QuadratureSpec) -> Result<EnergyBreakdown> {
    check_inputs(e, s)?;
    q.validate()?;
    let (value, nodes) = ray_value(e, k, s, q);
    let (coarse, _) = ray_value(e, k, s, &q.halved());
    Ok(EnergyBreakdown {
        value,
        method: Method::Ray,
        error_estimate: (value - coarse).abs(),
        nodes,
    })
}

fn ray_value(e: &PolygonRegion, k: &SymmetricBody, s: f64, q: &QuadratureSpec) -> (f64, usize) {
    let area_rule = Rule::geometric(q.area_refinement, LAYER_RATIO, LAYERS, s);
    let ang_rule = Rule::graded((q.n_theta / 64).max(4), 2.0);
    let kinks: Vec<f64> = {
        let k = k.kink_angles();
        if k.len() <= MAX_ANGULAR_KINKS {
            k
        } else {
            Vec::new()
        }
    };
    let edges: Vec<(Vec2, Vec2)> = e.edges().collect();
    let verts: Vec<Vec2> = e.vertices().collect();
    let mut points: Vec<(Vec2, f64)> = Vec::new();
    for t in trapezoids(e) {
        let width = t.x1 - t.x0;
        for (&xi, &wx) in area_rule.nodes.iter().zip(&area_rule.weights) {
            let x = t.x0 + xi * width;
            let bot = t.b0 + xi * (t.b1 - t.b0);
            let top = t.t0 + xi * (t.t1 - t.t0);
            let height = top - bot;
            for (&eta, &wy) in area_rule.nodes.iter().zip(&area_rule.weights) {
                points.push((Vec2::new(x, bot + eta * height), wx * wy * width * height));
            }
        }
    }
    let vals: Vec<f64> = points
        .par_iter()
        .map_init(Vec::new, |buf, &(x, w)| {
            w * angular_integral(&edges, &verts, &kinks, k, x, s, &ang_rule, buf)
        })
        .collect();
    let count = points.len() * (verts.len() + kinks.len()) * ang_rule.len();
    (vals.iter().sum(), count)
}

#[allow(clippy::too_many_arguments)]
fn angular_integral(
    edges: &[(Vec2, Vec2)],
    verts: &[Vec2],
    kinks: &[f64],
    k: &SymmetricBody,
    x: Vec2,
    s: f64,
    rule: &Rule,
    buf: &mut Vec<f64>,
) -> f64 {
    let mut cuts: Vec<f64> = verts.iter().map(|&p| (p - x).angle()).collect();
    cuts.extend_from_slice(kinks);
    let cuts = sorted_cycle(cuts, 2.0 * PI);
    let mut total = 0.0;
    for i in 0..cuts.len() {
        let a = cuts[i];
        let b = if i + 1 < cuts.len() {
            cuts[i + 1]
        } else {
            cuts[0] + 2.0 * PI
        };
        let mut piece = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let u = Vec2::from_angle(a + (b - a) * t);
            ray_crossings(edges.iter().copied(), x, u, buf);
            let segs = complement_from_crossings(buf);
            piece += w * kernel(k, u, s) * segments_energy(&segs, s);
        }
        total += piece * (b - a);
    }
    total
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// Monte Carlo estimate of `P_s(E, K)` with its standard error.
///
/// A sample draws a direction `u` and an offset `y` uniformly, then a point
/// `x` on the slice `E ∩ (y + ℝu)`: the slice interval is chosen with
/// probability `∝ ℓ^{1−s}` and the position with density `∝ (β − t)^{−s}`
/// toward its exit point `β`. This cancels the `dist^{−s}` growth of
/// `R_s(x, u)` and gives the estimator finite variance for every `s`.
pub fn mc_frac_perimeter(
    e: &PolygonRegion,
    k: &SymmetricBody,
    s: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EnergyBreakdown> {
    check_inputs(e, s)?;
    if n_samples < 1000 {
        return Err(param("Monte Carlo needs at least 1000 samples"));
    }
    let edges: Vec<(Vec2, Vec2)> = e.edges().collect();
    let verts: Vec<Vec2> = e.vertices().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slice: Vec<(f64, f64)> = Vec::new();
    let mut ts: Vec<f64> = Vec::new();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let a = 1.0 - s;
    for _ in 0..n_samples {
        let theta = rng.gen::<f64>() * 2.0 * PI;
        let u = Vec2::from_angle(theta);
        let n = u.perp();
        let (lo, hi) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &p| {
            (l.min(n.dot(p)), h.max(n.dot(p)))
        });
        let y = lo + rng.gen::<f64>() * (hi - lo);
        let xi: f64 = rng.gen();
        let v: f64 = rng.gen();
        ts.clear();
        for &(p, q) in &edges {
            let (dp, dq) = (n.dot(p) - y, n.dot(q) - y);
            if (dp < 0.0) != (dq < 0.0) {
                ts.push(u.dot(p) + u.dot(q - p) * (dp / (dp - dq)));
            }
        }
        ts.sort_by(f64::total_cmp);
        slice.clear();
        slice.extend(ts.chunks_exact(2).map(|c| (c[0], c[1])).filter(|c| c.1 > c.0));
        let mut f = 0.0;
        if !slice.is_empty() {
            let masses: Vec<f64> = slice.iter().map(|&(l, r)| (r - l).powf(a)).collect();
            let total: f64 = masses.iter().sum();
            let mut pick = slice.len() - 1;
            let mut acc = 0.0;
            for (i, m) in masses.iter().enumerate() {
                acc += m;
                if xi * total < acc {
                    pick = i;
                    break;
                }
            }
            let (alpha, beta) = slice[pick];
            let len = beta - alpha;
            // β − t = ℓ (1 − V)^{1/(1−s)}
            let gap = len * (1.0 - v).powf(1.0 / a);
            // R_s · gap^s from the slice's forward gaps, in ratio form so a
            // point arbitrarily close to β stays finite.
            let t = beta - gap;
            let mut r_scaled = 1.0;
            for (idx, &(_, b)) in slice.iter().enumerate().skip(pick) {
                if idx > pick {
                    r_scaled += (gap / (b - t)).powf(s);
                }
                if let Some(&(next, _)) = slice.get(idx + 1) {
                    r_scaled -= (gap / (next - t)).powf(s);
                }
            }
            r_scaled /= s;
            // 1 / (p_i q(t)) = total gap^s / (1 − s)
            f = 2.0 * PI * (hi - lo) * kernel(k, u, s) * r_scaled * total / a;
        }
        sum += f;
        sum_sq += f * f;
    }
    let nf = n_samples as f64;
    let mean = sum / nf;
    let var = ((sum_sq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    Ok(EnergyBreakdown {
        value: mean,
        method: Method::Mc,
        error_estimate: (var / nf).sqrt(),
        nodes: n_samples,
    })
}

// ---------------------------------------------------------------------------
// Pixel energy

/// Offsets with `max(|Δx|, |Δy|)` up to this many cells use quadrature.
pub const NEAR_FIELD: i64 = 4;

/// Interaction table for one `(h, s, K)` on grids up to a given size.
///
/// `P_s(E) ≈ |E| t₀ − Σ_{p ≠ q} w(p − q)` over ordered pairs of cells.
#[derive(Clone, Debug)]
pub struct PixelKernel {
    h: f64,
    s: f64,
    t0: f64,
    nx: usize,
    ny: usize,
    /// `w` indexed by `dx ∈ [0, nx)`, `dy ∈ (−ny, ny)`; `w(−Δ) = w(Δ)`.
    table: Vec<f64>,
}

/// Key for the unit-cell data: `(s bits, body JSON)`.
type UnitKey = (u64, String);

fn unit_cache() -> &'static Mutex<HashMap<UnitKey, Arc<UnitCell>>> {
    static CACHE: OnceLock<Mutex<HashMap<UnitKey, Arc<UnitCell>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `t₀` and the near-field `w` for `h = 1`; other cell sizes follow from
/// `w_h = h^{2−s} w_1`.
#[derive(Debug)]
struct UnitCell {
    t0: f64,
    near: Vec<f64>,
}

impl UnitCell {
    fn near(&self, dx: i64, dy: i64) -> f64 {
        let side = 2 * NEAR_FIELD + 1;
        self.near[((dy + NEAR_FIELD) * side + dx + NEAR_FIELD) as usize]
    }
}

fn unit_cell(k: &SymmetricBody, s: f64) -> Result<Arc<UnitCell>> {
    let key = (s.to_bits(), serde_json::to_string(k)?);
    if let Some(c) = unit_cache().lock().unwrap().get(&key) {
        return Ok(c.clone());
    }
    let cell = PolygonRegion::rectangle(0.0, 0.0, 1.0, 1.0)?;
    let t0 = ray_value(&cell, k, s, &QuadratureSpec::default()).0;
    let side = 2 * NEAR_FIELD + 1;
    let mut near = vec![0.0; (side * side) as usize];
    for dy in -NEAR_FIELD..=NEAR_FIELD {
        for dx in -NEAR_FIELD..=NEAR_FIELD {
            if dx != 0 || dy != 0 {
                near[((dy + NEAR_FIELD) * side + dx + NEAR_FIELD) as usize] = pair_interaction(k, s, dx, dy);
            }
        }
    }
    let c = Arc::new(UnitCell { t0, near });
    unit_cache().lock().unwrap().insert(key, c.clone());
    Ok(c)
}

const PAIR_GAUSS: usize = 16;

/// `w(Δ) = ∫_{cell} ∫_{cell+Δ} ‖x − y‖_K^{−(2+s)} dy dx` for unit cells,
/// written as `∫ k(z) φ(z − Δ) dz` with the tent `φ(ζ) = (1−|ζ₁|)(1−|ζ₂|)`.
/// Each of the four unit squares of the tent's support is integrated by a
/// tensor Gauss rule, or by a Duffy split when `z = 0` is one of its corners.
fn pair_interaction(k: &SymmetricBody, s: f64, dx: i64, dy: i64) -> f64 {
    let g = Rule::gauss_legendre(PAIR_GAUSS);
    let mut total = 0.0;
    for (ox, oy) in [(-1i64, -1i64), (0, -1), (-1, 0), (0, 0)] {
        // Square [cx, cx+1] × [cy, cy+1] in z; the tent is bilinear on it.
        let cx = dx + ox;
        let cy = dy + oy;
        let tent = |zx: i64, zy: i64| {
            let (a, b) = ((zx - dx).abs(), (zy - dy).abs());
            if a <= 1 && b <= 1 {
                ((1 - a) * (1 - b)) as f64
            } else {
                0.0
            }
        };
        let corners = [(cx, cy), (cx + 1, cy), (cx, cy + 1), (cx + 1, cy + 1)];
        if let Some(&(sx, sy)) = corners.iter().find(|c| c.0 == 0 && c.1 == 0) {
            // Local frame from the singular corner: z = α A + β B.
            let ax = if sx == cx { 1.0 } else { -1.0 };
            let by = if sy == cy { 1.0 } else { -1.0 };
            let (ia, ib) = (ax as i64, by as i64);
            let p0 = tent(0, 0);
            let pa = tent(ia, 0);
            let pb = tent(0, ib);
            let pab = tent(ia, ib);
            debug_assert_eq!(p0, 0.0);
            total += duffy_square(k, s, &g, Vec2::new(ax, 0.0), Vec2::new(0.0, by), [pa, pb, pab]);
        } else {
            let (p00, p10, p01, p11) = (tent(cx, cy), tent(cx + 1, cy), tent(cx, cy + 1), tent(cx + 1, cy + 1));
            let mut sq = 0.0;
            for (&a, &wa) in g.nodes.iter().zip(&g.weights) {
                for (&b, &wb) in g.nodes.iter().zip(&g.weights) {
                    let z = Vec2::new(cx as f64 + a, cy as f64 + b);
                    let phi = p00 * (1.0 - a) * (1.0 - b) + p10 * a * (1.0 - b) + p01 * (1.0 - a) * b + p11 * a * b;
                    sq += wa * wb * phi * k.gauge(z).powf(-(2.0 + s));
                }
            }
            total += sq;
        }
    }
    total
}

/// `∫_{[0,1]²} k(αA + βB) φ(α, β) dα dβ` where `φ` is bilinear with value
/// 0 at the origin and `pa`, `pb`, `pab` at the other corners.
fn duffy_square(k: &SymmetricBody, s: f64, g: &Rule, a: Vec2, b: Vec2, [pa, pb, pab]: [f64; 3]) -> f64 {
    let inv = 1.0 / (1.0 - s);
    let mut total = 0.0;
    // Two triangles: β ≤ α (α = ρ, β = ρτ) and α ≤ β (β = ρ, α = ρτ).
    for swap in [false, true] {
        for (&tau, &wt) in g.nodes.iter().zip(&g.weights) {
            let dir = if swap { b + a * tau } else { a + b * tau };
            let kd = k.gauge(dir).powf(-(2.0 + s));
            for (&sig, &ws) in g.nodes.iter().zip(&g.weights) {
                // ρ = σ^{1/(1−s)} absorbs ρ^{−s}: ρ^{−s} dρ = dσ / (1−s).
                let rho = sig.powf(inv);
                let (al, be) = if swap { (rho * tau, rho) } else { (rho, rho * tau) };
                // φ / ρ, expanded so nothing cancels near the origin.
                let (fa, fb) = if swap { (tau, 1.0) } else { (1.0, tau) };
                let phi_over_rho = pa * fa * (1.0 - be) + pb * fb * (1.0 - al) + pab * fa * be;
                total += wt * ws * kd * phi_over_rho * inv;
            }
        }
    }
    total
}

impl PixelKernel {
    /// Table for cells of size `h` on grids of at most `nx × ny` cells.
    pub fn new(k: &SymmetricBody, s: f64, h: f64, nx: usize, ny: usize) -> Result<Self> {
        check_s(s)?;
        if !(h > 0.0 && h.is_finite()) || nx == 0 || ny == 0 {
            return Err(param("invalid pixel grid"));
        }
        let unit = unit_cell(k, s)?;
        let scale = h.powf(2.0 - s);
        let mut table = vec![0.0; nx * (2 * ny - 1)];
        for dx in 0..nx as i64 {
            for dy in -(ny as i64 - 1)..ny as i64 {
                let w1 = if dx == 0 && dy == 0 {
                    0.0
                } else if dx <= NEAR_FIELD && dy.abs() <= NEAR_FIELD {
                    unit.near(dx, dy)
                } else {
                    k.gauge(Vec2::new(dx as f64, dy as f64)).powf(-(2.0 + s))
                };
                table[dx as usize * (2 * ny - 1) + (dy + ny as i64 - 1) as usize] = scale * w1;
            }
        }
        Ok(Self {
            h,
            s,
            t0: scale * unit.t0,
            nx,
            ny,
            table,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn cell_size(&self) -> f64 {
        self.h
    }

    /// `w(Δ)` between two cells of this grid.
    #[inline]
    pub fn w(&self, dx: i64, dy: i64) -> f64 {
        let (dx, dy) = if dx < 0 { (-dx, -dy) } else { (dx, dy) };
        self.table[dx as usize * (2 * self.ny - 1) + (dy + self.ny as i64 - 1) as usize]
    }

    fn check_grid(&self, e: &PixelSet) -> Result<()> {
        let (nx, ny) = e.dims();
        if nx > self.nx || ny > self.ny || (e.cell_size() - self.h).abs() > 1e-12 * self.h {
            return Err(param("pixel set does not fit this kernel table"));
        }
        Ok(())
    }

    pub fn energy(&self, e: &PixelSet) -> Result<f64> {
        self.check_grid(e)?;
        let cells = e.cells();
        let mut pairs = 0.0;
        for (a, &(i, j)) in cells.iter().enumerate() {
            for &(p, q) in &cells[a + 1..] {
                pairs += self.w(p as i64 - i as i64, q as i64 - j as i64);
            }
        }
        Ok(cells.len() as f64 * self.t0 - 2.0 * pairs)
    }

    /// Energy change from toggling cell `(i, j)`.
    pub fn flip_delta(&self, e: &PixelSet, i: usize, j: usize) -> Result<f64> {
        self.check_grid(e)?;
        let (nx, ny) = e.dims();
        if i >= nx || j >= ny {
            return Err(param("cell outside the grid"));
        }
        let present = e.get(i, j);
        if present && e.count() == 1 {
            return Err(param("flip would leave the pixel set empty"));
        }
        let mut sum = 0.0;
        for q in 0..ny {
            for p in 0..nx {
                if (p, q) != (i, j) && e.get(p, q) {
                    sum += self.w(p as i64 - i as i64, q as i64 - j as i64);
                }
            }
        }
        Ok(if present {
            2.0 * sum - self.t0
        } else {
            self.t0 - 2.0 * sum
        })
    }
}

/// Kernel for a given pixel set, shared through a process-wide cache.
fn kernel_for(e: &PixelSet, k: &SymmetricBody, s: f64) -> Result<Arc<PixelKernel>> {
    type Key = (u64, u64, String, usize, usize);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<PixelKernel>>>> = OnceLock::new();
    let (nx, ny) = e.dims();
    let key = (e.cell_size().to_bits(), s.to_bits(), serde_json::to_string(k)?, nx, ny);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(pk) = cache.lock().unwrap().get(&key) {
        return Ok(pk.clone());
    }
    let pk = Arc::new(PixelKernel::new(k, s, e.cell_size(), nx, ny)?);
    cache.lock().unwrap().insert(key, pk.clone());
    Ok(pk)
}

/// Discrete `P_s` of a pixel set.
pub fn pixel_energy(e: &PixelSet, k: &SymmetricBody, s: f64) -> Result<EnergyBreakdown> {
    let pk = kernel_for(e, k, s)?;
    Ok(EnergyBreakdown {
        value: pk.energy(e)?,
        method: Method::Pixel,
        error_estimate: 0.0,
        nodes: e.count(),
    })
}

/// Change of [`pixel_energy`] when cell `(i, j)` is toggled.
pub fn pixel_flip_delta(e: &PixelSet, k: &SymmetricBody, s: f64, cell: (usize, usize)) -> Result<f64> {
    kernel_for(e, k, s)?.flip_delta(e, cell.0, cell.1)
}

/// Dispatch on a method name.
pub fn frac_perimeter(
    e: &PolygonRegion,
    k: &SymmetricBody,
    s: f64,
    method: Method,
    q: &QuadratureSpec,
    mc_samples: usize,
) -> Result<EnergyBreakdown> {
    match method {
        Method::Bp => frac_perimeter_bp(e, k, s, q),
        Method::Ray => frac_perimeter_ray(e, k, s, q),
        Method::Mc => mc_frac_perimeter(e, k, s, mc_samples, q.seed),
        Method::Pixel => Err(Error::Precondition("the pixel energy takes a pixel set".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PolygonRegion {
        PolygonRegion::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap()
    }

    fn l_shape() -> PolygonRegion {
        PolygonRegion::simple(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(0.0, 2.0),
        ])
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bp_and_ray_agree() {
        let q = QuadratureSpec::default();
        for k in [SymmetricBody::ball(1.0).unwrap(), SymmetricBody::diamond(1.0)] {
            let a = frac_perimeter_bp(&l_shape(), &k, 0.4, &q).unwrap();
            let b = frac_perimeter_ray(&l_shape(), &k, 0.4, &q).unwrap();
            assert!(rel(a.value, b.value) < 1e-3, "{} vs {}", a.value, b.value);
            assert_eq!(a.method, Method::Bp);
            assert_eq!(b.method, Method::Ray);
        }
    }

    #[test]
    fn homogeneity_in_scale() {
        let q = QuadratureSpec::default();
        let k = SymmetricBody::square(1.0);
        let s = 0.6;
        let a = frac_perimeter_bp(&square(), &k, s, &q).unwrap().value;
        let b = frac_perimeter_bp(&square().scaled(3.0), &k, s, &q).unwrap().value;
        assert!(rel(b, 3f64.powf(2.0 - s) * a) < 1e-9);
    }

    #[test]
    fn body_scaling() {
        // ‖·‖_{λK} = ‖·‖_K / λ, so P_s(E, λK) = λ^{2+s} P_s(E, K).
        let q = QuadratureSpec::default();
        let s = 0.3;
        let a = frac_perimeter_bp(&square(), &SymmetricBody::ball(1.0).unwrap(), s, &q)
            .unwrap()
            .value;
        let b = frac_perimeter_bp(&square(), &SymmetricBody::ball(2.0).unwrap(), s, &q)
            .unwrap()
            .value;
        assert!(rel(b, 2f64.powf(2.0 + s) * a) < 1e-9);
    }

    #[test]
    fn ray_density_half_line() {
        let e = PolygonRegion::rectangle(-100.0, -100.0, 1.0, 100.0).unwrap();
        let d = 0.25;
        let s = 0.5;
        let r = ray_energy_density(&e, Vec2::new(1.0 - d, 0.0), Vec2::new(1.0, 0.0), s).unwrap();
        assert!(rel(r, d.powf(-s) / s) < 1e-12);
    }

    #[test]
    fn mc_matches_bp() {
        let q = QuadratureSpec::default();
        let k = SymmetricBody::ball(1.0).unwrap();
        let bp = frac_perimeter_bp(&l_shape(), &k, 0.5, &q).unwrap().value;
        let mc = mc_frac_perimeter(&l_shape(), &k, 0.5, 20_000, 11).unwrap();
        assert!(
            (mc.value - bp).abs() < 4.0 * mc.error_estimate,
            "{} ± {} vs {bp}",
            mc.value,
            mc.error_estimate
        );
        let again = mc_frac_perimeter(&l_shape(), &k, 0.5, 20_000, 11).unwrap();
        assert_eq!(mc.value, again.value);
    }

    #[test]
    fn mc_error_shrinks_like_root_n() {
        let k = SymmetricBody::ball(1.0).unwrap();
        let mut ratios = Vec::new();
        for seed in 0..10 {
            let a = mc_frac_perimeter(&square(), &k, 0.5, 4_000, seed).unwrap();
            let b = mc_frac_perimeter(&square(), &k, 0.5, 8_000, seed + 100).unwrap();
            ratios.push(b.error_estimate / a.error_estimate);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((0.6..=0.8).contains(&mean), "{ratios:?}");
    }

    #[test]
    fn ray_density_at_disc_center() {
        let disc = PolygonRegion::from_body(&SymmetricBody::regular(256, 1.0).unwrap()).unwrap();
        let s = 0.4;
        for k in 0..8 {
            // Directions through vertices see the unit circumradius.
            let u = Vec2::from_angle(2.0 * std::f64::consts::PI * k as f64 / 256.0);
            let r = ray_energy_density(&disc, Vec2::ZERO, u, s).unwrap();
            assert!(rel(r, 1.0 / s) < 1e-12, "{r}");
        }
    }

    #[test]
    fn mc_rejects_few_samples() {
        let k = SymmetricBody::square(1.0);
        assert!(mc_frac_perimeter(&square(), &k, 0.5, 10, 0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            n_theta: 0,
            ..QuadratureSpec::default()
        };
        assert!(bad.validate().is_err());
        let half = QuadratureSpec::default().halved();
        assert!(half.n_theta < QuadratureSpec::default().n_theta);
    }

    fn pixels(rows: &[&str]) -> PixelSet {
        let rows: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
        PixelSet::from_rows(Vec2::new(0.0, 0.0), 0.5, &rows).unwrap()
    }

    #[test]
    fn single_cell_is_unit_square_energy() {
        let k = SymmetricBody::ball(1.0).unwrap();
        let s = 0.5;
        let e = pixels(&["000", "010", "000"]);
        let px = pixel_energy(&e, &k, s).unwrap().value;
        let cell = PolygonRegion::rectangle(0.0, 0.0, 0.5, 0.5).unwrap();
        let bp = frac_perimeter_bp(&cell, &k, s, &QuadratureSpec::default())
            .unwrap()
            .value;
        assert!(rel(px, bp) < 2e-3, "{px} vs {bp}");
    }

    #[test]
    fn pair_weights_are_symmetric() {
        let pk = PixelKernel::new(&SymmetricBody::diamond(1.0), 0.7, 1.0, 12, 12).unwrap();
        for (dx, dy) in [(1, 0), (2, 3), (5, 7), (0, 4)] {
            assert!(rel(pk.w(dx, dy), pk.w(-dx, -dy)) < 1e-14);
            assert!(pk.w(dx, dy) > 0.0);
        }
        // Diamond is symmetric under the swap of axes.
        assert!(rel(pk.w(2, 1), pk.w(1, 2)) < 1e-12);
    }

    #[test]
    fn flip_delta_matches_recompute() {
        let k = SymmetricBody::square(1.0);
        let s = 0.8;
        let mut e = pixels(&["00000", "01100", "01110", "00100", "00000"]);
        let before = pixel_energy(&e, &k, s).unwrap().value;
        for cell in [(0, 0), (2, 2), (3, 1)] {
            let d = pixel_flip_delta(&e, &k, s, cell).unwrap();
            e.flip(cell.0, cell.1).unwrap();
            let after = pixel_energy(&e, &k, s).unwrap().value;
            assert!((after - before - d).abs() < 1e-9 * before, "{cell:?}");
            e.flip(cell.0, cell.1).unwrap();
        }
    }

    #[test]
    fn dispatcher_refuses_pixel_on_polygons() {
        let k = SymmetricBody::square(1.0);
        let q = QuadratureSpec::default();
        assert!(frac_perimeter(&square(), &k, 0.5, Method::Pixel, &q, 0).is_err());
        let a = frac_perimeter(&square(), &k, 0.5, Method::Bp, &q, 0).unwrap();
        assert!(a.error_estimate < 1e-3 * a.value);
    }
}
