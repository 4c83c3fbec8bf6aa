//! The isoperimetric ratio `P_s(E, K) |E|^{−(2−s)/2}`, bounds on its
//! infimum `γ_s(K)`, and simulated annealing over pixel sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex_body::SymmetricBody;
use crate::error::{param, Error, Result};
use crate::frac1d::check_s;
use crate::frac_perimeter::{frac_perimeter_bp, pixel_energy, PixelKernel, QuadratureSpec};
use crate::geom::{clip_halfplane, signed_area, Vec2};
use crate::region::{PixelSet, PolygonRegion, Region};

/// Vertices of the polygonal disc used wherever a Euclidean ball is needed.
pub const DISC_VERTICES: usize = 256;
/// Support directions of the moment-body witness.
pub const MOMENT_WITNESS_DIRECTIONS: usize = 64;
/// Direction grid for the gauge extrema `c₁`, `c₂`.
pub const GAUGE_GRID: usize = 720;

#[inline]
fn ratio_exponent(s: f64) -> f64 {
    -(2.0 - s) / 2.0
}

/// `P_s(E, K) |E|^{−(2−s)/2}`; polygons use the line-integral method,
/// pixel sets the pixel energy.
pub fn isoperimetric_ratio(e: &Region, k: &SymmetricBody, s: f64, q: &QuadratureSpec) -> Result<f64> {
    match e {
        Region::Polygon(p) => polygon_ratio(p, k, s, q),
        Region::Pixels(p) => pixel_ratio(p, k, s),
        Region::Intervals(_) => Err(param("the isoperimetric ratio is defined for planar regions")),
    }
}

fn polygon_ratio(e: &PolygonRegion, k: &SymmetricBody, s: f64, q: &QuadratureSpec) -> Result<f64> {
    Ok(frac_perimeter_bp(e, k, s, q)?.value * e.area().powf(ratio_exponent(s)))
}

fn pixel_ratio(e: &PixelSet, k: &SymmetricBody, s: f64) -> Result<f64> {
    Ok(pixel_energy(e, k, s)?.value * e.area().powf(ratio_exponent(s)))
}

/// A polygon standing in for the unit ball of `k`.
pub fn body_polygon(k: &SymmetricBody) -> Result<PolygonRegion> {
    match k {
        SymmetricBody::Ball { radius } => PolygonRegion::from_body(&SymmetricBody::regular(DISC_VERTICES, *radius)?),
        _ => PolygonRegion::from_body(k),
    }
}

/// The convex hull of the moment body, sampled on `m` support directions.
pub fn moment_hull(k: &SymmetricBody, m: usize) -> Result<PolygonRegion> {
    PolygonRegion::from_body(&k.moment_body(m)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub name: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaBracket {
    pub lower: f64,
    pub upper: f64,
    pub c1: f64,
    pub c2: f64,
    /// Euclidean ratio of the polygonal disc.
    pub disc_ratio: f64,
    pub witnesses: Vec<Witness>,
}

/// `c₂^{−(2+s)} γ_{2,s} ≤ γ_s(K) ≤ min_witness ratio(·, K)`.
pub fn gamma_bracket(k: &SymmetricBody, s: f64, q: &QuadratureSpec) -> Result<GammaBracket> {
    check_s(s)?;
    let (c1, c2) = k.gauge_extrema(GAUGE_GRID);
    let disc = PolygonRegion::from_body(&SymmetricBody::regular(DISC_VERTICES, 1.0)?)?;
    let ball = SymmetricBody::ball(1.0)?;
    let disc_ratio = polygon_ratio(&disc, &ball, s, q)?;
    let lower = c2.powf(-(2.0 + s)) * disc_ratio;
    let candidates = [
        ("body", body_polygon(k)?),
        ("moment-hull", moment_hull(k, MOMENT_WITNESS_DIRECTIONS)?),
        ("disc", disc),
    ];
    let witnesses = candidates
        .iter()
        .map(|(name, e)| {
            Ok(Witness {
                name: name.to_string(),
                ratio: polygon_ratio(e, k, s, q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let upper = witnesses.iter().map(|w| w.ratio).fold(f64::INFINITY, f64::min);
    if lower > upper {
        return Err(Error::Inconsistent(format!(
            "bracket inverted: lower {lower} > upper {upper}; tighten the quadrature"
        )));
    }
    Ok(GammaBracket {
        lower,
        upper,
        c1,
        c2,
        disc_ratio,
        witnesses,
    })
}

// ---------------------------------------------------------------------------
// Annealing

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    /// Cells per side of Ω.
    pub grid: usize,
    /// Half-width of the square Ω; `None` means four times the diameter of K.
    pub half_width: Option<f64>,
    pub s: f64,
    /// Initial temperature, in units of relative ratio change.
    pub initial_temperature: f64,
    pub cooling: f64,
    pub flips_per_epoch: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            grid: 48,
            half_width: None,
            s: 0.9,
            initial_temperature: 2e-3,
            cooling: 0.95,
            flips_per_epoch: 2000,
            epochs: 120,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        check_s(self.s)?;
        if self.grid < 16 {
            return Err(param("annealing grid must have at least 16 cells per side"));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(param("cooling factor must lie in (0, 1)"));
        }
        if self.epochs < 1 || self.flips_per_epoch < 1 {
            return Err(param("need at least one epoch and one flip per epoch"));
        }
        if !(self.initial_temperature >= 0.0 && self.initial_temperature.is_finite()) {
            return Err(param("initial temperature must be nonnegative"));
        }
        if let Some(w) = self.half_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(param("domain half-width must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub temperature: f64,
    pub ratio: f64,
    pub best_ratio: f64,
    pub accept_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealResult {
    pub best: PixelSet,
    pub ratio: f64,
    pub initial_ratio: f64,
    pub trace: Vec<TraceRow>,
}

impl AnnealResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,temperature,ratio,best_ratio,accept_rate\n");
        for r in &self.trace {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.epoch, r.temperature, r.ratio, r.best_ratio, r.accept_rate
            ));
        }
        out
    }

    /// FNV-1a hash of [`Self::trace_csv`].
    pub fn trace_hash(&self) -> u64 {
        self.trace_csv().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }
}

/// Cells of an `n × n` grid on `[−w, w]²` whose centers lie in `poly`.
pub fn pixelize(poly: &PolygonRegion, w: f64, n: usize) -> Result<PixelSet> {
    let h = 2.0 * w / n as f64;
    let origin = Vec2::new(-w, -w);
    let mut mask = vec![false; n * n];
    for j in 0..n {
        for i in 0..n {
            let c = origin + Vec2::new(i as f64 + 0.5, j as f64 + 0.5) * h;
            mask[j * n + i] = poly.contains(c);
        }
    }
    PixelSet::new(origin, h, n, n, mask)
}

/// `poly` scaled about the origin to the given area.
fn scaled_to_area(poly: &PolygonRegion, area: f64) -> PolygonRegion {
    poly.scaled((area / poly.area()).sqrt())
}

fn domain_half_width(k: &SymmetricBody, cfg: &AnnealConfig) -> f64 {
    cfg.half_width.unwrap_or(4.0 * k.diameter())
}

fn on_boundary(e: &PixelSet, i: usize, j: usize) -> bool {
    let (nx, ny) = e.dims();
    let v = e.get(i, j);
    let nb = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
    nb.iter().any(|&(a, b)| {
        let other = a < nx && b < ny && e.get(a, b);
        other != v
    })
}

/// Metropolis annealing of the pixel ratio over single-cell flips in Ω.
///
/// Starts from `K` pixelized at a quarter of Ω's area; proposals are
/// boundary cells; returns the best configuration seen.
pub fn anneal_minimizer(k: &SymmetricBody, cfg: &AnnealConfig) -> Result<AnnealResult> {
    cfg.validate()?;
    let w = domain_half_width(k, cfg);
    let n = cfg.grid;
    let start = scaled_to_area(&body_polygon(k)?, (2.0 * w) * (2.0 * w) / 4.0);
    let mut e = pixelize(&start, w, n)?;
    let kernel = PixelKernel::new(k, cfg.s, e.cell_size(), n, n)?;
    let expo = ratio_exponent(cfg.s);
    let cell_area = e.cell_size() * e.cell_size();
    let ratio_of = |energy: f64, count: usize| energy * (count as f64 * cell_area).powf(expo);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut energy = kernel.energy(&e)?;
    let mut count = e.count();
    let mut ratio = ratio_of(energy, count);
    let initial_ratio = ratio;
    let mut best = e.clone();
    let mut best_ratio = ratio;
    let mut temp = cfg.initial_temperature;
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut accepted = 0usize;
        for _ in 0..cfg.flips_per_epoch {
            let (i, j) = loop {
                let c = (rng.gen_range(0..n), rng.gen_range(0..n));
                if on_boundary(&e, c.0, c.1) {
                    break c;
                }
            };
            let present = e.get(i, j);
            if present && count == 1 {
                continue;
            }
            let delta = kernel.flip_delta(&e, i, j)?;
            let new_count = if present { count - 1 } else { count + 1 };
            let new_ratio = ratio_of(energy + delta, new_count);
            let rel = (new_ratio - ratio) / ratio;
            let u: f64 = rng.gen();
            let accept = rel <= 0.0 || (temp > 0.0 && u < (-rel / temp).exp());
            if accept {
                e.flip(i, j)?;
                energy += delta;
                count = new_count;
                ratio = new_ratio;
                accepted += 1;
                if ratio < best_ratio {
                    best_ratio = ratio;
                    best = e.clone();
                }
            }
        }
        // Resynchronize with a full evaluation to keep rounding from drifting.
        energy = kernel.energy(&e)?;
        ratio = ratio_of(energy, count);
        trace.push(TraceRow {
            epoch,
            temperature: temp,
            ratio,
            best_ratio,
            accept_rate: accepted as f64 / cfg.flips_per_epoch as f64,
        });
        temp *= cfg.cooling;
    }
    let best_ratio = ratio_of(kernel.energy(&best)?, best.count());
    Ok(AnnealResult {
        best,
        ratio: best_ratio,
        initial_ratio,
        trace,
    })
}

/// `area(E ∩ C)` for a pixel set and a convex counterclockwise polygon.
fn pixel_convex_intersection(e: &PixelSet, convex: &[Vec2]) -> f64 {
    let h = e.cell_size();
    let m = convex.len();
    e.cells()
        .iter()
        .map(|&(i, j)| {
            let o = e.origin() + Vec2::new(i as f64, j as f64) * h;
            let mut cell = vec![o, o + Vec2::new(h, 0.0), o + Vec2::new(h, h), o + Vec2::new(0.0, h)];
            for a in 0..m {
                let (p, q) = (convex[a], convex[(a + 1) % m]);
                let d = q - p;
                let nrm = Vec2::new(d.y, -d.x);
                cell = clip_halfplane(&cell, nrm, nrm.dot(p));
                if cell.is_empty() {
                    return 0.0;
                }
            }
            signed_area(&cell)
        })
        .sum()
}

/// `area(E Δ C) / area(C)` where `C` is the convex `target` scaled to the
/// area of `E` and centered at its centroid.
pub fn normalized_distance(e: &PixelSet, target: &PolygonRegion) -> Result<f64> {
    let c = scaled_to_area(&target.translated(-target.centroid()), e.area()).translated(e.centroid());
    let lp = c.loops();
    if lp.len() != 1 {
        return Err(param("distance target must be a single convex loop"));
    }
    let inter = pixel_convex_intersection(e, &lp[0]);
    Ok((e.area() + c.area() - 2.0 * inter) / c.area())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub s: f64,
    pub ratio: f64,
    /// Ratio of the moment-body hull pixelized at the same area on the same grid.
    pub witness_ratio: f64,
    pub distance: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Allowed relative increase between consecutive distances.
    pub slack: f64,
    pub passes: bool,
}

pub const CONVERGENCE_SLACK: f64 = 0.2;

/// Anneal at each `s` and measure the distance of the minimizer to the
/// moment body, expecting it to shrink as `s` grows.
pub fn minimizer_convergence_experiment(
    k: &SymmetricBody,
    s_list: &[f64],
    template: &AnnealConfig,
) -> Result<ConvergenceTable> {
    if s_list.len() < 3 {
        return Err(param("need at least three values of s"));
    }
    if s_list.windows(2).any(|w| w[1] <= w[0]) || s_list.iter().any(|s| !(0.6..=0.95).contains(s)) {
        return Err(param("s values must increase within [0.6, 0.95]"));
    }
    let mk = moment_hull(k, MOMENT_WITNESS_DIRECTIONS)?;
    let w = domain_half_width(k, template);
    let rows = s_list
        .par_iter()
        .map(|&s| {
            let cfg = AnnealConfig { s, ..template.clone() };
            let res = anneal_minimizer(k, &cfg)?;
            let witness = pixelize(&scaled_to_area(&mk, res.best.area()), w, cfg.grid)?;
            Ok(ConvergenceRow {
                s,
                ratio: res.ratio,
                witness_ratio: pixel_ratio(&witness, k, s)?,
                distance: normalized_distance(&res.best, &mk)?,
                seed: cfg.seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let within = |later: &ConvergenceRow, earlier: &ConvergenceRow| {
        later.distance <= (1.0 + CONVERGENCE_SLACK) * earlier.distance
    };
    // Consecutive steps and the whole span are both held to the slack, so
    // slow drift cannot accumulate.
    let passes = rows.windows(2).all(|r| within(&r[1], &r[0])) && within(&rows[rows.len() - 1], &rows[0]);
    Ok(ConvergenceTable {
        rows,
        slack: CONVERGENCE_SLACK,
        passes,
    })
}
