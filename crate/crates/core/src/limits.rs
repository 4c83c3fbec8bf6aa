//! Sweeps in `s` toward the two endpoint limits, BV and fractional Sobolev
//! seminorms of step functions via the coarea formula.

use serde::{Deserialize, Serialize};

use crate::convex_body::SymmetricBody;
use crate::error::{geometry, param, Result};
use crate::frac_perimeter::{frac_perimeter_bp, QuadratureSpec};
use crate::geom::Vec2;
use crate::region::{PolygonRegion, Region};

pub const DEFAULT_GRID_NEAR_ONE: [f64; 3] = [0.9, 0.95, 0.99];
pub const DEFAULT_GRID_NEAR_ZERO: [f64; 3] = [0.1, 0.05, 0.01];

/// Number of grid points nearest the limit used by the linear fit.
pub const FIT_POINTS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: f64,
    pub raw: f64,
    pub scaled: f64,
    pub err_est: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Sorted by increasing `s`.
    pub rows: Vec<SweepRow>,
    pub limit: f64,
    pub target: f64,
    pub rel_gap: f64,
}

impl SweepResult {
    fn assemble(mut rows: Vec<SweepRow>, toward_one: bool, target: f64) -> Self {
        rows.sort_by(|a, b| a.s.total_cmp(&b.s));
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (if toward_one { 1.0 - r.s } else { r.s }, r.scaled))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.truncate(FIT_POINTS);
        let limit = linear_intercept(&pts);
        Self {
            rows,
            limit,
            target,
            rel_gap: (limit - target).abs() / target.abs(),
        }
    }
}

/// Intercept at 0 of the least-squares line through `pts`.
pub fn linear_intercept(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return my;
    }
    my - mx * sxy / sxx
}

fn check_grid(grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.len() < FIT_POINTS {
        return Err(param(format!("an s-grid needs at least {FIT_POINTS} points")));
    }
    if let Some(s) = grid.iter().find(|s| !(lo..=hi).contains(*s)) {
        return Err(param(format!("grid point s = {s} outside [{lo}, {hi}]")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(param("s-grid has repeated points"));
    }
    Ok(())
}

/// `P(E, MK)` with the exact moment-body support function.
pub fn moment_perimeter(e: &PolygonRegion, k: &SymmetricBody) -> f64 {
    e.perimeter_with_support(|v| k.moment_support(v))
}

/// Rows of `(1−s) P_s(E, K)` and their extrapolation against `P(E, MK)`.
pub fn limit_s_to_1(e: &PolygonRegion, k: &SymmetricBody, s_grid: &[f64], q: &QuadratureSpec) -> Result<SweepResult> {
    check_grid(s_grid, 0.7, 0.999)?;
    let rows = s_grid
        .iter()
        .map(|&s| {
            let b = frac_perimeter_bp(e, k, s, q)?;
            Ok(SweepRow {
                s,
                raw: b.value,
                scaled: (1.0 - s) * b.value,
                err_est: b.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::assemble(rows, true, moment_perimeter(e, k)))
}

/// Rows of `s P_s(E, K)` and their extrapolation against `2 Vol(K) Vol(E)`.
pub fn limit_s_to_0(e: &PolygonRegion, k: &SymmetricBody, s_grid: &[f64], q: &QuadratureSpec) -> Result<SweepResult> {
    check_grid(s_grid, 0.001, 0.2)?;
    let rows = s_grid
        .iter()
        .map(|&s| {
            let b = frac_perimeter_bp(e, k, s, q)?;
            Ok(SweepRow {
                s,
                raw: b.value,
                scaled: s * b.value,
                err_est: b.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::assemble(rows, false, 2.0 * k.volume() * e.area()))
}

/// A nonnegative step function `f = Σ_k (t_k − t_{k−1}) 1_{E_k}` with
/// `t₀ = 0`, so that `{f > t} = E_k` for `t ∈ [t_{k−1}, t_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepRepr", into = "StepRepr")]
pub struct StepFunction {
    levels: Vec<(f64, PolygonRegion)>,
}

/// Deterministic sample points per nesting check.
pub const NESTING_SAMPLES: usize = 1000;

fn halton(i: usize, base: usize) -> f64 {
    let (mut f, mut r, mut i) = (1.0, 0.0, i);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

impl StepFunction {
    pub fn new(levels: Vec<(f64, PolygonRegion)>) -> Result<Self> {
        if levels.is_empty() {
            return Err(param("step function needs at least one level"));
        }
        let mut prev = 0.0;
        for (t, _) in &levels {
            if !(t.is_finite() && *t > prev) {
                return Err(param("thresholds must be positive and strictly increasing"));
            }
            prev = *t;
        }
        for w in levels.windows(2) {
            let (outer, inner) = (&w[0].1, &w[1].1);
            let (lo, hi) = inner.bbox();
            let mut hits = 0;
            let mut i = 1;
            while hits < NESTING_SAMPLES && i < 100 * NESTING_SAMPLES {
                let p = Vec2::new(lo.x + (hi.x - lo.x) * halton(i, 2), lo.y + (hi.y - lo.y) * halton(i, 3));
                i += 1;
                if inner.contains(p) {
                    hits += 1;
                    if !outer.contains(p) {
                        return Err(geometry("level sets are not nested"));
                    }
                }
            }
        }
        Ok(Self { levels })
    }

    /// The indicator `c·1_E`.
    pub fn indicator(e: PolygonRegion, c: f64) -> Result<Self> {
        Self::new(vec![(c, e)])
    }

    pub fn levels(&self) -> &[(f64, PolygonRegion)] {
        &self.levels
    }

    /// `c·f` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(param("scale factor must be positive"));
        }
        Self::new(self.levels.iter().map(|(t, e)| (c * t, e.clone())).collect())
    }

    /// `(t_k − t_{k−1}, E_k)` pairs.
    fn increments(&self) -> impl Iterator<Item = (f64, &PolygonRegion)> + '_ {
        let mut prev = 0.0;
        self.levels.iter().map(move |(t, e)| {
            let dt = t - prev;
            prev = *t;
            (dt, e)
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LevelRepr {
    t: f64,
    region: Region,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum StepRepr {
    Step { levels: Vec<LevelRepr> },
}

impl TryFrom<StepRepr> for StepFunction {
    type Error = crate::Error;
    fn try_from(r: StepRepr) -> Result<Self> {
        let StepRepr::Step { levels } = r;
        let levels = levels
            .into_iter()
            .map(|l| Ok((l.t, l.region.to_polygon()?)))
            .collect::<Result<Vec<_>>>()?;
        StepFunction::new(levels)
    }
}

impl From<StepFunction> for StepRepr {
    fn from(f: StepFunction) -> Self {
        StepRepr::Step {
            levels: f
                .levels
                .into_iter()
                .map(|(t, e)| LevelRepr {
                    t,
                    region: Region::Polygon(e),
                })
                .collect(),
        }
    }
}

/// `‖f‖_{BV,L} = Σ_k (t_k − t_{k−1}) P(E_k, L)`.
pub fn bv_seminorm(f: &StepFunction, l: &SymmetricBody) -> f64 {
    f.increments().map(|(dt, e)| dt * e.anisotropic_perimeter(l)).sum()
}

/// `‖f‖_{BV,MK}` with the exact moment-body support function.
pub fn bv_seminorm_moment(f: &StepFunction, k: &SymmetricBody) -> f64 {
    f.increments().map(|(dt, e)| dt * moment_perimeter(e, k)).sum()
}

/// Gagliardo seminorm `∫∫ |f(x) − f(y)| ‖x − y‖_K^{−(2+s)}` through the
/// coarea sum `2 Σ_k (t_k − t_{k−1}) P_s(E_k, K)`, with its error estimate.
pub fn frac_sobolev_seminorm_with_error(
    f: &StepFunction,
    k: &SymmetricBody,
    s: f64,
    q: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut err = 0.0;
    for (dt, e) in f.increments() {
        let b = frac_perimeter_bp(e, k, s, q)?;
        value += 2.0 * dt * b.value;
        err += 2.0 * dt * b.error_estimate;
    }
    Ok((value, err))
}

pub fn frac_sobolev_seminorm(f: &StepFunction, k: &SymmetricBody, s: f64, q: &QuadratureSpec) -> Result<f64> {
    Ok(frac_sobolev_seminorm_with_error(f, k, s, q)?.0)
}

/// Rows of `(1−s)·seminorm` extrapolated against `2 ‖f‖_{BV,MK}`.
pub fn sobolev_limit(f: &StepFunction, k: &SymmetricBody, s_grid: &[f64], q: &QuadratureSpec) -> Result<SweepResult> {
    check_grid(s_grid, 0.7, 0.999)?;
    let rows = s_grid
        .iter()
        .map(|&s| {
            let (raw, err) = frac_sobolev_seminorm_with_error(f, k, s, q)?;
            Ok(SweepRow {
                s,
                raw,
                scaled: (1.0 - s) * raw,
                err_est: err,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::assemble(rows, true, 2.0 * bv_seminorm_moment(f, k)))
}

/// `‖f‖_p` computed exactly over the shells `E_k ∖ E_{k+1}`.
pub fn lp_norm(f: &StepFunction, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(param("lp_norm needs p > 1"));
    }
    let lv = &f.levels;
    let mut sum = 0.0;
    for (i, (t, e)) in lv.iter().enumerate() {
        let inner = lv.get(i + 1).map_or(0.0, |(_, e)| e.area());
        sum += (e.area() - inner) * t.powf(p);
    }
    Ok(sum.powf(1.0 / p))
}
