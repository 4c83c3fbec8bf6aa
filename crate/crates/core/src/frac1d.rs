//! Fractional `s`-perimeters of finite unions of intervals on the line.
//!
//! For an interval union `A` with gaps `J_0 = (−∞, a_1)`, `J_j = (b_j, a_{j+1})`
//! and `J_m = (b_m, ∞)`,
//!
//! ```text
//! P_s(A) = Σ_j Σ_i ∫_{J_j} ∫_{I_i} |x − y|^{−(1+s)} dx dy,
//! ```
//!
//! and every term is a combination of the antiderivative
//! `G(d) = d^{1−s} / (s(1−s))`.

use crate::error::{geometry, param, Result};
use serde::{Deserialize, Serialize};

/// Gaps (and intervals) shorter than this are removed at construction.
pub const MERGE_EPS: f64 = 1e-12;

/// Admissible range of `s` in public entry points.
pub const S_MIN: f64 = 1e-4;
pub const S_MAX: f64 = 1.0 - 1e-4;

/// A finite union of open intervals with pairwise positive gaps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Sort, then merge intervals that overlap or are separated by less than
    /// [`MERGE_EPS`].
    pub fn new(mut items: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &items {
            if !(a.is_finite() && b.is_finite()) {
                return Err(geometry("interval endpoints must be finite"));
            }
            if a >= b {
                return Err(geometry(format!("interval ({a}, {b}) is empty")));
            }
        }
        items.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(items.len());
        for (a, b) in items {
            match out.last_mut() {
                Some(last) if a - last.1 < MERGE_EPS => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Ok(Self { intervals: out })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn diameter(&self) -> f64 {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(f), Some(l)) => l.1 - f.0,
            _ => 0.0,
        }
    }

    /// `card(∂*A)`: two boundary points per interval.
    pub fn reduced_boundary_count(&self) -> usize {
        2 * self.intervals.len()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0);
        Self {
            intervals: self.intervals.iter().map(|&(a, b)| (lambda * a, lambda * b)).collect(),
        }
    }

    pub fn translated(&self, t: f64) -> Self {
        Self {
            intervals: self.intervals.iter().map(|&(a, b)| (a + t, b + t)).collect(),
        }
    }

    pub fn reflected(&self) -> Self {
        Self {
            intervals: self.intervals.iter().rev().map(|&(a, b)| (-b, -a)).collect(),
        }
    }
}

impl TryFrom<Vec<(f64, f64)>> for IntervalUnion {
    type Error = crate::Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        IntervalUnion::new(v)
    }
}

impl From<IntervalUnion> for Vec<(f64, f64)> {
    fn from(u: IntervalUnion) -> Self {
        u.intervals
    }
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if !(S_MIN..=S_MAX).contains(&s) {
        return Err(param(format!("s = {s} outside [{S_MIN}, {S_MAX}]")));
    }
    Ok(())
}

/// The antiderivative `G(d) = d^{1−s} / (s(1−s))` with `G(0) = 0`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Antiderivative {
    one_minus_s: f64,
    scale: f64,
}

impl Antiderivative {
    pub(crate) fn new(s: f64) -> Self {
        Self {
            one_minus_s: 1.0 - s,
            scale: 1.0 / (s * (1.0 - s)),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, d: f64) -> f64 {
        if d <= 0.0 {
            0.0
        } else {
            (self.one_minus_s * d.ln()).exp() * self.scale
        }
    }
}

/// `∫_{a₁}^{b₁} ∫_{a₂}^{b₂} |x − y|^{−(1+s)} dy dx` for `b₁ <= a₂`.
pub fn interval_pair_energy(a1: f64, b1: f64, a2: f64, b2: f64, s: f64) -> f64 {
    let g = Antiderivative::new(s);
    pair(&g, a1, b1, a2, b2)
}

#[inline]
fn pair(g: &Antiderivative, a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    g.eval(a2 - a1) + g.eval(b2 - b1) - g.eval(a2 - b1) - g.eval(b2 - a1)
}

/// Closed-form `P_s` of sorted, disjoint intervals; no validation.
pub(crate) fn energy_sorted(iv: &[(f64, f64)], g: &Antiderivative) -> f64 {
    let m = iv.len();
    if m == 0 {
        return 0.0;
    }
    let first = iv[0].0;
    let last = iv[m - 1].1;
    let mut total = 0.0;
    for (i, &(a, b)) in iv.iter().enumerate() {
        // Unbounded gaps on either side.
        total += g.eval(b - first) - g.eval(a - first);
        total += g.eval(last - a) - g.eval(last - b);
        // Bounded gaps (b_j, a_{j+1}).
        for j in 0..m - 1 {
            let (c, d) = (iv[j].1, iv[j + 1].0);
            total += if j < i {
                pair(g, c, d, a, b)
            } else {
                pair(g, a, b, c, d)
            };
        }
    }
    total
}

/// `P_s(A) = ∫_A ∫_{A^c} |x − y|^{−(1+s)} dx dy` in closed form.
pub fn frac_perimeter_1d(a: &IntervalUnion, s: f64) -> Result<f64> {
    check_s(s)?;
    if a.is_empty() {
        return Err(param("fractional perimeter of an empty set"));
    }
    Ok(energy_sorted(&a.intervals, &Antiderivative::new(s)))
}

/// Per-line energy used by the line-integral method; equals
/// [`frac_perimeter_1d`].
pub fn cross_energy_1d(a: &IntervalUnion, s: f64) -> Result<f64> {
    frac_perimeter_1d(a, s)
}

/// `8 card(∂*A) max{1, diam A}`, which dominates `(1−s) P_s(A)` for `s ∈ [1/2, 1)`.
pub fn upper_envelope_near_one(a: &IntervalUnion) -> f64 {
    8.0 * a.reduced_boundary_count() as f64 * a.diameter().max(1.0)
}

/// `(4/s) max{1, diam A} + diam(A)² + P_{s'}(A)`, which dominates `P_s(A)`
/// for `0 < s < s' < 1/2`.
pub fn upper_envelope_near_zero(a: &IntervalUnion, s: f64, s_prime: f64) -> Result<f64> {
    if !(0.0 < s && s < s_prime && s_prime < 0.5) {
        return Err(param("need 0 < s < s' < 1/2"));
    }
    let d = a.diameter();
    Ok(4.0 / s * d.max(1.0) + d * d + frac_perimeter_1d(a, s_prime)?)
}
