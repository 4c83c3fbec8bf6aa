//! Gauss–Legendre rules and the graded variants used near weakly singular
//! endpoints.

use std::f64::consts::PI;

/// A quadrature rule on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `n`-point Gauss–Legendre rule mapped to `[0, 1]`.
    pub fn gauss_legendre(n: usize) -> Rule {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Rule { nodes, weights }
    }

    /// Gauss–Legendre pulled back through `φ(t) = tᵖ / (tᵖ + (1−t)ᵖ)`, which
    /// flattens both endpoints to order `p − 1`. `p = 1` is plain Gauss.
    pub fn graded(n: usize, p: f64) -> Rule {
        let base = Rule::gauss_legendre(n);
        if p == 1.0 {
            return base;
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&t, &w) in base.nodes.iter().zip(&base.weights) {
            let a = t.powf(p);
            let b = (1.0 - t).powf(p);
            let den = a + b;
            nodes.push(a / den);
            let d = p * t.powf(p - 1.0) * (1.0 - t).powf(p - 1.0) / (den * den);
            weights.push(w * d);
        }
        Rule { nodes, weights }
    }

    /// Gauss–Legendre pulled back through `t ↦ t^q`, clustering toward 0.
    pub fn toward_zero(n: usize, q: f64) -> Rule {
        let base = Rule::gauss_legendre(n);
        let nodes = base.nodes.iter().map(|&t| t.powf(q)).collect();
        let weights = base
            .nodes
            .iter()
            .zip(&base.weights)
            .map(|(&t, &w)| w * q * t.powf(q - 1.0))
            .collect();
        Rule { nodes, weights }
    }

    /// Composite rule for integrands that may blow up like `d^{−β}` at both
    /// ends of `[0, 1]`.
    ///
    /// Each half is cut into `layers` geometric layers of ratio `sigma`, each
    /// carrying an `m`-point Gauss rule in the logarithmic variable. The
    /// innermost gap `[0, δ]` is covered
    /// by a single product node at `δ` that integrates `c·d^{−β}` exactly, so
    /// no node comes closer than `δ` to an endpoint.
    pub fn geometric(m: usize, sigma: f64, layers: usize, beta: f64) -> Rule {
        assert!(0.0 < sigma && sigma < 1.0 && (0.0..1.0).contains(&beta));
        let base = Rule::gauss_legendre(m);
        let mut half_nodes = Vec::new();
        let mut half_weights = Vec::new();
        let mut hi = 0.5;
        for _ in 0..layers {
            let lo = hi * sigma;
            let span = (hi / lo).ln();
            for (&t, &w) in base.nodes.iter().zip(&base.weights) {
                let d = lo * (span * t).exp();
                half_nodes.push(d);
                half_weights.push(w * span * d);
            }
            hi = lo;
        }
        half_nodes.push(hi);
        half_weights.push(hi / (1.0 - beta));
        let mut nodes = half_nodes.clone();
        let mut weights = half_weights.clone();
        for (x, w) in half_nodes.iter().zip(&half_weights).rev() {
            nodes.push(1.0 - x);
            weights.push(*w);
        }
        Rule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = b - a;
        let mut acc = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a + h * t);
        }
        acc * h
    }
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_is_exact_for_polynomials() {
        for n in 1..12 {
            let r = Rule::gauss_legendre(n);
            for deg in 0..(2 * n) {
                let v = r.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn graded_rule_handles_endpoint_power() {
        let r = Rule::graded(32, 3.0);
        let v = r.integrate(0.0, 1.0, |x| x.powf(-0.5) + (1.0 - x).powf(0.25));
        assert!((v - (2.0 + 0.8)).abs() < 1e-5, "{v}");
    }

    #[test]
    fn geometric_rule_handles_strong_singularity() {
        let s = 0.8;
        let r = Rule::geometric(6, 0.1, 9, s);
        let v = r.integrate(0.0, 1.0, |x| x.powf(-s) + (1.0 - x).powf(-s) + x * x);
        let exact = 2.0 / (1.0 - s) + 1.0 / 3.0;
        assert!((v - exact).abs() < 2e-6 * exact, "{v} vs {exact}");
        let min_gap = r.nodes.iter().map(|&x| x.min(1.0 - x)).fold(1.0, f64::min);
        assert!(min_gap > 1e-10);
    }

    #[test]
    fn weights_sum_to_one() {
        for r in [Rule::gauss_legendre(7), Rule::toward_zero(5, 3.0)] {
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "{s}");
        }
        let s: f64 = Rule::graded(24, 2.0).weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-8, "{s}");
    }
}
