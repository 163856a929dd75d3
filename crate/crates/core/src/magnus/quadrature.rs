use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss-Legendre rule on `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Affine image of this rule on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let scale = (b - a) / (self.b - self.a);
        QuadratureRule {
            a,
            b,
            nodes: self
                .nodes
                .iter()
                .map(|&x| a + (x - self.a) * scale)
                .collect(),
            weights: self.weights.iter().map(|&w| w * scale).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `M`-point Gauss-Legendre rule on `[a, b]`, nodes ascending.
pub fn gauss_legendre(m: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if m < 1 {
        return Err(Error::InvalidQuadrature("need at least one node".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidQuadrature(format!("empty interval [{a}, {b}]")));
    }
    Ok(reference_rule(m).mapped(a, b))
}

/// Rule on `[−1, 1]`: Newton iteration on `P_M` from the Tricomi initial guess.
fn reference_rule(m: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Roots come out descending in x; store ascending and mirrored.
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    QuadratureRule {
        a: -1.0,
        b: 1.0,
        nodes,
        weights,
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let p_prev = if m == 1 { 1.0 } else { p0 };
    let d = m as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// How the ordered simplex `a ≤ s_n ≤ … ≤ s_1 ≤ b` is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SimplexScheme {
    /// Outer node fixes the inner interval: `s_{k+1}` uses an `M`-point rule
    /// on `[a, s_k]`. Spectrally accurate for smooth integrands.
    #[default]
    NestedGaussLegendre,
    /// Tensor-product rule on `[a, b]^n` restricted to ordered tuples
    /// `s_{k+1} ≤ s_k`.
    TriangularFilter,
}

/// Quadrature over the ordered simplex, one level at a time.
#[derive(Clone, Debug)]
pub struct SimplexQuadrature {
    scheme: SimplexScheme,
    base: QuadratureRule,
}

impl SimplexQuadrature {
    pub fn new(scheme: SimplexScheme, order: usize, a: f64, b: f64) -> Result<Self> {
        Ok(Self {
            scheme,
            base: gauss_legendre(order, a, b)?,
        })
    }

    pub fn start(&self) -> f64 {
        self.base.a
    }

    /// Nodes and weights of the next level given the enclosing upper limit.
    pub fn level(&self, upper: f64) -> (Vec<f64>, Vec<f64>) {
        match self.scheme {
            SimplexScheme::NestedGaussLegendre => {
                if upper >= self.base.b {
                    (self.base.nodes.clone(), self.base.weights.clone())
                } else if upper <= self.base.a {
                    (Vec::new(), Vec::new())
                } else {
                    let rule = self.base.mapped(self.base.a, upper);
                    (rule.nodes, rule.weights)
                }
            }
            SimplexScheme::TriangularFilter => self
                .base
                .nodes
                .iter()
                .zip(&self.base.weights)
                .filter(|(&s, _)| s <= upper)
                .map(|(&s, &w)| (s, w))
                .unzip(),
        }
    }

    /// All `levels`-tuples `(s_1, …, s_levels)` with their product weights,
    /// in depth-first order.
    pub fn tuples(&self, levels: usize) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(levels);
        self.descend(levels, self.base.b, 1.0, &mut prefix, &mut out);
        out
    }

    fn descend(
        &self,
        remaining: usize,
        upper: f64,
        weight: f64,
        prefix: &mut Vec<f64>,
        out: &mut Vec<(Vec<f64>, f64)>,
    ) {
        if remaining == 0 {
            out.push((prefix.clone(), weight));
            return;
        }
        let (nodes, weights) = self.level(upper);
        for (s, w) in nodes.into_iter().zip(weights) {
            prefix.push(s);
            self.descend(remaining - 1, s, weight * w, prefix, out);
            prefix.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_rules() {
        let r = gauss_legendre(1, 0.0, 1.0).unwrap();
        assert_eq!(r.nodes, vec![0.5]);
        assert_eq!(r.weights, vec![1.0]);

        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && (r.nodes[1] - x).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);

        let r = gauss_legendre(3, 0.0, 1.0).unwrap();
        assert!((r.integrate(|x| x.powi(5)) - 1.0 / 6.0).abs() <= 1e-14);
    }

    #[test]
    fn invalid_requests() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(3, 1.0, 1.0).is_err());
        assert!(gauss_legendre(3, 2.0, 1.0).is_err());
    }

    #[test]
    fn large_rule_is_accurate() {
        for m in [64, 256, 512] {
            let r = gauss_legendre(m, 0.0, 0.8).unwrap();
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 0.8).abs() <= 1e-13 * 0.8);
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            // Oscillatory integrand, far inside the resolved band.
            let exact = (20.0f64 * 0.8).sin() / 20.0;
            assert!((r.integrate(|x| (20.0 * x).cos()) - exact).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn polynomial_exactness(m in 1usize..40, degree_frac in 0.0f64..1.0, a in -2.0f64..2.0, len in 0.1f64..3.0) {
            let degree = ((2 * m - 1) as f64 * degree_frac).floor() as i32;
            let b = a + len;
            let r = gauss_legendre(m, a, b).unwrap();
            let exact = (b.powi(degree + 1) - a.powi(degree + 1)) / (degree + 1) as f64;
            let got = r.integrate(|x| x.powi(degree));
            let scale = a.abs().max(b.abs()).powi(degree + 1).max(1.0);
            prop_assert!((got - exact).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn nested_simplex_volume() {
        // Volume of the ordered n-simplex of side h is h^n / n!.
        let q = SimplexQuadrature::new(SimplexScheme::NestedGaussLegendre, 6, 0.0, 0.5).unwrap();
        for (levels, fact) in [(1, 1.0), (2, 2.0), (3, 6.0)] {
            let vol: f64 = q.tuples(levels).iter().map(|(_, w)| w).sum();
            assert!((vol - 0.5f64.powi(levels as i32) / fact).abs() < 1e-15);
        }
        // ∫∫_{s2 ≤ s1} s1·s2² = ∫ s1 · s1³/3 = h^5/15.
        let got: f64 = q
            .tuples(2)
            .iter()
            .map(|(s, w)| w * s[0] * s[1] * s[1])
            .sum();
        assert!((got - 0.5f64.powi(5) / 15.0).abs() < 1e-15);
        for (s, _) in q.tuples(3) {
            assert!(s[0] >= s[1] && s[1] >= s[2] && s[2] >= 0.0);
        }
    }

    #[test]
    fn triangular_filter_converges_slowly() {
        let exact = 1.0 / 2.0;
        let err = |m| {
            let q = SimplexQuadrature::new(SimplexScheme::TriangularFilter, m, 0.0, 1.0).unwrap();
            let vol: f64 = q.tuples(2).iter().map(|(_, w)| w).sum();
            (vol - exact).abs()
        };
        assert!(err(64) < err(8));
        assert!(err(64) > 1e-6);
    }
}
