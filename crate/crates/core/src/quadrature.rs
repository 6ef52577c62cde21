//! One-dimensional and spherical quadrature rules.

use alloc::vec::Vec;

use crate::math::{abs, cos, sin, sqrt, PI};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like first guess, then Newton on P_n.
        let mut z = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if abs(dz) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `P_n(z)` and its derivative.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| (a + h * (xi + 1.0), h * wi))
        .collect()
}

/// Product rule on the unit sphere: Gauss-Legendre in `cos theta` times a
/// uniform rule in azimuth. Weights sum to one, so the rule computes means.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// `n_polar` Legendre nodes and `2 n_polar` azimuths; exact for
    /// spherical harmonics of degree below `2 n_polar`.
    pub fn new(n_polar: usize) -> Self {
        let (z, wz) = gauss_legendre(n_polar);
        let n_az = 2 * n_polar;
        let mut nodes = Vec::with_capacity(n_polar * n_az);
        let mut weights = Vec::with_capacity(n_polar * n_az);
        for (zi, wi) in z.iter().zip(&wz) {
            let rho = sqrt(1.0 - zi * zi);
            for j in 0..n_az {
                let ph = 2.0 * PI * (j as f64 + 0.5) / n_az as f64;
                nodes.push([rho * cos(ph), rho * sin(ph), *zi]);
                weights.push(0.5 * wi / n_az as f64);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mean of `f` over the unit sphere.
    pub fn mean(&self, mut f: impl FnMut([f64; 3]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(w, c)| c * f(*w))
            .sum()
    }
}

/// Composite Simpson rule for `n` (even) intervals on `[a, b]`.
pub fn simpson(a: f64, b: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Trapezoid rule on samples with spacing `h`.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => h * (samples.iter().sum::<f64>() - 0.5 * (samples[0] + samples[n - 1])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_to_degree_2n_minus_1() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "n {n} deg {deg}: {q}");
            }
        }
    }

    #[test]
    fn sphere_rule_integrates_harmonics() {
        let s = SphereRule::new(8);
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((s.mean(|w| w[0] * w[0]) - 1.0 / 3.0).abs() < 1e-14);
        assert!((s.mean(|w| w[0] * w[0] * w[1] * w[1]) - 1.0 / 15.0).abs() < 1e-14);
        assert!(s.mean(|w| w[0] * w[1] * w[2]).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_rules() {
        assert!((simpson(0.0, PI, 64, sin) - 2.0).abs() < 1e-7);
        let h = 0.01;
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 * h).collect();
        let v: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((trapezoid(&v, h) - 1.0 / 3.0).abs() < 2e-5);
        let g: f64 = gauss_on(5, 0.0, 2.0)
            .iter()
            .map(|(x, w)| w * x * x * x)
            .sum();
        assert!((g - 4.0).abs() < 1e-13);
    }
}
