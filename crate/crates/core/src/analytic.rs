//! Closed-form test functions with derivatives up to third order.

use crate::math::{cos, exp, hypot3, sin};

/// Value and spacetime derivatives up to order three at one event.
/// Index 0 is time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet3 {
    pub v: f64,
    pub d1: [f64; 4],
    pub d2: [[f64; 4]; 4],
    pub d3: [[[f64; 4]; 4]; 4],
}

impl Jet3 {
    /// `m^{ab} d_a d_b f = -f_tt + Laplacian f`.
    pub fn box_m(&self) -> f64 {
        -self.d2[0][0] + self.d2[1][1] + self.d2[2][2] + self.d2[3][3]
    }

    /// `d_c` of the box.
    pub fn d_box(&self, c: usize) -> f64 {
        -self.d3[c][0][0] + self.d3[c][1][1] + self.d3[c][2][2] + self.d3[c][3][3]
    }
}

/// A smooth function of `(t, x)` with analytic derivatives.
pub trait SpacetimeFunction {
    fn jet(&self, t: f64, x: [f64; 3]) -> Jet3;

    fn value(&self, t: f64, x: [f64; 3]) -> f64 {
        self.jet(t, x).v
    }
}

/// `amp * exp(-|X - c|^2 / width^2)` with `X = (t, x)` and a Euclidean
/// spacetime distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeGaussian {
    pub amp: f64,
    pub center: [f64; 4],
    pub width: f64,
}

impl SpacetimeFunction for SpacetimeGaussian {
    fn jet(&self, t: f64, x: [f64; 3]) -> Jet3 {
        let y = [
            t - self.center[0],
            x[0] - self.center[1],
            x[1] - self.center[2],
            x[2] - self.center[3],
        ];
        let a = 1.0 / (self.width * self.width);
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let g = self.amp * exp(-a * r2);
        // d_i g = -2a y_i g; the derivatives follow from the product rule.
        let mut j = Jet3 {
            v: g,
            ..Default::default()
        };
        let b = -2.0 * a;
        let delta = |i: usize, k: usize| if i == k { 1.0 } else { 0.0 };
        for i in 0..4 {
            j.d1[i] = b * y[i] * g;
            for k in 0..4 {
                j.d2[i][k] = (b * delta(i, k) + b * b * y[i] * y[k]) * g;
                for l in 0..4 {
                    j.d3[i][k][l] =
                        (b * b * (delta(i, k) * y[l] + delta(i, l) * y[k] + delta(k, l) * y[i])
                            + b * b * b * y[i] * y[k] * y[l])
                            * g;
                }
            }
        }
        j
    }
}

/// `amp * sin(k_a X^a + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub amp: f64,
    pub k: [f64; 4],
    pub phase: f64,
}

impl SpacetimeFunction for PlaneWave {
    fn jet(&self, t: f64, x: [f64; 3]) -> Jet3 {
        let th =
            self.k[0] * t + self.k[1] * x[0] + self.k[2] * x[1] + self.k[3] * x[2] + self.phase;
        let (s, c) = (sin(th), cos(th));
        let k = self.k;
        let mut j = Jet3 {
            v: self.amp * s,
            ..Default::default()
        };
        for a in 0..4 {
            j.d1[a] = self.amp * c * k[a];
            for b in 0..4 {
                j.d2[a][b] = -self.amp * s * k[a] * k[b];
                for d in 0..4 {
                    j.d3[a][b][d] = -self.amp * c * k[a] * k[b] * k[d];
                }
            }
        }
        j
    }
}

/// A function of space only with an analytic gradient.
pub trait SpatialProfile {
    fn value(&self, x: [f64; 3]) -> f64;
    fn gradient(&self, x: [f64; 3]) -> [f64; 3];
}

/// `amp * exp(-|x - c|^2 / width^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub amp: f64,
    pub center: [f64; 3],
    pub width: f64,
}

impl SpatialProfile for Gaussian {
    fn value(&self, x: [f64; 3]) -> f64 {
        let d = [
            x[0] - self.center[0],
            x[1] - self.center[1],
            x[2] - self.center[2],
        ];
        self.amp * exp(-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (self.width * self.width))
    }

    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let v = self.value(x);
        let s = -2.0 / (self.width * self.width);
        [
            s * (x[0] - self.center[0]) * v,
            s * (x[1] - self.center[1]) * v,
            s * (x[2] - self.center[2]) * v,
        ]
    }
}

/// `amp * exp(-(|x| - r0)^2 / width^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianShell {
    pub amp: f64,
    pub r0: f64,
    pub width: f64,
}

impl SpatialProfile for GaussianShell {
    fn value(&self, x: [f64; 3]) -> f64 {
        let r = hypot3(x);
        let d = r - self.r0;
        self.amp * exp(-d * d / (self.width * self.width))
    }

    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let r = hypot3(x);
        if r == 0.0 {
            return [0.0; 3];
        }
        let v = self.value(x);
        let dr = -2.0 * (r - self.r0) / (self.width * self.width) * v;
        [dr * x[0] / r, dr * x[1] / r, dr * x[2] / r]
    }
}

/// A constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl SpatialProfile for Constant {
    fn value(&self, _x: [f64; 3]) -> f64 {
        self.0
    }

    fn gradient(&self, _x: [f64; 3]) -> [f64; 3] {
        [0.0; 3]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_jet(f: &impl SpacetimeFunction, t: f64, x: [f64; 3]) {
        let h = 1e-4;
        let j = f.jet(t, x);
        let shift = |a: usize, s: f64| {
            let mut y = [t, x[0], x[1], x[2]];
            y[a] += s;
            f.jet(y[0], [y[1], y[2], y[3]])
        };
        for a in 0..4 {
            let (p, m) = (shift(a, h), shift(a, -h));
            assert!(((p.v - m.v) / (2.0 * h) - j.d1[a]).abs() < 1e-7);
            for b in 0..4 {
                assert!(((p.d1[b] - m.d1[b]) / (2.0 * h) - j.d2[a][b]).abs() < 1e-7);
                for c in 0..4 {
                    assert!(((p.d2[b][c] - m.d2[b][c]) / (2.0 * h) - j.d3[a][b][c]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn gaussian_jet_matches_differences() {
        let g = SpacetimeGaussian {
            amp: 1.3,
            center: [0.2, -0.1, 0.3, 0.0],
            width: 0.9,
        };
        check_jet(&g, 0.5, [0.1, 0.4, -0.6]);
    }

    #[test]
    fn plane_wave_jet_matches_differences() {
        let w = PlaneWave {
            amp: 0.7,
            k: [1.1, 0.3, -0.8, 0.5],
            phase: 0.4,
        };
        check_jet(&w, 0.3, [0.2, -0.5, 0.9]);
    }

    #[test]
    fn shell_gradient() {
        let s = GaussianShell {
            amp: 1.0,
            r0: 2.0,
            width: 0.5,
        };
        let x = [1.0, 1.2, -0.4];
        let g = s.gradient(x);
        let h = 1e-6;
        for a in 0..3 {
            let mut p = x;
            p[a] += h;
            let mut m = x;
            m[a] -= h;
            assert!(((s.value(p) - s.value(m)) / (2.0 * h) - g[a]).abs() < 1e-7);
        }
    }
}
