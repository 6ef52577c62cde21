//! Cell-centred spatial grids, spacetime windows and ghost-padded arrays.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::SymTensor2;

/// A uniform Cartesian grid; point `(i, j, k)` sits at `lo + (i, j, k) * dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    pub n: [usize; 3],
    pub lo: [f64; 3],
    pub dx: f64,
}

impl Grid3 {
    pub fn new(n: [usize; 3], lo: [f64; 3], dx: f64) -> Self {
        Self { n, lo, dx }
    }

    /// `n` cells per axis covering `[-half_width, half_width]^3`, sampled at
    /// cell centres (no point at the origin when `n` is even).
    pub fn centered_cube(n: usize, half_width: f64) -> Self {
        let dx = 2.0 * half_width / n as f64;
        let lo = -half_width + 0.5 * dx;
        Self {
            n: [n; 3],
            lo: [lo; 3],
            dx,
        }
    }

    /// `n` cells per axis covering the octant `[0, width]^3` at cell centres.
    pub fn octant(n: usize, width: f64) -> Self {
        let dx = width / n as f64;
        Self {
            n: [n; 3],
            lo: [0.5 * dx; 3],
            dx,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let r = idx / self.n[0];
        [i, r % self.n[1], r / self.n[1]]
    }

    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.dx
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    #[inline]
    pub fn point_of(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.ijk(idx);
        self.point(i, j, k)
    }

    /// Memory stride of a unit step along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.n[0],
            _ => self.n[0] * self.n[1],
        }
    }

    pub fn sample(&self, mut f: impl FnMut([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|q| f(self.point_of(q))).collect()
    }

    /// Volume element of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dx * self.dx
    }
}

/// Levels needed around the centre of a time window.
pub fn check_levels(available: usize, needed: usize) -> Result<()> {
    if available < needed {
        Err(Error::InsufficientWindow { needed, available })
    } else {
        Ok(())
    }
}

/// A scalar field sampled on `levels.len()` equally spaced time levels.
///
/// Level `l` sits at `t0 + l * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBlock {
    pub grid: Grid3,
    pub t0: f64,
    pub dt: f64,
    pub levels: Vec<Vec<f64>>,
}

impl ScalarBlock {
    /// Sample `f(t, x)` on `n_levels` levels centred at `t_center`.
    pub fn from_fn(
        grid: Grid3,
        t_center: f64,
        dt: f64,
        n_levels: usize,
        mut f: impl FnMut(f64, [f64; 3]) -> f64,
    ) -> Self {
        let t0 = t_center - dt * ((n_levels - 1) / 2) as f64;
        let levels = (0..n_levels)
            .map(|l| {
                let t = t0 + l as f64 * dt;
                grid.sample(|x| f(t, x))
            })
            .collect();
        Self {
            grid,
            t0,
            dt,
            levels,
        }
    }

    pub fn single(grid: Grid3, t: f64, data: Vec<f64>) -> Self {
        Self {
            grid,
            t0: t,
            dt: 0.0,
            levels: vec![data],
        }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn center(&self) -> usize {
        (self.levels.len() - 1) / 2
    }

    pub fn time(&self, level: usize) -> f64 {
        self.t0 + level as f64 * self.dt
    }

    pub fn center_time(&self) -> f64 {
        self.time(self.center())
    }

    pub fn center_level(&self) -> &[f64] {
        &self.levels[self.center()]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for l in out.levels.iter_mut() {
            for x in l.iter_mut() {
                *x *= s;
            }
        }
        out
    }
}

/// What a [`MetricBlock`] stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricRole {
    /// The full metric `g`.
    Metric,
    /// `h = g - m`.
    Perturbation,
    /// The Schwarzschild-tail part `h0`.
    Background,
    /// The remainder `h1 = h - h0`.
    Remainder,
    /// `H^{mu nu} = g^{mu nu} - m^{mu nu}` (upper indices).
    InversePerturbation,
}

/// A symmetric 2-tensor field on a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricBlock {
    pub grid: Grid3,
    pub t0: f64,
    pub dt: f64,
    pub role: MetricRole,
    pub levels: Vec<Vec<SymTensor2>>,
}

impl MetricBlock {
    pub fn from_fn(
        grid: Grid3,
        t_center: f64,
        dt: f64,
        n_levels: usize,
        role: MetricRole,
        mut f: impl FnMut(f64, [f64; 3]) -> SymTensor2,
    ) -> Self {
        let t0 = t_center - dt * ((n_levels - 1) / 2) as f64;
        let levels = (0..n_levels)
            .map(|l| {
                let t = t0 + l as f64 * dt;
                (0..grid.len()).map(|q| f(t, grid.point_of(q))).collect()
            })
            .collect();
        Self {
            grid,
            t0,
            dt,
            role,
            levels,
        }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn center(&self) -> usize {
        (self.levels.len() - 1) / 2
    }

    pub fn time(&self, level: usize) -> f64 {
        self.t0 + level as f64 * self.dt
    }

    pub fn center_time(&self) -> f64 {
        self.time(self.center())
    }

    /// The full metric at a point, adding `m` when the block stores `h`.
    pub fn metric_at(&self, level: usize, q: usize) -> SymTensor2 {
        let p = self.levels[level][q];
        match self.role {
            MetricRole::Metric => p,
            _ => p.add(&SymTensor2::minkowski()),
        }
    }

    /// One coordinate component as a scalar block.
    pub fn component(&self, mu: usize, nu: usize) -> ScalarBlock {
        ScalarBlock {
            grid: self.grid,
            t0: self.t0,
            dt: self.dt,
            levels: self
                .levels
                .iter()
                .map(|l| l.iter().map(|p| p.get(mu, nu)).collect())
                .collect(),
        }
    }

    pub fn map(
        &self,
        role: MetricRole,
        mut f: impl FnMut(f64, [f64; 3], &SymTensor2) -> SymTensor2,
    ) -> Self {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(l, lev)| {
                let t = self.time(l);
                lev.iter()
                    .enumerate()
                    .map(|(q, p)| f(t, self.grid.point_of(q), p))
                    .collect()
            })
            .collect();
        Self {
            grid: self.grid,
            t0: self.t0,
            dt: self.dt,
            role,
            levels,
        }
    }
}

/// How ghost cells beyond a face are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceRule {
    /// Wrap around to the opposite face.
    Periodic,
    /// Mirror through the face, multiplied by the field's parity.
    Reflect,
    /// Polynomial extrapolation from the interior.
    Extrapolate,
    /// Leave ghosts untouched (caller fills them).
    Fixed,
}

/// A grid padded by `ghost` cells on every side, with a rule per face.
///
/// `faces[2 * axis]` is the low face of `axis`, `faces[2 * axis + 1]` the
/// high face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Padded {
    pub interior: Grid3,
    pub ghost: usize,
    pub np: [usize; 3],
    pub faces: [FaceRule; 6],
}

impl Padded {
    pub fn new(interior: Grid3, ghost: usize, faces: [FaceRule; 6]) -> Self {
        let np = [
            interior.n[0] + 2 * ghost,
            interior.n[1] + 2 * ghost,
            interior.n[2] + 2 * ghost,
        ];
        Self {
            interior,
            ghost,
            np,
            faces,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.np[0] * self.np[1] * self.np[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Padded index of interior point `(i, j, k)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        let g = self.ghost;
        (i + g) + self.np[0] * ((j + g) + self.np[1] * (k + g))
    }

    #[inline]
    fn raw(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.np[0] * (j + self.np[1] * k)
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.np[0],
            _ => self.np[0] * self.np[1],
        }
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }

    /// Copy an interior array into a padded one.
    pub fn embed(&self, src: &[f64], dst: &mut [f64]) {
        let n = self.interior.n;
        for k in 0..n[2] {
            for j in 0..n[1] {
                let s = self.interior.idx(0, j, k);
                let d = self.idx(0, j, k);
                dst[d..d + n[0]].copy_from_slice(&src[s..s + n[0]]);
            }
        }
    }

    /// Embed an interior field and fill its ghosts.
    pub fn pad(&self, f: &[f64], parity: [f64; 3]) -> Vec<f64> {
        let mut out = self.zeros();
        self.embed(f, &mut out);
        self.fill_ghosts(&mut out, parity);
        out
    }

    /// Padded index of every interior point, in interior order.
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.interior.len())
            .map(|q| {
                let [i, j, k] = self.interior.ijk(q);
                self.idx(i, j, k)
            })
            .collect()
    }

    /// Padded indices whose every coordinate lies at least `margin` cells
    /// from the padded edge.
    pub fn inner_indices(&self, margin: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for k in margin..self.np[2] - margin {
            for j in margin..self.np[1] - margin {
                for i in margin..self.np[0] - margin {
                    out.push(self.raw(i, j, k));
                }
            }
        }
        out
    }

    /// Coordinates of a padded point (ghosts included).
    pub fn coord_of(&self, p: usize) -> [f64; 3] {
        let i = p % self.np[0];
        let r = p / self.np[0];
        let (j, k) = (r % self.np[1], r / self.np[1]);
        let g = self.ghost as f64;
        let c = |a: usize, m: usize| self.interior.lo[a] + (m as f64 - g) * self.interior.dx;
        [c(0, i), c(1, j), c(2, k)]
    }

    /// Copy the interior of a padded array out.
    pub fn extract(&self, src: &[f64]) -> Vec<f64> {
        let n = self.interior.n;
        let mut out = vec![0.0; self.interior.len()];
        for k in 0..n[2] {
            for j in 0..n[1] {
                let s = self.idx(0, j, k);
                let d = self.interior.idx(0, j, k);
                out[d..d + n[0]].copy_from_slice(&src[s..s + n[0]]);
            }
        }
        out
    }

    /// Fill all ghost cells of `f`. `parity[axis]` multiplies reflected
    /// values across faces of that axis.
    ///
    /// Axes are processed in order over the full extent of the already
    /// filled axes, so edges and corners are covered.
    pub fn fill_ghosts(&self, f: &mut [f64], parity: [f64; 3]) {
        let g = self.ghost;
        for axis in 0..3 {
            let n = self.interior.n[axis];
            let (a1, a2) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            // Lines along `axis`: loop over the other two padded indices,
            // restricted to ranges already valid.
            let range = |ax: usize| -> (usize, usize) {
                if ax < axis {
                    (0, self.np[ax])
                } else {
                    (g, g + self.interior.n[ax])
                }
            };
            let (lo1, hi1) = range(a1);
            let (lo2, hi2) = range(a2);
            let st = self.stride(axis);
            for c2 in lo2..hi2 {
                for c1 in lo1..hi1 {
                    let mut pos = [0usize; 3];
                    pos[a1] = c1;
                    pos[a2] = c2;
                    pos[axis] = 0;
                    let base = self.raw(pos[0], pos[1], pos[2]);
                    let at = |m: usize| base + m * st;
                    for side in 0..2 {
                        let rule = self.faces[2 * axis + side];
                        for d in 1..=g {
                            // Ghost `d` cells outside the face.
                            let (gi, mirror, wrap) = if side == 0 {
                                (g - d, g + d - 1, g + n - d)
                            } else {
                                (g + n - 1 + d, g + n - d, g + d - 1)
                            };
                            match rule {
                                FaceRule::Periodic => f[at(gi)] = f[at(wrap)],
                                FaceRule::Reflect => f[at(gi)] = parity[axis] * f[at(mirror)],
                                FaceRule::Extrapolate => {
                                    // Quadratic extrapolation from the three
                                    // nearest known cells.
                                    let (p1, p2, p3) = if side == 0 {
                                        (gi + 1, gi + 2, gi + 3)
                                    } else {
                                        (gi - 1, gi - 2, gi - 3)
                                    };
                                    f[at(gi)] = 3.0 * f[at(p1)] - 3.0 * f[at(p2)] + f[at(p3)];
                                }
                                FaceRule::Fixed => {}
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Whether a grid covers the full box or one octant of a field that is
/// reflection symmetric in every coordinate plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symmetry {
    #[default]
    Full,
    Octant,
}

impl Symmetry {
    /// Face rules with `outer` on the boundary faces and reflection on the
    /// symmetry planes.
    pub fn faces(self, outer: FaceRule) -> [FaceRule; 6] {
        match self {
            Symmetry::Full => [outer; 6],
            Symmetry::Octant => [
                FaceRule::Reflect,
                outer,
                FaceRule::Reflect,
                outer,
                FaceRule::Reflect,
                outer,
            ],
        }
    }

    /// Copies of the grid making up the whole domain.
    pub fn volume_factor(self) -> f64 {
        match self {
            Symmetry::Full => 1.0,
            Symmetry::Octant => 8.0,
        }
    }

    /// Whether the low face of each axis is a symmetry plane.
    pub fn is_mirror(self) -> bool {
        self == Symmetry::Octant
    }

    /// Radius of the largest ball centred at the origin inside the domain.
    pub fn inscribed_radius(self, grid: &Grid3) -> f64 {
        let w = grid.n.iter().copied().min().unwrap_or(0) as f64 * grid.dx;
        match self {
            Symmetry::Full => 0.5 * w,
            Symmetry::Octant => w,
        }
    }

    /// Distance in cells from point `ijk` to the nearest outer (non-mirror)
    /// face.
    pub fn edge_distance(self, grid: &Grid3, ijk: [usize; 3]) -> usize {
        (0..3)
            .map(|a| {
                let hi = grid.n[a] - 1 - ijk[a];
                if self.is_mirror() {
                    hi
                } else {
                    hi.min(ijk[a])
                }
            })
            .min()
            .unwrap_or(0)
    }
}

/// Reflection parity of a tensor component with the given spacetime
/// indices: `(-1)^k` per axis, with `k` the number of indices equal to it.
pub fn component_parity(indices: &[usize]) -> [f64; 3] {
    let mut p = [1.0; 3];
    for &i in indices {
        if i > 0 {
            p[i - 1] = -p[i - 1];
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_cube_has_no_origin_point() {
        let g = Grid3::centered_cube(8, 4.0);
        assert_eq!(g.dx, 1.0);
        assert_eq!(g.point(0, 0, 0), [-3.5; 3]);
        assert_eq!(g.point(4, 4, 4), [0.5; 3]);
        for q in 0..g.len() {
            assert!(crate::math::hypot3(g.point_of(q)) > 0.0);
        }
    }

    #[test]
    fn index_round_trip() {
        let g = Grid3::new([3, 4, 5], [0.0; 3], 1.0);
        for q in 0..g.len() {
            let [i, j, k] = g.ijk(q);
            assert_eq!(g.idx(i, j, k), q);
        }
    }

    #[test]
    fn periodic_ghosts_wrap() {
        let grid = Grid3::new([6, 5, 4], [0.0; 3], 1.0);
        let p = Padded::new(grid, 3, [FaceRule::Periodic; 6]);
        let f = grid.sample(|x| x[0] + 10.0 * x[1] + 100.0 * x[2]);
        let mut fp = p.zeros();
        p.embed(&f, &mut fp);
        p.fill_ghosts(&mut fp, [1.0; 3]);
        // Corner ghost (-1, -1, -1) equals interior (5, 4, 3).
        let corner = fp[p.idx(0, 0, 0) - 1 - p.np[0] - p.np[0] * p.np[1]];
        assert_eq!(corner, f[grid.idx(5, 4, 3)]);
        assert_eq!(p.extract(&fp), f);
    }

    #[test]
    fn reflect_and_extrapolate() {
        let grid = Grid3::octant(6, 6.0);
        let mut faces = [FaceRule::Extrapolate; 6];
        faces[0] = FaceRule::Reflect;
        faces[2] = FaceRule::Reflect;
        faces[4] = FaceRule::Reflect;
        let p = Padded::new(grid, 3, faces);
        // Odd in x, even in y and z, quadratic in every variable.
        let fun = |x: [f64; 3]| x[0] * (1.0 + x[1] * x[1] + 0.5 * x[2] * x[2]);
        let f = grid.sample(fun);
        let mut fp = p.zeros();
        p.embed(&f, &mut fp);
        p.fill_ghosts(&mut fp, [-1.0, 1.0, 1.0]);
        let np = p.np;
        for k in 0..np[2] {
            for j in 0..np[1] {
                for i in 0..np[0] {
                    let x = [
                        grid.lo[0] + (i as f64 - 3.0) * grid.dx,
                        grid.lo[1] + (j as f64 - 3.0) * grid.dx,
                        grid.lo[2] + (k as f64 - 3.0) * grid.dx,
                    ];
                    let v = fp[i + np[0] * (j + np[1] * k)];
                    assert!((v - fun(x)).abs() < 1e-9, "{i} {j} {k}: {v} vs {}", fun(x));
                }
            }
        }
    }
}
