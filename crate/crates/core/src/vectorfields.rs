//! The Minkowski vector fields: translations `d_a`, rotations and boosts
//! `Omega_ab = x_a d_b - x_b d_a` (indices lowered with `m`, so
//! `x_0 = -t`), and the scaling field `S = t d_t + x^i d_i`.
//!
//! Every field satisfies `box (Z phi) = (Z + c_Z) box phi` for the flat
//! wave operator, with `c_Z = 2` for scaling and zero otherwise.

use alloc::vec::Vec;

use crate::analytic::SpacetimeFunction;
use crate::error::{Error, Result};
use crate::grid::{check_levels, Grid3, ScalarBlock};
use crate::math::{abs, hypot3};
use crate::stencil;
use crate::tensor::{Vec4, ETA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    Translation(usize),
    /// `Omega_ab` with `a < b`; a boost when `a = 0`.
    Rotation(usize, usize),
    Scaling,
}

pub const GENERATORS: [Generator; 11] = [
    Generator::Translation(0),
    Generator::Translation(1),
    Generator::Translation(2),
    Generator::Translation(3),
    Generator::Rotation(0, 1),
    Generator::Rotation(0, 2),
    Generator::Rotation(0, 3),
    Generator::Rotation(1, 2),
    Generator::Rotation(1, 3),
    Generator::Rotation(2, 3),
    Generator::Scaling,
];

impl Generator {
    pub fn rotation(a: usize, b: usize) -> Result<Self> {
        if a > 3 || b > 3 {
            return Err(Error::IndexOutOfRange("rotation index"));
        }
        match a.cmp(&b) {
            core::cmp::Ordering::Less => Ok(Generator::Rotation(a, b)),
            core::cmp::Ordering::Greater => Ok(Generator::Rotation(b, a)),
            core::cmp::Ordering::Equal => Err(Error::DegenerateIndexPair(a)),
        }
    }

    /// Contravariant components `Z^mu` at `(t, x)`.
    pub fn coefficients(&self, t: f64, x: [f64; 3]) -> Vec4 {
        let up = [t, x[0], x[1], x[2]];
        match *self {
            Generator::Translation(a) => {
                let mut z = [0.0; 4];
                z[a] = 1.0;
                z
            }
            Generator::Rotation(a, b) => {
                let mut z = [0.0; 4];
                z[b] = ETA[a] * up[a];
                z[a] = -ETA[b] * up[b];
                z
            }
            Generator::Scaling => up,
        }
    }

    /// `c_Z` in `[Z, box] = -c_Z box`.
    pub fn c_z(&self) -> f64 {
        match self {
            Generator::Scaling => 2.0,
            _ => 0.0,
        }
    }

    /// The constant matrix `c[a][mu] = d_a Z^mu`.
    pub fn coefficient_gradient(&self) -> [[f64; 4]; 4] {
        let mut c = [[0.0; 4]; 4];
        match *self {
            Generator::Translation(_) => {}
            Generator::Rotation(a, b) => {
                c[a][b] = ETA[a];
                c[b][a] = -ETA[b];
            }
            Generator::Scaling => {
                for (a, row) in c.iter_mut().enumerate() {
                    row[a] = 1.0;
                }
            }
        }
        c
    }

    /// Whether the field has a time component somewhere.
    pub fn uses_time(&self) -> bool {
        match *self {
            Generator::Translation(a) => a == 0,
            Generator::Rotation(a, _) => a == 0,
            Generator::Scaling => true,
        }
    }

    pub fn name(&self) -> &'static str {
        const ROT: [[&str; 4]; 4] = [
            ["", "O01", "O02", "O03"],
            ["", "", "O12", "O13"],
            ["", "", "", "O23"],
            ["", "", "", ""],
        ];
        match *self {
            Generator::Translation(a) => ["d0", "d1", "d2", "d3"][a],
            Generator::Rotation(a, b) => ROT[a][b],
            Generator::Scaling => "S",
        }
    }
}

pub fn z_coefficients(gen: Generator, t: f64, x: [f64; 3]) -> Vec4 {
    gen.coefficients(t, x)
}

/// An ordered product `Z^I = Z^{i1} ... Z^{ik}`, at most three factors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiIndex(Vec<Generator>);

impl MultiIndex {
    pub const MAX_LEN: usize = 3;

    pub fn new(gens: &[Generator]) -> Result<Self> {
        if gens.len() > Self::MAX_LEN {
            return Err(Error::InvalidParameter("multi-index longer than 3".into()));
        }
        Ok(Self(gens.to_vec()))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Time levels consumed on each side of the window.
    pub fn time_depth(&self) -> usize {
        self.0.iter().filter(|g| g.uses_time()).count()
    }

    /// All multi-indices of length at most `n` (`11^0 + ... + 11^n` of them).
    pub fn all_up_to(n: usize) -> Vec<Self> {
        let mut out = alloc::vec![Self::empty()];
        let mut frontier = alloc::vec![Self::empty()];
        for _ in 0..n.min(Self::MAX_LEN) {
            let mut next = Vec::new();
            for m in &frontier {
                for g in GENERATORS {
                    let mut v = m.0.clone();
                    v.push(g);
                    next.push(Self(v));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

/// `Z phi` by finite differences.
///
/// Fields with a time component consume one level on each side of the
/// window; the result then has two levels fewer.
pub fn apply_z(gen: Generator, block: &ScalarBlock) -> Result<ScalarBlock> {
    stencil::check_grid(&block.grid)?;
    let grid = block.grid;
    let (first, last) = if gen.uses_time() {
        check_levels(block.n_levels(), 3)?;
        (1, block.n_levels() - 1)
    } else {
        (0, block.n_levels())
    };
    let mut levels = Vec::with_capacity(last - first);
    for l in first..last {
        let t = block.time(l);
        let f = &block.levels[l];
        let mut out = alloc::vec![0.0; grid.len()];
        match gen {
            Generator::Translation(0) => {
                for (q, o) in out.iter_mut().enumerate() {
                    *o = stencil::dt1(&block.levels, l, q, block.dt);
                }
            }
            Generator::Translation(a) => {
                for (q, o) in out.iter_mut().enumerate() {
                    *o = stencil::d1_at(&grid, f, a - 1, q);
                }
            }
            _ => {
                for (q, o) in out.iter_mut().enumerate() {
                    let z = gen.coefficients(t, grid.point_of(q));
                    let mut s = 0.0;
                    if z[0] != 0.0 {
                        s += z[0] * stencil::dt1(&block.levels, l, q, block.dt);
                    }
                    for a in 0..3 {
                        if z[a + 1] != 0.0 {
                            s += z[a + 1] * stencil::d1_at(&grid, f, a, q);
                        }
                    }
                    *o = s;
                }
            }
        }
        levels.push(out);
    }
    Ok(ScalarBlock {
        grid,
        t0: block.time(first),
        dt: block.dt,
        levels,
    })
}

/// `Z^I phi`, applying the rightmost factor first.
pub fn apply_multi(index: &MultiIndex, block: &ScalarBlock) -> Result<ScalarBlock> {
    check_levels(block.n_levels(), 2 * index.time_depth() + 1)?;
    let mut cur = block.clone();
    for g in index.generators().iter().rev() {
        cur = apply_z(*g, &cur)?;
    }
    Ok(cur)
}

/// Flat wave operator `-d_t^2 + Laplacian` on the centre level.
pub fn box_fd(block: &ScalarBlock) -> Result<Vec<f64>> {
    check_levels(block.n_levels(), 3)?;
    stencil::check_grid(&block.grid)?;
    let c = block.center();
    let lap = stencil::laplacian(&block.grid, &block.levels[c]);
    Ok(lap
        .iter()
        .enumerate()
        .map(|(q, l)| l - stencil::dt2(&block.levels, c, q, block.dt))
        .collect())
}

/// Residual of the commutator law `box(Z phi) = (Z + c_Z) box phi`.
///
/// `Z phi` is sampled exactly from the jet of `phi` on three levels around
/// `t`, the wave operator is applied by finite differences, and the right
/// side is evaluated from third derivatives of `phi`. The sup
/// over interior points within `radius` of the origin is the truncation
/// error of the discrete wave operator acting on `Z phi`.
pub fn commutator_residual(
    gen: Generator,
    phi: &impl SpacetimeFunction,
    grid: Grid3,
    t: f64,
    dt: f64,
    radius: f64,
) -> Result<f64> {
    let zphi = ScalarBlock::from_fn(grid, t, dt, 3, |s, x| {
        let j = phi.jet(s, x);
        let z = gen.coefficients(s, x);
        (0..4).map(|a| z[a] * j.d1[a]).sum()
    });
    let lhs = box_fd(&zphi)?;
    let mut sup = 0.0f64;
    for (q, l) in lhs.iter().enumerate() {
        let ijk = grid.ijk(q);
        if (0..3).any(|a| ijk[a] < 2 || ijk[a] + 2 >= grid.n[a]) {
            continue;
        }
        let x = grid.point_of(q);
        if hypot3(x) > radius {
            continue;
        }
        let j = phi.jet(t, x);
        let z = gen.coefficients(t, x);
        let rhs: f64 = (0..4).map(|c| z[c] * j.d_box(c)).sum::<f64>() + gen.c_z() * j.box_m();
        sup = sup.max(abs(l - rhs));
    }
    Ok(sup)
}

/// Fully discrete commutator `sup |box_h(Z_h phi) - (Z_h + c_Z) box_h phi|`
/// on a sampled window of at least five levels, over points where only
/// centred stencils are used.
///
/// The discrete product rules make this vanish to rounding for every field
/// except scaling, whose time part leaves an `O(dt^2)` remainder.
pub fn discrete_commutator_residual(gen: Generator, phi: &ScalarBlock) -> Result<f64> {
    check_levels(phi.n_levels(), 5)?;
    let zphi = apply_z(gen, phi)?;
    let lhs_block = if gen.uses_time() {
        zphi
    } else {
        trim(&zphi, 1)
    };
    let lhs = box_fd(&lhs_block)?;
    // box phi on the three central levels, then Z of it.
    let c = phi.center();
    let mut boxes = Vec::new();
    for l in (c - 1)..=(c + 1) {
        let sub = ScalarBlock {
            grid: phi.grid,
            t0: phi.time(l - 1),
            dt: phi.dt,
            levels: phi.levels[l - 1..=l + 1].to_vec(),
        };
        boxes.push(box_fd(&sub)?);
    }
    let box_block = ScalarBlock {
        grid: phi.grid,
        t0: phi.time(c - 1),
        dt: phi.dt,
        levels: boxes,
    };
    let zbox = apply_z(gen, &box_block)?;
    let zc = zbox.center();
    let mid = &box_block.levels[1];
    let n = phi.grid.n;
    let mut sup = 0.0f64;
    for q in 0..phi.grid.len() {
        let ijk = phi.grid.ijk(q);
        if (0..3).any(|a| ijk[a] < 4 || ijk[a] + 4 >= n[a]) {
            continue;
        }
        sup = sup.max(abs(lhs[q] - zbox.levels[zc][q] - gen.c_z() * mid[q]));
    }
    Ok(sup)
}

fn trim(b: &ScalarBlock, k: usize) -> ScalarBlock {
    ScalarBlock {
        grid: b.grid,
        t0: b.time(k),
        dt: b.dt,
        levels: b.levels[k..b.n_levels() - k].to_vec(),
    }
}

/// Largest coefficient mismatch of the reconstructions of `d_t`, `d_r` and
/// `d_i` from the vector fields, valid off the light cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameIdentityResidual {
    pub time: f64,
    pub radial: f64,
    pub spatial: [f64; 3],
}

/// Reconstructions valid on the cone too: `d_s = (d_t + d_r)/2` from `S`
/// and boosts, and the angular derivatives from rotations (`r > 0`) and
/// from boosts (`t != 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeIdentityResidual {
    pub null: f64,
    pub angular_rotations: [f64; 3],
    pub angular_boosts: Option<[f64; 3]>,
}

fn combo(t: f64, x: [f64; 3], terms: &[(f64, Generator)]) -> Vec4 {
    let mut v = [0.0; 4];
    for &(c, g) in terms {
        let z = g.coefficients(t, x);
        for a in 0..4 {
            v[a] += c * z[a];
        }
    }
    v
}

fn mismatch(a: Vec4, b: Vec4) -> f64 {
    (0..4).map(|k| abs(a[k] - b[k])).fold(0.0, f64::max)
}

fn boost(i: usize) -> Generator {
    Generator::Rotation(0, i + 1)
}

/// `Omega_{ij}` for spatial `i, j` in either order (antisymmetric).
fn rot_terms(i: usize, j: usize, c: f64) -> Option<(f64, Generator)> {
    match i.cmp(&j) {
        core::cmp::Ordering::Less => Some((c, Generator::Rotation(i + 1, j + 1))),
        core::cmp::Ordering::Greater => Some((-c, Generator::Rotation(j + 1, i + 1))),
        core::cmp::Ordering::Equal => None,
    }
}

/// Check
/// `(t^2 - r^2) d_t = t S + x^i Omega_0i`,
/// `(t^2 - r^2) d_r = -t omega^i Omega_0i - r S`,
/// `(t^2 - r^2) d_i = x^j Omega_ij - t Omega_0i - x_i S`.
pub fn frame_identity_residual(t: f64, x: [f64; 3]) -> Result<FrameIdentityResidual> {
    let r = hypot3(x);
    let den = t * t - r * r;
    let scale = t * t + r * r;
    if abs(den) <= 1e-12 * scale.max(1e-300) {
        return Err(Error::OnCone);
    }
    let s = Generator::Scaling;
    let mut terms = alloc::vec![(t / den, s)];
    for i in 0..3 {
        terms.push((x[i] / den, boost(i)));
    }
    let time = mismatch(combo(t, x, &terms), [1.0, 0.0, 0.0, 0.0]);

    let radial = if r > 0.0 {
        let w = [x[0] / r, x[1] / r, x[2] / r];
        let mut terms = alloc::vec![(-r / den, s)];
        for i in 0..3 {
            terms.push((-t * w[i] / den, boost(i)));
        }
        mismatch(combo(t, x, &terms), [0.0, w[0], w[1], w[2]])
    } else {
        0.0
    };

    let mut spatial = [0.0; 3];
    for i in 0..3 {
        let mut terms = alloc::vec![(-x[i] / den, s), (-t / den, boost(i))];
        for j in 0..3 {
            if let Some(tm) = rot_terms(i, j, x[j] / den) {
                terms.push(tm);
            }
        }
        let mut e = [0.0; 4];
        e[i + 1] = 1.0;
        spatial[i] = mismatch(combo(t, x, &terms), e);
    }
    Ok(FrameIdentityResidual {
        time,
        radial,
        spatial,
    })
}

/// Check `d_s = (S - omega^i Omega_0i) / (2 (t + r))`,
/// `dbar_i = -omega^j Omega_ij / r` and
/// `dbar_i = (omega_i omega^j Omega_0j - Omega_0i) / t`.
pub fn cone_identity_residual(t: f64, x: [f64; 3]) -> Result<ConeIdentityResidual> {
    let r = hypot3(x);
    if !(r > 0.0) {
        return Err(Error::FrameAtOrigin);
    }
    if !(t + r > 0.0) {
        return Err(Error::InvalidParameter("need t + r > 0".into()));
    }
    let w = [x[0] / r, x[1] / r, x[2] / r];
    let mut terms = alloc::vec![(1.0 / (2.0 * (t + r)), Generator::Scaling)];
    for i in 0..3 {
        terms.push((-w[i] / (2.0 * (t + r)), boost(i)));
    }
    let null = mismatch(
        combo(t, x, &terms),
        [0.5, 0.5 * w[0], 0.5 * w[1], 0.5 * w[2]],
    );

    let dbar = |i: usize| {
        let mut e = [0.0; 4];
        for a in 0..3 {
            e[a + 1] = if a == i { 1.0 } else { 0.0 } - w[i] * w[a];
        }
        e
    };
    let mut angular_rotations = [0.0; 3];
    for (i, out) in angular_rotations.iter_mut().enumerate() {
        let terms: Vec<_> = (0..3).filter_map(|j| rot_terms(i, j, -w[j] / r)).collect();
        *out = mismatch(combo(t, x, &terms), dbar(i));
    }
    let angular_boosts = if t != 0.0 {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            let mut terms = alloc::vec![(-1.0 / t, boost(i))];
            for j in 0..3 {
                terms.push((w[i] * w[j] / t, boost(j)));
            }
            *o = mismatch(combo(t, x, &terms), dbar(i));
        }
        Some(out)
    } else {
        None
    };
    Ok(ConeIdentityResidual {
        null,
        angular_rotations,
        angular_boosts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::SpacetimeGaussian;
    use crate::nullframe::frame_at;

    #[test]
    fn coefficient_examples() {
        assert_eq!(
            z_coefficients(Generator::Scaling, 2.0, [1.0, 0.0, 0.0]),
            [2.0, 1.0, 0.0, 0.0]
        );
        assert_eq!(
            z_coefficients(Generator::Rotation(0, 1), 1.0, [3.0, 0.0, 0.0]),
            [-3.0, -1.0, 0.0, 0.0]
        );
        assert_eq!(
            z_coefficients(Generator::Translation(2), 5.0, [1.0, 2.0, 3.0]),
            [0.0, 0.0, 1.0, 0.0]
        );
        // Omega_12 = x_1 d_2 - x_2 d_1.
        assert_eq!(
            z_coefficients(Generator::Rotation(1, 2), 0.0, [2.0, 3.0, 0.0]),
            [0.0, -3.0, 2.0, 0.0]
        );
        assert_eq!(
            Generator::rotation(2, 2),
            Err(Error::DegenerateIndexPair(2))
        );
    }

    #[test]
    fn coefficient_gradients_and_null_contraction() {
        for g in GENERATORS {
            let c = g.coefficient_gradient();
            // Linear coefficients: Z(x) - Z(0) = c^T x.
            let p = [0.7, -1.1, 0.3, 2.0];
            let z = g.coefficients(p[0], [p[1], p[2], p[3]]);
            let z0 = g.coefficients(0.0, [0.0; 3]);
            for mu in 0..4 {
                let lin: f64 = (0..4).map(|a| c[a][mu] * p[a]).sum();
                assert!((z[mu] - z0[mu] - lin).abs() < 1e-15);
            }
            // c_LL = d_a Z_b L^a L^b = 0.
            let f = frame_at([0.3, -0.8, 0.5]).unwrap();
            let mut cll = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    cll += c[a][b] * ETA[b] * f.l[a] * f.l[b];
                }
            }
            assert!(cll.abs() < 1e-15, "{}", g.name());
        }
    }

    #[test]
    fn apply_z_on_polynomials() {
        let grid = Grid3::centered_cube(8, 2.0);
        let b = ScalarBlock::from_fn(grid, 1.0, 0.1, 3, |t, _| t * t);
        let s = apply_z(Generator::Scaling, &b).unwrap();
        for v in s.center_level() {
            assert!((v - 2.0).abs() < 1e-12);
        }
        let b = ScalarBlock::from_fn(grid, 0.0, 0.1, 1, |_, x| x[0]);
        let o = apply_z(Generator::Rotation(1, 2), &b).unwrap();
        for (q, v) in o.levels[0].iter().enumerate() {
            assert!((v + grid.point_of(q)[1]).abs() < 1e-12);
        }
        assert!(matches!(
            apply_z(Generator::Translation(0), &b),
            Err(Error::InsufficientWindow { .. })
        ));
    }

    #[test]
    fn scaling_squared_is_euler_eigenvalue() {
        let grid = Grid3::centered_cube(10, 2.0);
        let b = ScalarBlock::from_fn(grid, 1.0, 0.1, 5, |t, x| t * t * x[0]);
        let i = MultiIndex::new(&[Generator::Scaling, Generator::Scaling]).unwrap();
        let r = apply_multi(&i, &b).unwrap();
        assert_eq!(r.n_levels(), 1);
        for (q, v) in r.levels[0].iter().enumerate() {
            let want = 9.0 * grid.point_of(q)[0];
            assert!((v - want).abs() < 1e-9, "{v} vs {want}");
        }
        let id = apply_multi(&MultiIndex::empty(), &b).unwrap();
        assert_eq!(id, b);
    }

    #[test]
    fn leibniz_rule_on_low_degree_products() {
        let grid = Grid3::centered_cube(9, 1.5);
        let f = |t: f64, x: [f64; 3]| 1.0 + x[0] + t * x[1];
        let g = |t: f64, x: [f64; 3]| 2.0 - x[2] * x[2] + t;
        let bf = ScalarBlock::from_fn(grid, 0.5, 0.1, 3, f);
        let bg = ScalarBlock::from_fn(grid, 0.5, 0.1, 3, g);
        let bfg = ScalarBlock::from_fn(grid, 0.5, 0.1, 3, |t, x| f(t, x) * g(t, x));
        for gen in GENERATORS {
            let (zf, zg, zfg) = (
                apply_z(gen, &bf).unwrap(),
                apply_z(gen, &bg).unwrap(),
                apply_z(gen, &bfg).unwrap(),
            );
            let l = zfg.n_levels() / 2;
            let t = zfg.time(l);
            for q in 0..grid.len() {
                let x = grid.point_of(q);
                let want = zf.levels[l][q] * g(t, x) + f(t, x) * zg.levels[l][q];
                assert!((zfg.levels[l][q] - want).abs() < 1e-10, "{}", gen.name());
            }
        }
    }

    #[test]
    fn time_derivative_converges_at_second_order() {
        let err = |dt: f64| {
            let grid = Grid3::centered_cube(6, 1.0);
            let b = ScalarBlock::from_fn(grid, 0.4, dt, 3, |t, _| crate::math::sin(t));
            let d = apply_z(Generator::Translation(0), &b).unwrap();
            (d.levels[0][0] - crate::math::cos(0.4)).abs()
        };
        let r = err(0.1) / err(0.05);
        assert!((r - 4.0).abs() < 0.1, "{r}");
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(MultiIndex::all_up_to(0).len(), 1);
        assert_eq!(MultiIndex::all_up_to(2).len(), 1 + 11 + 121);
        assert!(MultiIndex::new(&[Generator::Scaling; 4]).is_err());
    }

    #[test]
    fn commutator_law_converges() {
        let phi = crate::analytic::PlaneWave {
            amp: 1.0,
            k: [0.9, 0.5, -0.4, 0.6],
            phase: 0.3,
        };
        for g in GENERATORS {
            let run = |n: usize| {
                let grid = Grid3::centered_cube(n, 3.0);
                commutator_residual(g, &phi, grid, 0.3, grid.dx, 2.2).unwrap()
            };
            let r = run(24) / run(48);
            assert!(r > 3.5 && r < 4.5, "{}: {r}", g.name());
        }
    }

    #[test]
    fn rotation_of_radial_function_vanishes() {
        let phi = SpacetimeGaussian {
            amp: 1.0,
            center: [0.0; 4],
            width: 1.0,
        };
        let grid = Grid3::centered_cube(12, 2.0);
        let r = commutator_residual(
            Generator::Rotation(1, 2),
            &phi,
            grid,
            0.2,
            0.05,
            f64::INFINITY,
        )
        .unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn discrete_commutator_is_exact_except_scaling() {
        let phi = SpacetimeGaussian {
            amp: 1.0,
            center: [0.1, 0.2, -0.1, 0.3],
            width: 1.0,
        };
        let grid = Grid3::centered_cube(16, 2.0);
        let b = ScalarBlock::from_fn(grid, 0.3, grid.dx, 5, |t, x| phi.value(t, x));
        for g in GENERATORS {
            let r = discrete_commutator_residual(g, &b).unwrap();
            if g == Generator::Scaling {
                assert!(r > 1e-6);
            } else {
                assert!(r < 1e-9, "{}: {r}", g.name());
            }
        }
    }

    #[test]
    fn frame_identities_off_cone() {
        let r = frame_identity_residual(2.0, [1.0, 0.0, 0.0]).unwrap();
        assert!(r.time < 1e-15 && r.radial < 1e-15);
        let r = frame_identity_residual(0.7, [0.3, -1.4, 2.2]).unwrap();
        assert!(r.time < 1e-14 && r.radial < 1e-14 && r.spatial.iter().all(|x| *x < 1e-14));
        assert_eq!(
            frame_identity_residual(1.0, [0.6, 0.8, 0.0]),
            Err(Error::OnCone)
        );
    }

    #[test]
    fn cone_identities_hold_on_cone() {
        let c = cone_identity_residual(1.0, [0.6, 0.8, 0.0]).unwrap();
        assert!(c.null < 1e-15);
        assert!(c.angular_rotations.iter().all(|x| *x < 1e-15));
        assert!(c.angular_boosts.unwrap().iter().all(|x| *x < 1e-15));
        let c0 = cone_identity_residual(0.0, [0.5, -0.2, 0.9]).unwrap();
        assert!(c0.angular_rotations.iter().all(|x| *x < 1e-15));
        assert!(c0.angular_boosts.is_none());
    }
}
