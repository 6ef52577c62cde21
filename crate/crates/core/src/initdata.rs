//! Cauchy data for the Einstein-scalar system.
//!
//! Data are time symmetric and conformally flat: `g0 = phi^4 delta`,
//! `k0 = 0`, `psi1 = 0`, with `phi` solving the Lichnerowicz equation
//! `8 Lap phi = -|grad psi0|^2 phi`. The evolution slice, the split
//! `h = h0 + h1` off the Schwarzschild tail, and the initial weighted
//! energies are built from them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::{Gaussian, GaussianShell, SpatialProfile};
use crate::error::{Error, Result};
use crate::grid::{component_parity, FaceRule, Grid3, MetricBlock, MetricRole, Padded, Symmetry};
use crate::math::{abs, hypot3, powf, sqrt, PI};
use crate::stencil::{self, centered};
use crate::tensor::{invert3, SymTensor2};

/// Symmetric 3x3 tensor in the order `11, 12, 13, 22, 23, 33`.
pub type Sym3 = [f64; 6];

/// Index pairs of [`Sym3`] storage slots.
pub const SYM3_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
const S3: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

#[inline]
pub fn sym3_index(i: usize, j: usize) -> usize {
    S3[i][j]
}

fn sym3_matrix(s: &Sym3) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = s[S3[i][j]];
        }
    }
    m
}

/// Ghost width used by all slice derivatives: two composed centred first
/// derivatives reach four cells.
pub const GHOST: usize = 4;

/// Cells from an outer face below which slice residuals are not measured.
pub const CORE_MARGIN: usize = 4;

/// Hamiltonian and momentum residual allowed by [`build_cauchy_data`].
pub const CONSTRAINT_TOLERANCE: f64 = 1e-8;

/// Quintic smoothstep: 0 for `s <= 1/2`, 1 for `s >= 3/4`, two continuous
/// derivatives at the joints.
pub fn cutoff_chi(s: f64) -> f64 {
    if s <= 0.5 {
        0.0
    } else if s >= 0.75 {
        1.0
    } else {
        let x = 4.0 * (s - 0.5);
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

/// Shape of `psi0 / epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Gaussian { center: [f64; 3], width: f64 },
    Shell { r0: f64, width: f64 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Gaussian {
            center: [0.0; 3],
            width: 1.0,
        }
    }
}

impl Profile {
    pub fn value(&self, x: [f64; 3]) -> f64 {
        match *self {
            Profile::Gaussian { center, width } => Gaussian {
                amp: 1.0,
                center,
                width,
            }
            .value(x),
            Profile::Shell { r0, width } => GaussianShell {
                amp: 1.0,
                r0,
                width,
            }
            .value(x),
        }
    }

    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        match *self {
            Profile::Gaussian { center, width } => Gaussian {
                amp: 1.0,
                center,
                width,
            }
            .gradient(x),
            Profile::Shell { r0, width } => GaussianShell {
                amp: 1.0,
                r0,
                width,
            }
            .gradient(x),
        }
    }

    fn reflection_symmetric(&self) -> bool {
        match *self {
            Profile::Gaussian { center, .. } => center == [0.0; 3],
            Profile::Shell { .. } => true,
        }
    }
}

/// Iteration controls for the conformal-factor solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Conjugate-gradient stop: residual norm relative to the source.
    pub tol: f64,
    pub max_iter: usize,
    /// Fixed-point iterations on the monopole boundary amplitude.
    pub max_outer: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iter: 20_000,
            max_outer: 60,
        }
    }
}

/// Initial data `(g0, k0, psi0, psi1)` on a spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub grid: Grid3,
    pub symmetry: Symmetry,
    pub g0: Vec<Sym3>,
    pub k0: Vec<Sym3>,
    pub psi0: Vec<f64>,
    pub psi1: Vec<f64>,
    /// ADM mass read off the `1/r` tail of `g0`.
    pub mass: f64,
    pub epsilon: f64,
}

impl CauchyData {
    /// Flat, empty data.
    pub fn flat(grid: Grid3, symmetry: Symmetry) -> Self {
        let n = grid.len();
        Self {
            grid,
            symmetry,
            g0: vec![[1.0, 0.0, 0.0, 1.0, 0.0, 1.0]; n],
            k0: vec![[0.0; 6]; n],
            psi0: vec![0.0; n],
            psi1: vec![0.0; n],
            mass: 0.0,
            epsilon: 0.0,
        }
    }
}

/// Ghost-padded centred differentiation of grid fields. Ghosts are
/// extrapolated at outer faces and reflected on symmetry planes.
#[derive(Debug, Clone, Copy)]
pub struct SliceDiff {
    pub pad: Padded,
    pub symmetry: Symmetry,
    inv12h: f64,
}

impl SliceDiff {
    pub fn new(grid: Grid3, symmetry: Symmetry) -> Result<Self> {
        stencil::check_grid(&grid)?;
        Ok(Self {
            pad: Padded::new(grid, GHOST, symmetry.faces(FaceRule::Extrapolate)),
            symmetry,
            inv12h: 1.0 / (12.0 * grid.dx),
        })
    }

    pub fn pad(&self, f: &[f64], parity: [f64; 3]) -> Vec<f64> {
        self.pad.pad(f, parity)
    }

    /// Centred first derivative of a padded field at padded index `p`.
    #[inline]
    pub fn d1(&self, f: &[f64], axis: usize, p: usize) -> f64 {
        centered::d1(f, p, self.pad.stride(axis), self.inv12h)
    }

    /// Derivative of an interior field along `axis`, returned on the interior.
    pub fn derive(&self, f: &[f64], parity: [f64; 3], axis: usize) -> Vec<f64> {
        let fp = self.pad(f, parity);
        self.pad
            .interior_indices()
            .into_iter()
            .map(|p| self.d1(&fp, axis, p))
            .collect()
    }

    /// Whether interior point `q` is far enough from outer faces for
    /// composed derivatives to see interior data only.
    pub fn in_core(&self, q: usize) -> bool {
        let g = &self.pad.interior;
        self.symmetry.edge_distance(g, g.ijk(q)) >= CORE_MARGIN
    }
}

/// Small data with `psi0 = epsilon * profile`.
///
/// The conformal factor `phi = 1 + u` solves `(-Lap - V/8) u = V/8` with
/// `V = |grad psi0|^2`, by conjugate gradients. The Laplacian is the sum of
/// squared centred first derivatives, the same discretisation that
/// [`constraint_residual`] applies to `g0`, so the Hamiltonian residual is
/// set by the solver tolerance. Ghosts beyond outer faces hold the monopole
/// `A / r`, with `A` the total source over `4 pi`, iterated to a fixed
/// point.
pub fn generate_small_data(
    grid: Grid3,
    symmetry: Symmetry,
    profile: Profile,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<CauchyData> {
    if !(0.0..=0.1).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} outside [0, 0.1]"
        )));
    }
    if symmetry.is_mirror() && !profile.reflection_symmetric() {
        return Err(Error::InvalidParameter(
            "octant grids need a reflection-symmetric profile".into(),
        ));
    }
    let d = SliceDiff::new(grid, symmetry)?;
    let psi0: Vec<f64> = grid.sample(|x| epsilon * profile.value(x));
    let pp = d.pad(&psi0, [1.0; 3]);
    let v: Vec<f64> = d
        .pad
        .interior_indices()
        .into_iter()
        .map(|p| (0..3).map(|a| d.d1(&pp, a, p)).map(|g| g * g).sum())
        .collect();
    let u = solve_conformal(&d, &v, opts)?;
    let n = grid.len();
    let g0: Vec<Sym3> = u
        .iter()
        .map(|u| {
            let p4 = powf(1.0 + u, 4.0);
            [p4, 0.0, 0.0, p4, 0.0, p4]
        })
        .collect();
    let mass = fit_mass(&grid, symmetry, &g0)?;
    Ok(CauchyData {
        grid,
        symmetry,
        g0,
        k0: vec![[0.0; 6]; n],
        psi0,
        psi1: vec![0.0; n],
        mass,
        epsilon,
    })
}

#[derive(Debug, Clone, Copy)]
enum GhostSource {
    Copy(usize),
    /// `1 / r` at the ghost point, scaled by the boundary amplitude.
    Monopole(f64),
}

fn ghost_map(pad: &Padded, symmetry: Symmetry) -> Vec<(usize, GhostSource)> {
    let g = pad.ghost as isize;
    let n = pad.interior.n;
    let mut out = Vec::new();
    for k in 0..pad.np[2] {
        for j in 0..pad.np[1] {
            for i in 0..pad.np[0] {
                let s = [i as isize - g, j as isize - g, k as isize - g];
                if (0..3).all(|a| s[a] >= 0 && s[a] < n[a] as isize) {
                    continue;
                }
                let p = i + pad.np[0] * (j + pad.np[1] * k);
                let mut m = s;
                if symmetry.is_mirror() {
                    for v in m.iter_mut() {
                        if *v < 0 {
                            *v = -1 - *v;
                        }
                    }
                }
                let src = if (0..3).all(|a| m[a] >= 0 && m[a] < n[a] as isize) {
                    GhostSource::Copy(
                        pad.interior
                            .idx(m[0] as usize, m[1] as usize, m[2] as usize),
                    )
                } else {
                    GhostSource::Monopole(1.0 / hypot3(pad.coord_of(p)))
                };
                out.push((p, src));
            }
        }
    }
    out
}

fn solve_conformal(d: &SliceDiff, v: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
    let pad = &d.pad;
    let grid = pad.interior;
    let n = grid.len();
    let map = ghost_map(pad, d.symmetry);
    let idx = pad.interior_indices();
    let h2 = grid.dx * grid.dx;
    // Sum over axes of the composed first-derivative stencil.
    const W: [f64; 9] = [1.0, -16.0, 64.0, 16.0, -130.0, 16.0, 64.0, -16.0, 1.0];
    let lap = |f: &[f64], p: usize| -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            let st = pad.stride(a);
            for (m, w) in W.iter().enumerate() {
                s += w * f[p + m * st - 4 * st];
            }
        }
        s / (144.0 * h2)
    };
    let fill = |buf: &mut [f64], u: &[f64], amp: f64| {
        for &(p, src) in &map {
            buf[p] = match src {
                GhostSource::Copy(q) => u[q],
                GhostSource::Monopole(w) => amp * w,
            };
        }
    };
    let mut work = pad.zeros();
    let mut apply = |u: &[f64], out: &mut [f64]| {
        pad.embed(u, &mut work);
        fill(&mut work, u, 0.0);
        for q in 0..n {
            out[q] = -lap(&work, idx[q]) - 0.125 * v[q] * u[q];
        }
    };
    let vf = d.symmetry.volume_factor() * grid.cell_volume() / (4.0 * PI);
    let amplitude = |u: &[f64]| {
        vf * v
            .iter()
            .zip(u)
            .map(|(v, u)| 0.125 * v * (1.0 + u))
            .sum::<f64>()
    };

    let mut u = vec![0.0; n];
    let mut amp = amplitude(&u);
    let zeros = vec![0.0; n];
    for _ in 0..opts.max_outer {
        // Source: V/8 plus the boundary monopole moved to the right.
        let mut bfield = pad.zeros();
        fill(&mut bfield, &zeros, amp);
        let b: Vec<f64> = (0..n)
            .map(|q| 0.125 * v[q] + lap(&bfield, idx[q]))
            .collect();
        u = conjugate_gradient(&mut apply, &b, u, opts)?;
        let next = amplitude(&u);
        let done = abs(next - amp) <= 1e-13 * abs(next);
        amp = next;
        if done {
            return Ok(u);
        }
    }
    Err(Error::DataGeneration(
        "boundary amplitude did not converge".into(),
    ))
}

fn conjugate_gradient(
    apply: &mut impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    mut x: Vec<f64>,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let n = b.len();
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(a, c)| a * c).sum::<f64>();
    let bnorm = sqrt(dot(b, b));
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    for _ in 0..opts.max_iter {
        if sqrt(rr) <= opts.tol * bnorm {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::DataGeneration(
                "operator not positive definite".into(),
            ));
        }
        let alpha = rr / pap;
        for q in 0..n {
            x[q] += alpha * p[q];
            r[q] -= alpha * ap[q];
        }
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() {
            return Err(Error::DataGeneration("non-finite residual".into()));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for q in 0..n {
            p[q] = r[q] + beta * p[q];
        }
    }
    Err(Error::DataGeneration(format!(
        "conjugate gradients stalled at relative residual {:e}",
        sqrt(rr) / bnorm
    )))
}

/// Mean of `(phi^4 - 1) r` over the outer fifth of the inscribed ball.
fn fit_mass(grid: &Grid3, symmetry: Symmetry, g0: &[Sym3]) -> Result<f64> {
    let rmax = symmetry.inscribed_radius(grid);
    let (mut s, mut count) = (0.0, 0usize);
    for (q, g) in g0.iter().enumerate() {
        let r = hypot3(grid.point_of(q));
        if r >= 0.8 * rmax && r <= rmax {
            s += (g[0] - 1.0) * r;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::DataGeneration(
            "no grid points in the mass shell".into(),
        ));
    }
    Ok(s / count as f64)
}

/// Pointwise constraint residuals of a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintResidual {
    /// `R - |k|^2 + (tr k)^2 - psi1^2 - |grad psi0|_g^2`.
    pub hamiltonian: Vec<f64>,
    /// `D_j k^j_i - D_i tr k + psi1 d_i psi0`.
    pub momentum: Vec<[f64; 3]>,
    /// Sups over points at least [`CORE_MARGIN`] cells from outer faces.
    pub hamiltonian_sup: f64,
    pub momentum_sup: f64,
}

/// Hamiltonian and momentum residuals with covariant derivatives of `g0`.
pub fn constraint_residual(data: &CauchyData) -> Result<ConstraintResidual> {
    let d = SliceDiff::new(data.grid, data.symmetry)?;
    let pad = &d.pad;
    let np = pad.len();
    let comp = |f: &[Sym3], c: usize| -> Vec<f64> { f.iter().map(|s| s[c]).collect() };
    let parity = |c: usize| {
        let (i, j) = SYM3_PAIRS[c];
        component_parity(&[i + 1, j + 1])
    };
    let gp: Vec<Vec<f64>> = (0..6)
        .map(|c| d.pad(&comp(&data.g0, c), parity(c)))
        .collect();
    let kp: Vec<Vec<f64>> = (0..6)
        .map(|c| d.pad(&comp(&data.k0, c), parity(c)))
        .collect();
    let psi0 = d.pad(&data.psi0, [1.0; 3]);
    let at = |f: &[Vec<f64>], p: usize| -> Sym3 { core::array::from_fn(|c| f[c][p]) };

    // Inverse metric, mixed k and its trace on every padded point.
    let mut ginv = vec![[[0.0; 3]; 3]; np];
    let mut kmix = vec![vec![0.0; np]; 9];
    let mut trk = vec![0.0; np];
    for p in 0..np {
        let (gi, _) = invert3(&sym3_matrix(&at(&gp, p))).ok_or(Error::SingularMetric {
            index: padded_ijk(pad, p),
        })?;
        let k = sym3_matrix(&at(&kp, p));
        for i in 0..3 {
            for j in 0..3 {
                kmix[3 * i + j][p] = (0..3).map(|l| gi[i][l] * k[l][j]).sum();
            }
        }
        trk[p] = kmix[0][p] + kmix[4][p] + kmix[8][p];
        ginv[p] = gi;
    }

    // Christoffel symbols Gamma^k_ij two cells into the ghosts.
    let mut gam = vec![vec![0.0; np]; 18];
    for p in pad.inner_indices(2) {
        let dg: [Sym3; 3] = core::array::from_fn(|a| core::array::from_fn(|c| d.d1(&gp[c], a, p)));
        let dgs = |a: usize, i: usize, j: usize| dg[a][S3[i][j]];
        for k in 0..3 {
            for (c, &(i, j)) in SYM3_PAIRS.iter().enumerate() {
                gam[6 * k + c][p] = 0.5
                    * (0..3)
                        .map(|l| ginv[p][k][l] * (dgs(i, l, j) + dgs(j, l, i) - dgs(l, i, j)))
                        .sum::<f64>();
            }
        }
    }
    let g3 = |p: usize, k: usize, i: usize, j: usize| gam[6 * k + S3[i][j]][p];

    let grid = data.grid;
    let mut hamiltonian = vec![0.0; grid.len()];
    let mut momentum = vec![[0.0; 3]; grid.len()];
    let (mut hs, mut ms) = (0.0f64, 0.0f64);
    for (q, p) in pad.interior_indices().into_iter().enumerate() {
        // d_l Gamma^k_ij
        let dgam = |l: usize, k: usize, i: usize, j: usize| d.d1(&gam[6 * k + S3[i][j]], l, p);
        let gi = ginv[p];
        let mut r = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut rij = 0.0;
                for k in 0..3 {
                    rij += dgam(k, k, i, j) - dgam(j, k, i, k);
                    for l in 0..3 {
                        rij += g3(p, k, k, l) * g3(p, l, i, j) - g3(p, k, j, l) * g3(p, l, i, k);
                    }
                }
                r += gi[i][j] * rij;
            }
        }
        let km = |i: usize, j: usize| kmix[3 * i + j][p];
        let k2: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| km(i, j) * km(j, i))
            .sum();
        let dpsi: [f64; 3] = core::array::from_fn(|a| d.d1(&psi0, a, p));
        let grad2: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| gi[i][j] * dpsi[i] * dpsi[j])
            .sum();
        let psi1 = data.psi1[q];
        let h = r - k2 + trk[p] * trk[p] - psi1 * psi1 - grad2;
        let mut m = [0.0; 3];
        for (i, mi) in m.iter_mut().enumerate() {
            let mut div = 0.0;
            for j in 0..3 {
                div += d.d1(&kmix[3 * j + i], j, p);
                for l in 0..3 {
                    div += g3(p, j, j, l) * km(l, i) - g3(p, l, j, i) * km(j, l);
                }
            }
            *mi = div - d.d1(&trk, i, p) + psi1 * dpsi[i];
        }
        if d.in_core(q) {
            hs = hs.max(abs(h));
            ms = ms.max(m.iter().fold(0.0f64, |a, v| a.max(abs(*v))));
        }
        hamiltonian[q] = h;
        momentum[q] = m;
    }
    Ok(ConstraintResidual {
        hamiltonian,
        momentum,
        hamiltonian_sup: hs,
        momentum_sup: ms,
    })
}

fn padded_ijk(pad: &Padded, p: usize) -> [usize; 3] {
    let i = p % pad.np[0];
    let r = p / pad.np[0];
    [i, r % pad.np[1], r / pad.np[1]]
}

/// The evolution slice: `g`, `d_t g`, `psi`, `d_t psi` and the lapse `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSlice {
    pub grid: Grid3,
    pub symmetry: Symmetry,
    pub g: Vec<SymTensor2>,
    pub dtg: Vec<SymTensor2>,
    pub psi: Vec<f64>,
    pub dtpsi: Vec<f64>,
    pub lapse: Vec<f64>,
    pub mass: f64,
    pub epsilon: f64,
}

/// Square of the lapse, `1 - M chi(r) / r`.
pub fn lapse_squared(mass: f64, x: [f64; 3]) -> f64 {
    let r = hypot3(x);
    if r == 0.0 {
        return 1.0;
    }
    1.0 - mass * cutoff_chi(r) / r
}

/// Slice data in wave coordinates: `g_ij = g0_ij`, `g_00 = -a^2`,
/// `g_0i = 0`, `d_t g_ij = -2 a k_ij`, `d_t g_00 = 2 a^3 g0^ij k_ij`,
/// `d_t psi = a psi1` and
/// `d_t g_0l = a^2 g0^ij d_j g0_il - a^2 g0^ij d_l g0_ij / 2 - a d_l a`.
///
/// The last two make the gauge vector vanish on the slice; `a d_l a` is
/// taken as half the derivative of `a^2` with the same stencil the gauge
/// diagnostic uses.
///
/// Fails when the constraint residuals exceed [`CONSTRAINT_TOLERANCE`].
pub fn build_cauchy_data(data: &CauchyData) -> Result<FullSlice> {
    let res = constraint_residual(data)?;
    if !(res.hamiltonian_sup <= CONSTRAINT_TOLERANCE && res.momentum_sup <= CONSTRAINT_TOLERANCE) {
        return Err(Error::InvalidParameter(format!(
            "constraint residuals {:e} / {:e} exceed {:e}",
            res.hamiltonian_sup, res.momentum_sup, CONSTRAINT_TOLERANCE
        )));
    }
    slice_from_data(data)
}

/// The formulas of [`build_cauchy_data`] without the constraint check.
pub fn slice_from_data(data: &CauchyData) -> Result<FullSlice> {
    let grid = data.grid;
    let d = SliceDiff::new(grid, data.symmetry)?;
    let a2: Vec<f64> = grid.sample(|x| lapse_squared(data.mass, x));
    if let Some(q) = a2.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "lapse squared non-positive at point {q}"
        )));
    }
    let parity = |c: usize| {
        let (i, j) = SYM3_PAIRS[c];
        component_parity(&[i + 1, j + 1])
    };
    let gp: Vec<Vec<f64>> = (0..6)
        .map(|c| d.pad(&data.g0.iter().map(|s| s[c]).collect::<Vec<_>>(), parity(c)))
        .collect();
    let a2p = d.pad(&a2, [1.0; 3]);
    let idx = d.pad.interior_indices();
    let n = grid.len();
    let mut g = vec![SymTensor2::ZERO; n];
    let mut dtg = vec![SymTensor2::ZERO; n];
    let mut lapse = vec![0.0; n];
    let mut dtpsi = vec![0.0; n];
    for q in 0..n {
        let p = idx[q];
        let a = sqrt(a2[q]);
        lapse[q] = a;
        let g0 = sym3_matrix(&data.g0[q]);
        let k0 = sym3_matrix(&data.k0[q]);
        let (gi, _) = invert3(&g0).ok_or(Error::SingularMetric { index: grid.ijk(q) })?;
        let mut gt = SymTensor2::ZERO;
        let mut vt = SymTensor2::ZERO;
        gt.set(0, 0, -a2[q]);
        let mut trk = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                trk += gi[i][j] * k0[i][j];
                if j >= i {
                    gt.set(i + 1, j + 1, g0[i][j]);
                    vt.set(i + 1, j + 1, -2.0 * a * k0[i][j]);
                }
            }
        }
        vt.set(0, 0, 2.0 * a * a * a * trk);
        let dg = |a: usize, i: usize, j: usize| d.d1(&gp[S3[i][j]], a, p);
        for l in 0..3 {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += gi[i][j] * (dg(j, i, l) - 0.5 * dg(l, i, j));
                }
            }
            vt.set(0, l + 1, a2[q] * s - 0.5 * d.d1(&a2p, l, p));
        }
        g[q] = gt;
        dtg[q] = vt;
        dtpsi[q] = a * data.psi1[q];
    }
    Ok(FullSlice {
        grid,
        symmetry: data.symmetry,
        g,
        dtg,
        psi: data.psi0.clone(),
        dtpsi,
        lapse,
        mass: data.mass,
        epsilon: data.epsilon,
    })
}

/// Coefficient of `delta_{mu nu}` in `h0`: `chi(r/t) chi(r) M / r`, with
/// `chi(r/t) = 1` at `t = 0`.
pub fn background_coefficient(mass: f64, t: f64, x: [f64; 3]) -> f64 {
    let r = hypot3(x);
    if mass == 0.0 || r == 0.0 {
        return 0.0;
    }
    let outer = if t <= 0.0 { 1.0 } else { cutoff_chi(r / t) };
    outer * cutoff_chi(r) * mass / r
}

/// `h0_{mu nu} = chi(r/t) chi(r) (M / r) delta_{mu nu}`.
pub fn background_tensor(mass: f64, t: f64, x: [f64; 3]) -> SymTensor2 {
    let b = background_coefficient(mass, t, x);
    let mut s = SymTensor2::ZERO;
    for mu in 0..4 {
        s.set(mu, mu, b);
    }
    s
}

/// Split `h = g - m` into the Schwarzschild tail `h0` and the remainder
/// `h1 = h - h0`.
pub fn mass_split(h: &MetricBlock, mass: f64) -> Result<(MetricBlock, MetricBlock)> {
    if h.role != MetricRole::Perturbation {
        return Err(Error::InvalidParameter(
            "mass split needs a perturbation block".into(),
        ));
    }
    let h0 = h.map(MetricRole::Background, |t, x, _| {
        background_tensor(mass, t, x)
    });
    let h1 = h.map(MetricRole::Remainder, |t, x, p| {
        p.sub(&background_tensor(mass, t, x))
    });
    Ok((h0, h1))
}

/// `E_N(0)`: for `|I| <= N`, weighted `L^2` norms with weight
/// `(1 + r)^{1/2 + gamma + |I|}` of `grad grad^I h1`, `grad^I k0`,
/// `grad grad^I psi0` and `grad^I psi1`, with `h1 = g0 - delta - h0`.
pub fn initial_energy(data: &CauchyData, n_order: usize, gamma: f64) -> Result<f64> {
    if n_order > 6 {
        return Err(Error::InvalidParameter("energy order above 6".into()));
    }
    let d = SliceDiff::new(data.grid, data.symmetry)?;
    let grid = data.grid;
    let h1: Vec<Sym3> = data
        .g0
        .iter()
        .enumerate()
        .map(|(q, g)| {
            let r = hypot3(grid.point_of(q));
            let b = if r > 0.0 {
                cutoff_chi(r) * data.mass / r
            } else {
                0.0
            };
            let mut h = *g;
            h[0] -= 1.0 + b;
            h[3] -= 1.0 + b;
            h[5] -= 1.0 + b;
            h
        })
        .collect();
    let dv = grid.cell_volume() * data.symmetry.volume_factor();
    let w = WeightedNorms {
        d: &d,
        gamma,
        max_order: n_order,
    };
    let tensor = |src: &[Sym3], shift: usize| -> Vec<f64> {
        let mut total = vec![0.0; n_order + 1];
        for (c, &(i, j)) in SYM3_PAIRS.iter().enumerate() {
            let mult = if i == j { 1.0 } else { 2.0 };
            let f: Vec<f64> = src.iter().map(|s| s[c]).collect();
            for (t, v) in
                total
                    .iter_mut()
                    .zip(w.norms(&f, component_parity(&[i + 1, j + 1]), shift))
            {
                *t += mult * v;
            }
        }
        total
    };
    let parts = [
        tensor(&h1, 1),
        tensor(&data.k0, 0),
        w.norms(&data.psi0, [1.0; 3], 1),
        w.norms(&data.psi1, [1.0; 3], 0),
    ];
    Ok(parts
        .iter()
        .flat_map(|p| p.iter())
        .map(|v| sqrt(v * dv))
        .sum())
}

/// Squared weighted norms of all derivatives of a field, grouped by `|I|`.
struct WeightedNorms<'a> {
    d: &'a SliceDiff,
    gamma: f64,
    max_order: usize,
}

impl WeightedNorms<'_> {
    /// Entry `k` is `sum_q (1 + r)^{1 + 2 gamma + 2k} |grad^{k + shift} f|^2`,
    /// the gradient tensor summed over sorted multi-indices with their
    /// multiplicities.
    fn norms(&self, f: &[f64], parity: [f64; 3], shift: usize) -> Vec<f64> {
        let grid = self.d.pad.interior;
        let radius: Vec<f64> = grid.sample(hypot3);
        let mut out = vec![0.0; self.max_order + 1];
        self.visit(f.to_vec(), parity, 0, [0; 3], shift, &radius, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        f: Vec<f64>,
        parity: [f64; 3],
        first_axis: usize,
        counts: [usize; 3],
        shift: usize,
        radius: &[f64],
        out: &mut [f64],
    ) {
        let order: usize = counts.iter().sum();
        if order >= shift {
            let k = order - shift;
            let e = 1.0 + 2.0 * self.gamma + 2.0 * k as f64;
            let s: f64 = f
                .iter()
                .zip(radius)
                .map(|(v, r)| powf(1.0 + r, e) * v * v)
                .sum();
            out[k] += multinomial(counts) * s;
        }
        if order == self.max_order + shift {
            return;
        }
        for a in first_axis..3 {
            let mut p = parity;
            p[a] = -p[a];
            let mut c = counts;
            c[a] += 1;
            let df = self.d.derive(&f, parity, a);
            self.visit(df, p, a, c, shift, radius, out);
        }
    }
}

fn multinomial(c: [usize; 3]) -> f64 {
    let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
    fact(c[0] + c[1] + c[2]) / (fact(c[0]) * fact(c[1]) * fact(c[2]))
}
