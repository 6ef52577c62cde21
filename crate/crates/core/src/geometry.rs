//! Differential geometry of metrics sampled on spacetime windows.
//!
//! Spatial derivatives use the fourth-order stencils of [`crate::stencil`]
//! (one-sided near the box edges); time derivatives are centred second
//! order, so quantities built from first derivatives of `g` live on
//! levels `1..n-1` of a window and those built from second derivatives on
//! levels `2..n-2`.
//!
//! The reduced right-hand side `S` satisfies, for every metric,
//!
//! ```text
//! g^{ab} d_a d_b g_{mn} = -2 R_{mn} + 2 nabla_(m Gamma_n) + S_{mn}
//! S_{mn} = 2 g^{cd} g^{ef} (d_e g_{cm} d_f g_{dn} - Gamma_{mce} Gamma_{ndf})
//! ```
//!
//! where `Gamma_{lmn}` are Christoffel symbols of the first kind and
//! `Gamma_n = g_{nl} g^{ab} Gamma^l_{ab}`. In wave coordinates and with
//! `R_{mn} = d_m psi d_n psi` this becomes the evolved system
//! `g^{ab} d_a d_b g_{mn} = S_{mn} - 2 d_m psi d_n psi`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{check_levels, Grid3, MetricBlock, MetricRole, ScalarBlock};
use crate::math::{abs, sqrt};
use crate::nullframe::quadratic_p;
use crate::stencil::{self, check_grid};
use crate::tensor::{invert4, Mat4, SymTensor2, Vec4, MINKOWSKI, SYM_PAIRS};

pub type Christoffel = [[[f64; 4]; 4]; 4];

/// Pointwise geometry from `g` and its first derivatives `dg[a] = d_a g`.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    pub ginv: Mat4,
    pub det: f64,
    /// `Gamma_{l m n}` (first kind).
    pub first_kind: Christoffel,
    /// `Gamma^l_{m n}`.
    pub second_kind: Christoffel,
}

pub fn point_geometry(g: &Mat4, dg: &[Mat4; 4]) -> Option<PointGeometry> {
    let (ginv, det) = invert4(g)?;
    let mut first = [[[0.0; 4]; 4]; 4];
    for l in 0..4 {
        for m in 0..4 {
            for n in m..4 {
                let v = 0.5 * (dg[m][l][n] + dg[n][l][m] - dg[l][m][n]);
                first[l][m][n] = v;
                first[l][n][m] = v;
            }
        }
    }
    let mut second = [[[0.0; 4]; 4]; 4];
    for l in 0..4 {
        for m in 0..4 {
            for n in m..4 {
                let v: f64 = (0..4).map(|d| ginv[l][d] * first[d][m][n]).sum();
                second[l][m][n] = v;
                second[l][n][m] = v;
            }
        }
    }
    Some(PointGeometry {
        ginv,
        det,
        first_kind: first,
        second_kind: second,
    })
}

impl PointGeometry {
    /// `Gamma^l = g^{ab} Gamma^l_{ab}`.
    pub fn contracted(&self) -> Vec4 {
        let mut out = [0.0; 4];
        for (l, o) in out.iter_mut().enumerate() {
            for a in 0..4 {
                for b in 0..4 {
                    *o += self.ginv[a][b] * self.second_kind[l][a][b];
                }
            }
        }
        out
    }
}

/// The quadratic source `S_{mn}` of the reduced equations.
pub fn reduced_source(pg: &PointGeometry, dg: &[Mat4; 4]) -> SymTensor2 {
    let gi = &pg.ginv;
    // A[e][c][m] = d_e g_{cm}; raise e and c.
    let mut a_up = [[[0.0; 4]; 4]; 4];
    let mut g_up = [[[0.0; 4]; 4]; 4];
    for m in 0..4 {
        // Raise the first index.
        let mut t1 = [[0.0; 4]; 4];
        let mut t2 = [[0.0; 4]; 4];
        for f in 0..4 {
            for d in 0..4 {
                let mut s1 = 0.0;
                let mut s2 = 0.0;
                for e in 0..4 {
                    s1 += gi[f][e] * dg[e][d][m];
                    s2 += gi[f][e] * pg.first_kind[m][d][e];
                }
                t1[f][d] = s1;
                t2[d][f] = s2;
            }
        }
        // Raise the second index.
        for f in 0..4 {
            for c in 0..4 {
                let mut s1 = 0.0;
                let mut s2 = 0.0;
                for d in 0..4 {
                    s1 += gi[c][d] * t1[f][d];
                    s2 += gi[c][d] * t2[d][f];
                }
                a_up[f][c][m] = s1;
                g_up[m][c][f] = s2;
            }
        }
    }
    SymTensor2::from_fn(|m, n| {
        let mut s = 0.0;
        for e in 0..4 {
            for c in 0..4 {
                s += dg[e][c][m] * a_up[e][c][n] - pg.first_kind[m][c][e] * g_up[n][c][e];
            }
        }
        2.0 * s
    })
}

/// `-2 d_m psi d_n psi`, the scalar-field source of the evolved system.
pub fn matter_source(dpsi: Vec4) -> SymTensor2 {
    SymTensor2::from_fn(|m, n| -2.0 * dpsi[m] * dpsi[n])
}

/// Metric values and first derivatives on one level of a window, stored as
/// component arrays over the grid.
struct LevelJets {
    g: [Vec<f64>; 10],
    d: [[Vec<f64>; 10]; 4],
}

fn component_levels(block: &MetricBlock, full_metric: bool) -> Vec<[Vec<f64>; 10]> {
    let n = block.grid.len();
    block
        .levels
        .iter()
        .enumerate()
        .map(|(l, _)| {
            let mut comps: [Vec<f64>; 10] = Default::default();
            for (k, c) in comps.iter_mut().enumerate() {
                *c = (0..n)
                    .map(|q| {
                        if full_metric {
                            block.metric_at(l, q).c[k]
                        } else {
                            block.levels[l][q].c[k]
                        }
                    })
                    .collect();
            }
            comps
        })
        .collect()
}

fn level_jets(grid: &Grid3, comps: &[[Vec<f64>; 10]], l: usize, dt: f64) -> LevelJets {
    let n = grid.len();
    let g = comps[l].clone();
    let mut d: [[Vec<f64>; 10]; 4] = Default::default();
    for k in 0..10 {
        d[0][k] = (0..n)
            .map(|q| (comps[l + 1][k][q] - comps[l - 1][k][q]) / (2.0 * dt))
            .collect();
        for a in 0..3 {
            d[a + 1][k] = stencil::d1(grid, &comps[l][k], a);
        }
    }
    LevelJets { g, d }
}

impl LevelJets {
    fn at(&self, q: usize) -> (Mat4, [Mat4; 4]) {
        let mut g = [[0.0; 4]; 4];
        let mut dg = [[[0.0; 4]; 4]; 4];
        for (k, &(m, n)) in SYM_PAIRS.iter().enumerate() {
            g[m][n] = self.g[k][q];
            g[n][m] = self.g[k][q];
            for a in 0..4 {
                dg[a][m][n] = self.d[a][k][q];
                dg[a][n][m] = self.d[a][k][q];
            }
        }
        (g, dg)
    }
}

fn geometry_at(grid: &Grid3, jets: &LevelJets, q: usize) -> Result<(PointGeometry, [Mat4; 4])> {
    let (g, dg) = jets.at(q);
    match point_geometry(&g, &dg) {
        Some(pg) => Ok((pg, dg)),
        None => Err(Error::SingularMetric { index: grid.ijk(q) }),
    }
}

fn check_block(g: &MetricBlock, levels: usize) -> Result<()> {
    check_grid(&g.grid)?;
    check_levels(g.n_levels(), levels)?;
    if g.role == MetricRole::InversePerturbation {
        return Err(Error::InvalidParameter(
            "block stores an inverse perturbation".into(),
        ));
    }
    Ok(())
}

/// Christoffel symbols `Gamma^l_{mn}` on the time-interior levels of a window.
#[derive(Debug, Clone)]
pub struct ChristoffelField {
    pub grid: Grid3,
    /// Time of `levels[0]`.
    pub t0: f64,
    pub dt: f64,
    pub levels: Vec<Vec<Christoffel>>,
}

pub fn christoffel(g: &MetricBlock) -> Result<ChristoffelField> {
    check_block(g, 3)?;
    let comps = component_levels(g, true);
    let mut levels = Vec::with_capacity(g.n_levels() - 2);
    for l in 1..g.n_levels() - 1 {
        let jets = level_jets(&g.grid, &comps, l, g.dt);
        let mut lev = Vec::with_capacity(g.grid.len());
        for q in 0..g.grid.len() {
            lev.push(geometry_at(&g.grid, &jets, q)?.0.second_kind);
        }
        levels.push(lev);
    }
    Ok(ChristoffelField {
        grid: g.grid,
        t0: g.time(1),
        dt: g.dt,
        levels,
    })
}

/// Second derivatives `d_a d_b` of every component on the centre level.
fn second_derivatives(
    grid: &Grid3,
    comps: &[[Vec<f64>; 10]],
    c: usize,
    dt: f64,
) -> Vec<[Mat4; 10]> {
    let n = grid.len();
    let mut out = vec![[[[0.0; 4]; 4]; 10]; n];
    for k in 0..10 {
        let f = &comps[c][k];
        for q in 0..n {
            out[q][k][0][0] = (comps[c + 1][k][q] - 2.0 * f[q] + comps[c - 1][k][q]) / (dt * dt);
        }
        let dp: Vec<Vec<f64>> = (0..3)
            .map(|a| stencil::d1(grid, &comps[c + 1][k], a))
            .collect();
        let dm: Vec<Vec<f64>> = (0..3)
            .map(|a| stencil::d1(grid, &comps[c - 1][k], a))
            .collect();
        let d1c: Vec<Vec<f64>> = (0..3).map(|a| stencil::d1(grid, f, a)).collect();
        for a in 0..3 {
            let d2 = stencil::d2(grid, f, a);
            for q in 0..n {
                let v = (dp[a][q] - dm[a][q]) / (2.0 * dt);
                out[q][k][0][a + 1] = v;
                out[q][k][a + 1][0] = v;
                out[q][k][a + 1][a + 1] = d2[q];
            }
            for b in (a + 1)..3 {
                let dab = stencil::d1(grid, &d1c[b], a);
                for q in 0..n {
                    out[q][k][a + 1][b + 1] = dab[q];
                    out[q][k][b + 1][a + 1] = dab[q];
                }
            }
        }
    }
    out
}

/// Derivatives `d_a Gamma^l_{mn}` and related fields at the centre level.
struct CurvatureParts {
    /// Christoffels at the centre, per point.
    gamma: Vec<Christoffel>,
    /// `d_a Gamma^l_{mn}` indexed `[a][l][m][n]`.
    dgamma: Vec<[Christoffel; 4]>,
    /// Lowered contracted Christoffel `Gamma_n` at the centre.
    gamma_low: Vec<Vec4>,
    /// `d_a Gamma_n` indexed `[a][n]`.
    dgamma_low: Vec<[Vec4; 4]>,
    ginv: Vec<Mat4>,
}

fn curvature_parts(g: &MetricBlock, comps: &[[Vec<f64>; 10]]) -> Result<CurvatureParts> {
    let grid = g.grid;
    let n = grid.len();
    let c = g.center();
    // Christoffels and lowered contracted vector on levels c-1, c, c+1, as
    // component arrays.
    let mut gam_arrays: Vec<Vec<Vec<f64>>> = Vec::new(); // [level][comp 0..64][q]
    let mut low_arrays: Vec<Vec<Vec<f64>>> = Vec::new(); // [level][n 0..4][q]
    let mut gamma_c = Vec::new();
    let mut ginv_c = Vec::new();
    for l in (c - 1)..=(c + 1) {
        let jets = level_jets(&grid, comps, l, g.dt);
        let mut ga = vec![vec![0.0; n]; 64];
        let mut lo = vec![vec![0.0; n]; 4];
        for q in 0..n {
            let (pg, _) = geometry_at(&grid, &jets, q)?;
            let (gm, _) = jets.at(q);
            let cv = pg.contracted();
            for a in 0..4 {
                lo[a][q] = (0..4).map(|b| gm[a][b] * cv[b]).sum();
            }
            for lam in 0..4 {
                for m in 0..4 {
                    for nn in 0..4 {
                        ga[lam * 16 + m * 4 + nn][q] = pg.second_kind[lam][m][nn];
                    }
                }
            }
            if l == c {
                gamma_c.push(pg.second_kind);
                ginv_c.push(pg.ginv);
            }
        }
        gam_arrays.push(ga);
        low_arrays.push(lo);
    }
    let mut dgamma = vec![[[[[0.0; 4]; 4]; 4]; 4]; n];
    for comp in 0..64 {
        let (lam, m, nn) = (comp / 16, (comp / 4) % 4, comp % 4);
        if nn < m {
            continue;
        }
        let sp: Vec<Vec<f64>> = (0..3)
            .map(|a| stencil::d1(&grid, &gam_arrays[1][comp], a))
            .collect();
        for q in 0..n {
            let dt = (gam_arrays[2][comp][q] - gam_arrays[0][comp][q]) / (2.0 * g.dt);
            let vals = [dt, sp[0][q], sp[1][q], sp[2][q]];
            for a in 0..4 {
                dgamma[q][a][lam][m][nn] = vals[a];
                dgamma[q][a][lam][nn][m] = vals[a];
            }
        }
    }
    let mut dlow = vec![[[0.0; 4]; 4]; n];
    for comp in 0..4 {
        let sp: Vec<Vec<f64>> = (0..3)
            .map(|a| stencil::d1(&grid, &low_arrays[1][comp], a))
            .collect();
        for q in 0..n {
            dlow[q][0][comp] = (low_arrays[2][comp][q] - low_arrays[0][comp][q]) / (2.0 * g.dt);
            for a in 0..3 {
                dlow[q][a + 1][comp] = sp[a][q];
            }
        }
    }
    let gamma_low = (0..n)
        .map(|q| [0, 1, 2, 3].map(|k| low_arrays[1][k][q]))
        .collect();
    Ok(CurvatureParts {
        gamma: gamma_c,
        dgamma,
        gamma_low,
        dgamma_low: dlow,
        ginv: ginv_c,
    })
}

fn ricci_from_parts(p: &CurvatureParts, q: usize) -> SymTensor2 {
    let gm = &p.gamma[q];
    let dg = &p.dgamma[q];
    SymTensor2::from_fn(|m, n| {
        let mut s = 0.0;
        for a in 0..4 {
            s += dg[a][a][m][n] - dg[n][a][m][a];
            for b in 0..4 {
                s += gm[a][a][b] * gm[b][m][n] - gm[a][n][b] * gm[b][m][a];
            }
        }
        s
    })
}

/// Ricci tensor on the centre level of a window of at least five levels.
pub fn ricci_fd(g: &MetricBlock) -> Result<Vec<SymTensor2>> {
    check_block(g, 5)?;
    let comps = component_levels(g, true);
    let parts = curvature_parts(g, &comps)?;
    Ok((0..g.grid.len())
        .map(|q| ricci_from_parts(&parts, q))
        .collect())
}

/// Gauge vector on the centre level in its two equivalent forms.
#[derive(Debug, Clone)]
pub struct GaugeVector {
    /// `g^{ab} Gamma^l_{ab}` per point.
    pub contracted: Vec<Vec4>,
    /// `-|g|^{-1/2} d_a(|g|^{1/2} g^{al})` per point.
    pub divergence: Vec<Vec4>,
    /// Largest absolute component of `contracted`.
    pub sup: f64,
    /// `(sum |Gamma|^2 dV)^{1/2}` with the Euclidean norm of the 4-vector.
    pub l2: f64,
    /// Largest absolute difference between the two forms.
    pub cross_sup: f64,
}

pub fn gauge_vector(g: &MetricBlock) -> Result<GaugeVector> {
    check_block(g, 3)?;
    let grid = g.grid;
    let n = grid.len();
    let c = g.center();
    let comps = component_levels(g, true);
    let jets = level_jets(&grid, &comps, c, g.dt);
    let mut contracted = Vec::with_capacity(n);
    for q in 0..n {
        contracted.push(geometry_at(&grid, &jets, q)?.0.contracted());
    }
    // Densitized inverse metric on three levels.
    let mut dens: Vec<Vec<Vec<f64>>> = Vec::new(); // [level][a*4+l][q]
    let mut sqrt_det_c = vec![0.0; n];
    for l in (c - 1)..=(c + 1) {
        let mut arr = vec![vec![0.0; n]; 16];
        for q in 0..n {
            let gm = g.metric_at(l, q).to_matrix();
            let (gi, det) = invert4(&gm).ok_or(Error::SingularMetric { index: grid.ijk(q) })?;
            let sd = sqrt(abs(det));
            if l == c {
                sqrt_det_c[q] = sd;
            }
            for a in 0..4 {
                for b in 0..4 {
                    arr[a * 4 + b][q] = sd * gi[a][b];
                }
            }
        }
        dens.push(arr);
    }
    let mut divergence = vec![[0.0; 4]; n];
    for lam in 0..4 {
        let mut acc: Vec<f64> = (0..n)
            .map(|q| (dens[2][lam][q] - dens[0][lam][q]) / (2.0 * g.dt))
            .collect();
        for a in 0..3 {
            let d = stencil::d1(&grid, &dens[1][(a + 1) * 4 + lam], a);
            for q in 0..n {
                acc[q] += d[q];
            }
        }
        for q in 0..n {
            divergence[q][lam] = -acc[q] / sqrt_det_c[q];
        }
    }
    let mut sup = 0.0f64;
    let mut l2 = 0.0;
    let mut cross = 0.0f64;
    for q in 0..n {
        for lam in 0..4 {
            sup = sup.max(abs(contracted[q][lam]));
            l2 += contracted[q][lam] * contracted[q][lam];
            cross = cross.max(abs(contracted[q][lam] - divergence[q][lam]));
        }
    }
    Ok(GaugeVector {
        contracted,
        divergence,
        sup,
        l2: sqrt(l2 * grid.cell_volume()),
        cross_sup: cross,
    })
}

/// `S_{mn}` on the centre level.
///
/// `psi`, if given, must share the window; its source `-2 d psi d psi` is
/// then added, giving the full right-hand side of the evolved system.
pub fn reduced_rhs(g: &MetricBlock, psi: Option<&ScalarBlock>) -> Result<Vec<SymTensor2>> {
    check_block(g, 3)?;
    let grid = g.grid;
    let c = g.center();
    let comps = component_levels(g, true);
    let jets = level_jets(&grid, &comps, c, g.dt);
    let dpsi = match psi {
        Some(p) => {
            if p.n_levels() != g.n_levels() || p.grid != grid {
                return Err(Error::InvalidParameter(
                    "scalar window does not match metric window".into(),
                ));
            }
            let sp = stencil::gradient(&grid, &p.levels[c]);
            Some(
                (0..grid.len())
                    .map(|q| {
                        [
                            stencil::dt1(&p.levels, c, q, p.dt),
                            sp[0][q],
                            sp[1][q],
                            sp[2][q],
                        ]
                    })
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };
    let mut out = Vec::with_capacity(grid.len());
    for q in 0..grid.len() {
        let (pg, dg) = geometry_at(&grid, &jets, q)?;
        let mut s = reduced_source(&pg, &dg);
        if let Some(d) = &dpsi {
            s = s.add(&matter_source(d[q]));
        }
        out.push(s);
    }
    Ok(out)
}

/// Pointwise residual of the reduced-Ricci identity on the centre level:
/// `g^{ab} d_a d_b g_{mn} + 2 R_{mn} - 2 nabla_(m Gamma_n) - S_{mn}`.
pub fn reduced_identity_residual(g: &MetricBlock) -> Result<Vec<SymTensor2>> {
    check_block(g, 5)?;
    let grid = g.grid;
    let c = g.center();
    let comps = component_levels(g, true);
    let parts = curvature_parts(g, &comps)?;
    let d2 = second_derivatives(&grid, &comps, c, g.dt);
    let jets = level_jets(&grid, &comps, c, g.dt);
    let mut out = Vec::with_capacity(grid.len());
    for q in 0..grid.len() {
        let (pg, dg) = geometry_at(&grid, &jets, q)?;
        let s = reduced_source(&pg, &dg);
        let ric = ricci_from_parts(&parts, q);
        let gi = &parts.ginv[q];
        let gl = parts.gamma_low[q];
        let dgl = &parts.dgamma_low[q];
        let gm = &parts.gamma[q];
        out.push(SymTensor2::from_fn(|m, n| {
            let k = crate::tensor::sym_index(m, n);
            let mut boxg = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    boxg += gi[a][b] * d2[q][k][a][b];
                }
            }
            let mut nabla = 0.5 * (dgl[m][n] + dgl[n][m]);
            for l in 0..4 {
                nabla -= gm[l][m][n] * gl[l];
            }
            boxg + 2.0 * ric.get(m, n) - 2.0 * nabla - s.get(m, n)
        }));
    }
    Ok(out)
}

/// `P(d_mu h, d_nu h)` on the centre level; `h` is a perturbation block.
pub fn assemble_p_source(h: &MetricBlock, mu: usize, nu: usize) -> Result<Vec<f64>> {
    if mu > 3 || nu > 3 {
        return Err(Error::IndexOutOfRange("P source index"));
    }
    check_grid(&h.grid)?;
    let needs_time = mu == 0 || nu == 0;
    if needs_time {
        check_levels(h.n_levels(), 3)?;
    }
    let grid = h.grid;
    let c = h.center();
    let comps = component_levels(h, false);
    let deriv = |a: usize| -> Vec<SymTensor2> {
        let arrays: Vec<Vec<f64>> = (0..10)
            .map(|k| {
                if a == 0 {
                    (0..grid.len())
                        .map(|q| (comps[c + 1][k][q] - comps[c - 1][k][q]) / (2.0 * h.dt))
                        .collect()
                } else {
                    stencil::d1(&grid, &comps[c][k], a - 1)
                }
            })
            .collect();
        (0..grid.len())
            .map(|q| SymTensor2 {
                c: core::array::from_fn(|k| arrays[k][q]),
            })
            .collect()
    };
    let dm = deriv(mu);
    let dn = if nu == mu { dm.clone() } else { deriv(nu) };
    Ok(dm.iter().zip(&dn).map(|(a, b)| quadratic_p(a, b)).collect())
}

/// `H^{mn} = (m + h)^{-1} - m^{-1}` at every point of a perturbation block.
pub fn inverse_perturbation(h: &MetricBlock) -> Result<MetricBlock> {
    let mut levels = Vec::with_capacity(h.n_levels());
    for l in 0..h.n_levels() {
        let mut lev = Vec::with_capacity(h.grid.len());
        for q in 0..h.grid.len() {
            let g = h.metric_at(l, q).to_matrix();
            let (gi, _) = invert4(&g).ok_or(Error::SingularMetric {
                index: h.grid.ijk(q),
            })?;
            let mut big = [[0.0; 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    big[a][b] = gi[a][b] - MINKOWSKI[a][b];
                }
            }
            lev.push(SymTensor2::from_matrix(&big));
        }
        levels.push(lev);
    }
    Ok(MetricBlock {
        grid: h.grid,
        t0: h.t0,
        dt: h.dt,
        role: MetricRole::InversePerturbation,
        levels,
    })
}

/// Pointwise `H^{mn}` from `h_{mn}`.
pub fn inverse_perturbation_point(h: &SymTensor2) -> Option<SymTensor2> {
    let g = h.add(&SymTensor2::minkowski()).to_matrix();
    let (gi, _) = invert4(&g)?;
    Some(SymTensor2::from_fn(|a, b| gi[a][b] - MINKOWSKI[a][b]))
}
