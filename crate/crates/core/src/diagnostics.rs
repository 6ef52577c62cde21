//! Measurable functionals: weights, weighted energies, inequality ratios,
//! gauge residuals, null-component monitors and decay fits.

use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::SpacetimeFunction;
use crate::error::{Error, Result};
use crate::evolution::{field_parity, EvolutionState, RunConfig, NFIELDS, PSI};
use crate::grid::{check_levels, component_parity, FaceRule, Grid3, Padded, ScalarBlock, Symmetry};
use crate::initdata::background_coefficient;
use crate::math::{abs, hypot3, powf, sqrt};
use crate::nullframe::{derivative_seminorm, seminorm, FrameFamily, NullFrame};
use crate::quadrature::{gauss_on, simpson, SphereRule};
use crate::stencil::centered;
use crate::tensor::{invert4, SymTensor2, ETA, SYM_PAIRS};
use crate::vectorfields::{apply_z, Generator, GENERATORS};

pub use crate::fit::{decay_fit, DecayFit, DecayModel};

/// Half-width of the cone-adjacent annulus `|r - t| <= 5`.
pub const ANNULUS_HALF_WIDTH: f64 = 5.0;
/// Points closer than this many cells to an outer face are excluded from
/// gauge sups.
pub const GAUGE_MARGIN: usize = 4;

/// Parameters of the energy weight `w` and the decay weight `varpi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub gamma: f64,
    pub mu: f64,
    pub gamma_p: f64,
    pub mu_p: f64,
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self {
            gamma: 0.25,
            mu: 0.25,
            gamma_p: 0.25,
            mu_p: 0.25,
        }
    }
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma > 0.0
            && self.gamma <= 1.0
            && self.mu > 0.0
            && self.mu < 0.5
            && self.gamma_p >= -1.0
            && self.mu_p <= 0.5;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "weights need 0 < gamma <= 1, 0 < mu < 1/2, gamma' >= -1, mu' <= 1/2".into(),
            ))
        }
    }
}

/// `w(q)` and `w'(q)`.
pub fn weight_w(q: f64, spec: &WeightSpec) -> (f64, f64) {
    let a = 1.0 + abs(q);
    if q > 0.0 {
        let e = 1.0 + 2.0 * spec.gamma;
        (1.0 + powf(a, e), e * powf(a, e - 1.0))
    } else {
        let e = -2.0 * spec.mu;
        (1.0 + powf(a, e), 2.0 * spec.mu * powf(a, e - 1.0))
    }
}

/// `varpi(q)`.
pub fn varpi(q: f64, spec: &WeightSpec) -> f64 {
    let a = 1.0 + abs(q);
    if q > 0.0 {
        powf(a, 1.0 + spec.gamma_p)
    } else {
        powf(a, 0.5 - spec.mu_p)
    }
}

/// First derivatives of interior fields through a ghost-padded copy.
#[derive(Debug, Clone)]
pub struct FieldDiff {
    pad: Padded,
    idx: Vec<usize>,
    inv12h: f64,
}

impl FieldDiff {
    pub fn new(grid: Grid3, symmetry: Symmetry, outer: FaceRule) -> Self {
        let pad = Padded::new(grid, 2, symmetry.faces(outer));
        Self {
            idx: pad.interior_indices(),
            inv12h: 1.0 / (12.0 * grid.dx),
            pad,
        }
    }

    /// `d_axis f` on the interior.
    pub fn derive(&self, f: &[f64], parity: [f64; 3], axis: usize) -> Vec<f64> {
        let p = self.pad.pad(f, parity);
        let s = self.pad.stride(axis);
        self.idx
            .iter()
            .map(|&i| centered::d1(&p, i, s, self.inv12h))
            .collect()
    }

    /// All three spatial derivatives.
    pub fn gradient(&self, f: &[f64], parity: [f64; 3]) -> [Vec<f64>; 3] {
        let p = self.pad.pad(f, parity);
        core::array::from_fn(|a| {
            let s = self.pad.stride(a);
            self.idx
                .iter()
                .map(|&i| centered::d1(&p, i, s, self.inv12h))
                .collect()
        })
    }
}

/// Reflection parity of `Z phi` relative to `phi`.
pub fn generator_parity(gen: Generator) -> [f64; 3] {
    match gen {
        Generator::Translation(a) => component_parity(&[a]),
        Generator::Rotation(a, b) => component_parity(&[a, b]),
        Generator::Scaling => [1.0; 3],
    }
}

fn times(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2]]
}

/// Consecutive evolution states with equal spacing, centred on the
/// middle one.
#[derive(Debug, Clone)]
pub struct StateWindow<'a> {
    pub states: &'a [EvolutionState],
    pub dt: f64,
    pub mass: f64,
    diff: FieldDiff,
}

impl<'a> StateWindow<'a> {
    pub fn new(states: &'a [EvolutionState], dt: f64, mass: f64) -> Result<Self> {
        if states.is_empty() || states.len() % 2 == 0 {
            return Err(Error::WindowTooSmall(
                "a window needs an odd number of states",
            ));
        }
        let s = &states[0];
        Ok(Self {
            states,
            dt,
            mass,
            diff: FieldDiff::new(s.grid, s.symmetry, FaceRule::Extrapolate),
        })
    }

    pub fn grid(&self) -> Grid3 {
        self.states[0].grid
    }

    pub fn symmetry(&self) -> Symmetry {
        self.states[0].symmetry
    }

    pub fn center(&self) -> &EvolutionState {
        &self.states[self.states.len() / 2]
    }

    pub fn t(&self) -> f64 {
        self.center().t
    }

    /// Component `f` of `h1 = g - m - h0` (or `psi`) on level `l`.
    pub fn remainder(&self, l: usize, f: usize) -> Vec<f64> {
        let s = &self.states[l];
        if f == PSI {
            return s.u[PSI].clone();
        }
        let (a, b) = SYM_PAIRS[f];
        let m = if a == b { ETA[a] } else { 0.0 };
        let grid = s.grid;
        s.u[f]
            .iter()
            .enumerate()
            .map(|(q, v)| {
                let h0 = if a == b {
                    background_coefficient(self.mass, s.t, grid.point_of(q))
                } else {
                    0.0
                };
                v - m - h0
            })
            .collect()
    }

    /// `d_t` of [`Self::remainder`] at the centre, from the evolved rate.
    pub fn remainder_rate(&self, f: usize) -> Vec<f64> {
        let s = self.center();
        if f == PSI || self.mass == 0.0 {
            return s.v[f].clone();
        }
        let (a, b) = SYM_PAIRS[f];
        if a != b {
            return s.v[f].clone();
        }
        let e = 1e-4;
        let grid = s.grid;
        s.v[f]
            .iter()
            .enumerate()
            .map(|(q, v)| {
                let x = grid.point_of(q);
                let t = s.t.max(e);
                let d = (background_coefficient(self.mass, t + e, x)
                    - background_coefficient(self.mass, t - e, x))
                    / (2.0 * e);
                v - d
            })
            .collect()
    }

    /// A field as a block over the window levels.
    pub fn block(&self, levels: Vec<Vec<f64>>) -> ScalarBlock {
        ScalarBlock {
            grid: self.grid(),
            t0: self.states[0].t,
            dt: self.dt,
            levels,
        }
    }

    /// `h1` component `f` (or `psi`) on every level.
    pub fn remainder_block(&self, f: usize) -> ScalarBlock {
        self.block(
            (0..self.states.len())
                .map(|l| self.remainder(l, f))
                .collect(),
        )
    }

    /// The middle `n` levels of the `psi` block.
    pub fn psi_block(&self, n: usize) -> Result<ScalarBlock> {
        check_levels(self.states.len(), n)?;
        let skip = (self.states.len() - n) / 2;
        let mut b = self.block(
            self.states[skip..skip + n]
                .iter()
                .map(|s| s.u[PSI].clone())
                .collect(),
        );
        b.t0 = self.states[skip].t;
        Ok(b)
    }
}

/// Squared weighted sum `sum_q w |d f|^2 dV` at the centre of `block`,
/// with `d_t f` either given or taken from the levels.
fn weighted_grad2(
    diff: &FieldDiff,
    block: &ScalarBlock,
    rate: Option<&[f64]>,
    parity: [f64; 3],
    weight: &[f64],
) -> Result<f64> {
    let c = block.center();
    let f = &block.levels[c];
    let grad = diff.gradient(f, parity);
    let dt: Vec<f64> = match rate {
        Some(r) => r.to_vec(),
        None => {
            check_levels(block.n_levels(), 3)?;
            let (a, b) = (&block.levels[c + 1], &block.levels[c - 1]);
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) / (2.0 * block.dt))
                .collect()
        }
    };
    let mut s = 0.0;
    for q in 0..f.len() {
        s += weight[q]
            * (dt[q] * dt[q]
                + grad[0][q] * grad[0][q]
                + grad[1][q] * grad[1][q]
                + grad[2][q] * grad[2][q]);
    }
    Ok(s)
}

/// `E_N(t) = sum_{|I| <= N} (||w^{1/2} d Z^I h1|| + ||w^{1/2} d Z^I psi||)`
/// at the centre of the window. Tensor norms sum all sixteen components.
pub fn energy_en(window: &StateWindow, n: usize, spec: &WeightSpec) -> Result<f64> {
    if n > 2 {
        return Err(Error::InvalidParameter("energy order above 2".into()));
    }
    check_levels(window.states.len(), if n == 0 { 1 } else { 2 * n + 3 })?;
    let grid = window.grid();
    let t = window.t();
    let weight: Vec<f64> = grid.sample(|x| weight_w(hypot3(x) - t, spec).0);
    let dv = grid.cell_volume() * window.symmetry().volume_factor();
    // sums[k][0] for h1, sums[k][1] for psi, one entry per multi-index.
    let mut sums: Vec<[f64; 2]> = Vec::new();
    for f in 0..NFIELDS {
        let (slot, mult) = if f == PSI {
            (1, 1.0)
        } else {
            let (a, b) = SYM_PAIRS[f];
            (0, if a == b { 1.0 } else { 2.0 })
        };
        let par = field_parity(f);
        let block = window.remainder_block(f);
        let rate = window.remainder_rate(f);
        let mut k = 0;
        let mut add = |k: &mut usize, v: f64| {
            if *k == sums.len() {
                sums.push([0.0; 2]);
            }
            sums[*k][slot] += mult * v;
            *k += 1;
        };
        add(
            &mut k,
            weighted_grad2(&window.diff, &block, Some(&rate), par, &weight)?,
        );
        if n >= 1 {
            for g1 in GENERATORS {
                let z1 = apply_z(g1, &block)?;
                let p1 = times(par, generator_parity(g1));
                add(
                    &mut k,
                    weighted_grad2(&window.diff, &z1, None, p1, &weight)?,
                );
                if n >= 2 {
                    for g2 in GENERATORS {
                        let z2 = apply_z(g2, &z1)?;
                        let p2 = times(p1, generator_parity(g2));
                        add(
                            &mut k,
                            weighted_grad2(&window.diff, &z2, None, p2, &weight)?,
                        );
                    }
                }
            }
        }
    }
    Ok(sums.iter().map(|s| sqrt(s[0] * dv) + sqrt(s[1] * dv)).sum())
}

/// Spatial derivatives `dg[c][a]` of the ten metric components.
fn metric_gradients(state: &EvolutionState, diff: &FieldDiff) -> Vec<[Vec<f64>; 3]> {
    (0..10)
        .map(|c| diff.gradient(&state.u[c], field_parity(c)))
        .collect()
}

/// `d_a g_{mu nu}` at point `q` with the time derivative from the state.
fn point_dg(state: &EvolutionState, dg: &[[Vec<f64>; 3]], q: usize) -> [SymTensor2; 4] {
    let mut out = [SymTensor2::ZERO; 4];
    for c in 0..10 {
        out[0].c[c] = state.v[c][q];
        for a in 0..3 {
            out[a + 1].c[c] = dg[c][a][q];
        }
    }
    out
}

/// `Gamma^l = g^{lm} g^{ab} (d_a g_{bm} - d_m g_{ab} / 2)` at every
/// interior point of a slice.
pub fn gauge_field(state: &EvolutionState) -> Result<Vec<[f64; 4]>> {
    let diff = FieldDiff::new(state.grid, state.symmetry, FaceRule::Extrapolate);
    let dg = metric_gradients(state, &diff);
    let mut out = vec![[0.0; 4]; state.grid.len()];
    for (q, o) in out.iter_mut().enumerate() {
        let g = state.metric(q).to_matrix();
        let (gi, _) = invert4(&g).ok_or(Error::SingularMetric {
            index: state.grid.ijk(q),
        })?;
        let d = point_dg(state, &dg, q);
        let mut low = [0.0; 4];
        for (m, l) in low.iter_mut().enumerate() {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    s += gi[a][b] * (d[a].get(b, m) - 0.5 * d[m].get(a, b));
                }
            }
            *l = s;
        }
        for l in 0..4 {
            o[l] = (0..4).map(|m| gi[l][m] * low[m]).sum();
        }
    }
    Ok(out)
}

fn in_core(state: &EvolutionState, q: usize) -> bool {
    state.symmetry.edge_distance(&state.grid, state.grid.ijk(q)) >= GAUGE_MARGIN
}

/// `sup |Gamma^l|` over points at least [`GAUGE_MARGIN`] cells inside.
pub fn gauge_residual_sup(state: &EvolutionState) -> Result<f64> {
    let gam = gauge_field(state)?;
    Ok(gam
        .iter()
        .enumerate()
        .filter(|(q, _)| in_core(state, *q))
        .flat_map(|(_, v)| v.iter().map(|x| abs(*x)))
        .fold(0.0, f64::max))
}

/// `sup |d_i Laplacian h|` over the core: the size of the leading
/// truncation term of the gauge vector.
pub fn gauge_truncation_scale(state: &EvolutionState) -> Result<f64> {
    let pad = Padded::new(state.grid, 2, state.symmetry.faces(FaceRule::Extrapolate));
    let diff = FieldDiff::new(state.grid, state.symmetry, FaceRule::Extrapolate);
    let idx = pad.interior_indices();
    let inv12h2 = 1.0 / (12.0 * state.grid.dx * state.grid.dx);
    let mut sup = 0.0f64;
    for c in 0..10 {
        let par = field_parity(c);
        let p = pad.pad(&state.u[c], par);
        let lap: Vec<f64> = idx
            .iter()
            .map(|&i| {
                (0..3)
                    .map(|a| centered::d2(&p, i, pad.stride(a), inv12h2))
                    .sum()
            })
            .collect();
        for g in diff.gradient(&lap, par) {
            for (q, v) in g.iter().enumerate() {
                if in_core(state, q) {
                    sup = sup.max(abs(*v));
                }
            }
        }
    }
    Ok(sup)
}

/// Sups over the annulus `|r - t| <= 5`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NullMonitor {
    pub t: f64,
    /// `|dh|_{TU}`
    pub tu: f64,
    /// `|dh|_{LL}`
    pub ll: f64,
    /// `|dh|_{Lbar Lbar}`
    pub lblb: f64,
    /// `|dh|` over the whole frame.
    pub full: f64,
    /// `|d psi|`
    pub dpsi: f64,
    /// `|h|_{LT}`
    pub h_lt: f64,
    pub points: usize,
}

/// Interior indices in the annulus around the cone at time `t`, or
/// [`Error::AnnulusClipped`] if it leaves the domain.
pub fn annulus_points(grid: &Grid3, symmetry: Symmetry, t: f64) -> Result<Vec<usize>> {
    if t + ANNULUS_HALF_WIDTH > symmetry.inscribed_radius(grid) {
        return Err(Error::AnnulusClipped);
    }
    Ok((0..grid.len())
        .filter(|&q| abs(hypot3(grid.point_of(q)) - t) <= ANNULUS_HALF_WIDTH)
        .collect())
}

/// `|(X^a d_a p)(Lbar, Lbar)|` summed over the frame directions `X`.
fn lblb_component(dp: &[SymTensor2; 4], frame: &NullFrame) -> f64 {
    let lb = frame.lbar;
    [frame.l, frame.lbar, frame.s1, frame.s2]
        .iter()
        .map(|x| {
            let mut s = 0.0;
            for a in 0..4 {
                s += x[a] * dp[a].contract(lb, lb);
            }
            abs(s)
        })
        .sum()
}

/// Null components of `dh` (`h = g - m`) at the window centre.
pub fn null_monitor(window: &StateWindow) -> Result<NullMonitor> {
    let s = window.center();
    let grid = s.grid;
    let pts = annulus_points(&grid, s.symmetry, s.t)?;
    let dg = metric_gradients(s, &window.diff);
    let dpsi = window.diff.gradient(&s.u[PSI], [1.0; 3]);
    let m = SymTensor2::minkowski();
    let mut out = NullMonitor {
        t: s.t,
        points: pts.len(),
        ..Default::default()
    };
    for &q in &pts {
        let frame = NullFrame::at(grid.point_of(q))?;
        let d = point_dg(s, &dg, q);
        let h = s.metric(q).sub(&m);
        use FrameFamily::*;
        out.tu = out
            .tu
            .max(derivative_seminorm(&d, &frame, Full, Tangent, Full));
        out.ll = out
            .ll
            .max(derivative_seminorm(&d, &frame, Full, Outgoing, Outgoing));
        out.lblb = out.lblb.max(lblb_component(&d, &frame));
        out.full = out
            .full
            .max(derivative_seminorm(&d, &frame, Full, Full, Full));
        out.h_lt = out.h_lt.max(seminorm(&h, &frame, Outgoing, Tangent));
        let gp = [s.v[PSI][q], dpsi[0][q], dpsi[1][q], dpsi[2][q]];
        out.dpsi = out.dpsi.max(sqrt(gp.iter().map(|v| v * v).sum()));
    }
    Ok(out)
}

/// Klainerman-Sobolev ratio at the centre time of `phi`:
/// `sup_x |phi| (1 + t + |q|) ((1 + |q|) w(q))^{1/2}` over
/// `sum_{|I| <= 2} ||w^{1/2} Z^I phi||`. Needs five levels.
pub fn ks_ratio(phi: &ScalarBlock, symmetry: Symmetry, spec: &WeightSpec) -> Result<f64> {
    check_levels(phi.n_levels(), 5)?;
    let grid = phi.grid;
    let t = phi.center_time();
    let w: Vec<f64> = grid.sample(|x| weight_w(hypot3(x) - t, spec).0);
    let dv = grid.cell_volume() * symmetry.volume_factor();
    let norm = |b: &ScalarBlock| -> f64 {
        let c = b.center_level();
        sqrt(c.iter().zip(&w).map(|(v, w)| w * v * v).sum::<f64>() * dv)
    };
    let mut den = norm(phi);
    for g1 in GENERATORS {
        let z1 = apply_z(g1, phi)?;
        den += norm(&z1);
        for g2 in GENERATORS {
            den += norm(&apply_z(g2, &z1)?);
        }
    }
    let c = phi.center_level();
    let mut num = 0.0f64;
    for (q, v) in c.iter().enumerate() {
        let qq = hypot3(grid.point_of(q)) - t;
        let (wq, _) = weight_w(qq, spec);
        num = num.max(abs(*v) * (1.0 + t + abs(qq)) * sqrt((1.0 + abs(qq)) * wq));
    }
    ratio(num, den)
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if num == 0.0 {
        Ok(0.0)
    } else if den == 0.0 {
        Err(Error::ZeroDenominator)
    } else {
        Ok(num / den)
    }
}

/// Hardy ratio for a radial profile `u(r) -> (u, u')` supported in
/// `[0, r_max]`: left side of the cone-weighted inequality over its right
/// side (without the constant), by Simpson with `n` intervals per piece.
pub fn hardy_ratio(
    u: impl Fn(f64) -> (f64, f64),
    r_max: f64,
    t: f64,
    alpha: f64,
    spec: &WeightSpec,
    n: usize,
) -> Result<f64> {
    if !(0.0..=2.0).contains(&alpha) || t < 0.0 {
        return Err(Error::InvalidParameter(
            "need 0 <= alpha <= 2 and t >= 0".into(),
        ));
    }
    let (g, m) = (spec.gamma, spec.mu);
    let base = |r: f64| r * r / powf(1.0 + t + r, alpha);
    let inner_l = |r: f64| {
        let (v, _) = u(r);
        v * v / powf(1.0 + abs(r - t), 2.0 + m) * base(r)
    };
    let inner_r = |r: f64| {
        let (_, d) = u(r);
        d * d / powf(1.0 + abs(r - t), m) * base(r)
    };
    let outer_l = |r: f64| {
        let (v, _) = u(r);
        v * v / powf(1.0 + abs(r - t), 1.0 - g) * base(r)
    };
    let outer_r = |r: f64| {
        let (_, d) = u(r);
        d * d * powf(1.0 + abs(r - t), 1.0 + g) * base(r)
    };
    let split = t.min(r_max);
    let mut lhs = simpson(0.0, split, n, inner_l);
    let mut rhs = simpson(0.0, split, n, inner_r);
    if r_max > t {
        lhs += simpson(t, r_max, n, outer_l);
        rhs += simpson(t, r_max, n, outer_r);
    }
    ratio(lhs, rhs)
}

/// Classical Hardy ratio `int |f|^2 / |x|^2` over `4 int |grad f|^2` for
/// a radial `f(r) -> (f, f')` supported in `[0, r_max]`.
pub fn classical_hardy_ratio(f: impl Fn(f64) -> (f64, f64), r_max: f64, n: usize) -> Result<f64> {
    let lhs = simpson(0.0, r_max, n, |r| f(r).0 * f(r).0);
    let rhs = 4.0 * simpson(0.0, r_max, n, |r| f(r).1 * f(r).1 * r * r);
    ratio(lhs, rhs)
}

/// Quadrature for [`hormander_ratio`]: the source integral runs over
/// `s in [0, t]` and the ball of radius `radius` about `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HormanderQuadrature {
    pub center: [f64; 3],
    pub radius: f64,
    pub n_time: usize,
    pub n_radial: usize,
    pub n_polar: usize,
}

impl Default for HormanderQuadrature {
    fn default() -> Self {
        Self {
            center: [0.0; 3],
            radius: 4.0,
            n_time: 16,
            n_radial: 16,
            n_polar: 12,
        }
    }
}

/// `sum_{|I| <= 2} |Z^I g|` at one event from the analytic jet.
pub fn z_sum_second_order(g: &dyn SpacetimeFunction, t: f64, x: [f64; 3]) -> f64 {
    let j = g.jet(t, x);
    let mut s = abs(j.v);
    for g1 in GENERATORS {
        let z1 = g1.coefficients(t, x);
        let d1: f64 = (0..4).map(|a| z1[a] * j.d1[a]).sum();
        s += abs(d1);
        for g2 in GENERATORS {
            // Z2 (z1^a d_a g) = z2^b (d_b z1^a) d_a g + z2^b z1^a d_ab g.
            let z2 = g2.coefficients(t, x);
            let c = g1.coefficient_gradient();
            let mut v = 0.0;
            for b in 0..4 {
                if z2[b] == 0.0 {
                    continue;
                }
                for a in 0..4 {
                    v += z2[b] * (c[b][a] * j.d1[a] + z1[a] * j.d2[a][b]);
                }
            }
            s += abs(v);
        }
    }
    s
}

/// `|w(t, x)| (1 + t + |x|)` over
/// `sum_{|I| <= 2} int_0^t int |Z^I g(s, y)| / (1 + s + |y|) dy ds`,
/// with `w` the retarded solution of `box w = g`.
pub fn hormander_ratio(
    g: &dyn SpacetimeFunction,
    t: f64,
    x: [f64; 3],
    quad: &HormanderQuadrature,
) -> Result<f64> {
    let rule = SphereRule::new(quad.n_polar.max(16));
    let w = crate::evolution::duhamel_eval(|s, y| g.value(s, y), t, x, &rule, quad.n_time.max(16))?;
    let lhs = abs(w) * (1.0 + t + hypot3(x));
    let sphere = SphereRule::new(quad.n_polar);
    let radial = gauss_on(quad.n_radial, 0.0, quad.radius);
    let c = quad.center;
    let mut rhs = 0.0;
    for (s, ws) in gauss_on(quad.n_time, 0.0, t) {
        for &(rho, wr) in &radial {
            let shell = 4.0 * crate::math::PI * rho * rho * wr;
            let m = sphere.mean(|o| {
                let y = [c[0] + rho * o[0], c[1] + rho * o[1], c[2] + rho * o[2]];
                z_sum_second_order(g, s, y) / (1.0 + s + hypot3(y))
            });
            rhs += ws * shell * m;
        }
    }
    ratio(lhs, rhs)
}

/// Ratios of the wave-coordinate estimates on the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WavecReport {
    /// `sup |dH|_{LT} / (|dbar H| + |H| |dH| + floor)`.
    pub ratio: f64,
    /// The first-order version with one vector field.
    pub ratio_z: f64,
    pub samples: usize,
    pub floor: f64,
}

/// `H^{mu nu} = g^{mu nu} - m^{mu nu}`, lowered with `m`.
fn inverse_perturbation_low(g: &SymTensor2) -> Option<(SymTensor2, [[f64; 4]; 4])> {
    let (gi, _) = invert4(&g.to_matrix())?;
    let h = SymTensor2::from_fn(|a, b| {
        let m = if a == b { ETA[a] } else { 0.0 };
        ETA[a] * ETA[b] * (gi[a][b] - m)
    });
    Some((h, gi))
}

/// Wave-coordinate ratios at the window centre over the annulus. `floor`
/// is added to every denominator.
pub fn wavec_ratio(window: &StateWindow, floor: f64) -> Result<WavecReport> {
    check_levels(window.states.len(), 5)?;
    let s = window.center();
    let grid = s.grid;
    let pts = annulus_points(&grid, s.symmetry, s.t)?;
    let nl = window.states.len();
    // Lowered H on every level, per component.
    let mut hl: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; grid.len()]; nl]; 10];
    for (l, st) in window.states.iter().enumerate() {
        for q in 0..grid.len() {
            let (h, _) = inverse_perturbation_low(&st.metric(q))
                .ok_or(Error::SingularMetric { index: grid.ijk(q) })?;
            for c in 0..10 {
                hl[c][l][q] = h.c[c];
            }
        }
    }
    let dg = metric_gradients(s, &window.diff);
    // dH at the centre: -H_up dg H_up with the evolved time derivative,
    // lowered again.
    let mut dh = vec![[SymTensor2::ZERO; 4]; grid.len()];
    let mut hc = vec![SymTensor2::ZERO; grid.len()];
    for q in 0..grid.len() {
        let (h, gi) = inverse_perturbation_low(&s.metric(q))
            .ok_or(Error::SingularMetric { index: grid.ijk(q) })?;
        hc[q] = h;
        let d = point_dg(s, &dg, q);
        for a in 0..4 {
            dh[q][a] = SymTensor2::from_fn(|m, n| {
                let mut v = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        v -= gi[m][i] * d[a].get(i, j) * gi[j][n];
                    }
                }
                ETA[m] * ETA[n] * v
            });
        }
    }
    let mut report = WavecReport {
        samples: pts.len(),
        floor,
        ..Default::default()
    };
    use FrameFamily::*;
    let mut frames = Vec::with_capacity(pts.len());
    for &q in &pts {
        frames.push(NullFrame::at(grid.point_of(q))?);
    }
    let mut dbar_h = vec![0.0; pts.len()];
    let mut dfull_h = vec![0.0; pts.len()];
    for (k, &q) in pts.iter().enumerate() {
        let f = &frames[k];
        let num = derivative_seminorm(&dh[q], f, Full, Outgoing, Tangent);
        dbar_h[k] = derivative_seminorm(&dh[q], f, Tangent, Full, Full);
        dfull_h[k] = derivative_seminorm(&dh[q], f, Full, Full, Full);
        let hn = seminorm(&hc[q], f, Full, Full);
        let r = num / (dbar_h[k] + hn * dfull_h[k] + floor);
        if num > 0.0 {
            report.ratio = report.ratio.max(r);
        }
    }
    // One vector field: Z H on the levels, then d at the centre.
    for gen in GENERATORS {
        let par = generator_parity(gen);
        let mut zc: Vec<Vec<f64>> = Vec::with_capacity(10);
        let mut zdt: Vec<Vec<f64>> = Vec::with_capacity(10);
        for comp in 0..10 {
            let zb = apply_z(gen, &window.block(hl[comp].clone()))?;
            check_levels(zb.n_levels(), 3)?;
            let m = zb.center();
            let dt: Vec<f64> = zb.levels[m + 1]
                .iter()
                .zip(&zb.levels[m - 1])
                .map(|(a, b)| (a - b) / (2.0 * zb.dt))
                .collect();
            zc.push(zb.levels[m].clone());
            zdt.push(dt);
        }
        let grads: Vec<[Vec<f64>; 3]> = (0..10)
            .map(|comp| {
                window
                    .diff
                    .gradient(&zc[comp], times(field_parity(comp), par))
            })
            .collect();
        for (k, &q) in pts.iter().enumerate() {
            let f = &frames[k];
            let mut dz = [SymTensor2::ZERO; 4];
            let mut zh = SymTensor2::ZERO;
            for comp in 0..10 {
                zh.c[comp] = zc[comp][q];
                dz[0].c[comp] = zdt[comp][q];
                for a in 0..3 {
                    dz[a + 1].c[comp] = grads[comp][a][q];
                }
            }
            let num = derivative_seminorm(&dz, f, Full, Outgoing, Tangent);
            if num == 0.0 {
                continue;
            }
            let hn = seminorm(&hc[q], f, Full, Full);
            let zn = seminorm(&zh, f, Full, Full);
            let dzn = derivative_seminorm(&dz, f, Full, Full, Full);
            let den = derivative_seminorm(&dz, f, Tangent, Full, Full)
                + dbar_h[k]
                + dfull_h[k]
                + zn * dfull_h[k]
                + hn * dzn
                + floor;
            report.ratio_z = report.ratio_z.max(num / den);
        }
    }
    Ok(report)
}

/// One sample of [`energy_balance_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceSample {
    pub t: f64,
    /// `int w (psi_t^2 + |grad psi|^2)`
    pub energy: f64,
    /// `int w' |dbar psi|^2`, never negative.
    pub flux: f64,
    /// `E(t) - E(t_0) + int_{t_0}^t flux`.
    pub residual: f64,
}

/// Energy identity of a linear run sampled at equally spaced states.
/// With `weight = None` the weight is one and the residual is the drift.
pub fn energy_balance_residual(
    states: &[EvolutionState],
    weight: Option<&WeightSpec>,
    periodic: bool,
) -> Result<Vec<BalanceSample>> {
    let Some(first) = states.first() else {
        return Ok(Vec::new());
    };
    let rule = if periodic {
        FaceRule::Periodic
    } else {
        FaceRule::Extrapolate
    };
    let grid = first.grid;
    let diff = FieldDiff::new(grid, first.symmetry, rule);
    let dv = grid.cell_volume() * first.symmetry.volume_factor();
    let mut out: Vec<BalanceSample> = Vec::with_capacity(states.len());
    let mut acc = 0.0;
    for s in states {
        let grad = diff.gradient(&s.u[PSI], [1.0; 3]);
        let (mut e, mut fl) = (0.0, 0.0);
        for q in 0..grid.len() {
            let x = grid.point_of(q);
            let pt = s.v[PSI][q];
            let g = [grad[0][q], grad[1][q], grad[2][q]];
            let g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
            let (w, wp) = match weight {
                Some(spec) => weight_w(hypot3(x) - s.t, spec),
                None => (1.0, 0.0),
            };
            e += w * (pt * pt + g2);
            if wp != 0.0 {
                let r = hypot3(x);
                let dr = (x[0] * g[0] + x[1] * g[1] + x[2] * g[2]) / r;
                let lpsi = pt + dr;
                fl += wp * (lpsi * lpsi + g2 - dr * dr);
            }
        }
        let (e, fl) = (e * dv, fl * dv);
        if let Some(prev) = out.last() {
            acc += 0.5 * (s.t - prev.t) * (fl + prev.flux);
        }
        let e0 = out.first().map_or(e, |p| p.energy);
        out.push(BalanceSample {
            t: s.t,
            energy: e,
            flux: fl,
            residual: e - e0 + acc,
        });
    }
    Ok(out)
}

/// One row of a run's diagnostic series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `E_0 .. E_N`.
    pub energies: Vec<f64>,
    pub gauge_sup: f64,
    /// `10 dx^2` times the initial truncation scale.
    pub gauge_floor: f64,
    /// `None` while the annulus does not fit in the domain.
    pub null: Option<NullMonitor>,
    pub ks: Option<f64>,
    /// Wave-coordinate ratios, floored at ten times `gauge_sup`.
    pub wavec: Option<WavecReport>,
    /// Largest deviation of any field from flat space.
    pub max_deviation: f64,
}

/// Time-ordered records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticSeries {
    pub records: Vec<DiagnosticRecord>,
}

impl DiagnosticSeries {
    /// Append a record; times must increase.
    pub fn push(&mut self, r: DiagnosticRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if !(r.t > last.t) {
                return Err(Error::InvalidParameter("record times must increase".into()));
            }
        }
        self.records.push(r);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, f: impl Fn(&DiagnosticRecord) -> Option<f64>) -> (Vec<f64>, Vec<f64>) {
        self.records
            .iter()
            .filter_map(|r| f(r).map(|v| (r.t, v)))
            .unzip()
    }
}

/// Everything recorded at one output time.
pub fn record(window: &StateWindow, cfg: &RunConfig, gauge_scale: f64) -> Result<DiagnosticRecord> {
    let s = window.center();
    let energies = (0..=cfg.energy_order)
        .map(|n| energy_en(window, n, &cfg.weights))
        .collect::<Result<Vec<_>>>()?;
    let null = match null_monitor(window) {
        Ok(m) => Some(m),
        Err(Error::AnnulusClipped) => None,
        Err(e) => return Err(e),
    };
    let ks = if cfg.ks_monitor {
        Some(ks_ratio(&window.psi_block(5)?, s.symmetry, &cfg.weights)?)
    } else {
        None
    };
    let gauge_sup = gauge_residual_sup(s)?;
    let wavec = if cfg.wavec_monitor {
        match wavec_ratio(window, 10.0 * gauge_sup) {
            Ok(w) => Some(w),
            Err(Error::AnnulusClipped) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(DiagnosticRecord {
        t: s.t,
        energies,
        gauge_sup,
        gauge_floor: 10.0 * s.grid.dx * s.grid.dx * gauge_scale,
        null,
        ks,
        wavec,
        max_deviation: s.max_deviation(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::SpacetimeGaussian;
    use crate::evolution::{run_to, scalar_slice, Boundary, Mode, RunConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// States sampled from `f(t, x) -> (h, d_t h, psi, d_t psi)` with
    /// `g = m + h`.
    fn states_from(
        grid: Grid3,
        symmetry: Symmetry,
        t_center: f64,
        dt: f64,
        levels: usize,
        f: impl Fn(f64, [f64; 3]) -> (SymTensor2, SymTensor2, f64, f64),
    ) -> Vec<EvolutionState> {
        let t0 = t_center - dt * ((levels - 1) / 2) as f64;
        (0..levels)
            .map(|l| {
                let t = t0 + l as f64 * dt;
                let mut s = EvolutionState::flat(grid, symmetry);
                s.t = t;
                for q in 0..grid.len() {
                    let (h, dh, p, dp) = f(t, grid.point_of(q));
                    for c in 0..10 {
                        s.u[c][q] += h.c[c];
                        s.v[c][q] = dh.c[c];
                    }
                    s.u[PSI][q] = p;
                    s.v[PSI][q] = dp;
                }
                s
            })
            .collect()
    }

    /// A smooth outgoing-ish scalar and a diagonal metric perturbation.
    fn smooth_fields(amp: f64) -> impl Fn(f64, [f64; 3]) -> (SymTensor2, SymTensor2, f64, f64) {
        move |t, x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let e = libm::exp(-0.5 * r2 - 0.1 * t * t);
            let de = -0.2 * t * e;
            let mut h = SymTensor2::ZERO;
            let mut dh = SymTensor2::ZERO;
            for a in 0..4 {
                h.set(a, a, 0.5 * amp * e);
                dh.set(a, a, 0.5 * amp * de);
            }
            (h, dh, amp * e, amp * de)
        }
    }

    #[test]
    fn weight_values() {
        let s = WeightSpec::default();
        assert_eq!(weight_w(0.0, &s).0, 2.0);
        assert!((weight_w(3.0, &s).0 - 9.0).abs() < 1e-14);
        assert!((weight_w(-3.0, &s).0 - 1.5).abs() < 1e-14);
        assert!((varpi(3.0, &s) - libm::pow(4.0, 1.25)).abs() < 1e-12);
        assert!((varpi(-3.0, &s) - libm::pow(4.0, 0.25)).abs() < 1e-12);
    }

    #[test]
    fn weight_derivative_bound_on_dense_grid() {
        for (g, m) in [(0.01, 0.01), (0.25, 0.25), (1.0, 0.49), (0.5, 0.1)] {
            let s = WeightSpec {
                gamma: g,
                mu: m,
                ..Default::default()
            };
            for k in -200_000..=200_000 {
                let q = k as f64 * 1e-3;
                let (w, wp) = weight_w(q, &s);
                assert!(wp >= 0.0 && wp <= 4.0 * w / (1.0 + q.abs()), "{q} {w} {wp}");
            }
        }
    }

    #[test]
    fn weight_spec_ranges() {
        let d = WeightSpec::default();
        assert!(d.validate().is_ok());
        assert!(WeightSpec { gamma: 0.0, ..d }.validate().is_err());
        assert!(WeightSpec { gamma: 1.5, ..d }.validate().is_err());
        assert!(WeightSpec { mu: 0.5, ..d }.validate().is_err());
        assert!(WeightSpec { gamma_p: -1.5, ..d }.validate().is_err());
        assert!(WeightSpec { mu_p: 0.75, ..d }.validate().is_err());
    }

    fn energy_window(amp: f64, n: usize, dt: f64) -> Vec<EvolutionState> {
        states_from(
            Grid3::octant(n, 6.0),
            Symmetry::Octant,
            1.0,
            dt,
            7,
            smooth_fields(amp),
        )
    }

    #[test]
    fn energy_flat_scaling_and_monotone() {
        let spec = WeightSpec::default();
        let flat = energy_window(0.0, 12, 0.1);
        let w = StateWindow::new(&flat, 0.1, 0.0).unwrap();
        for n in 0..=2 {
            assert_eq!(energy_en(&w, n, &spec).unwrap(), 0.0);
        }
        let a = energy_window(1e-3, 12, 0.1);
        let b = energy_window(3e-3, 12, 0.1);
        let wa = StateWindow::new(&a, 0.1, 0.0).unwrap();
        let wb = StateWindow::new(&b, 0.1, 0.0).unwrap();
        let mut prev = 0.0;
        for n in 0..=2 {
            let ea = energy_en(&wa, n, &spec).unwrap();
            let eb = energy_en(&wb, n, &spec).unwrap();
            assert!((eb / ea / 3.0 - 1.0).abs() < 1e-6);
            assert!(ea > prev);
            prev = ea;
        }
        assert!(energy_en(&wa, 3, &spec).is_err());
    }

    #[test]
    fn energy_quadrature_refinement() {
        let spec = WeightSpec::default();
        let e: Vec<f64> = [12, 24, 48]
            .iter()
            .map(|&n| {
                let s = states_from(
                    Grid3::octant(n, 6.0),
                    Symmetry::Octant,
                    1.0,
                    0.05,
                    1,
                    smooth_fields(1e-3),
                );
                energy_en(&StateWindow::new(&s, 0.05, 0.0).unwrap(), 0, &spec).unwrap()
            })
            .collect();
        let ratio = (e[0] - e[1]).abs() / (e[1] - e[2]).abs();
        assert!(ratio >= 3.5, "{e:?} {ratio}");
    }

    #[test]
    fn gauge_residual_of_flat_and_of_a_gauge_violation() {
        let grid = Grid3::octant(12, 6.0);
        let flat = EvolutionState::flat(grid, Symmetry::Octant);
        assert_eq!(gauge_residual_sup(&flat).unwrap(), 0.0);
        assert_eq!(gauge_truncation_scale(&flat).unwrap(), 0.0);
        // A time-dependent conformal factor on the spatial metric breaks
        // the wave-coordinate condition at first order.
        let s = states_from(grid, Symmetry::Octant, 0.0, 0.1, 1, |_, x| {
            let e = 1e-3 * libm::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
            let mut dh = SymTensor2::ZERO;
            for a in 1..4 {
                dh.set(a, a, e);
            }
            (SymTensor2::ZERO, dh, 0.0, 0.0)
        });
        let r = gauge_residual_sup(&s[0]).unwrap();
        assert!(r > 1e-4, "{r}");
    }

    #[test]
    fn null_monitor_flat_linear_and_clipped() {
        let grid = Grid3::octant(16, 8.0);
        let sym = Symmetry::Octant;
        let flat = states_from(grid, sym, 1.0, 0.1, 5, |_, _| {
            (SymTensor2::ZERO, SymTensor2::ZERO, 0.0, 0.0)
        });
        let m = null_monitor(&StateWindow::new(&flat, 0.1, 0.0).unwrap()).unwrap();
        assert_eq!([m.tu, m.ll, m.lblb, m.full, m.dpsi, m.h_lt], [0.0; 6]);
        assert!(m.points > 0);
        let a = states_from(grid, sym, 1.0, 0.1, 5, smooth_fields(1e-3));
        let b = states_from(grid, sym, 1.0, 0.1, 5, smooth_fields(2e-3));
        let ma = null_monitor(&StateWindow::new(&a, 0.1, 0.0).unwrap()).unwrap();
        let mb = null_monitor(&StateWindow::new(&b, 0.1, 0.0).unwrap()).unwrap();
        for (x, y) in [ma.tu, ma.ll, ma.lblb, ma.full, ma.dpsi, ma.h_lt]
            .iter()
            .zip([mb.tu, mb.ll, mb.lblb, mb.full, mb.dpsi, mb.h_lt])
        {
            assert!(*x > 0.0);
            assert!((y / x - 2.0).abs() < 1e-9);
        }
        let late = states_from(grid, sym, 4.0, 0.1, 5, smooth_fields(1e-3));
        let r = null_monitor(&StateWindow::new(&late, 0.1, 0.0).unwrap());
        assert!(matches!(r, Err(Error::AnnulusClipped)));
    }

    fn bump_block(grid: Grid3, t: f64, c: [f64; 3], width: f64, amp: f64) -> ScalarBlock {
        ScalarBlock::from_fn(grid, t, 0.1, 5, |_, x| {
            let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
            amp * libm::exp(-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (width * width))
        })
    }

    #[test]
    fn ks_ratio_bounded_over_random_bumps() {
        let grid = Grid3::centered_cube(16, 5.0);
        let spec = WeightSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let c = [
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
            ];
            let width = rng.random_range(1.2..2.0);
            let amp = rng.random_range(-1.0..1.0);
            for t in [0.0, 5.0, 10.0] {
                let r =
                    ks_ratio(&bump_block(grid, t, c, width, amp), Symmetry::Full, &spec).unwrap();
                assert!(r.is_finite() && r > 0.0);
                worst = worst.max(r);
            }
        }
        assert!(worst <= 20.0, "{worst}");
    }

    #[test]
    fn ks_ratio_zero_scale_and_grid_offset() {
        let spec = WeightSpec::default();
        let grid = Grid3::centered_cube(16, 5.0);
        let zero = ScalarBlock::from_fn(grid, 0.0, 0.1, 5, |_, _| 0.0);
        assert_eq!(ks_ratio(&zero, Symmetry::Full, &spec).unwrap(), 0.0);
        let b = bump_block(grid, 0.0, [0.3, -0.2, 0.1], 1.5, 1.0);
        let r = ks_ratio(&b, Symmetry::Full, &spec).unwrap();
        let r7 = ks_ratio(&b.scale(7.0), Symmetry::Full, &spec).unwrap();
        assert!((r7 / r - 1.0).abs() < 1e-12);
        // Moving the sampling grid under a fixed bump changes only the
        // discretisation.
        for shift in [0.1, 0.25, 0.5] {
            let mut g = grid;
            for a in 0..3 {
                g.lo[a] += shift * grid.dx;
            }
            let rs = ks_ratio(
                &bump_block(g, 0.0, [0.3, -0.2, 0.1], 1.5, 1.0),
                Symmetry::Full,
                &spec,
            )
            .unwrap();
            assert!((rs / r - 1.0).abs() <= 0.01, "{shift} {r} {rs}");
        }
        let short = ScalarBlock::from_fn(grid, 0.0, 0.1, 3, |_, _| 1.0);
        assert!(ks_ratio(&short, Symmetry::Full, &spec).is_err());
    }

    #[test]
    fn classical_hardy_gaussian() {
        let r = classical_hardy_ratio(
            |r| (libm::exp(-0.5 * r * r), -r * libm::exp(-0.5 * r * r)),
            12.0,
            2000,
        )
        .unwrap();
        assert!((r - 1.0 / 3.0).abs() < 1e-3, "{r}");
        assert_eq!(classical_hardy_ratio(|_| (0.0, 0.0), 5.0, 10).unwrap(), 0.0);
    }

    /// `amp (1 - ((r - r0) / a)^2)^3` on `|r - r0| < a`.
    fn radial_bump(r0: f64, a: f64, amp: f64) -> impl Fn(f64) -> (f64, f64) {
        move |r| {
            let z = (r - r0) / a;
            if z.abs() >= 1.0 {
                return (0.0, 0.0);
            }
            let b = 1.0 - z * z;
            (amp * b * b * b, amp * 3.0 * b * b * (-2.0 * z / a))
        }
    }

    fn hardy_sweep(spec: &WeightSpec, n: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let a = rng.random_range(0.5..4.0);
            let r0 = rng.random_range(a..16.0);
            let amp = rng.random_range(0.1..2.0);
            let t = rng.random_range(0.0..20.0);
            let alpha = rng.random_range(0.0..2.0);
            let r = hardy_ratio(radial_bump(r0, a, amp), r0 + a, t, alpha, spec, n).unwrap();
            worst = worst.max(r);
        }
        worst
    }

    #[test]
    fn hardy_constant_is_stable_across_resolutions() {
        for (g, m) in [(0.25, 0.25), (0.5, 0.1)] {
            let spec = WeightSpec {
                gamma: g,
                mu: m,
                ..Default::default()
            };
            let c1 = hardy_sweep(&spec, 400);
            let c2 = hardy_sweep(&spec, 800);
            assert!(c1.is_finite() && c1 > 0.0);
            assert!((c1 / c2 - 1.0).abs() <= 0.1, "{c1} {c2}");
        }
        let spec = WeightSpec::default();
        assert_eq!(
            hardy_ratio(|_| (0.0, 0.0), 5.0, 1.0, 1.0, &spec, 10).unwrap(),
            0.0
        );
        let u = radial_bump(4.0, 2.0, 1.0);
        let r1 = hardy_ratio(&u, 6.0, 3.0, 1.0, &spec, 400).unwrap();
        let r2 = hardy_ratio(|r| (5.0 * u(r).0, 5.0 * u(r).1), 6.0, 3.0, 1.0, &spec, 400).unwrap();
        assert!((r1 / r2 - 1.0).abs() < 1e-12);
        assert!(hardy_ratio(&u, 6.0, 3.0, 2.5, &spec, 10).is_err());
    }

    #[test]
    fn hormander_ratio_bounded_and_scale_free() {
        let quad = HormanderQuadrature::default();
        let zero = SpacetimeGaussian {
            amp: 0.0,
            center: [1.0, 0.0, 0.0, 0.0],
            width: 1.0,
        };
        assert_eq!(hormander_ratio(&zero, 2.0, [0.0; 3], &quad).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let g = SpacetimeGaussian {
                amp: rng.random_range(0.5..2.0),
                center: [
                    rng.random_range(0.5..1.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                ],
                width: rng.random_range(0.6..1.0),
            };
            let t = rng.random_range(1.0..4.0);
            let x = [
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                0.0,
            ];
            let r = hormander_ratio(&g, t, x, &quad).unwrap();
            worst = worst.max(r);
        }
        assert!(worst <= 5.0, "{worst}");
        let g = SpacetimeGaussian {
            amp: 1.0,
            center: [1.0, 0.2, 0.0, 0.0],
            width: 0.8,
        };
        let g3 = SpacetimeGaussian { amp: 3.0, ..g };
        let a = hormander_ratio(&g, 2.5, [0.5, 0.0, 0.0], &quad).unwrap();
        let b = hormander_ratio(&g3, 2.5, [0.5, 0.0, 0.0], &quad).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wavec_ratio_flat_and_violation() {
        let grid = Grid3::octant(16, 8.0);
        let sym = Symmetry::Octant;
        let flat = states_from(grid, sym, 1.0, 0.1, 5, |_, _| {
            (SymTensor2::ZERO, SymTensor2::ZERO, 0.0, 0.0)
        });
        let r = wavec_ratio(&StateWindow::new(&flat, 0.1, 0.0).unwrap(), 1e-12).unwrap();
        assert_eq!((r.ratio, r.ratio_z), (0.0, 0.0));
        // h = eps R f(r - t): transversal derivatives only, so the left
        // side is of order |f'| while the right side is O(eps).
        let diag = [0.7, -0.4, 1.1, 0.5];
        let eps = 1e-3;
        let fine = Grid3::octant(32, 8.0);
        let bad = states_from(fine, sym, 1.0, 0.1, 5, move |t, x| {
            let q = hypot3(x) - t;
            let f = libm::exp(-0.25 * q * q);
            let df = 0.5 * q * f;
            let mut h = SymTensor2::ZERO;
            let mut dh = SymTensor2::ZERO;
            for a in 0..4 {
                h.set(a, a, eps * diag[a] * f);
                dh.set(a, a, eps * diag[a] * df);
            }
            (h, dh, 0.0, 0.0)
        });
        let r = wavec_ratio(&StateWindow::new(&bad, 0.1, 0.0).unwrap(), 1e-12).unwrap();
        assert!(r.ratio > 100.0, "{r:?}");
        assert!(r.samples > 0);
    }

    fn linear_states(cfg: &RunConfig, every: usize, count: usize) -> Vec<EvolutionState> {
        let grid = cfg.grid();
        let psi = grid.sample(|x| 1e-3 * cfg.profile.value(x));
        let slice = scalar_slice(grid, cfg.symmetry, psi, vec![0.0; grid.len()]).unwrap();
        let mut s = EvolutionState::from_slice(&slice);
        let mut st = crate::evolution::Stepper::new(cfg, grid, cfg.symmetry).unwrap();
        let mut out = vec![s.clone()];
        for _ in 1..count {
            for _ in 0..every {
                st.step(&mut s).unwrap();
            }
            out.push(s.clone());
        }
        out
    }

    #[test]
    fn energy_balance_zero_and_flux_sign() {
        let grid = Grid3::octant(8, 4.0);
        let flat = vec![EvolutionState::flat(grid, Symmetry::Octant); 3];
        for s in energy_balance_residual(&flat, Some(&WeightSpec::default()), false).unwrap() {
            assert_eq!((s.energy, s.flux, s.residual), (0.0, 0.0, 0.0));
        }
        let cfg = RunConfig {
            mode: Mode::Linear,
            n: 16,
            extent: 8.0,
            t_final: 2.0,
            ..Default::default()
        };
        let states = linear_states(&cfg, 2, 8);
        let spec = WeightSpec::default();
        let bal = energy_balance_residual(&states, Some(&spec), false).unwrap();
        assert!(bal.iter().all(|s| s.flux > 0.0));
        assert_eq!(bal[0].residual, 0.0);
    }

    #[test]
    fn unweighted_periodic_balance_is_flat() {
        let cfg = RunConfig {
            mode: Mode::Linear,
            boundary: Boundary::Periodic,
            symmetry: Symmetry::Full,
            n: 48,
            extent: 6.0,
            t_final: 1.0,
            ..Default::default()
        };
        let states = linear_states(&cfg, 8, 5);
        let bal = energy_balance_residual(&states, None, true).unwrap();
        for s in &bal {
            assert!(s.residual.abs() <= 1e-3 * bal[0].energy, "{s:?}");
        }
        let mut single = EvolutionState::flat(cfg.grid(), Symmetry::Full);
        run_to(
            &RunConfig {
                t_final: 0.0,
                ..cfg
            },
            &mut single,
        )
        .unwrap();
        assert_eq!(single.step, 0);
    }

    #[test]
    fn series_times_must_increase() {
        let rec = |t: f64| DiagnosticRecord {
            t,
            energies: vec![1.0],
            gauge_sup: 0.0,
            gauge_floor: 0.0,
            null: None,
            ks: None,
            wavec: None,
            max_deviation: 0.0,
        };
        let mut s = DiagnosticSeries::default();
        s.push(rec(0.0)).unwrap();
        s.push(rec(0.5)).unwrap();
        assert!(s.push(rec(0.5)).is_err());
        assert_eq!(s.times(), [0.0, 0.5]);
        let (t, e) = s.column(|r| r.energies.first().copied());
        assert_eq!((t.len(), e), (2, vec![1.0, 1.0]));
        assert!(s.column(|r| r.ks).0.is_empty());
    }
}
