//! Method-of-lines evolution of the reduced Einstein-scalar system and of
//! linear waves, plus closed-form linear oracles.
//!
//! The state holds `u = (g_{mu nu}, psi)` and `v = d_t u` on interior
//! points. Each Runge-Kutta stage pads the fields with ghost cells (face
//! rules from the symmetry and boundary choice), evaluates fourth-order
//! centred differences and solves the principal part for `d_t v`:
//!
//! ```text
//! d_t v = (F - 2 g^{0i} d_i v - g^{ij} d_i d_j u) / g^{00}
//! ```
//!
//! with `F = S - 2 d psi d psi` for metric components and `F = 0` for `psi`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::SpatialProfile;
use crate::diagnostics::{self, DiagnosticRecord, DiagnosticSeries, StateWindow, WeightSpec};
use crate::error::{Error, Result};
use crate::geometry::{point_geometry, reduced_source};
use crate::grid::{component_parity, FaceRule, Grid3, Padded, Symmetry};
use crate::initdata::{FullSlice, Profile};
use crate::math::{hypot3, sqrt};
use crate::quadrature::{gauss_on, SphereRule};
use crate::stencil::centered;
use crate::tensor::{SymTensor2, SYM_PAIRS};

/// Ten metric components (in [`SYM_PAIRS`] order) and the scalar field.
pub const NFIELDS: usize = 11;
/// Index of `psi` among the fields.
pub const PSI: usize = 10;
/// Ghost width: the dissipation stencil reaches three cells.
pub const GHOST: usize = 3;
/// Largest admissible CFL factor.
pub const MAX_CFL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Reduced Einstein equations coupled to the scalar field.
    #[default]
    Einstein,
    /// Flat wave equation for `psi` only; the metric stays Minkowski.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Outgoing radiation condition on the outer layer of points.
    #[default]
    Sommerfeld,
    /// Periodic box (full symmetry only).
    Periodic,
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Cells per axis.
    pub n: usize,
    /// Half-width of the box, or the width of the octant.
    pub extent: f64,
    pub symmetry: Symmetry,
    /// `dt / dx`.
    pub cfl: f64,
    /// Kreiss-Oliger strength.
    pub dissipation: f64,
    pub t_final: f64,
    pub boundary: Boundary,
    /// Time between diagnostic records.
    pub output_dt: f64,
    /// Highest `N` of the recorded energies `E_0 .. E_N`.
    pub energy_order: usize,
    /// Record the Klainerman-Sobolev ratio of `psi` at each output.
    pub ks_monitor: bool,
    /// Record the wave-coordinate ratios at each output.
    pub wavec_monitor: bool,
    pub weights: WeightSpec,
    pub epsilon: f64,
    pub profile: Profile,
    pub mode: Mode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 48,
            extent: 16.0,
            symmetry: Symmetry::Octant,
            cfl: MAX_CFL,
            dissipation: 0.1,
            t_final: 10.0,
            boundary: Boundary::Sommerfeld,
            output_dt: 0.5,
            energy_order: 0,
            ks_monitor: false,
            wavec_monitor: false,
            weights: WeightSpec::default(),
            epsilon: 1e-3,
            profile: Profile::Gaussian {
                center: [0.0; 3],
                width: 1.5,
            },
            mode: Mode::Einstein,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.n < 8 {
            return bad("need at least 8 cells per axis");
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return bad("extent must be positive");
        }
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return bad("CFL factor ≤ 0.25 required (and positive)");
        }
        if !(self.dissipation >= 0.0 && self.dissipation.is_finite()) {
            return bad("dissipation must be non-negative");
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad("final time must be non-negative");
        }
        if !(self.output_dt > 0.0) {
            return bad("output interval must be positive");
        }
        if self.energy_order > 2 {
            return bad("energy order above 2 needs a deeper window");
        }
        if !(0.0..=0.1).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 0.1]");
        }
        if self.boundary == Boundary::Periodic && self.symmetry != Symmetry::Full {
            return bad("periodic boundaries need the full box");
        }
        self.weights.validate()
    }

    pub fn grid(&self) -> Grid3 {
        match self.symmetry {
            Symmetry::Full => Grid3::centered_cube(self.n, self.extent),
            Symmetry::Octant => Grid3::octant(self.n, self.extent),
        }
    }

    /// Step size: the largest `dt <= cfl dx` that divides `t_final`.
    pub fn dt(&self) -> f64 {
        let h = self.cfl * self.grid().dx;
        if self.t_final <= 0.0 {
            return h;
        }
        self.t_final / libm::ceil(self.t_final / h)
    }

    /// Levels kept for diagnostics: enough for `d Z^I` with `|I| <= N`
    /// and for `Z^I` with `|I| <= 2`.
    pub fn window_levels(&self) -> usize {
        (2 * self.energy_order + 3).max(5)
    }
}

/// Borrowed `(u, v)` field arrays.
type FieldsRef<'a> = (&'a [Vec<f64>], &'a [Vec<f64>]);

fn active_fields(mode: Mode) -> core::ops::Range<usize> {
    match mode {
        Mode::Einstein => 0..NFIELDS,
        Mode::Linear => PSI..NFIELDS,
    }
}

/// Reflection parity of field `f`.
pub fn field_parity(f: usize) -> [f64; 3] {
    if f == PSI {
        [1.0; 3]
    } else {
        let (a, b) = SYM_PAIRS[f];
        component_parity(&[a, b])
    }
}

/// Fields and their time derivatives at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub grid: Grid3,
    pub symmetry: Symmetry,
    pub t: f64,
    pub step: usize,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl EvolutionState {
    pub fn from_slice(slice: &FullSlice) -> Self {
        let n = slice.grid.len();
        let mut u = vec![vec![0.0; n]; NFIELDS];
        let mut v = vec![vec![0.0; n]; NFIELDS];
        for q in 0..n {
            for c in 0..10 {
                u[c][q] = slice.g[q].c[c];
                v[c][q] = slice.dtg[q].c[c];
            }
        }
        u[PSI].copy_from_slice(&slice.psi);
        v[PSI].copy_from_slice(&slice.dtpsi);
        Self {
            grid: slice.grid,
            symmetry: slice.symmetry,
            t: 0.0,
            step: 0,
            u,
            v,
        }
    }

    /// Minkowski space with `psi = 0`.
    pub fn flat(grid: Grid3, symmetry: Symmetry) -> Self {
        let n = grid.len();
        let m = SymTensor2::minkowski();
        let u = (0..NFIELDS)
            .map(|c| vec![if c < 10 { m.c[c] } else { 0.0 }; n])
            .collect();
        Self {
            grid,
            symmetry,
            t: 0.0,
            step: 0,
            u,
            v: vec![vec![0.0; n]; NFIELDS],
        }
    }

    pub fn metric(&self, q: usize) -> SymTensor2 {
        let mut s = SymTensor2::ZERO;
        for c in 0..10 {
            s.c[c] = self.u[c][q];
        }
        s
    }

    pub fn metric_rate(&self, q: usize) -> SymTensor2 {
        let mut s = SymTensor2::ZERO;
        for c in 0..10 {
            s.c[c] = self.v[c][q];
        }
        s
    }

    /// Largest `|g - m|`, `|d_t g|`, `|psi|`, `|d_t psi|` entry.
    pub fn max_deviation(&self) -> f64 {
        let m = SymTensor2::minkowski();
        let mut s = 0.0f64;
        for f in 0..NFIELDS {
            let base = if f < 10 { m.c[f] } else { 0.0 };
            for (a, b) in self.u[f].iter().zip(&self.v[f]) {
                s = s.max((a - base).abs()).max(b.abs());
            }
        }
        s
    }
}

/// Reusable RK4 machinery for one grid.
///
/// Stage derivatives are interleaved per point: the `na` active fields'
/// `d_t u`, then their `d_t v`.
#[derive(Debug, Clone)]
pub struct Stepper {
    mode: Mode,
    boundary: Boundary,
    sigma: f64,
    dt: f64,
    pad: Padded,
    interior: Vec<usize>,
    /// Interior indices on the outer layer (Sommerfeld points).
    outer: Vec<usize>,
    inv12h: f64,
    inv12h2: f64,
    up: Vec<Vec<f64>>,
    vp: Vec<Vec<f64>>,
    tu: Vec<Vec<f64>>,
    tv: Vec<Vec<f64>>,
    ks: [Vec<f64>; 4],
}

impl Stepper {
    pub fn new(cfg: &RunConfig, grid: Grid3, symmetry: Symmetry) -> Result<Self> {
        cfg.validate()?;
        if grid.n.iter().any(|&n| n < 2 * GHOST) {
            return Err(Error::InvalidParameter(
                "grid too small for the stencils".into(),
            ));
        }
        let outer_rule = match cfg.boundary {
            Boundary::Sommerfeld => FaceRule::Extrapolate,
            Boundary::Periodic => FaceRule::Periodic,
        };
        let pad = Padded::new(grid, GHOST, symmetry.faces(outer_rule));
        let outer = if cfg.boundary == Boundary::Sommerfeld {
            (0..grid.len())
                .filter(|&q| symmetry.edge_distance(&grid, grid.ijk(q)) == 0)
                .collect()
        } else {
            Vec::new()
        };
        let h = grid.dx;
        let active = active_fields(cfg.mode);
        let na = active.len();
        let sized = |len: usize| -> Vec<Vec<f64>> {
            (0..NFIELDS)
                .map(|f| {
                    if active.contains(&f) {
                        vec![0.0; len]
                    } else {
                        Vec::new()
                    }
                })
                .collect()
        };
        Ok(Self {
            mode: cfg.mode,
            boundary: cfg.boundary,
            sigma: cfg.dissipation,
            dt: cfg.dt(),
            interior: pad.interior_indices(),
            outer,
            inv12h: 1.0 / (12.0 * h),
            inv12h2: 1.0 / (12.0 * h * h),
            up: sized(pad.len()),
            vp: sized(pad.len()),
            tu: sized(grid.len()),
            tv: sized(grid.len()),
            ks: core::array::from_fn(|_| vec![0.0; grid.len() * 2 * na]),
            pad,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn active(&self) -> core::ops::Range<usize> {
        active_fields(self.mode)
    }

    fn load(&mut self, from_state: Option<FieldsRef>) {
        for f in self.active() {
            let par = field_parity(f);
            let (u, v) = match from_state {
                Some((u, v)) => (&u[f], &v[f]),
                None => (&self.tu[f], &self.tv[f]),
            };
            self.pad.embed(u, &mut self.up[f]);
            self.pad.embed(v, &mut self.vp[f]);
            self.pad.fill_ghosts(&mut self.up[f], par);
            self.pad.fill_ghosts(&mut self.vp[f], par);
        }
    }

    /// Right-hand side at the loaded state into stage buffer `k`.
    fn rhs(&mut self, k: usize, step: usize, t: f64) -> Result<()> {
        let mut out = core::mem::take(&mut self.ks[k]);
        let res = self.rhs_into(&mut out, step, t);
        self.ks[k] = out;
        res
    }

    fn rhs_into(&self, out: &mut [f64], step: usize, t: f64) -> Result<()> {
        let stride = 2 * self.active().len();
        let nx = self.pad.interior.n[0];
        let body = |(c, o): (usize, &mut [f64])| -> Result<()> {
            for (k, cell) in o.chunks_mut(stride).enumerate() {
                self.point_rhs(c * nx + k, cell, step, t)?;
            }
            Ok(())
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            out.par_chunks_mut(nx * stride)
                .enumerate()
                .try_for_each(body)?;
        }
        #[cfg(not(feature = "parallel"))]
        {
            out.chunks_mut(nx * stride).enumerate().try_for_each(body)?;
        }
        for &q in &self.outer {
            self.sommerfeld(q, &mut out[q * stride..(q + 1) * stride]);
        }
        Ok(())
    }

    fn point_rhs(&self, q: usize, out: &mut [f64], step: usize, t: f64) -> Result<()> {
        let p = self.interior[q];
        let st = [self.pad.stride(0), self.pad.stride(1), self.pad.stride(2)];
        let (u, v) = (&self.up, &self.vp);
        let (i12, i12s) = (self.inv12h, self.inv12h2);
        let first = self.active().start;
        let na = self.active().len();
        match self.mode {
            Mode::Linear => {
                let f = &u[PSI];
                out[0] = v[PSI][p];
                out[1] = (0..3).map(|a| centered::d2(f, p, st[a], i12s)).sum();
            }
            Mode::Einstein => {
                let mut g = [[0.0; 4]; 4];
                let mut dg = [[[0.0; 4]; 4]; 4];
                for (c, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                    g[a][b] = u[c][p];
                    g[b][a] = u[c][p];
                    dg[0][a][b] = v[c][p];
                    dg[0][b][a] = v[c][p];
                    for ax in 0..3 {
                        let d = centered::d1(&u[c], p, st[ax], i12);
                        dg[ax + 1][a][b] = d;
                        dg[ax + 1][b][a] = d;
                    }
                }
                let degenerate = Error::MetricDegenerate { step, t };
                let pg = point_geometry(&g, &dg).ok_or(degenerate.clone())?;
                let gi = pg.ginv;
                if !(gi[0][0] <= -0.5) {
                    return Err(degenerate);
                }
                let s = reduced_source(&pg, &dg);
                let mut dpsi = [v[PSI][p], 0.0, 0.0, 0.0];
                for ax in 0..3 {
                    dpsi[ax + 1] = centered::d1(&u[PSI], p, st[ax], i12);
                }
                for f in 0..NFIELDS {
                    let src = if f < 10 {
                        let (a, b) = SYM_PAIRS[f];
                        s.c[f] - 2.0 * dpsi[a] * dpsi[b]
                    } else {
                        0.0
                    };
                    let mut rest = 0.0;
                    for i in 0..3 {
                        rest += 2.0 * gi[0][i + 1] * centered::d1(&v[f], p, st[i], i12);
                        rest += gi[i + 1][i + 1] * centered::d2(&u[f], p, st[i], i12s);
                        for j in i + 1..3 {
                            rest +=
                                2.0 * gi[i + 1][j + 1] * centered::d11(&u[f], p, st[i], st[j], i12);
                        }
                    }
                    out[f] = v[f][p];
                    out[NFIELDS + f] = (src - rest) / gi[0][0];
                }
            }
        }
        if self.sigma > 0.0 {
            let ko = self.sigma * self.inv12h * 12.0 / 64.0;
            for f in self.active() {
                let (mut a, mut b) = (0.0, 0.0);
                for s in st {
                    a += centered::diff6(&u[f], p, s);
                    b += centered::diff6(&v[f], p, s);
                }
                out[f - first] += ko * a;
                out[na + f - first] += ko * b;
            }
        }
        Ok(())
    }

    /// `d_t v = -(x . grad v + v) / r`: the time derivative of the
    /// outgoing condition `d_t(r h) + d_r(r h) = 0`. The static tail
    /// `M / r` satisfies it identically, so it holds for `h1` as well.
    fn sommerfeld(&self, q: usize, out: &mut [f64]) {
        let p = self.interior[q];
        let x = self.pad.interior.point_of(q);
        let r = hypot3(x);
        let first = self.active().start;
        let na = self.active().len();
        for f in self.active() {
            let vf = &self.vp[f];
            let mut xg = 0.0;
            for (a, xa) in x.iter().enumerate() {
                xg += xa * centered::d1(vf, p, self.pad.stride(a), self.inv12h);
            }
            out[na + f - first] = -(xg + vf[p]) / r;
        }
    }

    /// One classical RK4 step.
    pub fn step(&mut self, s: &mut EvolutionState) -> Result<()> {
        let n = s.grid.len();
        let dt = self.dt;
        let first = self.active().start;
        let na = self.active().len();
        let stride = 2 * na;
        let frac = [0.5, 0.5, 1.0];
        self.load(Some((&s.u, &s.v)));
        self.rhs(0, s.step, s.t)?;
        for stage in 1..4 {
            let c = frac[stage - 1] * dt;
            for f in self.active() {
                let (k, j) = (&self.ks[stage - 1], f - first);
                for q in 0..n {
                    self.tu[f][q] = s.u[f][q] + c * k[q * stride + j];
                    self.tv[f][q] = s.v[f][q] + c * k[q * stride + na + j];
                }
            }
            self.load(None);
            self.rhs(stage, s.step, s.t + c)?;
        }
        let c = dt / 6.0;
        let ks = &self.ks;
        for f in self.active() {
            let j = f - first;
            for q in 0..n {
                let sum = |o: usize| {
                    let i = q * stride + o;
                    ks[0][i] + 2.0 * ks[1][i] + 2.0 * ks[2][i] + ks[3][i]
                };
                s.u[f][q] += c * sum(j);
                s.v[f][q] += c * sum(na + j);
                if !(s.u[f][q].is_finite() && s.v[f][q].is_finite()) {
                    return Err(Error::NonFinite {
                        step: s.step,
                        t: s.t,
                    });
                }
            }
        }
        s.step += 1;
        s.t = s.step as f64 * dt;
        Ok(())
    }

    /// Whether the stepper evolves on a periodic box.
    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }
}

/// One RK4 step of size `cfg.dt()`.
pub fn step(state: &EvolutionState, cfg: &RunConfig) -> Result<EvolutionState> {
    let mut st = Stepper::new(cfg, state.grid, state.symmetry)?;
    let mut out = state.clone();
    st.step(&mut out)?;
    Ok(out)
}

/// Where a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub step: usize,
    pub t: f64,
    pub error: Error,
}

/// Diagnostic series of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: RunConfig,
    pub series: DiagnosticSeries,
    pub failure: Option<Failure>,
    pub final_state: EvolutionState,
    pub steps: usize,
    pub dt: f64,
    pub mass: f64,
    /// `sup |Gamma|` on the initial slice.
    pub gauge_initial: f64,
    /// `sup |d_i Laplacian h|` on the initial slice.
    pub gauge_scale: f64,
}

/// Advance `slice` to `t_final`, recording diagnostics every `output_dt`.
///
/// Records are taken at the centre of a rolling window of
/// [`RunConfig::window_levels`] levels, so the run continues past
/// `t_final` by half a window. Step failures end the run and are reported
/// in [`RunResult::failure`].
pub fn evolve(cfg: &RunConfig, slice: &FullSlice) -> Result<RunResult> {
    evolve_with(cfg, slice, |_| {})
}

/// [`evolve`] with a callback invoked after each record.
pub fn evolve_with(
    cfg: &RunConfig,
    slice: &FullSlice,
    mut on_record: impl FnMut(&DiagnosticRecord),
) -> Result<RunResult> {
    cfg.validate()?;
    if slice.grid != cfg.grid() || slice.symmetry != cfg.symmetry {
        return Err(Error::InvalidParameter(
            "slice grid does not match the config".into(),
        ));
    }
    let mut state = EvolutionState::from_slice(slice);
    let mut stepper = Stepper::new(cfg, slice.grid, slice.symmetry)?;
    let dt = stepper.dt();
    let depth = cfg.window_levels();
    let half = depth / 2;
    let mut window: VecDeque<EvolutionState> = VecDeque::with_capacity(depth);
    let mut series = DiagnosticSeries::default();
    let mut next_out = 0.0;
    let mut failure = None;
    let total = if cfg.t_final > 0.0 {
        libm::round(cfg.t_final / dt) as usize + half
    } else {
        half
    };
    let gauge_scale = diagnostics::gauge_truncation_scale(&state)?;
    let gauge_initial = diagnostics::gauge_residual_sup(&state)?;
    loop {
        window.push_back(state.clone());
        if window.len() > depth {
            window.pop_front();
        }
        if window.len() == depth {
            let tc = window[half].t;
            if tc >= next_out - 1e-9 * dt && tc <= cfg.t_final + 1e-9 * dt {
                let w = StateWindow::new(window.make_contiguous(), dt, slice.mass)?;
                let rec = diagnostics::record(&w, cfg, gauge_scale)?;
                on_record(&rec);
                series.push(rec)?;
                next_out += cfg.output_dt;
                while next_out <= tc + 1e-9 * dt {
                    next_out += cfg.output_dt;
                }
            }
        }
        if state.step >= total {
            break;
        }
        if let Err(e) = stepper.step(&mut state) {
            failure = Some(Failure {
                step: state.step,
                t: state.t,
                error: e,
            });
            break;
        }
    }
    Ok(RunResult {
        config: cfg.clone(),
        series,
        failure,
        steps: state.step,
        final_state: state,
        dt,
        mass: slice.mass,
        gauge_initial,
        gauge_scale,
    })
}

/// Advance without diagnostics until `t >= t_final`.
pub fn run_to(cfg: &RunConfig, state: &mut EvolutionState) -> Result<()> {
    let mut st = Stepper::new(cfg, state.grid, state.symmetry)?;
    let n = libm::round(cfg.t_final / st.dt()) as usize;
    while state.step < n {
        st.step(state)?;
    }
    Ok(())
}

/// Flat slice carrying only scalar data, for linear runs.
pub fn scalar_slice(
    grid: Grid3,
    symmetry: Symmetry,
    psi: Vec<f64>,
    dtpsi: Vec<f64>,
) -> Result<FullSlice> {
    if psi.len() != grid.len() || dtpsi.len() != grid.len() {
        return Err(Error::InvalidParameter(
            "scalar data does not match the grid".into(),
        ));
    }
    let n = grid.len();
    Ok(FullSlice {
        grid,
        symmetry,
        g: vec![SymTensor2::minkowski(); n],
        dtg: vec![SymTensor2::ZERO; n],
        psi,
        dtpsi,
        lapse: vec![1.0; n],
        mass: 0.0,
        epsilon: 0.0,
    })
}

/// Solution of the flat wave equation with data `(v0, v1)`:
/// `v = M_t[v0] + t M_t[omega . grad v0] + t M_t[v1]`, spherical means
/// taken with `rule`.
pub fn kirchhoff_eval(
    v0: &dyn SpatialProfile,
    v1: &dyn SpatialProfile,
    t: f64,
    x: [f64; 3],
    rule: &SphereRule,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(
            "Kirchhoff evaluation needs t >= 0".into(),
        ));
    }
    let at = |w: [f64; 3]| [x[0] + t * w[0], x[1] + t * w[1], x[2] + t * w[2]];
    let m0 = rule.mean(|w| v0.value(at(w)));
    let mg = rule.mean(|w| {
        let g = v0.gradient(at(w));
        g[0] * w[0] + g[1] * w[1] + g[2] * w[2]
    });
    let m1 = rule.mean(|w| v1.value(at(w)));
    Ok(m0 + t * (mg + m1))
}

/// Retarded solution of `box w = g` (`box = -d_t^2 + Laplacian`) with
/// vanishing data: `w(t, x) = -int_0^t (t - s) M_{t-s}[g(s, .)](x) ds`,
/// the time integral by `n_time`-point Gauss-Legendre.
pub fn duhamel_eval(
    source: impl Fn(f64, [f64; 3]) -> f64,
    t: f64,
    x: [f64; 3],
    rule: &SphereRule,
    n_time: usize,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(
            "Duhamel evaluation needs t >= 0".into(),
        ));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut w = 0.0;
    for (s, ws) in gauss_on(n_time, 0.0, t) {
        let tau = t - s;
        let m = rule.mean(|o| source(s, [x[0] + tau * o[0], x[1] + tau * o[1], x[2] + tau * o[2]]));
        w -= ws * tau * m;
    }
    Ok(w)
}

/// `epsilon * profile`, as a [`SpatialProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledProfile {
    pub profile: Profile,
    pub amp: f64,
}

impl SpatialProfile for ScaledProfile {
    fn value(&self, x: [f64; 3]) -> f64 {
        self.amp * self.profile.value(x)
    }

    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let g = self.profile.gradient(x);
        [self.amp * g[0], self.amp * g[1], self.amp * g[2]]
    }
}

/// Gaps between a linear run and the Kirchhoff oracle at one resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLevel {
    pub n: usize,
    pub dx: f64,
    pub samples: usize,
    pub linf: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub amplitude: f64,
    pub levels: Vec<OracleLevel>,
    /// Fitted orders of the `L^inf` and `L^2` gaps (zero for zero data).
    pub order_linf: f64,
    pub order_l2: f64,
}

/// Sample points for the oracle: the main diagonal and one axis-parallel
/// line, inside 80% of the inscribed radius.
fn oracle_samples(grid: &Grid3, symmetry: Symmetry) -> Vec<usize> {
    let n = grid.n[0];
    let rmax = 0.8 * symmetry.inscribed_radius(grid);
    let mid = match symmetry {
        Symmetry::Full => n / 2,
        Symmetry::Octant => 0,
    };
    let mut out: Vec<usize> = (0..n).map(|i| grid.idx(i, i, i)).collect();
    out.extend((0..n).map(|i| grid.idx(i, mid, mid)));
    out.retain(|&q| hypot3(grid.point_of(q)) <= rmax);
    out.sort_unstable();
    out.dedup();
    out
}

/// Evolve `epsilon * profile` (at rest) in linear mode at `n`, `2n`, `4n`
/// cells and compare with [`kirchhoff_eval`] at `t_final`.
pub fn oracle_compare(cfg: &RunConfig, n_polar: usize) -> Result<OracleReport> {
    if cfg.mode != Mode::Linear {
        return Err(Error::InvalidParameter(
            "oracle comparison needs linear mode".into(),
        ));
    }
    let rule = SphereRule::new(n_polar);
    let amp = cfg.epsilon;
    let v0 = ScaledProfile {
        profile: cfg.profile,
        amp,
    };
    let zero = crate::analytic::Constant(0.0);
    let mut levels = Vec::new();
    for lvl in 0..3 {
        let c = RunConfig {
            n: cfg.n << lvl,
            ..cfg.clone()
        };
        let grid = c.grid();
        let psi = grid.sample(|x| v0.value(x));
        let slice = scalar_slice(grid, c.symmetry, psi, vec![0.0; grid.len()])?;
        let mut state = EvolutionState::from_slice(&slice);
        run_to(&c, &mut state)?;
        let pts = oracle_samples(&grid, c.symmetry);
        let (mut linf, mut s2) = (0.0f64, 0.0);
        for &q in &pts {
            let exact = kirchhoff_eval(&v0, &zero, state.t, grid.point_of(q), &rule)?;
            let e = (state.u[PSI][q] - exact).abs();
            linf = linf.max(e);
            s2 += e * e;
        }
        levels.push(OracleLevel {
            n: c.n,
            dx: grid.dx,
            samples: pts.len(),
            linf,
            l2: sqrt(s2 / pts.len().max(1) as f64),
        });
    }
    let order = |f: fn(&OracleLevel) -> f64| -> Result<f64> {
        let e: Vec<f64> = levels.iter().map(f).collect();
        if e.iter().all(|v| *v == 0.0) {
            Ok(0.0)
        } else {
            crate::fit::convergence_order(&e)
        }
    };
    Ok(OracleReport {
        amplitude: amp,
        order_linf: order(|l| l.linf)?,
        order_l2: order(|l| l.l2)?,
        levels,
    })
}

/// Flat wave energy `1/2 int (psi_t^2 + |grad psi|^2)` of a linear state
/// on a periodic box, with centred differences.
pub fn linear_energy(state: &EvolutionState) -> f64 {
    let pad = Padded::new(state.grid, GHOST, state.symmetry.faces(FaceRule::Periodic));
    let f = pad.pad(&state.u[PSI], [1.0; 3]);
    let inv12h = 1.0 / (12.0 * state.grid.dx);
    let idx = pad.interior_indices();
    let mut e = 0.0;
    for (q, &p) in idx.iter().enumerate() {
        let mut s = state.v[PSI][q] * state.v[PSI][q];
        for a in 0..3 {
            let d = centered::d1(&f, p, pad.stride(a), inv12h);
            s += d * d;
        }
        e += s;
    }
    0.5 * e * state.grid.cell_volume() * state.symmetry.volume_factor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{Constant, Gaussian};
    use crate::initdata::{build_cauchy_data, generate_small_data, SolverOptions};
    use core::f64::consts::PI;

    fn linear_cfg(boundary: Boundary, symmetry: Symmetry) -> RunConfig {
        RunConfig {
            mode: Mode::Linear,
            boundary,
            symmetry,
            ..Default::default()
        }
    }

    /// Periodic slab `[-pi, pi) x [-4dx, 4dx)^2` carrying functions of `x`,
    /// with the spacing of `centered_cube(n, pi)`.
    fn slab(n: usize) -> Grid3 {
        let dx = 2.0 * PI / n as f64;
        Grid3::new([n, 8, 8], [-PI + 0.5 * dx, -3.5 * dx, -3.5 * dx], dx)
    }

    fn slab_state(
        grid: Grid3,
        psi: impl Fn(f64) -> f64,
        dtpsi: impl Fn(f64) -> f64,
    ) -> EvolutionState {
        let mut s = EvolutionState::flat(grid, Symmetry::Full);
        s.u[PSI] = grid.sample(|x| psi(x[0]));
        s.v[PSI] = grid.sample(|x| dtpsi(x[0]));
        s
    }

    #[test]
    fn flat_is_a_fixed_point() {
        let cfg = RunConfig {
            n: 12,
            extent: 6.0,
            ..Default::default()
        };
        let mut s = EvolutionState::flat(cfg.grid(), cfg.symmetry);
        let mut st = Stepper::new(&cfg, s.grid, s.symmetry).unwrap();
        for _ in 0..3 {
            st.step(&mut s).unwrap();
        }
        assert!(s.max_deviation() < 1e-15);
        assert_eq!(s.step, 3);
    }

    #[test]
    fn config_validation() {
        let ok = RunConfig::default();
        assert!(ok.validate().is_ok());
        assert!(RunConfig {
            cfl: 0.9,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            dissipation: -0.1,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            boundary: Boundary::Periodic,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            energy_order: 3,
            ..ok.clone()
        }
        .validate()
        .is_err());
        let c = RunConfig { t_final: 1.0, ..ok };
        assert!(c.dt() <= c.cfl * c.grid().dx);
        assert!((libm::round(1.0 / c.dt()) * c.dt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let cfg = RunConfig {
            n: 8,
            extent: 4.0,
            ..Default::default()
        };
        let mut s = EvolutionState::flat(cfg.grid(), cfg.symmetry);
        // g_00 = -4 gives g^00 = -1/4, above the -1/2 bound.
        s.u[0].iter_mut().for_each(|v| *v = -4.0);
        let r = step(&s, &cfg);
        assert!(matches!(r, Err(Error::MetricDegenerate { .. })), "{r:?}");
    }

    #[test]
    fn plane_wave_converges() {
        let t_final = 1.0;
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let grid = slab(n);
            let cfg = RunConfig {
                n,
                extent: PI,
                t_final,
                ..linear_cfg(Boundary::Periodic, Symmetry::Full)
            };
            let mut st = Stepper::new(&cfg, grid, Symmetry::Full).unwrap();
            let mut s = slab_state(grid, libm::sin, |x| -libm::cos(x));
            let steps = libm::round(t_final / st.dt()) as usize;
            for _ in 0..steps {
                st.step(&mut s).unwrap();
            }
            let e = (0..grid.len())
                .map(|q| (s.u[PSI][q] - libm::sin(grid.point_of(q)[0] - s.t)).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        let p = crate::fit::convergence_order(&errs).unwrap();
        assert!(p >= 3.5, "{errs:?} {p}");
    }

    #[test]
    fn standing_wave_energy_drift() {
        let grid = slab(64);
        let period = 2.0 * PI;
        let cfg = RunConfig {
            n: 64,
            extent: PI,
            t_final: period,
            ..linear_cfg(Boundary::Periodic, Symmetry::Full)
        };
        let mut st = Stepper::new(&cfg, grid, Symmetry::Full).unwrap();
        let mut s = slab_state(grid, libm::sin, |_| 0.0);
        let e0 = linear_energy(&s);
        let steps = libm::round(period / st.dt()) as usize;
        for _ in 0..steps {
            st.step(&mut s).unwrap();
        }
        let drift = (linear_energy(&s) - e0).abs() / e0;
        assert!(drift <= 1e-6, "{drift:e}");
    }

    #[test]
    fn kirchhoff_constants() {
        let rule = SphereRule::new(8);
        let zero = Constant(0.0);
        for t in [0.0, 0.7, 3.0] {
            let c = kirchhoff_eval(&Constant(2.5), &zero, t, [0.3, -1.0, 2.0], &rule).unwrap();
            assert!((c - 2.5).abs() < 1e-14);
            let v = kirchhoff_eval(&zero, &Constant(1.0), t, [1.0, 0.0, 0.0], &rule).unwrap();
            assert!((v - t).abs() < 1e-14);
        }
        assert!(kirchhoff_eval(&zero, &zero, -1.0, [0.0; 3], &rule).is_err());
    }

    #[test]
    fn kirchhoff_is_huygens() {
        let rule = SphereRule::new(24);
        let g = Gaussian {
            amp: 1.0,
            center: [0.0; 3],
            width: 1.0,
        };
        let zero = Constant(0.0);
        let early = kirchhoff_eval(&g, &zero, 0.5, [0.0; 3], &rule).unwrap();
        assert!(early.abs() > 0.1);
        for t in [8.0, 12.0] {
            let v = kirchhoff_eval(&g, &g, t, [0.0; 3], &rule).unwrap();
            assert!(v.abs() < 1e-12, "{t} {v:e}");
        }
    }

    #[test]
    fn duhamel_cases() {
        let rule = SphereRule::new(6);
        for t in [0.5, 2.0] {
            let w = duhamel_eval(|_, _| 1.0, t, [0.4, 0.0, -1.0], &rule, 8).unwrap();
            assert!((w + 0.5 * t * t).abs() < 1e-13);
            assert_eq!(
                duhamel_eval(|_, _| 0.0, t, [0.0; 3], &rule, 8).unwrap(),
                0.0
            );
        }
        // A source supported near the origin for s < 1 cannot reach
        // |x| = 6 by t = 2.
        let bump = |s: f64, y: [f64; 3]| {
            let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
            if s < 1.0 {
                libm::exp(-r2 / 0.04)
            } else {
                0.0
            }
        };
        let rule = SphereRule::new(24);
        let w = duhamel_eval(bump, 2.0, [6.0, 0.0, 0.0], &rule, 16).unwrap();
        assert!(w.abs() < 1e-12);
        let inside = duhamel_eval(bump, 1.0, [0.5, 0.0, 0.0], &rule, 16).unwrap();
        assert!(inside.abs() > 1e-6);
    }

    #[test]
    fn duhamel_gaussian_source_is_bounded() {
        // |w| <= int (t - s) sup |g| = t^2 / 2.
        let rule = SphereRule::new(12);
        let g = |s: f64, y: [f64; 3]| {
            libm::exp(-(s - 1.0) * (s - 1.0) - y[0] * y[0] - y[1] * y[1] - y[2] * y[2])
        };
        let w = duhamel_eval(g, 2.0, [0.2, 0.1, 0.0], &rule, 16).unwrap();
        assert!(w < 0.0 && w > -2.0);
    }

    #[test]
    fn oracle_with_zero_data_has_zero_gap() {
        let cfg = RunConfig {
            n: 8,
            extent: 4.0,
            t_final: 0.5,
            epsilon: 0.0,
            ..linear_cfg(Boundary::Sommerfeld, Symmetry::Octant)
        };
        let r = oracle_compare(&cfg, 8).unwrap();
        assert!(r.levels.iter().all(|l| l.linf == 0.0 && l.l2 == 0.0));
        assert_eq!(r.order_linf, 0.0);
        let bad = RunConfig {
            mode: Mode::Einstein,
            ..cfg
        };
        assert!(oracle_compare(&bad, 8).is_err());
    }

    #[test]
    fn octant_and_full_linear_runs_agree() {
        let profile = Profile::Gaussian {
            center: [0.0; 3],
            width: 1.0,
        };
        let mut out = Vec::new();
        for (sym, n) in [(Symmetry::Octant, 12), (Symmetry::Full, 24)] {
            let cfg = RunConfig {
                n,
                extent: 6.0,
                t_final: 1.0,
                profile,
                ..linear_cfg(Boundary::Sommerfeld, sym)
            };
            let grid = cfg.grid();
            let psi = grid.sample(|x| 1e-3 * profile.value(x));
            let slice = scalar_slice(grid, sym, psi, vec![0.0; grid.len()]).unwrap();
            let mut s = EvolutionState::from_slice(&slice);
            run_to(&cfg, &mut s).unwrap();
            // Value at the cell nearest (0.25, 0.25, 0.25).
            let q = (0..grid.len())
                .min_by(|&a, &b| {
                    let da = hypot3(grid.point_of(a).map(|c| c - 0.25));
                    let db = hypot3(grid.point_of(b).map(|c| c - 0.25));
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            out.push(s.u[PSI][q]);
        }
        assert!(
            (out[0] - out[1]).abs() < 1e-14 * out[0].abs().max(1.0),
            "{out:?}"
        );
    }

    #[test]
    fn zero_amplitude_run_is_flat() {
        let cfg = RunConfig {
            n: 12,
            extent: 16.0,
            epsilon: 0.0,
            t_final: 10.0,
            output_dt: 2.0,
            ..Default::default()
        };
        let grid = cfg.grid();
        let data = generate_small_data(
            grid,
            cfg.symmetry,
            cfg.profile,
            0.0,
            &SolverOptions::default(),
        )
        .unwrap();
        let slice = build_cauchy_data(&data).unwrap();
        let res = evolve(&cfg, &slice).unwrap();
        assert!(res.failure.is_none());
        assert!(res.series.len() >= 5);
        for r in &res.series.records {
            assert!(r.energies.iter().all(|e| *e == 0.0));
            assert_eq!(r.gauge_sup, 0.0);
            assert_eq!(r.max_deviation, 0.0);
            if let Some(m) = r.null {
                assert_eq!([m.tu, m.ll, m.lblb, m.full, m.dpsi, m.h_lt], [0.0; 6]);
            }
        }
        assert_eq!(res.final_state.max_deviation(), 0.0);
    }

    #[test]
    fn step_is_deterministic() {
        let cfg = RunConfig {
            n: 10,
            extent: 5.0,
            ..Default::default()
        };
        let grid = cfg.grid();
        let data = generate_small_data(
            grid,
            cfg.symmetry,
            cfg.profile,
            1e-3,
            &SolverOptions::default(),
        )
        .unwrap();
        let slice = build_cauchy_data(&data).unwrap();
        let s = EvolutionState::from_slice(&slice);
        let a = step(&s, &cfg).unwrap();
        let b = step(&s, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.max_deviation() > 0.0);
    }
}
