//! Characteristic asymptotic systems near the outgoing light cone.
//!
//! Near the cone `Phi_I = r phi_I` depends on `q = r - t` and slowly on
//! `s = r + t`. Write `d_q` for the null derivative `d_t - d_r`, which acts
//! on functions of `q` as `-2 d/dq`. Dropping tangential derivatives and
//! cubic terms, a quadratic system becomes
//!
//! ```text
//! (d_t + d_r) d_q Phi_I = H_LL d_q^2 Phi_I + r^{-1} sum A_{nm} d_q^n Phi_J d_q^m Phi_K
//! ```
//!
//! With `d_t + d_r = 2 d_s`, slow time `l = ln(s / s0)` and `r ~ t ~ s`
//! this is, for `U_I = d_q Phi_I`,
//!
//! ```text
//! d_l U_I = (hh d_q U_I + sum A_{nm} d_q^{n-1} U_J d_q^{m-1} U_K) / 2
//! ```
//!
//! where `hh = s H_LL` and `d_q^{-1} U = Phi` is recovered by quadrature
//! (`Phi` vanishes ahead of the wave, `q -> +inf`).

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::linear;
use crate::math::{abs, exp, ln, powf};
use crate::nullframe::{quadratic_p, FrameVector, NullFrame};
use crate::quadrature::SphereRule;
use crate::tensor::{lower, SymTensor2, Vec4};

/// One quadratic term `coeff d^alpha phi_J d^beta phi_K` in the equation
/// for `phi_target`. `alpha` and `beta` list spacetime indices.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTerm {
    pub target: usize,
    pub j: usize,
    pub k: usize,
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub coeff: f64,
}

/// `box phi_I = sum of quadratic terms`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaveSystem {
    pub unknowns: Vec<String>,
    pub terms: Vec<QuadraticTerm>,
}

impl WaveSystem {
    pub fn new(unknowns: &[&str]) -> Self {
        Self {
            unknowns: unknowns.iter().map(|s| s.to_string()).collect(),
            terms: Vec::new(),
        }
    }

    /// Add a term, checking indices and the order restrictions
    /// `|alpha| <= |beta| <= 2`, `|beta| >= 1`.
    pub fn with_term(
        mut self,
        target: usize,
        j: usize,
        alpha: &[usize],
        k: usize,
        beta: &[usize],
        coeff: f64,
    ) -> Result<Self> {
        let n = self.unknowns.len();
        if target >= n || j >= n || k >= n {
            return Err(Error::IndexOutOfRange("unknown"));
        }
        if alpha.iter().chain(beta).any(|&a| a > 3) {
            return Err(Error::IndexOutOfRange("derivative index"));
        }
        let (mut a, mut b, mut j, mut k) = (alpha.to_vec(), beta.to_vec(), j, k);
        if a.len() > b.len() {
            core::mem::swap(&mut a, &mut b);
            core::mem::swap(&mut j, &mut k);
        }
        if b.len() > 2 || b.is_empty() {
            return Err(Error::IndexOutOfRange("derivative order"));
        }
        self.terms.push(QuadraticTerm {
            target,
            j,
            k,
            alpha: a,
            beta: b,
            coeff,
        });
        Ok(self)
    }

    /// `box phi = (d_t phi)^2`.
    pub fn scalar_dt_squared() -> Self {
        Self::new(&["phi"])
            .with_term(0, 0, &[0], 0, &[0], 1.0)
            .expect("valid term")
    }

    /// `box phi = m^{ab} d_a phi d_b phi`.
    pub fn scalar_q0() -> Self {
        let mut s = Self::new(&["phi"]);
        for a in 0..4 {
            let c = if a == 0 { -1.0 } else { 1.0 };
            s = s.with_term(0, 0, &[a], 0, &[a], c).expect("valid term");
        }
        s
    }

    /// `box phi2 = (d_t phi1)^2`, `box phi1 = 0`.
    pub fn model_pair() -> Self {
        Self::new(&["phi1", "phi2"])
            .with_term(1, 0, &[0], 0, &[0], 1.0)
            .expect("valid term")
    }

    /// `box phi1 = phi3 d_t^2 phi1 + (d_t phi2)^2`, `box phi2 = box phi3 = 0`.
    pub fn weak_null_example() -> Self {
        Self::new(&["phi1", "phi2", "phi3"])
            .with_term(0, 2, &[], 0, &[0, 0], 1.0)
            .and_then(|s| s.with_term(0, 1, &[0], 1, &[0], 1.0))
            .expect("valid terms")
    }
}

fn omega_hat(omega: [f64; 3]) -> Vec4 {
    [-1.0, omega[0], omega[1], omega[2]]
}

/// `A_{I,nm}^{JK}(omega) = (-2)^{-m-n} sum_{|alpha|=n, |beta|=m}
/// A_{I,alpha beta}^{JK} hat omega^alpha hat omega^beta`, `hat omega = (-1, omega)`.
#[allow(clippy::too_many_arguments)]
pub fn coefficient_a(
    system: &WaveSystem,
    omega: [f64; 3],
    i: usize,
    j: usize,
    k: usize,
    n: usize,
    m: usize,
) -> Result<f64> {
    let nu = system.unknowns.len();
    if i >= nu || j >= nu || k >= nu {
        return Err(Error::IndexOutOfRange("unknown"));
    }
    if !(n <= m && (1..=2).contains(&m)) {
        return Err(Error::IndexOutOfRange("need n <= m <= 2 and m >= 1"));
    }
    let w = omega_hat(omega);
    let prod = |idx: &[usize]| idx.iter().map(|&a| w[a]).product::<f64>();
    let mut s = 0.0;
    for t in &system.terms {
        if t.target != i || t.alpha.len() != n || t.beta.len() != m {
            continue;
        }
        // A term d^alpha phi_J d^beta phi_K with n = m also contributes to
        // the swapped pair.
        if (t.j == j && t.k == k) || (n == m && t.j == k && t.k == j) {
            s += t.coeff * prod(&t.alpha) * prod(&t.beta);
        }
    }
    Ok(s * powf(-2.0, -((m + n) as f64)))
}

/// One contracted coupling `coeff d_q^n Phi_J d_q^m Phi_K` of a
/// characteristic system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub target: usize,
    pub j: usize,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub coeff: f64,
}

/// Law for the transport coefficient `H_LL`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HllMode {
    #[default]
    Zero,
    /// `H_LL = -M / t`.
    MassProfile,
    /// `H_LL = -D_LL / r`.
    SelfCoupled,
}

/// A characteristic system along one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CharSystem {
    pub labels: Vec<String>,
    pub couplings: Vec<Coupling>,
    pub hll: HllMode,
    pub mass: f64,
    /// Component carrying `D_LL` for [`HllMode::SelfCoupled`].
    pub ll_component: Option<usize>,
    /// Components held at zero (the asymptotic gauge condition).
    pub constrained: Vec<usize>,
    pub omega: [f64; 3],
}

impl CharSystem {
    /// Contract a wave system along `omega` (no transport term).
    pub fn from_wave_system(system: &WaveSystem, omega: [f64; 3]) -> Result<Self> {
        let nu = system.unknowns.len();
        let mut couplings = Vec::new();
        for i in 0..nu {
            for j in 0..nu {
                for k in 0..nu {
                    for m in 1..=2 {
                        for n in 0..=m {
                            if n == m && k < j {
                                continue;
                            }
                            let c = coefficient_a(system, omega, i, j, k, n, m)?;
                            if c != 0.0 {
                                couplings.push(Coupling {
                                    target: i,
                                    j,
                                    k,
                                    n,
                                    m,
                                    coeff: c,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            labels: system.unknowns.clone(),
            couplings,
            hll: HllMode::Zero,
            mass: 0.0,
            ll_component: None,
            constrained: Vec::new(),
            omega,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Couplings into `target`.
    pub fn couplings_of(&self, target: usize) -> impl Iterator<Item = &Coupling> {
        self.couplings.iter().filter(move |c| c.target == target)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Frame pairs labelling the metric unknowns of the Einstein system.
pub const FRAME_PAIRS: [(FrameVector, FrameVector); 10] = {
    use FrameVector::*;
    [
        (L, L),
        (L, Lbar),
        (L, S1),
        (L, S2),
        (Lbar, Lbar),
        (Lbar, S1),
        (Lbar, S2),
        (S1, S1),
        (S1, S2),
        (S2, S2),
    ]
};

fn frame_label(v: FrameVector) -> &'static str {
    match v {
        FrameVector::L => "L",
        FrameVector::Lbar => "Lb",
        FrameVector::S1 => "S1",
        FrameVector::S2 => "S2",
    }
}

/// Prefactor of the `Lbar Lbar` source. Rate fits do not depend on it.
pub const SOURCE_PREFACTOR: f64 = 1.0;

/// Index of the scalar unknown in the Einstein system.
pub const EINSTEIN_PHI: usize = 10;

/// Symmetric tensor with prescribed frame components `p(e_A, e_B)`.
fn tensor_from_frame(frame: &NullFrame, comps: &[f64; 10]) -> SymTensor2 {
    // Dual covectors: theta^L = -Lbar/2, theta^Lbar = -L/2, theta^S = S.
    let dual = |v: FrameVector| -> Vec4 {
        let w = match v {
            FrameVector::L => frame.lbar.map(|x| -0.5 * x),
            FrameVector::Lbar => frame.l.map(|x| -0.5 * x),
            FrameVector::S1 => frame.s1,
            FrameVector::S2 => frame.s2,
        };
        lower(w)
    };
    let mut t = SymTensor2::ZERO;
    for (c, &(a, b)) in FRAME_PAIRS.iter().enumerate() {
        let (da, db) = (dual(a), dual(b));
        let mult = if a == b { 0.5 } else { 1.0 };
        for mu in 0..4 {
            for nu in mu..4 {
                let v = t.get(mu, nu) + mult * comps[c] * (da[mu] * db[nu] + da[nu] * db[mu]);
                t.set(mu, nu, v);
            }
        }
    }
    t
}

/// Coefficients `c_AB` (`A <= B`) with `P(pi, pi) = sum c_AB pi_A pi_B` in
/// terms of frame components, by polarisation. Entries below `1e-14` are
/// exact zeros.
pub fn p_coefficients(omega: [f64; 3]) -> Result<[[f64; 10]; 10]> {
    let frame = NullFrame::at(omega)?;
    let p = |x: &[f64; 10]| {
        let t = tensor_from_frame(&frame, x);
        quadratic_p(&t, &t)
    };
    let unit = |a: usize| {
        let mut e = [0.0; 10];
        e[a] = 1.0;
        e
    };
    let mut c = [[0.0; 10]; 10];
    for a in 0..10 {
        c[a][a] = p(&unit(a));
        for b in a + 1..10 {
            let mut e = unit(a);
            e[b] = 1.0;
            c[a][b] = p(&e) - p(&unit(a)) - p(&unit(b));
        }
    }
    for row in c.iter_mut() {
        for v in row.iter_mut() {
            if abs(*v) < 1e-14 {
                *v = 0.0;
            }
        }
    }
    Ok(c)
}

/// The Einstein-scalar characteristic system along `omega`: ten frame
/// components of `d_q D` and `d_q Phi`. Only the `Lbar Lbar` equation is
/// sourced, by `-(2 P(d_q D, d_q D) + (d_q Phi)^2)` times
/// [`SOURCE_PREFACTOR`]; the `L T` components are held at zero.
pub fn build_einstein_system(mass: f64, hll: HllMode, omega: [f64; 3]) -> Result<CharSystem> {
    let c = p_coefficients(omega)?;
    let lblb = 4;
    let mut couplings = Vec::new();
    for a in 0..10 {
        for b in a..10 {
            if c[a][b] != 0.0 {
                couplings.push(Coupling {
                    target: lblb,
                    j: a,
                    k: b,
                    n: 1,
                    m: 1,
                    coeff: -2.0 * SOURCE_PREFACTOR * c[a][b],
                });
            }
        }
    }
    couplings.push(Coupling {
        target: lblb,
        j: EINSTEIN_PHI,
        k: EINSTEIN_PHI,
        n: 1,
        m: 1,
        coeff: -SOURCE_PREFACTOR,
    });
    let mut labels: Vec<String> = FRAME_PAIRS
        .iter()
        .map(|(a, b)| {
            let mut s = String::from(frame_label(*a));
            s.push_str(frame_label(*b));
            s
        })
        .collect();
    labels.push("Phi".into());
    Ok(CharSystem {
        labels,
        couplings,
        hll,
        mass,
        ll_component: Some(0),
        constrained: vec![0, 2, 3],
        omega,
    })
}

/// Whether the coupling table contains a `(d_q D_{Lbar Lbar})^2` term.
pub fn has_lblb_self_coupling(system: &CharSystem) -> bool {
    system
        .couplings
        .iter()
        .any(|c| c.j == 4 && c.k == 4 && c.target == 4 && c.n == 1 && c.m == 1)
}

/// `U_I = d_q Phi_I` on a fixed `q` grid at slow time `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharProfile {
    pub q: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub l: f64,
}

impl CharProfile {
    /// Uniform grid of `nq` points on `[q_min, q_max]`, components from `f`.
    pub fn from_fn(
        components: usize,
        q_min: f64,
        q_max: f64,
        nq: usize,
        mut f: impl FnMut(usize, f64) -> f64,
    ) -> Self {
        let dq = (q_max - q_min) / (nq - 1) as f64;
        let q: Vec<f64> = (0..nq).map(|i| q_min + i as f64 * dq).collect();
        let u = (0..components)
            .map(|c| q.iter().map(|&x| f(c, x)).collect())
            .collect();
        Self { q, u, l: 0.0 }
    }

    /// `eps exp(-q^2)` in every component listed in `seeded`.
    pub fn gaussian_seed(components: usize, seeded: &[usize], eps: f64, nq: usize) -> Self {
        Self::from_fn(components, -10.0, 10.0, nq, |c, q| {
            if seeded.contains(&c) {
                eps * exp(-q * q)
            } else {
                0.0
            }
        })
    }

    pub fn dq(&self) -> f64 {
        self.q[1] - self.q[0]
    }

    pub fn sup(&self, c: usize) -> f64 {
        self.u[c].iter().fold(0.0, |a, v| a.max(abs(*v)))
    }

    pub fn sup_all(&self) -> f64 {
        (0..self.u.len()).map(|c| self.sup(c)).fold(0.0, f64::max)
    }

    /// `Phi_c(q) = int_q^inf U_c / 2`, trapezoid from the right end.
    pub fn potential(&self, c: usize) -> Vec<f64> {
        potential(&self.u[c], self.dq())
    }
}

fn potential(u: &[f64], dq: f64) -> Vec<f64> {
    let n = u.len();
    let mut out = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        out[i] = out[i + 1] + 0.25 * dq * (u[i] + u[i + 1]);
    }
    out
}

/// `d_q U = -2 dU/dq`, fourth order, zero outside the grid.
fn null_derivative(u: &[f64], dq: f64) -> Vec<f64> {
    let n = u.len();
    let at = |i: isize| {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            u[i as usize]
        }
    };
    (0..n as isize)
        .map(|i| -2.0 * (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * dq))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Final slow time `ln(s_max / s0)`.
    pub l_max: f64,
    /// Largest step.
    pub dl_max: f64,
    /// Steps shrink so that `dl * sup |d_l U| / sup |U| <= growth_step`.
    pub growth_step: f64,
    /// Blow-up when `sup |U|` exceeds this multiple of the initial sup.
    pub blowup_factor: f64,
    /// Largest `dl * speed / dq` for the transport term.
    pub q_cfl: f64,
    /// Slow-time spacing of recorded samples.
    pub record_dl: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            l_max: 10.0,
            dl_max: 0.05,
            growth_step: 0.02,
            blowup_factor: 1e6,
            q_cfl: 1.0,
            record_dl: 0.1,
        }
    }
}

/// Component sups at one slow time.
#[derive(Debug, Clone, PartialEq)]
pub struct CharSample {
    pub l: f64,
    pub sup: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharHistory {
    pub labels: Vec<String>,
    pub samples: Vec<CharSample>,
    pub last: CharProfile,
    /// Slow time at which the blow-up threshold was crossed.
    pub blowup: Option<f64>,
    /// Step size at the crossing: the uncertainty of `blowup`.
    pub blowup_uncertainty: f64,
}

fn rhs(sys: &CharSystem, u: &[Vec<f64>], dq: f64, out: &mut [Vec<f64>]) {
    let nc = u.len();
    let nq = u[0].len();
    let mut du: Vec<Option<Vec<f64>>> = vec![None; nc];
    let mut pot: Vec<Option<Vec<f64>>> = vec![None; nc];
    let need_du = |c: usize| {
        sys.hll != HllMode::Zero
            || sys
                .couplings
                .iter()
                .any(|k| (k.j == c && k.n == 2) || (k.k == c && k.m == 2))
    };
    for c in 0..nc {
        if need_du(c) {
            du[c] = Some(null_derivative(&u[c], dq));
        }
        if sys.couplings.iter().any(|k| k.j == c && k.n == 0) || sys.ll_component == Some(c) {
            pot[c] = Some(potential(&u[c], dq));
        }
    }
    let field = |c: usize, order: usize, i: usize| -> f64 {
        match order {
            0 => pot[c].as_ref().map_or(0.0, |p| p[i]),
            1 => u[c][i],
            _ => du[c].as_ref().map_or(0.0, |d| d[i]),
        }
    };
    for (c, o) in out.iter_mut().enumerate() {
        for i in 0..nq {
            let hh = match sys.hll {
                HllMode::Zero => 0.0,
                HllMode::MassProfile => -sys.mass,
                HllMode::SelfCoupled => sys
                    .ll_component
                    .map_or(0.0, |l| -pot[l].as_ref().map_or(0.0, |p| p[i])),
            };
            let mut v = if hh != 0.0 {
                hh * du[c].as_ref().map_or(0.0, |d| d[i])
            } else {
                0.0
            };
            for k in sys.couplings_of(c) {
                v += k.coeff * field(k.j, k.n, i) * field(k.k, k.m, i);
            }
            o[i] = 0.5 * v;
        }
    }
}

/// Largest transport speed `|hh|` (in `q` per unit `l`).
fn transport_speed(sys: &CharSystem, p: &CharProfile) -> f64 {
    match sys.hll {
        HllMode::Zero => 0.0,
        HllMode::MassProfile => abs(sys.mass),
        HllMode::SelfCoupled => sys.ll_component.map_or(0.0, |l| {
            p.potential(l).iter().fold(0.0, |a, v| a.max(abs(*v)))
        }),
    }
}

/// Integrate in slow time with RK4 until `l_max` or blow-up.
pub fn integrate(
    sys: &CharSystem,
    data: &CharProfile,
    opts: &IntegrateOptions,
) -> Result<CharHistory> {
    if data.u.len() != sys.len() {
        return Err(Error::InvalidParameter(
            "profile does not match the system".into(),
        ));
    }
    if data.q.len() < 5 {
        return Err(Error::InvalidParameter(
            "q grid needs at least five points".into(),
        ));
    }
    let dq = data.dq();
    let mut p = data.clone();
    for &c in &sys.constrained {
        p.u[c].iter_mut().for_each(|v| *v = 0.0);
    }
    let sup0 = p.sup_all();
    let nc = sys.len();
    let nq = p.q.len();
    let sample = |p: &CharProfile| CharSample {
        l: p.l,
        sup: (0..nc).map(|c| p.sup(c)).collect(),
    };
    let mut samples = vec![sample(&p)];
    let mut next_record = p.l + opts.record_dl;
    let mut blowup = None;
    let mut last_dl = 0.0;
    let zeros = || vec![vec![0.0; nq]; nc];
    let (mut k1, mut k2, mut k3, mut k4) = (zeros(), zeros(), zeros(), zeros());
    let mut tmp = zeros();
    while p.l < opts.l_max - 1e-12 {
        rhs(sys, &p.u, dq, &mut k1);
        let mut rate = 0.0f64;
        for c in 0..nc {
            let s = p.sup(c);
            if s > 0.0 {
                let r = k1[c].iter().fold(0.0, |a: f64, v| a.max(abs(*v)));
                rate = rate.max(r / p.sup_all());
            }
        }
        let mut dl = opts.dl_max.min(opts.l_max - p.l);
        if rate > 0.0 {
            dl = dl.min(opts.growth_step / rate);
        }
        let speed = transport_speed(sys, &p);
        if dl * speed / dq > opts.q_cfl {
            return Err(Error::QCfl {
                dl,
                limit: opts.q_cfl * dq / speed,
            });
        }
        let stage = |k: &[Vec<f64>], c: f64, tmp: &mut Vec<Vec<f64>>| {
            for (t, (u, k)) in tmp.iter_mut().zip(p.u.iter().zip(k)) {
                for i in 0..nq {
                    t[i] = u[i] + c * k[i];
                }
            }
        };
        stage(&k1, 0.5 * dl, &mut tmp);
        rhs(sys, &tmp, dq, &mut k2);
        stage(&k2, 0.5 * dl, &mut tmp);
        rhs(sys, &tmp, dq, &mut k3);
        stage(&k3, dl, &mut tmp);
        rhs(sys, &tmp, dq, &mut k4);
        for c in 0..nc {
            for i in 0..nq {
                p.u[c][i] += dl / 6.0 * (k1[c][i] + 2.0 * k2[c][i] + 2.0 * k3[c][i] + k4[c][i]);
            }
        }
        for &c in &sys.constrained {
            p.u[c].iter_mut().for_each(|v| *v = 0.0);
        }
        p.l += dl;
        last_dl = dl;
        let s = p.sup_all();
        if !s.is_finite() || (sup0 > 0.0 && s > opts.blowup_factor * sup0) {
            blowup = Some(p.l);
            samples.push(sample(&p));
            break;
        }
        if p.l >= next_record - 1e-12 {
            samples.push(sample(&p));
            while next_record <= p.l + 1e-12 {
                next_record += opts.record_dl;
            }
        }
    }
    if samples.last().map(|s| s.l) != Some(p.l) {
        samples.push(sample(&p));
    }
    Ok(CharHistory {
        labels: sys.labels.clone(),
        samples,
        last: p,
        blowup,
        blowup_uncertainty: last_dl,
    })
}

/// `u0 / (1 - a u0 l / 2)`: the exact solution of `d_l u = a u^2 / 2`.
pub fn riccati_solution(u0: f64, a: f64, l: f64) -> f64 {
    u0 / (1.0 - 0.5 * a * u0 * l)
}

/// Blow-up time `2 / (a u0)` of [`riccati_solution`] (infinite if
/// `a u0 <= 0`).
pub fn riccati_blowup(u0: f64, a: f64) -> f64 {
    if a * u0 > 0.0 {
        2.0 / (a * u0)
    } else {
        f64::INFINITY
    }
}

/// Growth of one component over a history.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRate {
    pub label: String,
    /// Slope of `sup |U|` against `l`, divided by the initial sup over
    /// all components.
    pub ln_slope: f64,
    pub r2: f64,
    /// Fitted change of `sup |U|` across the history, relative to the
    /// same scale as `ln_slope`.
    pub growth: f64,
    /// `sup |U|` stays zero.
    pub zero: bool,
}

/// Relative change across a history above which a component counts as
/// growing.
pub const GROWTH_THRESHOLD: f64 = 0.1;

impl ComponentRate {
    pub fn grows(&self) -> bool {
        self.growth > GROWTH_THRESHOLD
    }
}

/// Fit each component's sup against `l`. The history must span two
/// decades in `s` (`l` range at least `ln 100`).
pub fn sharp_decay_targets(history: &CharHistory) -> Result<Vec<ComponentRate>> {
    let s = &history.samples;
    let span = s.last().map_or(0.0, |x| x.l) - s.first().map_or(0.0, |x| x.l);
    if span < ln(100.0) * (1.0 - 1e-12) {
        return Err(Error::InsufficientSpan(
            "history spans less than two decades in s",
        ));
    }
    let scale = s[0].sup.iter().fold(0.0, |a: f64, v| a.max(*v));
    let l: Vec<f64> = s.iter().map(|x| x.l).collect();
    (0..history.labels.len())
        .map(|c| {
            let y: Vec<f64> = s.iter().map(|x| x.sup[c]).collect();
            let zero = y.iter().all(|v| *v == 0.0);
            if zero || scale == 0.0 {
                return Ok(ComponentRate {
                    label: history.labels[c].clone(),
                    ln_slope: 0.0,
                    r2: 1.0,
                    growth: 0.0,
                    zero,
                });
            }
            let f = linear(&l, &y)?;
            Ok(ComponentRate {
                label: history.labels[c].clone(),
                ln_slope: f.slope / scale,
                r2: f.r2,
                growth: f.slope * span / scale,
                zero,
            })
        })
        .collect()
}

/// Outcome of [`classify_weak_null`].
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Every contracted coefficient vanishes for every sampled direction.
    NullCondition,
    /// No blow-up up to `l_max`; per-component growth of the largest
    /// amplitude run.
    WeakNullGlobal { rates: Vec<ComponentRate> },
    /// Blow-up for some amplitude: `(epsilon, l*)` pairs and the fit of
    /// `l*` against `1 / epsilon`.
    BlowUp {
        table: Vec<(f64, f64)>,
        slope: f64,
        r2: f64,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::NullCondition => "null-condition",
            Verdict::WeakNullGlobal { .. } => "weak-null-global",
            Verdict::BlowUp { .. } => "blow-up",
        }
    }
}

/// Classify a quadratic system: test the null condition on a sphere of
/// directions, otherwise integrate Gaussian data of every amplitude in
/// `epsilons` up to `s_max` (with `s0 = 1`) along each direction.
pub fn classify_weak_null(
    system: &WaveSystem,
    epsilons: &[f64],
    s_max: f64,
    nq: usize,
) -> Result<Verdict> {
    let dirs = SphereRule::new(3).nodes;
    let n = system.unknowns.len();
    let mut null = true;
    'outer: for &w in &dirs {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 1..=2 {
                        for nn in 0..=m {
                            if abs(coefficient_a(system, w, i, j, k, nn, m)?) > 1e-14 {
                                null = false;
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    if null {
        return Ok(Verdict::NullCondition);
    }
    let opts = IntegrateOptions {
        l_max: ln(s_max),
        record_dl: 0.5,
        ..Default::default()
    };
    let seeded: Vec<usize> = (0..n).collect();
    let mut table = Vec::new();
    let mut rates = Vec::new();
    for &eps in epsilons {
        let mut lstar = f64::INFINITY;
        for &w in &dirs {
            let cs = CharSystem::from_wave_system(system, w)?;
            let h = integrate(&cs, &CharProfile::gaussian_seed(n, &seeded, eps, nq), &opts)?;
            if let Some(l) = h.blowup {
                lstar = lstar.min(l);
            } else if eps == epsilons.iter().cloned().fold(0.0, f64::max) && rates.is_empty() {
                rates = sharp_decay_targets(&h)?;
            }
        }
        if lstar.is_finite() {
            table.push((eps, lstar));
        }
    }
    if table.is_empty() {
        return Ok(Verdict::WeakNullGlobal { rates });
    }
    let (slope, r2) = if table.len() >= 3 {
        let x: Vec<f64> = table.iter().map(|(e, _)| 1.0 / e).collect();
        let y: Vec<f64> = table.iter().map(|(_, l)| *l).collect();
        let f = linear(&x, &y)?;
        (f.slope, f.r2)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(Verdict::BlowUp { table, slope, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv_index(v: FrameVector) -> usize {
        match v {
            FrameVector::L => 0,
            FrameVector::Lbar => 1,
            FrameVector::S1 => 2,
            FrameVector::S2 => 3,
        }
    }

    #[test]
    fn frame_reconstruction_round_trips() {
        let w = [0.48, -0.6, 0.64];
        let frame = NullFrame::at(w).unwrap();
        let comps = [0.3, -1.1, 0.7, 0.2, 2.0, -0.4, 0.9, 1.3, -0.8, 0.5];
        let t = tensor_from_frame(&frame, &comps);
        let fc = frame.tensor_components(&t);
        for (c, &(a, b)) in FRAME_PAIRS.iter().enumerate() {
            assert!((fc[fv_index(a)][fv_index(b)] - comps[c]).abs() < 1e-13);
        }
    }

    #[test]
    fn coefficient_of_dt_squared_is_a_quarter() {
        let s = WaveSystem::scalar_dt_squared();
        for w in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]] {
            assert_eq!(coefficient_a(&s, w, 0, 0, 0, 1, 1).unwrap(), 0.25);
        }
    }

    #[test]
    fn q0_satisfies_the_null_condition() {
        let s = WaveSystem::scalar_q0();
        for &w in &SphereRule::new(4).nodes {
            assert!(coefficient_a(&s, w, 0, 0, 0, 1, 1).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn coefficient_index_checks() {
        let s = WaveSystem::model_pair();
        let w = [0.0, 0.0, 1.0];
        assert!(coefficient_a(&s, w, 2, 0, 0, 1, 1).is_err());
        assert!(coefficient_a(&s, w, 1, 0, 0, 2, 1).is_err());
        assert!(coefficient_a(&s, w, 1, 0, 0, 0, 3).is_err());
        assert!(WaveSystem::new(&["a"])
            .with_term(0, 0, &[0, 1, 2], 0, &[0], 1.0)
            .is_err());
    }

    #[test]
    fn einstein_table_has_no_lblb_square() {
        for w in [[0.0, 0.0, 1.0], [0.36, 0.48, 0.8]] {
            let sys = build_einstein_system(0.1, HllMode::MassProfile, w).unwrap();
            assert!(!has_lblb_self_coupling(&sys));
            assert!(sys.couplings.iter().all(|c| c.target == 4));
            // The L L times Lbar Lbar cross term is present.
            assert!(sys.couplings.iter().any(|c| c.j == 0 && c.k == 4));
        }
    }

    #[test]
    fn riccati_matches_closed_form() {
        let sys = CharSystem::from_wave_system(&WaveSystem::scalar_dt_squared(), [1.0, 0.0, 0.0])
            .unwrap();
        let eps = 0.05;
        let data = CharProfile::gaussian_seed(1, &[0], eps, 201);
        let lstar = riccati_blowup(eps, 0.25);
        let opts = IntegrateOptions {
            l_max: 0.5 * lstar,
            ..Default::default()
        };
        let h = integrate(&sys, &data, &opts).unwrap();
        assert!(h.blowup.is_none());
        for (q, u) in h.last.q.iter().zip(&h.last.u[0]) {
            let u0 = eps * exp(-q * q);
            let exact = riccati_solution(u0, 0.25, h.last.l);
            assert!(
                (u - exact).abs() <= 1e-6 * exact.abs().max(1e-300),
                "{q} {u} {exact}"
            );
        }
    }

    #[test]
    fn riccati_blowup_time() {
        let sys = CharSystem::from_wave_system(&WaveSystem::scalar_dt_squared(), [1.0, 0.0, 0.0])
            .unwrap();
        let eps = 0.1;
        let data = CharProfile::gaussian_seed(1, &[0], eps, 201);
        let opts = IntegrateOptions {
            l_max: 1000.0,
            ..Default::default()
        };
        let h = integrate(&sys, &data, &opts).unwrap();
        let l = h.blowup.unwrap();
        let pred = riccati_blowup(eps, 0.25);
        assert!((l - pred).abs() < 0.02 * pred, "{l} {pred}");
    }

    #[test]
    fn model_pair_grows_linearly() {
        let sys = CharSystem::from_wave_system(&WaveSystem::model_pair(), [0.0, 1.0, 0.0]).unwrap();
        let data = CharProfile::gaussian_seed(2, &[0], 0.1, 201);
        let opts = IntegrateOptions {
            l_max: 20.0,
            ..Default::default()
        };
        let h = integrate(&sys, &data, &opts).unwrap();
        let l: Vec<f64> = h.samples.iter().map(|s| s.l).collect();
        let y: Vec<f64> = h.samples.iter().map(|s| s.sup[1]).collect();
        let f = linear(&l, &y).unwrap();
        assert!(f.r2 >= 0.999);
        // d_l U2 = U1^2 / 8 with U1 = 0.1 at the peak.
        assert!((f.slope - 0.01 / 8.0).abs() < 1e-9);
    }

    #[test]
    fn q_cfl_violation_is_an_error() {
        let mut sys = build_einstein_system(5.0, HllMode::MassProfile, [0.0, 0.0, 1.0]).unwrap();
        sys.mass = 5.0;
        let data = CharProfile::gaussian_seed(11, &[5, 10], 1e-3, 201);
        let opts = IntegrateOptions {
            dl_max: 0.5,
            growth_step: 10.0,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&sys, &data, &opts),
            Err(Error::QCfl { .. })
        ));
    }

    #[test]
    fn zero_data_stays_zero() {
        let sys = build_einstein_system(0.1, HllMode::MassProfile, [0.0, 0.0, 1.0]).unwrap();
        let data = CharProfile::gaussian_seed(11, &[], 0.1, 101);
        let h = integrate(&sys, &data, &IntegrateOptions::default()).unwrap();
        assert_eq!(h.last.sup_all(), 0.0);
        let r = sharp_decay_targets(&h).unwrap();
        assert!(r.iter().all(|c| c.zero && c.ln_slope == 0.0));
    }

    #[test]
    fn short_history_is_rejected() {
        let sys = CharSystem::from_wave_system(&WaveSystem::model_pair(), [0.0, 1.0, 0.0]).unwrap();
        let data = CharProfile::gaussian_seed(2, &[0], 0.1, 101);
        let opts = IntegrateOptions {
            l_max: 2.0,
            ..Default::default()
        };
        let h = integrate(&sys, &data, &opts).unwrap();
        assert!(matches!(
            sharp_decay_targets(&h),
            Err(Error::InsufficientSpan(_))
        ));
    }

    #[test]
    fn potential_inverts_null_derivative() {
        let p = CharProfile::from_fn(1, -10.0, 10.0, 401, |_, q| exp(-q * q));
        let phi = p.potential(0);
        let back = null_derivative(&phi, p.dq());
        for (b, u) in back.iter().zip(&p.u[0]).skip(2).take(396) {
            assert!((b - u).abs() < 1e-3);
        }
    }

    #[test]
    fn zoo_verdicts() {
        let eps = [0.02, 0.04, 0.06, 0.08, 0.1];
        let s_max = exp(450.0);
        assert_eq!(
            classify_weak_null(&WaveSystem::scalar_q0(), &eps, s_max, 101).unwrap(),
            Verdict::NullCondition
        );
        match classify_weak_null(&WaveSystem::weak_null_example(), &eps, s_max, 101).unwrap() {
            Verdict::WeakNullGlobal { rates } => {
                let grows: Vec<bool> = rates.iter().map(|r| r.grows()).collect();
                assert_eq!(grows, [true, false, false]);
            }
            v => panic!("{v:?}"),
        }
        match classify_weak_null(&WaveSystem::scalar_dt_squared(), &eps, s_max, 101).unwrap() {
            Verdict::BlowUp { table, slope, r2 } => {
                assert_eq!(table.len(), 5);
                for (e, l) in &table {
                    let pred = riccati_blowup(*e, 0.25);
                    assert!((l - pred).abs() < 0.02 * pred);
                }
                assert!(r2 >= 0.99);
                assert!((slope - 8.0).abs() < 0.2);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn einstein_rates() {
        let mut slopes = Vec::new();
        for nq in [201, 401] {
            let sys = build_einstein_system(0.01, HllMode::MassProfile, [0.0, 0.6, 0.8]).unwrap();
            let seeded: Vec<usize> = (0..11).collect();
            let data = CharProfile::gaussian_seed(11, &seeded, 1e-2, nq);
            let opts = IntegrateOptions {
                l_max: 10.0,
                ..Default::default()
            };
            let h = integrate(&sys, &data, &opts).unwrap();
            let r = sharp_decay_targets(&h).unwrap();
            for (c, rate) in r.iter().enumerate() {
                if c != 4 {
                    assert!(rate.ln_slope.abs() <= 0.02, "{rate:?}");
                }
            }
            assert!(r[4].ln_slope > 0.0);
            slopes.push(r[4].ln_slope);
        }
        assert!((slopes[0] - slopes[1]).abs() <= 0.05 * slopes[1]);
    }
}
