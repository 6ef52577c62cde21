//! Null frame adapted to outgoing Minkowski light cones.
//!
//! At a spatial point `x` with `omega = x / |x|` the frame is
//! `L = (1, omega)`, `Lbar = (1, -omega)` and two unit vectors `S1`, `S2`
//! tangent to the sphere. The frame metric is `m(L, Lbar) = -2`,
//! `m(S_a, S_b) = delta_ab`, all other pairings zero.

use crate::error::{Error, Result};
use crate::math::{abs, hypot3, sqrt};
use crate::tensor::{lower, SymTensor2, Vec4, ETA};

/// One of the four frame vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameVector {
    L,
    Lbar,
    S1,
    S2,
}

/// Families of frame vectors used by the seminorms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFamily {
    /// `{L}`
    Outgoing,
    /// `{L, S1, S2}`: vectors tangent to the outgoing cone.
    Tangent,
    /// `{L, Lbar, S1, S2}`: the whole frame.
    Full,
    /// `{S1, S2}`
    Sphere,
}

impl FrameFamily {
    pub fn members(self) -> &'static [FrameVector] {
        use FrameVector::*;
        match self {
            FrameFamily::Outgoing => &[L],
            FrameFamily::Tangent => &[L, S1, S2],
            FrameFamily::Full => &[L, Lbar, S1, S2],
            FrameFamily::Sphere => &[S1, S2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullFrame {
    pub point: [f64; 3],
    pub omega: [f64; 3],
    pub l: Vec4,
    pub lbar: Vec4,
    pub s1: Vec4,
    pub s2: Vec4,
}

/// Build the frame at `x`.
///
/// `S1` is obtained by Gram-Schmidt of the coordinate axis along which
/// `|omega_i|` is smallest, `S2 = omega x S1`.
pub fn frame_at(x: [f64; 3]) -> Result<NullFrame> {
    let r = hypot3(x);
    if !(r > 0.0) {
        return Err(Error::FrameAtOrigin);
    }
    let w = [x[0] / r, x[1] / r, x[2] / r];
    let mut axis = 0;
    for i in 1..3 {
        if abs(w[i]) < abs(w[axis]) {
            axis = i;
        }
    }
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let d = w[axis];
    let mut s1 = [e[0] - d * w[0], e[1] - d * w[1], e[2] - d * w[2]];
    let n1 = hypot3(s1);
    for c in s1.iter_mut() {
        *c /= n1;
    }
    let s2 = [
        w[1] * s1[2] - w[2] * s1[1],
        w[2] * s1[0] - w[0] * s1[2],
        w[0] * s1[1] - w[1] * s1[0],
    ];
    Ok(NullFrame {
        point: x,
        omega: w,
        l: [1.0, w[0], w[1], w[2]],
        lbar: [1.0, -w[0], -w[1], -w[2]],
        s1: [0.0, s1[0], s1[1], s1[2]],
        s2: [0.0, s2[0], s2[1], s2[2]],
    })
}

impl NullFrame {
    pub fn at(x: [f64; 3]) -> Result<Self> {
        frame_at(x)
    }

    pub fn vector(&self, v: FrameVector) -> Vec4 {
        match v {
            FrameVector::L => self.l,
            FrameVector::Lbar => self.lbar,
            FrameVector::S1 => self.s1,
            FrameVector::S2 => self.s2,
        }
    }

    /// Frame components `(X^L, X^Lbar, X^S1, X^S2)` of a vector, so that
    /// `X = X^L L + X^Lbar Lbar + X^S1 S1 + X^S2 S2`.
    pub fn components(&self, x: Vec4) -> [f64; 4] {
        let xl = lower(x);
        let dot = |v: Vec4| xl[0] * v[0] + xl[1] * v[1] + xl[2] * v[2] + xl[3] * v[3];
        [
            -0.5 * dot(self.lbar),
            -0.5 * dot(self.l),
            dot(self.s1),
            dot(self.s2),
        ]
    }

    /// All sixteen frame components `p(U, V)`, indexed `[L, Lbar, S1, S2]`.
    pub fn tensor_components(&self, p: &SymTensor2) -> [[f64; 4]; 4] {
        let f = [self.l, self.lbar, self.s1, self.s2];
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in a..4 {
                let v = p.contract(f[a], f[b]);
                out[a][b] = v;
                out[b][a] = v;
            }
        }
        out
    }
}

/// `p_{ab} V^a W^b`.
pub fn frame_component(p: &SymTensor2, v: Vec4, w: Vec4) -> f64 {
    p.contract(v, w)
}

/// `|p|_{VW}`: sum of absolute frame components over two families.
pub fn seminorm(p: &SymTensor2, frame: &NullFrame, v: FrameFamily, w: FrameFamily) -> f64 {
    let mut s = 0.0;
    for &a in v.members() {
        for &b in w.members() {
            s += abs(p.contract(frame.vector(a), frame.vector(b)));
        }
    }
    s
}

/// Derivative seminorm over a direction family.
///
/// `dp[a]` holds `d_a p`. The sum runs over directions `X` in `dirs`
/// and components `V`, `W` in the two families, of `|(X^a d_a p)(V, W)|`.
/// `dirs = Full` gives `|dp|_{VW}`, `dirs = Tangent` the tangential version.
pub fn derivative_seminorm(
    dp: &[SymTensor2; 4],
    frame: &NullFrame,
    dirs: FrameFamily,
    v: FrameFamily,
    w: FrameFamily,
) -> f64 {
    let mut s = 0.0;
    for &d in dirs.members() {
        let x = frame.vector(d);
        let mut dx = SymTensor2::ZERO;
        for a in 0..4 {
            if x[a] != 0.0 {
                dx = dx.add(&dp[a].scale(x[a]));
            }
        }
        s += seminorm(&dx, frame, v, w);
    }
    s
}

/// `1/4 tr(pi) tr(theta) - 1/2 pi^{ab} theta_{ab}` with traces and raised
/// indices taken with the Minkowski metric.
pub fn quadratic_p(pi: &SymTensor2, theta: &SymTensor2) -> f64 {
    let mut contr = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            contr += ETA[a] * ETA[b] * pi.get(a, b) * theta.get(a, b);
        }
    }
    0.25 * pi.trace() * theta.trace() - 0.5 * contr
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullForm {
    /// `m^{ab} xi_a eta_b`
    Q0,
    /// `xi_a eta_b - xi_b eta_a`
    Q(usize, usize),
}

pub fn null_form(kind: NullForm, xi: Vec4, eta: Vec4) -> Result<f64> {
    match kind {
        NullForm::Q0 => Ok((0..4).map(|a| ETA[a] * xi[a] * eta[a]).sum()),
        NullForm::Q(a, b) => {
            if a > 3 || b > 3 {
                return Err(Error::IndexOutOfRange("null form index"));
            }
            if a == b {
                return Err(Error::DegenerateIndexPair(a));
            }
            Ok(xi[a] * eta[b] - xi[b] * eta[a])
        }
    }
}

/// Derivatives tangent to the outgoing cone through a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentialGradient {
    /// `L^a grad_a = (d_t + d_r) f`
    pub along_l: f64,
    /// `d_i f - omega_i omega^j d_j f`
    pub angular: [f64; 3],
}

impl TangentialGradient {
    /// `|(d_t + d_r) f| + sum_i |angular_i|`.
    pub fn norm(&self) -> f64 {
        abs(self.along_l) + self.angular.iter().map(|x| abs(*x)).sum::<f64>()
    }

    pub fn euclidean_norm(&self) -> f64 {
        let a = self.angular;
        sqrt(self.along_l * self.along_l + a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
    }
}

/// Split a covector `grad_a = d_a f` into its cone-tangential parts.
pub fn tangential_gradient(grad: Vec4, x: [f64; 3]) -> Result<TangentialGradient> {
    let r = hypot3(x);
    if !(r > 0.0) {
        return Err(Error::FrameAtOrigin);
    }
    let w = [x[0] / r, x[1] / r, x[2] / r];
    let radial = w[0] * grad[1] + w[1] * grad[2] + w[2] * grad[3];
    Ok(TangentialGradient {
        along_l: grad[0] + radial,
        angular: [
            grad[1] - w[0] * radial,
            grad[2] - w[1] * radial,
            grad[3] - w[2] * radial,
        ],
    })
}

/// Rebuild a covector from its frame pieces.
///
/// With `a = L^b grad_b` and `b = Lbar^c grad_c`, the covector is
/// `-1/2 b L_a - 1/2 a Lbar_a + (angular part)`; this is the completeness
/// relation of the frame. Returned so callers can check the split.
pub fn reconstruct_covector(grad: Vec4, x: [f64; 3]) -> Result<Vec4> {
    let f = frame_at(x)?;
    let tg = tangential_gradient(grad, x)?;
    let lb = grad[0] - (f.omega[0] * grad[1] + f.omega[1] * grad[2] + f.omega[2] * grad[3]);
    let l_low = lower(f.l);
    let lb_low = lower(f.lbar);
    let mut out = [0.0; 4];
    for a in 0..4 {
        out[a] = -0.5 * lb * l_low[a] - 0.5 * tg.along_l * lb_low[a];
    }
    for i in 0..3 {
        out[i + 1] += tg.angular[i];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::m_dot;

    #[test]
    fn frame_on_axis() {
        let f = frame_at([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.l, [1.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.lbar, [1.0, -1.0, 0.0, 0.0]);
        let f = frame_at([0.0, 0.0, 2.0]).unwrap();
        assert_eq!(f.l, [1.0, 0.0, 0.0, 1.0]);
        assert_eq!(m_dot(f.l, f.lbar), -2.0);
    }

    #[test]
    fn origin_is_rejected() {
        assert_eq!(frame_at([0.0; 3]), Err(Error::FrameAtOrigin));
        assert!(tangential_gradient([1.0; 4], [0.0; 3]).is_err());
    }

    #[test]
    fn frame_component_examples() {
        let f = frame_at([0.3, -1.0, 0.7]).unwrap();
        let m = SymTensor2::minkowski();
        assert!(frame_component(&m, f.l, f.l).abs() < 1e-15);
        assert!((frame_component(&m, f.l, f.lbar) + 2.0).abs() < 1e-15);
        let mut p = SymTensor2::ZERO;
        p.set(1, 1, 1.0);
        assert_eq!(
            frame_component(&p, [0.0, 1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]),
            1.0
        );
    }

    #[test]
    fn minkowski_has_zero_outgoing_seminorm() {
        let f = frame_at([1.0, 2.0, 3.0]).unwrap();
        let m = SymTensor2::minkowski();
        assert!(seminorm(&m, &f, FrameFamily::Outgoing, FrameFamily::Outgoing) < 1e-15);
        assert!(seminorm(&m, &f, FrameFamily::Outgoing, FrameFamily::Tangent) < 1e-15);
        for v in [
            FrameFamily::Outgoing,
            FrameFamily::Tangent,
            FrameFamily::Full,
        ] {
            for w in [
                FrameFamily::Outgoing,
                FrameFamily::Sphere,
                FrameFamily::Full,
            ] {
                assert_eq!(seminorm(&SymTensor2::ZERO, &f, v, w), 0.0);
            }
        }
    }

    #[test]
    fn quadratic_p_examples() {
        let m = SymTensor2::minkowski();
        assert_eq!(quadratic_p(&m, &m), 2.0);
        let mut p = SymTensor2::ZERO;
        p.set(1, 1, 1.0);
        assert_eq!(quadratic_p(&p, &p), -0.25);
        assert_eq!(quadratic_p(&SymTensor2::ZERO, &SymTensor2::ZERO), 0.0);
    }

    #[test]
    fn null_form_examples() {
        assert_eq!(
            null_form(NullForm::Q0, [1.0, 1.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0]).unwrap(),
            0.0
        );
        assert_eq!(
            null_form(
                NullForm::Q(0, 1),
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0]
            )
            .unwrap(),
            1.0
        );
        assert_eq!(
            null_form(NullForm::Q0, [1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]).unwrap(),
            -1.0
        );
        assert_eq!(
            null_form(NullForm::Q(2, 2), [1.0; 4], [1.0; 4]),
            Err(Error::DegenerateIndexPair(2))
        );
    }

    #[test]
    fn tangential_gradient_examples() {
        let x = [0.4, -0.2, 1.1];
        let f = frame_at(x).unwrap();
        let tg = tangential_gradient(lower(f.l), x).unwrap();
        assert!(tg.along_l.abs() < 1e-15);
        let tg = tangential_gradient([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(tg.along_l, 0.0);
        assert_eq!(tg.angular, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn covector_reconstruction() {
        let x = [0.3, 0.9, -0.5];
        let g = [0.7, -1.3, 0.2, 2.1];
        let back = reconstruct_covector(g, x).unwrap();
        for a in 0..4 {
            assert!((back[a] - g[a]).abs() < 1e-14);
        }
    }
}
