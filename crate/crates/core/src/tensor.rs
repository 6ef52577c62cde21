//! Four-vectors and symmetric rank-2 tensors with Minkowski index gymnastics.
//!
//! Index 0 is time. The Minkowski metric is `diag(-1, 1, 1, 1)`.

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

pub const MINKOWSKI: Mat4 = [
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// Diagonal of the Minkowski metric (equal to its inverse).
pub const ETA: Vec4 = [-1.0, 1.0, 1.0, 1.0];

/// Independent index pairs `(mu, nu)` with `mu <= nu`, in storage order.
pub const SYM_PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

const SYM_INDEX: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]];

/// Storage slot of the component `(mu, nu)`.
#[inline]
pub fn sym_index(mu: usize, nu: usize) -> usize {
    SYM_INDEX[mu][nu]
}

/// Lower an index with the Minkowski metric.
#[inline]
pub fn lower(v: Vec4) -> Vec4 {
    [-v[0], v[1], v[2], v[3]]
}

/// Minkowski inner product of two vectors.
#[inline]
pub fn m_dot(a: Vec4, b: Vec4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// A symmetric 2-tensor with lower indices, stored as its 10 independent
/// components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2 {
    pub c: [f64; 10],
}

impl SymTensor2 {
    pub const ZERO: Self = Self { c: [0.0; 10] };

    pub fn minkowski() -> Self {
        Self::from_matrix(&MINKOWSKI)
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut c = [0.0; 10];
        for (k, &(m, n)) in SYM_PAIRS.iter().enumerate() {
            c[k] = f(m, n);
        }
        Self { c }
    }

    /// Symmetric part of a full matrix.
    pub fn from_matrix(a: &Mat4) -> Self {
        Self::from_fn(|m, n| 0.5 * (a[m][n] + a[n][m]))
    }

    #[inline]
    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.c[sym_index(mu, nu)]
    }

    #[inline]
    pub fn set(&mut self, mu: usize, nu: usize, v: f64) {
        self.c[sym_index(mu, nu)] = v;
    }

    pub fn to_matrix(&self) -> Mat4 {
        let mut a = [[0.0; 4]; 4];
        for (m, row) in a.iter_mut().enumerate() {
            for (n, x) in row.iter_mut().enumerate() {
                *x = self.get(m, n);
            }
        }
        a
    }

    /// `p_{ab} V^a W^b`.
    pub fn contract(&self, v: Vec4, w: Vec4) -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += self.get(a, b) * v[a] * w[b];
            }
        }
        s
    }

    /// Trace with the Minkowski metric.
    pub fn trace(&self) -> f64 {
        -self.c[0] + self.c[4] + self.c[7] + self.c[9]
    }

    /// Both indices raised with the Minkowski metric.
    pub fn raised(&self) -> Self {
        Self::from_fn(|m, n| ETA[m] * ETA[n] * self.get(m, n))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x += y;
        }
        Self { c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x -= y;
        }
        Self { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x *= s;
        }
        Self { c }
    }

    /// Largest absolute coordinate component.
    pub fn max_abs(&self) -> f64 {
        crate::math::sup_abs(self.c)
    }
}

/// Inverse and determinant of a 4x4 matrix by cofactor expansion.
///
/// Returns `None` when the determinant is zero or not finite, or is tiny
/// compared with the entries.
pub fn invert4(a: &Mat4) -> Option<(Mat4, f64)> {
    let m = |i: usize, j: usize| a[i][j];
    let s0 = m(0, 0) * m(1, 1) - m(1, 0) * m(0, 1);
    let s1 = m(0, 0) * m(1, 2) - m(1, 0) * m(0, 2);
    let s2 = m(0, 0) * m(1, 3) - m(1, 0) * m(0, 3);
    let s3 = m(0, 1) * m(1, 2) - m(1, 1) * m(0, 2);
    let s4 = m(0, 1) * m(1, 3) - m(1, 1) * m(0, 3);
    let s5 = m(0, 2) * m(1, 3) - m(1, 2) * m(0, 3);
    let c5 = m(2, 2) * m(3, 3) - m(3, 2) * m(2, 3);
    let c4 = m(2, 1) * m(3, 3) - m(3, 1) * m(2, 3);
    let c3 = m(2, 1) * m(3, 2) - m(3, 1) * m(2, 2);
    let c2 = m(2, 0) * m(3, 3) - m(3, 0) * m(2, 3);
    let c1 = m(2, 0) * m(3, 2) - m(3, 0) * m(2, 2);
    let c0 = m(2, 0) * m(3, 1) - m(3, 0) * m(2, 1);
    let det = s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0;
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(crate::math::abs(*x)));
    if !det.is_finite() || crate::math::abs(det) <= 1e-14 * scale * scale * scale * scale {
        return None;
    }
    let id = 1.0 / det;
    let mut b = [[0.0; 4]; 4];
    b[0][0] = (m(1, 1) * c5 - m(1, 2) * c4 + m(1, 3) * c3) * id;
    b[0][1] = (-m(0, 1) * c5 + m(0, 2) * c4 - m(0, 3) * c3) * id;
    b[0][2] = (m(3, 1) * s5 - m(3, 2) * s4 + m(3, 3) * s3) * id;
    b[0][3] = (-m(2, 1) * s5 + m(2, 2) * s4 - m(2, 3) * s3) * id;
    b[1][0] = (-m(1, 0) * c5 + m(1, 2) * c2 - m(1, 3) * c1) * id;
    b[1][1] = (m(0, 0) * c5 - m(0, 2) * c2 + m(0, 3) * c1) * id;
    b[1][2] = (-m(3, 0) * s5 + m(3, 2) * s2 - m(3, 3) * s1) * id;
    b[1][3] = (m(2, 0) * s5 - m(2, 2) * s2 + m(2, 3) * s1) * id;
    b[2][0] = (m(1, 0) * c4 - m(1, 1) * c2 + m(1, 3) * c0) * id;
    b[2][1] = (-m(0, 0) * c4 + m(0, 1) * c2 - m(0, 3) * c0) * id;
    b[2][2] = (m(3, 0) * s4 - m(3, 1) * s2 + m(3, 3) * s0) * id;
    b[2][3] = (-m(2, 0) * s4 + m(2, 1) * s2 - m(2, 3) * s0) * id;
    b[3][0] = (-m(1, 0) * c3 + m(1, 1) * c1 - m(1, 2) * c0) * id;
    b[3][1] = (m(0, 0) * c3 - m(0, 1) * c1 + m(0, 2) * c0) * id;
    b[3][2] = (-m(3, 0) * s3 + m(3, 1) * s1 - m(3, 2) * s0) * id;
    b[3][3] = (m(2, 0) * s3 - m(2, 1) * s1 + m(2, 2) * s0) * id;
    Some((b, det))
}

/// Inverse of a symmetric 3x3 matrix and its determinant.
pub fn invert3(a: &[[f64; 3]; 3]) -> Option<([[f64; 3]; 3], f64)> {
    let c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    let c01 = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    let c02 = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    let det = a[0][0] * c00 + a[0][1] * c01 + a[0][2] * c02;
    if !det.is_finite() || det == 0.0 {
        return None;
    }
    let id = 1.0 / det;
    let b = [
        [
            c00 * id,
            (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * id,
            (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * id,
        ],
        [
            c01 * id,
            (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * id,
            (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * id,
        ],
        [
            c02 * id,
            (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * id,
            (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * id,
        ],
    ];
    Some((b, det))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_inverse_is_itself() {
        let (inv, det) = invert4(&MINKOWSKI).unwrap();
        assert_eq!(inv, MINKOWSKI);
        assert_eq!(det, -1.0);
    }

    #[test]
    fn inverse_of_general_matrix() {
        let a = [
            [-1.2, 0.1, 0.05, -0.2],
            [0.1, 1.1, 0.3, 0.0],
            [0.05, 0.3, 0.9, 0.1],
            [-0.2, 0.0, 0.1, 1.3],
        ];
        let (b, _) = invert4(&a).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| a[i][k] * b[k][j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut a = MINKOWSKI;
        a[3] = a[2];
        assert!(invert4(&a).is_none());
    }

    #[test]
    fn symmetric_storage_round_trip() {
        let p = SymTensor2::from_fn(|m, n| (m * 4 + n + n * 4 + m) as f64);
        let a = p.to_matrix();
        for m in 0..4 {
            for n in 0..4 {
                assert_eq!(a[m][n], a[n][m]);
                assert_eq!(p.get(m, n), a[m][n]);
            }
        }
        assert_eq!(SymTensor2::minkowski().trace(), 4.0);
    }

    #[test]
    fn invert3_identity_scaled() {
        let a = [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 0.5]];
        let (b, d) = invert3(&a).unwrap();
        assert_eq!(d, 4.0);
        assert_eq!(b[2][2], 2.0);
    }
}
