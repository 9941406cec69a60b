//! Complex 2x2 matrices.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: C, b: C, c: C, d: C) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn pauli_x() -> Self {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Mat2::new(ZERO, C::new(0.0, -1.0), C::new(0.0, 1.0), ZERO)
    }

    pub fn pauli_z() -> Self {
        Mat2::new(ONE, ZERO, ZERO, -ONE)
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        self.0[i][j]
    }

    pub fn scale(&self, s: C) -> Self {
        let m = self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn adjoint(&self) -> Self {
        let m = self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn det(&self) -> C {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, v: [C; 2]) -> [C; 2] {
        let m = self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let d = *self - *other;
        d.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// `exp(i pi sigma_2 / 4) = (1 + i sigma_2) / sqrt 2`, the quarter turn about
/// the 2-axis taking `eps sigma_1 + f sigma_3` to `eps sigma_3 - f sigma_1`.
pub fn quarter_turn_y() -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (Mat2::IDENTITY + Mat2::pauli_y().scale(C::new(0.0, 1.0))).scale(C::new(s, 0.0))
}

/// Rewrites a propagator of `eps sigma_1 + f sigma_3` in the frame of
/// `eps sigma_3 - f sigma_1`.
pub fn to_h1_frame(u: &Mat2) -> Mat2 {
    let v = quarter_turn_y();
    v * *u * v.adjoint()
}
