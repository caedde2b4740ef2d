//! Fixed-size complex vectors and 2×2 matrices used by the two-level solvers.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub type Vec2 = [C64; 2];

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Conjugated inner product `⟨u, v⟩ = Σ conj(uᵢ) vᵢ`.
pub fn inner(u: &Vec2, v: &Vec2) -> C64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

pub fn norm(v: &Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub fn normalized(v: &Vec2) -> Vec2 {
    let n = norm(v);
    [v[0] / n, v[1] / n]
}

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn from_columns(c0: Vec2, c1: Vec2) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn column(&self, j: usize) -> Vec2 {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn matmul(&self, other: &Mat2) -> Mat2 {
        Mat2::from_columns(self.apply(&other.column(0)), self.apply(&other.column(1)))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, k: C64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &other.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    pub fn shift(&self, k: C64) -> Mat2 {
        let mut m = *self;
        m.0[0][0] += k;
        m.0[1][1] += k;
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Splits `M = s·I + K` with `s = tr M / 2` and `K` traceless.
    pub fn split_traceless(&self) -> (C64, Mat2) {
        let s = self.trace() * 0.5;
        (s, self.shift(-s))
    }

    /// Closed-form eigendecomposition.
    ///
    /// Eigenvalues are `s ± r` with `r = √(h² + bc)` for the traceless part
    /// `K = [[h, b], [c, −h]]`. When `‖K‖` is below `scalar_tol·|s|` the matrix
    /// is treated as a multiple of the identity: it is diagonalizable with a
    /// two-dimensional eigenspace and the canonical basis is returned.
    pub fn eigen(&self, scalar_tol: f64) -> Eigen2 {
        let (s, k) = self.split_traceless();
        let knorm = k.frobenius();
        if knorm <= scalar_tol * s.norm().max(f64::MIN_POSITIVE) {
            return Eigen2 {
                values: [s, s],
                vectors: [[ONE, ZERO], [ZERO, ONE]],
                scalar: true,
            };
        }
        let h = k.0[0][0];
        let b = k.0[0][1];
        let c = k.0[1][0];
        let r = (h * h + b * c).sqrt();
        let pick = |root: C64| -> Vec2 {
            let from_row0 = [b, root - h];
            let from_row1 = [root + h, c];
            if norm(&from_row0) >= norm(&from_row1) {
                normalized(&from_row0)
            } else {
                normalized(&from_row1)
            }
        };
        Eigen2 {
            values: [s + r, s - r],
            vectors: [pick(r), pick(-r)],
            scalar: false,
        }
    }
}

/// Eigenpairs of a 2×2 matrix with unit-norm eigenvectors.
#[derive(Clone, Copy, Debug)]
pub struct Eigen2 {
    pub values: [C64; 2],
    pub vectors: [Vec2; 2],
    /// The matrix was numerically a scalar multiple of the identity.
    pub scalar: bool,
}
