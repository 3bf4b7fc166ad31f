//! Small dense helpers on top of nalgebra that report *where* a
//! factorisation broke down, which nalgebra's own decompositions do not.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold below which a column is treated as dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Factor `a`. On failure returns the index of the first pivot that is
    /// not safely positive relative to the matrix diagonal.
    pub fn new(a: &DMatrix<f64>) -> Result<Self, usize> {
        let n = a.nrows();
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            let scale = a[(j, j)].abs();
            if !(d > RANK_TOL * scale) || scale == 0.0 {
                return Err(j);
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn ln_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let z = self
            .l
            .solve_lower_triangular(b)
            .expect("cholesky factor has a positive diagonal");
        self.l
            .transpose()
            .solve_upper_triangular(&z)
            .expect("cholesky factor has a positive diagonal")
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.l.nrows();
        let linv = self
            .l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("cholesky factor has a positive diagonal");
        linv.transpose() * linv
    }

    /// `L⁻¹ · m`.
    pub fn solve_lower(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.l
            .solve_lower_triangular(m)
            .expect("cholesky factor has a positive diagonal")
    }
}

/// Thin QR of a tall design with a column-dependence check.
#[derive(Debug, Clone)]
pub struct Qr {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl Qr {
    /// Fails with the index of the first column that lies (numerically) in
    /// the span of the columns before it.
    pub fn new(x: &DMatrix<f64>) -> Result<Self, usize> {
        let qr = x.clone().qr();
        let r = qr.r();
        for j in 0..x.ncols() {
            let norm = x.column(j).norm();
            if norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm {
                return Err(j);
            }
        }
        Ok(Self { q: qr.q(), r })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Least-squares solution for each column of `y`.
    pub fn solve(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let qty = self.q.transpose() * y;
        self.r
            .solve_upper_triangular(&qty)
            .expect("rank checked at construction")
    }

    /// `(X'X)⁻¹ = R⁻¹ R⁻ᵀ`.
    pub fn xtx_inverse(&self) -> DMatrix<f64> {
        let k = self.r.ncols();
        let rinv = self
            .r
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .expect("rank checked at construction");
        &rinv * rinv.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reports_dependent_pivot() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(Cholesky::new(&a).unwrap_err(), 1);
    }

    #[test]
    fn cholesky_inverse_and_det() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let c = Cholesky::new(&a).unwrap();
        assert!((c.ln_det() - 8f64.ln()).abs() < 1e-14);
        let inv = c.inverse();
        let id = &a * inv;
        assert!((id - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn qr_flags_duplicate_column() {
        let x = DMatrix::from_row_slice(
            4,
            3,
            &[
                1.0, 1.0, 2.0, //
                1.0, 2.0, 4.0, //
                1.0, 3.0, 6.0, //
                1.0, 4.0, 8.0,
            ],
        );
        assert_eq!(Qr::new(&x).unwrap_err(), 2);
    }
}
