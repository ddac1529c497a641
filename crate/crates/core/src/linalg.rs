//! Dense complex linear algebra shared by the evaluators.

use nalgebra::{DMatrix, DVector, Dyn, RowDVector, LU};
use num_complex::Complex64;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RVec = DVector<f64>;
pub type RRow = RowDVector<f64>;

/// Reciprocal condition threshold below which a matrix is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-14;

pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn complexify_vec(v: &RVec) -> CVec {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &CMat) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn norm1_real(m: &RMat) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// LU factorization with partial pivoting plus the reciprocal 1-norm
/// condition number of the factored matrix.
pub struct Factored {
    lu: LU<Complex64, Dyn, Dyn>,
    rcond: f64,
}

impl Factored {
    pub fn new(m: CMat) -> Self {
        let anorm = norm1(&m);
        let lu = m.lu();
        let rcond = if anorm == 0.0 {
            0.0
        } else {
            match lu.try_inverse() {
                Some(inv) => {
                    let inorm = norm1(&inv);
                    if inorm.is_finite() && inorm > 0.0 {
                        1.0 / (anorm * inorm)
                    } else {
                        0.0
                    }
                }
                None => 0.0,
            }
        };
        Self { lu, rcond }
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn is_singular(&self) -> bool {
        !(self.rcond >= SINGULAR_RCOND)
    }

    pub fn solve(&self, rhs: &CVec) -> CVec {
        self.lu.solve(rhs).unwrap_or_else(|| CVec::from_element(rhs.len(), Complex64::new(f64::NAN, f64::NAN)))
    }
}

/// Smallest singular value of a square complex matrix and its right singular
/// vector, normalized to unit 2-norm.
pub fn smallest_singular_pair(m: &CMat) -> (f64, CVec) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (idx, sigma) = svd.singular_values.iter().copied().enumerate().fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
    let v: CVec = v_t.row(idx).adjoint();
    let nrm = v.norm();
    (sigma, v / Complex64::new(nrm, 0.0))
}

pub fn smallest_singular_value(m: &CMat) -> f64 {
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Block-diagonal concatenation of real matrices.
pub fn blkdiag(blocks: &[&RMat]) -> RMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = RMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn blkdiag_complex(blocks: &[&CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}
