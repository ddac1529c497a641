//! System descriptions: the delay differential algebraic standard form, the
//! LFT delay form, and block-diagram interconnections.

mod interconnect;
mod lft;

pub use interconnect::{feedback, parallel, series, FeedbackSign};
pub use lft::{lft_to_ddae, LftBlocks, LftDelaySystem};

use crate::error::{Error, Result};
use crate::linalg::{norm1_real, RMat, RRow, RVec};

/// Relative tolerance under which two delays are considered equal and merged.
pub const DELAY_MERGE_TOL: f64 = 1e-12;

/// Default relative rank tolerance used to determine the nullity of `E`.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Reciprocal condition number below which `U^T A0 V` counts as singular.
pub const CAUSALITY_RCOND: f64 = 1e-12;

/// One delayed term `A_i x(t - tau_i)` with `tau_i > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayTerm {
    pub delay: f64,
    pub matrix: RMat,
}

/// SISO delay differential algebraic system
///
/// ```text
/// E x'(t) = A0 x(t) + sum_i A_i x(t - tau_i) + B u(t)
///    y(t) = C x(t)
/// ```
///
/// Delayed terms are kept sorted by strictly increasing positive delay.
#[derive(Clone, Debug, PartialEq)]
pub struct DdaeSystem {
    e: RMat,
    a0: RMat,
    terms: Vec<DelayTerm>,
    b: RVec,
    c: RRow,
}

impl DdaeSystem {
    /// Builds a system from `E`, `A0`, the delayed terms, `B` and `C`.
    ///
    /// Terms with zero delay are folded into `A0`; terms with equal delays
    /// are merged by summing their matrices.
    pub fn new(e: RMat, a0: RMat, terms: Vec<(f64, RMat)>, b: RVec, c: RRow) -> Result<Self> {
        let n = e.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("system order must be at least 1".into()));
        }
        check_shape("E", &e, n, n)?;
        check_shape("A0", &a0, n, n)?;
        if b.len() != n {
            return Err(dim_err("B", format!("{n}x1"), format!("{}x1", b.len())));
        }
        if c.len() != n {
            return Err(dim_err("C", format!("1x{n}"), format!("1x{}", c.len())));
        }
        let finite = e.iter().chain(a0.iter()).chain(b.iter()).chain(c.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("system matrices must be finite".into()));
        }

        let mut a0 = a0;
        let mut sorted: Vec<(f64, RMat)> = Vec::with_capacity(terms.len());
        for (k, (tau, m)) in terms.into_iter().enumerate() {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(Error::InvalidArgument(format!("delay {tau} must be finite and nonnegative")));
            }
            check_shape(&format!("A[{}]", k + 1), &m, n, n)?;
            if !m.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidArgument("system matrices must be finite".into()));
            }
            if tau == 0.0 {
                a0 += m;
            } else {
                sorted.push((tau, m));
            }
        }
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut merged: Vec<DelayTerm> = Vec::with_capacity(sorted.len());
        for (tau, m) in sorted {
            match merged.last_mut() {
                Some(last) if (tau - last.delay).abs() <= DELAY_MERGE_TOL * tau.max(last.delay) => {
                    last.matrix += m;
                }
                _ => merged.push(DelayTerm { delay: tau, matrix: m }),
            }
        }

        Ok(Self { e, a0, terms: merged, b, c })
    }

    /// Builds a system from a list of `(delay, matrix)` pairs that includes the
    /// undelayed term(s) with delay zero.
    pub fn from_terms(e: RMat, terms: Vec<(f64, RMat)>, b: RVec, c: RRow) -> Result<Self> {
        let n = e.nrows();
        Self::new(e, RMat::zeros(n, n), terms, b, c)
    }

    pub fn delay_free(e: RMat, a: RMat, b: RVec, c: RRow) -> Result<Self> {
        Self::new(e, a, Vec::new(), b, c)
    }

    /// State dimension `n`.
    pub fn order(&self) -> usize {
        self.e.nrows()
    }

    pub fn e(&self) -> &RMat {
        &self.e
    }

    pub fn a0(&self) -> &RMat {
        &self.a0
    }

    pub fn b(&self) -> &RVec {
        &self.b
    }

    pub fn c(&self) -> &RRow {
        &self.c
    }

    pub fn terms(&self) -> &[DelayTerm] {
        &self.terms
    }

    /// Number of delayed terms `m`.
    pub fn num_delays(&self) -> usize {
        self.terms.len()
    }

    pub fn delays(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.delay).collect()
    }

    pub fn max_delay(&self) -> f64 {
        self.terms.last().map_or(0.0, |t| t.delay)
    }

    /// Indices of state components that appear delayed in some `A_i`, `i >= 1`.
    pub fn delayed_components(&self) -> Vec<usize> {
        (0..self.order()).filter(|&j| self.terms.iter().any(|t| t.matrix.column(j).iter().any(|&x| x != 0.0))).collect()
    }
}

pub(crate) fn check_shape(block: &str, m: &RMat, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(dim_err(block, format!("{rows}x{cols}"), format!("{}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

pub(crate) fn dim_err(block: &str, expected: String, actual: String) -> Error {
    Error::Dimension { block: block.to_string(), expected, actual }
}

/// Orthonormal bases of the left and right null spaces of `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct NullspaceBases {
    /// Nullity `n - rank(E)`.
    pub nu: usize,
    /// `n x nu`, spans the left null space: `U^T E = 0`.
    pub u: RMat,
    /// `n x nu`, spans the right null space: `E V = 0`.
    pub v: RMat,
}

/// Computes the null-space bases of `E` from its singular value decomposition.
///
/// Singular values below `rank_tol * sigma_max` (or `rank_tol` when `E = 0`)
/// are treated as zero. A completely singular `E` is rejected.
pub fn nullspace_bases(sys: &DdaeSystem, rank_tol: f64) -> Result<NullspaceBases> {
    let n = sys.order();
    let e = sys.e();
    let svd = e.clone().svd(true, true);
    let u_full = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let threshold = rank_tol * if smax > 0.0 { smax } else { 1.0 };
    let null_idx: Vec<usize> = (0..n).filter(|&i| sv[i] < threshold).collect();
    let nu = null_idx.len();
    if nu == n {
        return Err(Error::InvalidArgument("E has rank zero; at least one differential state is required".into()));
    }
    let mut u = RMat::zeros(n, nu);
    let mut v = RMat::zeros(n, nu);
    for (k, &i) in null_idx.iter().enumerate() {
        u.set_column(k, &u_full.column(i));
        v.set_column(k, &v_t.row(i).transpose());
    }
    Ok(NullspaceBases { nu, u, v })
}

/// Outcome of the causality check on `U^T A0 V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CausalityCheck {
    pub causal: bool,
    /// Reciprocal 1-norm condition number of `U^T A0 V` (1 when `nu = 0`).
    pub rcond: f64,
}

pub fn check_causality(sys: &DdaeSystem, bases: &NullspaceBases) -> CausalityCheck {
    if bases.nu == 0 {
        return CausalityCheck { causal: true, rcond: 1.0 };
    }
    let m = bases.u.transpose() * sys.a0() * &bases.v;
    let rcond = real_rcond(&m);
    CausalityCheck { causal: rcond > CAUSALITY_RCOND, rcond }
}

pub(crate) fn real_rcond(m: &RMat) -> f64 {
    let anorm = norm1_real(m);
    if anorm == 0.0 {
        return 0.0;
    }
    match m.clone().try_inverse() {
        Some(inv) => {
            let r = 1.0 / (anorm * norm1_real(&inv));
            if r.is_finite() {
                r
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::tsh_system;

    fn diag(v: &[f64]) -> RMat {
        RMat::from_diagonal(&RVec::from_row_slice(v))
    }

    #[test]
    fn duplicate_delays_are_merged_and_sorted() {
        let n = 2;
        let a = |x: f64| RMat::from_element(n, n, x);
        let sys = DdaeSystem::new(
            RMat::identity(n, n),
            a(-3.0),
            vec![(2.0, a(1.0)), (1.0, a(0.5)), (2.0 + 1e-14, a(0.25)), (0.0, a(1.0))],
            RVec::from_element(n, 1.0),
            RRow::from_element(n, 1.0),
        )
        .unwrap();
        assert_eq!(sys.delays(), vec![1.0, 2.0]);
        assert_eq!(sys.terms()[1].matrix[(0, 0)], 1.25);
        assert_eq!(sys.a0()[(0, 0)], -2.0);
    }

    #[test]
    fn rejects_negative_delay_and_bad_shapes() {
        let e = RMat::identity(1, 1);
        let r = DdaeSystem::new(e.clone(), e.clone(), vec![(-1.0, e.clone())], RVec::from_element(1, 1.0), RRow::from_element(1, 1.0));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let r = DdaeSystem::new(e.clone(), RMat::identity(2, 2), vec![], RVec::from_element(1, 1.0), RRow::from_element(1, 1.0));
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }

    #[test]
    fn nullspace_of_coordinate_singular_e() {
        let sys =
            DdaeSystem::delay_free(diag(&[1.0, 1.0, 0.0]), -RMat::identity(3, 3), RVec::from_element(3, 1.0), RRow::from_element(3, 1.0)).unwrap();
        let nb = nullspace_bases(&sys, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(nb.nu, 1);
        assert!((nb.u[(2, 0)].abs() - 1.0).abs() < 1e-14);
        assert!((nb.v[(2, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nonsingular_e_has_empty_bases() {
        let sys = DdaeSystem::delay_free(diag(&[2.0, 3.0]), -RMat::identity(2, 2), RVec::from_element(2, 1.0), RRow::from_element(2, 1.0)).unwrap();
        let nb = nullspace_bases(&sys, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(nb.nu, 0);
        assert_eq!(nb.u.shape(), (2, 0));
        let cc = check_causality(&sys, &nb);
        assert!(cc.causal);
        assert_eq!(cc.rcond, 1.0);
    }

    #[test]
    fn zero_e_is_rejected() {
        let sys = DdaeSystem::delay_free(RMat::zeros(2, 2), -RMat::identity(2, 2), RVec::from_element(2, 1.0), RRow::from_element(2, 1.0)).unwrap();
        assert!(nullspace_bases(&sys, DEFAULT_RANK_TOL).is_err());
    }

    #[test]
    fn tsh_is_causal() {
        let sys = tsh_system();
        let nb = nullspace_bases(&sys, DEFAULT_RANK_TOL).unwrap();
        let cc = check_causality(&sys, &nb);
        assert!(cc.causal);
        // U^T A0 V = -1 up to the sign of the bases
        let m = nb.u.transpose() * sys.a0() * &nb.v;
        assert!((m[(0, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zeroed_algebraic_block_is_not_causal() {
        let sys = tsh_system();
        let mut a0 = sys.a0().clone();
        a0[(1, 1)] = 0.0;
        let terms = sys.terms().iter().map(|t| (t.delay, t.matrix.clone())).collect();
        let broken = DdaeSystem::new(sys.e().clone(), a0, terms, sys.b().clone(), sys.c().clone()).unwrap();
        let nb = nullspace_bases(&broken, DEFAULT_RANK_TOL).unwrap();
        assert!(!check_causality(&broken, &nb).causal);
    }
}
