use super::DdaeSystem;
use crate::error::Result;
use crate::linalg::{blkdiag, RMat, RRow, RVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeedbackSign {
    /// `u - G2 y` enters `G1`: closed loop `G1 / (1 + G2 G1)`.
    Negative,
    /// `u + G2 y` enters `G1`: closed loop `G1 / (1 - G2 G1)`.
    Positive,
}

impl FeedbackSign {
    pub fn value(self) -> f64 {
        match self {
            FeedbackSign::Negative => -1.0,
            FeedbackSign::Positive => 1.0,
        }
    }
}

/// Lifts every delayed term of `g` into the `n x n` state space at `offset`.
fn embedded_terms(g: &DdaeSystem, n: usize, offset: usize) -> impl Iterator<Item = (f64, RMat)> + '_ {
    g.terms().iter().map(move |t| {
        let mut m = RMat::zeros(n, n);
        m.view_mut((offset, offset), t.matrix.shape()).copy_from(&t.matrix);
        (t.delay, m)
    })
}

fn embed(m: &RMat, n: usize, offset: usize) -> RMat {
    let mut out = RMat::zeros(n, n);
    out.view_mut((offset, offset), m.shape()).copy_from(m);
    out
}

/// Series connection: `u -> g1 -> g2 -> y`, transfer `G2 G1`.
pub fn series(g1: &DdaeSystem, g2: &DdaeSystem) -> Result<DdaeSystem> {
    let (n1, n2) = (g1.order(), g2.order());
    let n = n1 + n2;
    let e = blkdiag(&[g1.e(), g2.e()]);
    let mut a0 = blkdiag(&[g1.a0(), g2.a0()]);
    a0.view_mut((n1, 0), (n2, n1)).copy_from(&(g2.b() * g1.c()));
    let terms = embedded_terms(g1, n, 0).chain(embedded_terms(g2, n, n1)).collect();
    let mut b = RVec::zeros(n);
    b.rows_mut(0, n1).copy_from(g1.b());
    let mut c = RRow::zeros(n);
    c.columns_mut(n1, n2).copy_from(g2.c());
    DdaeSystem::new(e, a0, terms, b, c)
}

/// Parallel connection, transfer `G1 + G2`.
pub fn parallel(g1: &DdaeSystem, g2: &DdaeSystem) -> Result<DdaeSystem> {
    let (n1, n2) = (g1.order(), g2.order());
    let n = n1 + n2;
    let e = blkdiag(&[g1.e(), g2.e()]);
    let a0 = blkdiag(&[g1.a0(), g2.a0()]);
    let terms = embedded_terms(g1, n, 0).chain(embedded_terms(g2, n, n1)).collect();
    let mut b = RVec::zeros(n);
    b.rows_mut(0, n1).copy_from(g1.b());
    b.rows_mut(n1, n2).copy_from(g2.b());
    let mut c = RRow::zeros(n);
    c.columns_mut(0, n1).copy_from(g1.c());
    c.columns_mut(n1, n2).copy_from(g2.c());
    DdaeSystem::new(e, a0, terms, b, c)
}

/// Feedback connection with `g1` in the forward path and `g2` in the return
/// path. The loop signal `e = u + sign * y2` is kept as an extra algebraic
/// state, so no matrix is inverted.
pub fn feedback(g1: &DdaeSystem, g2: &DdaeSystem, sign: FeedbackSign) -> Result<DdaeSystem> {
    let (n1, n2) = (g1.order(), g2.order());
    let n = n1 + n2 + 1;
    let le = n1 + n2;
    let e = blkdiag(&[g1.e(), g2.e(), &RMat::zeros(1, 1)]);
    let mut a0 = embed(g1.a0(), n, 0) + embed(g2.a0(), n, n1);
    a0.view_mut((0, le), (n1, 1)).copy_from(g1.b());
    a0.view_mut((n1, 0), (n2, n1)).copy_from(&(g2.b() * g1.c()));
    a0.view_mut((le, n1), (1, n2)).copy_from(&(g2.c() * sign.value()));
    a0[(le, le)] = -1.0;
    let terms = embedded_terms(g1, n, 0).chain(embedded_terms(g2, n, n1)).collect();
    let mut b = RVec::zeros(n);
    b[le] = 1.0;
    let mut c = RRow::zeros(n);
    c.columns_mut(0, n1).copy_from(g1.c());
    DdaeSystem::new(e, a0, terms, b, c)
}
