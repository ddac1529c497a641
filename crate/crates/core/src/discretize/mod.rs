//! Rational approximation of a DDAE by spectral collocation of the delay
//! segment, and the pencil machinery built on top of it.

pub mod chebyshev;
mod gevp;
mod zpk;

pub use gevp::{solve_gevp, solve_gevp_real, GevpOptions, DEFAULT_BETA_TOL, DEFAULT_INFINITE_CAP};
pub use zpk::{to_zpk, ZpkForm, CANCEL_TOL};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{complexify, complexify_vec, Factored, RMat, RRow, RVec};
use crate::model::{check_shape, dim_err, DdaeSystem};

pub const DEFAULT_N: usize = 20;

/// `G_N(s) = C_N (s E_N - A_N)^{-1} B_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorRealization {
    e: RMat,
    a: RMat,
    b: RVec,
    c: RRow,
}

impl DescriptorRealization {
    pub fn new(e: RMat, a: RMat, b: RVec, c: RRow) -> Result<Self> {
        let n = e.nrows();
        check_shape("E_N", &e, n, n)?;
        check_shape("A_N", &a, n, n)?;
        if b.len() != n {
            return Err(dim_err("B_N", format!("{n}x1"), format!("{}x1", b.len())));
        }
        if c.len() != n {
            return Err(dim_err("C_N", format!("1x{n}"), format!("1x{}", c.len())));
        }
        Ok(Self { e, a, b, c })
    }

    pub fn order(&self) -> usize {
        self.e.nrows()
    }

    pub fn e(&self) -> &RMat {
        &self.e
    }

    pub fn a(&self) -> &RMat {
        &self.a
    }

    pub fn b(&self) -> &RVec {
        &self.b
    }

    pub fn c(&self) -> &RRow {
        &self.c
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let mut m = -complexify(&self.a);
        m.zip_apply(&self.e, |acc, e| *acc += s * e);
        let f = Factored::new(m);
        if f.is_singular() {
            return Err(Error::PoleProximity { s, rcond: f.rcond() });
        }
        let x = f.solve(&complexify_vec(&self.b));
        Ok(self.c.iter().zip(x.iter()).map(|(c, x)| x * *c).sum())
    }
}

impl From<&DdaeSystem> for DescriptorRealization {
    /// The delay-free part `(E, A0, B, C)`.
    fn from(sys: &DdaeSystem) -> Self {
        Self { e: sys.e().clone(), a: sys.a0().clone(), b: sys.b().clone(), c: sys.c().clone() }
    }
}

/// Which state components carry a discretized history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HistoryComponents {
    /// Every component, order `n (N + 1)`.
    All,
    /// Only components that some delay matrix acts on, order `n + d N`.
    /// The omitted histories never feed back, so `G_N` is unchanged.
    #[default]
    Delayed,
}

/// Full collocation of order `n (N + 1)`.
pub fn spectral_discretize(sys: &DdaeSystem, n_cheb: usize) -> Result<DescriptorRealization> {
    discretize_with(sys, n_cheb, HistoryComponents::All)
}

pub fn discretize_with(sys: &DdaeSystem, n_cheb: usize, which: HistoryComponents) -> Result<DescriptorRealization> {
    if n_cheb == 0 {
        return Err(Error::InvalidArgument("the number of Chebyshev intervals N must be positive".into()));
    }
    if sys.num_delays() == 0 {
        return Ok(DescriptorRealization::from(sys));
    }
    let n = sys.order();
    let comps: Vec<usize> = match which {
        HistoryComponents::All => (0..n).collect(),
        HistoryComponents::Delayed => sys.delayed_components(),
    };
    let d = comps.len();
    let size = n + d * n_cheb;
    let tau_max = sys.max_delay();
    let nodes = chebyshev::scaled_points(n_cheb, tau_max);
    let weights = chebyshev::barycentric_weights(n_cheb);
    let diff = chebyshev::differentiation_matrix(n_cheb) * (2.0 / tau_max);
    // column of component comps[k] at node j
    let col = |j: usize, k: usize| if j == 0 { comps[k] } else { n + (j - 1) * d + k };

    let mut e = RMat::zeros(size, size);
    let mut a = RMat::zeros(size, size);
    e.view_mut((0, 0), (n, n)).copy_from(sys.e());
    a.view_mut((0, 0), (n, n)).copy_from(sys.a0());
    for t in sys.terms() {
        let l = chebyshev::lagrange_row(&nodes, &weights, -t.delay);
        for (j, &lj) in l.iter().enumerate() {
            if lj == 0.0 {
                continue;
            }
            for (k, &comp) in comps.iter().enumerate() {
                let target = col(j, k);
                for r in 0..n {
                    a[(r, target)] += lj * t.matrix[(r, comp)];
                }
            }
        }
    }
    for i in 1..=n_cheb {
        for k in 0..d {
            let r = n + (i - 1) * d + k;
            e[(r, r)] = 1.0;
            for j in 0..=n_cheb {
                a[(r, col(j, k))] += diff[(i, j)];
            }
        }
    }
    let mut b = RVec::zeros(size);
    b.rows_mut(0, n).copy_from(sys.b());
    let mut c = RRow::zeros(size);
    c.columns_mut(0, n).copy_from(sys.c());
    DescriptorRealization::new(e, a, b, c)
}
