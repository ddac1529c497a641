//! Frequency-domain evaluation of a DDAE: the delay pencil, the transfer
//! function and its derivative, the extremum function `Z`, and the
//! asymptotic transfer function.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{blkdiag, complexify, complexify_vec, CMat, CVec, Factored, RMat, RRow, RVec};
use crate::model::{real_rcond, DdaeSystem, NullspaceBases};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `A(s) = A0 + sum_i A_i e^{-s tau_i}` and its derivative with respect to `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct PencilValue {
    pub value: CMat,
    pub derivative: CMat,
}

pub fn pencil(sys: &DdaeSystem, s: Complex64) -> PencilValue {
    PencilValue { value: delay_matrix(sys, s), derivative: delay_matrix_derivative(sys, s, 1) }
}

pub(crate) fn delay_matrix(sys: &DdaeSystem, s: Complex64) -> CMat {
    let mut m = complexify(sys.a0());
    for t in sys.terms() {
        let w = (-s * t.delay).exp();
        m.zip_apply(&t.matrix, |acc, a| *acc += w * a);
    }
    m
}

/// `k`-th derivative of `A(s)` for `k >= 1`: `sum_i (-tau_i)^k A_i e^{-s tau_i}`.
pub(crate) fn delay_matrix_derivative(sys: &DdaeSystem, s: Complex64, k: i32) -> CMat {
    let n = sys.order();
    let mut m = CMat::zeros(n, n);
    for t in sys.terms() {
        let w = (-s * t.delay).exp() * (-t.delay).powi(k);
        m.zip_apply(&t.matrix, |acc, a| *acc += w * a);
    }
    m
}

/// `sE - A(s)`.
pub(crate) fn characteristic_matrix(sys: &DdaeSystem, s: Complex64) -> CMat {
    let mut m = -delay_matrix(sys, s);
    m.zip_apply(sys.e(), |acc, e| *acc += s * e);
    m
}

fn factor_at(sys: &DdaeSystem, s: Complex64) -> Result<Factored> {
    let f = Factored::new(characteristic_matrix(sys, s));
    if f.is_singular() {
        return Err(Error::PoleProximity { s, rcond: f.rcond() });
    }
    Ok(f)
}

fn dot_row(c: &RRow, x: &CVec) -> Complex64 {
    c.iter().zip(x.iter()).fold(ZERO, |acc, (ci, xi)| acc + xi * *ci)
}

/// `G(s) = C (sE - A(s))^{-1} B`.
pub fn eval_transfer(sys: &DdaeSystem, s: Complex64) -> Result<Complex64> {
    let f = factor_at(sys, s)?;
    Ok(dot_row(sys.c(), &f.solve(&complexify_vec(sys.b()))))
}

/// `G'(s) = -C (sE - A)^{-1} (E - A'(s)) (sE - A)^{-1} B`, two solves with one factorization.
pub fn eval_transfer_derivative(sys: &DdaeSystem, s: Complex64) -> Result<Complex64> {
    eval_transfer_and_derivative(sys, s).map(|(_, d)| d)
}

pub fn eval_transfer_and_derivative(sys: &DdaeSystem, s: Complex64) -> Result<(Complex64, Complex64)> {
    let f = factor_at(sys, s)?;
    let x = f.solve(&complexify_vec(sys.b()));
    let g = dot_row(sys.c(), &x);
    let k = complexify(sys.e()) - delay_matrix_derivative(sys, s, 1);
    let y = f.solve(&(k * x));
    Ok((g, -dot_row(sys.c(), &y)))
}

/// `Z(s) = G'(s) G(-s) - G'(-s) G(s)`. Its imaginary-axis zeros are the
/// stationary points of `|G(jw)|`.
pub fn eval_z(sys: &DdaeSystem, s: Complex64) -> Result<Complex64> {
    let (g_p, dg_p) = eval_transfer_and_derivative(sys, s)?;
    let (g_m, dg_m) = eval_transfer_and_derivative(sys, -s)?;
    Ok(dg_p * g_m - dg_m * g_p)
}

/// State-space-like realization `Z(s) = C_z (s E_z - A_z(s))^{-1} B_z` of
/// dimension `6n`.
///
/// With `E_z = blkdiag(-E, E, E, -E, E, E)` the first `3n` block realizes
/// `G'(s) G(-s)` and the second block, built from `-𝒜_z(-s)`, realizes
/// `-G'(-s) G(s)`.
#[derive(Clone, Debug)]
pub struct ZssRealization {
    sys: DdaeSystem,
    e_z: RMat,
    b_z: RVec,
    c_z: RRow,
}

impl ZssRealization {
    pub fn build(sys: &DdaeSystem) -> Self {
        let n = sys.order();
        let e = sys.e();
        let neg = -e.clone();
        let e_z = blkdiag(&[&neg, e, e, &neg, e, e]);
        let mut b_z = RVec::zeros(6 * n);
        b_z.rows_mut(0, n).copy_from(sys.b());
        b_z.rows_mut(3 * n, n).copy_from(sys.b());
        let mut c_z = RRow::zeros(6 * n);
        c_z.columns_mut(n, n).copy_from(sys.c());
        c_z.columns_mut(4 * n, n).copy_from(sys.c());
        Self { sys: sys.clone(), e_z, b_z, c_z }
    }

    pub fn e_z(&self) -> &RMat {
        &self.e_z
    }

    pub fn b_z(&self) -> &RVec {
        &self.b_z
    }

    pub fn c_z(&self) -> &RRow {
        &self.c_z
    }

    /// The `3n x 3n` block `[[A(-s), 0, 0], [0, A(s), A'(s) - E], [BC, 0, A(s)]]`.
    pub fn half_block(&self, s: Complex64) -> CMat {
        let n = self.sys.order();
        let mut m = CMat::zeros(3 * n, 3 * n);
        let a_minus = delay_matrix(&self.sys, -s);
        let a_plus = delay_matrix(&self.sys, s);
        let coupling = delay_matrix_derivative(&self.sys, s, 1) - complexify(self.sys.e());
        let bc = complexify(&(self.sys.b() * self.sys.c()));
        m.view_mut((0, 0), (n, n)).copy_from(&a_minus);
        m.view_mut((n, n), (n, n)).copy_from(&a_plus);
        m.view_mut((n, 2 * n), (n, n)).copy_from(&coupling);
        m.view_mut((2 * n, 0), (n, n)).copy_from(&bc);
        m.view_mut((2 * n, 2 * n), (n, n)).copy_from(&a_plus);
        m
    }

    /// `A_z(s) = blkdiag(𝒜_z(s), -𝒜_z(-s))`.
    pub fn a_z(&self, s: Complex64) -> CMat {
        let first = self.half_block(s);
        let second = -self.half_block(-s);
        crate::linalg::blkdiag_complex(&[&first, &second])
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let mut m = -self.a_z(s);
        m.zip_apply(&self.e_z, |acc, e| *acc += s * e);
        let f = Factored::new(m);
        if f.is_singular() {
            return Err(Error::PoleProximity { s, rcond: f.rcond() });
        }
        Ok(dot_row(&self.c_z, &f.solve(&complexify_vec(&self.b_z))))
    }
}

/// Argument of the asymptotic transfer function.
#[derive(Clone, Copy, Debug)]
pub enum GaArgument<'a> {
    /// Evaluate at a complex frequency, using `e^{-s tau_i}`.
    Frequency(Complex64),
    /// Evaluate on the delay-angle torus, substituting `e^{j theta_i}`.
    Angles(&'a [f64]),
}

/// The asymptotic transfer function projected onto the null spaces of `E`:
/// `G_a = -CV (U^T A0 V + sum_i U^T A_i V x_i)^{-1} U^T B`.
#[derive(Clone, Debug)]
pub struct AsymptoticSystem {
    m0: RMat,
    mi: Vec<RMat>,
    delays: Vec<f64>,
    cv: RRow,
    ub: RVec,
}

impl AsymptoticSystem {
    pub fn new(sys: &DdaeSystem, bases: &NullspaceBases) -> Self {
        let ut = bases.u.transpose();
        Self {
            m0: &ut * sys.a0() * &bases.v,
            mi: sys.terms().iter().map(|t| &ut * &t.matrix * &bases.v).collect(),
            delays: sys.delays(),
            cv: sys.c() * &bases.v,
            ub: &ut * sys.b(),
        }
    }

    /// Nullity of `E`.
    pub fn nu(&self) -> usize {
        self.m0.nrows()
    }

    /// Projected delay matrices `U^T A_i V`, `i = 1..m`.
    pub fn projected_terms(&self) -> &[RMat] {
        &self.mi
    }

    pub fn projected_a0(&self) -> &RMat {
        &self.m0
    }

    /// Evaluates with explicit multipliers `x_i` for each delayed term.
    pub fn eval_multipliers(&self, mult: &[Complex64]) -> Option<Complex64> {
        if self.nu() == 0 {
            return Some(ZERO);
        }
        let mut m = complexify(&self.m0);
        for (mi, &x) in self.mi.iter().zip(mult) {
            m.zip_apply(mi, |acc, a| *acc += x * a);
        }
        let f = Factored::new(m);
        if f.is_singular() {
            return None;
        }
        Some(-dot_row(&self.cv, &f.solve(&complexify_vec(&self.ub))))
    }

    /// `|G_a|` on the torus, with angles given for every delayed term.
    pub fn eval_angles(&self, theta: &[f64]) -> Result<Complex64> {
        let mult: Vec<Complex64> = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        self.eval_multipliers(&mult).ok_or_else(|| Error::AsymptoticUnbounded { theta: theta.to_vec() })
    }

    pub fn eval_frequency(&self, s: Complex64) -> Result<Complex64> {
        let mult: Vec<Complex64> = self.delays.iter().map(|&t| (-s * t).exp()).collect();
        self.eval_multipliers(&mult)
            .ok_or_else(|| Error::AsymptoticUnbounded { theta: mult.iter().map(|x| x.arg().rem_euclid(std::f64::consts::TAU)).collect() })
    }

    /// Reciprocal condition number of `U^T A0 V`.
    pub fn rcond_a0(&self) -> f64 {
        if self.nu() == 0 {
            1.0
        } else {
            real_rcond(&self.m0)
        }
    }
}

pub fn eval_ga(sys: &DdaeSystem, bases: &NullspaceBases, arg: GaArgument<'_>) -> Result<Complex64> {
    let asym = AsymptoticSystem::new(sys, bases);
    match arg {
        GaArgument::Frequency(s) => asym.eval_frequency(s),
        GaArgument::Angles(theta) => {
            if theta.len() != sys.num_delays() {
                return Err(Error::InvalidArgument(format!("expected {} angles, got {}", sys.num_delays(), theta.len())));
            }
            asym.eval_angles(theta)
        }
    }
}
