//! Candidate frequencies from the logarithmic derivative of the rational
//! approximation.

use num_complex::Complex64;

use crate::discretize::{solve_gevp, GevpOptions, ZpkForm};
use crate::error::{Error, Result};
use crate::linalg::CMat;

pub const DEFAULT_AXIS_TOL: f64 = 1e-6;
/// Zeros this close to the axis (relative) bypass `Delta`.
pub const AXIS_ZERO_TOL: f64 = 1e-8;
/// Poles this close to the axis (relative) violate stability.
pub const AXIS_POLE_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-8;

/// Diagonal realization of
/// `Delta(s) = sum_i (1/(s + z_i*) + 1/(s - z_i)) - sum_k (1/(s + p_k*) + 1/(s - p_k))`
/// with `B = 1` and `C = +-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaRealization {
    pub a: Vec<Complex64>,
    pub c: Vec<f64>,
    /// `|Im z|` of zeros left out because they lie on the imaginary axis.
    pub axis_zeros: Vec<f64>,
}

impl DeltaRealization {
    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Size of the pencil whose eigenvalues are the zeros of `Delta`.
    pub fn pencil_size(&self) -> usize {
        self.order() + 1
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.a.iter().zip(&self.c).map(|(a, c)| *c / (s - a)).sum()
    }

    /// `([[A, B], [C, 0]], blkdiag(I, 0))`.
    pub fn pencil(&self) -> (CMat, CMat) {
        let m = self.order();
        let one = Complex64::new(1.0, 0.0);
        let mut a = CMat::zeros(m + 1, m + 1);
        let mut e = CMat::zeros(m + 1, m + 1);
        for (i, (ai, ci)) in self.a.iter().zip(&self.c).enumerate() {
            a[(i, i)] = *ai;
            a[(i, m)] = one;
            a[(m, i)] = Complex64::new(*ci, 0.0);
            e[(i, i)] = one;
        }
        (a, e)
    }
}

pub fn build_delta(zpk: &ZpkForm) -> Result<DeltaRealization> {
    if let Some(p) = zpk.poles.iter().find(|p| p.re.abs() <= AXIS_POLE_TOL * (1.0 + p.norm())) {
        return Err(Error::StabilityViolation { pole: *p });
    }
    let mut a = Vec::with_capacity(2 * (zpk.zeros.len() + zpk.poles.len()));
    let mut c = Vec::with_capacity(a.capacity());
    let mut axis_zeros = Vec::new();
    for z in &zpk.zeros {
        if z.re.abs() <= AXIS_ZERO_TOL * (1.0 + z.norm()) {
            axis_zeros.push(z.im.abs());
            continue;
        }
        a.extend([-z.conj(), *z]);
        c.extend([1.0, 1.0]);
    }
    for p in &zpk.poles {
        a.extend([-p.conj(), *p]);
        c.extend([-1.0, -1.0]);
    }
    sort_dedup(&mut axis_zeros);
    Ok(DeltaRealization { a, c, axis_zeros })
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|b, a| (*b - *a).abs() <= DEDUP_TOL * (1.0 + a.abs().max(b.abs())));
}

/// Imaginary-axis zeros `j w` of `Delta`, as sorted `w >= 0`. Always contains 0.
pub fn predict_frequencies(delta: &DeltaRealization, axis_tol: f64) -> Result<Vec<f64>> {
    let (a, e) = delta.pencil();
    let eig = solve_gevp(&a, &e, GevpOptions::default())?;
    let mut omegas: Vec<f64> = eig.iter().filter(|l| l.re.abs() <= axis_tol * (1.0 + l.norm())).map(|l| l.im.abs()).collect();
    omegas.push(0.0);
    sort_dedup(&mut omegas);
    Ok(omegas)
}
