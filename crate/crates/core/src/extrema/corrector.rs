//! Newton-type refinement of predicted extremum points on the exact
//! delay system.

use num_complex::Complex64;

use super::{ExtremumKind, ExtremumPoint};
use crate::linalg::{complexify, smallest_singular_pair, CMat, CVec, RMat, RVec};
use crate::model::DdaeSystem;
use crate::transfer::{delay_matrix, delay_matrix_derivative, eval_transfer, eval_z};

const J: Complex64 = Complex64::new(0.0, 1.0);
/// Below this magnitude a predicted point is taken as a minimum as is.
pub const TINY_XI: f64 = 1e-12;
const MAX_HALVINGS: usize = 20;
const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectorOptions {
    /// Residual tolerance; `None` means `1e-10 (1 + xi)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for CorrectorOptions {
    fn default() -> Self {
        Self { tol: None, max_iter: 50 }
    }
}

impl CorrectorOptions {
    pub fn tol_for(&self, xi: f64) -> f64 {
        self.tol.unwrap_or(1e-10 * (1.0 + xi.abs()))
    }
}

/// `[[jwE - A(jw), -B B^T / xi], [C^T C / xi, jw E^T + A^T(-jw)]]`.
pub fn build_h(sys: &DdaeSystem, omega: f64, xi: f64) -> CMat {
    let n = sys.order();
    let s = Complex64::new(0.0, omega);
    let e = complexify(sys.e());
    let top = &e * s - delay_matrix(sys, s);
    let bottom = e.transpose() * s + delay_matrix(sys, -s).transpose();
    let bb = complexify(&(sys.b() * sys.b().transpose())) / Complex64::new(-xi, 0.0);
    let cc = complexify(&(sys.c().transpose() * sys.c())) / Complex64::new(xi, 0.0);
    let mut h = CMat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&top);
    h.view_mut((0, n), (n, n)).copy_from(&bb);
    h.view_mut((n, 0), (n, n)).copy_from(&cc);
    h.view_mut((n, n), (n, n)).copy_from(&bottom);
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectorState {
    pub omega: f64,
    pub xi: f64,
    pub u: CVec,
    pub v: CVec,
    /// Frozen normalization vector: `q^* [u; v] = 1`.
    pub q: CVec,
}

impl CorrectorState {
    fn z(&self) -> CVec {
        let n = self.u.len();
        let mut z = CVec::zeros(2 * n);
        z.rows_mut(0, n).copy_from(&self.u);
        z.rows_mut(n, n).copy_from(&self.v);
        z
    }

    /// Real unknowns `[w, xi, Re u, Im u, Re v, Im v]`.
    pub fn to_unknowns(&self) -> RVec {
        let n = self.u.len();
        let mut x = RVec::zeros(4 * n + 2);
        x[0] = self.omega;
        x[1] = self.xi;
        for k in 0..n {
            x[2 + k] = self.u[k].re;
            x[2 + n + k] = self.u[k].im;
            x[2 + 2 * n + k] = self.v[k].re;
            x[2 + 3 * n + k] = self.v[k].im;
        }
        x
    }

    pub fn from_unknowns(x: &RVec, q: CVec) -> Self {
        let n = (x.len() - 2) / 4;
        let u = CVec::from_fn(n, |k, _| Complex64::new(x[2 + k], x[2 + n + k]));
        let v = CVec::from_fn(n, |k, _| Complex64::new(x[2 + 2 * n + k], x[2 + 3 * n + k]));
        Self { omega: x[0], xi: x[1], u, v, q }
    }
}

/// `E - A'(jw)`.
fn k_matrix(sys: &DdaeSystem, s: Complex64) -> CMat {
    complexify(sys.e()) - delay_matrix_derivative(sys, s, 1)
}

/// `[Re Hz; Im Hz; Im(v^* (E - A'(jw)) u); Re(q^* z) - 1; Im(q^* z)]`, length `4n + 3`.
pub fn corrector_residual(sys: &DdaeSystem, st: &CorrectorState) -> RVec {
    let n = sys.order();
    let z = st.z();
    let hz = build_h(sys, st.omega, st.xi) * &z;
    let s = Complex64::new(0.0, st.omega);
    let f = st.v.dotc(&(k_matrix(sys, s) * &st.u)).im;
    let qz = st.q.dotc(&z);
    let mut r = RVec::zeros(4 * n + 3);
    for i in 0..2 * n {
        r[i] = hz[i].re;
        r[2 * n + i] = hz[i].im;
    }
    r[4 * n] = f;
    r[4 * n + 1] = qz.re - 1.0;
    r[4 * n + 2] = qz.im;
    r
}

/// Analytic Jacobian of [`corrector_residual`] with respect to [`CorrectorState::to_unknowns`].
pub fn corrector_jacobian(sys: &DdaeSystem, st: &CorrectorState) -> RMat {
    let n = sys.order();
    let s = Complex64::new(0.0, st.omega);
    let h = build_h(sys, st.omega, st.xi);
    let k_plus = k_matrix(sys, s);
    let k_minus = k_matrix(sys, -s);
    let b = crate::linalg::complexify_vec(sys.b());
    let ct: CVec = crate::linalg::complexify_vec(&sys.c().transpose());
    let xi2 = st.xi * st.xi;

    // complex columns of d(Hz)
    let mut d_omega = CVec::zeros(2 * n);
    d_omega.rows_mut(0, n).copy_from(&((&k_plus * &st.u) * J));
    d_omega.rows_mut(n, n).copy_from(&((k_minus.transpose() * &st.v) * J));
    let mut d_xi = CVec::zeros(2 * n);
    let btv: Complex64 = b.iter().zip(st.v.iter()).map(|(a, b)| a * b).sum();
    let cu: Complex64 = ct.iter().zip(st.u.iter()).map(|(a, b)| a * b).sum();
    d_xi.rows_mut(0, n).copy_from(&(&b * (btv / xi2)));
    d_xi.rows_mut(n, n).copy_from(&(&ct * (-cu / xi2)));

    let mut jac = RMat::zeros(4 * n + 3, 4 * n + 2);
    let put_complex_col = |jac: &mut RMat, col: usize, v: &CVec| {
        for i in 0..2 * n {
            jac[(i, col)] = v[i].re;
            jac[(2 * n + i, col)] = v[i].im;
        }
    };
    put_complex_col(&mut jac, 0, &d_omega);
    put_complex_col(&mut jac, 1, &d_xi);
    for k in 0..n {
        let hu = h.column(k).into_owned();
        let hv = h.column(n + k).into_owned();
        put_complex_col(&mut jac, 2 + k, &hu);
        put_complex_col(&mut jac, 2 + n + k, &(&hu * J));
        put_complex_col(&mut jac, 2 + 2 * n + k, &hv);
        put_complex_col(&mut jac, 2 + 3 * n + k, &(&hv * J));
    }

    // stationarity row
    let row = 4 * n;
    let a2 = delay_matrix_derivative(sys, s, 2);
    jac[(row, 0)] = st.v.dotc(&((a2 * &st.u) * -J)).im;
    let c_row = st.v.adjoint() * &k_plus;
    let d_col = &k_plus * &st.u;
    for k in 0..n {
        jac[(row, 2 + k)] = c_row[k].im;
        jac[(row, 2 + n + k)] = c_row[k].re;
        jac[(row, 2 + 2 * n + k)] = d_col[k].im;
        jac[(row, 2 + 3 * n + k)] = -d_col[k].re;
    }

    // normalization rows
    for k in 0..2 * n {
        let qc = st.q[k].conj();
        let (re_col, im_col) = if k < n { (2 + k, 2 + n + k) } else { (2 + n + k, 2 + 2 * n + k) };
        jac[(row + 1, re_col)] = qc.re;
        jac[(row + 2, re_col)] = qc.im;
        let jq = qc * J;
        jac[(row + 1, im_col)] = jq.re;
        jac[(row + 2, im_col)] = jq.im;
    }
    jac
}

fn magnitude(sys: &DdaeSystem, omega: f64) -> f64 {
    eval_transfer(sys, Complex64::new(0.0, omega)).map(|g| g.norm()).unwrap_or(f64::NAN)
}

/// Sign of the second difference of `|G(jw)|` around `omega`.
pub fn classify(sys: &DdaeSystem, omega: f64) -> ExtremumKind {
    let h = 1e-4 * (1.0 + omega);
    let (left, mid, right) = (magnitude(sys, omega - h), magnitude(sys, omega), magnitude(sys, omega + h));
    let second = left + right - 2.0 * mid;
    if !second.is_finite() || second.abs() <= 1e-13 * (1.0 + mid) {
        ExtremumKind::Undetermined
    } else if second < 0.0 {
        ExtremumKind::Maximum
    } else {
        ExtremumKind::Minimum
    }
}

fn least_squares_step(jac: &RMat, r: &RVec) -> Option<RVec> {
    let svd = jac.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.solve(&-r, 1e-14 * smax).ok()
}

/// Damped Gauss-Newton on the stacked singular value and stationarity
/// equations, started from the smallest singular vector of `H(jw0, xi0)`.
pub fn gauss_newton_correct(sys: &DdaeSystem, omega0: f64, xi0: f64, opts: &CorrectorOptions) -> ExtremumPoint {
    let omega0 = omega0.abs();
    if xi0 < TINY_XI {
        return ExtremumPoint {
            omega: omega0,
            xi: xi0,
            kind: ExtremumKind::Minimum,
            predictor_omega: omega0,
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let (_, z0) = smallest_singular_pair(&build_h(sys, omega0, xi0));
    let n = sys.order();
    let mut st = CorrectorState { omega: omega0, xi: xi0, u: z0.rows(0, n).into_owned(), v: z0.rows(n, n).into_owned(), q: z0 };
    let mut r = corrector_residual(sys, &st);
    let mut rn = r.norm();
    let mut iterations = 0;
    while iterations < opts.max_iter && !(rn <= opts.tol_for(st.xi)) {
        iterations += 1;
        let jac = corrector_jacobian(sys, &st);
        let Some(step) = least_squares_step(&jac, &r) else { break };
        let x = st.to_unknowns();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = CorrectorState::from_unknowns(&(&x + &step * alpha), st.q.clone());
            if trial.xi > 0.0 {
                let tr = corrector_residual(sys, &trial);
                let tn = tr.norm();
                if tn < rn {
                    accepted = Some((trial, tr, tn));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, tr, tn)) => {
                st = trial;
                r = tr;
                rn = tn;
            }
            None => break,
        }
    }
    let omega = st.omega.abs();
    let mag = magnitude(sys, omega);
    let consistent = (st.xi - mag).abs() <= CONSISTENCY_TOL * (1.0 + st.xi);
    ExtremumPoint {
        omega,
        xi: st.xi,
        kind: classify(sys, omega),
        predictor_omega: omega0,
        iterations,
        residual: rn,
        converged: rn <= opts.tol_for(st.xi) && consistent,
    }
}

/// Scalar Newton on `Im Z(jw) / |G(jw)|^2 = 0` with `xi = |G(jw)|`.
/// Equivalent at the root for SISO systems; kept as a cross-check of
/// [`gauss_newton_correct`].
pub fn newton_on_z(sys: &DdaeSystem, omega0: f64, opts: &CorrectorOptions) -> ExtremumPoint {
    // Im Z(jw) = -d|G|^2/dw, so the scaled function is -d log|G|^2 / dw
    let phi = |w: f64| {
        let s = Complex64::new(0.0, w);
        match (eval_z(sys, s), eval_transfer(sys, s)) {
            (Ok(z), Ok(g)) => z.im / g.norm_sqr(),
            _ => f64::NAN,
        }
    };
    let tol = opts.tol.unwrap_or(1e-10);
    let mut w = omega0.abs();
    let mut val = phi(w);
    let mut iterations = 0;
    while iterations < opts.max_iter && val.is_finite() && val.abs() > tol {
        iterations += 1;
        let h = 1e-6 * (1.0 + w);
        let slope = (phi(w + h) - phi(w - h)) / (2.0 * h);
        if !(slope.abs() > 0.0) {
            break;
        }
        let mut step = -val / slope;
        let mut next = phi(w + step);
        let mut halvings = 0;
        while !(next.abs() < val.abs()) && halvings < MAX_HALVINGS {
            step *= 0.5;
            next = phi(w + step);
            halvings += 1;
        }
        if !(next.abs() < val.abs()) {
            break;
        }
        w += step;
        val = next;
    }
    let omega = w.abs();
    ExtremumPoint {
        omega,
        xi: magnitude(sys, omega),
        kind: classify(sys, omega),
        predictor_omega: omega0.abs(),
        iterations,
        residual: val.abs(),
        converged: val.abs() <= tol,
    }
}

/// Golden-section minimization of `|G(jw)|` on `[lo, hi]`, used for
/// imaginary-axis zeros of the approximation.
pub fn golden_minimize(sys: &DdaeSystem, lo: f64, hi: f64, predictor_omega: f64) -> ExtremumPoint {
    let (w, iterations) = golden_section(|w| magnitude(sys, w), lo.max(0.0), hi, 1e-12, false);
    let xi = magnitude(sys, w);
    ExtremumPoint { omega: w, xi, kind: ExtremumKind::Minimum, predictor_omega, iterations, residual: 0.0, converged: xi.is_finite() }
}

/// Golden-section search for a minimum (or maximum) of `f` on `[a, b]`.
/// Returns the abscissa and the iteration count.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, maximize: bool) -> (f64, usize) {
    let g = |x: f64| if maximize { -f(x) } else { f(x) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    let mut it = 0;
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) && it < 200 {
        it += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    (0.5 * (a + b), it)
}
