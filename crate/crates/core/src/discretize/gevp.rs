//! Finite generalized eigenvalues of dense pencils through LAPACK's QZ
//! drivers `dggev` and `zggev`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat};

pub const DEFAULT_BETA_TOL: f64 = 1e-12;
pub const DEFAULT_INFINITE_CAP: f64 = 1e8;

/// Rules for deciding which `(alpha, beta)` pairs are finite eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GevpOptions {
    pub beta_tol: f64,
    pub infinite_cap: f64,
}

impl Default for GevpOptions {
    fn default() -> Self {
        Self { beta_tol: DEFAULT_BETA_TOL, infinite_cap: DEFAULT_INFINITE_CAP }
    }
}

impl GevpOptions {
    fn finite(&self, alpha: Complex64, beta: Complex64) -> Option<Complex64> {
        if !(beta.norm() > self.beta_tol * alpha.norm().max(beta.norm())) {
            return None;
        }
        let lambda = alpha / beta;
        (lambda.norm() < self.infinite_cap).then_some(lambda)
    }
}

fn backend_error(n: usize, info: i32) -> Error {
    let reason = if info > 0 { format!("QZ iteration failed to converge (info = {info})") } else { format!("illegal argument {}", -info) };
    Error::Eigensolver { size: n, reason }
}

fn check_square(a: (usize, usize), e: (usize, usize)) -> Result<usize> {
    if a.0 != a.1 || a != e {
        return Err(Error::Dimension { block: "pencil".into(), expected: format!("{}x{}", a.0, a.0), actual: format!("{}x{}", e.0, e.1) });
    }
    Ok(a.0)
}

/// Finite eigenvalues `lambda` of `A x = lambda E x` for complex pencils.
pub fn solve_gevp(a: &CMat, e: &CMat, opts: GevpOptions) -> Result<Vec<Complex64>> {
    let n = check_square(a.shape(), e.shape())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    // nalgebra storage is column-major, as LAPACK expects
    let mut a = a.as_slice().to_vec();
    let mut e = e.as_slice().to_vec();
    let zero = Complex64::new(0.0, 0.0);
    let (mut alpha, mut beta) = (vec![zero; n], vec![zero; n]);
    let (mut vl, mut vr) = ([zero], [zero]);
    let lwork = 4 * n + 64;
    let mut work = vec![zero; lwork];
    let mut rwork = vec![0.0; 8 * n];
    let mut info = 0;
    let ni = n as i32;
    // SAFETY: every buffer is sized per the zggev contract and no eigenvectors are requested.
    unsafe {
        lapack::zggev(
            b'N',
            b'N',
            ni,
            &mut a,
            ni,
            &mut e,
            ni,
            &mut alpha,
            &mut beta,
            &mut vl,
            1,
            &mut vr,
            1,
            &mut work,
            lwork as i32,
            &mut rwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(backend_error(n, info));
    }
    Ok(alpha.into_iter().zip(beta).filter_map(|(al, be)| opts.finite(al, be)).collect())
}

/// Finite eigenvalues of a real pencil. Complex eigenvalues come out in
/// exact conjugate pairs.
pub fn solve_gevp_real(a: &RMat, e: &RMat, opts: GevpOptions) -> Result<Vec<Complex64>> {
    let n = check_square(a.shape(), e.shape())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = a.as_slice().to_vec();
    let mut e = e.as_slice().to_vec();
    let (mut re, mut im, mut beta) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut vl, mut vr) = ([0.0], [0.0]);
    let lwork = 8 * n + 64;
    let mut work = vec![0.0; lwork];
    let mut info = 0;
    let ni = n as i32;
    // SAFETY: every buffer is sized per the dggev contract and no eigenvectors are requested.
    unsafe {
        lapack::dggev(
            b'N',
            b'N',
            ni,
            &mut a,
            ni,
            &mut e,
            ni,
            &mut re,
            &mut im,
            &mut beta,
            &mut vl,
            1,
            &mut vr,
            1,
            &mut work,
            lwork as i32,
            &mut info,
        );
    }
    if info != 0 {
        return Err(backend_error(n, info));
    }
    Ok((0..n).filter_map(|i| opts.finite(Complex64::new(re[i], im[i]), Complex64::new(beta[i], 0.0))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complexify, smallest_singular_value};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_pencil() {
        let a = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0]));
        let e = RMat::identity(2, 2);
        let ev = sorted_re(solve_gevp(&complexify(&a), &complexify(&e), GevpOptions::default()).unwrap());
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - 1.0).norm() < 1e-14 && (ev[1] - 2.0).norm() < 1e-14);
        let ev = sorted_re(solve_gevp_real(&a, &e, GevpOptions::default()).unwrap());
        assert!((ev[1] - 2.0).norm() < 1e-14);
    }

    #[test]
    fn infinite_eigenvalue_dropped() {
        let a = RMat::identity(2, 2);
        let e = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        for ev in
            [solve_gevp(&complexify(&a), &complexify(&e), GevpOptions::default()).unwrap(), solve_gevp_real(&a, &e, GevpOptions::default()).unwrap()]
        {
            assert_eq!(ev.len(), 1);
            assert!((ev[0] - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn rotation_gives_conjugate_pair() {
        let a = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let ev = solve_gevp_real(&a, &RMat::identity(2, 2), GevpOptions::default()).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0], ev[1].conj());
        assert!((ev[0].im.abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_pencil_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 50;
        let a = RMat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let e = RMat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let (ac, ec) = (complexify(&a), complexify(&e));
        let anorm = a.norm();
        for ev in [solve_gevp(&ac, &ec, GevpOptions::default()).unwrap(), solve_gevp_real(&a, &e, GevpOptions::default()).unwrap()] {
            assert_eq!(ev.len(), n);
            for l in ev {
                let m = &ac - &ec * l;
                assert!(smallest_singular_value(&m) <= 1e-8 * anorm * (1.0 + l.norm()), "lambda={l}");
            }
        }
    }

    #[test]
    fn size_mismatch() {
        assert!(solve_gevp_real(&RMat::identity(2, 2), &RMat::identity(3, 3), GevpOptions::default()).is_err());
    }
}
