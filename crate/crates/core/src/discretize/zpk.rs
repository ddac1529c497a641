use num_complex::Complex64;

use super::gevp::{solve_gevp_real, GevpOptions};
use super::DescriptorRealization;
use crate::error::{Error, Result};
use crate::linalg::RMat;

/// Pole-zero pairs closer than this (relative) cancel.
pub const CANCEL_TOL: f64 = 1e-8;
const VALIDATION_TOL: f64 = 1e-6;
const VALIDATION_POINTS: usize = 200;
const GOLDEN: f64 = 1.618_033_988_749_895;

/// `G_N(s) = k b(s) / a(s)` with `b`, `a` monic in the listed zeros and poles.
#[derive(Clone, Debug, PartialEq)]
pub struct ZpkForm {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub gain: Complex64,
}

impl ZpkForm {
    /// `b(s) / a(s)`, with factors interleaved so that high orders do not overflow.
    pub fn shape(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut zi = self.zeros.iter();
        let mut pi = self.poles.iter();
        loop {
            match (zi.next(), pi.next()) {
                (None, None) => break,
                (Some(z), Some(p)) => acc *= (s - z) / (s - p),
                (Some(z), None) => acc *= s - z,
                (None, Some(p)) => acc /= s - p,
            }
        }
        acc
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.gain * self.shape(s)
    }

    fn distance_to_roots(&self, s: Complex64) -> f64 {
        self.zeros.iter().chain(&self.poles).map(|r| (s - r).norm()).fold(f64::INFINITY, f64::min)
    }
}

fn cancel(zeros: Vec<Complex64>, mut poles: Vec<Complex64>) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut kept = Vec::with_capacity(zeros.len());
    for z in zeros {
        let hit = poles
            .iter()
            .enumerate()
            .map(|(k, p)| (k, (z - p).norm(), p.norm()))
            .filter(|&(_, d, pn)| d < CANCEL_TOL * pn.max(1.0))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match hit {
            Some((k, _, _)) => {
                poles.swap_remove(k);
            }
            None => kept.push(z),
        }
    }
    (kept, poles)
}

fn sort_roots(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub fn to_zpk(g: &DescriptorRealization) -> Result<ZpkForm> {
    let opts = GevpOptions::default();
    let n = g.order();
    let poles = solve_gevp_real(g.a(), g.e(), opts)?;
    let mut sa = RMat::zeros(n + 1, n + 1);
    sa.view_mut((0, 0), (n, n)).copy_from(g.a());
    sa.view_mut((0, n), (n, 1)).copy_from(g.b());
    sa.view_mut((n, 0), (1, n)).copy_from(g.c());
    let mut se = RMat::zeros(n + 1, n + 1);
    se.view_mut((0, 0), (n, n)).copy_from(g.e());
    let zeros = solve_gevp_real(&sa, &se, opts)?;
    let (mut zeros, mut poles) = cancel(zeros, poles);
    sort_roots(&mut zeros);
    sort_roots(&mut poles);

    let mut zpk = ZpkForm { zeros, poles, gain: Complex64::new(0.0, 0.0) };
    let mut s0 = Complex64::new(0.0, GOLDEN);
    for _ in 0..50 {
        if zpk.distance_to_roots(s0) > 1e-3 * (1.0 + s0.norm()) {
            break;
        }
        s0 *= GOLDEN;
    }
    zpk.gain = g.eval(s0)? / zpk.shape(s0);
    if !zpk.gain.is_finite() {
        return Err(Error::ZpkExtraction(format!("non-finite gain matched at {s0}")));
    }

    for k in 0..VALIDATION_POINTS {
        let w = 10f64.powf(-3.0 + 6.0 * k as f64 / (VALIDATION_POINTS - 1) as f64);
        let s = Complex64::new(0.0, w);
        let Ok(exact) = g.eval(s) else { continue };
        let err = (zpk.eval(s) - exact).norm();
        if !(err <= VALIDATION_TOL * (1.0 + exact.norm())) {
            return Err(Error::ZpkExtraction(format!("mismatch {err:.3e} at omega = {w:.6e}")));
        }
    }
    Ok(zpk)
}
