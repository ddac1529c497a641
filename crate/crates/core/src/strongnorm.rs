//! Strong H-infinity norm: the larger of the finite-frequency peak and the
//! supremum of the asymptotic transfer function over the delay-angle torus.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrema::{compute_extrema, ensure_causal, golden_section, ExtremaOptions, ExtremumPoint};
use crate::model::{nullspace_bases, DdaeSystem, NullspaceBases};
use crate::transfer::{eval_transfer, AsymptoticSystem};

/// Poles of the approximation to the right of this trigger a stability warning.
pub const STABILITY_WARN_RE: f64 = -1e-8;
const REFINE_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 100;

/// Delays `i` (1-based) whose projection `U^T A_i V` is not negligible.
pub fn active_delay_indices(sys: &DdaeSystem, bases: &NullspaceBases, tol: f64) -> Vec<usize> {
    if bases.nu == 0 {
        return Vec::new();
    }
    let ut = bases.u.transpose();
    sys.terms().iter().enumerate().filter(|(_, t)| (&ut * &t.matrix * &bases.v).norm() > tol * t.matrix.norm().max(1.0)).map(|(i, _)| i + 1).collect()
}

/// Grid points per dimension used when none is given.
pub fn default_density(dim: usize) -> Option<usize> {
    match dim {
        0..=2 => Some(128),
        3 => Some(32),
        4 => Some(16),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOptions {
    /// Points per dimension; `None` picks [`default_density`].
    pub density: Option<usize>,
    /// Permit more than four active delays (requires `density`).
    pub allow_high_dimension: bool,
    pub rank_tol: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { density: None, allow_high_dimension: false, rank_tol: crate::model::DEFAULT_RANK_TOL }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticNorm {
    pub value: f64,
    /// Maximizing angles of the active delays, in `[0, 2 pi)`.
    pub theta: Vec<f64>,
    /// 1-based indices of the active delays, matching `theta`.
    pub active_delays: Vec<usize>,
}

struct TorusFunction<'a> {
    asym: &'a AsymptoticSystem,
    active: Vec<usize>,
    m: usize,
}

impl TorusFunction<'_> {
    fn eval(&self, theta: &[f64]) -> Result<f64> {
        let mut mult = vec![Complex64::new(1.0, 0.0); self.m];
        for (&i, &t) in self.active.iter().zip(theta) {
            mult[i - 1] = Complex64::from_polar(1.0, t);
        }
        self.asym.eval_multipliers(&mult).map(|g| g.norm()).ok_or_else(|| Error::AsymptoticUnbounded { theta: theta.to_vec() })
    }
}

pub fn asymptotic_norm(sys: &DdaeSystem, bases: &NullspaceBases, grid: &GridOptions) -> Result<AsymptoticNorm> {
    if bases.nu == 0 {
        return Ok(AsymptoticNorm { value: 0.0, theta: Vec::new(), active_delays: Vec::new() });
    }
    let asym = AsymptoticSystem::new(sys, bases);
    let active = active_delay_indices(sys, bases, grid.rank_tol);
    let d = active.len();
    let f = TorusFunction { asym: &asym, active: active.clone(), m: sys.num_delays() };
    if d == 0 {
        return Ok(AsymptoticNorm { value: f.eval(&[])?, theta: Vec::new(), active_delays: active });
    }
    let density = match (grid.density, default_density(d)) {
        (Some(k), _) if d <= 4 || grid.allow_high_dimension => k,
        (None, Some(k)) => k,
        _ => return Err(Error::TooManyActiveDelays { active: d, limit: 4 }),
    };
    if density == 0 {
        return Err(Error::InvalidArgument("grid density must be positive".into()));
    }
    let total = density.checked_pow(d as u32).ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    let point = |mut flat: usize| {
        // lexicographic order: the first angle varies slowest
        let mut theta = vec![0.0; d];
        for k in (0..d).rev() {
            theta[k] = TAU * (flat % density) as f64 / density as f64;
            flat /= density;
        }
        theta
    };
    let (best_flat, best) = (0..total)
        .into_par_iter()
        .map(|k| f.eval(&point(k)).map(|v| (k, v)))
        .try_reduce(|| (usize::MAX, f64::NEG_INFINITY), |a, b| Ok(if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a }))?;

    let h = TAU / density as f64;
    let mut theta = point(best_flat);
    let mut value = best;
    for _ in 0..MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for k in 0..d {
            let centre = theta[k];
            let along = |t: f64| {
                let mut trial = theta.clone();
                trial[k] = t;
                f.eval(&trial).unwrap_or(f64::INFINITY)
            };
            let (t, _) = golden_section(along, centre - h, centre + h, 1e-12, true);
            let v = along(t);
            if v > value {
                change = change.max((t - centre).abs());
                theta[k] = t;
                value = v;
            }
        }
        if change < REFINE_TOL {
            break;
        }
    }
    let theta: Vec<f64> = theta.into_iter().map(|t| t.rem_euclid(TAU)).collect();
    let value = f.eval(&theta)?;
    Ok(AsymptoticNorm { value, theta, active_delays: active })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frequency {
    Finite(f64),
    Infinite,
}

impl Frequency {
    pub fn value(self) -> f64 {
        match self {
            Frequency::Finite(w) => w,
            Frequency::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct StrongNormOptions {
    pub extrema: ExtremaOptions,
    pub grid: GridOptions,
    /// Replaces the computed asymptotic norm.
    pub asymptotic_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongNormResult {
    pub standard_peak: f64,
    pub peak_frequency: f64,
    pub asymptotic_norm: f64,
    pub theta_star: Vec<f64>,
    pub strong_norm: f64,
    pub frequency: Frequency,
    pub extrema: Vec<ExtremumPoint>,
    pub active_delays: Vec<usize>,
    pub warnings: Vec<String>,
    pub discretization_order: usize,
    pub delta_pencil_size: usize,
}

pub fn strong_hinf_norm(sys: &DdaeSystem, opts: &StrongNormOptions) -> Result<StrongNormResult> {
    ensure_causal(sys, opts.extrema.rank_tol)?;
    let bases = nullspace_bases(sys, opts.extrema.rank_tol)?;
    let asym = asymptotic_norm(sys, &bases, &opts.grid)?;
    let report = compute_extrema(sys, &opts.extrema)?;
    let mut warnings = Vec::new();

    if let Some(p) = report.zpk.poles.iter().filter(|p| p.re > STABILITY_WARN_RE).max_by(|a, b| a.re.total_cmp(&b.re)) {
        warnings
            .push(format!("approximation has a pole at {p:.6e} with real part above {STABILITY_WARN_RE:e}; the system may not be strongly stable"));
    }

    let (standard_peak, peak_frequency) = match report.peak() {
        Some(p) => (p.xi, p.omega),
        None => {
            warnings.push("no extremum converged; using the best predicted value".into());
            report
                .predicted
                .iter()
                .filter_map(|&w| eval_transfer(sys, Complex64::new(0.0, w)).ok().map(|g| (g.norm(), w)))
                .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
        }
    };
    let asymptotic = opts.asymptotic_override.unwrap_or(asym.value);
    let (strong_norm, frequency) =
        if standard_peak > asymptotic { (standard_peak, Frequency::Finite(peak_frequency)) } else { (asymptotic, Frequency::Infinite) };
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(StrongNormResult {
        standard_peak,
        peak_frequency,
        asymptotic_norm: asymptotic,
        theta_star: asym.theta,
        strong_norm,
        frequency,
        extrema: report.points,
        active_delays: asym.active_delays,
        warnings,
        discretization_order: report.discretization_order,
        delta_pencil_size: report.delta_pencil_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{RMat, RRow, RVec};
    use crate::model::DEFAULT_RANK_TOL;
    use crate::systems::{first_order, one_delay, smith_predictor, tsh_system};
    use std::f64::consts::PI;

    fn bases(sys: &DdaeSystem) -> NullspaceBases {
        nullspace_bases(sys, DEFAULT_RANK_TOL).unwrap()
    }

    /// Only the first delay reaches the algebraic variable; the second acts on the differential row.
    fn single_active() -> DdaeSystem {
        let e = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a0 = RMat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        let a1 = RMat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -0.5]);
        let a2 = RMat::from_row_slice(2, 2, &[0.0, 0.3, 0.0, 0.0]);
        DdaeSystem::new(e, a0, vec![(1.0, a1), (2.0, a2)], RVec::from_vec(vec![0.0, 1.0]), RRow::from_vec(vec![0.0, 1.0])).unwrap()
    }

    #[test]
    fn active_sets() {
        assert!(active_delay_indices(&one_delay(), &bases(&one_delay()), DEFAULT_RANK_TOL).is_empty());
        assert_eq!(active_delay_indices(&tsh_system(), &bases(&tsh_system()), DEFAULT_RANK_TOL), vec![1, 2]);
        assert_eq!(active_delay_indices(&single_active(), &bases(&single_active()), DEFAULT_RANK_TOL), vec![1]);
    }

    #[test]
    fn delay_free_asymptotic_norm_is_zero() {
        let sys = one_delay();
        let a = asymptotic_norm(&sys, &bases(&sys), &GridOptions::default()).unwrap();
        assert_eq!(a.value, 0.0);
        assert!(a.theta.is_empty());
    }

    #[test]
    fn tsh_asymptotic_norm() {
        let sys = tsh_system();
        let a = asymptotic_norm(&sys, &bases(&sys), &GridOptions::default()).unwrap();
        assert!((a.value - 4.0).abs() < 1e-12);
        assert!(a.theta[0].min(TAU - a.theta[0]) < 1e-6 && (a.theta[1] - PI).abs() < 1e-6, "{:?}", a.theta);
        let doubled = asymptotic_norm(&sys, &bases(&sys), &GridOptions { density: Some(256), ..Default::default() }).unwrap();
        assert!((doubled.value - a.value).abs() < 1e-8);
    }

    #[test]
    fn circle_geometry() {
        // G_a = 1 / (1 + 0.5 e^{j theta}) on the active delay
        let sys = single_active();
        let a = asymptotic_norm(&sys, &bases(&sys), &GridOptions::default()).unwrap();
        assert!((a.value - 2.0).abs() < 1e-12);
        assert!((a.theta[0] - PI).abs() < 1e-6);
    }

    #[test]
    fn too_many_active_delays() {
        let n = 2;
        let e = RMat::from_row_slice(n, n, &[1.0, 0.0, 0.0, 0.0]);
        let a0 = RMat::from_row_slice(n, n, &[-1.0, 0.0, 0.0, -1.0]);
        let terms = (1..=5).map(|k| (k as f64, RMat::from_row_slice(n, n, &[0.0, 0.0, 0.0, 0.05]))).collect();
        let sys = DdaeSystem::new(e, a0, terms, RVec::from_vec(vec![1.0, 1.0]), RRow::from_vec(vec![1.0, 1.0])).unwrap();
        let nb = bases(&sys);
        assert!(matches!(asymptotic_norm(&sys, &nb, &GridOptions::default()), Err(Error::TooManyActiveDelays { active: 5, .. })));
        let ok = asymptotic_norm(&sys, &nb, &GridOptions { density: Some(4), allow_high_dimension: true, ..Default::default() }).unwrap();
        assert!((ok.value - 1.0 / 0.75).abs() < 1e-9);
    }

    #[test]
    fn first_order_strong_norm() {
        let r = strong_hinf_norm(&first_order(1.0), &StrongNormOptions::default()).unwrap();
        assert!((r.strong_norm - 1.0).abs() < 1e-14);
        assert_eq!(r.frequency, Frequency::Finite(0.0));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn tsh_strong_norm() {
        let r = strong_hinf_norm(&tsh_system(), &StrongNormOptions::default()).unwrap();
        assert!((r.strong_norm - 4.0).abs() < 1e-9);
        assert_eq!(r.frequency, Frequency::Infinite);
        assert!((r.standard_peak - 2.5788).abs() < 1e-3);
        assert!(r.strong_norm >= r.standard_peak && r.strong_norm >= r.asymptotic_norm);
    }

    #[test]
    fn smith_strong_norm() {
        let r = strong_hinf_norm(&smith_predictor(), &StrongNormOptions::default()).unwrap();
        assert!((r.strong_norm - 1.3308).abs() < 2e-3, "{}", r.strong_norm);
        assert_eq!(r.asymptotic_norm, 0.0);
        assert!(matches!(r.frequency, Frequency::Finite(w) if w > 0.0));
    }

    #[test]
    fn override_never_decreases_the_norm() {
        let sys = tsh_system();
        let base = strong_hinf_norm(&sys, &StrongNormOptions::default()).unwrap();
        for bump in [4.5, 10.0] {
            let r = strong_hinf_norm(&sys, &StrongNormOptions { asymptotic_override: Some(bump), ..Default::default() }).unwrap();
            assert!(r.strong_norm >= base.strong_norm);
            assert_eq!(r.strong_norm, bump);
        }
    }
}
