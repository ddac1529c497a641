//! All local extrema of `|G(jw)|`: candidates from the rational
//! approximation, then correction on the delay system itself.

mod corrector;
mod predictor;

pub use corrector::{
    build_h, classify, corrector_jacobian, corrector_residual, gauss_newton_correct, golden_minimize, golden_section, newton_on_z, CorrectorOptions,
    CorrectorState, TINY_XI,
};
pub use predictor::{build_delta, predict_frequencies, DeltaRealization, AXIS_POLE_TOL, AXIS_ZERO_TOL, DEFAULT_AXIS_TOL};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::discretize::{discretize_with, to_zpk, HistoryComponents, ZpkForm, DEFAULT_N};
use crate::error::{Error, Result};
use crate::model::{check_causality, nullspace_bases, DdaeSystem, DEFAULT_RANK_TOL};
use crate::transfer::eval_transfer;

const DEDUP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
    Undetermined,
}

impl ExtremumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtremumKind::Maximum => "maximum",
            ExtremumKind::Minimum => "minimum",
            ExtremumKind::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremumPoint {
    pub omega: f64,
    pub xi: f64,
    pub kind: ExtremumKind,
    pub predictor_omega: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremaOptions {
    pub n_cheb: usize,
    pub axis_tol: f64,
    pub rank_tol: f64,
    pub corrector: CorrectorOptions,
    pub history: HistoryComponents,
}

impl Default for ExtremaOptions {
    fn default() -> Self {
        Self {
            n_cheb: DEFAULT_N,
            axis_tol: DEFAULT_AXIS_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            corrector: CorrectorOptions::default(),
            history: HistoryComponents::Delayed,
        }
    }
}

/// Output of [`compute_extrema`] with the intermediate quantities of the
/// prediction step.
#[derive(Clone, Debug)]
pub struct ExtremaReport {
    /// Corrected points sorted by frequency, converged or not.
    pub points: Vec<ExtremumPoint>,
    /// Predicted frequencies, sorted.
    pub predicted: Vec<f64>,
    /// Imaginary-axis zeros of the approximation, treated as minima.
    pub axis_zeros: Vec<f64>,
    pub zpk: ZpkForm,
    pub discretization_order: usize,
    pub delta_pencil_size: usize,
}

impl ExtremaReport {
    pub fn converged(&self) -> impl Iterator<Item = &ExtremumPoint> {
        self.points.iter().filter(|p| p.converged)
    }

    /// Converged point with the largest `xi`.
    pub fn peak(&self) -> Option<&ExtremumPoint> {
        self.converged().fold(None, |best: Option<&ExtremumPoint>, p| match best {
            Some(b) if b.xi >= p.xi => Some(b),
            _ => Some(p),
        })
    }
}

pub(crate) fn ensure_causal(sys: &DdaeSystem, rank_tol: f64) -> Result<()> {
    if crate::model::real_rcond(sys.e()) >= 1e-12 {
        return Ok(());
    }
    let bases = nullspace_bases(sys, rank_tol)?;
    let check = check_causality(sys, &bases);
    if check.causal {
        Ok(())
    } else {
        Err(Error::NotCausal { rcond: check.rcond })
    }
}

/// Merges points closer than `1e-6 (1 + w)`, preferring converged points
/// and then smaller residuals.
fn dedup_points(mut points: Vec<ExtremumPoint>) -> Vec<ExtremumPoint> {
    points.sort_by(|a, b| a.omega.total_cmp(&b.omega).then(a.predictor_omega.total_cmp(&b.predictor_omega)));
    let mut out: Vec<ExtremumPoint> = Vec::with_capacity(points.len());
    for p in points {
        if let Some(last) = out.last_mut() {
            if (p.omega - last.omega).abs() <= DEDUP_TOL * (1.0 + last.omega.abs()) {
                let better = (p.converged && !last.converged) || (p.converged == last.converged && p.residual < last.residual);
                if better {
                    *last = p;
                }
                continue;
            }
        }
        out.push(p);
    }
    out
}

pub fn compute_extrema(sys: &DdaeSystem, opts: &ExtremaOptions) -> Result<ExtremaReport> {
    ensure_causal(sys, opts.rank_tol)?;
    let g_n = discretize_with(sys, opts.n_cheb, opts.history)?;
    let zpk = to_zpk(&g_n)?;
    let delta = build_delta(&zpk)?;
    let predicted = predict_frequencies(&delta, opts.axis_tol)?;

    let mut points: Vec<ExtremumPoint> = predicted
        .par_iter()
        .filter_map(|&w| {
            let xi = eval_transfer(sys, Complex64::new(0.0, w)).ok()?.norm();
            Some(gauss_newton_correct(sys, w, xi, &opts.corrector))
        })
        .collect();
    let minima: Vec<ExtremumPoint> = delta
        .axis_zeros
        .par_iter()
        .map(|&w| {
            let h = 1e-3 * (1.0 + w);
            golden_minimize(sys, w - h, w + h, w)
        })
        .collect();
    points.extend(minima);

    Ok(ExtremaReport {
        points: dedup_points(points),
        predicted,
        axis_zeros: delta.axis_zeros.clone(),
        zpk,
        discretization_order: g_n.order(),
        delta_pencil_size: delta.pencil_size(),
    })
}
