//! Reference systems used throughout the test suites, benchmarks and the
//! shipped example files.

use crate::linalg::{RMat, RRow, RVec};
use crate::model::{feedback, lft_to_ddae, parallel, series, DdaeSystem, FeedbackSign, LftBlocks, LftDelaySystem};

fn scalar(x: f64) -> RMat {
    RMat::from_element(1, 1, x)
}

/// `1 / (s + a)`.
pub fn first_order(a: f64) -> DdaeSystem {
    DdaeSystem::delay_free(scalar(1.0), scalar(-a), RVec::from_element(1, 1.0), RRow::from_element(1, 1.0)).expect("valid first-order system")
}

/// `x' = -x - 0.5 x(t - 1) + u`, `y = x`.
pub fn one_delay() -> DdaeSystem {
    DdaeSystem::new(scalar(1.0), scalar(-1.0), vec![(1.0, scalar(-0.5))], RVec::from_element(1, 1.0), RRow::from_element(1, 1.0))
        .expect("valid one-delay system")
}

/// Two-state DDAE realization of
/// `(s + 2.1) / ((s + 0.1)(1 - 0.25 e^{-s} + 0.5 e^{-2s}) + 1)`,
/// whose asymptotic transfer function is `1 / (1 - 0.25 e^{-s} + 0.5 e^{-2s})`.
pub fn tsh_system() -> DdaeSystem {
    let e = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let a0 = RMat::from_row_slice(2, 2, &[-0.1, 1.0, -1.0, -1.0]);
    let a1 = RMat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.25]);
    let a2 = RMat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -0.5]);
    DdaeSystem::new(e, a0, vec![(1.0, a1), (2.0, a2)], RVec::from_vec(vec![0.0, 1.0]), RRow::from_vec(vec![2.0, 1.0]))
        .expect("valid T_sh realization")
}

/// `k / (T s + 1)` as an LFT with an optional input delay.
fn lag(gain: f64, time_constant: f64, input_delay: Option<f64>) -> DdaeSystem {
    let blocks = LftBlocks::delay_free(scalar(time_constant), scalar(-1.0), scalar(gain), scalar(1.0), 0.0);
    let lft = LftDelaySystem::new(blocks, vec![], input_delay.into_iter().collect(), vec![]).expect("valid lag");
    lft_to_ddae(&lft).expect("valid lag realization")
}

/// Subsystems of the Smith predictor loop: plant `P`, model `Gp`, negated
/// model delay `-Dp`, PI controller `C` and filter `F`.
pub struct SmithSubsystems {
    pub plant: DdaeSystem,
    pub model: DdaeSystem,
    pub neg_model_delay: DdaeSystem,
    pub controller: DdaeSystem,
    pub filter: DdaeSystem,
}

pub fn smith_subsystems() -> SmithSubsystems {
    // P = 6 e^{-106 s} / (37 s + 1)
    let plant = lag(6.0, 37.0, Some(106.0));
    // Gp = 5.6 / (40.2 s + 1)
    let model = lag(5.6, 40.2, None);
    // -Dp = -e^{-93.9 s}, a pure delay with one internal channel
    let pure = LftBlocks {
        f: RMat::zeros(0, 0),
        a: RMat::zeros(0, 0),
        b1: RMat::zeros(0, 1),
        b2: RMat::zeros(0, 1),
        c1: RMat::zeros(1, 0),
        c2: RMat::zeros(1, 0),
        d11: scalar(0.0),
        d12: scalar(-1.0),
        d21: scalar(1.0),
        d22: scalar(0.0),
    };
    let neg_model_delay = lft_to_ddae(&LftDelaySystem::new(pure, vec![93.9], vec![], vec![]).expect("valid delay")).expect("valid delay realization");
    // C = 0.5 (1 + 1 / (40 s)) = 0.5 + 0.0125 / s
    let pi = LftBlocks::delay_free(scalar(1.0), scalar(0.0), scalar(1.0), scalar(0.0125), 0.5);
    let controller = lft_to_ddae(&LftDelaySystem::new(pi, vec![], vec![], vec![]).expect("valid PI")).expect("valid PI realization");
    // F = 1 / (20 s + 1)
    let filter = lag(1.0, 20.0, None);
    SmithSubsystems { plant, model, neg_model_delay, controller, filter }
}

/// Closed loop `T = P C / (1 + C Gp + C F (P - Gp Dp))` of the Smith
/// predictor with feedback signal `Gp u + F (y - Gp Dp u)`.
pub fn smith_predictor() -> DdaeSystem {
    let s = smith_subsystems();
    let model_delay = series(&s.neg_model_delay, &s.model).expect("series");
    let mismatch = parallel(&s.plant, &model_delay).expect("parallel");
    let filtered = series(&mismatch, &s.filter).expect("series");
    let predictor = parallel(&s.model, &filtered).expect("parallel");
    let loop_u = feedback(&s.controller, &predictor, FeedbackSign::Negative).expect("feedback");
    series(&loop_u, &s.plant).expect("series")
}

/// Random retarded system with `n <= 4` states and `m <= 2` delays in
/// `[0.1, 2]`, stable for all delay values: `A0` is shifted so that its
/// logarithmic norm plus the delay-matrix norms is negative.
///
/// `uniform` must return samples in `[0, 1)`.
pub fn random_retarded(uniform: &mut impl FnMut() -> f64) -> DdaeSystem {
    let mut between = |lo: f64, hi: f64| lo + (hi - lo) * uniform();
    let n = 1 + (between(0.0, 4.0) as usize).min(3);
    let m = 1 + (between(0.0, 2.0) as usize).min(1);
    let r0 = RMat::from_fn(n, n, |_, _| between(-1.0, 1.0));
    let terms: Vec<(f64, RMat)> = (0..m).map(|_| (between(0.1, 2.0), RMat::from_fn(n, n, |_, _| between(-0.5, 0.5)))).collect();
    let b = RVec::from_fn(n, |_, _| between(-1.0, 1.0));
    let c = RRow::from_fn(n, |_, _| between(-1.0, 1.0));
    let margin = between(0.1, 1.0);
    let log_norm = ((&r0 + r0.transpose()) * 0.5).symmetric_eigenvalues().max();
    let spread: f64 = terms.iter().map(|(_, a)| a.singular_values().max()).sum();
    let a0 = r0 - RMat::identity(n, n) * (log_norm + spread + margin);
    DdaeSystem::new(RMat::identity(n, n), a0, terms, b, c).expect("valid random system")
}
