use super::{check_shape, DdaeSystem};
use crate::error::{Error, Result};
use crate::linalg::{RMat, RRow, RVec};

/// Delay-free block `H` of an LFT delay system:
///
/// ```text
/// F x' = A x  + B1 u   + B2 w
///    y = C1 x + D11 u  + D12 w
///    z = C2 x + D21 u  + D22 w
/// ```
///
/// `u` and `y` are scalar; `w` and `z` have one entry per internal delay.
#[derive(Clone, Debug, PartialEq)]
pub struct LftBlocks {
    pub f: RMat,
    pub a: RMat,
    pub b1: RMat,
    pub b2: RMat,
    pub c1: RMat,
    pub c2: RMat,
    pub d11: RMat,
    pub d12: RMat,
    pub d21: RMat,
    pub d22: RMat,
}

impl LftBlocks {
    /// Blocks of a delay-free system `F x' = A x + B u, y = C x + D u`.
    pub fn delay_free(f: RMat, a: RMat, b: RMat, c: RMat, d: f64) -> Self {
        let nx = a.nrows();
        Self {
            f,
            a,
            b1: b,
            b2: RMat::zeros(nx, 0),
            c1: c,
            c2: RMat::zeros(0, nx),
            d11: RMat::from_element(1, 1, d),
            d12: RMat::zeros(1, 0),
            d21: RMat::zeros(0, 1),
            d22: RMat::zeros(0, 0),
        }
    }
}

/// LFT interconnection of a delay-free block with internal, input and output
/// delays, `w_i(t) = z_i(t - tau_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LftDelaySystem {
    blocks: LftBlocks,
    internal_delays: Vec<f64>,
    input_delays: Vec<f64>,
    output_delays: Vec<f64>,
}

impl LftDelaySystem {
    /// Validates block dimensions. Input and output delay lists hold at most
    /// one entry each (SISO); an empty list means no delay.
    pub fn new(blocks: LftBlocks, internal_delays: Vec<f64>, input_delays: Vec<f64>, output_delays: Vec<f64>) -> Result<Self> {
        let nx = blocks.a.nrows();
        let nw = internal_delays.len();
        check_shape("F", &blocks.f, nx, nx)?;
        check_shape("A", &blocks.a, nx, nx)?;
        check_shape("B1", &blocks.b1, nx, 1)?;
        check_shape("B2", &blocks.b2, nx, nw)?;
        check_shape("C1", &blocks.c1, 1, nx)?;
        check_shape("C2", &blocks.c2, nw, nx)?;
        check_shape("D11", &blocks.d11, 1, 1)?;
        check_shape("D12", &blocks.d12, 1, nw)?;
        check_shape("D21", &blocks.d21, nw, 1)?;
        check_shape("D22", &blocks.d22, nw, nw)?;
        for &tau in &internal_delays {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::InvalidArgument(format!("internal delay {tau} must be finite and positive")));
            }
        }
        for (name, list) in [("input", &input_delays), ("output", &output_delays)] {
            if list.len() > 1 {
                return Err(Error::InvalidArgument(format!("{name} delays: a SISO system has one channel, got {}", list.len())));
            }
            if let Some(&tau) = list.first() {
                if !(tau.is_finite() && tau >= 0.0) {
                    return Err(Error::InvalidArgument(format!("{name} delay {tau} must be finite and nonnegative")));
                }
            }
        }
        Ok(Self { blocks, internal_delays, input_delays, output_delays })
    }

    pub fn blocks(&self) -> &LftBlocks {
        &self.blocks
    }

    pub fn internal_delays(&self) -> &[f64] {
        &self.internal_delays
    }

    pub fn input_delays(&self) -> &[f64] {
        &self.input_delays
    }

    pub fn output_delays(&self) -> &[f64] {
        &self.output_delays
    }

    /// Equivalent system in which input and output delays have been moved
    /// into additional internal delay channels.
    pub fn normalized(&self) -> Self {
        let mut blocks = self.blocks.clone();
        let mut delays = self.internal_delays.clone();
        if let Some(&tau) = self.input_delays.first().filter(|t| **t > 0.0) {
            blocks = absorb_input_delay(&blocks);
            delays.push(tau);
        }
        if let Some(&tau) = self.output_delays.first().filter(|t| **t > 0.0) {
            blocks = absorb_output_delay(&blocks);
            delays.push(tau);
        }
        Self { blocks, internal_delays: delays, input_delays: Vec::new(), output_delays: Vec::new() }
    }
}

fn stack_rows(top: &RMat, bottom: &RMat) -> RMat {
    let cols = top.ncols().max(bottom.ncols());
    let mut out = RMat::zeros(top.nrows() + bottom.nrows(), cols);
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    out
}

fn stack_cols(left: &RMat, right: &RMat) -> RMat {
    let rows = left.nrows().max(right.nrows());
    let mut out = RMat::zeros(rows, left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

/// New channel `z_in = u`; the old input is replaced by `w_in`.
fn absorb_input_delay(h: &LftBlocks) -> LftBlocks {
    let nx = h.a.nrows();
    let nw = h.d22.nrows();
    let mut d22 = RMat::zeros(nw + 1, nw + 1);
    d22.view_mut((0, 0), (nw, nw)).copy_from(&h.d22);
    d22.view_mut((0, nw), (nw, 1)).copy_from(&h.d21);
    LftBlocks {
        f: h.f.clone(),
        a: h.a.clone(),
        b1: RMat::zeros(nx, 1),
        b2: stack_cols(&h.b2, &h.b1),
        c1: h.c1.clone(),
        c2: stack_rows(&h.c2, &RMat::zeros(1, nx)),
        d11: RMat::zeros(1, 1),
        d12: stack_cols(&h.d12, &h.d11),
        d21: stack_rows(&h.d21, &RMat::from_element(1, 1, 1.0)),
        d22,
    }
}

/// New channel `z_out = y`; the output becomes `w_out`.
fn absorb_output_delay(h: &LftBlocks) -> LftBlocks {
    let nx = h.a.nrows();
    let nw = h.d22.nrows();
    let mut d22 = RMat::zeros(nw + 1, nw + 1);
    d22.view_mut((0, 0), (nw, nw)).copy_from(&h.d22);
    d22.view_mut((nw, 0), (1, nw)).copy_from(&h.d12);
    let mut d12 = RMat::zeros(1, nw + 1);
    d12[(0, nw)] = 1.0;
    LftBlocks {
        f: h.f.clone(),
        a: h.a.clone(),
        b1: h.b1.clone(),
        b2: stack_cols(&h.b2, &RMat::zeros(nx, 1)),
        c1: RMat::zeros(1, nx),
        c2: stack_rows(&h.c2, &h.c1),
        d11: RMat::zeros(1, 1),
        d12,
        d21: stack_rows(&h.d21, &h.d11),
        d22,
    }
}

/// Rewrites an LFT delay system in standard DDAE form with augmented state
/// `[x; gamma_u; w; z]`, where `gamma_u` carries the input.
///
/// The result has order `n_x + 1 + 2 * n_w` after input/output delays have
/// been absorbed as internal channels.
pub fn lft_to_ddae(sys: &LftDelaySystem) -> Result<DdaeSystem> {
    let norm = sys.normalized();
    let h = &norm.blocks;
    let nx = h.a.nrows();
    let nw = norm.internal_delays.len();
    let n = nx + 1 + 2 * nw;
    // column offsets in the augmented state
    let (cx, cg, cw, cz) = (0, nx, nx + 1, nx + 1 + nw);
    // row offsets: x rows, z-definition rows, w rows, gamma rows
    let (rx, rz, rw, rg) = (0, nx, nx + nw, nx + 2 * nw);

    let mut e = RMat::zeros(n, n);
    e.view_mut((rx, cx), (nx, nx)).copy_from(&h.f);

    let mut a0 = RMat::zeros(n, n);
    a0.view_mut((rx, cx), (nx, nx)).copy_from(&h.a);
    a0.view_mut((rx, cg), (nx, 1)).copy_from(&h.b1);
    a0.view_mut((rx, cw), (nx, nw)).copy_from(&h.b2);
    a0.view_mut((rz, cx), (nw, nx)).copy_from(&h.c2);
    a0.view_mut((rz, cg), (nw, 1)).copy_from(&h.d21);
    a0.view_mut((rz, cw), (nw, nw)).copy_from(&h.d22);
    for k in 0..nw {
        a0[(rz + k, cz + k)] = -1.0;
        a0[(rw + k, cw + k)] = -1.0;
    }
    a0[(rg, cg)] = -1.0;

    let terms = norm
        .internal_delays
        .iter()
        .enumerate()
        .map(|(k, &tau)| {
            let mut ai = RMat::zeros(n, n);
            ai[(rw + k, cz + k)] = 1.0;
            (tau, ai)
        })
        .collect();

    let mut b = RVec::zeros(n);
    b[rg] = 1.0;

    let mut c = RRow::zeros(n);
    c.columns_mut(cx, nx).copy_from(&h.c1);
    c[cg] = h.d11[(0, 0)];
    c.columns_mut(cw, nw).copy_from(&h.d12);

    DdaeSystem::new(e, a0, terms, b, c)
}
