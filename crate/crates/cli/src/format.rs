//! JSON system files: `ddae`, `lft` and `interconnection` documents.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hinf_core::linalg::{RMat, RRow, RVec};
use hinf_core::model::{feedback, lft_to_ddae, parallel, series, FeedbackSign, LftBlocks, LftDelaySystem};
use hinf_core::DdaeSystem;
use serde::{Deserialize, Serialize};

/// Nesting limit for interconnections that reference other files.
const MAX_DEPTH: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed system file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid system file: {0}")]
    Invalid(String),
    #[error("invalid system: {0}")]
    System(#[from] hinf_core::Error),
}

type Matrix = Vec<Vec<f64>>;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SystemFile {
    Ddae(DdaeDoc),
    Lft(Box<LftDoc>),
    Interconnection(InterconnectionDoc),
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub delay: f64,
    #[serde(rename = "A")]
    pub a: Matrix,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DdaeDoc {
    #[serde(rename = "E")]
    pub e: Matrix,
    pub terms: Vec<TermDoc>,
    #[serde(rename = "B")]
    pub b: Matrix,
    #[serde(rename = "C")]
    pub c: Matrix,
}

/// Blocks other than `F`, `A`, `B1` and `C1` default to zero.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LftDoc {
    #[serde(rename = "F")]
    pub f: Matrix,
    #[serde(rename = "A")]
    pub a: Matrix,
    #[serde(rename = "B1")]
    pub b1: Matrix,
    #[serde(rename = "B2", default)]
    pub b2: Option<Matrix>,
    #[serde(rename = "C1")]
    pub c1: Matrix,
    #[serde(rename = "C2", default)]
    pub c2: Option<Matrix>,
    #[serde(rename = "D11", default)]
    pub d11: Option<Matrix>,
    #[serde(rename = "D12", default)]
    pub d12: Option<Matrix>,
    #[serde(rename = "D21", default)]
    pub d21: Option<Matrix>,
    #[serde(rename = "D22", default)]
    pub d22: Option<Matrix>,
    #[serde(default)]
    pub internal_delays: Vec<f64>,
    #[serde(default)]
    pub input_delays: Vec<f64>,
    #[serde(default)]
    pub output_delays: Vec<f64>,
}

/// A subsystem given inline or as a path relative to the referencing file.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum SubsystemRef {
    Path(String),
    Inline(Box<SystemFile>),
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Series,
    Parallel,
    Feedback,
}

/// `series [g1, g2]` is `g2 g1`; `feedback [g1, g2]` closes `g2` around
/// `g1` with `sign` (default -1, negative feedback).
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub op: Op,
    pub args: [String; 2],
    #[serde(default)]
    pub sign: Option<f64>,
    pub out: String,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InterconnectionDoc {
    pub subsystems: BTreeMap<String, SubsystemRef>,
    pub steps: Vec<StepDoc>,
    pub output: String,
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

fn to_matrix(name: &str, m: &Matrix, rows: usize, cols: usize) -> Result<RMat, FormatError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        let got_cols = m.first().map_or(0, Vec::len);
        return Err(invalid(format!("{name} must be {rows}x{cols}, got {}x{got_cols}", m.len())));
    }
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(invalid(format!("{name} has a non-finite entry")));
    }
    Ok(RMat::from_fn(rows, cols, |i, j| m[i][j]))
}

fn opt_matrix(name: &str, m: &Option<Matrix>, rows: usize, cols: usize) -> Result<RMat, FormatError> {
    match m {
        Some(m) => to_matrix(name, m, rows, cols),
        None => Ok(RMat::zeros(rows, cols)),
    }
}

/// Maps `-0.0` to `0.0`, so that re-reading a written document is exact.
fn unsigned_zero(x: f64) -> f64 {
    x + 0.0
}

fn from_matrix(m: &RMat) -> Matrix {
    m.row_iter().map(|r| r.iter().map(|&x| unsigned_zero(x)).collect()).collect()
}

impl DdaeDoc {
    pub fn to_system(&self) -> Result<DdaeSystem, FormatError> {
        let n = self.e.len();
        let e = to_matrix("E", &self.e, n, n)?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, t) in self.terms.iter().enumerate() {
            if !t.delay.is_finite() {
                return Err(invalid(format!("terms[{k}].delay is not finite")));
            }
            terms.push((t.delay, to_matrix(&format!("terms[{k}].A"), &t.a, n, n)?));
        }
        let b = to_matrix("B", &self.b, n, 1)?;
        let c = to_matrix("C", &self.c, 1, n)?;
        Ok(DdaeSystem::from_terms(e, terms, RVec::from_column_slice(b.as_slice()), RRow::from_row_slice(c.as_slice()))?)
    }

    /// Document whose terms are the undelayed matrix followed by the delayed
    /// ones in system order.
    pub fn from_system(sys: &DdaeSystem) -> Self {
        let mut terms = vec![TermDoc { delay: 0.0, a: from_matrix(sys.a0()) }];
        terms.extend(sys.terms().iter().map(|t| TermDoc { delay: t.delay, a: from_matrix(&t.matrix) }));
        Self {
            e: from_matrix(sys.e()),
            terms,
            b: sys.b().iter().map(|&x| vec![unsigned_zero(x)]).collect(),
            c: vec![sys.c().iter().map(|&x| unsigned_zero(x)).collect()],
        }
    }
}

impl LftDoc {
    pub fn to_lft(&self) -> Result<LftDelaySystem, FormatError> {
        let nx = self.a.len();
        let nw = self.internal_delays.len();
        let blocks = LftBlocks {
            f: to_matrix("F", &self.f, nx, nx)?,
            a: to_matrix("A", &self.a, nx, nx)?,
            b1: to_matrix("B1", &self.b1, nx, 1)?,
            b2: opt_matrix("B2", &self.b2, nx, nw)?,
            c1: to_matrix("C1", &self.c1, 1, nx)?,
            c2: opt_matrix("C2", &self.c2, nw, nx)?,
            d11: opt_matrix("D11", &self.d11, 1, 1)?,
            d12: opt_matrix("D12", &self.d12, 1, nw)?,
            d21: opt_matrix("D21", &self.d21, nw, 1)?,
            d22: opt_matrix("D22", &self.d22, nw, nw)?,
        };
        Ok(LftDelaySystem::new(blocks, self.internal_delays.clone(), self.input_delays.clone(), self.output_delays.clone())?)
    }
}

impl InterconnectionDoc {
    fn to_system(&self, base: &Path, depth: usize) -> Result<DdaeSystem, FormatError> {
        let mut env: BTreeMap<String, DdaeSystem> = BTreeMap::new();
        for (name, sub) in &self.subsystems {
            let sys = match sub {
                SubsystemRef::Path(p) => load_at_depth(&base.join(p), depth + 1)?,
                SubsystemRef::Inline(doc) => doc.to_system_at(base, depth + 1)?,
            };
            env.insert(name.clone(), sys);
        }
        for (k, step) in self.steps.iter().enumerate() {
            let get = |name: &String| env.get(name).ok_or_else(|| invalid(format!("steps[{k}]: unknown system '{name}'")));
            let (g1, g2) = (get(&step.args[0])?, get(&step.args[1])?);
            let out = match step.op {
                Op::Series => series(g1, g2)?,
                Op::Parallel => parallel(g1, g2)?,
                Op::Feedback => {
                    let sign = match step.sign.unwrap_or(-1.0) {
                        -1.0 => FeedbackSign::Negative,
                        1.0 => FeedbackSign::Positive,
                        s => return Err(invalid(format!("steps[{k}]: feedback sign must be -1 or 1, got {s}"))),
                    };
                    feedback(g1, g2, sign)?
                }
            };
            if step.sign.is_some() && step.op != Op::Feedback {
                return Err(invalid(format!("steps[{k}]: sign is only valid for feedback")));
            }
            env.insert(step.out.clone(), out);
        }
        env.remove(&self.output).ok_or_else(|| invalid(format!("unknown output system '{}'", self.output)))
    }
}

impl SystemFile {
    /// Builds the system; relative subsystem paths resolve against `base`.
    pub fn to_system(&self, base: &Path) -> Result<DdaeSystem, FormatError> {
        self.to_system_at(base, 0)
    }

    fn to_system_at(&self, base: &Path, depth: usize) -> Result<DdaeSystem, FormatError> {
        if depth > MAX_DEPTH {
            return Err(invalid(format!("subsystems nested deeper than {MAX_DEPTH}")));
        }
        match self {
            SystemFile::Ddae(d) => d.to_system(),
            SystemFile::Lft(l) => Ok(lft_to_ddae(&l.to_lft()?)?),
            SystemFile::Interconnection(i) => i.to_system(base, depth),
        }
    }
}

pub fn parse(text: &str) -> Result<SystemFile, FormatError> {
    Ok(serde_json::from_str(text)?)
}

fn load_at_depth(path: &Path, depth: usize) -> Result<DdaeSystem, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse(&text)?.to_system_at(base, depth)
}

pub fn load_system(path: &Path) -> Result<DdaeSystem, FormatError> {
    load_at_depth(path, 0)
}

/// Pretty-printed `ddae` document with shortest round-trip floats.
pub fn to_ddae_json(sys: &DdaeSystem) -> String {
    let doc = SystemFile::Ddae(DdaeDoc::from_system(sys));
    let mut s = serde_json::to_string_pretty(&doc).expect("finite matrices serialize");
    s.push('\n');
    s
}
