//! JSON result documents. Finite floats are written with 17 significant
//! digits, non-finite ones as `null`, and an infinite frequency as `"inf"`.

use std::io;

use hinf_core::extrema::ExtremumPoint;
use hinf_core::strongnorm::Frequency;
use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencyValue {
    Finite(f64),
    Text(String),
}

impl From<Frequency> for FrequencyValue {
    fn from(f: Frequency) -> Self {
        match f {
            Frequency::Finite(w) => FrequencyValue::Finite(w),
            Frequency::Infinite => FrequencyValue::Text("inf".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
pub struct ExtremumDoc {
    pub omega: f64,
    pub xi: f64,
    pub kind: String,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    pub predictor_omega: f64,
}

impl From<&ExtremumPoint> for ExtremumDoc {
    fn from(p: &ExtremumPoint) -> Self {
        Self {
            omega: p.omega,
            xi: p.xi,
            kind: p.kind.as_str().into(),
            converged: p.converged,
            residual: p.residual,
            iterations: p.iterations,
            predictor_omega: p.predictor_omega,
        }
    }
}

/// Settings used for a run. `corrector_tol` is `null` for the default
/// relative tolerance and `grid_density` is `null` when no grid was used.
#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
pub struct ConfigDoc {
    #[serde(rename = "N")]
    pub n: usize,
    pub axis_tol: f64,
    pub corrector_tol: Option<f64>,
    pub rank_tol: f64,
    pub max_iter: usize,
    pub grid_density: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
pub struct ResultDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencyValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_peak: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotic_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_delays: Option<Vec<usize>>,
    pub extrema: Vec<ExtremumDoc>,
    pub discretization_order: usize,
    pub delta_pencil_size: usize,
    pub warnings: Vec<String>,
    pub config: ConfigDoc,
}

/// Pretty printer that writes every float in `{:.16e}` form.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> ResultDocument {
        ResultDocument {
            strong_norm: Some(4.0),
            frequency: Some(Frequency::Infinite.into()),
            standard_peak: Some(2.578_812_345_678_9),
            peak_frequency: Some(0.1 + 0.2),
            asymptotic_norm: Some(4.0),
            theta_star: Some(vec![0.0, std::f64::consts::PI]),
            active_delays: Some(vec![1, 2]),
            extrema: vec![ExtremumDoc {
                omega: 1e-300,
                xi: 123456.789,
                kind: "maximum".into(),
                converged: true,
                residual: 3e-17,
                iterations: 2,
                predictor_omega: 1.0 / 3.0,
            }],
            discretization_order: 22,
            delta_pencil_size: 85,
            warnings: vec![],
            config: ConfigDoc { n: 20, axis_tol: 1e-6, corrector_tol: None, rank_tol: 1e-10, max_iter: 50, grid_density: Some(128) },
        }
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let text = to_json(&doc());
        assert!(text.contains("\"strong_norm\": 4.0000000000000000e0"), "{text}");
        assert!(text.contains("\"frequency\": \"inf\""));
        assert!(text.contains("3.1415926535897931e0"));
    }

    #[test]
    fn round_trips_losslessly() {
        let d = doc();
        let back: ResultDocument = serde_json::from_str(&to_json(&d)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn non_finite_values_become_null() {
        let mut d = doc();
        d.extrema[0].residual = f64::NAN;
        let text = to_json(&d);
        assert!(text.contains("\"residual\": null"), "{text}");
    }
}
