//! Bound reports and the fixed-precision float formatting used in every
//! machine-readable output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

/// 17 significant digits, scientific notation; non-finite values become
/// the strings "inf", "-inf" and "nan".
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = serde_json::value::RawValue::from_string(format_f64(*x)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_str(&format_f64(*x))
    }
}

pub fn serialize_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_f64(v, s),
        None => s.serialize_none(),
    }
}

pub fn serialize_f64_slice<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&F17(*x))?;
    }
    seq.end()
}

pub fn serialize_f64_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &F17(*v))?;
    }
    map.end()
}

/// Wrapper that serializes an f64 with [`format_f64`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_f64(&self.0, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PayneWeinberger,
    ExactBox,
    BrascampLieb,
    CorollaryRadial,
    BallExpWeight,
    OptimalRadialWeight,
    ExactBall,
    WeinbergerUpper,
    ReverseComparison,
    Orlicz,
    Subbotin,
    GaussianComplement,
    Bcgm,
    CertifiedWeight,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PayneWeinberger => "payne_weinberger",
            Method::ExactBox => "exact_box",
            Method::BrascampLieb => "brascamp_lieb",
            Method::CorollaryRadial => "corollary_radial",
            Method::BallExpWeight => "ball_exp_weight",
            Method::OptimalRadialWeight => "optimal_radial_weight",
            Method::ExactBall => "exact_ball",
            Method::WeinbergerUpper => "weinberger_upper",
            Method::ReverseComparison => "reverse_comparison",
            Method::Orlicz => "orlicz",
            Method::Subbotin => "subbotin",
            Method::GaussianComplement => "gaussian_complement",
            Method::Bcgm => "bcgm",
            Method::CertifiedWeight => "certified_weight",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Lower,
    Upper,
    Exact,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
            BoundKind::Exact => "exact",
        }
    }
}

/// One bound on λ₁: its value, how it was obtained and whether the
/// hypotheses of the method were verified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(serialize_with = "serialize_f64")]
    pub value: f64,
    pub method: Method,
    pub kind: BoundKind,
    pub assumptions_ok: bool,
    #[serde(serialize_with = "serialize_f64_map")]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(method: Method, kind: BoundKind, value: f64) -> Self {
        Self { value, method, kind, assumptions_ok: true, diagnostics: BTreeMap::new(), notes: Vec::new() }
    }

    pub fn lower(method: Method, value: f64) -> Self {
        Self::new(method, BoundKind::Lower, value)
    }

    /// A report whose hypotheses failed: value 0, flag false.
    pub fn inapplicable(method: Method, kind: BoundKind, why: impl Into<String>) -> Self {
        let mut r = Self::new(method, kind, 0.0);
        r.assumptions_ok = false;
        r.notes.push(why.into());
        r
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    /// Usable as a certified lower bound (lower or exact, hypotheses met).
    pub fn is_certified_lower(&self) -> bool {
        self.assumptions_ok && matches!(self.kind, BoundKind::Lower | BoundKind::Exact)
    }

    pub fn is_reference_upper(&self) -> bool {
        self.assumptions_ok && matches!(self.kind, BoundKind::Upper | BoundKind::Exact)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        let s = format_f64(x);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(format_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn report_serializes_with_raw_numbers() {
        let r = BoundReport::lower(Method::ExactBox, 2.0).with("R", 1.0);
        let js = serde_json::to_string(&r).unwrap();
        assert_eq!(
            js,
            r#"{"value":2.0000000000000000e0,"method":"exact_box","kind":"lower","assumptions_ok":true,"diagnostics":{"R":1.0000000000000000e0}}"#
        );
        let back: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(back["value"].as_f64(), Some(2.0));
    }
}
