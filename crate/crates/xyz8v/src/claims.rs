//! Pass/fail records shared by every verification routine.

use serde::{Serialize, Serializer};

/// One checked identity: label, residual, tolerance and verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub label: String,
    pub description: String,
    #[serde(serialize_with = "ser_f64")]
    pub residual: f64,
    #[serde(serialize_with = "ser_f64")]
    pub tolerance: f64,
    pub passed: bool,
    pub context: String,
}

impl Claim {
    pub fn new(label: &str, description: &str, residual: f64, tolerance: f64) -> Self {
        Claim {
            label: label.to_string(),
            description: description.to_string(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            context: String::new(),
        }
    }

    /// A boolean check; residual is 0 on success and 1 on failure.
    pub fn check(label: &str, description: &str, ok: bool) -> Self {
        Self::new(label, description, if ok { 0.0 } else { 1.0 }, 0.5)
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = context.into();
        self
    }
}

/// Folds many residuals of the same identity into one claim holding the worst.
pub fn worst(label: &str, description: &str, residuals: impl IntoIterator<Item = f64>, tolerance: f64) -> Claim {
    let mut w: f64 = 0.0;
    let mut count = 0usize;
    for r in residuals {
        count += 1;
        if !r.is_finite() {
            w = f64::INFINITY;
        } else {
            w = w.max(r);
        }
    }
    Claim::new(label, description, w, tolerance).with_context(format!("{count} samples"))
}

/// Writes a float with 17 significant digits; non-finite values become null.
pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = serde_json::value::RawValue::from_string(fmt17(*x)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_none()
    }
}

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a complex number as [re, im] with 17 significant digits.
pub fn ser_c64<S: Serializer>(z: &crate::linalg::C64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&F17(z.re))?;
    t.serialize_element(&F17(z.im))?;
    t.end()
}

pub fn ser_c64_vec<S: Serializer>(v: &[crate::linalg::C64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&C17(*z))?;
    }
    seq.end()
}

/// Float wrapper serialized through [`ser_f64`].
#[derive(Clone, Copy, Debug)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_f64(&self.0, s)
    }
}

/// Complex wrapper serialized through [`ser_c64`].
#[derive(Clone, Copy, Debug)]
pub struct C17(pub crate::linalg::C64);

impl Serialize for C17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_c64(&self.0, s)
    }
}
