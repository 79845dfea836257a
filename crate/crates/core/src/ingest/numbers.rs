//! Float formatting for deterministic JSON output.

use serde::Serializer;

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(value: f64, digits: usize) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    format!("{:.*e}", digits.saturating_sub(1), value).parse().unwrap_or(value)
}

pub fn sig6<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*value, 6))
}

pub fn opt_sig6<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.serialize_f64(round_sig(*v, 6)),
        None => s.serialize_none(),
    }
}

fn number<S: Serializer>(value: f64, s: S) -> Result<S::Ok, S::Error> {
    if value.fract() == 0.0 && value.abs() < 9.0e15 {
        s.serialize_i64(value as i64)
    } else {
        s.serialize_f64(round_sig(value, 6))
    }
}

/// Integral values as JSON integers, everything else at six significant digits.
pub fn opt_number<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => number(*v, s),
        None => s.serialize_none(),
    }
}

pub fn opt_number_array<S: Serializer>(value: &Option<[f64; 4]>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    match value {
        None => s.serialize_none(),
        Some(values) => {
            let mut seq = s.serialize_seq(Some(4))?;
            for v in values {
                seq.serialize_element(&Number(*v))?;
            }
            seq.end()
        }
    }
}

struct Number(f64);

impl serde::Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        number(self.0, s)
    }
}
