//! Report formatting: 17 significant digits, CSV and JSON writers.

use std::io::Write;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` with 17 significant digits; empty for non-finite values.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// Serialize a float with 17 significant digits (null when non-finite).
pub fn sig17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = RawValue::from_string(fmt17(*x)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_none()
    }
}

pub fn sig17_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct One(f64);
    impl Serialize for One {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            sig17(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&One(x))?;
    }
    seq.end()
}

/// Rows that can be written as CSV.
pub trait Tabular {
    fn header() -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

pub fn write_csv<T: Tabular, W: Write>(rows: &[T], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(T::header())?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}
