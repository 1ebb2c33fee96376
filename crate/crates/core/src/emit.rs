//! JSON documents for standard-form data.
//!
//! Matrices are dense, row-major nested arrays; the column count of every
//! matrix is the variable count, taken from `c` (LP, cone) or `q` (QP).
//! Finite numbers are written with 17 significant digits so that decoding
//! reproduces every bit; non-finite numbers are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::fmt;
use std::io;

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::expr::VarId;
use crate::reduction::Stage;
use crate::standard::{ConeData, ConeDims, LpData, QpData, VarSlot};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Schema(String),
}

fn schema(msg: impl Into<String>) -> EmitError {
    EmitError::Schema(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(NumVisitor)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarOffset {
    pub id: u32,
    pub name: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDimsDoc {
    pub zero: usize,
    pub nonneg: usize,
    pub soc: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LpDoc {
    c: Vec<Num>,
    offset: Num,
    #[serde(rename = "G")]
    g: Vec<Vec<Num>>,
    h: Vec<Num>,
    #[serde(rename = "A")]
    a: Vec<Vec<Num>>,
    b: Vec<Num>,
    var_offsets: Vec<VarOffset>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QpDoc {
    #[serde(rename = "P")]
    p: Vec<Vec<Num>>,
    q: Vec<Num>,
    r: Num,
    #[serde(rename = "G")]
    g: Vec<Vec<Num>>,
    h: Vec<Num>,
    #[serde(rename = "A")]
    a: Vec<Vec<Num>>,
    b: Vec<Num>,
    var_offsets: Vec<VarOffset>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeDoc {
    c: Vec<Num>,
    offset: Num,
    #[serde(rename = "A")]
    a: Vec<Vec<Num>>,
    b: Vec<Num>,
    cones: ConeDimsDoc,
    var_offsets: Vec<VarOffset>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum DataDoc {
    Qp(QpDoc),
    Cone(ConeDoc),
    Lp(LpDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    schema_version: String,
    target: String,
    chain: Vec<String>,
    data: DataDoc,
}

/// Standard-form data plus the names of the reductions that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct EmitDocument {
    pub chain: Vec<String>,
    pub data: StandardForm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StandardForm {
    Lp(LpData),
    Qp(QpData),
    Cone(ConeData),
}

impl StandardForm {
    pub fn target(&self) -> &'static str {
        match self {
            StandardForm::Lp(_) => "lp",
            StandardForm::Qp(_) => "qp",
            StandardForm::Cone(_) => "cone",
        }
    }

    pub fn from_stage(stage: &Stage) -> Option<StandardForm> {
        match stage {
            Stage::Lp(d) => Some(StandardForm::Lp(d.clone())),
            Stage::Qp(d) => Some(StandardForm::Qp(d.clone())),
            Stage::Cone(d) => Some(StandardForm::Cone(d.clone())),
            _ => None,
        }
    }

    pub fn into_stage(self) -> Stage {
        match self {
            StandardForm::Lp(d) => Stage::Lp(d),
            StandardForm::Qp(d) => Stage::Qp(d),
            StandardForm::Cone(d) => Stage::Cone(d),
        }
    }
}

fn vec_doc(v: &DVector<f64>) -> Vec<Num> {
    v.iter().map(|x| Num(*x)).collect()
}

fn mat_doc(m: &DMatrix<f64>) -> Vec<Vec<Num>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Num(m[(i, j)])).collect()).collect()
}

fn slots_doc(vars: &[VarSlot]) -> Vec<VarOffset> {
    vars.iter().map(|s| VarOffset { id: s.id.0, name: s.name.clone(), start: s.start, len: s.len }).collect()
}

fn vec_of(v: &[Num]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|x| x.0))
}

fn mat_of(name: &str, rows: &[Vec<Num>], ncols: usize) -> Result<DMatrix<f64>, EmitError> {
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(schema(format!("{name} row {i} has {} entries, expected {ncols}", rows[i].len())));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j].0))
}

fn same_len(name: &str, found: usize, expected: usize) -> Result<(), EmitError> {
    if found == expected {
        Ok(())
    } else {
        Err(schema(format!("{name} has {found} entries, expected {expected}")))
    }
}

fn slots_of(offsets: &[VarOffset], n: usize) -> Result<Vec<VarSlot>, EmitError> {
    let mut slots = Vec::with_capacity(offsets.len());
    for o in offsets {
        let end = o.start.checked_add(o.len).filter(|e| *e <= n);
        if end.is_none() || o.len == 0 {
            return Err(schema(format!("variable `{}` spans {}+{} outside {n} columns", o.name, o.start, o.len)));
        }
        slots.push(VarSlot { id: VarId(o.id), name: o.name.clone(), start: o.start, len: o.len });
    }
    Ok(slots)
}

impl EmitDocument {
    pub fn new(chain: Vec<String>, data: StandardForm) -> Self {
        EmitDocument { chain, data }
    }

    fn envelope(&self) -> Envelope {
        let data = match &self.data {
            StandardForm::Lp(d) => DataDoc::Lp(LpDoc {
                c: vec_doc(&d.c),
                offset: Num(d.offset),
                g: mat_doc(&d.g),
                h: vec_doc(&d.h),
                a: mat_doc(&d.a),
                b: vec_doc(&d.b),
                var_offsets: slots_doc(&d.vars),
            }),
            StandardForm::Qp(d) => DataDoc::Qp(QpDoc {
                p: mat_doc(&d.p),
                q: vec_doc(&d.q),
                r: Num(d.r),
                g: mat_doc(&d.g),
                h: vec_doc(&d.h),
                a: mat_doc(&d.a),
                b: vec_doc(&d.b),
                var_offsets: slots_doc(&d.vars),
            }),
            StandardForm::Cone(d) => DataDoc::Cone(ConeDoc {
                c: vec_doc(&d.c),
                offset: Num(d.offset),
                a: mat_doc(&d.a),
                b: vec_doc(&d.b),
                cones: ConeDimsDoc { zero: d.cones.zero, nonneg: d.cones.nonneg, soc: d.cones.soc.clone() },
                var_offsets: slots_doc(&d.vars),
            }),
        };
        Envelope {
            schema_version: SCHEMA_VERSION.to_string(),
            target: self.data.target().to_string(),
            chain: self.chain.clone(),
            data,
        }
    }

    pub fn write_to<W: io::Write>(&self, w: W) -> Result<(), EmitError> {
        let mut ser = serde_json::Serializer::with_formatter(w, SeventeenDigits);
        self.envelope().serialize(&mut ser)?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory cannot fail");
        out.push(b'\n');
        String::from_utf8(out).expect("JSON output is UTF-8")
    }

    pub fn from_json(text: &str) -> Result<EmitDocument, EmitError> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.schema_version != SCHEMA_VERSION {
            return Err(schema(format!("unsupported schema version `{}`", env.schema_version)));
        }
        let data = match (env.target.as_str(), env.data) {
            ("lp", DataDoc::Lp(d)) => {
                let n = d.c.len();
                same_len("h", d.h.len(), d.g.len())?;
                same_len("b", d.b.len(), d.a.len())?;
                StandardForm::Lp(LpData {
                    c: vec_of(&d.c),
                    offset: d.offset.0,
                    g: mat_of("G", &d.g, n)?,
                    h: vec_of(&d.h),
                    a: mat_of("A", &d.a, n)?,
                    b: vec_of(&d.b),
                    vars: slots_of(&d.var_offsets, n)?,
                })
            }
            ("qp", DataDoc::Qp(d)) => {
                let n = d.q.len();
                same_len("P", d.p.len(), n)?;
                same_len("h", d.h.len(), d.g.len())?;
                same_len("b", d.b.len(), d.a.len())?;
                StandardForm::Qp(QpData {
                    p: mat_of("P", &d.p, n)?,
                    q: vec_of(&d.q),
                    r: d.r.0,
                    g: mat_of("G", &d.g, n)?,
                    h: vec_of(&d.h),
                    a: mat_of("A", &d.a, n)?,
                    b: vec_of(&d.b),
                    vars: slots_of(&d.var_offsets, n)?,
                })
            }
            ("cone", DataDoc::Cone(d)) => {
                let n = d.c.len();
                let cones = ConeDims { zero: d.cones.zero, nonneg: d.cones.nonneg, soc: d.cones.soc };
                if cones.soc.contains(&0) {
                    return Err(schema("second-order cones need at least one entry"));
                }
                let total = cones
                    .zero
                    .checked_add(cones.nonneg)
                    .and_then(|t| cones.soc.iter().try_fold(t, |acc, q| acc.checked_add(*q)))
                    .ok_or_else(|| schema("cone dimensions overflow"))?;
                same_len("A", d.a.len(), total)?;
                same_len("b", d.b.len(), total)?;
                StandardForm::Cone(ConeData {
                    c: vec_of(&d.c),
                    offset: d.offset.0,
                    a: mat_of("A", &d.a, n)?,
                    b: vec_of(&d.b),
                    cones,
                    vars: slots_of(&d.var_offsets, n)?,
                })
            }
            (t, _) => return Err(schema(format!("data does not match target `{t}`"))),
        };
        Ok(EmitDocument { chain: env.chain, data })
    }
}

/// `%.17g` for floats, compact JSON otherwise.
#[derive(Default)]
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_g17(v).as_bytes())
    }
}

/// C's `%.17g`.
pub fn format_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    strip_zeros(&format!("{v:.decimals$}")).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c() {
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(-0.5), "-0.5");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_g17(1e20), "1e+20");
        assert_eq!(format_g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(format_g17(123456.0), "123456");
        assert_eq!(format_g17(-0.0), "-0");
        assert_eq!(format_g17(0.0001), "0.0001");
    }

    #[test]
    fn g17_round_trips() {
        for v in [0.1, 2.0 / 3.0, -1e-300, 1.7976931348623157e308, 5e-324, 12345.678901234567] {
            assert_eq!(format_g17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(format_g17(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn negative_zero_keeps_its_sign() {
        let mut d = lp();
        d.offset = -0.0;
        let doc = EmitDocument::new(vec![], StandardForm::Lp(d));
        let back = EmitDocument::from_json(&doc.to_json()).unwrap();
        let StandardForm::Lp(d) = back.data else { panic!("target changed") };
        assert!(d.offset == 0.0 && d.offset.is_sign_negative());
    }

    fn lp() -> LpData {
        LpData {
            c: DVector::from_vec(vec![0.0, 0.0, 1.0]),
            offset: 0.25,
            g: DMatrix::from_row_slice(1, 3, &[1.0, 0.1, -1.0]),
            h: DVector::from_vec(vec![f64::INFINITY]),
            a: DMatrix::zeros(0, 3),
            b: DVector::zeros(0),
            vars: vec![VarSlot { id: VarId(0), name: "x".into(), start: 0, len: 3 }],
        }
    }

    #[test]
    fn lp_round_trip() {
        let doc = EmitDocument::new(vec!["stuff_lp".into()], StandardForm::Lp(lp()));
        let text = doc.to_json();
        assert!(text.contains("\"h\":[\"inf\"]"), "{text}");
        assert!(text.contains("0.10000000000000001"));
        assert_eq!(EmitDocument::from_json(&text).unwrap(), doc);
    }

    #[test]
    fn shape_errors() {
        let doc = EmitDocument::new(vec![], StandardForm::Lp(lp()));
        let bad = doc.to_json().replace("[1,0.10000000000000001,-1]", "[1,-1]");
        assert!(matches!(EmitDocument::from_json(&bad), Err(EmitError::Schema(_))));
        let wrong_target = doc.to_json().replace("\"target\":\"lp\"", "\"target\":\"cone\"");
        assert!(EmitDocument::from_json(&wrong_target).is_err());
        assert!(matches!(EmitDocument::from_json("{"), Err(EmitError::Json(_))));
    }
}
