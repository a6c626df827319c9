//! JSON-lines curve tables.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PipelineError;
use crate::curve::{EllipticCurve, RationalPoint};

/// Integers as JSON numbers when they fit in 64 bits, decimal strings
/// otherwise; both forms are accepted on input.
pub(crate) mod big_ints {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum IntLike {
        Num(i64),
        Str(String),
    }

    pub fn to_json<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            match x.to_i64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&x.to_string())?,
            }
        }
        seq.end()
    }

    pub fn from_json<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<IntLike>::deserialize(d)?;
        raw.into_iter()
            .map(|v| match v {
                IntLike::Num(n) => Ok(BigInt::from(n)),
                IntLike::Str(s) => s.trim().parse::<BigInt>().map_err(serde::de::Error::custom),
            })
            .collect()
    }

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        to_json(xs, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        from_json(d)
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &Option<Vec<BigInt>>, s: S) -> Result<S::Ok, S::Error> {
            match xs {
                Some(v) => to_json(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<BigInt>>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(deserialize_with = "super::from_json")] Vec<BigInt>);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

/// One line of a curve table. `generator` is `[x_n, x_d, y_n, y_d]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub label: String,
    #[serde(with = "big_ints")]
    pub a: Vec<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "big_ints::opt")]
    pub generator: Option<Vec<BigInt>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl CurveRecord {
    pub fn curve(&self) -> Result<EllipticCurve, PipelineError> {
        let a: [BigInt; 5] = self
            .a
            .clone()
            .try_into()
            .map_err(|_| PipelineError::Validation(format!("{}: expected five coefficients", self.label)))?;
        EllipticCurve::new(a, Some(self.label.clone()))
            .map_err(|e| PipelineError::Validation(format!("{}: {e}", self.label)))
    }

    pub fn generator_point(&self) -> Result<Option<RationalPoint>, PipelineError> {
        let Some(g) = &self.generator else { return Ok(None) };
        let [xn, xd, yn, yd] = g.as_slice() else {
            return Err(PipelineError::Validation(format!("{}: generator needs [x_n, x_d, y_n, y_d]", self.label)));
        };
        if xd.is_zero() || yd.is_zero() {
            return Err(PipelineError::Validation(format!("{}: zero denominator in generator", self.label)));
        }
        Ok(Some(RationalPoint::new(BigRational::new(xn.clone(), xd.clone()), BigRational::new(yn.clone(), yd.clone()))))
    }

    /// Nonsingular model, and the generator (if any) on it.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let e = self.curve()?;
        if let Some(g) = self.generator_point()? {
            if !e.contains(&g) {
                return Err(PipelineError::Validation(format!("{}: generator is not on the curve", self.label)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Ingested {
    pub records: Vec<CurveRecord>,
    pub errors: Vec<LineError>,
}

impl Ingested {
    pub fn find(&self, label: &str) -> Option<&CurveRecord> {
        self.records.iter().find(|r| r.label == label)
    }
}

/// Parse a JSON-lines table from a string. Blank lines and lines starting
/// with `#` are skipped; bad lines are reported with 1-based numbers.
pub fn parse_curves(text: &str) -> Ingested {
    let mut out = Ingested::default();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let rec = serde_json::from_str::<CurveRecord>(t)
            .map_err(|e| PipelineError::Validation(format!("invalid JSON: {e}")))
            .and_then(|r| r.validate().map(|_| r));
        match rec {
            Ok(r) => out.records.push(r),
            Err(e) => out.errors.push(LineError { line: i + 1, message: e.to_string() }),
        }
    }
    out
}

pub fn ingest_curves(path: &Path) -> Result<Ingested, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(parse_curves(&text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let text = r#"{"label":"37a1","a":[0,0,1,-1,0],"generator":[0,1,0,1]}

# comment
{"label":"sing","a":[0,0,0,0,0]}
{"label":"off","a":[0,0,1,-1,0],"generator":[1,1,1,1]}
not json
{"label":"str","a":[0,0,"1","-1",0],"notes":"string coefficients"}
"#;
        let got = parse_curves(text);
        assert_eq!(got.records.len(), 2);
        assert_eq!(got.records[0].generator_point().unwrap(), Some(RationalPoint::from_i64(0, 0)));
        let lines: Vec<usize> = got.errors.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![4, 5, 6]);
        assert!(got.errors[1].message.contains("not on the curve"));
        assert_eq!(got.find("str").unwrap().a, got.records[0].a);
        // wide coefficients survive a round trip as strings
        let wide = r#"{"label":"w","a":[0,0,0,"-1180591620717411303424",5]}"#;
        let rec: CurveRecord = serde_json::from_str(wide).unwrap();
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(json, wide);
        assert!(parse_curves("").records.is_empty());
    }
}
