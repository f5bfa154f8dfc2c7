//! JSON surface documents: four functions with exact rational coefficients
//! written as strings, a puncture list, and an optional block of expected
//! invariants.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_fn::{parse_complex, CRat, MeroFn};
use crate::error::{Error, Result};
use crate::surface::SurfaceSpec;

/// `{"terms": {"3": "1/3", "-1": "2i"}, "log": "1", "approx": false}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub terms: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub approx: bool,
}

impl FunctionDoc {
    pub fn to_mero(&self) -> Result<MeroFn> {
        let mut terms = Vec::new();
        for (k, v) in &self.terms {
            let e: i32 = k.trim().parse().map_err(|_| Error::BadCoefficient(format!("exponent `{k}`")))?;
            terms.push((e, parse_complex(v, self.approx)?));
        }
        let log = match &self.log {
            Some(l) => parse_complex(l, self.approx)?,
            None => CRat::zero(),
        };
        Ok(MeroFn::from_terms(terms).with_log(log).with_approx(self.approx))
    }

    pub fn from_mero(f: &MeroFn) -> Self {
        FunctionDoc {
            terms: f.terms().map(|(k, c)| (k.to_string(), coeff_string(c))).collect(),
            log: f.has_log().then(|| coeff_string(f.log_coeff())),
            approx: f.is_approx(),
        }
    }
}

fn coeff_string(c: &CRat) -> String {
    c.to_string().replace(['(', ')', ' '], "")
}

/// Invariants a document may pin down for regression.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformality_residual: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_plus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_minus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_multiplicities: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_order: Option<usize>,
    /// Total tangent curvature divided by π.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_curvature_over_pi: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub writhe: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<Vec<Option<[u32; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse_ends: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signed_double_points: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub double_point_family: Option<bool>,
    /// Every large sphere meets the self-intersection set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_singular: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDocument {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub punctures: Vec<String>,
    pub f1: FunctionDoc,
    pub f2: FunctionDoc,
    pub f3: FunctionDoc,
    pub f4: FunctionDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

impl SurfaceDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })
    }

    pub fn functions(&self) -> Result<[MeroFn; 4]> {
        Ok([self.f1.to_mero()?, self.f2.to_mero()?, self.f3.to_mero()?, self.f4.to_mero()?])
    }

    pub fn puncture_points(&self) -> Result<Vec<Complex64>> {
        self.punctures.iter().map(|p| parse_complex(p, true).map(|c| c.to_c64())).collect()
    }

    pub fn to_spec(&self) -> Result<SurfaceSpec> {
        SurfaceSpec::new(self.label.clone(), self.functions()?, &self.puncture_points()?)
    }

    pub fn from_spec(s: &SurfaceSpec) -> Self {
        let [f1, f2, f3, f4] = s.functions().each_ref().map(FunctionDoc::from_mero);
        SurfaceDocument {
            label: s.label.clone(),
            description: None,
            note: None,
            punctures: if s.is_punctured() { vec!["0".into()] } else { vec![] },
            f1,
            f2,
            f3,
            f4,
            expected: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
  "label": "quartic",
  "f1": {"terms": {"3": "1/3", "1": "-1"}},
  "f2": {"terms": {"1": "1"}},
  "f3": {"terms": {"2": "1/2i", "1": "i"}},
  "f4": {"terms": {"2": "1/2i", "1": "-i"}}
}"#;

    #[test]
    fn parses_and_roundtrips() {
        let d = SurfaceDocument::parse(DOC).unwrap();
        let s = d.to_spec().unwrap();
        assert_eq!(s.functions()[0].to_string(), "1/3·z^3 - z");
        let back = SurfaceDocument::from_spec(&s);
        assert_eq!(back.to_spec().unwrap().functions(), s.functions());
        assert_eq!(SurfaceDocument::parse(&back.to_json()).unwrap(), back);
    }

    #[test]
    fn log_and_punctures() {
        let d = SurfaceDocument::parse(
            r#"{"label":"p","punctures":["0"],"f1":{"terms":{"1":"i","-1":"1/2"}},"f2":{"terms":{"1":"2"}},
               "f3":{"terms":{"1":"1+i"},"log":"1"},"f4":{"terms":{"1":"-1-i"},"log":"1"}}"#,
        )
        .unwrap();
        let s = d.to_spec().unwrap();
        assert!(s.is_punctured());
        assert!(s.functions()[2].has_log());
    }

    #[test]
    fn errors_carry_positions() {
        match SurfaceDocument::parse("{\n  \"label\": 3\n}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            e => panic!("{e:?}"),
        }
        let unknown = DOC.replace("\"label\"", "\"lable\"");
        assert!(matches!(SurfaceDocument::parse(&unknown), Err(Error::Parse { .. })));
        let bad_key = DOC.replace("\"f4\": {", "\"expected\": {\"genus\": 0}, \"f4\": {");
        assert!(matches!(SurfaceDocument::parse(&bad_key), Err(Error::Parse { .. })));
        let bad_coeff = DOC.replace("1/3", "1/x");
        let d = SurfaceDocument::parse(&bad_coeff).unwrap();
        assert!(matches!(d.to_spec(), Err(Error::BadCoefficient(_))));
    }
}
