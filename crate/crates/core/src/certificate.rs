//! Pass/fail reports carrying the numbers behind each verdict.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `f64` that survives JSON round trips even when infinite or NaN
/// (written as the strings `"inf"`, `"-inf"`, `"nan"`).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(x) => Ok(Num(x)),
            Raw::S(s) => match s.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "nan" => Ok(Num(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Largest certified ratio (ratio certificates).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_attained: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<Num>,
    /// Named scalar evidence.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, Num>,
    /// Named evidence arrays.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub series: BTreeMap<String, Vec<Num>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: String,
    pub pass: bool,
    pub evidence: Evidence,
    pub parameters: serde_json::Value,
}

impl Certificate {
    pub fn new(claim: &str, parameters: serde_json::Value) -> Self {
        Certificate {
            claim: claim.to_string(),
            pass: false,
            evidence: Evidence::default(),
            parameters,
        }
    }

    pub fn value(&mut self, name: &str, x: f64) -> &mut Self {
        self.evidence.values.insert(name.to_string(), Num(x));
        self
    }

    pub fn series(&mut self, name: &str, xs: impl IntoIterator<Item = f64>) -> &mut Self {
        self.evidence
            .series
            .insert(name.to_string(), xs.into_iter().map(Num).collect());
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.evidence.values.get(name).map(|n| n.0)
    }

    pub fn get_series(&self, name: &str) -> Option<Vec<f64>> {
        self.evidence.series.get(name).map(|v| v.iter().map(|n| n.0).collect())
    }
}
