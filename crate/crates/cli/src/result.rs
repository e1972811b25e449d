//! Serialized embedding result (`"schema": 1`).

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use starmetric::{parse_rational, to_decimal, Rational, SearchReport, StarEmbedding};

pub const SCHEMA: u32 = 1;
pub const DECIMAL_DIGITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    pub decimal: String,
}

impl ExactValue {
    pub fn new(r: &Rational) -> Self {
        ExactValue {
            exact: r.to_string(),
            decimal: to_decimal(r, DECIMAL_DIGITS),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub sha256: String,
    pub points: usize,
}

impl InputDigest {
    pub fn of(bytes: &[u8], points: usize) -> Self {
        InputDigest {
            sha256: hex::encode(Sha256::digest(bytes)),
            points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchInfo {
    pub iterations: usize,
    pub max_envelope_breakpoints: usize,
    pub probes: usize,
    pub arithmetic: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub parse_seconds: f64,
    pub embed_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedResult {
    pub schema: u32,
    pub input: InputDigest,
    pub lambda_star: String,
    pub lambda_star_decimal: String,
    /// Site label to hub edge length, in input order.
    #[serde(serialize_with = "ser_edges", deserialize_with = "de_edges")]
    pub hub_edges: Vec<(String, ExactValue)>,
    pub search: SearchInfo,
    pub timing: Timing,
}

impl EmbedResult {
    pub fn new(
        star: &StarEmbedding,
        report: &SearchReport,
        input: InputDigest,
        timing: Timing,
    ) -> Self {
        EmbedResult {
            schema: SCHEMA,
            input,
            lambda_star: star.lambda_star.to_string(),
            lambda_star_decimal: to_decimal(&star.lambda_star, DECIMAL_DIGITS),
            hub_edges: star
                .labels
                .iter()
                .zip(&star.hub_len)
                .map(|(l, c)| (l.clone(), ExactValue::new(c)))
                .collect(),
            search: SearchInfo {
                iterations: report.iterations,
                max_envelope_breakpoints: report.max_envelope_breakpoints,
                probes: report.probes,
                arithmetic: format!("{:?}", report.arithmetic).to_lowercase(),
            },
            timing,
        }
    }

    /// The star as stated by the exact fields.
    pub fn to_star(&self) -> Result<StarEmbedding, String> {
        let parse = |what: &str, s: &str| {
            parse_rational(s).ok_or_else(|| format!("{what}: {s:?} is not an exact rational"))
        };
        if self.schema != SCHEMA {
            return Err(format!("unsupported schema {}", self.schema));
        }
        let lambda_star = parse("lambda_star", &self.lambda_star)?;
        let mut labels = Vec::with_capacity(self.hub_edges.len());
        let mut hub_len = Vec::with_capacity(self.hub_edges.len());
        for (label, v) in &self.hub_edges {
            labels.push(label.clone());
            hub_len.push(parse(label, &v.exact)?);
        }
        Ok(StarEmbedding {
            labels,
            hub_len,
            lambda_star,
        })
    }
}

fn ser_edges<S: Serializer>(edges: &[(String, ExactValue)], s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(edges.len()))?;
    for (k, v) in edges {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

fn de_edges<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(String, ExactValue)>, D::Error> {
    let map = serde_json::Map::<String, serde_json::Value>::deserialize(d)?;
    map.into_iter()
        .map(|(k, v)| {
            serde_json::from_value(v)
                .map(|v| (k, v))
                .map_err(D::Error::custom)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use starmetric::{embed_with_report, parse_metric, rat, Format};

    #[test]
    fn round_trip_keeps_order_and_exact_values() {
        let text = "labels: z a m\n0 1/3 1\n1/3 0 1\n1 1 0\n";
        let m = parse_metric(text, Format::Matrix).unwrap();
        let (star, report) = embed_with_report(&m).unwrap();
        let r = EmbedResult::new(
            &star,
            &report,
            InputDigest::of(text.as_bytes(), 3),
            Timing {
                parse_seconds: 0.0,
                embed_seconds: 0.0,
            },
        );
        let json = serde_json::to_string_pretty(&r).unwrap();
        let back: EmbedResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_star().unwrap(), star);
        let labels: Vec<_> = back.hub_edges.iter().map(|e| e.0.as_str()).collect();
        assert_eq!(labels, ["z", "a", "m"]);
        // c_z = (1/3 + 1 - 1)/2
        assert_eq!(
            back.hub_edges[0].1,
            ExactValue {
                exact: "1/6".into(),
                decimal: "0.16666666666666666667".into()
            }
        );
    }

    #[test]
    fn digest_is_sha256_hex() {
        let d = InputDigest::of(b"abc", 0);
        assert_eq!(
            d.sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn rejects_inexact_fields() {
        let v = ExactValue::new(&rat(1, 2));
        assert_eq!(v.decimal, "0.5");
        let r = EmbedResult {
            schema: 1,
            input: InputDigest::of(b"", 2),
            lambda_star: "one".into(),
            lambda_star_decimal: "1".into(),
            hub_edges: vec![("0".into(), v.clone()), ("1".into(), v)],
            search: SearchInfo {
                iterations: 2,
                max_envelope_breakpoints: 0,
                probes: 0,
                arithmetic: "i128".into(),
            },
            timing: Timing {
                parse_seconds: 0.0,
                embed_seconds: 0.0,
            },
        };
        assert!(r.to_star().is_err());
        assert!(EmbedResult { schema: 2, ..r }.to_star().is_err());
    }
}
