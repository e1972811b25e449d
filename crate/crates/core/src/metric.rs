//! Finite metric spaces, star embeddings, and their exact verification.

use std::collections::HashSet;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, MetricViolation, Result};
use crate::numeric::{parse_rational, rational_gcd, Rational};

/// Input text formats for a distance matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Whitespace-separated rows with an optional `labels: a b c` header.
    Matrix,
    /// `{"points": [...], "distances": [[...], ...]}`; entries are numbers
    /// or `"p/q"` strings.
    Json,
}

/// An n-point metric space (n ≥ 2) with exact rational distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpace {
    labels: Vec<String>,
    dist: Vec<Rational>,
}

/// Distances expressed as integer multiples of a common unit, with the
/// integers sharing no common factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerDistances {
    pub unit: Rational,
    pub dist: Vec<BigInt>,
}

impl MetricSpace {
    /// Validates positivity, symmetry and the triangle inequality.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(MetricViolation::TooFewPoints(n).into());
        }
        if labels.len() != n {
            return Err(Error::Parse(format!(
                "{} labels for {n} rows",
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(MetricViolation::DuplicateLabel(l.clone()).into());
            }
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricViolation::NotSquare {
                    rows: n,
                    row,
                    len: r.len(),
                }
                .into());
            }
        }
        let dist: Vec<Rational> = rows.into_iter().flatten().collect();
        let space = MetricSpace { labels, dist };
        space.validate()?;
        Ok(space)
    }

    /// Labels default to `"0"`, `"1"`, ….
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let labels = default_labels(rows.len());
        Self::new(labels, rows)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i * self.len() + j]
    }

    pub fn max_distance(&self) -> Rational {
        self.dist.iter().max().cloned().expect("n >= 2")
    }

    pub fn min_distance(&self) -> Rational {
        self.dist
            .iter()
            .filter(|d| d.is_positive())
            .min()
            .cloned()
            .expect("n >= 2")
    }

    /// The same space with every distance multiplied by `alpha > 0`.
    pub fn scaled(&self, alpha: &Rational) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(Error::Domain(format!(
                "scale factor {alpha} must be positive"
            )));
        }
        Ok(MetricSpace {
            labels: self.labels.clone(),
            dist: self.dist.iter().map(|d| d * alpha).collect(),
        })
    }

    pub fn integer_distances(&self) -> IntegerDistances {
        let unit = rational_gcd(self.dist.iter()).expect("n >= 2 has a positive distance");
        let dist = self
            .dist
            .iter()
            .map(|d| {
                let q = d / &unit;
                debug_assert!(q.is_integer());
                q.to_integer()
            })
            .collect();
        IntegerDistances { unit, dist }
    }

    fn validate(&self) -> Result<(), MetricViolation> {
        let n = self.len();
        for i in 0..n {
            if !self.dist(i, i).is_zero() {
                return Err(MetricViolation::NonZeroDiagonal { i });
            }
            for j in 0..n {
                if i != j && !self.dist(i, j).is_positive() {
                    return Err(MetricViolation::NonPositive { i, j });
                }
                if self.dist(i, j) != self.dist(j, i) {
                    return Err(MetricViolation::Asymmetric {
                        i: i.min(j),
                        j: i.max(j),
                    });
                }
            }
        }
        let ints = self.integer_distances();
        let bits = ints.dist.iter().map(|d| d.bits()).max().unwrap_or(0);
        match bits {
            0..=62 => {
                let small: Vec<i64> = ints.dist.iter().map(|d| d.to_i64().unwrap()).collect();
                check_triangle(n, &small)
            }
            _ => check_triangle(n, &ints.dist),
        }
    }

    pub fn to_matrix_text(&self) -> String {
        let mut out = String::new();
        if self.labels != default_labels(self.len()) {
            out.push_str("labels:");
            for l in &self.labels {
                out.push(' ');
                out.push_str(l);
            }
            out.push('\n');
        }
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len())
                .map(|j| self.dist(i, j).to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn to_json_text(&self) -> String {
        let distances: Vec<Vec<serde_json::Value>> = (0..self.len())
            .map(|i| {
                (0..self.len())
                    .map(|j| {
                        let d = self.dist(i, j);
                        if d.is_integer() {
                            serde_json::Value::Number(serde_json::Number::from_string_unchecked(
                                d.to_string(),
                            ))
                        } else {
                            serde_json::Value::String(d.to_string())
                        }
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({ "points": self.labels, "distances": distances });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serialization");
        text.push('\n');
        text
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_triangle<T>(n: usize, d: &[T]) -> Result<(), MetricViolation>
where
    T: Ord + Clone,
    for<'a> &'a T: Add<&'a T, Output = T>,
{
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = &d[i * n + j];
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if dij + &d[j * n + k] < d[i * n + k] {
                    return Err(MetricViolation::Triangle { i, j, k });
                }
            }
        }
    }
    Ok(())
}

/// Parse and validate a metric in the given format.
pub fn parse_metric(text: &str, format: Format) -> Result<MetricSpace> {
    match format {
        Format::Matrix => parse_matrix(text),
        Format::Json => parse_json(text),
    }
}

fn parse_matrix(text: &str) -> Result<MetricSpace> {
    let mut labels = None;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("labels:") {
            if labels.is_some() || !rows.is_empty() {
                return Err(Error::Parse(format!(
                    "line {}: labels header must be the first line",
                    lineno + 1
                )));
            }
            labels = Some(
                rest.split_whitespace()
                    .map(str::to_string)
                    .collect::<Vec<_>>(),
            );
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                parse_rational(tok).ok_or_else(|| {
                    Error::Parse(format!("line {}: invalid number {tok:?}", lineno + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no matrix rows".into()));
    }
    match labels {
        Some(l) => MetricSpace::new(l, rows),
        None => MetricSpace::from_rows(rows),
    }
}

#[derive(Deserialize)]
struct JsonMetric {
    points: Vec<String>,
    distances: Vec<Vec<serde_json::Value>>,
}

fn parse_json(text: &str) -> Result<MetricSpace> {
    let doc: JsonMetric =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("json: {e}")))?;
    let rows = doc
        .distances
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    let parsed = match v {
                        serde_json::Value::Number(num) => parse_rational(&num.to_string()),
                        serde_json::Value::String(s) => parse_rational(s),
                        _ => None,
                    };
                    parsed.ok_or_else(|| {
                        Error::Parse(format!("distances[{i}][{j}]: invalid number {v}"))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MetricSpace::new(doc.points, rows)
}

/// Hub edge lengths `c_v` of a star over the sites of a metric space, with
/// the dilation it is claimed to achieve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarEmbedding {
    pub labels: Vec<String>,
    pub hub_len: Vec<Rational>,
    pub lambda_star: Rational,
}

/// Largest ratio `(c_u + c_v) / d(u, v)` over unordered pairs.
pub fn star_dilation(m: &MetricSpace, c: &[Rational]) -> Result<Rational> {
    let n = m.len();
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 sites, got {n}")));
    }
    if c.len() != n {
        return Err(Error::Domain(format!(
            "{} hub lengths for {n} sites",
            c.len()
        )));
    }
    if let Some(v) = c.iter().position(|x| x.is_negative()) {
        return Err(Error::Domain(format!(
            "hub length c[{v}] = {} is negative",
            c[v]
        )));
    }
    let mut best: Option<Rational> = None;
    for u in 0..n {
        for v in u + 1..n {
            let ratio = (&c[u] + &c[v]) / m.dist(u, v);
            if best.as_ref().is_none_or(|b| &ratio > b) {
                best = Some(ratio);
            }
        }
    }
    Ok(best.expect("n >= 2"))
}

/// One failed constraint of a star embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StarViolation {
    LabelMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    /// `c_v ≥ 0` fails.
    NegativeLength { v: usize },
    /// `c_v + c_w ≥ d(v, w)` fails: the star contracts the pair.
    Contracts { v: usize, w: usize },
    /// `c_v + c_w ≤ λ·d(v, w)` fails: the pair is stretched beyond λ.
    ExceedsDilation { v: usize, w: usize },
}

impl StarViolation {
    /// Number of the violated constraint family (1, 2 or 3); 0 for a
    /// label mismatch.
    pub fn constraint(&self) -> u8 {
        match self {
            StarViolation::LabelMismatch { .. } => 0,
            StarViolation::NegativeLength { .. } => 1,
            StarViolation::Contracts { .. } => 2,
            StarViolation::ExceedsDilation { .. } => 3,
        }
    }
}

impl fmt::Display for StarViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarViolation::LabelMismatch { expected, found } => {
                write!(
                    f,
                    "labels {found:?} do not match metric labels {expected:?}"
                )
            }
            StarViolation::NegativeLength { v } => write!(f, "constraint (1) c[{v}] >= 0 fails"),
            StarViolation::Contracts { v, w } => {
                write!(f, "constraint (2) c[{v}] + c[{w}] >= d({v},{w}) fails")
            }
            StarViolation::ExceedsDilation { v, w } => {
                write!(
                    f,
                    "constraint (3) c[{v}] + c[{w}] <= lambda * d({v},{w}) fails"
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub violations: Vec<StarViolation>,
}

impl VerificationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every star constraint exactly; an empty report means feasible.
pub fn verify_star(m: &MetricSpace, s: &StarEmbedding) -> VerificationReport {
    let mut violations = Vec::new();
    if s.labels != m.labels || s.hub_len.len() != m.len() {
        violations.push(StarViolation::LabelMismatch {
            expected: m.labels.clone(),
            found: s.labels.clone(),
        });
        return VerificationReport { violations };
    }
    let c = &s.hub_len;
    for (v, cv) in c.iter().enumerate() {
        if cv.is_negative() {
            violations.push(StarViolation::NegativeLength { v });
        }
    }
    for v in 0..m.len() {
        for w in v + 1..m.len() {
            let sum = &c[v] + &c[w];
            let d = m.dist(v, w);
            if &sum < d {
                violations.push(StarViolation::Contracts { v, w });
            }
            if sum > &s.lambda_star * d {
                violations.push(StarViolation::ExceedsDilation { v, w });
            }
        }
    }
    VerificationReport { violations }
}

/// Random metric generators for tests and benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// All-pairs shortest paths of a random connected graph with weights
    /// in 1..=9.
    ShortestPath,
    /// L1 distances between distinct random integer points in the plane.
    RoundedEuclidean,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shortest_path" => Ok(Model::ShortestPath),
            "rounded_euclidean" => Ok(Model::RoundedEuclidean),
            _ => Err(Error::Parse(format!("unknown model {s:?}"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::ShortestPath => "shortest_path",
            Model::RoundedEuclidean => "rounded_euclidean",
        })
    }
}

/// Deterministic in `(n, seed, model)`.
pub fn gen_random_metric(n: usize, seed: u64, model: Model) -> Result<MetricSpace> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 points, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = match model {
        Model::ShortestPath => shortest_path_metric(n, &mut rng),
        Model::RoundedEuclidean => l1_metric(n, &mut rng),
    };
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Rational::from_integer(BigInt::from(d[i * n + j])))
                .collect()
        })
        .collect();
    MetricSpace::from_rows(rows)
}

fn shortest_path_metric(n: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    const INF: u64 = u64::MAX / 4;
    let mut d = vec![INF; n * n];
    for i in 0..n {
        d[i * n + i] = 0;
    }
    let connect = |d: &mut Vec<u64>, a: usize, b: usize, w: u64| {
        let w = w.min(d[a * n + b]);
        d[a * n + b] = w;
        d[b * n + a] = w;
    };
    // random spanning tree keeps the graph connected
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let w = rng.gen_range(1..=9);
        connect(&mut d, order[k], parent, w);
    }
    let extra_p = (3.0 / n as f64).min(0.5);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(extra_p) {
                let w = rng.gen_range(1..=9);
                connect(&mut d, a, b, w);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}

fn l1_metric(n: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let side = (4 * n as i64).max(100);
    let mut seen = HashSet::new();
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let p = (rng.gen_range(0..=side), rng.gen_range(0..=side));
        if seen.insert(p) {
            pts.push(p);
        }
    }
    let mut d = vec![0u64; n * n];
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate() {
            d[i * n + j] = ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as u64;
        }
    }
    d
}
