//! Minimum-dilation star embeddings of finite metric spaces.
//!
//! Given an n-point metric, [`embed`] returns hub edge lengths `c_v` for a
//! star whose leaf-to-leaf distances `c_u + c_v` never undercut the input
//! and whose worst stretch λ* is as small as possible. λ* is found exactly
//! as the smallest λ for which the λ-graph of the metric has no negative
//! cycle ([`parametric`]); the hub lengths come from single-source shortest
//! paths at λ* ([`extract`]). All arithmetic is exact.
//!
//! ```
//! use starmetric::{embed, parse_metric, Format};
//!
//! let m = parse_metric("0 1 2 1\n1 0 1 2\n2 1 0 1\n1 2 1 0\n", Format::Matrix).unwrap();
//! let star = embed(&m).unwrap();
//! assert_eq!(star.lambda_star.to_string(), "2");
//! ```

pub mod error;
pub mod extract;
pub mod lgraph;
pub mod linfun;
pub mod metric;
pub mod numeric;
pub mod oracle;
pub mod parametric;

pub use error::{Error, MetricViolation, Result};
pub use extract::{embed, embed_with_report};
pub use lgraph::{build_lambda_graph, has_negative_cycle, CycleCheck, LambdaGraph, Vertex};
pub use linfun::{lower_envelope, Interval, LinearFn, PiecewiseLinearFn};
pub use metric::{
    gen_random_metric, parse_metric, star_dilation, verify_star, Format, MetricSpace, Model,
    StarEmbedding, StarViolation, VerificationReport,
};
pub use numeric::{int, parse_rational, rat, to_decimal, Frac, Rational};
pub use oracle::{bisect_lambda, check_optimal, exact_lambda_by_cycles};
pub use parametric::{lambda_star, search, SearchReport};
