//! Hub edge lengths from shortest paths in the λ-graph at λ*.
//!
//! A source vertex with a zero-weight edge to every `Over(v)` is added to
//! `G(λ*)`; with path lengths `l`, the hub length of site `v` is
//! `(l(Under(v)) - l(Over(v))) / 2`.

use num_traits::Zero;

use crate::error::Result;
use crate::lgraph::{build_lambda_graph, rational_shortest_paths, LambdaGraph, Vertex};
use crate::metric::{MetricSpace, StarEmbedding};
use crate::numeric::Rational;
use crate::parametric::{search, SearchReport};

/// `G(λ)` evaluated at a fixed λ, plus a source vertex (index `2n`) with a
/// zero-weight edge to each `Over(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceGraph {
    pub site_count: usize,
    pub lambda: Rational,
    /// `(from, to, weight)` in metric length units.
    pub edges: Vec<(usize, usize, Rational)>,
}

impl SourceGraph {
    pub fn vertex_count(&self) -> usize {
        2 * self.site_count + 1
    }

    pub fn source(&self) -> usize {
        2 * self.site_count
    }

    /// Shortest-path lengths from the source. Fails with `NegativeCycle` if
    /// `lambda` is below λ*.
    pub fn path_lengths(&self) -> Result<PathLengths> {
        let l = rational_shortest_paths(self.vertex_count(), &self.edges, self.source())?;
        Ok(PathLengths {
            site_count: self.site_count,
            l,
        })
    }
}

pub fn build_source_graph(g: &LambdaGraph, lambda: &Rational) -> SourceGraph {
    let n = g.site_count();
    let mut edges: Vec<(usize, usize, Rational)> = g
        .edges()
        .iter()
        .map(|e| {
            let w = g
                .weight(e)
                .value_at_rational(lambda)
                .expect("edges are finite");
            (e.from, e.to, w)
        })
        .collect();
    let source = 2 * n;
    edges.extend((0..n).map(|v| (source, Vertex::Over(v).index(n), Rational::zero())));
    SourceGraph {
        site_count: n,
        lambda: lambda.clone(),
        edges,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathLengths {
    site_count: usize,
    l: Vec<Rational>,
}

impl PathLengths {
    pub fn over(&self, v: usize) -> &Rational {
        &self.l[Vertex::Over(v).index(self.site_count)]
    }

    pub fn under(&self, v: usize) -> &Rational {
        &self.l[Vertex::Under(v).index(self.site_count)]
    }

    pub fn source(&self) -> &Rational {
        &self.l[2 * self.site_count]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.l
    }
}

/// `c_v = (l(Under(v)) - l(Over(v))) / 2` for each of the first `n` sites.
pub fn hub_lengths(pl: &PathLengths, n: usize) -> Vec<Rational> {
    let two = Rational::from_integer(2.into());
    (0..n).map(|v| (pl.under(v) - pl.over(v)) / &two).collect()
}

/// Minimum-dilation star for `m`.
pub fn embed(m: &MetricSpace) -> Result<StarEmbedding> {
    embed_with_report(m).map(|(s, _)| s)
}

/// [`embed`], also returning the search instrumentation.
pub fn embed_with_report(m: &MetricSpace) -> Result<(StarEmbedding, SearchReport)> {
    let g = build_lambda_graph(m);
    let report = search(&g)?;
    let pl = build_source_graph(&g, &report.lambda_star).path_lengths()?;
    let star = StarEmbedding {
        labels: m.labels().to_vec(),
        hub_len: hub_lengths(&pl, m.len()),
        lambda_star: report.lambda_star.clone(),
    };
    Ok((star, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::metric::{gen_random_metric, star_dilation, verify_star, Model};
    use crate::numeric::{int, rat};
    use num_traits::Signed;

    fn metric(rows: &[&[i64]]) -> MetricSpace {
        MetricSpace::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn two_point() -> MetricSpace {
        metric(&[&[0, 1], &[1, 0]])
    }

    fn four_cycle() -> MetricSpace {
        metric(&[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]])
    }

    #[test]
    fn two_point_source_graph() {
        let g = build_lambda_graph(&two_point());
        let sg = build_source_graph(&g, &int(1));
        assert_eq!(sg.vertex_count(), 5);
        assert_eq!(sg.edges.len(), 8);
        let out_of_source = sg.edges.iter().filter(|e| e.0 == sg.source()).count();
        assert_eq!(out_of_source, 2);
        for (u, v, w) in &sg.edges {
            if *u < 2 && *v >= 2 && *v < 4 {
                assert_eq!(w, &int(1));
            }
        }
        let pl = sg.path_lengths().unwrap();
        assert_eq!(pl.source(), &int(0));
        assert_eq!((pl.over(0), pl.under(0)), (&int(0), &int(1)));
        assert_eq!((pl.over(1), pl.under(1)), (&int(0), &int(1)));
        assert_eq!(hub_lengths(&pl, 2), vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn three_site_source_graph_shape() {
        let m = gen_random_metric(3, 0, Model::ShortestPath).unwrap();
        let sg = build_source_graph(&build_lambda_graph(&m), &int(1));
        assert_eq!(sg.vertex_count(), 7);
        assert_eq!(sg.edges.len(), 9 + 6 + 3);
    }

    #[test]
    fn below_optimum_is_rejected() {
        let g = build_lambda_graph(&four_cycle());
        let sg = build_source_graph(&g, &rat(3, 2));
        assert!(matches!(sg.path_lengths(), Err(Error::NegativeCycle)));
    }

    #[test]
    fn equal_lengths_give_zero_hub() {
        let pl = PathLengths {
            site_count: 1,
            l: vec![int(-2), int(-2), int(0)],
        };
        assert_eq!(hub_lengths(&pl, 1), vec![int(0)]);
    }

    #[test]
    fn embed_canonical() {
        let s = embed(&two_point()).unwrap();
        assert_eq!(s.lambda_star, int(1));
        assert_eq!(s.hub_len, vec![rat(1, 2), rat(1, 2)]);

        let c4 = four_cycle();
        let s = embed(&c4).unwrap();
        assert_eq!(s.lambda_star, int(2));
        assert!(verify_star(&c4, &s).is_feasible());
    }

    #[test]
    fn path_length_invariants() {
        for seed in 0..10 {
            let m = gen_random_metric(6, seed, Model::RoundedEuclidean).unwrap();
            let g = build_lambda_graph(&m);
            let lambda = search(&g).unwrap().lambda_star;
            let sg = build_source_graph(&g, &lambda);
            let pl = sg.path_lengths().unwrap();
            assert!(pl.source().is_zero());
            for v in 0..m.len() {
                assert!(!pl.over(v).is_positive());
            }
            for (u, v, w) in &sg.edges {
                assert!(&pl.as_slice()[*u] + w >= pl.as_slice()[*v]);
            }
        }
    }

    #[test]
    fn embeddings_are_feasible_at_lambda_star() {
        for seed in 0..20 {
            let model = if seed % 2 == 0 {
                Model::ShortestPath
            } else {
                Model::RoundedEuclidean
            };
            let m = gen_random_metric(5 + seed as usize % 4, seed, model).unwrap();
            let s = embed(&m).unwrap();
            assert!(verify_star(&m, &s).is_feasible(), "seed {seed}");
            assert!(star_dilation(&m, &s.hub_len).unwrap() <= s.lambda_star);
        }
    }
}
