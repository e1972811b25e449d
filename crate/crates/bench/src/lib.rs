//! Fixed benchmark inputs.

use starmetric::{gen_random_metric, MetricSpace, Model};

pub const SIZES: [usize; 4] = [16, 32, 64, 128];
pub const SEED: u64 = 1;

/// One metric per size and model, generated from [`SEED`].
pub fn instances(sizes: &[usize]) -> Vec<(usize, Model, MetricSpace)> {
    let mut out = Vec::new();
    for &n in sizes {
        for model in [Model::ShortestPath, Model::RoundedEuclidean] {
            out.push((n, model, gen_random_metric(n, SEED, model).expect("n >= 2")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_fixed() {
        let a = instances(&[4, 5]);
        assert_eq!(a.len(), 4);
        assert_eq!(a[2].2.len(), 5);
        assert_eq!(instances(&[4, 5]), a);
    }
}
