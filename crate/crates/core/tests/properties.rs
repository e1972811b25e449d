use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use starmetric::extract::{build_source_graph, hub_lengths};
use starmetric::linfun::lower_envelope;
use starmetric::metric::StarEmbedding;
use starmetric::*;

type Q = Rational;

fn q(n: i64, d: i64) -> Q {
    rat(n, d)
}

fn small_rational() -> impl Strategy<Value = Q> {
    (-60i64..=60, 1i64..=12).prop_map(|(n, d)| q(n, d))
}

fn lines() -> impl Strategy<Value = Vec<LinearFn<Q>>> {
    prop::collection::vec(
        prop_oneof![
            10 => (small_rational(), small_rational()).prop_map(|(m, b)| LinearFn::new(m, b)),
            1 => Just(LinearFn::PlusInfinity),
        ],
        1..=16,
    )
}

fn domain() -> impl Strategy<Value = Interval<Q>> {
    (small_rational(), 0i64..=40, 1i64..=8).prop_map(|(lo, w, d)| {
        let hi = &lo + q(w, d);
        Interval::from_rationals(&lo, &hi).unwrap()
    })
}

fn brute_min(lines: &[LinearFn<Q>], x: &Q) -> Option<Q> {
    lines.iter().filter_map(|l| l.value_at_rational(x)).min()
}

fn point_in(d: &Interval<Q>, k: i64) -> Q {
    let (lo, hi) = d.to_rationals();
    &lo + (&hi - &lo) * q(k, 1000)
}

fn model(i: u64) -> Model {
    if i.is_multiple_of(2) {
        Model::ShortestPath
    } else {
        Model::RoundedEuclidean
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn envelope_equals_pointwise_minimum(
        ls in lines(),
        d in domain(),
        xs in prop::collection::vec(0i64..=1000, 50),
    ) {
        let env = lower_envelope(ls.clone(), &d);
        for k in xs {
            let x = point_in(&d, k);
            let got = env.eval(&Frac::from_rational(&x).unwrap()).unwrap().map(|f| f.to_rational());
            prop_assert_eq!(got, brute_min(&ls, &x));
        }
    }

    #[test]
    fn envelope_breakpoint_bound_and_continuity(ls in lines(), d in domain()) {
        let env = lower_envelope(ls.clone(), &d);
        let finite = ls.iter().filter(|l| l.is_finite()).count();
        prop_assert!(env.breakpoint_count() <= finite.saturating_sub(1));
        for pair in env.pieces().windows(2) {
            let x = &pair[0].right_end;
            prop_assert!(d.has_inside(x));
            prop_assert_eq!(pair[0].line.value_at(x), pair[1].line.value_at(x));
            prop_assert!(pair[0].line != pair[1].line);
        }
        let mut prev = d.lo().clone();
        for p in env.pieces() {
            prop_assert!(p.right_end >= prev);
            prev = p.right_end.clone();
        }
        prop_assert_eq!(&prev, d.hi());
    }

    #[test]
    fn linear_add_laws(a in lines(), b in lines(), c in lines()) {
        let (a, b, c) = (&a[0], &b[0], &c[0]);
        prop_assert_eq!(&(a + b) + c, a + &(b + c));
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a + &LinearFn::PlusInfinity, LinearFn::PlusInfinity);
        prop_assert_eq!(a + &LinearFn::zero(), a.clone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn negative_cycle_predicate_switches_once(n in 2usize..=6, seed in 0u64..10_000) {
        let m = gen_random_metric(n, seed, model(seed)).unwrap();
        let g = build_lambda_graph(&m);
        let top = q(2, 1) * m.max_distance() / m.min_distance();
        let mut seen_clean = false;
        for k in 0..20 {
            let lambda = Q::one() + (&top - Q::one()) * q(k, 19);
            let clean = has_negative_cycle(&g, &lambda).is_clean();
            prop_assert!(clean || !seen_clean, "NegCycle after Clean at {}", lambda);
            seen_clean |= clean;
        }
        prop_assert!(seen_clean);
    }

    #[test]
    fn witnesses_are_real_negative_cycles(n in 2usize..=6, seed in 0u64..10_000, k in 0i64..=100) {
        let m = gen_random_metric(n, seed, model(seed)).unwrap();
        let g = build_lambda_graph(&m);
        let lambda = Q::one() + q(k, 20);
        if let CycleCheck::NegCycle(w) = has_negative_cycle(&g, &lambda) {
            let vs = &w.vertices;
            prop_assert!(vs.len() >= 2);
            let mut total = LinearFn::<Q>::zero();
            for i in 0..vs.len() {
                let (a, b) = (vs[i].index(n), vs[(i + 1) % vs.len()].index(n));
                let e = g.find_edge(a, b).expect("consecutive vertices are joined");
                total = total + g.weight(e);
                // Over and Under alternate
                prop_assert_ne!(matches!(vs[i], Vertex::Over(_)), matches!(vs[(i + 1) % vs.len()], Vertex::Over(_)));
            }
            prop_assert_eq!(&total, &w.weight);
            prop_assert!(total.value_at_rational(&lambda).unwrap().is_negative());
            prop_assert!(total.slope().unwrap().is_positive());
        }
    }

    #[test]
    fn clean_exactly_when_extracted_star_is_feasible(
        n in 2usize..=6,
        seed in 0u64..10_000,
        k in 0i64..=60,
    ) {
        let m = gen_random_metric(n, seed, model(seed)).unwrap();
        let g = build_lambda_graph(&m);
        let lambda = Q::one() + q(k, 10);
        let clean = has_negative_cycle(&g, &lambda).is_clean();
        match build_source_graph(&g, &lambda).path_lengths() {
            Ok(pl) => {
                prop_assert!(clean);
                let s = StarEmbedding {
                    labels: m.labels().to_vec(),
                    hub_len: hub_lengths(&pl, n),
                    lambda_star: lambda.clone(),
                };
                prop_assert!(verify_star(&m, &s).is_feasible());
            }
            Err(Error::NegativeCycle) => {
                prop_assert!(!clean);
                // no star reaches a dilation below λ*
                let best = embed(&m).unwrap();
                prop_assert!(best.lambda_star > lambda);
                prop_assert!(star_dilation(&m, &best.hub_len).unwrap() > lambda);
            }
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn lambda_star_separates_clean_from_negative(n in 2usize..=7, seed in 0u64..10_000, ks in prop::collection::vec(0i64..1000, 10)) {
        let m = gen_random_metric(n, seed, model(seed)).unwrap();
        let g = build_lambda_graph(&m);
        let l = lambda_star(&g).unwrap();
        prop_assert!(l >= Q::one());
        prop_assert!(has_negative_cycle(&g, &l).is_clean());
        if l > Q::one() {
            for k in ks {
                let below = Q::one() + (&l - Q::one()) * q(k, 1000);
                prop_assert!(!has_negative_cycle(&g, &below).is_clean());
            }
        }
    }

    #[test]
    fn embedding_constraints_hold(n in 2usize..=9, seed in 0u64..10_000) {
        let m = gen_random_metric(n, seed, model(seed)).unwrap();
        let s = embed(&m).unwrap();
        for v in 0..n {
            prop_assert!(!s.hub_len[v].is_negative());
            for w in 0..n {
                if v != w {
                    let star = &s.hub_len[v] + &s.hub_len[w];
                    prop_assert!(&star >= m.dist(v, w));
                    prop_assert!(star <= &s.lambda_star * m.dist(v, w));
                }
            }
        }
        let dil = star_dilation(&m, &s.hub_len).unwrap();
        prop_assert!(dil >= Q::one());
        prop_assert_eq!(dil, s.lambda_star);
    }

    #[test]
    fn scaling_distances_scales_hubs(n in 2usize..=8, seed in 0u64..10_000, an in 1i64..=20, ad in 1i64..=20) {
        let alpha = q(an, ad);
        let m = gen_random_metric(n, seed, model(seed)).unwrap();
        let a = embed(&m).unwrap();
        let b = embed(&m.scaled(&alpha).unwrap()).unwrap();
        prop_assert_eq!(&a.lambda_star, &b.lambda_star);
        for (x, y) in a.hub_len.iter().zip(&b.hub_len) {
            prop_assert_eq!(x * &alpha, y.clone());
        }
    }

    #[test]
    fn generated_metrics_satisfy_axioms(n in 2usize..=40, seed in 0u64..10_000) {
        let m = gen_random_metric(n, seed, model(seed)).unwrap();
        for i in 0..n {
            prop_assert!(m.dist(i, i).is_zero());
            for j in 0..n {
                if i != j {
                    prop_assert!(m.dist(i, j).is_positive());
                    prop_assert_eq!(m.dist(i, j), m.dist(j, i));
                }
                for k in 0..n {
                    prop_assert!(m.dist(i, k) <= &(m.dist(i, j) + m.dist(j, k)));
                }
            }
        }
        let again = parse_metric(&m.to_matrix_text(), Format::Matrix).unwrap();
        prop_assert_eq!(&again, &m);
        let again = parse_metric(&m.to_json_text(), Format::Json).unwrap();
        prop_assert_eq!(again, m);
    }

    #[test]
    fn exact_strings_round_trip(num in any::<i64>(), den in 1i64..=i64::MAX) {
        let r = Q::new(BigInt::from(num), BigInt::from(den));
        prop_assert_eq!(parse_rational(&r.to_string()), Some(r.clone()));
        let dec = to_decimal(&r, 20);
        let back = parse_rational(&dec).unwrap();
        // 20 significant digits
        if !r.is_zero() {
            let rel = ((&back - &r) / &r).abs();
            prop_assert!(rel <= Q::new(BigInt::one(), BigInt::from(2) * BigInt::from(10).pow(19)));
        }
    }
}
