//! Independent references for λ*: exhaustive simple-cycle enumeration for
//! small instances, and bisection on the negative-cycle predicate.
//!
//! Neither uses the envelope or hop-matrix machinery.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::lgraph::{has_negative_cycle, LambdaGraph};
use crate::metric::{verify_star, MetricSpace, StarEmbedding};
use crate::numeric::{Coeff, Frac, Rational};

/// Largest site count accepted by [`exact_lambda_by_cycles`].
pub const MAX_ENUMERATION_SITES: usize = 7;

/// Simple cycles examined before giving up.
pub const MAX_ENUMERATED_CYCLES: u64 = 40_000_000;

/// A cycle's weight `λ·M + B` and the λ at which it stops being negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleRatio {
    pub cycle: Vec<usize>,
    pub slope_sum: Rational,
    pub intercept_sum: Rational,
}

impl CycleRatio {
    /// `-B / M`.
    pub fn threshold(&self) -> Rational {
        -&self.intercept_sum / &self.slope_sum
    }
}

/// Exact λ*: the largest `-B/M` over all simple cycles.
pub fn exact_lambda_by_cycles(g: &LambdaGraph) -> Result<Rational> {
    critical_cycle(g).map(|c| c.threshold())
}

/// The simple cycle with the largest threshold (first found on ties).
pub fn critical_cycle(g: &LambdaGraph) -> Result<CycleRatio> {
    if g.site_count() > MAX_ENUMERATION_SITES {
        return Err(Error::Size(format!(
            "cycle enumeration is limited to {MAX_ENUMERATION_SITES} sites, got {}",
            g.site_count()
        )));
    }
    // Cycle sums stay below 2n·2^bits, far from the i128 limit.
    if g.coefficient_bits() < 40 {
        finish(g, enumerate::<i128>(g)?)
    } else {
        finish(g, enumerate::<BigInt>(g)?)
    }
}

fn finish<C: Coeff>(g: &LambdaGraph, best: Best<C>) -> Result<CycleRatio> {
    let unit = g.unit();
    Ok(CycleRatio {
        cycle: best.0,
        slope_sum: best.1.to_rational() * unit,
        intercept_sum: best.2.to_rational() * unit,
    })
}

type Best<C> = (Vec<usize>, C, C);

fn enumerate<C: Coeff>(g: &LambdaGraph) -> Result<Best<C>> {
    let n = g.vertex_count();
    let mut adj: Vec<Vec<(usize, C, C)>> = vec![Vec::new(); n];
    for (u, v, l) in g.lines::<C>().expect("caller checked the ring") {
        adj[u].push((
            v,
            l.slope().unwrap().clone(),
            l.intercept().unwrap().clone(),
        ));
    }
    let mut search = CycleSearch {
        adj: &adj,
        on_path: vec![false; n],
        path: Vec::new(),
        best: None,
        count: 0,
    };
    for start in 0..n {
        search.path.push(start);
        search.on_path[start] = true;
        search.extend(start, start, C::zero(), C::zero())?;
        search.on_path[start] = false;
        search.path.pop();
    }
    Ok(search.best.expect("every λ-graph has a 2-cycle"))
}

struct CycleSearch<'a, C> {
    adj: &'a [Vec<(usize, C, C)>],
    on_path: Vec<bool>,
    path: Vec<usize>,
    best: Option<Best<C>>,
    count: u64,
}

impl<C: Coeff> CycleSearch<'_, C> {
    /// Each simple cycle is reported once, from its smallest vertex.
    fn extend(&mut self, start: usize, u: usize, m: C, b: C) -> Result<()> {
        for (v, em, eb) in &self.adj[u] {
            let (m2, b2) = (m.clone() + em.clone(), b.clone() + eb.clone());
            if *v == start {
                self.count += 1;
                if self.count > MAX_ENUMERATED_CYCLES {
                    return Err(Error::Size(format!(
                        "more than {MAX_ENUMERATED_CYCLES} simple cycles"
                    )));
                }
                debug_assert!(m2.is_positive());
                let threshold = Frac::new(-b2.clone(), m2.clone());
                let better = match &self.best {
                    None => true,
                    Some((_, bm, bb)) => threshold > Frac::new(-bb.clone(), bm.clone()),
                };
                if better {
                    self.best = Some((self.path.clone(), m2, b2));
                }
            } else if *v > start && !self.on_path[*v] {
                self.on_path[*v] = true;
                self.path.push(*v);
                self.extend(start, *v, m2, b2)?;
                self.path.pop();
                self.on_path[*v] = false;
            }
        }
        Ok(())
    }
}

/// λ* to within `tol` by bisecting `[1, 2D/d_min]` with Bellman–Ford
/// probes.
pub fn bisect_lambda(m: &MetricSpace, g: &LambdaGraph, tol: &Rational) -> Result<Rational> {
    if !tol.is_positive() {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let two = Rational::from_integer(BigInt::from(2));
    let mut lo = Rational::one();
    let mut hi = &two * m.max_distance() / m.min_distance();
    let width = &two * tol;
    while &hi - &lo > width {
        let mid = (&lo + &hi) / &two;
        if has_negative_cycle(g, &mid).is_clean() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) / two)
}

/// How optimality was established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptimalityEvidence {
    /// Compared with the cycle-enumeration value.
    Exact { oracle: Rational },
    /// `G(λ)` is clean at the claimed value and has a negative cycle just
    /// below it (`None` when the claim is 1 and nothing lies below).
    Probe { negative_just_below: Option<bool> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalityReport {
    pub feasible: bool,
    pub clean_at_claim: bool,
    pub evidence: OptimalityEvidence,
}

impl OptimalityReport {
    pub fn is_optimal(&self, claim: &Rational) -> bool {
        self.feasible
            && self.clean_at_claim
            && match &self.evidence {
                OptimalityEvidence::Exact { oracle } => oracle == claim,
                OptimalityEvidence::Probe {
                    negative_just_below,
                } => negative_just_below.unwrap_or(true),
            }
    }
}

/// Relative offset `2⁻²⁰` for the just-below probe.
pub fn probe_below(lambda: &Rational) -> Rational {
    let eps = Rational::new(BigInt::one(), BigInt::one() << 20u32);
    lambda * (Rational::one() - eps)
}

pub fn check_optimal(m: &MetricSpace, g: &LambdaGraph, s: &StarEmbedding) -> OptimalityReport {
    let feasible = verify_star(m, s).is_feasible();
    let clean_at_claim = has_negative_cycle(g, &s.lambda_star).is_clean();
    let evidence = match exact_lambda_by_cycles(g) {
        Ok(oracle) => OptimalityEvidence::Exact { oracle },
        Err(_) => {
            let below = (s.lambda_star > Rational::one())
                .then(|| !has_negative_cycle(g, &probe_below(&s.lambda_star)).is_clean());
            OptimalityEvidence::Probe {
                negative_just_below: below,
            }
        }
    };
    OptimalityReport {
        feasible,
        clean_at_claim,
        evidence,
    }
}
