//! Parametric negative-cycle detection: the smallest λ for which `G(λ)`
//! has no negative cycle.
//!
//! Hop-limited shortest-path matrices are squared in the min-plus sense.
//! Entries are lines in λ; the minimum over layover vertices is a lower
//! envelope. After each squaring the search interval is narrowed (binary
//! search over the envelopes' breakpoints, each probe one Bellman–Ford run)
//! until no entry has a breakpoint inside it, so every entry collapses back
//! to a single line. After `⌈log₂|V|⌉` rounds the diagonal covers every
//! simple cycle and λ* is the largest root of a diagonal entry.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lgraph::{negative_at, LambdaGraph};
use crate::linfun::{lower_envelope, Interval, LinearFn, PiecewiseLinearFn};
use crate::numeric::{Coeff, Frac, Rational};

/// λ-graph edge lines over a chosen coefficient ring.
#[derive(Clone, Debug)]
pub struct ParametricGraph<C: Coeff> {
    vertex_count: usize,
    lines: Vec<(usize, usize, LinearFn<C>)>,
}

/// Entry `(u, v)` is the minimum weight of a walk from `u` to `v` with at
/// most `2^hop_exponent` edges, valid for λ in `valid`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopMatrix<C: Coeff> {
    order: usize,
    entries: Vec<LinearFn<C>>,
    hop_exponent: u32,
    valid: Interval<C>,
}

/// A freshly squared [`HopMatrix`], entries still piecewise.
#[derive(Clone, Debug)]
pub struct SquaredMatrix<C: Coeff> {
    order: usize,
    entries: Vec<PiecewiseLinearFn<C>>,
    hop_exponent: u32,
    valid: Interval<C>,
    max_breakpoints: usize,
}

/// Which coefficient ring ran the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    I128,
    BigInt,
}

/// λ* plus instrumentation of the run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub lambda_star: Rational,
    pub iterations: usize,
    /// Interval after each narrowing, starting with the initial one.
    pub intervals: Vec<(Rational, Rational)>,
    /// Largest interior breakpoint count of any envelope built while squaring.
    pub max_envelope_breakpoints: usize,
    /// Distinct breakpoints collected per iteration.
    pub breakpoint_counts: Vec<usize>,
    pub probes: usize,
    pub arithmetic: Arithmetic,
}

impl<C: Coeff> ParametricGraph<C> {
    /// `None` if some coefficient does not fit in `C`.
    pub fn from_graph(g: &LambdaGraph) -> Option<Self> {
        Some(ParametricGraph {
            vertex_count: g.vertex_count(),
            lines: g.lines()?,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// `⌈log₂|V|⌉`: enough doublings for walks as long as any simple cycle.
    pub fn iteration_count(&self) -> usize {
        self.vertex_count.next_power_of_two().trailing_zeros() as usize
    }

    /// `[1, 2D/d_min]`: every 2-cycle weighs `(λ-1)·d`, so λ* ≥ 1, and all
    /// hub lengths equal to `D` are feasible at `2D/d_min`.
    pub fn initial_interval(&self) -> Interval<C> {
        let slopes = self
            .lines
            .iter()
            .filter_map(|(_, _, l)| l.slope())
            .filter(|m| m.is_positive());
        let (mut max, mut min) = (C::zero(), None::<C>);
        for m in slopes {
            if *m > max {
                max = m.clone();
            }
            if min.as_ref().is_none_or(|x| m < x) {
                min = Some(m.clone());
            }
        }
        let min = min.expect("a λ-graph on two or more sites has positive slopes");
        let two = C::one() + C::one();
        Interval::new(Frac::from_coeff(C::one()), Frac::new(two * max, min)).expect("2D/d_min >= 2")
    }

    /// True iff `G(t)` has a negative cycle, i.e. `t < λ*`.
    pub fn is_negative_at(&self, t: &Frac<C>) -> bool {
        negative_at(&self.lines, self.vertex_count, t)
    }

    /// `D_0`: zero diagonal, edge lines, `+∞` elsewhere.
    pub fn initialize_d0(&self, valid: &Interval<C>) -> HopMatrix<C> {
        let n = self.vertex_count;
        let mut entries = vec![LinearFn::PlusInfinity; n * n];
        for v in 0..n {
            entries[v * n + v] = LinearFn::zero();
        }
        for (u, v, l) in &self.lines {
            entries[u * n + v] = l.clone();
        }
        HopMatrix {
            order: n,
            entries,
            hop_exponent: 0,
            valid: valid.clone(),
        }
    }

    /// Binary search over the breakpoints of `d` for consecutive values
    /// bracketing λ*. Returns the interval and the number of probes.
    pub fn narrow_interval(&self, d: &SquaredMatrix<C>) -> (Interval<C>, usize) {
        let mut cuts: Vec<&Frac<C>> = d
            .entries
            .iter()
            .flat_map(|e| e.breakpoints())
            .filter(|b| d.valid.has_inside(b))
            .collect();
        cuts.sort_unstable();
        cuts.dedup_by(|a, b| a == b);

        // candidates: lo, cuts..., hi; λ* ∈ [cand(low), cand(high)]
        let cand = |i: usize| -> &Frac<C> {
            if i == 0 {
                d.valid.lo()
            } else if i == cuts.len() + 1 {
                d.valid.hi()
            } else {
                cuts[i - 1]
            }
        };
        let (mut low, mut high) = (0, cuts.len() + 1);
        let mut probes = 0;
        while high - low > 1 {
            let mid = low + (high - low) / 2;
            probes += 1;
            if self.is_negative_at(cand(mid)) {
                low = mid;
            } else {
                high = mid;
            }
        }
        let narrowed = Interval::new(cand(low).clone(), cand(high).clone()).expect("ordered cuts");
        (narrowed, probes)
    }

    /// Full search.
    pub fn search(&self) -> Result<SearchReport> {
        self.search_with(|_, _| {})
    }

    /// Full search; `observe` sees each squared matrix together with the
    /// interval chosen for it.
    pub fn search_with(
        &self,
        mut observe: impl FnMut(&SquaredMatrix<C>, &Interval<C>),
    ) -> Result<SearchReport> {
        let mut interval = self.initial_interval();
        let mut intervals = vec![interval.to_rationals()];
        let mut d = self.initialize_d0(&interval);
        let mut max_breakpoints = 0;
        let mut breakpoint_counts = Vec::new();
        let mut probes = 0;
        let iterations = self.iteration_count();
        for _ in 0..iterations {
            let squared = d.square();
            max_breakpoints = max_breakpoints.max(squared.max_breakpoints);
            breakpoint_counts.push(squared.distinct_breakpoints());
            let (narrowed, used) = self.narrow_interval(&squared);
            probes += used;
            observe(&squared, &narrowed);
            d = squared.restrict(&narrowed)?;
            interval = narrowed;
            intervals.push(interval.to_rationals());
        }
        let lambda_star = d.diagonal_threshold()?;
        Ok(SearchReport {
            lambda_star: lambda_star.to_rational(),
            iterations,
            intervals,
            max_envelope_breakpoints: max_breakpoints,
            breakpoint_counts,
            probes,
            arithmetic: Arithmetic::BigInt,
        })
    }
}

impl<C: Coeff> HopMatrix<C> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn hop_exponent(&self) -> u32 {
        self.hop_exponent
    }

    pub fn valid_interval(&self) -> &Interval<C> {
        &self.valid
    }

    pub fn entry(&self, u: usize, v: usize) -> &LinearFn<C> {
        &self.entries[u * self.order + v]
    }

    /// `D_{i+1}(u,v) = min_w D_i(u,w) + D_i(w,v)` as lower envelopes over
    /// the valid interval. Rows are computed in parallel.
    pub fn square(&self) -> SquaredMatrix<C> {
        let n = self.order;
        let rows = Lanes::new(&self.entries, &self.valid, n, false);
        let cols = Lanes::new(&self.entries, &self.valid, n, true);
        let out: Vec<(Vec<PiecewiseLinearFn<C>>, usize)> = (0..n)
            .into_par_iter()
            .map(|u| {
                let mut worst = 0;
                let mut buf = Vec::new();
                let envelopes = (0..n)
                    .map(|v| {
                        window_candidates(&rows, u, &cols, v, self.valid.is_degenerate(), &mut buf);
                        let env = lower_envelope(buf.drain(..), &self.valid);
                        worst = worst.max(env.breakpoint_count());
                        env
                    })
                    .collect();
                (envelopes, worst)
            })
            .collect();
        let max_breakpoints = out.iter().map(|r| r.1).max().unwrap_or(0);
        SquaredMatrix {
            order: n,
            entries: out.into_iter().flat_map(|r| r.0).collect(),
            hop_exponent: self.hop_exponent + 1,
            valid: self.valid.clone(),
            max_breakpoints,
        }
    }

    /// Smallest λ in the valid interval with every diagonal entry ≥ 0:
    /// the largest root among diagonal lines negative at the lower end.
    pub fn diagonal_threshold(&self) -> Result<Frac<C>> {
        let lo = self.valid.lo();
        let mut best = lo.clone();
        for v in 0..self.order {
            let entry = self.entry(v, v);
            let (slope, intercept) = match entry {
                LinearFn::Finite { slope, intercept } => (slope, intercept),
                LinearFn::PlusInfinity => {
                    return Err(Error::InternalInvariant(format!(
                        "diagonal entry {v} is +inf"
                    )))
                }
            };
            if slope.is_zero() {
                if intercept.is_negative() {
                    return Err(Error::InternalInvariant(format!(
                        "diagonal entry {v} is a negative constant"
                    )));
                }
                continue;
            }
            let at_lo = entry.scaled_value(lo).expect("finite");
            if at_lo.is_negative() {
                let root = entry.root().expect("non-constant");
                if root > best {
                    best = root;
                }
            }
        }
        if &best > self.valid.hi() {
            return Err(Error::InternalInvariant(format!(
                "threshold {best} above interval {}",
                self.valid
            )));
        }
        Ok(best)
    }
}

impl<C: Coeff> SquaredMatrix<C> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn hop_exponent(&self) -> u32 {
        self.hop_exponent
    }

    pub fn valid_interval(&self) -> &Interval<C> {
        &self.valid
    }

    pub fn entry(&self, u: usize, v: usize) -> &PiecewiseLinearFn<C> {
        &self.entries[u * self.order + v]
    }

    pub fn max_breakpoints(&self) -> usize {
        self.max_breakpoints
    }

    pub fn distinct_breakpoints(&self) -> usize {
        let mut all: Vec<&Frac<C>> = self.entries.iter().flat_map(|e| e.breakpoints()).collect();
        all.sort_unstable();
        all.dedup_by(|a, b| a == b);
        all.len()
    }

    /// Collapse every entry to the single line it equals on `range`.
    pub fn restrict(&self, range: &Interval<C>) -> Result<HopMatrix<C>> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.restrict_to_line(range))
            .collect::<Result<Vec<_>>>()?;
        Ok(HopMatrix {
            order: self.order,
            entries,
            hop_exponent: self.hop_exponent,
            valid: range.clone(),
        })
    }
}

/// Bit budget for the `i128` path: every coefficient of a walk with up to
/// `2^k` edges (`2^k < 2|V|`) is at most `A = 2^k · max|d|`, and the
/// largest intermediate product is below `8A²`.
const I128_WALK_BITS: u64 = 60;

/// Runs the search in `i128` when magnitudes allow, otherwise in `BigInt`.
pub fn search(g: &LambdaGraph) -> Result<SearchReport> {
    if g.site_count() < 2 {
        return Err(Error::Domain("need at least 2 sites".into()));
    }
    let hop_bits = g.vertex_count().next_power_of_two().trailing_zeros() as u64;
    if g.coefficient_bits() + hop_bits <= I128_WALK_BITS {
        if let Some(pg) = ParametricGraph::<i128>::from_graph(g) {
            let mut report = pg.search()?;
            report.arithmetic = Arithmetic::I128;
            return Ok(report);
        }
    }
    ParametricGraph::<BigInt>::from_graph(g)
        .expect("BigInt holds every coefficient")
        .search()
}

/// The optimal dilation λ*.
pub fn lambda_star(g: &LambdaGraph) -> Result<Rational> {
    search(g).map(|r| r.lambda_star)
}

/// Matrix entries split into flat lanes, row-major or transposed, with
/// each line's scaled value at both ends of the interval precomputed.
/// Values are linear in the line, so a sum's value is the sum of values.
struct Lanes<C> {
    n: usize,
    finite: Vec<bool>,
    slope: Vec<C>,
    intercept: Vec<C>,
    at_lo: Vec<C>,
    at_hi: Vec<C>,
}

impl<C: Coeff> Lanes<C> {
    fn new(entries: &[LinearFn<C>], valid: &Interval<C>, n: usize, transpose: bool) -> Self {
        let mut lanes = Lanes {
            n,
            finite: Vec::with_capacity(n * n),
            slope: Vec::with_capacity(n * n),
            intercept: Vec::with_capacity(n * n),
            at_lo: Vec::with_capacity(n * n),
            at_hi: Vec::with_capacity(n * n),
        };
        for a in 0..n {
            for b in 0..n {
                let e = if transpose {
                    &entries[b * n + a]
                } else {
                    &entries[a * n + b]
                };
                let (m, c) = match e {
                    LinearFn::Finite { slope, intercept } => (slope.clone(), intercept.clone()),
                    LinearFn::PlusInfinity => (C::zero(), C::zero()),
                };
                lanes.finite.push(e.is_finite());
                lanes
                    .at_lo
                    .push(e.scaled_value(valid.lo()).unwrap_or_else(C::zero));
                lanes
                    .at_hi
                    .push(e.scaled_value(valid.hi()).unwrap_or_else(C::zero));
                lanes.slope.push(m);
                lanes.intercept.push(c);
            }
        }
        lanes
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        i * self.n..(i + 1) * self.n
    }
}

/// Lines `row[w] + col[w]` that can appear on the lower envelope over the
/// valid interval. With `L_lo` and `L_hi` the envelope lines at the two
/// ends, any other line on the envelope must dip strictly below both at
/// the point where they cross.
fn window_candidates<C: Coeff>(
    rows: &Lanes<C>,
    u: usize,
    cols: &Lanes<C>,
    v: usize,
    degenerate: bool,
    out: &mut Vec<LinearFn<C>>,
) {
    let (r, c) = (rows.range(u), cols.range(v));
    let fin = |w: usize| rows.finite[r.start + w] && cols.finite[c.start + w];
    let slope = |w: usize| rows.slope[r.start + w].clone() + cols.slope[c.start + w].clone();
    let intercept =
        |w: usize| rows.intercept[r.start + w].clone() + cols.intercept[c.start + w].clone();
    let at_lo = |w: usize| rows.at_lo[r.start + w].clone() + cols.at_lo[c.start + w].clone();
    let at_hi = |w: usize| rows.at_hi[r.start + w].clone() + cols.at_hi[c.start + w].clone();
    // envelope at lo: lowest value, then lowest slope; at hi: highest slope
    let mut best_lo: Option<(C, usize)> = None;
    let mut best_hi: Option<(C, usize)> = None;
    for w in (0..rows.n).filter(|&w| fin(w)) {
        let v = at_lo(w);
        let better = match &best_lo {
            None => true,
            Some((bv, bw)) => v < *bv || (v == *bv && slope(w) < slope(*bw)),
        };
        if better {
            best_lo = Some((v, w));
        }
        let v = at_hi(w);
        let better = match &best_hi {
            None => true,
            Some((bv, bw)) => v < *bv || (v == *bv && slope(w) > slope(*bw)),
        };
        if better {
            best_hi = Some((v, w));
        }
    }
    let (Some((_, w_lo)), Some((_, w_hi))) = (best_lo, best_hi) else {
        return;
    };
    let (m1, b1) = (slope(w_lo), intercept(w_lo));
    let (m2, b2) = (slope(w_hi), intercept(w_hi));
    out.push(LinearFn::new(m1.clone(), b1.clone()));
    if degenerate || m1 == m2 {
        return;
    }
    out.push(LinearFn::new(m2.clone(), b2.clone()));
    // m1 > m2; crossing at (b2 - b1) / (m1 - m2)
    let (p, q) = (b2 - b1.clone(), m1.clone() - m2.clone());
    let cap = m1.clone() * p.clone() + b1 * q.clone();
    for w in (0..rows.n).filter(|&w| fin(w)) {
        let m = slope(w);
        if m < m1 && m > m2 {
            let b = intercept(w);
            if m.clone() * p.clone() + b.clone() * q.clone() < cap {
                out.push(LinearFn::new(m, b));
            }
        }
    }
}
