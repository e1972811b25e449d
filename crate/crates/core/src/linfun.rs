//! Exact linear functions of λ, lower envelopes, and piecewise-linear
//! functions over a closed λ-interval.
//!
//! Everything is generic over the coefficient ring [`Coeff`]. Positions on
//! the λ axis are [`Frac`]s over the same ring, so intersection points of
//! integer-coefficient lines stay exact without ever leaving the ring.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::numeric::{Coeff, Frac, Rational};

/// `λ·slope + intercept`, or the absorbing value `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LinearFn<C> {
    Finite { slope: C, intercept: C },
    PlusInfinity,
}

impl<C: Coeff> LinearFn<C> {
    pub fn new(slope: C, intercept: C) -> Self {
        LinearFn::Finite { slope, intercept }
    }

    pub fn constant(value: C) -> Self {
        LinearFn::Finite {
            slope: C::zero(),
            intercept: value,
        }
    }

    pub fn zero() -> Self {
        Self::constant(C::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, LinearFn::Finite { .. })
    }

    pub fn slope(&self) -> Option<&C> {
        match self {
            LinearFn::Finite { slope, .. } => Some(slope),
            LinearFn::PlusInfinity => None,
        }
    }

    pub fn intercept(&self) -> Option<&C> {
        match self {
            LinearFn::Finite { intercept, .. } => Some(intercept),
            LinearFn::PlusInfinity => None,
        }
    }

    /// Value at `x`, `None` meaning `+∞`.
    pub fn value_at(&self, x: &Frac<C>) -> Option<Frac<C>> {
        self.scaled_value(x).map(|v| Frac::new(v, x.den().clone()))
    }

    /// `x.den() · f(x)`: the value without dividing by the (positive)
    /// denominator of `x`. Comparisons between lines at the same `x`
    /// can use this directly.
    pub fn scaled_value(&self, x: &Frac<C>) -> Option<C> {
        match self {
            LinearFn::Finite { slope, intercept } => {
                Some(slope.clone() * x.num().clone() + intercept.clone() * x.den().clone())
            }
            LinearFn::PlusInfinity => None,
        }
    }

    pub fn value_at_rational(&self, x: &Rational) -> Option<Rational> {
        match self {
            LinearFn::Finite { slope, intercept } => {
                Some(slope.to_rational() * x + intercept.to_rational())
            }
            LinearFn::PlusInfinity => None,
        }
    }

    /// The λ where a finite non-constant line crosses zero.
    pub fn root(&self) -> Option<Frac<C>> {
        match self {
            LinearFn::Finite { slope, intercept } if !slope.is_zero() => {
                Some(Frac::new(-intercept.clone(), slope.clone()))
            }
            _ => None,
        }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> Option<D>) -> Option<LinearFn<D>> {
        match self {
            LinearFn::Finite { slope, intercept } => Some(LinearFn::Finite {
                slope: f(slope)?,
                intercept: f(intercept)?,
            }),
            LinearFn::PlusInfinity => Some(LinearFn::PlusInfinity),
        }
    }

    pub fn to_rational(&self) -> LinearFn<Rational> {
        self.map(|c| Some(c.to_rational()))
            .expect("rational conversion is total")
    }
}

impl<C: Coeff> Add for LinearFn<C> {
    type Output = LinearFn<C>;

    fn add(self, rhs: Self) -> Self::Output {
        &self + &rhs
    }
}

impl<C: Coeff> Add for &LinearFn<C> {
    type Output = LinearFn<C>;

    fn add(self, rhs: Self) -> Self::Output {
        match (self, rhs) {
            (
                LinearFn::Finite {
                    slope: m1,
                    intercept: b1,
                },
                LinearFn::Finite {
                    slope: m2,
                    intercept: b2,
                },
            ) => LinearFn::Finite {
                slope: m1.clone() + m2.clone(),
                intercept: b1.clone() + b2.clone(),
            },
            _ => LinearFn::PlusInfinity,
        }
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for LinearFn<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearFn::Finite { slope, intercept } => write!(f, "λ·{slope} + {intercept}"),
            LinearFn::PlusInfinity => write!(f, "+inf"),
        }
    }
}

/// Closed interval `[lo, hi]` on the λ axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval<C: Coeff> {
    lo: Frac<C>,
    hi: Frac<C>,
}

impl<C: Coeff> Interval<C> {
    pub fn new(lo: Frac<C>, hi: Frac<C>) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn from_rationals(lo: &Rational, hi: &Rational) -> Result<Self> {
        let conv = |r: &Rational| {
            Frac::from_rational(r).ok_or_else(|| Error::Domain(format!("{r} is not representable")))
        };
        Self::new(conv(lo)?, conv(hi)?)
    }

    pub fn lo(&self) -> &Frac<C> {
        &self.lo
    }

    pub fn hi(&self) -> &Frac<C> {
        &self.hi
    }

    pub fn contains(&self, x: &Frac<C>) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval<C>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// `x` strictly between the endpoints.
    pub fn has_inside(&self, x: &Frac<C>) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn to_rationals(&self) -> (Rational, Rational) {
        (self.lo.to_rational(), self.hi.to_rational())
    }
}

impl<C: Coeff> fmt::Display for Interval<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece<C: Coeff> {
    pub line: LinearFn<C>,
    pub right_end: Frac<C>,
}

/// Continuous piecewise-linear function on a closed interval, stored as
/// consecutive pieces with strictly increasing right ends, the last of
/// which is the domain's upper end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinearFn<C: Coeff> {
    domain: Interval<C>,
    pieces: Vec<Piece<C>>,
}

impl<C: Coeff> PiecewiseLinearFn<C> {
    pub fn from_line(line: LinearFn<C>, domain: Interval<C>) -> Self {
        let right_end = domain.hi.clone();
        PiecewiseLinearFn {
            domain,
            pieces: vec![Piece { line, right_end }],
        }
    }

    pub fn domain(&self) -> &Interval<C> {
        &self.domain
    }

    pub fn pieces(&self) -> &[Piece<C>] {
        &self.pieces
    }

    pub fn breakpoint_count(&self) -> usize {
        self.pieces.len() - 1
    }

    /// Interior breakpoints in increasing order (domain ends excluded).
    pub fn breakpoints(&self) -> impl Iterator<Item = &Frac<C>> + '_ {
        self.pieces[..self.pieces.len() - 1]
            .iter()
            .map(|p| &p.right_end)
    }

    /// Value at `x`; `Ok(None)` is `+∞`.
    pub fn eval(&self, x: &Frac<C>) -> Result<Option<Frac<C>>> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!("{x} outside {}", self.domain)));
        }
        let piece = self
            .pieces
            .iter()
            .find(|p| &p.right_end >= x)
            .expect("last piece ends at the domain's upper end");
        Ok(piece.line.value_at(x))
    }

    /// The single line equal to `self` throughout `range`. Breakpoints at
    /// the ends of `range` are allowed.
    pub fn restrict_to_line(&self, range: &Interval<C>) -> Result<LinearFn<C>> {
        if !self.domain.contains_interval(range) {
            return Err(Error::Domain(format!("{range} not within {}", self.domain)));
        }
        if let Some(b) = self.breakpoints().find(|b| range.has_inside(b)) {
            return Err(Error::BreakpointInside(b.to_rational()));
        }
        let piece = if range.is_degenerate() {
            self.pieces.iter().find(|p| p.right_end >= range.lo)
        } else {
            self.pieces.iter().find(|p| p.right_end > range.lo)
        };
        Ok(piece.expect("range lies within the domain").line.clone())
    }
}

/// Pointwise minimum of `lines` over `domain`.
///
/// Lines are sorted by decreasing slope (ties keep the smaller intercept)
/// and swept once with a stack, dropping every line that is nowhere
/// strictly lowest. Pieces that only touch the domain at an endpoint are
/// clipped away. At most `k - 1` breakpoints result from `k` finite lines.
pub fn lower_envelope<C, I>(lines: I, domain: &Interval<C>) -> PiecewiseLinearFn<C>
where
    C: Coeff,
    I: IntoIterator<Item = LinearFn<C>>,
{
    let mut finite: Vec<(C, C)> = lines
        .into_iter()
        .filter_map(|l| match l {
            LinearFn::Finite { slope, intercept } => Some((slope, intercept)),
            LinearFn::PlusInfinity => None,
        })
        .collect();
    if finite.is_empty() {
        return PiecewiseLinearFn::from_line(LinearFn::PlusInfinity, domain.clone());
    }
    if !domain.is_degenerate() {
        retain_slope_window(&mut finite, domain);
    }

    finite.sort_unstable_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    finite.dedup_by(|later, kept| later.0 == kept.0);

    let mut hull: Vec<(C, C)> = Vec::with_capacity(finite.len());
    for line in finite {
        while hull.len() >= 2 && is_redundant(&hull[hull.len() - 2], &hull[hull.len() - 1], &line) {
            hull.pop();
        }
        hull.push(line);
    }

    // crossings[j] is where hull[j + 1] takes over from hull[j]
    let crossings: Vec<Frac<C>> = hull
        .windows(2)
        .map(|w| {
            Frac::new(
                w[1].1.clone() - w[0].1.clone(),
                w[0].0.clone() - w[1].0.clone(),
            )
        })
        .collect();

    let mut pieces = Vec::new();
    for (j, (slope, intercept)) in hull.into_iter().enumerate() {
        let left = if j == 0 {
            None
        } else {
            Some(&crossings[j - 1])
        };
        let right = crossings.get(j);
        let keep = if domain.is_degenerate() {
            left.is_none_or(|l| l <= &domain.lo)
                && right.is_none_or(|r| r >= &domain.lo)
                && pieces.is_empty()
        } else {
            left.is_none_or(|l| l < &domain.hi) && right.is_none_or(|r| r > &domain.lo)
        };
        if keep {
            let right_end = match right {
                Some(r) if r < &domain.hi => r.clone(),
                _ => domain.hi.clone(),
            };
            pieces.push(Piece {
                line: LinearFn::Finite { slope, intercept },
                right_end,
            });
        }
    }
    debug_assert!(!pieces.is_empty());
    PiecewiseLinearFn {
        domain: domain.clone(),
        pieces,
    }
}

/// Drops lines whose slope lies outside the envelope's slopes at the two
/// domain ends. Such lines can touch the envelope at most at an endpoint.
fn retain_slope_window<C: Coeff>(lines: &mut Vec<(C, C)>, domain: &Interval<C>) {
    let at =
        |x: &Frac<C>, l: &(C, C)| l.0.clone() * x.num().clone() + l.1.clone() * x.den().clone();
    // envelope line at lo: lowest value, then lowest slope
    let mut best_lo = 0;
    let mut val_lo = at(&domain.lo, &lines[0]);
    // envelope line at hi: lowest value, then highest slope
    let mut best_hi = 0;
    let mut val_hi = at(&domain.hi, &lines[0]);
    for (i, l) in lines.iter().enumerate().skip(1) {
        let v = at(&domain.lo, l);
        match v.cmp(&val_lo) {
            Ordering::Less => (best_lo, val_lo) = (i, v),
            Ordering::Equal if l.0 < lines[best_lo].0 => best_lo = i,
            _ => {}
        }
        let v = at(&domain.hi, l);
        match v.cmp(&val_hi) {
            Ordering::Less => (best_hi, val_hi) = (i, v),
            Ordering::Equal if l.0 > lines[best_hi].0 => best_hi = i,
            _ => {}
        }
    }
    let max_slope = lines[best_lo].0.clone();
    let min_slope = lines[best_hi].0.clone();
    lines.retain(|l| l.0 >= min_slope && l.0 <= max_slope);
}

/// `b` (slope strictly between `a` and `c`) is never strictly below both:
/// `c` overtakes `a` no later than `b` does.
fn is_redundant<C: Coeff>(a: &(C, C), b: &(C, C), c: &(C, C)) -> bool {
    let lhs = (c.1.clone() - a.1.clone()) * (a.0.clone() - b.0.clone());
    let rhs = (b.1.clone() - a.1.clone()) * (a.0.clone() - c.0.clone());
    lhs <= rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    type Q = Rational;

    fn line(m: i64, b: i64) -> LinearFn<i128> {
        LinearFn::new(m as i128, b as i128)
    }

    fn pt(n: i64, d: i64) -> Frac<i128> {
        Frac::new(n as i128, d as i128)
    }

    fn iv(lo: (i64, i64), hi: (i64, i64)) -> Interval<i128> {
        Interval::new(pt(lo.0, lo.1), pt(hi.0, hi.1)).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(line(1, 0) + line(0, -1), line(1, -1));
        assert_eq!(line(2, 3) + line(1, -5), line(3, -2));
        assert_eq!(line(2, 3) + LinearFn::PlusInfinity, LinearFn::PlusInfinity);
        assert_eq!(
            LinearFn::PlusInfinity + line(0, 0),
            LinearFn::<i128>::PlusInfinity
        );
    }

    #[test]
    fn two_line_crossing() {
        let f = lower_envelope([line(2, 0), line(1, 1)], &iv((0, 1), (3, 1)));
        assert_eq!(f.pieces().len(), 2);
        assert_eq!(f.pieces()[0].line, line(2, 0));
        assert_eq!(f.pieces()[0].right_end, pt(1, 1));
        assert_eq!(f.pieces()[1].line, line(1, 1));
        assert_eq!(f.breakpoints().cloned().collect::<Vec<_>>(), vec![pt(1, 1)]);
        assert_eq!(f.eval(&pt(1, 1)).unwrap(), Some(pt(2, 1)));
        assert_eq!(f.eval(&pt(0, 1)).unwrap(), Some(pt(0, 1)));
        assert_eq!(f.eval(&pt(3, 1)).unwrap(), Some(pt(4, 1)));
        assert!(matches!(f.eval(&pt(4, 1)), Err(Error::Domain(_))));
        assert!(matches!(f.eval(&pt(-1, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn single_line_has_no_breakpoints() {
        let f = lower_envelope([line(1, 0)], &iv((0, 1), (5, 1)));
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.breakpoints().count(), 0);
    }

    #[test]
    fn three_line_envelope_skips_dominated_line() {
        let lines = [line(3, -1), line(1, 0), line(1, 1)];
        let dom = iv((0, 1), (2, 1));
        let f = lower_envelope(lines.clone(), &dom);
        assert_eq!(f.pieces().len(), 2);
        assert_eq!(f.pieces()[0].line, line(3, -1));
        assert_eq!(f.pieces()[1].line, line(1, 0));
        assert_eq!(f.breakpoints().cloned().collect::<Vec<_>>(), vec![pt(1, 2)]);
        // 100 sample points against a direct minimum
        for k in 0..100 {
            let x = pt(2 * k, 99);
            let direct = lines.iter().filter_map(|l| l.value_at(&x)).min().unwrap();
            assert_eq!(f.eval(&x).unwrap(), Some(direct));
        }
    }

    #[test]
    fn all_infinite_is_constant_infinity() {
        let f = lower_envelope(
            [LinearFn::PlusInfinity, LinearFn::PlusInfinity],
            &iv((0, 1), (1, 1)),
        );
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.eval(&pt(1, 2)).unwrap(), None);
        let g = lower_envelope([LinearFn::PlusInfinity, line(0, 4)], &iv((0, 1), (1, 1)));
        assert_eq!(g.pieces()[0].line, line(0, 4));
    }

    #[test]
    fn crossing_outside_domain_is_clipped() {
        // crossing at 1, domain [2, 3]
        let f = lower_envelope([line(2, 0), line(1, 1)], &iv((2, 1), (3, 1)));
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.pieces()[0].line, line(1, 1));
        // crossing exactly at the lower end
        let g = lower_envelope([line(2, 0), line(1, 1)], &iv((1, 1), (3, 1)));
        assert_eq!(g.pieces().len(), 1);
        assert_eq!(g.pieces()[0].line, line(1, 1));
        // crossing exactly at the upper end
        let h = lower_envelope([line(2, 0), line(1, 1)], &iv((0, 1), (1, 1)));
        assert_eq!(h.pieces().len(), 1);
        assert_eq!(h.pieces()[0].line, line(2, 0));
    }

    #[test]
    fn degenerate_domain() {
        let f = lower_envelope([line(2, 0), line(1, 1), line(0, 3)], &iv((1, 1), (1, 1)));
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.eval(&pt(1, 1)).unwrap(), Some(pt(2, 1)));
    }

    #[test]
    fn restrict_examples() {
        let f = lower_envelope([line(2, 0), line(1, 1)], &iv((0, 1), (3, 1)));
        assert_eq!(f.restrict_to_line(&iv((2, 1), (3, 1))).unwrap(), line(1, 1));
        assert_eq!(f.restrict_to_line(&iv((0, 1), (1, 1))).unwrap(), line(2, 0));
        assert_eq!(f.restrict_to_line(&iv((1, 1), (3, 1))).unwrap(), line(1, 1));
        match f.restrict_to_line(&iv((1, 2), (3, 2))) {
            Err(Error::BreakpointInside(b)) => assert_eq!(b, int(1)),
            other => panic!("expected BreakpointInside, got {other:?}"),
        }
        assert!(matches!(
            f.restrict_to_line(&iv((2, 1), (4, 1))),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rational_coefficients() {
        let l1 = LinearFn::new(rat(1, 2), rat(1, 3));
        let l2 = LinearFn::new(rat(-1, 4), int(1));
        let dom = Interval::<Q>::from_rationals(&int(0), &int(4)).unwrap();
        let f = lower_envelope([l1.clone(), l2.clone()], &dom);
        // (1 - 1/3) / (1/2 + 1/4) = 8/9
        let bps: Vec<Q> = f.breakpoints().map(|b| b.to_rational()).collect();
        assert_eq!(bps, vec![rat(8, 9)]);
        assert_eq!(f.pieces()[0].line, l1);
        assert_eq!(f.pieces()[1].line, l2);
    }

    #[test]
    fn parallel_duplicates_keep_lower() {
        let f = lower_envelope([line(1, 5), line(1, 2), line(1, 2)], &iv((0, 1), (1, 1)));
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.pieces()[0].line, line(1, 2));
    }

    #[test]
    fn root_of_line() {
        assert_eq!(line(2, -1).root(), Some(pt(1, 2)));
        assert_eq!(line(0, -1).root(), None);
        assert_eq!(LinearFn::<i128>::PlusInfinity.root(), None);
    }
}
