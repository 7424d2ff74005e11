//! Intervals over the rationals with open/closed/infinite endpoints.
//!
//! An interval describes a set of values: `x` belongs to it when `x`
//! satisfies the domain (an integer, a rational, or anything) and the
//! numeric view of `x` (non-numbers count as 0) lies between the bounds.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::term::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Integer,
    Rational,
    Unknown,
}

impl Domain {
    /// The more specific of the two.
    pub fn meet(self, other: Domain) -> Domain {
        self.min(other)
    }

    pub fn join(self, other: Domain) -> Domain {
        self.max(other)
    }

    pub fn admits(self, v: &Value) -> bool {
        match self {
            Domain::Integer => v.is_integer(),
            Domain::Rational => v.as_number().is_some(),
            Domain::Unknown => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Unbounded,
    Closed(BigRational),
    Open(BigRational),
}

impl Bound {
    pub fn value(&self) -> Option<&BigRational> {
        match self {
            Bound::Unbounded => None,
            Bound::Closed(q) | Bound::Open(q) => Some(q),
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Bound::Closed(_))
    }

    pub fn closed_int(n: i64) -> Bound {
        Bound::Closed(BigRational::from_integer(n.into()))
    }
}

/// Orders lower bounds by how much they exclude: a larger lower bound is
/// tighter.
fn cmp_lo(a: &Bound, b: &Bound) -> Ordering {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
        (Bound::Unbounded, _) => Ordering::Less,
        (_, Bound::Unbounded) => Ordering::Greater,
        (x, y) => x
            .value()
            .cmp(&y.value())
            .then_with(|| (!x.is_closed()).cmp(&!y.is_closed())),
    }
}

/// Orders upper bounds: a larger upper bound is looser.
fn cmp_hi(a: &Bound, b: &Bound) -> Ordering {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
        (Bound::Unbounded, _) => Ordering::Greater,
        (_, Bound::Unbounded) => Ordering::Less,
        (x, y) => x
            .value()
            .cmp(&y.value())
            .then_with(|| x.is_closed().cmp(&y.is_closed())),
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    domain: Domain,
    lo: Bound,
    hi: Bound,
}

fn floor(q: &BigRational) -> BigRational {
    BigRational::from_integer(q.floor().to_integer())
}

fn ceil(q: &BigRational) -> BigRational {
    BigRational::from_integer(q.ceil().to_integer())
}

impl Interval {
    /// Builds a normalized interval, or `None` if it contains no value.
    /// Integer intervals get closed integral endpoints.
    pub fn new(domain: Domain, lo: Bound, hi: Bound) -> Option<Interval> {
        let (lo, hi) = if domain == Domain::Integer {
            let lo = match lo {
                Bound::Closed(q) => Bound::Closed(ceil(&q)),
                Bound::Open(q) => Bound::Closed(floor(&q) + BigRational::one()),
                Bound::Unbounded => Bound::Unbounded,
            };
            let hi = match hi {
                Bound::Closed(q) => Bound::Closed(floor(&q)),
                Bound::Open(q) => Bound::Closed(ceil(&q) - BigRational::one()),
                Bound::Unbounded => Bound::Unbounded,
            };
            (lo, hi)
        } else {
            (lo, hi)
        };
        if let (Some(a), Some(b)) = (lo.value(), hi.value()) {
            match a.cmp(b) {
                Ordering::Greater => return None,
                Ordering::Equal if !(lo.is_closed() && hi.is_closed()) => return None,
                _ => {}
            }
        }
        Some(Interval { domain, lo, hi })
    }

    pub fn top() -> Interval {
        Interval {
            domain: Domain::Unknown,
            lo: Bound::Unbounded,
            hi: Bound::Unbounded,
        }
    }

    pub fn of_domain(domain: Domain) -> Interval {
        Interval {
            domain,
            lo: Bound::Unbounded,
            hi: Bound::Unbounded,
        }
    }

    /// `[q, q]`, integer-domain when `q` is integral.
    pub fn point(q: BigRational) -> Interval {
        let domain = if q.is_integer() {
            Domain::Integer
        } else {
            Domain::Rational
        };
        Interval {
            domain,
            lo: Bound::Closed(q.clone()),
            hi: Bound::Closed(q),
        }
    }

    /// Convenience constructor for closed integer intervals.
    pub fn int_range(lo: i64, hi: i64) -> Option<Interval> {
        Interval::new(
            Domain::Integer,
            Bound::closed_int(lo),
            Bound::closed_int(hi),
        )
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn lo(&self) -> &Bound {
        &self.lo
    }

    pub fn hi(&self) -> &Bound {
        &self.hi
    }

    pub fn is_top(&self) -> bool {
        self.domain == Domain::Unknown && self.lo == Bound::Unbounded && self.hi == Bound::Unbounded
    }

    pub fn as_point(&self) -> Option<&BigRational> {
        match (&self.lo, &self.hi) {
            (Bound::Closed(a), Bound::Closed(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn with_domain(&self, domain: Domain) -> Option<Interval> {
        Interval::new(domain, self.lo.clone(), self.hi.clone())
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        let above = match &self.lo {
            Bound::Unbounded => true,
            Bound::Closed(a) => q >= a,
            Bound::Open(a) => q > a,
        };
        let below = match &self.hi {
            Bound::Unbounded => true,
            Bound::Closed(b) => q <= b,
            Bound::Open(b) => q < b,
        };
        above && below
    }

    pub fn contains_value(&self, v: &Value) -> bool {
        self.domain.admits(v) && self.contains_rational(&v.rfix())
    }

    /// Whether every value of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        // An empty intersection cannot happen with a non-empty `self` here,
        // so comparing against the intersection is exact.
        self.intersect(other).as_ref() == Some(self)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if cmp_lo(&self.lo, &other.lo) == Ordering::Less {
            other.lo.clone()
        } else {
            self.lo.clone()
        };
        let hi = if cmp_hi(&self.hi, &other.hi) == Ordering::Greater {
            other.hi.clone()
        } else {
            self.hi.clone()
        };
        Interval::new(self.domain.meet(other.domain), lo, hi)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        let lo = if cmp_lo(&self.lo, &other.lo) == Ordering::Greater {
            other.lo.clone()
        } else {
            self.lo.clone()
        };
        let hi = if cmp_hi(&self.hi, &other.hi) == Ordering::Less {
            other.hi.clone()
        } else {
            self.hi.clone()
        };
        Interval::new(self.domain.join(other.domain), lo, hi)
            .expect("hull of non-empty intervals is non-empty")
    }

    /// Numeric result domain of an arithmetic operation.
    fn result_domain(a: Domain, b: Domain) -> Domain {
        if a == Domain::Integer && b == Domain::Integer {
            Domain::Integer
        } else {
            Domain::Rational
        }
    }

    /// Interval of `x + y`, where the operands are read through their
    /// numeric view.
    pub fn add(&self, other: &Interval) -> Interval {
        fn sum(a: &Bound, b: &Bound) -> Bound {
            match (a, b) {
                (Bound::Unbounded, _) | (_, Bound::Unbounded) => Bound::Unbounded,
                (Bound::Closed(x), Bound::Closed(y)) => Bound::Closed(x + y),
                (x, y) => Bound::Open(x.value().unwrap() + y.value().unwrap()),
            }
        }
        Interval::new(
            Interval::result_domain(self.domain, other.domain),
            sum(&self.lo, &other.lo),
            sum(&self.hi, &other.hi),
        )
        .expect("sum of non-empty intervals is non-empty")
    }

    pub fn negate(&self) -> Interval {
        fn neg(b: &Bound) -> Bound {
            match b {
                Bound::Unbounded => Bound::Unbounded,
                Bound::Closed(q) => Bound::Closed(-q),
                Bound::Open(q) => Bound::Open(-q),
            }
        }
        let domain = Interval::result_domain(self.domain, Domain::Integer);
        Interval::new(domain, neg(&self.hi), neg(&self.lo))
            .expect("negation preserves non-emptiness")
    }

    /// Interval of `x * y`: the extreme endpoint products, with the
    /// convention 0 * infinity = 0.
    pub fn mul(&self, other: &Interval) -> Interval {
        let mut candidates: Vec<(Ext, bool)> = Vec::with_capacity(4);
        for a in [Ext::lower(&self.lo), Ext::upper(&self.hi)] {
            for b in [Ext::lower(&other.lo), Ext::upper(&other.hi)] {
                candidates.push(a.times(&b));
            }
        }
        let lo = extreme(&candidates, Ordering::Less);
        let hi = extreme(&candidates, Ordering::Greater);
        Interval::new(Interval::result_domain(self.domain, other.domain), lo, hi)
            .expect("product of non-empty intervals is non-empty")
    }
}

/// An endpoint as an extended rational with its attainment flag.
#[derive(Clone, Debug)]
struct Ext {
    value: ExtValue,
    closed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum ExtValue {
    NegInf,
    Finite(BigRational),
    PosInf,
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtValue::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl Ext {
    fn lower(b: &Bound) -> Ext {
        match b {
            Bound::Unbounded => Ext {
                value: ExtValue::NegInf,
                closed: false,
            },
            Bound::Closed(q) => Ext {
                value: ExtValue::Finite(q.clone()),
                closed: true,
            },
            Bound::Open(q) => Ext {
                value: ExtValue::Finite(q.clone()),
                closed: false,
            },
        }
    }

    fn upper(b: &Bound) -> Ext {
        match b {
            Bound::Unbounded => Ext {
                value: ExtValue::PosInf,
                closed: false,
            },
            other => Ext::lower(other),
        }
    }

    fn is_closed_zero(&self) -> bool {
        self.closed && matches!(&self.value, ExtValue::Finite(q) if q.is_zero())
    }

    /// Product value and whether some pair of member points attains it.
    fn times(&self, other: &Ext) -> (Ext, bool) {
        use ExtValue::*;
        let value = match (&self.value, &other.value) {
            (Finite(a), Finite(b)) => Finite(a * b),
            (Finite(a), inf) | (inf, Finite(a)) => {
                if a.is_zero() {
                    Finite(BigRational::zero())
                } else if (a > &BigRational::zero()) == (*inf == PosInf) {
                    PosInf
                } else {
                    NegInf
                }
            }
            (x, y) => {
                if x == y {
                    PosInf
                } else {
                    NegInf
                }
            }
        };
        let attained =
            (self.closed && other.closed) || self.is_closed_zero() || other.is_closed_zero();
        let attained = attained && matches!(value, Finite(_));
        (
            Ext {
                value,
                closed: attained,
            },
            attained,
        )
    }
}

fn extreme(cands: &[(Ext, bool)], want: Ordering) -> Bound {
    let best = cands
        .iter()
        .map(|(e, _)| &e.value)
        .fold(None::<&ExtValue>, |acc, v| match acc {
            Some(a) if a.cmp(v) == want || a == v => Some(a),
            _ => Some(v),
        })
        .unwrap();
    match best {
        ExtValue::Finite(q) => {
            let attained = cands.iter().any(|(e, att)| *att && &e.value == best);
            if attained {
                Bound::Closed(q.clone())
            } else {
                Bound::Open(q.clone())
            }
        }
        _ => Bound::Unbounded,
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dom = match self.domain {
            Domain::Integer => "integer ",
            Domain::Rational => "rational ",
            Domain::Unknown => "",
        };
        let lo = match &self.lo {
            Bound::Unbounded => "(-inf".to_string(),
            Bound::Closed(q) => format!("[{q}"),
            Bound::Open(q) => format!("({q}"),
        };
        let hi = match &self.hi {
            Bound::Unbounded => "+inf)".to_string(),
            Bound::Closed(q) => format!("{q}]"),
            Bound::Open(q) => format!("{q})"),
        };
        write!(f, "{dom}{lo}, {hi}")
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn closed(lo: i64, hi: i64) -> Interval {
        Interval::new(
            Domain::Rational,
            Bound::closed_int(lo),
            Bound::closed_int(hi),
        )
        .unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn integer_endpoints_move_inward() {
        let i = Interval::new(Domain::Integer, Bound::Open(rat(0)), Bound::Open(rat(16))).unwrap();
        assert_eq!(i, Interval::int_range(1, 15).unwrap());
        let i = Interval::new(Domain::Integer, Bound::Closed(q(1, 2)), Bound::Unbounded).unwrap();
        assert_eq!(i.lo(), &Bound::closed_int(1));
        assert!(Interval::new(Domain::Integer, Bound::Open(rat(0)), Bound::Open(rat(1))).is_none());
        assert!(
            Interval::new(Domain::Rational, Bound::Open(rat(0)), Bound::Open(rat(1))).is_some()
        );
        assert!(
            Interval::new(Domain::Rational, Bound::Open(rat(1)), Bound::Closed(rat(1))).is_none()
        );
    }

    #[test]
    fn intersection_and_hull() {
        let a = Interval::int_range(0, 15).unwrap();
        let b = Interval::int_range(10, 20).unwrap();
        assert_eq!(a.intersect(&b), Interval::int_range(10, 15));
        let a = Interval::int_range(0, 3).unwrap();
        let b = Interval::int_range(10, 12).unwrap();
        assert_eq!(a.hull(&b), Interval::int_range(0, 12).unwrap());
        assert_eq!(a.intersect(&b), None);
        let open = Interval::new(Domain::Rational, Bound::Open(rat(0)), Bound::Unbounded).unwrap();
        let closed0 = closed(0, 5);
        assert_eq!(open.intersect(&closed0).unwrap().lo(), &Bound::Open(rat(0)));
        assert_eq!(open.hull(&closed0).lo(), &Bound::Closed(rat(0)));
    }

    #[test]
    fn arithmetic_examples() {
        let a = Interval::int_range(0, 15).unwrap();
        let b = Interval::int_range(1, 2).unwrap();
        assert_eq!(a.add(&b), Interval::int_range(1, 17).unwrap());
        let a = Interval::int_range(-2, 3).unwrap();
        let b = Interval::int_range(-1, 4).unwrap();
        assert_eq!(a.mul(&b), Interval::int_range(-8, 12).unwrap());
        assert_eq!(
            Interval::int_range(0, 15).unwrap().negate(),
            Interval::int_range(-15, 0).unwrap()
        );
    }

    #[test]
    fn infinite_products() {
        let pos =
            Interval::new(Domain::Rational, Bound::Open(rat(0)), Bound::Closed(rat(1))).unwrap();
        let big = Interval::new(Domain::Rational, Bound::Closed(rat(1)), Bound::Unbounded).unwrap();
        let p = pos.mul(&big);
        assert_eq!(p.lo(), &Bound::Open(rat(0)));
        assert_eq!(p.hi(), &Bound::Unbounded);
        let zero = Interval::point(rat(0));
        assert_eq!(
            zero.mul(&Interval::top()),
            Interval::point(rat(0))
                .with_domain(Domain::Rational)
                .unwrap()
        );
        let nonneg = closed(0, 1);
        assert_eq!(nonneg.mul(&big).lo(), &Bound::Closed(rat(0)));
    }

    #[test]
    fn membership_uses_numeric_view() {
        let i = Interval::new(Domain::Unknown, Bound::Unbounded, Bound::Open(rat(16))).unwrap();
        assert!(i.contains_value(&Value::sym("A")));
        let j = Interval::new(Domain::Unknown, Bound::closed_int(16), Bound::Unbounded).unwrap();
        assert!(!j.contains_value(&Value::sym("A")));
        assert!(!Interval::of_domain(Domain::Integer).contains_value(&Value::rat(1, 2)));
    }

    fn arb_bound() -> impl Strategy<Value = Bound> {
        prop_oneof![
            1 => Just(Bound::Unbounded),
            3 => (-12i64..12, 1i64..4).prop_map(|(n, d)| Bound::Closed(q(n, d))),
            3 => (-12i64..12, 1i64..4).prop_map(|(n, d)| Bound::Open(q(n, d))),
        ]
    }

    fn arb_domain() -> impl Strategy<Value = Domain> {
        prop_oneof![
            Just(Domain::Integer),
            Just(Domain::Rational),
            Just(Domain::Unknown)
        ]
    }

    fn arb_interval() -> impl Strategy<Value = Interval> {
        (arb_domain(), arb_bound(), arb_bound())
            .prop_filter_map("empty", |(d, lo, hi)| Interval::new(d, lo, hi))
    }

    fn arb_value() -> impl Strategy<Value = Value> {
        prop_oneof![
            4 => (-15i64..15, 1i64..5).prop_map(|(n, d)| Value::rat(n, d)),
            1 => Just(Value::sym("A")),
            1 => Just(Value::nil()),
        ]
    }

    proptest! {
        #[test]
        fn intersection_is_exact(a in arb_interval(), b in arb_interval(), vs in proptest::collection::vec(arb_value(), 50)) {
            let ab = a.intersect(&b);
            for v in &vs {
                let both = a.contains_value(v) && b.contains_value(v);
                prop_assert_eq!(ab.as_ref().is_some_and(|i| i.contains_value(v)), both);
            }
        }

        #[test]
        fn hull_contains_both(a in arb_interval(), b in arb_interval(), vs in proptest::collection::vec(arb_value(), 50)) {
            let h = a.hull(&b);
            for v in &vs {
                if a.contains_value(v) || b.contains_value(v) {
                    prop_assert!(h.contains_value(v));
                }
            }
        }

        #[test]
        fn arithmetic_contains_results(a in arb_interval(), b in arb_interval(), xs in proptest::collection::vec((arb_value(), arb_value()), 40)) {
            let (sum, prod, neg) = (a.add(&b), a.mul(&b), a.negate());
            for (x, y) in &xs {
                if a.contains_value(x) && b.contains_value(y) {
                    let (x, y) = (x.rfix(), y.rfix());
                    prop_assert!(sum.contains_value(&Value::Num(&x + &y)));
                    prop_assert!(prod.contains_value(&Value::Num(&x * &y)));
                    prop_assert!(neg.contains_value(&Value::Num(-&x)));
                }
            }
        }
    }
}
