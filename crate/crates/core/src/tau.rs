//! Abstract values: what is known about the value of a term.
//!
//! A tau is a conjunction of facts about one value: recognizers known to
//! hold and known to fail, an interval for its numeric view, an optional
//! constant it equals, and constants it differs from. The `bottom` tau is
//! the contradictory one.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::db::{IdSet, RecId, TauDatabase};
use crate::interval::{Bound, Domain, Interval};
use crate::term::Value;

/// At most this many excluded constants are kept; the oldest go first.
pub const NEQ_CAP: usize = 64;

/// Normalization passes per construction.
const NORMALIZE_ROUNDS: usize = 4;

#[derive(Clone, Debug)]
pub struct Tau {
    pos: IdSet,
    neg: IdSet,
    interval: Option<Interval>,
    eq: Option<Value>,
    neq: Vec<Value>,
    bottom: bool,
}

impl PartialEq for Tau {
    fn eq(&self, other: &Self) -> bool {
        if self.bottom || other.bottom {
            return self.bottom == other.bottom;
        }
        self.pos == other.pos
            && self.neg == other.neg
            && self.interval == other.interval
            && self.eq == other.eq
            && self.neq.len() == other.neq.len()
            && self.neq.iter().all(|c| other.neq.contains(c))
    }
}

impl Eq for Tau {}

/// A fact a tau may entail about its value `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goal {
    /// `(r x)`, or its negation when the flag is false.
    Rec(RecId, bool),
    /// `x = c`, or `x /= c`.
    Equal(Value, bool),
    /// `(< x c)`, or `(not (< x c))`.
    Lt(BigRational, bool),
    /// `(< c x)`, or `(not (< c x))`.
    Gt(BigRational, bool),
}

/// The answer of a built-in recognizer on a constant.
pub fn builtin_value(db: &TauDatabase, r: RecId, v: &Value) -> Option<bool> {
    let b = db.builtins();
    let int =
        |pred: fn(&BigRational) -> bool| v.as_number().is_some_and(|q| q.is_integer() && pred(q));
    Some(if r == b.integerp {
        v.is_integer()
    } else if r == b.rationalp {
        v.as_number().is_some()
    } else if r == b.consp {
        matches!(v, Value::Cons(_))
    } else if r == b.symbolp {
        matches!(v, Value::Sym(_))
    } else if r == b.stringp {
        matches!(v, Value::Str(_))
    } else if r == b.natp {
        int(|q| !q.is_negative())
    } else if r == b.posp {
        int(|q| q.is_positive())
    } else {
        return None;
    })
}

fn meet(a: Option<Interval>, b: Option<&Interval>) -> Result<Option<Interval>, ()> {
    match (a, b) {
        (None, None) => Ok(None),
        (Some(a), None) => Ok(Some(a)),
        (None, Some(b)) => Ok(Some(b.clone())),
        (Some(a), Some(b)) => a.intersect(b).map(Some).ok_or(()),
    }
}

fn zero_point() -> Interval {
    Interval::new(
        Domain::Unknown,
        Bound::Closed(BigRational::zero()),
        Bound::Closed(BigRational::zero()),
    )
    .expect("non-empty")
}

impl Tau {
    pub fn top() -> Tau {
        Tau {
            pos: IdSet::new(),
            neg: IdSet::new(),
            interval: None,
            eq: None,
            neq: Vec::new(),
            bottom: false,
        }
    }

    pub fn bottom() -> Tau {
        Tau {
            bottom: true,
            ..Tau::top()
        }
    }

    /// Builds and normalizes a tau from raw facts.
    pub fn from_parts(
        db: &TauDatabase,
        pos: IdSet,
        neg: IdSet,
        interval: Option<Interval>,
        eq: Option<Value>,
        neq: Vec<Value>,
    ) -> Tau {
        Tau {
            pos,
            neg,
            interval,
            eq,
            neq,
            bottom: false,
        }
        .normalize(db)
    }

    /// The facts following from `(r x)`.
    pub fn from_closure(db: &TauDatabase, r: RecId) -> Tau {
        let c = db.closure(r);
        if c.contradictory {
            return Tau::bottom();
        }
        Tau::from_parts(
            db,
            c.pos.clone(),
            c.neg.clone(),
            c.interval.clone(),
            None,
            Vec::new(),
        )
    }

    pub fn rec(db: &TauDatabase, r: RecId, positive: bool) -> Tau {
        if positive {
            Tau::from_closure(db, r)
        } else {
            Tau::from_parts(
                db,
                IdSet::new(),
                IdSet::singleton(r),
                None,
                None,
                Vec::new(),
            )
        }
    }

    /// `x = v`, with the built-in recognizers decided on `v`.
    pub fn constant(db: &TauDatabase, v: Value) -> Tau {
        Tau::from_parts(db, IdSet::new(), IdSet::new(), None, Some(v), Vec::new())
    }

    pub fn not_constant(db: &TauDatabase, v: Value) -> Tau {
        Tau::from_parts(db, IdSet::new(), IdSet::new(), None, None, vec![v])
    }

    pub fn of_interval(db: &TauDatabase, i: Interval) -> Tau {
        Tau::from_parts(db, IdSet::new(), IdSet::new(), Some(i), None, Vec::new())
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    pub fn is_top(&self) -> bool {
        !self.bottom
            && self.pos.is_empty()
            && self.neg.is_empty()
            && self.interval.is_none()
            && self.eq.is_none()
            && self.neq.is_empty()
    }

    pub fn pos(&self) -> &IdSet {
        &self.pos
    }

    pub fn neg(&self) -> &IdSet {
        &self.neg
    }

    pub fn interval(&self) -> Option<&Interval> {
        self.interval.as_ref()
    }

    pub fn eq_const(&self) -> Option<&Value> {
        self.eq.as_ref()
    }

    pub fn neq_consts(&self) -> &[Value] {
        &self.neq
    }

    /// An interval containing the numeric view of every value described,
    /// or `None` when nothing is known.
    pub fn rfix_interval(&self) -> Option<Interval> {
        match &self.eq {
            Some(Value::Num(q)) => Some(Interval::point(q.clone())),
            Some(_) => Some(zero_point()),
            None => self.interval.clone(),
        }
    }

    pub fn conjoin(&self, other: &Tau, db: &TauDatabase) -> Tau {
        if self.bottom || other.bottom {
            return Tau::bottom();
        }
        let mut pos = self.pos.clone();
        pos.union_with(&other.pos);
        let mut neg = self.neg.clone();
        neg.union_with(&other.neg);
        let Ok(interval) = meet(self.interval.clone(), other.interval.as_ref()) else {
            return Tau::bottom();
        };
        let eq = match (&self.eq, &other.eq) {
            (Some(a), Some(b)) if a != b => return Tau::bottom(),
            (Some(a), _) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        let mut neq = self.neq.clone();
        for c in &other.neq {
            if !neq.contains(c) {
                neq.push(c.clone());
            }
        }
        Tau::from_parts(db, pos, neg, interval, eq, neq)
    }

    /// The weakest facts true of both.
    pub fn join(&self, other: &Tau, db: &TauDatabase) -> Tau {
        if self.bottom {
            return other.clone();
        }
        if other.bottom {
            return self.clone();
        }
        let mut pos = self.pos.clone();
        pos.intersect_with(&other.pos);
        let mut neg = self.neg.clone();
        neg.intersect_with(&other.neg);
        let interval = match (self.rfix_interval(), other.rfix_interval()) {
            (Some(a), Some(b)) => Some(a.hull(&b)),
            _ => None,
        };
        let eq = match (&self.eq, &other.eq) {
            (Some(a), Some(b)) if a == b => Some(a.clone()),
            _ => None,
        };
        let mut neq: Vec<Value> = Vec::new();
        for c in self.neq.iter().chain(&other.neq) {
            if !neq.contains(c)
                && self.implies(&Goal::Equal(c.clone(), false), db)
                && other.implies(&Goal::Equal(c.clone(), false), db)
            {
                neq.push(c.clone());
            }
        }
        Tau::from_parts(db, pos, neg, interval, eq, neq)
    }

    /// Whether the goal follows from these facts alone.
    pub fn implies(&self, goal: &Goal, db: &TauDatabase) -> bool {
        if self.bottom {
            return true;
        }
        match goal {
            Goal::Rec(r, true) => {
                self.pos.contains(*r)
                    || self.eq.as_ref().and_then(|v| builtin_value(db, *r, v)) == Some(true)
            }
            Goal::Rec(r, false) => {
                self.neg.contains(*r)
                    || self.eq.as_ref().and_then(|v| builtin_value(db, *r, v)) == Some(false)
            }
            Goal::Equal(c, true) => self.eq.as_ref() == Some(c),
            Goal::Equal(c, false) => {
                if let Some(v) = &self.eq {
                    return v != c;
                }
                self.neq.contains(c)
                    || self.interval.as_ref().is_some_and(|i| !i.contains_value(c))
                    || self
                        .pos
                        .ones()
                        .any(|r| builtin_value(db, r, c) == Some(false))
                    || self
                        .neg
                        .ones()
                        .any(|r| builtin_value(db, r, c) == Some(true))
            }
            Goal::Lt(c, positive) => {
                let Some(i) = self.rfix_interval() else {
                    return false;
                };
                if *positive {
                    match i.hi() {
                        Bound::Closed(h) => h < c,
                        Bound::Open(h) => h <= c,
                        Bound::Unbounded => false,
                    }
                } else {
                    match i.lo() {
                        Bound::Closed(l) | Bound::Open(l) => l >= c,
                        Bound::Unbounded => false,
                    }
                }
            }
            Goal::Gt(c, positive) => {
                let Some(i) = self.rfix_interval() else {
                    return false;
                };
                if *positive {
                    match i.lo() {
                        Bound::Closed(l) => l > c,
                        Bound::Open(l) => l >= c,
                        Bound::Unbounded => false,
                    }
                } else {
                    match i.hi() {
                        Bound::Closed(h) | Bound::Open(h) => h <= c,
                        Bound::Unbounded => false,
                    }
                }
            }
        }
    }

    /// Whether `v` is consistent with every fact. Recognizers other than
    /// the built-ins are answered by `user`; `None` means "don't know" and
    /// is not held against `v`.
    pub fn contains(
        &self,
        v: &Value,
        db: &TauDatabase,
        user: &dyn Fn(RecId, &Value) -> Option<bool>,
    ) -> bool {
        if self.bottom {
            return false;
        }
        let holds = |r: RecId| builtin_value(db, r, v).or_else(|| user(r, v));
        self.pos.ones().all(|r| holds(r) != Some(false))
            && self.neg.ones().all(|r| holds(r) != Some(true))
            && self.interval.as_ref().is_none_or(|i| i.contains_value(v))
            && self.eq.as_ref().is_none_or(|c| c == v)
            && !self.neq.contains(v)
    }

    /// Checks the structural invariants of a normalized tau.
    pub fn validate(&self, db: &TauDatabase) -> Result<(), String> {
        if self.bottom {
            return Ok(());
        }
        if let Some(r) = self.pos.first_common(&self.neg) {
            return Err(format!("{} is both known and excluded", db.rec_name(r)));
        }
        for r in self.pos.ones() {
            let c = db.closure(r);
            if !c.pos.is_subset(&self.pos) || !c.neg.is_subset(&self.neg) {
                return Err(format!("not closed under {}", db.rec_name(r)));
            }
        }
        if let Some(c) = &self.eq {
            if !self.neq.is_empty() {
                return Err("exclusions next to an equality".into());
            }
            let expected = c.as_number().map(|q| Interval::point(q.clone()));
            if self.interval != expected {
                return Err(format!(
                    "interval {:?} does not match constant {c}",
                    self.interval
                ));
            }
        }
        if self.neq.len() > NEQ_CAP {
            return Err("too many exclusions".into());
        }
        if let Some(i) = &self.interval {
            if let Some(c) = self.neq.iter().find(|c| !i.contains_value(c)) {
                return Err(format!("exclusion {c} lies outside {i}"));
            }
        }
        Ok(())
    }

    fn snapshot(&self) -> (usize, usize, Option<Interval>, bool, usize) {
        (
            self.pos.count(),
            self.neg.count(),
            self.interval.clone(),
            self.eq.is_some(),
            self.neq.len(),
        )
    }

    fn normalize(mut self, db: &TauDatabase) -> Tau {
        for _ in 0..NORMALIZE_ROUNDS {
            let before = self.snapshot();
            if self.step(db).is_err() {
                return Tau::bottom();
            }
            if self.snapshot() == before {
                break;
            }
        }
        self
    }

    /// One propagation round; `Err` means the facts are contradictory.
    fn step(&mut self, db: &TauDatabase) -> Result<(), ()> {
        let b = *db.builtins();
        let members: Vec<RecId> = self.pos.ones().collect();
        for r in members {
            let c = db.closure(r);
            if c.contradictory {
                return Err(());
            }
            self.pos.union_with(&c.pos);
            self.neg.union_with(&c.neg);
            self.interval = meet(self.interval.take(), c.interval.as_ref())?;
        }
        if let Some(c) = self.eq.clone() {
            for r in [
                b.integerp,
                b.rationalp,
                b.consp,
                b.symbolp,
                b.stringp,
                b.natp,
                b.posp,
            ] {
                match builtin_value(db, r, &c) {
                    Some(true) => self.pos.insert(r),
                    _ => self.neg.insert(r),
                };
            }
            if self.neq.contains(&c) {
                return Err(());
            }
            if !self.interval.as_ref().is_none_or(|i| i.contains_value(&c)) {
                return Err(());
            }
            self.interval = c.as_number().map(|q| Interval::point(q.clone()));
            self.neq.clear();
        } else {
            self.interval_facts(db)?;
        }
        if !self.pos.is_disjoint(&self.neg) {
            return Err(());
        }
        Ok(())
    }

    /// Facts read off the interval, and the interval tightened by them.
    fn interval_facts(&mut self, db: &TauDatabase) -> Result<(), ()> {
        let b = *db.builtins();
        let zero = BigRational::zero();
        if self.neg.contains(b.rationalp) {
            self.interval = meet(self.interval.take(), Some(&zero_point()))?;
        }
        if self.neg.contains(b.integerp) {
            if let Some(i) = &self.interval {
                if i.domain() == Domain::Integer {
                    return Err(());
                }
            }
        }
        if self.neg.contains(b.natp) && self.pos.contains(b.integerp) {
            let below = Interval::new(Domain::Integer, Bound::Unbounded, Bound::Open(zero.clone()))
                .expect("non-empty");
            self.interval = meet(self.interval.take(), Some(&below))?;
        }
        if self.neg.contains(b.posp) && self.pos.contains(b.integerp) {
            let below = Interval::new(
                Domain::Integer,
                Bound::Unbounded,
                Bound::Closed(zero.clone()),
            )
            .expect("non-empty");
            self.interval = meet(self.interval.take(), Some(&below))?;
        }
        let Some(mut i) = self.interval.clone() else {
            self.cap_neq();
            return Ok(());
        };
        if !i.contains_rational(&zero) && i.domain() == Domain::Unknown {
            i = i.with_domain(Domain::Rational).ok_or(())?;
        }
        if self.neg.contains(b.rationalp) && i.domain() != Domain::Unknown {
            return Err(());
        }
        if i.domain() == Domain::Integer {
            i = self.shrink_integer_ends(i)?;
        }
        match i.domain() {
            Domain::Integer => {
                self.pos.insert(b.integerp);
                self.pos.insert(b.rationalp);
                if let Some(l) = i.lo().value() {
                    if !l.is_negative() {
                        self.pos.insert(b.natp);
                    }
                    if l.is_positive() {
                        self.pos.insert(b.posp);
                    }
                }
                if let Some(h) = i.hi().value() {
                    if h.is_negative() {
                        self.neg.insert(b.natp);
                    }
                    if !h.is_positive() {
                        self.neg.insert(b.posp);
                    }
                }
            }
            Domain::Rational => {
                self.pos.insert(b.rationalp);
            }
            Domain::Unknown => {}
        }
        if let Some(p) = i.as_point() {
            if i.domain() != Domain::Unknown {
                self.eq = Some(Value::Num(p.clone()));
            }
        }
        self.neq.retain(|c| i.contains_value(c));
        self.interval = if i.is_top() { None } else { Some(i) };
        self.cap_neq();
        Ok(())
    }

    /// Moves closed integer endpoints past excluded constants.
    fn shrink_integer_ends(&self, mut i: Interval) -> Result<Interval, ()> {
        loop {
            let excluded = |b: &Bound| match b {
                Bound::Closed(q) => self.neq.contains(&Value::Num(q.clone())),
                _ => false,
            };
            let (lo, hi) = (i.lo().clone(), i.hi().clone());
            let lo_out = excluded(&lo);
            let hi_out = excluded(&hi);
            if !lo_out && !hi_out {
                return Ok(i);
            }
            let step = |b: Bound, delta: BigRational| match b {
                Bound::Closed(q) => Bound::Closed(q + delta),
                other => other,
            };
            let lo = if lo_out {
                step(lo, BigRational::one())
            } else {
                lo
            };
            let hi = if hi_out {
                step(hi, -BigRational::one())
            } else {
                hi
            };
            i = Interval::new(Domain::Integer, lo, hi).ok_or(())?;
        }
    }

    fn cap_neq(&mut self) {
        if self.neq.len() > NEQ_CAP {
            let excess = self.neq.len() - NEQ_CAP;
            self.neq.drain(..excess);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat;
    use crate::sexp::Symbol;
    use crate::world::World;
    use proptest::prelude::*;

    fn db() -> TauDatabase {
        let w = World::new()
            .process_form_str(
                "(defun evenp (x) (if (integerp x) (integerp (* x 1/2)) nil))
                 (declare-recognizer evenp)
                 (defthm evenp-int (implies (evenp x) (integerp x)) :rule-classes :tau-system)",
            )
            .unwrap();
        TauDatabase::build(&w)
    }

    fn id(db: &TauDatabase, s: &str) -> RecId {
        db.rec_id(&Symbol::new(s)).unwrap()
    }

    fn range(lo: i64, hi: i64) -> Interval {
        Interval::int_range(lo, hi).unwrap()
    }

    fn bounded_integer(db: &TauDatabase) -> Tau {
        let mut t = Tau::rec(db, id(db, "INTEGERP"), true);
        t = t.conjoin(&Tau::of_interval(db, range(0, 15)), db);
        t = t.conjoin(&Tau::not_constant(db, Value::int(3)), db);
        t.conjoin(&Tau::not_constant(db, Value::int(7)), db)
    }

    #[test]
    fn interval_meet() {
        let db = db();
        let t =
            Tau::of_interval(&db, range(0, 15)).conjoin(&Tau::of_interval(&db, range(10, 20)), &db);
        assert_eq!(t.interval(), Some(&range(10, 15)));
    }

    #[test]
    fn direct_clash() {
        let db = db();
        let i = id(&db, "INTEGERP");
        assert!(Tau::rec(&db, i, true)
            .conjoin(&Tau::rec(&db, i, false), &db)
            .is_bottom());
    }

    #[test]
    fn equality_meets_exclusion() {
        let db = db();
        let t = Tau::not_constant(&db, Value::int(3))
            .conjoin(&Tau::not_constant(&db, Value::int(7)), &db);
        assert!(t
            .conjoin(&Tau::constant(&db, Value::int(3)), &db)
            .is_bottom());
    }

    #[test]
    fn hull_and_identity() {
        let db = db();
        let a = Tau::of_interval(&db, range(0, 3));
        let b = Tau::of_interval(&db, range(10, 12));
        assert_eq!(a.join(&b, &db).interval(), Some(&range(0, 12)));
        assert_eq!(Tau::bottom().join(&a, &db), a);
    }

    #[test]
    fn join_intersects_recognizers() {
        let db = db();
        let even = Tau::rec(&db, id(&db, "EVENP"), true);
        let int = Tau::rec(&db, id(&db, "INTEGERP"), true);
        let j = even.join(&int, &db);
        assert!(j.pos().contains(id(&db, "INTEGERP")));
        assert!(!j.pos().contains(id(&db, "EVENP")));
    }

    #[test]
    fn bounded_integer_entailments() {
        let db = db();
        let t = bounded_integer(&db);
        t.validate(&db).unwrap();
        assert!(t.implies(&Goal::Equal(Value::int(3), false), &db));
        assert!(t.implies(&Goal::Equal(Value::int(7), false), &db));
        assert!(t.implies(&Goal::Lt(rat(16), true), &db));
        assert!(t.implies(&Goal::Rec(id(&db, "RATIONALP"), true), &db));
        assert!(!t.implies(&Goal::Rec(id(&db, "EVENP"), true), &db));
        assert!(!t.implies(&Goal::Equal(Value::int(5), true), &db));
        assert!(!t.implies(&Goal::Equal(Value::int(5), false), &db));
    }

    #[test]
    fn exclusions_shrink_integer_ends() {
        let db = db();
        let t = Tau::of_interval(&db, range(0, 3))
            .conjoin(&Tau::not_constant(&db, Value::int(0)), &db)
            .conjoin(&Tau::not_constant(&db, Value::int(3)), &db);
        assert_eq!(t.interval(), Some(&range(1, 2)));
        let t = t.conjoin(&Tau::not_constant(&db, Value::int(2)), &db);
        assert_eq!(t.eq_const(), Some(&Value::int(1)));
    }

    #[test]
    fn non_numeric_constants() {
        let db = db();
        let a = Tau::constant(&db, Value::sym("A"));
        assert!(a.implies(&Goal::Rec(id(&db, "SYMBOLP"), true), &db));
        assert!(a.implies(&Goal::Lt(rat(1), true), &db));
        assert!(a
            .conjoin(&Tau::of_interval(&db, range(1, 2)), &db)
            .is_bottom());
        let not_rat = Tau::rec(&db, id(&db, "RATIONALP"), false);
        assert!(not_rat.implies(&Goal::Gt(rat(-1), true), &db));
        assert!(not_rat
            .conjoin(&Tau::rec(&db, id(&db, "NATP"), true), &db)
            .is_bottom());
    }

    #[test]
    fn exclusion_cap() {
        let db = db();
        let mut t = Tau::top();
        for n in 0..100 {
            t = t.conjoin(&Tau::not_constant(&db, Value::int(n)), &db);
        }
        assert_eq!(t.neq_consts().len(), NEQ_CAP);
        assert!(!t.neq_consts().contains(&Value::int(0)));
        assert!(t.neq_consts().contains(&Value::int(99)));
    }

    fn sample_values() -> Vec<Value> {
        let mut out: Vec<Value> = (-6..=6).map(Value::int).collect();
        out.extend([
            Value::rat(1, 2),
            Value::rat(-7, 3),
            Value::sym("A"),
            Value::nil(),
            Value::t(),
        ]);
        out.push(Value::cons(Value::int(1), Value::nil()));
        out.push(Value::Str("s".into()));
        out
    }

    fn arb_tau() -> impl Strategy<Value = Tau> {
        let db = db();
        let n = db.len();
        let atom = prop_oneof![
            (0..n, any::<bool>()).prop_map(|(r, s)| (0u8, r, s, 0i64, 0i64)),
            (-6i64..6, 0i64..6).prop_map(|(lo, w)| (1u8, 0, false, lo, lo + w)),
            (-6i64..6).prop_map(|c| (2u8, 0, false, c, 0)),
            (-6i64..6).prop_map(|c| (3u8, 0, false, c, 0)),
            (-6i64..6, any::<bool>()).prop_map(|(c, s)| (4u8, 0, s, c, 0)),
        ];
        proptest::collection::vec(atom, 0..4).prop_map(move |atoms| {
            let db = db.clone();
            atoms.into_iter().fold(Tau::top(), |t, (kind, r, s, a, b)| {
                let fact = match kind {
                    0 => Tau::rec(&db, r, s),
                    1 => Tau::of_interval(&db, range(a, b)),
                    2 => Tau::constant(&db, Value::int(a)),
                    3 => Tau::not_constant(&db, Value::int(a)),
                    _ => {
                        let i = if s {
                            Interval::new(Domain::Unknown, Bound::Unbounded, Bound::Open(rat(a)))
                        } else {
                            Interval::new(Domain::Rational, Bound::Open(rat(a)), Bound::Unbounded)
                        };
                        Tau::of_interval(&db, i.unwrap())
                    }
                };
                t.conjoin(&fact, &db)
            })
        })
    }

    fn evenp(v: &Value) -> bool {
        v.as_number()
            .is_some_and(|q| q.is_integer() && (q.to_integer() % 2u8) == 0u8.into())
    }

    proptest! {
        #[test]
        fn conjoin_laws(a in arb_tau(), b in arb_tau(), c in arb_tau()) {
            let db = db();
            prop_assert_eq!(a.conjoin(&b, &db), b.conjoin(&a, &db));
            prop_assert_eq!(a.conjoin(&a, &db), a.clone());
            prop_assert_eq!(
                a.conjoin(&b, &db).conjoin(&c, &db),
                a.conjoin(&b.conjoin(&c, &db), &db)
            );
        }

        #[test]
        fn join_laws(a in arb_tau(), b in arb_tau()) {
            let db = db();
            let j = a.join(&b, &db);
            prop_assert_eq!(&j, &b.join(&a, &db));
            prop_assert_eq!(a.join(&a, &db), a.clone());
            let absorbed = a.conjoin(&j, &db);
            prop_assert_eq!(absorbed.pos(), a.pos());
            prop_assert_eq!(absorbed.neg(), a.neg());
        }

        #[test]
        fn operations_preserve_invariants(a in arb_tau(), b in arb_tau()) {
            let db = db();
            for t in [&a, &b, &a.conjoin(&b, &db), &a.join(&b, &db)] {
                prop_assert!(t.validate(&db).is_ok(), "{:?}: {:?}", t, t.validate(&db));
            }
        }

        /// Semantic check on sample values: conjoin is intersection and
        /// join over-approximates union.
        #[test]
        fn semantics_on_samples(a in arb_tau(), b in arb_tau()) {
            let db = db();
            let even = id(&db, "EVENP");
            let user = |r: RecId, v: &Value| (r == even).then(|| evenp(v));
            let (m, j) = (a.conjoin(&b, &db), a.join(&b, &db));
            for v in sample_values() {
                let (in_a, in_b) = (a.contains(&v, &db, &user), b.contains(&v, &db, &user));
                prop_assert_eq!(m.contains(&v, &db, &user), in_a && in_b, "{}", v);
                if in_a || in_b {
                    prop_assert!(j.contains(&v, &db, &user), "{}", v);
                }
            }
        }
    }
}
