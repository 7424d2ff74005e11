//! The decision procedure: taus of terms in a context, propagation through
//! `IF` tests, signature rules and bounders, and verdicts on conjectures.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::db::{IdSet, RecId, TauDatabase};
use crate::interval::{rat, Bound, Domain, Interval};
use crate::rule::conjuncts;
use crate::rune::Rune;
use crate::sexp::Symbol;
use crate::tau::{Goal, Tau};
use crate::term::{apply_fn, eval_term, Binding, Term, Value, DEFAULT_FUEL};
use crate::world::World;

/// Interval transformer for a function: given intervals containing the
/// numeric view of each argument, an interval containing the result.
#[derive(Clone)]
pub struct Bounder {
    pub fun: Symbol,
    pub arity: usize,
    /// The function always returns a number, so its interval applies
    /// unconditionally.
    pub numeric: bool,
    compute: Arc<dyn Fn(&[Interval]) -> Interval + Send + Sync>,
}

impl Bounder {
    pub fn new(
        fun: &str,
        arity: usize,
        compute: impl Fn(&[Interval]) -> Interval + Send + Sync + 'static,
    ) -> Bounder {
        Bounder {
            fun: Symbol::new(fun),
            arity,
            numeric: false,
            compute: Arc::new(compute),
        }
    }

    pub fn apply(&self, args: &[Interval]) -> Interval {
        (self.compute)(args)
    }
}

impl fmt::Debug for Bounder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bounder({}/{})", self.fun, self.arity)
    }
}

/// Bounders for `BINARY-+`, `UNARY--` and `BINARY-*`.
pub fn builtin_bounders() -> Vec<Bounder> {
    let numeric = |mut b: Bounder| {
        b.numeric = true;
        b
    };
    vec![
        numeric(Bounder::new("BINARY-+", 2, |a| a[0].add(&a[1]))),
        numeric(Bounder::new("UNARY--", 1, |a| a[0].negate())),
        numeric(Bounder::new("BINARY-*", 2, |a| a[0].mul(&a[1]))),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BounderError {
    #[error("{0} is not a defined function")]
    Undefined(Symbol),
    #[error("{fun} takes {expected} arguments, the bounder {got}")]
    Arity {
        fun: Symbol,
        expected: usize,
        got: usize,
    },
    #[error("unsound bounder for {fun}: on {args:?} it returns {result}, outside {claimed}")]
    Unsound {
        fun: Symbol,
        inputs: Vec<Interval>,
        args: Vec<Value>,
        result: Value,
        claimed: Interval,
    },
}

/// Points checked before a bounder is accepted.
pub const BOUNDER_SAMPLES: usize = 1000;

fn random_bound(rng: &mut ChaCha8Rng) -> Option<BigRational> {
    if rng.gen_bool(0.15) {
        return None;
    }
    let den: i64 = rng.gen_range(1..=4);
    Some(BigRational::new(rng.gen_range(-40..=40).into(), den.into()))
}

fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    loop {
        let domain = if rng.gen_bool(0.5) {
            Domain::Integer
        } else {
            Domain::Rational
        };
        let mk = |q: Option<BigRational>, closed: bool| match q {
            None => Bound::Unbounded,
            Some(q) if closed => Bound::Closed(q),
            Some(q) => Bound::Open(q),
        };
        let (a, b) = (random_bound(rng), random_bound(rng));
        let (a, b) = match (&a, &b) {
            (Some(x), Some(y)) if x > y => (b, a),
            _ => (a, b),
        };
        let lo = mk(a, rng.gen_bool(0.7));
        let hi = mk(b, rng.gen_bool(0.7));
        if let Some(i) = Interval::new(domain, lo, hi) {
            return i;
        }
    }
}

/// A rational inside `i`, if one is found quickly.
fn random_point(rng: &mut ChaCha8Rng, i: &Interval) -> Option<BigRational> {
    let lo = i.lo().value().cloned();
    let hi = i.hi().value().cloned();
    let span = BigRational::from_integer(20.into());
    let (a, b) = match (lo, hi) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a.clone(), a + span),
        (None, Some(b)) => (b.clone() - span, b),
        (None, None) => (-span.clone(), span),
    };
    for _ in 0..32 {
        let den: i64 = if i.domain() == Domain::Integer {
            1
        } else {
            rng.gen_range(1..=4)
        };
        let d = BigRational::from_integer(den.into());
        let (n0, n1) = (
            (&a * &d).ceil().to_integer(),
            (&b * &d).floor().to_integer(),
        );
        if n0 > n1 {
            break;
        }
        let width: i64 = (&n1 - &n0).try_into().unwrap_or(i64::MAX).min(1_000_000);
        let n = n0 + rng.gen_range(0..=width);
        let q = BigRational::new(n, den.into());
        if i.contains_rational(&q) {
            return Some(q);
        }
    }
    [i.lo(), i.hi()].into_iter().find_map(|b| match b {
        Bound::Closed(q) => Some(q.clone()),
        _ => None,
    })
}

/// Adds a bounder after checking it on sampled points: first the corners
/// of the unit box, then random points in random intervals.
pub fn register_bounder(
    mut db: TauDatabase,
    b: Bounder,
    w: &World,
    seed: u64,
) -> Result<TauDatabase, BounderError> {
    let expected = w
        .arity(&b.fun)
        .ok_or_else(|| BounderError::Undefined(b.fun.clone()))?;
    if w.function(&b.fun).is_none() && crate::term::primitive_arity(b.fun.name()).is_none() {
        return Err(BounderError::Undefined(b.fun.clone()));
    }
    if expected != b.arity {
        return Err(BounderError::Arity {
            fun: b.fun.clone(),
            expected,
            got: b.arity,
        });
    }
    let n = b.arity;
    let mut trials: Vec<(Vec<Interval>, Vec<BigRational>)> = Vec::new();
    let unit = Interval::new(
        Domain::Rational,
        Bound::Closed(rat(0)),
        Bound::Closed(rat(1)),
    )
    .expect("non-empty");
    for mask in 0..(1u32 << n.min(10)) {
        let pt = (0..n)
            .map(|k| BigRational::from_integer(((mask >> k) & 1).into()))
            .collect();
        trials.push((vec![unit.clone(); n], pt));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while trials.len() < BOUNDER_SAMPLES {
        let inputs: Vec<Interval> = (0..n).map(|_| random_interval(&mut rng)).collect();
        for _ in 0..4 {
            let pt: Option<Vec<BigRational>> =
                inputs.iter().map(|i| random_point(&mut rng, i)).collect();
            if let Some(pt) = pt {
                trials.push((inputs.clone(), pt));
            }
        }
    }
    trials.truncate(BOUNDER_SAMPLES);
    for (inputs, pt) in trials {
        let args: Vec<Value> = pt.into_iter().map(Value::Num).collect();
        let claimed = b.apply(&inputs);
        let Ok(result) = apply_fn(&b.fun, &args, w, DEFAULT_FUEL) else {
            continue;
        };
        if result.as_number().is_some() && !claimed.contains_value(&result) {
            return Err(BounderError::Unsound {
                fun: b.fun.clone(),
                inputs,
                args,
                result,
                claimed,
            });
        }
    }
    db.insert_bounder(b);
    Ok(db)
}

/// Per-variable taus; a missing variable is unconstrained.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Context {
    vars: BTreeMap<Symbol, Tau>,
    bottom: bool,
}

impl Context {
    pub fn top() -> Context {
        Context::default()
    }

    pub fn bottom() -> Context {
        Context {
            vars: BTreeMap::new(),
            bottom: true,
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    pub fn get(&self, v: &Symbol) -> Tau {
        if self.bottom {
            return Tau::bottom();
        }
        self.vars.get(v).cloned().unwrap_or_else(Tau::top)
    }

    pub fn vars(&self) -> impl Iterator<Item = (&Symbol, &Tau)> {
        self.vars.iter()
    }

    /// Adds facts about `v`.
    pub fn conjoin(&self, v: &Symbol, t: &Tau, db: &TauDatabase) -> Context {
        if self.bottom {
            return self.clone();
        }
        let merged = self.get(v).conjoin(t, db);
        if merged.is_bottom() {
            return Context::bottom();
        }
        let mut out = self.clone();
        out.vars.insert(v.clone(), merged);
        out
    }

    pub fn join(&self, other: &Context, db: &TauDatabase) -> Context {
        if self.bottom {
            return other.clone();
        }
        if other.bottom {
            return self.clone();
        }
        let vars = self
            .vars
            .iter()
            .filter_map(|(v, a)| {
                let j = a.join(other.vars.get(v)?, db);
                (!j.is_top()).then(|| (v.clone(), j))
            })
            .collect();
        Context {
            vars,
            bottom: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjecture {
    pub hyps: Vec<Term>,
    pub concl: Term,
}

impl Conjecture {
    /// Splits `(IMPLIES hyp concl)`, with `hyp` broken into conjuncts.
    pub fn from_formula(t: &Term) -> Conjecture {
        match t {
            Term::App(f, args) if f.name() == "IMPLIES" && args.len() == 2 => Conjecture {
                hyps: conjuncts(&args[0]).into_iter().cloned().collect(),
                concl: args[1].clone(),
            },
            other => Conjecture {
                hyps: Vec::new(),
                concl: other.clone(),
            },
        }
    }

    pub fn to_term(&self) -> Term {
        if self.hyps.is_empty() {
            return self.concl.clone();
        }
        Term::app(
            "IMPLIES",
            vec![
                crate::rule::conjunction(self.hyps.clone()),
                self.concl.clone(),
            ],
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `trace` lists the runes the proof relied on; empty when the fixed
    /// semantics of the built-ins suffice.
    Proved {
        trace: Vec<Rune>,
        vacuous: bool,
    },
    Unknown {
        reason: String,
    },
    /// Only produced by the oracle.
    Refuted {
        binding: Binding,
    },
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved { .. })
    }

    pub fn trace(&self) -> &[Rune] {
        match self {
            Verdict::Proved { trace, .. } => trace,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("conclusion is not a tau formula: {0}")]
    IllFormed(String),
    #[error("{0} is not a declared recognizer")]
    UnknownRecognizer(Symbol),
}

/// What one decision consulted.
#[derive(Default)]
struct Run {
    support: IdSet,
    runes: BTreeSet<Rune>,
}

pub struct Engine<'a> {
    world: &'a World,
    db: &'a TauDatabase,
    fuel: u64,
    /// Whether executable counterparts may be run at all.
    exec: bool,
    fault: bool,
    bare: Option<TauDatabase>,
    consts: Mutex<HashMap<Value, (Tau, Vec<Rune>)>>,
}

impl<'a> Engine<'a> {
    pub fn new(world: &'a World, db: &'a TauDatabase) -> Engine<'a> {
        Engine {
            world,
            db,
            fuel: DEFAULT_FUEL,
            exec: true,
            fault: false,
            bare: Some(TauDatabase::from_parts(
                db.recognizers().to_vec(),
                Vec::new(),
            )),
            consts: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    /// Test hook: every conjecture is reported proved.
    #[doc(hidden)]
    pub fn with_fault(mut self, fault: bool) -> Self {
        self.fault = fault;
        self
    }

    pub fn db(&self) -> &TauDatabase {
        self.db
    }

    pub fn world(&self) -> &World {
        self.world
    }

    pub fn assume(&self, ctx: &Context, test: &Term, polarity: bool) -> Context {
        self.assume_in(ctx, test, polarity, &mut Run::default())
    }

    pub fn tau_of(&self, t: &Term, ctx: &Context) -> Tau {
        self.tau_in(t, ctx, &mut Run::default())
    }

    pub fn decide(&self, c: &Conjecture) -> Result<Verdict, EngineError> {
        self.check_shape(&c.concl)?;
        if self.fault {
            return Ok(Verdict::Proved {
                trace: Vec::new(),
                vacuous: false,
            });
        }
        let mut run = Run::default();
        let verdict = self.decide_in(c, &mut run);
        let Verdict::Proved { vacuous, .. } = verdict else {
            return Ok(verdict);
        };
        let bare = self.bare.as_ref().map(|db| Engine {
            world: self.world,
            db,
            fuel: self.fuel,
            exec: false,
            fault: false,
            bare: None,
            consts: Mutex::new(HashMap::new()),
        });
        let needs_rules = bare.is_none_or(|e| !e.decide_in(c, &mut Run::default()).is_proved());
        let trace = if needs_rules {
            let mut runes = run.runes;
            runes.extend(self.db.runes_of(&run.support));
            runes.into_iter().collect()
        } else {
            Vec::new()
        };
        Ok(Verdict::Proved { trace, vacuous })
    }

    pub fn decide_formula(&self, t: &Term) -> Result<Verdict, EngineError> {
        self.decide(&Conjecture::from_formula(t))
    }

    fn decide_in(&self, c: &Conjecture, run: &mut Run) -> Verdict {
        let mut ctx = Context::top();
        for h in &c.hyps {
            ctx = self.assume_in(&ctx, h, true, run);
        }
        if ctx.is_bottom() {
            return Verdict::Proved {
                trace: Vec::new(),
                vacuous: true,
            };
        }
        let lits = disjuncts(&c.concl);
        if lits.iter().any(|l| self.literal_holds(l, true, &ctx, run)) {
            return Verdict::Proved {
                trace: Vec::new(),
                vacuous: false,
            };
        }
        let mut refuting = ctx.clone();
        for l in &lits {
            refuting = self.assume_in(&refuting, l, false, run);
        }
        if refuting.is_bottom() {
            return Verdict::Proved {
                trace: Vec::new(),
                vacuous: false,
            };
        }
        Verdict::Unknown {
            reason: format!("no tau fact entails {}", c.concl),
        }
    }

    fn check_shape(&self, concl: &Term) -> Result<(), EngineError> {
        for lit in disjuncts(concl) {
            self.check_literal(lit)?;
        }
        Ok(())
    }

    fn check_literal(&self, lit: &Term) -> Result<(), EngineError> {
        let bad = || EngineError::IllFormed(lit.to_string());
        match lit {
            Term::Const(_) => Ok(()),
            Term::App(f, args) => match (f.name(), args.as_slice()) {
                ("NOT", [a]) => self.check_literal(a),
                ("NULL" | "ATOM" | "ENDP", [_]) => Ok(()),
                ("EQUAL", [a, b]) if is_const(a) || is_const(b) => Ok(()),
                ("<", [a, b]) if is_const(a) || is_const(b) => Ok(()),
                (_, [_]) if self.world.is_recognizer(f) => Ok(()),
                (_, [_]) if self.world.function(f).is_some() => {
                    Err(EngineError::UnknownRecognizer(f.clone()))
                }
                _ if lit.free_vars().is_empty() => Ok(()),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }

    /// Whether `lit` (or its negation) follows from the context directly.
    fn literal_holds(&self, lit: &Term, polarity: bool, ctx: &Context, run: &mut Run) -> bool {
        if let Some(v) = self.ground_value(lit, run) {
            return v.is_true() == polarity;
        }
        let Term::App(f, args) = lit else {
            return false;
        };
        let goal = match (f.name(), args.as_slice()) {
            ("NOT", [a]) => return self.literal_holds(a, !polarity, ctx, run),
            ("NULL", [a]) => (a, Goal::Equal(Value::nil(), polarity)),
            ("ATOM" | "ENDP", [a]) => (a, Goal::Rec(self.db.builtins().consp, !polarity)),
            ("IMPLIES", [a, b]) => {
                let t = Term::if_(a.clone(), b.clone(), Term::t());
                return self.literal_holds(&t, polarity, ctx, run);
            }
            ("EQUAL", [a, Term::Const(c)]) | ("EQUAL", [Term::Const(c), a]) => {
                (a, Goal::Equal(c.clone(), polarity))
            }
            ("<", [a, Term::Const(c)]) => (a, Goal::Lt(c.rfix(), polarity)),
            ("<", [Term::Const(c), a]) => (a, Goal::Gt(c.rfix(), polarity)),
            (_, [a]) => match self.db.rec_id(f) {
                Some(r) => (a, Goal::Rec(r, polarity)),
                None => return false,
            },
            _ => return false,
        };
        let (subject, goal) = goal;
        let t = self.tau_in(subject, ctx, run);
        t.implies(&goal, self.db)
    }

    fn note(&self, t: &Tau, run: &mut Run) {
        for r in t.pos().ones() {
            run.support.union_with(&self.db.closure(r).support);
        }
    }

    /// The value of a variable-free term, when every function in it may be
    /// executed.
    fn ground_value(&self, t: &Term, run: &mut Run) -> Option<Value> {
        match t {
            Term::Const(v) => return Some(v.clone()),
            Term::App(..) | Term::If(..) => {}
            Term::Var(_) => return None,
        }
        if !self.exec || !t.free_vars().is_empty() {
            return None;
        }
        let mut fns = BTreeSet::new();
        collect_fns(t, &mut fns);
        let runes: Vec<Rune> = fns.iter().map(|f| Rune::executable(f.name())).collect();
        if !runes.iter().all(|r| self.world.is_enabled(r)) {
            return None;
        }
        match eval_term(t, &Binding::new(), self.world, self.fuel) {
            Ok(v) => {
                run.runes.extend(runes);
                Some(v)
            }
            Err(e) => {
                log::debug!("no value for {t}: {e}");
                None
            }
        }
    }

    /// Facts about a constant, including every user recognizer whose
    /// executable counterpart is enabled.
    fn const_tau(&self, v: &Value, run: &mut Run) -> Tau {
        if let Some((t, runes)) = self.consts.lock().expect("cache lock").get(v) {
            run.runes.extend(runes.iter().cloned());
            self.note(t, run);
            return t.clone();
        }
        let mut pos = IdSet::new();
        let mut neg = IdSet::new();
        let mut runes = Vec::new();
        if self.exec {
            let builtin = crate::world::BUILTIN_RECOGNIZERS.len();
            for r in builtin..self.db.len() {
                let name = self.db.rec_name(r);
                let rune = Rune::executable(name.name());
                if !self.world.is_enabled(&rune) {
                    continue;
                }
                match apply_fn(name, std::slice::from_ref(v), self.world, self.fuel) {
                    Ok(b) => {
                        if b.is_true() {
                            pos.insert(r);
                        } else {
                            neg.insert(r);
                        }
                        runes.push(rune);
                    }
                    Err(e) => log::debug!("{name} on {v}: {e}"),
                }
            }
        }
        let t = Tau::from_parts(self.db, pos, neg, None, Some(v.clone()), Vec::new());
        run.runes.extend(runes.iter().cloned());
        self.note(&t, run);
        self.consts
            .lock()
            .expect("cache lock")
            .insert(v.clone(), (t.clone(), runes));
        t
    }

    fn assume_in(&self, ctx: &Context, test: &Term, polarity: bool, run: &mut Run) -> Context {
        if ctx.is_bottom() {
            return ctx.clone();
        }
        if let Some(v) = self.ground_value(test, run) {
            return if v.is_true() == polarity {
                ctx.clone()
            } else {
                Context::bottom()
            };
        }
        let fact = |v: &Symbol, t: Tau, run: &mut Run| {
            self.note(&t, run);
            let out = ctx.conjoin(v, &t, self.db);
            if let Some(t) = out.vars.get(v) {
                self.note(t, run);
            }
            out
        };
        match test {
            Term::If(a, b, c) => {
                let yes = self.assume_in(&self.assume_in(ctx, a, true, run), b, polarity, run);
                let no = self.assume_in(&self.assume_in(ctx, a, false, run), c, polarity, run);
                yes.join(&no, self.db)
            }
            Term::App(f, args) => match (f.name(), args.as_slice()) {
                ("NOT" | "NULL", [a]) => self.assume_in(ctx, a, !polarity, run),
                ("ATOM" | "ENDP", [a]) => {
                    let t = Term::app("CONSP", vec![a.clone()]);
                    self.assume_in(ctx, &t, !polarity, run)
                }
                ("IMPLIES", [a, b]) => {
                    let t = Term::if_(a.clone(), b.clone(), Term::t());
                    self.assume_in(ctx, &t, polarity, run)
                }
                ("EQUAL", [Term::Var(v), Term::Const(c)])
                | ("EQUAL", [Term::Const(c), Term::Var(v)]) => {
                    let t = if polarity {
                        self.const_tau(c, run)
                    } else {
                        Tau::not_constant(self.db, c.clone())
                    };
                    fact(v, t, run)
                }
                ("<", [Term::Var(v), Term::Const(c)]) => {
                    let c = c.rfix();
                    let i = if polarity {
                        Interval::new(Domain::Unknown, Bound::Unbounded, Bound::Open(c))
                    } else {
                        Interval::new(Domain::Unknown, Bound::Closed(c), Bound::Unbounded)
                    };
                    fact(v, Tau::of_interval(self.db, i.expect("non-empty")), run)
                }
                ("<", [Term::Const(c), Term::Var(v)]) => {
                    let c = c.rfix();
                    let i = if polarity {
                        Interval::new(Domain::Unknown, Bound::Open(c), Bound::Unbounded)
                    } else {
                        Interval::new(Domain::Unknown, Bound::Unbounded, Bound::Closed(c))
                    };
                    fact(v, Tau::of_interval(self.db, i.expect("non-empty")), run)
                }
                (_, [Term::Var(v)]) => match self.db.rec_id(f) {
                    Some(r) => fact(v, Tau::rec(self.db, r, polarity), run),
                    None => ctx.clone(),
                },
                _ => ctx.clone(),
            },
            _ => ctx.clone(),
        }
    }

    fn tau_in(&self, t: &Term, ctx: &Context, run: &mut Run) -> Tau {
        if ctx.is_bottom() {
            return Tau::bottom();
        }
        let out = match t {
            Term::Const(v) => self.const_tau(v, run),
            Term::Var(v) => ctx.get(v),
            Term::If(a, b, c) => {
                let yes = self.assume_in(ctx, a, true, run);
                let no = self.assume_in(ctx, a, false, run);
                let tb = self.tau_in(b, &yes, run);
                let tc = self.tau_in(c, &no, run);
                tb.join(&tc, self.db)
            }
            Term::App(f, args) => {
                if let Some(v) = self.ground_value(t, run) {
                    self.const_tau(&v, run)
                } else {
                    self.tau_of_app(f, args, ctx, run)
                }
            }
        };
        self.note(&out, run);
        out
    }

    fn tau_of_app(&self, f: &Symbol, args: &[Term], ctx: &Context, run: &mut Run) -> Tau {
        let arg_taus: Vec<Tau> = args.iter().map(|a| self.tau_in(a, ctx, run)).collect();
        if arg_taus.iter().any(Tau::is_bottom) {
            return Tau::bottom();
        }
        if let (Some(r), [a]) = (self.db.rec_id(f), arg_taus.as_slice()) {
            return self.recognizer_result(r, a, run);
        }
        let mut out = Tau::top();
        for sig in self.db.signatures(f) {
            if sig.reqs.len() != arg_taus.len() {
                continue;
            }
            let fires = sig.reqs.iter().zip(&arg_taus).all(|(reqs, t)| {
                reqs.iter()
                    .all(|&(r, s)| t.implies(&Goal::Rec(r, s), self.db))
            });
            if fires {
                run.support.insert(sig.id);
                out = out.conjoin(&Tau::rec(self.db, sig.concl.0, sig.concl.1), self.db);
            }
        }
        if let Some(b) = self.db.bounder(f).filter(|b| b.arity == args.len()) {
            if let Some(i) = self.bounder_interval(b, &arg_taus, &out) {
                out = out.conjoin(&Tau::of_interval(self.db, i), self.db);
            }
        }
        out
    }

    fn bounder_interval(&self, b: &Bounder, args: &[Tau], result: &Tau) -> Option<Interval> {
        if b.numeric {
            let inputs: Vec<Interval> = args
                .iter()
                .map(|t| t.rfix_interval().unwrap_or_else(Interval::top))
                .collect();
            return Some(b.apply(&inputs));
        }
        let rational = self.db.builtins().rationalp;
        if !result.implies(&Goal::Rec(rational, true), self.db) {
            return None;
        }
        let inputs: Option<Vec<Interval>> = args
            .iter()
            .map(|t| t.rfix_interval().filter(|i| i.domain() != Domain::Unknown))
            .collect();
        let i = b.apply(&inputs?);
        i.with_domain(i.domain().meet(Domain::Rational))
    }

    /// `(r a)` is T or NIL; which one when `a`'s tau decides it.
    fn recognizer_result(&self, r: RecId, a: &Tau, run: &mut Run) -> Tau {
        if a.implies(&Goal::Rec(r, true), self.db) {
            self.const_tau(&Value::t(), run)
        } else if a.implies(&Goal::Rec(r, false), self.db) {
            self.const_tau(&Value::nil(), run)
        } else {
            Tau::rec(self.db, self.db.builtins().symbolp, true)
        }
    }
}

fn is_const(t: &Term) -> bool {
    matches!(t, Term::Const(_))
}

fn collect_fns(t: &Term, out: &mut BTreeSet<Symbol>) {
    match t {
        Term::App(f, args) => {
            out.insert(f.clone());
            for a in args {
                collect_fns(a, out);
            }
        }
        Term::If(a, b, c) => {
            collect_fns(a, out);
            collect_fns(b, out);
            collect_fns(c, out);
        }
        _ => {}
    }
}

/// Flattens `OR`-shaped IF nests: `(IF a a b)` and `(IF a T b)`.
pub fn disjuncts(t: &Term) -> Vec<&Term> {
    match t {
        Term::If(a, b, c) if **a == **b || **b == Term::t() => {
            let mut out = disjuncts(a);
            out.extend(disjuncts(c));
            out
        }
        other => vec![other],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat;
    use crate::normalize::translate;
    use crate::sexp::read_sexp;

    const BOOK: &str = "
        (defun evenp (x) (if (integerp x) (integerp (* x 1/2)) nil))
        (declare-recognizer evenp)
        (defthm evenp-int (implies (evenp x) (integerp x)) :rule-classes :tau-system)";

    fn world() -> World {
        World::new().process_form_str(BOOK).unwrap()
    }

    fn term(w: &World, text: &str) -> Term {
        translate(&read_sexp(text).unwrap(), w).unwrap()
    }

    fn verdict(w: &World, text: &str) -> Verdict {
        let db = TauDatabase::build(w);
        Engine::new(w, &db).decide_formula(&term(w, text)).unwrap()
    }

    #[test]
    fn recognizer_chain() {
        let w = world();
        let v = verdict(&w, "(implies (evenp x) (integerp x))");
        assert!(v.is_proved());
        assert!(
            v.trace()
                .iter()
                .any(|r| r.to_string() == "(:TAU-SYSTEM EVENP-INT)"),
            "{v:?}"
        );
        assert!(!verdict(&w, "(implies (integerp x) (evenp x))").is_proved());
    }

    #[test]
    fn atom_and_null_conclusions() {
        let w = world();
        assert!(verdict(&w, "(implies (consp x) (not (atom x)))").is_proved());
        assert!(verdict(&w, "(implies (integerp x) (endp x))").is_proved());
        assert!(verdict(&w, "(implies (not (consp x)) (atom x))").is_proved());
        assert!(verdict(&w, "(implies (equal x nil) (null x))").is_proved());
        assert!(!verdict(&w, "(implies (atom x) (null x))").is_proved());
    }

    #[test]
    fn bounded_integer_example() {
        let w = world();
        let hyp = "(and (integerp x) (<= 0 x) (<= x 15) (not (equal x 3)) (not (equal x 7)))";
        for concl in [
            "(not (equal x 3))",
            "(not (equal x 7))",
            "(< x 16)",
            "(rationalp x)",
        ] {
            let v = verdict(&w, &format!("(implies {hyp} {concl})"));
            assert!(v.is_proved(), "{concl}: {v:?}");
        }
        let v = verdict(&w, &format!("(implies {hyp} (equal x 5))"));
        assert!(matches!(v, Verdict::Unknown { .. }));
    }

    #[test]
    fn integer_bound_normalization() {
        let w = world();
        let db = TauDatabase::build(&w);
        let e = Engine::new(&w, &db);
        let ctx = e.assume(&Context::top(), &term(&w, "(integerp x)"), true);
        let ctx = e.assume(&ctx, &term(&w, "(< x 16)"), true);
        let t = ctx.get(&Symbol::new("X"));
        assert_eq!(t.interval().unwrap().hi(), &Bound::Closed(rat(15)));
        let ctx = e.assume(&Context::top(), &term(&w, "(equal x 3)"), true);
        assert_eq!(ctx.get(&Symbol::new("X")).eq_const(), Some(&Value::int(3)));
    }

    #[test]
    fn if_and_signatures() {
        let w = world();
        let db = TauDatabase::build(&w);
        let e = Engine::new(&w, &db);
        let t = e.tau_of(&term(&w, "(if (integerp i) (+ i 1) 0)"), &Context::top());
        assert!(t.pos().contains(db.builtins().integerp));
        let x = Symbol::new("X");
        let y = Symbol::new("Y");
        let ctx = Context::top()
            .conjoin(
                &x,
                &Tau::of_interval(&db, Interval::int_range(0, 15).unwrap()),
                &db,
            )
            .conjoin(
                &y,
                &Tau::of_interval(&db, Interval::int_range(1, 2).unwrap()),
                &db,
            );
        let t = e.tau_of(&term(&w, "(+ x y)"), &ctx);
        assert_eq!(t.interval(), Some(&Interval::int_range(1, 17).unwrap()));
    }

    #[test]
    fn constants() {
        let w = world();
        let db = TauDatabase::build(&w);
        let e = Engine::new(&w, &db);
        let t = e.tau_of(&Term::Const(Value::int(5)), &Context::top());
        assert!(t.pos().contains(db.builtins().integerp));
        assert!(t.neg().contains(db.rec_id(&Symbol::new("EVENP")).unwrap()));
        assert_eq!(t.interval(), Some(&Interval::point(rat(5))));
        assert!(verdict(&w, "(implies (evenp x) (not (equal x 3)))").is_proved());
    }

    #[test]
    fn disjunctions_and_vacuity() {
        let w = world();
        assert!(verdict(&w, "(or (consp x) (not (consp x)))").is_proved());
        assert!(verdict(&w, "(implies (integerp x) (or (< x 0) (natp x)))").is_proved());
        let v = verdict(&w, "(implies (and (consp x) (integerp x)) (evenp x))");
        assert!(matches!(v, Verdict::Proved { vacuous: true, .. }));
        assert!(!v.trace().is_empty());
        let v = verdict(&w, "(implies (and (< x 0) (< 1 x)) (evenp x))");
        assert_eq!(
            v,
            Verdict::Proved {
                trace: Vec::new(),
                vacuous: true
            }
        );
    }

    #[test]
    fn theory_respect() {
        let w = world();
        let v = verdict(&w, "(implies (evenp x) (integerp x))");
        let runes: Vec<String> = v.trace().iter().map(|r| r.to_string()).collect();
        let w2 = w
            .process_form_str(&format!("(in-theory (disable {}))", runes.join(" ")))
            .unwrap();
        assert!(!verdict(&w2, "(implies (evenp x) (integerp x))").is_proved());
    }

    #[test]
    fn ill_formed() {
        let w = world();
        let db = TauDatabase::build(&w);
        let e = Engine::new(&w, &db);
        assert!(e.decide_formula(&term(&w, "(equal x y)")).is_err());
    }

    #[test]
    fn builtin_bounder_examples() {
        let bs = builtin_bounders();
        let r = |a, b| Interval::int_range(a, b).unwrap();
        assert_eq!(bs[0].apply(&[r(0, 15), r(1, 2)]), r(1, 17));
        assert_eq!(bs[1].apply(&[r(0, 15)]), r(-15, 0));
        assert_eq!(bs[2].apply(&[r(-2, 3), r(-1, 4)]), r(-8, 12));
    }

    #[test]
    fn bounder_registration() {
        let w = world()
            .process_form_str("(defun plus (x y) (+ x y))")
            .unwrap();
        let db = TauDatabase::build(&w);
        let good = Bounder::new("PLUS", 2, |a| a[0].add(&a[1]));
        assert!(register_bounder(db.clone(), good, &w, 1).is_ok());
        let unit = |_: &[Interval]| {
            Interval::new(
                Domain::Rational,
                Bound::Closed(rat(0)),
                Bound::Closed(rat(1)),
            )
            .unwrap()
        };
        match register_bounder(db.clone(), Bounder::new("PLUS", 2, unit), &w, 1) {
            Err(BounderError::Unsound { args, .. }) => {
                assert_eq!(args, vec![Value::int(1), Value::int(1)])
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            register_bounder(db, Bounder::new("NOPE", 2, unit), &w, 1),
            Err(BounderError::Undefined(_))
        ));
    }
}
