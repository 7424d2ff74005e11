//! Brute-force ground truth over a finite universe of values.
//!
//! A conjecture is refuted by a binding that makes every hypothesis true
//! and the conclusion false. Finding none is reported as "corroborated":
//! the search covers a finite sample, so it never establishes validity.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::Conjecture;
use crate::rule::Rule;
use crate::sexp::Symbol;
use crate::term::{eval_term, Binding, Term, Value, DEFAULT_FUEL};
use crate::world::World;

/// Bounds of the sampled value universe and of the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSpec {
    pub int_lo: i64,
    pub int_hi: i64,
    /// Rationals with denominators `1..=max_den` inside the integer range.
    pub max_den: i64,
    pub symbols: Vec<String>,
    /// Conses of depth up to this over `cons_atoms`.
    pub cons_depth: usize,
    pub cons_atoms: Vec<Value>,
    /// Bindings tried per conjecture; the search is exhaustive when the
    /// whole product space fits.
    pub max_samples: usize,
    pub seed: u64,
    pub fuel: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            int_lo: -20,
            int_hi: 20,
            max_den: 4,
            symbols: ["A", "B", "C", "T", "NIL"].map(String::from).to_vec(),
            cons_depth: 2,
            cons_atoms: vec![Value::int(0), Value::int(1), Value::sym("A"), Value::nil()],
            max_samples: 2000,
            seed: 0,
            fuel: DEFAULT_FUEL,
        }
    }
}

/// The sampled values, smallest first: integers by magnitude, then other
/// rationals, symbols, and conses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    values: Vec<Value>,
}

fn magnitude_order(a: &BigRational, b: &BigRational) -> std::cmp::Ordering {
    a.abs()
        .cmp(&b.abs())
        .then_with(|| b.is_positive().cmp(&a.is_positive()))
        .then_with(|| a.denom().cmp(b.denom()))
}

impl Universe {
    pub fn new(spec: &SampleSpec) -> Universe {
        let mut ints: Vec<BigRational> = (spec.int_lo..=spec.int_hi)
            .map(|n| BigRational::from_integer(n.into()))
            .collect();
        ints.sort_by(magnitude_order);
        let mut fracs: BTreeSet<BigRational> = BTreeSet::new();
        for d in 2..=spec.max_den.max(1) {
            for n in spec.int_lo * d..=spec.int_hi * d {
                let q = BigRational::new(n.into(), d.into());
                if !q.is_integer() {
                    fracs.insert(q);
                }
            }
        }
        let mut fracs: Vec<BigRational> = fracs.into_iter().collect();
        fracs.sort_by(magnitude_order);
        let mut values: Vec<Value> = ints.into_iter().chain(fracs).map(Value::Num).collect();
        values.extend(spec.symbols.iter().map(|s| Value::sym(s)));
        let mut layer: Vec<Value> = spec.cons_atoms.clone();
        let mut conses: Vec<Value> = Vec::new();
        for _ in 0..spec.cons_depth {
            let next: Vec<Value> = layer
                .iter()
                .flat_map(|a| layer.iter().map(move |b| Value::cons(a.clone(), b.clone())))
                .filter(|v| !conses.contains(v))
                .collect();
            conses.extend(next);
            layer = spec
                .cons_atoms
                .iter()
                .cloned()
                .chain(conses.iter().cloned())
                .collect();
        }
        values.extend(conses);
        Universe { values }
    }

    /// The universe of the default spec.
    pub fn default_values() -> &'static [Value] {
        static VALUES: OnceLock<Vec<Value>> = OnceLock::new();
        VALUES.get_or_init(|| Universe::new(&SampleSpec::default()).values)
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The outcome of a search for a counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    /// The least counterexample found, by universe order.
    pub counterexample: Option<Binding>,
    pub checked: usize,
    /// Bindings on which evaluation diverged or failed.
    pub skipped: usize,
    pub exhaustive: bool,
}

impl Refutation {
    pub fn corroborated(&self) -> bool {
        self.counterexample.is_none()
    }
}

pub fn format_binding(b: &Binding) -> String {
    let parts: Vec<String> = b.iter().map(|(k, v)| format!("{k}={v}")).collect();
    parts.join(", ")
}

impl fmt::Display for Refutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = if self.exhaustive {
            "exhaustive"
        } else {
            "sampled"
        };
        match &self.counterexample {
            Some(b) => write!(f, "refuted by {}", format_binding(b)),
            None => write!(
                f,
                "corroborated ({mode}, {} bindings, {} skipped)",
                self.checked, self.skipped
            ),
        }
    }
}

enum Outcome {
    Holds,
    Fails,
    Skipped,
}

fn evaluate(c: &Conjecture, b: &Binding, w: &World, fuel: u64) -> Outcome {
    for h in &c.hyps {
        match eval_term(h, b, w, fuel) {
            Ok(v) if v.is_true() => {}
            Ok(_) => return Outcome::Holds,
            Err(_) => return Outcome::Skipped,
        }
    }
    match eval_term(&c.concl, b, w, fuel) {
        Ok(v) if v.is_true() => Outcome::Holds,
        Ok(_) => Outcome::Fails,
        Err(_) => Outcome::Skipped,
    }
}

/// Numbers near the conjecture's own constants, which is where boundary
/// mistakes show up.
fn constant_pool(t: &Term) -> Vec<Value> {
    let mut pool: Vec<Value> = Vec::new();
    for c in t.constants() {
        let near: Vec<Value> = match c.as_number() {
            Some(q) => [q - BigRational::one(), q.clone(), q + BigRational::one()]
                .into_iter()
                .map(Value::Num)
                .collect(),
            None => vec![c.clone()],
        };
        for v in near {
            if !pool.contains(&v) {
                pool.push(v);
            }
        }
    }
    pool
}

pub fn refute(c: &Conjecture, w: &World, spec: &SampleSpec) -> Refutation {
    let universe = if *spec == SampleSpec::default() {
        None
    } else {
        Some(Universe::new(spec))
    };
    let values: &[Value] = universe
        .as_ref()
        .map_or(Universe::default_values(), |u| u.values());
    refute_over(c, w, spec, values)
}

fn refute_over(c: &Conjecture, w: &World, spec: &SampleSpec, values: &[Value]) -> Refutation {
    let formula = c.to_term();
    let vars: Vec<Symbol> = formula.free_vars().into_iter().collect();
    let k = vars.len();
    let bind = |vals: Vec<Value>| -> Binding { vars.iter().cloned().zip(vals).collect() };
    let mut out = Refutation {
        counterexample: None,
        checked: 0,
        skipped: 0,
        exhaustive: true,
    };
    let n = values.len();
    let space = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(n));
    if space.is_some_and(|s| s <= spec.max_samples) {
        let total = space.unwrap_or(1);
        for idx in 0..total {
            let mut rest = idx;
            let mut vals = vec![Value::nil(); k];
            for slot in vals.iter_mut().rev() {
                *slot = values[rest % n].clone();
                rest /= n;
            }
            let b = bind(vals);
            out.checked += 1;
            match evaluate(c, &b, w, spec.fuel) {
                Outcome::Fails => {
                    out.counterexample = Some(b);
                    return out;
                }
                Outcome::Skipped => out.skipped += 1,
                Outcome::Holds => {}
            }
        }
        return out;
    }
    out.exhaustive = false;
    let pool = constant_pool(&formula);
    let rank = |v: &Value| values.iter().position(|u| u == v).unwrap_or(n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut best: Option<(Vec<usize>, Vec<Value>)> = None;
    for _ in 0..spec.max_samples {
        let vals: Vec<Value> = (0..k)
            .map(|_| {
                if !pool.is_empty() && rng.gen_bool(0.25) {
                    pool[rng.gen_range(0..pool.len())].clone()
                } else {
                    values[rng.gen_range(0..n)].clone()
                }
            })
            .collect();
        out.checked += 1;
        match evaluate(c, &bind(vals.clone()), w, spec.fuel) {
            Outcome::Fails => {
                let key: Vec<usize> = vals.iter().map(rank).collect();
                if best
                    .as_ref()
                    .is_none_or(|(bk, bv)| (&key, &vals) < (bk, bv))
                {
                    best = Some((key, vals));
                }
            }
            Outcome::Skipped => out.skipped += 1,
            Outcome::Holds => {}
        }
    }
    out.counterexample = best.map(|(_, vals)| bind(vals));
    out
}

/// Checks a rule as a universally quantified implication.
pub fn validate_rule(r: &Rule, w: &World, spec: &SampleSpec) -> Result<(), Binding> {
    let c = Conjecture::from_formula(&r.to_term());
    match refute(&c, w, spec).counterexample {
        Some(b) => Err(b),
        None => Ok(()),
    }
}
