//! Randomized soundness sweeps: random worlds, random oracle-validated
//! rules, random conjectures, and an oracle check of every proof.
//!
//! Generated recognizers only test value kinds, compare against constants
//! on the half-integer grid in [-10, 10], and test equality with a few
//! constants. Every value then behaves like some member of the sampled
//! universe, so rules validated on the universe hold for the values the
//! generated functions compute.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::db::TauDatabase;
use crate::engine::{Conjecture, Engine, Verdict};
use crate::normalize::translate;
use crate::oracle::{format_binding, refute, validate_rule, SampleSpec, Universe};
use crate::sexp::{read_sexp, Symbol};
use crate::term::{apply_fn, Value};
use crate::world::World;

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub worlds: usize,
    pub seed: u64,
    pub conjectures_per_world: usize,
    /// Validate every proposed rule with the oracle and drop refuted ones.
    pub paranoid: bool,
    /// Deliberately wrong rules proposed per world.
    pub bad_proposals: usize,
    pub spec: SampleSpec,
    /// Test hook: the engine claims every conjecture.
    pub inject_fault: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            worlds: 1000,
            seed: 0,
            conjectures_per_world: 4,
            paranoid: true,
            bad_proposals: 2,
            spec: SampleSpec::default(),
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub worlds: usize,
    pub conjectures: usize,
    pub proved: usize,
    pub vacuous: usize,
    pub unknown: usize,
    pub errors: usize,
    pub refuted_after_proved: usize,
    pub rules_accepted: usize,
    pub rules_rejected: usize,
    /// Oracle bindings skipped because evaluation diverged.
    pub skipped: usize,
    /// `(world index, description)` of each refuted proof.
    pub failures: Vec<(usize, String)>,
}

impl SweepReport {
    pub fn merge(mut self, other: SweepReport) -> SweepReport {
        self.worlds += other.worlds;
        self.conjectures += other.conjectures;
        self.proved += other.proved;
        self.vacuous += other.vacuous;
        self.unknown += other.unknown;
        self.errors += other.errors;
        self.refuted_after_proved += other.refuted_after_proved;
        self.rules_accepted += other.rules_accepted;
        self.rules_rejected += other.rules_rejected;
        self.skipped += other.skipped;
        self.failures.extend(other.failures);
        self.failures.sort();
        self
    }

    pub fn is_sound(&self) -> bool {
        self.refuted_after_proved == 0
    }

    pub fn summary_json(&self) -> String {
        format!(
            "{{\"worlds\":{},\"conjectures\":{},\"proved\":{},\"vacuous\":{},\"unknown\":{},\"errors\":{},\"refuted_after_proved\":{},\"rules_accepted\":{},\"rules_rejected\":{},\"skipped\":{}}}",
            self.worlds,
            self.conjectures,
            self.proved,
            self.vacuous,
            self.unknown,
            self.errors,
            self.refuted_after_proved,
            self.rules_accepted,
            self.rules_rejected,
            self.skipped
        )
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "worlds: {}", self.worlds)?;
        writeln!(f, "conjectures: {}", self.conjectures)?;
        writeln!(f, "proved: {} ({} vacuous)", self.proved, self.vacuous)?;
        writeln!(f, "unknown: {}", self.unknown)?;
        writeln!(f, "errors: {}", self.errors)?;
        writeln!(f, "rules accepted: {}", self.rules_accepted)?;
        writeln!(f, "rules rejected: {}", self.rules_rejected)?;
        writeln!(f, "skipped bindings: {}", self.skipped)?;
        writeln!(f, "refuted after proved: {}", self.refuted_after_proved)?;
        for (i, d) in &self.failures {
            writeln!(f, "  world {i}: {d}")?;
        }
        Ok(())
    }
}

pub fn sweep(cfg: &SweepConfig) -> SweepReport {
    (0..cfg.worlds)
        .into_par_iter()
        .map(|i| run_world(i, cfg))
        .reduce(SweepReport::default, SweepReport::merge)
}

fn world_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

const KIND_TESTS: &[&str] = &["INTEGERP", "RATIONALP", "CONSP", "SYMBOLP", "NATP", "POSP"];

const FUNCTIONS: &[&str] = &[
    "(- x)",
    "(if (consp x) (car x) x)",
    "(if (natp x) x 0)",
    "(+ x 1)",
    "(* x 2)",
    "(cdr x)",
    "(cons x 1)",
    "(if (integerp x) (- x 3) nil)",
];

fn grid(rng: &mut ChaCha8Rng) -> String {
    let n: i64 = rng.gen_range(-20..=20);
    if n % 2 == 0 {
        (n / 2).to_string()
    } else {
        format!("{n}/2")
    }
}

fn atom(rng: &mut ChaCha8Rng, earlier: usize) -> String {
    let choices = if earlier > 0 { 6 } else { 5 };
    match rng.gen_range(0..choices) {
        0 | 1 => format!("({} x)", KIND_TESTS.choose(rng).unwrap()),
        2 => format!("(< x {})", grid(rng)),
        3 => format!("(< {} x)", grid(rng)),
        4 => {
            if rng.gen_bool(0.7) {
                format!("(equal x {})", rng.gen_range(-10..=10))
            } else {
                format!("(equal x '{})", ["A", "NIL"].choose(rng).unwrap())
            }
        }
        _ => format!("(p{} x)", rng.gen_range(1..=earlier)),
    }
}

fn body(rng: &mut ChaCha8Rng, earlier: usize, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.35) {
        return atom(rng, earlier);
    }
    match rng.gen_range(0..3) {
        0 => format!("(not {})", body(rng, earlier, depth - 1)),
        1 => format!(
            "(and {} {})",
            body(rng, earlier, depth - 1),
            body(rng, earlier, depth - 1)
        ),
        _ => format!(
            "(or {} {})",
            body(rng, earlier, depth - 1),
            body(rng, earlier, depth - 1)
        ),
    }
}

/// A world's recognizers with their truth tables on the universe.
struct Tables {
    names: Vec<Symbol>,
    on_x: Vec<Vec<bool>>,
    on_fx: Vec<Vec<bool>>,
}

fn truth_tables(w: &World, fuel: u64) -> Tables {
    let u = Universe::default_values();
    let f = Symbol::new("F");
    let fx: Vec<Option<Value>> = u
        .iter()
        .map(|v| apply_fn(&f, std::slice::from_ref(v), w, fuel).ok())
        .collect();
    let names: Vec<Symbol> = w.recognizers().to_vec();
    let eval = |r: &Symbol, v: &Value| {
        apply_fn(r, std::slice::from_ref(v), w, fuel).is_ok_and(|b| b.is_true())
    };
    let on_x = names
        .iter()
        .map(|r| u.iter().map(|v| eval(r, v)).collect())
        .collect();
    let on_fx = names
        .iter()
        .map(|r| {
            fx.iter()
                .map(|v| v.as_ref().is_some_and(|v| eval(r, v)))
                .collect()
        })
        .collect();
    Tables { names, on_x, on_fx }
}

fn implies_table(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(x, y)| !x || *y)
}

fn disjoint_table(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(x, y)| !(x & y))
}

fn lname(s: &Symbol) -> String {
    s.name().to_ascii_lowercase()
}

/// Rule formulas that hold on the universe, and a few that do not.
fn propose_rules(rng: &mut ChaCha8Rng, t: &Tables, bad: usize) -> Vec<String> {
    let n = t.names.len();
    let builtin = crate::world::BUILTIN_RECOGNIZERS.len();
    let mut good = Vec::new();
    let mut wrong = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if p == q || (p < builtin && q < builtin) {
                continue;
            }
            let (pn, qn) = (lname(&t.names[p]), lname(&t.names[q]));
            if implies_table(&t.on_x[p], &t.on_x[q]) {
                good.push(format!("(implies ({pn} x) ({qn} x))"));
            } else {
                wrong.push(format!("(implies ({pn} x) ({qn} x))"));
            }
            if disjoint_table(&t.on_x[p], &t.on_x[q]) {
                good.push(format!("(implies ({pn} x) (not ({qn} x)))"));
            }
            if implies_table(&t.on_x[p], &t.on_fx[q]) {
                good.push(format!("(implies ({pn} x) ({qn} (f x)))"));
            }
        }
    }
    let u = Universe::default_values();
    for p in builtin..n {
        let members: Vec<_> = u
            .iter()
            .zip(&t.on_x[p])
            .filter(|(_, b)| **b)
            .map(|(v, _)| v.rfix())
            .collect();
        let (Some(lo), Some(hi)) = (members.iter().min(), members.iter().max()) else {
            continue;
        };
        let half = |q: &num_rational::BigRational, up: bool| {
            let twice = q * num_rational::BigRational::from_integer(2.into());
            let k = if up { twice.ceil() } else { twice.floor() }.to_integer();
            num_rational::BigRational::new(k, 2.into())
        };
        let pn = lname(&t.names[p]);
        let (l, h) = (half(lo, false), half(hi, true));
        if l >= num_rational::BigRational::from_integer((-10).into()) {
            good.push(format!("(implies ({pn} x) (<= {l} x))"));
        }
        if h <= num_rational::BigRational::from_integer(10.into()) {
            good.push(format!("(implies ({pn} x) (<= x {h}))"));
        }
    }
    good.shuffle(rng);
    good.truncate(10);
    wrong.shuffle(rng);
    good.extend(wrong.into_iter().take(bad));
    good.shuffle(rng);
    good
}

fn literal(rng: &mut ChaCha8Rng, names: &[Symbol]) -> String {
    let r = lname(names.choose(rng).unwrap());
    let v = if rng.gen_bool(0.75) { "x" } else { "y" };
    let lit = match rng.gen_range(0..9) {
        0..=2 => format!("({r} {v})"),
        3 => format!("(< {v} {})", grid(rng)),
        4 => format!("(< {} {v})", grid(rng)),
        5 => format!("(equal {v} {})", rng.gen_range(-10..=10)),
        6 => format!("({r} (f {v}))"),
        7 => match rng.gen_range(0..3) {
            0 => format!("({r} (+ x y))"),
            1 => format!("(< (+ x y) {})", grid(rng)),
            _ => "(consp (cons x y))".to_string(),
        },
        _ => format!("({r} (* x y))"),
    };
    if rng.gen_bool(0.4) {
        format!("(not {lit})")
    } else {
        lit
    }
}

fn conjecture(rng: &mut ChaCha8Rng, t: &Tables) -> String {
    let hyps: Vec<String> = (0..rng.gen_range(0..=3))
        .map(|_| literal(rng, &t.names))
        .collect();
    let concl = if rng.gen_bool(0.3) {
        format!("(or {} {})", literal(rng, &t.names), literal(rng, &t.names))
    } else {
        literal(rng, &t.names)
    };
    // Bias toward provable shapes: conclude something the truth tables
    // say follows from a hypothesis.
    let concl = match hyps.first() {
        Some(h) if rng.gen_bool(0.5) => targeted(rng, t, h).unwrap_or(concl),
        _ => concl,
    };
    if hyps.is_empty() {
        concl
    } else {
        format!("(implies (and {}) {})", hyps.join(" "), concl)
    }
}

fn targeted(rng: &mut ChaCha8Rng, t: &Tables, hyp: &str) -> Option<String> {
    let inner = hyp.strip_prefix('(')?.strip_suffix(" x)")?;
    let p = t.names.iter().position(|s| lname(s) == inner)?;
    let mut options: Vec<String> = Vec::new();
    for (q, name) in t.names.iter().enumerate() {
        let qn = lname(name);
        if implies_table(&t.on_x[p], &t.on_x[q]) {
            options.push(format!("({qn} x)"));
        }
        if disjoint_table(&t.on_x[p], &t.on_x[q]) {
            options.push(format!("(not ({qn} x))"));
        }
        if implies_table(&t.on_x[p], &t.on_fx[q]) {
            options.push(format!("({qn} (f x))"));
        }
    }
    options.choose(rng).cloned()
}

fn run_world(index: usize, cfg: &SweepConfig) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(world_seed(cfg.seed, index));
    let mut report = SweepReport {
        worlds: 1,
        ..SweepReport::default()
    };
    let mut w = World::new();
    let recognizers = rng.gen_range(2..=5);
    for j in 1..=recognizers {
        let src = format!(
            "(defun p{j} (x) {}) (declare-recognizer p{j})",
            body(&mut rng, j - 1, 2)
        );
        w = w
            .process_form_str(&src)
            .expect("generated recognizers are boolean");
    }
    let f = FUNCTIONS.choose(&mut rng).unwrap();
    w = w
        .process_form_str(&format!("(defun f (x) {f})"))
        .expect("function");
    let tables = truth_tables(&w, cfg.spec.fuel);
    for (k, formula) in propose_rules(&mut rng, &tables, cfg.bad_proposals)
        .into_iter()
        .enumerate()
    {
        let src = format!("(defthm r{k} {formula} :rule-classes :tau-system)");
        let Ok(next) = w.process_form_str(&src) else {
            continue;
        };
        if cfg.paranoid {
            let name = Symbol::new(&format!("R{k}"));
            let runes = next.theorem_runes(&name).unwrap_or_default();
            let refuted = runes.iter().any(|r| {
                next.rules()
                    .get(r)
                    .is_some_and(|rule| validate_rule(rule, &next, &cfg.spec).is_err())
            });
            if refuted {
                report.rules_rejected += 1;
                continue;
            }
        }
        report.rules_accepted += 1;
        w = next;
    }
    let db = TauDatabase::build(&w);
    let engine = Engine::new(&w, &db).with_fault(cfg.inject_fault);
    for _ in 0..cfg.conjectures_per_world {
        let text = conjecture(&mut rng, &tables);
        let Ok(term) = read_sexp(&text)
            .map_err(|_| ())
            .and_then(|s| translate(&s, &w).map_err(|_| ()))
        else {
            report.errors += 1;
            continue;
        };
        report.conjectures += 1;
        let c = Conjecture::from_formula(&term);
        match engine.decide(&c) {
            Ok(Verdict::Proved { vacuous, .. }) => {
                report.proved += 1;
                if vacuous {
                    report.vacuous += 1;
                }
                let r = refute(&c, &w, &cfg.spec);
                report.skipped += r.skipped;
                if let Some(b) = r.counterexample {
                    report.refuted_after_proved += 1;
                    report
                        .failures
                        .push((index, format!("{text} refuted by {}", format_binding(&b))));
                }
            }
            Ok(_) => report.unknown += 1,
            Err(_) => report.errors += 1,
        }
    }
    report
}
