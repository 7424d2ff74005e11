use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use tau_core::db::TauDatabase;
use tau_core::engine::Engine;
use tau_core::normalize::{expand_guard_holders, expand_macro_aliases, translate};
use tau_core::sexp::{print_sexp, read_sexp, PrintBase, PrintControl, Sexp};
use tau_core::term::{eval_term, Binding, Term, Value};
use tau_core::world::World;

fn arb_atom() -> impl Strategy<Value = Sexp> {
    prop_oneof![
        any::<i64>().prop_map(Sexp::int),
        (any::<i64>(), 1i64..10_000)
            .prop_map(|(n, d)| Sexp::number(BigRational::new(BigInt::from(n), BigInt::from(d)))),
        "[A-Z][A-Z0-9*$-]{0,6}".prop_map(|s| Sexp::sym(&s)),
        "[A-Z][A-Z0-9-]{0,4}".prop_map(|s| Sexp::sym(&format!(":{s}"))),
        "[ -~]{0,8}".prop_map(Sexp::Str),
    ]
}

fn arb_sexp() -> impl Strategy<Value = Sexp> {
    arb_atom().prop_recursive(4, 32, 5, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..5).prop_map(Sexp::list),
            (prop::collection::vec(inner.clone(), 1..4), any::<i64>())
                .prop_map(|(items, n)| Sexp::dotted(items, Sexp::int(n))),
            inner.prop_map(Sexp::quote),
        ]
    })
}

fn arb_base() -> impl Strategy<Value = PrintBase> {
    prop::sample::select(PrintBase::ALL.to_vec())
}

const APPEND: &str = "(defun binary-append (x y)
                        (if (consp x) (cons (car x) (binary-append (cdr x) y)) y))
                      (add-macro-alias append binary-append)
                      (add-macro-fn append binary-append)";

fn append_world() -> World {
    World::new().process_form_str(APPEND).unwrap()
}

fn arb_value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        (-5i64..6).prop_map(Value::int),
        (-5i64..6, 1i64..4).prop_map(|(n, d)| Value::rat(n, d)),
        prop::sample::select(vec!["A", "B", "NIL", "T"]).prop_map(Value::sym),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| Value::cons(a, b))
    })
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["X", "Y", "Z"]).prop_map(Term::var),
        arb_value().prop_map(Term::konst),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let binary = prop::sample::select(vec![
            "CONS",
            "EQUAL",
            "<",
            "BINARY-+",
            "BINARY-*",
            "BINARY-APPEND",
            "MEMBER-EQUAL",
        ]);
        let unary = prop::sample::select(vec!["CAR", "CDR", "CONSP", "INTEGERP", "NOT", "UNARY--"]);
        prop_oneof![
            (binary, inner.clone(), inner.clone()).prop_map(|(f, a, b)| Term::app(f, vec![a, b])),
            (unary, inner.clone()).prop_map(|(f, a)| Term::app(f, vec![a])),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, b, c)| Term::if_(a, b, c)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("MBE", vec![a, b])),
            inner
                .clone()
                .prop_map(|a| Term::app("THE", vec![Term::konst(Value::sym("INTEGER")), a])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app("PROG2$", vec![a, b])),
        ]
    })
}

fn arb_binding() -> impl Strategy<Value = Binding> {
    (arb_value(), arb_value(), arb_value()).prop_map(|(x, y, z)| {
        [("X", x), ("Y", y), ("Z", z)]
            .into_iter()
            .map(|(k, v)| (k.into(), v))
            .collect()
    })
}

const RECS: &str = "(defun p0 (x) (and (integerp x) (< 0 x)))
                    (declare-recognizer p0)
                    (defun p1 (x) (and (integerp x) (< 1 x)))
                    (declare-recognizer p1)
                    (defun q (x) (and (consp x) (integerp (car x))))
                    (declare-recognizer q)
                    (defthm p1-p0 (implies (p1 x) (p0 x)) :rule-classes :tau-system)
                    (defthm q-consp (implies (q x) (consp x)) :rule-classes :tau-system)";

fn arb_literal() -> impl Strategy<Value = String> {
    let rec = prop::sample::select(vec![
        "p0",
        "p1",
        "q",
        "integerp",
        "rationalp",
        "consp",
        "natp",
        "symbolp",
    ]);
    let var = prop::sample::select(vec!["x", "y"]);
    prop_oneof![
        (rec, var.clone(), any::<bool>()).prop_map(|(r, v, pos)| if pos {
            format!("({r} {v})")
        } else {
            format!("(not ({r} {v}))")
        }),
        (var.clone(), -4i64..5).prop_map(|(v, c)| format!("(< {v} {c})")),
        (var.clone(), -4i64..5).prop_map(|(v, c)| format!("(< {c} {v})")),
        (var, -4i64..5, any::<bool>()).prop_map(|(v, c, pos)| if pos {
            format!("(equal {v} {c})")
        } else {
            format!("(not (equal {v} {c}))")
        }),
    ]
}

const EVENTS: &[&str] = &[
    "(defun f (x) (cons x x))",
    "(defun g (x) (if (consp x) (car x) nil))",
    "(defund h (x y) (equal x y))",
    "(defun p (x) (and (integerp x) (< 2 x)))",
    "(declare-recognizer p)",
    "(defthm p-int (implies (p x) (integerp x)) :rule-classes :tau-system)",
    "(add-macro-alias app binary-append)",
    "(in-theory (disable g))",
    "(in-theory (enable (:d h)))",
    "(defun-inline k (x) (consp x))",
    "(defmacro twice (x) (list 'cons x x))",
    "(in-theory (disable (:e f)))",
];

proptest! {
    #[test]
    fn sexp_round_trip(s in arb_sexp(), base in arb_base()) {
        let ctl = PrintControl::new(base, true);
        let text = print_sexp(&s, &ctl);
        prop_assert_eq!(read_sexp(&text).unwrap(), s, "{}", text);
    }

    #[test]
    fn eval_is_deterministic(t in arb_term(), b in arb_binding()) {
        let w = append_world();
        prop_assert_eq!(eval_term(&t, &b, &w, 10_000), eval_term(&t, &b, &w, 10_000));
    }

    #[test]
    fn eval_fuel_monotone(t in arb_term(), b in arb_binding(), k in 1u64..200, extra in 0u64..5_000) {
        let w = append_world();
        if let Ok(v) = eval_term(&t, &b, &w, k) {
            prop_assert_eq!(eval_term(&t, &b, &w, k + extra), Ok(v));
        }
    }

    #[test]
    fn guard_holder_pass_idempotent(t in arb_term()) {
        let once = expand_guard_holders(&t);
        prop_assert_eq!(expand_guard_holders(&once), once);
    }

    #[test]
    fn alias_reassociation_round_trip(args in prop::collection::vec("[A-W]", 2..6)) {
        let w = append_world();
        let flat = format!("(append {})", args.join(" "));
        let s = read_sexp(&flat).unwrap();
        let t = expand_macro_aliases(&s, &w).unwrap();
        prop_assert_eq!(w.display_sexp(&t.to_sexp()), s);
    }

    #[test]
    fn replay_reproduces_world(picks in prop::collection::vec(0..EVENTS.len(), 0..12)) {
        let mut w = World::new();
        for i in picks {
            if let Ok(next) = w.process_form_str(EVENTS[i]) {
                w = next;
            }
        }
        prop_assert_eq!(World::replay(w.events()).unwrap(), w);
    }

    #[test]
    fn stronger_hypotheses_keep_proofs(
        hyps in prop::collection::vec(arb_literal(), 1..4),
        extra in arb_literal(),
        concl in arb_literal(),
    ) {
        let w = World::new().process_form_str(RECS).unwrap();
        let db = TauDatabase::build(&w);
        let engine = Engine::new(&w, &db);
        let decide = |hs: &[String]| {
            let text = format!("(implies (and {}) {concl})", hs.join(" "));
            engine.decide_formula(&translate(&read_sexp(&text).unwrap(), &w).unwrap()).unwrap()
        };
        if decide(&hyps).is_proved() {
            let mut stronger = hyps.clone();
            stronger.push(extra);
            let v = decide(&stronger);
            prop_assert!(v.is_proved(), "{:?} + {:?}: {:?}", hyps, stronger.last(), v);
        }
    }
}
