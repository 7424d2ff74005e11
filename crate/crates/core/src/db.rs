//! The rule database behind the decision procedure.
//!
//! Recognizers get dense ids in declaration order. Each recognizer caches
//! its signed implication closure: the recognizers it implies, the ones it
//! excludes, the interval its members lie in, and the ids of the rules that
//! contributed.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::engine::{builtin_bounders, Bounder};
use crate::interval::{Domain, Interval};
use crate::rule::Rule;
use crate::rune::Rune;
use crate::sexp::Symbol;
use crate::tau::Tau;
use crate::world::World;

pub type RecId = usize;
pub type RuleId = usize;

/// A growable bit set of dense ids.
#[derive(Clone, Default)]
pub struct IdSet(FixedBitSet);

impl IdSet {
    pub fn new() -> Self {
        IdSet(FixedBitSet::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        IdSet(FixedBitSet::with_capacity(n))
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = IdSet::new();
        s.insert(i);
        s
    }

    pub fn insert(&mut self, i: usize) -> bool {
        if i >= self.0.len() {
            self.0.grow(i + 1);
        }
        !self.0.put(i)
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.0.len() {
            self.0.set(i, false);
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn union_with(&mut self, other: &IdSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &IdSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &IdSet) {
        self.0.difference_with(&other.0);
    }

    pub fn is_disjoint(&self, other: &IdSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn is_subset(&self, other: &IdSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn first_common(&self, other: &IdSet) -> Option<usize> {
        self.0.intersection(&other.0).next()
    }
}

impl PartialEq for IdSet {
    fn eq(&self, other: &Self) -> bool {
        self.0.ones().eq(other.0.ones())
    }
}

impl Eq for IdSet {}

impl fmt::Debug for IdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}

impl FromIterator<usize> for IdSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = IdSet::new();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

/// Everything a recognizer implies through the enabled rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub pos: IdSet,
    pub neg: IdSet,
    /// `None` is the whole universe.
    pub interval: Option<Interval>,
    pub support: IdSet,
    /// The recognizer can hold of nothing.
    pub contradictory: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigRule {
    pub reqs: Vec<Vec<(RecId, bool)>>,
    pub concl: (RecId, bool),
    pub id: RuleId,
}

/// Ids of the recognizers every world has.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Builtins {
    pub integerp: RecId,
    pub rationalp: RecId,
    pub consp: RecId,
    pub symbolp: RecId,
    pub stringp: RecId,
    pub natp: RecId,
    pub posp: RecId,
}

#[derive(Clone)]
pub struct TauDatabase {
    recognizers: Vec<Symbol>,
    index: HashMap<Symbol, RecId>,
    builtins: Builtins,
    rules: Vec<(Rune, Rule)>,
    edges: Vec<Vec<(RecId, bool, RuleId)>>,
    bounds: Vec<Vec<(Interval, RuleId)>>,
    closures: Vec<Closure>,
    signatures: HashMap<Symbol, Vec<SigRule>>,
    bounders: HashMap<Symbol, Bounder>,
}

impl fmt::Debug for TauDatabase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TauDatabase")
            .field("recognizers", &self.recognizers)
            .field("rules", &self.rules.len())
            .finish()
    }
}

impl TauDatabase {
    /// Builds the database from the world's recognizers and its enabled
    /// tau rules, with the built-in bounders registered.
    pub fn build(w: &World) -> TauDatabase {
        let rules: Vec<(Rune, Rule)> = w
            .rules()
            .iter()
            .filter(|(rune, _)| w.is_enabled(rune))
            .map(|(rune, r)| (rune.clone(), r.clone()))
            .collect();
        TauDatabase::from_parts(w.recognizers().to_vec(), rules)
    }

    /// Builds from explicit parts. Rules naming undeclared recognizers are
    /// ignored. The built-in recognizer names must be present.
    pub fn from_parts(recognizers: Vec<Symbol>, rules: Vec<(Rune, Rule)>) -> TauDatabase {
        let index: HashMap<Symbol, RecId> = recognizers
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let id = |name: &str| {
            *index
                .get(&Symbol::new(name))
                .unwrap_or_else(|| panic!("built-in recognizer {name} missing"))
        };
        let builtins = Builtins {
            integerp: id("INTEGERP"),
            rationalp: id("RATIONALP"),
            consp: id("CONSP"),
            symbolp: id("SYMBOLP"),
            stringp: id("STRINGP"),
            natp: id("NATP"),
            posp: id("POSP"),
        };
        let n = recognizers.len();
        let mut db = TauDatabase {
            recognizers,
            index,
            builtins,
            rules: Vec::new(),
            edges: vec![Vec::new(); n],
            bounds: vec![Vec::new(); n],
            closures: Vec::new(),
            signatures: HashMap::new(),
            bounders: builtin_bounders()
                .into_iter()
                .map(|b| (b.fun.clone(), b))
                .collect(),
        };
        for (rune, r) in rules {
            db.ingest(rune, r);
        }
        db.close_implications();
        db
    }

    fn ingest(&mut self, rune: Rune, r: Rule) {
        let id = self.rules.len();
        match &r {
            Rule::Implication { hyp, concl } => {
                let (Some(h), Some(c)) = (self.rec_id(hyp), self.rec_id(&concl.rec)) else {
                    return;
                };
                self.edges[h].push((c, concl.positive, id));
            }
            Rule::Bound { hyp, interval } => {
                let Some(h) = self.rec_id(hyp) else { return };
                self.bounds[h].push((interval.clone(), id));
            }
            Rule::Signature { fun, reqs, concl } => {
                let Some(c) = self.rec_id(&concl.rec) else {
                    return;
                };
                let mut ids = Vec::with_capacity(reqs.len());
                for rs in reqs {
                    let mut arg = Vec::with_capacity(rs.len());
                    for s in rs {
                        let Some(i) = self.rec_id(&s.rec) else { return };
                        arg.push((i, s.positive));
                    }
                    ids.push(arg);
                }
                self.signatures
                    .entry(fun.clone())
                    .or_default()
                    .push(SigRule {
                        reqs: ids,
                        concl: (c, concl.positive),
                        id,
                    });
            }
        }
        self.rules.push((rune, r));
    }

    /// Recomputes every cached closure from the edges.
    pub fn close_implications(&mut self) {
        let n = self.recognizers.len();
        self.closures = (0..n).map(|r| self.raw_closure(r)).collect();
        for r in 0..n {
            let probe = Tau::from_closure(self, r);
            self.closures[r].contradictory = probe.is_bottom();
        }
    }

    /// Breadth-first search over positive edges; negative conclusions are
    /// recorded but not followed.
    fn raw_closure(&self, start: RecId) -> Closure {
        let mut pos = IdSet::with_capacity(self.recognizers.len());
        let mut neg = IdSet::new();
        let mut support = IdSet::new();
        let mut queue = VecDeque::from([start]);
        pos.insert(start);
        while let Some(u) = queue.pop_front() {
            for &(q, positive, id) in &self.edges[u] {
                support.insert(id);
                if !positive {
                    neg.insert(q);
                } else if pos.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        let mut interval = Some(Interval::top());
        let mut empty = false;
        for u in pos.ones() {
            let inherent = if u == self.builtins.integerp {
                Some(Interval::of_domain(Domain::Integer))
            } else if u == self.builtins.rationalp {
                Some(Interval::of_domain(Domain::Rational))
            } else {
                None
            };
            let facts = self.bounds[u].iter().map(|(i, id)| (i.clone(), Some(*id)));
            for (i, id) in inherent.map(|i| (i, None)).into_iter().chain(facts) {
                if let Some(id) = id {
                    support.insert(id);
                }
                interval = match interval.as_ref().and_then(|cur| cur.intersect(&i)) {
                    Some(x) => Some(x),
                    None => {
                        empty = true;
                        None
                    }
                };
                if empty {
                    break;
                }
            }
        }
        Closure {
            pos,
            neg,
            interval: interval.filter(|i| !i.is_top()),
            support,
            contradictory: empty,
        }
    }

    pub fn len(&self) -> usize {
        self.recognizers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recognizers.is_empty()
    }

    pub fn builtins(&self) -> &Builtins {
        &self.builtins
    }

    pub fn rec_id(&self, name: &Symbol) -> Option<RecId> {
        self.index.get(name).copied()
    }

    pub fn rec_name(&self, id: RecId) -> &Symbol {
        &self.recognizers[id]
    }

    pub fn recognizers(&self) -> &[Symbol] {
        &self.recognizers
    }

    pub fn closure(&self, r: RecId) -> &Closure {
        &self.closures[r]
    }

    pub fn edges(&self, r: RecId) -> &[(RecId, bool, RuleId)] {
        &self.edges[r]
    }

    pub fn rule(&self, id: RuleId) -> &(Rune, Rule) {
        &self.rules[id]
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Runes of the given rules, sorted.
    pub fn runes_of(&self, ids: &IdSet) -> Vec<Rune> {
        let mut out: Vec<Rune> = ids.ones().map(|i| self.rules[i].0.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn signatures(&self, f: &Symbol) -> &[SigRule] {
        self.signatures.get(f).map_or(&[], Vec::as_slice)
    }

    pub fn bounder(&self, f: &Symbol) -> Option<&Bounder> {
        self.bounders.get(f)
    }

    pub(crate) fn insert_bounder(&mut self, b: Bounder) {
        self.bounders.insert(b.fun.clone(), b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::SignedRec;
    use crate::rune::RuneClass;
    use proptest::prelude::*;

    const BUILTIN: &[&str] = crate::world::BUILTIN_RECOGNIZERS;

    fn db_with(extra: &[&str], edges: &[(&str, &str, bool)]) -> TauDatabase {
        let recs: Vec<Symbol> = BUILTIN
            .iter()
            .chain(extra)
            .map(|s| Symbol::new(s))
            .collect();
        let rules = edges
            .iter()
            .enumerate()
            .map(|(i, (p, q, positive))| {
                (
                    Rune::indexed(RuneClass::TauSystem, "T", i as u64),
                    Rule::Implication {
                        hyp: Symbol::new(p),
                        concl: SignedRec {
                            rec: Symbol::new(q),
                            positive: *positive,
                        },
                    },
                )
            })
            .collect();
        TauDatabase::from_parts(recs, rules)
    }

    fn id(db: &TauDatabase, s: &str) -> RecId {
        db.rec_id(&Symbol::new(s)).unwrap()
    }

    #[test]
    fn chains_through_positive_edges() {
        let db = db_with(
            &["EVENP"],
            &[("EVENP", "INTEGERP", true), ("INTEGERP", "RATIONALP", true)],
        );
        let c = db.closure(id(&db, "EVENP"));
        assert!(c.pos.contains(id(&db, "INTEGERP")));
        assert!(c.pos.contains(id(&db, "RATIONALP")));
        assert_eq!(c.interval, Some(Interval::of_domain(Domain::Integer)));
        assert_eq!(c.support.count(), 2);
    }

    #[test]
    fn reflexive_without_edges() {
        let db = db_with(&["P"], &[]);
        let p = id(&db, "P");
        assert_eq!(db.closure(p).pos, IdSet::singleton(p));
        assert!(db.closure(p).neg.is_empty());
    }

    #[test]
    fn direct_contradiction() {
        let db = db_with(&["P", "Q"], &[("P", "Q", true), ("P", "Q", false)]);
        assert!(db.closure(id(&db, "P")).contradictory);
        assert!(!db.closure(id(&db, "Q")).contradictory);
    }

    #[test]
    fn negative_edges_stop() {
        let db = db_with(&["P", "Q", "R"], &[("P", "Q", false), ("Q", "R", true)]);
        let c = db.closure(id(&db, "P"));
        assert!(c.neg.contains(id(&db, "Q")));
        assert!(!c.pos.contains(id(&db, "R")));
        assert!(!c.neg.contains(id(&db, "R")));
    }

    /// Reachability by repeated squaring of the adjacency matrix, used as
    /// an independent check of the cached closures.
    fn reference_closure(n: usize, edges: &[(usize, usize, bool)]) -> Vec<(Vec<bool>, Vec<bool>)> {
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b, pos) in edges {
            if pos {
                reach[a][b] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        (0..n)
            .map(|i| {
                let mut neg = vec![false; n];
                for &(a, b, pos) in edges {
                    if !pos && reach[i][a] {
                        neg[b] = true;
                    }
                }
                (reach[i].clone(), neg)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn closure_matches_reference(
            n in 1usize..50,
            raw in proptest::collection::vec((0usize..50, 0usize..50, any::<bool>()), 0..120)
        ) {
            let names: Vec<String> = (0..n).map(|i| format!("R{i}")).collect();
            let edges: Vec<(usize, usize, bool)> =
                raw.into_iter().filter(|(a, b, _)| *a < n && *b < n).collect();
            let named: Vec<(&str, &str, bool)> = edges
                .iter()
                .map(|&(a, b, p)| (names[a].as_str(), names[b].as_str(), p))
                .collect();
            let extra: Vec<&str> = names.iter().map(String::as_str).collect();
            let mut db = db_with(&extra, &named);
            let offset = BUILTIN.len();
            let expected = reference_closure(n, &edges);
            for (i, (pos, neg)) in expected.iter().enumerate() {
                let c = db.closure(i + offset);
                for j in 0..n {
                    prop_assert_eq!(c.pos.contains(j + offset), pos[j]);
                    prop_assert_eq!(c.neg.contains(j + offset), neg[j]);
                }
            }
            let before: Vec<Closure> = (0..db.len()).map(|r| db.closure(r).clone()).collect();
            db.close_implications();
            let after: Vec<Closure> = (0..db.len()).map(|r| db.closure(r).clone()).collect();
            prop_assert_eq!(before, after);
        }
    }
}
