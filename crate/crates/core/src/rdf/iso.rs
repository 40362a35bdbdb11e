//! Blank-node isomorphism: colour refinement followed by a backtracking search.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use super::{BlankNode, Graph, Term, Triple};

pub(super) fn isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let ground_a: HashSet<&Triple> = a.iter().filter(|t| !has_blank(t)).collect();
    let ground_b: HashSet<&Triple> = b.iter().filter(|t| !has_blank(t)).collect();
    if ground_a != ground_b {
        return false;
    }
    let blanks_a: Vec<BlankNode> = a.blank_nodes().into_iter().collect();
    let blanks_b: Vec<BlankNode> = b.blank_nodes().into_iter().collect();
    if blanks_a.len() != blanks_b.len() {
        return false;
    }
    let colours_a = refine(a, &blanks_a);
    let colours_b = refine(b, &blanks_b);
    let mut hist_a: BTreeMap<u64, usize> = BTreeMap::new();
    let mut hist_b: BTreeMap<u64, usize> = BTreeMap::new();
    for c in colours_a.values() {
        *hist_a.entry(*c).or_default() += 1;
    }
    for c in colours_b.values() {
        *hist_b.entry(*c).or_default() += 1;
    }
    if hist_a != hist_b {
        return false;
    }

    let mut order = blanks_a.clone();
    order.sort_by_key(|n| (hist_a[&colours_a[n]], colours_a[n]));
    let blank_triples_a: Vec<&Triple> = a.iter().filter(|t| has_blank(t)).collect();
    let target: HashSet<&Triple> = b.iter().filter(|t| has_blank(t)).collect();
    let mut search = Search {
        order: &order,
        colours_a: &colours_a,
        colours_b: &colours_b,
        candidates: &blanks_b,
        triples_a: &blank_triples_a,
        target: &target,
        mapping: HashMap::new(),
        used: HashSet::new(),
    };
    search.run(0)
}

fn has_blank(t: &Triple) -> bool {
    t.subject().is_blank() || t.object().is_blank()
}

fn refine(g: &Graph, blanks: &[BlankNode]) -> HashMap<BlankNode, u64> {
    let mut colours: HashMap<BlankNode, u64> = blanks.iter().map(|b| (b.clone(), 0)).collect();
    let mut classes = 1;
    for _ in 0..=blanks.len() {
        let mut next = HashMap::with_capacity(colours.len());
        for b in blanks {
            let mut sigs: Vec<(u8, String, String)> = Vec::new();
            for t in g.iter() {
                if t.subject().as_blank() == Some(b) {
                    sigs.push((0, t.predicate().to_string(), repr(t.object(), b, &colours)));
                }
                if t.object().as_blank() == Some(b) {
                    sigs.push((1, t.predicate().to_string(), repr(t.subject(), b, &colours)));
                }
            }
            sigs.sort();
            let mut h = DefaultHasher::new();
            colours[b].hash(&mut h);
            sigs.hash(&mut h);
            next.insert(b.clone(), h.finish());
        }
        let n = next.values().collect::<HashSet<_>>().len();
        colours = next;
        if n == classes {
            break;
        }
        classes = n;
    }
    colours
}

fn repr(t: &Term, me: &BlankNode, colours: &HashMap<BlankNode, u64>) -> String {
    match t {
        Term::Blank(o) if o == me => "self".to_string(),
        Term::Blank(o) => format!("_:{}", colours[o]),
        other => other.to_string(),
    }
}

struct Search<'a> {
    order: &'a [BlankNode],
    colours_a: &'a HashMap<BlankNode, u64>,
    colours_b: &'a HashMap<BlankNode, u64>,
    candidates: &'a [BlankNode],
    triples_a: &'a [&'a Triple],
    target: &'a HashSet<&'a Triple>,
    mapping: HashMap<BlankNode, BlankNode>,
    used: HashSet<BlankNode>,
}

impl Search<'_> {
    fn run(&mut self, i: usize) -> bool {
        if i == self.order.len() {
            return true;
        }
        let node = &self.order[i];
        for cand in self.candidates {
            if self.used.contains(cand) || self.colours_b[cand] != self.colours_a[node] {
                continue;
            }
            self.mapping.insert(node.clone(), cand.clone());
            self.used.insert(cand.clone());
            if self.consistent(node) && self.run(i + 1) {
                return true;
            }
            self.mapping.remove(node);
            self.used.remove(cand);
        }
        false
    }

    fn map(&self, t: &Term) -> Option<Term> {
        match t {
            Term::Blank(b) => self.mapping.get(b).cloned().map(Term::Blank),
            other => Some(other.clone()),
        }
    }

    /// Every triple touching `node` whose blanks are all mapped must exist in the target.
    fn consistent(&self, node: &BlankNode) -> bool {
        self.triples_a
            .iter()
            .filter(|t| t.subject().as_blank() == Some(node) || t.object().as_blank() == Some(node))
            .all(|t| match (self.map(t.subject()), self.map(t.object())) {
                (Some(s), Some(o)) => self.target.contains(&Triple::new(s, t.predicate().clone(), o)),
                _ => true,
            })
    }
}
