//! S4 tableau over negation normal form.
//!
//! A node holds a saturated, clash-free set of formulas (closed under `&`,
//! `[]a => a`, and one disjunct of each `|`). Each `<>a` in a node needs a
//! successor starting from `{a} ∪ boxes(node)`; when that set is already
//! contained in an ancestor's label (or the node's own), the successor is
//! that ancestor. The reflexive-transitive closure of the resulting edges is
//! a finite pre-tree refuting the input at the root.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;

use super::{Countermodel, OutOfWork, Raw};
use crate::formula::{Formula, ModalFormula};
use crate::kripke::KripkeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Lit(usize, bool),
    Top,
    Bottom,
    And(usize, usize),
    Or(usize, usize),
    Dia(usize),
    Box(usize),
}

struct Arena {
    nodes: Vec<Node>,
    ids: HashMap<Node, usize>,
    vars: Vec<String>,
}

impl Arena {
    fn intern(&mut self, n: Node) -> usize {
        if let Some(&i) = self.ids.get(&n) {
            return i;
        }
        self.nodes.push(n);
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn var(&self, name: &str) -> usize {
        self.vars
            .iter()
            .position(|v| v == name)
            .expect("variable collected up front")
    }

    /// Interns a formula already in negation normal form.
    fn add(&mut self, f: &ModalFormula) -> usize {
        let n = match f {
            Formula::Atom(v) => Node::Lit(self.var(v), true),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(v) => Node::Lit(self.var(v), false),
                _ => unreachable!("negation normal form"),
            },
            Formula::Top => Node::Top,
            Formula::Bottom => Node::Bottom,
            Formula::And(a, b) => Node::And(self.add(a), self.add(b)),
            Formula::Or(a, b) => Node::Or(self.add(a), self.add(b)),
            Formula::Diamond(a) => Node::Dia(self.add(a)),
            Formula::Box(a) => Node::Box(self.add(a)),
            Formula::Implies(..) | Formula::Iff(..) => unreachable!("negation normal form"),
        };
        self.intern(n)
    }
}

struct TNode {
    label: FixedBitSet,
    edges: Vec<usize>,
}

struct Tableau {
    arena: Arena,
    unsat: HashSet<FixedBitSet>,
    nodes: Vec<TNode>,
    work: u64,
    bound: u64,
}

impl Tableau {
    fn saturations(&self, start: FixedBitSet, out: &mut Vec<FixedBitSet>) {
        let mut s = start;
        loop {
            let mut grew = false;
            for i in s.ones().collect::<Vec<_>>() {
                match self.arena.nodes[i] {
                    Node::And(a, b) => {
                        grew |= !s.put(a);
                        grew |= !s.put(b);
                    }
                    Node::Box(a) => grew |= !s.put(a),
                    _ => {}
                }
            }
            if !grew {
                break;
            }
        }
        for i in s.ones() {
            match self.arena.nodes[i] {
                Node::Bottom => return,
                Node::Lit(v, true) => {
                    if let Some(&j) = self.arena.ids.get(&Node::Lit(v, false)) {
                        if s.contains(j) {
                            return;
                        }
                    }
                }
                _ => {}
            }
        }
        let open_or = s.ones().find_map(|i| match self.arena.nodes[i] {
            Node::Or(a, b) if !s.contains(a) && !s.contains(b) => Some((a, b)),
            _ => None,
        });
        match open_or {
            None => out.push(s),
            Some((a, b)) => {
                let mut left = s.clone();
                left.insert(a);
                self.saturations(left, out);
                let mut right = s;
                right.insert(b);
                self.saturations(right, out);
            }
        }
    }

    /// Builds an open subtree for `delta`, returning its root node.
    fn expand(&mut self, delta: FixedBitSet, path: &mut Vec<usize>) -> Result<Option<usize>, OutOfWork> {
        if self.unsat.contains(&delta) {
            return Ok(None);
        }
        let mut options = Vec::new();
        self.saturations(delta.clone(), &mut options);
        for s in options {
            self.work += 1;
            if self.work > self.bound {
                return Err(OutOfWork);
            }
            let id = self.nodes.len();
            let boxes: Vec<usize> = s
                .ones()
                .filter(|&i| matches!(self.arena.nodes[i], Node::Box(_)))
                .collect();
            let diamonds: Vec<usize> = s
                .ones()
                .filter_map(|i| match self.arena.nodes[i] {
                    Node::Dia(a) => Some(a),
                    _ => None,
                })
                .collect();
            self.nodes.push(TNode {
                label: s,
                edges: Vec::new(),
            });
            path.push(id);
            let mut open = true;
            for a in diamonds {
                let mut next = FixedBitSet::with_capacity(self.arena.nodes.len());
                next.insert(a);
                for &b in &boxes {
                    next.insert(b);
                }
                let target = match path.iter().find(|&&p| next.is_subset(&self.nodes[p].label)) {
                    Some(&anc) => Some(anc),
                    None => self.expand(next, path)?,
                };
                match target {
                    Some(t) => self.nodes[id].edges.push(t),
                    None => {
                        open = false;
                        break;
                    }
                }
            }
            path.pop();
            if open {
                return Ok(Some(id));
            }
            self.nodes.truncate(id);
        }
        self.unsat.insert(delta);
        Ok(None)
    }
}

/// Searches for a pre-tree model of `~f`.
pub(crate) fn refute(f: &ModalFormula, bound: u64, work: &mut u64) -> Result<Raw, OutOfWork> {
    let vars: Vec<String> = f.atoms().into_iter().cloned().collect();
    let mut arena = Arena {
        nodes: Vec::new(),
        ids: HashMap::new(),
        vars,
    };
    let root = arena.add(&Formula::not(f.clone()).to_nnf());
    let size = arena.nodes.len();
    let mut t = Tableau {
        arena,
        unsat: HashSet::new(),
        nodes: Vec::new(),
        work: 0,
        bound,
    };
    let mut start = FixedBitSet::with_capacity(size);
    start.insert(root);
    let result = t.expand(start, &mut Vec::new());
    *work += t.work;
    if result?.is_none() {
        return Ok(Raw::Member);
    }
    let n = t.nodes.len();
    let edges = t
        .nodes
        .iter()
        .enumerate()
        .flat_map(|(i, node)| node.edges.iter().map(move |&j| (i, j)));
    let base = KripkeModel::from_edges(n, edges).expect("edges within range");
    let reach = base.reachability();
    let closure = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| reach[i][j]);
    let mut model = KripkeModel::from_edges(n, closure).expect("edges within range");
    for (vi, v) in t.arena.vars.iter().enumerate() {
        model.declare_var(v);
        if let Some(&lit) = t.arena.ids.get(&Node::Lit(vi, true)) {
            for (w, node) in t.nodes.iter().enumerate() {
                if node.label.contains(lit) {
                    model.set_var(v, w, true).expect("world in range");
                }
            }
        }
    }
    Ok(Raw::Refuted(Countermodel { model, world: 0 }))
}
