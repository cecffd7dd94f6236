//! Finite Kripke models: truth evaluation, frame-class recognition, JSON
//! and DOT export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Formula, ModalFormula};
use crate::pretree::PreTree;

/// A finite Kripke model on worlds `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KripkeModel {
    succ: Vec<BTreeSet<usize>>,
    valuation: BTreeMap<String, BTreeSet<usize>>,
}

impl KripkeModel {
    /// `n` worlds, no edges, every variable false.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("a model needs at least one world".into()));
        }
        Ok(KripkeModel {
            succ: vec![BTreeSet::new(); n],
            valuation: BTreeMap::new(),
        })
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = KripkeModel::new(n)?;
        for (a, b) in edges {
            m.add_edge(a, b)?;
        }
        Ok(m)
    }

    /// `n` mutually accessible worlds (the complete relation).
    pub fn cluster(n: usize) -> Result<Self> {
        KripkeModel::from_edges(n, (0..n).flat_map(|a| (0..n).map(move |b| (a, b))))
    }

    pub fn world_count(&self) -> usize {
        self.succ.len()
    }

    pub fn worlds(&self) -> std::ops::Range<usize> {
        0..self.succ.len()
    }

    fn check_world(&self, w: usize) -> Result<()> {
        if w < self.succ.len() {
            Ok(())
        } else {
            Err(Error::UnknownWorld(w))
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<()> {
        self.check_world(from)?;
        self.check_world(to)?;
        self.succ[from].insert(to);
        Ok(())
    }

    pub fn accessible(&self, from: usize, to: usize) -> bool {
        self.succ.get(from).is_some_and(|s| s.contains(&to))
    }

    pub fn successors(&self, w: usize) -> &BTreeSet<usize> {
        &self.succ[w]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    pub fn set_var(&mut self, var: &str, world: usize, value: bool) -> Result<()> {
        self.check_world(world)?;
        let set = self.valuation.entry(var.to_string()).or_default();
        if value {
            set.insert(world);
        } else {
            set.remove(&world);
        }
        Ok(())
    }

    /// Declares `var` (false everywhere unless already set).
    pub fn declare_var(&mut self, var: &str) {
        self.valuation.entry(var.to_string()).or_default();
    }

    pub fn valuation(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.valuation
    }

    pub fn var_true(&self, var: &str, world: usize) -> bool {
        self.valuation.get(var).is_some_and(|s| s.contains(&world))
    }

    /// Truth of `f` at `world`.
    pub fn eval(&self, world: usize, f: &ModalFormula) -> Result<bool> {
        self.check_world(world)?;
        Ok(self.truth_set(f)[world])
    }

    /// Truth value of `f` at every world.
    pub fn truth_set(&self, f: &ModalFormula) -> Vec<bool> {
        self.truth_set_with(f, &mut |v: &String, w| self.var_true(v, w))
    }

    /// Truth of `f` at every world, with atoms interpreted by `atom`.
    pub fn truth_set_with<A>(&self, f: &Formula<A>, atom: &mut impl FnMut(&A, usize) -> bool) -> Vec<bool> {
        let n = self.succ.len();
        match f {
            Formula::Atom(a) => (0..n).map(|w| atom(a, w)).collect(),
            Formula::Top => vec![true; n],
            Formula::Bottom => vec![false; n],
            Formula::Not(a) => self.truth_set_with(a, atom).into_iter().map(|b| !b).collect(),
            Formula::And(a, b) => zip(self.truth_set_with(a, atom), self.truth_set_with(b, atom), |x, y| {
                x && y
            }),
            Formula::Or(a, b) => zip(self.truth_set_with(a, atom), self.truth_set_with(b, atom), |x, y| {
                x || y
            }),
            Formula::Implies(a, b) => zip(self.truth_set_with(a, atom), self.truth_set_with(b, atom), |x, y| {
                !x || y
            }),
            Formula::Iff(a, b) => zip(self.truth_set_with(a, atom), self.truth_set_with(b, atom), |x, y| {
                x == y
            }),
            Formula::Diamond(a) => {
                let inner = self.truth_set_with(a, atom);
                self.succ.iter().map(|s| s.iter().any(|&u| inner[u])).collect()
            }
            Formula::Box(a) => {
                let inner = self.truth_set_with(a, atom);
                self.succ.iter().map(|s| s.iter().all(|&u| inner[u])).collect()
            }
        }
    }

    /// Reachability (reflexive-transitive closure) from every world.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.succ.len();
        let mut reach = vec![vec![false; n]; n];
        for (w, row) in reach.iter_mut().enumerate() {
            let mut stack = vec![w];
            row[w] = true;
            while let Some(x) = stack.pop() {
                for &y in &self.succ[x] {
                    if !row[y] {
                        row[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        reach
    }

    /// Submodel on `keep` (renumbered in the given order). Returns the model
    /// and the old-to-new world map.
    pub fn restrict(&self, keep: &[usize]) -> Result<(KripkeModel, BTreeMap<usize, usize>)> {
        let index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let mut m = KripkeModel::new(keep.len())?;
        for (&old, &new) in &index {
            self.check_world(old)?;
            for s in &self.succ[old] {
                if let Some(&t) = index.get(s) {
                    m.succ[new].insert(t);
                }
            }
        }
        for (v, set) in &self.valuation {
            m.valuation
                .insert(v.clone(), set.iter().filter_map(|w| index.get(w).copied()).collect());
        }
        Ok((m, index))
    }

    /// The submodel generated by `world` (everything reachable from it).
    pub fn generated(&self, world: usize) -> Result<(KripkeModel, BTreeMap<usize, usize>)> {
        self.check_world(world)?;
        let reach = self.reachability();
        let keep: Vec<usize> = (0..self.world_count()).filter(|&u| reach[world][u]).collect();
        self.restrict(&keep)
    }

    pub fn frame_class_of(&self) -> FrameClasses {
        let n = self.world_count();
        let acc = |a: usize, b: usize| self.succ[a].contains(&b);
        let reflexive = (0..n).all(|w| acc(w, w));
        let transitive = self.edges().all(|(a, b)| self.succ[b].iter().all(|&c| acc(a, c)));
        let symmetric = self.edges().all(|(a, b)| acc(b, a));
        let directed = (0..n).all(|u| (0..n).all(|v| (0..n).any(|z| acc(u, z) && acc(v, z))));
        let connected = (0..n).all(|u| (0..n).all(|v| acc(u, v) || acc(v, u)));
        let preorder = reflexive && transitive;
        FrameClasses {
            reflexive,
            transitive,
            directed,
            linear_preorder: preorder && connected,
            equivalence: preorder && symmetric,
            pretree: if preorder { PreTree::from_preorder(self) } else { None },
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph frame {\n  compound=true;\n  node [shape=circle];\n");
        let label = |w: usize| {
            let vars: Vec<&str> = self
                .valuation
                .iter()
                .filter(|(_, s)| s.contains(&w))
                .map(|(v, _)| v.as_str())
                .collect();
            format!("w{w}\\n{}", vars.join(","))
        };
        let classes = self.frame_class_of();
        if let Some(tree) = &classes.pretree {
            for (c, members) in tree.clusters().iter().enumerate() {
                let _ = writeln!(out, "  subgraph cluster_{c} {{\n    label=\"C{c}\"; style=rounded;");
                for &w in members {
                    let _ = writeln!(out, "    w{w} [label=\"{}\"];", label(w));
                }
                out.push_str("  }\n");
            }
            for c in 0..tree.cluster_count() {
                if let Some(p) = tree.parent(c) {
                    let a = tree.clusters()[p][0];
                    let b = tree.clusters()[c][0];
                    let _ = writeln!(out, "  w{a} -> w{b} [ltail=cluster_{p}, lhead=cluster_{c}];");
                }
            }
        } else {
            for w in self.worlds() {
                let _ = writeln!(out, "  w{w} [label=\"{}\"];", label(w));
            }
            for (a, b) in self.edges() {
                let _ = writeln!(out, "  w{a} -> w{b};");
            }
        }
        out.push_str("}\n");
        out
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Frame properties decided by definition. `directed` and `linear_preorder`
/// are global: every two worlds have a common successor / are comparable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameClasses {
    pub reflexive: bool,
    pub transitive: bool,
    pub directed: bool,
    pub linear_preorder: bool,
    pub equivalence: bool,
    pub pretree: Option<PreTree>,
}

impl FrameClasses {
    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        for (on, name) in [
            (self.reflexive, "reflexive"),
            (self.transitive, "transitive"),
            (self.directed, "directed"),
            (self.linear_preorder, "linear_preorder"),
            (self.equivalence, "equivalence"),
            (self.pretree.is_some(), "pretree"),
        ] {
            if on {
                v.push(name);
            }
        }
        v
    }
}

#[derive(Serialize, Deserialize)]
struct ModelWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<u32>,
    worlds: usize,
    access: Vec<[usize; 2]>,
    #[serde(default)]
    valuation: BTreeMap<String, Vec<usize>>,
}

impl Serialize for KripkeModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelWire {
            schema_version: None,
            worlds: self.world_count(),
            access: self.edges().map(|(a, b)| [a, b]).collect(),
            valuation: self
                .valuation
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().copied().collect()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KripkeModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = ModelWire::deserialize(d)?;
        let mut m =
            KripkeModel::from_edges(w.worlds, w.access.iter().map(|e| (e[0], e[1]))).map_err(D::Error::custom)?;
        for (var, ids) in w.valuation {
            if !crate::formula::is_variable_name(&var) {
                return Err(D::Error::custom(format!("bad variable name `{var}`")));
            }
            m.declare_var(&var);
            for id in ids {
                m.set_var(&var, id, true).map_err(D::Error::custom)?;
            }
        }
        Ok(m)
    }
}
