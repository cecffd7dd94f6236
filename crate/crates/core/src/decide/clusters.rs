//! Exact refutation search over finite frames built from clusters.
//!
//! Every world of a cluster sees the same worlds, so all of them agree on
//! each modal subformula `<>a` / `[]a`. That vector of truth values is the
//! cluster's *context*. Given its context, each world's truth is fixed by
//! its valuation. A cluster with context `c` can sit below clusters whose
//! joined context is `x` when some set of valuations realizes `c` together
//! with `x`; the conditions are per bit, so the admissible `x` for a given
//! `c` form a pattern of must-be-0 / must-be-1 bits.
//!
//! * [`Shape::Cluster`]: one cluster (equivalence frames, S5).
//! * [`Shape::Chain`]: a chain of clusters (linear preorders, S4.3).
//! * [`Shape::TreeWithTop`]: a tree of clusters all seeing a final cluster
//!   (finite directed preorders, S4.2).
//! * [`Shape::Tree`]: a tree of clusters (finite preorders, S4).

use std::collections::BTreeMap;

use super::{Countermodel, OutOfWork, Raw};
use crate::formula::{Formula, ModalFormula};
use crate::kripke::KripkeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Cluster,
    Chain,
    TreeWithTop,
    Tree,
}

/// What a context allows, computed once per context.
struct CtxInfo {
    /// Valuations consistent with the context's own modal bits.
    allowed: Vec<u32>,
    /// Per modal subformula: an allowed valuation making the cluster itself
    /// responsible for the bit (a witness for `<>a` true, or for `[]a` false).
    witness: Vec<Option<u32>>,
    /// An allowed valuation refuting the input formula.
    refuter: Option<u32>,
    must_zero: u64,
    must_one: u64,
}

struct Problem<'a> {
    vars: Vec<String>,
    subs: Vec<&'a ModalFormula>,
    /// Per subformula: indices of its children in `subs`, or of the
    /// variable for an atom.
    kids: Vec<Vec<usize>>,
    /// For each subformula, its modal index if it is `<>a` or `[]a`.
    modal_of: Vec<Option<usize>>,
    /// Per modal: (is diamond, index of its argument in `subs`).
    modals: Vec<(bool, usize)>,
    diamonds: u64,
}

impl<'a> Problem<'a> {
    fn new(f: &'a ModalFormula) -> Self {
        let vars: Vec<String> = f.atoms().into_iter().cloned().collect();
        let subs = f.subformulas();
        let index = |g: &ModalFormula| subs.iter().position(|s| *s == g).expect("subformula");
        let kids = subs
            .iter()
            .map(|s| match s {
                Formula::Atom(a) => vec![vars.iter().position(|x| x == a).expect("var")],
                _ => s.children().into_iter().map(index).collect(),
            })
            .collect();
        let mut modal_of = vec![None; subs.len()];
        let mut modals = Vec::new();
        let mut diamonds = 0u64;
        for (i, s) in subs.iter().enumerate() {
            let entry = match s {
                Formula::Diamond(a) => Some((true, index(a))),
                Formula::Box(a) => Some((false, index(a))),
                _ => None,
            };
            if let Some(e) = entry {
                if e.0 {
                    diamonds |= 1 << modals.len().min(63);
                }
                modal_of[i] = Some(modals.len());
                modals.push(e);
            }
        }
        Problem {
            vars,
            subs,
            kids,
            modal_of,
            modals,
            diamonds,
        }
    }

    /// The context with nothing above: every `<>` false, every `[]` true.
    fn identity(&self) -> u64 {
        self.full() & !self.diamonds
    }

    fn full(&self) -> u64 {
        if self.modals.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.modals.len()) - 1
        }
    }

    fn join(&self, x: u64, y: u64) -> u64 {
        ((x | y) & self.diamonds) | (x & y & !self.diamonds)
    }

    /// Truth of every subformula at a world with valuation `v` in a cluster
    /// with context `c`.
    fn truth(&self, v: u32, c: u64, out: &mut Vec<bool>) {
        out.clear();
        for (i, s) in self.subs.iter().enumerate() {
            let k = &self.kids[i];
            let b = match s {
                Formula::Atom(_) => v >> k[0] & 1 == 1,
                Formula::Top => true,
                Formula::Bottom => false,
                Formula::Not(_) => !out[k[0]],
                Formula::And(..) => out[k[0]] && out[k[1]],
                Formula::Or(..) => out[k[0]] || out[k[1]],
                Formula::Implies(..) => !out[k[0]] || out[k[1]],
                Formula::Iff(..) => out[k[0]] == out[k[1]],
                Formula::Diamond(_) | Formula::Box(_) => c >> self.modal_of[i].expect("modal") & 1 == 1,
            };
            out.push(b);
        }
    }

    fn info(&self, c: u64) -> CtxInfo {
        let m = self.modals.len();
        let mut allowed = Vec::new();
        let mut witness = vec![None; m];
        let mut refuter = None;
        let mut t = Vec::with_capacity(self.subs.len());
        for v in 0..(1u32 << self.vars.len()) {
            self.truth(v, c, &mut t);
            let ok = self.modals.iter().enumerate().all(|(i, &(dia, arg))| {
                let bit = c >> i & 1 == 1;
                if dia {
                    bit || !t[arg]
                } else {
                    !bit || t[arg]
                }
            });
            if !ok {
                continue;
            }
            allowed.push(v);
            for (i, &(dia, arg)) in self.modals.iter().enumerate() {
                let bit = c >> i & 1 == 1;
                let responsible = if dia { bit && t[arg] } else { !bit && !t[arg] };
                if responsible && witness[i].is_none() {
                    witness[i] = Some(v);
                }
            }
            if refuter.is_none() && !t[self.subs.len() - 1] {
                refuter = Some(v);
            }
        }
        let mut must_zero = 0;
        let mut must_one = 0;
        for (i, &(dia, _)) in self.modals.iter().enumerate() {
            let bit = c >> i & 1 == 1;
            match (dia, bit, witness[i].is_some()) {
                (true, false, _) => must_zero |= 1 << i,
                (true, true, false) => must_one |= 1 << i,
                (false, true, _) => must_one |= 1 << i,
                (false, false, false) => must_zero |= 1 << i,
                _ => {}
            }
        }
        CtxInfo {
            allowed,
            witness,
            refuter,
            must_zero,
            must_one,
        }
    }

    /// Valuations of a cluster with context `c` below joined context `x`.
    fn cluster_valuations(&self, info: &CtxInfo, c: u64, x: u64, root: bool) -> Vec<u32> {
        let mut vals = Vec::new();
        if root {
            vals.push(info.refuter.expect("refuting valuation"));
        }
        for (i, &(dia, _)) in self.modals.iter().enumerate() {
            let needs = if dia {
                c >> i & 1 == 1 && x >> i & 1 == 0
            } else {
                c >> i & 1 == 0 && x >> i & 1 == 1
            };
            if needs {
                vals.push(info.witness[i].expect("witness"));
            }
        }
        if vals.is_empty() {
            vals.push(info.allowed[0]);
        }
        // the refuting valuation stays first
        let mut seen = Vec::new();
        vals.retain(|v| {
            let fresh = !seen.contains(v);
            seen.push(*v);
            fresh
        });
        vals
    }
}

fn admits(info: &CtxInfo, x: u64) -> bool {
    !info.allowed.is_empty() && x & info.must_zero == 0 && x & info.must_one == info.must_one
}

/// A cluster tree under construction: valuations and parent per cluster;
/// `top` clusters are seen by every other cluster.
struct Layout {
    clusters: Vec<(Vec<u32>, Option<usize>)>,
    top: Option<usize>,
}

impl Layout {
    fn into_model(self, p: &Problem) -> KripkeModel {
        let mut first = Vec::new();
        let mut n = 0;
        for (vals, _) in &self.clusters {
            first.push(n);
            n += vals.len();
        }
        let k = self.clusters.len();
        let ancestor_or_self = |a: usize, mut b: usize| loop {
            if a == b {
                return true;
            }
            match self.clusters[b].1 {
                Some(q) => b = q,
                None => return false,
            }
        };
        let mut edges = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if ancestor_or_self(a, b) || Some(b) == self.top {
                    for i in 0..self.clusters[a].0.len() {
                        for j in 0..self.clusters[b].0.len() {
                            edges.push((first[a] + i, first[b] + j));
                        }
                    }
                }
            }
        }
        let mut model = KripkeModel::from_edges(n, edges).expect("edges within range");
        for (vi, var) in p.vars.iter().enumerate() {
            model.declare_var(var);
            for (c, (vals, _)) in self.clusters.iter().enumerate() {
                for (i, v) in vals.iter().enumerate() {
                    if v >> vi & 1 == 1 {
                        model.set_var(var, first[c] + i, true).expect("world in range");
                    }
                }
            }
        }
        model
    }
}

struct Budget<'w> {
    work: &'w mut u64,
    bound: u64,
}

impl Budget<'_> {
    fn spend(&mut self, units: u64) -> Result<(), OutOfWork> {
        *self.work = self.work.saturating_add(units);
        if *self.work > self.bound {
            Err(OutOfWork)
        } else {
            Ok(())
        }
    }
}

pub(crate) fn refute(f: &ModalFormula, shape: Shape, bound: u64, work: &mut u64) -> Result<Raw, OutOfWork> {
    let p = Problem::new(f);
    let mut budget = Budget { work, bound };
    let m = p.modals.len();
    let n = p.vars.len();
    if m >= 63 || n >= 31 {
        budget.spend(u64::MAX)?;
    }
    budget.spend((1u64 << m).saturating_mul(1 << n))?;
    let infos: Vec<CtxInfo> = (0..1u64 << m).map(|c| p.info(c)).collect();
    let id = p.identity();
    match shape {
        Shape::Cluster => Ok(single_cluster(&p, &infos, id)),
        Shape::Chain => chain(&p, &infos, id, &mut budget),
        Shape::Tree => tree(&p, &infos, id, None, &mut budget),
        Shape::TreeWithTop => {
            for t in 0..infos.len() as u64 {
                if admits(&infos[t as usize], id) {
                    if let Raw::Refuted(cm) = tree(&p, &infos, t, Some(t), &mut budget)? {
                        return Ok(Raw::Refuted(cm));
                    }
                }
            }
            Ok(Raw::Member)
        }
    }
}

fn single_cluster(p: &Problem, infos: &[CtxInfo], id: u64) -> Raw {
    for (c, info) in infos.iter().enumerate() {
        if info.refuter.is_some() && admits(info, id) {
            let vals = p.cluster_valuations(info, c as u64, id, true);
            let model = Layout {
                clusters: vec![(vals, None)],
                top: None,
            }
            .into_model(p);
            return Raw::Refuted(Countermodel { model, world: 0 });
        }
    }
    Raw::Member
}

fn chain(p: &Problem, infos: &[CtxInfo], id: u64, budget: &mut Budget) -> Result<Raw, OutOfWork> {
    // reached context -> context of the cluster directly above (None: top)
    let mut above: BTreeMap<u64, Option<u64>> = BTreeMap::new();
    let mut frontier = vec![None::<u64>];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in frontier {
            budget.spend(infos.len() as u64)?;
            for (c, info) in infos.iter().enumerate() {
                let c = c as u64;
                if !above.contains_key(&c) && admits(info, x.unwrap_or(id)) {
                    above.insert(c, x);
                    next.push(Some(c));
                }
            }
        }
        frontier = next;
    }
    let Some(&root) = above.keys().find(|&&c| infos[c as usize].refuter.is_some()) else {
        return Ok(Raw::Member);
    };
    let mut clusters = Vec::new();
    let mut cur = Some(root);
    while let Some(c) = cur {
        let x = above[&c];
        let vals = p.cluster_valuations(&infos[c as usize], c, x.unwrap_or(id), clusters.is_empty());
        let parent = clusters.len().checked_sub(1);
        clusters.push((vals, parent));
        cur = x;
    }
    let model = Layout { clusters, top: None }.into_model(p);
    Ok(Raw::Refuted(Countermodel { model, world: 0 }))
}

/// How a joined context was obtained.
#[derive(Clone, Copy)]
enum Joined {
    Base,
    Join(u64, u64),
}

/// Tree of clusters above which sits `base` (the identity, or the context
/// of a final cluster `top`).
fn tree(p: &Problem, infos: &[CtxInfo], base: u64, top: Option<u64>, budget: &mut Budget) -> Result<Raw, OutOfWork> {
    let mut joined: BTreeMap<u64, Joined> = BTreeMap::from([(base, Joined::Base)]);
    let mut reached: BTreeMap<u64, u64> = BTreeMap::new();
    loop {
        budget.spend((joined.len() * infos.len()) as u64)?;
        let mut fresh = Vec::new();
        for (c, info) in infos.iter().enumerate() {
            let c = c as u64;
            if reached.contains_key(&c) {
                continue;
            }
            if let Some((&x, _)) = joined.iter().find(|(&x, _)| admits(info, x)) {
                reached.insert(c, x);
                fresh.push(c);
            }
        }
        if fresh.is_empty() {
            break;
        }
        if fresh.iter().any(|&c| infos[c as usize].refuter.is_some()) {
            break;
        }
        let mut queue: Vec<u64> = joined.keys().copied().collect();
        while let Some(x) = queue.pop() {
            for &c in reached.keys() {
                let y = p.join(x, c);
                if let std::collections::btree_map::Entry::Vacant(e) = joined.entry(y) {
                    e.insert(Joined::Join(x, c));
                    queue.push(y);
                }
            }
            budget.spend(reached.len() as u64)?;
        }
    }
    let Some(&root) = reached.keys().find(|&&c| infos[c as usize].refuter.is_some()) else {
        return Ok(Raw::Member);
    };
    let mut layout = Layout {
        clusters: Vec::new(),
        top: None,
    };
    let mut pending = vec![(root, None::<usize>)];
    while let Some((c, parent)) = pending.pop() {
        let x = reached[&c];
        let vals = p.cluster_valuations(&infos[c as usize], c, x, parent.is_none());
        layout.clusters.push((vals, parent));
        let me = layout.clusters.len() - 1;
        let mut y = x;
        while let Joined::Join(prev, child) = joined[&y] {
            pending.push((child, Some(me)));
            y = prev;
        }
    }
    if let Some(t) = top {
        let vals = p.cluster_valuations(&infos[t as usize], t, p.identity(), false);
        layout.clusters.push((vals, Some(0)));
        layout.top = Some(layout.clusters.len() - 1);
    }
    let model = layout.into_model(p);
    Ok(Raw::Refuted(Countermodel { model, world: 0 }))
}
