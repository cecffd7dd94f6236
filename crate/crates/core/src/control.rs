//! Control statements: switches, independent switches, dials, buttons,
//! railway switches and railyard labelings, verified over any [`System`].
//!
//! A failing report carries a [`Violation`]: a world and a condition that
//! ought to hold there but does not. [`ControlReport::recheck`] evaluates the
//! condition again, so every failure is self-certifying.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::pretree::PreTree;
use crate::system::System;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Switch,
    IndependentSwitches,
    Dial,
    Button,
    RailwaySwitch,
    Railyard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<W, A> {
    pub world: W,
    /// Required at `world`, yet false there.
    pub condition: Formula<A>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlReport<W, A> {
    pub kind: ControlKind,
    pub pass: bool,
    pub violation: Option<Violation<W, A>>,
    /// Buttons only: whether the button is pushed at each checked world.
    pub pushed: Vec<(W, bool)>,
    pub worlds_checked: usize,
}

impl<W: Clone, A: Clone> ControlReport<W, A> {
    fn passed(kind: ControlKind, worlds_checked: usize) -> Self {
        ControlReport {
            kind,
            pass: true,
            violation: None,
            pushed: Vec::new(),
            worlds_checked,
        }
    }

    fn failed(kind: ControlKind, world: W, condition: Formula<A>, reason: String) -> Self {
        ControlReport {
            kind,
            pass: false,
            violation: Some(Violation {
                world,
                condition,
                reason,
            }),
            pushed: Vec::new(),
            worlds_checked: 0,
        }
    }

    /// True when the report is consistent with the system: a failure's
    /// condition is indeed false at its world.
    pub fn recheck<S>(&self, sys: &S) -> Result<bool>
    where
        S: System<World = W, Atom = A>,
    {
        match &self.violation {
            None => Ok(self.pass),
            Some(v) => Ok(!self.pass && !sys.holds(&v.world, &v.condition)?),
        }
    }
}

/// A control family as stored in JSON:
/// `{"kind": "dial", "statements": [...], "tree": {...}}` (tree for railyards).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "Formula<A>: Serialize", deserialize = "Formula<A>: Deserialize<'de>"))]
pub struct ControlFamily<A> {
    pub kind: ControlKind,
    pub statements: Vec<Formula<A>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<PreTree>,
}

/// Runs the verifier named by `family.kind`; `base` is the base world for
/// railyards.
pub fn verify_family<S: System>(
    sys: &S,
    family: &ControlFamily<S::Atom>,
    base: &S::World,
) -> Result<ControlReport<S::World, S::Atom>> {
    let single = || match family.statements.as_slice() {
        [s] => Ok(s),
        other => Err(Error::Precondition(format!(
            "{:?} takes exactly one statement, got {}",
            family.kind,
            other.len()
        ))),
    };
    match family.kind {
        ControlKind::Switch => is_switch(sys, single()?),
        ControlKind::IndependentSwitches => are_independent_switches(sys, &family.statements),
        ControlKind::Dial => is_dial(sys, &family.statements),
        ControlKind::Button => is_button(sys, single()?),
        ControlKind::RailwaySwitch => is_railway_switch(sys, single()?),
        ControlKind::Railyard => {
            let tree = family
                .tree
                .as_ref()
                .ok_or_else(|| Error::Precondition("railyard family needs a tree".into()))?;
            is_railyard_labeling(sys, tree, &family.statements, base)
        }
    }
}

pub fn is_switch<S: System>(sys: &S, s: &Formula<S::Atom>) -> Result<ControlReport<S::World, S::Atom>> {
    let worlds = sys.worlds();
    for w in &worlds {
        for cond in [Formula::diamond(s.clone()), Formula::diamond(Formula::not(s.clone()))] {
            if !sys.holds(w, &cond)? {
                let reason = format!("{cond} fails");
                return Ok(ControlReport::failed(ControlKind::Switch, w.clone(), cond, reason));
            }
        }
    }
    Ok(ControlReport::passed(ControlKind::Switch, worlds.len()))
}

/// The conjunction saying the family shows on/off pattern `bits` (bit `i`
/// of `bits` for statement `i`).
pub fn pattern<A: Clone>(family: &[Formula<A>], bits: u64) -> Formula<A> {
    Formula::conjunction(family.iter().enumerate().map(|(i, s)| {
        if bits >> i & 1 == 1 {
            s.clone()
        } else {
            Formula::not(s.clone())
        }
    }))
}

pub fn are_independent_switches<S: System>(
    sys: &S,
    family: &[Formula<S::Atom>],
) -> Result<ControlReport<S::World, S::Atom>> {
    if family.len() >= 32 {
        return Err(Error::Bounds(format!(
            "{} switches is too many patterns to check",
            family.len()
        )));
    }
    let worlds = sys.worlds();
    for w in &worlds {
        for bits in 0..1u64 << family.len() {
            let cond = Formula::diamond(pattern(family, bits));
            if !sys.holds(w, &cond)? {
                let reason = format!("pattern {bits:0width$b} unreachable", width = family.len().max(1));
                return Ok(ControlReport::failed(
                    ControlKind::IndependentSwitches,
                    w.clone(),
                    cond,
                    reason,
                ));
            }
        }
    }
    Ok(ControlReport::passed(ControlKind::IndependentSwitches, worlds.len()))
}

/// Exactly one of `family` holds.
pub fn exactly_one<A: Clone>(family: &[Formula<A>]) -> Formula<A> {
    Formula::disjunction((0..family.len()).map(|i| {
        Formula::conjunction(family.iter().enumerate().map(
            |(j, s)| {
                if i == j {
                    s.clone()
                } else {
                    Formula::not(s.clone())
                }
            },
        ))
    }))
}

fn check_exactly_one<S: System>(
    sys: &S,
    kind: ControlKind,
    w: &S::World,
    family: &[Formula<S::Atom>],
) -> Result<Option<ControlReport<S::World, S::Atom>>> {
    let mut on = Vec::new();
    for (i, s) in family.iter().enumerate() {
        if sys.holds(w, s)? {
            on.push(i);
        }
    }
    if on.len() == 1 {
        return Ok(None);
    }
    let reason = format!("statements {on:?} hold, expected exactly one");
    Ok(Some(ControlReport::failed(
        kind,
        w.clone(),
        exactly_one(family),
        reason,
    )))
}

pub fn is_dial<S: System>(sys: &S, family: &[Formula<S::Atom>]) -> Result<ControlReport<S::World, S::Atom>> {
    if family.is_empty() {
        return Err(Error::Precondition("a dial needs at least one statement".into()));
    }
    let worlds = sys.worlds();
    for w in &worlds {
        if let Some(r) = check_exactly_one(sys, ControlKind::Dial, w, family)? {
            return Ok(r);
        }
        for (i, d) in family.iter().enumerate() {
            let cond = Formula::diamond(d.clone());
            if !sys.holds(w, &cond)? {
                let reason = format!("dial value {i} unreachable");
                return Ok(ControlReport::failed(ControlKind::Dial, w.clone(), cond, reason));
            }
        }
    }
    Ok(ControlReport::passed(ControlKind::Dial, worlds.len()))
}

/// Dial of `2^m` statements: value `t` says each switch matches bit `i` of `t`.
pub fn switches_to_dial<A: Clone>(family: &[Formula<A>]) -> Vec<Formula<A>> {
    (0..1u64 << family.len()).map(|t| pattern(family, t)).collect()
}

/// Switch `i` says the active dial value has bit `i` set.
pub fn dial_to_switches<A: Clone>(dial: &[Formula<A>]) -> Result<Vec<Formula<A>>> {
    if !dial.len().is_power_of_two() {
        return Err(Error::Precondition(format!(
            "dial length {} is not a power of two",
            dial.len()
        )));
    }
    let m = dial.len().trailing_zeros() as usize;
    Ok((0..m)
        .map(|i| {
            Formula::disjunction(
                dial.iter()
                    .enumerate()
                    .filter(|(t, _)| t >> i & 1 == 1)
                    .map(|(_, d)| d.clone()),
            )
        })
        .collect())
}

pub fn is_button<S: System>(sys: &S, s: &Formula<S::Atom>) -> Result<ControlReport<S::World, S::Atom>> {
    let worlds = sys.worlds();
    let mut pushed = Vec::new();
    let cond = Formula::diamond(Formula::boxed(s.clone()));
    for w in &worlds {
        if !sys.holds(w, &cond)? {
            let reason = format!("{cond} fails");
            return Ok(ControlReport::failed(ControlKind::Button, w.clone(), cond, reason));
        }
        pushed.push((w.clone(), sys.necessary(w, s)?));
    }
    let mut report = ControlReport::passed(ControlKind::Button, worlds.len());
    report.pushed = pushed;
    Ok(report)
}

pub fn is_railway_switch<S: System>(sys: &S, s: &Formula<S::Atom>) -> Result<ControlReport<S::World, S::Atom>> {
    let not_s = Formula::not(s.clone());
    let cond = Formula::disjunction([
        Formula::boxed(s.clone()),
        Formula::boxed(not_s.clone()),
        Formula::and(
            Formula::diamond(Formula::boxed(s.clone())),
            Formula::diamond(Formula::boxed(not_s)),
        ),
    ]);
    let worlds = sys.worlds();
    for w in &worlds {
        if !sys.holds(w, &cond)? {
            let reason = "neither fixed nor able to go both ways".to_string();
            return Ok(ControlReport::failed(
                ControlKind::RailwaySwitch,
                w.clone(),
                cond,
                reason,
            ));
        }
    }
    Ok(ControlReport::passed(ControlKind::RailwaySwitch, worlds.len()))
}

/// Checks a labeling of the worlds (nodes) of `tree` by statements: exactly
/// one label holds at every checked world, `base` satisfies a label of the
/// root cluster, and at a world labeled `t`, `<>r_s` holds iff `t <= s`.
pub fn is_railyard_labeling<S: System>(
    sys: &S,
    tree: &PreTree,
    labeling: &[Formula<S::Atom>],
    base: &S::World,
) -> Result<ControlReport<S::World, S::Atom>> {
    if labeling.len() != tree.world_count() {
        return Err(Error::Precondition(format!(
            "labeling has {} statements for a tree with {} nodes",
            labeling.len(),
            tree.world_count()
        )));
    }
    let kind = ControlKind::Railyard;
    let initial = Formula::disjunction(tree.root_cluster().iter().map(|&t| labeling[t].clone()));
    if !sys.holds(base, &initial)? {
        let reason = "base world satisfies no label of the root cluster".to_string();
        return Ok(ControlReport::failed(kind, base.clone(), initial, reason));
    }
    let worlds = sys.worlds();
    for w in &worlds {
        if let Some(r) = check_exactly_one(sys, kind, w, labeling)? {
            return Ok(r);
        }
        let mut here = 0;
        for (t, r) in labeling.iter().enumerate() {
            if sys.holds(w, r)? {
                here = t;
            }
        }
        for (s, r) in labeling.iter().enumerate() {
            let poss = Formula::diamond(r.clone());
            let expected = tree.leq(here, s);
            if sys.holds(w, &poss)? != expected {
                let (cond, reason) = if expected {
                    (poss, format!("at node {here}, node {s} should be reachable"))
                } else {
                    (
                        Formula::not(poss),
                        format!("at node {here}, node {s} should be unreachable"),
                    )
                };
                return Ok(ControlReport::failed(kind, w.clone(), cond, reason));
            }
        }
    }
    Ok(ControlReport::passed(kind, worlds.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, ModalFormula};
    use crate::kripke::KripkeModel;

    fn f(s: &str) -> ModalFormula {
        parse(s).unwrap()
    }

    fn cluster_with(n: usize, vars: &[(&str, &[usize])]) -> KripkeModel {
        let mut m = KripkeModel::cluster(n).unwrap();
        for (v, ws) in vars {
            m.declare_var(v);
            for &w in *ws {
                m.set_var(v, w, true).unwrap();
            }
        }
        m
    }

    fn assert_self_certifying<W: Clone, A: Clone>(sys: &impl System<World = W, Atom = A>, r: &ControlReport<W, A>) {
        assert!(r.recheck(sys).unwrap());
    }

    #[test]
    fn switch_examples() {
        let m = cluster_with(2, &[("s", &[0])]);
        let r = is_switch(&m, &f("s")).unwrap();
        assert!(r.pass);
        let r = is_switch(&m, &f("T")).unwrap();
        assert!(!r.pass);
        assert_self_certifying(&m, &r);
        assert!(is_switch(&m, &f("q")).is_err());
    }

    #[test]
    fn independence_examples() {
        let m = cluster_with(4, &[("p", &[1, 3]), ("q", &[2, 3])]);
        assert!(are_independent_switches(&m, &[f("p"), f("q")]).unwrap().pass);
        let r = are_independent_switches(&m, &[f("p"), f("p")]).unwrap();
        assert!(!r.pass);
        assert_self_certifying(&m, &r);
    }

    #[test]
    fn dial_examples() {
        let m = cluster_with(2, &[("p", &[0]), ("q", &[0])]);
        assert!(is_dial(&m, &[f("T")]).unwrap().pass);
        assert!(is_dial(&m, &[f("p"), f("~p")]).unwrap().pass);
        let r = is_dial(&m, &[f("p"), f("q")]).unwrap();
        assert!(!r.pass);
        assert_eq!(r.violation.as_ref().unwrap().world, 0);
        assert_self_certifying(&m, &r);
        assert!(is_dial(&m, &[]).is_err());
    }

    #[test]
    fn dial_switch_conversions() {
        assert_eq!(switches_to_dial(&[f("s")]), vec![f("~s"), f("s")]);
        let two = switches_to_dial(&[f("a"), f("b")]);
        assert_eq!(two, vec![f("~a & ~b"), f("a & ~b"), f("~a & b"), f("a & b")]);
        let m = cluster_with(4, &[("a", &[1, 3]), ("b", &[2, 3])]);
        let back = dial_to_switches(&two).unwrap();
        for w in 0..4 {
            for (x, y) in back.iter().zip([f("a"), f("b")]) {
                assert_eq!(m.eval(w, x).unwrap(), m.eval(w, &y).unwrap());
            }
        }
        assert!(is_dial(&m, &two).unwrap().pass);
        assert!(are_independent_switches(&m, &back).unwrap().pass);
        assert!(dial_to_switches(&[f("a"), f("b"), f("T")]).is_err());
        assert_eq!(dial_to_switches(&[f("T")]).unwrap(), vec![]);
    }

    #[test]
    fn button_and_railway_examples() {
        let mut chain = KripkeModel::from_edges(2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        chain.set_var("b", 1, true).unwrap();
        let r = is_button(&chain, &f("b")).unwrap();
        assert!(r.pass);
        assert_eq!(r.pushed, vec![(0, false), (1, true)]);
        let r = is_button(&chain, &f("T")).unwrap();
        assert!(r.pushed.iter().all(|&(_, p)| p));
        let r = is_button(&chain, &f("~b")).unwrap();
        assert!(!r.pass);
        assert_self_certifying(&chain, &r);
        // root sees two leaves, one with r and one without
        let mut fork = KripkeModel::from_edges(3, [(0, 0), (0, 1), (0, 2), (1, 1), (2, 2)]).unwrap();
        fork.set_var("r", 1, true).unwrap();
        assert!(is_railway_switch(&fork, &f("r")).unwrap().pass);
        let c = cluster_with(2, &[("r", &[0])]);
        let r = is_railway_switch(&c, &f("r")).unwrap();
        assert!(!r.pass);
        assert_self_certifying(&c, &r);
    }

    #[test]
    fn railyard_examples() {
        let one = PreTree::complete(1, 0, 1).unwrap();
        let c = cluster_with(1, &[]);
        assert!(is_railyard_labeling(&c, &one, &[f("T")], &0).unwrap().pass);

        let chain_tree = PreTree::new(vec![vec![0], vec![1]], vec![None, Some(0)]).unwrap();
        let mut chain = KripkeModel::from_edges(2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        chain.set_var("b", 1, true).unwrap();
        let labels = [f("~b"), f("b")];
        let r = is_railyard_labeling(&chain, &chain_tree, &labels, &0).unwrap();
        assert!(r.pass);
        for s in 0..2 {
            assert!(chain.find_accessible(&0, &labels[s]).unwrap().is_some());
        }
        let r = is_railyard_labeling(&chain, &chain_tree, &labels, &1).unwrap();
        assert!(!r.pass);
        assert_self_certifying(&chain, &r);
        let swapped = [f("b"), f("~b")];
        let r = is_railyard_labeling(&chain, &chain_tree, &swapped, &1).unwrap();
        assert!(!r.pass);
        assert_self_certifying(&chain, &r);
        assert!(is_railyard_labeling(&chain, &chain_tree, &labels[..1], &0).is_err());
    }

    #[test]
    fn families_load_from_json() {
        let fam: ControlFamily<String> =
            serde_json::from_str(r#"{"kind":"independent_switches","statements":["p", {"op":"var","var":"q"}]}"#)
                .unwrap();
        assert_eq!(fam.statements, vec![f("p"), f("q")]);
        let m = cluster_with(4, &[("p", &[1, 3]), ("q", &[2, 3])]);
        assert!(verify_family(&m, &fam, &0).unwrap().pass);
        let bad: ControlFamily<String> = serde_json::from_str(r#"{"kind":"switch","statements":["p","q"]}"#).unwrap();
        assert!(verify_family(&m, &bad, &0).is_err());
    }
}
