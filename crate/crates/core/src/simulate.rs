//! Replaying propositional countermodels inside a potentialist system.
//!
//! Given a formula outside S5 (or S4), a finite countermodel `M` and control
//! statements marking which world of `M` the system is "at", each variable
//! `p` is replaced by the disjunction of the markers of the worlds where `p`
//! holds. Truth of every subformula at a system world then matches truth at
//! its marked world of `M`, and the base world refutes the instance.

use std::collections::BTreeMap;
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::control::{are_independent_switches, is_railyard_labeling, switches_to_dial};
use crate::decide::{decide, s4_pretree_countermodel, s5_cluster_countermodel, Countermodel, TheoryId, Verdict};
use crate::error::{Error, Result};
use crate::formula::{Formula, ModalFormula};
use crate::kripke::KripkeModel;
use crate::pretree::{PreTree, PreTreeModel};
use crate::sequence::{railyard_encoding, Seq, SeqAtom, SequenceSystem, Window};
use crate::system::System;

#[derive(Debug, Clone, PartialEq)]
pub enum SimVerdict<W> {
    /// The formula is in the theory; nothing to simulate.
    Member(TheoryId),
    Pass,
    /// A subformula whose truth differs between a system world and its node.
    Mismatch {
        world: W,
        node: usize,
        subformula: ModalFormula,
        system: bool,
        model: bool,
    },
    /// Every subformula matched but the base world does not refute.
    BaseNotRefuting,
}

#[derive(Debug, Clone)]
pub struct SimulationReport<W, A> {
    pub formula: ModalFormula,
    pub verdict: SimVerdict<W>,
    /// The countermodel actually simulated (padded / permuted).
    pub countermodel: Option<Countermodel>,
    pub assignment: BTreeMap<String, Formula<A>>,
    /// Checked system worlds with the node each one marks.
    pub pairs: Vec<(W, usize)>,
    pub base_refutes: bool,
}

impl<W, A> SimulationReport<W, A> {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, SimVerdict::Pass)
    }

    fn member(f: &ModalFormula, t: TheoryId) -> Self
    where
        W: PartialEq,
    {
        SimulationReport {
            formula: f.clone(),
            verdict: SimVerdict::Member(t),
            countermodel: None,
            assignment: BTreeMap::new(),
            pairs: Vec::new(),
            base_refutes: false,
        }
    }
}

impl<W: fmt::Debug + PartialEq, A: fmt::Display> SimulationReport<W, A> {
    /// Human-readable trace of the correspondence.
    pub fn trace(&self) -> String {
        let mut out = format!("formula: {}\n", self.formula);
        match &self.verdict {
            SimVerdict::Member(t) => {
                out.push_str(&format!("member of {t}; nothing to simulate\n"));
                return out;
            }
            SimVerdict::Pass => out.push_str("verdict: pass\n"),
            SimVerdict::Mismatch {
                world,
                node,
                subformula,
                system,
                model,
            } => out.push_str(&format!(
                "verdict: mismatch at {world:?} ~ node {node} on {subformula}: system {system}, model {model}\n"
            )),
            SimVerdict::BaseNotRefuting => out.push_str("verdict: base world does not refute\n"),
        }
        for (p, psi) in &self.assignment {
            out.push_str(&format!("  {p} := {psi}\n"));
        }
        for (w, t) in &self.pairs {
            out.push_str(&format!("  {w:?} ~ node {t}\n"));
        }
        out.push_str(&format!("base refutes instance: {}\n", self.base_refutes));
        out
    }
}

/// Index of the unique marker true at `w`.
fn marked<S: System>(sys: &S, w: &S::World, markers: &[Formula<S::Atom>]) -> Result<usize> {
    let mut found = None;
    for (i, r) in markers.iter().enumerate() {
        if sys.holds(w, r)? {
            if found.is_some() {
                return Err(Error::Precondition(format!("{w:?} satisfies two markers")));
            }
            found = Some(i);
        }
    }
    found.ok_or_else(|| Error::Precondition(format!("{w:?} satisfies no marker")))
}

/// Builds `p := ⋁{marker_t : M,t ⊨ p}` and checks every subformula at
/// every system world against its marked node.
fn transfer<S: System>(
    sys: &S,
    model: &KripkeModel,
    markers: &[Formula<S::Atom>],
    f: &ModalFormula,
    base: &S::World,
) -> Result<SimulationReport<S::World, S::Atom>> {
    let assignment: BTreeMap<String, Formula<S::Atom>> = f
        .atoms()
        .into_iter()
        .map(|p| {
            let psi = Formula::disjunction(
                (0..model.world_count())
                    .filter(|&t| model.var_true(p, t))
                    .map(|t| markers[t].clone()),
            );
            (p.clone(), psi)
        })
        .collect();
    let worlds = sys.worlds();
    let mut pairs = Vec::with_capacity(worlds.len());
    for w in &worlds {
        pairs.push((w.clone(), marked(sys, w, markers)?));
    }
    let mut verdict = SimVerdict::Pass;
    'outer: for g in f.subformulas() {
        let instance = g.substitute(&assignment)?;
        let in_system = sys.holds_all(&worlds, &instance)?;
        let in_model = model.truth_set(g);
        for ((w, t), s) in pairs.iter().zip(in_system) {
            if s != in_model[*t] {
                verdict = SimVerdict::Mismatch {
                    world: w.clone(),
                    node: *t,
                    subformula: g.clone(),
                    system: s,
                    model: in_model[*t],
                };
                break 'outer;
            }
        }
    }
    let base_refutes = !sys.holds(base, &f.substitute(&assignment)?)?;
    if verdict == SimVerdict::Pass && !base_refutes {
        verdict = SimVerdict::BaseNotRefuting;
    }
    Ok(SimulationReport {
        formula: f.clone(),
        verdict,
        countermodel: None,
        assignment,
        pairs,
        base_refutes,
    })
}

/// Simulates an S5 countermodel with independent switches: the cluster is
/// padded to `2^m` worlds, world `t` is marked by the switch pattern of `t`,
/// and worlds are permuted so the refuting world is the one `base` marks.
/// Only the first `m = ceil(log2 cluster size)` switches are used.
pub fn simulate_s5_refutation<S: System>(
    sys: &S,
    switches: &[Formula<S::Atom>],
    f: &ModalFormula,
    base: &S::World,
) -> Result<SimulationReport<S::World, S::Atom>> {
    let Some(cm) = s5_cluster_countermodel(f, false)? else {
        return Ok(SimulationReport::member(f, TheoryId::S5));
    };
    let n = cm.model.world_count();
    let m = n.next_power_of_two().trailing_zeros() as usize;
    if m > switches.len() {
        return Err(Error::Precondition(format!(
            "a cluster of {n} worlds needs {m} switches, only {} given",
            switches.len()
        )));
    }
    let used = &switches[..m];
    let independence = are_independent_switches(sys, used)?;
    if !independence.pass {
        let reason = independence.violation.map(|v| v.reason).unwrap_or_default();
        return Err(Error::Precondition(format!("switches are not independent: {reason}")));
    }
    let dial = switches_to_dial(used);
    let padded = crate::decide::pad_cluster(&cm.model, 1 << m)?;
    let t0 = marked(sys, base, &dial)?;
    let mut ptm = PreTreeModel::from_model(padded)
        .ok_or_else(|| Error::InvalidModel("padded cluster is not a pre-tree".into()))?;
    if cm.world != t0 {
        ptm.swap_in_cluster(cm.world, t0)?;
    }
    let model = ptm.model().clone();
    let mut report = transfer(sys, &model, &dial, f, base)?;
    report.countermodel = Some(Countermodel { model, world: t0 });
    Ok(report)
}

/// Simulates a pre-tree countermodel through a railyard labeling of its
/// tree. `failing` must refute `f` and lie in the root cluster; it is
/// swapped with the root-cluster node `base` is labeled with.
pub fn simulate_s4_refutation<S: System>(
    sys: &S,
    countermodel: &PreTreeModel,
    failing: usize,
    labeling: &[Formula<S::Atom>],
    f: &ModalFormula,
    base: &S::World,
) -> Result<SimulationReport<S::World, S::Atom>> {
    let tree = countermodel.tree();
    if labeling.len() != tree.world_count() {
        return Err(Error::Precondition(format!(
            "labeling has {} statements, countermodel has {} worlds",
            labeling.len(),
            tree.world_count()
        )));
    }
    if !tree.root_cluster().contains(&failing) {
        return Err(Error::Precondition(format!(
            "world {failing} is not in the root cluster"
        )));
    }
    if countermodel.model().eval(failing, f)? {
        return Err(Error::Precondition(format!("world {failing} does not refute {f}")));
    }
    let check = is_railyard_labeling(sys, tree, labeling, base)?;
    if !check.pass {
        let reason = check.violation.map(|v| v.reason).unwrap_or_default();
        return Err(Error::Precondition(format!("not a railyard labeling: {reason}")));
    }
    let t0 = marked(sys, base, labeling)?;
    let mut ptm = countermodel.clone();
    if failing != t0 {
        ptm.swap_in_cluster(failing, t0)?;
    }
    let model = ptm.model().clone();
    let mut report = transfer(sys, &model, labeling, f, base)?;
    report.countermodel = Some(Countermodel { model, world: t0 });
    Ok(report)
}

/// Full S4 pipeline over the sequence system: pre-tree countermodel,
/// uniformization, railyard encoding (ignoring the first `base.len()`
/// entries), and simulation at `base`.
pub fn simulate_s4_over_sequences(
    f: &ModalFormula,
    base: Seq,
) -> Result<(SequenceSystem, SimulationReport<Seq, SeqAtom>)> {
    let Some((ptm, failing)) = s4_pretree_countermodel(f)? else {
        return Ok((SequenceSystem::default(), SimulationReport::member(f, TheoryId::S4)));
    };
    let tree = ptm.tree();
    let (m, k) = (tree.max_cluster_size(), tree.max_branching().max(1));
    let (uniform, origin) = ptm.uniformize(m, k)?;
    let start = uniform
        .tree()
        .root_cluster()
        .iter()
        .copied()
        .find(|&w| origin[w] == failing)
        .ok_or_else(|| Error::InvalidModel("uniformization lost the refuting world".into()))?;
    let (labels, rail) = railyard_encoding(uniform.tree(), base.len())?;
    let sys = SequenceSystem::new(Window::for_rail(&rail, base.clone()));
    let report = simulate_s4_refutation(&sys, &uniform, start, &labels, f, &base)?;
    Ok((sys, report))
}

/// Full S5 pipeline over the sequence system with `sigma_0 .. sigma_5` as
/// switches, checked on the default window.
pub fn simulate_s5_over_sequences(f: &ModalFormula) -> Result<SimulationReport<Seq, SeqAtom>> {
    let sys = SequenceSystem::default();
    simulate_s5_refutation(&sys, &crate::sequence::sigma_switches(6), f, &vec![])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundsClass {
    /// Every sampled substitution instance held at every checked world.
    ValidSampled {
        samples: usize,
    },
    Refuted {
        via: String,
    },
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsEntry {
    pub formula: ModalFormula,
    /// `None` when the decision ran out of work.
    pub in_s4: Option<bool>,
    pub in_s5: Option<bool>,
    pub class: BoundsClass,
}

/// Hook replaying an S4 refutation in some system; true when it passed.
pub type RailyardHook<'a> = &'a dyn Fn(&ModalFormula) -> Result<bool>;

pub struct BoundsOptions<'a, S: System> {
    /// Statements substituted for variables in sampled instances.
    pub pool: Vec<Formula<S::Atom>>,
    pub samples: usize,
    pub seed: u64,
    pub switches: Option<Vec<Formula<S::Atom>>>,
    pub base: S::World,
    pub railyard: Option<RailyardHook<'a>>,
}

fn sample_statement<A: Clone>(pool: &[Formula<A>], rng: &mut StdRng) -> Formula<A> {
    let pick = |rng: &mut StdRng| pool[rng.gen_range(0..pool.len())].clone();
    match rng.gen_range(0..4) {
        0 => Formula::not(pick(rng)),
        1 => Formula::and(pick(rng), pick(rng)),
        _ => pick(rng),
    }
}

/// Places each formula between the theories: S4 members (and other S5
/// members) are sample-checked on the system's worlds, non-S5 formulas are
/// refuted by switch simulation, non-S4 formulas by the railyard hook.
pub fn validity_bounds_report<S: System>(
    sys: &S,
    corpus: &[ModalFormula],
    opts: &BoundsOptions<S>,
) -> Result<Vec<BoundsEntry>> {
    let mut rng = StdRng::seed_from_u64(opts.seed);
    let worlds = sys.worlds();
    let mut out = Vec::new();
    for f in corpus {
        let member = |t| -> Result<Option<bool>> {
            Ok(match decide(t, f, None)?.verdict {
                Verdict::Member => Some(true),
                Verdict::NonMember(_) => Some(false),
                Verdict::UnknownBeyondBound { .. } => None,
            })
        };
        let (in_s4, in_s5) = (member(TheoryId::S4)?, member(TheoryId::S5)?);
        let mut class = BoundsClass::Undetermined;
        if in_s5 == Some(true) && !opts.pool.is_empty() {
            class = BoundsClass::ValidSampled { samples: opts.samples };
            'samples: for _ in 0..opts.samples {
                let assignment: BTreeMap<String, Formula<S::Atom>> = f
                    .atoms()
                    .into_iter()
                    .map(|p| (p.clone(), sample_statement(&opts.pool, &mut rng)))
                    .collect();
                let instance = f.substitute(&assignment)?;
                for (w, ok) in worlds.iter().zip(sys.holds_all(&worlds, &instance)?) {
                    if !ok {
                        class = BoundsClass::Refuted {
                            via: format!("instance {instance} fails at {w:?}"),
                        };
                        break 'samples;
                    }
                }
            }
        }
        if in_s5 == Some(false) {
            if let Some(sw) = &opts.switches {
                if simulate_s5_refutation(sys, sw, f, &opts.base)?.passed() {
                    class = BoundsClass::Refuted {
                        via: "S5 switch simulation".into(),
                    };
                }
            }
        }
        if class == BoundsClass::Undetermined && in_s4 == Some(false) {
            if let Some(hook) = opts.railyard {
                if hook(f)? {
                    class = BoundsClass::Refuted {
                        via: "railyard simulation".into(),
                    };
                }
            }
        }
        out.push(BoundsEntry {
            formula: f.clone(),
            in_s4,
            in_s5,
            class,
        });
    }
    Ok(out)
}

/// Railyard hook for the sequence system with base world `[]`.
pub fn sequence_railyard_hook(f: &ModalFormula) -> Result<bool> {
    Ok(simulate_s4_over_sequences(f, Vec::new())?.1.passed())
}

/// The uniformized tree the S4 pipeline would encode for `f`.
pub fn uniform_countermodel_tree(f: &ModalFormula) -> Result<Option<PreTree>> {
    let Some((ptm, _)) = s4_pretree_countermodel(f)? else {
        return Ok(None);
    };
    let tree = ptm.tree();
    let (u, _) = ptm.uniformize(tree.max_cluster_size(), tree.max_branching().max(1))?;
    Ok(Some(u.tree().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::sequence::sigma_switches;

    fn f(s: &str) -> ModalFormula {
        parse(s).unwrap()
    }

    #[test]
    fn s5_examples_over_sequences() {
        for s in ["<>p -> []p", "p -> []p"] {
            let r = simulate_s5_over_sequences(&f(s)).unwrap();
            assert!(r.passed(), "{s}: {}", r.trace());
            assert!(r.base_refutes);
            let sys = SequenceSystem::default();
            let instance = f(s).substitute(&r.assignment).unwrap();
            assert!(!sys.holds(&vec![], &instance).unwrap());
        }
        let r = simulate_s5_over_sequences(&f("[]p -> p")).unwrap();
        assert_eq!(r.verdict, SimVerdict::Member(TheoryId::S5));
    }

    #[test]
    fn s5_needs_enough_switches() {
        let sys = SequenceSystem::default();
        let g = f("<>p & <>q & <>r -> <>(p & q & r)");
        assert!(simulate_s5_refutation(&sys, &sigma_switches(1), &g, &vec![]).is_err());
        assert!(simulate_s5_refutation(&sys, &sigma_switches(2), &g, &vec![])
            .unwrap()
            .passed());
    }

    #[test]
    fn s5_base_may_mark_any_world() {
        let sys = SequenceSystem::new(Window::new(vec![3], vec![0, 1, 2, 3], 2));
        let r = simulate_s5_refutation(&sys, &sigma_switches(2), &f("<>p -> []p"), &vec![3]).unwrap();
        assert!(r.passed(), "{}", r.trace());
    }

    #[test]
    fn s4_examples_over_sequences() {
        let dot2 = f("<>[]p -> []<>p");
        let (_, r) = simulate_s4_over_sequences(&dot2, vec![]).unwrap();
        assert!(r.passed(), "{}", r.trace());
        let (_, r) = simulate_s4_over_sequences(&f("[]p -> [][]p"), vec![]).unwrap();
        assert_eq!(r.verdict, SimVerdict::Member(TheoryId::S4));
        let (_, r) = simulate_s4_over_sequences(&dot2, vec![7, 7]).unwrap();
        assert!(r.passed(), "{}", r.trace());
    }

    #[test]
    fn axiom_five_on_a_button_chain() {
        let tree = PreTree::new(vec![vec![0], vec![1]], vec![None, Some(0)]).unwrap();
        let mut sys = KripkeModel::from_edges(2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        sys.set_var("b", 1, true).unwrap();
        let mut cm = tree.frame();
        cm.set_var("p", 1, true).unwrap();
        let ptm = PreTreeModel::new(tree, cm).unwrap();
        let labels = [f("~b"), f("b")];
        let r = simulate_s4_refutation(&sys, &ptm, 0, &labels, &f("<>[]p -> p"), &0).unwrap();
        assert!(r.passed());
        assert_eq!(r.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(r.assignment["p"], f("b"));
        // a labeling that does not fit is refused
        assert!(simulate_s4_refutation(&sys, &ptm, 0, &labels[..1], &f("<>[]p -> p"), &0).is_err());
        assert!(simulate_s4_refutation(&sys, &ptm, 1, &labels, &f("<>[]p -> p"), &0).is_err());
    }

    #[test]
    fn engines_agree_with_decider() {
        for s in [
            "<>[]p -> []<>p",
            "<>[]p -> p",
            "p -> []p",
            "(<>p & <>q) -> <>((p & <>q) | (q & <>p))",
        ] {
            let (_, r) = simulate_s4_over_sequences(&f(s), vec![]).unwrap();
            assert!(r.passed(), "{s}");
            assert!(!decide(TheoryId::S4, &f(s), None).unwrap().is_member());
        }
    }

    #[test]
    fn bounds_report_over_sequences() {
        let sys = SequenceSystem::new(Window::new(vec![], vec![0, 1, 2, 3], 2));
        let pool = vec![
            Formula::Atom(SeqAtom::Rho(1)),
            Formula::Atom(SeqAtom::SigmaBit(0)),
            Formula::Atom(SeqAtom::FirstEven),
        ];
        let hook = sequence_railyard_hook;
        let opts = BoundsOptions {
            pool,
            samples: 16,
            seed: 7,
            switches: Some(sigma_switches(4)),
            base: vec![],
            railyard: Some(&hook),
        };
        let corpus = [
            f("[](p->q)->([]p->[]q)"),
            f("[]p->p"),
            f("[]p->[][]p"),
            f("<>[]p->[]<>p"),
            f("<>p->[]p"),
        ];
        let report = validity_bounds_report(&sys, &corpus, &opts).unwrap();
        for e in &report[..3] {
            assert_eq!(e.class, BoundsClass::ValidSampled { samples: 16 });
        }
        assert!(matches!(report[3].class, BoundsClass::Refuted { .. }));
        assert_eq!(
            report[4].class,
            BoundsClass::Refuted {
                via: "S5 switch simulation".into()
            }
        );
    }
}
