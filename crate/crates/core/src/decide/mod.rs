//! Membership in S4, S4.2, S4.3 and S5 with countermodel extraction.
//!
//! S4 is decided by a negation-normal-form tableau with ancestor loop
//! checking ([`tableau`]). S5, S4.3 and S4.2 are decided by a search over
//! cluster contexts ([`clusters`]): a finite frame of the class is built
//! from clusters of valuations, and each cluster is summarized by the truth
//! of every modal subformula at its worlds. Both procedures are exact on
//! the finite frames characterizing each theory; work beyond `bound` gives
//! [`Verdict::UnknownBeyondBound`] instead of a verdict.
//!
//! Countermodels are canonicalized: the smallest frame of the class on at
//! most four worlds (least canonical adjacency code, then least valuation)
//! is preferred, falling back to the procedure's own witness.

pub mod clusters;
pub mod small;
pub mod tableau;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::ModalFormula;
use crate::kripke::{FrameClasses, KripkeModel};
use crate::pretree::PreTreeModel;

/// Work units granted when no bound is given, before and after clamping
/// `2^(number of subformulas)`.
pub const DEFAULT_BOUND_FLOOR: u64 = 1 << 20;
pub const DEFAULT_BOUND_CEILING: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoryId {
    #[serde(rename = "S4")]
    S4,
    #[serde(rename = "S4.2")]
    S4_2,
    #[serde(rename = "S4.3")]
    S4_3,
    #[serde(rename = "S5")]
    S5,
}

impl TheoryId {
    pub const ALL: [TheoryId; 4] = [TheoryId::S4, TheoryId::S4_2, TheoryId::S4_3, TheoryId::S5];

    pub fn name(self) -> &'static str {
        match self {
            TheoryId::S4 => "S4",
            TheoryId::S4_2 => "S4.2",
            TheoryId::S4_3 => "S4.3",
            TheoryId::S5 => "S5",
        }
    }

    /// Whether a frame lies in the class characterizing the theory.
    pub fn frame_in_class(self, classes: &FrameClasses) -> bool {
        let preorder = classes.reflexive && classes.transitive;
        match self {
            TheoryId::S4 => preorder,
            TheoryId::S4_2 => preorder && classes.directed,
            TheoryId::S4_3 => classes.linear_preorder,
            TheoryId::S5 => classes.equivalence,
        }
    }
}

impl fmt::Display for TheoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', ".").as_str() {
            "S4" => Ok(TheoryId::S4),
            "S4.2" => Ok(TheoryId::S4_2),
            "S4.3" => Ok(TheoryId::S4_3),
            "S5" => Ok(TheoryId::S5),
            _ => Err(Error::Unsupported(format!(
                "unknown theory {s:?} (expected S4, S4.2, S4.3 or S5)"
            ))),
        }
    }
}

/// A model with a world refuting the formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Countermodel {
    pub model: KripkeModel,
    pub world: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Member,
    NonMember(Countermodel),
    UnknownBeyondBound { bound: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionResult {
    pub theory: TheoryId,
    pub verdict: Verdict,
    /// Work units spent by the decision procedure.
    pub work: u64,
}

impl DecisionResult {
    pub fn is_member(&self) -> bool {
        matches!(self.verdict, Verdict::Member)
    }

    pub fn countermodel(&self) -> Option<&Countermodel> {
        match &self.verdict {
            Verdict::NonMember(cm) => Some(cm),
            _ => None,
        }
    }
}

/// Outcome of a raw procedure before canonicalization.
pub(crate) enum Raw {
    Member,
    Refuted(Countermodel),
}

/// Signals that the work bound ran out.
#[derive(Debug)]
pub(crate) struct OutOfWork;

/// Default work bound for `f`.
pub fn default_bound(f: &ModalFormula) -> u64 {
    let n = f.subformulas().len() as u32;
    let raw = if n >= 63 { u64::MAX } else { 1u64 << n };
    raw.clamp(DEFAULT_BOUND_FLOOR, DEFAULT_BOUND_CEILING)
}

pub fn decide(theory: TheoryId, f: &ModalFormula, bound: Option<u64>) -> Result<DecisionResult> {
    decide_with(theory, f, bound, true)
}

/// Like [`decide`]; with `canonical = false` the procedure's own witness is
/// returned instead of the canonical small countermodel.
pub fn decide_with(theory: TheoryId, f: &ModalFormula, bound: Option<u64>, canonical: bool) -> Result<DecisionResult> {
    let bound = match bound {
        Some(0) => return Err(Error::Precondition("bound must be at least 1".into())),
        Some(b) => b,
        None => default_bound(f),
    };
    let mut work = 0u64;
    let raw = match theory {
        TheoryId::S4 => tableau::refute(f, bound, &mut work),
        TheoryId::S4_2 => clusters::refute(f, clusters::Shape::TreeWithTop, bound, &mut work),
        TheoryId::S4_3 => clusters::refute(f, clusters::Shape::Chain, bound, &mut work),
        TheoryId::S5 => clusters::refute(f, clusters::Shape::Cluster, bound, &mut work),
    };
    let verdict = match raw {
        Err(OutOfWork) => Verdict::UnknownBeyondBound { bound },
        Ok(Raw::Member) => Verdict::Member,
        Ok(Raw::Refuted(witness)) => {
            let chosen = if canonical {
                small::smallest_countermodel(theory, f).unwrap_or(witness)
            } else {
                witness
            };
            Verdict::NonMember(normalize(theory, f, chosen)?)
        }
    };
    Ok(DecisionResult { theory, verdict, work })
}

/// Restricts to the submodel generated by the refuting world (so it sits in
/// the root cluster) and re-checks the refutation and the frame class.
fn normalize(theory: TheoryId, f: &ModalFormula, cm: Countermodel) -> Result<Countermodel> {
    let (mut model, map) = cm.model.generated(cm.world)?;
    let world = map[&cm.world];
    for v in f.atoms() {
        model.declare_var(v);
    }
    if model.eval(world, f)? {
        return Err(Error::InvalidModel(format!("countermodel does not refute {f}")));
    }
    if !theory.frame_in_class(&model.frame_class_of()) {
        return Err(Error::InvalidModel(format!(
            "countermodel frame is not in the {theory} class"
        )));
    }
    Ok(Countermodel { model, world })
}

/// A single-cluster countermodel for `f`, or `None` when `f` is in S5. With
/// `pad_to_power_of_two` the cluster is filled up to the next power of two
/// by duplicating worlds.
pub fn s5_cluster_countermodel(f: &ModalFormula, pad_to_power_of_two: bool) -> Result<Option<Countermodel>> {
    let mut work = 0;
    let raw = clusters::refute(f, clusters::Shape::Cluster, default_bound(f), &mut work)
        .map_err(|_| Error::Bounds(format!("S5 search for {f} exceeded the work ceiling")))?;
    let Raw::Refuted(cm) = raw else { return Ok(None) };
    let cm = normalize(TheoryId::S5, f, cm)?;
    if !pad_to_power_of_two {
        return Ok(Some(cm));
    }
    let n = cm.model.world_count();
    Ok(Some(Countermodel {
        model: pad_cluster(&cm.model, n.next_power_of_two())?,
        world: cm.world,
    }))
}

/// Extends a single-cluster model to `size` worlds; new worlds copy the
/// valuation of the existing ones cyclically.
pub fn pad_cluster(model: &KripkeModel, size: usize) -> Result<KripkeModel> {
    let n = model.world_count();
    if size < n {
        return Err(Error::Bounds(format!("cannot pad a cluster of {n} down to {size}")));
    }
    if !model.frame_class_of().equivalence || model.reachability()[0].iter().any(|r| !r) {
        return Err(Error::InvalidModel("padding needs a single cluster".into()));
    }
    let mut out = KripkeModel::cluster(size)?;
    for (v, set) in model.valuation() {
        out.declare_var(v);
        for w in 0..size {
            if set.contains(&(w % n)) {
                out.set_var(v, w, true)?;
            }
        }
    }
    Ok(out)
}

/// A pre-tree countermodel refuting `f` at a world of its root cluster, or
/// `None` when `f` is in S4.
pub fn s4_pretree_countermodel(f: &ModalFormula) -> Result<Option<(PreTreeModel, usize)>> {
    let result = decide(TheoryId::S4, f, None)?;
    match result.verdict {
        Verdict::Member => Ok(None),
        Verdict::UnknownBeyondBound { bound } => {
            Err(Error::Bounds(format!("S4 tableau for {f} exceeded {bound} work units")))
        }
        Verdict::NonMember(cm) => {
            let ptm = PreTreeModel::from_model(cm.model)
                .ok_or_else(|| Error::InvalidModel("S4 countermodel is not a pre-tree".into()))?;
            Ok(Some((ptm, cm.world)))
        }
    }
}
