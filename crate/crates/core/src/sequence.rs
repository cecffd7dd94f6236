//! The universal-sequence system: worlds are finite sequences of naturals
//! and a world sees exactly its end-extensions.
//!
//! Statements are formulas over [`SeqAtom`] descriptors. Their truth is
//! decided exactly: a world only matters through a finite abstract state
//! (which watched keys are present, the low bits of the last entry, the
//! parity of the first entry, where each railyard decoder stands), and
//! appending a number acts on that state through finitely many classes of
//! numbers. The reachable state graph is a finite quotient of the system
//! that preserves every statement over the watched atoms, so `<>` is plain
//! graph reachability.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::formula::{parse, Formula, Wire};
use crate::pretree::PreTree;
use crate::system::System;

pub type Seq = Vec<u64>;

/// Largest abstract state graph built before giving up.
const MAX_STATES: usize = 1 << 20;

/// Railyard decoder for a uniform pre-tree: every cluster has `m` worlds,
/// every non-leaf cluster `k` children.
///
/// After skipping the first `offset` entries, entries below `k` climb to
/// the child with that index (ignored once a leaf cluster is reached); the
/// last entry `>= k` (default `k`) taken mod `m` picks the world inside the
/// cluster reached.
#[derive(Debug, Clone)]
pub struct RailSpec {
    tree: PreTree,
    k: usize,
    m: usize,
    offset: usize,
    children: Vec<Vec<usize>>,
}

impl RailSpec {
    pub fn new(tree: PreTree, offset: usize) -> Result<Self> {
        let m = tree.max_cluster_size();
        let k = tree.max_branching().max(1);
        if !tree.is_uniform(m, k) {
            return Err(Error::InvalidTree(format!(
                "railyard encoding needs a uniform pre-tree (clusters of {m}, branching {k})"
            )));
        }
        let children = (0..tree.cluster_count()).map(|c| tree.children(c)).collect();
        Ok(RailSpec {
            tree,
            k,
            m,
            offset,
            children,
        })
    }

    pub fn tree(&self) -> &PreTree {
        &self.tree
    }

    /// Branching constant: entries below it climb the tree.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Cluster size: selectors are read mod this.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    fn start(&self) -> RailState {
        RailState {
            skip: self.offset,
            cluster: 0,
            selector: None,
        }
    }

    fn step(&self, st: &RailState, a: u64) -> RailState {
        let mut next = st.clone();
        if st.skip > 0 {
            next.skip -= 1;
        } else if a < self.k as u64 {
            if !self.children[st.cluster].is_empty() {
                next.cluster = self.children[st.cluster][a as usize];
            }
        } else {
            next.selector = Some((a % self.m as u64) as usize);
        }
        next
    }

    fn node(&self, st: &RailState) -> usize {
        let sel = st.selector.unwrap_or(self.k % self.m);
        self.tree.clusters()[st.cluster][sel]
    }

    /// The tree node (world of the pre-tree) a sequence decodes to.
    pub fn decode(&self, seq: &[u64]) -> usize {
        let st = seq.iter().fold(self.start(), |st, &a| self.step(&st, a));
        self.node(&st)
    }

    fn key(&self) -> (usize, usize, usize, &[Vec<usize>], Vec<Option<usize>>) {
        let parents = (0..self.tree.cluster_count()).map(|c| self.tree.parent(c)).collect();
        (self.k, self.m, self.offset, self.tree.clusters(), parents)
    }
}

impl PartialEq for RailSpec {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for RailSpec {}

impl Hash for RailSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for RailSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RailSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Ground statements about a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeqAtom {
    /// `k` appears in the sequence.
    Rho(u64),
    /// `k` does not appear.
    Eta(u64),
    /// Bit `k` of the last entry is 1 (false on the empty sequence).
    SigmaBit(u32),
    /// The first entry is even (false on the empty sequence).
    FirstEven,
    /// The sequence decodes to `node` under `rail`.
    RailNode { rail: Arc<RailSpec>, node: usize },
}

pub type SeqStatement = Formula<SeqAtom>;

impl fmt::Display for SeqAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqAtom::Rho(k) => write!(f, "rho{k}"),
            SeqAtom::Eta(k) => write!(f, "eta{k}"),
            SeqAtom::SigmaBit(k) => write!(f, "sigma{k}"),
            SeqAtom::FirstEven => write!(f, "first_even"),
            SeqAtom::RailNode { node, .. } => write!(f, "r{node}"),
        }
    }
}

impl SeqAtom {
    /// Truth at a concrete sequence.
    pub fn eval(&self, seq: &[u64]) -> bool {
        match self {
            SeqAtom::Rho(k) => seq.contains(k),
            SeqAtom::Eta(k) => !seq.contains(k),
            SeqAtom::SigmaBit(k) => seq.last().is_some_and(|&a| *k < 64 && a >> k & 1 == 1),
            SeqAtom::FirstEven => seq.first().is_some_and(|a| a % 2 == 0),
            SeqAtom::RailNode { rail, node } => rail.decode(seq) == *node,
        }
    }
}

/// Reads `rhoK`, `etaK`, `sigmaK` and `first_even` as descriptors in a
/// formula written in the modal grammar.
pub fn parse_seq_statement(src: &str) -> Result<SeqStatement> {
    parse(src)?.try_flat_map_atoms(&mut |v: &String| seq_atom_from_name(v).map(Formula::Atom))
}

fn seq_atom_from_name(v: &str) -> Result<SeqAtom> {
    let num = |prefix: &str| v.strip_prefix(prefix).and_then(|d| d.parse::<u64>().ok());
    if v == "first_even" {
        Ok(SeqAtom::FirstEven)
    } else if let Some(k) = num("rho") {
        Ok(SeqAtom::Rho(k))
    } else if let Some(k) = num("eta") {
        Ok(SeqAtom::Eta(k))
    } else if let Some(k) = num("sigma").filter(|&k| k < 64) {
        Ok(SeqAtom::SigmaBit(k as u32))
    } else {
        Err(Error::Unsupported(format!(
            "`{v}` is not a sequence descriptor (rhoK, etaK, sigmaK, first_even)"
        )))
    }
}

// ---------------------------------------------------------------------------
// JSON: {"kind":"rho","k":5}, {"kind":"sigma_bit","k":0}, {"kind":"first_even"},
// {"kind":"rail_node","node":3,"tree":{...},"offset":0}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum AtomWire {
    Rho {
        k: u64,
    },
    Eta {
        k: u64,
    },
    SigmaBit {
        k: u32,
    },
    FirstEven,
    RailNode {
        node: usize,
        tree: PreTree,
        #[serde(default)]
        offset: usize,
    },
}

impl Serialize for SeqAtom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let w = match self {
            SeqAtom::Rho(k) => AtomWire::Rho { k: *k },
            SeqAtom::Eta(k) => AtomWire::Eta { k: *k },
            SeqAtom::SigmaBit(k) => AtomWire::SigmaBit { k: *k },
            SeqAtom::FirstEven => AtomWire::FirstEven,
            SeqAtom::RailNode { rail, node } => AtomWire::RailNode {
                node: *node,
                tree: rail.tree.clone(),
                offset: rail.offset,
            },
        };
        w.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SeqAtom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match AtomWire::deserialize(d)? {
            AtomWire::Rho { k } => SeqAtom::Rho(k),
            AtomWire::Eta { k } => SeqAtom::Eta(k),
            AtomWire::SigmaBit { k } if k < 64 => SeqAtom::SigmaBit(k),
            AtomWire::SigmaBit { k } => return Err(D::Error::custom(format!("bit {k} out of range"))),
            AtomWire::FirstEven => SeqAtom::FirstEven,
            AtomWire::RailNode { node, tree, offset } => {
                let rail = RailSpec::new(tree, offset).map_err(D::Error::custom)?;
                if node >= rail.tree.world_count() {
                    return Err(D::Error::custom(format!("node {node} outside the tree")));
                }
                SeqAtom::RailNode {
                    rail: Arc::new(rail),
                    node,
                }
            }
        })
    }
}

impl Serialize for SeqStatement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_wire().serialize(s)
    }
}

/// A bare descriptor, a formula tree with descriptors under `var`, or a
/// string in the modal grammar with descriptor names as variables.
impl<'de> Deserialize<'de> for SeqStatement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Atom(SeqAtom),
            Tree(Wire<SeqAtom>),
        }
        match Repr::deserialize(d)? {
            Repr::Text(t) => parse_seq_statement(&t).map_err(D::Error::custom),
            Repr::Atom(a) => Ok(Formula::Atom(a)),
            Repr::Tree(w) => Formula::from_wire(w).map_err(D::Error::custom),
        }
    }
}

// ---------------------------------------------------------------------------
// Abstract states

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct RailState {
    skip: usize,
    cluster: usize,
    selector: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct State {
    present: u64,
    /// Low bits of the last entry; `None` for the empty sequence.
    last: Option<u64>,
    first_even: Option<bool>,
    rails: Vec<RailState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Features {
    keys: Vec<u64>,
    bits: u32,
    first: bool,
    rails: Vec<Arc<RailSpec>>,
}

impl Features {
    fn of(f: &SeqStatement) -> Result<Self> {
        let mut keys = BTreeSet::new();
        let mut bits = 0;
        let mut first = false;
        let mut rails = BTreeSet::new();
        for a in f.atoms() {
            match a {
                SeqAtom::Rho(k) | SeqAtom::Eta(k) => {
                    keys.insert(*k);
                }
                SeqAtom::SigmaBit(k) => bits = bits.max(k + 1),
                SeqAtom::FirstEven => first = true,
                SeqAtom::RailNode { rail, .. } => {
                    rails.insert(rail.clone());
                }
            }
        }
        if keys.len() > 64 {
            return Err(Error::Unsupported(
                "more than 64 distinct rho/eta keys in one statement".into(),
            ));
        }
        Ok(Features {
            keys: keys.into_iter().collect(),
            bits,
            first,
            rails: rails.into_iter().collect(),
        })
    }

    fn start(&self) -> State {
        State {
            present: 0,
            last: None,
            first_even: None,
            rails: self.rails.iter().map(|r| r.start()).collect(),
        }
    }

    fn step(&self, st: &State, a: u64) -> State {
        let mut present = st.present;
        for (i, &k) in self.keys.iter().enumerate() {
            if a == k {
                present |= 1 << i;
            }
        }
        let mask = if self.bits >= 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        };
        State {
            present,
            last: Some(a & mask),
            first_even: if self.first {
                st.first_even.or(Some(a.is_multiple_of(2)))
            } else {
                None
            },
            rails: self.rails.iter().zip(&st.rails).map(|(r, s)| r.step(s, a)).collect(),
        }
    }

    /// Appended numbers covering every behaviour: each number below the
    /// largest threshold, then one per residue class of the period.
    fn representatives(&self) -> Result<Vec<u64>> {
        let threshold = self
            .keys
            .iter()
            .map(|k| k + 1)
            .chain(self.rails.iter().map(|r| r.k as u64))
            .max()
            .unwrap_or(0);
        let mut period: u64 = 1u64 << self.bits.min(20);
        if self.bits > 20 {
            return Err(Error::Unsupported(
                "sigma bits above 20 make the state graph too large".into(),
            ));
        }
        let lcm = |a: u64, b: u64| a / gcd(a, b) * b;
        if self.first {
            period = lcm(period, 2);
        }
        for r in &self.rails {
            period = lcm(period, r.m as u64);
        }
        let total = threshold.saturating_add(period);
        if total > MAX_STATES as u64 {
            return Err(Error::Bounds(format!("{total} representative numbers")));
        }
        Ok((0..total).collect())
    }

    fn atom(&self, st: &State, a: &SeqAtom) -> bool {
        let key = |k: &u64| st.present >> self.keys.binary_search(k).expect("watched key") & 1 == 1;
        match a {
            SeqAtom::Rho(k) => key(k),
            SeqAtom::Eta(k) => !key(k),
            SeqAtom::SigmaBit(k) => st.last.is_some_and(|l| l >> k & 1 == 1),
            SeqAtom::FirstEven => st.first_even == Some(true),
            SeqAtom::RailNode { rail, node } => {
                let i = self.rails.binary_search(rail).expect("watched rail");
                rail.node(&st.rails[i]) == *node
            }
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Reachable abstract states from the empty sequence.
struct Graph {
    features: Features,
    states: Vec<State>,
    index: HashMap<State, usize>,
    /// Successor state and a number producing it.
    succ: Vec<Vec<(usize, u64)>>,
    pred: Vec<Vec<usize>>,
}

impl Graph {
    fn build(features: Features) -> Result<Self> {
        let reps = features.representatives()?;
        let start = features.start();
        let mut states = vec![start.clone()];
        let mut index = HashMap::from([(start, 0)]);
        let mut succ: Vec<Vec<(usize, u64)>> = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let mut out: Vec<(usize, u64)> = Vec::new();
            for &a in &reps {
                let next = features.step(&states[i], a);
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= MAX_STATES {
                            return Err(Error::Bounds(format!("more than {MAX_STATES} abstract states")));
                        }
                        states.push(next.clone());
                        index.insert(next, states.len() - 1);
                        states.len() - 1
                    }
                };
                if !out.iter().any(|&(t, _)| t == j) {
                    out.push((j, a));
                }
            }
            succ.push(out);
            i += 1;
        }
        let mut pred = vec![Vec::new(); states.len()];
        for (i, out) in succ.iter().enumerate() {
            for &(j, _) in out {
                pred[j].push(i);
            }
        }
        Ok(Graph {
            features,
            states,
            index,
            succ,
            pred,
        })
    }

    fn state_of(&self, seq: &[u64]) -> usize {
        let st = seq
            .iter()
            .fold(self.features.start(), |st, &a| self.features.step(&st, a));
        self.index[&st]
    }

    fn truth(&self, f: &SeqStatement) -> Vec<bool> {
        let n = self.states.len();
        match f {
            Formula::Atom(a) => self.states.iter().map(|s| self.features.atom(s, a)).collect(),
            Formula::Top => vec![true; n],
            Formula::Bottom => vec![false; n],
            Formula::Not(a) => self.truth(a).into_iter().map(|b| !b).collect(),
            Formula::And(a, b) => pairwise(self.truth(a), self.truth(b), |x, y| x && y),
            Formula::Or(a, b) => pairwise(self.truth(a), self.truth(b), |x, y| x || y),
            Formula::Implies(a, b) => pairwise(self.truth(a), self.truth(b), |x, y| !x || y),
            Formula::Iff(a, b) => pairwise(self.truth(a), self.truth(b), |x, y| x == y),
            Formula::Diamond(a) => self.can_reach(&self.truth(a)),
            Formula::Box(a) => {
                let not_a: Vec<bool> = self.truth(a).into_iter().map(|b| !b).collect();
                self.can_reach(&not_a).into_iter().map(|b| !b).collect()
            }
        }
    }

    fn can_reach(&self, target: &[bool]) -> Vec<bool> {
        let mut out = target.to_vec();
        let mut queue: VecDeque<usize> = (0..out.len()).filter(|&i| out[i]).collect();
        while let Some(j) = queue.pop_front() {
            for &i in &self.pred[j] {
                if !out[i] {
                    out[i] = true;
                    queue.push_back(i);
                }
            }
        }
        out
    }

    /// Numbers to append to move from state `from` to some state in `target`.
    fn path_to(&self, from: usize, target: &[bool]) -> Option<Vec<u64>> {
        let mut back: HashMap<usize, (usize, u64)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = vec![false; self.states.len()];
        seen[from] = true;
        while let Some(i) = queue.pop_front() {
            if target[i] {
                let mut path = Vec::new();
                let mut cur = i;
                while cur != from {
                    let (p, a) = back[&cur];
                    path.push(a);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &(j, a) in &self.succ[i] {
                if !seen[j] {
                    seen[j] = true;
                    back.insert(j, (i, a));
                    queue.push_back(j);
                }
            }
        }
        None
    }
}

fn pairwise(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

// ---------------------------------------------------------------------------

/// Worlds on which defining conditions are checked: `base` followed by any
/// sequence over `alphabet` of length at most `depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    #[serde(default)]
    pub base: Seq,
    pub alphabet: Vec<u64>,
    pub depth: usize,
}

impl Window {
    pub fn new(base: Seq, alphabet: Vec<u64>, depth: usize) -> Self {
        Window { base, alphabet, depth }
    }

    /// Window for a railyard decoder: climbing entries `0..k`, one selector
    /// for each residue `k..k+m`, length up to tree depth + 1 past the base.
    pub fn for_rail(rail: &RailSpec, base: Seq) -> Self {
        let alphabet = (0..(rail.k + rail.m) as u64).collect();
        Window {
            base,
            alphabet,
            depth: rail.tree.depth() + 1,
        }
    }

    pub fn worlds(&self) -> Vec<Seq> {
        let mut out = vec![self.base.clone()];
        let mut layer = vec![self.base.clone()];
        for _ in 0..self.depth {
            let mut next = Vec::new();
            for s in &layer {
                for &a in &self.alphabet {
                    let mut t = s.clone();
                    t.push(a);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl Default for Window {
    fn default() -> Self {
        Window {
            base: Vec::new(),
            alphabet: (0..4).collect(),
            depth: 2,
        }
    }
}

/// The sequence system with a verification window.
pub struct SequenceSystem {
    window: Window,
    graphs: Mutex<HashMap<Features, Arc<Graph>>>,
}

impl fmt::Debug for SequenceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceSystem").field("window", &self.window).finish()
    }
}

impl Default for SequenceSystem {
    fn default() -> Self {
        SequenceSystem::new(Window::default())
    }
}

impl SequenceSystem {
    pub fn new(window: Window) -> Self {
        SequenceSystem {
            window,
            graphs: Mutex::new(HashMap::new()),
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn base(&self) -> &Seq {
        &self.window.base
    }

    fn graph(&self, f: &SeqStatement) -> Result<Arc<Graph>> {
        let features = Features::of(f)?;
        if let Some(g) = self.graphs.lock().expect("graph cache").get(&features) {
            return Ok(g.clone());
        }
        let g = Arc::new(Graph::build(features.clone())?);
        self.graphs.lock().expect("graph cache").insert(features, g.clone());
        Ok(g)
    }

    /// Number of abstract states behind statements over the atoms of `f`.
    pub fn state_count(&self, f: &SeqStatement) -> Result<usize> {
        Ok(self.graph(f)?.states.len())
    }
}

impl System for SequenceSystem {
    type World = Seq;
    type Atom = SeqAtom;

    fn worlds(&self) -> Vec<Seq> {
        self.window.worlds()
    }

    fn accessible(&self, from: &Seq, to: &Seq) -> bool {
        to.starts_with(from)
    }

    fn holds(&self, w: &Seq, f: &SeqStatement) -> Result<bool> {
        let g = self.graph(f)?;
        Ok(g.truth(f)[g.state_of(w)])
    }

    fn holds_all(&self, worlds: &[Seq], f: &SeqStatement) -> Result<Vec<bool>> {
        let g = self.graph(f)?;
        let truth = g.truth(f);
        Ok(worlds.iter().map(|w| truth[g.state_of(w)]).collect())
    }

    fn find_accessible(&self, w: &Seq, f: &SeqStatement) -> Result<Option<Seq>> {
        let g = self.graph(f)?;
        let truth = g.truth(f);
        Ok(g.path_to(g.state_of(w), &truth).map(|tail| {
            let mut out = w.clone();
            out.extend(tail);
            out
        }))
    }
}

/// Railyard labeling of a uniform pre-tree over the sequence system: node
/// `t` is labeled "the sequence decodes to `t`". Returns the labels and the
/// decoder.
pub fn railyard_encoding(tree: &PreTree, offset: usize) -> Result<(Vec<SeqStatement>, Arc<RailSpec>)> {
    let rail = Arc::new(RailSpec::new(tree.clone(), offset)?);
    let labels = (0..tree.world_count())
        .map(|node| {
            Formula::Atom(SeqAtom::RailNode {
                rail: rail.clone(),
                node,
            })
        })
        .collect();
    Ok((labels, rail))
}

pub fn sigma_switches(m: u32) -> Vec<SeqStatement> {
    (0..m).map(|k| Formula::Atom(SeqAtom::SigmaBit(k))).collect()
}
