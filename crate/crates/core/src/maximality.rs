//! Toy theories with decidable consequence, consistency-based possibility
//! and necessity, greedy maximal existential theories and the maximality
//! principle.
//!
//! A toy theory has at most 64 sentences. Its consequence relation is given
//! by a table of admissible models (each a set of sentences): a set is
//! consistent iff some model contains it, and it derives `φ` iff every
//! model containing it contains `φ`. The table is either explicit or
//! generated from nogoods and Horn rules. Verdicts always carry an explicit
//! fragment horizon `K`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kripke::KripkeModel;

pub type SentenceId = usize;

const MAX_SENTENCES: usize = 64;
const MAX_GENERATED: usize = 24;

/// "Fragment `n` refutes `refutes`", a sentence of the universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationToken {
    pub token: SentenceId,
    pub n: usize,
    pub refutes: SentenceId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyTheory {
    names: Vec<String>,
    index: BTreeMap<String, SentenceId>,
    negation: Vec<Option<SentenceId>>,
    models: Vec<u64>,
    fragments: Vec<u64>,
    existential: Vec<SentenceId>,
    persistent: u64,
    tokens: Vec<RefutationToken>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HornRule {
    #[serde(rename = "if")]
    pub premises: Vec<String>,
    pub then: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Rules {
    #[serde(default)]
    pub nogoods: Vec<Vec<String>>,
    #[serde(default)]
    pub horn: Vec<HornRule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenSpec {
    pub name: String,
    pub n: usize,
    pub refutes: String,
}

/// The JSON form of a toy theory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToyTheorySpec {
    pub sentences: Vec<String>,
    #[serde(default)]
    pub negations: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<Rules>,
    pub fragments: Vec<Vec<String>>,
    #[serde(default)]
    pub existential: Vec<String>,
    /// Defaults to the whole existential class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persistent: Option<Vec<String>>,
    #[serde(default)]
    pub tokens: Vec<TokenSpec>,
}

fn bit(i: SentenceId) -> u64 {
    1u64 << i
}

fn members(mask: u64) -> impl Iterator<Item = SentenceId> {
    (0..MAX_SENTENCES).filter(move |&i| mask & bit(i) != 0)
}

impl ToyTheory {
    pub fn from_spec(spec: &ToyTheorySpec) -> Result<Self> {
        let n = spec.sentences.len();
        if n > MAX_SENTENCES {
            return Err(Error::Unsupported(format!("{n} sentences; at most {MAX_SENTENCES}")));
        }
        let mut index = BTreeMap::new();
        for (i, s) in spec.sentences.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::Precondition(format!("sentence `{s}` listed twice")));
            }
        }
        let id = |s: &String| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::Precondition(format!("unknown sentence `{s}`")))
        };
        let set = |v: &[String]| v.iter().try_fold(0u64, |m, s| Ok::<_, Error>(m | bit(id(s)?)));

        let mut negation = vec![None; n];
        for (a, b) in &spec.negations {
            let (a, b) = (id(a)?, id(b)?);
            if a == b || negation[a].is_some_and(|x| x != b) || negation[b].is_some_and(|x| x != a) {
                return Err(Error::Precondition(format!("bad negation pair {a}/{b}")));
            }
            negation[a] = Some(b);
            negation[b] = Some(a);
        }
        let respects_negation = |m: u64| {
            negation
                .iter()
                .enumerate()
                .all(|(a, nb)| nb.is_none_or(|b| (m >> a & 1) != (m >> b & 1)))
        };

        let mut models: Vec<u64> = match (&spec.models, &spec.rules) {
            (Some(table), None) => table.iter().map(|m| set(m)).collect::<Result<_>>()?,
            (None, Some(rules)) => {
                if n > MAX_GENERATED {
                    return Err(Error::Unsupported(format!(
                        "rule-generated tables need at most {MAX_GENERATED} sentences"
                    )));
                }
                let nogoods: Vec<u64> = rules.nogoods.iter().map(|g| set(g)).collect::<Result<_>>()?;
                let horn: Vec<(u64, u64)> = rules
                    .horn
                    .iter()
                    .map(|r| Ok((set(&r.premises)?, bit(id(&r.then)?))))
                    .collect::<Result<_>>()?;
                (0..1u64 << n)
                    .filter(|&m| nogoods.iter().all(|&g| m & g != g))
                    .filter(|&m| horn.iter().all(|&(p, c)| m & p != p || m & c != 0))
                    .filter(|&m| respects_negation(m))
                    .collect()
            }
            _ => return Err(Error::Precondition("give exactly one of `models` or `rules`".into())),
        };
        if let Some(bad) = models.iter().find(|&&m| !respects_negation(m)) {
            return Err(Error::InvalidModel(format!("model {bad:#b} violates a negation pair")));
        }
        models.sort_unstable();
        models.dedup();

        if spec.fragments.is_empty() {
            return Err(Error::Precondition("at least fragment 0 is needed".into()));
        }
        let fragments: Vec<u64> = spec.fragments.iter().map(|f| set(f)).collect::<Result<_>>()?;
        if fragments.windows(2).any(|w| w[0] & w[1] != w[0]) {
            return Err(Error::Precondition("fragments must be nested".into()));
        }
        let existential: Vec<SentenceId> = spec.existential.iter().map(&id).collect::<Result<_>>()?;
        let persistent = match &spec.persistent {
            Some(p) => set(p)?,
            None => existential.iter().fold(0, |m, &e| m | bit(e)),
        };
        let tokens = spec
            .tokens
            .iter()
            .map(|t| {
                Ok(RefutationToken {
                    token: id(&t.name)?,
                    n: t.n,
                    refutes: id(&t.refutes)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ToyTheory {
            names: spec.sentences.clone(),
            index,
            negation,
            models,
            fragments,
            existential,
            persistent,
            tokens,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ToyTheory::from_spec(&serde_json::from_str(text)?)
    }

    pub fn to_spec(&self) -> ToyTheorySpec {
        let names = |m: u64| members(m).map(|i| self.names[i].clone()).collect::<Vec<_>>();
        let mut negations = Vec::new();
        for (a, b) in self.negation.iter().enumerate() {
            if let Some(b) = *b {
                if a < b {
                    negations.push((self.names[a].clone(), self.names[b].clone()));
                }
            }
        }
        ToyTheorySpec {
            sentences: self.names.clone(),
            negations,
            models: Some(self.models.iter().map(|&m| names(m)).collect()),
            rules: None,
            fragments: self.fragments.iter().map(|&f| names(f)).collect(),
            existential: self.existential.iter().map(|&e| self.names[e].clone()).collect(),
            persistent: Some(names(self.persistent)),
            tokens: self
                .tokens
                .iter()
                .map(|t| TokenSpec {
                    name: self.names[t.token].clone(),
                    n: t.n,
                    refutes: self.names[t.refutes].clone(),
                })
                .collect(),
        }
    }

    pub fn sentence_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, s: SentenceId) -> &str {
        &self.names[s]
    }

    pub fn id(&self, name: &str) -> Result<SentenceId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Precondition(format!("unknown sentence `{name}`")))
    }

    pub fn negation(&self, s: SentenceId) -> Option<SentenceId> {
        self.negation.get(s).copied().flatten()
    }

    pub fn existential(&self) -> &[SentenceId] {
        &self.existential
    }

    pub fn is_persistent(&self, s: SentenceId) -> bool {
        self.persistent & bit(s) != 0
    }

    pub fn fragment_count(&self) -> usize {
        self.fragments.len()
    }

    /// Highest usable horizon.
    pub fn max_horizon(&self) -> usize {
        self.fragments.len() - 1
    }

    pub fn fragment(&self, k: usize) -> Vec<SentenceId> {
        members(self.fragments[k]).collect()
    }

    pub fn models(&self) -> &[u64] {
        &self.models
    }

    pub fn consistent(&self, set: u64) -> bool {
        self.models.iter().any(|&m| m & set == set)
    }

    pub fn derives(&self, set: u64, s: SentenceId) -> bool {
        self.models
            .iter()
            .filter(|&&m| m & set == set)
            .all(|&m| m & bit(s) != 0)
    }

    /// Everything `set` derives; for an inconsistent set, every sentence.
    pub fn closure(&self, set: u64) -> u64 {
        let all = if self.names.len() == MAX_SENTENCES {
            u64::MAX
        } else {
            (1u64 << self.names.len()) - 1
        };
        self.models
            .iter()
            .filter(|&&m| m & set == set)
            .fold(all, |acc, &m| acc & m)
    }

    fn e_mask(&self) -> u64 {
        self.existential.iter().fold(0, |m, &e| m | bit(e))
    }

    fn horizon(&self, k: usize) -> Result<()> {
        if k >= self.fragments.len() {
            return Err(Error::Precondition(format!(
                "horizon {k} beyond fragment {}",
                self.max_horizon()
            )));
        }
        Ok(())
    }

    fn sentence(&self, s: SentenceId) -> Result<()> {
        if s >= self.names.len() {
            return Err(Error::Oracle(format!("no sentence {s}")));
        }
        Ok(())
    }

    /// A world from its true sentences, checked to be consistent and closed.
    pub fn world(&self, sentences: impl IntoIterator<Item = SentenceId>) -> Result<WorldTheory> {
        let mut set = 0;
        for s in sentences {
            self.sentence(s)?;
            set |= bit(s);
        }
        if !self.consistent(set) {
            return Err(Error::InvalidModel("world theory is inconsistent".into()));
        }
        if self.closure(set) != set {
            return Err(Error::InvalidModel(
                "world theory is not closed under consequence".into(),
            ));
        }
        Ok(WorldTheory { set })
    }

    pub fn world_by_names(&self, names: &[&str]) -> Result<WorldTheory> {
        let ids: Vec<_> = names.iter().map(|n| self.id(n)).collect::<Result<_>>()?;
        self.world(ids)
    }

    /// The closed worlds of the table's models that contain fragment `k`.
    pub fn worlds_over(&self, k: usize) -> Result<Vec<WorldTheory>> {
        self.horizon(k)?;
        let f = self.fragments[k];
        let mut sets: Vec<u64> = self
            .models
            .iter()
            .filter(|&&m| m & f == f)
            .map(|&m| self.closure(m))
            .collect();
        sets.sort_unstable();
        sets.dedup();
        Ok(sets.into_iter().map(|set| WorldTheory { set }).collect())
    }

    pub fn e_part(&self, w: &WorldTheory) -> u64 {
        w.set & self.e_mask()
    }

    /// Consistent with every fragment `k ≤ K`, the E-part of `w` and `φ`.
    pub fn possible(&self, w: &WorldTheory, phi: SentenceId, horizon: usize) -> Result<bool> {
        self.horizon(horizon)?;
        self.sentence(phi)?;
        let base = self.e_part(w) | bit(phi);
        Ok((0..=horizon).all(|k| self.consistent(self.fragments[k] | base)))
    }

    /// Derived by some fragment `k ≤ K` together with the E-part of `w`.
    pub fn necessary(&self, w: &WorldTheory, phi: SentenceId, horizon: usize) -> Result<bool> {
        self.horizon(horizon)?;
        self.sentence(phi)?;
        let e = self.e_part(w);
        Ok((0..=horizon).any(|k| self.derives(self.fragments[k] | e, phi)))
    }

    /// Necessary already, or some refutation token for `¬φ` with `n ≤ K`
    /// is consistent at every fragment up to `K`. A persistent `φ` serves
    /// as its own token: once true it stays derivable.
    pub fn possibly_necessary(&self, w: &WorldTheory, phi: SentenceId, horizon: usize) -> Result<bool> {
        if self.necessary(w, phi, horizon)? {
            return Ok(true);
        }
        let mut tokens: Vec<SentenceId> = match self.negation(phi) {
            Some(neg) => self
                .tokens
                .iter()
                .filter(|t| t.refutes == neg && t.n <= horizon)
                .map(|t| t.token)
                .collect(),
            None => Vec::new(),
        };
        if self.is_persistent(phi) {
            tokens.push(phi);
        }
        let has_any = self.is_persistent(phi)
            || self
                .negation(phi)
                .is_some_and(|neg| self.tokens.iter().any(|t| t.refutes == neg));
        if !has_any {
            return Err(Error::Unsupported(format!(
                "no refutation tokens for the negation of `{}`",
                self.names[phi]
            )));
        }
        for t in tokens {
            if self.possible(w, t, horizon)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// One greedy pass over `order` starting from `start`, against the top
    /// fragment.
    pub fn greedy_pass(&self, start: u64, order: &[SentenceId]) -> u64 {
        let top = *self.fragments.last().expect("fragment 0 exists");
        order.iter().fold(start, |acc, &s| {
            if self.consistent(top | acc | bit(s)) {
                acc | bit(s)
            } else {
                acc
            }
        })
    }

    /// Adds each E-sentence in `order` when consistent with the top
    /// fragment and what was accepted so far. The result is order-dependent.
    pub fn build_maximal_existential_theory(&self, order: &[SentenceId]) -> Result<MaximalBuild> {
        let top = *self.fragments.last().expect("fragment 0 exists");
        if !self.consistent(top) {
            return Err(Error::InconsistentBase);
        }
        let e = self.e_mask();
        if let Some(&s) = order.iter().find(|&&s| s >= self.names.len() || e & bit(s) == 0) {
            return Err(Error::Precondition(format!("sentence {s} is not existential")));
        }
        let mut accepted = Vec::new();
        let mut rejected = Vec::new();
        let mut acc = 0;
        for &s in order {
            if acc & bit(s) != 0 {
                continue;
            }
            if self.consistent(top | acc | bit(s)) {
                acc |= bit(s);
                accepted.push(s);
            } else {
                rejected.push(s);
            }
        }
        if let Some(&s) = rejected.iter().find(|&&s| self.consistent(top | acc | bit(s))) {
            return Err(Error::Oracle(format!(
                "rejected `{}` is consistent with the result",
                self.names[s]
            )));
        }
        let world = WorldTheory {
            set: self.closure(top | acc),
        };
        Ok(MaximalBuild {
            world,
            accepted,
            rejected,
        })
    }

    /// Whether greedily extending the E-part of `w` adds nothing.
    pub fn is_greedy_fixed_point(&self, w: &WorldTheory) -> bool {
        let e = self.e_part(w);
        self.greedy_pass(e, &self.existential) == e
    }

    /// Flags every listed `σ ∉ w` that is possibly necessary, and reports
    /// whether the E-part of `w` is maximal at horizon `K`.
    pub fn check_maximality_principle(
        &self,
        w: &WorldTheory,
        sentences: &[SentenceId],
        horizon: usize,
    ) -> Result<MaximalityReport> {
        self.horizon(horizon)?;
        let e = self.e_part(w);
        if !(0..=horizon).all(|k| self.consistent(self.fragments[k] | e)) {
            return Err(Error::Precondition(
                "the world's E-part is inconsistent with the fragments".into(),
            ));
        }
        let mut violations = Vec::new();
        for &s in sentences {
            if !w.contains(s) && self.possibly_necessary(w, s, horizon)? {
                violations.push(s);
            }
        }
        let mut e_part_maximal = true;
        for &s in &self.existential {
            if !w.contains(s) && self.possible(w, s, horizon)? {
                e_part_maximal = false;
            }
        }
        let covers_e = self.existential.iter().all(|e| sentences.contains(e));
        let all_persistent = self.existential.iter().all(|&e| self.is_persistent(e));
        let passed = violations.is_empty();
        Ok(MaximalityReport {
            horizon,
            checked: sentences.len(),
            violations: violations.iter().map(|&s| self.names[s].clone()).collect(),
            passed,
            e_part_maximal,
            equivalence_holds: (covers_e && all_persistent).then_some(passed == e_part_maximal),
        })
    }

    /// Worlds as a Kripke model: `w` sees `v` iff the E-part of `w` is
    /// contained in that of `v`; each sentence is a variable of its name.
    pub fn potentialist_model(&self, worlds: &[WorldTheory]) -> Result<KripkeModel> {
        let mut model = KripkeModel::new(worlds.len())?;
        for (i, w) in worlds.iter().enumerate() {
            for (j, v) in worlds.iter().enumerate() {
                let (ew, ev) = (self.e_part(w), self.e_part(v));
                if ew & ev == ew {
                    model.add_edge(i, j)?;
                }
            }
        }
        for (s, name) in self.names.iter().enumerate() {
            model.declare_var(name);
            for (i, w) in worlds.iter().enumerate() {
                if w.contains(s) {
                    model.set_var(name, i, true)?;
                }
            }
        }
        Ok(model)
    }
}

/// The sentences true at a toy world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldTheory {
    set: u64,
}

impl WorldTheory {
    pub fn contains(&self, s: SentenceId) -> bool {
        s < MAX_SENTENCES && self.set & bit(s) != 0
    }

    pub fn members(&self) -> Vec<SentenceId> {
        members(self.set).collect()
    }

    pub fn mask(&self) -> u64 {
        self.set
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalBuild {
    pub world: WorldTheory,
    pub accepted: Vec<SentenceId>,
    pub rejected: Vec<SentenceId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalityReport {
    pub horizon: usize,
    pub checked: usize,
    pub violations: Vec<String>,
    pub passed: bool,
    pub e_part_maximal: bool,
    /// Whether passing coincides with maximality; `None` unless the checked
    /// sentences cover a wholly persistent existential class.
    pub equivalence_holds: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(json: &str) -> ToyTheory {
        ToyTheory::from_json(json).unwrap()
    }

    // a, b existential and mutually exclusive; c is refuted by fragment 2.
    fn four() -> ToyTheory {
        toy(r#"{
            "sentences": ["a", "b", "c", "nc"],
            "negations": [["c", "nc"]],
            "rules": {"nogoods": [["a", "b"]]},
            "fragments": [[], [], ["nc"]],
            "existential": ["a", "b"]
        }"#)
    }

    #[test]
    fn horizon_sensitivity() {
        let t = four();
        let w = t.world([]).unwrap();
        let c = t.id("c").unwrap();
        assert!(t.possible(&w, c, 0).unwrap());
        assert!(t.possible(&w, c, 1).unwrap());
        assert!(!t.possible(&w, c, 2).unwrap());
        assert!(t.possible(&w, 9, 0).is_err());
        assert!(t.possible(&w, c, 3).is_err());
    }

    #[test]
    fn possible_and_necessary_examples() {
        let t = four();
        let a = t.id("a").unwrap();
        let w = t.worlds_over(0).unwrap().into_iter().find(|w| w.contains(a)).unwrap();
        assert!(t.possible(&w, a, 2).unwrap());
        // persistence: a true existential sentence is necessary
        assert!(t.necessary(&w, a, 0).unwrap());
        assert!(!t.possible(&w, t.id("b").unwrap(), 0).unwrap());
        let nc = t.id("nc").unwrap();
        assert!(t.necessary(&w, nc, 2).unwrap());
        assert!(!t.necessary(&w, nc, 1).unwrap());
    }

    #[test]
    fn duality_over_the_exhaustive_table() {
        let t = four();
        let (c, nc) = (t.id("c").unwrap(), t.id("nc").unwrap());
        for w in t.worlds_over(0).unwrap() {
            for k in 0..=2 {
                for (p, n) in [(c, nc), (nc, c)] {
                    assert_eq!(t.necessary(&w, p, k).unwrap(), !t.possible(&w, n, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn greedy_is_order_dependent() {
        let t = four();
        let (a, b) = (t.id("a").unwrap(), t.id("b").unwrap());
        let ab = t.build_maximal_existential_theory(&[a, b]).unwrap();
        assert_eq!((ab.accepted.clone(), ab.rejected.clone()), (vec![a], vec![b]));
        let ba = t.build_maximal_existential_theory(&[b, a]).unwrap();
        assert_eq!(ba.accepted, vec![b]);
        for out in [ab, ba] {
            assert!(t.is_greedy_fixed_point(&out.world));
            let r = t.check_maximality_principle(&out.world, t.existential(), 2).unwrap();
            assert!(r.passed && r.e_part_maximal);
            assert_eq!(r.equivalence_holds, Some(true));
        }
        let empty = toy(r#"{"sentences":["x"],"models":[[],["x"]],"fragments":[[]]}"#);
        assert_eq!(
            empty.build_maximal_existential_theory(&[]).unwrap().world.members(),
            Vec::<usize>::new()
        );
    }

    #[test]
    fn missing_consistent_sentence_is_a_violation() {
        let t = toy(r#"{
            "sentences": ["a", "b", "c"],
            "rules": {"nogoods": [["a", "b"]]},
            "fragments": [[]],
            "existential": ["a", "b", "c"]
        }"#);
        let w = t.world_by_names(&["a"]).unwrap();
        let r = t.check_maximality_principle(&w, t.existential(), 0).unwrap();
        assert_eq!(r.violations, vec!["c".to_string()]);
        assert!(!r.passed && !r.e_part_maximal);
        assert_eq!(r.equivalence_holds, Some(true));
    }

    #[test]
    fn fragment_axioms_never_violate() {
        let t = toy(
            r#"{"sentences":["ax","s"],"models":[["ax"],["ax","s"]],"fragments":[["ax"]],"existential":["s"],"persistent":["ax","s"]}"#,
        );
        let ax = t.id("ax").unwrap();
        for w in t.worlds_over(0).unwrap() {
            let r = t.check_maximality_principle(&w, &[ax], 0).unwrap();
            assert!(r.passed);
        }
    }

    #[test]
    fn refutation_tokens() {
        let t = toy(r#"{
            "sentences": ["p", "np", "r0", "e"],
            "negations": [["p", "np"]],
            "models": [["np"], ["p"], ["p", "r0"], ["np", "e"]],
            "fragments": [[], []],
            "existential": ["e"],
            "tokens": [{"name": "r0", "n": 0, "refutes": "np"}]
        }"#);
        let (p, np) = (t.id("p").unwrap(), t.id("np").unwrap());
        let w = t.world_by_names(&["np"]).unwrap();
        assert!(t.possible(&w, p, 1).unwrap());
        assert!(t.possibly_necessary(&w, p, 1).unwrap());
        // no tokens for the negation of np
        assert!(matches!(t.possibly_necessary(&w, np, 1), Err(Error::Unsupported(_))));
        // a world whose E-part rules the token out
        let we = t.world_by_names(&["np", "e"]).unwrap();
        assert!(!t.possible(&we, p, 1).unwrap());
        assert!(!t.possibly_necessary(&we, p, 1).unwrap());
    }

    #[test]
    fn possible_but_not_possibly_necessary() {
        let t = toy(r#"{
            "sentences": ["p", "np", "r0", "r1"],
            "negations": [["p", "np"]],
            "models": [["np"], ["p"]],
            "fragments": [[], []],
            "tokens": [{"name": "r0", "n": 0, "refutes": "np"}, {"name": "r1", "n": 1, "refutes": "np"}]
        }"#);
        let p = t.id("p").unwrap();
        let w = t.world_by_names(&["np"]).unwrap();
        assert!(t.possible(&w, p, 1).unwrap());
        assert!(!t.possibly_necessary(&w, p, 1).unwrap());
    }

    #[test]
    fn persistent_possible_is_possibly_necessary() {
        let t = four();
        let w = t
            .worlds_over(2)
            .unwrap()
            .into_iter()
            .find(|w| t.e_part(w) == 0)
            .unwrap();
        for &s in t.existential() {
            assert!(t.possible(&w, s, 2).unwrap());
            assert!(t.possibly_necessary(&w, s, 2).unwrap());
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ToyTheory::from_json(r#"{"sentences":["a"],"models":[["a"]],"fragments":[]}"#).is_err());
        assert!(ToyTheory::from_json(r#"{"sentences":["a","b"],"models":[["a"]],"fragments":[["a"],["b"]]}"#).is_err());
        assert!(ToyTheory::from_json(r#"{"sentences":["a"],"fragments":[[]]}"#).is_err());
        assert!(ToyTheory::from_json(
            r#"{"sentences":["a","na"],"negations":[["a","na"]],"models":[["a","na"]],"fragments":[[]]}"#
        )
        .is_err());
        let bad = toy(r#"{"sentences":["a"],"models":[[]],"fragments":[["a"]],"existential":["a"]}"#);
        assert!(matches!(
            bad.build_maximal_existential_theory(&[]),
            Err(Error::InconsistentBase)
        ));
        let t = four();
        assert!(t.world_by_names(&["a", "b"]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = four();
        let back = ToyTheory::from_spec(&t.to_spec()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn potentialist_model_from_worlds() {
        let t = four();
        let worlds = t.worlds_over(0).unwrap();
        let m = t.potentialist_model(&worlds).unwrap();
        let classes = m.frame_class_of();
        assert!(classes.reflexive && classes.transitive);
        let f = crate::formula::parse("a -> []a").unwrap();
        assert!(m.worlds().all(|w| m.eval(w, &f).unwrap()));
    }
}
