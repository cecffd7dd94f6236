//! The staged universal algorithm over a pluggable fragment oracle.
//!
//! Stage `n` succeeds when the oracle's proof search turns up a proof, in
//! fragment `k_n` strictly below every earlier `k_i`, that the program does
//! not enumerate some batch `s` at stage `n` as its last successful stage;
//! the batch is then released. Because `k_n` strictly descends, a run has
//! at most `fragment_count` successful stages.
//!
//! The oracle exposes its proof search as a stream: `proof(i)` is what step
//! `i` of the search yields. Every stage scans the stream from the start,
//! one budget unit per step, and takes the first acceptable certificate.
//! The program id is an explicit parameter of every target statement, in
//! place of a literal self-referential construction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// "Program `program` does not enumerate `batch` (or `number`, for the
/// one-at-a-time variant) at stage `stage` as its last successful stage."
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetStatement {
    Batch {
        program: u64,
        stage: usize,
        batch: Vec<u64>,
    },
    Single {
        program: u64,
        stage: usize,
        number: u64,
    },
}

impl TargetStatement {
    pub fn program(&self) -> u64 {
        match self {
            TargetStatement::Batch { program, .. } | TargetStatement::Single { program, .. } => *program,
        }
    }

    pub fn stage(&self) -> usize {
        match self {
            TargetStatement::Batch { stage, .. } | TargetStatement::Single { stage, .. } => *stage,
        }
    }

    /// The numbers released when this statement is proved.
    pub fn released(&self) -> Vec<u64> {
        match self {
            TargetStatement::Batch { batch, .. } => batch.clone(),
            TargetStatement::Single { number, .. } => vec![*number],
        }
    }
}

impl fmt::Display for TargetStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetStatement::Batch { program, stage, batch } => {
                write!(
                    f,
                    "not: program {program} enumerates {batch:?} at stage {stage} as its last successful stage"
                )
            }
            TargetStatement::Single { program, stage, number } => {
                write!(
                    f,
                    "not: program {program} enumerates {number} at stage {stage} as its next and last number"
                )
            }
        }
    }
}

/// A proof of `target` in fragment `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub target: TargetStatement,
}

pub trait FragmentOracle {
    /// Fragments are indexed `1..=fragment_count`.
    fn fragment_count(&self) -> usize;

    /// What step `index` of the proof search yields.
    fn proof(&self, index: u64) -> Option<Certificate>;

    /// A step count after which the search yields nothing more, if known.
    fn exhausted_after(&self) -> Option<u64>;

    /// Deterministic certificate check; a certificate valid in fragment `k`
    /// stays valid in larger fragments.
    fn check(&self, cert: &Certificate) -> bool;

    /// Searches `effort` steps for a proof of `target` in fragment `k`.
    fn find_proof(&self, k: usize, target: &TargetStatement, effort: u64) -> Option<Certificate> {
        let end = self.exhausted_after().map_or(effort, |e| e.min(effort));
        (0..end)
            .filter_map(|i| self.proof(i))
            .find(|c| c.k <= k && &c.target == target && self.check(c))
    }
}

/// Proof search that never finds anything, as in the standard model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeverProves {
    pub fragment_count: usize,
}

impl FragmentOracle for NeverProves {
    fn fragment_count(&self) -> usize {
        self.fragment_count
    }

    fn proof(&self, _index: u64) -> Option<Certificate> {
        None
    }

    fn exhausted_after(&self) -> Option<u64> {
        None
    }

    fn check(&self, _cert: &Certificate) -> bool {
        false
    }
}

/// One scripted grant: a proof for `stage` in fragment `k`, of a batch or
/// of a single number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub stage: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number: Option<u64>,
}

/// An oracle whose proof stream is a fixed list of grants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptedOracle {
    fragment_count: usize,
    program: u64,
    certs: Vec<Certificate>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScriptFile {
    Entries(Vec<ScriptEntry>),
    Full {
        #[serde(default)]
        fragment_count: Option<usize>,
        #[serde(default)]
        program: u64,
        #[serde(default)]
        entries: Vec<ScriptEntry>,
    },
}

impl ScriptedOracle {
    pub fn new(fragment_count: usize, program: u64, entries: &[ScriptEntry]) -> Result<Self> {
        let certs = entries
            .iter()
            .map(|e| {
                let target = match (&e.batch, e.number) {
                    (Some(b), None) => TargetStatement::Batch {
                        program,
                        stage: e.stage,
                        batch: b.clone(),
                    },
                    (None, Some(n)) => TargetStatement::Single {
                        program,
                        stage: e.stage,
                        number: n,
                    },
                    _ => {
                        return Err(Error::Oracle(format!(
                            "script entry for stage {} needs exactly one of `batch` or `number`",
                            e.stage
                        )))
                    }
                };
                Ok(Certificate { k: e.k, target })
            })
            .collect::<Result<_>>()?;
        Ok(ScriptedOracle {
            fragment_count,
            program,
            certs,
        })
    }

    /// Reads `[{"stage":0,"k":5,"batch":[7,7]}, ...]` or
    /// `{"fragment_count": 10, "program": 0, "entries": [...]}`. Without an
    /// explicit count, fragments run up to the largest scripted `k`.
    pub fn from_json(text: &str) -> Result<Self> {
        let (count, program, entries) = match serde_json::from_str::<ScriptFile>(text)? {
            ScriptFile::Entries(e) => (None, 0, e),
            ScriptFile::Full {
                fragment_count,
                program,
                entries,
            } => (fragment_count, program, entries),
        };
        let count = count.unwrap_or_else(|| entries.iter().map(|e| e.k).max().unwrap_or(0));
        ScriptedOracle::new(count, program, &entries)
    }

    pub fn to_json(&self) -> String {
        let entries = self.entries();
        serde_json::to_string(&ScriptFile::Full {
            fragment_count: Some(self.fragment_count),
            program: self.program,
            entries,
        })
        .expect("script serializes")
    }

    pub fn program(&self) -> u64 {
        self.program
    }

    pub fn entries(&self) -> Vec<ScriptEntry> {
        self.certs
            .iter()
            .map(|c| match &c.target {
                TargetStatement::Batch { stage, batch, .. } => ScriptEntry {
                    stage: *stage,
                    k: c.k,
                    batch: Some(batch.clone()),
                    number: None,
                },
                TargetStatement::Single { stage, number, .. } => ScriptEntry {
                    stage: *stage,
                    k: c.k,
                    batch: None,
                    number: Some(*number),
                },
            })
            .collect()
    }

    /// This script followed by the grants of `more`.
    pub fn then(&self, more: &ScriptedOracle) -> ScriptedOracle {
        let mut certs = self.certs.clone();
        certs.extend(more.certs.iter().cloned());
        ScriptedOracle {
            fragment_count: self.fragment_count.max(more.fragment_count),
            program: self.program,
            certs,
        }
    }
}

impl FragmentOracle for ScriptedOracle {
    fn fragment_count(&self) -> usize {
        self.fragment_count
    }

    fn proof(&self, index: u64) -> Option<Certificate> {
        usize::try_from(index).ok().and_then(|i| self.certs.get(i)).cloned()
    }

    fn exhausted_after(&self) -> Option<u64> {
        Some(self.certs.len() as u64)
    }

    fn check(&self, cert: &Certificate) -> bool {
        cert.k >= 1 && cert.k <= self.fragment_count && self.certs.contains(cert)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub k: usize,
    pub batch: Vec<u64>,
    pub certificate: Certificate,
}

/// A run's trace.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UAState {
    pub enumerated: Vec<u64>,
    pub stages: Vec<StageRecord>,
    /// Certificates for the current stage turned down because their
    /// fragment was not below every earlier one.
    pub rejected: Vec<Certificate>,
    /// The run stopped because the step budget ran out, not because the
    /// proof search was exhausted.
    pub halted_at_budget: bool,
    pub steps: u64,
}

impl UAState {
    /// Every later `k` must lie strictly below this.
    pub fn k_ceiling(&self, fragment_count: usize) -> usize {
        self.stages.last().map_or(fragment_count + 1, |s| s.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Batches,
    OneAtATime,
}

fn run(oracle: &dyn FragmentOracle, program: u64, budget: u64, mode: Mode) -> UAState {
    let mut state = UAState::default();
    let mut ceiling = oracle.fragment_count() + 1;
    let mut index = 0u64;
    loop {
        let stage = state.stages.len();
        if ceiling <= 1 || oracle.exhausted_after().is_some_and(|e| index >= e) {
            break;
        }
        if state.steps >= budget {
            state.halted_at_budget = true;
            break;
        }
        state.steps += 1;
        let Some(cert) = oracle.proof(index) else {
            index += 1;
            continue;
        };
        index += 1;
        let kind_ok = matches!(
            (&cert.target, mode),
            (TargetStatement::Batch { .. }, Mode::Batches) | (TargetStatement::Single { .. }, Mode::OneAtATime)
        );
        if !kind_ok || cert.target.program() != program || cert.target.stage() != stage || !oracle.check(&cert) {
            continue;
        }
        if cert.k < 1 || cert.k >= ceiling {
            state.rejected.push(cert);
            continue;
        }
        let batch = cert.target.released();
        state.enumerated.extend(&batch);
        ceiling = cert.k;
        state.stages.push(StageRecord {
            stage,
            k: cert.k,
            batch,
            certificate: cert,
        });
        index = 0;
    }
    state
}

pub fn run_universal(oracle: &dyn FragmentOracle, program: u64, budget: u64) -> UAState {
    run(oracle, program, budget, Mode::Batches)
}

/// The variant releasing one number per successful stage.
pub fn run_one_at_a_time(oracle: &dyn FragmentOracle, program: u64, budget: u64) -> UAState {
    run(oracle, program, budget, Mode::OneAtATime)
}

/// Checks the trace laws: strictly descending fragments within range,
/// stage numbering, batch concatenation and certificate replay.
pub fn verify_trace(state: &UAState, oracle: &dyn FragmentOracle) -> Result<()> {
    let mut ceiling = oracle.fragment_count() + 1;
    let mut flat: Vec<u64> = Vec::new();
    for (n, s) in state.stages.iter().enumerate() {
        if s.stage != n {
            return Err(Error::Oracle(format!("stage {} recorded at position {n}", s.stage)));
        }
        if s.k < 1 || s.k >= ceiling {
            return Err(Error::Oracle(format!("stage {n}: k = {} not below {ceiling}", s.k)));
        }
        if s.certificate.k != s.k || s.certificate.target.released() != s.batch {
            return Err(Error::Oracle(format!(
                "stage {n}: certificate does not match the record"
            )));
        }
        if !oracle.check(&s.certificate) {
            return Err(Error::Oracle(format!("stage {n}: certificate fails the oracle check")));
        }
        ceiling = s.k;
        flat.extend(&s.batch);
    }
    if flat != state.enumerated {
        return Err(Error::Oracle(
            "enumerated sequence is not the concatenation of the batches".into(),
        ));
    }
    if state.stages.len() > oracle.fragment_count() {
        return Err(Error::Oracle("more successful stages than fragments".into()));
    }
    Ok(())
}

/// Concatenation of the sequences coded by the numbers released one at a
/// time.
pub fn derive_concatenated(state: &UAState, decode: impl Fn(u64) -> Vec<u64>) -> Vec<u64> {
    state.enumerated.iter().flat_map(|&a| decode(a)).collect()
}

/// Codes a finite sequence as a number: a leading 1 bit, then for each
/// entry `e`, `e` one bits and a zero.
pub fn encode_sequence(seq: &[u64]) -> Result<u64> {
    let bits: u64 = 1 + seq.iter().map(|&e| e.saturating_add(1)).fold(0u64, u64::saturating_add);
    if bits > 63 {
        return Err(Error::Bounds(format!("sequence {seq:?} needs {bits} bits")));
    }
    let mut code = 1u64;
    for &e in seq {
        for _ in 0..e {
            code = code << 1 | 1;
        }
        code <<= 1;
    }
    Ok(code)
}

/// Inverse of [`encode_sequence`]; `0` and `1` code the empty sequence and
/// trailing ones without a closing zero are dropped.
pub fn decode_sequence(code: u64) -> Vec<u64> {
    if code <= 1 {
        return Vec::new();
    }
    let top = 63 - code.leading_zeros();
    let mut out = Vec::new();
    let mut run = 0;
    for i in (0..top).rev() {
        if code >> i & 1 == 1 {
            run += 1;
        } else {
            out.push(run);
            run = 0;
        }
    }
    out
}

fn extension_budget(script: &ScriptedOracle, stages: usize) -> u64 {
    (script.certs.len() as u64 + 1) * (stages as u64 + 2)
}

fn extend_with(
    current: &UAState,
    script: &ScriptedOracle,
    entry: impl FnOnce(usize, usize) -> ScriptEntry,
) -> Result<ScriptedOracle> {
    let count = script.fragment_count();
    // stay at or below every grant already scripted for the following
    // stage, so none of them fires after the new one
    let next = current.stages.len() + 1;
    let blocking = script
        .certs
        .iter()
        .filter(|c| c.target.stage() == next)
        .map(|c| c.k)
        .min();
    let k = current
        .k_ceiling(count)
        .saturating_sub(1)
        .min(blocking.unwrap_or(usize::MAX));
    if k < 1 {
        return Err(Error::BudgetExhausted(count));
    }
    ScriptedOracle::new(count, script.program(), &[entry(current.stages.len(), k)])
}

/// Grants continuing `script` so that a rerun enumerates exactly `target`:
/// one more stage, in the largest fragment below the last one used that no
/// scripted grant for the stage after it undercuts. Verified by rerunning
/// the combined script.
pub fn script_extension(current: &UAState, script: &ScriptedOracle, target: &[u64]) -> Result<ScriptedOracle> {
    let Some(tail) = target.strip_prefix(current.enumerated.as_slice()) else {
        return Err(Error::Precondition(format!(
            "target {target:?} does not extend {:?}",
            current.enumerated
        )));
    };
    if tail.is_empty() {
        return ScriptedOracle::new(script.fragment_count(), script.program(), &[]);
    }
    let ext = extend_with(current, script, |stage, k| ScriptEntry {
        stage,
        k,
        batch: Some(tail.to_vec()),
        number: None,
    })?;
    let combined = script.then(&ext);
    let rerun = run_universal(
        &combined,
        script.program(),
        extension_budget(&combined, current.stages.len()),
    );
    if rerun.enumerated != target || rerun.halted_at_budget {
        return Err(Error::Oracle(format!(
            "rerun enumerated {:?}, not {target:?}",
            rerun.enumerated
        )));
    }
    Ok(ext)
}

/// As [`script_extension`] for the one-at-a-time variant, where `target`
/// is the derived concatenated sequence: one more number coding the tail.
pub fn script_extension_one_at_a_time(
    current: &UAState,
    script: &ScriptedOracle,
    target: &[u64],
) -> Result<ScriptedOracle> {
    let derived = derive_concatenated(current, decode_sequence);
    let Some(tail) = target.strip_prefix(derived.as_slice()) else {
        return Err(Error::Precondition(format!(
            "target {target:?} does not extend {derived:?}"
        )));
    };
    if tail.is_empty() {
        return ScriptedOracle::new(script.fragment_count(), script.program(), &[]);
    }
    let code = encode_sequence(tail)?;
    let ext = extend_with(current, script, |stage, k| ScriptEntry {
        stage,
        k,
        batch: None,
        number: Some(code),
    })?;
    let combined = script.then(&ext);
    let rerun = run_one_at_a_time(
        &combined,
        script.program(),
        extension_budget(&combined, current.stages.len()),
    );
    if derive_concatenated(&rerun, decode_sequence) != target || rerun.halted_at_budget {
        return Err(Error::Oracle(format!("rerun does not derive {target:?}")));
    }
    Ok(ext)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(stage: usize, k: usize, b: &[u64]) -> ScriptEntry {
        ScriptEntry {
            stage,
            k,
            batch: Some(b.to_vec()),
            number: None,
        }
    }

    fn single(stage: usize, k: usize, n: u64) -> ScriptEntry {
        ScriptEntry {
            stage,
            k,
            batch: None,
            number: Some(n),
        }
    }

    #[test]
    fn never_proving_enumerates_nothing() {
        let s = run_universal(&NeverProves { fragment_count: 10 }, 0, 1000);
        assert!(s.enumerated.is_empty() && s.stages.is_empty());
        assert!(s.halted_at_budget);
        assert_eq!(s.steps, 1000);
        assert!(run_one_at_a_time(&NeverProves { fragment_count: 3 }, 0, 50)
            .enumerated
            .is_empty());
    }

    #[test]
    fn single_grant() {
        let o = ScriptedOracle::new(10, 0, &[batch(0, 5, &[7, 7])]).unwrap();
        let s = run_universal(&o, 0, 100);
        assert_eq!(s.enumerated, vec![7, 7]);
        assert_eq!(s.stages.len(), 1);
        assert_eq!(
            (s.stages[0].stage, s.stages[0].k, s.stages[0].batch.clone()),
            (0, 5, vec![7, 7])
        );
        assert!(!s.halted_at_budget);
        verify_trace(&s, &o).unwrap();
    }

    #[test]
    fn repeated_fragment_is_rejected() {
        let o = ScriptedOracle::new(10, 0, &[batch(0, 5, &[7, 7]), batch(1, 5, &[1])]).unwrap();
        let s = run_universal(&o, 0, 100);
        assert_eq!(s.enumerated, vec![7, 7]);
        assert_eq!(s.rejected.len(), 1);
        verify_trace(&s, &o).unwrap();
    }

    #[test]
    fn one_at_a_time_examples() {
        let o = ScriptedOracle::new(10, 0, &[single(0, 9, 4), single(1, 3, 2)]).unwrap();
        assert_eq!(run_one_at_a_time(&o, 0, 100).enumerated, vec![4, 2]);
        let o = ScriptedOracle::new(10, 0, &[single(0, 9, 4), single(1, 9, 2)]).unwrap();
        assert_eq!(run_one_at_a_time(&o, 0, 100).enumerated, vec![4]);
        // batch grants do not count for the one-at-a-time variant
        let o = ScriptedOracle::new(10, 0, &[batch(0, 9, &[4])]).unwrap();
        assert!(run_one_at_a_time(&o, 0, 100).enumerated.is_empty());
    }

    #[test]
    fn other_programs_and_stages_are_ignored() {
        let o = ScriptedOracle::new(10, 3, &[batch(1, 5, &[1]), batch(0, 6, &[2])]).unwrap();
        assert!(run_universal(&o, 0, 100).enumerated.is_empty());
        assert_eq!(run_universal(&o, 3, 100).enumerated, vec![2, 1]);
    }

    #[test]
    fn concatenation_examples() {
        let empty = UAState::default();
        assert!(derive_concatenated(&empty, decode_sequence).is_empty());
        let mut s = UAState::default();
        s.enumerated = vec![10];
        assert_eq!(derive_concatenated(&s, |_| vec![3, 1]), vec![3, 1]);
        s.enumerated = vec![1, 2];
        assert_eq!(
            derive_concatenated(&s, |a| if a == 1 { vec![3] } else { vec![] }),
            vec![3]
        );
    }

    #[test]
    fn sequence_codes_round_trip() {
        for seq in [vec![], vec![0], vec![3, 1], vec![0, 0, 7], vec![7; 6]] {
            assert_eq!(decode_sequence(encode_sequence(&seq).unwrap()), seq);
        }
        assert!(encode_sequence(&[40, 40]).is_err());
    }

    #[test]
    fn extension_examples() {
        let o = ScriptedOracle::new(10, 0, &[]).unwrap();
        let s = run_universal(&o, 0, 10);
        let ext = script_extension(&s, &o, &[1, 2, 3]).unwrap();
        assert_eq!(ext.entries().len(), 1);
        assert_eq!(run_universal(&o.then(&ext), 0, 100).enumerated, vec![1, 2, 3]);
        assert!(script_extension(&s, &o, &[]).unwrap().entries().is_empty());

        let used = ScriptedOracle::new(10, 0, &[batch(0, 1, &[5])]).unwrap();
        let s = run_universal(&used, 0, 10);
        assert!(script_extension(&s, &used, &[5]).unwrap().entries().is_empty());
        assert!(matches!(
            script_extension(&s, &used, &[5, 6]),
            Err(Error::BudgetExhausted(_))
        ));
        assert!(script_extension(&s, &used, &[6]).is_err());
    }

    #[test]
    fn extension_stays_below_later_grants() {
        let o = ScriptedOracle::new(10, 0, &[batch(0, 9, &[1]), batch(2, 4, &[8])]).unwrap();
        let s = run_universal(&o, 0, 100);
        assert_eq!(s.enumerated, vec![1]);
        let ext = script_extension(&s, &o, &[1, 2]).unwrap();
        assert_eq!(ext.entries()[0].k, 4);
        assert_eq!(run_universal(&o.then(&ext), 0, 100).enumerated, vec![1, 2]);
    }

    #[test]
    fn one_at_a_time_extension() {
        let o = ScriptedOracle::new(4, 0, &[single(0, 4, encode_sequence(&[2]).unwrap())]).unwrap();
        let s = run_one_at_a_time(&o, 0, 10);
        let ext = script_extension_one_at_a_time(&s, &o, &[2, 0, 5]).unwrap();
        let rerun = run_one_at_a_time(&o.then(&ext), 0, 100);
        assert_eq!(derive_concatenated(&rerun, decode_sequence), vec![2, 0, 5]);
    }

    #[test]
    fn find_proof_scans_the_stream() {
        let o = ScriptedOracle::new(10, 0, &[batch(0, 5, &[7])]).unwrap();
        let t = TargetStatement::Batch {
            program: 0,
            stage: 0,
            batch: vec![7],
        };
        assert!(o.find_proof(5, &t, 10).is_some());
        assert!(o.find_proof(4, &t, 10).is_none());
        assert!(o.find_proof(9, &t, 0).is_none());
    }

    #[test]
    fn scripts_load_from_json() {
        let o = ScriptedOracle::from_json(r#"[{"stage":0,"k":5,"batch":[7,7]}]"#).unwrap();
        assert_eq!(o.fragment_count(), 5);
        assert_eq!(run_universal(&o, 0, 10).enumerated, vec![7, 7]);
        let o2 = ScriptedOracle::from_json(&o.to_json()).unwrap();
        assert_eq!(o2, o);
        assert!(ScriptedOracle::from_json(r#"[{"stage":0,"k":5}]"#).is_err());
        let trace = serde_json::to_string(&run_universal(&o, 0, 10)).unwrap();
        let back: UAState = serde_json::from_str(&trace).unwrap();
        assert_eq!(back.enumerated, vec![7, 7]);
    }

    #[test]
    fn runs_are_deterministic() {
        let o = ScriptedOracle::new(8, 0, &[batch(0, 7, &[1]), batch(1, 8, &[2]), batch(1, 2, &[3])]).unwrap();
        assert_eq!(run_universal(&o, 0, 50), run_universal(&o, 0, 50));
    }
}
