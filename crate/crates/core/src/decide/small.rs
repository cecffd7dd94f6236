//! Canonical small countermodels: rooted frames of a class on at most
//! [`MAX_WORLDS`] worlds, up to isomorphism, ordered by world count and then
//! by least adjacency code.

use std::sync::OnceLock;

use itertools::Itertools;

use super::{Countermodel, TheoryId};
use crate::formula::ModalFormula;
use crate::kripke::KripkeModel;

pub const MAX_WORLDS: usize = 4;
/// Largest `variables × worlds` for which all valuations are tried.
const MAX_VALUATION_BITS: usize = 16;

/// Row-major adjacency bits, minimized over all relabelings.
pub fn canonical_code(m: &KripkeModel) -> Vec<bool> {
    let n = m.world_count();
    (0..n)
        .permutations(n)
        .map(|p| {
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| m.accessible(p[i], p[j]))
                .collect_vec()
        })
        .min()
        .unwrap_or_default()
}

fn frame_from_code(n: usize, code: &[bool]) -> KripkeModel {
    let edges = (0..n * n).filter(|&k| code[k]).map(|k| (k / n, k % n));
    KripkeModel::from_edges(n, edges).expect("edges within range")
}

/// Rooted reflexive-transitive frames on up to [`MAX_WORLDS`] worlds, one
/// per isomorphism class, in canonical order.
pub fn rooted_preorders() -> &'static [KripkeModel] {
    static FRAMES: OnceLock<Vec<KripkeModel>> = OnceLock::new();
    FRAMES.get_or_init(|| {
        let mut out = Vec::new();
        for n in 1..=MAX_WORLDS {
            let off: Vec<(usize, usize)> = (0..n).cartesian_product(0..n).filter(|(a, b)| a != b).collect();
            let mut codes = Vec::new();
            for mask in 0u32..1 << off.len() {
                let edges = (0..n).map(|w| (w, w)).chain(
                    off.iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &e)| e),
                );
                let m = KripkeModel::from_edges(n, edges).expect("edges within range");
                let c = m.frame_class_of();
                let rooted = m.reachability().iter().any(|row| row.iter().all(|&r| r));
                if c.transitive && rooted {
                    codes.push(canonical_code(&m));
                }
            }
            codes.sort();
            codes.dedup();
            out.extend(codes.iter().map(|c| frame_from_code(n, c)));
        }
        out
    })
}

/// The first small frame of the theory's class (pre-trees for S4) with the
/// first valuation refuting `f` at a world that sees every world.
pub fn smallest_countermodel(theory: TheoryId, f: &ModalFormula) -> Option<Countermodel> {
    let vars: Vec<&String> = f.atoms().into_iter().collect();
    for frame in rooted_preorders() {
        let n = frame.world_count();
        if vars.len() * n > MAX_VALUATION_BITS {
            break;
        }
        let classes = frame.frame_class_of();
        if !theory.frame_in_class(&classes) || (theory == TheoryId::S4 && classes.pretree.is_none()) {
            continue;
        }
        let reach = frame.reachability();
        let roots = (0..n).filter(|&w| reach[w].iter().all(|&r| r)).collect_vec();
        for bits in 0u64..1 << (vars.len() * n) {
            let mut model = frame.clone();
            for (i, v) in vars.iter().enumerate() {
                model.declare_var(v);
                for w in 0..n {
                    if bits >> (i * n + w) & 1 == 1 {
                        model.set_var(v, w, true).expect("world in range");
                    }
                }
            }
            let truth = model.truth_set(f);
            if let Some(&w) = roots.iter().find(|&&w| !truth[w]) {
                return Some(Countermodel { model, world: w });
            }
        }
    }
    None
}
