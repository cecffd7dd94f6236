use potentia::decide::{decide, decide_with, TheoryId, Verdict};
use potentia::formula::{enumerate_formulas, Formula, ModalFormula};
use potentia::{parse, KripkeModel};
use proptest::prelude::*;

/// Reflexive-transitive relations on `n` labeled worlds.
fn preorders(n: usize) -> Vec<Vec<Vec<bool>>> {
    let mut out = Vec::new();
    for bits in 0..1u32 << (n * n) {
        let r: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| bits >> (i * n + j) & 1 == 1).collect())
            .collect();
        let refl = (0..n).all(|i| r[i][i]);
        let trans = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(r[i][j] && r[j][k]) || r[i][k])));
        if refl && trans {
            out.push(r);
        }
    }
    out
}

fn in_class(t: TheoryId, r: &[Vec<bool>]) -> bool {
    let n = r.len();
    let triples = || (0..n).flat_map(move |x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z))));
    match t {
        TheoryId::S4 => true,
        TheoryId::S4_2 => triples().all(|(x, y, z)| !(r[x][y] && r[x][z]) || (0..n).any(|w| r[y][w] && r[z][w])),
        TheoryId::S4_3 => triples().all(|(x, y, z)| !(r[x][y] && r[x][z]) || r[y][z] || r[z][y]),
        TheoryId::S5 => (0..n).all(|i| (0..n).all(|j| r[i][j] == r[j][i])),
    }
}

fn eval(r: &[Vec<bool>], val: &dyn Fn(&str, usize) -> bool, w: usize, f: &ModalFormula) -> bool {
    let ev = |g: &ModalFormula, w| eval(r, val, w, g);
    match f {
        Formula::Atom(p) => val(p, w),
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Not(a) => !ev(a, w),
        Formula::And(a, b) => ev(a, w) && ev(b, w),
        Formula::Or(a, b) => ev(a, w) || ev(b, w),
        Formula::Implies(a, b) => !ev(a, w) || ev(b, w),
        Formula::Iff(a, b) => ev(a, w) == ev(b, w),
        Formula::Diamond(a) => (0..r.len()).any(|v| r[w][v] && ev(a, v)),
        Formula::Box(a) => (0..r.len()).all(|v| !r[w][v] || ev(a, v)),
    }
}

fn brute_force_valid(frames: &[Vec<Vec<bool>>], f: &ModalFormula) -> bool {
    let vars: Vec<String> = f.atoms().into_iter().cloned().collect();
    frames.iter().all(|r| {
        let n = r.len();
        (0..1u64 << (vars.len() * n)).all(|v| {
            let val = |p: &str, w: usize| v >> (vars.iter().position(|x| x == p).unwrap() * n + w) & 1 == 1;
            (0..n).all(|w| eval(r, &val, w, f))
        })
    })
}

fn refutes(m: &KripkeModel, w: usize, f: &ModalFormula) -> bool {
    let r: Vec<Vec<bool>> = m
        .worlds()
        .map(|i| m.worlds().map(|j| m.accessible(i, j)).collect())
        .collect();
    !eval(&r, &|p, w| m.var_true(p, w), w, f)
}

#[test]
fn directed_and_linear_theories_agree_with_brute_force() {
    let formulas = enumerate_formulas(&["p", "q"], 6);
    for t in [TheoryId::S4_2, TheoryId::S4_3] {
        let frames: Vec<_> = (1..=4).flat_map(preorders).filter(|r| in_class(t, r)).collect();
        for f in &formulas {
            let r = decide(t, f, None).unwrap();
            let valid = brute_force_valid(&frames, f);
            match r.verdict {
                Verdict::Member => assert!(valid, "{t} {f}: member but refuted on a small frame"),
                Verdict::NonMember(cm) => {
                    assert!(!valid, "{t} {f}: non-member but valid on small frames");
                    let rel: Vec<Vec<bool>> = cm
                        .model
                        .worlds()
                        .map(|i| cm.model.worlds().map(|j| cm.model.accessible(i, j)).collect())
                        .collect();
                    assert!(in_class(t, &rel) && refutes(&cm.model, cm.world, f), "{t} {f}");
                }
                Verdict::UnknownBeyondBound { .. } => panic!("{t} {f}: undecided"),
            }
        }
    }
}

#[test]
fn raw_countermodels_refute() {
    for f in enumerate_formulas(&["p", "q"], 5) {
        for t in TheoryId::ALL {
            if let Verdict::NonMember(cm) = decide_with(t, &f, None, false).unwrap().verdict {
                assert!(refutes(&cm.model, cm.world, &f), "{t} {f}");
            }
        }
    }
}

#[test]
fn theories_are_nested() {
    for f in enumerate_formulas(&["p"], 7) {
        let members: Vec<bool> = TheoryId::ALL
            .iter()
            .map(|&t| decide(t, &f, None).unwrap().is_member())
            .collect();
        for w in members.windows(2) {
            assert!(!w[0] || w[1], "{f}: {members:?}");
        }
    }
}

fn small_formula() -> impl Strategy<Value = ModalFormula> {
    let leaf = prop_oneof![
        Just(Formula::atom("p")),
        Just(Formula::atom("q")),
        Just(Formula::atom("r"))
    ];
    leaf.prop_recursive(3, 7, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::diamond),
            inner.clone().prop_map(Formula::boxed),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

fn instance(schema: &str, a: &ModalFormula, b: &ModalFormula) -> ModalFormula {
    let s = parse(schema).unwrap();
    let map = [("p".to_string(), a.clone()), ("q".to_string(), b.clone())]
        .into_iter()
        .collect();
    s.substitute(&map).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schema_instances_are_members(a in small_formula(), b in small_formula()) {
        for schema in ["[](p->q)->([]p->[]q)", "[]p->p", "[]p->[][]p", "~<>p <-> []~p"] {
            prop_assert!(decide(TheoryId::S4, &instance(schema, &a, &b), None).unwrap().is_member(), "{}", schema);
        }
        prop_assert!(decide(TheoryId::S4_2, &instance("<>[]p->[]<>p", &a, &b), None).unwrap().is_member());
        prop_assert!(decide(TheoryId::S4_3, &instance("(<>p & <>q) -> <>((p & <>q) | (q & <>p))", &a, &b), None).unwrap().is_member());
        prop_assert!(decide(TheoryId::S5, &instance("<>[]p->p", &a, &b), None).unwrap().is_member());
    }

    #[test]
    fn verdicts_are_closed_under_negation_of_members(f in small_formula()) {
        // a formula and its negation are never both members of a consistent theory
        for t in TheoryId::ALL {
            let pos = decide(t, &f, None).unwrap().is_member();
            let neg = decide(t, &Formula::not(f.clone()), None).unwrap().is_member();
            prop_assert!(!(pos && neg));
        }
    }
}
