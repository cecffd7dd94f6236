use criterion::{black_box, criterion_group, criterion_main, Criterion};
use potentia::decide::{decide, decide_with, TheoryId};
use potentia::sequence::{parse_seq_statement, SequenceSystem};
use potentia::simulate::{simulate_s4_over_sequences, simulate_s5_over_sequences};
use potentia::universal::{run_universal, ScriptEntry, ScriptedOracle};
use potentia::{parse, System};

const AXIOMS: [&str; 4] = [
    "[](p->q)->([]p->[]q)",
    "<>[]p->[]<>p",
    "(<>p & <>q) -> <>((p & <>q) | (q & <>p))",
    "<>[]p->p",
];

fn deciding(c: &mut Criterion) {
    let formulas: Vec<_> = AXIOMS.iter().map(|s| parse(s).unwrap()).collect();
    for t in TheoryId::ALL {
        c.bench_function(&format!("decide {t} axioms"), |b| {
            b.iter(|| {
                formulas
                    .iter()
                    .filter(|f| decide(t, black_box(f), None).unwrap().is_member())
                    .count()
            })
        });
    }
    let hard = parse("(<>p & <>q & <>r) -> <>(p & <>(q & <>r)) | <>(q & <>(r & <>p)) | []~(p & q)").unwrap();
    c.bench_function("decide S4 raw, three diamonds", |b| {
        b.iter(|| decide_with(TheoryId::S4, black_box(&hard), None, false).unwrap())
    });
}

fn sequences(c: &mut Criterion) {
    let sys = SequenceSystem::default();
    let s = parse_seq_statement("[]<>rho1 & <>[](sigma0 | eta3)").unwrap();
    let worlds = sys.worlds();
    c.bench_function("sequence truth on default window", |b| {
        b.iter(|| sys.holds_all(&worlds, black_box(&s)).unwrap())
    });
    let dot2 = parse("<>[]p->[]<>p").unwrap();
    c.bench_function("railyard simulation of .2", |b| {
        b.iter(|| simulate_s4_over_sequences(&dot2, Vec::new()).unwrap())
    });
    let five = parse("<>p->[]p").unwrap();
    c.bench_function("switch simulation", |b| {
        b.iter(|| simulate_s5_over_sequences(&five).unwrap())
    });
}

fn universal(c: &mut Criterion) {
    let entries: Vec<ScriptEntry> = (0..32)
        .map(|i| ScriptEntry {
            stage: i % 8,
            k: 32 - i,
            batch: Some(vec![i as u64; 3]),
            number: None,
        })
        .collect();
    let oracle = ScriptedOracle::new(32, 0, &entries).unwrap();
    c.bench_function("universal run, 32 grants", |b| {
        b.iter(|| run_universal(black_box(&oracle), 0, 1 << 16))
    });
}

criterion_group!(benches, deciding, sequences, universal);
criterion_main!(benches);
