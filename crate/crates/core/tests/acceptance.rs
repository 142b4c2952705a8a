//! Acceptance checks, one line of output per criterion.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use pivot_cp::backend::{emit_clp, emit_flat, lower_to_flat, ClpEmitOptions, FlatProgram, FlatVarKind};
use pivot_cp::frontend::parse_bytes;
use pivot_cp::oracle::{compare_solutions, enumerate, Comparison, Limits, OracleValue};
use pivot_cp::passes::{run_pass, run_pipeline, AlldiffMode, PassConfig, PassId};
use pivot_cp::pivot::*;

use PassId::*;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn pipeline(m: &Model, passes: &[PassId], mode: AlldiffMode) -> Result<Model, String> {
    let cfg = PassConfig::new(passes.to_vec(), mode, false).map_err(|e| e.to_string())?;
    run_pipeline(m, &cfg).map(|(m, _)| m).map_err(|e| e.error.to_string())
}

fn flat(m: &Model, mode: AlldiffMode) -> Result<FlatProgram, String> {
    let m = pipeline(m, &[ObjectFlatten, EnumRemove, AlldiffRewrite, LoopUnroll], mode)?;
    lower_to_flat(&m).map_err(|e| e.to_string())
}

const CLP_PASSES: [PassId; 3] = [ObjectFlatten, EnumRemove, FoldConstants];

fn golfers() -> Model {
    load_fixture("golfers.som", Some("golfers.dat"))
}

fn within(start: Instant, limit: Duration) -> Check {
    let took = start.elapsed();
    ensure!(took < limit, "took {:?}, limit {:?}", took, limit);
    Ok(())
}

fn golfers_golden_chain() -> Check {
    let start = Instant::now();
    let m = pipeline(&golfers(), &CLP_PASSES, AlldiffMode::Disequalities)?;
    let sets: Vec<&Variable> = m.variables().filter(|v| v.decl.is_set).collect();
    ensure!(sets.len() == 1 && m.variables().count() == 1, "expected one set array, got {}", m.variables().count());
    ensure!(sets[0].decl.dims.len() == 1 && sets[0].decl.dims[0].kind == ExprKind::Int(12), "dimension is not 12");
    let text = emit_clp(&m, &ClpEmitOptions::default()).map_err(|e| e.to_string())?;
    ensure!(
        text.lines().any(|l| l.trim().trim_end_matches(',') == "intsets(WEEKSCHED_GROUPSCHED_PLAYERS,12,1,9)"),
        "intsets line missing"
    );
    let block = text.split("% differentGroups").nth(1).ok_or("differentGroups block missing")?;
    let block = block.split("\n\n").next().unwrap_or("");
    let loops = block.matches("(for(").count();
    ensure!(loops == 4, "{} for-loops in differentGroups", loops);
    within(start, Duration::from_secs(1))
}

fn flattening_naming() -> Check {
    let m = pipeline(&golfers(), &[ObjectFlatten], AlldiffMode::Disequalities)?;
    let names: Vec<&str> = m.variables().map(|v| v.decl.name.as_str()).collect();
    ensure!(names == ["weekSched_groupSched_players"], "variables {:?}", names);
    let text = print_pivot(&m).map_err(|e| e.to_string())?;
    ensure!(text.contains("Name set weekSched_groupSched_players[g * w];"), "declaration not found");
    let folded = run_pass(&m, FoldConstants, AlldiffMode::Disequalities).map_err(|e| e.to_string())?;
    let dim = &folded.variables().next().ok_or("no variable")?.decl.dims[0].kind;
    ensure!(*dim == ExprKind::Int(12), "folded dim {:?}", dim);
    Ok(())
}

fn alldiff_model(n: usize) -> (Model, Vec<String>) {
    let names: Vec<String> = (1..=n).map(|i| format!("x{}", i)).collect();
    let decls: String = names.iter().map(|x| format!("int {} in 1..{};\n", x, n)).collect();
    let text = format!("{}constraint c {{ alldifferent({}); }}\n", decls, names.join(", "));
    (parse_text(&text), names)
}

fn alldiff_equivalence() -> Check {
    let start = Instant::now();
    for n in 2..=4usize {
        let (m, names) = alldiff_model(n);
        let reference = distinct_tuples(&names, n as i64);
        let factorial: usize = (1..=n).product();
        ensure!(reference.len() == factorial, "permutation check found {} for n={}", reference.len(), n);
        for mode in [AlldiffMode::Disequalities, AlldiffMode::Boolean] {
            let sols = enumerate(&flat(&m, mode)?, Limits::default()).map_err(|e| e.to_string())?;
            let projected = sols.project(&names).map_err(|e| e.to_string())?;
            ensure!(projected.len() == factorial, "{} gives {} for n={}", mode, projected.len(), n);
            ensure!(to_set(&projected.solutions) == reference, "{} differs from permutations for n={}", mode, n);
        }
    }
    within(start, Duration::from_secs(5))
}

fn relaxation_strictness() -> Check {
    let (m, names) = alldiff_model(3);
    let exact = enumerate(&flat(&m, AlldiffMode::Disequalities)?, Limits::default()).map_err(|e| e.to_string())?;
    let relaxed = enumerate(&flat(&m, AlldiffMode::Relaxation)?, Limits::default()).map_err(|e| e.to_string())?;
    let mut brute = Vec::new();
    for a in 1..=3 {
        for b in 1..=3 {
            for c in 1..=3 {
                if a + b + c == 6 {
                    brute.push([a, b, c]);
                }
            }
        }
    }
    ensure!(relaxed.len() == 7 && brute.len() == 7, "relaxation {} brute {}", relaxed.len(), brute.len());
    let got: Vec<[i64; 3]> = relaxed
        .solutions
        .iter()
        .map(|s| {
            let v = |k: &str| match s[k] {
                OracleValue::Int(v) => v,
                _ => 0,
            };
            [v("x1"), v("x2"), v("x3")]
        })
        .collect();
    ensure!(to_sorted(got) == to_sorted(brute), "relaxation solutions differ from brute force");
    let cmp = compare_solutions(&exact, &relaxed, &names).map_err(|e| e.to_string())?;
    ensure!(cmp == Comparison::Subset, "exact vs relaxed is {}", cmp);
    Ok(())
}

fn to_sorted(mut v: Vec<[i64; 3]>) -> Vec<[i64; 3]> {
    v.sort();
    v
}

fn queens_cross_path() -> Check {
    let start = Instant::now();
    for (n, expected) in [(4i64, 2usize), (5, 10), (6, 4)] {
        let naive_board = queens_count(n);
        ensure!(naive_board == expected, "board count {} for n={}", naive_board, n);
        let m = load_fixture(&format!("queens{}.som", n), None);
        let structured = pipeline(&m, &CLP_PASSES, AlldiffMode::Disequalities)?;
        emit_clp(&structured, &ClpEmitOptions::default()).map_err(|e| e.to_string())?;
        let a = structured_solution_count(&structured);
        let p = flat(&m, AlldiffMode::Disequalities)?;
        let b = enumerate(&p, Limits::default()).map_err(|e| e.to_string())?;
        let naive = naive_solutions(&p);
        ensure!(a == expected, "structured path gives {} for n={}", a, n);
        ensure!(b.len() == expected, "flat path gives {} for n={}", b.len(), n);
        ensure!(to_set(&b.solutions) == naive, "oracle and cross product differ for n={}", n);
    }
    within(start, Duration::from_secs(10))
}

fn send_more_money() -> Check {
    let start = Instant::now();
    let p = flat(&load_fixture("send.som", None), AlldiffMode::Disequalities)?;
    let sols = enumerate(&p, Limits::default()).map_err(|e| e.to_string())?;
    ensure!(sols.complete && sols.len() == 1, "{} solutions", sols.len());
    let s = &sols.solutions[0];
    let digit = |k: &str| match s.get(k) {
        Some(OracleValue::Int(v)) => *v,
        _ => -1,
    };
    let word = |ks: &[&str]| ks.iter().fold(0, |acc, k| acc * 10 + digit(k));
    let (send, more, money) = (word(&["s", "e", "n", "d"]), word(&["m", "o", "r", "e"]), word(&["m", "o", "n", "e", "y"]));
    ensure!((send, more, money) == (9567, 1085, 10652), "{}+{}={}", send, more, money);
    within(start, Duration::from_secs(60))
}

fn structured_vs_flat_size() -> Check {
    let structured = pipeline(&golfers(), &CLP_PASSES, AlldiffMode::Disequalities)?;
    let clp = emit_clp(&structured, &ClpEmitOptions::default()).map_err(|e| e.to_string())?;
    let p = flat(&golfers(), AlldiffMode::Disequalities)?;
    ensure!(p.vars.iter().all(|v| v.kind == FlatVarKind::Set { lo: 1, hi: 9 }), "unexpected flat variables");
    let (f, c) = (emit_flat(&p).lines().count(), clp.lines().count());
    ensure!(f > c, "flat {} lines, clp {} lines", f, c);
    Ok(())
}

fn idempotence_and_determinism() -> Check {
    let order = [
        (ObjectFlatten, AlldiffMode::Disequalities),
        (EnumRemove, AlldiffMode::Disequalities),
        (AlldiffRewrite, AlldiffMode::Disequalities),
        (LoopUnroll, AlldiffMode::Disequalities),
        (FoldConstants, AlldiffMode::Disequalities),
    ];
    for (model, data) in FIXTURES {
        let mut cur = resolve(&load_fixture(model, data)).map_err(|e| format!("{:?}", e))?;
        for (pass, mode) in order {
            let once = run_pass(&cur, pass, mode).map_err(|e| format!("{} {}: {}", model, pass, e))?;
            let twice = run_pass(&once, pass, mode).map_err(|e| format!("{} {}: {}", model, pass, e))?;
            ensure!(twice.model_equals(&once), "{} is not idempotent on {}", pass, model);
            cur = once;
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for target in ["clp", "flat", "pivot"] {
        for (model, data) in FIXTURES {
            let mut outputs = Vec::new();
            for k in 0..2 {
                let out = dir.path().join(format!("{}.{}", target, k));
                let mut cmd = Command::new(env!("CARGO_BIN_EXE_pivotc"));
                cmd.args(["compile", "--target", target, "-m"]).arg(fixture_path(model)).arg("-o").arg(&out);
                if let Some(d) = data {
                    cmd.arg("-d").arg(fixture_path(d));
                }
                let status = cmd.output().map_err(|e| e.to_string())?.status;
                ensure!(status.success(), "{} {} exited with {}", target, model, status);
                outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
            }
            ensure!(outputs[0] == outputs[1], "{} output for {} differs between runs", target, model);
        }
    }
    Ok(())
}

fn round_trip() -> Check {
    for (model, data) in FIXTURES {
        let m = load_fixture(model, data);
        let text = print_pivot(&m).map_err(|e| e.to_string())?;
        ensure!(parse_text(&text).model_equals(&m), "{} does not round trip", model);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000 {
        let src = random_model_source(&mut rng);
        let m = parse_text(&src);
        resolve(&m).map_err(|e| format!("random model {} invalid: {:?}", i, e))?;
        let text = print_pivot(&m).map_err(|e| e.to_string())?;
        ensure!(parse_text(&text).model_equals(&m), "random model {} does not round trip", i);
    }
    Ok(())
}

const PIECES: [&str; 30] = [
    "main", "class", "enum", "constraint", "forall", "if", "else", "(", ")", "{", "}", "[", "]", ";", ":=", "..",
    "in", "int", "set", "card", "intersect", "x", "1", "-", "^", ".", ",", "=", "\n", "\"",
];

fn fuzz_input(rng: &mut ChaCha8Rng, base: &[u8]) -> Vec<u8> {
    match rng.gen_range(0..3) {
        0 => (0..rng.gen_range(0..200)).map(|_| rng.gen()).collect(),
        1 => (0..rng.gen_range(0..60)).map(|_| PIECES[rng.gen_range(0..PIECES.len())]).collect::<Vec<_>>().join(" ").into_bytes(),
        _ => {
            let mut out = base.to_vec();
            for _ in 0..rng.gen_range(1..6) {
                let at = rng.gen_range(0..out.len().max(1));
                match rng.gen_range(0..3) {
                    0 if !out.is_empty() => out[at] = rng.gen(),
                    1 => out.insert(at.min(out.len()), rng.gen()),
                    _ if !out.is_empty() => {
                        out.remove(at);
                    }
                    _ => {}
                }
            }
            out
        }
    }
}

fn fuzz_robustness() -> Check {
    let base = fixture_text("golfers.som").into_bytes();
    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut crashes = 0;
    let mut first = None;
    for i in 0..100_000 {
        let input = fuzz_input(&mut rng, &base);
        let ok = panic::catch_unwind(AssertUnwindSafe(|| match parse_bytes(None, &input) {
            Ok(m) => {
                let _ = resolve(&m);
                true
            }
            Err(d) => !d.is_empty(),
        }));
        if !matches!(ok, Ok(true)) {
            crashes += 1;
            first.get_or_insert(i);
        }
    }
    panic::set_hook(hook);
    ensure!(crashes == 0, "{} failing inputs, first at #{:?}", crashes, first);
    Ok(())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golfers golden chain", golfers_golden_chain),
        ("flattening naming", flattening_naming),
        ("alldifferent equivalence", alldiff_equivalence),
        ("relaxation strictness", relaxation_strictness),
        ("n-queens cross-path equivalence", queens_cross_path),
        ("SEND+MORE=MONEY", send_more_money),
        ("structured vs flat size", structured_vs_flat_size),
        ("pass idempotence and determinism", idempotence_and_determinism),
        ("round trip", round_trip),
        ("fuzz robustness", fuzz_robustness),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        let took = start.elapsed();
        match result {
            Ok(()) => println!("[PASS] {:>2}. {} ({:.2?})", i + 1, name, took),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2}. {} ({:.2?}): {}", i + 1, name, took, why);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
