mod common;

use common::*;
use pivot_cp::frontend::{parse_bytes, parse_expression};
use pivot_cp::passes::{run_pass, AlldiffMode, PassError, PassId};
use pivot_cp::pivot::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Input and output of each stage of the full pipeline. The boolean
/// rewrite is tried on the side and does not feed later stages.
fn stages(m: &Model) -> Vec<(PassId, AlldiffMode, Model, Model)> {
    let order = [
        (PassId::ObjectFlatten, AlldiffMode::Disequalities),
        (PassId::EnumRemove, AlldiffMode::Disequalities),
        (PassId::AlldiffRewrite, AlldiffMode::Boolean),
        (PassId::AlldiffRewrite, AlldiffMode::Disequalities),
        (PassId::LoopUnroll, AlldiffMode::Disequalities),
        (PassId::FoldConstants, AlldiffMode::Disequalities),
    ];
    let mut out = Vec::new();
    let mut cur = resolve(m).unwrap();
    for (pass, mode) in order {
        let trial = mode == AlldiffMode::Boolean;
        let next = match run_pass(&cur, pass, mode) {
            Ok(next) => next,
            // The boolean encoding needs a shared 1..m domain; skip it elsewhere.
            Err(PassError::HeterogeneousDomains { .. } | PassError::DomainAssumptionViolated { .. }) if trial => continue,
            Err(e) => panic!("{}: {}", pass, e),
        };
        out.push((pass, mode, cur.clone(), next.clone()));
        if !trial {
            cur = next;
        }
    }
    out
}

#[test]
fn passes_are_idempotent_on_fixtures() {
    for (model, data) in FIXTURES {
        let m = load_fixture(model, data);
        for (pass, mode, _, once) in stages(&m) {
            let twice = run_pass(&once, pass, mode).unwrap();
            assert!(twice.model_equals(&once), "{} {} {}", model, pass, mode);
        }
        let folded = run_pass(&resolve(&m).unwrap(), PassId::FoldConstants, AlldiffMode::Disequalities).unwrap();
        let again = run_pass(&folded, PassId::FoldConstants, AlldiffMode::Disequalities).unwrap();
        assert!(again.model_equals(&folded), "{} fold on source", model);
    }
}

#[test]
fn relaxation_is_idempotent_where_it_applies() {
    let m = resolve(&load_fixture("queens4.som", None)).unwrap();
    let m = run_pass(&m, PassId::ObjectFlatten, AlldiffMode::Relaxation).unwrap();
    let m = run_pass(&m, PassId::EnumRemove, AlldiffMode::Relaxation).unwrap();
    let once = run_pass(&m, PassId::AlldiffRewrite, AlldiffMode::Relaxation).unwrap();
    let twice = run_pass(&once, PassId::AlldiffRewrite, AlldiffMode::Relaxation).unwrap();
    assert!(twice.model_equals(&once));
}

#[test]
fn fixtures_round_trip_through_text() {
    for (model, data) in FIXTURES {
        let m = load_fixture(model, data);
        let text = print_pivot(&m).unwrap();
        let back = parse_text(&text);
        assert!(back.model_equals(&m), "{}\n{}", model, text);
        assert_eq!(print_pivot(&back).unwrap(), text);
    }
}

#[test]
fn pass_outputs_round_trip_through_text() {
    for (model, data) in FIXTURES {
        for (pass, mode, _, out) in stages(&load_fixture(model, data)) {
            let text = print_pivot(&out).unwrap();
            let back = resolve(&parse_text(&text)).unwrap();
            assert!(back.model_equals(&out), "{} after {} {}\n{}", model, pass, mode, text);
        }
    }
}

#[test]
fn random_models_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..1000 {
        let src = random_model_source(&mut rng);
        let m = parse_text(&src);
        resolve(&m).unwrap_or_else(|e| panic!("model {} does not resolve: {:?}\n{}", i, e, src));
        let text = print_pivot(&m).unwrap();
        let back = parse_text(&text);
        assert!(back.model_equals(&m), "model {}\n{}\n---\n{}", i, src, text);
    }
}

#[test]
fn resolve_is_idempotent_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let m = parse_text(&random_model_source(&mut rng));
        let once = resolve(&m).unwrap();
        assert!(resolve(&once).unwrap().model_equals(&once));
    }
}

#[test]
fn parsing_is_deterministic() {
    for (model, data) in FIXTURES {
        assert!(load_fixture(model, data).model_equals(&load_fixture(model, data)));
    }
}

#[test]
fn renamed_literal_breaks_equality() {
    let m = load_fixture("golfers.som", Some("golfers.dat"));
    let mut other = m.clone();
    for e in &mut other.elements {
        if let ModelElement::Classifier(Classifier::Enumeration(en)) = e {
            en.literals[0] = "z".into();
        }
    }
    assert!(!m.model_equals(&other));
}

fn mutate(base: &[u8], edits: &[(usize, u8, u8)]) -> Vec<u8> {
    let mut out = base.to_vec();
    for &(pos, kind, byte) in edits {
        if out.is_empty() {
            out.push(byte);
            continue;
        }
        let at = pos % out.len();
        match kind % 3 {
            0 => out[at] = byte,
            1 => out.insert(at, byte),
            _ => {
                out.remove(at);
            }
        }
    }
    out
}

const PIECES: [&str; 24] = [
    "main", "class", "enum", "constraint", "forall", "(", ")", "{", "}", "[", "]", ";", ":=", "..", "in", "int",
    "set", "card", "intersect", "x", "1", "-", "^", ".",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arbitrary_bytes_never_crash(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        if let Err(diags) = parse_bytes(None, &bytes) {
            prop_assert!(!diags.is_empty());
        }
    }

    #[test]
    fn token_soup_never_crashes(pieces in prop::collection::vec(prop::sample::select(PIECES.to_vec()), 0..80)) {
        let text = pieces.join(" ");
        if let Err(diags) = parse_bytes(None, text.as_bytes()) {
            prop_assert!(!diags.is_empty());
            prop_assert!(diags.iter().all(|d| d.span.line >= 1 && d.span.column >= 1));
        }
        let _ = parse_expression(&text);
    }

    #[test]
    fn mutated_fixtures_never_crash(edits in prop::collection::vec((any::<usize>(), any::<u8>(), any::<u8>()), 1..8)) {
        let base = fixture_text("golfers.som");
        let data = fixture_text("golfers.dat");
        let bytes = mutate(base.as_bytes(), &edits);
        if let Ok(m) = parse_bytes(Some(data.as_bytes()), &bytes) {
            let _ = resolve(&m);
        }
    }
}
