use cnlwiki_core::ace::{self, shipped_grammar, shipped_sources, LANGUAGES};
use cnlwiki_core::eval::{ambiguity_report, coverage_report, enumerate_sentences, roundtrip_check, EvalError};
use cnlwiki_core::CompiledGrammar;

fn with_lexicon(module: &str, edit: impl Fn(&str) -> String) -> CompiledGrammar {
    let sources: Vec<(String, String)> = shipped_sources()
        .into_iter()
        .map(|(n, s)| if n == module { let e = edit(&s); (n, e) } else { (n, s) })
        .collect();
    ace::compile(&sources).unwrap()
}

#[test]
fn shipped_fragment_is_unambiguous_up_to_8_tokens() {
    let g = shipped_grammar();
    for lang in LANGUAGES {
        let r = ambiguity_report(&g, lang, 8).unwrap();
        assert!(r.sentences > 0);
        assert_eq!(r.ambiguous, 0, "{lang}: {:?}", r.ambiguous_sentences.first());
        assert_eq!(r.ambiguity_rate, 0.0);
    }
}

#[test]
fn homograph_is_detected_and_harmful() {
    // "mögen" spelled like "enthalten": every sentence with the verb gets two readings
    let g = with_lexicon("LexGer", |s| {
        s.replace("mkV2 \"mögen\" \"mag\" \"gemocht\"", "mkV2 \"enthalten\" \"enthält\" \"enthalten\"")
    });
    let r = ambiguity_report(&g, "ger", 6).unwrap();
    assert!(r.ambiguity_rate > 0.0 && r.ambiguity_rate <= 1.0);
    assert!(r.ambiguous_sentences.iter().all(|a| a.trees.len() == 2));
    // the two verbs name different roles, so no reading pair agrees
    assert!(r.ambiguous_sentences.iter().any(|a| !a.harmless));
    assert!(r.harmless_rate < 1.0);
}

#[test]
fn empty_lexicon_has_no_sentences() {
    let g = with_lexicon("LexAce", |s| s.lines().filter(|l| l.starts_with("--")).collect::<Vec<_>>().join("\n"));
    let r = ambiguity_report(&g, "ace", 6).unwrap();
    assert_eq!((r.sentences, r.ambiguity_rate), (0, 0.0));
}

#[test]
fn coverage_counts_add_up() {
    let g = shipped_grammar();
    for lang in LANGUAGES {
        let r = coverage_report(&g, lang, 7).unwrap();
        assert_eq!(r.sentence_counts.values().sum::<usize>(), r.sentences);
        assert_eq!(r.sentences, enumerate_sentences(&g, lang, 7).unwrap().len());
        assert!(r.sentence_counts.keys().all(|&k| k <= 7));
    }
}

#[test]
fn round_trip_holds_at_depth_3() {
    let g = shipped_grammar();
    for lang in LANGUAGES {
        let r = roundtrip_check(&g, lang, 3).unwrap();
        assert!(r.trees_checked > 0);
        assert!(r.round_trip_failures.is_empty(), "{lang}: {:?}", r.round_trip_failures);
    }
    // no lexical tree is a sentence
    assert_eq!(roundtrip_check(&g, "ace", 0).unwrap().trees_checked, 0);
    assert!(matches!(roundtrip_check(&g, "ace", 6), Err(EvalError::DepthCap { .. })));
    assert!(matches!(roundtrip_check(&g, "xx", 1), Err(EvalError::UnknownLanguage(_))));
}
