use proptest::prelude::*;
use ruspeech_core::charset::Charset;
use ruspeech_core::textnorm::{
    expand_acronyms, filter_charset, normalize, number_to_words, AcronymLexicon, Case, Gender,
    MorphContext, MAX_CARDINAL,
};

fn lexicon() -> AcronymLexicon {
    AcronymLexicon::from_pairs([
        ("СССР", "эс эс эс эр"),
        ("БУ", "бэ у"),
        ("МГУ", "эм гэ у"),
        ("ГЭС", "гэс"),
    ])
    .unwrap()
}

/// Text that exercises digits, dates, acronyms, fusing deletions and junk.
fn messy_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "[а-яА-ЯёЁ]{1,8}",
        "[0-9]{1,5}",
        "[0-3]?[0-9]\\.[01]?[0-9]\\.[0-9]{4}",
        Just(" мая".to_string()),
        Just(" года".to_string()),
        Just("СССР".to_string()),
        Just("Б/У".to_string()),
        Just("МГУ".to_string()),
        "[ ,.!?:;()'—-]{1,3}",
        "[a-zA-Z/#%№😊\t\n]{1,3}",
        "\\PC{1,3}",
    ];
    prop::collection::vec(piece, 0..12).prop_map(|v| v.concat())
}

proptest! {
    #[test]
    fn filter_output_is_charset_only(s in "\\PC*") {
        let cs = Charset::default();
        let out = filter_charset(&s, &cs);
        prop_assert!(out.chars().all(|c| cs.contains(c)));
        prop_assert!(!out.starts_with(' ') && !out.ends_with(' ') && !out.contains("  "));
        prop_assert_eq!(filter_charset(&out, &cs), out.clone());
    }


    #[test]
    fn expansion_stays_in_known_alphabet(s in messy_text()) {
        let cs = Charset::default();
        let out = expand_acronyms(&s, &lexicon());
        prop_assert!(out.chars().all(|c| cs.contains(c) || s.contains(c)));
    }

    #[test]
    fn cardinals_total_on_domain(n in -MAX_CARDINAL..=MAX_CARDINAL, case in 0usize..6, gender in 0usize..3) {
        let ctx = MorphContext::new(Case::ALL[case], Gender::ALL[gender]);
        let words = number_to_words(n, ctx).unwrap();
        prop_assert!(!words.is_empty());
        prop_assert!(words.chars().all(|c| c == ' ' || ruspeech_core::charset::is_cyrillic_letter(c)));
        prop_assert_eq!(number_to_words(n, ctx).unwrap(), words);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn normalize_is_idempotent(s in messy_text()) {
        let lex = lexicon();
        if let Ok(once) = normalize(&s, &lex) {
            prop_assert_eq!(normalize(&once, &lex), Ok(once.clone()));
        }
    }
}
