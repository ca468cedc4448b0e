use std::path::PathBuf;

use proptest::prelude::*;
use ruspeech_core::charset::Charset;
use ruspeech_core::corpus::{
    compute_stats, decode_ids, encode_text, histogram, load_manifest, parse_manifest, validate,
    CorpusError, CorpusStats, CountingRules, FindingKind, Histogram, HistogramAxis,
};
use ruspeech_core::textnorm::AcronymLexicon;

fn data() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

#[test]
fn fixture_manifest_stats() {
    let corpus = load_manifest(&data().join("fixture_manifest.txt"), None).unwrap();
    assert_eq!(corpus.len(), 2);
    let stats = compute_stats(&corpus, Charset::bundled(), CountingRules::default()).unwrap();
    assert_eq!(stats.sample_count, 2);
    assert_eq!(stats.total_symbols, 14);
    assert_eq!(stats.total_words, 3);
    assert_eq!(stats.unique_words, 3);
    assert_eq!(stats.min_duration, 0.75);
    assert_eq!(stats.max_duration, 1.5);
    assert_eq!(stats.total_duration, 2.25);
    let clean = validate(&corpus, Charset::bundled(), &AcronymLexicon::new());
    assert!(clean.is_empty(), "{clean:?}");
}

#[test]
fn findings_are_exhaustive() {
    let corpus = load_manifest(&data().join("findings_manifest.txt"), None).unwrap();
    let lex = AcronymLexicon::from_pairs([("МГУ", "эм гэ у")]).unwrap();
    let report = validate(&corpus, Charset::bundled(), &lex);
    let of = |id: &str| report.iter().filter(|f| f.id == id).map(|f| f.kind.clone()).collect::<Vec<_>>();
    assert!(of("clean").is_empty());
    assert_eq!(of("digit"), vec![FindingKind::OutOfCharset { symbols: "7".into(), first_position: 6 }]);
    assert_eq!(of("narrow").len(), 1);
    assert!(matches!(&of("narrow")[0], FindingKind::AudioFormat { .. }));
    assert_eq!(of("acronym"), vec![FindingKind::CapitalRun { token: "МГУ".into(), in_lexicon: true }]);
    assert_eq!(of("empty"), vec![FindingKind::EmptyText]);
    assert!(matches!(&of("bits")[..], [FindingKind::UnreadableAudio { .. }] | [FindingKind::AudioFormat { .. }]));
}

#[test]
fn manifest_errors() {
    let root = data();
    assert!(parse_manifest("", &root).unwrap().is_empty());
    assert!(matches!(
        parse_manifest("a|utt_0001.wav|x\na|utt_0002.wav|y\n", &root),
        Err(CorpusError::DuplicateId { line: 2, .. })
    ));
    assert!(matches!(parse_manifest("a|b\n", &root), Err(CorpusError::MalformedLine { line: 1 })));
    assert!(matches!(parse_manifest("A|utt_0001.wav|x\n", &root), Err(CorpusError::InvalidId { .. })));
    assert!(matches!(
        parse_manifest("a|missing.wav|x\n", &root),
        Err(CorpusError::MissingAudio { .. })
    ));
}

#[test]
fn histograms_partition_the_corpus() {
    let corpus = load_manifest(&data().join("fixture_manifest.txt"), None).unwrap();
    for bins in 1..6 {
        for axis in [HistogramAxis::Duration, HistogramAxis::Symbols] {
            let h = histogram(&corpus, axis, bins, Charset::bundled(), CountingRules::default()).unwrap();
            assert_eq!(h.counts.iter().sum::<usize>(), 2);
            assert_eq!(h.edges.len(), bins + 1);
        }
    }
}

fn charset_text() -> impl Strategy<Value = String> {
    let symbols: Vec<char> = Charset::bundled().symbols().to_vec();
    prop::collection::vec(prop::sample::select(symbols), 0..60).prop_map(|v| v.into_iter().collect())
}

proptest! {
    #[test]
    fn encode_decode_round_trip(text in charset_text()) {
        let cs = Charset::bundled();
        prop_assert_eq!(decode_ids(&encode_text(&text, cs).unwrap(), cs).unwrap(), text);
    }

    #[test]
    fn stats_are_permutation_invariant(
        items in prop::collection::vec((charset_text(), 0.1f64..60.0), 1..30),
        seed in any::<u64>(),
    ) {
        let cs = Charset::bundled();
        let a = CorpusStats::from_items(items.iter().map(|(t, d)| (t.as_str(), *d)), cs, CountingRules::default()).unwrap();
        let mut shuffled = items.clone();
        let n = shuffled.len();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let b = CorpusStats::from_items(shuffled.iter().map(|(t, d)| (t.as_str(), *d)), cs, CountingRules::default()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.total_words >= a.sample_count * a.min_words);
        prop_assert!(a.min_duration <= a.max_duration);
    }

    #[test]
    fn histogram_counts_sum(values in prop::collection::vec(-1e3f64..1e3, 1..200), bins in 1usize..50) {
        let h = Histogram::from_values(HistogramAxis::Duration, &values, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<usize>(), values.len());
        prop_assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(h.edges[0] <= lo && *h.edges.last().unwrap() >= hi);
    }
}
