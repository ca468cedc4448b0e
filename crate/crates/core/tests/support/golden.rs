//! Golden-table runner shared with the acceptance target.

use ruspeech_core::textnorm::{
    date_to_words, normalize, number_to_words, ordinal_to_words, AcronymLexicon, Case, Gender,
    MorphContext,
};

const GOLDEN: &str = include_str!("../data/normalization_golden.tsv");

fn lexicon_from_header() -> AcronymLexicon {
    let line = GOLDEN
        .lines()
        .find_map(|l| l.strip_prefix("# lexicon: "))
        .expect("lexicon header");
    let pairs = line.split("; ").map(|kv| kv.split_once('=').expect("key=value"));
    AcronymLexicon::from_pairs(pairs).unwrap()
}

fn parse_ctx(case: &str, gender: &str) -> MorphContext {
    let case = match case {
        "nominative" => Case::Nominative,
        "genitive" => Case::Genitive,
        "dative" => Case::Dative,
        "accusative" => Case::Accusative,
        "instrumental" => Case::Instrumental,
        "prepositional" => Case::Prepositional,
        other => panic!("unknown case {other}"),
    };
    let gender = match gender {
        "masculine" => Gender::Masculine,
        "feminine" => Gender::Feminine,
        "neuter" => Gender::Neuter,
        other => panic!("unknown gender {other}"),
    };
    MorphContext::new(case, gender)
}

/// Runs every golden row and returns `(total, mismatches)`.
pub fn run_golden() -> (usize, Vec<String>) {
    let lexicon = lexicon_from_header();
    let mut total = 0;
    let mut failures = Vec::new();
    for line in GOLDEN.lines().filter(|l| !l.starts_with('#')) {
        let mut cols = line.split('\t');
        let (kind, input, expected) = (cols.next().unwrap(), cols.next().unwrap(), cols.next().unwrap_or(""));
        let mut parts = kind.split(':');
        let got = match parts.next().unwrap() {
            "card" => {
                let ctx = parse_ctx(parts.next().unwrap(), parts.next().unwrap());
                number_to_words(input.parse().unwrap(), ctx).unwrap()
            }
            "ord" => {
                let ctx = parse_ctx(parts.next().unwrap(), parts.next().unwrap());
                ordinal_to_words(input.parse().unwrap(), ctx).unwrap()
            }
            "date" => {
                let f: Vec<u32> = input.split('.').map(|p| p.parse().unwrap()).collect();
                date_to_words(f[0], f[1], f[2]).unwrap()
            }
            "norm" => normalize(input, &lexicon).unwrap(),
            other => panic!("unknown row kind {other}"),
        };
        total += 1;
        if got != expected {
            failures.push(format!("{kind} {input:?}: expected {expected:?}, got {got:?}"));
        }
    }
    (total, failures)
}
