use criterion::{criterion_group, criterion_main, Criterion};
use ruspeech_core::phonemics::transcribe;
use ruspeech_core::textnorm::{normalize, AcronymLexicon};

const MESSY: &str = "В 1999 г. МГУ принял 12345 студентов, а 5 мая 2017 года прошло 3 собрания в 21 аудитории.";
const CLEAN: &str = "молоко́ и хлеб лежали на столе́ в большой комнате, где горел свет";

fn bench_text(c: &mut Criterion) {
    let lex = AcronymLexicon::from_pairs([("МГУ", "эм гэ у")]).unwrap();
    c.bench_function("normalize sentence", |b| b.iter(|| normalize(MESSY, &lex).unwrap()));
    c.bench_function("transcribe sentence", |b| b.iter(|| transcribe(CLEAN).unwrap()));
}

criterion_group!(benches, bench_text);
criterion_main!(benches);
