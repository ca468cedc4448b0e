use std::path::PathBuf;
use std::time::Instant;

use ruspeech_core::audio::read_wav;
use ruspeech_core::features::{linear_spectrogram, StftConfig};
use ruspeech_core::vocoder::{reconstruct, spectral_convergence, GriffinLimConfig};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(name: &str) {
    let wave = read_wav(&data(name)).unwrap();
    let cfg = StftConfig::default();
    let mag = linear_spectrogram(&wave, &cfg).unwrap();

    let start = Instant::now();
    let fast = reconstruct(&mag, &GriffinLimConfig::default(), false).unwrap();
    let fast_secs = start.elapsed().as_secs_f64();
    let classic = reconstruct(&mag, &GriffinLimConfig::classic(300), true).unwrap();

    assert_eq!(fast.wave.len(), cfg.synthesis_len(mag.n_frames()));
    let sc_fast = spectral_convergence(&mag, &fast.wave).unwrap();
    let sc_classic = spectral_convergence(&mag, &classic.wave).unwrap();
    eprintln!("{name}: fgla {sc_fast:.2} dB in {fast_secs:.1}s, gla {sc_classic:.2} dB");
    assert!(sc_fast <= -20.0, "{name}: {sc_fast}");
    assert!(sc_fast <= sc_classic, "{name}: {sc_fast} vs {sc_classic}");
    assert!(fast_secs <= 30.0);

    for pair in classic.trace.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-9, "classic trace rose: {pair:?}");
    }
}

#[test]
fn sine_copy_synthesis() {
    run("sine440_1s.wav");
}

#[test]
fn speech_copy_synthesis() {
    run("speech_like_3s.wav");
}
