//! `ruspeech` subcommands. Each one is a thin adapter over `ruspeech_core`.
//!
//! Exit codes: 0 success, 1 validation findings, 2 usage error, 3 data
//! error, 4 internal error.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use ruspeech_core::audio::{read_wav, write_wav, CORPUS_SAMPLE_RATE};
use ruspeech_core::charset::Charset;
use ruspeech_core::corpus::{
    compute_stats, histogram, load_manifest, validate, CountingRules, HistogramAxis, Utterance,
};
use ruspeech_core::features::{
    linear_spectrogram, loss_lin, loss_mel, mel_spectrogram, read_rslf, write_rslf, LinearSpectrogram, MelConfig,
    MelSpectrogram, StftConfig,
};
use ruspeech_core::neural::{grad_check, GRAD_CHECK_OPS};
use ruspeech_core::phonemics::{transcribe, PhonemeDistribution, PhonemeString};
use ruspeech_core::textnorm::{normalize_with, AcronymLexicon};
use ruspeech_core::vocoder::{reconstruct, spectral_convergence, GriffinLimConfig, InitPhase};
use serde_json::{json, Value};

/// Version of every `--json` document.
pub const JSON_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Findings = 1,
    Usage = 2,
    Data = 3,
    Internal = 4,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Parser, Debug)]
#[command(name = "ruspeech", version, about = "Russian single-speaker TTS corpus toolkit")]
pub struct Cli {
    /// Base directory for relative paths.
    #[arg(long, global = true, env = "RUSLAN_DATA")]
    pub root: Option<PathBuf>,
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalize a text file line by line.
    Normalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// `ACRONYM<TAB>expansion` lines.
        #[arg(long)]
        acronyms: Option<PathBuf>,
    },
    /// Phonemic transcription of a text or of every manifest entry.
    G2p {
        #[arg(required_unless_present = "manifest", conflicts_with = "manifest")]
        text: Option<String>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Write the phoneme frequency table here.
        #[arg(long)]
        distribution: Option<PathBuf>,
    },
    /// Corpus statistics.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
        /// Exclude spaces from symbol counts.
        #[arg(long)]
        no_spaces: bool,
        /// Write duration.tsv and symbols.tsv histograms into this directory.
        #[arg(long)]
        histograms: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        bins: usize,
    },
    /// Report every manifest problem; exits 1 when there are any.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        charset: Option<PathBuf>,
        #[arg(long)]
        acronyms: Option<PathBuf>,
    },
    /// Linear and mel spectrograms for every utterance, as RSLF files.
    Features {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        stft: StftArgs,
        #[arg(long, default_value_t = 80)]
        mels: usize,
    },
    /// Magnitude-only resynthesis of a WAV file with fast Griffin-Lim.
    Copysynth {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 300)]
        iters: usize,
        #[arg(long, default_value_t = 0.99)]
        alpha: f64,
        /// Random initial phases from this seed; zero phases otherwise.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        stft: StftArgs,
        /// Write per-iteration spectral convergence (dB) here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Mean absolute difference of two RSLF spectrograms.
    Loss {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_enum)]
        kind: LossKind,
    },
    /// Finite-difference check of the analytic gradients.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check only this operation.
        #[arg(long)]
        op: Option<String>,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Serve the MOS survey backend.
    MosServe {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Bearer token for GET /report; generated when absent.
        #[arg(long)]
        admin_token: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct StftArgs {
    #[arg(long, default_value_t = 2048)]
    pub fft: usize,
    #[arg(long, default_value_t = 512)]
    pub hop: usize,
    #[arg(long, default_value_t = 2048)]
    pub win: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Mel,
    Lin,
}

#[derive(Debug)]
pub struct Failure {
    pub status: ExitStatus,
    pub message: String,
}

impl Failure {
    fn usage(e: impl Display) -> Self {
        Self { status: ExitStatus::Usage, message: e.to_string() }
    }

    fn data(e: impl Display) -> Self {
        Self { status: ExitStatus::Data, message: e.to_string() }
    }

    fn internal(e: impl Display) -> Self {
        Self { status: ExitStatus::Internal, message: e.to_string() }
    }

    fn at(path: &Path) -> impl Fn(&dyn Display) -> Self + '_ {
        move |e| Self::data(format!("{}: {e}", path.display()))
    }
}

type Outcome = Result<ExitStatus, Failure>;

struct Ctx<'a> {
    root: Option<PathBuf>,
    json: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn emit_json(&mut self, command: &str, mut doc: Value) -> Result<(), Failure> {
        let obj = doc.as_object_mut().expect("json documents are objects");
        obj.insert("schema".into(), json!(JSON_SCHEMA));
        obj.insert("command".into(), json!(command));
        let text = serde_json::to_string_pretty(&doc).map_err(Failure::internal)?;
        writeln!(self.out, "{text}").map_err(Failure::internal)
    }

    fn print(&mut self, text: impl Display) -> Result<(), Failure> {
        write!(self.out, "{text}").map_err(Failure::internal)
    }

    fn note(&mut self, text: impl Display) {
        let _ = writeln!(self.err, "{text}");
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                ExitStatus::Success
            } else {
                let _ = write!(err, "{}", e.render());
                ExitStatus::Usage
            };
        }
    };
    let mut ctx = Ctx { root: cli.root, json: cli.json, out, err };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(cli.command, &mut ctx)));
    match result {
        Ok(Ok(status)) => status,
        Ok(Err(f)) => {
            ctx.note(format!("error: {}", f.message));
            f.status
        }
        Err(_) => {
            ctx.note("error: internal failure");
            ExitStatus::Internal
        }
    }
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Outcome {
    match command {
        Command::Normalize { input, output, acronyms } => cmd_normalize(ctx, &input, &output, acronyms.as_deref()),
        Command::G2p { text, manifest, distribution } => cmd_g2p(ctx, text, manifest.as_deref(), distribution.as_deref()),
        Command::Stats { manifest, no_spaces, histograms, bins } => {
            cmd_stats(ctx, &manifest, CountingRules { count_spaces: !no_spaces }, histograms.as_deref(), bins)
        }
        Command::Validate { manifest, charset, acronyms } => {
            cmd_validate(ctx, &manifest, charset.as_deref(), acronyms.as_deref())
        }
        Command::Features { manifest, out_dir, stft, mels } => cmd_features(ctx, &manifest, &out_dir, stft, mels),
        Command::Copysynth { input, output, iters, alpha, seed, stft, trace } => {
            let init = seed.map_or(InitPhase::Zeros, InitPhase::Random);
            let cfg = GriffinLimConfig { iterations: iters, alpha, init };
            cmd_copysynth(ctx, &input, &output, cfg, stft, trace.as_deref())
        }
        Command::Loss { pred, target, kind } => cmd_loss(ctx, &pred, &target, kind),
        Command::Gradcheck { seed, op, eps, tolerance } => cmd_gradcheck(ctx, seed, op, eps, tolerance),
        Command::MosServe { port, data, bind, admin_token, seed } => {
            cmd_mos_serve(ctx, SocketAddr::new(bind, port), &data, admin_token, seed)
        }
    }
}

fn load_lexicon(ctx: &Ctx, path: Option<&Path>) -> Result<AcronymLexicon, Failure> {
    match path {
        Some(p) => {
            let p = ctx.path(p);
            AcronymLexicon::load(&p).map_err(|e| Failure::at(&p)(&e))
        }
        None => Ok(AcronymLexicon::new()),
    }
}

fn load_corpus(ctx: &Ctx, manifest: &Path) -> Result<Vec<Utterance>, Failure> {
    let path = ctx.path(manifest);
    load_manifest(&path, None).map_err(|e| Failure::at(&path)(&e))
}

fn stft_config(a: StftArgs) -> Result<StftConfig, Failure> {
    StftConfig::new(a.fft, a.win, a.hop).map_err(Failure::usage)
}

fn cmd_normalize(ctx: &mut Ctx, input: &Path, output: &Path, acronyms: Option<&Path>) -> Outcome {
    let lexicon = load_lexicon(ctx, acronyms)?;
    let in_path = ctx.path(input);
    let text = std::fs::read_to_string(&in_path).map_err(|e| Failure::at(&in_path)(&e))?;
    let mut normalized = String::with_capacity(text.len());
    let mut lines = 0;
    for (i, line) in text.lines().enumerate() {
        let out = normalize_with(line, &lexicon, Charset::bundled())
            .map_err(|e| Failure::data(format!("{}:{}: {e}", in_path.display(), i + 1)))?;
        normalized.push_str(&out);
        normalized.push('\n');
        lines += 1;
    }
    let out_path = ctx.path(output);
    std::fs::write(&out_path, &normalized).map_err(|e| Failure::at(&out_path)(&e))?;
    if ctx.json {
        ctx.emit_json("normalize", json!({ "lines": lines, "output": out_path }))?;
    } else {
        ctx.note(format!("normalized {lines} lines into {}", out_path.display()));
    }
    Ok(ExitStatus::Success)
}

fn cmd_g2p(ctx: &mut Ctx, text: Option<String>, manifest: Option<&Path>, distribution: Option<&Path>) -> Outcome {
    let items: Vec<(Option<String>, String)> = match (text, manifest) {
        (Some(t), _) => vec![(None, t)],
        (None, Some(m)) => load_corpus(ctx, m)?.into_iter().map(|u| (Some(u.id), u.text)).collect(),
        (None, None) => return Err(Failure::usage("give TEXT or --manifest")),
    };
    let transcriptions: Vec<PhonemeString> = items
        .iter()
        .map(|(id, t)| {
            transcribe(t).map_err(|e| Failure::data(format!("{}: {e}", id.as_deref().unwrap_or("text"))))
        })
        .collect::<Result<_, _>>()?;
    let dist = match distribution {
        Some(p) => {
            let d = PhonemeDistribution::from_transcriptions(&transcriptions).map_err(Failure::data)?;
            let p = ctx.path(p);
            std::fs::write(&p, d.to_tsv()).map_err(|e| Failure::at(&p)(&e))?;
            Some(d)
        }
        None => None,
    };
    if ctx.json {
        let rows: Vec<Value> = items
            .iter()
            .zip(&transcriptions)
            .map(|((id, t), p)| json!({ "id": id, "text": t, "phonemes": p.to_string() }))
            .collect();
        let freqs = dist.map(|d| {
            d.sorted().into_iter().map(|(p, f)| json!({ "phoneme": p.label(), "frequency": f })).collect::<Vec<_>>()
        });
        ctx.emit_json("g2p", json!({ "items": rows, "distribution": freqs }))?;
    } else {
        let mut text = String::new();
        for ((id, _), p) in items.iter().zip(&transcriptions) {
            match id {
                Some(id) => text.push_str(&format!("{id}\t{p}\n")),
                None => text.push_str(&format!("{p}\n")),
            }
        }
        ctx.print(text)?;
    }
    Ok(ExitStatus::Success)
}

fn cmd_stats(ctx: &mut Ctx, manifest: &Path, rules: CountingRules, histograms: Option<&Path>, bins: usize) -> Outcome {
    let started = Instant::now();
    let corpus = load_corpus(ctx, manifest)?;
    // Header reads dominate on a real corpus.
    corpus.par_iter().for_each(|u| {
        let _ = u.wav_info();
    });
    let charset = Charset::bundled();
    let stats = compute_stats(&corpus, charset, rules).map_err(Failure::data)?;
    if let Some(dir) = histograms {
        let dir = ctx.path(dir);
        std::fs::create_dir_all(&dir).map_err(|e| Failure::at(&dir)(&e))?;
        for (axis, name) in [(HistogramAxis::Duration, "duration.tsv"), (HistogramAxis::Symbols, "symbols.tsv")] {
            let h = histogram(&corpus, axis, bins, charset, rules).map_err(Failure::usage)?;
            let p = dir.join(name);
            std::fs::write(&p, h.to_tsv()).map_err(|e| Failure::at(&p)(&e))?;
        }
    }
    if ctx.json {
        let mut doc = serde_json::to_value(&stats).map_err(Failure::internal)?;
        doc["mean_words"] = json!(stats.mean_words());
        doc["total_duration_hms"] = json!(ruspeech_core::corpus::format_hms(stats.total_duration));
        ctx.emit_json("stats", doc)?;
    } else {
        ctx.print(stats.to_text())?;
    }
    ctx.note(format!("stats over {} utterances in {:.1} s", stats.sample_count, started.elapsed().as_secs_f64()));
    Ok(ExitStatus::Success)
}

fn cmd_validate(ctx: &mut Ctx, manifest: &Path, charset: Option<&Path>, acronyms: Option<&Path>) -> Outcome {
    let lexicon = load_lexicon(ctx, acronyms)?;
    let charset = match charset {
        Some(p) => {
            let p = ctx.path(p);
            Charset::load(&p).map_err(|e| Failure::at(&p)(&e))?
        }
        None => Charset::bundled().clone(),
    };
    let corpus = load_corpus(ctx, manifest)?;
    let findings = validate(&corpus, &charset, &lexicon);
    if ctx.json {
        ctx.emit_json("validate", json!({ "utterances": corpus.len(), "findings": findings }))?;
    } else {
        let text: String = findings.iter().map(|f| format!("{f}\n")).collect();
        ctx.print(text)?;
        ctx.note(format!("{} findings in {} utterances", findings.len(), corpus.len()));
    }
    Ok(if findings.is_empty() { ExitStatus::Success } else { ExitStatus::Findings })
}

fn cmd_features(ctx: &mut Ctx, manifest: &Path, out_dir: &Path, stft: StftArgs, mels: usize) -> Outcome {
    let cfg = stft_config(stft)?;
    let mel_cfg = MelConfig { bands: mels, ..MelConfig::default() };
    let corpus = load_corpus(ctx, manifest)?;
    let dir = ctx.path(out_dir);
    std::fs::create_dir_all(&dir).map_err(|e| Failure::at(&dir)(&e))?;
    let rows: Vec<Value> = corpus
        .par_iter()
        .map(|u| {
            let fail = |e: &dyn Display| Failure::data(format!("{}: {e}", u.id));
            let wave = read_wav(&u.audio_path).map_err(|e| fail(&e))?;
            let lin = linear_spectrogram(&wave, &cfg).map_err(|e| fail(&e))?;
            let mel = mel_spectrogram(&lin, &mel_cfg).map_err(|e| fail(&e))?;
            let lin_path = dir.join(format!("{}.lin.rslf", u.id));
            let mel_path = dir.join(format!("{}.mel.rslf", u.id));
            write_rslf(&lin_path, lin.mags()).map_err(|e| fail(&e))?;
            write_rslf(&mel_path, mel.values()).map_err(|e| fail(&e))?;
            Ok(json!({ "id": u.id, "frames": lin.n_frames(), "lin": lin_path, "mel": mel_path }))
        })
        .collect::<Result<_, Failure>>()?;
    if ctx.json {
        ctx.emit_json("features", json!({ "bins": cfg.n_bins(), "mels": mels, "items": rows }))?;
    } else {
        let text: String = rows.iter().map(|r| format!("{}\t{}\n", r["id"].as_str().unwrap_or(""), r["frames"])).collect();
        ctx.print(text)?;
    }
    Ok(ExitStatus::Success)
}

fn cmd_copysynth(
    ctx: &mut Ctx,
    input: &Path,
    output: &Path,
    cfg: GriffinLimConfig,
    stft: StftArgs,
    trace: Option<&Path>,
) -> Outcome {
    cfg.validate().map_err(Failure::usage)?;
    let stft = stft_config(stft)?;
    let in_path = ctx.path(input);
    let wave = read_wav(&in_path).map_err(|e| Failure::at(&in_path)(&e))?;
    let target = linear_spectrogram(&wave, &stft).map_err(Failure::data)?;
    let started = Instant::now();
    let rec = reconstruct(&target, &cfg, trace.is_some()).map_err(Failure::data)?;
    let seconds = started.elapsed().as_secs_f64();
    let sc = spectral_convergence(&target, &rec.wave).map_err(Failure::data)?;
    let out_path = ctx.path(output);
    write_wav(&rec.wave, &out_path).map_err(|e| Failure::at(&out_path)(&e))?;
    if let Some(t) = trace {
        let t = ctx.path(t);
        let text: String = rec.trace.iter().enumerate().map(|(i, v)| format!("{}\t{v}\n", i + 1)).collect();
        std::fs::write(&t, text).map_err(|e| Failure::at(&t)(&e))?;
    }
    if ctx.json {
        ctx.emit_json(
            "copysynth",
            json!({
                "iterations": cfg.iterations,
                "alpha": cfg.alpha,
                "spectral_convergence_db": sc,
                "seconds": seconds,
                "output": out_path,
            }),
        )?;
    } else {
        ctx.print(format!("spectral convergence: {sc:.2} dB\n"))?;
        ctx.note(format!("{} iterations, alpha {}, {seconds:.2} s", cfg.iterations, cfg.alpha));
    }
    Ok(ExitStatus::Success)
}

fn cmd_loss(ctx: &mut Ctx, pred: &Path, target: &Path, kind: LossKind) -> Outcome {
    let read = |p: &Path| {
        let p = ctx.path(p);
        read_rslf(&p).map_err(|e| Failure::at(&p)(&e))
    };
    let (a, b) = (read(pred)?, read(target)?);
    let value = match kind {
        LossKind::Mel => {
            let a = MelSpectrogram::new(a, true).map_err(Failure::data)?;
            let b = MelSpectrogram::new(b, true).map_err(Failure::data)?;
            loss_mel(&a, &b).map_err(Failure::data)?
        }
        LossKind::Lin => {
            let bins = a.ncols();
            if bins < 2 {
                return Err(Failure::data("a linear spectrogram needs at least two bins"));
            }
            let fft = 2 * (bins - 1);
            let cfg = StftConfig::new(fft, fft, (fft / 4).max(1)).map_err(Failure::data)?;
            let a = LinearSpectrogram::new(a, CORPUS_SAMPLE_RATE, cfg).map_err(Failure::data)?;
            let b = LinearSpectrogram::new(b, CORPUS_SAMPLE_RATE, cfg).map_err(Failure::data)?;
            loss_lin(&a, &b).map_err(Failure::data)?
        }
    };
    let name = match kind {
        LossKind::Mel => "mel",
        LossKind::Lin => "lin",
    };
    if ctx.json {
        ctx.emit_json("loss", json!({ "kind": name, "loss": value }))?;
    } else {
        ctx.print(format!("{value}\n"))?;
    }
    Ok(ExitStatus::Success)
}

fn cmd_gradcheck(ctx: &mut Ctx, seed: u64, op: Option<String>, eps: f64, tolerance: f64) -> Outcome {
    let ops: Vec<String> = match op {
        Some(o) => vec![o],
        None => GRAD_CHECK_OPS.iter().map(|s| s.to_string()).collect(),
    };
    let mut reports = Vec::new();
    for op in &ops {
        reports.push(grad_check(op, seed, eps).map_err(Failure::usage)?);
    }
    let passed = reports.iter().all(|r| r.max_rel_err <= tolerance);
    if ctx.json {
        ctx.emit_json("gradcheck", json!({ "tolerance": tolerance, "passed": passed, "reports": reports }))?;
    } else {
        let mut text = String::new();
        for r in &reports {
            let verdict = if r.max_rel_err <= tolerance { "ok" } else { "FAIL" };
            text.push_str(&format!("{}\tseed {}\tmax rel err {:.3e}\t{verdict}\n", r.op, r.seed, r.max_rel_err));
            for t in &r.tensors {
                text.push_str(&format!("  {}\t{}\t{:.3e}\n", t.name, t.len, t.max_rel_err));
            }
        }
        ctx.print(text)?;
    }
    Ok(if passed { ExitStatus::Success } else { ExitStatus::Findings })
}

fn cmd_mos_serve(ctx: &mut Ctx, addr: SocketAddr, data: &Path, admin_token: Option<String>, seed: u64) -> Outcome {
    use rand::Rng;
    let token = admin_token.unwrap_or_else(|| {
        let mut rng = rand::rng();
        (0..32).map(|_| char::from_digit(rng.random_range(0..16), 16).expect("hex digit")).collect()
    });
    let mut config = ruspeech_mos::MosConfig::new(ctx.path(data), token.clone());
    config.seed = seed;
    let state = ruspeech_mos::MosState::open(&config).map_err(Failure::data)?;
    ctx.note(format!("listening on http://{addr}"));
    ctx.note(format!("admin token: {token}"));
    let runtime = tokio::runtime::Runtime::new().map_err(Failure::internal)?;
    runtime
        .block_on(ruspeech_mos::serve(addr, Arc::new(state)))
        .map_err(|e| Failure::data(format!("{addr}: {e}")))?;
    Ok(ExitStatus::Success)
}
