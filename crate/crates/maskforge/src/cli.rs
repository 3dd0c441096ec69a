//! Command line interface.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use maskforge_core::audio::pool_and_mix;
use maskforge_core::mlp::Loss;
use maskforge_core::patching::PatchConfig;
use maskforge_core::stft::{stft, StftConfig};
use maskforge_core::Source;

use crate::formats::{load_model, save_binary_mask, save_model, save_training_set, SavedModel};
use crate::manifest::Manifest;
use crate::pipeline::{
    build_training_set, estimate_masks, evaluate, ideal_mask_separate, parse_alphas, resolve_masks, song_row,
    sweep_alpha, thread_pool, train_dnn, train_nmf, ExperimentConfig, Method, Scope, SONG_HEADER,
};
use crate::synth::{disjoint_song, synth_song, write_corpus, SynthConfig};
use crate::wav::{read_wav, write_wav, WavEncoding};

#[derive(Debug, Parser)]
#[command(name = "maskforge", version, about = "Vocal separation with probabilistic binary masks")]
pub struct Cli {
    /// Seed for every random choice (initialization, shuffling, NMF).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    #[arg(long, default_value_t = 512)]
    pub frame_len: usize,
    #[arg(long, default_value_t = 128)]
    pub hop: usize,
    /// Patch width T in frames.
    #[arg(long, default_value_t = 10)]
    pub patch_width: usize,
    /// Training window stride; defaults to the patch width.
    #[arg(long)]
    pub train_stride: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub test_stride: usize,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Number of leading songs that form the training split. Training uses
    /// them; evaluation commands use the songs after them.
    #[arg(long)]
    pub split: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LossArg {
    CrossEntropy,
    MeanSquared,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic corpus and its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 25)]
        songs: usize,
        #[arg(long, default_value_t = 16_000)]
        sample_rate: u32,
        #[arg(long, default_value_t = 2.0)]
        duration: f64,
        /// Disjoint-band songs instead of the glide/noise corpus.
        #[arg(long)]
        disjoint: bool,
    },
    /// Pool stems into vocal, non-vocal and full mixes for every song.
    Mix {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = WavEncoding::Float32)]
        encoding: WavEncoding,
    },
    /// Train the feed-forward mask predictor.
    TrainDnn {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        signal: SignalArgs,
        #[arg(long)]
        out: PathBuf,
        /// Hidden layer widths, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1024")]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        learning_rate: f64,
        #[arg(long, value_enum, default_value_t = LossArg::CrossEntropy)]
        loss: LossArg,
        /// Also write the training pairs as a float32 dump.
        #[arg(long)]
        dump_training_set: Option<PathBuf>,
        /// Write the per-epoch loss trace, one value per line.
        #[arg(long)]
        loss_trace: Option<PathBuf>,
    },
    /// Train vocal and non-vocal NMF dictionaries.
    TrainNmf {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        signal: SignalArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        rank_vocal: usize,
        #[arg(long, default_value_t = 40)]
        rank_non_vocal: usize,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
    },
    /// Separate one mixture file with a trained model.
    Separate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_vocal: PathBuf,
        #[arg(long)]
        out_accomp: PathBuf,
        #[command(flatten)]
        signal: SignalArgs,
        /// Activation updates for NMF models.
        #[arg(long, default_value_t = 200)]
        nmf_iterations: usize,
        #[arg(long, value_enum, default_value_t = WavEncoding::Float32)]
        encoding: WavEncoding,
        /// Write the vocal binary mask as a byte dump.
        #[arg(long)]
        dump_mask: Option<PathBuf>,
    },
    /// Separate songs with the ideal binary mask and print their metrics.
    IdealMask {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        signal: SignalArgs,
        /// Directory for the separated audio; metrics only when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Score estimate files against reference files.
    Evaluate {
        #[arg(long)]
        estimate_vocal: PathBuf,
        #[arg(long)]
        estimate_accomp: PathBuf,
        #[arg(long)]
        reference_vocal: PathBuf,
        #[arg(long)]
        reference_accomp: PathBuf,
        #[arg(long, default_value = "song")]
        song_id: String,
        #[arg(long, default_value = "external")]
        method: String,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Separate and score test songs over a range of alphas.
    SweepAlpha {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        signal: SignalArgs,
        /// Trained model files; repeat for several.
        #[arg(long, required_unless_present = "ideal")]
        model: Vec<PathBuf>,
        /// Include the ideal-binary-mask benchmark.
        #[arg(long)]
        ideal: bool,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long, default_value = "0.1:0.9:0.1")]
        alphas: String,
        #[arg(long, default_value_t = 200)]
        nmf_iterations: usize,
        /// Metric-versus-alpha table.
        #[arg(long)]
        csv: PathBuf,
        /// SAR-versus-SIR table.
        #[arg(long)]
        fig3_csv: Option<PathBuf>,
        /// Per-song rows.
        #[arg(long)]
        songs_csv: Option<PathBuf>,
    },
}

impl SignalArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> anyhow::Result<()> {
        cfg.stft = StftConfig::new(self.frame_len, self.hop)?;
        cfg.patch = PatchConfig {
            width: self.patch_width,
            train_stride: self.train_stride.unwrap_or(self.patch_width),
            test_stride: self.test_stride,
        };
        cfg.patch.validate()?;
        Ok(())
    }
}

impl CorpusArgs {
    fn load(&self, training: bool) -> anyhow::Result<Manifest> {
        let manifest = Manifest::load(&self.manifest)?;
        let manifest = match self.split {
            Some(n) => {
                let (train, test) = manifest.split(n);
                if training {
                    train
                } else {
                    test
                }
            }
            None => manifest,
        };
        if manifest.songs.is_empty() {
            bail!("{}: no songs selected", self.manifest.display());
        }
        Ok(manifest)
    }
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("{}: cannot write", path.display()))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig {
        seed: cli.seed,
        ..ExperimentConfig::default()
    };
    let pool = thread_pool()?;
    match cli.command {
        Command::Synth {
            out,
            songs,
            sample_rate,
            duration,
            disjoint,
        } => {
            let sc = SynthConfig {
                sample_rate,
                duration_s: duration,
            };
            if !(sample_rate > 0 && duration > 0.0) {
                bail!("sample rate and duration must be positive");
            }
            let corpus: Vec<_> = (0..songs)
                .map(|i| if disjoint { disjoint_song(cli.seed, i, &sc) } else { synth_song(cli.seed, i, &sc) })
                .collect();
            write_corpus(&out, &corpus)?;
            info!("wrote {} songs to {}", songs, out.display());
        }
        Command::Mix {
            manifest,
            out_dir,
            encoding,
        } => {
            let manifest = Manifest::load(&manifest)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("{}: cannot create", out_dir.display()))?;
            for song in &manifest.songs {
                let mix = pool_and_mix(&manifest.load_song(song)?).with_context(|| format!("song {}", song.id))?;
                for (name, audio) in [
                    (Source::Vocal.as_str(), &mix.vocal),
                    (Source::NonVocal.as_str(), &mix.non_vocal),
                    ("mix", &mix.full),
                ] {
                    write_wav(out_dir.join(format!("{}_{name}.wav", song.id)), audio, encoding)?;
                }
            }
        }
        Command::TrainDnn {
            corpus,
            signal,
            out,
            hidden,
            epochs,
            learning_rate,
            loss,
            dump_training_set,
            loss_trace,
        } => {
            signal.apply(&mut cfg)?;
            cfg.dnn.hidden = hidden;
            cfg.dnn.train.epochs = epochs;
            cfg.dnn.train.learning_rate = learning_rate;
            cfg.dnn.train.loss = match loss {
                LossArg::CrossEntropy => Loss::CrossEntropy,
                LossArg::MeanSquared => Loss::MeanSquared,
            };
            cfg.validate()?;
            let songs = corpus.load(true)?.load_all()?;
            let data = pool.install(|| build_training_set(&songs, &cfg))?;
            if let Some(path) = dump_training_set {
                save_training_set(&path, data.bins, data.width, &data.pairs)?;
            }
            let (model, trace) = train_dnn(&data, &cfg, |_, _| {})?;
            save_model(&out, &SavedModel::Dnn(model))?;
            if let Some(path) = loss_trace {
                let text: String = trace.iter().map(|l| format!("{l}\n")).collect();
                write_text(&path, &text)?;
            }
        }
        Command::TrainNmf {
            corpus,
            signal,
            out,
            rank_vocal,
            rank_non_vocal,
            iterations,
        } => {
            signal.apply(&mut cfg)?;
            cfg.nmf.rank_vocal = rank_vocal;
            cfg.nmf.rank_non_vocal = rank_non_vocal;
            cfg.nmf.train_iterations = iterations;
            let songs = corpus.load(true)?.load_all()?;
            let model = pool.install(|| train_nmf(&songs, &cfg))?;
            save_model(&out, &SavedModel::Nmf(model))?;
        }
        Command::Separate {
            model,
            alpha,
            input,
            out_vocal,
            out_accomp,
            signal,
            nmf_iterations,
            encoding,
            dump_mask,
        } => {
            signal.apply(&mut cfg)?;
            cfg.nmf.separate_iterations = nmf_iterations;
            let model = load_model(&model)?;
            let mix = read_wav(&input)?;
            let spec = stft(&mix, &cfg.stft)?;
            let (mv, mnv) = estimate_masks(&spec, &model, &cfg)?.masks(alpha)?;
            let (vocal, accomp) = resolve_masks(&spec, &mv, &mnv)?;
            write_wav(&out_vocal, &vocal, encoding)?;
            write_wav(&out_accomp, &accomp, encoding)?;
            if let Some(path) = dump_mask {
                save_binary_mask(&path, &mv)?;
            }
        }
        Command::IdealMask {
            corpus,
            signal,
            out_dir,
        } => {
            signal.apply(&mut cfg)?;
            let manifest = corpus.load(false)?;
            if let Some(dir) = &out_dir {
                fs::create_dir_all(dir).with_context(|| format!("{}: cannot create", dir.display()))?;
            }
            println!("{SONG_HEADER}");
            for entry in &manifest.songs {
                let song = manifest.load_song(entry)?;
                let sep = ideal_mask_separate(&song, &cfg).map_err(|e| e.in_song(&entry.id))?;
                if let Some(dir) = &out_dir {
                    write_wav(dir.join(format!("{}_vocal.wav", entry.id)), &sep.vocal, WavEncoding::Float32)?;
                    write_wav(dir.join(format!("{}_accomp.wav", entry.id)), &sep.non_vocal, WavEncoding::Float32)?;
                }
                for scope in [Scope::Vocal, Scope::NonVocal] {
                    print!("{}", song_row(&entry.id, "ideal", 0.5, scope, &sep.metrics));
                }
            }
        }
        Command::Evaluate {
            estimate_vocal,
            estimate_accomp,
            reference_vocal,
            reference_accomp,
            song_id,
            method,
            alpha,
        } => {
            let ev = read_wav(&estimate_vocal)?;
            let ea = read_wav(&estimate_accomp)?;
            let rv = read_wav(&reference_vocal)?;
            let ra = read_wav(&reference_accomp)?;
            let metrics = evaluate(&ev, &ea, &rv, &ra)?;
            println!("{SONG_HEADER}");
            for scope in [Scope::Vocal, Scope::NonVocal] {
                print!("{}", song_row(&song_id, &method, alpha, scope, &metrics));
            }
        }
        Command::SweepAlpha {
            corpus,
            signal,
            model,
            ideal,
            alphas,
            nmf_iterations,
            csv,
            fig3_csv,
            songs_csv,
        } => {
            signal.apply(&mut cfg)?;
            cfg.nmf.separate_iterations = nmf_iterations;
            cfg.alphas = parse_alphas(&alphas)?;
            cfg.validate()?;
            let mut methods = model
                .iter()
                .map(|p| load_model(p).map(Method::Model))
                .collect::<Result<Vec<_>, _>>()?;
            if ideal {
                methods.push(Method::Ideal);
            }
            let songs = corpus.load(false)?.load_all()?;
            let result = pool.install(|| sweep_alpha(&songs, &methods, &cfg.alphas, &cfg))?;
            write_text(&csv, &result.fig2_csv())?;
            if let Some(path) = fig3_csv {
                write_text(&path, &result.fig3_csv())?;
            }
            if let Some(path) = songs_csv {
                write_text(&path, &result.per_song_csv())?;
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and maps the outcome to an exit code:
/// 0 on success, 1 on failure, 2 for usage errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
