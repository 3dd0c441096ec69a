//! Corpus to CSV: training, separation, evaluation and the alpha sweep.

use std::fmt::Write as _;

use log::info;
use maskforge_core::audio::{pool_and_mix, AudioBuffer, PooledMix, StemSet};
use maskforge_core::bss_eval::{decompose, metrics, PairMetrics, SeparationMetrics};
use maskforge_core::grid::Grid;
use maskforge_core::masking::{
    apply_mask, ideal_binary_mask, nonvocal_mask_from_confidence, threshold_soft_mask,
    vocal_mask_from_confidence, BinaryMask, SoftMask,
};
use maskforge_core::mlp::{init_model, predict_masks, train_sgd_with, MlpModel, TrainConfig, TrainingPair};
use maskforge_core::nmf::{nmf_separate, nmf_train_class, repack_soft_mask, Matrix, NmfModel};
use maskforge_core::patching::{
    extract_patches, flatten, normalize_unit_scale, repack_mean, MeanPrediction, PatchConfig, PatchKind, PatchSet,
};
use maskforge_core::stft::{istft, split, stft, ComplexSpectrogram, StftConfig};
use maskforge_core::Source;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formats::SavedModel;
use crate::stats::{ci95_half_width, mean};

#[derive(Debug, Clone, PartialEq)]
pub struct DnnSettings {
    /// Hidden layer widths; input and output widths follow from the patch.
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmfSettings {
    pub rank_vocal: usize,
    pub rank_non_vocal: usize,
    pub train_iterations: usize,
    pub separate_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub stft: StftConfig,
    pub patch: PatchConfig,
    pub dnn: DnnSettings,
    pub nmf: NmfSettings,
    pub alphas: Vec<f64>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            stft: StftConfig::new(512, 128).expect("valid defaults"),
            patch: PatchConfig {
                width: 10,
                train_stride: 10,
                test_stride: 1,
            },
            dnn: DnnSettings {
                hidden: vec![1024],
                train: TrainConfig::default(),
            },
            nmf: NmfSettings {
                rank_vocal: 40,
                rank_non_vocal: 40,
                train_iterations: 200,
                separate_iterations: 200,
            },
            alphas: alpha_range(0.1, 0.9, 0.1).expect("valid defaults"),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        self.patch.validate()?;
        self.dnn.train.validate()?;
        if self.alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::Config("alphas must lie strictly between 0 and 1".into()));
        }
        Ok(())
    }
}

/// `start, start + step, ...` up to `stop` inclusive, each rounded to 12
/// decimals so that `0.1:0.9:0.1` yields exactly 0.1, 0.2, ..., 0.9.
pub fn alpha_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!("bad alpha range {start}:{stop}:{step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Parses `start:stop:step` or a comma-separated list.
pub fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse alphas {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        return alpha_range(v[0], v[1], v[2]);
    }
    text.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

/// Builds a rayon pool capped by `MASKFORGE_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("MASKFORGE_THREADS") {
        let n: usize = value
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("MASKFORGE_THREADS={value:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

/// Time-frequency view of one pooled song.
struct SongSpectra {
    vocal_mag: Grid<f64>,
    non_vocal_mag: Grid<f64>,
    mix_mag: Grid<f64>,
    /// Global maximum of the mixture magnitude.
    scale: f64,
}

fn song_spectra(mix: &PooledMix, cfg: &StftConfig) -> Result<SongSpectra> {
    let (vocal_mag, _) = split(&stft(&mix.vocal, cfg)?);
    let (non_vocal_mag, _) = split(&stft(&mix.non_vocal, cfg)?);
    let (mix_mag, _) = split(&stft(&mix.full, cfg)?);
    let (_, scale) = normalize_unit_scale(&mix_mag)?;
    Ok(SongSpectra {
        vocal_mag,
        non_vocal_mag,
        mix_mag,
        scale,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub bins: usize,
    pub width: usize,
    pub pairs: Vec<TrainingPair>,
}

fn song_training_pairs(song: &StemSet, cfg: &ExperimentConfig) -> Result<Vec<TrainingPair>> {
    let mix = pool_and_mix(song)?;
    let spectra = song_spectra(&mix, &cfg.stft)?;
    let ibm = ideal_binary_mask(&spectra.vocal_mag, &spectra.non_vocal_mag)?;
    let target = ibm.values.map(|&b| if b { 1.0 } else { 0.0 });
    let input = spectra.mix_mag.map(|v| v / spectra.scale);
    let (width, stride) = (cfg.patch.width, cfg.patch.train_stride);
    let inputs = extract_patches(&input, width, stride, PatchKind::MixtureInput)?;
    let targets = extract_patches(&target, width, stride, PatchKind::MaskTarget)?;
    Ok(inputs
        .patches
        .iter()
        .zip(&targets.patches)
        .map(|(x, t)| TrainingPair {
            input: flatten(x),
            target: flatten(t),
        })
        .collect())
}

/// Mixture patches paired with ideal-binary-mask patches, songs in order.
pub fn build_training_set(songs: &[StemSet], cfg: &ExperimentConfig) -> Result<TrainingSet> {
    if songs.is_empty() {
        return Err(Error::Config("no training songs".into()));
    }
    let per_song: Vec<Vec<TrainingPair>> = songs
        .par_iter()
        .map(|s| song_training_pairs(s, cfg).map_err(|e| e.in_song(&s.song_id)))
        .collect::<Result<_>>()?;
    Ok(TrainingSet {
        bins: cfg.stft.bins(),
        width: cfg.patch.width,
        pairs: per_song.into_iter().flatten().collect(),
    })
}

pub fn train_dnn(
    data: &TrainingSet,
    cfg: &ExperimentConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(MlpModel, Vec<f64>)> {
    let len = data.bins * data.width;
    let mut sizes = vec![len];
    sizes.extend(&cfg.dnn.hidden);
    sizes.push(len);
    let model = init_model(&sizes, cfg.seed)?;
    let train = TrainConfig {
        shuffle_seed: cfg.seed,
        ..cfg.dnn.train
    };
    info!(
        "training {:?} on {} examples for {} epochs",
        sizes,
        data.pairs.len(),
        train.epochs
    );
    Ok(train_sgd_with(model, &data.pairs, &train, |epoch, loss| {
        info!("epoch {} loss {loss:.6}", epoch + 1);
        on_epoch(epoch, loss)
    })?)
}

fn class_patches(song: &StemSet, cfg: &ExperimentConfig) -> Result<[Vec<Vec<f64>>; 2]> {
    let mix = pool_and_mix(song)?;
    let spectra = song_spectra(&mix, &cfg.stft)?;
    let columns = |mag: &Grid<f64>| -> Result<Vec<Vec<f64>>> {
        let scaled = mag.map(|v| v / spectra.scale);
        let set = extract_patches(&scaled, cfg.patch.width, cfg.patch.train_stride, PatchKind::MixtureInput)?;
        Ok(set.patches.iter().map(flatten).collect())
    };
    Ok([columns(&spectra.vocal_mag)?, columns(&spectra.non_vocal_mag)?])
}

/// Learns one dictionary per class from the source spectrogram patches,
/// each scaled by its song's mixture maximum.
pub fn train_nmf(songs: &[StemSet], cfg: &ExperimentConfig) -> Result<NmfModel> {
    if songs.is_empty() {
        return Err(Error::Config("no training songs".into()));
    }
    let per_song: Vec<[Vec<Vec<f64>>; 2]> = songs
        .par_iter()
        .map(|s| class_patches(s, cfg).map_err(|e| e.in_song(&s.song_id)))
        .collect::<Result<_>>()?;
    let mut vocal = Vec::new();
    let mut non_vocal = Vec::new();
    for [v, nv] in per_song {
        vocal.extend(v);
        non_vocal.extend(nv);
    }
    let (vocal, non_vocal) = (Matrix::from_columns(&vocal)?, Matrix::from_columns(&non_vocal)?);
    let n = &cfg.nmf;
    info!(
        "training NMF dictionaries r=({}, {}) on {} patches for {} iterations",
        n.rank_vocal,
        n.rank_non_vocal,
        vocal.cols(),
        n.train_iterations
    );
    let (w_v, w_nv) = rayon::join(
        || nmf_train_class(&vocal, n.rank_vocal, n.train_iterations, cfg.seed),
        || nmf_train_class(&non_vocal, n.rank_non_vocal, n.train_iterations, cfg.seed.wrapping_add(1)),
    );
    Ok(NmfModel::new(cfg.stft.bins(), cfg.patch.width, w_v?, w_nv?)?)
}

/// What a model says about a mixture before any threshold is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskEstimate {
    Dnn(MeanPrediction),
    Nmf(SoftMask),
}

impl MaskEstimate {
    /// Vocal and non-vocal binary masks at confidence `alpha`.
    pub fn masks(&self, alpha: f64) -> Result<(BinaryMask, BinaryMask)> {
        Ok(match self {
            MaskEstimate::Dnn(mean) => (
                vocal_mask_from_confidence(mean, alpha)?,
                nonvocal_mask_from_confidence(mean, alpha)?,
            ),
            MaskEstimate::Nmf(soft) => threshold_soft_mask(soft, alpha)?,
        })
    }
}

fn test_patches(spec: &ComplexSpectrogram, cfg: &ExperimentConfig) -> Result<PatchSet> {
    let (mag, _) = split(spec);
    let (unit, _) = normalize_unit_scale(&mag)?;
    Ok(extract_patches(&unit, cfg.patch.width, cfg.patch.test_stride, PatchKind::MixtureInput)?)
}

pub fn estimate_masks(spec: &ComplexSpectrogram, model: &SavedModel, cfg: &ExperimentConfig) -> Result<MaskEstimate> {
    let patches = test_patches(spec, cfg)?;
    match model {
        SavedModel::Dnn(m) => Ok(MaskEstimate::Dnn(repack_mean(&predict_masks(m, &patches)?)?)),
        SavedModel::Nmf(m) => {
            let (bins, width) = patches.patch_shape().expect("at least one patch");
            let columns: Vec<Vec<f64>> = patches.patches.iter().map(flatten).collect();
            let v = Matrix::from_columns(&columns)?;
            let sep = nmf_separate(&v, m, cfg.nmf.separate_iterations, cfg.seed)?;
            Ok(MaskEstimate::Nmf(repack_soft_mask(
                &sep.vocal,
                &sep.non_vocal,
                &patches.offsets,
                patches.total_frames,
                bins,
                width,
            )?))
        }
    }
}

/// Applies both masks to the mixture and inverts, trimmed to the mixture
/// length.
pub fn resolve_masks(
    spec: &ComplexSpectrogram,
    vocal: &BinaryMask,
    non_vocal: &BinaryMask,
) -> Result<(AudioBuffer, AudioBuffer)> {
    let v = istft(&apply_mask(spec, vocal)?)?;
    let a = istft(&apply_mask(spec, non_vocal)?)?;
    let len = spec.original_len();
    Ok((v.resized(len), a.resized(len)))
}

pub fn separate_song(
    mix: &AudioBuffer,
    model: &SavedModel,
    alpha: f64,
    cfg: &ExperimentConfig,
) -> Result<(AudioBuffer, AudioBuffer)> {
    let spec = stft(mix, &cfg.stft)?;
    let (mv, mnv) = estimate_masks(&spec, model, cfg)?.masks(alpha)?;
    resolve_masks(&spec, &mv, &mnv)
}

fn source_metrics(estimate: &[f64], refs: &[&[f64]], target: usize) -> Result<SeparationMetrics> {
    let n = refs[0].len();
    let mut est = estimate.to_vec();
    est.resize(n, 0.0);
    match decompose(&est, refs, target).and_then(|d| metrics(&d)) {
        Err(maskforge_core::Error::UndefinedMetrics) => Ok(SeparationMetrics::UNDEFINED),
        other => Ok(other?),
    }
}

/// Scores both estimates against both references. Estimates are trimmed or
/// zero-padded to the reference length. A silent estimate scores NaN for
/// every measure rather than failing.
pub fn evaluate(
    vocal: &AudioBuffer,
    non_vocal: &AudioBuffer,
    ref_vocal: &AudioBuffer,
    ref_non_vocal: &AudioBuffer,
) -> Result<PairMetrics> {
    if ref_vocal.len() != ref_non_vocal.len() {
        return Err(maskforge_core::Error::LengthMismatch {
            expected: ref_vocal.len(),
            found: ref_non_vocal.len(),
        }
        .into());
    }
    let refs = [ref_vocal.samples(), ref_non_vocal.samples()];
    let v = source_metrics(vocal.samples(), &refs, 0)?;
    let nv = source_metrics(non_vocal.samples(), &refs, 1)?;
    Ok(PairMetrics {
        vocal: v,
        non_vocal: nv,
        mean: SeparationMetrics::mean(&v, &nv),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub vocal: AudioBuffer,
    pub non_vocal: AudioBuffer,
    pub metrics: PairMetrics,
}

/// The ideal-binary-mask benchmark for one song.
pub fn ideal_mask_separate(song: &StemSet, cfg: &ExperimentConfig) -> Result<Separation> {
    let mix = pool_and_mix(song)?;
    let (mv, mnv) = ideal_masks(&mix, &cfg.stft)?;
    let spec = stft(&mix.full, &cfg.stft)?;
    let (vocal, non_vocal) = resolve_masks(&spec, &mv, &mnv)?;
    let metrics = evaluate(&vocal, &non_vocal, &mix.vocal, &mix.non_vocal)?;
    Ok(Separation {
        vocal,
        non_vocal,
        metrics,
    })
}

fn ideal_masks(mix: &PooledMix, cfg: &StftConfig) -> Result<(BinaryMask, BinaryMask)> {
    let (v, _) = split(&stft(&mix.vocal, cfg)?);
    let (nv, _) = split(&stft(&mix.non_vocal, cfg)?);
    let ibm = ideal_binary_mask(&v, &nv)?;
    let complement = ibm.complement();
    Ok((ibm, complement))
}

/// The unprocessed mixture used as both estimates.
pub fn mixture_baseline(song: &StemSet) -> Result<PairMetrics> {
    let mix = pool_and_mix(song)?;
    evaluate(&mix.full, &mix.full, &mix.vocal, &mix.non_vocal)
}

/// A way of separating test songs in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Model(SavedModel),
    /// Ideal binary mask from the true sources; alpha has no effect.
    Ideal,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Model(SavedModel::Dnn(_)) => "dnn",
            Method::Model(SavedModel::Nmf(_)) => "nmf",
            Method::Ideal => "ideal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scope {
    Vocal,
    NonVocal,
    Mean,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::Vocal, Scope::NonVocal, Scope::Mean];

    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Vocal => Source::Vocal.as_str(),
            Scope::NonVocal => Source::NonVocal.as_str(),
            Scope::Mean => "mean",
        }
    }

    pub fn pick(self, m: &PairMetrics) -> SeparationMetrics {
        match self {
            Scope::Vocal => m.vocal,
            Scope::NonVocal => m.non_vocal,
            Scope::Mean => m.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SongResult {
    pub song_id: String,
    pub method: &'static str,
    pub alpha: f64,
    pub metrics: PairMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub method: &'static str,
    pub scope: Scope,
    /// Across-song means.
    pub mean: SeparationMetrics,
    /// 95% half-widths for SDR, SIR, SAR; `None` when undefined.
    pub ci95: Option<[f64; 3]>,
    pub songs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub per_song: Vec<SongResult>,
    pub rows: Vec<SweepRow>,
}

fn sweep_song(song: &StemSet, methods: &[Method], alphas: &[f64], cfg: &ExperimentConfig) -> Result<Vec<SongResult>> {
    let mix = pool_and_mix(song)?;
    let spec = stft(&mix.full, &cfg.stft)?;
    let mut out = Vec::with_capacity(methods.len() * alphas.len());
    for method in methods {
        let mut push = |alpha: f64, metrics: PairMetrics| {
            out.push(SongResult {
                song_id: song.song_id.clone(),
                method: method.name(),
                alpha,
                metrics,
            })
        };
        match method {
            Method::Ideal => {
                let (mv, mnv) = ideal_masks(&mix, &cfg.stft)?;
                let (v, nv) = resolve_masks(&spec, &mv, &mnv)?;
                let metrics = evaluate(&v, &nv, &mix.vocal, &mix.non_vocal)?;
                for &alpha in alphas {
                    push(alpha, metrics);
                }
            }
            Method::Model(model) => {
                let estimate = estimate_masks(&spec, model, cfg)?;
                for &alpha in alphas {
                    let (mv, mnv) = estimate.masks(alpha)?;
                    let (v, nv) = resolve_masks(&spec, &mv, &mnv)?;
                    push(alpha, evaluate(&v, &nv, &mix.vocal, &mix.non_vocal)?);
                }
            }
        }
    }
    Ok(out)
}

/// Mean over songs of the defined (non-NaN) values.
fn aggregate(values: &[f64]) -> (f64, Option<f64>) {
    let defined: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if defined.is_empty() {
        return (f64::NAN, None);
    }
    (mean(&defined), ci95_half_width(&defined))
}

/// Separates and scores every song at every alpha, then aggregates across
/// songs. Songs run in parallel; results come back in canonical order:
/// method name, alpha, then vocal / non-vocal / mean.
pub fn sweep_alpha(songs: &[StemSet], methods: &[Method], alphas: &[f64], cfg: &ExperimentConfig) -> Result<SweepResult> {
    if songs.is_empty() {
        return Err(Error::Config("no test songs".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::Config("alphas must lie strictly between 0 and 1".into()));
    }
    let per_song: Vec<Vec<SongResult>> = songs
        .par_iter()
        .map(|s| sweep_song(s, methods, alphas, cfg).map_err(|e| e.in_song(&s.song_id)))
        .collect::<Result<_>>()?;
    let mut per_song: Vec<SongResult> = per_song.into_iter().flatten().collect();
    let song_index = |id: &str| songs.iter().position(|s| s.song_id == id);
    per_song.sort_by(|a, b| {
        (a.method, song_index(&a.song_id))
            .cmp(&(b.method, song_index(&b.song_id)))
            .then(a.alpha.total_cmp(&b.alpha))
    });

    let mut names: Vec<&'static str> = methods.iter().map(Method::name).collect();
    names.sort_unstable();
    names.dedup();
    let mut sorted_alphas = alphas.to_vec();
    sorted_alphas.sort_by(f64::total_cmp);
    sorted_alphas.dedup();
    let mut rows = Vec::new();
    for &method in &names {
        for &alpha in &sorted_alphas {
            let group: Vec<&SongResult> = per_song
                .iter()
                .filter(|r| r.method == method && r.alpha == alpha)
                .collect();
            for scope in Scope::ALL {
                let picked: Vec<SeparationMetrics> = group.iter().map(|r| scope.pick(&r.metrics)).collect();
                let column = |f: fn(&SeparationMetrics) -> f64| aggregate(&picked.iter().map(f).collect::<Vec<_>>());
                let (sdr, sdr_ci) = column(|m| m.sdr_db);
                let (sir, sir_ci) = column(|m| m.sir_db);
                let (sar, sar_ci) = column(|m| m.sar_db);
                let ci95 = match (sdr_ci, sir_ci, sar_ci) {
                    (Some(a), Some(b), Some(c)) => Some([a, b, c]),
                    _ => None,
                };
                rows.push(SweepRow {
                    alpha,
                    method,
                    scope,
                    mean: SeparationMetrics {
                        sdr_db: sdr,
                        sir_db: sir,
                        sar_db: sar,
                    },
                    ci95,
                    songs: group.len(),
                });
            }
        }
    }
    Ok(SweepResult { per_song, rows })
}

/// `inf`, `-inf`, `nan` or six decimals.
pub fn format_db(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.6}")
    }
}

pub const FIG2_HEADER: &str = "alpha,method,source,sdr_db,sir_db,sar_db,ci95";
pub const FIG3_HEADER: &str = "alpha,method,scope,sir_db,sar_db";
pub const SONG_HEADER: &str = "song_id,method,alpha,source,sdr_db,sir_db,sar_db";

impl SweepResult {
    /// Metric-versus-alpha table. `ci95` holds the SDR, SIR and SAR
    /// half-widths separated by `;`, or is empty when undefined.
    pub fn fig2_csv(&self) -> String {
        let mut out = String::from(FIG2_HEADER);
        out.push('\n');
        for r in &self.rows {
            let ci = r
                .ci95
                .map(|c| c.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(";"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.alpha,
                r.method,
                r.scope.as_str(),
                format_db(r.mean.sdr_db),
                format_db(r.mean.sir_db),
                format_db(r.mean.sar_db),
                ci
            );
        }
        out
    }

    /// SAR against SIR, one row per alpha, method and scope.
    pub fn fig3_csv(&self) -> String {
        let mut rows: Vec<&SweepRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            (a.method, a.scope)
                .cmp(&(b.method, b.scope))
                .then(a.alpha.total_cmp(&b.alpha))
        });
        let mut out = String::from(FIG3_HEADER);
        out.push('\n');
        for r in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.alpha,
                r.method,
                r.scope.as_str(),
                format_db(r.mean.sir_db),
                format_db(r.mean.sar_db)
            );
        }
        out
    }

    pub fn per_song_csv(&self) -> String {
        let mut out = String::from(SONG_HEADER);
        out.push('\n');
        for r in &self.per_song {
            for scope in [Scope::Vocal, Scope::NonVocal] {
                out.push_str(&song_row(&r.song_id, r.method, r.alpha, scope, &r.metrics));
            }
        }
        out
    }

    pub fn row(&self, method: &str, alpha: f64, scope: Scope) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.alpha == alpha && r.scope == scope)
    }
}

/// One line of the per-song schema, newline included.
pub fn song_row(song_id: &str, method: &str, alpha: f64, scope: Scope, m: &PairMetrics) -> String {
    let s = scope.pick(m);
    format!(
        "{song_id},{method},{alpha},{},{},{},{}\n",
        scope.as_str(),
        format_db(s.sdr_db),
        format_db(s.sir_db),
        format_db(s.sar_db)
    )
}
