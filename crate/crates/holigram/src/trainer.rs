//! Skip-gram and CBOW training with negative sampling.
//!
//! The two architectures differ in their update direction: a Skip-gram step
//! updates the center word's input vector and the output vectors of the
//! context and negatives; a CBOW step updates the context words' input
//! vectors and the output vectors of the center and negatives.

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{sentence_windows, TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::util::{derive_seed, derive_seed_n};

pub const SIGMOID_CLAMP: f64 = 30.0;
pub const NEGATIVE_EXPONENT: f64 = 0.75;
const MAX_RESAMPLE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    SkipGram,
    Cbow,
}

impl Architecture {
    pub fn as_str(&self) -> &'static str {
        match self {
            Architecture::SkipGram => "skipgram",
            Architecture::Cbow => "cbow",
        }
    }
}

impl FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skipgram" => Ok(Architecture::SkipGram),
            "cbow" => Ok(Architecture::Cbow),
            other => Err(Error::Contract(format!(
                "unknown architecture {other:?} (expected skipgram or cbow)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub dim: usize,
    pub max_window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr_initial: f64,
    pub lr_min: f64,
    pub subsample_t: Option<f64>,
    pub min_count: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let lr_initial = 0.025;
        TrainConfig {
            architecture: Architecture::SkipGram,
            dim: 100,
            max_window: 5,
            negatives: 5,
            epochs: 5,
            lr_initial,
            lr_min: lr_initial * 1e-4,
            subsample_t: Some(1e-4),
            min_count: 5,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::Contract("dim must be >= 1".into()));
        }
        if self.max_window < 1 {
            return Err(Error::Contract("max_window must be >= 1".into()));
        }
        if self.negatives < 1 {
            return Err(Error::Contract("negatives must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(Error::Contract("epochs must be >= 1".into()));
        }
        if !(self.lr_min > 0.0 && self.lr_min <= self.lr_initial) {
            return Err(Error::Contract("require 0 < lr_min <= lr_initial".into()));
        }
        if let Some(t) = self.subsample_t {
            if !(t > 0.0) {
                return Err(Error::Contract("subsample_t must be > 0".into()));
            }
        }
        if self.min_count < 1 {
            return Err(Error::Contract("min_count must be >= 1".into()));
        }
        if self.workers < 1 {
            return Err(Error::Contract("workers must be >= 1".into()));
        }
        Ok(())
    }
}

/// Input ("word") and output ("context") vector tables, row-major V x D.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrices {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    pub vocab_size: usize,
    pub dim: usize,
}

impl EmbeddingMatrices {
    pub fn input_row(&self, id: u32) -> &[f64] {
        let d = self.dim;
        &self.input[id as usize * d..(id as usize + 1) * d]
    }

    pub fn output_row(&self, id: u32) -> &[f64] {
        let d = self.dim;
        &self.output[id as usize * d..(id as usize + 1) * d]
    }
}

/// Input entries i.i.d. uniform in [-0.5/D, 0.5/D]; output all zero.
pub fn init_matrices(vocab_size: usize, dim: usize, seed: u64) -> EmbeddingMatrices {
    assert!(vocab_size >= 1 && dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.5 / dim as f64;
    let input: Vec<f64> = (0..vocab_size * dim)
        .map(|_| rng.gen_range(-half..half))
        .collect();
    EmbeddingMatrices {
        input,
        output: vec![0.0; vocab_size * dim],
        vocab_size,
        dim,
    }
}

#[inline]
fn clamp_score(x: f64) -> f64 {
    x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-clamp_score(x)).exp())
}

/// log(sigmoid(x)) with the clamped argument; finite for all x.
#[inline]
fn log_sigmoid(x: f64) -> f64 {
    -(1.0 + (-clamp_score(x)).exp()).ln()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling logistic loss:
/// `-log sigmoid(v.u_pos) - sum_i log sigmoid(-v.u_neg_i)`.
pub fn sgns_loss(v: &[f64], u_pos: &[f64], u_negs: &[&[f64]]) -> Result<f64> {
    let d = v.len();
    if u_pos.len() != d || u_negs.iter().any(|u| u.len() != d) {
        return Err(Error::Contract("sgns_loss: dimension mismatch".into()));
    }
    let mut loss = -log_sigmoid(dot(v, u_pos));
    for u in u_negs {
        loss -= log_sigmoid(-dot(v, u));
    }
    Ok(loss)
}

/// Loss and analytic gradients w.r.t. v, u_pos and each u_neg.
pub fn sgns_loss_grad(
    v: &[f64],
    u_pos: &[f64],
    u_negs: &[&[f64]],
) -> Result<(f64, Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let d = v.len();
    let loss = sgns_loss(v, u_pos, u_negs)?;
    let mut grad_v = vec![0.0; d];
    let g_pos = sigmoid(dot(v, u_pos)) - 1.0;
    let grad_pos: Vec<f64> = v.iter().map(|&x| g_pos * x).collect();
    for i in 0..d {
        grad_v[i] += g_pos * u_pos[i];
    }
    let mut grad_negs = Vec::with_capacity(u_negs.len());
    for u in u_negs {
        let g = sigmoid(dot(v, u));
        grad_negs.push(v.iter().map(|&x| g * x).collect::<Vec<f64>>());
        for i in 0..d {
            grad_v[i] += g * u[i];
        }
    }
    Ok((loss, grad_v, grad_pos, grad_negs))
}

/// Raw view used by the lock-free multi-worker path. Workers update shared
/// rows without mutual exclusion; lost or torn updates are tolerated by
/// contract.
struct RawMatrices {
    input: *mut f64,
    output: *mut f64,
    dim: usize,
}

unsafe impl Send for RawMatrices {}
unsafe impl Sync for RawMatrices {}

impl RawMatrices {
    fn of(m: &mut EmbeddingMatrices) -> RawMatrices {
        RawMatrices {
            input: m.input.as_mut_ptr(),
            output: m.output.as_mut_ptr(),
            dim: m.dim,
        }
    }

    #[inline]
    unsafe fn input_row(&self, id: u32) -> &mut [f64] {
        std::slice::from_raw_parts_mut(self.input.add(id as usize * self.dim), self.dim)
    }

    #[inline]
    unsafe fn output_row(&self, id: u32) -> &mut [f64] {
        std::slice::from_raw_parts_mut(self.output.add(id as usize * self.dim), self.dim)
    }
}

unsafe fn step_skipgram_raw(
    m: &RawMatrices,
    center: u32,
    context: u32,
    negatives: &[u32],
    lr: f64,
    scratch: &mut StepScratch,
) -> f64 {
    if center == context {
        return 0.0;
    }
    let d = m.dim;
    scratch.v.clear();
    scratch.v.extend_from_slice(m.input_row(center));
    let v = &scratch.v;
    scratch.acc.clear();
    scratch.acc.resize(d, 0.0);

    let mut loss;
    {
        let u_pos = m.output_row(context);
        let score = dot(v, u_pos);
        loss = -log_sigmoid(score);
        let g = sigmoid(score) - 1.0;
        for i in 0..d {
            scratch.acc[i] += g * u_pos[i];
            u_pos[i] -= lr * g * v[i];
        }
    }
    for &neg in negatives {
        let u_neg = m.output_row(neg);
        let score = dot(v, u_neg);
        loss -= log_sigmoid(-score);
        let g = sigmoid(score);
        for i in 0..d {
            scratch.acc[i] += g * u_neg[i];
            u_neg[i] -= lr * g * v[i];
        }
    }
    let input = m.input_row(center);
    for i in 0..d {
        input[i] -= lr * scratch.acc[i];
    }
    loss
}

unsafe fn step_cbow_raw(
    m: &RawMatrices,
    contexts: &[u32],
    center: u32,
    negatives: &[u32],
    lr: f64,
    scratch: &mut StepScratch,
) -> f64 {
    debug_assert!(!contexts.is_empty());
    let d = m.dim;
    let n = contexts.len() as f64;
    scratch.v.clear();
    scratch.v.resize(d, 0.0);
    for &c in contexts {
        let row = m.input_row(c);
        for i in 0..d {
            scratch.v[i] += row[i];
        }
    }
    for x in scratch.v.iter_mut() {
        *x /= n;
    }
    let h = &scratch.v;
    scratch.acc.clear();
    scratch.acc.resize(d, 0.0);

    let mut loss;
    {
        let u_pos = m.output_row(center);
        let score = dot(h, u_pos);
        loss = -log_sigmoid(score);
        let g = sigmoid(score) - 1.0;
        for i in 0..d {
            scratch.acc[i] += g * u_pos[i];
            u_pos[i] -= lr * g * h[i];
        }
    }
    for &neg in negatives {
        let u_neg = m.output_row(neg);
        let score = dot(h, u_neg);
        loss -= log_sigmoid(-score);
        let g = sigmoid(score);
        for i in 0..d {
            scratch.acc[i] += g * u_neg[i];
            u_neg[i] -= lr * g * h[i];
        }
    }
    for &c in contexts {
        let row = m.input_row(c);
        for i in 0..d {
            row[i] -= lr * scratch.acc[i] / n;
        }
    }
    loss
}

#[derive(Default)]
struct StepScratch {
    v: Vec<f64>,
    acc: Vec<f64>,
}

/// One Skip-gram SGD step. Updates `input[center]`, `output[context]` and
/// `output[negatives]` in place, using the pre-step value of `input[center]`
/// for all output-side gradients. Returns the pre-step loss. A degenerate
/// center == context pair is skipped with loss 0.
pub fn sgns_step_skipgram(
    m: &mut EmbeddingMatrices,
    center: u32,
    context: u32,
    negatives: &[u32],
    lr: f64,
) -> f64 {
    let raw = RawMatrices::of(m);
    let mut scratch = StepScratch::default();
    unsafe { step_skipgram_raw(&raw, center, context, negatives, lr, &mut scratch) }
}

/// One CBOW SGD step. The hidden vector is the mean of the context input
/// rows; its gradient is split equally over the context rows. Updates the
/// context input rows and the output rows of center/negatives.
pub fn sgns_step_cbow(
    m: &mut EmbeddingMatrices,
    contexts: &[u32],
    center: u32,
    negatives: &[u32],
    lr: f64,
) -> Result<f64> {
    if contexts.is_empty() {
        return Err(Error::Contract("sgns_step_cbow: empty context".into()));
    }
    let raw = RawMatrices::of(m);
    let mut scratch = StepScratch::default();
    Ok(unsafe { step_cbow_raw(&raw, contexts, center, negatives, lr, &mut scratch) })
}

/// Unigram^0.75 sampling table. `slots` quantizes the cumulative
/// distribution to `resolution` equal-probability cells.
#[derive(Debug, Clone)]
pub struct NegativeSamplingTable {
    slots: Vec<u32>,
    probs: Vec<f64>,
}

pub fn build_sampling_table(vocab: &Vocabulary, resolution: usize) -> NegativeSamplingTable {
    let v = vocab.len();
    assert!(resolution >= v, "resolution must be >= vocabulary size");
    let weights: Vec<f64> = (0..v as u32)
        .map(|id| (vocab.count(id) as f64).powf(NEGATIVE_EXPONENT))
        .collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut slots = Vec::with_capacity(resolution);
    let mut id = 0usize;
    let mut cum = probs[0];
    for s in 0..resolution {
        let u = (s as f64 + 0.5) / resolution as f64;
        while u > cum && id + 1 < v {
            id += 1;
            cum += probs[id];
        }
        slots.push(id as u32);
    }
    NegativeSamplingTable { slots, probs }
}

impl NegativeSamplingTable {
    /// Target probability of `id` (exact count^0.75 distribution).
    pub fn probability(&self, id: u32) -> f64 {
        self.probs[id as usize]
    }

    /// Fraction of table cells assigned to `id`.
    pub fn table_probability(&self, id: u32) -> f64 {
        let n = self.slots.iter().filter(|&&s| s == id).count();
        n as f64 / self.slots.len() as f64
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        self.slots[rng.gen_range(0..self.slots.len())]
    }

    /// Draw a negative, resampling any draw equal to `exclude`. Gives up
    /// after a bounded number of attempts (single-word vocabularies).
    pub fn sample_excluding(&self, rng: &mut ChaCha8Rng, exclude: u32) -> Option<u32> {
        for _ in 0..MAX_RESAMPLE_ATTEMPTS {
            let id = self.sample(rng);
            if id != exclude {
                return Some(id);
            }
        }
        None
    }
}

/// Running mean loss per progress decile.
#[derive(Debug, Clone, Default)]
pub struct TrainStats {
    pub decile_loss_sum: Vec<f64>,
    pub decile_steps: Vec<u64>,
    pub steps: u64,
}

impl TrainStats {
    fn new() -> Self {
        TrainStats {
            decile_loss_sum: vec![0.0; 10],
            decile_steps: vec![0; 10],
            steps: 0,
        }
    }

    fn record(&mut self, decile: usize, loss: f64) {
        self.decile_loss_sum[decile] += loss;
        self.decile_steps[decile] += 1;
        self.steps += 1;
    }

    fn merge(&mut self, other: &TrainStats) {
        for i in 0..10 {
            self.decile_loss_sum[i] += other.decile_loss_sum[i];
            self.decile_steps[i] += other.decile_steps[i];
        }
        self.steps += other.steps;
    }

    pub fn decile_mean_loss(&self) -> Vec<f64> {
        (0..10)
            .map(|i| {
                if self.decile_steps[i] == 0 {
                    0.0
                } else {
                    self.decile_loss_sum[i] / self.decile_steps[i] as f64
                }
            })
            .collect()
    }
}

/// Train embeddings over the stream. With `workers = 1` the result is
/// bit-reproducible for a fixed config; with more workers the gradient
/// updates race by design and only statistical quality is guaranteed.
pub fn train(
    stream: &TokenStream,
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<(EmbeddingMatrices, TrainStats)> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::Runtime("cannot train on an empty token stream".into()));
    }
    let table = build_sampling_table(vocab, (vocab.len() * 16).max(1_000_000));
    let mut matrices = init_matrices(vocab.len(), config.dim, derive_seed(config.seed, "init"));
    let total_tokens = stream.token_count() * config.epochs as u64;
    let progress = AtomicU64::new(0);
    let raw = RawMatrices::of(&mut matrices);
    let n_sentences = stream.sentences().len() as u64;

    let mut stats = TrainStats::new();
    if config.workers == 1 {
        let s = run_worker(
            &raw, stream, vocab, config, &table, &progress, total_tokens, n_sentences, 0,
        );
        stats.merge(&s);
    } else {
        let worker_stats = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..config.workers {
                let raw = &raw;
                let table = &table;
                let progress = &progress;
                handles.push(scope.spawn(move || {
                    run_worker(
                        raw, stream, vocab, config, table, progress, total_tokens, n_sentences, w,
                    )
                }));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect::<Vec<_>>()
        });
        for s in &worker_stats {
            stats.merge(s);
        }
    }
    log::debug!(
        "trained {} steps, decile mean loss {:?}",
        stats.steps,
        stats.decile_mean_loss()
    );
    Ok((matrices, stats))
}

#[allow(clippy::too_many_arguments)]
fn run_worker(
    raw: &RawMatrices,
    stream: &TokenStream,
    vocab: &Vocabulary,
    config: &TrainConfig,
    table: &NegativeSamplingTable,
    progress: &AtomicU64,
    total_tokens: u64,
    n_sentences: u64,
    worker: usize,
) -> TrainStats {
    let mut stats = TrainStats::new();
    let mut scratch = StepScratch::default();
    let mut negatives: Vec<u32> = Vec::with_capacity(config.negatives);
    for epoch in 0..config.epochs as u64 {
        for (s_idx, sentence) in stream.sentences().iter().enumerate() {
            if s_idx % config.workers != worker {
                continue;
            }
            let done = progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
            let frac = done as f64 / total_tokens as f64;
            let lr = (config.lr_initial * (1.0 - frac)).max(config.lr_min);
            let decile = (((frac * 10.0) as usize).min(9)).max(0);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_n(
                config.seed,
                "sentence",
                epoch * n_sentences + s_idx as u64,
            ));
            let samples =
                sentence_windows(sentence, vocab, config.max_window, config.subsample_t, &mut rng);
            for sample in &samples {
                match config.architecture {
                    Architecture::SkipGram => {
                        for &ctx in &sample.contexts {
                            negatives.clear();
                            for _ in 0..config.negatives {
                                if let Some(n) = table.sample_excluding(&mut rng, ctx) {
                                    negatives.push(n);
                                }
                            }
                            let loss = unsafe {
                                step_skipgram_raw(
                                    raw,
                                    sample.center,
                                    ctx,
                                    &negatives,
                                    lr,
                                    &mut scratch,
                                )
                            };
                            stats.record(decile, loss);
                        }
                    }
                    Architecture::Cbow => {
                        negatives.clear();
                        for _ in 0..config.negatives {
                            if let Some(n) = table.sample_excluding(&mut rng, sample.center) {
                                negatives.push(n);
                            }
                        }
                        let loss = unsafe {
                            step_cbow_raw(
                                raw,
                                &sample.contexts,
                                sample.center,
                                &negatives,
                                lr,
                                &mut scratch,
                            )
                        };
                        stats.record(decile, loss);
                    }
                }
            }
        }
    }
    stats
}
