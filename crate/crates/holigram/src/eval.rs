//! Embedding queries and evaluation: cosine similarity, nearest neighbors,
//! 3CosAdd analogies and the Skip-gram vs CBOW comparison.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::persist::config_hash;
use crate::trainer::{train, Architecture, EmbeddingMatrices, TrainConfig};

/// Immutable query structure over an input-vector table. Rows with zero
/// norm are flagged and excluded from queries.
pub struct EmbeddingSpace {
    vocab: Vocabulary,
    raw: Vec<f64>,
    unit: Vec<f64>,
    dim: usize,
    zero_norm: Vec<bool>,
}

impl EmbeddingSpace {
    pub fn new(vocab: Vocabulary, raw: Vec<f64>, dim: usize) -> Result<Self> {
        let v = vocab.len();
        if raw.len() != v * dim {
            return Err(Error::Contract(format!(
                "matrix size {} does not match V={v} x D={dim}",
                raw.len()
            )));
        }
        let mut unit = raw.clone();
        let mut zero_norm = vec![false; v];
        for (i, zero) in zero_norm.iter_mut().enumerate() {
            let row = &mut unit[i * dim..(i + 1) * dim];
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for x in row.iter_mut() {
                    *x /= norm;
                }
            } else {
                *zero = true;
            }
        }
        Ok(EmbeddingSpace {
            vocab,
            raw,
            unit,
            dim,
            zero_norm,
        })
    }

    pub fn from_matrices(vocab: Vocabulary, m: &EmbeddingMatrices) -> Result<Self> {
        Self::new(vocab, m.input.clone(), m.dim)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn raw_row(&self, id: u32) -> &[f64] {
        &self.raw[id as usize * self.dim..(id as usize + 1) * self.dim]
    }

    pub fn unit_row(&self, id: u32) -> &[f64] {
        &self.unit[id as usize * self.dim..(id as usize + 1) * self.dim]
    }

    pub fn has_zero_norm(&self, id: u32) -> bool {
        self.zero_norm[id as usize]
    }

    /// Top-n rows by cosine against `query`, excluding `exclude` and
    /// zero-norm rows. Ties break by ascending id. Returns fewer than n
    /// when candidates run out.
    pub fn nearest(&self, query: &[f64], n: usize, exclude: &HashSet<u32>) -> Vec<(u32, f64)> {
        assert!(n >= 1);
        let qnorm = query.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut scored: Vec<(u32, f64)> = (0..self.vocab.len() as u32)
            .filter(|id| !exclude.contains(id) && !self.zero_norm[*id as usize])
            .map(|id| {
                let cos = if qnorm > 0.0 {
                    dot(query, self.unit_row(id)) / qnorm
                } else {
                    0.0
                };
                (id, cos)
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.truncate(n);
        scored
    }

    /// 3CosAdd: target = unit[b] - unit[a] + unit[c]; answer is the nearest
    /// row excluding {a, b, c}.
    pub fn solve_analogy(&self, a: &str, b: &str, c: &str) -> AnalogyOutcome {
        let ids = [a, b, c].map(|w| self.vocab.id(w));
        let (ia, ib, ic) = match (ids[0], ids[1], ids[2]) {
            (Some(x), Some(y), Some(z)) => (x, y, z),
            _ => {
                let missing = [a, b, c]
                    .iter()
                    .zip(&ids)
                    .find(|(_, id)| id.is_none())
                    .map(|(w, _)| w.to_string())
                    .unwrap();
                return AnalogyOutcome::Oov(missing);
            }
        };
        if self.has_zero_norm(ia) || self.has_zero_norm(ib) || self.has_zero_norm(ic) {
            return AnalogyOutcome::Oov(a.to_string());
        }
        let target: Vec<f64> = (0..self.dim)
            .map(|i| self.unit_row(ib)[i] - self.unit_row(ia)[i] + self.unit_row(ic)[i])
            .collect();
        let exclude: HashSet<u32> = [ia, ib, ic].into_iter().collect();
        match self.nearest(&target, 1, &exclude).first() {
            Some(&(id, cos)) => AnalogyOutcome::Answer {
                surface: self.vocab.surface(id).to_string(),
                cosine: cos,
            },
            None => AnalogyOutcome::Oov(a.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalogyOutcome {
    Answer { surface: String, cosine: f64 },
    Oov(String),
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity. Zero vectors violate the contract.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Contract("cosine: dimension mismatch".into()));
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Contract("cosine: zero vector".into()));
    }
    Ok(dot(u, v) / (nu * nv))
}

#[derive(Debug, Clone)]
pub struct AnalogySection {
    pub label: String,
    pub is_semantic: bool,
    pub questions: Vec<[String; 4]>,
}

#[derive(Debug, Clone, Default)]
pub struct AnalogySuite {
    pub sections: Vec<AnalogySection>,
}

/// Google analogy format: `: section-name` headers, then 4 tokens per line.
/// Sections whose name starts with "gram" are syntactic.
pub fn parse_analogy_suite(text: &str, path: &str) -> Result<AnalogySuite> {
    let mut suite = AnalogySuite::default();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            let label = name.trim().to_string();
            let is_semantic = !label.starts_with("gram");
            suite.sections.push(AnalogySection {
                label,
                is_semantic,
                questions: Vec::new(),
            });
            continue;
        }
        let toks: Vec<String> = line.split_whitespace().map(|t| t.to_lowercase()).collect();
        if toks.len() != 4 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 4 tokens, found {}", toks.len()),
            ));
        }
        if suite.sections.is_empty() {
            suite.sections.push(AnalogySection {
                label: "default".to_string(),
                is_semantic: true,
                questions: Vec::new(),
            });
        }
        let q = [
            toks[0].clone(),
            toks[1].clone(),
            toks[2].clone(),
            toks[3].clone(),
        ];
        suite.sections.last_mut().unwrap().questions.push(q);
    }
    Ok(suite)
}

pub fn load_analogy_suite(path: &Path) -> Result<AnalogySuite> {
    let text = std::fs::read_to_string(path)?;
    parse_analogy_suite(&text, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionResult {
    pub label: String,
    pub is_semantic: bool,
    pub answered: usize,
    pub correct: usize,
    pub skipped_oov: usize,
}

impl SectionResult {
    pub fn accuracy(&self) -> f64 {
        if self.answered == 0 {
            0.0
        } else {
            self.correct as f64 / self.answered as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub sections: Vec<SectionResult>,
    pub config_hash: String,
    pub seed: u64,
}

impl EvalReport {
    fn aggregate(&self, semantic: bool) -> (usize, usize, usize) {
        let mut answered = 0;
        let mut correct = 0;
        let mut skipped = 0;
        for s in self.sections.iter().filter(|s| s.is_semantic == semantic) {
            answered += s.answered;
            correct += s.correct;
            skipped += s.skipped_oov;
        }
        (answered, correct, skipped)
    }

    pub fn semantic_accuracy(&self) -> f64 {
        let (answered, correct, _) = self.aggregate(true);
        if answered == 0 {
            0.0
        } else {
            correct as f64 / answered as f64
        }
    }

    pub fn syntactic_accuracy(&self) -> f64 {
        let (answered, correct, _) = self.aggregate(false);
        if answered == 0 {
            0.0
        } else {
            correct as f64 / answered as f64
        }
    }

    pub fn total_skipped(&self) -> usize {
        self.sections.iter().map(|s| s.skipped_oov).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,kind,answered,correct,skipped_oov,accuracy\n");
        for s in &self.sections {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6}",
                s.label,
                if s.is_semantic { "semantic" } else { "syntactic" },
                s.answered,
                s.correct,
                s.skipped_oov,
                s.accuracy()
            );
        }
        let _ = writeln!(
            out,
            "TOTAL-semantic,semantic,{},{},{},{:.6}",
            self.aggregate(true).0,
            self.aggregate(true).1,
            self.aggregate(true).2,
            self.semantic_accuracy()
        );
        let _ = writeln!(
            out,
            "TOTAL-syntactic,syntactic,{},{},{},{:.6}",
            self.aggregate(false).0,
            self.aggregate(false).1,
            self.aggregate(false).2,
            self.syntactic_accuracy()
        );
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| section | kind | answered | correct | skipped | accuracy |");
        let _ = writeln!(out, "|---|---|---|---|---|---|");
        for s in &self.sections {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {:.4} |",
                s.label,
                if s.is_semantic { "semantic" } else { "syntactic" },
                s.answered,
                s.correct,
                s.skipped_oov,
                s.accuracy()
            );
        }
        let _ = writeln!(
            out,
            "\nsemantic accuracy: {:.4}  \nsyntactic accuracy: {:.4}  \nconfig: {} seed: {}",
            self.semantic_accuracy(),
            self.syntactic_accuracy(),
            self.config_hash,
            self.seed
        );
        out
    }
}

/// Run every question through 3CosAdd with exact-match scoring. OOV
/// questions are counted as skipped, not failed.
pub fn evaluate(space: &EmbeddingSpace, suite: &AnalogySuite) -> EvalReport {
    evaluate_with_meta(space, suite, "", 0)
}

pub fn evaluate_with_meta(
    space: &EmbeddingSpace,
    suite: &AnalogySuite,
    config_hash: &str,
    seed: u64,
) -> EvalReport {
    let sections = suite
        .sections
        .iter()
        .map(|sec| {
            let mut answered = 0;
            let mut correct = 0;
            let mut skipped = 0;
            for [a, b, c, d] in &sec.questions {
                if space.vocab.id(d).is_none() {
                    skipped += 1;
                    continue;
                }
                match space.solve_analogy(a, b, c) {
                    AnalogyOutcome::Answer { surface, .. } => {
                        answered += 1;
                        if surface == *d {
                            correct += 1;
                        }
                    }
                    AnalogyOutcome::Oov(_) => skipped += 1,
                }
            }
            SectionResult {
                label: sec.label.clone(),
                is_semantic: sec.is_semantic,
                answered,
                correct,
                skipped_oov: skipped,
            }
        })
        .collect();
    EvalReport {
        sections,
        config_hash: config_hash.to_string(),
        seed,
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub architecture: Architecture,
    pub seed: u64,
    pub report: EvalReport,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub runs: Vec<ComparisonRun>,
}

impl ComparisonReport {
    pub fn mean_semantic(&self, arch: Architecture) -> f64 {
        mean(
            self.runs
                .iter()
                .filter(|r| r.architecture == arch)
                .map(|r| r.report.semantic_accuracy()),
        )
    }

    pub fn mean_syntactic(&self, arch: Architecture) -> f64 {
        mean(
            self.runs
                .iter()
                .filter(|r| r.architecture == arch)
                .map(|r| r.report.syntactic_accuracy()),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("architecture,seed,semantic_accuracy,syntactic_accuracy,config\n");
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{}",
                r.architecture.as_str(),
                r.seed,
                r.report.semantic_accuracy(),
                r.report.syntactic_accuracy(),
                r.report.config_hash
            );
        }
        out
    }

    pub fn summary_markdown(&self) -> String {
        let sg = self.mean_semantic(Architecture::SkipGram);
        let cb = self.mean_semantic(Architecture::Cbow);
        let diff = sg - cb;
        let mut out = String::new();
        let _ = writeln!(out, "# Skip-gram vs CBOW\n");
        let _ = writeln!(out, "mean semantic accuracy, skipgram: {sg:.4}");
        let _ = writeln!(out, "mean semantic accuracy, cbow:     {cb:.4}");
        let _ = writeln!(
            out,
            "mean syntactic accuracy, skipgram: {:.4}",
            self.mean_syntactic(Architecture::SkipGram)
        );
        let _ = writeln!(
            out,
            "mean syntactic accuracy, cbow:     {:.4}",
            self.mean_syntactic(Architecture::Cbow)
        );
        let _ = writeln!(
            out,
            "semantic difference (skipgram - cbow): {diff:+.4} (sign: {})",
            if diff > 0.0 {
                "positive"
            } else if diff < 0.0 {
                "negative"
            } else {
                "zero"
            }
        );
        out
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Train both architectures with identical hyperparameters per seed and
/// evaluate each on the suite.
pub fn compare_architectures(
    stream: &TokenStream,
    vocab: &Vocabulary,
    base_config: &TrainConfig,
    seeds: &[u64],
    suite: &AnalogySuite,
) -> Result<ComparisonReport> {
    if seeds.is_empty() {
        return Err(Error::Contract("compare_architectures: empty seed list".into()));
    }
    let mut runs = Vec::new();
    for &seed in seeds {
        for arch in [Architecture::SkipGram, Architecture::Cbow] {
            let cfg = TrainConfig {
                architecture: arch,
                seed,
                ..base_config.clone()
            };
            let hash = config_hash(&cfg);
            log::info!("training {} seed {seed}", arch.as_str());
            let (m, _) = train(stream, vocab, &cfg)?;
            let space = EmbeddingSpace::from_matrices(vocab.clone(), &m)?;
            let report = evaluate_with_meta(&space, suite, &hash, seed);
            log::info!(
                "{} seed {seed}: semantic {:.4} syntactic {:.4}",
                arch.as_str(),
                report.semantic_accuracy(),
                report.syntactic_accuracy()
            );
            runs.push(ComparisonRun {
                architecture: arch,
                seed,
                report,
            });
        }
    }
    Ok(ComparisonReport { runs })
}
