//! File formats: word2vec text vectors and the flat key=value train config.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::trainer::{Architecture, EmbeddingMatrices, TrainConfig};
use crate::util::fnv1a64;

/// Render one coordinate with 6 significant digits.
fn fmt_value(x: f64) -> String {
    format!("{x:.5e}")
}

fn matrix_to_text(vocab: &Vocabulary, matrix: &[f64], dim: usize) -> String {
    let v = vocab.len();
    let mut out = String::with_capacity(v * dim * 13);
    let _ = writeln!(out, "{v} {dim}");
    for id in 0..v as u32 {
        out.push_str(vocab.surface(id));
        let row = &matrix[id as usize * dim..(id as usize + 1) * dim];
        for x in row {
            out.push(' ');
            out.push_str(&fmt_value(*x));
        }
        out.push('\n');
    }
    out
}

/// Write the input matrix in word2vec text format: header `V D`, then one
/// `surface v1 .. vD` line per word in id order.
pub fn write_vectors(path: &Path, vocab: &Vocabulary, m: &EmbeddingMatrices) -> Result<()> {
    fs::write(path, matrix_to_text(vocab, &m.input, m.dim))?;
    Ok(())
}

/// Sidecar with the output (context) matrix, same format.
pub fn write_context_vectors(path: &Path, vocab: &Vocabulary, m: &EmbeddingMatrices) -> Result<()> {
    fs::write(path, matrix_to_text(vocab, &m.output, m.dim))?;
    Ok(())
}

/// Read a word2vec text file. Word counts are not stored in the format, so
/// the returned vocabulary carries count 1 per word in file order.
pub fn read_vectors(path: &Path) -> Result<(Vocabulary, Vec<f64>, usize)> {
    let pstr = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(&pstr, 1, "empty vector file"))?;
    let mut it = header.split_whitespace();
    let v: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(&pstr, 1, "malformed header, expected `V D`"))?;
    let dim: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::parse(&pstr, 1, "malformed header, expected `V D`"))?;
    if v == 0 || dim == 0 {
        return Err(Error::parse(&pstr, 1, "header dimensions must be positive"));
    }
    let mut entries = Vec::with_capacity(v);
    let mut matrix = Vec::with_capacity(v * dim);
    for _ in 0..v {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::parse(&pstr, 0, format!("expected {v} rows, file truncated")))?;
        let lineno = i + 1;
        let mut parts = line.split_whitespace();
        let surface = parts
            .next()
            .ok_or_else(|| Error::parse(&pstr, lineno, "empty row"))?;
        let mut row = Vec::with_capacity(dim);
        for p in parts {
            let x: f64 = p
                .parse()
                .map_err(|_| Error::parse(&pstr, lineno, format!("bad number {p:?}")))?;
            row.push(x);
        }
        if row.len() != dim {
            return Err(Error::parse(
                &pstr,
                lineno,
                format!("expected {dim} values, found {}", row.len()),
            ));
        }
        entries.push((surface.to_string(), 1u64));
        matrix.extend_from_slice(&row);
    }
    let vocab = Vocabulary::from_ordered_entries(entries)?;
    Ok((vocab, matrix, dim))
}

fn fmt_subsample(t: Option<f64>) -> String {
    match t {
        None => "off".to_string(),
        Some(t) => format!("{t}"),
    }
}

pub fn config_to_key_values(cfg: &TrainConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "architecture={}", cfg.architecture.as_str());
    let _ = writeln!(s, "dim={}", cfg.dim);
    let _ = writeln!(s, "max_window={}", cfg.max_window);
    let _ = writeln!(s, "negatives={}", cfg.negatives);
    let _ = writeln!(s, "epochs={}", cfg.epochs);
    let _ = writeln!(s, "lr_initial={}", cfg.lr_initial);
    let _ = writeln!(s, "lr_min={}", cfg.lr_min);
    let _ = writeln!(s, "subsample_t={}", fmt_subsample(cfg.subsample_t));
    let _ = writeln!(s, "min_count={}", cfg.min_count);
    let _ = writeln!(s, "seed={}", cfg.seed);
    let _ = writeln!(s, "workers={}", cfg.workers);
    s
}

/// Stable hash of the full config, for report metadata.
pub fn config_hash(cfg: &TrainConfig) -> String {
    format!("{:016x}", fnv1a64(config_to_key_values(cfg).as_bytes()))
}

/// Parse a flat `key=value` config (one pair per line, `#` comments).
/// Unspecified keys keep their defaults.
pub fn parse_config(text: &str, path: &str) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    let mut lr_min_given = false;
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, lineno, format!("expected key=value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| Error::parse(path, lineno, format!("key {key}: {what} ({value:?})"));
        match key {
            "architecture" => {
                cfg.architecture = value
                    .parse::<Architecture>()
                    .map_err(|_| bad("expected skipgram or cbow"))?
            }
            "dim" => cfg.dim = value.parse().map_err(|_| bad("expected integer"))?,
            "max_window" => cfg.max_window = value.parse().map_err(|_| bad("expected integer"))?,
            "negatives" => cfg.negatives = value.parse().map_err(|_| bad("expected integer"))?,
            "epochs" => cfg.epochs = value.parse().map_err(|_| bad("expected integer"))?,
            "lr_initial" => cfg.lr_initial = value.parse().map_err(|_| bad("expected number"))?,
            "lr_min" => {
                cfg.lr_min = value.parse().map_err(|_| bad("expected number"))?;
                lr_min_given = true;
            }
            "subsample_t" => {
                cfg.subsample_t = match value {
                    "off" | "inf" | "none" => None,
                    v => Some(v.parse().map_err(|_| bad("expected number or `off`"))?),
                }
            }
            "min_count" => cfg.min_count = value.parse().map_err(|_| bad("expected integer"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("expected integer"))?,
            "workers" => cfg.workers = value.parse().map_err(|_| bad("expected integer"))?,
            other => return Err(Error::parse(path, lineno, format!("unknown key {other:?}"))),
        }
    }
    if !lr_min_given {
        cfg.lr_min = cfg.lr_initial * 1e-4;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<TrainConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}
