//! Spearman rank correlation with a permutation test, and the
//! distribution-vs-meaning correlation experiment.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::{cosine, EmbeddingSpace};
use crate::lab::cooccur::CooccurrenceModel;

/// Average ranks (1-based), ties share the mean of their rank range.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Spearman rank correlation; None when either variable has constant ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationOutcome {
    pub rho: f64,
    /// One-sided permutation p-value for rho > 0.
    pub p_value: f64,
    pub pair_count: usize,
    /// Constant ranks on one side; rho is NaN and p 1.0.
    pub degenerate: bool,
}

/// Spearman correlation of `x` against `y` with a one-sided permutation
/// test (permuting y).
pub fn spearman_permutation_test(
    x: &[f64],
    y: &[f64],
    permutations: usize,
    seed: u64,
) -> CorrelationOutcome {
    let n = x.len();
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let observed = pearson(&rx, &ry);
    let Some(rho) = observed else {
        return CorrelationOutcome {
            rho: f64::NAN,
            p_value: 1.0,
            pair_count: n,
            degenerate: true,
        };
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm = ry.clone();
    let mut hits = 0usize;
    for _ in 0..permutations {
        perm.shuffle(&mut rng);
        if let Some(r) = pearson(&rx, &perm) {
            if r >= rho {
                hits += 1;
            }
        }
    }
    CorrelationOutcome {
        rho,
        p_value: (hits + 1) as f64 / (permutations + 1) as f64,
        pair_count: n,
        degenerate: false,
    }
}

/// Over all pairs of the `top_n` most frequent words shared by the
/// embedding space and the co-occurrence model: Spearman correlation between
/// embedding cosine and negative Jensen-Shannon distance.
pub fn correlation_experiment(
    space: &EmbeddingSpace,
    model: &CooccurrenceModel,
    top_n: usize,
    permutations: usize,
    seed: u64,
) -> Result<CorrelationOutcome> {
    if top_n < 10 {
        return Err(Error::Contract("top_n must be >= 10".into()));
    }
    if permutations < 1 {
        return Err(Error::Contract("need at least one permutation".into()));
    }
    // space vocab order is descending frequency
    let mut words: Vec<(u32, u32)> = Vec::new(); // (space id, model id)
    for id in 0..space.vocab().len() as u32 {
        if space.has_zero_norm(id) {
            continue;
        }
        if let Some(mid) = model.vocab().id(space.vocab().surface(id)) {
            words.push((id, mid));
            if words.len() == top_n {
                break;
            }
        }
    }
    if words.len() < 10 {
        return Err(Error::Contract(format!(
            "only {} shared words between embeddings and co-occurrence model (need >= 10)",
            words.len()
        )));
    }
    let rows: Vec<Vec<f64>> = words.iter().map(|&(_, mid)| model.smoothed_row(mid)).collect();
    let mut sims = Vec::new();
    let mut dists = Vec::new();
    for i in 0..words.len() {
        for j in (i + 1)..words.len() {
            sims.push(cosine(
                space.raw_row(words[i].0),
                space.raw_row(words[j].0),
            )?);
            dists.push(-crate::lab::cooccur::jsd_base2(&rows[i], &rows[j]));
        }
    }
    Ok(spearman_permutation_test(&sims, &dists, permutations, seed))
}
