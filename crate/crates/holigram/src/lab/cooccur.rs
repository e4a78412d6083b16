//! Window co-occurrence counts and the Jensen-Shannon distributional
//! distance. This is the embedding-independent oracle for the
//! distribution-vs-meaning correlation experiment.

use crate::corpus::{tokenize, Vocabulary};
use crate::error::{Error, Result};

/// Symmetric window co-occurrence counts with additively smoothed row
/// distributions.
#[derive(Debug, Clone)]
pub struct CooccurrenceModel {
    vocab: Vocabulary,
    counts: Vec<f64>,
    epsilon: f64,
}

/// Count symmetric fixed-radius co-occurrences within sentences. The default
/// smoothing is 1/(10 V).
pub fn build_cooccurrence(
    corpus: &str,
    vocab: &Vocabulary,
    window: usize,
    epsilon: Option<f64>,
) -> CooccurrenceModel {
    assert!(window >= 1, "window must be >= 1");
    let v = vocab.len();
    let epsilon = epsilon.unwrap_or(1.0 / (10.0 * v as f64));
    let mut counts = vec![0.0f64; v * v];
    for sentence in tokenize(corpus) {
        let ids: Vec<u32> = sentence.iter().filter_map(|t| vocab.id(t)).collect();
        for (i, &a) in ids.iter().enumerate() {
            for j in (i + 1)..(i + 1 + window).min(ids.len()) {
                let b = ids[j];
                counts[a as usize * v + b as usize] += 1.0;
                counts[b as usize * v + a as usize] += 1.0;
            }
        }
    }
    CooccurrenceModel {
        vocab: vocab.clone(),
        counts,
        epsilon,
    }
}

impl CooccurrenceModel {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn count(&self, a: u32, b: u32) -> f64 {
        self.counts[a as usize * self.vocab.len() + b as usize]
    }

    /// Smoothed context distribution of `id`; sums to 1.
    pub fn smoothed_row(&self, id: u32) -> Vec<f64> {
        let v = self.vocab.len();
        let row = &self.counts[id as usize * v..(id as usize + 1) * v];
        let total: f64 = row.iter().sum::<f64>() + self.epsilon * v as f64;
        row.iter().map(|c| (c + self.epsilon) / total).collect()
    }

    pub fn distance_ids(&self, a: u32, b: u32) -> f64 {
        jsd_base2(&self.smoothed_row(a), &self.smoothed_row(b))
    }

    /// Jensen-Shannon divergence (base 2) between the smoothed context
    /// distributions of two words. Symmetric, in [0, 1].
    pub fn distributional_distance(&self, w1: &str, w2: &str) -> Result<f64> {
        let a = self.vocab.id(w1).ok_or_else(|| Error::Oov(w1.into()))?;
        let b = self.vocab.id(w2).ok_or_else(|| Error::Oov(w2.into()))?;
        Ok(self.distance_ids(a, b))
    }
}

/// Jensen-Shannon divergence with base-2 logarithm; 0 iff p = q, at most 1.
pub fn jsd_base2(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let mi = 0.5 * (pi + qi);
        if pi > 0.0 {
            d += 0.5 * pi * (pi / mi).log2();
        }
        if qi > 0.0 {
            d += 0.5 * qi * (qi / mi).log2();
        }
    }
    d.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vocab_of(text: &str) -> Vocabulary {
        Vocabulary::build(&tokenize(text), 1).unwrap()
    }

    #[test]
    fn pair_counts() {
        let v = vocab_of("a b");
        let m = build_cooccurrence("a b", &v, 1, None);
        let (a, b) = (v.id("a").unwrap(), v.id("b").unwrap());
        assert_eq!(m.count(a, b), 1.0);
        assert_eq!(m.count(b, a), 1.0);
        assert_eq!(m.count(a, a), 0.0);
    }

    #[test]
    fn repeated_word_counts() {
        let v = vocab_of("a b a");
        let m = build_cooccurrence("a b a", &v, 1, None);
        let (a, b) = (v.id("a").unwrap(), v.id("b").unwrap());
        assert_eq!(m.count(a, b), 2.0);
        assert_eq!(m.count(b, a), 2.0);
    }

    #[test]
    fn empty_corpus_rows_are_uniform() {
        let v = vocab_of("a b");
        let m = build_cooccurrence("", &v, 1, None);
        let row = m.smoothed_row(0);
        assert_abs_diff_eq!(row[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(row[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn smoothed_rows_sum_to_one() {
        let v = vocab_of("a b c d a b");
        let m = build_cooccurrence("a b c d a b\nc a", &v, 2, None);
        for id in 0..v.len() as u32 {
            let s: f64 = m.smoothed_row(id).iter().sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn symmetry_of_counts() {
        let v = vocab_of("a b c d e a c e");
        let m = build_cooccurrence("a b c d e a c e\nb d a", &v, 3, None);
        for i in 0..v.len() as u32 {
            for j in 0..v.len() as u32 {
                assert_eq!(m.count(i, j), m.count(j, i));
            }
        }
    }

    #[test]
    fn jsd_identical_and_disjoint() {
        let p = vec![0.25, 0.25, 0.5];
        assert_abs_diff_eq!(jsd_base2(&p, &p), 0.0, epsilon = 1e-15);
        let a = vec![0.5, 0.5, 0.0, 0.0];
        let b = vec![0.0, 0.0, 0.5, 0.5];
        assert_abs_diff_eq!(jsd_base2(&a, &b), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn jsd_hand_value() {
        // (1/2,1/2) vs (1,0): 0.31128 bits
        let p = vec![0.5, 0.5];
        let q = vec![1.0, 0.0];
        assert_abs_diff_eq!(jsd_base2(&p, &q), 0.3112781244591328, epsilon = 1e-12);
        assert_abs_diff_eq!(jsd_base2(&q, &p), jsd_base2(&p, &q), epsilon = 1e-15);
    }

    #[test]
    fn distance_metric_core() {
        let v = vocab_of("a b c a c");
        let m = build_cooccurrence("a b c a c\nb a", &v, 2, None);
        for i in ["a", "b", "c"] {
            assert_abs_diff_eq!(m.distributional_distance(i, i).unwrap(), 0.0, epsilon = 1e-15);
            for j in ["a", "b", "c"] {
                let d1 = m.distributional_distance(i, j).unwrap();
                let d2 = m.distributional_distance(j, i).unwrap();
                assert_abs_diff_eq!(d1, d2, epsilon = 1e-15);
                assert!((0.0..=1.0).contains(&d1));
            }
        }
        assert!(matches!(
            m.distributional_distance("a", "zzz"),
            Err(Error::Oov(_))
        ));
    }
}
