//! Exact truth-value-potential partitions: two words are equivalent iff
//! every sentence context completed with each yields the same truth value.
//! The context set here is the full finite enumeration, so the universal
//! quantifier in the definition is evaluated exactly.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::eval::{cosine, EmbeddingSpace};
use crate::lab::world::{sentence_truth, MicroGrammar, MicroWorld, SentenceRecord, Template};

/// A context discriminating two words: the same frame completed by each
/// yields different truth values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub template: Template,
    pub object: usize,
    /// Frame tokens with `_` in the subject slot.
    pub context: Vec<String>,
    pub truth_a: bool,
    pub truth_b: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TvpPartition {
    /// Disjoint, exhaustive classes over the slot words; each class sorted,
    /// classes ordered by their first word.
    pub classes: Vec<Vec<String>>,
    /// One witness per cross-class pair, keyed by the (lexicographically
    /// ordered) word pair.
    pub witnesses: BTreeMap<(String, String), Witness>,
}

impl TvpPartition {
    pub fn class_of(&self, word: &str) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| c.iter().any(|w| w == word))
    }

    /// Classes as word sets, in a canonical order for comparison.
    pub fn normalized_classes(&self) -> Vec<Vec<String>> {
        let mut c = self.classes.clone();
        for class in c.iter_mut() {
            class.sort();
        }
        c.sort();
        c
    }

    pub fn partition_tsv(&self) -> String {
        let mut out = String::new();
        for (i, class) in self.classes.iter().enumerate() {
            for w in class {
                out.push_str(&format!("{i}\t{w}\n"));
            }
        }
        out
    }

    pub fn witnesses_tsv(&self) -> String {
        let mut out = String::new();
        for ((a, b), w) in &self.witnesses {
            out.push_str(&format!(
                "{a}\t{b}\t{}\t{}\t{}\n",
                w.context.join(" "),
                w.truth_a,
                w.truth_b
            ));
        }
        out
    }

    /// Re-evaluate every stored witness against the world: it must still
    /// discriminate its pair.
    pub fn revalidate_witnesses(&self, world: &MicroWorld, grammar: &MicroGrammar) -> Result<()> {
        for ((a, b), w) in &self.witnesses {
            let ia = grammar
                .noun_index(a)
                .ok_or_else(|| Error::Oov(a.clone()))?;
            let ib = grammar
                .noun_index(b)
                .ok_or_else(|| Error::Oov(b.clone()))?;
            let ta = sentence_truth(world, grammar, ia, w.template, w.object);
            let tb = sentence_truth(world, grammar, ib, w.template, w.object);
            if ta == tb || ta != w.truth_a || tb != w.truth_b {
                return Err(Error::Runtime(format!(
                    "witness for ({a}, {b}) no longer discriminates"
                )));
            }
        }
        Ok(())
    }
}

/// Load classes from `class_id<TAB>word` lines.
pub fn load_partition_tsv(text: &str, path: &str) -> Result<Vec<Vec<String>>> {
    let mut classes: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (id, word) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `class<TAB>word`"))?;
        let id: usize = id
            .parse()
            .map_err(|_| Error::parse(path, i + 1, "bad class id"))?;
        classes.entry(id).or_default().push(word.to_string());
    }
    if classes.is_empty() {
        return Err(Error::parse(path, 0, "empty partition"));
    }
    Ok(classes.into_values().collect())
}

/// Brute-force TVP partition of `slot_words` over the enumerated sentences.
/// Words are equivalent iff their truth signatures agree over every subject
/// context; each cross-class pair gets the first discriminating context as
/// its witness.
pub fn compute_tvp_classes(
    sentences: &[SentenceRecord],
    slot_words: &[String],
) -> Result<TvpPartition> {
    if slot_words.is_empty() {
        return Err(Error::Contract("no slot words given".into()));
    }
    // (template, object) contexts, canonically ordered so the result cannot
    // depend on enumeration order
    let mut contexts: Vec<(Template, usize)> = sentences
        .iter()
        .map(|s| (s.template, s.object))
        .collect();
    contexts.sort_unstable();
    contexts.dedup();

    // truth lookup keyed by (template, subject surface, object)
    let mut truth: HashMap<(Template, &str, usize), bool> = HashMap::new();
    let mut frames: HashMap<(Template, usize), Vec<String>> = HashMap::new();
    for s in sentences {
        let subj = s.tokens[0].as_str();
        truth.insert((s.template, subj, s.object), s.truth);
        frames.entry((s.template, s.object)).or_insert_with(|| {
            let mut f = s.tokens.clone();
            f[0] = "_".to_string();
            f
        });
    }

    let mut signatures: Vec<Vec<bool>> = Vec::with_capacity(slot_words.len());
    for w in slot_words {
        let mut sig = Vec::with_capacity(contexts.len());
        for &(t, o) in &contexts {
            let v = truth.get(&(t, w.as_str(), o)).ok_or_else(|| {
                Error::Contract(format!(
                    "incomplete enumeration: no sentence completes context ({}, {o}) with {w:?}",
                    t.name()
                ))
            })?;
            sig.push(*v);
        }
        signatures.push(sig);
    }

    // group by signature
    let mut class_map: BTreeMap<Vec<bool>, Vec<String>> = BTreeMap::new();
    for (w, sig) in slot_words.iter().zip(&signatures) {
        class_map.entry(sig.clone()).or_default().push(w.clone());
    }
    let mut classes: Vec<Vec<String>> = class_map.into_values().collect();
    for c in classes.iter_mut() {
        c.sort();
    }
    classes.sort();

    // witnesses for every cross-class pair
    let sig_of: HashMap<&str, &Vec<bool>> = slot_words
        .iter()
        .map(|w| w.as_str())
        .zip(signatures.iter())
        .collect();
    let mut witnesses = BTreeMap::new();
    for (i, ca) in classes.iter().enumerate() {
        for cb in classes.iter().skip(i + 1) {
            for a in ca {
                for b in cb {
                    let (sa, sb) = (sig_of[a.as_str()], sig_of[b.as_str()]);
                    let k = sa.iter().zip(sb.iter()).position(|(x, y)| x != y).expect(
                        "cross-class words must differ somewhere",
                    );
                    let (t, o) = contexts[k];
                    let key = if a < b {
                        (a.clone(), b.clone())
                    } else {
                        (b.clone(), a.clone())
                    };
                    let (truth_a, truth_b) = if a < b {
                        (sa[k], sb[k])
                    } else {
                        (sb[k], sa[k])
                    };
                    witnesses.insert(
                        key,
                        Witness {
                            template: t,
                            object: o,
                            context: frames[&(t, o)].clone(),
                            truth_a,
                            truth_b,
                        },
                    );
                }
            }
        }
    }
    Ok(TvpPartition { classes, witnesses })
}

/// The partition the generator designed into the world: entity nouns grouped
/// by category.
pub fn designed_partition(world: &MicroWorld, grammar: &MicroGrammar) -> Vec<Vec<String>> {
    let mut classes: Vec<Vec<String>> = world
        .categories
        .iter()
        .map(|(_, members)| {
            let mut c: Vec<String> = members
                .iter()
                .map(|&e| world.entities[e].clone())
                .collect();
            c.sort();
            c
        })
        .collect();
    // entity nouns not claimed by any category each form a singleton
    for (surface, _) in grammar.nouns.iter().filter(|(_, d)| {
        matches!(d, crate::lab::world::Denotation::Entity(e) if world.category_of(*e).is_none())
    }) {
        classes.push(vec![surface.clone()]);
    }
    classes.sort();
    classes
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryScore {
    pub mean_intra_cos: f64,
    pub mean_inter_cos: f64,
    pub nn_accuracy: f64,
    pub degenerate: bool,
}

/// Geometric recovery of a word partition: mean pairwise cosine within and
/// across classes, and the fraction of words whose nearest in-partition
/// neighbor shares their class.
pub fn class_recovery_score(
    space: &EmbeddingSpace,
    classes: &[Vec<String>],
) -> Result<RecoveryScore> {
    let mut words: Vec<(String, usize)> = Vec::new();
    for (ci, class) in classes.iter().enumerate() {
        for w in class {
            if space.vocab().id(w).is_none() {
                return Err(Error::Oov(w.clone()));
            }
            words.push((w.clone(), ci));
        }
    }
    let vecs: Vec<&[f64]> = words
        .iter()
        .map(|(w, _)| space.raw_row(space.vocab().id(w).unwrap()))
        .collect();
    let n = words.len();
    let mut intra = Vec::new();
    let mut inter = Vec::new();
    let mut cos = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = cosine(vecs[i], vecs[j])?;
            cos[i][j] = c;
            cos[j][i] = c;
            if words[i].1 == words[j].1 {
                intra.push(c);
            } else {
                inter.push(c);
            }
        }
    }
    let degenerate = intra.is_empty() || inter.is_empty();
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let mut correct = 0usize;
    let mut judged = 0usize;
    for i in 0..n {
        let mut best: Option<usize> = None;
        for j in 0..n {
            if j == i {
                continue;
            }
            if best.is_none() || cos[i][j] > cos[i][best.unwrap()] {
                best = Some(j);
            }
        }
        if let Some(b) = best {
            judged += 1;
            if words[b].1 == words[i].1 {
                correct += 1;
            }
        }
    }
    Ok(RecoveryScore {
        mean_intra_cos: mean(&intra),
        mean_inter_cos: mean(&inter),
        nn_accuracy: if judged == 0 {
            0.0
        } else {
            correct as f64 / judged as f64
        },
        degenerate,
    })
}
