//! Finite micro-worlds and template grammars. Every generated sentence has
//! a decidable truth value, so the synonymy quantifier of the TVP definition
//! ranges over a totality we actually possess.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Entities with category and property extensions. Category membership
/// determines property membership, so the designed synonymy classes of the
/// entity nouns are exactly the categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroWorld {
    pub entities: Vec<String>,
    /// (name, member entity indices), members sorted.
    pub categories: Vec<(String, Vec<usize>)>,
    pub properties: Vec<(String, Vec<usize>)>,
}

impl MicroWorld {
    pub fn validate(&self) -> Result<()> {
        let n = self.entities.len();
        for (name, members) in self.categories.iter().chain(&self.properties) {
            if members.iter().any(|&e| e >= n) {
                return Err(Error::Contract(format!(
                    "extension of {name} mentions unknown entity"
                )));
            }
        }
        let big = self
            .categories
            .iter()
            .filter(|(_, m)| m.len() >= 2)
            .count();
        if big < 2 {
            return Err(Error::Contract(
                "need at least 2 categories with at least 2 members".into(),
            ));
        }
        Ok(())
    }

    pub fn category_of(&self, entity: usize) -> Option<usize> {
        self.categories
            .iter()
            .position(|(_, m)| m.contains(&entity))
    }

    /// Declarative text format with sections: entities, categories,
    /// properties, templates.
    pub fn to_text(&self, grammar: &MicroGrammar) -> String {
        let mut out = String::from("[entities]\n");
        for e in &self.entities {
            let _ = writeln!(out, "{e}");
        }
        out.push_str("[categories]\n");
        for (name, members) in &self.categories {
            let names: Vec<&str> = members.iter().map(|&i| self.entities[i].as_str()).collect();
            let _ = writeln!(out, "{name}: {}", names.join(" "));
        }
        out.push_str("[properties]\n");
        for (name, members) in &self.properties {
            let names: Vec<&str> = members.iter().map(|&i| self.entities[i].as_str()).collect();
            let _ = writeln!(out, "{name}: {}", names.join(" "));
        }
        out.push_str("[templates]\n");
        for t in &grammar.templates {
            let _ = writeln!(out, "{}", t.name());
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<(MicroWorld, MicroGrammar)> {
        let mut entities: Vec<String> = Vec::new();
        let mut categories: Vec<(String, Vec<usize>)> = Vec::new();
        let mut properties: Vec<(String, Vec<usize>)> = Vec::new();
        let mut templates: Vec<Template> = Vec::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.to_string();
                continue;
            }
            match section.as_str() {
                "entities" => entities.push(line.to_string()),
                "categories" | "properties" => {
                    let (name, members) = line.split_once(':').ok_or_else(|| {
                        Error::parse(path, lineno, "expected `name: member ...`")
                    })?;
                    let mut ids = Vec::new();
                    for m in members.split_whitespace() {
                        let id = entities.iter().position(|e| e == m).ok_or_else(|| {
                            Error::parse(path, lineno, format!("unknown entity {m:?}"))
                        })?;
                        ids.push(id);
                    }
                    ids.sort_unstable();
                    if section == "categories" {
                        categories.push((name.trim().to_string(), ids));
                    } else {
                        properties.push((name.trim().to_string(), ids));
                    }
                }
                "templates" => templates.push(Template::from_name(line).ok_or_else(|| {
                    Error::parse(path, lineno, format!("unknown template {line:?}"))
                })?),
                other => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("line outside known section {other:?}"),
                    ))
                }
            }
        }
        let world = MicroWorld {
            entities,
            categories,
            properties,
        };
        world.validate()?;
        let grammar = MicroGrammar::standard_with_templates(&world, templates);
        Ok((world, grammar))
    }
}

/// Deterministically generate a world: entities split into balanced
/// categories, properties held by a random proper nonempty subset of the
/// categories (all members of a category share each property).
pub fn generate_world(
    seed: u64,
    n_entities: usize,
    n_categories: usize,
    n_properties: usize,
) -> Result<MicroWorld> {
    if n_entities < 1 || n_categories < 1 || n_properties < 1 {
        return Err(Error::Contract("world sizes must be >= 1".into()));
    }
    if n_entities < 2 * n_categories {
        return Err(Error::Contract(format!(
            "need n_entities >= 2 * n_categories ({n_entities} < {})",
            2 * n_categories
        )));
    }
    if n_categories < 2 {
        return Err(Error::Contract("need at least 2 categories".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entities: Vec<String> = (0..n_entities).map(|i| format!("ent{i:02}")).collect();
    let mut ids: Vec<usize> = (0..n_entities).collect();
    ids.shuffle(&mut rng);
    let mut categories = Vec::with_capacity(n_categories);
    let base = n_entities / n_categories;
    let extra = n_entities % n_categories;
    let mut cursor = 0;
    for c in 0..n_categories {
        let size = base + usize::from(c < extra);
        let mut members: Vec<usize> = ids[cursor..cursor + size].to_vec();
        members.sort_unstable();
        cursor += size;
        categories.push((format!("kind{c}"), members));
    }
    let mut properties = Vec::with_capacity(n_properties);
    for p in 0..n_properties {
        // proper nonempty subset of categories, so each property separates
        // at least one pair of categories
        let holders: Vec<usize> = loop {
            let h: Vec<usize> = (0..n_categories).filter(|_| rng.gen::<bool>()).collect();
            if !h.is_empty() && h.len() < n_categories {
                break h;
            }
        };
        let mut ext: Vec<usize> = holders
            .iter()
            .flat_map(|&c| categories[c].1.iter().copied())
            .collect();
        ext.sort_unstable();
        properties.push((format!("can{p}"), ext));
    }
    let world = MicroWorld {
        entities,
        categories,
        properties,
    };
    world.validate()?;
    Ok(world)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denotation {
    Entity(usize),
    Category(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Template {
    /// "X is Y" where Y is a category noun; true iff den(X) is a subset of Y.
    IsA,
    /// "X can Z" where Z is a property; true iff den(X) is a subset of ext(Z).
    CanDo,
}

impl Template {
    pub fn name(&self) -> &'static str {
        match self {
            Template::IsA => "isa",
            Template::CanDo => "cando",
        }
    }

    pub fn from_name(s: &str) -> Option<Template> {
        match s {
            "isa" => Some(Template::IsA),
            "cando" => Some(Template::CanDo),
            _ => None,
        }
    }
}

/// Nouns (entity and category) plus the sentence frames. Each surface form
/// denotes exactly one semantic object.
#[derive(Debug, Clone)]
pub struct MicroGrammar {
    pub nouns: Vec<(String, Denotation)>,
    pub templates: Vec<Template>,
}

impl MicroGrammar {
    /// One noun per entity, one per category, both templates.
    pub fn standard(world: &MicroWorld) -> Self {
        Self::standard_with_templates(world, vec![Template::IsA, Template::CanDo])
    }

    fn standard_with_templates(world: &MicroWorld, mut templates: Vec<Template>) -> Self {
        if templates.is_empty() {
            templates = vec![Template::IsA, Template::CanDo];
        }
        let mut nouns: Vec<(String, Denotation)> = world
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), Denotation::Entity(i)))
            .collect();
        for (c, (name, _)) in world.categories.iter().enumerate() {
            nouns.push((name.clone(), Denotation::Category(c)));
        }
        MicroGrammar { nouns, templates }
    }

    pub fn noun_index(&self, surface: &str) -> Option<usize> {
        self.nouns.iter().position(|(s, _)| s == surface)
    }

    pub fn entity_nouns(&self) -> Vec<String> {
        self.nouns
            .iter()
            .filter(|(_, d)| matches!(d, Denotation::Entity(_)))
            .map(|(s, _)| s.clone())
            .collect()
    }
}

fn denotation_set(world: &MicroWorld, d: Denotation) -> BTreeSet<usize> {
    match d {
        Denotation::Entity(e) => [e].into_iter().collect(),
        Denotation::Category(c) => world.categories[c].1.iter().copied().collect(),
    }
}

/// Truth value of (subject noun, template, object index).
pub fn sentence_truth(
    world: &MicroWorld,
    grammar: &MicroGrammar,
    subject: usize,
    template: Template,
    object: usize,
) -> bool {
    let subj = denotation_set(world, grammar.nouns[subject].1);
    let ext: BTreeSet<usize> = match template {
        Template::IsA => world.categories[object].1.iter().copied().collect(),
        Template::CanDo => world.properties[object].1.iter().copied().collect(),
    };
    subj.is_subset(&ext)
}

pub fn render_sentence(
    world: &MicroWorld,
    grammar: &MicroGrammar,
    subject: usize,
    template: Template,
    object: usize,
) -> Vec<String> {
    let subj = grammar.nouns[subject].0.clone();
    match template {
        Template::IsA => vec![subj, "is".into(), world.categories[object].0.clone()],
        Template::CanDo => vec![subj, "can".into(), world.properties[object].0.clone()],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRecord {
    pub tokens: Vec<String>,
    pub truth: bool,
    pub template: Template,
    /// Index into grammar.nouns.
    pub subject: usize,
    /// Category index for IsA, property index for CanDo.
    pub object: usize,
}

/// The complete totality: every template x subject x object combination,
/// each with its truth value.
pub fn enumerate_sentences(world: &MicroWorld, grammar: &MicroGrammar) -> Vec<SentenceRecord> {
    let mut out = Vec::new();
    for &template in &grammar.templates {
        let n_objects = match template {
            Template::IsA => world.categories.len(),
            Template::CanDo => world.properties.len(),
        };
        for subject in 0..grammar.nouns.len() {
            for object in 0..n_objects {
                out.push(SentenceRecord {
                    tokens: render_sentence(world, grammar, subject, template, object),
                    truth: sentence_truth(world, grammar, subject, template, object),
                    template,
                    subject,
                    object,
                });
            }
        }
    }
    out
}

/// Emit only the true sentences, each repeated `repetitions` times, in a
/// seed-determined shuffle, one sentence per line.
pub fn corpus_of_truths(
    sentences: &[SentenceRecord],
    repetitions: usize,
    seed: u64,
) -> Result<String> {
    let truths: Vec<&SentenceRecord> = sentences.iter().filter(|s| s.truth).collect();
    if truths.is_empty() {
        return Err(Error::Runtime("no true sentences to emit".into()));
    }
    let mut lines: Vec<String> = truths
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.tokens.join(" "), repetitions))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lines.shuffle(&mut rng);
    Ok(lines.join("\n") + "\n")
}

/// Replace each line containing `target`, with probability `rate`, by a
/// uniformly drawn false sentence from the pool. rate 0 is the identity.
pub fn corrupt_corpus(
    corpus: &str,
    target: &str,
    rate: f64,
    false_pool: &[SentenceRecord],
    seed: u64,
) -> Result<String> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Contract("rate must be in [0, 1]".into()));
    }
    if false_pool.is_empty() {
        return Err(Error::Contract("false pool is empty".into()));
    }
    for s in false_pool {
        if s.truth {
            return Err(Error::Contract("false pool contains a true sentence".into()));
        }
        if !s.tokens.iter().any(|t| t == target) {
            return Err(Error::Contract(format!(
                "false-pool sentence does not contain target {target:?}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(corpus.len());
    for line in corpus.lines() {
        let hit = line.split_whitespace().any(|t| t == target);
        if hit && rng.gen::<f64>() < rate {
            let pick = &false_pool[rng.gen_range(0..false_pool.len())];
            out.push_str(&pick.tokens.join(" "));
        } else {
            out.push_str(line);
        }
        out.push('\n');
    }
    Ok(out)
}
