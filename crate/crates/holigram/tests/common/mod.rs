//! Test-support: a deterministic synthetic corpus with factored semantic
//! structure (lexeme-specific topic x gender x number) and a matching
//! analogy suite.
//!
//! Each sentence frames one noun with markers for its gender and number and
//! words from its own topic set plus filler noise, so embeddings of the
//! nouns approximately factorize and analogy questions across lexemes have
//! unique well-defined answers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TOPIC_WORDS: usize = 6;
pub const N_LEXEMES: usize = 600;
pub const N_FILLERS: usize = 20;
pub const MARKERS_PER_SET: usize = 4;

pub struct SynthCorpus {
    pub text: String,
    pub suite_text: String,
}

fn noun(lexeme: usize, fem: bool, plural: bool) -> String {
    format!(
        "n{lexeme}{}{}",
        if fem { "f" } else { "m" },
        if plural { "s" } else { "" }
    )
}

pub fn generate(seed: u64, n_sentences: usize) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::with_capacity(n_sentences * 40);
    for _ in 0..n_sentences {
        let lexeme = rng.gen_range(0..N_LEXEMES);
        let topic = lexeme;
        let fem = rng.gen::<bool>();
        let plural = rng.gen::<bool>();
        let t1 = rng.gen_range(0..TOPIC_WORDS);
        let t2 = rng.gen_range(0..TOPIC_WORDS);
        let g = rng.gen_range(0..MARKERS_PER_SET);
        let num = rng.gen_range(0..MARKERS_PER_SET);
        let f1 = rng.gen_range(0..N_FILLERS);
        let f2 = rng.gen_range(0..N_FILLERS);
        let gm = if fem { "gf" } else { "gm" };
        let nm = if plural { "pl" } else { "sg" };
        text.push_str(&format!(
            "fil{f1} t{topic}x{t1} {gm}{g} {} {nm}{num} t{topic}x{t2} fil{f2}\n",
            noun(lexeme, fem, plural)
        ));
    }

    let mut suite = String::new();
    let pair = |rng: &mut ChaCha8Rng| -> (usize, usize) {
        let a = rng.gen_range(0..N_LEXEMES);
        loop {
            let b = rng.gen_range(0..N_LEXEMES);
            if b != a {
                return (a, b);
            }
        }
    };
    suite.push_str(": sem-gender\n");
    for _ in 0..400 {
        let (a, b) = pair(&mut rng);
        suite.push_str(&format!(
            "{} {} {} {}\n",
            noun(a, false, false),
            noun(a, true, false),
            noun(b, false, false),
            noun(b, true, false)
        ));
    }
    suite.push_str(": sem-gender-plural\n");
    for _ in 0..200 {
        let (a, b) = pair(&mut rng);
        suite.push_str(&format!(
            "{} {} {} {}\n",
            noun(a, false, true),
            noun(a, true, true),
            noun(b, false, true),
            noun(b, true, true)
        ));
    }
    suite.push_str(": gram1-number\n");
    for _ in 0..300 {
        let (a, b) = pair(&mut rng);
        suite.push_str(&format!(
            "{} {} {} {}\n",
            noun(a, false, false),
            noun(a, false, true),
            noun(b, false, false),
            noun(b, false, true)
        ));
    }
    suite.push_str(": gram2-number-fem\n");
    for _ in 0..200 {
        let (a, b) = pair(&mut rng);
        suite.push_str(&format!(
            "{} {} {} {}\n",
            noun(a, true, false),
            noun(a, true, true),
            noun(b, true, false),
            noun(b, true, true)
        ));
    }
    SynthCorpus {
        text,
        suite_text: suite,
    }
}
