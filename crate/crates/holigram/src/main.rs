//! Single entry point for the pipeline: corpus prep + training, analogy
//! evaluation, architecture comparison, and the micro-language lab.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use holigram::corpus::{tokenize, TokenStream, Vocabulary};
use holigram::error::{Error, Result};
use holigram::eval::{
    compare_architectures, evaluate_with_meta, load_analogy_suite, EmbeddingSpace,
};
use holigram::lab::tvp::load_partition_tsv;
use holigram::lab::{
    build_cooccurrence, compute_tvp_classes, corpus_of_truths, corrupt_corpus,
    class_recovery_score, correlation_experiment, enumerate_sentences, generate_world,
    MicroGrammar, MicroWorld,
};
use holigram::persist::{
    config_hash, load_config, read_vectors, write_context_vectors, write_vectors,
};
use holigram::trainer::train;
use holigram::util::derive_seed;

#[derive(Parser)]
#[command(name = "holigram", version, about = "word embeddings and the truth-value-potential lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train embeddings on a text corpus and write word2vec-format vectors.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Also write the output (context) matrix to OUT.ctx.
        #[arg(long)]
        save_context: bool,
    },
    /// Evaluate vectors on an analogy suite.
    Eval {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        suite: PathBuf,
        /// Write the per-section report CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train Skip-gram and CBOW with identical hyperparameters and compare.
    Compare {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated list, e.g. 1,2,3.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        suite: PathBuf,
        /// Output directory for comparison.csv and summary.md.
        #[arg(long)]
        out: PathBuf,
    },
    /// Micro-language lab experiments.
    Lab {
        #[command(subcommand)]
        cmd: LabCmd,
    },
}

#[derive(Subcommand)]
enum LabCmd {
    /// Generate a world + grammar and its true-sentence corpus.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        entities: usize,
        #[arg(long, default_value_t = 3)]
        categories: usize,
        #[arg(long, default_value_t = 4)]
        properties: usize,
        /// How many times each true sentence is repeated in the corpus.
        #[arg(long, default_value_t = 20)]
        repetitions: usize,
        /// Output directory for world.txt and corpus.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the exact TVP partition of the entity nouns.
    Tvp {
        #[arg(long)]
        world: PathBuf,
        /// Output directory for partition.tsv and witnesses.tsv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replace true sentences about a target word with false ones.
    Corrupt {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlate embedding cosine with negative Jensen-Shannon distance.
    Correlate {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 100)]
        topn: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score how well vectors recover a word partition geometrically.
    Recover {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct CommandResult {
    artifacts: Vec<PathBuf>,
    summary: String,
}

fn main() -> ExitCode {
    init_logger();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(result) => {
            print!("{}", result.summary);
            for a in &result.artifacts {
                println!("wrote {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn init_logger() {
    use log::LevelFilter;
    let level = match std::env::var("HOLIGRAM_LOG").as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("debug") => LevelFilter::Debug,
        _ => LevelFilter::Info,
    };
    struct StderrLogger;
    impl log::Log for StderrLogger {
        fn enabled(&self, _: &log::Metadata) -> bool {
            true
        }
        fn log(&self, record: &log::Record) {
            eprintln!("[{}] {}", record.level(), record.args());
        }
        fn flush(&self) {}
    }
    static LOGGER: StderrLogger = StderrLogger;
    let _ = log::set_logger(&LOGGER);
    log::set_max_level(level);
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn prepare_corpus(path: &Path, min_count: u64) -> Result<(Vocabulary, TokenStream)> {
    let text = read_text(path)?;
    let sentences = tokenize(&text);
    let vocab = Vocabulary::build(&sentences, min_count)?;
    let stream = TokenStream::from_sentences(&sentences, &vocab);
    Ok((vocab, stream))
}

fn load_world(path: &Path) -> Result<(MicroWorld, MicroGrammar)> {
    let text = read_text(path)?;
    MicroWorld::from_text(&text, &path.display().to_string())
}

fn run(cmd: Cmd) -> Result<CommandResult> {
    match cmd {
        Cmd::Train {
            corpus,
            config,
            out,
            seed,
            workers,
            save_context,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            cfg.validate()?;
            let (vocab, stream) = prepare_corpus(&corpus, cfg.min_count)?;
            log::info!(
                "training {} on {} tokens, V={}, D={}",
                cfg.architecture.as_str(),
                stream.token_count(),
                vocab.len(),
                cfg.dim
            );
            let (matrices, stats) = train(&stream, &vocab, &cfg)?;
            write_vectors(&out, &vocab, &matrices)?;
            let mut artifacts = vec![out.clone()];
            if save_context {
                let ctx = out.with_extension(match out.extension() {
                    Some(e) => format!("{}.ctx", e.to_string_lossy()),
                    None => "ctx".to_string(),
                });
                write_context_vectors(&ctx, &vocab, &matrices)?;
                artifacts.push(ctx);
            }
            let mut summary = format!(
                "trained {} steps (config {})\nmean loss per decile:\n",
                stats.steps,
                config_hash(&cfg)
            );
            for (i, l) in stats.decile_mean_loss().iter().enumerate() {
                summary.push_str(&format!("  {:>3}%  {l:.6}\n", (i + 1) * 10));
            }
            Ok(CommandResult { artifacts, summary })
        }

        Cmd::Eval { vectors, suite, out } => {
            let (vocab, raw, dim) = read_vectors(&vectors)?;
            let space = EmbeddingSpace::new(vocab, raw, dim)?;
            let suite = load_analogy_suite(&suite)?;
            let report = evaluate_with_meta(&space, &suite, "", 0);
            let mut artifacts = Vec::new();
            if let Some(out) = out {
                fs::write(&out, report.to_csv())?;
                artifacts.push(out);
            }
            Ok(CommandResult {
                artifacts,
                summary: report.to_markdown(),
            })
        }

        Cmd::Compare {
            corpus,
            config,
            seeds,
            suite,
            out,
        } => {
            let seeds = parse_seeds(&seeds)?;
            let cfg = load_config(&config)?;
            let (vocab, stream) = prepare_corpus(&corpus, cfg.min_count)?;
            let suite = load_analogy_suite(&suite)?;
            let report = compare_architectures(&stream, &vocab, &cfg, &seeds, &suite)?;
            fs::create_dir_all(&out)?;
            let csv = out.join("comparison.csv");
            let md = out.join("summary.md");
            fs::write(&csv, report.to_csv())?;
            fs::write(&md, report.summary_markdown())?;
            Ok(CommandResult {
                artifacts: vec![csv, md],
                summary: report.summary_markdown(),
            })
        }

        Cmd::Lab { cmd } => run_lab(cmd),
    }
}

fn run_lab(cmd: LabCmd) -> Result<CommandResult> {
    match cmd {
        LabCmd::Gen {
            seed,
            entities,
            categories,
            properties,
            repetitions,
            out,
        } => {
            let world = generate_world(derive_seed(seed, "world"), entities, categories, properties)?;
            let grammar = MicroGrammar::standard(&world);
            let sentences = enumerate_sentences(&world, &grammar);
            let corpus = corpus_of_truths(&sentences, repetitions, derive_seed(seed, "corpus"))?;
            fs::create_dir_all(&out)?;
            let world_path = out.join("world.txt");
            let corpus_path = out.join("corpus.txt");
            fs::write(&world_path, world.to_text(&grammar))?;
            fs::write(&corpus_path, &corpus)?;
            let n_true = sentences.iter().filter(|s| s.truth).count();
            Ok(CommandResult {
                artifacts: vec![world_path, corpus_path],
                summary: format!(
                    "world: {} entities, {} categories, {} properties; {} sentences ({} true)\n",
                    world.entities.len(),
                    world.categories.len(),
                    world.properties.len(),
                    sentences.len(),
                    n_true
                ),
            })
        }

        LabCmd::Tvp { world, out } => {
            let (world, grammar) = load_world(&world)?;
            let sentences = enumerate_sentences(&world, &grammar);
            let partition = compute_tvp_classes(&sentences, &grammar.entity_nouns())?;
            partition.revalidate_witnesses(&world, &grammar)?;
            fs::create_dir_all(&out)?;
            let ppath = out.join("partition.tsv");
            let wpath = out.join("witnesses.tsv");
            fs::write(&ppath, partition.partition_tsv())?;
            fs::write(&wpath, partition.witnesses_tsv())?;
            Ok(CommandResult {
                artifacts: vec![ppath, wpath],
                summary: format!(
                    "{} TVP classes over {} words, {} witnesses (all revalidated)\n",
                    partition.classes.len(),
                    grammar.entity_nouns().len(),
                    partition.witnesses.len()
                ),
            })
        }

        LabCmd::Corrupt {
            corpus,
            world,
            target,
            rate,
            seed,
            out,
        } => {
            let (world, grammar) = load_world(&world)?;
            let text = read_text(&corpus)?;
            let sentences = enumerate_sentences(&world, &grammar);
            let pool: Vec<_> = sentences
                .iter()
                .filter(|s| !s.truth && s.tokens.iter().any(|t| *t == target))
                .cloned()
                .collect();
            let corrupted =
                corrupt_corpus(&text, &target, rate, &pool, derive_seed(seed, "corrupt"))?;
            fs::write(&out, &corrupted)?;
            Ok(CommandResult {
                artifacts: vec![out],
                summary: format!("corrupted lines about {target:?} at rate {rate}\n"),
            })
        }

        LabCmd::Correlate {
            vectors,
            corpus,
            window,
            topn,
            seed,
            out,
        } => {
            let (vocab, raw, dim) = read_vectors(&vectors)?;
            let space = EmbeddingSpace::new(vocab, raw, dim)?;
            let text = read_text(&corpus)?;
            let cvocab = Vocabulary::build(&tokenize(&text), 1)?;
            let model = build_cooccurrence(&text, &cvocab, window, None);
            let outcome =
                correlation_experiment(&space, &model, topn, 10_000, derive_seed(seed, "perm"))?;
            let csv = format!(
                "rho,p_value,pair_count,degenerate\n{},{},{},{}\n",
                outcome.rho, outcome.p_value, outcome.pair_count, outcome.degenerate
            );
            let mut artifacts = Vec::new();
            if let Some(out) = out {
                fs::write(&out, &csv)?;
                artifacts.push(out);
            }
            let summary = if outcome.degenerate {
                format!("degenerate: constant ranks over {} pairs\n", outcome.pair_count)
            } else {
                format!(
                    "spearman rho = {:.4}, permutation p = {:.5} over {} pairs\n",
                    outcome.rho, outcome.p_value, outcome.pair_count
                )
            };
            Ok(CommandResult { artifacts, summary })
        }

        LabCmd::Recover {
            vectors,
            partition,
            out,
        } => {
            let (vocab, raw, dim) = read_vectors(&vectors)?;
            let space = EmbeddingSpace::new(vocab, raw, dim)?;
            let text = read_text(&partition)?;
            let classes = load_partition_tsv(&text, &partition.display().to_string())?;
            let score = class_recovery_score(&space, &classes)?;
            let csv = format!(
                "mean_intra_cos,mean_inter_cos,nn_accuracy,degenerate\n{},{},{},{}\n",
                score.mean_intra_cos, score.mean_inter_cos, score.nn_accuracy, score.degenerate
            );
            let mut artifacts = Vec::new();
            if let Some(out) = out {
                fs::write(&out, &csv)?;
                artifacts.push(out);
            }
            Ok(CommandResult {
                artifacts,
                summary: format!(
                    "intra {:.4}  inter {:.4}  nn_accuracy {:.4}{}\n",
                    score.mean_intra_cos,
                    score.mean_inter_cos,
                    score.nn_accuracy,
                    if score.degenerate { "  (degenerate)" } else { "" }
                ),
            })
        }
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::Contract(format!("bad seed {p:?}")))
        })
        .collect::<Result<_>>()?;
    if seeds.is_empty() {
        return Err(Error::Contract("empty seed list".into()));
    }
    Ok(seeds)
}
