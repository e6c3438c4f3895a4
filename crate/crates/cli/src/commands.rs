use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use silverner::corpus::{load_corpus, save_corpus, Lexicon, LinkGraph, Paragraph, SilverDataset};
use silverner::filter::{
    self, train_filters, training_sets, ContextFilter, FilterConfig, SvmConfig,
};
use silverner::matcher::{self, compile, scan_corpus};
use silverner::ner_eval::{
    self, evaluate, load_predictions, paragraphs_lacking_type, TypeResolver,
};
use silverner::pipeline::{
    self, assemble, audit_sample, select_holdout, stratified_sample, AssemblyConfig,
    AuditWorksheet, SplitAssignment, SplitConfig,
};
use silverner::retrieval::{
    self, bm25_rank, dense_rank, evaluate_runs, load_runs, load_vectors, relevance_sets, save_runs,
    Bm25Params, DenseVectorStore, InvertedIndex, RankedRetrievalRun,
};
use silverner::synthetic::{self, ConstructionOracle, SyntheticConfig};

use crate::failure::{MissingInput, Usage};
use crate::Command;

const VOCAB_FILE: &str = "vocab.jsonl";
const MODELS_FILE: &str = "models.jsonl";

fn input<'a>(flag: &'static str, path: &'a Path) -> Result<&'a Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(MissingInput {
            flag,
            path: path.to_path_buf(),
        }
        .into())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_tsv(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let mut out = BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

fn load_dataset(path: &Path) -> Result<SilverDataset> {
    Ok(SilverDataset::load(input("--dataset", path)?)?)
}

fn load_lexicon(path: &Path) -> Result<Lexicon> {
    Ok(Lexicon::load(input("--lexicon", path)?)?)
}

fn load_paragraphs(path: &Path) -> Result<Vec<Paragraph>> {
    Ok(load_corpus(input("--corpus", path)?)?)
}

fn load_linkgraph(path: Option<&PathBuf>) -> Result<Option<LinkGraph>> {
    path.map(|p| Ok(LinkGraph::load(input("--linkgraph", p)?)?))
        .transpose()
}

fn load_filter(dir: &Path) -> Result<ContextFilter> {
    let dir = input("--filters", dir)?;
    Ok(ContextFilter::load(
        &dir.join(VOCAB_FILE),
        &dir.join(MODELS_FILE),
    )?)
}

fn load_splits(path: &Path) -> Result<SplitAssignment> {
    Ok(SplitAssignment::load(input("--splits", path)?)?)
}

fn read_ids(path: &Path) -> Result<BTreeSet<String>> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut ids = BTreeSet::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            ids.insert(line.trim().to_string());
        }
    }
    Ok(ids)
}

fn write_ids<'a>(path: &Path, ids: impl IntoIterator<Item = &'a String>) -> Result<()> {
    write_tsv(path, |out| {
        ids.into_iter().try_for_each(|id| writeln!(out, "{id}"))
    })
}

#[derive(Serialize)]
struct Snapshot<'a> {
    seed: u64,
    #[serde(flatten)]
    command: &'a Command,
}

pub fn run(command: &Command, seed: u64) -> Result<()> {
    let out = match command {
        Command::IngestLexicon(c) => &c.out,
        Command::Match(c) => &c.out,
        Command::TrainFilters(c) => &c.out,
        Command::ApplyFilters(c) => &c.out,
        Command::Assemble(c) => &c.out,
        Command::Split(c) => &c.out,
        Command::Sample(c) => &c.out,
        Command::Audit(c) => &c.out,
        Command::Index(c) => &c.out,
        Command::RetrieveBm25(c) => &c.out,
        Command::RetrieveDense(c) => &c.out,
        Command::EvalRetrieval(c) => &c.out,
        Command::EvalNer(c) => &c.out,
        Command::FpRate(c) => &c.out,
        Command::GenSynthetic(c) => &c.out,
    };
    fs::create_dir_all(out).with_context(|| format!("creating run directory {}", out.display()))?;
    match command {
        Command::IngestLexicon(c) => c.run(),
        Command::Match(c) => c.run(),
        Command::TrainFilters(c) => c.run(seed),
        Command::ApplyFilters(c) => c.run(),
        Command::Assemble(c) => c.run(seed),
        Command::Split(c) => c.run(seed),
        Command::Sample(c) => c.run(seed),
        Command::Audit(c) => c.run(seed),
        Command::Index(c) => c.run(),
        Command::RetrieveBm25(c) => c.run(),
        Command::RetrieveDense(c) => c.run(),
        Command::EvalRetrieval(c) => c.run(),
        Command::EvalNer(c) => c.run(),
        Command::FpRate(c) => c.run(),
        Command::GenSynthetic(c) => c.run(seed),
    }?;
    write_json(&out.join("config.json"), &Snapshot { seed, command })
}

#[derive(Args, Debug, Serialize)]
pub struct IngestLexicon {
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: PathBuf,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl IngestLexicon {
    fn run(&self) -> Result<()> {
        let lexicon = load_lexicon(&self.lexicon)?;
        log::info!(
            "{} types, {} entities",
            lexicon.types().len(),
            lexicon.entities().len()
        );
        lexicon.save(&self.out.join("lexicon.jsonl"))?;
        Ok(())
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Match {
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: PathBuf,
    #[arg(long, env = "SILVERNER_CORPUS")]
    pub corpus: PathBuf,
    /// Restrict each entity to the paragraphs linked to it.
    #[arg(long, env = "SILVERNER_LINKGRAPH")]
    pub linkgraph: Option<PathBuf>,
    /// Maximum total intervening tokens inside a match.
    #[arg(long, default_value_t = matcher::DEFAULT_SLOP)]
    pub slop: usize,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct MatchSummary {
    paragraphs: usize,
    matches: usize,
    missing_linkgraph_paragraphs: Vec<String>,
}

impl Match {
    fn run(&self) -> Result<()> {
        let lexicon = load_lexicon(&self.lexicon)?;
        let corpus = load_paragraphs(&self.corpus)?;
        let linkgraph = load_linkgraph(self.linkgraph.as_ref())?;
        let patterns = compile(&lexicon)?;
        let scanned = scan_corpus(&corpus, &patterns, linkgraph.as_ref(), self.slop);
        log::info!(
            "{} matches over {} paragraphs",
            scanned.matches.len(),
            corpus.len()
        );
        matcher::save_matches(&self.out.join("matches.jsonl"), &scanned.matches)?;
        write_json(
            &self.out.join("match_summary.json"),
            &MatchSummary {
                paragraphs: corpus.len(),
                matches: scanned.matches.len(),
                missing_linkgraph_paragraphs: scanned.missing_paragraphs,
            },
        )
    }
}

#[derive(Args, Debug, Serialize)]
pub struct TrainFilters {
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: PathBuf,
    #[arg(long, env = "SILVERNER_CORPUS")]
    pub corpus: PathBuf,
    /// Raw matches from `match`.
    #[arg(long, env = "SILVERNER_MATCHES")]
    pub matches: PathBuf,
    /// Share of matched paragraphs held out as filter training data.
    #[arg(long, default_value_t = 0.2)]
    pub holdout_fraction: f64,
    #[arg(long, default_value_t = filter::DEFAULT_MIN_DF)]
    pub min_df: u32,
    #[arg(long, default_value_t = SvmConfig::default().lambda)]
    pub lambda: f64,
    #[arg(long, default_value_t = SvmConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl TrainFilters {
    fn run(&self, seed: u64) -> Result<()> {
        let lexicon = load_lexicon(&self.lexicon)?;
        let corpus = load_paragraphs(&self.corpus)?;
        let raw = matcher::load_matches(input("--matches", &self.matches)?)?;
        let holdout = select_holdout(
            raw.iter().map(|m| m.paragraph_id.as_str()),
            self.holdout_fraction,
            seed,
        );
        let sets = training_sets(&raw, &lexicon, &holdout, seed)?;
        let config = FilterConfig {
            svm: SvmConfig {
                lambda: self.lambda,
                epochs: self.epochs,
                seed,
            },
            threshold: self.threshold,
        };
        let filter = train_filters(&sets, &corpus, self.min_df, &config)?;
        log::info!(
            "{} held-out paragraphs, {} type models",
            holdout.len(),
            filter.models.len()
        );
        write_ids(&self.out.join("holdout.txt"), &holdout)?;
        filter.save(&self.out.join(VOCAB_FILE), &self.out.join(MODELS_FILE))?;
        Ok(())
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ApplyFilters {
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: PathBuf,
    #[arg(long, env = "SILVERNER_CORPUS")]
    pub corpus: PathBuf,
    #[arg(long, env = "SILVERNER_MATCHES")]
    pub matches: PathBuf,
    /// Directory holding `vocab.jsonl` and `models.jsonl`.
    #[arg(long, env = "SILVERNER_FILTERS")]
    pub filters: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl ApplyFilters {
    fn run(&self) -> Result<()> {
        let lexicon = load_lexicon(&self.lexicon)?;
        let corpus = load_paragraphs(&self.corpus)?;
        let raw = matcher::load_matches(input("--matches", &self.matches)?)?;
        let filter = load_filter(&self.filters)?;
        let kept = filter::filter_matches(&raw, &filter, &lexicon, &corpus, self.threshold)?;
        log::info!("{} of {} matches kept", kept.len(), raw.len());
        filter::save_filtered(&self.out.join("filtered.jsonl"), &kept)?;
        Ok(())
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Assemble {
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: PathBuf,
    #[arg(long, env = "SILVERNER_CORPUS")]
    pub corpus: PathBuf,
    #[arg(long, env = "SILVERNER_LINKGRAPH")]
    pub linkgraph: Option<PathBuf>,
    #[arg(long, env = "SILVERNER_FILTERS")]
    pub filters: PathBuf,
    /// Paragraph ids to leave out, one per line (the filters' training data).
    #[arg(long, env = "SILVERNER_HOLDOUT")]
    pub holdout: Option<PathBuf>,
    #[arg(long, default_value_t = matcher::DEFAULT_SLOP)]
    pub slop: usize,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 2)]
    pub min_distinct_types: usize,
    #[arg(long)]
    pub max_paragraphs: Option<usize>,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl Assemble {
    fn run(&self, seed: u64) -> Result<()> {
        let lexicon = load_lexicon(&self.lexicon)?;
        let corpus = load_paragraphs(&self.corpus)?;
        let linkgraph = load_linkgraph(self.linkgraph.as_ref())?;
        let filter = load_filter(&self.filters)?;
        let exclude = match &self.holdout {
            Some(p) => read_ids(input("--holdout", p)?)?,
            None => BTreeSet::new(),
        };
        let config = AssemblyConfig {
            slop: self.slop,
            threshold: self.threshold,
            min_distinct_types: self.min_distinct_types,
            max_paragraphs: self.max_paragraphs,
            seed,
        };
        let (dataset, meta) = assemble(
            &corpus,
            &lexicon,
            linkgraph.as_ref(),
            &filter,
            &exclude,
            &config,
        )?;
        log::info!(
            "{} paragraphs, {} typed mentions",
            meta.selected_paragraphs,
            meta.typed_mentions
        );
        dataset.save(&self.out.join("dataset.jsonl"))?;
        write_json(&self.out.join("metadata.json"), &meta)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SplitCmd {
    #[arg(long, env = "SILVERNER_DATASET")]
    pub dataset: PathBuf,
    /// Share of each type's mentions targeted for the train paragraphs.
    #[arg(long, default_value_t = 0.8)]
    pub fraction: f64,
    /// Share of types placed in the train type set.
    #[arg(long, default_value_t = 0.8)]
    pub type_fraction: f64,
    /// Explicit comma-separated test types, replacing the seeded draw.
    #[arg(long, value_delimiter = ',')]
    pub test_types: Option<Vec<String>>,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl SplitCmd {
    fn run(&self, seed: u64) -> Result<()> {
        let dataset = load_dataset(&self.dataset)?;
        let config = SplitConfig {
            paragraph_fraction: self.fraction,
            type_fraction: self.type_fraction,
            seed,
            test_types: self.test_types.clone(),
        };
        let (assignment, report) = pipeline::split(&dataset, &config)?;
        for t in &report.unsatisfiable {
            log::warn!("type `{t}`: split proportion cannot be met");
        }
        assignment.save(&self.out.join("splits.jsonl"))?;
        write_json(&self.out.join("split_report.json"), &report)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Sample {
    #[arg(long, env = "SILVERNER_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, short)]
    pub n: usize,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl Sample {
    fn run(&self, seed: u64) -> Result<()> {
        let dataset = load_dataset(&self.dataset)?;
        let draws = stratified_sample(&dataset, self.n, seed)?;
        silverner::jsonl::write(&self.out.join("sample.jsonl"), &draws)?;
        Ok(())
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Audit {
    #[arg(long, env = "SILVERNER_DATASET")]
    pub dataset: Option<PathBuf>,
    /// Paragraphs to sample into the worksheet.
    #[arg(long, short, default_value_t = 150)]
    pub n: usize,
    /// Score an already judged worksheet instead of sampling a new one.
    #[arg(long, env = "SILVERNER_JUDGED", conflicts_with_all = ["dataset", "truth"])]
    pub judged: Option<PathBuf>,
    /// Construction truth of a synthetic corpus; fills the judgments automatically.
    #[arg(long, env = "SILVERNER_TRUTH", requires = "lexicon")]
    pub truth: Option<PathBuf>,
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl Audit {
    fn run(&self, seed: u64) -> Result<()> {
        let worksheet = match (&self.judged, &self.dataset) {
            (Some(judged), _) => AuditWorksheet::load(input("--judged", judged)?)?,
            (None, Some(dataset)) => {
                let mut sheet = audit_sample(&load_dataset(dataset)?, self.n, seed);
                if let (Some(truth), Some(lexicon)) = (&self.truth, &self.lexicon) {
                    let truth = synthetic::load_truth(input("--truth", truth)?)?;
                    ConstructionOracle::new(&truth, &load_lexicon(lexicon)?).fill(&mut sheet);
                }
                sheet.save(&self.out.join("worksheet.tsv"))?;
                sheet
            }
            (None, None) => return Err(Usage("audit needs --dataset or --judged".into()).into()),
        };
        let report = worksheet.report();
        log::info!(
            "{} of {} judged mentions correct",
            report.correct,
            report.judged
        );
        write_json(&self.out.join("audit_report.json"), &report)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Index {
    /// Paragraph corpus to index.
    #[arg(
        long,
        env = "SILVERNER_CORPUS",
        conflicts_with = "dataset",
        required_unless_present = "dataset"
    )]
    pub corpus: Option<PathBuf>,
    /// Index the paragraphs of an assembled dataset instead.
    #[arg(long, env = "SILVERNER_DATASET")]
    pub dataset: Option<PathBuf>,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl Index {
    fn run(&self) -> Result<()> {
        let paragraphs = match (&self.corpus, &self.dataset) {
            (Some(c), _) => load_paragraphs(c)?,
            (None, Some(d)) => load_dataset(d)?
                .paragraphs
                .into_iter()
                .map(|p| p.paragraph)
                .collect(),
            (None, None) => return Err(Usage("index needs --corpus or --dataset".into()).into()),
        };
        let index = InvertedIndex::build(&paragraphs)?;
        log::info!(
            "{} documents, {} terms",
            index.documents(),
            index.postings.len()
        );
        let file = BufWriter::new(fs::File::create(self.out.join("index.json"))?);
        serde_json::to_writer(file, &index)?;
        Ok(())
    }
}

#[derive(Deserialize)]
struct QueryRecord {
    query_id: String,
    text: String,
}

#[derive(Args, Debug, Serialize)]
pub struct RetrieveBm25 {
    #[arg(long, env = "SILVERNER_INDEX")]
    pub index: PathBuf,
    /// Line-delimited `{"query_id","text"}` records.
    #[arg(long, env = "SILVERNER_QUERIES", conflicts_with = "splits")]
    pub queries: Option<PathBuf>,
    /// Query each test type of a split by its label (needs --lexicon).
    #[arg(
        long,
        env = "SILVERNER_SPLITS",
        requires = "lexicon",
        required_unless_present = "queries"
    )]
    pub splits: Option<PathBuf>,
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = Bm25Params::default().k1)]
    pub k1: f64,
    #[arg(long, default_value_t = Bm25Params::default().b)]
    pub b: f64,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl RetrieveBm25 {
    fn queries(&self) -> Result<Vec<(String, String)>> {
        if let Some(path) = &self.queries {
            return silverner::jsonl::read::<QueryRecord>(input("--queries", path)?)?
                .map(|r| r.map(|(_, q)| (q.query_id, q.text)).map_err(Into::into))
                .collect();
        }
        let (Some(splits), Some(lexicon)) = (&self.splits, &self.lexicon) else {
            return Err(
                Usage("retrieve-bm25 needs --queries or --splits with --lexicon".into()).into(),
            );
        };
        let lexicon = load_lexicon(lexicon)?;
        load_splits(splits)?
            .test_types()
            .into_iter()
            .map(|t| {
                let label = lexicon.entity_type(&t).map(|e| e.label.clone());
                label
                    .map(|l| (t.clone(), l))
                    .ok_or_else(|| silverner::ValidationError::UnknownType(t).into())
            })
            .collect()
    }

    fn run(&self) -> Result<()> {
        let queries = self.queries()?;
        let file = fs::File::open(input("--index", &self.index)?)?;
        let index: InvertedIndex =
            serde_json::from_reader(BufReader::new(file)).context("reading index")?;
        let params = Bm25Params {
            k1: self.k1,
            b: self.b,
        };
        let runs = queries
            .iter()
            .map(|(id, text)| bm25_rank(&index, id, text, params))
            .collect::<Result<Vec<_>, _>>()?;
        save_runs(&self.out.join("runs.tsv"), &runs)?;
        Ok(())
    }
}

#[derive(Args, Debug, Serialize)]
pub struct RetrieveDense {
    /// Paragraph vectors.
    #[arg(long, env = "SILVERNER_VECTORS")]
    pub vectors: PathBuf,
    #[arg(long, env = "SILVERNER_QUERY_VECTORS")]
    pub query_vectors: PathBuf,
    /// Rank only the paragraphs of this dataset.
    #[arg(long, env = "SILVERNER_DATASET")]
    pub dataset: Option<PathBuf>,
    /// Issue only the queries named by this split's test types.
    #[arg(long, env = "SILVERNER_SPLITS")]
    pub splits: Option<PathBuf>,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl RetrieveDense {
    fn run(&self) -> Result<()> {
        let mut docs = load_vectors(input("--vectors", &self.vectors)?)?;
        if let Some(d) = &self.dataset {
            let dataset = load_dataset(d)?;
            let kept: BTreeSet<&str> = dataset.paragraphs.iter().map(|p| p.id()).collect();
            docs.entries.retain(|(id, _)| kept.contains(id.as_str()));
        }
        let store: DenseVectorStore = docs.into_store()?;
        let mut queries = load_vectors(input("--query-vectors", &self.query_vectors)?)?.entries;
        if let Some(s) = &self.splits {
            let wanted: BTreeSet<String> = load_splits(s)?.test_types().into_iter().collect();
            queries.retain(|(id, _)| wanted.contains(id));
        }
        let runs = queries
            .iter()
            .map(|(id, q)| dense_rank(&store, id, q))
            .collect::<Result<Vec<_>, _>>()?;
        save_runs(&self.out.join("runs.tsv"), &runs)?;
        Ok(())
    }
}

#[derive(Args, Debug, Serialize)]
pub struct EvalRetrieval {
    #[arg(long, env = "SILVERNER_RUNS")]
    pub runs: PathBuf,
    #[arg(long, env = "SILVERNER_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "SILVERNER_SPLITS")]
    pub splits: PathBuf,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl EvalRetrieval {
    fn run(&self) -> Result<()> {
        let mut runs = load_runs(input("--runs", &self.runs)?)?;
        let dataset = load_dataset(&self.dataset)?;
        let test_types = load_splits(&self.splits)?.test_types();
        // run files have no rows for a query that retrieved nothing
        for t in &test_types {
            if !runs.contains_key(t) {
                log::warn!("no ranked rows for test type `{t}`, scoring it as an empty ranking");
                runs.insert(t.clone(), RankedRetrievalRun::from_scores(t, []));
            }
        }
        let report: retrieval::RetrievalReport =
            evaluate_runs(&runs, &relevance_sets(&dataset), &test_types)?;
        log::info!(
            "mean Recall@|REL| {:.4} over {} types",
            report.mean,
            report.per_type.len()
        );
        write_tsv(&self.out.join("retrieval_report.tsv"), |out| {
            report.write_tsv(out)
        })?;
        write_json(&self.out.join("retrieval_report.json"), &report)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct EvalNer {
    /// Predictions in span form or comma-separated string form.
    #[arg(long, env = "SILVERNER_PREDICTIONS")]
    pub predictions: PathBuf,
    #[arg(long, env = "SILVERNER_DATASET")]
    pub dataset: PathBuf,
    /// Lets prediction files name types by label.
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

fn resolver(dataset: &SilverDataset, lexicon: Option<&PathBuf>) -> Result<TypeResolver> {
    let resolver = TypeResolver::new(dataset.types());
    Ok(match lexicon {
        Some(p) => resolver.with_lexicon(&load_lexicon(p)?),
        None => resolver,
    })
}

impl EvalNer {
    fn run(&self) -> Result<()> {
        let dataset = load_dataset(&self.dataset)?;
        let resolver = resolver(&dataset, self.lexicon.as_ref())?;
        let preds = load_predictions(input("--predictions", &self.predictions)?, &resolver)?;
        let report: ner_eval::EvalReport = evaluate(preds.pair_with_gold(&dataset)?);
        log::info!(
            "exact micro F1 {:.4}, relaxed micro F1 {:.4}",
            report.exact_micro.f1,
            report.relaxed_micro.f1
        );
        write_tsv(&self.out.join("ner_report.tsv"), |out| {
            report.write_tsv(out)
        })?;
        write_json(&self.out.join("ner_report.json"), &report)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct FpRate {
    #[arg(long, env = "SILVERNER_PREDICTIONS")]
    pub predictions: PathBuf,
    /// Paragraphs of this dataset lacking the type form the denominator.
    #[arg(long, env = "SILVERNER_DATASET")]
    pub dataset: PathBuf,
    /// Types to measure (repeatable or comma-separated).
    #[arg(long = "type", value_delimiter = ',', required = true)]
    pub types: Vec<String>,
    #[arg(long, env = "SILVERNER_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct FpRateRow<'a> {
    type_id: &'a str,
    paragraphs: usize,
    fp_rate: f64,
}

impl FpRate {
    fn run(&self) -> Result<()> {
        let dataset = load_dataset(&self.dataset)?;
        let resolver = resolver(&dataset, self.lexicon.as_ref())?;
        let preds = load_predictions(input("--predictions", &self.predictions)?, &resolver)?;
        let mut rows = Vec::new();
        for t in &self.types {
            let ids = paragraphs_lacking_type(&dataset, t);
            let rate = ner_eval::fp_rate(&preds, ids.iter().copied(), t)
                .with_context(|| format!("type `{t}`"))?;
            rows.push(FpRateRow {
                type_id: t,
                paragraphs: ids.len(),
                fp_rate: rate,
            });
        }
        write_json(&self.out.join("fp_rate.json"), &rows)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GenSynthetic {
    #[arg(long, default_value_t = SyntheticConfig::default().paragraphs)]
    pub paragraphs: usize,
    #[arg(long, default_value_t = SyntheticConfig::default().entities_per_type)]
    pub entities_per_type: usize,
    #[arg(long, default_value_t = SyntheticConfig::default().decoy_rate)]
    pub decoy_rate: f64,
    #[arg(long, default_value_t = SyntheticConfig::default().link_noise)]
    pub link_noise: usize,
    #[arg(long, default_value_t = SyntheticConfig::default().dimension)]
    pub dimension: usize,
    #[arg(long, env = "SILVERNER_OUT")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl GenSynthetic {
    fn run(&self, seed: u64) -> Result<()> {
        let synth = synthetic::generate(&SyntheticConfig {
            paragraphs: self.paragraphs,
            entities_per_type: self.entities_per_type,
            decoy_rate: self.decoy_rate,
            link_noise: self.link_noise,
            dimension: self.dimension,
            seed,
        });
        let dir = &self.out;
        synth.lexicon.save(&dir.join("lexicon.jsonl"))?;
        save_corpus(&dir.join("corpus.jsonl"), &synth.corpus)?;
        synth.linkgraph.save(&dir.join("linkgraph.jsonl"))?;
        synthetic::save_truth(&dir.join("truth.jsonl"), &synth.truth)?;
        retrieval::save_vectors(&dir.join("paragraph_vectors.txt"), &synth.paragraph_vectors)?;
        retrieval::save_vectors(&dir.join("query_vectors.txt"), &synth.query_vectors)?;
        log::info!(
            "{} paragraphs, {} types, {} mentions",
            synth.corpus.len(),
            synth.lexicon.types().len(),
            synth.truth.len()
        );
        Ok(())
    }
}
