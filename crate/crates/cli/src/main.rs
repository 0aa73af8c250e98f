//! `cruciverba` command line: batch pipeline steps and the HTTP server.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cruciverba::config::AppConfig;
use cruciverba::curation::{filter_article, rank_articles};
use cruciverba::dataset::{
    compute_stats, export_training_manifest, parse_record_line, ClueRecord, DatasetError, DatasetStore,
    ExportFilter, TokenCounter, WhitespaceTokenizer, WordTokenizer,
};
use cruciverba::gateway::{GatewayError, GatewayMode};
use cruciverba::grid::{build, render, Entry, GridConfig, GridError, RenderFormat};
use cruciverba::rouge::{compare_cluesets, render_table, score_corpus, score_pair, RougeError};
use cruciverba::service::Service;
use cruciverba::styles::ClueStyle;
use cruciverba::validator::{validate, ItalianLexicon, Rating};
use cruciverba::wiki::{ArticleRecord, WikiError};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cruciverba", version, about = "Italian educational crossword pipeline")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Overrides `store.data_dir`.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Serve LLM and Wikipedia responses from a fixture directory.
    #[arg(long, global = true, value_name = "DIR")]
    replay: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch articles from it.wikipedia and print their records.
    Ingest {
        #[arg(required = true)]
        titles: Vec<String>,
        /// Append records to this JSONL file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter and rank article records.
    Curate {
        /// JSONL of article records, as written by `ingest --out`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Keep only the N most viewed accepted articles.
        #[arg(long)]
        top: Option<usize>,
    },
    /// Generate clues for a keyword.
    Gen(GenArgs),
    /// Check clues for structure, answer leaks and length.
    Validate {
        #[arg(long, required_unless_present = "input")]
        clue: Option<String>,
        #[arg(long, required_unless_present = "input")]
        answer: Option<String>,
        #[arg(long, default_value = "unrestricted")]
        style: ClueStyle,
        /// JSONL of clue records; each is re-validated against its own style.
        #[arg(long = "in", conflicts_with_all = ["clue", "answer"])]
        input: Option<PathBuf>,
    },
    /// Mean ROUGE of clues against their contexts.
    Rouge {
        /// JSONL with `clue` and `context` fields.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value = "clues")]
        label: String,
    },
    /// ROUGE of one clue set against a reference clue set.
    Compare {
        /// JSONL with `context_id` and `clue` fields.
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value = "candidate")]
        label: String,
    },
    /// Dataset statistics.
    Stats {
        /// JSONL of clue records; defaults to the store.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "whitespace")]
        tokenizer: Tokenizer,
    },
    /// Build and render a crossword from clue records.
    Grid {
        /// JSONL with `keyword` (or `answer`) and `clue`, optionally `id`.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: RenderFormat,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export store records as JSONL, or a fine-tuning split with `--training`.
    Export {
        #[arg(long, required_unless_present = "training")]
        out: Option<PathBuf>,
        #[arg(long)]
        include_tombstoned: bool,
        #[arg(long = "style")]
        styles: Vec<ClueStyle>,
        #[arg(long)]
        min_rating: Option<Rating>,
        /// Write train/val/test JSONL and manifest.json into this directory.
        #[arg(long)]
        training: Option<PathBuf>,
    },
    /// Import clue records into the store.
    Import {
        #[arg(long = "in")]
        input: PathBuf,
        /// Rows use the published dataset's column names.
        #[arg(long)]
        published: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, conflicts_with = "text_file", required_unless_present = "text_file")]
    title: Option<String>,
    /// Plain-text context instead of a Wikipedia article.
    #[arg(long)]
    text_file: Option<PathBuf>,
    #[arg(long)]
    keyword: String,
    #[arg(long = "style", default_value = "unrestricted")]
    styles: Vec<ClueStyle>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Append the generated records to the store.
    #[arg(long)]
    save: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tokenizer {
    Whitespace,
    Word,
}

struct Failure {
    code: String,
    message: String,
    exit: u8,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_AUTH: u8 = 3;
const EXIT_UPSTREAM: u8 = 4;

impl Failure {
    fn new(code: impl Into<String>, message: impl ToString) -> Self {
        Failure { code: code.into(), message: message.to_string(), exit: EXIT_FAILURE }
    }
}

impl From<GatewayError> for Failure {
    fn from(e: GatewayError) -> Self {
        let exit = match &e {
            GatewayError::AuthFailure(_) => EXIT_AUTH,
            e if e.is_upstream() => EXIT_UPSTREAM,
            _ => EXIT_FAILURE,
        };
        Failure { code: e.code().into(), message: e.to_string(), exit }
    }
}

impl From<WikiError> for Failure {
    fn from(e: WikiError) -> Self {
        let exit = match e {
            WikiError::Network(_) | WikiError::RateLimited => EXIT_UPSTREAM,
            _ => EXIT_FAILURE,
        };
        Failure { code: e.code().into(), message: e.to_string(), exit }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::new(e.code(), e)
    }
}

impl From<GridError> for Failure {
    fn from(e: GridError) -> Self {
        Failure::new(e.code(), e)
    }
}

impl From<RougeError> for Failure {
    fn from(e: RougeError) -> Self {
        Failure::new(e.code(), e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new("IoError", e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let json_errors = cli.json;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if json_errors {
                eprintln!("{}", json!({ "error": f.code, "message": f.message }));
            } else {
                eprintln!("error[{}]: {}", f.code, f.message);
            }
            ExitCode::from(f.exit)
        }
    }
}

fn load_config(cli: &Cli) -> CliResult<AppConfig> {
    let mut cfg = AppConfig::load(cli.config.as_deref()).map_err(|e| Failure::new(e.code(), &e))?;
    if let Some(dir) = &cli.data_dir {
        cfg.store.data_dir = dir.clone();
    }
    if let Some(dir) = &cli.replay {
        cfg.llm.mode = GatewayMode::Replay;
        cfg.llm.fixtures_dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn service(cfg: AppConfig) -> CliResult<Service> {
    Service::from_config(cfg).map_err(|e| Failure::new(e.code(), &e))
}

fn read_lines(path: &Path) -> CliResult<Vec<(usize, String)>> {
    let file = std::fs::File::open(path).map_err(|e| Failure::new("IoError", format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn read_json_lines(path: &Path) -> CliResult<Vec<(usize, Value)>> {
    read_lines(path)?
        .into_iter()
        .map(|(n, l)| {
            serde_json::from_str(&l)
                .map(|v| (n, v))
                .map_err(|e| Failure::new("SchemaError", format!("{}:{n}: {e}", path.display())))
        })
        .collect()
}

fn read_records(path: &Path) -> CliResult<Vec<ClueRecord>> {
    read_lines(path)?
        .into_iter()
        .map(|(n, l)| parse_record_line(&l).map_err(|e| Failure::new("SchemaError", format!("{}:{n}: {e}", path.display()))))
        .collect()
}

fn field<'a>(v: &'a Value, keys: &[&str], path: &Path, line: usize) -> CliResult<&'a str> {
    keys.iter()
        .find_map(|k| v.get(*k).and_then(Value::as_str))
        .ok_or_else(|| Failure::new("SchemaError", format!("{}:{line}: missing field {:?}", path.display(), keys[0])))
}

fn emit(json_mode: bool, value: &Value, text: impl FnOnce() -> String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(value).expect("JSON value serializes"));
    } else {
        print!("{}", text());
    }
}

fn to_value(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(cli: Cli) -> CliResult {
    let cfg = load_config(&cli)?;
    let json_mode = cli.json;
    match cli.command {
        Command::Ingest { titles, out } => ingest(cfg, json_mode, &titles, out.as_deref()),
        Command::Curate { input, top } => curate(&cfg, json_mode, &input, top),
        Command::Gen(args) => gen(cfg, json_mode, args),
        Command::Validate { clue, answer, style, input } => validate_cmd(json_mode, clue, answer, style, input),
        Command::Rouge { pairs, label } => rouge(json_mode, &pairs, &label),
        Command::Compare { candidate, reference, label } => compare(json_mode, &candidate, &reference, &label),
        Command::Stats { input, tokenizer } => stats(&cfg, json_mode, input.as_deref(), tokenizer),
        Command::Grid { input, out, format, seed } => grid(&cfg, json_mode, &input, out.as_deref(), format, seed),
        Command::Export { out, include_tombstoned, styles, min_rating, training } => {
            let filter = ExportFilter {
                include_tombstoned,
                styles: (!styles.is_empty()).then_some(styles),
                min_rating,
            };
            export(&cfg, json_mode, filter, out.as_deref(), training.as_deref())
        }
        Command::Import { input, published } => import(&cfg, json_mode, &input, published),
        Command::Serve { bind } => serve(cfg, bind),
    }
}

fn ingest(cfg: AppConfig, json_mode: bool, titles: &[String], out: Option<&Path>) -> CliResult {
    let svc = service(cfg)?;
    let mut records = Vec::new();
    for title in titles {
        records.push(svc.wiki().ingest(title)?);
    }
    if let Some(path) = out {
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        for r in &records {
            writeln!(f, "{}", serde_json::to_string(r).expect("record serializes"))?;
        }
    }
    emit(json_mode, &to_value(&records), || {
        records
            .iter()
            .map(|r| {
                format!(
                    "{}\t{} views\t{} words\tkeywords: {}\n",
                    r.title,
                    r.view_count,
                    cruciverba::text::word_count(&r.intro_text),
                    r.bold_keywords.join(", ")
                )
            })
            .collect()
    });
    Ok(())
}

fn curate(cfg: &AppConfig, json_mode: bool, input: &Path, top: Option<usize>) -> CliResult {
    let mut articles = Vec::new();
    for (n, v) in read_json_lines(input)? {
        let a: ArticleRecord = serde_json::from_value(v)
            .map_err(|e| Failure::new("SchemaError", format!("{}:{n}: {e}", input.display())))?;
        articles.push(a);
    }
    let mut rows = Vec::new();
    let mut accepted = Vec::new();
    for a in articles {
        let verdict = filter_article(&a, &cfg.curation);
        rows.push(json!({ "title": a.title, "verdict": verdict }));
        if verdict.accepted {
            accepted.push(a);
        }
    }
    let mut ranked = rank_articles(accepted);
    if let Some(n) = top {
        ranked.truncate(n);
    }
    let selected: Vec<&str> = ranked.iter().map(|a| a.title.as_str()).collect();
    let value = json!({ "articles": rows, "selected": selected });
    emit(json_mode, &value, || {
        let mut s = String::new();
        for r in &rows {
            let v = &r["verdict"];
            let reasons: Vec<&str> = v["reasons"].as_array().unwrap().iter().filter_map(Value::as_str).collect();
            s.push_str(&format!(
                "{}\t{}\t{}\n",
                r["title"].as_str().unwrap_or(""),
                if v["accepted"].as_bool() == Some(true) { "accepted" } else { "rejected" },
                reasons.join(",")
            ));
        }
        s.push_str(&format!("selected: {}\n", selected.join(", ")));
        s
    });
    Ok(())
}

fn gen(cfg: AppConfig, json_mode: bool, args: GenArgs) -> CliResult {
    let params = cfg.generation.clone();
    let svc = service(cfg)?;
    let article = match (&args.title, &args.text_file) {
        (Some(title), _) => svc.wiki().ingest(title)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            ArticleRecord { intro_text: text.trim().to_string(), ..Default::default() }
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    if article.intro_text.is_empty() {
        return Err(Failure::new("EmptyContext", "context is empty"));
    }
    let lex = ItalianLexicon::builtin();
    let mut records = Vec::new();
    for style in &args.styles {
        let batch = svc.gateway().generate_clues(&article, &args.keyword, *style, args.n, &params)?;
        for draft in &batch.drafts {
            let report = validate(&draft.clue, &draft.keyword, draft.style, lex);
            let scores = score_pair(&draft.clue, &draft.context);
            records.push(ClueRecord::from_draft(draft, report, Some(scores), svc.now()));
        }
    }
    if args.save {
        for r in records.iter_mut() {
            match svc.store().append(r.clone()) {
                Ok(id) => r.id = id,
                Err(DatasetError::DuplicateRecord(id)) => r.id = id,
                Err(e) => return Err(e.into()),
            }
        }
    }
    emit(json_mode, &to_value(&records), || {
        records
            .iter()
            .map(|r| {
                let flag = if r.validation.passed { "ok" } else { "FAIL" };
                let issues: Vec<String> = r.validation.issues.iter().map(|i| format!("{i:?}")).collect();
                format!("[{}] {flag:<4} {}  {}\n", r.style, r.clue, issues.join(","))
            })
            .collect()
    });
    Ok(())
}

fn validate_cmd(
    json_mode: bool,
    clue: Option<String>,
    answer: Option<String>,
    style: ClueStyle,
    input: Option<PathBuf>,
) -> CliResult {
    let lex = ItalianLexicon::builtin();
    let items: Vec<(String, String, ClueStyle)> = match input {
        Some(path) => read_records(&path)?.into_iter().map(|r| (r.clue, r.keyword, r.style)).collect(),
        None => vec![(clue.unwrap_or_default(), answer.unwrap_or_default(), style)],
    };
    let reports: Vec<Value> = items
        .iter()
        .map(|(c, a, s)| json!({ "clue": c, "answer": a, "report": validate(c, a, *s, lex) }))
        .collect();
    emit(json_mode, &Value::Array(reports.clone()), || {
        reports
            .iter()
            .map(|r| {
                let rep = &r["report"];
                format!(
                    "{}\t{}\tdetected={}\tissues={}\n",
                    if rep["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                    r["clue"].as_str().unwrap_or(""),
                    rep["detected_style"].as_str().unwrap_or("none"),
                    rep["issues"]
                )
            })
            .collect()
    });
    Ok(())
}

fn rouge(json_mode: bool, path: &Path, label: &str) -> CliResult {
    let mut pairs = Vec::new();
    for (n, v) in read_json_lines(path)? {
        let clue = field(&v, &["clue", "candidate", "output"], path, n)?.to_string();
        let ctx = field(&v, &["context", "reference", "text"], path, n)?.to_string();
        pairs.push((clue, ctx));
    }
    let report = score_corpus(&pairs)?;
    emit(json_mode, &to_value(&report), || render_table(&[(label, report)]));
    Ok(())
}

fn clue_set(path: &Path) -> CliResult<Vec<(String, String)>> {
    read_json_lines(path)?
        .into_iter()
        .map(|(n, v)| {
            Ok((
                field(&v, &["context_id", "id"], path, n)?.to_string(),
                field(&v, &["clue", "output"], path, n)?.to_string(),
            ))
        })
        .collect()
}

fn compare(json_mode: bool, candidate: &Path, reference: &Path, label: &str) -> CliResult {
    let report = compare_cluesets(&clue_set(candidate)?, &clue_set(reference)?)?;
    emit(json_mode, &to_value(&report), || render_table(&[(label, report)]));
    Ok(())
}

fn stats(cfg: &AppConfig, json_mode: bool, input: Option<&Path>, tokenizer: Tokenizer) -> CliResult {
    let records = match input {
        Some(path) => read_records(path)?,
        None => DatasetStore::open(cfg.store.clues_dir())?.select(&ExportFilter::default()),
    };
    let counter: &dyn TokenCounter = match tokenizer {
        Tokenizer::Whitespace => &WhitespaceTokenizer,
        Tokenizer::Word => &WordTokenizer,
    };
    let s = compute_stats(&records, counter)?;
    emit(json_mode, &to_value(&s), || {
        let mut out = format!(
            "records: {}\ncontext tokens: {}..{}\nclue tokens: {}..{}\n",
            s.record_count, s.min_context_tokens, s.max_context_tokens, s.min_clue_tokens, s.max_clue_tokens
        );
        for (style, n) in &s.style_counts {
            out.push_str(&format!("style {style}: {n}\n"));
        }
        for (cat, n) in &s.category_counts {
            out.push_str(&format!("category {cat}: {n}\n"));
        }
        out
    });
    Ok(())
}

fn grid(cfg: &AppConfig, json_mode: bool, input: &Path, out: Option<&Path>, format: RenderFormat, seed: Option<u64>) -> CliResult {
    let mut entries = Vec::new();
    for (n, v) in read_json_lines(input)? {
        let answer = field(&v, &["keyword", "answer"], input, n)?;
        let clue = field(&v, &["clue"], input, n)?;
        let id = v.get("id").and_then(Value::as_str).filter(|s| !s.is_empty()).map(str::to_string);
        entries.push(Entry::new(id.unwrap_or_else(|| format!("entry-{n}")), answer, clue)?);
    }
    let grid_cfg = GridConfig { seed: seed.unwrap_or(cfg.grid.seed), ..cfg.grid.clone() };
    let layout = build(&entries, &grid_cfg)?;
    for id in &layout.unplaced {
        log::warn!("entry {id} could not be placed");
    }
    let bytes = render(&layout, &entries, format)?;
    match out {
        Some(path) => {
            std::fs::write(path, &bytes)?;
            let summary = json!({
                "out": path.display().to_string(),
                "placed": layout.placements.len(),
                "unplaced": layout.unplaced,
                "width": layout.width,
                "height": layout.height,
            });
            emit(json_mode, &summary, || {
                format!(
                    "wrote {} ({}x{}, {} placed, {} unplaced)\n",
                    path.display(),
                    layout.width,
                    layout.height,
                    layout.placements.len(),
                    layout.unplaced.len()
                )
            });
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn export(cfg: &AppConfig, json_mode: bool, filter: ExportFilter, out: Option<&Path>, training: Option<&Path>) -> CliResult {
    let store = DatasetStore::open(cfg.store.clues_dir())?;
    let mut value = json!({});
    if let Some(path) = out {
        let n = store.export_jsonl(&filter, path)?;
        value["exported"] = json!(n);
        value["out"] = json!(path.display().to_string());
    }
    if let Some(dir) = training {
        let manifest = export_training_manifest(&store.select(&filter), dir)?;
        value["training"] = to_value(&manifest);
    }
    emit(json_mode, &value, || {
        let mut s = String::new();
        if let Some(n) = value.get("exported") {
            s.push_str(&format!("exported {n} records to {}\n", value["out"].as_str().unwrap_or("")));
        }
        if let Some(t) = value.get("training") {
            s.push_str(&format!(
                "training split: {} train, {} val, {} test\n",
                t["train"]["count"], t["val"]["count"], t["test"]["count"]
            ));
        }
        s
    });
    Ok(())
}

fn import(cfg: &AppConfig, json_mode: bool, input: &Path, published: bool) -> CliResult {
    let store = DatasetStore::open(cfg.store.clues_dir())?;
    let report = if published {
        store.import_published(input, chrono::Utc::now())?
    } else {
        store.import_jsonl(input)?
    };
    emit(json_mode, &to_value(&report), || {
        let mut s = format!("imported {} records\n", report.imported);
        for e in &report.errors {
            s.push_str(&format!("line {}: {}\n", e.line, e.message));
        }
        s
    });
    Ok(())
}

fn serve(cfg: AppConfig, bind: Option<String>) -> CliResult {
    let addr = bind.unwrap_or_else(|| cfg.server.bind.clone());
    let workers = cfg.server.workers;
    let svc = Arc::new(service(cfg)?);
    let server = Arc::new(tiny_http::Server::http(&addr).map_err(|e| Failure::new("BindFailed", format!("{addr}: {e}")))?);
    log::info!("listening on http://{addr}");
    eprintln!("listening on http://{}", server.server_addr());
    let handles: Vec<_> = (0..workers)
        .map(|_| {
            let svc = svc.clone();
            let server = server.clone();
            std::thread::spawn(move || {
                while let Ok(mut req) = server.recv() {
                    let mut body = Vec::new();
                    let resp = match req.as_reader().read_to_end(&mut body) {
                        Ok(_) => svc.handle(req.method().as_str(), req.url(), &body),
                        Err(e) => cruciverba::service::ApiResponse::json(
                            400,
                            &json!({ "error": "InvalidBody", "message": e.to_string() }),
                        ),
                    };
                    log::info!("{} {} -> {}", req.method(), req.url(), resp.status);
                    let header = tiny_http::Header::from_bytes(&b"Content-Type"[..], resp.content_type.as_bytes())
                        .expect("static header is valid");
                    let response = tiny_http::Response::from_data(resp.body).with_status_code(resp.status).with_header(header);
                    if let Err(e) = req.respond(response) {
                        log::warn!("failed to send response: {e}");
                    }
                }
            })
        })
        .collect();
    for h in handles {
        let _ = h.join();
    }
    Ok(())
}
