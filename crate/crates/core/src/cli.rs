//! Command-line front end. [`run`] takes the argument list and output
//! streams so it can be driven from tests; the binary only forwards to it.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 parse (or read)
//! error, 3 validation error, 4 undefined metric.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::etr::{self, focus_accuracy_correlation, EtrReport, ModelKind, ETR_CSV_HEADER};
use crate::fca::FormalContext;
use crate::metrics::{self, fmt6};
use crate::ranking::{self, Metric, ReferenceRanking};
use crate::schema::{self, Schema, Validated};

#[derive(Debug, Parser)]
#[command(
    name = "schema-focus",
    version,
    about = "Focus metrics and rankings for knowledge base schemas"
)]
struct Cli {
    /// key=value config file (flags override it)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corpus root directory (default: $SCHEMA_FOCUS_CORPUS or ./corpus)
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Output format: csv or json (export-fca: cxt or csv)
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write results to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Union each entity type's properties with its ancestors' first
    #[arg(long, global = true)]
    inherit: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Source {
    /// Schema stored in the corpus
    #[arg(long, conflicts_with = "file")]
    schema: Option<String>,
    /// Schema file (.json, .csv, or .nt) read directly
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct RankFlags {
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Query terms for CMM (comma or space separated)
    #[arg(long)]
    query: Option<String>,
    #[arg(long)]
    cmm_exact: Option<f64>,
    #[arg(long)]
    cmm_partial: Option<f64>,
    #[arg(long)]
    dem_properties: Option<f64>,
    #[arg(long)]
    dem_subclasses: Option<f64>,
    #[arg(long)]
    dem_superclasses: Option<f64>,
    #[arg(long)]
    dem_siblings: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct EtrFlags {
    /// Random seed (required)
    #[arg(long)]
    seed: Option<u64>,
    /// Instances generated per entity type
    #[arg(long)]
    n: Option<usize>,
    /// Probability of keeping an owned property
    #[arg(long)]
    rho: Option<f64>,
    /// Probability of switching on a non-owned property
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    outer_folds: Option<usize>,
    #[arg(long)]
    inner_folds: Option<usize>,
    /// Comma-separated depths, `unbounded` allowed
    #[arg(long)]
    tree_depths: Option<String>,
    /// Comma-separated k values
    #[arg(long)]
    knn_k: Option<String>,
    /// jaccard or hamming
    #[arg(long)]
    distance: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a schema file and add it to the corpus
    Ingest {
        path: PathBuf,
        /// Corpus name (default: file stem)
        #[arg(long)]
        name: Option<String>,
        /// auto, json, csv or ntriples
        #[arg(long, default_value = "auto")]
        input: String,
    },
    /// Entity/property counts and incidence density
    Stats {
        #[command(flatten)]
        source: Source,
    },
    /// Per-entity and per-schema focus metrics
    Report {
        #[command(flatten)]
        source: Source,
    },
    /// Rank entity types by one metric
    RankEntities {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        metric: String,
        /// Keep only the first N entries
        #[arg(long)]
        top_k: Option<usize>,
        #[command(flatten)]
        flags: RankFlags,
    },
    /// Rank all corpus schemas by Focus(K)
    RankSchemas,
    /// Tags from the top entity types by Focus(e)
    Tag {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Export the formal context (cxt or csv)
    ExportFca {
        #[command(flatten)]
        source: Source,
    },
    /// Entity type recognition with nested cross-validation
    Etr {
        #[command(flatten)]
        source: Source,
        /// tree, knn or both
        #[arg(long, default_value = "both")]
        model: String,
        #[command(flatten)]
        flags: EtrFlags,
    },
    /// Top-k accuracy of every ranker against reference rankings
    Compare {
        /// Reference files, or directories of *.json reference files
        #[arg(long, required = true, num_args = 1..)]
        refs: Vec<PathBuf>,
        #[arg(long)]
        top_k: Option<usize>,
        #[command(flatten)]
        flags: RankFlags,
    },
    /// Spearman correlation between Focus(K) and ETR accuracy
    Correlate {
        /// JSON output of earlier `etr --format json` runs; otherwise ETR is run
        #[arg(long, num_args = 1..)]
        reports: Vec<PathBuf>,
        #[command(flatten)]
        flags: EtrFlags,
    },
}

struct Context {
    config: RunConfig,
    format_flag: Option<String>,
    warnings: Vec<String>,
}

/// Runs the CLI. Results go to `stdout` (or `--out`) only on success;
/// diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    let out_path = cli.out.clone();
    let mut ctx = Context {
        config: RunConfig::from_env(),
        format_flag: cli.format.clone(),
        warnings: Vec::new(),
    };
    let result = prepare(&mut ctx, &cli).and_then(|()| execute(&mut ctx, cli.command));
    for w in &ctx.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    match result {
        Ok(text) => {
            let written = match out_path {
                Some(p) => {
                    std::fs::write(&p, text.as_bytes()).map_err(|e| Error::io(format!("writing {}", p.display()), e))
                }
                None => stdout
                    .write_all(text.as_bytes())
                    .map_err(|e| Error::io("writing stdout", e)),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn prepare(ctx: &mut Context, cli: &Cli) -> Result<()> {
    if let Some(path) = &cli.config {
        ctx.config.apply_file(path)?;
    }
    if let Some(root) = &cli.corpus {
        ctx.config.corpus = root.clone();
    }
    if cli.inherit {
        ctx.config.inherit = true;
    }
    if !matches!(cli.command, Command::ExportFca { .. }) {
        if let Some(f) = &cli.format {
            ctx.config.apply("format", f)?;
        }
    }
    Ok(())
}

fn apply_rank_flags(config: &mut RunConfig, f: &RankFlags) -> Result<()> {
    let pairs = [
        ("k1", f.k1),
        ("b", f.b),
        ("cmm_exact", f.cmm_exact),
        ("cmm_partial", f.cmm_partial),
        ("dem_properties", f.dem_properties),
        ("dem_subclasses", f.dem_subclasses),
        ("dem_superclasses", f.dem_superclasses),
        ("dem_siblings", f.dem_siblings),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            config.apply(key, &v.to_string())?;
        }
    }
    if let Some(q) = &f.query {
        config.apply("query", q)?;
    }
    Ok(())
}

fn apply_etr_flags(config: &mut RunConfig, f: &EtrFlags) -> Result<()> {
    let mut pairs: Vec<(&str, String)> = Vec::new();
    if let Some(v) = f.seed {
        pairs.push(("seed", v.to_string()));
    }
    if let Some(v) = f.n {
        pairs.push(("n", v.to_string()));
    }
    if let Some(v) = f.rho {
        pairs.push(("rho", v.to_string()));
    }
    if let Some(v) = f.eta {
        pairs.push(("eta", v.to_string()));
    }
    if let Some(v) = f.outer_folds {
        pairs.push(("outer_folds", v.to_string()));
    }
    if let Some(v) = f.inner_folds {
        pairs.push(("inner_folds", v.to_string()));
    }
    if let Some(v) = &f.tree_depths {
        pairs.push(("tree_depths", v.clone()));
    }
    if let Some(v) = &f.knn_k {
        pairs.push(("knn_k", v.clone()));
    }
    if let Some(v) = &f.distance {
        pairs.push(("distance", v.clone()));
    }
    for (k, v) in pairs {
        config.apply(k, &v)?;
    }
    Ok(())
}

/// Reads a schema file, choosing the parser from `input` or, for `auto`,
/// from the extension (`.nt`/`.ntriples`) and content.
pub fn read_schema_file(path: &Path, name: Option<&str>, input: &str) -> Result<Validated> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "schema".to_string());
    let name = name.map(str::to_string).unwrap_or(stem);
    let ext = path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase());
    let kind = match input {
        "auto" => match ext.as_deref() {
            Some("nt" | "ntriples") => "ntriples",
            _ => "canonical",
        },
        other => other,
    };
    let mut v = match kind {
        "ntriples" => schema::parse_ntriples_vocab(&bytes, &name)?,
        "json" => schema::parse_json(&bytes)?,
        "csv" => schema::parse_incidence_csv(&bytes, &name)?,
        "canonical" => schema::parse_canonical(&bytes, &name)?,
        other => {
            return Err(Error::Config(format!(
                "unknown input format `{other}` (expected auto|json|csv|ntriples)"
            )))
        }
    };
    v.schema = v.schema.with_name(name);
    Ok(v)
}

impl Context {
    fn corpus(&self) -> Result<Corpus> {
        Corpus::open(&self.config.corpus)
    }

    fn prepare_schema(&self, s: Schema) -> Schema {
        if self.config.inherit {
            s.inherit_properties()
        } else {
            s
        }
    }

    fn one_schema(&mut self, source: &Source) -> Result<Schema> {
        let s = match (&source.schema, &source.file) {
            (_, Some(path)) => {
                let v = read_schema_file(path, None, "auto")?;
                self.warnings.extend(v.warnings);
                v.schema
            }
            (Some(name), None) => self.corpus()?.load(name)?,
            (None, None) => return Err(Error::Config("one of --schema or --file is required".into())),
        };
        Ok(self.prepare_schema(s))
    }

    /// The selected schema, or every corpus schema when none is selected.
    fn schemas_or_all(&mut self, source: &Source) -> Result<Vec<Schema>> {
        if source.schema.is_some() || source.file.is_some() {
            return Ok(vec![self.one_schema(source)?]);
        }
        let corpus = self.corpus()?;
        Ok(corpus.load_all()?.into_iter().map(|s| self.prepare_schema(s)).collect())
    }

    fn json(&self) -> bool {
        self.config.format == OutputFormat::Json
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializes");
    s.push('\n');
    s
}

fn csv_text(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn models(choice: &str) -> Result<Vec<ModelKind>> {
    match choice.to_ascii_lowercase().as_str() {
        "both" => Ok(vec![ModelKind::Tree, ModelKind::Knn]),
        other => Ok(vec![other.parse()?]),
    }
}

fn run_etr_all(config: &RunConfig, schemas: &[Schema], kinds: &[ModelKind]) -> Result<Vec<EtrReport>> {
    let generator = config.generator()?;
    let cv = config.cv()?;
    let mut reports = Vec::new();
    for s in schemas {
        for &kind in kinds {
            reports.push(etr::run_etr(s, kind, generator, &cv)?);
        }
    }
    Ok(reports)
}

fn reference_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(format!("listing {}", p.display()), e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn execute(ctx: &mut Context, command: Command) -> Result<String> {
    match command {
        Command::Ingest { path, name, input } => {
            let v = read_schema_file(&path, name.as_deref(), &input)?;
            ctx.warnings.extend(v.warnings);
            let mut corpus = Corpus::create(&ctx.config.corpus)?;
            let entry = corpus.add(&v.schema)?;
            let st = v.schema.stats();
            Ok(if ctx.json() {
                to_json(&serde_json::json!({
                    "name": entry.name, "file": entry.file, "hash": entry.hash,
                    "entity_types": st.entity_types, "properties": st.properties,
                }))
            } else {
                csv_text(vec![
                    vec![
                        "name".into(),
                        "file".into(),
                        "hash".into(),
                        "entity_types".into(),
                        "properties".into(),
                    ],
                    vec![
                        entry.name,
                        entry.file,
                        entry.hash,
                        st.entity_types.to_string(),
                        st.properties.to_string(),
                    ],
                ])
            })
        }
        Command::Stats { source } => {
            let schemas = ctx.schemas_or_all(&source)?;
            #[derive(Serialize)]
            struct Row<'a> {
                schema: &'a str,
                #[serde(flatten)]
                stats: schema::SchemaStats,
            }
            let stats: Vec<_> = schemas.iter().map(|s| (s.name(), s.stats())).collect();
            Ok(if ctx.json() {
                to_json(
                    &stats
                        .iter()
                        .map(|(n, s)| Row { schema: n, stats: *s })
                        .collect::<Vec<_>>(),
                )
            } else {
                let mut rows = vec![["schema", "entity_types", "properties", "incidences", "density"]
                    .map(String::from)
                    .to_vec()];
                for (n, s) in stats {
                    rows.push(vec![
                        n.to_string(),
                        s.entity_types.to_string(),
                        s.properties.to_string(),
                        s.incidences.to_string(),
                        fmt6(s.density),
                    ]);
                }
                csv_text(rows)
            })
        }
        Command::Report { source } => {
            let report = match (&source.schema, &source.file) {
                (Some(name), None) => ctx.corpus()?.metric_report(name, ctx.config.inherit)?,
                _ => metrics::metric_report(&ctx.one_schema(&source)?),
            };
            ctx.warnings.extend(report.undefined.iter().cloned());
            Ok(if ctx.json() { report.to_json() } else { report.to_csv() })
        }
        Command::RankEntities {
            source,
            metric,
            top_k,
            flags,
        } => {
            apply_rank_flags(&mut ctx.config, &flags)?;
            if let Some(k) = top_k {
                ctx.config.apply("top_k", &k.to_string())?;
            }
            let metric: Metric = metric.parse()?;
            let s = ctx.one_schema(&source)?;
            let mut list = ranking::rank_entity_types(&s, metric, &ctx.config.rank_params());
            if top_k.is_some() {
                list = list.truncated(ctx.config.top_k);
            }
            Ok(if ctx.json() { list.to_json() } else { list.to_csv() })
        }
        Command::RankSchemas => {
            let schemas: Vec<Schema> = ctx
                .corpus()?
                .load_all()?
                .into_iter()
                .map(|s| ctx.prepare_schema(s))
                .collect();
            let ranks = ranking::rank_schemas(&schemas);
            Ok(if ctx.json() {
                to_json(&ranks)
            } else {
                ranking::schema_ranks_csv(&ranks)
            })
        }
        Command::Tag { source, k } => {
            if k == 0 {
                return Err(Error::Config("--k must be at least 1".into()));
            }
            let s = ctx.one_schema(&source)?;
            let tags = ranking::derive_schema_tags(&s, k);
            Ok(if ctx.json() {
                to_json(&serde_json::json!({ "schema": s.name(), "tags": tags }))
            } else {
                let mut rows = vec![vec!["rank".to_string(), "tag".to_string()]];
                rows.extend(tags.into_iter().enumerate().map(|(i, t)| vec![(i + 1).to_string(), t]));
                csv_text(rows)
            })
        }
        Command::ExportFca { source } => {
            let s = ctx.one_schema(&source)?;
            let context = FormalContext::from_schema(&s);
            match ctx.format_flag.as_deref().unwrap_or("cxt") {
                "cxt" => context.to_cxt(),
                "csv" => Ok(context.to_csv()),
                other => Err(Error::Config(format!(
                    "export-fca --format must be cxt or csv, got `{other}`"
                ))),
            }
        }
        Command::Etr { source, model, flags } => {
            apply_etr_flags(&mut ctx.config, &flags)?;
            let kinds = models(&model)?;
            ctx.config.require_seed()?;
            let schemas = ctx.schemas_or_all(&source)?;
            let reports = run_etr_all(&ctx.config, &schemas, &kinds)?;
            for r in &reports {
                ctx.warnings
                    .extend(r.warnings.iter().map(|w| format!("{} ({}): {w}", r.schema, r.model)));
            }
            Ok(if ctx.json() {
                to_json(&reports)
            } else {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(ETR_CSV_HEADER).expect("in-memory write");
                for r in &reports {
                    r.write_csv_rows(&mut w).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
            })
        }
        Command::Compare { refs, top_k, flags } => {
            apply_rank_flags(&mut ctx.config, &flags)?;
            if let Some(k) = top_k {
                ctx.config.apply("top_k", &k.to_string())?;
            }
            let mut references = Vec::new();
            for path in reference_files(&refs)? {
                let bytes = std::fs::read(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
                references.push(ReferenceRanking::parse(&bytes)?);
            }
            let schemas: Vec<Schema> = ctx
                .corpus()?
                .load_all()?
                .into_iter()
                .map(|s| ctx.prepare_schema(s))
                .collect();
            let table = ranking::compare_rankers(&schemas, &references, ctx.config.top_k, &ctx.config.rank_params())?;
            ctx.warnings
                .extend(table.skipped.iter().map(|(s, why)| format!("skipped `{s}`: {why}")));
            Ok(if ctx.json() { to_json(&table) } else { table.to_csv() })
        }
        Command::Correlate { reports, flags } => {
            apply_etr_flags(&mut ctx.config, &flags)?;
            let corpus = ctx.corpus()?;
            let etr_reports: Vec<EtrReport> = if reports.is_empty() {
                ctx.config.require_seed()?;
                let schemas: Vec<Schema> = corpus.load_all()?.into_iter().map(|s| ctx.prepare_schema(s)).collect();
                run_etr_all(&ctx.config, &schemas, &[ModelKind::Tree, ModelKind::Knn])?
            } else {
                let mut all = Vec::new();
                for p in &reports {
                    let bytes = std::fs::read(p).map_err(|e| Error::io(format!("reading {}", p.display()), e))?;
                    let mut batch: Vec<EtrReport> = serde_json::from_slice(&bytes)?;
                    all.append(&mut batch);
                }
                all
            };
            let mut points = Vec::new();
            for r in etr_reports {
                let s = ctx.prepare_schema(corpus.load(&r.schema)?);
                points.push((metrics::focus_k(&s), r));
            }
            let correlations = focus_accuracy_correlation(&points);
            for c in &correlations {
                if c.rho.is_none() {
                    ctx.warnings.push(format!(
                        "Spearman correlation for {} is undefined ({} points)",
                        c.model, c.points
                    ));
                }
            }
            Ok(if ctx.json() {
                #[derive(Serialize)]
                struct Point<'a> {
                    schema: &'a str,
                    model: ModelKind,
                    focus_k: f64,
                    mean_accuracy: f64,
                }
                let pts: Vec<Point> = points
                    .iter()
                    .map(|(f, r)| Point {
                        schema: &r.schema,
                        model: r.model,
                        focus_k: *f,
                        mean_accuracy: r.mean_accuracy,
                    })
                    .collect();
                to_json(&serde_json::json!({ "points": pts, "correlations": correlations }))
            } else {
                let mut rows = vec![["model", "points", "spearman"].map(String::from).to_vec()];
                for c in correlations {
                    rows.push(vec![
                        c.model.to_string(),
                        c.points.to_string(),
                        c.rho.map(fmt6).unwrap_or_else(|| "NA".into()),
                    ]);
                }
                csv_text(rows)
            })
        }
    }
}
