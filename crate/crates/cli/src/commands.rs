//! Subcommand bodies. Each returns the text it would print.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isf_core::categorize::{CategoryAssignment, Classifier};
use isf_core::crawler::{crawl_loop, parse_seeds, CrawlContext, RecordStore};
use isf_core::evaluation::{emit_report, evaluate, parse_qrels, parse_run};
use isf_core::index::SourceTag;
use isf_core::personalization::{init_profile, record_visit};
use isf_core::pipeline::{build_crawl_index, Pipeline, PipelineConfig, SearchRequest, SearchResponse};
use isf_core::taxonomy::Taxonomy;

pub fn parse_sources(list: &str) -> Result<BTreeSet<SourceTag>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<SourceTag>().map_err(anyhow::Error::from))
        .collect()
}

pub fn parse_topic_weight(s: &str) -> Result<(String, i64)> {
    let (path, w) = s.rsplit_once('=').unwrap_or((s, "0"));
    let w = w.trim().parse::<i64>().with_context(|| format!("bad weight in {s:?}"))?;
    Ok((path.trim().to_string(), w))
}

pub struct CrawlArgs {
    pub seeds: PathBuf,
    pub db: PathBuf,
    pub rdb: PathBuf,
    pub filter: bool,
}

pub async fn crawl(cfg: &PipelineConfig, args: &CrawlArgs) -> Result<String> {
    let text = std::fs::read_to_string(&args.seeds).with_context(|| format!("reading {}", args.seeds.display()))?;
    let seeds = parse_seeds(&text);
    let mut crawl = cfg.crawl.clone();
    crawl.seeds = seeds.urls.iter().map(|u| u.to_string()).collect();
    if crawl.budget < crawl.seeds.len() {
        crawl.budget = crawl.seeds.len();
    }
    let classifier = if args.filter {
        let tax = Taxonomy::load(&cfg.taxonomy, cfg.pages.as_deref())?;
        Some(Classifier::build(&tax, cfg.voting)?)
    } else {
        None
    };
    let mut db = RecordStore::open(&args.db)?;
    let mut rdb = RecordStore::open(&args.rdb)?;
    let ctx = CrawlContext {
        db: &mut db,
        rdb: &mut rdb,
        classifier: classifier.as_ref(),
    };
    let report = crawl_loop(&crawl, ctx).await?;
    let mut out = String::new();
    for w in seeds.warnings.iter().chain(&report.warnings) {
        writeln!(out, "warning: {w}")?;
    }
    for e in &report.log {
        writeln!(
            out,
            "{}\t{:.6}\t{}\t{}\t{}",
            e.round,
            e.priority,
            e.status,
            if e.relevant { "kept" } else { "-" },
            e.url
        )?;
    }
    writeln!(
        out,
        "fetched {} kept {} pruned {} rounds {} stop {:?}",
        report.fetched, report.kept, report.pruned, report.rounds, report.stop
    )?;
    Ok(out)
}

pub fn index(cfg: &PipelineConfig, input: &Path) -> Result<String> {
    let idx = build_crawl_index(input, &cfg.index)?;
    Ok(format!("indexed {} documents into {}\n", idx.len(), cfg.index.display()))
}

pub async fn search(pipeline: &Pipeline, req: &SearchRequest, json: bool) -> Result<String> {
    let resp = pipeline.run(req).await?;
    if json {
        return Ok(resp.to_json() + "\n");
    }
    Ok(format_results(&resp))
}

pub fn format_results(resp: &SearchResponse) -> String {
    let mut out = String::new();
    if resp.executed != resp.query {
        let _ = writeln!(out, "expanded: {}", resp.executed);
    }
    for f in &resp.flags.backend_failures {
        let _ = writeln!(out, "warning: backend {} failed: {}", f.backend, f.message);
    }
    for w in &resp.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for (i, e) in resp.entries.iter().enumerate() {
        let _ = writeln!(out, "{:>2}. {:.4}  {}  [{}]", i + 1, e.score, e.title, e.category);
        let _ = writeln!(out, "    {}", e.url);
    }
    if resp.entries.is_empty() {
        out.push_str("no results\n");
    }
    out
}

pub async fn categorize(pipeline: &Pipeline, req: &SearchRequest) -> Result<String> {
    let resp = pipeline.run(req).await?;
    let mut out = String::from("url\tprimary\tsecondary\tcluster\tscore\n");
    for e in &resp.entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}",
            e.url,
            e.category,
            e.secondary.as_deref().unwrap_or("-"),
            e.cluster.as_deref().unwrap_or("-"),
            e.score
        )?;
    }
    Ok(out)
}

pub async fn cluster(pipeline: &Pipeline, req: &SearchRequest) -> Result<String> {
    let resp = pipeline.run(req).await?;
    let mut out = String::new();
    if resp.flags.unconverged {
        out.push_str("warning: k-means did not converge\n");
    }
    for s in &resp.flags.flagged_seeds {
        writeln!(out, "warning: seed for {s} had no similar result")?;
    }
    for c in &resp.clusters {
        writeln!(out, "{} ({})", c.label, c.size)?;
        for e in resp.entries.iter().filter(|e| e.cluster.as_deref() == Some(c.label.as_str())) {
            writeln!(out, "  {}  {}", e.url, e.title)?;
        }
    }
    Ok(out)
}

pub fn profile_init(pipeline: &Pipeline, user: &str, topics: &[(String, i64)]) -> Result<String> {
    let p = init_profile(user, topics, pipeline.taxonomy())?;
    let p = pipeline.profiles().put(p)?;
    Ok(serde_json::to_string_pretty(&*p)? + "\n")
}

pub fn profile_show(pipeline: &Pipeline, user: &str) -> Result<String> {
    match pipeline.profiles().get(user)? {
        Some(p) => Ok(serde_json::to_string_pretty(&*p)? + "\n"),
        None => bail!("no profile for user {user:?}"),
    }
}

pub fn profile_visit(pipeline: &Pipeline, user: &str, category: &str, secondary: Option<&str>) -> Result<String> {
    let tax = pipeline.taxonomy();
    for c in std::iter::once(category).chain(secondary) {
        if !tax.contains(c) {
            bail!("unknown category: {c}");
        }
    }
    let assignment = CategoryAssignment {
        result: String::new(),
        primary: category.to_string(),
        secondary: secondary.map(String::from),
        neighbors: Vec::new(),
    };
    let (p, outcome) = pipeline.profiles().update(user, |p| record_visit(p, &assignment, tax))?;
    Ok(format!("{}\n{}\n", serde_json::to_string(&outcome)?, serde_json::to_string_pretty(&*p)?))
}

pub fn evaluate_files(run: &Path, qrels: &Path, out: &Path) -> Result<String> {
    let run_text = std::fs::read_to_string(run).with_context(|| format!("reading {}", run.display()))?;
    let qrels_text = std::fs::read_to_string(qrels).with_context(|| format!("reading {}", qrels.display()))?;
    let run = parse_run(&run_text, &run.display().to_string())?;
    let qrels = parse_qrels(&qrels_text, &qrels.display().to_string())?;
    let report = evaluate(&run, &qrels)?;
    let files = emit_report(&report, out)?;
    let mut s = String::new();
    for w in &report.warnings {
        writeln!(s, "warning: {w}")?;
    }
    writeln!(s, "queries\t{}", report.n)?;
    writeln!(s, "P@5\t{:.4}", report.p5)?;
    writeln!(s, "P@10\t{:.4}", report.p10)?;
    writeln!(s, "11pt\t{:.4}", report.overall)?;
    for f in files {
        writeln!(s, "wrote {}", f.display())?;
    }
    Ok(s)
}
