use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::metrics::{aggregate_judgments, EvalReport, PrCurve, Relevance, Verdict, RECALL_LEVELS};
use crate::error::{Error, Result};

/// Judgments as `query → url → [(judge, verdict)]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    pub judgments: BTreeMap<String, BTreeMap<String, Vec<(String, Verdict)>>>,
}

impl Qrels {
    pub(crate) fn relevance(&self) -> Result<Relevance> {
        self.judgments
            .iter()
            .map(|(q, items)| {
                let judged = items
                    .iter()
                    .map(|(u, vs)| {
                        let v: Vec<Verdict> = vs.iter().map(|x| x.1).collect();
                        Ok((u.clone(), aggregate_judgments(&v)?))
                    })
                    .collect::<Result<_>>()?;
                Ok((q.clone(), judged))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub rank: usize,
    pub url: String,
    pub score: f64,
}

/// Ranked results per query, ordered by rank.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    pub queries: BTreeMap<String, Vec<RunEntry>>,
}

fn fields<'a>(source: &str, line_no: usize, line: &'a str, n: usize) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split('\t').map(str::trim).collect();
    if f.len() != n {
        return Err(Error::parse(source, line_no, format!("expected {n} tab-separated fields, found {}", f.len())));
    }
    Ok(f)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// `query_id<TAB>result_url<TAB>judge_id<TAB>R|N` lines.
pub fn parse_qrels(text: &str, source: &str) -> Result<Qrels> {
    let mut q = Qrels::default();
    for (no, line) in content_lines(text) {
        let f = fields(source, no, line, 4)?;
        let v = match f[3] {
            "R" | "r" => Verdict::Relevant,
            "N" | "n" => Verdict::NotRelevant,
            other => return Err(Error::parse(source, no, format!("verdict must be R or N, found {other:?}"))),
        };
        q.judgments
            .entry(f[0].to_string())
            .or_default()
            .entry(f[1].to_string())
            .or_default()
            .push((f[2].to_string(), v));
    }
    Ok(q)
}

/// `query_id<TAB>rank<TAB>result_url<TAB>score` lines.
pub fn parse_run(text: &str, source: &str) -> Result<Run> {
    let mut run = Run::default();
    for (no, line) in content_lines(text) {
        let f = fields(source, no, line, 4)?;
        let rank: usize = f[1]
            .parse()
            .map_err(|_| Error::parse(source, no, format!("bad rank {:?}", f[1])))?;
        let score: f64 = f[3]
            .parse()
            .map_err(|_| Error::parse(source, no, format!("bad score {:?}", f[3])))?;
        run.queries.entry(f[0].to_string()).or_default().push(RunEntry {
            rank,
            url: f[2].to_string(),
            score,
        });
    }
    for entries in run.queries.values_mut() {
        entries.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| a.url.cmp(&b.url)));
    }
    Ok(run)
}

fn curve_cells(c: &PrCurve) -> String {
    c.0.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>().join("\t")
}

/// Writes `per_query.tsv`, `aggregate.tsv` and `curve.tsv` under `dir`.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let levels: Vec<String> = (0..RECALL_LEVELS).map(|j| format!("p@r{:.1}", PrCurve::level(j))).collect();

    let mut per_query = format!("query\trelevant\tretrieved\tp5\tp10\tavg\t{}\n", levels.join("\t"));
    for q in &report.queries {
        let _ = writeln!(
            per_query,
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}",
            q.query,
            q.relevant,
            q.retrieved,
            q.p5,
            q.p10,
            q.curve.mean(),
            curve_cells(&q.curve)
        );
    }

    let mut aggregate = String::from("queries\tp5\tp10\toverall\tp5_pct\tp10_pct\toverall_pct\n");
    let _ = writeln!(
        aggregate,
        "{}\t{:.4}\t{:.4}\t{:.4}\t{:.1}\t{:.1}\t{:.1}",
        report.n,
        report.p5,
        report.p10,
        report.overall,
        report.p5 * 100.0,
        report.p10 * 100.0,
        report.overall * 100.0
    );

    let mut curve = String::from("recall\tprecision\tprecision_pct\n");
    for (j, p) in report.curve.0.iter().enumerate() {
        let _ = writeln!(curve, "{:.1}\t{:.4}\t{:.1}", PrCurve::level(j), p, p * 100.0);
    }

    let mut written = Vec::new();
    for (name, body) in [("per_query.tsv", per_query), ("aggregate.tsv", aggregate), ("curve.tsv", curve)] {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
