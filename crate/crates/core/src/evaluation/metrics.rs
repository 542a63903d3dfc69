use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::files::{Qrels, Run};
use crate::error::{Error, Result};

pub const RECALL_LEVELS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Relevant,
    NotRelevant,
}

/// Strict majority of judges; an exact tie is not relevant.
pub fn aggregate_judgments(verdicts: &[Verdict]) -> Result<bool> {
    if verdicts.is_empty() {
        return Err(Error::NoVerdicts);
    }
    let yes = verdicts.iter().filter(|v| **v == Verdict::Relevant).count();
    Ok(2 * yes > verdicts.len())
}

/// Relevant items among the first `cutoff`, over `cutoff`.
pub fn precision_at<S: AsRef<str>>(ranked: &[S], relevant: &BTreeSet<String>, cutoff: usize) -> f64 {
    assert!(cutoff >= 1, "cutoff must be at least 1");
    let hits = ranked.iter().take(cutoff).filter(|u| relevant.contains(u.as_ref())).count();
    hits as f64 / cutoff as f64
}

/// `(recall, precision)` at every rank holding a relevant item.
pub fn recall_precision_points<S: AsRef<str>>(
    ranked: &[S],
    relevant: &BTreeSet<String>,
    total_relevant: usize,
) -> Result<Vec<(f64, f64)>> {
    if total_relevant == 0 {
        return Err(Error::NoRelevantJudged);
    }
    let mut seen = 0usize;
    let mut out = Vec::new();
    for (i, u) in ranked.iter().enumerate() {
        if relevant.contains(u.as_ref()) {
            seen += 1;
            out.push((seen as f64 / total_relevant as f64, seen as f64 / (i + 1) as f64));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrCurve(pub [f64; RECALL_LEVELS]);

impl PrCurve {
    pub fn level(j: usize) -> f64 {
        j as f64 / 10.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / RECALL_LEVELS as f64
    }
}

/// Precision at level j is the best precision at any recall ≥ j/10.
pub fn interpolate_11pt(points: &[(f64, f64)]) -> PrCurve {
    let mut curve = [0.0; RECALL_LEVELS];
    for (j, slot) in curve.iter_mut().enumerate() {
        let level = PrCurve::level(j);
        *slot = points
            .iter()
            .filter(|(r, _)| *r >= level - 1e-12)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
    }
    PrCurve(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEval {
    pub query: String,
    pub p5: f64,
    pub p10: f64,
    pub curve: PrCurve,
    pub relevant: usize,
    pub retrieved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub queries: Vec<QueryEval>,
    pub curve: PrCurve,
    pub p5: f64,
    pub p10: f64,
    /// Mean of the macro curve.
    pub overall: f64,
    pub n: usize,
    pub warnings: Vec<String>,
}

pub fn evaluate_query<S: AsRef<str>>(query: &str, ranked: &[S], relevant: &BTreeSet<String>) -> Result<QueryEval> {
    let points = recall_precision_points(ranked, relevant, relevant.len())?;
    Ok(QueryEval {
        query: query.to_string(),
        p5: precision_at(ranked, relevant, 5),
        p10: precision_at(ranked, relevant, 10),
        curve: interpolate_11pt(&points),
        relevant: relevant.len(),
        retrieved: ranked.len(),
    })
}

/// Per-level and P@k means over queries; the result lists queries sorted by
/// id.
pub fn macro_average(mut queries: Vec<QueryEval>) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(Error::NoQueries);
    }
    queries.sort_by(|a, b| a.query.cmp(&b.query));
    let n = queries.len() as f64;
    let mut curve = [0.0; RECALL_LEVELS];
    for (j, slot) in curve.iter_mut().enumerate() {
        *slot = queries.iter().map(|q| q.curve.0[j]).sum::<f64>() / n;
    }
    let curve = PrCurve(curve);
    Ok(EvalReport {
        p5: queries.iter().map(|q| q.p5).sum::<f64>() / n,
        p10: queries.iter().map(|q| q.p10).sum::<f64>() / n,
        overall: curve.mean(),
        curve,
        n: queries.len(),
        queries,
        warnings: Vec::new(),
    })
}

/// Scores a run against pooled judgments. Queries with no relevant item in
/// the pool are skipped with a warning; judged queries missing from the run
/// score as empty lists.
pub fn evaluate(run: &Run, qrels: &Qrels) -> Result<EvalReport> {
    let relevance = qrels.relevance()?;
    let mut warnings = Vec::new();
    let mut evals = Vec::new();
    let ids: BTreeSet<&str> = relevance.keys().chain(run.queries.keys()).map(String::as_str).collect();
    let empty = Vec::new();
    for q in ids {
        let Some(judged) = relevance.get(q) else {
            warnings.push(format!("query {q}: no judgments"));
            continue;
        };
        let relevant: BTreeSet<String> = judged.iter().filter(|(_, r)| **r).map(|(u, _)| u.clone()).collect();
        if relevant.is_empty() {
            warnings.push(format!("query {q}: no relevant items judged"));
            continue;
        }
        let ranked: Vec<&str> = run
            .queries
            .get(q)
            .unwrap_or(&empty)
            .iter()
            .map(|e| e.url.as_str())
            .collect();
        evals.push(evaluate_query(q, &ranked, &relevant)?);
    }
    let mut report = macro_average(evals)?;
    report.warnings = warnings;
    Ok(report)
}

/// Judged relevance per query and URL.
pub(crate) type Relevance = BTreeMap<String, BTreeMap<String, bool>>;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Verdict::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn judge_majority() {
        assert!(aggregate_judgments(&[Relevant, Relevant, NotRelevant]).unwrap());
        assert!(!aggregate_judgments(&[Relevant, NotRelevant]).unwrap());
        assert!(matches!(aggregate_judgments(&[]), Err(Error::NoVerdicts)));
    }

    #[test]
    fn five_judges_tally() {
        // rows: R count out of 5 -> expected
        let table = [(5, true), (4, true), (3, true), (2, false), (1, false), (0, false), (3, true), (2, false), (4, true), (1, false)];
        for (yes, expected) in table {
            let v: Vec<Verdict> = (0..5).map(|i| if i < yes { Relevant } else { NotRelevant }).collect();
            assert_eq!(aggregate_judgments(&v).unwrap(), expected, "{yes}");
        }
    }

    #[test]
    fn precision_examples() {
        let list: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
        let rel = set(&["d0", "d1", "d2", "d4", "d5", "d7", "d9"]);
        assert!((precision_at(&list, &rel, 10) - 0.7).abs() < 1e-12);
        assert_eq!(precision_at(&list[..5], &set(&["d0", "d1", "d2", "d3", "d4"]), 5), 1.0);
        assert!((precision_at(&["a", "b", "c"], &set(&["a", "c"]), 10) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn ranks_one_and_three() {
        let rel = set(&["a", "c"]);
        let pts = recall_precision_points(&["a", "b", "c"], &rel, 2).unwrap();
        assert_eq!(pts[0], (0.5, 1.0));
        assert!((pts[1].0 - 1.0).abs() < 1e-12 && (pts[1].1 - 2.0 / 3.0).abs() < 1e-12);
        let c = interpolate_11pt(&pts);
        for j in 0..=5 {
            assert_eq!(c.0[j], 1.0);
        }
        for j in 6..=10 {
            assert!((c.0[j] - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_and_empty() {
        let rel = set(&["a", "b", "c"]);
        let pts = recall_precision_points(&["a", "b", "c"], &rel, 3).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|p| p.1 == 1.0));
        assert_eq!(interpolate_11pt(&pts).0, [1.0; 11]);
        assert!(recall_precision_points(&["x"], &rel, 3).unwrap().is_empty());
        assert_eq!(interpolate_11pt(&[]).0, [0.0; 11]);
        assert!(matches!(recall_precision_points(&["x"], &rel, 0), Err(Error::NoRelevantJudged)));
    }

    #[test]
    fn google_p5_row() {
        let evals: Vec<QueryEval> = [0.4, 0.2, 1.0, 0.2, 0.2]
            .iter()
            .enumerate()
            .map(|(i, &p5)| QueryEval {
                query: format!("q{i}"),
                p5,
                p10: 0.0,
                curve: PrCurve([0.0; 11]),
                relevant: 1,
                retrieved: 5,
            })
            .collect();
        let r = macro_average(evals).unwrap();
        assert!((r.p5 * 100.0 - 40.0).abs() < 1e-9);
    }

    #[test]
    fn no_queries() {
        assert!(matches!(macro_average(vec![]), Err(Error::NoQueries)));
    }

    fn brute(list: &[String], rel: &BTreeSet<String>, r: usize) -> Vec<(f64, f64)> {
        (0..list.len())
            .filter(|&i| rel.contains(&list[i]))
            .map(|i| {
                let seen = list[..=i].iter().filter(|u| rel.contains(*u)).count();
                (seen as f64 / r as f64, seen as f64 / (i + 1) as f64)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn metrics_match_recount(flags in proptest::collection::vec(any::<bool>(), 0..50), extra in 0usize..5, cutoff in 1usize..20) {
            let list: Vec<String> = (0..flags.len()).map(|i| format!("d{i}")).collect();
            let mut rel: BTreeSet<String> = list.iter().zip(&flags).filter(|(_, f)| **f).map(|(u, _)| u.clone()).collect();
            for i in 0..extra { rel.insert(format!("unretrieved{i}")); }
            let hits = (0..cutoff.min(list.len())).filter(|&i| flags[i]).count();
            prop_assert!((precision_at(&list, &rel, cutoff) - hits as f64 / cutoff as f64).abs() < 1e-12);
            if !rel.is_empty() {
                let pts = recall_precision_points(&list, &rel, rel.len()).unwrap();
                prop_assert_eq!(&pts, &brute(&list, &rel, rel.len()));
                let c = interpolate_11pt(&pts);
                prop_assert!(c.0.windows(2).all(|w| w[1] <= w[0]));
                prop_assert!(c.0.iter().all(|p| (0.0..=1.0).contains(p)));
                prop_assert_eq!(c.0[0], pts.iter().map(|p| p.1).fold(0.0, f64::max));
            }
        }

        #[test]
        fn macro_permutation_invariant(vals in proptest::collection::vec(proptest::array::uniform11(0.0f64..1.0), 1..8), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let evals: Vec<QueryEval> = vals.iter().enumerate().map(|(i, v)| {
                let mut c = *v;
                c.sort_by(|a, b| b.total_cmp(a));
                QueryEval { query: format!("q{i}"), p5: c[0], p10: c[1], curve: PrCurve(c), relevant: 1, retrieved: 1 }
            }).collect();
            let mut shuffled = evals.clone();
            shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
            let a = macro_average(evals).unwrap();
            let b = macro_average(shuffled).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!((a.overall - a.curve.0.iter().sum::<f64>() / 11.0).abs() < 1e-12);
        }
    }
}
