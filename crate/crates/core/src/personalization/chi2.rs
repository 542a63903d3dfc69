use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{is_under, Taxonomy};
use crate::text::{TokenStream, Tokenizer};

/// Chi-square value for one degree of freedom at 99.9% confidence.
pub const CHI2_CRITICAL: f64 = 10.83;
pub const DEFAULT_EXPANSION_CAP: usize = 5;

/// 2x2 counts: `tc` term and topic, `t_nc` term outside the topic, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub tc: f64,
    pub t_nc: f64,
    pub nt_c: f64,
    pub nt_nc: f64,
}

impl ContingencyTable {
    pub fn new(tc: f64, t_nc: f64, nt_c: f64, nt_nc: f64) -> Self {
        ContingencyTable { tc, t_nc, nt_c, nt_nc }
    }

    pub fn total(&self) -> f64 {
        self.tc + self.t_nc + self.nt_c + self.nt_nc
    }

    /// Cell probabilities in field order.
    pub fn probabilities(&self) -> [f64; 4] {
        let n = self.total();
        [self.tc / n, self.t_nc / n, self.nt_c / n, self.nt_nc / n]
    }

    pub fn smoothed(&self) -> Self {
        ContingencyTable::new(self.tc + 1.0, self.t_nc + 1.0, self.nt_c + 1.0, self.nt_nc + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2 {
    pub value: f64,
    /// A marginal was 0 or 1 and the value was forced to 0.
    pub degenerate: bool,
}

/// `N · (P(t,c)P(t̄,c̄) − P(t,c̄)P(t̄,c))² / (P(t)P(t̄)P(c)P(c̄))`.
pub fn chi_square(table: &ContingencyTable, n: f64) -> Chi2 {
    let [p11, p10, p01, p00] = table.probabilities();
    let pt = p11 + p10;
    let pc = p11 + p01;
    let denom = pt * (1.0 - pt) * pc * (1.0 - pc);
    if denom <= 0.0 || !denom.is_finite() {
        return Chi2 {
            value: 0.0,
            degenerate: true,
        };
    }
    let d = p11 * p00 - p10 * p01;
    Chi2 {
        value: n * d * d / denom,
        degenerate: false,
    }
}

/// Binary term occurrence over category-documents, grouped by profile topic.
#[derive(Debug, Clone, PartialEq)]
pub struct TermCategoryStats {
    topics: Vec<String>,
    units: usize,
    topic_units: HashMap<String, usize>,
    doc_freq: HashMap<String, usize>,
    joint: HashMap<String, HashMap<String, usize>>,
}

impl TermCategoryStats {
    /// One unit per category-document; a unit belongs to the profile topic
    /// above it, if any.
    pub fn build(taxonomy: &Taxonomy, tokenizer: &Tokenizer) -> Result<Self> {
        let topics: Vec<String> = taxonomy
            .effective_profile_topics()
            .into_iter()
            .map(|c| c.path.clone())
            .collect();
        let units = taxonomy
            .classification_targets(None)
            .into_iter()
            .map(|c| {
                let topic = topics.iter().find(|t| is_under(&c.path, t)).cloned();
                Ok((topic, tokenizer.tokenize(&taxonomy.category_text(&c.path)?)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_units(topics, units)
    }

    pub fn from_units(topics: Vec<String>, units: Vec<(Option<String>, TokenStream)>) -> Result<Self> {
        if units.is_empty() || topics.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut stats = TermCategoryStats {
            topics,
            units: units.len(),
            topic_units: HashMap::new(),
            doc_freq: HashMap::new(),
            joint: HashMap::new(),
        };
        for (topic, tokens) in units {
            let terms: BTreeSet<&str> = tokens.iter().collect();
            for t in &terms {
                *stats.doc_freq.entry(t.to_string()).or_default() += 1;
            }
            if let Some(topic) = topic {
                if !stats.topics.contains(&topic) {
                    return Err(Error::InvalidTopic(topic));
                }
                *stats.topic_units.entry(topic.clone()).or_default() += 1;
                let row = stats.joint.entry(topic).or_default();
                for t in terms {
                    *row.entry(t.to_string()).or_default() += 1;
                }
            }
        }
        Ok(stats)
    }

    pub fn topics(&self) -> &[String] {
        &self.topics
    }

    /// The multiplier in the statistic: the number of topics.
    pub fn n(&self) -> f64 {
        self.topics.len() as f64
    }

    pub fn units(&self) -> usize {
        self.units
    }

    /// Raw counts for `term` against `topic`.
    pub fn table(&self, term: &str, topic: &str) -> ContingencyTable {
        let df = self.doc_freq.get(term).copied().unwrap_or(0);
        let in_topic = self.topic_units.get(topic).copied().unwrap_or(0);
        let tc = self.joint.get(topic).and_then(|r| r.get(term)).copied().unwrap_or(0);
        ContingencyTable::new(
            tc as f64,
            (df - tc) as f64,
            (in_topic - tc) as f64,
            (self.units + tc - df - in_topic) as f64,
        )
    }

    /// Statistic over the add-one smoothed table.
    pub fn chi_square(&self, term: &str, topic: &str) -> Chi2 {
        chi_square(&self.table(term, topic).smoothed(), self.n())
    }

    /// Terms occurring in the topic's category-documents, sorted.
    pub fn topic_terms(&self, topic: &str) -> Vec<&str> {
        let mut v: Vec<&str> = self
            .joint
            .get(topic)
            .map(|r| r.keys().map(String::as_str).collect())
            .unwrap_or_default();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub query: String,
    pub added: Vec<(String, f64)>,
    pub no_expansion: bool,
}

/// Appends the topic's terms whose statistic exceeds the critical value, in
/// descending order, up to `cap`, skipping terms already in the query.
pub fn expand_query(
    query: &str,
    topic: &str,
    stats: &TermCategoryStats,
    tokenizer: &Tokenizer,
    cap: Option<usize>,
) -> Result<Expansion> {
    if !stats.topics.iter().any(|t| t == topic) {
        return Err(Error::InvalidTopic(topic.to_string()));
    }
    let present: BTreeSet<String> = tokenizer.tokenize(query).into_inner().into_iter().collect();
    let mut scored: Vec<(String, f64)> = stats
        .topic_terms(topic)
        .into_iter()
        .filter(|t| !present.contains(*t))
        .map(|t| (t.to_string(), stats.chi_square(t, topic).value))
        .filter(|(_, v)| *v > CHI2_CRITICAL)
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(cap.unwrap_or(usize::MAX));
    let mut expanded = query.trim().to_string();
    for (t, _) in &scored {
        expanded.push(' ');
        expanded.push_str(t);
    }
    Ok(Expansion {
        query: expanded,
        no_expansion: scored.is_empty(),
        added: scored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    #[test]
    fn hand_table() {
        let c = chi_square(&ContingencyTable::new(20.0, 30.0, 30.0, 20.0), 100.0);
        assert!((c.value - 4.0).abs() < 1e-9);
        assert!(!c.degenerate);
    }

    #[test]
    fn perfect_association_gives_n() {
        let c = chi_square(&ContingencyTable::new(5.0, 0.0, 0.0, 5.0), 37.0);
        assert!((c.value - 37.0).abs() < 1e-9);
    }

    #[test]
    fn independence_gives_zero() {
        // P(t)=0.3, P(c)=0.4
        let c = chi_square(&ContingencyTable::new(12.0, 18.0, 28.0, 42.0), 50.0);
        assert!(c.value.abs() <= 1e-9);
    }

    #[test]
    fn degenerate_marginal() {
        let c = chi_square(&ContingencyTable::new(3.0, 4.0, 0.0, 0.0), 10.0);
        assert_eq!(c, Chi2 { value: 0.0, degenerate: true });
    }

    fn unit(topic: Option<&str>, text: &str) -> (Option<String>, TokenStream) {
        (topic.map(String::from), tokenize(text))
    }

    /// 40 topics of 3 units each. In T0, "alpha", "beta" and "gamma" clear
    /// the critical value, "delta" falls just short; "common" is everywhere.
    fn fixture() -> TermCategoryStats {
        let topics: Vec<String> = (0..40).map(|i| format!("T{i}")).collect();
        let mut units = Vec::new();
        for i in 0..40 {
            let t = format!("T{i}");
            for j in 0..3 {
                let mut text = String::from("common");
                if i == 0 {
                    text.push_str(" alpha beta");
                    if j < 2 {
                        text.push_str(" gamma");
                    }
                    if j == 0 {
                        text.push_str(" delta");
                    }
                } else if i == 1 && j == 0 {
                    text.push_str(" beta");
                }
                units.push(unit(Some(&t), &text));
            }
        }
        TermCategoryStats::from_units(topics, units).unwrap()
    }

    #[test]
    fn stats_cells_sum_to_one() {
        let s = fixture();
        for term in ["alpha", "beta", "gamma", "common", "missing"] {
            for topic in ["T0", "T1", "T5"] {
                let p = s.table(term, topic).smoothed().probabilities();
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn expansion_ranked_and_capped() {
        let s = fixture();
        let tk = Tokenizer::default();
        let oracle = |t: &str| chi_square(&s.table(t, "T0").smoothed(), 40.0).value;
        let mut qualifying: Vec<(&str, f64)> =
            ["alpha", "beta", "gamma", "delta", "common"].iter().map(|t| (*t, oracle(t))).filter(|x| x.1 > CHI2_CRITICAL).collect();
        qualifying.sort_by(|a, b| b.1.total_cmp(&a.1));
        assert_eq!(qualifying.len(), 3, "{qualifying:?}");
        let e = expand_query("search", "T0", &s, &tk, Some(2)).unwrap();
        assert_eq!(e.added.iter().map(|a| a.0.as_str()).collect::<Vec<_>>(), [qualifying[0].0, qualifying[1].0]);
        assert_eq!(e.query, format!("search {} {}", qualifying[0].0, qualifying[1].0));
        assert!(!e.no_expansion);
    }

    #[test]
    fn query_terms_not_duplicated() {
        let s = fixture();
        let e = expand_query("alpha", "T0", &s, &Tokenizer::default(), None).unwrap();
        assert!(e.added.iter().all(|a| a.0 != "alpha"));
        assert!(e.query.starts_with("alpha "));
    }

    #[test]
    fn independent_topic_unchanged() {
        let s = fixture();
        let e = expand_query("jaguar", "T7", &s, &Tokenizer::default(), None).unwrap();
        assert_eq!(e.query, "jaguar");
        assert!(e.no_expansion);
        assert!(expand_query("x", "T99", &s, &Tokenizer::default(), None).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_non_negative(a in 0u32..50, b in 0u32..50, c in 0u32..50, d in 0u32..50, n in 1.0f64..1000.0) {
            let t = ContingencyTable::new(a as f64, b as f64, c as f64, d as f64).smoothed();
            let swapped = ContingencyTable::new(t.nt_nc, t.nt_c, t.t_nc, t.tc);
            let x = chi_square(&t, n).value;
            prop_assert!(x >= 0.0);
            prop_assert!((x - chi_square(&swapped, n).value).abs() <= 1e-12 * x.max(1.0));
        }

        #[test]
        fn expansion_keeps_query(q in "[a-z]{3,8}( [a-z]{3,8}){0,3}") {
            let s = fixture();
            let tk = Tokenizer::default();
            let e = expand_query(&q, "T0", &s, &tk, None).unwrap();
            let orig: BTreeSet<String> = tk.tokenize(&q).into_inner().into_iter().collect();
            let out: BTreeSet<String> = tk.tokenize(&e.query).into_inner().into_iter().collect();
            prop_assert!(orig.is_subset(&out));
            for (_, v) in &e.added { prop_assert!(*v > CHI2_CRITICAL); }
        }
    }
}
