//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::net::SocketAddr;
use std::time::{Duration, Instant};

use axum::http::{header, HeaderMap, Uri};
use axum::response::Html;
use axum::Router;
use isf_core::categorize::{kmeans, majority_vote, Neighbor};
use isf_core::crawler::{crawl_loop, pagerank, CrawlConfig, CrawlContext, PageRecord, StopReason};
use isf_core::evaluation::{evaluate, macro_average, parse_qrels, parse_run, precision_at, PrCurve, QueryEval};
use isf_core::index::{index_documents, Document, SourceTag};
use isf_core::personalization::{
    chi_square, expand_query, init_profile, ContingencyTable, TermCategoryStats, CHI2_CRITICAL,
};
use isf_core::pipeline::{Pipeline, SearchRequest};
use isf_core::text::{tokenize, TermVector, TokenStream};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:?}, limit {limit:?}");
    Ok(format!("{detail} in {:.2}s", took.as_secs_f64()))
}

// ---------------------------------------------------------------- evaluation

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn macro_overall(levels_pct: [f64; 11]) -> Result<f64, String> {
    // Two queries straddling each level so the macro average is exercised.
    let spread = |sign: f64| {
        let mut c = [0.0; 11];
        for (j, l) in levels_pct.iter().enumerate() {
            let d = (l / 100.0).min(1.0 - l / 100.0) / 2.0;
            c[j] = l / 100.0 + sign * d;
        }
        c
    };
    let q = |id: &str, c: [f64; 11]| QueryEval {
        query: id.into(),
        p5: 0.0,
        p10: 0.0,
        curve: PrCurve(c),
        relevant: 1,
        retrieved: 1,
    };
    let report = macro_average(vec![q("a", spread(1.0)), q("b", spread(-1.0))]).map_err(|e| e.to_string())?;
    Ok(report.overall)
}

fn evaluation_arithmetic() -> Outcome {
    let start = Instant::now();
    let low = [100.0, 80.0, 65.0, 52.3, 45.0, 38.0, 30.0, 20.0, 15.0, 8.5, 5.0];
    let high = [100.0, 95.0, 90.0, 85.0, 75.0, 68.0, 60.0, 50.0, 40.0, 30.0, 23.7];
    ensure!((low.iter().sum::<f64>() - 458.8).abs() < 1e-9, "fixture sum");
    ensure!((high.iter().sum::<f64>() - 716.7).abs() < 1e-9, "fixture sum");
    let a = macro_overall(low)?;
    let b = macro_overall(high)?;
    ensure!(round3(a) == 0.417, "458.8/11 gave {a}");
    ensure!(round3(b) == 0.652, "716.7/11 gave {b}");

    // Per-query relevant counts in the top 5: 2, 1, 5, 1, 1.
    let hits = [2usize, 1, 5, 1, 1];
    let mut run = String::new();
    let mut qrels = String::new();
    for (qi, &h) in hits.iter().enumerate() {
        for r in 0..10 {
            let url = format!("http://q{qi}.test/{r}");
            run.push_str(&format!("q{qi}\t{}\t{url}\t{}\n", r + 1, 1.0 - r as f64 / 10.0));
            let rel = if r < h { "R" } else { "N" };
            qrels.push_str(&format!("q{qi}\t{url}\tj1\t{rel}\n"));
        }
    }
    let report = evaluate(
        &parse_run(&run, "run").map_err(|e| e.to_string())?,
        &parse_qrels(&qrels, "qrels").map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    ensure!(round3(report.p5 * 100.0) == 40.0, "P@5 gave {}", report.p5);
    let per: Vec<f64> = report.queries.iter().map(|q| round3(q.p5 * 100.0)).collect();
    ensure!(per == vec![40.0, 20.0, 100.0, 20.0, 20.0], "per-query P@5 {per:?}");

    let ranked: Vec<String> = (0..10).map(|i| format!("u{i}")).collect();
    let relevant: BTreeSet<String> = [0, 1, 3, 4, 6, 8, 9].iter().map(|i| format!("u{i}")).collect();
    let p10 = precision_at(&ranked, &relevant, 10);
    ensure!(round3(p10) == 0.7, "P@10 gave {p10}");
    within(start, Duration::from_secs(1), format!("overall {:.3}/{:.3}, P@5 40, P@10 0.7", a, b))
}

// ------------------------------------------------------------------ pagerank

fn dense_pagerank(outlinks: &[Vec<usize>], d: f64) -> Vec<f64> {
    let n = outlinks.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (b, targets) in outlinks.iter().enumerate() {
        if targets.is_empty() {
            for a in 0..n {
                m[(a, b)] += 1.0 / n as f64;
            }
        } else {
            for &a in targets {
                m[(a, b)] += 1.0 / targets.len() as f64;
            }
        }
    }
    let m = m * d;
    let teleport = DVector::from_element(n, 1.0 - d);
    let mut r = DVector::from_element(n, 1.0);
    for _ in 0..10_000 {
        let next = &m * &r + &teleport;
        let delta = (&next - &r).abs().sum();
        r = next;
        if delta < 1e-14 {
            break;
        }
    }
    r.iter().copied().collect()
}

fn graph_from_bits(n: usize, bits: u64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|b| (0..n).filter(|&a| bits >> (b * n + a) & 1 == 1).collect())
        .collect()
}

fn check_pagerank(outlinks: &[Vec<usize>]) -> Result<(), String> {
    let d = 0.85;
    let got = pagerank(outlinks, d, 1e-9, 100);
    let want = dense_pagerank(outlinks, d);
    let n = outlinks.len() as f64;
    for (i, (g, w)) in got.ranks.iter().zip(&want).enumerate() {
        ensure!((g - w).abs() <= 1e-6, "graph {outlinks:?} node {i}: {g} vs oracle {w}");
    }
    let sum: f64 = got.ranks.iter().sum();
    ensure!((sum - n).abs() <= 1e-6 * n, "graph {outlinks:?}: sum {sum} != {n}");
    Ok(())
}

fn pagerank_oracle() -> Outcome {
    let start = Instant::now();
    let mut graphs = 0;
    for n in 1..=3usize {
        for bits in 0..(1u64 << (n * n)) {
            check_pagerank(&graph_from_bits(n, bits))?;
            graphs += 1;
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..500 {
        let n = rng.gen_range(1..=8usize);
        let p: f64 = rng.gen_range(0.05..0.6);
        let g: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..n).filter(|_| rng.gen_bool(p)).collect())
            .collect();
        check_pagerank(&g)?;
        graphs += 1;
    }
    // Vertex-transitive graphs: directed and two-way cycles, complete graphs,
    // no edges at all.
    for n in 1..=8usize {
        let families: Vec<Vec<Vec<usize>>> = vec![
            (0..n).map(|i| vec![(i + 1) % n]).collect(),
            (0..n).map(|i| if n > 2 { vec![(i + 1) % n, (i + n - 1) % n] } else { vec![(i + 1) % n] }).collect(),
            (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect(),
            vec![Vec::new(); n],
        ];
        for g in families {
            let r = pagerank(&g, 0.85, 1e-9, 100).ranks;
            ensure!(r.iter().all(|x| (x - 1.0).abs() <= 1e-6), "symmetric graph {g:?} gave {r:?}");
            graphs += 1;
        }
    }
    within(start, Duration::from_secs(30), format!("{graphs} graphs within 1e-6"))
}

// ----------------------------------------------------------------- retrieval

const WORDS: &[&str] = &[
    "jaguar", "cars", "engine", "forest", "cat", "power", "supply", "battery", "shipping", "parcel", "jazz", "piano",
    "league", "match", "river", "election", "senate", "protein", "cell", "orbit", "planet", "recipe", "bread",
    "garden", "the", "and", "of",
];

fn random_text(rng: &mut StdRng, len: usize) -> String {
    (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn brute_force(docs: &[(String, String)], query: &str) -> BTreeMap<String, f64> {
    let toks: Vec<(String, HashMap<String, f64>)> = docs
        .iter()
        .map(|(id, text)| {
            let mut tf = HashMap::new();
            for t in tokenize(text).iter() {
                *tf.entry(t.to_string()).or_insert(0.0) += 1.0;
            }
            (id.clone(), tf)
        })
        .collect();
    let n = docs.len() as f64;
    let mut df: HashMap<&str, f64> = HashMap::new();
    for (_, tf) in &toks {
        for t in tf.keys() {
            *df.entry(t.as_str()).or_default() += 1.0;
        }
    }
    let idf = |t: &str| df.get(t).map_or(0.0, |d| (n / d).ln());
    let mut qtf: HashMap<String, f64> = HashMap::new();
    for t in tokenize(query).iter() {
        *qtf.entry(t.to_string()).or_default() += 1.0;
    }
    let qw: HashMap<&str, f64> = qtf.iter().map(|(t, c)| (t.as_str(), c * idf(t))).collect();
    let qn = qw.values().map(|w| w * w).sum::<f64>().sqrt();
    let mut out = BTreeMap::new();
    for (id, tf) in &toks {
        let dw: HashMap<&str, f64> = tf.iter().map(|(t, c)| (t.as_str(), c * idf(t))).collect();
        let dn = dw.values().map(|w| w * w).sum::<f64>().sqrt();
        let dot: f64 = qw.iter().map(|(t, w)| w * dw.get(t).copied().unwrap_or(0.0)).sum();
        if dot > 0.0 && qn > 0.0 && dn > 0.0 {
            out.insert(id.clone(), dot / (qn * dn));
        }
    }
    out
}

fn retrieval_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(42);
    let mut queries = 0;
    for corpus in 0..20 {
        let n = rng.gen_range(2..=50);
        let docs: Vec<(String, String)> = (0..n)
            .map(|i| {
                let len = rng.gen_range(1..30);
                (format!("c{corpus}-d{i:02}"), random_text(&mut rng, len))
            })
            .collect();
        let index = index_documents(
            docs.iter()
                .map(|(id, t)| Document::new(id, format!("http://c.test/{id}"), "", t, SourceTag::Crawl)),
        )
        .map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let qlen = rng.gen_range(1..4);
            let q = random_text(&mut rng, qlen);
            let oracle = brute_force(&docs, &q);
            let got = index.search(&q, docs.len());
            ensure!(
                got.entries.len() == oracle.len(),
                "corpus {corpus} {q:?}: {} results vs oracle {}",
                got.entries.len(),
                oracle.len()
            );
            for e in &got.entries {
                let want = oracle.get(&e.doc.id).ok_or(format!("{q:?}: unexpected {}", e.doc.id))?;
                ensure!((e.score - want).abs() <= 1e-9, "{q:?} {}: {} vs {want}", e.doc.id, e.score);
            }
            for w in got.entries.windows(2) {
                let (a, b) = (oracle[&w[0].doc.id], oracle[&w[1].doc.id]);
                let ordered = if (a - b).abs() <= 1e-12 { w[0].doc.id < w[1].doc.id } else { a > b };
                ensure!(ordered, "{q:?}: {} before {} ({a} vs {b})", w[0].doc.id, w[1].doc.id);
            }
            queries += 1;
        }
    }
    within(start, Duration::from_secs(10), format!("20 corpora, {queries} queries"))
}

// -------------------------------------------------------------------- voting

fn neighbors(cats: &str, sims: &[f64]) -> Vec<Neighbor> {
    cats.chars()
        .zip(sims)
        .map(|(c, &s)| Neighbor {
            category: format!("Top/{c}"),
            similarity: s,
        })
        .collect()
}

fn vote(cats: &str) -> (String, Option<String>) {
    let sims: Vec<f64> = (0..cats.len()).map(|i| 0.9 - 0.1 * i as f64).collect();
    let a = majority_vote("r", &neighbors(cats, &sims));
    (a.primary, a.secondary)
}

fn majority_voting() -> Outcome {
    let start = Instant::now();
    let t = |s: &str| format!("Top/{s}");
    // (neighbors, primary, secondary, branch)
    let table: &[(&str, &str, Option<&str>, u8)] = &[
        ("AAB", "A", None, 1),
        ("BAA", "A", None, 1),
        ("ABC", "A", None, 2),
        ("AAAB", "A", None, 1),
        ("BAAA", "A", None, 1),
        ("AABC", "A", None, 2),
        ("ABAB", "A", None, 2),
        ("ABBC", "A", Some("B"), 3),
        ("ABCC", "A", Some("C"), 3),
        ("AAABC", "A", None, 1),
        ("BCAAA", "A", None, 1),
        ("AABBC", "A", None, 2),
        ("ABCDE", "A", None, 2),
        ("ABBCC", "A", Some("B"), 3),
        ("ACBCB", "A", Some("C"), 3),
        ("ABBBC", "B", None, 1),
        ("AAAABBC", "A", None, 1),
        ("BBAAAAC", "A", None, 1),
        ("AABBCCD", "A", None, 2),
        ("AAABBBC", "A", None, 2),
        ("ABBBCCD", "A", Some("B"), 3),
        ("ABBCCDD", "A", Some("B"), 3),
    ];
    let mut branches: BTreeMap<usize, BTreeSet<u8>> = BTreeMap::new();
    for &(cats, p, s, branch) in table {
        let got = vote(cats);
        let want = (t(p), s.map(t));
        ensure!(got == want, "{cats}: got {got:?}, want {want:?}");
        branches.entry(cats.len()).or_default().insert(branch);
    }
    for (k, b) in &branches {
        let need: BTreeSet<u8> = if *k == 3 { [1, 2].into() } else { [1, 2, 3].into() };
        ensure!(*b == need, "k={k} covers branches {b:?}");
    }
    ensure!(branches.keys().copied().collect::<Vec<_>>() == vec![3, 4, 5, 7], "k set");
    // With k = 3 every non-majority list has three distinct categories, so
    // the top-ranked one is always among the most frequent.
    for code in 0..27u32 {
        let cats: String = [code % 3, code / 3 % 3, code / 9].iter().map(|&c| (b'A' + c as u8) as char).collect();
        ensure!(vote(&cats).1.is_none(), "k=3 {cats} produced two categories");
    }

    let mut rng = StdRng::seed_from_u64(6);
    for _ in 0..1000 {
        let k = *[3usize, 4, 5, 7].choose(&mut rng).unwrap();
        let cats: String = (0..k).map(|_| (b'A' + rng.gen_range(0..4u8)) as char).collect();
        let mut sims: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
        sims.sort_by(|a, b| b.total_cmp(a));
        let f: f64 = 10f64.powf(rng.gen_range(-6.0..6.0));
        let scaled: Vec<f64> = sims.iter().map(|s| s * f).collect();
        let a = majority_vote("r", &neighbors(&cats, &sims));
        let b = majority_vote("r", &neighbors(&cats, &scaled));
        ensure!((a.primary.clone(), a.secondary.clone()) == (b.primary, b.secondary), "{cats} x{f}");
    }
    within(start, Duration::from_secs(5), format!("{} table rows, 1000 rescalings", table.len()))
}

// -------------------------------------------------------------------- kmeans

fn dense(v: &TermVector, dim: usize) -> DVector<f64> {
    let mut d = DVector::zeros(dim);
    for &(i, w) in v.entries() {
        d[i as usize] += w;
    }
    d
}

fn dense_objective(points: &[DVector<f64>], groups: &[usize], k: usize) -> f64 {
    let units: Vec<DVector<f64>> = points.iter().map(|p| p.normalize()).collect();
    let mut total = 0.0;
    for g in 0..k {
        let members: Vec<&DVector<f64>> = units.iter().zip(groups).filter(|(_, &a)| a == g).map(|(p, _)| p).collect();
        if members.is_empty() {
            continue;
        }
        let sum = members.iter().fold(DVector::zeros(units[0].len()), |acc, p| acc + *p);
        let c = sum.normalize();
        total += members.iter().map(|p| 1.0 - p.dot(&c)).sum::<f64>();
    }
    total
}

fn kmeans_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(99);
    for fixture in 0..100 {
        let n = rng.gen_range(4..40);
        let dim = rng.gen_range(3..30u32);
        let pts: Vec<TermVector> = (0..n)
            .map(|_| {
                let nnz = rng.gen_range(1..=dim.min(6));
                TermVector::from_entries((0..nnz).map(|_| (rng.gen_range(0..dim), rng.gen_range(0.05..1.0))))
            })
            .collect();
        let k = rng.gen_range(1..=n.min(6));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let out = kmeans(&pts, &idx[..k], 50).map_err(|e| e.to_string())?;
        for w in out.objective_history.windows(2) {
            ensure!(w[1] <= w[0] + 1e-12, "fixture {fixture}: objective rose {} -> {}", w[0], w[1]);
        }
    }

    // Eight points in two groups with disjoint term supports, one seed per group.
    for fixture in 0..50 {
        let size_a = rng.gen_range(2..=6usize);
        let pts: Vec<TermVector> = (0..8)
            .map(|i| {
                let base = if i < size_a { 0 } else { 4 };
                TermVector::from_entries((0..4u32).map(|t| (base + t, rng.gen_range(0.0..1.0))))
            })
            .collect();
        if pts.iter().any(TermVector::is_empty) {
            continue;
        }
        let seeds = [rng.gen_range(0..size_a), rng.gen_range(size_a..8)];
        let out = kmeans(&pts, &seeds, 50).map_err(|e| e.to_string())?;
        let d: Vec<DVector<f64>> = pts.iter().map(|p| dense(p, 8)).collect();
        let best = (1u32..(1 << 7))
            .map(|mask| {
                let groups: Vec<usize> = (0..8).map(|i| if i == 0 { 0 } else { (mask >> (i - 1) & 1) as usize }).collect();
                dense_objective(&d, &groups, 2)
            })
            .fold(f64::INFINITY, f64::min);
        let got = dense_objective(&d, &out.assignment, 2);
        ensure!((got - best).abs() <= 1e-9, "fixture {fixture}: objective {got} vs exhaustive {best}");
    }

    // Cluster count never exceeds the distinct top-level categories.
    let (_dir, cfg) = common::fixture_config();
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let pipeline = Pipeline::from_config(cfg).map_err(|e| e.to_string())?;
    let queries = [
        "jaguar", "jaguar cars", "ups", "power supply", "clinton", "jazz", "rust", "health", "shipping parcels",
        "racing", "big cat", "piano", "election", "recipes",
    ];
    for q in queries {
        let resp = rt.block_on(pipeline.run(&SearchRequest::new(q))).map_err(|e| e.to_string())?;
        let c: BTreeSet<String> = resp
            .entries
            .iter()
            .map(|e| e.category.split('/').take(2).collect::<Vec<_>>().join("/"))
            .collect();
        ensure!(resp.clusters.len() <= c.len().max(1), "{q}: {} clusters > C = {}", resp.clusters.len(), c.len());
    }
    within(start, Duration::from_secs(30), "100 monotone runs, 50 exhaustive 8-point fixtures, K<=C".into())
}

// ---------------------------------------------------------------- chi-square

fn oracle_chi2(units: &[(Option<String>, TokenStream)], term: &str, topic: &str, n: f64) -> f64 {
    let (mut a, mut b, mut c, mut d): (f64, f64, f64, f64) = (1.0, 1.0, 1.0, 1.0);
    for (t, toks) in units {
        let has = toks.iter().any(|x| x == term);
        let inside = t.as_deref() == Some(topic);
        match (has, inside) {
            (true, true) => a += 1.0,
            (true, false) => b += 1.0,
            (false, true) => c += 1.0,
            (false, false) => d += 1.0,
        }
    }
    let m = a + b + c + d;
    let (p11, p10, p01, p00) = (a / m, b / m, c / m, d / m);
    let pt = p11 + p10;
    let pc = p11 + p01;
    n * (p11 * p00 - p10 * p01).powi(2) / (pt * (1.0 - pt) * pc * (1.0 - pc))
}

fn chi_square_checks() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..200 {
        let (t, nt, c, nc) = (
            rng.gen_range(1..50) as f64,
            rng.gen_range(1..50) as f64,
            rng.gen_range(1..50) as f64,
            rng.gen_range(1..50) as f64,
        );
        let v = chi_square(&ContingencyTable::new(t * c, t * nc, nt * c, nt * nc), 100.0).value;
        ensure!(v.abs() <= 1e-9, "independent table gave {v}");
    }
    for n in [1.0, 10.0, 37.0, 573.0] {
        let v = chi_square(&ContingencyTable::new(7.0, 0.0, 0.0, 13.0), n).value;
        ensure!((v - n).abs() <= 1e-9, "perfect association gave {v}, want {n}");
    }
    let v = chi_square(&ContingencyTable::new(20.0, 30.0, 30.0, 20.0), 100.0).value;
    ensure!((v - 4.0).abs() <= 1e-9, "(20,30,30,20) gave {v}");

    let mut emitted = 0;
    for _ in 0..20 {
        let n_topics = rng.gen_range(15..45);
        let topics: Vec<String> = (0..n_topics).map(|i| format!("Top/T{i}")).collect();
        let mut units = Vec::new();
        for topic in &topics {
            for _ in 0..rng.gen_range(1..5) {
                let mut toks: Vec<String> = (0..rng.gen_range(1..6)).map(|_| WORDS.choose(&mut rng).unwrap().to_string()).collect();
                if rng.gen_bool(0.8) {
                    toks.push(format!("{}x", topic.to_lowercase().replace('/', "")));
                }
                units.push((Some(topic.clone()), TokenStream::new(toks)));
            }
        }
        let stats = TermCategoryStats::from_units(topics.clone(), units.clone()).map_err(|e| e.to_string())?;
        let tokenizer = isf_core::text::default_tokenizer();
        for topic in &topics {
            let e = expand_query("query", topic, &stats, tokenizer, None).map_err(|e| e.to_string())?;
            for (term, value) in &e.added {
                let want = oracle_chi2(&units, term, topic, n_topics as f64);
                ensure!(want > CHI2_CRITICAL, "{topic}: emitted {term} with oracle value {want}");
                ensure!((value - want).abs() <= 1e-9, "{topic} {term}: {value} vs oracle {want}");
                emitted += 1;
            }
        }
    }
    ensure!(emitted > 0, "no expansion term was ever emitted");
    within(start, Duration::from_secs(10), format!("{emitted} expansion terms all above {CHI2_CRITICAL}"))
}

// ------------------------------------------------------------------- crawler

/// path -> outlinks as (host, path).
fn site() -> BTreeMap<(&'static str, String), Vec<(&'static str, String)>> {
    let a = |i: u32| ("alpha.test", format!("/p{i:02}"));
    let b = |i: u32| ("beta.test", format!("/b{i}"));
    let mut m = BTreeMap::new();
    let alpha: [(u32, Vec<(&str, String)>); 20] = [
        (0, vec![a(1), a(2), a(3), b(0)]),
        (1, vec![a(4), a(5)]),
        (2, vec![a(5), a(6), a(0)]),
        (3, vec![a(7), b(1)]),
        (4, vec![a(8)]),
        (5, vec![a(9), a(10), a(1)]),
        (6, vec![a(11)]),
        (7, vec![a(12), a(13), a(3)]),
        (8, vec![a(14)]),
        (9, vec![a(15)]),
        (10, vec![a(16), b(2)]),
        (11, vec![a(17), a(0)]),
        (12, vec![]),
        (13, vec![a(5)]),
        (14, vec![a(0)]),
        (15, vec![a(16)]),
        (16, vec![a(17)]),
        (17, vec![b(3)]),
        (18, vec![a(0)]),
        (19, vec![a(18)]),
    ];
    for (i, links) in alpha {
        m.insert(a(i), links);
    }
    m.insert(b(0), vec![a(18)]);
    m.insert(b(1), vec![a(19)]);
    m.insert(b(2), vec![b(4)]);
    m.insert(b(3), vec![a(0)]);
    m.insert(b(4), vec![a(19)]);
    m
}

fn url(host: &str, path: &str, port: u16) -> String {
    format!("http://{host}:{port}{path}")
}

async fn serve_site() -> SocketAddr {
    let pages = site();
    let app = Router::new().fallback(move |headers: HeaderMap, uri: Uri| {
        let pages = pages.clone();
        async move {
            let host_port = headers.get(header::HOST).and_then(|h| h.to_str().ok()).unwrap_or("").to_string();
            let (host, port) = host_port.split_once(':').unwrap_or((&host_port, "80"));
            let port: u16 = port.parse().unwrap_or(80);
            let key = (if host == "alpha.test" { "alpha.test" } else { "beta.test" }, uri.path().to_string());
            match pages.get(&key) {
                Some(links) => {
                    let anchors: String = links
                        .iter()
                        .map(|(h, p)| format!("<a href=\"{}\">{p}</a> ", url(h, p, port)))
                        .collect();
                    Ok(Html(format!(
                        "<html><head><title>{host}{}</title></head><body><p>page {} on {host}</p>{anchors}</body></html>",
                        uri.path(),
                        uri.path()
                    )))
                }
                None => Err(axum::http::StatusCode::NOT_FOUND),
            }
        }
    });
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    addr
}

fn crawl_config(addr: SocketAddr, budget: usize) -> CrawlConfig {
    CrawlConfig {
        seeds: vec![url("alpha.test", "/p00", addr.port())],
        budget,
        width: 1,
        per_host_delay_ms: 0,
        respect_robots: false,
        timeout_ms: 5_000,
        resolve: vec![("alpha.test".into(), addr), ("beta.test".into(), addr)],
        ..CrawlConfig::default()
    }
}

/// Replays the log against an independent frontier model: each fetched URL
/// must be pending and carry the highest oracle priority at that moment.
fn replay(log: &[(String, f64)], port: u16, epsilon: f64) -> Result<(), String> {
    let pages = site();
    let links_of = |u: &str| -> Vec<String> {
        pages
            .iter()
            .find(|((h, p), _)| url(h, p, port) == u)
            .map(|(_, l)| l.iter().filter(|(h, _)| *h == "alpha.test").map(|(h, p)| url(h, p, port)).collect())
            .unwrap_or_default()
    };
    let seed = url("alpha.test", "/p00", port);
    let mut nodes: Vec<String> = vec![seed.clone()];
    let mut out: HashMap<String, Vec<String>> = HashMap::new();
    let mut fetched: BTreeSet<String> = BTreeSet::new();
    let mut prio: HashMap<String, f64> = HashMap::from([(seed, 1.0)]);
    for (step, (u, logged)) in log.iter().enumerate() {
        let pending: Vec<&String> = nodes.iter().filter(|n| !fetched.contains(*n)).collect();
        ensure!(pending.contains(&u), "step {step}: {u} was not pending");
        let best = pending.iter().map(|n| prio[*n]).fold(f64::NEG_INFINITY, f64::max);
        ensure!(prio[u] >= best - 1e-6, "step {step}: {u} priority {} < best {best}", prio[u]);
        ensure!((logged - prio[u]).abs() <= 1e-6, "step {step}: logged {logged} vs oracle {}", prio[u]);
        fetched.insert(u.clone());
        let ls = links_of(u);
        for l in &ls {
            if !nodes.contains(l) {
                nodes.push(l.clone());
            }
        }
        out.insert(u.clone(), ls);
        let idx: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let adj: Vec<Vec<usize>> = nodes
            .iter()
            .map(|n| out.get(n).map(|l| l.iter().map(|x| idx[x.as_str()]).collect()).unwrap_or_default())
            .collect();
        let ranks = dense_pagerank(&adj, 0.85);
        prio = nodes.iter().cloned().zip(ranks).collect();
        let dropped: Vec<String> = nodes.iter().filter(|n| !fetched.contains(*n) && prio[*n] < epsilon).cloned().collect();
        ensure!(dropped.is_empty(), "oracle would prune {dropped:?}");
    }
    Ok(())
}

fn reachable(port: u16) -> BTreeSet<String> {
    let pages = site();
    let mut seen = BTreeSet::from([("alpha.test", "/p00".to_string())]);
    let mut stack = vec![("alpha.test", "/p00".to_string())];
    while let Some(k) = stack.pop() {
        for l in pages.get(&k).into_iter().flatten() {
            if l.0 == "alpha.test" && seen.insert(l.clone()) {
                stack.push(l.clone());
            }
        }
    }
    seen.into_iter().map(|(h, p)| url(h, &p, port)).collect()
}

fn crawler_e2e() -> Outcome {
    let start = Instant::now();
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let addr = serve_site().await;
        let want = reachable(addr.port());
        ensure!(want.len() == 18, "fixture reachability {}", want.len());

        let cfg = crawl_config(addr, 100);
        let (mut db, mut rdb): (Vec<PageRecord>, Vec<PageRecord>) = (Vec::new(), Vec::new());
        let report = tokio::time::timeout(
            Duration::from_secs(20),
            crawl_loop(&cfg, CrawlContext { db: &mut db, rdb: &mut rdb, classifier: None }),
        )
        .await
        .map_err(|_| "crawl did not terminate".to_string())?
        .map_err(|e| e.to_string())?;
        ensure!(report.stop == StopReason::FrontierEmpty, "stopped with {:?}", report.stop);
        let got: BTreeSet<String> = report.fetched_urls().map(String::from).collect();
        ensure!(got.len() == report.log.len(), "a page was fetched twice");
        ensure!(got == want, "fetched {got:?}\nwant {want:?}");
        ensure!(!got.iter().any(|u| u.contains("beta.test")), "fetched the off-seed domain");
        ensure!(report.log.iter().all(|e| e.status == 200), "non-200 fetch");
        let log: Vec<(String, f64)> = report.log.iter().map(|e| (e.url.clone(), e.priority)).collect();
        replay(&log, addr.port(), cfg.epsilon)?;

        let small = crawl_config(addr, 10);
        let (mut db, mut rdb): (Vec<PageRecord>, Vec<PageRecord>) = (Vec::new(), Vec::new());
        let r = crawl_loop(&small, CrawlContext { db: &mut db, rdb: &mut rdb, classifier: None })
            .await
            .map_err(|e| e.to_string())?;
        ensure!(r.stop == StopReason::BudgetExhausted && r.fetched == 10, "budget 10: {:?} {}", r.stop, r.fetched);
        ensure!(r.fetched_urls().all(|u| want.contains(u)), "budget run left the reachable set");
        let log: Vec<(String, f64)> = r.log.iter().map(|e| (e.url.clone(), e.priority)).collect();
        replay(&log, addr.port(), small.epsilon)?;
        Ok::<_, String>(())
    })?;
    within(start, Duration::from_secs(20), "18/18 reachable pages, priority replay ok".into())
}

// ------------------------------------------------------------------ pipeline

fn pipeline_determinism() -> Outcome {
    let start = Instant::now();
    let (_dir, cfg) = common::fixture_config();
    let pipeline = Pipeline::from_config(cfg).map_err(|e| e.to_string())?;
    let profile = init_profile(
        "ann",
        &[("Top/Science/Biology".into(), 4), ("Top/Business/Automotive".into(), 1)],
        pipeline.taxonomy(),
    )
    .map_err(|e| e.to_string())?;
    pipeline.profiles().put(profile).map_err(|e| e.to_string())?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let requests = [
        SearchRequest::new("jaguar cars"),
        SearchRequest {
            user: Some("ann".into()),
            topic: Some("Top/Science/Biology".into()),
            ..SearchRequest::new("jaguar")
        },
        SearchRequest {
            categories: vec!["Top/Business".into()],
            ..SearchRequest::new("ups power")
        },
    ];
    for req in &requests {
        let first = rt.block_on(pipeline.run(req)).map_err(|e| e.to_string())?.to_json();
        for i in 1..10 {
            let again = rt.block_on(pipeline.run(req)).map_err(|e| e.to_string())?.to_json();
            ensure!(again == first, "{:?}: run {i} differs", req.query);
        }
    }
    within(start, Duration::from_secs(30), format!("{} requests x 10 runs byte-identical", requests.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("evaluation arithmetic", evaluation_arithmetic),
        ("pagerank oracle", pagerank_oracle),
        ("retrieval oracle equivalence", retrieval_oracle),
        ("majority voting", majority_voting),
        ("k-means", kmeans_properties),
        ("chi-square", chi_square_checks),
        ("crawler end-to-end", crawler_e2e),
        ("pipeline determinism", pipeline_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
