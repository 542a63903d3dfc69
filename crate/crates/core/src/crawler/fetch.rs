use std::collections::HashMap;
use std::net::SocketAddr;
use std::time::Duration;

use chrono::{DateTime, Utc};
use scraper::{ElementRef, Html, Node, Selector};
use serde::{Deserialize, Serialize};
use texting_robots::Robot;
use tokio::sync::Mutex;
use url::Url;

use super::urls::resolve;

pub const USER_AGENT: &str = concat!("isf-crawler/", env!("CARGO_PKG_VERSION"));
const MAX_BODY_BYTES: usize = 8 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchResult {
    pub url: String,
    /// HTTP status, or 0 when no response was received.
    pub status: u16,
    #[serde(skip)]
    pub body: Vec<u8>,
    pub title: String,
    pub text: String,
    pub outlinks: Vec<String>,
    pub fetched_at: DateTime<Utc>,
    pub error: Option<String>,
}

impl FetchResult {
    fn failed(url: &str, status: u16, error: Option<String>) -> Self {
        FetchResult {
            url: url.to_string(),
            status,
            body: Vec::new(),
            title: String::new(),
            text: String::new(),
            outlinks: Vec::new(),
            fetched_at: Utc::now(),
            error,
        }
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    /// Network-level failure worth retrying.
    pub fn is_transient(&self) -> bool {
        self.status == 0 && self.error.as_deref() != Some(ROBOTS_DENIED)
    }
}

pub const ROBOTS_DENIED: &str = "disallowed by robots.txt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPage {
    pub title: String,
    pub text: String,
    pub links: Vec<Url>,
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn visible_text(el: ElementRef<'_>, out: &mut String) {
    for child in el.children() {
        match child.value() {
            Node::Text(t) => {
                out.push_str(t);
                out.push(' ');
            }
            Node::Element(e) => {
                if matches!(e.name(), "script" | "style" | "noscript" | "template" | "head") {
                    continue;
                }
                if let Some(child_el) = ElementRef::wrap(child) {
                    visible_text(child_el, out);
                }
            }
            _ => {}
        }
    }
}

/// Title, visible text and canonical absolute links of an HTML page.
/// A `<base href>` overrides `base` for link resolution.
pub fn parse_html(base: &Url, html: &str) -> ParsedPage {
    let doc = Html::parse_document(html);
    let title_sel = Selector::parse("title").expect("static selector");
    let link_sel = Selector::parse("a[href], area[href]").expect("static selector");
    let base_sel = Selector::parse("base[href]").expect("static selector");

    let title = doc
        .select(&title_sel)
        .next()
        .map(|t| collapse_ws(&t.text().collect::<String>()))
        .unwrap_or_default();

    let mut raw = String::new();
    visible_text(doc.root_element(), &mut raw);

    let base = doc
        .select(&base_sel)
        .next()
        .and_then(|b| b.value().attr("href"))
        .and_then(|h| base.join(h).ok())
        .unwrap_or_else(|| base.clone());

    let mut links: Vec<Url> = Vec::new();
    for a in doc.select(&link_sel) {
        if a.value().attr("rel").is_some_and(|r| r.split_whitespace().any(|t| t == "nofollow")) {
            continue;
        }
        if let Some(u) = a.value().attr("href").and_then(|h| resolve(&base, h)) {
            if !links.contains(&u) {
                links.push(u);
            }
        }
    }

    ParsedPage {
        title,
        text: collapse_ws(&raw),
        links,
    }
}

#[derive(Debug, Clone)]
pub struct FetcherOptions {
    pub timeout: Duration,
    pub respect_robots: bool,
    pub user_agent: String,
    /// Host name overrides, as with curl's `--resolve`.
    pub resolve: Vec<(String, SocketAddr)>,
}

impl Default for FetcherOptions {
    fn default() -> Self {
        FetcherOptions {
            timeout: Duration::from_secs(10),
            respect_robots: true,
            user_agent: USER_AGENT.to_string(),
            resolve: Vec::new(),
        }
    }
}

/// HTTP fetcher with a per-origin robots.txt cache.
#[derive(Debug)]
pub struct Fetcher {
    client: reqwest::Client,
    options: FetcherOptions,
    robots: Mutex<HashMap<String, Option<Robot>>>,
}

impl Fetcher {
    pub fn new(options: FetcherOptions) -> crate::Result<Self> {
        let mut builder = reqwest::Client::builder()
            .timeout(options.timeout)
            .user_agent(options.user_agent.clone())
            .redirect(reqwest::redirect::Policy::limited(5));
        for (host, addr) in &options.resolve {
            builder = builder.resolve(host, *addr);
        }
        Ok(Fetcher {
            client: builder.build()?,
            options,
            robots: Mutex::new(HashMap::new()),
        })
    }

    async fn robots_allow(&self, url: &Url) -> bool {
        if !self.options.respect_robots {
            return true;
        }
        let origin = url.origin().ascii_serialization();
        let mut cache = self.robots.lock().await;
        if !cache.contains_key(&origin) {
            let robot = match self.client.get(format!("{origin}/robots.txt")).send().await {
                Ok(resp) if resp.status().is_success() => match resp.bytes().await {
                    Ok(body) => Robot::new(&self.options.user_agent, &body).ok(),
                    Err(_) => None,
                },
                _ => None,
            };
            cache.insert(origin.clone(), robot);
        }
        cache[&origin].as_ref().is_none_or(|r| r.allowed(url.as_str()))
    }

    /// GETs the page and extracts title, text and outlinks. Failures are
    /// reported in the result, never as errors.
    pub async fn fetch(&self, url: &str) -> FetchResult {
        let Ok(parsed) = Url::parse(url) else {
            return FetchResult::failed(url, 0, Some("invalid url".into()));
        };
        if !self.robots_allow(&parsed).await {
            return FetchResult::failed(url, 0, Some(ROBOTS_DENIED.into()));
        }
        let resp = match self.client.get(parsed.clone()).send().await {
            Ok(r) => r,
            Err(e) => return FetchResult::failed(url, 0, Some(e.to_string())),
        };
        let status = resp.status().as_u16();
        let final_url = resp.url().clone();
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("text/html")
            .to_ascii_lowercase();
        if !resp.status().is_success() {
            return FetchResult::failed(url, status, None);
        }
        let body = match resp.bytes().await {
            Ok(b) => b.to_vec(),
            Err(e) => return FetchResult::failed(url, status, Some(e.to_string())),
        };
        let body_text = String::from_utf8_lossy(&body[..body.len().min(MAX_BODY_BYTES)]).into_owned();
        let (title, text, outlinks) = if content_type.contains("html") {
            let page = parse_html(&final_url, &body_text);
            (page.title, page.text, page.links.into_iter().map(String::from).collect())
        } else if content_type.starts_with("text/") {
            (String::new(), collapse_ws(&body_text), Vec::new())
        } else {
            (String::new(), String::new(), Vec::new())
        };
        FetchResult {
            url: url.to_string(),
            status,
            body,
            title,
            text,
            outlinks,
            fetched_at: Utc::now(),
            error: None,
        }
    }

    pub async fn fetch_with_retries(&self, url: &str, retries: usize) -> (FetchResult, usize) {
        let mut attempts = 1;
        let mut result = self.fetch(url).await;
        while result.is_transient() && attempts <= retries {
            attempts += 1;
            result = self.fetch(url).await;
        }
        (result, attempts)
    }
}
