use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTag {
    Crawl,
    StructuredRecords,
    Remote,
    Desktop,
}

impl SourceTag {
    pub const ALL: [SourceTag; 4] = [
        SourceTag::Crawl,
        SourceTag::StructuredRecords,
        SourceTag::Remote,
        SourceTag::Desktop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceTag::Crawl => "crawl",
            SourceTag::StructuredRecords => "structured-records",
            SourceTag::Remote => "remote",
            SourceTag::Desktop => "desktop",
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "crawl" => Ok(SourceTag::Crawl),
            "structured-records" | "records" => Ok(SourceTag::StructuredRecords),
            "remote" => Ok(SourceTag::Remote),
            "desktop" => Ok(SourceTag::Desktop),
            other => Err(Error::Config(format!("unknown source {other:?}"))),
        }
    }
}

/// A retrievable text unit. `url` doubles as the merge identity across
/// backends, so every document has one (`file://`, `record://`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub url: String,
    pub title: String,
    pub body: String,
    pub source: SourceTag,
}

impl Document {
    pub fn new(id: impl Into<String>, url: impl Into<String>, title: impl Into<String>, body: impl Into<String>, source: SourceTag) -> Self {
        Document {
            id: id.into(),
            url: url.into(),
            title: title.into(),
            body: body.into(),
            source,
        }
    }

    pub fn full_text(&self) -> String {
        if self.title.is_empty() {
            self.body.clone()
        } else if self.body.is_empty() {
            self.title.clone()
        } else {
            format!("{}\n{}", self.title, self.body)
        }
    }

    /// First `max_chars` characters of the body, cut at a word boundary.
    pub fn snippet(&self, max_chars: usize) -> String {
        let body = self.body.trim();
        if body.chars().count() <= max_chars {
            return body.to_string();
        }
        let cut: String = body.chars().take(max_chars).collect();
        match cut.rfind(char::is_whitespace) {
            Some(i) if i > 0 => format!("{}…", cut[..i].trim_end()),
            _ => format!("{cut}…"),
        }
    }
}
