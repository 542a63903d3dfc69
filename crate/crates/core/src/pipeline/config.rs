use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::categorize::VotingParams;
use crate::crawler::CrawlConfig;
use crate::error::{Error, Result};
use crate::index::SourceTag;
use crate::personalization::DEFAULT_EXPANSION_CAP;

pub const CONFIG_ENV: &str = "ISF_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub name: String,
    pub url: String,
    #[serde(default = "default_remote_priority")]
    pub priority: i32,
    #[serde(default)]
    pub private: bool,
    #[serde(default)]
    pub score_floor: f64,
}

fn default_remote_priority() -> i32 {
    3
}

/// Service configuration, read from TOML. Relative paths resolve against
/// the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub taxonomy: PathBuf,
    /// Submitted-page summaries for the taxonomy.
    pub pages: Option<PathBuf>,
    pub index: PathBuf,
    pub records: Option<PathBuf>,
    pub desktop: Option<PathBuf>,
    pub profiles: PathBuf,
    pub sources: BTreeSet<SourceTag>,
    pub remote: Vec<RemoteConfig>,
    /// Results per backend and in the response.
    pub results: usize,
    pub backend_timeout_ms: u64,
    pub cluster: bool,
    pub kmeans_max_iter: usize,
    pub expansion: bool,
    /// Absent means no cap.
    pub expansion_cap: Option<usize>,
    pub snippet_chars: usize,
    /// Token that unlocks private backends.
    pub visibility_token: Option<String>,
    pub voting: VotingParams,
    pub crawl: CrawlConfig,
    pub bind: String,
    pub ui_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            taxonomy: "taxonomy/categories.tsv".into(),
            pages: None,
            index: "index.jsonl".into(),
            records: None,
            desktop: None,
            profiles: "profiles".into(),
            sources: SourceTag::ALL.into_iter().collect(),
            remote: Vec::new(),
            results: 10,
            backend_timeout_ms: 5_000,
            cluster: true,
            kmeans_max_iter: crate::categorize::DEFAULT_MAX_ITER,
            expansion: true,
            expansion_cap: Some(DEFAULT_EXPANSION_CAP),
            snippet_chars: 240,
            visibility_token: None,
            voting: VotingParams::default(),
            crawl: CrawlConfig::default(),
            bind: "127.0.0.1:8080".into(),
            ui_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{source}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Explicit path, else `ISF_CONFIG`, else defaults.
    pub fn discover(explicit: Option<&Path>) -> Result<Self> {
        match explicit.map(PathBuf::from).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from)) {
            Some(p) => Self::load(&p),
            None => Ok(Self::default()),
        }
    }

    pub fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.taxonomy);
        fix(&mut self.index);
        fix(&mut self.profiles);
        for p in [&mut self.pages, &mut self.records, &mut self.desktop, &mut self.ui_dir]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.results == 0 {
            return Err(Error::Config("results must be >= 1".into()));
        }
        if self.backend_timeout_ms == 0 {
            return Err(Error::Config("backend_timeout_ms must be >= 1".into()));
        }
        if self.kmeans_max_iter == 0 {
            return Err(Error::Config("kmeans_max_iter must be >= 1".into()));
        }
        if self.expansion_cap == Some(0) {
            return Err(Error::Config("expansion_cap must be >= 1 when set".into()));
        }
        self.voting.validate()?;
        self.crawl.validate()
    }
}
