#![allow(dead_code)]

use std::path::{Path, PathBuf};

use isf_core::pipeline::{build_crawl_index, PipelineConfig};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Fixture config with every writable path inside a fresh temp dir.
pub fn fixture_config() -> (tempfile::TempDir, PipelineConfig) {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::load(&fixtures().join("isf.toml")).unwrap();
    cfg.index = dir.path().join("index.jsonl");
    cfg.profiles = dir.path().join("profiles");
    build_crawl_index(&fixtures().join("corpus/rdb.jsonl"), &cfg.index).unwrap();
    (dir, cfg)
}
