//! Local-filesystem backend: indexes the text files under a directory.

use std::path::{Path, PathBuf};

use async_trait::async_trait;
use walkdir::WalkDir;

use super::backend::SearchBackend;
use super::document::{Document, SourceTag};
use super::inverted::{IndexWriter, InvertedIndex};
use super::ranked::RankedList;
use crate::error::{Error, Result};

const TEXT_EXTENSIONS: &[&str] = &["txt", "md", "text"];

#[derive(Debug)]
pub struct DesktopBackend {
    root: PathBuf,
    index: InvertedIndex,
}

impl DesktopBackend {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let abs = root.canonicalize().map_err(|e| Error::io(&root, e))?;
        let mut files: Vec<PathBuf> = WalkDir::new(&abs)
            .into_iter()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().is_file())
            .map(|e| e.into_path())
            .filter(|p| {
                p.extension()
                    .and_then(|x| x.to_str())
                    .is_some_and(|x| TEXT_EXTENSIONS.contains(&x.to_ascii_lowercase().as_str()))
            })
            .collect();
        files.sort();
        let mut w = IndexWriter::new();
        for path in files {
            w.add(file_document(&abs, &path)?)?;
        }
        Ok(DesktopBackend {
            root: abs,
            index: w.commit(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }
}

/// Title is the first non-empty line, body the whole file.
fn file_document(root: &Path, path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rel = path.strip_prefix(root).unwrap_or(path).to_string_lossy().into_owned();
    let title = text
        .lines()
        .map(|l| l.trim_start_matches('#').trim())
        .find(|l| !l.is_empty())
        .unwrap_or(&rel)
        .to_string();
    let url = url::Url::from_file_path(path)
        .map(String::from)
        .unwrap_or_else(|_| format!("file://{}", path.display()));
    Ok(Document::new(rel, url, title, text, SourceTag::Desktop))
}

#[async_trait]
impl SearchBackend for DesktopBackend {
    async fn search(&self, query: &str, k: usize) -> Result<RankedList> {
        Ok(self.index.search(query, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[tokio::test]
    async fn indexes_text_files_only() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("notes.txt"), "Jaguar field notes\nSpotted a jaguar near the river").unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("sub/ups.md"), "# UPS manual\nPower supply maintenance").unwrap();
        std::fs::write(dir.path().join("image.png"), [0u8, 1, 2]).unwrap();
        let b = DesktopBackend::open(dir.path()).unwrap();
        assert_eq!(b.len(), 2);
        let res = b.search("jaguar", 5).await.unwrap();
        assert_eq!(res.entries.len(), 1);
        assert_eq!(res.entries[0].doc.title, "Jaguar field notes");
        assert!(res.entries[0].doc.url.starts_with("file://"));
        let res = b.search("power supply", 5).await.unwrap();
        assert_eq!(res.entries[0].doc.id, format!("sub{}ups.md", std::path::MAIN_SEPARATOR));
        assert_eq!(res.entries[0].doc.title, "UPS manual");
    }
}
