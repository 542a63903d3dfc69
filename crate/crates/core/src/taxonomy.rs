//! Category hierarchy, category-documents and the profile-topic level.
//!
//! Taxonomy files are UTF-8, tab separated: `path<TAB>title<TAB>description`.
//! Submitted pages live in a companion file with lines
//! `path<TAB>page_title<TAB>page_description`. Blank lines and lines starting
//! with `#` are ignored in both.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{tfidf_vector, TermVector, Tokenizer, Vocabulary};

pub const SEPARATOR: char = '/';

/// Depth of the categories used as profile topics (root is depth 0).
pub const PROFILE_DEPTH: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub path: String,
    pub title: String,
    pub description: String,
}

impl Category {
    pub fn depth(&self) -> usize {
        path_depth(&self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmittedPage {
    pub title: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    category: Category,
    parent: Option<usize>,
    children: Vec<usize>,
    pages: Vec<SubmittedPage>,
}

/// Number of separators in a path.
pub fn path_depth(path: &str) -> usize {
    path.matches(SEPARATOR).count()
}

/// Prefix of `path` holding its first `depth + 1` segments, if that deep.
pub fn ancestor_at_depth(path: &str, depth: usize) -> Option<&str> {
    if path_depth(path) < depth {
        return None;
    }
    match path.match_indices(SEPARATOR).nth(depth) {
        Some((idx, _)) => Some(&path[..idx]),
        None => Some(path),
    }
}

/// True when `path` equals `ancestor` or lies below it.
pub fn is_under(path: &str, ancestor: &str) -> bool {
    path == ancestor
        || (path.len() > ancestor.len()
            && path.starts_with(ancestor)
            && path[ancestor.len()..].starts_with(SEPARATOR))
}

/// Rooted category tree with submitted-page summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    nodes: Vec<Node>,
    by_path: HashMap<String, usize>,
    root: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryTree {
    pub path: String,
    pub title: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CategoryTree>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn check_path(path: &str) -> std::result::Result<(), String> {
    if path.is_empty() {
        return Err("empty path".into());
    }
    if path.split(SEPARATOR).any(|seg| seg.trim().is_empty()) {
        return Err(format!("malformed path {path:?}"));
    }
    Ok(())
}

fn clean_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

impl Taxonomy {
    /// Parses the category file and, optionally, the submitted-pages file.
    /// `source` names the inputs in error messages.
    pub fn parse(categories: &str, pages: Option<&str>, source: &str) -> Result<Self> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut by_path = HashMap::new();
        for (line_no, line) in content_lines(categories) {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() > 3 {
                return Err(Error::parse(source, line_no, "expected at most 3 tab-separated fields"));
            }
            let path = fields[0].trim();
            check_path(path).map_err(|m| Error::parse(source, line_no, m))?;
            if by_path.contains_key(path) {
                return Err(Error::DuplicateCategory(path.to_string()));
            }
            by_path.insert(path.to_string(), nodes.len());
            nodes.push(Node {
                category: Category {
                    path: path.to_string(),
                    title: fields.get(1).map_or("", |s| s.trim()).to_string(),
                    description: fields.get(2).map_or("", |s| s.trim()).to_string(),
                },
                parent: None,
                children: Vec::new(),
                pages: Vec::new(),
            });
        }

        let roots: Vec<usize> = (0..nodes.len())
            .filter(|&i| nodes[i].category.depth() == 0)
            .collect();
        if roots.len() != 1 {
            // A lone non-root path reports the missing parent instead.
            if let Some(orphan) = nodes.iter().find(|n| n.category.depth() > 0) {
                if roots.is_empty() {
                    return Err(Error::MissingParent(orphan.category.path.clone()));
                }
            }
            return Err(Error::RootCount(roots.len()));
        }

        for i in 0..nodes.len() {
            let path = nodes[i].category.path.clone();
            if let Some((parent_path, _)) = path.rsplit_once(SEPARATOR) {
                let parent = *by_path
                    .get(parent_path)
                    .ok_or_else(|| Error::MissingParent(path.clone()))?;
                nodes[i].parent = Some(parent);
                nodes[parent].children.push(i);
            }
        }

        if let Some(pages) = pages {
            let pages_source = format!("{source} (pages)");
            for (line_no, line) in content_lines(pages) {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() < 2 || fields.len() > 3 {
                    return Err(Error::parse(
                        &pages_source,
                        line_no,
                        "expected path, page title and optional description",
                    ));
                }
                let path = fields[0].trim();
                let &idx = by_path.get(path).ok_or_else(|| {
                    Error::parse(&pages_source, line_no, format!("unknown category {path}"))
                })?;
                nodes[idx].pages.push(SubmittedPage {
                    title: fields[1].trim().to_string(),
                    description: fields.get(2).map_or("", |s| s.trim()).to_string(),
                });
            }
        }

        Ok(Taxonomy {
            nodes,
            by_path,
            root: roots[0],
        })
    }

    pub fn load(categories: &Path, pages: Option<&Path>) -> Result<Self> {
        let cat_text = std::fs::read_to_string(categories).map_err(|e| Error::io(categories, e))?;
        let page_text = pages
            .map(|p| std::fs::read_to_string(p).map_err(|e| Error::io(p, e)))
            .transpose()?;
        Self::parse(&cat_text, page_text.as_deref(), &categories.display().to_string())
    }

    /// Serializes back to the (categories, pages) file pair.
    pub fn to_files(&self) -> (String, String) {
        let mut cats = String::new();
        let mut pages = String::new();
        for node in &self.nodes {
            let c = &node.category;
            let _ = writeln!(
                cats,
                "{}\t{}\t{}",
                c.path,
                clean_field(&c.title),
                clean_field(&c.description)
            );
            for p in &node.pages {
                let _ = writeln!(
                    pages,
                    "{}\t{}\t{}",
                    c.path,
                    clean_field(&p.title),
                    clean_field(&p.description)
                );
            }
        }
        (cats, pages)
    }

    pub fn save(&self, categories: &Path, pages: &Path) -> Result<()> {
        let (cats, page_text) = self.to_files();
        std::fs::write(categories, cats).map_err(|e| Error::io(categories, e))?;
        std::fs::write(pages, page_text).map_err(|e| Error::io(pages, e))?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &Category {
        &self.nodes[self.root].category
    }

    pub fn contains(&self, path: &str) -> bool {
        self.by_path.contains_key(path)
    }

    pub fn get(&self, path: &str) -> Option<&Category> {
        self.by_path.get(path).map(|&i| &self.nodes[i].category)
    }

    /// Categories in file order.
    pub fn categories(&self) -> impl Iterator<Item = &Category> {
        self.nodes.iter().map(|n| &n.category)
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.parent.is_some()).count()
    }

    pub fn pages(&self, path: &str) -> &[SubmittedPage] {
        self.by_path
            .get(path)
            .map_or(&[], |&i| self.nodes[i].pages.as_slice())
    }

    pub fn children(&self, path: &str) -> Vec<&Category> {
        self.by_path.get(path).map_or_else(Vec::new, |&i| {
            self.nodes[i]
                .children
                .iter()
                .map(|&c| &self.nodes[c].category)
                .collect()
        })
    }

    pub fn is_leaf(&self, path: &str) -> bool {
        self.by_path
            .get(path)
            .is_some_and(|&i| self.nodes[i].children.is_empty())
    }

    /// `path` and every category below it, preorder.
    pub fn subtree(&self, path: &str) -> Vec<&Category> {
        let mut out = Vec::new();
        let Some(&start) = self.by_path.get(path) else {
            return out;
        };
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            out.push(&self.nodes[i].category);
            stack.extend(self.nodes[i].children.iter().rev());
        }
        out
    }

    /// Categories exactly two levels below the root.
    pub fn profile_topics(&self) -> Vec<&Category> {
        self.at_depth(PROFILE_DEPTH)
    }

    pub fn at_depth(&self, depth: usize) -> Vec<&Category> {
        self.categories().filter(|c| c.depth() == depth).collect()
    }

    /// Depth actually used for profile topics: two, or one when the tree is
    /// too shallow to have second-level categories.
    pub fn profile_depth(&self) -> usize {
        if self.categories().any(|c| c.depth() == PROFILE_DEPTH) {
            PROFILE_DEPTH
        } else {
            1
        }
    }

    pub fn effective_profile_topics(&self) -> Vec<&Category> {
        self.at_depth(self.profile_depth())
    }

    /// The profile topic a category falls under, if it is deep enough.
    pub fn topic_of<'a>(&self, path: &'a str) -> Option<&'a str> {
        ancestor_at_depth(path, self.profile_depth())
    }

    /// Categories that get a category-document: every leaf plus any category
    /// with submitted pages, the root excluded, optionally capped at a depth.
    pub fn classification_targets(&self, max_depth: Option<usize>) -> Vec<&Category> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(i, n)| i != self.root && (n.children.is_empty() || !n.pages.is_empty()))
            .map(|(_, n)| &n.category)
            .filter(|c| max_depth.is_none_or(|d| c.depth() <= d))
            .collect()
    }

    /// Title, description and every submitted page title and description.
    pub fn category_text(&self, path: &str) -> Result<String> {
        let &i = self
            .by_path
            .get(path)
            .ok_or_else(|| Error::UnknownCategory(path.to_string()))?;
        let node = &self.nodes[i];
        let mut parts = vec![node.category.title.as_str(), node.category.description.as_str()];
        for p in &node.pages {
            parts.push(&p.title);
            parts.push(&p.description);
        }
        Ok(parts.join("\n"))
    }

    /// Concatenated category text over the whole subtree of `path`.
    pub fn subtree_text(&self, path: &str) -> Result<String> {
        if !self.contains(path) {
            return Err(Error::UnknownCategory(path.to_string()));
        }
        let texts: Vec<String> = self
            .subtree(path)
            .into_iter()
            .map(|c| self.category_text(&c.path))
            .collect::<Result<_>>()?;
        Ok(texts.join("\n"))
    }

    pub fn tree(&self) -> CategoryTree {
        fn build(tax: &Taxonomy, i: usize) -> CategoryTree {
            let n = &tax.nodes[i];
            CategoryTree {
                path: n.category.path.clone(),
                title: n.category.title.clone(),
                children: n.children.iter().map(|&c| build(tax, c)).collect(),
            }
        }
        build(self, self.root)
    }
}

/// A category and its tf-idf exemplar vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDocument {
    pub category: Category,
    pub vector: TermVector,
}

pub fn category_document(
    taxonomy: &Taxonomy,
    path: &str,
    vocab: &Vocabulary,
    tokenizer: &Tokenizer,
) -> Result<CategoryDocument> {
    let category = taxonomy
        .get(path)
        .ok_or_else(|| Error::UnknownCategory(path.to_string()))?
        .clone();
    let text = taxonomy.category_text(path)?;
    Ok(CategoryDocument {
        category,
        vector: tfidf_vector(&tokenizer.tokenize(&text), vocab),
    })
}
