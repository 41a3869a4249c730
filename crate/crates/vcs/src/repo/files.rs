//! Per-file history: keeping the configured storage backend (revlog or
//! weave) in step with the commit DAG, and the annotate operation.
//!
//! Backends are derived data: the object store stays authoritative for
//! content, while revlogs serve delta-compressed per-file storage and
//! weaves serve cheap annotation and weave merges. File histories are
//! keyed by a hash of the tracked path.

use std::collections::HashMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::object::ObjectId;
use crate::repo::{Repository, StorageBackend};
use crate::revlog::{Revlog, DEFAULT_CAP_MULTIPLIER};
use crate::textdiff::{split_lines, Line};
use crate::weave::Weave;

/// One annotated output line.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Annotated {
    pub line: String,
    pub commit: ObjectId,
    pub author: String,
}

impl Repository {
    fn path_key(&self, path: &str) -> String {
        self.algo().digest_parts(&[path.as_bytes()]).to_hex()
    }

    pub fn weave_path(&self, path: &str) -> PathBuf {
        self.vcs_dir()
            .join("weaves")
            .join(format!("{}.weave", self.path_key(path)))
    }

    pub fn revlog_base(&self, path: &str) -> PathBuf {
        self.vcs_dir().join("revlogs").join(self.path_key(path))
    }

    pub fn open_revlog(&self, path: &str) -> Result<Revlog> {
        Revlog::open(&self.revlog_base(path), self.algo(), DEFAULT_CAP_MULTIPLIER)
    }

    pub fn load_weave(&self, path: &str) -> Result<Weave> {
        let file = self.weave_path(path);
        if file.exists() {
            Weave::load(&file)
        } else {
            Ok(Weave::new())
        }
    }

    /// Blob content of `path` at `commit`, if present.
    pub fn blob_at(&self, commit: &ObjectId, path: &str) -> Result<Option<Vec<u8>>> {
        match self.tree_files(commit)?.get(path) {
            Some((blob, _)) => Ok(Some(self.blob(blob)?)),
            None => Ok(None),
        }
    }

    fn lines_at(&self, commit: &ObjectId, path: &str) -> Result<Vec<Line>> {
        let bytes = self.blob_at(commit, path)?.unwrap_or_default();
        Ok(split_lines(&String::from_utf8_lossy(&bytes)))
    }

    /// Whether `commit` changes `path` relative to every parent
    /// (including creations and deletions; roots touch all their
    /// files).
    pub fn touches(&self, commit: &ObjectId, path: &str) -> Result<bool> {
        let here = self.tree_files(commit)?.get(path).map(|(b, _)| *b);
        let parsed = self.commit(commit)?;
        if parsed.parents.is_empty() {
            return Ok(here.is_some());
        }
        for parent in &parsed.parents {
            let there = self.tree_files(parent)?.get(path).map(|(b, _)| *b);
            if here == there {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The nearest ancestor of `at` (inclusive) that touched `path`:
    /// the commit that introduced the file version visible at `at`.
    /// `None` when the path does not exist at `at`.
    pub fn file_rev_at(&self, at: &ObjectId, path: &str) -> Result<Option<ObjectId>> {
        let mut cursor = *at;
        loop {
            let here = self.tree_files(&cursor)?.get(path).map(|(b, _)| *b);
            let blob = match here {
                Some(b) => b,
                None => return Ok(None),
            };
            let parsed = self.commit(&cursor)?;
            let mut unchanged_parent = None;
            for parent in &parsed.parents {
                let there = self.tree_files(parent)?.get(path).map(|(b, _)| *b);
                if there == Some(blob) {
                    unchanged_parent = Some(*parent);
                    break;
                }
            }
            match unchanged_parent {
                Some(parent) => cursor = parent,
                None => return Ok(Some(cursor)),
            }
        }
    }

    /// Brings the configured file-history backend up to date with one
    /// commit: every path the commit touches gains a file revision
    /// (deletions record empty content). Idempotent, so transfers can
    /// replay commits safely. Must run after the commit's ancestors
    /// have been integrated.
    pub fn integrate_commit_files(&self, commit: &ObjectId) -> Result<()> {
        let parsed = self.commit(commit)?;
        let here = self.tree_files(commit)?;
        let mut paths: std::collections::BTreeSet<String> = here.keys().cloned().collect();
        for parent in &parsed.parents {
            paths.extend(self.tree_files(parent)?.keys().cloned());
        }
        for path in paths {
            if !self.touches(commit, &path)? {
                continue;
            }
            let content = self.blob_at(commit, &path)?.unwrap_or_default();
            match self.backend() {
                StorageBackend::Revlog => {
                    let mut log = self.open_revlog(&path)?;
                    let parent_ids: Vec<ObjectId> = parsed
                        .parents
                        .iter()
                        .filter_map(|p| {
                            self.tree_files(p)
                                .ok()
                                .and_then(|t| t.get(&path).map(|(b, _)| *b))
                        })
                        .take(2)
                        .collect();
                    log.append(&content, &parent_ids)?;
                }
                StorageBackend::Weave => {
                    let mut weave = self.load_weave(&path)?;
                    if weave.contains_rev(commit) {
                        continue;
                    }
                    let parent_revs = self.file_history_revs(&parsed.parents, &weave)?;
                    let lines = split_lines(&String::from_utf8_lossy(&content));
                    weave.add_with_parents(*commit, &parent_revs, &lines)?;
                    weave.save(&self.weave_path(&path))?;
                }
            }
        }
        Ok(())
    }

    /// The maximal weave revisions among the ancestors of `from` (each
    /// inclusive): the file-history parents of a new revision. The walk
    /// stops at weave members, so dominated older revisions never
    /// appear.
    fn file_history_revs(&self, from: &[ObjectId], weave: &Weave) -> Result<Vec<ObjectId>> {
        let mut out: Vec<ObjectId> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut queue: std::collections::VecDeque<ObjectId> = from.iter().copied().collect();
        while let Some(at) = queue.pop_front() {
            if !seen.insert(at) {
                continue;
            }
            if weave.contains_rev(&at) {
                if !out.contains(&at) {
                    out.push(at);
                }
                continue;
            }
            queue.extend(self.commit(&at)?.parents);
        }
        Ok(out)
    }

    /// A weave for `path` covering the ancestry of `rev`, built on
    /// demand from commit history when the revlog backend is active
    /// (the stored weave is used directly otherwise).
    pub fn weave_for(&self, path: &str, rev: &ObjectId) -> Result<Weave> {
        if self.backend() == StorageBackend::Weave {
            let weave = self.load_weave(path)?;
            if !weave.revs().is_empty() {
                return Ok(weave);
            }
        }
        // transient weave: replay touching commits oldest-first
        let dag = self.load_dag(&[*rev])?;
        let order = {
            let mut order = dag.toposort(&[*rev])?;
            order.reverse();
            order
        };
        let mut weave = Weave::new();
        for commit in order {
            if !self.touches(&commit, path)? {
                continue;
            }
            let parsed = self.commit(&commit)?;
            let parent_revs = self.file_history_revs(&parsed.parents, &weave)?;
            let lines = self.lines_at(&commit, path)?;
            weave.add_with_parents(commit, &parent_revs, &lines)?;
        }
        Ok(weave)
    }

    /// Per-line attribution of `path` at `rev` to the commits that
    /// introduced each line.
    pub fn annotate(&self, path: &str, rev: &ObjectId) -> Result<Vec<Annotated>> {
        let target = self
            .file_rev_at(rev, path)?
            .ok_or_else(|| Error::Usage(format!("path {path:?} does not exist at {rev}")))?;
        let weave = self.weave_for(path, rev)?;
        let annotation = weave.annotate(&target)?;
        let mut authors: HashMap<ObjectId, String> = HashMap::new();
        let mut out = Vec::new();
        for (line, commit) in annotation.lines {
            let author = match authors.get(&commit) {
                Some(a) => a.clone(),
                None => {
                    let a = self.commit(&commit)?.author;
                    authors.insert(commit, a.clone());
                    a
                }
            };
            out.push(Annotated {
                line,
                commit,
                author,
            });
        }
        Ok(out)
    }
}
