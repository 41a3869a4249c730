//! Working tree operations: snapshotting, status, checkout and commit.
//!
//! A commit always snapshots the whole tree; there is no staging area.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::object::{
    Blob, Commit, EntryKind, FileMode, Kind, Object, ObjectId, Tree, TreeEntry,
};
use crate::repo::{Head, Repository, VCS_DIR};

/// One status entry: how a working-tree path differs from HEAD.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum StatusKind {
    Added,
    Modified,
    Deleted,
}

#[derive(Clone, Debug, Default)]
pub struct Status {
    pub entries: Vec<(String, StatusKind)>,
}

impl Status {
    pub fn is_clean(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Repository {
    /// The working tree as path to (content, mode), paths `/`-separated
    /// and sorted. The `.vcs` directory is invisible; symlinks and
    /// other special files are outside the model and skipped.
    pub fn worktree_files(&self) -> Result<BTreeMap<String, (Vec<u8>, FileMode)>> {
        let mut out = BTreeMap::new();
        let mut stack: Vec<PathBuf> = vec![self.root().to_path_buf()];
        while let Some(dir) = stack.pop() {
            for entry in fs::read_dir(&dir)? {
                let entry = entry?;
                let path = entry.path();
                let name = entry.file_name().to_string_lossy().into_owned();
                if dir == self.root() && name == VCS_DIR {
                    continue;
                }
                let meta = entry.metadata()?;
                if meta.is_dir() {
                    stack.push(path);
                } else if meta.is_file() {
                    let rel = path
                        .strip_prefix(self.root())
                        .unwrap()
                        .components()
                        .map(|c| c.as_os_str().to_string_lossy())
                        .collect::<Vec<_>>()
                        .join("/");
                    out.insert(rel, (fs::read(&path)?, file_mode(&meta)));
                }
            }
        }
        Ok(out)
    }

    /// Flattens the tree of a commit (or a tree id) to path keyed
    /// entries.
    pub fn tree_files(&self, commit_or_tree: &ObjectId) -> Result<BTreeMap<String, (ObjectId, FileMode)>> {
        let tree_id = match self.get_object(commit_or_tree)? {
            (Kind::Commit, payload) => Commit::parse(&payload)?.tree,
            (Kind::Tree, _) => *commit_or_tree,
            (kind, _) => {
                return Err(Error::MalformedObject {
                    kind: "tree",
                    reason: format!("{commit_or_tree} is a {}", kind.name()),
                })
            }
        };
        let mut out = BTreeMap::new();
        let mut stack: Vec<(String, ObjectId)> = vec![(String::new(), tree_id)];
        while let Some((prefix, id)) = stack.pop() {
            for entry in self.tree(&id)?.entries {
                let path = if prefix.is_empty() {
                    entry.name.clone()
                } else {
                    format!("{prefix}/{}", entry.name)
                };
                match entry.kind {
                    EntryKind::Tree => stack.push((path, entry.child)),
                    EntryKind::Blob => {
                        out.insert(path, (entry.child, entry.mode));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Tree contents with blob payloads loaded.
    pub fn tree_contents(&self, commit_or_tree: &ObjectId) -> Result<BTreeMap<String, Vec<u8>>> {
        let mut out = BTreeMap::new();
        for (path, (blob, _)) in self.tree_files(commit_or_tree)? {
            out.insert(path, self.blob(&blob)?);
        }
        Ok(out)
    }

    /// Writes blob and per-directory tree objects for a path keyed file
    /// map, returning the root tree id.
    pub fn build_tree(&self, files: &BTreeMap<String, (Vec<u8>, FileMode)>) -> Result<ObjectId> {
        #[derive(Default)]
        struct DirNode {
            files: Vec<(String, ObjectId, FileMode)>,
            dirs: BTreeMap<String, DirNode>,
        }
        let mut root = DirNode::default();
        for (path, (content, mode)) in files {
            let blob = self.store_object(&Object::Blob(Blob {
                content: content.clone(),
            }))?;
            let mut node = &mut root;
            let parts: Vec<&str> = path.split('/').collect();
            for part in &parts[..parts.len() - 1] {
                node = node.dirs.entry(part.to_string()).or_default();
            }
            node.files
                .push((parts[parts.len() - 1].to_string(), blob, *mode));
        }

        fn write_node(repo: &Repository, node: &DirNode) -> Result<ObjectId> {
            let mut entries = Vec::new();
            for (name, child) in &node.dirs {
                entries.push(TreeEntry {
                    name: name.clone(),
                    mode: FileMode::Normal,
                    kind: EntryKind::Tree,
                    child: write_node(repo, child)?,
                });
            }
            for (name, blob, mode) in &node.files {
                entries.push(TreeEntry {
                    name: name.clone(),
                    mode: *mode,
                    kind: EntryKind::Blob,
                    child: *blob,
                });
            }
            repo.store_object(&Object::Tree(Tree::new(entries)?))
        }
        write_node(self, &root)
    }

    /// Dirty-state map of the working tree against HEAD. Never mutates
    /// anything.
    pub fn status(&self) -> Result<Status> {
        let work = self.worktree_files()?;
        let tracked = match self.head_commit()? {
            Some(head) => self.tree_files(&head)?,
            None => BTreeMap::new(),
        };
        let mut entries = Vec::new();
        for (path, (content, mode)) in &work {
            match tracked.get(path) {
                None => entries.push((path.clone(), StatusKind::Added)),
                Some((blob, tracked_mode)) => {
                    if tracked_mode != mode || &self.blob(blob)? != content {
                        entries.push((path.clone(), StatusKind::Modified));
                    }
                }
            }
        }
        for path in tracked.keys() {
            if !work.contains_key(path) {
                entries.push((path.clone(), StatusKind::Deleted));
            }
        }
        entries.sort();
        Ok(Status { entries })
    }

    /// Replaces the working tree with the given commit's content.
    pub fn materialize(&self, commit: &ObjectId) -> Result<()> {
        let target = self.tree_files(commit)?;
        let current = self.worktree_files()?;
        for path in current.keys() {
            if !target.contains_key(path) {
                fs::remove_file(self.root().join(path))?;
                // prune now-empty parent directories
                let mut dir = self.root().join(path);
                while dir.pop() && dir != self.root() && fs::remove_dir(&dir).is_ok() {}
            }
        }
        for (path, (blob, mode)) in &target {
            let full = self.root().join(path);
            if let Some(parent) = full.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(&full, self.blob(blob)?)?;
            set_file_mode(&full, *mode)?;
        }
        Ok(())
    }

    /// Switches HEAD to a branch or revision, refusing to discard
    /// uncommitted changes unless forced.
    pub fn checkout(&mut self, target: &str, force: bool) -> Result<()> {
        if !force && !self.status()?.is_clean() {
            return Err(Error::DirtyTree);
        }
        let branches = self.branches()?;
        let (head, commit) = match branches.get(target) {
            Some(id) => (Head::Branch(target.to_string()), *id),
            None => {
                let id = self.resolve(target)?;
                if self.commit(&id).is_err() {
                    return Err(Error::UnknownRef(target.to_string()));
                }
                (Head::Detached(id), id)
            }
        };
        self.materialize(&commit)?;
        self.set_head(head)?;
        Ok(())
    }

    /// Creates a branch pointing at `rev` (default HEAD).
    pub fn create_branch(&self, name: &str, rev: Option<&str>) -> Result<ObjectId> {
        let id = match rev {
            Some(spec) => self.resolve(spec)?,
            None => self
                .head_commit()?
                .ok_or_else(|| Error::Usage("no commit to branch from".into()))?,
        };
        self.commit(&id)?;
        if self.read_ref(name).is_ok() {
            return Err(Error::Usage(format!("branch {name} already exists")));
        }
        self.write_ref(name, id)?;
        Ok(id)
    }

    /// Snapshots the working tree as a new commit on HEAD. A pending
    /// merge contributes its second parent and is cleared. Refuses an
    /// empty commit (tree identical to the sole parent) outside merge
    /// resolution.
    pub fn commit_worktree(
        &mut self,
        message: &str,
        author: &str,
        timestamp: i64,
    ) -> Result<ObjectId> {
        let _lock = self.lock()?;
        let tree = self.build_tree(&self.worktree_files()?)?;
        let mut parents: Vec<ObjectId> = self.head_commit()?.into_iter().collect();
        let merge_parent = self.merge_state()?;
        if let Some(theirs) = merge_parent {
            parents.push(theirs);
        } else if let [parent] = parents[..] {
            if self.commit(&parent)?.tree == tree {
                return Err(Error::Usage("nothing to commit".into()));
            }
        }
        let commit = Commit {
            tree,
            parents,
            author: author.to_string(),
            timestamp,
            message: message.to_string(),
        };
        let id = self.store_object(&Object::Commit(commit))?;
        self.integrate_commit_files(&id)?;
        match self.head()? {
            Head::Branch(name) => self.write_ref(&name, id)?,
            Head::Detached(_) => self.set_head(Head::Detached(id))?,
        }
        if merge_parent.is_some() {
            self.clear_merge_state()?;
        }
        Ok(id)
    }
}

#[cfg(unix)]
fn file_mode(meta: &fs::Metadata) -> FileMode {
    use std::os::unix::fs::PermissionsExt;
    if meta.permissions().mode() & 0o111 != 0 {
        FileMode::Executable
    } else {
        FileMode::Normal
    }
}

#[cfg(not(unix))]
fn file_mode(_meta: &fs::Metadata) -> FileMode {
    FileMode::Normal
}

#[cfg(unix)]
fn set_file_mode(path: &Path, mode: FileMode) -> Result<()> {
    use std::os::unix::fs::PermissionsExt;
    let bits = match mode {
        FileMode::Executable => 0o755,
        FileMode::Normal => 0o644,
    };
    fs::set_permissions(path, fs::Permissions::from_mode(bits))?;
    Ok(())
}

#[cfg(not(unix))]
fn set_file_mode(_path: &Path, _mode: FileMode) -> Result<()> {
    Ok(())
}
