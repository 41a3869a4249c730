//! Repository lifecycle: the `.vcs` directory layout, configuration,
//! refs, the object store (loose files with pack fallback), the writer
//! lock and revision resolution.
//!
//! Layout under `.vcs/`: `config`, `refs/` (one file per branch),
//! `objects/` (loose store), `packs/`, `revlogs/`, `weaves/`, plus
//! `MERGE_STATE` while a conflicted merge awaits resolution and `lock`
//! while a writer is active.

mod files;
mod graph;
mod merge_driver;
mod transfer;
mod worktree;

pub use files::Annotated;
pub use graph::render_graph;
pub use merge_driver::{MergeOpts, MergeOutcome, Strategy};
pub use worktree::{Status, StatusKind};

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use crate::dag::HistoryDag;
use crate::error::{Error, Result};
use crate::object::{
    hash_object, resolve_prefix_in, Commit, HashAlgo, Kind, LooseStore, Object, ObjectId, Tree,
};
use crate::pack::PackDir;

pub const VCS_DIR: &str = ".vcs";

/// Which per-file history structure backs annotate and weave merges.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum StorageBackend {
    #[default]
    Revlog,
    Weave,
}

impl StorageBackend {
    pub fn name(&self) -> &'static str {
        match self {
            StorageBackend::Revlog => "revlog",
            StorageBackend::Weave => "weave",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "revlog" => Ok(StorageBackend::Revlog),
            "weave" => Ok(StorageBackend::Weave),
            other => Err(Error::Config(format!("unknown storage backend {other:?}"))),
        }
    }
}

/// Line-oriented `key = value` configuration.
#[derive(Clone, Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad config line {line:?}")))?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.remove(key);
    }
}

/// Where HEAD points.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Head {
    /// A branch name, possibly not yet born (no commit).
    Branch(String),
    Detached(ObjectId),
}

/// Exclusive repository writer guard (`.vcs/lock`).
pub struct RepoLock {
    path: PathBuf,
}

impl RepoLock {
    fn acquire(path: PathBuf) -> Result<Self> {
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(RepoLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::LockHeld(path))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for RepoLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub struct Repository {
    root: PathBuf,
    vcs: PathBuf,
    config: Config,
    loose: LooseStore,
    packs: PackDir,
}

impl Repository {
    /// Creates a fresh repository at `root` with an unborn `main`
    /// branch.
    pub fn init(root: &Path, backend: StorageBackend) -> Result<Repository> {
        let vcs = root.join(VCS_DIR);
        if vcs.exists() {
            return Err(Error::Usage(format!(
                "{} already contains a repository",
                root.display()
            )));
        }
        for sub in ["objects", "packs", "refs", "revlogs", "weaves"] {
            fs::create_dir_all(vcs.join(sub))?;
        }
        let mut config = Config::default();
        config.set("hash", HashAlgo::default().name());
        config.set("storage", backend.name());
        config.set("merge.strategy", "recursive");
        config.set("head", "ref:main");
        fs::write(vcs.join("config"), config.render())?;
        Repository::open_at(root)
    }

    /// Opens the repository whose `.vcs` directory sits at `root` or in
    /// the nearest ancestor of `root`.
    pub fn discover(start: &Path) -> Result<Repository> {
        let mut at = start.to_path_buf();
        loop {
            if at.join(VCS_DIR).is_dir() {
                return Repository::open_at(&at);
            }
            if !at.pop() {
                return Err(Error::NotARepository(start.to_path_buf()));
            }
        }
    }

    pub fn open_at(root: &Path) -> Result<Repository> {
        let vcs = root.join(VCS_DIR);
        if !vcs.is_dir() {
            return Err(Error::NotARepository(root.to_path_buf()));
        }
        let config = Config::parse(&fs::read_to_string(vcs.join("config"))?)?;
        let algo = HashAlgo::from_name(
            config
                .get("hash")
                .ok_or_else(|| Error::Config("missing hash algorithm".into()))?,
        )?;
        let loose = LooseStore::open(vcs.join("objects"), algo);
        let packs = PackDir::open(vcs.join("packs"), algo)?;
        Ok(Repository {
            root: root.to_path_buf(),
            vcs,
            config,
            loose,
            packs,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn vcs_dir(&self) -> &Path {
        &self.vcs
    }

    pub fn algo(&self) -> HashAlgo {
        self.loose.algo()
    }

    pub fn backend(&self) -> StorageBackend {
        self.config
            .get("storage")
            .and_then(|s| StorageBackend::from_name(s).ok())
            .unwrap_or_default()
    }

    pub fn default_strategy(&self) -> &str {
        self.config.get("merge.strategy").unwrap_or("recursive")
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn lock(&self) -> Result<RepoLock> {
        RepoLock::acquire(self.vcs.join("lock"))
    }

    fn save_config(&self) -> Result<()> {
        fs::write(self.vcs.join("config"), self.config.render())?;
        Ok(())
    }

    // -----------------------------------------------------------------
    // object access

    pub fn put_object(&self, kind: Kind, payload: &[u8]) -> Result<ObjectId> {
        self.loose.put(kind, payload)
    }

    pub fn has_object(&self, id: &ObjectId) -> bool {
        self.loose.contains(id) || self.packs.contains(id)
    }

    /// Reads an object, falling back from the loose store to packs.
    pub fn get_object(&self, id: &ObjectId) -> Result<(Kind, Vec<u8>)> {
        match self.loose.get(id) {
            Err(Error::UnknownObject(_)) => self.packs.get(id),
            other => other,
        }
    }

    pub fn packs_mut(&mut self) -> &mut PackDir {
        &mut self.packs
    }

    pub fn loose(&self) -> &LooseStore {
        &self.loose
    }

    pub fn all_object_ids(&self) -> Result<Vec<ObjectId>> {
        let mut ids = self.loose.list()?;
        ids.extend(self.packs.ids());
        ids.sort();
        ids.dedup();
        Ok(ids)
    }

    pub fn commit(&self, id: &ObjectId) -> Result<Commit> {
        match self.get_object(id)? {
            (Kind::Commit, payload) => Commit::parse(&payload),
            (kind, _) => Err(Error::MalformedObject {
                kind: "commit",
                reason: format!("{id} is a {}", kind.name()),
            }),
        }
    }

    pub fn tree(&self, id: &ObjectId) -> Result<Tree> {
        match self.get_object(id)? {
            (Kind::Tree, payload) => Tree::parse(&payload),
            (kind, _) => Err(Error::MalformedObject {
                kind: "tree",
                reason: format!("{id} is a {}", kind.name()),
            }),
        }
    }

    pub fn blob(&self, id: &ObjectId) -> Result<Vec<u8>> {
        match self.get_object(id)? {
            (Kind::Blob, payload) => Ok(payload),
            (kind, _) => Err(Error::MalformedObject {
                kind: "blob",
                reason: format!("{id} is a {}", kind.name()),
            }),
        }
    }

    pub fn store_object(&self, obj: &Object) -> Result<ObjectId> {
        let payload = obj.serialize();
        let id = self.put_object(obj.kind(), &payload)?;
        debug_assert_eq!(id, hash_object(self.algo(), obj.kind(), &payload));
        Ok(id)
    }

    // -----------------------------------------------------------------
    // refs and HEAD

    fn ref_path(&self, name: &str) -> Result<PathBuf> {
        validate_branch_name(name)?;
        Ok(self.vcs.join("refs").join(name))
    }

    pub fn read_ref(&self, name: &str) -> Result<ObjectId> {
        let path = self.ref_path(name)?;
        let text = fs::read_to_string(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::UnknownRef(name.to_string())
            } else {
                e.into()
            }
        })?;
        ObjectId::from_hex(text.trim())
    }

    pub fn write_ref(&self, name: &str, id: ObjectId) -> Result<()> {
        if !self.has_object(&id) {
            return Err(Error::UnknownCommit(id.to_hex()));
        }
        let path = self.ref_path(name)?;
        fs::create_dir_all(path.parent().unwrap())?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, format!("{}\n", id.to_hex()))?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// All branches, name to head id, including `remote/` tracking refs.
    pub fn branches(&self) -> Result<BTreeMap<String, ObjectId>> {
        let mut out = BTreeMap::new();
        let base = self.vcs.join("refs");
        let mut stack = vec![base.clone()];
        while let Some(dir) = stack.pop() {
            let entries = match fs::read_dir(&dir) {
                Ok(e) => e,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => return Err(e.into()),
            };
            for entry in entries {
                let entry = entry?;
                let path = entry.path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let name = path
                        .strip_prefix(&base)
                        .unwrap()
                        .to_string_lossy()
                        .replace('\\', "/");
                    let text = fs::read_to_string(&path)?;
                    out.insert(name, ObjectId::from_hex(text.trim())?);
                }
            }
        }
        Ok(out)
    }

    pub fn head(&self) -> Result<Head> {
        match self.config.get("head") {
            Some(v) => match v.strip_prefix("ref:") {
                Some(name) => Ok(Head::Branch(name.to_string())),
                None => Ok(Head::Detached(ObjectId::from_hex(v)?)),
            },
            None => Err(Error::Config("missing head".into())),
        }
    }

    pub fn set_head(&mut self, head: Head) -> Result<()> {
        let value = match head {
            Head::Branch(name) => format!("ref:{name}"),
            Head::Detached(id) => id.to_hex(),
        };
        self.config.set("head", &value);
        self.save_config()
    }

    /// The commit HEAD points at; `None` on an unborn branch.
    pub fn head_commit(&self) -> Result<Option<ObjectId>> {
        match self.head()? {
            Head::Branch(name) => match self.read_ref(&name) {
                Ok(id) => Ok(Some(id)),
                Err(Error::UnknownRef(_)) => Ok(None),
                Err(e) => Err(e),
            },
            Head::Detached(id) => Ok(Some(id)),
        }
    }

    /// Moves HEAD's position: advances the branch ref, or repoints the
    /// detached head.
    pub fn advance_head(&mut self, id: ObjectId) -> Result<()> {
        match self.head()? {
            Head::Branch(name) => self.write_ref(&name, id),
            Head::Detached(_) => self.set_head(Head::Detached(id)),
        }
    }

    // -----------------------------------------------------------------
    // revision resolution

    /// Resolves a revision argument: a branch name, a full 40-digit id
    /// or a unique id prefix of at least 4 hex digits.
    pub fn resolve(&self, spec: &str) -> Result<ObjectId> {
        if let Ok(branches) = self.branches() {
            if let Some(id) = branches.get(spec) {
                return Ok(*id);
            }
        }
        if spec.len() == 40 {
            if let Ok(id) = ObjectId::from_hex(spec) {
                if self.has_object(&id) {
                    return Ok(id);
                }
                return Err(Error::UnknownObject(spec.to_string()));
            }
        }
        let ids = self.all_object_ids()?;
        resolve_prefix_in(&ids, spec).map_err(|e| match e {
            Error::BadPrefix(_) => Error::UnknownRef(spec.to_string()),
            other => other,
        })
    }

    /// Loads the commit DAG reachable from all refs plus `extra`.
    pub fn load_dag(&self, extra: &[ObjectId]) -> Result<HistoryDag> {
        let mut dag = HistoryDag::new();
        let branches = self.branches()?;
        let mut stack: Vec<ObjectId> = branches.values().copied().collect();
        stack.extend_from_slice(extra);
        // insert parents before children: explicit DFS with a done-set
        let mut visiting: Vec<(ObjectId, bool)> = stack.into_iter().map(|id| (id, false)).collect();
        while let Some((id, expanded)) = visiting.pop() {
            if dag.contains(&id) {
                continue;
            }
            let commit = self.commit(&id)?;
            if expanded {
                dag.add_node(id, &commit.parents, commit.timestamp)?;
            } else {
                visiting.push((id, true));
                for p in &commit.parents {
                    visiting.push((*p, false));
                }
            }
        }
        for (name, id) in branches {
            dag.set_branch(&name, id)?;
        }
        Ok(dag)
    }

    /// Checks that every object reachable from `heads` is readable;
    /// the id-closure audit used after transfers.
    pub fn closure_complete(&self, heads: &[ObjectId]) -> Result<usize> {
        let mut seen = std::collections::HashSet::new();
        let mut stack: Vec<ObjectId> = heads.to_vec();
        let mut count = 0usize;
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            count += 1;
            match self.get_object(&id)? {
                (Kind::Commit, payload) => {
                    let c = Commit::parse(&payload)?;
                    stack.push(c.tree);
                    stack.extend(c.parents);
                }
                (Kind::Tree, payload) => {
                    let t = Tree::parse(&payload)?;
                    stack.extend(t.entries.iter().map(|e| e.child));
                }
                (Kind::Blob, _) => {}
            }
        }
        Ok(count)
    }

    /// Runs garbage collection under the repository writer lock: packs
    /// everything reachable from branch heads, leaving unreachable
    /// objects loose unless `prune`.
    pub fn gc(&mut self, prune: bool) -> Result<crate::pack::GcStats> {
        let _lock = self.lock()?;
        let mut heads: Vec<ObjectId> = self.branches()?.values().copied().collect();
        if let Some(head) = self.head_commit()? {
            heads.push(head);
        }
        crate::pack::gc(&self.loose, &mut self.packs, &heads, prune)
    }
}

pub fn validate_branch_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '/'))
        && !name.starts_with('/')
        && !name.ends_with('/')
        && !name.contains("..");
    if ok {
        Ok(())
    } else {
        Err(Error::Usage(format!("invalid branch name {name:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_discover_and_config() {
        let dir = tempfile::tempdir().unwrap();
        Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
        let sub = dir.path().join("src").join("deep");
        fs::create_dir_all(&sub).unwrap();
        let repo = Repository::discover(&sub).unwrap();
        assert_eq!(repo.root(), dir.path());
        assert_eq!(repo.backend(), StorageBackend::Revlog);
        assert_eq!(repo.head().unwrap(), Head::Branch("main".into()));
        assert!(repo.head_commit().unwrap().is_none());
    }

    #[test]
    fn discover_outside_repo_fails() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            Repository::discover(dir.path()),
            Err(Error::NotARepository(_))
        ));
    }

    #[test]
    fn refs_round_trip_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
        let id = repo.put_object(Kind::Blob, b"x").unwrap();
        repo.write_ref("feature/x", id).unwrap();
        assert_eq!(repo.read_ref("feature/x").unwrap(), id);
        assert!(matches!(
            repo.read_ref("nope"),
            Err(Error::UnknownRef(_))
        ));
        assert!(repo.write_ref("../evil", id).is_err());
        let ghost = repo.algo().digest_parts(&[b"ghost"]);
        assert!(repo.write_ref("broken", ghost).is_err());
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
        let guard = repo.lock().unwrap();
        assert!(matches!(repo.lock(), Err(Error::LockHeld(_))));
        drop(guard);
        assert!(repo.lock().is_ok());
    }

    #[test]
    fn resolve_by_prefix_and_branch() {
        let dir = tempfile::tempdir().unwrap();
        let repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
        let id = repo.put_object(Kind::Blob, b"resolvable").unwrap();
        assert_eq!(repo.resolve(&id.to_hex()).unwrap(), id);
        assert_eq!(repo.resolve(&id.short(6)).unwrap(), id);
        assert!(repo.resolve("zzzz").is_err());
    }
}
