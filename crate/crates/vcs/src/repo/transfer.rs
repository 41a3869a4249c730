//! The distributed model over local filesystem paths: clone, pull and
//! push move objects and refs between full repositories.
//!
//! Transfers are id-complete: the missing set is the difference of the
//! reachability closures, and nothing already present is copied twice.
//! Pull never rewrites local history (it only adds objects and moves
//! the `remote/` tracking ref before merging); push refuses anything
//! but a fast-forward of the remote ref.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::object::{Commit, Kind, ObjectId, Tree};
use crate::repo::{Head, MergeOpts, MergeOutcome, Repository};

impl Repository {
    /// Copies everything reachable from `head` that `self` is missing
    /// out of `src`, returning the copied commit ids oldest-first
    /// (already integrated into the file-history backend).
    pub fn fetch_objects(&self, src: &Repository, head: &ObjectId) -> Result<Vec<ObjectId>> {
        let mut new_commits = Vec::new();
        let mut stack = vec![*head];
        let mut seen = std::collections::HashSet::new();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) || self.has_object(&id) {
                continue;
            }
            let (kind, payload) = src.get_object(&id)?;
            self.put_object(kind, &payload)?;
            match kind {
                Kind::Commit => {
                    let c = Commit::parse(&payload)?;
                    stack.push(c.tree);
                    stack.extend(c.parents.iter().copied());
                    new_commits.push(id);
                }
                Kind::Tree => {
                    stack.extend(Tree::parse(&payload)?.entries.iter().map(|e| e.child));
                }
                Kind::Blob => {}
            }
        }
        // integrate oldest-first so file-history parents exist
        let dag = self.load_dag(&[*head])?;
        let mut order = dag.toposort(&[*head])?;
        order.reverse();
        order.retain(|id| new_commits.contains(id));
        for id in &order {
            self.integrate_commit_files(id)?;
        }
        Ok(order)
    }

    /// Clones this repository to `dst`: all objects, refs, config and
    /// file histories, with the working tree checked out at the source
    /// HEAD.
    pub fn clone_to(&self, dst: &Path) -> Result<Repository> {
        if dst.join(super::VCS_DIR).exists() {
            return Err(Error::Usage(format!(
                "{} already contains a repository",
                dst.display()
            )));
        }
        fs::create_dir_all(dst)?;
        let src_vcs = self.vcs_dir();
        let dst_vcs = dst.join(super::VCS_DIR);
        for sub in ["objects", "packs", "refs", "revlogs", "weaves"] {
            copy_dir(&src_vcs.join(sub), &dst_vcs.join(sub))?;
        }
        fs::copy(src_vcs.join("config"), dst_vcs.join("config"))?;

        let cloned = Repository::open_at(dst)?;
        if let Some(head) = cloned.head_commit()? {
            cloned.materialize(&head)?;
        }
        Ok(cloned)
    }

    /// Fetches `branch` (default: the current branch) from the remote,
    /// updates the `remote/<branch>` tracking ref and merges it into
    /// the current head.
    pub fn pull(
        &mut self,
        remote_path: &Path,
        branch: Option<&str>,
        opts: &MergeOpts,
    ) -> Result<(MergeOutcome, ObjectId)> {
        let remote = open_remote(remote_path)?;
        let branch_name = match branch {
            Some(b) => b.to_string(),
            None => self.current_branch_name()?,
        };
        let remote_head = remote.read_ref(&branch_name)?;

        {
            let _lock = self.lock()?;
            self.fetch_objects(&remote, &remote_head)?;
            let tracking = format!("remote/{branch_name}");
            self.write_ref(&tracking, remote_head)?;
        }
        let tracking = format!("remote/{branch_name}");

        if self.head_commit()?.is_none() {
            // unborn branch: adopt the remote head as a fast-forward
            let _lock = self.lock()?;
            self.materialize(&remote_head)?;
            self.advance_head_or_create(remote_head)?;
            return Ok((MergeOutcome::FastForward(remote_head), remote_head));
        }
        let outcome = self.merge(&tracking, opts)?;
        Ok((outcome, remote_head))
    }

    /// Pushes `branch` (default: the current branch) to the remote.
    /// The remote ref must be absent or an ancestor of the pushed head;
    /// anything else is rejected with instructions to pull first.
    pub fn push(&mut self, remote_path: &Path, branch: Option<&str>) -> Result<ObjectId> {
        let remote = open_remote(remote_path)?;
        let branch_name = match branch {
            Some(b) => b.to_string(),
            None => self.current_branch_name()?,
        };
        let local_head = self.read_ref(&branch_name)?;

        match remote.read_ref(&branch_name) {
            Ok(remote_head) => {
                // ancestry is checked locally; fetch the remote head if
                // some other clone advanced it past our knowledge
                if !self.has_object(&remote_head) {
                    let _lock = self.lock()?;
                    self.fetch_objects(&remote, &remote_head)?;
                }
                let dag = self.load_dag(&[local_head, remote_head])?;
                if !dag.is_ancestor(&remote_head, &local_head)? {
                    return Err(Error::NonFastForwardPush {
                        branch: branch_name,
                    });
                }
            }
            Err(Error::UnknownRef(_)) => {}
            Err(e) => return Err(e),
        }

        let _remote_lock = remote.lock()?;
        remote.fetch_objects(self, &local_head)?;
        remote.write_ref(&branch_name, local_head)?;
        Ok(local_head)
    }

    fn current_branch_name(&self) -> Result<String> {
        match self.head()? {
            Head::Branch(name) => Ok(name),
            Head::Detached(_) => Err(Error::Usage(
                "detached head: name the branch explicitly".into(),
            )),
        }
    }

    /// Advances the current branch, creating its ref if unborn.
    fn advance_head_or_create(&mut self, id: ObjectId) -> Result<()> {
        match self.head()? {
            Head::Branch(name) => self.write_ref(&name, id),
            Head::Detached(_) => self.set_head(Head::Detached(id)),
        }
    }
}

fn open_remote(path: &Path) -> Result<Repository> {
    Repository::open_at(path).map_err(|_| Error::UnknownRemote(path.to_path_buf()))
}

fn copy_dir(src: &Path, dst: &Path) -> Result<()> {
    fs::create_dir_all(dst)?;
    if !src.exists() {
        return Ok(());
    }
    for entry in fs::read_dir(src)? {
        let entry = entry?;
        let to = dst.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            copy_dir(&entry.path(), &to)?;
        } else {
            fs::copy(entry.path(), to)?;
        }
    }
    Ok(())
}
