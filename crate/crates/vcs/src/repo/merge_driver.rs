//! The merge command's driver: fast-forward handling, per-file content
//! merges under the configured strategy, scalar attribute merging for
//! the executable bit and rename pairing, and conflict bookkeeping via
//! `MERGE_STATE`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use crate::dag::FfStatus;
use crate::error::{Error, Result};
use crate::merge::{
    detect_renames, mark_merge, pcdv_merge, recursive_merge, three_way_merge, MergeLabels,
    MergeResult, ScalarMergeResult,
};
use crate::object::{FileMode, ObjectId};
use crate::repo::{Repository, StorageBackend};
use crate::textdiff::{split_lines, Line};

pub const RENAME_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    ThreeWay,
    Recursive,
    Pcdv,
}

impl Strategy {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "three-way" => Ok(Strategy::ThreeWay),
            "recursive" => Ok(Strategy::Recursive),
            "pcdv" => Ok(Strategy::Pcdv),
            other => Err(Error::Usage(format!("unknown merge strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MergeOpts {
    pub strategy: Strategy,
    /// Explicit base revision: cherry-pick plumbing. The result commit
    /// gets a single parent (the current head).
    pub base_override: Option<ObjectId>,
    pub author: String,
    pub timestamp: i64,
}

#[derive(Clone, Debug)]
pub enum MergeOutcome {
    AlreadyUpToDate,
    FastForward(ObjectId),
    Merged(ObjectId),
    /// Conflicted paths with a human-readable reason each; marker files
    /// are in the working tree and `MERGE_STATE` is set.
    Conflicts(Vec<(String, String)>),
}

impl Repository {
    /// Reads the pending merge's second parent, if a conflicted merge
    /// awaits resolution.
    pub fn merge_state(&self) -> Result<Option<ObjectId>> {
        let path = self.vcs_dir().join("MERGE_STATE");
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(path)?;
        for line in text.lines() {
            if let Some(hex) = line.strip_prefix("theirs ") {
                return Ok(Some(ObjectId::from_hex(hex.trim())?));
            }
        }
        Err(Error::Config("malformed MERGE_STATE".into()))
    }

    pub fn clear_merge_state(&self) -> Result<()> {
        let path = self.vcs_dir().join("MERGE_STATE");
        if path.exists() {
            fs::remove_file(path)?;
        }
        Ok(())
    }

    fn write_merge_state(&self, theirs: &ObjectId, label: &str) -> Result<()> {
        fs::write(
            self.vcs_dir().join("MERGE_STATE"),
            format!("theirs {}\nlabel {label}\n", theirs.to_hex()),
        )?;
        Ok(())
    }

    /// Merges `theirs` into the current head per the fast-forward
    /// rules: an ancestor is a no-op, a descendant repoints the branch
    /// without a merge node, and true divergence runs a content merge
    /// that auto-commits when clean.
    pub fn merge(&mut self, theirs_spec: &str, opts: &MergeOpts) -> Result<MergeOutcome> {
        if self.merge_state()?.is_some() {
            return Err(Error::ConflictsPending);
        }
        if !self.status()?.is_clean() {
            return Err(Error::DirtyTree);
        }
        let theirs = self.resolve(theirs_spec)?;
        self.commit(&theirs)?;
        let ours = self
            .head_commit()?
            .ok_or_else(|| Error::Usage("cannot merge into an unborn branch".into()))?;

        if let Some(base) = opts.base_override {
            return self.cherry_pick(ours, theirs, base, theirs_spec, opts);
        }

        let dag = self.load_dag(&[ours, theirs])?;
        match dag.ff_status(&ours, &theirs)? {
            FfStatus::AlreadyUpToDate => Ok(MergeOutcome::AlreadyUpToDate),
            FfStatus::FastForward => {
                let _lock = self.lock()?;
                self.materialize(&theirs)?;
                self.advance_head(theirs)?;
                Ok(MergeOutcome::FastForward(theirs))
            }
            FfStatus::NeedsMerge => self.true_merge(ours, theirs, theirs_spec, opts),
        }
    }

    fn cherry_pick(
        &mut self,
        ours: ObjectId,
        theirs: ObjectId,
        base: ObjectId,
        theirs_spec: &str,
        opts: &MergeOpts,
    ) -> Result<MergeOutcome> {
        self.commit(&base)?;
        let labels = MergeLabels::new(&ours.short(8), &theirs.short(8));
        let plan = self.plan_content_merge(Some(base), ours, theirs, &labels, opts)?;
        self.apply_merge_plan(
            plan,
            vec![ours],
            &format!("apply {} onto {}\n", theirs.short(8), ours.short(8)),
            theirs,
            theirs_spec,
            opts,
        )
    }

    fn true_merge(
        &mut self,
        ours: ObjectId,
        theirs: ObjectId,
        theirs_spec: &str,
        opts: &MergeOpts,
    ) -> Result<MergeOutcome> {
        let labels = MergeLabels::new(&ours.short(8), &theirs.short(8));
        let plan = self.plan_content_merge(None, ours, theirs, &labels, opts)?;
        self.apply_merge_plan(
            plan,
            vec![ours, theirs],
            &format!("merge {theirs_spec}\n"),
            theirs,
            theirs_spec,
            opts,
        )
    }

    fn apply_merge_plan(
        &mut self,
        plan: MergePlan,
        parents: Vec<ObjectId>,
        message: &str,
        theirs: ObjectId,
        theirs_spec: &str,
        opts: &MergeOpts,
    ) -> Result<MergeOutcome> {
        let _lock = self.lock()?;
        // write the merged tree to the working directory
        let current = self.worktree_files()?;
        for path in current.keys() {
            if !plan.files.contains_key(path) {
                fs::remove_file(self.root().join(path))?;
            }
        }
        for (path, (content, _mode)) in &plan.files {
            let full = self.root().join(path);
            if let Some(dir) = full.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&full, content)?;
        }
        set_modes(self, &plan.files)?;

        if plan.conflicts.is_empty() {
            let tree = self.build_tree(&plan.files)?;
            let commit = crate::object::Commit {
                tree,
                parents,
                author: opts.author.clone(),
                timestamp: opts.timestamp,
                message: message.to_string(),
            };
            let id = self.store_object(&crate::object::Object::Commit(commit))?;
            self.integrate_commit_files(&id)?;
            self.advance_head(id)?;
            Ok(MergeOutcome::Merged(id))
        } else {
            self.write_merge_state(&theirs, theirs_spec)?;
            Ok(MergeOutcome::Conflicts(plan.conflicts))
        }
    }
}

struct MergePlan {
    files: BTreeMap<String, (Vec<u8>, FileMode)>,
    conflicts: Vec<(String, String)>,
}

impl Repository {
    /// Computes the merged file set. `base_override` short-circuits
    /// base selection (cherry-pick); otherwise the base tree comes from
    /// the first merge-base candidate, while content-level bases follow
    /// the configured strategy.
    fn plan_content_merge(
        &self,
        base_override: Option<ObjectId>,
        ours: ObjectId,
        theirs: ObjectId,
        labels: &MergeLabels,
        opts: &MergeOpts,
    ) -> Result<MergePlan> {
        let dag = self.load_dag(&[ours, theirs])?;
        let base_candidates = match base_override {
            Some(b) => vec![b],
            None => dag.lca_candidates(&ours, &theirs).map_err(|e| match e {
                Error::EmptyResult => Error::UnrelatedHistories,
                other => other,
            })?,
        };
        let base = base_candidates.first().copied();

        // per-candidate trees: a side counts as unchanged only against
        // the candidate set, never against one arbitrarily chosen base
        let candidate_trees: Vec<BTreeMap<String, (ObjectId, FileMode)>> = base_candidates
            .iter()
            .map(|c| self.tree_files(c))
            .collect::<Result<_>>()?;
        let base_files = candidate_trees.first().cloned().unwrap_or_default();
        let our_files = self.tree_files(&ours)?;
        let their_files = self.tree_files(&theirs)?;

        // rename pairing per side, against the base tree
        let base_contents = self.contents_of(&base_files)?;
        let our_contents = self.contents_of(&our_files)?;
        let their_contents = self.contents_of(&their_files)?;
        let renames_ours = detect_renames(&base_contents, &our_contents, RENAME_THRESHOLD);
        let renames_theirs = detect_renames(&base_contents, &their_contents, RENAME_THRESHOLD);

        let mut files: BTreeMap<String, (Vec<u8>, FileMode)> = BTreeMap::new();
        let mut conflicts: Vec<(String, String)> = Vec::new();

        // name resolution: every base path renamed on either side maps
        // to a merged name via mark merge over {base, renaming heads}
        let mut name_map: BTreeMap<String, String> = BTreeMap::new(); // base path -> merged path
        let mut renamed_targets: BTreeSet<String> = BTreeSet::new();
        for rename in renames_ours.iter().chain(renames_theirs.iter()) {
            let ours_new = renames_ours
                .iter()
                .find(|r| r.old_path == rename.old_path)
                .map(|r| r.new_path.clone());
            let theirs_new = renames_theirs
                .iter()
                .find(|r| r.old_path == rename.old_path)
                .map(|r| r.new_path.clone());
            if name_map.contains_key(&rename.old_path) {
                continue;
            }
            let name_ours = ours_new.clone().unwrap_or_else(|| rename.old_path.clone());
            let name_theirs = theirs_new.clone().unwrap_or_else(|| rename.old_path.clone());
            // marks: the base named the file; a side that renamed it
            // explicitly set a new name at its head
            let mut marks = BTreeSet::new();
            if let Some(b) = base {
                marks.insert(b);
            }
            if ours_new.is_some() {
                marks.insert(ours);
            }
            if theirs_new.is_some() {
                marks.insert(theirs);
            }
            let merged_name = match mark_merge(&dag, &marks, &ours, &theirs, name_ours.clone(), name_theirs.clone()) {
                Ok(ScalarMergeResult::Value(name)) => name,
                Ok(ScalarMergeResult::Conflict { ours: a, theirs: b }) => {
                    conflicts.push((
                        rename.old_path.clone(),
                        format!("renamed to {a:?} on ours and {b:?} on theirs"),
                    ));
                    a
                }
                Err(Error::NoMarks) | Err(Error::UnknownCommit(_)) => name_ours.clone(),
                Err(e) => return Err(e),
            };
            renamed_targets.insert(merged_name.clone());
            if ours_new.is_some() || theirs_new.is_some() {
                name_map.insert(rename.old_path.clone(), merged_name);
            }
        }

        // all paths under consideration, in base coordinates where a
        // rename applies
        let mut paths: BTreeSet<String> = BTreeSet::new();
        paths.extend(base_files.keys().cloned());
        paths.extend(our_files.keys().cloned());
        paths.extend(their_files.keys().cloned());
        // a renamed file's new-side paths fold into its base path — but
        // only when every side holding that path reached it through the
        // rename; a same-named unrelated file on the other side must
        // stay a path of its own so it cannot be silently dropped
        let reverse_name: BTreeMap<String, String> = name_map.keys().flat_map(|old| {
                let mut v = Vec::new();
                if let Some(r) = renames_ours.iter().find(|r| &r.old_path == old) {
                    v.push((r.new_path.clone(), old.clone()));
                }
                if let Some(r) = renames_theirs.iter().find(|r| &r.old_path == old) {
                    v.push((r.new_path.clone(), old.clone()));
                }
                v
            })
            .collect();
        paths.retain(|p| {
            if !reverse_name.contains_key(p) {
                return true;
            }
            let ours_independent = our_files.contains_key(p)
                && !renames_ours.iter().any(|r| &r.new_path == p);
            let theirs_independent = their_files.contains_key(p)
                && !renames_theirs.iter().any(|r| &r.new_path == p);
            ours_independent || theirs_independent
        });

        // two sources may compete for one output name (a rename target
        // colliding with an unrelated add); the first writer wins and
        // the collision is surfaced as a conflict
        let mut place = |files: &mut BTreeMap<String, (Vec<u8>, FileMode)>,
                         conflicts: &mut Vec<(String, String)>,
                         path: String,
                         content: Vec<u8>,
                         mode: FileMode| {
            match files.get(&path) {
                Some((existing, _)) if *existing != content => {
                    conflicts.push((
                        path,
                        "multiple merged files compete for this name".into(),
                    ));
                }
                _ => {
                    files.insert(path, (content, mode));
                }
            }
        };

        for path in paths {
            let lookup = |files: &BTreeMap<String, (ObjectId, FileMode)>,
                          side_renames: &[crate::merge::RenameMatch]|
             -> Option<(ObjectId, FileMode)> {
                if let Some(entry) = files.get(&path) {
                    return Some(*entry);
                }
                side_renames
                    .iter()
                    .find(|r| r.old_path == path)
                    .and_then(|r| files.get(&r.new_path).copied())
            };
            let b = base_files.get(&path).copied();
            let o = lookup(&our_files, &renames_ours);
            let t = lookup(&their_files, &renames_theirs);
            let out_path = name_map.get(&path).cloned().unwrap_or_else(|| path.clone());

            let cand_blobs: Vec<Option<ObjectId>> = candidate_trees
                .iter()
                .map(|tree| tree.get(&path).map(|(id, _)| *id))
                .collect();
            let decision = self.merge_one_path(
                &path,
                &out_path,
                b,
                o,
                t,
                &cand_blobs,
                base_override.is_some(),
                ours,
                theirs,
                &dag,
                labels,
                opts,
            )?;
            match decision {
                PathDecision::Keep(content, mode) => {
                    place(&mut files, &mut conflicts, out_path, content, mode);
                }
                PathDecision::Delete => {}
                PathDecision::Conflict(content, mode, reason) => {
                    place(&mut files, &mut conflicts, out_path.clone(), content, mode);
                    conflicts.push((out_path, reason));
                }
            }
        }
        Ok(MergePlan { files, conflicts })
    }

    fn contents_of(
        &self,
        files: &BTreeMap<String, (ObjectId, FileMode)>,
    ) -> Result<BTreeMap<String, Vec<u8>>> {
        let mut out = BTreeMap::new();
        for (path, (blob, _)) in files {
            out.insert(path.clone(), self.blob(blob)?);
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn merge_one_path(
        &self,
        path: &str,
        out_path: &str,
        b: Option<(ObjectId, FileMode)>,
        o: Option<(ObjectId, FileMode)>,
        t: Option<(ObjectId, FileMode)>,
        cand_blobs: &[Option<ObjectId>],
        overridden: bool,
        ours: ObjectId,
        theirs: ObjectId,
        dag: &crate::dag::HistoryDag,
        labels: &MergeLabels,
        opts: &MergeOpts,
    ) -> Result<PathDecision> {
        let blob_of = |e: Option<(ObjectId, FileMode)>| e.map(|(id, _)| id);
        let (ob, tb) = (blob_of(o), blob_of(t));

        if ob == tb {
            return Ok(match o {
                Some((blob, _)) => {
                    let mode = self.merge_modes(path, b, o, t, ours, theirs, dag)?;
                    PathDecision::Keep(self.blob(&blob)?, mode)
                }
                None => PathDecision::Delete,
            });
        }
        // A side counts as unchanged only when it matches one of the
        // merge-base candidates. With a criss-cross both sides match
        // *different* candidates; short-circuiting on either would
        // silently drop the other side's resolution, so only one-sided
        // staleness takes the shortcut.
        let ours_stale = cand_blobs.iter().any(|c| *c == ob);
        let theirs_stale = cand_blobs.iter().any(|c| *c == tb);
        if ours_stale && !theirs_stale {
            return Ok(match t {
                Some((blob, _)) => {
                    let mode = self.merge_modes(path, b, o, t, ours, theirs, dag)?;
                    PathDecision::Keep(self.blob(&blob)?, mode)
                }
                None => PathDecision::Delete,
            });
        }
        if theirs_stale && !ours_stale {
            return Ok(match o {
                Some((blob, _)) => {
                    let mode = self.merge_modes(path, b, o, t, ours, theirs, dag)?;
                    PathDecision::Keep(self.blob(&blob)?, mode)
                }
                None => PathDecision::Delete,
            });
        }

        // both sides changed (or resolved toward different candidates):
        // modify/delete cannot be expressed inline
        let (o_blob, t_blob) = match (ob, tb) {
            (Some(ob), Some(tb)) => (ob, tb),
            (Some(ob), None) => {
                return Ok(PathDecision::Conflict(
                    self.blob(&ob)?,
                    o.unwrap().1,
                    "modified on ours, deleted on theirs".into(),
                ))
            }
            (None, Some(tb)) => {
                return Ok(PathDecision::Conflict(
                    self.blob(&tb)?,
                    t.unwrap().1,
                    "deleted on ours, modified on theirs".into(),
                ))
            }
            (None, None) => unreachable!("handled by ob == tb"),
        };
        let bb = blob_of(b);

        let mode = self.merge_modes(path, b, o, t, ours, theirs, dag)?;
        let result =
            self.merge_content(path, bb, o_blob, t_blob, overridden, ours, theirs, labels, opts)?;
        let bytes = result.text().into_bytes();
        if result.clean {
            Ok(PathDecision::Keep(bytes, mode))
        } else {
            Ok(PathDecision::Conflict(
                bytes,
                mode,
                format!("{} conflicting region(s) in {out_path}", result.conflicts.len()),
            ))
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn merge_content(
        &self,
        path: &str,
        base_blob: Option<ObjectId>,
        our_blob: ObjectId,
        their_blob: ObjectId,
        overridden: bool,
        ours: ObjectId,
        theirs: ObjectId,
        labels: &MergeLabels,
        opts: &MergeOpts,
    ) -> Result<MergeResult> {
        let lines_of = |blob: Option<ObjectId>| -> Result<Vec<Line>> {
            Ok(match blob {
                Some(id) => split_lines(&String::from_utf8_lossy(&self.blob(&id)?)),
                None => Vec::new(),
            })
        };
        // an explicit base (cherry-pick) always merges three-way
        let effective = if overridden {
            Strategy::ThreeWay
        } else {
            opts.strategy
        };
        match effective {
            Strategy::ThreeWay => Ok(three_way_merge(
                &lines_of(base_blob)?,
                &lines_of(Some(our_blob))?,
                &lines_of(Some(their_blob))?,
                labels,
            )),
            Strategy::Recursive => {
                let dag = self.load_dag(&[ours, theirs])?;
                let path_owned = path.to_string();
                let content_of = |rev: &ObjectId| -> Result<Vec<Line>> {
                    let bytes = self.blob_at(rev, &path_owned)?.unwrap_or_default();
                    Ok(split_lines(&String::from_utf8_lossy(&bytes)))
                };
                recursive_merge(&dag, &content_of, &ours, &theirs, labels)
            }
            Strategy::Pcdv => {
                if self.backend() != StorageBackend::Weave {
                    return Err(Error::Usage(
                        "pcdv strategy requires the weave storage backend".into(),
                    ));
                }
                let weave = self.weave_for(path, &ours)?;
                let x = self
                    .file_rev_at(&ours, path)?
                    .ok_or_else(|| Error::Usage(format!("{path:?} missing at merge head")))?;
                let y = self
                    .file_rev_at(&theirs, path)?
                    .ok_or_else(|| Error::Usage(format!("{path:?} missing at merge source")))?;
                pcdv_merge(&weave, &x, &y, labels)
            }
        }
    }

    /// Executable-bit merge: marks are the commits (within both
    /// ancestries) where the bit changed, including the file's
    /// introduction.
    #[allow(clippy::too_many_arguments)]
    fn merge_modes(
        &self,
        path: &str,
        b: Option<(ObjectId, FileMode)>,
        o: Option<(ObjectId, FileMode)>,
        t: Option<(ObjectId, FileMode)>,
        ours: ObjectId,
        theirs: ObjectId,
        dag: &crate::dag::HistoryDag,
    ) -> Result<FileMode> {
        let mode_of = |e: Option<(ObjectId, FileMode)>| e.map(|(_, m)| m);
        let (mo, mt) = (mode_of(o), mode_of(t));
        let (mo, mt) = match (mo, mt) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => return Ok(a),
            (None, Some(b)) => return Ok(b),
            (None, None) => return Ok(mode_of(b).unwrap_or(FileMode::Normal)),
        };
        if mo == mt {
            return Ok(mo);
        }
        let marks = self.mode_marks(path, &[ours, theirs], dag)?;
        match mark_merge(dag, &marks, &ours, &theirs, mo, mt) {
            Ok(ScalarMergeResult::Value(m)) => Ok(m),
            // a genuine two-sided flag disagreement: executable wins so
            // nothing silently loses its x bit
            Ok(ScalarMergeResult::Conflict { .. }) => Ok(FileMode::Executable),
            Err(Error::NoMarks) => Ok(mo),
            Err(e) => Err(e),
        }
    }

    fn mode_marks(
        &self,
        path: &str,
        heads: &[ObjectId],
        dag: &crate::dag::HistoryDag,
    ) -> Result<BTreeSet<ObjectId>> {
        let mut marks = BTreeSet::new();
        let mut all = std::collections::HashSet::new();
        for head in heads {
            all.extend(dag.ancestor_set(head)?);
        }
        for commit in all {
            let here = self.tree_files(&commit)?.get(path).map(|(_, m)| *m);
            let mode = match here {
                Some(m) => m,
                None => continue,
            };
            let parsed = self.commit(&commit)?;
            let changed = if parsed.parents.is_empty() {
                true
            } else {
                parsed.parents.iter().try_fold(true, |acc, p| -> Result<bool> {
                    let pm = self.tree_files(p)?.get(path).map(|(_, m)| *m);
                    Ok(acc && pm != Some(mode))
                })?
            };
            if changed {
                marks.insert(commit);
            }
        }
        Ok(marks)
    }
}

enum PathDecision {
    Keep(Vec<u8>, FileMode),
    Delete,
    Conflict(Vec<u8>, FileMode, String),
}

fn set_modes(repo: &Repository, files: &BTreeMap<String, (Vec<u8>, FileMode)>) -> Result<()> {
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        for (path, (_, mode)) in files {
            let bits = match mode {
                FileMode::Executable => 0o755,
                FileMode::Normal => 0o644,
            };
            fs::set_permissions(repo.root().join(path), fs::Permissions::from_mode(bits))?;
        }
    }
    #[cfg(not(unix))]
    {
        let _ = (repo, files);
    }
    Ok(())
}
