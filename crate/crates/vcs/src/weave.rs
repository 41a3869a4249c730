//! Weave storage: the interleaved union of every line a file has ever
//! contained, each line tagged with the revision that inserted it and
//! the revisions that deleted it.
//!
//! Extraction of any revision is a single pass over the weave; per-line
//! annotation falls out of the same pass for free. Adding a revision
//! only appends lines and delete marks, never reorders or removes
//! existing lines, which keeps every previously extractable revision
//! stable.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::object::ObjectId;
use crate::textdiff::{myers_diff, EditOp, Line};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeaveLine {
    pub text: Line,
    pub insert_rev: ObjectId,
    pub delete_revs: BTreeSet<ObjectId>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RevEntry {
    pub id: ObjectId,
    pub parents: Vec<ObjectId>,
}

/// Per output line: the text and the revision that introduced it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Annotation {
    pub lines: Vec<(Line, ObjectId)>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Weave {
    lines: Vec<WeaveLine>,
    revs: Vec<RevEntry>,
    index: HashMap<ObjectId, usize>,
}

impl Weave {
    pub fn new() -> Self {
        Weave::default()
    }

    pub fn revs(&self) -> &[RevEntry] {
        &self.revs
    }

    pub fn lines(&self) -> &[WeaveLine] {
        &self.lines
    }

    pub fn contains_rev(&self, rev: &ObjectId) -> bool {
        self.index.contains_key(rev)
    }

    /// Adds `content` as revision `rev` on top of `parent` (none for a
    /// root). Alignment against the parent extraction uses the Myers
    /// diff; inserted lines join the weave right after the weave line
    /// preceding them in the parent, deletions only gain a mark.
    pub fn add(&mut self, rev: ObjectId, parent: Option<ObjectId>, content: &[Line]) -> Result<()> {
        let parents: Vec<ObjectId> = parent.into_iter().collect();
        self.add_with_parents(rev, &parents, content)
    }

    /// Adds a revision with any number of parents (merge results carry
    /// two). Alignment runs against the lines visible under the union
    /// of all parents' ancestries, so a merge never duplicates lines
    /// that arrived through its second parent and never resurrects
    /// lines either side deleted.
    pub fn add_with_parents(
        &mut self,
        rev: ObjectId,
        parents: &[ObjectId],
        content: &[Line],
    ) -> Result<()> {
        if self.index.contains_key(&rev) {
            return Err(Error::DuplicateRevision(rev));
        }
        let anc = self.ancestor_set_many(parents)?;

        let mut parent_lines = Vec::new();
        let mut parent_visible = Vec::new();
        for (i, line) in self.lines.iter().enumerate() {
            if visible(line, &anc) {
                parent_lines.push(line.text.clone());
                parent_visible.push(i);
            }
        }

        let script = myers_diff(&parent_lines, content);
        let mut new_lines: Vec<WeaveLine> = Vec::new();
        let mut w = 0usize;
        let copy_through = |new_lines: &mut Vec<WeaveLine>, w: &mut usize, upto: usize| {
            while *w < upto {
                new_lines.push(self.lines[*w].clone());
                *w += 1;
            }
        };
        for op in &script.ops {
            match op {
                EditOp::Keep { a_index, .. } => {
                    copy_through(&mut new_lines, &mut w, parent_visible[*a_index] + 1);
                }
                EditOp::Delete { a_index } => {
                    let target = parent_visible[*a_index];
                    copy_through(&mut new_lines, &mut w, target);
                    let mut line = self.lines[target].clone();
                    line.delete_revs.insert(rev);
                    new_lines.push(line);
                    w = target + 1;
                }
                EditOp::Insert { line, .. } => {
                    new_lines.push(WeaveLine {
                        text: line.clone(),
                        insert_rev: rev,
                        delete_revs: BTreeSet::new(),
                    });
                }
            }
        }
        copy_through(&mut new_lines, &mut w, self.lines.len());

        self.lines = new_lines;
        self.index.insert(rev, self.revs.len());
        self.revs.push(RevEntry {
            id: rev,
            parents: parents.to_vec(),
        });
        Ok(())
    }

    /// All ancestors of `rev` including itself, per the weave's own
    /// parent records.
    pub fn ancestor_set(&self, rev: &ObjectId) -> Result<HashSet<ObjectId>> {
        if !self.index.contains_key(rev) {
            return Err(Error::UnknownRevision(*rev));
        }
        Ok(self.closure(std::slice::from_ref(rev)))
    }

    fn ancestor_set_many(&self, revs: &[ObjectId]) -> Result<HashSet<ObjectId>> {
        for rev in revs {
            if !self.index.contains_key(rev) {
                return Err(Error::UnknownParent(*rev));
            }
        }
        Ok(self.closure(revs))
    }

    fn closure(&self, revs: &[ObjectId]) -> HashSet<ObjectId> {
        let mut seen = HashSet::new();
        let mut stack: Vec<ObjectId> = revs.to_vec();
        while let Some(r) = stack.pop() {
            if !seen.insert(r) {
                continue;
            }
            for p in &self.revs[self.index[&r]].parents {
                stack.push(*p);
            }
        }
        seen
    }

    /// Single-pass extraction of the content at `rev`.
    pub fn extract(&self, rev: &ObjectId) -> Result<Vec<Line>> {
        let anc = self.ancestor_set(rev)?;
        Ok(self
            .lines
            .iter()
            .filter(|l| visible(l, &anc))
            .map(|l| l.text.clone())
            .collect())
    }

    /// Same pass as [`extract`](Self::extract), also emitting the
    /// inserting revision per surviving line.
    pub fn annotate(&self, rev: &ObjectId) -> Result<Annotation> {
        let anc = self.ancestor_set(rev)?;
        Ok(Annotation {
            lines: self
                .lines
                .iter()
                .filter(|l| visible(l, &anc))
                .map(|l| (l.text.clone(), l.insert_rev))
                .collect(),
        })
    }

    /// Extraction against an externally supplied ancestor set (the
    /// history DAG's view), for callers whose ancestry is wider than
    /// the weave's own parent records.
    pub fn extract_with_ancestry(&self, anc: &HashSet<ObjectId>) -> Vec<Line> {
        self.lines
            .iter()
            .filter(|l| visible(l, anc))
            .map(|l| l.text.clone())
            .collect()
    }

    /// Visibility of weave line `idx` at a revision given as an
    /// ancestor set.
    pub fn line_visible(&self, idx: usize, anc: &HashSet<ObjectId>) -> bool {
        visible(&self.lines[idx], anc)
    }

    /// Generation count of weave line `idx` at a revision: 1 for the
    /// insertion if visible in the ancestry, plus one per delete mark
    /// from an ancestor.
    pub fn generation(&self, idx: usize, anc: &HashSet<ObjectId>) -> usize {
        let line = &self.lines[idx];
        let ins = usize::from(anc.contains(&line.insert_rev));
        ins + line.delete_revs.iter().filter(|d| anc.contains(d)).count()
    }

    // -----------------------------------------------------------------
    // on-disk form

    /// Serializes to the textual weave format:
    ///
    /// ```text
    /// vcs-weave 1
    /// rev <hex> [<parent-hex> ...]
    /// I <hex> <text>      body line, text owns a trailing newline
    /// i <hex> <text>      body line without a trailing newline
    /// D <hex> <ref>       delete mark for body line ordinal <ref>
    /// ```
    pub fn serialize(&self) -> String {
        let mut out = String::from("vcs-weave 1\n");
        for rev in &self.revs {
            out.push_str("rev ");
            out.push_str(&rev.id.to_hex());
            for p in &rev.parents {
                out.push(' ');
                out.push_str(&p.to_hex());
            }
            out.push('\n');
        }
        for (i, line) in self.lines.iter().enumerate() {
            if let Some(body) = line.text.strip_suffix('\n') {
                let _ = writeln!(out, "I {} {}", line.insert_rev.to_hex(), body);
            } else {
                let _ = writeln!(out, "i {} {}", line.insert_rev.to_hex(), line.text);
            }
            for d in &line.delete_revs {
                let _ = writeln!(out, "D {} {}", d.to_hex(), i);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::MalformedWeave(reason.to_string());
        let mut lines_iter = text.split_inclusive('\n');
        match lines_iter.next().map(|l| l.trim_end_matches('\n')) {
            Some("vcs-weave 1") => {}
            _ => return Err(bad("missing or unsupported header")),
        }
        let mut weave = Weave::new();
        for raw in lines_iter {
            let rec = raw.strip_suffix('\n').unwrap_or(raw);
            if let Some(rest) = rec.strip_prefix("rev ") {
                let mut ids = rest.split(' ').map(ObjectId::from_hex);
                let id = ids.next().ok_or_else(|| bad("empty rev record"))??;
                let parents = ids.collect::<Result<Vec<_>>>()?;
                if weave.index.contains_key(&id) {
                    return Err(Error::DuplicateRevision(id));
                }
                weave.index.insert(id, weave.revs.len());
                weave.revs.push(RevEntry { id, parents });
            } else if let Some(rest) = rec.strip_prefix("I ").or_else(|| rec.strip_prefix("i ")) {
                let (hex, body) = rest
                    .split_once(' ')
                    .ok_or_else(|| bad("body record lacks text field"))?;
                let text = if rec.starts_with('I') {
                    format!("{body}\n")
                } else {
                    body.to_string()
                };
                weave.lines.push(WeaveLine {
                    text,
                    insert_rev: ObjectId::from_hex(hex)?,
                    delete_revs: BTreeSet::new(),
                });
            } else if let Some(rest) = rec.strip_prefix("D ") {
                let (hex, ord) = rest
                    .split_once(' ')
                    .ok_or_else(|| bad("delete record lacks line ref"))?;
                let idx: usize = ord.parse().map_err(|_| bad("bad line ref"))?;
                if idx >= weave.lines.len() {
                    return Err(bad("delete record references undefined line"));
                }
                weave.lines[idx].delete_revs.insert(ObjectId::from_hex(hex)?);
            } else if !rec.is_empty() {
                return Err(bad("unrecognized record"));
            }
        }
        Ok(weave)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Weave::parse(&fs::read_to_string(path)?)
    }

    /// Whole-file rewrite through a temp file; callers serialize writers
    /// with the repository lock.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("weave.tmp");
        fs::write(&tmp, self.serialize())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn visible(line: &WeaveLine, anc: &HashSet<ObjectId>) -> bool {
    anc.contains(&line.insert_rev) && line.delete_revs.iter().all(|d| !anc.contains(d))
}
