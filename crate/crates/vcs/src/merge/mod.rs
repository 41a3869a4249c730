//! Merge strategies over line content and scalar attributes.
//!
//! Content merging comes in three flavors: [`three_way_merge`] against
//! an explicit base, [`recursive_merge`] which derives the base from
//! the history (merging multiple merge-base candidates into a virtual
//! base, conflict markers and all), and [`pcdv_merge`] which works
//! directly on a weave using per-line generation counts. Scalar
//! attributes (the executable bit, names) merge via [`mark_merge`];
//! renames are paired up by [`detect_renames`].

mod marks;
mod pcdv;
mod rename;

pub use marks::{mark_merge, MarkTable, ScalarMergeResult};
pub use pcdv::pcdv_merge;
pub use rename::{detect_renames, similarity_index, RenameMatch};

use std::collections::HashMap;

use crate::dag::HistoryDag;
use crate::error::{Error, Result};
use crate::object::ObjectId;
use crate::textdiff::{myers_diff, Line};

/// Labels rendered into conflict markers, conventionally abbreviated
/// revision ids or branch names.
#[derive(Clone, Debug)]
pub struct MergeLabels {
    pub ours: String,
    pub theirs: String,
}

impl Default for MergeLabels {
    fn default() -> Self {
        MergeLabels {
            ours: "ours".into(),
            theirs: "theirs".into(),
        }
    }
}

impl MergeLabels {
    pub fn new(ours: &str, theirs: &str) -> Self {
        MergeLabels {
            ours: ours.into(),
            theirs: theirs.into(),
        }
    }
}

/// One conflicted region: both variants plus the line position of the
/// block in the merged output.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Conflict {
    pub ours: Vec<Line>,
    pub theirs: Vec<Line>,
    pub position: usize,
}

/// Merged output. `lines` contains conflict regions delimited by the
/// visible marker lines; `clean` holds exactly when `conflicts` is
/// empty.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MergeResult {
    pub lines: Vec<Line>,
    pub conflicts: Vec<Conflict>,
    pub clean: bool,
}

impl MergeResult {
    pub fn text(&self) -> String {
        self.lines.concat()
    }
}

/// Incrementally builds a MergeResult, keeping the `clean` invariant.
pub(crate) struct MergeOutput {
    lines: Vec<Line>,
    conflicts: Vec<Conflict>,
    labels: MergeLabels,
}

impl MergeOutput {
    pub(crate) fn new(labels: MergeLabels) -> Self {
        MergeOutput {
            lines: Vec::new(),
            conflicts: Vec::new(),
            labels,
        }
    }

    pub(crate) fn push_lines(&mut self, lines: &[Line]) {
        self.lines.extend_from_slice(lines);
    }

    /// Emits a marker-delimited conflict block. Lines lacking a final
    /// newline gain one inside the block so the markers stay on their
    /// own lines; clean merges are never altered this way.
    pub(crate) fn push_conflict(&mut self, ours: &[Line], theirs: &[Line]) {
        let position = self.lines.len();
        self.lines.push(format!("<<<<<<< {}\n", self.labels.ours));
        self.lines.extend(ours.iter().map(ensure_newline));
        self.lines.push("=======\n".to_string());
        self.lines.extend(theirs.iter().map(ensure_newline));
        self.lines.push(format!(">>>>>>> {}\n", self.labels.theirs));
        self.conflicts.push(Conflict {
            ours: ours.to_vec(),
            theirs: theirs.to_vec(),
            position,
        });
    }

    pub(crate) fn finish(self) -> MergeResult {
        MergeResult {
            clean: self.conflicts.is_empty(),
            lines: self.lines,
            conflicts: self.conflicts,
        }
    }
}

fn ensure_newline(line: &Line) -> Line {
    if line.ends_with('\n') {
        line.clone()
    } else {
        format!("{line}\n")
    }
}

/// One side's change against the base: base lines `[lo, hi)` replaced
/// by `repl` (either range may be empty).
#[derive(Clone, Debug)]
struct ChangeHunk {
    lo: usize,
    hi: usize,
    repl: Vec<Line>,
}

impl ChangeHunk {
    /// Interval on doubled coordinates: base line `i` occupies
    /// `[2i+1, 2i+2)`, the gap before it the point `[2i, 2i+1)`. Two
    /// hunks conflict exactly when these intervals intersect, which
    /// makes edits of adjacent lines disjoint while two insertions at
    /// the same gap, or an insertion strictly inside a replaced range,
    /// collide.
    fn doubled(&self) -> (usize, usize) {
        if self.lo == self.hi {
            (2 * self.lo, 2 * self.lo + 1)
        } else {
            (2 * self.lo + 1, 2 * self.hi)
        }
    }
}

fn change_hunks(base: &[Line], other: &[Line]) -> Vec<ChangeHunk> {
    let script = myers_diff(base, other);
    let mut out: Vec<ChangeHunk> = Vec::new();
    let mut cur: Option<ChangeHunk> = None;
    let mut base_pos = 0usize;
    for op in &script.ops {
        match op {
            crate::textdiff::EditOp::Keep { .. } => {
                out.extend(cur.take());
                base_pos += 1;
            }
            crate::textdiff::EditOp::Delete { a_index } => {
                let hunk = cur.get_or_insert_with(|| ChangeHunk {
                    lo: *a_index,
                    hi: *a_index,
                    repl: Vec::new(),
                });
                hunk.hi = a_index + 1;
                base_pos += 1;
            }
            crate::textdiff::EditOp::Insert { line, .. } => {
                let hunk = cur.get_or_insert_with(|| ChangeHunk {
                    lo: base_pos,
                    hi: base_pos,
                    repl: Vec::new(),
                });
                hunk.repl.push(line.clone());
            }
        }
    }
    out.extend(cur.take());
    out
}

/// The side's content over base range `[lo, hi)`: its hunks in that
/// range interleaved with the base lines they leave untouched.
fn side_content(base: &[Line], hunks: &[ChangeHunk], lo: usize, hi: usize) -> Vec<Line> {
    let mut out = Vec::new();
    let mut pos = lo;
    for h in hunks {
        out.extend_from_slice(&base[pos..h.lo]);
        out.extend_from_slice(&h.repl);
        pos = h.hi;
    }
    out.extend_from_slice(&base[pos..hi]);
    out
}

/// Three-way merge of `x` and `y` against `base`.
///
/// Each side's edit hunks are grouped by overlap of their base
/// extents. A group changed on one side only is taken from that side,
/// identical changes are applied once, and diverging changes produce a
/// conflict region carrying both variants. Hunks touching disjoint
/// base regions, even on adjacent lines, merge cleanly.
pub fn three_way_merge(
    base: &[Line],
    x: &[Line],
    y: &[Line],
    labels: &MergeLabels,
) -> MergeResult {
    let hx = change_hunks(base, x);
    let hy = change_hunks(base, y);

    let mut out = MergeOutput::new(labels.clone());
    let (mut ix, mut iy) = (0usize, 0usize);
    let mut base_pos = 0usize;

    while ix < hx.len() || iy < hy.len() {
        // group of transitively overlapping hunks from both sides
        let mut gx: Vec<ChangeHunk> = Vec::new();
        let mut gy: Vec<ChangeHunk> = Vec::new();
        let mut extent = {
            let from_x = iy >= hy.len()
                || (ix < hx.len() && hx[ix].doubled().0 <= hy[iy].doubled().0);
            if from_x {
                let h = hx[ix].clone();
                ix += 1;
                let d = h.doubled();
                gx.push(h);
                d
            } else {
                let h = hy[iy].clone();
                iy += 1;
                let d = h.doubled();
                gy.push(h);
                d
            }
        };
        loop {
            if ix < hx.len() && hx[ix].doubled().0 < extent.1 {
                extent.1 = extent.1.max(hx[ix].doubled().1);
                gx.push(hx[ix].clone());
                ix += 1;
            } else if iy < hy.len() && hy[iy].doubled().0 < extent.1 {
                extent.1 = extent.1.max(hy[iy].doubled().1);
                gy.push(hy[iy].clone());
                iy += 1;
            } else {
                break;
            }
        }

        // base-line extent of the group
        let blo = gx.iter().chain(&gy).map(|h| h.lo).min().unwrap();
        let bhi = gx.iter().chain(&gy).map(|h| h.hi).max().unwrap();
        out.push_lines(&base[base_pos..blo]);

        let base_part = &base[blo..bhi];
        let x_part = side_content(base, &gx, blo, bhi);
        let y_part = side_content(base, &gy, blo, bhi);
        if x_part[..] == *base_part {
            out.push_lines(&y_part);
        } else if y_part[..] == *base_part || x_part == y_part {
            // only one side changed, or both made the identical change
            out.push_lines(&x_part);
        } else {
            out.push_conflict(&x_part, &y_part);
        }
        base_pos = bhi;
    }
    out.push_lines(&base[base_pos..]);
    out.finish()
}

/// Recursive merge: derives the base from the history DAG.
///
/// A unique merge-base candidate reduces to a plain three-way merge.
/// Multiple candidates are merged pairwise in ascending id order, each
/// intermediate result (conflict markers left in place) becoming a
/// virtual commit whose parents are the pair, so nested criss-cross
/// topologies resolve the same way real merges would.
pub fn recursive_merge<F>(
    dag: &HistoryDag,
    content_of: &F,
    x: &ObjectId,
    y: &ObjectId,
    labels: &MergeLabels,
) -> Result<MergeResult>
where
    F: Fn(&ObjectId) -> Result<Vec<Line>>,
{
    let mut scratch = dag.clone();
    let mut virtuals: HashMap<ObjectId, Vec<Line>> = HashMap::new();
    merge_rec(&mut scratch, content_of, &mut virtuals, x, y, labels)
}

fn merge_rec<F>(
    scratch: &mut HistoryDag,
    content_of: &F,
    virtuals: &mut HashMap<ObjectId, Vec<Line>>,
    x: &ObjectId,
    y: &ObjectId,
    labels: &MergeLabels,
) -> Result<MergeResult>
where
    F: Fn(&ObjectId) -> Result<Vec<Line>>,
{
    let base = virtual_base(scratch, content_of, virtuals, x, y)?;
    let xc = content(content_of, virtuals, x)?;
    let yc = content(content_of, virtuals, y)?;
    Ok(three_way_merge(&base, &xc, &yc, labels))
}

fn virtual_base<F>(
    scratch: &mut HistoryDag,
    content_of: &F,
    virtuals: &mut HashMap<ObjectId, Vec<Line>>,
    x: &ObjectId,
    y: &ObjectId,
) -> Result<Vec<Line>>
where
    F: Fn(&ObjectId) -> Result<Vec<Line>>,
{
    let candidates = scratch.lca_candidates(x, y).map_err(|e| match e {
        Error::EmptyResult => Error::UnrelatedHistories,
        other => other,
    })?;
    let mut cur = candidates[0];
    let mut cur_lines = content(content_of, virtuals, &cur)?;
    for cand in &candidates[1..] {
        let inner_labels =
            MergeLabels::new(&cur.short(8), &cand.short(8));
        let merged = merge_rec(scratch, content_of, virtuals, &cur, cand, &inner_labels)?;
        let vid = synthetic_id(&cur, cand);
        scratch.add_node(vid, &[cur, *cand], 0)?;
        virtuals.insert(vid, merged.lines);
        cur = vid;
        cur_lines = virtuals[&vid].clone();
    }
    Ok(cur_lines)
}

fn content<F>(
    content_of: &F,
    virtuals: &HashMap<ObjectId, Vec<Line>>,
    rev: &ObjectId,
) -> Result<Vec<Line>>
where
    F: Fn(&ObjectId) -> Result<Vec<Line>>,
{
    match virtuals.get(rev) {
        Some(lines) => Ok(lines.clone()),
        None => content_of(rev),
    }
}

fn synthetic_id(a: &ObjectId, b: &ObjectId) -> ObjectId {
    crate::object::HashAlgo::Sha256T160.digest_parts(&[b"virtual-base:", a.as_bytes(), b.as_bytes()])
}
