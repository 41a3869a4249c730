//! Textual patch interchange: unified diff emission and parsing,
//! context-driven fuzzy application, combined diffs for merge commits
//! and pickaxe history search.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::object::ObjectId;
use crate::textdiff::{myers_diff, EditOp, Line};

pub const NO_NEWLINE_MARKER: &str = "\\ No newline at end of file";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PatchTag {
    Context,
    Remove,
    Add,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PatchLine {
    pub tag: PatchTag,
    pub text: Line,
}

/// One `@@`-delimited hunk. Starts are 1-based; an empty range carries
/// the number of the line before the insertion point instead.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Hunk {
    pub a_start: usize,
    pub a_len: usize,
    pub b_start: usize,
    pub b_len: usize,
    pub lines: Vec<PatchLine>,
}

impl Hunk {
    fn old_lines(&self) -> Vec<Line> {
        self.lines
            .iter()
            .filter(|l| l.tag != PatchTag::Add)
            .map(|l| l.text.clone())
            .collect()
    }

    fn new_lines(&self) -> Vec<Line> {
        self.lines
            .iter()
            .filter(|l| l.tag != PatchTag::Remove)
            .map(|l| l.text.clone())
            .collect()
    }

    /// Copy with `fuzz` context lines shaved off each edge.
    fn with_fuzz(&self, fuzz: usize) -> Hunk {
        let mut lines = self.lines.clone();
        let mut lead = 0;
        while lead < fuzz && lines.first().map(|l| l.tag) == Some(PatchTag::Context) {
            lines.remove(0);
            lead += 1;
        }
        let mut trail = 0;
        while trail < fuzz && lines.last().map(|l| l.tag) == Some(PatchTag::Context) {
            lines.pop();
            trail += 1;
        }
        Hunk {
            a_start: self.a_start + lead,
            a_len: self.a_len.saturating_sub(lead + trail),
            b_start: self.b_start + lead,
            b_len: self.b_len.saturating_sub(lead + trail),
            lines,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FilePatch {
    pub old_label: String,
    pub new_label: String,
    pub hunks: Vec<Hunk>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct UnifiedPatch {
    pub files: Vec<FilePatch>,
}

/// Internal row form: every line of the two-way diff with both side
/// positions attached (for changes, the position where the other side's
/// cursor stood).
#[derive(Clone, Debug)]
struct Row {
    tag: PatchTag,
    a_pos: usize,
    b_pos: usize,
    text: Line,
}

fn diff_rows(a: &[Line], b: &[Line]) -> Vec<Row> {
    let script = myers_diff(a, b);
    let mut rows = Vec::with_capacity(script.ops.len());
    let (mut ai, mut bi) = (0usize, 0usize);
    for op in script.ops {
        match op {
            EditOp::Keep {
                a_index,
                b_index,
                line,
            } => {
                rows.push(Row {
                    tag: PatchTag::Context,
                    a_pos: a_index,
                    b_pos: b_index,
                    text: line,
                });
                ai = a_index + 1;
                bi = b_index + 1;
            }
            EditOp::Delete { a_index } => {
                rows.push(Row {
                    tag: PatchTag::Remove,
                    a_pos: a_index,
                    b_pos: bi,
                    text: a[a_index].clone(),
                });
                ai = a_index + 1;
            }
            EditOp::Insert { b_index, line } => {
                rows.push(Row {
                    tag: PatchTag::Add,
                    a_pos: ai,
                    b_pos: b_index,
                    text: line,
                });
                bi = b_index + 1;
            }
        }
    }
    rows
}

/// Groups the indices of change rows into hunk ranges: changes whose
/// gap of unchanged rows is at most `2 * context` share a hunk, and
/// each hunk extends `context` unchanged rows on both sides.
fn hunk_ranges(rows: &[Row], context: usize, is_change: impl Fn(&Row) -> bool) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if is_change(row) {
            match runs.last_mut() {
                Some((_, end)) if *end == i => *end = i + 1,
                _ => runs.push((i, i + 1)),
            }
        }
    }
    let mut out = Vec::new();
    let mut gi = 0usize;
    while gi < runs.len() {
        let (lo, mut hi) = runs[gi];
        let mut gj = gi + 1;
        while gj < runs.len() && runs[gj].0 - hi <= 2 * context {
            hi = runs[gj].1;
            gj += 1;
        }
        out.push((lo.saturating_sub(context), (hi + context).min(rows.len())));
        gi = gj;
    }
    out
}

fn hunk_from_rows(rows: &[Row]) -> Hunk {
    let a_len = rows.iter().filter(|r| r.tag != PatchTag::Add).count();
    let b_len = rows.iter().filter(|r| r.tag != PatchTag::Remove).count();
    let a_start = match rows.iter().find(|r| r.tag != PatchTag::Add) {
        Some(r) => r.a_pos + 1,
        None => rows.first().map(|r| r.a_pos).unwrap_or(0),
    };
    let b_start = match rows.iter().find(|r| r.tag != PatchTag::Remove) {
        Some(r) => r.b_pos + 1,
        None => rows.first().map(|r| r.b_pos).unwrap_or(0),
    };
    Hunk {
        a_start,
        a_len,
        b_start,
        b_len,
        lines: rows
            .iter()
            .map(|r| PatchLine {
                tag: r.tag,
                text: r.text.clone(),
            })
            .collect(),
    }
}

/// Structured unified diff of two line sequences.
pub fn diff_file(a: &[Line], b: &[Line], context: usize, label_a: &str, label_b: &str) -> FilePatch {
    let rows = diff_rows(a, b);
    let hunks = hunk_ranges(&rows, context, |r| r.tag != PatchTag::Context)
        .into_iter()
        .map(|(lo, hi)| hunk_from_rows(&rows[lo..hi]))
        .collect();
    FilePatch {
        old_label: label_a.to_string(),
        new_label: label_b.to_string(),
        hunks,
    }
}

/// Renders the difference of two line sequences as unified diff text
/// with `context` lines around each change. Identical inputs produce
/// the two header lines and an empty body.
pub fn emit_unified(
    a: &[Line],
    b: &[Line],
    context: usize,
    label_a: &str,
    label_b: &str,
) -> String {
    render_file_patch(&diff_file(a, b, context, label_a, label_b))
}

pub fn render_file_patch(fp: &FilePatch) -> String {
    let mut out = format!("--- {}\n+++ {}\n", fp.old_label, fp.new_label);
    for hunk in &fp.hunks {
        out.push_str(&format!(
            "@@ -{},{} +{},{} @@\n",
            hunk.a_start, hunk.a_len, hunk.b_start, hunk.b_len
        ));
        for line in &hunk.lines {
            let mark = match line.tag {
                PatchTag::Context => ' ',
                PatchTag::Remove => '-',
                PatchTag::Add => '+',
            };
            push_patch_line(&mut out, mark, &line.text);
        }
    }
    out
}

fn push_patch_line(out: &mut String, mark: char, text: &Line) {
    out.push(mark);
    if let Some(stripped) = text.strip_suffix('\n') {
        out.push_str(stripped);
        out.push('\n');
    } else {
        out.push_str(text);
        out.push('\n');
        out.push_str(NO_NEWLINE_MARKER);
        out.push('\n');
    }
}

// ---------------------------------------------------------------------
// parsing

/// Parses unified diff text. Lines not recognized as headers, hunk
/// headers or hunk body (while a hunk is open) are metadata and are
/// ignored, which leaves room for extensions like rename notes.
pub fn parse_unified(text: &str) -> Result<UnifiedPatch> {
    let mut patch = UnifiedPatch::default();
    let mut cur_file: Option<FilePatch> = None;
    let mut cur_hunk: Option<(Hunk, usize, usize)> = None; // hunk, need_a, need_b
    let mut pending_old: Option<String> = None;

    let close_hunk = |file: &mut Option<FilePatch>,
                      hunk: &mut Option<(Hunk, usize, usize)>|
     -> Result<()> {
        if let Some((h, need_a, need_b)) = hunk.take() {
            if need_a != 0 || need_b != 0 {
                return Err(Error::MalformedPatch(format!(
                    "hunk at -{},{} is short {need_a}/{need_b} lines",
                    h.a_start, h.a_len
                )));
            }
            file.as_mut()
                .ok_or_else(|| Error::MalformedPatch("hunk before file header".into()))?
                .hunks
                .push(h);
        }
        Ok(())
    };

    for raw in text.split_inclusive('\n') {
        let line = raw.strip_suffix('\n').unwrap_or(raw);

        // hunk body consumes counted lines first
        if let Some((hunk, need_a, need_b)) = cur_hunk.as_mut() {
            if *need_a > 0 || *need_b > 0 {
                let (tag, body): (PatchTag, &str) = if let Some(rest) = line.strip_prefix(' ') {
                    (PatchTag::Context, rest)
                } else if let Some(rest) = line.strip_prefix('-') {
                    (PatchTag::Remove, rest)
                } else if let Some(rest) = line.strip_prefix('+') {
                    (PatchTag::Add, rest)
                } else if line.is_empty() {
                    // tolerated: some tools strip the space of an empty
                    // context line
                    (PatchTag::Context, "")
                } else if line.starts_with('\\') {
                    // no-newline marker: strip the newline we appended
                    // to the previous body line
                    if let Some(prev) = hunk.lines.last_mut() {
                        if let Some(s) = prev.text.strip_suffix('\n') {
                            prev.text = s.to_string();
                        }
                    }
                    continue;
                } else {
                    return Err(Error::MalformedPatch(format!(
                        "unexpected line inside hunk: {line:?}"
                    )));
                };
                match tag {
                    PatchTag::Context => {
                        if *need_a == 0 || *need_b == 0 {
                            return Err(Error::MalformedPatch("context overruns hunk".into()));
                        }
                        *need_a -= 1;
                        *need_b -= 1;
                    }
                    PatchTag::Remove => {
                        if *need_a == 0 {
                            return Err(Error::MalformedPatch("removal overruns hunk".into()));
                        }
                        *need_a -= 1;
                    }
                    PatchTag::Add => {
                        if *need_b == 0 {
                            return Err(Error::MalformedPatch("addition overruns hunk".into()));
                        }
                        *need_b -= 1;
                    }
                }
                hunk.lines.push(PatchLine {
                    tag,
                    text: format!("{body}\n"),
                });
                continue;
            }
            // counts satisfied: trailing no-newline marker may follow
            if line.starts_with('\\') {
                if let Some(prev) = hunk.lines.last_mut() {
                    if let Some(s) = prev.text.strip_suffix('\n') {
                        prev.text = s.to_string();
                    }
                }
                continue;
            }
            close_hunk(&mut cur_file, &mut cur_hunk)?;
        }

        if let Some(rest) = line.strip_prefix("--- ") {
            close_hunk(&mut cur_file, &mut cur_hunk)?;
            if let Some(file) = cur_file.take() {
                patch.files.push(file);
            }
            pending_old = Some(rest.to_string());
        } else if let Some(rest) = line.strip_prefix("+++ ") {
            if let Some(old) = pending_old.take() {
                cur_file = Some(FilePatch {
                    old_label: old,
                    new_label: rest.to_string(),
                    hunks: Vec::new(),
                });
            }
            // a +++ without --- is unidentified and ignored
        } else if let Some(rest) = line.strip_prefix("@@ ") {
            if cur_file.is_none() {
                return Err(Error::MalformedPatch("hunk header before file header".into()));
            }
            let header = rest
                .split(" @@")
                .next()
                .ok_or_else(|| Error::MalformedPatch("bad hunk header".into()))?;
            let mut halves = header.split(' ');
            let (a_start, a_len) = parse_range(halves.next(), '-')?;
            let (b_start, b_len) = parse_range(halves.next(), '+')?;
            cur_hunk = Some((
                Hunk {
                    a_start,
                    a_len,
                    b_start,
                    b_len,
                    lines: Vec::new(),
                },
                a_len,
                b_len,
            ));
        }
        // anything else: ignored metadata
    }
    close_hunk(&mut cur_file, &mut cur_hunk)?;
    if let Some(file) = cur_file.take() {
        patch.files.push(file);
    }
    Ok(patch)
}

fn parse_range(part: Option<&str>, sign: char) -> Result<(usize, usize)> {
    let part = part
        .and_then(|p| p.strip_prefix(sign))
        .ok_or_else(|| Error::MalformedPatch(format!("missing {sign} range")))?;
    let (start, len) = match part.split_once(',') {
        Some((s, l)) => (s, l),
        None => (part, "1"),
    };
    Ok((
        start
            .parse()
            .map_err(|_| Error::MalformedPatch(format!("bad range start {start:?}")))?,
        len.parse()
            .map_err(|_| Error::MalformedPatch(format!("bad range length {len:?}")))?,
    ))
}

// ---------------------------------------------------------------------
// application

/// Where and how a hunk landed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HunkPlacement {
    pub file: String,
    pub hunk: usize,
    /// Line distance from the position the hunk header named.
    pub offset: isize,
    /// Context lines stripped from the edges before it matched.
    pub fuzz: usize,
}

/// Strips the conventional `a/` / `b/` prefix and any tab-separated
/// metadata from a diff label; `/dev/null` means "no file".
pub fn label_path(label: &str) -> Option<String> {
    let head = label.split('\t').next().unwrap_or(label);
    if head == "/dev/null" {
        return None;
    }
    let stripped = head
        .strip_prefix("a/")
        .or_else(|| head.strip_prefix("b/"))
        .unwrap_or(head);
    Some(stripped.to_string())
}

/// Applies a parsed patch to a set of files (path to content). Each
/// hunk is tried at its stated position first, then at the nearest
/// position outward in both directions, then with 1..=`max_fuzz`
/// context lines shaved off the hunk edges. Files created by the patch
/// (old side `/dev/null`) must not exist yet; deleted files leave the
/// map.
pub fn apply_unified(
    patch: &UnifiedPatch,
    files: &BTreeMap<String, String>,
    max_fuzz: usize,
) -> Result<(BTreeMap<String, String>, Vec<HunkPlacement>)> {
    let mut out = files.clone();
    let mut placements = Vec::new();
    for fp in &patch.files {
        let old_path = label_path(&fp.old_label);
        let new_path = label_path(&fp.new_label);
        let path = old_path
            .clone()
            .or_else(|| new_path.clone())
            .ok_or_else(|| Error::MalformedPatch("both labels are /dev/null".into()))?;

        let mut lines: Vec<Line> = match &old_path {
            Some(p) => crate::textdiff::split_lines(out.get(p).map(String::as_str).unwrap_or("")),
            None => Vec::new(),
        };

        // running shift of original-file coordinates: earlier hunks'
        // length changes plus any drift discovered while placing them
        let mut delta = 0isize;
        for (hi, hunk) in fp.hunks.iter().enumerate() {
            let (pos, fuzz, candidate) = place_hunk(&mut lines, hunk, hi, &path, delta, max_fuzz)?;
            let stated = stated_position(&candidate, delta);
            placements.push(HunkPlacement {
                file: path.clone(),
                hunk: hi,
                offset: pos as isize - stated,
                fuzz,
            });
            delta += (pos as isize - stated)
                + candidate.b_len as isize
                - candidate.a_len as isize;
        }

        let text = lines.concat();
        if let Some(p) = &old_path {
            out.remove(p);
        }
        if let Some(p) = new_path {
            out.insert(p, text);
        }
    }
    Ok((out, placements))
}

/// 0-based position the hunk header names: for a non-empty old side the
/// first old line, for a pure insertion the gap after that many lines.
fn stated_position(hunk: &Hunk, delta: isize) -> isize {
    if hunk.a_len > 0 {
        hunk.a_start as isize - 1 + delta
    } else {
        hunk.a_start as isize + delta
    }
}

fn place_hunk(
    lines: &mut Vec<Line>,
    hunk: &Hunk,
    index: usize,
    path: &str,
    delta: isize,
    max_fuzz: usize,
) -> Result<(usize, usize, Hunk)> {
    for fuzz in 0..=max_fuzz {
        let candidate = hunk.with_fuzz(fuzz);
        let old = candidate.old_lines();
        let new = candidate.new_lines();
        let stated = stated_position(&candidate, delta);
        if let Some(pos) = search_position(lines, &old, stated) {
            lines.splice(pos..pos + old.len(), new.iter().cloned());
            return Ok((pos, fuzz, candidate));
        }
    }
    Err(Error::HunkFailed {
        file: path.to_string(),
        hunk: index,
    })
}

/// Nearest position where `old` matches `lines`, searching outward from
/// `stated` up to the whole file length.
fn search_position(lines: &[Line], old: &[Line], stated: isize) -> Option<usize> {
    let limit = lines.len() as isize + 1;
    for dist in 0..limit {
        for pos in [stated - dist, stated + dist] {
            if pos < 0 || (pos + old.len() as isize) > lines.len() as isize {
                continue;
            }
            let pos = pos as usize;
            if lines[pos..pos + old.len()] == *old {
                return Some(pos);
            }
            if dist == 0 {
                break;
            }
        }
    }
    None
}

// ---------------------------------------------------------------------
// combined diff

/// Renders the merge-relative diff: one marker column per parent, and
/// only hunks whose merged content differs from every parent survive
/// (changes introduced by the merge itself, i.e. conflict resolutions).
///
/// Display rows carry `' '`/`'+'` per parent for merged lines (present
/// in that parent or not) and `'-'`/`' '` for lines a parent lost;
/// identical lines removed from several parents at the same spot share
/// one row.
pub fn emit_combined(parents: &[Vec<Line>], merged: &[Line], context: usize) -> Result<String> {
    if parents.len() < 2 {
        return Err(Error::Usage(
            "combined diff requires at least two parents".into(),
        ));
    }
    let n = parents.len();

    // per parent: which merged lines it contains, and the lines it lost
    // keyed by the merged boundary they sit before
    let mut present = vec![vec![false; merged.len()]; n];
    let mut removed: Vec<BTreeMap<usize, Vec<Line>>> = vec![BTreeMap::new(); n];
    for (k, parent) in parents.iter().enumerate() {
        for row in diff_rows(parent, merged) {
            match row.tag {
                PatchTag::Context => present[k][row.b_pos] = true,
                PatchTag::Remove => removed[k].entry(row.b_pos).or_default().push(row.text),
                PatchTag::Add => {}
            }
        }
    }

    // display rows, each with the parent cursors before it and how far
    // it advances them; hunk extents fall out of these cursors
    struct CRow {
        cols: Vec<char>,
        text: Line,
        merged_line: bool,
        merged_before: usize,
        parents_before: Vec<usize>,
    }
    let mut rows: Vec<CRow> = Vec::new();
    let mut cursors = vec![0usize; n];
    for j in 0..=merged.len() {
        let mut entries: Vec<(Line, Vec<bool>)> = Vec::new();
        for (k, rem) in removed.iter().enumerate() {
            for text in rem.get(&j).into_iter().flatten() {
                match entries
                    .iter_mut()
                    .find(|(t, mask)| t == text && !mask[k])
                {
                    Some((_, mask)) => mask[k] = true,
                    None => {
                        let mut mask = vec![false; n];
                        mask[k] = true;
                        entries.push((text.clone(), mask));
                    }
                }
            }
        }
        for (text, mask) in entries {
            rows.push(CRow {
                cols: mask.iter().map(|&m| if m { '-' } else { ' ' }).collect(),
                text,
                merged_line: false,
                merged_before: j,
                parents_before: cursors.clone(),
            });
            for (k, &m) in mask.iter().enumerate() {
                if m {
                    cursors[k] += 1;
                }
            }
        }
        if j < merged.len() {
            let consumes: Vec<bool> = (0..n).map(|k| present[k][j]).collect();
            rows.push(CRow {
                cols: consumes.iter().map(|&p| if p { ' ' } else { '+' }).collect(),
                text: merged[j].clone(),
                merged_line: true,
                merged_before: j,
                parents_before: cursors.clone(),
            });
            for (k, &c) in consumes.iter().enumerate() {
                if c {
                    cursors[k] += 1;
                }
            }
        }
    }
    let final_cursors = cursors;

    let is_change = |r: &CRow| !r.merged_line || r.cols.iter().any(|&c| c != ' ');
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if is_change(row) {
            match runs.last_mut() {
                Some((_, end)) if *end == i => *end = i + 1,
                _ => runs.push((i, i + 1)),
            }
        }
    }

    let mut out = String::new();
    let mut gi = 0usize;
    while gi < runs.len() {
        let (lo, mut hi) = runs[gi];
        let mut gj = gi + 1;
        while gj < runs.len() && runs[gj].0 - hi <= 2 * context {
            hi = runs[gj].1;
            gj += 1;
        }
        gi = gj;
        let start = lo.saturating_sub(context);
        let end = (hi + context).min(rows.len());
        let slice = &rows[start..end];

        let m_lo = slice[0].merged_before;
        let last = slice.last().unwrap();
        let m_hi = last.merged_before + usize::from(last.merged_line);
        let extent = |k: usize| -> (usize, usize) {
            let plo = slice[0].parents_before[k];
            let phi = match rows.get(end) {
                Some(next) => next.parents_before[k],
                None => final_cursors[k],
            };
            (plo, phi)
        };

        // exclusion rule: a hunk whose merged content equals one
        // parent's corresponding range carries only the other sides'
        // changes, not the merge's own
        let merged_slice = &merged[m_lo..m_hi];
        let excluded = (0..n).any(|k| {
            let (plo, phi) = extent(k);
            parents[k].get(plo..phi) == Some(merged_slice)
        });
        if excluded {
            continue;
        }

        let mut header = "@".repeat(n + 1);
        for k in 0..n {
            let (plo, phi) = extent(k);
            header.push_str(&format!(
                " -{},{}",
                if phi > plo { plo + 1 } else { plo },
                phi - plo
            ));
        }
        header.push_str(&format!(
            " +{},{} ",
            if m_hi > m_lo { m_lo + 1 } else { m_lo },
            m_hi - m_lo
        ));
        header.push_str(&"@".repeat(n + 1));
        out.push_str(&header);
        out.push('\n');
        for row in slice {
            let marks: String = row.cols.iter().collect();
            if let Some(stripped) = row.text.strip_suffix('\n') {
                out.push_str(&format!("{marks}{stripped}\n"));
            } else {
                out.push_str(&format!("{marks}{}\n{NO_NEWLINE_MARKER}\n", row.text));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// pickaxe

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum PickaxeChange {
    Added,
    Removed,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct PickaxeHit {
    pub commit: ObjectId,
    pub path: String,
    pub change: PickaxeChange,
}

/// A commit node as pickaxe needs it: its id and parent ids, newest
/// first in the slice handed to [`pickaxe`].
#[derive(Clone, Debug)]
pub struct PickaxeCommit {
    pub id: ObjectId,
    pub parents: Vec<ObjectId>,
}

/// Finds commits that change the number of occurrences of `needle` in
/// any file, comparing each commit against each of its parents (roots
/// against the empty tree). More occurrences than the parent reports
/// `Added`, fewer `Removed`.
pub fn pickaxe<F>(history: &[PickaxeCommit], snapshot: F, needle: &[u8]) -> Result<Vec<PickaxeHit>>
where
    F: Fn(&ObjectId) -> Result<BTreeMap<String, Vec<u8>>>,
{
    assert!(!needle.is_empty(), "pickaxe needle must be non-empty");
    let mut hits: BTreeSet<PickaxeHit> = BTreeSet::new();
    let mut order: Vec<PickaxeHit> = Vec::new();
    for commit in history {
        let child_files = snapshot(&commit.id)?;
        let parent_files: Vec<BTreeMap<String, Vec<u8>>> = if commit.parents.is_empty() {
            vec![BTreeMap::new()]
        } else {
            commit
                .parents
                .iter()
                .map(&snapshot)
                .collect::<Result<_>>()?
        };
        for parent in &parent_files {
            let mut paths: BTreeSet<&String> = child_files.keys().collect();
            paths.extend(parent.keys());
            for path in paths {
                let after = child_files.get(path).map(|c| count_sub(c, needle)).unwrap_or(0);
                let before = parent.get(path).map(|c| count_sub(c, needle)).unwrap_or(0);
                if after == before {
                    continue;
                }
                let hit = PickaxeHit {
                    commit: commit.id,
                    path: path.clone(),
                    change: if after > before {
                        PickaxeChange::Added
                    } else {
                        PickaxeChange::Removed
                    },
                };
                if hits.insert(hit.clone()) {
                    order.push(hit);
                }
            }
        }
    }
    Ok(order)
}

/// Non-overlapping occurrence count.
fn count_sub(haystack: &[u8], needle: &[u8]) -> usize {
    let mut count = 0;
    let mut at = 0;
    while at + needle.len() <= haystack.len() {
        if &haystack[at..at + needle.len()] == needle {
            count += 1;
            at += needle.len();
        } else {
            at += 1;
        }
    }
    count
}
