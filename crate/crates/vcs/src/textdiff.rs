//! Line-based difference algorithms producing [`EditScript`]s.
//!
//! Three algorithms share one output type: `myers_diff` (shortest edit
//! script via bidirectional middle-snake search), `patience_diff`
//! (unique-line anchors found by patience sorting, recursing between
//! them) and `bdiff` (longest common contiguous run, recursing on both
//! sides). All are pure functions; replaying any script against its
//! first input reproduces the second input exactly.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// One line of text. Includes its trailing `'\n'` except for a final
/// line that ends the input without one; such a line compares unequal
/// to its newline-terminated twin, which is what unified-diff fidelity
/// requires.
pub type Line = String;

/// Splits text into lines, each keeping its `'\n'` terminator when
/// present. An empty input has no lines.
pub fn split_lines(text: &str) -> Vec<Line> {
    let mut lines = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        match rest.find('\n') {
            Some(i) => {
                lines.push(rest[..=i].to_string());
                rest = &rest[i + 1..];
            }
            None => {
                lines.push(rest.to_string());
                rest = "";
            }
        }
    }
    lines
}

pub fn join_lines(lines: &[Line]) -> String {
    lines.concat()
}

/// A single edit operation. Indices refer to 0-based line positions in
/// the old (`a`) and new (`b`) sequences.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EditOp {
    Keep {
        a_index: usize,
        b_index: usize,
        line: Line,
    },
    Delete {
        a_index: usize,
    },
    Insert {
        b_index: usize,
        line: Line,
    },
}

/// An ordered list of keep/insert/delete operations transforming one
/// line sequence into another.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

impl EditScript {
    /// Number of non-keep operations; the edit cost.
    pub fn cost(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| !matches!(op, EditOp::Keep { .. }))
            .count()
    }

    /// The matched `(a_index, b_index)` pairs, in order.
    pub fn keep_pairs(&self) -> Vec<(usize, usize)> {
        self.ops
            .iter()
            .filter_map(|op| match op {
                EditOp::Keep {
                    a_index, b_index, ..
                } => Some((*a_index, *b_index)),
                _ => None,
            })
            .collect()
    }
}

/// Replays `script` against `a`, reproducing the sequence it encodes.
///
/// Keep and Delete ops are checked against `a`: a Keep whose stored line
/// does not match, or indices that do not line up, fail with
/// `ScriptMismatch` carrying the op position.
pub fn apply_edit_script(a: &[Line], script: &EditScript) -> Result<Vec<Line>> {
    let mut out = Vec::new();
    let mut ai = 0usize;
    for (i, op) in script.ops.iter().enumerate() {
        match op {
            EditOp::Keep { a_index, line, .. } => {
                if *a_index != ai || a.get(ai) != Some(line) {
                    return Err(Error::ScriptMismatch(i));
                }
                out.push(line.clone());
                ai += 1;
            }
            EditOp::Delete { a_index } => {
                if *a_index != ai || ai >= a.len() {
                    return Err(Error::ScriptMismatch(i));
                }
                ai += 1;
            }
            EditOp::Insert { line, .. } => out.push(line.clone()),
        }
    }
    if ai != a.len() {
        return Err(Error::ScriptMismatch(script.ops.len()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// shared machinery

/// Interns lines to integers so the search loops compare `u32`s.
fn intern<'a>(a: &'a [Line], b: &'a [Line]) -> (Vec<u32>, Vec<u32>) {
    let mut table: HashMap<&'a str, u32> = HashMap::new();
    let mut encode = |line: &'a Line| -> u32 {
        let next = table.len() as u32;
        *table.entry(line.as_str()).or_insert(next)
    };
    let ea = a.iter().map(&mut encode).collect();
    let eb = b.iter().map(&mut encode).collect();
    (ea, eb)
}

/// Builds an EditScript from matched pairs. Between consecutive matches
/// every unmatched `a` line becomes a Delete and every unmatched `b`
/// line an Insert, deletes first (the fixed tie-break).
fn script_from_matches(a: &[Line], b: &[Line], matches: &[(usize, usize)]) -> EditScript {
    let mut ops = Vec::new();
    let (mut ai, mut bi) = (0usize, 0usize);
    for &(ma, mb) in matches.iter().chain(std::iter::once(&(a.len(), b.len()))) {
        while ai < ma {
            ops.push(EditOp::Delete { a_index: ai });
            ai += 1;
        }
        while bi < mb {
            ops.push(EditOp::Insert {
                b_index: bi,
                line: b[bi].clone(),
            });
            bi += 1;
        }
        if ma < a.len() {
            ops.push(EditOp::Keep {
                a_index: ma,
                b_index: mb,
                line: a[ma].clone(),
            });
            ai = ma + 1;
            bi = mb + 1;
        }
    }
    EditScript { ops }
}

// ---------------------------------------------------------------------
// Myers shortest edit script

/// Shortest edit script between `a` and `b`.
///
/// Runs the bidirectional furthest-reaching-path search: forward and
/// backward passes meet in a middle snake, and the two halves are solved
/// recursively in linear space. The result has minimal insert+delete
/// count; within a replaced region deletes are emitted before inserts.
pub fn myers_diff(a: &[Line], b: &[Line]) -> EditScript {
    let (ea, eb) = intern(a, b);
    let mut matches = Vec::new();
    myers_rec(&ea, 0, &eb, 0, &mut matches);
    script_from_matches(a, b, &matches)
}

fn myers_rec(a: &[u32], a_off: usize, b: &[u32], b_off: usize, out: &mut Vec<(usize, usize)>) {
    // strip common prefix/suffix: they are on every shortest path
    let mut lo = 0usize;
    while lo < a.len() && lo < b.len() && a[lo] == b[lo] {
        lo += 1;
    }
    let mut hi = 0usize;
    while hi < a.len() - lo && hi < b.len() - lo && a[a.len() - 1 - hi] == b[b.len() - 1 - hi] {
        hi += 1;
    }
    for i in 0..lo {
        out.push((a_off + i, b_off + i));
    }
    let (ca, cb) = (&a[lo..a.len() - hi], &b[lo..b.len() - hi]);
    if !ca.is_empty() && !cb.is_empty() {
        let (mx, my) = middle_snake(ca, cb);
        myers_rec(&ca[..mx], a_off + lo, &cb[..my], b_off + lo, out);
        myers_rec(&ca[mx..], a_off + lo + mx, &cb[my..], b_off + lo + my, out);
    }
    for i in (0..hi).rev() {
        out.push((a_off + a.len() - 1 - i, b_off + b.len() - 1 - i));
    }
}

/// Finds a point `(x, y)` on some shortest edit path splitting the
/// problem in two. Runs the furthest-reaching-path search from both
/// corners at once (the backward direction in mirrored coordinates);
/// the first genuine overlap between the searches lies on a minimal
/// path. Assumes the caller already stripped common prefix and suffix
/// and that both inputs are non-empty.
fn middle_snake(a: &[u32], b: &[u32]) -> (usize, usize) {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let delta = n - m;
    let odd = delta & 1 != 0;
    let max_d = (n + m + 1) / 2 + 1;
    // vf[k]: furthest forward x on diagonal k = x - y.
    // vb[k]: furthest backward progress from (n, m), on the mirrored
    //        diagonal k = (n - x) - (m - y).
    let size = (2 * max_d) as usize + 1;
    let off = max_d;
    let idx = |j: isize| (j + off) as usize;
    let mut vf = vec![0isize; size];
    let mut vb = vec![0isize; size];
    vf[idx(1)] = 0;
    vb[idx(1)] = 0;

    // Reachability values can poke one past the grid edge on pinned
    // diagonals; such a spurious meeting report would yield a corner or
    // out-of-grid split, so those are skipped and the search continues
    // to the genuine overlap.
    let usable = |x: isize, y: isize| x >= 0 && x <= n && y >= 0 && y <= m && (x + y) > 0
        && (x + y) < n + m;

    for d in 0..=max_d {
        let mut k = d;
        while k >= -d {
            let mut x = if k == -d || (k != d && vf[idx(k - 1)] < vf[idx(k + 1)]) {
                vf[idx(k + 1)] // down move: insert from b
            } else {
                vf[idx(k - 1)] + 1 // right move: delete from a
            };
            let mut y = x - k;
            while x < n && y < m && a[x as usize] == b[y as usize] {
                x += 1;
                y += 1;
            }
            vf[idx(k)] = x;
            if odd && (k - delta).abs() < d && x + vb[idx(delta - k)] >= n && usable(x, y)
            {
                return (x as usize, y as usize);
            }
            k -= 2;
        }
        let mut k = d;
        while k >= -d {
            let mut x = if k == -d || (k != d && vb[idx(k - 1)] < vb[idx(k + 1)]) {
                vb[idx(k + 1)]
            } else {
                vb[idx(k - 1)] + 1
            };
            let mut y = x - k;
            while x < n && y < m && a[(n - 1 - x) as usize] == b[(m - 1 - y) as usize] {
                x += 1;
                y += 1;
            }
            vb[idx(k)] = x;
            if !odd && (k - delta).abs() <= d && x + vf[idx(delta - k)] >= n {
                let (fx, fy) = (n - x, m - y);
                if usable(fx, fy) {
                    return (fx as usize, fy as usize);
                }
            }
            k -= 2;
        }
    }
    unreachable!("edit paths always meet within (n+m)/2+1 sweeps")
}

// ---------------------------------------------------------------------
// patience diff

/// Patience diff: anchors on lines unique in both inputs.
///
/// The longest increasing subsequence of the unique-line position pairs
/// (found by patience sorting) fixes the anchors, the regions between
/// anchors recurse, and a region with no unique common line falls back
/// to `myers_diff` wholesale — in particular, inputs without any unique
/// common lines produce exactly the Myers output.
pub fn patience_diff(a: &[Line], b: &[Line]) -> EditScript {
    let (ea, eb) = intern(a, b);
    let mut matches = Vec::new();
    patience_rec(&ea, 0, &eb, 0, &mut matches);
    script_from_matches(a, b, &matches)
}

fn patience_rec(a: &[u32], a_off: usize, b: &[u32], b_off: usize, out: &mut Vec<(usize, usize)>) {
    let anchors = unique_common_pairs(a, b);
    if anchors.is_empty() {
        let mut sub = Vec::new();
        myers_rec(a, 0, b, 0, &mut sub);
        out.extend(sub.into_iter().map(|(x, y)| (a_off + x, b_off + y)));
        return;
    }
    let chain = longest_increasing_chain(&anchors);
    let (mut pa, mut pb) = (0usize, 0usize);
    for &(ai, bi) in &chain {
        patience_rec(&a[pa..ai], a_off + pa, &b[pb..bi], b_off + pb, out);
        out.push((a_off + ai, b_off + bi));
        pa = ai + 1;
        pb = bi + 1;
    }
    patience_rec(&a[pa..], a_off + pa, &b[pb..], b_off + pb, out);
}

/// Pairs `(a_pos, b_pos)` of lines occurring exactly once in each input,
/// ordered by `a_pos`.
fn unique_common_pairs(a: &[u32], b: &[u32]) -> Vec<(usize, usize)> {
    // count == 2 encodes "seen more than once"
    let mut seen_a: HashMap<u32, (usize, u8)> = HashMap::new();
    for (i, &t) in a.iter().enumerate() {
        let e = seen_a.entry(t).or_insert((i, 0));
        e.1 = e.1.saturating_add(1);
    }
    let mut seen_b: HashMap<u32, (usize, u8)> = HashMap::new();
    for (i, &t) in b.iter().enumerate() {
        let e = seen_b.entry(t).or_insert((i, 0));
        e.1 = e.1.saturating_add(1);
    }
    let mut pairs: Vec<(usize, usize)> = seen_a
        .iter()
        .filter(|(_, (_, ca))| *ca == 1)
        .filter_map(|(t, (ia, _))| match seen_b.get(t) {
            Some((ib, 1)) => Some((*ia, *ib)),
            _ => None,
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Longest chain of pairs increasing in the second coordinate, via
/// patience sorting with back-pointers. `pairs` must be sorted by the
/// first coordinate.
fn longest_increasing_chain(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    // piles[i]: index into pairs of the current top of pile i
    let mut piles: Vec<usize> = Vec::new();
    let mut back: Vec<Option<usize>> = vec![None; pairs.len()];
    for (i, &(_, b)) in pairs.iter().enumerate() {
        let pile = piles.partition_point(|&top| pairs[top].1 < b);
        back[i] = if pile > 0 { Some(piles[pile - 1]) } else { None };
        if pile == piles.len() {
            piles.push(i);
        } else {
            piles[pile] = i;
        }
    }
    let mut chain = Vec::new();
    let mut cur = piles.last().copied();
    while let Some(i) = cur {
        chain.push(pairs[i]);
        cur = back[i];
    }
    chain.reverse();
    chain
}

// ---------------------------------------------------------------------
// bdiff

/// Difference by recursive longest-common-substring matching.
///
/// The longest common contiguous run of lines anchors the result (ties
/// resolved to the earliest position in `a`, then in `b`); the parts
/// before and after it recurse. Inputs with no common line at all
/// produce a full delete of `a` followed by a full insert of `b`.
pub fn bdiff(a: &[Line], b: &[Line]) -> EditScript {
    let (ea, eb) = intern(a, b);
    // positions of each token in b, for the longest-match scan
    let mut b_pos: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, &t) in eb.iter().enumerate() {
        b_pos.entry(t).or_default().push(j);
    }
    let mut scratch = RunScratch {
        cur: vec![0; eb.len() + 1],
        prev: vec![0; eb.len() + 1],
    };
    let mut matches = Vec::new();
    bdiff_rec(&ea, 0, &eb, 0, &b_pos, &mut scratch, &mut matches);
    script_from_matches(a, b, &matches)
}

/// Two reusable rows for the run-length recurrence, kept zeroed between
/// calls by unwinding only the cells that were touched.
struct RunScratch {
    cur: Vec<usize>,
    prev: Vec<usize>,
}

#[allow(clippy::too_many_arguments)]
fn bdiff_rec(
    a: &[u32],
    a_off: usize,
    b: &[u32],
    b_off: usize,
    b_pos: &HashMap<u32, Vec<usize>>,
    scratch: &mut RunScratch,
    out: &mut Vec<(usize, usize)>,
) {
    if a.is_empty() || b.is_empty() {
        return;
    }
    let (mi, mj, mlen) = longest_common_run(a, b, b_off, b_pos, scratch);
    if mlen == 0 {
        return;
    }
    bdiff_rec(&a[..mi], a_off, &b[..mj], b_off, b_pos, scratch, out);
    for k in 0..mlen {
        out.push((a_off + mi + k, b_off + mj + k));
    }
    bdiff_rec(
        &a[mi + mlen..],
        a_off + mi + mlen,
        &b[mj + mlen..],
        b_off + mj + mlen,
        b_pos,
        scratch,
        out,
    );
}

/// Longest common contiguous run between `a` and `b` (`b` is the slice
/// starting at absolute offset `b_abs` so the global position table can
/// be reused). Returns `(i, j, len)` relative to the slices; on equal
/// lengths the earliest `i`, then earliest `j`, wins.
fn longest_common_run(
    a: &[u32],
    b: &[u32],
    b_abs: usize,
    b_pos: &HashMap<u32, Vec<usize>>,
    scratch: &mut RunScratch,
) -> (usize, usize, usize) {
    let (mut best_i, mut best_j, mut best_len) = (0usize, 0usize, 0usize);
    // cur[j+1]: length of the common run ending at a[i], b[j]; rows
    // swap each iteration and only touched cells are re-zeroed
    let mut touched_prev: Vec<usize> = Vec::new();
    let mut touched_cur: Vec<usize> = Vec::new();
    for (i, &t) in a.iter().enumerate() {
        if let Some(positions) = b_pos.get(&t) {
            let lo = positions.partition_point(|&p| p < b_abs);
            let hi = positions.partition_point(|&p| p < b_abs + b.len());
            for &p in &positions[lo..hi] {
                let j = p - b_abs;
                let len = scratch.prev[j] + 1;
                scratch.cur[j + 1] = len;
                touched_cur.push(j + 1);
                if len > best_len {
                    best_len = len;
                    best_i = i + 1 - len;
                    best_j = j + 1 - len;
                }
            }
        }
        for &j in &touched_prev {
            scratch.prev[j] = 0;
        }
        std::mem::swap(&mut scratch.prev, &mut scratch.cur);
        std::mem::swap(&mut touched_prev, &mut touched_cur);
        touched_cur.clear();
    }
    for &j in &touched_prev {
        scratch.prev[j] = 0;
    }
    (best_i, best_j, best_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn lines(spec: &str) -> Vec<Line> {
        spec.chars().map(|c| format!("{c}\n")).collect()
    }

    /// Exhaustive LCS length by dynamic programming; the independent
    /// minimality oracle for Myers.
    pub fn lcs_len(a: &[Line], b: &[Line]) -> usize {
        let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                dp[i][j] = if a[i - 1] == b[j - 1] {
                    dp[i - 1][j - 1] + 1
                } else {
                    dp[i - 1][j].max(dp[i][j - 1])
                };
            }
        }
        dp[a.len()][b.len()]
    }

    #[test]
    fn identical_inputs_all_keep() {
        let a = lines("abc");
        for diff in [myers_diff, patience_diff, bdiff] {
            let script = diff(&a, &a);
            assert_eq!(script.cost(), 0);
            assert_eq!(script.ops.len(), 3);
        }
    }

    #[test]
    fn replay_soundness_across_algorithms() {
        let mut state = 0xabcdefu64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..300 {
            let la = next() % 30;
            let lb = next() % 30;
            let a: Vec<Line> = (0..la).map(|_| format!("{}\n", next() % 4)).collect();
            let b: Vec<Line> = (0..lb).map(|_| format!("{}\n", next() % 4)).collect();
            for diff in [myers_diff, patience_diff, bdiff] {
                let script = diff(&a, &b);
                assert_eq!(apply_edit_script(&a, &script).unwrap(), b, "replay failed");
            }
        }
    }

    #[test]
    fn empty_to_n_lines_is_all_inserts() {
        let b = lines("abcd");
        let script = myers_diff(&[], &b);
        assert_eq!(script.cost(), 4);
        assert!(script
            .ops
            .iter()
            .all(|op| matches!(op, EditOp::Insert { .. })));
    }

    #[test]
    fn myers_cost_matches_lcs_oracle_on_small_random_inputs() {
        let mut state = 0x12345678u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..2000 {
            let la = next() % 9;
            let lb = next() % 9;
            let a: Vec<Line> = (0..la).map(|_| format!("{}\n", next() % 3)).collect();
            let b: Vec<Line> = (0..lb).map(|_| format!("{}\n", next() % 3)).collect();
            let script = myers_diff(&a, &b);
            assert_eq!(apply_edit_script(&a, &script).unwrap(), b);
            assert_eq!(
                script.cost(),
                a.len() + b.len() - 2 * lcs_len(&a, &b),
                "non-minimal for {a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn deletes_precede_inserts_in_replacements() {
        let a = lines("axc");
        let b = lines("ayc");
        let script = myers_diff(&a, &b);
        let tags: Vec<&str> = script
            .ops
            .iter()
            .map(|op| match op {
                EditOp::Keep { .. } => "k",
                EditOp::Delete { .. } => "d",
                EditOp::Insert { .. } => "i",
            })
            .collect();
        assert_eq!(tags, ["k", "d", "i", "k"]);
    }

    #[test]
    fn patience_without_unique_lines_equals_myers() {
        // every line occurs twice on both sides
        let a = lines("xyxy");
        let b = lines("xxyy");
        assert_eq!(patience_diff(&a, &b), myers_diff(&a, &b));
    }

    #[test]
    fn patience_brace_alignment_case() {
        let a: Vec<Line> = split_lines("void f1() {\n  a();\n}\n\nvoid f2() {\n  b();\n}\n");
        let b: Vec<Line> = split_lines(
            "void f1() {\n  a();\n}\n\nvoid fnew() {\n  n();\n}\n\nvoid f2() {\n  b();\n}\n",
        );
        let script = patience_diff(&a, &b);
        assert_eq!(apply_edit_script(&a, &script).unwrap(), b);

        // independent oracle: patience sorting over the unique-line pairs
        let (ea, eb) = intern(&a, &b);
        let anchors = unique_common_pairs(&ea, &eb);
        let chain = longest_increasing_chain(&anchors);
        assert!(!chain.is_empty());
        let keeps = script.keep_pairs();
        for pair in &chain {
            assert!(keeps.contains(pair), "anchor {pair:?} not kept");
        }

        // the new function arrives as one contiguous insert block
        let inserted: Vec<usize> = script
            .ops
            .iter()
            .filter_map(|op| match op {
                EditOp::Insert { b_index, .. } => Some(*b_index),
                _ => None,
            })
            .collect();
        assert_eq!(inserted.len(), 4);
        assert!(inserted.windows(2).all(|w| w[1] == w[0] + 1));
    }

    #[test]
    fn bdiff_disjoint_inputs() {
        let a = lines("abc");
        let b = lines("xyz");
        let script = bdiff(&a, &b);
        assert_eq!(script.cost(), 6);
        assert_eq!(apply_edit_script(&a, &script).unwrap(), b);
    }

    #[test]
    fn bdiff_anchor_matches_brute_force_longest_substring() {
        let mut state = 0xdeadbeefu64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..500 {
            let la = 1 + next() % 12;
            let lb = 1 + next() % 12;
            let a: Vec<Line> = (0..la).map(|_| format!("{}\n", next() % 4)).collect();
            let b: Vec<Line> = (0..lb).map(|_| format!("{}\n", next() % 4)).collect();

            // brute force: all (i, j, len) combinations
            let (mut bi, mut bj, mut blen) = (0, 0, 0);
            for i in 0..a.len() {
                for j in 0..b.len() {
                    let mut len = 0;
                    while i + len < a.len() && j + len < b.len() && a[i + len] == b[j + len] {
                        len += 1;
                    }
                    if len > blen {
                        (bi, bj, blen) = (i, j, len);
                    }
                }
            }

            let (ea, eb) = intern(&a, &b);
            let mut b_pos: HashMap<u32, Vec<usize>> = HashMap::new();
            for (j, &t) in eb.iter().enumerate() {
                b_pos.entry(t).or_default().push(j);
            }
            let mut scratch = RunScratch {
                cur: vec![0; eb.len() + 1],
                prev: vec![0; eb.len() + 1],
            };
            let got = longest_common_run(&ea, &eb, 0, &b_pos, &mut scratch);
            assert_eq!(got, (bi, bj, blen), "anchor mismatch for {a:?} vs {b:?}");

            let script = bdiff(&a, &b);
            assert_eq!(apply_edit_script(&a, &script).unwrap(), b);
        }
    }

    #[test]
    fn suboptimal_algorithms_never_beat_myers() {
        let mut state = 0xfeedface00u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..500 {
            let la = next() % 20;
            let lb = next() % 20;
            let a: Vec<Line> = (0..la).map(|_| format!("{}\n", next() % 4)).collect();
            let b: Vec<Line> = (0..lb).map(|_| format!("{}\n", next() % 4)).collect();
            let base = myers_diff(&a, &b).cost();
            assert!(patience_diff(&a, &b).cost() >= base);
            assert!(bdiff(&a, &b).cost() >= base);
        }
    }

    #[test]
    fn script_mismatch_detected() {
        let a = lines("abc");
        let b = lines("abd");
        let script = myers_diff(&a, &b);
        let mut mutated = a.clone();
        mutated[0] = "z\n".into();
        assert!(matches!(
            apply_edit_script(&mutated, &script),
            Err(Error::ScriptMismatch(_))
        ));
    }

    #[test]
    fn empty_script_on_empty_input() {
        let script = myers_diff(&[], &[]);
        assert!(script.ops.is_empty());
        assert_eq!(apply_edit_script(&[], &script).unwrap(), Vec::<Line>::new());
    }

    #[test]
    fn no_newline_final_line_is_distinct() {
        let a = split_lines("x\ny");
        let b = split_lines("x\ny\n");
        assert_eq!(a.len(), 2);
        assert_ne!(a[1], b[1]);
        let script = myers_diff(&a, &b);
        assert_eq!(script.cost(), 2);
    }

    #[test]
    fn split_join_round_trip() {
        for text in ["", "a", "a\n", "a\nb", "a\nb\n", "\n\n", "\na"] {
            assert_eq!(join_lines(&split_lines(text)), text);
        }
    }
}
