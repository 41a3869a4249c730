//! Weave-based merge (the Precise Codeville Merge).
//!
//! Instead of comparing against a base revision, the weave is walked
//! line by line and the embedded per-line history decides conflicts:
//! whichever side saw more insert/delete state changes of a line (the
//! generation count) takes precedence.

use crate::error::Result;
use crate::merge::{MergeLabels, MergeOutput, MergeResult};
use crate::object::ObjectId;
use crate::textdiff::Line;
use crate::weave::Weave;

/// Merges revisions `x` and `y` of a weave.
///
/// Walking the weave: lines in neither revision are skipped; a line in
/// only one revision is buffered on that side and raises that side's
/// precedence flag when its generation count is strictly larger; a
/// line in both revisions flushes the buffers — as common text when no
/// flag is set, as a one-sided change when exactly one is, as a
/// conflict block when both are — and resets them. Trailing buffers
/// flush by the same rule at the end of the weave.
pub fn pcdv_merge(
    weave: &Weave,
    x: &ObjectId,
    y: &ObjectId,
    labels: &MergeLabels,
) -> Result<MergeResult> {
    let anc_x = weave.ancestor_set(x)?;
    let anc_y = weave.ancestor_set(y)?;

    let mut out = MergeOutput::new(labels.clone());
    let mut chunk_x: Vec<Line> = Vec::new();
    let mut chunk_y: Vec<Line> = Vec::new();
    let (mut prec_x, mut prec_y) = (false, false);

    let flush = |out: &mut MergeOutput,
                     chunk_x: &mut Vec<Line>,
                     chunk_y: &mut Vec<Line>,
                     prec_x: &mut bool,
                     prec_y: &mut bool| {
        match (*prec_x, *prec_y) {
            (false, false) => {
                debug_assert!(chunk_x.is_empty() && chunk_y.is_empty());
            }
            (true, false) => out.push_lines(chunk_x),
            (false, true) => out.push_lines(chunk_y),
            (true, true) => out.push_conflict(chunk_x, chunk_y),
        }
        chunk_x.clear();
        chunk_y.clear();
        *prec_x = false;
        *prec_y = false;
    };

    for (i, line) in weave.lines().iter().enumerate() {
        let in_x = weave.line_visible(i, &anc_x);
        let in_y = weave.line_visible(i, &anc_y);
        match (in_x, in_y) {
            (false, false) => {}
            (true, true) => {
                flush(&mut out, &mut chunk_x, &mut chunk_y, &mut prec_x, &mut prec_y);
                out.push_lines(std::slice::from_ref(&line.text));
            }
            (in_x, _) => {
                let gen_x = weave.generation(i, &anc_x);
                let gen_y = weave.generation(i, &anc_y);
                debug_assert_ne!(gen_x, gen_y, "one-sided line with equal generations");
                if in_x {
                    chunk_x.push(line.text.clone());
                } else {
                    chunk_y.push(line.text.clone());
                }
                if gen_x > gen_y {
                    prec_x = true;
                } else if gen_y > gen_x {
                    prec_y = true;
                }
            }
        }
    }
    flush(&mut out, &mut chunk_x, &mut chunk_y, &mut prec_x, &mut prec_y);
    Ok(out.finish())
}
