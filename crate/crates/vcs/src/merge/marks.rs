//! Scalar mark merge for directory attributes (executable bit, names).
//!
//! A *mark* is a revision where the user explicitly set the value. The
//! merge gives explicit user choices priority: equal values win
//! outright, otherwise the side whose minimal marked ancestors are all
//! known to the other side yields to it, and truly independent choices
//! conflict.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::dag::HistoryDag;
use crate::error::{Error, Result};
use crate::object::ObjectId;

/// Per `(path, attribute)`: the set of revisions where the value was
/// explicitly set.
#[derive(Clone, Debug, Default)]
pub struct MarkTable {
    marks: BTreeMap<(String, String), BTreeSet<ObjectId>>,
}

impl MarkTable {
    pub fn new() -> Self {
        MarkTable::default()
    }

    pub fn mark(&mut self, path: &str, attr: &str, rev: ObjectId) {
        self.marks
            .entry((path.to_string(), attr.to_string()))
            .or_default()
            .insert(rev);
    }

    pub fn marked(&self, path: &str, attr: &str) -> BTreeSet<ObjectId> {
        self.marks
            .get(&(path.to_string(), attr.to_string()))
            .cloned()
            .unwrap_or_default()
    }

    /// Convenience wrapper around [`mark_merge`] for one attribute.
    #[allow(clippy::too_many_arguments)]
    pub fn merge<V: Eq + Clone>(
        &self,
        dag: &HistoryDag,
        path: &str,
        attr: &str,
        x: &ObjectId,
        y: &ObjectId,
        value_x: V,
        value_y: V,
    ) -> Result<ScalarMergeResult<V>> {
        mark_merge(dag, &self.marked(path, attr), x, y, value_x, value_y)
    }
}

/// Outcome of a scalar merge: exactly one of a value or a conflict.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ScalarMergeResult<V> {
    Value(V),
    Conflict { ours: V, theirs: V },
}

/// Merges scalar values `value_x` at `x` and `value_y` at `y` given the
/// marked revisions of the attribute. The four rules apply in order:
/// equal values; all of x's minimal marks known to y; all of y's
/// minimal marks known to x; conflict.
pub fn mark_merge<V: Eq + Clone>(
    dag: &HistoryDag,
    marked: &BTreeSet<ObjectId>,
    x: &ObjectId,
    y: &ObjectId,
    value_x: V,
    value_y: V,
) -> Result<ScalarMergeResult<V>> {
    for m in marked {
        if !dag.contains(m) {
            return Err(Error::UnknownCommit(m.to_hex()));
        }
    }
    let anc_x = dag.ancestor_set(x)?;
    let anc_y = dag.ancestor_set(y)?;
    let star_x = minimal_marked(dag, marked, &anc_x)?;
    let star_y = minimal_marked(dag, marked, &anc_y)?;
    if star_x.is_empty() && star_y.is_empty() {
        return Err(Error::NoMarks);
    }

    if value_x == value_y {
        return Ok(ScalarMergeResult::Value(value_x));
    }
    let all_in = |stars: &Vec<ObjectId>, other: &ObjectId| -> Result<bool> {
        for m in stars {
            if !dag.is_ancestor(m, other)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if all_in(&star_x, y)? {
        return Ok(ScalarMergeResult::Value(value_y));
    }
    if all_in(&star_y, x)? {
        return Ok(ScalarMergeResult::Value(value_x));
    }
    Ok(ScalarMergeResult::Conflict {
        ours: value_x,
        theirs: value_y,
    })
}

/// `*(r)`: marked ancestors of `r` with no marked descendant inside
/// `r`'s ancestry.
fn minimal_marked(
    dag: &HistoryDag,
    marked: &BTreeSet<ObjectId>,
    anc: &HashSet<ObjectId>,
) -> Result<Vec<ObjectId>> {
    let in_anc: Vec<ObjectId> = marked.iter().filter(|m| anc.contains(m)).copied().collect();
    let mut out = Vec::new();
    for m in &in_anc {
        let mut dominated = false;
        for other in &in_anc {
            if other != m && dag.is_ancestor(m, other)? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            out.push(*m);
        }
    }
    Ok(out)
}
