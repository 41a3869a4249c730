//! History DAG semantics: ancestry, pruned merge-base candidates,
//! fast-forward classification and topological iteration.
//!
//! The graph is acyclic by construction (a parent id must exist before
//! its child can be hashed); all traversals are iterative so deep
//! histories cannot overflow the stack.

use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::object::ObjectId;

#[derive(Clone, Debug)]
struct Node {
    parents: Vec<ObjectId>,
    timestamp: i64,
}

/// Commit nodes with parent edges plus named branch pointers.
#[derive(Clone, Debug, Default)]
pub struct HistoryDag {
    nodes: HashMap<ObjectId, Node>,
    branches: BTreeMap<String, ObjectId>,
}

/// Relationship of two heads, deciding how a merge proceeds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FfStatus {
    /// `theirs` is already an ancestor of `ours`; nothing to do.
    AlreadyUpToDate,
    /// `ours` is a strict ancestor of `theirs`; repoint, no merge node.
    FastForward,
    /// The heads truly diverge.
    NeedsMerge,
}

impl HistoryDag {
    pub fn new() -> Self {
        HistoryDag::default()
    }

    /// Inserts a commit node. Parents must already be present, which
    /// makes cycles unrepresentable.
    pub fn add_node(
        &mut self,
        id: ObjectId,
        parents: &[ObjectId],
        timestamp: i64,
    ) -> Result<()> {
        for p in parents {
            if !self.nodes.contains_key(p) {
                return Err(Error::UnknownCommit(p.to_hex()));
            }
        }
        self.nodes.insert(
            id,
            Node {
                parents: parents.to_vec(),
                timestamp,
            },
        );
        Ok(())
    }

    pub fn contains(&self, id: &ObjectId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn parents(&self, id: &ObjectId) -> Result<&[ObjectId]> {
        self.nodes
            .get(id)
            .map(|n| n.parents.as_slice())
            .ok_or_else(|| Error::UnknownCommit(id.to_hex()))
    }

    pub fn timestamp(&self, id: &ObjectId) -> Result<i64> {
        self.nodes
            .get(id)
            .map(|n| n.timestamp)
            .ok_or_else(|| Error::UnknownCommit(id.to_hex()))
    }

    pub fn set_branch(&mut self, name: &str, head: ObjectId) -> Result<()> {
        if !self.nodes.contains_key(&head) {
            return Err(Error::UnknownCommit(head.to_hex()));
        }
        self.branches.insert(name.to_string(), head);
        Ok(())
    }

    pub fn branches(&self) -> &BTreeMap<String, ObjectId> {
        &self.branches
    }

    /// All ancestors of `id`, including itself.
    pub fn ancestor_set(&self, id: &ObjectId) -> Result<HashSet<ObjectId>> {
        if !self.nodes.contains_key(id) {
            return Err(Error::UnknownCommit(id.to_hex()));
        }
        let mut seen = HashSet::new();
        let mut stack = vec![*id];
        while let Some(at) = stack.pop() {
            if !seen.insert(at) {
                continue;
            }
            stack.extend(self.nodes[&at].parents.iter().copied());
        }
        Ok(seen)
    }

    /// True iff `a` is reachable from `b` along parent edges. Every
    /// commit is its own ancestor by convention.
    pub fn is_ancestor(&self, a: &ObjectId, b: &ObjectId) -> Result<bool> {
        if !self.nodes.contains_key(a) {
            return Err(Error::UnknownCommit(a.to_hex()));
        }
        if !self.nodes.contains_key(b) {
            return Err(Error::UnknownCommit(b.to_hex()));
        }
        if a == b {
            return Ok(true);
        }
        let mut seen = HashSet::new();
        let mut stack = vec![*b];
        while let Some(at) = stack.pop() {
            if at == *a {
                return Ok(true);
            }
            if !seen.insert(at) {
                continue;
            }
            stack.extend(self.nodes[&at].parents.iter().copied());
        }
        Ok(false)
    }

    /// Maximal common ancestors of `x` and `y`: common ancestors that
    /// are not ancestors of any other common ancestor. After a recorded
    /// merge, the merge node supersedes the older fork point. Unrelated
    /// histories are an error, not an empty pseudo-base.
    pub fn lca_candidates(&self, x: &ObjectId, y: &ObjectId) -> Result<Vec<ObjectId>> {
        let anc_x = self.ancestor_set(x)?;
        let anc_y = self.ancestor_set(y)?;
        let common: HashSet<ObjectId> = anc_x.intersection(&anc_y).copied().collect();
        if common.is_empty() {
            return Err(Error::EmptyResult);
        }
        // prune everything that is a strict ancestor of another common
        // ancestor, walking parent edges only inside `common`
        let mut dominated: HashSet<ObjectId> = HashSet::new();
        for c in &common {
            for p in &self.nodes[c].parents {
                if common.contains(p) {
                    // all ancestors of p within common are dominated
                    let mut stack = vec![*p];
                    while let Some(at) = stack.pop() {
                        if !dominated.insert(at) {
                            continue;
                        }
                        for pp in &self.nodes[&at].parents {
                            if common.contains(pp) {
                                stack.push(*pp);
                            }
                        }
                    }
                }
            }
        }
        let mut out: Vec<ObjectId> = common.difference(&dominated).copied().collect();
        out.sort();
        Ok(out)
    }

    /// Classifies the relationship of two heads per the trichotomy:
    /// exactly one status holds for any pair of known commits.
    pub fn ff_status(&self, ours: &ObjectId, theirs: &ObjectId) -> Result<FfStatus> {
        if self.is_ancestor(theirs, ours)? {
            Ok(FfStatus::AlreadyUpToDate)
        } else if self.is_ancestor(ours, theirs)? {
            Ok(FfStatus::FastForward)
        } else {
            Ok(FfStatus::NeedsMerge)
        }
    }

    /// Reverse-chronological topological order of everything reachable
    /// from `heads`: children always precede parents, ties broken by
    /// timestamp (newest first) then id.
    pub fn toposort(&self, heads: &[ObjectId]) -> Result<Vec<ObjectId>> {
        let mut reachable = HashSet::new();
        for h in heads {
            reachable.extend(self.ancestor_set(h)?);
        }
        // child counts restricted to the reachable subgraph
        let mut pending_children: HashMap<ObjectId, usize> = HashMap::new();
        for id in &reachable {
            for p in &self.nodes[id].parents {
                if reachable.contains(p) {
                    *pending_children.entry(*p).or_insert(0) += 1;
                }
            }
        }
        let mut heap: BinaryHeap<(i64, ObjectId)> = reachable
            .iter()
            .filter(|id| pending_children.get(*id).copied().unwrap_or(0) == 0)
            .map(|id| (self.nodes[id].timestamp, *id))
            .collect();
        let mut out = Vec::with_capacity(reachable.len());
        while let Some((_, id)) = heap.pop() {
            out.push(id);
            for p in &self.nodes[&id].parents {
                if let Some(n) = pending_children.get_mut(p) {
                    *n -= 1;
                    if *n == 0 {
                        heap.push((self.nodes[p].timestamp, *p));
                    }
                }
            }
        }
        debug_assert_eq!(out.len(), reachable.len());
        Ok(out)
    }
}
