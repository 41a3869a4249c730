use std::path::PathBuf;

use crate::object::ObjectId;

/// Crate-wide error type. Variants map one-to-one onto the failure
/// surfaces of the storage, history and merge layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // object store
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("corrupt object {id}: stored bytes hash to {actual}")]
    CorruptObject { id: ObjectId, actual: ObjectId },
    #[error("ambiguous prefix {prefix}: {count} matches")]
    AmbiguousPrefix { prefix: String, count: usize },
    #[error("bad object id prefix {0:?} (need >= 4 hex digits)")]
    BadPrefix(String),
    #[error("malformed {kind} object: {reason}")]
    MalformedObject { kind: &'static str, reason: String },

    // text diff
    #[error("edit script mismatch at op {0}")]
    ScriptMismatch(usize),

    // binary delta
    #[error("base length mismatch: delta expects {expected}, got {actual}")]
    BaseLengthMismatch { expected: usize, actual: usize },
    #[error("copy out of range: offset {offset} len {len} base {base_len}")]
    CopyOutOfRange {
        offset: usize,
        len: usize,
        base_len: usize,
    },
    #[error("delta chain mismatch: first target {first}, second base {second}")]
    ChainMismatch { first: usize, second: usize },
    #[error("malformed binary delta: {0}")]
    MalformedDelta(String),

    // weave
    #[error("duplicate weave revision {0}")]
    DuplicateRevision(ObjectId),
    #[error("unknown weave parent {0}")]
    UnknownParent(ObjectId),
    #[error("unknown weave revision {0}")]
    UnknownRevision(ObjectId),
    #[error("malformed weave file: {0}")]
    MalformedWeave(String),

    // revlog
    #[error("revlog lock held: {0}")]
    LockHeld(PathBuf),
    #[error("revlog entry {0} out of range")]
    OutOfRange(usize),
    #[error("corrupt revlog hunk at entry {0}")]
    CorruptHunk(usize),
    #[error("malformed revlog: {0}")]
    MalformedRevlog(String),

    // pack store
    #[error("dangling reference {0} while packing")]
    DanglingReference(ObjectId),
    #[error("corrupt pack: {0}")]
    CorruptPack(String),

    // history dag
    #[error("unknown commit {0}")]
    UnknownCommit(String),
    #[error("no common ancestor")]
    EmptyResult,
    #[error("unrelated histories have no merge base")]
    UnrelatedHistories,
    #[error("no marked ancestor for attribute on either side")]
    NoMarks,

    // patches
    #[error("hunk {hunk} failed to apply to {file}")]
    HunkFailed { file: String, hunk: usize },
    #[error("malformed patch: {0}")]
    MalformedPatch(String),

    // repository / cli
    #[error("not a repository (no .vcs directory above {0})")]
    NotARepository(PathBuf),
    #[error("working tree has uncommitted changes (use --force to discard)")]
    DirtyTree,
    #[error("unknown ref {0}")]
    UnknownRef(String),
    #[error("merge conflicts pending; resolve and commit first")]
    ConflictsPending,
    #[error("push rejected: remote {branch} is not an ancestor (pull first)")]
    NonFastForwardPush { branch: String },
    #[error("unknown remote repository at {0}")]
    UnknownRemote(PathBuf),
    #[error("{0}")]
    Usage(String),

    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
