//! A self-contained distributed version control engine.
//!
//! The crate is organized as a library with a thin `vcs` binary on top.
//! The layers, bottom to top:
//!
//! - [`object`]: content-addressed blobs, trees and commits plus the
//!   loose one-file-per-object store.
//! - [`textdiff`]: Myers, patience and bdiff line diffs.
//! - [`bindelta`]: rolling-hash binary deltas, application and chain
//!   combination.
//! - [`weave`]: interleaved single-file history with cheap annotation.
//! - [`revlog`]: append-only per-file revision logs.
//! - [`pack`]: delta-compressed object packs and garbage collection.
//! - [`dag`]: commit graph, merge bases, fast-forward detection.
//! - [`merge`]: three-way, recursive, weave (PCDV) and scalar mark
//!   merges plus rename detection.
//! - [`patch`]: unified diffs, fuzzy application, combined diffs and
//!   pickaxe search.
//! - [`repo`]: repository lifecycle tying storage and history together.
//! - [`cli`]: the command-line surface used by the `vcs` binary.
//!
//! Runnable demonstrations of each capability live in `examples/`.

pub mod bindelta;
pub mod cli;
pub mod dag;
pub mod error;
pub mod merge;
pub mod object;
pub mod pack;
pub mod patch;
pub mod repo;
pub mod revlog;
pub mod textdiff;
pub mod weave;

pub use error::{Error, Result};
