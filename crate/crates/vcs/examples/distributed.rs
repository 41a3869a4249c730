//! The distributed workflow end to end: two clones working in
//! parallel, push, pull with a merge, and the closing fast-forward.
//!
//! Run with: cargo run --example distributed

use std::fs;

use vcs::repo::{MergeOpts, MergeOutcome, Repository, StorageBackend, Strategy};

fn main() -> vcs::Result<()> {
    let root = tempfile::tempdir().expect("tempdir");
    let hub_dir = root.path().join("hub");
    fs::create_dir_all(&hub_dir)?;

    // the shared repository with one base commit
    let mut hub = Repository::init(&hub_dir, StorageBackend::Revlog)?;
    fs::write(hub_dir.join("notes.txt"), "project notes\n")?;
    let base = hub.commit_worktree("base\n", "hub", 100)?;
    println!("hub base commit {}", base.short(12));

    // two full clones
    let mut alice = hub.clone_to(&root.path().join("alice"))?;
    let mut bob = hub.clone_to(&root.path().join("bob"))?;

    // parallel work
    fs::write(alice.root().join("alice.txt"), "from alice\n")?;
    alice.commit_worktree("alice work\n", "alice", 110)?;
    fs::write(bob.root().join("bob.txt"), "from bob\n")?;
    bob.commit_worktree("bob work\n", "bob", 120)?;

    // alice publishes first
    alice.push(&hub_dir, None)?;
    println!("alice pushed");

    // bob is behind now: his pull merges the two lines of work
    let opts = MergeOpts {
        strategy: Strategy::Recursive,
        base_override: None,
        author: "bob".into(),
        timestamp: 130,
    };
    match bob.pull(&hub_dir, None, &opts)?.0 {
        MergeOutcome::Merged(id) => println!("bob pulled and merged as {}", id.short(12)),
        other => println!("bob pull: {other:?}"),
    }
    bob.push(&hub_dir, None)?;
    println!("bob pushed the merge");

    // alice only fast-forwards: no extra merge node
    match alice.pull(&hub_dir, None, &opts)?.0 {
        MergeOutcome::FastForward(id) => {
            println!("alice fast-forwarded to {}", id.short(12))
        }
        other => println!("alice pull: {other:?}"),
    }

    // both clones converge on identical content
    let a = fs::read_to_string(alice.root().join("bob.txt"))?;
    let b = fs::read_to_string(bob.root().join("alice.txt"))?;
    println!("alice sees bob's file: {a:?}; bob sees alice's: {b:?}");

    // the closure audit: every object reachable from the shared head
    let head = alice.head_commit()?.expect("head exists");
    let objects = alice.closure_complete(&[head])?;
    println!("closure audit: {objects} objects reachable and readable");
    Ok(())
}
