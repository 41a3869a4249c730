//! History DAG semantics: ancestry, merge-base candidates in a
//! criss-cross, fast-forward classification and topological order.
//!
//! Run with: cargo run --example history_dag

use vcs::dag::{FfStatus, HistoryDag};
use vcs::object::HashAlgo;

fn main() -> vcs::Result<()> {
    let id = |label: &str| HashAlgo::default().digest_parts(&[label.as_bytes()]);

    // base -> x0, y0; each then merged the other once (criss-cross)
    let mut dag = HistoryDag::new();
    dag.add_node(id("base"), &[], 1)?;
    dag.add_node(id("x0"), &[id("base")], 2)?;
    dag.add_node(id("y0"), &[id("base")], 3)?;
    dag.add_node(id("x1"), &[id("x0"), id("y0")], 4)?;
    dag.add_node(id("y1"), &[id("y0"), id("x0")], 5)?;

    println!(
        "is_ancestor(base, x1) = {}",
        dag.is_ancestor(&id("base"), &id("x1"))?
    );
    println!(
        "is_ancestor(x1, y1)   = {}",
        dag.is_ancestor(&id("x1"), &id("y1"))?
    );

    let candidates = dag.lca_candidates(&id("x1"), &id("y1"))?;
    println!(
        "merge bases of the criss-cross heads: {} candidates (both first merges)",
        candidates.len()
    );

    for (ours, theirs, note) in [
        ("x1", "x1", "same commit"),
        ("base", "x1", "descendant"),
        ("x1", "y1", "true fork"),
    ] {
        let status = dag.ff_status(&id(ours), &id(theirs))?;
        let text = match status {
            FfStatus::AlreadyUpToDate => "already up to date",
            FfStatus::FastForward => "fast-forward",
            FfStatus::NeedsMerge => "needs a merge",
        };
        println!("ff_status({ours}, {theirs}) = {text}  ({note})");
    }

    println!("\ntopological order from x1 and y1, newest first:");
    let names = ["base", "x0", "y0", "x1", "y1"];
    for commit in dag.toposort(&[id("x1"), id("y1")])? {
        let name = names.iter().find(|n| id(n) == commit).unwrap();
        println!("  {name}");
    }
    Ok(())
}
