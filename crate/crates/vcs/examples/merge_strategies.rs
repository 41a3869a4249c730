//! Merge strategies compared: three-way, recursive on a criss-cross,
//! the weave merge's deletion precedence, and scalar mark merge.
//!
//! Run with: cargo run --example merge_strategies

use std::collections::{BTreeMap, BTreeSet};

use vcs::dag::HistoryDag;
use vcs::merge::{
    mark_merge, pcdv_merge, recursive_merge, three_way_merge, MergeLabels, ScalarMergeResult,
};
use vcs::object::{HashAlgo, ObjectId};
use vcs::textdiff::split_lines;
use vcs::weave::Weave;

fn main() -> vcs::Result<()> {
    let id = |label: &str| HashAlgo::default().digest_parts(&[label.as_bytes()]);
    let labels = MergeLabels::new("ours", "theirs");

    // -- three-way: disjoint edits merge cleanly
    let base = split_lines("first\nsecond\nthird\n");
    let ours = split_lines("FIRST\nsecond\nthird\n");
    let theirs = split_lines("first\nsecond\nTHIRD\n");
    let m = three_way_merge(&base, &ours, &theirs, &labels);
    println!("three-way, disjoint edits (clean={}):\n{}", m.clean, m.text());

    // -- recursive: the criss-cross with opposite resolutions
    let mut dag = HistoryDag::new();
    dag.add_node(id("base"), &[], 1)?;
    dag.add_node(id("x0"), &[id("base")], 2)?;
    dag.add_node(id("y0"), &[id("base")], 3)?;
    dag.add_node(id("x1"), &[id("x0"), id("y0")], 4)?;
    dag.add_node(id("y1"), &[id("y0"), id("x0")], 5)?;
    let contents: BTreeMap<ObjectId, Vec<String>> = [
        (id("base"), split_lines("value v0\n")),
        (id("x0"), split_lines("value vx\n")),
        (id("y0"), split_lines("value vy\n")),
        (id("x1"), split_lines("value vx\n")), // resolved toward x0
        (id("y1"), split_lines("value vy\n")), // resolved toward y0
    ]
    .into_iter()
    .collect();
    let get = |rev: &ObjectId| Ok(contents[rev].clone());

    // a naive three-way against one old base silently picks a side
    let naive = three_way_merge(&contents[&id("x0")], &contents[&id("x1")], &contents[&id("y1")], &labels);
    println!("naive single-base three-way (clean={}): {}", naive.clean, naive.text());

    let rec = recursive_merge(&dag, &get, &id("x1"), &id("y1"), &labels)?;
    println!("recursive merge (clean={}):\n{}", rec.clean, rec.text());

    // -- weave merge: a deletion wins over an untouched line
    let mut weave = Weave::new();
    weave.add(id("w0"), None, &split_lines("keep\ndoomed\ntail\n"))?;
    weave.add(id("wx"), Some(id("w0")), &split_lines("keep\ntail\n"))?;
    weave.add(id("wy"), Some(id("w0")), &split_lines("keep\ndoomed\ntail\n"))?;
    let m = pcdv_merge(&weave, &id("wx"), &id("wy"), &labels)?;
    println!("weave merge, delete vs untouched (clean={}):\n{}", m.clean, m.text());

    // -- mark merge on a scalar attribute (a file name)
    let mut mdag = HistoryDag::new();
    mdag.add_node(id("root"), &[], 1)?;
    mdag.add_node(id("mx"), &[id("root")], 2)?;
    mdag.add_node(id("my"), &[id("root")], 3)?;
    let marks: BTreeSet<ObjectId> = [id("root"), id("my")].into_iter().collect();
    let result = mark_merge(&mdag, &marks, &id("mx"), &id("my"), "old.rs", "new.rs")?;
    match result {
        ScalarMergeResult::Value(name) => println!("mark merge picked {name}"),
        ScalarMergeResult::Conflict { ours, theirs } => {
            println!("mark merge conflict: {ours} vs {theirs}")
        }
    }
    Ok(())
}
