//! Unified diffs: emission, fuzzy application with offsets, combined
//! diffs of merges and pickaxe search.
//!
//! Run with: cargo run --example unified_patches

use std::collections::BTreeMap;

use vcs::object::HashAlgo;
use vcs::patch::{
    apply_unified, emit_combined, emit_unified, parse_unified, pickaxe, PickaxeCommit,
};
use vcs::textdiff::split_lines;

fn main() -> vcs::Result<()> {
    let old = split_lines("a\nb\nc\nd\ne\nf\ng\nh\n");
    let mut new = old.clone();
    new[4] = "E\n".to_string();
    let text = emit_unified(&old, &new, 3, "a/letters.txt", "b/letters.txt");
    println!("{text}");

    // apply to a shifted source: pure offset, no fuzz
    let shifted = format!("intro 1\nintro 2\nintro 3\n{}", old.concat());
    let patch = parse_unified(&text)?;
    let mut files = BTreeMap::new();
    files.insert("letters.txt".to_string(), shifted);
    let (result, placements) = apply_unified(&patch, &files, 2)?;
    println!(
        "applied with offset {:+} and fuzz {}:\n{}",
        placements[0].offset, placements[0].fuzz, result["letters.txt"]
    );

    // a combined diff shows only what the merge itself introduced
    let base = split_lines("stable\ndisputed v0\nstable end\n");
    let mut p1 = base.clone();
    p1[1] = "disputed v1\n".into();
    let mut p2 = base.clone();
    p2[1] = "disputed v2\n".into();
    let mut merged = base.clone();
    merged[1] = "disputed resolved\n".into();
    println!("combined diff of a hand-resolved conflict:");
    println!("{}", emit_combined(&[p1, p2], &merged, 1)?);

    // pickaxe: which commits changed the occurrence count of a string
    let id = |label: &str| HashAlgo::default().digest_parts(&[label.as_bytes()]);
    let history = vec![
        PickaxeCommit {
            id: id("r2"),
            parents: vec![id("r1")],
        },
        PickaxeCommit {
            id: id("r1"),
            parents: vec![],
        },
    ];
    let snapshots: BTreeMap<_, BTreeMap<String, Vec<u8>>> = [
        (
            id("r1"),
            [("main.rs".to_string(), b"let magic = 1;\n".to_vec())]
                .into_iter()
                .collect(),
        ),
        (
            id("r2"),
            [("main.rs".to_string(), b"let ordinary = 1;\n".to_vec())]
                .into_iter()
                .collect(),
        ),
    ]
    .into_iter()
    .collect();
    for hit in pickaxe(&history, |rev| Ok(snapshots[rev].clone()), b"magic")? {
        println!("pickaxe: {:?} in {} at {}", hit.change, hit.path, hit.commit.short(8));
    }
    Ok(())
}
