//! Rolling-hash binary deltas: encoding, application and chain
//! combination.
//!
//! Run with: cargo run --example binary_delta

use vcs::bindelta::{apply, combine, encode, make, DeltaOp};

fn main() -> vcs::Result<()> {
    // a synthetic "binary" base with a recognizable pattern
    let base: Vec<u8> = (0..32_768u32).flat_map(|i| i.to_le_bytes()).collect();

    // v1: a small patch in the middle
    let mut v1 = base.clone();
    v1[60_000..60_016].copy_from_slice(b"PATCHED-SECTION!");
    // v2: bytes appended
    let mut v2 = v1.clone();
    v2.extend_from_slice(b"trailing addition");

    let d1 = make(&base, &v1, 16);
    let d2 = make(&v1, &v2, 16);
    for (name, delta) in [("base->v1", &d1), ("v1->v2", &d2)] {
        let copies = delta
            .ops
            .iter()
            .filter(|op| matches!(op, DeltaOp::Copy { .. }))
            .count();
        println!(
            "{name}: {} ops ({copies} copies), {} insert bytes, wire {} bytes for a {}-byte target",
            delta.ops.len(),
            delta.insert_bytes(),
            encode(delta).len(),
            delta.target_len,
        );
    }

    // chains are combined into one delta before application
    let chained = combine(&d1, &d2)?;
    println!(
        "combined base->v2: {} ops, wire {} bytes",
        chained.ops.len(),
        encode(&chained).len()
    );
    assert_eq!(apply(&base, &chained)?, v2);
    assert_eq!(apply(&v1, &d2)?, v2);
    println!("combined apply matches sequential apply");
    Ok(())
}
