//! Weave storage: one interleaved structure holding every revision of
//! a file, with single-pass extraction and free annotation.
//!
//! Run with: cargo run --example weave_history

use vcs::object::HashAlgo;
use vcs::textdiff::split_lines;
use vcs::weave::Weave;

fn main() -> vcs::Result<()> {
    let rev = |label: &str| HashAlgo::default().digest_parts(&[label.as_bytes()]);

    let mut weave = Weave::new();
    weave.add(rev("v1"), None, &split_lines("one\ntwo\nthree\n"))?;
    weave.add(rev("v2"), Some(rev("v1")), &split_lines("one\ntwo improved\nthree\n"))?;
    weave.add(rev("v3"), Some(rev("v2")), &split_lines("one\ntwo improved\nfour\n"))?;

    println!("the weave interleaves all lines that ever existed:");
    for line in weave.lines() {
        let deleted: Vec<String> = line.delete_revs.iter().map(|d| d.short(6)).collect();
        print!(
            "  [{} {}] {}",
            line.insert_rev.short(6),
            if deleted.is_empty() {
                "live  ".to_string()
            } else {
                format!("-{}", deleted.join(","))
            },
            line.text
        );
    }

    for label in ["v1", "v2", "v3"] {
        println!("\nextract {label}:");
        for line in weave.extract(&rev(label))? {
            print!("  {line}");
        }
    }

    println!("\nannotate v3 (who introduced each surviving line):");
    for (text, by) in weave.annotate(&rev("v3"))?.lines {
        print!("  {} {}", by.short(6), text);
    }

    // the on-disk form is line oriented and human readable
    println!("\nserialized weave:\n{}", weave.serialize());
    Ok(())
}
