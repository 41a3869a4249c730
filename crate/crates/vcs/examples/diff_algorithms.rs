//! The three line-diff algorithms side by side.
//!
//! Run with: cargo run --example diff_algorithms

use vcs::textdiff::{apply_edit_script, bdiff, myers_diff, patience_diff, split_lines, EditOp};

fn main() {
    let old = split_lines(
        "fn greet() {\n    hello();\n}\n\nfn farewell() {\n    bye();\n}\n",
    );
    let new = split_lines(
        "fn greet() {\n    hello();\n}\n\nfn chat() {\n    talk();\n}\n\nfn farewell() {\n    bye();\n}\n",
    );

    for (name, diff) in [
        ("myers", myers_diff as fn(&[String], &[String]) -> _),
        ("patience", patience_diff),
        ("bdiff", bdiff),
    ] {
        let script = diff(&old, &new);
        println!("== {name}: cost {} ==", script.cost());
        for op in &script.ops {
            match op {
                EditOp::Keep { line, .. } => print!("  {line}"),
                EditOp::Delete { a_index } => print!("- {}", old[*a_index]),
                EditOp::Insert { line, .. } => print!("+ {line}"),
            }
        }
        // every script replays exactly
        assert_eq!(apply_edit_script(&old, &script).unwrap(), new);
        println!();
    }
}
