//! Interchange conformance against the system `patch` and `diff`
//! tools. Skipped quietly where the tools are not installed.

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;

use vcs::patch::{apply_unified, emit_unified, parse_unified};
use vcs::textdiff::Line;

fn have(tool: &str) -> bool {
    Command::new(tool)
        .arg("--version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn rng_lines(state: &mut u64, max: usize) -> Vec<Line> {
    let mut next = || {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 33) as usize
    };
    let len = next() % max;
    (0..len).map(|_| format!("line {}\n", next() % 8)).collect()
}

#[test]
fn emitted_diffs_apply_with_system_patch() {
    if !have("patch") {
        eprintln!("skipping: no system patch tool");
        return;
    }
    let mut state = 0x9e3779b9u64;
    for case in 0..40 {
        let a = rng_lines(&mut state, 40);
        let b = rng_lines(&mut state, 40);
        let text = emit_unified(&a, &b, 3, "a/work.txt", "b/work.txt");

        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("work.txt"), a.concat()).unwrap();
        fs::write(dir.path().join("change.patch"), &text).unwrap();
        let out = Command::new("patch")
            .current_dir(dir.path())
            .args(["-p1", "--quiet", "--input", "change.patch"])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "case {case}: patch rejected our diff:\n{}\n{}",
            text,
            String::from_utf8_lossy(&out.stderr)
        );
        let result = fs::read_to_string(dir.path().join("work.txt")).unwrap();
        assert_eq!(result, b.concat(), "case {case}: system patch diverged");
    }
}

#[test]
fn system_diff_output_applies_with_our_engine() {
    if !have("diff") {
        eprintln!("skipping: no system diff tool");
        return;
    }
    let mut state = 0x51f15eedu64;
    for case in 0..40 {
        let a = rng_lines(&mut state, 40);
        let b = rng_lines(&mut state, 40);
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("old"), a.concat()).unwrap();
        fs::write(dir.path().join("new"), b.concat()).unwrap();
        let out = Command::new("diff")
            .current_dir(dir.path())
            .args(["-u", "old", "new"])
            .output()
            .unwrap();
        let text = String::from_utf8_lossy(&out.stdout).into_owned();
        if text.is_empty() {
            continue; // identical inputs
        }
        let patch = parse_unified(&text)
            .unwrap_or_else(|e| panic!("case {case}: parse failed: {e}\n{text}"));
        let mut files = BTreeMap::new();
        files.insert("old".to_string(), a.concat());
        let (applied, _) = apply_unified(&patch, &files, 0)
            .unwrap_or_else(|e| panic!("case {case}: apply failed: {e}\n{text}"));
        // GNU diff labels both sides; our applier moves old -> new
        let result = applied
            .get("new")
            .or_else(|| applied.get("old"))
            .expect("output file present");
        assert_eq!(result, &b.concat(), "case {case}: application diverged");
    }
}
