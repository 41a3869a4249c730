//! Similarity scoring and rename detection between two file sets.

use std::collections::{BTreeMap, HashMap};

/// Similarity of two byte strings in `[0, 1]`, computed as the multiset
/// overlap of their line-based chunks divided by the larger side's
/// chunk count. Identical inputs (including two empty files) score 1.0,
/// disjoint content 0.0.
pub fn similarity_index(a: &[u8], b: &[u8]) -> f64 {
    if a == b {
        return 1.0;
    }
    let chunks_a = chunk_counts(a);
    let chunks_b = chunk_counts(b);
    let total_a: usize = chunks_a.values().sum();
    let total_b: usize = chunks_b.values().sum();
    let larger = total_a.max(total_b);
    if larger == 0 {
        return 1.0;
    }
    let mut common = 0usize;
    for (chunk, &na) in &chunks_a {
        if let Some(&nb) = chunks_b.get(chunk) {
            common += na.min(nb);
        }
    }
    common as f64 / larger as f64
}

/// Line-based chunking: split after every `\n`, final partial chunk
/// included.
fn chunk_counts(data: &[u8]) -> HashMap<&[u8], usize> {
    let mut map: HashMap<&[u8], usize> = HashMap::new();
    let mut start = 0usize;
    for (i, &b) in data.iter().enumerate() {
        if b == b'\n' {
            *map.entry(&data[start..=i]).or_insert(0) += 1;
            start = i + 1;
        }
    }
    if start < data.len() {
        *map.entry(&data[start..]).or_insert(0) += 1;
    }
    map
}

#[derive(Clone, PartialEq, Debug)]
pub struct RenameMatch {
    pub old_path: String,
    pub new_path: String,
    pub score: f64,
}

/// Pairs paths deleted between `old_files` and `new_files` with added
/// paths by greedy best-score matching. Each path is matched at most
/// once; candidates below `threshold` are ignored; ties resolve by path
/// order.
pub fn detect_renames(
    old_files: &BTreeMap<String, Vec<u8>>,
    new_files: &BTreeMap<String, Vec<u8>>,
    threshold: f64,
) -> Vec<RenameMatch> {
    let deleted: Vec<&String> = old_files
        .keys()
        .filter(|p| !new_files.contains_key(*p))
        .collect();
    let added: Vec<&String> = new_files
        .keys()
        .filter(|p| !old_files.contains_key(*p))
        .collect();

    let mut candidates: Vec<RenameMatch> = Vec::new();
    for old in &deleted {
        for new in &added {
            let score = similarity_index(&old_files[*old], &new_files[*new]);
            if score >= threshold {
                candidates.push(RenameMatch {
                    old_path: (*old).clone(),
                    new_path: (*new).clone(),
                    score,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| a.old_path.cmp(&b.old_path))
            .then_with(|| a.new_path.cmp(&b.new_path))
    });

    let mut used_old = Vec::new();
    let mut used_new = Vec::new();
    let mut out = Vec::new();
    for cand in candidates {
        if used_old.contains(&cand.old_path) || used_new.contains(&cand.new_path) {
            continue;
        }
        used_old.push(cand.old_path.clone());
        used_new.push(cand.new_path.clone());
        out.push(cand);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn files(entries: &[(&str, &str)]) -> BTreeMap<String, Vec<u8>> {
        entries
            .iter()
            .map(|(p, c)| (p.to_string(), c.as_bytes().to_vec()))
            .collect()
    }

    #[test]
    fn identical_files_score_one() {
        assert_eq!(similarity_index(b"a\nb\nc\n", b"a\nb\nc\n"), 1.0);
        assert_eq!(similarity_index(b"", b""), 1.0);
    }

    #[test]
    fn disjoint_content_scores_zero() {
        assert_eq!(similarity_index(b"a\nb\n", b"x\ny\n"), 0.0);
        assert_eq!(similarity_index(b"", b"x\n"), 0.0);
    }

    #[test]
    fn half_replaced_matches_line_multiset_oracle() {
        let mut state = 0xccu64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for _ in 0..50 {
            let n = 10 + next() % 40;
            let a_lines: Vec<String> = (0..n).map(|i| format!("line-{}-{i}\n", next() % 9)).collect();
            let mut b_lines = a_lines.clone();
            for i in 0..n / 2 {
                b_lines[i * 2] = format!("replaced-{}\n", next());
            }
            let a = a_lines.concat().into_bytes();
            let b = b_lines.concat().into_bytes();

            // exact multiset oracle over lines
            let mut counts: HashMap<&str, i64> = HashMap::new();
            for l in &a_lines {
                *counts.entry(l).or_insert(0) += 1;
            }
            let mut common = 0i64;
            for l in &b_lines {
                let c = counts.entry(l).or_insert(0);
                if *c > 0 {
                    *c -= 1;
                    common += 1;
                }
            }
            let oracle = common as f64 / a_lines.len().max(b_lines.len()) as f64;
            let got = similarity_index(&a, &b);
            assert!(
                (got - oracle).abs() <= 0.1,
                "similarity {got} too far from oracle {oracle}"
            );
        }
    }

    #[test]
    fn pure_rename_detected_at_full_score() {
        let old = files(&[("src/old.rs", "fn main() {}\n")]);
        let new = files(&[("src/new.rs", "fn main() {}\n")]);
        let matches = detect_renames(&old, &new, 0.5);
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].old_path, "src/old.rs");
        assert_eq!(matches[0].new_path, "src/new.rs");
        assert_eq!(matches[0].score, 1.0);
    }

    #[test]
    fn unrelated_add_and_delete_do_not_pair() {
        let old = files(&[("gone.txt", "alpha\nbeta\n")]);
        let new = files(&[("fresh.txt", "gamma\ndelta\n")]);
        assert!(detect_renames(&old, &new, 0.5).is_empty());
    }

    #[test]
    fn rename_with_small_edit_detected() {
        let content: String = (0..20).map(|i| format!("line {i}\n")).collect();
        let mut edited = content.clone();
        edited.push_str("one more line\n");
        let old = files(&[("a.txt", &content)]);
        let new = files(&[("b.txt", &edited)]);
        let matches = detect_renames(&old, &new, 0.5);
        assert_eq!(matches.len(), 1);
        let expect = similarity_index(content.as_bytes(), edited.as_bytes());
        assert_eq!(matches[0].score, expect);
        assert!(matches[0].score > 0.9);
    }

    #[test]
    fn each_path_matched_once() {
        let old = files(&[("a.txt", "same\ncontent\n"), ("b.txt", "same\ncontent\n")]);
        let new = files(&[("c.txt", "same\ncontent\n")]);
        let matches = detect_renames(&old, &new, 0.5);
        assert_eq!(matches.len(), 1);
        // tie broken by path order
        assert_eq!(matches[0].old_path, "a.txt");
    }

    #[test]
    fn unchanged_paths_do_not_participate() {
        let old = files(&[("keep.txt", "x\n"), ("gone.txt", "y\n")]);
        let new = files(&[("keep.txt", "x\n"), ("arrived.txt", "y\n")]);
        let matches = detect_renames(&old, &new, 0.5);
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].old_path, "gone.txt");
        assert_eq!(matches[0].new_path, "arrived.txt");
    }
}
