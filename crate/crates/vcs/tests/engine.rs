//! Library-level integration over the repository engine: backend
//! equivalence, transfer closure audits and history safety.

use std::fs;
use std::path::Path;

use vcs::object::ObjectId;
use vcs::repo::{MergeOpts, MergeOutcome, Repository, StorageBackend, Strategy};

fn write(root: &Path, path: &str, content: &str) {
    let full = root.join(path);
    fs::create_dir_all(full.parent().unwrap()).unwrap();
    fs::write(full, content).unwrap();
}

fn opts(t: i64) -> MergeOpts {
    MergeOpts {
        strategy: Strategy::Recursive,
        base_override: None,
        author: "tester".into(),
        timestamp: t,
    }
}

/// One scripted history: base, two branches, a conflict-free merge,
/// then one more commit. Returns every commit id in creation order.
fn run_scenario(repo: &mut Repository) -> Vec<ObjectId> {
    let root = repo.root().to_path_buf();
    let mut ids = Vec::new();

    write(&root, "src/lib.rs", "fn one() {}\n");
    write(&root, "README", "about\n");
    ids.push(repo.commit_worktree("base\n", "tester", 100).unwrap());

    repo.create_branch("side", None).unwrap();
    write(&root, "src/lib.rs", "fn one() {}\nfn two() {}\n");
    ids.push(repo.commit_worktree("two\n", "tester", 110).unwrap());

    repo.checkout("side", false).unwrap();
    write(&root, "README", "about\nmore docs\n");
    ids.push(repo.commit_worktree("docs\n", "tester", 120).unwrap());

    repo.checkout("main", false).unwrap();
    match repo.merge("side", &opts(130)).unwrap() {
        MergeOutcome::Merged(id) => ids.push(id),
        other => panic!("expected clean merge, got {other:?}"),
    }

    write(&root, "src/lib.rs", "fn one() {}\nfn two() {}\nfn three() {}\n");
    ids.push(repo.commit_worktree("three\n", "tester", 140).unwrap());
    ids
}

#[test]
fn storage_backends_produce_identical_histories() {
    let dir_r = tempfile::tempdir().unwrap();
    let dir_w = tempfile::tempdir().unwrap();
    let mut repo_r = Repository::init(dir_r.path(), StorageBackend::Revlog).unwrap();
    let mut repo_w = Repository::init(dir_w.path(), StorageBackend::Weave).unwrap();

    let ids_r = run_scenario(&mut repo_r);
    let ids_w = run_scenario(&mut repo_w);

    // identical commit ids at every step
    assert_eq!(ids_r, ids_w);

    // identical file contents at every revision, and the content read
    // back through each backend matches the object store
    for id in &ids_r {
        let files_r = repo_r.tree_contents(id).unwrap();
        let files_w = repo_w.tree_contents(id).unwrap();
        assert_eq!(files_r, files_w);

        for (path, content) in &files_r {
            // revlog path: the linked blob must reconstruct identically
            let log = repo_r.open_revlog(path).unwrap();
            let blob = vcs::object::hash_object(
                repo_r.algo(),
                vcs::object::Kind::Blob,
                content,
            );
            let seq = log.seq_of(&blob).expect("revision stored in revlog");
            assert_eq!(&log.read(seq).unwrap(), content);

            // weave path: extraction at the introducing revision
            let weave = repo_w.load_weave(path).unwrap();
            let file_rev = repo_w.file_rev_at(id, path).unwrap().unwrap();
            let extracted = weave.extract(&file_rev).unwrap().concat();
            assert_eq!(extracted.as_bytes(), &content[..]);
        }
    }
}

#[test]
fn annotate_agrees_across_backends() {
    let dir_r = tempfile::tempdir().unwrap();
    let dir_w = tempfile::tempdir().unwrap();
    let mut repo_r = Repository::init(dir_r.path(), StorageBackend::Revlog).unwrap();
    let mut repo_w = Repository::init(dir_w.path(), StorageBackend::Weave).unwrap();
    let ids_r = run_scenario(&mut repo_r);
    let ids_w = run_scenario(&mut repo_w);

    let head_r = *ids_r.last().unwrap();
    let head_w = *ids_w.last().unwrap();
    for path in ["src/lib.rs", "README"] {
        let a = repo_r.annotate(path, &head_r).unwrap();
        let b = repo_w.annotate(path, &head_w).unwrap();
        assert_eq!(a, b, "annotate diverged for {path}");
    }
}

#[test]
fn transfers_are_id_complete() {
    let dir_a = tempfile::tempdir().unwrap();
    let mut a = Repository::init(dir_a.path(), StorageBackend::Revlog).unwrap();
    run_scenario(&mut a);
    let head_a = a.head_commit().unwrap().unwrap();

    // clone: full closure present
    let dir_b = tempfile::tempdir().unwrap();
    let clone_target = dir_b.path().join("clone");
    let b = a.clone_to(&clone_target).unwrap();
    let count_a = a.closure_complete(&[head_a]).unwrap();
    let count_b = b.closure_complete(&[head_a]).unwrap();
    assert_eq!(count_a, count_b);

    // push: a fresh commit's closure lands at the remote
    let mut b = Repository::open_at(&clone_target).unwrap();
    write(b.root(), "pushed.txt", "pushed content\n");
    let new_commit = b.commit_worktree("pushed\n", "tester", 200).unwrap();
    b.push(dir_a.path(), None).unwrap();
    let a = Repository::open_at(dir_a.path()).unwrap();
    a.closure_complete(&[new_commit]).unwrap();
    assert_eq!(a.read_ref("main").unwrap(), new_commit);
}

#[test]
fn pull_never_rewrites_local_history() {
    let dir_a = tempfile::tempdir().unwrap();
    let mut a = Repository::init(dir_a.path(), StorageBackend::Revlog).unwrap();
    run_scenario(&mut a);

    let dir_b = tempfile::tempdir().unwrap();
    let clone_target = dir_b.path().join("clone");
    a.clone_to(&clone_target).unwrap();
    let mut b = Repository::open_at(&clone_target).unwrap();

    // diverge both sides
    write(a.root(), "a-only.txt", "a\n");
    a.commit_worktree("a work\n", "tester", 210).unwrap();
    write(b.root(), "b-only.txt", "b\n");
    let b_head_before = b.commit_worktree("b work\n", "tester", 220).unwrap();

    let before: Vec<ObjectId> = {
        let dag = b.load_dag(&[]).unwrap();
        dag.toposort(&[b_head_before]).unwrap()
    };

    let (outcome, _) = b.pull(dir_a.path(), None, &opts(230)).unwrap();
    assert!(matches!(outcome, MergeOutcome::Merged(_)));

    // every previously reachable commit is still reachable
    let head_after = b.head_commit().unwrap().unwrap();
    let dag = b.load_dag(&[]).unwrap();
    let reachable = dag.ancestor_set(&head_after).unwrap();
    for id in before {
        assert!(reachable.contains(&id), "commit {id} lost by pull");
    }
}

#[test]
fn unrelated_histories_refuse_to_merge() {
    let dir_a = tempfile::tempdir().unwrap();
    let mut a = Repository::init(dir_a.path(), StorageBackend::Revlog).unwrap();
    write(a.root(), "a.txt", "a\n");
    a.commit_worktree("a\n", "tester", 100).unwrap();

    let dir_b = tempfile::tempdir().unwrap();
    let mut b = Repository::init(dir_b.path(), StorageBackend::Revlog).unwrap();
    write(b.root(), "b.txt", "b\n");
    b.commit_worktree("b\n", "tester", 110).unwrap();

    // pulling an unrelated repository's branch must fail cleanly
    let result = a.pull(dir_b.path(), Some("main"), &opts(120));
    assert!(matches!(result, Err(vcs::Error::UnrelatedHistories)));
}

#[test]
fn rename_with_modification_merges_under_new_name() {
    let dir = tempfile::tempdir().unwrap();
    let mut repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
    let content: String = (0..10).map(|i| format!("line {i}\n")).collect();
    write(repo.root(), "old-name.txt", &content);
    repo.commit_worktree("base\n", "tester", 100).unwrap();
    repo.create_branch("renamer", None).unwrap();

    // main edits the file in place
    let edited = content.replace("line 3", "line 3 edited");
    write(repo.root(), "old-name.txt", &edited);
    repo.commit_worktree("edit\n", "tester", 110).unwrap();

    // the other side renames it untouched
    repo.checkout("renamer", false).unwrap();
    fs::rename(
        repo.root().join("old-name.txt"),
        repo.root().join("new-name.txt"),
    )
    .unwrap();
    repo.commit_worktree("rename\n", "tester", 120).unwrap();

    repo.checkout("main", false).unwrap();
    match repo.merge("renamer", &opts(130)).unwrap() {
        MergeOutcome::Merged(id) => {
            let files = repo.tree_contents(&id).unwrap();
            assert!(files.contains_key("new-name.txt"), "{:?}", files.keys());
            assert!(!files.contains_key("old-name.txt"));
            assert_eq!(
                String::from_utf8_lossy(&files["new-name.txt"]),
                edited,
                "edit lost across the rename"
            );
        }
        other => panic!("expected clean merge, got {other:?}"),
    }
}

#[test]
fn pcdv_requires_weave_backend() {
    let dir = tempfile::tempdir().unwrap();
    let mut repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
    write(repo.root(), "f.txt", "x\n");
    repo.commit_worktree("base\n", "tester", 100).unwrap();
    repo.create_branch("side", None).unwrap();
    write(repo.root(), "f.txt", "x\ny\n");
    repo.commit_worktree("main\n", "tester", 110).unwrap();
    repo.checkout("side", false).unwrap();
    write(repo.root(), "f.txt", "w\nx\n");
    repo.commit_worktree("side\n", "tester", 120).unwrap();
    repo.checkout("main", false).unwrap();

    let mut pcdv = opts(130);
    pcdv.strategy = Strategy::Pcdv;
    assert!(matches!(
        repo.merge("side", &pcdv),
        Err(vcs::Error::Usage(_))
    ));
}

/// Randomized operation soup over both backends: commits, branches,
/// checkouts, merges (conflicts resolved by committing the markers),
/// gc. After every step the tree is clean, the closure is complete and
/// every live path annotates.
#[test]
fn randomized_operations_keep_invariants() {
    let mut state = 0xf00du64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 33) as usize
    };
    for round in 0..4 {
        let backend = if round % 2 == 0 {
            StorageBackend::Revlog
        } else {
            StorageBackend::Weave
        };
        let dir = tempfile::tempdir().unwrap();
        let mut repo = Repository::init(dir.path(), backend).unwrap();
        let mut time = 1000i64;
        let mut branch_count = 0usize;
        let paths = ["alpha.txt", "beta.txt", "dir/gamma.txt"];

        fs::write(dir.path().join("alpha.txt"), "seed\n").unwrap();
        repo.commit_worktree("seed\n", "fuzz", time).unwrap();

        for step in 0..40 {
            time += 10;
            match next() % 10 {
                0..=4 => {
                    let path = paths[next() % paths.len()];
                    let full = dir.path().join(path);
                    fs::create_dir_all(full.parent().unwrap()).unwrap();
                    let mut content = String::new();
                    for _ in 0..1 + next() % 6 {
                        content.push_str(&format!("{} {}\n", next() % 5, next() % 9));
                    }
                    fs::write(full, content).unwrap();
                    match repo.commit_worktree(&format!("step {step}\n"), "fuzz", time) {
                        Ok(_) => {}
                        Err(vcs::Error::Usage(msg)) if msg.contains("nothing to commit") => {}
                        Err(e) => panic!("round {round} step {step}: commit: {e}"),
                    }
                }
                5 | 6 => {
                    branch_count += 1;
                    let name = format!("b{branch_count}");
                    if repo.create_branch(&name, None).is_ok() && next() % 2 == 0 {
                        repo.checkout(&name, true).unwrap();
                    }
                }
                7 => {
                    let branches: Vec<String> = repo.branches().unwrap().keys().cloned().collect();
                    let target = branches[next() % branches.len()].clone();
                    repo.checkout(&target, true).unwrap();
                }
                8 => {
                    let branches: Vec<String> = repo.branches().unwrap().keys().cloned().collect();
                    if branches.len() > 1 {
                        let target = branches[next() % branches.len()].clone();
                        let merge_opts = MergeOpts {
                            strategy: if backend == StorageBackend::Weave && next() % 3 == 0 {
                                Strategy::Pcdv
                            } else if next() % 2 == 0 {
                                Strategy::Recursive
                            } else {
                                Strategy::ThreeWay
                            },
                            base_override: None,
                            author: "fuzz".into(),
                            timestamp: time,
                        };
                        match repo.merge(&target, &merge_opts) {
                            Ok(MergeOutcome::Conflicts(_)) => {
                                repo.commit_worktree("resolve\n", "fuzz", time + 1).unwrap();
                            }
                            Ok(_) => {}
                            Err(vcs::Error::Usage(_)) => {}
                            Err(e) => panic!("round {round} step {step}: merge {target}: {e}"),
                        }
                    }
                }
                _ => {
                    repo.gc(false).unwrap();
                }
            }

            let status = repo.status().unwrap();
            assert!(
                status.is_clean(),
                "round {round} step {step}: dirty after op: {:?}",
                status.entries
            );
            if let Some(head) = repo.head_commit().unwrap() {
                repo.closure_complete(&[head]).unwrap();
                for (path, _) in repo.tree_files(&head).unwrap() {
                    repo.annotate(&path, &head).unwrap_or_else(|e| {
                        panic!("round {round} step {step}: annotate {path}: {e}")
                    });
                }
            }
        }
    }
}

#[test]
fn deletion_propagates_and_modify_delete_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let mut repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
    write(repo.root(), "stays.txt", "stays\n");
    write(repo.root(), "goes.txt", "goes\n");
    write(repo.root(), "disputed.txt", "line\n");
    repo.commit_worktree("base\n", "tester", 100).unwrap();
    repo.create_branch("deleter", None).unwrap();

    // main edits the disputed file
    write(repo.root(), "disputed.txt", "line edited\n");
    repo.commit_worktree("edit disputed\n", "tester", 110).unwrap();

    // the other side deletes one file cleanly and the disputed one too
    repo.checkout("deleter", false).unwrap();
    fs::remove_file(repo.root().join("goes.txt")).unwrap();
    fs::remove_file(repo.root().join("disputed.txt")).unwrap();
    repo.commit_worktree("delete files\n", "tester", 120).unwrap();

    repo.checkout("main", false).unwrap();
    match repo.merge("deleter", &opts(130)).unwrap() {
        MergeOutcome::Conflicts(conflicts) => {
            // the clean deletion propagated to the working tree
            assert!(!repo.root().join("goes.txt").exists());
            assert!(repo.root().join("stays.txt").exists());
            // the modify/delete collision is a conflict keeping the edit
            assert_eq!(conflicts.len(), 1, "{conflicts:?}");
            assert_eq!(conflicts[0].0, "disputed.txt");
            let kept = fs::read_to_string(repo.root().join("disputed.txt")).unwrap();
            assert_eq!(kept, "line edited\n");
        }
        other => panic!("expected modify/delete conflict, got {other:?}"),
    }
}

#[test]
fn rename_target_collision_with_added_file_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let mut repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
    let body: String = (0..12).map(|i| format!("content line {i}\n")).collect();
    write(repo.root(), "old.txt", &body);
    repo.commit_worktree("base\n", "tester", 100).unwrap();
    repo.create_branch("adder", None).unwrap();

    // main renames old.txt -> taken.txt
    fs::rename(repo.root().join("old.txt"), repo.root().join("taken.txt")).unwrap();
    repo.commit_worktree("rename\n", "tester", 110).unwrap();

    // the other side keeps old.txt and adds an unrelated taken.txt
    repo.checkout("adder", false).unwrap();
    write(repo.root(), "taken.txt", "completely different file\n");
    repo.commit_worktree("add unrelated\n", "tester", 120).unwrap();

    repo.checkout("main", false).unwrap();
    match repo.merge("adder", &opts(130)).unwrap() {
        MergeOutcome::Conflicts(conflicts) => {
            assert!(
                conflicts.iter().any(|(p, _)| p == "taken.txt"),
                "{conflicts:?}"
            );
            // neither file's content vanished from the merge result
            let on_disk = fs::read_to_string(repo.root().join("taken.txt")).unwrap();
            assert!(
                on_disk.contains("content line 0") || on_disk.contains("completely different"),
                "surviving content lost: {on_disk}"
            );
        }
        // a clean outcome would be acceptable only if both contents
        // survived somewhere; the collision must at least not lose data
        MergeOutcome::Merged(id) => {
            let tree = repo.tree_contents(&id).unwrap();
            let all: Vec<u8> = tree.values().flatten().copied().collect();
            let text = String::from_utf8_lossy(&all).into_owned();
            assert!(text.contains("content line 0"), "renamed content lost");
            assert!(
                text.contains("completely different"),
                "added file lost in rename collision"
            );
        }
        other => panic!("unexpected outcome {other:?}"),
    }
}

#[test]
fn exec_bit_and_content_merge_from_different_sides() {
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let dir = tempfile::tempdir().unwrap();
        let mut repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
        let body: String = (0..8).map(|i| format!("step {i}\n")).collect();
        write(repo.root(), "tool.sh", &body);
        repo.commit_worktree("base\n", "tester", 100).unwrap();
        repo.create_branch("chmod", None).unwrap();

        // main edits the content
        write(repo.root(), "tool.sh", &body.replace("step 3", "step 3 fixed"));
        repo.commit_worktree("edit\n", "tester", 110).unwrap();

        // the other side only flips the executable bit
        repo.checkout("chmod", false).unwrap();
        fs::set_permissions(
            repo.root().join("tool.sh"),
            fs::Permissions::from_mode(0o755),
        )
        .unwrap();
        repo.commit_worktree("make executable\n", "tester", 120).unwrap();

        repo.checkout("main", false).unwrap();
        match repo.merge("chmod", &opts(130)).unwrap() {
            MergeOutcome::Merged(id) => {
                let files = repo.tree_files(&id).unwrap();
                let (blob, mode) = files["tool.sh"];
                assert_eq!(mode, vcs::object::FileMode::Executable, "x bit lost");
                let text = String::from_utf8(repo.blob(&blob).unwrap()).unwrap();
                assert!(text.contains("step 3 fixed"), "content edit lost");
            }
            other => panic!("expected clean merge, got {other:?}"),
        }
    }
}

/// The criss-cross topology built out of real commits: both branches
/// merged each other once with opposite conflict resolutions, so the
/// final merge has two base candidates and must surface the
/// disagreement instead of silently picking a side.
#[test]
fn criss_cross_conflicts_through_the_repository() {
    let dir = tempfile::tempdir().unwrap();
    let mut repo = Repository::init(dir.path(), StorageBackend::Revlog).unwrap();
    write(repo.root(), "value.txt", "setting v0\n");
    repo.commit_worktree("base\n", "tester", 100).unwrap();
    repo.create_branch("side", None).unwrap();

    write(repo.root(), "value.txt", "setting vx\n");
    repo.commit_worktree("x0\n", "tester", 110).unwrap();
    repo.checkout("side", false).unwrap();
    write(repo.root(), "value.txt", "setting vy\n");
    repo.commit_worktree("y0\n", "tester", 120).unwrap();

    // cross-merge 1: main merges side, resolving toward its own vx
    repo.checkout("main", false).unwrap();
    match repo.merge("side", &opts(130)).unwrap() {
        MergeOutcome::Conflicts(_) => {
            write(repo.root(), "value.txt", "setting vx\n");
            repo.commit_worktree("x1: keep vx\n", "tester", 131).unwrap();
        }
        other => panic!("expected first cross to conflict, got {other:?}"),
    }
    // cross-merge 2: side merges the pre-merge main head, toward vy
    repo.checkout("side", false).unwrap();
    let x0 = repo
        .load_dag(&[])
        .unwrap()
        .toposort(&[repo.read_ref("main").unwrap()])
        .unwrap()
        .into_iter()
        .find(|id| repo.commit(id).unwrap().message == "x0\n")
        .unwrap();
    match repo.merge(&x0.to_hex(), &opts(140)).unwrap() {
        MergeOutcome::Conflicts(_) => {
            write(repo.root(), "value.txt", "setting vy\n");
            repo.commit_worktree("y1: keep vy\n", "tester", 141).unwrap();
        }
        other => panic!("expected second cross to conflict, got {other:?}"),
    }

    // the final merge sees both first merges as base candidates
    repo.checkout("main", false).unwrap();
    let dag = repo.load_dag(&[]).unwrap();
    let cands = dag
        .lca_candidates(
            &repo.read_ref("main").unwrap(),
            &repo.read_ref("side").unwrap(),
        )
        .unwrap();
    assert_eq!(cands.len(), 2, "criss-cross should have two candidates");

    match repo.merge("side", &opts(150)).unwrap() {
        MergeOutcome::Conflicts(conflicts) => {
            assert_eq!(conflicts[0].0, "value.txt");
            let text = fs::read_to_string(repo.root().join("value.txt")).unwrap();
            assert!(text.contains("setting vx") && text.contains("setting vy"));
        }
        other => panic!("recursive merge must conflict, got {other:?}"),
    }
}
