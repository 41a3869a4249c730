//! Command-line surface: `vcs <command> [args] [--flags]`.
//!
//! Exit codes: 0 success, 1 conflict or rejected divergence, 2 usage
//! errors, 3 corruption.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::merge::RenameMatch;
use crate::object::ObjectId;
use crate::patch::{emit_combined, emit_unified, PickaxeChange, PickaxeCommit};
use crate::repo::{
    render_graph, Head, MergeOpts, MergeOutcome, Repository, Status, StatusKind, StorageBackend,
    Strategy,
};
use crate::textdiff::split_lines;

#[derive(Parser)]
#[command(name = "vcs", version, about = "a self-contained distributed version control tool")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an empty repository
    Init {
        /// Directory to initialize (default: current directory)
        path: Option<PathBuf>,
        /// Per-file history backend: revlog or weave
        #[arg(long, default_value = "revlog")]
        storage: String,
    },
    /// Snapshot the working tree as a new commit
    Commit {
        #[arg(short, long)]
        message: String,
        /// Author name (default: VCS_AUTHOR or "anon")
        #[arg(long)]
        author: Option<String>,
        /// Commit timestamp, seconds since the epoch (default:
        /// VCS_TIMESTAMP or the current time)
        #[arg(long)]
        date: Option<i64>,
    },
    /// List branches, or create one at a revision
    Branch {
        name: Option<String>,
        rev: Option<String>,
    },
    /// Switch the working tree to a branch or revision
    Checkout {
        target: String,
        /// Discard uncommitted changes
        #[arg(long)]
        force: bool,
    },
    /// Show working tree changes against HEAD
    Status,
    /// Show history, newest first
    Log {
        /// Draw the commit graph in the left margin
        #[arg(long)]
        graph: bool,
        /// Include all branches, not just HEAD
        #[arg(long)]
        all: bool,
    },
    /// Show differences as unified diffs
    Diff {
        /// Revision(s): none = worktree vs HEAD, one = worktree vs
        /// rev, two = rev vs rev
        revs: Vec<String>,
        /// Render a merge commit against all its parents
        #[arg(long)]
        combined: Option<String>,
    },
    /// Attribute each line of a file to the commit that introduced it
    Annotate { path: String, rev: Option<String> },
    /// Find commits adding or removing a byte string
    Pickaxe { needle: String },
    /// Pack reachable objects and drop packed loose files
    Gc {
        /// Also delete unreachable objects
        #[arg(long)]
        prune: bool,
    },
    /// Merge a branch or revision into the current head
    Merge {
        theirs: String,
        /// three-way, recursive or pcdv
        #[arg(long)]
        strategy: Option<String>,
        /// Explicit merge base: applies the change as a cherry-pick
        /// with a single-parent result
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        author: Option<String>,
        #[arg(long)]
        date: Option<i64>,
    },
    /// Copy a repository, all history included
    Clone { src: PathBuf, dst: PathBuf },
    /// Fetch a branch from another repository and merge it
    Pull {
        remote: PathBuf,
        branch: Option<String>,
        #[arg(long)]
        author: Option<String>,
        #[arg(long)]
        date: Option<i64>,
    },
    /// Send a branch to another repository (fast-forward only)
    Push {
        remote: PathBuf,
        branch: Option<String>,
    },
}

/// Maps an error to the documented exit code.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConflictsPending
        | Error::NonFastForwardPush { .. }
        | Error::UnrelatedHistories => 1,
        Error::CorruptObject { .. }
        | Error::CorruptPack(_)
        | Error::CorruptHunk(_)
        | Error::MalformedObject { .. }
        | Error::MalformedDelta(_)
        | Error::MalformedWeave(_)
        | Error::MalformedRevlog(_)
        | Error::MalformedPatch(_) => 3,
        _ => 2,
    }
}

fn author_arg(flag: Option<String>) -> String {
    flag.or_else(|| std::env::var("VCS_AUTHOR").ok())
        .unwrap_or_else(|| "anon".to_string())
}

fn date_arg(flag: Option<i64>) -> i64 {
    flag.or_else(|| {
        std::env::var("VCS_TIMESTAMP")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs() as i64)
            .unwrap_or(0)
    })
}

/// Entry point for the binary: parses `args`, runs the command from
/// `cwd`, writes to `out` and returns the process exit code.
pub fn run(cwd: &Path, args: Vec<String>, out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(out, "{e}");
            return code;
        }
    };
    match dispatch(cwd, cli.command, out) {
        Ok(code) => code,
        // a reader that stopped consuming output is not our failure
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn dispatch(cwd: &Path, command: Command, out: &mut dyn Write) -> crate::Result<i32> {
    match command {
        Command::Init { path, storage } => {
            let target = path.unwrap_or_else(|| cwd.to_path_buf());
            std::fs::create_dir_all(&target)?;
            let backend = StorageBackend::from_name(&storage)?;
            Repository::init(&target, backend)?;
            writeln!(out, "initialized empty repository in {}", target.display())?;
            Ok(0)
        }
        Command::Commit {
            message,
            author,
            date,
        } => {
            let mut repo = Repository::discover(cwd)?;
            let id = repo.commit_worktree(&message, &author_arg(author), date_arg(date))?;
            writeln!(out, "committed {}", id.short(12))?;
            Ok(0)
        }
        Command::Branch { name, rev } => {
            let repo = Repository::discover(cwd)?;
            match name {
                None => {
                    let current = match repo.head()? {
                        Head::Branch(name) => Some(name),
                        Head::Detached(_) => None,
                    };
                    for (name, id) in repo.branches()? {
                        let marker = if Some(&name) == current.as_ref() { "*" } else { " " };
                        writeln!(out, "{marker} {name} {}", id.short(12))?;
                    }
                    Ok(0)
                }
                Some(name) => {
                    let id = repo.create_branch(&name, rev.as_deref())?;
                    writeln!(out, "branch {name} at {}", id.short(12))?;
                    Ok(0)
                }
            }
        }
        Command::Checkout { target, force } => {
            let mut repo = Repository::discover(cwd)?;
            repo.checkout(&target, force)?;
            writeln!(out, "checked out {target}")?;
            Ok(0)
        }
        Command::Status => {
            let repo = Repository::discover(cwd)?;
            let status: Status = repo.status()?;
            for (path, kind) in &status.entries {
                let tag = match kind {
                    StatusKind::Added => "A",
                    StatusKind::Modified => "M",
                    StatusKind::Deleted => "D",
                };
                writeln!(out, "{tag} {path}")?;
            }
            if status.is_clean() {
                writeln!(out, "clean")?;
            }
            Ok(0)
        }
        Command::Log { graph, all } => {
            let repo = Repository::discover(cwd)?;
            let heads = log_heads(&repo, all)?;
            if heads.is_empty() {
                return Ok(0);
            }
            let dag = repo.load_dag(&heads)?;
            if graph {
                let text = render_graph(&dag, &heads, |id| {
                    commit_line(&repo, id).unwrap_or_else(|_| id.short(12))
                })?;
                write!(out, "{text}")?;
            } else {
                for id in dag.toposort(&heads)? {
                    writeln!(out, "{}", commit_line(&repo, &id)?)?;
                }
            }
            Ok(0)
        }
        Command::Diff { revs, combined } => {
            let repo = Repository::discover(cwd)?;
            if let Some(rev) = combined {
                let id = repo.resolve(&rev)?;
                write!(out, "{}", combined_diff(&repo, &id)?)?;
                return Ok(0);
            }
            let (old, new) = diff_sides(&repo, &revs)?;
            write!(out, "{}", tree_diff(&old, &new))?;
            Ok(0)
        }
        Command::Annotate { path, rev } => {
            let repo = Repository::discover(cwd)?;
            let at = match rev {
                Some(spec) => repo.resolve(&spec)?,
                None => repo
                    .head_commit()?
                    .ok_or_else(|| Error::Usage("no commits yet".into()))?,
            };
            for entry in repo.annotate(&path, &at)? {
                let text = entry.line.trim_end_matches('\n');
                writeln!(out, "{} {} {}", entry.commit.short(8), entry.author, text)?;
            }
            Ok(0)
        }
        Command::Pickaxe { needle } => {
            if needle.is_empty() {
                return Err(Error::Usage("pickaxe needle must be non-empty".into()));
            }
            let repo = Repository::discover(cwd)?;
            let head = match repo.head_commit()? {
                Some(h) => h,
                None => return Ok(0),
            };
            let dag = repo.load_dag(&[head])?;
            let commits: Vec<PickaxeCommit> = dag
                .toposort(&[head])?
                .into_iter()
                .map(|id| -> crate::Result<PickaxeCommit> {
                    Ok(PickaxeCommit {
                        id,
                        parents: dag.parents(&id)?.to_vec(),
                    })
                })
                .collect::<crate::Result<_>>()?;
            let hits = crate::patch::pickaxe(
                &commits,
                |id| repo.tree_contents(id),
                needle.as_bytes(),
            )?;
            for hit in hits {
                let tag = match hit.change {
                    PickaxeChange::Added => "added",
                    PickaxeChange::Removed => "removed",
                };
                writeln!(out, "{tag} {} {}", hit.commit.short(12), hit.path)?;
            }
            Ok(0)
        }
        Command::Gc { prune } => {
            let mut repo = Repository::discover(cwd)?;
            let stats = repo.gc(prune)?;
            writeln!(
                out,
                "packed {} objects, kept {} loose, pruned {}",
                stats.packed, stats.kept_loose, stats.pruned
            )?;
            Ok(0)
        }
        Command::Merge {
            theirs,
            strategy,
            base,
            author,
            date,
        } => {
            let mut repo = Repository::discover(cwd)?;
            let strategy = Strategy::from_name(
                strategy.as_deref().unwrap_or(repo.default_strategy()),
            )?;
            let base_override = match base {
                Some(spec) => Some(repo.resolve(&spec)?),
                None => None,
            };
            let opts = MergeOpts {
                strategy,
                base_override,
                author: author_arg(author),
                timestamp: date_arg(date),
            };
            match repo.merge(&theirs, &opts)? {
                MergeOutcome::AlreadyUpToDate => {
                    writeln!(out, "already up to date")?;
                    Ok(0)
                }
                MergeOutcome::FastForward(id) => {
                    writeln!(out, "fast-forward to {}", id.short(12))?;
                    Ok(0)
                }
                MergeOutcome::Merged(id) => {
                    writeln!(out, "merged as {}", id.short(12))?;
                    Ok(0)
                }
                MergeOutcome::Conflicts(conflicts) => {
                    for (path, reason) in &conflicts {
                        writeln!(out, "conflict: {path}: {reason}")?;
                    }
                    writeln!(out, "resolve the markers and run `vcs commit`")?;
                    Ok(1)
                }
            }
        }
        Command::Clone { src, dst } => {
            let repo = Repository::open_at(&src).map_err(|_| Error::UnknownRemote(src.clone()))?;
            repo.clone_to(&dst)?;
            writeln!(out, "cloned {} to {}", src.display(), dst.display())?;
            Ok(0)
        }
        Command::Pull {
            remote,
            branch,
            author,
            date,
        } => {
            let mut repo = Repository::discover(cwd)?;
            let opts = MergeOpts {
                strategy: Strategy::from_name(repo.default_strategy())?,
                base_override: None,
                author: author_arg(author),
                timestamp: date_arg(date),
            };
            let (outcome, remote_head) = repo.pull(&remote, branch.as_deref(), &opts)?;
            match outcome {
                MergeOutcome::AlreadyUpToDate => writeln!(out, "already up to date")?,
                MergeOutcome::FastForward(id) => {
                    writeln!(out, "fast-forward to {}", id.short(12))?
                }
                MergeOutcome::Merged(id) => writeln!(out, "merged as {}", id.short(12))?,
                MergeOutcome::Conflicts(conflicts) => {
                    for (path, reason) in &conflicts {
                        writeln!(out, "conflict: {path}: {reason}")?;
                    }
                    writeln!(out, "resolve the markers and run `vcs commit`")?;
                    return Ok(1);
                }
            }
            let _ = remote_head;
            Ok(0)
        }
        Command::Push { remote, branch } => {
            let mut repo = Repository::discover(cwd)?;
            let head = repo.push(&remote, branch.as_deref())?;
            writeln!(out, "pushed {}", head.short(12))?;
            Ok(0)
        }
    }
}

fn log_heads(repo: &Repository, all: bool) -> crate::Result<Vec<ObjectId>> {
    if all {
        Ok(repo.branches()?.values().copied().collect())
    } else {
        Ok(repo.head_commit()?.into_iter().collect())
    }
}

/// Dense one-line format: abbreviated id, subject, author.
fn commit_line(repo: &Repository, id: &ObjectId) -> crate::Result<String> {
    let commit = repo.commit(id)?;
    let subject = commit.message.lines().next().unwrap_or("");
    Ok(format!("{} {subject} ({})", id.short(12), commit.author))
}

fn diff_sides(
    repo: &Repository,
    revs: &[String],
) -> crate::Result<(BTreeMap<String, Vec<u8>>, BTreeMap<String, Vec<u8>>)> {
    match revs {
        [] => {
            let old = match repo.head_commit()? {
                Some(head) => repo.tree_contents(&head)?,
                None => BTreeMap::new(),
            };
            let new = worktree_contents(repo)?;
            Ok((old, new))
        }
        [rev] => {
            let old = repo.tree_contents(&repo.resolve(rev)?)?;
            Ok((old, worktree_contents(repo)?))
        }
        [rev1, rev2] => Ok((
            repo.tree_contents(&repo.resolve(rev1)?)?,
            repo.tree_contents(&repo.resolve(rev2)?)?,
        )),
        _ => Err(Error::Usage("diff takes at most two revisions".into())),
    }
}

fn worktree_contents(repo: &Repository) -> crate::Result<BTreeMap<String, Vec<u8>>> {
    Ok(repo
        .worktree_files()?
        .into_iter()
        .map(|(path, (content, _))| (path, content))
        .collect())
}

/// Unified diff over two file sets, with informational rename lines for
/// detected renames (`apply` treats them as ignorable metadata).
fn tree_diff(old: &BTreeMap<String, Vec<u8>>, new: &BTreeMap<String, Vec<u8>>) -> String {
    let renames: Vec<RenameMatch> = crate::merge::detect_renames(old, new, 0.5);
    let mut out = String::new();
    let mut paths: Vec<&String> = old.keys().chain(new.keys()).collect();
    paths.sort();
    paths.dedup();
    for path in paths {
        let old_bytes = old.get(path);
        let new_bytes = new.get(path);
        if old_bytes == new_bytes {
            continue;
        }
        if let Some(rename) = renames.iter().find(|r| &r.old_path == path) {
            out.push_str(&format!(
                "rename from {}\nrename to {}\n",
                rename.old_path, rename.new_path
            ));
        }
        let old_lines = split_lines(&String::from_utf8_lossy(old_bytes.unwrap_or(&Vec::new())));
        let new_lines = split_lines(&String::from_utf8_lossy(new_bytes.unwrap_or(&Vec::new())));
        let label_a = if old_bytes.is_some() {
            format!("a/{path}")
        } else {
            "/dev/null".to_string()
        };
        let label_b = if new_bytes.is_some() {
            format!("b/{path}")
        } else {
            "/dev/null".to_string()
        };
        let body = emit_unified(&old_lines, &new_lines, 3, &label_a, &label_b);
        out.push_str(&body);
    }
    out
}

/// Combined diff of a merge commit against all of its parents, one
/// section per path that differs from every parent.
fn combined_diff(repo: &Repository, id: &ObjectId) -> crate::Result<String> {
    let commit = repo.commit(id)?;
    if commit.parents.len() < 2 {
        return Err(Error::Usage(
            "combined diff requires a merge commit with at least two parents".into(),
        ));
    }
    let merged = repo.tree_contents(id)?;
    let parents: Vec<BTreeMap<String, Vec<u8>>> = commit
        .parents
        .iter()
        .map(|p| repo.tree_contents(p))
        .collect::<crate::Result<_>>()?;

    let mut paths: Vec<&String> = merged.keys().collect();
    for p in &parents {
        paths.extend(p.keys());
    }
    paths.sort();
    paths.dedup();

    let mut out = String::new();
    for path in paths {
        let merged_lines = split_lines(&String::from_utf8_lossy(
            merged.get(path).unwrap_or(&Vec::new()),
        ));
        let parent_lines: Vec<Vec<String>> = parents
            .iter()
            .map(|p| split_lines(&String::from_utf8_lossy(p.get(path).unwrap_or(&Vec::new()))))
            .collect();
        let body = emit_combined(&parent_lines, &merged_lines, 3)?;
        if !body.is_empty() {
            out.push_str(&format!("combined {path}\n{body}"));
        }
    }
    Ok(out)
}
