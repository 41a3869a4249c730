//! ASCII history graph in the dense one-line-per-commit style: the
//! graph occupies a narrow left margin, each commit line carrying its
//! abbreviated id, subject and author.

use crate::dag::HistoryDag;
use crate::error::Result;
use crate::object::ObjectId;

/// Renders the commits reachable from `heads` newest-first. `label`
/// supplies the text after the margin for each commit. Forks show as a
/// `|\` split under the merge commit, joins as a `|/` row where two
/// columns converge on a shared ancestor.
pub fn render_graph<F>(dag: &HistoryDag, heads: &[ObjectId], label: F) -> Result<String>
where
    F: Fn(&ObjectId) -> String,
{
    let order = dag.toposort(heads)?;
    let mut out = String::new();
    // one entry per active column: the commit that column waits for
    let mut columns: Vec<ObjectId> = Vec::new();

    for commit in order {
        if !columns.contains(&commit) {
            columns.push(commit);
        }
        let primary = columns.iter().position(|c| *c == commit).unwrap();

        // join rows: fold every other column waiting for this commit
        while let Some(dup) = (primary + 1..columns.len()).find(|i| columns[*i] == commit) {
            let mut row = "| ".repeat(dup);
            row.pop();
            row.push('/');
            out.push_str(row.trim_end());
            out.push('\n');
            columns.remove(dup);
        }

        // the commit row itself
        let mut row = String::new();
        for i in 0..columns.len() {
            row.push(if i == primary { '*' } else { '|' });
            row.push(' ');
        }
        row.push_str(&label(&commit));
        out.push_str(row.trim_end());
        out.push('\n');

        // hand the column over to the parents
        let parents = dag.parents(&commit)?.to_vec();
        match parents.split_first() {
            None => {
                columns.remove(primary);
            }
            Some((first, rest)) => {
                columns[primary] = *first;
                for (i, parent) in rest.iter().enumerate() {
                    columns.insert(primary + 1 + i, *parent);
                }
                if !rest.is_empty() {
                    let mut row = "| ".repeat(primary + 1);
                    row.pop();
                    row.push('\\');
                    out.push_str(row.trim_end());
                    out.push('\n');
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::HashAlgo;

    fn cid(label: &str) -> ObjectId {
        HashAlgo::Sha256T160.digest_parts(&[b"commit:", label.as_bytes()])
    }

    #[test]
    fn linear_chain_renders_straight() {
        let mut dag = HistoryDag::new();
        dag.add_node(cid("a"), &[], 1).unwrap();
        dag.add_node(cid("b"), &[cid("a")], 2).unwrap();
        let text = render_graph(&dag, &[cid("b")], |id| {
            if *id == cid("a") { "A".into() } else { "B".into() }
        })
        .unwrap();
        assert_eq!(text, "* B\n* A\n");
    }

    #[test]
    fn merge_shows_fork_and_join() {
        let mut dag = HistoryDag::new();
        dag.add_node(cid("root"), &[], 1).unwrap();
        dag.add_node(cid("left"), &[cid("root")], 2).unwrap();
        dag.add_node(cid("right"), &[cid("root")], 3).unwrap();
        dag.add_node(cid("merge"), &[cid("left"), cid("right")], 4)
            .unwrap();
        let text = render_graph(&dag, &[cid("merge")], |id| {
            for (c, l) in [("root", "R"), ("left", "L"), ("right", "X"), ("merge", "M")] {
                if *id == cid(c) {
                    return l.to_string();
                }
            }
            unreachable!()
        })
        .unwrap();
        assert_eq!(text, "* M\n|\\\n| * X\n* | L\n|/\n* R\n");
    }
}
