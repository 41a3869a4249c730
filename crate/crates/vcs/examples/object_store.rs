//! Content-addressed objects: hashing, cascading ids and the loose
//! store.
//!
//! Run with: cargo run --example object_store

use vcs::object::{
    hash_object, resolve_prefix_in, Blob, Commit, EntryKind, FileMode, HashAlgo, Kind,
    LooseStore, Object, Tree, TreeEntry,
};

fn main() -> vcs::Result<()> {
    let algo = HashAlgo::default();

    // the same bytes hash differently per object kind
    let payload = b"hello objects";
    println!("blob  {}", hash_object(algo, Kind::Blob, payload));
    println!("tree  {}", hash_object(algo, Kind::Tree, payload));

    // build a blob -> tree -> commit chain
    let dir = tempfile::tempdir().expect("tempdir");
    let store = LooseStore::open(dir.path().join("objects"), algo);

    let blob = Object::Blob(Blob {
        content: b"fn main() {}\n".to_vec(),
    });
    let blob_id = store.put(blob.kind(), &blob.serialize())?;

    let tree = Object::Tree(Tree::new(vec![TreeEntry {
        name: "main.rs".into(),
        mode: FileMode::Normal,
        kind: EntryKind::Blob,
        child: blob_id,
    }])?);
    let tree_id = store.put(tree.kind(), &tree.serialize())?;

    let commit = Object::Commit(Commit {
        tree: tree_id,
        parents: vec![],
        author: "example".into(),
        timestamp: 1_700_000_000,
        message: "initial\n".into(),
    });
    let commit_id = store.put(commit.kind(), &commit.serialize())?;
    println!("\nblob   {blob_id}\ntree   {tree_id}\ncommit {commit_id}");

    // the cascade: changing the blob changes every id above it
    let blob2 = Object::Blob(Blob {
        content: b"fn main() { println!(); }\n".to_vec(),
    });
    let blob2_id = store.put(blob2.kind(), &blob2.serialize())?;
    let tree2 = Object::Tree(Tree::new(vec![TreeEntry {
        name: "main.rs".into(),
        mode: FileMode::Normal,
        kind: EntryKind::Blob,
        child: blob2_id,
    }])?);
    let tree2_id = store.put(tree2.kind(), &tree2.serialize())?;
    println!("\nafter editing the blob:");
    println!("blob   {blob2_id}\ntree   {tree2_id}  (both changed)");

    // abbreviated lookup
    let ids = store.list()?;
    let found = resolve_prefix_in(&ids, &commit_id.short(6))?;
    println!("\nprefix {} resolves to {found}", commit_id.short(6));

    // objects verify on read
    let (kind, payload) = store.get(&commit_id)?;
    println!("read back {} bytes of {}", payload.len(), kind.name());
    Ok(())
}
