//! Pack construction: candidate ordering, windowed delta search and the
//! two-level index.
//!
//! Run with: cargo run --example pack_objects

use std::collections::BTreeMap;

use vcs::object::{hash_object, Blob, Commit, EntryKind, FileMode, HashAlgo, Object, Tree, TreeEntry};
use vcs::pack::{pack_build, PackObject, PackReader};

fn main() -> vcs::Result<()> {
    let algo = HashAlgo::default();
    let mut objects: BTreeMap<_, _> = BTreeMap::new();
    let mut put = |obj: &Object| {
        let payload = obj.serialize();
        let id = hash_object(algo, obj.kind(), &payload);
        objects.insert(
            id,
            PackObject {
                kind: obj.kind(),
                payload,
            },
        );
        id
    };

    // a 40-revision single-file history
    let mut parent = None;
    let mut body = String::new();
    for i in 0..40 {
        body.push_str(&format!("pub fn api_call_{i}() {{ /* implementation {i} */ }}\n"));
        let blob = put(&Object::Blob(Blob {
            content: body.clone().into_bytes(),
        }));
        let tree = put(&Object::Tree(Tree::new(vec![TreeEntry {
            name: "api.rs".into(),
            mode: FileMode::Normal,
            kind: EntryKind::Blob,
            child: blob,
        }])?));
        let commit = put(&Object::Commit(Commit {
            tree,
            parents: parent.into_iter().collect(),
            author: "example".into(),
            timestamp: 1_700_000_000 + i,
            message: format!("revision {i}\n"),
        }));
        parent = Some(commit);
    }

    let (pack, idx) = pack_build(&objects, algo, 10, 10)?;
    println!(
        "{} objects packed into {} bytes (+{} index)",
        objects.len(),
        pack.len(),
        idx.len()
    );

    let reader = PackReader::from_bytes(pack, &idx, algo)?;
    let entries = reader.entries()?;
    let deltas = entries.iter().filter(|e| e.base.is_some()).count();
    println!("{deltas} delta entries, {} full entries", entries.len() - deltas);

    // every object reconstructs byte-exactly
    for (id, obj) in &objects {
        let (kind, payload) = reader.get(id)?;
        assert_eq!((kind, payload), (obj.kind, obj.payload.clone()));
    }
    println!("all objects reconstruct byte-exactly");

    // audit: a delta's base always precedes it physically
    let offsets: BTreeMap<_, _> = entries.iter().map(|e| (e.id, e.offset)).collect();
    for e in &entries {
        if let Some(base) = e.base {
            assert!(offsets[&base] < e.offset);
        }
    }
    println!("base-before-delta audit passed");
    Ok(())
}
