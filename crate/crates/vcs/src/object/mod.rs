//! Content-addressed object model: blobs, trees and commits with
//! canonical serializations and cascading content hashes.
//!
//! Serialized objects are hashed together with a `"<kind> <len>\0"`
//! header, so byte-identical payloads of different kinds still get
//! distinct ids, and a commit id transitively pins its whole tree and
//! ancestry (changing any reachable byte changes the commit id).

mod id;
mod loose;

pub use id::{HashAlgo, ObjectId, ID_LEN};
pub use loose::{resolve_prefix_in, LooseStore};

use crate::error::{Error, Result};

/// The three object classes of the model.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub enum Kind {
    Blob,
    Tree,
    Commit,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Blob => "blob",
            Kind::Tree => "tree",
            Kind::Commit => "commit",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "blob" => Ok(Kind::Blob),
            "tree" => Ok(Kind::Tree),
            "commit" => Ok(Kind::Commit),
            other => Err(Error::MalformedObject {
                kind: "header",
                reason: format!("unknown kind {other:?}"),
            }),
        }
    }
}

/// Deterministic digest of `header(kind, length) + payload`.
pub fn hash_object(algo: HashAlgo, kind: Kind, payload: &[u8]) -> ObjectId {
    let header = format!("{} {}\0", kind.name(), payload.len());
    algo.digest_parts(&[header.as_bytes(), payload])
}

/// Raw file content.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Blob {
    pub content: Vec<u8>,
}

impl Blob {
    pub fn serialize(&self) -> Vec<u8> {
        self.content.clone()
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        Ok(Blob {
            content: bytes.to_vec(),
        })
    }
}

/// File mode: only the executable bit is tracked.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum FileMode {
    Normal,
    Executable,
}

/// What a tree entry points at.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum EntryKind {
    Blob,
    Tree,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreeEntry {
    pub name: String,
    pub mode: FileMode,
    pub kind: EntryKind,
    pub child: ObjectId,
}

impl TreeEntry {
    fn mode_str(&self) -> &'static str {
        match (self.kind, self.mode) {
            (EntryKind::Tree, _) => "40000",
            (EntryKind::Blob, FileMode::Normal) => "100644",
            (EntryKind::Blob, FileMode::Executable) => "100755",
        }
    }
}

/// One directory: an ordered list of named children.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Tree {
    pub entries: Vec<TreeEntry>,
}

impl Tree {
    /// Builds a tree, sorting entries by name and rejecting duplicates
    /// and invalid path components.
    pub fn new(mut entries: Vec<TreeEntry>) -> Result<Self> {
        entries.sort_by(|a, b| a.name.as_bytes().cmp(b.name.as_bytes()));
        for pair in entries.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(Error::MalformedObject {
                    kind: "tree",
                    reason: format!("duplicate entry {:?}", pair[0].name),
                });
            }
        }
        for e in &entries {
            validate_name(&e.name)?;
        }
        Ok(Tree { entries })
    }

    pub fn entry(&self, name: &str) -> Option<&TreeEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Entries serialize as `"<mode> <name>\0"` followed by the raw child
    /// id bytes, in byte-lexicographic name order.
    pub fn serialize(&self) -> Vec<u8> {
        debug_assert!(self
            .entries
            .windows(2)
            .all(|p| p[0].name.as_bytes() < p[1].name.as_bytes()));
        let mut out = Vec::new();
        for e in &self.entries {
            out.extend_from_slice(e.mode_str().as_bytes());
            out.push(b' ');
            out.extend_from_slice(e.name.as_bytes());
            out.push(0);
            out.extend_from_slice(e.child.as_bytes());
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let bad = |reason: String| Error::MalformedObject {
            kind: "tree",
            reason,
        };
        let mut entries = Vec::new();
        let mut rest = bytes;
        while !rest.is_empty() {
            let sp = rest
                .iter()
                .position(|&b| b == b' ')
                .ok_or_else(|| bad("missing mode separator".into()))?;
            let mode_str = std::str::from_utf8(&rest[..sp])
                .map_err(|_| bad("non-utf8 mode".into()))?;
            rest = &rest[sp + 1..];
            let nul = rest
                .iter()
                .position(|&b| b == 0)
                .ok_or_else(|| bad("missing name terminator".into()))?;
            let name = std::str::from_utf8(&rest[..nul])
                .map_err(|_| bad("non-utf8 name".into()))?
                .to_string();
            rest = &rest[nul + 1..];
            if rest.len() < ID_LEN {
                return Err(bad("truncated child id".into()));
            }
            let mut id = [0u8; ID_LEN];
            id.copy_from_slice(&rest[..ID_LEN]);
            rest = &rest[ID_LEN..];
            let (kind, mode) = match mode_str {
                "40000" => (EntryKind::Tree, FileMode::Normal),
                "100644" => (EntryKind::Blob, FileMode::Normal),
                "100755" => (EntryKind::Blob, FileMode::Executable),
                other => return Err(bad(format!("unknown mode {other:?}"))),
            };
            entries.push(TreeEntry {
                name,
                mode,
                kind,
                child: ObjectId::from_bytes(id),
            });
        }
        // Canonical form is checked, not repaired: serialized trees must
        // already be sorted and duplicate-free.
        for pair in entries.windows(2) {
            if pair[0].name.as_bytes() >= pair[1].name.as_bytes() {
                return Err(bad(format!(
                    "entries out of order: {:?} before {:?}",
                    pair[0].name, pair[1].name
                )));
            }
        }
        for e in &entries {
            validate_name(&e.name)?;
        }
        Ok(Tree { entries })
    }
}

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() || name == "." || name == ".." || name.contains('/') {
        return Err(Error::MalformedObject {
            kind: "tree",
            reason: format!("invalid entry name {name:?}"),
        });
    }
    Ok(())
}

/// A snapshot of the whole tree plus its place in the history DAG.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Commit {
    pub tree: ObjectId,
    pub parents: Vec<ObjectId>,
    pub author: String,
    /// Seconds since the epoch, UTC.
    pub timestamp: i64,
    pub message: String,
}

impl Commit {
    /// UTF-8 text form: a `tree` line, one `parent` line per parent and
    /// an `author` line, then a blank line and the free-form message.
    pub fn serialize(&self) -> Vec<u8> {
        debug_assert!(no_duplicates(&self.parents));
        let mut out = String::new();
        out.push_str(&format!("tree {}\n", self.tree.to_hex()));
        for p in &self.parents {
            out.push_str(&format!("parent {}\n", p.to_hex()));
        }
        out.push_str(&format!("author {} {}\n", self.author, self.timestamp));
        out.push('\n');
        out.push_str(&self.message);
        out.into_bytes()
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let bad = |reason: String| Error::MalformedObject {
            kind: "commit",
            reason,
        };
        let text = std::str::from_utf8(bytes).map_err(|_| bad("not utf-8".into()))?;
        let (head, message) = text
            .split_once("\n\n")
            .ok_or_else(|| bad("missing blank line before message".into()))?;
        let mut tree = None;
        let mut parents = Vec::new();
        let mut author = None;
        let mut timestamp = 0i64;
        for line in head.lines() {
            if let Some(hex) = line.strip_prefix("tree ") {
                if tree.is_some() {
                    return Err(bad("duplicate tree line".into()));
                }
                tree = Some(ObjectId::from_hex(hex)?);
            } else if let Some(hex) = line.strip_prefix("parent ") {
                parents.push(ObjectId::from_hex(hex)?);
            } else if let Some(rest) = line.strip_prefix("author ") {
                let (name, ts) = rest
                    .rsplit_once(' ')
                    .ok_or_else(|| bad("author line lacks timestamp".into()))?;
                timestamp = ts
                    .parse()
                    .map_err(|_| bad(format!("bad timestamp {ts:?}")))?;
                author = Some(name.to_string());
            } else {
                return Err(bad(format!("unexpected header line {line:?}")));
            }
        }
        if !no_duplicates(&parents) {
            return Err(bad("duplicate parent".into()));
        }
        Ok(Commit {
            tree: tree.ok_or_else(|| bad("missing tree line".into()))?,
            parents,
            author: author.ok_or_else(|| bad("missing author line".into()))?,
            timestamp,
            message: message.to_string(),
        })
    }
}

fn no_duplicates(ids: &[ObjectId]) -> bool {
    ids.iter()
        .all(|a| ids.iter().filter(|b| *b == a).count() == 1)
}

/// A parsed object of any kind.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Object {
    Blob(Blob),
    Tree(Tree),
    Commit(Commit),
}

impl Object {
    pub fn kind(&self) -> Kind {
        match self {
            Object::Blob(_) => Kind::Blob,
            Object::Tree(_) => Kind::Tree,
            Object::Commit(_) => Kind::Commit,
        }
    }

    pub fn serialize(&self) -> Vec<u8> {
        match self {
            Object::Blob(b) => b.serialize(),
            Object::Tree(t) => t.serialize(),
            Object::Commit(c) => c.serialize(),
        }
    }

    pub fn parse(kind: Kind, payload: &[u8]) -> Result<Self> {
        Ok(match kind {
            Kind::Blob => Object::Blob(Blob::parse(payload)?),
            Kind::Tree => Object::Tree(Tree::parse(payload)?),
            Kind::Commit => Object::Commit(Commit::parse(payload)?),
        })
    }

    pub fn id(&self, algo: HashAlgo) -> ObjectId {
        hash_object(algo, self.kind(), &self.serialize())
    }
}
