use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::object::{hash_object, HashAlgo, Kind, ObjectId};

/// One-file-per-object store under `<root>/<first 2 hex>/<remaining hex>`.
///
/// Stored files hold the zlib-compressed `"<kind> <len>\0" + payload`
/// form. Objects are immutable; writes go through a temp file and an
/// atomic rename, so concurrent readers never observe partial objects
/// and a repeated put of the same object is harmless.
pub struct LooseStore {
    root: PathBuf,
    algo: HashAlgo,
}

impl LooseStore {
    pub fn open(root: impl Into<PathBuf>, algo: HashAlgo) -> Self {
        LooseStore {
            root: root.into(),
            algo,
        }
    }

    pub fn algo(&self) -> HashAlgo {
        self.algo
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path_for(&self, id: &ObjectId) -> PathBuf {
        let hex = id.to_hex();
        self.root.join(&hex[..2]).join(&hex[2..])
    }

    pub fn put(&self, kind: Kind, payload: &[u8]) -> Result<ObjectId> {
        let id = hash_object(self.algo, kind, payload);
        let path = self.path_for(&id);
        if path.exists() {
            return Ok(id);
        }
        let dir = path.parent().unwrap();
        fs::create_dir_all(dir)?;

        let mut enc = ZlibEncoder::new(Vec::new(), Compression::default());
        enc.write_all(format!("{} {}\0", kind.name(), payload.len()).as_bytes())?;
        enc.write_all(payload)?;
        let compressed = enc.finish()?;

        let tmp = dir.join(format!(".tmp-{}-{}", std::process::id(), hex_name(&id)));
        fs::write(&tmp, &compressed)?;
        fs::rename(&tmp, &path)?;
        Ok(id)
    }

    pub fn contains(&self, id: &ObjectId) -> bool {
        self.path_for(id).exists()
    }

    pub fn get(&self, id: &ObjectId) -> Result<(Kind, Vec<u8>)> {
        let path = self.path_for(id);
        let compressed = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::UnknownObject(id.to_hex()))
            }
            Err(e) => return Err(e.into()),
        };
        let mut raw = Vec::new();
        ZlibDecoder::new(&compressed[..])
            .read_to_end(&mut raw)
            .map_err(|_| Error::CorruptObject {
                id: *id,
                actual: self.algo.digest_parts(&[&compressed]),
            })?;
        let (kind, payload) = split_header(&raw, id)?;
        // Verified on every read: the bytes must hash back to the id.
        let actual = hash_object(self.algo, kind, payload);
        if actual != *id {
            return Err(Error::CorruptObject { id: *id, actual });
        }
        Ok((kind, payload.to_vec()))
    }

    pub fn remove(&self, id: &ObjectId) -> Result<()> {
        match fs::remove_file(self.path_for(id)) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(e.into()),
        }
    }

    /// All ids currently stored, unsorted.
    pub fn list(&self) -> Result<Vec<ObjectId>> {
        let mut ids = Vec::new();
        let dirs = match fs::read_dir(&self.root) {
            Ok(d) => d,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(ids),
            Err(e) => return Err(e.into()),
        };
        for dir in dirs {
            let dir = dir?;
            let prefix = dir.file_name().to_string_lossy().into_owned();
            if prefix.len() != 2 || !dir.file_type()?.is_dir() {
                continue;
            }
            for file in fs::read_dir(dir.path())? {
                let name = file?.file_name().to_string_lossy().into_owned();
                if let Ok(id) = ObjectId::from_hex(&format!("{prefix}{name}")) {
                    ids.push(id);
                }
            }
        }
        Ok(ids)
    }
}

fn hex_name(id: &ObjectId) -> String {
    id.short(12)
}

fn split_header<'a>(raw: &'a [u8], id: &ObjectId) -> Result<(Kind, &'a [u8])> {
    let corrupt = || Error::CorruptObject {
        id: *id,
        actual: *id,
    };
    let nul = raw.iter().position(|&b| b == 0).ok_or_else(corrupt)?;
    let header = std::str::from_utf8(&raw[..nul]).map_err(|_| corrupt())?;
    let (kind_str, len_str) = header.split_once(' ').ok_or_else(corrupt)?;
    let kind = Kind::from_name(kind_str).map_err(|_| corrupt())?;
    let len: usize = len_str.parse().map_err(|_| corrupt())?;
    let payload = &raw[nul + 1..];
    if payload.len() != len {
        return Err(corrupt());
    }
    Ok((kind, payload))
}

/// Resolves an abbreviated hex id against a list of candidate ids.
///
/// Prefixes shorter than 4 digits are rejected; a unique match wins, two
/// or more matches are ambiguous.
pub fn resolve_prefix_in(ids: &[ObjectId], prefix: &str) -> Result<ObjectId> {
    if prefix.len() < 4 || !prefix.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::BadPrefix(prefix.to_string()));
    }
    let prefix_lc = prefix.to_ascii_lowercase();
    let mut matches = ids.iter().filter(|id| id.to_hex().starts_with(&prefix_lc));
    let first = matches.next();
    let count = matches.count() + first.map_or(0, |_| 1);
    match (first, count) {
        (Some(id), 1) => Ok(*id),
        (Some(_), n) => Err(Error::AmbiguousPrefix {
            prefix: prefix.to_string(),
            count: n,
        }),
        (None, _) => Err(Error::UnknownObject(prefix.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> (tempfile::TempDir, LooseStore) {
        let dir = tempfile::tempdir().unwrap();
        let store = LooseStore::open(dir.path().join("objects"), HashAlgo::Sha256T160);
        (dir, store)
    }

    #[test]
    fn round_trips_large_blob() {
        let (_dir, store) = store();
        let mut content = vec![0u8; 1 << 20];
        for (i, b) in content.iter_mut().enumerate() {
            *b = (i * 31 % 251) as u8;
        }
        let id = store.put(Kind::Blob, &content).unwrap();
        let (kind, back) = store.get(&id).unwrap();
        assert_eq!(kind, Kind::Blob);
        assert_eq!(back, content);
    }

    #[test]
    fn unknown_object_reported() {
        let (_dir, store) = store();
        let id = HashAlgo::Sha256T160.digest_parts(&[b"nothing"]);
        assert!(matches!(store.get(&id), Err(Error::UnknownObject(_))));
    }

    #[test]
    fn flipped_byte_detected_on_read() {
        let (_dir, store) = store();
        let id = store.put(Kind::Blob, b"some stable content").unwrap();
        let hex = id.to_hex();
        let path = store.root().join(&hex[..2]).join(&hex[2..]);
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0x40;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            store.get(&id),
            Err(Error::CorruptObject { .. })
        ));
    }

    #[test]
    fn put_is_idempotent_and_preserves_others() {
        let (_dir, store) = store();
        let a = store.put(Kind::Blob, b"a").unwrap();
        let b = store.put(Kind::Blob, b"b").unwrap();
        assert_eq!(store.put(Kind::Blob, b"a").unwrap(), a);
        assert_eq!(store.get(&b).unwrap().1, b"b");
        assert_eq!(store.list().unwrap().len(), 2);
    }

    #[test]
    fn prefix_resolution() {
        let (_dir, store) = store();
        let id = store.put(Kind::Blob, b"hello").unwrap();
        let ids = store.list().unwrap();
        assert_eq!(resolve_prefix_in(&ids, &id.to_hex()).unwrap(), id);
        assert_eq!(resolve_prefix_in(&ids, &id.short(4)).unwrap(), id);
        assert!(matches!(
            resolve_prefix_in(&ids, "abc"),
            Err(Error::BadPrefix(_))
        ));
        assert!(matches!(
            resolve_prefix_in(&ids, "ffff"),
            Err(Error::UnknownObject(_)) | Err(Error::AmbiguousPrefix { .. })
        ));
    }

    #[test]
    fn colliding_prefix_is_ambiguous() {
        // brute-force two blobs sharing a 4-digit prefix; by the
        // birthday bound a few hundred inserts suffice on average
        let (_dir, store) = store();
        let mut by_prefix: std::collections::HashMap<String, ObjectId> =
            std::collections::HashMap::new();
        let mut collision = None;
        for i in 0..200_000u32 {
            let id = store.put(Kind::Blob, format!("blob {i}").as_bytes()).unwrap();
            let prefix = id.short(4);
            if let Some(other) = by_prefix.get(&prefix) {
                collision = Some((prefix, *other, id));
                break;
            }
            by_prefix.insert(prefix, id);
        }
        let (prefix, _, _) = collision.expect("collision within bound");
        let ids = store.list().unwrap();
        match resolve_prefix_in(&ids, &prefix) {
            Err(Error::AmbiguousPrefix { count, .. }) => assert!(count >= 2),
            other => panic!("expected ambiguity for {prefix}, got {other:?}"),
        }
        // a longer unique prefix of one of them still resolves
        let unique = ids
            .iter()
            .find(|id| ids.iter().filter(|o| o.short(10) == id.short(10)).count() == 1)
            .unwrap();
        assert_eq!(resolve_prefix_in(&ids, &unique.short(10)).unwrap(), *unique);
    }
}
