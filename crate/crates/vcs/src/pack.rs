//! Object packs: immutable containers holding every object of a
//! repository, similar objects stored as binary deltas against
//! window-selected bases.
//!
//! A pack is a data file plus a two-level index (first-byte fanout over
//! sorted id records). Delta candidates are ordered by a locality
//! heuristic — blobs by reversed first-reached path, then size
//! descending — so related file versions sit next to each other in the
//! search window. Physical layout is a breadth-first walk from the
//! newest branch heads, with the one exception that a delta's base is
//! always written before the delta itself. Packs are written once and
//! never mutated, so readers need no locking.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;

use crate::bindelta;
use crate::error::{Error, Result};
use crate::object::{hash_object, Commit, HashAlgo, Kind, ObjectId, Tree, ID_LEN};

const PACK_MAGIC: &[u8; 4] = b"VPCK";
const IDX_MAGIC: &[u8; 4] = b"VIDX";
const VERSION: u8 = 1;

pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_MAX_DEPTH: usize = 10;

const TAG_COMMIT: u8 = 0;
const TAG_TREE: u8 = 1;
const TAG_BLOB: u8 = 2;
const TAG_DELTA: u8 = 3;

fn kind_tag(kind: Kind) -> u8 {
    match kind {
        Kind::Commit => TAG_COMMIT,
        Kind::Tree => TAG_TREE,
        Kind::Blob => TAG_BLOB,
    }
}

fn tag_kind(tag: u8) -> Option<Kind> {
    Some(match tag {
        TAG_COMMIT => Kind::Commit,
        TAG_TREE => Kind::Tree,
        TAG_BLOB => Kind::Blob,
        _ => return None,
    })
}

/// Candidate metadata driving the delta search order.
#[derive(Clone, Debug)]
pub struct CandidateMeta {
    pub id: ObjectId,
    pub kind: Kind,
    pub size: usize,
    /// Path the blob was first reached through, when walking from the
    /// branch heads.
    pub first_path: Option<String>,
}

/// Stable delta-candidate ordering: commits, then trees, both by size
/// descending; then blobs keyed by their reversed first-reached path
/// (grouping same extensions and same names together), size descending
/// so deltas run from larger to smaller, id as the final tie.
pub fn delta_candidate_order(metas: &[CandidateMeta]) -> Vec<ObjectId> {
    let mut sorted: Vec<&CandidateMeta> = metas.iter().collect();
    sorted.sort_by(|a, b| {
        let group = |m: &CandidateMeta| match m.kind {
            Kind::Commit => 0u8,
            Kind::Tree => 1,
            Kind::Blob => 2,
        };
        let rev_name = |m: &CandidateMeta| -> Vec<u8> {
            m.first_path
                .as_deref()
                .unwrap_or("")
                .bytes()
                .rev()
                .collect()
        };
        group(a)
            .cmp(&group(b))
            .then_with(|| rev_name(a).cmp(&rev_name(b)))
            .then_with(|| b.size.cmp(&a.size))
            .then_with(|| a.id.cmp(&b.id))
    });
    sorted.into_iter().map(|m| m.id).collect()
}

/// An object going into a pack.
#[derive(Clone, Debug)]
pub struct PackObject {
    pub kind: Kind,
    pub payload: Vec<u8>,
}

/// Entry metadata as stored in a pack, for audits and chain walks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackEntryInfo {
    pub id: ObjectId,
    pub offset: u64,
    pub kind: Option<Kind>,
    /// Base id for delta entries.
    pub base: Option<ObjectId>,
}

/// Builds a pack and its index from a closed object set.
///
/// Every object may become a delta against the smallest of the
/// preceding `window` candidates of the same kind, if that delta is
/// smaller than the compressed full object and keeps the chain within
/// `max_depth`. The object set must be closed under references.
pub fn pack_build(
    objects: &BTreeMap<ObjectId, PackObject>,
    algo: HashAlgo,
    window: usize,
    max_depth: usize,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let layout = physical_order(objects, algo)?;
    let metas = candidate_metas(objects, algo)?;
    let order = delta_candidate_order(&metas);

    // windowed delta search over the candidate order
    struct Choice {
        delta: Option<(ObjectId, Vec<u8>)>, // base, encoded delta
    }
    let mut choices: HashMap<ObjectId, Choice> = HashMap::new();
    let mut depth: HashMap<ObjectId, usize> = HashMap::new();
    for (i, id) in order.iter().enumerate() {
        let obj = &objects[id];
        let mut best: Option<(ObjectId, Vec<u8>)> = None;
        for cand_id in order[i.saturating_sub(window)..i].iter().rev() {
            let cand = &objects[cand_id];
            if cand.kind != obj.kind {
                continue;
            }
            if depth.get(cand_id).copied().unwrap_or(0) + 1 > max_depth {
                continue;
            }
            let delta = bindelta::make(&cand.payload, &obj.payload, bindelta::DEFAULT_WINDOW);
            let encoded = bindelta::encode(&delta);
            let better = match &best {
                None => true,
                Some((_, prev)) => encoded.len() < prev.len(),
            };
            if better {
                best = Some((*cand_id, encoded));
            }
        }
        let full_compressed = compress(&obj.payload);
        match best {
            Some((base, encoded)) if compress(&encoded).len() < full_compressed.len() => {
                depth.insert(*id, depth.get(&base).copied().unwrap_or(0) + 1);
                choices.insert(
                    *id,
                    Choice {
                        delta: Some((base, encoded)),
                    },
                );
            }
            _ => {
                depth.insert(*id, 0);
                choices.insert(*id, Choice { delta: None });
            }
        }
    }

    // physical emission: layout order, bases hoisted before their deltas
    let mut pack = Vec::new();
    pack.extend_from_slice(PACK_MAGIC);
    pack.push(VERSION);
    pack.extend_from_slice(&(objects.len() as u32).to_be_bytes());

    let mut offsets: BTreeMap<ObjectId, u64> = BTreeMap::new();
    let mut emit_stack: Vec<ObjectId> = Vec::new();
    for id in layout.iter() {
        let mut at = *id;
        // hoist the base chain first
        while !offsets.contains_key(&at) {
            emit_stack.push(at);
            match &choices[&at].delta {
                Some((base, _)) if !offsets.contains_key(base) => at = *base,
                _ => break,
            }
        }
        while let Some(id) = emit_stack.pop() {
            if offsets.contains_key(&id) {
                continue;
            }
            offsets.insert(id, pack.len() as u64);
            let obj = &objects[&id];
            match &choices[&id].delta {
                Some((base, encoded)) => {
                    pack.push(TAG_DELTA);
                    pack.extend_from_slice(base.as_bytes());
                    let payload = compress(encoded);
                    pack.extend_from_slice(&(payload.len() as u32).to_be_bytes());
                    pack.extend_from_slice(&payload);
                }
                None => {
                    pack.push(kind_tag(obj.kind));
                    let payload = compress(&obj.payload);
                    pack.extend_from_slice(&(payload.len() as u32).to_be_bytes());
                    pack.extend_from_slice(&payload);
                }
            }
        }
    }
    let trailer = algo.digest_parts(&[&pack]);
    pack.extend_from_slice(trailer.as_bytes());

    // two-level index: fanout by first id byte, then sorted records
    let mut idx = Vec::new();
    idx.extend_from_slice(IDX_MAGIC);
    idx.push(VERSION);
    idx.extend_from_slice(&(objects.len() as u32).to_be_bytes());
    let mut counts = [0u32; 256];
    for id in offsets.keys() {
        counts[id.as_bytes()[0] as usize] += 1;
    }
    let mut cum = 0u32;
    for c in counts {
        cum += c;
        idx.extend_from_slice(&cum.to_be_bytes());
    }
    for (id, offset) in &offsets {
        idx.extend_from_slice(id.as_bytes());
        idx.extend_from_slice(&offset.to_be_bytes());
    }
    let trailer = algo.digest_parts(&[&idx]);
    idx.extend_from_slice(trailer.as_bytes());

    Ok((pack, idx))
}

fn compress(data: &[u8]) -> Vec<u8> {
    let mut enc = ZlibEncoder::new(Vec::new(), Compression::default());
    enc.write_all(data).expect("in-memory write");
    enc.finish().expect("in-memory finish")
}

fn decompress(data: &[u8]) -> Option<Vec<u8>> {
    let mut out = Vec::new();
    ZlibDecoder::new(data).read_to_end(&mut out).ok()?;
    Some(out)
}

/// References of an object: tree and parents for commits, children for
/// trees.
fn references(kind: Kind, payload: &[u8]) -> Result<Vec<(ObjectId, Option<String>)>> {
    Ok(match kind {
        Kind::Blob => Vec::new(),
        Kind::Tree => Tree::parse(payload)?
            .entries
            .into_iter()
            .map(|e| (e.child, Some(e.name)))
            .collect(),
        Kind::Commit => {
            let c = Commit::parse(payload)?;
            let mut refs = vec![(c.tree, None)];
            refs.extend(c.parents.into_iter().map(|p| (p, None)));
            refs
        }
    })
}

/// Breadth-first layout from the newest branch heads (commits without a
/// child in the set), so the objects of recent history cluster at the
/// front. Objects unreachable from any head follow, sorted by id.
fn physical_order(
    objects: &BTreeMap<ObjectId, PackObject>,
    _algo: HashAlgo,
) -> Result<Vec<ObjectId>> {
    let mut referenced_commits: HashSet<ObjectId> = HashSet::new();
    let mut commits: Vec<(i64, ObjectId)> = Vec::new();
    for (id, obj) in objects {
        if obj.kind == Kind::Commit {
            let commit = Commit::parse(&obj.payload)?;
            for p in &commit.parents {
                referenced_commits.insert(*p);
            }
            commits.push((commit.timestamp, *id));
        }
    }
    let mut heads: Vec<(i64, ObjectId)> = commits
        .iter()
        .filter(|(_, id)| !referenced_commits.contains(id))
        .copied()
        .collect();
    heads.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));

    let mut order = Vec::with_capacity(objects.len());
    let mut seen: HashSet<ObjectId> = HashSet::new();
    let mut queue: VecDeque<ObjectId> = heads.iter().map(|(_, id)| *id).collect();
    while let Some(id) = queue.pop_front() {
        if !seen.insert(id) {
            continue;
        }
        let obj = objects.get(&id).ok_or(Error::DanglingReference(id))?;
        order.push(id);
        for (child, _) in references(obj.kind, &obj.payload)? {
            if !seen.contains(&child) {
                if !objects.contains_key(&child) {
                    return Err(Error::DanglingReference(child));
                }
                queue.push_back(child);
            }
        }
    }
    for id in objects.keys() {
        if !seen.contains(id) {
            order.push(*id);
        }
    }
    Ok(order)
}

fn candidate_metas(
    objects: &BTreeMap<ObjectId, PackObject>,
    algo: HashAlgo,
) -> Result<Vec<CandidateMeta>> {
    // first-reached paths come from the same walk that lays objects out
    let order = physical_order(objects, algo)?;
    let mut first_path: HashMap<ObjectId, String> = HashMap::new();
    for id in &order {
        let obj = &objects[id];
        if obj.kind == Kind::Tree {
            for (child, name) in references(obj.kind, &obj.payload)? {
                if let Some(name) = name {
                    first_path.entry(child).or_insert(name);
                }
            }
        }
    }
    Ok(objects
        .iter()
        .map(|(id, obj)| CandidateMeta {
            id: *id,
            kind: obj.kind,
            size: obj.payload.len(),
            first_path: first_path.get(id).cloned(),
        })
        .collect())
}

// ---------------------------------------------------------------------
// reading

/// Memory-mapped-in-spirit reader over one pack + index pair. Packs are
/// immutable, so the whole files are loaded and checksum-verified once.
pub struct PackReader {
    pack: Vec<u8>,
    records: Vec<(ObjectId, u64)>,
    fanout: [u32; 256],
    algo: HashAlgo,
}

impl PackReader {
    pub fn load(pack_path: &Path, idx_path: &Path, algo: HashAlgo) -> Result<Self> {
        let pack = fs::read(pack_path)?;
        let idx = fs::read(idx_path)?;
        Self::from_bytes(pack, &idx, algo)
    }

    pub fn from_bytes(pack: Vec<u8>, idx: &[u8], algo: HashAlgo) -> Result<Self> {
        let bad = |reason: &str| Error::CorruptPack(reason.to_string());
        // whole-file trailing checksums
        for (bytes, magic, label) in [(&pack[..], PACK_MAGIC, "pack"), (idx, IDX_MAGIC, "index")] {
            if bytes.len() < 9 + ID_LEN || &bytes[..4] != magic || bytes[4] != VERSION {
                return Err(bad(&format!("bad {label} header")));
            }
            let body = &bytes[..bytes.len() - ID_LEN];
            let want = &bytes[bytes.len() - ID_LEN..];
            if algo.digest_parts(&[body]).as_bytes() != want {
                return Err(bad(&format!("{label} checksum mismatch")));
            }
        }
        let count = u32::from_be_bytes(idx[5..9].try_into().unwrap()) as usize;
        let mut fanout = [0u32; 256];
        let mut at = 9;
        for slot in fanout.iter_mut() {
            *slot = u32::from_be_bytes(idx[at..at + 4].try_into().unwrap());
            at += 4;
        }
        if fanout[255] as usize != count {
            return Err(bad("fanout does not cover all records"));
        }
        let mut records = Vec::with_capacity(count);
        for _ in 0..count {
            if at + ID_LEN + 8 > idx.len() - ID_LEN {
                return Err(bad("truncated index records"));
            }
            let mut id = [0u8; ID_LEN];
            id.copy_from_slice(&idx[at..at + ID_LEN]);
            let offset = u64::from_be_bytes(idx[at + ID_LEN..at + ID_LEN + 8].try_into().unwrap());
            records.push((ObjectId::from_bytes(id), offset));
            at += ID_LEN + 8;
        }
        Ok(PackReader {
            pack,
            records,
            fanout,
            algo,
        })
    }

    pub fn contains(&self, id: &ObjectId) -> bool {
        self.lookup(id).is_some()
    }

    pub fn ids(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.records.iter().map(|(id, _)| *id)
    }

    fn lookup(&self, id: &ObjectId) -> Option<u64> {
        let first = id.as_bytes()[0] as usize;
        let lo = if first == 0 {
            0
        } else {
            self.fanout[first - 1] as usize
        };
        let hi = self.fanout[first] as usize;
        let slice = &self.records[lo..hi];
        slice
            .binary_search_by(|(rid, _)| rid.cmp(id))
            .ok()
            .map(|i| slice[i].1)
    }

    fn raw_entry(&self, offset: u64) -> Result<(u8, Option<ObjectId>, &[u8])> {
        let bad = |reason: &str| Error::CorruptPack(reason.to_string());
        let at = offset as usize;
        let body_end = self.pack.len() - ID_LEN;
        if at + 1 > body_end {
            return Err(bad("entry offset out of range"));
        }
        let tag = self.pack[at];
        let (base, header_len) = if tag == TAG_DELTA {
            if at + 1 + ID_LEN > body_end {
                return Err(bad("truncated delta base"));
            }
            let mut b = [0u8; ID_LEN];
            b.copy_from_slice(&self.pack[at + 1..at + 1 + ID_LEN]);
            (Some(ObjectId::from_bytes(b)), 1 + ID_LEN)
        } else {
            (None, 1)
        };
        let len_at = at + header_len;
        if len_at + 4 > body_end {
            return Err(bad("truncated entry length"));
        }
        let len = u32::from_be_bytes(self.pack[len_at..len_at + 4].try_into().unwrap()) as usize;
        let data_at = len_at + 4;
        if data_at + len > body_end {
            return Err(bad("entry payload out of range"));
        }
        Ok((tag, base, &self.pack[data_at..data_at + len]))
    }

    /// Reconstructs an object: a delta chain is collected down to its
    /// full-text anchor, combined into one delta and applied once. The
    /// result must re-hash to the requested id.
    pub fn get(&self, id: &ObjectId) -> Result<(Kind, Vec<u8>)> {
        let offset = self
            .lookup(id)
            .ok_or_else(|| Error::UnknownObject(id.to_hex()))?;
        let bad = |reason: &str| Error::CorruptPack(reason.to_string());

        let mut deltas: Vec<Vec<u8>> = Vec::new();
        let mut at = offset;
        let (kind, payload) = loop {
            let (tag, base, data) = self.raw_entry(at)?;
            let data = decompress(data).ok_or_else(|| bad("undecodable entry payload"))?;
            match (tag_kind(tag), base) {
                (Some(kind), _) => break (kind, data),
                (None, Some(base_id)) => {
                    if deltas.len() > self.records.len() {
                        return Err(bad("delta chain does not terminate"));
                    }
                    deltas.push(data);
                    at = self
                        .lookup(&base_id)
                        .ok_or_else(|| bad("delta base missing from pack"))?;
                }
                (None, None) => return Err(bad("unknown entry tag")),
            }
        };

        let payload = if deltas.is_empty() {
            payload
        } else {
            let mut combined: Option<bindelta::BinDelta> = None;
            for wire in deltas.iter().rev() {
                let delta =
                    bindelta::decode(wire).map_err(|_| bad("undecodable delta in chain"))?;
                combined = Some(match combined {
                    None => delta,
                    Some(prev) => bindelta::combine(&prev, &delta)
                        .map_err(|_| bad("delta chain mismatch"))?,
                });
            }
            bindelta::apply(&payload, &combined.unwrap())
                .map_err(|_| bad("delta application failed"))?
        };

        let actual = hash_object(self.algo, kind, &payload);
        if actual != *id {
            return Err(bad(&format!(
                "object {id} reconstructs to {actual}"
            )));
        }
        Ok((kind, payload))
    }

    /// Entry metadata in offset order, for audits.
    pub fn entries(&self) -> Result<Vec<PackEntryInfo>> {
        let mut out: Vec<PackEntryInfo> = Vec::new();
        let mut by_offset: Vec<(u64, ObjectId)> =
            self.records.iter().map(|(id, off)| (*off, *id)).collect();
        by_offset.sort();
        for (offset, id) in by_offset {
            let (tag, base, _) = self.raw_entry(offset)?;
            out.push(PackEntryInfo {
                id,
                offset,
                kind: tag_kind(tag),
                base,
            });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------
// pack directory

/// The `packs/` directory of a repository: zero or more immutable packs
/// consulted as the fallback behind the loose store.
pub struct PackDir {
    dir: PathBuf,
    algo: HashAlgo,
    readers: Vec<(String, PackReader)>,
}

impl PackDir {
    pub fn open(dir: impl Into<PathBuf>, algo: HashAlgo) -> Result<Self> {
        let mut pd = PackDir {
            dir: dir.into(),
            algo,
            readers: Vec::new(),
        };
        pd.reload()?;
        Ok(pd)
    }

    pub fn reload(&mut self) -> Result<()> {
        self.readers.clear();
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
            Err(e) => return Err(e.into()),
        };
        let mut names: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().to_string_lossy().into_owned();
                name.strip_suffix(".pack").map(str::to_string)
            })
            .collect();
        names.sort();
        for name in names {
            let pack_path = self.dir.join(format!("{name}.pack"));
            let idx_path = self.dir.join(format!("{name}.idx"));
            self.readers
                .push((name.clone(), PackReader::load(&pack_path, &idx_path, self.algo)?));
        }
        Ok(())
    }

    pub fn contains(&self, id: &ObjectId) -> bool {
        self.readers.iter().any(|(_, r)| r.contains(id))
    }

    pub fn get(&self, id: &ObjectId) -> Result<(Kind, Vec<u8>)> {
        for (_, reader) in &self.readers {
            if reader.contains(id) {
                return reader.get(id);
            }
        }
        Err(Error::UnknownObject(id.to_hex()))
    }

    pub fn ids(&self) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = self
            .readers
            .iter()
            .flat_map(|(_, r)| r.ids())
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn pack_names(&self) -> Vec<String> {
        self.readers.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Writes a new pack atomically and starts serving it.
    pub fn add_pack(&mut self, pack: &[u8], idx: &[u8]) -> Result<String> {
        fs::create_dir_all(&self.dir)?;
        let digest = self.algo.digest_parts(&[pack]);
        let name = format!("pack-{}", digest.to_hex());
        for (ext, bytes) in [("pack", pack), ("idx", idx)] {
            let tmp = self.dir.join(format!(".tmp-{name}.{ext}"));
            fs::write(&tmp, bytes)?;
            fs::rename(&tmp, self.dir.join(format!("{name}.{ext}")))?;
        }
        self.reload()?;
        Ok(name)
    }

    pub fn remove_pack(&mut self, name: &str) -> Result<()> {
        for ext in ["pack", "idx"] {
            let path = self.dir.join(format!("{name}.{ext}"));
            if path.exists() {
                fs::remove_file(path)?;
            }
        }
        self.reload()
    }
}

// ---------------------------------------------------------------------
// garbage collection

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GcStats {
    pub packed: usize,
    pub kept_loose: usize,
    pub pruned: usize,
}

/// Packs everything reachable from `heads` into a single new pack and
/// removes the packed loose files. Unreachable objects stay readable —
/// they remain (or are re-materialized) as loose files — unless `prune`
/// is set. The caller holds the repository writer lock.
pub fn gc(
    loose: &crate::object::LooseStore,
    packs: &mut PackDir,
    heads: &[ObjectId],
    prune: bool,
) -> Result<GcStats> {
    // gather every object currently stored
    let mut all: BTreeMap<ObjectId, PackObject> = BTreeMap::new();
    for id in loose.list()? {
        let (kind, payload) = loose.get(&id)?;
        all.insert(id, PackObject { kind, payload });
    }
    for id in packs.ids() {
        if let std::collections::btree_map::Entry::Vacant(e) = all.entry(id) {
            let (kind, payload) = packs.get(&id)?;
            e.insert(PackObject { kind, payload });
        }
    }

    // reachability closure from the branch heads
    let mut reachable: HashSet<ObjectId> = HashSet::new();
    let mut stack: Vec<ObjectId> = heads.to_vec();
    while let Some(id) = stack.pop() {
        if !reachable.insert(id) {
            continue;
        }
        let obj = all.get(&id).ok_or(Error::DanglingReference(id))?;
        for (child, _) in references(obj.kind, &obj.payload)? {
            stack.push(child);
        }
    }

    let packed: BTreeMap<ObjectId, PackObject> = all
        .iter()
        .filter(|(id, _)| reachable.contains(*id))
        .map(|(id, obj)| (*id, obj.clone()))
        .collect();

    let mut stats = GcStats {
        packed: packed.len(),
        ..GcStats::default()
    };

    let new_name = if packed.is_empty() {
        None
    } else {
        let (pack, idx) = pack_build(&packed, loose.algo(), DEFAULT_WINDOW, DEFAULT_MAX_DEPTH)?;
        Some(packs.add_pack(&pack, &idx)?)
    };

    // unreachable objects stay readable as loose files unless pruned
    for (id, obj) in &all {
        if reachable.contains(id) {
            continue;
        }
        if prune {
            stats.pruned += 1;
        } else {
            loose.put(obj.kind, &obj.payload)?;
            stats.kept_loose += 1;
        }
    }
    for name in packs.pack_names() {
        if Some(&name) != new_name.as_ref() {
            packs.remove_pack(&name)?;
        }
    }
    for id in loose.list()? {
        let covered_by_pack = reachable.contains(&id) && new_name.is_some();
        let pruned_away = prune && !reachable.contains(&id);
        if covered_by_pack || pruned_away {
            loose.remove(&id)?;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::{Blob, EntryKind, FileMode, LooseStore, Object, TreeEntry};

    const ALGO: HashAlgo = HashAlgo::Sha256T160;

    fn put(objects: &mut BTreeMap<ObjectId, PackObject>, obj: &Object) -> ObjectId {
        let payload = obj.serialize();
        let id = hash_object(ALGO, obj.kind(), &payload);
        objects.insert(
            id,
            PackObject {
                kind: obj.kind(),
                payload,
            },
        );
        id
    }

    /// Single-file history: `revisions` commits, the file growing one
    /// line per commit. Returns (objects, head id).
    fn linear_history(revisions: usize) -> (BTreeMap<ObjectId, PackObject>, ObjectId) {
        let mut objects = BTreeMap::new();
        let mut content = String::new();
        let mut parent: Option<ObjectId> = None;
        let mut head = None;
        for i in 0..revisions {
            content.push_str(&format!(
                "fn item_{i}() {{ /* body of item number {i} */ }}\n"
            ));
            let blob = put(
                &mut objects,
                &Object::Blob(Blob {
                    content: content.clone().into_bytes(),
                }),
            );
            let tree = put(
                &mut objects,
                &Object::Tree(
                    Tree::new(vec![TreeEntry {
                        name: "library.rs".into(),
                        mode: FileMode::Normal,
                        kind: EntryKind::Blob,
                        child: blob,
                    }])
                    .unwrap(),
                ),
            );
            let commit = put(
                &mut objects,
                &Object::Commit(Commit {
                    tree,
                    parents: parent.into_iter().collect(),
                    author: "dev".into(),
                    timestamp: 1600000000 + i as i64,
                    message: format!("revision {i}\n"),
                }),
            );
            parent = Some(commit);
            head = Some(commit);
        }
        (objects, head.unwrap())
    }

    fn meta(id_label: &str, kind: Kind, size: usize, path: Option<&str>) -> CandidateMeta {
        CandidateMeta {
            id: ALGO.digest_parts(&[id_label.as_bytes()]),
            kind,
            size,
            first_path: path.map(str::to_string),
        }
    }

    #[test]
    fn candidate_order_groups_by_reversed_name() {
        let metas = vec![
            meta("1", Kind::Blob, 10, Some("x.c")),
            meta("2", Kind::Blob, 10, Some("z.h")),
            meta("3", Kind::Blob, 10, Some("y.c")),
        ];
        let order = delta_candidate_order(&metas);
        let pos = |label: &str| {
            order
                .iter()
                .position(|id| *id == ALGO.digest_parts(&[label.as_bytes()]))
                .unwrap()
        };
        // both .c files adjacent, .h separate
        assert_eq!(pos("1").abs_diff(pos("3")), 1, "c files must be adjacent");
        assert!(pos("2") < pos("1").min(pos("3")) || pos("2") > pos("1").max(pos("3")));
    }

    #[test]
    fn candidate_order_larger_first_on_equal_names() {
        let metas = vec![
            meta("small", Kind::Blob, 10, Some("same.txt")),
            meta("large", Kind::Blob, 99, Some("same.txt")),
        ];
        let order = delta_candidate_order(&metas);
        assert_eq!(order[0], ALGO.digest_parts(&[b"large".as_slice()]));
    }

    #[test]
    fn candidate_order_singleton() {
        let metas = vec![meta("only", Kind::Blob, 5, Some("f"))];
        assert_eq!(delta_candidate_order(&metas).len(), 1);
    }

    #[test]
    fn single_object_pack_round_trips() {
        let mut objects = BTreeMap::new();
        let id = put(
            &mut objects,
            &Object::Blob(Blob {
                content: b"lone blob".to_vec(),
            }),
        );
        let (pack, idx) = pack_build(&objects, ALGO, 10, 10).unwrap();
        let reader = PackReader::from_bytes(pack, &idx, ALGO).unwrap();
        let entries = reader.entries().unwrap();
        assert_eq!(entries.len(), 1);
        assert!(entries[0].base.is_none());
        let (kind, payload) = reader.get(&id).unwrap();
        assert_eq!(kind, Kind::Blob);
        assert_eq!(payload, b"lone blob");
    }

    #[test]
    fn history_pack_reconstructs_everything_and_is_smaller() {
        let (objects, _head) = linear_history(50);
        let (pack, idx) = pack_build(&objects, ALGO, 10, 10).unwrap();
        let reader = PackReader::from_bytes(pack.clone(), &idx, ALGO).unwrap();
        let mut loose_total = 0usize;
        for (id, obj) in &objects {
            let (kind, payload) = reader.get(id).unwrap();
            assert_eq!(kind, obj.kind);
            assert_eq!(payload, obj.payload, "object {id} differs");
            loose_total += compress(&obj.payload).len();
        }
        assert!(
            pack.len() < loose_total,
            "pack {} not smaller than loose total {}",
            pack.len(),
            loose_total
        );
    }

    #[test]
    fn delta_chains_respect_depth_cap_and_base_order() {
        let (objects, _) = linear_history(60);
        let (pack, idx) = pack_build(&objects, ALGO, 10, 10).unwrap();
        let reader = PackReader::from_bytes(pack, &idx, ALGO).unwrap();
        let entries = reader.entries().unwrap();
        let by_id: HashMap<ObjectId, &PackEntryInfo> =
            entries.iter().map(|e| (e.id, e)).collect();

        let mut saw_delta = false;
        for e in &entries {
            if let Some(base) = e.base {
                saw_delta = true;
                // base physically precedes the delta
                assert!(
                    by_id[&base].offset < e.offset,
                    "base {base} at {} not before delta at {}",
                    by_id[&base].offset,
                    e.offset
                );
                // chain depth within the cap
                let mut depth = 0;
                let mut at = e;
                while let Some(b) = at.base {
                    depth += 1;
                    assert!(depth <= 10, "chain deeper than 10");
                    at = by_id[&b];
                }
            }
        }
        assert!(saw_delta, "a 60-revision history should produce deltas");
    }

    #[test]
    fn pack_build_is_deterministic() {
        let (objects, _) = linear_history(20);
        let first = pack_build(&objects, ALGO, 10, 10).unwrap();
        let second = pack_build(&objects, ALGO, 10, 10).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn unknown_id_and_corruption_reported() {
        let (objects, _) = linear_history(3);
        let (pack, idx) = pack_build(&objects, ALGO, 10, 10).unwrap();
        let reader = PackReader::from_bytes(pack.clone(), &idx, ALGO).unwrap();
        let ghost = ALGO.digest_parts(&[b"ghost".as_slice()]);
        assert!(matches!(
            reader.get(&ghost),
            Err(Error::UnknownObject(_))
        ));

        // flip one payload byte and fix up nothing: checksum catches it
        let mut bent = pack.clone();
        let mid = bent.len() / 2;
        bent[mid] ^= 0x20;
        assert!(matches!(
            PackReader::from_bytes(bent, &idx, ALGO),
            Err(Error::CorruptPack(_))
        ));
    }

    #[test]
    fn dangling_reference_rejected() {
        let (mut objects, _) = linear_history(2);
        // drop a blob out of the closure
        let blob_id = *objects
            .iter()
            .find(|(_, o)| o.kind == Kind::Blob)
            .map(|(id, _)| id)
            .unwrap();
        objects.remove(&blob_id);
        assert!(matches!(
            pack_build(&objects, ALGO, 10, 10),
            Err(Error::DanglingReference(_))
        ));
    }

    fn gc_fixture() -> (tempfile::TempDir, LooseStore, PackDir, Vec<ObjectId>, ObjectId) {
        let dir = tempfile::tempdir().unwrap();
        let loose = LooseStore::open(dir.path().join("objects"), ALGO);
        let packs = PackDir::open(dir.path().join("packs"), ALGO).unwrap();
        let (objects, head) = linear_history(10);
        let mut ids = Vec::new();
        for (id, obj) in &objects {
            loose.put(obj.kind, &obj.payload).unwrap();
            ids.push(*id);
        }
        (dir, loose, packs, ids, head)
    }

    #[test]
    fn gc_preserves_behavior_and_is_idempotent() {
        let (_dir, loose, mut packs, ids, head) = gc_fixture();
        let stats = gc(&loose, &mut packs, &[head], false).unwrap();
        assert_eq!(stats.packed, ids.len());
        assert!(loose.list().unwrap().is_empty());
        for id in &ids {
            assert!(packs.get(id).is_ok(), "object {id} lost by gc");
        }

        let before_names = packs.pack_names();
        let stats2 = gc(&loose, &mut packs, &[head], false).unwrap();
        assert_eq!(stats2.packed, ids.len());
        assert_eq!(packs.pack_names(), before_names, "gc not idempotent");
        assert_eq!(packs.ids().len(), ids.len());
    }

    #[test]
    fn gc_keeps_unreachable_without_prune() {
        let (_dir, loose, mut packs, _ids, head) = gc_fixture();
        let stray = loose.put(Kind::Blob, b"not referenced anywhere").unwrap();
        let stats = gc(&loose, &mut packs, &[head], false).unwrap();
        assert_eq!(stats.kept_loose, 1);
        assert_eq!(loose.get(&stray).unwrap().1, b"not referenced anywhere");

        // with --prune it goes away
        let stats = gc(&loose, &mut packs, &[head], true).unwrap();
        assert_eq!(stats.pruned, 1);
        assert!(loose.get(&stray).is_err());
    }

    #[test]
    fn gc_unreachable_in_old_pack_rematerializes() {
        let (_dir, loose, mut packs, _ids, head) = gc_fixture();
        let stray = loose.put(Kind::Blob, b"stray in pack").unwrap();
        // first gc treats the stray as a root, so it lands in the pack
        gc(&loose, &mut packs, &[head, stray], false).unwrap();
        assert!(packs.contains(&stray));
        assert!(loose.list().unwrap().is_empty());
        // second gc without it: the stray leaves the pack but must stay
        // readable, re-materialized as a loose file
        gc(&loose, &mut packs, &[head], false).unwrap();
        assert!(loose.get(&stray).is_ok());
        assert!(!packs.contains(&stray));
    }
}
