//! Append-only per-file revision log: a fixed-width index file plus a
//! data file of hunks, each hunk a full text or a binary delta against
//! the previously appended revision.
//!
//! Deltas chain in append order regardless of branch; a chain is capped
//! at `cap_multiplier` times the revision's full-text size, after which
//! a fresh full text re-anchors it. The write protocol is data first,
//! index record last, so the index never references bytes that are not
//! durable; recovery from a torn write is truncation to the last index
//! record whose data range lies fully inside the data file. Readers
//! take no lock and always observe a consistent prefix.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;

use crate::bindelta::{self, BinDelta};
use crate::error::{Error, Result};
use crate::object::{hash_object, HashAlgo, Kind, ObjectId, ID_LEN};

const MAGIC: &[u8; 7] = b"vcsrlog";
const VERSION: u8 = 1;
const HEADER_LEN: u64 = 8;
/// kind(1) base_seq(4) data_offset(8) data_len(4) full_len(4)
/// linked_id(20) p1(20) p2(20) reserved(3)
const RECORD_LEN: usize = 84;

/// Default chain cap multiplier.
pub const DEFAULT_CAP_MULTIPLIER: u32 = 2;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HunkKind {
    FullZlib,
    DeltaZlib,
    FullRaw,
    DeltaRaw,
}

impl HunkKind {
    pub fn is_full(&self) -> bool {
        matches!(self, HunkKind::FullZlib | HunkKind::FullRaw)
    }

    fn to_byte(self) -> u8 {
        match self {
            HunkKind::FullZlib => 0,
            HunkKind::DeltaZlib => 1,
            HunkKind::FullRaw => 2,
            HunkKind::DeltaRaw => 3,
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0 => HunkKind::FullZlib,
            1 => HunkKind::DeltaZlib,
            2 => HunkKind::FullRaw,
            3 => HunkKind::DeltaRaw,
            _ => return None,
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RevlogEntry {
    pub index_seq: usize,
    pub base_seq: usize,
    pub kind: HunkKind,
    pub data_offset: u64,
    pub data_len: u32,
    pub full_len: u32,
    pub linked_id: ObjectId,
    pub parents: Vec<ObjectId>,
}

pub struct Revlog {
    index_path: PathBuf,
    data_path: PathBuf,
    lock_path: PathBuf,
    algo: HashAlgo,
    cap_multiplier: u32,
    entries: Vec<RevlogEntry>,
    by_id: HashMap<ObjectId, usize>,
}

/// Exclusive writer lock, held for the duration of one append.
struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    fn acquire(path: &Path) -> Result<Self> {
        match OpenOptions::new().write(true).create_new(true).open(path) {
            Ok(_) => Ok(LockGuard {
                path: path.to_path_buf(),
            }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::LockHeld(path.to_path_buf()))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

impl Revlog {
    /// Opens (creating if absent) the revlog stored at `<base>.i` /
    /// `<base>.d`. The index is validated on load: entries whose data
    /// range exceeds the data file, and any trailing partial index
    /// record, are ignored. Files are never modified here — a reader
    /// must not tear down a concurrent writer's in-flight append —
    /// physical truncation happens under the writer lock instead.
    pub fn open(base: &Path, algo: HashAlgo, cap_multiplier: u32) -> Result<Self> {
        let mut log = Revlog {
            index_path: base.with_extension("i"),
            data_path: base.with_extension("d"),
            lock_path: base.with_extension("lock"),
            algo,
            cap_multiplier: cap_multiplier.max(1),
            entries: Vec::new(),
            by_id: HashMap::new(),
        };
        log.load()?;
        Ok(log)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, seq: usize) -> Result<&RevlogEntry> {
        self.entries.get(seq).ok_or(Error::OutOfRange(seq))
    }

    pub fn entries(&self) -> &[RevlogEntry] {
        &self.entries
    }

    pub fn seq_of(&self, id: &ObjectId) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Appends a revision. The hunk is a delta against the previously
    /// appended revision unless the log is empty or the chain would
    /// exceed the cap, in which case a full text re-anchors the chain.
    /// Appending content whose id is already present is a no-op
    /// returning the existing sequence number.
    pub fn append(&mut self, content: &[u8], parents: &[ObjectId]) -> Result<usize> {
        let linked_id = hash_object(self.algo, Kind::Blob, content);
        if let Some(seq) = self.by_id.get(&linked_id) {
            return Ok(*seq);
        }
        let _lock = LockGuard::acquire(&self.lock_path)?;
        // under the lock: pick up appends that raced this handle, then
        // trim any torn garbage so the append lands on a clean end
        self.load()?;
        self.trim()?;
        if let Some(seq) = self.by_id.get(&linked_id) {
            return Ok(*seq);
        }

        let seq = self.entries.len();
        let (kind, base_seq, payload) = self.choose_hunk(seq, content)?;

        // data first, index record last: the record is the commit point
        let data_offset = self.append_data(&payload)?;
        let entry = RevlogEntry {
            index_seq: seq,
            base_seq,
            kind,
            data_offset,
            data_len: payload.len() as u32,
            full_len: content.len() as u32,
            linked_id,
            parents: parents.to_vec(),
        };
        self.append_index(&entry)?;
        self.by_id.insert(linked_id, seq);
        self.entries.push(entry);
        Ok(seq)
    }

    fn choose_hunk(&mut self, seq: usize, content: &[u8]) -> Result<(HunkKind, usize, Vec<u8>)> {
        if seq > 0 {
            let prev = self.read(seq - 1)?;
            let delta = bindelta::make(&prev, content, bindelta::DEFAULT_WINDOW);
            let (delta_kind, delta_payload) = pack_hunk(&bindelta::encode(&delta), false);
            let prev_entry = &self.entries[seq - 1];
            let chain_so_far: u64 = self.entries[prev_entry.base_seq..=seq - 1]
                .iter()
                .map(|e| e.data_len as u64)
                .sum();
            let cap = self.cap_multiplier as u64 * content.len() as u64;
            if chain_so_far + delta_payload.len() as u64 <= cap {
                return Ok((delta_kind, prev_entry.base_seq, delta_payload));
            }
        }
        let (kind, payload) = pack_hunk(content, true);
        Ok((kind, seq, payload))
    }

    /// Reconstructs the content of entry `seq`: one contiguous read of
    /// the chain's hunks, deltas combined into a single delta, then one
    /// application against the chain's full-text anchor.
    pub fn read(&self, seq: usize) -> Result<Vec<u8>> {
        let entry = self.entry(seq)?.clone();
        let base = &self.entries[entry.base_seq];
        let start = base.data_offset;
        let end = entry.data_offset + entry.data_len as u64;
        let raw = self.read_data_range(start, end, seq)?;

        let mut content: Option<Vec<u8>> = None;
        let mut combined: Option<BinDelta> = None;
        for e in &self.entries[entry.base_seq..=seq] {
            let lo = (e.data_offset - start) as usize;
            let hi = lo + e.data_len as usize;
            let hunk = unpack_hunk(e.kind, &raw[lo..hi]).ok_or(Error::CorruptHunk(e.index_seq))?;
            if e.kind.is_full() {
                content = Some(hunk);
                combined = None;
            } else {
                let delta = bindelta::decode(&hunk).map_err(|_| Error::CorruptHunk(e.index_seq))?;
                combined = Some(match combined {
                    None => delta,
                    Some(prev) => bindelta::combine(&prev, &delta)
                        .map_err(|_| Error::CorruptHunk(e.index_seq))?,
                });
            }
        }
        let full = content.ok_or(Error::CorruptHunk(seq))?;
        let result = match combined {
            None => full,
            Some(delta) => {
                bindelta::apply(&full, &delta).map_err(|_| Error::CorruptHunk(seq))?
            }
        };
        // id re-verification guards against silent data corruption
        if hash_object(self.algo, Kind::Blob, &result) != entry.linked_id {
            return Err(Error::CorruptHunk(seq));
        }
        Ok(result)
    }

    /// Explicit recovery: under the writer lock, reloads the valid
    /// prefix and truncates both files to it. Total — a missing or
    /// mangled file recovers to an empty log. Returns the surviving
    /// entry count.
    pub fn recover(&mut self) -> Result<usize> {
        let _lock = LockGuard::acquire(&self.lock_path)?;
        self.load()?;
        self.trim()?;
        Ok(self.len())
    }

    /// Rebuilds the in-memory view: the longest index prefix of intact
    /// records whose data ranges lie fully within the data file.
    fn load(&mut self) -> Result<()> {
        self.entries.clear();
        self.by_id.clear();

        let data_len = match fs::metadata(&self.data_path) {
            Ok(m) => m.len(),
            Err(_) => 0,
        };
        let index_bytes = fs::read(&self.index_path).unwrap_or_default();

        if index_bytes.len() as u64 >= HEADER_LEN && &index_bytes[..7] == MAGIC {
            let records = &index_bytes[HEADER_LEN as usize..];
            for (seq, rec) in records.chunks(RECORD_LEN).enumerate() {
                if rec.len() < RECORD_LEN {
                    break; // torn index record
                }
                match parse_record(seq, rec) {
                    Some(entry)
                        if entry.base_seq <= seq
                            && entry.data_offset >= HEADER_LEN
                            && entry.data_offset + entry.data_len as u64 <= data_len =>
                    {
                        self.by_id.insert(entry.linked_id, seq);
                        self.entries.push(entry);
                    }
                    _ => break,
                }
            }
        }
        Ok(())
    }

    /// Truncates torn bytes beyond the valid prefix. Only called with
    /// the writer lock held. A file whose header itself is mangled is
    /// removed outright (possible only while no entries survive) so the
    /// next append recreates it cleanly.
    fn trim(&self) -> Result<()> {
        for path in [&self.index_path, &self.data_path] {
            if path.exists() && !header_ok(path) {
                debug_assert!(self.entries.is_empty());
                fs::remove_file(path)?;
            }
        }
        let want_index = HEADER_LEN + (self.entries.len() * RECORD_LEN) as u64;
        if let Ok(meta) = fs::metadata(&self.index_path) {
            if meta.len() > want_index {
                OpenOptions::new()
                    .write(true)
                    .open(&self.index_path)?
                    .set_len(want_index)?;
            }
        }
        let want_data = self
            .entries
            .last()
            .map(|e| e.data_offset + e.data_len as u64)
            .unwrap_or(HEADER_LEN);
        if let Ok(meta) = fs::metadata(&self.data_path) {
            if meta.len() > want_data {
                OpenOptions::new()
                    .write(true)
                    .open(&self.data_path)?
                    .set_len(want_data)?;
            }
        }
        Ok(())
    }

    fn append_data(&self, payload: &[u8]) -> Result<u64> {
        let mut f = open_append(&self.data_path)?;
        let offset = f.seek(SeekFrom::End(0))?;
        f.write_all(payload)?;
        f.sync_data()?;
        Ok(offset)
    }

    fn append_index(&self, entry: &RevlogEntry) -> Result<()> {
        let mut f = open_append(&self.index_path)?;
        f.seek(SeekFrom::End(0))?;
        f.write_all(&encode_record(entry))?;
        f.sync_data()?;
        Ok(())
    }

    fn read_data_range(&self, start: u64, end: u64, seq: usize) -> Result<Vec<u8>> {
        let mut f = File::open(&self.data_path).map_err(|_| Error::CorruptHunk(seq))?;
        let len = f.metadata()?.len();
        if end > len {
            return Err(Error::CorruptHunk(seq));
        }
        f.seek(SeekFrom::Start(start))?;
        let mut buf = vec![0u8; (end - start) as usize];
        f.read_exact(&mut buf).map_err(|_| Error::CorruptHunk(seq))?;
        Ok(buf)
    }
}

fn header_ok(path: &Path) -> bool {
    let mut buf = [0u8; HEADER_LEN as usize];
    match File::open(path).and_then(|mut f| f.read_exact(&mut buf)) {
        Ok(()) => &buf[..7] == MAGIC && buf[7] == VERSION,
        Err(_) => false,
    }
}

/// Creates the file with its header if missing, then opens for append.
fn open_append(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let exists = path.exists();
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if !exists {
        f.write_all(MAGIC)?;
        f.write_all(&[VERSION])?;
    }
    Ok(f)
}

/// Compresses a hunk, keeping it raw when zlib does not shrink it, so
/// hunk sizes never exceed their plain size.
fn pack_hunk(raw: &[u8], full: bool) -> (HunkKind, Vec<u8>) {
    let mut enc = ZlibEncoder::new(Vec::new(), Compression::default());
    let compressed = enc
        .write_all(raw)
        .and_then(|_| enc.finish())
        .unwrap_or_else(|_| raw.to_vec());
    if compressed.len() < raw.len() {
        (
            if full {
                HunkKind::FullZlib
            } else {
                HunkKind::DeltaZlib
            },
            compressed,
        )
    } else {
        (
            if full { HunkKind::FullRaw } else { HunkKind::DeltaRaw },
            raw.to_vec(),
        )
    }
}

fn unpack_hunk(kind: HunkKind, payload: &[u8]) -> Option<Vec<u8>> {
    match kind {
        HunkKind::FullRaw | HunkKind::DeltaRaw => Some(payload.to_vec()),
        HunkKind::FullZlib | HunkKind::DeltaZlib => {
            let mut out = Vec::new();
            ZlibDecoder::new(payload).read_to_end(&mut out).ok()?;
            Some(out)
        }
    }
}

fn encode_record(e: &RevlogEntry) -> [u8; RECORD_LEN] {
    let mut rec = [0u8; RECORD_LEN];
    rec[0] = e.kind.to_byte();
    rec[1..5].copy_from_slice(&(e.base_seq as u32).to_be_bytes());
    rec[5..13].copy_from_slice(&e.data_offset.to_be_bytes());
    rec[13..17].copy_from_slice(&e.data_len.to_be_bytes());
    rec[17..21].copy_from_slice(&e.full_len.to_be_bytes());
    rec[21..41].copy_from_slice(e.linked_id.as_bytes());
    if let Some(p) = e.parents.first() {
        rec[41..61].copy_from_slice(p.as_bytes());
    }
    if let Some(p) = e.parents.get(1) {
        rec[61..81].copy_from_slice(p.as_bytes());
    }
    rec
}

fn parse_record(seq: usize, rec: &[u8]) -> Option<RevlogEntry> {
    let kind = HunkKind::from_byte(rec[0])?;
    let base_seq = u32::from_be_bytes(rec[1..5].try_into().unwrap()) as usize;
    let data_offset = u64::from_be_bytes(rec[5..13].try_into().unwrap());
    let data_len = u32::from_be_bytes(rec[13..17].try_into().unwrap());
    let full_len = u32::from_be_bytes(rec[17..21].try_into().unwrap());
    let mut id = [0u8; ID_LEN];
    id.copy_from_slice(&rec[21..41]);
    let mut parents = Vec::new();
    for range in [41..61, 61..81] {
        let mut p = [0u8; ID_LEN];
        p.copy_from_slice(&rec[range]);
        if p != [0u8; ID_LEN] {
            parents.push(ObjectId::from_bytes(p));
        }
    }
    Some(RevlogEntry {
        index_seq: seq,
        base_seq,
        kind,
        data_offset,
        data_len,
        full_len,
        linked_id: ObjectId::from_bytes(id),
        parents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALGO: HashAlgo = HashAlgo::Sha256T160;

    fn open_log(dir: &Path) -> Revlog {
        Revlog::open(&dir.join("file"), ALGO, DEFAULT_CAP_MULTIPLIER).unwrap()
    }

    #[test]
    fn first_append_is_full_at_base_zero() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        let seq = log.append(b"hello revlog\n", &[]).unwrap();
        assert_eq!(seq, 0);
        let e = log.entry(0).unwrap();
        assert!(e.kind.is_full());
        assert_eq!(e.base_seq, 0);
        assert_eq!(log.read(0).unwrap(), b"hello revlog\n");
    }

    #[test]
    fn duplicate_append_is_noop() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        let a = log.append(b"same", &[]).unwrap();
        let b = log.append(b"other", &[]).unwrap();
        let again = log.append(b"same", &[]).unwrap();
        assert_eq!(a, again);
        assert_ne!(a, b);
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn lock_contention_reported() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        fs::write(dir.path().join("file.lock"), b"").unwrap();
        assert!(matches!(
            log.append(b"blocked", &[]),
            Err(Error::LockHeld(_))
        ));
        fs::remove_file(dir.path().join("file.lock")).unwrap();
        log.append(b"unblocked", &[]).unwrap();
    }

    #[test]
    fn growing_history_round_trips_and_reanchors() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        let mut content = String::new();
        let mut snapshots = Vec::new();
        for i in 0..100 {
            content.push_str(&format!("l{i}\n"));
            let seq = log.append(content.as_bytes(), &[]).unwrap();
            assert_eq!(seq, i);
            snapshots.push(content.clone());
        }
        for (i, snap) in snapshots.iter().enumerate() {
            assert_eq!(log.read(i).unwrap(), snap.as_bytes(), "entry {i}");
        }
        let fulls = log.entries().iter().filter(|e| e.kind.is_full()).count();
        assert!(fulls > 1, "expected at least one re-anchor, got {fulls}");

        // chain cap audit: compressed chain size within cap for every entry
        for e in log.entries() {
            let chain: u64 = log.entries()[e.base_seq..=e.index_seq]
                .iter()
                .map(|x| x.data_len as u64)
                .sum();
            assert!(
                chain <= DEFAULT_CAP_MULTIPLIER as u64 * e.full_len as u64,
                "entry {} chain {} exceeds cap for size {}",
                e.index_seq,
                chain,
                e.full_len
            );
        }
    }

    #[test]
    fn branching_appends_chain_in_record_order() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        let id0 = hash_object(ALGO, Kind::Blob, b"root content here\n");
        log.append(b"root content here\n", &[]).unwrap();
        // two branches both based on seq 0, appended interleaved
        log.append(b"root content here\nbranch a\n", &[id0]).unwrap();
        log.append(b"root content here\nbranch b\n", &[id0]).unwrap();
        assert_eq!(log.read(1).unwrap(), b"root content here\nbranch a\n");
        assert_eq!(log.read(2).unwrap(), b"root content here\nbranch b\n");
        // entry 2's delta base is entry 1 by append order, not ancestry
        let e2 = log.entry(2).unwrap();
        if !e2.kind.is_full() {
            assert_eq!(e2.base_seq, log.entry(1).unwrap().base_seq);
        }
    }

    #[test]
    fn out_of_range_read() {
        let dir = tempfile::tempdir().unwrap();
        let log = open_log(dir.path());
        assert!(matches!(log.read(0), Err(Error::OutOfRange(0))));
    }

    #[test]
    fn truncated_data_detected_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        log.append(b"some content that compresses fine", &[]).unwrap();
        let data_path = dir.path().join("file.d");
        let len = fs::metadata(&data_path).unwrap().len();
        let f = OpenOptions::new().write(true).open(&data_path).unwrap();
        f.set_len(len - 3).unwrap();
        assert!(matches!(log.read(0), Err(Error::CorruptHunk(0))));
    }

    #[test]
    fn recover_intact_log_keeps_everything() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        for i in 0..10 {
            log.append(format!("content {i}\n").as_bytes(), &[]).unwrap();
        }
        let reopened = open_log(dir.path());
        assert_eq!(reopened.len(), 10);
        for i in 0..10 {
            assert_eq!(reopened.read(i).unwrap(), format!("content {i}\n").as_bytes());
        }
    }

    #[test]
    fn recover_after_torn_data_write() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        for i in 0..5 {
            log.append(format!("body {i} padding padding padding\n").as_bytes(), &[])
                .unwrap();
        }
        // tear into the middle of the last hunk
        let last = log.entry(4).unwrap().clone();
        let data_path = dir.path().join("file.d");
        let f = OpenOptions::new().write(true).open(&data_path).unwrap();
        f.set_len(last.data_offset + 1).unwrap();

        let reopened = open_log(dir.path());
        assert_eq!(reopened.len(), 4);
        for i in 0..4 {
            assert!(reopened.read(i).is_ok());
        }
        // the log stays appendable after recovery
        let mut log = open_log(dir.path());
        let seq = log.append(b"fresh after recovery\n", &[]).unwrap();
        assert_eq!(seq, 4);
        assert_eq!(log.read(4).unwrap(), b"fresh after recovery\n");
    }

    #[test]
    fn recover_drops_index_without_data() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        log.append(b"kept entry\n", &[]).unwrap();
        log.append(b"kept entry\nplus doomed bytes\n", &[]).unwrap();
        // wipe the data file entirely below the second hunk
        let first_end = {
            let e = log.entry(0).unwrap();
            e.data_offset + e.data_len as u64
        };
        let f = OpenOptions::new()
            .write(true)
            .open(dir.path().join("file.d"))
            .unwrap();
        f.set_len(first_end).unwrap();

        let reopened = open_log(dir.path());
        assert_eq!(reopened.len(), 1);
        assert_eq!(reopened.read(0).unwrap(), b"kept entry\n");
    }

    #[test]
    fn recover_truncates_partial_index_record() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        log.append(b"alpha\n", &[]).unwrap();
        log.append(b"alpha\nbeta\n", &[]).unwrap();
        let idx_path = dir.path().join("file.i");
        let len = fs::metadata(&idx_path).unwrap().len();
        let f = OpenOptions::new().write(true).open(&idx_path).unwrap();
        f.set_len(len - 10).unwrap();

        let reopened = open_log(dir.path());
        assert_eq!(reopened.len(), 1);
    }

    #[test]
    fn appends_never_rewrite_existing_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        log.append(b"first version\n", &[]).unwrap();
        let idx_before = fs::read(dir.path().join("file.i")).unwrap();
        let data_before = fs::read(dir.path().join("file.d")).unwrap();

        log.append(b"first version\nsecond line\n", &[]).unwrap();
        let idx_after = fs::read(dir.path().join("file.i")).unwrap();
        let data_after = fs::read(dir.path().join("file.d")).unwrap();
        assert_eq!(&idx_after[..idx_before.len()], &idx_before[..]);
        assert_eq!(&data_after[..data_before.len()], &data_before[..]);
        assert!(idx_after.len() > idx_before.len());
    }

    #[test]
    fn readers_see_consistent_prefix_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        for i in 0..3 {
            log.append(format!("v{i}\n").as_bytes(), &[]).unwrap();
        }
        // simulate a reader that opened mid-history: copy the files,
        // then keep appending to the original
        let snap = tempfile::tempdir().unwrap();
        for ext in ["i", "d"] {
            fs::copy(
                dir.path().join(format!("file.{ext}")),
                snap.path().join(format!("file.{ext}")),
            )
            .unwrap();
        }
        for i in 3..6 {
            log.append(format!("v{i}\n").as_bytes(), &[]).unwrap();
        }
        let reader = open_log(snap.path());
        assert_eq!(reader.len(), 3);
        for i in 0..3 {
            assert_eq!(reader.read(i).unwrap(), format!("v{i}\n").as_bytes());
        }
    }

    #[test]
    fn index_golden_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = open_log(dir.path());
        log.append(b"tiny", &[]).unwrap();
        let bytes = fs::read(dir.path().join("file.i")).unwrap();
        assert_eq!(&bytes[..7], b"vcsrlog");
        assert_eq!(bytes[7], 1);
        assert_eq!(bytes.len(), 8 + RECORD_LEN);
        let rec = &bytes[8..];
        // "tiny" cannot shrink under zlib: stored raw
        assert_eq!(rec[0], HunkKind::FullRaw.to_byte());
        assert_eq!(&rec[1..5], &0u32.to_be_bytes()); // base_seq
        assert_eq!(&rec[5..13], &8u64.to_be_bytes()); // data_offset after header
        assert_eq!(&rec[13..17], &4u32.to_be_bytes()); // data_len
        assert_eq!(&rec[17..21], &4u32.to_be_bytes()); // full_len
        assert_eq!(
            &rec[21..41],
            hash_object(ALGO, Kind::Blob, b"tiny").as_bytes()
        );
        assert_eq!(&rec[41..81], &[0u8; 40][..]); // no parents
        assert_eq!(&rec[81..84], &[0u8; 3][..]); // reserved
        // and the data file holds the raw bytes after its header
        let data = fs::read(dir.path().join("file.d")).unwrap();
        assert_eq!(&data[8..], b"tiny");
    }

    #[test]
    fn concurrent_readers_during_appends() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("file");
        let mut log = Revlog::open(&base, ALGO, DEFAULT_CAP_MULTIPLIER).unwrap();
        let mut expected = Vec::new();
        for i in 0..20 {
            let content = format!("content number {i}\n").repeat(i + 1);
            log.append(content.as_bytes(), &[]).unwrap();
            expected.push(content);

            // a fresh reader (no lock) sees everything appended so far
            let reader = Revlog::open(&base, ALGO, DEFAULT_CAP_MULTIPLIER).unwrap();
            assert_eq!(reader.len(), i + 1);
            for (j, want) in expected.iter().enumerate() {
                assert_eq!(reader.read(j).unwrap(), want.as_bytes());
            }
        }
    }
}
