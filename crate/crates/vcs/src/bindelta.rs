//! Binary delta codec: rolling-hash block matching in the xdelta
//! family, delta application and delta-chain combination.
//!
//! The encoder indexes fixed-size blocks of the base in a hash table,
//! rolls a window hash across the target and, on every (byte-verified)
//! hit, stretches the match as far as possible in both directions. The
//! output is a list of `Copy`/`Insert` instructions; applying a chain
//! of deltas goes through [`combine`] so the data is only copied once.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Default block/window size for the rolling match, in bytes.
pub const DEFAULT_WINDOW: usize = 16;

/// Multiplier of the polynomial rolling hash.
const ROLL_BASE: u64 = 1_000_003;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DeltaOp {
    /// Copy `len` bytes starting at `offset` in the base.
    Copy { offset: usize, len: usize },
    /// Emit the carried bytes verbatim.
    Insert { data: Vec<u8> },
}

impl DeltaOp {
    fn produced(&self) -> usize {
        match self {
            DeltaOp::Copy { len, .. } => *len,
            DeltaOp::Insert { data } => data.len(),
        }
    }
}

/// Instructions reconstructing a target byte string from a base.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinDelta {
    pub base_len: usize,
    pub target_len: usize,
    pub ops: Vec<DeltaOp>,
}

impl BinDelta {
    /// Bytes of insert payload carried by this delta.
    pub fn insert_bytes(&self) -> usize {
        self.ops
            .iter()
            .map(|op| match op {
                DeltaOp::Insert { data } => data.len(),
                _ => 0,
            })
            .sum()
    }

    fn check(&self) -> Result<()> {
        let mut produced = 0usize;
        for op in &self.ops {
            if let DeltaOp::Copy { offset, len } = op {
                if offset + len > self.base_len {
                    return Err(Error::CopyOutOfRange {
                        offset: *offset,
                        len: *len,
                        base_len: self.base_len,
                    });
                }
            }
            produced += op.produced();
        }
        if produced != self.target_len {
            return Err(Error::MalformedDelta(format!(
                "ops produce {produced} bytes, target_len is {}",
                self.target_len
            )));
        }
        Ok(())
    }
}

fn roll_pow(window: usize) -> u64 {
    let mut p = 1u64;
    for _ in 0..window - 1 {
        p = p.wrapping_mul(ROLL_BASE);
    }
    p
}

fn block_hash(block: &[u8]) -> u64 {
    block
        .iter()
        .fold(0u64, |h, &b| h.wrapping_mul(ROLL_BASE).wrapping_add(b as u64 + 1))
}

/// Encodes `target` against `base` using block size `window` (a power
/// of two, at least 4). Degenerates to a single `Insert` whenever no
/// block of the base reappears in the target, including when the base
/// is shorter than one window.
pub fn make(base: &[u8], target: &[u8], window: usize) -> BinDelta {
    assert!(window >= 4 && window.is_power_of_two(), "bad window {window}");
    let mut ops = Vec::new();
    let mut pending = Vec::new(); // insert bytes not yet flushed

    // Index non-overlapping base blocks. Every candidate hit is byte
    // verified before use; hash equality alone is never trusted.
    let mut table: HashMap<u64, Vec<usize>> = HashMap::new();
    for start in (0..base.len().saturating_sub(window - 1)).step_by(window) {
        table
            .entry(block_hash(&base[start..start + window]))
            .or_default()
            .push(start);
    }

    let pow = roll_pow(window);
    // Invariant: target bytes before `window_at - pending.len()` are
    // already encoded in `ops`; `pending` holds exactly the bytes just
    // before the rolling window, which covers
    // `target[window_at..window_at + window]`.
    let mut window_at = 0usize;
    let mut hash = if target.len() >= window {
        block_hash(&target[..window])
    } else {
        0
    };

    loop {
        if target.len() - window_at < window || table.is_empty() {
            pending.extend_from_slice(&target[window_at..]);
            break;
        }

        let mut best: Option<(usize, usize, usize)> = None; // base_start, back, fwd
        if let Some(cands) = table.get(&hash) {
            for &cand in cands {
                if base[cand..cand + window] != target[window_at..window_at + window] {
                    continue;
                }
                // stretch backwards over still-pending bytes
                let max_back = pending.len().min(cand);
                let mut back = 0;
                while back < max_back && base[cand - back - 1] == target[window_at - back - 1]
                {
                    back += 1;
                }
                // stretch forwards
                let mut fwd = window;
                while cand + fwd < base.len()
                    && window_at + fwd < target.len()
                    && base[cand + fwd] == target[window_at + fwd]
                {
                    fwd += 1;
                }
                let better = match best {
                    None => true,
                    // largest match wins, ties to the lowest base offset
                    Some((bs, bb, bf)) => {
                        back + fwd > bb + bf || (back + fwd == bb + bf && cand - back < bs - bb)
                    }
                };
                if better {
                    best = Some((cand - back, back, fwd));
                }
            }
        }

        match best {
            Some((base_start, back, fwd)) => {
                pending.truncate(pending.len() - back);
                if !pending.is_empty() {
                    ops.push(DeltaOp::Insert {
                        data: std::mem::take(&mut pending),
                    });
                }
                ops.push(DeltaOp::Copy {
                    offset: base_start,
                    len: back + fwd,
                });
                window_at += fwd;
                if target.len() - window_at >= window {
                    hash = block_hash(&target[window_at..window_at + window]);
                }
            }
            None => {
                // slide the window one byte; the byte it leaves behind
                // becomes pending insert data
                pending.push(target[window_at]);
                if window_at + window < target.len() {
                    let out = target[window_at] as u64 + 1;
                    let inn = target[window_at + window] as u64 + 1;
                    hash = hash
                        .wrapping_sub(out.wrapping_mul(pow))
                        .wrapping_mul(ROLL_BASE)
                        .wrapping_add(inn);
                }
                window_at += 1;
            }
        }
    }
    if !pending.is_empty() {
        ops.push(DeltaOp::Insert { data: pending });
    }
    let delta = BinDelta {
        base_len: base.len(),
        target_len: target.len(),
        ops: coalesce(Vec::new(), ops),
    };
    debug_assert!(delta.check().is_ok());
    delta
}

/// Reconstructs the target from `base` and `delta`.
pub fn apply(base: &[u8], delta: &BinDelta) -> Result<Vec<u8>> {
    if base.len() != delta.base_len {
        return Err(Error::BaseLengthMismatch {
            expected: delta.base_len,
            actual: base.len(),
        });
    }
    let mut out = Vec::with_capacity(delta.target_len);
    for op in &delta.ops {
        match op {
            DeltaOp::Copy { offset, len } => {
                if offset + len > base.len() {
                    return Err(Error::CopyOutOfRange {
                        offset: *offset,
                        len: *len,
                        base_len: base.len(),
                    });
                }
                out.extend_from_slice(&base[*offset..offset + len]);
            }
            DeltaOp::Insert { data } => out.extend_from_slice(data),
        }
    }
    if out.len() != delta.target_len {
        return Err(Error::MalformedDelta(format!(
            "reconstruction produced {} bytes, expected {}",
            out.len(),
            delta.target_len
        )));
    }
    Ok(out)
}

/// Combines `first` (A to B) and `second` (B to C) into a single A-to-C
/// delta by rewriting `second`'s copies through `first`'s op map. The
/// bytes of A are never touched; the result is equivalent to the two
/// deltas under `apply` but need not be the identical op list.
pub fn combine(first: &BinDelta, second: &BinDelta) -> Result<BinDelta> {
    if first.target_len != second.base_len {
        return Err(Error::ChainMismatch {
            first: first.target_len,
            second: second.base_len,
        });
    }
    // prefix sums of B offsets produced by first's ops
    let mut starts = Vec::with_capacity(first.ops.len());
    let mut at = 0usize;
    for op in &first.ops {
        starts.push(at);
        at += op.produced();
    }

    let mut ops = Vec::new();
    for op in &second.ops {
        match op {
            DeltaOp::Insert { data } => ops = coalesce(ops, vec![DeltaOp::Insert { data: data.clone() }]),
            DeltaOp::Copy { offset, len } => {
                // walk first's ops covering B range [offset, offset+len)
                let mut need_start = *offset;
                let need_end = offset + len;
                let mut i = starts.partition_point(|&s| s <= need_start) - 1;
                while need_start < need_end {
                    let op_start = starts[i];
                    let op_len = first.ops[i].produced();
                    let take_start = need_start - op_start;
                    let take_len = (need_end - op_start).min(op_len) - take_start;
                    let piece = match &first.ops[i] {
                        DeltaOp::Copy { offset: o, .. } => DeltaOp::Copy {
                            offset: o + take_start,
                            len: take_len,
                        },
                        DeltaOp::Insert { data } => DeltaOp::Insert {
                            data: data[take_start..take_start + take_len].to_vec(),
                        },
                    };
                    ops = coalesce(ops, vec![piece]);
                    need_start += take_len;
                    i += 1;
                }
            }
        }
    }
    let delta = BinDelta {
        base_len: first.base_len,
        target_len: second.target_len,
        ops,
    };
    delta.check()?;
    Ok(delta)
}

/// Appends ops, merging adjacent inserts and contiguous copies.
fn coalesce(mut ops: Vec<DeltaOp>, extra: Vec<DeltaOp>) -> Vec<DeltaOp> {
    for op in extra {
        match (ops.last_mut(), op) {
            (Some(DeltaOp::Insert { data: tail }), DeltaOp::Insert { data }) => {
                tail.extend_from_slice(&data)
            }
            (
                Some(DeltaOp::Copy { offset, len }),
                DeltaOp::Copy {
                    offset: o2,
                    len: l2,
                },
            ) if *offset + *len == o2 => *len += l2,
            (_, op) => ops.push(op),
        }
    }
    ops
}

// ---------------------------------------------------------------------
// wire format

/// Serialized form: varint base_len, varint target_len, then per op a
/// varint whose low bit tags the kind. Copy: `(len << 1) | 1` followed
/// by a varint offset; Insert: `len << 1` followed by the raw bytes.
pub fn encode(delta: &BinDelta) -> Vec<u8> {
    let mut out = Vec::new();
    put_varint(&mut out, delta.base_len as u64);
    put_varint(&mut out, delta.target_len as u64);
    for op in &delta.ops {
        match op {
            DeltaOp::Copy { offset, len } => {
                put_varint(&mut out, (*len as u64) << 1 | 1);
                put_varint(&mut out, *offset as u64);
            }
            DeltaOp::Insert { data } => {
                put_varint(&mut out, (data.len() as u64) << 1);
                out.extend_from_slice(data);
            }
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<BinDelta> {
    let mut rest = bytes;
    let base_len = get_varint(&mut rest)? as usize;
    let target_len = get_varint(&mut rest)? as usize;
    let mut ops = Vec::new();
    while !rest.is_empty() {
        let tag = get_varint(&mut rest)?;
        let len = (tag >> 1) as usize;
        if tag & 1 == 1 {
            let offset = get_varint(&mut rest)? as usize;
            ops.push(DeltaOp::Copy { offset, len });
        } else {
            if rest.len() < len {
                return Err(Error::MalformedDelta("truncated insert payload".into()));
            }
            ops.push(DeltaOp::Insert {
                data: rest[..len].to_vec(),
            });
            rest = &rest[len..];
        }
    }
    let delta = BinDelta {
        base_len,
        target_len,
        ops,
    };
    delta.check()?;
    Ok(delta)
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn get_varint(rest: &mut &[u8]) -> Result<u64> {
    let mut v = 0u64;
    let mut shift = 0u32;
    loop {
        let (&byte, tail) = rest
            .split_first()
            .ok_or_else(|| Error::MalformedDelta("truncated varint".into()))?;
        *rest = tail;
        if shift >= 64 {
            return Err(Error::MalformedDelta("varint overflow".into()));
        }
        v |= ((byte & 0x7f) as u64) << shift;
        if byte & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng_bytes(state: &mut u64, len: usize) -> Vec<u8> {
        (0..len)
            .map(|_| {
                *state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (*state >> 33) as u8
            })
            .collect()
    }

    #[test]
    fn identical_input_is_single_copy() {
        let base = b"0123456789abcdef0123456789abcdef".to_vec();
        let d = make(&base, &base, 16);
        assert_eq!(
            d.ops,
            vec![DeltaOp::Copy {
                offset: 0,
                len: base.len()
            }]
        );
        assert_eq!(apply(&base, &d).unwrap(), base);
    }

    #[test]
    fn empty_base_is_single_insert() {
        let target = b"anything at all".to_vec();
        let d = make(&[], &target, 16);
        assert_eq!(
            d.ops,
            vec![DeltaOp::Insert {
                data: target.clone()
            }]
        );
        assert_eq!(apply(&[], &d).unwrap(), target);
    }

    #[test]
    fn single_byte_change_stays_local() {
        let mut state = 99u64;
        let base = rng_bytes(&mut state, 4096);
        let mut target = base.clone();
        target[2048] ^= 0xff;
        let d = make(&base, &target, 16);
        assert_eq!(apply(&base, &d).unwrap(), target);
        assert!(
            d.insert_bytes() <= 2 * 16,
            "insert payload {} exceeds two windows",
            d.insert_bytes()
        );
    }

    #[test]
    fn window_longer_than_input_degenerates() {
        let d = make(b"ab", b"abc", 16);
        assert_eq!(
            d.ops,
            vec![DeltaOp::Insert {
                data: b"abc".to_vec()
            }]
        );
    }

    #[test]
    fn copy_out_of_range_rejected() {
        let d = BinDelta {
            base_len: 4,
            target_len: 8,
            ops: vec![DeltaOp::Copy { offset: 2, len: 6 }],
        };
        assert!(matches!(
            apply(b"abcd", &d),
            Err(Error::CopyOutOfRange { .. })
        ));
    }

    #[test]
    fn wrong_base_length_rejected() {
        let d = make(b"0123456789abcdef", b"0123456789abcdef!", 16);
        assert!(matches!(
            apply(b"0123", &d),
            Err(Error::BaseLengthMismatch { .. })
        ));
    }

    #[test]
    fn round_trips_random_edits() {
        let mut state = 7u64;
        for _ in 0..50 {
            let base_len = 1 + (state as usize % 20000);
            let base = rng_bytes(&mut state, base_len);
            let mut target = base.clone();
            // random splice
            let cut = target.len() / 3;
            let insert_len = state as usize % 400;
            let insert = rng_bytes(&mut state, insert_len);
            target.splice(cut..cut + cut / 2, insert);
            let d = make(&base, &target, 16);
            assert_eq!(apply(&base, &d).unwrap(), target);
        }
    }

    #[test]
    fn megabyte_blob_round_trips() {
        let mut state = 0x1813u64;
        let base = rng_bytes(&mut state, 1 << 20);
        let mut target = base.clone();
        target[1 << 19] = !target[1 << 19];
        target.extend_from_slice(b"suffix beyond a mebibyte");
        let d = make(&base, &target, 16);
        assert_eq!(apply(&base, &d).unwrap(), target);
        assert!(d.insert_bytes() < 1024);
    }

    #[test]
    fn periodic_data_still_round_trips() {
        let base: Vec<u8> = (0..8192).map(|i| (i % 4) as u8).collect();
        let mut target = base.clone();
        target.insert(4096, 77);
        let d = make(&base, &target, 16);
        assert_eq!(apply(&base, &d).unwrap(), target);
    }

    #[test]
    fn combine_with_identity_is_equivalent() {
        let mut state = 3u64;
        let a = rng_bytes(&mut state, 5000);
        let mut b = a.clone();
        b.truncate(4000);
        b.extend_from_slice(&rng_bytes(&mut state, 500));
        let identity = BinDelta {
            base_len: a.len(),
            target_len: a.len(),
            ops: vec![DeltaOp::Copy {
                offset: 0,
                len: a.len(),
            }],
        };
        let d = make(&a, &b, 16);
        let combined = combine(&identity, &d).unwrap();
        assert_eq!(apply(&a, &combined).unwrap(), b);
    }

    #[test]
    fn combine_association_agrees() {
        let mut state = 11u64;
        let a = rng_bytes(&mut state, 3000);
        let mut b = a.clone();
        b[1500] ^= 1;
        let mut c = b.clone();
        c.extend_from_slice(b"tail");
        let mut d_ = c.clone();
        d_.drain(100..200);

        let ab = make(&a, &b, 16);
        let bc = make(&b, &c, 16);
        let cd = make(&c, &d_, 16);
        let left = combine(&combine(&ab, &bc).unwrap(), &cd).unwrap();
        let right = combine(&ab, &combine(&bc, &cd).unwrap()).unwrap();
        assert_eq!(apply(&a, &left).unwrap(), d_);
        assert_eq!(apply(&a, &right).unwrap(), d_);
    }

    #[test]
    fn combine_rejects_length_mismatch() {
        let d1 = make(b"aaaa", b"bbbbb", 4);
        let d2 = make(b"cc", b"dd", 4);
        assert!(matches!(
            combine(&d1, &d2),
            Err(Error::ChainMismatch { .. })
        ));
    }

    #[test]
    fn wire_golden_vector() {
        let d = BinDelta {
            base_len: 4,
            target_len: 9,
            ops: vec![
                DeltaOp::Copy { offset: 0, len: 4 },
                DeltaOp::Insert {
                    data: b"hello".to_vec(),
                },
            ],
        };
        let wire = encode(&d);
        assert_eq!(wire, b"\x04\x09\x09\x00\x0ahello");
        assert_eq!(decode(&wire).unwrap(), d);
    }

    #[test]
    fn wire_golden_vector_long_lengths() {
        let d = BinDelta {
            base_len: 300,
            target_len: 300,
            ops: vec![DeltaOp::Copy {
                offset: 0,
                len: 300,
            }],
        };
        // 300 = 0xac 0x02 as LEB128; (300 << 1) | 1 = 601 = 0xd9 0x04
        assert_eq!(encode(&d), b"\xac\x02\xac\x02\xd9\x04\x00");
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(decode(b"\x04").is_err());
        assert!(decode(b"\x04\x09\x0a").is_err()); // truncated insert
        let bad_copy = b"\x04\x09\x13\x09"; // copy(len 9, offset 9) beyond base 4
        assert!(decode(bad_copy).is_err());
    }
}
