use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Width of an object id in bytes. Ids render as 40 lowercase hex digits.
pub const ID_LEN: usize = 20;

/// Content hash of a serialized object; the universal reference.
///
/// Equal serialized bytes of the same kind always produce equal ids, and
/// any single-byte change produces a different id (up to hash collisions).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId([u8; ID_LEN]);

impl ObjectId {
    pub fn from_bytes(bytes: [u8; ID_LEN]) -> Self {
        ObjectId(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; ID_LEN] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(ID_LEN * 2);
        for b in &self.0 {
            s.push(hex_digit(b >> 4));
            s.push(hex_digit(b & 0xf));
        }
        s
    }

    /// First `n` hex digits, the conventional abbreviated form.
    pub fn short(&self, n: usize) -> String {
        let mut s = self.to_hex();
        s.truncate(n);
        s
    }

    pub fn from_hex(hex: &str) -> Result<Self> {
        if hex.len() != ID_LEN * 2 {
            return Err(Error::BadPrefix(hex.to_string()));
        }
        let mut bytes = [0u8; ID_LEN];
        for (i, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let hi = hex_val(chunk[0]).ok_or_else(|| Error::BadPrefix(hex.to_string()))?;
            let lo = hex_val(chunk[1]).ok_or_else(|| Error::BadPrefix(hex.to_string()))?;
            bytes[i] = hi << 4 | lo;
        }
        Ok(ObjectId(bytes))
    }
}

fn hex_digit(v: u8) -> char {
    char::from_digit(v as u32, 16).unwrap()
}

fn hex_val(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'a'..=b'f' => Some(c - b'a' + 10),
        _ => None,
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObjectId({})", self.short(12))
    }
}

impl FromStr for ObjectId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectId::from_hex(s)
    }
}

/// Digest function used for object ids. Fixed per repository and recorded
/// in its config so the format can evolve without changing the object
/// model. The sole algorithm today is SHA-256 truncated to 160 bits.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum HashAlgo {
    #[default]
    Sha256T160,
}

impl HashAlgo {
    pub fn name(&self) -> &'static str {
        match self {
            HashAlgo::Sha256T160 => "sha256-160",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sha256-160" => Ok(HashAlgo::Sha256T160),
            other => Err(Error::Config(format!("unknown hash algorithm {other:?}"))),
        }
    }

    /// Digest of a byte stream given as chunks.
    pub fn digest_parts(&self, parts: &[&[u8]]) -> ObjectId {
        match self {
            HashAlgo::Sha256T160 => {
                let mut h = Sha256::new();
                for p in parts {
                    h.update(p);
                }
                let out = h.finalize();
                let mut bytes = [0u8; ID_LEN];
                bytes.copy_from_slice(&out[..ID_LEN]);
                ObjectId::from_bytes(bytes)
            }
        }
    }
}
