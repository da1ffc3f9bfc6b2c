//! Binary checkpoint format.
//!
//! ```text
//! "CVEC" | version u32 | v h n i o (u32 each) | E W1 b1 W2 b2 (f64) | crc32
//! ```
//!
//! Integers and floats are little-endian; matrices are row-major. The CRC-32
//! covers every byte before it, magic included.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{EmbeddingModel, ModelConfig, ParamSet, TENSOR_NAMES};

pub const MAGIC: &[u8; 4] = b"CVEC";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode(model: &EmbeddingModel) -> Vec<u8> {
    let c = model.config();
    let params = model.params();
    let floats: usize = params.tensors().iter().map(|t| t.len()).sum();
    let mut out = Vec::with_capacity(4 + 4 * 6 + 8 * floats + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for dim in [c.vocab, c.embed_dim, c.per_side, c.hidden, c.outcomes] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for tensor in params.tensors() {
        for x in tensor {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn save_checkpoint(model: &EmbeddingModel, mut sink: impl Write) -> Result<()> {
    sink.write_all(&encode(model))?;
    sink.flush()?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&end| end <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated while reading {what}")))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Checkpoint("tensor too large".into()))?, what)?;
        Ok(raw
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }
}

pub fn decode(bytes: &[u8]) -> Result<EmbeddingModel> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(Error::Checkpoint("missing CVEC magic".into()));
    }
    let mut cur = Cursor { bytes, pos: 4 };
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let mut dims = [0usize; 5];
    for (d, name) in dims.iter_mut().zip(["v", "h", "n", "i", "o"]) {
        *d = cur.u32(name)? as usize;
    }
    let config = ModelConfig {
        vocab: dims[0],
        embed_dim: dims[1],
        per_side: dims[2],
        hidden: dims[3],
        outcomes: dims[4],
    };
    config
        .validate()
        .map_err(|e| Error::Checkpoint(format!("bad dimensions: {e}")))?;

    let expected = ParamSet::zeros(&config);
    let mut tensors = Vec::with_capacity(5);
    for (t, name) in expected.tensors().iter().zip(TENSOR_NAMES) {
        tensors.push(cur.f64s(t.len(), name)?);
    }
    let body_end = cur.pos;
    let stored = cur.u32("crc")?;
    if cur.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes; dimensions do not match the payload",
            bytes.len() - cur.pos
        )));
    }
    let actual = crc32fast::hash(&bytes[..body_end]);
    if stored != actual {
        return Err(Error::Checkpoint(format!("crc mismatch: stored {stored:08x}, computed {actual:08x}")));
    }
    let mut it = tensors.into_iter();
    let params = ParamSet {
        embeddings: it.next().unwrap(),
        w1: it.next().unwrap(),
        b1: it.next().unwrap(),
        w2: it.next().unwrap(),
        b2: it.next().unwrap(),
    };
    EmbeddingModel::from_params(config, params).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn load_checkpoint(mut source: impl Read) -> Result<EmbeddingModel> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode(&bytes)
}
