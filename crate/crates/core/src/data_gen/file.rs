//! Dataset files.
//!
//! Layout (all little-endian):
//!
//! ```text
//! "MMVDS1\0"                       7 bytes magic
//! kind                             u8  (1 = block pairs, 2 = residual sequences)
//! m, n, K, k                       u32 each
//! count                            u64 pairs (kind 1) or sequences (kind 2)
//! kind 1, per pair:                m*K input values, then n*K target values
//! kind 2, per sequence:            K inputs of m values, then K targets of n values
//! ```

use std::path::Path;

use crate::data_gen::{BlockPairSet, DatasetMeta, ResidualPairSet};
use crate::error::{Error, Result};
use crate::neural::{Reader, SequencePair, TrainingPair};

pub const DATASET_MAGIC: &[u8; 7] = b"MMVDS1\0";
pub const KIND_BLOCK: u8 = 1;
pub const KIND_RESIDUAL: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Block(BlockPairSet),
    Residual(ResidualPairSet),
}

impl Dataset {
    pub fn meta(&self) -> &DatasetMeta {
        match self {
            Dataset::Block(s) => &s.meta,
            Dataset::Residual(s) => &s.meta,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Block(s) => s.pairs.len(),
            Dataset::Residual(s) => s.sequences.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn header(out: &mut Vec<u8>, kind: u8, meta: &DatasetMeta, count: usize) {
    out.extend_from_slice(DATASET_MAGIC);
    out.push(kind);
    for v in [meta.m, meta.n, meta.num_vectors, meta.sparsity] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&(count as u64).to_le_bytes());
}

fn put(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_dataset(data: &Dataset) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match data {
        Dataset::Block(set) => {
            let meta = &set.meta;
            header(&mut out, KIND_BLOCK, meta, set.pairs.len());
            for p in &set.pairs {
                if p.input.len() != meta.m * meta.num_vectors
                    || p.target.len() != meta.n * meta.num_vectors
                {
                    return Err(Error::Malformed(
                        "block pair length disagrees with header".into(),
                    ));
                }
                put(&mut out, &p.input);
                put(&mut out, &p.target);
            }
        }
        Dataset::Residual(set) => {
            let meta = &set.meta;
            header(&mut out, KIND_RESIDUAL, meta, set.sequences.len());
            for s in &set.sequences {
                let ok = s.inputs.len() == meta.num_vectors
                    && s.targets.len() == meta.num_vectors
                    && s.inputs.iter().all(|x| x.len() == meta.m)
                    && s.targets.iter().all(|t| t.len() == meta.n);
                if !ok {
                    return Err(Error::Malformed(
                        "sequence shape disagrees with header".into(),
                    ));
                }
                for x in &s.inputs {
                    put(&mut out, x);
                }
                for t in &s.targets {
                    put(&mut out, t);
                }
            }
        }
    }
    Ok(out)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader::new(bytes);
    r.magic(DATASET_MAGIC)?;
    let kind = r.u8("dataset kind")?;
    let m = r.u32("m")? as usize;
    let n = r.u32("n")? as usize;
    let num_vectors = r.u32("K")? as usize;
    let sparsity = r.u32("k")? as usize;
    let count = r.u64("pair count")? as usize;
    let meta = DatasetMeta {
        m,
        n,
        num_vectors,
        sparsity,
        seed: 0,
    };
    let per_item = (m + n) * num_vectors * 8;
    if per_item > 0 && count > bytes.len() / per_item {
        return Err(Error::Truncated {
            offset: bytes.len(),
            what: "dataset body",
        });
    }
    let data = match kind {
        KIND_BLOCK => {
            let mut pairs = Vec::with_capacity(count);
            for _ in 0..count {
                let input = r.f64s(m * num_vectors, "pair input")?;
                let target = r.f64s(n * num_vectors, "pair target")?;
                pairs.push(TrainingPair { input, target });
            }
            Dataset::Block(BlockPairSet {
                meta,
                pairs,
                origins: Vec::new(),
            })
        }
        KIND_RESIDUAL => {
            let mut sequences = Vec::with_capacity(count);
            for _ in 0..count {
                let inputs = (0..num_vectors)
                    .map(|_| r.f64s(m, "sequence input"))
                    .collect::<Result<Vec<_>>>()?;
                let targets = (0..num_vectors)
                    .map(|_| r.f64s(n, "sequence target"))
                    .collect::<Result<Vec<_>>>()?;
                sequences.push(SequencePair { inputs, targets });
            }
            Dataset::Residual(ResidualPairSet {
                meta,
                sequences,
                origins: Vec::new(),
            })
        }
        other => return Err(Error::Malformed(format!("unknown dataset kind {other}"))),
    };
    r.finish()?;
    Ok(data)
}

pub fn save_dataset(path: &Path, data: &Dataset) -> Result<()> {
    std::fs::write(path, encode_dataset(data)?).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dataset(&bytes)
}
