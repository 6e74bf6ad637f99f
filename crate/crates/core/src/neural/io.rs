//! Weight files.
//!
//! Layout (all little-endian):
//!
//! ```text
//! "MMVNN1\0"            7 bytes magic
//! kind                  u8   (1 = MLP, 2 = RNN)
//! count                 u32  number of matrices
//! per matrix:  rows u32, cols u32, rows*cols f64 values (row-major)
//! ```
//!
//! Matrices follow field order: MLP `w1 b1 w2 b2 w3 b3 w4 b4`, RNN
//! `w_ih w_hh w_ho b_h b_o`. Bias vectors are stored as `len x 1` matrices.

use std::path::Path;

use crate::error::{Error, Result};
use crate::neural::mlp::MlpParams;
use crate::neural::rnn::RnnParams;
use crate::numerics::Mat;

pub const WEIGHT_MAGIC: &[u8; 7] = b"MMVNN1\0";
pub const KIND_MLP: u8 = 1;
pub const KIND_RNN: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum Network {
    Mlp(MlpParams),
    Rnn(RnnParams),
}

impl Network {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Network::Mlp(_) => "mlp",
            Network::Rnn(_) => "rnn",
        }
    }

    /// `(name, rows, cols)` of every stored matrix, in file order.
    pub fn shapes(&self) -> Vec<(&'static str, usize, usize)> {
        match self {
            Network::Mlp(p) => vec![
                ("w1", p.w1.rows(), p.w1.cols()),
                ("b1", p.b1.len(), 1),
                ("w2", p.w2.rows(), p.w2.cols()),
                ("b2", p.b2.len(), 1),
                ("w3", p.w3.rows(), p.w3.cols()),
                ("b3", p.b3.len(), 1),
                ("w4", p.w4.rows(), p.w4.cols()),
                ("b4", p.b4.len(), 1),
            ],
            Network::Rnn(p) => vec![
                ("w_ih", p.w_ih.rows(), p.w_ih.cols()),
                ("w_hh", p.w_hh.rows(), p.w_hh.cols()),
                ("w_ho", p.w_ho.rows(), p.w_ho.cols()),
                ("b_h", p.b_h.len(), 1),
                ("b_o", p.b_o.len(), 1),
            ],
        }
    }
}

fn vector_mat(v: &[f64]) -> Mat {
    Mat::column_vector(v.to_vec())
}

pub fn encode_network(net: &Network) -> Vec<u8> {
    let (kind, mats): (u8, Vec<Mat>) = match net {
        Network::Mlp(p) => (
            KIND_MLP,
            vec![
                p.w1.clone(),
                vector_mat(&p.b1),
                p.w2.clone(),
                vector_mat(&p.b2),
                p.w3.clone(),
                vector_mat(&p.b3),
                p.w4.clone(),
                vector_mat(&p.b4),
            ],
        ),
        Network::Rnn(p) => (
            KIND_RNN,
            vec![
                p.w_ih.clone(),
                p.w_hh.clone(),
                p.w_ho.clone(),
                vector_mat(&p.b_h),
                vector_mat(&p.b_o),
            ],
        ),
    };
    let payload: usize = mats.iter().map(|m| 8 + 8 * m.as_slice().len()).sum();
    let mut out = Vec::with_capacity(12 + payload);
    out.extend_from_slice(WEIGHT_MAGIC);
    out.push(kind);
    out.extend_from_slice(&(mats.len() as u32).to_le_bytes());
    for m in &mats {
        out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
        for v in m.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Sequential little-endian reader that reports the offset of a short read.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated {
                offset: self.bytes.len(),
                what,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn u8(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    pub(crate) fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, what)?.try_into().expect("4 bytes"),
        ))
    }

    pub(crate) fn u64(&mut self, what: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8, what)?.try_into().expect("8 bytes"),
        ))
    }

    pub(crate) fn f64s(&mut self, count: usize, what: &'static str) -> Result<Vec<f64>> {
        let raw = self.take(count * 8, what)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    pub(crate) fn magic(&mut self, expected: &[u8; 7]) -> Result<()> {
        let found = self.take(7, "magic")?;
        if found != expected {
            return Err(Error::BadMagic {
                expected: String::from_utf8_lossy(expected).into_owned(),
                found: String::from_utf8_lossy(found).into_owned(),
            });
        }
        Ok(())
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Malformed(format!(
                "{} trailing bytes after offset {}",
                self.bytes.len() - self.pos,
                self.pos
            )));
        }
        Ok(())
    }
}

pub fn decode_network(bytes: &[u8]) -> Result<Network> {
    let mut r = Reader::new(bytes);
    r.magic(WEIGHT_MAGIC)?;
    let kind = r.u8("network kind")?;
    let expected_count = match kind {
        KIND_MLP => 8,
        KIND_RNN => 5,
        other => return Err(Error::Malformed(format!("unknown network kind {other}"))),
    };
    let count = r.u32("matrix count")? as usize;
    if count != expected_count {
        return Err(Error::Malformed(format!(
            "shape header lists {count} matrices, expected {expected_count}"
        )));
    }
    let mut mats = Vec::with_capacity(count);
    for _ in 0..count {
        let rows = r.u32("matrix rows")? as usize;
        let cols = r.u32("matrix cols")? as usize;
        let data = r.f64s(rows * cols, "matrix values")?;
        mats.push(Mat::from_vec(rows, cols, data)?);
    }
    r.finish()?;

    let vector = |m: Mat, name: &str| -> Result<Vec<f64>> {
        if m.cols() != 1 {
            return Err(Error::Malformed(format!(
                "bias {name} must be a column, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(m.into_vec())
    };
    let mut it = mats.into_iter();
    let mut next = || it.next().expect("count checked");
    let net = if kind == KIND_MLP {
        let p = MlpParams {
            w1: next(),
            b1: vector(next(), "b1")?,
            w2: next(),
            b2: vector(next(), "b2")?,
            w3: next(),
            b3: vector(next(), "b3")?,
            w4: next(),
            b4: vector(next(), "b4")?,
        };
        p.validate()?;
        Network::Mlp(p)
    } else {
        let p = RnnParams {
            w_ih: next(),
            w_hh: next(),
            w_ho: next(),
            b_h: vector(next(), "b_h")?,
            b_o: vector(next(), "b_o")?,
        };
        p.validate()?;
        Network::Rnn(p)
    };
    Ok(net)
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    std::fs::write(path, encode_network(net)).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: &Path) -> Result<Network> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_network(&bytes)
}

pub fn save_params_mlp(path: &Path, p: &MlpParams) -> Result<()> {
    save_network(path, &Network::Mlp(p.clone()))
}

pub fn save_params_rnn(path: &Path, p: &RnnParams) -> Result<()> {
    save_network(path, &Network::Rnn(p.clone()))
}

pub fn load_params_mlp(path: &Path) -> Result<MlpParams> {
    match load_network(path)? {
        Network::Mlp(p) => Ok(p),
        Network::Rnn(_) => Err(Error::Malformed(format!(
            "{} holds an RNN, expected an MLP",
            path.display()
        ))),
    }
}

pub fn load_params_rnn(path: &Path) -> Result<RnnParams> {
    match load_network(path)? {
        Network::Rnn(p) => Ok(p),
        Network::Mlp(_) => Err(Error::Malformed(format!(
            "{} holds an MLP, expected an RNN",
            path.display()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngState;

    #[test]
    fn wrong_magic_names_expected() {
        let mut bytes = encode_network(&Network::Rnn(RnnParams::zeros(2, 2, 2)));
        bytes[0] = b'X';
        match decode_network(&bytes) {
            Err(Error::BadMagic { expected, .. }) => assert_eq!(expected, "MMVNN1\0"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        let bytes = encode_network(&Network::Mlp(MlpParams::zeros(2, [1, 1, 1], 1)));
        assert_eq!(&bytes[..7], b"MMVNN1\0");
        assert_eq!(bytes[7], KIND_MLP);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 8);
        // w1 is 1x2
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 2);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_network(Path::new("/nonexistent/weights.bin")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn kind_mismatch_on_typed_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rnn.bin");
        let mut rng = RngState::new(2);
        save_params_rnn(&path, &RnnParams::init(3, 4, 5, &mut rng)).unwrap();
        assert!(load_params_mlp(&path).is_err());
        assert!(load_params_rnn(&path).is_ok());
    }
}
