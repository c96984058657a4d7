//! `.fwv` weight files: a little-endian `u32` count followed by that many
//! little-endian `f64` values in canonical layout.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::model::ParamVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn encode<S: Scalar>(v: &ParamVector<S>) -> Result<Vec<u8>> {
    let n = u32::try_from(v.len())
        .map_err(|_| Error::structural("parameter vector too long for .fwv"))?;
    let mut out = Vec::with_capacity(4 + 8 * v.len());
    out.extend_from_slice(&n.to_le_bytes());
    for x in v.as_slice() {
        out.extend_from_slice(&x.to_f64_lossy().to_le_bytes());
    }
    Ok(out)
}

pub fn decode<S: Scalar>(bytes: &[u8]) -> Result<ParamVector<S>> {
    if bytes.len() < 4 {
        return Err(Error::structural("truncated .fwv header"));
    }
    let n = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    let body = &bytes[4..];
    if body.len() != 8 * n {
        return Err(Error::structural(format!(
            ".fwv declares {} values but carries {} bytes",
            n,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| S::of(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect();
    Ok(ParamVector(values))
}

pub fn write<S: Scalar>(path: &Path, v: &ParamVector<S>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode(v)?).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read<S: Scalar>(path: &Path) -> Result<ParamVector<S>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_length_prefixed_le() {
        let bytes = encode(&ParamVector(vec![1.0_f64, -2.5])).unwrap();
        assert_eq!(&bytes[..4], &[2, 0, 0, 0]);
        assert_eq!(&bytes[4..12], &1.0_f64.to_le_bytes());
        assert_eq!(&bytes[12..], &(-2.5_f64).to_le_bytes());
    }

    #[test]
    fn truncated_body_rejected() {
        let mut bytes = encode(&ParamVector(vec![1.0_f64, 2.0])).unwrap();
        bytes.pop();
        assert!(decode::<f64>(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..64)) {
            let v = ParamVector(values);
            let back: ParamVector<f64> = decode(&encode(&v).unwrap()).unwrap();
            prop_assert_eq!(back.0.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                            v.0.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
    }
}
