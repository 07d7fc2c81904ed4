//! Little-endian, length-prefixed binary encoding shared by proofs and
//! protocol messages.
//!
//! Integers are a `u16` byte length followed by the magnitude in
//! little-endian order, with no trailing zero bytes (zero has length 0).

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct CodecError(pub String);

#[derive(Default, Debug, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u16(&mut self, v: u16) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn bytes(&mut self, v: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(v);
        self
    }

    pub fn int(&mut self, v: &BigUint) -> &mut Self {
        let bytes = if v.bits() == 0 {
            Vec::new()
        } else {
            v.to_bytes_le()
        };
        let len = u16::try_from(bytes.len()).expect("integer wider than 65535 bytes");
        self.u16(len);
        self.buf.extend_from_slice(&bytes);
        self
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

/// Size in bytes of `v` under [`Writer::int`].
pub fn int_len(v: &BigUint) -> usize {
    2 + (v.bits() as usize).div_ceil(8)
}

pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| CodecError(format!("truncated at byte {}", self.pos)))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        self.take(n)
    }

    pub fn int(&mut self) -> Result<BigUint, CodecError> {
        let len = self.u16()? as usize;
        let bytes = self.take(len)?;
        if bytes.last() == Some(&0) {
            return Err(CodecError(format!(
                "non-canonical integer ending at byte {}",
                self.pos
            )));
        }
        Ok(BigUint::from_bytes_le(bytes))
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    /// Fails if any input is left unread.
    pub fn finish(&self) -> Result<(), CodecError> {
        if self.remaining() != 0 {
            return Err(CodecError(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_round_trip_canonically() {
        let values = [
            BigUint::from(0u32),
            BigUint::from(1u32),
            BigUint::from(256u32),
            BigUint::from(u128::MAX),
        ];
        let mut w = Writer::new();
        for v in &values {
            w.int(v);
        }
        w.u64(7).u8(3);
        let expected_len: usize = values.iter().map(int_len).sum::<usize>() + 9;
        assert_eq!(w.len(), expected_len);
        let bytes = w.into_bytes();
        assert_eq!(&bytes[..2], &[0, 0]);
        let mut r = Reader::new(&bytes);
        for v in &values {
            assert_eq!(&r.int().unwrap(), v);
        }
        assert_eq!(r.u64().unwrap(), 7);
        assert_eq!(r.u8().unwrap(), 3);
        r.finish().unwrap();
    }

    #[test]
    fn rejects_padding_truncation_and_trailing_bytes() {
        assert!(Reader::new(&[1, 0, 0]).int().is_err());
        assert!(Reader::new(&[2, 0, 5]).int().is_err());
        let mut r = Reader::new(&[0, 0, 9]);
        r.int().unwrap();
        assert!(r.finish().is_err());
    }
}
