//! Binary form of range proofs and commitments.
//!
//! ```text
//! range proof := tag:u8 (0x52) bound:u64 width:u16 side side
//! side        := cb:int bit{width}
//! bit         := C:int t0:int t1:int c0:int z0:int z1:int
//! int         := len:u16 magnitude:[u8; len]   (little-endian, canonical)
//! commitment  := tag:u8 (0x43) int
//! ```

use super::{BitProof, CommitError, Commitment, RangeDecomposition, RangeProof, Result};
use crate::codec::{CodecError, Reader, Writer};

pub(crate) const RANGE_PROOF_TAG: u8 = 0x52;
pub(crate) const COMMITMENT_TAG: u8 = 0x43;

impl From<CodecError> for CommitError {
    fn from(e: CodecError) -> Self {
        CommitError::Malformed(e.0)
    }
}

impl RangeProof {
    pub fn write_to(&self, w: &mut Writer) {
        w.u8(RANGE_PROOF_TAG).u64(self.bound).u16(self.width);
        for side in [&self.value_side, &self.complement_side] {
            w.int(&side.consistency_blinding);
            for b in &side.bits {
                w.int(&b.commitment)
                    .int(&b.t0)
                    .int(&b.t1)
                    .int(&b.c0)
                    .int(&b.z0)
                    .int(&b.z1);
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write_to(&mut w);
        w.into_bytes()
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        if r.u8()? != RANGE_PROOF_TAG {
            return Err(CommitError::Malformed("not a range proof".into()));
        }
        let bound = r.u64()?;
        let width = r.u16()?;
        if width == 0 || width > 64 {
            return Err(CommitError::Malformed(format!("width {width}")));
        }
        let read_side = |r: &mut Reader<'_>| -> Result<RangeDecomposition> {
            let consistency_blinding = r.int()?;
            let bits = (0..width)
                .map(|_| {
                    Ok(BitProof {
                        commitment: r.int()?,
                        t0: r.int()?,
                        t1: r.int()?,
                        c0: r.int()?,
                        z0: r.int()?,
                        z1: r.int()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RangeDecomposition {
                consistency_blinding,
                bits,
            })
        };
        let value_side = read_side(r)?;
        let complement_side = read_side(r)?;
        Ok(Self {
            bound,
            width,
            value_side,
            complement_side,
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let proof = Self::read_from(&mut r)?;
        r.finish()?;
        Ok(proof)
    }
}

impl Commitment {
    pub fn write_to(&self, w: &mut Writer) {
        w.u8(COMMITMENT_TAG).int(&self.value);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write_to(&mut w);
        w.into_bytes()
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        if r.u8()? != COMMITMENT_TAG {
            return Err(CommitError::Malformed("not a commitment".into()));
        }
        Ok(Commitment::from_value(r.int()?))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let c = Self::read_from(&mut r)?;
        r.finish()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commit::{prove_range, verify_range_bytes, CommitmentKey};
    use crate::rng;
    use rand::Rng;

    #[test]
    fn proof_bytes_round_trip_and_layout() {
        let ck = CommitmentKey::rfc2409_group2();
        let mut r = rng::stream(1, "wire", 0);
        let blinding = ck.random_scalar(&mut r);
        let proof = prove_range(&ck, 6, &blinding, 13, &mut r).unwrap();
        let bytes = proof.to_bytes();
        assert_eq!(bytes[0], RANGE_PROOF_TAG);
        assert_eq!(u64::from_le_bytes(bytes[1..9].try_into().unwrap()), 13);
        assert_eq!(u16::from_le_bytes(bytes[9..11].try_into().unwrap()), 4);
        assert_eq!(RangeProof::from_bytes(&bytes).unwrap(), proof);
        let com = ck.commit_u64(6, &blinding).unwrap();
        assert_eq!(Commitment::from_bytes(&com.to_bytes()).unwrap(), com);
        verify_range_bytes(&ck, &com, &bytes, 13).unwrap();

        let mut extended = bytes.clone();
        extended.push(0);
        assert!(matches!(
            verify_range_bytes(&ck, &com, &extended, 13),
            Err(CommitError::Malformed(_))
        ));
        assert!(verify_range_bytes(&ck, &com, &bytes[..bytes.len() - 1], 13).is_err());
    }

    /// Flipping any single bit of a valid proof must never yield an
    /// accepting proof.
    #[test]
    fn single_bit_flips_never_verify() {
        let ck = CommitmentKey::rfc2409_group2();
        let mut r = rng::stream(2, "wire", 0);
        let blinding = ck.random_scalar(&mut r);
        let com = ck.commit_u64(9, &blinding).unwrap();
        let bytes = prove_range(&ck, 9, &blinding, 20, &mut r)
            .unwrap()
            .to_bytes();
        verify_range_bytes(&ck, &com, &bytes, 20).unwrap();
        for _ in 0..500 {
            let pos = r.random_range(0..bytes.len() * 8);
            let mut flipped = bytes.clone();
            flipped[pos / 8] ^= 1 << (pos % 8);
            assert!(
                verify_range_bytes(&ck, &com, &flipped, 20).is_err(),
                "bit {pos} flip accepted"
            );
        }
    }
}
