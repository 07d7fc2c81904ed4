//! Signed fixed-point encoding into `Z_N`.
//!
//! A value `v` is encoded as `round(v · scale) mod N`. Residues in the upper
//! quarter of `Z_N` are negative; residues in the middle half mean the sum
//! wrapped and are rejected at decode time.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, ToPrimitive};

use super::{CryptoError, PublicKey, Result};
use crate::bigint::signed_mod;

/// Default fixed-point denominator.
pub const DEFAULT_FIXED_POINT_SCALE: u64 = 1_000_000;

/// Encoded magnitudes must stay below `N / HEADROOM_FACTOR`.
pub const HEADROOM_FACTOR: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodedPlaintext {
    raw: BigUint,
    scale: u64,
}

impl EncodedPlaintext {
    pub fn from_raw(raw: BigUint, scale: u64) -> Self {
        Self { raw, scale }
    }

    pub fn raw(&self) -> &BigUint {
        &self.raw
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }
}

impl PublicKey {
    fn headroom(&self) -> BigUint {
        self.modulus() / HEADROOM_FACTOR
    }

    /// Encodes `round(value · scale)`.
    pub fn encode(&self, value: f64, scale: u64) -> Result<EncodedPlaintext> {
        if !value.is_finite() {
            return Err(CryptoError::NonFinite);
        }
        let scaled = (value * scale as f64).round();
        // f64 -> i128 saturates; anything that large is far outside headroom
        // for keys below 2^126 anyway, and gets rejected below otherwise.
        if scaled.abs() >= 1.7e38 {
            return Err(CryptoError::Overflow);
        }
        self.encode_fixed(&BigInt::from(scaled as i128), scale)
    }

    /// Encodes an already scaled integer.
    pub fn encode_fixed(&self, fixed: &BigInt, scale: u64) -> Result<EncodedPlaintext> {
        assert!(scale > 0, "fixed-point scale must be positive");
        if fixed.magnitude() >= &self.headroom() {
            return Err(CryptoError::Overflow);
        }
        Ok(EncodedPlaintext {
            raw: signed_mod(fixed, self.modulus()),
            scale,
        })
    }

    /// Recovers the signed scaled integer.
    pub fn decode_fixed(&self, pt: &EncodedPlaintext) -> Result<BigInt> {
        let n = self.modulus();
        if &pt.raw >= n {
            return Err(CryptoError::InvalidPlaintext);
        }
        let headroom = self.headroom();
        if pt.raw < headroom {
            return Ok(BigInt::from_biguint(Sign::Plus, pt.raw.clone()));
        }
        let negative = n - &pt.raw;
        if negative < headroom {
            return Ok(-BigInt::from_biguint(Sign::Plus, negative));
        }
        Err(CryptoError::Wrap)
    }

    /// Signed scaled integer as `i128`.
    pub fn decode_i128(&self, pt: &EncodedPlaintext) -> Result<i128> {
        self.decode_fixed(pt)?
            .to_i128()
            .ok_or(CryptoError::Overflow)
    }

    /// Real value `fixed / scale`.
    pub fn decode(&self, pt: &EncodedPlaintext) -> Result<f64> {
        let fixed = self.decode_fixed(pt)?;
        let magnitude = fixed.abs().to_f64().ok_or(CryptoError::Overflow)?;
        let signed = if fixed.is_negative() {
            -magnitude
        } else {
            magnitude
        };
        Ok(signed / pt.scale as f64)
    }

    /// Adds encoded plaintexts modulo `N` (the plaintext image of
    /// ciphertext addition).
    pub fn add_plaintexts(&self, a: &EncodedPlaintext, b: &EncodedPlaintext) -> EncodedPlaintext {
        debug_assert_eq!(a.scale, b.scale);
        EncodedPlaintext {
            raw: (&a.raw + &b.raw) % self.modulus(),
            scale: a.scale,
        }
    }
}
