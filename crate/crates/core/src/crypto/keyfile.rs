//! JSON key files. Integers are base-16 strings.
//!
//! ```json
//! {
//!   "key_bits": 512,
//!   "modulus": "c0ffee…",
//!   "generator": "c0ffef…",
//!   "lambda": "…",
//!   "mu": "…",
//!   "threshold_k": 2,
//!   "party_count_n": 3,
//!   "shares": [{ "index": 1, "share_value": "…", "threshold_k": 2, "party_count_n": 3 }]
//! }
//! ```

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{keygen, CryptoError, KeyShare, PublicKey, Result, SecretKey};
use crate::bigint::hex_biguint;
use crate::rng;

/// Public key, secret key and the k-of-n shares of the decryption exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyMaterial {
    pub public: PublicKey,
    pub secret: SecretKey,
    pub threshold_k: u32,
    pub party_count_n: u32,
    pub shares: Vec<KeyShare>,
}

#[derive(Serialize, Deserialize)]
struct KeyFile {
    key_bits: u32,
    #[serde(with = "hex_biguint")]
    modulus: BigUint,
    #[serde(with = "hex_biguint")]
    generator: BigUint,
    #[serde(with = "hex_biguint")]
    lambda: BigUint,
    #[serde(with = "hex_biguint")]
    mu: BigUint,
    threshold_k: u32,
    party_count_n: u32,
    shares: Vec<KeyShare>,
}

impl KeyMaterial {
    /// Key pair plus shares, all derived from `seed`.
    pub fn generate(key_bits: u32, k: u32, n: u32, seed: u64) -> Result<Self> {
        let (public, secret) = keygen(key_bits, &mut rng::stream(seed, "paillier-keygen", 0))?;
        let shares = secret.share(k, n, &mut rng::stream(seed, "key-shares", 0))?;
        Ok(Self {
            public,
            secret,
            threshold_k: k,
            party_count_n: n,
            shares,
        })
    }

    /// Same key pair, fresh k-of-n shares drawn from `seed`.
    pub fn reshare(&self, k: u32, n: u32, seed: u64) -> Result<Self> {
        let shares = self
            .secret
            .share(k, n, &mut rng::stream(seed, "key-shares", 0))?;
        Ok(Self {
            public: self.public.clone(),
            secret: self.secret.clone(),
            threshold_k: k,
            party_count_n: n,
            shares,
        })
    }

    pub fn to_json(&self) -> String {
        let file = KeyFile {
            key_bits: self.public.key_bits(),
            modulus: self.public.modulus().clone(),
            generator: self.public.generator().clone(),
            lambda: self.secret.lambda().clone(),
            mu: self.secret.mu().clone(),
            threshold_k: self.threshold_k,
            party_count_n: self.party_count_n,
            shares: self.shares.clone(),
        };
        serde_json::to_string_pretty(&file).expect("key file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: KeyFile =
            serde_json::from_str(text).map_err(|e| CryptoError::Malformed(e.to_string()))?;
        let public = PublicKey::from_modulus(file.modulus, file.key_bits);
        if public.generator() != &file.generator {
            return Err(CryptoError::Malformed(
                "generator must equal modulus + 1".into(),
            ));
        }
        let secret = SecretKey::from_parts(public.clone(), file.lambda, file.mu)?;
        if file
            .shares
            .iter()
            .any(|s| s.threshold_k != file.threshold_k || s.party_count_n != file.party_count_n)
        {
            return Err(CryptoError::Malformed("share parameters disagree".into()));
        }
        Ok(Self {
            public,
            secret,
            threshold_k: file.threshold_k,
            party_count_n: file.party_count_n,
            shares: file.shares,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_uses_documented_fields() {
        let km = KeyMaterial::generate(256, 2, 3, 5).unwrap();
        let text = km.to_json();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for field in ["modulus", "lambda", "mu", "shares"] {
            assert!(value.get(field).is_some(), "missing {field}");
        }
        assert_eq!(value["shares"].as_array().unwrap().len(), 3);
        assert_eq!(KeyMaterial::from_json(&text).unwrap(), km);
    }

    #[test]
    fn rejects_tampered_secret() {
        let km = KeyMaterial::generate(256, 1, 1, 6).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&km.to_json()).unwrap();
        value["mu"] = serde_json::Value::String("3".into());
        assert!(matches!(
            KeyMaterial::from_json(&value.to_string()),
            Err(CryptoError::Malformed(_))
        ));
    }
}
