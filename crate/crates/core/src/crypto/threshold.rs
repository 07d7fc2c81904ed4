//! k-of-n threshold decryption.
//!
//! The dealer shares `d = lambda · (lambda⁻¹ mod N)` with a random degree
//! `k - 1` polynomial over `Z_{N·lambda}`. Party `i` publishes
//! `c^(Δ·f(i))` with `Δ = n!`; any `k` of these combine through integer
//! Lagrange coefficients `Δ·λ_i` into `c^(Δ²·d) = 1 + Δ²·m·N (mod N²)`.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{Ciphertext, CryptoError, EncodedPlaintext, PublicKey, Result, SecretKey};
use crate::bigint::{hex_biguint, mod_inverse, random_below};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyShare {
    pub index: u32,
    #[serde(with = "hex_biguint")]
    pub share_value: BigUint,
    pub threshold_k: u32,
    pub party_count_n: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialDecryption {
    pub index: u32,
    #[serde(with = "hex_biguint")]
    pub value: BigUint,
}

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn check_threshold(k: u32, n: u32) -> Result<()> {
    if k == 0 || k > n {
        return Err(CryptoError::InvalidThreshold { k, n });
    }
    Ok(())
}

impl SecretKey {
    /// Splits the decryption exponent into `n` shares, any `k` of which
    /// suffice to decrypt.
    pub fn share<R: RngCore + ?Sized>(&self, k: u32, n: u32, rng: &mut R) -> Result<Vec<KeyShare>> {
        check_threshold(k, n)?;
        let ring = self.sharing_modulus();
        let mut coefficients = Vec::with_capacity(k as usize);
        coefficients.push(self.sharing_exponent() % &ring);
        for _ in 1..k {
            coefficients.push(random_below(rng, &ring));
        }
        let shares = (1..=n)
            .map(|index| {
                // Horner evaluation at x = index
                let x = BigUint::from(index);
                let value = coefficients
                    .iter()
                    .rev()
                    .fold(BigUint::zero(), |acc, c| (acc * &x + c) % &ring);
                KeyShare {
                    index,
                    share_value: value,
                    threshold_k: k,
                    party_count_n: n,
                }
            })
            .collect();
        Ok(shares)
    }
}

impl KeyShare {
    /// `c^(Δ · share) mod N²`.
    pub fn partial_decrypt(&self, pk: &PublicKey, c: &Ciphertext) -> Result<PartialDecryption> {
        pk.check(c)?;
        let exponent = factorial(self.party_count_n) * &self.share_value;
        Ok(PartialDecryption {
            index: self.index,
            value: c.value().modpow(&exponent, pk.modulus_squared()),
        })
    }
}

/// `Δ · Π_{j≠i} j / (j - i)` for every `i` in `indices`; always an integer.
fn scaled_lagrange_at_zero(indices: &[u32], n: u32) -> Vec<BigInt> {
    let delta = BigInt::from_biguint(Sign::Plus, factorial(n));
    indices
        .iter()
        .map(|&i| {
            let mut num = delta.clone();
            let mut den = BigInt::one();
            for &j in indices.iter().filter(|&&j| j != i) {
                num *= BigInt::from(j);
                den *= BigInt::from(j) - BigInt::from(i);
            }
            let (q, r) = num.div_rem(&den);
            debug_assert!(r.is_zero(), "n! must clear Lagrange denominators");
            q
        })
        .collect()
}

fn validate_indices(indices: &[u32], k: u32, n: u32) -> Result<()> {
    check_threshold(k, n)?;
    let mut seen = BTreeSet::new();
    for &index in indices {
        if index == 0 || index > n {
            return Err(CryptoError::InvalidShareIndex { index, n });
        }
        if !seen.insert(index) {
            return Err(CryptoError::DuplicateIndex(index));
        }
    }
    if indices.len() < k as usize {
        return Err(CryptoError::InsufficientShares {
            have: indices.len(),
            need: k as usize,
        });
    }
    Ok(())
}

/// Combines partial decryptions from at least `k` distinct parties.
pub fn combine(
    pk: &PublicKey,
    parts: &[PartialDecryption],
    k: u32,
    n: u32,
    scale: u64,
) -> Result<EncodedPlaintext> {
    let indices: Vec<u32> = parts.iter().map(|p| p.index).collect();
    validate_indices(&indices, k, n)?;
    let n_sq = pk.modulus_squared();
    let coefficients = scaled_lagrange_at_zero(&indices, n);
    let mut acc = BigUint::one();
    for (part, coef) in parts.iter().zip(&coefficients) {
        let base = if coef.is_negative() {
            mod_inverse(&part.value, n_sq).ok_or(CryptoError::InvalidCiphertext)?
        } else {
            part.value.clone()
        };
        acc = (acc * base.modpow(coef.magnitude(), n_sq)) % n_sq;
    }
    let delta = factorial(n);
    let delta_sq_inv =
        mod_inverse(&(&delta * &delta), pk.modulus()).ok_or(CryptoError::InvalidCiphertext)?;
    let m = (pk.l_function(&acc) * delta_sq_inv) % pk.modulus();
    Ok(EncodedPlaintext::from_raw(m, scale))
}

/// Dealer-side audit: Lagrange reconstruction at zero over the share ring.
/// Returns `n! · d mod N·lambda` (n! is not invertible in that ring).
pub fn reconstruct_exponent(sk: &SecretKey, shares: &[KeyShare]) -> Result<BigUint> {
    let first = shares
        .first()
        .ok_or(CryptoError::InsufficientShares { have: 0, need: 1 })?;
    let (k, n) = (first.threshold_k, first.party_count_n);
    if shares
        .iter()
        .any(|s| s.threshold_k != k || s.party_count_n != n)
    {
        return Err(CryptoError::KeyMismatch);
    }
    let indices: Vec<u32> = shares.iter().map(|s| s.index).collect();
    validate_indices(&indices, k, n)?;
    let ring = BigInt::from_biguint(Sign::Plus, sk.sharing_modulus());
    let coefficients = scaled_lagrange_at_zero(&indices, n);
    let total: BigInt = shares
        .iter()
        .zip(&coefficients)
        .map(|(s, c)| c * BigInt::from_biguint(Sign::Plus, s.share_value.clone()))
        .sum();
    Ok(total
        .mod_floor(&ring)
        .to_biguint()
        .expect("non-negative after mod_floor"))
}
