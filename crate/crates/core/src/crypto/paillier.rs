use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CryptoError, EncodedPlaintext, Result};
use crate::bigint::{hex_biguint, mod_inverse, random_prime, random_unit};
use crate::rng;

/// Smallest accepted modulus size.
pub const MIN_KEY_BITS: u32 = 256;

/// Paillier public key. All ciphertext arithmetic happens modulo `modulus²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    modulus: BigUint,
    modulus_sq: BigUint,
    generator: BigUint,
    key_bits: u32,
    fingerprint: u64,
}

impl PublicKey {
    pub(crate) fn from_modulus(modulus: BigUint, key_bits: u32) -> Self {
        let modulus_sq = &modulus * &modulus;
        let generator = &modulus + 1u32;
        let digest = Sha256::digest(modulus.to_bytes_le());
        let fingerprint = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        Self {
            modulus,
            modulus_sq,
            generator,
            key_bits,
            fingerprint,
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn modulus_squared(&self) -> &BigUint {
        &self.modulus_sq
    }

    pub fn generator(&self) -> &BigUint {
        &self.generator
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    /// Short identifier of the modulus, carried by every ciphertext.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Byte length of a serialized ciphertext value (size of `N²`).
    pub fn ciphertext_bytes(&self) -> usize {
        self.modulus_sq.bits().div_ceil(8) as usize
    }

    /// `g^m · r^N mod N²` for fresh random `r`, with `g^m = 1 + m·N`.
    pub fn encrypt<R: RngCore + ?Sized>(
        &self,
        plaintext: &EncodedPlaintext,
        rng: &mut R,
    ) -> Result<Ciphertext> {
        if plaintext.raw() >= &self.modulus {
            return Err(CryptoError::InvalidPlaintext);
        }
        let r = random_unit(rng, &self.modulus);
        let g_m = (BigUint::one() + plaintext.raw() * &self.modulus) % &self.modulus_sq;
        let r_n = r.modpow(&self.modulus, &self.modulus_sq);
        Ok(Ciphertext {
            value: (g_m * r_n) % &self.modulus_sq,
            key_fingerprint: self.fingerprint,
        })
    }

    /// Homomorphic addition: the product of ciphertexts decrypts to the sum
    /// of plaintexts modulo `N`.
    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check(a)?;
        self.check(b)?;
        Ok(Ciphertext {
            value: (&a.value * &b.value) % &self.modulus_sq,
            key_fingerprint: self.fingerprint,
        })
    }

    /// Wraps a raw group element received over the wire.
    pub fn ciphertext_from_value(&self, value: BigUint) -> Result<Ciphertext> {
        let ct = Ciphertext {
            value,
            key_fingerprint: self.fingerprint,
        };
        self.check(&ct)?;
        Ok(ct)
    }

    /// Checks the key binding and that the value lies in `[1, N²)`.
    pub fn check(&self, c: &Ciphertext) -> Result<()> {
        if c.key_fingerprint != self.fingerprint {
            return Err(CryptoError::KeyMismatch);
        }
        if c.value.is_zero() || c.value >= self.modulus_sq {
            return Err(CryptoError::InvalidCiphertext);
        }
        Ok(())
    }

    /// `L(u) = (u - 1) / N`.
    pub(crate) fn l_function(&self, u: &BigUint) -> BigUint {
        (u - 1u32) / &self.modulus
    }
}

/// Paillier secret key: `lambda = lcm(p-1, q-1)`, `mu = lambda⁻¹ mod N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    public: PublicKey,
    lambda: BigUint,
    mu: BigUint,
}

impl SecretKey {
    pub(crate) fn from_parts(public: PublicKey, lambda: BigUint, mu: BigUint) -> Result<Self> {
        let sk = Self { public, lambda, mu };
        // mu * L(g^lambda mod N²) = 1 (mod N)
        let g_lambda = sk
            .public
            .generator
            .modpow(&sk.lambda, &sk.public.modulus_sq);
        let check = (sk.public.l_function(&g_lambda) * &sk.mu) % &sk.public.modulus;
        if !check.is_one() {
            return Err(CryptoError::Malformed(
                "mu is not the inverse of L(g^lambda)".into(),
            ));
        }
        Ok(sk)
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn mu(&self) -> &BigUint {
        &self.mu
    }

    /// Exact plaintext recovery; `scale` is attached to the result for
    /// fixed-point decoding.
    pub fn decrypt(&self, c: &Ciphertext, scale: u64) -> Result<EncodedPlaintext> {
        self.public.check(c)?;
        let u = c.value.modpow(&self.lambda, &self.public.modulus_sq);
        let m = (self.public.l_function(&u) * &self.mu) % &self.public.modulus;
        Ok(EncodedPlaintext::from_raw(m, scale))
    }

    /// The exponent that is secret-shared for threshold decryption:
    /// `d ≡ 0 (mod lambda)` and `d ≡ 1 (mod N)`.
    pub(crate) fn sharing_exponent(&self) -> BigUint {
        &self.lambda * &self.mu
    }

    /// `N · lambda`, the modulus of the share ring.
    pub(crate) fn sharing_modulus(&self) -> BigUint {
        &self.lambda * &self.public.modulus
    }
}

/// A Paillier ciphertext, an element of `Z*_{N²}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ciphertext {
    #[serde(with = "hex_biguint")]
    value: BigUint,
    key_fingerprint: u64,
}

impl Ciphertext {
    /// Rebuilds a ciphertext from its wire fields; validate with the key
    /// before use.
    pub fn from_parts(value: BigUint, key_fingerprint: u64) -> Self {
        Self {
            value,
            key_fingerprint,
        }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn key_fingerprint(&self) -> u64 {
        self.key_fingerprint
    }

    /// Replaces the value while keeping the key binding. Used by tamper
    /// tests and adversary hooks.
    pub fn with_value(&self, value: BigUint) -> Self {
        Self {
            value,
            key_fingerprint: self.key_fingerprint,
        }
    }
}

/// Generates a key pair with a `key_bits`-bit modulus, the product of two
/// distinct `key_bits / 2`-bit primes.
pub fn keygen<R: RngCore + ?Sized>(key_bits: u32, rng: &mut R) -> Result<(PublicKey, SecretKey)> {
    if key_bits < MIN_KEY_BITS || key_bits % 2 != 0 {
        return Err(CryptoError::InsecureKeySize {
            bits: key_bits,
            min: MIN_KEY_BITS,
        });
    }
    let half = u64::from(key_bits / 2);
    loop {
        let p = random_prime(rng, half);
        let q = random_prime(rng, half);
        if p == q {
            continue;
        }
        let n = &p * &q;
        let p1 = &p - 1u32;
        let q1 = &q - 1u32;
        if !n.gcd(&(&p1 * &q1)).is_one() {
            continue;
        }
        let lambda = p1.lcm(&q1);
        let Some(mu) = mod_inverse(&lambda, &n) else {
            continue;
        };
        let public = PublicKey::from_modulus(n, key_bits);
        let secret = SecretKey::from_parts(public.clone(), lambda, mu)?;
        return Ok((public, secret));
    }
}

/// [`keygen`] driven by a seed-derived stream; identical seeds give identical keys.
pub fn keygen_seeded(key_bits: u32, seed: u64) -> Result<(PublicKey, SecretKey)> {
    keygen(key_bits, &mut rng::stream(seed, "paillier-keygen", 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigint::random_bits;
    use num_bigint::BigInt;
    use std::sync::OnceLock;

    fn keys() -> &'static (PublicKey, SecretKey) {
        static KEYS: OnceLock<(PublicKey, SecretKey)> = OnceLock::new();
        KEYS.get_or_init(|| keygen_seeded(512, 7).unwrap())
    }

    fn raw(pk: &PublicKey, v: u64) -> EncodedPlaintext {
        pk.encode_fixed(&BigInt::from(v), 1).unwrap()
    }

    #[test]
    fn rejects_small_or_odd_key_sizes() {
        let mut r = rng::stream(0, "t", 0);
        assert!(matches!(
            keygen(128, &mut r),
            Err(CryptoError::InsecureKeySize { bits: 128, .. })
        ));
        assert!(keygen(255, &mut r).is_err());
        assert!(keygen(258 + 1, &mut r).is_err());
    }

    #[test]
    fn keygen_is_deterministic_and_well_formed() {
        let (pk, sk) = keys();
        let (pk2, _) = keygen_seeded(512, 7).unwrap();
        assert_eq!(pk.modulus(), pk2.modulus());
        assert_eq!(pk.modulus().bits(), 512);
        assert!(pk.modulus().is_odd());
        assert!(pk.modulus() > &(BigUint::one() << 511));
        assert_eq!(pk.generator(), &(pk.modulus() + 1u32));
        let mut r = rng::stream(1, "t", 0);
        let c = pk.encrypt(&raw(pk, 123), &mut r).unwrap();
        assert_eq!(sk.decrypt(&c, 1).unwrap().raw(), &BigUint::from(123u32));
    }

    #[test]
    fn encryption_is_probabilistic() {
        let (pk, sk) = keys();
        let mut r = rng::stream(2, "t", 0);
        let a = pk.encrypt(&raw(pk, 42), &mut r).unwrap();
        let b = pk.encrypt(&raw(pk, 42), &mut r).unwrap();
        assert_ne!(a, b);
        assert_eq!(sk.decrypt(&a, 1).unwrap(), sk.decrypt(&b, 1).unwrap());
        let zero = pk.encrypt(&raw(pk, 0), &mut r).unwrap();
        assert!(sk.decrypt(&zero, 1).unwrap().raw().is_zero());
    }

    #[test]
    fn round_trip_zero_negative_and_wide_values() {
        let (pk, sk) = keys();
        let mut r = rng::stream(3, "t", 0);
        let neg = pk.encode(-1.5, 1000).unwrap();
        let c = pk.encrypt(&neg, &mut r).unwrap();
        assert_eq!(pk.decode(&sk.decrypt(&c, 1000).unwrap()).unwrap(), -1.5);
        let wide = EncodedPlaintext::from_raw(random_bits(&mut r, 64), 1);
        let c = pk.encrypt(&wide, &mut r).unwrap();
        assert_eq!(sk.decrypt(&c, 1).unwrap(), wide);
    }

    #[test]
    fn homomorphic_addition() {
        let (pk, sk) = keys();
        let mut r = rng::stream(4, "t", 0);
        let a = pk.encrypt(&raw(pk, 17), &mut r).unwrap();
        let b = pk.encrypt(&raw(pk, 25), &mut r).unwrap();
        let sum = pk.add(&a, &b).unwrap();
        assert_eq!(sk.decrypt(&sum, 1).unwrap().raw(), &BigUint::from(42u32));
        let z = pk.encrypt(&raw(pk, 0), &mut r).unwrap();
        assert_eq!(
            sk.decrypt(&pk.add(&a, &z).unwrap(), 1).unwrap().raw(),
            &BigUint::from(17u32)
        );
    }

    #[test]
    fn fold_of_fifty_counts_matches_integer_sum() {
        use rand::Rng;
        let (pk, sk) = keys();
        let mut r = rng::stream(5, "t", 0);
        let counts: Vec<u64> = (0..50).map(|_| r.random_range(0..100_000u64)).collect();
        let expected: u64 = counts.iter().sum();
        let mut acc = pk.encrypt(&raw(pk, counts[0]), &mut r).unwrap();
        for &c in &counts[1..] {
            let next = pk.encrypt(&raw(pk, c), &mut r).unwrap();
            acc = pk.add(&acc, &next).unwrap();
        }
        assert_eq!(sk.decrypt(&acc, 1).unwrap().raw(), &BigUint::from(expected));
    }

    #[test]
    fn add_rejects_foreign_ciphertexts() {
        let (pk, _) = keys();
        let (other, _) = keygen_seeded(256, 99).unwrap();
        let mut r = rng::stream(6, "t", 0);
        let a = pk.encrypt(&raw(pk, 1), &mut r).unwrap();
        let b = other.encrypt(&raw(&other, 1), &mut r).unwrap();
        assert_eq!(pk.add(&a, &b), Err(CryptoError::KeyMismatch));
    }
}
