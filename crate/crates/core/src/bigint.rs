//! Big-integer helpers shared by the cryptographic modules.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

/// Miller–Rabin rounds used for every prime we generate.
pub const MILLER_RABIN_ROUNDS: usize = 40;

const SMALL_PRIMES: [u32; 53] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Uniform integer with exactly `bits` random low bits (top bit not forced).
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    if bits == 0 {
        return BigUint::zero();
    }
    let nbytes = bits.div_ceil(8) as usize;
    let mut buf = vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    let excess = (nbytes as u64 * 8 - bits) as u32;
    if excess > 0 {
        let last = nbytes - 1;
        buf[last] &= 0xffu8 >> excess;
    }
    BigUint::from_bytes_le(&buf)
}

/// Uniform integer in `[0, bound)` by rejection sampling.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "random_below: empty range");
    let bits = bound.bits();
    loop {
        let candidate = random_bits(rng, bits);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// Uniform integer in `[1, bound)` coprime to `bound`.
pub fn random_unit<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    loop {
        let candidate = random_below(rng, bound);
        if !candidate.is_zero() && candidate.gcd(bound).is_one() {
            return candidate;
        }
    }
}

/// Probabilistic primality test: trial division then Miller–Rabin with
/// `rounds` random bases drawn from `rng`.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    if n == &two {
        return true;
    }
    if n.is_even() {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let three = BigUint::from(3u32);
    'witness: for _ in 0..rounds {
        // base in [2, n - 2]
        let a = random_below(rng, &(n - &three)) + &two;
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
            if x == one {
                return false;
            }
        }
        return false;
    }
    true
}

/// Random prime of exactly `bits` bits with the two top bits set, so the
/// product of two such primes has exactly `2 * bits` bits.
pub fn random_prime<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    assert!(bits >= 8, "prime too small");
    let top = (BigUint::one() << (bits - 1)) | (BigUint::one() << (bits - 2));
    loop {
        let candidate = random_bits(rng, bits) | &top | BigUint::one();
        if is_probable_prime(&candidate, MILLER_RABIN_ROUNDS, rng) {
            return candidate;
        }
    }
}

/// Modular inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from_biguint(Sign::Plus, a % m);
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    a.modinv(&m).and_then(|v| v.to_biguint())
}

/// Reduces a signed integer into `[0, m)`.
pub fn signed_mod(value: &BigInt, m: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    value
        .mod_floor(&m)
        .to_biguint()
        .expect("mod_floor with positive modulus is non-negative")
}

/// Jacobi symbol (a / n) for odd positive `n`. Returns -1, 0 or 1.
pub fn jacobi(a: &BigUint, n: &BigUint) -> i8 {
    assert!(n.is_odd(), "jacobi: even modulus");
    let mut a = a % n;
    let mut n = n.clone();
    let mut result = 1i8;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            a >>= tz;
            let n_mod_8 = (&n % 8u32).to_u32_digits().first().copied().unwrap_or(0);
            if tz % 2 == 1 && (n_mod_8 == 3 || n_mod_8 == 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        let a_mod_4 = (&a % 4u32).to_u32_digits().first().copied().unwrap_or(0);
        let n_mod_4 = (&n % 4u32).to_u32_digits().first().copied().unwrap_or(0);
        if a_mod_4 == 3 && n_mod_4 == 3 {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Precomputed powers of a fixed base for windowed exponentiation: one
/// modular multiplication per `WINDOW_BITS` bits of exponent.
#[derive(Debug, Clone)]
pub struct FixedBaseTable {
    modulus: BigUint,
    max_bits: u64,
    // rows[i][d] = base^(d * 2^(WINDOW_BITS * i))
    rows: Vec<Vec<BigUint>>,
}

impl FixedBaseTable {
    pub const WINDOW_BITS: u64 = 8;

    pub fn new(base: &BigUint, modulus: &BigUint, max_bits: u64) -> Self {
        let windows = max_bits.div_ceil(Self::WINDOW_BITS).max(1) as usize;
        let width = 1usize << Self::WINDOW_BITS;
        let mut rows = Vec::with_capacity(windows);
        let mut row_base = base % modulus;
        for _ in 0..windows {
            let mut row = Vec::with_capacity(width);
            row.push(BigUint::one());
            for d in 1..width {
                let next = (&row[d - 1] * &row_base) % modulus;
                row.push(next);
            }
            // base^(2^(w*(i+1))) = row_base^(2^w) = row[width-1] * row_base
            row_base = (&row[width - 1] * &row_base) % modulus;
            rows.push(row);
        }
        Self {
            modulus: modulus.clone(),
            max_bits,
            rows,
        }
    }

    /// `base^exponent mod modulus`. Exponents wider than the table fall back
    /// to plain `modpow`.
    pub fn pow(&self, exponent: &BigUint) -> BigUint {
        if exponent.bits() > self.max_bits {
            let base = &self.rows[0][1];
            return base.modpow(exponent, &self.modulus);
        }
        let bytes = exponent.to_bytes_le();
        let mut acc = BigUint::one();
        for (i, &digit) in bytes.iter().enumerate() {
            if digit != 0 {
                acc = (acc * &self.rows[i][digit as usize]) % &self.modulus;
            }
        }
        acc
    }
}

/// Little-endian magnitude bytes, empty for zero.
pub fn to_le_bytes(value: &BigUint) -> Vec<u8> {
    if value.is_zero() {
        Vec::new()
    } else {
        value.to_bytes_le()
    }
}

/// Serde adapter: `BigUint` as a lowercase base-16 string.
pub mod hex_biguint {
    use num_bigint::BigUint;
    use num_traits::Num;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_str_radix(16))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        let trimmed = text.strip_prefix("0x").unwrap_or(&text);
        BigUint::from_str_radix(trimmed, 16).map_err(D::Error::custom)
    }
}

/// Serde adapter for `Vec<BigUint>` as base-16 strings.
pub mod hex_biguint_vec {
    use num_bigint::BigUint;
    use num_traits::Num;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(values: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        let texts: Vec<String> = values.iter().map(|v| v.to_str_radix(16)).collect();
        texts.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| BigUint::from_str_radix(t.strip_prefix("0x").unwrap_or(t), 16))
            .collect::<Result<_, _>>()
            .map_err(D::Error::custom)
    }
}
