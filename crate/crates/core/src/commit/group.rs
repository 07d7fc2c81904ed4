use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{Num, One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{tags, CommitError, Result};
use crate::bigint::{hex_biguint, jacobi, mod_inverse, random_below, FixedBaseTable};

/// RFC 2409 "Second Oakley Group", a 1024-bit safe prime. Since
/// `p ≡ 7 (mod 8)`, 2 is a quadratic residue and generates the subgroup of
/// prime order `(p - 1) / 2`.
pub const RFC2409_GROUP2_PRIME: &str = "\
FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74\
020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437\
4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED\
EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE65381FFFFFFFFFFFFFFFF";

struct KeyInner {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    h: BigUint,
    g_inv: BigUint,
    g_table: FixedBaseTable,
    h_table: FixedBaseTable,
    digest: [u8; 32],
}

/// Commitment parameters `(p, q, g, h)`. Cheap to clone.
#[derive(Clone)]
pub struct CommitmentKey {
    inner: Arc<KeyInner>,
}

impl std::fmt::Debug for CommitmentKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CommitmentKey")
            .field("group_bits", &self.inner.p.bits())
            .field("digest", &hex::encode(self.inner.digest))
            .finish()
    }
}

impl PartialEq for CommitmentKey {
    fn eq(&self, other: &Self) -> bool {
        self.inner.digest == other.inner.digest
    }
}

impl Eq for CommitmentKey {}

/// Hashes into the order-q subgroup by squaring a wide hash output.
fn derive_h(p: &BigUint, g: &BigUint) -> BigUint {
    let blocks = (p.bits() + 64).div_ceil(256);
    for counter in 0u32.. {
        let mut wide = Vec::with_capacity(blocks as usize * 32);
        for block in 0..blocks as u32 {
            let mut hasher = Sha256::new();
            hasher.update(tags::BASE_H);
            hasher.update(p.to_bytes_le());
            hasher.update(g.to_bytes_le());
            hasher.update(counter.to_le_bytes());
            hasher.update(block.to_le_bytes());
            wide.extend_from_slice(&hasher.finalize());
        }
        let x = BigUint::from_bytes_le(&wide) % p;
        let h = (&x * &x) % p;
        if !h.is_zero() && !h.is_one() && &h != g {
            return h;
        }
    }
    unreachable!("counter space exhausted")
}

impl CommitmentKey {
    /// Builds a key for the safe prime `p` and generator `g` of the
    /// order-`(p-1)/2` subgroup; `h` is derived from `g` by hashing.
    pub fn from_safe_prime(p: BigUint, g: BigUint) -> Result<Self> {
        if p.bits() < 16 || p.is_even() {
            return Err(CommitError::InvalidGroup(
                "modulus must be an odd safe prime".into(),
            ));
        }
        let q: BigUint = (&p - 1u32) >> 1;
        if g <= BigUint::one() || g >= p || !g.modpow(&q, &p).is_one() {
            return Err(CommitError::InvalidGroup(
                "generator must have order q".into(),
            ));
        }
        let h = derive_h(&p, &g);
        let g_inv = mod_inverse(&g, &p).expect("g is a unit");
        let bits = q.bits();
        let g_table = FixedBaseTable::new(&g, &p, bits);
        let h_table = FixedBaseTable::new(&h, &p, bits);
        let mut hasher = Sha256::new();
        for x in [&p, &g, &h] {
            let bytes = x.to_bytes_le();
            hasher.update((bytes.len() as u32).to_le_bytes());
            hasher.update(bytes);
        }
        Ok(Self {
            inner: Arc::new(KeyInner {
                p,
                q,
                g,
                h,
                g_inv,
                g_table,
                h_table,
                digest: hasher.finalize().into(),
            }),
        })
    }

    /// The default group (RFC 2409 group 2, `g = 2`). Built once per process.
    pub fn rfc2409_group2() -> Self {
        static KEY: OnceLock<CommitmentKey> = OnceLock::new();
        KEY.get_or_init(|| {
            let p = BigUint::from_str_radix(RFC2409_GROUP2_PRIME, 16).expect("valid hex");
            CommitmentKey::from_safe_prime(p, BigUint::from(2u32)).expect("published group")
        })
        .clone()
    }

    pub fn group_modulus(&self) -> &BigUint {
        &self.inner.p
    }

    pub fn group_order(&self) -> &BigUint {
        &self.inner.q
    }

    pub fn base_g(&self) -> &BigUint {
        &self.inner.g
    }

    pub fn base_h(&self) -> &BigUint {
        &self.inner.h
    }

    pub(crate) fn g_inv(&self) -> &BigUint {
        &self.inner.g_inv
    }

    /// Hash of `(p, g, h)`, bound into every proof transcript.
    pub fn digest(&self) -> &[u8; 32] {
        &self.inner.digest
    }

    pub(crate) fn pow_g(&self, e: &BigUint) -> BigUint {
        self.inner.g_table.pow(&(e % &self.inner.q))
    }

    pub(crate) fn pow_h(&self, e: &BigUint) -> BigUint {
        self.inner.h_table.pow(&(e % &self.inner.q))
    }

    pub(crate) fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.inner.p
    }

    /// `-x mod q`.
    pub(crate) fn neg_scalar(&self, x: &BigUint) -> BigUint {
        let x = x % &self.inner.q;
        if x.is_zero() {
            x
        } else {
            &self.inner.q - x
        }
    }

    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> BigUint {
        random_below(rng, &self.inner.q)
    }

    /// Membership in the order-q subgroup (quadratic residues mod p).
    pub fn is_group_element(&self, x: &BigUint) -> bool {
        !x.is_zero() && x < &self.inner.p && jacobi(x, &self.inner.p) == 1
    }

    /// `g^value · h^blinding mod p`.
    pub fn commit(&self, value: &BigUint, blinding: &BigUint) -> Result<Commitment> {
        if value >= &self.inner.q {
            return Err(CommitError::ValueOutOfGroup);
        }
        Ok(Commitment {
            value: self.mul(&self.pow_g(value), &self.pow_h(blinding)),
        })
    }

    pub fn commit_u64(&self, value: u64, blinding: &BigUint) -> Result<Commitment> {
        self.commit(&BigUint::from(value), blinding)
    }

    /// Commitment to a signed value, encoded as `value mod q`.
    pub fn commit_signed(&self, value: i128, blinding: &BigUint) -> Result<Commitment> {
        let magnitude = BigUint::from(value.unsigned_abs());
        if magnitude >= self.inner.q {
            return Err(CommitError::ValueOutOfGroup);
        }
        let exponent = if value < 0 {
            self.neg_scalar(&magnitude)
        } else {
            magnitude
        };
        self.commit(&exponent, blinding)
    }

    /// Group product of commitments; opens to the sums of the openings.
    pub fn aggregate<'a, I>(&self, commitments: I) -> Result<Commitment>
    where
        I: IntoIterator<Item = &'a Commitment>,
    {
        let mut iter = commitments.into_iter();
        let first = iter.next().ok_or(CommitError::EmptyAggregate)?;
        let value = iter.fold(first.value.clone(), |acc, c| self.mul(&acc, &c.value));
        Ok(Commitment { value })
    }

    /// `c^e mod p`.
    pub fn scale(&self, c: &Commitment, e: &BigUint) -> Commitment {
        Commitment {
            value: c.value.modpow(e, &self.inner.p),
        }
    }
}

/// A Pedersen commitment, an element of the order-q subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    #[serde(with = "hex_biguint")]
    pub value: BigUint,
}

impl Commitment {
    pub fn from_value(value: BigUint) -> Self {
        Self { value }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::collections::HashMap;

    /// 32-bit safe prime with p ≡ 7 (mod 8); 2 has order q = (p - 1) / 2.
    pub(crate) const TOY_PRIME: u64 = 4_294_967_087;

    fn toy_key() -> CommitmentKey {
        CommitmentKey::from_safe_prime(BigUint::from(TOY_PRIME), BigUint::from(2u32)).unwrap()
    }

    #[test]
    fn published_group_is_well_formed() {
        let ck = CommitmentKey::rfc2409_group2();
        let p = ck.group_modulus();
        assert_eq!(p.bits(), 1024);
        let mut r = rng::stream(1, "ck", 0);
        assert!(crate::bigint::is_probable_prime(p, 20, &mut r));
        assert!(crate::bigint::is_probable_prime(
            ck.group_order(),
            20,
            &mut r
        ));
        assert!(ck.base_g().modpow(ck.group_order(), p).is_one());
        assert!(ck.base_h().modpow(ck.group_order(), p).is_one());
        assert!(ck.is_group_element(ck.base_h()));
        assert_eq!(ck, CommitmentKey::rfc2409_group2());
    }

    #[test]
    fn zero_opening_is_identity_and_products_add() {
        let ck = CommitmentKey::rfc2409_group2();
        assert!(ck
            .commit(&BigUint::zero(), &BigUint::zero())
            .unwrap()
            .value
            .is_one());
        let mut r = rng::stream(2, "ck", 0);
        for _ in 0..10 {
            let (a, b) = (ck.random_scalar(&mut r), ck.random_scalar(&mut r));
            let (ra, rb) = (ck.random_scalar(&mut r), ck.random_scalar(&mut r));
            let lhs = ck
                .aggregate([&ck.commit(&a, &ra).unwrap(), &ck.commit(&b, &rb).unwrap()])
                .unwrap();
            let q = ck.group_order();
            let rhs = ck.commit(&((&a + &b) % q), &((&ra + &rb) % q)).unwrap();
            assert_eq!(lhs, rhs);
        }
        assert_eq!(
            ck.commit(ck.group_order(), &BigUint::zero()),
            Err(CommitError::ValueOutOfGroup)
        );
        assert_eq!(
            ck.aggregate(std::iter::empty()),
            Err(CommitError::EmptyAggregate)
        );
    }

    #[test]
    fn random_commitments_do_not_collide() {
        let ck = CommitmentKey::rfc2409_group2();
        let mut r = rng::stream(3, "ck", 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let v = BigUint::from(rand::Rng::random_range(&mut r, 0..1_000_000u64));
            let c = ck.commit(&v, &ck.random_scalar(&mut r)).unwrap();
            assert!(seen.insert(c.value));
        }
    }

    #[test]
    fn aggregate_of_64_matches_recomputed_opening() {
        let ck = CommitmentKey::rfc2409_group2();
        let mut r = rng::stream(4, "ck", 0);
        let q = ck.group_order().clone();
        let mut coms = Vec::new();
        let (mut sv, mut sr) = (BigUint::zero(), BigUint::zero());
        for _ in 0..64 {
            let v = BigUint::from(rand::Rng::random_range(&mut r, 0..10_000u64));
            let b = ck.random_scalar(&mut r);
            coms.push(ck.commit(&v, &b).unwrap());
            sv += v;
            sr = (sr + b) % &q;
        }
        assert_eq!(ck.aggregate(&coms).unwrap(), ck.commit(&sv, &sr).unwrap());
        assert_eq!(ck.aggregate(&coms[..1]).unwrap(), coms[0]);
    }

    /// In a 32-bit group the birthday bound guarantees collisions among 2^20
    /// random openings. Binding means every such collision is a discrete-log
    /// solution: it never shares a value or a blinding, and
    /// `(v - v') / (r' - r)` equals `log_g h`, found by brute force.
    #[test]
    fn toy_group_collisions_reveal_the_discrete_log() {
        let ck = toy_key();
        let p = TOY_PRIME;
        let q = (p - 1) / 2;
        let g = 2u64;
        let h = ck.base_h().to_u64_digits()[0];
        let mut log_h = None;
        let mut acc = 1u64;
        for e in 0..q {
            if acc == h {
                log_h = Some(e);
                break;
            }
            acc = acc * g % p;
        }
        let log_h = log_h.expect("h lies in <g>");

        let mut r = rng::stream(5, "binding", 0);
        let mut table: HashMap<u64, (u64, u64)> = HashMap::new();
        let mut collisions = 0;
        for _ in 0..(1u32 << 20) {
            let v = rand::Rng::random_range(&mut r, 0..q);
            let b = rand::Rng::random_range(&mut r, 0..q);
            let c = ck
                .commit(&BigUint::from(v), &BigUint::from(b))
                .unwrap()
                .value
                .to_u64_digits()
                .first()
                .copied()
                .unwrap_or(0);
            if let Some(&(v2, b2)) = table.get(&c) {
                if (v, b) == (v2, b2) {
                    continue;
                }
                collisions += 1;
                assert_ne!(v, v2, "distinct blindings under one value collided");
                assert_ne!(b, b2, "distinct values under one blinding collided");
                // v + x b = v2 + x b2 (mod q)  =>  x = (v - v2) / (b2 - b)
                let qq = BigUint::from(q);
                let num = (BigUint::from(v) + &qq - BigUint::from(v2)) % &qq;
                let den = (BigUint::from(b2) + &qq - BigUint::from(b)) % &qq;
                let x = num * mod_inverse(&den, &qq).unwrap() % &qq;
                assert_eq!(x, BigUint::from(log_h));
            } else {
                table.insert(c, (v, b));
            }
        }
        assert!(collisions > 0, "birthday bound predicts ~128 collisions");
    }
}
