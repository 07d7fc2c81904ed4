//! Non-interactive proofs that a Pedersen commitment opens to a value in
//! `[0, bound]`.
//!
//! The statement is split into `v ∈ [0, 2^w)` and `bound - v ∈ [0, 2^w)`
//! with `w = bitlen(bound)`. The second commitment is `g^bound / C` and is
//! never materialized: the verifier checks its product against `g^bound`
//! after multiplying by `C`. Each side commits to its bits, proves every
//! bit is 0 or 1 with a Schnorr OR-proof on base `h`, and supplies the
//! blinding that ties the weighted bit product to its commitment. All
//! challenges come from one SHA-256 transcript digest.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{tags, CommitError, Commitment, CommitmentKey, Result};
use crate::bigint::{hex_biguint, random_bits};
use crate::codec::Writer;

/// Width of every Fiat-Shamir challenge.
pub const CHALLENGE_BITS: u64 = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitProof {
    #[serde(with = "hex_biguint")]
    pub commitment: BigUint,
    #[serde(with = "hex_biguint")]
    pub t0: BigUint,
    #[serde(with = "hex_biguint")]
    pub t1: BigUint,
    #[serde(with = "hex_biguint")]
    pub c0: BigUint,
    #[serde(with = "hex_biguint")]
    pub z0: BigUint,
    #[serde(with = "hex_biguint")]
    pub z1: BigUint,
}

/// Bit commitments and OR-proofs for one side of the statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeDecomposition {
    #[serde(with = "hex_biguint")]
    pub consistency_blinding: BigUint,
    pub bits: Vec<BitProof>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeProof {
    pub bound: u64,
    pub width: u16,
    /// Decomposition of `v`.
    pub value_side: RangeDecomposition,
    /// Decomposition of `bound - v`.
    pub complement_side: RangeDecomposition,
}

pub(crate) fn width_for(bound: u64) -> u16 {
    (64 - bound.leading_zeros()).max(1) as u16
}

fn challenge_modulus() -> BigUint {
    BigUint::one() << CHALLENGE_BITS
}

impl RangeProof {
    pub fn bit_commitments(&self) -> impl Iterator<Item = Commitment> + '_ {
        self.value_side
            .bits
            .iter()
            .chain(&self.complement_side.bits)
            .map(|b| Commitment::from_value(b.commitment.clone()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("proof serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CommitError::Malformed(e.to_string()))
    }

    fn sides(&self) -> [&RangeDecomposition; 2] {
        [&self.value_side, &self.complement_side]
    }
}

fn transcript_digest(ck: &CommitmentKey, com: &Commitment, proof: &RangeProof) -> [u8; 32] {
    let mut w = Writer::new();
    w.bytes(tags::RANGE_PROOF)
        .bytes(ck.digest())
        .int(&com.value)
        .u64(proof.bound)
        .u16(proof.width);
    for side in proof.sides() {
        w.int(&side.consistency_blinding);
        for bit in &side.bits {
            w.int(&bit.commitment).int(&bit.t0).int(&bit.t1);
        }
    }
    Sha256::digest(w.into_bytes()).into()
}

fn bit_challenge(digest: &[u8; 32], side: u8, index: u16) -> BigUint {
    let mut hasher = Sha256::new();
    hasher.update(tags::RANGE_BIT);
    hasher.update(digest);
    hasher.update([side]);
    hasher.update(index.to_le_bytes());
    BigUint::from_bytes_le(&hasher.finalize())
}

struct PendingBit {
    bit: bool,
    blinding: BigUint,
    nonce: BigUint,
    simulated_c: BigUint,
    simulated_z: BigUint,
}

/// First move for one side: bit commitments, OR-proof commitments and the
/// consistency blinding. Only the low `width` bits of `x` are used.
fn commit_side<R: RngCore + ?Sized>(
    ck: &CommitmentKey,
    x: u64,
    rho: &BigUint,
    width: u16,
    rng: &mut R,
) -> (RangeDecomposition, Vec<PendingBit>) {
    let q = ck.group_order();
    let mut weighted = BigUint::zero();
    let mut bits = Vec::with_capacity(width as usize);
    let mut pending = Vec::with_capacity(width as usize);
    for j in 0..width {
        let bit = (x >> j) & 1 == 1;
        let r = ck.random_scalar(rng);
        weighted += &r << j;
        let commitment = if bit {
            ck.mul(ck.base_g(), &ck.pow_h(&r))
        } else {
            ck.pow_h(&r)
        };
        let nonce = ck.random_scalar(rng);
        let simulated_c = random_bits(rng, CHALLENGE_BITS);
        let simulated_z = ck.random_scalar(rng);
        let real_t = ck.pow_h(&nonce);
        // t = h^(z - r c) * g^(±c) makes the simulated branch verify.
        let h_exp = (&simulated_z + ck.neg_scalar(&(&r * &simulated_c))) % q;
        let g_part = if bit {
            ck.pow_g(&ck.neg_scalar(&simulated_c))
        } else {
            ck.pow_g(&simulated_c)
        };
        let sim_t = ck.mul(&ck.pow_h(&h_exp), &g_part);
        let (t0, t1) = if bit {
            (sim_t, real_t)
        } else {
            (real_t, sim_t)
        };
        bits.push(BitProof {
            commitment,
            t0,
            t1,
            c0: BigUint::zero(),
            z0: BigUint::zero(),
            z1: BigUint::zero(),
        });
        pending.push(PendingBit {
            bit,
            blinding: r,
            nonce,
            simulated_c,
            simulated_z,
        });
    }
    let consistency_blinding = (rho + ck.neg_scalar(&(weighted % q))) % q;
    (
        RangeDecomposition {
            consistency_blinding,
            bits,
        },
        pending,
    )
}

fn respond_side(
    ck: &CommitmentKey,
    side: &mut RangeDecomposition,
    pending: Vec<PendingBit>,
    digest: &[u8; 32],
    side_tag: u8,
) {
    let q = ck.group_order();
    let cm = challenge_modulus();
    for (j, (proof, p)) in side.bits.iter_mut().zip(pending).enumerate() {
        let c = bit_challenge(digest, side_tag, j as u16);
        let real_c = (c + &cm - &p.simulated_c) % &cm;
        let real_z = (p.nonce + &real_c * &p.blinding) % q;
        if p.bit {
            proof.c0 = p.simulated_c;
            proof.z0 = p.simulated_z;
            proof.z1 = real_z;
        } else {
            proof.c0 = real_c;
            proof.z0 = real_z;
            proof.z1 = p.simulated_z;
        }
    }
}

fn prove_inner<R: RngCore + ?Sized>(
    ck: &CommitmentKey,
    value: u64,
    blinding: &BigUint,
    bound: u64,
    rng: &mut R,
) -> (Commitment, RangeProof) {
    let width = width_for(bound);
    let q = ck.group_order();
    let blinding = blinding % q;
    let com = ck
        .commit_u64(value, &blinding)
        .expect("u64 values are below any supported group order");
    let (value_side, pending_v) = commit_side(ck, value, &blinding, width, rng);
    let (complement_side, pending_c) = commit_side(
        ck,
        bound.wrapping_sub(value),
        &ck.neg_scalar(&blinding),
        width,
        rng,
    );
    let mut proof = RangeProof {
        bound,
        width,
        value_side,
        complement_side,
    };
    let digest = transcript_digest(ck, &com, &proof);
    respond_side(ck, &mut proof.value_side, pending_v, &digest, 0);
    respond_side(ck, &mut proof.complement_side, pending_c, &digest, 1);
    (com, proof)
}

/// Proves that `commit(value, blinding)` opens into `[0, bound]`.
pub fn prove_range<R: RngCore + ?Sized>(
    ck: &CommitmentKey,
    value: u64,
    blinding: &BigUint,
    bound: u64,
    rng: &mut R,
) -> Result<RangeProof> {
    if value > bound {
        return Err(CommitError::OutOfRange { value, bound });
    }
    Ok(prove_inner(ck, value, blinding, bound, rng).1)
}

/// Runs the honest prover without the range check. For any `value > bound`
/// the result does not verify; it exists so adversaries can be simulated.
pub fn prove_range_unchecked<R: RngCore + ?Sized>(
    ck: &CommitmentKey,
    value: u64,
    blinding: &BigUint,
    bound: u64,
    rng: &mut R,
) -> RangeProof {
    prove_inner(ck, value, blinding, bound, rng).1
}

fn check_structure(ck: &CommitmentKey, proof: &RangeProof, bound: u64) -> Result<()> {
    if proof.bound != bound {
        return Err(CommitError::Rejected(format!(
            "proof is for bound {}, expected {bound}",
            proof.bound
        )));
    }
    if proof.width != width_for(bound) {
        return Err(CommitError::Malformed(format!(
            "width {} for bound {bound}",
            proof.width
        )));
    }
    let q = ck.group_order();
    let cm = challenge_modulus();
    for side in proof.sides() {
        if side.bits.len() != proof.width as usize {
            return Err(CommitError::Malformed(
                "bit count differs from width".into(),
            ));
        }
        if &side.consistency_blinding >= q {
            return Err(CommitError::Malformed(
                "consistency blinding not reduced".into(),
            ));
        }
        for bit in &side.bits {
            if ![&bit.commitment, &bit.t0, &bit.t1]
                .into_iter()
                .all(|x| ck.is_group_element(x))
            {
                return Err(CommitError::Malformed("element outside the group".into()));
            }
            if bit.c0 >= cm || &bit.z0 >= q || &bit.z1 >= q {
                return Err(CommitError::Malformed("scalar out of range".into()));
            }
        }
    }
    Ok(())
}

/// `Π C_j^(2^j) · h^cb`, evaluated high bit first.
fn weighted_product(ck: &CommitmentKey, side: &RangeDecomposition) -> BigUint {
    let mut acc = BigUint::one();
    for bit in side.bits.iter().rev() {
        acc = ck.mul(&ck.mul(&acc, &acc), &bit.commitment);
    }
    ck.mul(&acc, &ck.pow_h(&side.consistency_blinding))
}

fn verify_bits(ck: &CommitmentKey, side: &RangeDecomposition, digest: &[u8; 32], tag: u8) -> bool {
    let p = ck.group_modulus();
    let cm = challenge_modulus();
    side.bits.iter().enumerate().all(|(j, bit)| {
        let c = bit_challenge(digest, tag, j as u16);
        let c1 = (c + &cm - &bit.c0) % &cm;
        let y1 = ck.mul(&bit.commitment, ck.g_inv());
        ck.pow_h(&bit.z0) == ck.mul(&bit.t0, &bit.commitment.modpow(&bit.c0, p))
            && ck.pow_h(&bit.z1) == ck.mul(&bit.t1, &y1.modpow(&c1, p))
    })
}

/// Accepts iff `proof` shows that `com` opens into `[0, bound]`.
pub fn verify_range(
    ck: &CommitmentKey,
    com: &Commitment,
    proof: &RangeProof,
    bound: u64,
) -> Result<()> {
    if !ck.is_group_element(&com.value) {
        return Err(CommitError::Rejected(
            "commitment is not a group element".into(),
        ));
    }
    check_structure(ck, proof, bound)?;
    if weighted_product(ck, &proof.value_side) != com.value {
        return Err(CommitError::Rejected(
            "value decomposition does not match".into(),
        ));
    }
    let upper = ck.mul(&weighted_product(ck, &proof.complement_side), &com.value);
    if upper != ck.pow_g(&BigUint::from(bound)) {
        return Err(CommitError::Rejected(
            "complement decomposition does not match".into(),
        ));
    }
    let digest = transcript_digest(ck, com, proof);
    if !verify_bits(ck, &proof.value_side, &digest, 0) {
        return Err(CommitError::Rejected(
            "bit proof failed on value side".into(),
        ));
    }
    if !verify_bits(ck, &proof.complement_side, &digest, 1) {
        return Err(CommitError::Rejected(
            "bit proof failed on complement side".into(),
        ));
    }
    Ok(())
}

/// Parses and verifies a proof in wire form.
pub fn verify_range_bytes(
    ck: &CommitmentKey,
    com: &Commitment,
    bytes: &[u8],
    bound: u64,
) -> Result<()> {
    verify_range(ck, com, &RangeProof::from_bytes(bytes)?, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn ck() -> CommitmentKey {
        CommitmentKey::rfc2409_group2()
    }

    fn honest(value: u64, bound: u64, seed: u64) -> (Commitment, RangeProof) {
        let ck = ck();
        let mut r = rng::stream(seed, "range-test", value);
        let blinding = ck.random_scalar(&mut r);
        let proof = prove_range(&ck, value, &blinding, bound, &mut r).unwrap();
        (ck.commit_u64(value, &blinding).unwrap(), proof)
    }

    #[test]
    fn boundaries_and_examples_verify() {
        let ck = ck();
        for (v, b) in [
            (0, 100),
            (100, 100),
            (37, 100),
            (0, 0),
            (1, 1),
            (255, 255),
            (256, 256),
        ] {
            let (com, proof) = honest(v, b, 1);
            assert_eq!(proof.width, width_for(b));
            assert_eq!(proof.bit_commitments().count(), 2 * proof.width as usize);
            verify_range(&ck, &com, &proof, b).unwrap();
        }
    }

    #[test]
    fn honest_prover_refuses_out_of_range() {
        let ck = ck();
        let mut r = rng::stream(2, "range-test", 0);
        assert_eq!(
            prove_range(&ck, 101, &BigUint::one(), 100, &mut r),
            Err(CommitError::OutOfRange {
                value: 101,
                bound: 100
            })
        );
    }

    #[test]
    fn hundred_values_below_two_to_sixteen_verify() {
        let ck = ck();
        let mut r = rng::stream(3, "range-test", 0);
        let bound = 1u64 << 16;
        for i in 0..100 {
            let v = r.random_range(0..=bound);
            let (com, proof) = honest(v, bound, 100 + i);
            assert_eq!(proof.width, 17);
            verify_range(&ck, &com, &proof, bound).unwrap();
        }
    }

    #[test]
    fn out_of_range_forgeries_are_rejected() {
        let ck = ck();
        let mut r = rng::stream(4, "range-test", 0);
        for bound in [0u64, 1, 5, 12, 16, 100] {
            for delta in 1..=16u64 {
                let v = bound + delta;
                let blinding = ck.random_scalar(&mut r);
                let com = ck.commit_u64(v, &blinding).unwrap();
                let proof = prove_range_unchecked(&ck, v, &blinding, bound, &mut r);
                assert!(
                    verify_range(&ck, &com, &proof, bound).is_err(),
                    "v={v} bound={bound}"
                );
            }
        }
    }

    #[test]
    fn mismatched_commitment_or_bound_is_rejected() {
        let ck = ck();
        let (com, proof) = honest(10, 50, 5);
        let other = ck.commit_u64(10, &BigUint::from(7u32)).unwrap();
        assert!(matches!(
            verify_range(&ck, &other, &proof, 50),
            Err(CommitError::Rejected(_))
        ));
        assert!(verify_range(&ck, &com, &proof, 51).is_err());
        let mut wrong_width = proof.clone();
        wrong_width.width += 1;
        assert!(matches!(
            verify_range(&ck, &com, &wrong_width, 50),
            Err(CommitError::Malformed(_))
        ));
    }

    #[test]
    fn json_debug_form_round_trips() {
        let (com, proof) = honest(3, 9, 6);
        let back = RangeProof::from_json(&proof.to_json()).unwrap();
        assert_eq!(back, proof);
        verify_range(&ck(), &com, &back, 9).unwrap();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn completeness(bound in 0u64..5000, frac in 0.0f64..=1.0, seed in any::<u64>()) {
            let v = ((bound as f64) * frac).floor() as u64;
            let (com, proof) = honest(v.min(bound), bound, seed);
            prop_assert!(verify_range(&ck(), &com, &proof, bound).is_ok());
        }
    }
}
