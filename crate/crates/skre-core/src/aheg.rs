//! Additively homomorphic ElGamal in the exponent over ristretto255, with
//! t-out-of-n Shamir threshold decryption.
//!
//! A ciphertext of m is (r·P, m·P + r·pk). Ciphertext product is plaintext
//! sum, scalar exponentiation is plaintext multiplication, and the Xor of a
//! ciphertext bit with a plaintext bit is ⟦1⟧^b · ⟦a⟧^((-1)^b). Decryption
//! yields the group element Q = m·P; protocols either zero-test Q or decode
//! small m by baby-step/giant-step.
//!
//! The group order is the ristretto255 prime ℓ (128-bit security level);
//! points serialize compressed to 32 bytes and scalars to 32 big-endian
//! bytes, so transcripts are byte-reproducible under a fixed seed.

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use rand::Rng;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use thiserror::Error;

use crate::wire::WireError;

/// Maximum bound accepted by [`decode_bounded`]; beyond this the baby-step
/// table would no longer be a sane in-memory structure.
pub const MAX_DECODE_BOUND: u64 = 1 << 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AhegError {
    #[error("threshold t={t} outside [1..{n}]")]
    BadThreshold { t: u32, n: u32 },
    #[error("share index {0} not in the announced decryptor set")]
    ShareNotInSet(u32),
    #[error("expected {expected} partial decryptions, got {got}")]
    WrongPartialCount { expected: usize, got: usize },
    #[error("duplicate share index {0} among partial decryptions")]
    DuplicateShare(u32),
    #[error("decode bound {0} exceeds 2^40 guardrail")]
    BoundTooLarge(u64),
    #[error("peer public value is the identity or otherwise unusable")]
    DegeneratePoint,
    #[error("sealed payload too short")]
    SealedTooShort,
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// The fixed group: generator and serialization widths.
pub struct GroupParams;

impl GroupParams {
    pub const POINT_BYTES: usize = 32;
    pub const SCALAR_BYTES: usize = 32;

    pub fn generator() -> RistrettoPoint {
        RISTRETTO_BASEPOINT_POINT
    }
}

/// Draws a uniform scalar from 64 wide bytes.
pub fn random_scalar<R: Rng>(rng: &mut R) -> Scalar {
    let mut wide = [0u8; 64];
    rng.fill_bytes(&mut wide);
    Scalar::from_bytes_mod_order_wide(&wide)
}

/// Uniform nonzero scalar, for blinding factors that must never erase a value.
pub fn random_nonzero_scalar<R: Rng>(rng: &mut R) -> Scalar {
    loop {
        let s = random_scalar(rng);
        if s != Scalar::ZERO {
            return s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AheKeyPair {
    pub sk: Scalar,
    pub pk: RistrettoPoint,
}

/// (A1, A2) = (r·P, m·P + r·pk). Component-wise point addition of two
/// ciphertexts under the same key adds the plaintexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AheCiphertext {
    pub a1: RistrettoPoint,
    pub a2: RistrettoPoint,
}

pub fn keygen<R: Rng>(rng: &mut R) -> AheKeyPair {
    let sk = random_nonzero_scalar(rng);
    AheKeyPair { sk, pk: GroupParams::generator() * sk }
}

/// Encrypts the group element M as (r·P, M + r·pk).
pub fn encrypt_point<R: Rng>(pk: &RistrettoPoint, m: &RistrettoPoint, rng: &mut R) -> AheCiphertext {
    let r = random_scalar(rng);
    AheCiphertext { a1: GroupParams::generator() * r, a2: m + pk * r }
}

/// Encrypts the scalar m in the exponent: (r·P, m·P + r·pk).
pub fn encrypt<R: Rng>(pk: &RistrettoPoint, m: &Scalar, rng: &mut R) -> AheCiphertext {
    encrypt_point(pk, &(GroupParams::generator() * m), rng)
}

pub fn encrypt_u64<R: Rng>(pk: &RistrettoPoint, m: u64, rng: &mut R) -> AheCiphertext {
    encrypt(pk, &Scalar::from(m), rng)
}

/// Full-key decryption to the group element Q = m·P.
pub fn decrypt(sk: &Scalar, c: &AheCiphertext) -> RistrettoPoint {
    c.a2 - c.a1 * sk
}

pub fn add(c1: &AheCiphertext, c2: &AheCiphertext) -> AheCiphertext {
    AheCiphertext { a1: c1.a1 + c2.a1, a2: c1.a2 + c2.a2 }
}

pub fn negate(c: &AheCiphertext) -> AheCiphertext {
    AheCiphertext { a1: -c.a1, a2: -c.a2 }
}

pub fn scalar_mul(c: &AheCiphertext, a: &Scalar) -> AheCiphertext {
    AheCiphertext { a1: c.a1 * a, a2: c.a2 * a }
}

/// Fresh re-randomization: c · ⟦0⟧.
pub fn rerandomize<R: Rng>(pk: &RistrettoPoint, c: &AheCiphertext, rng: &mut R) -> AheCiphertext {
    add(c, &encrypt(pk, &Scalar::ZERO, rng))
}

/// Xor(⟦a⟧, b) = ⟦1⟧^b · ⟦a⟧^((-1)^b). For b = 0 the ciphertext is returned
/// unchanged; for b = 1 the ⟦1⟧ factor folds in fresh randomness.
pub fn xor_plain<R: Rng>(
    pk: &RistrettoPoint,
    c: &AheCiphertext,
    b: bool,
    rng: &mut R,
) -> AheCiphertext {
    if b {
        add(&encrypt(pk, &Scalar::ONE, rng), &negate(c))
    } else {
        *c
    }
}

pub fn is_zero(q: &RistrettoPoint) -> bool {
    *q == RistrettoPoint::identity()
}

/// Bounded discrete-log decode of Q = m·P over [0, bound) by
/// baby-step/giant-step. `None` means m lies outside the bound; protocols
/// rely on that outcome as a first-class result, not an error.
pub fn decode_bounded(q: &RistrettoPoint, bound: u64) -> Result<Option<u64>, AhegError> {
    Ok(BsgsTable::new(bound)?.solve(q))
}

/// Reusable baby-step table of size ⌈√bound⌉.
pub struct BsgsTable {
    bound: u64,
    m: u64,
    baby: HashMap<[u8; 32], u64>,
    giant_step: RistrettoPoint,
}

impl BsgsTable {
    pub fn new(bound: u64) -> Result<Self, AhegError> {
        if bound > MAX_DECODE_BOUND {
            return Err(AhegError::BoundTooLarge(bound));
        }
        let m = (bound as f64).sqrt().ceil() as u64;
        let m = m.max(1);
        let mut baby = HashMap::with_capacity(m as usize);
        let g = GroupParams::generator();
        let mut acc = RistrettoPoint::identity();
        for j in 0..m {
            baby.entry(acc.compress().to_bytes()).or_insert(j);
            acc += g;
        }
        // acc is now m·P; giant steps subtract it.
        Ok(BsgsTable { bound, m, baby, giant_step: acc })
    }

    pub fn solve(&self, q: &RistrettoPoint) -> Option<u64> {
        let mut cur = *q;
        let giants = self.bound.div_ceil(self.m);
        for i in 0..giants {
            if let Some(j) = self.baby.get(&cur.compress().to_bytes()) {
                let m = i * self.m + j;
                if m < self.bound {
                    return Some(m);
                }
            }
            cur -= self.giant_step;
        }
        None
    }
}

/// One party's Shamir share of the threshold secret key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyShare {
    pub index: u32,
    pub scalar: Scalar,
}

/// Lagrange-weighted partial decryption A1·s_i·l_i for a fixed decryptor set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialDecryption {
    pub index: u32,
    pub point: RistrettoPoint,
}

/// Shamir-shares a fresh secret key: shares are evaluations of a random
/// degree-(t-1) polynomial with constant term s; any t of them interpolate s.
pub fn threshold_keygen<R: Rng>(
    n: u32,
    t: u32,
    rng: &mut R,
) -> Result<(RistrettoPoint, Vec<KeyShare>), AhegError> {
    if t < 1 || t > n {
        return Err(AhegError::BadThreshold { t, n });
    }
    let secret = random_nonzero_scalar(rng);
    let mut coeffs = vec![secret];
    for _ in 1..t {
        coeffs.push(random_scalar(rng));
    }
    let shares = (1..=n)
        .map(|i| {
            let x = Scalar::from(u64::from(i));
            // Horner evaluation of f at i.
            let mut acc = Scalar::ZERO;
            for c in coeffs.iter().rev() {
                acc = acc * x + c;
            }
            KeyShare { index: i, scalar: acc }
        })
        .collect();
    Ok((GroupParams::generator() * secret, shares))
}

/// Lagrange coefficient l_i = Π_{j ∈ set, j ≠ i} (-j)/(i-j) evaluated at 0.
pub fn lagrange_coefficient(set: &[u32], i: u32) -> Result<Scalar, AhegError> {
    if !set.contains(&i) {
        return Err(AhegError::ShareNotInSet(i));
    }
    let xi = Scalar::from(u64::from(i));
    let mut num = Scalar::ONE;
    let mut den = Scalar::ONE;
    for &j in set {
        if j == i {
            continue;
        }
        let xj = Scalar::from(u64::from(j));
        num *= -xj;
        den *= xi - xj;
    }
    Ok(num * den.invert())
}

/// Computes m_i = A1·s_i·l_i with l_i taken over the announced decryptor set.
pub fn partial_decrypt(
    share: &KeyShare,
    decryptor_set: &[u32],
    c: &AheCiphertext,
) -> Result<PartialDecryption, AhegError> {
    let l = lagrange_coefficient(decryptor_set, share.index)?;
    Ok(PartialDecryption { index: share.index, point: c.a1 * (share.scalar * l) })
}

/// Recombines: Q = A2 - Σ m_i. Requires exactly `t` partials with distinct
/// indices, all computed against the same announced set.
pub fn final_decrypt(
    c: &AheCiphertext,
    partials: &[PartialDecryption],
    t: u32,
) -> Result<RistrettoPoint, AhegError> {
    if partials.len() != t as usize {
        return Err(AhegError::WrongPartialCount { expected: t as usize, got: partials.len() });
    }
    let mut seen = Vec::with_capacity(partials.len());
    let mut sum = RistrettoPoint::identity();
    for p in partials {
        if seen.contains(&p.index) {
            return Err(AhegError::DuplicateShare(p.index));
        }
        seen.push(p.index);
        sum += p.point;
    }
    Ok(c.a2 - sum)
}

// ---------------------------------------------------------------------------
// Sealed boxes: hybrid encryption of arbitrary bytes to a personal public
// key. Used to transport SHE partial-decryption blobs that do not fit the
// exponent encoding.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedBlob {
    pub eph: RistrettoPoint,
    pub body: Vec<u8>,
}

fn keystream(shared: &RistrettoPoint, len: usize) -> Vec<u8> {
    let base = shared.compress().to_bytes();
    let mut out = Vec::with_capacity(len);
    let mut block = 0u64;
    while out.len() < len {
        let mut h = Sha256::new();
        h.update(b"skre-sealed");
        h.update(base);
        h.update(block.to_be_bytes());
        out.extend_from_slice(&h.finalize());
        block += 1;
    }
    out.truncate(len);
    out
}

pub fn seal<R: Rng>(pk: &RistrettoPoint, msg: &[u8], rng: &mut R) -> SealedBlob {
    let r = random_nonzero_scalar(rng);
    let shared = pk * r;
    let pad = keystream(&shared, msg.len());
    let body = msg.iter().zip(pad).map(|(m, p)| m ^ p).collect();
    SealedBlob { eph: GroupParams::generator() * r, body }
}

pub fn open(sk: &Scalar, blob: &SealedBlob) -> Vec<u8> {
    let shared = blob.eph * sk;
    let pad = keystream(&shared, blob.body.len());
    blob.body.iter().zip(pad).map(|(m, p)| m ^ p).collect()
}

// ---------------------------------------------------------------------------
// Serialization: fixed-width, big-endian scalars, compressed points.
// ---------------------------------------------------------------------------

pub fn point_to_bytes(p: &RistrettoPoint) -> [u8; 32] {
    p.compress().to_bytes()
}

pub fn point_from_bytes(raw: &[u8; 32]) -> Result<RistrettoPoint, AhegError> {
    CompressedRistretto::from_slice(raw)
        .map_err(|_| AhegError::Wire(WireError::BadPoint))?
        .decompress()
        .ok_or(AhegError::Wire(WireError::BadPoint))
}

/// Big-endian per the wire contract; the curve library is little-endian
/// internally.
pub fn scalar_to_bytes(s: &Scalar) -> [u8; 32] {
    let mut le = s.to_bytes();
    le.reverse();
    le
}

pub fn scalar_from_bytes(raw: &[u8; 32]) -> Result<Scalar, AhegError> {
    let mut le = *raw;
    le.reverse();
    Option::<Scalar>::from(Scalar::from_canonical_bytes(le))
        .ok_or(AhegError::Wire(WireError::BadScalar))
}

pub fn ciphertext_to_bytes(c: &AheCiphertext) -> [u8; 64] {
    let mut out = [0u8; 64];
    out[..32].copy_from_slice(&point_to_bytes(&c.a1));
    out[32..].copy_from_slice(&point_to_bytes(&c.a2));
    out
}

pub fn ciphertext_from_bytes(raw: &[u8; 64]) -> Result<AheCiphertext, AhegError> {
    let a1 = point_from_bytes(raw[..32].try_into().unwrap())?;
    let a2 = point_from_bytes(raw[32..].try_into().unwrap())?;
    Ok(AheCiphertext { a1, a2 })
}
