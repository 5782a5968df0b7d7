//! Seed-deterministic garbling of the blinded comparison function
//! f_>((b̄_i, x_i), (b̄_j, x_j)) = b̄_i ⊕ b̄_j ⊕ [x_i ≥ x_j].
//!
//! Both endpoints of a pair derive the identical garbling from a shared
//! Diffie-Hellman seed, so the evaluator's side encodes its own input
//! locally and no oblivious transfer is needed anywhere.
//!
//! Construction: free-XOR with point-and-permute, four rows per AND gate.
//! The comparison is the μ'-stage carry ladder
//! c_l = y_l ⊕ ((y_l ⊕ c_{l-1}) ∧ (x_l ⊕ c_{l-1})) with c_0 = 0 computing
//! the strict bit [x_j > x_i]; the complement and both blind bits fold into
//! free XORs and the public output-decode bit. AND-gate count is exactly μ'.

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::BitVector;
use crate::wire::{Reader, WireError, Writer};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GarbleError {
    #[error("peer Diffie-Hellman value is the identity point")]
    IdentityPeer,
    #[error("input width {got} does not match circuit width {want}")]
    WidthMismatch { want: u32, got: u32 },
    #[error("unsupported security parameter {0}")]
    BadLambda(u32),
    #[error("malformed garbled-circuit bytes: {0}")]
    Malformed(#[from] WireError),
}

/// λ-bit wire label; the low bit doubles as the point-and-permute color.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireLabel(pub u128);

impl WireLabel {
    fn color(self) -> bool {
        self.0 & 1 == 1
    }

    fn xor(self, other: WireLabel) -> WireLabel {
        WireLabel(self.0 ^ other.0)
    }
}

/// Pair key agreed through the server; ck_ij = ck_ji.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharedSeed(pub [u8; 32]);

/// Derives the shared pair seed from a DH exchange routed via the server.
/// The identity point is rejected; ristretto255 has no other small-order
/// elements.
pub fn dh_seed(own_secret: &Scalar, peer_public: &RistrettoPoint) -> Result<SharedSeed, GarbleError> {
    if *peer_public == RistrettoPoint::identity() {
        return Err(GarbleError::IdentityPeer);
    }
    let shared = peer_public * own_secret;
    let mut h = Sha256::new();
    h.update(b"skre-dh-seed");
    h.update(shared.compress().to_bytes());
    Ok(SharedSeed(h.finalize().into()))
}

/// The garbled comparator: one four-row table per AND gate plus the public
/// output-decode bit. Regenerating from the same seed is bit-identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarbledComparator {
    pub mu_prime: u32,
    pub lambda: u32,
    tables: Vec<[WireLabel; 4]>,
    decode_bit: bool,
}

impl GarbledComparator {
    /// Ciphertext rows in the table; XOR gates contribute none.
    pub fn row_count(&self) -> usize {
        self.tables.len() * 4
    }

    pub fn and_gate_count(&self) -> usize {
        self.tables.len()
    }

    /// Fixed, versioned byte layout: header then the row blob.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(1); // layout version
        w.u16(self.mu_prime as u16);
        w.u16(self.lambda as u16);
        w.u8(u8::from(self.decode_bit));
        let width = (self.lambda / 8) as usize;
        for table in &self.tables {
            for row in table {
                w.bytes(&row.0.to_be_bytes()[16 - width..]);
            }
        }
        w.finish()
    }

    pub fn from_bytes(raw: &[u8]) -> Result<Self, GarbleError> {
        let mut r = Reader::new(raw);
        let version = r.u8()?;
        if version != 1 {
            return Err(GarbleError::Malformed(WireError::BadTag(version)));
        }
        let mu_prime = u32::from(r.u16()?);
        let lambda = u32::from(r.u16()?);
        if lambda != 80 && lambda != 128 {
            return Err(GarbleError::BadLambda(lambda));
        }
        let decode_bit = r.u8()? == 1;
        let width = (lambda / 8) as usize;
        let mut tables = Vec::with_capacity(mu_prime as usize);
        for _ in 0..mu_prime {
            let mut table = [WireLabel(0); 4];
            for row in &mut table {
                let mut be = [0u8; 16];
                be[16 - width..].copy_from_slice(r.bytes(width)?);
                *row = WireLabel(u128::from_be_bytes(be));
            }
            tables.push(table);
        }
        r.expect_end()?;
        Ok(GarbledComparator { mu_prime, lambda, tables, decode_bit })
    }
}

/// Zero-labels of every input wire plus the global offset; both parties
/// derive it from the shared seed and encode their own inputs with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub mu_prime: u32,
    pub lambda: u32,
    delta: WireLabel,
    head_wires: Vec<WireLabel>, // blind then value bits, MSB-first
    tail_wires: Vec<WireLabel>,
}

/// Active labels for one party's input: blind wire first, then value bits
/// most-significant-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GarbledInput {
    pub labels: Vec<WireLabel>,
}

impl GarbledInput {
    pub fn to_bytes(&self, lambda: u32) -> Vec<u8> {
        let width = (lambda / 8) as usize;
        let mut w = Writer::new();
        w.u16(self.labels.len() as u16);
        for l in &self.labels {
            w.bytes(&l.0.to_be_bytes()[16 - width..]);
        }
        w.finish()
    }

    pub fn from_bytes(raw: &[u8], lambda: u32) -> Result<Self, GarbleError> {
        let width = (lambda / 8) as usize;
        let mut r = Reader::new(raw);
        let count = r.u16()? as usize;
        let mut labels = Vec::with_capacity(count);
        for _ in 0..count {
            let mut be = [0u8; 16];
            be[16 - width..].copy_from_slice(r.bytes(width)?);
            labels.push(WireLabel(u128::from_be_bytes(be)));
        }
        r.expect_end()?;
        Ok(GarbledInput { labels })
    }
}

fn label_mask(lambda: u32) -> u128 {
    if lambda >= 128 {
        u128::MAX
    } else {
        (1u128 << lambda) - 1
    }
}

fn draw_label(rng: &mut ChaCha20Rng, mask: u128) -> WireLabel {
    let mut raw = [0u8; 16];
    rng.fill_bytes(&mut raw);
    WireLabel(u128::from_be_bytes(raw) & mask)
}

fn gate_hash(a: WireLabel, b: WireLabel, gate: u32, mask: u128) -> WireLabel {
    let mut h = Sha256::new();
    h.update(b"skre-garble");
    h.update(a.0.to_be_bytes());
    h.update(b.0.to_be_bytes());
    h.update(gate.to_be_bytes());
    let digest = h.finalize();
    WireLabel(u128::from_be_bytes(digest[..16].try_into().unwrap()) & mask)
}

/// Garbles f_> for μ'-bit values. Deterministic in the seed: the same seed
/// always yields byte-identical (F, e).
pub fn garble(
    seed: &SharedSeed,
    mu_prime: u32,
    lambda: u32,
) -> Result<(GarbledComparator, Encoding), GarbleError> {
    if lambda != 80 && lambda != 128 {
        return Err(GarbleError::BadLambda(lambda));
    }
    let mask = label_mask(lambda);
    let mut rng = ChaCha20Rng::from_seed(seed.0);

    // Global free-XOR offset; odd so the two labels of a wire differ in color.
    let delta = WireLabel(draw_label(&mut rng, mask).0 | 1);
    let wires = mu_prime as usize + 1;
    let head_wires: Vec<WireLabel> = (0..wires).map(|_| draw_label(&mut rng, mask)).collect();
    let tail_wires: Vec<WireLabel> = (0..wires).map(|_| draw_label(&mut rng, mask)).collect();

    // Ladder over positions l = 1 (LSB) .. mu_prime with y the tail value
    // bits and x the head value bits; wire of position l sits at index
    // mu_prime - l (MSB-first), offset by one for the blind wire.
    let mut tables = Vec::with_capacity(mu_prime as usize);
    let mut carry = WireLabel(0); // zero-label of the constant-false c_0
    for l in 1..=mu_prime {
        let y = tail_wires[1 + (mu_prime - l) as usize];
        let x = head_wires[1 + (mu_prime - l) as usize];
        let u = y.xor(carry);
        let v = x.xor(carry);
        let out = draw_label(&mut rng, mask);
        let gate = l - 1;
        let mut table = [WireLabel(0); 4];
        for va in [false, true] {
            for vb in [false, true] {
                let a = if va { u.xor(delta) } else { u };
                let b = if vb { v.xor(delta) } else { v };
                let idx = (usize::from(a.color()) << 1) | usize::from(b.color());
                let plain = if va && vb { out.xor(delta) } else { out };
                table[idx] = gate_hash(a, b, gate, mask).xor(plain);
            }
        }
        tables.push(table);
        carry = y.xor(out);
    }

    // out = hb ⊕ tb ⊕ c ⊕ 1: the XORs are free, the complement flips the
    // decode bit.
    let out_zero = head_wires[0].xor(tail_wires[0]).xor(carry);
    let decode_bit = !out_zero.color();

    Ok((
        GarbledComparator { mu_prime, lambda, tables, decode_bit },
        Encoding { mu_prime, lambda, delta, head_wires, tail_wires },
    ))
}

fn select(wires: &[WireLabel], delta: WireLabel, blind: bool, bits: &BitVector) -> Vec<WireLabel> {
    let choose = |w: WireLabel, bit: bool| if bit { w.xor(delta) } else { w };
    let mut labels = Vec::with_capacity(wires.len());
    labels.push(choose(wires[0], blind));
    for (w, &bit) in wires[1..].iter().zip(bits.as_slice()) {
        labels.push(choose(*w, bit));
    }
    labels
}

/// Encodes the head party's (blind, value) input.
pub fn encode_head(e: &Encoding, blind: bool, x: &BitVector) -> Result<GarbledInput, GarbleError> {
    if x.width() != e.mu_prime {
        return Err(GarbleError::WidthMismatch { want: e.mu_prime, got: x.width() });
    }
    Ok(GarbledInput { labels: select(&e.head_wires, e.delta, blind, x) })
}

/// Encodes the tail party's (blind, value) input.
pub fn encode_tail(e: &Encoding, blind: bool, x: &BitVector) -> Result<GarbledInput, GarbleError> {
    if x.width() != e.mu_prime {
        return Err(GarbleError::WidthMismatch { want: e.mu_prime, got: x.width() });
    }
    Ok(GarbledInput { labels: select(&e.tail_wires, e.delta, blind, x) })
}

/// Evaluates F on two garbled inputs, returning the blinded comparison bit
/// b̄_i ⊕ b̄_j ⊕ [x_i ≥ x_j] via the public decode bit.
pub fn evaluate(
    f: &GarbledComparator,
    head: &GarbledInput,
    tail: &GarbledInput,
) -> Result<bool, GarbleError> {
    let want = f.mu_prime as usize + 1;
    if head.labels.len() != want || tail.labels.len() != want {
        return Err(GarbleError::WidthMismatch {
            want: f.mu_prime + 1,
            got: head.labels.len().min(tail.labels.len()) as u32,
        });
    }
    let mask = label_mask(f.lambda);
    let mut carry = WireLabel(0);
    for l in 1..=f.mu_prime {
        let y = tail.labels[1 + (f.mu_prime - l) as usize];
        let x = head.labels[1 + (f.mu_prime - l) as usize];
        let a = y.xor(carry);
        let b = x.xor(carry);
        let gate = l - 1;
        let idx = (usize::from(a.color()) << 1) | usize::from(b.color());
        let out = gate_hash(a, b, gate, mask).xor(f.tables[gate as usize][idx]);
        carry = y.xor(out);
    }
    let out = head.labels[0].xor(tail.labels[0]).xor(carry);
    Ok(out.color() ^ f.decode_bit)
}
