//! Somewhat-homomorphic computation path over an abstract slotted bit-vector
//! backend: SheAdd/SheMult/SheCmp/SheFadder/SheEqual and the non-interactive
//! KRE circuit, with multiplicative-depth accounting.
//!
//! A ciphertext carries a fixed number m of slots each encrypting one bit;
//! encrypting a single bit replicates it to every slot, packed inputs carry
//! (x_{μ'} | … | x_1 | 0 | … | 0). SheAdd is slotwise XOR, SheMult slotwise
//! AND with depth max(depths)+1.
//!
//! The only backend here is a cleartext debug model with an n-out-of-n
//! additive threshold-decryption simulation: slots travel masked by the XOR
//! of n per-share keystreams, so recombination cancels only when every
//! share's partial mask is present. The context retains the dealer's share
//! keys so homomorphic evaluation can unseal operands; a real lattice
//! backend would hold an evaluation key there instead and can be dropped in
//! behind the [`SheBackend`] trait without touching the KRE circuit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::wire::{Reader, WireError, Writer};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SheError {
    #[error("ciphertext belongs to a different context")]
    ContextMismatch,
    #[error("bit widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("multiplicative depth budget {budget} exceeded (needed {needed})")]
    DepthExceeded { budget: u32, needed: u32 },
    #[error("value needs {needed} slots but the context has {have}")]
    TooManySlots { needed: usize, have: usize },
    #[error("expected {expected} partial decryptions, got {got}")]
    WrongShareCount { expected: usize, got: usize },
    #[error("duplicate share index {0}")]
    DuplicateShare(u32),
    #[error("no summands")]
    Empty,
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// Homomorphic slot operations the KRE circuit is written against.
pub trait SheBackend {
    type Ct: Clone;

    fn slot_count(&self) -> usize;
    /// Replicates the bit to every slot; depth 0.
    fn encrypt_bit<R: Rng>(&self, b: bool, rng: &mut R) -> Self::Ct;
    /// Packs bits most-significant-first into the low slot positions,
    /// zero-filling the rest; depth 0.
    fn encrypt_packed<R: Rng>(&self, bits: &[bool], rng: &mut R) -> Result<Self::Ct, SheError>;
    /// Slotwise addition mod 2 of two or more ciphertexts.
    fn add(&self, cts: &[&Self::Ct]) -> Result<Self::Ct, SheError>;
    /// Slotwise multiplication; consumes one level of depth.
    fn mult(&self, a: &Self::Ct, b: &Self::Ct) -> Result<Self::Ct, SheError>;
    fn depth(&self, ct: &Self::Ct) -> u32;
}

/// One party's additive share of the debug decryption capability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheKeyShare {
    pub index: u32,
    pub key: [u8; 32],
}

/// A partial decryption: the share's keystream for one ciphertext nonce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShePartial {
    pub index: u32,
    pub mask: Vec<bool>,
}

impl ShePartial {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u32(self.index);
        w.u16(self.mask.len() as u16);
        let mut packed = vec![0u8; self.mask.len().div_ceil(8)];
        for (i, &b) in self.mask.iter().enumerate() {
            if b {
                packed[i / 8] |= 1 << (i % 8);
            }
        }
        w.bytes(&packed);
        w.finish()
    }

    pub fn from_bytes(raw: &[u8]) -> Result<Self, SheError> {
        let mut r = Reader::new(raw);
        let index = r.u32()?;
        let len = r.u16()? as usize;
        let packed = r.bytes(len.div_ceil(8))?;
        r.expect_end()?;
        let mask = (0..len).map(|i| packed[i / 8] >> (i % 8) & 1 == 1).collect();
        Ok(ShePartial { index, mask })
    }
}

/// Slots masked by the XOR of all n share keystreams for `nonce`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotCiphertext {
    sealed: Vec<bool>,
    nonce: u64,
    depth: u32,
    ctx_id: u64,
}

impl SlotCiphertext {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Tagged slot bitmap, for fixtures and transport.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(0x51); // debug-backend tag
        w.u64(self.ctx_id);
        w.u64(self.nonce);
        w.u32(self.depth);
        w.u16(self.sealed.len() as u16);
        let mut packed = vec![0u8; self.sealed.len().div_ceil(8)];
        for (i, &b) in self.sealed.iter().enumerate() {
            if b {
                packed[i / 8] |= 1 << (i % 8);
            }
        }
        w.bytes(&packed);
        w.finish()
    }

    pub fn from_bytes(raw: &[u8]) -> Result<Self, SheError> {
        let mut r = Reader::new(raw);
        let tag = r.u8()?;
        if tag != 0x51 {
            return Err(SheError::Wire(WireError::BadTag(tag)));
        }
        let ctx_id = r.u64()?;
        let nonce = r.u64()?;
        let depth = r.u32()?;
        let len = r.u16()? as usize;
        let packed = r.bytes(len.div_ceil(8))?;
        r.expect_end()?;
        let sealed = (0..len).map(|i| packed[i / 8] >> (i % 8) & 1 == 1).collect();
        Ok(SlotCiphertext { sealed, nonce, depth, ctx_id })
    }
}

/// Cleartext debug backend context. `share_keys` is the dealer's view,
/// needed to reseal evaluation results; see the module docs.
#[derive(Debug, Clone)]
pub struct DebugSheContext {
    pub slots: usize,
    pub depth_budget: u32,
    ctx_id: u64,
    share_keys: Vec<[u8; 32]>,
}

/// Deals a fresh n-out-of-n context. Slot count is rounded up to the next
/// power of two at or above `min_slots`.
pub fn she_keygen<R: Rng>(
    n: u32,
    min_slots: usize,
    depth_budget: u32,
    rng: &mut R,
) -> (DebugSheContext, Vec<SheKeyShare>) {
    let slots = min_slots.next_power_of_two();
    let shares: Vec<SheKeyShare> = (1..=n)
        .map(|index| {
            let mut key = [0u8; 32];
            rng.fill_bytes(&mut key);
            SheKeyShare { index, key }
        })
        .collect();
    let ctx = DebugSheContext {
        slots,
        depth_budget,
        ctx_id: rng.gen(),
        share_keys: shares.iter().map(|s| s.key).collect(),
    };
    (ctx, shares)
}

/// Depth budget that covers the KRE circuit shape below with slack.
pub fn kre_depth_budget(n: u32, mu_prime: u32) -> u32 {
    mu_prime + n + crate::domain::log2_ceil(n + 1) + 4
}

fn share_mask(key: &[u8; 32], nonce: u64, len: usize) -> Vec<bool> {
    let mut seed = [0u8; 32];
    let mut h = Sha256::new();
    h.update(b"skre-she-mask");
    h.update(key);
    h.update(nonce.to_be_bytes());
    seed.copy_from_slice(&h.finalize());
    let mut prg = ChaCha20Rng::from_seed(seed);
    (0..len).map(|_| prg.gen()).collect()
}

impl DebugSheContext {
    pub fn share_count(&self) -> usize {
        self.share_keys.len()
    }

    fn total_mask(&self, nonce: u64, len: usize) -> Vec<bool> {
        let mut out = vec![false; len];
        for key in &self.share_keys {
            for (o, m) in out.iter_mut().zip(share_mask(key, nonce, len)) {
                *o ^= m;
            }
        }
        out
    }

    fn seal(&self, slots: Vec<bool>, nonce: u64, depth: u32) -> SlotCiphertext {
        let sealed = slots
            .iter()
            .zip(self.total_mask(nonce, slots.len()))
            .map(|(&s, m)| s ^ m)
            .collect();
        SlotCiphertext { sealed, nonce, depth, ctx_id: self.ctx_id }
    }

    fn unseal(&self, ct: &SlotCiphertext) -> Result<Vec<bool>, SheError> {
        if ct.ctx_id != self.ctx_id {
            return Err(SheError::ContextMismatch);
        }
        Ok(ct
            .sealed
            .iter()
            .zip(self.total_mask(ct.nonce, ct.sealed.len()))
            .map(|(&s, m)| s ^ m)
            .collect())
    }

    /// Derived nonces keep evaluation deterministic for fixed inputs.
    fn derived_nonce(&self, tag: u8, operands: &[&SlotCiphertext]) -> u64 {
        let mut h = Sha256::new();
        h.update([tag]);
        h.update(self.ctx_id.to_be_bytes());
        for ct in operands {
            h.update(ct.nonce.to_be_bytes());
            for chunk in ct.sealed.chunks(8) {
                let mut byte = 0u8;
                for (i, &b) in chunk.iter().enumerate() {
                    byte |= u8::from(b) << i;
                }
                h.update([byte]);
            }
        }
        u64::from_be_bytes(h.finalize()[..8].try_into().unwrap())
    }

    /// Test-only oracle: direct decryption without shares.
    pub fn decrypt_direct(&self, ct: &SlotCiphertext) -> Result<Vec<bool>, SheError> {
        self.unseal(ct)
    }

    /// One share's contribution; a valid intermediate value, combinable in
    /// any order.
    pub fn partial_decrypt(&self, share: &SheKeyShare, ct: &SlotCiphertext) -> ShePartial {
        ShePartial { index: share.index, mask: share_mask(&share.key, ct.nonce, ct.sealed.len()) }
    }

    /// Recombines all n partials; fewer or duplicated shares fail.
    pub fn final_decrypt(
        &self,
        ct: &SlotCiphertext,
        partials: &[ShePartial],
    ) -> Result<Vec<bool>, SheError> {
        let n = self.share_keys.len();
        if partials.len() != n {
            return Err(SheError::WrongShareCount { expected: n, got: partials.len() });
        }
        let mut seen = Vec::with_capacity(n);
        let mut slots = ct.sealed.clone();
        for p in partials {
            if seen.contains(&p.index) {
                return Err(SheError::DuplicateShare(p.index));
            }
            seen.push(p.index);
            for (s, m) in slots.iter_mut().zip(&p.mask) {
                *s ^= m;
            }
        }
        Ok(slots)
    }
}

impl SheBackend for DebugSheContext {
    type Ct = SlotCiphertext;

    fn slot_count(&self) -> usize {
        self.slots
    }

    fn encrypt_bit<R: Rng>(&self, b: bool, rng: &mut R) -> SlotCiphertext {
        self.seal(vec![b; self.slots], rng.gen(), 0)
    }

    fn encrypt_packed<R: Rng>(&self, bits: &[bool], rng: &mut R) -> Result<SlotCiphertext, SheError> {
        if bits.len() > self.slots {
            return Err(SheError::TooManySlots { needed: bits.len(), have: self.slots });
        }
        let mut slots = bits.to_vec();
        slots.resize(self.slots, false);
        Ok(self.seal(slots, rng.gen(), 0))
    }

    fn add(&self, cts: &[&SlotCiphertext]) -> Result<SlotCiphertext, SheError> {
        let (first, rest) = cts.split_first().ok_or(SheError::Empty)?;
        let mut slots = self.unseal(first)?;
        let mut depth = first.depth;
        for ct in rest {
            for (s, o) in slots.iter_mut().zip(self.unseal(ct)?) {
                *s ^= o;
            }
            depth = depth.max(ct.depth);
        }
        Ok(self.seal(slots, self.derived_nonce(0xA0, cts), depth))
    }

    fn mult(&self, a: &SlotCiphertext, b: &SlotCiphertext) -> Result<SlotCiphertext, SheError> {
        let depth = a.depth.max(b.depth) + 1;
        if depth > self.depth_budget {
            return Err(SheError::DepthExceeded { budget: self.depth_budget, needed: depth });
        }
        let slots = self
            .unseal(a)?
            .into_iter()
            .zip(self.unseal(b)?)
            .map(|(x, y)| x && y)
            .collect();
        Ok(self.seal(slots, self.derived_nonce(0xA1, &[a, b]), depth))
    }

    fn depth(&self, ct: &SlotCiphertext) -> u32 {
        ct.depth
    }
}

/// Strict comparison of two bitwise-encrypted values (MSB-first): returns
/// (⟦x_i > x_j⟧, ⟦x_j > x_i⟧); equal inputs yield two encryptions of 0.
///
/// Carry ladder c_l = y_l ⊕ ((y_l ⊕ c_{l-1}) ∧ (x_l ⊕ c_{l-1})) with c_0 = 0
/// run once per direction; one depth level per bit position.
pub fn she_cmp<B: SheBackend>(
    backend: &B,
    xi_bits: &[B::Ct],
    xj_bits: &[B::Ct],
    rng: &mut impl Rng,
) -> Result<(B::Ct, B::Ct), SheError> {
    if xi_bits.len() != xj_bits.len() {
        return Err(SheError::WidthMismatch(xi_bits.len(), xj_bits.len()));
    }
    fn gt<B: SheBackend>(
        backend: &B,
        a: &[B::Ct],
        b: &[B::Ct],
        rng: &mut impl Rng,
    ) -> Result<B::Ct, SheError> {
        let mut carry = backend.encrypt_bit(false, rng);
        for (ya, xb) in a.iter().zip(b).rev() {
            let u = backend.add(&[ya, &carry])?;
            let v = backend.add(&[xb, &carry])?;
            let and = backend.mult(&u, &v)?;
            carry = backend.add(&[ya, &and])?;
        }
        Ok(carry)
    }
    let b_ij = gt(backend, xi_bits, xj_bits, rng)?;
    let b_ji = gt(backend, xj_bits, xi_bits, rng)?;
    Ok((b_ij, b_ji))
}

/// Binary adder network over n bit-encryptions: returns the ⌈log₂(n+1)⌉-bit
/// sum, most-significant-first. Ripple-carry accumulation.
pub fn she_fadder<B: SheBackend>(backend: &B, bits: &[B::Ct]) -> Result<Vec<B::Ct>, SheError> {
    if bits.is_empty() {
        return Err(SheError::Empty);
    }
    let width = crate::domain::log2_ceil(bits.len() as u32 + 1) as usize;
    // LSB-first while accumulating.
    let mut acc: Vec<B::Ct> = vec![bits[0].clone()];
    for bit in &bits[1..] {
        let mut carry = bit.clone();
        for slot in acc.iter_mut() {
            let sum = backend.add(&[slot, &carry])?;
            carry = backend.mult(slot, &carry)?;
            *slot = sum;
        }
        if acc.len() < width {
            acc.push(carry);
        }
        // A carry past the top cannot occur: n bits sum to at most n, which
        // fits the width by construction.
    }
    while acc.len() < width {
        // x ⊕ x pads high positions with zero at depth 0 cost.
        acc.push(backend.add(&[&acc[0], &acc[0]])?);
    }
    acc.reverse();
    Ok(acc)
}

/// Equality via two strict comparisons: β = b' ⊕ b'' ⊕ 1.
pub fn she_equal<B: SheBackend>(
    backend: &B,
    a_bits: &[B::Ct],
    b_bits: &[B::Ct],
    rng: &mut impl Rng,
) -> Result<B::Ct, SheError> {
    let (gt, lt) = she_cmp(backend, a_bits, b_bits, rng)?;
    let one = backend.encrypt_bit(true, rng);
    backend.add(&[&gt, &lt, &one])
}

/// The non-interactive KRE circuit: pairwise comparisons with the diagonal
/// seeded to ⟦1⟧ (one call fills both orientations), ranks by full adder,
/// rank-vs-k equality, slot-replicated selection of the packed input, and a
/// final XOR fold. The output's slots spell the KRE most-significant-first.
pub fn compute_kre_she<B: SheBackend>(
    backend: &B,
    x_bits: &[Vec<B::Ct>],
    z_packed: &[B::Ct],
    k_bits: &[B::Ct],
    rng: &mut impl Rng,
) -> Result<B::Ct, SheError> {
    let n = x_bits.len();
    if z_packed.len() != n {
        return Err(SheError::WidthMismatch(n, z_packed.len()));
    }
    let mut b: Vec<Vec<Option<B::Ct>>> = vec![vec![None; n]; n];
    for i in 0..n {
        b[i][i] = Some(backend.encrypt_bit(true, rng));
        for j in i + 1..n {
            let (bij, bji) = she_cmp(backend, &x_bits[i], &x_bits[j], rng)?;
            b[i][j] = Some(bij);
            b[j][i] = Some(bji);
        }
    }
    let mut selected = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<B::Ct> = (0..n).map(|j| b[i][j].clone().unwrap()).collect();
        let rank_bits = she_fadder(backend, &row)?;
        let beta = she_equal(backend, &rank_bits, k_bits, rng)?;
        selected.push(backend.mult(&z_packed[i], &beta)?);
    }
    let refs: Vec<&B::Ct> = selected.iter().collect();
    backend.add(&refs)
}
