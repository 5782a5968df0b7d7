//! Plaintext domain logic shared by every protocol: input disambiguation,
//! bit decomposition, the pairing predicate that assigns comparison roles,
//! Lin-Tzeng 0/1-encodings, and the brute-force KRE oracle that every
//! protocol test is checked against.
//!
//! Bit order convention: serialized bit vectors and encoding vectors are
//! most-significant-first. Positions quoted in formulas are 1-indexed with
//! position 1 the least significant bit, so `bits[0]` holds position μ'.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("client count must be at least 2, got {0}")]
    BadClientCount(u32),
    #[error("rank k={k} outside [1..{n}]")]
    BadRank { k: u32, n: u32 },
    #[error("threshold t={t} outside [1..{n}]")]
    BadThreshold { t: u32, n: u32 },
    #[error("input bitlength plus index bits must lie in [1..=40], got mu={0}")]
    BadBitLength(u32),
    #[error("security parameter must be 80 or 128, got {0}")]
    BadSecurityParameter(u32),
    #[error("party index {index} outside [1..{n}]")]
    IndexOutOfRange { index: u32, n: u32 },
    #[error("value {value} does not fit in {bits} bits")]
    ValueTooWide { value: u64, bits: u32 },
    #[error("paired() is undefined for i = j = {0}")]
    ReflexivePair(u32),
    #[error("empty input sequence")]
    EmptyInput,
    #[error("malformed rank table row")]
    MalformedRow,
}

/// Session parameters shared by all parties.
///
/// `mu` is the bitlength μ of raw inputs; comparisons run on μ' = μ + ⌈log₂ n⌉
/// bits after index disambiguation. `lambda` is the symmetric security
/// parameter σ used by the garbling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub n: u32,
    pub k: u32,
    pub t: u32,
    pub mu: u32,
    pub lambda: u32,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(n: u32, k: u32, t: u32, mu: u32, lambda: u32, seed: u64) -> Result<Self, DomainError> {
        let cfg = ProtocolConfig { n, k, t, mu, lambda, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.n < 2 {
            return Err(DomainError::BadClientCount(self.n));
        }
        if self.k < 1 || self.k > self.n {
            return Err(DomainError::BadRank { k: self.k, n: self.n });
        }
        if self.t < 1 || self.t > self.n {
            return Err(DomainError::BadThreshold { t: self.t, n: self.n });
        }
        // mu' = mu + ceil(log2 n) must stay within the bounded-decode
        // guardrail of 40 bits (see aheg::decode_bounded).
        if self.mu < 1 || self.mu + log2_ceil(self.n) > 40 {
            return Err(DomainError::BadBitLength(self.mu));
        }
        if self.lambda != 80 && self.lambda != 128 {
            return Err(DomainError::BadSecurityParameter(self.lambda));
        }
        Ok(())
    }

    /// μ' = μ + ⌈log₂ n⌉, the bitlength of disambiguated inputs.
    pub fn mu_prime(&self) -> u32 {
        self.mu + log2_ceil(self.n)
    }
}

/// ⌈log₂ n⌉ for n ≥ 1.
pub fn log2_ceil(n: u32) -> u32 {
    debug_assert!(n >= 1);
    if n <= 1 {
        0
    } else {
        32 - (n - 1).leading_zeros()
    }
}

/// A client's raw μ-bit input together with its 1-based party index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlainInput {
    pub value: u64,
    pub index: u32,
}

/// The index-disambiguated form of an input: the party index minus one is
/// appended in the least significant positions, so inputs from distinct
/// parties are never equal and order is preserved with ties broken by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DistinctInput {
    pub value: u64,
    pub mu_prime: u32,
}

/// Appends `index - 1` as a ⌈log₂ n⌉-bit suffix to the value.
pub fn make_distinct(x: PlainInput, mu: u32, n: u32) -> Result<DistinctInput, DomainError> {
    if x.index < 1 || x.index > n {
        return Err(DomainError::IndexOutOfRange { index: x.index, n });
    }
    if mu < 64 && x.value >> mu != 0 {
        return Err(DomainError::ValueTooWide { value: x.value, bits: mu });
    }
    let shift = log2_ceil(n);
    Ok(DistinctInput {
        value: (x.value << shift) | u64::from(x.index - 1),
        mu_prime: mu + shift,
    })
}

/// Drops the ⌈log₂ n⌉ index bits, recovering the underlying value.
pub fn strip_index(value: u64, n: u32) -> u64 {
    value >> log2_ceil(n)
}

/// Bits of a value, most significant first, exactly μ' entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl BitVector {
    pub fn from_value(value: u64, width: u32) -> Result<Self, DomainError> {
        if width == 0 || (width < 64 && value >> width != 0) {
            return Err(DomainError::ValueTooWide { value, bits: width });
        }
        let bits = (0..width).rev().map(|b| (value >> b) & 1 == 1).collect();
        Ok(BitVector { bits })
    }

    pub fn from_distinct(x: &DistinctInput) -> Self {
        Self::from_value(x.value, x.mu_prime).expect("distinct input fits its own width")
    }

    pub fn width(&self) -> u32 {
        self.bits.len() as u32
    }

    /// Most-significant-first slice.
    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    /// Bit at 1-indexed position `l` (position 1 = least significant).
    pub fn position(&self, l: u32) -> bool {
        self.bits[self.bits.len() - l as usize]
    }

    pub fn value(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
    }
}

/// One element of a 0/1-encoding vector: the encoded value and whether it is
/// a proper prefix encoding or a random filler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodedElement {
    pub value: u64,
    pub proper: bool,
}

/// Lin-Tzeng 0-encoding V⁰ and 1-encoding V¹ of a μ'-bit value.
///
/// Elements are at most ν = μ'+1 bits wide: proper elements are below 2^μ',
/// random fillers lie in [2^μ', 2^(μ'+1)) with the least significant bit
/// forced to 0 in V⁰ and 1 in V¹ so fillers never collide across encodings.
/// Vectors are most-significant-position-first, matching [`BitVector`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroOneEncoding {
    pub v0: Vec<EncodedElement>,
    pub v1: Vec<EncodedElement>,
    pub mu_prime: u32,
}

/// Computes the 0/1-encodings of a disambiguated input.
///
/// Position l of V⁰ carries Int(x_{μ'}…x_{l+1}1) when bit l is 0; position l
/// of V¹ carries Int(x_{μ'}…x_l) when bit l is 1; all other positions carry
/// random fillers with the parity constraint above.
pub fn encode_zero_one<R: Rng>(x: &DistinctInput, rng: &mut R) -> ZeroOneEncoding {
    let w = x.mu_prime;
    let mut v0 = Vec::with_capacity(w as usize);
    let mut v1 = Vec::with_capacity(w as usize);
    // Iterate positions µ' down to 1 so vectors come out MSB-first.
    for l in (1..=w).rev() {
        let bit = (x.value >> (l - 1)) & 1 == 1;
        v0.push(if bit {
            random_filler(rng, w, false)
        } else {
            // Bits strictly above position l, then a 1 in the low position.
            EncodedElement { value: ((x.value >> l) << 1) | 1, proper: true }
        });
        v1.push(if bit {
            // Bits from position l upward.
            EncodedElement { value: x.value >> (l - 1), proper: true }
        } else {
            random_filler(rng, w, true)
        });
    }
    ZeroOneEncoding { v0, v1, mu_prime: w }
}

fn random_filler<R: Rng>(rng: &mut R, mu_prime: u32, lsb: bool) -> EncodedElement {
    let base = 1u64 << mu_prime;
    let raw = base + rng.gen_range(0..base);
    EncodedElement { value: (raw & !1) | u64::from(lsb), proper: false }
}

/// The pairing predicate of the comparison-role assignment: exactly one of
/// `paired(i, j)`, `paired(j, i)` holds for i ≠ j, and the head/tail roles it
/// induces are balanced across parties.
pub fn paired(i: u32, j: u32) -> Result<bool, DomainError> {
    if i == j {
        return Err(DomainError::ReflexivePair(i));
    }
    debug_assert!(i >= 1 && j >= 1);
    let (i_odd, j_odd) = (i % 2 == 1, j % 2 == 1);
    Ok((i_odd && i > j && j_odd)
        || (i_odd && i < j && !j_odd)
        || (!i_odd && i > j && !j_odd)
        || (!i_odd && i < j && j_odd))
}

/// All head pairs (i, j) with `paired(i, j)` true, in row-major order.
pub fn paired_pairs(n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && paired(i, j).expect("i != j") {
                out.push((i, j));
            }
        }
    }
    out
}

/// Closed-form head/tail counts for party `i` among `n` parties.
///
/// Odd n: both (n-1)/2. Even n: heads n/2 for odd i and n/2 - 1 for even i,
/// tails the complement.
pub fn head_tail_counts(i: u32, n: u32) -> (u32, u32) {
    debug_assert!(i >= 1 && i <= n);
    if n % 2 == 1 {
        ((n - 1) / 2, (n - 1) / 2)
    } else if i % 2 == 1 {
        (n / 2, n / 2 - 1)
    } else {
        (n / 2 - 1, n / 2)
    }
}

/// Ground truth for every protocol test: disambiguates the inputs, sorts,
/// picks the element of rank k and strips the index bits.
///
/// Raw equal inputs are legal; the index suffix breaks ties, so among tied
/// raw values the one held by the larger index has the larger rank.
pub fn kre_oracle(values: &[PlainInput], k: u32, mu: u32) -> Result<u64, DomainError> {
    if values.is_empty() {
        return Err(DomainError::EmptyInput);
    }
    let n = values.len() as u32;
    if k < 1 || k > n {
        return Err(DomainError::BadRank { k, n });
    }
    let mut distinct = values
        .iter()
        .map(|x| make_distinct(*x, mu, n).map(|d| d.value))
        .collect::<Result<Vec<_>, _>>()?;
    distinct.sort_unstable();
    Ok(strip_index(distinct[k as usize - 1], n))
}

/// Rank from one row of comparison bits: r_i = Σ_j b_ij with b_ii = 1.
pub fn rank_from_bits(row: &[bool]) -> Result<u32, DomainError> {
    if row.is_empty() {
        return Err(DomainError::MalformedRow);
    }
    Ok(row.iter().map(|&b| u32::from(b)).sum())
}

/// Full comparison-bit matrix of a set of distinct values, b_ij = [x_i ≥ x_j].
#[derive(Debug, Clone)]
pub struct RankTable {
    pub bits: Vec<Vec<bool>>,
}

impl RankTable {
    pub fn from_values(values: &[u64]) -> Self {
        let bits = values
            .iter()
            .map(|&xi| values.iter().map(|&xj| xi >= xj).collect())
            .collect();
        RankTable { bits }
    }

    pub fn ranks(&self) -> Result<Vec<u32>, DomainError> {
        self.bits.iter().map(|row| rank_from_bits(row)).collect()
    }
}
