//! The two AHE-based comparison subprotocols.
//!
//! * LinCompare: the server blinds and shuffles the componentwise difference
//!   of an encrypted 1-encoding and 0-encoding; the result contains exactly
//!   one zero encryption iff x_i > x_j.
//! * DGK: generator C_i uploads bitwise encryptions under its personal key,
//!   evaluator C_j blinds them into the vector Z and keeps a share δ_ji,
//!   the generator zero-tests Z to learn δ_ij.
//!
//! Convention: every subprotocol here emits the normalized comparison bit
//! b_ij = [x_i ≥ x_j] so the rank formula r_i = Σ_j b_ij holds verbatim on
//! distinct inputs. For DGK that means the generator folds an extra
//! complement into its share when combining (the raw shares satisfy
//! δ_ij ⊕ δ_ji = [x_i < x_j] on distinct inputs).

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::aheg::{
    add, decrypt, encrypt, is_zero, negate, random_nonzero_scalar, scalar_mul, xor_plain,
    AheCiphertext,
};
use crate::domain::{BitVector, ZeroOneEncoding};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompareError {
    #[error("encoding vectors have mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Componentwise encryption of a 0/1-encoding under the common threshold key.
#[derive(Debug, Clone)]
pub struct EncryptedEncoding {
    pub v0: Vec<AheCiphertext>,
    pub v1: Vec<AheCiphertext>,
}

pub fn encrypt_encoding<R: Rng>(
    pk: &RistrettoPoint,
    enc: &ZeroOneEncoding,
    rng: &mut R,
) -> EncryptedEncoding {
    EncryptedEncoding {
        v0: enc.v0.iter().map(|e| crate::aheg::encrypt_u64(pk, e.value, rng)).collect(),
        v1: enc.v1.iter().map(|e| crate::aheg::encrypt_u64(pk, e.value, rng)).collect(),
    }
}

/// Modified Lin-Tzeng comparison: c_l = ⟦(u_l - v_l)·r_l⟧ for fresh nonzero
/// r_l, output order shuffled by a fresh uniform permutation. Exactly one
/// output encrypts zero iff the 1-encoded value exceeds the 0-encoded one.
pub fn lin_compare<R: Rng>(
    v1_i: &[AheCiphertext],
    v0_j: &[AheCiphertext],
    rng: &mut R,
) -> Result<Vec<AheCiphertext>, CompareError> {
    if v1_i.len() != v0_j.len() {
        return Err(CompareError::LengthMismatch(v1_i.len(), v0_j.len()));
    }
    let mut out: Vec<AheCiphertext> = v1_i
        .iter()
        .zip(v0_j)
        .map(|(u, v)| scalar_mul(&add(u, &negate(v)), &random_nonzero_scalar(rng)))
        .collect();
    out.shuffle(rng);
    Ok(out)
}

/// Evaluator side of DGK with the share bit chosen by the caller; the public
/// entry point [`dgk_eva`] draws it uniformly.
///
/// z_u = r_u · (3·Σ_{v>u}(x_iv ⊕ x_jv) + s + x_iu - x_ju) with s = 1 - 2δ_ji;
/// the homomorphic Xor uses the evaluator's plaintext bits. Output shuffled.
pub fn dgk_eva_with_delta<R: Rng>(
    enc_bits_i: &[AheCiphertext],
    x_j: &BitVector,
    delta_ji: bool,
    pk_i: &RistrettoPoint,
    rng: &mut R,
) -> Result<Vec<AheCiphertext>, CompareError> {
    let w = x_j.width() as usize;
    if enc_bits_i.len() != w {
        return Err(CompareError::LengthMismatch(enc_bits_i.len(), w));
    }
    let s = if delta_ji { -Scalar::ONE } else { Scalar::ONE };
    let three = Scalar::from(3u64);

    // Bit vectors are MSB-first; accumulate the prefix sum of XOR terms from
    // the most significant position downward.
    let mut prefix = AheCiphertext {
        a1: curve25519_dalek::traits::Identity::identity(),
        a2: curve25519_dalek::traits::Identity::identity(),
    };
    let mut out = Vec::with_capacity(w);
    for u in 0..w {
        let xj_bit = x_j.as_slice()[u];
        let constant = s - Scalar::from(u64::from(xj_bit));
        let mut z = scalar_mul(&prefix, &three);
        z = add(&z, &enc_bits_i[u]);
        z = add(&z, &encrypt(pk_i, &constant, rng));
        out.push(scalar_mul(&z, &random_nonzero_scalar(rng)));
        prefix = add(&prefix, &xor_plain(pk_i, &enc_bits_i[u], xj_bit, rng));
    }
    out.shuffle(rng);
    Ok(out)
}

/// DGK evaluation: picks δ_ji uniformly, returns it with the blinded vector.
pub fn dgk_eva<R: Rng>(
    enc_bits_i: &[AheCiphertext],
    x_j: &BitVector,
    pk_i: &RistrettoPoint,
    rng: &mut R,
) -> Result<(bool, Vec<AheCiphertext>), CompareError> {
    let delta_ji: bool = rng.gen();
    let z = dgk_eva_with_delta(enc_bits_i, x_j, delta_ji, pk_i, rng)?;
    Ok((delta_ji, z))
}

/// Generator's decryption step: δ_ij = 1 iff some z_u encrypts zero.
pub fn dgk_dec(z: &[AheCiphertext], sk_i: &Scalar) -> bool {
    z.iter().any(|c| is_zero(&decrypt(sk_i, c)))
}

/// Combines the generator's share with the evaluator's encrypted share into
/// the normalized comparison bit under the common key:
/// ⟦b_ij⟧ = ⟦δ_ji ⊕ (1 ⊕ δ_ij)⟧ = ⟦[x_i ≥ x_j]⟧ for distinct inputs.
pub fn dgk_combine<R: Rng>(
    pk: &RistrettoPoint,
    enc_delta_ji: &AheCiphertext,
    delta_ij: bool,
    rng: &mut R,
) -> AheCiphertext {
    xor_plain(pk, enc_delta_ji, !delta_ij, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aheg::{
        decode_bounded, encrypt_u64, final_decrypt, keygen, partial_decrypt, threshold_keygen,
    };
    use crate::domain::{encode_zero_one, DistinctInput};
    use crate::rng::derive_rng;
    use rand::Rng;

    fn encodings(
        pk: &RistrettoPoint,
        value: u64,
        w: u32,
        rng: &mut impl Rng,
    ) -> EncryptedEncoding {
        let enc = encode_zero_one(&DistinctInput { value, mu_prime: w }, rng);
        encrypt_encoding(pk, &enc, rng)
    }

    fn zero_count(sk: &Scalar, cts: &[AheCiphertext]) -> usize {
        cts.iter().filter(|c| is_zero(&decrypt(sk, c))).count()
    }

    #[test]
    fn lin_compare_worked_pair() {
        let mut rng = derive_rng(20, "lin", 0);
        let kp = keygen(&mut rng);
        // 6 > 5 yields exactly one zero; 5 > 6 yields none.
        let e6 = encodings(&kp.pk, 6, 3, &mut rng);
        let e5 = encodings(&kp.pk, 5, 3, &mut rng);
        let up = lin_compare(&e6.v1, &e5.v0, &mut rng).unwrap();
        assert_eq!(zero_count(&kp.sk, &up), 1);
        let down = lin_compare(&e5.v1, &e6.v0, &mut rng).unwrap();
        assert_eq!(zero_count(&kp.sk, &down), 0);
    }

    #[test]
    fn lin_compare_exhaustive_width_five() {
        let w = 5;
        let mut rng = derive_rng(21, "lin-ex", 0);
        let kp = keygen(&mut rng);
        for xi in 0..(1u64 << w) {
            for xj in 0..(1u64 << w) {
                if xi == xj {
                    continue;
                }
                let ei = encodings(&kp.pk, xi, w, &mut rng);
                let ej = encodings(&kp.pk, xj, w, &mut rng);
                let out = lin_compare(&ei.v1, &ej.v0, &mut rng).unwrap();
                assert_eq!(
                    zero_count(&kp.sk, &out),
                    usize::from(xi > xj),
                    "xi={xi} xj={xj}"
                );
            }
        }
    }

    #[test]
    fn lin_compare_rejects_mismatch() {
        let mut rng = derive_rng(22, "lin-err", 0);
        let kp = keygen(&mut rng);
        let e = encodings(&kp.pk, 3, 3, &mut rng);
        assert_eq!(
            lin_compare(&e.v1, &e.v0[..2], &mut rng),
            Err(CompareError::LengthMismatch(3, 2))
        );
    }

    #[test]
    fn lin_compare_nonzero_outputs_not_decodable() {
        let w = 4;
        let mut rng = derive_rng(23, "lin-blind", 0);
        let kp = keygen(&mut rng);
        for (xi, xj) in [(9u64, 4u64), (4, 9), (15, 0)] {
            let ei = encodings(&kp.pk, xi, w, &mut rng);
            let ej = encodings(&kp.pk, xj, w, &mut rng);
            for c in lin_compare(&ei.v1, &ej.v0, &mut rng).unwrap() {
                let q = decrypt(&kp.sk, &c);
                if !is_zero(&q) {
                    assert_eq!(decode_bounded(&q, 1 << w).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn zero_position_roughly_uniform() {
        let w = 4u32;
        let mut rng = derive_rng(24, "lin-chi", 0);
        let kp = keygen(&mut rng);
        let ei = encodings(&kp.pk, 12, w, &mut rng);
        let ej = encodings(&kp.pk, 5, w, &mut rng);
        let mut counts = [0u32; 4];
        let runs = 1000;
        for _ in 0..runs {
            let out = lin_compare(&ei.v1, &ej.v0, &mut rng).unwrap();
            let pos = out
                .iter()
                .position(|c| is_zero(&decrypt(&kp.sk, c)))
                .expect("12 > 5 must produce a zero");
            counts[pos] += 1;
        }
        let expected = runs as f64 / w as f64;
        let chi2: f64 =
            counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // df = 3; anything below 40 is a very generous uniformity bound.
        assert!(chi2 < 40.0, "chi2 = {chi2}, counts = {counts:?}");
    }

    fn encrypt_bits(
        pk: &RistrettoPoint,
        bits: &BitVector,
        rng: &mut impl Rng,
    ) -> Vec<AheCiphertext> {
        bits.as_slice()
            .iter()
            .map(|&b| encrypt_u64(pk, u64::from(b), rng))
            .collect()
    }

    /// Plaintext recomputation of the z_u formula.
    fn dgk_plain_delta(xi: u64, xj: u64, w: u32, delta_ji: bool) -> bool {
        let s: i64 = if delta_ji { -1 } else { 1 };
        (1..=w).any(|u| {
            let prefix: i64 = ((u + 1)..=w)
                .map(|v| i64::from(((xi >> (v - 1)) ^ (xj >> (v - 1))) & 1 == 1))
                .sum();
            let xiu = ((xi >> (u - 1)) & 1) as i64;
            let xju = ((xj >> (u - 1)) & 1) as i64;
            3 * prefix + s + xiu - xju == 0
        })
    }

    #[test]
    fn dgk_matches_plaintext_formula_width_four() {
        let w = 4;
        let mut rng = derive_rng(25, "dgk-w4", 0);
        let kp = keygen(&mut rng);
        for xi in 0..(1u64 << w) {
            for xj in 0..(1u64 << w) {
                for delta_ji in [false, true] {
                    let bits_i = BitVector::from_value(xi, w).unwrap();
                    let enc = encrypt_bits(&kp.pk, &bits_i, &mut rng);
                    let z = dgk_eva_with_delta(
                        &enc,
                        &BitVector::from_value(xj, w).unwrap(),
                        delta_ji,
                        &kp.pk,
                        &mut rng,
                    )
                    .unwrap();
                    let delta_ij = dgk_dec(&z, &kp.sk);
                    assert_eq!(
                        delta_ij,
                        dgk_plain_delta(xi, xj, w, delta_ji),
                        "xi={xi} xj={xj} delta_ji={delta_ji}"
                    );
                    // Equal inputs never produce a zero in either convention.
                    if xi == xj {
                        assert!(!delta_ij);
                    }
                }
            }
        }
    }

    #[test]
    fn dgk_single_bit_example() {
        // x_i=1, x_j=0, width 1, delta_ji=0: z_1 = r(0 + 1 + 1 - 0), never 0.
        let mut rng = derive_rng(26, "dgk-bit", 0);
        let kp = keygen(&mut rng);
        let enc = encrypt_bits(&kp.pk, &BitVector::from_value(1, 1).unwrap(), &mut rng);
        let z = dgk_eva_with_delta(
            &enc,
            &BitVector::from_value(0, 1).unwrap(),
            false,
            &kp.pk,
            &mut rng,
        )
        .unwrap();
        assert!(!dgk_dec(&z, &kp.sk));
    }

    #[test]
    fn dgk_dec_trivial_cases() {
        let mut rng = derive_rng(27, "dgk-dec", 0);
        let kp = keygen(&mut rng);
        let nonzero: Vec<_> = (1..5u64).map(|m| encrypt_u64(&kp.pk, m, &mut rng)).collect();
        assert!(!dgk_dec(&nonzero, &kp.sk));
        let mut with_zero = nonzero.clone();
        with_zero.push(encrypt_u64(&kp.pk, 0, &mut rng));
        assert!(dgk_dec(&with_zero, &kp.sk));
    }

    #[test]
    fn dgk_exhaustive_width_five_normalized() {
        let w = 5;
        let mut rng = derive_rng(28, "dgk-ex", 0);
        let kp = keygen(&mut rng);
        for xi in 0..(1u64 << w) {
            for xj in 0..(1u64 << w) {
                if xi == xj {
                    continue;
                }
                for delta_ji in [false, true] {
                    let enc =
                        encrypt_bits(&kp.pk, &BitVector::from_value(xi, w).unwrap(), &mut rng);
                    let z = dgk_eva_with_delta(
                        &enc,
                        &BitVector::from_value(xj, w).unwrap(),
                        delta_ji,
                        &kp.pk,
                        &mut rng,
                    )
                    .unwrap();
                    let delta_ij = dgk_dec(&z, &kp.sk);
                    // Normalized convention: complementing the generator's
                    // share makes the xor equal [x_i >= x_j].
                    assert_eq!(
                        !delta_ij ^ delta_ji,
                        xi >= xj,
                        "xi={xi} xj={xj} delta_ji={delta_ji}"
                    );
                }
            }
        }
    }

    #[test]
    fn dgk_blinded_outputs_not_decodable() {
        let w = 6;
        let mut rng = derive_rng(29, "dgk-blind", 0);
        let kp = keygen(&mut rng);
        for _ in 0..50 {
            let xi = rng.gen_range(0..(1u64 << w));
            let xj = rng.gen_range(0..(1u64 << w));
            let enc = encrypt_bits(&kp.pk, &BitVector::from_value(xi, w).unwrap(), &mut rng);
            let (_, z) =
                dgk_eva(&enc, &BitVector::from_value(xj, w).unwrap(), &kp.pk, &mut rng).unwrap();
            for c in &z {
                let q = decrypt(&kp.sk, c);
                if !is_zero(&q) {
                    assert_eq!(decode_bounded(&q, 1 << w).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn dgk_zero_count_invariant_under_permutation() {
        let w = 5;
        let mut rng = derive_rng(30, "dgk-perm", 0);
        let kp = keygen(&mut rng);
        let enc = encrypt_bits(&kp.pk, &BitVector::from_value(19, w).unwrap(), &mut rng);
        let xj = BitVector::from_value(7, w).unwrap();
        // Two evaluations draw different permutations and blinds but must
        // reveal the same zero pattern cardinality.
        let z1 = dgk_eva_with_delta(&enc, &xj, true, &kp.pk, &mut rng).unwrap();
        let z2 = dgk_eva_with_delta(&enc, &xj, true, &kp.pk, &mut rng).unwrap();
        assert_eq!(zero_count(&kp.sk, &z1), zero_count(&kp.sk, &z2));
    }

    /// Full pair session against a threshold-decrypt oracle: the combined
    /// ciphertext under the common threshold key decrypts to [x_i >= x_j].
    #[test]
    fn dgk_pair_sessions_match_threshold_oracle() {
        let w = 10;
        let mut rng = derive_rng(31, "dgk-pair", 0);
        let (pk, shares) = threshold_keygen(3, 2, &mut rng).unwrap();
        let personal = keygen(&mut rng);
        for _ in 0..500 {
            let xi = rng.gen_range(0..(1u64 << w));
            let xj = rng.gen_range(0..(1u64 << w));
            if xi == xj {
                continue;
            }
            // Message 1: generator's bitwise encryptions (via server).
            let enc = encrypt_bits(&personal.pk, &BitVector::from_value(xi, w).unwrap(), &mut rng);
            // Message 2: evaluator's Z and encrypted share (via server).
            let (delta_ji, z) =
                dgk_eva(&enc, &BitVector::from_value(xj, w).unwrap(), &personal.pk, &mut rng)
                    .unwrap();
            let enc_delta_ji = encrypt_u64(&pk, u64::from(delta_ji), &mut rng);
            // Messages 3/4: generator zero-tests and returns ⟦b_ij⟧.
            let delta_ij = dgk_dec(&z, &personal.sk);
            let b_ct = dgk_combine(&pk, &enc_delta_ji, delta_ij, &mut rng);

            let set = [1u32, 2];
            let partials: Vec<_> = set
                .iter()
                .map(|&i| partial_decrypt(&shares[i as usize - 1], &set, &b_ct).unwrap())
                .collect();
            let q = final_decrypt(&b_ct, &partials, 2).unwrap();
            assert_eq!(
                decode_bounded(&q, 2).unwrap(),
                Some(u64::from(xi >= xj)),
                "xi={xi} xj={xj}"
            );
        }
    }
}
