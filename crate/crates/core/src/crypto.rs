//! Passphrase-derived keys and deterministic AES-128-CTR.
//!
//! Everything the extractor needs — cipher key, CTR nonce, and the seed that
//! replays the pixel search — is derived from the passphrase alone, because
//! a blind extractor has no channel to receive a random IV or salt before it
//! can decode anything. Determinism is the point, but it has a cost worth
//! knowing: reusing one passphrase for two different payloads reuses the
//! keystream, leaking the XOR of the plaintexts. Acceptable for a research
//! tool, not for protecting real secrets.

use aes::cipher::generic_array::GenericArray;
use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;
use sha2::{Digest, Sha256};

/// Key material derived from a passphrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKeyMaterial {
    derived_key: [u8; 16],
    nonce: [u8; 12],
    sfla_seed: u64,
}

impl SecretKeyMaterial {
    /// Single-iteration SHA-256 derivation, domain-separated by suffix:
    /// the cipher key is the first 16 bytes of `SHA-256(passphrase)`, the
    /// CTR nonce the first 12 bytes of `SHA-256(passphrase || "nonce")`, and
    /// the search seed the first 8 bytes of `SHA-256(passphrase || "seed")`
    /// read big-endian.
    pub fn from_passphrase(passphrase: &[u8]) -> Self {
        let digest = Sha256::digest(passphrase);
        let mut derived_key = [0u8; 16];
        derived_key.copy_from_slice(&digest[..16]);

        let mut with_nonce = passphrase.to_vec();
        with_nonce.extend_from_slice(b"nonce");
        let digest = Sha256::digest(&with_nonce);
        let mut nonce = [0u8; 12];
        nonce.copy_from_slice(&digest[..12]);

        let mut with_seed = passphrase.to_vec();
        with_seed.extend_from_slice(b"seed");
        let digest = Sha256::digest(&with_seed);
        let sfla_seed = u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"));

        Self {
            derived_key,
            nonce,
            sfla_seed,
        }
    }

    /// Seed for the pixel-sequence search.
    pub fn sfla_seed(&self) -> u64 {
        self.sfla_seed
    }

    fn initial_counter_block(&self) -> [u8; 16] {
        let mut block = [0u8; 16];
        block[..12].copy_from_slice(&self.nonce);
        block
    }

    /// AES-128-CTR with the derived key and nonce. Length-preserving and
    /// deterministic for a fixed passphrase and plaintext.
    pub fn encrypt(&self, plaintext: &[u8]) -> Vec<u8> {
        ctr_xor(&self.derived_key, &self.initial_counter_block(), plaintext)
    }

    /// CTR decryption is the same keystream XOR.
    pub fn decrypt(&self, ciphertext: &[u8]) -> Vec<u8> {
        self.encrypt(ciphertext)
    }
}

fn increment_be(block: &mut [u8; 16]) {
    for byte in block.iter_mut().rev() {
        *byte = byte.wrapping_add(1);
        if *byte != 0 {
            break;
        }
    }
}

/// XORs `data` with the AES-CTR keystream that starts at `initial` and
/// increments the whole 16-byte counter block big-endian.
fn ctr_xor(key: &[u8; 16], initial: &[u8; 16], data: &[u8]) -> Vec<u8> {
    let cipher = Aes128::new(GenericArray::from_slice(key));
    let mut counter = *initial;
    let mut out = Vec::with_capacity(data.len());
    for chunk in data.chunks(16) {
        let mut keystream = GenericArray::from(counter);
        cipher.encrypt_block(&mut keystream);
        for (byte, pad) in chunk.iter().zip(keystream.iter()) {
            out.push(byte ^ pad);
        }
        increment_be(&mut counter);
    }
    out
}
