//! End-to-end embedding and blind extraction.
//!
//! Embedding: encrypt the payload, search the cover for an embedding order
//! with the key-seeded optimizer, then write header and ciphertext bits into
//! the LSBs along that order. Extraction repeats the search on the stego
//! image — the objective only sees the upper 7 bits, so it replays the
//! embedder's trajectory exactly — then reads the header, the body, checks
//! the checksum, and decrypts.
//!
//! The search parameters are never stored in the image; embedder and
//! extractor must agree on them out of band (the defaults, flags, or a run
//! manifest).

use thiserror::Error;

use crate::codec::{self, BitStream, CodecError, PayloadHeader, HEADER_BITS};
use crate::crypto::SecretKeyMaterial;
use crate::metrics::{self, MetricsError, QualityReport};
use crate::raster::RasterImage;
use crate::selector::{select_sequence, PixelSequence, SelectorConfig, SelectorError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("payload of {required} bytes exceeds the cover capacity of {available} bytes")]
    CapacityExceeded { required: usize, available: usize },
    #[error("wrong key or not a stego image: {source}")]
    Integrity {
        #[source]
        source: CodecError,
    },
    #[error(transparent)]
    Selector(#[from] SelectorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Everything an embedding run produces.
#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    pub stego: RasterImage,
    pub sequence: PixelSequence,
    /// Objective evaluations the sequence search spent.
    pub evaluations: u64,
    /// Quality of the stego image against the cover.
    pub report: QualityReport<f64>,
}

/// Encrypts `payload` and hides it in `cover` under `key`.
pub fn embed(
    cover: &RasterImage,
    payload: &[u8],
    key: &SecretKeyMaterial,
    cfg: &SelectorConfig<f64>,
) -> Result<EmbedOutcome, PipelineError> {
    let available = codec::capacity(cover);
    if payload.len() > available {
        return Err(PipelineError::CapacityExceeded {
            required: payload.len(),
            available,
        });
    }

    let ciphertext = key.encrypt(payload);
    let mut bits = PayloadHeader::for_ciphertext(&ciphertext).to_bits();
    bits.push_bytes(&ciphertext);

    let selection = select_sequence(cover, cfg, key.sfla_seed())?;
    let stego = codec::embed_bits(cover, &selection.sequence, &bits)
        .expect("capacity was checked against the header-aware bound");
    let report = metrics::report(&stego, cover, &cfg.fitness)?;

    Ok(EmbedOutcome {
        stego,
        sequence: selection.sequence,
        evaluations: selection.trace.evaluations,
        report,
    })
}

/// Recovers the payload from a stego image using only the key and the
/// (out-of-band) configuration.
pub fn extract(
    stego: &RasterImage,
    key: &SecretKeyMaterial,
    cfg: &SelectorConfig<f64>,
) -> Result<Vec<u8>, PipelineError> {
    let selection = select_sequence(stego, cfg, key.sfla_seed())?;
    let (header, ciphertext) = read_frame(stego, &selection.sequence)?;
    header
        .verify(&ciphertext)
        .map_err(|source| PipelineError::Integrity { source })?;
    Ok(key.decrypt(&ciphertext))
}

/// Reads and validates the header, then the ciphertext it announces.
fn read_frame(
    stego: &RasterImage,
    sequence: &PixelSequence,
) -> Result<(PayloadHeader, Vec<u8>), PipelineError> {
    let integrity = |source: CodecError| PipelineError::Integrity { source };

    let mut head = codec::extract_bits(stego, sequence, HEADER_BITS).map_err(integrity)?;
    let header = PayloadHeader::parse(&mut head).map_err(integrity)?;

    let body_bits = header.length as usize * 8;
    let total = HEADER_BITS + body_bits;
    if total > stego.sample_count() {
        // A length no embedder could have produced: garbage that happened to
        // carry a valid magic, or a truncated image.
        return Err(integrity(CodecError::CountExceedsSamples {
            requested: total,
            available: stego.sample_count(),
        }));
    }
    let bits = codec::extract_bits(stego, sequence, total).map_err(integrity)?;
    let bytes = bits.to_bytes().map_err(integrity)?;
    let ciphertext = bytes[HEADER_BITS / 8..].to_vec();
    Ok((header, ciphertext))
}
