//! Payload framing and 1-LSB embedding along a pixel sequence.
//!
//! The wire format is frozen: an 88-bit header (16-bit magic `0x5346`,
//! 8-bit version `0x01`, 32-bit big-endian ciphertext byte count, 32-bit
//! big-endian CRC-32 of the ciphertext) followed by the ciphertext bits,
//! written most-significant-bit first into the LSBs of the samples the
//! sequence visits. The header rides the first 88 sequence positions so an
//! extractor can learn the payload length before reading the body.

use thiserror::Error;

use crate::raster::RasterImage;
use crate::selector::PixelSequence;

/// Header magic, `"SF"` interpreted big-endian.
pub const MAGIC: u16 = 0x5346;
pub const VERSION: u8 = 0x01;
/// Serialized header size in bits.
pub const HEADER_BITS: usize = 88;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("payload needs {required} bit slots but the image offers {available}")]
    CapacityExceeded { required: usize, available: usize },
    #[error("requested {requested} bits but the image offers {available}")]
    CountExceedsSamples { requested: usize, available: usize },
    #[error("bit stream ended after {available} bits, needed {needed}")]
    UnexpectedEnd { needed: usize, available: usize },
    #[error("bit count {0} is not a whole number of bytes")]
    PartialByte(usize),
    #[error("bad magic 0x{found:04x}: not a frogsteg image or wrong key")]
    BadMagic { found: u16 },
    #[error("unsupported format version {found}")]
    UnsupportedVersion { found: u8 },
    #[error("checksum mismatch: stored 0x{stored:08x}, computed 0x{computed:08x} — corrupted stego or wrong parameters")]
    CrcMismatch { stored: u32, computed: u32 },
}

/// A growable sequence of bits with a read cursor. Bytes serialize
/// most-significant-bit first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<u8>,
    cursor: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bits: Vec::with_capacity(bits),
            cursor: 0,
        }
    }

    /// MSB-first expansion of a byte slice.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut stream = Self::with_capacity(bytes.len() * 8);
        stream.push_bytes(bytes);
        stream
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn push_bit(&mut self, bit: u8) {
        self.bits.push(bit & 1);
    }

    pub fn push_bytes(&mut self, bytes: &[u8]) {
        for &byte in bytes {
            for shift in (0..8).rev() {
                self.bits.push((byte >> shift) & 1);
            }
        }
    }

    fn push_value(&mut self, value: u64, width: usize) {
        for shift in (0..width).rev() {
            self.bits.push(((value >> shift) & 1) as u8);
        }
    }

    /// Packs the whole stream back into bytes; the length must be a
    /// multiple of 8.
    pub fn to_bytes(&self) -> Result<Vec<u8>, CodecError> {
        if self.bits.len() % 8 != 0 {
            return Err(CodecError::PartialByte(self.bits.len()));
        }
        Ok(self
            .bits
            .chunks(8)
            .map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b))
            .collect())
    }

    pub fn rewind(&mut self) {
        self.cursor = 0;
    }

    /// Reads `width` bits at the cursor as a big-endian value.
    pub fn read_value(&mut self, width: usize) -> Result<u64, CodecError> {
        if self.cursor + width > self.bits.len() {
            return Err(CodecError::UnexpectedEnd {
                needed: width,
                available: self.bits.len() - self.cursor,
            });
        }
        let mut value = 0u64;
        for _ in 0..width {
            value = (value << 1) | self.bits[self.cursor] as u64;
            self.cursor += 1;
        }
        Ok(value)
    }

    /// Reads `count` whole bytes at the cursor.
    pub fn read_bytes(&mut self, count: usize) -> Result<Vec<u8>, CodecError> {
        (0..count)
            .map(|_| self.read_value(8).map(|v| v as u8))
            .collect()
    }
}

/// Fixed 88-bit frame prepended to the ciphertext.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadHeader {
    /// Ciphertext byte count.
    pub length: u32,
    /// CRC-32 (reflected polynomial 0xEDB88320) of the ciphertext.
    pub crc32: u32,
}

impl PayloadHeader {
    pub fn for_ciphertext(ciphertext: &[u8]) -> Self {
        Self {
            length: ciphertext.len() as u32,
            crc32: crc32fast::hash(ciphertext),
        }
    }

    pub fn to_bits(self) -> BitStream {
        let mut bits = BitStream::with_capacity(HEADER_BITS);
        bits.push_value(MAGIC as u64, 16);
        bits.push_value(VERSION as u64, 8);
        bits.push_value(self.length as u64, 32);
        bits.push_value(self.crc32 as u64, 32);
        bits
    }

    /// Parses and validates the 88 bits at the stream cursor. The checksum
    /// is carried along and checked against the ciphertext once that has
    /// been extracted.
    pub fn parse(bits: &mut BitStream) -> Result<Self, CodecError> {
        let magic = bits.read_value(16)? as u16;
        if magic != MAGIC {
            return Err(CodecError::BadMagic { found: magic });
        }
        let version = bits.read_value(8)? as u8;
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion { found: version });
        }
        let length = bits.read_value(32)? as u32;
        let crc32 = bits.read_value(32)? as u32;
        Ok(Self { length, crc32 })
    }

    /// Post-extraction integrity check of the recovered ciphertext.
    pub fn verify(&self, ciphertext: &[u8]) -> Result<(), CodecError> {
        let computed = crc32fast::hash(ciphertext);
        if computed != self.crc32 {
            return Err(CodecError::CrcMismatch {
                stored: self.crc32,
                computed,
            });
        }
        Ok(())
    }
}

/// Maximum payload bytes an image can carry once the header is accounted
/// for.
pub fn capacity(image: &RasterImage) -> usize {
    image.sample_count().saturating_sub(HEADER_BITS) / 8
}

/// Writes the stream into the LSBs of the samples the sequence visits, in
/// order. All other samples are byte-identical to the cover, so the output
/// has the cover's exact dimensions and file size class.
pub fn embed_bits(
    cover: &RasterImage,
    sequence: &PixelSequence,
    bits: &BitStream,
) -> Result<RasterImage, CodecError> {
    let available = cover.sample_count();
    if bits.len() > available {
        return Err(CodecError::CapacityExceeded {
            required: bits.len(),
            available,
        });
    }
    let mut samples = cover.samples().to_vec();
    for (slot, &bit) in sequence.indices().zip(bits.bits()) {
        samples[slot] = (samples[slot] & 0xFE) | bit;
    }
    Ok(RasterImage::new(cover.width(), cover.height(), samples)
        .expect("dimensions unchanged"))
}

/// Reads `count` LSBs along the sequence.
pub fn extract_bits(
    stego: &RasterImage,
    sequence: &PixelSequence,
    count: usize,
) -> Result<BitStream, CodecError> {
    let available = stego.sample_count();
    if count > available {
        return Err(CodecError::CountExceedsSamples {
            requested: count,
            available,
        });
    }
    let mut bits = BitStream::with_capacity(count);
    for slot in sequence.indices().take(count) {
        bits.push_bit(stego.samples()[slot] & 1);
    }
    Ok(bits)
}
