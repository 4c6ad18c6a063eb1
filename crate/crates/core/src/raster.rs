//! The pixel grid that carries hidden data.
//!
//! A [`RasterImage`] stores 8-bit RGB samples in row-major, channel-interleaved
//! order (R, G, B per pixel). Every operation in this crate addresses samples
//! through the flat index space `0..width*height*3`; index `k` maps to pixel
//! `k / 3` (row-major) and channel `k % 3`.

use thiserror::Error;

/// Number of channels per pixel. The toolkit only handles RGB covers.
pub const CHANNELS: usize = 3;

/// Largest value an 8-bit sample can take.
pub const SAMPLE_MAX: f64 = 255.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RasterError {
    #[error("sample buffer holds {got} values but {width}x{height} RGB needs {expected}")]
    SampleCountMismatch {
        width: u32,
        height: u32,
        expected: usize,
        got: usize,
    },
    #[error("image dimensions must be non-zero (got {width}x{height})")]
    EmptyImage { width: u32, height: u32 },
    #[error("sample index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },
}

/// 8-bit RGB pixel grid; the cover/stego medium.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    samples: Vec<u8>,
}

impl RasterImage {
    /// Wraps a flat RGB sample buffer. The buffer length must be
    /// `width * height * 3`.
    pub fn new(width: u32, height: u32, samples: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage { width, height });
        }
        let expected = width as usize * height as usize * CHANNELS;
        if samples.len() != expected {
            return Err(RasterError::SampleCountMismatch {
                width,
                height,
                expected,
                got: samples.len(),
            });
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    /// Solid-color image, mostly useful in tests.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self, RasterError> {
        let len = width as usize * height as usize * CHANNELS;
        Self::new(width, height, vec![value; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Total number of samples (`width * height * 3`); the flat index space.
    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn sample(&self, index: usize) -> Result<u8, RasterError> {
        self.samples
            .get(index)
            .copied()
            .ok_or(RasterError::IndexOutOfRange {
                index,
                len: self.samples.len(),
            })
    }

    /// Flat index of `(x, y, channel)`.
    pub fn sample_index(&self, x: u32, y: u32, channel: usize) -> usize {
        (y as usize * self.width as usize + x as usize) * CHANNELS + channel
    }

    /// Inverse of [`sample_index`](Self::sample_index): `(x, y, channel)` of a
    /// flat sample index.
    pub fn locate(&self, index: usize) -> (u32, u32, usize) {
        let pixel = index / CHANNELS;
        let channel = index % CHANNELS;
        let x = (pixel % self.width as usize) as u32;
        let y = (pixel / self.width as usize) as u32;
        (x, y, channel)
    }

    pub fn same_dimensions(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Copy with every sample's least significant bit cleared. Embedding only
    /// rewrites LSBs, so this view is identical for a cover and any stego
    /// image produced from it.
    pub fn with_cleared_lsbs(&self) -> Self {
        let samples = self.samples.iter().map(|&s| s & 0xFE).collect();
        Self {
            width: self.width,
            height: self.height,
            samples,
        }
    }
}
