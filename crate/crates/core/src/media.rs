//! Lossless image files and raw audio payloads.
//!
//! Covers must survive a byte-exact round trip at the sample level or the
//! embedded LSBs die with the first re-encode, so only PNG and 24-bit BMP
//! are accepted and only 8-bit RGB content. Audio payloads are carried as
//! raw file bytes — no decoding, no resampling — which is what makes the
//! extracted file bit-identical to the original.

use std::fs;
use std::io;
use std::path::Path;

use image::{DynamicImage, ImageFormat, RgbImage};
use thiserror::Error;

use crate::raster::{RasterError, RasterImage};

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("cannot decode {path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot encode {path}: {source}")]
    Encode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: lossless cover required; use PNG or 24-bit BMP")]
    LossyFormat { path: String },
    #[error("{path}: cover must be 8-bit RGB ({found}); run the convert command to strip alpha or expand grayscale")]
    UnsupportedPixelFormat { path: String, found: &'static str },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

fn has_extension(path: &Path, extensions: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let e = e.to_ascii_lowercase();
            extensions.iter().any(|&x| x == e)
        })
        .unwrap_or(false)
}

fn pixel_format_name(image: &DynamicImage) -> &'static str {
    match image {
        DynamicImage::ImageLuma8(_) => "8-bit grayscale",
        DynamicImage::ImageLumaA8(_) => "grayscale with alpha",
        DynamicImage::ImageRgb8(_) => "8-bit RGB",
        DynamicImage::ImageRgba8(_) => "RGB with alpha",
        DynamicImage::ImageLuma16(_) => "16-bit grayscale",
        DynamicImage::ImageLumaA16(_) => "16-bit grayscale with alpha",
        DynamicImage::ImageRgb16(_) => "16-bit RGB",
        DynamicImage::ImageRgba16(_) => "16-bit RGB with alpha",
        DynamicImage::ImageRgb32F(_) => "floating-point RGB",
        DynamicImage::ImageRgba32F(_) => "floating-point RGBA",
        _ => "unknown pixel format",
    }
}

/// Loads a cover or stego image. Only PNG and BMP files holding 8-bit RGB
/// are accepted; anything else names the problem and the way out.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage, MediaError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    if !has_extension(path, &["png", "bmp"]) {
        return Err(MediaError::LossyFormat { path: display });
    }
    let decoded = image::open(path).map_err(|source| map_open_error(path, source))?;
    match decoded {
        DynamicImage::ImageRgb8(rgb) => {
            let (width, height) = rgb.dimensions();
            Ok(RasterImage::new(width, height, rgb.into_raw())?)
        }
        other => Err(MediaError::UnsupportedPixelFormat {
            path: display,
            found: pixel_format_name(&other),
        }),
    }
}

fn map_open_error(path: &Path, source: image::ImageError) -> MediaError {
    let display = path.display().to_string();
    match source {
        image::ImageError::IoError(source) => MediaError::Io {
            path: display,
            source,
        },
        source => MediaError::Decode {
            path: display,
            source,
        },
    }
}

/// Writes an image as PNG or BMP depending on the file extension.
pub fn save_image(image: &RasterImage, path: impl AsRef<Path>) -> Result<(), MediaError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let format = if has_extension(path, &["png"]) {
        ImageFormat::Png
    } else if has_extension(path, &["bmp"]) {
        ImageFormat::Bmp
    } else {
        return Err(MediaError::LossyFormat { path: display });
    };
    let rgb = RgbImage::from_raw(image.width(), image.height(), image.samples().to_vec())
        .expect("sample count invariant");
    rgb.save_with_format(path, format)
        .map_err(|source| match source {
            image::ImageError::IoError(source) => MediaError::Io {
                path: display.clone(),
                source,
            },
            source => MediaError::Encode {
                path: display.clone(),
                source,
            },
        })
}

/// Loads any decodable image and forces it to 8-bit RGB: alpha is dropped,
/// grayscale is expanded, and wider sample types are narrowed. Backs the
/// `convert` command that prepares covers from unsupported inputs.
pub fn load_as_rgb(path: impl AsRef<Path>) -> Result<RasterImage, MediaError> {
    let path = path.as_ref();
    let decoded = image::open(path).map_err(|source| map_open_error(path, source))?;
    let rgb = decoded.to_rgb8();
    let (width, height) = rgb.dimensions();
    Ok(RasterImage::new(width, height, rgb.into_raw())?)
}

/// How a payload file announced itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AudioFormat {
    /// `.wav` extension with a valid RIFF/WAVE magic.
    Wav,
    /// Anything else; carried as opaque bytes.
    Opaque,
}

/// A payload file: its raw bytes plus what the container claims to be.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioPayload {
    pub bytes: Vec<u8>,
    pub format: AudioFormat,
    /// True when the file extension said WAV but the magic disagreed.
    pub wav_magic_missing: bool,
}

fn looks_like_wav(bytes: &[u8]) -> bool {
    bytes.len() >= 12 && &bytes[..4] == b"RIFF" && &bytes[8..12] == b"WAVE"
}

/// Reads a payload file. The bytes are the payload; WAV is only validated,
/// never decoded.
pub fn load_audio(path: impl AsRef<Path>) -> Result<AudioPayload, MediaError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| MediaError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let claims_wav = has_extension(path, &["wav"]);
    let is_wav = looks_like_wav(&bytes);
    Ok(AudioPayload {
        format: if claims_wav && is_wav {
            AudioFormat::Wav
        } else {
            AudioFormat::Opaque
        },
        wav_magic_missing: claims_wav && !is_wav,
        bytes,
    })
}

/// Writes payload bytes back to disk, bit for bit.
pub fn save_audio(bytes: &[u8], path: impl AsRef<Path>) -> Result<(), MediaError> {
    let path = path.as_ref();
    fs::write(path, bytes).map_err(|source| MediaError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::path::PathBuf;

    fn fixture(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(name)
    }

    fn random_image(width: u32, height: u32, seed: u64) -> RasterImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..width as usize * height as usize * 3)
            .map(|_| rng.gen())
            .collect();
        RasterImage::new(width, height, samples).unwrap()
    }

    /// 44-byte WAV header per the published RIFF/WAVE layout, followed by
    /// no sample data.
    fn minimal_wav() -> Vec<u8> {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&36u32.to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes()); // PCM
        bytes.extend_from_slice(&1u16.to_le_bytes()); // mono
        bytes.extend_from_slice(&8000u32.to_le_bytes());
        bytes.extend_from_slice(&16000u32.to_le_bytes());
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&16u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&0u32.to_le_bytes());
        assert_eq!(bytes.len(), 44);
        bytes
    }

    #[test]
    fn png_fixture_decodes_to_known_samples() {
        // Fixture generated with Pillow, not with this crate's encoder.
        let img = load_image(fixture("rgb_2x2.png")).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.height(), 2);
        assert_eq!(
            img.samples(),
            &[10, 20, 30, 40, 50, 60, 70, 80, 90, 200, 150, 100]
        );
    }

    #[test]
    fn bmp_fixture_decodes_to_the_same_samples() {
        let png = load_image(fixture("rgb_2x2.png")).unwrap();
        let bmp = load_image(fixture("rgb_2x2.bmp")).unwrap();
        assert_eq!(png, bmp);
    }

    #[test]
    fn lossy_extension_is_rejected_before_decoding() {
        let err = load_image("cover.jpg").unwrap_err();
        assert!(matches!(err, MediaError::LossyFormat { .. }));
        assert!(err.to_string().contains("lossless"));
    }

    #[test]
    fn alpha_and_grayscale_inputs_point_at_convert() {
        let err = load_image(fixture("rgba_2x2.png")).unwrap_err();
        assert!(matches!(err, MediaError::UnsupportedPixelFormat { .. }));
        assert!(err.to_string().contains("convert"));

        let err = load_image(fixture("gray_2x2.png")).unwrap_err();
        assert!(matches!(err, MediaError::UnsupportedPixelFormat { .. }));
    }

    #[test]
    fn convert_path_drops_alpha_and_expands_grayscale() {
        let rgba = load_as_rgb(fixture("rgba_2x2.png")).unwrap();
        assert_eq!(rgba.samples()[..3], [1, 2, 3]);
        let gray = load_as_rgb(fixture("gray_2x2.png")).unwrap();
        assert_eq!(gray.samples()[..3], [128, 128, 128]);
    }

    #[test]
    fn save_load_identity_on_random_rgb_rasters() {
        let dir = tempfile::tempdir().unwrap();
        for (i, ext) in ["png", "bmp"].iter().enumerate() {
            let img = random_image(13, 7, i as u64);
            let path = dir.path().join(format!("img.{ext}"));
            save_image(&img, &path).unwrap();
            let back = load_image(&path).unwrap();
            assert_eq!(img, back, "{ext} round trip changed samples");
        }
    }

    #[test]
    fn missing_file_reports_io_error() {
        assert!(matches!(
            load_image("no/such/file.png").unwrap_err(),
            MediaError::Io { .. }
        ));
        assert!(matches!(
            load_audio("no/such/file.wav").unwrap_err(),
            MediaError::Io { .. }
        ));
    }

    #[test]
    fn wav_fixture_is_recognized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tone.wav");
        std::fs::write(&path, minimal_wav()).unwrap();
        let payload = load_audio(&path).unwrap();
        assert_eq!(payload.format, AudioFormat::Wav);
        assert!(!payload.wav_magic_missing);
        assert_eq!(payload.bytes, minimal_wav());
    }

    #[test]
    fn wav_extension_without_magic_degrades_to_opaque() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fake.wav");
        std::fs::write(&path, b"definitely not riff").unwrap();
        let payload = load_audio(&path).unwrap();
        assert_eq!(payload.format, AudioFormat::Opaque);
        assert!(payload.wav_magic_missing);
    }

    #[test]
    fn any_binary_file_is_embeddable_as_opaque() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("blob.bin");
        let bytes: Vec<u8> = (0..=255).collect();
        std::fs::write(&path, &bytes).unwrap();
        let payload = load_audio(&path).unwrap();
        assert_eq!(payload.format, AudioFormat::Opaque);
        assert_eq!(payload.bytes, bytes);
    }

    #[test]
    fn audio_save_load_is_byte_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("copy.bin");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bytes: Vec<u8> = (0..4096).map(|_| rng.gen()).collect();
        save_audio(&bytes, &path).unwrap();
        assert_eq!(load_audio(&path).unwrap().bytes, bytes);
    }
}
