//! Deterministic texture synthesis for benchmark corpora.
//!
//! The bench harness and the acceptance suite need covers with known,
//! reproducible statistics rather than copyrighted photographs. The styles
//! here span the kind of imagery steganography papers test on: star fields
//! and nebulae (low-key, mostly dark), vignetted and gradient scenes (dark
//! regions at the frame edges), and bright cloud fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::RasterImage;

/// Texture families with distinct brightness and variance profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureStyle {
    /// Near-black sky with scattered bright stars.
    StarField,
    /// Multi-octave noise pushed into deep shadow, tinted per channel.
    Nebula,
    /// Bright, smooth multi-octave noise.
    Clouds,
    /// Vertical dark-to-bright ramp with mild noise.
    Gradient,
    /// Mid-bright noise under a radial falloff that darkens the borders.
    Vignette,
}

impl TextureStyle {
    pub const ALL: [TextureStyle; 5] = [
        TextureStyle::StarField,
        TextureStyle::Nebula,
        TextureStyle::Clouds,
        TextureStyle::Gradient,
        TextureStyle::Vignette,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TextureStyle::StarField => "starfield",
            TextureStyle::Nebula => "nebula",
            TextureStyle::Clouds => "clouds",
            TextureStyle::Gradient => "gradient",
            TextureStyle::Vignette => "vignette",
        }
    }
}

/// Value noise in `[0,1]`: bilinear interpolation of a seeded lattice.
struct ValueNoise {
    lattice: Vec<f64>,
    cols: usize,
    rows: usize,
    cell: f64,
}

impl ValueNoise {
    fn new(width: u32, height: u32, period: f64, rng: &mut ChaCha8Rng) -> Self {
        let cols = (width as f64 / period).ceil() as usize + 2;
        let rows = (height as f64 / period).ceil() as usize + 2;
        let lattice = (0..cols * rows).map(|_| rng.gen::<f64>()).collect();
        Self {
            lattice,
            cols,
            rows,
            cell: period,
        }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let gx = x / self.cell;
        let gy = y / self.cell;
        let x0 = gx.floor() as usize;
        let y0 = gy.floor() as usize;
        let fx = gx - gx.floor();
        let fy = gy - gy.floor();
        // Smoothstep keeps cell borders from showing as creases.
        let sx = fx * fx * (3.0 - 2.0 * fx);
        let sy = fy * fy * (3.0 - 2.0 * fy);
        let x1 = (x0 + 1).min(self.cols - 1);
        let y1 = (y0 + 1).min(self.rows - 1);
        let v00 = self.lattice[y0 * self.cols + x0];
        let v10 = self.lattice[y0 * self.cols + x1];
        let v01 = self.lattice[y1 * self.cols + x0];
        let v11 = self.lattice[y1 * self.cols + x1];
        let top = v00 + (v10 - v00) * sx;
        let bottom = v01 + (v11 - v01) * sx;
        top + (bottom - top) * sy
    }
}

fn octaves(width: u32, height: u32, base_period: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let layers: Vec<(ValueNoise, f64)> = (0..count)
        .map(|i| {
            let period = (base_period / 2f64.powi(i as i32)).max(2.0);
            let amplitude = 0.5f64.powi(i as i32);
            (ValueNoise::new(width, height, period, rng), amplitude)
        })
        .collect();
    let norm: f64 = layers.iter().map(|(_, a)| a).sum();
    let mut field = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        for x in 0..width {
            let v: f64 = layers
                .iter()
                .map(|(noise, amplitude)| amplitude * noise.at(x as f64, y as f64))
                .sum();
            field.push(v / norm);
        }
    }
    field
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Renders one texture. Same `(style, width, height, seed)` always yields
/// the same image.
pub fn generate(style: TextureStyle, width: u32, height: u32, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = width as usize * height as usize;
    let mut samples = vec![0u8; pixels * 3];

    match style {
        TextureStyle::StarField => {
            // Faint sky glow plus point stars with a little chromatic spread.
            let glow = octaves(width, height, width as f64 / 3.0, 2, &mut rng);
            for (i, g) in glow.iter().enumerate() {
                let floor = 2.0 + 14.0 * g;
                samples[i * 3] = clamp_u8(floor * 0.9);
                samples[i * 3 + 1] = clamp_u8(floor * 0.95);
                samples[i * 3 + 2] = clamp_u8(floor * 1.1);
            }
            let stars = pixels / 180;
            for _ in 0..stars {
                let x = rng.gen_range(0..width) as usize;
                let y = rng.gen_range(0..height) as usize;
                let brightness = rng.gen_range(120.0..255.0);
                let tint: f64 = rng.gen_range(0.85..1.0);
                let idx = (y * width as usize + x) * 3;
                samples[idx] = clamp_u8(brightness * tint);
                samples[idx + 1] = clamp_u8(brightness);
                samples[idx + 2] = clamp_u8(brightness * (2.0 - tint).min(1.0));
            }
        }
        TextureStyle::Nebula => {
            let field = octaves(width, height, width as f64 / 4.0, 4, &mut rng);
            let tint = [rng.gen_range(0.7..1.0), rng.gen_range(0.5..0.9), rng.gen_range(0.8..1.0)];
            for (i, v) in field.iter().enumerate() {
                // Cubing pushes most of the frame into deep shadow.
                let lum = 255.0 * v.powi(3);
                for c in 0..3 {
                    samples[i * 3 + c] = clamp_u8(lum * tint[c]);
                }
            }
        }
        TextureStyle::Clouds => {
            let field = octaves(width, height, width as f64 / 4.0, 4, &mut rng);
            for (i, v) in field.iter().enumerate() {
                let lum = 140.0 + 110.0 * v;
                samples[i * 3] = clamp_u8(lum);
                samples[i * 3 + 1] = clamp_u8(lum * 0.98);
                samples[i * 3 + 2] = clamp_u8((lum * 1.02).min(255.0));
            }
        }
        TextureStyle::Gradient => {
            let field = octaves(width, height, width as f64 / 6.0, 3, &mut rng);
            for y in 0..height as usize {
                let ramp = y as f64 / (height.max(2) - 1) as f64;
                for x in 0..width as usize {
                    let i = y * width as usize + x;
                    let lum = 235.0 * ramp + 40.0 * (field[i] - 0.5);
                    for c in 0..3 {
                        samples[i * 3 + c] = clamp_u8(lum);
                    }
                }
            }
        }
        TextureStyle::Vignette => {
            let field = octaves(width, height, width as f64 / 8.0, 3, &mut rng);
            let cx = (width as f64 - 1.0) / 2.0;
            let cy = (height as f64 - 1.0) / 2.0;
            let max_r = (cx * cx + cy * cy).sqrt();
            for y in 0..height as usize {
                for x in 0..width as usize {
                    let i = y * width as usize + x;
                    let dx = x as f64 - cx;
                    let dy = y as f64 - cy;
                    let falloff = 1.0 - (dx * dx + dy * dy).sqrt() / max_r;
                    let lum = (60.0 + 180.0 * field[i]) * falloff * falloff;
                    samples[i * 3] = clamp_u8(lum * 1.05);
                    samples[i * 3 + 1] = clamp_u8(lum);
                    samples[i * 3 + 2] = clamp_u8(lum * 0.9);
                }
            }
        }
    }

    RasterImage::new(width, height, samples).expect("generated buffer matches dimensions")
}

/// A named, reproducible corpus cycling through all styles.
pub fn corpus(width: u32, height: u32, count: usize, seed: u64) -> Vec<(String, RasterImage)> {
    (0..count)
        .map(|i| {
            let style = TextureStyle::ALL[i % TextureStyle::ALL.len()];
            let image = generate(style, width, height, seed.wrapping_add(i as u64));
            (format!("{}_{i:02}", style.name()), image)
        })
        .collect()
}
