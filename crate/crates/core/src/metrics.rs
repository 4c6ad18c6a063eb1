//! Image-quality metrics and the composite embedding fitness.
//!
//! All metrics compare two [`RasterImage`]s of identical dimensions. SSIM and
//! UQI are evaluated over non-overlapping `window_size`-square windows per
//! channel (edge windows are clipped to the image bounds so every sample
//! belongs to exactly one window), and the per-window scores are averaged
//! across all three channels.
//!
//! Window sums are accumulated in integers, which keeps them exact for 8-bit
//! samples; the incremental [`FlipAccumulator`] therefore reproduces the
//! full-recompute path per window bit for bit.

use thiserror::Error;

use crate::raster::{RasterImage, CHANNELS, SAMPLE_MAX};
use crate::real::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("images differ in size: {aw}x{ah} vs {bw}x{bh}")]
    DimensionMismatch { aw: u32, ah: u32, bw: u32, bh: u32 },
    #[error("window size must be at least 2 (got {0})")]
    WindowTooSmall(usize),
    #[error("UQI is undefined for this pair: every window denominator is degenerate")]
    UqiUndefined,
    #[error("flip index {index} out of range for {len} samples")]
    FlipOutOfRange { index: usize, len: usize },
}

/// Weights and constants of the composite fitness `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessConfig<F> {
    /// Weight of the SSIM term; the PSNR term gets `1 - alpha`.
    pub alpha: F,
    /// Ceiling applied to PSNR so identical images stay finite, in dB.
    pub psnr_cap: F,
    /// SSIM luminance stabilizer, `(0.01 * 255)^2` by default.
    pub ssim_c1: F,
    /// SSIM contrast stabilizer, `(0.03 * 255)^2` by default.
    pub ssim_c2: F,
    /// Side length of the non-overlapping SSIM windows, in pixels.
    pub window_size: usize,
}

impl<F: Real> Default for FitnessConfig<F> {
    fn default() -> Self {
        Self {
            alpha: F::of(0.5),
            psnr_cap: F::of(100.0),
            ssim_c1: F::of(6.5025),
            ssim_c2: F::of(58.5225),
            window_size: 8,
        }
    }
}

/// First and second moments of one window pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats<F> {
    pub mean_u: F,
    pub mean_v: F,
    pub var_u: F,
    pub var_v: F,
    pub cov_uv: F,
}

/// Integer sample sums of one window pair; exact for 8-bit samples.
#[derive(Debug, Clone, Copy, Default)]
struct WindowSums {
    n: i64,
    su: i64,
    sv: i64,
    suu: i64,
    svv: i64,
    suv: i64,
}

impl WindowSums {
    fn stats<F: Real>(&self) -> WindowStats<F> {
        let n = F::of(self.n as f64);
        let mean_u = F::of(self.su as f64) / n;
        let mean_v = F::of(self.sv as f64) / n;
        // n*suu - su^2 stays well inside the exact integer range of f64.
        let nn = F::of((self.n * self.n) as f64);
        let var_u = F::of((self.n * self.suu - self.su * self.su) as f64) / nn;
        let var_v = F::of((self.n * self.svv - self.sv * self.sv) as f64) / nn;
        let cov_uv = F::of((self.n * self.suv - self.su * self.sv) as f64) / nn;
        WindowStats {
            mean_u,
            mean_v,
            var_u,
            var_v,
            cov_uv,
        }
    }
}

/// SSIM of a single window, `(2uv+c1)(2cov+c2) / ((u^2+v^2+c1)(vu+vv+c2))`.
fn window_ssim<F: Real>(stats: &WindowStats<F>, c1: F, c2: F) -> F {
    let two = F::of(2.0);
    let num = (two * stats.mean_u * stats.mean_v + c1) * (two * stats.cov_uv + c2);
    let den = (stats.mean_u * stats.mean_u + stats.mean_v * stats.mean_v + c1)
        * (stats.var_u + stats.var_v + c2);
    num / den
}

/// UQI of a single window, or `None` when the unstabilized denominator is
/// too close to zero to be meaningful.
fn window_uqi<F: Real>(stats: &WindowStats<F>) -> Option<F> {
    let den = (stats.mean_u * stats.mean_u + stats.mean_v * stats.mean_v)
        * (stats.var_u + stats.var_v);
    if den.abs() < F::of(1e-12) {
        return None;
    }
    let four = F::of(4.0);
    Some(four * stats.cov_uv * stats.mean_u * stats.mean_v / den)
}

fn check_dimensions(a: &RasterImage, b: &RasterImage) -> Result<(), MetricsError> {
    if !a.same_dimensions(b) {
        return Err(MetricsError::DimensionMismatch {
            aw: a.width(),
            ah: a.height(),
            bw: b.width(),
            bh: b.height(),
        });
    }
    Ok(())
}

/// Non-overlapping window layout for one image size. Edge windows are
/// clipped, so the grid tiles the image exactly.
#[derive(Debug, Clone, Copy)]
struct WindowGrid {
    win: usize,
    cols: usize,
    rows: usize,
}

impl WindowGrid {
    fn new(width: u32, height: u32, win: usize) -> Result<Self, MetricsError> {
        if win < 2 {
            return Err(MetricsError::WindowTooSmall(win));
        }
        Ok(Self {
            win,
            cols: (width as usize).div_ceil(win),
            rows: (height as usize).div_ceil(win),
        })
    }

    fn per_channel(&self) -> usize {
        self.cols * self.rows
    }

    fn total(&self) -> usize {
        self.per_channel() * CHANNELS
    }

    fn id_of(&self, x: u32, y: u32, channel: usize) -> usize {
        channel * self.per_channel() + (y as usize / self.win) * self.cols + x as usize / self.win
    }

    /// Pixel bounds `(x0, x1, y0, y1)` of window `(wx, wy)` clipped to the
    /// image.
    fn bounds(&self, wx: usize, wy: usize, width: u32, height: u32) -> (usize, usize, usize, usize) {
        let x0 = wx * self.win;
        let y0 = wy * self.win;
        let x1 = (x0 + self.win).min(width as usize);
        let y1 = (y0 + self.win).min(height as usize);
        (x0, x1, y0, y1)
    }
}

fn pair_window_sums(
    a: &RasterImage,
    b: &RasterImage,
    grid: &WindowGrid,
    channel: usize,
    wx: usize,
    wy: usize,
) -> WindowSums {
    let (x0, x1, y0, y1) = grid.bounds(wx, wy, a.width(), a.height());
    let width = a.width() as usize;
    let sa = a.samples();
    let sb = b.samples();
    let mut sums = WindowSums::default();
    for y in y0..y1 {
        let row = (y * width + x0) * CHANNELS + channel;
        for i in 0..(x1 - x0) {
            let u = sa[row + i * CHANNELS] as i64;
            let v = sb[row + i * CHANNELS] as i64;
            sums.n += 1;
            sums.su += u;
            sums.sv += v;
            sums.suu += u * u;
            sums.svv += v * v;
            sums.suv += u * v;
        }
    }
    sums
}

/// Mean squared error over all samples of both images.
pub fn mse<F: Real>(a: &RasterImage, b: &RasterImage) -> Result<F, MetricsError> {
    check_dimensions(a, b)?;
    let mut sum: u64 = 0;
    for (&u, &v) in a.samples().iter().zip(b.samples()) {
        let d = u as i64 - v as i64;
        sum += (d * d) as u64;
    }
    Ok(F::of(sum as f64) / F::of(a.sample_count() as f64))
}

fn psnr_from_mse<F: Real>(mse: F, cap: F) -> F {
    if mse <= F::zero() {
        return cap;
    }
    let raw = F::of(10.0) * (F::of(SAMPLE_MAX * SAMPLE_MAX) / mse).log10();
    raw.min(cap)
}

/// Peak signal-to-noise ratio in dB, capped at `cfg.psnr_cap`.
pub fn psnr<F: Real>(
    a: &RasterImage,
    b: &RasterImage,
    cfg: &FitnessConfig<F>,
) -> Result<F, MetricsError> {
    Ok(psnr_from_mse(mse::<F>(a, b)?, cfg.psnr_cap))
}

/// Universal image quality index, averaged over non-degenerate windows.
pub fn uqi<F: Real>(a: &RasterImage, b: &RasterImage, window: usize) -> Result<F, MetricsError> {
    check_dimensions(a, b)?;
    let grid = WindowGrid::new(a.width(), a.height(), window)?;
    let mut sum = F::zero();
    let mut used = 0usize;
    for channel in 0..CHANNELS {
        for wy in 0..grid.rows {
            for wx in 0..grid.cols {
                let stats = pair_window_sums(a, b, &grid, channel, wx, wy).stats::<F>();
                if let Some(q) = window_uqi(&stats) {
                    sum += q;
                    used += 1;
                }
            }
        }
    }
    if used == 0 {
        return Err(MetricsError::UqiUndefined);
    }
    Ok(sum / F::of(used as f64))
}

/// Structural similarity index, averaged over all windows of all channels.
pub fn ssim<F: Real>(
    a: &RasterImage,
    b: &RasterImage,
    cfg: &FitnessConfig<F>,
) -> Result<F, MetricsError> {
    check_dimensions(a, b)?;
    let grid = WindowGrid::new(a.width(), a.height(), cfg.window_size)?;
    let mut sum = F::zero();
    for channel in 0..CHANNELS {
        for wy in 0..grid.rows {
            for wx in 0..grid.cols {
                let stats = pair_window_sums(a, b, &grid, channel, wx, wy).stats::<F>();
                sum += window_ssim(&stats, cfg.ssim_c1, cfg.ssim_c2);
            }
        }
    }
    Ok(sum / F::of(grid.total() as f64))
}

/// Composite fitness `Z = alpha * SSIM + (1 - alpha) * PSNR / 100`.
pub fn fitness<F: Real>(
    stego: &RasterImage,
    reference: &RasterImage,
    cfg: &FitnessConfig<F>,
) -> Result<F, MetricsError> {
    let s = ssim(stego, reference, cfg)?;
    let p = psnr(stego, reference, cfg)?;
    Ok(cfg.alpha * s + (F::one() - cfg.alpha) * p / F::of(100.0))
}

/// All metrics of one image pair, as reported by the CLI.
#[derive(Debug, Clone, Copy)]
pub struct QualityReport<F> {
    pub mse: F,
    pub psnr: F,
    pub ssim: F,
    /// `None` when every UQI window is degenerate.
    pub uqi: Option<F>,
    pub fitness: F,
}

/// Computes the full metric suite for one pair.
pub fn report<F: Real>(
    stego: &RasterImage,
    reference: &RasterImage,
    cfg: &FitnessConfig<F>,
) -> Result<QualityReport<F>, MetricsError> {
    let mse_v = mse(stego, reference)?;
    let psnr_v = psnr_from_mse(mse_v, cfg.psnr_cap);
    let ssim_v = ssim(stego, reference, cfg)?;
    let uqi_v = match uqi(stego, reference, cfg.window_size) {
        Ok(q) => Some(q),
        Err(MetricsError::UqiUndefined) => None,
        Err(e) => return Err(e),
    };
    Ok(QualityReport {
        mse: mse_v,
        psnr: psnr_v,
        ssim: ssim_v,
        uqi: uqi_v,
        fitness: cfg.alpha * ssim_v + (F::one() - cfg.alpha) * psnr_v / F::of(100.0),
    })
}

/// Incremental fitness of LSB flips against a fixed reference image.
///
/// `fitness_delta(flips)` returns exactly what building the flipped image and
/// calling [`fitness`] against the reference would return, but touches only
/// the windows the flips land in. A flip toggles the LSB of one reference
/// sample; listing the same index twice toggles it back.
pub struct FlipAccumulator<F> {
    reference: RasterImage,
    cfg: FitnessConfig<F>,
    /// Per-window `(n, su, suu)` of the reference, exact integers.
    base: Vec<(i64, i64, i64)>,
    /// Window id of every sample.
    window_of: Vec<u32>,
    /// Scratch per window: sum of deltas, sum of `ref * delta`, flip count.
    dsum: Vec<i64>,
    rdsum: Vec<i64>,
    fcount: Vec<i64>,
    in_touched: Vec<bool>,
    touched: Vec<u32>,
    flipped: Vec<bool>,
    flip_list: Vec<usize>,
}

impl<F: Real> FlipAccumulator<F> {
    pub fn new(reference: RasterImage, cfg: FitnessConfig<F>) -> Result<Self, MetricsError> {
        let grid = WindowGrid::new(reference.width(), reference.height(), cfg.window_size)?;
        let total = grid.total();
        let mut base = vec![(0i64, 0i64, 0i64); total];
        let mut window_of = vec![0u32; reference.sample_count()];
        for k in 0..reference.sample_count() {
            let (x, y, c) = reference.locate(k);
            let wid = grid.id_of(x, y, c);
            window_of[k] = wid as u32;
            let s = reference.samples()[k] as i64;
            let cell = &mut base[wid];
            cell.0 += 1;
            cell.1 += s;
            cell.2 += s * s;
        }
        let sample_count = reference.sample_count();
        Ok(Self {
            reference,
            cfg,
            base,
            window_of,
            dsum: vec![0; total],
            rdsum: vec![0; total],
            fcount: vec![0; total],
            in_touched: vec![false; total],
            touched: Vec::new(),
            flipped: vec![false; sample_count],
            flip_list: Vec::new(),
        })
    }

    pub fn reference(&self) -> &RasterImage {
        &self.reference
    }

    /// Fitness of the reference with the LSBs at `flips` toggled, versus the
    /// unmodified reference.
    pub fn fitness_delta<I>(&mut self, flips: I) -> Result<F, MetricsError>
    where
        I: IntoIterator<Item = usize>,
    {
        let result = self.apply_and_score(flips);
        self.reset_scratch();
        result
    }

    fn apply_and_score<I>(&mut self, flips: I) -> Result<F, MetricsError>
    where
        I: IntoIterator<Item = usize>,
    {
        let len = self.reference.sample_count();
        let samples = self.reference.samples();
        for index in flips {
            if index >= len {
                return Err(MetricsError::FlipOutOfRange { index, len });
            }
            let wid = self.window_of[index] as usize;
            if !self.in_touched[wid] {
                self.in_touched[wid] = true;
                self.touched.push(wid as u32);
            }
            let r = samples[index] as i64;
            // XOR of the LSB moves an even sample up and an odd sample down.
            let delta = if r & 1 == 0 { 1 } else { -1 };
            if self.flipped[index] {
                self.flipped[index] = false;
                self.dsum[wid] -= delta;
                self.rdsum[wid] -= r * delta;
                self.fcount[wid] -= 1;
            } else {
                self.flipped[index] = true;
                self.flip_list.push(index);
                self.dsum[wid] += delta;
                self.rdsum[wid] += r * delta;
                self.fcount[wid] += 1;
            }
        }

        let mut flips_total: i64 = 0;
        let window_total = self.base.len();
        let mut ssim_sum = F::of(window_total as f64 - self.touched.len() as f64);
        for &wid in &self.touched {
            let wid = wid as usize;
            let (n, su, suu) = self.base[wid];
            flips_total += self.fcount[wid];
            let sums = WindowSums {
                n,
                su: su + self.dsum[wid],
                sv: su,
                suu: suu + 2 * self.rdsum[wid] + self.fcount[wid],
                svv: suu,
                suv: suu + self.rdsum[wid],
            };
            ssim_sum += window_ssim(&sums.stats::<F>(), self.cfg.ssim_c1, self.cfg.ssim_c2);
        }

        let ssim = ssim_sum / F::of(window_total as f64);
        let mse = F::of(flips_total as f64) / F::of(len as f64);
        let psnr = psnr_from_mse(mse, self.cfg.psnr_cap);
        Ok(self.cfg.alpha * ssim + (F::one() - self.cfg.alpha) * psnr / F::of(100.0))
    }

    fn reset_scratch(&mut self) {
        for &wid in &self.touched {
            let wid = wid as usize;
            self.dsum[wid] = 0;
            self.rdsum[wid] = 0;
            self.fcount[wid] = 0;
            self.in_touched[wid] = false;
        }
        self.touched.clear();
        for &index in &self.flip_list {
            self.flipped[index] = false;
        }
        self.flip_list.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force reference implementations, deliberately written as a
    /// separate route (per-pixel loops, two-pass f64 statistics) from the
    /// integer-sum production path.
    mod reference {
        use crate::raster::{RasterImage, CHANNELS};

        fn window_values(img: &RasterImage, c: usize, x0: usize, x1: usize, y0: usize, y1: usize) -> Vec<f64> {
            let mut out = Vec::new();
            for y in y0..y1 {
                for x in x0..x1 {
                    out.push(img.samples()[(y * img.width() as usize + x) * CHANNELS + c] as f64);
                }
            }
            out
        }

        fn two_pass_stats(u: &[f64], v: &[f64]) -> (f64, f64, f64, f64, f64) {
            let n = u.len() as f64;
            let mu = u.iter().sum::<f64>() / n;
            let mv = v.iter().sum::<f64>() / n;
            let var_u = u.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
            let var_v = v.iter().map(|x| (x - mv) * (x - mv)).sum::<f64>() / n;
            let cov = u
                .iter()
                .zip(v)
                .map(|(x, y)| (x - mu) * (y - mv))
                .sum::<f64>()
                / n;
            (mu, mv, var_u, var_v, cov)
        }

        pub fn mse(a: &RasterImage, b: &RasterImage) -> f64 {
            let mut acc = 0.0;
            for (&u, &v) in a.samples().iter().zip(b.samples()) {
                let d = u as f64 - v as f64;
                acc += d * d;
            }
            acc / a.sample_count() as f64
        }

        pub fn psnr(a: &RasterImage, b: &RasterImage, cap: f64) -> f64 {
            let m = mse(a, b);
            if m == 0.0 {
                return cap;
            }
            (10.0 * (255.0f64 * 255.0 / m).log10()).min(cap)
        }

        fn for_each_window(
            width: u32,
            height: u32,
            win: usize,
            mut f: impl FnMut(usize, usize, usize, usize, usize),
        ) {
            for c in 0..CHANNELS {
                for y0 in (0..height as usize).step_by(win) {
                    for x0 in (0..width as usize).step_by(win) {
                        let x1 = (x0 + win).min(width as usize);
                        let y1 = (y0 + win).min(height as usize);
                        f(c, x0, x1, y0, y1);
                    }
                }
            }
        }

        pub fn ssim(a: &RasterImage, b: &RasterImage, win: usize, c1: f64, c2: f64) -> f64 {
            let mut sum = 0.0;
            let mut count = 0usize;
            for_each_window(a.width(), a.height(), win, |c, x0, x1, y0, y1| {
                let u = window_values(a, c, x0, x1, y0, y1);
                let v = window_values(b, c, x0, x1, y0, y1);
                let (mu, mv, vu, vv, cov) = two_pass_stats(&u, &v);
                sum += (2.0 * mu * mv + c1) * (2.0 * cov + c2)
                    / ((mu * mu + mv * mv + c1) * (vu + vv + c2));
                count += 1;
            });
            sum / count as f64
        }

        pub fn uqi(a: &RasterImage, b: &RasterImage, win: usize) -> Option<f64> {
            let mut sum = 0.0;
            let mut used = 0usize;
            for_each_window(a.width(), a.height(), win, |c, x0, x1, y0, y1| {
                let u = window_values(a, c, x0, x1, y0, y1);
                let v = window_values(b, c, x0, x1, y0, y1);
                let (mu, mv, vu, vv, cov) = two_pass_stats(&u, &v);
                let den = (mu * mu + mv * mv) * (vu + vv);
                if den.abs() >= 1e-12 {
                    sum += 4.0 * cov * mu * mv / den;
                    used += 1;
                }
            });
            (used > 0).then(|| sum / used as f64)
        }
    }

    fn random_image(width: u32, height: u32, seed: u64) -> RasterImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..width as usize * height as usize * CHANNELS)
            .map(|_| rng.gen())
            .collect();
        RasterImage::new(width, height, samples).unwrap()
    }

    fn random_pair(width: u32, height: u32, seed: u64) -> (RasterImage, RasterImage) {
        (
            random_image(width, height, seed),
            random_image(width, height, seed.wrapping_add(0x9e3779b9)),
        )
    }

    #[test]
    fn mse_of_identical_images_is_zero() {
        let x = random_image(4, 4, 1);
        assert_eq!(mse::<f64>(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn mse_of_two_differing_samples() {
        // Only samples 0 and 1 differ, by 1 and 2; remaining channels equal.
        let a = RasterImage::new(2, 1, vec![10, 20, 7, 7, 7, 7]).unwrap();
        let b = RasterImage::new(2, 1, vec![11, 22, 7, 7, 7, 7]).unwrap();
        let got = mse::<f64>(&a, &b).unwrap();
        assert_eq!(got, (1.0 + 4.0) / 6.0);
        assert_eq!(got, mse::<f64>(&b, &a).unwrap());
    }

    #[test]
    fn mse_rejects_dimension_mismatch() {
        let a = RasterImage::filled(2, 2, 0).unwrap();
        let b = RasterImage::filled(2, 3, 0).unwrap();
        assert!(matches!(
            mse::<f64>(&a, &b),
            Err(MetricsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mse_matches_reference_on_random_pairs() {
        for seed in 0..8 {
            let (a, b) = random_pair(4, 4, seed);
            let got = mse::<f64>(&a, &b).unwrap();
            let want = reference::mse(&a, &b);
            assert!((got - want).abs() <= 1e-9 * want.max(1.0));
        }
    }

    #[test]
    fn psnr_caps_identical_images_at_100() {
        let x = random_image(4, 4, 2);
        assert_eq!(psnr::<f64>(&x, &x, &FitnessConfig::default()).unwrap(), 100.0);
    }

    #[test]
    fn psnr_of_full_scale_error_is_zero() {
        let a = RasterImage::filled(4, 4, 0).unwrap();
        let b = RasterImage::filled(4, 4, 255).unwrap();
        let got = psnr::<f64>(&a, &b, &FitnessConfig::default()).unwrap();
        assert!(got.abs() < 1e-12, "psnr {got}");
    }

    #[test]
    fn psnr_of_mse_2_5() {
        // Squared diffs 9+4+1+1 over 6 samples: MSE = 2.5.
        let a = RasterImage::new(2, 1, vec![0, 0, 0, 0, 0, 0]).unwrap();
        let b = RasterImage::new(2, 1, vec![3, 2, 1, 1, 0, 0]).unwrap();
        assert_eq!(mse::<f64>(&a, &b).unwrap(), 2.5);
        let got = psnr::<f64>(&a, &b, &FitnessConfig::default()).unwrap();
        assert!((got - 44.15140352195873).abs() < 1e-9, "psnr {got}");
    }

    #[test]
    fn psnr_matches_reference_on_random_pairs() {
        let cfg = FitnessConfig::<f64>::default();
        for seed in 0..8 {
            let (a, b) = random_pair(4, 4, 50 + seed);
            let got = psnr::<f64>(&a, &b, &cfg).unwrap();
            let want = reference::psnr(&a, &b, cfg.psnr_cap);
            assert!((got - want).abs() <= 1e-9, "got {got} want {want}");
        }
    }

    #[test]
    fn psnr_strictly_decreases_as_mse_increases() {
        let cfg = FitnessConfig::<f64>::default();
        let a = RasterImage::filled(8, 8, 100).unwrap();
        let mut last_psnr = f64::INFINITY;
        let mut last_mse = -1.0;
        for damaged in [1usize, 2, 5, 11, 29, 64, 120, 192] {
            let mut samples = a.samples().to_vec();
            for s in samples.iter_mut().take(damaged) {
                *s += 16;
            }
            let b = RasterImage::new(8, 8, samples).unwrap();
            let m = mse::<f64>(&a, &b).unwrap();
            let p = psnr(&a, &b, &cfg).unwrap();
            assert!(m > last_mse);
            assert!(p < last_psnr, "psnr must strictly decrease below the cap");
            last_mse = m;
            last_psnr = p;
        }
    }

    #[test]
    fn ssim_identity_is_exactly_one() {
        let x = random_image(16, 16, 3);
        assert_eq!(ssim::<f64>(&x, &x, &FitnessConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn ssim_constant_100_vs_101_single_window() {
        let a = RasterImage::filled(8, 8, 100).unwrap();
        let b = RasterImage::filled(8, 8, 101).unwrap();
        let got = ssim::<f64>(&a, &b, &FitnessConfig::default()).unwrap();
        assert!((got - 0.9999505134293563).abs() < 1e-12, "ssim {got}");
    }

    #[test]
    fn ssim_matches_reference_on_random_pairs() {
        let cfg = FitnessConfig::<f64>::default();
        for seed in 0..8 {
            let (a, b) = random_pair(16, 16, 100 + seed);
            let got = ssim::<f64>(&a, &b, &cfg).unwrap();
            let want = reference::ssim(&a, &b, cfg.window_size, cfg.ssim_c1, cfg.ssim_c2);
            assert!((got - want).abs() <= 1e-9, "got {got} want {want}");
        }
    }

    #[test]
    fn ssim_handles_ragged_edge_windows() {
        let cfg = FitnessConfig::<f64>::default();
        let (a, b) = random_pair(13, 11, 7);
        let got = ssim::<f64>(&a, &b, &cfg).unwrap();
        let want = reference::ssim(&a, &b, cfg.window_size, cfg.ssim_c1, cfg.ssim_c2);
        assert!((got - want).abs() <= 1e-9);
        assert_eq!(ssim::<f64>(&a, &a, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn uqi_identity_is_one_for_non_constant_images() {
        let x = random_image(16, 16, 4);
        let got = uqi::<f64>(&x, &x, 8).unwrap();
        assert!((got - 1.0).abs() < 1e-12, "uqi {got}");
    }

    #[test]
    fn uqi_of_constant_images_is_undefined() {
        let a = RasterImage::filled(8, 8, 50).unwrap();
        let b = RasterImage::filled(8, 8, 50).unwrap();
        assert_eq!(uqi::<f64>(&a, &b, 8).unwrap_err(), MetricsError::UqiUndefined);
    }

    #[test]
    fn uqi_matches_reference_on_random_pairs() {
        for seed in 0..8 {
            let (a, b) = random_pair(16, 16, 200 + seed);
            let got = uqi::<f64>(&a, &b, 8).unwrap();
            let want = reference::uqi(&a, &b, 8).unwrap();
            assert!((got - want).abs() <= 1e-9, "got {got} want {want}");
        }
    }

    #[test]
    fn uqi_rejects_window_below_two() {
        let x = random_image(8, 8, 5);
        assert_eq!(
            uqi::<f64>(&x, &x, 1).unwrap_err(),
            MetricsError::WindowTooSmall(1)
        );
    }

    #[test]
    fn fitness_of_identical_images_is_one() {
        let x = random_image(16, 16, 6);
        let got = fitness::<f64>(&x, &x, &FitnessConfig::default()).unwrap();
        assert_eq!(got, 1.0);
    }

    #[test]
    fn fitness_is_affine_in_its_terms() {
        for seed in 0..4 {
            let (a, b) = random_pair(16, 16, 300 + seed);
            for alpha in [0.0, 0.25, 0.5, 1.0] {
                let cfg = FitnessConfig::<f64> {
                    alpha,
                    ..FitnessConfig::default()
                };
                let z = fitness(&a, &b, &cfg).unwrap();
                let s = ssim(&a, &b, &cfg).unwrap();
                let p = psnr(&a, &b, &cfg).unwrap();
                assert!((z - (alpha * s + (1.0 - alpha) * p / 100.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn report_collects_all_metrics() {
        let cfg = FitnessConfig::<f64>::default();
        let (a, b) = random_pair(16, 16, 7);
        let r = report(&a, &b, &cfg).unwrap();
        assert_eq!(r.mse, mse::<f64>(&a, &b).unwrap());
        assert_eq!(r.ssim, ssim(&a, &b, &cfg).unwrap());
        assert_eq!(r.uqi.unwrap(), uqi::<f64>(&a, &b, cfg.window_size).unwrap());
        assert_eq!(r.fitness, fitness(&a, &b, &cfg).unwrap());
    }

    #[test]
    fn flip_accumulator_empty_set_scores_one() {
        let x = random_image(16, 16, 8).with_cleared_lsbs();
        let mut acc = FlipAccumulator::new(x, FitnessConfig::<f64>::default()).unwrap();
        assert_eq!(acc.fitness_delta(std::iter::empty()).unwrap(), 1.0);
    }

    #[test]
    fn flip_accumulator_rejects_out_of_range() {
        let x = RasterImage::filled(4, 4, 9).unwrap();
        let len = x.sample_count();
        let mut acc = FlipAccumulator::new(x, FitnessConfig::<f64>::default()).unwrap();
        assert_eq!(
            acc.fitness_delta([len]).unwrap_err(),
            MetricsError::FlipOutOfRange { index: len, len }
        );
        // The failed call must not leave scratch state behind.
        assert_eq!(acc.fitness_delta(std::iter::empty()).unwrap(), 1.0);
    }

    fn naive_flip_fitness(reference: &RasterImage, flips: &[usize], cfg: &FitnessConfig<f64>) -> f64 {
        let mut samples = reference.samples().to_vec();
        for &k in flips {
            samples[k] ^= 1;
        }
        let flipped = RasterImage::new(reference.width(), reference.height(), samples).unwrap();
        fitness(&flipped, reference, cfg).unwrap()
    }

    #[test]
    fn flip_accumulator_single_flip_matches_naive_path() {
        let cfg = FitnessConfig::<f64>::default();
        let x = random_image(16, 16, 9);
        let mut acc = FlipAccumulator::new(x.clone(), cfg.clone()).unwrap();
        for k in [0usize, 5, 255, 767] {
            let got = acc.fitness_delta([k]).unwrap();
            let want = naive_flip_fitness(&x, &[k], &cfg);
            assert!((got - want).abs() <= 1e-9, "flip {k}: {got} vs {want}");
        }
    }

    #[test]
    fn flip_accumulator_matches_naive_path_on_large_random_flip_sets() {
        let cfg = FitnessConfig::<f64>::default();
        let x = random_image(64, 64, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut acc = FlipAccumulator::new(x.clone(), cfg.clone()).unwrap();
        for _ in 0..4 {
            // Duplicates are intentional: a repeated index must toggle back.
            let flips: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..x.sample_count())).collect();
            let got = acc.fitness_delta(flips.iter().copied()).unwrap();
            let want = naive_flip_fitness(&x, &flips, &cfg);
            assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
        }
    }

    proptest! {
        #[test]
        fn prop_metrics_are_symmetric(seed in 0u64..512) {
            let (a, b) = random_pair(16, 16, seed);
            let cfg = FitnessConfig::<f64>::default();
            prop_assert_eq!(mse::<f64>(&a, &b).unwrap(), mse::<f64>(&b, &a).unwrap());
            prop_assert_eq!(uqi::<f64>(&a, &b, 8).unwrap(), uqi::<f64>(&b, &a, 8).unwrap());
            let s_ab = ssim(&a, &b, &cfg).unwrap();
            let s_ba = ssim(&b, &a, &cfg).unwrap();
            prop_assert!((s_ab - s_ba).abs() < 1e-12);
        }

        #[test]
        fn prop_identity_scores_are_exact(seed in 0u64..512) {
            let x = random_image(16, 16, seed);
            let cfg = FitnessConfig::<f64>::default();
            prop_assert_eq!(ssim::<f64>(&x, &x, &cfg).unwrap(), 1.0);
            let q = uqi::<f64>(&x, &x, 8).unwrap();
            prop_assert!((q - 1.0).abs() < 1e-12);
        }

        #[test]
        fn prop_scores_stay_in_range(seed in 0u64..512) {
            let (a, b) = random_pair(16, 16, seed);
            let cfg = FitnessConfig::<f64>::default();
            let s = ssim::<f64>(&a, &b, &cfg).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
            let q = uqi::<f64>(&a, &b, 8).unwrap();
            prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&q));
        }

        #[test]
        fn prop_window_stats_satisfy_cauchy_schwarz(seed in 0u64..512) {
            let (a, b) = random_pair(8, 8, seed);
            let grid = WindowGrid::new(8, 8, 8).unwrap();
            for c in 0..CHANNELS {
                let stats = pair_window_sums(&a, &b, &grid, c, 0, 0).stats::<f64>();
                prop_assert!(stats.var_u >= 0.0);
                prop_assert!(stats.var_v >= 0.0);
                prop_assert!(stats.cov_uv.abs() <= (stats.var_u * stats.var_v).sqrt() + 1e-9);
            }
        }

        #[test]
        fn prop_flip_accumulator_equals_naive(seed in 0u64..128) {
            let cfg = FitnessConfig::<f64>::default();
            let x = random_image(16, 16, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
            let count = rng.gen_range(0..64);
            let flips: Vec<usize> =
                (0..count).map(|_| rng.gen_range(0..x.sample_count())).collect();
            let mut acc = FlipAccumulator::new(x.clone(), cfg.clone()).unwrap();
            let got = acc.fitness_delta(flips.iter().copied()).unwrap();
            let want = naive_flip_fitness(&x, &flips, &cfg);
            prop_assert!((got - want).abs() <= 1e-9);
        }
    }
}
