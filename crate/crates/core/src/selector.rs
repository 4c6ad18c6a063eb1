//! Chooses the embedding order of pixel samples with the frog-leaping search.
//!
//! A frog's two genes map to the offset and stride of a full-cycle modular
//! traversal of the flat sample space: with `gcd(stride, n) = 1` the first
//! `L <= n` visited indices are always distinct, so a traversal of any length
//! is a valid embedding order with O(1) state.
//!
//! Candidate traversals are scored on an image with every LSB cleared,
//! perturbed by setting the LSB at the first `eval_length` positions (the
//! worst case a 1-LSB embedding can produce). Because the score depends only
//! on the upper 7 bits of the image plus the traversal geometry, the whole
//! search plays out identically on a cover and on the stego image made from
//! it; together with a key-derived seed this is what makes blind extraction
//! possible.

use std::collections::HashMap;

use thiserror::Error;

use crate::metrics::{FitnessConfig, FlipAccumulator, MetricsError};
use crate::raster::RasterImage;
use crate::real::Real;
use crate::sfla::{run_sfla, SearchTrace, SflaError, SflaParams};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelectorError {
    #[error("sample space must hold at least 2 samples (got {0})")]
    TotalTooSmall(usize),
    #[error("offset {offset} out of range for {total} samples")]
    OffsetOutOfRange { offset: usize, total: usize },
    #[error("stride {stride} invalid for {total} samples: need 1 <= stride < total with gcd(stride, total) = 1")]
    InvalidStride { stride: usize, total: usize },
    #[error("frog must carry at least 2 genes (got {0})")]
    GenesTooShort(usize),
    #[error("eval length {eval_length} exceeds the {total} available samples")]
    EvalLengthTooLarge { eval_length: usize, total: usize },
    #[error(transparent)]
    Sfla(#[from] SflaError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Embedding order over the flat sample space: the k-th slot is
/// `(offset + k * stride) mod total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelSequence {
    offset: usize,
    stride: usize,
    total: usize,
}

impl PixelSequence {
    pub fn new(offset: usize, stride: usize, total: usize) -> Result<Self, SelectorError> {
        if total < 2 {
            return Err(SelectorError::TotalTooSmall(total));
        }
        if offset >= total {
            return Err(SelectorError::OffsetOutOfRange { offset, total });
        }
        if stride == 0 || stride >= total || gcd(stride, total) != 1 {
            return Err(SelectorError::InvalidStride { stride, total });
        }
        Ok(Self {
            offset,
            stride,
            total,
        })
    }

    /// The order every embedder starts from when no search is requested:
    /// plain row-major sample order.
    pub fn sequential(total: usize) -> Result<Self, SelectorError> {
        Self::new(0, 1, total)
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Sample index of the k-th sequence position.
    pub fn index(&self, k: usize) -> usize {
        // stride < total keeps the running form below equivalent; the direct
        // form here stays correct for any k.
        (self.offset + (k % self.total) * self.stride) % self.total
    }

    /// Visits sample indices in sequence order. The first `total` items are
    /// a permutation of `0..total`.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let mut current = self.offset;
        let stride = self.stride;
        let total = self.total;
        std::iter::from_fn(move || {
            let out = current;
            current += stride;
            if current >= total {
                current -= total;
            }
            Some(out)
        })
    }
}

/// Decodes a frog into a traversal: `offset = floor(g0 * n)`, and the stride
/// is the smallest coprime of `n` at or above `max(1, floor(g1 * n))`
/// (wrapping to 1 if the scan ever passes `n - 1`).
pub fn genes_to_sequence<F: Real>(genes: &[F], total: usize) -> Result<PixelSequence, SelectorError> {
    if total < 2 {
        return Err(SelectorError::TotalTooSmall(total));
    }
    if genes.len() < 2 {
        return Err(SelectorError::GenesTooShort(genes.len()));
    }
    let scale = F::of(total as f64);
    let offset = (genes[0] * scale)
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(total - 1);
    let candidate = (genes[1] * scale)
        .floor()
        .to_usize()
        .unwrap_or(0)
        .clamp(1, total - 1);
    let mut stride = candidate;
    while gcd(stride, total) != 1 {
        stride += 1;
        if stride > total - 1 {
            stride = 1;
            break;
        }
    }
    PixelSequence::new(offset, stride, total)
}

/// Search and scoring configuration for sequence selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorConfig<F> {
    pub sfla: SflaParams,
    pub fitness: FitnessConfig<F>,
    /// Number of leading sequence positions scored during the search;
    /// `None` means `n / 8`. Embedder and extractor must agree on it.
    pub eval_length: Option<usize>,
}

impl<F: Real> Default for SelectorConfig<F> {
    fn default() -> Self {
        Self {
            sfla: SflaParams::default(),
            fitness: FitnessConfig::default(),
            eval_length: None,
        }
    }
}

impl<F: Real> SelectorConfig<F> {
    /// Effective eval length for a sample space of `total` slots.
    pub fn eval_length_for(&self, total: usize) -> Result<usize, SelectorError> {
        let eval_length = self.eval_length.unwrap_or(total / 8);
        if eval_length > total {
            return Err(SelectorError::EvalLengthTooLarge { eval_length, total });
        }
        Ok(eval_length)
    }
}

/// Result of a sequence search.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome<F> {
    pub sequence: PixelSequence,
    pub trace: SearchTrace<F>,
}

/// Scores one traversal: the composite fitness of the worst-case 1-LSB
/// perturbation (LSB forced to 1 at the first `eval_length` positions)
/// against the LSB-cleared image. Identical for a cover and its stego image.
pub fn sequence_fitness<F: Real>(
    image: &RasterImage,
    sequence: &PixelSequence,
    cfg: &SelectorConfig<F>,
) -> Result<F, SelectorError> {
    let eval_length = cfg.eval_length_for(image.sample_count())?;
    let mut accumulator = FlipAccumulator::new(image.with_cleared_lsbs(), cfg.fitness.clone())?;
    Ok(accumulator.fitness_delta(sequence.indices().take(eval_length))?)
}

/// Runs the frog-leaping search over traversal parameters and returns the
/// best sequence found.
///
/// The search dimension is fixed at 2 and the PRNG is seeded from `seed`
/// (derived from the secret key by callers), overriding whatever
/// `cfg.sfla` carries for those two fields. Given the same upper-7-bit image
/// content, configuration, and seed, the outcome is bit-identical — in
/// particular it is the same for a cover and any stego image made from it.
pub fn select_sequence<F: Real>(
    image: &RasterImage,
    cfg: &SelectorConfig<F>,
    seed: u64,
) -> Result<SelectionOutcome<F>, SelectorError> {
    let total = image.sample_count();
    if total < 2 {
        return Err(SelectorError::TotalTooSmall(total));
    }
    let eval_length = cfg.eval_length_for(total)?;

    let mut params = cfg.sfla.clone();
    params.gene_dim = 2;
    params.seed = seed;
    params.validate()?;

    let mut accumulator = FlipAccumulator::new(image.with_cleared_lsbs(), cfg.fitness.clone())?;
    // The objective depends on genes only through (offset, stride); caching
    // per pair skips recomputation as the swarm converges.
    let mut cache: HashMap<(usize, usize), F> = HashMap::new();

    let (best, trace) = run_sfla(&params, |genes: &[F]| {
        let sequence = genes_to_sequence(genes, total)
            .expect("total >= 2 and gene_dim = 2 make decoding total");
        *cache
            .entry((sequence.offset, sequence.stride))
            .or_insert_with(|| {
                accumulator
                    .fitness_delta(sequence.indices().take(eval_length))
                    .expect("sequence indices are in range by construction")
            })
    })?;

    Ok(SelectionOutcome {
        sequence: genes_to_sequence(&best.genes, total)?,
        trace,
    })
}
