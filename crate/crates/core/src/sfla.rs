//! Shuffled frog leaping: a memetic optimizer over `[0,1)^D`.
//!
//! The population is ranked by fitness, dealt round-robin into memeplexes,
//! and each memeplex repeatedly improves the worst frog of a rank-weighted
//! submemeplex: first by leaping toward the submemeplex best, then toward the
//! global best, and finally by random replacement when neither leap helps.
//! After the local passes the memeplexes merge and the population reshuffles.
//!
//! Every random decision comes from a single ChaCha8 stream seeded with
//! `SflaParams::seed`, drawn as `f64` in a fixed order: population init
//! (frog-major, gene-minor), then per shuffle and memeplex the submemeplex
//! draws, the per-leap scalar `r`, and the replacement genes. Two runs with
//! equal seed, parameters, and objective are bit-identical, which is what
//! lets an extractor replay the embedder's search. The generator family is
//! part of the compatibility surface: changing it orphans existing stego
//! images.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SflaError {
    #[error("frog count {frog_count} must equal memeplexes {memeplex_count} x frogs-per-memeplex {frogs_per_memeplex}")]
    FrogCountMismatch {
        frog_count: usize,
        memeplex_count: usize,
        frogs_per_memeplex: usize,
    },
    #[error("population of {population} does not divide into {memeplexes} memeplexes")]
    UnevenPartition {
        population: usize,
        memeplexes: usize,
    },
    #[error("submemeplex size {submemeplex} exceeds memeplex size {memeplex}")]
    SubmemeplexTooLarge {
        submemeplex: usize,
        memeplex: usize,
    },
    #[error("{0} must be at least 1")]
    ZeroParam(&'static str),
}

/// One candidate solution: a point in `[0,1)^D` with its cached fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Frog<F> {
    pub genes: Vec<F>,
    pub fitness: F,
    /// Stable ordinal assigned at initialization; used to break fitness ties
    /// deterministically.
    pub id: usize,
}

/// Population, memeplex, and iteration configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SflaParams {
    /// Total frogs `F`; must equal `memeplex_count * frogs_per_memeplex`.
    pub frog_count: usize,
    /// Number of memeplexes `m`.
    pub memeplex_count: usize,
    /// Frogs per memeplex `eta`.
    pub frogs_per_memeplex: usize,
    /// Frogs drawn into each submemeplex `q`.
    pub submemeplex_size: usize,
    /// Improvement steps per memeplex per shuffle. Zero disables local
    /// search, leaving the initial population untouched.
    pub local_iterations: usize,
    /// Outer shuffle cycles. Fixed (never convergence-based) so a replayed
    /// search performs exactly the same number of steps.
    pub max_shuffles: usize,
    /// Genes per frog `D`.
    pub gene_dim: usize,
    pub seed: u64,
}

impl Default for SflaParams {
    fn default() -> Self {
        Self {
            frog_count: 30,
            memeplex_count: 5,
            frogs_per_memeplex: 6,
            submemeplex_size: 4,
            local_iterations: 10,
            max_shuffles: 20,
            gene_dim: 2,
            seed: 0,
        }
    }
}

impl SflaParams {
    pub fn validate(&self) -> Result<(), SflaError> {
        if self.memeplex_count == 0 {
            return Err(SflaError::ZeroParam("memeplex count"));
        }
        if self.frogs_per_memeplex == 0 {
            return Err(SflaError::ZeroParam("frogs per memeplex"));
        }
        if self.frog_count != self.memeplex_count * self.frogs_per_memeplex {
            return Err(SflaError::FrogCountMismatch {
                frog_count: self.frog_count,
                memeplex_count: self.memeplex_count,
                frogs_per_memeplex: self.frogs_per_memeplex,
            });
        }
        if self.submemeplex_size == 0 {
            return Err(SflaError::ZeroParam("submemeplex size"));
        }
        if self.submemeplex_size > self.frogs_per_memeplex {
            return Err(SflaError::SubmemeplexTooLarge {
                submemeplex: self.submemeplex_size,
                memeplex: self.frogs_per_memeplex,
            });
        }
        if self.max_shuffles == 0 {
            return Err(SflaError::ZeroParam("max shuffles"));
        }
        if self.gene_dim == 0 {
            return Err(SflaError::ZeroParam("gene dimension"));
        }
        Ok(())
    }
}

/// One fitness-descending slice of the ranked population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memeplex {
    /// Positions into the ranked population, best first.
    pub members: Vec<usize>,
}

/// Per-shuffle progress of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchTrace<F> {
    /// Best fitness seen so far, recorded after each shuffle; non-decreasing.
    pub best_per_shuffle: Vec<F>,
    /// Objective invocations: population init plus every leap attempt.
    pub evaluations: u64,
}

/// Draws the initial population uniformly from `[0,1)^D`, one frog at a
/// time, genes in order.
pub fn init_population<F, R, E>(params: &SflaParams, rng: &mut R, evaluate: &mut E) -> Vec<Frog<F>>
where
    F: Real,
    R: Rng,
    E: FnMut(&[F]) -> F,
{
    (0..params.frog_count)
        .map(|id| {
            let genes: Vec<F> = (0..params.gene_dim)
                .map(|_| F::of(rng.gen::<f64>()))
                .collect();
            let fitness = evaluate(&genes);
            Frog { genes, fitness, id }
        })
        .collect()
}

/// Deals ranks round-robin: rank `i` goes to memeplex `i mod m`.
///
/// Positions refer to a population already sorted fitness-descending, so
/// each memeplex list is itself fitness-descending.
pub fn partition_memeplexes(
    population_size: usize,
    memeplex_count: usize,
) -> Result<Vec<Memeplex>, SflaError> {
    if memeplex_count == 0 {
        return Err(SflaError::ZeroParam("memeplex count"));
    }
    if population_size % memeplex_count != 0 {
        return Err(SflaError::UnevenPartition {
            population: population_size,
            memeplexes: memeplex_count,
        });
    }
    let mut memeplexes = vec![
        Memeplex {
            members: Vec::with_capacity(population_size / memeplex_count)
        };
        memeplex_count
    ];
    for rank in 0..population_size {
        memeplexes[rank % memeplex_count].members.push(rank);
    }
    Ok(memeplexes)
}

/// Triangular selection weights over memeplex ranks:
/// `p_j = 2(eta+1-j) / (eta(eta+1))` for the 1-based rank `j`.
pub fn triangular_weights(eta: usize) -> Vec<f64> {
    let denom = (eta * (eta + 1)) as f64;
    (1..=eta).map(|j| 2.0 * (eta + 1 - j) as f64 / denom).collect()
}

/// Samples `q` distinct members of a memeplex without replacement, weighting
/// better ranks higher by the triangular distribution. The result keeps the
/// memeplex order, so the first entry is the submemeplex best and the last
/// is its worst.
pub fn select_submemeplex<R: Rng>(memeplex: &Memeplex, q: usize, rng: &mut R) -> Vec<usize> {
    let eta = memeplex.members.len();
    let q = q.min(eta);
    let weights = triangular_weights(eta);
    let mut remaining: Vec<usize> = (0..eta).collect();
    let mut chosen = Vec::with_capacity(q);
    for _ in 0..q {
        let total: f64 = remaining.iter().map(|&slot| weights[slot]).sum();
        let mut target = rng.gen::<f64>() * total;
        let mut pick = remaining.len() - 1;
        for (i, &slot) in remaining.iter().enumerate() {
            target -= weights[slot];
            if target < 0.0 {
                pick = i;
                break;
            }
        }
        chosen.push(remaining.remove(pick));
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|slot| memeplex.members[slot]).collect()
}

fn leap<F: Real>(from: &[F], toward: &[F], r: f64) -> Vec<F> {
    let r = F::of(r);
    from.iter()
        .zip(toward)
        .map(|(&a, &b)| a + r * (b - a))
        .collect()
}

/// Improves the worst frog of a submemeplex.
///
/// Attempt 1 leaps toward the submemeplex best; if that does not strictly
/// improve fitness, attempt 2 leaps from the original position toward the
/// global best; if that also fails the frog is replaced by a uniformly
/// random one. Each leap draws one scalar `r` in `[0,1)` applied to all
/// genes, so results stay inside the gene domain. Returns the replacement
/// frog and the number of objective evaluations spent (1 to 3).
pub fn jump_worst<F, R, E>(
    worst: &Frog<F>,
    best: &Frog<F>,
    global: &Frog<F>,
    rng: &mut R,
    evaluate: &mut E,
) -> (Frog<F>, u64)
where
    F: Real,
    R: Rng,
    E: FnMut(&[F]) -> F,
{
    let genes = leap(&worst.genes, &best.genes, rng.gen::<f64>());
    let fitness = evaluate(&genes);
    if fitness > worst.fitness {
        return (
            Frog {
                genes,
                fitness,
                id: worst.id,
            },
            1,
        );
    }

    let genes = leap(&worst.genes, &global.genes, rng.gen::<f64>());
    let fitness = evaluate(&genes);
    if fitness > worst.fitness {
        return (
            Frog {
                genes,
                fitness,
                id: worst.id,
            },
            2,
        );
    }

    let genes: Vec<F> = (0..worst.genes.len())
        .map(|_| F::of(rng.gen::<f64>()))
        .collect();
    let fitness = evaluate(&genes);
    (
        Frog {
            genes,
            fitness,
            id: worst.id,
        },
        3,
    )
}

fn rank_descending<F: Real>(frogs: &mut [Frog<F>]) {
    frogs.sort_by(|a, b| {
        b.fitness
            .partial_cmp(&a.fitness)
            .unwrap_or(Ordering::Equal)
            .then(a.id.cmp(&b.id))
    });
}

/// Runs the full shuffled search and returns the best frog ever evaluated
/// along with its trace. Deterministic given `params` and a pure objective.
pub fn run_sfla<F, E>(
    params: &SflaParams,
    mut evaluate: E,
) -> Result<(Frog<F>, SearchTrace<F>), SflaError>
where
    F: Real,
    E: FnMut(&[F]) -> F,
{
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut evaluations = 0u64;
    let count_eval = |genes: &[F], evaluate: &mut E, evaluations: &mut u64| {
        *evaluations += 1;
        evaluate(genes)
    };

    let mut population = init_population(params, &mut rng, &mut |g: &[F]| {
        count_eval(g, &mut evaluate, &mut evaluations)
    });
    let mut best_ever = population
        .iter()
        .max_by(|a, b| {
            a.fitness
                .partial_cmp(&b.fitness)
                .unwrap_or(Ordering::Equal)
                .then(b.id.cmp(&a.id))
        })
        .expect("population is non-empty")
        .clone();

    let mut trace = SearchTrace {
        best_per_shuffle: Vec::with_capacity(params.max_shuffles),
        evaluations: 0,
    };

    for _ in 0..params.max_shuffles {
        rank_descending(&mut population);
        let global_best = population[0].clone();
        let memeplexes = partition_memeplexes(params.frog_count, params.memeplex_count)?;

        for memeplex in &memeplexes {
            for _ in 0..params.local_iterations {
                let submemeplex =
                    select_submemeplex(memeplex, params.submemeplex_size, &mut rng);
                let best_pos = submemeplex[0];
                let worst_pos = *submemeplex.last().expect("submemeplex is non-empty");

                let (replacement, _) = jump_worst(
                    &population[worst_pos],
                    &population[best_pos],
                    &global_best,
                    &mut rng,
                    &mut |g: &[F]| count_eval(g, &mut evaluate, &mut evaluations),
                );
                if replacement.fitness > best_ever.fitness {
                    best_ever = replacement.clone();
                }
                population[worst_pos] = replacement;

                // Keep the memeplex fitness-descending for the next draw.
                let mut slot_frogs: Vec<Frog<F>> = memeplex
                    .members
                    .iter()
                    .map(|&pos| population[pos].clone())
                    .collect();
                rank_descending(&mut slot_frogs);
                for (&pos, frog) in memeplex.members.iter().zip(slot_frogs) {
                    population[pos] = frog;
                }
            }
        }

        trace.best_per_shuffle.push(best_ever.fitness);
    }

    trace.evaluations = evaluations;
    Ok((best_ever, trace))
}
