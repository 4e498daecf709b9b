//! Stochastic end-to-end protocol runs producing sifted keys and empirical
//! statistics for comparison with the analytic pipeline.
//!
//! Rounds are partitioned into independently seeded shards (counter-based
//! ChaCha streams), so results are byte-identical for a given seed
//! regardless of thread count, and shard merging is a plain sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::cloner::ClonerParams;
use crate::eavesdropper::{
    context_blocks, context_blocks_from_density, ContextBlock, DensityChannel, JointDistribution,
};
use crate::error::{Error, Result};
use crate::protocols::{alice_bit, Announcement, Protocol};
use crate::qstate::DensityMatrix;
use crate::security::SecurityReport;

const SHARD_SIZE: u64 = 1 << 16;
const BOOTSTRAP_RESAMPLES: usize = 1000;

/// One protocol-run schedule.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub params: ClonerParams,
    /// Number of transmitted states (pre-sifting rounds).
    pub rounds: u64,
    pub seed: u64,
    /// Optional white-noise admixture weight v: each channel state becomes
    /// v rho + (1 - v) I/4 before sampling.
    pub noise: Option<f64>,
}

/// Aggregated counts of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalResult {
    pub protocol: Protocol,
    pub rounds: u64,
    pub seed: u64,
    pub sifted_count: u64,
    /// Conclusive-round counts indexed by (Alice bit, Bob bit, Eve bit).
    pub joint_counts: [[[u64; 2]; 2]; 2],
}

/// Per-(probe, context, Alice bit) cumulative sampler over (l, m).
struct BlockSampler {
    // cumulative[probe][ctx][k][cell], cell = 2*l + m
    cumulative: Vec<Vec<[[f64; 4]; 2]>>,
}

impl BlockSampler {
    fn new(blocks: &[ContextBlock], protocol: Protocol) -> Self {
        let n_ctx = protocol.context_count();
        let mut cumulative = vec![vec![[[0.0; 4]; 2]; n_ctx]; 2];
        for block in blocks {
            let ctx = match block.announcement {
                Announcement::ExcludedTrine(n) => n,
                Announcement::Basis(y) => y,
            };
            for k in 0..2 {
                let mut total = 0.0;
                for l in 0..2 {
                    for m in 0..2 {
                        total += block.table[k][l][m];
                    }
                }
                let mut acc = 0.0;
                for l in 0..2 {
                    for m in 0..2 {
                        acc += block.table[k][l][m] / total;
                        cumulative[block.probe.bit()][ctx][k][2 * l + m] = acc;
                    }
                }
                cumulative[block.probe.bit()][ctx][k][3] = 1.0;
            }
        }
        Self { cumulative }
    }

    fn draw(&self, probe: usize, ctx: usize, k: usize, u: f64) -> (usize, usize) {
        let cum = &self.cumulative[probe][ctx][k];
        let cell = cum.iter().position(|&c| u <= c).unwrap_or(3);
        (cell / 2, cell % 2)
    }
}

/// Run the full attack loop: per round draw Alice's state, Eve's probe and
/// the announcement context uniformly, mark the round conclusive per the
/// sift rule, and sample conclusive bits from the context-conditioned block
/// of the joint distribution.
pub fn run_rounds(config: &RunConfig) -> Result<EmpiricalResult> {
    if config.rounds < 1 {
        return Err(Error::MonteCarlo("rounds must be >= 1".into()));
    }
    let blocks = match config.noise {
        None => context_blocks(config.protocol, &config.params)?,
        Some(v) => {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ParameterRange {
                    name: "noise weight v",
                    value: v,
                });
            }
            let channel =
                DensityChannel::from_params(config.protocol, &config.params)?.with_white_noise(v)?;
            context_blocks_from_density(&channel)?
        }
    };
    let sampler = BlockSampler::new(&blocks, config.protocol);
    let protocol = config.protocol;
    let n_alice = protocol.alice_state_count();
    let n_ctx = protocol.context_count();

    let n_shards = config.rounds.div_ceil(SHARD_SIZE);
    let partials: Vec<([[[u64; 2]; 2]; 2], u64)> = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
            rng.set_stream(shard + 1);
            let rounds = SHARD_SIZE.min(config.rounds - shard * SHARD_SIZE);
            let mut counts = [[[0u64; 2]; 2]; 2];
            let mut sifted = 0u64;
            for _ in 0..rounds {
                let alice = rng.gen_range(0..n_alice);
                let probe = rng.gen_range(0..2usize);
                let ctx = rng.gen_range(0..n_ctx);
                let announcement = match protocol {
                    Protocol::Bb84 => Announcement::Basis(ctx),
                    Protocol::R04 => Announcement::ExcludedTrine(ctx),
                };
                let Some(k) = alice_bit(protocol, announcement, alice).expect("valid indices")
                else {
                    continue;
                };
                let (l, m) = sampler.draw(probe, ctx, k as usize, rng.gen::<f64>());
                counts[k as usize][l][m] += 1;
                sifted += 1;
            }
            (counts, sifted)
        })
        .collect();

    let mut joint_counts = [[[0u64; 2]; 2]; 2];
    let mut sifted_count = 0;
    for (counts, sifted) in partials {
        sifted_count += sifted;
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    joint_counts[k][l][m] += counts[k][l][m];
                }
            }
        }
    }
    Ok(EmpiricalResult {
        protocol: config.protocol,
        rounds: config.rounds,
        seed: config.seed,
        sifted_count,
        joint_counts,
    })
}

/// Admix white noise to reach a target purity: returns v rho + (1 - v) I/4
/// with v solved so that Tr(rho'^2) equals `target_purity`.
pub fn noise_emulation(rho: &DensityMatrix, target_purity: f64) -> Result<DensityMatrix> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch(
            "noise emulation expects a two-qubit state".into(),
        ));
    }
    let ceiling = rho.purity();
    // purity of the mixture: v^2 (P - 1/4) + 1/4
    if !(target_purity > 0.25 && target_purity <= ceiling + 1e-12) {
        return Err(Error::UnreachablePurity {
            target: target_purity,
            floor: 0.25,
            ceiling,
        });
    }
    let v = ((target_purity - 0.25) / (ceiling - 0.25)).sqrt().min(1.0);
    rho.mix(&DensityMatrix::maximally_mixed(2)?, 1.0 - v)
}

/// White-noise weight that brings a *pure* two-qubit state to the target
/// purity; the closed form v = sqrt((target - 1/4) / (3/4)).
pub fn noise_weight_for_purity(target_purity: f64) -> Result<f64> {
    if !(target_purity > 0.25 && target_purity <= 1.0) {
        return Err(Error::UnreachablePurity {
            target: target_purity,
            floor: 0.25,
            ceiling: 1.0,
        });
    }
    Ok(((target_purity - 0.25) / 0.75).sqrt())
}

/// Empirical security figures with bootstrap standard errors.
#[derive(Clone, Copy, Debug)]
pub struct EmpiricalReport {
    pub report: SecurityReport,
    pub qber_se: f64,
    pub i_ab_se: f64,
    pub i_ae_se: f64,
    pub i_be_se: f64,
    pub key_rate_se: f64,
}

/// Estimate the attack figures from empirical frequencies; standard errors
/// are propagated by a seeded bootstrap over the eight joint-count cells.
pub fn empirical_report(result: &EmpiricalResult, params: &ClonerParams) -> Result<EmpiricalReport> {
    if result.sifted_count < 100 {
        return Err(Error::MonteCarlo(format!(
            "need at least 100 sifted rounds, got {}",
            result.sifted_count
        )));
    }
    let dist = JointDistribution::from_counts(&result.joint_counts, result.protocol)?;
    let report = SecurityReport::from_distribution(&dist, *params, None);

    let n = result.sifted_count;
    let probs: Vec<f64> = result
        .joint_counts
        .iter()
        .flatten()
        .flatten()
        .map(|&c| c as f64 / n as f64)
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(result.seed);
    rng.set_stream(u64::MAX); // disjoint from the shard streams
    let mut samples = [[0.0; BOOTSTRAP_RESAMPLES]; 5];
    for r in 0..BOOTSTRAP_RESAMPLES {
        let counts = multinomial_draw(&mut rng, n, &probs)?;
        let mut table = [[[0u64; 2]; 2]; 2];
        for (cell, value) in counts.iter().enumerate() {
            table[cell / 4][(cell / 2) % 2][cell % 2] = *value;
        }
        let d = JointDistribution::from_counts(&table, result.protocol)?;
        let rep = SecurityReport::from_distribution(&d, *params, None);
        samples[0][r] = rep.qber;
        samples[1][r] = rep.i_ab;
        samples[2][r] = rep.i_ae;
        samples[3][r] = rep.i_be;
        samples[4][r] = rep.key_rate;
    }
    let se = |xs: &[f64]| -> f64 {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64;
        var.sqrt()
    };
    Ok(EmpiricalReport {
        report,
        qber_se: se(&samples[0]),
        i_ab_se: se(&samples[1]),
        i_ae_se: se(&samples[2]),
        i_be_se: se(&samples[3]),
        key_rate_se: se(&samples[4]),
    })
}

fn multinomial_draw(rng: &mut ChaCha12Rng, n: u64, probs: &[f64]) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(probs.len());
    let mut remaining_n = n;
    let mut remaining_p = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            out.push(remaining_n);
            break;
        }
        if remaining_n == 0 || remaining_p <= 0.0 {
            out.push(0);
            continue;
        }
        let q = (p / remaining_p).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining_n, q)
            .map_err(|e| Error::MonteCarlo(format!("binomial({remaining_n}, {q}): {e}")))?
            .sample(rng);
        out.push(draw);
        remaining_n -= draw;
        remaining_p -= p;
    }
    Ok(out)
}
