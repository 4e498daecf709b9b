//! Simulated quantum-memory readout: projective-measurement counts from a
//! two-qubit state and maximum-likelihood reconstruction of the density
//! matrix via the iterated R rho R fixed point.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, StateVector};

/// One tomographic record: the measured projector, the expected mean count
/// and the observed count.
#[derive(Clone, Debug)]
pub struct CountRecord {
    pub label: String,
    pub projector: StateVector,
    pub expected: f64,
    pub observed: u64,
}

/// A full tomographic data set with its completeness verdict.
#[derive(Clone, Debug)]
pub struct TomographyData {
    pub records: Vec<CountRecord>,
    /// False when the projector set does not span the space of two-qubit
    /// Hermitian operators; reconstruction is still attempted.
    pub complete: bool,
}

/// The six polarization-analysis states per qubit: H, V, D, A, R, L.
pub fn single_qubit_analysis_states() -> Vec<(char, StateVector)> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        ('H', StateVector::qubit(C64::new(1.0, 0.0), C64::new(0.0, 0.0))),
        ('V', StateVector::qubit(C64::new(0.0, 0.0), C64::new(1.0, 0.0))),
        ('D', StateVector::qubit(C64::new(r, 0.0), C64::new(r, 0.0))),
        ('A', StateVector::qubit(C64::new(r, 0.0), C64::new(-r, 0.0))),
        ('R', StateVector::qubit(C64::new(r, 0.0), C64::new(0.0, r))),
        ('L', StateVector::qubit(C64::new(r, 0.0), C64::new(0.0, -r))),
    ]
}

/// The default 36-projector set: all pairwise products of the six
/// single-qubit analysis states.
pub fn default_projectors() -> Vec<(String, StateVector)> {
    let singles = single_qubit_analysis_states();
    let mut out = Vec::with_capacity(36);
    for (la, sa) in &singles {
        for (lb, sb) in &singles {
            out.push((format!("{la}{lb}"), sa.tensor(sb).expect("two qubits")));
        }
    }
    out
}

/// Whether the projectors span the 16-dimensional real space of two-qubit
/// Hermitian operators.
pub fn is_informationally_complete(projectors: &[(String, StateVector)]) -> bool {
    if projectors.len() < 16 {
        return false;
    }
    let rows = projectors.len();
    let mut m = DMatrix::<f64>::zeros(rows, 16);
    for (r, (_, proj)) in projectors.iter().enumerate() {
        // real parameterization of |pi><pi|: diagonal + upper re/im
        let mut col = 0;
        for i in 0..4 {
            let pii = proj.amp(i) * proj.amp(i).conj();
            m[(r, col)] = pii.re;
            col += 1;
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                let pij = proj.amp(i) * proj.amp(j).conj();
                m[(r, col)] = pij.re;
                m[(r, col + 1)] = pij.im;
                col += 2;
            }
        }
    }
    let svd = m.svd(false, false);
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-9).count();
    rank == 16
}

/// Draw Poisson counts for every projector: observed ~ Poisson(shots * <pi|rho|pi>),
/// seeded and reproducible.
pub fn simulate_counts(
    rho: &DensityMatrix,
    projectors: &[(String, StateVector)],
    shots_per_projector: u64,
    seed: u64,
) -> Result<TomographyData> {
    if rho.n_qubits() != 2 {
        return Err(Error::Tomography(format!(
            "expected a two-qubit state, got {} qubits",
            rho.n_qubits()
        )));
    }
    if shots_per_projector == 0 {
        return Err(Error::Tomography("shots_per_projector must be >= 1".into()));
    }
    if projectors.is_empty() {
        return Err(Error::Tomography("no projectors supplied".into()));
    }
    let complete = is_informationally_complete(projectors);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(projectors.len());
    for (label, proj) in projectors {
        let expected = shots_per_projector as f64 * rho.expectation(proj)?.max(0.0);
        let observed = if expected > 0.0 {
            let dist = Poisson::new(expected)
                .map_err(|e| Error::Tomography(format!("poisson({expected}): {e}")))?;
            dist.sample(&mut rng) as u64
        } else {
            0
        };
        records.push(CountRecord {
            label: label.clone(),
            projector: proj.clone(),
            expected,
            observed,
        });
    }
    Ok(TomographyData { records, complete })
}

/// Maximum-likelihood reconstruction output.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    pub iterations: usize,
    /// False when the iteration cap was reached before the likelihood gain
    /// dropped below threshold; the best iterate is still returned.
    pub converged: bool,
    /// Normalized log-likelihood after every iteration (monotone
    /// non-decreasing by construction).
    pub likelihood_trace: Vec<f64>,
    pub warning: Option<String>,
}

const MAX_ITERATIONS: usize = 5000;
const LIKELIHOOD_GAIN_TOL: f64 = 1e-10;
const PROB_FLOOR: f64 = 1e-14;

/// Reconstruct from observed counts.
pub fn ml_reconstruct(data: &TomographyData) -> Result<Reconstruction> {
    let weights: Vec<f64> = data.records.iter().map(|r| r.observed as f64).collect();
    let projectors: Vec<&StateVector> = data.records.iter().map(|r| &r.projector).collect();
    let mut rec = reconstruct_from_weights(&projectors, &weights)?;
    if !data.complete {
        rec.warning = Some(match rec.warning.take() {
            Some(w) => format!("{w}; projector set is informationally incomplete"),
            None => "projector set is informationally incomplete".into(),
        });
    }
    Ok(rec)
}

/// Reconstruct from exact (noiseless) expected counts; the replay path for
/// data sets carrying real-valued weights.
pub fn ml_reconstruct_expected(
    projectors: &[(String, StateVector)],
    expected: &[f64],
) -> Result<Reconstruction> {
    if projectors.len() != expected.len() {
        return Err(Error::Tomography(format!(
            "{} projectors but {} expected counts",
            projectors.len(),
            expected.len()
        )));
    }
    let projs: Vec<&StateVector> = projectors.iter().map(|(_, p)| p).collect();
    reconstruct_from_weights(&projs, expected)
}

fn reconstruct_from_weights(
    projectors: &[&StateVector],
    weights: &[f64],
) -> Result<Reconstruction> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Tomography("all counts are zero".into()));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::Tomography("counts must be finite and nonnegative".into()));
    }
    let freqs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let dim = projectors
        .first()
        .ok_or_else(|| Error::Tomography("no projectors supplied".into()))?
        .dim();

    let probs = |rho: &DMatrix<C64>| -> Vec<f64> {
        projectors
            .iter()
            .map(|proj| {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..dim {
                    for j in 0..dim {
                        s += proj.amp(i).conj() * rho[(i, j)] * proj.amp(j);
                    }
                }
                s.re.max(PROB_FLOOR)
            })
            .collect()
    };
    // total log-likelihood sum_j N_j ln p_j; the 1e-10 gain threshold is on
    // this count-scale quantity
    let log_likelihood = |p: &[f64]| -> f64 {
        weights
            .iter()
            .zip(p)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, q)| w * q.ln())
            .sum()
    };
    let normalize = |m: &mut DMatrix<C64>| {
        let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
        *m *= C64::new(1.0 / tr, 0.0);
    };

    let mut rho = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
    let mut p = probs(&rho);
    let mut ll = log_likelihood(&p);
    let mut trace = Vec::with_capacity(64);
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        // R = sum_j (f_j / p_j) |pi_j><pi_j|
        let mut r_op = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for (idx, proj) in projectors.iter().enumerate() {
            if freqs[idx] == 0.0 {
                continue;
            }
            let c = C64::new(freqs[idx] / p[idx], 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    r_op[(i, j)] += c * proj.amp(i) * proj.amp(j).conj();
                }
            }
        }
        // full R rho R step, falling back to diluted steps whenever the
        // likelihood would decrease
        let mut accepted = false;
        let mut dilution = 1.0;
        for _ in 0..6 {
            let step = if dilution >= 1.0 {
                r_op.clone()
            } else {
                let mut d = &r_op * C64::new(dilution, 0.0);
                for i in 0..dim {
                    d[(i, i)] += C64::new(1.0 - dilution, 0.0);
                }
                d
            };
            let mut cand = &step * &rho * &step;
            // keep the iterate exactly Hermitian against rounding drift
            let adj = cand.adjoint();
            cand = (cand + adj) * C64::new(0.5, 0.0);
            normalize(&mut cand);
            let cand_p = probs(&cand);
            let cand_ll = log_likelihood(&cand_p);
            if cand_ll >= ll {
                let gain = cand_ll - ll;
                rho = cand;
                p = cand_p;
                ll = cand_ll;
                trace.push(ll);
                accepted = true;
                if gain < LIKELIHOOD_GAIN_TOL {
                    converged = true;
                }
                break;
            }
            dilution *= 0.5;
        }
        if !accepted {
            // no ascent direction left at floating-point resolution
            trace.push(ll);
            converged = true;
        }
        if converged {
            break;
        }
    }

    let rho = DensityMatrix::new(rho)
        .map_err(|e| Error::Tomography(format!("iterate left the state space: {e}")))?;
    let warning = if converged {
        None
    } else {
        Some(format!(
            "likelihood still improving after {MAX_ITERATIONS} iterations"
        ))
    };
    Ok(Reconstruction {
        rho,
        iterations,
        converged,
        likelihood_trace: trace,
        warning,
    })
}

/// Serialize observed counts as tab-separated `label<TAB>count` lines.
pub fn write_counts(data: &TomographyData) -> String {
    let mut out = String::from("projector\tobserved\n");
    for rec in &data.records {
        out.push_str(&format!("{}\t{}\n", rec.label, rec.observed));
    }
    out
}

/// Parse counts written by [`write_counts`], resolving projector labels
/// against the default analysis set. Expected means are not stored in the
/// text format, so each record's `expected` is set to its observed count.
pub fn read_counts(text: &str) -> Result<TomographyData> {
    let registry = default_projectors();
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 && line.starts_with("projector") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (label, count) = match (parts.next(), parts.next()) {
            (Some(l), Some(c)) => (l.trim(), c.trim()),
            _ => {
                return Err(Error::Tomography(format!(
                    "line {}: expected `label<TAB>count`",
                    lineno + 1
                )))
            }
        };
        let observed: u64 = count.parse().map_err(|_| {
            Error::Tomography(format!("line {}: bad count '{count}'", lineno + 1))
        })?;
        let projector = registry
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, p)| p.clone())
            .ok_or_else(|| {
                Error::Tomography(format!("line {}: unknown projector '{label}'", lineno + 1))
            })?;
        records.push(CountRecord {
            label: label.to_string(),
            projector,
            expected: observed as f64,
            observed,
        });
    }
    if records.is_empty() {
        return Err(Error::Tomography("no count records found".into()));
    }
    let labeled: Vec<(String, StateVector)> = records
        .iter()
        .map(|r| (r.label.clone(), r.projector.clone()))
        .collect();
    let complete = is_informationally_complete(&labeled);
    Ok(TomographyData { records, complete })
}
