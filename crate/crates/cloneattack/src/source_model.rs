//! Single-photon-source adequacy checks: thermal and Poisson photon-number
//! statistics, mean-photon-number estimation from bucket-detector clicks,
//! multi-photon and dead-time probabilities.

use crate::error::{Error, Result};

/// Photon-number distribution of the source in one detection window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhotonStatistics {
    /// Thermal (single-mode down-converted beam): P(n) = nbar^n / (1+nbar)^{n+1}.
    Thermal { mean: f64 },
    /// Poissonian (independent emission events): P(n) = lambda^n e^{-lambda} / n!.
    Poisson { mean: f64 },
}

impl PhotonStatistics {
    pub fn thermal(mean: f64) -> Result<Self> {
        if mean < 0.0 || !mean.is_finite() {
            return Err(Error::InvalidStatistics(format!(
                "thermal mean {mean} must be nonnegative"
            )));
        }
        Ok(Self::Thermal { mean })
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        if mean < 0.0 || !mean.is_finite() {
            return Err(Error::InvalidStatistics(format!(
                "poisson mean {mean} must be nonnegative"
            )));
        }
        Ok(Self::Poisson { mean })
    }

    /// Probability of finding exactly `n` photons in the window.
    pub fn pmf(&self, n: u64) -> f64 {
        match *self {
            Self::Thermal { mean } => {
                if mean == 0.0 {
                    return if n == 0 { 1.0 } else { 0.0 };
                }
                // nbar^n / (1+nbar)^{n+1}, evaluated in log space
                let ln = n as f64 * mean.ln() - (n as f64 + 1.0) * (1.0 + mean).ln();
                ln.exp()
            }
            Self::Poisson { mean } => {
                if mean == 0.0 {
                    return if n == 0 { 1.0 } else { 0.0 };
                }
                let ln = n as f64 * mean.ln() - mean - ln_factorial(n);
                ln.exp()
            }
        }
    }

    /// Probability of more than one photon in the window.
    pub fn prob_multi(&self) -> f64 {
        1.0 - self.pmf(0) - self.pmf(1)
    }
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Mean photon number lambda solving P0 = sum_n P(lambda, n) (1 - eta)^n for
/// an ON/OFF detector of efficiency eta, by bracketed bisection on the
/// series form to a relative tolerance of 1e-9.
///
/// The closed form P0 = exp(-lambda eta) is deliberately not used here so it
/// can serve as an independent check.
pub fn estimate_mean_photons(p0: f64, eta_det: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::InvalidStatistics(format!(
            "no-click probability {p0} must be in (0, 1]"
        )));
    }
    if !(eta_det > 0.0 && eta_det <= 1.0) {
        return Err(Error::InvalidStatistics(format!(
            "detector efficiency {eta_det} must be in (0, 1]"
        )));
    }
    if p0 == 1.0 {
        return Ok(0.0);
    }
    // sum_n P(lambda, n) (1 - eta)^n by term recursion, truncated when terms
    // drop below 1e-18 of the accumulated sum
    let survive = |lambda: f64| -> f64 {
        let mut term = (-lambda).exp();
        let mut acc = term;
        let mut n = 0u64;
        while term > acc * 1e-18 && n < 10_000 {
            n += 1;
            term *= lambda * (1.0 - eta_det) / n as f64;
            acc += term;
        }
        acc
    };
    let mut lo = 0.0;
    let mut hi = (-p0.ln() / eta_det) * 4.0 + 1.0;
    debug_assert!(survive(hi) < p0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if survive(mid) > p0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-9 * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bucket-detector model: efficiency, detection window, dead time, and the
/// observed click rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub window_ns: f64,
    pub dead_time_ns: f64,
    pub click_rate_hz: f64,
}

impl DetectorModel {
    pub fn new(
        efficiency: f64,
        window_ns: f64,
        dead_time_ns: f64,
        click_rate_hz: f64,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            problems.push(format!("efficiency {efficiency} must be in (0, 1]"));
        }
        if !(window_ns > 0.0) {
            problems.push(format!("window {window_ns} ns must be positive"));
        }
        if dead_time_ns < window_ns {
            problems.push(format!(
                "dead time {dead_time_ns} ns must be at least the window {window_ns} ns"
            ));
        }
        if !(click_rate_hz >= 0.0) {
            problems.push(format!("click rate {click_rate_hz} must be nonnegative"));
        }
        if click_rate_hz * window_ns * 1e-9 >= 1.0 {
            problems.push(format!(
                "click rate {click_rate_hz} Hz saturates the {window_ns} ns window"
            ));
        }
        if !problems.is_empty() {
            return Err(Error::InvalidDetector(problems.join("; ")));
        }
        Ok(Self {
            efficiency,
            window_ns,
            dead_time_ns,
            click_rate_hz,
        })
    }
}

/// Source adequacy summary derived from detector clicks.
#[derive(Clone, Copy, Debug)]
pub struct SourceReport {
    /// Probability of no detection in one window, 1 - N * window.
    pub p0: f64,
    /// Mean photon number per window from the bucket-detector model.
    pub mean_photons: f64,
    /// Poisson-tail probability of more than one photon per window.
    pub prob_multi: f64,
    /// Probability of zero photons during the full dead time.
    pub dead_time_vacuum_prob: f64,
}

/// Estimate the photon statistics behind an observed click rate.
pub fn source_report(det: &DetectorModel) -> Result<SourceReport> {
    let p0 = 1.0 - det.click_rate_hz * det.window_ns * 1e-9;
    let mean_photons = estimate_mean_photons(p0, det.efficiency)?;
    let stats = PhotonStatistics::poisson(mean_photons)?;
    let windows = det.dead_time_ns / det.window_ns;
    let dead = PhotonStatistics::poisson(windows * mean_photons)?;
    Ok(SourceReport {
        p0,
        mean_photons,
        prob_multi: stats.prob_multi(),
        dead_time_vacuum_prob: dead.pmf(0),
    })
}
