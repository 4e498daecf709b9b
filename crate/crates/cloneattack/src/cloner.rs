//! The asymmetric phase-covariant optimal cloner: unitary action,
//! probe-conditioned two-qubit maps, shrinking factors, clone fidelities,
//! and the optical implementation model (PDBS plus BDA filters).
//!
//! The cloner is parameterized by the clone asymmetry `p` and the cloning
//! strength `Lambda`. Equatorial qubits are disturbed uniformly: Bob's Bloch
//! vector shrinks by eta = 2 sqrt(p) L Lbar in the equatorial plane and by
//! eta_perp = L^2 + Lbar^2 (p - q) along z; Eve's probe obeys the same
//! formulas with p and q swapped.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, StateVector};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Attack knobs: asymmetry p and cloning strength Lambda, both in [0, 1].
/// q = 1 - p and Lbar = sqrt(1 - Lambda^2) are always derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClonerParams {
    p: f64,
    lambda: f64,
}

impl ClonerParams {
    pub fn new(p: f64, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::ParameterRange {
                name: "p",
                value: p,
            });
        }
        if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
            return Err(Error::ParameterRange {
                name: "lambda",
                value: lambda,
            });
        }
        Ok(Self { p, lambda })
    }

    /// Construct from Lambda^2, the form used in configs and reports.
    pub fn from_lambda_sq(p: f64, lambda_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda_sq) || !lambda_sq.is_finite() {
            return Err(Error::ParameterRange {
                name: "lambda^2",
                value: lambda_sq,
            });
        }
        Self::new(p, lambda_sq.sqrt())
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_sq(&self) -> f64 {
        self.lambda * self.lambda
    }

    pub fn lambda_bar(&self) -> f64 {
        (1.0 - self.lambda * self.lambda).max(0.0).sqrt()
    }

    /// Same strength with the asymmetry mirrored (p <-> q).
    pub fn swapped(&self) -> Self {
        Self {
            p: 1.0 - self.p,
            lambda: self.lambda,
        }
    }
}

/// Which clone a shrinking-factor query refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloneParty {
    Bob,
    Eve,
}

/// Eve's probe polarization; bit 0 = H, bit 1 = V.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    H,
    V,
}

impl Probe {
    pub const BOTH: [Probe; 2] = [Probe::H, Probe::V];

    pub fn bit(self) -> usize {
        match self {
            Probe::H => 0,
            Probe::V => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Result<Self> {
        match bit {
            0 => Ok(Probe::H),
            1 => Ok(Probe::V),
            other => Err(Error::IndexOutOfRange {
                what: "probe bit",
                index: other,
            }),
        }
    }
}

/// Bloch-sphere contraction factors: eta in the equatorial plane,
/// eta_perp along z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShrinkingFactors {
    pub eta: f64,
    pub eta_perp: f64,
}

/// Shrinking factors of one clone. Eve's are Bob's with p and q swapped.
pub fn shrinking_factors(params: &ClonerParams, party: CloneParty) -> ShrinkingFactors {
    let pr = match party {
        CloneParty::Bob => *params,
        CloneParty::Eve => params.swapped(),
    };
    let (l, lb) = (pr.lambda(), pr.lambda_bar());
    ShrinkingFactors {
        eta: 2.0 * pr.p().sqrt() * l * lb,
        eta_perp: l * l + lb * lb * (pr.p() - pr.q()),
    }
}

/// Clone fidelities (F_B, F_E) with respect to equatorial inputs.
pub fn clone_fidelities(params: &ClonerParams) -> (f64, f64) {
    let fb = (1.0 + shrinking_factors(params, CloneParty::Bob).eta) / 2.0;
    let fe = (1.0 + shrinking_factors(params, CloneParty::Eve).eta) / 2.0;
    (fb, fe)
}

/// Probe-conditioned cloning map U_x on (input qubit, probe x), returned as
/// an unnormalized two-qubit vector (Bob, Eve) whose squared norm is the
/// branch's success weight (1 for every equatorial input).
///
/// The maps are the ancilla-conditioned branches of the full cloning unitary,
/// extended linearly: for probe H, |0> -> sqrt2 L |00> and
/// |1> -> sqrt2 Lbar (sqrt(q)|01> + sqrt(p)|10>); for probe V,
/// |0> -> sqrt2 Lbar (sqrt(p)|01> + sqrt(q)|10>) and |1> -> sqrt2 L |11>.
pub fn apply_probe_map(
    input: &StateVector,
    probe: Probe,
    params: &ClonerParams,
) -> Result<StateVector> {
    if input.n_qubits() != 1 {
        return Err(Error::DimensionMismatch(
            "probe map expects a single-qubit input".into(),
        ));
    }
    let (a, b) = (input.amp(0), input.amp(1));
    let l = C64::new(SQRT_2 * params.lambda(), 0.0);
    let lb = params.lambda_bar();
    let sp = C64::new(SQRT_2 * lb * params.p().sqrt(), 0.0);
    let sq = C64::new(SQRT_2 * lb * params.q().sqrt(), 0.0);
    let zero = C64::new(0.0, 0.0);
    let amps = match probe {
        // indices: |be> -> 2b + e
        Probe::H => vec![a * l, b * sq, b * sp, zero],
        Probe::V => vec![zero, a * sp, a * sq, b * l],
    };
    StateVector::new(amps)
}

/// Two-qubit state shared by Bob and Eve after the cloner acts on `input`
/// with the probe polarization switched at random: the equal-probability
/// mixture of both probe branches, weighted by their success norms.
pub fn bob_eve_state(input: &StateVector, params: &ClonerParams) -> Result<DensityMatrix> {
    if input.n_qubits() != 1 {
        return Err(Error::DimensionMismatch(
            "cloner expects a single-qubit input".into(),
        ));
    }
    let input = input.normalized()?;
    let mut m = nalgebra::DMatrix::from_element(4, 4, C64::new(0.0, 0.0));
    let mut total_weight = 0.0;
    for probe in Probe::BOTH {
        let branch = apply_probe_map(&input, probe, params)?;
        total_weight += branch.norm_sqr();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += branch.amp(i) * branch.amp(j).conj() * C64::new(0.5, 0.0);
            }
        }
    }
    if total_weight < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    DensityMatrix::new(m)
}

/// Full three-qubit cloning unitary applied to (input, fresh probe + ancilla),
/// in (Bob, Eve, ancilla) mode order:
/// |0> -> L|000> + Lbar (sqrt(p)|011> + sqrt(q)|101>),
/// |1> -> L|111> + Lbar (sqrt(q)|010> + sqrt(p)|100>).
pub fn full_unitary_state(input: &StateVector, params: &ClonerParams) -> Result<StateVector> {
    if input.n_qubits() != 1 {
        return Err(Error::DimensionMismatch(
            "cloner expects a single-qubit input".into(),
        ));
    }
    let input = input.normalized()?;
    let (a, b) = (input.amp(0), input.amp(1));
    let l = C64::new(params.lambda(), 0.0);
    let lb = params.lambda_bar();
    let sp = C64::new(lb * params.p().sqrt(), 0.0);
    let sq = C64::new(lb * params.q().sqrt(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    // index = 4*bob + 2*eve + ancilla
    amps[0b000] = a * l;
    amps[0b011] = a * sp;
    amps[0b101] = a * sq;
    amps[0b111] = b * l;
    amps[0b010] = b * sq;
    amps[0b100] = b * sp;
    StateVector::new(amps)
}

/// PDBS transmittances for H (`mu`) and V (`nu`) polarization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpticalModel {
    mu: f64,
    nu: f64,
}

impl OpticalModel {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("nu", nu)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::ParameterRange { name, value: v });
            }
        }
        Ok(Self { mu, nu })
    }

    /// Transmittances measured on the manufactured PDBS.
    pub fn measured() -> Self {
        Self { mu: 0.77, nu: 0.19 }
    }

    /// Design-target transmittances mu = (1 + 1/sqrt3)/2, nu = (1 - 1/sqrt3)/2.
    pub fn ideal() -> Self {
        let s = 1.0 / 3.0f64.sqrt();
        Self {
            mu: (1.0 + s) / 2.0,
            nu: (1.0 - s) / 2.0,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "measured" => Ok(Self::measured()),
            "ideal" => Ok(Self::ideal()),
            other => Err(Error::UnknownOpticsPreset(other.to_string())),
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Per-mode BDA intensity-transmittance ratios tau_H / tau_V that realize a
/// given (p, Lambda) for one probe polarization. `degenerate` marks the
/// Lambda in {0, 1} sentinel cases where a ratio collapses to 0 or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BdaSettings {
    pub bob_ratio: f64,
    pub eve_ratio: f64,
    pub degenerate: bool,
}

const SINGULAR_TOL: f64 = 1e-9;

/// Polarization-filter ratios for one probe setting.
///
/// For an H probe: tau_bH/tau_bV = (L/(Lbar sqrt p))^2 (1-mu)(1-nu)/(1-2mu)^2
/// and tau_eH/tau_eV = (L/(Lbar sqrt q))^2 mu nu/(1-2mu)^2. For a V probe the
/// mirrored pair applies with (2nu-1)^2 in the numerator.
pub fn bda_settings(
    params: &ClonerParams,
    optics: &OpticalModel,
    probe: Probe,
) -> Result<BdaSettings> {
    let (mu, nu) = (optics.mu(), optics.nu());
    match probe {
        Probe::H => {
            if (1.0 - 2.0 * mu).abs() < SINGULAR_TOL {
                return Err(Error::SingularOptics(format!(
                    "mu = {mu} makes the H-probe bunching term vanish"
                )));
            }
        }
        Probe::V => {
            if (2.0 * nu - 1.0).abs() < SINGULAR_TOL {
                return Err(Error::SingularOptics(format!(
                    "nu = {nu} makes the V-probe bunching term vanish"
                )));
            }
        }
    }
    let l2 = params.lambda_sq();
    let lb2 = 1.0 - l2;
    let degenerate = l2 < SINGULAR_TOL || lb2 < SINGULAR_TOL;
    let (bob_ratio, eve_ratio) = if degenerate {
        // Filters cannot realize the limit points; report 0/inf sentinels.
        if l2 < SINGULAR_TOL {
            match probe {
                Probe::H => (0.0, 0.0),
                Probe::V => (f64::INFINITY, f64::INFINITY),
            }
        } else {
            match probe {
                Probe::H => (f64::INFINITY, f64::INFINITY),
                Probe::V => (0.0, 0.0),
            }
        }
    } else {
        match probe {
            Probe::H => {
                let denom = (1.0 - 2.0 * mu) * (1.0 - 2.0 * mu);
                (
                    l2 / (lb2 * params.p()) * (1.0 - mu) * (1.0 - nu) / denom,
                    l2 / (lb2 * params.q()) * mu * nu / denom,
                )
            }
            Probe::V => {
                let numer = (2.0 * nu - 1.0) * (2.0 * nu - 1.0);
                (
                    lb2 * params.p() / l2 * numer / ((1.0 - mu) * (1.0 - nu)),
                    lb2 * params.q() / l2 * numer / (mu * nu),
                )
            }
        }
    };
    Ok(BdaSettings {
        bob_ratio,
        eve_ratio,
        degenerate,
    })
}

/// Scale a (tau_H, tau_V) pair so the larger transmittance is 1; filters
/// only attenuate.
fn normalized_taus(ratio: f64) -> (f64, f64) {
    if ratio >= 1.0 {
        (1.0, 1.0 / ratio)
    } else {
        (ratio, 1.0)
    }
}

/// Post-selection success probability of the optical cloner for one input
/// polarization state, averaged over both probe settings.
///
/// Models two-photon interference on the PDBS (intensity transmittances mu,
/// nu; bunching terms included), BDA filtering with per-mode attenuation-only
/// normalization, and post-selection on one photon per output mode.
pub fn success_probability_for_input(
    input: &StateVector,
    params: &ClonerParams,
    optics: &OpticalModel,
) -> Result<f64> {
    if input.n_qubits() != 1 {
        return Err(Error::DimensionMismatch(
            "success probability expects a single-qubit input".into(),
        ));
    }
    let input = input.normalized()?;
    let (mu, nu) = (optics.mu(), optics.nu());
    let ah2 = input.amp(0).norm_sqr();
    let av2 = input.amp(1).norm_sqr();
    let bunch_h = (2.0 * mu - 1.0) * (2.0 * mu - 1.0);
    let bunch_v = (2.0 * nu - 1.0) * (2.0 * nu - 1.0);
    let cross_t = mu * nu;
    let cross_r = (1.0 - mu) * (1.0 - nu);
    let mut total = 0.0;
    for probe in Probe::BOTH {
        let settings = bda_settings(params, optics, probe)?;
        let (tau_bh, tau_bv) = normalized_taus(settings.bob_ratio);
        let (tau_eh, tau_ev) = normalized_taus(settings.eve_ratio);
        let p_x = match probe {
            // coincidence terms: |HH>, |HV> (transmit-transmit), |VH> (reflect-reflect)
            Probe::H => {
                ah2 * bunch_h * tau_bh * tau_eh
                    + av2 * (cross_t * tau_bh * tau_ev + cross_r * tau_bv * tau_eh)
            }
            Probe::V => {
                av2 * bunch_v * tau_bv * tau_ev
                    + ah2 * (cross_t * tau_bv * tau_eh + cross_r * tau_bh * tau_ev)
            }
        };
        total += 0.5 * p_x;
    }
    Ok(total)
}

/// Success probability p_s = (p_0 + p_1)/2 for the protocols' equatorial
/// inputs (all equatorial states give the same value; rotation invariance is
/// exact for ideal optics).
pub fn success_probability(params: &ClonerParams, optics: &OpticalModel) -> Result<f64> {
    success_probability_for_input(&StateVector::equatorial(0.0), params, optics)
}

/// Channel loss in dB masking a success probability p_s.
pub fn loss_db(p_s: f64) -> f64 {
    -10.0 * p_s.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{trace_distance, uhlmann_fidelity, BlochVector};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn params(p: f64, lambda_sq: f64) -> ClonerParams {
        ClonerParams::from_lambda_sq(p, lambda_sq).unwrap()
    }

    fn random_qubit(rng: &mut ChaCha12Rng) -> StateVector {
        StateVector::qubit(
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        )
        .normalized()
        .unwrap()
    }

    /// Oracle: fit the affine Bloch contraction of Bob's reduction of the
    /// full unitary output over probe Bloch directions.
    fn fitted_shrink(params: &ClonerParams, party: CloneParty) -> (f64, f64) {
        let keep = match party {
            CloneParty::Bob => 0,
            CloneParty::Eve => 1,
        };
        let reduce = |input: &StateVector| -> BlochVector {
            let full = full_unitary_state(input, params).unwrap();
            let rho_be = full
                .to_density()
                .unwrap()
                .trace_out_qubit(2)
                .unwrap();
            rho_be.partial_trace(keep).unwrap().bloch_vector().unwrap()
        };
        // equatorial fit over several phases
        let mut eta = 0.0;
        for k in 0..4 {
            let phi = k as f64 * 0.7;
            let out = reduce(&StateVector::equatorial(phi));
            eta += out.x * phi.cos() + out.y * phi.sin();
        }
        eta /= 4.0;
        let north = reduce(&StateVector::computational(1, 0).unwrap());
        let south = reduce(&StateVector::computational(1, 1).unwrap());
        let eta_perp = (north.z - south.z) / 2.0;
        (eta, eta_perp)
    }

    #[test]
    fn shrinking_factors_match_unitary_fit() {
        for (p, l2, want_eta, want_perp) in [
            (0.5, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0),
            (0.5, 0.5, 1.0 / SQRT_2, 0.5),
        ] {
            let pr = params(p, l2);
            let sf = shrinking_factors(&pr, CloneParty::Bob);
            assert_abs_diff_eq!(sf.eta, want_eta, epsilon = 1e-12);
            assert_abs_diff_eq!(sf.eta_perp, want_perp, epsilon = 1e-12);
            let (fit_eta, fit_perp) = fitted_shrink(&pr, CloneParty::Bob);
            assert_abs_diff_eq!(fit_eta, sf.eta, epsilon = 1e-10);
            assert_abs_diff_eq!(fit_perp, sf.eta_perp, epsilon = 1e-10);
        }
        // p = 1, Lambda^2 = 1/2: Bob's channel is the exact identity
        let pr = params(1.0, 0.5);
        let sf = shrinking_factors(&pr, CloneParty::Bob);
        assert_abs_diff_eq!(sf.eta, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sf.eta_perp, 1.0, epsilon = 1e-12);
        let (fit_eta, fit_perp) = fitted_shrink(&pr, CloneParty::Bob);
        assert_abs_diff_eq!(fit_eta, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit_perp, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn eve_shrink_is_swapped() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..20 {
            let pr = params(rng.gen(), rng.gen());
            let eve = shrinking_factors(&pr, CloneParty::Eve);
            let bob_swapped = shrinking_factors(&pr.swapped(), CloneParty::Bob);
            assert_abs_diff_eq!(eve.eta, bob_swapped.eta, epsilon = 1e-15);
            assert_abs_diff_eq!(eve.eta_perp, bob_swapped.eta_perp, epsilon = 1e-15);
            let (fit_eta, fit_perp) = fitted_shrink(&pr, CloneParty::Eve);
            assert_abs_diff_eq!(fit_eta, eve.eta, epsilon = 1e-10);
            assert_abs_diff_eq!(fit_perp, eve.eta_perp, epsilon = 1e-10);
        }
    }

    #[test]
    fn fidelity_reference_points() {
        let (fb, _) = clone_fidelities(&params(0.5, 1.0 / 3.0));
        assert_abs_diff_eq!(fb, 5.0 / 6.0, epsilon = 1e-12);

        let (fb, _) = clone_fidelities(&params(4.0 / 7.0, 4.0 / 11.0));
        assert_abs_diff_eq!(fb, 19.0 / 22.0, epsilon = 1e-12);

        // universal-cloner point: both fidelities 5/6
        let (fb, fe) = clone_fidelities(&params(0.5, 2.0 / 3.0));
        assert_abs_diff_eq!(fb, 5.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fe, 5.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_swap_symmetry() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..100 {
            let pr = params(rng.gen(), rng.gen());
            let (fb, fe) = clone_fidelities(&pr);
            let (fb_s, fe_s) = clone_fidelities(&pr.swapped());
            assert_abs_diff_eq!(fb, fe_s, epsilon = 1e-15);
            assert_abs_diff_eq!(fe, fb_s, epsilon = 1e-15);
            assert!((0.5..=1.0 + 1e-12).contains(&fb));
        }
    }

    #[test]
    fn probe_map_equatorial_form() {
        // |a_0>, H probe, p = 1/2, Lambda^2 = 1/3: amplitudes (1,1,1,0)/sqrt3
        let out = apply_probe_map(
            &StateVector::equatorial(0.0),
            Probe::H,
            &params(0.5, 1.0 / 3.0),
        )
        .unwrap();
        let r = 1.0 / 3.0f64.sqrt();
        assert_abs_diff_eq!(out.amp(0).re, r, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amp(1).re, r, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amp(2).re, r, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amp(3).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);

        // general equatorial phase
        let pr = params(0.3, 0.6);
        let phi = 2.0 * std::f64::consts::PI / 3.0;
        let out = apply_probe_map(&StateVector::equatorial(phi), Probe::H, &pr).unwrap();
        let e = C64::from_polar(1.0, phi);
        assert_abs_diff_eq!((out.amp(0) - C64::new(pr.lambda(), 0.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            (out.amp(1) - e * pr.lambda_bar() * pr.q().sqrt()).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            (out.amp(2) - e * pr.lambda_bar() * pr.p().sqrt()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn probe_map_is_the_unitary_branch() {
        // Basis inputs map to the ancilla-conditioned branches of the cloning
        // unitary (scaled by sqrt2), so |0> with an H probe yields sqrt2 L |00>.
        let pr = params(0.3, 0.45);
        let zero = StateVector::computational(1, 0).unwrap();
        let out = apply_probe_map(&zero, Probe::H, &pr).unwrap();
        assert_abs_diff_eq!(out.amp(0).re, SQRT_2 * pr.lambda(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.norm_sqr(), 2.0 * pr.lambda_sq(), epsilon = 1e-12);

        let one = StateVector::computational(1, 1).unwrap();
        let out = apply_probe_map(&one, Probe::H, &pr).unwrap();
        assert_abs_diff_eq!(
            out.amp(1).re,
            SQRT_2 * pr.lambda_bar() * pr.q().sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            out.amp(2).re,
            SQRT_2 * pr.lambda_bar() * pr.p().sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn probe_map_pass_through_point() {
        // p = 1, Lambda^2 = 1/2, V probe on |a_0>: Bob's reduction is pure |a_0>.
        let pr = params(1.0, 0.5);
        let a0 = StateVector::equatorial(0.0);
        let out = apply_probe_map(&a0, Probe::V, &pr).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
        let rho_b = out.to_density().unwrap().partial_trace(0).unwrap();
        let f = uhlmann_fidelity(&rho_b, &a0.to_density().unwrap()).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bob_eve_state_reference_points() {
        // optimal R04 settings on |a_1>: Bob's equatorial Bloch length 8/11
        let pr = params(4.0 / 7.0, 4.0 / 11.0);
        let rho = bob_eve_state(&StateVector::equatorial(2.0 * std::f64::consts::PI / 3.0), &pr)
            .unwrap();
        let bob = rho.partial_trace(0).unwrap().bloch_vector().unwrap();
        let eq_len = (bob.x * bob.x + bob.y * bob.y).sqrt();
        assert_abs_diff_eq!(eq_len, 8.0 / 11.0, epsilon = 1e-12);

        // pass-through: Bob pure, Eve carries no equatorial component
        let pr = params(1.0, 0.5);
        let a0 = StateVector::equatorial(0.0);
        let rho = bob_eve_state(&a0, &pr).unwrap();
        let f = uhlmann_fidelity(
            &rho.partial_trace(0).unwrap(),
            &a0.to_density().unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-10);
        let eve = rho.partial_trace(1).unwrap().bloch_vector().unwrap();
        assert_abs_diff_eq!((eve.x * eve.x + eve.y * eve.y).sqrt(), 0.0, epsilon = 1e-12);

        // symmetric phase-covariant point: F(rho_B, input) = (1 + 1/sqrt2)/2
        let pr = params(0.5, 0.5);
        let input = StateVector::equatorial(1.234);
        let rho = bob_eve_state(&input, &pr).unwrap();
        let f = uhlmann_fidelity(
            &rho.partial_trace(0).unwrap(),
            &input.to_density().unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(f, (1.0 + 1.0 / SQRT_2) / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn unitary_transcription() {
        let pr = params(0.37, 0.61);
        let zero = StateVector::computational(1, 0).unwrap();
        let out = full_unitary_state(&zero, &pr).unwrap();
        assert_abs_diff_eq!(out.amp(0b000).re, pr.lambda(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            out.amp(0b011).re,
            pr.lambda_bar() * pr.p().sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            out.amp(0b101).re,
            pr.lambda_bar() * pr.q().sqrt(),
            epsilon = 1e-12
        );
        let one = StateVector::computational(1, 1).unwrap();
        let out = full_unitary_state(&one, &pr).unwrap();
        assert_abs_diff_eq!(out.amp(0b111).re, pr.lambda(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            out.amp(0b100).re,
            pr.lambda_bar() * pr.p().sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            out.amp(0b010).re,
            pr.lambda_bar() * pr.q().sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unitary_equals_probe_mixture() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let pr = params(rng.gen(), rng.gen());
            let input = random_qubit(&mut rng);
            let via_unitary = full_unitary_state(&input, &pr)
                .unwrap()
                .to_density()
                .unwrap()
                .trace_out_qubit(2)
                .unwrap();
            let via_mixture = bob_eve_state(&input, &pr).unwrap();
            let d = trace_distance(&via_unitary, &via_mixture).unwrap();
            assert!(d <= 1e-10, "trace distance {d:.3e}");
        }
    }

    #[test]
    fn phase_covariance_of_bob_fidelity() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let pr = params(0.41, 0.37);
        let reference = {
            let s = StateVector::equatorial(0.0);
            uhlmann_fidelity(
                &bob_eve_state(&s, &pr).unwrap().partial_trace(0).unwrap(),
                &s.to_density().unwrap(),
            )
            .unwrap()
        };
        for _ in 0..50 {
            let s = StateVector::equatorial(rng.gen::<f64>() * 2.0 * std::f64::consts::PI);
            let f = uhlmann_fidelity(
                &bob_eve_state(&s, &pr).unwrap().partial_trace(0).unwrap(),
                &s.to_density().unwrap(),
            )
            .unwrap();
            assert_abs_diff_eq!(f, reference, epsilon = 1e-10);
        }
    }

    #[test]
    fn swapping_p_swaps_the_clones() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..30 {
            let pr = params(rng.gen(), rng.gen());
            let input = random_qubit(&mut rng);
            let rho = bob_eve_state(&input, &pr).unwrap();
            let rho_sw = bob_eve_state(&input, &pr.swapped()).unwrap();
            let d_be = trace_distance(
                &rho.partial_trace(0).unwrap(),
                &rho_sw.partial_trace(1).unwrap(),
            )
            .unwrap();
            let d_eb = trace_distance(
                &rho.partial_trace(1).unwrap(),
                &rho_sw.partial_trace(0).unwrap(),
            )
            .unwrap();
            assert!(d_be <= 1e-10 && d_eb <= 1e-10);
        }
    }

    #[test]
    fn bda_reference_ratios() {
        // measured optics, p = 1/2, Lambda^2 = 1/3, H probe:
        // bob ratio = (0.23*0.81)/0.54^2 = 23/36, eve ratio = 1463/2916
        let st = bda_settings(
            &params(0.5, 1.0 / 3.0),
            &OpticalModel::measured(),
            Probe::H,
        )
        .unwrap();
        assert!(!st.degenerate);
        assert_abs_diff_eq!(st.bob_ratio, 23.0 / 36.0, epsilon = 1e-12);
        assert_abs_diff_eq!(st.eve_ratio, 1463.0 / 2916.0, epsilon = 1e-12);
    }

    #[test]
    fn bda_bob_ratio_product_independent_of_params() {
        // The H- and V-probe Bob ratios multiply to (2nu-1)^2/(2mu-1)^2
        // whatever (p, Lambda) is dialed in.
        let optics = OpticalModel::ideal();
        let expected = {
            let (mu, nu) = (optics.mu(), optics.nu());
            (2.0 * nu - 1.0) * (2.0 * nu - 1.0) / ((2.0 * mu - 1.0) * (2.0 * mu - 1.0))
        };
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..50 {
            let pr = params(
                rng.gen::<f64>() * 0.9 + 0.05,
                rng.gen::<f64>() * 0.9 + 0.05,
            );
            let h = bda_settings(&pr, &optics, Probe::H).unwrap();
            let v = bda_settings(&pr, &optics, Probe::V).unwrap();
            assert_abs_diff_eq!(h.bob_ratio * v.bob_ratio, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn bda_singular_and_degenerate() {
        let pr = params(0.5, 0.5);
        let singular = OpticalModel::new(0.5, 0.19).unwrap();
        assert!(matches!(
            bda_settings(&pr, &singular, Probe::H),
            Err(Error::SingularOptics(_))
        ));
        // Lambda = 1 sentinel
        let st = bda_settings(&params(0.5, 1.0), &OpticalModel::measured(), Probe::H).unwrap();
        assert!(st.degenerate);
        assert!(st.bob_ratio.is_infinite());
        let st = bda_settings(&params(0.5, 0.0), &OpticalModel::measured(), Probe::H).unwrap();
        assert!(st.degenerate);
        assert_eq!(st.bob_ratio, 0.0);
    }

    #[test]
    fn success_probability_reference_values() {
        // ideal optics: 1/8 at the BB84 optimum, 11/72 at the R04 optimum
        let ideal = OpticalModel::ideal();
        let ps = success_probability(&params(0.5, 1.0 / 3.0), &ideal).unwrap();
        assert_abs_diff_eq!(ps, 0.125, epsilon = 1e-12);
        let ps = success_probability(&params(4.0 / 7.0, 4.0 / 11.0), &ideal).unwrap();
        assert_abs_diff_eq!(ps, 11.0 / 72.0, epsilon = 1e-12);

        for optics in [OpticalModel::ideal(), OpticalModel::measured()] {
            for (p, l2) in [(0.5, 1.0 / 3.0), (4.0 / 7.0, 4.0 / 11.0)] {
                let ps = success_probability(&params(p, l2), &optics).unwrap();
                assert!(ps > 0.0 && ps <= 1.0);
            }
        }
        // a 20% success probability masks as ~7 dB of loss
        assert_abs_diff_eq!(loss_db(0.2), 6.9897, epsilon = 1e-4);
    }

    #[test]
    fn success_probability_phase_invariant_for_ideal_optics() {
        let ideal = OpticalModel::ideal();
        let pr = params(0.44, 0.29);
        let reference = success_probability(&pr, &ideal).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..50 {
            let s = StateVector::equatorial(rng.gen::<f64>() * 2.0 * std::f64::consts::PI);
            let ps = success_probability_for_input(&s, &pr, &ideal).unwrap();
            assert_abs_diff_eq!(ps, reference, epsilon = 1e-10);
        }
    }

    #[test]
    fn params_validation() {
        assert!(ClonerParams::new(1.2, 0.5).is_err());
        assert!(ClonerParams::new(0.5, -0.1).is_err());
        assert!(ClonerParams::from_lambda_sq(0.5, 1.4).is_err());
        let pr = params(0.25, 0.36);
        assert_abs_diff_eq!(pr.lambda(), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(pr.q(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(
            pr.lambda_bar(),
            (1.0f64 - 0.36).sqrt(),
            epsilon = 1e-15
        );
    }
}
