//! Eve's post-sifting strategy: conditional probe states, Helstrom
//! measurement construction, and the three-party joint bit distribution.
//!
//! For every announcement context the probe state conditioned on "all
//! parties share bit m" is contracted out of the two-qubit clone state; the
//! minimum-error measurement discriminating the two conditional states is
//! the projective pair along the difference of their unnormalized Bloch
//! vectors. Block distributions are Born-rule tables normalized per context
//! under the uniform-success-rate assumption.

use num_complex::Complex64 as C64;

use crate::cloner::{apply_probe_map, ClonerParams, Probe};
use crate::error::{Error, Result};
use crate::protocols::{Announcement, Protocol};
use crate::qstate::{BlochVector, DensityMatrix, StateVector};

/// One of the three parties of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
    Eve,
}

impl Party {
    fn axis(self) -> usize {
        match self {
            Party::Alice => 0,
            Party::Bob => 1,
            Party::Eve => 2,
        }
    }
}

/// Eve's two-outcome projective measurement: orthogonal pure states e_0, e_1
/// with their Bloch angles (theta_m, phi_m).
#[derive(Clone, Debug)]
pub struct PovmPair {
    pub states: [StateVector; 2],
    pub theta: [f64; 2],
    pub phi: [f64; 2],
}

impl PovmPair {
    fn from_direction(direction: BlochVector) -> Self {
        let mut states = Vec::with_capacity(2);
        let mut theta = [0.0; 2];
        let mut phi = [0.0; 2];
        for (m, sign) in [1.0, -1.0].into_iter().enumerate() {
            let u = BlochVector::new(
                sign * direction.x,
                sign * direction.y,
                sign * direction.z,
            );
            let th = u.z.clamp(-1.0, 1.0).acos();
            let ph = u.y.atan2(u.x);
            theta[m] = th;
            phi[m] = ph;
            states.push(StateVector::qubit(
                C64::new((th / 2.0).cos(), 0.0),
                C64::from_polar((th / 2.0).sin(), ph),
            ));
        }
        let states: [StateVector; 2] = states.try_into().expect("two states");
        Self { states, theta, phi }
    }

    /// Fixed X-basis measurement; the degenerate-context fallback.
    pub fn x_basis() -> Self {
        Self::from_direction(BlochVector::new(1.0, 0.0, 0.0))
    }

    /// Equatorial projective pair at the given phase.
    pub fn equatorial(phase: f64) -> Self {
        Self::from_direction(BlochVector::new(phase.cos(), phase.sin(), 0.0))
    }
}

/// Threshold below which the two Bloch vectors count as equal.
const DEGENERACY_TOL: f64 = 1e-12;

/// Minimum-error measurement for two (unnormalized) conditional states:
/// e_m points along (eps_m - eps_{1-m}) / |eps_m - eps_{1-m}|, with the
/// Bloch vectors taken from the unnormalized states so their norms act as
/// prior weights.
pub fn helstrom_povm(eps0: &StateVector, eps1: &StateVector) -> Result<PovmPair> {
    let v0 = eps0.bloch_unnormalized()?;
    let v1 = eps1.bloch_unnormalized()?;
    helstrom_from_blochs(v0, v1)
}

fn helstrom_from_blochs(v0: BlochVector, v1: BlochVector) -> Result<PovmPair> {
    let d = BlochVector::new(v0.x - v1.x, v0.y - v1.y, v0.z - v1.z);
    let n = d.norm();
    if n <= DEGENERACY_TOL {
        return Err(Error::IndistinguishableStates);
    }
    Ok(PovmPair::from_direction(BlochVector::new(
        d.x / n,
        d.y / n,
        d.z / n,
    )))
}

/// Alice-state index carrying bit k under a context, and Bob-outcome index
/// carrying bit l; also the contraction pairing for eps_m.
fn block_indices(protocol: Protocol, announcement: Announcement) -> Result<([usize; 2], [usize; 2])> {
    match (protocol, announcement) {
        (Protocol::R04, Announcement::ExcludedTrine(n)) => {
            if n >= 3 {
                return Err(Error::MalformedAnnouncement(format!(
                    "excluded trine index {n} out of range"
                )));
            }
            Ok(([(n + 1) % 3, n], [(n + 1) % 3, (n + 2) % 3]))
        }
        (Protocol::Bb84, Announcement::Basis(y)) => {
            if y >= 2 {
                return Err(Error::MalformedAnnouncement(format!(
                    "basis index {y} out of range"
                )));
            }
            Ok(([y, 2 + y], [y, 2 + y]))
        }
        _ => Err(Error::MalformedAnnouncement(format!(
            "announcement {announcement:?} does not belong to protocol {}",
            protocol.name()
        ))),
    }
}

fn announcement_for(protocol: Protocol, ctx: usize) -> Announcement {
    match protocol {
        Protocol::Bb84 => Announcement::Basis(ctx),
        Protocol::R04 => Announcement::ExcludedTrine(ctx),
    }
}

/// Contract Bob's mode of a two-qubit vector with <b|, leaving Eve's qubit.
fn contract_bob(b: &StateVector, psi: &StateVector) -> StateVector {
    let mut amps = [C64::new(0.0, 0.0); 2];
    for (e, amp) in amps.iter_mut().enumerate() {
        *amp = b.amp(0).conj() * psi.amp(e) + b.amp(1).conj() * psi.amp(2 + e);
    }
    StateVector::qubit(amps[0], amps[1])
}

/// Source of clone-channel statistics per (probe, Alice state).
trait BlockSource {
    fn joint_prob(
        &self,
        probe: Probe,
        alice_index: usize,
        bob: &StateVector,
        eve: &StateVector,
    ) -> Result<f64>;

    fn eve_conditional_bloch(
        &self,
        probe: Probe,
        alice_index: usize,
        bob: &StateVector,
    ) -> Result<BlochVector>;
}

/// Analytic pure-state channel generated by the cloner maps.
struct PureSource<'a> {
    protocol: Protocol,
    params: &'a ClonerParams,
}

impl PureSource<'_> {
    fn psi(&self, probe: Probe, alice_index: usize) -> Result<StateVector> {
        apply_probe_map(&self.protocol.alice_state(alice_index)?, probe, self.params)
    }
}

impl BlockSource for PureSource<'_> {
    fn joint_prob(
        &self,
        probe: Probe,
        alice_index: usize,
        bob: &StateVector,
        eve: &StateVector,
    ) -> Result<f64> {
        let psi = self.psi(probe, alice_index)?;
        let proj = bob.tensor(eve)?;
        Ok(proj.inner(&psi)?.norm_sqr())
    }

    fn eve_conditional_bloch(
        &self,
        probe: Probe,
        alice_index: usize,
        bob: &StateVector,
    ) -> Result<BlochVector> {
        contract_bob(bob, &self.psi(probe, alice_index)?).bloch_unnormalized()
    }
}

/// Externally supplied two-qubit density matrices, one per probe and Alice
/// state: the tomography-driven data-processing path.
#[derive(Clone, Debug)]
pub struct DensityChannel {
    protocol: Protocol,
    // states[x][j]: state shared by Bob and Eve when the probe was x and
    // Alice sent her j-th state
    states: [Vec<DensityMatrix>; 2],
}

impl DensityChannel {
    pub fn new(
        protocol: Protocol,
        h_probe: Vec<DensityMatrix>,
        v_probe: Vec<DensityMatrix>,
    ) -> Result<Self> {
        let want = protocol.alice_state_count();
        for (name, set) in [("H", &h_probe), ("V", &v_probe)] {
            if set.len() != want {
                return Err(Error::DimensionMismatch(format!(
                    "{name}-probe channel needs {want} states, got {}",
                    set.len()
                )));
            }
            if let Some(bad) = set.iter().find(|r| r.n_qubits() != 2) {
                return Err(Error::DimensionMismatch(format!(
                    "channel states must be two-qubit, got {} qubits",
                    bad.n_qubits()
                )));
            }
        }
        Ok(Self {
            protocol,
            states: [h_probe, v_probe],
        })
    }

    /// Exact channel from the cloner maps, useful as a reference input.
    pub fn from_params(protocol: Protocol, params: &ClonerParams) -> Result<Self> {
        let mut sets: [Vec<DensityMatrix>; 2] = [Vec::new(), Vec::new()];
        for probe in Probe::BOTH {
            for j in 0..protocol.alice_state_count() {
                let psi = apply_probe_map(&protocol.alice_state(j)?, probe, params)?;
                sets[probe.bit()].push(psi.to_density()?);
            }
        }
        let [h, v] = sets;
        Self::new(protocol, h, v)
    }

    /// Replace every state by v*rho + (1-v)*I/4.
    pub fn with_white_noise(&self, v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ParameterRange {
                name: "noise weight v",
                value: v,
            });
        }
        let mixed = DensityMatrix::maximally_mixed(2)?;
        let mut out = self.clone();
        for set in out.states.iter_mut() {
            for rho in set.iter_mut() {
                *rho = rho.mix(&mixed, 1.0 - v)?;
            }
        }
        Ok(out)
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn state(&self, probe: Probe, alice_index: usize) -> &DensityMatrix {
        &self.states[probe.bit()][alice_index]
    }
}

impl BlockSource for &DensityChannel {
    fn joint_prob(
        &self,
        probe: Probe,
        alice_index: usize,
        bob: &StateVector,
        eve: &StateVector,
    ) -> Result<f64> {
        let proj = bob.tensor(eve)?;
        self.state(probe, alice_index).expectation(&proj)
    }

    fn eve_conditional_bloch(
        &self,
        probe: Probe,
        alice_index: usize,
        bob: &StateVector,
    ) -> Result<BlochVector> {
        let rho = self.state(probe, alice_index);
        // omega = <b| rho |b> contracted over Bob's mode
        let mut om = [[C64::new(0.0, 0.0); 2]; 2];
        for e1 in 0..2 {
            for e2 in 0..2 {
                let mut s = C64::new(0.0, 0.0);
                for b1 in 0..2 {
                    for b2 in 0..2 {
                        s += bob.amp(b1).conj()
                            * bob.amp(b2)
                            * rho.entry(2 * b1 + e1, 2 * b2 + e2);
                    }
                }
                om[e1][e2] = s;
            }
        }
        Ok(BlochVector::new(
            2.0 * om[1][0].re,
            2.0 * om[1][0].im,
            (om[0][0] - om[1][1]).re,
        ))
    }
}

/// Eve's conditional probe states (eps_0, eps_1) for one context,
/// unnormalized (their norms encode the prior weights).
pub fn eve_conditional_states(
    protocol: Protocol,
    params: &ClonerParams,
    probe: Probe,
    announcement: Announcement,
) -> Result<(StateVector, StateVector)> {
    let (alice_for_k, bob_for_l) = block_indices(protocol, announcement)?;
    let source = PureSource { protocol, params };
    let mut out = Vec::with_capacity(2);
    for m in 0..2 {
        let bob = protocol.bob_state(bob_for_l[m])?;
        let psi = source.psi(probe, alice_for_k[m])?;
        out.push(contract_bob(&bob, &psi));
    }
    let e1 = out.pop().expect("two states");
    let e0 = out.pop().expect("two states");
    Ok((e0, e1))
}

/// Normalized per-context joint table with the measurement that produced it.
#[derive(Clone, Debug)]
pub struct ContextBlock {
    pub probe: Probe,
    pub announcement: Announcement,
    pub povm: PovmPair,
    /// True when the conditional states were indistinguishable and the
    /// X-basis fallback was measured instead.
    pub degenerate_povm: bool,
    pub table: [[[f64; 2]; 2]; 2],
}

fn build_block<S: BlockSource>(
    source: &S,
    protocol: Protocol,
    probe: Probe,
    announcement: Announcement,
    povm_override: Option<&PovmPair>,
) -> Result<ContextBlock> {
    let (alice_for_k, bob_for_l) = block_indices(protocol, announcement)?;
    let (povm, degenerate_povm) = if let Some(p) = povm_override {
        (p.clone(), false)
    } else {
        let mut blochs = Vec::with_capacity(2);
        for m in 0..2 {
            let bob = protocol.bob_state(bob_for_l[m])?;
            blochs.push(source.eve_conditional_bloch(probe, alice_for_k[m], &bob)?);
        }
        match helstrom_from_blochs(blochs[0], blochs[1]) {
            Ok(p) => (p, false),
            // An uninformed Eve measures X; m comes out independent of (k, l).
            Err(Error::IndistinguishableStates) => (PovmPair::x_basis(), true),
            Err(e) => return Err(e),
        }
    };
    let mut table = [[[0.0; 2]; 2]; 2];
    let mut total = 0.0;
    for k in 0..2 {
        for l in 0..2 {
            let bob = protocol.bob_state(bob_for_l[l])?;
            for m in 0..2 {
                let p = source.joint_prob(probe, alice_for_k[k], &bob, &povm.states[m])?;
                table[k][l][m] = p;
                total += p;
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::MalformedAnnouncement(
            "context block has zero total probability".into(),
        ));
    }
    for row in table.iter_mut().flatten().flatten() {
        *row /= total;
    }
    Ok(ContextBlock {
        probe,
        announcement,
        povm,
        degenerate_povm,
        table,
    })
}

fn blocks_from_source<S: BlockSource>(
    source: &S,
    protocol: Protocol,
    povm_override: Option<&dyn Fn(Probe, Announcement) -> PovmPair>,
) -> Result<Vec<ContextBlock>> {
    let mut blocks = Vec::with_capacity(2 * protocol.context_count());
    for probe in Probe::BOTH {
        for ctx in 0..protocol.context_count() {
            let ann = announcement_for(protocol, ctx);
            let ovr = povm_override.map(|f| f(probe, ann));
            blocks.push(build_block(source, protocol, probe, ann, ovr.as_ref())?);
        }
    }
    Ok(blocks)
}

/// All (probe, context) block distributions for the analytic channel.
pub fn context_blocks(protocol: Protocol, params: &ClonerParams) -> Result<Vec<ContextBlock>> {
    blocks_from_source(&PureSource { protocol, params }, protocol, None)
}

/// Block distributions computed from measured two-qubit density matrices.
pub fn context_blocks_from_density(channel: &DensityChannel) -> Result<Vec<ContextBlock>> {
    blocks_from_source(&channel, channel.protocol(), None)
}

/// 2x2x2 joint probability table over (Alice bit k, Bob bit l, Eve bit m).
#[derive(Clone, Debug)]
pub struct JointDistribution {
    table: [[[f64; 2]; 2]; 2],
    protocol: Protocol,
    params: Option<ClonerParams>,
}

const SUM_TOL: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-9;

impl JointDistribution {
    fn from_blocks(
        blocks: &[ContextBlock],
        protocol: Protocol,
        params: Option<ClonerParams>,
        enforce_balance: bool,
    ) -> Result<Self> {
        let w = 1.0 / blocks.len() as f64;
        let mut table = [[[0.0; 2]; 2]; 2];
        for block in blocks {
            for k in 0..2 {
                for l in 0..2 {
                    for m in 0..2 {
                        table[k][l][m] += w * block.table[k][l][m];
                    }
                }
            }
        }
        let dist = Self {
            table,
            protocol,
            params,
        };
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::MalformedAnnouncement(format!(
                "joint distribution sums to {sum}, not 1"
            )));
        }
        if enforce_balance {
            for party in [Party::Alice, Party::Bob, Party::Eve] {
                let marg = dist.single_marginal(party);
                if (marg[0] - 0.5).abs() > MARGINAL_TOL {
                    return Err(Error::MalformedAnnouncement(format!(
                        "{party:?} marginal {:.12} violates bit balance",
                        marg[0]
                    )));
                }
            }
        }
        Ok(dist)
    }

    /// Normalized table from empirical joint counts.
    pub fn from_counts(counts: &[[[u64; 2]; 2]; 2], protocol: Protocol) -> Result<Self> {
        let total: u64 = counts.iter().flatten().flatten().sum();
        if total == 0 {
            return Err(Error::MonteCarlo("no conclusive counts".into()));
        }
        let mut table = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    table[k][l][m] = counts[k][l][m] as f64 / total as f64;
                }
            }
        }
        Ok(Self {
            table,
            protocol,
            params: None,
        })
    }

    pub fn probability(&self, k: usize, l: usize, m: usize) -> f64 {
        self.table[k][l][m]
    }

    pub fn table(&self) -> &[[[f64; 2]; 2]; 2] {
        &self.table
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn params(&self) -> Option<ClonerParams> {
        self.params
    }

    fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.table.iter().flatten().flatten().copied()
    }

    /// Probability that Bob's sifted bit differs from Alice's.
    pub fn qber(&self) -> f64 {
        let mut s = 0.0;
        for k in 0..2 {
            for m in 0..2 {
                s += self.table[k][1 - k][m];
            }
        }
        s
    }

    pub fn single_marginal(&self, party: Party) -> [f64; 2] {
        let ax = party.axis();
        let mut out = [0.0; 2];
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    let idx = [k, l, m][ax];
                    out[idx] += self.table[k][l][m];
                }
            }
        }
        out
    }

    pub fn pair_marginal(&self, a: Party, b: Party) -> [[f64; 2]; 2] {
        let (ax_a, ax_b) = (a.axis(), b.axis());
        let mut out = [[0.0; 2]; 2];
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    let idx = [k, l, m];
                    out[idx[ax_a]][idx[ax_b]] += self.table[k][l][m];
                }
            }
        }
        out
    }
}

/// Joint bit distribution of the analytic attack at the given settings.
pub fn joint_distribution(protocol: Protocol, params: &ClonerParams) -> Result<JointDistribution> {
    let blocks = context_blocks(protocol, params)?;
    JointDistribution::from_blocks(&blocks, protocol, Some(*params), true)
}

/// Joint bit distribution computed from measured density matrices; bit
/// balance is not enforced because finite-statistics reconstructions break
/// it at the noise level.
pub fn joint_distribution_from_density(channel: &DensityChannel) -> Result<JointDistribution> {
    let blocks = context_blocks_from_density(channel)?;
    JointDistribution::from_blocks(&blocks, channel.protocol(), None, false)
}

/// Joint distribution with Eve's measurement replaced in every context;
/// used to probe the optimality of the Helstrom choice.
#[cfg(test)]
fn joint_distribution_with_povm(
    protocol: Protocol,
    params: &ClonerParams,
    povm: &dyn Fn(Probe, Announcement) -> PovmPair,
) -> Result<JointDistribution> {
    let source = PureSource { protocol, params };
    let blocks = blocks_from_source(&source, protocol, Some(povm))?;
    JointDistribution::from_blocks(&blocks, protocol, Some(*params), false)
}
