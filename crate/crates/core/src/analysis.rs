//! Zero-error attack characterization and robustness classification.
//!
//! An individual-particle attack is an isometry from the sender's qubit
//! space into (eavesdropper ancilla) x (channel to the receiver): for each
//! computational-basis input `i` it attaches an unnormalized ancilla vector
//! `v_{i,k}` to every channel basis element `k` (the vacuum plus the input
//! bins that can influence the receiver). The attack causes no error on a
//! scheme exactly when, for every alphabet state and every wrong-bit or
//! invalid outcome `j`, the combination `sum_{i,k} alpha_i beta_{k,j}
//! v_{i,k}` vanishes. Stacking one row per (state, bad outcome) over the
//! column set `(i, k)` gives a linear system whose nullspace is precisely
//! the set of undetectable attacks.
//!
//! A scheme is robust when every nullspace direction that actually forwards
//! a photon is bit-independent - the attack either transmits the qubit
//! intact or blocks it. It is nonrobust when the nullspace admits
//! bit-exclusive channel directions, from which a concrete full-information
//! witness attack is assembled. Both readings are computed here - a
//! structural test on the nullspace and a dynamic search for a leaking
//! witness - and the verdict requires them to agree.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{Amplitude, FockBasisState, ModeLabel, StateVector};
use crate::interferometer::{beta_matrix, reversed_space, BobSetup, InterferometerError};
use crate::linalg;
use crate::optics::{OpticsError, DEFAULT_PHOTON_CAP};
use crate::schemes::{
    interpret, qubit_amplitudes, AliceState, BasisArm, BasisId, Outcome, SchemeDefinition,
    SchemeError,
};

/// Residual tolerance for zero-error and isometry checks.
pub const ANALYSIS_TOLERANCE: f64 = 1e-9;

/// Eavesdropper information below this many bits counts as no leak.
pub const LEAK_TOLERANCE: f64 = 1e-6;

/// Basis-dependent loss asymmetry above this fraction is flagged in session
/// reports as a signature worth investigating.
pub const LOSS_ASYMMETRY_FLAG: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("attack blocks are not an isometry (max deviation {0:.3e})")]
    NotAnIsometry(f64),
    #[error("attack uses channel bins outside the scheme's reachable input space: {0}")]
    IncompatibleAttack(String),
    #[error("blocking probability must lie in [0, 1], got {0}")]
    BadBlockingProbability(f64),
    #[error("structural and dynamic robustness checks disagree (structural robust: {structural}, witness found: {witness_found})")]
    VerdictDisagreement {
        structural: bool,
        witness_found: bool,
    },
    #[error("expected a one-dimensional solution ray, found nullity {0}")]
    UnexpectedSolutionSpace(usize),
    #[error("two-photon analysis requires an interfering setup for the expected basis")]
    NeedsInterferingSetup,
    #[error("state holds a term with {0} photons, beyond the two-photon analysis")]
    TooManyPhotons(u32),
    #[error("cannot classify the zero state")]
    EmptyState,
    #[error("bad attack record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Interferometer(#[from] InterferometerError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
}

/// Basis element of the channel the eavesdropper may send: the vacuum or one
/// photon in an input bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChannelIndex {
    Vacuum,
    Bin(i32),
}

impl fmt::Display for ChannelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelIndex::Vacuum => write!(f, "V"),
            ChannelIndex::Bin(b) => write!(f, "t'{b}"),
        }
    }
}

impl ChannelIndex {
    pub fn parse(s: &str) -> Result<Self, AnalysisError> {
        if s == "V" {
            return Ok(ChannelIndex::Vacuum);
        }
        s.strip_prefix("t'")
            .and_then(|rest| rest.parse().ok())
            .map(ChannelIndex::Bin)
            .ok_or_else(|| AnalysisError::BadRecord(format!("bad channel index {s:?}")))
    }
}

/// Column of the constraint system: sender bit `i` paired with channel
/// element `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ColumnKey {
    pub bit: u8,
    pub channel: ChannelIndex,
}

impl fmt::Display for ColumnKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(i={}, k={})", self.bit, self.channel)
    }
}

/// Provenance of one constraint row.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow {
    pub basis: BasisId,
    pub bit: u8,
    /// The offending outcome window.
    pub outcome: ModeLabel,
    pub class: Outcome,
}

impl fmt::Display for ConstraintRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "state ({}, bit {}) must never yield {} ({})",
            self.basis, self.bit, self.outcome, self.class
        )
    }
}

/// The stacked zero-error conditions of a scheme.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub columns: Vec<ColumnKey>,
    pub rows: Vec<ConstraintRow>,
    pub matrix: DMatrix<Amplitude>,
    /// Input bins that can influence at least one arm's measurement.
    pub channel_bins: Vec<i32>,
    /// Per basis: window bins no measured mode can see.
    pub irrelevant_bins: BTreeMap<BasisId, Vec<i32>>,
}

/// Input bins that can reach any arm's measured modes, via the reversed
/// transform of each setup.
pub fn scheme_channel_bins(scheme: &SchemeDefinition) -> Result<Vec<i32>, AnalysisError> {
    let mut bins: Vec<i32> = Vec::new();
    for arm in &scheme.arms {
        let measured: Vec<ModeLabel> = arm.model.windows().iter().cloned().collect();
        let rs = reversed_space(&arm.setup, &measured)?;
        for b in rs.relevant_bins {
            if !bins.contains(&b) {
                bins.push(b);
            }
        }
    }
    bins.sort_unstable();
    Ok(bins)
}

/// Build the zero-error constraint system: one row per (alphabet state,
/// wrong-bit or invalid single-photon outcome), with coefficient
/// `alpha_i * beta_{k,j}` on column `(i, k)`. Vacuum columns never appear in
/// a row: the vacuum reaches no detector, so blocking is always allowed.
pub fn build_constraints(scheme: &SchemeDefinition) -> Result<ConstraintSystem, AnalysisError> {
    let bins = scheme_channel_bins(scheme)?;
    let mut columns = Vec::new();
    for bit in [0u8, 1] {
        columns.push(ColumnKey {
            bit,
            channel: ChannelIndex::Vacuum,
        });
        for &b in &bins {
            columns.push(ColumnKey {
                bit,
                channel: ChannelIndex::Bin(b),
            });
        }
    }

    let mut irrelevant_bins = BTreeMap::new();
    let mut rows: Vec<ConstraintRow> = Vec::new();
    let mut entries: Vec<Vec<Amplitude>> = Vec::new();
    for arm in &scheme.arms {
        let measured: Vec<ModeLabel> = arm.model.windows().iter().cloned().collect();
        let rs = reversed_space(&arm.setup, &measured)?;
        irrelevant_bins.insert(arm.basis, rs.irrelevant_bins);
        let beta = beta_matrix(&arm.setup, &bins, &measured)?;
        for bit in [0u8, 1] {
            let state = scheme.state(arm.basis, bit)?;
            let alpha = qubit_amplitudes(state);
            let wrong = if bit == 0 {
                Outcome::Bit1
            } else {
                Outcome::Bit0
            };
            let mut bad = arm.model.single_click_patterns(wrong);
            bad.extend(arm.model.single_click_patterns(Outcome::Invalid));
            for pattern in bad {
                let window = pattern
                    .clicked_modes()
                    .next()
                    .expect("single-click pattern")
                    .clone();
                let j = measured
                    .iter()
                    .position(|m| *m == window)
                    .expect("window is measured");
                let class = interpret(&pattern, &arm.model)?;
                let mut row = vec![Amplitude::ZERO; columns.len()];
                for (col, key) in columns.iter().enumerate() {
                    if let ChannelIndex::Bin(b) = key.channel {
                        let k = bins.iter().position(|x| *x == b).expect("bin listed");
                        // A photon the sender never emits: alpha weights only
                        // bins 0 and 1, but the eavesdropper may use any k.
                        row[col] = alpha[key.bit as usize] * beta[(k, j)];
                    }
                }
                rows.push(ConstraintRow {
                    basis: arm.basis,
                    bit,
                    outcome: window,
                    class,
                });
                entries.push(row);
            }
        }
    }

    let matrix = DMatrix::from_fn(rows.len(), columns.len(), |r, c| entries[r][c]);
    Ok(ConstraintSystem {
        columns,
        rows,
        matrix,
        channel_bins: bins,
        irrelevant_bins,
    })
}

/// The solved space of undetectable attacks.
#[derive(Clone, Debug)]
pub struct ZeroErrorSpace {
    pub columns: Vec<ColumnKey>,
    pub rank: usize,
    pub nullity: usize,
    /// Orthonormal nullspace basis over the column set.
    pub basis: Vec<DVector<Amplitude>>,
}

/// Rank-revealing elimination of the constraint matrix. Every returned basis
/// vector is confirmed to satisfy all constraints within
/// [`ANALYSIS_TOLERANCE`].
pub fn solve_zero_error(cs: &ConstraintSystem) -> ZeroErrorSpace {
    let elim = linalg::nullspace(&cs.matrix);
    for v in &elim.nullspace {
        let r = linalg::residual(&cs.matrix, v);
        assert!(
            r < ANALYSIS_TOLERANCE,
            "nullspace vector fails constraints: residual {r:.3e}"
        );
    }
    ZeroErrorSpace {
        columns: cs.columns.clone(),
        rank: elim.rank,
        nullity: elim.nullity,
        basis: elim.nullspace,
    }
}

// ---------------------------------------------------------------------------
// Attacks
// ---------------------------------------------------------------------------

/// An individual-particle attack: for each sender bit `i`, the matrix of
/// ancilla vectors `v_{i,k}` (rows follow the channel list, columns the
/// ancilla dimension). The isometry condition
/// `sum_k <v_{i,k}|v_{i',k}> = delta_{i,i'}` is checked at construction.
#[derive(Clone, Debug)]
pub struct AttackIsometry {
    pub name: String,
    pub channel: Vec<ChannelIndex>,
    pub eve_dim: usize,
    blocks: [DMatrix<Amplitude>; 2],
}

impl AttackIsometry {
    pub fn new(
        name: impl Into<String>,
        channel: Vec<ChannelIndex>,
        blocks: [DMatrix<Amplitude>; 2],
    ) -> Result<Self, AnalysisError> {
        let eve_dim = blocks[0].ncols();
        for b in &blocks {
            assert_eq!(b.nrows(), channel.len(), "block rows must follow channel");
            assert_eq!(
                b.ncols(),
                eve_dim,
                "blocks must share the ancilla dimension"
            );
        }
        let mut dev: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let gram: Amplitude = (blocks[i].adjoint() * &blocks[j]).trace();
                let want = if i == j {
                    Amplitude::ONE
                } else {
                    Amplitude::ZERO
                };
                dev = dev.max((gram - want).norm());
            }
        }
        if dev > ANALYSIS_TOLERANCE {
            return Err(AnalysisError::NotAnIsometry(dev));
        }
        Ok(Self {
            name: name.into(),
            channel,
            eve_dim,
            blocks,
        })
    }

    /// Ancilla vector `v_{bit,k}`.
    pub fn eve_vector(&self, bit: u8, k: &ChannelIndex) -> DVector<Amplitude> {
        match self.channel.iter().position(|c| c == k) {
            Some(row) => self.blocks[bit as usize].row(row).transpose(),
            None => DVector::zeros(self.eve_dim),
        }
    }

    pub fn channel_bins(&self) -> Vec<i32> {
        self.channel
            .iter()
            .filter_map(|c| match c {
                ChannelIndex::Bin(b) => Some(*b),
                ChannelIndex::Vacuum => None,
            })
            .collect()
    }

    pub fn block(&self, bit: u8) -> &DMatrix<Amplitude> {
        &self.blocks[bit as usize]
    }

    /// Largest violation of the scheme's zero-error constraints over the
    /// attack's ancilla columns. Zero (within tolerance) means the attack is
    /// undetectable on this scheme.
    pub fn zero_error_residual(&self, cs: &ConstraintSystem) -> f64 {
        let mut worst: f64 = 0.0;
        for e in 0..self.eve_dim {
            let col = DVector::from_fn(cs.columns.len(), |idx, _| {
                let key = cs.columns[idx];
                self.channel
                    .iter()
                    .position(|c| *c == key.channel)
                    .map(|row| self.blocks[key.bit as usize][(row, e)])
                    .unwrap_or(Amplitude::ZERO)
            });
            worst = worst.max(linalg::residual(&cs.matrix, &col));
        }
        worst
    }

    pub fn to_record(&self) -> AttackRecord {
        let dump = |m: &DMatrix<Amplitude>| -> Vec<Vec<(f64, f64)>> {
            (0..m.nrows())
                .map(|r| {
                    (0..m.ncols())
                        .map(|c| (m[(r, c)].re, m[(r, c)].im))
                        .collect()
                })
                .collect()
        };
        AttackRecord {
            name: self.name.clone(),
            channel: self.channel.iter().map(|c| c.to_string()).collect(),
            eve_dim: self.eve_dim,
            bit0: dump(&self.blocks[0]),
            bit1: dump(&self.blocks[1]),
        }
    }

    pub fn from_record(record: &AttackRecord) -> Result<Self, AnalysisError> {
        let channel: Vec<ChannelIndex> = record
            .channel
            .iter()
            .map(|s| ChannelIndex::parse(s))
            .collect::<Result<_, _>>()?;
        let rows_count = channel.len();
        let load = |rows: &Vec<Vec<(f64, f64)>>| -> Result<DMatrix<Amplitude>, AnalysisError> {
            if rows.len() != rows_count || rows.iter().any(|r| r.len() != record.eve_dim) {
                return Err(AnalysisError::BadRecord(
                    "block shape does not match channel and ancilla dimensions".into(),
                ));
            }
            Ok(DMatrix::from_fn(rows_count, record.eve_dim, |r, c| {
                Amplitude::new(rows[r][c].0, rows[r][c].1)
            }))
        };
        let blocks = [load(&record.bit0)?, load(&record.bit1)?];
        Self::new(record.name.clone(), channel, blocks)
    }
}

/// Serialized attack form.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AttackRecord {
    pub name: String,
    pub channel: Vec<String>,
    pub eve_dim: usize,
    pub bit0: Vec<Vec<(f64, f64)>>,
    pub bit1: Vec<Vec<(f64, f64)>>,
}

/// The canned attack catalog.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AttackKind {
    /// Forward the qubit untouched, keep an unentangled ancilla.
    Identity,
    /// Forward with amplitude `p`; otherwise replace by vacuum and record
    /// which bit was blocked in orthogonal ancilla states.
    Blocking(f64),
    /// Measure in the given basis and resend the measured state, recording
    /// the outcome.
    MeasureResend(BasisId),
    /// Resend bit 0 as a photon in bin t'_{-1} and bit 1 as one in t'_2,
    /// with orthogonal ancilla records. Against a fixed-interferometer
    /// scheme these bins can only trigger the early/late readout windows.
    FakeTimeBin,
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackKind::Identity => write!(f, "identity"),
            AttackKind::Blocking(p) => write!(f, "blocking:{p}"),
            AttackKind::MeasureResend(b) => write!(f, "measure-resend:{b}"),
            AttackKind::FakeTimeBin => write!(f, "fake-time-bin"),
        }
    }
}

impl AttackKind {
    /// Parse a textual attack spec: `identity`, `blocking:<p>`,
    /// `measure-resend:<basis>`, or `fake-time-bin`.
    pub fn parse(spec: &str) -> Result<Self, AnalysisError> {
        if spec == "identity" {
            return Ok(AttackKind::Identity);
        }
        if spec == "fake-time-bin" {
            return Ok(AttackKind::FakeTimeBin);
        }
        if let Some(p) = spec.strip_prefix("blocking:") {
            let p: f64 = p
                .parse()
                .map_err(|_| AnalysisError::BadRecord(format!("bad probability in {spec:?}")))?;
            return Ok(AttackKind::Blocking(p));
        }
        if let Some(b) = spec.strip_prefix("measure-resend:") {
            let basis = BasisId::parse(b).map_err(|e| AnalysisError::BadRecord(e.to_string()))?;
            return Ok(AttackKind::MeasureResend(basis));
        }
        Err(AnalysisError::BadRecord(format!(
            "unknown attack spec {spec:?}"
        )))
    }
}

fn basis_amplitudes(basis: BasisId) -> [[Amplitude; 2]; 2] {
    let s = Amplitude::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match basis {
        BasisId::Z => [
            [Amplitude::ONE, Amplitude::ZERO],
            [Amplitude::ZERO, Amplitude::ONE],
        ],
        BasisId::X => [[s, s], [s, -s]],
        BasisId::Y => [[s, s * Amplitude::I], [s, -s * Amplitude::I]],
    }
}

/// Build one of the canned attacks.
pub fn canned_attack(kind: AttackKind) -> Result<AttackIsometry, AnalysisError> {
    match kind {
        AttackKind::Identity => {
            let channel = vec![ChannelIndex::Bin(0), ChannelIndex::Bin(1)];
            let mut b0 = DMatrix::zeros(2, 1);
            let mut b1 = DMatrix::zeros(2, 1);
            b0[(0, 0)] = Amplitude::ONE;
            b1[(1, 0)] = Amplitude::ONE;
            AttackIsometry::new("identity", channel, [b0, b1])
        }
        AttackKind::Blocking(p) => {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(AnalysisError::BadBlockingProbability(p));
            }
            let channel = vec![
                ChannelIndex::Vacuum,
                ChannelIndex::Bin(0),
                ChannelIndex::Bin(1),
            ];
            let pass = Amplitude::new(p, 0.0);
            let block = Amplitude::new((1.0 - p * p).sqrt(), 0.0);
            let mut b0 = DMatrix::zeros(3, 3);
            let mut b1 = DMatrix::zeros(3, 3);
            b0[(1, 0)] = pass;
            b0[(0, 1)] = block;
            b1[(2, 0)] = pass;
            b1[(0, 2)] = block;
            AttackIsometry::new(format!("blocking:{p}"), channel, [b0, b1])
        }
        AttackKind::MeasureResend(basis) => {
            let channel = vec![ChannelIndex::Bin(0), ChannelIndex::Bin(1)];
            let c = basis_amplitudes(basis);
            let mut blocks = [DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)];
            for (i, block) in blocks.iter_mut().enumerate() {
                for k in 0..2 {
                    for m in 0..2 {
                        // Project onto outcome m, resend its state, record m.
                        block[(k, m)] = c[m][i].conj() * c[m][k];
                    }
                }
            }
            let [b0, b1] = blocks;
            AttackIsometry::new(format!("measure-resend:{basis}"), channel, [b0, b1])
        }
        AttackKind::FakeTimeBin => {
            let channel = vec![ChannelIndex::Bin(-1), ChannelIndex::Bin(2)];
            let mut b0 = DMatrix::zeros(2, 2);
            let mut b1 = DMatrix::zeros(2, 2);
            b0[(0, 0)] = Amplitude::ONE;
            b1[(1, 1)] = Amplitude::ONE;
            AttackIsometry::new("fake-time-bin", channel, [b0, b1])
        }
    }
}

/// Reject attacks that use channel bins outside the scheme's reachable input
/// space.
pub fn check_attack_compatible(
    attack: &AttackIsometry,
    scheme: &SchemeDefinition,
) -> Result<(), AnalysisError> {
    let allowed = scheme_channel_bins(scheme)?;
    let offending: Vec<i32> = attack
        .channel_bins()
        .into_iter()
        .filter(|b| !allowed.contains(b))
        .collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(AnalysisError::IncompatibleAttack(format!(
            "bins {offending:?} cannot influence scheme {}",
            scheme.name
        )))
    }
}

// ---------------------------------------------------------------------------
// Eavesdropper information
// ---------------------------------------------------------------------------

/// Joint (ancilla, receiver-mode) amplitudes after an attacked transmission:
/// one ancilla vector per setup output mode, plus the vacuum component.
#[derive(Clone, Debug)]
pub struct ChannelImage {
    pub output_vectors: BTreeMap<ModeLabel, DVector<Amplitude>>,
    pub vacuum_vector: DVector<Amplitude>,
}

/// Propagate `alice`'s state through the attack and then through the arm's
/// setup, keeping the ancilla uncollapsed.
pub fn attacked_amplitudes(
    attack: &AttackIsometry,
    alice: &AliceState,
    arm: &BasisArm,
) -> Result<ChannelImage, AnalysisError> {
    let alpha = qubit_amplitudes(alice);
    let bins = attack.channel_bins();
    for &b in &bins {
        if !arm.setup.window().contains(b) {
            return Err(AnalysisError::IncompatibleAttack(format!(
                "bin t'{b} is outside the setup window"
            )));
        }
    }
    let outputs: Vec<ModeLabel> = arm.setup.unitary().outputs().to_vec();
    let beta = beta_matrix(&arm.setup, &bins, &outputs)?;

    let mut vacuum_vector = DVector::zeros(attack.eve_dim);
    for i in [0u8, 1] {
        vacuum_vector += attack.eve_vector(i, &ChannelIndex::Vacuum) * alpha[i as usize];
    }
    let mut output_vectors = BTreeMap::new();
    for (j, mode) in outputs.iter().enumerate() {
        let mut w = DVector::zeros(attack.eve_dim);
        for i in [0u8, 1] {
            for (k, &bin) in bins.iter().enumerate() {
                let v = attack.eve_vector(i, &ChannelIndex::Bin(bin));
                w += v * (alpha[i as usize] * beta[(k, j)]);
            }
        }
        output_vectors.insert(mode.clone(), w);
    }
    Ok(ChannelImage {
        output_vectors,
        vacuum_vector,
    })
}

/// Distinguishability of the eavesdropper's conditional states on one
/// basis's sifted (conclusive, matched-basis) rounds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct EveInformation {
    /// Probability that the round is conclusive, per sender bit.
    pub detection: [f64; 2],
    /// Optimal guessing probability over the conditional ancilla states.
    pub guess_probability: f64,
    /// `1 - h(p_guess)` bits per sifted round.
    pub bits: f64,
}

fn binary_entropy(p: f64) -> f64 {
    let q = 1.0 - p;
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(q)
}

/// Conditional ancilla density matrices on conclusive rounds, with detection
/// probabilities, for the two bits of `basis`.
fn conditional_states(
    attack: &AttackIsometry,
    scheme: &SchemeDefinition,
    basis: BasisId,
) -> Result<([DMatrix<Amplitude>; 2], [f64; 2]), AnalysisError> {
    let arm = scheme.arm(basis)?;
    let conclusive: Vec<ModeLabel> = arm
        .model
        .bit_windows(0)
        .iter()
        .chain(arm.model.bit_windows(1))
        .cloned()
        .collect();
    let d = attack.eve_dim;
    let mut rhos = [DMatrix::zeros(d, d), DMatrix::zeros(d, d)];
    let mut detection = [0.0f64; 2];
    for bit in [0u8, 1] {
        let image = attacked_amplitudes(attack, scheme.state(basis, bit)?, arm)?;
        for mode in &conclusive {
            if let Some(w) = image.output_vectors.get(mode) {
                detection[bit as usize] += w.norm_squared();
                rhos[bit as usize] += w * w.adjoint();
            }
        }
        if detection[bit as usize] > 0.0 {
            rhos[bit as usize] /= Amplitude::from(detection[bit as usize]);
        }
    }
    Ok((rhos, detection))
}

/// Bits per sifted round the attack leaks on `basis`.
///
/// The guessing probability is the Helstrom bound
/// `p_g = (1 + ||q_0 rho_0 - q_1 rho_1||_tr) / 2` with the bits weighted by
/// their conclusive-round posteriors `q_i`; for the bit-symmetric attacks
/// built here the posteriors are 1/2 each and this reduces to
/// `(1 + ||rho_0 - rho_1||_tr / 2) / 2`. Rounds the receiver discards do not
/// enter the key, so only conclusive rounds are scored.
pub fn eve_information(
    attack: &AttackIsometry,
    scheme: &SchemeDefinition,
    basis: BasisId,
) -> Result<EveInformation, AnalysisError> {
    let (rhos, detection) = conditional_states(attack, scheme, basis)?;
    let total = detection[0] + detection[1];
    if total < 1e-15 {
        // The basis never detects anything: no sifted rounds, no key bits.
        return Ok(EveInformation {
            detection,
            guess_probability: 0.5,
            bits: 0.0,
        });
    }
    let q0 = detection[0] / total;
    let q1 = detection[1] / total;
    let gamma = &rhos[0] * Amplitude::from(q0) - &rhos[1] * Amplitude::from(q1);
    let guess_probability = 0.5 * (1.0 + linalg::trace_norm_hermitian(&gamma));
    let bits = 1.0 - binary_entropy(guess_probability.clamp(0.5, 1.0));
    Ok(EveInformation {
        detection,
        guess_probability,
        bits,
    })
}

/// The measurement operator for guessing bit 0 that attains the Helstrom
/// bound: the projector onto the nonnegative eigenspace of
/// `q_0 rho_0 - q_1 rho_1`. The complementary operator guesses bit 1.
pub fn helstrom_guess_operator(
    attack: &AttackIsometry,
    scheme: &SchemeDefinition,
    basis: BasisId,
) -> Result<DMatrix<Amplitude>, AnalysisError> {
    let (rhos, detection) = conditional_states(attack, scheme, basis)?;
    let d = attack.eve_dim;
    let total = detection[0] + detection[1];
    if total < 1e-15 {
        return Ok(DMatrix::zeros(d, d));
    }
    let q0 = detection[0] / total;
    let q1 = detection[1] / total;
    let gamma = &rhos[0] * Amplitude::from(q0) - &rhos[1] * Amplitude::from(q1);

    // Real symmetric embedding [[Re, -Im], [Im, Re]]: its eigenvectors (x; y)
    // recombine into complex eigenvectors x + iy, each complex direction
    // appearing twice, hence the factor 1/2.
    let mut s = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            let z = gamma[(r, c)];
            s[(r, c)] = z.re;
            s[(r + d, c + d)] = z.re;
            s[(r, c + d)] = -z.im;
            s[(r + d, c)] = z.im;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(s);
    let mut m0 = DMatrix::<Amplitude>::zeros(d, d);
    for j in 0..2 * d {
        if eig.eigenvalues[j] < 0.0 {
            continue;
        }
        let col = eig.eigenvectors.column(j);
        let w = DVector::from_fn(d, |r, _| Amplitude::new(col[r], col[r + d]));
        m0 += (&w * w.adjoint()) * Amplitude::from(0.5);
    }
    Ok(m0)
}

// ---------------------------------------------------------------------------
// Robustness classification
// ---------------------------------------------------------------------------

/// Outcome of the nullspace analysis of one scheme.
#[derive(Clone, Debug)]
pub struct RobustnessAnalysis {
    pub constraints: ConstraintSystem,
    pub space: ZeroErrorSpace,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    /// Every undetectable attack either forwards the qubit intact or blocks
    /// it; detected rounds leak nothing.
    Robust { family: String },
    /// A concrete undetectable attack leaks key bits.
    Nonrobust {
        witness: AttackIsometry,
        leak_basis: BasisId,
        eve_bits: f64,
    },
}

impl Verdict {
    pub fn is_robust(&self) -> bool {
        matches!(self, Verdict::Robust { .. })
    }
}

fn nonvacuum_indices(columns: &[ColumnKey]) -> Vec<usize> {
    columns
        .iter()
        .enumerate()
        .filter(|(_, k)| k.channel != ChannelIndex::Vacuum)
        .map(|(i, _)| i)
        .collect()
}

/// Structural robustness: the nullspace, projected away from the vacuum
/// columns, must be at most the single paired-forwarding direction
/// `(i=0, t'_0) = (i=1, t'_1)` - the qubit goes through intact, carrying no
/// bit mark.
fn structural_family(space: &ZeroErrorSpace) -> Option<String> {
    let nv = nonvacuum_indices(&space.columns);
    let projected: Vec<DVector<Amplitude>> = space
        .basis
        .iter()
        .map(|v| DVector::from_fn(nv.len(), |i, _| v[nv[i]]))
        .collect();
    let span = linalg::orthonormalize(projected);
    match span.len() {
        0 => Some("blocking-only: no undetectable attack forwards a photon".to_string()),
        1 => {
            let u = &span[0];
            let idx_of = |bit: u8, bin: i32| {
                nv.iter().position(|&i| {
                    space.columns[i]
                        == ColumnKey {
                            bit,
                            channel: ChannelIndex::Bin(bin),
                        }
                })
            };
            let a = idx_of(0, 0)?;
            let b = idx_of(1, 1)?;
            for (i, val) in u.iter().enumerate() {
                if i != a && i != b && val.norm() > ANALYSIS_TOLERANCE {
                    return None;
                }
            }
            if u[a].norm() < ANALYSIS_TOLERANCE || (u[a] - u[b]).norm() > ANALYSIS_TOLERANCE {
                return None;
            }
            Some(
                "paired forwarding and blocking: v(0,t'0) = v(1,t'1), all other channel \
                 components vanish; the forwarded photon carries no bit record"
                    .to_string(),
            )
        }
        _ => None,
    }
}

/// Nullspace directions supported entirely on one bit's nonvacuum columns:
/// the eavesdropper can deliver a photon for that bit alone without risk.
fn exclusive_directions(cs: &ConstraintSystem, bit: u8) -> Vec<DVector<Amplitude>> {
    let cols: Vec<usize> = cs
        .columns
        .iter()
        .enumerate()
        .filter(|(_, k)| k.bit == bit && k.channel != ChannelIndex::Vacuum)
        .map(|(i, _)| i)
        .collect();
    let sub = DMatrix::from_fn(cs.matrix.nrows(), cols.len(), |r, c| {
        cs.matrix[(r, cols[c])]
    });
    linalg::nullspace(&sub)
        .nullspace
        .into_iter()
        .map(|v| {
            let mut full = DVector::zeros(cs.columns.len());
            for (c, &col) in cols.iter().enumerate() {
                full[col] = v[c];
            }
            full
        })
        .collect()
}

/// Turn one nullspace direction into a valid attack: scale it so the larger
/// bit-block has unit norm and pad the rest with vacuum blocking recorded in
/// orthogonal ancilla states. Returns None when the direction cannot carry
/// an isometry (its bit-blocks are not orthogonal in the ancilla sense).
pub fn attack_from_direction(
    direction: &DVector<Amplitude>,
    columns: &[ColumnKey],
    channel: &[ChannelIndex],
    name: &str,
) -> Option<AttackIsometry> {
    let coord = |bit: u8, k: &ChannelIndex| {
        columns
            .iter()
            .position(|c| c.bit == bit && c.channel == *k)
            .map(|i| direction[i])
            .unwrap_or(Amplitude::ZERO)
    };
    let block_norm = |bit: u8| -> f64 {
        channel
            .iter()
            .map(|k| coord(bit, k).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let max_norm = block_norm(0).max(block_norm(1));
    if max_norm < ANALYSIS_TOLERANCE {
        return None;
    }
    let scale = Amplitude::from(1.0 / max_norm);
    let vac_row = channel.iter().position(|k| *k == ChannelIndex::Vacuum)?;
    let mut blocks = [
        DMatrix::<Amplitude>::zeros(channel.len(), 3),
        DMatrix::<Amplitude>::zeros(channel.len(), 3),
    ];
    for bit in [0u8, 1] {
        for (row, k) in channel.iter().enumerate() {
            blocks[bit as usize][(row, 0)] = coord(bit, k) * scale;
        }
        let norm = block_norm(bit) / max_norm;
        let pad = (1.0 - norm * norm).max(0.0).sqrt();
        blocks[bit as usize][(vac_row, 1 + bit as usize)] = Amplitude::from(pad);
    }
    AttackIsometry::new(name, channel.to_vec(), blocks).ok()
}

/// The nullspace-spanning attack: ancilla dimension equal to the nullity,
/// one orthonormal direction per ancilla axis. Exists when the basis
/// directions happen to balance the two bit-blocks.
fn canonical_attack(space: &ZeroErrorSpace, channel: &[ChannelIndex]) -> Option<AttackIsometry> {
    let m = space.basis.len();
    if m == 0 {
        return None;
    }
    let mut blocks = [
        DMatrix::<Amplitude>::zeros(channel.len(), m),
        DMatrix::<Amplitude>::zeros(channel.len(), m),
    ];
    for (e, v) in space.basis.iter().enumerate() {
        for (idx, key) in space.columns.iter().enumerate() {
            let row = channel.iter().position(|k| *k == key.channel)?;
            blocks[key.bit as usize][(row, e)] = v[idx];
        }
    }
    let t0: Amplitude = (blocks[0].adjoint() * &blocks[0]).trace();
    let t1: Amplitude = (blocks[1].adjoint() * &blocks[1]).trace();
    if (t0 - t1).norm() > ANALYSIS_TOLERANCE || t0.re < ANALYSIS_TOLERANCE {
        return None;
    }
    let scale = Amplitude::from(1.0 / t0.re.sqrt());
    for b in blocks.iter_mut() {
        *b *= scale;
    }
    AttackIsometry::new("nullspace-spanning", channel.to_vec(), blocks).ok()
}

/// Best leak (bits and basis) of an attack across the scheme's bases.
fn max_leak(
    attack: &AttackIsometry,
    scheme: &SchemeDefinition,
) -> Result<(f64, BasisId), AnalysisError> {
    let mut best = (0.0f64, scheme.arms[0].basis);
    for arm in &scheme.arms {
        let info = eve_information(attack, scheme, arm.basis)?;
        if info.bits > best.0 {
            best = (info.bits, arm.basis);
        }
    }
    Ok(best)
}

/// Classify a scheme as robust or nonrobust.
///
/// Two independent readings of the zero-error nullspace must agree:
/// a structural pattern match against the paired-forwarding family, and a
/// dynamic search that assembles candidate attacks from the nullspace
/// (per-direction attacks, the nullspace-spanning attack, and a
/// full-information witness from bit-exclusive directions when they exist)
/// and scores their leak.
pub fn robustness_verdict(scheme: &SchemeDefinition) -> Result<RobustnessAnalysis, AnalysisError> {
    let constraints = build_constraints(scheme)?;
    let space = solve_zero_error(&constraints);
    let structural = structural_family(&space);

    let mut channel: Vec<ChannelIndex> = vec![ChannelIndex::Vacuum];
    channel.extend(
        constraints
            .channel_bins
            .iter()
            .map(|&b| ChannelIndex::Bin(b)),
    );

    // Candidate undetectable attacks, scored for leakage.
    let mut best_witness: Option<(AttackIsometry, f64, BasisId)> = None;
    let mut consider =
        |attack: AttackIsometry, scheme: &SchemeDefinition| -> Result<(), AnalysisError> {
            debug_assert!(attack.zero_error_residual(&constraints) < ANALYSIS_TOLERANCE);
            let (bits, basis) = max_leak(&attack, scheme)?;
            if bits > LEAK_TOLERANCE && best_witness.as_ref().is_none_or(|(_, b, _)| bits > *b) {
                best_witness = Some((attack, bits, basis));
            }
            Ok(())
        };

    let exclusive0 = exclusive_directions(&constraints, 0);
    let exclusive1 = exclusive_directions(&constraints, 1);
    if let (Some(f0), Some(f1)) = (exclusive0.first(), exclusive1.first()) {
        // Bit-exclusive zero-error directions on both sides: assemble the
        // full-information witness (orthogonal ancilla marks per bit).
        let mut blocks = [
            DMatrix::<Amplitude>::zeros(channel.len(), 2),
            DMatrix::<Amplitude>::zeros(channel.len(), 2),
        ];
        for (idx, key) in constraints.columns.iter().enumerate() {
            let row = channel
                .iter()
                .position(|k| *k == key.channel)
                .expect("channel covers all columns");
            blocks[0][(row, 0)] += f0[idx]
                * if key.bit == 0 {
                    Amplitude::ONE
                } else {
                    Amplitude::ZERO
                };
            blocks[1][(row, 1)] += f1[idx]
                * if key.bit == 1 {
                    Amplitude::ONE
                } else {
                    Amplitude::ZERO
                };
        }
        let witness = AttackIsometry::new("bit-exclusive witness", channel.clone(), blocks)?;
        consider(witness, scheme)?;
    }
    for (n, v) in space.basis.iter().enumerate() {
        if let Some(attack) =
            attack_from_direction(v, &space.columns, &channel, &format!("direction-{n}"))
        {
            consider(attack, scheme)?;
        }
    }
    if let Some(attack) = canonical_attack(&space, &channel) {
        consider(attack, scheme)?;
    }

    let verdict = match (structural, best_witness) {
        (Some(family), None) => Verdict::Robust { family },
        (None, Some((witness, eve_bits, leak_basis))) => Verdict::Nonrobust {
            witness,
            leak_basis,
            eve_bits,
        },
        (structural, witness) => {
            return Err(AnalysisError::VerdictDisagreement {
                structural: structural.is_some(),
                witness_found: witness.is_some(),
            })
        }
    };
    Ok(RobustnessAnalysis {
        constraints,
        space,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Two-photon analysis
// ---------------------------------------------------------------------------

/// Input classification for the two-photon robustness argument, by photon
/// count inside the computation bins (t'_0, t'_1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoPhotonCase {
    /// No photon in the computation bins: always a loss.
    ZeroInWindow,
    /// One photon inside: the outside photon never reaches the detectors,
    /// reducing to the single-photon analysis.
    OneInWindow,
    /// Both photons inside the computation bins.
    TwoInWindow,
    /// Superposition across different in-window totals; each photon-number
    /// sector is constrained independently because cross-sector overlaps
    /// vanish.
    Mixed,
}

/// Classify a state with at most two photons per term by its occupation of
/// the computation bins.
pub fn two_photon_case_split(state: &StateVector) -> Result<TwoPhotonCase, AnalysisError> {
    if state.is_zero() {
        return Err(AnalysisError::EmptyState);
    }
    let mut in_window_counts = Vec::new();
    for (basis, _) in state.terms() {
        let total = basis.total_photons();
        if total > 2 {
            return Err(AnalysisError::TooManyPhotons(total));
        }
        let inside =
            basis.occupation(&ModeLabel::Input(0)) + basis.occupation(&ModeLabel::Input(1));
        if !in_window_counts.contains(&inside) {
            in_window_counts.push(inside);
        }
    }
    if in_window_counts.len() > 1 {
        return Ok(TwoPhotonCase::Mixed);
    }
    Ok(match in_window_counts[0] {
        0 => TwoPhotonCase::ZeroInWindow,
        1 => TwoPhotonCase::OneInWindow,
        _ => TwoPhotonCase::TwoInWindow,
    })
}

/// The two-photon states on the computation bins that can never trigger a
/// wrong-bit or invalid outcome when the receiver expects `expected`.
///
/// Solves `<f| U |psi> = 0` over `psi = a|20> + b|11> + c|02>` for every
/// two-photon output `f` whose pattern reads as the wrong bit or as invalid
/// (double clicks included), and returns the solution ray with its leading
/// amplitude made real positive.
pub fn two_photon_zero_error_states(
    expected: &AliceState,
    scheme: &SchemeDefinition,
) -> Result<StateVector, AnalysisError> {
    let arm = scheme.arm(expected.basis)?;
    if !matches!(arm.setup, BobSetup::MachZehnder(_)) {
        return Err(AnalysisError::NeedsInterferingSetup);
    }
    let t0 = ModeLabel::Input(0);
    let t1 = ModeLabel::Input(1);
    let inputs: [FockBasisState; 3] = [
        FockBasisState::from_occupations([(t0.clone(), 2)]),
        FockBasisState::from_occupations([(t0.clone(), 1), (t1.clone(), 1)]),
        FockBasisState::from_occupations([(t1.clone(), 2)]),
    ];
    let images: Vec<StateVector> = inputs
        .iter()
        .map(|b| {
            let state = StateVector::basis_state([t0.clone(), t1.clone()], b.clone())
                .expect("two-photon basis state");
            arm.setup.apply(&state, DEFAULT_PHOTON_CAP)
        })
        .collect::<Result<_, _>>()?;

    let mut support: std::collections::BTreeSet<FockBasisState> = Default::default();
    for image in &images {
        support.extend(image.terms().map(|(b, _)| b.clone()));
    }
    let wrong = if expected.bit == 0 {
        Outcome::Bit1
    } else {
        Outcome::Bit0
    };
    let mut rows: Vec<[Amplitude; 3]> = Vec::new();
    for f in &support {
        let class = interpret(&arm.model.pattern_of(f), &arm.model)?;
        if class == wrong || class == Outcome::Invalid {
            rows.push([
                images[0].amplitude(f),
                images[1].amplitude(f),
                images[2].amplitude(f),
            ]);
        }
    }
    let matrix = DMatrix::from_fn(rows.len(), 3, |r, c| rows[r][c]);
    let elim = linalg::nullspace(&matrix);
    if elim.nullity != 1 {
        return Err(AnalysisError::UnexpectedSolutionSpace(elim.nullity));
    }
    let ray = &elim.nullspace[0];
    let state = StateVector::from_terms([t0, t1], inputs.iter().cloned().zip(ray.iter().copied()))
        .expect("ray lives on the computation bins")
        .normalized()
        .expect("nullspace vector has unit norm");
    // Fix the ray's phase: leading amplitude (canonical order) real positive.
    let lead = state.terms().next().expect("nonzero ray").1;
    let phase = lead.conj() / Amplitude::from(lead.norm());
    Ok(state.scaled(phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{alice_state, scheme, DetectorKind, MeasurementModel, SchemeName};

    fn xy() -> SchemeDefinition {
        scheme(SchemeName::XyBb84, DetectorKind::Threshold).unwrap()
    }

    fn unified() -> SchemeDefinition {
        scheme(SchemeName::UnifiedXzBb84, DetectorKind::Threshold).unwrap()
    }

    fn key(bit: u8, channel: ChannelIndex) -> ColumnKey {
        ColumnKey { bit, channel }
    }

    fn unit_direction(
        columns: &[ColumnKey],
        entries: &[(ColumnKey, Amplitude)],
    ) -> DVector<Amplitude> {
        let mut v = DVector::zeros(columns.len());
        for (k, a) in entries {
            let idx = columns.iter().position(|c| c == k).unwrap();
            v[idx] = *a;
        }
        let n = v.norm();
        v / Amplitude::from(n)
    }

    fn in_span(space: &ZeroErrorSpace, v: &DVector<Amplitude>) -> bool {
        let mut residual = v.clone();
        for b in &space.basis {
            let overlap = b.dotc(&residual);
            residual -= b * overlap;
        }
        residual.norm() < 1e-9
    }

    #[test]
    fn xy_constraint_dimensions() {
        let cs = build_constraints(&xy()).unwrap();
        assert_eq!(cs.rows.len(), 4);
        assert_eq!(cs.columns.len(), 6);
        assert_eq!(cs.channel_bins, vec![0, 1]);
        assert_eq!(cs.irrelevant_bins[&BasisId::X], vec![-1, 2]);
    }

    #[test]
    fn unified_constraint_dimensions() {
        let cs = build_constraints(&unified()).unwrap();
        // 2 x-basis rows plus 2 wrong-side windows per z state.
        assert_eq!(cs.rows.len(), 6);
        assert_eq!(cs.columns.len(), 10);
        assert_eq!(cs.channel_bins, vec![-1, 0, 1, 2]);
        assert!(cs.irrelevant_bins[&BasisId::Z].is_empty());
    }

    #[test]
    fn empty_constraint_system_allows_everything() {
        // A receiver that assigns no bit meaning to any window produces no
        // constraints at all.
        let mut s = xy();
        for arm in &mut s.arms {
            arm.model = MeasurementModel::new(
                arm.model.windows().clone(),
                DetectorKind::Threshold,
                Default::default(),
                Default::default(),
            )
            .unwrap();
        }
        let cs = build_constraints(&s).unwrap();
        assert_eq!(cs.rows.len(), 0);
        let space = solve_zero_error(&cs);
        assert_eq!(space.nullity, cs.columns.len());
    }

    #[test]
    fn xy_nullspace_structure() {
        let cs = build_constraints(&xy()).unwrap();
        let space = solve_zero_error(&cs);
        assert_eq!(space.rank, 3);
        assert_eq!(space.nullity, 3);
        let one = Amplitude::ONE;
        for expected in [
            unit_direction(&space.columns, &[(key(0, ChannelIndex::Vacuum), one)]),
            unit_direction(&space.columns, &[(key(1, ChannelIndex::Vacuum), one)]),
            unit_direction(
                &space.columns,
                &[
                    (key(0, ChannelIndex::Bin(0)), one),
                    (key(1, ChannelIndex::Bin(1)), one),
                ],
            ),
        ] {
            assert!(in_span(&space, &expected));
        }
    }

    #[test]
    fn unified_nullspace_structure() {
        let cs = build_constraints(&unified()).unwrap();
        let space = solve_zero_error(&cs);
        assert_eq!(space.nullity, 5);
        let one = Amplitude::ONE;
        for expected in [
            unit_direction(&space.columns, &[(key(0, ChannelIndex::Vacuum), one)]),
            unit_direction(&space.columns, &[(key(1, ChannelIndex::Vacuum), one)]),
            unit_direction(&space.columns, &[(key(0, ChannelIndex::Bin(-1)), one)]),
            unit_direction(&space.columns, &[(key(1, ChannelIndex::Bin(2)), one)]),
            unit_direction(
                &space.columns,
                &[
                    (key(0, ChannelIndex::Bin(0)), one),
                    (key(1, ChannelIndex::Bin(1)), one),
                ],
            ),
        ] {
            assert!(in_span(&space, &expected));
        }
    }

    #[test]
    fn nullity_is_invariant_under_row_permutation_and_scaling() {
        let cs = build_constraints(&xy()).unwrap();
        let base = linalg::nullspace(&cs.matrix).nullity;
        let mut permuted = cs.matrix.clone();
        permuted.swap_rows(0, 3);
        permuted.swap_rows(1, 2);
        assert_eq!(linalg::nullspace(&permuted).nullity, base);
        let mut scaled = cs.matrix.clone();
        for r in 0..scaled.nrows() {
            for c in 0..scaled.ncols() {
                scaled[(r, c)] *= Amplitude::new(0.0, -2.0);
            }
        }
        assert_eq!(linalg::nullspace(&scaled).nullity, base);
    }

    #[test]
    fn verdicts_match_the_scheme_catalog() {
        let robust = [
            SchemeName::XyBb84,
            SchemeName::NativeXzBb84,
            SchemeName::NativeYzBb84,
            SchemeName::NativeSixState,
        ];
        for name in robust {
            let s = scheme(name, DetectorKind::Threshold).unwrap();
            let analysis = robustness_verdict(&s).unwrap();
            assert!(analysis.verdict.is_robust(), "{name}");
        }
        for name in [SchemeName::UnifiedXzBb84, SchemeName::UnifiedSixState] {
            let s = scheme(name, DetectorKind::Threshold).unwrap();
            let analysis = robustness_verdict(&s).unwrap();
            match analysis.verdict {
                Verdict::Nonrobust {
                    leak_basis,
                    eve_bits,
                    ..
                } => {
                    assert_eq!(leak_basis, BasisId::Z, "{name}");
                    assert!((eve_bits - 1.0).abs() < 1e-9, "{name}: {eve_bits}");
                }
                Verdict::Robust { .. } => panic!("{name} should be nonrobust"),
            }
        }
    }

    #[test]
    fn unified_witness_mirrors_the_side_bin_attack() {
        let s = unified();
        let analysis = robustness_verdict(&s).unwrap();
        let Verdict::Nonrobust { witness, .. } = &analysis.verdict else {
            panic!("expected nonrobust");
        };
        // Bit 0 rides bin t'-1, bit 1 rides bin t'2, orthogonal marks.
        let v0 = witness.eve_vector(0, &ChannelIndex::Bin(-1));
        let v1 = witness.eve_vector(1, &ChannelIndex::Bin(2));
        assert!((v0.norm() - 1.0).abs() < 1e-9);
        assert!((v1.norm() - 1.0).abs() < 1e-9);
        assert!(v0.dotc(&v1).norm() < 1e-9);
        assert!(witness.zero_error_residual(&analysis.constraints) < 1e-9);
    }

    #[test]
    fn canned_attacks_are_isometries() {
        for kind in [
            AttackKind::Identity,
            AttackKind::Blocking(0.0),
            AttackKind::Blocking(0.37),
            AttackKind::Blocking(1.0),
            AttackKind::MeasureResend(BasisId::X),
            AttackKind::MeasureResend(BasisId::Y),
            AttackKind::MeasureResend(BasisId::Z),
            AttackKind::FakeTimeBin,
        ] {
            canned_attack(kind).unwrap();
        }
        assert!(matches!(
            canned_attack(AttackKind::Blocking(1.5)),
            Err(AnalysisError::BadBlockingProbability(_))
        ));
    }

    #[test]
    fn identity_and_blocking_are_zero_error_on_xy() {
        let cs = build_constraints(&xy()).unwrap();
        for kind in [
            AttackKind::Identity,
            AttackKind::Blocking(0.0),
            AttackKind::Blocking(0.6),
        ] {
            let attack = canned_attack(kind).unwrap();
            assert!(attack.zero_error_residual(&cs) < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn measure_resend_is_detectable_on_xy() {
        let cs = build_constraints(&xy()).unwrap();
        let attack = canned_attack(AttackKind::MeasureResend(BasisId::Z)).unwrap();
        assert!(attack.zero_error_residual(&cs) > 0.1);
    }

    #[test]
    fn fake_time_bin_is_zero_error_on_unified_but_incompatible_with_xy() {
        let attack = canned_attack(AttackKind::FakeTimeBin).unwrap();
        let cs = build_constraints(&unified()).unwrap();
        assert!(attack.zero_error_residual(&cs) < 1e-12);
        check_attack_compatible(&attack, &unified()).unwrap();
        assert!(matches!(
            check_attack_compatible(&attack, &xy()),
            Err(AnalysisError::IncompatibleAttack(_))
        ));
    }

    #[test]
    fn eve_information_endpoints() {
        let xy = xy();
        let unified = unified();
        let identity = canned_attack(AttackKind::Identity).unwrap();
        for basis in [BasisId::X, BasisId::Y] {
            let info = eve_information(&identity, &xy, basis).unwrap();
            assert!(info.bits.abs() < 1e-12);
            assert!((info.guess_probability - 0.5).abs() < 1e-12);
            assert!((info.detection[0] - 0.5).abs() < 1e-12);
        }
        let fake = canned_attack(AttackKind::FakeTimeBin).unwrap();
        let info = eve_information(&fake, &unified, BasisId::Z).unwrap();
        assert!((info.bits - 1.0).abs() < 1e-12);
        assert!((info.guess_probability - 1.0).abs() < 1e-12);
        assert!((info.detection[0] - 0.5).abs() < 1e-12);
        // The x basis sees nothing at all under this attack.
        let info_x = eve_information(&fake, &unified, BasisId::X).unwrap();
        assert_eq!(info_x.detection, [0.0, 0.0]);
        assert!(info_x.bits.abs() < 1e-12);
    }

    #[test]
    fn blocking_leaks_nothing_on_detected_rounds() {
        let xy = xy();
        for p in [0.2, 0.9] {
            let attack = canned_attack(AttackKind::Blocking(p)).unwrap();
            for basis in [BasisId::X, BasisId::Y] {
                let info = eve_information(&attack, &xy, basis).unwrap();
                assert!(info.bits.abs() < 1e-12, "p={p} basis={basis}");
            }
        }
    }

    #[test]
    fn measure_resend_in_the_matched_basis_leaks_fully() {
        let xy = xy();
        let attack = canned_attack(AttackKind::MeasureResend(BasisId::X)).unwrap();
        let info = eve_information(&attack, &xy, BasisId::X).unwrap();
        assert!((info.bits - 1.0).abs() < 1e-9);
        // In the conjugate basis the record is uncorrelated.
        let info_y = eve_information(&attack, &xy, BasisId::Y).unwrap();
        assert!(info_y.bits.abs() < 1e-9);
    }

    #[test]
    fn attack_records_round_trip() {
        let attack = canned_attack(AttackKind::Blocking(0.7)).unwrap();
        let record = attack.to_record();
        let loaded = AttackIsometry::from_record(&record).unwrap();
        assert_eq!(loaded.to_record(), record);
        let json = serde_json::to_string(&record).unwrap();
        let parsed: AttackRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, record);
    }

    #[test]
    fn two_photon_rays_for_the_x_states() {
        let s = xy();
        let ray0 = two_photon_zero_error_states(&alice_state(BasisId::X, 0), &s).unwrap();
        let t0 = ModeLabel::Input(0);
        let t1 = ModeLabel::Input(1);
        let b20 = FockBasisState::from_occupations([(t0.clone(), 2)]);
        let b11 = FockBasisState::from_occupations([(t0.clone(), 1), (t1.clone(), 1)]);
        let b02 = FockBasisState::from_occupations([(t1.clone(), 2)]);
        assert!((ray0.amplitude(&b20) - Amplitude::from(0.5)).norm() < 1e-9);
        assert!((ray0.amplitude(&b11) - Amplitude::from(0.5 * 2f64.sqrt())).norm() < 1e-9);
        assert!((ray0.amplitude(&b02) - Amplitude::from(0.5)).norm() < 1e-9);

        // The bit-1 ray flips the relative sign of the split term.
        let ray1 = two_photon_zero_error_states(&alice_state(BasisId::X, 1), &s).unwrap();
        let expected = StateVector::from_terms(
            [t0, t1],
            [
                (b20, Amplitude::from(0.5)),
                (b11, Amplitude::from(-0.5 * 2f64.sqrt())),
                (b02, Amplitude::from(0.5)),
            ],
        )
        .unwrap();
        assert!(ray1.global_phase_to(&expected, 1e-9).is_some());
    }

    #[test]
    fn two_photon_allowed_state_never_misfires() {
        let s = xy();
        let arm = s.arm(BasisId::X).unwrap();
        let ray = two_photon_zero_error_states(&alice_state(BasisId::X, 0), &s).unwrap();
        let out = arm.setup.apply(&ray, 2).unwrap();
        let mut p_wrong = 0.0;
        for (f, amp) in out.terms() {
            let class = interpret(&arm.model.pattern_of(f), &arm.model).unwrap();
            if class == Outcome::Bit1 || class == Outcome::Invalid {
                p_wrong += amp.norm_sqr();
            }
        }
        assert!(p_wrong < 1e-18);
    }

    #[test]
    fn case_split_examples() {
        let t = ModeLabel::Input;
        let far = StateVector::basis_state(
            [t(4), t(5)],
            FockBasisState::from_occupations([(t(4), 1), (t(5), 1)]),
        )
        .unwrap();
        assert_eq!(
            two_photon_case_split(&far).unwrap(),
            TwoPhotonCase::ZeroInWindow
        );

        let half = StateVector::basis_state(
            [t(0), t(3)],
            FockBasisState::from_occupations([(t(0), 1), (t(3), 1)]),
        )
        .unwrap();
        assert_eq!(
            two_photon_case_split(&half).unwrap(),
            TwoPhotonCase::OneInWindow
        );

        let both =
            StateVector::basis_state([t(0), t(1)], FockBasisState::from_occupations([(t(0), 2)]))
                .unwrap();
        assert_eq!(
            two_photon_case_split(&both).unwrap(),
            TwoPhotonCase::TwoInWindow
        );

        let mixed = both
            .scaled(Amplitude::from(std::f64::consts::FRAC_1_SQRT_2))
            .plus(
                &StateVector::single_photon(t(0))
                    .extended_to([t(1)])
                    .scaled(Amplitude::from(std::f64::consts::FRAC_1_SQRT_2)),
            );
        assert_eq!(two_photon_case_split(&mixed).unwrap(), TwoPhotonCase::Mixed);

        let too_many =
            StateVector::basis_state([t(0)], FockBasisState::from_occupations([(t(0), 3)]))
                .unwrap();
        assert!(matches!(
            two_photon_case_split(&too_many),
            Err(AnalysisError::TooManyPhotons(3))
        ));
    }
}
