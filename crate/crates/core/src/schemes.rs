//! Declarative definitions of the analyzed QKD schemes: the sender's
//! alphabets, the receiver setup per basis, and how detector outcomes are
//! interpreted.
//!
//! Every basis arm pairs a setup (Mach-Zehnder or direct time readout) with a
//! measurement model: which output modes the receiver opens detectors on,
//! whether detectors are threshold or photon-counting, and the partition of
//! outcome patterns into bit 0, bit 1, loss, and invalid classes.
//!
//! All schemes are defined over the analysis window `[-1, 2]`, deliberately
//! wider than the two bins the sender uses, so that which side bins can or
//! cannot influence the receiver is derived by the analyzer instead of being
//! assumed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{Amplitude, FockBasisState, ModeLabel, StateVector};
use crate::interferometer::{
    build_mach_zehnder, build_time_readout, BobSetup, InterferometerError, TimeBinWindow,
};
use crate::optics::DEFAULT_PHOTON_CAP;

/// Analysis window: channel bins t'_{-1} through t'_2.
pub fn analysis_window() -> TimeBinWindow {
    TimeBinWindow::new(-1, 2).expect("static window")
}

/// Patterns are materialized for photon totals up to this budget.
pub const PATTERN_PHOTON_BUDGET: u32 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
    #[error("uncovered outcome pattern {0}")]
    UncoveredOutcome(String),
    #[error("bad measurement model: {0}")]
    BadModel(String),
    #[error("bad scheme record: {0}")]
    BadRecord(String),
    #[error("scheme has no {0} basis")]
    MissingBasis(BasisId),
    #[error(transparent)]
    Interferometer(#[from] InterferometerError),
}

/// Encoding/measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisId {
    X,
    Y,
    Z,
}

impl BasisId {
    pub fn all() -> [BasisId; 3] {
        [BasisId::X, BasisId::Y, BasisId::Z]
    }

    pub fn parse(s: &str) -> Result<Self, SchemeError> {
        match s {
            "x" | "X" => Ok(BasisId::X),
            "y" | "Y" => Ok(BasisId::Y),
            "z" | "Z" => Ok(BasisId::Z),
            other => Err(SchemeError::BadRecord(format!("unknown basis {other:?}"))),
        }
    }
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisId::X => write!(f, "x"),
            BasisId::Y => write!(f, "y"),
            BasisId::Z => write!(f, "z"),
        }
    }
}

/// One of the sender's alphabet states: a single photon over bins t'_0, t'_1.
#[derive(Clone, Debug)]
pub struct AliceState {
    pub basis: BasisId,
    pub bit: u8,
    pub vector: StateVector,
}

/// The sender's state for (basis, bit):
/// x: (|t'_0> +- |t'_1>)/sqrt2, y: (|t'_0> +- i |t'_1>)/sqrt2,
/// z: |t'_0> for bit 0 and |t'_1> for bit 1.
pub fn alice_state(basis: BasisId, bit: u8) -> AliceState {
    assert!(bit <= 1, "bit must be 0 or 1");
    let t0 = StateVector::single_photon(ModeLabel::Input(0));
    let t1 = StateVector::single_photon(ModeLabel::Input(1));
    let s = Amplitude::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let vector = match (basis, bit) {
        (BasisId::X, 0) => t0.plus(&t1).scaled(s),
        (BasisId::X, 1) => t0.plus(&t1.scaled(-Amplitude::ONE)).scaled(s),
        (BasisId::Y, 0) => t0.plus(&t1.scaled(Amplitude::I)).scaled(s),
        (BasisId::Y, 1) => t0.plus(&t1.scaled(-Amplitude::I)).scaled(s),
        (BasisId::Z, 0) => t0,
        (BasisId::Z, 1) => t1,
        _ => unreachable!(),
    }
    .extended_to([ModeLabel::Input(0), ModeLabel::Input(1)]);
    AliceState { basis, bit, vector }
}

/// The two amplitudes of an alphabet state on the computation bins (t'_0,
/// t'_1).
pub fn qubit_amplitudes(state: &AliceState) -> [Amplitude; 2] {
    [
        state
            .vector
            .amplitude(&FockBasisState::single(ModeLabel::Input(0))),
        state
            .vector
            .amplitude(&FockBasisState::single(ModeLabel::Input(1))),
    ]
}

/// Detector capability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorKind {
    /// Reports only empty vs non-empty; cannot resolve photon number.
    Threshold,
    /// Photon-number-resolving detector.
    Counter,
}

impl DetectorKind {
    pub fn parse(s: &str) -> Result<Self, SchemeError> {
        match s {
            "threshold" => Ok(DetectorKind::Threshold),
            "counter" => Ok(DetectorKind::Counter),
            other => Err(SchemeError::BadRecord(format!(
                "unknown detector kind {other:?}"
            ))),
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectorKind::Threshold => write!(f, "threshold"),
            DetectorKind::Counter => write!(f, "counter"),
        }
    }
}

/// Which detectors clicked, with counts for counter-type detectors.
/// Threshold detectors collapse every nonzero count to 1. The empty pattern
/// is "no click".
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct OutcomePattern {
    clicks: BTreeMap<ModeLabel, u32>,
}

impl OutcomePattern {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(mode: ModeLabel) -> Self {
        let mut clicks = BTreeMap::new();
        clicks.insert(mode, 1);
        Self { clicks }
    }

    pub fn from_clicks<I: IntoIterator<Item = (ModeLabel, u32)>>(clicks: I) -> Self {
        Self {
            clicks: clicks.into_iter().filter(|(_, n)| *n > 0).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.clicks.is_empty()
    }

    pub fn clicked_modes(&self) -> impl Iterator<Item = &ModeLabel> {
        self.clicks.keys()
    }

    pub fn clicks(&self) -> &BTreeMap<ModeLabel, u32> {
        &self.clicks
    }

    pub fn total_count(&self) -> u32 {
        self.clicks.values().sum()
    }
}

impl fmt::Display for OutcomePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clicks.is_empty() {
            return write!(f, "no-click");
        }
        let parts: Vec<String> = self
            .clicks
            .iter()
            .map(|(m, n)| {
                if *n == 1 {
                    m.to_string()
                } else {
                    format!("{m}x{n}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// The receiver's reading of an outcome pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Bit0,
    Bit1,
    Loss,
    Invalid,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Bit0 => write!(f, "bit0"),
            Outcome::Bit1 => write!(f, "bit1"),
            Outcome::Loss => write!(f, "loss"),
            Outcome::Invalid => write!(f, "invalid"),
        }
    }
}

/// Detector windows and the outcome partition for one basis arm.
///
/// The four classes are materialized over every pattern reachable with at
/// most [`PATTERN_PHOTON_BUDGET`] photons, so the partition invariant (all
/// reachable patterns covered, classes disjoint) holds by construction:
/// - no click: loss (losses occur naturally, so they are never errors);
/// - one clicked window: the window's class (bit 0 / bit 1 / loss), except
///   that a counter seeing two photons reports an invalid outcome, which an
///   intact single-photon transmission can never produce;
/// - two or more clicked windows: invalid.
#[derive(Clone, Debug)]
pub struct MeasurementModel {
    windows: BTreeSet<ModeLabel>,
    kind: DetectorKind,
    j0_windows: BTreeSet<ModeLabel>,
    j1_windows: BTreeSet<ModeLabel>,
    classes: BTreeMap<OutcomePattern, Outcome>,
}

impl MeasurementModel {
    pub fn new(
        windows: BTreeSet<ModeLabel>,
        kind: DetectorKind,
        j0_windows: BTreeSet<ModeLabel>,
        j1_windows: BTreeSet<ModeLabel>,
    ) -> Result<Self, SchemeError> {
        if !j0_windows.is_subset(&windows) || !j1_windows.is_subset(&windows) {
            return Err(SchemeError::BadModel(
                "bit windows must be opened detector windows".into(),
            ));
        }
        if j0_windows.intersection(&j1_windows).next().is_some() {
            return Err(SchemeError::BadModel(
                "bit-0 and bit-1 windows overlap".into(),
            ));
        }
        let mut model = Self {
            windows,
            kind,
            j0_windows,
            j1_windows,
            classes: BTreeMap::new(),
        };
        model.classes = model
            .reachable_patterns()
            .into_iter()
            .map(|p| {
                let class = model.classify(&p);
                (p, class)
            })
            .collect();
        Ok(model)
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn windows(&self) -> &BTreeSet<ModeLabel> {
        &self.windows
    }

    pub fn bit_windows(&self, bit: u8) -> &BTreeSet<ModeLabel> {
        if bit == 0 {
            &self.j0_windows
        } else {
            &self.j1_windows
        }
    }

    /// Windows that are opened but mean neither bit (clicks there are a
    /// loss).
    pub fn loss_windows(&self) -> BTreeSet<ModeLabel> {
        self.windows
            .iter()
            .filter(|w| !self.j0_windows.contains(w) && !self.j1_windows.contains(w))
            .cloned()
            .collect()
    }

    fn window_class(&self, w: &ModeLabel) -> Outcome {
        if self.j0_windows.contains(w) {
            Outcome::Bit0
        } else if self.j1_windows.contains(w) {
            Outcome::Bit1
        } else {
            Outcome::Loss
        }
    }

    fn classify(&self, pattern: &OutcomePattern) -> Outcome {
        let clicked: Vec<&ModeLabel> = pattern.clicked_modes().collect();
        match clicked.len() {
            0 => Outcome::Loss,
            1 => {
                let w = clicked[0];
                if self.kind == DetectorKind::Counter && pattern.total_count() > 1 {
                    Outcome::Invalid
                } else {
                    self.window_class(w)
                }
            }
            _ => Outcome::Invalid,
        }
    }

    /// Every pattern reachable with at most [`PATTERN_PHOTON_BUDGET`]
    /// photons.
    fn reachable_patterns(&self) -> Vec<OutcomePattern> {
        let windows: Vec<&ModeLabel> = self.windows.iter().collect();
        let mut out = vec![OutcomePattern::empty()];
        match self.kind {
            DetectorKind::Threshold => {
                for (i, w) in windows.iter().enumerate() {
                    out.push(OutcomePattern::single((*w).clone()));
                    for v in windows.iter().skip(i + 1) {
                        out.push(OutcomePattern::from_clicks([
                            ((*w).clone(), 1),
                            ((*v).clone(), 1),
                        ]));
                    }
                }
            }
            DetectorKind::Counter => {
                for (i, w) in windows.iter().enumerate() {
                    for n in 1..=PATTERN_PHOTON_BUDGET {
                        out.push(OutcomePattern::from_clicks([((*w).clone(), n)]));
                    }
                    for v in windows.iter().skip(i + 1) {
                        out.push(OutcomePattern::from_clicks([
                            ((*w).clone(), 1),
                            ((*v).clone(), 1),
                        ]));
                    }
                }
            }
        }
        out
    }

    /// All materialized (pattern, class) pairs.
    pub fn pattern_classes(&self) -> impl Iterator<Item = (&OutcomePattern, Outcome)> {
        self.classes.iter().map(|(p, c)| (p, *c))
    }

    /// Patterns of a given class, single-click only (the single-photon
    /// outcome sets).
    pub fn single_click_patterns(&self, class: Outcome) -> Vec<OutcomePattern> {
        self.classes
            .iter()
            .filter(|(p, c)| **c == class && p.clicked_modes().count() == 1 && p.total_count() == 1)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Reduce an output basis state to the pattern the detectors report.
    pub fn pattern_of(&self, output: &FockBasisState) -> OutcomePattern {
        let clicks = output
            .occupied_modes()
            .filter(|(m, _)| self.windows.contains(m))
            .map(|(m, n)| {
                let count = match self.kind {
                    DetectorKind::Threshold => 1,
                    DetectorKind::Counter => n,
                };
                (m.clone(), count)
            });
        OutcomePattern::from_clicks(clicks)
    }
}

/// Membership lookup in the materialized outcome partition.
pub fn interpret(
    pattern: &OutcomePattern,
    model: &MeasurementModel,
) -> Result<Outcome, SchemeError> {
    model
        .classes
        .get(pattern)
        .copied()
        .ok_or_else(|| SchemeError::UncoveredOutcome(pattern.to_string()))
}

/// Born-rule outcome distribution of an alphabet state through a setup.
/// Modes the receiver does not measure are traced out, which folds them into
/// the no-click (loss) pattern.
pub fn detection_distribution(
    alice: &AliceState,
    setup: &BobSetup,
    model: &MeasurementModel,
) -> Result<BTreeMap<OutcomePattern, f64>, SchemeError> {
    let out = setup.apply(&alice.vector, DEFAULT_PHOTON_CAP)?;
    let mut dist: BTreeMap<OutcomePattern, f64> = BTreeMap::new();
    dist.insert(OutcomePattern::empty(), 0.0);
    let mut total = 0.0;
    for (basis, amp) in out.terms() {
        let p = amp.norm_sqr();
        total += p;
        *dist.entry(model.pattern_of(basis)).or_insert(0.0) += p;
    }
    // The state is normalized, so any missing mass is the vacuum's.
    let missing = (1.0 - total).max(0.0);
    *dist.get_mut(&OutcomePattern::empty()).expect("seeded") += missing;
    Ok(dist)
}

/// The supported scheme catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SchemeName {
    XyBb84,
    NativeXzBb84,
    NativeYzBb84,
    NativeSixState,
    UnifiedXzBb84,
    UnifiedSixState,
}

impl SchemeName {
    pub fn all() -> [SchemeName; 6] {
        [
            SchemeName::XyBb84,
            SchemeName::NativeXzBb84,
            SchemeName::NativeYzBb84,
            SchemeName::NativeSixState,
            SchemeName::UnifiedXzBb84,
            SchemeName::UnifiedSixState,
        ]
    }

    pub fn parse(s: &str) -> Result<Self, SchemeError> {
        match s {
            "xy-bb84" => Ok(SchemeName::XyBb84),
            "native-xz-bb84" => Ok(SchemeName::NativeXzBb84),
            "native-yz-bb84" => Ok(SchemeName::NativeYzBb84),
            "native-six-state" => Ok(SchemeName::NativeSixState),
            "unified-xz-bb84" => Ok(SchemeName::UnifiedXzBb84),
            "unified-six-state" => Ok(SchemeName::UnifiedSixState),
            other => Err(SchemeError::UnknownScheme(other.to_string())),
        }
    }
}

impl fmt::Display for SchemeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeName::XyBb84 => "xy-bb84",
            SchemeName::NativeXzBb84 => "native-xz-bb84",
            SchemeName::NativeYzBb84 => "native-yz-bb84",
            SchemeName::NativeSixState => "native-six-state",
            SchemeName::UnifiedXzBb84 => "unified-xz-bb84",
            SchemeName::UnifiedSixState => "unified-six-state",
        };
        write!(f, "{s}")
    }
}

/// One basis of a scheme: the setup the receiver switches in and how its
/// outcomes are read.
#[derive(Clone, Debug)]
pub struct BasisArm {
    pub basis: BasisId,
    pub setup: BobSetup,
    pub model: MeasurementModel,
}

/// A fully populated scheme.
#[derive(Clone, Debug)]
pub struct SchemeDefinition {
    pub name: String,
    pub window: TimeBinWindow,
    pub detector: DetectorKind,
    pub arms: Vec<BasisArm>,
    pub alphabet: Vec<AliceState>,
}

impl SchemeDefinition {
    pub fn arm(&self, basis: BasisId) -> Result<&BasisArm, SchemeError> {
        self.arms
            .iter()
            .find(|a| a.basis == basis)
            .ok_or(SchemeError::MissingBasis(basis))
    }

    pub fn bases(&self) -> Vec<BasisId> {
        self.arms.iter().map(|a| a.basis).collect()
    }

    pub fn state(&self, basis: BasisId, bit: u8) -> Result<&AliceState, SchemeError> {
        self.alphabet
            .iter()
            .find(|s| s.basis == basis && s.bit == bit)
            .ok_or(SchemeError::MissingBasis(basis))
    }
}

fn t1_windows() -> BTreeSet<ModeLabel> {
    [ModeLabel::Straight(1), ModeLabel::Down(1)].into()
}

fn set(modes: impl IntoIterator<Item = ModeLabel>) -> BTreeSet<ModeLabel> {
    modes.into_iter().collect()
}

/// Interfering arm that gates detectors at bin 1 only: a down click means
/// bit 0, a straight click bit 1.
fn mz_t1_arm(basis: BasisId, phi: f64, detector: DetectorKind) -> Result<BasisArm, SchemeError> {
    let setup = BobSetup::MachZehnder(build_mach_zehnder(phi, analysis_window())?);
    let model = MeasurementModel::new(
        t1_windows(),
        detector,
        set([ModeLabel::Down(1)]),
        set([ModeLabel::Straight(1)]),
    )?;
    Ok(BasisArm {
        basis,
        setup,
        model,
    })
}

/// Direct time-readout arm for the z basis.
fn time_readout_arm(detector: DetectorKind) -> Result<BasisArm, SchemeError> {
    let setup = BobSetup::TimeReadout(build_time_readout(analysis_window())?);
    let model = MeasurementModel::new(
        t1_windows(),
        detector,
        set([ModeLabel::Down(1)]),
        set([ModeLabel::Straight(1)]),
    )?;
    Ok(BasisArm {
        basis: BasisId::Z,
        setup,
        model,
    })
}

/// z read off the fixed interferometer's side bins: all six windows are
/// open, early clicks (bin 0) mean bit 0, late clicks (bin 2) mean bit 1,
/// and bin-1 clicks are discarded as loss.
fn unified_z_arm(detector: DetectorKind) -> Result<BasisArm, SchemeError> {
    let setup = BobSetup::MachZehnder(build_mach_zehnder(0.0, analysis_window())?);
    let windows = set((0..=2)
        .map(ModeLabel::Straight)
        .chain((0..=2).map(ModeLabel::Down)));
    let model = MeasurementModel::new(
        windows,
        detector,
        set([ModeLabel::Straight(0), ModeLabel::Down(0)]),
        set([ModeLabel::Straight(2), ModeLabel::Down(2)]),
    )?;
    Ok(BasisArm {
        basis: BasisId::Z,
        setup,
        model,
    })
}

fn alphabet_for(bases: &[BasisId]) -> Vec<AliceState> {
    bases
        .iter()
        .flat_map(|&b| [alice_state(b, 0), alice_state(b, 1)])
        .collect()
}

/// Build one of the six supported schemes.
pub fn scheme(name: SchemeName, detector: DetectorKind) -> Result<SchemeDefinition, SchemeError> {
    let phi_y = std::f64::consts::FRAC_PI_2;
    let arms: Vec<BasisArm> = match name {
        SchemeName::XyBb84 => vec![
            mz_t1_arm(BasisId::X, 0.0, detector)?,
            mz_t1_arm(BasisId::Y, phi_y, detector)?,
        ],
        SchemeName::NativeXzBb84 => vec![
            mz_t1_arm(BasisId::X, 0.0, detector)?,
            time_readout_arm(detector)?,
        ],
        SchemeName::NativeYzBb84 => vec![
            mz_t1_arm(BasisId::Y, phi_y, detector)?,
            time_readout_arm(detector)?,
        ],
        SchemeName::NativeSixState => vec![
            mz_t1_arm(BasisId::X, 0.0, detector)?,
            mz_t1_arm(BasisId::Y, phi_y, detector)?,
            time_readout_arm(detector)?,
        ],
        SchemeName::UnifiedXzBb84 => vec![
            mz_t1_arm(BasisId::X, 0.0, detector)?,
            unified_z_arm(detector)?,
        ],
        SchemeName::UnifiedSixState => vec![
            mz_t1_arm(BasisId::X, 0.0, detector)?,
            mz_t1_arm(BasisId::Y, phi_y, detector)?,
            unified_z_arm(detector)?,
        ],
    };
    let bases: Vec<BasisId> = arms.iter().map(|a| a.basis).collect();
    Ok(SchemeDefinition {
        name: name.to_string(),
        window: analysis_window(),
        detector,
        arms,
        alphabet: alphabet_for(&bases),
    })
}

// ---------------------------------------------------------------------------
// Scheme records: the on-disk form, so variants can be explored without
// recompiling.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SchemeRecord {
    pub name: String,
    pub window: (i32, i32),
    pub detector: String,
    pub bases: Vec<BasisRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BasisRecord {
    pub basis: String,
    pub setup: SetupRecord,
    pub windows: Vec<String>,
    pub bit0_windows: Vec<String>,
    pub bit1_windows: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetupRecord {
    MachZehnder { phi: f64 },
    TimeReadout,
}

fn modes_to_strings(modes: &BTreeSet<ModeLabel>) -> Vec<String> {
    modes.iter().map(|m| m.to_string()).collect()
}

fn strings_to_modes(labels: &[String]) -> Result<BTreeSet<ModeLabel>, SchemeError> {
    labels
        .iter()
        .map(|s| {
            s.parse::<ModeLabel>()
                .map_err(|e| SchemeError::BadRecord(e.to_string()))
        })
        .collect()
}

impl SchemeDefinition {
    pub fn to_record(&self) -> SchemeRecord {
        SchemeRecord {
            name: self.name.clone(),
            window: (self.window.first, self.window.last),
            detector: self.detector.to_string(),
            bases: self
                .arms
                .iter()
                .map(|arm| BasisRecord {
                    basis: arm.basis.to_string(),
                    setup: match &arm.setup {
                        BobSetup::MachZehnder(s) => SetupRecord::MachZehnder { phi: s.phi() },
                        BobSetup::TimeReadout(_) => SetupRecord::TimeReadout,
                    },
                    windows: modes_to_strings(arm.model.windows()),
                    bit0_windows: modes_to_strings(arm.model.bit_windows(0)),
                    bit1_windows: modes_to_strings(arm.model.bit_windows(1)),
                })
                .collect(),
        }
    }

    pub fn from_record(record: &SchemeRecord) -> Result<Self, SchemeError> {
        let window = TimeBinWindow::new(record.window.0, record.window.1)?;
        let detector = DetectorKind::parse(&record.detector)?;
        if record.bases.is_empty() {
            return Err(SchemeError::BadRecord("scheme has no bases".into()));
        }
        let mut arms = Vec::new();
        for b in &record.bases {
            let basis = BasisId::parse(&b.basis)?;
            let setup = match b.setup {
                SetupRecord::MachZehnder { phi } => {
                    BobSetup::MachZehnder(build_mach_zehnder(phi, window)?)
                }
                SetupRecord::TimeReadout => BobSetup::TimeReadout(build_time_readout(window)?),
            };
            let windows = strings_to_modes(&b.windows)?;
            for w in &windows {
                if !setup.unitary().outputs().contains(w) {
                    return Err(SchemeError::BadRecord(format!(
                        "window {w} is not an output of the {basis} setup"
                    )));
                }
            }
            let model = MeasurementModel::new(
                windows,
                detector,
                strings_to_modes(&b.bit0_windows)?,
                strings_to_modes(&b.bit1_windows)?,
            )?;
            arms.push(BasisArm {
                basis,
                setup,
                model,
            });
        }
        let bases: Vec<BasisId> = arms.iter().map(|a| a.basis).collect();
        Ok(SchemeDefinition {
            name: record.name.clone(),
            window,
            detector,
            arms,
            alphabet: alphabet_for(&bases),
        })
    }
}
