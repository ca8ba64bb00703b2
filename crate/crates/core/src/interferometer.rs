//! Mach-Zehnder time-bin transforms and the receiver-side setups built from
//! them.
//!
//! A Mach-Zehnder interferometer is two symmetric beam splitters with a short
//! arm, a long arm delayed by exactly one time bin, and a controlled phase
//! `phi` on the long arm. Over a window of input bins `[first, last]` it maps
//! each channel bin into four (arm, bin) output modes; the output bins span
//! `[first, last+1]` on both arms, so no input's image is ever truncated.
//!
//! The transform here is constructed by explicit staging - first beam
//! splitter per bin, long-arm phase, long-arm delay as an exact one-bin
//! relabeling, second beam splitter per bin - rather than by transcribing the
//! closed-form single-photon map. The closed form then serves as an
//! independent fixture (see [`crate::verify`]).
//!
//! Vacuum ancilla ports are part of the setup: each bin's first beam splitter
//! has a blocked second input, and the boundary bins feed one vacuum port
//! into the second beam splitter. Including them makes the cached transform a
//! square unitary whose restriction to the channel bins is an isometry.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::fock::{Amplitude, ModeLabel, StateVector, ZERO_TOLERANCE};
use crate::linalg;
use crate::optics::{ModeUnitary, OpticsError, DEFAULT_PHOTON_CAP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterferometerError {
    #[error("time-bin window must satisfy first <= last, got [{first}, {last}]")]
    WindowBackwards { first: i32, last: i32 },
    #[error("input bin {0} lies outside the setup window")]
    BinOutsideWindow(i32),
    #[error("two-photon evolution requires exactly 2 photons, found a term with {0}")]
    PhotonCountNotTwo(u32),
    #[error("time-readout setup needs a window containing bins 0 and 1, got [{first}, {last}]")]
    WindowMissingQubitBins { first: i32, last: i32 },
    #[error(transparent)]
    Optics(#[from] OpticsError),
}

/// Inclusive range of channel input time bins, in units of the pulse spacing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeBinWindow {
    pub first: i32,
    pub last: i32,
}

impl TimeBinWindow {
    pub fn new(first: i32, last: i32) -> Result<Self, InterferometerError> {
        if first > last {
            return Err(InterferometerError::WindowBackwards { first, last });
        }
        Ok(Self { first, last })
    }

    pub fn bins(&self) -> impl Iterator<Item = i32> {
        self.first..=self.last
    }

    /// Output bins on each arm: one more than the inputs, from the long-arm
    /// delay.
    pub fn output_bins(&self) -> impl Iterator<Item = i32> {
        self.first..=(self.last + 1)
    }

    pub fn contains(&self, bin: i32) -> bool {
        (self.first..=self.last).contains(&bin)
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    /// Windows always hold at least one bin.
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A Mach-Zehnder setup with its cached window transform.
#[derive(Clone, Debug)]
pub struct MachZehnderSetup {
    phi: f64,
    window: TimeBinWindow,
    unitary: ModeUnitary,
}

fn vac1(bin: i32) -> ModeLabel {
    ModeLabel::aux("vac1", bin)
}

fn vac2(bin: i32) -> ModeLabel {
    ModeLabel::aux("vac2", bin)
}

fn short(bin: i32) -> ModeLabel {
    ModeLabel::aux("short", bin)
}

fn long(bin: i32) -> ModeLabel {
    ModeLabel::aux("long", bin)
}

fn delayed(bin: i32) -> ModeLabel {
    ModeLabel::aux("dly", bin)
}

/// Build the Mach-Zehnder transform over `window` with long-arm phase `phi`.
///
/// Staging: per-bin first beam splitter, phase shifter on every long-arm
/// mode, the one-bin long-arm delay as an exact relabeling, then the per-bin
/// second beam splitter (which the boundary vacuum ports enter directly).
pub fn build_mach_zehnder(
    phi: f64,
    window: TimeBinWindow,
) -> Result<MachZehnderSetup, InterferometerError> {
    let mut universe: Vec<ModeLabel> = Vec::new();
    universe.extend(window.bins().map(ModeLabel::Input));
    universe.extend(window.bins().map(vac1));
    universe.push(vac2(window.first));
    universe.push(vac2(window.last + 1));

    let mut u = ModeUnitary::identity(universe)?;
    for bin in window.bins() {
        let bs1 = ModeUnitary::beam_splitter(
            [ModeLabel::Input(bin), vac1(bin)],
            [short(bin), long(bin)],
        )?;
        u = ModeUnitary::compose(&bs1.embed_into(u.outputs())?, &u)?;
    }
    for bin in window.bins() {
        let shift = ModeUnitary::phase_shifter(phi, long(bin))?;
        u = ModeUnitary::compose(&shift.embed_into(u.outputs())?, &u)?;
    }

    let mut delay_pairs: Vec<(ModeLabel, ModeLabel)> = Vec::new();
    for bin in window.bins() {
        delay_pairs.push((short(bin), short(bin)));
        delay_pairs.push((long(bin), delayed(bin + 1)));
    }
    delay_pairs.push((vac2(window.first), delayed(window.first)));
    delay_pairs.push((vac2(window.last + 1), short(window.last + 1)));
    u = ModeUnitary::compose(&ModeUnitary::relabeling(delay_pairs)?, &u)?;

    for bin in window.output_bins() {
        let bs2 = ModeUnitary::beam_splitter(
            [short(bin), delayed(bin)],
            [ModeLabel::Straight(bin), ModeLabel::Down(bin)],
        )?;
        u = ModeUnitary::compose(&bs2.embed_into(u.outputs())?, &u)?;
    }

    Ok(MachZehnderSetup {
        phi,
        window,
        unitary: u,
    })
}

impl MachZehnderSetup {
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn window(&self) -> TimeBinWindow {
        self.window
    }

    /// The full square window transform, vacuum ancilla ports included.
    pub fn unitary(&self) -> &ModeUnitary {
        &self.unitary
    }
}

/// Direct time-of-arrival readout used for the z basis: no interference, the
/// channel bins are routed straight onto detector modes. Bin 0 lands on the
/// down arm at bin 1 and bin 1 on the straight arm at bin 1 (a mirror in the
/// lab folds the early pulse onto the other arm), keeping the detector modes
/// that mean bit 0 / bit 1 identical across setups. Earlier bins ride the
/// down arm, later bins the straight arm.
#[derive(Clone, Debug)]
pub struct TimeReadoutSetup {
    window: TimeBinWindow,
    unitary: ModeUnitary,
}

pub fn build_time_readout(window: TimeBinWindow) -> Result<TimeReadoutSetup, InterferometerError> {
    if !(window.contains(0) && window.contains(1)) {
        return Err(InterferometerError::WindowMissingQubitBins {
            first: window.first,
            last: window.last,
        });
    }
    let pairs: Vec<(ModeLabel, ModeLabel)> = window
        .bins()
        .map(|bin| {
            let target = if bin <= 0 {
                ModeLabel::Down(bin + 1)
            } else {
                ModeLabel::Straight(bin)
            };
            (ModeLabel::Input(bin), target)
        })
        .collect();
    Ok(TimeReadoutSetup {
        window,
        unitary: ModeUnitary::relabeling(pairs)?,
    })
}

impl TimeReadoutSetup {
    pub fn window(&self) -> TimeBinWindow {
        self.window
    }

    pub fn unitary(&self) -> &ModeUnitary {
        &self.unitary
    }
}

/// Either of the receiver setups a basis can use.
#[derive(Clone, Debug)]
pub enum BobSetup {
    MachZehnder(MachZehnderSetup),
    TimeReadout(TimeReadoutSetup),
}

impl BobSetup {
    pub fn unitary(&self) -> &ModeUnitary {
        match self {
            BobSetup::MachZehnder(s) => s.unitary(),
            BobSetup::TimeReadout(s) => s.unitary(),
        }
    }

    pub fn window(&self) -> TimeBinWindow {
        match self {
            BobSetup::MachZehnder(s) => s.window(),
            BobSetup::TimeReadout(s) => s.window(),
        }
    }

    /// Long-arm phase, when the setup interferes at all.
    pub fn phi(&self) -> Option<f64> {
        match self {
            BobSetup::MachZehnder(s) => Some(s.phi()),
            BobSetup::TimeReadout(_) => None,
        }
    }

    /// Evolve a channel state (over input bins only) through the setup. The
    /// state is padded with the setup's vacuum ancilla ports first.
    pub fn apply(&self, state: &StateVector, cap: u32) -> Result<StateVector, InterferometerError> {
        for mode in state.universe() {
            match mode {
                ModeLabel::Input(bin) if self.window().contains(*bin) => {}
                ModeLabel::Input(bin) => {
                    return Err(InterferometerError::BinOutsideWindow(*bin));
                }
                other => return Err(OpticsError::UnknownMode(other.clone()).into()),
            }
        }
        let padded = state.extended_to(self.unitary().inputs().iter().cloned());
        Ok(self.unitary().evolve(&padded, cap)?)
    }
}

/// Two-photon evolution through a Mach-Zehnder setup.
///
/// Every term of `state` must carry exactly two photons, all within the
/// setup window.
pub fn evolve_two_photon(
    setup: &MachZehnderSetup,
    state: &StateVector,
) -> Result<StateVector, InterferometerError> {
    for (basis, _) in state.terms() {
        let n = basis.total_photons();
        if n != 2 {
            return Err(InterferometerError::PhotonCountNotTwo(n));
        }
    }
    BobSetup::MachZehnder(setup.clone()).apply(state, DEFAULT_PHOTON_CAP)
}

/// Single-photon transfer amplitudes from input bins to selected output
/// modes: entry `(k, j)` is the amplitude of output mode `j` given one photon
/// in input bin `k`.
///
/// Rows follow `input_bins`, columns follow `output_modes`. The vacuum is
/// omitted: in every setup the vacuum maps to itself.
pub fn beta_matrix(
    setup: &BobSetup,
    input_bins: &[i32],
    output_modes: &[ModeLabel],
) -> Result<DMatrix<Amplitude>, InterferometerError> {
    let u = setup.unitary();
    let mut m = DMatrix::<Amplitude>::zeros(input_bins.len(), output_modes.len());
    for (row, &bin) in input_bins.iter().enumerate() {
        if !setup.window().contains(bin) {
            return Err(InterferometerError::BinOutsideWindow(bin));
        }
        let input = ModeLabel::Input(bin);
        for (col, mode) in output_modes.iter().enumerate() {
            // Output modes beyond this setup's range carry amplitude zero.
            m[(row, col)] = match u.entry(mode, &input) {
                Ok(a) => a,
                Err(OpticsError::UnknownMode(_)) => Amplitude::ZERO,
                Err(e) => return Err(e.into()),
            };
        }
    }
    Ok(m)
}

/// The channel-input space that can influence a set of measured output
/// modes, found by pulling each measured mode back through the inverse
/// transform and projecting onto the channel bins.
#[derive(Clone, Debug)]
pub struct ReversedSpace {
    /// Orthonormal basis of the pulled-back span, as single-photon states
    /// over input bins. The vacuum belongs to the space implicitly.
    pub basis: Vec<StateVector>,
    /// Input bins with nonzero projection; only these can reach the measured
    /// modes.
    pub relevant_bins: Vec<i32>,
    /// Input bins of the window that no measured mode can see. A photon
    /// placed here never affects the measurement outcome.
    pub irrelevant_bins: Vec<i32>,
}

impl ReversedSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Compute the reversed space of `setup` for the given measured output modes.
pub fn reversed_space(
    setup: &BobSetup,
    measured_modes: &[ModeLabel],
) -> Result<ReversedSpace, InterferometerError> {
    let u = setup.unitary();
    let bins: Vec<i32> = setup.window().bins().collect();
    let mut rows: Vec<nalgebra::DVector<Amplitude>> = Vec::new();
    for mode in measured_modes {
        if !u.outputs().contains(mode) {
            return Err(OpticsError::UnknownMode(mode.clone()).into());
        }
        // Row j of U, conjugated: the image of |j> under the inverse map,
        // restricted to the channel bins.
        let row = nalgebra::DVector::from_fn(bins.len(), |k, _| {
            u.entry(mode, &ModeLabel::Input(bins[k]))
                .expect("window bins are setup inputs")
                .conj()
        });
        rows.push(row);
    }

    let mut relevant_bins = Vec::new();
    let mut irrelevant_bins = Vec::new();
    for (k, &bin) in bins.iter().enumerate() {
        let seen = rows.iter().any(|r| r[k].norm() > ZERO_TOLERANCE);
        if seen {
            relevant_bins.push(bin);
        } else {
            irrelevant_bins.push(bin);
        }
    }

    let basis = linalg::orthonormalize(rows)
        .into_iter()
        .map(|v| {
            let terms = bins.iter().enumerate().map(|(k, &bin)| {
                (
                    crate::fock::FockBasisState::single(ModeLabel::Input(bin)),
                    v[k],
                )
            });
            StateVector::from_terms(bins.iter().copied().map(ModeLabel::Input), terms)
                .expect("basis vectors live on window bins")
        })
        .collect();

    Ok(ReversedSpace {
        basis,
        relevant_bins,
        irrelevant_bins,
    })
}
