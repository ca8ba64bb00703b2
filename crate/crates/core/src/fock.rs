//! Occupation-number (Fock) states over a labeled set of optical modes.
//!
//! A mode is a distinguishable photonic degree of freedom; here it is usually
//! a (path-arm, time-bin) pair. States are kept sparse: a basis state stores
//! only modes with nonzero photon count, and a state vector stores only
//! amplitudes whose modulus exceeds [`ZERO_TOLERANCE`]. The states that show
//! up in time-bin QKD analysis occupy a handful of the combinatorially many
//! basis states, so the sparse map form stays exact-shaped and fast.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use thiserror::Error;

/// Complex amplitude carried by every state and matrix in this crate.
pub type Amplitude = Complex<f64>;

/// Modulus below which an amplitude is treated as an exact zero.
///
/// All computations here are short chains of exact small-matrix products, so
/// 1e-9 cleanly separates true zeros from accumulated rounding.
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Errors from state construction and algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    /// Tensor product of states whose mode universes overlap.
    #[error("mode collision: {0} appears in both operands")]
    ModeCollision(ModeLabel),
    /// Normalization of the zero vector.
    #[error("cannot normalize zero state")]
    ZeroNorm,
    /// A relabeling mapped two distinct modes to the same target.
    #[error("relabeling is not injective: {0} produced more than once")]
    NonInjectiveRelabel(ModeLabel),
    /// A basis state used a mode outside the state vector's universe.
    #[error("mode {0} is not part of the mode universe")]
    UnknownMode(ModeLabel),
    /// Malformed textual serialization.
    #[error("parse error: {0}")]
    Parse(String),
}

/// A labeled optical mode.
///
/// Labels are totally ordered (kind first, then bin index, with auxiliary
/// labels last and ordered by name) so that every basis state has exactly one
/// canonical serialization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeLabel {
    /// Channel input time bin `t'_i` (multiples of the pulse spacing).
    Input(i32),
    /// Straight ("s") output arm, time bin `s_i`.
    Straight(i32),
    /// Down ("d") output arm, time bin `d_i`.
    Down(i32),
    /// Auxiliary mode, such as an internal vacuum port of a setup.
    /// Named by role, with a bin index.
    Abstract(String, i32),
}

impl ModeLabel {
    /// Auxiliary label with a role name.
    ///
    /// Names must be nonempty, start with a lowercase letter, and contain
    /// only lowercase letters, digits, and underscores.
    pub fn aux(name: &str, bin: i32) -> Self {
        assert!(
            Self::valid_aux_name(name),
            "invalid auxiliary mode name {name:?}"
        );
        ModeLabel::Abstract(name.to_owned(), bin)
    }

    fn valid_aux_name(name: &str) -> bool {
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return false,
        }
        name.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    }

    /// Time-bin index of the label.
    pub fn bin(&self) -> i32 {
        match self {
            ModeLabel::Input(b)
            | ModeLabel::Straight(b)
            | ModeLabel::Down(b)
            | ModeLabel::Abstract(_, b) => *b,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::Input(b) => write!(f, "t'{b}"),
            ModeLabel::Straight(b) => write!(f, "s{b}"),
            ModeLabel::Down(b) => write!(f, "d{b}"),
            ModeLabel::Abstract(name, b) => write!(f, "{name}.{b}"),
        }
    }
}

impl FromStr for ModeLabel {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self, FockError> {
        let bad = || FockError::Parse(format!("invalid mode label {s:?}"));
        if let Some(rest) = s.strip_prefix("t'") {
            return rest.parse().map(ModeLabel::Input).map_err(|_| bad());
        }
        if let Some((name, bin)) = s.split_once('.') {
            if !Self::valid_aux_name(name) {
                return Err(bad());
            }
            return bin
                .parse()
                .map(|b| ModeLabel::Abstract(name.to_owned(), b))
                .map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix('s') {
            if let Ok(b) = rest.parse() {
                return Ok(ModeLabel::Straight(b));
            }
        }
        if let Some(rest) = s.strip_prefix('d') {
            if let Ok(b) = rest.parse() {
                return Ok(ModeLabel::Down(b));
            }
        }
        Err(bad())
    }
}

/// A Fock basis state: photon count per mode, zero counts omitted.
///
/// The empty map is the vacuum state `|V>`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisState {
    occ: BTreeMap<ModeLabel, u32>,
}

impl FockBasisState {
    /// The vacuum state.
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// One photon in a single mode.
    pub fn single(mode: ModeLabel) -> Self {
        let mut occ = BTreeMap::new();
        occ.insert(mode, 1);
        Self { occ }
    }

    /// Build from (mode, count) pairs; zero counts are dropped.
    pub fn from_occupations<I: IntoIterator<Item = (ModeLabel, u32)>>(pairs: I) -> Self {
        let occ = pairs.into_iter().filter(|(_, n)| *n > 0).collect();
        Self { occ }
    }

    /// Photon count in `mode` (0 when absent).
    pub fn occupation(&self, mode: &ModeLabel) -> u32 {
        self.occ.get(mode).copied().unwrap_or(0)
    }

    /// Modes with nonzero occupation, in canonical order.
    pub fn occupied_modes(&self) -> impl Iterator<Item = (&ModeLabel, u32)> {
        self.occ.iter().map(|(m, n)| (m, *n))
    }

    /// Total photon number.
    pub fn total_photons(&self) -> u32 {
        self.occ.values().sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.occ.is_empty()
    }

    /// Move every occupation through `map`. Injectivity is the caller's
    /// concern; collisions are reported as errors.
    pub fn relabeled<F: Fn(&ModeLabel) -> ModeLabel>(&self, map: F) -> Result<Self, FockError> {
        let mut occ = BTreeMap::new();
        for (mode, n) in &self.occ {
            let target = map(mode);
            if occ.insert(target.clone(), *n).is_some() {
                return Err(FockError::NonInjectiveRelabel(target));
            }
        }
        Ok(Self { occ })
    }

    fn merge_disjoint(&self, other: &Self) -> Self {
        let mut occ = self.occ.clone();
        occ.extend(other.occ.iter().map(|(m, n)| (m.clone(), *n)));
        Self { occ }
    }
}

impl fmt::Display for FockBasisState {
    /// Canonical form `|n1,n2,...>@[label1,label2,...]`; the vacuum is `|>@[]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let counts: Vec<String> = self.occ.values().map(|n| n.to_string()).collect();
        let labels: Vec<String> = self.occ.keys().map(|m| m.to_string()).collect();
        write!(f, "|{}\u{27e9}@[{}]", counts.join(","), labels.join(","))
    }
}

impl FromStr for FockBasisState {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self, FockError> {
        let bad = |why: &str| FockError::Parse(format!("invalid basis state {s:?}: {why}"));
        let body = s
            .strip_prefix('|')
            .ok_or_else(|| bad("missing '|'"))?
            .strip_suffix(']')
            .ok_or_else(|| bad("missing ']'"))?;
        let (counts, labels) = body
            .split_once("\u{27e9}@[")
            .ok_or_else(|| bad("missing '\u{27e9}@['"))?;
        if counts.is_empty() && labels.is_empty() {
            return Ok(Self::vacuum());
        }
        let counts: Vec<u32> = counts
            .split(',')
            .map(|c| c.parse().map_err(|_| bad("bad count")))
            .collect::<Result<_, _>>()?;
        let labels: Vec<ModeLabel> = labels
            .split(',')
            .map(ModeLabel::from_str)
            .collect::<Result<_, _>>()?;
        if counts.len() != labels.len() {
            return Err(bad("count/label length mismatch"));
        }
        Ok(Self::from_occupations(labels.into_iter().zip(counts)))
    }
}

/// Sparse complex superposition of Fock basis states over a mode universe.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: BTreeMap<FockBasisState, Amplitude>,
    universe: BTreeSet<ModeLabel>,
}

impl StateVector {
    /// The zero vector over a universe.
    pub fn zero<I: IntoIterator<Item = ModeLabel>>(universe: I) -> Self {
        Self {
            amps: BTreeMap::new(),
            universe: universe.into_iter().collect(),
        }
    }

    /// The vacuum state `|V>` with amplitude 1.
    pub fn vacuum<I: IntoIterator<Item = ModeLabel>>(universe: I) -> Self {
        let mut v = Self::zero(universe);
        v.amps.insert(FockBasisState::vacuum(), Amplitude::ONE);
        v
    }

    /// A single basis state with amplitude 1.
    pub fn basis_state<I: IntoIterator<Item = ModeLabel>>(
        universe: I,
        basis: FockBasisState,
    ) -> Result<Self, FockError> {
        Self::from_terms(universe, [(basis, Amplitude::ONE)])
    }

    /// One photon in `mode`, universe = {mode}.
    pub fn single_photon(mode: ModeLabel) -> Self {
        let mut v = Self::zero([mode.clone()]);
        v.amps.insert(FockBasisState::single(mode), Amplitude::ONE);
        v
    }

    /// Build from (basis, amplitude) terms. Amplitudes on the same basis
    /// state accumulate; values below [`ZERO_TOLERANCE`] are pruned.
    pub fn from_terms<U, T>(universe: U, terms: T) -> Result<Self, FockError>
    where
        U: IntoIterator<Item = ModeLabel>,
        T: IntoIterator<Item = (FockBasisState, Amplitude)>,
    {
        let universe: BTreeSet<ModeLabel> = universe.into_iter().collect();
        let mut amps: BTreeMap<FockBasisState, Amplitude> = BTreeMap::new();
        for (basis, amp) in terms {
            for (mode, _) in basis.occupied_modes() {
                if !universe.contains(mode) {
                    return Err(FockError::UnknownMode(mode.clone()));
                }
            }
            *amps.entry(basis).or_insert(Amplitude::ZERO) += amp;
        }
        amps.retain(|_, a| a.norm() >= ZERO_TOLERANCE);
        Ok(Self { amps, universe })
    }

    pub fn universe(&self) -> &BTreeSet<ModeLabel> {
        &self.universe
    }

    /// Stored (basis, amplitude) terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&FockBasisState, Amplitude)> {
        self.amps.iter().map(|(b, a)| (b, *a))
    }

    pub fn amplitude(&self, basis: &FockBasisState) -> Amplitude {
        self.amps.get(basis).copied().unwrap_or(Amplitude::ZERO)
    }

    pub fn term_count(&self) -> usize {
        self.amps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest total photon number with support.
    pub fn max_photons(&self) -> u32 {
        self.amps
            .keys()
            .map(|b| b.total_photons())
            .max()
            .unwrap_or(0)
    }

    /// Multiply every amplitude by `c`.
    pub fn scaled(&self, c: Amplitude) -> Self {
        let mut amps = BTreeMap::new();
        for (b, a) in &self.amps {
            let v = a * c;
            if v.norm() >= ZERO_TOLERANCE {
                amps.insert(b.clone(), v);
            }
        }
        Self {
            amps,
            universe: self.universe.clone(),
        }
    }

    /// Sum of two states; mode universes are unioned.
    pub fn plus(&self, other: &Self) -> Self {
        let mut amps = self.amps.clone();
        for (b, a) in &other.amps {
            *amps.entry(b.clone()).or_insert(Amplitude::ZERO) += a;
        }
        amps.retain(|_, a| a.norm() >= ZERO_TOLERANCE);
        Self {
            amps,
            universe: self.universe.union(&other.universe).cloned().collect(),
        }
    }

    /// Enlarge the universe with extra modes at occupation zero.
    pub fn extended_to<I: IntoIterator<Item = ModeLabel>>(&self, extra: I) -> Self {
        let mut universe = self.universe.clone();
        universe.extend(extra);
        Self {
            amps: self.amps.clone(),
            universe,
        }
    }

    /// `<a|b>`. Universes are unioned; modes absent from one side count as
    /// occupation zero, so overlaps of states with different total photon
    /// number vanish identically.
    pub fn inner_product(a: &Self, b: &Self) -> Amplitude {
        let mut acc = Amplitude::ZERO;
        for (basis, amp_a) in &a.amps {
            if let Some(amp_b) = b.amps.get(basis) {
                acc += amp_a.conj() * amp_b;
            }
        }
        acc
    }

    /// Tensor product. The universes must be disjoint.
    pub fn tensor(a: &Self, b: &Self) -> Result<Self, FockError> {
        if let Some(shared) = a.universe.intersection(&b.universe).next() {
            return Err(FockError::ModeCollision(shared.clone()));
        }
        let universe: BTreeSet<ModeLabel> = a.universe.union(&b.universe).cloned().collect();
        let mut amps = BTreeMap::new();
        for (ba, aa) in &a.amps {
            for (bb, ab) in &b.amps {
                let v = aa * ab;
                if v.norm() >= ZERO_TOLERANCE {
                    amps.insert(ba.merge_disjoint(bb), v);
                }
            }
        }
        Ok(Self { amps, universe })
    }

    /// Rescale to unit norm; direction and phase are unchanged.
    pub fn normalized(&self) -> Result<Self, FockError> {
        let n = self.norm();
        if n < ZERO_TOLERANCE {
            return Err(FockError::ZeroNorm);
        }
        Ok(self.scaled(Amplitude::new(1.0 / n, 0.0)))
    }

    /// Move all occupations through an injective mode mapping; amplitudes are
    /// unchanged.
    pub fn relabeled<F: Fn(&ModeLabel) -> ModeLabel>(&self, map: F) -> Result<Self, FockError> {
        let mut universe = BTreeSet::new();
        for mode in &self.universe {
            let target = map(mode);
            if !universe.insert(target.clone()) {
                return Err(FockError::NonInjectiveRelabel(target));
            }
        }
        let mut amps = BTreeMap::new();
        for (basis, amp) in &self.amps {
            amps.insert(basis.relabeled(&map)?, *amp);
        }
        Ok(Self { amps, universe })
    }

    /// True when all amplitudes agree within `tol` (modulus of difference).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let keys: BTreeSet<&FockBasisState> = self.amps.keys().chain(other.amps.keys()).collect();
        keys.into_iter()
            .all(|k| (self.amplitude(k) - other.amplitude(k)).norm() <= tol)
    }

    /// Compare up to a global phase: both states are divided by their first
    /// nonzero amplitude (canonical order) and compared exactly. On success
    /// returns the phase ratio `other/self`; physical-equivalence checks use
    /// this, fixture checks use [`StateVector::approx_eq`].
    pub fn global_phase_to(&self, other: &Self, tol: f64) -> Option<Amplitude> {
        let lead_self = self.amps.values().next()?;
        let lead_other = other.amps.values().next()?;
        let a = self.scaled(Amplitude::ONE / lead_self);
        let b = other.scaled(Amplitude::ONE / lead_other);
        if a.approx_eq(&b, tol) {
            Some(lead_other / lead_self)
        } else {
            None
        }
    }

    /// Canonical textual form: one `(basis, re, im)` triple per line, in
    /// canonical basis order. Re-serializing a parsed document is
    /// byte-identical.
    pub fn to_doc_string(&self) -> String {
        let mut out = String::new();
        let universe: Vec<String> = self.universe.iter().map(|m| m.to_string()).collect();
        out.push_str(&format!("modes [{}]\n", universe.join(",")));
        for (basis, amp) in &self.amps {
            out.push_str(&format!(
                "{} {} {}\n",
                basis,
                fmt_real(amp.re),
                fmt_real(amp.im)
            ));
        }
        out
    }

    /// Parse the form produced by [`StateVector::to_doc_string`].
    pub fn parse_doc(doc: &str) -> Result<Self, FockError> {
        let bad = |why: String| FockError::Parse(why);
        let mut lines = doc.lines();
        let header = lines.next().ok_or_else(|| bad("empty document".into()))?;
        let modes = header
            .strip_prefix("modes [")
            .and_then(|h| h.strip_suffix(']'))
            .ok_or_else(|| bad(format!("bad header {header:?}")))?;
        let universe: Vec<ModeLabel> = if modes.is_empty() {
            Vec::new()
        } else {
            modes
                .split(',')
                .map(ModeLabel::from_str)
                .collect::<Result<_, _>>()?
        };
        let mut terms = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.rsplitn(3, ' ');
            let im: f64 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| bad(format!("bad line {line:?}")))?;
            let re: f64 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| bad(format!("bad line {line:?}")))?;
            let basis: FockBasisState = parts
                .next()
                .ok_or_else(|| bad(format!("bad line {line:?}")))?
                .parse()?;
            terms.push((basis, Amplitude::new(re, im)));
        }
        Self::from_terms(universe, terms)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_doc_string())
    }
}

/// Fixed-width significand formatting (12 significant digits) used by all
/// textual serializations, with negative zero normalized away.
pub fn fmt_real(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(bin: i32) -> ModeLabel {
        ModeLabel::Input(bin)
    }

    fn one() -> Amplitude {
        Amplitude::ONE
    }

    #[test]
    fn inner_product_of_unit_basis_states() {
        let a = StateVector::single_photon(t(0));
        assert_eq!(StateVector::inner_product(&a, &a), one());
    }

    #[test]
    fn inner_product_of_orthogonal_basis_states() {
        let a = StateVector::single_photon(t(0));
        let b = StateVector::single_photon(t(1));
        assert_eq!(StateVector::inner_product(&a, &b), Amplitude::ZERO);
    }

    #[test]
    fn inner_product_vanishes_across_photon_totals() {
        // <11|20> = 0: occupation mismatch in every mode.
        let universe = [t(0), t(1)];
        let b11 = FockBasisState::from_occupations([(t(0), 1), (t(1), 1)]);
        let b20 = FockBasisState::from_occupations([(t(0), 2)]);
        let a = StateVector::basis_state(universe.clone(), b11).unwrap();
        let b = StateVector::basis_state(universe, b20).unwrap();
        assert_eq!(StateVector::inner_product(&a, &b), Amplitude::ZERO);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric() {
        let universe = [t(0), t(1)];
        let a = StateVector::from_terms(
            universe.clone(),
            [
                (FockBasisState::single(t(0)), Amplitude::new(0.3, 0.4)),
                (FockBasisState::single(t(1)), Amplitude::new(-0.1, 0.9)),
            ],
        )
        .unwrap();
        let b = StateVector::from_terms(
            universe,
            [
                (FockBasisState::single(t(0)), Amplitude::new(0.7, -0.2)),
                (FockBasisState::vacuum(), Amplitude::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        let ab = StateVector::inner_product(&a, &b);
        let ba = StateVector::inner_product(&b, &a);
        assert!((ab - ba.conj()).norm() < 1e-15);
    }

    #[test]
    fn tensor_with_vacuum_ancilla() {
        let a = StateVector::single_photon(t(0));
        let anc = StateVector::vacuum([t(5)]);
        let prod = StateVector::tensor(&a, &anc).unwrap();
        assert_eq!(prod.term_count(), 1);
        assert_eq!(prod.amplitude(&FockBasisState::single(t(0))), one());
        assert!(prod.universe().contains(&t(5)));
    }

    #[test]
    fn tensor_multiplies_amplitudes() {
        let a = StateVector::single_photon(t(0)).scaled(Amplitude::new(0.0, 0.5));
        let b = StateVector::single_photon(t(1)).scaled(Amplitude::new(0.5, 0.0));
        let prod = StateVector::tensor(&a, &b).unwrap();
        let b11 = FockBasisState::from_occupations([(t(0), 1), (t(1), 1)]);
        assert_eq!(prod.amplitude(&b11), Amplitude::new(0.0, 0.25));
    }

    #[test]
    fn tensor_is_linear_over_superpositions() {
        let s = Amplitude::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let sup = StateVector::single_photon(t(0))
            .plus(&StateVector::single_photon(t(1)))
            .scaled(s);
        let anc = StateVector::vacuum([ModeLabel::aux("x", 0)]);
        let prod = StateVector::tensor(&sup, &anc).unwrap();
        assert_eq!(prod.term_count(), 2);
        assert!((prod.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_rejects_mode_collision() {
        let a = StateVector::single_photon(t(0));
        let b = StateVector::vacuum([t(0)]);
        assert_eq!(
            StateVector::tensor(&a, &b),
            Err(FockError::ModeCollision(t(0)))
        );
    }

    #[test]
    fn normalize_rescales_and_keeps_phase() {
        let v = StateVector::vacuum([t(0)]).scaled(Amplitude::new(3.0, 4.0));
        let n = v.normalized().unwrap();
        let expect = Amplitude::new(0.6, 0.8);
        assert!((n.amplitude(&FockBasisState::vacuum()) - expect).norm() < 1e-12);

        let doubled = StateVector::single_photon(t(0)).scaled(Amplitude::new(2.0, 0.0));
        assert!(doubled
            .normalized()
            .unwrap()
            .approx_eq(&StateVector::single_photon(t(0)), 1e-12));
    }

    #[test]
    fn normalize_rejects_zero_state() {
        let z = StateVector::zero([t(0)]);
        assert_eq!(z.normalized(), Err(FockError::ZeroNorm));
    }

    #[test]
    fn relabel_shifts_time_bins() {
        let v = StateVector::single_photon(t(0));
        let shifted = v.relabeled(|m| ModeLabel::Input(m.bin() + 1)).unwrap();
        assert!(shifted.approx_eq(&StateVector::single_photon(t(1)), 0.0));

        let sup = StateVector::single_photon(t(0))
            .plus(&StateVector::single_photon(t(1)))
            .normalized()
            .unwrap();
        let back = sup.relabeled(|m| ModeLabel::Input(m.bin() - 1)).unwrap();
        let expect = StateVector::single_photon(t(-1))
            .plus(&StateVector::single_photon(t(0)))
            .normalized()
            .unwrap();
        assert!(back.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn relabel_rejects_collisions() {
        let v = StateVector::single_photon(t(0)).plus(&StateVector::single_photon(t(1)));
        let err = v.relabeled(|_| t(7));
        assert_eq!(err, Err(FockError::NonInjectiveRelabel(t(7))));
    }

    #[test]
    fn global_phase_comparison() {
        let v = StateVector::single_photon(t(0))
            .plus(&StateVector::single_photon(t(1)))
            .normalized()
            .unwrap();
        let rotated = v.scaled(Amplitude::new(0.0, 1.0));
        assert!(!v.approx_eq(&rotated, 1e-9));
        let phase = v.global_phase_to(&rotated, 1e-9).unwrap();
        assert!((phase - Amplitude::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn doc_round_trip_is_byte_identical() {
        let v = StateVector::from_terms(
            [
                t(-1),
                t(0),
                ModeLabel::Straight(1),
                ModeLabel::aux("vac1", 2),
            ],
            [
                (FockBasisState::single(t(-1)), Amplitude::new(0.25, -0.5)),
                (
                    FockBasisState::from_occupations([(t(0), 2), (ModeLabel::Straight(1), 1)]),
                    Amplitude::new(-1.0 / 3.0, 0.125),
                ),
                (FockBasisState::vacuum(), Amplitude::new(0.0, 1e-3)),
            ],
        )
        .unwrap();
        let doc = v.to_doc_string();
        let parsed = StateVector::parse_doc(&doc).unwrap();
        assert_eq!(parsed.to_doc_string(), doc);
    }

    #[test]
    fn golden_doc_string() {
        let v = StateVector::from_terms(
            [t(0), t(1), ModeLabel::Straight(1)],
            [
                (
                    FockBasisState::single(t(0)),
                    Amplitude::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                ),
                (
                    FockBasisState::from_occupations([(t(1), 2)]),
                    Amplitude::new(0.0, -0.5),
                ),
            ],
        )
        .unwrap();
        assert_eq!(
            v.to_doc_string(),
            "modes [t'0,t'1,s1]\n\
             |1\u{27e9}@[t'0] 7.07106781187e-1 0.00000000000e0\n\
             |2\u{27e9}@[t'1] 0.00000000000e0 -5.00000000000e-1\n"
        );
    }

    #[test]
    fn mode_label_ordering_is_canonical() {
        let mut labels = vec![
            ModeLabel::aux("vac1", 0),
            ModeLabel::Down(-1),
            ModeLabel::Straight(2),
            t(3),
            t(-2),
            ModeLabel::Straight(0),
        ];
        labels.sort();
        assert_eq!(
            labels,
            vec![
                t(-2),
                t(3),
                ModeLabel::Straight(0),
                ModeLabel::Straight(2),
                ModeLabel::Down(-1),
                ModeLabel::aux("vac1", 0),
            ]
        );
    }
}
