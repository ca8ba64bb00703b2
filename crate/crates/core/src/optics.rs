//! Linear-optical elements as mode unitaries, and their lift to multi-photon
//! Fock-space evolution.
//!
//! # Phase convention
//!
//! The symmetric beam splitter used throughout maps input arms (1,2) to
//! output arms (3,4) with matrix `(1/sqrt 2) [[1, i], [i, 1]]`: the
//! transmitted part keeps its phase, the reflected part picks up `i`
//! (a phase of pi/2). Several other sign conventions exist in the
//! literature; every fixture in this crate assumes exactly this one, and the
//! phase shifter acts as `|n> -> exp(i n phi) |n>`.
//!
//! A mode unitary acts on single photons. Its action on an `N`-photon basis
//! state is fixed by linearity over creation operators: the amplitude to go
//! from occupations `n` to occupations `n'` is `perm(U[n',n]) /
//! sqrt(prod n_j! prod n'_i!)`, where `U[n',n]` repeats row `i` of `U`
//! `n'_i` times and column `j` `n_j` times. [`ModeUnitary::evolve`] computes
//! exactly that; [`ModeUnitary::evolve_via_operators`] instead substitutes
//! each input creation operator by its image and expands the product
//! symbolically. The two routes are independent and are cross-checked against
//! each other in the test suite.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::fock::{Amplitude, FockBasisState, ModeLabel, StateVector, ZERO_TOLERANCE};

/// Photon-number cap used by the analyses in this crate.
pub const DEFAULT_PHOTON_CAP: u32 = 2;

/// Hard engine limit; the permanent is expanded over permutations, which is
/// only sensible for tiny photon numbers.
pub const MAX_PHOTON_CAP: u32 = 4;

/// Max-norm tolerance for the unitarity check at construction.
pub const UNITARITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("matrix is not unitary (max |U^t U - I| = {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix must be square: {rows} rows vs {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("duplicate mode label {0}")]
    DuplicateMode(ModeLabel),
    #[error("unknown mode {0}")]
    UnknownMode(ModeLabel),
    #[error("mode universes do not match: expected [{expected}], got [{got}]")]
    UniverseMismatch { expected: String, got: String },
    #[error("photon cap exceeded: state holds {photons} photons, cap is {cap}")]
    PhotonCapExceeded { photons: u32, cap: u32 },
    #[error("photon cap {0} exceeds the engine limit {MAX_PHOTON_CAP}")]
    CapTooLarge(u32),
}

/// A unitary on a labeled set of modes.
///
/// Rows are indexed by output labels, columns by input labels, both kept in
/// canonical label order. Unitarity is checked at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    inputs: Vec<ModeLabel>,
    outputs: Vec<ModeLabel>,
    matrix: DMatrix<Amplitude>,
}

fn canonical_permutation(labels: &[ModeLabel]) -> Result<Vec<usize>, OpticsError> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    for w in order.windows(2) {
        if labels[w[0]] == labels[w[1]] {
            return Err(OpticsError::DuplicateMode(labels[w[0]].clone()));
        }
    }
    Ok(order)
}

fn labels_string(labels: &[ModeLabel]) -> String {
    labels
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl ModeUnitary {
    /// Build from explicit labels and a matrix whose (row, column) indices
    /// follow the given output/input orders. Labels are re-sorted into
    /// canonical order, permuting the matrix to match.
    pub fn new(
        inputs: Vec<ModeLabel>,
        outputs: Vec<ModeLabel>,
        matrix: DMatrix<Amplitude>,
    ) -> Result<Self, OpticsError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(OpticsError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if inputs.len() != matrix.ncols() || outputs.len() != matrix.nrows() {
            return Err(OpticsError::NotSquare {
                rows: outputs.len(),
                cols: inputs.len(),
            });
        }
        let in_perm = canonical_permutation(&inputs)?;
        let out_perm = canonical_permutation(&outputs)?;
        let n = inputs.len();
        let mut m = DMatrix::<Amplitude>::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = matrix[(out_perm[r], in_perm[c])];
            }
        }
        let sorted_inputs: Vec<ModeLabel> = in_perm.iter().map(|&i| inputs[i].clone()).collect();
        let sorted_outputs: Vec<ModeLabel> = out_perm.iter().map(|&i| outputs[i].clone()).collect();

        let gram = m.adjoint() * &m;
        let id = DMatrix::<Amplitude>::identity(n, n);
        let dev = (gram - id).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > UNITARITY_TOLERANCE {
            return Err(OpticsError::NotUnitary(dev));
        }
        Ok(Self {
            inputs: sorted_inputs,
            outputs: sorted_outputs,
            matrix: m,
        })
    }

    /// Identity on a set of modes.
    pub fn identity(modes: Vec<ModeLabel>) -> Result<Self, OpticsError> {
        let n = modes.len();
        Self::new(modes.clone(), modes, DMatrix::identity(n, n))
    }

    /// Pure relabeling: photons move from each pair's first label to its
    /// second, with no amplitude change.
    pub fn relabeling(pairs: Vec<(ModeLabel, ModeLabel)>) -> Result<Self, OpticsError> {
        let inputs: Vec<ModeLabel> = pairs.iter().map(|(a, _)| a.clone()).collect();
        let outputs: Vec<ModeLabel> = pairs.iter().map(|(_, b)| b.clone()).collect();
        let n = pairs.len();
        Self::new(inputs, outputs, DMatrix::identity(n, n))
    }

    /// The symmetric 50/50 beam splitter from `(in1, in2)` to `(out1, out2)`:
    /// `(1/sqrt 2) [[1, i], [i, 1]]`, reflection picking up the `i`.
    pub fn beam_splitter(
        inputs: [ModeLabel; 2],
        outputs: [ModeLabel; 2],
    ) -> Result<Self, OpticsError> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Amplitude::new(s, 0.0),
                Amplitude::new(0.0, s),
                Amplitude::new(0.0, s),
                Amplitude::new(s, 0.0),
            ],
        );
        Self::new(inputs.to_vec(), outputs.to_vec(), m)
    }

    /// Phase shifter on one mode: the 1x1 matrix `[exp(i phi)]`, whose lifted
    /// action is `|n> -> exp(i n phi) |n>`.
    pub fn phase_shifter(phi: f64, mode: ModeLabel) -> Result<Self, OpticsError> {
        let m = DMatrix::from_row_slice(1, 1, &[Amplitude::from_polar(1.0, phi)]);
        Self::new(vec![mode.clone()], vec![mode], m)
    }

    pub fn inputs(&self) -> &[ModeLabel] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[ModeLabel] {
        &self.outputs
    }

    pub fn matrix(&self) -> &DMatrix<Amplitude> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.inputs.len()
    }

    /// Amplitude of `output` given a single photon in `input`.
    pub fn entry(&self, output: &ModeLabel, input: &ModeLabel) -> Result<Amplitude, OpticsError> {
        let r = self
            .outputs
            .iter()
            .position(|m| m == output)
            .ok_or_else(|| OpticsError::UnknownMode(output.clone()))?;
        let c = self
            .inputs
            .iter()
            .position(|m| m == input)
            .ok_or_else(|| OpticsError::UnknownMode(input.clone()))?;
        Ok(self.matrix[(r, c)])
    }

    /// Conjugate transpose: swaps the roles of inputs and outputs.
    pub fn adjoint(&self) -> Self {
        Self {
            inputs: self.outputs.clone(),
            outputs: self.inputs.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Block embedding: this unitary on its own modes, identity on the rest
    /// of `universe`. Every input mode must be a member of `universe`.
    pub fn embed_into(&self, universe: &[ModeLabel]) -> Result<Self, OpticsError> {
        for m in &self.inputs {
            if !universe.contains(m) {
                return Err(OpticsError::UnknownMode(m.clone()));
            }
        }
        let mut inputs = Vec::with_capacity(universe.len());
        let mut outputs = Vec::with_capacity(universe.len());
        let passive: Vec<ModeLabel> = universe
            .iter()
            .filter(|m| !self.inputs.contains(m))
            .cloned()
            .collect();
        inputs.extend(self.inputs.iter().cloned());
        inputs.extend(passive.iter().cloned());
        outputs.extend(self.outputs.iter().cloned());
        outputs.extend(passive.iter().cloned());
        let n = inputs.len();
        let k = self.dim();
        let mut m = DMatrix::<Amplitude>::identity(n, n);
        for r in 0..k {
            for c in 0..k {
                m[(r, c)] = self.matrix[(r, c)];
            }
        }
        for d in k..n {
            m[(d, d)] = Amplitude::ONE;
        }
        Self::new(inputs, outputs, m)
    }

    /// Matrix product `second . first`; `first`'s outputs must equal
    /// `second`'s inputs as a set.
    pub fn compose(second: &Self, first: &Self) -> Result<Self, OpticsError> {
        if second.inputs != first.outputs {
            return Err(OpticsError::UniverseMismatch {
                expected: labels_string(&first.outputs),
                got: labels_string(&second.inputs),
            });
        }
        Ok(Self {
            inputs: first.inputs.clone(),
            outputs: second.outputs.clone(),
            matrix: &second.matrix * &first.matrix,
        })
    }

    fn check_state(&self, state: &StateVector, cap: u32) -> Result<(), OpticsError> {
        if cap > MAX_PHOTON_CAP {
            return Err(OpticsError::CapTooLarge(cap));
        }
        let expected: Vec<&ModeLabel> = self.inputs.iter().collect();
        let got: Vec<&ModeLabel> = state.universe().iter().collect();
        if expected != got {
            return Err(OpticsError::UniverseMismatch {
                expected: labels_string(&self.inputs),
                got: state
                    .universe()
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            });
        }
        let photons = state.max_photons();
        if photons > cap {
            return Err(OpticsError::PhotonCapExceeded { photons, cap });
        }
        Ok(())
    }

    /// Multi-photon Fock-space evolution via matrix permanents.
    ///
    /// Linear and norm-preserving; total photon number is conserved exactly
    /// because only output occupations with the same total are enumerated.
    pub fn evolve(&self, state: &StateVector, cap: u32) -> Result<StateVector, OpticsError> {
        self.check_state(state, cap)?;
        let mut terms: Vec<(FockBasisState, Amplitude)> = Vec::new();
        for (basis, amp) in state.terms() {
            let n: Vec<u32> = self.inputs.iter().map(|m| basis.occupation(m)).collect();
            let total: u32 = n.iter().sum();
            if total == 0 {
                terms.push((FockBasisState::vacuum(), amp));
                continue;
            }
            let cols = repeat_indices(&n);
            let in_norm: f64 = n.iter().map(|&k| factorial(k)).product();
            for m_occ in occupation_patterns(self.outputs.len(), total) {
                let rows = repeat_indices(&m_occ);
                let sub = submatrix(&self.matrix, &rows, &cols);
                let per = permanent(&sub);
                if per.norm() == 0.0 {
                    continue;
                }
                let out_norm: f64 = m_occ.iter().map(|&k| factorial(k)).product();
                let coeff = per / Amplitude::from((in_norm * out_norm).sqrt());
                let out_basis = FockBasisState::from_occupations(
                    self.outputs.iter().cloned().zip(m_occ.iter().copied()),
                );
                terms.push((out_basis, amp * coeff));
            }
        }
        Ok(StateVector::from_terms(self.outputs.iter().cloned(), terms)
            .expect("evolution output uses the unitary's own output modes"))
    }

    /// Multi-photon evolution by symbolic creation-operator substitution:
    /// each input-mode creation operator is replaced by the sum of output
    /// creation operators weighted by its matrix column, and the product is
    /// expanded.
    pub fn evolve_via_operators(
        &self,
        state: &StateVector,
        cap: u32,
    ) -> Result<StateVector, OpticsError> {
        self.check_state(state, cap)?;
        let dim = self.outputs.len();
        let mut terms: Vec<(FockBasisState, Amplitude)> = Vec::new();
        for (basis, amp) in state.terms() {
            // Polynomial in output creation operators, keyed by power vector.
            let mut poly: BTreeMap<Vec<u32>, Amplitude> = BTreeMap::new();
            poly.insert(vec![0; dim], Amplitude::ONE);
            let mut in_norm = 1.0;
            for (col, mode) in self.inputs.iter().enumerate() {
                let reps = basis.occupation(mode);
                in_norm *= factorial(reps);
                for _ in 0..reps {
                    let mut next: BTreeMap<Vec<u32>, Amplitude> = BTreeMap::new();
                    for (powers, coeff) in &poly {
                        for row in 0..dim {
                            let w = self.matrix[(row, col)];
                            if w.norm() == 0.0 {
                                continue;
                            }
                            let mut p = powers.clone();
                            p[row] += 1;
                            *next.entry(p).or_insert(Amplitude::ZERO) += coeff * w;
                        }
                    }
                    poly = next;
                }
            }
            for (powers, coeff) in poly {
                if coeff.norm() < ZERO_TOLERANCE * ZERO_TOLERANCE {
                    continue;
                }
                let out_norm: f64 = powers.iter().map(|&k| factorial(k)).product();
                let value = amp * coeff * Amplitude::from((out_norm / in_norm).sqrt());
                let out_basis = FockBasisState::from_occupations(
                    self.outputs.iter().cloned().zip(powers.iter().copied()),
                );
                terms.push((out_basis, value));
            }
        }
        Ok(StateVector::from_terms(self.outputs.iter().cloned(), terms)
            .expect("evolution output uses the unitary's own output modes"))
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Index list with entry `i` repeated `occ[i]` times.
fn repeat_indices(occ: &[u32]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &n) in occ.iter().enumerate() {
        for _ in 0..n {
            out.push(i);
        }
    }
    out
}

fn submatrix(m: &DMatrix<Amplitude>, rows: &[usize], cols: &[usize]) -> DMatrix<Amplitude> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// All occupation vectors of `modes` entries summing to `total`.
pub fn occupation_patterns(modes: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(modes: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if modes == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(modes - 1, total - k, prefix, out);
            prefix.pop();
        }
    }
    if modes == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    rec(modes, total, &mut Vec::new(), &mut out);
    out
}

/// Permanent by direct expansion over permutations. The matrices here are at
/// most 4x4 (photon cap), where expansion beats anything cleverer.
pub fn permanent(m: &DMatrix<Amplitude>) -> Amplitude {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    if n == 0 {
        return Amplitude::ONE;
    }
    fn rec(m: &DMatrix<Amplitude>, row: usize, used: &mut [bool]) -> Amplitude {
        if row == m.nrows() {
            return Amplitude::ONE;
        }
        let mut acc = Amplitude::ZERO;
        for c in 0..m.ncols() {
            if used[c] || m[(row, c)].norm() == 0.0 {
                continue;
            }
            used[c] = true;
            acc += m[(row, c)] * rec(m, row + 1, used);
            used[c] = false;
        }
        acc
    }
    rec(m, 0, &mut vec![false; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasisState;

    fn arm(i: i32) -> ModeLabel {
        ModeLabel::aux("arm", i)
    }

    fn bs() -> ModeUnitary {
        ModeUnitary::beam_splitter([arm(1), arm(2)], [arm(1), arm(2)]).unwrap()
    }

    fn ket(occ: &[(i32, u32)]) -> StateVector {
        StateVector::from_terms(
            [arm(1), arm(2)],
            [(
                FockBasisState::from_occupations(occ.iter().map(|&(i, n)| (arm(i), n))),
                Amplitude::ONE,
            )],
        )
        .unwrap()
    }

    fn assert_state(actual: &StateVector, expected: &[(Vec<(i32, u32)>, Amplitude)]) {
        let terms: Vec<(FockBasisState, Amplitude)> = expected
            .iter()
            .map(|(occ, a)| {
                (
                    FockBasisState::from_occupations(occ.iter().map(|&(i, n)| (arm(i), n))),
                    *a,
                )
            })
            .collect();
        let want = StateVector::from_terms([arm(1), arm(2)], terms).unwrap();
        assert!(
            actual.approx_eq(&want, 1e-9),
            "got:\n{actual}\nwant:\n{want}"
        );
    }

    #[test]
    fn beam_splitter_single_photon_images() {
        let u = bs();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let out = u.evolve(&ket(&[(1, 1)]), 2).unwrap();
        assert_state(
            &out,
            &[
                (vec![(1, 1)], Amplitude::new(s, 0.0)),
                (vec![(2, 1)], Amplitude::new(0.0, s)),
            ],
        );
        let out = u.evolve(&ket(&[(2, 1)]), 2).unwrap();
        assert_state(
            &out,
            &[
                (vec![(1, 1)], Amplitude::new(0.0, s)),
                (vec![(2, 1)], Amplitude::new(s, 0.0)),
            ],
        );
    }

    #[test]
    fn beam_splitter_two_photon_images() {
        let u = bs();
        let h = Amplitude::new(0.5, 0.0);
        let si2 = Amplitude::new(0.0, std::f64::consts::FRAC_1_SQRT_2);

        // |11> -> (i/sqrt2)(|20> + |02>): photon bunching.
        let out = u.evolve(&ket(&[(1, 1), (2, 1)]), 2).unwrap();
        assert_state(&out, &[(vec![(1, 2)], si2), (vec![(2, 2)], si2)]);

        // |20> -> (|20> + sqrt2 i |11> - |02>)/2.
        let out = u.evolve(&ket(&[(1, 2)]), 2).unwrap();
        assert_state(
            &out,
            &[
                (vec![(1, 2)], h),
                (vec![(1, 1), (2, 1)], Amplitude::new(0.0, 2f64.sqrt() / 2.0)),
                (vec![(2, 2)], -h),
            ],
        );

        // |02> -> (-|20> + sqrt2 i |11> + |02>)/2.
        let out = u.evolve(&ket(&[(2, 2)]), 2).unwrap();
        assert_state(
            &out,
            &[
                (vec![(1, 2)], -h),
                (vec![(1, 1), (2, 1)], Amplitude::new(0.0, 2f64.sqrt() / 2.0)),
                (vec![(2, 2)], h),
            ],
        );
    }

    #[test]
    fn phase_shifter_multiplies_by_photon_count() {
        let mode = arm(1);
        let u = ModeUnitary::phase_shifter(std::f64::consts::FRAC_PI_2, mode.clone()).unwrap();
        let one = StateVector::single_photon(mode.clone());
        let out = u.evolve(&one, 2).unwrap();
        assert!(out.approx_eq(&one.scaled(Amplitude::new(0.0, 1.0)), 1e-12));

        let two = StateVector::basis_state(
            [mode.clone()],
            FockBasisState::from_occupations([(mode, 2)]),
        )
        .unwrap();
        let out = u.evolve(&two, 2).unwrap();
        assert!(out.approx_eq(&two.scaled(Amplitude::new(-1.0, 0.0)), 1e-12));
    }

    #[test]
    fn phase_shifter_zero_is_identity() {
        let mode = arm(1);
        let u = ModeUnitary::phase_shifter(0.0, mode.clone()).unwrap();
        let state = StateVector::single_photon(mode);
        assert!(u.evolve(&state, 1).unwrap().approx_eq(&state, 1e-12));
    }

    #[test]
    fn embed_keeps_identity_on_passive_modes() {
        let extra = arm(3);
        let u = bs().embed_into(&[arm(1), arm(2), extra.clone()]).unwrap();
        assert_eq!(u.dim(), 3);
        assert_eq!(u.entry(&extra, &extra).unwrap(), Amplitude::ONE);
        assert_eq!(u.entry(&extra, &arm(1)).unwrap(), Amplitude::ZERO);

        let pi_shift = ModeUnitary::phase_shifter(std::f64::consts::PI, arm(2)).unwrap();
        let embedded = pi_shift.embed_into(&[arm(1), arm(2)]).unwrap();
        assert_eq!(embedded.entry(&arm(1), &arm(1)).unwrap(), Amplitude::ONE);
        assert!((embedded.entry(&arm(2), &arm(2)).unwrap() + Amplitude::ONE).norm() < 1e-12);
    }

    #[test]
    fn compose_with_adjoint_is_identity() {
        let u = bs();
        let id = ModeUnitary::compose(&u.adjoint(), &u).unwrap();
        let want = ModeUnitary::identity(vec![arm(1), arm(2)]).unwrap();
        let dev = (id.matrix() - want.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn two_beam_splitters_swap_with_phase() {
        // BS . BS = [[0, i], [i, 0]]: |10> -> i|01>.
        let u = ModeUnitary::compose(&bs(), &bs()).unwrap();
        let out = u.evolve(&ket(&[(1, 1)]), 1).unwrap();
        assert_state(&out, &[(vec![(2, 1)], Amplitude::new(0.0, 1.0))]);
    }

    #[test]
    fn compose_with_identity_is_unchanged() {
        let id = ModeUnitary::identity(vec![arm(1), arm(2)]).unwrap();
        let u = ModeUnitary::compose(&id, &bs()).unwrap();
        assert_eq!(u.matrix(), bs().matrix());
    }

    #[test]
    fn vacuum_is_fixed_by_any_unitary() {
        let vac = StateVector::vacuum([arm(1), arm(2)]);
        let out = bs().evolve(&vac, 2).unwrap();
        assert!(out.approx_eq(&vac, 1e-15));
    }

    #[test]
    fn evolve_rejects_cap_violations() {
        let three = StateVector::basis_state(
            [arm(1), arm(2)],
            FockBasisState::from_occupations([(arm(1), 3)]),
        )
        .unwrap();
        match bs().evolve(&three, 2) {
            Err(OpticsError::PhotonCapExceeded { photons: 3, cap: 2 }) => {}
            other => panic!("expected photon cap error, got {other:?}"),
        }
        assert!(matches!(
            bs().evolve(&three, 9),
            Err(OpticsError::CapTooLarge(9))
        ));
    }

    #[test]
    fn evolve_rejects_universe_mismatch() {
        let state = StateVector::single_photon(arm(1));
        assert!(matches!(
            bs().evolve(&state, 2),
            Err(OpticsError::UniverseMismatch { .. })
        ));
    }

    #[test]
    fn non_unitary_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Amplitude::ONE,
                Amplitude::ONE,
                Amplitude::ZERO,
                Amplitude::ONE,
            ],
        );
        assert!(matches!(
            ModeUnitary::new(vec![arm(1), arm(2)], vec![arm(1), arm(2)], m),
            Err(OpticsError::NotUnitary(_))
        ));
    }

    #[test]
    fn permanent_matches_hand_expansion() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Amplitude::new(1.0, 0.0),
                Amplitude::new(2.0, 0.0),
                Amplitude::new(3.0, 0.0),
                Amplitude::new(4.0, 0.0),
            ],
        );
        // perm = 1*4 + 2*3 = 10.
        assert_eq!(permanent(&m), Amplitude::new(10.0, 0.0));
    }

    #[test]
    fn both_evolution_routes_agree_on_beam_splitter() {
        let u = bs();
        for occ in [vec![(1, 2)], vec![(1, 1), (2, 1)], vec![(2, 2)]] {
            let state = ket(&occ);
            let a = u.evolve(&state, 2).unwrap();
            let b = u.evolve_via_operators(&state, 2).unwrap();
            assert!(a.approx_eq(&b, 1e-12));
        }
    }

    #[test]
    fn unitary_adjoint_round_trip_on_states() {
        let u = bs();
        let state = ket(&[(1, 1), (2, 1)]);
        let there = u.evolve(&state, 2).unwrap();
        let back = u.adjoint().evolve(&there, 2).unwrap();
        assert!(back.approx_eq(&state, 1e-12));
    }
}
