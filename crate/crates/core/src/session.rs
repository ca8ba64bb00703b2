//! Monte-Carlo simulation of full key-distribution sessions under a chosen
//! attack channel.
//!
//! Each round samples the sender's basis and bit and the receiver's basis,
//! pushes the (possibly attacked) transmission through the receiver setup,
//! samples a detector outcome from the Born-rule distribution, and applies
//! the scheme's outcome interpretation. Rounds with matching bases and a
//! conclusive outcome are sifted; on those the eavesdropper guesses the bit
//! with her optimal (Helstrom) measurement of the kept ancilla.
//!
//! Determinism: every round draws from its own stream, keyed by (seed, round
//! index), and the aggregation is order-insensitive integer accumulation, so
//! parallel and serial execution produce identical reports.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    attacked_amplitudes, check_attack_compatible, helstrom_guess_operator, AnalysisError,
    AttackIsometry, LOSS_ASYMMETRY_FLAG,
};
use crate::fock::Amplitude;
use crate::schemes::{
    detection_distribution, interpret, Outcome, OutcomePattern, SchemeDefinition, SchemeError,
};

/// Outcome probabilities below this are clamped to exact zero before
/// sampling: the zero-error claims are exact-zero claims, and numerical dust
/// must not manufacture phantom errors.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("basis probabilities must be positive and sum to 1: {0}")]
    BadBasisWeights(String),
    #[error("outcome distribution sums to {0}, expected 1")]
    MalformedDistribution(f64),
    #[error("session needs at least one round")]
    NoRounds,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Simulation parameters. The attack channel itself is passed separately.
#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub rounds: u64,
    pub seed: u64,
    /// Per-arm basis weights in scheme order; uniform when None.
    pub basis_probabilities: Option<Vec<f64>>,
    /// Simulate rounds in parallel. Reports are identical either way.
    pub parallel: bool,
}

impl SessionConfig {
    pub fn new(rounds: u64, seed: u64) -> Self {
        Self {
            rounds,
            seed,
            basis_probabilities: None,
            parallel: false,
        }
    }
}

/// Per-basis tallies, keyed by the basis the receiver measured.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BasisRow {
    pub basis: String,
    /// Rounds in which the receiver used this basis.
    pub rounds: u64,
    pub detected: u64,
    pub lost: u64,
    pub invalid: u64,
    pub loss_rate: f64,
    /// Rounds in which the sender happened to pick the same basis.
    pub matched: u64,
    /// Matched-basis conclusive rounds.
    pub sifted: u64,
    pub errors: u64,
    /// Errors per sifted round; absent when nothing was sifted.
    pub qber: Option<f64>,
    /// Invalid outcomes on matched-basis rounds, also folded into the
    /// effective error columns: an invalid outcome must be read as an error.
    pub matched_invalid: u64,
    pub effective_errors: u64,
    pub effective_qber: Option<f64>,
    /// Correct eavesdropper guesses on sifted rounds; absent without an
    /// attack.
    pub eve_correct: Option<u64>,
    pub eve_accuracy: Option<f64>,
    /// Conclusive outcomes on mismatched-basis rounds, by read bit.
    pub mismatched_bit0: u64,
    pub mismatched_bit1: u64,
    /// Eavesdropper guesses on mismatched conclusive rounds. Recorded for
    /// completeness but excluded from the headline accuracy: sifting
    /// discards these rounds from the key.
    pub eve_correct_mismatched: Option<u64>,
    pub eve_accuracy_mismatched: Option<f64>,
}

/// Aggregated session statistics.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SessionReport {
    pub rounds: u64,
    pub per_basis: Vec<BasisRow>,
    pub sifted_total: u64,
    pub sift_fraction: f64,
    /// Spread between the largest and smallest per-basis loss rate.
    pub loss_asymmetry: f64,
    /// Basis-dependent loss above the flag threshold is a signature of
    /// attacks that trade losses for information.
    pub loss_asymmetry_flagged: bool,
}

/// Inverse-CDF sampling over patterns in canonical order. `u` must lie in
/// `[0, 1)`; any trailing numerical dust falls back to the first pattern.
pub fn sample_outcome(
    dist: &BTreeMap<OutcomePattern, f64>,
    u: f64,
) -> Result<&OutcomePattern, SessionError> {
    let total: f64 = dist.values().sum();
    if (total - 1.0).abs() > 1e-9 || dist.is_empty() {
        return Err(SessionError::MalformedDistribution(total));
    }
    let mut acc = 0.0;
    for (pattern, p) in dist {
        acc += p;
        if u < acc {
            return Ok(pattern);
        }
    }
    Ok(dist.keys().next().expect("nonempty distribution"))
}

/// One prepared outcome entry for a (sender state, receiver arm) pair.
#[derive(Clone, Debug)]
struct PreparedEntry {
    class: Outcome,
    bit: Option<u8>,
    probability: f64,
    /// Probability that the eavesdropper's optimal measurement answers
    /// "bit 0" given this outcome, on matched-basis rounds.
    eve_guess0: Option<f64>,
}

#[derive(Clone, Debug)]
struct PreparedDistribution {
    entries: Vec<PreparedEntry>,
    total: f64,
}

impl PreparedDistribution {
    fn sample(&self, u: f64) -> &PreparedEntry {
        let mut acc = 0.0;
        for e in &self.entries {
            acc += e.probability;
            if u * self.total < acc {
                return e;
            }
        }
        &self.entries[0]
    }
}

fn clamp(p: f64) -> f64 {
    if p < PROBABILITY_CLAMP {
        0.0
    } else {
        p
    }
}

fn outcome_bit(class: Outcome) -> Option<u8> {
    match class {
        Outcome::Bit0 => Some(0),
        Outcome::Bit1 => Some(1),
        Outcome::Loss | Outcome::Invalid => None,
    }
}

/// Precomputed tables: distributions for every (sender arm, bit, receiver
/// arm) triple, with eavesdropper guess probabilities on the diagonal.
struct SessionTables {
    weights_cdf: Vec<f64>,
    arm_count: usize,
    basis_names: Vec<String>,
    /// Indexed `[alice_arm][bit][bob_arm]`.
    dists: Vec<Vec<[PreparedDistribution; 2]>>,
    has_attack: bool,
}

fn build_tables(
    scheme: &SchemeDefinition,
    attack: Option<&AttackIsometry>,
    config: &SessionConfig,
) -> Result<SessionTables, SessionError> {
    let arm_count = scheme.arms.len();
    let weights = match &config.basis_probabilities {
        Some(w) => {
            if w.len() != arm_count {
                return Err(SessionError::BadBasisWeights(format!(
                    "{} weights for {arm_count} bases",
                    w.len()
                )));
            }
            if w.iter().any(|x| *x <= 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(SessionError::BadBasisWeights(format!("{w:?}")));
            }
            w.clone()
        }
        None => vec![1.0 / arm_count as f64; arm_count],
    };
    let mut weights_cdf = Vec::with_capacity(arm_count);
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        weights_cdf.push(acc);
    }

    if let Some(attack) = attack {
        check_attack_compatible(attack, scheme)?;
    }

    // Helstrom operators per receiver arm (matched-basis guessing).
    let guess_ops: Vec<Option<DMatrix<Amplitude>>> = scheme
        .arms
        .iter()
        .map(|arm| match attack {
            Some(a) => helstrom_guess_operator(a, scheme, arm.basis).map(Some),
            None => Ok(None),
        })
        .collect::<Result<_, _>>()?;

    let mut dists: Vec<Vec<[PreparedDistribution; 2]>> = Vec::with_capacity(arm_count);
    for (a_idx, alice_arm) in scheme.arms.iter().enumerate() {
        let mut per_bob = Vec::with_capacity(arm_count);
        for bob_arm in &scheme.arms {
            let mut pair: Vec<PreparedDistribution> = Vec::with_capacity(2);
            for bit in [0u8, 1] {
                let state = scheme.state(alice_arm.basis, bit)?;
                let dist = match attack {
                    None => {
                        let raw = detection_distribution(state, &bob_arm.setup, &bob_arm.model)?;
                        let mut entries = Vec::new();
                        let mut total = 0.0;
                        for (pattern, p) in &raw {
                            let p = clamp(*p);
                            if p == 0.0 && !pattern.is_empty() {
                                continue;
                            }
                            let class = interpret(pattern, &bob_arm.model)?;
                            total += p;
                            entries.push(PreparedEntry {
                                class,
                                bit: outcome_bit(class),
                                probability: p,
                                eve_guess0: None,
                            });
                        }
                        PreparedDistribution { entries, total }
                    }
                    Some(attack) => {
                        let image = attacked_amplitudes(attack, state, bob_arm)?;
                        let mut entries = Vec::new();
                        let mut loss_p = image.vacuum_vector.norm_squared();
                        let mut total = 0.0;
                        for (mode, w) in &image.output_vectors {
                            let p = w.norm_squared();
                            if !bob_arm.model.windows().contains(mode) {
                                loss_p += p;
                                continue;
                            }
                            let p = clamp(p);
                            if p == 0.0 {
                                continue;
                            }
                            let pattern = OutcomePattern::single(mode.clone());
                            let class = interpret(&pattern, &bob_arm.model)?;
                            // The guess operator follows the sender's basis
                            // (announced before the eavesdropper measures).
                            let eve_guess0 = guess_ops[a_idx].as_ref().map(|m0| {
                                let psi = w / Amplitude::from(p.sqrt());
                                psi.dotc(&(m0 * &psi)).re.clamp(0.0, 1.0)
                            });
                            total += p;
                            entries.push(PreparedEntry {
                                class,
                                bit: outcome_bit(class),
                                probability: p,
                                eve_guess0,
                            });
                        }
                        let loss_p = clamp(loss_p);
                        total += loss_p;
                        entries.insert(
                            0,
                            PreparedEntry {
                                class: Outcome::Loss,
                                bit: None,
                                probability: loss_p,
                                eve_guess0: None,
                            },
                        );
                        PreparedDistribution { entries, total }
                    }
                };
                if (dist.total - 1.0).abs() > 1e-9 {
                    return Err(SessionError::MalformedDistribution(dist.total));
                }
                pair.push(dist);
            }
            let [d0, d1]: [PreparedDistribution; 2] = pair.try_into().expect("two bits prepared");
            per_bob.push([d0, d1]);
        }
        dists.push(per_bob);
    }

    Ok(SessionTables {
        weights_cdf,
        arm_count,
        basis_names: scheme.arms.iter().map(|a| a.basis.to_string()).collect(),
        dists,
        has_attack: attack.is_some(),
    })
}

#[derive(Clone, Debug, Default)]
struct ArmTally {
    rounds: u64,
    detected: u64,
    lost: u64,
    invalid: u64,
    matched: u64,
    sifted: u64,
    errors: u64,
    matched_invalid: u64,
    eve_correct: u64,
    mismatched_bit0: u64,
    mismatched_bit1: u64,
    eve_correct_mismatched: u64,
}

impl ArmTally {
    fn merge(&mut self, other: &ArmTally) {
        self.rounds += other.rounds;
        self.detected += other.detected;
        self.lost += other.lost;
        self.invalid += other.invalid;
        self.matched += other.matched;
        self.sifted += other.sifted;
        self.errors += other.errors;
        self.matched_invalid += other.matched_invalid;
        self.eve_correct += other.eve_correct;
        self.mismatched_bit0 += other.mismatched_bit0;
        self.mismatched_bit1 += other.mismatched_bit1;
        self.eve_correct_mismatched += other.eve_correct_mismatched;
    }
}

fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    // Counter-based stream: the key is literally (seed, round index).
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&round.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.iter()
        .position(|&edge| u < edge)
        .unwrap_or(cdf.len() - 1)
}

fn one_round(tables: &SessionTables, seed: u64, round: u64, tally: &mut [ArmTally]) {
    let mut rng = round_rng(seed, round);
    let u_alice: f64 = rng.random();
    let u_bit: f64 = rng.random();
    let u_bob: f64 = rng.random();
    let u_outcome: f64 = rng.random();

    let a_idx = pick(&tables.weights_cdf, u_alice);
    let bit: u8 = if u_bit < 0.5 { 0 } else { 1 };
    let b_idx = pick(&tables.weights_cdf, u_bob);
    let entry = tables.dists[a_idx][b_idx][bit as usize].sample(u_outcome);

    let t = &mut tally[b_idx];
    t.rounds += 1;
    match entry.class {
        Outcome::Loss => t.lost += 1,
        Outcome::Invalid => t.invalid += 1,
        Outcome::Bit0 | Outcome::Bit1 => t.detected += 1,
    }
    if a_idx == b_idx {
        t.matched += 1;
        match entry.bit {
            Some(read) => {
                t.sifted += 1;
                if read != bit {
                    t.errors += 1;
                }
                if let Some(g0) = entry.eve_guess0 {
                    let u_guess: f64 = rng.random();
                    let guess: u8 = if u_guess < g0 { 0 } else { 1 };
                    if guess == bit {
                        t.eve_correct += 1;
                    }
                }
            }
            None => {
                if entry.class == Outcome::Invalid {
                    t.matched_invalid += 1;
                }
            }
        }
    } else if let Some(read) = entry.bit {
        if read == 0 {
            t.mismatched_bit0 += 1;
        } else {
            t.mismatched_bit1 += 1;
        }
        if let Some(g0) = entry.eve_guess0 {
            let u_guess: f64 = rng.random();
            let guess: u8 = if u_guess < g0 { 0 } else { 1 };
            if guess == bit {
                t.eve_correct_mismatched += 1;
            }
        }
    }
}

/// Run a full session. Identical configurations (seed included) produce
/// identical reports, in serial or parallel execution.
pub fn run_session(
    scheme: &SchemeDefinition,
    attack: Option<&AttackIsometry>,
    config: &SessionConfig,
) -> Result<SessionReport, SessionError> {
    if config.rounds == 0 {
        return Err(SessionError::NoRounds);
    }
    let tables = build_tables(scheme, attack, config)?;
    let empty = || vec![ArmTally::default(); tables.arm_count];
    let merge = |mut a: Vec<ArmTally>, b: Vec<ArmTally>| {
        for (x, y) in a.iter_mut().zip(&b) {
            x.merge(y);
        }
        a
    };

    let tallies = if config.parallel {
        (0..config.rounds)
            .into_par_iter()
            .fold(empty, |mut acc, round| {
                one_round(&tables, config.seed, round, &mut acc);
                acc
            })
            .reduce(empty, merge)
    } else {
        let mut acc = empty();
        for round in 0..config.rounds {
            one_round(&tables, config.seed, round, &mut acc);
        }
        acc
    };

    let ratio = |num: u64, den: u64| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let per_basis: Vec<BasisRow> = tallies
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let effective_errors = t.errors + t.matched_invalid;
            BasisRow {
                basis: tables.basis_names[i].clone(),
                rounds: t.rounds,
                detected: t.detected,
                lost: t.lost,
                invalid: t.invalid,
                loss_rate: ratio(t.lost, t.rounds).unwrap_or(0.0),
                matched: t.matched,
                sifted: t.sifted,
                errors: t.errors,
                qber: ratio(t.errors, t.sifted),
                matched_invalid: t.matched_invalid,
                effective_errors,
                effective_qber: ratio(effective_errors, t.sifted + t.matched_invalid),
                eve_correct: tables.has_attack.then_some(t.eve_correct),
                eve_accuracy: if tables.has_attack {
                    ratio(t.eve_correct, t.sifted)
                } else {
                    None
                },
                mismatched_bit0: t.mismatched_bit0,
                mismatched_bit1: t.mismatched_bit1,
                eve_correct_mismatched: tables.has_attack.then_some(t.eve_correct_mismatched),
                eve_accuracy_mismatched: if tables.has_attack {
                    ratio(
                        t.eve_correct_mismatched,
                        t.mismatched_bit0 + t.mismatched_bit1,
                    )
                } else {
                    None
                },
            }
        })
        .collect();

    let sifted_total: u64 = per_basis.iter().map(|r| r.sifted).sum();
    let loss_rates: Vec<f64> = per_basis.iter().map(|r| r.loss_rate).collect();
    let loss_asymmetry = loss_rates.iter().cloned().fold(0.0f64, f64::max)
        - loss_rates.iter().cloned().fold(1.0f64, f64::min);
    Ok(SessionReport {
        rounds: config.rounds,
        per_basis,
        sifted_total,
        sift_fraction: sifted_total as f64 / config.rounds as f64,
        loss_asymmetry,
        loss_asymmetry_flagged: loss_asymmetry > LOSS_ASYMMETRY_FLAG,
    })
}
