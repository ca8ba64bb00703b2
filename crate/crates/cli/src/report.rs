//! Output documents: a run manifest embedded in every report, plus
//! machine-readable analysis and session records and their human-readable
//! table renderings.
//!
//! Documents are JSON with deterministic field and key order, so identical
//! runs produce byte-identical files. Matrix entries are rounded to 12
//! significant digits.

use std::collections::BTreeMap;

use iqkd_core::analysis::{
    AttackRecord, ConstraintSystem, EveInformation, RobustnessAnalysis, Verdict,
};
use iqkd_core::fock::Amplitude;
use iqkd_core::schemes::SchemeRecord;
use iqkd_core::session::SessionReport;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Everything needed to reproduce a run, embedded in its output.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Canonical argument list that reproduces this run.
    pub command: String,
    pub scheme: Option<String>,
    /// Echo of a scheme override file, when one was used.
    pub scheme_record: Option<SchemeRecord>,
    pub attack: Option<String>,
    /// Echo of a serialized attack, when one was loaded or synthesized.
    pub attack_record: Option<AttackRecord>,
    pub rounds: Option<u64>,
    pub seed: Option<u64>,
    pub basis_probabilities: Option<Vec<f64>>,
    pub detector: String,
    pub photon_cap: u32,
    /// Taken from the IQKD_TIMESTAMP environment variable when set; omitted
    /// otherwise so reruns stay byte-identical.
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: String) -> Self {
        RunManifest {
            tool: "iqkd".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            scheme: None,
            scheme_record: None,
            attack: None,
            attack_record: None,
            rounds: None,
            seed: None,
            basis_probabilities: None,
            detector: "threshold".to_string(),
            photon_cap: 2,
            timestamp: std::env::var("IQKD_TIMESTAMP").ok(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Document<T> {
    pub manifest: RunManifest,
    pub report: T,
}

impl<T: Serialize> Document<T> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types serialize");
        s.push('\n');
        s
    }
}

/// Round to 12 significant digits; keeps report matrices stable across
/// platforms and re-runs.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(11 - magnitude);
    (x * scale).round() / scale
}

pub fn complex_pair(z: Amplitude) -> [f64; 2] {
    [round_sig(z.re), round_sig(z.im)]
}

pub fn matrix_doc(m: &DMatrix<Amplitude>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| complex_pair(m[(r, c)])).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Analysis report
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintRowDoc {
    pub basis: String,
    pub bit: u8,
    pub outcome: String,
    pub class: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum VerdictDoc {
    Robust {
        family: String,
    },
    Nonrobust {
        leak_basis: String,
        eve_bits: f64,
        witness: AttackRecord,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EveInfoRow {
    pub attack: String,
    /// Whether the attack satisfies every zero-error constraint of the
    /// scheme (undetectable).
    pub zero_error: bool,
    pub per_basis: BTreeMap<String, EveInformation>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RayTermDoc {
    pub basis_state: String,
    pub amplitude: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoPhotonRayDoc {
    pub expected_basis: String,
    pub expected_bit: u8,
    pub ray: Vec<RayTermDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransferMatrixDoc {
    pub basis: String,
    pub row_bins: Vec<i32>,
    pub column_modes: Vec<String>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub scheme: SchemeRecord,
    pub channel_bins: Vec<i32>,
    pub irrelevant_bins: BTreeMap<String, Vec<i32>>,
    pub columns: Vec<String>,
    pub constraint_rows: Vec<ConstraintRowDoc>,
    pub constraint_matrix: Vec<Vec<[f64; 2]>>,
    pub transfer_matrices: Vec<TransferMatrixDoc>,
    pub rank: usize,
    pub nullity: usize,
    pub nullspace: Vec<Vec<[f64; 2]>>,
    pub verdict: VerdictDoc,
    pub eve_information: Vec<EveInfoRow>,
    /// Allowed two-photon states per expected state; present at photon cap 2.
    pub two_photon_rays: Option<Vec<TwoPhotonRayDoc>>,
}

pub fn constraint_docs(cs: &ConstraintSystem) -> (Vec<String>, Vec<ConstraintRowDoc>) {
    let columns = cs.columns.iter().map(|c| c.to_string()).collect();
    let rows = cs
        .rows
        .iter()
        .map(|r| ConstraintRowDoc {
            basis: r.basis.to_string(),
            bit: r.bit,
            outcome: r.outcome.to_string(),
            class: r.class.to_string(),
        })
        .collect();
    (columns, rows)
}

pub fn verdict_doc(analysis: &RobustnessAnalysis) -> VerdictDoc {
    match &analysis.verdict {
        Verdict::Robust { family } => VerdictDoc::Robust {
            family: family.clone(),
        },
        Verdict::Nonrobust {
            witness,
            leak_basis,
            eve_bits,
        } => VerdictDoc::Nonrobust {
            leak_basis: leak_basis.to_string(),
            eve_bits: round_sig(*eve_bits),
            witness: witness.to_record(),
        },
    }
}

pub fn analyze_table(report: &AnalyzeReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("scheme: {}\n", report.scheme.name));
    out.push_str(&format!(
        "channel bins: {:?}   constraint columns: {}\n",
        report.channel_bins,
        report.columns.len()
    ));
    for (basis, bins) in &report.irrelevant_bins {
        out.push_str(&format!(
            "  {basis} basis: unreachable input bins {bins:?}\n"
        ));
    }
    out.push_str(&format!(
        "constraints: {} rows, rank {}, nullity {}\n",
        report.constraint_rows.len(),
        report.rank,
        report.nullity
    ));
    match &report.verdict {
        VerdictDoc::Robust { family } => {
            out.push_str("verdict: ROBUST\n");
            out.push_str(&format!("  allowed attacks: {family}\n"));
        }
        VerdictDoc::Nonrobust {
            leak_basis,
            eve_bits,
            ..
        } => {
            out.push_str("verdict: NONROBUST\n");
            out.push_str(&format!(
                "  witness attack leaks {eve_bits} bit(s) per sifted {leak_basis}-round with zero errors\n"
            ));
        }
    }
    out.push_str("eavesdropper information (bits per sifted round):\n");
    out.push_str(&format!("  {:<22} {:>10}", "attack", "zero-err"));
    if let Some(first) = report.eve_information.first() {
        for basis in first.per_basis.keys() {
            out.push_str(&format!(" {basis:>10}"));
        }
    }
    out.push('\n');
    for row in &report.eve_information {
        out.push_str(&format!("  {:<22} {:>10}", row.attack, row.zero_error));
        for info in row.per_basis.values() {
            out.push_str(&format!(" {:>10.4}", info.bits));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Session report
// ---------------------------------------------------------------------------

pub fn session_table(report: &SessionReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<6} {:>9} {:>9} {:>9} {:>8} {:>9} {:>7} {:>9} {:>8}\n",
        "basis", "rounds", "detected", "lost", "lossrate", "sifted", "errors", "qber", "eve-acc"
    ));
    let opt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.5}"),
        None => "-".to_string(),
    };
    for row in &report.per_basis {
        out.push_str(&format!(
            "{:<6} {:>9} {:>9} {:>9} {:>8.5} {:>9} {:>7} {:>9} {:>8}\n",
            row.basis,
            row.rounds,
            row.detected,
            row.lost,
            row.loss_rate,
            row.sifted,
            row.errors,
            opt(row.qber),
            opt(row.eve_accuracy),
        ));
    }
    out.push_str(&format!(
        "rounds {}  sifted {}  sift fraction {:.5}\n",
        report.rounds, report.sifted_total, report.sift_fraction
    ));
    out.push_str(&format!(
        "loss asymmetry across bases: {:.5}{}\n",
        report.loss_asymmetry,
        if report.loss_asymmetry_flagged {
            "  [FLAGGED: basis-dependent loss]"
        } else {
            ""
        }
    ));
    out
}

/// Flat tab-separated export (one row per basis) for external plotting.
pub fn session_tsv(report: &SessionReport) -> String {
    let mut out = String::from(
        "basis\trounds\tdetected\tlost\tinvalid\tloss_rate\tmatched\tsifted\terrors\tqber\t\
         matched_invalid\teffective_qber\teve_accuracy\tmismatched_bit0\tmismatched_bit1\n",
    );
    let opt = |v: Option<f64>| match v {
        Some(x) => format!("{x}"),
        None => "nan".to_string(),
    };
    for r in &report.per_basis {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.basis,
            r.rounds,
            r.detected,
            r.lost,
            r.invalid,
            r.loss_rate,
            r.matched,
            r.sifted,
            r.errors,
            opt(r.qber),
            r.matched_invalid,
            opt(r.effective_qber),
            opt(r.eve_accuracy),
            r.mismatched_bit0,
            r.mismatched_bit1,
        ));
    }
    out
}

/// Flat tab-separated leak table for external plotting.
pub fn eve_info_tsv(rows: &[EveInfoRow]) -> String {
    let mut out = String::from("attack\tzero_error\tbasis\tbits\tguess_probability\n");
    for row in rows {
        for (basis, info) in &row.per_basis {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                row.attack, row.zero_error, basis, info.bits, info.guess_probability
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Scheme catalog
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub record: SchemeRecord,
    pub constraint_columns: usize,
    pub constraint_rows: usize,
    pub channel_bins: Vec<i32>,
}

pub fn catalog_table(summaries: &[SchemeSummary]) -> String {
    let mut out = String::new();
    for s in summaries {
        out.push_str(&format!("{}\n", s.record.name));
        for b in &s.record.bases {
            let setup = match &b.setup {
                iqkd_core::schemes::SetupRecord::MachZehnder { phi } => {
                    format!("interferometer phi={phi:.6}")
                }
                iqkd_core::schemes::SetupRecord::TimeReadout => "time readout".to_string(),
            };
            out.push_str(&format!(
                "  {} basis: {setup}; windows [{}]; bit0 [{}]; bit1 [{}]\n",
                b.basis,
                b.windows.join(","),
                b.bit0_windows.join(","),
                b.bit1_windows.join(","),
            ));
        }
        out.push_str(&format!(
            "  window [{}, {}]; channel bins {:?}; constraint columns {}; constraint rows {}\n",
            s.record.window.0,
            s.record.window.1,
            s.channel_bins,
            s.constraint_columns,
            s.constraint_rows,
        ));
    }
    out
}
