//! `iqkd`: analyzer and session simulator for interferometric time-bin QKD
//! setups.
//!
//! Subcommands:
//! - `list-schemes`: the built-in scheme catalog with windows and outcome
//!   sets;
//! - `analyze <scheme>`: zero-error constraint system, nullspace, and the
//!   robust/nonrobust verdict with a witness attack when one exists;
//! - `simulate <scheme> --attack <spec> --rounds N --seed S`: Monte-Carlo
//!   session with per-basis QBER, loss and eavesdropper-accuracy statistics;
//! - `verify`: run the built-in fixture catalog.
//!
//! Exit codes are stable: 0 success (and robust verdicts), 1 usage or
//! configuration error, 2 fixture failure, 3 nonrobust verdict.
//!
//! Every analyze/simulate run emits a JSON document embedding its manifest;
//! re-running the manifest's command reproduces the document byte for byte.
//! Set `IQKD_OUT_DIR` to give `--out`-less runs a default output directory.

mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use iqkd_core::analysis::{
    build_constraints, canned_attack, check_attack_compatible, eve_information, robustness_verdict,
    two_photon_zero_error_states, AttackIsometry, AttackKind, AttackRecord, ANALYSIS_TOLERANCE,
};
use iqkd_core::interferometer::beta_matrix;
use iqkd_core::schemes::{
    scheme, BasisId, DetectorKind, SchemeDefinition, SchemeName, SchemeRecord,
};
use iqkd_core::session::{run_session, SessionConfig};
use iqkd_core::verify::run_all_fixtures;
use report::{
    analyze_table, catalog_table, constraint_docs, eve_info_tsv, matrix_doc, session_table,
    session_tsv, verdict_doc, AnalyzeReport, Document, EveInfoRow, RayTermDoc, RunManifest,
    SchemeSummary, TransferMatrixDoc, TwoPhotonRayDoc,
};

#[derive(Parser)]
#[command(
    name = "iqkd",
    version,
    about = "Interferometric time-bin QKD analyzer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Print the JSON document to standard output.
    Doc,
    /// Print a human-readable table to standard output.
    Table,
    /// Print a flat tab-separated table for external plotting.
    Tsv,
}

#[derive(Args)]
struct CommonArgs {
    /// Write the JSON document to this path (defaults into IQKD_OUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Standard-output rendering.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Detector capability of the receiver.
    #[arg(long, default_value = "threshold", value_parser = ["threshold", "counter"])]
    detector: String,
    /// Photon-number budget of the analysis (2 adds the two-photon checks).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
    photon_cap: u32,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in schemes with their setups and outcome sets.
    ListSchemes {
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characterize the undetectable attacks on a scheme and classify it.
    Analyze {
        /// Scheme name, or `file:<path>` to a scheme record.
        scheme: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte-Carlo a key-distribution session under an attack channel.
    Simulate {
        /// Scheme name, or `file:<path>` to a scheme record.
        scheme: String,
        /// identity | blocking:<p> | measure-resend:<x|y|z> | fake-time-bin
        /// | file:<path>
        #[arg(long)]
        attack: String,
        #[arg(long)]
        rounds: u64,
        #[arg(long)]
        seed: u64,
        /// Comma-separated per-basis weights (scheme order); uniform when
        /// omitted.
        #[arg(long)]
        basis_probs: Option<String>,
        /// Simulate rounds in parallel (outputs are identical either way).
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the fixture catalog and report pass/fail per anchor.
    Verify,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<i32, String> {
    match command {
        Command::ListSchemes { format, out } => cmd_list_schemes(format, out),
        Command::Analyze { scheme, common } => cmd_analyze(&scheme, &common),
        Command::Simulate {
            scheme,
            attack,
            rounds,
            seed,
            basis_probs,
            parallel,
            common,
        } => cmd_simulate(
            &scheme,
            &attack,
            rounds,
            seed,
            basis_probs,
            parallel,
            &common,
        ),
        Command::Verify => Ok(cmd_verify()),
    }
}

fn load_scheme(
    spec: &str,
    detector: DetectorKind,
) -> Result<(SchemeDefinition, Option<SchemeRecord>), String> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read scheme file {path}: {e}"))?;
        let record: SchemeRecord =
            serde_json::from_str(&text).map_err(|e| format!("bad scheme record: {e}"))?;
        let def = SchemeDefinition::from_record(&record).map_err(|e| e.to_string())?;
        Ok((def, Some(record)))
    } else {
        let name = SchemeName::parse(spec).map_err(|e| e.to_string())?;
        let def = scheme(name, detector).map_err(|e| e.to_string())?;
        Ok((def, None))
    }
}

fn load_attack(spec: &str) -> Result<(AttackIsometry, Option<AttackRecord>), String> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read attack file {path}: {e}"))?;
        let record: AttackRecord =
            serde_json::from_str(&text).map_err(|e| format!("bad attack record: {e}"))?;
        let attack = AttackIsometry::from_record(&record).map_err(|e| e.to_string())?;
        Ok((attack, Some(record)))
    } else {
        let kind = AttackKind::parse(spec).map_err(|e| e.to_string())?;
        let attack = canned_attack(kind).map_err(|e| e.to_string())?;
        Ok((attack, None))
    }
}

/// Default output path under IQKD_OUT_DIR when --out is not given.
fn resolve_out(explicit: &Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    if let Some(path) = explicit {
        return Some(path.clone());
    }
    std::env::var_os("IQKD_OUT_DIR").map(|dir| PathBuf::from(dir).join(default_name))
}

fn write_doc(path: &Option<PathBuf>, json: &str) -> Result<(), String> {
    if let Some(path) = path {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
            }
        }
        std::fs::write(path, json).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        eprintln!("report written to {}", path.display());
    }
    Ok(())
}

fn sanitize(spec: &str) -> String {
    spec.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn cmd_list_schemes(format: OutputFormat, out: Option<PathBuf>) -> Result<i32, String> {
    let mut summaries = Vec::new();
    for name in SchemeName::all() {
        let def = scheme(name, DetectorKind::Threshold).map_err(|e| e.to_string())?;
        let cs = build_constraints(&def).map_err(|e| e.to_string())?;
        summaries.push(SchemeSummary {
            record: def.to_record(),
            constraint_columns: cs.columns.len(),
            constraint_rows: cs.rows.len(),
            channel_bins: cs.channel_bins,
        });
    }
    let manifest = RunManifest::new("list-schemes".to_string());
    let doc = Document {
        manifest,
        report: summaries,
    };
    let json = doc.to_json();
    write_doc(&resolve_out(&out, "list-schemes.json"), &json)?;
    match format {
        OutputFormat::Doc => print!("{json}"),
        OutputFormat::Table | OutputFormat::Tsv => print!("{}", catalog_table(&doc.report)),
    }
    Ok(0)
}

/// Canned attack table scored against one scheme.
fn eve_information_table(def: &SchemeDefinition) -> Result<Vec<EveInfoRow>, String> {
    let cs = build_constraints(def).map_err(|e| e.to_string())?;
    let mut kinds = vec![AttackKind::Identity, AttackKind::Blocking(0.5)];
    kinds.extend([BasisId::X, BasisId::Y, BasisId::Z].map(AttackKind::MeasureResend));
    kinds.push(AttackKind::FakeTimeBin);
    let mut rows = Vec::new();
    for kind in kinds {
        let attack = canned_attack(kind).map_err(|e| e.to_string())?;
        if check_attack_compatible(&attack, def).is_err() {
            continue;
        }
        let mut per_basis = BTreeMap::new();
        for arm in &def.arms {
            let info = eve_information(&attack, def, arm.basis).map_err(|e| e.to_string())?;
            per_basis.insert(arm.basis.to_string(), info);
        }
        rows.push(EveInfoRow {
            attack: attack.name.clone(),
            zero_error: attack.zero_error_residual(&cs) < ANALYSIS_TOLERANCE,
            per_basis,
        });
    }
    Ok(rows)
}

fn two_photon_rays(def: &SchemeDefinition) -> Vec<TwoPhotonRayDoc> {
    let mut rays = Vec::new();
    for state in &def.alphabet {
        if state.basis == BasisId::Z {
            continue;
        }
        let Ok(ray) = two_photon_zero_error_states(state, def) else {
            continue;
        };
        rays.push(TwoPhotonRayDoc {
            expected_basis: state.basis.to_string(),
            expected_bit: state.bit,
            ray: ray
                .terms()
                .map(|(basis, amp)| RayTermDoc {
                    basis_state: basis.to_string(),
                    amplitude: report::complex_pair(amp),
                })
                .collect(),
        });
    }
    rays
}

fn cmd_analyze(scheme_spec: &str, common: &CommonArgs) -> Result<i32, String> {
    let detector = DetectorKind::parse(&common.detector).map_err(|e| e.to_string())?;
    let (def, record_echo) = load_scheme(scheme_spec, detector)?;
    let analysis = robustness_verdict(&def).map_err(|e| e.to_string())?;
    let (columns, constraint_rows) = constraint_docs(&analysis.constraints);

    let mut transfer_matrices = Vec::new();
    for arm in &def.arms {
        let windows: Vec<_> = arm.model.windows().iter().cloned().collect();
        let beta = beta_matrix(&arm.setup, &analysis.constraints.channel_bins, &windows)
            .map_err(|e| e.to_string())?;
        transfer_matrices.push(TransferMatrixDoc {
            basis: arm.basis.to_string(),
            row_bins: analysis.constraints.channel_bins.clone(),
            column_modes: windows.iter().map(|m| m.to_string()).collect(),
            entries: matrix_doc(&beta),
        });
    }

    let nullspace = analysis
        .space
        .basis
        .iter()
        .map(|v| v.iter().map(|z| report::complex_pair(*z)).collect())
        .collect();
    let verdict = verdict_doc(&analysis);
    let robust = analysis.verdict.is_robust();
    let report = AnalyzeReport {
        scheme: def.to_record(),
        channel_bins: analysis.constraints.channel_bins.clone(),
        irrelevant_bins: analysis
            .constraints
            .irrelevant_bins
            .iter()
            .map(|(b, bins)| (b.to_string(), bins.clone()))
            .collect(),
        columns,
        constraint_rows,
        constraint_matrix: matrix_doc(&analysis.constraints.matrix),
        transfer_matrices,
        rank: analysis.space.rank,
        nullity: analysis.space.nullity,
        nullspace,
        verdict,
        eve_information: eve_information_table(&def)?,
        two_photon_rays: (common.photon_cap >= 2).then(|| two_photon_rays(&def)),
    };

    let mut manifest = RunManifest::new(format!(
        "analyze {scheme_spec} --detector {} --photon-cap {}",
        common.detector, common.photon_cap
    ));
    manifest.scheme = Some(def.name.clone());
    manifest.scheme_record = record_echo;
    manifest.detector = common.detector.clone();
    manifest.photon_cap = common.photon_cap;
    let doc = Document { manifest, report };
    let json = doc.to_json();
    write_doc(
        &resolve_out(
            &common.out,
            &format!("analyze-{}.json", sanitize(&def.name)),
        ),
        &json,
    )?;
    match common.format {
        OutputFormat::Doc => print!("{json}"),
        OutputFormat::Table => print!("{}", analyze_table(&doc.report)),
        OutputFormat::Tsv => print!("{}", eve_info_tsv(&doc.report.eve_information)),
    }
    Ok(if robust { 0 } else { 3 })
}

fn parse_basis_probs(spec: &Option<String>) -> Result<Option<Vec<f64>>, String> {
    match spec {
        None => Ok(None),
        Some(s) => {
            let probs: Vec<f64> = s
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| format!("bad weight {x:?}")))
                .collect::<Result<_, _>>()?;
            Ok(Some(probs))
        }
    }
}

fn cmd_simulate(
    scheme_spec: &str,
    attack_spec: &str,
    rounds: u64,
    seed: u64,
    basis_probs: Option<String>,
    parallel: bool,
    common: &CommonArgs,
) -> Result<i32, String> {
    let detector = DetectorKind::parse(&common.detector).map_err(|e| e.to_string())?;
    let (def, scheme_echo) = load_scheme(scheme_spec, detector)?;
    let (attack, attack_echo) = load_attack(attack_spec)?;
    let probs = parse_basis_probs(&basis_probs)?;
    let config = SessionConfig {
        rounds,
        seed,
        basis_probabilities: probs.clone(),
        parallel,
    };
    let session = run_session(&def, Some(&attack), &config).map_err(|e| e.to_string())?;

    let mut command = format!(
        "simulate {scheme_spec} --attack {attack_spec} --rounds {rounds} --seed {seed} \
         --detector {} --photon-cap {}",
        common.detector, common.photon_cap
    );
    if let Some(bp) = &basis_probs {
        command.push_str(&format!(" --basis-probs {bp}"));
    }
    let mut manifest = RunManifest::new(command);
    manifest.scheme = Some(def.name.clone());
    manifest.scheme_record = scheme_echo;
    manifest.attack = Some(attack_spec.to_string());
    manifest.attack_record = Some(attack_echo.unwrap_or_else(|| attack.to_record()));
    manifest.rounds = Some(rounds);
    manifest.seed = Some(seed);
    manifest.basis_probabilities = probs;
    manifest.detector = common.detector.clone();
    manifest.photon_cap = common.photon_cap;
    let doc = Document {
        manifest,
        report: session,
    };
    let json = doc.to_json();
    let default_name = format!(
        "simulate-{}-{}-r{rounds}-s{seed}.json",
        sanitize(&def.name),
        sanitize(attack_spec)
    );
    write_doc(&resolve_out(&common.out, &default_name), &json)?;
    match common.format {
        OutputFormat::Doc => print!("{json}"),
        OutputFormat::Table => print!("{}", session_table(&doc.report)),
        OutputFormat::Tsv => print!("{}", session_tsv(&doc.report)),
    }
    Ok(0)
}

fn cmd_verify() -> i32 {
    let reports = run_all_fixtures();
    let mut failures = 0;
    for r in &reports {
        if r.passed {
            if r.detail.is_empty() {
                println!("PASS  {}", r.anchor);
            } else {
                println!("PASS  {}  (note: {})", r.anchor, r.detail);
            }
        } else {
            failures += 1;
            println!("FAIL  {}: {}", r.anchor, r.detail);
        }
    }
    if failures == 0 {
        println!("all {} fixtures passed", reports.len());
        0
    } else {
        println!("{failures} of {} fixtures failed", reports.len());
        2
    }
}
