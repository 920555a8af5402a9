//! `bellcert` — certification reports for two-qubit correlation experiments.
//!
//! Subcommands:
//!
//! * `report` — recompute the full table of certified quantities for the
//!   built-in scenarios and compare each against its reference value; any
//!   deviation fails the run.
//! * `bounds <scenario> <local|pnc|quantum>` — classical bounds with their
//!   extremal certificates, or the quantum maximum cross-checked three ways.
//! * `steering <scenario> <trine_form|linear_form>` — normalized steering
//!   functional values against the hidden-state ceiling of 1.
//! * `jm <trine|orthogonal|FILE> [--precision]` — critical sharpness below
//!   which one side's observables become jointly measurable.
//! * `scan <scenario> [--side --from --to --steps]` — quantum value as a
//!   function of detector sharpness against the constant classical bounds,
//!   with rows inserted at the bound crossings.
//!
//! A scenario argument is a built-in name first, otherwise a path to a JSON
//! scenario file. Exit status: 0 on success, 1 when a computation or
//! reference comparison fails, 2 on usage errors.

mod output;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bellcert_core::algebra::{herm_eigen, BlochVec, CMat};
use bellcert_core::bell;
use bellcert_core::bounds::{self, BoundModel};
use bellcert_core::format::load_scenario;
use bellcert_core::jm;
use bellcert_core::scenario::{builtin_names, builtin_scenario, smear, Scenario, Side};
use bellcert_core::steering::{self, SteeringForm};
use bellcert_core::Error as CoreError;

use output::{fmt_sig, verdict, Format, Report, Row, ScanReport, ScanRow};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Parser)]
#[command(
    name = "bellcert",
    version,
    about = "Certification toolkit for two-qubit correlation experiments"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Tolerance for verdict comparisons.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute every certified quantity and check it against its reference.
    Report {
        /// Perturb the named row by +0.1 before the comparison (self-test
        /// hook for the failure path).
        #[arg(long, hide = true)]
        corrupt_row: Option<String>,
    },
    /// Classical bounds or the quantum maximum of a scenario's functional.
    Bounds {
        /// Built-in scenario name or path to a scenario file.
        scenario: String,
        /// Which bound to compute.
        #[arg(value_enum)]
        model: BoundArg,
        /// Restarts for the see-saw search (quantum only).
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Steering functional value against the hidden-state ceiling.
    Steering {
        /// Built-in scenario name or path to a scenario file.
        scenario: String,
        /// Which normalized functional to evaluate.
        #[arg(value_enum)]
        form: FormArg,
    },
    /// Critical sharpness for joint measurability of an axis family.
    Jm {
        /// `trine`, `orthogonal`, or a scenario file whose first-party axes
        /// are used.
        family: String,
        /// Bisection stopping width.
        #[arg(long, default_value_t = 1e-4)]
        precision: f64,
    },
    /// Sharpness scan of the quantum value against the classical bounds.
    Scan {
        /// Built-in scenario name or path to a scenario file (needs at least
        /// one functional relation).
        scenario: String,
        /// Which side's observables are smeared.
        #[arg(long, value_enum, default_value_t = SideArg::Alice)]
        side: SideArg,
        /// Lower end of the sharpness range.
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        /// Upper end of the sharpness range.
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        /// Number of uniform intervals between `from` and `to`.
        #[arg(long, default_value_t = 12)]
        steps: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum BoundArg {
    Local,
    Pnc,
    Quantum,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormArg {
    #[value(name = "trine_form")]
    TrineForm,
    #[value(name = "linear_form")]
    LinearForm,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SideArg {
    Alice,
    Bob,
}

/// Failure classes with their exit codes: `Usage` exits 2, the others exit 1.
/// `Check` still prints the rendered report before failing.
enum Failure {
    Usage(String),
    Run(String),
    Check { rendered: String, message: String },
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Run(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(rendered) => {
            print!("{rendered}");
            ExitCode::SUCCESS
        }
        Err(Failure::Check { rendered, message }) => {
            print!("{rendered}");
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Run(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Report { corrupt_row } => cmd_report(cli, corrupt_row.as_deref()),
        Command::Bounds {
            scenario,
            model,
            restarts,
        } => cmd_bounds(cli, scenario, *model, *restarts),
        Command::Steering { scenario, form } => cmd_steering(cli, scenario, *form),
        Command::Jm { family, precision } => cmd_jm(cli, family, *precision),
        Command::Scan {
            scenario,
            side,
            from,
            to,
            steps,
        } => cmd_scan(cli, scenario, *side, *from, *to, *steps),
    }
}

/// Resolves a scenario argument: built-in name first, then a file path.
fn resolve_scenario(arg: &str) -> CliResult<(Scenario, String)> {
    if builtin_names().contains(&arg) {
        return Ok((builtin_scenario(arg)?, arg.to_string()));
    }
    let path = std::path::Path::new(arg);
    if path.exists() {
        let text =
            fs::read_to_string(path).map_err(|e| Failure::Run(format!("cannot read `{arg}`: {e}")))?;
        let scenario = load_scenario(&text)?;
        let name = path
            .file_stem()
            .map_or_else(|| arg.to_string(), |stem| stem.to_string_lossy().into_owned());
        return Ok((scenario, name));
    }
    Err(Failure::Run(format!(
        "unknown scenario `{arg}`: not one of the built-ins ({}) and not a readable file",
        builtin_names().join(", ")
    )))
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn cmd_report(cli: &Cli, corrupt: Option<&str>) -> CliResult<String> {
    let trine = builtin_scenario("trine_delta3")?;
    let elegant = builtin_scenario("elegant_b3")?;

    let trine_axes: Vec<BlochVec> = trine.alice().iter().map(|o| o.axis()).collect();

    // (quantity, value, reference, relaxed tolerance for bisection rows)
    let mut entries: Vec<(&'static str, f64, f64, bool)> = vec![
        (
            "trine_delta3_local_bound",
            bounds::local_bound(trine.coeffs())?.bound,
            5.0,
            false,
        ),
        (
            "trine_delta3_pnc_bound",
            bounds::pnc_bound(trine.coeffs(), trine.relations())?.bound,
            4.0,
            false,
        ),
        (
            "trine_delta3_quantum_max",
            bell::quantum_max_fixed_measurements(&trine)?,
            6.0,
            false,
        ),
        (
            "elegant_b3_local_bound",
            bounds::local_bound(elegant.coeffs())?.bound,
            6.0,
            false,
        ),
        (
            "elegant_b3_pnc_bound",
            bounds::pnc_bound(elegant.coeffs(), elegant.relations())?.bound,
            4.0,
            false,
        ),
        (
            "elegant_b3_quantum_max",
            bell::quantum_max_fixed_measurements(&elegant)?,
            4.0 * SQRT3,
            false,
        ),
        (
            "trine_delta3_steering_value",
            steering::steering_value(&trine, SteeringForm::TrineForm)?,
            1.5,
            false,
        ),
        (
            "elegant_b3_steering_value",
            steering::steering_value(&elegant, SteeringForm::LinearForm)?,
            SQRT3,
            false,
        ),
        (
            "trine_delta3_critical_eta_local",
            jm::critical_eta_from_bounds(&trine, BoundModel::Local)?.critical_eta,
            5.0 / 6.0,
            false,
        ),
        (
            "trine_delta3_critical_eta_pnc",
            jm::critical_eta_from_bounds(&trine, BoundModel::Pnc)?.critical_eta,
            2.0 / 3.0,
            false,
        ),
        (
            "elegant_b3_critical_eta_local",
            jm::critical_eta_from_bounds(&elegant, BoundModel::Local)?.critical_eta,
            SQRT3 / 2.0,
            false,
        ),
        (
            "elegant_b3_critical_eta_pnc",
            jm::critical_eta_from_bounds(&elegant, BoundModel::Pnc)?.critical_eta,
            1.0 / SQRT3,
            false,
        ),
        (
            "jm_threshold_trine",
            jm::jm_threshold(&trine_axes, 1e-4)?.critical_eta,
            2.0 / 3.0,
            true,
        ),
        (
            "jm_threshold_orthogonal",
            jm::jm_threshold(&orthogonal_axes(), 1e-4)?.critical_eta,
            1.0 / SQRT3,
            true,
        ),
    ];

    if let Some(label) = corrupt {
        let entry = entries
            .iter_mut()
            .find(|(quantity, ..)| *quantity == label)
            .ok_or_else(|| Failure::Usage(format!("no report row named `{label}`")))?;
        entry.1 += 0.1;
    }

    let rows: Vec<Row> = entries
        .into_iter()
        .map(|(quantity, value, reference, relaxed)| {
            let tol = if relaxed { cli.tol.max(2e-4) } else { cli.tol };
            Row {
                quantity: quantity.into(),
                value,
                reference: Some(reference),
                verdict: verdict(value, reference, tol).into(),
            }
        })
        .collect();

    let report = Report {
        scenario: "builtin_suite".into(),
        rows,
        extras: None,
    };
    let rendered = report.render(cli.format);
    if let Some(bad) = report.rows.iter().find(|r| r.verdict != "equals") {
        return Err(Failure::Check {
            rendered,
            message: format!(
                "report row `{}` deviates from its reference: {} vs {}",
                bad.quantity,
                fmt_sig(bad.value),
                fmt_sig(bad.reference.unwrap_or(f64::NAN)),
            ),
        });
    }
    Ok(rendered)
}

fn orthogonal_axes() -> Vec<BlochVec> {
    vec![
        BlochVec::new(1.0, 0.0, 0.0),
        BlochVec::new(0.0, 1.0, 0.0),
        BlochVec::new(0.0, 0.0, 1.0),
    ]
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

fn cmd_bounds(cli: &Cli, scenario_arg: &str, model: BoundArg, restarts: usize) -> CliResult<String> {
    let (s, name) = resolve_scenario(scenario_arg)?;
    let tol = cli.tol.max(1e-9);
    let (rows, extras) = match model {
        BoundArg::Local => {
            let cert = bounds::local_bound(s.coeffs())?;
            let replay = cert.re_evaluate(s.coeffs());
            let rows = vec![Row {
                quantity: "local_bound".into(),
                value: cert.bound,
                reference: Some(replay),
                verdict: verdict(cert.bound, replay, tol).into(),
            }];
            (rows, Some(serde_json::json!({ "certificate": cert })))
        }
        BoundArg::Pnc => {
            if s.relations().is_empty() {
                return Err(Failure::Usage(
                    "the preparation-noncontextual bound needs at least one functional \
                     relation; this scenario declares none"
                        .into(),
                ));
            }
            let cert = bounds::pnc_bound(s.coeffs(), s.relations())?;
            let replay = cert.re_evaluate(s.coeffs());
            let rows = vec![Row {
                quantity: "pnc_bound".into(),
                value: cert.bound,
                reference: Some(replay),
                verdict: verdict(cert.bound, replay, tol).into(),
            }];
            (rows, Some(serde_json::json!({ "certificate": cert })))
        }
        BoundArg::Quantum => {
            if restarts == 0 {
                return Err(Failure::Usage("--restarts must be at least 1".into()));
            }
            let lambda = bell::quantum_max_fixed_measurements(&s)?;
            // Independent route: evaluate the functional on the operator's
            // top eigenstate.
            let operator = bell::bell_operator(&s)?;
            let eig = herm_eigen(&operator)?;
            let top = CMat::outer(&eig.vector(3)).map_err(Failure::from)?;
            let replay = bell::evaluate(&s.with_state(top)?)?.value;
            let seesaw = bell::seesaw_max(s.coeffs(), restarts, cli.seed)?;
            let rows = vec![
                Row {
                    quantity: "lambda_max".into(),
                    value: lambda,
                    reference: Some(replay),
                    verdict: verdict(lambda, replay, tol).into(),
                },
                Row {
                    quantity: "seesaw_value".into(),
                    value: seesaw.value,
                    reference: Some(lambda),
                    verdict: verdict(seesaw.value, lambda, tol).into(),
                },
            ];
            let extras = serde_json::json!({
                "seesaw": {
                    "restarts": restarts,
                    "seed": cli.seed,
                    "iterations": seesaw.iterations,
                    "converged": seesaw.converged,
                }
            });
            (rows, Some(extras))
        }
    };
    Ok(Report {
        scenario: name,
        rows,
        extras,
    }
    .render(cli.format))
}

// ---------------------------------------------------------------------------
// steering
// ---------------------------------------------------------------------------

fn cmd_steering(cli: &Cli, scenario_arg: &str, form: FormArg) -> CliResult<String> {
    let (s, name) = resolve_scenario(scenario_arg)?;
    let (core_form, quantity) = match form {
        FormArg::TrineForm => (SteeringForm::TrineForm, "steering_value_trine_form"),
        FormArg::LinearForm => (SteeringForm::LinearForm, "steering_value_linear_form"),
    };
    let value = steering::steering_value(&s, core_form)?;
    let rows = vec![Row {
        quantity: quantity.into(),
        value,
        reference: Some(1.0),
        verdict: verdict(value, 1.0, cli.tol).into(),
    }];
    Ok(Report {
        scenario: name,
        rows,
        extras: None,
    }
    .render(cli.format))
}

// ---------------------------------------------------------------------------
// jm
// ---------------------------------------------------------------------------

fn cmd_jm(cli: &Cli, family: &str, precision: f64) -> CliResult<String> {
    let s3 = 3.0_f64.sqrt();
    let (axes, name, builtin_reference) = match family {
        "trine" => (
            vec![
                BlochVec::new(0.0, 0.0, 1.0),
                BlochVec::new(s3 / 2.0, 0.0, -0.5),
                BlochVec::new(-s3 / 2.0, 0.0, -0.5),
            ],
            "trine".to_string(),
            Some(2.0 / 3.0),
        ),
        "orthogonal" => (orthogonal_axes(), "orthogonal".to_string(), Some(1.0 / SQRT3)),
        other => {
            let (s, name) = resolve_scenario(other)?;
            let axes: Vec<BlochVec> = s.alice().iter().map(|o| o.axis()).collect();
            (axes, name, None)
        }
    };

    let threshold = jm::jm_threshold(&axes, precision)?;
    // Reference route: the known closed forms for the named families, a
    // grid scan over the same feasibility test otherwise.
    let reference = match builtin_reference {
        Some(r) => r,
        None => grid_threshold(&axes)?,
    };
    let row_tol = cli.tol.max(2e-4).max(2.0 * precision);

    let witness_violation = match &threshold.witness {
        Some(jm::Witness::Parent(parent)) => parent.validate(&axes)?,
        _ => {
            return Err(Failure::Run(
                "threshold search returned no parent-measurement witness".into(),
            ))
        }
    };

    let rows = vec![
        Row {
            quantity: "jm_threshold".into(),
            value: threshold.critical_eta,
            reference: Some(reference),
            verdict: verdict(threshold.critical_eta, reference, row_tol).into(),
        },
        Row {
            quantity: "witness_max_violation".into(),
            value: witness_violation,
            reference: Some(0.0),
            verdict: verdict(witness_violation, 0.0, cli.tol.max(1e-9)).into(),
        },
    ];
    let extras = serde_json::json!({ "threshold": threshold });
    Ok(Report {
        scenario: name,
        rows,
        extras: Some(extras),
    }
    .render(cli.format))
}

/// Grid-scan estimate of the joint-measurability threshold: a coarse pass at
/// step 0.01 followed by a fine pass at step 5e-5 around the boundary.
/// Independent of the bisection path in the engine.
fn grid_threshold(axes: &[BlochVec]) -> CliResult<f64> {
    let feasible = |eta: f64| -> CliResult<bool> {
        Ok(jm::parent_feasible_at(axes, eta)?.is_some())
    };
    if !feasible(0.0)? {
        return Err(Failure::Run(
            "axis family is not jointly measurable even at zero sharpness".into(),
        ));
    }
    let coarse = 0.01;
    let mut lo = 0.0;
    let mut k = 1usize;
    while (k as f64) * coarse <= 1.0 + 1e-12 {
        let eta = ((k as f64) * coarse).min(1.0);
        if feasible(eta)? {
            lo = eta;
            k += 1;
        } else {
            break;
        }
    }
    if lo >= 1.0 - 1e-12 {
        return Ok(1.0);
    }
    let fine = 5e-5;
    let hi = (lo + coarse).min(1.0);
    let mut best = lo;
    let mut j = 1usize;
    loop {
        let eta = lo + (j as f64) * fine;
        if eta > hi + 1e-12 {
            break;
        }
        if feasible(eta.min(1.0))? {
            best = eta;
            j += 1;
        } else {
            break;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

fn cmd_scan(
    cli: &Cli,
    scenario_arg: &str,
    side: SideArg,
    from: f64,
    to: f64,
    steps: usize,
) -> CliResult<String> {
    let (s, name) = resolve_scenario(scenario_arg)?;
    if s.relations().is_empty() {
        return Err(Failure::Usage(
            "scan needs a scenario with at least one functional relation for its pnc column"
                .into(),
        ));
    }
    if !from.is_finite() || !to.is_finite() || from < 0.0 || to > 1.0 || from > to {
        return Err(Failure::Usage(format!(
            "scan range must satisfy 0 <= from <= to <= 1, got {from} ..= {to}"
        )));
    }
    if steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    if steps > 100_000 {
        return Err(Failure::Usage("--steps is capped at 100000".into()));
    }
    let core_side = match side {
        SideArg::Alice => Side::Alice,
        SideArg::Bob => Side::Bob,
    };
    let side_name = match side {
        SideArg::Alice => "alice",
        SideArg::Bob => "bob",
    };

    let local = bounds::local_bound(s.coeffs())?.bound;
    let pnc = bounds::pnc_bound(s.coeffs(), s.relations())?.bound;
    // The scanned side's smearing scales every correlator linearly, so the
    // quantum curve is eta times its value at full sharpness and each bound
    // is crossed at exactly bound / that value.
    let sharp = smear(&s, core_side, 1.0)?;
    let q_base = bell::quantum_max_fixed_measurements(&sharp)?;

    let mut candidates: Vec<(f64, Option<String>)> = (0..=steps)
        .map(|k| (from + (to - from) * (k as f64) / (steps as f64), None))
        .collect();
    if q_base.abs() > 1e-12 {
        for (bound, label) in [(local, "local"), (pnc, "pnc")] {
            let eta = bound / q_base;
            if eta >= from - 1e-12 && eta <= to + 1e-12 {
                candidates.push((eta.clamp(from, to), Some(label.to_string())));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, Option<String>)> = Vec::new();
    for (eta, label) in candidates {
        match merged.last_mut() {
            Some((prev, prev_label)) if (eta - *prev).abs() <= 1e-12 => {
                if prev_label.is_none() {
                    *prev_label = label;
                }
            }
            _ => merged.push((eta, label)),
        }
    }

    let mut rows = Vec::with_capacity(merged.len());
    for (eta, crossing) in merged {
        let quantum = bell::quantum_max_fixed_measurements(&smear(&s, core_side, eta)?)?;
        rows.push(ScanRow {
            eta,
            quantum,
            local,
            pnc,
            crossing,
        });
    }
    Ok(ScanReport {
        scenario: name,
        side: side_name.into(),
        rows,
    }
    .render(cli.format))
}
