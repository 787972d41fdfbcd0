//! `mirror-sqkd` command-line surface.
//!
//! Exit status is 0 on success, 1 for invalid input or a failed verification,
//! and 2 when an internal contract is violated.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adversary::{
    build_full_attack, build_weaker_attack, epsilon_star, verify_unitary, AttackChoice,
    UnitarityReport,
};
use crate::config::{read_partial_config, AttackKind, PartialConfig, Sourced};
use crate::engine::{
    alice_branches, derive_rates, detection_test, exact_distribution, round_2dp, simulate_with,
    sweep_epsilon, DetectionReport, Execution, JointDistribution, ScenarioConfig, SweepRow, Tally,
    DEFAULT_SIGNIFICANCE,
};
use crate::error::{Error, Result};
use crate::fock::DEFAULT_CAP;
use crate::protocol::{Rate, RateReport, RecordRow, RoundRecord, Variant};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Parser)]
#[command(
    name = "mirror-sqkd",
    version,
    about = "Mirror SQKD protocol and attack simulator"
)]
pub struct Cli {
    /// Scenario file (key = value lines); explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout (a directory for `tables`).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact joint distribution and derived rates.
    Exact(ScenarioArgs),
    /// Seeded Monte Carlo run.
    Simulate(RunArgs),
    /// Weaker-attack rates over a grid of epsilon values.
    Sweep(SweepArgs),
    /// Check that the attack operators are unitary.
    Verify(VerifyArgs),
    /// Monte Carlo run followed by the loss-rate comparison test.
    Detect(DetectArgs),
    /// Reference states for every branch of the protocol and both attacks.
    Tables(TablesArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long, value_parser = parse_attack)]
    pub attack: Option<AttackKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cap: Option<u8>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// `start:end:step` or a comma-separated list.
    #[arg(long, default_value = "0:1:0.1", allow_hyphen_values = true)]
    pub epsilon_grid: String,
    #[arg(long)]
    pub cap: Option<u8>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_attack, default_value = "weaker")]
    pub attack: AttackKind,
    /// Number of evenly spaced epsilon points in [0, 1].
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Check a single epsilon instead of the grid.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long)]
    pub cap: Option<u8>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    /// Epsilon for the weaker-attack listing (default: the equal-loss point).
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_attack(s: &str) -> std::result::Result<AttackKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Everything a command produced.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Emission {
    text: String,
    /// Named parts written separately when `--output` is a directory.
    parts: Vec<(String, String)>,
    ok: bool,
}

impl Emission {
    fn ok(text: String) -> Self {
        Emission {
            text,
            parts: Vec::new(),
            ok: true,
        }
    }
}

/// Parses arguments and runs the command. Never exits the process.
pub fn run<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CliOutcome {
                        code: 0,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => CliOutcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match dispatch(&cli) {
        Ok(emission) => {
            let code = if emission.ok { 0 } else { 1 };
            match &cli.output {
                None => CliOutcome {
                    code,
                    stdout: emission.text,
                    stderr: String::new(),
                },
                Some(path) => {
                    match write_output(path, &emission, matches!(cli.command, Command::Tables(_))) {
                        Ok(()) => CliOutcome {
                            code,
                            ..Default::default()
                        },
                        Err(e) => CliOutcome {
                            code: 1,
                            stdout: String::new(),
                            stderr: format!("error: {e}\n"),
                        },
                    }
                }
            }
        }
        Err(e) => CliOutcome {
            code: if e.is_validation() { 1 } else { 2 },
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn write_output(path: &Path, emission: &Emission, as_directory: bool) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    if as_directory {
        std::fs::create_dir_all(path).map_err(io)?;
        for (name, content) in &emission.parts {
            std::fs::write(path.join(name), content).map_err(io)?;
        }
        Ok(())
    } else {
        std::fs::write(path, &emission.text).map_err(io)
    }
}

fn dispatch(cli: &Cli) -> Result<Emission> {
    match &cli.command {
        Command::Exact(args) => {
            let config = scenario(cli, args)?;
            exact_report(&config, cli.format.unwrap_or(Format::Json))
        }
        Command::Simulate(args) => {
            let config = scenario(cli, &args.scenario)?;
            simulate_report(
                &config,
                execution(args.workers)?,
                cli.format.unwrap_or(Format::Json),
            )
        }
        Command::Sweep(args) => {
            let grid = parse_grid(&args.epsilon_grid)?;
            let rows = sweep_epsilon(&grid, args.cap.unwrap_or(DEFAULT_CAP))?;
            sweep_report(&rows, cli.format.unwrap_or(Format::Csv))
        }
        Command::Verify(args) => verify_report(args, cli.format.unwrap_or(Format::Json)),
        Command::Detect(args) => {
            let config = scenario(cli, &args.run.scenario)?;
            if !(args.significance > 0.0 && args.significance < 1.0) {
                return Err(Error::Usage(format!(
                    "--significance {} outside (0, 1)",
                    args.significance
                )));
            }
            detect_report(
                &config,
                execution(args.run.workers)?,
                args.significance,
                cli.format.unwrap_or(Format::Json),
            )
        }
        Command::Tables(args) => tables_report(args.epsilon.unwrap_or_else(epsilon_star)),
    }
}

fn scenario(cli: &Cli, args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let file = match &cli.config {
        Some(path) => read_partial_config(path)?,
        None => PartialConfig::default(),
    };
    let flags = PartialConfig {
        variant: args.variant.map(Sourced::flag),
        attack: args.attack.map(Sourced::flag),
        epsilon: args.epsilon.map(Sourced::flag),
        rounds: args.rounds.map(Sourced::flag),
        seed: args.seed.map(Sourced::flag),
        cap: args.cap.map(Sourced::flag),
        ..Default::default()
    };
    file.merged(flags).resolve()
}

fn execution(workers: Option<usize>) -> Result<Execution> {
    match workers {
        Some(0) => Err(Error::Usage("--workers must be at least 1".into())),
        Some(n) => Ok(Execution::with_workers(n)),
        None => Ok(Execution::default()),
    }
}

/// Parses `start:end:step` (inclusive of `end`) or `a,b,c`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Usage(format!("invalid epsilon grid `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, end, step] => {
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if step.is_nan() || step <= 0.0 || end < start {
                return Err(bad());
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            Ok((0..=n)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn fmt_rate(r: &Rate) -> String {
    let mut s = match r.value {
        Some(v) => format!("{v:.6}"),
        None => "undefined".to_string(),
    };
    if let (Some(lo), Some(hi)) = (r.ci_low, r.ci_high) {
        let _ = write!(s, " [{lo:.6}, {hi:.6}]");
    }
    if let (Some(k), Some(n)) = (r.successes, r.trials) {
        let _ = write!(s, " ({k}/{n})");
    }
    s
}

fn human_rates(report: &RateReport) -> String {
    let rows = [
        ("error_rate_swap", &report.error_rate_swap),
        ("error_rate_ctrl", &report.error_rate_ctrl),
        ("loss_rate_ctrl", &report.loss_rate_ctrl),
        ("loss_rate_swap", &report.loss_rate_swap),
        ("key_rate", &report.key_rate),
        ("eve_info_probability", &report.eve_info_probability),
        ("forbidden_event_rate", &report.forbidden_event_rate),
        ("swap_all_click_rate", &report.swap_all_click_rate),
    ];
    rows.iter()
        .map(|(name, r)| format!("{name:<22} {}\n", fmt_rate(r)))
        .collect()
}

fn describe(config: &ScenarioConfig) -> String {
    format!(
        "variant {} attack {} cap {}\n",
        config.protocol.variant, config.attack, config.cap
    )
}

fn records_csv<'a, I>(rows: I, value_column: &str) -> Result<String>
where
    I: IntoIterator<Item = (&'a RoundRecord, String)>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "op",
        "alice_click_1",
        "alice_click_0",
        "bob_basis",
        "bob_click_1",
        "bob_click_0",
        "eve_outcome",
        value_column,
    ];
    w.write_record(header)
        .map_err(|e| Error::Io(e.to_string()))?;
    for (record, value) in rows {
        let row = RecordRow::from(*record);
        let basis = serde_json::to_value(row.bob_basis).expect("basis serializes");
        w.write_record([
            row.op.name().to_string(),
            row.alice_click_1.to_string(),
            row.alice_click_0.to_string(),
            basis.as_str().unwrap_or_default().to_string(),
            row.bob_click_1.to_string(),
            row.bob_click_0.to_string(),
            row.eve_outcome.map(|e| e.to_string()).unwrap_or_default(),
            value,
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
        .map_err(|e| Error::Io(e.to_string()))
}

fn exact_report(config: &ScenarioConfig, format: Format) -> Result<Emission> {
    let dist = exact_distribution(config)?;
    let rates = derive_rates(&dist)?;
    let text = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a ScenarioConfig,
                distribution: &'a JointDistribution,
                rates: &'a RateReport,
            }
            to_json(&Out {
                config,
                distribution: &dist,
                rates: &rates,
            })
        }
        Format::Csv => records_csv(dist.iter().map(|(r, p)| (r, p.to_string())), "probability")?,
        Format::Human => {
            let mut s = describe(config);
            s.push_str(&human_rates(&rates));
            s.push_str("outcomes:\n");
            for (r, p) in dist.iter() {
                let _ = writeln!(s, "  {:.12}  {}", p, human_record(r));
            }
            s
        }
    };
    Ok(Emission::ok(text))
}

fn human_record(r: &RoundRecord) -> String {
    let clicks = |one: bool, zero: bool, labels: (&str, &str)| match (one, zero) {
        (false, false) => "none".to_string(),
        (true, false) => labels.0.to_string(),
        (false, true) => labels.1.to_string(),
        (true, true) => format!("{}+{}", labels.0, labels.1),
    };
    let bob_labels = match r.bob_basis {
        crate::fock::MeasurementBasis::Computational => ("|1>", "|0>"),
        crate::fock::MeasurementBasis::Hadamard => ("|->", "|+>"),
    };
    format!(
        "{:<8} alice={:<8} bob[{:?}]={:<8} eve={}",
        r.op.name(),
        clicks(r.alice_clicks.one, r.alice_clicks.zero, ("|1>", "|0>")),
        r.bob_basis,
        clicks(r.bob_clicks.one, r.bob_clicks.zero, bob_labels),
        r.eve_outcome
            .map(|e| e.to_string())
            .unwrap_or_else(|| "-".into())
    )
}

fn simulate_report(
    config: &ScenarioConfig,
    execution: Execution,
    format: Format,
) -> Result<Emission> {
    let (tally, rates) = simulate_with(config, execution)?;
    let text = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a ScenarioConfig,
                tally: &'a Tally,
                rates: &'a RateReport,
            }
            to_json(&Out {
                config,
                tally: &tally,
                rates: &rates,
            })
        }
        Format::Csv => records_csv(tally.iter().map(|(r, c)| (r, c.to_string())), "count")?,
        Format::Human => {
            let mut s = describe(config);
            let _ = writeln!(s, "rounds {} seed {}", tally.rounds, config.master_seed);
            s.push_str(&human_rates(&rates));
            s
        }
    };
    Ok(Emission::ok(text))
}

/// Sweep table as CSV. `epsilon` is printed at full precision; the `_2dp`
/// columns hold engine values rounded for comparison with two-decimal
/// reference figures.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "epsilon",
        "p_closed_form",
        "r_ctrl_closed_form",
        "r_swap_closed_form",
        "p_engine",
        "r_ctrl_engine",
        "r_swap_engine",
        "p_2dp",
        "r_ctrl_2dp",
        "r_swap_2dp",
    ])
    .map_err(io)?;
    for r in rows {
        w.write_record([
            r.epsilon.to_string(),
            r.closed_form.p.to_string(),
            r.closed_form.r_ctrl.to_string(),
            r.closed_form.r_swap.to_string(),
            r.engine.p.to_string(),
            r.engine.r_ctrl.to_string(),
            r.engine.r_swap.to_string(),
            format!("{:.2}", round_2dp(r.engine.p)),
            format!("{:.2}", round_2dp(r.engine.r_ctrl)),
            format!("{:.2}", round_2dp(r.engine.r_swap)),
        ])
        .map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
        .map_err(|e| Error::Io(e.to_string()))
}

fn sweep_report(rows: &[SweepRow], format: Format) -> Result<Emission> {
    let text = match format {
        Format::Csv => sweep_csv(rows)?,
        Format::Json => to_json(&rows),
        Format::Human => {
            let mut s = format!(
                "{:>8} {:>8} {:>8} {:>8}   (engine; closed-form deviation)\n",
                "epsilon", "p", "R_CTRL", "R_SWAP"
            );
            for r in rows {
                let dev = (r.engine.p - r.closed_form.p)
                    .abs()
                    .max((r.engine.r_ctrl - r.closed_form.r_ctrl).abs())
                    .max((r.engine.r_swap - r.closed_form.r_swap).abs());
                let _ = writeln!(
                    s,
                    "{:>8.4} {:>8.4} {:>8.4} {:>8.4}   {:.1e}",
                    r.epsilon, r.engine.p, r.engine.r_ctrl, r.engine.r_swap, dev
                );
            }
            s
        }
    };
    Ok(Emission::ok(text))
}

#[derive(Serialize)]
struct VerifyPoint {
    epsilon: Option<f64>,
    #[serde(flatten)]
    report: UnitarityReport,
}

fn verify_report(args: &VerifyArgs, format: Format) -> Result<Emission> {
    let cap = args.cap.unwrap_or(DEFAULT_CAP);
    if cap == 0 {
        return Err(Error::Usage("--cap must be at least 1".into()));
    }
    let points: Vec<VerifyPoint> = match args.attack {
        AttackKind::None => {
            return Err(Error::Usage("verify needs --attack full or weaker".into()))
        }
        AttackKind::Full => {
            if args.epsilon.is_some() {
                return Err(Error::Usage(
                    "--epsilon is only meaningful for the weaker attack".into(),
                ));
            }
            vec![VerifyPoint {
                epsilon: None,
                report: verify_unitary(&build_full_attack(cap), args.tol),
            }]
        }
        AttackKind::Weaker => {
            let grid: Vec<f64> = match (args.epsilon, args.grid) {
                (Some(e), _) => vec![e],
                (None, 0) => return Err(Error::Usage("--grid must be at least 1".into())),
                (None, 1) => vec![0.0],
                (None, n) => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
            };
            grid.into_iter()
                .map(|e| {
                    let attack = build_weaker_attack(e, cap)?;
                    Ok(VerifyPoint {
                        epsilon: Some(e),
                        report: verify_unitary(&attack, args.tol),
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let max_defect = points
        .iter()
        .map(|p| p.report.max_defect())
        .fold(0.0, f64::max);
    let passed = points.iter().all(|p| p.report.passed);

    let text = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                attack: String,
                tolerance: f64,
                passed: bool,
                max_defect: f64,
                points: &'a [VerifyPoint],
            }
            let attack = match args.attack {
                AttackKind::Full => "full",
                _ => "weaker",
            };
            to_json(&Out {
                attack: attack.into(),
                tolerance: args.tol,
                passed,
                max_defect,
                points: &points,
            })
        }
        Format::Csv => {
            let mut s = String::from(
                "epsilon,max_norm_deviation,max_column_overlap,unitarity_defect,passed\n",
            );
            for p in &points {
                let _ = writeln!(
                    s,
                    "{},{:e},{:e},{:e},{}",
                    p.epsilon.map(|e| e.to_string()).unwrap_or_default(),
                    p.report.max_norm_deviation,
                    p.report.max_column_overlap,
                    p.report.unitarity_defect,
                    p.report.passed
                );
            }
            s
        }
        Format::Human => format!(
            "{} point(s) checked, max defect {:.3e}, tolerance {:.1e}: {}\n",
            points.len(),
            max_defect,
            args.tol,
            if passed { "pass" } else { "FAIL" }
        ),
    };
    Ok(Emission {
        text,
        parts: Vec::new(),
        ok: passed,
    })
}

fn detect_report(
    config: &ScenarioConfig,
    execution: Execution,
    significance: f64,
    format: Format,
) -> Result<Emission> {
    let (tally, _) = simulate_with(config, execution)?;
    let report = detection_test(&tally, config.protocol.variant, significance)?;
    let text = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a ScenarioConfig,
                rounds: u64,
                detection: &'a DetectionReport,
            }
            to_json(&Out {
                config,
                rounds: tally.rounds,
                detection: &report,
            })
        }
        Format::Human => {
            let mut s = describe(config);
            let _ = writeln!(s, "rounds {} seed {}", tally.rounds, config.master_seed);
            let _ = writeln!(s, "loss_rate_ctrl {}", fmt_rate(&report.loss_rate_ctrl));
            let _ = writeln!(s, "loss_rate_swap {}", fmt_rate(&report.loss_rate_swap));
            let _ = writeln!(
                s,
                "z {:.4} p-value {:.4e} at {}: {}",
                report.z,
                report.p_value,
                significance,
                if report.detected {
                    "detected"
                } else {
                    "not detected"
                }
            );
            s
        }
        Format::Csv => return Err(Error::Usage("detect supports --format json|human".into())),
    };
    Ok(Emission::ok(text))
}

fn branch_listing(
    title: &str,
    variant: Variant,
    attack: AttackChoice,
    after_attack: bool,
) -> Result<String> {
    let attack = attack.build(DEFAULT_CAP)?;
    let mut s = format!("# {title}\n");
    for branch in alice_branches(variant, attack.as_ref(), DEFAULT_CAP)? {
        let state = if after_attack {
            &branch.to_bob
        } else {
            &branch.after_alice
        };
        let reduced = state.discard_alice().ok_or(Error::AncillaNotVacuum)?;
        let _ = writeln!(
            s,
            "## {} alice_detected={} alice=|{},{}> probability={:.12}",
            branch.op,
            if branch.alice_clicks.any() {
                "yes"
            } else {
                "no"
            },
            branch.alice_counts.one,
            branch.alice_counts.zero,
            branch.probability
        );
        s.push_str(&reduced.to_canonical_string());
    }
    Ok(s)
}

/// File names and contents written by `tables`.
pub fn reference_tables(epsilon: f64) -> Result<Vec<(String, String)>> {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    Ok(vec![
        (
            "no_attack_mirror.txt".into(),
            branch_listing(
                "mirror protocol, no attack: state sent from Alice to Bob",
                Variant::Mirror,
                AttackChoice::None,
                false,
            )?,
        ),
        (
            "no_attack_simplified.txt".into(),
            branch_listing(
                "simplified protocol, no attack: state sent from Alice to Bob",
                Variant::Simplified,
                AttackChoice::None,
                false,
            )?,
        ),
        (
            "attack_after_alice.txt".into(),
            branch_listing(
                "simplified protocol under attack: Bob+Eve state after Alice's operation",
                Variant::Simplified,
                AttackChoice::Full,
                false,
            )?,
        ),
        (
            "full_attack_to_bob.txt".into(),
            branch_listing(
                "full attack: Bob+Eve state after Eve's second stage",
                Variant::Simplified,
                AttackChoice::Full,
                true,
            )?,
        ),
        (
            "weaker_attack_to_bob.txt".into(),
            branch_listing(
                &format!(
                    "weaker attack, epsilon = {epsilon}: Bob+Eve state after Eve's second stage"
                ),
                Variant::Simplified,
                AttackChoice::Weaker(epsilon),
                true,
            )?,
        ),
        (
            "weaker_sweep.csv".into(),
            sweep_csv(&sweep_epsilon(&grid, DEFAULT_CAP)?)?,
        ),
    ])
}

fn tables_report(epsilon: f64) -> Result<Emission> {
    let parts = reference_tables(epsilon)?;
    let text = parts
        .iter()
        .map(|(_, c)| c.as_str())
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Emission {
        text,
        parts,
        ok: true,
    })
}
