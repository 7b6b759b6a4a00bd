use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use truthscore::general::{run_general, GeneralInstance, GeneralResult, MechanismOptions};
use truthscore::ic_lab::{
    check_ic_general, check_ic_single_slot, check_ir_general, check_ir_single_slot, demo_concave_general,
    demo_concave_single_slot, demo_no_approximation, sample_instances, DeviationReport, GeneralGrid, InstanceSampler,
    IrReport, Verdict,
};
use truthscore::single_slot::{realize_purchase, run_auction, SingleSlotBid};
use truthscore::welfare_catalog::{resolve, CatalogEntry, ConvexityClaim};

use crate::config::{Command, Format, RunConfig};
use crate::error::{exit, CliError, CliResult};
use crate::report::{deviation_csv, CsvRow};
use crate::schema::{load_instance, write_instance, GeneralDoc, InstanceDoc, Loaded};

pub const DEFAULT_SINGLE_GRID: usize = 101;
pub const DEFAULT_SAMPLE_COUNT: usize = 200;
pub const DEFAULT_SAMPLE_SEED: u64 = 42;

/// A finished command: the report text and the exit code to return.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub report: String,
    pub exit_code: i32,
}

impl Execution {
    fn ok(report: String) -> Self {
        Self {
            report,
            exit_code: exit::OK,
        }
    }
}

/// Runs the command, writes its report, and returns the process exit code.
/// Diagnostics go to stderr; the report goes to `--out` or stdout.
pub fn run_and_report(config: &RunConfig) -> i32 {
    match execute(config) {
        Ok(done) => {
            let written = match &config.output_path {
                Some(path) => std::fs::write(path, &done.report).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", done.report);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return exit::FAILURE;
            }
            if done.exit_code == exit::IC_VIOLATED {
                eprintln!("error: incentive compatibility violated under a verified convex welfare function");
            }
            done.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(config: &RunConfig) -> CliResult<Execution> {
    match config.command {
        Command::RunSingle => run_single(config),
        Command::RunGeneral => run_general_cmd(config),
        Command::VerifyIc => verify_ic(config),
        Command::DemoThreshold => demo_threshold(config),
        Command::DemoNegative => demo_negative(config),
        Command::BuildNetwork => build(config, "network"),
        Command::BuildPrincipalAgent => build(config, "principal_agent"),
    }
}

fn echo(config: &RunConfig) -> Value {
    serde_json::to_value(config).expect("config serializes")
}

fn finish(value: Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("report serializes");
    s.push('\n');
    s
}

fn require_json(config: &RunConfig) -> CliResult<()> {
    match config.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Usage(
            "--format csv is only available for verify-ic and demo-negative".into(),
        )),
    }
}

fn require_instance(config: &RunConfig) -> CliResult<(InstanceDoc, Loaded)> {
    let path = config
        .instance_path
        .as_deref()
        .ok_or_else(|| CliError::Usage("--instance is required".into()))?;
    load_instance(path)
}

fn refuse_welfare(config: &RunConfig, why: &str) -> CliResult<()> {
    if config.welfare.is_some() || !config.params.is_empty() {
        return Err(CliError::Usage(format!("--welfare and --param do not apply {why}")));
    }
    Ok(())
}

fn catalog_entry(config: &RunConfig) -> CliResult<CatalogEntry> {
    let name = config.welfare.as_deref().unwrap_or("linear");
    Ok(resolve(name, &config.params)?)
}

fn welfare_echo(entry: &CatalogEntry) -> Value {
    json!({
        "name": entry.spec.name,
        "parameters": entry.spec.parameters,
        "convexity_claim": entry.spec.convexity_claim,
    })
}

fn run_single(config: &RunConfig) -> CliResult<Execution> {
    require_json(config)?;
    let (_, loaded) = require_instance(config)?;
    let Loaded::SingleSlot(bids) = loaded else {
        return Err(CliError::Usage(format!(
            "run-single needs a single_slot instance, got {}",
            loaded.kind()
        )));
    };
    let entry = catalog_entry(config)?;
    let result = run_auction(&bids, &entry.function)?;
    let realization = config.seed.map(|seed| {
        let purchased = realize_purchase(bids[result.winner].quality, seed);
        json!({
            "seed": seed,
            "purchased": purchased,
            "payment": result.payment(result.winner, purchased),
        })
    });
    Ok(Execution::ok(finish(json!({
        "config": echo(config),
        "welfare": welfare_echo(&entry),
        "winner": result.winner,
        "adjusted_values": result.adjusted_values,
        "reference_value": result.reference_value,
        "payment_if_purchase": result.payment_if_purchase,
        "payment_if_no_purchase": result.payment_if_no_purchase,
        "realization": realization,
    }))))
}

/// Draws each bidder's state at the chosen outcome from its reported
/// prediction, one uniform draw per bidder in bidder order.
pub fn realize_states(instance: &GeneralInstance, result: &GeneralResult, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..instance.bidder_count())
        .map(|i| {
            let p = &instance.report(i).predictions[result.chosen_outcome];
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (k, &pk) in p.iter().enumerate() {
                acc += pk;
                if u < acc {
                    return k;
                }
            }
            p.len() - 1
        })
        .collect()
}

#[derive(Serialize)]
struct OutcomeRow<'a> {
    id: &'a str,
    objective: f64,
}

#[derive(Serialize)]
struct TransferRow<'a> {
    bidder: usize,
    states: &'a [String],
    transfers: &'a [f64],
    counterfactual: f64,
}

fn run_general_cmd(config: &RunConfig) -> CliResult<Execution> {
    require_json(config)?;
    refuse_welfare(config, "to run-general; welfare lives in the instance file")?;
    let (_, loaded) = require_instance(config)?;
    let instance = loaded
        .general()
        .ok_or_else(|| CliError::Usage("run-general needs a general, network or principal_agent instance".into()))?;
    let result = run_general(instance)?;
    let outcomes: Vec<OutcomeRow> = instance
        .outcomes()
        .iter()
        .zip(&result.objectives)
        .map(|(id, &objective)| OutcomeRow { id, objective })
        .collect();
    let transfers: Vec<TransferRow> = (0..instance.bidder_count())
        .map(|i| TransferRow {
            bidder: i,
            states: &result.state_labels[i],
            transfers: &result.transfers[i],
            counterfactual: result.counterfactuals[i],
        })
        .collect();
    let realization = match config.seed {
        Some(seed) => {
            let states = realize_states(instance, &result, seed);
            let payments = result.settle(&states)?;
            let labels: Vec<&str> = states
                .iter()
                .enumerate()
                .map(|(i, &k)| result.state_labels[i][k].as_str())
                .collect();
            Some(json!({ "seed": seed, "states": labels, "payments": payments }))
        }
        None => None,
    };
    Ok(Execution::ok(finish(json!({
        "config": echo(config),
        "kind": loaded.kind(),
        "chosen_outcome": result.chosen_id,
        "objective_value": result.objective_value,
        "outcomes": outcomes,
        "transfers": transfers,
        "realization": realization,
    }))))
}

#[derive(Serialize)]
struct InstanceScan {
    instance_id: String,
    reports: Vec<DeviationReport>,
    ir: Vec<IrReport>,
}

fn verify_ic(config: &RunConfig) -> CliResult<Execution> {
    // Sampling defaults are echoed so the report alone reproduces the run.
    let mut effective = config.clone();
    let mut scans = Vec::new();
    let mut welfare = Value::Null;
    // Violations are a bug signal only when convexity was verified.
    let mut convex_verified = true;
    match config.instance_path.as_deref() {
        Some(path) => {
            if config.count.is_some() {
                return Err(CliError::Usage("--count applies only to sampled instances".into()));
            }
            let (_, loaded) = load_instance(path)?;
            let id = instance_id(path);
            match &loaded {
                Loaded::SingleSlot(bids) => {
                    let entry = catalog_entry(config)?;
                    convex_verified = is_convex(&entry);
                    welfare = welfare_echo(&entry);
                    scans.push(scan_single(id, bids, &entry, config.grid)?);
                }
                _ => {
                    refuse_welfare(config, "to general instances; welfare lives in the instance file")?;
                    let instance = loaded.general().expect("non single-slot kinds carry an instance");
                    let grid = config.grid.map(GeneralGrid::with_resolution).unwrap_or_default();
                    scans.push(InstanceScan {
                        instance_id: id,
                        reports: check_ic_general(instance, grid)?,
                        ir: check_ir_general(instance, MechanismOptions::default())?,
                    });
                }
            }
        }
        None => {
            let entry = catalog_entry(config)?;
            convex_verified = is_convex(&entry);
            welfare = welfare_echo(&entry);
            let seed = *effective.seed.get_or_insert(DEFAULT_SAMPLE_SEED);
            let count = *effective.count.get_or_insert(DEFAULT_SAMPLE_COUNT);
            for (k, bids) in sample_instances(&InstanceSampler::new(seed), count).iter().enumerate() {
                scans.push(scan_single(k.to_string(), bids, &entry, config.grid)?);
            }
        }
    }
    let all = || scans.iter().flat_map(|s| s.reports.iter());
    let max_gap = all().map(|r| r.gap).fold(0.0, f64::max);
    let violated = all().any(|r| r.verdict == Verdict::IcViolated);
    let exit_code = if violated && convex_verified {
        exit::IC_VIOLATED
    } else {
        exit::OK
    };
    let report = match config.format {
        Format::Json => finish(json!({
            "config": echo(&effective),
            "welfare": welfare,
            "max_gap": max_gap,
            "verdict": Verdict::from_gap(max_gap).as_str(),
            "instances": scans,
        })),
        Format::Csv => deviation_csv(
            scans.iter().flat_map(|s| {
                s.reports.iter().map(|report| CsvRow {
                    instance_id: &s.instance_id,
                    report,
                })
            }),
            effective.seed,
        ),
    };
    Ok(Execution { report, exit_code })
}

fn is_convex(entry: &CatalogEntry) -> bool {
    entry.function.is_verified() && entry.spec.convexity_claim != ConvexityClaim::NonConvex
}

fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn scan_single(
    id: String,
    bids: &[SingleSlotBid],
    entry: &CatalogEntry,
    grid: Option<usize>,
) -> CliResult<InstanceScan> {
    let resolution = grid.unwrap_or(DEFAULT_SINGLE_GRID);
    Ok(InstanceScan {
        instance_id: id,
        reports: check_ic_single_slot(bids, &entry.function, resolution)?,
        ir: check_ir_single_slot(bids, &entry.function)?,
    })
}

fn demo_threshold(config: &RunConfig) -> CliResult<Execution> {
    require_json(config)?;
    if config.welfare.as_deref().is_some_and(|w| w != "threshold") {
        return Err(CliError::Usage(
            "demo-threshold always uses the threshold welfare".into(),
        ));
    }
    let mut params = BTreeMap::from([("alpha", 0.2), ("beta", 0.6), ("v_max", 10.0)]);
    for (k, &v) in &config.params {
        match params.get_mut(k.as_str()) {
            Some(slot) => *slot = v,
            None => {
                return Err(CliError::Usage(format!(
                    "--param {k}: threshold takes alpha, beta and v_max"
                )))
            }
        }
    }
    let witness = demo_no_approximation(params["alpha"], params["beta"], params["v_max"])?;
    Ok(Execution::ok(finish(json!({
        "config": echo(config),
        "witness": witness,
    }))))
}

fn demo_negative(config: &RunConfig) -> CliResult<Execution> {
    if config.instance_path.is_some() {
        return Err(CliError::Usage("demo-negative uses built-in fixtures".into()));
    }
    refuse_welfare(config, "to demo-negative")?;
    let single = demo_concave_single_slot(config.grid.unwrap_or(DEFAULT_SINGLE_GRID))?;
    let general = demo_concave_general(config.grid.map(GeneralGrid::with_resolution).unwrap_or_default())?;
    let demos = [single, general];
    let report = match config.format {
        Format::Json => finish(json!({ "config": echo(config), "demos": demos })),
        Format::Csv => deviation_csv(
            demos.iter().flat_map(|d| {
                d.reports.iter().map(|report| CsvRow {
                    instance_id: &d.name,
                    report,
                })
            }),
            config.seed,
        ),
    };
    Ok(Execution::ok(report))
}

/// Expands an application spec into a general instance file.
fn build(config: &RunConfig, kind: &str) -> CliResult<Execution> {
    require_json(config)?;
    refuse_welfare(config, "to builders")?;
    let (_, loaded) = require_instance(config)?;
    let instance = match (&loaded, kind) {
        (Loaded::Network(n), "network") => &n.instance,
        (Loaded::PrincipalAgent(p), "principal_agent") => &p.instance,
        _ => {
            return Err(CliError::Usage(format!(
                "expected a {kind} instance, got {}",
                loaded.kind()
            )));
        }
    };
    let doc = InstanceDoc::General(GeneralDoc::from_instance(instance)?);
    Ok(Execution::ok(write_instance(&doc)))
}
