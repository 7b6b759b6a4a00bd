use std::path::{Path, PathBuf};
use std::process::Command;

use truthscore::applications::{build_network_instance, NetworkProcurementSpec};
use truthscore::ic_lab::{GeneralSampler, WelfareMode};
use truthscore_cli::schema::{parse_instance, validate, write_instance, GeneralDoc};
use truthscore_cli::{exit, load_instance, InstanceDoc, Loaded};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_truthscore"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn minimal_single_slot_file_loads_two_bids() {
    let (_, loaded) = load_instance(&fixture("worked_single_slot.json")).unwrap();
    match loaded {
        Loaded::SingleSlot(bids) => assert_eq!(bids.len(), 2),
        other => panic!("unexpected {}", other.kind()),
    }
}

#[test]
fn off_simplex_prediction_names_the_field() {
    let text = r#"{"kind":"general","outcomes":["x","y"],"bidders":[
        {"states":[["a","b"],["c"]],"values":[1,0],"predictions":[[0.5,0.5],[0.8]]}]}"#;
    let err = validate(&parse_instance("inline", text).unwrap()).unwrap_err();
    assert_eq!(err.exit_code(), exit::VALIDATION);
    assert!(err.to_string().contains("bidders[0].predictions[1]"), "{err}");
}

#[test]
fn malformed_documents_are_parse_errors() {
    for text in [
        "{",
        r#"{"kind":"auction"}"#,
        r#"{"kind":"single_slot","bids":[{"value":1}]}"#,
    ] {
        let err = parse_instance("inline", text).unwrap_err();
        assert_eq!(err.exit_code(), exit::PARSE, "{text}");
    }
}

#[test]
fn documents_round_trip() {
    for name in [
        "worked_single_slot.json",
        "network.json",
        "principal_agent.json",
        "general_sale.json",
    ] {
        let (doc, _) = load_instance(&fixture(name)).unwrap();
        let again = parse_instance(name, &write_instance(&doc)).unwrap();
        assert_eq!(doc, again, "{name}");
    }
}

#[test]
fn general_instances_round_trip_through_documents() {
    for inst in GeneralSampler::new(3, WelfareMode::Multilinear).sample(50) {
        let doc = GeneralDoc::from_instance(&inst).unwrap();
        let text = write_instance(&InstanceDoc::General(doc.clone()));
        let InstanceDoc::General(back) = parse_instance("inline", &text).unwrap() else {
            panic!("kind changed");
        };
        assert_eq!(back, doc);
        let rebuilt = back.to_instance().unwrap();
        assert_eq!(GeneralDoc::from_instance(&rebuilt).unwrap(), doc);
    }
}

#[test]
fn fixture_network_selects_the_cheapest_reliable_path() {
    // Brute force by hand, cost + 10 * P(fail):
    // s-a-t 3 + 1.45, s-a-b-t 2.7 + 2.8, s-b-a-t 2.7 + 3.35, s-b-t 2 + 4.4.
    let (doc, loaded) = load_instance(&fixture("network.json")).unwrap();
    let Loaded::Network(net) = loaded else {
        panic!("not a network")
    };
    assert_eq!(net.instance.outcome_count(), 4);
    let (code, out, _) = cli(&["run-general", "--instance", fixture("network.json").to_str().unwrap()]);
    assert_eq!(code, exit::OK);
    let report = json(&out);
    assert_eq!(report["chosen_outcome"], "e0-e1");
    assert!((report["objective_value"].as_f64().unwrap() + 4.45).abs() < 1e-12);
    let InstanceDoc::Network(spec) = doc else { panic!() };
    let rebuilt: NetworkProcurementSpec = spec.clone();
    assert_eq!(build_network_instance(&rebuilt).unwrap().paths, net.paths);
}

#[test]
fn run_single_reproduces_worked_example() {
    let path = fixture("worked_single_slot.json");
    let (code, out, _) = cli(&[
        "run-single",
        "--instance",
        path.to_str().unwrap(),
        "--welfare",
        "linear",
    ]);
    assert_eq!(code, exit::OK);
    let r = json(&out);
    assert_eq!(r["winner"], 1);
    assert!((r["payment_if_purchase"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert!((r["payment_if_no_purchase"].as_f64().unwrap() - 1.2).abs() < 1e-12);
    assert_eq!(r["welfare"]["parameters"]["slope"], 1.0);
    assert!(r["realization"].is_null());
}

#[test]
fn seeded_realization_is_echoed() {
    let path = fixture("worked_single_slot.json");
    let (_, out, _) = cli(&["run-single", "--instance", path.to_str().unwrap(), "--seed", "11"]);
    let r = json(&out);
    assert_eq!(r["config"]["seed"], 11);
    let purchased = r["realization"]["purchased"].as_bool().unwrap();
    assert_eq!(purchased, truthscore::single_slot::realize_purchase(0.9, 11));
}

#[test]
fn build_network_output_runs_like_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let built = dir.path().join("built.json");
    let net = fixture("network.json");
    let (code, _, _) = cli(&[
        "build-network",
        "--instance",
        net.to_str().unwrap(),
        "--out",
        built.to_str().unwrap(),
    ]);
    assert_eq!(code, exit::OK);
    let (_, from_built, _) = cli(&["run-general", "--instance", built.to_str().unwrap()]);
    let (_, from_spec, _) = cli(&["run-general", "--instance", net.to_str().unwrap()]);
    let (a, b) = (json(&from_built), json(&from_spec));
    assert_eq!(a["chosen_outcome"], b["chosen_outcome"]);
    assert_eq!(a["transfers"], b["transfers"]);
}

#[test]
fn principal_agent_hires_both_at_high_effort() {
    let path = fixture("principal_agent.json");
    let (code, out, _) = cli(&["run-general", "--instance", path.to_str().unwrap()]);
    assert_eq!(code, exit::OK);
    assert_eq!(json(&out)["chosen_outcome"], "0:high|1:std");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(cli(&["run-single", "--instance", bad.to_str().unwrap()]).0, exit::PARSE);
    std::fs::write(&bad, r#"{"kind":"single_slot","bids":[{"value":1,"quality":1.5}]}"#).unwrap();
    let (code, out, err) = cli(&["run-single", "--instance", bad.to_str().unwrap()]);
    assert_eq!(code, exit::VALIDATION);
    assert!(out.is_empty());
    assert!(err.contains("bids[0].quality"), "{err}");
    let missing = dir.path().join("missing.json");
    assert_eq!(
        cli(&["run-single", "--instance", missing.to_str().unwrap()]).0,
        exit::FAILURE
    );
    let pa = fixture("principal_agent.json");
    assert_eq!(
        cli(&["verify-ic", "--instance", pa.to_str().unwrap(), "--grid", "60"]).0,
        exit::GUARD
    );
    assert_eq!(
        cli(&[
            "run-single",
            "--welfare",
            "nope",
            "--instance",
            fixture("worked_single_slot.json").to_str().unwrap()
        ])
        .0,
        exit::VALIDATION
    );
}

#[test]
fn concave_welfare_violations_are_reported_not_fatal() {
    let (code, out, _) = cli(&["verify-ic", "--welfare", "concave_demo", "--count", "5", "--grid", "21"]);
    assert_eq!(code, exit::OK);
    assert_eq!(json(&out)["verdict"], "IC_violated");
}

#[test]
fn csv_columns_are_fixed() {
    let (code, out, _) = cli(&[
        "verify-ic",
        "--count",
        "3",
        "--grid",
        "11",
        "--seed",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(code, exit::OK);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("instance_id,bidder,truthful_utility,best_gap,verdict,seed,grid")
    );
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7, "{line}");
        assert_eq!(cols[5], "5");
        assert_eq!(cols[4], "IC_holds (grid)");
    }
}

#[test]
fn demo_threshold_reports_both_bounds() {
    let (code, out, _) = cli(&[
        "demo-threshold",
        "--param",
        "alpha=0.2",
        "--param",
        "beta=0.6",
        "--param",
        "v_max=10",
    ]);
    assert_eq!(code, exit::OK);
    let w = &json(&out)["witness"];
    assert!((w["quoted_bound"].as_f64().unwrap() - 20.0).abs() < 1e-12);
    assert!((w["critical_value"].as_f64().unwrap() - 10.0).abs() < 1e-12);
    assert_eq!(w["runs"][0]["winner"], 0);
}

#[test]
fn stdout_is_only_the_report() {
    let (_, out, err) = cli(&["demo-negative", "--grid", "11"]);
    let r = json(&out);
    assert!(err.is_empty());
    assert!(r["demos"][0]["max_gap"].as_f64().unwrap() > 1e-3);
    assert!(r["demos"][1]["max_gap"].as_f64().unwrap() > 1e-3);
}
