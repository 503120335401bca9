//! Export of the small instances solved by the reference script in
//! `tools/reference`, and a guard that the frozen results still belong to
//! the instances generated here.

mod common;

use common::{first_instance, instance_json, small_instances, FIXTURES, NUM_SMALL};
use isac_ee::model::ScenarioConfig;
use serde_json::{json, Value};

const EXPORT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../tools/reference/instances.json");

/// Writes the instance file consumed by `solve_reference.py`.
#[test]
#[ignore = "regenerates reference inputs"]
fn export_instances() {
    let instances: Vec<Value> = small_instances().iter().map(instance_json).collect();
    let nominal = instance_json(&first_instance(ScenarioConfig::nominal()).unwrap());
    let text = serde_json::to_string(&json!({ "instances": instances, "nominal": nominal })).unwrap();
    std::fs::write(EXPORT, text).unwrap();
}

#[test]
fn frozen_results_match_current_instances() {
    let text = std::fs::read_to_string(format!("{FIXTURES}/subproblem_reference.json")).unwrap();
    let frozen: Value = serde_json::from_str(&text).unwrap();
    let entries = frozen["instances"].as_array().unwrap();
    assert_eq!(entries.len(), NUM_SMALL);
    let nominal = first_instance(ScenarioConfig::nominal()).unwrap();
    let mut all = small_instances();
    all.push(nominal);
    for (inst, entry) in all.iter().zip(entries.iter().chain([&frozen["nominal"]])) {
        let p = &inst.subproblem.problem;
        assert_eq!(entry["num_vars"].as_u64().unwrap() as usize, p.num_vars());
        assert_eq!(entry["num_constraints"].as_u64().unwrap() as usize, p.num_constraints());
        let b_sum: f64 = p.b.iter().sum();
        let frozen_sum = entry["b_sum"].as_f64().unwrap();
        assert!((b_sum - frozen_sum).abs() <= 1e-9 * frozen_sum.abs().max(1.0), "{b_sum} vs {frozen_sum}");
    }
}
