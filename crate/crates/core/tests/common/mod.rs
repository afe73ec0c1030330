#![allow(dead_code)]

use std::path::PathBuf;

use gaplane::auto::PlaneMap;
use gaplane::gaction::ValidatedCoAction;
use gaplane::gen::GenConfig;
use gaplane::json::{ActionRecord, MapRecord};

pub const FIELDS: [&str; 4] = ["q", "fp2", "fp3", "fp5"];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn map_records(field: &str) -> Vec<MapRecord> {
    serde_json::from_str(&read(&format!("data/maps_{field}.json"))).unwrap()
}

pub fn action_records(field: &str) -> Vec<ActionRecord> {
    serde_json::from_str(&read(&format!("data/actions_{field}.json"))).unwrap()
}

/// All committed automorphisms, field by field.
pub fn maps() -> Vec<(GenConfig, PlaneMap)> {
    FIELDS
        .iter()
        .flat_map(|f| map_records(f))
        .map(|r| {
            let phi = r.map.to_map().unwrap();
            (r.config, phi)
        })
        .collect()
}

pub fn actions(field: &str) -> Vec<(GenConfig, ValidatedCoAction)> {
    validated(action_records(field))
}

/// Actions with a single elementary conjugator, for checks whose cost grows
/// quickly with degree.
pub fn small_actions(field: &str) -> Vec<(GenConfig, ValidatedCoAction)> {
    validated(serde_json::from_str(&read(&format!("data/actions_small_{field}.json"))).unwrap())
}

fn validated(records: Vec<ActionRecord>) -> Vec<(GenConfig, ValidatedCoAction)> {
    records
        .into_iter()
        .map(|r| {
            let sigma = r.action.to_action().unwrap().validate().unwrap();
            (r.config, sigma)
        })
        .collect()
}
