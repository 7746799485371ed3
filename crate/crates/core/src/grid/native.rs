//! The crate's own JSON case format. All quantities are already per unit.
//!
//! ```json
//! { "base_mva": 10, "nominal_voltage": 1.0, "slack": 1,
//!   "buses": [{ "id": 1, "p_nominal": 0.0, "q_nominal": 0.0 }, ...],
//!   "branches": [{ "from": 1, "to": 2, "r": 0.01, "x": 0.02 }, ...] }
//! ```

use serde::{Deserialize, Serialize};

use super::case::{Branch, Bus, NetworkCase};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NativeCase {
    base_mva: f64,
    nominal_voltage: f64,
    slack: usize,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
}

pub fn parse_native_case(text: &str) -> Result<NetworkCase> {
    let raw: NativeCase =
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    NetworkCase::new(raw.base_mva, raw.nominal_voltage, raw.slack, raw.buses, raw.branches)
}

/// Serializes a case so that [`parse_native_case`] reproduces it exactly.
pub fn to_native_json(case: &NetworkCase) -> String {
    let raw = NativeCase {
        base_mva: case.base_mva(),
        nominal_voltage: case.nominal_voltage(),
        slack: case.slack(),
        buses: case.buses().to_vec(),
        branches: case.branches().to_vec(),
    };
    serde_json::to_string_pretty(&raw).expect("case serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATH3: &str = r#"{
        "base_mva": 1, "nominal_voltage": 1.0, "slack": 1,
        "buses": [
            {"id": 1, "p_nominal": 0.0, "q_nominal": 0.0},
            {"id": 2, "p_nominal": -0.1, "q_nominal": 0.0},
            {"id": 3, "p_nominal": -0.2, "q_nominal": 0.0}
        ],
        "branches": [
            {"from": 1, "to": 2, "r": 1.0, "x": 0.5},
            {"from": 2, "to": 3, "r": 1.0, "x": 0.5}
        ]
    }"#;

    #[test]
    fn three_bus_path() {
        let case = parse_native_case(PATH3).unwrap();
        assert_eq!(case.bus_count(), 3);
        assert_eq!(case.node_count(), 2);
        assert_eq!(parse_native_case(&to_native_json(&case)).unwrap(), case);
    }

    #[test]
    fn empty_branch_list_is_disconnected() {
        let text = r#"{"base_mva": 1, "nominal_voltage": 1, "slack": 1,
            "buses": [{"id": 1, "p_nominal": 0}, {"id": 2, "p_nominal": 0}], "branches": []}"#;
        assert!(matches!(parse_native_case(text), Err(Error::Structure(_))));
    }

    #[test]
    fn unknown_bus_is_parse_error() {
        let text = r#"{"base_mva": 1, "nominal_voltage": 1, "slack": 1,
            "buses": [{"id": 1, "p_nominal": 0}, {"id": 2, "p_nominal": 0}],
            "branches": [{"from": 1, "to": 9, "r": 1, "x": 1}]}"#;
        assert!(matches!(parse_native_case(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn schema_violation() {
        assert!(matches!(parse_native_case(r#"{"base_mva": "ten"}"#), Err(Error::Parse { .. })));
        let extra = PATH3.replacen("\"slack\": 1,", "\"slack\": 1, \"colour\": 3,", 1);
        assert!(matches!(parse_native_case(&extra), Err(Error::Parse { .. })));
    }

    #[test]
    fn duplicate_branch() {
        let text = PATH3.replace(r#"{"from": 2, "to": 3"#, r#"{"from": 2, "to": 1"#);
        assert!(matches!(parse_native_case(&text), Err(Error::Structure(_))));
    }
}
