//! Bundled study cases.
//!
//! Two variants of the IEEE 14-bus system embedded with a DC network
//! (branch 4-5 replaced by the converter link; triangle topology for the
//! three-terminal variant), plus the unmodified AC-only system used as a
//! solver validation fixture. Emission coefficients, converter loss
//! coefficients and DC line resistances are documented illustrative
//! defaults; see `docs/case-format.md`.

use crate::model::{CaseError, NetworkCase};

const IEEE14_2T: &str = include_str!("../cases/ieee14_2t.json");
const IEEE14_3T: &str = include_str!("../cases/ieee14_3t.json");
const IEEE14_AC: &str = include_str!("../cases/ieee14_ac.json");

/// Returns a bundled case by name (`ieee14-2t` or `ieee14-3t`).
pub fn builtin_case(name: &str) -> Result<NetworkCase, CaseError> {
    match name {
        "ieee14-2t" => NetworkCase::from_json(IEEE14_2T),
        "ieee14-3t" => NetworkCase::from_json(IEEE14_3T),
        other => Err(CaseError::UnknownBuiltin(other.to_string())),
    }
}

/// The unmodified IEEE 14-bus AC system. Not part of the study-case API;
/// used for solver cross-validation and as a case-file format example.
pub fn ieee14_ac_reference() -> NetworkCase {
    NetworkCase::from_json(IEEE14_AC).expect("bundled reference case is valid")
}
