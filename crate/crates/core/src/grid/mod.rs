//! Network model: case files, incidence matrix, Laplacians and the graph
//! Fourier basis of the system Laplacian.

mod case;
mod laplacian;
mod matpower;
mod native;
mod power_factor;
mod psd;
mod spectral;

pub use case::{Branch, Bus, NetworkCase};
pub use laplacian::{build_incidence, IncidenceMatrix, LaplacianPair};
pub use matpower::parse_matpower_case;
pub use native::{parse_native_case, to_native_json};
pub use power_factor::{kappa_from_power_factor, PowerFactorProfile};
pub use psd::{check_psd_condition, PsdCertificate};
pub use spectral::{build_system_laplacian, SystemLaplacian};

use crate::error::Result;

/// The Baran–Wu 33-bus feeder shipped with the crate.
pub const CASE33BW: &str = include_str!("../../data/case33bw.m");

/// Parses the bundled `case33bw` feeder.
pub fn case33bw() -> NetworkCase {
    parse_matpower_case(CASE33BW).expect("bundled case33bw parses")
}

/// Reads a case from disk, choosing the parser from the extension
/// (`.json` → native, anything else → MATPOWER).
pub fn load_case(path: &std::path::Path) -> Result<NetworkCase> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        parse_native_case(&text)
    } else {
        parse_matpower_case(&text)
    }
}
