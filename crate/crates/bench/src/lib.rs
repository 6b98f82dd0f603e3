//! Fixtures shared by the benchmarks.

use stirap_core::config::RunConfig;
use stirap_core::model::build_lambda;
use stirap_core::pulse::{make_stirap_pair, Envelope};
use stirap_core::{ModelSpec, TimeGrid};

/// Resonant Gaussian pair with peak `peak` and delay 1.2 on `t ∈ [−5, 5]`.
pub fn gaussian_lambda(peak: f64) -> (ModelSpec, TimeGrid) {
    let ps = make_stirap_pair(peak, peak, 1.0, 1.2, Envelope::Gaussian).unwrap();
    let model = build_lambda(ps, 0.0, 0.0, 0.0, Vec::new()).unwrap();
    (model, TimeGrid::uniform(-5.0, 5.0, 2).unwrap())
}

/// Configuration with a scan block over the two-photon detuning.
pub fn two_photon_scan(points: usize) -> RunConfig {
    RunConfig::from_toml(&format!(
        "schema_version = 1\n[system]\ntopology = \"lambda\"\n[pulses]\nkind = \"pair\"\npeak = 20.0\ndelay = 1.2\n\
         [protocol]\nname = \"stirap\"\n[scan]\nobservable = \"p_target\"\n\
         axes = [{{ path = \"system.two_photon\", linspace = [-40.0, 40.0, {points}] }}]\n"
    ))
    .unwrap()
}

/// Five-pair composite sequence at one grid point of the plateau map.
pub fn composite() -> RunConfig {
    RunConfig::from_toml(
        "schema_version = 1\n[system]\ntopology = \"lambda\"\n[pulses]\nkind = \"composite\"\npeak = 50.0\n\
         width = 0.5\ndelay = 0.3\n[protocol]\nname = \"composite\"\n",
    )
    .unwrap()
}
