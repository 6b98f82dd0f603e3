//! Shipped configuration files, embedded at build time.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.toml")),
    ("straddle5", include_str!("../presets/straddle5.toml")),
    ("tau-rabi", include_str!("../presets/tau-rabi.toml")),
    ("dd-map", include_str!("../presets/dd-map.toml")),
    ("composite-plateau", include_str!("../presets/composite-plateau.toml")),
    ("asymmetric", include_str!("../presets/asymmetric.toml")),
    ("asymmetric-lossy", include_str!("../presets/asymmetric-lossy.toml")),
    ("bright-stirap", include_str!("../presets/bright-stirap.toml")),
    ("chain4-detuned", include_str!("../presets/chain4-detuned.toml")),
    ("composite-single", include_str!("../presets/composite-single.toml")),
    ("ddp", include_str!("../presets/ddp.toml")),
    ("dephasing", include_str!("../presets/dephasing.toml")),
    ("half-stirap", include_str!("../presets/half-stirap.toml")),
    ("pap-train", include_str!("../presets/pap-train.toml")),
    ("polarization", include_str!("../presets/polarization.toml")),
    ("tripod-coincident", include_str!("../presets/tripod-coincident.toml")),
    ("tripod-csp", include_str!("../presets/tripod-csp.toml")),
    ("tripod-scp", include_str!("../presets/tripod-scp.toml")),
    ("two-photon-width", include_str!("../presets/two-photon-width.toml")),
    ("two-state", include_str!("../presets/two-state.toml")),
    ("waveguide3", include_str!("../presets/waveguide3.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
