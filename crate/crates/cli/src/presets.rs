//! Configuration presets shipped with the binary.

pub const PRESETS: [(&str, &str); 7] = [
    ("sim-5.1", include_str!("../../../presets/sim-5.1.toml")),
    ("table-1", include_str!("../../../presets/table-1.toml")),
    ("table-2", include_str!("../../../presets/table-2.toml")),
    ("table-4", include_str!("../../../presets/table-4.toml")),
    ("fig-7", include_str!("../../../presets/fig-7.toml")),
    ("field-logpath", include_str!("../../../presets/field-logpath.toml")),
    ("field-multipath", include_str!("../../../presets/field-multipath.toml")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use tagtrack::config::{load_config, Format};

    #[test]
    fn every_preset_loads() {
        for (name, text) in PRESETS {
            let cfg = load_config(text, Format::Toml, &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.experiment.runs, 100, "{name}");
        }
        assert!(lookup("table-1").is_some());
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn study_preset_values() {
        let cfg = load_config(lookup("sim-5.1").unwrap(), Format::Toml, &[]).unwrap();
        assert_eq!(cfg.planner.alpha, 0.5);
        assert_eq!(cfg.planner.n_action_subset, 5);
        assert_eq!(cfg.scenario.n_targets, 10);
        assert_eq!(cfg.propagation.sigma_p, 4.22);
        let t4 = load_config(lookup("table-4").unwrap(), Format::Toml, &[]).unwrap();
        assert_eq!(t4.experiment.sweep.unwrap().values.len(), 7);
    }
}
