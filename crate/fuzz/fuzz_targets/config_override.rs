//! Fuzzes the override path and the typed getters: each input line is fed
//! through `apply_override`, then every stored key is read back through
//! all typed accessors. Nothing here may panic; lossy values must come
//! back as clean `Err`s.

#![no_main]

use eds_wave::config::RawConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut cfg = RawConfig::default();
    for line in text.lines() {
        let _ = cfg.apply_override(line);
    }

    let mut paths: Vec<(String, String)> =
        cfg.top.keys().map(|k| (String::new(), k.clone())).collect();
    for (name, map) in &cfg.sections {
        for k in map.keys() {
            paths.push((name.clone(), k.clone()));
        }
    }
    for (section, key) in &paths {
        let _ = cfg.get_str(section, key);
        let _ = cfg.get_f64(section, key);
        let _ = cfg.get_u32(section, key);
        let _ = cfg.get_usize(section, key);
        let _ = cfg.get_bool(section, key);
        let _ = cfg.get_f64_list(section, key);
    }

    // The flat rendering must reapply cleanly when no value contains
    // whitespace (overrides keep values verbatim, so filter first).
    if cfg
        .top
        .values()
        .chain(cfg.sections.values().flat_map(|m| m.values()))
        .all(|v| !v.chars().any(char::is_whitespace))
    {
        let mut back = RawConfig::default();
        for part in cfg.render_flat().split_whitespace() {
            back.apply_override(part).expect("rendered overrides reapply");
        }
        assert_eq!(cfg, back, "flat render -> reapply must be the identity");
    }
});
