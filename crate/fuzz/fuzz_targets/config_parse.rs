//! Fuzzes the config-file parser: it must never panic on arbitrary text,
//! and anything it accepts must survive a render/re-parse round trip
//! unchanged (parsing is idempotent on its own output).

#![no_main]

use eds_wave::config::RawConfig;
use libfuzzer_sys::fuzz_target;

/// Re-serialize a parsed config in the file syntax it came from.
fn to_ini(cfg: &RawConfig) -> String {
    let mut out = String::new();
    for (k, v) in &cfg.top {
        out.push_str(&format!("{k} = {v}\n"));
    }
    for (name, map) in &cfg.sections {
        out.push_str(&format!("[{name}]\n"));
        for (k, v) in map {
            out.push_str(&format!("{k} = {v}\n"));
        }
    }
    out
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = RawConfig::parse(text) else { return };
    let rendered = to_ini(&cfg);
    let back = RawConfig::parse(&rendered)
        .unwrap_or_else(|e| panic!("rendering of a parsed config must reparse: {e}\n{rendered}"));
    assert_eq!(cfg, back, "parse -> render -> parse must be the identity");
});
