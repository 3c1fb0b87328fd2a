#![no_main]

use libfuzzer_sys::fuzz_target;
use usc_raman::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match parse_config(text) {
        // an accepted config must resolve its grids without panicking
        Ok((cfg, _)) => {
            let _ = cfg.omega_s_grid();
            let _ = cfg.omega_l_grid();
        }
        Err(e) => assert!(e.is_config(), "non-config error from parser: {e}"),
    }
});
