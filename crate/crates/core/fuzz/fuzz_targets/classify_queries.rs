#![no_main]

use libfuzzer_sys::fuzz_target;
use usc_raman::config::parse_queries;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(queries) = parse_queries(text) {
        assert!(queries.iter().all(|q| q.omega_l.is_finite() && q.omega_s.is_finite()));
    }
});
