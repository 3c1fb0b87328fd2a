#![no_main]

use libfuzzer_sys::fuzz_target;
use usc_raman::config::Zoom;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(z) = text.parse::<Zoom>() {
        assert!(z.center.is_finite() && z.half_width.is_finite() && z.half_width > 0.0);
    }
});
