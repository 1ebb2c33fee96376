#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Err(e) = cvxrw::parse_problem(text) {
        // end of input may be reported one line past the last
        let lines = text.split('\n').count();
        assert!(e.span.line >= 1 && e.span.line <= lines + 1, "{e} in {lines} lines");
        let _ = e.to_string();
    }
});
