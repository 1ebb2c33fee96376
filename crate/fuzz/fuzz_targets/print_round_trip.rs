#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = cvxrw::parse_problem(text) else { return };
    let printed = cvxrw::print_problem(&p);
    let q = cvxrw::parse_problem(&printed).expect("printed problems parse");
    assert_eq!(cvxrw::print_problem(&q), printed);
});
