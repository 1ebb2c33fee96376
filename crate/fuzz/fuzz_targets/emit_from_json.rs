#![no_main]

use cvxrw::emit::EmitDocument;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = EmitDocument::from_json(text) else { return };
    let out = doc.to_json();
    let again = EmitDocument::from_json(&out).expect("emitted documents decode");
    assert_eq!(again.to_json(), out);
});
