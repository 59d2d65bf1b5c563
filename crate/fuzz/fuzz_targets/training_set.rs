#![no_main]

use distgeom::textgraph::TrainingSet;
use libfuzzer_sys::fuzz_target;

// Input is the three files joined by NUL bytes: X csv, y csv, provenance json.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mut parts = text.splitn(3, '\0');
    let (x, y, prov) = (
        parts.next().unwrap_or(""),
        parts.next().unwrap_or(""),
        parts.next().unwrap_or(""),
    );
    if let Ok(ts) = TrainingSet::parse(x, y, prov) {
        assert_eq!(ts.x.rows(), ts.y.len());
    }
});
