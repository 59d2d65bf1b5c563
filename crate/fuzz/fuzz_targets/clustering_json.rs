#![no_main]

use distgeom::cluster::Clustering;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = Clustering::from_json(text) {
        assert_eq!(c.sizes().iter().sum::<usize>(), c.len());
    }
});
