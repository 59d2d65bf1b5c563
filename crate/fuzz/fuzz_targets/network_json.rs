#![no_main]

use distgeom::ann::Network;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = Network::from_json(text) {
        if let Ok(z) = net.forward(&vec![0.5; net.inputs()]) {
            assert!(z.is_nan() || (0.0..=1.0).contains(&z));
        }
    }
});
