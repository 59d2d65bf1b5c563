#![no_main]

use distgeom::graphs::WeightedGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = WeightedGraph::from_json(text) {
        assert_eq!(
            WeightedGraph::from_json(&g.to_json()).expect("written graph parses"),
            g
        );
        if g.n() <= 4096 {
            let _ = g.is_connected();
        }
    }
});
