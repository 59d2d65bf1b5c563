#![no_main]

use distgeom::graphs::WeightedGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = WeightedGraph::from_edge_list(text) {
        let again =
            WeightedGraph::from_edge_list(&g.to_edge_list()).expect("written edge list parses");
        assert_eq!(again.n(), g.n());
        assert_eq!(again.m(), g.m());
    }
});
