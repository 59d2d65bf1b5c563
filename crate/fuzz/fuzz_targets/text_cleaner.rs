#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&order, rest)) = data.split_first() else {
        return;
    };
    let text = String::from_utf8_lossy(rest);
    if let Ok(corpus) = distgeom::textgraph::clean_and_split(&text, usize::from(order % 6)) {
        assert!(!corpus.is_empty());
        for i in 0..corpus.len() {
            assert!(corpus.words(i).len() >= corpus.ngram_order);
        }
    }
});
