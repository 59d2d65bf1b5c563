#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = distgeom::linalg::read_matrix_csv(data) {
        let text = distgeom::linalg::matrix_to_csv(&m);
        let back = distgeom::linalg::parse_matrix_csv(&text).expect("written matrix parses");
        assert_eq!((back.rows(), back.cols()), (m.rows(), m.cols()));
    }
});
