#![no_main]

use charnet::ingest::parse_ratings_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = parse_ratings_csv(data) {
        for (_, rating) in table.iter() {
            assert!((1.0..=10.0).contains(&rating));
        }
    }
});
