#![no_main]

use charnet::ingest::parse_metrics_csv;
use charnet::stats::{correlate_all, CorrelationOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = parse_metrics_csv("fuzz", data) {
        if let Ok(ratings) = table.ratings() {
            let _ = correlate_all(&table.records, &ratings, &CorrelationOptions::default());
        }
    }
});
