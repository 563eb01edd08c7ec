#![no_main]

use charnet::ingest::{episode_to_json, parse_segment_file};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(episode) = parse_segment_file(data) {
        // canonical output must parse back to the same segments
        let json = episode_to_json(&episode);
        let again = parse_segment_file(json.as_bytes()).expect("canonical JSON parses");
        assert_eq!(episode.segments, again.segments);
        let _ = episode.aggregate();
    }
});
