#![no_main]
use libfuzzer_sys::fuzz_target;

use forge_core::transcript::{parse_transcript, TranscriptFormat};

fuzz_target!(|data: &[u8]| {
    // must never panic; malformed input is an Err, not a crash
    let _ = parse_transcript(data, TranscriptFormat::TimedJson);
});
