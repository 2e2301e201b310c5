#![no_main]
use libfuzzer_sys::fuzz_target;

use forge_core::transcript::{parse_transcript_with_fallback_id, TranscriptFormat};

fuzz_target!(|data: &[u8]| {
    let _ = parse_transcript_with_fallback_id(data, TranscriptFormat::CaptionCue, Some("fuzz"));
});
