#![no_main]
use libfuzzer_sys::fuzz_target;

use forge_core::filter::decode_scorer_response;

fuzz_target!(|data: &[u8]| {
    let _ = decode_scorer_response(data);
});
