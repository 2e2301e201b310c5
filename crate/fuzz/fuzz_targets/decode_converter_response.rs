#![no_main]
use libfuzzer_sys::fuzz_target;

use forge_core::convert::decode_converter_response;

fuzz_target!(|data: &[u8]| {
    let _ = decode_converter_response(data);
});
