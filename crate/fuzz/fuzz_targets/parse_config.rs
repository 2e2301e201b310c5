#![no_main]
use libfuzzer_sys::fuzz_target;

use forge_core::pipeline::PipelineConfig;

fuzz_target!(|data: &[u8]| {
    let _ = PipelineConfig::from_json_bytes(data);
});
