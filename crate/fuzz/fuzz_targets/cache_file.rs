#![no_main]

use std::io::Write;

use gapq::qg::ResponseCache;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(data).unwrap();
    if let Ok(cache) = ResponseCache::open(file.path()) {
        assert!(cache.len() <= data.len());
    }
});
