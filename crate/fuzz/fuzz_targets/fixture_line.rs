#![no_main]

use gapq::qg::FixtureLine;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|line: &str| {
    let _ = FixtureLine::parse(line, 1);
});
