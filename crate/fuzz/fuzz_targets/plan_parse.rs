#![no_main]

use gapq::plans::{Plan, Strategy};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&first, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let strategy = Strategy::ALL[first as usize % Strategy::ALL.len()];
    if let Ok(plan) = Plan::parse(strategy, text) {
        // whatever parses must serialize to text that parses again
        let rebuilt = Plan::new(strategy, plan.units.clone());
        let _ = Plan::parse(strategy, &rebuilt.text);
    }
});
