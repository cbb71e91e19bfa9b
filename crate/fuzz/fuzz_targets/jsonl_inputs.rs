#![no_main]

use gapq::plans::{PlanRecord, SummaryRecord};
use gapq::stats::{dataset_stats, Example};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = serde_json::from_str::<SummaryRecord>(text);
        let _ = serde_json::from_str::<PlanRecord>(text);
        let _ = serde_json::from_str::<Example>(text);
    }
    if let Ok(stats) = dataset_stats(data) {
        assert!(stats.documents <= stats.examples && stats.examples <= stats.references);
    }
});
