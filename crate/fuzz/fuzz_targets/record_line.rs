#![no_main]

use gapq::corpus::{chunk_document, to_third_person, RawRecord, RecordKind};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    let Ok(record) = RawRecord::from_json_line(line, 1) else {
        return;
    };
    let again = RawRecord::from_json_line(&record.to_json_line(), 1).expect("serialized record parses");
    assert_eq!(again, record);
    let _ = chunk_document(&record, 64);
    if record.kind() == RecordKind::Dialogue {
        let _ = to_third_person(&record);
    }
});
