#![no_main]

use hyperfree::bench::{parse_results_json, write_results, OutputFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_results_json(text) {
        let mut json = Vec::new();
        write_results(&rows, OutputFormat::Json, &mut json).unwrap();
        let again = parse_results_json(std::str::from_utf8(&json).unwrap()).unwrap();
        // NaN never compares equal; compare the re-encoded text instead
        let mut json2 = Vec::new();
        write_results(&again, OutputFormat::Json, &mut json2).unwrap();
        assert_eq!(json, json2);
        write_results(&rows, OutputFormat::Csv, std::io::sink()).unwrap();
    }
});
