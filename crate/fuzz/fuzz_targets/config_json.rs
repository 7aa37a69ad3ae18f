#![no_main]

use hyperfree::bench::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    match RunConfig::from_json_str(text) {
        Ok(config) => {
            // accepted configs are valid and survive a round trip
            config.validate().unwrap();
            let again = RunConfig::from_json_str(&config.to_json_string()).unwrap();
            assert_eq!(again, config);
            let _ = config.expected_sizes();
        }
        Err(e) => assert_eq!(e.exit_code(), 2),
    }
});
