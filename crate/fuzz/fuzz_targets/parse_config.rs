#![no_main]

use cholcov_cli::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = parse_config(text) {
        config.validate().expect("parsed configs are valid");
        for &method in &config.methods {
            let _ = config.estimator(method);
        }
    }
});
