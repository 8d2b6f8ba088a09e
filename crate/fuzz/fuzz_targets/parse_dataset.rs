#![no_main]

use cholcov::io::{parse_dataset, CsvOptions, LabelColumn};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // The first byte picks the reader options; the rest is the file.
    let Some((&mode, body)) = data.split_first() else {
        return;
    };
    let label_column = match mode % 4 {
        0 => None,
        1 => Some(LabelColumn::Last),
        2 => Some(LabelColumn::Index((mode / 4) as usize % 8)),
        _ => Some(LabelColumn::Name("class".into())),
    };
    let options = CsvOptions {
        has_header: mode & 0x80 != 0 || matches!(label_column, Some(LabelColumn::Name(_))),
        label_column,
    };
    if let Ok(sample) = parse_dataset(body, &options) {
        assert!(sample.n() >= 1 && sample.p() >= 1);
        assert!(sample.values().as_slice().iter().all(|v| v.is_finite()));
        if let Some(labels) = sample.labels() {
            assert_eq!(labels.len(), sample.n());
        }
    }
});
