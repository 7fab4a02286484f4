#![no_main]

use libfuzzer_sys::fuzz_target;
use relkern::TaskSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = serde_json::from_slice::<TaskSpec>(data) {
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<TaskSpec>(&text).unwrap(), spec);
        assert_eq!(spec.all_pairs().count(), spec.n() * (spec.n() - 1));
    }
});
