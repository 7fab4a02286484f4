#![no_main]

use libfuzzer_sys::fuzz_target;
use relkern::kernel::conjunctivity;
use relkern::KernelParams;

fuzz_target!(|data: &[u8]| {
    if let Ok(params) = serde_json::from_slice::<KernelParams>(data) {
        let text = serde_json::to_string(&params).unwrap();
        serde_json::from_str::<KernelParams>(&text).unwrap();
        let alpha = conjunctivity(&params);
        assert!((-1e-9..=1.0 + 1e-9).contains(&alpha), "alpha {alpha} out of range");
    }
});
