#![no_main]

use libfuzzer_sys::fuzz_target;
use relkern_poker::EquityMatrix;

fuzz_target!(|data: &[u8]| {
    if let Ok(eq) = EquityMatrix::read(data) {
        let mut buf = Vec::new();
        eq.write(&mut buf, &serde_json::Value::Null).unwrap();
        assert_eq!(EquityMatrix::read(buf.as_slice()).unwrap(), eq);
    }
});
