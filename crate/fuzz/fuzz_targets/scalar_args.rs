#![no_main]

use libfuzzer_sys::fuzz_target;
use relkern::analysis::Predictor;
use relkern::features::Nonlinearity;
use relkern::Ridge;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = s.parse::<Ridge>() {
        assert_eq!(r.to_string().parse::<Ridge>().unwrap(), r);
    }
    if let Ok(p) = s.parse::<Predictor>() {
        assert_eq!(p.as_str().parse::<Predictor>().unwrap(), p);
    }
    if let Ok(n) = s.parse::<Nonlinearity>() {
        assert_eq!(n.as_str().parse::<Nonlinearity>().unwrap(), n);
    }
});
