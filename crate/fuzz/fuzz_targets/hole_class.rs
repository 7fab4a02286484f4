#![no_main]

use libfuzzer_sys::fuzz_target;
use relkern_poker::HoleClass;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(class) = s.parse::<HoleClass>() {
        assert_eq!(class.to_string().parse::<HoleClass>().unwrap(), class);
        assert_eq!(HoleClass::from_index(class.index()).unwrap(), class);
    }
});
