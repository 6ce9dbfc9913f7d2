#![no_main]

use extrad::evaluation::Method;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(methods) = Method::parse_list(text) {
        let keys: Vec<&str> = methods.iter().map(|m| m.key()).collect();
        assert_eq!(Method::parse_list(&keys.join(",")).unwrap(), methods);
    }
});
