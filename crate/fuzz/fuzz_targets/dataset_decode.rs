#![no_main]

use std::io::Cursor;

use chansel::tensorio::{decode_dataset, encode_dataset, read_dataset, DatasetHeader};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = DatasetHeader::parse(data);
    let streamed = read_dataset(&mut Cursor::new(data));
    if let Ok(d) = decode_dataset(data) {
        assert_eq!(encode_dataset(&d), data);
        assert!(streamed.is_ok());
    }
});
