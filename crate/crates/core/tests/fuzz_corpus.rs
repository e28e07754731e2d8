//! Replays the checked-in fuzz corpus through the same entry points as the
//! fuzz targets, so the seeds stay meaningful on a stable toolchain.

use std::io::Cursor;
use std::path::{Path, PathBuf};

use chansel::dgaff::Chromosome;
use chansel::evaluator::protocol::{parse_hello, parse_response};
use chansel::evaluator::PluginCommand;
use chansel::pipeline::EvaluatorSpec;
use chansel::tensorio::{decode_dataset, encode_dataset, read_dataset, DatasetHeader};
use chansel::RunReport;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn dataset_seeds() {
    let mut decoded = 0;
    for (_, data) in seeds("dataset_decode") {
        let _ = DatasetHeader::parse(&data);
        let streamed = read_dataset(&mut Cursor::new(&data));
        if let Ok(d) = decode_dataset(&data) {
            assert_eq!(encode_dataset(&d), data);
            assert!(streamed.is_ok());
            decoded += 1;
        }
    }
    assert!(decoded >= 3);
}

#[test]
fn protocol_seeds() {
    for (p, data) in seeds("protocol_line") {
        let line = String::from_utf8(data).unwrap();
        let name = p.file_name().unwrap().to_str().unwrap();
        let hello = parse_hello(&line);
        let resp = parse_response(&line, 1);
        match name {
            "hello" => assert!(hello.is_ok()),
            "ok" => assert_eq!(resp.unwrap().fitness, 0.75),
            _ => assert!(resp.is_err()),
        }
    }
}

#[test]
fn report_seeds() {
    for (p, data) in seeds("report_json") {
        let s = String::from_utf8(data).unwrap();
        let r = RunReport::from_json(&s).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let again = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(again.to_json(), r.to_json());
    }
}

#[test]
fn cli_spec_seeds() {
    for (_, data) in seeds("cli_specs") {
        let s = String::from_utf8(data).unwrap();
        let _ = EvaluatorSpec::parse(&s, Some(vec![0, 1]), 0.1);
        let _ = PluginCommand::parse(&s);
        if let Some(c) = Chromosome::parse(&s) {
            assert_eq!(c.to_string(), s);
        }
    }
}
