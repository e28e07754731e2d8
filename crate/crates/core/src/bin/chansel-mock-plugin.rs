//! Test double for the evaluator plugin protocol. Scores a subset by its
//! Jaccard similarity to `--planted`, or returns `--fitness` verbatim, and
//! can misbehave in several ways on request.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, Read, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use chansel::tensorio::{DatasetHeader, HEADER_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Behavior {
    Ok,
    WrongId,
    OutOfRange,
    Garbage,
    ExitAfterHello,
    NoHello,
    Hang,
    InBandError,
    IgnoreBye,
}

#[derive(Debug, Parser)]
struct Args {
    #[arg(long, value_enum, default_value = "ok")]
    behavior: Behavior,
    /// Constant fitness returned for every request.
    #[arg(long)]
    fitness: Option<f64>,
    /// Comma-separated planted channels.
    #[arg(long, value_delimiter = ',')]
    planted: Vec<usize>,
    #[arg(long, default_value = "mock")]
    name: String,
}

fn channels_in(path: &Path) -> io::Result<usize> {
    let mut buf = [0u8; HEADER_LEN];
    File::open(path)?.read_exact(&mut buf)?;
    DatasetHeader::parse(&buf)
        .map(|h| h.n_channels as usize)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
}

fn score(args: &Args, subset: &[usize]) -> f64 {
    if let Some(f) = args.fitness {
        return f;
    }
    let a: HashSet<usize> = subset.iter().copied().collect();
    let b: HashSet<usize> = args.planted.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

fn respond(args: &Args, req: &Value) -> Value {
    let id = req["id"].as_u64().unwrap_or(0);
    let subset: Vec<usize> = req["subset"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|v| v.as_u64())
                .map(|v| v as usize)
                .collect()
        })
        .unwrap_or_default();
    if args.behavior == Behavior::InBandError {
        return json!({"id": id, "error": "mock failure"});
    }
    let train = req["train"].as_str().unwrap_or_default();
    match channels_in(Path::new(train)) {
        Ok(c) => {
            if let Some(&bad) = subset.iter().find(|&&ch| ch >= c) {
                return json!({"id": id, "error": format!("channel {bad} out of range for {c} channels")});
            }
        }
        Err(e) => return json!({"id": id, "error": format!("cannot read {train}: {e}")}),
    }
    let warm = req["warm_key"].as_str();
    let key = format!(
        "mock:{}:{}",
        subset
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("-"),
        warm.map_or(0, |k| k
            .rsplit(':')
            .next()
            .and_then(|n| n.parse::<u32>().ok())
            .unwrap_or(0)
            + 1)
    );
    let fitness = match args.behavior {
        Behavior::OutOfRange => 1.3,
        _ => score(args, &subset),
    };
    let id = if args.behavior == Behavior::WrongId {
        id + 1000
    } else {
        id
    };
    json!({"id": id, "fitness": fitness, "state_key": key})
}

fn main() -> ExitCode {
    let args = Args::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.behavior == Behavior::NoHello {
        std::thread::sleep(Duration::from_secs(3600));
        return ExitCode::SUCCESS;
    }
    let hello = json!({"op": "hello", "protocol": 1, "name": args.name});
    if writeln!(out, "{hello}").and_then(|_| out.flush()).is_err() {
        return ExitCode::FAILURE;
    }
    if args.behavior == Behavior::ExitAfterHello {
        return ExitCode::from(7);
    }
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        let Ok(req) = serde_json::from_str::<Value>(&line) else {
            return ExitCode::FAILURE;
        };
        if req["op"] == "bye" {
            if args.behavior == Behavior::IgnoreBye {
                std::thread::sleep(Duration::from_secs(3600));
            }
            return ExitCode::SUCCESS;
        }
        let reply = match args.behavior {
            Behavior::Hang => {
                std::thread::sleep(Duration::from_secs(3600));
                continue;
            }
            Behavior::Garbage => "this is not json".to_string(),
            _ => respond(&args, &req).to_string(),
        };
        if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}
