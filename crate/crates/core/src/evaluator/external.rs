//! Client side of the evaluator plugin protocol, plus a process pool that
//! exposes a set of plugin children as one [`Evaluator`].

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{
    encode_line, parse_hello, parse_response, Control, EvaluateRequest, ProtocolError,
};
use super::{ChannelSubset, EvalError, EvalOutcome, EvalRequest, Evaluator, FitnessRecord};

pub const SHUTDOWN_GRACE: Duration = Duration::from_secs(5);

/// Program and arguments used to launch a plugin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluginCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl PluginCommand {
    /// Splits a command line on whitespace.
    pub fn parse(line: &str) -> Result<Self, ProtocolError> {
        let mut parts = line.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| ProtocolError::Spawn("empty plugin command".into()))?;
        Ok(Self {
            program: program.into(),
            args: parts.map(String::from).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Timeouts {
    pub handshake: Duration,
    pub evaluate: Duration,
}

impl Default for Timeouts {
    fn default() -> Self {
        Self {
            handshake: Duration::from_secs(60),
            evaluate: Duration::from_secs(3600),
        }
    }
}

/// One plugin child process with at most one request in flight.
pub struct PluginClient {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    name: String,
    timeouts: Timeouts,
    poisoned: bool,
}

impl PluginClient {
    /// Launches the child and completes the handshake.
    pub fn spawn(cmd: &PluginCommand, timeouts: Timeouts) -> Result<Self, ProtocolError> {
        let mut child = Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ProtocolError::Spawn(format!("{}: {e}", cmd.program.display())))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut client = Self {
            child,
            stdin,
            lines: rx,
            next_id: 1,
            name: String::new(),
            timeouts,
            poisoned: false,
        };
        let line = client.read_line(timeouts.handshake, "hello")?;
        let hello = parse_hello(&line).inspect_err(|_| client.poisoned = true)?;
        client.name = hello.name;
        Ok(client)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_poisoned(&self) -> bool {
        self.poisoned
    }

    fn read_line(
        &mut self,
        timeout: Duration,
        what: &'static str,
    ) -> Result<String, ProtocolError> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => {
                self.poisoned = true;
                Err(ProtocolError::Io(e.to_string()))
            }
            Err(RecvTimeoutError::Timeout) => {
                self.poisoned = true;
                Err(ProtocolError::Timeout(timeout, what))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.poisoned = true;
                let status = self
                    .child
                    .wait()
                    .map(|s| s.to_string())
                    .unwrap_or_else(|e| e.to_string());
                Err(ProtocolError::ChildExited(format!(
                    "stdout closed while waiting for {what} ({status})"
                )))
            }
        }
    }

    fn send_line(&mut self, line: &str) -> Result<(), ProtocolError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| ProtocolError::ChildExited("stdin already closed".into()))?;
        let res = stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush());
        res.map_err(|e| {
            self.poisoned = true;
            ProtocolError::ChildExited(format!("write failed: {e}"))
        })
    }

    /// Sends one evaluate request and waits for its response.
    pub fn evaluate(
        &mut self,
        subset: &ChannelSubset,
        warm_key: Option<&str>,
        train: &Path,
        valid: &Path,
    ) -> Result<FitnessRecord, ProtocolError> {
        if self.poisoned {
            return Err(ProtocolError::ProtocolViolation(
                "client unusable after an earlier failure".into(),
            ));
        }
        let id = self.next_id;
        self.next_id += 1;
        let req = EvaluateRequest::new(
            id,
            subset.members().to_vec(),
            warm_key.map(String::from),
            train.to_path_buf(),
            valid.to_path_buf(),
        );
        self.send_line(&encode_line(&req))?;
        let line = self.read_line(self.timeouts.evaluate, "evaluate response")?;
        match parse_response(&line, id) {
            Ok(ev) => Ok(FitnessRecord {
                score: ev.fitness,
                state_key: ev.state_key,
                fresh: warm_key.is_none(),
            }),
            // In-band errors leave the stream in sync.
            Err(e @ ProtocolError::PluginError(_)) => Err(e),
            Err(e) => {
                self.poisoned = true;
                Err(e)
            }
        }
    }

    /// Sends `bye` and waits up to five seconds for a zero exit.
    pub fn shutdown(mut self) -> Result<ExitStatus, ProtocolError> {
        self.shutdown_inner()
    }

    fn shutdown_inner(&mut self) -> Result<ExitStatus, ProtocolError> {
        if let Ok(Some(status)) = self.child.try_wait() {
            return Ok(status);
        }
        let _ = self.send_line(&encode_line(&Control::Bye));
        self.stdin.take();
        let deadline = Instant::now() + SHUTDOWN_GRACE;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) if status.success() => return Ok(status),
                Ok(Some(status)) => {
                    return Err(ProtocolError::ChildExited(format!(
                        "nonzero exit after bye: {status}"
                    )))
                }
                Ok(None) if Instant::now() >= deadline => {
                    let _ = self.child.kill();
                    let _ = self.child.wait();
                    return Err(ProtocolError::Timeout(SHUTDOWN_GRACE, "exit after bye"));
                }
                Ok(None) => thread::sleep(Duration::from_millis(10)),
                Err(e) => return Err(ProtocolError::Io(e.to_string())),
            }
        }
    }
}

impl Drop for PluginClient {
    fn drop(&mut self) {
        if let Ok(None) = self.child.try_wait() {
            if self.poisoned {
                let _ = self.child.kill();
                let _ = self.child.wait();
            } else {
                let _ = self.shutdown_inner();
            }
        }
    }
}

/// Evaluates one subset over an already-connected client.
pub fn external_evaluate(
    client: &mut PluginClient,
    s: &ChannelSubset,
    warm_key: Option<&str>,
    train: &Path,
    valid: &Path,
) -> Result<FitnessRecord, ProtocolError> {
    client.evaluate(s, warm_key, train, valid)
}

struct Pool {
    idle: Vec<PluginClient>,
    alive: usize,
}

/// A pool of plugin children; each evaluation checks one out.
pub struct ExternalEvaluator {
    command: PluginCommand,
    name: String,
    pool: Mutex<Pool>,
    available: Condvar,
}

impl ExternalEvaluator {
    pub fn spawn(
        command: PluginCommand,
        size: usize,
        timeouts: Timeouts,
    ) -> Result<Self, ProtocolError> {
        let size = size.max(1);
        let idle = (0..size)
            .map(|_| PluginClient::spawn(&command, timeouts))
            .collect::<Result<Vec<_>, _>>()?;
        let name = idle[0].name().to_string();
        Ok(Self {
            command,
            name,
            pool: Mutex::new(Pool { idle, alive: size }),
            available: Condvar::new(),
        })
    }

    pub fn command(&self) -> &PluginCommand {
        &self.command
    }

    fn checkout(&self) -> Result<PluginClient, EvalError> {
        let mut pool = self.pool.lock().unwrap();
        loop {
            if let Some(c) = pool.idle.pop() {
                return Ok(c);
            }
            if pool.alive == 0 {
                return Err(EvalError::EvaluatorFailure(
                    "no live plugin processes".into(),
                ));
            }
            pool = self.available.wait(pool).unwrap();
        }
    }

    fn checkin(&self, client: PluginClient) {
        let mut pool = self.pool.lock().unwrap();
        if client.is_poisoned() {
            pool.alive -= 1;
            drop(client);
        } else {
            pool.idle.push(client);
        }
        self.available.notify_one();
    }

    /// Shuts every idle child down; returns the first failure.
    pub fn shutdown(self) -> Result<(), ProtocolError> {
        let pool = self.pool.into_inner().unwrap();
        let mut first_err = None;
        for c in pool.idle {
            if let Err(e) = c.shutdown() {
                first_err.get_or_insert(e);
            }
        }
        first_err.map_or(Ok(()), Err)
    }
}

impl Evaluator for ExternalEvaluator {
    fn name(&self) -> String {
        format!("external:{}", self.name)
    }

    fn evaluate(&self, req: &EvalRequest<'_>) -> Result<EvalOutcome, EvalError> {
        let (train, valid) = match (&req.ctx.train_path, &req.ctx.valid_path) {
            (Some(t), Some(v)) => (t.as_path(), v.as_path()),
            _ => {
                return Err(EvalError::EvaluatorFailure(
                    "external evaluator needs train/valid dataset paths".into(),
                ))
            }
        };
        let mut client = self.checkout()?;
        let result = client.evaluate(req.subset, req.warm_key, train, valid);
        self.checkin(client);
        let rec = result?;
        Ok(EvalOutcome {
            score: rec.score,
            state_key: rec.state_key,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_parsing() {
        let c = PluginCommand::parse("python3 -m plugin --gpu 0").unwrap();
        assert_eq!(c.program, PathBuf::from("python3"));
        assert_eq!(c.args, vec!["-m", "plugin", "--gpu", "0"]);
        assert!(PluginCommand::parse("   ").is_err());
    }
}
