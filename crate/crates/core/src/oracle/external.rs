//! Client side of the SEQBOX/1 line protocol.
//!
//! ```text
//! server: SEQBOX/1 <alphabet_size> <cap>[,<cap>...]
//! client: score <k> <s1> ... <sk>     server: <float>
//! client: dist <k> <s1> ... <sk>      server: <float> x (|alphabet| + 1)
//! client: quit
//! server on failure: ERR <message>
//! ```

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use rand::RngCore;

use super::{BlackBox, Capabilities};
use crate::automaton::{draw_clamped, NextSymbolDistribution};
use crate::error::{Error, Result};
use crate::word::{Alphabet, Symbol, Word};

pub const PROTOCOL_VERSION: &str = "SEQBOX/1";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Where an external black box lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    /// Shell command line; the child's stdin/stdout carry the protocol.
    Process(String),
    /// `host:port` of a listening server.
    Tcp(String),
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
}

impl Connection {
    fn send(&mut self, line: &str) -> Result<()> {
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.write_all(b"\n"))
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::transport(format!("write failed: {e}"), line))
    }

    fn recv(&mut self, timeout: Duration) -> Result<String> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::transport(format!("read failed: {e}"), "")),
            Err(RecvTimeoutError::Timeout) => Err(Error::transport(
                format!("no reply within {:.1}s", timeout.as_secs_f64()),
                "",
            )),
            Err(RecvTimeoutError::Disconnected) => Err(Error::transport("connection closed", "")),
        }
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        let _ = self.writer.write_all(b"quit\n");
        let _ = self.writer.flush();
        if let Some(child) = self.child.as_mut() {
            // closing stdin happens when `writer` drops; give the child a moment
            let deadline = Instant::now() + Duration::from_secs(2);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(10));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

fn spawn_line_reader<R: Read + Send + 'static>(reader: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut reader = BufReader::new(reader);
        loop {
            let mut line = String::new();
            match reader.read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {
                    let trimmed = line.trim_end_matches(['\n', '\r']).to_string();
                    if tx.send(Ok(trimmed)).is_err() {
                        break;
                    }
                }
                Err(e) => {
                    let _ = tx.send(Err(e));
                    break;
                }
            }
        }
    });
    rx
}

/// An oracle reached over SEQBOX/1. Requests on the connection are strictly
/// sequential; open several oracles for parallel querying.
pub struct ExternalOracle {
    alphabet: Alphabet,
    capabilities: Capabilities,
    timeout: Duration,
    conn: Mutex<Connection>,
}

impl ExternalOracle {
    /// Connects and performs the greeting handshake. When `alphabet` is
    /// given, the server's advertised size must match it.
    pub fn connect(endpoint: &Endpoint, alphabet: Option<Alphabet>, timeout: Duration) -> Result<Self> {
        let conn = match endpoint {
            Endpoint::Process(cmd) => {
                let mut child = Command::new("sh")
                    .arg("-c")
                    .arg(cmd)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| Error::transport(format!("cannot spawn oracle process: {e}"), cmd.as_str()))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Connection {
                    writer: Box::new(stdin),
                    lines: spawn_line_reader(stdout),
                    child: Some(child),
                }
            }
            Endpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr.as_str())
                    .map_err(|e| Error::transport(format!("cannot connect: {e}"), addr.as_str()))?;
                stream.set_nodelay(true).ok();
                let reader = stream.try_clone()?;
                Connection {
                    writer: Box::new(stream),
                    lines: spawn_line_reader(reader),
                    child: None,
                }
            }
        };
        Self::handshake(conn, alphabet, timeout)
    }

    fn handshake(mut conn: Connection, alphabet: Option<Alphabet>, timeout: Duration) -> Result<Self> {
        let greeting = conn.recv(timeout)?;
        let (size, caps) = parse_greeting(&greeting)?;
        let alphabet = match alphabet {
            Some(a) if a.size() != size => {
                return Err(Error::transport(
                    format!("server alphabet size {size} differs from expected {}", a.size()),
                    greeting,
                ))
            }
            Some(a) => a,
            None => Alphabet::new(size).map_err(|_| Error::transport("alphabet size 0", greeting.as_str()))?,
        };
        Ok(ExternalOracle {
            alphabet,
            capabilities: caps,
            timeout,
            conn: Mutex::new(conn),
        })
    }

    fn request(&self, verb: &str, word: &[Symbol]) -> Result<String> {
        self.alphabet.check(word)?;
        let mut line = format!("{verb} {}", word.len());
        for s in word {
            let _ = write!(line, " {s}");
        }
        let mut conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        conn.send(&line)?;
        let reply = conn.recv(self.timeout)?;
        if let Some(msg) = reply.strip_prefix("ERR") {
            return Err(Error::transport(
                format!("server error: {}", msg.trim()),
                reply.as_str(),
            ));
        }
        Ok(reply)
    }
}

fn parse_greeting(line: &str) -> Result<(usize, Capabilities)> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(PROTOCOL_VERSION) {
        return Err(Error::transport("unexpected greeting", line));
    }
    let size = parts
        .next()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&s| s > 0)
        .ok_or_else(|| Error::transport("bad alphabet size in greeting", line))?;
    let mut caps = Capabilities::SCORE_ONLY;
    let mut has_score = false;
    for cap in parts.next().unwrap_or("").split(',').filter(|c| !c.is_empty()) {
        match cap {
            "score" => has_score = true,
            "dist" => caps.dist = true,
            "sample" => {}
            _ => return Err(Error::transport(format!("unknown capability {cap:?}"), line)),
        }
    }
    if !has_score || parts.next().is_some() {
        return Err(Error::transport("malformed capability list", line));
    }
    // strings are sampled client-side by chaining `dist` requests
    caps.sample = caps.dist;
    Ok((size, caps))
}

fn parse_float(token: &str, line: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::transport("non-numeric reply", line))
}

impl BlackBox for ExternalOracle {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn score(&self, word: &[Symbol]) -> Result<f64> {
        let reply = self.request("score", word)?;
        parse_float(reply.trim(), &reply)
    }

    fn capabilities(&self) -> Capabilities {
        self.capabilities
    }

    fn next_dist(&self, prefix: &[Symbol]) -> Result<NextSymbolDistribution> {
        if !self.capabilities.dist {
            return Err(Error::CapabilityMissing("dist"));
        }
        let reply = self.request("dist", prefix)?;
        let probs = reply
            .split_whitespace()
            .map(|t| parse_float(t, &reply))
            .collect::<Result<Vec<_>>>()?;
        if probs.len() != self.alphabet.size() + 1 {
            return Err(Error::transport(
                format!("expected {} values, got {}", self.alphabet.size() + 1, probs.len()),
                reply,
            ));
        }
        NextSymbolDistribution::new(probs)
    }

    fn sample(&self, rng: &mut dyn RngCore, max_len: usize) -> Result<Word> {
        if !self.capabilities.sample {
            return Err(Error::CapabilityMissing("sample"));
        }
        let end = self.alphabet.size();
        let mut word = Vec::new();
        while word.len() < max_len {
            let dist = self.next_dist(&word)?;
            let choice = draw_clamped(dist.probs(), rng).ok_or_else(|| Error::DegeneratePrefix {
                prefix: Word::from(word.as_slice()),
                mass: 0.0,
            })?;
            if choice == end {
                break;
            }
            word.push(choice);
        }
        Ok(Word::from(word))
    }
}
