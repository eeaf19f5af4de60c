//! A minimal SEQBOX/1 server for any in-process [`BlackBox`].
//!
//! Used by the `serve` subcommand and as a loopback peer for the client.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;

use super::external::PROTOCOL_VERSION;
use super::BlackBox;
use crate::word::Symbol;

/// Formats a reply float with 17 significant digits.
pub fn format_reply(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn greeting(model: &dyn BlackBox) -> String {
    let caps = model.capabilities();
    let mut list = String::from("score");
    if caps.dist {
        list.push_str(",dist");
    }
    if caps.sample {
        list.push_str(",sample");
    }
    format!("{PROTOCOL_VERSION} {} {list}", model.alphabet().size())
}

fn parse_request(tokens: &[&str], alphabet_size: usize) -> Result<Vec<Symbol>, String> {
    let (count, rest) = tokens.split_first().ok_or("missing length")?;
    let k: usize = count.parse().map_err(|_| "bad length".to_string())?;
    if rest.len() != k {
        return Err(format!("declared {k} symbols, got {}", rest.len()));
    }
    rest.iter()
        .map(|t| {
            let s: usize = t.parse().map_err(|_| format!("bad symbol {t:?}"))?;
            if s >= alphabet_size {
                Err("symbol out of range".to_string())
            } else {
                Ok(s)
            }
        })
        .collect()
}

fn respond(model: &dyn BlackBox, line: &str) -> Option<String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let size = model.alphabet().size();
    let reply = match tokens.split_first() {
        Some((&"quit", _)) => return None,
        Some((&"score", rest)) => parse_request(rest, size)
            .and_then(|w| model.score(&w).map_err(|e| e.to_string()))
            .map(format_reply),
        Some((&"dist", rest)) => parse_request(rest, size)
            .and_then(|w| model.next_dist(&w).map_err(|e| e.to_string()))
            .map(|d| d.probs().iter().map(|&p| format_reply(p)).collect::<Vec<_>>().join(" ")),
        Some((verb, _)) => Err(format!("unknown request {verb:?}")),
        None => Err("empty request".to_string()),
    };
    Some(reply.unwrap_or_else(|msg| format!("ERR {msg}")))
}

/// Serves one connection until `quit` or end of input.
pub fn serve<R: BufRead, W: Write>(model: &dyn BlackBox, reader: R, writer: W) -> io::Result<()> {
    let mut writer = BufWriter::new(writer);
    writeln!(writer, "{}", greeting(model))?;
    writer.flush()?;
    for line in reader.lines() {
        match respond(model, &line?) {
            Some(reply) => {
                writeln!(writer, "{reply}")?;
                writer.flush()?;
            }
            None => break,
        }
    }
    Ok(())
}

/// Accepts connections forever, one thread per connection.
pub fn serve_tcp(model: Arc<dyn BlackBox>, listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        stream.set_nodelay(true).ok();
        let model = Arc::clone(&model);
        thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(s) => BufReader::new(s),
                Err(_) => return,
            };
            let _ = serve(model.as_ref(), reader, stream);
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_state_pfa;
    use crate::oracle::wa_oracle;

    fn transcript(input: &str) -> Vec<String> {
        let o = wa_oracle(two_state_pfa());
        let mut out = Vec::new();
        serve(&o, input.as_bytes(), &mut out).unwrap();
        String::from_utf8(out).unwrap().lines().map(str::to_string).collect()
    }

    #[test]
    fn answers_requests_in_order() {
        let lines = transcript("score 1 0\nscore 0\ndist 0\nscore 1 9\nfoo\nquit\nscore 1 0\n");
        assert_eq!(lines[0], "SEQBOX/1 2 score,dist,sample");
        assert_eq!(lines[1].parse::<f64>().unwrap(), 1.0 / 24.0);
        assert_eq!(lines[2].parse::<f64>().unwrap(), 0.0);
        let dist: f64 = lines[3].split(' ').map(|t| t.parse::<f64>().unwrap()).sum();
        assert!((dist - 1.0).abs() < 1e-12);
        assert_eq!(lines[4], "ERR symbol out of range");
        assert!(lines[5].starts_with("ERR unknown request"));
        assert_eq!(lines.len(), 6, "nothing answered after quit");
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let lines = transcript("score 2 0\n");
        assert!(lines[1].starts_with("ERR declared 2"));
    }
}
