//! Oracle spec mini-language: `wa:<path>`, `ngram:<path>:<n>:<delta>`,
//! `proc:<command>`, `tcp:<host>:<port>`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::CliError;
use crate::data::{load_wa, parse_strings};
use crate::oracle::{external_oracle, wa_oracle, BlackBox, Endpoint, NGramModel};

#[derive(Clone, Debug, PartialEq)]
pub enum OracleSpec {
    Wa(PathBuf),
    NGram { data: PathBuf, order: usize, delta: f64 },
    Process(String),
    Tcp(String),
}

impl FromStr for OracleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("oracle spec {s:?} needs a `kind:` prefix"))?;
        if rest.is_empty() {
            return Err(format!("oracle spec {s:?} is missing its argument"));
        }
        match kind {
            "wa" => Ok(OracleSpec::Wa(PathBuf::from(rest))),
            "ngram" => {
                let mut parts = rest.rsplitn(3, ':');
                let delta = parts.next().and_then(|d| d.parse::<f64>().ok());
                let order = parts.next().and_then(|n| n.parse::<usize>().ok());
                match (parts.next(), order, delta) {
                    (Some(path), Some(order), Some(delta)) if order >= 1 && delta > 0.0 => Ok(OracleSpec::NGram {
                        data: PathBuf::from(path),
                        order,
                        delta,
                    }),
                    _ => Err(format!("expected ngram:<path>:<n>:<delta>, got {s:?}")),
                }
            }
            "proc" => Ok(OracleSpec::Process(rest.to_string())),
            "tcp" => {
                let (_, port) = rest
                    .rsplit_once(':')
                    .ok_or_else(|| format!("expected tcp:<host>:<port>, got {s:?}"))?;
                port.parse::<u16>().map_err(|_| format!("bad port in {s:?}"))?;
                Ok(OracleSpec::Tcp(rest.to_string()))
            }
            other => Err(format!("unknown oracle kind {other:?}")),
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

impl OracleSpec {
    pub fn open(&self) -> Result<Box<dyn BlackBox>, CliError> {
        Ok(match self {
            OracleSpec::Wa(path) => {
                let wa = load_wa(&read_file(path)?).map_err(|e| CliError::input(path, e))?;
                Box::new(wa_oracle(wa))
            }
            OracleSpec::NGram { data, order, delta } => {
                let text = read_file(data)?;
                let ds = parse_strings(&text, &data.display().to_string()).map_err(|e| CliError::input(data, e))?;
                Box::new(NGramModel::train(&ds.strings, *order, *delta, ds.alphabet)?)
            }
            OracleSpec::Process(cmd) => Box::new(external_oracle(&Endpoint::Process(cmd.clone()), None)?),
            OracleSpec::Tcp(addr) => Box::new(external_oracle(&Endpoint::Tcp(addr.clone()), None)?),
        })
    }
}
