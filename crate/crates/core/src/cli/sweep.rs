//! Grid sweeps over basis sizes, ranks and seeds.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::commands::{csv_header, eval_sets, extraction_config, ok_record, write_file};
use super::{CliError, SweepArgs};
use crate::error::Error;
use crate::metrics::{MetricsReport, PreparedReference, CSV_COLUMNS};
use crate::oracle::{wa_oracle, BlackBox};
use crate::spectral::prepare;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepGrid {
    pub basis_sizes: Vec<(usize, usize)>,
    pub ranks: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    pub fn new(basis_sizes: Vec<(usize, usize)>, ranks: Vec<usize>, seeds: Vec<u64>) -> Result<Self, String> {
        if basis_sizes.is_empty() || ranks.is_empty() || seeds.is_empty() {
            return Err("sweep grid lists must be nonempty".to_string());
        }
        if ranks.contains(&0) || basis_sizes.iter().any(|&(p, s)| p == 0 || s == 0) {
            return Err("ranks and basis sizes must be at least 1".to_string());
        }
        Ok(SweepGrid {
            basis_sizes,
            ranks,
            seeds,
        })
    }

    pub fn cells(&self) -> usize {
        self.basis_sizes.len() * self.ranks.len() * self.seeds.len()
    }
}

/// Parses `300x300,400x400`.
pub fn parse_basis_sizes(text: &str) -> Result<Vec<(usize, usize)>, String> {
    text.split(',')
        .map(|item| {
            let (p, s) = item
                .trim()
                .split_once('x')
                .ok_or_else(|| format!("expected <p>x<s>, got {item:?}"))?;
            let parse = |v: &str| v.parse::<usize>().map_err(|_| format!("bad basis size {item:?}"));
            Ok((parse(p)?, parse(s)?))
        })
        .collect()
}

/// Parses comma-separated integers and inclusive `a-b` ranges, e.g. `1-5,10`.
pub fn parse_ranks(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        let parse = |v: &str| v.parse::<usize>().map_err(|_| format!("bad rank {item:?}"));
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse(a)?, parse(b)?);
                if a > b {
                    return Err(format!("empty rank range {item:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(parse(item)?),
        }
    }
    Ok(out)
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    text.split(',')
        .map(|v| v.trim().parse::<u64>().map_err(|_| format!("bad seed {v:?}")))
        .collect()
}

fn error_record(problem: &str, p: usize, s: usize, rank: usize, seed: u64, eval_set: &str, err: &Error) -> Vec<String> {
    let mut rec = vec![String::new(); CSV_COLUMNS.len()];
    rec[0] = problem.to_string();
    rec[1] = p.to_string();
    rec[2] = s.to_string();
    rec[3] = rank.to_string();
    rec[CSV_COLUMNS.len() - 1] = seed.to_string();
    rec.push(eval_set.to_string());
    rec.push(format!("error: {err}"));
    rec
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct Row {
    record: Vec<String>,
    report: Option<MetricsReport>,
}

/// All rows of one `(p, s, seed)` group, rank-major then eval set.
fn run_group(
    oracle: &dyn BlackBox,
    refs: &[PreparedReference],
    args: &SweepArgs,
    ranks: &[usize],
    (p, s): (usize, usize),
    seed: u64,
) -> Result<Vec<Row>, CliError> {
    let config = extraction_config(oracle.alphabet(), p, s, ranks[0], &args.basis, seed)?;
    let err_rows = |rank: usize, err: &Error| {
        refs.iter()
            .map(|r| Row {
                record: error_record(&args.problem, p, s, rank, seed, &r.eval_set().role.to_string(), err),
                report: None,
            })
            .collect::<Vec<_>>()
    };
    let prepared = match prepare(oracle, &config) {
        Ok(prep) => prep,
        Err(e) => return Ok(ranks.iter().flat_map(|&r| err_rows(r, &e)).collect()),
    };
    let mut rows = Vec::new();
    for &rank in ranks {
        let (wa, report) = match prepared.extract(rank) {
            Ok(x) => x,
            Err(e) => {
                rows.extend(err_rows(rank, &e));
                continue;
            }
        };
        let candidate = wa_oracle(wa);
        for r in refs {
            match r.evaluate(&candidate, None) {
                Ok(mut m) => {
                    m.problem = args.problem.clone();
                    m.p = Some(report.prefixes);
                    m.s = Some(report.suffixes);
                    m.rank = Some(rank);
                    m.eff_rank = Some(report.effective_rank);
                    m.seed = Some(seed);
                    rows.push(Row {
                        record: ok_record(&m),
                        report: Some(m),
                    });
                }
                Err(e) => rows.push(Row {
                    record: error_record(&args.problem, p, s, rank, seed, &r.eval_set().role.to_string(), &e),
                    report: None,
                }),
            }
        }
    }
    Ok(rows)
}

fn best_by<'a>(
    reports: impl Iterator<Item = &'a MetricsReport>,
    key: impl Fn(&MetricsReport) -> Option<f64>,
) -> Option<&'a MetricsReport> {
    // First maximum in row order wins ties.
    reports.fold(None, |best: Option<&MetricsReport>, m| {
        match (key(m), best.and_then(&key)) {
            (Some(v), Some(b)) if v > b => Some(m),
            (Some(_), None) => Some(m),
            _ => best,
        }
    })
}

/// Best rows per eval set by NDCG5 and by perplexity ratio.
pub(crate) fn summarize(reports: &[MetricsReport]) -> String {
    let mut out = String::from("eval_set,criterion,problem,p,s,rank,eff_rank,seed,ndcg5,ratio\n");
    let mut sets: Vec<&str> = Vec::new();
    for m in reports {
        if !sets.contains(&m.eval_set.as_str()) {
            sets.push(&m.eval_set);
        }
    }
    for set in sets {
        let of_set = || reports.iter().filter(move |m| m.eval_set == set);
        let criteria: [(&str, Option<&MetricsReport>); 2] = [
            ("ndcg5", best_by(of_set(), |m| m.ndcg5)),
            (
                "ratio",
                best_by(of_set(), |m| Some(m.perplexity_ratio).filter(|r| r.is_finite())),
            ),
        ];
        for (name, best) in criteria {
            if let Some(m) = best {
                let _ = writeln!(
                    out,
                    "{set},{name},{},{},{},{},{},{},{},{}",
                    m.problem,
                    opt(m.p),
                    opt(m.s),
                    opt(m.rank),
                    opt(m.eff_rank),
                    opt(m.seed),
                    opt(m.ndcg5),
                    m.perplexity_ratio
                );
            }
        }
    }
    out
}

pub(crate) fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let seeds = match &args.seeds {
        Some(text) => parse_seeds(text).map_err(CliError::usage)?,
        None => vec![args.seed],
    };
    let grid = SweepGrid::new(
        parse_basis_sizes(&args.basis_sizes).map_err(CliError::usage)?,
        parse_ranks(&args.ranks).map_err(CliError::usage)?,
        seeds,
    )
    .map_err(CliError::usage)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage(format!("cannot start workers: {e}")))?;

    let oracle = args.oracle.open()?;
    let oracle = oracle.as_ref();
    let rows: Vec<Row> = pool.install(|| -> Result<Vec<Row>, CliError> {
        let refs = eval_sets(oracle, &args.eval, args.seed)?
            .iter()
            .map(|set| PreparedReference::new(oracle, set))
            .collect::<Result<Vec<_>, _>>()?;
        let groups: Vec<((usize, usize), u64)> = grid
            .basis_sizes
            .iter()
            .flat_map(|&ps| grid.seeds.iter().map(move |&seed| (ps, seed)))
            .collect();
        let per_group = groups
            .par_iter()
            .map(|&(ps, seed)| run_group(oracle, &refs, &args, &grid.ranks, ps, seed))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(per_group.into_iter().flatten().collect())
    })?;

    let mut writer = csv::Writer::from_path(&args.out)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", args.out.display())))?;
    let csv_err = |e: csv::Error| CliError::io(format!("cannot write {}: {e}", args.out.display()));
    writer.write_record(csv_header()).map_err(csv_err)?;
    for row in &rows {
        writer.write_record(&row.record).map_err(csv_err)?;
    }
    writer.flush()?;

    let reports: Vec<MetricsReport> = rows.into_iter().filter_map(|r| r.report).collect();
    let summary = summarize(&reports);
    print!("{summary}");
    if let Some(path) = &args.summary {
        write_file(path, &summary)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grid_lists() {
        assert_eq!(parse_ranks("1-3,7"), Ok(vec![1, 2, 3, 7]));
        assert_eq!(parse_ranks("1-100").unwrap().len(), 100);
        assert!(parse_ranks("5-2").is_err());
        assert!(parse_ranks("x").is_err());
        assert_eq!(parse_basis_sizes("300x300, 400x200"), Ok(vec![(300, 300), (400, 200)]));
        assert!(parse_basis_sizes("300").is_err());
        assert_eq!(SweepGrid::new(vec![(1, 2)], vec![1, 2], vec![0, 1]).unwrap().cells(), 4);
        assert!(SweepGrid::new(vec![(1, 2)], vec![0], vec![0]).is_err());
        assert!(SweepGrid::new(vec![], vec![1], vec![0]).is_err());
    }

    #[test]
    fn summary_picks_first_maximum() {
        let row = |rank, ndcg5, ratio| MetricsReport {
            eval_set: "test".into(),
            rank: Some(rank),
            ndcg5,
            perplexity_ratio: ratio,
            ..MetricsReport::default()
        };
        let reports = [
            row(1, Some(0.5), 0.9),
            row(2, Some(0.8), 0.7),
            row(3, Some(0.8), 0.95),
            row(4, None, 0.1),
        ];
        let summary = summarize(&reports);
        let lines: Vec<&str> = summary.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("test,ndcg5,,,,2,"), "{}", lines[1]);
        assert!(lines[2].starts_with("test,ratio,,,,3,"), "{}", lines[2]);
    }
}
