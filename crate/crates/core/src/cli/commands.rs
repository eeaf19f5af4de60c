use std::fs;
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::spec::read_file;
use super::sweep::run_sweep;
use super::{
    BasisArgs, CliError, Command, DotArgs, EvalArgs, EvaluateArgs, ExtractArgs, RandomWaArgs, SampleArgs, Sampling,
    ServeArgs, EXIT_NUMERIC,
};
use crate::data::{load_wa, parse_solution, parse_strings, random_stochastic_wa, save_wa, strings_to_text};
use crate::dot::to_dot;
use crate::error::Error;
use crate::metrics::{
    count_nonpositive, perplexity, score_all, EvalRole, EvalSet, MetricsReport, PreparedReference, CSV_COLUMNS,
    DEFAULT_SAMPLED_SIZE,
};
use crate::oracle::server::{serve, serve_tcp};
use crate::oracle::BlackBox;
use crate::spectral::{extract_with_basis, prepare, Basis, ExtractionConfig, ReportProvenance, SamplingMode};
use crate::word::{Alphabet, Word};

/// Columns of every CSV written by `evaluate` and `sweep`.
pub(crate) fn csv_header() -> Vec<&'static str> {
    CSV_COLUMNS.iter().copied().chain(["eval_set", "status"]).collect()
}

pub(crate) fn ok_record(report: &MetricsReport) -> Vec<String> {
    let mut rec = report.csv_record();
    rec.push(report.eval_set.clone());
    rec.push("ok".to_string());
    rec
}

pub(crate) fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Extract(args) => cmd_extract(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Dot(args) => cmd_dot(args),
        Command::Serve(args) => cmd_serve(args),
        Command::RandomWa(args) => cmd_random_wa(args),
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn read_strings(path: &Path) -> Result<Vec<Word>, CliError> {
    let text = read_file(path)?;
    let ds = parse_strings(&text, &path.display().to_string()).map_err(|e| CliError::input(path, e))?;
    Ok(ds.strings)
}

pub(crate) fn extraction_config(
    alphabet: &Alphabet,
    p: usize,
    s: usize,
    rank: usize,
    basis: &BasisArgs,
    seed: u64,
) -> Result<ExtractionConfig, CliError> {
    let sampling = match (basis.sampling, &basis.dataset) {
        (Sampling::Uniform, None) => SamplingMode::Uniform,
        (Sampling::Generative, None) => SamplingMode::Generative,
        (Sampling::Dataset, Some(path)) => {
            let words = read_strings(path)?;
            for w in &words {
                alphabet.check(w)?;
            }
            SamplingMode::Dataset(words)
        }
        (Sampling::Dataset, None) => return Err(CliError::usage("--sampling dataset needs --dataset")),
        (_, Some(_)) => return Err(CliError::usage("--dataset only applies to --sampling dataset")),
    };
    let config = ExtractionConfig {
        sampling,
        rank_tolerance: basis.tol,
        ..ExtractionConfig::new(p, s, rank, basis.max_len, seed)
    };
    config.validate()?;
    Ok(config)
}

/// The test set from `--eval` (with optional solution) and the sampled set
/// from `--eval-sample`; a sampled set of the default size when neither is
/// given.
pub(crate) fn eval_sets(reference: &dyn BlackBox, args: &EvalArgs, seed: u64) -> Result<Vec<EvalSet>, CliError> {
    let mut sets = Vec::new();
    if let Some(path) = &args.eval {
        let strings: Vec<Word> = read_strings(path)?.into_iter().take(args.n_test).collect();
        for w in &strings {
            reference.alphabet().check(w)?;
        }
        let mut set = EvalSet::new(strings, EvalRole::Test)?;
        if let Some(sol_path) = &args.solution {
            let table = parse_solution(&read_file(sol_path)?).map_err(|e| CliError::input(sol_path, e))?;
            let probs: Vec<f64> = table.probabilities.into_iter().take(set.strings.len()).collect();
            set = set.with_reference(probs)?;
        }
        sets.push(set);
    }
    let n_sampled = match (args.eval_sample, sets.is_empty()) {
        (Some(n), _) => n,
        (None, true) => DEFAULT_SAMPLED_SIZE,
        (None, false) => 0,
    };
    if n_sampled > 0 {
        if !reference.capabilities().sample {
            return Err(Error::CapabilityMissing("sample").into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let strings = (0..n_sampled)
            .map(|_| reference.sample(&mut rng, args.eval_max_len))
            .collect::<Result<Vec<_>, _>>()?;
        sets.push(EvalSet::new(strings, EvalRole::Sampled)?);
    }
    Ok(sets)
}

fn cmd_extract(args: ExtractArgs) -> Result<(), CliError> {
    let oracle = args.oracle.open()?;
    let (wa, report, basis) = match &args.basis_file {
        Some(path) => {
            let basis = Basis::parse_dump(&read_file(path)?).map_err(|e| CliError::input(path, e))?;
            let (p, s) = (basis.prefixes().len(), basis.suffixes().len());
            let config = extraction_config(oracle.alphabet(), p, s, args.rank as usize, &args.basis, args.seed)?;
            let (wa, report) = extract_with_basis(oracle.as_ref(), basis.clone(), &config)?;
            (wa, report, basis)
        }
        None => {
            let config = extraction_config(
                oracle.alphabet(),
                args.p as usize,
                args.s as usize,
                args.rank as usize,
                &args.basis,
                args.seed,
            )?;
            let prepared = prepare(oracle.as_ref(), &config)?;
            let (wa, report) = prepared.extract(config.rank)?;
            (wa, report, prepared.blocks.basis)
        }
    };
    write_file(&args.out, &save_wa(&wa))?;
    if let Some(path) = &args.dump_basis {
        write_file(path, &basis.dump())?;
    }
    match &args.report {
        Some(path) => write_file(path, &report.to_text())?,
        None => print!("{}", report.to_text()),
    }
    eprintln!("elapsed: {:.3} s", report.elapsed.as_secs_f64());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let reference = args.reference.open()?;
    let candidate = args.candidate.open()?;
    let baseline = args.baseline.as_ref().map(|b| b.open()).transpose()?;
    if candidate.alphabet().size() != reference.alphabet().size() {
        return Err(CliError::usage("reference and candidate alphabets differ in size"));
    }
    let provenance = match &args.provenance {
        Some(path) => ReportProvenance::parse(&read_file(path)?).map_err(|e| CliError::input(path, e))?,
        None => ReportProvenance::default(),
    };
    let mut records = Vec::new();
    let mut out = String::new();
    for set in eval_sets(reference.as_ref(), &args.eval, args.seed)? {
        let prepared = PreparedReference::new(reference.as_ref(), &set)?;
        let baseline_perp = match &baseline {
            Some(b) => Some(perplexity(prepared.probabilities(), &score_all(b.as_ref(), &set.strings)?)?.perplexity),
            None => None,
        };
        let mut report = prepared.evaluate(candidate.as_ref(), baseline_perp)?;
        report.problem = args.problem.clone();
        report.p = provenance.prefixes;
        report.s = provenance.suffixes;
        report.rank = provenance.requested_rank;
        report.eff_rank = provenance.effective_rank;
        report.seed = Some(provenance.seed.unwrap_or(args.seed));
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&report.to_text());
        if args.audit_zeros {
            let nonpositive = count_nonpositive(&score_all(candidate.as_ref(), &set.strings)?);
            let pct = 100.0 * nonpositive as f64 / set.strings.len() as f64;
            out.push_str(&format!("audit_zeros: {nonpositive}/{} = {pct}\n", set.strings.len()));
            if pct != report.zeros_pct {
                print!("{out}");
                return Err(CliError {
                    code: EXIT_NUMERIC,
                    message: format!("zeros_pct {} disagrees with direct count {pct}", report.zeros_pct),
                });
            }
        }
        records.push(ok_record(&report));
    }
    print!("{out}");
    if let Some(path) = &args.csv {
        append_csv(path, &records)?;
    }
    Ok(())
}

/// Appends rows, writing the header first when the file is new or empty.
pub(crate) fn append_csv(path: &Path, records: &[Vec<String>]) -> Result<(), CliError> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(format!("cannot open {}: {e}", path.display())))?;
    let mut writer = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| CliError::io(format!("cannot write {}: {e}", path.display()));
    if fresh {
        writer.write_record(csv_header()).map_err(csv_err)?;
    }
    for rec in records {
        writer.write_record(rec).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let oracle = args.oracle.open()?;
    if !oracle.capabilities().sample {
        return Err(Error::CapabilityMissing("sample").into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let strings = (0..args.n)
        .map(|_| oracle.sample(&mut rng, args.max_len))
        .collect::<Result<Vec<_>, _>>()?;
    write_file(&args.out, &strings_to_text(&strings, oracle.alphabet().size()))
}

fn cmd_dot(args: DotArgs) -> Result<(), CliError> {
    if !(args.threshold >= 0.0) {
        return Err(CliError::usage("--threshold must be nonnegative"));
    }
    let wa = load_wa(&read_file(&args.wa)?).map_err(|e| CliError::input(&args.wa, e))?;
    let dot = to_dot(&wa, args.threshold);
    match &args.out {
        Some(path) => write_file(path, &dot),
        None => {
            print!("{dot}");
            Ok(())
        }
    }
}

fn cmd_serve(args: ServeArgs) -> Result<(), CliError> {
    let oracle: Arc<dyn BlackBox> = Arc::from(args.oracle.open()?);
    match &args.tcp {
        Some(addr) => {
            let listener = TcpListener::bind(addr).map_err(|e| CliError::io(format!("cannot bind {addr}: {e}")))?;
            let local = listener.local_addr()?;
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "listening on {local}")?;
            stdout.flush()?;
            drop(stdout);
            serve_tcp(oracle, listener)?;
        }
        None => serve(oracle.as_ref(), io::stdin().lock(), io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_random_wa(args: RandomWaArgs) -> Result<(), CliError> {
    let alphabet = Alphabet::new(args.alphabet as usize)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let wa = random_stochastic_wa(args.states as usize, &alphabet, &mut rng)?;
    write_file(&args.out, &save_wa(&wa))
}
