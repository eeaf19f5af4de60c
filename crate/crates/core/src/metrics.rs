//! Fidelity metrics between a reference model and a candidate.
//!
//! Distribution metrics (perplexity, KL divergence) compare string
//! probabilities over an evaluation set; ranking metrics (NDCG, WER)
//! compare next-symbol predictions after every prefix of every evaluation
//! string. All logarithms are base 2.

use std::fmt::{self, Write as _};

use rand::RngCore;
use rayon::prelude::*;

use crate::automaton::NextSymbolDistribution;
use crate::error::{Error, Result};
use crate::format_float;
use crate::oracle::BlackBox;
use crate::word::Word;

/// Floor substituted for nonpositive candidate probabilities.
pub const DEFAULT_EPSILON: f64 = 1e-30;

pub const DEFAULT_TEST_SIZE: usize = 1000;
pub const DEFAULT_SAMPLED_SIZE: usize = 2000;

const SUM_TOLERANCE: f64 = 1e-9;

/// Returns `x` when positive, otherwise `epsilon`, with a flag telling
/// whether the value was replaced.
pub fn clamp_probability(x: f64, epsilon: f64) -> (f64, bool) {
    if x > 0.0 {
        (x, false)
    } else {
        (epsilon, true)
    }
}

/// Scales nonnegative values to sum to one.
pub fn normalize(values: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = values.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::invalid("cannot normalize values with nonpositive total"));
    }
    Ok(values.iter().map(|v| v / total).collect())
}

/// Shannon entropy in bits.
pub fn entropy_bits(reference: &[f64]) -> f64 {
    -reference
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>()
}

/// Candidate probabilities after clamping and renormalization over the set.
#[derive(Clone, Debug, PartialEq)]
pub struct ClampedCandidate {
    pub probabilities: Vec<f64>,
    pub clamped: usize,
}

impl ClampedCandidate {
    pub fn new(scores: &[f64], epsilon: f64) -> Result<Self> {
        let mut clamped = 0;
        let raw: Vec<f64> = scores
            .iter()
            .map(|&x| {
                let (v, hit) = clamp_probability(x, epsilon);
                clamped += usize::from(hit);
                v
            })
            .collect();
        Ok(ClampedCandidate {
            probabilities: normalize(&raw)?,
            clamped,
        })
    }

    pub fn zeros_pct(&self) -> f64 {
        100.0 * self.clamped as f64 / self.probabilities.len() as f64
    }
}

fn check_reference(reference: &[f64], candidate: &[f64]) -> Result<()> {
    if reference.is_empty() {
        return Err(Error::invalid("evaluation set is empty"));
    }
    if reference.len() != candidate.len() {
        return Err(Error::invalid(format!(
            "{} reference values for {} candidate scores",
            reference.len(),
            candidate.len()
        )));
    }
    if reference.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::invalid("reference probabilities must be nonnegative"));
    }
    let total: f64 = reference.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::invalid(format!("reference sums to {total}, not 1")));
    }
    Ok(())
}

fn cross_entropy(reference: &[f64], candidate: &[f64]) -> f64 {
    -reference
        .iter()
        .zip(candidate)
        .filter(|(&p, _)| p > 0.0)
        .map(|(p, q)| p * q.log2())
        .sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerplexityOutcome {
    pub perplexity: f64,
    pub clamped: usize,
    pub zeros_pct: f64,
}

/// `2^(-sum ref * log2 cand)` with candidate scores clamped at `epsilon` and
/// normalized over the set. `reference` must already sum to one.
pub fn perplexity_with(reference: &[f64], candidate: &[f64], epsilon: f64) -> Result<PerplexityOutcome> {
    check_reference(reference, candidate)?;
    let cand = ClampedCandidate::new(candidate, epsilon)?;
    Ok(PerplexityOutcome {
        perplexity: cross_entropy(reference, &cand.probabilities).exp2(),
        clamped: cand.clamped,
        zeros_pct: cand.zeros_pct(),
    })
}

pub fn perplexity(reference: &[f64], candidate: &[f64]) -> Result<PerplexityOutcome> {
    perplexity_with(reference, candidate, DEFAULT_EPSILON)
}

/// `Perp(ref, a) / Perp(ref, b)`; above one when `b` fits the reference better.
pub fn perplexity_ratio(reference: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(perplexity(reference, a)?.perplexity / perplexity(reference, b)?.perplexity)
}

/// KL divergence in bits after the same clamping and normalization as
/// [`perplexity`].
pub fn kl_divergence(reference: &[f64], candidate: &[f64]) -> Result<f64> {
    check_reference(reference, candidate)?;
    let cand = ClampedCandidate::new(candidate, DEFAULT_EPSILON)?;
    Ok(reference
        .iter()
        .zip(&cand.probabilities)
        .filter(|(&p, _)| p > 0.0)
        .map(|(p, q)| p * (p / q).log2())
        .sum())
}

/// Outcome indices sorted by decreasing probability; ties keep ascending
/// index, which puts the end symbol last.
pub fn ranking(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    order
}

fn dcg(reference: &[f64], order: &[usize], n: usize) -> f64 {
    order
        .iter()
        .take(n)
        .enumerate()
        .map(|(k, &sym)| reference[sym] / ((k + 2) as f64).log2())
        .sum()
}

/// NDCG at depth `n` for one prefix: gains are reference probabilities of
/// the candidate's top-`n` ranking, discounted by `log2(k + 1)` at position
/// `k = 1..n`, over the same sum for the reference's own ranking. `None`
/// when the ideal gain is not positive.
pub fn ndcg_at(reference: &[f64], candidate: &[f64], n: usize) -> Option<f64> {
    let ideal = dcg(reference, &ranking(reference), n);
    if !(ideal > 0.0) {
        return None;
    }
    Some(dcg(reference, &ranking(candidate), n) / ideal)
}

/// True when the candidate's most likely next outcome differs from the
/// reference's.
pub fn top1_mismatch(reference: &[f64], candidate: &[f64]) -> bool {
    ranking(reference)[0] != ranking(candidate)[0]
}

/// Aggregated next-symbol agreement over all prefixes of an evaluation set.
#[derive(Clone, Debug, PartialEq)]
pub struct RankingScores {
    /// `(n, mean NDCG_n)` for each requested depth.
    pub ndcg: Vec<(usize, f64)>,
    pub wer: f64,
    /// Prefixes that entered the averages.
    pub prefixes: usize,
    /// Prefixes without usable reference mass.
    pub skipped: usize,
    /// Prefixes where the candidate gave no distribution; scored as NDCG 0
    /// and a WER error.
    pub candidate_failures: usize,
}

impl RankingScores {
    pub fn ndcg(&self, n: usize) -> Option<f64> {
        self.ndcg.iter().find(|(k, _)| *k == n).map(|(_, v)| *v)
    }
}

fn dists_per_prefix(model: &dyn BlackBox, word: &[usize]) -> Result<Vec<Option<NextSymbolDistribution>>> {
    match model.prefix_dists(word) {
        Ok(d) => Ok(d.into_iter().map(Some).collect()),
        Err(e) if e.is_numeric() => Ok((0..=word.len()).map(|i| model.next_dist(&word[..i]).ok()).collect()),
        Err(e) => Err(e),
    }
}

#[derive(Default)]
struct Partial {
    ndcg: Vec<f64>,
    mismatches: usize,
    prefixes: usize,
    skipped: usize,
    candidate_failures: usize,
}

/// NDCG at each depth in `depths` and WER, averaged over every prefix
/// (λ through the full string) of every evaluation string.
pub fn ranking_scores(
    reference: &dyn BlackBox,
    candidate: &dyn BlackBox,
    strings: &[Word],
    depths: &[usize],
) -> Result<RankingScores> {
    let refs = reference_dists(reference, strings)?;
    ranking_against(&refs, candidate, strings, depths)
}

type PrefixDists = Vec<Vec<Option<NextSymbolDistribution>>>;

fn reference_dists(reference: &dyn BlackBox, strings: &[Word]) -> Result<PrefixDists> {
    if !reference.capabilities().dist {
        return Err(Error::CapabilityMissing("dist"));
    }
    strings.par_iter().map(|w| dists_per_prefix(reference, w)).collect()
}

fn ranking_against(
    refs: &PrefixDists,
    candidate: &dyn BlackBox,
    strings: &[Word],
    depths: &[usize],
) -> Result<RankingScores> {
    if depths.contains(&0) {
        return Err(Error::invalid("NDCG depth must be at least 1"));
    }
    if !candidate.capabilities().dist {
        return Err(Error::CapabilityMissing("dist"));
    }
    let partials = strings
        .par_iter()
        .zip(refs.par_iter())
        .map(|(w, refs)| -> Result<Partial> {
            let cands = dists_per_prefix(candidate, w)?;
            let mut part = Partial {
                ndcg: vec![0.0; depths.len()],
                ..Partial::default()
            };
            for (r, c) in refs.iter().zip(&cands) {
                let Some(r) = r.as_ref().filter(|r| r.probs().iter().any(|&p| p > 0.0)) else {
                    part.skipped += 1;
                    continue;
                };
                part.prefixes += 1;
                match c {
                    Some(c) => {
                        for (acc, &n) in part.ndcg.iter_mut().zip(depths) {
                            *acc += ndcg_at(r.probs(), c.probs(), n).unwrap_or(0.0);
                        }
                        part.mismatches += usize::from(top1_mismatch(r.probs(), c.probs()));
                    }
                    None => {
                        part.candidate_failures += 1;
                        part.mismatches += 1;
                    }
                }
            }
            Ok(part)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = Partial {
        ndcg: vec![0.0; depths.len()],
        ..Partial::default()
    };
    for p in partials {
        for (acc, v) in total.ndcg.iter_mut().zip(&p.ndcg) {
            *acc += v;
        }
        total.mismatches += p.mismatches;
        total.prefixes += p.prefixes;
        total.skipped += p.skipped;
        total.candidate_failures += p.candidate_failures;
    }
    if total.prefixes == 0 {
        return Err(Error::invalid("no prefix with positive reference mass"));
    }
    let denom = total.prefixes as f64;
    Ok(RankingScores {
        ndcg: depths.iter().zip(&total.ndcg).map(|(&n, v)| (n, v / denom)).collect(),
        wer: total.mismatches as f64 / denom,
        prefixes: total.prefixes,
        skipped: total.skipped,
        candidate_failures: total.candidate_failures,
    })
}

pub fn ndcg(reference: &dyn BlackBox, candidate: &dyn BlackBox, strings: &[Word], n: usize) -> Result<f64> {
    Ok(ranking_scores(reference, candidate, strings, &[n])?.ndcg[0].1)
}

pub fn wer(reference: &dyn BlackBox, candidate: &dyn BlackBox, strings: &[Word]) -> Result<f64> {
    Ok(ranking_scores(reference, candidate, strings, &[1])?.wer)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalRole {
    /// Held-out strings supplied with the problem.
    Test,
    /// Strings sampled from the black box.
    Sampled,
}

impl fmt::Display for EvalRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalRole::Test => "test",
            EvalRole::Sampled => "sampled",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    pub strings: Vec<Word>,
    pub role: EvalRole,
    /// Reference probabilities per string, e.g. from a solution file.
    pub reference: Option<Vec<f64>>,
}

impl EvalSet {
    pub fn new(strings: Vec<Word>, role: EvalRole) -> Result<Self> {
        if strings.is_empty() {
            return Err(Error::invalid("evaluation set is empty"));
        }
        Ok(EvalSet {
            strings,
            role,
            reference: None,
        })
    }

    pub fn with_reference(mut self, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != self.strings.len() {
            return Err(Error::invalid(
                "reference probabilities do not match the evaluation set",
            ));
        }
        if probabilities.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::invalid("reference probabilities must be positive"));
        }
        self.reference = Some(probabilities);
        Ok(self)
    }
}

/// Takes the first `n_test` test strings and samples `n_sampled` strings
/// (duplicates kept) from the oracle.
pub fn build_eval_sets(
    oracle: &dyn BlackBox,
    test_strings: &[Word],
    n_test: usize,
    n_sampled: usize,
    max_len: usize,
    rng: &mut dyn RngCore,
) -> Result<(EvalSet, EvalSet)> {
    if !oracle.capabilities().sample {
        return Err(Error::CapabilityMissing("sample"));
    }
    let test = EvalSet::new(test_strings.iter().take(n_test).cloned().collect(), EvalRole::Test)?;
    let sampled = (0..n_sampled)
        .map(|_| oracle.sample(rng, max_len))
        .collect::<Result<Vec<_>>>()?;
    Ok((test, EvalSet::new(sampled, EvalRole::Sampled)?))
}

/// Scores each evaluation string; fails on the first query error.
pub fn score_all(model: &dyn BlackBox, strings: &[Word]) -> Result<Vec<f64>> {
    strings
        .par_iter()
        .map(|w| {
            model.score(w).map_err(|e| Error::Query {
                word: w.clone(),
                source: Box::new(e),
            })
        })
        .collect()
}

/// Nonpositive raw scores, counted directly.
pub fn count_nonpositive(scores: &[f64]) -> usize {
    scores.iter().filter(|&&x| !(x > 0.0)).count()
}

/// One evaluation of a candidate against a reference.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsReport {
    pub problem: String,
    pub eval_set: String,
    pub p: Option<usize>,
    pub s: Option<usize>,
    pub rank: Option<usize>,
    pub eff_rank: Option<usize>,
    pub seed: Option<u64>,
    pub eval_size: usize,
    /// `Perp(ref, candidate)`.
    pub perplexity: f64,
    /// `Perp(ref, baseline) / Perp(ref, candidate)`; the baseline defaults to
    /// the reference itself.
    pub perplexity_ratio: f64,
    pub kld: f64,
    pub wer: Option<f64>,
    pub ndcg1: Option<f64>,
    pub ndcg5: Option<f64>,
    pub zeros_pct: f64,
    pub clamped: usize,
    pub prefixes: usize,
    pub skipped_prefixes: usize,
    pub candidate_failures: usize,
    /// Why ranking metrics are absent, if they are.
    pub ranking_note: Option<String>,
}

pub const CSV_COLUMNS: [&str; 13] = [
    "problem",
    "p",
    "s",
    "rank",
    "eff_rank",
    "perplexity",
    "ratio",
    "kld",
    "wer",
    "ndcg1",
    "ndcg5",
    "zeros_pct",
    "seed",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsReport {
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.problem.clone(),
            opt(self.p),
            opt(self.s),
            opt(self.rank),
            opt(self.eff_rank),
            format_float(self.perplexity),
            format_float(self.perplexity_ratio),
            format_float(self.kld),
            opt(self.wer.map(format_float)),
            opt(self.ndcg1.map(format_float)),
            opt(self.ndcg5.map(format_float)),
            format_float(self.zeros_pct),
            opt(self.seed),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}: {v}");
        };
        kv("problem", self.problem.clone());
        kv("eval_set", self.eval_set.clone());
        kv("eval_size", self.eval_size.to_string());
        kv("basis", format!("{} {}", opt(self.p), opt(self.s)));
        kv("rank", opt(self.rank));
        kv("eff_rank", opt(self.eff_rank));
        kv("seed", opt(self.seed));
        kv("perplexity", format_float(self.perplexity));
        kv("perplexity_ratio", format_float(self.perplexity_ratio));
        kv("kld_bits", format_float(self.kld));
        kv("wer", opt(self.wer.map(format_float)));
        kv("ndcg1", opt(self.ndcg1.map(format_float)));
        kv("ndcg5", opt(self.ndcg5.map(format_float)));
        kv("zeros_pct", format_float(self.zeros_pct));
        kv("clamped", self.clamped.to_string());
        kv("prefixes", self.prefixes.to_string());
        kv("skipped_prefixes", self.skipped_prefixes.to_string());
        kv("candidate_failures", self.candidate_failures.to_string());
        if let Some(note) = &self.ranking_note {
            kv("ranking_note", note.clone());
        }
        out
    }
}

/// Reference-side quantities for one evaluation set, computed once and
/// reused across candidates.
pub struct PreparedReference {
    eval: EvalSet,
    raw: Vec<f64>,
    probabilities: Vec<f64>,
    dists: std::result::Result<PrefixDists, String>,
}

impl PreparedReference {
    /// Reference probabilities come from the evaluation set when attached,
    /// else from `reference.score`, and are normalized over the set.
    pub fn new(reference: &dyn BlackBox, eval: &EvalSet) -> Result<Self> {
        let raw = match &eval.reference {
            Some(p) => p.clone(),
            None => score_all(reference, &eval.strings)?,
        };
        if let Some(i) = raw.iter().position(|&p| !(p > 0.0)) {
            return Err(Error::invalid(format!(
                "reference gives nonpositive probability {} to evaluation string {} (length {}); \
                 very long strings underflow, so cap their length",
                raw[i],
                i,
                eval.strings[i].len()
            )));
        }
        let probabilities = normalize(&raw)?;
        let dists = match reference_dists(reference, &eval.strings) {
            Ok(d) => Ok(d),
            Err(e @ Error::CapabilityMissing(_)) => Err(format!("reference: {e}")),
            Err(e) => return Err(e),
        };
        Ok(PreparedReference {
            eval: eval.clone(),
            raw,
            probabilities,
            dists,
        })
    }

    pub fn eval_set(&self) -> &EvalSet {
        &self.eval
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `Perp(ref, ref)`, i.e. `2^H(ref)` over the set.
    pub fn self_perplexity(&self) -> Result<f64> {
        Ok(perplexity(&self.probabilities, &self.raw)?.perplexity)
    }

    /// Every metric for `candidate`. The perplexity ratio divides
    /// `baseline_perplexity` (the reference's own by default) by the
    /// candidate's. Ranking metrics are left empty, with a note, when either
    /// side lacks next-symbol distributions.
    pub fn evaluate(&self, candidate: &dyn BlackBox, baseline_perplexity: Option<f64>) -> Result<MetricsReport> {
        let cand_scores = score_all(candidate, &self.eval.strings)?;
        let perp = perplexity(&self.probabilities, &cand_scores)?;
        let baseline = match baseline_perplexity {
            Some(b) => b,
            None => self.self_perplexity()?,
        };
        let mut report = MetricsReport {
            eval_set: self.eval.role.to_string(),
            eval_size: self.eval.strings.len(),
            perplexity: perp.perplexity,
            perplexity_ratio: baseline / perp.perplexity,
            kld: kl_divergence(&self.probabilities, &cand_scores)?,
            zeros_pct: perp.zeros_pct,
            clamped: perp.clamped,
            ..MetricsReport::default()
        };
        let ranking = match &self.dists {
            Ok(refs) => ranking_against(refs, candidate, &self.eval.strings, &[1, 5]),
            Err(note) => {
                report.ranking_note = Some(note.clone());
                return Ok(report);
            }
        };
        match ranking {
            Ok(r) => {
                report.wer = Some(r.wer);
                report.ndcg1 = r.ndcg(1);
                report.ndcg5 = r.ndcg(5);
                report.prefixes = r.prefixes;
                report.skipped_prefixes = r.skipped;
                report.candidate_failures = r.candidate_failures;
            }
            Err(e @ Error::CapabilityMissing(_)) => report.ranking_note = Some(format!("candidate: {e}")),
            Err(e) => return Err(e),
        }
        Ok(report)
    }
}

/// Computes every metric of `candidate` against `reference` on `eval`; see
/// [`PreparedReference::evaluate`].
pub fn evaluate(
    reference: &dyn BlackBox,
    candidate: &dyn BlackBox,
    baseline: Option<&dyn BlackBox>,
    eval: &EvalSet,
) -> Result<MetricsReport> {
    let prepared = PreparedReference::new(reference, eval)?;
    let baseline = match baseline {
        Some(b) => Some(perplexity(prepared.probabilities(), &score_all(b, &eval.strings)?)?.perplexity),
        None => None,
    };
    prepared.evaluate(candidate, baseline)
}
