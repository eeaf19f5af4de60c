use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::basis::{generate_basis, Basis, BasisSource};
use super::hankel::{fill_hankels, HankelBlocks};
use super::svd::{SortedSvd, TruncatedSvd};
use crate::automaton::WeightedAutomaton;
use crate::error::{Error, Result};
use crate::format_float;
use crate::oracle::{cached, BlackBox};
use crate::word::Word;

pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-12;

/// How basis strings are drawn.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplingMode {
    Uniform,
    /// Chain-sample from the oracle's next-symbol distributions.
    Generative,
    Dataset(Vec<Word>),
}

impl SamplingMode {
    pub fn name(&self) -> &'static str {
        match self {
            SamplingMode::Uniform => "uniform",
            SamplingMode::Generative => "generative",
            SamplingMode::Dataset(_) => "dataset",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionConfig {
    pub prefixes: usize,
    pub suffixes: usize,
    pub rank: usize,
    pub max_len: usize,
    pub sampling: SamplingMode,
    pub seed: u64,
    pub rank_tolerance: f64,
}

impl ExtractionConfig {
    pub fn new(prefixes: usize, suffixes: usize, rank: usize, max_len: usize, seed: u64) -> Self {
        ExtractionConfig {
            prefixes,
            suffixes,
            rank,
            max_len,
            sampling: SamplingMode::Uniform,
            seed,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 || self.prefixes == 0 || self.suffixes == 0 {
            return Err(Error::invalid("rank and basis sizes must be at least 1"));
        }
        if !(self.rank_tolerance >= 0.0) {
            return Err(Error::invalid("rank tolerance must be nonnegative"));
        }
        Ok(())
    }
}

/// Provenance of one extraction.
///
/// Equality and the text rendering ignore `elapsed`, so reports from
/// identically seeded runs compare equal.
#[derive(Clone, Debug)]
pub struct ExtractionReport {
    pub seed: u64,
    pub sampling: &'static str,
    pub requested_prefixes: usize,
    pub requested_suffixes: usize,
    pub prefixes: usize,
    pub suffixes: usize,
    pub requested_rank: usize,
    pub effective_rank: usize,
    /// Distinct strings sent to the black box.
    pub queries: u64,
    pub cache_hits: u64,
    /// All singular values of the Hankel block, descending.
    pub singular_values: Vec<f64>,
    pub elapsed: Duration,
}

impl PartialEq for ExtractionReport {
    fn eq(&self, other: &Self) -> bool {
        self.to_text() == other.to_text()
    }
}

impl ExtractionReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "sampling: {}", self.sampling);
        let _ = writeln!(
            out,
            "requested_basis: {} {}",
            self.requested_prefixes, self.requested_suffixes
        );
        let _ = writeln!(out, "prefixes: {}", self.prefixes);
        let _ = writeln!(out, "suffixes: {}", self.suffixes);
        let _ = writeln!(out, "requested_rank: {}", self.requested_rank);
        let _ = writeln!(out, "effective_rank: {}", self.effective_rank);
        let _ = writeln!(out, "queries: {}", self.queries);
        let _ = writeln!(out, "cache_hits: {}", self.cache_hits);
        out.push_str("singular_values:");
        for s in &self.singular_values {
            let _ = write!(out, " {}", format_float(*s));
        }
        out.push('\n');
        out
    }
}

/// Provenance fields read back from [`ExtractionReport::to_text`] output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportProvenance {
    pub seed: Option<u64>,
    pub prefixes: Option<usize>,
    pub suffixes: Option<usize>,
    pub requested_rank: Option<usize>,
    pub effective_rank: Option<usize>,
}

impl ReportProvenance {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ReportProvenance::default();
        for (i, line) in text.lines().enumerate() {
            let Some((key, value)) = line.split_once(':') else {
                continue;
            };
            let value = value.trim();
            let bad = || Error::parse(i + 1, format!("bad value for {key}: {value:?}"));
            match key {
                "seed" => out.seed = Some(value.parse().map_err(|_| bad())?),
                "prefixes" => out.prefixes = Some(value.parse().map_err(|_| bad())?),
                "suffixes" => out.suffixes = Some(value.parse().map_err(|_| bad())?),
                "requested_rank" => out.requested_rank = Some(value.parse().map_err(|_| bad())?),
                "effective_rank" => out.effective_rank = Some(value.parse().map_err(|_| bad())?),
                _ => {}
            }
        }
        Ok(out)
    }
}

/// Spectral reconstruction from precomputed SVD factors of `blocks.h`.
///
/// With `H ≈ U D V^T`, the factorization `P = U D`, `S = V^T` gives
/// `alpha0^T = h_{λ,S}^T V`, `alpha_inf = D^-1 U^T h_{P,λ}` and
/// `M_sigma = D^-1 U^T H_sigma V`.
pub fn extract_from_factors(blocks: &HankelBlocks, factors: &TruncatedSvd) -> Result<WeightedAutomaton> {
    let inv_d = DVector::from_iterator(factors.rank(), factors.singular_values.iter().map(|d| 1.0 / d));
    let p_pinv = {
        let mut ut = factors.u.transpose();
        for (k, mut row) in ut.row_iter_mut().enumerate() {
            row.scale_mut(inv_d[k]);
        }
        ut
    };
    let s_pinv = &factors.v;
    let alpha0 = s_pinv.tr_mul(&blocks.h_lambda_suffix);
    let alpha_inf = &p_pinv * &blocks.h_prefix_lambda;
    let transitions: Vec<DMatrix<f64>> = blocks.h_sigma.iter().map(|hs| &p_pinv * (hs * s_pinv)).collect();
    WeightedAutomaton::new(blocks.alphabet.clone(), alpha0, transitions, alpha_inf).map_err(|_| Error::DegenerateHankel)
}

/// Builds a WA with `min(rank, numerical rank)` states from the blocks.
pub fn spectral_extraction(blocks: &HankelBlocks, rank: usize, tol: f64) -> Result<WeightedAutomaton> {
    let factors = SortedSvd::new(&blocks.h).truncate(rank, tol)?;
    extract_from_factors(blocks, &factors)
}

/// Basis and filled blocks for one `(p, s, seed)` setting, reusable across ranks.
pub struct PreparedHankel {
    pub blocks: HankelBlocks,
    pub svd: SortedSvd,
    pub queries: u64,
    pub cache_hits: u64,
    started: Instant,
    config: ExtractionConfig,
}

impl PreparedHankel {
    pub fn basis(&self) -> &Basis {
        &self.blocks.basis
    }

    /// Extracts at `rank`, keeping the tolerance and provenance of the
    /// preparing configuration.
    pub fn extract(&self, rank: usize) -> Result<(WeightedAutomaton, ExtractionReport)> {
        let factors = self.svd.truncate(rank, self.config.rank_tolerance)?;
        let wa = extract_from_factors(&self.blocks, &factors)?;
        let report = ExtractionReport {
            seed: self.config.seed,
            sampling: self.config.sampling.name(),
            requested_prefixes: self.config.prefixes,
            requested_suffixes: self.config.suffixes,
            prefixes: self.basis().prefixes().len(),
            suffixes: self.basis().suffixes().len(),
            requested_rank: rank,
            effective_rank: wa.num_states(),
            queries: self.queries,
            cache_hits: self.cache_hits,
            singular_values: self.svd.singular_values().iter().copied().collect(),
            elapsed: self.started.elapsed(),
        };
        Ok((wa, report))
    }
}

/// Samples a basis and fills its Hankel blocks through a memoizing wrapper.
pub fn prepare(oracle: &dyn BlackBox, config: &ExtractionConfig) -> Result<PreparedHankel> {
    config.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let alphabet = oracle.alphabet().clone();
    let source = match &config.sampling {
        SamplingMode::Uniform => BasisSource::Uniform(&alphabet),
        SamplingMode::Generative => BasisSource::Generative(oracle),
        SamplingMode::Dataset(words) => BasisSource::Dataset(words),
    };
    let basis = generate_basis(&source, config.prefixes, config.suffixes, config.max_len, &mut rng)?;
    prepare_with_basis(oracle, basis, config, started)
}

fn prepare_with_basis(
    oracle: &dyn BlackBox,
    basis: Basis,
    config: &ExtractionConfig,
    started: Instant,
) -> Result<PreparedHankel> {
    let memo = cached(oracle);
    let blocks = fill_hankels(&memo, &basis)?;
    let stats = memo.stats();
    let svd = SortedSvd::new(&blocks.h);
    Ok(PreparedHankel {
        blocks,
        svd,
        queries: stats.entries as u64,
        cache_hits: stats.hits,
        started,
        config: config.clone(),
    })
}

/// Basis generation, Hankel filling and spectral extraction in one call.
pub fn extract(oracle: &dyn BlackBox, config: &ExtractionConfig) -> Result<(WeightedAutomaton, ExtractionReport)> {
    prepare(oracle, config)?.extract(config.rank)
}

/// As [`extract`], over a fixed basis instead of a sampled one.
pub fn extract_with_basis(
    oracle: &dyn BlackBox,
    basis: Basis,
    config: &ExtractionConfig,
) -> Result<(WeightedAutomaton, ExtractionReport)> {
    config.validate()?;
    prepare_with_basis(oracle, basis, config, Instant::now())?.extract(config.rank)
}
