//! Spectral extraction of weighted automata from a black box: sample a
//! basis, fill Hankel sub-blocks by querying, factor them with a truncated
//! SVD and read off a linear representation.

mod basis;
mod extract;
mod hankel;
mod svd;

pub use basis::{generate_basis, Basis, BasisSource};
pub use extract::{
    extract, extract_from_factors, extract_with_basis, prepare, spectral_extraction, ExtractionConfig,
    ExtractionReport, PreparedHankel, ReportProvenance, SamplingMode, DEFAULT_RANK_TOLERANCE,
};
pub use hankel::{fill_hankels, HankelBlocks};
pub use svd::{truncated_svd, SortedSvd, TruncatedSvd};
