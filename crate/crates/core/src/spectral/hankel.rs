use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::basis::Basis;
use crate::error::{Error, Result};
use crate::oracle::BlackBox;
use crate::word::{Alphabet, Symbol, Word};

/// Hankel sub-blocks over a basis: `H(u, v) = f(uv)`, `H_sigma(u, v) = f(u sigma v)`,
/// and the λ column and λ row of `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelBlocks {
    pub alphabet: Alphabet,
    pub basis: Basis,
    pub h: DMatrix<f64>,
    pub h_sigma: Vec<DMatrix<f64>>,
    pub h_prefix_lambda: DVector<f64>,
    pub h_lambda_suffix: DVector<f64>,
}

impl HankelBlocks {
    pub fn num_symbols(&self) -> usize {
        self.h_sigma.len()
    }
}

fn fill_block(oracle: &dyn BlackBox, basis: &Basis, middle: &[Symbol]) -> Result<DMatrix<f64>> {
    let prefixes = basis.prefixes();
    let suffixes = basis.suffixes();
    let rows: Vec<Vec<f64>> = (0..prefixes.len())
        .into_par_iter()
        .map(|i| {
            let u = &prefixes[i];
            suffixes
                .iter()
                .map(|v| {
                    let w = Word::concat(&[u, middle, v]);
                    oracle.score(&w).map_err(|e| Error::Query {
                        word: w,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(prefixes.len(), suffixes.len(), |i, j| rows[i][j]))
}

/// Queries the oracle on every prefix-suffix concatenation, with and without
/// each symbol in between. Rows are filled in parallel; the result does not
/// depend on evaluation order.
pub fn fill_hankels(oracle: &dyn BlackBox, basis: &Basis) -> Result<HankelBlocks> {
    let alphabet = oracle.alphabet();
    for w in basis.prefixes().iter().chain(basis.suffixes()) {
        alphabet.check(w)?;
    }
    let h = fill_block(oracle, basis, &[])?;
    let h_sigma = (0..alphabet.size())
        .map(|s| fill_block(oracle, basis, &[s]))
        .collect::<Result<Vec<_>>>()?;
    let lambda_row = basis.prefix_index(&[]).expect("basis holds λ");
    let lambda_col = basis.suffix_index(&[]).expect("basis holds λ");
    Ok(HankelBlocks {
        alphabet: alphabet.clone(),
        basis: basis.clone(),
        h_prefix_lambda: h.column(lambda_col).into_owned(),
        h_lambda_suffix: h.row(lambda_row).transpose(),
        h,
        h_sigma,
    })
}
