//! Weighted automata as linear representations `<alpha0, (M_sigma), alpha_inf>`.
//!
//! A string `w = s1 ... sm` is weighted `alpha0^T M_s1 ... M_sm alpha_inf`.
//! State vectors are kept as column vectors holding the transposed row
//! vector `alpha0^T M_w`, so one step is `M_s^T v`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::word::{Alphabet, Symbol, Word};

/// Relative singular-value floor under which `Id - sum(M_sigma)` counts as singular.
const SINGULAR_TOLERANCE: f64 = 1e-12;

/// Conditional distribution over the next symbol; the last entry is the
/// end-of-string probability.
#[derive(Clone, Debug, PartialEq)]
pub struct NextSymbolDistribution {
    probs: Vec<f64>,
}

impl NextSymbolDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid(
                "a next-symbol distribution needs at least one symbol and the end entry",
            ));
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite next-symbol probability"));
        }
        Ok(NextSymbolDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `symbol`; index `alphabet_size` is the end symbol.
    pub fn get(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn end(&self) -> f64 {
        self.probs[self.probs.len() - 1]
    }

    /// Number of outcomes, `|alphabet| + 1`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the end-of-string outcome.
    pub fn end_index(&self) -> usize {
        self.probs.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct WeightedAutomaton {
    alphabet: Alphabet,
    alpha0: DVector<f64>,
    alpha_inf: DVector<f64>,
    transitions: Vec<DMatrix<f64>>,
    normalizer: OnceLock<Option<DVector<f64>>>,
}

impl PartialEq for WeightedAutomaton {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.alpha0 == other.alpha0
            && self.alpha_inf == other.alpha_inf
            && self.transitions == other.transitions
    }
}

impl WeightedAutomaton {
    pub fn new(
        alphabet: Alphabet,
        alpha0: DVector<f64>,
        transitions: Vec<DMatrix<f64>>,
        alpha_inf: DVector<f64>,
    ) -> Result<Self> {
        let r = alpha0.len();
        if r == 0 {
            return Err(Error::invalid("a weighted automaton needs at least one state"));
        }
        if alpha_inf.len() != r {
            return Err(Error::invalid(format!(
                "alpha_inf has length {}, expected {r}",
                alpha_inf.len()
            )));
        }
        if transitions.len() != alphabet.size() {
            return Err(Error::invalid(format!(
                "{} transition matrices for an alphabet of size {}",
                transitions.len(),
                alphabet.size()
            )));
        }
        for (s, m) in transitions.iter().enumerate() {
            if m.nrows() != r || m.ncols() != r {
                return Err(Error::invalid(format!(
                    "matrix for symbol {s} is {}x{}, expected {r}x{r}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let finite = alpha0.iter().chain(alpha_inf.iter()).all(|x| x.is_finite())
            && transitions.iter().all(|m| m.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::invalid("weights must be finite"));
        }
        Ok(WeightedAutomaton {
            alphabet,
            alpha0,
            alpha_inf,
            transitions,
            normalizer: OnceLock::new(),
        })
    }

    /// Builds an automaton from row-major nested slices.
    pub fn from_rows(
        alphabet: Alphabet,
        alpha0: &[f64],
        transitions: &[Vec<Vec<f64>>],
        alpha_inf: &[f64],
    ) -> Result<Self> {
        let r = alpha0.len();
        let mats = transitions
            .iter()
            .map(|rows| {
                if rows.len() != r || rows.iter().any(|row| row.len() != r) {
                    return Err(Error::invalid(format!("transition matrix must be {r}x{r}")));
                }
                Ok(DMatrix::from_fn(r, r, |i, j| rows[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        WeightedAutomaton::new(
            alphabet,
            DVector::from_column_slice(alpha0),
            mats,
            DVector::from_column_slice(alpha_inf),
        )
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.alpha0.len()
    }

    pub fn alpha0(&self) -> &DVector<f64> {
        &self.alpha0
    }

    pub fn alpha_inf(&self) -> &DVector<f64> {
        &self.alpha_inf
    }

    pub fn transition(&self, symbol: Symbol) -> &DMatrix<f64> {
        &self.transitions[symbol]
    }

    pub fn transitions(&self) -> &[DMatrix<f64>] {
        &self.transitions
    }

    /// `alpha0^T M_w`, as a column vector.
    pub fn state_vector(&self, word: &[Symbol]) -> Result<DVector<f64>> {
        self.alphabet.check(word)?;
        let mut v = self.alpha0.clone();
        for &s in word {
            v = self.step(&v, s);
        }
        Ok(v)
    }

    /// One transition from a state vector.
    pub fn step(&self, state: &DVector<f64>, symbol: Symbol) -> DVector<f64> {
        self.transitions[symbol].tr_mul(state)
    }

    pub fn evaluate(&self, word: &[Symbol]) -> Result<f64> {
        Ok(self.state_vector(word)?.dot(&self.alpha_inf))
    }

    /// `(Id - sum(M_sigma))^-1 alpha_inf`; for a stochastic automaton each
    /// coordinate is the total mass generated from that state.
    pub fn normalizer(&self) -> Result<&DVector<f64>> {
        self.normalizer
            .get_or_init(|| self.compute_normalizer())
            .as_ref()
            .ok_or(Error::NormalizerUnavailable)
    }

    fn compute_normalizer(&self) -> Option<DVector<f64>> {
        let r = self.num_states();
        let mut a = DMatrix::<f64>::identity(r, r);
        for m in &self.transitions {
            a -= m;
        }
        let sv = a.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if !(max > 0.0) || min <= SINGULAR_TOLERANCE * max {
            return None;
        }
        a.lu().solve(&self.alpha_inf)
    }

    /// Partial sum `sum_{k <= horizon} (sum M_sigma)^k alpha_inf`. Only meant
    /// for diagnosing automata whose normalizer does not exist.
    pub fn truncated_normalizer(&self, horizon: usize) -> DVector<f64> {
        let r = self.num_states();
        let mut total = DMatrix::<f64>::zeros(r, r);
        for m in &self.transitions {
            total += m;
        }
        let mut term = self.alpha_inf.clone();
        let mut acc = term.clone();
        for _ in 0..horizon {
            term = &total * term;
            acc += &term;
        }
        acc
    }

    /// Unnormalized joint masses `alpha^w M_sigma alpha~` per symbol, then
    /// `alpha^w alpha_inf` for the end, from an already computed state vector.
    pub fn joint_next_masses(&self, state: &DVector<f64>) -> Result<Vec<f64>> {
        let norm = self.normalizer()?;
        let mut out = Vec::with_capacity(self.alphabet.size() + 1);
        for m in &self.transitions {
            out.push((m * norm).dot(state));
        }
        out.push(state.dot(&self.alpha_inf));
        Ok(out)
    }

    /// Conditional next-symbol distribution after `prefix`, normalized by
    /// the prefix mass `alpha^w alpha~`.
    pub fn next_symbol_distribution(&self, prefix: &[Symbol]) -> Result<NextSymbolDistribution> {
        let state = self.state_vector(prefix)?;
        Ok(self.distribution_at(&state, prefix)?.0)
    }

    /// Distribution at `state` together with the prefix mass it was
    /// normalized by.
    fn distribution_at(&self, state: &DVector<f64>, prefix: &[Symbol]) -> Result<(NextSymbolDistribution, f64)> {
        let mass = state.dot(self.normalizer()?);
        if !(mass > 0.0) {
            return Err(Error::DegeneratePrefix {
                prefix: Word::from(prefix),
                mass,
            });
        }
        let probs = self.joint_next_masses(state)?.into_iter().map(|x| x / mass).collect();
        Ok((NextSymbolDistribution::new(probs)?, mass))
    }

    /// Next-symbol distributions after every prefix of `word`, λ first and
    /// the full word last, computed incrementally. The running state is
    /// rescaled to unit prefix mass at each step so long words do not
    /// underflow; conditionals are unaffected by the scale. A degenerate
    /// prefix reports its mass relative to the previous prefix.
    pub fn prefix_distributions(&self, word: &[Symbol]) -> Result<Vec<NextSymbolDistribution>> {
        self.alphabet.check(word)?;
        let mut out = Vec::with_capacity(word.len() + 1);
        let (first, mut mass) = self.distribution_at(&self.alpha0, &[])?;
        out.push(first);
        let mut state = self.alpha0.clone();
        for (i, &s) in word.iter().enumerate() {
            state = self.step(&state, s) / mass;
            let (dist, m) = self.distribution_at(&state, &word[..=i])?;
            out.push(dist);
            mass = m;
        }
        Ok(out)
    }

    /// Draws a string symbol by symbol until the end symbol comes up or
    /// `max_len` symbols have been emitted. Negative conditional entries are
    /// treated as zero.
    pub fn sample(&self, rng: &mut dyn RngCore, max_len: usize) -> Result<Word> {
        let mut word = Vec::new();
        let mut state = self.alpha0.clone();
        let end = self.alphabet.size();
        while word.len() < max_len {
            let (dist, mass) = self.distribution_at(&state, &word)?;
            let choice = draw_clamped(dist.probs(), rng).ok_or_else(|| Error::DegeneratePrefix {
                prefix: Word::from(word.as_slice()),
                mass: 0.0,
            })?;
            if choice == end {
                break;
            }
            // rescaling keeps long walks clear of underflow
            state = self.step(&state, choice) / mass;
            word.push(choice);
        }
        Ok(Word::from(word))
    }

    /// The automaton `<Q^T alpha0, (Q^-1 M Q), Q^-1 alpha_inf>`, which
    /// computes the same function for any invertible `q`.
    pub fn change_basis(&self, q: &DMatrix<f64>) -> Result<WeightedAutomaton> {
        let q_inv = q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("change of basis is not invertible"))?;
        WeightedAutomaton::new(
            self.alphabet.clone(),
            q.transpose() * &self.alpha0,
            self.transitions.iter().map(|m| &q_inv * m * q).collect(),
            &q_inv * &self.alpha_inf,
        )
    }
}

/// Draws an index with probability proportional to `max(w, 0)`. Returns
/// `None` when no weight is positive.
pub(crate) fn draw_clamped(weights: &[f64], rng: &mut dyn RngCore) -> Option<usize> {
    use rand::Rng;
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let mut target = rng.gen::<f64>() * total;
    let mut last_positive = None;
    for (i, w) in weights.iter().enumerate() {
        let w = w.max(0.0);
        if w > 0.0 {
            last_positive = Some(i);
            if target < w {
                return Some(i);
            }
            target -= w;
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_state_pfa as two_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_state(m: f64, alpha_inf: f64, symbols: usize) -> WeightedAutomaton {
        WeightedAutomaton::from_rows(
            Alphabet::new(symbols).unwrap(),
            &[1.0],
            &vec![vec![vec![m]]; symbols],
            &[alpha_inf],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_two_state() {
        let wa = two_state();
        assert_eq!(wa.evaluate(&[]).unwrap(), 0.0);
        assert!((wa.evaluate(&[0]).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        assert!((wa.evaluate(&[0, 1]).unwrap() - 5.0 / 96.0).abs() < 1e-15);
        assert_eq!(single_state(0.0, 1.0, 2).evaluate(&[0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_rejects_out_of_range_symbol() {
        assert!(matches!(
            two_state().evaluate(&[2]),
            Err(Error::SymbolOutOfRange {
                symbol: 2,
                alphabet_size: 2
            })
        ));
    }

    #[test]
    fn state_vectors_two_state() {
        let wa = two_state();
        assert_eq!(wa.state_vector(&[]).unwrap().as_slice(), &[1.0, 0.0]);
        let a = wa.state_vector(&[0]).unwrap();
        assert!((a[0] - 0.5).abs() < 1e-15 && (a[1] - 1.0 / 6.0).abs() < 1e-15);
        let aa = wa.state_vector(&[0, 0]).unwrap();
        assert!((aa[0] - 0.25).abs() < 1e-15 && (aa[1] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn normalizer_cases() {
        let n = two_state().normalizer().unwrap().clone();
        assert!((n[0] - 1.0).abs() < 1e-12 && (n[1] - 1.0).abs() < 1e-12);
        let one = single_state(0.5, 0.5, 1);
        assert!((one.normalizer().unwrap()[0] - 1.0).abs() < 1e-15);
        let singular = single_state(0.5, 0.5, 2);
        assert!(matches!(singular.normalizer(), Err(Error::NormalizerUnavailable)));
        assert!(singular.next_symbol_distribution(&[]).is_err());
        // divergent series, but the partial sums are still defined
        assert_eq!(singular.truncated_normalizer(3)[0], 0.5 * 4.0);
    }

    #[test]
    fn next_symbol_distribution_two_state() {
        let wa = two_state();
        let d = wa.next_symbol_distribution(&[]).unwrap();
        let expected = [2.0 / 3.0, 1.0 / 3.0, 0.0];
        for (x, e) in d.probs().iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
        let d = wa.next_symbol_distribution(&[0]).unwrap();
        let expected = [9.0 / 16.0, 3.0 / 8.0, 1.0 / 16.0];
        for (x, e) in d.probs().iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
        let d = single_state(0.5, 0.5, 1).next_symbol_distribution(&[]).unwrap();
        assert!((d.get(0) - 0.5).abs() < 1e-15 && (d.end() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_prefix_is_an_error() {
        let wa = WeightedAutomaton::from_rows(Alphabet::new(1).unwrap(), &[-1.0], &[vec![vec![0.5]]], &[0.5]).unwrap();
        assert!(matches!(
            wa.next_symbol_distribution(&[]),
            Err(Error::DegeneratePrefix { .. })
        ));
    }

    #[test]
    fn sampling_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dead = single_state(0.0, 1.0, 3);
        for _ in 0..20 {
            assert!(dead.sample(&mut rng, 10).unwrap().is_empty());
        }
        assert!(two_state().sample(&mut rng, 0).unwrap().is_empty());
    }

    #[test]
    fn sampling_first_symbol_frequency() {
        let wa = two_state();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let a_first = (0..n)
            .filter(|_| wa.sample(&mut rng, 50).unwrap().first() == Some(&0))
            .count();
        let freq = a_first as f64 / n as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn sampling_is_seeded() {
        let wa = two_state();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| wa.sample(&mut rng, 30).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
    }

    #[test]
    fn draw_clamped_skips_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(draw_clamped(&[-0.3, 0.2, 0.0], &mut rng), Some(1));
        }
        assert_eq!(draw_clamped(&[-1.0, 0.0], &mut rng), None);
    }

    #[test]
    fn constructor_validates_shapes() {
        let a = Alphabet::new(2).unwrap();
        assert!(WeightedAutomaton::from_rows(a.clone(), &[1.0], &[vec![vec![0.0]]], &[1.0]).is_err());
        assert!(WeightedAutomaton::from_rows(a.clone(), &[], &[vec![], vec![]], &[]).is_err());
        assert!(WeightedAutomaton::from_rows(a, &[1.0], &[vec![vec![f64::NAN]], vec![vec![0.0]]], &[1.0]).is_err());
    }

    #[test]
    fn long_walks_do_not_underflow() {
        // f(a^n) = 0.999^n * 1e-3 drops below f64 range near n = 700 000,
        // and the raw prefix mass after 2000 symbols of the two-state automaton is ~1e-500.
        let wa = single_state(0.999, 1e-3, 1);
        let dists = wa.prefix_distributions(&vec![0; 5000]).unwrap();
        assert!((dists[4999].end() - 1e-3).abs() < 1e-12);
        let long: Vec<usize> = (0..2000).map(|i| i % 2).collect();
        let dists = two_state().prefix_distributions(&long).unwrap();
        assert!(dists.iter().all(|d| (d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let skewed = single_state(0.4999995, 1e-6, 2);
        assert_eq!(skewed.sample(&mut rng, 3000).unwrap().len(), 3000);
    }
}
