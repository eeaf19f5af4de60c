use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use crate::automaton::WeightedAutomaton;
use crate::error::{Error, Result};
use crate::word::Alphabet;

/// Lower bound on every state's stopping probability.
pub const MIN_END_MASS: f64 = 0.01;

/// Random probabilistic automaton with start state 0.
///
/// Each state gets a distribution over `{end} ∪ (alphabet × states)` from
/// normalized uniform draws. When the end share falls below
/// [`MIN_END_MASS`] it is raised to that value and the transitions are
/// rescaled, so every state stops with probability at least 1%.
pub fn random_stochastic_wa(
    num_states: usize,
    alphabet: &Alphabet,
    rng: &mut dyn RngCore,
) -> Result<WeightedAutomaton> {
    if num_states == 0 {
        return Err(Error::invalid("num_states must be at least 1"));
    }
    let k = alphabet.size();
    let mut transitions = vec![DMatrix::<f64>::zeros(num_states, num_states); k];
    let mut alpha_inf = DVector::<f64>::zeros(num_states);
    for q in 0..num_states {
        let end_draw: f64 = rng.gen::<f64>();
        let draws: Vec<f64> = (0..k * num_states).map(|_| rng.gen::<f64>()).collect();
        let total = end_draw + draws.iter().sum::<f64>();
        let mut end = end_draw / total;
        let mut scale = 1.0 / total;
        if end < MIN_END_MASS {
            end = MIN_END_MASS;
            scale = (1.0 - MIN_END_MASS) / draws.iter().sum::<f64>();
        }
        alpha_inf[q] = end;
        for (idx, d) in draws.iter().enumerate() {
            let (symbol, q2) = (idx / num_states, idx % num_states);
            transitions[symbol][(q, q2)] = d * scale;
        }
    }
    let mut alpha0 = DVector::<f64>::zeros(num_states);
    alpha0[0] = 1.0;
    WeightedAutomaton::new(alphabet.clone(), alpha0, transitions, alpha_inf)
}
