//! Small hand-written automata used by the examples and tests.

use crate::automaton::WeightedAutomaton;
use crate::word::Alphabet;

/// A two-state probabilistic automaton over `{a, b}`:
///
/// ```text
/// alpha0 = [1, 0]    alpha_inf = [0, 1/4]
/// M_a = [[1/2, 1/6], [0, 1/4]]    M_b = [[0, 1/3], [1/4, 1/4]]
/// ```
///
/// It weights `a` as 1/24, `b` as 1/12 and `ab` as 5/96, and sums to one
/// over all strings.
pub fn two_state_pfa() -> WeightedAutomaton {
    WeightedAutomaton::from_rows(
        Alphabet::with_names(["a", "b"]).expect("valid names"),
        &[1.0, 0.0],
        &[
            vec![vec![1.0 / 2.0, 1.0 / 6.0], vec![0.0, 1.0 / 4.0]],
            vec![vec![0.0, 1.0 / 3.0], vec![1.0 / 4.0, 1.0 / 4.0]],
        ],
        &[0.0, 1.0 / 4.0],
    )
    .expect("valid automaton")
}

/// Single-state automaton computing `f(w) = 1/2 * 4^-|w|` over two symbols.
pub fn geometric_rank_one() -> WeightedAutomaton {
    WeightedAutomaton::from_rows(
        Alphabet::new(2).expect("nonzero"),
        &[1.0],
        &[vec![vec![0.25]], vec![vec![0.25]]],
        &[0.5],
    )
    .expect("valid automaton")
}
