//! Graphviz rendering of weighted automata.

use std::fmt::Write;

use crate::automaton::WeightedAutomaton;

/// Default pruning threshold for drawn transitions.
pub const DEFAULT_DOT_THRESHOLD: f64 = 0.05;

/// Formats `x` rounded to five significant digits.
pub fn format_weight(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.4e}").parse().expect("float formatting round-trips");
    format!("{rounded}")
}

/// Renders `wa` as a DOT digraph. Each state is labelled `q<i>` followed by
/// `initial > final` weights; transitions whose absolute weight is below
/// `threshold` (and all exact zeros) are omitted.
pub fn to_dot(wa: &WeightedAutomaton, threshold: f64) -> String {
    let mut out = String::new();
    out.push_str("digraph wa {\n  rankdir=LR;\n  node [shape=circle];\n");
    for q in 0..wa.num_states() {
        let _ = writeln!(
            out,
            "  q{q} [label=\"q{q}\\n{} > {}\"];",
            format_weight(wa.alpha0()[q]),
            format_weight(wa.alpha_inf()[q])
        );
    }
    for (q, q2, symbol, w) in kept_edges(wa, threshold) {
        let _ = writeln!(
            out,
            "  q{q} -> q{q2} [label=\"{}:{}\"];",
            wa.alphabet().label(symbol),
            format_weight(w)
        );
    }
    out.push_str("}\n");
    out
}

/// Transitions `(from, to, symbol, weight)` that [`to_dot`] draws.
pub fn kept_edges(wa: &WeightedAutomaton, threshold: f64) -> Vec<(usize, usize, usize, f64)> {
    let r = wa.num_states();
    let mut edges = Vec::new();
    for q in 0..r {
        for q2 in 0..r {
            for (symbol, m) in wa.transitions().iter().enumerate() {
                let w = m[(q, q2)];
                if w != 0.0 && w.abs() >= threshold {
                    edges.push((q, q2, symbol, w));
                }
            }
        }
    }
    edges
}
