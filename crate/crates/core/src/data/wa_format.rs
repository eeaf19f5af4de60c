use serde::{Deserialize, Serialize};

use crate::automaton::WeightedAutomaton;
use crate::error::{Error, Result};
use crate::word::Alphabet;

/// On-disk layout; matrices are per symbol, row-major.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaDocument {
    alphabet_size: usize,
    num_states: usize,
    alpha0: Vec<f64>,
    alpha_inf: Vec<f64>,
    matrices: Vec<Vec<Vec<f64>>>,
}

/// Serializes to the JSON interchange document. Reals are written in
/// shortest round-trip form.
pub fn save_wa(wa: &WeightedAutomaton) -> String {
    let r = wa.num_states();
    let doc = WaDocument {
        alphabet_size: wa.alphabet().size(),
        num_states: r,
        alpha0: wa.alpha0().iter().copied().collect(),
        alpha_inf: wa.alpha_inf().iter().copied().collect(),
        matrices: wa
            .transitions()
            .iter()
            .map(|m| (0..r).map(|i| m.row(i).iter().copied().collect()).collect())
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn load_wa(text: &str) -> Result<WeightedAutomaton> {
    let doc: WaDocument = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    if doc.num_states == 0 {
        return Err(Error::parse(1, "num_states must be at least 1"));
    }
    let r = doc.num_states;
    if doc.alpha0.len() != r || doc.alpha_inf.len() != r {
        return Err(Error::parse(1, format!("initial/final vectors must have {r} entries")));
    }
    if doc.matrices.len() != doc.alphabet_size {
        return Err(Error::parse(
            1,
            format!(
                "{} matrices for alphabet size {}",
                doc.matrices.len(),
                doc.alphabet_size
            ),
        ));
    }
    let alphabet = Alphabet::new(doc.alphabet_size).map_err(|e| Error::parse(1, e.to_string()))?;
    WeightedAutomaton::from_rows(alphabet, &doc.alpha0, &doc.matrices, &doc.alpha_inf)
        .map_err(|e| Error::parse(1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    use super::*;
    use crate::fixtures::two_state_pfa;

    #[test]
    fn round_trip_preserves_weights() {
        let wa = two_state_pfa();
        let back = load_wa(&save_wa(&wa)).unwrap();
        let ab = back.evaluate(&[0, 1]).unwrap();
        assert_eq!(ab, wa.evaluate(&[0, 1]).unwrap());
        assert!((ab - 5.0 / 96.0).abs() < 1e-16);
        assert_eq!(back.transitions(), wa.transitions());
    }

    #[test]
    fn rejects_bad_dimensions() {
        let bad_count = r#"{"alphabet_size":2,"num_states":1,"alpha0":[1],"alpha_inf":[1],"matrices":[[[0.5]]]}"#;
        assert!(matches!(load_wa(bad_count), Err(Error::Parse { .. })));
        let zero = r#"{"alphabet_size":1,"num_states":0,"alpha0":[],"alpha_inf":[],"matrices":[[]]}"#;
        assert!(load_wa(zero).is_err());
        let ragged = r#"{"alphabet_size":1,"num_states":2,"alpha0":[1,0],"alpha_inf":[0,1],"matrices":[[[1,0],[0]]]}"#;
        assert!(load_wa(ragged).is_err());
        assert!(load_wa("not json").is_err());
    }

    proptest! {
        #[test]
        fn bit_exact_round_trip(
            r in 1usize..5,
            k in 1usize..4,
            seed in prop::collection::vec(-1e6f64..1e6, 64),
            scale in -30i32..30,
        ) {
            let f = 10f64.powi(scale);
            let mut it = seed.iter().cycle().map(|x| x * f / 7.0);
            let alpha0 = DVector::from_iterator(r, it.by_ref().take(r));
            let alpha_inf = DVector::from_iterator(r, it.by_ref().take(r));
            let mats = (0..k).map(|_| DMatrix::from_iterator(r, r, it.by_ref().take(r * r))).collect();
            let wa = WeightedAutomaton::new(Alphabet::new(k).unwrap(), alpha0, mats, alpha_inf).unwrap();
            let back = load_wa(&save_wa(&wa)).unwrap();
            prop_assert_eq!(back, wa);
        }
    }
}
